"""Shared fixtures and independent oracles used across the test suite."""

import numpy as np
import pytest

from fwintensity.likelihood import AdditiveModel
from fwintensity.timeline import build_timeline


def random_timeline(rng, n_jumps=8, dim=2, horizon=10.0, n_updates=5):
    """A small random timeline with updates not aligned to jumps."""
    jumps = np.sort(rng.uniform(0.05, horizon, n_jumps))
    extra = np.sort(rng.uniform(0.0, horizon, n_updates))
    times = np.concatenate([[0.0], extra])
    times = np.unique(times)
    values = rng.uniform(-1.0, 1.0, (len(times), dim))
    return build_timeline(list(zip(times, values)), jumps, horizon)


def random_model(rng, dim, n_atoms=3, scale=0.8):
    """A random additive model over linear/monomial atoms."""
    from fwintensity.dictionary import Linear, Monomial

    coeffs = {}
    for _ in range(n_atoms):
        k = int(rng.integers(0, dim))
        if rng.random() < 0.5:
            atom = Linear(k)
        else:
            atom = Monomial(k, int(rng.integers(2, 4)))
        coeffs[atom] = coeffs.get(atom, 0.0) + float(rng.normal(0, scale))
    return AdditiveModel.build(float(rng.normal(0, 0.3)), coeffs)


def midpoint_grid(timeline, step=1e-3):
    """Midpoint times and cell widths over [0, horizon], with the grid
    refining the covariate-update edges so cells never straddle a
    discontinuity."""
    edges = np.unique(np.append(timeline.update_times, timeline.horizon))
    mids, widths = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = max(int(np.ceil((hi - lo) / step)), 1)
        h = (hi - lo) / m
        mids.append(lo + (np.arange(m) + 0.5) * h)
        widths.append(np.full(m, h))
    return np.concatenate(mids), np.concatenate(widths)


def midpoint_quadrature(fun, timeline, step=1e-3):
    """Midpoint-rule integral of fun(t) over [0, horizon]."""
    mids, widths = midpoint_grid(timeline, step)
    return float(sum(fun(float(t)) * h for t, h in zip(mids, widths)))


def riemann_loglik(model, timeline, step=1e-3):
    """Quadrature likelihood oracle: jump sum minus integrated intensity.

    Pointwise evaluation on a fine midpoint grid; never uses the segment
    sums the implementation relies on.
    """
    mids, widths = midpoint_grid(timeline, step)
    grid_vals = np.array([model.predict(x) for x in timeline.covariates_at(mids)])
    jump_vals = [model.predict(x) for x in timeline.jump_covariates()]
    return float(np.sum(jump_vals) - np.dot(np.exp(grid_vals), widths))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
