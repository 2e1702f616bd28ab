"""Choice of the l1 budget over a grid by AIC or validation likelihood."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .dictionary import Bernstein, DictionaryConfig, HawkesFeature, Sigmoid
from .errors import EmptyValidation
from .fw import FitConfig, FitTrace, fit
from .likelihood import AdditiveModel, log_likelihood
from .timeline import EventTimeline, concat


def atom_param_count(atom) -> int:
    """Parameters an active atom contributes to the AIC penalty."""
    if isinstance(atom, Sigmoid):
        return 4
    if isinstance(atom, Bernstein):
        return atom.order + 1
    if isinstance(atom, HawkesFeature):
        return 1
    return 1


def active_param_count(model: AdditiveModel) -> int:
    """Number of nonzero parameters (negligible coefficients are already
    dropped at model construction)."""
    return sum(atom_param_count(a) for a, _ in model.terms)


@dataclass
class SelectionReport:
    """Per-budget diagnostics plus the winning fit."""

    best_budget: float
    rows: list
    model: AdditiveModel
    trace: FitTrace

    def to_dict(self) -> dict:
        return {"best_budget": self.best_budget, "per_budget": self.rows}


def aic_select(timeline: EventTimeline, grid, dict_config: DictionaryConfig,
               fit_config: FitConfig, scan_step_rule: str | None = None):
    """Pick the budget maximizing in-sample likelihood minus the active
    parameter count; ties go to the smaller budget.

    `scan_step_rule` optionally overrides the step rule during the grid
    scan (the winner is then refit with the configured rule).
    """
    grid = sorted(float(b) for b in grid)
    if not grid:
        raise ValueError("budget grid must be nonempty")
    scan_config = fit_config
    if scan_step_rule is not None:
        scan_config = replace(fit_config, step_rule=scan_step_rule)
    rows, fits = [], []
    best_i, best_aic = 0, -float("inf")
    for i, b in enumerate(grid):
        model, trace = fit(timeline, dict_config, replace(scan_config, budget=b))
        ll = log_likelihood(model, timeline)
        k_b = active_param_count(model)
        aic = ll - k_b
        rows.append({"budget": b, "loglik_in": ll, "K_B": k_b, "aic": aic})
        fits.append((model, trace))
        if aic > best_aic:
            best_i, best_aic = i, aic
    model, trace = fits[best_i]
    if scan_step_rule is not None and scan_step_rule != fit_config.step_rule:
        model, trace = fit(
            timeline, dict_config, replace(fit_config, budget=grid[best_i])
        )
    return grid[best_i], SelectionReport(grid[best_i], rows, model, trace)


def validation_select(train: EventTimeline, validation: EventTimeline,
                      grid, dict_config: DictionaryConfig,
                      fit_config: FitConfig):
    """Pick the budget maximizing the validation likelihood of train-sample
    fits, then refit on train + validation at that budget."""
    if validation.n_jumps == 0:
        raise EmptyValidation("validation sample has no jumps")
    grid = sorted(float(b) for b in grid)
    if not grid:
        raise ValueError("budget grid must be nonempty")
    rows = []
    best_i, best_ll = 0, -float("inf")
    for i, b in enumerate(grid):
        model, _ = fit(train, dict_config, replace(fit_config, budget=b))
        ll_in = log_likelihood(model, train)
        ll_val = log_likelihood(model, validation)
        rows.append({
            "budget": b, "loglik_in": ll_in,
            "K_B": active_param_count(model), "aic": ll_in - active_param_count(model),
            "loglik_valid": ll_val,
        })
        if ll_val > best_ll:
            best_i, best_ll = i, ll_val
    combined = concat(train, validation)
    model, trace = fit(
        combined, dict_config, replace(fit_config, budget=grid[best_i])
    )
    return grid[best_i], SelectionReport(grid[best_i], rows, model, trace)
