"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is used when it
is unavailable or when FWINTENSITY_PURE_PYTHON=1 is set.
"""

import os

if os.environ.get("FWINTENSITY_PURE_PYTHON") == "1":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND

loglik = kernels.loglik
golden_rho = kernels.golden_rho
hawkes_z = kernels.hawkes_z
disc_counts = kernels.disc_counts
duration_root = kernels.duration_root
