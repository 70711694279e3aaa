"""Travelling combustion fronts for p-Laplacian reaction-diffusion-convection equations."""
import os as _os

# the Fortran ODE core buffers its diagnostics on unit 6 unless told otherwise;
# unbuffered output lets the solver mute them while it runs
_os.environ.setdefault("GFORTRAN_UNBUFFERED_PRECONNECTED", "y")

from .criteria import CriteriaReport, Verdict, evaluate  # noqa: E402
from .model import Problem, k_of_p, make_problem, reference_problem  # noqa: E402
from .shooting import Status, WaveSpeedResult, find_c_star  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "CriteriaReport",
    "Problem",
    "Status",
    "Verdict",
    "WaveSpeedResult",
    "evaluate",
    "find_c_star",
    "k_of_p",
    "make_problem",
    "reference_problem",
    "__version__",
]
