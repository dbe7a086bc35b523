"""Exact sign-representation, rational approximation and hard-halfspace constructions."""

__version__ = "0.1.0"

from .boolfn import BooleanFunction, Halfspace, PointSet, Polynomial  # noqa: E402
from .exactlp import Feasible, Infeasible, LinearProgram, check_feasible, verify_outcome  # noqa: E402
from .fourier import FourierSpectrum, inverse_wht, wht  # noqa: E402
from .rapprox import ApproxBracket, rdeg, rplus_bracket, verify_bracket  # noqa: E402
from .signrep import threshold_degree, threshold_density  # noqa: E402

__all__ = [
    "__version__",
    "BooleanFunction",
    "Halfspace",
    "PointSet",
    "Polynomial",
    "LinearProgram",
    "Feasible",
    "Infeasible",
    "check_feasible",
    "verify_outcome",
    "FourierSpectrum",
    "wht",
    "inverse_wht",
    "ApproxBracket",
    "rplus_bracket",
    "verify_bracket",
    "rdeg",
    "threshold_degree",
    "threshold_density",
]
