"""Exact-arithmetic laboratory for Hecke-Mahler series ``sum f(floor(m theta + alpha)) beta^-m``."""

__version__ = "0.1.0"

from .exact import Enclosure, QuadraticReal, parse_scalar, quad, refine  # noqa: E402
from .contfrac import convergents, expand, explicit_selection, select_indices  # noqa: E402
from .floorseq import DifferenceScheme, FloorSequence, IntPolynomial, w_scan  # noqa: E402
from .series import SeriesSpec, eval_series  # noqa: E402
from .lattice import integer_relation  # noqa: E402
from .witness import run_witness  # noqa: E402

__all__ = [
    "Enclosure", "QuadraticReal", "parse_scalar", "quad", "refine",
    "convergents", "expand", "explicit_selection", "select_indices",
    "DifferenceScheme", "FloorSequence", "IntPolynomial", "w_scan",
    "SeriesSpec", "eval_series", "integer_relation", "run_witness",
]
