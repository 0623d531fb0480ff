"""LP-based partial facial reduction for semidefinite and linear conic programs."""

from .approx import DIAG, DIAG_DOM, SCALED_DIAG_DOM, factor_width, generators, parse_family
from .certsearch import Certificate, find_certificate, verify_certificate
from .chain import FaceChain
from .errors import FaceredError
from .faces import BlockFace, FaceState
from .model import (ConeBlock, ConeKind, ConicProblem, Free, NonNeg, PSD, Quad, Side, problem_dims,
                    smat, svec, validate)
from .recover import (assemble_extended_dual, check_condition1, check_condition2, lift_solution,
                      recover_counterpart, verify_extended_dual)
from .reduce import reduce
from .settings import DEFAULT_TOLERANCES, Tolerances

__version__ = "0.1.0"

__all__ = [
    "DIAG", "DIAG_DOM", "SCALED_DIAG_DOM", "factor_width", "generators", "parse_family",
    "Certificate", "find_certificate", "verify_certificate", "FaceChain", "FaceredError",
    "BlockFace", "FaceState", "ConeBlock", "ConeKind", "ConicProblem", "Free", "NonNeg", "PSD",
    "Quad", "Side", "problem_dims", "smat", "svec", "validate", "assemble_extended_dual",
    "check_condition1", "check_condition2", "lift_solution", "recover_counterpart",
    "verify_extended_dual", "reduce", "DEFAULT_TOLERANCES", "Tolerances",
]
