"""Explicit isometric immersions and embeddings of multiple warped product
metrics into semi-Euclidean spaces and quadrics, with numerical verification.
"""

from .blanusa import (
    BlanusaPair,
    Gamma,
    default_gamma,
    normalization,
    psi_hat,
    xi,
    xi_integral,
)
from .embed import (
    EmbeddingModel,
    KINDS,
    build,
    kind_for,
    quadric_signature,
    theorem_signature,
)
from .expr import DomainError, FnExpr, ParseError, parse
from .semispace import AmbientSpace, Quadric, inner, quadric_residual
from .specfile import (
    PRESET_NAMES,
    load_spec,
    parse_spec_text,
    preset_spec_text,
    print_spec_text,
)
from .steps import StepPair, StepSynthesisError, audit_margins, synthesize
from .verify import (
    VerificationReport,
    report_lines,
    run_verification,
)
from .warped import MetricSpec, SpecError, WarpSplit, split, validate

__all__ = [
    "AmbientSpace",
    "BlanusaPair",
    "DomainError",
    "EmbeddingModel",
    "FnExpr",
    "Gamma",
    "KINDS",
    "MetricSpec",
    "ParseError",
    "PRESET_NAMES",
    "Quadric",
    "SpecError",
    "StepPair",
    "StepSynthesisError",
    "VerificationReport",
    "WarpSplit",
    "audit_margins",
    "build",
    "default_gamma",
    "inner",
    "kind_for",
    "load_spec",
    "normalization",
    "parse",
    "parse_spec_text",
    "preset_spec_text",
    "print_spec_text",
    "psi_hat",
    "quadric_residual",
    "quadric_signature",
    "report_lines",
    "run_verification",
    "split",
    "synthesize",
    "theorem_signature",
    "validate",
    "xi",
    "xi_integral",
]

__version__ = "0.1.0"
