"""Dyadic grids, process models, path ensembles and stopping times."""

try:
    from .errors import (
        ConvergenceWarning, DomainError, GridResourceError, InvariantViolation, LabError, StructuralError,
    )
    from .grid import MAX_LEVEL, DyadicGrid, make_grid, require_same_grid
    from .fbm import FbmSynthesizer, fbm_covariance, fgn_autocovariance
    from .models import (
        BoundedTruncation, BrownianMotion, CompensatedPoisson, DeterministicFunction,
        FractionalBrownianMotion, ModelKind, OrnsteinUhlenbeck, ProcessModel, SquaredBrownian, model_from_dict,
    )
    from .ensemble import PathEnsemble, simulate, split_large_jumps, stop
    from .stopping import (
        StoppingTimeVector, abs_at_least, always, at_index, at_least, first_passage, localize_bounded,
        minimum, never, rho_plus,
    )
except ImportError:
    from errors import (
        ConvergenceWarning, DomainError, GridResourceError, InvariantViolation, LabError, StructuralError,
    )
    from grid import MAX_LEVEL, DyadicGrid, make_grid, require_same_grid
    from fbm import FbmSynthesizer, fbm_covariance, fgn_autocovariance
    from models import (
        BoundedTruncation, BrownianMotion, CompensatedPoisson, DeterministicFunction,
        FractionalBrownianMotion, ModelKind, OrnsteinUhlenbeck, ProcessModel, SquaredBrownian, model_from_dict,
    )
    from ensemble import PathEnsemble, simulate, split_large_jumps, stop
    from stopping import (
        StoppingTimeVector, abs_at_least, always, at_index, at_least, first_passage, localize_bounded,
        minimum, never, rho_plus,
    )

__all__ = [
    "LabError", "GridResourceError", "StructuralError", "DomainError", "InvariantViolation", "ConvergenceWarning",
    "MAX_LEVEL", "DyadicGrid", "make_grid", "require_same_grid",
    "FbmSynthesizer", "fbm_covariance", "fgn_autocovariance",
    "ProcessModel", "ModelKind", "BrownianMotion", "FractionalBrownianMotion", "CompensatedPoisson",
    "SquaredBrownian", "OrnsteinUhlenbeck", "DeterministicFunction", "BoundedTruncation", "model_from_dict",
    "PathEnsemble", "simulate", "stop", "split_large_jumps",
    "StoppingTimeVector", "first_passage", "rho_plus", "minimum", "localize_bounded",
    "abs_at_least", "at_least", "always", "never", "at_index",
]
