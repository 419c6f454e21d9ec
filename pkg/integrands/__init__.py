"""Simple and elementary integrands and their integrals against path ensembles."""

try:
    from .simple import SimpleIntegrand, integral_process, integrate, linear_combination, sup_norm
    from .elementary import (
        ANTICIPATING, LAG_ONE, LAG_ZERO, ElementaryIntegrand, discretize, expected_lagged_sign_mean,
        lagged_sign_integrand, riemann_sum, shift_to_elementary, total_variation,
    )
except ImportError:
    from simple import SimpleIntegrand, integral_process, integrate, linear_combination, sup_norm
    from elementary import (
        ANTICIPATING, LAG_ONE, LAG_ZERO, ElementaryIntegrand, discretize, expected_lagged_sign_mean,
        lagged_sign_integrand, riemann_sum, shift_to_elementary, total_variation,
    )

__all__ = [
    "SimpleIntegrand", "ElementaryIntegrand", "LAG_ZERO", "LAG_ONE", "ANTICIPATING",
    "integrate", "integral_process", "sup_norm", "linear_combination",
    "discretize", "riemann_sum", "shift_to_elementary", "lagged_sign_integrand",
    "expected_lagged_sign_mean", "total_variation",
]
