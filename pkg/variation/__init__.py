"""Conditional drifts, mean variation, bounded-variation localisation and Doob/Rao decompositions."""

try:
    from .prediction import GaussianPredictor, durbin_levinson
    from .oracles import ConditionalDriftOracle, OracleKind, conditional_drift, drift_matrix
    from .mean_variation import (
        MeanVariationEntry, MeanVariationReport, mean_variation, mean_variation_report, mean_variation_stopped,
    )
    from .localization import bounded_variation_stopping, sign_integrand
    from .decompositions import (
        DoobDecomposition, RaoDecomposition, doob_decompose, martingale_certificate, rao_decompose,
        submartingale_certificates, telescope_paste,
    )
except ImportError:
    from prediction import GaussianPredictor, durbin_levinson
    from oracles import ConditionalDriftOracle, OracleKind, conditional_drift, drift_matrix
    from mean_variation import (
        MeanVariationEntry, MeanVariationReport, mean_variation, mean_variation_report, mean_variation_stopped,
    )
    from localization import bounded_variation_stopping, sign_integrand
    from decompositions import (
        DoobDecomposition, RaoDecomposition, doob_decompose, martingale_certificate, rao_decompose,
        submartingale_certificates, telescope_paste,
    )

__all__ = [
    "GaussianPredictor", "durbin_levinson",
    "ConditionalDriftOracle", "OracleKind", "conditional_drift", "drift_matrix",
    "MeanVariationEntry", "MeanVariationReport", "mean_variation", "mean_variation_stopped", "mean_variation_report",
    "sign_integrand", "bounded_variation_stopping",
    "DoobDecomposition", "RaoDecomposition", "doob_decompose", "rao_decompose",
    "martingale_certificate", "submartingale_certificates", "telescope_paste",
]
