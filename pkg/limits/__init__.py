"""Min-norm convex combinations, accumulation stopping times, convergence and integrator diagnostics."""

try:
    from .min_norm import ConvexWeights, min_norm_convex
    from .mazur import accumulation_stopping_time, mazur_combinations, mazur_sequence
    from .convergence import (
        ConvergenceReport, convergence_in_probability, distance_matrix, growth_fit, ky_fan_distance, tail_levels,
    )
    from .probe import ProbeLevel, ProbeResult, empirical_quantile, good_integrator_probe, probe_statistic
    from .riemann import (
        RiemannReport, interpolated_sign_witness, riemann_integrator_test, state_function_integrand,
    )
    from .pipeline import PipelineLevel, PipelineReport, theorem1_pipeline
except ImportError:
    from min_norm import ConvexWeights, min_norm_convex
    from mazur import accumulation_stopping_time, mazur_combinations, mazur_sequence
    from convergence import (
        ConvergenceReport, convergence_in_probability, distance_matrix, growth_fit, ky_fan_distance, tail_levels,
    )
    from probe import ProbeLevel, ProbeResult, empirical_quantile, good_integrator_probe, probe_statistic
    from riemann import (
        RiemannReport, interpolated_sign_witness, riemann_integrator_test, state_function_integrand,
    )
    from pipeline import PipelineLevel, PipelineReport, theorem1_pipeline

__all__ = [
    "ConvexWeights", "min_norm_convex",
    "mazur_sequence", "mazur_combinations", "accumulation_stopping_time",
    "ky_fan_distance", "distance_matrix", "ConvergenceReport", "convergence_in_probability", "tail_levels", "growth_fit",
    "ProbeLevel", "ProbeResult", "empirical_quantile", "probe_statistic", "good_integrator_probe",
    "RiemannReport", "state_function_integrand", "interpolated_sign_witness", "riemann_integrator_test",
    "PipelineLevel", "PipelineReport", "theorem1_pipeline",
]
