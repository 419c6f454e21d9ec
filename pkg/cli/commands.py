"""
Subcommands. Each takes a validated ScenarioConfig and the output directory,
writes its files and returns the list of violated postconditions.
run_command turns that list into an exit code and failures.json.
"""

import logging
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np

from grid_paths import InvariantViolation, PathEnsemble, make_grid, simulate
from limits import (
    accumulation_stopping_time,
    convergence_in_probability,
    good_integrator_probe,
    mazur_combinations,
    mazur_sequence,
    riemann_integrator_test,
    theorem1_pipeline,
)
from limits.probe import build_member
from variation import (
    ConditionalDriftOracle,
    bounded_variation_stopping,
    martingale_certificate,
    mean_variation_report,
    rao_decompose,
    sign_integrand,
    submartingale_certificates,
)

try:
    from cli.config import ScenarioConfig
    from cli import reporting
except ImportError:
    from .config import ScenarioConfig
    from . import reporting

logger = logging.getLogger(__name__)

SUCCESS = 0
FAILURE = 1
CONFIG_ERROR = 2

# relative to max(1, max|S|)
RECONSTRUCTION_TOLERANCE = 1e-9
CERTIFICATE_TOLERANCE = 1e-9

Failures = List[dict]


def scenario_ensemble(config: ScenarioConfig) -> PathEnsemble:
    model = config.build_model()
    grid = make_grid(config.grid.simulation_level)
    logger.info(f"Simulating {config.run.n_paths} paths of {model!r} on D_{grid.level} (seed {config.run.seed})")
    return simulate(model, grid, config.run.n_paths, config.run.seed, workers=config.run.workers)


def scenario_oracle(config: ScenarioConfig, ensemble: PathEnsemble) -> ConditionalDriftOracle:
    oracle = ConditionalDriftOracle.for_model(ensemble.model, config.oracle.kind, config.oracle.bandwidth)
    logger.info(f"Drift oracle: {oracle.kind.value}")
    return oracle


def _scale(ensemble: PathEnsemble) -> float:
    return max(1.0, ensemble.empirical_sup())


def cmd_simulate(config: ScenarioConfig, directory: Path) -> Failures:
    ensemble = scenario_ensemble(config)
    reporting.write_ensemble(ensemble, directory, fmt=config.output.format)
    return []


def cmd_mean_variation(config: ScenarioConfig, directory: Path) -> Failures:
    ensemble = scenario_ensemble(config)
    oracle = scenario_oracle(config, ensemble)
    report = mean_variation_report(ensemble, oracle, config.grid.levels)
    for entry in report.entries:
        logger.info(f"    n = {entry.level:2d}: Var = {entry.estimate:.6g} +/- {entry.stderr:.2g}")
    reporting.write_mean_variation(report, directory, config.output.format)
    failures = []
    if oracle.exact and not report.is_monotone():
        failures.append({"check": "Var(S, D_n) non-decreasing in n", "estimates": report.estimates.tolist()})
    return failures


def cmd_decompose(config: ScenarioConfig, directory: Path) -> Failures:
    ensemble = scenario_ensemble(config)
    oracle = scenario_oracle(config, ensemble)
    coarse = make_grid(max(config.grid.levels))
    rao = rao_decompose(ensemble, oracle, coarse)
    reporting.write_decomposition(rao, directory, config.output.format)

    scale = _scale(ensemble)
    failures = []
    checks = {
        "S = M + A": rao.doob.reconstruction_error(),
        "S = Y - Z": rao.reconstruction_error(),
    }
    for check, error in checks.items():
        if error > RECONSTRUCTION_TOLERANCE * scale:
            failures.append({"check": check, "value": error, "bound": RECONSTRUCTION_TOLERANCE * scale})
    residual = float(np.max(martingale_certificate(rao.doob)))
    if residual > CERTIFICATE_TOLERANCE * scale:
        failures.append({"check": "M is a martingale along D_n", "value": residual})
    upper, lower = submartingale_certificates(rao)
    for name, certificate in (("Y", upper), ("Z", lower)):
        worst = float(np.min(certificate))
        if worst < -CERTIFICATE_TOLERANCE * scale:
            failures.append({"check": f"{name} is a submartingale along D_n", "value": worst})
    return failures


def _probe(config: ScenarioConfig, ensemble: PathEnsemble, oracle: ConditionalDriftOracle):
    thresholds = config.thresholds
    return good_integrator_probe(
        ensemble,
        config.grid.levels,
        config.run.epsilon,
        family=config.probe.family,
        oracle=oracle,
        bounded_exponent=thresholds.bounded_exponent,
        unbounded_exponent=thresholds.unbounded_exponent,
        min_fit=thresholds.min_fit,
        fit_fraction=thresholds.tail_fraction,
        workers=config.run.workers or 1,
    )


def cmd_probe(config: ScenarioConfig, directory: Path) -> Failures:
    ensemble = scenario_ensemble(config)
    oracle = scenario_oracle(config, ensemble)
    probe = _probe(config, ensemble, oracle)
    logger.info(f"Probe verdict: {probe.verdict} (exponent {probe.exponent:.3f}, r^2 {probe.fit:.3f})")
    reporting.write_report(probe.to_dict(), reporting.probe_rows(probe), directory, "probe", config.output.format)
    top = max(config.grid.levels)
    for name in config.probe.family:
        integrand = build_member(name, ensemble, top, oracle)
        reporting.write_integrand(integrand, directory, f"integrand_{name}_n{top}", config.output.format)
    return []


def cmd_riemann(config: ScenarioConfig, directory: Path) -> Failures:
    ensemble = scenario_ensemble(config)
    thresholds = config.thresholds
    report = riemann_integrator_test(
        ensemble,
        config.grid.levels,
        tau_conv=thresholds.tau_conv,
        tau_div=thresholds.tau_div,
        tail_fraction=thresholds.tail_fraction,
        bounded_exponent=thresholds.bounded_exponent,
        unbounded_exponent=thresholds.unbounded_exponent,
    )
    logger.info(f"Riemann integrator: {report.verdict}")
    reporting.write_report(report.to_dict(), reporting.riemann_rows(report), directory, "riemann",
                           config.output.format)
    return []


def cmd_theorem1(config: ScenarioConfig, directory: Path) -> Failures:
    ensemble = scenario_ensemble(config)
    oracle = scenario_oracle(config, ensemble)
    probe = _probe(config, ensemble, oracle)
    report = theorem1_pipeline(
        ensemble,
        config.run.epsilon,
        config.grid.levels,
        oracle=oracle,
        family=config.probe.family,
        window=config.mazur.window,
        factor=config.thresholds.domination_factor,
        probe=probe,
        workers=config.run.workers or 1,
    )
    reporting.write_report(report.to_dict(), reporting.pipeline_rows(report), directory, "theorem1",
                           config.output.format)
    reporting.write_stopping_times({"rho": report.rho}, directory)
    return report.failures


def cmd_mazur_demo(config: ScenarioConfig, directory: Path) -> Failures:
    ensemble = scenario_ensemble(config)
    oracle = scenario_oracle(config, ensemble)
    levels = config.grid.levels
    sup, declared = ensemble.sup_bound()
    probe = _probe(config, ensemble, oracle)
    constant = probe.localization_constant(sup)

    rhos = [
        bounded_variation_stopping(ensemble, sign_integrand(ensemble, oracle, n), constant, sup, declared)
        for n in levels
    ]
    samples = [rho_n.is_infinite.astype(np.float64) for rho_n in rhos]
    sequence = mazur_sequence(samples, config.mazur.window)
    combinations = mazur_combinations(samples, sequence)
    rho = accumulation_stopping_time(rhos, sequence, config.thresholds.domination_factor)
    thresholds = config.thresholds
    convergence = convergence_in_probability(
        levels, list(combinations), thresholds.tau_conv, thresholds.tau_div, thresholds.tail_fraction
    )
    logger.info(f"Mazur combinations: {convergence.verdict}; {rho.fraction_infinite:.3f} of paths never stopped")

    rows = []
    for level, rho_n, weights, combination in zip(levels, rhos, sequence, combinations):
        rows.append(reporting.report_row(level, "fraction_unstopped", rho_n.fraction_infinite))
        rows.append(reporting.report_row(level, "squared_norm", weights.squared_norm))
        rows.append(reporting.report_row(level, "gap", weights.gap))
        rows.append(reporting.report_row(level, "combination_mean", float(np.mean(combination)),
                                           float(np.std(combination, ddof=1) / np.sqrt(combination.size))))
    payload = {
        "C": constant,
        "sup_bound": sup,
        "sup_bound_declared": declared,
        "factor": thresholds.domination_factor,
        "window": config.mazur.window,
        "levels": [{"n": n, "fraction_unstopped": r.fraction_infinite} for n, r in zip(levels, rhos)],
        "weights": [w.to_dict() for w in sequence],
        "fraction_unstopped": rho.fraction_infinite,
        "combinations": convergence.to_dict(),
    }
    reporting.write_report(payload, rows, directory, "mazur", config.output.format)
    times = {f"rho_{n}": r for n, r in zip(levels, rhos)}
    times["rho"] = rho
    reporting.write_stopping_times(times, directory)

    failures = []
    if config.mazur.window >= len(levels):
        norms = np.array([w.squared_norm for w in sequence])
        if np.any(np.diff(norms) < -CERTIFICATE_TOLERANCE):
            failures.append({"check": "tail min-norms non-decreasing", "value": norms.tolist()})
    return failures


COMMANDS: Dict[str, Callable[[ScenarioConfig, Path], Failures]] = {
    "simulate": cmd_simulate,
    "mean-variation": cmd_mean_variation,
    "decompose": cmd_decompose,
    "probe": cmd_probe,
    "riemann": cmd_riemann,
    "theorem1": cmd_theorem1,
    "mazur-demo": cmd_mazur_demo,
}


def run_command(name: str, config: ScenarioConfig) -> int:
    """
    Run one subcommand. Returns 0 when every postcondition held, 1 otherwise
    (with failures.json next to the results).

    Raises:
        OSError: the output directory cannot be created or written
        DomainError: the model and the requested analysis do not fit together
    """
    directory = reporting.prepare_directory(config.output.directory)
    reporting.clear_failures(directory)
    reporting.write_config(config.flat(), directory)
    try:
        failures = COMMANDS[name](config, directory)
    except InvariantViolation as e:
        logger.error(f"{name}: invariant violated: {e}")
        failures = [{"check": "invariant", "message": str(e)}]

    if failures:
        reporting.write_failures(name, failures, directory)
        for failure in failures:
            logger.warning(f"FAILED {failure['check']}: {failure}")
        return FAILURE
    return SUCCESS
