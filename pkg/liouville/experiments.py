"""Experiment runners, one per CLI command.

Each runner fills a RunOutput row by row so that a failure part-way
through still leaves the finished rows for the quarantine folder.
Replicates run through replicate_map, which keeps replicate order
whatever the thread count.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterator, List, Optional

import numpy as np
from tqdm import tqdm

from liouville.analysis import (
    build_thick_cover,
    conformal_clock_check,
    cover_dimension_estimate,
    hmp_dimension,
    kpz_dimension,
    kpz_inverse,
    liouville_q,
    scale_exponent_for,
    thick_dim_formula,
)
from liouville.brownian import levy_envelope, modulus_of_continuity, pair_count, sample_path
from liouville.clock import (
    clock_process,
    clock_value_at,
    dyadic_totals,
    is_strictly_increasing_on_net,
    lbm_trajectory,
)
from liouville.config import resolve_dt, thread_count
from liouville.errors import LagExceedsDurationError
from liouville.geometry import conformal_radius, field_log_radius
from liouville.gff import (
    TAIL_THRESHOLD,
    circle_average,
    circle_average_evaluator,
    circle_average_variance,
    evaluate_grid,
    sample_gff,
    variance_tail,
)
from liouville.models import Command, DomainSpec, ExperimentConfig, VarianceMode
from liouville.results import RunOutput
from liouville.scaling import moment_estimator, zeta, zeta_derivative_at_one, zeta_min_on_interval

logger = logging.getLogger(__name__)

POSITIVE_FLOOR = 1e-8
IDENTITY_TOLERANCE = 1e-12


def replicate_map(fn: Callable[[int], object], n: int, desc: str) -> Iterator[object]:
    """Yield fn(i) for i in range(n), in order, with a progress bar.

    Results are yielded as soon as they and all earlier ones are done, so a
    caller that records each one keeps everything finished before a failure.
    """
    threads = min(thread_count(), n)
    with tqdm(total=n, desc=desc, unit="replicate", disable=None) as pbar:
        def tracked(replicate: int):
            result = fn(replicate)
            pbar.update(1)
            return result

        if threads <= 1:
            for i in range(n):
                yield tracked(i)
            return
        pool = ThreadPoolExecutor(max_workers=threads)
        try:
            yield from pool.map(tracked, range(n))
        finally:
            pool.shutdown(wait=True, cancel_futures=True)


def make_mapper(desc: str, on_result: Optional[Callable[[int, object], None]] = None) -> Callable:
    """A map-like callable for library functions that take `mapper`.

    `on_result(index, result)` is called for each result in order.
    """
    def mapper(fn, iterable):
        items = list(iterable)
        for i, result in enumerate(replicate_map(lambda j: fn(items[j]), len(items), desc)):
            if on_result is not None:
                on_result(i, result)
            yield result
    return mapper


def _square() -> DomainSpec:
    return DomainSpec.square()


def _mean_and_stderr(values: np.ndarray):
    values = np.asarray(values, dtype=float)
    stderr = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return float(values.mean()), stderr


def run_field_stats(config: ExperimentConfig, output: RunOutput) -> None:
    domain = config.domain_spec()
    start = config.start_point()
    epsilon = 2.0 ** -config.k
    table = output.table("results", ["replicate", "h_eps", "martingale"])
    variance = circle_average_variance(domain, start, epsilon, config.n_modes)
    gamma = config.gamma

    def one(replicate: int):
        field = sample_gff(_square(), config.n_modes, config.seed, replicate)
        value = circle_average(circle_average_evaluator(field, epsilon, domain), start)
        return value, math.exp(gamma * value - 0.5 * gamma ** 2 * variance)

    for replicate, (value, weight) in enumerate(replicate_map(one, config.n_replicates, "field-stats")):
        table.add(replicate, value, weight)

    values = np.array([row[1] for row in table.rows])
    weights = np.array([row[2] for row in table.rows])
    formula = -math.log(epsilon) + float(field_log_radius(domain, start))
    tail = variance_tail(epsilon, config.n_modes, domain)
    martingale_mean, martingale_se = _mean_and_stderr(weights)
    output.summary.update({
        "epsilon": epsilon,
        "empirical_mean": float(values.mean()),
        "empirical_variance": float(values.var(ddof=1)) if values.size > 1 else 0.0,
        "analytic_variance": variance,
        "formula_variance": formula,
        "conformal_radius": float(conformal_radius(domain, start)),
        "truncation_tail": tail,
        "truncation_warning": tail > TAIL_THRESHOLD,
        "martingale_mean": martingale_mean,
        "martingale_stderr": martingale_se,
    })
    if config.export_grid:
        field = sample_gff(_square(), config.n_modes, config.seed, 0)
        xs, ys, grid_values = evaluate_grid(field, config.grid_n, epsilon, domain)
        grid = output.table("grid", ["x", "y", "value"])
        for x, y, v in zip(xs, ys, grid_values):
            grid.add(x, y, v)


def run_clock_mean(config: ExperimentConfig, output: RunOutput) -> None:
    domain = config.domain_spec()
    dt = resolve_dt(config, config.k)
    path = sample_path(domain, config.start_point(), dt, config.max_time, config.seed, 0)
    t_eff = min(config.horizon, path.duration)
    mode = VarianceMode(config.variance_mode)
    table = output.table("results", ["replicate", "mu_t"])
    identity_gap = []

    def one(replicate: int):
        field = sample_gff(_square(), config.n_modes, config.seed, replicate)
        clock = clock_process(field, path, config.gamma, config.k, mode)
        gap = float(np.max(np.abs(clock.values - clock.times))) if config.gamma == 0.0 else 0.0
        return float(clock_value_at(clock, t_eff)), gap

    for replicate, (mu_t, gap) in enumerate(replicate_map(one, config.n_replicates, "clock-mean")):
        table.add(replicate, mu_t)
        identity_gap.append(gap)

    mean, stderr = _mean_and_stderr(np.array([row[1] for row in table.rows]))
    output.summary.update({
        "t": t_eff,
        "path_stopped": path.stopped,
        "exit_time": path.duration if path.stopped else None,
        "dt": dt,
        "mean_clock": mean,
        "stderr": stderr,
        "relative_error": abs(mean - t_eff) / t_eff if t_eff > 0 else 0.0,
        "within_3_stderr": abs(mean - t_eff) <= 3.0 * stderr if stderr > 0 else mean == t_eff,
    })
    if config.gamma == 0.0:
        output.summary["gamma_zero_identity"] = (
            "pass" if max(identity_gap) < IDENTITY_TOLERANCE else "fail"
        )
    if config.export_series:
        field = sample_gff(_square(), config.n_modes, config.seed, 0)
        clock = clock_process(field, path, config.gamma, config.k, mode)
        series = output.table("path", ["t", "x", "y"])
        for t, z in zip(path.times, path.positions):
            series.add(t, z.real, z.imag)
        mu = output.table("clock", ["t", "mu"])
        for t, value in zip(clock.times, clock.values):
            mu.add(t, value)
        trajectory = lbm_trajectory(path, clock, dt)
        traj = output.table("trajectory", ["tau", "x", "y"])
        for j, z in enumerate(trajectory.points):
            traj.add(j * trajectory.quantum_dt, z.real, z.imag)


def run_converge(config: ExperimentConfig, output: RunOutput) -> None:
    domain = config.domain_spec()
    dt = resolve_dt(config, config.k_max)
    levels = list(range(config.k_min, config.k_max + 1))
    table = output.table("results", ["replicate", "k", "alpha_k", "alpha_k1", "abs_diff"])

    def one(replicate: int):
        field = sample_gff(_square(), config.n_modes, config.seed, replicate)
        path = sample_path(domain, config.start_point(), dt, config.max_time, config.seed, replicate)
        return dyadic_totals(field, path, config.gamma, levels, config.horizon)

    diffs = []
    for replicate, totals in enumerate(replicate_map(one, config.n_replicates, "converge")):
        for k, a, b in zip(levels[:-1], totals[:-1], totals[1:]):
            table.add(replicate, k, a, b, abs(b - a))
        diffs.append(np.abs(np.diff(totals)))

    medians = np.median(np.asarray(diffs), axis=0)
    ratios = [float(b / a) if a > 0 else math.nan for a, b in zip(medians[:-1], medians[1:])]
    finite = [r for r in ratios if np.isfinite(r) and r > 0]
    output.summary.update({
        "levels": levels[:-1],
        "median_abs_diff": medians.tolist(),
        "successive_ratios": ratios,
        "fitted_ratio": float(np.exp(np.mean(np.log(finite)))) if finite else None,
        "strictly_decreasing": bool(np.all(np.diff(medians) < 0.0)),
    })


def run_positivity(config: ExperimentConfig, output: RunOutput) -> None:
    domain = config.domain_spec()
    dt = resolve_dt(config, config.k)
    table = output.table("results", ["gamma", "replicate", "total", "positive", "strictly_increasing"])
    per_gamma: Dict[str, Dict[str, float]] = {}
    for gamma in config.gammas:
        def one(replicate: int, gamma=gamma):
            field = sample_gff(_square(), config.n_modes, config.seed, replicate)
            path = sample_path(domain, config.start_point(), dt, config.max_time, config.seed, replicate)
            clock = clock_process(field, path, gamma, config.k)
            spacing = max(config.resolution, dt)
            increasing = is_strictly_increasing_on_net(clock, spacing) if path.duration >= spacing else True
            return clock.total, increasing

        rows = []
        for replicate, (total, increasing) in enumerate(
                replicate_map(one, config.n_replicates, f"positivity gamma={gamma:g}")):
            table.add(gamma, replicate, total, total > POSITIVE_FLOOR, increasing)
            rows.append((total, increasing))
        per_gamma[f"{gamma:g}"] = {
            "fraction_positive": float(np.mean([total > POSITIVE_FLOOR for total, _ in rows])),
            "fraction_strictly_increasing": float(np.mean([inc for _, inc in rows])),
        }
    output.summary["gammas"] = per_gamma
    output.summary["resolution"] = config.resolution


def run_conformal_check(config: ExperimentConfig, output: RunOutput) -> None:
    table = output.table("results", ["theta", "statistic", "pvalue", "reject", "q_value"])
    samples = output.table("samples", ["theta", "replicate", "direct", "rotated"])
    reports = []
    for theta in config.theta:
        def record(replicate: int, totals, theta=theta):
            samples.add(theta, replicate, *totals)

        report = conformal_clock_check(
            config.gamma, config.k, theta, config.n_replicates, config.seed,
            start=config.start_point(), margin=config.margin, n_modes=config.n_modes,
            dt=config.dt, max_time=config.max_time, shared_seeds=config.shared_seeds,
            mapper=make_mapper(f"conformal-check theta={theta:.4g}", record),
        )
        table.add(theta, report.statistic, report.pvalue, report.reject, report.q_value)
        reports.append({"theta": theta, "statistic": report.statistic,
                        "pvalue": report.pvalue, "reject": report.reject})
    output.summary.update({"q_value": liouville_q(config.gamma), "checks": reports,
                           "level": 0.05})


def run_thick_dim(config: ExperimentConfig, output: RunOutput) -> None:
    domain = config.domain_spec()
    dt = resolve_dt(config, config.k)
    q_grid = sorted(config.q_grid)
    header = ["replicate", "n", "radius", "net_size", "selected", "dropped", "sum_diam"]
    header += [f"sum_diam_q{q:g}" for q in q_grid]
    table = output.table("results", header)
    dims = output.table("dimensions", ["replicate", "estimate", "empty", "partial"])

    def one(replicate: int):
        field = sample_gff(_square(), config.n_modes, config.seed, replicate)
        path = sample_path(domain, config.start_point(), dt, config.max_time, config.seed, replicate)
        clock = clock_process(field, path, config.gamma, config.k)
        cover = build_thick_cover(field, path, clock, config.alpha, config.delta,
                                  config.eta, config.n_range)
        return cover, cover_dimension_estimate(cover, q_grid, config.threshold)

    counts: Dict[int, List[int]] = {}
    tails: Dict[int, List[float]] = {}
    estimates = []
    for replicate, (cover, dimension) in enumerate(replicate_map(one, config.n_replicates, "thick-dim")):
        for scale in cover.scales:
            diameters = scale.diameters
            table.add(replicate, scale.n, scale.radius, scale.net_size, scale.selected.size,
                      scale.dropped, float(diameters.sum()),
                      *[float(np.sum(diameters ** q)) for q in q_grid])
            counts.setdefault(scale.n, []).append(scale.selected.size)
            tails.setdefault(scale.n, []).append(scale.expected_selected)
        dims.add(replicate, dimension.value, dimension.empty, cover.partial_coverage)
        estimates.append(dimension.value)

    exponent = -2.0 + 0.5 * (config.alpha - config.delta) ** 2
    expected = {}
    for n, values in sorted(counts.items()):
        radius = float(n) ** -scale_exponent_for(config.alpha, config.eta)
        observed, reference = float(np.mean(values)), float(np.mean(tails[n]))
        ratio = observed / reference if reference > 0.0 else None
        expected[str(n)] = {
            "mean_selected": observed,
            "tail_reference": reference,
            "ratio": ratio,
            "within_factor_3": ratio is not None and 1.0 / 3.0 <= ratio <= 3.0,
            "power_reference": radius ** exponent,
        }
    estimates = np.asarray(estimates)
    output.summary.update({
        "formula": thick_dim_formula(config.alpha, config.gamma),
        "hmp_dimension": hmp_dimension(config.alpha),
        "estimates_in_unit_interval": bool(np.all((estimates >= 0.0) & (estimates <= 1.0))),
        "fraction_below_one": float(np.mean(estimates < 1.0)),
        "median_estimate": float(np.median(estimates)),
        "selection_counts": expected,
    })


def run_kpz_table(config: ExperimentConfig, output: RunOutput) -> None:
    table = output.table("results", ["d0", "d", "inverse_residual"])
    for d0 in config.d0:
        d = kpz_dimension(d0, config.gamma)
        table.add(d0, d, kpz_inverse(d, config.gamma) - d0)
    output.summary.update({
        "gamma": config.gamma,
        "q_value": liouville_q(config.gamma) if config.gamma > 0 else None,
        "endpoints": {"d0=0": kpz_dimension(0.0, config.gamma),
                      "d0=2": kpz_dimension(2.0, config.gamma)},
    })


def run_moments(config: ExperimentConfig, output: RunOutput) -> None:
    header = ["gamma", "q", "epsilon", "m", "estimate", "stderr", "diagonal_share",
              "cross_share", "n_replicates", "seed"]
    table = output.table("results", header)
    reports = []
    for epsilon in config.epsilons:
        estimate = moment_estimator(config.gamma, config.q, epsilon, config.m,
                                    config.n_replicates, config.seed,
                                    start=config.start_point(), horizon=config.max_time,
                                    max_points=config.max_points,
                                    mapper=make_mapper(f"moments eps={epsilon:g}"))
        report = estimate.to_report()
        table.add(*[report[name] for name in header])
        reports.append(report)
    q_star, zeta_min = zeta_min_on_interval(config.gamma)
    output.summary.update({
        "zeta_q": zeta(config.q, config.gamma),
        "zeta_derivative_at_one": zeta_derivative_at_one(config.gamma),
        "zeta_minimizer": q_star,
        "zeta_min": zeta_min,
        "reports": reports,
    })


def run_pair_count(config: ExperimentConfig, output: RunOutput) -> None:
    dt = config.dt if config.dt is not None else 0.25 ** max(config.ks)
    table = output.table("results", ["replicate", "k", "max_count", "normalized",
                                     "modulus", "levy_bound"])

    def one(replicate: int):
        path = sample_path(None, config.start_point(), dt, config.max_time, config.seed, replicate)
        rows = []
        for k in config.ks:
            spacing = 0.25 ** k
            offsets = [spacing * j / config.n_offsets for j in range(config.n_offsets)]
            best = max(pair_count(path, k, s) for s in offsets)
            try:
                modulus = modulus_of_continuity(path, spacing)
            except LagExceedsDurationError:
                modulus = math.nan
            rows.append((k, best, best / (4.0 ** k * k ** 3), modulus, 3.0 * levy_envelope(spacing)))
        return rows, path.duration < 1.0

    partial_any = False
    per_k: Dict[int, List[float]] = {}
    for replicate, (rows, partial) in enumerate(replicate_map(one, config.n_replicates, "pair-count")):
        partial_any = partial_any or partial
        for k, best, normalized, modulus, bound in rows:
            table.add(replicate, k, best, normalized, modulus, bound)
            per_k.setdefault(k, []).append(normalized)

    maxima = {str(k): float(np.max(v)) for k, v in sorted(per_k.items())}
    first, last = min(per_k), max(per_k)
    growth = float(np.max(per_k[last]) / np.max(per_k[first])) if first != last else 1.0
    output.summary.update({
        "max_normalized": maxima,
        "growth_first_to_last": growth,
        "bounded_within_20_percent": growth <= 1.2,
        "partial_coverage": partial_any,
    })


RUNNERS: Dict[Command, Callable[[ExperimentConfig, RunOutput], None]] = {
    Command.FIELD_STATS: run_field_stats,
    Command.CLOCK_MEAN: run_clock_mean,
    Command.CONVERGE: run_converge,
    Command.POSITIVITY: run_positivity,
    Command.CONFORMAL_CHECK: run_conformal_check,
    Command.THICK_DIM: run_thick_dim,
    Command.KPZ_TABLE: run_kpz_table,
    Command.MOMENTS: run_moments,
    Command.PAIR_COUNT: run_pair_count,
}


def run_command(config: ExperimentConfig, output: RunOutput) -> RunOutput:
    """Dispatch to the runner for config.command, filling `output` in place."""
    logger.info(f"Running {config.command.value} (seed={config.seed}, replicates={config.n_replicates})")
    RUNNERS[config.command](config, output)
    return output
