"""
Experiment runners.

Each runner turns a validated config into an ``ExperimentReport``. Replicate
and case streams are derived from the config seed only, so a report depends
on the config alone and never on the thread count.
"""

import time
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from ..analysis import concentration, esp, gamma
from ..analysis.conditions import Method, regime_classifier
from ..core.distributions import parse_distribution, parse_z_distribution
from ..core.errors import PreconditionError, ResourceCapError
from ..core.rng import MATRIX_STREAMS, RngStream
from ..core.tensor_model import TensorModelSpec, sample_covariance
from ..spectral import mp_law
from ..spectral.spectra import eigenvalues_sym, histogram
from ..utils.helpers import clamp, parse_d_rule
from .config import (
    CommonConfig,
    ConditionsConfig,
    EspLlnConfig,
    GammaConfig,
    MpEsdConfig,
    QformVarConfig,
)
from .logging import ExperimentLogger, get_logger
from .reports import CaseError, ExperimentReport, plain

SMALL_P_WARNING = 30
BOUND_SIGMAS = 3.0
BOUND_RELATIVE_SLACK = 1e-12
SANDWICH_RELATIVE_SLACK = 1e-9
# esp-lln grid point g, replicate r -> stream (g << 20) + r
GRID_STREAM_SHIFT = 20


def _median(values: Sequence[float]) -> float:
    return float(np.median(np.asarray(values, dtype=np.float64)))


def _quartiles(values: Sequence[float]) -> Dict[str, Any]:
    finite = np.asarray([v for v in values if v is not None], dtype=np.float64)
    if finite.size == 0:
        return {"median": None, "q1": None, "q3": None}
    q1, med, q3 = np.quantile(finite, [0.25, 0.5, 0.75])
    return {"median": float(med), "q1": float(q1), "q3": float(q3)}


def run_mp_esd(config: MpEsdConfig, log: ExperimentLogger) -> ExperimentReport:
    """
    ESD of the tensor sample covariance against MP(p/N).

    Replicate r draws from stream r. Eigenvalues within zero_tol * max|lambda|
    of zero are snapped to 0 before KS, W1 and the histogram, which pools all
    replicates on ``bins`` equal cells over [0, hist_scale * a_plus].
    """
    spec = TensorModelSpec(config.n, config.d, parse_distribution(config.dist))
    p = spec.p
    mp = mp_law.MPParams.from_dimensions(p, config.N)
    hi = config.hist_scale * mp.a_plus
    warnings: List[str] = []
    if p < SMALL_P_WARNING:
        warnings.append(
            f"p = {p} < {SMALL_P_WARNING}: the ESD has few atoms, KS is coarse"
        )

    rows = []
    counts = np.zeros(config.bins, dtype=np.int64)
    edges: List[float] = []
    below = above = 0
    for r in range(config.reps):
        sigma = sample_covariance(
            spec, config.N, RngStream(config.seed, r), config.max_p, config.threads
        )
        esd = eigenvalues_sym(sigma).snap_zeros(config.zero_tol)
        hist = histogram(esd, config.bins, 0.0, hi)
        counts += np.asarray(hist.counts, dtype=np.int64)
        edges = hist.edges
        below += hist.below
        above += hist.above
        row = {
            "replicate": r,
            "ks": mp_law.ks_distance(esd, mp),
            "w1": mp_law.wasserstein1(esd, mp),
            "trace_over_p": esd.moment(1),
            "second_moment": esd.moment(2),
            "mp_second_moment": mp_law.moment(2, mp),
            "lambda_min": float(esd.eigenvalues[0]),
            "lambda_max": float(esd.eigenvalues[-1]),
            "zero_fraction": esd.zero_count / p,
        }
        rows.append(row)
        log.info("experiment.case", {"experiment": "mp-esd", **row})

    centers = 0.5 * (np.asarray(edges[:-1]) + np.asarray(edges[1:]))
    summary = {
        "p": p,
        "N": config.N,
        "rho": mp.rho,
        "a_minus": mp.a_minus,
        "a_plus": mp.a_plus,
        "atom_mass": mp.atom_mass,
        "ks_median": _median([row["ks"] for row in rows]),
        "w1_median": _median([row["w1"] for row in rows]),
        "histogram": {
            "edges": edges,
            "counts": counts,
            "below": below,
            "above": above,
            "mp_density_at_centers": mp_law.density(centers, mp),
        },
    }
    return _report(config, "mp-esd", rows, summary, warnings=warnings)


def _qform_case(
    config: QformVarConfig, spec: TensorModelSpec, c: int, name: str
) -> Dict[str, Any]:
    p = spec.p
    K = spec.dist.fourth_moment()
    # inadmissible cells fail before any dense matrix is built
    expected = concentration.generator_kind(concentration.parse_matrix_spec(name)[0])
    if expected is not None:
        concentration.check_theorem2_hypotheses(expected, K, spec.d, spec.n)
    case = concentration.build_matrix_case(
        name, p, RngStream(config.seed, MATRIX_STREAMS + c), config.max_p
    )
    bound = concentration.bound_theorem2(case, p, case.trAAt, K, spec.d, spec.n)
    est = concentration.mc_variance(
        spec,
        case,
        config.reps,
        RngStream(config.seed, c),
        config.batches,
        config.threads,
    )
    lower_edge = est.point - BOUND_SIGMAS * est.std_error
    row: Dict[str, Any] = {
        "case": case.label,
        "kind": case.kind.value,
        "p": p,
        "trAAt": case.trAAt,
        "spectral_norm": case.spectral_norm,
        "K": K,
        "mc_variance": est.point,
        "std_error": est.std_error,
        "bound": bound,
        "bound_ok": lower_edge <= bound * (1.0 + BOUND_RELATIVE_SLACK),
        "ratio": est.point / bound if bound > 0 else None,
    }
    if case.generator is concentration.MatrixGenerator.IDENTITY:
        row["hoeffding_lower"] = concentration.hoeffding_lower(p, K, spec.d, spec.n)
        try:
            lower, exact, upper = concentration.diagonal_sandwich(spec)
        except ResourceCapError as exc:
            row["exact_variance"] = None
            row["exact_skipped"] = str(exc)
        else:
            row["exact_variance"] = exact
            row["sandwich_ok"] = (
                lower <= exact * (1.0 + SANDWICH_RELATIVE_SLACK)
                and exact <= upper * (1.0 + SANDWICH_RELATIVE_SLACK)
            )
            row["mc_within_4se_of_exact"] = est.within(exact)
    return row


def run_qform_var(config: QformVarConfig, log: ExperimentLogger) -> ExperimentReport:
    """
    Monte Carlo variance of x^T A x for each requested matrix, checked
    against the variance bound. Case c samples from stream c; its random
    matrix comes from stream MATRIX_STREAMS + c.
    """
    spec = TensorModelSpec(config.n, config.d, parse_distribution(config.dist))
    rows, errors = [], []
    for c, name in enumerate(config.matrix):
        try:
            row = _qform_case(config, spec, c, name)
        except (PreconditionError, ResourceCapError) as exc:
            errors.append(CaseError.from_exception(name, exc))
            log.log_event(
                "WARNING",
                "experiment.case_failed",
                {"experiment": "qform-var", "case": name, "error": str(exc)},
            )
            continue
        rows.append(row)
        log.info("experiment.case", {"experiment": "qform-var", **row})

    summary = {
        "p": spec.p,
        "K": spec.dist.fourth_moment(),
        "cases": len(config.matrix),
        "cases_evaluated": len(rows),
        "all_bound_ok": all(row["bound_ok"] for row in rows),
    }
    return _report(config, "qform-var", rows, summary, errors=errors)


def _esp_replicate(z: np.ndarray, d: int) -> Dict[str, Any]:
    log_u = esp.log_ustat(z, d)
    saddle = esp.solve_rho(z, d)
    gap: Optional[float] = None
    if saddle.satisfied_equation and log_u.sign != 0:
        gap = abs(log_u.log_magnitude - esp.asymptotic_log_ustat(z, d))
    tail, fourth = esp.empirical_condition_iii(z, d)
    return {
        "u": log_u.value(),
        "lln": esp.lln_statistic(z, d),
        "maclaurin_ok": esp.maclaurin_check(z, d),
        "rho": saddle.rho,
        "fallback": not saddle.satisfied_equation,
        "residual": saddle.residual,
        "gap": gap,
        "cond_tail": tail,
        "cond_fourth": fourth,
    }


def run_esp_lln(config: EspLlnConfig, log: ExperimentLogger) -> ExperimentReport:
    """
    U-statistic law of large numbers along ``n_grid`` with d = d_rule(n)
    clamped into [1, n - 1], and the saddle-point log-U gap.
    """
    z_dist = parse_z_distribution(config.z_dist)
    rule = parse_d_rule(config.d_rule)
    rows = []
    for g, n in enumerate(config.n_grid):
        d = clamp(rule(n), 1, n - 1)
        reps = []
        for r in range(config.reps):
            stream = RngStream(config.seed, (g << GRID_STREAM_SHIFT) + r)
            z = np.asarray(z_dist.sample(stream.generator(0), n), dtype=np.float64)
            reps.append(_esp_replicate(z, d))
        row = {
            "n": n,
            "d": d,
            "z_dist": z_dist.label,
            "u": _quartiles([x["u"] for x in reps]),
            "lln_statistic": _quartiles([x["lln"] for x in reps]),
            "log_u_gap": _quartiles([x["gap"] for x in reps]),
            "rho": _quartiles([x["rho"] for x in reps]),
            "max_saddle_residual": max(x["residual"] for x in reps),
            "maclaurin_violations": sum(not x["maclaurin_ok"] for x in reps),
            "saddle_fallbacks": sum(x["fallback"] for x in reps),
            "condition_tail": _quartiles([x["cond_tail"] for x in reps]),
            "condition_fourth": _quartiles([x["cond_fourth"] for x in reps]),
        }
        rows.append(row)
        log.info(
            "experiment.case",
            {"experiment": "esp-lln", "n": n, "d": d, "gap": row["log_u_gap"]},
        )

    gaps = [row["log_u_gap"]["median"] for row in rows]
    known = [g for g in gaps if g is not None]
    summary = {
        "gap_medians": gaps,
        "gap_decreasing": len(known) == len(gaps)
        and all(b < a for a, b in zip(known, known[1:])),
        "maclaurin_violations": sum(row["maclaurin_violations"] for row in rows),
        "saddle_fallbacks": sum(row["saddle_fallbacks"] for row in rows),
    }
    return _report(config, "esp-lln", rows, summary)


def run_gamma(config: GammaConfig, log: ExperimentLogger) -> ExperimentReport:
    """
    Sweep gamma(s, t): brute force against the closed form for
    n <= n_max, d <= d_max, and closed form against the bound for
    n <= bound_n_max, d <= bound_d_max. Rows with s = t + 1 check the
    vanishing of s > t.
    """
    rows, errors = [], []
    skipped = 0
    n_top = max(config.n_max, config.bound_n_max)
    d_top = max(config.d_max, config.bound_d_max)
    for n in range(1, n_top + 1):
        for d in range(1, min(n, d_top) + 1):
            for t in range(d):
                if 2 * d - t > n:
                    skipped += 1
                    rows.append(
                        {"n": n, "d": d, "t": t, "skipped": "no base pair: 2d - t > n"}
                    )
                    continue
                rows.extend(_gamma_cell(config, n, d, t, errors))
    log.info("experiment.case", {"experiment": "gamma", "cells": len(rows)})

    compared = [r for r in rows if r.get("exact_eq_brute") is not None]
    bounded = [r for r in rows if r.get("exact_le_bound") is not None]
    summary = {
        "cells": len(rows),
        "skipped": skipped,
        "brute_cells": len(compared),
        "bound_cells": len(bounded),
        "exact_equals_brute_all": all(r["exact_eq_brute"] for r in compared),
        "exact_le_bound_all": all(r["exact_le_bound"] for r in bounded),
        "s_gt_t_all_zero": all(
            r["gamma_exact"] == 0 for r in rows if "s" in r and r["s"] > r["t"]
        ),
    }
    return _report(config, "gamma", rows, summary, errors=errors)


def _gamma_cell(
    config: GammaConfig, n: int, d: int, t: int, errors: List[CaseError]
) -> List[Dict[str, Any]]:
    in_brute = n <= config.n_max and d <= config.d_max
    in_bound = n <= config.bound_n_max and d <= config.bound_d_max
    hist: Optional[Dict[int, int]] = None
    if in_brute:
        try:
            hist = gamma.gamma_brute_histogram(n, d, t)
        except ResourceCapError as exc:
            errors.append(CaseError.from_exception(f"n={n},d={d},t={t}", exc))
    out = []
    for s in range(t + 2):
        exact = gamma.gamma_exact(n, d, s, t)
        row: Dict[str, Any] = {"n": n, "d": d, "s": s, "t": t, "gamma_exact": exact}
        if hist is not None:
            brute = hist.get(s, 0)
            row["gamma_brute"] = brute
            row["exact_eq_brute"] = brute == exact
        if in_bound:
            bound = gamma.gamma_bound(n, d, s, t)
            row["gamma_bound"] = bound
            row["exact_le_bound"] = exact <= bound * (1.0 + BOUND_RELATIVE_SLACK)
        out.append(row)
    return out


def run_conditions(config: ConditionsConfig, log: ExperimentLogger) -> ExperimentReport:
    """Truncated-moment condition terms along ``n_grid`` with trend flags."""
    law = (
        parse_z_distribution(config.z_dist)
        if config.z_dist is not None
        else parse_distribution(config.dist)
    )
    method = Method(config.method) if config.method is not None else None
    table = regime_classifier(
        law,
        parse_d_rule(config.d_rule),
        config.n_grid,
        method,
        config.reps,
        RngStream(config.seed),
        config.threads,
    )
    rows = []
    for entry in table.rows:
        rep = entry.report
        row = {
            "n": entry.n,
            "d": entry.d,
            "law": entry.law,
            "method": rep.method.value,
            "term_truncated_tail": rep.term_truncated_tail,
            "term_truncated_fourth": rep.term_truncated_fourth,
            "lower_above": rep.lower_above,
            "lower_below": rep.lower_below,
            "decomposition": rep.decomposition,
            "tail_std_error": rep.tail_std_error,
            "fourth_std_error": rep.fourth_std_error,
        }
        rows.append(row)
        log.info("experiment.case", {"experiment": "conditions", **row})
    summary = {
        "law": law.label,
        "tail_trend": table.tail_trend.value,
        "fourth_trend": table.fourth_trend.value,
        "both_vanishing": table.both_vanishing,
    }
    return _report(config, "conditions", rows, summary)


def _report(
    config: CommonConfig,
    experiment: str,
    rows: List[Dict[str, Any]],
    summary: Dict[str, Any],
    warnings: Optional[List[str]] = None,
    errors: Optional[List[CaseError]] = None,
) -> ExperimentReport:
    return ExperimentReport(
        experiment=experiment,
        seed=config.seed,
        config=config.echo(),
        warnings=warnings or [],
        summary=plain(summary),
        rows=plain(rows),
        errors=errors or [],
    )


Runner = Callable[[Any, ExperimentLogger], ExperimentReport]


def execute(
    experiment: str,
    runner: Runner,
    config: CommonConfig,
    log: Optional[ExperimentLogger] = None,
) -> ExperimentReport:
    """Run one experiment with start/finish events; attach wall time if asked."""
    log = log or get_logger()
    log.info("experiment.start", {"experiment": experiment, "config": config.echo()})
    started = time.perf_counter()
    try:
        report = runner(config, log)
    except Exception as exc:
        log.error("experiment.failed", exc, {"experiment": experiment})
        raise
    elapsed = time.perf_counter() - started
    log.info(
        "experiment.finish",
        {
            "experiment": experiment,
            "wall_time_s": elapsed,
            "rows": len(report.rows),
            "errors": len(report.errors),
        },
    )
    if config.timing:
        report.wall_time_s = elapsed
    return report


__all__ = [
    "execute",
    "run_conditions",
    "run_esp_lln",
    "run_gamma",
    "run_mp_esd",
    "run_qform_var",
]
