"""Dispatch a validated config to the engines and assemble a deterministic report."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from . import analysis as an
from .claims import find_discrepancies
from .config import ExperimentConfig
from .density import frac_text
from .theorems import CheckReport, Instance, Outcome, run_check, run_suite

EXIT_OK = 0
EXIT_THEOREM_FAIL = 2
EXIT_CONFIG_ERROR = 3


@dataclass
class Report:
    body: dict
    csv_header: list
    csv_rows: list = field(default_factory=list)
    exit_code: int = EXIT_OK

    def json_text(self) -> str:
        return json.dumps(self.body, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.csv_header)
        w.writerows(self.csv_rows)
        return buf.getvalue()


def _g(x) -> str:
    return f"{float(x):.12g}"


def _verdict_rows(v: an.ConvergenceVerdict):
    return [[frac_text(e), dv.verdict.value, dv.evidence.count_N, dv.evidence.N,
             dv.evidence.value.numerator, dv.evidence.value.denominator]
            for e, dv in v.per_eps]


LIMIT_SET_HEADER = ["candidate", "verdict", "worst_eps", "worst_density_num", "worst_density_den"]


def _limit_set_rows(est: an.LimitSetEstimate):
    rows = []
    for p, v in zip(est.points, est.membership):
        worst = v.worst()
        if worst is None:
            rows.append([_g(p), v.verdict.value, "", "", ""])
        else:
            eps, dv = worst
            rows.append([_g(p), v.verdict.value, frac_text(eps),
                         dv.evidence.value.numerator, dv.evidence.value.denominator])
    return rows


def _instance(cfg: ExperimentConfig) -> Instance:
    grid = cfg.grid
    return Instance(
        cfg.space, cfg.sequence, x=cfg.x, r=cfg.r, N=cfg.N, schedule=cfg.schedule, tau=cfg.tau,
        grid=grid, tail_fraction=cfg.tail_fraction, seq2=cfg.sequence2, u=cfg.u,
        M_grid=cfg.M_grid, r_grid=cfg.r_grid, selection=cfg.selection, c=cfg.c,
        c_converse=cfg.c_converse, seed=cfg.seed,
    )


CHECK_HEADER = ["theorem", "instance_hash", "hypothesis", "conclusion", "outcome"]


def _check_body(reports: list[CheckReport]):
    reports = sorted(reports, key=CheckReport.sort_key)
    rows = [[r.theorem_id, r.instance.digest(), r.hypothesis_status.value,
             r.conclusion_status.value, r.outcome.value] for r in reports]
    failed = any(r.outcome is Outcome.FAIL for r in reports)
    summary = {}
    for r in reports:
        summary[r.outcome.value] = summary.get(r.outcome.value, 0) + 1
    return [r.to_dict() for r in reports], rows, failed, summary


def suite_report(N, tau, seed=0, random_instances=0, config_echo=None) -> Report:
    reports = run_suite(N, tau, seed, random_instances)
    results, rows, failed, summary = _check_body(reports)
    echo = config_echo or {"mode": "suite", "N": N, "tau": frac_text(Fraction(tau)),
                           "seed": seed, "random_instances": random_instances}
    body = {"config": echo, "results": {"checks": results, "summary": summary},
            "discrepancies": [], "version": __version__}
    return Report(body, CHECK_HEADER, rows, EXIT_THEOREM_FAIL if failed else EXIT_OK)


def run_experiment(cfg: ExperimentConfig) -> Report:
    """Run ``cfg``; engine errors propagate and nothing is emitted."""
    mode = cfg.mode
    if mode == "suite":
        return suite_report(cfg.N, cfg.tau, cfg.seed, cfg.random_instances, cfg.resolved())

    space, seq = cfg.space, cfg.sequence
    discrepancies: list = []
    header = ["eps", "verdict", "count", "N", "density_num", "density_den"]
    if mode in ("rough_stat", "stat"):
        if mode == "stat":
            v = an.stat_convergent(space, seq, cfg.x, cfg.schedule, cfg.N, cfg.tau)
        else:
            v = an.rough_stat_convergent(space, seq, cfg.x, cfg.r, cfg.schedule, cfg.N, cfg.tau)
        results, rows = v.to_dict(), _verdict_rows(v)
    elif mode == "rough":
        v = an.rough_convergent(space, seq, cfg.x, cfg.r, cfg.N, cfg.tail_fraction, cfg.schedule)
        results = v.to_dict()
        header = ["verdict", "window_start", "window_end", "tail_sup"]
        rows = [[v.verdict.value, *v.detail["window"], _g(v.detail["tail_sup"])]]
    elif mode in ("limit_set", "rough_limit_set"):
        if mode == "limit_set":
            est = an.stat_limit_set(space, seq, cfg.r, cfg.candidates, cfg.N, cfg.schedule, cfg.tau)
        else:
            est = an.rough_limit_set(space, seq, cfg.r, cfg.candidates, cfg.N, cfg.tail_fraction,
                                     cfg.schedule)
        results = est.to_dict()
        results["membership"] = [{"candidate": float(p), **v.to_dict()}
                                 for p, v in zip(est.points, est.membership)]
        header, rows = LIMIT_SET_HEADER, _limit_set_rows(est)
        discrepancies = find_discrepancies(space, seq, est, mode, cfg.N)
    elif mode == "bounded":
        v = an.stat_bounded(space, seq, cfg.u, cfg.M_grid, cfg.N, cfg.tau)
        results = v.to_dict()
        header = ["M", "verdict", "count", "N", "density_num", "density_den"]
        rows = _verdict_rows(v)
    elif mode == "cauchy":
        v = an.stat_cauchy(space, seq, cfg.m_candidates, cfg.l_grid, cfg.schedule, cfg.N, cfg.tau)
        results = v.to_dict()
        header = ["m", "l", "verdict"]
        rows = [[p["m"], p["l"], p["verdict"]] for p in v.detail["pairs"]]
    elif mode == "clusters":
        points = cfg.points if cfg.points is not None else cfg.grid
        if cfg.points is None and cfg.c is not None:
            points = [cfg.c]
        rep = an.stat_cluster_points(space, seq, points, cfg.schedule, cfg.N, cfg.tau)
        results = rep.to_dict()
        header = ["c", "verdict", "eps", "density_num", "density_den"]
        rows = [[_g(c), k.value, frac_text(e), dv.evidence.value.numerator,
                 dv.evidence.value.denominator]
                for c, ev, k in zip(rep.points, rep.per_point, rep.verdicts) for e, dv in ev]
    else:
        tid = mode.split(":", 1)[1]
        check = run_check(tid, _instance(cfg))
        results, rows, failed, summary = _check_body([check])
        body = {"config": cfg.resolved(), "results": {"checks": results, "summary": summary},
                "discrepancies": [], "version": __version__}
        return Report(body, CHECK_HEADER, rows, EXIT_THEOREM_FAIL if failed else EXIT_OK)

    body = {"config": cfg.resolved(), "results": results, "discrepancies": discrepancies,
            "version": __version__}
    return Report(body, header, rows)
