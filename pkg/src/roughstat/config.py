"""Line-oriented experiment configs: ``key = value`` with ``#`` comments.

Every numeric value is parsed as an exact rational (``0.05`` and ``1/20`` are
the same number).  Validation collects every problem before failing.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .analysis import DEFAULT_SCHEDULE, DEFAULT_TAIL_FRACTION, EpsSchedule, Grid
from .density import DEFAULT_N, DEFAULT_TAU, frac_text
from .errors import ConfigError, RejectedInput
from .pm_core import PartialMetricSpace, parse_space
from .seq_spec import IndexPredicate, parse_predicate, parse_sequence
from .theorems import CHECKS

MODES = ("rough_stat", "stat", "rough", "limit_set", "rough_limit_set", "bounded", "cauchy",
         "clusters", "suite") + tuple(f"theorem:{tid}" for tid in CHECKS)

#: key -> help text; the order here is the order of ``--help`` and of the echo.
KEYS = {
    "space": "max_rplus | shifted_euclidean (required)",
    "a": "constant self-distance of shifted_euclidean (required there, forbidden otherwise)",
    "sequence": "example_2_1 | constant:c | reciprocal[:c] | alternating:amp | linear | "
                "'pred => rule; ...' (required except for suite)",
    "sequence2": "second sequence, for theorem:2.7 and theorem:2.8",
    "mode": "one of " + ", ".join(MODES) + " (required)",
    "x": "candidate limit point (rough_stat, stat, rough, theorems 2.1/2.3/2.7/2.8)",
    "r": "roughness degree, default 0",
    "N": "prefix length, default 100000",
    "tau": "density threshold, default 1/100",
    "schedule": "strictly decreasing epsilons, default 1, 1/2, 1/10, 1/20, 1/100",
    "tail_fraction": "rough-convergence tail window start as a fraction of N, default 1/2",
    "lo": "grid lower end, default 0",
    "hi": "grid upper end, default 5",
    "step": "grid step, default 1/20",
    "points": "explicit candidate list; replaces the lo/hi/step grid",
    "u": "reference point for statistical boundedness, default 0",
    "M_grid": "increasing bounds M to try, default 1, 2, 5, 10, 20, 50, 100",
    "r_grid": "roughness degrees searched by theorem:2.5, default 0, 1, 2",
    "m_candidates": "indices m for the Cauchy search, default 1, 2, 3",
    "l_grid": "values l for the Cauchy search, default 0, 1/2, ..., 5",
    "selection": "index predicate for theorem:2.6, e.g. not(square)",
    "c": "cluster candidate (clusters, theorem:2.9) or self-distance bound (theorem:2.8)",
    "c_converse": "self-distance bound for the converse of theorem:2.8, default c",
    "seed": "seed for randomized suite instances, default 0",
    "random_instances": "number of seeded random instances added by suite, default 0",
}

_DECIMALS = ("a", "x", "r", "tau", "tail_fraction", "lo", "hi", "step", "u", "c", "c_converse")
_INTS = ("N", "seed", "random_instances")
_LISTS = ("schedule", "points", "M_grid", "r_grid", "m_candidates", "l_grid")


@dataclass
class ExperimentConfig:
    mode: str
    space: PartialMetricSpace | None = None
    sequence: object = None
    sequence_text: str | None = None
    sequence2: object = None
    sequence2_text: str | None = None
    x: Fraction | None = None
    r: Fraction = Fraction(0)
    N: int = DEFAULT_N
    tau: Fraction = DEFAULT_TAU
    schedule: EpsSchedule = field(default_factory=EpsSchedule)
    tail_fraction: Fraction = DEFAULT_TAIL_FRACTION
    grid: Grid = field(default_factory=lambda: Grid(0, 5, Fraction(1, 20)))
    points: list | None = None
    u: Fraction = Fraction(0)
    M_grid: tuple = tuple(Fraction(v) for v in (1, 2, 5, 10, 20, 50, 100))
    r_grid: tuple = (Fraction(0), Fraction(1), Fraction(2))
    m_candidates: tuple = (1, 2, 3)
    l_grid: tuple = tuple(Fraction(k, 2) for k in range(11))
    selection: IndexPredicate | None = None
    c: Fraction | None = None
    c_converse: Fraction | None = None
    seed: int = 0
    random_instances: int = 0

    @property
    def candidates(self):
        return self.points if self.points is not None else self.grid

    def resolved(self) -> dict:
        """Full config with defaults filled in, as emitted in reports."""
        d = {
            "mode": self.mode,
            "r": frac_text(self.r),
            "N": self.N,
            "tau": frac_text(self.tau),
            "schedule": [frac_text(e) for e in self.schedule],
            "tail_fraction": frac_text(self.tail_fraction),
            "grid": self.grid.to_dict(),
            "u": frac_text(self.u),
            "M_grid": [frac_text(m) for m in self.M_grid],
            "r_grid": [frac_text(v) for v in self.r_grid],
            "m_candidates": list(self.m_candidates),
            "l_grid": [frac_text(v) for v in self.l_grid],
            "seed": self.seed,
            "random_instances": self.random_instances,
        }
        if self.space is not None:
            d["space"] = self.space.describe()
        if self.sequence_text is not None:
            d["sequence"] = self.sequence_text
        if self.sequence2_text is not None:
            d["sequence2"] = self.sequence2_text
        for key in ("x", "c", "c_converse"):
            if getattr(self, key) is not None:
                d[key] = frac_text(getattr(self, key))
        if self.points is not None:
            d["points"] = [frac_text(p) for p in self.points]
        if self.selection is not None:
            d["selection"] = self.selection.describe()
        return d


def _decimal(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise RejectedInput(f"malformed decimal {text.strip()!r}") from None


def _decimal_list(text: str) -> list[Fraction]:
    items = [t for t in text.split(",")]
    if not any(t.strip() for t in items):
        raise RejectedInput("list must be nonempty")
    return [_decimal(t) for t in items]


def _integer(text: str) -> int:
    q = _decimal(text)
    if q.denominator != 1:
        raise RejectedInput(f"expected an integer, got {text.strip()!r}")
    return int(q)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    problems: list[str] = []
    raw: dict[str, tuple[int, str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            problems.append(f"line {lineno}: expected 'key = value'")
        elif key not in KEYS:
            problems.append(f"line {lineno}: unknown key {key!r}")
        elif key in raw:
            problems.append(f"line {lineno}: duplicate key {key!r}")
        else:
            raw[key] = (lineno, value)

    values: dict[str, object] = {}

    def convert(key, fn):
        if key not in raw:
            return
        lineno, value = raw[key]
        try:
            values[key] = fn(value)
        except RejectedInput as exc:
            problems.append(f"line {lineno}: {key}: {exc}")

    for key in _DECIMALS:
        convert(key, _decimal)
    for key in _INTS:
        convert(key, _integer)
    for key in _LISTS:
        convert(key, _decimal_list)
    convert("sequence", parse_sequence)
    convert("sequence2", parse_sequence)
    convert("selection", parse_predicate)

    def line_of(key):
        return f"line {raw[key][0]}" if key in raw else "config"

    mode = raw.get("mode", (0, None))[1]
    if mode is None:
        problems.append("config: missing required key 'mode'")
    elif mode not in MODES:
        problems.append(f"{line_of('mode')}: unknown mode {mode!r}")

    cfg = ExperimentConfig(mode=mode or "")

    if "space" in raw:
        a_text = raw["a"][1] if "a" in raw else None
        try:
            cfg.space = parse_space(raw["space"][1], a_text)
        except RejectedInput as exc:
            problems.append(f"{line_of('space')}: space: {exc}")
    elif mode != "suite":
        problems.append("config: missing required key 'space'")

    if "sequence" in values:
        cfg.sequence, cfg.sequence_text = values["sequence"], raw["sequence"][1]
    elif "sequence" not in raw and mode != "suite":
        problems.append("config: missing required key 'sequence'")
    if "sequence2" in values:
        cfg.sequence2, cfg.sequence2_text = values["sequence2"], raw["sequence2"][1]

    for key in ("x", "r", "tau", "tail_fraction", "u", "c", "c_converse", "seed",
                "random_instances"):
        if key in values:
            setattr(cfg, key, values[key])
    if "N" in values:
        cfg.N = values["N"]
        if cfg.N < 2:
            problems.append(f"{line_of('N')}: N must be at least 2")
    if cfg.r < 0:
        problems.append(f"{line_of('r')}: roughness degree must be nonnegative")
    if not 0 < cfg.tau < Fraction(1, 5):
        problems.append(f"{line_of('tau')}: tau must lie strictly between 0 and 1/5")
    if not 0 < cfg.tail_fraction < 1:
        problems.append(f"{line_of('tail_fraction')}: tail_fraction must lie strictly between 0 and 1")
    if cfg.random_instances < 0:
        problems.append(f"{line_of('random_instances')}: must be nonnegative")

    if "schedule" in values:
        sched = values["schedule"]
        if any(b >= a for a, b in zip(sched, sched[1:])):
            problems.append(f"{line_of('schedule')}: schedule must be strictly decreasing")
        elif any(e <= 0 for e in sched):
            problems.append(f"{line_of('schedule')}: schedule entries must be positive")
        else:
            cfg.schedule = EpsSchedule(tuple(sched))
    else:
        cfg.schedule = EpsSchedule(DEFAULT_SCHEDULE)

    lo = values.get("lo", cfg.grid.lo)
    hi = values.get("hi", cfg.grid.hi)
    step = values.get("step", cfg.grid.step)
    if step <= 0:
        problems.append(f"{line_of('step')}: grid step must be positive")
    elif hi < lo:
        problems.append(f"{line_of('hi')}: grid hi must not be below lo")
    else:
        cfg.grid = Grid(lo, hi, step)
    if "points" in values:
        cfg.points = list(values["points"])

    if "M_grid" in values:
        Ms = values["M_grid"]
        if any(m <= 0 for m in Ms) or any(b <= a for a, b in zip(Ms, Ms[1:])):
            problems.append(f"{line_of('M_grid')}: M_grid must be increasing and positive")
        else:
            cfg.M_grid = tuple(Ms)
    if "r_grid" in values:
        if any(v < 0 for v in values["r_grid"]):
            problems.append(f"{line_of('r_grid')}: r_grid entries must be nonnegative")
        else:
            cfg.r_grid = tuple(values["r_grid"])
    if "m_candidates" in values:
        ms = values["m_candidates"]
        if any(m.denominator != 1 or m < 1 for m in ms):
            problems.append(f"{line_of('m_candidates')}: m_candidates must be positive integers")
        else:
            cfg.m_candidates = tuple(int(m) for m in ms)
    if "l_grid" in values:
        if any(v < 0 for v in values["l_grid"]):
            problems.append(f"{line_of('l_grid')}: l_grid entries must be nonnegative")
        else:
            cfg.l_grid = tuple(values["l_grid"])
    if "selection" in values:
        cfg.selection = values["selection"]

    needs = {
        "rough_stat": ("x",), "stat": ("x",), "rough": ("x",),
        "theorem:2.1": ("x",), "theorem:2.3": ("x",),
        "theorem:2.6": ("selection",), "theorem:2.7": ("x", "sequence2"),
        "theorem:2.8": ("x", "sequence2", "c"), "theorem:2.9": ("c",),
    }
    for key in needs.get(mode, ()):
        if key not in raw:
            problems.append(f"config: mode {mode} requires key {key!r}")

    if problems:
        raise ConfigError(problems)
    return cfg
