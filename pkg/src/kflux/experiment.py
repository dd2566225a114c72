"""Experiment orchestration, speed estimation and record emission."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .chords import CHORD_STREAM, ChordMethod, mc_mean_chord
from .geometry import BallGeometry, DomainError, check_dim, theoretical_k
from .sampling import ConfigError, RngStream, SampleMode, check_mode
from .sphere2 import K_S2, CapSpec, S2WalkConfig, cap_mean_chord, s2_walk_trial
from .walker import WalkConfig, run_trial

MODES = ("ball_walk", "chords", "equivalence", "s2_cap", "speed")
FORMATS = ("csv", "json", "table")

CSV_FIELDS = (
    "mode", "dimension", "trial", "walkers", "steps", "dt", "radius", "seed", "hits",
    "k_hat", "k_theory", "rel_err", "mean_path_hat", "mean_chord_theory", "wall_time_s",
)
_M = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "ball_walk"
    dims: tuple[int, ...] = (3,)
    trials: int = 1
    walkers: int = 20000
    steps: int = 2000
    dt: float = 0.01
    radius: float = 1.0
    theta: float | None = None
    seed: int = 0
    sample_mode: SampleMode = SampleMode.DIRECT
    workers: int = 1
    output: str = "csv"
    rescatter: bool = True
    timing: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.output not in FORMATS:
            raise ConfigError(f"output must be one of {FORMATS}, got {self.output!r}")
        if self.trials < 0:
            raise ConfigError("trials must be >= 0")
        if self.walkers < 1 or self.steps < 1 or self.workers < 1:
            raise ConfigError("walkers, steps and workers must be positive")
        if not self.radius > 0 or not 0 < self.dt < self.radius / 10:
            raise ConfigError("need radius > 0 and 0 < dt < radius/10")
        if not 0 <= self.seed <= _M:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "dims", tuple(check_dim(d) for d in self.dims))
        if not self.dims:
            raise ConfigError("at least one dimension is required")
        for d in self.dims:
            check_mode(d, self.sample_mode)
        object.__setattr__(self, "sample_mode", SampleMode(self.sample_mode))
        if self.mode == "s2_cap":
            if self.theta is None:
                raise ConfigError("s2_cap mode requires theta")
            CapSpec(self.radius, self.theta)


@dataclass
class TrialRecord:
    mode: str
    dimension: int
    trial: int
    walkers: int
    steps: int
    dt: float
    radius: float
    seed: int
    hits: int
    k_hat: float
    k_theory: float
    rel_err: float
    mean_path_hat: float
    mean_chord_theory: float
    wall_time_s: float = 0.0
    speed_hat: float | None = field(default=None, compare=True)


@dataclass(frozen=True)
class SpeedEstimateInput:
    m: float
    rho: float
    A: float
    t: float
    dimension: int = 3


def estimate_speed(inp: SpeedEstimateInput) -> float:
    """Mean speed from a trap count, ``c = m / (K rho A t)``."""
    for name in ("m", "rho", "A", "t"):
        v = getattr(inp, name)
        if not (v > 0 and math.isfinite(v)):
            raise DomainError(f"{name} must be positive and finite, got {v!r}")
    return inp.m / (theoretical_k(inp.dimension) * inp.rho * inp.A * inp.t)


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M
    return z ^ (z >> 31)


def trial_seed(seed: int, dimension: int, trial: int) -> int:
    """Per-trial seed; depends only on its three arguments."""
    z = _mix((seed ^ 0x243F6A8885A308D3) & _M)
    z = _mix((z + 0x9E3779B97F4A7C15 * (dimension + 1)) & _M)
    return _mix((z + 0xD1B54A32D192ED03 * (trial + 1)) & _M)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / b if math.isfinite(a) else math.nan


def _one_trial(cfg: ExperimentConfig, dim: int, trial: int) -> TrialRecord:
    seed = trial_seed(cfg.seed, dim, trial)
    common = dict(walkers=cfg.walkers, steps=cfg.steps, dt=cfg.dt, radius=cfg.radius, seed=seed)
    if cfg.mode == "s2_cap":
        cap = CapSpec(cfg.radius, cfg.theta)
        st = s2_walk_trial(S2WalkConfig(cap, cfg.dt, cfg.steps, cfg.walkers, seed, cfg.workers))
        path = st.mean_path_empirical if st.in_region_path_samples.size else math.nan
        return TrialRecord(cfg.mode, 2, trial, hits=st.boundary_hits, k_hat=st.k_hat, k_theory=K_S2,
                           rel_err=_rel(st.k_hat, K_S2), mean_path_hat=path,
                           mean_chord_theory=cap_mean_chord(cap), **common)
    geom = BallGeometry(dim, cfg.radius)
    k_th = geom.k_constant
    if cfg.mode == "chords":
        # walkers chords per trial; the implied K follows from V / (A E(C))
        cs = mc_mean_chord(geom, ChordMethod.PARALLEL_CLASS, cfg.walkers,
                           RngStream(seed, CHORD_STREAM), mode=_chord_mode(cfg, dim))
        k_hat = geom.volume / (geom.surface_area * cs.mean)
        return TrialRecord(cfg.mode, dim, trial, hits=cfg.walkers, k_hat=k_hat, k_theory=k_th,
                           rel_err=_rel(k_hat, k_th), mean_path_hat=cs.mean,
                           mean_chord_theory=geom.mean_chord, **common)
    wc = WalkConfig(dim, cfg.radius, cfg.dt, cfg.steps, cfg.walkers, seed, cfg.sample_mode,
                    cfg.rescatter, cfg.workers)
    st = run_trial(wc)
    if cfg.mode == "equivalence":
        path = st.mean_path_empirical if st.in_region_path_samples.size else math.nan
    else:
        path = st.mean_path_hat
    rec = TrialRecord(cfg.mode, dim, trial, hits=st.boundary_hits, k_hat=st.k_hat, k_theory=k_th,
                      rel_err=_rel(st.k_hat, k_th), mean_path_hat=path,
                      mean_chord_theory=geom.mean_chord, **common)
    if cfg.mode == "speed" and st.boundary_hits:
        rec.speed_hat = estimate_speed(SpeedEstimateInput(
            m=st.boundary_hits, rho=cfg.walkers / geom.volume, A=geom.surface_area,
            t=cfg.steps * cfg.dt, dimension=dim))
    return rec


def _chord_mode(cfg: ExperimentConfig, dim: int) -> SampleMode:
    return cfg.sample_mode if dim > 1 else SampleMode.DIRECT


def run_experiment(cfg: ExperimentConfig) -> list[TrialRecord]:
    dims = (2,) if cfg.mode == "s2_cap" else cfg.dims
    records = []
    for dim in dims:
        for trial in range(cfg.trials):
            t0 = time.perf_counter()
            rec = _one_trial(cfg, dim, trial)
            if cfg.timing:
                rec.wall_time_s = time.perf_counter() - t0
            records.append(rec)
    return records


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".9g")
    return str(v)


def _row(rec: TrialRecord) -> dict:
    d = dataclasses.asdict(rec)
    d["wall_time_s"] = rec.wall_time_s
    return d


def to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for rec in records:
        d = _row(rec)
        w.writerow([_fmt(d[k]) for k in CSV_FIELDS])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def to_json(records) -> str:
    rows = []
    for rec in records:
        d = _row(rec)
        out = {k: _json_value(d[k]) for k in CSV_FIELDS}
        if rec.speed_hat is not None:
            out["speed_hat"] = rec.speed_hat
        rows.append(out)
    return json.dumps(rows, indent=1) + "\n"


def records_from_json(text: str) -> list[TrialRecord]:
    recs = []
    for d in json.loads(text):
        d = {k: (math.nan if v is None else v) for k, v in d.items()}
        recs.append(TrialRecord(**d))
    return recs


def to_table(records) -> str:
    """Trials as rows, dimensions as columns, the exact constant as the last row."""
    if not records:
        return ""
    dims = sorted({r.dimension for r in records})
    cols = {d: [r for r in records if r.dimension == d] for d in dims}
    value = "speed_hat" if records[0].mode == "speed" else "k_hat"
    n_rows = max(len(c) for c in cols.values())
    width = 14
    lines = ["".join(f"{'dimension ' + str(d):<{width}}" for d in dims).rstrip()]
    lines.append("-" * (width * len(dims)))
    for i in range(n_rows):
        cells = []
        for d in dims:
            v = getattr(cols[d][i], value) if i < len(cols[d]) else None
            cells.append(f"{_fmt(float(v)) if v is not None else '':<{width}}")
        lines.append("".join(cells).rstrip())
    lines.append("-" * (width * len(dims)))
    theory = [1.0 if value == "speed_hat" else cols[d][0].k_theory for d in dims]
    lines.append("".join(f"{_fmt(float(t)):<{width}}" for t in theory).rstrip())
    return "\n".join(lines) + "\n"


def emit(records, fmt: str = "csv") -> bytes:
    if fmt == "csv":
        text = to_csv(records)
    elif fmt == "json":
        text = to_json(records)
    elif fmt == "table":
        text = to_table(records)
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    return text.encode("utf-8")


def table_theory_row(records) -> list[float]:
    dims = sorted({r.dimension for r in records})
    return [next(r.k_theory for r in records if r.dimension == d) for d in dims]


def mean_k_by_dimension(records) -> dict[int, float]:
    out: dict[int, list[float]] = {}
    for r in records:
        out.setdefault(r.dimension, []).append(r.k_hat)
    return {d: float(np.mean(v)) for d, v in out.items()}
