"""Fixed-step scattering random walk in an n-ball with specular reflection.

Each walker moves a distance ``dt`` per step (speed 1).  A step that would
leave the ball is resolved by locating the boundary point ``f`` on the ray,
folding the overshoot back across the tangent plane at ``f`` and reflecting
the direction about the normal ``f / r``.  For a sphere the fold lands
exactly where a specular billiard would, so path length is conserved.

Every step that ends outside counts one boundary hit.  The flux estimator is

    k_hat = hits * V / (walkers * A * steps * dt)

which is the hit rate per unit density, speed and boundary area.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .geometry import BallGeometry, check_dim
from .sampling import ConfigError, SampleMode, check_mode, draw_direction, draw_point, init_state

DEFAULT_BUDGET = 10**11
_CLAMP = 1.0 - 1e-12


class UndefinedEstimateError(ArithmeticError):
    """An estimator was requested from a run that observed no events."""


class GeometryError(ArithmeticError):
    """Collision geometry failed (negative discriminant)."""


@dataclass
class WalkerState:
    position: np.ndarray
    direction: np.ndarray

    def __post_init__(self) -> None:
        self.position = np.array(self.position, dtype=float)
        self.direction = np.array(self.direction, dtype=float)


@dataclass(frozen=True)
class WalkConfig:
    dim: int
    radius: float = 1.0
    dt: float = 0.01
    steps: int = 2000
    walkers: int = 20000
    seed: int = 0
    mode: SampleMode = SampleMode.DIRECT
    rescatter: bool = True
    workers: int = 1
    budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        n = check_dim(self.dim)
        object.__setattr__(self, "mode", check_mode(n, self.mode))
        if not self.radius > 0:
            raise ConfigError(f"radius must be positive, got {self.radius}")
        if not 0 < self.dt < self.radius / 10:
            raise ConfigError(
                f"dt={self.dt} must lie in (0, radius/10) so a step crosses the boundary at most once"
            )
        if self.steps < 0 or self.walkers < 0:
            raise ConfigError("steps and walkers must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.steps * self.walkers > self.budget:
            raise ConfigError(f"steps*walkers={self.steps * self.walkers} exceeds budget {self.budget}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @property
    def geometry(self) -> BallGeometry:
        return BallGeometry(self.dim, self.radius)


@dataclass
class WalkStats:
    dim: int
    radius: float
    walkers: int
    steps: int
    dt: float
    boundary_hits: int
    hits_per_walker: np.ndarray = field(repr=False)
    in_region_path_samples: np.ndarray = field(repr=False)
    k_hat: float = math.nan
    k_stderr: float = math.nan
    mean_path_hat: float = math.nan

    @property
    def total_time(self) -> float:
        return self.steps * self.dt

    @property
    def defined(self) -> bool:
        return self.boundary_hits > 0

    @property
    def mean_path_empirical(self) -> float:
        """Mean length of the complete boundary-to-boundary flights."""
        if self.in_region_path_samples.size == 0:
            raise UndefinedEstimateError("no complete in-region flights were observed")
        return float(self.in_region_path_samples.mean())

    @property
    def path_stderr(self) -> float:
        s = self.in_region_path_samples
        if s.size < 2:
            return math.nan
        return float(s.std(ddof=1) / math.sqrt(s.size))


@nb.njit(inline="always")
def _dot(a, b, n):
    acc = 0.0
    for j in range(n):
        acc += a[j] * b[j]
    return acc


@nb.njit(cache=True)
def _collision_tau(p, d, n, r):
    pd = _dot(p, d, n)
    disc = pd * pd + r * r - _dot(p, p, n)
    if disc < 0.0:
        raise GeometryError("negative discriminant in collision_point: start outside the ball?")
    return -pd + math.sqrt(disc)


@nb.njit(inline="always")
def _fold(x, d, q, n, r, tau):
    """Resolve a boundary crossing in place: ``x`` <- folded ``q``, ``d`` reflected."""
    qn = 0.0
    dn = 0.0
    for j in range(n):
        nh = (x[j] + tau * d[j]) / r
        qn += (q[j] - r * nh) * nh
        dn += d[j] * nh
    qq = 0.0
    for j in range(n):
        nh = (x[j] + tau * d[j]) / r
        x[j] = q[j] - 2.0 * qn * nh
        d[j] = d[j] - 2.0 * dn * nh
        qq += x[j] * x[j]
    if qq >= r * r:
        c = r * 0.999999999999 / math.sqrt(qq)
        for j in range(n):
            x[j] *= c


@nb.njit(cache=True)
def _reflect_step(x, d, n, dt, r):
    q = np.empty(n)
    qq = 0.0
    for j in range(n):
        q[j] = x[j] + dt * d[j]
        qq += q[j] * q[j]
    if qq < r * r:
        for j in range(n):
            x[j] = q[j]
        return False
    tau = _collision_tau(x, d, n, r)
    _fold(x, d, q, n, r, tau)
    return True


def collision_point(p, d, r: float) -> tuple[float, np.ndarray]:
    """Ray parameter and point where ``p + tau*d`` meets the sphere of radius ``r``."""
    p = np.asarray(p, dtype=float)
    d = np.asarray(d, dtype=float)
    tau = float(_collision_tau(p, d, p.size, float(r)))
    return tau, p + tau * d


def reflect_step(state: WalkerState, dt: float, r: float) -> tuple[WalkerState, bool]:
    if not 0 < dt < r / 10:
        raise ConfigError(f"dt={dt} must lie in (0, r/10)")
    x = state.position.copy()
    d = state.direction.copy()
    hit = bool(_reflect_step(x, d, x.size, float(dt), float(r)))
    return WalkerState(x, d), hit


@nb.njit(cache=True, nogil=True)
def _walk_chunk(lo, hi, n, r, dt, steps, seed, rejection, rescatter, hits):
    """Simulate walkers ``lo..hi-1``; returns the concatenated flight lengths.

    Walker ``w`` draws from stream ``(seed, w)`` only, so results do not
    depend on how walkers are split into chunks.
    """
    st = np.empty(2, dtype=np.uint64)
    x = np.empty(n)
    d = np.empty(n)
    q = np.empty(n)
    buf = np.empty(max(1024, 32 * (hi - lo)))
    used = 0
    r2 = r * r
    for w in range(lo, hi):
        init_state(np.uint64(seed), np.uint64(w), st)
        s = st[0]
        g = st[1]
        s = draw_point(s, g, n, r, rejection, x)
        if not rescatter:
            s = draw_direction(s, g, n, rejection, d)
        last = -1.0
        h = 0
        for k in range(steps):
            if rescatter:
                s = draw_direction(s, g, n, rejection, d)
            qq = 0.0
            for j in range(n):
                q[j] = x[j] + dt * d[j]
                qq += q[j] * q[j]
            if qq < r2:
                for j in range(n):
                    x[j] = q[j]
                continue
            tau = _collision_tau(x, d, n, r)
            _fold(x, d, q, n, r, tau)
            h += 1
            t = k * dt + tau
            if last >= 0.0:
                if used == buf.size:
                    grown = np.empty(2 * buf.size)
                    grown[:used] = buf[:used]
                    buf = grown
                buf[used] = t - last
                used += 1
            last = t
        hits[w - lo] = h
    return buf[:used].copy()


def _chunks(walkers: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, -(-walkers // workers))
    return [(lo, min(lo + size, walkers)) for lo in range(0, walkers, size)]


def run_trial(config: WalkConfig) -> WalkStats:
    geom = config.geometry
    n, W, S = config.dim, config.walkers, config.steps
    hits = np.zeros(W, dtype=np.int64)
    rejection = config.mode is SampleMode.REJECTION

    def work(bounds):
        lo, hi = bounds
        return _walk_chunk(
            lo, hi, n, float(config.radius), float(config.dt), S, np.uint64(config.seed),
            rejection, bool(config.rescatter), hits[lo:hi],
        )

    chunks = _chunks(W, config.workers) if W else []
    if config.workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            paths = list(pool.map(work, chunks))
    else:
        paths = [work(c) for c in chunks]
    samples = np.concatenate(paths) if paths else np.empty(0)

    total = int(hits.sum())
    stats = WalkStats(n, geom.radius, W, S, config.dt, total, hits, samples)
    if total > 0:
        scale = geom.volume / (geom.surface_area * S * config.dt)
        stats.k_hat = total / W * scale
        if W > 1:
            stats.k_stderr = float(hits.std(ddof=1) / math.sqrt(W) * scale)
        stats.mean_path_hat = geom.volume / (stats.k_hat * geom.surface_area)
    return stats


def estimate_mean_path(stats: WalkStats, geom: BallGeometry) -> float:
    """``V / (k_hat * A)``; the direct flight average is ``stats.mean_path_empirical``."""
    if not stats.boundary_hits > 0:
        raise UndefinedEstimateError("no boundary hits: k_hat and E(l) are undefined")
    return geom.volume / (stats.k_hat * geom.surface_area)
