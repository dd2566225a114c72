"""Random chords of the n-ball under Bertrand-type measures.

``parallel_class``
    Fix a chord direction and drop the chord's foot uniformly on the normal
    section (the (n-1)-ball through the centre perpendicular to it).
``endpoints`` (disk only)
    Two independent uniform points on the circle.
``midpoint`` (disk only)
    Chord whose midpoint is uniform in the disk.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .geometry import BallGeometry
from .sampling import ConfigError, RngStream, SampleMode, check_mode, draw_point, uniform
from .walker import WalkConfig, run_trial

HIST_BINS = 64

# stream ids at or above this are reserved for non-walker draws
CHORD_STREAM = 2**63


class InsufficientDataError(RuntimeError):
    pass


class ChordMethod(str, enum.Enum):
    PARALLEL_CLASS = "parallel_class"
    ENDPOINTS = "endpoints"
    MIDPOINT = "midpoint"


def _check_method(geom: BallGeometry, method) -> ChordMethod:
    try:
        method = ChordMethod(method)
    except ValueError:
        raise ConfigError(f"unknown chord method {method!r}") from None
    if method is not ChordMethod.PARALLEL_CLASS and geom.dim != 2:
        raise ConfigError(f"{method.value} chords are defined only for n = 2, got n = {geom.dim}")
    return method


def chord_from_foot(r: float, foot) -> float:
    """Length of the chord at distance ``|foot|`` from the centre."""
    rho2 = float(np.dot(foot, foot)) if np.ndim(foot) else float(foot) ** 2
    return 2.0 * math.sqrt(max(r * r - rho2, 0.0))


@dataclass
class ChordStats:
    method: ChordMethod
    samples: int
    mean: float
    stderr: float
    histogram: np.ndarray
    bin_edges: np.ndarray


def _orthonormal_complement(axis: np.ndarray) -> np.ndarray:
    """Rows spanning the hyperplane orthogonal to ``axis``."""
    n = axis.size
    u = axis / np.linalg.norm(axis)
    # QR of [u | I] gives u followed by an orthonormal completion
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(n)]))
    return np.ascontiguousarray(q[:, 1:n].T)


@nb.njit(cache=True)
def _parallel_chords(st, n, r, rejection, axis, basis, out):
    s, g = st[0], st[1]
    m = n - 1
    y = np.empty(max(m, 1))
    p = np.empty(n)
    for k in range(out.shape[0]):
        if m == 0:
            out[k] = 2.0 * r
            continue
        s = draw_point(s, g, m, r, rejection, y)
        # embed the foot in R^n and intersect the line p + t*axis with the sphere
        for i in range(n):
            acc = 0.0
            for j in range(m):
                acc += y[j] * basis[j, i]
            p[i] = acc
        pa = 0.0
        pp = 0.0
        for i in range(n):
            pa += p[i] * axis[i]
            pp += p[i] * p[i]
        disc = pa * pa - (pp - r * r)
        out[k] = 2.0 * math.sqrt(disc) if disc > 0.0 else 0.0
    st[0] = s


@nb.njit(cache=True)
def _endpoint_chords(st, r, out):
    s, g = st[0], st[1]
    for k in range(out.shape[0]):
        a, s = uniform(s, g)
        b, s = uniform(s, g)
        delta = 2.0 * math.pi * abs(a - b)
        out[k] = 2.0 * r * math.sin(0.5 * delta)
    st[0] = s


@nb.njit(cache=True)
def _midpoint_chords(st, r, rejection, out):
    s, g = st[0], st[1]
    m = np.empty(2)
    for k in range(out.shape[0]):
        s = draw_point(s, g, 2, r, rejection, m)
        out[k] = 2.0 * math.sqrt(max(r * r - m[0] * m[0] - m[1] * m[1], 0.0))
    st[0] = s


def sample_chords(
    geom: BallGeometry,
    method,
    rng: RngStream,
    size: int,
    axis=None,
    mode=SampleMode.DIRECT,
) -> np.ndarray:
    """``size`` chord lengths; ``axis`` sets the parallel-class direction (default e1)."""
    method = _check_method(geom, method)
    n, r = geom.dim, geom.radius
    out = np.empty(int(size))
    if method is ChordMethod.PARALLEL_CLASS:
        mode = check_mode(max(n - 1, 1), mode)
        axis = np.eye(n)[0] if axis is None else np.asarray(axis, dtype=float)
        if axis.shape != (n,) or not np.linalg.norm(axis) > 0:
            raise ConfigError(f"axis must be a nonzero {n}-vector")
        axis = axis / np.linalg.norm(axis)
        basis = _orthonormal_complement(axis) if n > 1 else np.empty((0, 1))
        _parallel_chords(rng.state, n, r, mode is SampleMode.REJECTION, axis, basis, out)
    elif method is ChordMethod.ENDPOINTS:
        _endpoint_chords(rng.state, r, out)
    else:
        mode = check_mode(2, mode)
        _midpoint_chords(rng.state, r, mode is SampleMode.REJECTION, out)
    return out


def sample_chord(geom: BallGeometry, method, rng: RngStream, **kwargs) -> float:
    return float(sample_chords(geom, method, rng, 1, **kwargs)[0])


def mc_mean_chord(geom: BallGeometry, method, samples: int, rng: RngStream, **kwargs) -> ChordStats:
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    method = _check_method(geom, method)
    lengths = sample_chords(geom, method, rng, samples, **kwargs)
    hist, edges = np.histogram(lengths, bins=HIST_BINS, range=(0.0, 2.0 * geom.radius))
    stderr = float(lengths.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.nan
    return ChordStats(method, samples, float(lengths.mean()), stderr, hist, edges)


@dataclass
class EquivalenceReport:
    dim: int
    radius: float
    analytic_mean_chord: float
    path_mean: float
    path_stderr: float
    path_count: int
    chord_mean: float
    chord_stderr: float
    k_hat: float
    flux_mean_path: float

    @property
    def path_rel_dev(self) -> float:
        return abs(self.path_mean - self.analytic_mean_chord) / self.analytic_mean_chord

    @property
    def chord_rel_dev(self) -> float:
        return abs(self.chord_mean - self.analytic_mean_chord) / self.analytic_mean_chord

    @property
    def path_within_5se(self) -> bool:
        return abs(self.path_mean - self.analytic_mean_chord) <= 5.0 * self.path_stderr

    @property
    def chord_within_5se(self) -> bool:
        return abs(self.chord_mean - self.analytic_mean_chord) <= 5.0 * self.chord_stderr


def walk_chord_equivalence(config: WalkConfig, chord_samples: int = 10**6) -> EquivalenceReport:
    """Compare mean walk flight length with parallel-class chords and the closed form."""
    if not config.rescatter:
        raise ConfigError("walk_chord_equivalence requires rescatter=True")
    stats = run_trial(config)
    if stats.in_region_path_samples.size == 0:
        raise InsufficientDataError("the walk completed no boundary-to-boundary flights")
    geom = config.geometry
    chords = mc_mean_chord(
        geom, ChordMethod.PARALLEL_CLASS, chord_samples, RngStream(config.seed, CHORD_STREAM)
    )
    return EquivalenceReport(
        dim=geom.dim,
        radius=geom.radius,
        analytic_mean_chord=geom.mean_chord,
        path_mean=stats.mean_path_empirical,
        path_stderr=stats.path_stderr,
        path_count=int(stats.in_region_path_samples.size),
        chord_mean=chords.mean,
        chord_stderr=chords.stderr,
        k_hat=stats.k_hat,
        flux_mean_path=stats.mean_path_hat,
    )
