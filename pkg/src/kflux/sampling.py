"""Seeded per-stream random numbers and uniform ball/sphere samplers.

Every stream is a SplitMix64 generator (the SplittableRandom construction):
a 64-bit counter advanced by an odd, stream-specific gamma and passed
through a 64-bit finalizer.  The pair ``(seed, stream_id)`` is hashed into
the initial counter and the gamma, so a stream's sequence depends on nothing
else and is reproducible on any platform.  Normal deviates use a 256-layer
ziggurat on the same stream.

The ``@njit`` primitives below thread the counter through as a scalar
(``value, s = f(s, g, ...)``) so that the simulation kernels and the
Python-level API share one implementation and consume streams identically.
Keeping state and the ziggurat tables out of array arguments avoids
per-call reference counting in the hot loops.
"""

from __future__ import annotations

import enum
import math

import numba as nb
import numpy as np

from .geometry import check_dim

U64 = np.uint64
GOLDEN = U64(0x9E3779B97F4A7C15)
INV_2_53 = 1.0 / 9007199254740992.0

# rejection acceptance is V_n / 2**n; below 0.1% past n = 12
MAX_REJECTION_DIM = 12


class ConfigError(ValueError):
    """Invalid simulation or sampler configuration."""


class SampleMode(str, enum.Enum):
    REJECTION = "rejection"
    DIRECT = "direct"


def _parse_mode(mode) -> SampleMode:
    try:
        return SampleMode(mode)
    except ValueError:
        raise ConfigError(f"unknown sample mode {mode!r}") from None


def check_mode(n: int, mode) -> SampleMode:
    mode = _parse_mode(mode)
    if mode is SampleMode.REJECTION and n > MAX_REJECTION_DIM:
        raise ConfigError(
            f"rejection sampling refused for n={n} > {MAX_REJECTION_DIM} "
            "(acceptance ratio below 0.1%)"
        )
    return mode


def _ziggurat_tables(layers: int = 256) -> tuple[np.ndarray, np.ndarray]:
    # Marsaglia & Tsang constants for 256 layers
    r = 3.6541528853610088
    v = 0.00492867323399
    x = np.empty(layers + 1)
    x[0] = v / math.exp(-0.5 * r * r)
    x[1] = r
    for i in range(2, layers):
        x[i] = math.sqrt(-2.0 * math.log(v / x[i - 1] + math.exp(-0.5 * x[i - 1] ** 2)))
    x[layers] = 0.0
    fx = np.exp(-0.5 * x * x)
    fx[0] = 0.0
    return x, fx


ZIG_X, ZIG_F = _ziggurat_tables()


@nb.njit(inline="always")
def mix64(z):
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@nb.njit(cache=True)
def _mix_gamma(z):
    z = (z ^ (z >> U64(33))) * U64(0xFF51AFD7ED558CCD)
    z = (z ^ (z >> U64(33))) * U64(0xC4CEB9FE1A85EC53)
    z = (z ^ (z >> U64(33))) | U64(1)
    t = z ^ (z >> U64(1))
    bits = 0
    while t != U64(0):
        t &= t - U64(1)
        bits += 1
    if bits < 24:
        z ^= U64(0xAAAAAAAAAAAAAAAA)
    return z


@nb.njit(cache=True)
def init_state(seed, stream_id, out):
    """Write the ``[counter, gamma]`` pair for ``(seed, stream_id)`` into ``out``."""
    h = mix64(U64(seed) ^ U64(0x5851F42D4C957F2D))
    c = mix64(h + mix64(U64(stream_id) + GOLDEN))
    out[0] = c
    out[1] = _mix_gamma(c + GOLDEN)


@nb.njit(inline="always")
def uniform(s, g):
    """Uniform double on [0, 1) with 53 random bits."""
    s = s + g
    return np.int64(mix64(s) >> U64(11)) * INV_2_53, s


@nb.njit
def _normal_slow(s, g, i, x):
    # returns -1.0 on rejection
    if i == 0:
        while True:
            a, s = uniform(s, g)
            b, s = uniform(s, g)
            a = -math.log(1.0 - a) / ZIG_X[1]
            b = -math.log(1.0 - b)
            if b + b > a * a:
                break
        return ZIG_X[1] + a, s
    c, s = uniform(s, g)
    if ZIG_F[i + 1] + c * (ZIG_F[i] - ZIG_F[i + 1]) < math.exp(-0.5 * x * x):
        return x, s
    return -1.0, s


@nb.njit(inline="always")
def normal(s, g):
    while True:
        s = s + g
        u = mix64(s)
        i = np.int64(u & U64(255))
        x = np.int64(u >> U64(11)) * INV_2_53 * ZIG_X[i]
        if x < ZIG_X[i + 1]:
            break
        x, s = _normal_slow(s, g, i, x)
        if x >= 0.0:
            break
    if (u >> U64(8)) & U64(1):
        x = -x
    return x, s


@nb.njit(inline="always")
def direction_direct(s, g, n, out):
    while True:
        ss = 0.0
        for j in range(n):
            z, s = normal(s, g)
            out[j] = z
            ss += z * z
        if ss > 0.0:
            break
    norm = math.sqrt(ss)
    for j in range(n):
        out[j] /= norm
    return s


@nb.njit(inline="always")
def direction_rejection(s, g, n, out):
    while True:
        ss = 0.0
        for j in range(n):
            z, s = uniform(s, g)
            z = 2.0 * z - 1.0
            out[j] = z
            ss += z * z
        if ss > 0.0 and ss <= 1.0:
            break
    norm = math.sqrt(ss)
    for j in range(n):
        out[j] /= norm
    return s


@nb.njit(inline="always")
def draw_direction(s, g, n, rejection, out):
    if rejection:
        return direction_rejection(s, g, n, out)
    return direction_direct(s, g, n, out)


@nb.njit(inline="always")
def draw_point(s, g, n, r, rejection, out):
    if rejection:
        while True:
            ss = 0.0
            for j in range(n):
                z, s = uniform(s, g)
                z = r * (2.0 * z - 1.0)
                out[j] = z
                ss += z * z
            if ss < r * r:
                break
        return s
    s = direction_direct(s, g, n, out)
    u, s = uniform(s, g)
    # 1 - u is uniform on (0, 1]
    scale = r * (1.0 - u) ** (1.0 / n)
    for j in range(n):
        out[j] *= scale
    return s


@nb.njit(cache=True)
def _fill_directions(st, n, rejection, out):
    s, g = st[0], st[1]
    for k in range(out.shape[0]):
        s = draw_direction(s, g, n, rejection, out[k])
    st[0] = s


@nb.njit(cache=True)
def _fill_points(st, n, r, rejection, out):
    s, g = st[0], st[1]
    for k in range(out.shape[0]):
        s = draw_point(s, g, n, r, rejection, out[k])
    st[0] = s


@nb.njit(cache=True)
def _fill_uniform(st, out):
    s, g = st[0], st[1]
    for k in range(out.shape[0]):
        out[k], s = uniform(s, g)
    st[0] = s


@nb.njit(cache=True)
def _fill_normal(st, out):
    s, g = st[0], st[1]
    for k in range(out.shape[0]):
        out[k], s = normal(s, g)
    st[0] = s


class RngStream:
    """One reproducible random stream identified by ``(seed, stream_id)``.

    Not safe to share between threads; give each worker its own stream_id.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        for name, v in (("seed", seed), ("stream_id", stream_id)):
            if int(v) != v or not 0 <= int(v) < 2**64:
                raise ConfigError(f"{name} must be a 64-bit unsigned integer, got {v!r}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.state = np.zeros(2, dtype=np.uint64)
        init_state(U64(self.seed), U64(self.stream_id), self.state)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def uniform(self, size: int | None = None):
        out = np.empty(1 if size is None else size)
        _fill_uniform(self.state, out)
        return out[0] if size is None else out

    def normal(self, size: int | None = None):
        out = np.empty(1 if size is None else size)
        _fill_normal(self.state, out)
        return out[0] if size is None else out


def sample_unit_directions(n: int, rng: RngStream, mode=SampleMode.DIRECT, size: int = 1) -> np.ndarray:
    """``size`` uniform unit vectors in R^n, shape ``(size, n)``.

    Consumes the stream exactly as ``size`` successive calls of
    :func:`sample_unit_direction` would.
    """
    n = check_dim(n)
    mode = check_mode(n, mode)
    out = np.empty((size, n))
    _fill_directions(rng.state, n, mode is SampleMode.REJECTION, out)
    return out


def sample_unit_direction(n: int, rng: RngStream, mode=SampleMode.DIRECT) -> np.ndarray:
    return sample_unit_directions(n, rng, mode, 1)[0]


def sample_points_in_ball(
    n: int, r: float, rng: RngStream, mode=SampleMode.DIRECT, size: int = 1
) -> np.ndarray:
    n = check_dim(n)
    mode = check_mode(n, mode)
    if not r > 0:
        raise ConfigError(f"radius must be positive, got {r!r}")
    out = np.empty((size, n))
    _fill_points(rng.state, n, float(r), mode is SampleMode.REJECTION, out)
    return out


def sample_point_in_ball(n: int, r: float, rng: RngStream, mode=SampleMode.DIRECT) -> np.ndarray:
    return sample_points_in_ball(n, r, rng, mode, 1)[0]
