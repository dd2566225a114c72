"""Spherical caps on S^2 and a geodesic random walk counting cap crossings.

Walkers roam the whole sphere (it is compact, so no wall is needed and the
equilibrium density is uniform).  The cap ``z >= r cos(theta)`` is a counting
region: each entry is one boundary crossing, and the arc length between an
entry and the following exit is one in-cap path.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba as nb
import numpy as np

from .geometry import DomainError
from .sampling import ConfigError, direction_direct, init_state
from .walker import DEFAULT_BUDGET, WalkStats, _chunks

K_S2 = 1.0 / math.pi


@dataclass(frozen=True)
class CapSpec:
    sphere_radius: float = 1.0
    theta: float = math.pi / 2

    def __post_init__(self) -> None:
        if not self.sphere_radius > 0:
            raise DomainError(f"sphere radius must be positive, got {self.sphere_radius}")
        if not 0 < self.theta <= math.pi / 2:
            raise DomainError(f"cap colatitude must lie in (0, pi/2], got {self.theta}")


def cap_volume(cap: CapSpec) -> float:
    r = cap.sphere_radius
    # 2 pi r^2 (1 - cos theta), cancellation-free
    return 4.0 * math.pi * r * r * math.sin(0.5 * cap.theta) ** 2


def cap_boundary_length(cap: CapSpec) -> float:
    return 2.0 * math.pi * cap.sphere_radius * math.sin(cap.theta)


def cap_mean_chord(cap: CapSpec) -> float:
    """``pi r (1 - cos theta) / sin theta``, i.e. area / (boundary / pi)."""
    if cap.theta <= 0:
        raise DomainError("cap_mean_chord undefined for theta = 0")
    # 1 - cos = 2 sin^2(theta/2) avoids cancellation for small caps
    r, t = cap.sphere_radius, cap.theta
    return math.pi * r * 2.0 * math.sin(0.5 * t) ** 2 / math.sin(t)


def geodesic_chord_length(psi: float, cap: CapSpec) -> float:
    """Arc of the great circle with pole at colatitude ``psi`` lying inside the cap.

    The circle's axial coordinate is ``sin(psi) cos(phi)``, so the arc inside
    ``z >= cos(theta)`` has half-angle ``arccos(cos(theta) / sin(psi))``.
    """
    if not 0 <= psi <= math.pi / 2:
        raise DomainError(f"psi must lie in [0, pi/2], got {psi}")
    c = math.cos(cap.theta)
    s = math.sin(psi)
    if s < c or s == 0.0:
        return 0.0
    return 2.0 * cap.sphere_radius * math.acos(min(c / s, 1.0))


@dataclass(frozen=True)
class S2WalkConfig:
    cap: CapSpec = CapSpec()
    dt: float = 0.01
    steps: int = 2000
    walkers: int = 20000
    seed: int = 0
    workers: int = 1
    budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        r, th = self.cap.sphere_radius, self.cap.theta
        if not 0 < self.dt < r * th / 10:
            raise ConfigError(f"dt={self.dt} must lie in (0, r*theta/10 = {r * th / 10:.6g})")
        if self.steps < 0 or self.walkers < 0:
            raise ConfigError("steps and walkers must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.steps * self.walkers > self.budget:
            raise ConfigError("steps*walkers exceeds budget")


@dataclass
class S2WalkStats(WalkStats):
    cap: CapSpec = CapSpec()
    exits: int = 0
    occupancy_time: float = 0.0
    frame_drift: float = 0.0

    @property
    def occupancy_mean_path(self) -> float:
        """Total in-cap arc length per entry (residence time over entry rate)."""
        if self.boundary_hits == 0:
            return math.nan
        return self.occupancy_time / self.boundary_hits


@nb.njit(inline="always")
def _tangent_heading(s, g, p, h):
    while True:
        s = direction_direct(s, g, 3, h)
        c = h[0] * p[0] + h[1] * p[1] + h[2] * p[2]
        nn = 0.0
        for j in range(3):
            h[j] -= c * p[j]
            nn += h[j] * h[j]
        if nn > 1e-12:
            break
    inv = 1.0 / math.sqrt(nn)
    for j in range(3):
        h[j] *= inv
    return s


@nb.njit(inline="always")
def _wrap(phi):
    two_pi = 2.0 * math.pi
    phi = phi % two_pi
    return phi + two_pi if phi < 0.0 else phi


@nb.njit(cache=True, nogil=True)
def _s2_chunk(lo, hi, r, cz, dt, steps, seed, entries, exits, occupancy, check):
    """Walk on the unit sphere; arc lengths are scaled by ``r`` on output.

    ``check[0]`` receives the worst drift of ``|p|`` and ``p . h`` seen.
    """
    st = np.empty(2, dtype=np.uint64)
    p = np.empty(3)
    h = np.empty(3)
    a = dt / r
    ca = math.cos(a)
    sa = math.sin(a)
    buf = np.empty(max(1024, 8 * (hi - lo)))
    used = 0
    drift = 0.0
    for w in range(lo, hi):
        init_state(np.uint64(seed), np.uint64(w), st)
        s = st[0]
        g = st[1]
        s = direction_direct(s, g, 3, p)
        inside = p[2] >= cz
        entered_at = -1.0
        n_in = 0
        n_out = 0
        occ = 0.0
        for k in range(steps):
            s = _tangent_heading(s, g, p, h)
            pz = p[2]
            hz = h[2]
            # arc z(phi) = pz cos(phi) + hz sin(phi), phi in [0, a]
            ez = pz * ca + hz * sa
            t0 = k * a
            if abs(pz - cz) > a and abs(ez - cz) > a:
                # z is 1-Lipschitz in arc length: no crossing this step
                if inside:
                    occ += a
            else:
                amp = math.sqrt(pz * pz + hz * hz)
                n_roots = 0
                r1 = 0.0
                r2 = 0.0
                if amp > abs(cz):
                    delta = math.atan2(hz, pz)
                    half = math.acos(cz / amp)
                    x1 = _wrap(delta - half)
                    x2 = _wrap(delta + half)
                    if x1 > x2:
                        x1, x2 = x2, x1
                    if x1 <= a:
                        r1 = x1
                        n_roots = 1
                        if x2 <= a:
                            r2 = x2
                            n_roots = 2
                    elif x2 <= a:
                        r1 = x2
                        n_roots = 1
                prev = 0.0
                for e in range(n_roots):
                    phi = r1 if e == 0 else r2
                    if inside:
                        occ += phi - prev
                        n_out += 1
                        if entered_at >= 0.0:
                            if used == buf.size:
                                grown = np.empty(2 * buf.size)
                                grown[:used] = buf[:used]
                                buf = grown
                            buf[used] = (t0 + phi - entered_at) * r
                            used += 1
                        entered_at = -1.0
                    else:
                        n_in += 1
                        entered_at = t0 + phi
                    inside = not inside
                    prev = phi
                if inside:
                    occ += a - prev
            # rotate (p, h) through angle a in their plane
            for j in range(3):
                pj = p[j]
                p[j] = ca * pj + sa * h[j]
                h[j] = ca * h[j] - sa * pj
            nn = math.sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
            drift = max(drift, abs(nn - 1.0))
            for j in range(3):
                p[j] /= nn
            drift = max(drift, abs(p[0] * h[0] + p[1] * h[1] + p[2] * h[2]))
            # re-derive the side from the normalized position (guards roundoff at a root)
            side = p[2] >= cz
            if side != inside:
                if side:
                    n_in += 1
                    entered_at = t0 + a
                else:
                    n_out += 1
                    entered_at = -1.0
                inside = side
        entries[w - lo] = n_in
        exits[w - lo] = n_out
        occupancy[w - lo] = occ * r
    check[0] = max(check[0], drift)
    return buf[:used].copy()


def s2_walk_trial(config: S2WalkConfig) -> S2WalkStats:
    cap = config.cap
    r = cap.sphere_radius
    W, S = config.walkers, config.steps
    entries = np.zeros(W, dtype=np.int64)
    exits = np.zeros(W, dtype=np.int64)
    occupancy = np.zeros(W)
    cz = math.cos(cap.theta)
    chunks = _chunks(W, config.workers) if W else []
    checks = np.zeros((max(len(chunks), 1), 1))

    def work(i):
        lo, hi = chunks[i]
        return _s2_chunk(
            lo, hi, r, cz, float(config.dt), S, np.uint64(config.seed),
            entries[lo:hi], exits[lo:hi], occupancy[lo:hi], checks[i],
        )

    if config.workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            paths = list(pool.map(work, range(len(chunks))))
    else:
        paths = [work(i) for i in range(len(chunks))]
    samples = np.concatenate(paths) if paths else np.empty(0)
    drift = float(checks.max())
    if drift > 1e-9:
        raise ArithmeticError(f"tangent frame drifted by {drift:.3g}")

    total = int(entries.sum())
    stats = S2WalkStats(
        dim=2, radius=r, walkers=W, steps=S, dt=config.dt,
        boundary_hits=total, hits_per_walker=entries, in_region_path_samples=samples,
        cap=cap, exits=int(exits.sum()), occupancy_time=float(occupancy.sum()), frame_drift=drift,
    )
    if total > 0:
        area = cap_boundary_length(cap)
        scale = 4.0 * math.pi * r * r / (area * S * config.dt)
        stats.k_hat = total / W * scale
        if W > 1:
            stats.k_stderr = float(entries.std(ddof=1) / math.sqrt(W) * scale)
        stats.mean_path_hat = cap_volume(cap) / (stats.k_hat * area)
    return stats
