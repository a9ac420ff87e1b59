"""Closed-form constants and samplers for the scaled greedy-play score limit.

Under greedy play ``S_n / sqrt(n)`` converges to ``W + max(Z1, Z2, Z3)`` with
``W ~ N(0, 2)`` independent of the exchangeable triple ``Z`` whose covariance
is ``[[2, -1, -1], [-1, 2, -1], [-1, -1, 2]]``.  ``Z`` is singular (it sums to
zero), so every sampler below uses an explicit low-rank construction instead
of factoring the covariance matrix.

Gaussian draws come from ``numpy.random.Generator.standard_normal``
(ziggurat), so a stream is reproducible given its seed and numpy version.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

# Unit directions at 120 degrees; Z_i = F[i] . zeta.
PLANAR_DIRECTIONS = np.array([[1.0, 0.0], [-0.5, SQRT3 / 2.0], [-0.5, -SQRT3 / 2.0]])

_THETA_LO = np.nextafter(0.0, 1.0)
_THETA_HI = np.nextafter(math.pi / 3.0, 0.0)


class LimitRep(str, enum.Enum):
    TL2 = "TL2"
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    EROCK = "EROCK"

    @classmethod
    def parse(cls, tag: str | LimitRep) -> LimitRep:
        try:
            return cls(str(tag.value if isinstance(tag, LimitRep) else tag).upper())
        except ValueError:
            raise ValueError(f"unknown representation {tag!r}; choose from {[r.value for r in cls]}") from None


# Representations that share the greedy-play limit law.
GREEDY_REPS = (LimitRep.TL2, LimitRep.A, LimitRep.B, LimitRep.C, LimitRep.D)


@dataclass(frozen=True)
class LimitConstants:
    mean: float
    second_moment: float
    variance: float
    win_prob: float
    mean_radius: float
    mean_cos_angle: float


def constants() -> LimitConstants:
    pi = math.pi
    return LimitConstants(
        mean=3.0 * SQRT3 / (2.0 * math.sqrt(pi)),
        second_moment=4.0 + 3.0 * SQRT3 / (2.0 * pi),
        variance=4.0 - (27.0 - 6.0 * SQRT3) / (4.0 * pi),
        win_prob=(3.0 * math.acos(0.25) - pi) / (4.0 * pi),
        mean_radius=math.sqrt(pi),
        mean_cos_angle=3.0 * SQRT3 / (2.0 * pi),
    )


def orthant_win_prob() -> float:
    """P(W + max Z < 0) from the actual covariance of the limit vector.

    The three coordinates W + Z_i are jointly normal with variance 4 and
    pairwise covariance 1, so the event is an orthant with correlation 1/4.
    """
    return 0.125 + 3.0 * math.asin(0.25) / (4.0 * math.pi)


def rock_variance_bounds() -> tuple[float, float]:
    """Range of Var(W + Zmax) over all couplings of W and Zmax."""
    sd_w = SQRT2
    sd_z = math.sqrt(2.0 - (27.0 - 6.0 * SQRT3) / (4.0 * math.pi))
    return (sd_w - sd_z) ** 2, (sd_w + sd_z) ** 2


def planar_triple(zeta: np.ndarray) -> np.ndarray:
    """Map planar points (..., 2) to triples (..., 3) with zero sum."""
    return np.asarray(zeta, dtype=float) @ PLANAR_DIRECTIONS.T


def z_triple(size: int, rng: np.random.Generator) -> np.ndarray:
    """Draws of (Z1, Z2, Z3) with covariance 2 on the diagonal, -1 off it."""
    zeta = SQRT2 * rng.standard_normal((size, 2))
    return planar_triple(zeta)


def v_triple(size: int, rng: np.random.Generator) -> np.ndarray:
    """Draws of (V1, V2, V3) with covariance 2/3 on the diagonal, -1/3 off it."""
    g = rng.standard_normal((size, 3))
    return g - g.mean(axis=1, keepdims=True)


def rep_d_transform(w, u, theta):
    """W + R cos(theta) with R = 2 sqrt(-ln u), the Rayleigh inverse CDF."""
    u = np.asarray(u, dtype=float)
    radius = 2.0 * np.sqrt(-np.log(u))
    return np.asarray(w, dtype=float) + radius * np.cos(theta)


def draw(rep: LimitRep | str, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent draws of the chosen representation."""
    rep = LimitRep.parse(rep)
    if size < 0:
        raise ValueError("size must be nonnegative")
    if rep is LimitRep.TL2:
        v = v_triple(size, rng)
        w = SQRT2 * rng.standard_normal(size)
        z = v + 2.0 * np.roll(v, -1, axis=1)
        return w + z.max(axis=1)
    if rep is LimitRep.A:
        z = z_triple(size, rng)
        w = SQRT2 * rng.standard_normal(size)
        return w + z.max(axis=1)
    if rep is LimitRep.B:
        g = rng.standard_normal((size, 4))
        return g[:, 0] + SQRT3 * g[:, 1:].max(axis=1)
    if rep is LimitRep.C:
        z = z_triple(size, rng)
        w = SQRT2 * rng.standard_normal(size)
        return (w[:, None] + z).max(axis=1)
    if rep is LimitRep.D:
        w = SQRT2 * rng.standard_normal(size)
        u = 1.0 - rng.random(size)  # (0, 1]
        theta = np.clip(rng.random(size) * (math.pi / 3.0), _THETA_LO, _THETA_HI)
        return rep_d_transform(w, u, theta)
    z = z_triple(size, rng)
    return np.maximum(0.0, np.maximum(z[:, 1] - z[:, 0], z[:, 2] - z[:, 0]))


def sample(rep: LimitRep | str, rng: np.random.Generator) -> float:
    return float(draw(rep, 1, rng)[0])


def draw_stream(
    rep: LimitRep | str, count: int, seed: int, chunk: int = 1 << 18
) -> np.ndarray:
    """``count`` draws built from per-chunk substreams of ``seed``.

    Chunk ``k`` always uses the generator seeded by ``(seed, k)``, so the
    output does not depend on how chunks are scheduled.
    """
    out = np.empty(count)
    for k, start in enumerate(range(0, count, chunk)):
        stop = min(count, start + chunk)
        out[start:stop] = draw(rep, stop - start, np.random.default_rng([k, int(seed)]))
    return out
