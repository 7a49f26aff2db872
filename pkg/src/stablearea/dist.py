"""Seedable exact samplers for the building-block laws.

Conventions
-----------
* ``Gamma(a)`` has density ``x**(a-1) e**(-x) / Γ(a)`` (unit scale).
* ``Beta(a, b)`` is sampled as ``G_a / (G_a + G_b)``.
* ``Z_a`` is the positive ``a``-stable variable with ``E[exp(-λ Z_a)] = exp(-λ**a)``.
* Stable increments follow ``E[exp(-t L_dt)] = exp(dt * t**α)``, ``1 < α <= 2``.

Every sampler takes an :class:`RngState` (or an already-built
``numpy.random.Generator`` when composed internally) and never touches
global random state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "ParameterError",
    "RngState",
    "SampleBatch",
    "sample_uniform",
    "sample_exponential",
    "sample_gamma",
    "sample_beta",
    "sample_positive_stable",
    "sample_stable_increment",
    "stable_scale",
]


class ParameterError(ValueError):
    """Invalid distribution parameter."""


@dataclass(frozen=True)
class RngState:
    """Seed plus stream identifier of a counter-based (Philox) generator.

    Identical ``(seed, stream_id)`` pairs reproduce identical sequences;
    distinct stream ids give independent streams.  Extra ``sub`` keys derive
    further independent child streams, e.g. one per Monte Carlo chunk.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not (0 <= int(v) < 2**64):
                raise ParameterError(f"{name} must be a 64-bit unsigned integer")

    def generator(self, *sub: int) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id), *map(int, sub)))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, offset: int) -> "RngState":
        return RngState(self.seed, (self.stream_id + 1 + offset) % 2**64)

    def as_dict(self):
        return {"seed": int(self.seed), "stream_id": int(self.stream_id)}


RngLike = Union[RngState, np.random.Generator]


def _gen(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngState):
        return rng.generator()
    raise TypeError("rng must be an RngState or numpy Generator")


@dataclass
class SampleBatch:
    """Array of i.i.d. draws tagged with the law they come from."""

    law: str
    params: dict
    values: np.ndarray
    rng: RngState | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"non-finite draws in {self.law} batch")

    def __len__(self):
        return self.values.size

    def describe(self) -> dict:
        return {
            "law_tag": self.law,
            "params": dict(self.params),
            "n": len(self),
            "seed": None if self.rng is None else self.rng.as_dict(),
            **self.meta,
        }


def _batch(law, params, values, rng):
    return SampleBatch(law, params, values, rng if isinstance(rng, RngState) else None)


def _check_n(n):
    if int(n) < 1:
        raise ParameterError("n must be >= 1")
    return int(n)


def _open_uniform(gen, n):
    # (0, 1): Generator.random is [0, 1)
    u = gen.random(n)
    while True:
        bad = u == 0.0
        if not bad.any():
            return u
        u[bad] = gen.random(int(bad.sum()))


def sample_uniform(n, rng: RngLike) -> SampleBatch:
    return _batch("uniform", {}, _open_uniform(_gen(rng), _check_n(n)), rng)


def sample_exponential(n, rng: RngLike) -> SampleBatch:
    gen = _gen(rng)
    return _batch("exponential", {}, -np.log(_open_uniform(gen, _check_n(n))), rng)


def _log_gamma_variates(a, n, gen):
    """log of ``n`` Gamma(a) draws (Marsaglia-Tsang squeeze, boosted for a < 1).

    Working on the log scale keeps tiny shapes from underflowing to zero.
    """
    boost = a < 1.0
    shape = a + 1.0 if boost else a
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(n)
    todo = np.arange(n)
    while todo.size:
        m = todo.size
        z = gen.standard_normal(m)
        u = _open_uniform(gen, m)
        v = 1.0 + c * z
        ok = v > 0
        v3 = np.where(ok, v, 1.0) ** 3
        logv3 = np.log(v3)
        accept = ok & (
            (u < 1.0 - 0.0331 * z**4)
            | (np.log(u) < 0.5 * z * z + d - d * v3 + d * logv3)
        )
        out[todo[accept]] = math.log(d) + logv3[accept]
        todo = todo[~accept]
    if boost:
        out += np.log(_open_uniform(gen, n)) / a
    return out


def sample_gamma(a, n, rng: RngLike) -> SampleBatch:
    """Gamma(a) draws with unit scale."""
    if not a > 0:
        raise ParameterError("Gamma shape must be positive")
    gen = _gen(rng)
    vals = np.exp(_log_gamma_variates(float(a), _check_n(n), gen))
    return _batch("gamma", {"a": float(a)}, vals, rng)


def _beta_parts(a, b, n, gen):
    la = _log_gamma_variates(a, n, gen)
    lb = _log_gamma_variates(b, n, gen)
    return la, lb


def sample_beta(a, b, n, rng: RngLike) -> SampleBatch:
    """Beta(a, b) draws as ``G_a / (G_a + G_b)``."""
    if not (a > 0 and b > 0):
        raise ParameterError("Beta parameters must be positive")
    gen = _gen(rng)
    la, lb = _beta_parts(float(a), float(b), _check_n(n), gen)
    # 1/(1+exp(lb-la)) is stable on both sides
    vals = 1.0 / (1.0 + np.exp(lb - la))
    return _batch("beta", {"a": float(a), "b": float(b)}, vals, rng)


def inverse_beta(a, b, n, gen) -> np.ndarray:
    """Draws of ``1/B_{a,b} = 1 + G_b/G_a``; exact even when B rounds to 1."""
    la, lb = _beta_parts(float(a), float(b), int(n), gen)
    return 1.0 + np.exp(lb - la)


def _kanter(a, n, gen):
    u = _open_uniform(gen, n)
    e = -np.log(_open_uniform(gen, n))
    pu = np.pi * u
    log_A = (
        (a / (1.0 - a)) * np.log(np.sin(a * pu))
        + np.log(np.sin((1.0 - a) * pu))
        - np.log(np.sin(pu)) / (1.0 - a)
    )
    return np.exp(((1.0 - a) / a) * (log_A - np.log(e)))


def sample_positive_stable(a, n, rng: RngLike) -> SampleBatch:
    """Z_a with Laplace transform ``exp(-λ**a)`` via Kanter's representation.

    ``Z_a = (A(U) / E)**((1-a)/a)`` with ``U`` uniform on (0, 1), ``E`` unit
    exponential and
    ``A(u) = sin(aπu)**(a/(1-a)) sin((1-a)πu) / sin(πu)**(1/(1-a))``.
    """
    if not (0.0 < a < 1.0):
        raise ParameterError("positive stable index must lie in (0, 1)")
    gen = _gen(rng)
    return _batch("positive_stable", {"a": float(a)}, _kanter(float(a), _check_n(n), gen), rng)


def stable_scale(alpha):
    """Scale σ so that σ·S_α(1, β=1, 0) has ``E[exp(-tX)] = exp(t**α)``.

    For the totally skewed law ``log E[exp(-tX)] = -σ**α t**α / cos(πα/2)``,
    which equals ``t**α`` when ``σ = |cos(πα/2)|**(1/α)``.
    """
    return abs(math.cos(math.pi * alpha / 2.0)) ** (1.0 / alpha)


def _cms_skewed(alpha, n, gen):
    """Chambers-Mallows-Stuck draws of S_α(1, 1, 0), α ≠ 1."""
    v = np.pi * (_open_uniform(gen, n) - 0.5)
    w = -np.log(_open_uniform(gen, n))
    t = math.tan(math.pi * alpha / 2.0)
    b = math.atan(t) / alpha
    s = (1.0 + t * t) ** (1.0 / (2.0 * alpha))
    ab = alpha * (v + b)
    return (
        s * np.sin(ab) / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - ab) / w) ** ((1.0 - alpha) / alpha)
    )


def stable_increments(alpha, dt, gen) -> np.ndarray:
    """Increments ``L_dt`` for an array (or scalar) of step sizes ``dt``."""
    dt = np.asarray(dt, dtype=float)
    n = dt.size
    if alpha == 2.0:
        return np.sqrt(2.0 * dt) * gen.standard_normal(n).reshape(dt.shape)
    if alpha == 1.0:
        return -dt.copy()
    x = _cms_skewed(alpha, n, gen).reshape(dt.shape)
    return stable_scale(alpha) * dt ** (1.0 / alpha) * x


def sample_stable_increment(alpha, dt, n, rng: RngLike) -> SampleBatch:
    """Spectrally positive strictly α-stable increments over a step ``dt``."""
    if not (1.0 < alpha <= 2.0):
        raise ParameterError("alpha must lie in (1, 2]")
    if not dt > 0:
        raise ParameterError("dt must be positive")
    gen = _gen(rng)
    vals = stable_increments(float(alpha), np.full(_check_n(n), float(dt)), gen)
    return _batch("stable_increment", {"alpha": float(alpha), "dt": float(dt)}, vals, rng)
