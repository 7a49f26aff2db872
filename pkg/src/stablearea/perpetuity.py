"""Exponential functionals ``∫_0^∞ exp(-Z_t) dt`` of spectrally negative Lévy processes.

A process is described by its Laplace exponent ``ψ(λ) = log E[exp(λ Z_1)]``
in compensated form::

    ψ(λ) = drift·λ + gaussian_coeff·λ² + ∫_{-∞}^0 (e^{λy} - 1 - λy) ν(y) dy

Two families come from ``Φ_α(s) = Γ(α+s)/Γ(s)``:

* ``area_process``:    ψ(λ) = Φ_α((α+1)λ)
* ``frechet_process``: ψ(λ) = Φ_α((α-1)λ) / (α-1)

For ``1 < α < 2``, ``Φ_α(s) = Γ(α)s + ∫ (e^{sx} - 1 - sx) f_α(x) dx`` with
``f_α(x) = e^{αx} / (Γ(-α)(1 - e^x)^{α+1})`` on ``x < 0``; rescaling ``s = kλ``
gives drift ``w Γ(α) k`` and ``ν(y) = w f_α(y/k)/k`` (``w`` the outer weight).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from . import dist
from .dist import ParameterError, RngState, SampleBatch
from .specfun import gamma_signed, log_gamma

__all__ = [
    "LevyExponentSpec",
    "area_process",
    "frechet_process",
    "custom_process",
    "levy_density_f",
    "exponent_eval",
    "exponent_integral_check",
    "simulate_perpetuity",
    "JumpTable",
    "variance_rate",
    "default_horizon",
    "QuadratureError",
    "TailBoundError",
]

AREA = "area_process"
FRECHET = "frechet_process"
CUSTOM = "custom"


class QuadratureError(ArithmeticError):
    pass


class TailBoundError(ArithmeticError):
    pass


def levy_density_f(alpha, x):
    """``f_α(x) = e^{αx} / (Γ(-α) (1 - e^x)^{α+1})`` for ``x < 0``, 1 < α < 2."""
    x = np.asarray(x, dtype=float)
    lg = math.log(gamma_signed(-alpha))
    return np.exp(alpha * x - (alpha + 1.0) * np.log(-np.expm1(x)) - lg)


def _smoothed_f(alpha, x):
    """``|x|**(α+1) f_α(x)``, finite and smooth up to ``x = 0``."""
    if x == 0.0:
        r = 1.0
    else:
        r = x / math.expm1(x)
    return math.exp(alpha * x) * r ** (alpha + 1.0) / gamma_signed(-alpha)


@dataclass(frozen=True)
class LevyExponentSpec:
    """Compensated Lévy triplet of a spectrally negative process.

    ``scale``/``weight`` record the ``k``/``w`` of the Φ_α families and are
    unused for custom processes.  ``tail_rate`` is the exponential decay rate
    of ``levy_density`` at ``-∞``.
    """

    kind: str
    alpha: float
    drift: float
    gaussian_coeff: float = 0.0
    levy_density: Callable | None = field(default=None, compare=False)
    tail_rate: float | None = None
    scale: float = 1.0
    weight: float = 1.0

    def __post_init__(self):
        if self.gaussian_coeff < 0:
            raise ParameterError("gaussian_coeff must be non-negative")
        if self.levy_density is not None and not (self.tail_rate and self.tail_rate > 0):
            raise ParameterError("a Lévy density needs a positive tail_rate")

    @property
    def mean(self) -> float:
        """``E[Z_1] = ψ'(0)``; equals ``drift`` in compensated form."""
        return self.drift


def _phi_family(kind, alpha, k, w):
    alpha = float(alpha)
    if not 1.0 <= alpha <= 2.0:
        raise ParameterError("alpha must lie in [1, 2]")
    if alpha == 1.0:
        # Φ_1(s) = s
        return LevyExponentSpec(kind, alpha, w * k, 0.0, None, None, k, w)
    if alpha == 2.0:
        # Φ_2(s) = s + s²
        return LevyExponentSpec(kind, alpha, w * k, w * k * k, None, None, k, w)
    drift = w * math.exp(log_gamma(alpha)) * k

    def nu(y, _a=alpha, _k=k, _w=w):
        return _w * levy_density_f(_a, np.asarray(y) / _k) / _k

    return LevyExponentSpec(kind, alpha, drift, 0.0, nu, alpha / k, k, w)


def area_process(alpha) -> LevyExponentSpec:
    """Process whose perpetuity has the law of the stopped area."""
    return _phi_family(AREA, alpha, alpha + 1.0, 1.0)


def frechet_process(alpha) -> LevyExponentSpec:
    """Process whose perpetuity is ``G_1**(1-α)``."""
    if alpha == 1.0:
        return LevyExponentSpec(FRECHET, 1.0, 1.0, 0.0, None, None, 0.0, 1.0)
    return _phi_family(FRECHET, alpha, alpha - 1.0, 1.0 / (alpha - 1.0))


def custom_process(drift, gaussian_coeff=0.0, levy_density=None, tail_rate=None, alpha=math.nan):
    return LevyExponentSpec(CUSTOM, alpha, float(drift), float(gaussian_coeff), levy_density, tail_rate)


def _phi(alpha, s):
    if s == 0.0:
        return 0.0
    return math.exp(log_gamma(alpha + s) - log_gamma(s))


def _jump_integral(proc: LevyExponentSpec, lam):
    """∫_{-∞}^0 (e^{λy} - 1 - λy) ν(y) dy by adaptive quadrature."""
    nu = proc.levy_density
    if nu is None or lam == 0.0:
        return 0.0, 0.0
    a = proc.alpha
    cut = proc.scale if proc.kind in (AREA, FRECHET) else 1.0

    def phi2(z):
        if abs(z) < 1e-3:
            return 0.5 + z / 6.0 + z * z / 24.0 + z**3 / 120.0
        return (math.expm1(z) - z) / (z * z)

    if proc.kind in (AREA, FRECHET):
        # near 0, ν(y) ~ |y|^{-α-1}: pull out |y|^{1-α} as an algebraic weight
        k, w = proc.scale, proc.weight

        def smooth(y):
            # |y|^{1+α} ν(y) = w k^α |x|^{1+α} f_α(x) with x = y/k
            return lam * lam * phi2(lam * y) * w * k**a * _smoothed_f(a, y / k)

        near, e1 = integrate.quad(smooth, -cut, 0.0, weight="alg", wvar=(0.0, 1.0 - a),
                                  epsabs=0.0, epsrel=1e-11, limit=200)
    else:
        near, e1 = integrate.quad(lambda y: (math.expm1(lam * y) - lam * y) * float(nu(y)),
                                  -cut, 0.0, epsabs=0.0, epsrel=1e-11, limit=400)
    far, e2 = integrate.quad(lambda y: (math.expm1(lam * y) - lam * y) * float(nu(y)),
                             -np.inf, -cut, epsabs=0.0, epsrel=1e-11, limit=200)
    return near + far, e1 + e2


def exponent_eval(proc: LevyExponentSpec, lam) -> float:
    """Laplace exponent ``log E[exp(λ Z_1)]`` for ``λ >= 0``."""
    lam = float(lam)
    if lam < 0:
        raise ParameterError("lam must be non-negative")
    if proc.kind == AREA:
        return _phi(proc.alpha, proc.scale * lam)
    if proc.kind == FRECHET:
        if proc.alpha == 1.0:
            return lam
        return _phi(proc.alpha, proc.scale * lam) / proc.scale
    jumps, _ = _jump_integral(proc, lam)
    return proc.drift * lam + proc.gaussian_coeff * lam * lam + jumps


def exponent_integral_check(proc: LevyExponentSpec, lam, rtol=1e-10) -> float:
    """The same exponent from drift + Gaussian part + Lévy-measure integral."""
    lam = float(lam)
    if lam < 0:
        raise ParameterError("lam must be non-negative")
    if proc.kind not in (AREA, FRECHET):
        raise ParameterError("integral check applies to the Φ_α families")
    jumps, err = _jump_integral(proc, lam)
    val = proc.drift * lam + proc.gaussian_coeff * lam * lam + jumps
    if err > rtol * max(abs(val), 1e-300):
        raise QuadratureError(f"quadrature error {err:.3g} too large")
    return val


class JumpTable:
    """Inverse-CDF sampler for jumps ``y <= -eps`` of a Lévy density.

    The cumulative mass ``H(w) = ∫_{-e^w}^{-eps} ν`` is tabulated on a grid of
    ``w = log|y|`` and inverted with a monotone cubic; beyond the last node
    the density is treated as its exponential envelope.
    """

    def __init__(self, nu, eps, tail_rate, nodes=4001):
        self.eps = float(eps)
        self.tail_rate = float(tail_rate)
        far = max(10.0 * self.eps, 60.0 / self.tail_rate)
        self.far = far
        w = np.linspace(math.log(self.eps), math.log(far), nodes)
        gx, gw = np.polynomial.legendre.leggauss(10)
        h = np.diff(w)
        pts = 0.5 * (w[1:] + w[:-1])[:, None] + 0.5 * h[:, None] * gx[None, :]
        y = -np.exp(pts)
        panels = 0.5 * h * np.sum(gw * nu(y) * np.exp(pts), axis=1)
        H = np.concatenate([[0.0], np.cumsum(panels)])
        # far out the increments drop below one ulp; end the table there
        flat = np.nonzero(np.diff(H) <= 0.0)[0]
        if flat.size:
            H, w = H[: flat[0] + 1], w[: flat[0] + 1]
            far = self.far = float(np.exp(w[-1]))
        self.body = float(H[-1])
        tail, _ = integrate.quad(lambda t: float(nu(t)), -np.inf, -far, epsabs=0.0, epsrel=1e-10)
        self.tail = float(tail)
        self.rate = self.body + self.tail
        self._inv = PchipInterpolator(H, w)

    def sample(self, m, gen) -> np.ndarray:
        u = gen.random(m) * self.rate
        out = np.empty(m)
        body = u < self.body
        out[body] = -np.exp(self._inv(u[body]))
        nt = int((~body).sum())
        if nt:
            out[~body] = -self.far + np.log(dist._open_uniform(gen, nt)) / self.tail_rate
        return out


def _small_jump_moments(proc: LevyExponentSpec, eps):
    """(∫_{-eps}^0 y² ν, ∫_{-∞}^{-eps} y ν)."""
    nu = proc.levy_density
    a, k, w = proc.alpha, proc.scale, proc.weight
    var, _ = integrate.quad(lambda y: w * k**a * _smoothed_f(a, y / k), -eps, 0.0,
                            weight="alg", wvar=(0.0, 1.0 - a), epsabs=0.0, epsrel=1e-10, limit=200)
    m1a, _ = integrate.quad(lambda y: y * float(nu(y)), -max(10 * eps, 1.0), -eps, epsabs=0.0, epsrel=1e-10, limit=200)
    m1b, _ = integrate.quad(lambda y: y * float(nu(y)), -np.inf, -max(10 * eps, 1.0), epsabs=0.0, epsrel=1e-10)
    return var, m1a + m1b


def variance_rate(proc: LevyExponentSpec) -> float:
    """``Var Z_1 = ψ''(0) = 2·gaussian_coeff + ∫ y² ν(y) dy``."""
    v = 2.0 * proc.gaussian_coeff
    nu = proc.levy_density
    if nu is None:
        return v
    if proc.kind in (AREA, FRECHET):
        a, k, w = proc.alpha, proc.scale, proc.weight
        near, _ = integrate.quad(lambda y: w * k**a * _smoothed_f(a, y / k), -1.0, 0.0,
                                 weight="alg", wvar=(0.0, 1.0 - a), epsabs=0.0, epsrel=1e-10)
    else:
        near, _ = integrate.quad(lambda y: y * y * float(nu(y)), -1.0, 0.0, epsabs=0.0, epsrel=1e-10, limit=400)
    far, _ = integrate.quad(lambda y: y * y * float(nu(y)), -np.inf, -1.0, epsabs=0.0, epsrel=1e-10)
    return v + near + far


def default_horizon(proc: LevyExponentSpec, level=40.0, z=6.0) -> float:
    """Smallest H with ``mean·H - z·sqrt(Var Z_1 · H) >= level``.

    Requiring only ``mean·H >= level`` ignores the spread of ``Z_H``; with a
    strong Gaussian part (α = 2) that leaves many paths far from decayed.
    """
    m = proc.mean
    sd = math.sqrt(variance_rate(proc))
    u = (z * sd + math.sqrt(z * z * sd * sd + 4.0 * m * level)) / (2.0 * m)
    return u * u


def simulate_perpetuity(proc: LevyExponentSpec, eps_jump=0.05, horizon=None, dt=1e-2, n=10_000,
                        rng: RngState | None = None, tail_tol=1e-6, chunk=4096,
                        coarse_level=30.0, coarse_dt=0.5):
    """Monte Carlo draws of ``∫_0^horizon exp(-Z_t) dt``.

    Jumps below ``-eps_jump`` form a compound Poisson process drawn from
    :class:`JumpTable`; smaller ones are replaced by a Brownian term with
    their variance (their mean is already inside the compensated drift).
    A path whose ``Z`` exceeds ``coarse_level`` continues with steps of
    ``coarse_dt``; the increments stay exact, only the quadrature of an
    already negligible integrand coarsens.
    The default horizon comes from :func:`default_horizon`.  For every path the
    remainder ``exp(-Z_H)/b`` (``b`` the simulated drift) is reported; if more
    than 0.1% of paths exceed ``tail_tol`` a :class:`TailBoundError` is raised.
    """
    if rng is None:
        raise ParameterError("an RngState is required")
    n = dist._check_n(n)
    if not (dt > 0 and eps_jump > 0):
        raise ParameterError("dt and eps_jump must be positive")
    if not proc.mean > 0:
        raise ParameterError("the process must drift to +infinity (positive mean)")
    H = default_horizon(proc) if horizon is None else float(horizon)
    if not H > 0:
        raise ParameterError("horizon must be positive")

    var = 2.0 * proc.gaussian_coeff
    b = proc.drift
    table = None
    if proc.levy_density is not None:
        small_var, big_mean = _small_jump_moments(proc, eps_jump)
        var += small_var
        b -= big_mean
        table = JumpTable(proc.levy_density, eps_jump, proc.tail_rate)
    if not b > 0:
        raise ParameterError("simulated drift is not positive")
    sigma = math.sqrt(var)
    rate = table.rate if table is not None else 0.0

    def run(k, m):
        gen = rng.generator(k)
        z = np.zeros(m)
        t = np.zeros(m)
        prev = np.ones(m)
        acc = np.zeros(m)
        steps = np.zeros(m, dtype=np.int64)
        max_jump = -np.inf
        idx = np.arange(m)
        while idx.size:
            zi = z[idx]
            # once exp(-Z) is negligible the trapezoid weight no longer matters,
            # so the (exact) increments are taken in coarse steps
            h = np.where(zi < coarse_level, dt, coarse_dt)
            h = np.minimum(h, H - t[idx])
            dz = b * h
            if sigma > 0:
                dz = dz + sigma * np.sqrt(h) * gen.standard_normal(idx.size)
            if table is not None:
                counts = gen.poisson(rate * h)
                tot = int(counts.sum())
                if tot:
                    jumps = table.sample(tot, gen)
                    max_jump = max(max_jump, float(jumps.max()))
                    dz = dz + np.bincount(np.repeat(np.arange(idx.size), counts), weights=jumps,
                                          minlength=idx.size)
            zi = zi + dz
            cur = np.exp(-zi)
            acc[idx] += 0.5 * h * (prev[idx] + cur)
            prev[idx] = cur
            z[idx] = zi
            t[idx] += h
            steps[idx] += 1
            idx = idx[t[idx] < H * (1.0 - 1e-12)]
        return acc, prev / b, max_jump, steps

    sizes = [min(chunk, n - lo) for lo in range(0, n, chunk)]
    parts = [run(k, m) for k, m in enumerate(sizes)]
    vals = np.concatenate([p[0] for p in parts])
    tails = np.concatenate([p[1] for p in parts])
    max_jump = max(p[2] for p in parts)
    mean_steps = float(np.concatenate([p[3] for p in parts]).mean())
    n_bad = int(np.sum(tails > tail_tol))
    meta = {
        "horizon": H,
        "dt": dt,
        "mean_steps": mean_steps,
        "eps_jump": eps_jump,
        "simulated_drift": b,
        "brownian_sigma": sigma,
        "jump_rate": 0.0 if table is None else table.rate,
        "max_jump": None if table is None else max_jump,
        "tail_bound_max": float(tails.max()),
        "tail_bound_mean": float(tails.mean()),
        "tail_exceedances": n_bad,
    }
    if n_bad > 1e-3 * n:
        raise TailBoundError(f"{n_bad} paths have a horizon remainder above {tail_tol:g}")
    params = {"kind": proc.kind, "alpha": proc.alpha}
    return SampleBatch("perpetuity", params, vals, rng, meta)
