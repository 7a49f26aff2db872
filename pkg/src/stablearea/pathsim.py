"""Direct simulation of the stable process from level 1 down to its first zero.

The walk uses exact stable increments.  Below ``refine_threshold`` the step
is ``dt * refine_factor``; between the threshold and level 1 it is ``dt``;
above level 1 it grows like ``level**α`` so that, by self-similarity, the
relative resolution stays the same however far the path wanders (heavy-tailed
hitting times make a fixed step unaffordable).  Since the process has no
negative jumps it reaches zero continuously, and the crossing inside the last
step is located by linear interpolation.  The area uses the trapezoid rule.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import dist
from .arealaw import AlphaContext, _ctx
from .dist import ParameterError, RngState, SampleBatch
from .specfun import log_gamma

__all__ = [
    "PathConfig",
    "StoppedAreaDraw",
    "HorizonError",
    "default_max_time",
    "simulate_stopped_area",
    "batch_stopped_areas",
    "convergence_study",
    "DtTuning",
    "tune_dt",
]

CHUNK = 2048
MAX_FAILURE_RATE = 1e-3


class HorizonError(RuntimeError):
    """Paths reached ``max_time`` without crossing zero."""


def default_max_time(alpha, y0=1.0, prob=1e-6) -> float:
    """Time t with ``P[T > t] ≈ prob`` for the hitting time ``T ~ y0**α Z_{1/α}``.

    Uses the stable tail ``P[Z_a > t] ~ t**(-a) / Γ(1-a)``.
    """
    if alpha == 1.0:
        return 10.0 * y0
    a = 1.0 / alpha
    t = (prob * math.exp(log_gamma(1.0 - a))) ** (-1.0 / a)
    return float(t * y0 ** alpha)


@dataclass(frozen=True)
class PathConfig:
    dt: float = 1e-3
    refine_threshold: float = 0.1
    refine_factor: float = 0.25
    max_time: float | None = None
    y0: float = 1.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError("dt must be positive")
        if not 0 < self.refine_factor < 1:
            raise ParameterError("refine_factor must lie in (0, 1)")
        if not self.refine_threshold > 0:
            raise ParameterError("refine_threshold must be positive")
        if not self.y0 > 0:
            raise ParameterError("y0 must be positive")
        if self.max_time is not None and not self.max_time > 0:
            raise ParameterError("max_time must be positive")

    def horizon(self, alpha) -> float:
        return self.max_time if self.max_time is not None else default_max_time(alpha, self.y0)


@dataclass(frozen=True)
class StoppedAreaDraw:
    hitting_time: float
    area: float
    n_steps: int
    refined: bool


def _simulate(alpha, cfg: PathConfig, m, gen):
    """Advance ``m`` independent paths to zero.  Returns arrays."""
    horizon = cfg.horizon(alpha)
    y = np.full(m, float(cfg.y0))
    t = np.zeros(m)
    area = np.zeros(m)
    steps = np.zeros(m, dtype=np.int64)
    refined = np.zeros(m, dtype=bool)
    failed = np.zeros(m, dtype=bool)
    idx = np.arange(m)
    while idx.size:
        yi = y[idx]
        low = yi < cfg.refine_threshold
        h = cfg.dt * np.where(low, cfg.refine_factor, np.maximum(yi, 1.0) ** alpha)
        yn = yi + dist.stable_increments(alpha, h, gen)
        steps[idx] += 1
        refined[idx] |= low
        cross = yn <= 0.0
        # fraction of the step before the level reaches zero
        theta = np.where(cross, yi / np.where(cross, yi - yn, 1.0), 1.0)
        area[idx] += np.where(cross, 0.5 * theta * h * yi, 0.5 * h * (yi + yn))
        t[idx] += theta * h
        y[idx] = np.where(cross, 0.0, yn)
        over = ~cross & (t[idx] >= horizon)
        failed[idx[over]] = True
        idx = idx[~cross & ~over]
    return t, area, steps, refined, failed


def simulate_stopped_area(ctx, cfg: PathConfig, rng) -> StoppedAreaDraw:
    """One path of the stopped process; raises :class:`HorizonError` on timeout."""
    ctx = _ctx(ctx)
    if not (1.0 <= ctx.alpha <= 2.0):
        raise ParameterError("alpha must lie in [1, 2]")
    t, a, s, r, f = _simulate(ctx.alpha, cfg, 1, dist._gen(rng))
    if f[0]:
        raise HorizonError(f"no zero crossing before t = {cfg.horizon(ctx.alpha):.3g}")
    return StoppedAreaDraw(float(t[0]), float(a[0]), int(s[0]), bool(r[0]))


def batch_stopped_areas(ctx, cfg: PathConfig, n, rng: RngState, workers=1):
    """``n`` independent paths as a pair ``(T batch, area batch)``.

    Paths are generated in fixed chunks, chunk ``k`` drawing from the child
    stream ``rng.generator(k)``, so results do not depend on ``workers``.
    Paths that hit the horizon are dropped and counted in ``meta``; a failure
    rate above 0.1% raises :class:`HorizonError`.
    """
    ctx = _ctx(ctx)
    n = dist._check_n(n)
    sizes = [min(CHUNK, n - lo) for lo in range(0, n, CHUNK)]

    def run(k):
        return _simulate(ctx.alpha, cfg, sizes[k], rng.generator(k))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]
    t = np.concatenate([p[0] for p in parts])
    a = np.concatenate([p[1] for p in parts])
    steps = np.concatenate([p[2] for p in parts])
    failed = np.concatenate([p[4] for p in parts])
    n_fail = int(failed.sum())
    if n_fail > MAX_FAILURE_RATE * n:
        raise HorizonError(f"{n_fail} of {n} paths did not reach zero before the horizon")
    meta = {
        "dt": cfg.dt,
        "refine_threshold": cfg.refine_threshold,
        "refine_factor": cfg.refine_factor,
        "max_time": cfg.horizon(ctx.alpha),
        "y0": cfg.y0,
        "horizon_failures": n_fail,
        "mean_steps": float(steps.mean()),
    }
    params = {"alpha": ctx.alpha, "y0": cfg.y0, "dt": cfg.dt}
    tb = SampleBatch("hitting_time", params, t[~failed], rng, dict(meta))
    ab = SampleBatch("stopped_area", params, a[~failed], rng, dict(meta))
    return tb, ab


def convergence_study(ctx, dts, n, rng: RngState, reference: SampleBatch, cfg: PathConfig | None = None):
    """KS statistic of the simulated areas against ``reference`` for each dt.

    Every dt reuses the same RngState, so the runs share their random input
    as far as the differing grids allow.  Returns a list of
    ``(dt, KsReport, area batch, T batch)``.
    """
    from .stats import ks_two_sample

    base = cfg or PathConfig()
    out = []
    for dt in dts:
        c = PathConfig(dt, base.refine_threshold, base.refine_factor, base.max_time, base.y0)
        tb, ab = batch_stopped_areas(ctx, c, n, rng)
        out.append((dt, ks_two_sample(ab, reference), ab, tb))
    return out


@dataclass(frozen=True)
class DtTuning:
    """Outcome of :func:`tune_dt`: the final ladder ``(d, d/2, d/4)`` and its KS reports."""

    ladder: tuple
    reports: tuple
    area: SampleBatch
    hitting_time: SampleBatch
    history: tuple
    converged: bool


def tune_dt(ctx, n, rng: RngState, reference: SampleBatch, d0=0.32, max_halvings=10,
            significance=0.01, cfg: PathConfig | None = None,
            time_reference: SampleBatch | None = None) -> DtTuning:
    """Halve dt from ``d0`` until three successive KS statistics strictly
    decrease and the finest run passes at ``significance``.

    With ``time_reference`` the finest hitting-time batch must pass its own
    two-sample KS test as well.

    Each dt is simulated once; ``history`` lists every ``(dt, statistic,
    p_value)``.  If the budget of halvings runs out, the last three levels
    are returned with ``converged=False``.
    """
    from .stats import ks_two_sample

    base = cfg or PathConfig()
    runs = []
    dt = float(d0)
    for _ in range(max_halvings + 1):
        c = PathConfig(dt, base.refine_threshold, base.refine_factor, base.max_time, base.y0)
        tb, ab = batch_stopped_areas(ctx, c, n, rng)
        runs.append((dt, ks_two_sample(ab, reference, significance), ab, tb))
        if len(runs) >= 3:
            a, b, f = runs[-3:]
            t_ok = time_reference is None or ks_two_sample(f[3], time_reference, significance).passed
            if a[1].statistic > b[1].statistic > f[1].statistic and f[1].passed and t_ok:
                break
        dt *= 0.5
    last = runs[-3:]
    ok = (len(last) == 3 and last[0][1].statistic > last[1][1].statistic > last[2][1].statistic
          and last[2][1].passed
          and (time_reference is None or ks_two_sample(last[2][3], time_reference, significance).passed))
    hist = tuple((r[0], r[1].statistic, r[1].p_value) for r in runs)
    return DtTuning(tuple(r[0] for r in last), tuple(r[1] for r in last), last[-1][2], last[-1][3], hist, ok)
