"""Denjoy-Wolff fixed points and the global inversion solvers built on them.

The engine :func:`fixed_points` iterates a family of self-maps ``f(·, p)``
for an array of parameters ``p`` at once.  Plain iteration converges to the
Denjoy-Wolff point from any interior seed; once the residual is small the
solver switches to safeguarded Newton steps.  Since a self-map that is not an
automorphism has at most one interior fixed point, any interior fixed point
found this way is the Denjoy-Wolff point, which is what makes warm starts
(:func:`continued`) safe.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._numerics import derivative
from .errors import MaxIterations, NotAdmissible, SolverFailure
from .measure import DomainTag, contains

DISK_SEED = 0.3 + 0.3j
HALFPLANE_SEED = 1j
STRIP_SEED = 0.0 + 0.0j  # the lift of -1

ESCAPE_RADIUS = 1e12
BOUNDARY_GAP = 1e-12
ESCAPE_STEPS = 20


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-13
    max_iterations: int = 10_000
    newton_switch_radius: float = 1e-3
    # accepted when the residual has stopped improving (rounding noise floor)
    stall_tolerance: float = 1e-9
    stall_iterations: int = 100

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class FixedPointResult:
    """Outcome of a Denjoy-Wolff solve.

    For ``kind == "boundary"`` the location is the diagnosed boundary point:
    a real number or ``inf`` for the half-plane, a unit complex number for the disk.
    """

    location: complex
    kind: str
    iterations: int
    residual: float


def _inside_fn(domain):
    if callable(domain):
        return domain
    tag = DomainTag(domain)
    return lambda w: contains(tag, w)


def fixed_points(f: Callable, params, seed, domain, cfg: SolverConfig = DEFAULT_CONFIG):
    """Fixed points of ``w -> f(w, p)`` for every parameter ``p`` in ``params``.

    ``domain`` is a :class:`DomainTag` or a membership predicate.  Returns
    ``(w, residual, iterations)`` arrays; entries that did not converge carry
    ``nan`` in ``w``.
    """
    params = np.asarray(params)
    shape = params.shape
    p = params.ravel()
    w = np.broadcast_to(np.asarray(seed, dtype=complex), shape).ravel().copy()
    inside = _inside_fn(domain)
    n = p.size
    res = np.full(n, np.inf)
    its = np.zeros(n, dtype=int)
    active = np.arange(n)
    fw = f(w, p)
    out = np.full(n, np.nan + 0j)
    best_r = np.full(n, np.inf)
    best_w = np.full(n, np.nan + 0j)
    stall = np.zeros(n, dtype=int)
    for it in range(1, cfg.max_iterations + 1):
        if active.size == 0:
            break
        wa, fa, pa = w[active], fw[active], p[active]
        r = np.abs(fa - wa)
        ok = np.isfinite(r)
        scale = np.maximum(1.0, np.abs(fa))
        gain = ok & (r < best_r[active])
        stall[active] = np.where(gain, 0, stall[active] + 1)
        best_r[active[gain]], best_w[active[gain]] = r[gain], fa[gain]
        done = ok & (r <= cfg.tolerance * scale)
        stuck = ok & ~done & (stall[active] >= cfg.stall_iterations) & \
            (best_r[active] <= cfg.stall_tolerance * scale)
        idx = active[done]
        out[idx], res[idx], its[idx] = fa[done], r[done], it
        idx = active[stuck]
        out[idx], res[idx], its[idx] = best_w[idx], best_r[idx], it
        done = done | stuck
        keep = ok & ~done
        active, wa, fa, pa, r = active[keep], wa[keep], fa[keep], pa[keep], r[keep]
        if active.size == 0:
            break
        nxt = fa.copy()
        near = r < cfg.newton_switch_radius
        if np.any(near):
            wn, pn = wa[near], pa[near]
            d = derivative(lambda u: f(u, pn), wn)
            cand = wn - (fa[near] - wn) / (d - 1)
            good = np.isfinite(cand) & inside(cand)
            fc = np.full(cand.shape, np.nan + 0j)
            if np.any(good):
                fc[good] = f(cand[good], pn[good])
            better = good & (np.abs(fc - cand) < r[near])
            sub = np.flatnonzero(near)[better]
            nxt[sub] = cand[better]
            fnext = f(nxt, pa)
            fnext[sub] = fc[better]
        else:
            fnext = f(nxt, pa)
        w[active] = nxt
        fw[active] = fnext
    its[active] = cfg.max_iterations
    if active.size:
        res[active] = np.abs(fw[active] - w[active])
    return out.reshape(shape), res.reshape(shape), its.reshape(shape)


def continued(solve: Callable, z, floor: float = 0.05, metric: str = "halfplane"):
    """Solve at points close to the boundary by approaching it gradually.

    ``solve(z, seed)`` returns the fixed points for the parameters ``z``;
    ``seed`` is ``None`` for a cold start.  The distance to the boundary is
    ``|Im z|`` (``metric="halfplane"``) or ``1 − |z|`` (``metric="disk"``).
    Points at distance ``>= floor`` are solved directly; the others are reached
    through distances ``floor, floor/2, …`` along the normal direction, each
    level seeded with the previous solution.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    if metric == "disk":
        dist = 1 - np.abs(z)
        unit = np.where(z == 0, 1, z / np.where(z == 0, 1, np.abs(z)))
        place = lambda i, d: unit[i] * (1 - d)
    else:
        dist = np.abs(z.imag)
        sign = np.where(z.imag < 0, -1.0, 1.0)
        place = lambda i, d: z[i].real + 1j * sign[i] * d
    low = (dist < floor) & (dist > 0)
    out = np.empty(z.shape, dtype=complex)
    high = ~low
    if np.any(high):
        out[high] = solve(z[high], None)
    if np.any(low):
        idx = np.flatnonzero(low)
        h = np.full(idx.size, floor)
        seed = None
        while idx.size:
            fin = h <= dist[idx]
            zk = np.where(fin, z[idx], place(idx, h))
            wk = solve(zk, seed)
            out[idx[fin]] = wk[fin]
            idx, h, seed = idx[~fin], h[~fin] / 2, wk[~fin]
    return out.reshape(shape)


def _diagnose(f, seed, domain_tag, cfg):
    """Scalar iteration with escape diagnosis."""
    tag = DomainTag(domain_tag)
    w = complex(seed)
    streak = 0
    mags = []
    for it in range(1, cfg.max_iterations + 1):
        fw = complex(f(w))
        if not np.isfinite(fw):
            raise SolverFailure(f"map is not finite at {w}")
        r = abs(fw - w)
        if r <= cfg.tolerance * max(1.0, abs(fw)):
            return FixedPointResult(fw, "interior", it, r)
        if r < cfg.newton_switch_radius:
            d = complex(derivative(f, w))
            cand = w - (fw - w) / (d - 1)
            if np.isfinite(cand) and contains(tag, cand):
                fc = complex(f(cand))
                if abs(fc - cand) < r:
                    fw = cand
        w = fw
        mags.append(abs(w))
        if tag is DomainTag.UNIT_DISK:
            near = 1 - abs(w) < BOUNDARY_GAP
        elif tag is DomainTag.UPPER_HALFPLANE:
            near = abs(w) > ESCAPE_RADIUS or w.imag < BOUNDARY_GAP
        else:
            near = abs(w) > ESCAPE_RADIUS
        streak = streak + 1 if near else 0
        if streak >= ESCAPE_STEPS:
            return FixedPointResult(_boundary_point(w, tag), "boundary", it, r)
    mags = np.array(mags)
    half = mags[len(mags) // 2:]
    if tag is not DomainTag.UNIT_DISK and np.all(np.diff(half) >= 0) \
            and half[-1] > 10 * max(1.0, abs(seed)):
        return FixedPointResult(complex(np.inf), "boundary", cfg.max_iterations, r)
    raise MaxIterations(f"no convergence after {cfg.max_iterations} iterations (residual {r:.2e})")


def _boundary_point(w: complex, tag: DomainTag) -> complex:
    if tag is DomainTag.UNIT_DISK:
        return w / abs(w)
    if abs(w) > ESCAPE_RADIUS:
        return complex(np.inf)
    return complex(w.real)


def denjoy_wolff(f: Callable, domain_tag=DomainTag.UPPER_HALFPLANE,
                 cfg: SolverConfig = DEFAULT_CONFIG, seed: Optional[complex] = None
                 ) -> FixedPointResult:
    """Denjoy-Wolff point of an analytic self-map of the half-plane or the disk.

    >>> denjoy_wolff(lambda w: w / 2 + 1j).location
    2j
    """
    tag = DomainTag(domain_tag)
    if seed is None:
        seed = {DomainTag.UNIT_DISK: DISK_SEED, DomainTag.STRIP: STRIP_SEED}.get(tag, HALFPLANE_SEED)
    return _diagnose(f, seed, tag, cfg)


_HALFPLANE_SAMPLE = np.array([1j, 2j, 10j, 0.5 + 0.1j, -0.5 + 0.1j, 3 + 0.5j, -3 + 0.5j,
                              1 + 1j, -1 + 1j, 20 + 5j, -20 + 5j, 0.1 + 0.01j])
_DISK_SAMPLE = np.array([0.1, -0.1j, 0.5 + 0.2j, -0.4 - 0.4j, 0.8j, -0.9, 0.7 - 0.6j,
                         0.95, -0.3 + 0.9j, 0.05 + 0.05j])


def check_halfplane_admissible(H: Callable) -> float:
    """Sample the inversion hypotheses and return the slope ``lim H(iy)/(iy)``."""
    hz = np.asarray(H(_HALFPLANE_SAMPLE))
    slack = 1e-10 * (1 + np.abs(_HALFPLANE_SAMPLE))
    if np.any(hz.imag > _HALFPLANE_SAMPLE.imag + slack):
        raise NotAdmissible("Im H(z) exceeds Im z at a sample point")
    y = 1e8
    a = (complex(H(1j * y)) / (1j * y)).real
    if not a > 0:
        raise NotAdmissible("H(iy)/(iy) does not tend to a positive limit")
    return a


def invert_halfplane(H: Callable, alpha, cfg: SolverConfig = DEFAULT_CONFIG, *,
                     check: bool = True, seed=None):
    """Right inverse ``ω`` of ``H`` at ``alpha``, via ``g(w) = w + α − H(w)``."""
    if check:
        check_halfplane_admissible(H)
    alpha = np.asarray(alpha, dtype=complex)
    scalar = alpha.ndim == 0
    if np.any(alpha.imag < 0):
        raise NotAdmissible("alpha must lie in the closed upper half-plane")
    g = lambda w, a: w + a - H(w)
    s = HALFPLANE_SEED if seed is None else seed
    w, res, _ = fixed_points(g, alpha, s, DomainTag.UPPER_HALFPLANE, cfg)
    if np.any(np.isnan(w)):
        raise MaxIterations("half-plane inversion did not converge")
    return complex(w) if scalar else w


def check_disk_admissible(Phi: Callable) -> None:
    if abs(complex(Phi(0.0))) > 1e-12:
        raise NotAdmissible("Φ(0) must vanish")
    v = np.asarray(Phi(_DISK_SAMPLE))
    if np.any(np.abs(v) < np.abs(_DISK_SAMPLE) * (1 - 1e-12)):
        raise NotAdmissible("|Φ(z)| < |z| at a sample point")


def invert_disk(Phi: Callable, alpha, cfg: SolverConfig = DEFAULT_CONFIG, *,
                ratio: Optional[Callable] = None, check: bool = True, seed=None):
    """Right inverse ``ω`` of ``Φ`` on the disk, via ``g(w) = α w / Φ(w)``.

    ``ratio`` may supply ``w/Φ(w)`` directly, avoiding the quotient at 0.
    """
    if check:
        check_disk_admissible(Phi)
    alpha = np.asarray(alpha, dtype=complex)
    scalar = alpha.ndim == 0
    if np.any(np.abs(alpha) > 1):
        raise NotAdmissible("alpha must lie in the closed unit disk")
    q = ratio if ratio is not None else (lambda w: w / Phi(w))
    out = np.zeros(alpha.shape, dtype=complex)
    nz = alpha != 0
    if np.any(nz):
        g = lambda w, a: a * q(w)
        s = DISK_SEED if seed is None else np.broadcast_to(np.asarray(seed, dtype=complex), alpha.shape)[nz]
        w, _, _ = fixed_points(g, alpha[nz], s, DomainTag.UNIT_DISK, cfg)
        if np.any(np.isnan(w)):
            raise MaxIterations("disk inversion did not converge")
        out[nz] = w
    return complex(out) if scalar else out


def strip_lift(Phi: Callable) -> Callable:
    """``f = v∘Φ∘u`` with ``u(ζ) = −e^ζ`` and ``v(z) = Log(−z)``."""
    return lambda zeta: np.log(-np.asarray(Phi(-np.exp(zeta)), dtype=complex))


_STRIP_SAMPLE = np.array([0.5j, 1j, 2j, 3j, -2 + 1j, 2 + 1j, -5 + 0.5j, 5 + 2.5j, 0.1j, 1 + 3.1j])


def estimate_strip_k(f: Callable) -> float:
    fz = np.asarray(f(_STRIP_SAMPLE))
    ratio = fz.imag / _STRIP_SAMPLE.imag
    if np.any(ratio < 1 - 1e-9):
        raise NotAdmissible("Im f(ζ) < Im ζ at a sample point")
    return max(1.0 + 1e-6, float(ratio.max()) * 1.1)


def invert_slitplane(Phi: Callable, alpha, cfg: SolverConfig = DEFAULT_CONFIG, *,
                     k: Optional[float] = None, lift: Optional[Callable] = None,
                     check: bool = True, seed=None):
    """Right inverse of ``Φ`` on ``ℂ∖[0,+∞)``, solved on the strip ``|Im ζ| < π``.

    The strip map ``f`` is ``lift`` if given, else the principal-log lift of
    ``Φ``; the iterate is ``g(ζ) = ζ − τ(f(ζ) − Log(−α))`` with ``τ = π/(k+π)``.
    ``seed`` is in strip coordinates.
    """
    f = lift if lift is not None else strip_lift(Phi)
    if check:
        fz = np.asarray(f(_STRIP_SAMPLE))
        ratio = fz.imag / _STRIP_SAMPLE.imag
        bound = k if k is not None else np.inf
        if np.any(ratio < 1 - 1e-9) or np.any(ratio > bound * (1 + 1e-9)):
            raise NotAdmissible("strip lift violates Im ζ ≤ Im f(ζ) ≤ k Im ζ")
        if abs(complex(f(-1.0)).imag) > 1e-12:
            raise NotAdmissible("Φ must map the negative axis into itself")
    if k is None:
        k = estimate_strip_k(f)
    alpha = np.asarray(alpha, dtype=complex)
    scalar = alpha.ndim == 0
    if np.any(~contains(DomainTag.SLIT_PLANE, alpha)):
        raise NotAdmissible("alpha must lie off [0, +∞)")
    tau = np.pi / (k + np.pi)
    va = np.log(-alpha)
    g = lambda z, a: z - tau * (f(z) - a)
    s = STRIP_SEED if seed is None else seed
    zeta, _, _ = fixed_points(g, va, s, DomainTag.STRIP, cfg)
    if np.any(np.isnan(zeta)):
        raise MaxIterations("strip inversion did not converge")
    w = -np.exp(zeta)
    return complex(w) if scalar else w
