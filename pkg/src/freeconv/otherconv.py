"""Boolean and monotone convolutions, and the Abel-function estimator.

These convolutions are explicit at the level of transforms:

* boolean, additive:        ``F_{μ⊎ν}(z) = F_μ(z) + F_ν(z) − z``
* boolean, circle:          ``z η(z) = η_μ(z) η_ν(z)``
* monotone, additive:       ``F_{μ▷ν} = F_μ ∘ F_ν``
* monotone, half-line:      ``η_{μ↻ν} = η_μ ∘ η_ν``
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergent, ValidationError
from .measure import TWO_PI, Domain, DomainPoint
from .transforms import Law, LawLike, TransformHandle, law_of, make_handle
from .free import _require

ORBIT_NEWTON_STEPS = 30


@dataclass(frozen=True)
class AbelEstimate:
    value: complex
    n_used: int
    residual: float
    q_modulus: float


def _pm_sum(a, b, circle=False):
    if a is None or b is None:
        return None
    return (a + b) % TWO_PI if circle else a + b


def boolean_add(mu: LawLike, nu: LawLike) -> TransformHandle:
    """``F``-handle of the additive boolean convolution."""
    lm, ln = _require(mu, Domain.REAL), _require(nu, Domain.REAL)
    F = lambda z: lm.F(z) + ln.F(z) - np.asarray(z, dtype=complex)
    law = Law(Domain.REAL, {"F": F}, point_mass=_pm_sum(lm.point_mass, ln.point_mass),
              provenance="boolean additive convolution")
    return make_handle(law, "F")


def boolean_mult_circle(mu: LawLike, nu: LawLike) -> TransformHandle:
    """``η``-handle of the multiplicative boolean convolution on the circle."""
    lm, ln = _require(mu, Domain.CIRCLE), _require(nu, Domain.CIRCLE)
    phi = lambda z: lm.phi(z) * ln.phi(z)
    fm = None
    if lm.first_moment is not None and ln.first_moment is not None:
        fm = lm.first_moment * ln.first_moment
    law = Law(Domain.CIRCLE, {"phi": phi}, first_moment=fm,
              point_mass=_pm_sum(lm.point_mass, ln.point_mass, circle=True),
              provenance="boolean multiplicative convolution (circle)")
    return make_handle(law, "eta")


def monotone_add(mu: LawLike, nu: LawLike) -> TransformHandle:
    """``F``-handle of the additive monotone convolution; the order matters."""
    lm, ln = _require(mu, Domain.REAL), _require(nu, Domain.REAL)
    F = lambda z: lm.F(ln.F(z))
    law = Law(Domain.REAL, {"F": F}, point_mass=_pm_sum(lm.point_mass, ln.point_mass),
              provenance="monotone additive convolution")
    return make_handle(law, "F")


def monotone_mult_halfline(mu: LawLike, nu: LawLike) -> TransformHandle:
    """``η``-handle of the multiplicative monotone convolution on ``[0, +∞)``."""
    lm, ln = _require(mu, Domain.HALFLINE), _require(nu, Domain.HALFLINE)

    def phi(z):
        z = np.asarray(z, dtype=complex)
        return lm.phi(ln.eta(z)) * ln.phi(z)

    pm = None
    if lm.point_mass is not None and ln.point_mass is not None:
        pm = lm.point_mass * ln.point_mass
    fm = None
    if lm.first_moment is not None and ln.first_moment is not None:
        fm = lm.first_moment * ln.first_moment
    law = Law(Domain.HALFLINE, {"phi": phi}, point_mass=pm, first_moment=fm,
              provenance="monotone multiplicative convolution (half-line)")
    return make_handle(law, "eta")


def _orbit_index(w, zs, order: int):
    """Fractional orbit index ``s`` with ``P(s) = w``, ``P`` interpolating ``zs`` at 0, 1, ….

    ``order = 1`` is the plain quotient ``(w − z_n)/(z_{n+1} − z_n)``; higher
    orders use Newton forward differences and refine ``s`` by Newton steps.
    """
    d1 = zs[1] - zs[0]
    s = (w - zs[0]) / d1
    if order == 1:
        return s
    d2 = zs[2] - 2 * zs[1] + zs[0]
    d3 = zs[3] - 3 * zs[2] + 3 * zs[1] - zs[0] if order == 3 else 0.0
    for _ in range(ORBIT_NEWTON_STEPS):
        p = zs[0] + s * d1 + s * (s - 1) / 2 * d2 + s * (s - 1) * (s - 2) / 6 * d3 - w
        dp = d1 + (2 * s - 1) / 2 * d2 + (3 * s * s - 6 * s + 2) / 6 * d3
        step = p / dp
        s = s - step
        if np.all(np.abs(step) < 1e-15 * np.maximum(1.0, np.abs(s))):
            break
    return s


def abel_estimate(F, z, n_max: int = 2_000_000, *, residual_tol: float = 8e-7,
                  step_tol: float = 1e-8, check_every: int = 16, order: int = 3) -> AbelEstimate:
    """Approximate the Abel function ``h`` with ``h(F(z)) = h(z) + 1``.

    ``F`` is a self-map of the upper half-plane (a handle, law, measure or
    plain callable).  It is moved to the right half-plane by ``f(ζ) = −iF(iζ)``
    and ``h_n(ζ) = (fⁿ(ζ) − z_n)/(z_{n+1} − z_n)`` is formed along the orbit
    ``z_n = fⁿ(1)``.  With ``order`` 2 or 3 the quotient is replaced by inverse
    polynomial interpolation of ``fⁿ(ζ)`` through ``z_n, …, z_{n+order}``,
    which has the same limit but converges much faster along parabolic
    orbits.  Iteration stops once successive values move by less than
    ``step_tol`` and the Abel residual is below ``residual_tol``, or at
    ``n_max``.  ``z`` may be an array of probe points; the estimate then
    carries arrays.
    """
    if order not in (1, 2, 3):
        raise ValidationError("order must be 1, 2 or 3")
    if isinstance(F, (TransformHandle, Law)) or not callable(F):
        law = law_of(F)
        Fc = law.F
    else:
        Fc = F
    if isinstance(z, DomainPoint):
        z = z.value
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValidationError("probe points must lie in the upper half-plane")
    f = lambda s: -1j * Fc(1j * s)
    zeta = (-1j * z).ravel()
    m = zeta.size
    # tracked orbits: base point 1, the probes, and their images
    state = np.concatenate([[1.0 + 0j], zeta, f(zeta)])
    nxt = f(state)
    prev_h = None
    n = 0
    with np.errstate(all="ignore"):
        while True:
            n += 1
            cur = nxt
            nxt = f(cur)
            if n % check_every and n < n_max:
                continue
            if not np.all(np.isfinite(nxt)):
                raise NonConvergent(f"orbit left the finite plane after {n} steps")
            zs = [cur[0], nxt[0]]
            while len(zs) < 4:
                zs.append(complex(np.ravel(f(np.array([zs[-1]])))[0]))
            h = _orbit_index(cur[1:1 + m], zs, order)
            h_img = _orbit_index(cur[1 + m:], zs, order)
            res = np.abs(h_img - h - 1)
            moved = np.inf if prev_h is None else np.max(np.abs(h - prev_h)) / check_every
            prev_h = h
            if (moved < step_tol and np.max(res) < residual_tol) or n >= n_max:
                break
    if not np.all(np.isfinite(h)):
        raise NonConvergent("Abel estimates are not finite")
    d = nxt[0] - cur[0]
    q = abs(d / (nxt[0] + np.conj(cur[0])))
    shape = z.shape
    value = h.reshape(shape)
    residual = res.reshape(shape)
    if value.ndim == 0:
        return AbelEstimate(complex(value), n, float(residual), float(q))
    return AbelEstimate(value, n, residual, float(q))
