"""Analytic transforms of probability measures.

On the line: the Cauchy transform ``G`` and its reciprocal ``F``.  On the
half-line and the circle: the moment generating function ``psi``, ``eta =
psi/(1+psi)`` and ``phi = eta/z``.  A :class:`Law` bundles these functions for
one probability law, whether it comes from a :class:`Measure` or from a
computed convolution, so that every operation accepts either.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import brentq

from ._numerics import derivative, neville
from .errors import (DomainMismatch, InversionDiverged, NotSelfMap, OutsideInversionInterval,
                     ValidationError)
from .measure import Domain, DomainPoint, DomainTag, Measure

# below this value of |z|*max(support) the half-line family transforms are
# summed over quadrature nodes instead of through G(1/z), which cancels badly
_SMALL_Z = 0.5

DOMAIN_TAGS = {
    Domain.REAL: DomainTag.UPPER_HALFPLANE,
    Domain.HALFLINE: DomainTag.SLIT_PLANE,
    Domain.CIRCLE: DomainTag.UNIT_DISK,
}

KINDS = ("G", "F", "psi", "eta", "phi")


def _as_complex(z):
    if isinstance(z, DomainPoint):
        z = z.value
    return np.asarray(z, dtype=complex)


def _out(z_in, val):
    """Return a Python complex for scalar input, an array otherwise."""
    return complex(val) if np.ndim(val) == 0 else val


class Law:
    """The analytic transforms of one probability law.

    Subclasses supply at least one primitive: ``G`` or ``F`` on the line,
    ``eta`` or ``phi`` on the half-line and circle.  The rest are derived.
    """

    domain: Domain
    point_mass: Optional[float] = None
    first_moment: Optional[complex] = None
    atoms: Optional[list] = None
    provenance: str = ""

    def __init__(self, domain, funcs: dict, *, point_mass=None, first_moment=None,
                 atoms=None, provenance=""):
        self.domain = Domain(domain)
        self._funcs = dict(funcs)
        self.point_mass = point_mass
        self.first_moment = first_moment
        self.atoms = atoms
        self.provenance = provenance

    def _call(self, name, z):
        fn = self._funcs.get(name)
        return None if fn is None else fn(z)

    # line
    def G(self, z):
        z = np.asarray(z, dtype=complex)
        v = self._call("G", z)
        if v is not None:
            return v
        if "F" in self._funcs:
            return 1 / self._funcs["F"](z)
        if self.domain is Domain.HALFLINE:
            w = 1 / z
            return w / (1 - self.eta(w))
        raise DomainMismatch(f"no Cauchy transform for a {self.domain.value} law")

    def F(self, z):
        z = np.asarray(z, dtype=complex)
        v = self._call("F", z)
        return v if v is not None else 1 / self.G(z)

    def F_minus_id(self, z):
        """``F(z) − z``; measures override this to avoid the cancellation."""
        z = np.asarray(z, dtype=complex)
        return self.F(z) - z

    # half-line and circle
    def phi(self, z):
        z = np.asarray(z, dtype=complex)
        v = self._call("phi", z)
        if v is not None:
            return v
        if "eta" not in self._funcs:
            raise DomainMismatch(f"no eta transform for a {self.domain.value} law")
        zero = z == 0
        safe = np.where(zero, 1e-8, z)
        out = self._funcs["eta"](safe) / safe
        if np.any(zero) and self.first_moment is not None:
            out = np.where(zero, self.first_moment, out)
        return out

    def eta(self, z):
        z = np.asarray(z, dtype=complex)
        v = self._call("eta", z)
        return v if v is not None else z * self.phi(z)

    def psi(self, z):
        z = np.asarray(z, dtype=complex)
        v = self._call("psi", z)
        if v is not None:
            return v
        e = self.eta(z)
        return e / (1 - e)

    def get(self, kind: str) -> Callable:
        if kind not in KINDS:
            raise ValidationError(f"unknown transform kind {kind!r}")
        return getattr(self, kind)


class MeasureLaw(Law):
    """Transforms of a :class:`Measure`, computed as finite sums plus closed forms."""

    def __init__(self, mu: Measure):
        self.measure = mu
        self.domain = mu.domain
        self._funcs = {}
        self.point_mass = mu.point_mass
        self.first_moment = mu.first_moment
        self.atoms = mu.atoms
        self.provenance = "measure"
        fam = mu.family
        # a named family contributes through its closed form, not its nodes
        self._cont = fam if fam is not None and fam.name != "haar_circle" else None
        if fam is None:
            pts = np.concatenate([mu.atom_positions, mu.nodes])
            wts = np.concatenate([mu.atom_masses, mu.weights])
        else:
            pts, wts = mu.atom_positions, mu.atom_masses
        if self.domain is Domain.CIRCLE:
            pts = np.exp(1j * pts)
        self._pts, self._wts = pts, wts
        self._bmax = float(np.max(np.abs(mu.nodes))) if len(mu.nodes) else 0.0
        # node weights of a named family normalized to a probability law
        self._fam_wts = mu.weights / mu.family_mass if fam is not None and mu.family_mass > 0 else mu.weights

    def G(self, z):
        z = np.asarray(z, dtype=complex)
        if self.domain is Domain.CIRCLE:
            raise DomainMismatch("circle measures have no Cauchy transform here")
        out = (1 / (z[..., None] - self._pts)) @ self._wts
        if self._cont is not None:
            out = out + self.measure.family_mass * self._cont.cauchy(z)
        return out

    def F(self, z):
        z = np.asarray(z, dtype=complex)
        a = self.point_mass
        if a is not None:
            return z - a
        return 1 / self.G(z)

    def F_minus_id(self, z):
        """``F(z) − z = −(zG(z) − 1)/G(z)`` with ``zG − 1 = ∫ t dμ(t)/(z − t)`` summed directly."""
        z = np.asarray(z, dtype=complex)
        if self.domain is Domain.CIRCLE:
            raise DomainMismatch("circle measures have no Cauchy transform here")
        a = self.point_mass
        if a is not None:
            return np.full(z.shape, -a, dtype=complex)
        inv = 1 / (z[..., None] - self._pts)
        g = inv @ self._wts
        m1 = (self._pts * inv) @ self._wts
        if self._cont is not None:
            mu, fam = self.measure, self._cont
            lo, hi = fam.support
            mid, half = (lo + hi) / 2, (hi - lo) / 2
            cg = np.empty(z.shape, dtype=complex)
            cm = np.empty(z.shape, dtype=complex)
            far = np.abs(z - mid) > 2 * half
            if np.any(far):
                inv_n = 1 / (z[far][..., None] - mu.nodes)
                cg[far] = inv_n @ self._fam_wts
                cm[far] = (mu.nodes * inv_n) @ self._fam_wts
            near = ~far
            if np.any(near):
                zn = z[near]
                gn = fam.cauchy(zn)
                cg[near] = gn
                cm[near] = (zn - mid) * gn - 1 + mid * gn
            g = g + mu.family_mass * cg
            m1 = m1 + mu.family_mass * cm
        return -m1 / g

    def _chi_and_one_plus_psi(self, z):
        """``ψ(z)/z`` and ``1 + ψ(z) = ∫ dμ(t)/(1 − zt)``.

        The second is summed directly rather than formed as ``1 + zχ``, which
        cancels badly for large ``|z|`` when little mass sits at 0.
        """
        if self.domain is Domain.REAL:
            raise DomainMismatch("psi and eta are defined for half-line and circle measures")
        t = self._pts
        inv = 1 / (1 - z[..., None] * t)
        chi = (t * inv) @ self._wts
        one = inv @ self._wts
        mu = self.measure
        if self._cont is None:
            if mu.family is not None:
                # Haar part: ∫ dθ/(2π(1 − ze^{iθ})) = 1 and it adds nothing to χ
                one = one + mu.family_mass
            return chi, one
        small = np.abs(z) * self._bmax < _SMALL_Z
        c_chi = np.empty(z.shape, dtype=complex)
        c_one = np.empty(z.shape, dtype=complex)
        if np.any(small):
            tn = mu.nodes
            inv_n = 1 / (1 - z[small][..., None] * tn)
            c_chi[small] = (tn * inv_n) @ self._fam_wts
            c_one[small] = inv_n @ self._fam_wts
        big = ~small
        if np.any(big):
            zb = z[big]
            g = self._cont.cauchy(1 / zb) / zb
            c_chi[big] = (g - 1) / zb
            c_one[big] = g
        fm = mu.family_mass
        return chi + fm * c_chi, one + fm * c_one

    def chi(self, z):
        """``psi(z)/z``, the building block of psi, eta and phi."""
        z = np.asarray(z, dtype=complex)
        return self._chi_and_one_plus_psi(z)[0]

    def psi(self, z):
        z = np.asarray(z, dtype=complex)
        return z * self.chi(z)

    def phi(self, z):
        z = np.asarray(z, dtype=complex)
        c, one = self._chi_and_one_plus_psi(z)
        return c / one

    def eta(self, z):
        z = np.asarray(z, dtype=complex)
        return z * self.phi(z)


@dataclass(frozen=True)
class TransformHandle:
    """An evaluable analytic transform on a tagged domain.

    ``law`` gives access to the sibling transforms of the same probability law.
    """

    kind: str
    evaluate: Callable = field(repr=False)
    domain_tag: DomainTag
    provenance: str = ""
    law: Optional[Law] = field(default=None, repr=False, compare=False)

    def __call__(self, z):
        z = _as_complex(z)
        return _out(z, self.evaluate(z))

    def sibling(self, kind: str) -> "TransformHandle":
        if self.law is None:
            raise ValidationError("handle carries no law")
        return make_handle(self.law, kind, self.provenance)


LawLike = Union[Measure, TransformHandle, Law]


def law_of(obj: LawLike) -> Law:
    if isinstance(obj, Law):
        return obj
    if isinstance(obj, Measure):
        return MeasureLaw(obj)
    if isinstance(obj, TransformHandle):
        if obj.law is not None:
            return obj.law
        tag = obj.domain_tag
        dom = {DomainTag.UPPER_HALFPLANE: Domain.REAL, DomainTag.SLIT_PLANE: Domain.HALFLINE,
               DomainTag.UNIT_DISK: Domain.CIRCLE}.get(tag)
        if dom is None or obj.kind not in KINDS:
            raise ValidationError(f"cannot interpret a {obj.kind} handle on {tag.value}")
        return Law(dom, {obj.kind: obj.evaluate}, provenance=obj.provenance)
    raise ValidationError(f"expected a Measure or TransformHandle, got {type(obj).__name__}")


def make_handle(obj: LawLike, kind: str, provenance: str = "") -> TransformHandle:
    law = law_of(obj)
    fn = law.get(kind)
    return TransformHandle(kind, fn, DOMAIN_TAGS[law.domain], provenance or law.provenance, law)


def _need(mu: LawLike, *domains: Domain) -> Law:
    law = law_of(mu)
    if law.domain not in domains:
        raise DomainMismatch(f"operation needs a {'/'.join(d.value for d in domains)} law, "
                             f"got {law.domain.value}")
    return law


def eval_G(mu: LawLike, z):
    """Cauchy transform ``∫ dμ(t)/(z−t)``; lower half-plane by reflection."""
    z = _as_complex(z)
    return _out(z, _need(mu, Domain.REAL, Domain.HALFLINE).G(z))


def eval_F(mu: LawLike, z):
    z = _as_complex(z)
    return _out(z, _need(mu, Domain.REAL, Domain.HALFLINE).F(z))


def eval_psi(mu: LawLike, z):
    """``∫ zt/(1−zt) dμ(t)``, with ``t = e^{iθ}`` for circle measures."""
    z = _as_complex(z)
    return _out(z, _need(mu, Domain.HALFLINE, Domain.CIRCLE).psi(z))


def eval_eta(mu: LawLike, z):
    z = _as_complex(z)
    return _out(z, _need(mu, Domain.HALFLINE, Domain.CIRCLE).eta(z))


def eval_phi(mu: LawLike, z):
    """``eta(z)/z``, evaluated without cancellation near 0."""
    z = _as_complex(z)
    return _out(z, _need(mu, Domain.HALFLINE, Domain.CIRCLE).phi(z))


def infinity_limit(fn: Callable, y0: float = 1e3, n: int = 7):
    """Richardson limit of ``fn(iy)`` as ``y → ∞`` along ``y = y0·2^k``."""
    y = y0 * 2.0 ** np.arange(n)
    vals = np.array([complex(fn(1j * yy)) for yy in y])
    return complex(neville(1 / y[-3:], vals[-3:]))


def nevanlinna_read(F: Union[TransformHandle, Callable], y0: float = 1e3):
    """Read ``(a, b, ρ(ℝ))`` from ``F(z) = a + bz + ∫(1+tz)/(t−z) dρ(t)``."""
    Fi = complex(F(1j))
    if Fi.imag <= 0:
        raise NotSelfMap(f"Im F(i) = {Fi.imag} is not positive")
    b = infinity_limit(lambda z: F(z) / z, y0).real
    return Fi.real, b, Fi.imag - b


def voiculescu_phi(mu: LawLike, z, max_iter: int = 200, tol: float = 1e-12):
    """``F⁻¹(z) − z`` by damped Newton seeded at ``z``.

    Iterates until the residual ``|F(w) − z|`` stops improving and accepts the
    result when it is below ``tol``.
    """
    law = _need(mu, Domain.REAL)
    z = complex(_as_complex(z))
    if law.point_mass is not None:
        return complex(law.point_mass)
    F = lambda w: complex(law.F(w))
    w = z
    r = F(w) - z
    floor = 4 * np.finfo(float).eps * max(1.0, abs(z))
    for _ in range(max_iter):
        if abs(r) <= floor:
            break
        step = r / complex(derivative(law.F, w))
        lam = 1.0
        while lam > 1e-6:
            cand = w - lam * step
            if cand.imag > 0:
                rc = F(cand) - z
                if abs(rc) < abs(r):
                    w, r = cand, rc
                    break
            lam /= 2
        else:
            break
    if abs(r) <= tol * max(1.0, abs(z)):
        return w - z
    raise InversionDiverged(f"no convergence inverting F at {z} (residual {abs(r):.2e})")


def sigma_transform(mu: LawLike, z: float, xtol: float = 1e-300) -> float:
    """``η⁻¹(z)/z`` for a half-line law and real ``z < 0``."""
    law = _need(mu, Domain.HALFLINE)
    z = float(np.real(_as_complex(z)))
    if not z < 0:
        raise OutsideInversionInterval("the Σ-transform is taken at negative reals")
    if law.point_mass is not None:
        if law.point_mass == 0:
            raise OutsideInversionInterval("η vanishes identically for δ₀")
        return 1 / law.point_mass
    eta = lambda x: float(np.real(law.eta(complex(x)))) - z
    lo = -1.0
    while eta(lo) >= 0:
        lo *= 2
        if lo < -1e15:
            raise OutsideInversionInterval(f"{z} is not in η((−∞, 0))")
    w = brentq(eta, lo, 0.0, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
    return w / z
