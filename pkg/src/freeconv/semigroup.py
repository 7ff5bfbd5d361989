"""Fractional free convolution powers and the boolean-to-free maps ``Ψ_t``.

Additive powers invert ``H_t(z) = tz + (1−t)F_μ(z)`` on the upper half-plane:
with ``ω_t = H_t⁻¹`` one has ``F_{μ_t} = (tω_t − z)/(t − 1)``.  Multiplicative
powers invert ``Φ_t(z) = z·φ_μ(z)^{1−t}`` (``φ = η/z``), on the disk for
circle laws and through the strip ``|Im ζ| < π`` for half-line laws, and set
``η_{μ_t} = η_μ∘ω_t``.  The same right inverses give ``Ψ_t``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._numerics import radial_log, winding_number
from .dwolff import DEFAULT_CONFIG, DISK_SEED, STRIP_SEED, SolverConfig, continued, fixed_points
from .errors import BadExponent, ValidationError, DeltaZero, NotBooleanInfDiv, ZeroFirstMoment, ZeroOfEta
from .free import (CONTINUATION_FLOOR, AtomReport, AtomRule, _check_solution, _Memo, _reflect,
                   _require, _safe_div, free_mult_circle)
from .measure import TWO_PI, Domain, DomainTag
from .transforms import DOMAIN_TAGS, Law, LawLike, TransformHandle, make_handle

MIN_EXPONENT_GAP = 1e-6
RADIAL_STEPS = 32
ZERO_MOMENT = 1e-14


@dataclass(frozen=True)
class PowerResult:
    t: float
    omega_t: TransformHandle
    transformed: TransformHandle
    branch_note: str = ""
    residual_probe: Optional[Callable] = field(default=None, repr=False, compare=False)

    @property
    def law(self) -> Law:
        return self.transformed.law


def _check_t(t: float, strict: bool = False) -> float:
    t = float(t)
    if not np.isfinite(t) or t < 1 or (strict and t == 1):
        raise BadExponent(f"exponent must be {'>' if strict else '>='} 1, got {t}")
    if 1 < t < 1 + MIN_EXPONENT_GAP:
        raise BadExponent(f"exponent {t} is too close to 1")
    return t


def _identity(law: Law, kind: str, t: float) -> PowerResult:
    ident = lambda z: np.asarray(z, dtype=complex)
    tag = DOMAIN_TAGS[law.domain]
    return PowerResult(t, TransformHandle("composed", ident, tag, "identity", None),
                       make_handle(law, kind), "t = 1: identity", _zero_residual)


def _zero_residual(z):
    return np.zeros(np.shape(z))


# additive

def _additive_omega(lm: Law, t: float, cfg: SolverConfig):
    """Vectorized right inverse of ``H_t`` on the upper half-plane."""
    a = lm.point_mass
    if a is not None:
        return lambda z: np.asarray(z, dtype=complex) + (1 - t) * a
    # w + α − H_t(w) with H_t(w) = w + (1 − t)(F(w) − w)
    g = lambda w, alpha: alpha + (t - 1) * lm.F_minus_id(w)

    def cold_or_warm(alpha, seed):
        w, _, _ = fixed_points(g, alpha, alpha if seed is None else seed,
                               DomainTag.UPPER_HALFPLANE, cfg)
        return _check_solution(w, alpha, "half-plane inversion")

    return _Memo(_reflect(lambda z: continued(cold_or_warm, z, CONTINUATION_FLOOR)))


def free_add_power(mu: LawLike, t: float, cfg: SolverConfig = DEFAULT_CONFIG) -> PowerResult:
    """``μ^{⊞t}`` for real ``t >= 1``."""
    lm = _require(mu, Domain.REAL)
    t = _check_t(t)
    if t == 1:
        return _identity(lm, "F", t)
    omega = _additive_omega(lm, t, cfg)
    F = lambda z: (t * omega(z) - np.asarray(z, dtype=complex)) / (t - 1)
    pm = None if lm.point_mass is None else t * lm.point_mass
    atoms = None
    if lm.atoms is not None:
        atoms = [(x, m) for x, m, _ in atoms_add_power(lm, t).entries]
    law = Law(Domain.REAL, {"F": F}, point_mass=pm, atoms=atoms,
              provenance=f"free additive power t={t:g}")
    tag = DomainTag.UPPER_HALFPLANE
    resid = lambda z: np.abs(omega(z) + (1 - t) * lm.F_minus_id(omega(z)) - np.asarray(z, dtype=complex))
    return PowerResult(t, TransformHandle("composed", omega, tag, "omega_t", None),
                       make_handle(law, "F"), "", resid)


def atoms_add_power(mu: LawLike, t: float) -> AtomReport:
    """Atoms of ``μ^{⊞t}``: ``tp`` with mass ``tμ({p}) − (t−1)`` when ``μ({p}) > (t−1)/t``."""
    lm = _require(mu, Domain.REAL)
    t = _check_t(t)
    return AtomReport([(t * p, t * m - (t - 1), AtomRule.POWER)
                       for p, m in _atoms(lm) if m > (t - 1) / t])


def _atoms(law: Law):
    if law.atoms is None:
        raise ValidationError("atoms of this law are not known")
    return list(law.atoms)


# circle

def _circle_log_phi(lm: Law):
    """Continuous ``Log φ`` on the disk, anchored at the principal log of the first moment."""
    m = lm.first_moment if lm.first_moment is not None else complex(lm.phi(0.0))
    anchor = np.log(complex(m))

    def logphi(w):
        w = np.asarray(w, dtype=complex)
        return radial_log(lm.phi, w, anchor, RADIAL_STEPS)

    return anchor, logphi


def _phi_power(lm: Law, e: float):
    """``w -> φ(w)^e`` on the disk with the anchored branch."""
    if float(e).is_integer():
        k = int(e)
        return lambda w: lm.phi(w) ** k
    _, logphi = _circle_log_phi(lm)
    return lambda w: np.exp(e * logphi(w))


def _circle_power_law(lm: Law, t: float, cfg: SolverConfig, provenance: str):
    """``(ω_t, law of η_μ∘ω_t)`` on the disk."""
    m = complex(lm.first_moment if lm.first_moment is not None else lm.phi(0.0))
    anchor = np.log(m)
    if lm.point_mass is not None:
        rot = np.exp((t - 1) * anchor)
        omega = lambda z: np.asarray(z, dtype=complex) * rot
        ratio = lambda w: np.full(np.shape(w), rot)
    else:
        ratio = _phi_power(lm, t - 1)  # w / Φ_t(w)
        g = lambda w, alpha: alpha * ratio(w)

        def cold_or_warm(alpha, seed):
            w, _, _ = fixed_points(g, alpha, DISK_SEED if seed is None else seed,
                                   DomainTag.UNIT_DISK, cfg)
            return _check_solution(w, alpha, "disk inversion")

        def solve(z):
            out = np.zeros(z.shape, dtype=complex)
            nz = z != 0
            if np.any(nz):
                out[nz] = continued(cold_or_warm, z[nz], CONTINUATION_FLOOR, metric="disk")
            return out

        omega = _Memo(solve)
    phi0 = np.exp(t * anchor)
    h = lambda z: _safe_div(omega(z), z, lambda zz: np.full(np.shape(zz), np.exp((t - 1) * anchor)))
    phi = lambda z: h(z) * lm.phi(omega(z))
    pm = None
    if lm.point_mass is not None:
        pm = float(np.mod(np.imag(t * anchor), TWO_PI))
    law = Law(Domain.CIRCLE, {"phi": phi}, point_mass=pm, first_moment=complex(phi0),
              provenance=provenance)
    resid = lambda z: np.abs(np.asarray(z, dtype=complex) * ratio(omega(z)) - omega(z))
    return omega, law, resid


def _haar_law(provenance: str) -> Law:
    zero = lambda z: np.zeros(np.shape(z), dtype=complex)
    return Law(Domain.CIRCLE, {"phi": zero}, first_moment=0j, atoms=[], provenance=provenance)


def _phi_vanishes(lm: Law) -> bool:
    return winding_number(lm.phi) != 0


def free_mult_power_circle(mu: LawLike, t: float,
                           cfg: SolverConfig = DEFAULT_CONFIG) -> PowerResult:
    """``μ^{⊠t}`` for a law on the circle and real ``t >= 1``.

    The fractional power in ``Φ_t`` is the continuous branch of ``φ^{1−t}``
    on the disk whose logarithm at 0 is the principal log of the first moment.
    """
    lm = _require(mu, Domain.CIRCLE)
    t = _check_t(t)
    if t == 1:
        return _identity(lm, "eta", t)
    m = lm.first_moment if lm.first_moment is not None else complex(lm.phi(0.0))
    tag = DomainTag.UNIT_DISK
    if abs(m) < ZERO_MOMENT:
        if t < 2:
            raise ZeroFirstMoment("zero first moment: only powers t >= 2 are defined")
        law = _haar_law(f"free multiplicative power t={t:g} (Haar)")
        zero = lambda z: np.zeros(np.shape(z), dtype=complex)
        return PowerResult(t, TransformHandle("composed", zero, tag, "omega_t", None),
                           make_handle(law, "eta"),
                           "zero first moment: μ⊠μ is the Haar measure, hence so is every power t >= 2",
                           _zero_residual)
    if lm.point_mass is None and _phi_vanishes(lm):
        if t < 2:
            raise ZeroOfEta("η vanishes inside the disk: only powers t >= 2 are defined")
        square = free_mult_circle(lm, lm, cfg).law
        res = free_mult_power_circle(square, t / 2, cfg)
        return PowerResult(t, res.omega_t, res.transformed,
                           f"computed as (μ⊠μ)^(⊠{t / 2:g}); " + res.branch_note, res.residual_probe)
    omega, law, resid = _circle_power_law(lm, t, cfg, f"free multiplicative power t={t:g} (circle)")
    if lm.atoms is not None:
        law.atoms = [(x, mm) for x, mm, _ in atoms_mult_power_circle(lm, t).entries]
    note = (f"φ^(1−t) uses the branch of log φ continuous on the disk with "
            f"log φ(0) = {np.log(complex(m)):.12g} (principal log of the first moment)")
    return PowerResult(t, TransformHandle("composed", omega, tag, "omega_t", None),
                       make_handle(law, "eta"), note, resid)


def atoms_mult_power_circle(mu: LawLike, t: float) -> AtomReport:
    """Atoms of ``μ^{⊠t}`` on the circle under the anchored branch.

    An atom of ``μ`` at angle ``α`` with mass above ``(t−1)/t`` produces an
    atom of mass ``tμ({α}) − (t−1)`` at ``α + (t−1)β``, where ``β`` is the
    continuous argument of ``φ_μ`` at the boundary point ``e^{−iα}``.
    """
    lm = _require(mu, Domain.CIRCLE)
    t = _check_t(t)
    if t == 1:
        return AtomReport([(a, m, AtomRule.POWER) for a, m in _atoms(lm)])
    m0 = lm.first_moment if lm.first_moment is not None else complex(lm.phi(0.0))
    if abs(m0) < ZERO_MOMENT:
        if t < 2:
            raise ZeroFirstMoment("zero first moment: only powers t >= 2 are defined")
        return AtomReport([])
    if lm.point_mass is None and _phi_vanishes(lm):
        if t < 2:
            raise ZeroOfEta("η vanishes inside the disk: only powers t >= 2 are defined")
        square = free_mult_circle(lm, lm).law
        return atoms_mult_power_circle(square, t / 2)
    out = []
    heavy = [(a, m) for a, m in _atoms(lm) if m > (t - 1) / t]
    if heavy:
        anchor = np.log(complex(m0))
        for a, m in heavy:
            beta = _boundary_arg(lm.phi, anchor, np.exp(-1j * a))
            beta = a + TWO_PI * round((beta - a) / TWO_PI)
            out.append((float(np.mod(a + (t - 1) * beta, TWO_PI)), t * m - (t - 1), AtomRule.POWER))
    return AtomReport(out)


def _boundary_arg(phi, anchor: complex, zeta: complex) -> float:
    """Continuous argument of ``phi`` along the radius ending at ``zeta ∈ 𝕋``.

    The radius is sampled densely near the circle, where ``phi`` may turn fast.
    """
    r = np.concatenate([np.linspace(0.0, 0.9, 64), 1 - 0.1 * 2.0 ** -np.arange(0.0, 30.0, 0.25)])
    vals = phi(r * zeta)
    ang = np.unwrap(np.angle(vals))
    return float(ang[-1] - ang[0] + np.imag(anchor))


# half-line

def _strip_lift(lm: Law, t: float):
    """Strip form of ``Φ_t``: ``f(ζ) = ζ + (1−t) Log φ(−e^ζ)``."""
    return lambda zeta: zeta + (1 - t) * np.log(lm.phi(-np.exp(zeta)))


def _halfline_omega(lm: Law, t: float, cfg: SolverConfig):
    a = lm.point_mass
    if a is not None:
        return lambda z: np.asarray(z, dtype=complex) * a ** (t - 1)
    f = _strip_lift(lm, t)
    k = 2 * t - 1
    tau = np.pi / (k + np.pi)
    g = lambda zeta, va: zeta - tau * (f(zeta) - va)

    def cold_or_warm(alpha, seed):
        va = np.log(-alpha)
        zeta, _, _ = fixed_points(g, va, STRIP_SEED if seed is None else seed,
                                  DomainTag.STRIP, cfg)
        return _check_solution(zeta, alpha, "strip inversion")

    def solve_upper(alpha):
        return -np.exp(continued(cold_or_warm, alpha, CONTINUATION_FLOOR))

    def solve_real(alpha):
        out = np.zeros(alpha.shape, dtype=complex)
        nz = alpha != 0
        if np.any(nz):
            out[nz] = -np.exp(cold_or_warm(alpha[nz], None))
        return out

    return _Memo(_reflect(solve_upper, solve_real))


def free_mult_power_halfline(mu: LawLike, t: float,
                             cfg: SolverConfig = DEFAULT_CONFIG) -> PowerResult:
    """``μ^{⊠t}`` for a law on ``[0, +∞)`` and real ``t >= 1``.

    ``φ^{1−t}`` uses the principal logarithm, which is real on the negative
    axis and continuous on ``ℂ∖[0,+∞)``.
    """
    lm = _require(mu, Domain.HALFLINE)
    t = _check_t(t)
    if lm.point_mass == 0:
        raise DeltaZero("powers of δ₀ are not defined through Φ_t")
    if t == 1:
        return _identity(lm, "eta", t)
    omega = _halfline_omega(lm, t, cfg)
    m = float(np.real(lm.first_moment if lm.first_moment is not None else lm.phi(0.0)))
    h = lambda z: _safe_div(omega(z), z, lambda zz: np.full(np.shape(zz), m ** (t - 1) + 0j))
    phi = lambda z: h(z) * lm.phi(omega(z))
    pm = None if lm.point_mass is None else lm.point_mass ** t
    atoms = None
    if lm.atoms is not None:
        atoms = [(x, mm) for x, mm, _ in atoms_mult_power_halfline(lm, t).entries]
    law = Law(Domain.HALFLINE, {"phi": phi}, point_mass=pm, first_moment=m ** t, atoms=atoms,
              provenance=f"free multiplicative power t={t:g} (half-line)")
    note = "φ^(1−t) uses the principal branch, positive on the negative axis"

    def resid(z):
        z = np.asarray(z, dtype=complex)
        w = omega(z)
        return np.abs(w * np.exp((1 - t) * np.log(lm.phi(w))) - z)

    return PowerResult(t, TransformHandle("composed", omega, DomainTag.SLIT_PLANE, "omega_t", None),
                       make_handle(law, "eta"), note, resid)


def atoms_mult_power_halfline(mu: LawLike, t: float) -> AtomReport:
    """Atoms of ``μ^{⊠t}`` on ``[0, +∞)``.

    ``p > 0`` with ``μ({p}) > (t−1)/t`` gives mass ``tμ({p}) − (t−1)`` at ``p^t``;
    an atom at 0 keeps its mass.
    """
    lm = _require(mu, Domain.HALFLINE)
    t = _check_t(t)
    out = []
    for p, m in _atoms(lm):
        if p == 0:
            out.append((0.0, m, AtomRule.ZERO))
        elif m > (t - 1) / t:
            out.append((p ** t, t * m - (t - 1), AtomRule.POWER))
    return AtomReport(out)


# boolean to free

def boolean_to_free_add(mu: LawLike, t: float, cfg: SolverConfig = DEFAULT_CONFIG) -> TransformHandle:
    """``F``-handle of ``Ψ_t(μ)``, the right inverse of ``tz + (1−t)F_μ(z)``.

    Its Voiculescu transform is ``(1−t)(F_μ(z) − z)``; ``t = 2`` is the
    Bercovici-Pata bijection.
    """
    lm = _require(mu, Domain.REAL)
    t = _check_t(t, strict=True)
    omega = _additive_omega(lm, t, cfg)
    pm = None if lm.point_mass is None else (t - 1) * lm.point_mass
    label = " (Bercovici-Pata bijection)" if t == 2 else ""
    law = Law(Domain.REAL, {"F": omega}, point_mass=pm,
              provenance=f"boolean-to-free map Psi_{t:g}{label}")
    return make_handle(law, "F")


def boolean_to_free_mult_circle(mu: LawLike, t: float,
                                cfg: SolverConfig = DEFAULT_CONFIG) -> TransformHandle:
    """``η``-handle of ``Ψ_t(μ)`` on the circle, the right inverse of ``z·φ_μ(z)^{1−t}``.

    ``μ`` must be infinitely divisible for the multiplicative boolean
    convolution, which for a circle law means ``φ_μ`` has no zeros in the disk.
    The Haar measure is sent to itself.
    """
    lm = _require(mu, Domain.CIRCLE)
    t = _check_t(t, strict=True)
    m = lm.first_moment if lm.first_moment is not None else complex(lm.phi(0.0))
    if abs(m) < ZERO_MOMENT:
        test = np.asarray(lm.phi(np.array([0.3, 0.5j, -0.7, 0.9 - 0.2j])))
        if np.all(np.abs(test) < 1e-12):
            return make_handle(_haar_law(f"boolean-to-free map Psi_{t:g} (Haar)"), "eta")
        raise NotBooleanInfDiv("η/z vanishes at 0 but not identically")
    if lm.point_mass is None:
        w = winding_number(lm.phi)
        if w != 0:
            raise NotBooleanInfDiv("η/z has zeros in the disk")
        samples = 0.95 * np.exp(1j * np.linspace(0, TWO_PI, 64, endpoint=False))
        if np.any(np.abs(lm.phi(samples)) > 1 + 1e-12):
            raise NotBooleanInfDiv("|η(z)/z| exceeds 1")
    omega, _, _ = _circle_power_law(lm, t, cfg, "")
    phi = lambda z: _safe_div(omega(z), z,
                              lambda zz: np.full(np.shape(zz), np.exp((t - 1) * np.log(complex(m)))))
    pm = None
    if lm.point_mass is not None:
        pm = float(np.mod((t - 1) * np.imag(np.log(complex(m))), TWO_PI))
    law = Law(Domain.CIRCLE, {"phi": phi}, point_mass=pm,
              first_moment=complex(np.exp((t - 1) * np.log(complex(m)))),
              provenance=f"boolean-to-free map Psi_{t:g} (circle)")
    return make_handle(law, "eta")
