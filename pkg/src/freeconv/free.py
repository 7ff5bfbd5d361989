"""Free additive and multiplicative convolution through subordination.

For ``μ ⊞ ν`` the subordination function ``ω₁`` at ``z`` is the Denjoy-Wolff
point of ``w -> F_ν(F_μ(w) − w + z) − (F_μ(w) − w)`` and ``F_{μ⊞ν} = F_μ∘ω₁``.
For ``μ ⊠ ν`` (half-line or circle) ``ω₁`` is the Denjoy-Wolff point of
``w -> z·φ_ν(z·φ_μ(w))`` with ``φ = η/id`` and ``η_{μ⊠ν} = η_μ∘ω₁``.
Both are solved lazily per evaluation point and memoized.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .dwolff import (DEFAULT_CONFIG, DISK_SEED, HALFPLANE_SEED, SolverConfig, continued,
                     fixed_points)
from .errors import BadWeights, DomainMismatch, SolverFailure
from .measure import TWO_PI, Domain, DomainTag
from .transforms import DOMAIN_TAGS, Law, LawLike, TransformHandle, law_of, make_handle

CONTINUATION_FLOOR = 0.05
_MEMO_LIMIT = 500_000


class AtomRule(str, Enum):
    SUM = "sum_rule"
    PRODUCT = "product_rule"
    ZERO = "zero_rule"
    POWER = "power_rule"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class AtomReport:
    entries: tuple = ()

    def __post_init__(self):
        entries = tuple(sorted((float(x), float(m), AtomRule(r)) for x, m, r in self.entries))
        object.__setattr__(self, "entries", entries)

    @property
    def locations(self) -> list[float]:
        return [e[0] for e in self.entries]

    @property
    def masses(self) -> list[float]:
        return [e[1] for e in self.entries]

    @property
    def total_mass(self) -> float:
        return float(sum(self.masses))

    def __len__(self):
        return len(self.entries)

    def to_list(self) -> list[dict]:
        return [{"pos": x, "mass": m, "rule": r.value} for x, m, r in self.entries]


@dataclass(frozen=True)
class SubordinationPair:
    omega1: TransformHandle
    omega2: TransformHandle
    convolved: TransformHandle
    residual_probe: Callable

    @property
    def law(self) -> Law:
        return self.convolved.law


class _Memo:
    """Pointwise cache around a vectorized solver; safe under concurrent use."""

    def __init__(self, solve: Callable):
        self._solve = solve
        self._cache: dict = {}
        self._lock = threading.Lock()

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        keys = flat.tolist()
        with self._lock:
            found = [self._cache.get(k) for k in keys]
        miss = [i for i, v in enumerate(found) if v is None]
        out = np.array([0j if v is None else v for v in found], dtype=complex)
        if miss:
            uniq = list(dict.fromkeys(keys[i] for i in miss))
            vals = np.asarray(self._solve(np.array(uniq, dtype=complex)), dtype=complex)
            solved = dict(zip(uniq, vals.tolist()))
            for i in miss:
                out[i] = solved[keys[i]]
            with self._lock:
                if len(self._cache) > _MEMO_LIMIT:
                    self._cache.clear()
                self._cache.update(solved)
        return out.reshape(z.shape)


def _check_solution(w, z, what):
    bad = ~np.isfinite(w)
    if np.any(bad):
        zb = np.asarray(z).ravel()[np.flatnonzero(np.ravel(bad))[0]]
        raise SolverFailure(f"{what}: no fixed point found at z = {zb}")
    return w


def _reflect(solve_upper: Callable, real_solve: Optional[Callable] = None) -> Callable:
    """Extend a solver on the upper half-plane by conjugate symmetry."""

    def solve(z):
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        up, low, real = z.imag > 0, z.imag < 0, z.imag == 0
        zz = np.where(low, np.conj(z), z)
        sel = up | low
        if np.any(sel):
            out[sel] = solve_upper(zz[sel])
        out[low] = np.conj(out[low])
        if np.any(real):
            if real_solve is None:
                raise SolverFailure("subordination functions are evaluated off the real axis")
            out[real] = real_solve(z[real])
        return out

    return solve


def _require(mu: LawLike, *domains: Domain) -> Law:
    law = law_of(mu)
    if law.domain not in domains:
        raise DomainMismatch(f"expected a {'/'.join(d.value for d in domains)} law, "
                             f"got {law.domain.value}")
    return law


def _combined_atoms(law1: Law, law2: Law, rule_fn) -> Optional[list]:
    if law1.atoms is None or law2.atoms is None:
        return None
    return [(x, m) for x, m, _ in rule_fn(law1.atoms, law2.atoms).entries]


# additive

def free_add(mu: LawLike, nu: LawLike, cfg: SolverConfig = DEFAULT_CONFIG) -> SubordinationPair:
    """Subordination pair and ``F``-transform of ``μ ⊞ ν``."""
    lm, ln = _require(mu, Domain.REAL), _require(nu, Domain.REAL)
    a, b = lm.point_mass, ln.point_mass

    if a is not None:
        # μ = δ_a: ω₂(z) = z − a, so ω₁ = F_ν(z − a) + a
        omega1 = lambda z: ln.F_minus_id(np.asarray(z, dtype=complex) - a) + np.asarray(z, dtype=complex)
    elif b is not None:
        omega1 = _add_omega1_point(lm, ln, b)
    else:
        def f(w, z):
            return z + ln.F_minus_id(z + lm.F_minus_id(w))

        def cold_or_warm(z, seed):
            w, _, _ = fixed_points(f, z, z if seed is None else seed,
                                   DomainTag.UPPER_HALFPLANE, cfg)
            return _check_solution(w, z, "free additive subordination")

        omega1 = _Memo(_reflect(lambda z: continued(cold_or_warm, z, CONTINUATION_FLOOR)))

    def omega2(z):
        z = np.asarray(z, dtype=complex)
        w1 = omega1(z)
        return lm.F_minus_id(w1) + z

    F = lambda z: lm.F(omega1(z))

    def residual(z):
        z = np.asarray(z, dtype=complex)
        w1, w2 = omega1(z), omega2(z)
        r1, r2 = lm.F_minus_id(w1), ln.F_minus_id(w2)
        return np.maximum(np.abs(w1 + r1 - w2 - r2), np.abs(r1 + z - w2))

    pm = a + b if (a is not None and b is not None) else None
    law = Law(Domain.REAL, {"F": F}, point_mass=pm,
              atoms=_combined_atoms(lm, ln, _atoms_add_lists),
              provenance="free additive convolution")
    tag = DomainTag.UPPER_HALFPLANE
    return SubordinationPair(
        TransformHandle("composed", omega1, tag, "omega1 of free additive convolution"),
        TransformHandle("composed", omega2, tag, "omega2 of free additive convolution"),
        make_handle(law, "F"),
        residual,
    )


def _add_omega1_point(lm: Law, ln: Law, b: float) -> Callable:
    # ν = δ_b: the fixed-point map is constant, ω₁(z) = z − b
    return lambda z: np.asarray(z, dtype=complex) - b


# multiplicative

def _mult_solver(lm: Law, ln: Law, circle: bool, cfg: SolverConfig) -> Callable:
    """Vectorized ``z -> ω₁(z)/z`` for half-line laws, ``z -> ω₁(z)`` for circle laws."""
    p1, p2 = lm.phi, ln.phi
    if circle:
        f = lambda w, z: z * p2(z * p1(w))

        def cold_or_warm(z, seed):
            w, _, _ = fixed_points(f, z, DISK_SEED if seed is None else seed,
                                   DomainTag.UNIT_DISK, cfg)
            return _check_solution(w, z, "free multiplicative subordination")

        def solve(z):
            z = np.asarray(z, dtype=complex)
            out = np.zeros(z.shape, dtype=complex)
            nz = z != 0
            if np.any(nz):
                out[nz] = continued(cold_or_warm, z[nz], CONTINUATION_FLOOR, metric="disk")
            return out

        return solve

    f = lambda h, z: p2(z * p1(z * h))

    def solve_upper(z, seed):
        h, _, _ = fixed_points(f, z, HALFPLANE_SEED if seed is None else seed,
                               DomainTag.UPPER_HALFPLANE, cfg)
        return _check_solution(h, z, "free multiplicative subordination")

    f_real = lambda h, z: np.real(p2(z * p1(z * h))) + 0j

    def real_solve(z):
        h, _, _ = fixed_points(f_real, z, 1.0, lambda u: np.real(u) > 0, cfg)
        return _check_solution(h, z, "free multiplicative subordination")

    return _reflect(lambda z: continued(solve_upper, z, CONTINUATION_FLOOR), real_solve)


def _free_mult(mu: LawLike, nu: LawLike, domain: Domain, cfg: SolverConfig) -> SubordinationPair:
    lm, ln = _require(mu, domain), _require(nu, domain)
    circle = domain is Domain.CIRCLE
    a, b = lm.point_mass, ln.point_mass
    m1, m2 = lm.first_moment, ln.first_moment
    tag = DOMAIN_TAGS[domain]
    zero = np.zeros

    if circle and a is not None:
        a = complex(np.exp(1j * a))
    if circle and b is not None:
        b = complex(np.exp(1j * b))

    haar = circle and m1 is not None and m2 is not None and abs(m1) < 1e-14 and abs(m2) < 1e-14
    delta0 = not circle and (a == 0 or b == 0)

    if haar or delta0:
        # ω₁ ≡ 0 is the fixed point; the product law has η ≡ 0
        h = lambda z: zero(np.shape(z), dtype=complex)
        omega1 = h
        phi = h
    else:
        if a is not None:
            # μ = δ_a: ω₂(z) = az and ω₁(z) = η_ν(az)/a
            hfun = lambda z: ln.phi(a * np.asarray(z, dtype=complex))
        elif b is not None:
            hfun = lambda z: np.full(np.shape(z), b, dtype=complex)
        else:
            hfun = _Memo(_mult_solver(lm, ln, circle, cfg))
        if circle and a is None and b is None:
            omega1 = hfun
            h = lambda z: _safe_div(omega1(z), z, ln.phi)
        else:
            h = hfun
            omega1 = lambda z: np.asarray(z, dtype=complex) * h(z)
        phi = lambda z: h(z) * lm.phi(omega1(z))

    def omega2(z):
        z = np.asarray(z, dtype=complex)
        return z * lm.phi(omega1(z))

    eta = lambda z: np.asarray(z, dtype=complex) * phi(z)

    def residual(z):
        z = np.asarray(z, dtype=complex)
        w1, w2 = omega1(z), omega2(z)
        e1, e2 = lm.eta(w1), ln.eta(w2)
        return np.maximum(np.abs(e1 - e2), np.abs(e1 - w1 * w2 / np.where(z == 0, 1, z)))

    fm = None
    if m1 is not None and m2 is not None:
        fm = complex(m1 * m2)
    pm = None
    if lm.point_mass is not None and ln.point_mass is not None:
        pm = (lm.point_mass + ln.point_mass) % TWO_PI if circle else lm.point_mass * ln.point_mass
    atoms = _combined_atoms(lm, ln, lambda x, y: _atoms_mult_lists(x, y, domain))
    if haar:
        atoms = []
    name = "free multiplicative convolution" + (" (circle)" if circle else " (half-line)")
    law = Law(domain, {"phi": phi, "eta": eta}, point_mass=pm, first_moment=fm, atoms=atoms,
              provenance=name)
    return SubordinationPair(
        TransformHandle("composed", omega1, tag, "omega1 of " + name),
        TransformHandle("composed", omega2, tag, "omega2 of " + name),
        make_handle(law, "eta"),
        residual,
    )


def _safe_div(num, z, at_zero):
    z = np.asarray(z, dtype=complex)
    zero = z == 0
    out = num / np.where(zero, 1, z)
    if np.any(zero):
        out = np.where(zero, at_zero(z), out)
    return out


def free_mult_halfline(mu: LawLike, nu: LawLike,
                       cfg: SolverConfig = DEFAULT_CONFIG) -> SubordinationPair:
    """Subordination pair and ``η``-transform of ``μ ⊠ ν`` on ``[0, +∞)``."""
    return _free_mult(mu, nu, Domain.HALFLINE, cfg)


def free_mult_circle(mu: LawLike, nu: LawLike,
                     cfg: SolverConfig = DEFAULT_CONFIG) -> SubordinationPair:
    """Subordination pair and ``η``-transform of ``μ ⊠ ν`` on the unit circle."""
    return _free_mult(mu, nu, Domain.CIRCLE, cfg)


def free_mult(mu: LawLike, nu: LawLike, cfg: SolverConfig = DEFAULT_CONFIG) -> SubordinationPair:
    dom = law_of(mu).domain
    if dom is Domain.REAL:
        raise DomainMismatch("free multiplicative convolution needs half-line or circle laws")
    return _free_mult(mu, nu, dom, cfg)


# closed forms for two-atom measures

def _check_two_atom(s, u, t, v, *, forbid_one=False):
    for w in (s, t):
        if not 0 < w < 1:
            raise BadWeights("weights must lie strictly between 0 and 1")
    for x in (u, v):
        if not x > 0:
            raise BadWeights("atom positions must be positive")
        if forbid_one and x == 1:
            raise BadWeights("the second atom must differ from 1")


def two_atom_add_oracle(s: float, u: float, t: float, v: float):
    """Closed form of ``(sδ₀ + (1−s)δ_u) ⊞ (tδ₀ + (1−t)δ_v)``.

    Returns ``(G, roots)``: the Cauchy transform of the convolution and the
    four real points where its density may fail to be analytic.
    """
    _check_two_atom(s, u, t, v)

    def omega1(z):
        z = np.asarray(z, dtype=complex)
        flip = z.imag < 0
        z = np.where(flip, np.conj(z), z)
        num = z * z - z * (u * (1 - 2 * s) + v) - u * v * (s + t - 1)
        disc = (z * (z - u - v) + u * v * (1 - s - t)) ** 2 + 4 * s * t * u * v * z * (z - u - v)
        den = 2 * (z - t * v - (1 - s) * u)
        r = np.sqrt(disc)
        w_plus, w_minus = (num + r) / den, (num - r) / den
        # the subordination function satisfies Im ω₁(z) ≥ Im z
        pick = np.where(w_plus.imag >= w_minus.imag, w_plus, w_minus)
        return np.where(flip, np.conj(pick), pick)

    def G(z):
        w = omega1(z)
        return s / w + (1 - s) / (w - u)

    inner = 8 * u * v * np.sqrt(t * s * (1 - t) * (1 - s))
    base = (u - v) ** 2 + 4 * u * v * (t + s - 2 * s * t)
    roots = []
    for sign_in in (-1, 1):
        rad = np.sqrt(max(base + sign_in * inner, 0.0))
        for sign_out in (-1, 1):
            roots.append(0.5 * (u + v + sign_out * rad))
    return G, np.sort(np.array(roots))


def two_atom_mult_oracle(s: float, u: float, t: float, v: float):
    """Closed form of ``(sδ₁ + (1−s)δ_u) ⊠ (tδ₁ + (1−t)δ_v)``.

    Returns ``((A, B, C, D), eta)``: the quartic coefficients under the
    square root as they are usually quoted, and the ``η``-transform of the
    convolution.  ``ω₁`` is computed from the quadratic it satisfies, with
    the root chosen so that ``arg ω₁(z) ∈ [arg z, π)``.
    """
    _check_two_atom(s, u, t, v, forbid_one=True)
    A = u * u * v * v
    B = 2 * u * v * ((v + u) * ((t - 1) * (s - 1) - t * s) + (1 + u * v) * (t * (s - 1) + s * (t - 1)))
    C = ((u * u + v * v) * (t + s - 1) ** 2
         + 2 * (s * (1 - s) + t * (1 - t)) * (u + v - 2 * u * v + u * u * v * v + u * v * v)
         + 4 * u * v + (u * u * v * v + 1) * (s - t) ** 2)
    D = -2 * ((u + v) + (u - 1) * (v - 1) * (t * (1 - s) + s * (1 - t)))

    def omega1(z):
        z = np.asarray(z, dtype=complex)
        flip = z.imag < 0
        z = np.where(flip, np.conj(z), z)
        qa = s * u - s + z * (-t * u * v + t * u - u) + 1
        qb = (u * v * z * z
              + z * (-s * u * v - s * u + s * v + s + t * u * v - t * u + t * v - t + u - v) - 1)
        qc = z * z * (s * u * v - s * v - u * v) + z * (-t * v + t + v)
        r = np.sqrt(qb * qb - 4 * qa * qc)
        roots = np.stack([(-qb + r) / (2 * qa), (-qb - r) / (2 * qa)])
        real_z = z.imag == 0
        argz = np.angle(z)
        arg_r = np.angle(roots)
        # the admissible root lies in the sector arg z <= arg w < π
        score = np.where(real_z, -np.real(roots) * (np.abs(np.imag(roots)) < 1e-9 * (1 + np.abs(roots))),
                         -np.maximum(argz - arg_r, 0) - np.maximum(arg_r - np.pi, 0))
        pick = np.where(score[0] >= score[1], roots[0], roots[1])
        return np.where(flip, np.conj(pick), pick)

    def eta(z):
        w = omega1(z)
        return w * ((s + (1 - s) * u) - u * w) / (1 - w * (s * u + 1 - s))

    return (A, B, C, D), eta


# atom rules

def _atoms_add_lists(a1, a2) -> AtomReport:
    entries = [(b + c, mb + mc - 1, AtomRule.SUM)
               for b, mb in a1 for c, mc in a2 if mb + mc > 1]
    return AtomReport(entries)


def _atoms_mult_lists(a1, a2, domain: Domain) -> AtomReport:
    entries = []
    if domain is Domain.CIRCLE:
        for b, mb in a1:
            for c, mc in a2:
                if mb + mc > 1:
                    entries.append(((b + c) % TWO_PI, mb + mc - 1, AtomRule.PRODUCT))
        return AtomReport(entries)
    for b, mb in a1:
        for c, mc in a2:
            if b > 0 and c > 0 and mb + mc > 1:
                entries.append((b * c, mb + mc - 1, AtomRule.PRODUCT))
    z = max(sum(m for x, m in a1 if x == 0), sum(m for x, m in a2 if x == 0))
    if z > 0:
        entries.append((0.0, z, AtomRule.ZERO))
    return AtomReport(entries)


def _atom_list(mu: LawLike) -> list:
    law = law_of(mu)
    if law.atoms is None:
        raise DomainMismatch("atoms of this law are not known")
    return list(law.atoms)


def atoms_free_add(mu: LawLike, nu: LawLike) -> AtomReport:
    """Atoms of ``μ ⊞ ν``: one at ``b + c`` whenever ``μ({b}) + ν({c}) > 1``."""
    _require(mu, Domain.REAL), _require(nu, Domain.REAL)
    return _atoms_add_lists(_atom_list(mu), _atom_list(nu))


def atoms_free_mult(mu: LawLike, nu: LawLike, domain=None) -> AtomReport:
    """Atoms of ``μ ⊠ ν`` by the product rule, plus the atom at 0 on the half-line.

    On the circle the product rule is read with angles adding.
    """
    dom = Domain(domain) if domain is not None else law_of(mu).domain
    if dom is Domain.REAL:
        raise DomainMismatch("free multiplicative atoms need half-line or circle laws")
    _require(mu, dom), _require(nu, dom)
    return _atoms_mult_lists(_atom_list(mu), _atom_list(nu), dom)
