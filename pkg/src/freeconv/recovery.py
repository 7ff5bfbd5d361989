"""Recover densities and atoms of a law from its analytic transforms.

Densities on the line come from Stieltjes inversion, ``−Im G(x+iy)/π`` as
``y ↓ 0``; circle densities from the Poisson real part ``(1 + 2 Re ψ)/2π`` as
``r ↑ 1``.  Atom masses are nontangential limits: ``iy·G(a+iy)`` on the line
and ``(1−r)ψ(re^{−iα})`` on the circle.  Limits are taken by Richardson
extrapolation along a geometric height schedule.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._numerics import height_schedule, richardson
from .errors import OscillatoryLimit, ValidationError
from .free import AtomReport, AtomRule
from .measure import TWO_PI, Domain
from .transforms import LawLike, law_of

DEFAULT_HEIGHT = 1e-2
DEFAULT_STEPS = 9
RICHARDSON_TERMS = 3
MASK_RADIUS = 1e-3
ATOM_FLOOR = 1e-9
NEG_CLAMP = 1e-8
OSC_TOL = 1e-2
BLOWUP = 1e3
ARC_NODES = 400
ATOM_HEIGHT = 1e-3
ATOM_STEPS = 32


def default_schedule(y0: float = DEFAULT_HEIGHT, n: int = DEFAULT_STEPS) -> np.ndarray:
    return height_schedule(y0, n)


@dataclass
class DensityGrid:
    """Densities on a grid with the atoms found and a mass account.

    ``mass_account`` is ``(continuous_mass, atomic_mass, deficit)`` with
    ``deficit = 1 − continuous − atomic``.  Masked abscissae carry ``nan``.
    """

    abscissae: np.ndarray
    densities: np.ndarray
    atoms: AtomReport = field(default_factory=AtomReport)
    mass_account: tuple = (0.0, 0.0, 1.0)
    domain: Domain = Domain.REAL
    errors: Optional[np.ndarray] = None

    @property
    def continuous_mass(self) -> float:
        return self.mass_account[0]

    @property
    def atomic_mass(self) -> float:
        return self.mass_account[1]

    @property
    def deficit(self) -> float:
        return self.mass_account[2]


def _limit(values: np.ndarray, heights: np.ndarray, singular_ok: bool):
    """Extrapolate ``values`` (first axis along ``heights``) to zero height.

    Sequences growing like ``1/y`` are reported as ``+inf`` when
    ``singular_ok``; sequences that oscillate without settling give ``nan``.
    """
    est, err = richardson(heights, values, RICHARDSON_TERMS)
    est = np.asarray(est, dtype=float)
    err = np.asarray(err, dtype=float)
    last, prev = values[-1], values[-2]
    ratio = heights[-2] / heights[-1]
    grows = (last > BLOWUP) & (last > 0.8 * ratio * prev)
    if singular_ok:
        est = np.where(grows, np.inf, est)
    d = np.diff(values[-4:], axis=0)
    flips = np.any(np.sign(d[1:]) * np.sign(d[:-1]) < 0, axis=0)
    osc = flips & (err > OSC_TOL * np.maximum(1.0, np.abs(est))) & ~grows
    est = np.where(osc, np.nan, est)
    return est, err, osc


def _adaptive_limit(values: np.ndarray, heights: np.ndarray, tol: float = 1e-11):
    """Slide a Richardson window down a long schedule until it settles.

    Nearby atoms or density structure set a local length scale; the estimate
    is taken from the first window whose change falls below ``tol``, or from
    the calmest window if none does.
    """
    n = len(heights)
    best = None
    for end in range(DEFAULT_STEPS, n + 1):
        est, err, osc = _limit(values[:end], heights[:end], singular_ok=False)
        if best is None:
            best = [est.copy(), err.copy(), osc.copy(), np.zeros(est.shape, dtype=bool)]
        better = ~best[3] & (err < best[1])
        settled = err < tol * np.maximum(1.0, np.abs(est))
        upd = better | (~best[3] & settled)
        best[0] = np.where(upd, est, best[0])
        best[1] = np.where(upd, err, best[1])
        best[2] = np.where(upd, osc, best[2])
        best[3] = best[3] | settled
        if np.all(best[3]):
            break
    return best[0], best[1], best[2]


def _scalar_or_array(x, out):
    return float(np.ravel(out)[0]) if np.ndim(x) == 0 else out


def _clamp(d, raw=None):
    """Zero small negatives; larger ones mean the extrapolation failed near an
    edge of the support, where the unextrapolated sample ``raw`` is used."""
    d = np.where((d < 0) & (d >= -NEG_CLAMP), 0.0, d)
    if raw is not None:
        d = np.where(d < 0, np.maximum(raw, 0.0), d)
    return d


def _cauchy_values(law, x, heights):
    z = x[None, :] + 1j * heights[:, None]
    return law.G(z)


def density_real(handle: LawLike, x, schedule=None):
    """Density at real ``x`` by Stieltjes inversion.

    ``+inf`` marks points where ``−Im G/π`` blows up like ``1/y`` (atoms).
    Raises :class:`OscillatoryLimit` when the samples oscillate without a limit.
    """
    law = law_of(handle)
    if law.domain is Domain.CIRCLE:
        raise ValidationError("use density_circle for circle laws")
    h = default_schedule() if schedule is None else np.asarray(schedule, dtype=float)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    vals = -np.imag(_cauchy_values(law, xs, h)) / np.pi
    est, _, osc = _limit(vals, h, singular_ok=True)
    if np.any(osc):
        raise OscillatoryLimit(f"no limit of −Im G/π at x = {xs[np.argmax(osc)]}")
    return _scalar_or_array(x, _clamp(est, vals[-1]))


def _atom_mass_values(law, a: np.ndarray, heights):
    if law.domain is Domain.HALFLINE:
        zero = a == 0
        out = np.empty((len(heights), a.size))
        if np.any(~zero):
            z = a[None, ~zero] + 1j * heights[:, None]
            out[:, ~zero] = np.real(1j * heights[:, None] * law.G(z))
        if np.any(zero):
            # approach 0 along the negative axis: −y·G(−y) = 1/(1 − η(−1/y))
            e = law.eta(-1 / heights + 0j)
            out[:, zero] = np.real(1 / (1 - e))[:, None]
        return out
    z = a[None, :] + 1j * heights[:, None]
    return np.real(1j * heights[:, None] * law.G(z))


def atom_mass_real(handle: LawLike, a, schedule=None):
    """Mass of the atom at ``a``: the limit of ``iy·G(a+iy)``, i.e. ``1/F′(a)``.

    Returns 0 when ``F(a+iy)`` stays away from 0.
    """
    law = law_of(handle)
    if law.domain is Domain.CIRCLE:
        raise ValidationError("use atom_mass_circle for circle laws")
    aa = np.atleast_1d(np.asarray(a, dtype=float))
    if schedule is None:
        h = default_schedule(ATOM_HEIGHT, ATOM_STEPS)
        est, err, osc = _adaptive_limit(_atom_mass_values(law, aa, h), h)
    else:
        h = np.asarray(schedule, dtype=float)
        est, err, osc = _limit(_atom_mass_values(law, aa, h), h, singular_ok=False)
    if np.any(osc):
        raise OscillatoryLimit(f"no Julia-Caratheodory limit at {aa[np.argmax(osc)]}")
    est = np.where(np.abs(est) < ATOM_FLOOR, 0.0, np.clip(est, 0.0, 1.0))
    return _scalar_or_array(a, est)


def _psi_values(law, theta: np.ndarray, gaps):
    r = 1 - gaps
    z = r[:, None] * np.exp(-1j * theta)[None, :]
    return law.psi(z)


def density_circle(handle: LawLike, theta, schedule=None):
    """Density of a circle law at angle ``theta`` with respect to ``dθ``.

    ``ψ`` is sampled at ``re^{−iθ}`` so that the result is indexed by the
    law's own angle.
    """
    law = law_of(handle)
    if law.domain is not Domain.CIRCLE:
        raise ValidationError("density_circle needs a circle law")
    h = default_schedule() if schedule is None else np.asarray(schedule, dtype=float)
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    vals = (1 + 2 * np.real(_psi_values(law, th, h))) / TWO_PI
    est, _, osc = _limit(vals, h, singular_ok=True)
    if np.any(osc):
        raise OscillatoryLimit(f"no radial limit at θ = {th[np.argmax(osc)]}")
    return _scalar_or_array(theta, _clamp(est, vals[-1]))


def atom_mass_circle(handle: LawLike, alpha, schedule=None):
    """Mass of a circle law at angle ``alpha``: the limit of ``(1−r)ψ(re^{−iα})``."""
    law = law_of(handle)
    if law.domain is not Domain.CIRCLE:
        raise ValidationError("atom_mass_circle needs a circle law")
    al = np.atleast_1d(np.asarray(alpha, dtype=float))
    if schedule is None:
        h = default_schedule(ATOM_HEIGHT, ATOM_STEPS)
        est, _, osc = _adaptive_limit(np.real(h[:, None] * _psi_values(law, al, h)), h)
    else:
        h = np.asarray(schedule, dtype=float)
        est, _, osc = _limit(np.real(h[:, None] * _psi_values(law, al, h)), h, singular_ok=False)
    if np.any(osc):
        raise OscillatoryLimit(f"no radial limit at α = {al[np.argmax(osc)]}")
    est = np.where(np.abs(est) < ATOM_FLOOR, 0.0, np.clip(est, 0.0, 1.0))
    return _scalar_or_array(alpha, est)


def locate_atoms(handle: LawLike, grid, *, threshold: float = 1e-6, steps: int = 30) -> list:
    """Find atom positions numerically near the points of ``grid``.

    Near an atom ``a`` the map ``F`` (line) or ``1/ψ`` (circle) is close to
    linear with a zero at ``a``; candidates where ``y|G|`` is large are
    refined by Newton steps with shrinking height.
    """
    law = law_of(handle)
    g = np.sort(np.asarray(grid, dtype=float))
    dx = float(np.min(np.diff(g))) if g.size > 1 else 1e-2
    circle = law.domain is Domain.CIRCLE
    if circle:
        score = np.abs((dx * _psi_values(law, g, np.array([dx])))[0])
        inv = lambda z: 1 / law.psi(z)
    else:
        score = np.abs(dx * law.G(g + 1j * dx))
        inv = law.F
    peaks = [i for i in range(g.size)
             if score[i] > 0.25 * threshold ** 0.5 and score[i] >= score[max(i - 1, 0)]
             and score[i] >= score[min(i + 1, g.size - 1)]]
    found = []
    for i in peaks:
        y = dx
        pos = g[i]
        for _ in range(steps):
            z = np.exp(-1j * pos) * (1 - y) if circle else pos + 1j * y
            s = 1e-3 * y
            with np.errstate(all="ignore"):
                d = (inv(np.array([z + s])) - inv(np.array([z - s])))[0] / (2 * s)
                zn = z - inv(np.array([z]))[0] / d
            if not np.isfinite(zn):
                pos = None
                break
            pos = float(np.mod(-np.angle(zn), TWO_PI)) if circle else float(np.real(zn))
            gap = abs(pos - g[i])
            if circle:
                gap = min(gap, TWO_PI - gap)
            if gap > 5 * dx:
                # the peak was not caused by a nearby atom
                pos = None
                break
            y *= 0.5
            if y < 1e-9:
                break
        if pos is not None:
            found.append(pos)
    masses = (atom_mass_circle if circle else atom_mass_real)(handle, np.array(found)) if found else []
    out = []
    for p, m in zip(found, np.atleast_1d(masses)):
        if m > threshold and all(abs(p - q) > 1e-8 for q in out):
            out.append(p)
    return sorted(out)


def _arc_mass(law, lo: float, hi: float, n: int = ARC_NODES) -> float:
    """``μ((lo, hi))`` from ``−Im ∫ G dz / π`` along a half-circle over ``[lo, hi]``.

    The path lies in the upper half-plane, where ``G`` is smooth; endpoint
    singularities of integrable type are absorbed by clustering the nodes.
    """
    u, w = np.polynomial.legendre.leggauss(n)
    s = np.pi * (1 - np.cos(np.pi * (u + 1) / 2)) / 2  # in (0, π), clustered at both ends
    ds = np.pi * np.pi / 4 * np.sin(np.pi * (u + 1) / 2)
    c, R = (lo + hi) / 2, (hi - lo) / 2
    z = c - R * np.exp(-1j * s)
    dz = 1j * R * np.exp(-1j * s) * ds
    integral = np.sum(w * law.G(z) * dz)
    return float(-np.imag(integral) / np.pi)


def _grid(law, grid_spec):
    if isinstance(grid_spec, (int, np.integer)):
        if law.domain is not Domain.CIRCLE:
            raise ValidationError("an integer grid is only meaningful on the circle")
        return TWO_PI * np.arange(int(grid_spec)) / int(grid_spec)
    if isinstance(grid_spec, tuple) and len(grid_spec) == 3:
        lo, hi, n = grid_spec
        return np.linspace(float(lo), float(hi), int(n))
    g = np.asarray(grid_spec, dtype=float)
    if g.ndim != 1 or g.size < 2 or np.any(np.diff(g) <= 0):
        raise ValidationError("grid abscissae must be strictly increasing")
    return g


def recover_grid(handle: LawLike, grid_spec, atom_candidates: Optional[Sequence[float]] = None,
                 *, schedule=None, mask: Sequence[float] = (), mask_radius: float = MASK_RADIUS,
                 threshold: float = 1e-7) -> DensityGrid:
    """Densities on a grid, atoms at candidate points and a mass account.

    ``grid_spec`` is ``(lo, hi, n)``, an increasing array, or for circle laws
    an integer number of equispaced angles.  Without candidates the law's
    known atoms are used, or else :func:`locate_atoms`.  Densities within
    ``mask_radius`` of an atom or of a point in ``mask`` are reported as ``nan``.
    On the line the continuous mass is ``μ((lo, hi))`` minus the atoms
    inside; on the circle it is the periodic trapezoid sum.
    """
    law = law_of(handle)
    circle = law.domain is Domain.CIRCLE
    x = _grid(law, grid_spec)
    h = default_schedule() if schedule is None else np.asarray(schedule, dtype=float)

    if atom_candidates is None:
        atom_candidates = [p for p, _ in law.atoms] if law.atoms is not None else locate_atoms(law, x)
    cand = np.asarray(list(atom_candidates), dtype=float)
    if cand.size:
        masses = np.atleast_1d((atom_mass_circle if circle else atom_mass_real)(law, cand))
    else:
        masses = np.zeros(0)
    keep = masses > threshold
    atoms = AtomReport([(p, m, AtomRule.NUMERIC) for p, m in zip(cand[keep], masses[keep])])

    if circle:
        vals = (1 + 2 * np.real(_psi_values(law, x, h))) / TWO_PI
    else:
        vals = -np.imag(_cauchy_values(law, x, h)) / np.pi
    dens, err, _ = _limit(vals, h, singular_ok=True)
    dens = _clamp(dens, vals[-1])
    blocked = np.concatenate([np.asarray(atoms.locations), np.asarray(list(mask), dtype=float)])
    if blocked.size:
        dist = np.abs(x[:, None] - blocked[None, :])
        if circle:
            dist = np.minimum(dist, TWO_PI - dist)
        dens = np.where(np.any(dist < mask_radius, axis=1), np.nan, dens)

    atomic = atoms.total_mass
    if circle:
        finite = np.isfinite(dens)
        # masked points are bridged by periodic interpolation for the account only
        filled = np.interp(x, x[finite], dens[finite], period=TWO_PI) if np.any(finite) else dens
        if x.size == _full_circle(x):
            cont = float(np.sum(filled) * TWO_PI / x.size)
        else:
            cont = float(np.trapezoid(np.where(np.isfinite(filled), filled, 0.0), x))
    else:
        inside = sum(m for p, m in zip(atoms.locations, atoms.masses) if x[0] < p < x[-1])
        cont = max(_arc_mass(law, x[0], x[-1]) - inside, 0.0)
    return DensityGrid(x, dens, atoms, (cont, atomic, 1.0 - cont - atomic), law.domain, err)


def _full_circle(x: np.ndarray) -> int:
    """``len(x)`` when ``x`` is an equispaced full-circle grid, else -1."""
    n = x.size
    if n > 1 and np.allclose(np.diff(x), TWO_PI / n) and abs(x[0]) < 1e-12:
        return n
    return -1
