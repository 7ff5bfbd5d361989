"""Probability measures on the line, the half-line and the unit circle.

A :class:`Measure` is an immutable value holding an atomic part and an
optional continuous part.  The continuous part is a list of weighted
quadrature nodes; measures built from a named family additionally remember
the family so that transforms can use its exact Cauchy transform close to
the support, where a finite node sum cannot resolve boundary values.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import roots_legendre

from .errors import (BadParameters, DuplicatePosition, InvalidSupport, NonUnitMass,
                     SupportViolation, ValidationError)

MASS_TOL = 1e-10
POSITION_TOL = 1e-12
DEFAULT_NODES = 512
TWO_PI = 2 * np.pi


class Domain(str, Enum):
    REAL = "real"
    HALFLINE = "halfline"
    CIRCLE = "circle"


class DomainTag(str, Enum):
    UPPER_HALFPLANE = "upper_halfplane"
    UNIT_DISK = "unit_disk"
    SLIT_PLANE = "slit_plane"
    STRIP = "strip"


@dataclass(frozen=True)
class DomainPoint:
    value: complex
    domain_tag: DomainTag

    def __post_init__(self):
        z = complex(self.value)
        object.__setattr__(self, "value", z)
        object.__setattr__(self, "domain_tag", DomainTag(self.domain_tag))
        if not contains(self.domain_tag, z):
            raise InvalidSupport(f"{z} is not inside {self.domain_tag.value}")


def contains(tag: DomainTag, z) -> np.ndarray:
    """Vectorized membership test for the open domains."""
    z = np.asarray(z, dtype=complex)
    tag = DomainTag(tag)
    if tag is DomainTag.UPPER_HALFPLANE:
        return z.imag > 0
    if tag is DomainTag.UNIT_DISK:
        return np.abs(z) < 1
    if tag is DomainTag.SLIT_PLANE:
        return (z.imag != 0) | (z.real < 0)
    return np.abs(z.imag) < np.pi


@dataclass(frozen=True)
class NamedFamily:
    """A continuous law with a closed-form Cauchy transform."""

    name: str
    params: tuple

    @property
    def support(self) -> tuple[float, float]:
        if self.name == "semicircle":
            c, r = self.params
            return (c - r, c + r)
        if self.name in ("arcsine", "uniform_interval"):
            return tuple(self.params)
        return (0.0, TWO_PI)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x > lo) & (x < hi)
        out = np.zeros_like(x)
        if self.name == "semicircle":
            c, r = self.params
            out[inside] = 2 / (np.pi * r * r) * np.sqrt(r * r - (x[inside] - c) ** 2)
        elif self.name == "arcsine":
            out[inside] = 1 / (np.pi * np.sqrt((x[inside] - lo) * (hi - x[inside])))
        elif self.name == "uniform_interval":
            out[inside] = 1 / (hi - lo)
        else:
            out[:] = 1 / TWO_PI
        return out

    def cauchy(self, z):
        """Exact Cauchy transform, valid off the support in both half-planes."""
        z = np.asarray(z, dtype=complex)
        # a negative zero imaginary part would put real points on the wrong side of the cut
        z = z.real + 1j * (z.imag + 0.0)
        lo, hi = self.support
        if self.name == "semicircle":
            c, r = self.params
            root = np.sqrt(z - c - r) * np.sqrt(z - c + r)
            return 2 / (r * r) * (z - c - root)
        if self.name == "arcsine":
            return 1 / (np.sqrt(z - lo) * np.sqrt(z - hi))
        if self.name == "uniform_interval":
            return (np.log(z - lo) - np.log(z - hi)) / (hi - lo)
        raise BadParameters(f"{self.name} has no Cauchy transform on the line")


@dataclass(frozen=True)
class Measure:
    """Probability measure; see :func:`make_atomic` and :func:`make_named`."""

    domain: Domain
    atom_positions: np.ndarray
    atom_masses: np.ndarray
    nodes: np.ndarray = field(default_factory=lambda: np.empty(0))
    weights: np.ndarray = field(default_factory=lambda: np.empty(0))
    family: Optional[NamedFamily] = None
    family_mass: float = 0.0
    node_density: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain(self.domain))
        for name in ("atom_positions", "atom_masses", "nodes", "weights", "node_density"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.array(arr, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        _check_measure(self)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.atom_positions.tolist(), self.atom_masses.tolist()))

    @property
    def total_mass(self) -> float:
        return float(self.atom_masses.sum() + self.weights.sum())

    @property
    def continuous_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def point_mass(self) -> Optional[float]:
        """Location of the point mass, or ``None`` if the measure is not one."""
        if len(self.atom_masses) == 1 and len(self.weights) == 0:
            return float(self.atom_positions[0])
        return None

    def mass_at(self, position: float, tol: float = POSITION_TOL) -> float:
        pos = self.atom_positions
        if self.domain is Domain.CIRCLE:
            d = np.abs(np.angle(np.exp(1j * (pos - position))))
        else:
            d = np.abs(pos - position)
        return float(self.atom_masses[d <= tol].sum())

    @property
    def first_moment(self) -> complex:
        """``∫ ζ dμ(ζ)`` for circle measures, ``∫ t dμ(t)`` otherwise."""
        if self.domain is Domain.CIRCLE:
            m = np.sum(self.atom_masses * np.exp(1j * self.atom_positions))
            if self.family is None:
                m += np.sum(self.weights * np.exp(1j * self.nodes))
            return complex(m)
        return complex(np.sum(self.atom_masses * self.atom_positions)
                       + np.sum(self.weights * self.nodes))

    def support_points(self) -> tuple[np.ndarray, np.ndarray]:
        """All atoms and quadrature nodes with their masses."""
        return (np.concatenate([self.atom_positions, self.nodes]),
                np.concatenate([self.atom_masses, self.weights]))


def _check_measure(mu: Measure) -> None:
    if mu.atom_positions.shape != mu.atom_masses.shape:
        raise ValidationError("atom positions and masses differ in length")
    if mu.nodes.shape != mu.weights.shape:
        raise ValidationError("nodes and weights differ in length")
    if np.any(mu.atom_masses <= 0) or np.any(mu.atom_masses > 1 + MASS_TOL):
        raise NonUnitMass("atom masses must lie in (0, 1]")
    if np.any(mu.weights < 0):
        raise NonUnitMass("quadrature weights must be nonnegative")
    total = mu.total_mass
    if abs(total - 1) > MASS_TOL:
        raise NonUnitMass(f"total mass {total!r} differs from 1")
    pts = np.concatenate([mu.atom_positions, mu.nodes])
    if mu.domain is Domain.HALFLINE and np.any(pts < 0):
        raise InvalidSupport("half-line measures need nonnegative positions")
    if mu.domain is Domain.CIRCLE and np.any((pts < 0) | (pts >= TWO_PI)):
        raise InvalidSupport("circle positions are angles in [0, 2π)")
    if len(mu.atom_positions) > 1 and np.any(np.diff(np.sort(mu.atom_positions)) <= POSITION_TOL):
        raise DuplicatePosition("atom positions must be distinct")


def _wrap(theta):
    return np.mod(np.asarray(theta, dtype=float), TWO_PI)


def make_atomic(pairs: Iterable[tuple[float, float]], domain=Domain.REAL) -> Measure:
    """Finite combination of point masses, atoms sorted by position.

    >>> make_atomic([(0, 0.5), (2, 0.5)]).atoms
    [(0.0, 0.5), (2.0, 0.5)]
    """
    domain = Domain(domain)
    pairs = [(float(p), float(m)) for p, m in pairs]
    if not pairs:
        raise NonUnitMass("no atoms given")
    pos = np.array([p for p, _ in pairs])
    mass = np.array([m for _, m in pairs])
    if np.any(mass <= 0):
        raise NonUnitMass("atom masses must be positive")
    if abs(mass.sum() - 1) > MASS_TOL:
        raise NonUnitMass(f"masses sum to {mass.sum()!r}, not 1")
    if domain is Domain.HALFLINE and np.any(pos < 0):
        raise InvalidSupport("negative position on the half-line")
    if domain is Domain.CIRCLE:
        pos = _wrap(pos)
    order = np.argsort(pos, kind="stable")
    pos, mass = pos[order], mass[order]
    if len(pos) > 1 and np.any(np.diff(pos) <= POSITION_TOL):
        raise DuplicatePosition("atom positions must be distinct")
    return Measure(domain, pos, mass / mass.sum())


def _family_nodes(fam: NamedFamily, n: int):
    """Quadrature nodes, weights and density values for a named family."""
    k = np.arange(1, n + 1)
    lo, hi = fam.support
    half, mid = (hi - lo) / 2, (hi + lo) / 2
    if fam.name == "arcsine":
        # Gauss-Chebyshev, first kind: absorbs the endpoint singularity
        s = np.cos((2 * k - 1) * np.pi / (2 * n))[::-1]
        x = mid + half * s
        w = np.full(n, 1.0 / n)
    elif fam.name == "semicircle":
        # Gauss-Chebyshev, second kind: exact for the square-root profile
        s = np.cos(k * np.pi / (n + 1))[::-1]
        x = mid + half * s
        w = 2 / (n + 1) * np.sin(k * np.pi / (n + 1)) ** 2
    elif fam.name == "uniform_interval":
        s, gw = roots_legendre(n)
        x = mid + half * s
        w = gw / 2
    else:
        x = TWO_PI * (k - 1) / n
        w = np.full(n, 1.0 / n)
    return x, w, fam.density(x)


_FAMILY_ALIASES = {"uniform": "uniform_interval", "haar": "haar_circle"}


def make_named(family: str, params: Sequence[float] = (), domain=Domain.REAL,
               n_nodes: int = DEFAULT_NODES) -> Measure:
    """Discretized named law: semicircle(center, radius), arcsine(a, b),
    uniform_interval(a, b), haar_circle or point(p)."""
    domain = Domain(domain)
    family = _FAMILY_ALIASES.get(family, family)
    params = tuple(float(p) for p in params)
    if family == "point":
        if len(params) != 1:
            raise BadParameters("point takes one parameter")
        return make_atomic([(params[0], 1.0)], domain)
    if family == "haar_circle":
        if domain is not Domain.CIRCLE:
            raise InvalidSupport("the Haar measure lives on the circle")
        params = ()
    elif family in ("semicircle", "arcsine", "uniform_interval"):
        if domain is Domain.CIRCLE:
            raise InvalidSupport(f"{family} is a law on the line")
        if len(params) != 2:
            raise BadParameters(f"{family} takes two parameters")
        if family == "semicircle" and params[1] <= 0:
            raise BadParameters("radius must be positive")
        if family != "semicircle" and not params[0] < params[1]:
            raise BadParameters("need a < b")
    else:
        raise BadParameters(f"unknown family {family!r}")
    if n_nodes < 2:
        raise BadParameters("need at least two nodes")
    fam = NamedFamily(family, params)
    if domain is Domain.HALFLINE and fam.support[0] < 0:
        raise InvalidSupport(f"{family}{params} reaches below zero")
    x, w, dens = _family_nodes(fam, n_nodes)
    return Measure(domain, np.empty(0), np.empty(0), x, w / w.sum(), fam, 1.0, dens)


def _map_family(fam: NamedFamily, scale: float, shift: float) -> NamedFamily:
    if fam.name == "semicircle":
        c, r = fam.params
        return NamedFamily(fam.name, (scale * c + shift, abs(scale) * r))
    if fam.name == "haar_circle":
        return fam
    a, b = sorted((scale * fam.params[0] + shift, scale * fam.params[1] + shift))
    return NamedFamily(fam.name, (a, b))


def pushforward_affine(mu: Measure, scale: float, shift: float) -> Measure:
    """Image of ``mu`` under ``x -> scale*x + shift`` (rotation by ``shift`` on the circle)."""
    scale, shift = float(scale), float(shift)
    if mu.domain is Domain.CIRCLE:
        if scale != 1:
            raise SupportViolation("circle measures only admit rotations")
        fn = lambda x: _wrap(x + shift)
    else:
        if scale == 0:
            raise SupportViolation("scale must be nonzero")
        if mu.domain is Domain.HALFLINE and (scale < 0 or shift < 0):
            raise SupportViolation("map would leave the half-line")
        fn = lambda x: scale * x + shift
    pos, mass = fn(mu.atom_positions), mu.atom_masses
    nodes, weights = fn(mu.nodes), mu.weights
    dens = mu.node_density
    if dens is not None and mu.domain is not Domain.CIRCLE:
        dens = dens / abs(scale)
    o = np.argsort(pos, kind="stable")
    on = np.argsort(nodes, kind="stable")
    fam = None if mu.family is None else _map_family(mu.family, scale, shift)
    return Measure(mu.domain, pos[o], mass[o], nodes[on], weights[on], fam, mu.family_mass,
                   None if dens is None else dens[on])


def combine(atoms: Sequence[tuple[float, float]], continuous: Optional[Measure],
            domain=Domain.REAL) -> Measure:
    """Atoms plus a continuous law carrying the remaining mass."""
    domain = Domain(domain)
    atom_mass = sum(m for _, m in atoms)
    if continuous is None:
        return make_atomic(atoms, domain)
    rest = 1 - atom_mass
    if rest <= 0:
        raise NonUnitMass("atoms exhaust the mass; nothing left for the continuous part")
    pos = np.array([p for p, _ in atoms], dtype=float)
    if domain is Domain.CIRCLE:
        pos = _wrap(pos)
    mass = np.array([m for _, m in atoms], dtype=float)
    o = np.argsort(pos, kind="stable")
    return Measure(domain, pos[o], mass[o], continuous.nodes, continuous.weights * rest,
                   continuous.family, continuous.family_mass * rest, continuous.node_density)


def from_spec(spec: dict) -> Measure:
    """Build a measure from the JSON spec dictionary.

    Keys: ``domain``, and ``atoms`` optionally combined with one of ``named``
    or ``grid``.  A named family or grid carries whatever mass the atoms leave.
    """
    try:
        domain = Domain(spec.get("domain", "real"))
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    atoms = [(a["pos"], a["mass"]) for a in spec.get("atoms", [])]
    named, grid = spec.get("named"), spec.get("grid")
    if named is not None and grid is not None:
        raise ValidationError("a spec may hold either 'named' or 'grid', not both")
    if named is None and grid is None:
        return make_atomic(atoms, domain)
    if named is not None:
        cont = make_named(named["family"], named.get("params", ()), domain,
                          int(named.get("n_nodes", DEFAULT_NODES)))
        return combine(atoms, cont, domain)
    nodes = np.asarray(grid["nodes"], dtype=float)
    weights = np.asarray(grid["weights"], dtype=float)
    if domain is Domain.CIRCLE:
        nodes = _wrap(nodes)
    o = np.argsort(nodes, kind="stable")
    pos = np.array([p for p, _ in atoms], dtype=float)
    if domain is Domain.CIRCLE:
        pos = _wrap(pos)
    mass = np.array([m for _, m in atoms], dtype=float)
    oa = np.argsort(pos, kind="stable")
    return Measure(domain, pos[oa], mass[oa], nodes[o], weights[o])


def load_measure(path) -> Measure:
    try:
        spec = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read measure spec {path}: {exc}") from None
    try:
        return from_spec(spec)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed measure spec {path}: {exc}") from None
