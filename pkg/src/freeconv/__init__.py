"""Numerical free, boolean and monotone convolutions of probability measures.

Measures on the line, the half-line ``[0, +∞)`` and the unit circle are
convolved through their analytic transforms.  Free convolutions are computed
from subordination functions obtained as attracting fixed points of analytic
self-maps; densities and atoms are recovered from boundary limits.
"""
from __future__ import annotations

from .dwolff import (FixedPointResult, SolverConfig, denjoy_wolff, invert_disk, invert_halfplane,
                     invert_slitplane)
from .errors import FreeConvError, SolverError, ValidationError
from .free import (AtomReport, SubordinationPair, atoms_free_add, atoms_free_mult, free_add,
                   free_mult, free_mult_circle, free_mult_halfline, two_atom_add_oracle,
                   two_atom_mult_oracle)
from .measure import (Domain, DomainPoint, DomainTag, Measure, NamedFamily, combine, from_spec,
                      load_measure, make_atomic, make_named, pushforward_affine)
from .otherconv import (AbelEstimate, abel_estimate, boolean_add, boolean_mult_circle,
                        monotone_add, monotone_mult_halfline)
from .recovery import (DensityGrid, atom_mass_circle, atom_mass_real, density_circle, density_real,
                       locate_atoms, recover_grid)
from .semigroup import (PowerResult, atoms_add_power, atoms_mult_power_circle,
                        atoms_mult_power_halfline, boolean_to_free_add, boolean_to_free_mult_circle,
                        free_add_power, free_mult_power_circle, free_mult_power_halfline)
from .transforms import (Law, TransformHandle, eval_eta, eval_F, eval_G, eval_phi, eval_psi,
                         law_of, nevanlinna_read, sigma_transform, voiculescu_phi)

__version__ = "0.1.0"

__all__ = [
    "abel_estimate",
    "AbelEstimate",
    "atom_mass_circle",
    "atom_mass_real",
    "AtomReport",
    "atoms_add_power",
    "atoms_free_add",
    "atoms_free_mult",
    "atoms_mult_power_circle",
    "atoms_mult_power_halfline",
    "boolean_add",
    "boolean_mult_circle",
    "boolean_to_free_add",
    "boolean_to_free_mult_circle",
    "combine",
    "denjoy_wolff",
    "density_circle",
    "density_real",
    "DensityGrid",
    "Domain",
    "DomainPoint",
    "DomainTag",
    "eval_eta",
    "eval_F",
    "eval_G",
    "eval_phi",
    "eval_psi",
    "FixedPointResult",
    "FreeConvError",
    "free_add",
    "free_add_power",
    "free_mult",
    "free_mult_circle",
    "free_mult_halfline",
    "free_mult_power_circle",
    "free_mult_power_halfline",
    "from_spec",
    "invert_disk",
    "invert_halfplane",
    "invert_slitplane",
    "Law",
    "law_of",
    "load_measure",
    "locate_atoms",
    "make_atomic",
    "make_named",
    "Measure",
    "monotone_add",
    "monotone_mult_halfline",
    "NamedFamily",
    "nevanlinna_read",
    "PowerResult",
    "pushforward_affine",
    "recover_grid",
    "sigma_transform",
    "SolverConfig",
    "SolverError",
    "SubordinationPair",
    "TransformHandle",
    "two_atom_add_oracle",
    "two_atom_mult_oracle",
    "ValidationError",
    "voiculescu_phi",
]
