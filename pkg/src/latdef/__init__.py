"""latdef: lattice energies with periodic arrays of vacancies and
substitutional defects.

Core pieces: lattice geometry (``lattices``), potential families and defect
specs (``potentials``), certified lattice sums (``sums``), fundamental-domain
optimization (``optimize``), theorem experiments (``experiments``) and a CLI
(``latdef``).
"""
from ._kernels import BACKEND as kernel_backend
from .lattices import Lattice, Param2D, Shape, from_basis, named
from .potentials import (DefectEntry, DefectSpec, DefectModified, Gaussian,
                         InversePower, LennardJones, YukawaPower)
from .sums import EnergyValue, SumConfig

__all__ = [
    "kernel_backend", "Lattice", "Param2D", "Shape", "from_basis", "named",
    "DefectEntry", "DefectSpec", "DefectModified", "Gaussian", "InversePower",
    "LennardJones", "YukawaPower", "EnergyValue", "SumConfig",
]

__version__ = "0.1.0"
