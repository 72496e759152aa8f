"""Lattice representation, 2d reduction, duality, fundamental-domain
parametrization, point enumeration and shape classification.

Conventions: basis vectors are the *columns* of ``Lattice.basis``. The 2d
fundamental domain is x in [0, 1/2], x^2 + y^2 >= 1, with the lattice
``sqrt(V/y) * [Z(1,0) + Z(x,y)]``; a Lagrange-Gauss reduced basis is
normalized so the Gram off-diagonal satisfies 0 <= 2 g12 <= g11.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import SingularBasis

SQRT3_2 = math.sqrt(3.0) / 2.0


class Shape(enum.Enum):
    TRIANGULAR = "Triangular"
    SQUARE = "Square"
    RECTANGULAR = "Rectangular"
    RHOMBIC = "Rhombic"
    GENERIC = "Generic"


@dataclass(frozen=True)
class Lattice:
    """A full-rank lattice: basis columns u_1..u_d plus cached Gram/volume."""

    basis: np.ndarray
    gram: np.ndarray
    volume: float

    @property
    def dim(self):
        return self.basis.shape[0]

    def scaled(self, t):
        """The lattice t * L."""
        return from_basis(self.basis * t)

    def with_volume(self, volume):
        """Rescale so |det basis| = volume."""
        t = (volume / self.volume) ** (1.0 / self.dim)
        return self.scaled(t)


def from_basis(basis):
    """Build a Lattice from a d x d basis matrix (columns are basis vectors)."""
    b = np.array(basis, dtype=np.float64)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise SingularBasis(f"basis must be square, got shape {b.shape}")
    d = b.shape[0]
    det = np.linalg.det(b)
    scale = np.max(np.linalg.norm(b, axis=0))
    if scale == 0.0 or abs(det) < 1e-14 * scale**d:
        raise SingularBasis("basis columns are linearly dependent")
    b.setflags(write=False)
    gram = b.T @ b
    gram.setflags(write=False)
    return Lattice(basis=b, gram=gram, volume=abs(det))


_NAMED_BASES = {
    "Z1": [[1.0]],
    "Z2": [[1.0, 0.0], [0.0, 1.0]],
    "Z3": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    "A2": [[1.0, 0.5], [0.0, SQRT3_2]],
    # FCC and BCC, columns as generators
    "D3": [[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]],
    "D3star": [[-1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 1.0, -1.0]],
}


def named(name, volume=1.0):
    """A named lattice (Z1, Z2, Z3, A2, D3, D3star) rescaled to |det| = volume."""
    if name not in _NAMED_BASES:
        raise KeyError(f"unknown lattice name {name!r}")
    if volume <= 0:
        raise ValueError("volume must be positive")
    return from_basis(_NAMED_BASES[name]).with_volume(volume)


def reduce2d(lat):
    """Lagrange-Gauss reduction of a 2d lattice.

    Returns the same point set with |u1| <= |u2| <= |u2 +- u1| and the sign
    convention 0 <= 2 g12 <= g11.
    """
    if lat.dim != 2:
        raise ValueError("reduce2d requires d = 2")
    u = lat.basis[:, 0].copy()
    v = lat.basis[:, 1].copy()
    for _ in range(256):
        if v @ v < u @ u:
            u, v = v, u
        mu = round((u @ v) / (u @ u))
        if mu == 0:
            break
        v = v - mu * u
    else:  # pragma: no cover - reduction always terminates
        raise RuntimeError("reduction failed to converge")
    if u @ v < 0:
        v = -v
    return from_basis(np.column_stack([u, v]))


def dual(lat):
    """The dual lattice, basis = inverse-transpose of the primal basis."""
    return from_basis(np.linalg.inv(lat.basis).T)


def cell_center(lat):
    """Half-sum of the basis vectors (unit-cell center of a reduced basis)."""
    return 0.5 * np.sum(lat.basis, axis=1)


@dataclass(frozen=True)
class Param2D:
    """Canonical fundamental-domain coordinates of a 2d lattice shape."""

    x: float
    y: float
    volume: float = 1.0

    def __post_init__(self):
        if not (-1e-9 <= self.x <= 0.5 + 1e-9):
            raise ValueError(f"x = {self.x} outside [0, 1/2]")
        if self.y <= 0 or self.volume <= 0:
            raise ValueError("y and volume must be positive")
        if self.x**2 + self.y**2 < 1.0 - 1e-9:
            raise ValueError(f"({self.x}, {self.y}) below the unit circle")


def param_to_lattice(p):
    """Lattice sqrt(V/y) * [Z(1,0) + Z(x,y)]; basis is already reduced."""
    s = math.sqrt(p.volume / p.y)
    return from_basis([[s, s * p.x], [0.0, s * p.y]])


def lattice_to_param(lat):
    """Reduce, then map to the canonical (x, y, V) fundamental-domain point."""
    red = reduce2d(lat)
    g = red.gram
    x = g[0, 1] / g[0, 0]
    y = math.sqrt(max(g[1, 1] / g[0, 0] - x * x, 0.0))
    return Param2D(x=min(max(x, 0.0), 0.5), y=y, volume=red.volume)


def enumerate_points(lat, center, radius, cap=10**7):
    """All points p + center with p in L and |p + center| <= radius.

    Integer bounds come from the rows of basis^-1, so no point is missed.
    Raises CapExceeded past ``cap`` points.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    c = np.zeros(lat.dim) if center is None else np.asarray(center, dtype=float)
    pts, _ = _kernels.ball_points(lat.basis, c, radius * radius, cap)
    return pts


def classify_shape(lat_or_param, tol=1e-4):
    """Classify a 2d lattice shape from its canonical (x, y) coordinates.

    Triangular and square take precedence; rhombic covers both equal-length
    conventions (|u1| = |u2|, i.e. x^2 + y^2 = 1, and |u2| = |u2 - u1|,
    i.e. x = 1/2).
    """
    p = lat_or_param
    if isinstance(p, Lattice):
        p = lattice_to_param(p)
    x, y = p.x, p.y
    if abs(x - 0.5) <= tol and abs(y - SQRT3_2) <= tol:
        return Shape.TRIANGULAR
    if abs(x) <= tol and abs(y - 1.0) <= tol:
        return Shape.SQUARE
    if abs(x) <= tol and y > 1.0 + tol:
        return Shape.RECTANGULAR
    if abs(x * x + y * y - 1.0) <= tol or abs(x - 0.5) <= tol:
        return Shape.RHOMBIC
    return Shape.GENERIC


def shortest_vector_sq(lat):
    """Squared length of a shortest nonzero lattice vector."""
    if lat.dim == 2:
        return float(reduce2d(lat).gram[0, 0])
    r2 = float(min(np.sum(lat.basis**2, axis=0)))
    pts, _ = _kernels.ball_points(lat.basis, np.zeros(lat.dim),
                                  r2 * (1 + 1e-12), 10**6)
    n2 = np.einsum("ij,ij->i", pts, pts)
    n2 = n2[n2 > 1e-18 * r2]
    return float(np.min(n2)) if n2.size else r2
