import math

import numpy as np
import pytest

from latdef import lattices as lt
from latdef.errors import CapExceeded, SingularBasis
from latdef.lattices import Param2D, Shape

SQRT3_2 = math.sqrt(3) / 2


def test_from_basis_identity():
    lat = lt.from_basis(np.eye(2))
    assert lat.volume == 1.0
    assert np.allclose(lat.gram, np.eye(2))


def test_from_basis_a2_scaled_unit_volume():
    scale = (2 / math.sqrt(3)) ** 0.5
    lat = lt.from_basis(np.array([[1.0, 0.5], [0.0, SQRT3_2]]) * scale)
    assert abs(lat.volume - 1.0) < 1e-12


def test_from_basis_singular():
    with pytest.raises(SingularBasis):
        lt.from_basis([[1.0, 2.0], [0.0, 0.0]])


def test_volume_matches_gram_det():
    rng = np.random.default_rng(7)
    for _ in range(20):
        b = rng.normal(size=(2, 2))
        if abs(np.linalg.det(b)) < 0.1:
            continue
        lat = lt.from_basis(b)
        assert abs(lat.volume - math.sqrt(np.linalg.det(lat.gram))) \
            <= 1e-12 * lat.volume


def test_named_a2_first_minimum():
    lat = lt.named("A2", 1.0)
    # brute force shortest vector over enumerated points
    pts = lt.enumerate_points(lat, None, 2.0)
    n2 = np.sort(np.einsum("ij,ij->i", pts, pts))
    n2 = n2[n2 > 1e-12]
    assert abs(n2[0] - 2 / math.sqrt(3)) < 1e-12


def test_named_z3_gram_identity():
    lat = lt.named("Z3", 1.0)
    assert np.allclose(lat.gram, np.eye(3), atol=1e-14)


def test_named_d3_first_shell_has_12_vectors():
    lat = lt.named("D3", 1.0)
    pts = lt.enumerate_points(lat, None, 1.5)
    n2 = np.einsum("ij,ij->i", pts, pts)
    n2 = np.sort(n2[n2 > 1e-12])
    shell = np.count_nonzero(n2 < n2[0] * (1 + 1e-9))
    assert shell == 12


def test_named_volume_rescale():
    for name in ("Z2", "A2", "D3", "D3star"):
        lat = lt.named(name, 3.7)
        assert abs(lat.volume - 3.7) < 1e-12


def test_reduce2d_unimodular_of_z2():
    lat = lt.from_basis(np.array([[1.0, 5.0], [0.0, 1.0]]))
    red = lt.reduce2d(lat)
    assert np.allclose(red.gram, np.eye(2), atol=1e-12)


def test_reduce2d_already_reduced():
    lat = lt.from_basis(np.array([[1.0, 0.5], [0.0, SQRT3_2]]))
    red = lt.reduce2d(lat)
    assert np.allclose(red.gram, lat.gram, atol=1e-12)


def test_reduce2d_random_unimodular_invariance():
    a2 = lt.named("A2", 1.0)
    u = np.array([[3, 1], [2, 1]])  # det 1
    lat = lt.from_basis(a2.basis @ u)
    red = lt.reduce2d(lat)
    assert np.allclose(red.gram, lt.reduce2d(a2).gram, atol=1e-12)


def test_reduce2d_idempotent():
    rng = np.random.default_rng(3)
    for _ in range(25):
        b = rng.normal(size=(2, 2))
        if abs(np.linalg.det(b)) < 0.05:
            continue
        red = lt.reduce2d(lt.from_basis(b))
        red2 = lt.reduce2d(red)
        assert np.array_equal(red.gram, red2.gram)
        g = red.gram
        assert -1e-12 <= 2 * g[0, 1] <= g[0, 0] + 1e-12
        assert g[0, 0] <= g[1, 1] + 1e-12


def test_dual_involution_and_volume():
    rng = np.random.default_rng(11)
    for _ in range(10):
        b = rng.normal(size=(3, 3))
        if abs(np.linalg.det(b)) < 0.1:
            continue
        lat = lt.from_basis(b)
        dd = lt.dual(lt.dual(lat))
        assert np.allclose(dd.basis, lat.basis, atol=1e-12)
        assert abs(lt.dual(lat).volume - 1 / lat.volume) < 1e-12 / lat.volume


def test_dual_zd_self():
    for name in ("Z2", "Z3"):
        lat = lt.named(name, 1.0)
        assert np.allclose(lt.dual(lat).gram, lat.gram, atol=1e-14)


def test_dual_a2_same_shape():
    a2 = lt.named("A2", 1.0)
    dualred = lt.reduce2d(lt.dual(a2))
    assert np.allclose(dualred.gram, lt.reduce2d(a2).gram, atol=1e-12)
    assert abs(dualred.volume - 1.0) < 1e-12


def test_dual_volume_half():
    lat = lt.named("Z2", 2.0)
    assert abs(lt.dual(lat).volume - 0.5) < 1e-14


def test_cell_center():
    assert np.allclose(lt.cell_center(lt.named("Z2", 1.0)), [0.5, 0.5])
    assert np.allclose(lt.cell_center(lt.named("Z3", 1.0)), [0.5, 0.5, 0.5])
    a2 = lt.reduce2d(lt.named("A2", 1.0))
    assert np.allclose(lt.cell_center(a2),
                       0.5 * (a2.basis[:, 0] + a2.basis[:, 1]))


def test_param_roundtrip_a2():
    p = Param2D(0.5, SQRT3_2, 1.0)
    lat = lt.param_to_lattice(p)
    assert np.allclose(lt.reduce2d(lat).gram, lt.reduce2d(lt.named("A2", 1.0)).gram,
                       atol=1e-12)


def test_param_roundtrip_z2():
    lat = lt.param_to_lattice(Param2D(0.0, 1.0, 1.0))
    assert np.allclose(lat.gram, np.eye(2), atol=1e-14)


def test_param_roundtrip_interior():
    p = Param2D(0.3, 1.2, 2.0)
    q = lt.lattice_to_param(lt.param_to_lattice(p))
    assert abs(q.x - p.x) < 1e-10 and abs(q.y - p.y) < 1e-10
    assert abs(q.volume - p.volume) < 1e-10


def test_param_canonical_under_unimodular():
    rng = np.random.default_rng(5)
    u = np.array([[2, 3], [1, 2]])  # det 1
    for _ in range(20):
        x = rng.uniform(0.02, 0.48)
        y = rng.uniform(math.sqrt(1 - x * x) + 0.01, 4.0)
        lat = lt.param_to_lattice(Param2D(x, y, 1.0))
        p1 = lt.lattice_to_param(lat)
        p2 = lt.lattice_to_param(lt.from_basis(lat.basis @ u))
        assert abs(p1.x - p2.x) < 1e-10 and abs(p1.y - p2.y) < 1e-10


def test_param_volume_consistency():
    p = Param2D(0.2, 1.5, 3.0)
    assert abs(lt.param_to_lattice(p).volume - 3.0) < 1e-12 * 3.0


def test_enumerate_z2_unit_ball():
    pts = lt.enumerate_points(lt.named("Z2", 1.0), None, 1.01)
    assert len(pts) == 5


def test_enumerate_a2_first_shell():
    lat = lt.named("A2", 1.0)
    r = 1.1 * (2 / math.sqrt(3)) ** 0.5
    assert len(lt.enumerate_points(lat, None, r)) == 7


def test_enumerate_shifted_center():
    pts = lt.enumerate_points(lt.named("Z2", 1.0), (0.5, 0.5), 0.8)
    assert len(pts) == 4


def test_enumerate_cap():
    with pytest.raises(CapExceeded):
        lt.enumerate_points(lt.named("Z2", 1.0), None, 100.0, cap=100)


def test_enumerate_invariant_under_reduction():
    rng = np.random.default_rng(13)
    for _ in range(10):
        b = rng.normal(size=(2, 2)) * 1.5
        if abs(np.linalg.det(b)) < 0.2:
            continue
        lat = lt.from_basis(b)
        p1 = lt.enumerate_points(lat, None, 6.0)
        p2 = lt.enumerate_points(lt.reduce2d(lat), None, 6.0)
        s1 = sorted(map(tuple, np.round(p1, 9)))
        s2 = sorted(map(tuple, np.round(p2, 9)))
        assert s1 == s2


@pytest.mark.parametrize("x,y,expect", [
    (0.5, SQRT3_2, Shape.TRIANGULAR),
    (0.0, 1.0, Shape.SQUARE),
    (0.0, 1.4, Shape.RECTANGULAR),
    (0.2, math.sqrt(1 - 0.04), Shape.RHOMBIC),
    (0.5, 1.3, Shape.RHOMBIC),
    (0.17, 1.31, Shape.GENERIC),
])
def test_classify_shape(x, y, expect):
    assert lt.classify_shape(Param2D(x, y, 1.0)) == expect


def test_classify_from_lattice():
    assert lt.classify_shape(lt.named("A2", 1.0)) == Shape.TRIANGULAR
