import math

import numpy as np
import pytest

from latdef import lattices as lt, optimize as opt, sums
from latdef.errors import ObjectiveFailure, StepTooLarge
from latdef.lattices import Param2D, Shape
from latdef.optimize import GridSpec
from latdef.potentials import DefectModified, DefectSpec, Gaussian, InversePower
from latdef.sums import SumConfig

CFG = SumConfig(tol=1e-11)
GRID = GridSpec(n_x=32, n_y=32)
SQRT3_2 = math.sqrt(3) / 2


def theta_obj(alpha):
    return lambda L: sums.theta(L, alpha, CFG).value


def zeta_obj(two_s):
    return lambda L: sums.epstein_zeta(L, two_s, CFG).value


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_minimize_theta_triangular(alpha):
    res = opt.minimize2d(theta_obj(alpha), 1.0, GRID)
    assert res.shape == Shape.TRIANGULAR
    assert abs(res.best_param.x - 0.5) < 1e-4
    assert abs(res.best_param.y - SQRT3_2) < 1e-4
    assert res.certified and not res.unbounded
    assert res.runner_up_gap > 0


@pytest.mark.parametrize("s", [1.5, 2.0, 4.0])
def test_minimize_zeta_triangular(s):
    res = opt.minimize2d(zeta_obj(2 * s), 1.0, GRID)
    assert res.shape == Shape.TRIANGULAR
    assert abs(res.best_param.x - 0.5) < 1e-4
    assert abs(res.best_param.y - SQRT3_2) < 1e-4


def test_maximize_alternating_triangular():
    obj = lambda L: sums.theta_alternating(L, 1.0, CFG).value
    res = opt.minimize2d(obj, 1.0, GRID, sense="max")
    assert res.shape == Shape.TRIANGULAR
    # best_value is reported in the caller's orientation
    assert res.best_value == pytest.approx(
        sums.theta_alternating(lt.named("A2", 1.0), 1.0, CFG).value, rel=1e-9)


def test_minimize_defect_gaussian_small_alpha_not_triangular():
    f = DefectModified(Gaussian(0.05), DefectSpec(((2, 0.1, ()),)))
    obj = lambda L: sums.energy(L, f, CFG).value
    res = opt.minimize2d(obj, 1.0, GRID)
    a2val = obj(lt.named("A2", 1.0))
    assert res.best_value < a2val - 1e-4


def test_grid_refine_consistency():
    res = opt.minimize2d(theta_obj(1.0), 1.0, GRID)
    assert res.best_value <= res.grid_best_value + 1e-15


def test_result_param_inside_domain():
    res = opt.minimize2d(theta_obj(0.8), 1.0, GRID)
    p = res.best_param
    assert -1e-12 <= p.x <= 0.5 + 1e-12
    assert p.x**2 + p.y**2 >= 1 - 1e-9


def test_objective_failure_propagates():
    def bad(L):
        raise ValueError("boom")
    with pytest.raises(ObjectiveFailure):
        opt.minimize2d(bad, 1.0, GridSpec(n_x=8, n_y=8))


def test_workers_bit_identical():
    g1 = GridSpec(n_x=24, n_y=24, workers=1)
    g4 = GridSpec(n_x=24, n_y=24, workers=4)
    r1 = opt.minimize2d(theta_obj(1.0), 1.0, g1)
    r4 = opt.minimize2d(theta_obj(1.0), 1.0, g4)
    assert r1.best_value == r4.best_value
    assert r1.best_param == r4.best_param
    assert r1.runner_up_gap == r4.runner_up_gap


def test_orthorhombic_theta_cubic():
    res = opt.minimize_orthorhombic(theta_obj(1.0), 2, 1.0, n_grid=17)
    assert res.is_cubic
    assert res.aspect == (1.0, 1.0)


def test_orthorhombic_centered_max_cubic():
    def obj(L):
        return sums.theta_shifted(L, lt.cell_center(L), 1.0, CFG).value
    res = opt.minimize_orthorhombic(obj, 2, 1.0, n_grid=17, sense="max")
    assert res.is_cubic


def test_orthorhombic_d3_zeta_cubic():
    res = opt.minimize_orthorhombic(zeta_obj(4.0), 3, 1.0, n_grid=9,
                                    log_ratio_max=0.8)
    assert res.is_cubic


def test_orthorhombic_rejects_bad_dim():
    with pytest.raises(ValueError):
        opt.minimize_orthorhombic(theta_obj(1.0), 4, 1.0)


def test_phase_scan_constant_triangular():
    # homogeneous objective: shape independent of the control
    family = lambda s: zeta_obj(2 * s)
    rows = opt.phase_scan(family, [1.5, 2.0, 3.0], 1.0, GRID)
    assert [r.shape for r in rows] == [Shape.TRIANGULAR] * 3
    assert [r.control for r in rows] == [1.5, 2.0, 3.0]


def test_phase_scan_records_failures():
    def family(c):
        if c > 1.5:
            def bad(L):
                raise ValueError("nope")
            return bad
        return theta_obj(1.0)
    rows = opt.phase_scan(family, [1.0, 2.0], 1.0, GridSpec(n_x=8, n_y=8))
    assert rows[0].error is None
    assert rows[1].error is not None and math.isnan(rows[1].value)


def test_phase_scan_warm_start_independence():
    family = lambda a: theta_obj(a)
    controls = [0.5, 1.0, 2.0]
    rows = opt.phase_scan(family, controls, 1.0, GRID)
    cold = [opt.minimize2d(family(c), 1.0, GRID) for c in controls]
    for row, ref in zip(rows, cold):
        assert row.shape == ref.shape
        assert abs(row.value - ref.best_value) < 1e-6


def test_distinct_shapes():
    family = lambda a: theta_obj(a)
    rows = opt.phase_scan(family, [0.5, 1.0], 1.0, GRID)
    assert opt.distinct_shapes(rows) == [Shape.TRIANGULAR]


def test_hessian_at_a2_positive_definite():
    h = opt.hessian_check(theta_obj(1.0), Param2D(0.5, SQRT3_2, 1.0))
    assert h["positive_definite"]
    assert np.linalg.norm(h["grad"]) < 1e-7


def test_hessian_saddle_at_z2():
    spec = DefectSpec(((2, 2.0, ()),))
    obj = lambda L: sums.energy_defect(L, InversePower(2.0), spec, CFG).value
    h = opt.hessian_check(obj, Param2D(0.0, 1.0, 1.0))
    eig = h["eigenvalues"]
    assert eig[0] < 0 < eig[1]
    assert not h["positive_definite"]


def test_hessian_generic_point_has_gradient():
    h = opt.hessian_check(theta_obj(1.0), Param2D(0.2, 1.3, 1.0))
    assert np.linalg.norm(h["grad"]) > 1e-3


def test_hessian_step_too_large():
    # a kink from abs() makes the Richardson levels disagree
    obj = lambda L: abs(lt.lattice_to_param(L).y - 1.17)
    with pytest.raises(StepTooLarge):
        opt.hessian_check(obj, Param2D(0.2, 1.17, 1.0), h=1e-2)


def test_unbounded_detection():
    # objective strictly decreasing in y at the cap
    obj = lambda L: -lt.lattice_to_param(L).y
    res = opt.minimize2d(obj, 1.0, GridSpec(n_x=8, n_y=12, refine=False))
    assert res.unbounded
