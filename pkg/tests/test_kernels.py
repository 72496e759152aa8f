"""Backend agreement: the Cython kernels must reproduce the NumPy fallback."""
import math

import numpy as np
import pytest

from latdef import _kernels
from latdef._kernels import _pyk
from latdef.errors import CapExceeded

try:
    from latdef._kernels import _ck
except ImportError:
    _ck = None

needs_ext = pytest.mark.skipif(_ck is None, reason="cython backend not built")

BASES = [
    np.eye(2),
    np.array([[1.0, 0.5], [0.0, math.sqrt(3) / 2]]) * (2 / math.sqrt(3)) ** 0.5,
    np.array([[0.7, 0.3], [0.1, 1.9]]),
    np.eye(3),
    np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]) * 0.5 ** (1 / 3),
]


@needs_ext
@pytest.mark.parametrize("basis", BASES)
def test_ball_points_identical(basis):
    """Same points in the same order; coordinates may differ by an ulp
    (BLAS fused multiply-add vs the scalar loop)."""
    c = np.full(basis.shape[0], 0.21)
    p1, m1 = _ck.ball_points(basis, c, 9.0, 10**6)
    p2, m2 = _pyk.ball_points(basis, c, 9.0, 10**6)
    assert np.array_equal(m1, m2)
    assert np.allclose(p1, p2, rtol=0, atol=1e-13)


@needs_ext
@pytest.mark.parametrize("mode", [_pyk.W_NONE, _pyk.W_PARITY, _pyk.W_COS])
def test_ball_norms_identical(mode):
    basis = BASES[2]
    phase = np.array([0.31, 0.47]) if mode == _pyk.W_COS else None
    r1, w1 = _ck.ball_norms(basis, np.zeros(2), 25.0, 10**6, mode, phase)
    r2, w2 = _pyk.ball_norms(basis, np.zeros(2), 25.0, 10**6, mode, phase)
    assert len(r1) == len(r2)
    assert np.allclose(r1, r2, rtol=1e-14, atol=1e-13)
    if mode == _pyk.W_NONE:
        assert w1 is None and w2 is None
    elif mode == _pyk.W_PARITY:
        assert np.array_equal(w1, w2)
    else:
        assert np.allclose(w1, w2, rtol=0, atol=1e-14)


@needs_ext
@pytest.mark.parametrize("code,params,defect", [
    (_pyk.F_GAUSS, (math.pi,), ((), ())),
    (_pyk.F_POWER, (2.0,), ((), ())),
    (_pyk.F_YUK, (0.8, 1.5), ((), ())),
    (_pyk.F_LJ, (1.0, 1.0, 3.0, 6.0), ((), ())),
    (_pyk.F_GAUSS, (1.3,), ((0.5, 0.25), (4.0, 9.0))),
])
def test_family_sum_agreement(code, params, defect):
    basis = BASES[1]
    r2, _ = _pyk.ball_norms(basis, np.zeros(2), 30.0, 10**6)
    r2 = r2[r2 > 1e-18]
    idx = np.argsort(-r2, kind="stable")
    r2 = r2[idx]
    s1 = _ck.family_sum(r2, None, code, params, *defect)
    s2 = _pyk.family_sum(r2, None, code, params, *defect)
    # Neumaier vs exactly-rounded fsum: equal to within an ulp or two
    assert s1 == pytest.approx(s2, rel=1e-14)


@needs_ext
def test_compensated_sum_agreement():
    rng = np.random.default_rng(1)
    vals = rng.normal(size=5000) * 10.0 ** rng.integers(-8, 8, size=5000)
    assert _ck.compensated_sum(vals) == pytest.approx(
        _pyk.compensated_sum(vals), rel=1e-14)


def test_cap_exceeded_both_backends():
    with pytest.raises(CapExceeded):
        _pyk.ball_points(np.eye(2), np.zeros(2), 10000.0, 50)
    if _ck is not None:
        with pytest.raises(CapExceeded):
            _ck.ball_points(np.eye(2), np.zeros(2), 10000.0, 50)


def test_dispatch_high_dimension_falls_back():
    # d = 4 is handled by the numpy backend regardless of the extension
    basis = np.eye(4)
    pts, mcs = _kernels.ball_points(basis, np.zeros(4), 1.01, 10**6)
    assert len(pts) == 9  # origin + 8 unit vectors


def test_enumeration_is_lexicographic():
    r2, _ = _pyk.ball_norms(np.eye(2), np.zeros(2), 2.25, 100)
    pts, mcs = _pyk.ball_points(np.eye(2), np.zeros(2), 2.25, 100)
    assert np.array_equal(mcs, np.array(sorted(map(tuple, mcs))))
