"""Kernel backend selection.

The compiled Cython backend (``_ck``) handles the hot d=2/3 paths; the NumPy
backend (``_pyk``) covers everything and is the fallback when the extension
is unavailable or ``LATDEF_PURE_PYTHON`` is set.
"""
import os

import numpy as np

from . import _pyk
from ._pyk import F_GAUSS, F_LJ, F_POWER, F_YUK, W_COS, W_NONE, W_PARITY

_impl = None
if not os.environ.get("LATDEF_PURE_PYTHON"):
    try:
        from . import _ck as _impl
    except ImportError:
        _impl = None

BACKEND = "cython" if _impl is not None else "python"


def _pick(basis):
    if _impl is not None and np.shape(basis)[0] in (2, 3):
        return _impl
    return _pyk


def ball_points(basis, center, r2max, cap):
    return _pick(basis).ball_points(basis, center, r2max, cap)


def ball_norms(basis, center, r2max, cap, weight_mode=W_NONE, phase=None):
    return _pick(basis).ball_norms(basis, center, r2max, cap, weight_mode, phase)


def family_sum(r2, w, code, params, def_a=(), def_k2=()):
    mod = _impl if _impl is not None else _pyk
    return mod.family_sum(r2, w, code, params, def_a, def_k2)


def compensated_sum(values):
    mod = _impl if _impl is not None else _pyk
    return mod.compensated_sum(values)
