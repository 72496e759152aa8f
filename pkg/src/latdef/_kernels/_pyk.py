"""Pure-NumPy kernel backend.

Same contract as the Cython backend ``_ck``: deterministic lexicographic
enumeration order over the integer coordinate box, and a compensated
(exactly rounded, via ``math.fsum``) final accumulation.
"""
import math

import numpy as np

from ..errors import CapExceeded

BACKEND = "python"

# weight modes for ball_norms
W_NONE = 0
W_PARITY = 1
W_COS = 2

# potential family codes for family_terms
F_GAUSS = 0   # params (beta,)            term = exp(-beta r2)
F_POWER = 1   # params (s,)               term = r2^-s
F_YUK = 2     # params (sigma, s)         term = exp(-sigma r2) r2^-s
F_LJ = 3      # params (c1, c2, x1, x2)   term = c2 r2^-x2 - c1 r2^-x1

_CHUNK = 1 << 21


def _box(basis, center, r2max):
    """Integer coordinate ranges [lo, hi] covering the ball |B m + c| <= R."""
    binv = np.linalg.inv(basis)
    m0 = -binv @ center
    row_norms = np.linalg.norm(binv, axis=1)
    r = math.sqrt(max(r2max, 0.0))
    lo = np.ceil(m0 - r * row_norms - 1e-12).astype(np.int64)
    hi = np.floor(m0 + r * row_norms + 1e-12).astype(np.int64)
    return lo, hi


def _iter_chunks(lo, hi):
    """Yield (n, d) int64 arrays of box coordinates in lexicographic order."""
    d = len(lo)
    counts = [int(h - l + 1) for l, h in zip(lo, hi)]
    if any(c <= 0 for c in counts):
        return
    tail = 1
    for c in counts[1:]:
        tail *= c
    axes = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(lo, hi)]
    step = max(1, _CHUNK // max(tail, 1))
    first = axes[0]
    for i in range(0, counts[0], step):
        sub = [first[i:i + step]] + axes[1:]
        grids = np.meshgrid(*sub, indexing="ij")
        yield np.stack([g.reshape(-1) for g in grids], axis=1)


def ball_points(basis, center, r2max, cap):
    """All points B m + center with squared norm <= r2max, lexicographic in m.

    Returns (points (n, d) float64, mcoords (n, d) int64). Raises CapExceeded
    when more than ``cap`` points fall inside the ball.
    """
    basis = np.ascontiguousarray(basis, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    lo, hi = _box(basis, center, r2max)
    kept_p, kept_m, total = [], [], 0
    bt = basis.T
    for m in _iter_chunks(lo, hi):
        pts = m @ bt + center
        r2 = np.einsum("ij,ij->i", pts, pts)
        keep = r2 <= r2max * (1 + 1e-14) + 1e-300
        n = int(np.count_nonzero(keep))
        if n:
            total += n
            if total > cap:
                raise CapExceeded(f"point count exceeds cap ({cap})")
            kept_p.append(pts[keep])
            kept_m.append(m[keep])
    d = basis.shape[0]
    if not kept_p:
        return np.empty((0, d)), np.empty((0, d), dtype=np.int64)
    return np.concatenate(kept_p), np.concatenate(kept_m)


def ball_norms(basis, center, r2max, cap, weight_mode=W_NONE, phase=None):
    """Squared norms |B m + center|^2 <= r2max with optional per-point weights.

    weight_mode: W_NONE -> (r2, None); W_PARITY -> w = (-1)^(sum m_i);
    W_COS -> w = cos(2 pi m . phase). Lexicographic enumeration order.
    """
    basis = np.ascontiguousarray(basis, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    lo, hi = _box(basis, center, r2max)
    kept_r2, kept_w, total = [], [], 0
    bt = basis.T
    for m in _iter_chunks(lo, hi):
        pts = m @ bt + center
        r2 = np.einsum("ij,ij->i", pts, pts)
        keep = r2 <= r2max * (1 + 1e-14) + 1e-300
        n = int(np.count_nonzero(keep))
        if not n:
            continue
        total += n
        if total > cap:
            raise CapExceeded(f"point count exceeds cap ({cap})")
        kept_r2.append(r2[keep])
        if weight_mode == W_PARITY:
            par = np.sum(m[keep], axis=1) & 1
            kept_w.append(1.0 - 2.0 * par.astype(np.float64))
        elif weight_mode == W_COS:
            kept_w.append(np.cos(2.0 * np.pi * (m[keep] @ phase)))
    if not kept_r2:
        empty = np.empty(0)
        return empty, (empty.copy() if weight_mode != W_NONE else None)
    r2 = np.concatenate(kept_r2)
    w = np.concatenate(kept_w) if weight_mode != W_NONE else None
    return r2, w


def _terms(r2, code, params):
    if code == F_GAUSS:
        return np.exp(-params[0] * r2)
    if code == F_POWER:
        return r2 ** (-params[0])
    if code == F_YUK:
        return np.exp(-params[0] * r2) * r2 ** (-params[1])
    if code == F_LJ:
        c1, c2, x1, x2 = params
        return c2 * r2 ** (-x2) - c1 * r2 ** (-x1)
    raise ValueError(f"unknown family code {code}")


def family_sum(r2, w, code, params, def_a=(), def_k2=()):
    """Compensated sum of w * f(r2) with f the coded potential family.

    ``def_a``/``def_k2`` add the defect combination f(r2) - sum a_j f(k2_j r2).
    Caller passes r2 (and w) already sorted by descending r2.
    """
    t = _terms(r2, code, params)
    for a, k2 in zip(def_a, def_k2):
        t = t - a * _terms(k2 * r2, code, params)
    if w is not None:
        t = t * w
    return math.fsum(t)


def compensated_sum(values):
    """Deterministic compensated sum of a 1-d float array."""
    return math.fsum(np.asarray(values, dtype=np.float64))
