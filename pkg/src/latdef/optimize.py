"""Grid + Nelder-Mead optimization of lattice functionals over the 2d
fundamental domain and over orthorhombic families, plus phase scans.

Determinism: grid values are independent per node, argmin ties (values within
a certified-noise tolerance) break lexicographically in (x, y), and the final
point snaps to the most symmetric lattice whose value is indistinguishable
from the optimum. Output is identical for any worker count.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as _nm_minimize

from . import lattices
from .errors import ObjectiveFailure, StepTooLarge
from .lattices import Param2D, Shape, SQRT3_2

_Y_MIN_DEFAULT = SQRT3_2 * 0.99


@dataclass(frozen=True)
class GridSpec:
    """Fundamental-domain grid: n_x uniform in x, n_y log-spaced in y."""

    n_x: int = 64
    n_y: int = 64
    x_range: tuple = (0.0, 0.5)
    y_range: tuple = (_Y_MIN_DEFAULT, 4.0)
    refine: bool = True
    nm_tol: float = 1e-8
    workers: int = 1
    shape_tol: float = 1e-4
    tie_rtol: float = 1e-11     # grid values this close count as exact ties
    snap_rtol: float = 1e-9     # symmetry snap threshold, relative to |value|
    snap: bool = True

    def __post_init__(self):
        if self.n_x < 8 or self.n_y < 8:
            raise ValueError("n_x and n_y must be at least 8")

    def xs(self):
        return np.linspace(self.x_range[0], self.x_range[1], self.n_x)

    def ys(self):
        return np.geomspace(self.y_range[0], self.y_range[1], self.n_y)


@dataclass(frozen=True)
class MinimizeResult:
    best_param: Param2D
    best_value: float
    shape: Shape
    runner_up_gap: float
    certified: bool
    unbounded: bool = False
    grid_best_value: float = math.nan

    def as_dict(self):
        return {
            "x": self.best_param.x, "y": self.best_param.y,
            "volume": self.best_param.volume, "value": self.best_value,
            "shape": self.shape.value, "runner_up_gap": self.runner_up_gap,
            "certified": self.certified, "unbounded": self.unbounded,
        }


@dataclass(frozen=True)
class PhaseScanRow:
    control: float
    best_param: Param2D
    shape: Shape
    value: float
    unbounded: bool = False
    error: str = None


def _raw_lattice(x, y, volume):
    s = math.sqrt(volume / y)
    return lattices.from_basis([[s, s * abs(x)], [0.0, s * y]])


def _canonical_param(x, y, volume):
    """Canonical Param2D, keeping already-canonical (snapped) values exact."""
    x = min(max(abs(x), 0.0), 0.5) if -1e-9 <= x <= 0.5 + 1e-9 else x
    try:
        return Param2D(x, y, volume)
    except ValueError:
        return lattices.lattice_to_param(_raw_lattice(x, y, volume))


def _make_eval(objective, volume, sense, y_max):
    """Raw (x, y) evaluator: objectives are basis-invariant, so off-domain
    raw coordinates evaluate the equivalent canonical lattice."""
    sgn = -1.0 if sense == "max" else 1.0

    def ev(x, y):
        if y > y_max:
            y = 2.0 * y_max - y  # reflect at the cap
        if y < 1e-6:
            return math.inf
        try:
            return sgn * float(objective(_raw_lattice(x, y, volume)))
        except Exception as exc:
            raise ObjectiveFailure(f"objective failed at ({x}, {y}): {exc}",
                                   point=(x, y)) from exc
    return ev


def _grid_values(ev, grid):
    xs, ys = grid.xs(), grid.ys()
    vals = np.full((len(xs), len(ys)), math.inf)

    def fill(i):
        x = xs[i]
        for j, y in enumerate(ys):
            if x * x + y * y < 1.0 - 1e-12:
                continue
            vals[i, j] = ev(x, y)

    if grid.workers > 1:
        with ThreadPoolExecutor(max_workers=grid.workers) as pool:
            list(pool.map(fill, range(len(xs))))
    else:
        for i in range(len(xs)):
            fill(i)
    return xs, ys, vals


def _tie_break_argmin(xs, ys, vals, tie_rtol):
    vmin = float(np.min(vals))
    tol = tie_rtol * max(1.0, abs(vmin))
    cand = np.argwhere(vals <= vmin + tol)
    # lexicographic in (x, y): candidates are already sorted by (i, j)
    i, j = cand[0]
    return int(i), int(j), vmin


def _snap_candidates(x, y):
    """Symmetry snaps ordered most-specific first; (x, y) is kept last."""
    out = [(0.5, SQRT3_2), (0.0, 1.0)]
    y_circ = math.sqrt(max(1.0 - x * x, 0.0))
    if abs(x * x + y * y - 1.0) < 0.05 and y_circ > 0:
        out.append((x, y_circ))
    out.append((0.0, y))
    out.append((0.5, y))
    if abs(y - 1.0) < 0.05:
        out.append((x, 1.0))
    out.append((x, y))
    return out


def _snap(ev, x, y, v, snap_tol):
    for (xc, yc) in _snap_candidates(x, y):
        if xc * xc + yc * yc < 1.0 - 1e-12:
            continue
        if (xc, yc) == (x, y):
            break
        vc = ev(xc, yc)
        if vc <= v + snap_tol:
            return xc, yc, min(vc, v)
    return x, y, v


def minimize2d(objective, volume, grid=None, sense="min"):
    """Minimize (or maximize) a lattice functional over the 2d fundamental
    domain at fixed volume.

    Grid argmin with deterministic tie-breaking, optional Nelder-Mead polish
    in (x, log y) with the volume cap enforced by reflection, then a snap to
    the most symmetric parameter indistinguishable within ``snap_rtol``.
    """
    grid = grid or GridSpec()
    ev = _make_eval(objective, volume, sense, grid.y_range[1])
    xs, ys, vals = _grid_values(ev, grid)
    i, j, vmin = _tie_break_argmin(xs, ys, vals, grid.tie_rtol)
    x, y, v = float(xs[i]), float(ys[j]), float(vals[i, j])
    grid_best = v

    # monotone decrease into the y cap means the functional has no minimizer
    unbounded = bool(j == len(ys) - 1 and len(ys) >= 2
                     and vals[i, -1] < vals[i, -2] - grid.tie_rtol * max(1.0, abs(vmin)))

    certified = not unbounded
    if grid.refine and not unbounded:
        res = _nm_minimize(
            lambda p: ev(p[0], math.exp(p[1])), [x, math.log(y)],
            method="Nelder-Mead",
            options={"xatol": grid.nm_tol, "fatol": 1e-12,
                     "maxiter": 600, "maxfev": 900})
        if res.fun <= v:
            x, y = float(res.x[0]), float(math.exp(res.x[1]))
            if y > grid.y_range[1]:
                y = 2.0 * grid.y_range[1] - y
            v = float(res.fun)
        certified = bool(res.success)

    if grid.snap:
        snap_tol = grid.snap_rtol * max(1.0, abs(v))
        x, y, v = _snap(ev, abs(x), y, v, snap_tol)

    p = _canonical_param(x, y, volume)
    sgn = -1.0 if sense == "max" else 1.0

    flat = vals.ravel()
    order = np.argsort(flat, kind="stable")
    runner = math.inf
    for idx in order:
        ii, jj = divmod(int(idx), len(ys))
        if (ii, jj) != (i, j) and math.isfinite(flat[idx]):
            runner = float(flat[idx])
            break
    gap = max(runner - grid_best, 0.0)

    return MinimizeResult(
        best_param=p, best_value=sgn * v,
        shape=lattices.classify_shape(p, grid.shape_tol),
        runner_up_gap=gap, certified=certified, unbounded=unbounded,
        grid_best_value=sgn * grid_best)


@dataclass(frozen=True)
class OrthoResult:
    """minimize_orthorhombic output: normalized axis lengths t_i (product 1)."""

    aspect: tuple
    best_value: float
    is_cubic: bool
    certified: bool


def _ortho_lattice(xi, d, volume):
    xi = np.asarray(xi, dtype=float)
    logs = np.append(xi, -np.sum(xi))
    return lattices.from_basis(np.diag(np.exp(logs) * volume ** (1.0 / d)))


def minimize_orthorhombic(objective, d, volume, n_grid=33, log_ratio_max=1.25,
                          sense="min", refine=True, tol=1e-4):
    """Optimize over diag(t_1..t_d) with prod t_i = volume, parametrized by
    d-1 log-aspect coordinates on a uniform grid plus Nelder-Mead polish."""
    if d not in (2, 3):
        raise ValueError("orthorhombic optimization supports d in {2, 3}")
    sgn = -1.0 if sense == "max" else 1.0

    def ev(xi):
        try:
            return sgn * float(objective(_ortho_lattice(xi, d, volume)))
        except Exception as exc:
            raise ObjectiveFailure(f"objective failed at {xi}: {exc}",
                                   point=tuple(xi)) from exc

    axes = [np.linspace(-log_ratio_max, log_ratio_max, n_grid)] * (d - 1)
    best_xi, best_v = None, math.inf
    for xi in np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d - 1):
        v = ev(xi)
        if v < best_v - 1e-15:
            best_xi, best_v = xi, v
    certified = True
    if refine:
        res = _nm_minimize(ev, best_xi, method="Nelder-Mead",
                           options={"xatol": 1e-9, "fatol": 1e-13,
                                    "maxiter": 400})
        if res.fun <= best_v:
            best_xi, best_v = res.x, float(res.fun)
        certified = bool(res.success)
    # snap to cubic when indistinguishable
    v_cubic = ev(np.zeros(d - 1))
    if v_cubic <= best_v + 1e-9 * max(1.0, abs(best_v)):
        best_xi, best_v = np.zeros(d - 1), min(v_cubic, best_v)
    logs = np.append(best_xi, -np.sum(best_xi))
    aspect = tuple(float(t) for t in np.exp(logs))
    return OrthoResult(aspect=aspect, best_value=sgn * best_v,
                       is_cubic=bool(np.max(np.abs(logs)) <= tol),
                       certified=certified)


def phase_scan(objective_family, controls, volume, grid=None, sense="min"):
    """One optimization row per control value, ascending, with warm starts.

    ``objective_family`` maps a control value to a lattice functional.
    Per-row failures are recorded in the row and the scan continues.
    """
    grid = grid or GridSpec()
    controls = sorted(float(c) for c in controls)
    rows = []
    prev = None
    for c in controls:
        try:
            objective = objective_family(c)
            res = minimize2d(objective, volume, grid, sense)
            if prev is not None and grid.refine and not res.unbounded:
                ev = _make_eval(objective, volume, sense, grid.y_range[1])
                warm = _nm_minimize(
                    lambda p: ev(p[0], math.exp(p[1])),
                    [prev.x, math.log(prev.y)], method="Nelder-Mead",
                    options={"xatol": grid.nm_tol, "fatol": 1e-12,
                             "maxiter": 600})
                sgn = -1.0 if sense == "max" else 1.0
                if sgn * warm.fun < sgn * res.best_value:
                    x, y = abs(float(warm.x[0])), float(math.exp(warm.x[1]))
                    v = float(warm.fun)
                    if grid.snap:
                        x, y, v = _snap(ev, x, y, v,
                                        grid.snap_rtol * max(1.0, abs(v)))
                    p = _canonical_param(x, y, volume)
                    res = MinimizeResult(
                        best_param=p, best_value=sgn * v,
                        shape=lattices.classify_shape(p, grid.shape_tol),
                        runner_up_gap=res.runner_up_gap,
                        certified=res.certified, unbounded=False,
                        grid_best_value=res.grid_best_value)
            rows.append(PhaseScanRow(
                control=c, best_param=res.best_param, shape=res.shape,
                value=res.best_value, unbounded=res.unbounded))
            prev = res.best_param
        except ObjectiveFailure as exc:
            rows.append(PhaseScanRow(
                control=c, best_param=None, shape=Shape.GENERIC,
                value=math.nan, error=str(exc)))
    return rows


def distinct_shapes(rows):
    """Ordered distinct shape blocks of a scan (failed rows excluded)."""
    out = []
    for row in rows:
        if row.error is not None:
            continue
        if not out or out[-1] != row.shape:
            out.append(row.shape)
    return out


def hessian_check(objective, p, h=1e-3, volume=None):
    """Central-difference gradient/Hessian in (x, y) with one Richardson
    refinement (h and h/2); definiteness from eigenvalue signs.

    Raises StepTooLarge when the two Richardson levels disagree by more than
    10% on some entry of meaningful size.
    """
    volume = volume if volume is not None else p.volume
    ev = _make_eval(objective, volume, "min", y_max=math.inf)
    x0, y0 = p.x, p.y

    def grad_hess(step):
        fp = ev(x0 + step, y0)
        fm = ev(x0 - step, y0)
        fyp = ev(x0, y0 + step)
        fym = ev(x0, y0 - step)
        f0 = ev(x0, y0)
        fpp = ev(x0 + step, y0 + step)
        fpm = ev(x0 + step, y0 - step)
        fmp = ev(x0 - step, y0 + step)
        fmm = ev(x0 - step, y0 - step)
        g = np.array([(fp - fm) / (2 * step), (fyp - fym) / (2 * step)])
        hxx = (fp - 2 * f0 + fm) / step**2
        hyy = (fyp - 2 * f0 + fym) / step**2
        hxy = (fpp - fpm - fmp + fmm) / (4 * step**2)
        return g, np.array([[hxx, hxy], [hxy, hyy]])

    g1, h1 = grad_hess(h)
    g2, h2 = grad_hess(h / 2)
    grad = (4 * g2 - g1) / 3
    hess = (4 * h2 - h1) / 3
    scale = max(float(np.max(np.abs(hess))), 1e-30)
    dis = np.abs(h2 - h1) / scale
    if float(np.max(dis)) > 0.10:
        raise StepTooLarge(f"Richardson disagreement {float(np.max(dis)):.3f} "
                           f"exceeds 10% at step {h}")
    eig = np.linalg.eigvalsh(hess)
    tol = 1e-6 * scale
    return {
        "grad": grad,
        "hess": hess,
        "eigenvalues": eig,
        "positive_definite": bool(np.all(eig > tol)),
    }
