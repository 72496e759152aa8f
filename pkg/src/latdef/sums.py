"""Certified-error lattice sums: theta functions, Epstein zeta, defect
energies and charged point-set materialization.

Every sum returns an EnergyValue carrying a rigorous truncation bound. Tail
bounds use the packing estimate N(r) <= (1 + 2r/mu)^d for the number of
points of any lattice translate in a ball of radius r (mu = shortest vector
length), so all certificates are honest upper bounds.

Accumulation follows a fixed deterministic order: terms sorted by descending
squared norm (ties in enumeration order), then compensated summation.
"""
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erfc, exp1, gamma as _gamma, gammaincc

from . import _kernels, lattices
from .errors import CapExceeded, ValidationError
from .potentials import (DefectModified, DefectSpec, Gaussian, InversePower,
                         LennardJones, YukawaPower, dirichlet_L)


@dataclass(frozen=True)
class SumConfig:
    """Truncation target and mode switches shared by all sums."""

    tol: float = 1e-10
    max_points: int = 10**7
    zeta_mode: str = "mellin"  # "mellin" (incomplete-gamma split) or "direct"

    def __post_init__(self):
        if self.tol <= 0:
            raise ValidationError("tol: must be positive")
        if self.max_points < 10**3:
            raise ValidationError("max_points: must be at least 1000")
        if self.zeta_mode not in ("mellin", "direct"):
            raise ValidationError("zeta_mode: expected 'mellin' or 'direct'")


DEFAULT_CONFIG = SumConfig()


@dataclass(frozen=True)
class EnergyValue:
    """A sum value with its certified truncation-error bound."""

    value: float
    tail_bound: float
    cutoff_radius: float
    points_used: int
    cap_exceeded: bool = False

    def __add__(self, other):
        if isinstance(other, EnergyValue):
            return EnergyValue(
                value=self.value + other.value,
                tail_bound=self.tail_bound + other.tail_bound,
                cutoff_radius=max(self.cutoff_radius, other.cutoff_radius),
                points_used=self.points_used + other.points_used,
                cap_exceeded=self.cap_exceeded or other.cap_exceeded)
        return NotImplemented

    def scale(self, c):
        return replace(self, value=c * self.value, tail_bound=abs(c) * self.tail_bound)

    def shift_value(self, delta):
        return replace(self, value=self.value + delta)


# ---------------------------------------------------------------------------
# rigorous tail machinery

def _gauss_moments(beta, r, d):
    """I_k = int_r^inf t^k exp(-beta t^2) dt for k = 0..d+1."""
    e = math.exp(-beta * r * r)
    out = [0.5 * math.sqrt(math.pi / beta) * erfc(math.sqrt(beta) * r),
           e / (2.0 * beta)]
    for k in range(2, d + 2):
        out.append((r ** (k - 1) * e + (k - 1) * out[k - 2]) / (2.0 * beta))
    return out


def gauss_tail(beta, r, mu, d):
    """Upper bound on sum_{|x| > r} exp(-beta |x|^2) over any translate of a
    lattice with shortest vector mu."""
    i = _gauss_moments(beta, r, d)
    total = 0.0
    for j in range(d + 1):
        total += math.comb(d, j) * (2.0 / mu) ** j * 2.0 * beta * i[j + 1]
    return total


def power_tail(two_s, r, mu, d):
    """Upper bound on sum_{|x| > r} |x|^(-2s), requires 2s > d."""
    if two_s <= d:
        raise ValidationError(f"power sum needs exponent > d, got {two_s} <= {d}")
    total = 0.0
    for j in range(d + 1):
        total += (math.comb(d, j) * (2.0 / mu) ** j * two_s
                  * r ** (j - two_s) / (two_s - j))
    return total


def _grow_radius(bound_fn, tol, r0, hard=True):
    """Smallest radius (up to 12% overshoot) with bound_fn(r) <= tol.

    With hard=False an unreachable tolerance yields math.inf (the caller
    truncates at its point cap and reports the honest bound instead).
    """
    r = max(r0, 1e-3)
    for _ in range(400):
        if bound_fn(r) <= tol:
            return r
        r *= 1.12
    if hard:
        raise ValidationError("tail bound cannot reach the requested tolerance")
    return math.inf


_OMEGA = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}


def _ball_volume(r, d):
    w = _OMEGA.get(d, math.pi ** (d / 2.0) / _gamma(d / 2.0 + 1.0))
    return w * r**d


def _cap_radius(lat, max_points):
    """Radius whose ball holds roughly max_points lattice points."""
    w = _ball_volume(1.0, lat.dim)
    return (0.9 * max_points * lat.volume / w) ** (1.0 / lat.dim)


def _norms(lat, center, radius, cfg, weight_mode=_kernels.W_NONE, phase=None):
    """Enumerate squared norms within radius, shrinking to the cap if needed.

    Returns (r2 desc-sorted, w, radius_used, cap_exceeded).
    """
    r = radius
    for _ in range(60):
        try:
            r2, w = _kernels.ball_norms(lat.basis, center, r * r,
                                        cfg.max_points, weight_mode, phase)
            break
        except CapExceeded:
            r = min(r, _cap_radius(lat, cfg.max_points))
            r *= 0.95
    else:  # pragma: no cover
        raise CapExceeded("cannot fit any enumeration under max_points")
    idx = np.argsort(-r2, kind="stable")
    return r2[idx], (w[idx] if w is not None else None), r, r < radius


def _mu(lat):
    return math.sqrt(lattices.shortest_vector_sq(lat))


def _origin_in_translate(lat, center):
    """True when 0 is a point of L + center."""
    frac = np.linalg.solve(lat.basis, -np.asarray(center, dtype=float))
    return bool(np.all(np.abs(frac - np.round(frac)) < 1e-9))


# ---------------------------------------------------------------------------
# theta functions

def _theta_direct(lat, center, alpha, cfg, weight_mode=_kernels.W_NONE,
                  phase=None, mu=None):
    beta = math.pi * alpha
    mu = mu if mu is not None else _mu(lat)
    d = lat.dim
    bound = lambda r: gauss_tail(beta, r, mu, d)
    r0 = math.sqrt(max(-math.log(cfg.tol * 1e-3) / beta, 1e-6))
    radius = _grow_radius(bound, cfg.tol, r0)
    r2, w, used, capped = _norms(lat, center, radius, cfg, weight_mode, phase)
    val = _kernels.family_sum(r2, w, _kernels.F_GAUSS, (beta,))
    return EnergyValue(value=val, tail_bound=bound(used),
                       cutoff_radius=used, points_used=len(r2),
                       cap_exceeded=capped)


def theta(lat, alpha, cfg=DEFAULT_CONFIG, accelerate=True):
    """theta_L(alpha) = sum_p exp(-pi alpha |p|^2), p = 0 included.

    For alpha below 1/V^(2/d) the modular identity converts the sum to the
    dual side, keeping convergence exponential in both regimes.
    """
    if alpha <= 0:
        raise ValidationError("alpha: must be positive")
    d = lat.dim
    switch = lat.volume ** (-2.0 / d)
    if accelerate and alpha < switch:
        dual = lattices.dual(lat)
        inner = _theta_direct(dual, np.zeros(d), 1.0 / alpha, cfg)
        factor = alpha ** (-d / 2.0) / lat.volume
        return inner.scale(factor)
    return _theta_direct(lat, np.zeros(d), alpha, cfg)


def theta_shifted(lat, center, alpha, cfg=DEFAULT_CONFIG, accelerate=True):
    """theta_{L+c}(alpha) = sum_p exp(-pi alpha |p + c|^2) (all p, c cartesian)."""
    if alpha <= 0:
        raise ValidationError("alpha: must be positive")
    d = lat.dim
    c = np.asarray(center, dtype=float)
    switch = lat.volume ** (-2.0 / d)
    if accelerate and alpha < switch:
        dual = lattices.dual(lat)
        phase = np.linalg.solve(lat.basis, c)  # q . c = m . (B^-1 c)
        inner = _theta_direct(dual, np.zeros(d), 1.0 / alpha, cfg,
                              weight_mode=_kernels.W_COS, phase=phase)
        return inner.scale(alpha ** (-d / 2.0) / lat.volume)
    return _theta_direct(lat, c, alpha, cfg)


def theta_alternating(lat, alpha, cfg=DEFAULT_CONFIG):
    """theta^pm_L(alpha): weights (-1)^(m1+...+md) in the reduced basis.

    d = 2 inputs are reduced internally; higher dimensions must be supplied
    with a reduced basis (the weight convention depends on it).
    """
    if alpha <= 0:
        raise ValidationError("alpha: must be positive")
    red = lattices.reduce2d(lat) if lat.dim == 2 else lat
    return _theta_direct(red, np.zeros(lat.dim), alpha, cfg,
                         weight_mode=_kernels.W_PARITY)


# ---------------------------------------------------------------------------
# Epstein zeta (plain and shifted) via the incomplete-gamma split

def upper_gamma(a, x):
    """Generalized upper incomplete Gamma(a, x), any real a, x > 0 (vectorized)."""
    x = np.asarray(x, dtype=float)
    if abs(a - round(a)) < 1e-12:
        a = float(round(a))
    if a > 0:
        return gammaincc(a, x) * _gamma(a)
    if a == 0.0:
        return exp1(x)
    return (upper_gamma(a + 1.0, x) - x**a * np.exp(-x)) / a


def _gamma_envelope(a, x):
    """C with Gamma(a, t) <= C t^(a-1) e^-t for all t >= x (needs x > a - 1)."""
    if a <= 1.0:
        return 1.0
    if x <= a - 1.0 + 0.5:
        return math.inf
    return 1.0 / (1.0 - (a - 1.0) / (x + 0.5))


def _zeta_mellin(lat, two_s, center, cfg):
    """Incomplete-gamma (Ewald) evaluation of zeta_{L+c}(2s).

    The lattice is rescaled to unit volume first (homogeneity: zeta_{tL} =
    t^-2s zeta_L), which keeps both Ewald sides at a few dozen terms for any
    input scale; the split point of the Mellin integral is then t = 1.
    """
    d = lat.dim
    s = 0.5 * two_s
    if two_s <= d:
        raise ValidationError(f"two_s: need two_s > d, got {two_s}")
    t_scale = lat.volume ** (1.0 / d)
    if abs(t_scale - 1.0) > 1e-12:
        inner = _zeta_mellin(
            lat.scaled(1.0 / t_scale), two_s,
            None if center is None else np.asarray(center, float) / t_scale,
            replace(cfg, tol=cfg.tol * t_scale ** two_s))
        return inner.scale(t_scale ** (-two_s))
    vol = lat.volume
    lam = vol ** (2.0 / d)
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    dualat = lattices.dual(lat)
    mu_p, mu_d = _mu(lat), _mu(dualat)
    has_origin = _origin_in_translate(lat, c)
    factor = math.pi ** s / _gamma(s)
    side_tol = cfg.tol / (2.0 * factor)

    # direct side: terms (pi |x|^2)^-s Gamma(s, pi lam |x|^2)
    def direct_bound(r):
        env = _gamma_envelope(s, math.pi * lam * r * r)
        return (env * lam ** (s - 1.0) / (math.pi * r * r)
                * gauss_tail(math.pi * lam, r, mu_p, d))

    r1 = _grow_radius(direct_bound, side_tol,
                      math.sqrt(max(s, 1.0) / (math.pi * lam)) + 1.0)
    r2p, _, used1, cap1 = _norms(lat, c, r1, cfg)
    keep = r2p > 1e-24 * lat.gram[0, 0]
    r2p = r2p[keep]
    xs = math.pi * r2p
    s_direct = _kernels.compensated_sum(
        xs ** (-s) * upper_gamma(s, lam * xs))

    # dual side: V^-1 cos(2 pi q . c) (pi |q|^2)^-a Gamma(a, pi |q|^2 / lam)
    a = d / 2.0 - s
    def dual_bound(r):
        return (lam ** (1.0 - a) / (math.pi * r * r)
                * gauss_tail(math.pi / lam, r, mu_d, d)) / vol

    r2 = _grow_radius(dual_bound, side_tol,
                      math.sqrt(lam / math.pi) + 1.0)
    phase = np.linalg.solve(lat.basis, c)  # q . c = m . (B^-1 c) for q = B^-T m
    q2, w, used2, cap2 = _norms(dualat, np.zeros(d), r2, cfg,
                                weight_mode=_kernels.W_COS, phase=phase)
    keep = q2 > 1e-24 * dualat.gram[0, 0]
    q2, w = q2[keep], w[keep]
    xq = math.pi * q2
    s_dual = _kernels.compensated_sum(
        w * xq ** (-a) * upper_gamma(a, xq / lam)) / vol

    total = (s_direct + s_dual + lam ** (s - d / 2.0) / (vol * (s - d / 2.0))
             - (lam**s / s if has_origin else 0.0))
    tail = (direct_bound(used1) + dual_bound(used2)) * factor
    return EnergyValue(value=total * factor, tail_bound=tail,
                       cutoff_radius=max(used1, used2),
                       points_used=len(r2p) + len(q2),
                       cap_exceeded=cap1 or cap2)


def _zeta_direct(lat, two_s, center, cfg):
    """Plain truncated sum with the integral-comparison tail bound."""
    d = lat.dim
    if two_s <= d:
        raise ValidationError(f"two_s: need two_s > d, got {two_s}")
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    mu = _mu(lat)
    bound = lambda r: power_tail(two_s, r, mu, d)
    r_needed = _grow_radius(bound, cfg.tol, mu, hard=False)
    r_cap = _cap_radius(lat, cfg.max_points)
    radius = min(r_needed, r_cap)
    r2, _, used, capped = _norms(lat, c, radius, cfg)
    keep = r2 > 1e-24 * lat.gram[0, 0]
    r2 = r2[keep]
    val = _kernels.family_sum(r2, None, _kernels.F_POWER, (0.5 * two_s,))
    return EnergyValue(value=val, tail_bound=bound(used), cutoff_radius=used,
                       points_used=len(r2),
                       cap_exceeded=capped or radius < r_needed)


def epstein_zeta(lat, two_s, cfg=DEFAULT_CONFIG, center=None):
    """zeta_{L (+ center)}(2s) = sum over nonzero points |x|^(-2s), 2s > d."""
    if cfg.zeta_mode == "direct":
        return _zeta_direct(lat, two_s, center, cfg)
    return _zeta_mellin(lat, two_s, center, cfg)


# ---------------------------------------------------------------------------
# potential energies

def _direct_family_energy(lat, center, code, params, decay_beta, power_pref,
                          cfg, def_a=(), def_k2=()):
    """Direct origin-excluded sum of a potential family with an exponential
    envelope power_pref * exp(-decay_beta r^2) past the cutoff."""
    d = lat.dim
    mu = _mu(lat)

    def bound(r):
        total = power_pref(r) * gauss_tail(decay_beta, r, mu, d)
        for aa, k2 in zip(def_a, def_k2):
            total += (abs(aa) * power_pref(r * math.sqrt(k2))
                      * gauss_tail(decay_beta * k2, r, mu, d))
        return total

    r0 = math.sqrt(max(-math.log(cfg.tol * 1e-3) / decay_beta, 1e-6))
    radius = _grow_radius(bound, cfg.tol, r0)
    r2, _, used, capped = _norms(lat, center, radius, cfg)
    keep = r2 > 1e-24 * lat.gram[0, 0]
    r2 = r2[keep]
    val = _kernels.family_sum(r2, None, code, params, def_a, def_k2)
    return EnergyValue(value=val, tail_bound=bound(used), cutoff_radius=used,
                       points_used=len(r2), cap_exceeded=capped)


def _energy_at(lat, f, cfg, center):
    """Energy of the translate L + center against the origin, origin excluded."""
    d = lat.dim
    f.check_dimension(d)
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    at_origin = _origin_in_translate(lat, c)

    if isinstance(f, Gaussian):
        ev = theta_shifted(lat, c, f.alpha, cfg)
        return ev.shift_value(-1.0) if at_origin else ev
    if isinstance(f, InversePower):
        return epstein_zeta(lat, 2.0 * f.s, cfg, center=c)
    if isinstance(f, LennardJones):
        sub = replace(cfg, tol=cfg.tol / (abs(f.c1) + abs(f.c2)))
        z2 = epstein_zeta(lat, 2.0 * f.x2, sub, center=c)
        z1 = epstein_zeta(lat, 2.0 * f.x1, sub, center=c)
        return z2.scale(f.c2) + z1.scale(-f.c1)
    if isinstance(f, YukawaPower):
        if f.sigma == 0.0:
            return epstein_zeta(lat, 2.0 * f.s, cfg, center=c)
        pref = (lambda r: r ** (-2.0 * f.s)) if f.s > 0 else (lambda r: 1.0)
        return _direct_family_energy(lat, c, _kernels.F_YUK,
                                     (f.sigma, f.s), f.sigma, pref, cfg)
    if isinstance(f, DefectModified):
        base, spec = f.base, f.spec
        if isinstance(base, DefectModified):
            raise ValidationError("potential: nested DefectModified not supported")
        def_a = tuple(e.a for e in spec.entries)
        def_k2 = tuple(float(e.k**2) for e in spec.entries)
        if isinstance(base, InversePower):
            factor = 1.0 - dirichlet_L(spec, 2.0 * base.s)
            return epstein_zeta(lat, 2.0 * base.s, cfg, center=c).scale(factor)
        if isinstance(base, LennardJones):
            b2 = base.c2 * (1.0 - dirichlet_L(spec, 2.0 * base.x2))
            b1 = base.c1 * (1.0 - dirichlet_L(spec, 2.0 * base.x1))
            sub = replace(cfg, tol=cfg.tol / max(abs(b1) + abs(b2), 1e-30))
            z2 = epstein_zeta(lat, 2.0 * base.x2, sub, center=c)
            z1 = epstein_zeta(lat, 2.0 * base.x1, sub, center=c)
            return z2.scale(b2) + z1.scale(-b1)
        if isinstance(base, Gaussian):
            beta = math.pi * base.alpha
            ev = _direct_family_energy(lat, c, _kernels.F_GAUSS, (beta,),
                                       beta, lambda r: 1.0, cfg,
                                       def_a, def_k2)
            return ev
        if isinstance(base, YukawaPower) and base.sigma > 0:
            pref = (lambda r: r ** (-2.0 * base.s)) if base.s > 0 else (lambda r: 1.0)
            return _direct_family_energy(lat, c, _kernels.F_YUK,
                                         (base.sigma, base.s), base.sigma,
                                         pref, cfg, def_a, def_k2)
        if isinstance(base, YukawaPower):
            factor = 1.0 - dirichlet_L(spec, 2.0 * base.s)
            return epstein_zeta(lat, 2.0 * base.s, cfg, center=c).scale(factor)
    raise ValidationError(f"potential: no energy route for {type(f).__name__}")


def energy(lat, f, cfg=DEFAULT_CONFIG):
    """E_f[L] = sum over nonzero p of f(|p|^2), with a certified tail bound."""
    return _energy_at(lat, f, cfg, None)


def energy_shifted(lat, center, f, cfg=DEFAULT_CONFIG):
    """E_f[center + L]: energy of a shifted copy, any zero point excluded."""
    return _energy_at(lat, f, cfg, center)


def energy_defect(lat, f, spec, cfg=DEFAULT_CONFIG):
    """E_f^kappa[L] = E_f[L] - sum_k sum_i a_k E_f[p_ik + k L].

    Shift coordinates are integers in the reduced basis. The sublattice terms
    are summed as independent lattice sums, so for non-shifted specs this is
    a genuinely different route from energy(L, DefectModified(f, spec)).
    """
    red = lattices.reduce2d(lat) if lat.dim == 2 else lat
    # split the tolerance so the combined tail stays within cfg.tol
    weight = 1.0 + sum(abs(e.a) * max(len(e.shifts), 1) for e in spec.entries)
    part = replace(cfg, tol=cfg.tol / weight)
    total = energy(red, f, part)
    for e in spec.entries:
        sub = red.scaled(float(e.k))
        if not e.shifts:
            total = total + energy(sub, f, part).scale(-e.a)
            continue
        for sh in e.shifts:
            p = red.basis @ np.asarray(sh, dtype=float)
            total = total + energy_shifted(sub, p, f, part).scale(-e.a)
    return total


def defect_tail_bound(lat, f, spec, radius):
    """Certified bound on the part of E_f^kappa truncated past ``radius``."""
    red = lattices.reduce2d(lat) if lat.dim == 2 else lat
    total = _abs_tail(red, f, radius)
    for e in spec.entries:
        sub = red.scaled(float(e.k))
        total += abs(e.a) * _abs_tail(sub, f, radius) * max(len(e.shifts), 1)
    return total


def _abs_tail(lat, f, radius):
    mu = _mu(lat)
    d = lat.dim
    if isinstance(f, Gaussian):
        return gauss_tail(math.pi * f.alpha, radius, mu, d)
    if isinstance(f, InversePower):
        return power_tail(2.0 * f.s, radius, mu, d)
    if isinstance(f, LennardJones):
        return (f.c2 * power_tail(2.0 * f.x2, radius, mu, d)
                + f.c1 * power_tail(2.0 * f.x1, radius, mu, d))
    if isinstance(f, YukawaPower):
        pref = radius ** (-2.0 * f.s) if f.s > 0 else 1.0
        return pref * gauss_tail(f.sigma, radius, mu, d)
    if isinstance(f, DefectModified):
        total = _abs_tail(lat, f.base, radius)
        for e in f.spec.entries:
            total += abs(e.a) * _abs_tail(lat.scaled(float(e.k)), f.base,
                                          radius * e.k)
        return total
    raise ValidationError(f"potential: no tail bound for {type(f).__name__}")


# ---------------------------------------------------------------------------
# charged point sets

@dataclass(frozen=True)
class ChargedPointSet:
    """Finite patch of lattice points with charges 1 - sum of matched a_k."""

    points: np.ndarray
    charges: np.ndarray
    provenance: dict

    def __len__(self):
        return len(self.charges)

    def to_csv(self):
        d = self.points.shape[1] if len(self.points) else 2
        header = ",".join(["x", "y", "z"][:d] + ["charge"])
        lines = [header]
        for p, q in zip(self.points, self.charges):
            lines.append(",".join(f"{v:.17g}" for v in p) + f",{q:.17g}")
        return "\n".join(lines) + "\n"


def materialize(lat, spec, radius, cap=10**7):
    """Points of L within ``radius`` carrying their defect charges.

    Charge of p is 1 minus the sum of a_k over every sublattice coset
    p_ik + kL containing p; exact zero charges (vacancies) are dropped.
    """
    if radius <= 0:
        raise ValidationError("radius: must be positive")
    red = lattices.reduce2d(lat) if lat.dim == 2 else lat
    pts, mcs = _kernels.ball_points(red.basis, np.zeros(red.dim),
                                    radius * radius, cap)
    charges = np.ones(len(pts))
    for e in spec.entries:
        if not e.shifts:
            member = np.all(mcs % e.k == 0, axis=1)
            charges = charges - e.a * member
            continue
        for sh in e.shifts:
            member = np.all((mcs - np.asarray(sh, dtype=np.int64)) % e.k == 0,
                            axis=1)
            charges = charges - e.a * member
    keep = np.abs(charges) > 1e-12
    return ChargedPointSet(
        points=pts[keep], charges=charges[keep],
        provenance={"spec": spec.to_json_dict(), "radius": radius,
                    "basis": red.basis.tolist()})


def energy_pointset(ps, f):
    """sum charge(p) f(|p|^2) over the patch, skipping any point at the origin."""
    if len(ps) == 0:
        return 0.0
    r2 = np.einsum("ij,ij->i", ps.points, ps.points)
    keep = r2 > 1e-18
    r2, q = r2[keep], ps.charges[keep]
    idx = np.argsort(-r2, kind="stable")
    return _kernels.compensated_sum(q[idx] * np.asarray(f.eval(r2[idx])))
