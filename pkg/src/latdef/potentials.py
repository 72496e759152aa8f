"""Interaction potentials, inverse-Laplace densities, defect specifications
and the scalar criteria built on them.

All potentials take the *squared* distance: the lattice energy sums f(|p|^2).
Every family is a superposition f(r) = int_0^inf exp(-r t) dmu(t); except for
the Gaussian (a point mass) the measure has a closed-form density rho(t).
"""
import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as _gamma

from .errors import NoDensity, ValidationError, WrongRegime


# ---------------------------------------------------------------------------
# defect specification kappa = {K, A_K, P_K}

@dataclass(frozen=True)
class DefectEntry:
    """One dilation factor k with removal weight a and optional shifts.

    Shifts are integer coordinates in the reduced basis; a shift with all
    coordinates divisible by k would lie in kL itself and is rejected.
    """

    k: int
    a: float
    shifts: tuple = ()

    def __post_init__(self):
        if self.k < 2 or self.k != int(self.k):
            raise ValidationError(f"entries.k: must be an integer >= 2, got {self.k}")
        if self.a == 0:
            raise ValidationError("entries.a: removal weight must be nonzero")
        shifts = tuple(tuple(int(c) for c in s) for s in self.shifts)
        for s in shifts:
            if not s:
                raise ValidationError("entries.shifts: empty shift vector")
            if all(c % self.k == 0 for c in s):
                raise ValidationError(
                    f"entries.shifts: shift {s} lies in {self.k}L (trivial)")
        object.__setattr__(self, "shifts", shifts)


@dataclass(frozen=True)
class DefectSpec:
    """Finite collection of defect entries with distinct k."""

    entries: tuple = ()

    def __post_init__(self):
        entries = tuple(
            e if isinstance(e, DefectEntry) else DefectEntry(*e)
            for e in self.entries)
        ks = [e.k for e in entries]
        if len(set(ks)) != len(ks):
            raise ValidationError("entries.k: duplicate dilation factors")
        object.__setattr__(self, "entries", entries)

    def non_shifted(self):
        return all(not e.shifts for e in self.entries)

    @property
    def max_k(self):
        return max((e.k for e in self.entries), default=2)

    def to_json_dict(self):
        return {
            "version": 1,
            "entries": [
                {"k": e.k, "a": e.a, "shifts": [list(s) for s in e.shifts]}
                for e in self.entries
            ],
        }

    @classmethod
    def from_json_dict(cls, data):
        if not isinstance(data, dict):
            raise ValidationError("defect spec: expected a JSON object")
        allowed = {"entries", "version"}
        for key in data:
            if key not in allowed:
                raise ValidationError(f"defect spec: unknown field {key!r}")
        if data.get("version", 1) != 1:
            raise ValidationError("version: only version 1 is supported")
        if "entries" not in data:
            raise ValidationError("entries: missing required field")
        entries = []
        for i, e in enumerate(data["entries"]):
            extra = set(e) - {"k", "a", "shifts"}
            if extra:
                raise ValidationError(
                    f"entries[{i}]: unknown field {sorted(extra)[0]!r}")
            if "k" not in e or "a" not in e:
                raise ValidationError(f"entries[{i}]: requires fields 'k' and 'a'")
            entries.append(DefectEntry(
                k=e["k"], a=e["a"],
                shifts=tuple(tuple(s) for s in e.get("shifts", ()))))
        return cls(entries=tuple(entries))

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"defect spec: invalid JSON ({exc.msg})") from exc
        return cls.from_json_dict(data)

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2)


EMPTY_SPEC = DefectSpec()


def dirichlet_L(spec, s):
    """L(A_K, s) = sum_k a_k / k^s (shifts ignored)."""
    if s <= 0:
        raise ValueError("s must be positive")
    return math.fsum(e.a * float(e.k) ** (-s) for e in spec.entries)


# ---------------------------------------------------------------------------
# potential families

@dataclass(frozen=True)
class DensityFn:
    """Inverse-Laplace density rho(t) with support [support_start, inf).

    ``point_mass`` marks measures without a density (Gaussian): a pair
    (location, weight) and no evaluator. ``breakpoints`` lists interior kinks
    (useful for quadrature against the density).
    """

    fn: object = None
    support_start: float = 0.0
    point_mass: tuple = None
    breakpoints: tuple = ()

    def __call__(self, t):
        if self.fn is None:
            raise NoDensity("measure is a point mass, no density evaluator")
        t = np.asarray(t, dtype=float)
        out = np.where(t >= self.support_start, self.fn(np.maximum(t, self.support_start)), 0.0)
        return out if out.ndim else float(out)


class Potential:
    """Base class; subclasses are frozen dataclasses with an ``eval`` method."""

    def eval(self, r):
        raise NotImplementedError

    def __call__(self, r):
        return self.eval(r)

    def density(self):
        raise NotImplementedError

    def decay_exponent(self):
        """p with |f(r)| = O(r^-p); math.inf for super-polynomial decay."""
        raise NotImplementedError

    def scaled(self, k2):
        """The potential r -> f(k2 * r), as a member of the same family."""
        raise NotImplementedError

    def check_dimension(self, d):
        if self.decay_exponent() <= d / 2:
            raise ValidationError(
                f"potential decays like r^-{self.decay_exponent()}, "
                f"needs exponent > d/2 = {d / 2}")


@dataclass(frozen=True)
class Gaussian(Potential):
    """f(r) = exp(-pi alpha r); the measure is a point mass at t = pi alpha."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValidationError("alpha: must be positive")

    def eval(self, r):
        return np.exp(-math.pi * self.alpha * np.asarray(r, dtype=float))

    def density(self):
        return DensityFn(point_mass=(math.pi * self.alpha, 1.0))

    def decay_exponent(self):
        return math.inf

    def scaled(self, k2):
        return Gaussian(alpha=self.alpha * k2)


@dataclass(frozen=True)
class InversePower(Potential):
    """f(r) = r^-s, with density rho(t) = t^(s-1) / Gamma(s)."""

    s: float

    def __post_init__(self):
        if self.s <= 0:
            raise ValidationError("s: must be positive")

    def eval(self, r):
        return np.asarray(r, dtype=float) ** (-self.s)

    def density(self):
        s = self.s
        g = _gamma(s)
        return DensityFn(fn=lambda t: t ** (s - 1.0) / g, support_start=0.0)

    def decay_exponent(self):
        return self.s

    def scaled(self, k2):
        # f(k2 r) = k2^-s r^-s is not itself a pure power; scaling is folded
        # into energy routing instead.
        raise NotImplementedError("scale inverse powers via homogeneity")


@dataclass(frozen=True)
class YukawaPower(Potential):
    """f(r) = exp(-sigma r) / r^s; density (t - sigma)^(s-1)/Gamma(s) on [sigma, inf)."""

    sigma: float
    s: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValidationError("sigma: must be nonnegative")
        if self.s <= 0 and self.sigma == 0:
            raise ValidationError("s: need s > 0 or sigma > 0 for decay")

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-self.sigma * r) * r ** (-self.s)

    def density(self):
        s, sigma = self.s, self.sigma
        g = _gamma(s)
        return DensityFn(fn=lambda t: (t - sigma) ** (s - 1.0) / g,
                         support_start=sigma)

    def decay_exponent(self):
        return math.inf if self.sigma > 0 else self.s

    def scaled(self, k2):
        # exp(-sigma k2 r) (k2 r)^-s = k2^-s * YukawaPower(sigma k2, s)(r)
        raise NotImplementedError("scale Yukawa powers via energy routing")


@dataclass(frozen=True)
class LennardJones(Potential):
    """f(r) = c2 r^-x2 - c1 r^-x1 with x2 > x1."""

    c1: float
    c2: float
    x1: float
    x2: float

    def __post_init__(self):
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValidationError("c1, c2: must be positive")
        if not self.x2 > self.x1 > 0:
            raise ValidationError("x1, x2: need x2 > x1 > 0")

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        return self.c2 * r ** (-self.x2) - self.c1 * r ** (-self.x1)

    def density(self):
        c1, c2, x1, x2 = self.c1, self.c2, self.x1, self.x2
        g1, g2 = _gamma(x1), _gamma(x2)
        return DensityFn(
            fn=lambda t: c2 * t ** (x2 - 1.0) / g2 - c1 * t ** (x1 - 1.0) / g1,
            support_start=0.0)

    def decay_exponent(self):
        return self.x1

    def scaled(self, k2):
        raise NotImplementedError("scale Lennard-Jones via energy routing")


@dataclass(frozen=True)
class DefectModified(Potential):
    """f_kappa(r) = f(r) - sum_k a_k f(k^2 r) for a non-shifted spec."""

    base: Potential
    spec: DefectSpec = field(default_factory=DefectSpec)

    def __post_init__(self):
        if not self.spec.non_shifted():
            raise ValidationError(
                "spec: DefectModified requires a non-shifted spec "
                "(shifted defects are handled by sums.energy_defect)")

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        out = self.base.eval(r)
        for e in self.spec.entries:
            out = out - e.a * self.base.eval(e.k * e.k * r)
        return out

    def density(self):
        base = self.base.density()
        if base.point_mass is not None:
            raise NoDensity("base measure is a point mass")
        entries = self.spec.entries

        def rho(t):
            out = base(t)
            for e in entries:
                out = out - (e.a / e.k**2) * base(t / e.k**2)
            return out

        # the scaled component (a/k^2) rho(t/k^2) activates at t = k^2 * start
        kinks = tuple(sorted(base.support_start * e.k**2 for e in entries
                             if base.support_start > 0))
        return DensityFn(fn=rho, support_start=base.support_start,
                         breakpoints=kinks)

    def decay_exponent(self):
        return self.base.decay_exponent()

    def scaled(self, k2):
        raise NotImplementedError


def density(f):
    """Inverse-Laplace density of a potential; NoDensity for point masses."""
    return f.density()


def _require_density(f):
    rho = f.density()
    if rho.point_mass is not None:
        raise NoDensity("potential has a point-mass measure (Gaussian)")
    return rho


def _log_grid(t_max, n, t_min=None):
    if t_min is None:
        t_min = t_max * 1e-12
    return np.geomspace(t_min, t_max, n)


def check_condthm(f, spec, t_grid=None):
    """Grid certification of rho_f(t) >= sum_k (a_k/k^2) rho_f(t/k^2).

    Returns {"holds_on_grid": bool, "first_violation": t or None}. This is a
    sampled check on a log grid, not a proof.
    """
    if not spec.non_shifted():
        raise ValidationError("spec: condition check requires a non-shifted spec")
    rho = _require_density(f)
    if t_grid is None:
        t_grid = _log_grid(1e3 * spec.max_k**2, 4096)
    lhs = rho(np.asarray(t_grid))
    rhs = np.zeros_like(lhs)
    for e in spec.entries:
        rhs += (e.a / e.k**2) * rho(np.asarray(t_grid) / e.k**2)
    bad = np.nonzero(lhs < rhs - 1e-15 * np.maximum(np.abs(lhs), 1.0))[0]
    if bad.size:
        return {"holds_on_grid": False, "first_violation": float(t_grid[bad[0]])}
    return {"holds_on_grid": True, "first_violation": None}


def g_V(f, spec, d, volume, y):
    """g_V(y) = rho_fk(pi y / V^(2/d)) + y^(d/2-2) rho_fk(pi / (V^(2/d) y))."""
    fk = DefectModified(base=f, spec=spec) if spec.entries else f
    rho = _require_density(fk)
    a = volume ** (2.0 / d)
    y = np.asarray(y, dtype=float)
    out = rho(math.pi * y / a) + y ** (d / 2.0 - 2.0) * rho(math.pi / (a * y))
    return out if out.ndim else float(out)


def check_gV(f, spec, d, volume, y_max=1e3, n_samples=4096):
    """Evaluate g_V on a log grid over [1, y_max]; report the minimum."""
    ys = np.geomspace(1.0, y_max, n_samples)
    vals = g_V(f, spec, d, volume, ys)
    i = int(np.argmin(vals))
    return {
        "holds_on_grid": bool(vals[i] >= -1e-15 * max(1.0, float(np.max(np.abs(vals))))),
        "min_value": float(vals[i]),
        "argmin": float(ys[i]),
    }


def V_kappa(f, spec, d):
    """Volume threshold below which the universal optimizer minimizes the
    defect-modified Lennard-Jones energy (case 1); empty spec gives the
    defect-free threshold."""
    if not isinstance(f, LennardJones):
        raise ValidationError("V_kappa is defined for Lennard-Jones potentials")
    if not spec.non_shifted():
        raise ValidationError("spec: V_kappa requires a non-shifted spec")
    l1 = dirichlet_L(spec, 2 * f.x1)
    l2 = dirichlet_L(spec, 2 * f.x2)
    if spec.entries and not (l2 < l1 < 1.0):
        raise WrongRegime(f"need L(2 x2) < L(2 x1) < 1, got {l2} and {l1}")
    if not spec.entries and not (l1 < 1.0 and l2 < 1.0):  # pragma: no cover
        raise WrongRegime("empty spec should give L = 0")
    num = f.c2 * (1.0 - l2) * _gamma(f.x1)
    den = f.c1 * (1.0 - l1) * _gamma(f.x2)
    return math.pi ** (d / 2.0) * (num / den) ** (d / (2.0 * (f.x2 - f.x1)))


class Regime(enum.Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"
    DEGENERATE = "Degenerate"


def lj_regime(f, spec):
    """Classify the Lennard-Jones defect regime from L(A_K, 2 x_i).

    Case1: L(2x2) < L(2x1) < 1 (empty spec included); Case2: L(2x1) > L(2x2) > 1;
    Case3: L(2x1) > 1 > L(2x2); anything else (ties with 1 or a non-matching
    ordering) is Degenerate.
    """
    if not isinstance(f, LennardJones):
        raise ValidationError("lj_regime is defined for Lennard-Jones potentials")
    if not spec.non_shifted():
        raise ValidationError("spec: lj_regime requires a non-shifted spec")
    if not spec.entries:
        return Regime.CASE1
    l1 = dirichlet_L(spec, 2 * f.x1)
    l2 = dirichlet_L(spec, 2 * f.x2)
    if l2 < l1 < 1.0:
        return Regime.CASE1
    if l1 > l2 > 1.0:
        return Regime.CASE2
    if l1 > 1.0 > l2:
        return Regime.CASE3
    return Regime.DEGENERATE


# CLI potential grammar: "ip:s=2", "gauss:alpha=1", "yuk:sigma=1,s=2",
# "lj:c1=1,c2=1,x1=3,x2=6"
_GRAMMAR = {
    "ip": (InversePower, {"s"}),
    "gauss": (Gaussian, {"alpha"}),
    "yuk": (YukawaPower, {"sigma", "s"}),
    "lj": (LennardJones, {"c1", "c2", "x1", "x2"}),
}


def parse_potential(text):
    """Parse the compact potential grammar used by the CLI and configs."""
    head, _, body = text.partition(":")
    head = head.strip()
    if head not in _GRAMMAR:
        raise ValidationError(
            f"potential: unknown family {head!r} (expected one of {sorted(_GRAMMAR)})")
    cls, fields = _GRAMMAR[head]
    kwargs = {}
    if body.strip():
        for item in body.split(","):
            key, sep, val = item.partition("=")
            key = key.strip()
            if not sep or key not in fields:
                raise ValidationError(f"potential: bad parameter {item.strip()!r}")
            try:
                kwargs[key] = float(val)
            except ValueError:
                raise ValidationError(f"potential: non-numeric value in {item.strip()!r}")
    missing = fields - set(kwargs)
    if missing:
        raise ValidationError(f"potential: missing parameter {sorted(missing)[0]!r}")
    return cls(**kwargs)


def format_potential(f):
    """Inverse of parse_potential."""
    if isinstance(f, InversePower):
        return f"ip:s={f.s:g}"
    if isinstance(f, Gaussian):
        return f"gauss:alpha={f.alpha:g}"
    if isinstance(f, YukawaPower):
        return f"yuk:sigma={f.sigma:g},s={f.s:g}"
    if isinstance(f, LennardJones):
        return f"lj:c1={f.c1:g},c2={f.c2:g},x1={f.x1:g},x2={f.x2:g}"
    raise ValidationError(f"potential: no grammar for {type(f).__name__}")
