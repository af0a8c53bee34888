"""Smooth non-flat maps of the unit interval or the circle.

A :class:`SmoothMap` evaluates ``f`` and every derivative exactly (polynomial
coefficient arithmetic or closed-form family derivatives).  The module also
locates critical points, classifies their orders and computes the global
constants Lambda, lambda, K and epsilon1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import mpmath
import numpy as np

from .errors import EmptyCriticalSet, FlatCriticalPoint, RootFindingFailure

UNIT_INTERVAL = "unit_interval"
CIRCLE = "circle"

KIND_POLY = 0
KIND_SINE = 1
KIND_ARNOLD = 2

ESCAPE_TOL = 1e-12
ROOT_TOL = 1e-12
ORDER_TOL = 1e-8
DEFAULT_MAX_ORDER = 10


def wrap(y):
    """Reduce to [0, 1) as ``y - floor(y)``; same operation order as the kernels."""
    y = np.asarray(y, dtype=float)
    r = y - np.floor(y)
    return np.where(r >= 1.0, r - 1.0, r)


def _horner(coeffs, x):
    y = np.full_like(x, coeffs[-1]) if isinstance(x, np.ndarray) else coeffs[-1]
    for c in coeffs[-2::-1]:
        y = y * x + c
    return y


def _poly_derivatives(coeffs, max_order):
    out = [tuple(float(c) for c in coeffs)]
    cur = np.asarray(coeffs, dtype=float)
    for _ in range(max_order + 1):
        if cur.size > 1:
            cur = cur[1:] * np.arange(1, cur.size)
        else:
            cur = np.zeros(1)
        out.append(tuple(float(c) for c in cur))
    return tuple(out)


@dataclass(frozen=True)
class SmoothMap:
    """A smooth map of ``[0, 1]`` or ``R/Z``.

    ``coefficients`` (ascending degree) is set for polynomial families and
    empty otherwise; ``params`` holds the family parameters.
    """

    family: str
    params: tuple = ()
    domain: str = UNIT_INTERVAL
    coefficients: tuple = ()
    max_order: int = field(default=DEFAULT_MAX_ORDER, compare=False)

    def __post_init__(self):
        if self.domain not in (UNIT_INTERVAL, CIRCLE):
            raise ValueError(f"unknown domain kind {self.domain!r}")
        if self.kind == KIND_POLY and not self.coefficients:
            raise ValueError("polynomial map needs coefficients")
        self._validate_range()

    # -- construction helpers -------------------------------------------------
    @classmethod
    def logistic(cls, r=4.0):
        r = float(r)
        return cls("logistic", (r,), UNIT_INTERVAL, (0.0, r, -r))

    @classmethod
    def doubling(cls, m=2):
        if int(m) != m or m < 2:
            raise ValueError("doubling map needs an integer multiplier >= 2")
        return cls("doubling", (float(m),), CIRCLE, (0.0, float(m)))

    @classmethod
    def cubic(cls):
        return cls("cubic", (), UNIT_INTERVAL, (0.0, 0.0, 3.0, -2.0))

    @classmethod
    def sine(cls, a=1.0):
        return cls("sine", (float(a),), UNIT_INTERVAL)

    @classmethod
    def arnold(cls, omega, k):
        return cls("arnold", (float(omega), float(k)), CIRCLE)

    @classmethod
    def polynomial(cls, coefficients, domain=UNIT_INTERVAL):
        """Explicit polynomial; coefficients ascending, decimal strings or numbers."""
        co = tuple(float(c) for c in coefficients)
        while len(co) > 1 and co[-1] == 0.0:
            co = co[:-1]
        return cls("polynomial", (), domain, co)

    @classmethod
    def from_spec(cls, spec):
        """Build from a config mapping ``{family, params}`` or ``{coefficients, domain}``."""
        family = spec.get("family", "polynomial")
        params = list(spec.get("params", []))
        if family == "polynomial" or "coefficients" in spec:
            return cls.polynomial(spec["coefficients"], spec.get("domain", UNIT_INTERVAL))
        builders = {
            "logistic": cls.logistic,
            "doubling": cls.doubling,
            "cubic": cls.cubic,
            "sine": cls.sine,
            "arnold": cls.arnold,
        }
        if family not in builders:
            raise ValueError(f"unknown map family {family!r}")
        return builders[family](*params)

    def to_spec(self):
        if self.family in ("polynomial",):
            return {"family": "polynomial", "coefficients": [repr(c) for c in self.coefficients],
                    "domain": self.domain}
        return {"family": self.family, "params": list(self.params)}

    # -- structure --------------------------------------------------------------
    @property
    def kind(self):
        if self.family == "sine":
            return KIND_SINE
        if self.family == "arnold":
            return KIND_ARNOLD
        return KIND_POLY

    @property
    def is_circle(self):
        return self.domain == CIRCLE

    @cached_property
    def _dcoeffs(self):
        return _poly_derivatives(self.coefficients, self.max_order + 1)

    @property
    def label(self):
        if self.kind == KIND_POLY and self.family == "polynomial":
            return "poly[" + ",".join(repr(c) for c in self.coefficients) + "]"
        return f"{self.family}(" + ",".join(repr(p) for p in self.params) + ")"

    # -- evaluation -----------------------------------------------------------
    def lift(self, x):
        """Unwrapped value of f (for the circle, a lift to R)."""
        x = np.asarray(x, dtype=float)
        if self.kind == KIND_POLY:
            return _horner(self.coefficients, x)
        if self.kind == KIND_SINE:
            return self.params[0] * np.sin(math.pi * x)
        om, k = self.params
        return x + om - (k / (2.0 * math.pi)) * np.sin(2.0 * math.pi * x)

    def __call__(self, x):
        y = self.lift(x)
        return wrap(y) if self.is_circle else y

    def deriv(self, x, order=1):
        """The ``order``-th derivative, evaluated exactly from its closed form."""
        x = np.asarray(x, dtype=float)
        if order < 1:
            raise ValueError("order must be >= 1")
        if self.kind == KIND_POLY:
            co = self._dcoeffs[order] if order < len(self._dcoeffs) else (0.0,)
            if len(co) == 1:
                return np.full_like(x, co[0])
            return _horner(co, x)
        if self.kind == KIND_SINE:
            a = self.params[0]
            t = math.pi * x
            phase = (np.sin, np.cos, lambda u: -np.sin(u), lambda u: -np.cos(u))[order % 4]
            return a * math.pi**order * phase(t)
        om, k = self.params
        t = 2.0 * math.pi * x
        if order == 1:
            return 1.0 - k * np.cos(t)
        phase = (np.cos, lambda u: -np.sin(u), lambda u: -np.cos(u), np.sin)[(order - 1) % 4]
        return -k * (2.0 * math.pi) ** (order - 1) * phase(t)

    def distance(self, x, y):
        d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        if self.is_circle:
            d = np.minimum(d, 1.0 - d)
        return d

    def grid(self, resolution):
        """Uniform grid on the domain (the circle grid omits the duplicate 1)."""
        if self.is_circle:
            return np.arange(resolution) / resolution
        return np.linspace(0.0, 1.0, resolution + 1)

    # -- extended precision ---------------------------------------------------
    def mp_lift(self, x):
        if self.kind == KIND_POLY:
            y = mpmath.mpf(self.coefficients[-1])
            for c in self.coefficients[-2::-1]:
                y = y * x + c
            return y
        if self.kind == KIND_SINE:
            return self.params[0] * mpmath.sin(mpmath.pi * x)
        om, k = self.params
        return x + om - k / (2 * mpmath.pi) * mpmath.sin(2 * mpmath.pi * x)

    def mp_call(self, x):
        y = self.mp_lift(x)
        if self.is_circle:
            y = y - mpmath.floor(y)
        return y

    def mp_deriv(self, x, order=1):
        if self.kind == KIND_POLY:
            co = self._dcoeffs[order] if order < len(self._dcoeffs) else (0.0,)
            y = mpmath.mpf(co[-1])
            for c in co[-2::-1]:
                y = y * x + c
            return y
        if self.kind == KIND_SINE:
            a = self.params[0]
            t = mpmath.pi * x
            vals = (mpmath.sin(t), mpmath.cos(t), -mpmath.sin(t), -mpmath.cos(t))
            return a * mpmath.pi**order * vals[order % 4]
        om, k = self.params
        t = 2 * mpmath.pi * x
        if order == 1:
            return 1 - k * mpmath.cos(t)
        vals = (mpmath.cos(t), -mpmath.sin(t), -mpmath.cos(t), mpmath.sin(t))
        return -k * (2 * mpmath.pi) ** (order - 1) * vals[(order - 1) % 4]

    # -- validation -------------------------------------------------------------
    def _validate_range(self):
        if self.kind == KIND_SINE:
            a = self.params[0]
            if not 0.0 < a <= 1.0:
                raise ValueError("sine family needs 0 < a <= 1")
            return
        if self.kind == KIND_ARNOLD:
            if self.domain != CIRCLE or self.params[1] < 0:
                raise ValueError("arnold family lives on the circle with k >= 0")
            return
        co = self.coefficients
        if self.is_circle:
            deg = _horner(co, 1.0) - _horner(co, 0.0)
            if abs(deg - round(deg)) > 1e-12:
                raise ValueError("circle polynomial must have integer degree f(1)-f(0)")
            return
        # certified range: extremes occur at endpoints or real roots of f'
        cands = [0.0, 1.0]
        dco = np.asarray(self._dcoeffs[1])
        if dco.size > 1 and np.any(dco[1:] != 0):
            for root in np.roots(dco[::-1]):
                if abs(root.imag) < 1e-9 and 0.0 <= root.real <= 1.0:
                    cands.append(float(root.real))
        vals = np.concatenate([self.lift(np.array(cands)), self.lift(self.grid(10_000))])
        if vals.min() < -ESCAPE_TOL or vals.max() > 1.0 + ESCAPE_TOL:
            raise ValueError(f"map {self.label} does not send [0,1] into itself")


@dataclass(frozen=True)
class CriticalPoint:
    """A zero ``location`` of f' with order ``order`` = d_c and f^(d_c)(c)."""

    location: float
    order: int
    leading_coefficient: float
    index: int = 0


@dataclass(frozen=True)
class MapConstants:
    """Global constants of a map (Lambda, lambda, K, epsilon1 and its parts)."""

    Lambda: float
    lambda_log: float
    K: int
    epsilon1: float
    epsilon1_mono: float
    epsilon1_ratio: float
    critical_points: tuple = ()

    def to_dict(self):
        return {
            "Lambda": self.Lambda,
            "lambda_log": self.lambda_log,
            "K": self.K,
            "epsilon1": self.epsilon1,
            "epsilon1_mono": self.epsilon1_mono,
            "epsilon1_ratio": self.epsilon1_ratio,
            "critical_points": [
                {"c": c.location, "order": c.order, "coeff": c.leading_coefficient}
                for c in self.critical_points
            ],
        }


# -- critical points ----------------------------------------------------------

def _scalar(fmap, x, order):
    return float(fmap.deriv(np.array([x]), order)[0])


def _bisect(h, lo, hi):
    """Bisect a sign change of scalar ``h`` on [lo, hi] down to adjacent floats."""
    hlo, hhi = h(lo), h(hi)
    if hlo == 0.0:
        return lo
    if hhi == 0.0:
        return hi
    if (hlo > 0) == (hhi > 0):
        raise RootFindingFailure(f"no sign change on [{lo!r}, {hi!r}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        hm = h(mid)
        if hm == 0.0:
            return mid
        if (hm > 0) == (hlo > 0):
            lo, hlo = mid, hm
        else:
            hi = mid
    return lo if abs(h(lo)) <= abs(h(hi)) else hi


def find_critical_points(fmap, resolution=10_000, max_order=None):
    """All zeros of f' in the domain, with their orders, sorted by location.

    Roots are bracketed on a uniform grid (sign changes of f', exact grid
    zeros, and local minima of |f'| for even-multiplicity roots) and refined
    by bisection.
    """
    if resolution < 1000:
        raise ValueError("resolution must be >= 1000")
    max_order = fmap.max_order if max_order is None else max_order
    xs = np.linspace(0.0, 1.0, resolution + 1)
    d1 = fmap.deriv(xs, 1)
    ad = np.abs(d1)
    f1 = lambda t: _scalar(fmap, t, 1)  # noqa: E731
    f2 = lambda t: _scalar(fmap, t, 2)  # noqa: E731

    roots = [float(x) for x in xs[d1 == 0.0]]
    for i in np.flatnonzero(d1[:-1] * d1[1:] < 0):
        roots.append(_bisect(f1, xs[i], xs[i + 1]))
    # even-multiplicity roots: |f'| has a local min where f'' changes sign
    interior = np.flatnonzero((ad[1:-1] <= ad[:-2]) & (ad[1:-1] <= ad[2:]) & (ad[1:-1] > 0)) + 1
    for i in interior:
        lo, hi = xs[i - 1], xs[i + 1]
        if (f2(lo) > 0) == (f2(hi) > 0) or f2(lo) == 0.0 or f2(hi) == 0.0:
            continue
        c = _bisect(f2, lo, hi)
        if abs(f1(c)) < ROOT_TOL:
            roots.append(c)

    found = []
    for c in sorted(float(r) for r in roots):
        if fmap.is_circle and c >= 1.0:
            c = 0.0
        if abs(f1(c)) >= ROOT_TOL:
            raise RootFindingFailure(f"refined root {c!r} has |f'| = {abs(f1(c)):.3e}")
        if any(float(fmap.distance(c, o)) < 1e-9 for o in found):
            continue
        found.append(c)
    found.sort()

    out = []
    for idx, c in enumerate(found):
        for d in range(2, max_order + 1):
            v = _scalar(fmap, c, d)
            if abs(v) > ORDER_TOL:
                out.append(CriticalPoint(c, d, v, idx))
                break
        else:
            raise FlatCriticalPoint(f"all derivatives up to order {max_order} vanish at {c!r}")
    return out


def evaluate_g(fmap, critical, x):
    """g_c(x) = f'(x) / p_c(x), with g_c(c) = 1 returned exactly."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c, d = critical.location, critical.order
    u = x - c
    if fmap.is_circle:
        u = u - np.round(u)
    out = np.empty_like(x)
    at_c = u == 0.0
    m = ~at_c
    out[at_c] = 1.0
    if m.any():
        um = u[m]
        if fmap.kind == KIND_SINE:
            out[m] = np.sinc(-um)  # c = 1/2: g = sin(pi(1/2-x)) / (pi(1/2-x))
        elif fmap.kind == KIND_ARNOLD and d == 2:
            out[m] = np.sin(math.pi * (2 * c + um)) / math.sin(2 * math.pi * c) * np.sinc(um)
        elif fmap.kind == KIND_ARNOLD and d == 3:
            out[m] = np.sinc(um) ** 2
        elif fmap.kind == KIND_POLY:
            out[m] = _poly_g(fmap, critical, c + um)
        else:
            p = critical.leading_coefficient / math.factorial(d - 1) * um ** (d - 1)
            out[m] = fmap.deriv(c + um, 1) / p
    return float(out[0]) if scalar else out


def _poly_g(fmap, critical, x):
    # deflate f' by (x - c) exactly d-1 times (synthetic division), drop remainders
    q = list(fmap._dcoeffs[1][::-1])  # descending
    c, d = critical.location, critical.order
    for _ in range(d - 1):
        acc = [q[0]]
        for a in q[1:-1]:
            acc.append(a + c * acc[-1])
        q = acc if acc else [0.0]
    val = np.full_like(x, q[0])
    for a in q[1:]:
        val = val * x + a
    return val * math.factorial(d - 1) / critical.leading_coefficient


def _cap(fmap, c, others):
    gaps = []
    for o in others:
        if o is not c:
            gaps.append(float(fmap.distance(c.location, o.location)))
    if not fmap.is_circle:
        for edge in (0.0, 1.0):
            dist = abs(c.location - edge)
            if dist > 1e-12:
                gaps.append(dist)
    if not gaps:
        return 0.25
    return 0.5 * min(gaps)


def _window(fmap, c, radius, npts, side):
    t = np.linspace(0.0, radius, npts)[1:]
    x = c + side * t
    if fmap.is_circle:
        return t, wrap(x)
    keep = (x >= 0.0) & (x <= 1.0)
    return t[keep], x[keep]


def _mono_ok(fmap, crit, eps, npts=10_000):
    for side in (-1.0, 1.0):
        _, x = _window(fmap, crit.location, 2 * eps, npts, side)
        if x.size < 2:
            continue
        v = np.abs(fmap.deriv(x, 1))
        if not np.all(np.diff(v) > 0):
            return False
    return True


def _ratio_ok(fmap, crit, eps, npts=10_000):
    vals = [1.0]
    for side in (-1.0, 1.0):
        _, x = _window(fmap, crit.location, 2 * eps, npts, side)
        if x.size:
            vals.append(np.abs(evaluate_g(fmap, crit, x)))
    g = np.concatenate([np.atleast_1d(v) for v in vals])
    lo, hi = g.min(), g.max()
    return bool(lo > 0 and hi < 2.0 * lo)


def _scan(pred, cap, shrink=0.9, iters=40):
    """Largest radius in (0, cap] where ``pred`` holds (doubling then bisection)."""
    if pred(cap):
        return cap
    eps = cap / 1024.0
    while not pred(eps):
        eps /= 2.0
        if eps < 1e-15:
            return 0.0
    lo, hi = eps, min(2 * eps, cap)
    while hi < cap and pred(hi):
        lo, hi = hi, min(2 * hi, cap)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return shrink * lo


def _max_abs_deriv(fmap, resolution):
    xs = fmap.grid(resolution)
    best = float(np.max(np.abs(fmap.deriv(xs, 1))))
    ends = [0.0] if fmap.is_circle else [0.0, 1.0]
    best = max(best, float(np.max(np.abs(fmap.deriv(np.array(ends), 1)))))
    d2 = fmap.deriv(np.linspace(0.0, 1.0, resolution + 1), 2)
    grid = np.linspace(0.0, 1.0, resolution + 1)
    f2 = lambda t: _scalar(fmap, t, 2)  # noqa: E731
    for i in np.flatnonzero(d2[:-1] * d2[1:] < 0):
        z = _bisect(f2, grid[i], grid[i + 1])
        best = max(best, abs(_scalar(fmap, z, 1)))
    return best


def compute_constants(fmap, resolution=100_000, critical_points=None):
    """Lambda, lambda, K and the epsilon1 radii for ``fmap``."""
    crits = find_critical_points(fmap) if critical_points is None else list(critical_points)
    Lam = _max_abs_deriv(fmap, resolution)
    lam = math.log(Lam)
    if not crits:
        warnings.warn(EmptyCriticalSet(f"{fmap.label} has no critical points; epsilon1 set to cap"),
                      stacklevel=2)
        return MapConstants(Lam, lam, 0, 0.25, 0.25, 0.25, ())
    mono, ratio = [], []
    for c in crits:
        cap = _cap(fmap, c, crits)
        mono.append(_scan(lambda e: _mono_ok(fmap, c, e), cap))
        ratio.append(_scan(lambda e: _ratio_ok(fmap, c, e), cap))
    e_mono, e_ratio = min(mono), min(ratio)
    return MapConstants(Lam, lam, max(c.order for c in crits), min(e_mono, e_ratio),
                        e_mono, e_ratio, tuple(crits))


def analyze(fmap, resolution=100_000):
    """Convenience: critical points plus constants."""
    return compute_constants(fmap, resolution, find_critical_points(fmap))


def refine_critical_mp(fmap, crit, prec):
    """Critical point location to ``prec`` bits (Newton on f^(d-1))."""
    with mpmath.workprec(prec):
        c = mpmath.mpf(crit.location)
        d = crit.order
        if fmap.mp_deriv(c, 1) == 0:
            return c
        for _ in range(2 * int(math.log2(prec)) + 8):
            num = fmap.mp_deriv(c, d - 1)
            den = fmap.mp_deriv(c, d)
            if den == 0:
                break
            step = num / den
            c = c - step
            if abs(step) < mpmath.mpf(2) ** (-prec):
                break
        return c
