"""Orbits, empirical measures, Lyapunov exponents and the integrability defect."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import kernels
from .errors import DomainEscape
from .maps import ESCAPE_TOL

DEFAULT_TAIL_FRACTION = 1.0 / 3.0


def _frozen(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Orbit:
    """Trajectory x_0..x_N of ``fmap`` with cached f'(x_i) and log|f'(x_i)|."""

    fmap: object
    x0: float
    points: np.ndarray
    deriv: np.ndarray
    dlog: np.ndarray
    precision: int | None = None
    tag: str = ""

    def __post_init__(self):
        for name in ("points", "deriv", "dlog"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def N(self):
        return self.points.size - 1

    @property
    def map_id(self):
        return self.fmap.label

    def measure(self, start=0, length=None):
        """Uniform empirical measure on the window [start, start + length)."""
        if length is None:
            length = self.N - start
        return EmpiricalMeasure(self, int(start), int(length))


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Uniform weights 1/n on the orbit window [start, start + length)."""

    orbit: Orbit
    start: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("window must be nonempty")
        if self.start < 0 or self.start + self.length > self.orbit.points.size:
            raise ValueError("window exceeds orbit length")

    @property
    def stop(self):
        return self.start + self.length

    @property
    def weights(self):
        return np.full(self.length, 1.0 / self.length)

    @property
    def points(self):
        return self.orbit.points[self.start:self.stop]

    @property
    def dlog(self):
        return self.orbit.dlog[self.start:self.stop]

    @property
    def deriv(self):
        return self.orbit.deriv[self.start:self.stop]


@dataclass(frozen=True)
class MeasureSequence:
    """Measures mu_k indexed by k, all on the same map."""

    measures: tuple
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "measures", tuple(self.measures))
        if not self.measures:
            raise ValueError("measure sequence must be nonempty")
        labels = {m.orbit.map_id for m in self.measures}
        if len(labels) != 1:
            raise ValueError(f"measures live on different maps: {sorted(labels)}")

    def __len__(self):
        return len(self.measures)

    def __iter__(self):
        return iter(self.measures)

    def __getitem__(self, k):
        return self.measures[k]


@dataclass(frozen=True)
class DefectTable:
    """Integrals of -log|f'| over {|f'| < delta} for each (delta, k)."""

    delta_grid: tuple
    entries: np.ndarray = field(repr=False)
    alpha_estimate: float
    diverged: bool
    tail_start: int

    def to_dict(self):
        return {
            "delta_grid": list(self.delta_grid),
            "entries": {
                repr(d): {str(k): float(v) for k, v in enumerate(row)}
                for d, row in zip(self.delta_grid, self.entries)
            },
            "alpha_estimate": self.alpha_estimate,
            "diverged": self.diverged,
            "tail_start": self.tail_start,
        }


# -- orbit generation -----------------------------------------------------------

def random_start(seed, precision=None):
    """Deterministic start point from a 64-bit seed (full mantissa if extended)."""
    rng = np.random.default_rng(seed)
    if precision is None:
        return rng.random()
    nbytes = (precision + 7) // 8
    bits = int.from_bytes(rng.bytes(nbytes), "big") >> (8 * nbytes - precision)
    with mpmath.workprec(precision):
        return mpmath.mpf(bits) / mpmath.mpf(2) ** precision


def auto_precision(fmap, n, extra=64):
    """Bits needed to keep an n-step orbit exact-to-binary64 (n*log2(Lambda) + extra)."""
    lam = float(np.max(np.abs(fmap.deriv(fmap.grid(4096), 1))))
    return int(math.ceil(n * math.log2(max(lam, 2.0)))) + extra


def iterate(fmap, x0=None, N=1, *, seed=None, precision=None, on_escape="raise", tag=""):
    """Orbit of length N+1 starting at ``x0`` (or a seeded random point).

    ``precision`` selects extended-precision iteration: an integer number of
    mantissa bits, or ``"auto"``.  ``on_escape`` is ``"raise"`` or ``"clamp"``
    for excursions beyond 1e-12 outside [0, 1].
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if on_escape not in ("raise", "clamp"):
        raise ValueError("on_escape must be 'raise' or 'clamp'")
    if precision == "auto":
        precision = auto_precision(fmap, N)
    if precision is not None:
        if x0 is None and fmap.family == "doubling":
            return _iterate_digits(fmap, N, seed, int(precision), tag)
        return _iterate_mp(fmap, x0, N, seed, int(precision), on_escape, tag)
    if x0 is None:
        x0 = random_start(seed)
    x0 = float(x0)
    if not (0.0 <= x0 <= 1.0) or (fmap.is_circle and x0 >= 1.0):
        raise ValueError(f"x0={x0!r} outside the domain")
    pts, der, dlg, esc = kernels.iterate(fmap, x0, N, clamp=on_escape == "clamp", tol=ESCAPE_TOL)
    if esc >= 0 and on_escape == "raise":
        raise DomainEscape(f"orbit left the domain at step {esc}", esc, pts[esc - 1] if esc else x0)
    return Orbit(fmap, x0, pts, der, dlg, None, tag)


def _iterate_mp(fmap, x0, N, seed, prec, on_escape, tag):
    pts = np.empty(N + 1)
    der = np.empty(N + 1)
    dlg = np.empty(N + 1)
    with mpmath.workprec(prec):
        x = random_start(seed, prec) if x0 is None else mpmath.mpf(x0)
        start = float(x)
        lo, hi = mpmath.mpf(-ESCAPE_TOL), mpmath.mpf(1 + ESCAPE_TOL)
        for i in range(N + 1):
            d = fmap.mp_deriv(x, 1)
            pts[i] = float(x)
            der[i] = float(d)
            df = der[i]
            if df != 0.0 and math.isfinite(df):
                dlg[i] = math.log(abs(df))
            else:
                dlg[i] = float(mpmath.log(abs(d))) if d != 0 else -math.inf
            if i == N:
                break
            x = fmap.mp_call(x)
            if not fmap.is_circle and (x < 0 or x > 1):
                if (x < lo or x > hi) and on_escape == "raise":
                    raise DomainEscape(f"orbit left the domain at step {i + 1}", i + 1, float(x))
                x = mpmath.mpf(0) if x < 0 else mpmath.mpf(1)
    return Orbit(fmap, start, pts, der, dlg, prec, tag)


def _iterate_digits(fmap, N, seed, prec, tag):
    """Exact orbit of x -> m x mod 1 from a random base-m expansion.

    The start point has N + J random digits, J chosen so every orbit point
    keeps at least 64 significant bits; x_n is the digit string shifted by n.
    """
    m = int(fmap.params[0])
    J = int(math.ceil(64 / math.log2(m)))
    digits = np.random.default_rng(seed).integers(0, m, size=N + J).astype(float)
    pts = np.zeros(N + 1)
    for j in range(J - 1, -1, -1):
        pts = (pts + digits[j:j + N + 1]) / m
    pts[pts >= 1.0] = math.nextafter(1.0, 0.0)
    der = np.full(N + 1, float(m))
    dlg = np.full(N + 1, math.log(m))
    return Orbit(fmap, float(pts[0]), pts, der, dlg, max(prec, int(math.ceil((N + J) * math.log2(m)))), tag)


def orbit_from_points(fmap, points, tag="pseudo"):
    """Orbit object over arbitrary points (pseudo-orbits for controlled experiments)."""
    pts = np.asarray(points, dtype=float)
    der = fmap.deriv(pts, 1)
    with np.errstate(divide="ignore"):
        dlg = np.log(np.abs(der))
    return Orbit(fmap, float(pts[0]), pts, der, dlg, None, tag)


# -- Birkhoff statistics --------------------------------------------------------

def _mean(v):
    """Mean with the first element as shift, so constant windows are exact."""
    v = np.asarray(v, dtype=float)
    v0 = float(v[0])
    return v0 + math.fsum(v - v0) / v.size


def lyapunov_exponent(measure):
    """Window mean of log|f'|; -inf if a window point is exactly critical."""
    v = measure.dlog
    if np.any(np.isneginf(v)):
        return -math.inf
    return _mean(v)


def truncated_log(t, delta):
    """log_delta(t): 0 when t >= delta, log t otherwise (-inf at t = 0)."""
    t_arr = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(t_arr >= delta, 0.0, np.log(np.where(t_arr >= delta, 1.0, t_arr)))
    return float(out) if np.ndim(t) == 0 else out


def defect_integral(measure, delta):
    """Integral of -log|f'| over {|f'| < delta} for the window measure."""
    mask = np.abs(measure.deriv) < delta
    if not mask.any():
        return 0.0
    vals = -measure.dlog[mask]
    if np.any(np.isposinf(vals)):
        return math.inf
    return math.fsum(vals) / measure.length


def _tail_start(n, tail_fraction):
    return max(0, n - max(1, int(math.ceil(n * tail_fraction))))


def defect_alpha(seq, delta_grid, tail_fraction=DEFAULT_TAIL_FRACTION):
    """Defect table over ``delta_grid`` and the tail-sup alpha estimate."""
    grid = tuple(float(d) for d in delta_grid)
    if not grid:
        raise ValueError("delta_grid must be nonempty")
    if any(not 0.0 < d < 1.0 for d in grid) or any(a <= b for a, b in zip(grid, grid[1:])):
        raise ValueError("delta_grid must be strictly decreasing in (0, 1)")
    entries = np.array([[defect_integral(m, d) for m in seq] for d in grid])
    entries.setflags(write=False)
    t0 = _tail_start(len(seq), tail_fraction)
    alpha = float(np.max(entries[-1, t0:]))
    return DefectTable(grid, entries, alpha, bool(np.any(np.isposinf(entries))), t0)


def check_defect_identity(seq, limit_measure, table):
    """|alpha - (lambda(mu) - min over the tail of lambda(mu_k))|."""
    lam_tail = [lyapunov_exponent(m) for m in list(seq)[table.tail_start:]]
    gap = lyapunov_exponent(limit_measure) - min(lam_tail)
    if math.isinf(table.alpha_estimate) and math.isinf(gap):
        return 0.0
    return abs(table.alpha_estimate - gap)


# -- periodic orbits --------------------------------------------------------------

def _residual(fmap, x, period):
    y = x
    for _ in range(period):
        y = fmap(y)
    r = y - x
    if fmap.is_circle:
        r = r - np.round(r)
    return r


def _brackets(xs, r):
    i = np.flatnonzero((r[:-1] * r[1:] < 0) & (np.abs(r[:-1] - r[1:]) < 0.5))
    return xs[i].copy(), xs[i + 1].copy(), r[i].copy()


def find_periodic_orbit(fmap, period, seed_grid=None):
    """Periodic orbits whose minimal period divides ``period``.

    Fixed points of f^period are bracketed by sign changes on a grid and
    refined by vectorized bisection; points are grouped into cycles and each
    cycle becomes an Orbit with N equal to its minimal period.
    """
    if not 1 <= period <= 24:
        raise ValueError("period must be in [1, 24]")
    if seed_grid is None:
        lam = float(np.max(np.abs(fmap.deriv(fmap.grid(4096), 1))))
        seed_grid = int(min(2**26, max(4096, 8 * math.ceil(max(lam, 2.0) ** period))))
    xs = fmap.grid(seed_grid)
    r = _residual(fmap, xs, period)
    roots = list(xs[r == 0.0])
    lo, hi, rlo = _brackets(xs, r)
    # root pairs inside one cell: resample around near-zero extrema of the residual
    d = np.diff(r)
    ext = np.flatnonzero(d[:-1] * d[1:] < 0) + 1
    ext = ext[np.abs(r[ext]) < 4.0 * np.maximum(np.abs(d[ext - 1]), np.abs(d[ext]))]
    if ext.size:
        sub = np.linspace(0.0, 1.0, 1025)
        X = xs[ext - 1, None] + (xs[ext + 1] - xs[ext - 1])[:, None] * sub
        R = _residual(fmap, X, period)
        roots.extend(X[R == 0.0])
        for row_x, row_r in zip(X, R):
            l2, h2, r2 = _brackets(row_x, row_r)
            lo, hi, rlo = np.append(lo, l2), np.append(hi, h2), np.append(rlo, r2)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        rm = _residual(fmap, mid, period)
        left = np.sign(rm) == np.sign(rlo)
        lo = np.where(left, mid, lo)
        rlo = np.where(left, rm, rlo)
        hi = np.where(left, hi, mid)
    roots.extend(0.5 * (lo + hi))
    uniq = []
    for x in sorted(float(v) for v in roots):
        if fmap.is_circle and x >= 1.0:
            x = 0.0
        if not any(float(fmap.distance(x, u)) < 1e-12 for u in uniq[-2:] + uniq[:1]):
            uniq.append(x)
    arr = np.array(uniq)

    cycles = []
    used = np.zeros(arr.size, dtype=bool)
    for i in range(arr.size):
        if used[i]:
            continue
        members = [i]
        y = arr[i]
        for _ in range(period):
            y = float(fmap(np.array(y)))
            d = fmap.distance(arr, y)
            j = int(np.argmin(d))
            if d[j] > 1e-7 or j in members:
                break
            members.append(j)
            y = arr[j]
        used[members] = True
        cycles.append([float(arr[j]) for j in members])

    out = []
    for cyc in cycles:
        pts = np.array(cyc + [cyc[0]])
        der = fmap.deriv(pts, 1)
        with np.errstate(divide="ignore"):
            dlg = np.log(np.abs(der))
        out.append(Orbit(fmap, pts[0], pts, der, dlg, None, f"period-{len(cyc)}"))
    return out
