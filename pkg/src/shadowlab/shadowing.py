"""Shadowing intervals near critical points and piecewise shadowing intervals.

Weights follow F(j) = Lambda off the critical neighbourhood A and
2^(K+1)|f'(x_j)| on it; G-products are kept as running sums of log F with
the inclusive convention G(k) = prod_{a_1 <= j <= k} F(j).
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import (
    CriticalHit,
    DisjointSupports,
    HorizonExceeded,
    InfeasibleParameters,
    NoNearbyCritical,
    NonExpandingOrbit,
)
from .maps import refine_critical_mp

LOG2 = math.log(2.0)
DEFAULT_STEP_BUDGET = 1_000_000


class Switch(str, enum.Enum):
    SWITCHING = "switching"
    NON_SWITCHING = "non_switching"


@dataclass(frozen=True)
class ShadowParams:
    epsilon: float
    delta: float
    L: int

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InfeasibleParameters("epsilon must be positive")
        if not 0.0 < self.delta < 1.0:
            raise InfeasibleParameters("delta must lie in (0, 1)")
        if self.L < 1:
            raise InfeasibleParameters("L must be >= 1")


@dataclass(frozen=True)
class ShadowingInterval:
    """Half-open [a, b) along which x_{a+h} stays epsilon-close to f^h(c)."""

    a: int
    b: int
    critical: object
    epsilon: float

    def __post_init__(self):
        if self.b - self.a < 1:
            raise ValueError("shadowing interval needs b - a >= 1")

    @property
    def length(self):
        return self.b - self.a

    def to_dict(self):
        return {"a": self.a, "b": self.b, "critical_index": self.critical.index}


# -- reference orbits of critical points ------------------------------------------

class ReferenceOrbits:
    """Forward orbits f^h(c) of the critical points, computed in extended precision.

    Orbits grow on demand; precision is chosen so that the binary64 rounding
    of every stored point is exact to the last bit.
    """

    def __init__(self, fmap, criticals, Lambda):
        self.fmap = fmap
        self.criticals = tuple(criticals)
        self._bits_per_step = math.log2(max(Lambda, 2.0))
        self._cache = {}

    def get(self, crit, length):
        have = self._cache.get(crit.index)
        if have is None or have.size < length:
            n = max(64, length, 2 * (0 if have is None else have.size))
            self._cache[crit.index] = self._compute(crit, n)
        return self._cache[crit.index][:length]

    def _compute(self, crit, n):
        prec = 96 + int(math.ceil(n * self._bits_per_step))
        out = np.empty(n)
        with mpmath.workprec(prec):
            x = refine_critical_mp(self.fmap, crit, prec)
            for h in range(n):
                out[h] = float(x)
                x = self.fmap.mp_call(x)
                if not self.fmap.is_circle:
                    x = min(max(x, mpmath.mpf(0)), mpmath.mpf(1))
        out.setflags(write=False)
        return out


class ShadowContext:
    """Per-orbit cache of A, log-weights and critical reference orbits."""

    def __init__(self, orbit, params, constants, references=None):
        self.orbit = orbit
        self.params = params
        self.constants = constants
        self.fmap = orbit.fmap
        self.lam = constants.lambda_log
        self.K = constants.K
        self.logc = (constants.K + 1) * LOG2
        self.absd = np.abs(orbit.deriv)
        self.in_A = self.absd < params.delta
        self.A = np.flatnonzero(self.in_A[: orbit.N])
        with np.errstate(divide="ignore"):
            self.logF = np.where(self.in_A, self.logc + orbit.dlog, self.lam)
        self.refs = references or ReferenceOrbits(self.fmap, constants.critical_points,
                                                  constants.Lambda)

    @property
    def N(self):
        return self.orbit.N

    def next_A(self, start):
        """Smallest a in A with a >= start, or None."""
        i = bisect.bisect_left(self.A, start)
        return int(self.A[i]) if i < self.A.size else None

    def nearest_critical(self, a):
        x = self.orbit.points[a]
        close = [c for c in self.constants.critical_points
                 if float(self.fmap.distance(x, c.location)) < self.params.epsilon]
        if not close:
            raise NoNearbyCritical(f"no critical point within epsilon of x_{a} = {x!r}")
        return min(close, key=lambda c: float(self.fmap.distance(x, c.location)))

    def ref_point(self, crit, h):
        return float(self.refs.get(crit, h + 1)[h])


# -- basic operations ----------------------------------------------------------------

def detect_A(orbit, delta):
    """Sorted indices a < N with |f'(x_a)| < delta."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return np.flatnonzero(np.abs(orbit.deriv[: orbit.N]) < delta)


def shadow_length(orbit, a, constants):
    """l(a) = -log|f'(x_a)| / lambda (+inf at an exact critical point)."""
    return -float(orbit.dlog[a]) / constants.lambda_log


def weight_F(orbit, i, delta, K, Lambda):
    """Lambda if |f'(x_i)| >= delta, else 2^(K+1)|f'(x_i)|."""
    d = abs(float(orbit.deriv[i]))
    return Lambda if d >= delta else 2.0 ** (K + 1) * d


def delta_prime(fmap, constants, epsilon, resolution=100_000):
    """Certified delta'_1: |f'| < delta'_1 forces a unique epsilon-close critical point.

    Minimum of |f'| over points at distance >= epsilon from C(f) (grid plus
    the exact points c +/- epsilon), shrunk by 0.9 and capped at 1.
    """
    crits = constants.critical_points
    if not crits:
        return 1.0
    xs = fmap.grid(resolution)
    dist = np.min([fmap.distance(xs, c.location) for c in crits], axis=0)
    pts = [xs[dist >= epsilon]]
    for c in crits:
        for s in (-epsilon, epsilon):
            y = c.location + s
            if fmap.is_circle:
                y -= math.floor(y)
            if 0.0 <= y <= 1.0:
                pts.append(np.array([y]))
    pts = np.concatenate(pts)
    if pts.size == 0:
        return 1.0
    return min(1.0, 0.9 * float(np.min(np.abs(fmap.deriv(pts, 1)))))


def delta_bounds(fmap, constants, epsilon, L, strengthen=True):
    """The individual upper bounds on delta, as natural logs."""
    if not 0.0 < epsilon < constants.epsilon1:
        raise InfeasibleParameters(
            f"epsilon={epsilon!r} must lie in (0, epsilon1={constants.epsilon1!r})")
    if L < 1:
        raise InfeasibleParameters("L must be >= 1")
    lam = constants.lambda_log
    bounds = {
        "delta_prime": math.log(delta_prime(fmap, constants, epsilon)),
        "lambda_power": -L * lam,
        "weight_below_one": -(constants.K + 1) * LOG2,
    }
    if strengthen:
        bounds["coverage"] = -L * (L + (constants.K + 1) / lam)
    return bounds


def choose_delta(fmap, constants, epsilon, L, strengthen=True):
    """Largest power of 1/2 strictly below every delta bound."""
    log_bound = min(delta_bounds(fmap, constants, epsilon, L, strengthen).values())
    m = max(1, int(math.floor(-log_bound / LOG2)) + 1)
    while -m * LOG2 >= log_bound:
        m += 1
    while m > 1 and -(m - 1) * LOG2 < log_bound:
        m -= 1
    if m > 1074:
        raise InfeasibleParameters(f"delta = 2^-{m} underflows binary64")
    return math.ldexp(1.0, -m)


def verify_shadowing(orbit, interval, refs=None):
    """True iff d(x_{a+h}, f^h c) < epsilon for all 0 <= h < b - a."""
    if interval.b > orbit.points.size:
        raise ValueError("interval extends past the orbit horizon")
    fmap = orbit.fmap
    if refs is None:
        refs = _default_refs(fmap)
    ref = refs.get(interval.critical, interval.length)
    seg = orbit.points[interval.a:interval.b]
    return bool(np.all(fmap.distance(seg, ref) < interval.epsilon))


def first_violation(orbit, interval, refs=None):
    """Smallest h with d(x_{a+h}, f^h c) >= epsilon, or None."""
    refs = refs or _default_refs(orbit.fmap)
    ref = refs.get(interval.critical, interval.length)
    bad = np.flatnonzero(orbit.fmap.distance(orbit.points[interval.a:interval.b], ref)
                         >= interval.epsilon)
    return int(bad[0]) if bad.size else None


_REF_CACHE = {}


def _default_refs(fmap):
    if fmap not in _REF_CACHE:
        from .maps import analyze

        k = analyze(fmap)
        _REF_CACHE[fmap] = ReferenceOrbits(fmap, k.critical_points, k.Lambda)
    return _REF_CACHE[fmap]


def classify_switching(ctx, interval, b):
    """non_switching iff d(x_b, c_b) >= d(x_b, f^(b-a) c_a)."""
    x = ctx.orbit.points[b]
    cb = ctx.nearest_critical(b)
    d_new = float(ctx.fmap.distance(x, cb.location))
    d_old = float(ctx.fmap.distance(x, ctx.ref_point(interval.critical, b - interval.a)))
    return Switch.NON_SWITCHING if d_new >= d_old else Switch.SWITCHING


def check_one_step_bound(ctx, interval, b, K=None):
    """The one-step propagation inequality at an A-visit b, for its branch."""
    K = ctx.K if K is None else K
    fmap = ctx.fmap
    pts = ctx.orbit.points
    a, ca = interval.a, interval.critical
    rhs = 2.0 ** (K + 1) * ctx.absd[b] * float(fmap.distance(pts[b], ctx.ref_point(ca, b - a)))
    if classify_switching(ctx, interval, b) is Switch.NON_SWITCHING:
        lhs = float(fmap.distance(pts[b + 1], ctx.ref_point(ca, b - a + 1)))
    else:
        cb = ctx.nearest_critical(b)
        lhs = float(fmap.distance(pts[b + 1], ctx.ref_point(cb, 1)))
    return bool(lhs <= rhs)


# -- piecewise shadowing intervals ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class PSI:
    """Chain of shadowing segments [a_1,a_2), ..., [a_n,a_{n+1}).

    ``log_profile[k - a_1]`` is log G(k) for k in [a_1, a_{n+1}].
    """

    breakpoints: tuple
    refs: tuple
    log_profile: np.ndarray = field(repr=False)
    right_maximal: bool
    epsilon: float
    cases: tuple = ()
    trace: tuple = field(default=(), repr=False)
    ipsi_violations: int = 0
    context: object = field(default=None, repr=False, compare=False)

    @property
    def start(self):
        return self.breakpoints[0]

    @property
    def end(self):
        return self.breakpoints[-1]

    @property
    def support_length(self):
        return self.end - self.start

    @property
    def partial(self):
        return not self.right_maximal

    @property
    def G_profile(self):
        return np.exp(self.log_profile)

    @property
    def segments(self):
        bp = self.breakpoints
        return [ShadowingInterval(bp[i], bp[i + 1], self.refs[i], self.epsilon)
                for i in range(len(bp) - 1)]

    def truncate(self, b):
        """The PSI {[a_1,a_2),...,[a_s,b)} for a_s < b <= a_{s+1}."""
        bp = self.breakpoints
        if not bp[0] < b <= bp[-1]:
            raise ValueError("truncation point outside the support")
        s = bisect.bisect_left(bp, b) - 1
        new_bp = tuple(bp[: s + 1]) + (b,)
        prof = self.context.logF[self.start:b + 1] if self.context is not None else None
        prof = np.cumsum(prof) if prof is not None else self.log_profile[: b - self.start + 1]
        return PSI(new_bp, self.refs[: s + 1], prof, bool(prof[-1] >= 0.0), self.epsilon,
                   context=self.context)

    def to_dict(self):
        return {
            "breakpoints": list(self.breakpoints),
            "critical_indices": [c.index for c in self.refs],
            "log_G_end": float(self.log_profile[-1]),
            "G_end": float(math.exp(min(self.log_profile[-1], 700.0))),
            "right_maximal": self.right_maximal,
            "partial": self.partial,
            "cases": list(self.cases),
        }


def _crossing(ctx, a_star, s_star, lower, a1, budget):
    """First i >= lower with log G_{a*}(i) >= 0, Lambda-weights after a*.

    Returns None when the search would pass the orbit horizon.
    """
    lam = ctx.lam
    s = s_star
    i = a_star
    while True:
        i += 1
        s += lam
        if i > ctx.N:
            return None
        if i - a1 > budget:
            raise NonExpandingOrbit(f"G did not reach 1 within {budget} steps from {a1}")
        if i >= lower and s >= 0.0:
            return i


def _ipsi_violations(ctx, starts, refs, a_star, s_star, end):
    """Count tracked k in [a_1, end) breaking d(x_k, ref) < G_{a*}(k-1) * Lambda * eps."""
    a1 = starts[0]
    w = ctx.logF[a1:end].copy()
    w[a_star - a1 + 1:] = ctx.lam
    logG_prev = np.concatenate([[0.0], np.cumsum(w)[:-1]])
    bound = np.exp(logG_prev + ctx.lam) * ctx.params.epsilon
    bad = 0
    pts = ctx.orbit.points
    bps = list(starts) + [end]
    for j, c in enumerate(refs):
        lo, hi = bps[j], bps[j + 1]
        ref = ctx.refs.get(c, hi - lo)
        d = ctx.fmap.distance(pts[lo:hi], ref)
        bad += int(np.count_nonzero(~(d < bound[lo - a1:hi - a1])))
    return bad


def build_right_maximal_psi(orbit, a1, params, constants, *, ctx=None,
                            step_budget=DEFAULT_STEP_BUDGET, check_ipsi=False, trace=False):
    """Right-maximal PSI starting at the A-visit ``a1`` (inductive construction).

    Each A-visit a* inside the current support (including its right end) is
    classified switching / non-switching against the current segment: a
    non-switching visit extends the segment (Case A.1), a switching visit
    opens a new segment at a* (Case A.2).  The end is pushed to the first i
    past the previous end with G_{a*}(i) >= 1.  When no A-visit remains in
    the support (Case B) the PSI is right maximal.
    """
    ctx = ctx or ShadowContext(orbit, params, constants)
    if not (0 <= a1 < orbit.N and ctx.in_A[a1]):
        raise ValueError(f"a1={a1} is not in A")
    if ctx.absd[a1] == 0.0:
        raise CriticalHit(f"x_{a1} is exactly critical", a1)
    starts = [a1]
    refs = [ctx.nearest_critical(a1)]
    cases = []
    snaps = []
    violations = 0
    a_star = a1
    s_star = float(ctx.logF[a1])
    end = _crossing(ctx, a_star, s_star, a1 + 1, a1, step_budget)
    horizon = ctx.N + 1

    def snapshot(case):
        snaps.append({"a_star": a_star, "breakpoints": tuple(starts) + (end or horizon,),
                      "case": case})

    if trace:
        snapshot("init")
    if check_ipsi:
        violations += _ipsi_violations(ctx, starts, refs, a_star, s_star, end or ctx.N)
    while True:
        limit = end if end is not None else ctx.N - 1
        nxt = ctx.next_A(a_star + 1)
        if nxt is None or nxt > limit:
            break
        if ctx.absd[nxt] == 0.0:
            raise CriticalHit(f"x_{nxt} is exactly critical", nxt)
        current = ShadowingInterval(starts[-1], nxt, refs[-1], params.epsilon)
        if classify_switching(ctx, current, nxt) is Switch.NON_SWITCHING:
            cases.append("A.1")
        else:
            cases.append("A.2")
            starts.append(nxt)
            refs.append(ctx.nearest_critical(nxt))
        for j in range(a_star + 1, nxt + 1):
            s_star += ctx.logF[j]
        a_star = nxt
        if end is not None:
            end = _crossing(ctx, a_star, s_star, end + 1, a1, step_budget)
        if trace:
            snapshot(cases[-1])
        if check_ipsi:
            violations += _ipsi_violations(ctx, starts, refs, a_star, s_star, end or ctx.N)

    if end is None:
        stop = ctx.N
        prof = np.cumsum(ctx.logF[a1:stop + 1])
        partial = PSI(tuple(starts) + (stop,), tuple(refs), prof, False, params.epsilon,
                      tuple(cases), tuple(snaps), violations, ctx)
        raise HorizonExceeded(f"PSI from {a1} runs past the horizon {ctx.N}", partial)
    prof = np.cumsum(ctx.logF[a1:end + 1])
    return PSI(tuple(starts) + (end,), tuple(refs), prof, bool(prof[-1] >= 0.0),
               params.epsilon, tuple(cases), tuple(snaps), violations, ctx)


def psi_union(I1, I2):
    """Merge two PSIs with intersecting supports (breakpoint union)."""
    if I1.start > I2.start:
        I1, I2 = I2, I1
    if not (I2.start < I1.end and I1.start < I2.end):
        raise DisjointSupports("supports do not intersect")
    ctx = I1.context if I1.context is not None else I2.context
    end = max(I1.end, I2.end)
    starts = sorted(set(I1.breakpoints[:-1]) | set(I2.breakpoints[:-1]))
    bps = starts + [end]
    refs = []
    for j, s in enumerate(starts):
        nxt = bps[j + 1]
        choice = None
        for P in (I1, I2):
            if s in P.breakpoints[:-1]:
                i = P.breakpoints.index(s)
                if P.breakpoints[i + 1] >= nxt:
                    choice = P.refs[i]
                    break
                if choice is None:
                    choice = P.refs[i]
        refs.append(choice)
    if ctx is not None:
        prof = np.cumsum(ctx.logF[bps[0]:end + 1])
    else:
        raise ValueError("psi_union needs PSIs built on an orbit context")
    return PSI(tuple(bps), tuple(refs), prof, bool(prof[-1] >= 0.0), I1.epsilon, context=ctx)


def check_psi(psi, ctx=None):
    """Invariant checks on a PSI; returns a dict of booleans."""
    ctx = ctx or psi.context
    prof = np.cumsum(ctx.logF[psi.start:psi.end + 1])
    out = {
        "starts_in_A": all(bool(ctx.in_A[a]) for a in psi.breakpoints[:-1]),
        "increasing": all(x < y for x, y in zip(psi.breakpoints, psi.breakpoints[1:])),
        "G_below_one_inside": bool(np.all(prof[:-1] < 0.0)),
        "profile_matches": bool(np.allclose(prof, psi.log_profile, rtol=1e-9, atol=1e-12)),
    }
    if psi.right_maximal:
        out["G_at_end"] = bool(prof[-1] >= 0.0)
        out["last"] = not bool(ctx.in_A[psi.end]) if psi.end <= ctx.N else True
        out["length"] = lemma_length_holds(psi, ctx)
    return out


def lemma_length_holds(psi, ctx):
    """|supp| >= sum over A in the support of (l(a) - (K+1) log 2 / lambda)."""
    A = ctx.A[(ctx.A >= psi.start) & (ctx.A < psi.end)]
    l = -ctx.orbit.dlog[A] / ctx.lam
    rhs = float(np.sum(l - ctx.logc / ctx.lam))
    return bool(psi.support_length >= rhs - 1e-9 * max(1.0, abs(rhs)))


def disjoint_or_nested(P, Q):
    a, b = (P.start, P.end), (Q.start, Q.end)
    if a[1] <= b[0] or b[1] <= a[0]:
        return True
    return (a[0] <= b[0] and b[1] <= a[1]) or (b[0] <= a[0] and a[1] <= b[1])


# -- decomposition and coverage -------------------------------------------------

@dataclass(frozen=True, eq=False)
class ShadowingDecomposition:
    psi_list: tuple
    intervals: tuple
    params: ShadowParams
    horizon: int
    status: str = "complete"
    aborted_at: int | None = None
    context: object = field(default=None, repr=False)

    def to_dict(self):
        return {
            "params": {"epsilon": self.params.epsilon, "delta": self.params.delta,
                       "L": self.params.L},
            "horizon": self.horizon,
            "status": self.status,
            "aborted_at": self.aborted_at,
            "psi_list": [p.to_dict() for p in self.psi_list],
            "intervals": [i.to_dict() for i in self.intervals],
        }


def build_decomposition(orbit, params, constants, *, check_ipsi=False,
                        step_budget=DEFAULT_STEP_BUDGET, ctx=None):
    """Consecutive right-maximal PSIs along the orbit and the S(x) members."""
    ctx = ctx or ShadowContext(orbit, params, constants)
    psis = []
    status, aborted = "complete", None
    pos = 0
    while True:
        a = ctx.next_A(pos)
        if a is None:
            break
        try:
            psi = build_right_maximal_psi(orbit, a, params, constants, ctx=ctx,
                                          step_budget=step_budget, check_ipsi=check_ipsi)
        except HorizonExceeded as exc:
            psis.append(exc.partial)
            status = "horizon"
            break
        except CriticalHit as exc:
            status, aborted = "critical_hit", exc.index
            break
        except NonExpandingOrbit:
            status, aborted = "non_expanding", a
            break
        psis.append(psi)
        pos = psi.end
    members = tuple(seg for p in psis if p.right_maximal for seg in p.segments
                    if seg.length >= params.L)
    return ShadowingDecomposition(tuple(psis), members, params, orbit.N, status, aborted, ctx)


@dataclass(frozen=True)
class CoverageRow:
    n: int
    covered: int
    target: float
    deficit: float
    deficit_rate: float
    overhang_right: float
    overhang_left: float
    visit_mass: int
    psi_sum: float
    Psi_mean: float


@dataclass(frozen=True)
class CoverageReport:
    rows: tuple

    @property
    def final(self):
        return self.rows[-1]

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])


def n_schedule(N, n0=1000, ratio=1.25):
    """Geometric schedule of n values ending at N."""
    out = []
    n = float(min(n0, N))
    while int(round(n)) < N:
        v = int(round(n))
        if not out or v > out[-1]:
            out.append(v)
        n *= ratio
    out.append(int(N))
    return out


def coverage_report(orbit, dec, schedule=None):
    """Covered vs target along a geometric n-schedule, with tail overhangs."""
    ctx = dec.context
    N = orbit.N
    schedule = n_schedule(N) if schedule is None else list(schedule)
    L, delta = dec.params.L, dec.params.delta
    lam = ctx.lam
    cov = np.zeros(N + 1, dtype=np.int64)
    for I in dec.intervals:
        cov[I.a:min(I.b, N)] += 1
    cov_cum = np.concatenate([[0], np.cumsum(cov[:N])])
    inA = ctx.in_A[:N]
    with np.errstate(invalid="ignore"):
        phi = np.where(inA, -orbit.dlog[:N] / lam, 0.0)
        psi_small = np.where(inA, (-orbit.dlog[:N] + ctx.K + 1) / lam, 0.0)
        Psi = np.where(inA, -(orbit.dlog[:N] + ctx.logc), -lam)
    phi_cum = np.concatenate([[0.0], np.cumsum(phi)])
    psi_cum = np.concatenate([[0.0], np.cumsum(psi_small)])
    Psi_cum = np.concatenate([[0.0], np.cumsum(Psi)])
    A_cum = np.concatenate([[0], np.cumsum(inA.astype(np.int64))])
    starts = [p.start for p in dec.psi_list]
    rows = []
    for n in schedule:
        covered = int(cov_cum[n])
        target = (1.0 - 1.0 / L) * float(phi_cum[n])
        deficit = max(0.0, target - covered)
        li = bisect.bisect_left(starts, n) - 1
        a_n = b_n = n
        if li >= 0:
            P = dec.psi_list[li]
            if P.start <= n < P.end:
                a_n, b_n = P.start, P.end
        rows.append(CoverageRow(n, covered, target, deficit, deficit / n, (b_n - n) / n,
                                (n - a_n) / n, int(L * A_cum[n]), float(psi_cum[n]),
                                float(Psi_cum[n]) / n))
    return CoverageReport(tuple(rows))


def decreasing_trend(values, tol=0.0):
    """Noisy 'decreasing': the last quarter never exceeds the first quarter's max (+ tol)."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return True
    q = max(1, v.size // 4)
    return bool(v[-q:].max() <= v[:q].max() + tol)


def check_partial_shadowing(dec, orbit, delta0, L, tau=0.02):
    """The four partial-shadowing conditions with the constant covering system C(f)."""
    ctx = dec.context
    cond0 = all(I.length >= L for I in dec.intervals)
    cond1 = all(verify_shadowing(orbit, I, ctx.refs) for I in dec.intervals)
    N = orbit.N
    covered = sum(min(I.b, N) - I.a for I in dec.intervals if I.a < N)
    mask = np.abs(orbit.deriv[:N]) < delta0
    phi_sum = float(np.sum(-orbit.dlog[:N][mask])) / ctx.lam if mask.any() else 0.0
    lhs = (covered - (1.0 - 1.0 / L) * phi_sum) / N
    return {"0": cond0, "1": cond1, "2": True, "3": bool(lhs >= -tau)}


# -- lemma suites -----------------------------------------------------------------

def lemma_delta_suite(ctx):
    """Check every a in A: [a, a + ceil(l(a))) shadows and ceil(l(a)) >= L."""
    N = ctx.N
    checked = passed = skipped = 0
    failures = []
    for a in ctx.A:
        a = int(a)
        if ctx.absd[a] == 0.0:
            skipped += 1
            continue
        m = int(math.ceil(-float(ctx.orbit.dlog[a]) / ctx.lam))
        if a + m > N + 1:
            skipped += 1
            continue
        I = ShadowingInterval(a, a + m, ctx.nearest_critical(a), ctx.params.epsilon)
        ok = m >= ctx.params.L and verify_shadowing(ctx.orbit, I, ctx.refs)
        checked += 1
        passed += ok
        if not ok and len(failures) < 10:
            failures.append(a)
    return {"checked": checked, "passed": passed, "skipped_horizon": skipped,
            "first_failures": failures}


def lemma_psi_suite(dec):
    """Counts of PSI invariant checks over the right-maximal PSIs of a decomposition."""
    counts = {}
    ipsi = 0
    for psi in dec.psi_list:
        ipsi += psi.ipsi_violations
        if not psi.right_maximal:
            continue
        for key, ok in check_psi(psi).items():
            c = counts.setdefault(key, {"checked": 0, "passed": 0})
            c["checked"] += 1
            c["passed"] += int(ok)
    counts["ipsi_violations"] = ipsi
    return counts


def lemma_disjoint_suite(ctx, window=10_000, step_budget=DEFAULT_STEP_BUDGET):
    """All pairs of PSIs started at A-visits inside each window are disjoint or nested."""
    psis = {}
    for a in ctx.A:
        try:
            psis[int(a)] = build_right_maximal_psi(ctx.orbit, int(a), ctx.params,
                                                   ctx.constants, ctx=ctx,
                                                   step_budget=step_budget)
        except HorizonExceeded as exc:
            psis[int(a)] = exc.partial
        except (CriticalHit, NonExpandingOrbit):
            continue
    starts = sorted(psis)
    pairs = passed = 0
    for w0 in range(0, ctx.N, window):
        inside = [psis[a] for a in starts if w0 <= a < w0 + window]
        for i, P in enumerate(inside):
            for Q in inside[i + 1:]:
                pairs += 1
                passed += disjoint_or_nested(P, Q)
    return {"pairs": pairs, "passed": passed, "psis": len(psis)}
