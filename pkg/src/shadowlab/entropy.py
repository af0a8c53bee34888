"""Combinatorial types, spanning numbers, entropy fits and the entropy-gap report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import kernels
from .errors import InfeasibleParameters, ResolutionInsufficient
from .maps import analyze
from .orbits import defect_alpha, defect_integral

DEFAULT_MAX_POINTS = 40_000_000


# -- combinatorics ---------------------------------------------------------------

def binary_entropy(t):
    """H(t) = t log(1/t) + (1-t) log(1/(1-t)), with H(0) = H(1) = 0."""
    t = float(t)
    if t < 0.0 or t > 1.0:
        raise ValueError("t must lie in [0, 1]")
    if t == 0.0 or t == 1.0:
        return 0.0
    return -t * math.log(t) - (1.0 - t) * math.log1p(-t)


@dataclass(frozen=True)
class TypeCount:
    n: int
    L: int
    count: int
    log_rate: float


def type_counts(n, L):
    """T_L(m) for m = 0..n (exact integers)."""
    if n < 0 or L < 1:
        raise ValueError("need n >= 0 and L >= 1")
    T = [1] * (n + 1)
    prefix = [0] * (n + 2)  # prefix[m] = T(0) + ... + T(m-1)
    prefix[1] = 1
    for m in range(1, n + 1):
        T[m] = T[m - 1] + (prefix[m - L + 1] if m >= L else 0)
        prefix[m + 1] = prefix[m] + T[m]
    return T


def count_types(n, L):
    """Families of pairwise-disjoint integer intervals in [0, n), each of length >= L.

    The empty family is counted.  Recurrence: either position n-1 is
    uncovered, or the last interval is [s, n) with s <= n - L.
    """
    c = type_counts(n, L)[n]
    return TypeCount(n, L, c, math.log(c) / n if n > 0 else 0.0)


# -- spanning numbers ------------------------------------------------------------

@dataclass(frozen=True)
class SpanningEstimate:
    n: int
    epsilon: float
    subset_tag: str
    r: int
    separated_lower: int | None
    sample_size: int
    max_gap: float


def _refine(pts, gaps, target):
    """Insert evenly spaced points into every gap wider than ``target``."""
    counts = np.where(gaps > target, np.ceil(2.0 * gaps / target), 1.0).astype(np.int64)
    starts = np.repeat(pts[:-1], counts)
    widths = np.repeat(np.diff(pts) / counts, counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    return np.concatenate([starts + widths * offs, pts[-1:]])


def adaptive_grid(fmap, n, epsilon, initial=4096, max_points=DEFAULT_MAX_POINTS, start=None):
    """Sample of the domain whose adjacent points are within epsilon/4 in d_n."""
    pts = fmap.grid(initial) if start is None else np.unique(np.asarray(start, dtype=float))
    target = epsilon / 4.0
    for _ in range(64):
        gaps = kernels.adjacent_gaps(fmap, pts, n)
        if gaps.size == 0 or gaps.max() <= target:
            return pts
        new = _refine(pts, gaps, target)
        if new.size > max_points:
            raise ResolutionInsufficient(
                f"refinement for n={n}, eps={epsilon} needs more than {max_points} points")
        pts = new
    raise ResolutionInsufficient("grid refinement did not converge")


def spanning_number(fmap, n, epsilon, start_set=None, *, subset_tag=None, refine=None,
                    separated=False, max_points=DEFAULT_MAX_POINTS):
    """Greedy Bowen-ball cover of a sample in d_n (iterates 0..n-1).

    With no ``start_set`` the whole domain is sampled adaptively.  A given
    ``start_set`` is treated as a finite set unless ``refine=True``.
    """
    if n < 1 or epsilon <= 0:
        raise ValueError("need n >= 1 and epsilon > 0")
    if start_set is None:
        pts = adaptive_grid(fmap, n, epsilon, max_points=max_points)
        tag = subset_tag or "domain"
    else:
        pts = np.unique(np.asarray(start_set, dtype=float))
        if refine:
            pts = adaptive_grid(fmap, n, epsilon, max_points=max_points, start=pts)
        tag = subset_tag or "sample"
    gaps = kernels.adjacent_gaps(fmap, pts, n)
    max_gap = float(gaps.max()) if gaps.size else 0.0
    if (start_set is None or refine) and max_gap > epsilon / 4.0:
        raise ResolutionInsufficient(f"adjacent gap {max_gap:.3g} exceeds epsilon/4")
    r, _ = kernels.sweep_cover(fmap, pts, n, epsilon)
    sep = None
    if separated:
        sep = int(kernels.separated_greedy(fmap, pts, n, epsilon).size)
    return SpanningEstimate(n, float(epsilon), tag, int(r), sep, int(pts.size), max_gap)


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares fit of log r against n."""

    epsilon: float
    n: tuple
    r: tuple
    slope: float
    intercept: float
    stderr: float
    residual_rms: float

    @classmethod
    def from_counts(cls, epsilon, ns, rs):
        ns = np.asarray(ns, dtype=float)
        y = np.log(np.asarray(rs, dtype=float))
        if ns.size >= 3:
            fit = stats.linregress(ns, y)
            slope, icpt, se = float(fit.slope), float(fit.intercept), float(fit.stderr)
        elif ns.size == 2:
            slope = float((y[1] - y[0]) / (ns[1] - ns[0]))
            icpt, se = float(y[0] - slope * ns[0]), 0.0
        else:
            slope, icpt, se = 0.0, float(y[0]) if y.size else 0.0, 0.0
        resid = y - (icpt + slope * ns)
        rms = float(np.sqrt(np.mean(resid**2))) if y.size else 0.0
        return cls(float(epsilon), tuple(int(v) for v in ns), tuple(int(v) for v in rs),
                   slope, icpt, se, rms)


@dataclass(frozen=True)
class EntropyFit:
    """Spanning-number entropy fits per epsilon; ``h`` is the smallest-epsilon slope."""

    fits: tuple

    @property
    def best(self):
        return min(self.fits, key=lambda f: f.epsilon)

    @property
    def h(self):
        return self.best.slope

    @property
    def residual(self):
        return self.best.stderr

    @property
    def C_est(self):
        return max(1.0, math.exp(self.best.intercept))

    def rows(self):
        return [(f.epsilon, n, r, math.log(r)) for f in self.fits for n, r in zip(f.n, f.r)]


def topological_entropy_estimate(fmap, epsilon_schedule, n_schedule,
                                 max_points=DEFAULT_MAX_POINTS):
    """Slope of log r(n, eps) against n on adaptively refined domain grids."""
    eps_list = sorted({float(e) for e in epsilon_schedule}, reverse=True)
    ns = sorted({int(n) for n in n_schedule})
    if not eps_list or not ns:
        raise ValueError("schedules must be nonempty")
    fits = []
    for eps in eps_list:
        pts = adaptive_grid(fmap, ns[-1], eps, max_points=max_points)
        rs = [kernels.sweep_cover(fmap, pts, n, eps)[0] for n in ns]
        fits.append(SlopeFit.from_counts(eps, ns, rs))
    return EntropyFit(tuple(fits))


def katok_entropy_estimate(fmap, measure, epsilon, n_schedule, saturation=20):
    """Spanning-number slope on the window points of ``measure`` at fixed epsilon.

    Values of n where r exceeds |Z|/``saturation`` are dropped (the finite
    set caps r); if fewer than two survive, all are kept.
    """
    Z = np.unique(measure.points)
    ns = sorted({int(n) for n in n_schedule})
    rs = [kernels.sweep_cover(fmap, Z, n, epsilon)[0] for n in ns]
    keep = [i for i, r in enumerate(rs) if r * saturation <= Z.size]
    if len(keep) < 2:
        keep = list(range(len(ns)))
    return SlopeFit.from_counts(epsilon, [ns[i] for i in keep], [rs[i] for i in keep])


@dataclass(frozen=True)
class SubmulResult:
    holds: bool
    lhs: int
    factors: tuple
    rhs: int


def check_submultiplicativity(fmap, N, split, epsilon, max_points=DEFAULT_MAX_POINTS):
    """r(N, eps, X) <= prod r(n_i, eps/2, f^(m_i) X) on a refined sample X."""
    split = [int(s) for s in split]
    if sum(split) != N or any(s < 1 for s in split):
        raise ValueError("split must be positive and sum to N")
    X = adaptive_grid(fmap, N, epsilon, max_points=max_points)
    lhs = kernels.sweep_cover(fmap, X, N, epsilon)[0]
    factors = []
    Y = X
    for n_i in split:
        factors.append(int(kernels.sweep_cover(fmap, np.unique(Y), n_i, epsilon / 2.0)[0]))
        Y = kernels.trajectories(fmap, Y, n_i + 1)[:, n_i]
    rhs = math.prod(factors)
    return SubmulResult(bool(lhs <= rhs), int(lhs), tuple(factors), int(rhs))


# -- the gap formula ---------------------------------------------------------------

def k_term(epsilon, gamma, L, C_est, D_est):
    """H(2/L) + (log C + log D)/L (requires L >= 4 and C, D >= 1)."""
    if L < 4:
        raise InfeasibleParameters(f"k_term needs L >= 4 for the type-counting bound, got L={L}")
    if C_est < 1 or D_est < 1:
        raise InfeasibleParameters("C_est and D_est must be >= 1")
    if math.isinf(L):
        return 0.0
    return binary_entropy(2.0 / L) + (math.log(C_est) + math.log(D_est)) / L


def gap_rhs(h_top, h_cover, phi_mean, L, k_term_value, gamma):
    """h_top - (1 - 1/L) * phi * (h_top - h_cover) + K + 2 gamma."""
    return h_top - (1.0 - 1.0 / L) * phi_mean * (h_top - h_cover) + k_term_value + 2.0 * gamma


def phi0_mean(orbit, delta0, lambda_log, window=None):
    """Window mean of -1{|f'| < delta0} log|f'| / lambda (defect integral over lambda)."""
    start, length = (0, orbit.N) if window is None else window
    return defect_integral(orbit.measure(start, length), delta0) / lambda_log


# -- main report ---------------------------------------------------------------------

@dataclass(frozen=True)
class GapParams:
    epsilon: float = 0.1
    gamma: float = 0.01
    L: int = 8
    delta0: float = 1e-3
    delta_grid: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    htop_epsilons: tuple = (0.2, 0.1)
    htop_n: tuple = tuple(range(8, 15))
    katok_n: tuple = tuple(range(4, 11))
    tail_fraction: float = 1.0 / 3.0
    tol_factor: float = 2.0


@dataclass(frozen=True)
class MeasureEntropy:
    k: int
    length: int
    h_measure_est: float
    stderr: float
    phi_mean: float
    lyapunov: float
    rhs_gap: float
    tolerance: float
    margin: float
    violation: bool


@dataclass(frozen=True)
class GapReport:
    h_top_est: float
    h_top_residual: float
    h_measure_est: float
    alpha: float
    lambda_log: float
    phi_mean: float
    L: int
    epsilon: float
    gamma: float
    delta0: float
    K_term: float
    C_est: float
    D_est: float
    rhs_gap: float
    rhs_main: float
    violations: int
    measures: tuple = field(repr=False)
    constants: dict = field(repr=False, default_factory=dict)
    defect_table: dict = field(repr=False, default_factory=dict)
    htop_fits: tuple = field(repr=False, default=())

    def to_dict(self):
        out = {k: getattr(self, k) for k in (
            "h_top_est", "h_top_residual", "h_measure_est", "alpha", "lambda_log", "phi_mean",
            "L", "epsilon", "gamma", "delta0", "K_term", "C_est", "D_est", "rhs_gap",
            "rhs_main", "violations")}
        out["measures"] = [m.__dict__.copy() for m in self.measures]
        out["constants"] = self.constants
        out["defect_table"] = self.defect_table
        out["htop_fits"] = [
            {"epsilon": f.epsilon, "slope": f.slope, "intercept": f.intercept,
             "stderr": f.stderr, "residual_rms": f.residual_rms}
            for f in self.htop_fits
        ]
        return out


def main_report(fmap, measure_seq, params=GapParams(), constants=None, htop=None, katok=None):
    """Assemble alpha, h_top, Katok estimates and both entropy bounds.

    ``htop`` and ``katok`` (one fit per measure) may be precomputed.
    """
    constants = constants or analyze(fmap)
    lam = constants.lambda_log
    table = defect_alpha(measure_seq, params.delta_grid, params.tail_fraction)
    htop = htop or topological_entropy_estimate(fmap, params.htop_epsilons, params.htop_n)
    h_top, h_res = htop.h, htop.residual
    C_est = htop.C_est
    D_est = float(max(1, len(constants.critical_points)))
    kt = k_term(params.epsilon, params.gamma, params.L, C_est, D_est)
    rhs_main = (1.0 - table.alpha_estimate / lam) * h_top
    rows = []
    if katok is None:
        katok = [katok_entropy_estimate(fmap, mu, params.epsilon, params.katok_n)
                 for mu in measure_seq]
    for k, (mu, fit) in enumerate(zip(measure_seq, katok)):
        phi = defect_integral(mu, params.delta0) / lam
        lyap = float(np.mean(mu.dlog)) if np.all(np.isfinite(mu.dlog)) else -math.inf
        tol = params.tol_factor * (h_res + fit.stderr)
        margin = rhs_main + tol - fit.slope
        rows.append(MeasureEntropy(k, mu.length, fit.slope, fit.stderr, phi, lyap,
                                   gap_rhs(h_top, 0.0, phi, params.L, kt, params.gamma),
                                   tol, margin, bool(margin < 0)))
    tail = rows[table.tail_start:]
    h_meas = max(r.h_measure_est for r in tail)
    phi_bar = float(np.mean([r.phi_mean for r in tail]))
    return GapReport(
        h_top_est=h_top, h_top_residual=h_res, h_measure_est=h_meas,
        alpha=table.alpha_estimate, lambda_log=lam, phi_mean=phi_bar, L=params.L,
        epsilon=params.epsilon, gamma=params.gamma, delta0=params.delta0, K_term=kt,
        C_est=C_est, D_est=D_est, rhs_gap=gap_rhs(h_top, 0.0, phi_bar, params.L, kt,
                                                  params.gamma),
        rhs_main=rhs_main, violations=sum(r.violation for r in rows), measures=tuple(rows),
        constants=constants.to_dict(), defect_table=table.to_dict(), htop_fits=htop.fits,
    )
