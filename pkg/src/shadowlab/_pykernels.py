"""Pure-Python/numpy fallback for the compiled kernels in ``_ckernels.pyx``.

Every function mirrors its compiled twin operation for operation, so that
polynomial maps give bit-identical results on both backends.
"""

import math

import numpy as np

KIND_POLY, KIND_SINE, KIND_ARNOLD = 0, 1, 2
TWO_PI = 2.0 * math.pi


def _f_scalar(kind, coeffs, params, x):
    if kind == KIND_POLY:
        y = coeffs[-1]
        for i in range(len(coeffs) - 2, -1, -1):
            y = y * x + coeffs[i]
        return y
    if kind == KIND_SINE:
        return params[0] * math.sin(math.pi * x)
    return x + params[0] - (params[1] / TWO_PI) * math.sin(TWO_PI * x)


def _df_scalar(kind, dcoeffs, params, x):
    if kind == KIND_POLY:
        y = dcoeffs[-1]
        for i in range(len(dcoeffs) - 2, -1, -1):
            y = y * x + dcoeffs[i]
        return y
    if kind == KIND_SINE:
        return params[0] * math.pi * math.cos(math.pi * x)
    return 1.0 - params[1] * math.cos(TWO_PI * x)


def _wrap_scalar(y):
    y = y - math.floor(y)
    if y >= 1.0:
        y -= 1.0
    return y


def iterate(kind, circle, coeffs, dcoeffs, params, x0, n, clamp, tol):
    """Orbit x_0..x_n with f'(x_i) and log|f'(x_i)|.

    Returns ``(points, deriv, dlog, escape_index)``; ``escape_index`` is -1
    when no excursion beyond ``tol`` occurred.  Without ``clamp`` the orbit
    stops at the escape and trailing entries stay NaN.
    """
    coeffs = [float(c) for c in coeffs]
    dcoeffs = [float(c) for c in dcoeffs]
    params = [float(p) for p in params]
    pts = np.full(n + 1, np.nan)
    der = np.full(n + 1, np.nan)
    dlg = np.full(n + 1, np.nan)
    x = float(x0)
    escape = -1
    log = math.log
    for i in range(n + 1):
        d = _df_scalar(kind, dcoeffs, params, x)
        pts[i] = x
        der[i] = d
        dlg[i] = log(abs(d)) if d != 0.0 else -math.inf
        if i == n:
            break
        y = _f_scalar(kind, coeffs, params, x)
        if circle:
            y = _wrap_scalar(y)
        elif y != y:
            escape = i + 1
            break
        elif y < 0.0 or y > 1.0:
            if (y < -tol or y > 1.0 + tol) and escape < 0:
                escape = i + 1
                if not clamp:
                    break
            y = 0.0 if y < 0.0 else 1.0
        x = y
    return pts, der, dlg, escape


def _step(kind, circle, coeffs, params, y):
    if kind == KIND_POLY:
        z = np.full_like(y, coeffs[-1])
        for i in range(len(coeffs) - 2, -1, -1):
            z = z * y + coeffs[i]
    elif kind == KIND_SINE:
        z = params[0] * np.sin(math.pi * y)
    else:
        z = y + params[0] - (params[1] / TWO_PI) * np.sin(TWO_PI * y)
    if circle:
        z = z - np.floor(z)
        z = np.where(z >= 1.0, z - 1.0, z)
    else:
        z = np.clip(z, 0.0, 1.0)
    return z


def _dist(a, b, circle):
    d = np.abs(a - b)
    if circle:
        d = np.minimum(d, 1.0 - d)
    return d


def trajectories(kind, circle, coeffs, params, pts, n):
    """Matrix of shape (len(pts), n) with f^t(pts) in column t."""
    pts = np.asarray(pts, dtype=float)
    out = np.empty((pts.size, n))
    y = pts.copy()
    for t in range(n):
        out[:, t] = y
        if t + 1 < n:
            y = _step(kind, circle, coeffs, params, y)
    return out


def adjacent_gaps(kind, circle, coeffs, params, pts, n):
    """d_n between consecutive sample points (length len(pts) - 1)."""
    pts = np.asarray(pts, dtype=float)
    y = pts.copy()
    gaps = np.zeros(max(pts.size - 1, 0))
    for t in range(n):
        np.maximum(gaps, _dist(y[:-1], y[1:], circle), out=gaps)
        if t + 1 < n:
            y = _step(kind, circle, coeffs, params, y)
    return gaps


def sweep_cover(kind, circle, coeffs, params, pts, n, eps):
    """Contiguous greedy cover of sorted ``pts`` by Bowen balls B(center, eps, n).

    Returns ``(r, centers)``.
    """
    pts = np.asarray(pts, dtype=float)
    m = pts.size
    centers = []
    i = 0
    while i < m:
        centers.append(i)
        ctraj = trajectories(kind, circle, coeffs, params, pts[i:i + 1], n)[0]
        j = i + 1
        block = 64
        while j < m:
            y = pts[j:j + block].copy()
            ok = np.ones(y.size, dtype=bool)
            for t in range(n):
                ok &= _dist(y, ctraj[t], circle) < eps
                if not ok.any():
                    break
                if t + 1 < n:
                    y = _step(kind, circle, coeffs, params, y)
            bad = np.flatnonzero(~ok)
            if bad.size:
                j += int(bad[0])
                break
            j += y.size
            block *= 2
        i = j
    return len(centers), np.asarray(centers, dtype=np.int64)


def separated_greedy(traj, pts, eps, circle):
    """Greedy eps-separated subset (in d_n) of sorted points with trajectory rows."""
    traj = np.asarray(traj, dtype=float)
    pts = np.asarray(pts, dtype=float)
    chosen = []
    for i in range(pts.size):
        ok = True
        for s in reversed(chosen):
            if pts[i] - pts[s] >= eps:
                break
            if _dist(traj[i], traj[s], circle).max() < eps:
                ok = False
                break
        if ok and circle:
            for s in chosen:
                if pts[s] > pts[i] - (1.0 - eps):
                    break
                if _dist(traj[i], traj[s], circle).max() < eps:
                    ok = False
                    break
        if ok:
            chosen.append(i)
    return np.asarray(chosen, dtype=np.int64)
