"""Hot numeric kernels: circular convolution, local-maxima extraction, the
local-maximum height law of smoothed Gaussian noise, and the joint
peak/neighbor tail integral.

Kernels that benefit from compilation exist twice: an ``@njit``-compiled
version (suffix ``_jit``) and a vectorized numpy version (suffix ``_np``).
The public names at the bottom bind to one or the other depending on
``peakfdr._accel.NUMBA_ENABLED``; both implement identical math and are held
to agreement by tests/test_kernels.py. Circular convolution has a single
numpy implementation because np.convolve outperforms a compiled loop here.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _special

from ._accel import NUMBA_ENABLED, njit

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


def gaussian_taps(bandwidth: float, dt: float = 1.0, radius_mult: float = 6.0):
    """Symmetric samples of exp(-0.5 (m dt / bandwidth)^2) on an integer grid.

    Returns (taps, radius) with taps of length 2*radius+1, unnormalized.
    Callers normalize: to unit sum for smoothing weights, to unit
    discrete integral (sum * dt = 1) for a sampled probability density.
    """
    if bandwidth <= 0.0:
        raise ValueError("bandwidth must be positive")
    radius = int(math.ceil(radius_mult * bandwidth / dt))
    m = np.arange(-radius, radius + 1, dtype=np.float64) * (dt / bandwidth)
    return np.exp(-0.5 * m * m), radius


# ---------------------------------------------------------------------------
# circular convolution
#
# One implementation for both paths: np.convolve on a circularly padded
# buffer beats a compiled scalar loop at every size used here (measured in
# benchmarks/bench_kernels.py), so there is no jitted variant.
# ---------------------------------------------------------------------------


def circular_convolve(x, taps):
    """out[i] = sum_k taps[k+r] * x[(i-k) mod n] for k in [-r, r]."""
    n = x.shape[0]
    w = taps.shape[0]
    r = (w - 1) // 2
    if w > n:
        # kernel wider than one period: fold taps onto the period first
        folded = np.zeros(n, dtype=np.float64)
        for m in range(w):
            folded[(m - r) % n] += taps[m]
        out = np.zeros(n, dtype=np.float64)
        for j in range(n):
            if folded[j] != 0.0:
                out += folded[j] * np.roll(x, j)
        return out
    padded = np.concatenate((x[n - r:], x, x[:r]))
    return np.convolve(padded, taps, mode="valid")


# ---------------------------------------------------------------------------
# local maxima with plateau collapse (circular topology)
# ---------------------------------------------------------------------------


@njit
def _local_maxima_jit(y):
    n = y.shape[0]
    out = np.empty(n, dtype=np.int64)
    k = 0
    start0 = -1
    for i in range(n):
        if y[i] != y[i - 1 if i > 0 else n - 1]:
            start0 = i
            break
    if start0 < 0:
        return out[:0]  # constant sequence, no strict maxima
    i = start0
    visited = 0
    while visited < n:
        j = i
        runlen = 1
        while runlen < n and y[(j + 1) % n] == y[i]:
            j = (j + 1) % n
            runlen += 1
        prev_val = y[(i - 1) % n]
        next_val = y[(j + 1) % n]
        if y[i] > prev_val and y[i] > next_val:
            out[k] = (i + (runlen - 1) // 2) % n
            k += 1
        visited += runlen
        i = (j + 1) % n
    return np.sort(out[:k])


def _local_maxima_np(y):
    n = y.shape[0]
    change = y != np.roll(y, 1)
    starts = np.flatnonzero(change)
    if starts.size == 0:
        return np.empty(0, dtype=np.int64)
    lengths = (np.roll(starts, -1) - starts) % n
    lengths[lengths == 0] = n
    vals = y[starts]
    is_max = (vals > np.roll(vals, 1)) & (vals > np.roll(vals, -1))
    centers = (starts + (lengths - 1) // 2) % n
    return np.sort(centers[is_max].astype(np.int64))


# ---------------------------------------------------------------------------
# height law of a local maximum of stationary Gaussian noise
#
# Upper tail, with sg2 = Var z, l2 = Var z', l4 = Var z'', delta = sg2*l4-l2^2:
#   S(u) = 1 - Phi(u sqrt(l4/delta))
#          + sqrt(2 pi l2^2 / (l4 sg2)) * phi(u/sg) * Phi(u l2 / (sqrt(delta) sg))
# and its negative derivative (the height density):
#   g(u) = A phi(Au) + B C^2 u phi(Cu) Phi(Du) - B D phi(Cu) phi(Du)
# with A = sqrt(l4/delta), B = sqrt(2 pi l2^2/(l4 sg2)), C = 1/sg,
# D = l2/(sqrt(delta) sg).
# ---------------------------------------------------------------------------


@njit
def _phi_jit(x):
    return math.exp(-0.5 * x * x) / _SQRT2PI


@njit
def _ncdf_jit(x):
    return 0.5 * math.erfc(-x / _SQRT2)


@njit
def _peak_tail_jit(u, sg2, l2, l4, delta):
    a = math.sqrt(l4 / delta)
    b = math.sqrt(2.0 * math.pi * l2 * l2 / (l4 * sg2))
    sg = math.sqrt(sg2)
    d = l2 / (math.sqrt(delta) * sg)
    val = 1.0 - _ncdf_jit(a * u) + b * _phi_jit(u / sg) * _ncdf_jit(d * u)
    if val < 0.0:
        return 0.0
    if val > 1.0:
        return 1.0
    return val


@njit
def _peak_tails_jit(us, sg2, l2, l4, delta):
    out = np.empty(us.shape[0], dtype=np.float64)
    for i in range(us.shape[0]):
        out[i] = _peak_tail_jit(us[i], sg2, l2, l4, delta)
    return out


@njit
def _peak_density_jit(u, sg2, l2, l4, delta):
    if not math.isfinite(u):
        return 0.0
    a = math.sqrt(l4 / delta)
    b = math.sqrt(2.0 * math.pi * l2 * l2 / (l4 * sg2))
    sg = math.sqrt(sg2)
    c = 1.0 / sg
    d = l2 / (math.sqrt(delta) * sg)
    val = (
        a * _phi_jit(a * u)
        + b * c * c * u * _phi_jit(c * u) * _ncdf_jit(d * u)
        - b * d * _phi_jit(c * u) * _phi_jit(d * u)
    )
    return val if val > 0.0 else 0.0


def _ncdf_np(x):
    return 0.5 * _special.erfc(-np.asarray(x, dtype=np.float64) / _SQRT2)


def _peak_tails_np(us, sg2, l2, l4, delta):
    us = np.asarray(us, dtype=np.float64)
    a = math.sqrt(l4 / delta)
    b = math.sqrt(2.0 * math.pi * l2 * l2 / (l4 * sg2))
    sg = math.sqrt(sg2)
    d = l2 / (math.sqrt(delta) * sg)
    with np.errstate(invalid="ignore"):
        pdf_term = np.exp(-0.5 * (us / sg) ** 2) / _SQRT2PI
        val = 1.0 - _ncdf_np(a * us) + b * pdf_term * _ncdf_np(d * us)
    return np.clip(val, 0.0, 1.0)


def _peak_tail_np(u, sg2, l2, l4, delta):
    return float(_peak_tails_np(np.array([u]), sg2, l2, l4, delta)[0])


def _peak_density_np(u, sg2, l2, l4, delta):
    if not math.isfinite(u):
        return 0.0
    a = math.sqrt(l4 / delta)
    b = math.sqrt(2.0 * math.pi * l2 * l2 / (l4 * sg2))
    sg = math.sqrt(sg2)
    c = 1.0 / sg
    d = l2 / (math.sqrt(delta) * sg)
    phi = lambda x: math.exp(-0.5 * x * x) / _SQRT2PI  # noqa: E731
    ncdf = lambda x: 0.5 * math.erfc(-x / _SQRT2)  # noqa: E731
    val = (
        a * phi(a * u)
        + b * c * c * u * phi(c * u) * ncdf(d * u)
        - b * d * phi(c * u) * phi(d * u)
    )
    return val if val > 0.0 else 0.0


# ---------------------------------------------------------------------------
# truncated-Gaussian upper tail
# P(X > thr | X <= ub), X ~ N(mean, sd^2). Returns nan when the
# conditioning event has zero numerical mass (caller decides policy).
# ---------------------------------------------------------------------------


@njit
def _trunc_tail_jit(mean, sd, ub, thr):
    if thr >= ub:
        return 0.0
    den = _ncdf_jit((ub - mean) / sd)
    if den <= 0.0:
        return np.nan
    t = (den - _ncdf_jit((thr - mean) / sd)) / den
    if t < 0.0:
        return 0.0
    if t > 1.0:
        return 1.0
    return t


def _trunc_tail_np(mean, sd, ub, thr):
    if thr >= ub:
        return 0.0
    den = 0.5 * math.erfc(-((ub - mean) / sd) / _SQRT2)
    if den <= 0.0:
        return float("nan")
    t = (den - 0.5 * math.erfc(-((thr - mean) / sd) / _SQRT2)) / den
    return min(max(t, 0.0), 1.0)


# ---------------------------------------------------------------------------
# joint peak/neighbor upper-tail probability
#
#   p(sm, s1) = integral_{sm}^{hi} g(u) * T(u, s1) du
#
# where g is the peak-height density above and T(u, s1) is the truncated
# conditional tail P(z1 > s1 | z_peak = u, z1 <= u) with conditional mean
# rho*u and conditional sd csd = sg*sqrt(1-rho^2). Degenerate truncation
# contributes 0. The integrand vanishes for u <= s1, so integration starts
# at max(sm, s1). Evaluated by adaptive bisection with a Gauss-Kronrod 15
# rule per panel (the |K15 - G7| gap is the panel error estimate).
# ---------------------------------------------------------------------------

# QUADPACK dqk15 abscissae and weights; x[1], x[3], x[5] and the center are
# the embedded 7-point Gauss nodes
_GK15_X = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898,
])
_GK15_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298,
])
_GK15_WK_CENTER = 0.209482141084728
_GK15_WG = np.array([0.129484966168870, 0.279705391489277, 0.381830050505119])
_GK15_WG_CENTER = 0.417959183673469


@njit
def _joint_integrand_jit(u, s1, rho, csd, sg2, l2, l4, delta):
    g = _peak_density_jit(u, sg2, l2, l4, delta)
    if g == 0.0:
        return 0.0
    if s1 >= u:
        return 0.0
    den = _ncdf_jit((u - rho * u) / csd)
    if den <= 0.0:
        return 0.0
    t = (den - _ncdf_jit((s1 - rho * u) / csd)) / den
    if t <= 0.0:
        return 0.0
    if t > 1.0:
        t = 1.0
    return g * t


@njit
def _gk15_panel_jit(a, b, s1, rho, csd, sg2, l2, l4, delta):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fc = _joint_integrand_jit(c, s1, rho, csd, sg2, l2, l4, delta)
    resk = _GK15_WK_CENTER * fc
    resg = _GK15_WG_CENTER * fc
    for j in range(7):
        x = h * _GK15_X[j]
        f1 = _joint_integrand_jit(c - x, s1, rho, csd, sg2, l2, l4, delta)
        f2 = _joint_integrand_jit(c + x, s1, rho, csd, sg2, l2, l4, delta)
        resk += _GK15_WK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += _GK15_WG[(j - 1) // 2] * (f1 + f2)
    return resk * h, abs(resk - resg) * h


@njit
def _joint_pvalue_jit(sm, s1, rho, csd, sg2, l2, l4, delta, rel_tol, abs_tol, max_subdiv, hi):
    lo = max(sm, s1)  # integrand is identically zero below s1
    if hi <= lo:
        return 0.0, True
    whole, _ = _gk15_panel_jit(lo, hi, s1, rho, csd, sg2, l2, l4, delta)
    eps = max(abs_tol, rel_tol * abs(whole))
    stack = np.empty((max_subdiv + 8, 3), dtype=np.float64)
    stack[0, 0] = lo
    stack[0, 1] = hi
    stack[0, 2] = eps
    top = 1
    total = 0.0
    nsub = 0
    ok = True
    while top > 0:
        top -= 1
        a0 = stack[top, 0]
        b0 = stack[top, 1]
        e0 = stack[top, 2]
        val, err = _gk15_panel_jit(a0, b0, s1, rho, csd, sg2, l2, l4, delta)
        if err <= e0 or b0 - a0 <= 1e-14 * (hi - lo):
            total += val
        else:
            nsub += 1
            if nsub > max_subdiv or top + 2 > stack.shape[0]:
                ok = False
                total += val
                continue
            m0 = 0.5 * (a0 + b0)
            stack[top, 0] = a0
            stack[top, 1] = m0
            stack[top, 2] = 0.5 * e0
            top += 1
            stack[top, 0] = m0
            stack[top, 1] = b0
            stack[top, 2] = 0.5 * e0
            top += 1
    if total < 0.0:
        total = 0.0
    if total > 1.0:
        total = 1.0
    return total, ok


@njit
def _joint_pvalues_jit(heights, neighbors, rho, csd, sg2, l2, l4, delta, rel_tol, abs_tol, max_subdiv, cutoff_sd):
    n = heights.shape[0]
    out = np.empty(n, dtype=np.float64)
    ok = np.empty(n, dtype=np.bool_)
    sg = math.sqrt(sg2)
    for i in range(n):
        sm = heights[i]
        hi = (sm if sm > 0.0 else 0.0) + cutoff_sd * sg
        out[i], ok[i] = _joint_pvalue_jit(
            sm, neighbors[i], rho, csd, sg2, l2, l4, delta, rel_tol, abs_tol, max_subdiv, hi
        )
    return out, ok


def _joint_integrand_vec(us, s1, rho, csd, sg2, l2, l4, delta):
    us = np.asarray(us, dtype=np.float64)
    a = math.sqrt(l4 / delta)
    b = math.sqrt(2.0 * math.pi * l2 * l2 / (l4 * sg2))
    sg = math.sqrt(sg2)
    c = 1.0 / sg
    d = l2 / (math.sqrt(delta) * sg)
    g = (
        a * np.exp(-0.5 * (a * us) ** 2) / _SQRT2PI
        + b * c * c * us * (np.exp(-0.5 * (c * us) ** 2) / _SQRT2PI) * _ncdf_np(d * us)
        - b * d * (np.exp(-0.5 * (c * us) ** 2) / _SQRT2PI) * (np.exp(-0.5 * (d * us) ** 2) / _SQRT2PI)
    )
    g = np.maximum(g, 0.0)
    den = _ncdf_np((us - rho * us) / csd)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (den - _ncdf_np((s1 - rho * us) / csd)) / den
    t = np.where(den <= 0.0, 0.0, t)
    t = np.where(us <= s1, 0.0, np.clip(t, 0.0, 1.0))
    return g * t


def _gk15_panels_np(a, b, s1, rho, csd, sg2, l2, l4, delta):
    """Vectorized GK15 over an array of panels; returns (values, errors)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    nodes = np.concatenate((
        c[:, None] - h[:, None] * _GK15_X[None, :],
        c[:, None],
        c[:, None] + h[:, None] * _GK15_X[None, :],
    ), axis=1)
    fv = _joint_integrand_vec(nodes.ravel(), s1, rho, csd, sg2, l2, l4, delta).reshape(nodes.shape)
    # columns 0..6 and 8..14 both follow the _GK15_X ordering (left/right of center)
    wk = np.concatenate((_GK15_WK, [_GK15_WK_CENTER], _GK15_WK))
    resk = fv @ wk
    gauss_cols = np.array([1, 3, 5, 7, 9, 11, 13])
    wg = np.concatenate((_GK15_WG, [_GK15_WG_CENTER], _GK15_WG))
    resg = fv[:, gauss_cols] @ wg
    return resk * h, np.abs(resk - resg) * h


def _joint_pvalue_np(sm, s1, rho, csd, sg2, l2, l4, delta, rel_tol, abs_tol, max_subdiv, hi):
    lo = max(sm, s1)  # integrand is identically zero below s1
    if hi <= lo:
        return 0.0, True
    whole, _ = _gk15_panels_np(np.array([lo]), np.array([hi]), s1, rho, csd, sg2, l2, l4, delta)
    a = np.array([lo])
    b = np.array([hi])
    eps = np.array([max(abs_tol, rel_tol * abs(float(whole[0])))])
    total = 0.0
    nsub = 0
    ok = True
    min_width = 1e-14 * (hi - lo)
    while a.size:
        val, err = _gk15_panels_np(a, b, s1, rho, csd, sg2, l2, l4, delta)
        done = (err <= eps) | (b - a <= min_width)
        total += float(np.sum(val[done]))
        split = ~done
        nsplit = int(np.count_nonzero(split))
        if not nsplit:
            break
        nsub += nsplit
        if nsub > max_subdiv:
            ok = False
            total += float(np.sum(val[split]))
            break
        m = 0.5 * (a[split] + b[split])
        a = np.concatenate((a[split], m))
        b = np.concatenate((m, b[split]))
        eps = np.concatenate((0.5 * eps[split], 0.5 * eps[split]))
    return min(max(total, 0.0), 1.0), ok


def _joint_pvalues_np(heights, neighbors, rho, csd, sg2, l2, l4, delta, rel_tol, abs_tol, max_subdiv, cutoff_sd):
    n = heights.shape[0]
    out = np.empty(n, dtype=np.float64)
    ok = np.empty(n, dtype=bool)
    sg = math.sqrt(sg2)
    for i in range(n):
        sm = heights[i]
        hi = max(sm, 0.0) + cutoff_sd * sg
        out[i], ok[i] = _joint_pvalue_np(
            sm, neighbors[i], rho, csd, sg2, l2, l4, delta, rel_tol, abs_tol, max_subdiv, hi
        )
    return out, ok


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:
    local_maxima_indices = _local_maxima_jit
    peak_tail = _peak_tail_jit
    peak_tails = _peak_tails_jit
    peak_density = _peak_density_jit
    trunc_tail = _trunc_tail_jit
    joint_pvalue = _joint_pvalue_jit
    joint_pvalues = _joint_pvalues_jit
else:
    local_maxima_indices = _local_maxima_np
    peak_tail = _peak_tail_np
    peak_tails = _peak_tails_np
    peak_density = _peak_density_np
    trunc_tail = _trunc_tail_np
    joint_pvalue = _joint_pvalue_np
    joint_pvalues = _joint_pvalues_np
