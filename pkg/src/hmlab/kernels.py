"""Hot inner loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports and ``HMLAB_NUMBA`` is not set to
``0``.  Both paths compute identical results; the float kernels return
rigorous error bounds so callers can certify each decision or fall back to
exact arithmetic.

Float kernels assume IEEE double arithmetic (no fastmath) and ``m < 2**52``.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

# unit roundoff for binary64
_U = 2.0**-53

_FLAG = os.environ.get("HMLAB_NUMBA", "1").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "false", "no", "off")

try:
    import numba as _nb

    # environment noise: an old system TBB only disables one threading layer
    warnings.filterwarnings("ignore", message="The TBB threading layer", category=_nb.NumbaWarning)
except ImportError:  # pragma: no cover - numba is a declared dependency
    _nb = None

HAVE_NUMBA = _nb is not None
USE_NUMBA = HAVE_NUMBA and _WANT_NUMBA


# ---------------------------------------------------------------------------
# numpy implementations


def floor_affine_numpy(m_lo, count, theta, alpha, err_theta, err_alpha):
    m = np.arange(m_lo, m_lo + count, dtype=np.float64)
    t = m * theta + alpha
    fl = np.floor(t)
    fr = t - fl
    err = m * err_theta + err_alpha + 4.0 * _U * (np.abs(t) + abs(alpha) + 1.0)
    return fl.astype(np.int64), fr, err


def nearest_distance_numpy(q_lo, count, theta, err_theta):
    q = np.arange(q_lo, q_lo + count, dtype=np.float64)
    t = q * theta
    d = np.abs(t - np.rint(t))
    err = q * err_theta + 4.0 * _U * (np.abs(t) + 1.0)
    return d, err


def difference_scan_numpy(u, weights, r, count):
    w = np.zeros(count, dtype=u.dtype)
    for k in range(weights.shape[0]):
        b = weights[k]
        if b:
            w += b * u[k * r: k * r + count]
    return w


def poly_eval_numpy(coeffs, x):
    acc = np.zeros(x.shape[0], dtype=x.dtype)
    for c in coeffs[::-1]:
        acc = acc * x + c
    return acc


def nonzero_gaps_numpy(w):
    pos = np.flatnonzero(w)
    gaps = np.diff(pos)
    return pos.astype(np.int64), gaps.astype(np.int64)


NUMPY_IMPL = {
    "floor_affine": floor_affine_numpy,
    "nearest_distance": nearest_distance_numpy,
    "difference_scan": difference_scan_numpy,
    "poly_eval": poly_eval_numpy,
    "nonzero_gaps": nonzero_gaps_numpy,
}


# ---------------------------------------------------------------------------
# numba implementations

NUMBA_IMPL: dict = {}

if HAVE_NUMBA:
    njit = _nb.njit

    @njit(cache=True)
    def floor_affine_numba(m_lo, count, theta, alpha, err_theta, err_alpha):
        fl = np.empty(count, dtype=np.int64)
        fr = np.empty(count, dtype=np.float64)
        err = np.empty(count, dtype=np.float64)
        for i in range(count):
            m = float(m_lo + i)
            t = m * theta + alpha
            f = np.floor(t)
            fl[i] = np.int64(f)
            fr[i] = t - f
            err[i] = m * err_theta + err_alpha + 4.0 * _U * (abs(t) + abs(alpha) + 1.0)
        return fl, fr, err

    @njit(cache=True)
    def nearest_distance_numba(q_lo, count, theta, err_theta):
        d = np.empty(count, dtype=np.float64)
        err = np.empty(count, dtype=np.float64)
        for i in range(count):
            q = float(q_lo + i)
            t = q * theta
            d[i] = abs(t - np.rint(t))
            err[i] = q * err_theta + 4.0 * _U * (abs(t) + 1.0)
        return d, err

    @njit(cache=True, parallel=True)
    def difference_scan_numba(u, weights, r, count):
        w = np.zeros(count, dtype=np.int64)
        nk = weights.shape[0]
        for j in _nb.prange(count):
            acc = np.int64(0)
            for k in range(nk):
                acc += weights[k] * u[j + k * r]
            w[j] = acc
        return w

    @njit(cache=True)
    def poly_eval_numba(coeffs, x):
        n = x.shape[0]
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            acc = np.int64(0)
            for c in coeffs[::-1]:
                acc = acc * x[i] + c
            out[i] = acc
        return out

    @njit(cache=True)
    def nonzero_gaps_numba(w):
        cnt = 0
        for j in range(w.shape[0]):
            if w[j] != 0:
                cnt += 1
        pos = np.empty(cnt, dtype=np.int64)
        k = 0
        for j in range(w.shape[0]):
            if w[j] != 0:
                pos[k] = j
                k += 1
        gaps = np.empty(max(cnt - 1, 0), dtype=np.int64)
        for i in range(cnt - 1):
            gaps[i] = pos[i + 1] - pos[i]
        return pos, gaps

    NUMBA_IMPL = {
        "floor_affine": floor_affine_numba,
        "nearest_distance": nearest_distance_numba,
        "difference_scan": difference_scan_numba,
        "poly_eval": poly_eval_numba,
        "nonzero_gaps": nonzero_gaps_numba,
    }


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def _pick(name: str, dtype=None):
    # numba kernels are int64/float64 only; object arrays take the numpy route
    if USE_NUMBA and (dtype is None or dtype == np.int64):
        return NUMBA_IMPL[name]
    return NUMPY_IMPL[name]


def floor_affine(m_lo: int, count: int, theta: float, alpha: float,
                 err_theta: float, err_alpha: float):
    """``floor(m*theta + alpha)`` for ``m`` in ``[m_lo, m_lo+count)``.

    Returns ``(floors, fracs, errs)``: the float value of ``m*theta+alpha``
    lies within ``errs`` of the true one, so a floor is certified whenever
    ``errs < fracs < 1 - errs``.
    """
    return _pick("floor_affine")(int(m_lo), int(count), float(theta), float(alpha),
                                 float(err_theta), float(err_alpha))


def nearest_distance(q_lo: int, count: int, theta: float, err_theta: float):
    """``||q*theta||`` for ``q`` in ``[q_lo, q_lo+count)`` with rigorous error bounds."""
    return _pick("nearest_distance")(int(q_lo), int(count), float(theta), float(err_theta))


def difference_scan(u: np.ndarray, weights: np.ndarray, r: int, count: int) -> np.ndarray:
    """``w[j] = sum_k weights[k] * u[j + k*r]`` for ``j < count``."""
    if u.shape[0] < count + (weights.shape[0] - 1) * r:
        raise ValueError("u too short for the requested scan")
    return _pick("difference_scan", u.dtype)(u, weights.astype(u.dtype), int(r), int(count))


def poly_eval(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    return _pick("poly_eval", x.dtype)(coeffs.astype(x.dtype), x)


def nonzero_gaps(w: np.ndarray):
    """Positions of nonzero entries and the gaps between consecutive ones."""
    return _pick("nonzero_gaps", w.dtype)(w)
