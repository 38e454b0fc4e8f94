"""Low-level numeric kernels with optional numba acceleration.

Every kernel has a pure-numpy implementation. When numba is importable the
jitted variants are used unless the environment variable
``BLOWUPLAB_DISABLE_NUMBA`` is set to a non-empty value, in which case the
numpy fallbacks are selected at import time.  ``benchmarks/bench_kernels.py``
compares the two paths.
"""

import os

import numpy as np

_DISABLE = bool(os.environ.get("BLOWUPLAB_DISABLE_NUMBA"))

try:
    if _DISABLE:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


def _fornberg_weights_py(xs, x0, maxorder):
    """Fornberg finite-difference weights for derivatives 0..maxorder at x0.

    xs: 1d array of stencil nodes. Returns (len(xs), maxorder+1) array.
    """
    n = xs.shape[0]
    C = np.zeros((n, maxorder + 1))
    c1 = 1.0
    c4 = xs[0] - x0
    C[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, maxorder)
        c2 = 1.0
        c5 = c4
        c4 = xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    C[i, k] = c1 * (k * C[i - 1, k - 1] - c5 * C[i - 1, k]) / c2
                C[i, 0] = -c1 * c5 * C[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                C[j, k] = (c4 * C[j, k] - k * C[j, k - 1]) / c3
            C[j, 0] = c4 * C[j, 0] / c3
        c1 = c2
    return C


def _deriv_nonuniform_py(x, u, order, width):
    """order-th derivative of u on the nonuniform grid x, moving stencil."""
    n = x.shape[0]
    out = np.zeros(n)
    half = width // 2
    for i in range(n):
        lo = i - half
        if lo < 0:
            lo = 0
        if lo > n - width:
            lo = n - width
        C = _fornberg_weights_py(x[lo:lo + width], x[i], order)
        acc = 0.0
        for k in range(width):
            acc += C[k, order] * u[lo + k]
        out[i] = acc
    return out


def _ray_weights_py(funcs, rays):
    """Row-wise max of funcs @ rays.T  (int64 exact).

    funcs: (nf, r) int64, rays: (nr, r) int64 -> (nr,) int64.
    """
    nf = funcs.shape[0]
    nr = rays.shape[0]
    r = funcs.shape[1]
    out = np.empty(nr, dtype=np.int64)
    for j in range(nr):
        best = np.int64(-(2 ** 62))
        for i in range(nf):
            acc = np.int64(0)
            for k in range(r):
                acc += funcs[i, k] * rays[j, k]
            if acc > best:
                best = acc
        out[j] = best
    return out


if HAVE_NUMBA:
    _fornberg_weights_nb = njit(cache=True)(_fornberg_weights_py)

    @njit(cache=True)
    def _deriv_nonuniform_nb(x, u, order, width):
        n = x.shape[0]
        out = np.zeros(n)
        half = width // 2
        for i in range(n):
            lo = i - half
            if lo < 0:
                lo = 0
            if lo > n - width:
                lo = n - width
            C = _fornberg_weights_nb(x[lo:lo + width], x[i], order)
            acc = 0.0
            for k in range(width):
                acc += C[k, order] * u[lo + k]
            out[i] = acc
        return out

    _ray_weights_nb = njit(cache=True)(_ray_weights_py)

    fornberg_weights = _fornberg_weights_nb
    deriv_nonuniform = _deriv_nonuniform_nb
    ray_weights = _ray_weights_nb
    BACKEND = "numba"
else:
    fornberg_weights = _fornberg_weights_py
    deriv_nonuniform = _deriv_nonuniform_py

    def ray_weights(funcs, rays):
        # vectorized numpy fallback, still exact in int64
        return (funcs @ rays.T).max(axis=0)

    BACKEND = "numpy"


# always-available references for benchmarks
fornberg_weights_numpy = _fornberg_weights_py
deriv_nonuniform_numpy = _deriv_nonuniform_py


def ray_weights_numpy(funcs, rays):
    return (funcs @ rays.T).max(axis=0)
