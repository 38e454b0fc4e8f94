"""Shared radial Kahler machinery.

A U(m)-invariant Kahler metric on a chart of C^m is encoded by its potential
A(s), s = |z|^2, through f = A'(s).  The metric Hessian has eigenvalue f with
multiplicity m-1 and f + s f' in the radial direction, so

    det factor      f^(m-1) (f + s f')
    Laplacian       Delta u = (m-1) u'/f + (u' + s u'')/(f + s f')
    scalar curv     s(omega) = -Delta log(f^(m-1)(f + s f'))

with the complex (Kahler) Laplacian, which is half the Riemannian one, and the
scalar curvature normalized to half the Riemannian value.  Real gradients pair
as  grad a . grad b = 2 s a' b' / (f + s f').

`Jet` carries a function and its s-derivatives on a grid so curvature can be
evaluated from closed-form expressions instead of stacked finite differences;
`jet_from_grid` supplies FD jets when nothing analytic is available.
"""

from math import comb

import numpy as np

from . import _kernels


class Jet:
    """Values and s-derivatives d[0..order] of a radial function on a grid.

    Binary operations truncate to the smaller order.  Entries are numpy
    arrays (or scalars broadcastable against them).
    """

    __slots__ = ("d",)

    def __init__(self, derivs):
        self.d = [np.asarray(x, dtype=float) for x in derivs]

    @property
    def order(self):
        return len(self.d) - 1

    @property
    def value(self):
        return self.d[0]

    @classmethod
    def variable(cls, s, order):
        s = np.asarray(s, dtype=float)
        d = [s, np.ones_like(s)] + [np.zeros_like(s) for _ in range(order - 1)]
        return cls(d[: order + 1])

    @classmethod
    def constant(cls, c, like, order):
        base = np.full_like(np.asarray(like, dtype=float), float(c))
        return cls([base] + [np.zeros_like(base) for _ in range(order)])

    def truncate(self, order):
        return Jet(self.d[: order + 1])

    def deriv(self):
        """Jet of f', one order lower."""
        return Jet(self.d[1:])

    def __add__(self, other):
        if isinstance(other, Jet):
            n = min(self.order, other.order)
            return Jet([self.d[k] + other.d[k] for k in range(n + 1)])
        d = [x.copy() for x in self.d]
        d[0] = d[0] + other
        return Jet(d)

    __radd__ = __add__

    def __neg__(self):
        return Jet([-x for x in self.d])

    def __sub__(self, other):
        if isinstance(other, Jet):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet([x * other for x in self.d])
        n = min(self.order, other.order)
        d = []
        for k in range(n + 1):
            acc = self.d[0] * 0.0
            for i in range(k + 1):
                acc = acc + comb(k, i) * self.d[i] * other.d[k - i]
            d.append(acc)
        return Jet(d)

    __rmul__ = __mul__

    def reciprocal(self):
        g0 = 1.0 / self.d[0]
        g = [g0]
        for k in range(1, self.order + 1):
            acc = self.d[0] * 0.0
            for i in range(1, k + 1):
                acc = acc + comb(k, i) * self.d[i] * g[k - i]
            g.append(-g0 * acc)
        return Jet(g)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def log(self):
        if self.order == 0:
            return Jet([np.log(self.d[0])])
        q = Jet(self.d[1:]) / Jet(self.d[:-1])  # f'/f at order-1
        return Jet([np.log(self.d[0])] + q.d)

    def sqrt(self):
        return self.powf(0.5)

    def powf(self, p):
        """self**p, implemented through order 4 (all this package needs)."""
        f = self.d
        n = self.order
        if n > 4:
            raise ValueError("powf implemented through order 4")
        d = [f[0] ** p]
        if n >= 1:
            d.append(p * f[0] ** (p - 1) * f[1])
        if n >= 2:
            d.append(p * (p - 1) * f[0] ** (p - 2) * f[1] ** 2
                     + p * f[0] ** (p - 1) * f[2])
        if n >= 3:
            d.append(p * (p - 1) * (p - 2) * f[0] ** (p - 3) * f[1] ** 3
                     + 3 * p * (p - 1) * f[0] ** (p - 2) * f[1] * f[2]
                     + p * f[0] ** (p - 1) * f[3])
        if n >= 4:
            d.append(p * (p - 1) * (p - 2) * (p - 3) * f[0] ** (p - 4) * f[1] ** 4
                     + 6 * p * (p - 1) * (p - 2) * f[0] ** (p - 3) * f[1] ** 2 * f[2]
                     + 3 * p * (p - 1) * f[0] ** (p - 2) * f[2] ** 2
                     + 4 * p * (p - 1) * f[0] ** (p - 2) * f[1] * f[3]
                     + p * f[0] ** (p - 1) * f[4])
        return Jet(d)

    def where(self, mask, other):
        n = min(self.order, other.order)
        return Jet([np.where(mask, self.d[k], other.d[k]) for k in range(n + 1)])


def polyval_jet(coeffs, u):
    """Polynomial (highest degree first) evaluated on a Jet by Horner."""
    acc = Jet.constant(coeffs[0], u.d[0], u.order)
    for c in coeffs[1:]:
        acc = acc * u + c
    return acc


# ---------------------------------------------------------------------------
# radial geometry


def radial_metric_jets(s, fjet):
    """(f, g_rad = f + s f') as jets of order fjet.order - 1."""
    n = fjet.order - 1
    sj = Jet.variable(s, n)
    f = fjet.truncate(n)
    g_rad = f + sj * fjet.deriv()
    return f, g_rad


def laplacian_jet(s, fjet, ujet, m, out_order=0):
    """Complex Laplacian of u as a jet of order out_order."""
    n = out_order
    if ujet.order < n + 2 or fjet.order < n + 1:
        raise ValueError("insufficient jet order for laplacian")
    sj = Jet.variable(s, n)
    f = fjet.truncate(n)
    fp = fjet.deriv().truncate(n)
    g_rad = f + sj * fp
    up = ujet.deriv().truncate(n + 1)
    upp = ujet.deriv().deriv().truncate(n)
    term1 = up.truncate(n) * f.reciprocal() * (m - 1)
    term2 = (up.truncate(n) + sj * upp) / g_rad
    return term1 + term2


def log_det_jet(s, fjet, m):
    """log(f^(m-1)(f + s f')) as a jet of order fjet.order - 1."""
    f, g_rad = radial_metric_jets(s, fjet)
    return f.log() * (m - 1) + g_rad.log()


def scalar_curvature(s, fjet, m, out_order=0):
    """Scalar curvature jet of order out_order; needs fjet.order >= out_order+3."""
    if fjet.order < out_order + 3:
        raise ValueError("need f jet of order >= %d" % (out_order + 3))
    L = log_det_jet(s, fjet, m)  # order fjet.order-1
    return -laplacian_jet(s, fjet, L, m, out_order=out_order)


def ricci_contract(s, fjet, ujet, m):
    """Ric^{i jbar} u_{i jbar} values; needs fjet.order >= 3, ujet.order >= 2."""
    s = np.asarray(s, dtype=float)
    L = log_det_jet(s, fjet, m)  # order >= 2
    Lp, Lpp = L.d[1], L.d[2]
    f0 = fjet.d[0]
    g_rad = f0 + s * fjet.d[1]
    up, upp = ujet.d[1], ujet.d[2]
    tangential = (m - 1) * (-Lp) * up / f0 ** 2
    radial = (-(Lp + s * Lpp)) * (up + s * upp) / g_rad ** 2
    return tangential + radial


def grad_pair(s, fjet, ajet, bjet):
    """Real-gradient pairing grad a . grad b = 2 s a' b'/(f + s f') (values)."""
    s = np.asarray(s, dtype=float)
    g_rad = fjet.d[0] + s * fjet.d[1]
    return 2.0 * s * ajet.d[1] * bjet.d[1] / g_rad


def linearized_scalar_jet(s, fjet, ujet, m):
    """L(u) = Delta^2 u + Ric^{i jbar} u_{i jbar} (values).

    Needs fjet.order >= 3 and ujet.order >= 4.
    """
    lap_u = laplacian_jet(s, fjet, ujet, m, out_order=2)
    lap2 = laplacian_jet(s, fjet, lap_u, m, out_order=0).d[0]
    return lap2 + ricci_contract(s, fjet, ujet, m)


def lichnerowicz_apply(s, fjet, ujet, m, drift_scal_jet=None):
    """D*D u = L(u) - 1/2 grad s(omega) . grad u (values).

    drift_scal_jet: optional order>=1 jet of the scalar curvature; when None
    the drift term is computed from fjet (requires fjet.order >= 4).
    """
    Lu = linearized_scalar_jet(s, fjet, ujet, m)
    if drift_scal_jet is None:
        sc = scalar_curvature(s, fjet, m, out_order=1)
        drift_scal_jet = sc
    drift = 0.5 * grad_pair(s, fjet, drift_scal_jet, ujet)
    return Lu - drift


def hamiltonian_jet(s, fjet, order=None):
    """Hamiltonian of the diagonal S^1 rotation field: s*f(s), as a jet."""
    if order is None:
        order = fjet.order
    sj = Jet.variable(s, order)
    return sj * fjet.truncate(order)


# ---------------------------------------------------------------------------
# grid derivatives (FD) on arbitrary strictly increasing grids


def grid_derivative(x, u, order, width=7):
    """order-th derivative of grid values u on grid x (moving Fornberg stencils)."""
    x = np.ascontiguousarray(x, dtype=float)
    u = np.ascontiguousarray(u, dtype=float)
    if x.size < width:
        width = x.size if x.size % 2 == 1 else x.size - 1
    return _kernels.deriv_nonuniform(x, u, int(order), int(width))


def jet_from_grid(x, u, order, width=9):
    """Build a Jet of given order from grid values by finite differences."""
    d = [np.asarray(u, dtype=float)]
    for k in range(1, order + 1):
        d.append(grid_derivative(x, u, k, width=width))
    return Jet(d)


def geometric_grid(lo, hi, per_decade):
    """Strictly increasing geometric grid from lo to hi."""
    n = max(int(np.ceil(np.log10(hi / lo) * per_decade)) + 1, 8)
    return np.exp(np.linspace(np.log(lo), np.log(hi), n))


# ---------------------------------------------------------------------------
# independent finite-difference curvature oracle on a full 2m-dim patch


def _wirtinger_hessian(potential, z0, h):
    """Complex Hessian u_{i jbar} at z0 by 2nd-order central differences."""
    m = z0.shape[0]
    n = 2 * m

    def ureal(xr):
        z = xr[..., :m] + 1j * xr[..., m:]
        return potential(z)

    x0 = np.concatenate([z0.real, z0.imag])
    pts = []
    for a in range(n):
        for b in range(a, n):
            for sa in (1, -1):
                for sb in (1, -1):
                    x = x0.copy()
                    x[a] += sa * h
                    x[b] += sb * h
                    pts.append(x)
    vals = ureal(np.array(pts))
    H = np.zeros((n, n))
    k = 0
    for a in range(n):
        for b in range(a, n):
            acc = 0.0
            for sa in (1, -1):
                for sb in (1, -1):
                    acc += sa * sb * vals[k]
                    k += 1
            H[a, b] = H[b, a] = acc / (4 * h * h)
    G = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            G[i, j] = 0.25 * (H[i, j] + H[m + i, m + j]
                              + 1j * (H[i, m + j] - H[m + i, j]))
    return G


def patch_scalar_curvature(potential, z0, m, h1=None, h2=None):
    """Scalar curvature at z0 in C^m from the potential alone.

    Fully independent of the radial pipeline: builds g_{i jbar} by Wirtinger
    finite differences of the potential, then contracts
    -g^{i jbar} d_i d_jbar log det g with a second FD level.  Complex
    (half-Riemannian) convention, matching `scalar_curvature`.
    """
    z0 = np.asarray(z0, dtype=complex)
    scale = max(np.linalg.norm(z0), 1.0)
    if h1 is None:
        h1 = 3e-3 * scale
    if h2 is None:
        h2 = 3e-3 * scale

    def logdet(z):
        G = _wirtinger_hessian(potential, z, h2)
        return np.log(np.linalg.det(G).real)

    n = 2 * m
    x0 = np.concatenate([z0.real, z0.imag])

    H = np.zeros((n, n))
    cache = {}

    def ld_cached(x):
        key = tuple(np.round((x - x0) / h1 * 4).astype(np.int64))
        if key not in cache:
            cache[key] = logdet(x[:m] + 1j * x[m:])
        return cache[key]

    for a in range(n):
        for b in range(a, n):
            acc = 0.0
            for sa in (1, -1):
                for sb in (1, -1):
                    x = x0.copy()
                    x[a] += sa * h1
                    x[b] += sb * h1
                    acc += sa * sb * ld_cached(x)
            H[a, b] = H[b, a] = acc / (4 * h1 * h1)
    Gld = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            Gld[i, j] = 0.25 * (H[i, j] + H[m + i, m + j]
                                + 1j * (H[i, m + j] - H[m + i, j]))
    g = _wirtinger_hessian(potential, z0, h2)
    ginv = np.linalg.inv(g)
    # s = -g^{i jbar} (log det g)_{i jbar}; ginv[j,i] pairs with Gld[i,j]
    return -np.real(np.sum(ginv.T * Gld))
