"""Exact Hilbert/weight polynomial data, jet combinatorics and Futaki invariants.

Everything here is exact rational arithmetic (`fractions.Fraction`); numbers
only appear when the caller evaluates an expansion at a rational point.

Conventions (fixed in one place, see `weight_from_hamiltonian`):
  * the C*-action generated by a Hamiltonian h acts on the fiber L_p with
    weight -h(p);
  * the induced weight on the cotangent space T_p* is w = -lap_h(p).

JSON schema (version 1):
  PolarizedData   {"schema": "polarized_data/1", "m": int,
                   "a0": "p/q", "a1": "p/q", "b0": "p/q", "b1": "p/q"}
  BlowupPoint     {"schema": "blowup_point/1", "h_p": "p/q", "lap_h_p": "p/q"}
  ExactExpansion  {"schema": "exact_expansion/1", "variable": str,
                   "coefficients": {"<exponent>": "p/q", ...}}
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb, factorial


def _rat(x):
    if isinstance(x, float):
        raise TypeError("exact module: floats are not accepted, got %r" % (x,))
    return Fraction(x)


def _rat_str(q):
    return "%d/%d" % (q.numerator, q.denominator)


# ---------------------------------------------------------------------------
# formal expansions


class ExactExpansion:
    """Finite Laurent polynomial in one formal variable, exact coefficients.

    Stored canonically: no zero coefficients.
    """

    __slots__ = ("variable", "coeffs")

    def __init__(self, variable, coeffs=None):
        self.variable = variable
        self.coeffs = {}
        if coeffs:
            for k, v in coeffs.items():
                v = _rat(v)
                if v != 0:
                    self.coeffs[int(k)] = v

    @classmethod
    def constant(cls, variable, value):
        return cls(variable, {0: _rat(value)})

    @classmethod
    def monomial(cls, variable, exponent, value=1):
        return cls(variable, {exponent: _rat(value)})

    def __eq__(self, other):
        return (isinstance(other, ExactExpansion)
                and self.variable == other.variable
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.variable, tuple(sorted(self.coeffs.items()))))

    def copy(self):
        return ExactExpansion(self.variable, dict(self.coeffs))

    def _check(self, other):
        if self.variable != other.variable:
            raise ValueError("variable mismatch: %s vs %s"
                             % (self.variable, other.variable))

    def __add__(self, other):
        if not isinstance(other, ExactExpansion):
            other = ExactExpansion.constant(self.variable, other)
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
        return ExactExpansion(self.variable, out)

    __radd__ = __add__

    def __neg__(self):
        return ExactExpansion(self.variable,
                              {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, ExactExpansion):
            other = ExactExpansion.constant(self.variable, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, ExactExpansion):
            return ExactExpansion(
                self.variable,
                {k: v * _rat(other) for k, v in self.coeffs.items()})
        self._check(other)
        out = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                out[i + j] = out.get(i + j, Fraction(0)) + a * b
        return ExactExpansion(self.variable, out)

    __rmul__ = __mul__

    def truncate(self, order):
        """Drop all terms with exponent > order."""
        return ExactExpansion(self.variable,
                              {k: v for k, v in self.coeffs.items()
                               if k <= order})

    def shift(self, n):
        return ExactExpansion(self.variable,
                              {k + n: v for k, v in self.coeffs.items()})

    def inverse_series(self, order):
        """1/self as a power series up to `order` (constant term must be nonzero)."""
        c0 = self.coeffs.get(0, Fraction(0))
        if c0 == 0 or min(self.coeffs, default=0) < 0:
            raise ValueError("inverse_series needs a unit power series")
        inv = {0: 1 / c0}
        for n in range(1, order + 1):
            acc = Fraction(0)
            for k in range(1, n + 1):
                ck = self.coeffs.get(k, Fraction(0))
                if ck:
                    acc += ck * inv.get(n - k, Fraction(0))
            inv[n] = -acc / c0
        return ExactExpansion(self.variable, inv)

    def __call__(self, x):
        x = _rat(x)
        acc = Fraction(0)
        for k, v in self.coeffs.items():
            acc += v * x ** k
        return acc

    def degree(self):
        return max(self.coeffs, default=0)

    def is_zero(self):
        return not self.coeffs

    def __repr__(self):
        if not self.coeffs:
            return "ExactExpansion(%s: 0)" % self.variable
        terms = " + ".join("(%s)%s^%d" % (v, self.variable, k)
                           for k, v in sorted(self.coeffs.items()))
        return "ExactExpansion(%s)" % terms

    def to_json(self):
        return {"schema": "exact_expansion/1",
                "variable": self.variable,
                "coefficients": {str(k): _rat_str(v)
                                 for k, v in sorted(self.coeffs.items())}}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["variable"],
                   {int(k): Fraction(v)
                    for k, v in obj["coefficients"].items()})


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class PolarizedData:
    """Top two coefficients of d_k = a0 k^m + a1 k^(m-1) + ... and
    w_k = b0 k^(m+1) + b1 k^m + ...."""

    m: int
    a0: Fraction
    a1: Fraction
    b0: Fraction
    b1: Fraction

    def __post_init__(self):
        for name in ("a0", "a1", "b0", "b1"):
            object.__setattr__(self, name, _rat(getattr(self, name)))
        if self.m < 1:
            raise ValueError("dimension m must be >= 1")
        if self.a0 <= 0:
            raise ValueError("a0 must be positive (leading dimension coefficient)")

    def to_json(self):
        return {"schema": "polarized_data/1", "m": self.m,
                "a0": _rat_str(self.a0), "a1": _rat_str(self.a1),
                "b0": _rat_str(self.b0), "b1": _rat_str(self.b1)}

    @classmethod
    def from_json(cls, obj):
        return cls(m=int(obj["m"]), a0=Fraction(obj["a0"]),
                   a1=Fraction(obj["a1"]), b0=Fraction(obj["b0"]),
                   b1=Fraction(obj["b1"]))


@dataclass(frozen=True)
class BlowupPoint:
    """Hamiltonian data at the blown-up point; w is the weight on T_p*."""

    h_p: Fraction
    lap_h_p: Fraction

    def __post_init__(self):
        object.__setattr__(self, "h_p", _rat(self.h_p))
        object.__setattr__(self, "lap_h_p", _rat(self.lap_h_p))

    @property
    def w(self):
        return weight_from_hamiltonian(self.lap_h_p)

    def to_json(self):
        return {"schema": "blowup_point/1",
                "h_p": _rat_str(self.h_p), "lap_h_p": _rat_str(self.lap_h_p)}

    @classmethod
    def from_json(cls, obj):
        return cls(h_p=Fraction(obj["h_p"]), lap_h_p=Fraction(obj["lap_h_p"]))


def weight_from_hamiltonian(lap_h_p):
    """Weight of the induced action on T_p* from the Laplacian of the
    Hamiltonian at p.  This is the single place the sign convention lives:
    the action on T_p is the Hessian of h, so the weight on T_p* is
    w = -lap_h(p)."""
    return -_rat(lap_h_p)


# ---------------------------------------------------------------------------
# jet combinatorics


def jet_dimension(m, l):
    """dim of the space of (l-1)-jets of functions at a point of C^m."""
    if m < 1 or l < 1:
        raise ValueError("jet_dimension needs m >= 1 and l >= 1")
    return comb(m + l - 1, m)


def jet_weight(m, l, weights):
    """Total torus weight on (l-1)-jets: C(m+l-1, m+1) * sum(weights)."""
    if m < 1 or l < 1:
        raise ValueError("jet_weight needs m >= 1 and l >= 1")
    if len(weights) != m:
        raise ValueError("expected %d coordinate weights, got %d"
                         % (m, len(weights)))
    total = sum((_rat(w) for w in weights), Fraction(0))
    return comb(m + l - 1, m + 1) * total

def jet_dimension_enum(m, l):
    """Brute-force oracle: count monomials of degree <= l-1 in m variables."""
    return sum(1 for _ in _monomials_up_to(m, l - 1))


def jet_weight_enum(m, l, weights):
    """Brute-force oracle: sum per-monomial weights over degree <= l-1."""
    weights = [_rat(w) for w in weights]
    if len(weights) != m:
        raise ValueError("expected %d coordinate weights" % m)
    acc = Fraction(0)
    for expo in _monomials_up_to(m, l - 1):
        acc += sum((e * w for e, w in zip(expo, weights)), Fraction(0))
    return acc


def _monomials_up_to(m, maxdeg):
    for deg in range(maxdeg + 1):
        for c in combinations_with_replacement(range(m), deg):
            expo = [0] * m
            for i in c:
                expo[i] += 1
            yield tuple(expo)


# ---------------------------------------------------------------------------
# Futaki invariants


def futaki(d):
    """Futaki invariant (a1/a0) b0 - b1 of the polarized data (exact)."""
    if d.a0 == 0:
        raise ZeroDivisionError("degenerate polarized data: a0 = 0")
    return d.a1 / d.a0 * d.b0 - d.b1


def blowup_coefficients(d, p, m=None):
    """The four expansions in eps for the blowup of d at p.

    Returns a dict with keys "a0", "a1", "b0", "b1" mapping to
    ExactExpansion values:

        a0~ = a0 - eps^m/m!
        a1~ = a1 - eps^(m-1)/(2 (m-2)!)
        b0~ = b0 + eps^m/m! h(p) + eps^(m+1)/(m+1)! lap_h(p)
        b1~ = b1 + eps^(m-1)/(2 (m-2)!) h(p) + (m-2) eps^m/(2 m!) lap_h(p)
    """
    if m is None:
        m = d.m
    if m < 2:
        raise ValueError("blowup coefficients need m >= 2")
    E = lambda k, c: ExactExpansion.monomial("eps", k, c)
    a0t = ExactExpansion.constant("eps", d.a0) - E(m, Fraction(1, factorial(m)))
    a1t = (ExactExpansion.constant("eps", d.a1)
           - E(m - 1, Fraction(1, 2 * factorial(m - 2))))
    b0t = (ExactExpansion.constant("eps", d.b0)
           + E(m, Fraction(1, factorial(m)) * p.h_p)
           + E(m + 1, Fraction(1, factorial(m + 1)) * p.lap_h_p))
    b1t = (ExactExpansion.constant("eps", d.b1)
           + E(m - 1, Fraction(1, 2 * factorial(m - 2)) * p.h_p)
           + E(m, Fraction(m - 2, 2 * factorial(m)) * p.lap_h_p))
    return {"a0": a0t, "a1": a1t, "b0": b0t, "b1": b1t}


class BlowupFutaki:
    """Futaki invariant of the blowup: exact values and eps-series."""

    def __init__(self, d, p, m=None):
        self.data = d
        self.point = p
        self.m = d.m if m is None else m
        self.coeffs = blowup_coefficients(d, p, self.m)

    def value(self, eps):
        """Exact rational value at a rational eps."""
        eps = _rat(eps)
        a0t = self.coeffs["a0"](eps)
        if a0t == 0:
            raise ZeroDivisionError(
                "a0~(eps) = 0: the exceptional divisor exhausts the volume")
        return (self.coeffs["a1"](eps) / a0t * self.coeffs["b0"](eps)
                - self.coeffs["b1"](eps))

    def series_to_order(self, order):
        """eps-series of (a1~/a0~) b0~ - b1~ through eps^order, exact."""
        a0t, a1t = self.coeffs["a0"], self.coeffs["a1"]
        b0t, b1t = self.coeffs["b0"], self.coeffs["b1"]
        inv = a0t.inverse_series(order)
        return (a1t * inv * b0t - b1t).truncate(order)

    def corollary_series(self, order=None):
        """Reference series predicted for Fut(M)=0 and zero-mean data.

        Requires futaki(d) == 0, b0 == 0 (normalized Hamiltonian).  Three
        cases: m >= 3; m = 2 with a1 != 0; m = 2 with a1 = 0.  Note: the
        eps^3 coefficient for m = 2, a1 = 0 is -h(p)/(4 a0); with that sign
        the three cases are mutually consistent as a1 -> 0 and they follow
        from the blowup coefficient formulas.
        """
        d, p, m = self.data, self.point, self.m
        if futaki(d) != 0:
            raise ValueError("corollary series assumes Fut = 0 on the base")
        h, L = p.h_p, p.lap_h_p
        a0, a1 = d.a0, d.a1
        E = lambda k, c: ExactExpansion.monomial("eps", k, c)
        if m >= 3:
            if order is None:
                order = m
            ser = (E(m - 1, -h / (2 * factorial(m - 2)))
                   + E(m, -Fraction(1, factorial(m))
                       * (Fraction(m - 2, 2) * L - a1 / a0 * h)))
            return ser.truncate(order)
        if a1 != 0:
            if order is None:
                order = 3
            ser = (E(1, -h / 2) + E(2, a1 * h / (2 * a0))
                   + E(3, Fraction(1, 2) / a0 * (a1 * L / 3 - h / 2)))
            return ser.truncate(order)
        if order is None:
            order = 4
        ser = (E(1, -h / 2) + E(3, -h / (4 * a0)) + E(4, -L / (12 * a0)))
        return ser.truncate(order)

    def matches_corollary(self):
        """Exact comparison of the computed series against the reference,
        through the order the reference is stated to."""
        ref = self.corollary_series()
        order = max(ref.degree(), {2: 3}.get(self.m, self.m))
        if self.m == 2 and self.data.a1 == 0:
            order = 4
        return self.series_to_order(order) - ref


def blowup_futaki(d, p, m=None, eps=None, order=None):
    """Convenience wrapper: exact value at eps and/or truncated series.

    Returns (value, series) where value is None when eps is None and series
    is None when order is None.
    """
    bf = BlowupFutaki(d, p, m)
    value = bf.value(eps) if eps is not None else None
    series = bf.series_to_order(order) if order is not None else None
    return value, series


# ---------------------------------------------------------------------------
# projective-space oracle


def projective_weight_data(m, action_weights):
    """PolarizedData for P^m with the diagonal C*-action of the given
    integer weights on the homogeneous coordinates.

    d_k = C(m+k, m); w_k is obtained by summing monomial weights over all
    degree-k monomials at m+2 values of k and solving exactly for the
    polynomial coefficients.
    """
    if m < 1:
        raise ValueError("m >= 1 required")
    if len(action_weights) != m + 1:
        raise ValueError("need m+1 homogeneous weights")
    ws = [_rat(w) for w in action_weights]

    ks = list(range(1, m + 3))
    dvals = [Fraction(comb(m + k, m)) for k in ks]
    wvals = []
    for k in ks:
        acc = Fraction(0)
        for expo in _monomials_of_degree(m + 1, k):
            acc += sum((e * w for e, w in zip(expo, ws)), Fraction(0))
        wvals.append(acc)

    dcoef = _fit_poly(ks[: m + 1], dvals[: m + 1], m)
    wcoef = _fit_poly(ks, wvals, m + 1)
    return PolarizedData(m=m, a0=dcoef[0], a1=dcoef[1],
                         b0=wcoef[0], b1=wcoef[1])


def _monomials_of_degree(nvars, deg):
    for c in combinations_with_replacement(range(nvars), deg):
        expo = [0] * nvars
        for i in c:
            expo[i] += 1
        yield tuple(expo)


def _fit_poly(ks, vals, degree):
    """Exact polynomial fit; returns coefficients [c_deg, c_deg-1, ..., c_0]."""
    n = degree + 1
    if len(ks) < n:
        raise ValueError("not enough samples")
    A = [[Fraction(k) ** (degree - j) for j in range(n)] for k in ks[:n]]
    b = [Fraction(v) for v in vals[:n]]
    coef = _solve_exact(A, b)
    # verify on any extra samples (guards against wrong degree)
    for k, v in zip(ks[n:], vals[n:]):
        acc = sum((coef[j] * Fraction(k) ** (degree - j) for j in range(n)),
                  Fraction(0))
        if acc != v:
            raise ArithmeticError("polynomial fit inconsistent at k=%d" % k)
    return coef


def _solve_exact(A, b):
    """Gaussian elimination over Fractions."""
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [x / pv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                fac = M[r][col]
                M[r] = [x - fac * y for x, y in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]
