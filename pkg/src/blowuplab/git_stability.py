"""Semistability and perturbed polystability from rational weight functionals.

A point's Hilbert-Mumford data under a rank-r torus is a finite family of
rational covectors: w_L(lam) = max_i l_i(lam) and w_K(lam) = max_j m_j(lam).
All verdicts are exact rational computations (Fourier-Motzkin feasibility and
subset-enumeration ray descriptions); only `epsilon0_bound` is sampling based
and is flagged approximate.

JSON schema (version 1):
  WeightSystem {"schema": "weight_system/1", "rank": r,
                "L": [["p/q", ...], ...], "K": [["p/q", ...], ...],
                "stabilizer": [["p/q", ...], ...]}
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd, isqrt

import numpy as np


def _ratvec(v):
    return tuple(Fraction(x) for x in v)


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _primitive(v):
    """Scale a rational vector to a primitive integer vector (same ray)."""
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return tuple(Fraction(0) for _ in v)
    return tuple(Fraction(x, g) for x in ints)


# ---------------------------------------------------------------------------
# exact linear algebra helpers


def _row_reduce(rows):
    """Reduced row echelon form over Fractions; returns (rref, pivots)."""
    M = [list(r) for r in rows]
    nr = len(M)
    nc = len(M[0]) if nr else 0
    pivots = []
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pv = M[r][c]
        M[r] = [x / pv for x in M[r]]
        for i in range(nr):
            if i != r and M[i][c] != 0:
                fac = M[i][c]
                M[i] = [x - fac * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return M[:r], pivots


def _nullspace(rows, dim):
    """Exact basis of the nullspace of the row system (rows may be empty)."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(dim))
                for i in range(dim)]
    R, pivots = _row_reduce(rows)
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * dim
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -R[i][fc]
        basis.append(tuple(v))
    return basis


def _rank(rows):
    if not rows:
        return 0
    return len(_row_reduce(rows)[0])


def _in_span(v, basis):
    """Is v in the span of basis (exact)?"""
    if all(x == 0 for x in v):
        return True
    if not basis:
        return False
    return _rank(list(basis)) == _rank(list(basis) + [list(v)])


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class WeightSystem:
    """Finite rational functional systems for w_L and w_K plus the stabilizer
    subspace (directions whose one-parameter subgroups fix the point)."""

    rank: int
    L_functionals: tuple
    K_functionals: tuple = ()
    stabilizer: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "L_functionals",
                           tuple(_ratvec(l) for l in self.L_functionals))
        object.__setattr__(self, "K_functionals",
                           tuple(_ratvec(k) for k in self.K_functionals))
        object.__setattr__(self, "stabilizer",
                           tuple(_ratvec(s) for s in self.stabilizer))
        if not self.L_functionals:
            raise ValueError("at least one L functional required")
        for v in (self.L_functionals + self.K_functionals + self.stabilizer):
            if len(v) != self.rank:
                raise ValueError("functional length != rank")

    def to_json(self):
        fmt = lambda vs: [["%d/%d" % (x.numerator, x.denominator) for x in v]
                          for v in vs]
        return {"schema": "weight_system/1", "rank": self.rank,
                "L": fmt(self.L_functionals), "K": fmt(self.K_functionals),
                "stabilizer": fmt(self.stabilizer)}

    @classmethod
    def from_json(cls, obj):
        parse = lambda vs: tuple(tuple(Fraction(x) for x in v) for v in vs)
        return cls(rank=int(obj["rank"]), L_functionals=parse(obj["L"]),
                   K_functionals=parse(obj.get("K", ())),
                   stabilizer=parse(obj.get("stabilizer", ())))

    def reduce_nonample_K(self, c):
        """Preprocessing for non-ample K: replace each m_j by c*l-mix.

        Models L + eps K = (1 - eps c)(L + eps/(1-eps c)(cL + K)): the
        effective second polarization is cL + K, realized on weight data by
        replacing the K functionals with {c l_i + m_j}.
        """
        c = Fraction(c)
        newK = tuple(tuple(c * a + b for a, b in zip(l, m))
                     for l in self.L_functionals for m in self.K_functionals)
        return WeightSystem(self.rank, self.L_functionals, newK,
                            self.stabilizer)


@dataclass(frozen=True)
class ConeDescription:
    """Rational polyhedral cone {lam : n . lam <= 0 for n in facet_normals},
    generated by `rays` (includes +/- basis vectors of the lineality space)."""

    rays: tuple
    facet_normals: tuple
    lineality: tuple = ()

    def __post_init__(self):
        for ray in self.rays:
            for nrm in self.facet_normals:
                if _dot(ray, nrm) > 0:
                    raise ValueError("ray violates facet inequality")

    def is_trivial(self):
        return not self.rays


# ---------------------------------------------------------------------------
# Fourier-Motzkin feasibility (exact)


def _fourier_motzkin_feasible(A, b):
    """Is {x : A x <= b} nonempty?  Returns (feasible, witness_or_None).

    A: list of rational rows, b: rational rhs.  Exact; witness by
    back-substitution.
    """
    n = len(A[0]) if A else 0
    system = [list(row) + [rhs] for row, rhs in zip(A, b)]
    eliminated = []

    for var in range(n):
        pos, neg, zero = [], [], []
        for row in system:
            c = row[var]
            if c > 0:
                pos.append([x / c for x in row])
            elif c < 0:
                neg.append([x / -c for x in row])
            else:
                zero.append(row)
        eliminated.append((var, pos, neg))
        new_system = zero
        for p in pos:
            for q in neg:
                comb_row = [pi + qi for pi, qi in zip(p, q)]
                comb_row[var] = Fraction(0)
                new_system.append(comb_row)
        system = new_system
        # drop duplicate rows to tame growth
        seen = set()
        dedup = []
        for row in system:
            key = tuple(row)
            if key not in seen:
                seen.add(key)
                dedup.append(row)
        system = dedup

    for row in system:
        if row[-1] < 0:  # 0 <= negative: infeasible
            return False, None

    # feasible: back-substitute a witness
    x = [Fraction(0)] * n
    for var, pos, neg in reversed(eliminated):
        # after later vars are fixed: pos rows give x_var <= ub, neg give -x_var <= ub
        ub, lb = None, None
        for p in pos:
            val = p[-1] - sum(p[j] * x[j] for j in range(n) if j != var)
            ub = val if ub is None else min(ub, val)
        for q in neg:
            val = -(q[-1] - sum(q[j] * x[j] for j in range(n) if j != var))
            lb = val if lb is None else max(lb, val)
        if lb is not None and ub is not None:
            x[var] = (lb + ub) / 2
        elif ub is not None:
            x[var] = ub
        elif lb is not None:
            x[var] = lb
    return True, tuple(x)


# ---------------------------------------------------------------------------
# operations


def weight_L(ws, lam):
    """w_L(lam) = max_i l_i(lam), exact."""
    lam = _ratvec(lam)
    if len(lam) != ws.rank:
        raise ValueError("lambda has wrong dimension")
    return max(_dot(l, lam) for l in ws.L_functionals)


def weight_K(ws, lam):
    lam = _ratvec(lam)
    if len(lam) != ws.rank:
        raise ValueError("lambda has wrong dimension")
    if not ws.K_functionals:
        return Fraction(0)
    return max(_dot(k, lam) for k in ws.K_functionals)


def is_semistable(ws):
    """Semistable iff w_L >= 0 everywhere iff {l_i(lam) <= -1 for all i} is
    infeasible.  Returns (verdict, witness): witness destabilizes on False."""
    A = [list(l) for l in ws.L_functionals]
    b = [Fraction(-1)] * len(A)
    feasible, witness = _fourier_motzkin_feasible(A, b)
    if feasible:
        return False, _primitive(witness) if any(witness) else witness
    return True, None


def nonpositivity_cone(normals, rank):
    """The cone {lam : n(lam) <= 0 for all n} with primitive extreme rays.

    Raw geometric operation; for a semistable system applied to the L
    functionals this equals {w_L = 0}.
    """
    return _cone_from_inequalities([_ratvec(n) for n in normals], rank)


def zero_cone(ws):
    """Under semistability, {w_L = 0} = {lam : l_i(lam) <= 0 for all i}.

    Returns a ConeDescription whose rays include +/- a basis of the lineality
    space plus the extreme rays of the pointed quotient, all primitive.
    """
    ok, _ = is_semistable(ws)
    if not ok:
        raise ValueError("zero_cone requires a semistable system")
    return nonpositivity_cone(ws.L_functionals, ws.rank)


def _cone_from_inequalities(normals, rank):
    lineality = _nullspace(normals, rank)
    # basis of a complement: the row space of the normals
    R, _ = _row_reduce(normals)
    comp = [tuple(row) for row in R]
    s = len(comp)
    rays = []
    if s > 0:
        # restricted inequality matrix A' y <= 0 for x = sum y_i comp_i
        Ares = [[_dot(nrm, c) for c in comp] for nrm in normals]
        cand = set()
        if s == 1:
            for d in ((Fraction(1),), (Fraction(-1),)):
                if all(sum(row[0] * d[0] for row in [rw]) <= 0
                       for rw in Ares):
                    cand.add(_primitive(d))
        else:
            for subset in combinations(range(len(Ares)), s - 1):
                sub = [Ares[i] for i in subset]
                if _rank(sub) != s - 1:
                    continue
                for d in _nullspace(sub, s):
                    for sign in (1, -1):
                        v = tuple(sign * x for x in d)
                        if all(sum(r * y for r, y in zip(row, v)) <= 0
                               for row in Ares):
                            cand.add(_primitive(v))
            # extremality: active set must have rank s-1
            cand = {d for d in cand
                    if _rank([Ares[i] for i in range(len(Ares))
                              if sum(r * y for r, y in zip(Ares[i], d)) == 0]
                             ) == s - 1}
        for d in sorted(cand):
            x = tuple(sum(d[i] * comp[i][j] for i in range(s))
                      for j in range(rank))
            rays.append(_primitive(x))
    gens = []
    for v in lineality:
        pv = _primitive(v)
        gens.append(pv)
        gens.append(tuple(-x for x in pv))
    gens.extend(rays)
    # dedupe, keep deterministic order
    seen = []
    for g in gens:
        if g not in seen and any(g):
            seen.append(g)
    return ConeDescription(rays=tuple(seen),
                           facet_normals=tuple(_primitive(n) if any(n) else n
                                               for n in normals),
                           lineality=tuple(_primitive(v) for v in lineality))


def is_polystable_perturbed(ws):
    """Polystable w.r.t. L + eps K for small eps > 0.

    True iff semistable w.r.t. L and every lam with w_L(lam) = 0 that does
    not fix the point has w_K(lam) > 0.  The check is exact: the cone
    {l_i <= 0, m_j <= 0} must be contained in the stabilizer subspace.
    Returns (verdict, witness)."""
    ok, witness = is_semistable(ws)
    if not ok:
        return False, witness
    normals = list(ws.L_functionals) + list(ws.K_functionals)
    bad = _cone_from_inequalities(normals, ws.rank)
    stab = [list(v) for v in ws.stabilizer]
    for g in bad.rays:
        if not _in_span(g, stab):
            return False, g
    return True, None


def epsilon0_bound(ws, sphere_samples=4096, seed=0, descent_steps=60):
    """Approximate delta/C bound below which w_L + eps w_K > 0 off the
    stabilizer.

    delta: the largest threshold theta such that every sampled unit direction
    with w_L < theta (a neighborhood of the zero cone) and not near the
    stabilizer has w_K > 0; refined by local descent around the binding
    sample.  C: exact upper bound max_j |m_j|_2 >= sup_sphere |w_K|.

    The result is a positive rational flagged approximate: it is only as good
    as the sampling resolution.  Requires a polystable system.
    """
    ok, _ = is_polystable_perturbed(ws)
    if not ok:
        raise ValueError("epsilon0_bound requires a perturbed-polystable system")
    r = ws.rank
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((sphere_samples, r))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    extra = []
    for v in (ws.L_functionals + ws.K_functionals):
        arr = np.array([float(x) for x in v])
        n = np.linalg.norm(arr)
        if n > 0:
            extra.append(arr / n)
            extra.append(-arr / n)
    for i in range(r):
        e = np.zeros(r)
        e[i] = 1.0
        extra += [e, -e]
    cone = zero_cone(ws)
    for ray in cone.rays:
        arr = np.array([float(x) for x in ray])
        n = np.linalg.norm(arr)
        if n > 0:
            extra.append(arr / n)
    pts = np.vstack([pts] + [np.array(extra)]) if extra else pts

    Lm = np.array([[float(x) for x in l] for l in ws.L_functionals])
    Km = (np.array([[float(x) for x in k] for k in ws.K_functionals])
          if ws.K_functionals else np.zeros((1, r)))
    wL = (Lm @ pts.T).max(axis=0)
    wK = (Km @ pts.T).max(axis=0)

    # distance to the stabilizer subspace
    if ws.stabilizer:
        S = np.array([[float(x) for x in v] for v in ws.stabilizer]).T
        Q, _ = np.linalg.qr(S)
        ortho = pts - (pts @ Q) @ Q.T
        dstab = np.linalg.norm(ortho, axis=1)
    else:
        dstab = np.ones(len(pts))
    off_stab = dstab > 1e-9

    viol = off_stab & (wK <= 0)
    if viol.any():
        theta = float(wL[viol].min())
        # local descent: minimize w_L on the sphere near the binding sample
        # subject to w_K <= 0, to sharpen theta downward
        lam = pts[viol][int(np.argmin(wL[viol]))].copy()
        step = 0.2
        for _ in range(descent_steps):
            trial = lam + step * rng.standard_normal((32, r))
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            tL = (Lm @ trial.T).max(axis=0)
            tK = (Km @ trial.T).max(axis=0)
            okm = (tK <= 0)
            if ws.stabilizer:
                ortho = trial - (trial @ Q) @ Q.T
                okm &= np.linalg.norm(ortho, axis=1) > 1e-9
            if okm.any() and tL[okm].min() < theta:
                i = np.argmin(np.where(okm, tL, np.inf))
                lam = trial[i]
                theta = float(tL[i])
            else:
                step *= 0.7
        # theta could descend to ~0 if the violating set touches the cone
        # boundary; guard with the sampling floor
        theta = max(theta, 0.0)
        if theta == 0.0:
            raise ArithmeticError(
                "descent drove delta to zero; system is at the boundary of "
                "polystability within sampling resolution")
    else:
        theta = float(wL[off_stab].max()) if off_stab.any() else 1.0

    # exact upper bound on sup |w_K| over the unit sphere
    C2max = Fraction(0)
    for k in ws.K_functionals:
        C2max = max(C2max, _dot(k, k))
    if C2max == 0:
        return Fraction(10 ** 6)  # w_K == 0: any eps keeps w_L + eps w_K >= 0
    Cbound = _sqrt_upper(C2max)
    delta = Fraction(theta).limit_denominator(10 ** 9)
    return delta / Cbound


def _sqrt_upper(q):
    """A rational upper bound for sqrt(q), tight to ~1e-9."""
    scale = 10 ** 9
    n = q.numerator * scale * scale
    d = q.denominator
    root = isqrt(n // d) + 1
    return Fraction(root, scale)


def sweep_stability(ws, eps_list, ray_samples, seed=0, extra_rays=()):
    """Independent oracle: evaluate w_L + eps w_K on sampled rational rays.

    Every per-ray evaluation is exact: rays are integer vectors, the
    functionals are scaled to integers, and sign(w_L + (p/q) w_K) is decided
    on the integer combination q*cL_scale... (common positive scalings do not
    change signs).

    Returns a list of per-eps dicts with the minimum value, whether any
    strictly negative value occurs off the stabilizer, and whether any zero
    occurs off the stabilizer.
    """
    if ray_samples < 1:
        raise ValueError("ray_samples >= 1")
    r = ws.rank
    rng = np.random.default_rng(seed)
    rays = rng.integers(-50, 51, size=(int(ray_samples), r))
    rays = rays[np.any(rays != 0, axis=1)]
    basis = []
    for i in range(r):
        e = [0] * r
        e[i] = 1
        basis.append(list(e))
        basis.append([-x for x in e])
    rays = np.vstack([rays, np.array(basis, dtype=np.int64)]
                     + ([np.array([[int(x) for x in v] for v in extra_rays],
                                  dtype=np.int64)] if extra_rays else []))
    rays = np.unique(rays, axis=0).astype(np.int64)

    # scale functionals to integers with a single common multiplier per family
    def int_scaled(funcs):
        if not funcs:
            return np.zeros((1, r), dtype=np.int64), 1
        den = 1
        for v in funcs:
            for x in v:
                den = den * x.denominator // gcd(den, x.denominator)
        M = np.array([[int(x * den) for x in v] for v in funcs],
                     dtype=np.int64)
        return M, den

    Lm, cL = int_scaled(ws.L_functionals)
    Km, cK = int_scaled(ws.K_functionals)

    from . import _kernels
    WL = np.asarray(_kernels.ray_weights(Lm, rays))  # = cL * w_L(ray), ints
    if ws.K_functionals:
        WK = np.asarray(_kernels.ray_weights(Km, rays))
    else:
        WK = np.zeros(len(rays), dtype=np.int64)

    # ray on stabilizer <=> ray orthogonal to the nullspace of the
    # stabilizer rows (row space = stabilizer span); exact integer test
    if ws.stabilizer:
        nb = _nullspace([list(v) for v in ws.stabilizer], r)
        den = 1
        for v in nb:
            for x in v:
                den = den * x.denominator // gcd(den, x.denominator)
        Nint = np.array([[int(x * den) for x in v] for v in nb],
                        dtype=np.int64)
        on_stab = np.all(rays @ Nint.T == 0, axis=1) if len(nb) else \
            np.ones(len(rays), dtype=bool)
    else:
        on_stab = np.zeros(len(rays), dtype=bool)
    off = ~on_stab

    WL_list = [int(x) for x in WL]
    WK_list = [int(x) for x in WK]
    out = []
    for eps in eps_list:
        eps = Fraction(eps)
        p, q = eps.numerator, eps.denominator
        # sign(w_L + eps w_K) = sign(q cK WL + p cL WK) since cL, cK, q > 0
        aL, aK = q * cK, p * cL
        comb_int = [aL * wl + aK * wk for wl, wk in zip(WL_list, WK_list)]
        neg_off = zero_off = False
        mn_i = 0
        for i, c in enumerate(comb_int):
            if c < comb_int[mn_i]:
                mn_i = i
            if off[i]:
                if c < 0:
                    neg_off = True
                elif c == 0:
                    zero_off = True
        out.append({
            "eps": eps,
            "min_value": Fraction(comb_int[mn_i], q * cL * cK),
            "argmin_ray": tuple(int(x) for x in rays[mn_i]),
            "negative_off_stabilizer": neg_off,
            "zero_off_stabilizer": zero_off,
        })
    return out
