from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blowuplab.git_stability import (
    ConeDescription,
    WeightSystem,
    epsilon0_bound,
    is_polystable_perturbed,
    is_semistable,
    sweep_stability,
    weight_K,
    weight_L,
    zero_cone,
)

F = Fraction


def WS(L, K=(), stab=(), rank=None):
    rank = rank if rank is not None else len(L[0])
    return WeightSystem(rank=rank, L_functionals=tuple(L),
                        K_functionals=tuple(K), stabilizer=tuple(stab))


class TestWeightL:
    def test_singleton(self):
        assert weight_L(WS([(1, 0)]), (2, 1)) == 2

    def test_max(self):
        assert weight_L(WS([(1, 0), (0, 1)]), (-3, -1)) == -1

    def test_zero(self):
        assert weight_L(WS([(1, 2), (-5, 3)]), (0, 0)) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            weight_L(WS([(1, 0)]), (1, 2, 3))

    @given(c=st.fractions(min_value=F(1, 100), max_value=F(100)),
           l1=st.integers(-5, 5), l2=st.integers(-5, 5))
    @settings(max_examples=50)
    def test_positive_homogeneity(self, c, l1, l2):
        ws = WS([(1, 2), (-3, 1), (0, -2)])
        lam = (F(l1), F(l2))
        clam = tuple(c * x for x in lam)
        assert weight_L(ws, clam) == c * weight_L(ws, lam)
        assert weight_K(WS([(1, 0)], K=[(2, -1), (0, 1)]), clam) == \
            c * weight_K(WS([(1, 0)], K=[(2, -1), (0, 1)]), lam)


class TestSemistable:
    def test_abs_value_system(self):
        ok, w = is_semistable(WS([(1,), (-1,)]))
        assert ok and w is None

    def test_unstable_with_witness(self):
        ok, w = is_semistable(WS([(-1,)]))
        assert not ok
        assert weight_L(WS([(-1,)]), w) < 0

    def test_triangle(self):
        assert is_semistable(WS([(1, 1), (-1, 0), (0, -1)]))[0]

    def test_witness_destabilizes(self):
        ws = WS([(1, 1), (2, 1)])
        ok, w = is_semistable(ws)
        assert not ok
        assert weight_L(ws, w) < 0


class TestZeroCone:
    def test_quadrant_geometry(self):
        # the nonpositivity cone of {(1,0),(0,1)} is the third quadrant
        cone = nonpositivity_cone([(1, 0), (0, 1)], 2)
        assert set(cone.rays) == {(-1, 0), (0, -1)}

    def test_trivial_cone(self):
        cone = zero_cone(WS([(1,), (-1,)]))
        assert cone.rays == ()

    def test_halfplane_geometry(self):
        cone = nonpositivity_cone([(1, 1)], 2)
        assert set(cone.rays) == {(1, -1), (-1, 1), (-1, -1)}

    def test_requires_semistable(self):
        with pytest.raises(ValueError):
            zero_cone(WS([(-1,)]))

    def test_line_cone(self):
        cone = zero_cone(WS([(1, 0), (-1, 0)]))
        assert set(cone.rays) == {(0, 1), (0, -1)}

    def test_rays_sound_and_complete(self):
        # soundness: every ray has w_L = 0; completeness: dense sampling of
        # {w_L = 0} directions lands in the conic hull of the rays
        ws = WS([(1, 0, 0), (-1, 0, 0), (0, 1, 1)])
        assert is_semistable(ws)[0]
        cone = zero_cone(ws)
        for ray in cone.rays:
            assert weight_L(ws, ray) == 0
        rng = np.random.default_rng(0)
        A = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 1]], dtype=float)
        pts = rng.standard_normal((4000, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        wl = (A @ pts.T).max(axis=0)
        near_zero = pts[np.abs(wl) < 1e-3]
        assert len(near_zero) and cone.rays
        R = np.array([[float(x) for x in r] for r in cone.rays])
        from scipy.optimize import nnls
        for v in near_zero[:50]:
            _, resid = nnls(R.T, v)
            assert resid < 5e-3


class TestPolystable:
    def test_trivial_zero_cone(self):
        ok, _ = is_polystable_perturbed(WS([(1,), (-1,)], K=[(7,)]))
        assert ok

    def test_positive_wk_on_cone(self):
        # cone is the line lam_1 = 0; w_K = |lam_2| > 0 there
        ws = WS([(1, 0), (-1, 0)], K=[(0, 1), (0, -1)])
        ok, _ = is_polystable_perturbed(ws)
        assert ok

    def test_negative_wk_with_witness(self):
        ws = WS([(1, 0), (-1, 0)], K=[(0, -1)])
        ok, w = is_polystable_perturbed(ws)
        assert not ok
        assert weight_L(ws, w) == 0
        assert weight_K(ws, w) <= 0

    def test_interior_violation_found(self):
        # w_K > 0 on the plane-cone's axis rays but vanishes on the interior
        # diagonal direction
        ws = WS([(1, 0, 0), (-1, 0, 0)], K=[(0, 1, -1), (0, -1, 1)])
        ok, w = is_polystable_perturbed(ws)
        assert not ok
        assert weight_K(ws, w) <= 0 and weight_L(ws, w) == 0

    def test_stabilizer_excuses_violation(self):
        # the violating direction fixes the point -> polystable
        ws = WS([(1, 0), (-1, 0)], K=[(0, -1)], stab=[(0, 1)])
        ok, _ = is_polystable_perturbed(ws)
        assert ok

    def test_not_semistable_propagates(self):
        ok, w = is_polystable_perturbed(WS([(-1,)], K=[(1,)]))
        assert not ok and w is not None

    def test_basis_rescaling_invariance(self):
        # lattice equivariance: rescaling/permnuting coordinates of lambda
        # space (with the functionals transformed contragradiently) preserves
        # the verdict
        L = [(1, 2), (-1, 1)]
        K = [(0, -1)]
        ws = WS(L, K=K)
        base = is_polystable_perturbed(ws)[0]
        # transform lam -> diag(2, 3) P lam with P a permutation;
        # functionals transform by the inverse transpose action
        T = [[0, F(1, 2)], [F(1, 3), 0]]
        Lt = [tuple(sum(F(l[i]) * T[i][j] for i in range(2)) for j in range(2))
              for l in L]
        Kt = [tuple(sum(F(k[i]) * T[i][j] for i in range(2)) for j in range(2))
              for k in K]
        assert is_polystable_perturbed(WS(Lt, K=Kt))[0] == base


class TestEpsilon0:
    def test_interval_example(self):
        ws = WS([(1,), (-1,)], K=[(1,)])
        bound = epsilon0_bound(ws, sphere_samples=64)
        assert abs(bound - 1) < F(1, 100)

    def test_scaling_K_divides_bound(self):
        ws1 = WS([(1,), (-1,)], K=[(1,)])
        ws10 = WS([(1,), (-1,)], K=[(10,)])
        b1 = epsilon0_bound(ws1, sphere_samples=64)
        b10 = epsilon0_bound(ws10, sphere_samples=64)
        assert abs(b10 - b1 / 10) < F(1, 500)

    def test_cross_check_with_sweep(self):
        ws = WS([(1, 0), (0, 1)], K=[(-1, -1)])
        bound = epsilon0_bound(ws, sphere_samples=2048)
        assert bound > 0
        eps = [bound / 2, bound / 10]
        reports = sweep_stability(ws, eps, 3000, seed=1)
        for rep in reports:
            assert not rep["negative_off_stabilizer"]
            assert not rep["zero_off_stabilizer"]

    def test_requires_polystable(self):
        with pytest.raises(ValueError):
            epsilon0_bound(WS([(1, 0), (0, 1)], K=[(1, 1)]))


class TestSweep:
    def test_semistable_min_nonneg_at_eps0(self):
        rep = sweep_stability(WS([(1,), (-1,)]), [F(0)], 100)[0]
        assert rep["min_value"] >= 0

    def test_violating_ray_detected(self):
        ws = WS([(1, 0), (0, 1)], K=[(1, 1)])
        _, w = is_polystable_perturbed(ws)
        rep = sweep_stability(ws, [F(1, 100)], 2000, extra_rays=[w])[0]
        assert rep["negative_off_stabilizer"] or rep["zero_off_stabilizer"]

    def test_requires_positive_samples(self):
        with pytest.raises(ValueError):
            sweep_stability(WS([(1,)]), [F(1)], 0)

    def test_deterministic(self):
        ws = WS([(1, 2), (-1, 1)], K=[(1, -1)])
        a = sweep_stability(ws, [F(1, 7)], 500, seed=3)
        b = sweep_stability(ws, [F(1, 7)], 500, seed=3)
        assert a == b


class TestReduceNonAmple:
    def test_mix(self):
        ws = WS([(1, 0)], K=[(0, 1)])
        red = ws.reduce_nonample_K(2)
        assert red.K_functionals == ((F(2), F(1)),)


class TestJson:
    def test_roundtrip(self):
        ws = WS([(1, F(1, 2))], K=[(F(-2, 3), 1)], stab=[(0, 1)])
        assert WeightSystem.from_json(ws.to_json()) == ws


class TestConeDescriptionInvariant:
    def test_ray_facet_consistency_enforced(self):
        with pytest.raises(ValueError):
            ConeDescription(rays=((1, 0),), facet_normals=((1, 0),))
