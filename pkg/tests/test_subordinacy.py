import math

import numpy as np
import pytest

from quasispec.arithmetic import resolve_alpha
from quasispec.cocycle import Potential, solution
from quasispec.subordinacy import (
    JL_LOWER,
    JL_UPPER,
    KKL_LOWER,
    KKL_UPPER,
    _beta_products,
    default_k_list,
    det_via_beta_scan,
    jl_bracket_check,
    p_matrix,
    profile,
)
from quasispec.weyl import NoConvergence

ALPHA = resolve_alpha("golden", 40).alpha
FREE = Potential.zero()
AMO = Potential.amo(0.5)


class TestPMatrix:
    def test_k1_determinant(self):
        pm = p_matrix(0.7, AMO, ALPHA, 0.3, 1)
        assert pm.det == pytest.approx(1.0, rel=1e-12)
        assert pm.eps == pytest.approx(0.5, rel=1e-12)

    def test_trace_lower_bound(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            k = int(rng.integers(1, 60))
            pm = p_matrix(rng.uniform(-2, 2), AMO, ALPHA, rng.uniform(0, 1), k)
            assert pm.trace >= 2 * k - 1e-9

    def test_quadratic_form_is_solution_norm(self):
        # <P_(k) (u1,u0), (u1,u0)> = ||u||_{2k}^2 for the matching boundary pair
        k = 25
        E, x = 0.4, 0.17
        pm = p_matrix(E, AMO, ALPHA, x, k)
        for beta in (0.0, 0.9, 2.2):
            u = solution(beta, E, AMO, ALPHA, x, 2 * k)
            vec = np.array([u.values[1], u.values[0]])
            q = float(vec @ pm.entries @ vec)
            assert q == pytest.approx(u.norm_upto(2 * k) ** 2, rel=1e-9)

    def test_free_rotation_exact(self):
        # A is a rotation at E=0, v=0: P_(k) = k * Id exactly
        pm = p_matrix(0.0, FREE, ALPHA, 0.5, 37)
        assert np.allclose(pm.entries, 37 * np.eye(2))

    def test_monotone_in_k(self):
        prev = None
        for k in (1, 2, 4, 8, 16):
            pm = p_matrix(0.3, AMO, ALPHA, 0.21, k)
            if prev is not None:
                diff = pm.entries - prev
                eigs = np.linalg.eigvalsh(diff)
                assert eigs.min() >= -1e-9
            prev = pm.entries


class TestDetBetaScan:
    def test_matches_p_matrix(self):
        rng = np.random.default_rng(17)
        for k in (1, 5, 20, 50):
            E, x = rng.uniform(-2, 2), rng.uniform(0, 1)
            d1 = p_matrix(E, AMO, ALPHA, x, k).det
            d2 = det_via_beta_scan(E, AMO, ALPHA, x, k)
            assert abs(d1 - d2) / d1 < 1e-6

    def test_k1_is_one(self):
        assert det_via_beta_scan(1.1, AMO, ALPHA, 0.4, 1) == pytest.approx(1.0, rel=1e-9)

    def test_minimizer_is_critical_point(self):
        E, x, k = 0.4, 0.11, 20
        _, beta_min = det_via_beta_scan(E, AMO, ALPHA, x, k, full_output=True)
        h = 1e-5
        # each factor of the product is critical at the eigen-directions
        s = lambda b: float(_beta_products(np.array([b]), E, AMO, ALPHA, x, 2 * k)[0])
        dq = (s(beta_min + h) - s(beta_min - h)) / (2 * h)
        assert abs(dq) / s(beta_min) < 1e-4

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            det_via_beta_scan(0.0, AMO, ALPHA, 0.0, 5, grid=4)


class TestProfile:
    def test_free_rotation_values(self):
        prof = profile(0.0, FREE, ALPHA, 0.0, k_list=[1, 2, 4, 8, 16, 32], tol=1e-9)
        for row in prof.rows:
            assert row.norm_P == pytest.approx(row.k, rel=1e-12)
            assert row.det_P == pytest.approx(row.k ** 2, rel=1e-12)
            assert row.eps_k == pytest.approx(0.5 / row.k, rel=1e-12)
            assert 0.9 < row.ratio_jl < 1.5

    def test_amo_bracket_and_monotonicity(self):
        prof = profile(0.0, AMO, ALPHA, 0.0, k_list=default_k_list(500), tol=1e-8)
        rj = prof.column("ratio_jl")
        assert np.all(rj > JL_LOWER * 0.95)
        assert np.all(rj < JL_UPPER * 1.05)
        for name in ("norm_P", "det_P"):
            col = prof.column(name)
            assert np.all(np.diff(col) >= -1e-9 * col[:-1])
        small = prof.column("det_P") / prof.column("norm_P")
        assert np.all(np.diff(small) >= -1e-9 * small[:-1])
        ek = prof.column("eps_k")
        assert np.all(ek[1:] / ek[:-1] >= 0.05)
        # Theorem-style cap: the blabl ratio stays bounded above
        assert prof.column("ratio_blabl").max() < 100.0

    def test_eps_floor_drops_rows(self):
        full = profile(0.0, AMO, ALPHA, 0.0, k_list=default_k_list(200), tol=1e-8)
        cut = profile(0.0, AMO, ALPHA, 0.0, k_list=default_k_list(200), tol=1e-8,
                      eps_floor=0.02)
        assert len(cut.rows) < len(full.rows)
        assert all(r.eps_k >= 0.02 for r in cut.rows)

    def test_depth_cap_propagates(self):
        with pytest.raises(NoConvergence):
            profile(0.0, AMO, ALPHA, 0.0, k_list=[2000], tol=1e-10, depth_cap=512)


class TestBracketCheck:
    def test_free_operator(self):
        rec = jl_bracket_check(0.0, FREE, ALPHA, 0.0, math.pi / 4, 20, tol=1e-9)
        assert rec.scale_residual < 1e-8
        assert JL_LOWER < rec.value < JL_UPPER
        assert rec.in_bracket
        # the exact free value at E=0 is 1 (rotation by pi/2 orbit)
        assert rec.value == pytest.approx(1.0, abs=1e-6)
        assert KKL_LOWER < rec.kkl_value < KKL_UPPER
        assert rec.kkl_in_bracket

    def test_amo_cases(self):
        rng = np.random.default_rng(23)
        for _ in range(3):
            rec = jl_bracket_check(0.0, AMO, ALPHA, rng.uniform(0, 1),
                                   rng.uniform(0, math.pi), int(rng.integers(5, 40)),
                                   tol=1e-9)
            assert rec.scale_residual < 1e-8
            assert rec.in_bracket and rec.kkl_in_bracket


def test_default_k_list():
    ks = default_k_list(100)
    assert ks[0] == 1 and ks[-1] <= 100
    assert all(b > a for a, b in zip(ks, ks[1:]))
