import cmath
import math

import numpy as np
import pytest

from quasispec.arithmetic import resolve_alpha
from quasispec.cocycle import Potential
from quasispec.conjugation import (
    BandFunction,
    MatFunction,
    NotContracting,
    NotUnimodular,
    TriangularCocycle,
    certified_min_abs,
    companion,
    mat_exp_grid,
    mat_log_grid,
    normalize_constant,
    perturbation_bound_check,
    perturbed_schrodinger,
    rotation,
    schrodinger_matfunction,
    schrodinger_reduction,
    triangular_matfunction,
    tx_asymptotics_check,
    tx_bruteforce,
    tx_closed_form,
    tx_det_display,
    tx_entry_formula,
    _c_theta,
)

ALPHA = resolve_alpha("golden", 40).alpha
RNG = np.random.default_rng(123)


def random_tc(rng, k_max=500):
    return TriangularCocycle(
        theta=rng.uniform(0, 1), alpha=ALPHA, r=int(rng.integers(-6, 7)),
        t_hat=complex(rng.normal(), rng.normal()), k=int(rng.integers(1, k_max + 1)))


class TestTriangularOracle:
    def test_closed_form_matches_bruteforce(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            tc = random_tc(rng)
            x = rng.uniform(0, 1)
            a, b = tx_closed_form(tc, x), tx_bruteforce(tc, x)
            scale = max(1.0, abs(b.detX))
            assert abs(a.x1 - b.x1) / scale < 1e-9
            assert abs(a.x2 - b.x2) / scale < 1e-9
            assert abs(a.detX - b.detX) / scale < 1e-9
            assert abs(a.normX - b.normX) / max(1.0, b.normX) < 1e-9

    def test_k1_det_exact(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            tc = random_tc(rng, k_max=1)
            assert tx_closed_form(tc, rng.uniform()).detX == 1.0
            assert tx_bruteforce(tc, rng.uniform()).detX == 1.0

    def test_det_display_identity(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            tc = random_tc(rng)
            rec = tx_closed_form(tc, 0.0)
            assert abs(tx_det_display(tc) - rec.detX) / max(1.0, rec.detX) < 1e-9

    def test_zero_corner_gives_scaled_identity(self):
        tc = TriangularCocycle(theta=0.3, alpha=ALPHA, r=2, t_hat=0.0, k=50)
        for rec in (tx_closed_form(tc, 0.4), tx_bruteforce(tc, 0.4)):
            assert rec.x1 == 0.0
            assert rec.x2 == pytest.approx(50.0)
            assert rec.detX == pytest.approx(2500.0)
            assert rec.normX == pytest.approx(50.0)
            assert rec.invnormX == pytest.approx(50.0)

    def test_entrywise_iterate_formula(self):
        tc = TriangularCocycle(theta=0.21, alpha=ALPHA, r=3, t_hat=0.5 - 0.1j, k=30)
        x = 0.07
        M = np.eye(2, dtype=complex)
        for j in range(1, 21):
            M = tc.step(x + (j - 1) * ALPHA) @ M
            assert abs(M[0, 1] - tx_entry_formula(tc, x, j)) < 1e-10

    def test_hermitian_positive(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            tc = random_tc(rng, k_max=100)
            rec = tx_bruteforce(tc, rng.uniform())
            X = np.array([[tc.k, rec.x1], [rec.x1.conjugate(), rec.x2]])
            assert np.allclose(X, X.conj().T)
            assert np.linalg.eigvalsh(X).min() > 0

    def test_near_degenerate_delta(self):
        # delta within the analytic-limit guard
        theta = 0.5 * (3 * ALPHA - 1e-14)
        tc = TriangularCocycle(theta=theta, alpha=ALPHA, r=3, t_hat=0.8, k=40)
        a, b = tx_closed_form(tc, 0.2), tx_bruteforce(tc, 0.2)
        assert abs(a.x2 - b.x2) / b.x2 < 1e-8
        assert abs(a.detX - b.detX) / b.detX < 1e-8


class TestAsymptotics:
    def test_large_delta_regime(self):
        tc = TriangularCocycle(theta=0.1, alpha=ALPHA, r=1, t_hat=1.0, k=100)
        rec = tx_asymptotics_check(tc, 0.0)
        assert 1e-2 <= rec.norm_ratio <= 1e2
        assert 1e-2 <= rec.inv_ratio <= 1e2

    def test_small_delta_regime(self):
        theta = 0.5 * (ALPHA - 1e-6)  # delta = 1e-6, k*delta tiny
        tc = TriangularCocycle(theta=theta, alpha=ALPHA, r=1, t_hat=1.0, k=100)
        rec = tx_asymptotics_check(tc, 0.0)
        assert 1e-2 <= rec.norm_ratio <= 1e2
        assert 1e-2 <= rec.inv_ratio <= 1e2

    def test_zero_corner_ratios_exact(self):
        tc = TriangularCocycle(theta=0.37, alpha=ALPHA, r=2, t_hat=0.0, k=64)
        rec = tx_asymptotics_check(tc, 0.0)
        assert rec.norm_ratio == 1.0
        assert rec.inv_ratio == 1.0


class TestPerturbationBound:
    def test_unperturbed(self):
        tc = TriangularCocycle(theta=0.13, alpha=ALPHA, r=1, t_hat=0.6, k=30)
        rec = perturbation_bound_check(tc, 0.2, triangular_matfunction(tc))
        assert rec.lhs == pytest.approx(0.0, abs=1e-10)
        assert rec.holds and rec.premise_ok

    def test_at_threshold_bound_holds(self):
        tc = TriangularCocycle(theta=0.13, alpha=ALPHA, r=1, t_hat=0.6, k=30)
        eta = 0.999 * perturbation_bound_check(tc, 0.2, triangular_matfunction(tc)).threshold
        T = triangular_matfunction(tc)
        pert = MatFunction(((T.entries[0][0], _plus_const(T.entries[0][1], eta)),
                            (T.entries[1][0], T.entries[1][1])), T.band)
        rec = perturbation_bound_check(tc, 0.2, pert)
        assert rec.premise_ok
        assert rec.holds

    def test_violation_probe(self):
        # sweeping eta upward from the (conservative) implemented
        # threshold locates the empirical violation point
        tc = TriangularCocycle(theta=0.13, alpha=ALPHA, r=1, t_hat=1.5, k=60)
        base = perturbation_bound_check(tc, 0.2, triangular_matfunction(tc)).threshold
        T = triangular_matfunction(tc)
        for mult in (10.0, 1e3, 1e5, 1e7, 1e9):
            pert = MatFunction(((T.entries[0][0], _plus_const(T.entries[0][1], mult * base)),
                                (T.entries[1][0], T.entries[1][1])), T.band)
            rec = perturbation_bound_check(tc, 0.2, pert)
            if rec.lhs > 1.0:
                break
        assert rec.lhs > 1.0
        assert not rec.premise_ok


def _plus_const(f: BandFunction, c: complex) -> BandFunction:
    coeffs = dict(f.coeffs)
    coeffs[0] = coeffs.get(0, 0.0) + c
    return BandFunction(coeffs, f.band)


class TestBandFunctions:
    def test_majorant_dominates_strip_sup(self):
        f = BandFunction({0: 1.0, 2: 0.3 + 0.4j, -2: 0.3 - 0.4j, 5: 0.05}, band=0.04)
        xs = np.arange(511) / 511
        for y in (0.0, 0.04, -0.04):
            assert np.max(np.abs(f(xs + 1j * y))) <= f.norm() + 1e-12

    def test_shift_matches_evaluation(self):
        f = BandFunction({1: 0.7, -1: 0.7, 3: 0.1j, -3: -0.1j}, band=0.02)
        g = f.shifted(ALPHA)
        xs = RNG.uniform(0, 1, 16)
        assert np.allclose(g(xs), f(xs + ALPHA))

    def test_grid_roundtrip(self):
        f = BandFunction({0: 0.5, 1: 0.2 - 0.1j, -1: 0.2 + 0.1j, 4: 0.01}, band=0.03)
        g = BandFunction.from_grid(f.to_grid(64), band=0.03)
        for k in f.coeffs:
            assert g.coeffs[k] == pytest.approx(f.coeffs[k], abs=1e-12)

    def test_matfunction_json_roundtrip(self):
        mf = schrodinger_matfunction(Potential.trig({0: 3.0, 1: -0.5, -1: -0.5}), 0.05)
        back = MatFunction.from_json(mf.to_json())
        xs = RNG.uniform(0, 1, 8)
        for x in xs:
            assert np.allclose(back(x), mf(x))

    def test_matlog_matexp_inverse(self):
        rng = np.random.default_rng(4)
        w = np.zeros((16, 2, 2), dtype=complex)
        w[:, 0, 0] = 0.1 * (rng.normal(size=16) + 1j * rng.normal(size=16))
        w[:, 0, 1] = 0.1 * rng.normal(size=16)
        w[:, 1, 0] = 0.1 * rng.normal(size=16)
        w[:, 1, 1] = -w[:, 0, 0]
        back = mat_log_grid(mat_exp_grid(w))
        assert np.max(np.abs(back - w)) < 1e-12


class TestCertifiedBound:
    def test_shifted_cosine(self):
        p = Potential.trig({0: 3.0, 1: -0.5, -1: -0.5})
        bound = certified_min_abs(p, 0.05)
        assert 1.9 < bound <= 2.0

    def test_refusal_near_zero(self):
        p = Potential.trig({0: 0.5, 1: -0.5, -1: -0.5})  # vanishes on the axis
        A = schrodinger_matfunction(p, 0.02)
        with pytest.raises(ValueError):
            schrodinger_reduction(A, p, ALPHA, 0.02)


class TestReduction:
    def _random_w(self, rng, scale, band):
        co = {0: complex(rng.standard_normal(), 0.0)}
        for k in (1, 2, 3):
            c = complex(rng.standard_normal(), rng.standard_normal())
            co[k], co[-k] = c, c.conjugate()
        f = BandFunction(co, band)
        nrm = f.norm()
        return BandFunction({k: scale * c / nrm for k, c in co.items()}, band)

    def test_exact_schrodinger_input(self):
        p = Potential.trig({0: 3.0, 1: -0.5, -1: -0.5})
        res = schrodinger_reduction(schrodinger_matfunction(p, 0.05), p, ALPHA, 0.05)
        assert res.iterations == 0
        assert res.residual < 1e-12
        assert np.allclose(res.B(0.3), np.eye(2))

    def test_quadratic_contraction(self):
        p = Potential.trig({0: 3.0, 1: -0.5, -1: -0.5})
        band = 0.05
        rng = np.random.default_rng(31)
        for _ in range(5):
            w = tuple(self._random_w(rng, 1e-3, band) for _ in range(3))
            A = perturbed_schrodinger(p, w, band)
            res = schrodinger_reduction(A, p, ALPHA, band)
            assert res.residual < 1e-9
            assert res.iterations <= 3
            assert all(r < 1e3 for r in res.contraction_ratios)
            assert res.imag_asym < 1e-10

    def test_conjugacy_identity_on_grid(self):
        # the residual *is* sup_x ||B(x+a) A(x) B(x)^-1 - A^(v')(x)|| on the grid
        p = Potential.trig({0: 2.5, 1: -0.4, -1: -0.4})
        band = 0.04
        rng = np.random.default_rng(32)
        w = tuple(self._random_w(rng, 5e-4, band) for _ in range(3))
        res = schrodinger_reduction(perturbed_schrodinger(p, w, band), p, ALPHA, band)
        assert res.residual < 1e-10

    def test_log_domain_guard(self):
        p = Potential.trig({0: 3.0, 1: -0.5, -1: -0.5})
        band = 0.02
        w = (BandFunction({0: 0.9}, band), BandFunction({}, band), BandFunction({}, band))
        A = perturbed_schrodinger(p, w, band)
        with pytest.raises(ValueError):
            schrodinger_reduction(A, p, ALPHA, band)


class TestNormalizeConstant:
    def test_companion_fast_path(self):
        rec = normalize_constant(np.array([[2.5, -1.0], [1.0, 0.0]]), ALPHA)
        assert rec.energy == 2.5
        assert np.allclose(rec.conjugator(0.3), np.eye(2))

    def test_hyperbolic(self):
        A = np.array([[3.0, 1.0], [1.0, 0.5]])
        A /= math.sqrt(np.linalg.det(A))
        rec = normalize_constant(A, ALPHA)
        C = rec.conjugator(0.0)
        assert np.max(np.abs(C @ A @ np.linalg.inv(C) - rec.target())) < 1e-10
        assert abs(rec.energy) > 2

    def test_elliptic_direct_window(self):
        theta = math.asin(0.5) / (2 * math.pi)  # sin(2 pi theta) = 1/2
        R = rotation(theta)
        Ct = _c_theta(theta)
        target = companion(2 * math.cos(2 * math.pi * theta))
        assert np.max(np.abs(Ct @ R @ np.linalg.inv(Ct) - target)) < 1e-12
        rec = normalize_constant(R, ALPHA)
        assert rec.mode == 0
        C = rec.conjugator(0.0)
        assert np.max(np.abs(C @ R @ np.linalg.inv(C) - rec.target())) < 1e-10

    def test_elliptic_with_phase_shift(self):
        theta = 0.7  # sin(2 pi theta) < 0 forces a k alpha shift
        R = rotation(theta)
        rec = normalize_constant(R, ALPHA)
        assert rec.mode != 0
        for x in (0.0, 0.31, 0.88):
            lhs = rec.conjugator(x + ALPHA) @ R @ np.linalg.inv(rec.conjugator(x))
            assert np.max(np.abs(lhs - rec.target())) < 1e-10
        assert abs(rec.energy) > 1e-12

    def test_elliptic_generic_matrix(self):
        M = np.array([[0.9, -0.7], [0.5, 0.72]])
        M /= math.sqrt(np.linalg.det(M))
        assert abs(np.trace(M)) < 2
        rec = normalize_constant(M, ALPHA)
        for x in (0.1, 0.6):
            lhs = rec.conjugator(x + ALPHA) @ M @ np.linalg.inv(rec.conjugator(x))
            assert np.max(np.abs(lhs - rec.target())) < 1e-9

    def test_parabolic_shrinking(self):
        J = np.array([[1.0, 1.0], [0.0, 1.0]])
        rec = normalize_constant(J, ALPHA)
        assert rec.kind == "parabolic"
        # prescribed defect sequence: ||C^(n)||^2 * defect_n -> 0
        vals = []
        for n in range(1, 6):
            eps = 2.0 ** -n
            defect = eps ** 3
            C = rec.shrinker(eps)
            drift = np.max(np.abs(C @ J @ np.linalg.inv(C) - rotation(rec.theta)))
            vals.append(np.linalg.norm(C, 2) ** 2 * defect)
            assert drift < 10 * eps ** 2 + 1e-12
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] < vals[0] / 8  # ~ eps decay, heading to zero

    def test_parabolic_negative_trace(self):
        A = -np.array([[1.0, 0.7], [0.0, 1.0]])
        rec = normalize_constant(A, ALPHA)
        assert rec.kind == "parabolic"
        assert rec.theta == 0.5

    def test_not_unimodular(self):
        with pytest.raises(NotUnimodular):
            normalize_constant(np.array([[2.0, 0.0], [0.0, 1.0]]), ALPHA)
