import json
import pathlib

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loccusd.feasibility import (FORBIDDEN, N_PARAMS, FeasibilityProblem, batch_residual, constraint_residual,
                                 infeasibility_search, residual_terms, states_from_lambdas)
from loccusd.povm import FAIL
from loccusd.protocol2 import ProtocolSpec, build_two_party_protocol

PI = np.pi
FIXTURE = pathlib.Path(__file__).parent / "fixtures" / "infeasibility_thresholds.json"


def _lam(theta):
    return [np.cos(theta) ** 2, np.sin(theta) ** 2]


class TestStates:
    def test_same_basis_family(self):
        psi0, psi1 = states_from_lambdas(_lam(PI / 8), _lam(PI / 8))
        setup = build_two_party_protocol(ProtocolSpec(PI / 8))
        np.testing.assert_allclose(psi0.amps, setup.states[0].amps, atol=1e-15)
        np.testing.assert_allclose(psi1.amps, setup.states[1].amps, atol=1e-15)

    def test_lambdas_recovered(self):
        psi0, psi1 = states_from_lambdas([0.7, 0.3], [0.4, 0.6], 0.3)
        fp = FeasibilityProblem.from_vector(psi0, psi1, np.ones(N_PARAMS))
        np.testing.assert_allclose(fp.lambda0, [0.7, 0.3], atol=1e-12)
        np.testing.assert_allclose(fp.lambda1, [0.6, 0.4], atol=1e-12)

    @pytest.mark.parametrize("lam", [[0.5, 0.6], [1.2, -0.2], [1.0]])
    def test_bad_lambdas(self, lam):
        with pytest.raises(ValueError):
            states_from_lambdas(lam, [0.5, 0.5])


class TestResidual:
    def test_forbidden_set(self):
        assert len(FORBIDDEN) == 12
        assert (0, 0, 0) in FORBIDDEN and (1, 0, 1) in FORBIDDEN and (0, FAIL, 1) in FORBIDDEN

    def test_protocol_measurements_violate_simultaneous_failure(self):
        spec = ProtocolSpec(PI / 8)
        setup = build_two_party_protocol(spec)
        psi0, psi1 = setup.states
        assert FAIL not in setup.alice
        fp = FeasibilityProblem.from_povms(psi0, psi1, setup.alice, setup.bob)
        terms = residual_terms(fp)
        # no-error terms vanish, the lone-failure terms do not
        assert max(terms[k] for k in [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]) <= 1e-12
        assert terms["alice_completeness"] <= 1e-12 and terms["bob_completeness"] <= 1e-12
        assert constraint_residual(fp) > 0.1

    def test_product_state_admits_zero(self):
        # |00> is never detected; the entangled state is identified via (0, 0)
        psi0, psi1 = states_from_lambdas([1.0, 0.0], _lam(PI / 8))
        zero_one = np.array([0.0, 1.0])
        fp = FeasibilityProblem(
            psi0, psi1,
            alice_dirs=(zero_one, zero_one), alice_scales=(1.0, 0.0), alice_fail=np.diag([1.0, 0.0]),
            bob_dirs=(zero_one, zero_one), bob_scales=(1.0, 0.0), bob_fail=np.diag([1.0, 0.0]),
        )
        assert constraint_residual(fp) == 0.0

    @settings(max_examples=200)
    @given(st.integers(0, 2**32 - 1))
    def test_parallel_directions_bounded_away(self, seed):
        r = np.random.default_rng(seed)
        s = r.normal(size=2) + 1j * r.normal(size=2)
        eta = r.normal(size=2) + 1j * r.normal(size=2)
        eta /= np.linalg.norm(eta)
        psi0, psi1 = states_from_lambdas(_lam(PI / 8), _lam(PI / 8))
        fp = FeasibilityProblem(
            psi0, psi1,
            alice_dirs=(s, s), alice_scales=tuple(r.uniform(0, 1, 2)),
            alice_fail=r.uniform(0, 2) * np.outer(eta, s.conj() / np.linalg.norm(s)),
            bob_dirs=(np.array([1, 0]), np.array([0, 1])), bob_scales=(1.0, 1.0), bob_fail=np.zeros((2, 2)),
        )
        # every effect is a multiple of |s><s|, which is at Frobenius distance >= 1 from I
        assert residual_terms(fp)["alice_completeness"] >= 1.0 - 1e-12

    @settings(max_examples=200)
    @given(st.integers(0, 2**32 - 1))
    def test_batch_matches_scalar(self, seed):
        r = np.random.default_rng(seed)
        psi0, psi1 = states_from_lambdas([0.7, 0.3], [0.4, 0.6], r.uniform(0, PI))
        theta = r.normal(size=(3, N_PARAMS))
        batch = batch_residual(theta, psi0, psi1)
        for row, value in zip(theta, batch):
            ref = constraint_residual(FeasibilityProblem.from_vector(psi0, psi1, row))
            assert abs(value - ref) <= 1e-10 * max(1.0, ref)

    def test_negative_scale_rejected(self):
        psi0, psi1 = states_from_lambdas(_lam(0.3), _lam(0.3))
        with pytest.raises(ValueError):
            FeasibilityProblem(psi0, psi1, ([1, 0], [0, 1]), (1.0, -0.1), np.zeros((2, 2)),
                               ([1, 0], [0, 1]), (1.0, 1.0), np.zeros((2, 2)))


class TestSearch:
    def test_rejects_product_states(self):
        psi0, psi1 = states_from_lambdas([1.0, 0.0], _lam(0.3))
        with pytest.raises(ValueError):
            infeasibility_search(psi0, psi1, restarts=2, iterations=2)

    @pytest.mark.parametrize("kw", [{"restarts": 0}, {"iterations": 0}, {"epsilon": -1e-3}])
    def test_bad_arguments(self, kw):
        psi0, psi1 = states_from_lambdas(_lam(0.3), _lam(0.3))
        with pytest.raises(ValueError):
            infeasibility_search(psi0, psi1, **{"restarts": 2, "iterations": 2, **kw})

    def test_reproducible(self):
        psi0, psi1 = states_from_lambdas(_lam(0.3), _lam(0.3))
        a = infeasibility_search(psi0, psi1, 6, 50, np.random.default_rng(3))
        b = infeasibility_search(psi0, psi1, 6, 50, np.random.default_rng(3))
        assert a.best_residual == b.best_residual
        np.testing.assert_array_equal(a.residuals, b.residuals)

    def test_reported_best_is_consistent(self):
        psi0, psi1 = states_from_lambdas(_lam(0.3), _lam(0.3))
        res = infeasibility_search(psi0, psi1, 8, 100, np.random.default_rng(0))
        assert abs(constraint_residual(res.best) - res.best_residual) <= 1e-12
        assert min(res.best.alice_scales + res.best.bob_scales) >= 1e-3 - 1e-15
        assert res.residuals.shape == (8,)

    def test_zero_floor_finds_trivial_solution(self):
        psi0, psi1 = states_from_lambdas(_lam(PI / 8), _lam(PI / 8))
        res = infeasibility_search(psi0, psi1, 20, 500, np.random.default_rng(1), epsilon=0.0)
        assert res.best_residual <= 1e-10

    @pytest.mark.slow
    def test_residual_grows_quadratically_with_floor(self):
        # the constrained minimum behaves like c * eps^2 with c = 4 - 2 sqrt 2 at pi/8
        psi0, psi1 = states_from_lambdas(_lam(PI / 8), _lam(PI / 8))
        coef = [infeasibility_search(psi0, psi1, 40, 600, np.random.default_rng(1), eps).best_residual / eps**2
                for eps in (2e-3, 4e-3)]
        assert abs(coef[0] - coef[1]) <= 0.02 * coef[1]
        assert abs(coef[1] - (4 - 2 * np.sqrt(2))) <= 0.02


class TestFixture:
    def test_thresholds_recorded(self):
        data = json.loads(FIXTURE.read_text())
        assert data["restarts"] >= 200 and data["epsilon"] == 1e-3
        assert len(data["pairs"]) == 3
        for entry in data["pairs"].values():
            assert 0 < entry["threshold"] < entry["pilot_best_residual"]
            assert min(entry["lambda0"] + entry["lambda1"]) > 0
