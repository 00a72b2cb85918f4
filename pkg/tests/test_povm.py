import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loccusd import qcore
from loccusd.povm import (FAIL, KrausOperator, PovmSet, branches, joint_distribution, label_name,
                          outcome_probs, sample, two_state_usd, validate)
from loccusd.protocol2 import (ProtocolSpec, build_two_party_protocol, build_states,
                               collapsed_bob_states, usd_povm)
from loccusd.qcore import DimensionError, Ket, basis_ket, ket

PI = np.pi
Z_BASIS = PovmSet.from_ops({0: np.diag([1.0, 0.0]), 1: np.diag([0.0, 1.0])})


def _random_povm(seed, d=2, n=3):
    """Random complete measurement: G_k (sum G^dag G)^(-1/2)."""
    r = np.random.default_rng(seed)
    gs = [r.normal(size=(d, d)) + 1j * r.normal(size=(d, d)) for _ in range(n)]
    s = sum(g.conj().T @ g for g in gs)
    w, v = np.linalg.eigh(s)
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    return PovmSet.from_ops({k: g @ inv_sqrt for k, g in enumerate(gs)})


class TestConstruction:
    def test_label_names(self):
        assert label_name(FAIL) == "f"
        assert label_name(1) == "1"

    def test_non_square(self):
        with pytest.raises(ValueError):
            KrausOperator(0, np.ones((2, 3)))

    def test_duplicate_labels(self):
        op = KrausOperator(0, np.eye(2))
        with pytest.raises(ValueError):
            PovmSet((op, op))

    def test_from_effects_roundtrip(self):
        povm = PovmSet.from_effects({0: np.diag([0.3, 0.5]), FAIL: np.diag([0.7, 0.5])})
        np.testing.assert_allclose(povm[0].effect, np.diag([0.3, 0.5]), atol=1e-15)
        assert FAIL in povm and 1 not in povm


class TestValidate:
    def test_projective(self):
        rep = validate(Z_BASIS)
        assert rep.passed and rep.completeness_residual == 0.0

    def test_incomplete(self):
        p0 = np.diag([1.0, 0.0])
        rep = validate(PovmSet.from_ops({0: p0, 1: p0}))
        assert not rep.passed
        assert abs(rep.completeness_residual - 1.0) <= 1e-15

    def test_usd_party(self):
        assert validate(usd_povm(PI / 8)).passed

    @settings(max_examples=100)
    @given(st.integers(0, 2**32 - 1))
    def test_random_complete(self, seed):
        assert validate(_random_povm(seed)).passed


class TestOutcomeProbs:
    def test_computational(self):
        assert outcome_probs(Z_BASIS, basis_ket(2, 0)) == {0: 1.0, 1: 0.0}

    @pytest.mark.parametrize("theta0", [PI / 12, PI / 8, PI / 5, PI / 4])
    def test_projective_party_is_uniform(self, theta0):
        setup = build_two_party_protocol(ProtocolSpec(theta0))
        probs = outcome_probs(setup.alice, setup.states[0], 0)
        assert abs(probs[0] - 0.5) <= 1e-12 and abs(probs[1] - 0.5) <= 1e-12

    def test_usd_failure_on_collapsed_state(self):
        psi0 = collapsed_bob_states(ProtocolSpec(PI / 8), 0)[0]
        assert abs(outcome_probs(usd_povm(PI / 8), psi0)[FAIL] - np.cos(PI / 4)) <= 1e-12

    def test_wrong_dimension(self):
        with pytest.raises(DimensionError):
            outcome_probs(Z_BASIS, basis_ket(3, 0))

    def test_party_out_of_range(self):
        with pytest.raises(DimensionError):
            outcome_probs(Z_BASIS, basis_ket(2, 0), 1)

    @settings(max_examples=200)
    @given(st.integers(0, 2**32 - 1), st.integers(0, 1))
    def test_sum_to_one(self, seed, party):
        r = np.random.default_rng(seed)
        v = r.normal(size=6) + 1j * r.normal(size=6)
        psi = Ket((2, 3) if party == 0 else (3, 2), v / np.linalg.norm(v))
        povm = _random_povm(seed, d=2, n=int(r.integers(1, 5)))
        assert abs(sum(outcome_probs(povm, psi, party).values()) - 1.0) <= 1e-10


class TestSample:
    def test_deterministic_outcome(self, rng):
        for _ in range(50):
            out = sample(Z_BASIS, basis_ket(2, 1), 0, rng)
            assert out.label == 1 and out.prob == 1.0

    def test_reproducible(self):
        psi = ket([1, 1]).normalized()
        seq = [[sample(Z_BASIS, psi, 0, g).label for _ in range(100)]
               for g in (np.random.default_rng(4), np.random.default_rng(4))]
        assert seq[0] == seq[1]

    def test_frequencies(self):
        povm = usd_povm(PI / 8)
        psi = collapsed_bob_states(ProtocolSpec(PI / 8), 0)[0]
        probs = outcome_probs(povm, psi)
        g = np.random.default_rng(99)
        labels = np.array([sample(povm, psi, 0, g).label for _ in range(20000)])
        for lab, p in probs.items():
            n = labels.size
            sigma = np.sqrt(max(p * (1 - p), 1e-12) / n)
            assert abs(np.mean(labels == lab) - p) <= 4 * sigma + 1e-12

    def test_post_state_after_projective_outcome(self, rng):
        spec = ProtocolSpec(PI / 8)
        setup = build_two_party_protocol(spec)
        want = collapsed_bob_states(spec, 0)[0]
        # condition on the first party seeing 0 by retrying
        while True:
            out = sample(setup.alice, setup.states[0], 0, rng)
            if out.label == 0:
                break
        assert out.post_state.is_normalized()
        bob = qcore.apply_local(np.array([[1, 1], [0, 0]]) / np.sqrt(2), out.post_state, 0)
        reduced = Ket((2,), bob.tensor()[0, :])
        assert qcore.equal_up_to_phase(reduced.normalized(), want)

    @settings(max_examples=100)
    @given(st.integers(0, 2**32 - 1))
    def test_rank_one_post_state(self, seed):
        r = np.random.default_rng(seed)
        eta = r.normal(size=2) + 1j * r.normal(size=2)
        s = r.normal(size=2) + 1j * r.normal(size=2)
        eta, s = eta / np.linalg.norm(eta), s / np.linalg.norm(s)
        op = 0.6 * np.outer(eta, s.conj())
        rest = qcore.psd_sqrt(np.eye(2) - op.conj().T @ op)
        povm = PovmSet.from_ops({0: op, FAIL: rest})
        v = r.normal(size=2) + 1j * r.normal(size=2)
        for label, p, post in branches(povm, ket(v / np.linalg.norm(v))):
            if label == 0 and p > 1e-12:
                assert qcore.equal_up_to_phase(post.normalized(), ket(eta))


class TestJointDistribution:
    def test_sums_to_one(self):
        setup = build_two_party_protocol(ProtocolSpec(PI / 7))
        dist = joint_distribution([setup.alice, setup.bob], setup.states[1])
        assert abs(sum(p for p, _ in dist.values()) - 1.0) <= 1e-12

    def test_order_independent(self):
        setup = build_two_party_protocol(ProtocolSpec(PI / 7))
        psi = setup.states[0]
        forward = joint_distribution([setup.alice, setup.bob], psi)
        swapped = Ket((2, 2), psi.tensor().T.reshape(-1))
        backward = joint_distribution([setup.bob, setup.alice], swapped)
        for (a, b), (p, _) in forward.items():
            assert abs(backward[(b, a)][0] - p) <= 1e-12

    def test_skip_party(self):
        psi0, _ = build_states(PI / 8)
        dist = joint_distribution([Z_BASIS, None], psi0)
        assert set(dist) == {(0, None), (1, None)}


class TestTwoStateUSD:
    @pytest.mark.parametrize("theta0", [PI / 12, PI / 8, PI / 5])
    def test_reaches_idp_limit(self, theta0):
        psi0, psi1 = (Ket((4,), s.amps) for s in build_states(theta0))
        povm = two_state_usd(psi0, psi1)
        assert validate(povm).passed
        assert outcome_probs(povm, psi0)[1] <= 1e-12
        assert outcome_probs(povm, psi1)[0] <= 1e-12
        fail = 0.5 * (outcome_probs(povm, psi0)[FAIL] + outcome_probs(povm, psi1)[FAIL])
        assert abs(fail - abs(psi0.inner(psi1))) <= 1e-12

    def test_identical_rejected(self):
        a = ket([1, 0])
        with pytest.raises(ValueError):
            two_state_usd(a, a)
