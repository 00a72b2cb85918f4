import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from loccusd.estimators import MultipartyDiscriminator, TwoPartyDiscriminator
from loccusd.povm import FAIL

PI = np.pi
C_EXAMPLE = (0.8, 0.42, np.sqrt(1 - 0.64 - 0.1764))


class TestTwoParty:
    def test_params(self):
        est = TwoPartyDiscriminator(theta0=0.3, roles="bob")
        assert est.get_params() == {"theta0": 0.3, "z0": 1.0, "roles": "bob"}
        assert clone(est).set_params(theta0=0.5).theta0 == 0.5

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            TwoPartyDiscriminator().predict([[0, 0]])

    def test_fit_attributes(self):
        est = TwoPartyDiscriminator(PI / 8).fit()
        assert abs(est.failure_probability_ - np.cos(PI / 4)) <= 1e-12
        assert est.alice_povm_.labels == (0, 1) and FAIL in est.bob_povm_

    def test_invalid_params_raise_on_fit(self):
        with pytest.raises(ValueError):
            TwoPartyDiscriminator(theta0=1.0).fit()

    def test_predict(self):
        est = TwoPartyDiscriminator().fit()
        np.testing.assert_array_equal(est.predict([[0, 0], [0, 1], [FAIL, 1]]), [1, 0, FAIL])

    @pytest.mark.parametrize("X", [[[0, 0, 0]], [[0, 2]], [[0.5, 1]]])
    def test_predict_rejects(self, X):
        with pytest.raises(ValueError):
            TwoPartyDiscriminator().fit().predict(X)

    def test_sample_scores_perfectly(self):
        est = TwoPartyDiscriminator(PI / 6).fit()
        X, y = est.sample(100_000, random_state=0)
        assert est.score(X, y) == 1.0
        p = est.failure_probability_
        assert abs(est.failure_rate(X) - p) <= 4 * np.sqrt(p * (1 - p) / len(y))

    def test_sample_reproducible(self):
        est = TwoPartyDiscriminator().fit()
        a, b = est.sample(100, 3), est.sample(100, 3)
        np.testing.assert_array_equal(a[0], b[0])


class TestMultiparty:
    def test_qubit(self):
        est = MultipartyDiscriminator(n_parties=4).fit()
        X, y = est.sample(50_000, 1)
        assert X.shape == (50_000, 4) and est.score(X, y) == 1.0
        assert abs(est.failure_probability_ - np.cos(PI / 4)) <= 1e-12

    def test_qutrit(self):
        est = MultipartyDiscriminator(n_parties=3, coeffs=C_EXAMPLE).fit()
        X, y = est.sample(50_000, 1)
        assert set(np.unique(y)) == {0, 1, 2} and est.score(X, y) == 1.0
        assert abs(est.failure_probability_ - (1 - 3 * 0.42**2)) <= 1e-12

    def test_projective_parties_cannot_fail(self):
        est = MultipartyDiscriminator(n_parties=3).fit()
        with pytest.raises(ValueError):
            est.predict([[FAIL, 0, 1]])

    def test_column_count(self):
        with pytest.raises(ValueError):
            MultipartyDiscriminator(n_parties=3).fit().predict([[0, 1]])
