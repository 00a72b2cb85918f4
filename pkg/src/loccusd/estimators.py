"""scikit-learn style wrappers around the protocols.

``fit`` builds the measurements for the configured state family,
``predict`` decodes rows of outcome labels into state indices (``-1`` for
an inconclusive round) and ``sample`` draws labelled outcome rows, so the
protocols plug into the usual ``get_params``/``set_params``/``clone``
machinery.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from . import multiparty, protocol2
from ._validation import as_generator, check_positive_int
from .montecarlo import CategoricalTable, decode_pairs
from .povm import FAIL


def _check_labels(X, n_cols, allowed):
    X = check_array(X, dtype=None, ensure_2d=True)
    if X.dtype.kind not in "iu":
        if X.dtype.kind != "f" or not np.all(X == np.round(X)):
            raise ValueError("outcome labels must be integers")
    X = X.astype(np.int64)
    if X.shape[1] != n_cols:
        raise ValueError(f"expected {n_cols} label columns, got {X.shape[1]}")
    bad = ~np.isin(X, allowed)
    if bad.any():
        raise ValueError(f"unexpected outcome labels {np.unique(X[bad]).tolist()}")
    return X


class _DiscriminatorMixin:
    def score(self, X, y):
        """Fraction of conclusive rows decoded correctly (1.0 when nothing is conclusive)."""
        pred = self.predict(X)
        y = np.asarray(y)
        conclusive = pred != FAIL
        if not conclusive.any():
            return 1.0
        return float(np.mean(pred[conclusive] == y[conclusive]))

    def failure_rate(self, X):
        return float(np.mean(self.predict(X) == FAIL))


class TwoPartyDiscriminator(_DiscriminatorMixin, BaseEstimator):
    """Two-party discrimination of ``cos t|00> +/- sin t|11>``.

    Parameters
    ----------
    theta0 : float, default=pi/8
        State angle in ``(0, pi/4]``.
    z0 : complex, default=1.0
        Ratio parameter of the projective basis; ``|z0| = 1`` is optimal.
    roles : {"alice", "bob"}, default="alice"
        Which party measures projectively.

    Attributes
    ----------
    spec_ : ProtocolSpec
    alice_povm_, bob_povm_ : PovmSet
    states_ : tuple of Ket
    failure_probability_ : float
    """

    def __init__(self, theta0=np.pi / 8, z0=1.0, roles="alice"):
        self.theta0 = theta0
        self.z0 = z0
        self.roles = roles

    def fit(self, X=None, y=None):
        self.spec_ = protocol2.ProtocolSpec(self.theta0, self.z0, self.roles)
        setup = protocol2.build_two_party_protocol(self.spec_)
        self.alice_povm_ = setup.alice
        self.bob_povm_ = setup.bob
        self.states_ = setup.states
        self.failure_probability_ = protocol2.failure_probability(self.spec_)
        self.outcome_table_ = protocol2.outcome_table(self.spec_, setup)
        return self

    def predict(self, X):
        check_is_fitted(self, "spec_")
        X = _check_labels(X, 2, [0, 1, FAIL])
        return decode_pairs(X[:, 0], X[:, 1])

    def sample(self, n_samples, random_state=None):
        """Draw ``(X, y)``: outcome-label rows and the uniformly random sent states."""
        check_is_fitted(self, "spec_")
        n_samples = check_positive_int(n_samples, "n_samples")
        rng = as_generator(random_state)
        table = CategoricalTable.from_dists(self.outcome_table_)
        y = rng.integers(0, 2, size=n_samples)
        return table.sample(y, rng, key_space=(0, 1)), y


class MultipartyDiscriminator(_DiscriminatorMixin, BaseEstimator):
    """N-party protocol for the qubit pair or, when ``coeffs`` is given, the qutrit triple.

    Parameters
    ----------
    n_parties : int, default=3
    theta0 : float, default=pi/8
        Used for the qubit family.
    coeffs : array-like of 3 complex, default=None
        Coefficients of the qutrit family; switches to qutrits when set.
    """

    def __init__(self, n_parties=3, theta0=np.pi / 8, coeffs=None):
        self.n_parties = n_parties
        self.theta0 = theta0
        self.coeffs = coeffs

    def fit(self, X=None, y=None):
        if self.coeffs is None:
            self.spec_ = multiparty.MultiQubitSpec(self.n_parties, self.theta0)
            self.n_states_ = 2
        else:
            self.spec_ = multiparty.QutritSpec(self.n_parties, tuple(self.coeffs))
            self.usd_ = multiparty.build_qutrit_usd(self.spec_.coeffs)
            self.n_states_ = 3
        self.outcome_law_ = multiparty.outcome_law(self.spec_)
        self.failure_probability_ = multiparty.analytic_failure(self.spec_)
        return self

    def predict(self, X):
        check_is_fitted(self, "spec_")
        X = _check_labels(X, self.spec_.n_parties, list(range(self.n_states_)) + [FAIL])
        if np.any(X[:, :-1] == FAIL):
            raise ValueError("projective parties never report failure")
        return multiparty.decode_rows(self.spec_, X)

    def sample(self, n_samples, random_state=None):
        check_is_fitted(self, "spec_")
        n_samples = check_positive_int(n_samples, "n_samples")
        rng = as_generator(random_state)
        table = CategoricalTable.from_dists(self.outcome_law_)
        y = rng.integers(0, self.n_states_, size=n_samples)
        return table.sample(y, rng, key_space=range(self.n_states_)), y
