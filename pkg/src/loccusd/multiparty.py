"""N-party generalizations: GHZ-like qubit pairs and symmetric qutrit triples.

Parties ``0 .. N-2`` measure projectively (``{r_0, r_1}`` for qubits, the
``eta`` basis for qutrits); the last party runs an unambiguous measurement
on its collapsed particle.  Only the combined classical record fixes which
global state was sent.
"""

from dataclasses import dataclass, field

import numpy as np

from . import qcore
from ._validation import as_generator, check_positive_int, check_sent, check_theta0
from .montecarlo import CategoricalTable, run_chunked
from .povm import FAIL, PovmSet, joint_distribution, sample
from .protocol2 import usd_povm
from .qcore import Ket

OMEGA = np.exp(2j * np.pi / 3)
# qutrit level l picks up omega^(j * PHASE_SIGN[l]) in state j
PHASE_SIGN = np.array([0, 1, -1])


@dataclass(frozen=True)
class MultiQubitSpec:
    n_parties: int
    theta0: float

    def __post_init__(self):
        object.__setattr__(self, "n_parties", check_positive_int(self.n_parties, "n_parties", 2))
        object.__setattr__(self, "theta0", check_theta0(self.theta0))


@dataclass(frozen=True)
class QutritSpec:
    n_parties: int
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "n_parties", check_positive_int(self.n_parties, "n_parties", 2))
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size != 3:
            raise ValueError(f"need three coefficients, got {c.size}")
        if abs(np.sum(np.abs(c) ** 2) - 1.0) > 1e-12:
            raise ValueError("coefficients must be normalized")
        object.__setattr__(self, "coeffs", tuple(complex(x) for x in c))


@dataclass(frozen=True)
class PartyOutcomeTally:
    """Outcome counts of the projective parties plus the last party's result."""

    counts: tuple
    usd_result: int

    @property
    def n_projective(self):
        return int(sum(self.counts))


@dataclass(frozen=True)
class MultiTrialRecord:
    sent: int
    labels: tuple
    tally: PartyOutcomeTally
    decoded: int

    def __post_init__(self):
        if (self.tally.usd_result == FAIL) != (self.decoded == FAIL):
            raise ValueError("decoded must be FAIL exactly when the last party fails")

    @property
    def error(self):
        return self.decoded != FAIL and self.decoded != self.sent


# -- qubits ---------------------------------------------------------------

def build_nqubit_states(spec):
    """``cos t |0...0> +/- sin t |1...1>`` on ``n_parties`` qubits."""
    n = spec.n_parties
    c, s = np.cos(spec.theta0), np.sin(spec.theta0)
    out = []
    for sign in (1.0, -1.0):
        amps = np.zeros(2**n, dtype=complex)
        amps[0] = c
        amps[-1] = sign * s
        out.append(Ket((2,) * n, amps))
    return tuple(out)


def r_basis_povm():
    r0 = np.array([1.0, 1.0]) / np.sqrt(2)
    r1 = np.array([1.0, -1.0]) / np.sqrt(2)
    return PovmSet.from_ops({0: qcore.projector(r0), 1: qcore.projector(r1)})


def qubit_usd_povm(theta0):
    """USD for ``psi_j = cos t|0> + (-1)^j sin t|1>`` labelled by the identified index.

    This is the two-party three-outcome measurement with labels flipped:
    its element ``j`` rules out ``psi_j``, i.e. identifies ``psi_{1-j}``.
    """
    b = usd_povm(theta0)
    return PovmSet.from_ops({1: b[0].op, 0: b[1].op, FAIL: b[FAIL].op})


def decode_qubits(n1, usd_result):
    """Global state index from the number of ``r_1`` outcomes and the USD result."""
    if usd_result == FAIL:
        return FAIL
    return int(usd_result) ^ (int(n1) % 2)


def qubit_collapsed_state(theta0, n1, sent):
    """``cos t |0> + (-1)^(n1 + sent) sin t |1>``, what the last party holds."""
    sign = (-1) ** ((n1 + sent) % 2)
    return Ket((2,), [np.cos(theta0), sign * np.sin(theta0)])


def _qubit_povms(spec):
    return [r_basis_povm()] * (spec.n_parties - 1) + [qubit_usd_povm(spec.theta0)]


def run_nqubit_trial(spec, sent, rng=None):
    """One sequential trial; parties measure in index order."""
    sent = check_sent(sent)
    rng = as_generator(rng)
    povms = _qubit_povms(spec)
    psi = build_nqubit_states(spec)[sent]
    labels = []
    for party, povm in enumerate(povms):
        out = sample(povm, psi, party, rng)
        labels.append(out.label)
        psi = out.post_state
    n1 = sum(1 for x in labels[:-1] if x == 1)
    tally = PartyOutcomeTally((len(labels) - 1 - n1, n1), labels[-1])
    return MultiTrialRecord(sent, tuple(labels), tally, decode_qubits(n1, labels[-1]))


# -- qutrits --------------------------------------------------------------

def eta_basis():
    """``(|0> + w^k |1> + w^-k |2>) / sqrt 3`` for ``k = 0, 1, 2``."""
    return tuple(Ket((3,), np.array([1.0, OMEGA**k, OMEGA ** (-k)]) / np.sqrt(3)) for k in range(3))


def eta_povm():
    return PovmSet.from_ops({k: qcore.projector(e) for k, e in enumerate(eta_basis())})


def symmetric_qutrit_states(coeffs, shift=0):
    """``psi_j = c_0|0> + c_1 w^(j+shift)|1> + c_2 w^-(j+shift)|2>`` for ``j = 0, 1, 2``."""
    c = np.asarray(coeffs, dtype=complex)
    return tuple(Ket((3,), c * OMEGA ** (((j + shift) % 3) * PHASE_SIGN)) for j in range(3))


def build_nqutrit_states(spec):
    n = spec.n_parties
    c = np.asarray(spec.coeffs, dtype=complex)
    out = []
    for j in range(3):
        amps = np.zeros(3**n, dtype=complex)
        for level in range(3):
            idx = sum(level * 3**p for p in range(n))
            amps[idx] = c[level] * OMEGA ** (j * PHASE_SIGN[level])
        out.append(Ket((3,) * n, amps))
    return tuple(out)


@dataclass(frozen=True)
class QutritUSD:
    """Unambiguous measurement for the symmetric triple plus its analytics."""

    povm: PovmSet
    reciprocal: tuple
    scale: float
    failure_probability: float


def reciprocal_states(coeffs):
    """Normalized ``phi_k`` with ``<phi_k|psi_j> = 0`` for ``j != k``."""
    c = np.asarray(coeffs, dtype=complex)
    return tuple(Ket((3,), e.amps / np.conj(c)).normalized() for e in eta_basis())


def build_qutrit_usd(coeffs):
    """Reciprocal-state USD with the largest common scale keeping the failure effect positive.

    Raises
    ------
    ValueError
        If some coefficient vanishes (the three states are then linearly
        dependent and cannot be identified unambiguously).
    """
    c = np.asarray(coeffs, dtype=complex).reshape(-1)
    if c.size != 3 or abs(np.sum(np.abs(c) ** 2) - 1.0) > 1e-12:
        raise ValueError("coeffs must be a normalized triple")
    mags = np.abs(c) ** 2
    if mags.min() <= 1e-14:
        raise ValueError("every coefficient must be nonzero for unambiguous discrimination")
    phis = reciprocal_states(c)
    # sum_k |phi_k><phi_k| = (3 / S) diag(1 / |c_m|^2), S = sum_m 1 / |c_m|^2
    inv_sum = float(np.sum(1.0 / mags))
    scale = inv_sum / 3.0 * mags.min()
    effects = {k: scale * qcore.projector(phi) for k, phi in enumerate(phis)}
    ef = np.eye(3) - sum(effects.values())
    effects[FAIL] = 0.5 * (ef + ef.conj().T)
    ops = {k: np.sqrt(scale) * qcore.projector(phi) for k, phi in enumerate(phis)}
    ops[FAIL] = qcore.psd_sqrt(effects[FAIL])
    povm = PovmSet.from_ops(ops)
    return QutritUSD(povm, phis, scale, 1.0 - 3.0 * float(mags.min()))


def usd_failure_probability(povm, states):
    """Equal-prior average of the failure effect over ``states``."""
    ef = povm[FAIL].effect
    return float(np.mean([np.real(np.vdot(s.amps, ef @ s.amps)) for s in states]))


def decode_qutrits(m1, m2, usd_result):
    if usd_result == FAIL:
        return FAIL
    return int((usd_result - m2 + m1) % 3)


def qutrit_collapsed_index(sent, m1, m2):
    """Index of the symmetric state the last party holds."""
    return int((sent + m2 - m1) % 3)


def _qutrit_povms(spec, usd=None):
    usd = usd or build_qutrit_usd(spec.coeffs)
    return [eta_povm()] * (spec.n_parties - 1) + [usd.povm]


def run_nqutrit_trial(spec, sent, rng=None, usd=None):
    sent = check_sent(sent, 3)
    rng = as_generator(rng)
    povms = _qutrit_povms(spec, usd)
    psi = build_nqutrit_states(spec)[sent]
    labels = []
    for party, povm in enumerate(povms):
        out = sample(povm, psi, party, rng)
        labels.append(out.label)
        psi = out.post_state
    counts = tuple(sum(1 for x in labels[:-1] if x == k) for k in range(3))
    tally = PartyOutcomeTally(counts, labels[-1])
    return MultiTrialRecord(sent, tuple(labels), tally, decode_qutrits(counts[1], counts[2], labels[-1]))


# -- batch simulation -----------------------------------------------------

def _tally_law(povms, states):
    """Exact joint law over label tuples for each sent state."""
    law = {}
    for k, psi in enumerate(states):
        dist = joint_distribution(povms, psi)
        law[k] = {labels: p for labels, (p, _) in dist.items()}
    return law


def outcome_law(spec):
    """``{sent: {labels: p}}`` for either spec type."""
    if isinstance(spec, MultiQubitSpec):
        return _tally_law(_qubit_povms(spec), build_nqubit_states(spec))
    return _tally_law(_qutrit_povms(spec), build_nqutrit_states(spec))


def decode_rows(spec, rows):
    """Vectorized decode of label rows ``(n, n_parties)``."""
    rows = np.asarray(rows)
    last = rows[:, -1]
    if isinstance(spec, MultiQubitSpec):
        n1 = np.count_nonzero(rows[:, :-1] == 1, axis=1)
        out = last ^ (n1 % 2)
    else:
        m1 = np.count_nonzero(rows[:, :-1] == 1, axis=1)
        m2 = np.count_nonzero(rows[:, :-1] == 2, axis=1)
        out = (last - m2 + m1) % 3
    return np.where(last == FAIL, FAIL, out)


@dataclass
class MultiStats:
    trials: int = 0
    failures: int = 0
    errors: int = 0
    sent_counts: dict = field(default_factory=dict)
    projective_counts: dict = field(default_factory=dict)

    def add(self, other):
        self.trials += other.trials
        self.failures += other.failures
        self.errors += other.errors
        for src, dst in ((other.sent_counts, self.sent_counts),
                         (other.projective_counts, self.projective_counts)):
            for k, v in src.items():
                dst[k] = dst.get(k, 0) + v
        return self

    @property
    def failure_rate(self):
        return self.failures / self.trials if self.trials else 0.0


def run_multiparty_batch(spec, n_trials, seed, threads=1):
    """Seeded batch with uniformly random sent states; aggregates are thread-count independent."""
    n_states = 2 if isinstance(spec, MultiQubitSpec) else 3
    table = CategoricalTable.from_dists(outcome_law(spec))

    def work(size, rng, _index):
        sent = rng.integers(0, n_states, size=size)
        rows = table.sample(sent, rng, key_space=range(n_states))
        decoded = decode_rows(spec, rows)
        st = MultiStats(trials=size)
        st.failures = int(np.count_nonzero(decoded == FAIL))
        st.errors = int(np.count_nonzero((decoded != FAIL) & (decoded != sent)))
        for k in range(n_states):
            st.sent_counts[k] = int(np.count_nonzero(sent == k))
        vals, counts = np.unique(rows[:, :-1], return_counts=True)
        st.projective_counts = {int(v): int(c) for v, c in zip(vals, counts)}
        return st

    total = MultiStats()
    for part in run_chunked(work, n_trials, seed, threads):
        total.add(part)
    return total


def analytic_failure(spec):
    """Failure probability of the batch protocol from the exact outcome law."""
    law = outcome_law(spec)
    return float(np.mean([sum(p for labels, p in d.items() if labels[-1] == FAIL) for d in law.values()]))
