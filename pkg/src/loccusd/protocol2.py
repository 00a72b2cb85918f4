"""Two-party error-free discrimination with a single failure signal.

The states are ``cos t |00> +/- sin t |11>``.  One party measures
projectively in ``{(|0> + z|1>), (|0> - z|1>)}``; the other applies a
three-outcome measurement whose success directions are orthogonal to one
of the two collapsed single-qubit states.  Equal outcome labels mean the
second state was sent, unequal labels the first.
"""

from dataclasses import dataclass, field

import numpy as np

from . import qcore
from ._validation import as_generator, check_sent, check_theta0
from .montecarlo import CategoricalTable, decode_pairs, run_chunked
from .povm import FAIL, PovmSet, joint_distribution, sample
from .qcore import Ket

ALICE = "alice"
BOB = "bob"

DEFAULT_DECODE = {(0, 0): 1, (1, 1): 1, (0, 1): 0, (1, 0): 0}


def decode_pair(alice_label, bob_label, decode=None):
    """Map an outcome pair to a state index, or ``FAIL`` if either party failed."""
    if alice_label == FAIL or bob_label == FAIL:
        return FAIL
    return (decode or DEFAULT_DECODE)[(alice_label, bob_label)]


@dataclass(frozen=True)
class ProtocolSpec:
    """Parameters of one two-party protocol instance.

    ``roles`` names the party that measures projectively; the other one
    carries the three-outcome measurement.
    """

    theta0: float
    z0: complex = 1.0
    roles: str = ALICE
    decode: dict = field(default_factory=lambda: dict(DEFAULT_DECODE))

    def __post_init__(self):
        object.__setattr__(self, "theta0", check_theta0(self.theta0))
        z0 = complex(self.z0)
        if not np.isfinite(z0) or z0 == 0:
            raise ValueError(f"z0 must be a finite nonzero complex number, got {self.z0!r}")
        object.__setattr__(self, "z0", z0)
        if self.roles not in (ALICE, BOB):
            raise ValueError(f"roles must be {ALICE!r} or {BOB!r}, got {self.roles!r}")
        decode = dict(self.decode)
        if decode != DEFAULT_DECODE:
            raise ValueError("decode must map equal labels to state 1 and unequal labels to state 0")
        object.__setattr__(self, "decode", decode)

    def swapped(self):
        return ProtocolSpec(self.theta0, self.z0, BOB if self.roles == ALICE else ALICE)


@dataclass(frozen=True)
class TrialRecord:
    sent: int
    alice_label: int
    bob_label: int
    decoded: int

    def __post_init__(self):
        failed = FAIL in (self.alice_label, self.bob_label)
        if failed != (self.decoded == FAIL):
            raise ValueError("decoded must be FAIL exactly when a party reports failure")

    @property
    def error(self):
        return self.decoded != FAIL and self.decoded != self.sent


@dataclass(frozen=True)
class TwoPartySetup:
    alice: PovmSet
    bob: PovmSet
    states: tuple


def build_states(theta0):
    """The pair ``cos t |00> + sin t |11>`` and ``cos t |00> - sin t |11>``."""
    theta0 = check_theta0(theta0)
    c, s = np.cos(theta0), np.sin(theta0)
    psi0 = Ket((2, 2), [c, 0, 0, s])
    psi1 = Ket((2, 2), [c, 0, 0, -s])
    return psi0, psi1


def projective_vectors(z0):
    """Unit vectors ``(|0> + z|1>)`` and ``(|0> - z|1>)`` (normalized)."""
    n = np.sqrt(1.0 + abs(z0) ** 2)
    return np.array([1.0, z0]) / n, np.array([1.0, -z0]) / n


def usd_vectors(theta0, z0):
    """Unit vectors ``|0> -/+ (cot t / z)|1>`` for the three-outcome party."""
    w = 1.0 / (np.tan(theta0) * z0)
    n = np.sqrt(1.0 + abs(w) ** 2)
    return np.array([1.0, -w]) / n, np.array([1.0, w]) / n


def projective_scale_sq(z0):
    """Largest ``|x|^2`` keeping the projective party's failure effect positive."""
    m = abs(z0) ** 2
    return (1.0 + m) / 2.0 if m <= 1.0 else (1.0 + 1.0 / m) / 2.0


def usd_scale_sq(theta0, z0):
    """Largest ``|y|^2`` keeping the three-outcome party's failure effect positive."""
    cot2 = 1.0 / np.tan(theta0) ** 2
    m = abs(z0) ** 2
    return (1.0 + cot2 / m) / 2.0 if cot2 <= m else (1.0 + m / cot2) / 2.0


def projective_failure_matrix(x0_sq, x1_sq, z0):
    """``I - |x0|^2 |r0><r0| - |x1|^2 |r1><r1|`` written out entrywise."""
    z0 = complex(z0)
    m = abs(z0) ** 2
    d = 1.0 + m
    return np.array(
        [
            [1.0 - (x0_sq + x1_sq) / d, -np.conj(z0) * (x0_sq - x1_sq) / d],
            [-z0 * (x0_sq - x1_sq) / d, 1.0 - m * (x0_sq + x1_sq) / d],
        ],
        dtype=complex,
    )


def _projective_povm(z0):
    r0, r1 = projective_vectors(z0)
    x_sq = projective_scale_sq(z0)
    e0 = x_sq * qcore.projector(r0)
    e1 = x_sq * qcore.projector(r1)
    ops = {0: np.sqrt(x_sq) * qcore.projector(r0), 1: np.sqrt(x_sq) * qcore.projector(r1)}
    ef = np.eye(2) - e0 - e1
    if np.max(np.abs(ef)) > 1e-14:
        ops[FAIL] = qcore.psd_sqrt(0.5 * (ef + ef.conj().T))
    return PovmSet.from_ops(ops)


def usd_povm(theta0, z0=1.0):
    """Three-outcome measurement ``{B_0, B_1, B_f}``.

    ``B_j = y |s_j><s_j|`` with ``s_j`` orthogonal to the collapsed state
    ``psi_j``, so label ``j`` rules out ``psi_j``.  ``B_f`` is the hermitian
    square root of the remaining effect.
    """
    theta0 = check_theta0(theta0)
    s0, s1 = usd_vectors(theta0, complex(z0))
    y_sq = usd_scale_sq(theta0, complex(z0))
    e0 = y_sq * qcore.projector(s0)
    e1 = y_sq * qcore.projector(s1)
    ef = np.eye(2) - e0 - e1
    ops = {
        0: np.sqrt(y_sq) * qcore.projector(s0),
        1: np.sqrt(y_sq) * qcore.projector(s1),
        FAIL: qcore.psd_sqrt(0.5 * (ef + ef.conj().T)),
    }
    return PovmSet.from_ops(ops)


def build_two_party_protocol(spec):
    """Measurements for both parties plus the two states.

    Returns a :class:`TwoPartySetup` with ``alice``, ``bob`` and ``states``.
    """
    proj = _projective_povm(spec.z0)
    usd = usd_povm(spec.theta0, spec.z0)
    states = build_states(spec.theta0)
    if spec.roles == ALICE:
        return TwoPartySetup(proj, usd, states)
    return TwoPartySetup(usd, proj, states)


def _fail_effect(povm):
    return povm[FAIL].effect if FAIL in povm else np.zeros((povm.dim, povm.dim), dtype=complex)


def failure_probability(spec):
    """Average failure probability for equal priors, from the built operators."""
    setup = build_two_party_protocol(spec)
    fa = _fail_effect(setup.alice)
    fb = _fail_effect(setup.bob)
    eye = np.eye(2)
    op = np.kron(fa, eye) + np.kron(eye, fb) - np.kron(fa, fb)
    return float(np.mean([np.real(np.vdot(s.amps, op @ s.amps)) for s in setup.states]))


def closed_form_failure(theta0, z0=1.0):
    """``1 - 2|z|^2 sin^2 t`` for ``|z| <= 1``; ``cos 2t`` at ``|z| = 1``."""
    m = abs(z0) ** 2
    if m > 1.0:
        raise ValueError("closed form only covers |z0| <= 1")
    return 1.0 - 2.0 * m * np.sin(theta0) ** 2


def run_two_party_trial(spec, sent, rng=None, setup=None):
    """Sample one trial: the first party measures, then the second on the collapsed state."""
    sent = check_sent(sent)
    rng = as_generator(rng)
    setup = setup or build_two_party_protocol(spec)
    psi = setup.states[sent]
    a = sample(setup.alice, psi, 0, rng)
    b = sample(setup.bob, a.post_state, 1, rng)
    return TrialRecord(sent, a.label, b.label, decode_pair(a.label, b.label, spec.decode))


def collapsed_bob_states(spec, alice_label):
    """Bob's single-qubit states ``(psi_0, psi_1)`` or ``(psi_1, psi_0)``.

    Entry ``k`` is what Bob holds when state ``k`` was sent and Alice saw
    ``alice_label``; ``psi_j = cos t |0> + (-1)^j sin t |1>``.
    """
    if alice_label not in (0, 1):
        raise ValueError(f"alice_label must be 0 or 1, got {alice_label!r}")
    t = spec.theta0
    psi = (Ket((2,), [np.cos(t), np.sin(t)]), Ket((2,), [np.cos(t), -np.sin(t)]))
    return psi if alice_label == 0 else psi[::-1]


def outcome_table(spec, setup=None):
    """Exact joint law ``{sent: {(alice, bob): p}}`` of the honest protocol."""
    setup = setup or build_two_party_protocol(spec)
    table = {}
    for k, psi in enumerate(setup.states):
        dist = joint_distribution([setup.alice, setup.bob], psi)
        table[k] = {labels: p for labels, (p, _) in dist.items()}
    return table


def marginal(table, party):
    """Single-party outcome distribution from an outcome table row."""
    out = {}
    for labels, p in table.items():
        out[labels[party]] = out.get(labels[party], 0.0) + p
    return out


@dataclass
class SessionStats:
    """Aggregated counts of a batch of two-party trials."""

    trials: int = 0
    failures: int = 0
    errors: int = 0
    successes: int = 0
    sent_counts: dict = field(default_factory=dict)
    outcome_counts: dict = field(default_factory=dict)

    def add(self, other):
        self.trials += other.trials
        self.failures += other.failures
        self.errors += other.errors
        self.successes += other.successes
        for src, dst in ((other.sent_counts, self.sent_counts), (other.outcome_counts, self.outcome_counts)):
            for k, v in src.items():
                dst[k] = dst.get(k, 0) + v
        return self

    @property
    def failure_rate(self):
        return self.failures / self.trials if self.trials else 0.0


def sample_trials(spec, n_trials, rng, setup=None):
    """Vectorized trials with uniformly random sent states.

    Outcome pairs are drawn from the exact joint law that the sequential
    measurement produces (see :func:`outcome_table`).  Returns
    ``(sent, alice_labels, bob_labels, decoded)`` arrays.
    """
    table = CategoricalTable.from_dists(outcome_table(spec, setup))
    sent = rng.integers(0, 2, size=n_trials)
    labels = table.sample(sent, rng, key_space=(0, 1))
    decoded = decode_pairs(labels[:, 0], labels[:, 1])
    return sent, labels[:, 0], labels[:, 1], decoded


def _stats_from_arrays(sent, a, b, decoded):
    stats = SessionStats(trials=int(sent.size))
    stats.failures = int(np.count_nonzero(decoded == FAIL))
    stats.errors = int(np.count_nonzero((decoded != FAIL) & (decoded != sent)))
    stats.successes = stats.trials - stats.failures - stats.errors
    for k in (0, 1):
        stats.sent_counts[k] = int(np.count_nonzero(sent == k))
    keys, counts = np.unique(np.stack([a, b], axis=1), axis=0, return_counts=True)
    for (x, y), c in zip(keys.tolist(), counts.tolist()):
        stats.outcome_counts[(x, y)] = c
    return stats


def run_two_party_batch(spec, n_trials, seed, threads=1):
    """Seeded batch of ``n_trials`` trials; aggregates do not depend on ``threads``."""
    setup = build_two_party_protocol(spec)

    def work(size, rng, _index):
        return _stats_from_arrays(*sample_trials(spec, size, rng, setup))

    total = SessionStats()
    for part in run_chunked(work, n_trials, seed, threads):
        total.add(part)
    return total
