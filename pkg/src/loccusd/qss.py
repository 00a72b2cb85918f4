"""Secret sharing sessions built on the two-party protocol.

A dealer sends one of the two states per round.  The two parties measure,
rounds where either reports failure are dropped at once, a random subset
of the surviving rounds is compared with the dealer's record to estimate
the error rate, and the rest are folded into parity blocks to form key
bits.

Adversaries:

* :class:`Eve` intercepts both particles, runs the optimal two-state
  unambiguous measurement and forwards the identified state; when it fails
  she forwards a random state or always the first one.
* :class:`CheatingAlice` / :class:`CheatingBob` hold both particles.  When
  the cheater has the three-outcome role a failed identification is simply
  reported as a failure.  In the projective role the cheater must hand a
  qubit to the other party and invent a label, which produces errors.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import as_generator, check_fraction, check_positive_int, check_theta0
from .montecarlo import CategoricalTable, chunk_rng, decode_pairs, run_chunked
from .povm import FAIL, outcome_probs, sample, two_state_usd
from .protocol2 import (ALICE, BOB, ProtocolSpec, build_two_party_protocol, decode_pair,
                        outcome_table, projective_vectors, run_two_party_trial)
from .qcore import Ket

RANDOM = "random"
FIXED = "fixed"


@dataclass(frozen=True)
class Eve:
    fallback: str = RANDOM

    def __post_init__(self):
        if self.fallback not in (RANDOM, FIXED):
            raise ValueError(f"fallback must be {RANDOM!r} or {FIXED!r}, got {self.fallback!r}")

    @property
    def kind(self):
        return "eve"


@dataclass(frozen=True)
class _Cheater:
    """A party that obtains both particles.

    ``forward_state`` is the qubit handed to the other party after a failed
    identification.  With ``always=False`` the cheater plays honestly
    whenever it is assigned the projective role.
    """

    forward_state: tuple = (1.0, 0.0)
    always: bool = True

    def __post_init__(self):
        v = np.asarray(self.forward_state, dtype=complex).reshape(-1)
        if v.size != 2 or np.linalg.norm(v) == 0:
            raise ValueError("forward_state must be a nonzero qubit vector")
        object.__setattr__(self, "forward_state", tuple(complex(x) for x in v / np.linalg.norm(v)))


@dataclass(frozen=True)
class CheatingAlice(_Cheater):
    party = ALICE

    @property
    def kind(self):
        return "cheating_alice"


@dataclass(frozen=True)
class CheatingBob(_Cheater):
    party = BOB

    @property
    def kind(self):
        return "cheating_bob"


@dataclass(frozen=True)
class SessionConfig:
    theta0: float
    n_rounds: int
    check_fraction: float = 0.1
    block_size: int = 1
    role_announcement: bool = False
    adversary: object = None
    error_threshold: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta0", check_theta0(self.theta0))
        object.__setattr__(self, "n_rounds", check_positive_int(self.n_rounds, "n_rounds"))
        object.__setattr__(self, "check_fraction", check_fraction(self.check_fraction, "check_fraction"))
        object.__setattr__(self, "block_size", check_positive_int(self.block_size, "block_size"))
        if self.adversary is not None and not isinstance(self.adversary, (Eve, _Cheater)):
            raise ValueError(f"unknown adversary {self.adversary!r}")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise ValueError("error_threshold must lie in [0, 1]")

    def to_dict(self):
        adv = None
        if self.adversary is not None:
            adv = {"kind": self.adversary.kind}
            for k, v in asdict(self.adversary).items():
                adv[k] = [[x.real, x.imag] for x in v] if k == "forward_state" else v
        return {
            "theta0": self.theta0,
            "n_rounds": self.n_rounds,
            "check_fraction": self.check_fraction,
            "block_size": self.block_size,
            "role_announcement": self.role_announcement,
            "adversary": adv,
            "error_threshold": self.error_threshold,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        adv = d.pop("adversary", None)
        if adv is not None:
            adv = dict(adv)
            kind = adv.pop("kind")
            if "forward_state" in adv:
                adv["forward_state"] = tuple(complex(re, im) for re, im in adv["forward_state"])
            adv = {"eve": Eve, "cheating_alice": CheatingAlice, "cheating_bob": CheatingBob}[kind](**adv)
        return cls(adversary=adv, **d)


@dataclass(frozen=True)
class SessionResult:
    n_rounds: int
    discarded_rounds: int
    sifted_rounds: int
    disclosed_check_rounds: int
    key_rounds: int
    check_errors: int
    observed_error_rate: float
    key_bits: tuple
    dealer_key_bits: tuple
    abort: bool
    adversary_stats: dict = field(default_factory=dict)

    @property
    def error_rate_sigma(self):
        """Binomial standard error of ``observed_error_rate``."""
        n = self.disclosed_check_rounds
        p = self.observed_error_rate
        return float(np.sqrt(p * (1.0 - p) / n)) if n else 0.0

    @property
    def key_agreement(self):
        if not self.key_bits:
            return 1.0
        return float(np.mean(np.array(self.key_bits) == np.array(self.dealer_key_bits)))

    def to_dict(self):
        return {
            "n_rounds": self.n_rounds,
            "discarded_rounds": self.discarded_rounds,
            "sifted_rounds": self.sifted_rounds,
            "disclosed_check_rounds": self.disclosed_check_rounds,
            "key_rounds": self.key_rounds,
            "check_errors": self.check_errors,
            "observed_error_rate": self.observed_error_rate,
            "error_rate_sigma": self.error_rate_sigma,
            "key_bits": "".join(str(b) for b in self.key_bits),
            "key_agreement": self.key_agreement,
            "abort": self.abort,
            "adversary_stats": self.adversary_stats,
        }


def parity_block_key(bits, block_size):
    """XOR of each full block of ``block_size`` bits; a trailing partial block is dropped."""
    block_size = check_positive_int(block_size, "block_size")
    bits = np.asarray(bits, dtype=np.int64).reshape(-1)
    n_blocks = bits.size // block_size
    if n_blocks == 0:
        return np.zeros(0, dtype=np.int64)
    return np.bitwise_xor.reduce(bits[: n_blocks * block_size].reshape(n_blocks, block_size), axis=1)


# -- single-round reference path -------------------------------------------

@dataclass(frozen=True)
class EveRecord:
    label: int
    forwarded: int


def _joint_as_single(psi):
    return Ket((psi.dim,), psi.amps)


def eve_intercept(state_index, cfg, rng):
    """Eve measures the intercepted pair and prepares the state she forwards.

    Returns ``(forwarded_ket, EveRecord)``; ``EveRecord.label`` is the
    identified index or ``FAIL``.
    """
    if not isinstance(cfg.adversary, Eve):
        raise ValueError("eve_intercept needs an Eve adversary in the config")
    rng = as_generator(rng)
    states = build_two_party_protocol(ProtocolSpec(cfg.theta0)).states
    povm = two_state_usd(_joint_as_single(states[0]), _joint_as_single(states[1]))
    out = sample(povm, _joint_as_single(states[state_index]), 0, rng)
    if out.label != FAIL:
        forwarded = out.label
    elif cfg.adversary.fallback == RANDOM:
        forwarded = int(rng.integers(0, 2))
    else:
        forwarded = 0
    return states[forwarded], EveRecord(out.label, forwarded)


@dataclass(frozen=True)
class RoundRecord:
    sent: int
    projective: str
    alice_label: int
    bob_label: int
    decoded: int
    adversary_known: int = FAIL


def _other(party):
    return BOB if party == ALICE else ALICE


def _measure_single(povm, vec, rng):
    return sample(povm, Ket((2,), vec), 0, rng).label


def run_round(cfg, rng):
    """One round with explicit state vectors and sampled measurements.

    Slow; :func:`run_session` uses the equivalent vectorized law.
    """
    rng = as_generator(rng)
    sent = int(rng.integers(0, 2))
    projective = (ALICE, BOB)[int(rng.integers(0, 2))] if cfg.role_announcement else ALICE
    spec = ProtocolSpec(cfg.theta0, roles=projective)
    setup = build_two_party_protocol(spec)
    adv = cfg.adversary
    if adv is None:
        t = run_two_party_trial(spec, sent, rng, setup)
        return RoundRecord(sent, projective, t.alice_label, t.bob_label, t.decoded)
    if isinstance(adv, Eve):
        fwd, rec = eve_intercept(sent, cfg, rng)
        t = run_two_party_trial(spec, rec.forwarded, rng, setup)
        return RoundRecord(sent, projective, t.alice_label, t.bob_label, t.decoded, rec.label)

    cheater = adv.party
    cheater_projective = cheater == projective
    if cheater_projective and not adv.always:
        t = run_two_party_trial(spec, sent, rng, setup)
        return RoundRecord(sent, projective, t.alice_label, t.bob_label, t.decoded)
    states = setup.states
    usd = two_state_usd(_joint_as_single(states[0]), _joint_as_single(states[1]))
    known = sample(usd, _joint_as_single(states[sent]), 0, rng).label
    other_povm = setup.bob if cheater == ALICE else setup.alice
    own_label = int(rng.integers(0, 2))
    if known != FAIL and cheater_projective:
        # re-prepare the identified pair and take part honestly
        t = run_two_party_trial(spec, known, rng, setup)
        return RoundRecord(sent, projective, t.alice_label, t.bob_label, t.decoded, known)
    if known != FAIL:
        # pick the projective partner's outcome by sending it a basis vector
        want = own_label if known == 1 else 1 - own_label
        other_label = _measure_single(other_povm, projective_vectors(1.0)[want], rng)
    else:
        other_label = _measure_single(other_povm, np.asarray(adv.forward_state), rng)
        if not cheater_projective:
            own_label = FAIL
    a, b = (own_label, other_label) if cheater == ALICE else (other_label, own_label)
    return RoundRecord(sent, projective, a, b, decode_pair(a, b), known)


# -- vectorized session ----------------------------------------------------

class _RoundLaw:
    """Exact conditional outcome laws used by the vectorized session."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.specs = {0: ProtocolSpec(cfg.theta0, roles=ALICE), 1: ProtocolSpec(cfg.theta0, roles=BOB)}
        self.setups = {r: build_two_party_protocol(s) for r, s in self.specs.items()}
        # key = 2 * role + state
        self.honest = CategoricalTable.from_dists(
            {2 * r + k: d for r, s in self.specs.items() for k, d in outcome_table(s, self.setups[r]).items()}
        )
        states = self.setups[0].states
        usd = two_state_usd(_joint_as_single(states[0]), _joint_as_single(states[1]))
        self.intercept = CategoricalTable.from_dists(
            {k: {(lab,): p for lab, p in outcome_probs(usd, _joint_as_single(s)).items()}
             for k, s in enumerate(states)}
        )
        adv = cfg.adversary
        if isinstance(adv, _Cheater):
            # key = 4 * role + qubit (0, 1: projective basis vectors, 2: forward_state)
            vecs = list(projective_vectors(1.0)) + [np.asarray(adv.forward_state)]
            dists = {}
            for r, setup in self.setups.items():
                other = setup.bob if adv.party == ALICE else setup.alice
                for q, v in enumerate(vecs):
                    dists[4 * r + q] = {(lab,): p for lab, p in outcome_probs(other, Ket((2,), v)).items()}
            self.forwarded = CategoricalTable.from_dists(dists)

    def sample(self, size, rng):
        cfg = self.cfg
        sent = rng.integers(0, 2, size=size)
        if cfg.role_announcement:
            role = rng.integers(0, 2, size=size)
        else:
            role = np.zeros(size, dtype=np.int64)
        known = np.full(size, FAIL, dtype=np.int64)
        adv = cfg.adversary
        if adv is None:
            labels = self.honest.sample(2 * role + sent, rng, key_space=range(4))
            a, b = labels[:, 0], labels[:, 1]
        elif isinstance(adv, Eve):
            eve = self.intercept.sample(sent, rng, key_space=(0, 1))[:, 0]
            known = eve.copy()
            fallback = rng.integers(0, 2, size=size) if adv.fallback == RANDOM else np.zeros(size, dtype=np.int64)
            fwd = np.where(eve == FAIL, fallback, eve)
            labels = self.honest.sample(2 * role + fwd, rng, key_space=range(4))
            a, b = labels[:, 0], labels[:, 1]
        else:
            a, b, known = self._cheat(sent, role, rng)
        return sent, role, a, b, decode_pairs(a, b), known

    def _cheat(self, sent, role, rng):
        adv = self.cfg.adversary
        size = sent.size
        cheater_role = 0 if adv.party == ALICE else 1
        cheater_projective = role == cheater_role
        honest_mask = cheater_projective & (not adv.always)
        known = self.intercept.sample(sent, rng, key_space=(0, 1))[:, 0]
        own = rng.integers(0, 2, size=size)
        reprepared = self.honest.sample(2 * role + np.where(known == FAIL, 0, known), rng, key_space=range(4))
        honest = self.honest.sample(2 * role + sent, rng, key_space=range(4))
        want = np.where(known == 1, own, 1 - own)
        qubit = np.where(known == FAIL, 2, want)
        other = self.forwarded.sample(4 * role + qubit, rng, key_space=range(8))[:, 0]
        own = np.where((known == FAIL) & ~cheater_projective, FAIL, own)
        if adv.party == ALICE:
            a, b = own, other
        else:
            a, b = other, own
        use_reprepared = (known != FAIL) & cheater_projective
        a = np.where(use_reprepared, reprepared[:, 0], a)
        b = np.where(use_reprepared, reprepared[:, 1], b)
        a = np.where(honest_mask, honest[:, 0], a)
        b = np.where(honest_mask, honest[:, 1], b)
        known = np.where(honest_mask, FAIL, known)
        return a, b, known


def _seed_from(rng):
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2**63 - 1))
    if rng is None:
        raise ValueError("run_session needs an explicit seed")
    return int(rng)


def simulate_rounds(cfg, seed, threads=1):
    """Per-round arrays ``(sent, role, alice, bob, decoded, known)`` for the whole session."""
    law = _RoundLaw(cfg)
    parts = run_chunked(lambda size, rng, _i: law.sample(size, rng), cfg.n_rounds, seed, threads)
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(6))


def run_session(cfg, rng, threads=1):
    """Run a full session and return a :class:`SessionResult`.

    ``rng`` is an int seed (or a Generator, from which a seed is drawn).
    The disclosed check rounds are chosen uniformly without replacement
    from the surviving rounds using a stream separate from the rounds.
    """
    seed = _seed_from(rng)
    sent, role, a, b, decoded, known = simulate_rounds(cfg, seed, threads)
    kept = np.flatnonzero(decoded != FAIL)
    n_check = int(round(cfg.check_fraction * kept.size))
    picker = chunk_rng(seed, 0, stream=1)
    check = np.sort(picker.choice(kept, size=n_check, replace=False)) if n_check else np.zeros(0, dtype=np.int64)
    is_check = np.zeros(cfg.n_rounds, dtype=bool)
    is_check[check] = True
    key_idx = kept[~is_check[kept]]
    check_errors = int(np.count_nonzero(decoded[check] != sent[check]))
    rate = check_errors / n_check if n_check else 0.0
    stats = {"rounds_with_adversary_knowledge": int(np.count_nonzero(known != FAIL))}
    if cfg.adversary is not None:
        stats["adversary_known_key_rounds"] = int(np.count_nonzero(known[key_idx] != FAIL))
    return SessionResult(
        n_rounds=cfg.n_rounds,
        discarded_rounds=int(cfg.n_rounds - kept.size),
        sifted_rounds=int(kept.size),
        disclosed_check_rounds=n_check,
        key_rounds=int(key_idx.size),
        check_errors=check_errors,
        observed_error_rate=float(rate),
        key_bits=tuple(int(x) for x in parity_block_key(decoded[key_idx], cfg.block_size)),
        dealer_key_bits=tuple(int(x) for x in parity_block_key(sent[key_idx], cfg.block_size)),
        abort=bool(rate > cfg.error_threshold),
        adversary_stats=stats,
    )


def cheating_bob_detection_rate(cfg, rng, threads=1):
    """Fraction of disclosed check rounds that expose a cheating Bob."""
    if not isinstance(cfg.adversary, CheatingBob):
        raise ValueError("cheating_bob_detection_rate needs a CheatingBob adversary")
    return run_session(cfg, rng, threads).observed_error_rate


def key_guess_accuracy(cfg, rng, threads=1):
    """How often a cheater's best guess of each key bit is right.

    The cheater knows the bit of every surviving round it identified and
    guesses the rest at random; its guess of a block parity is the XOR.
    """
    if not isinstance(cfg.adversary, _Cheater):
        raise ValueError("key_guess_accuracy needs a cheating party")
    seed = _seed_from(rng)
    sent, role, a, b, decoded, known = simulate_rounds(cfg, seed, threads)
    kept = np.flatnonzero(decoded != FAIL)
    guesser = chunk_rng(seed, 0, stream=2)
    guess = np.where(known[kept] != FAIL, known[kept], guesser.integers(0, 2, size=kept.size))
    key = parity_block_key(decoded[kept], cfg.block_size)
    guessed = parity_block_key(guess, cfg.block_size)
    return float(np.mean(key == guessed)) if key.size else float("nan")


def analytic_error_rate(cfg):
    """Expected error rate among surviving rounds, by conditioning on exact outcome laws.

    Independent of the samplers: it enumerates the adversary's branches and
    the honest protocol's joint outcome probabilities.
    """
    theta0 = cfg.theta0
    q = float(np.cos(2 * theta0))  # joint unambiguous failure probability
    roles = (0, 1) if cfg.role_announcement else (0,)
    adv = cfg.adversary
    kept = err = 0.0
    for r in roles:
        spec = ProtocolSpec(theta0, roles=(ALICE, BOB)[r])
        table = outcome_table(spec)

        def honest(k, fwd):
            ok = sum(p for lab, p in table[fwd].items() if decode_pair(*lab) != FAIL)
            bad = sum(p for lab, p in table[fwd].items() if decode_pair(*lab) not in (FAIL, k))
            return ok, bad

        for k in (0, 1):
            w = 0.5 / len(roles)
            if adv is None:
                ok, bad = honest(k, k)
            elif isinstance(adv, Eve):
                ok_s, bad_s = honest(k, k)
                if adv.fallback == RANDOM:
                    fb = [(0.5, 0), (0.5, 1)]
                else:
                    fb = [(1.0, 0)]
                ok_f = sum(pw * honest(k, f)[0] for pw, f in fb)
                bad_f = sum(pw * honest(k, f)[1] for pw, f in fb)
                ok, bad = (1 - q) * ok_s + q * ok_f, (1 - q) * bad_s + q * bad_f
            else:
                cheater_projective = (r == 0) == (adv.party == ALICE)
                if cheater_projective and not adv.always:
                    ok, bad = honest(k, k)
                elif cheater_projective:
                    setup = build_two_party_protocol(spec)
                    other = setup.bob if adv.party == ALICE else setup.alice
                    pf = outcome_probs(other, Ket((2,), np.asarray(adv.forward_state)))
                    # random own label: the decoded bit is a fair coin
                    survive = 1.0 - pf.get(FAIL, 0.0)
                    ok_s, _ = honest(k, k)
                    ok, bad = (1 - q) * ok_s + q * survive, q * survive * 0.5
                else:
                    ok, bad = 1 - q, 0.0
            kept += w * ok
            err += w * bad
    return err / kept if kept else 0.0
