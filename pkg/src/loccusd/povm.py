"""Kraus-operator measurements with labelled outcomes.

Outcome labels are small ints; the inconclusive outcome is ``FAIL`` (-1).
A measurement acts on one party of a multi-party Ket and is embedded as
``I x ... x op x ... x I`` in party order.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import qcore
from .qcore import ALGEBRA_TOL, DECOMP_TOL, DimensionError, Ket

FAIL = -1


def label_name(label):
    return "f" if label == FAIL else str(label)


@dataclass(frozen=True)
class KrausOperator:
    label: int
    op: np.ndarray

    def __post_init__(self):
        op = np.array(self.op, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise DimensionError(f"Kraus operator must be square, got shape {op.shape}")
        op.flags.writeable = False
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "label", int(self.label))

    @property
    def effect(self):
        return self.op.conj().T @ self.op


@dataclass(frozen=True)
class PovmSet:
    """Measurement given by Kraus operators with distinct labels."""

    elements: tuple

    def __post_init__(self):
        elements = tuple(self.elements)
        if not elements:
            raise ValueError("a PovmSet needs at least one element")
        labels = [e.label for e in elements]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate outcome labels {labels}")
        dims = {e.op.shape[0] for e in elements}
        if len(dims) != 1:
            raise DimensionError(f"elements act on different dimensions {sorted(dims)}")
        object.__setattr__(self, "elements", elements)

    @classmethod
    def from_ops(cls, ops):
        """Build from a ``{label: kraus_matrix}`` mapping."""
        return cls(tuple(KrausOperator(k, v) for k, v in ops.items()))

    @classmethod
    def from_effects(cls, effects):
        """Build from ``{label: effect}`` using hermitian square roots as Kraus operators."""
        return cls(tuple(KrausOperator(k, qcore.psd_sqrt(v)) for k, v in effects.items()))

    @property
    def dim(self):
        return self.elements[0].op.shape[0]

    @property
    def labels(self):
        return tuple(e.label for e in self.elements)

    def __getitem__(self, label):
        for e in self.elements:
            if e.label == label:
                return e
        raise KeyError(label)

    def __contains__(self, label):
        return label in self.labels

    def effects(self):
        return {e.label: e.effect for e in self.elements}


@dataclass(frozen=True)
class ValidationReport:
    completeness_residual: float
    min_eigenvalues: dict
    passed: bool


@dataclass(frozen=True)
class MeasurementOutcome:
    label: int
    post_state: Ket
    prob: float


def validate(povm, completeness_tol=DECOMP_TOL, psd_tol=ALGEBRA_TOL):
    """Check completeness and positivity of every effect.

    Never raises; failures are reported through ``passed``.
    """
    effects = povm.effects()
    total = sum(effects.values())
    residual = float(np.max(np.abs(total - np.eye(povm.dim))))
    min_eigs = {}
    hermitian = True
    for label, eff in effects.items():
        if np.max(np.abs(eff - eff.conj().T)) > psd_tol:
            hermitian = False
        min_eigs[label] = float(np.linalg.eigvalsh(0.5 * (eff + eff.conj().T)).min())
    passed = hermitian and residual <= completeness_tol and all(v >= -psd_tol for v in min_eigs.values())
    return ValidationReport(residual, min_eigs, passed)


def _check_party(povm, psi, party_index):
    if not 0 <= party_index < psi.n_parties:
        raise DimensionError(f"party index {party_index} out of range for dims {psi.dims}")
    if povm.dim != psi.dims[party_index]:
        raise DimensionError(
            f"measurement acts on dimension {povm.dim}, party {party_index} has {psi.dims[party_index]}"
        )


def outcome_probs(povm, psi, party_index=0):
    """Born-rule probabilities ``{label: p}`` for measuring one party of ``psi``."""
    _check_party(povm, psi, party_index)
    probs = {}
    for e in povm.elements:
        v = qcore.apply_local(e.op, psi, party_index).amps
        probs[e.label] = float(np.real(np.vdot(v, v)))
    return probs


def branches(povm, psi, party_index=0, min_prob=0.0):
    """Every outcome with its unnormalized post-measurement vector.

    Returns a list of ``(label, prob, Ket)``; the Ket is unnormalized so that
    chained measurements keep joint probabilities in its norm.
    """
    _check_party(povm, psi, party_index)
    out = []
    for e in povm.elements:
        v = qcore.apply_local(e.op, psi, party_index)
        p = float(np.real(np.vdot(v.amps, v.amps)))
        if p > min_prob:
            out.append((e.label, p, v))
    return out


def sample(povm, psi, party_index, rng):
    """Draw one outcome and collapse ``psi`` accordingly."""
    outs = branches(povm, psi, party_index)
    probs = np.array([p for _, p, _ in outs])
    idx = int(rng.choice(len(outs), p=probs / probs.sum()))
    label, p, v = outs[idx]
    return MeasurementOutcome(label, v.normalized(), p)


def joint_distribution(povms, psi, min_prob=1e-15):
    """Joint outcome law when party ``i`` measures ``povms[i]`` in order.

    ``povms`` may contain ``None`` for parties that do not measure.  Returns a
    dict mapping label tuples (``None`` for skipped parties) to
    ``(probability, unnormalized final Ket)``.
    """
    if len(povms) != psi.n_parties:
        raise DimensionError(f"{len(povms)} measurements for {psi.n_parties} parties")
    layer = {(): (1.0, psi)}
    for party, povm in enumerate(povms):
        nxt = {}
        for labels, (_, state) in layer.items():
            if povm is None:
                nxt[labels + (None,)] = (float(np.real(np.vdot(state.amps, state.amps))), state)
                continue
            for label, p, v in branches(povm, state, party, min_prob):
                nxt[labels + (label,)] = (p, v)
        layer = nxt
    return layer


def product_outcomes(povms):
    """All label tuples for a list of measurements, in a fixed order."""
    return list(product(*(p.labels for p in povms)))


def two_state_usd(psi0, psi1):
    """Optimal equal-prior unambiguous measurement for two pure states.

    The success effects are ``|perp_k><perp_k| / (1 + |<psi0|psi1>|)`` where
    ``perp_k`` is orthogonal to the other state within their span; labels are
    the identified state index, and the remainder of the identity is the
    failure effect.
    """
    o = psi0.inner(psi1)
    s = abs(o)
    if s >= 1.0 - 1e-12:
        raise ValueError("identical states cannot be discriminated unambiguously")
    a0, a1 = psi0.amps, psi1.amps
    perp0 = a0 - psi1.inner(psi0) * a1
    perp1 = a1 - o * a0
    perp0 = perp0 / np.linalg.norm(perp0)
    perp1 = perp1 / np.linalg.norm(perp1)
    scale = 1.0 / (1.0 + s)
    e0 = scale * qcore.projector(perp0)
    e1 = scale * qcore.projector(perp1)
    ef = np.eye(psi0.dim) - e0 - e1
    return PovmSet.from_effects({0: e0, 1: e1, FAIL: 0.5 * (ef + ef.conj().T)})
