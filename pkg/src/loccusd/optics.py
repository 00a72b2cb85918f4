"""Single-photon path x polarization simulator for the three-outcome measurement.

A photon lives in one of the paths ``a, b, c`` with polarization ``H``
(|0>) or ``V`` (|1>), a 6-dimensional space.  The circuit is a polarizing
beam splitter that sends V from ``a`` into ``b``, a beam splitter of
transmissivity ``t = tan(theta0)`` mixing ``a`` with the failure port
``c``, a second polarizing beam splitter recombining ``b`` into ``a`` and a
final one at 45 degrees that separates the two success branches.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_theta0
from .povm import outcome_probs
from .protocol2 import collapsed_bob_states, ProtocolSpec, usd_povm

PATHS = ("a", "b", "c")
POLS = ("H", "V")
DIM = len(PATHS) * len(POLS)


def mode_index(path, pol):
    if path not in PATHS:
        raise ValueError(f"unknown path label {path!r}")
    if pol not in POLS:
        raise ValueError(f"unknown polarization {pol!r}")
    return PATHS.index(path) * 2 + POLS.index(pol)


@dataclass(frozen=True)
class OpticalState:
    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size != DIM:
            raise ValueError(f"optical state needs {DIM} amplitudes, got {amps.size}")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_polarization(cls, pol_amps, path="a"):
        amps = np.zeros(DIM, dtype=complex)
        amps[mode_index(path, "H")] = pol_amps[0]
        amps[mode_index(path, "V")] = pol_amps[1]
        return cls(amps)

    def norm(self):
        return float(np.linalg.norm(self.amps))

    def path_probability(self, path):
        i = mode_index(path, "H")
        return float(np.sum(np.abs(self.amps[i:i + 2]) ** 2))

    def amplitude(self, path, pol):
        return complex(self.amps[mode_index(path, pol)])


@dataclass(frozen=True)
class PBS:
    """Polarizing beam splitter on ``path_in``.

    Polarization along ``angle`` (0 = H) passes; the orthogonal component
    is exchanged with the same polarization in ``path_out``, which makes
    the element its own inverse.
    """

    path_in: str
    path_out: str
    angle: float = 0.0

    def matrix(self):
        i = mode_index(self.path_in, "H")
        o = mode_index(self.path_out, "H")
        c, s = np.cos(self.angle), np.sin(self.angle)
        # columns: pass axis, reflected axis, in the H/V basis
        rot = np.array([[c, -s], [s, c]])
        swap = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=float)
        big_rot = np.kron(np.eye(2), rot)
        local = big_rot @ swap @ big_rot.T
        u = np.eye(DIM, dtype=complex)
        idx = [i, i + 1, o, o + 1]
        u[np.ix_(idx, idx)] = local
        return u


@dataclass(frozen=True)
class BS:
    """Polarization-insensitive beam splitter: ``path1 -> t path1 + r path2``."""

    path1: str
    path2: str
    t: float

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"transmissivity must lie in [0, 1], got {self.t!r}")

    @property
    def r(self):
        return float(np.sqrt(max(0.0, 1.0 - self.t**2)))

    def matrix(self):
        u = np.eye(DIM, dtype=complex)
        for pol in POLS:
            i, j = mode_index(self.path1, pol), mode_index(self.path2, pol)
            # sign flip on the second reflected port keeps the block unitary
            u[np.ix_([i, j], [i, j])] = [[self.t, -self.r], [self.r, self.t]]
        return u


def apply(element, state):
    return OpticalState(element.matrix() @ state.amps)


def bob_circuit(theta0):
    """Element sequence realizing the three-outcome measurement at ``theta0``."""
    theta0 = check_theta0(theta0)
    t = min(np.tan(theta0), 1.0)
    return (
        PBS("a", "b"),
        BS("a", "c", t),
        PBS("a", "b"),
        PBS("a", "b", np.pi / 4),
    )


def circuit_unitary(elements):
    u = np.eye(DIM, dtype=complex)
    for e in elements:
        u = e.matrix() @ u
    return u


# detector -> path after the final polarizing beam splitter
DETECTORS = {"plus": "a", "minus": "b", "fail": "c"}
# detector -> label of the abstract three-outcome measurement that fires
DETECTOR_LABELS = {"plus": 1, "minus": 0, "fail": -1}


def run_bob_interferometer(theta0, pol_amps):
    """Detector click probabilities for a single-photon polarization input in mode ``a``.

    ``plus`` clicks for the ``(|0> + |1>)`` branch (identifies ``psi_0``),
    ``minus`` for ``(|0> - |1>)`` (identifies ``psi_1``), ``fail`` for mode ``c``.
    """
    state = OpticalState.from_polarization(getattr(pol_amps, "amps", pol_amps))
    for element in bob_circuit(theta0):
        state = apply(element, state)
    return {name: state.path_probability(path) for name, path in DETECTORS.items()}


def output_state(theta0, pol_amps):
    state = OpticalState.from_polarization(pol_amps)
    for element in bob_circuit(theta0)[:3]:
        state = apply(element, state)
    return state


def equivalence_report(theta0):
    """Largest detector-vs-measurement probability gap over both collapsed inputs."""
    spec = ProtocolSpec(theta0)
    povm = usd_povm(spec.theta0)
    rows = []
    for j, psi in enumerate(collapsed_bob_states(spec, 0)):
        optical = run_bob_interferometer(spec.theta0, psi)
        abstract = outcome_probs(povm, psi, 0)
        gap = max(abs(optical[d] - abstract[lab]) for d, lab in DETECTOR_LABELS.items())
        rows.append({"input": f"psi{j}", "optical": optical,
                     "povm": {d: abstract[lab] for d, lab in DETECTOR_LABELS.items()}, "max_abs_diff": gap})
    return {"theta0": spec.theta0, "inputs": rows, "max_abs_diff": max(r["max_abs_diff"] for r in rows)}
