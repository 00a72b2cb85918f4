"""Numerical search for two-qubit POVMs with simultaneous failure signals.

Both parties get outcomes ``{0, 1, f}``.  A candidate is acceptable when
no outcome pair decodes to the wrong state and a failure seen by one party
is always seen by the other.  For two-qubit states whose Schmidt
coefficients are all nonzero no such candidate exists if both states must
be detected, so :func:`infeasibility_search` should never drive the
residual to zero once the detection scales are bounded below.

Success elements are rank one, ``x_j |eta><r_j|``.  Failure elements are
arbitrary 2x2 Kraus matrices so that the trivial "always fail" measurement
is representable when the detection floor is zero.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import qcore
from ._validation import as_generator, check_positive_int
from .povm import FAIL, PovmSet
from .qcore import Ket

# (state index, alice label, bob label) combinations that must never occur
FORBIDDEN = tuple(
    [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]
    + [(k, FAIL, j) for k in (0, 1) for j in (0, 1)]
    + [(k, j, FAIL) for k in (0, 1) for j in (0, 1)]
)
_LABEL_INDEX = {0: 0, 1: 1, FAIL: 2}

# real parameters per party: two complex directions, two scales, one complex 2x2
_PARTY_SIZE = 4 + 4 + 2 + 8
N_PARAMS = 2 * _PARTY_SIZE


def _unit(v):
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("direction vectors must be nonzero")
    return v / n


@dataclass(frozen=True)
class FeasibilityProblem:
    """A candidate pair of three-outcome measurements for two target states.

    ``alice_dirs``/``bob_dirs`` hold the unit vectors ``r_0, r_1`` and
    ``s_0, s_1``; ``*_scales`` the nonnegative ``x_j, y_j``; ``*_fail`` the
    failure Kraus matrices.
    """

    psi0: Ket
    psi1: Ket
    alice_dirs: tuple
    alice_scales: tuple
    alice_fail: np.ndarray
    bob_dirs: tuple
    bob_scales: tuple
    bob_fail: np.ndarray

    def __post_init__(self):
        for psi in (self.psi0, self.psi1):
            if psi.dims != (2, 2) or not psi.is_normalized(qcore.DECOMP_TOL):
                raise ValueError("target states must be normalized two-qubit kets")
        for name in ("alice", "bob"):
            dirs = tuple(_unit(d) for d in getattr(self, f"{name}_dirs"))
            scales = tuple(float(s) for s in getattr(self, f"{name}_scales"))
            if len(dirs) != 2 or len(scales) != 2:
                raise ValueError("need exactly two success directions and scales per party")
            if min(scales) < 0.0:
                raise ValueError("scales must be nonnegative")
            fail = np.array(getattr(self, f"{name}_fail"), dtype=complex).reshape(2, 2)
            object.__setattr__(self, f"{name}_dirs", dirs)
            object.__setattr__(self, f"{name}_scales", scales)
            object.__setattr__(self, f"{name}_fail", fail)

    @property
    def lambda0(self):
        return qcore.schmidt_decompose(self.psi0).lambdas

    @property
    def lambda1(self):
        return qcore.schmidt_decompose(self.psi1).lambdas

    def povms(self):
        """``(alice, bob)`` as :class:`PovmSet` objects (not necessarily complete)."""
        out = []
        for name in ("alice", "bob"):
            dirs = getattr(self, f"{name}_dirs")
            scales = getattr(self, f"{name}_scales")
            ops = {j: scales[j] * qcore.projector(dirs[j]) for j in (0, 1)}
            ops[FAIL] = getattr(self, f"{name}_fail")
            out.append(PovmSet.from_ops(ops))
        return tuple(out)

    @classmethod
    def from_povms(cls, psi0, psi1, alice, bob):
        """Extract directions and scales from measurements with rank-one success effects."""
        fields = {}
        for name, povm in (("alice", alice), ("bob", bob)):
            dirs, scales = [], []
            for j in (0, 1):
                w, v = np.linalg.eigh(povm[j].effect)
                dirs.append(v[:, -1])
                scales.append(np.sqrt(max(w[-1], 0.0)))
                if w[0] > 1e-10:
                    raise ValueError(f"{name} element {j} is not rank one")
            fail = povm[FAIL].op if FAIL in povm else np.zeros((2, 2))
            fields[f"{name}_dirs"] = tuple(dirs)
            fields[f"{name}_scales"] = tuple(scales)
            fields[f"{name}_fail"] = fail
        return cls(psi0, psi1, **fields)

    @classmethod
    def from_vector(cls, psi0, psi1, theta):
        """Decode a flat real parameter vector (the layout used by the search)."""
        theta = np.asarray(theta, dtype=float)
        fields = {}
        for i, name in enumerate(("alice", "bob")):
            p = theta[i * _PARTY_SIZE:(i + 1) * _PARTY_SIZE]
            d0 = p[0:2] + 1j * p[2:4]
            d1 = p[4:6] + 1j * p[6:8]
            fields[f"{name}_dirs"] = (d0, d1)
            fields[f"{name}_scales"] = (abs(p[8]), abs(p[9]))
            fields[f"{name}_fail"] = (p[10:14] + 1j * p[14:18]).reshape(2, 2)
        return cls(psi0, psi1, **fields)


def states_from_lambdas(lambda0, lambda1, basis_angle=0.0):
    """Two-qubit pair with the given Schmidt eigenvalues.

    The first state is ``sqrt(l00)|00> + sqrt(l01)|11>``; the second uses
    local bases rotated by ``basis_angle`` and a minus sign, so the default
    reproduces the same-Schmidt-basis family ``cos t|00> +/- sin t|11>``.
    """
    l0 = np.asarray(lambda0, dtype=float)
    l1 = np.asarray(lambda1, dtype=float)
    for lam in (l0, l1):
        if lam.shape != (2,) or lam.min() < 0 or abs(lam.sum() - 1.0) > 1e-12:
            raise ValueError(f"Schmidt eigenvalues must be a nonnegative pair summing to 1, got {lam}")
    c, s = np.cos(basis_angle), np.sin(basis_angle)
    v0, v1 = np.array([c, s]), np.array([-s, c])
    psi0 = Ket((2, 2), np.sqrt(l0[0]) * np.kron([1, 0], [1, 0]) + np.sqrt(l0[1]) * np.kron([0, 1], [0, 1]))
    psi1 = Ket((2, 2), np.sqrt(l1[0]) * np.kron(v0, v0) - np.sqrt(l1[1]) * np.kron(v1, v1))
    return psi0, psi1


def residual_terms(fp):
    """Per-constraint contributions: forbidden joint probabilities and completeness."""
    alice, bob = fp.povms()
    ea, eb = alice.effects(), bob.effects()
    terms = {}
    for k, a, b in FORBIDDEN:
        v = (fp.psi0, fp.psi1)[k].amps
        terms[(k, a, b)] = float(np.real(np.vdot(v, np.kron(ea[a], eb[b]) @ v)))
    eye = np.eye(2)
    terms["alice_completeness"] = float(np.sum(np.abs(sum(ea.values()) - eye) ** 2))
    terms["bob_completeness"] = float(np.sum(np.abs(sum(eb.values()) - eye) ** 2))
    return terms


def constraint_residual(fp):
    """Nonnegative violation measure; zero iff ``fp`` is an exact solution.

    Each forbidden outcome contributes ``|<Psi_k| A_j x B_l |Psi_k>|``-style
    weight ``||(A_j x B_l)|Psi_k>||^2``; each party adds the squared
    Frobenius distance of its effects' sum from the identity.
    """
    return float(sum(residual_terms(fp).values()))


def _batch_effects(theta):
    """Effects for a batch of parameter vectors: two ``(R, 3, 2, 2)`` arrays."""
    out = []
    for i in range(2):
        p = theta[:, i * _PARTY_SIZE:(i + 1) * _PARTY_SIZE]
        dirs = np.stack([p[:, 0:2] + 1j * p[:, 2:4], p[:, 4:6] + 1j * p[:, 6:8]], axis=1)
        dirs = dirs / np.linalg.norm(dirs, axis=2, keepdims=True)
        scales = p[:, 8:10] ** 2
        succ = scales[:, :, None, None] * np.einsum("rja,rjb->rjab", dirs, dirs.conj())
        g = (p[:, 10:14] + 1j * p[:, 14:18]).reshape(-1, 2, 2)
        # Kraus G has effect G^dagger G
        fail = np.einsum("rba,rbc->rac", g.conj(), g)
        out.append(np.concatenate([succ, fail[:, None]], axis=1))
    return out


def batch_residual(theta, psi0, psi1):
    """Vectorized :func:`constraint_residual` over rows of ``theta``."""
    theta = np.atleast_2d(theta)
    ea, eb = _batch_effects(theta)
    total = np.zeros(theta.shape[0])
    for k, psi in enumerate((psi0, psi1)):
        c = psi.amps.reshape(2, 2)
        # <Psi| E_j x F_l |Psi> for every label pair
        probs = np.real(np.einsum("ab,rjac,rlbd,cd->rjl", c.conj(), ea, eb, c))
        for kk, a, b in FORBIDDEN:
            if kk == k:
                total += probs[:, _LABEL_INDEX[a], _LABEL_INDEX[b]]
    eye = np.eye(2)
    for eff in (ea, eb):
        total += np.sum(np.abs(eff.sum(axis=1) - eye) ** 2, axis=(1, 2))
    return total


def _scale_slots():
    return [i * _PARTY_SIZE + j for i in range(2) for j in (8, 9)]


@dataclass(frozen=True)
class SearchResult:
    best_residual: float
    best: FeasibilityProblem
    residuals: np.ndarray
    restarts: int
    iterations: int
    epsilon: float


def _random_start(rng, n, epsilon):
    theta = rng.normal(size=(n, N_PARAMS))
    slots = _scale_slots()
    theta[:, slots] = rng.uniform(epsilon, 1.0, size=(n, len(slots)))
    theta[:, [i * _PARTY_SIZE + j for i in range(2) for j in range(10, 18)]] *= 0.5
    return theta


def _project(theta, epsilon):
    slots = _scale_slots()
    theta[:, slots] = np.clip(np.abs(theta[:, slots]), epsilon, 1.0)
    return theta


def infeasibility_search(psi0, psi1, restarts=200, iterations=2000, rng=None, epsilon=1e-3,
                         polish=8):
    """Minimize :func:`constraint_residual` by random-restart local descent.

    Every restart runs an adaptive random-perturbation descent (all restarts
    advance together as one batch); the ``polish`` best end points are then
    refined with bounded L-BFGS-B.  Success scales are kept in
    ``[epsilon, 1]`` so that both states stay detectable.

    Raises
    ------
    ValueError
        If either state has a vanishing Schmidt coefficient while
        ``epsilon > 0``.
    """
    restarts = check_positive_int(restarts, "restarts")
    iterations = check_positive_int(iterations, "iterations")
    if epsilon < 0.0 or epsilon > 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    if epsilon > 0.0:
        for name, psi in (("psi0", psi0), ("psi1", psi1)):
            if qcore.schmidt_decompose(psi).rank(1e-12) < 2:
                raise ValueError(f"{name} is a product state; the search needs entangled targets")
    rng = as_generator(rng)

    theta = _project(_random_start(rng, restarts, epsilon), epsilon)
    value = batch_residual(theta, psi0, psi1)
    step = np.full(restarts, 0.3)
    for _ in range(iterations):
        trial = _project(theta + step[:, None] * rng.normal(size=theta.shape), epsilon)
        tv = batch_residual(trial, psi0, psi1)
        better = tv < value
        theta[better] = trial[better]
        value[better] = tv[better]
        step = np.where(better, step * 1.5, step * 0.93)
        step = np.clip(step, 1e-9, 1.0)

    bounds = [(None, None)] * N_PARAMS
    for s in _scale_slots():
        bounds[s] = (epsilon, 1.0)
    for idx in np.argsort(value)[:polish]:
        res = minimize(lambda t: batch_residual(t, psi0, psi1)[0], theta[idx], method="L-BFGS-B",
                       bounds=bounds, options={"maxiter": 5000, "ftol": 1e-16, "gtol": 1e-12})
        if res.fun < value[idx]:
            theta[idx] = res.x
            value[idx] = res.fun

    best = int(np.argmin(value))
    fp = FeasibilityProblem.from_vector(psi0, psi1, theta[best])
    return SearchResult(float(value[best]), fp, value.copy(), restarts, iterations, float(epsilon))
