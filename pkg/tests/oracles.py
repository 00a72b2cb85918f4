"""Independent reference computations used by the tests.

Nothing here calls the package's measurement machinery; states are built
from their defining formulas and collapsed by explicit tensor contraction.
"""

import itertools

import numpy as np

OMEGA = np.exp(2j * np.pi / 3)


def ghz_pair(n, theta0):
    out = []
    for sign in (1, -1):
        t = np.zeros((2,) * n, dtype=complex)
        t[(0,) * n] = np.cos(theta0)
        t[(1,) * n] = sign * np.sin(theta0)
        out.append(t)
    return out


def qutrit_triple(n, coeffs):
    out = []
    for j in range(3):
        t = np.zeros((3,) * n, dtype=complex)
        for level, phase in zip(range(3), (0, j, -j)):
            t[(level,) * n] = coeffs[level] * OMEGA**phase
        out.append(t)
    return out


def qubit_single(theta0, j):
    return np.array([np.cos(theta0), (-1) ** j * np.sin(theta0)], dtype=complex)


def qutrit_single(coeffs, j):
    return np.asarray(coeffs, dtype=complex) * OMEGA ** (np.array([0, j, -j]))


def contract_all_but_last(tensor, bras):
    """Apply ``<b_1| x ... x <b_{N-1}| x I`` to an N-index tensor."""
    t = tensor
    for b in bras:
        t = np.tensordot(np.conj(b), t, axes=([0], [0]))
    return t


def outcome_tuples(d, n):
    return itertools.product(range(d), repeat=n)


def same_ray(a, b, tol):
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return abs(abs(np.vdot(a, b)) - 1.0) <= tol and np.max(np.abs(a - np.vdot(b, a) * b)) <= tol


def dual_directions(states):
    """Unit vectors ``phi_k`` with ``<phi_k|psi_j> = 0`` for ``j != k`` via a matrix inverse."""
    g = np.array(states).T
    d = np.linalg.inv(g).conj().T
    return [d[:, k] / np.linalg.norm(d[:, k]) for k in range(len(states))]
