"""Small-dimension pure-state linear algebra.

Everything here works on dense complex vectors over a product of local
computational bases, ordered with party 0 as the most significant index
(the usual ``np.kron`` convention).  Operators are plain complex numpy
arrays.
"""

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.optimize import minimize_scalar

ALGEBRA_TOL = 1e-12
DECOMP_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when kets or operators have incompatible shapes."""


@dataclass(frozen=True)
class Ket:
    """Pure state amplitudes on ``dims[0] x dims[1] x ...``.

    The amplitude array is copied on construction and made read-only, so a
    Ket can be shared freely between trial workers.
    """

    dims: tuple
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionError(f"invalid local dimensions {self.dims!r}")
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size != int(np.prod(dims)):
            raise DimensionError(
                f"{amps.size} amplitudes do not fit dims {dims} (need {int(np.prod(dims))})"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @property
    def n_parties(self):
        return len(self.dims)

    @property
    def dim(self):
        return self.amps.size

    def norm(self):
        return float(np.linalg.norm(self.amps))

    def is_normalized(self, tol=ALGEBRA_TOL):
        return abs(self.norm() - 1.0) <= tol

    def normalized(self):
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Ket(self.dims, self.amps / n)

    def inner(self, other):
        """Return ``<self|other>``."""
        if self.dims != other.dims:
            raise DimensionError(f"dims differ: {self.dims} vs {other.dims}")
        return complex(np.vdot(self.amps, other.amps))

    def tensor(self):
        """Amplitudes reshaped to one axis per party."""
        return self.amps.reshape(self.dims)

    def __repr__(self):
        return f"Ket(dims={self.dims}, amps={np.round(self.amps, 6).tolist()})"


def ket(amps, dims=None):
    """Build a Ket; a flat vector defaults to a single party."""
    amps = np.asarray(amps, dtype=complex).reshape(-1)
    return Ket((amps.size,) if dims is None else dims, amps)


def basis_ket(d, index):
    amps = np.zeros(d, dtype=complex)
    amps[index] = 1.0
    return Ket((d,), amps)


def tensor(*kets):
    """Kronecker product of kets, concatenating their dims."""
    if not kets:
        raise ValueError("tensor needs at least one ket")
    dims = sum((k.dims for k in kets), ())
    amps = reduce(np.kron, (k.amps for k in kets))
    return Ket(dims, amps)


@dataclass(frozen=True)
class SchmidtForm:
    """``sum_l coeffs[l] |basis_a[l]> |basis_b[l]>`` with coeffs descending."""

    coeffs: np.ndarray
    basis_a: tuple
    basis_b: tuple

    @property
    def lambdas(self):
        """Reduced-density-matrix eigenvalues (squared coefficients)."""
        return self.coeffs**2

    def rank(self, tol=DECOMP_TOL):
        return int(np.count_nonzero(self.coeffs > tol))

    def reconstruct(self):
        amps = sum(c * np.kron(a.amps, b.amps) for c, a, b in zip(self.coeffs, self.basis_a, self.basis_b))
        dims = self.basis_a[0].dims + self.basis_b[0].dims
        return Ket(dims, amps)


def schmidt_decompose(psi):
    """Schmidt decomposition of a normalized bipartite ket via SVD.

    Raises
    ------
    DimensionError
        If ``psi`` does not have exactly two local dimensions.
    ValueError
        If ``psi`` is not normalized.
    """
    if psi.n_parties != 2:
        raise DimensionError(f"Schmidt decomposition needs a bipartite ket, got dims {psi.dims}")
    if not psi.is_normalized(DECOMP_TOL):
        raise ValueError(f"ket is not normalized (norm {psi.norm():.3e})")
    d_a, d_b = psi.dims
    u, s, vh = np.linalg.svd(psi.amps.reshape(d_a, d_b))
    k = min(d_a, d_b)
    basis_a = tuple(Ket((d_a,), u[:, l]) for l in range(k))
    basis_b = tuple(Ket((d_b,), vh[l, :]) for l in range(k))
    return SchmidtForm(np.asarray(s[:k], dtype=float), basis_a, basis_b)


def phase_distance(a, b):
    """``min_phi max|a - e^{i phi} b|`` for two amplitude vectors or kets.

    The optimal phase for the max-norm is not available in closed form, so
    the least-squares phase ``arg <b|a>`` is refined by a bounded scalar
    search around it.
    """
    a = getattr(a, "amps", a)
    b = getattr(b, "amps", b)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"shapes differ: {a.shape} vs {b.shape}")
    overlap = np.vdot(b, a)
    phi0 = np.angle(overlap) if abs(overlap) > 0 else 0.0

    def cost(phi):
        return np.max(np.abs(a - np.exp(1j * phi) * b))

    res = minimize_scalar(cost, bounds=(phi0 - 0.5, phi0 + 0.5), method="bounded",
                          options={"xatol": 1e-14})
    return float(min(cost(phi0), res.fun))


def equal_up_to_phase(a, b, tol=DECOMP_TOL):
    return phase_distance(a, b) <= tol


def _check_pair(psi0, psi1):
    if psi0.dims != psi1.dims:
        raise DimensionError(f"dims differ: {psi0.dims} vs {psi1.dims}")
    for name, psi in (("psi0", psi0), ("psi1", psi1)):
        if not psi.is_normalized(DECOMP_TOL):
            raise ValueError(f"{name} is not normalized (norm {psi.norm():.3e})")


def overlap_modulus(psi0, psi1):
    _check_pair(psi0, psi1)
    return min(abs(psi0.inner(psi1)), 1.0)


def min_error_prob(psi0, psi1):
    """Minimum error probability for two equiprobable pure states."""
    _check_pair(psi0, psi1)
    # sqrt(1 - o^2) as the norm of the component of psi0 orthogonal to psi1;
    # avoids the cancellation of 1 - o^2 near o = 1
    a, b = psi0.amps / psi0.norm(), psi1.amps / psi1.norm()
    sin = min(float(np.linalg.norm(a - np.vdot(b, a) * b)), 1.0)
    return 0.5 * (1.0 - sin)


def idp_success_prob(psi0, psi1):
    """Optimal unambiguous success probability for two equiprobable pure states."""
    return 1.0 - overlap_modulus(psi0, psi1)


def check_hermitian(m, tol=ALGEBRA_TOL):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
        raise ValueError("matrix is not hermitian within tolerance")
    return m


def is_psd(m, tol=ALGEBRA_TOL):
    """True iff the hermitian matrix ``m`` has no eigenvalue below ``-tol``."""
    m = check_hermitian(m, tol)
    return bool(np.linalg.eigvalsh(m).min() >= -tol)


def trace_det_positive(m, tol=ALGEBRA_TOL):
    """2x2 positivity via the trace and determinant conditions."""
    m = check_hermitian(m, tol)
    if m.shape != (2, 2):
        raise DimensionError("trace/determinant test only applies to 2x2 matrices")
    tr = float(np.real(np.trace(m)))
    det = float(np.real(np.linalg.det(m)))
    return tr >= -tol and det >= -tol * max(tol, abs(tr))


def embed_operator(op, dims, party):
    """``I x ... x op x ... x I`` with ``op`` acting on ``dims[party]``."""
    op = np.asarray(op, dtype=complex)
    if op.shape != (dims[party], dims[party]):
        raise DimensionError(f"operator shape {op.shape} does not match local dim {dims[party]}")
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[party] = op
    return reduce(np.kron, factors)


def apply_local(op, psi, party):
    """Apply a local operator to one party of ``psi`` without building the embedding."""
    op = np.asarray(op, dtype=complex)
    d = psi.dims[party]
    if op.shape != (d, d):
        raise DimensionError(f"operator shape {op.shape} does not match local dim {d}")
    t = np.tensordot(op, psi.tensor(), axes=([1], [party]))
    t = np.moveaxis(t, 0, party)
    return Ket(psi.dims, t.reshape(-1))


def psd_sqrt(m):
    """Hermitian square root of a PSD matrix (tiny negative eigenvalues clipped)."""
    m = check_hermitian(m, 1e-10)
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def projector(k):
    a = getattr(k, "amps", k)
    return np.outer(a, np.conj(a))
