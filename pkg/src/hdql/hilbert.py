"""Finite-dimensional complex inner-product arithmetic.

Vectors and operators are plain numpy arrays (complex128); subspaces are
stored as orthonormal bases. The inner product is conjugate-linear in the
first argument. All equality is tolerance-based, scaled by operand norms;
the single global default is ``DEFAULT_TOL``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, HdqlError

DEFAULT_TOL = 1e-9

__all__ = [
    "DEFAULT_TOL", "Subspace", "vector", "operator", "inner", "norm",
    "vec_eq", "zero_subspace", "full_space", "orthonormalize",
    "orthocomplement", "project", "projector", "member", "direct_sum",
    "intersect", "apply_measurement", "is_unitary", "tensor", "tensor_op",
    "basis_state", "ket", "H", "X", "Y", "Z", "CNOT", "identity",
    "random_state", "random_unitary", "random_subspace",
]


def vector(coords) -> np.ndarray:
    """Build a 1-d complex state vector, rejecting NaN/Inf entries."""
    v = np.atleast_1d(np.asarray(coords, dtype=complex))
    if v.ndim != 1 or v.size < 1:
        raise HdqlError(f"state vector must be 1-d and non-empty, got shape {v.shape}")
    if not np.all(np.isfinite(v.view(float))):
        raise HdqlError("state vector has non-finite entries")
    return v


def operator(entries) -> np.ndarray:
    """Build a square complex matrix, rejecting NaN/Inf entries."""
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise HdqlError(f"operator must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise HdqlError("operator has non-finite entries")
    return m


def _same_dim(v: np.ndarray, w: np.ndarray) -> None:
    if v.shape[0] != w.shape[0]:
        raise DimensionMismatch(f"dimension mismatch: {v.shape[0]} vs {w.shape[0]}")


def inner(v: np.ndarray, w: np.ndarray) -> complex:
    """Inner product, conjugate-linear in the first argument."""
    _same_dim(v, w)
    return complex(np.vdot(v, w))


def norm(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def vec_eq(v: np.ndarray, w: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """Tolerance equality: distance at most tol * max(1, |v|)."""
    _same_dim(v, w)
    return norm(v - w) <= tol * max(1.0, norm(v))


@dataclass(frozen=True, eq=False)
class Subspace:
    """A closed subspace, represented by an orthonormal basis.

    ``basis`` has shape (rank, dim); rows are pairwise orthonormal within
    the tolerance they were built with. The zero subspace has an empty
    basis (shape (0, dim)).
    """

    dim: int
    basis: np.ndarray

    @property
    def rank(self) -> int:
        return self.basis.shape[0]

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, rank={self.rank})"


def zero_subspace(dim: int) -> Subspace:
    return Subspace(dim, np.zeros((0, dim), dtype=complex))


def full_space(dim: int) -> Subspace:
    return Subspace(dim, np.eye(dim, dtype=complex))


def orthonormalize(vs, dim: int | None = None, tol: float = DEFAULT_TOL) -> Subspace:
    """Gram-Schmidt an arbitrary family into a Subspace spanning it.

    Vectors whose residual after projecting out the basis so far is at most
    tol * max(1, |v|) are dropped, so duplicates and near-dependent inputs
    collapse. An empty family yields the zero subspace (dim required then).
    """
    vs = [vector(v) for v in vs]
    if dim is None:
        if not vs:
            raise HdqlError("orthonormalize needs an explicit dim for an empty family")
        dim = vs[0].shape[0]
    rows: list[np.ndarray] = []
    for v in vs:
        if v.shape[0] != dim:
            raise DimensionMismatch(f"vector of dim {v.shape[0]} in space of dim {dim}")
        u = v.astype(complex)
        # two passes: re-orthogonalization keeps the basis orthonormal to ~eps
        for _ in range(2):
            for b in rows:
                u = u - np.vdot(b, u) * b
        r = np.linalg.norm(u)
        if r > tol * max(1.0, norm(v)):
            rows.append(u / r)
    if not rows:
        return zero_subspace(dim)
    return Subspace(dim, np.array(rows))


def orthocomplement(s: Subspace) -> Subspace:
    """All vectors orthogonal to s; rank is dim - rank(s)."""
    if s.rank == 0:
        return full_space(s.dim)
    if s.rank >= s.dim:
        return zero_subspace(s.dim)
    # w is orthogonal to every basis row b iff conj(basis) @ w == 0
    _, _, vh = np.linalg.svd(s.basis.conj(), full_matrices=True)
    return Subspace(s.dim, vh[s.rank:].conj())


def project(s: Subspace, v: np.ndarray) -> np.ndarray:
    """Orthogonal projection of v onto s."""
    v = vector(v)
    if v.shape[0] != s.dim:
        raise DimensionMismatch(f"vector of dim {v.shape[0]}, subspace of dim {s.dim}")
    if s.rank == 0:
        return np.zeros(s.dim, dtype=complex)
    return s.basis.T @ (s.basis.conj() @ v)


def projector(s: Subspace) -> np.ndarray:
    """The projection matrix onto s."""
    if s.rank == 0:
        return np.zeros((s.dim, s.dim), dtype=complex)
    return s.basis.T @ s.basis.conj()


def member(s: Subspace, v: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """True iff v lies in s within tol * max(1, |v|)."""
    return norm(project(s, v) - v) <= tol * max(1.0, norm(v))


def direct_sum(s1: Subspace, s2: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Smallest closed subspace containing both arguments."""
    if s1.dim != s2.dim:
        raise DimensionMismatch(f"subspace dims {s1.dim} vs {s2.dim}")
    return orthonormalize(list(s1.basis) + list(s2.basis), dim=s1.dim, tol=tol)


def intersect(s1: Subspace, s2: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Intersection, via complement(complement(s1) + complement(s2))."""
    if s1.dim != s2.dim:
        raise DimensionMismatch(f"subspace dims {s1.dim} vs {s2.dim}")
    return orthocomplement(direct_sum(orthocomplement(s1), orthocomplement(s2), tol=tol))


def apply_measurement(s: Subspace, w: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Projective measurement onto s: project, then renormalize.

    Inputs (numerically) orthogonal to s map to the origin vector, which
    keeps the operation total.
    """
    p = project(s, w)
    if norm(p) <= tol * max(1.0, norm(w)):
        return np.zeros(s.dim, dtype=complex)
    return p / np.sqrt(max(np.vdot(w, p).real, 0.0))


def is_unitary(u: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """True iff u†u and uu† are both the identity within tol (max-norm)."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    eye = np.eye(u.shape[0])
    return (np.max(np.abs(u.conj().T @ u - eye)) <= tol
            and np.max(np.abs(u @ u.conj().T - eye)) <= tol)


def unitarity_residual(u: np.ndarray) -> float:
    """Max-norm distance of u†u and uu† from the identity."""
    u = np.asarray(u, dtype=complex)
    eye = np.eye(u.shape[0])
    return float(max(np.max(np.abs(u.conj().T @ u - eye)),
                     np.max(np.abs(u @ u.conj().T - eye))))


def tensor(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Kronecker product of states, first factor most significant."""
    return np.kron(v, w)


def tensor_op(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of operators, first factor most significant."""
    return np.kron(a, b)


def basis_state(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def ket(bits: str) -> np.ndarray:
    """Computational basis state |bits> in big-endian qubit order."""
    return basis_state(2 ** len(bits), int(bits, 2))


_S2 = 1.0 / np.sqrt(2.0)
H = np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
CNOT = np.array([[1, 0, 0, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1],
                 [0, 0, 1, 0]], dtype=complex)


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary via QR with phase correction."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_subspace(dim: int, rng: np.random.Generator,
                    rank: int | None = None) -> Subspace:
    if rank is None:
        rank = int(rng.integers(0, dim + 1))
    if rank == 0:
        return zero_subspace(dim)
    u = random_unitary(dim, rng)
    return Subspace(dim, u[:rank].copy())
