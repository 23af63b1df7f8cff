"""Dense complex linear algebra and quantum-state primitives.

Everything operates on plain ``numpy`` arrays: state vectors are 1-d complex
arrays, density matrices and operators are 2-d complex arrays.  All functions
are pure; validated inputs are never mutated.

Conventions
-----------
* Composite (tensor-product) indices are row-major: the first factor is the
  most significant index, matching ``numpy.kron``.
* Hermiticity / unitarity / trace checks use an absolute elementwise
  tolerance of 1e-9, far below any simulated physical effect and far above
  double-precision noise.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

ATOL = 1e-9
EIGENVALUE_FLOOR = -1e-9
EMPTY_SUBSPACE_TOL = 1e-12


def basis_state(dim: int, index: int) -> np.ndarray:
    """Computational basis ket |index> in a ``dim``-dimensional space."""
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for dim {dim}")
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi


def normalized(psi: Sequence[complex]) -> np.ndarray:
    """Return a unit-norm copy of ``psi``."""
    vec = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return vec / norm


def density(psi: Sequence[complex]) -> np.ndarray:
    """Outer product |psi><psi| as a density matrix."""
    vec = np.asarray(psi, dtype=complex)
    return np.outer(vec, vec.conj())


def as_state_vector(psi: Sequence[complex], atol: float = ATOL) -> np.ndarray:
    """Validate and return ``psi`` as a complex array.

    Raises ``ValueError`` if the Euclidean norm deviates from 1 by more
    than ``atol``.
    """
    vec = np.asarray(psi, dtype=complex)
    if vec.ndim != 1:
        raise ValueError(f"state vector must be 1-d, got shape {vec.shape}")
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"state vector norm {norm!r} deviates from 1")
    return vec


def as_density_matrix(rho: Sequence[Sequence[complex]], atol: float = ATOL) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity of ``rho``.

    Eigenvalues may dip to ``EIGENVALUE_FLOOR`` to absorb round-off from
    numerical propagation.
    """
    mat = np.asarray(rho, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {mat.shape}")
    if not is_hermitian(mat, atol):
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(mat).real
    if abs(tr - 1.0) > atol:
        raise ValueError(f"density matrix trace {tr!r} deviates from 1")
    evals = np.linalg.eigvalsh(mat)
    if evals.min() < EIGENVALUE_FLOOR:
        raise ValueError(f"density matrix has negative eigenvalue {evals.min()!r}")
    return mat


def is_hermitian(mat: np.ndarray, atol: float = ATOL) -> bool:
    return bool(np.max(np.abs(mat - mat.conj().T)) <= atol)


def is_unitary(mat: np.ndarray, atol: float = ATOL) -> bool:
    eye = np.eye(mat.shape[0])
    return bool(np.max(np.abs(mat.conj().T @ mat - eye)) <= atol)


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of states or operators, first factor most significant."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def hermitian_propagator(h: np.ndarray, dt: float) -> np.ndarray:
    """Exact step propagator exp(-i H dt) of a Hermitian generator.

    Computed by eigendecomposition, which is exact to machine precision at
    the small dimensions used here.  Raises ``ValueError`` for non-Hermitian
    input.
    """
    mat = np.asarray(h, dtype=complex)
    if not is_hermitian(mat):
        raise ValueError("Hamiltonian must be Hermitian within 1e-9")
    w, v = np.linalg.eigh(mat)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def unattenuated_fidelity(rho_th: np.ndarray, rho_out: np.ndarray) -> float:
    """Normalized state overlap Tr(a b) / sqrt(Tr(a a) Tr(b b)).

    Equals 1 when the two states coincide and is symmetric in its arguments.
    """
    a = np.asarray(rho_th, dtype=complex)
    b = np.asarray(rho_out, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    overlap = np.trace(a @ b).real
    norm = np.sqrt(np.trace(a @ a).real * np.trace(b @ b).real)
    return float(overlap / norm)


def average_gate_fidelity(u_ideal: np.ndarray, u_actual: np.ndarray) -> float:
    """Average gate fidelity (|Tr(U' V)|^2 + d) / (d (d + 1)) of two unitaries.

    Invariant under a global phase of either argument.
    """
    a = np.asarray(u_ideal, dtype=complex)
    b = np.asarray(u_actual, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a.shape[0]
    tr = np.trace(a.conj().T @ b)
    return float((abs(tr) ** 2 + d) / (d * (d + 1)))


def bloch_coordinates(
    rho: np.ndarray, subspace: tuple[int, int] = (0, 1)
) -> tuple[float, float, float, float]:
    """Bloch vector of ``rho`` restricted to a 2-dim subspace.

    The subspace block is renormalized by its population, so leakage outside
    the subspace shows up only through the returned population.

    Returns ``(x, y, z, population)`` with x = 2 Re rho01, y = 2 Im rho10,
    z = rho00 - rho11 on the renormalized block.  Raises ``ValueError``
    when the subspace population is below 1e-12.
    """
    mat = np.asarray(rho, dtype=complex)
    i, j = subspace
    population = float(mat[i, i].real + mat[j, j].real)
    if population < EMPTY_SUBSPACE_TOL:
        raise ValueError("subspace population is numerically zero")
    r00 = mat[i, i].real / population
    r11 = mat[j, j].real / population
    r01 = mat[i, j] / population
    r10 = mat[j, i] / population
    return (2.0 * r01.real, 2.0 * r10.imag, r00 - r11, population)


def partial_trace(rho: np.ndarray, keep: int, dims: Sequence[int]) -> np.ndarray:
    """Trace out every tensor factor of ``rho`` except the one at ``keep``."""
    dims = tuple(int(d) for d in dims)
    mat = np.asarray(rho, dtype=complex)
    total = int(np.prod(dims))
    if mat.shape != (total, total):
        raise ValueError(f"factor dims {dims} inconsistent with shape {mat.shape}")
    if not 0 <= keep < len(dims):
        raise ValueError(f"keep index {keep} out of range")
    n = len(dims)
    tensor = mat.reshape(dims + dims)
    # Trace factors from the back so earlier axis numbers stay valid.
    remaining = n
    for factor in reversed(range(n)):
        if factor == keep:
            continue
        tensor = np.trace(tensor, axis1=factor, axis2=factor + remaining)
        remaining -= 1
    return tensor
