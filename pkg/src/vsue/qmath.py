"""Dense complex linear algebra and quantum-state toolbox for dimensions up to 64.

Everything here operates on plain numpy arrays: a pure state is a 1-D complex
vector, a density matrix is a 2-D complex Hermitian PSD array with unit trace
(or a stated sub-normalized mass). Constructor helpers validate the invariants
once; all operations are pure functions and never mutate their inputs.

Logarithms are base 2 throughout, so entropies are in bits.
"""

from __future__ import annotations

import numpy as np

# Validation tolerances for constructed states.
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10

# Kronecker products are refused beyond this dimension; the protocol's proof
# objects live in dimension <= 16, oracles go up to 16*16 = 256 transiently
# but never through `tensor`.
MAX_TENSOR_DIM = 64

_PAULI = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli(index: int) -> np.ndarray:
    """Return the 2x2 Pauli matrix: 0 -> identity, 1 -> x, 2 -> y, 3 -> z."""
    if index not in (0, 1, 2, 3):
        raise ValueError(f"Pauli index must be in 0..3, got {index!r}")
    return _PAULI[index].copy()


def basis_state(bit: int, basis: int) -> np.ndarray:
    """Single-qubit state with classical `bit` encoded in `basis` (0=z, 1=x, 2=y)."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    if basis not in (0, 1, 2):
        raise ValueError(f"basis must be in {{0,1,2}}, got {basis!r}")
    if basis == 0:
        vec = np.array([1.0 - bit, float(bit)], dtype=complex)
    elif basis == 1:
        vec = np.array([1.0, -1.0 if bit else 1.0], dtype=complex) / np.sqrt(2.0)
    else:
        vec = np.array([1.0, -1.0j if bit else 1.0j], dtype=complex) / np.sqrt(2.0)
    return vec


def bell_state(u: int, v: int) -> np.ndarray:
    """Two-qubit Bell state (1 ⊗ σx^u σz^v)|Φ00>, |Φ00> = (|00>+|11>)/√2."""
    if u not in (0, 1) or v not in (0, 1):
        raise ValueError(f"Bell labels must be bits, got ({u!r}, {v!r})")
    vec = np.zeros(4, dtype=complex)
    # (|0,u> + (-1)^v |1,1-u>) / sqrt(2)
    vec[0 * 2 + u] = 1.0
    vec[1 * 2 + (1 - u)] = -1.0 if v else 1.0
    return vec / np.sqrt(2.0)


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two vectors or two matrices of the same kind."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != b.ndim or a.ndim not in (1, 2):
        raise ValueError("tensor expects two vectors or two square matrices")
    out_dim = a.shape[0] * b.shape[0]
    if out_dim > MAX_TENSOR_DIM:
        raise ValueError(
            f"tensor result dimension {out_dim} exceeds maximum {MAX_TENSOR_DIM}")
    return np.kron(a, b)


def projector(psi: np.ndarray) -> np.ndarray:
    """|psi><psi| for a state vector (not necessarily normalized)."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def density_matrix(mat: np.ndarray, mass: float = 1.0) -> np.ndarray:
    """Validate and return `mat` as a density matrix of trace `mass`.

    Raises ValueError when Hermiticity, trace or positivity is violated
    beyond the module tolerances.
    """
    rho = np.asarray(mat, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_TOL:
        raise ValueError("matrix is not Hermitian within tolerance")
    tr = rho.trace().real
    if abs(tr - mass) > TRACE_TOL * max(1.0, abs(mass)):
        raise ValueError(f"trace {tr} differs from expected mass {mass}")
    if np.linalg.eigvalsh(rho).min() < EIGENVALUE_FLOOR:
        raise ValueError("matrix has an eigenvalue below the PSD floor")
    return rho


def pure_state(vec: np.ndarray, normalized: bool = True) -> np.ndarray:
    """Validate a state vector; with normalized=True enforce unit norm."""
    psi = np.asarray(vec, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("pure state must be a 1-D amplitude vector")
    if normalized and abs(np.vdot(psi, psi).real - 1.0) > TRACE_TOL:
        raise ValueError("state vector is not normalized within tolerance")
    return psi


def partial_trace(rho: np.ndarray, dims: list[int], keep) -> np.ndarray:
    """Reduced density matrix on the subsystems in `keep` (kept in index order).

    `dims` lists the subsystem dimensions whose product must equal the full
    dimension; `keep` is a nonempty collection of subsystem indices.
    """
    rho = np.asarray(rho, dtype=complex)
    dims = list(dims)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ValueError(f"dims {dims} do not match matrix shape {rho.shape}")
    keep = sorted(set(keep))
    if not keep or any(i < 0 or i >= len(dims) for i in keep):
        raise ValueError(f"keep set {keep!r} invalid for {len(dims)} subsystems")
    traced = [i for i in range(len(dims)) if i not in keep]
    reshaped = rho.reshape(dims + dims)
    remaining = list(dims)
    for idx in sorted(traced, reverse=True):
        reshaped = np.trace(reshaped, axis1=idx, axis2=idx + len(remaining))
        del remaining[idx]
    out = int(np.prod(remaining))
    return reshaped.reshape(out, out)


def eig_hermitian(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending, real) and orthonormal eigenvector columns."""
    m = np.asarray(mat, dtype=complex)
    if np.max(np.abs(m - m.conj().T)) > 1e-10:
        raise ValueError("eig_hermitian requires a Hermitian matrix")
    vals, vecs = np.linalg.eigh(m)
    order = np.argsort(vals)[::-1]
    return vals[order].real, vecs[:, order]


def _clamped_spectrum(rho: np.ndarray) -> np.ndarray:
    vals = np.linalg.eigvalsh(np.asarray(rho, dtype=complex)).real
    if vals.min() < EIGENVALUE_FLOOR:
        raise ValueError("eigenvalue below PSD floor; not a density matrix")
    return np.clip(vals, 0.0, None)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S(rho) = -sum_i lambda_i log2 lambda_i, with 0 log 0 := 0."""
    vals = _clamped_spectrum(rho)
    nz = vals[vals > 0.0]
    return float(-(nz * np.log2(nz)).sum())


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """(1/2) * sum |eig(a - b)| — the trace norm of the difference."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    vals = np.linalg.eigvalsh(a - b).real
    return float(0.5 * np.abs(vals).sum())
