"""Collective-attack model on two EPR pairs.

The adversary distributes, per position, a 16-dimensional state across the two
channel uses (qubit ordering A1, B1, A2, B2). After twirling with paired Pauli
operators the state is diagonal in the Bell product basis; the 16 diagonal
coefficients lam[a1, b1, a2, b2] fully describe it. This module constructs
that diagonal form, solves the channel-monitoring constraints, and builds the
adversary's exact conditional states for every measurement outcome.

The adversary's purification basis |e^{a1 b1}_{a2 b2}> is fixed to the 16-dim
computational basis under big-endian index ordering (a1, b1, a2, b2).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import qmath

BITS = (0, 1)
DIAGONAL_TOL = 1e-12


def _bell_product_basis() -> np.ndarray:
    """16x16 unitary whose columns are |Phi_a1b1> ⊗ |Phi_a2b2| (big-endian)."""
    cols = []
    for a1, b1, a2, b2 in itertools.product(BITS, repeat=4):
        cols.append(np.kron(qmath.bell_state(a1, b1), qmath.bell_state(a2, b2)))
    return np.array(cols).T


_BELL_BASIS = _bell_product_basis()


@dataclass(frozen=True)
class BellDiagonalState:
    """Twirled two-pair state: 16 nonnegative coefficients summing to 1.

    coeffs has shape (2, 2, 2, 2), indexed [a1, b1, a2, b2].
    """

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=float)
        if arr.shape != (2, 2, 2, 2):
            raise ValueError(f"coeffs must have shape (2,2,2,2), got {arr.shape}")
        if arr.min() < -1e-12:
            raise ValueError("negative Bell-diagonal coefficient")
        if abs(arr.sum() - 1.0) > 1e-12:
            raise ValueError(f"coefficients sum to {arr.sum()}, expected 1")
        object.__setattr__(self, "coeffs", np.clip(arr, 0.0, None))

    @classmethod
    def from_vector(cls, vec) -> "BellDiagonalState":
        return cls(np.asarray(vec, dtype=float).reshape(2, 2, 2, 2))

    @classmethod
    def uniform(cls) -> "BellDiagonalState":
        return cls(np.full((2, 2, 2, 2), 1.0 / 16.0))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "BellDiagonalState":
        raw = rng.random(16)
        return cls.from_vector(raw / raw.sum())

    def as_vector(self) -> np.ndarray:
        return self.coeffs.reshape(16).copy()

    def as_matrix(self) -> np.ndarray:
        """The 16x16 density matrix in the computational basis."""
        return (_BELL_BASIS * self.as_vector()) @ _BELL_BASIS.conj().T


def symmetrize(rho: np.ndarray) -> BellDiagonalState:
    """Average a 16-dim state over the sixteen paired-Pauli twirls.

    The twirl operators are sigma_a ⊗ sigma_a ⊗ sigma_c ⊗ sigma_c; the result
    is diagonal in the Bell product basis and its diagonal is returned.
    """
    rho = qmath.density_matrix(rho)
    if rho.shape != (16, 16):
        raise ValueError(f"expected a 16-dim state, got shape {rho.shape}")
    acc = np.zeros_like(rho)
    for a, c in itertools.product(range(4), repeat=2):
        op = np.kron(np.kron(qmath.pauli(a), qmath.pauli(a)),
                     np.kron(qmath.pauli(c), qmath.pauli(c)))
        acc += op @ rho @ op.conj().T
    acc /= 16.0
    in_bell = _BELL_BASIS.conj().T @ acc @ _BELL_BASIS
    off = in_bell - np.diag(np.diag(in_bell))
    if np.max(np.abs(off)) > DIAGONAL_TOL:
        raise ValueError("twirled state is not Bell-diagonal within tolerance")
    return BellDiagonalState.from_vector(in_bell.diagonal().real)


def bell_diagonal_of(rho: np.ndarray) -> np.ndarray:
    """Diagonal of a 16-dim state in the Bell product basis (twirl oracle)."""
    rho = np.asarray(rho, dtype=complex)
    return np.einsum("ij,jk,ki->i", _BELL_BASIS.conj().T, rho,
                     _BELL_BASIS).real


@dataclass(frozen=True)
class NoiseParams:
    """Bit-error probabilities of the two channel uses."""

    beta: float
    gamma: float

    def __post_init__(self):
        for name, p in (("beta", self.beta), ("gamma", self.gamma)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability, got {p}")


@dataclass(frozen=True)
class ErrorRates:
    """Per-basis error rates: r1(b), r2(b'), and the joint rate s(b, b')."""

    r1: np.ndarray  # shape (3,)
    r2: np.ndarray  # shape (3,)
    s: np.ndarray   # shape (3, 3)


def _error_projector(basis: int) -> np.ndarray:
    """4-dim projector onto the error subspace of one monitored pair.

    An error event in basis b is: the two outcomes differ, except in the
    y basis where |Phi00> anti-correlates and equal outcomes signal the error.
    """
    flip = 1 if basis == 2 else 0
    proj = np.zeros((4, 4), dtype=complex)
    for x in BITS:
        vec = np.kron(qmath.basis_state(x, basis),
                      qmath.basis_state(x ^ 1 ^ flip, basis))
        proj += qmath.projector(vec)
    return proj


def error_rates(state: BellDiagonalState) -> ErrorRates:
    """Monitoring statistics of the state, computed from the basis projectors."""
    rho = state.as_matrix()
    pair1 = qmath.partial_trace(rho, [2, 2, 2, 2], keep=[0, 1])
    pair2 = qmath.partial_trace(rho, [2, 2, 2, 2], keep=[2, 3])
    r1 = np.array([np.trace(_error_projector(b) @ pair1).real for b in range(3)])
    r2 = np.array([np.trace(_error_projector(b) @ pair2).real for b in range(3)])
    s = np.zeros((3, 3))
    for b, bp in itertools.product(range(3), repeat=2):
        joint = np.kron(_error_projector(b), _error_projector(bp))
        s[b, bp] = np.trace(joint @ rho).real
    return ErrorRates(r1=r1, r2=r2, s=s)


def pair_marginal_coeffs(beta: float) -> np.ndarray:
    """Single-pair Bell coefficients fixed by uniform per-basis error rate beta.

    c[a, b] = beta/2 + (1 - 2 beta) for (a, b) = (0, 0), else beta/2.
    """
    if not 0.0 <= beta <= 2.0 / 3.0:
        raise ValueError(f"beta must be in [0, 2/3], got {beta}")
    c = np.full((2, 2), beta / 2.0)
    c[0, 0] += 1.0 - 2.0 * beta
    return c


def solve_check_a(beta: float) -> np.ndarray:
    """Channel-1 marginal coefficients compatible with a passed CheckA."""
    return pair_marginal_coeffs(beta)


def solve_check_b(noise: NoiseParams) -> BellDiagonalState:
    """The unique Bell-diagonal state compatible with a passed CheckB.

    Factorizes into the product of two single-pair states with error
    parameters beta and gamma.
    """
    if not 0.0 <= noise.beta <= 2.0 / 3.0 or not 0.0 <= noise.gamma <= 2.0 / 3.0:
        raise ValueError("beta, gamma must be in [0, 2/3]")
    c1 = pair_marginal_coeffs(noise.beta)
    c2 = pair_marginal_coeffs(noise.gamma)
    return BellDiagonalState(np.einsum("ij,kl->ijkl", c1, c2))


def eve_conditional_state(state: BellDiagonalState, b: int, x: int, y: int,
                          a: int, t: int) -> np.ndarray:
    """Adversary's sub-normalized pure state given all measurement outcomes.

    b is the payload basis bit (0 = z, 1 = x); x, y are the two receiver
    outcomes; (a, t) encode the sender's Bell outcome. The squared norm equals
    outcome_probability(state, b, x, y, a, t). Real-valued by construction.
    """
    for name, bit in (("b", b), ("x", x), ("y", y), ("a", a), ("t", t)):
        if bit not in BITS:
            raise ValueError(f"{name} must be a bit, got {bit!r}")
    lam = state.coeffs
    vec = np.zeros(16)
    for a1, b1, a2, b2 in itertools.product(BITS, repeat=4):
        if b == 0:
            if (x ^ y ^ t) != (a1 ^ a2):
                continue
            amp = (-1.0) ** ((b1 + b2 + a + t) * (a1 + x))
        else:
            if (b1 ^ b2) != (x ^ y ^ a ^ t):
                continue
            amp = (-1.0) ** (x * a1 + y * (t + a2))
        amp *= (-1.0) ** (b2 * t)
        vec[8 * a1 + 4 * b1 + 2 * a2 + b2] = amp * np.sqrt(lam[a1, b1, a2, b2])
    return vec / (2.0 * np.sqrt(2.0))


def outcome_probability(state: BellDiagonalState, b: int, x: int, y: int,
                        a: int, t: int) -> float:
    """P(x, y, a, t | b): probability of one joint measurement outcome.

    Marginalising over y always gives exactly 1/8 regardless of the state.
    """
    lam = state.coeffs
    if b == 0:
        shift = x ^ y ^ t
        total = sum(lam[a1, b1, a1 ^ shift, b2]
                    for a1, b1, b2 in itertools.product(BITS, repeat=3))
    else:
        shift = x ^ y ^ a ^ t
        total = sum(lam[a1, b1, a2, b1 ^ shift]
                    for a1, b1, a2 in itertools.product(BITS, repeat=3))
    return float(total) / 8.0


def eve_avg_y_state(state: BellDiagonalState, b: int, x: int, a: int,
                    t: int) -> np.ndarray:
    """Adversary's state averaged over the unknown second outcome y.

    Equals 8 * sum_y |psi_bar><psi_bar|; for an accept-compatible state its
    eigenvalues are {beta*gamma-combined rate, its complement, fourteen zeros}.
    """
    acc = np.zeros((16, 16))
    for y in BITS:
        vec = eve_conditional_state(state, b, x, y, a, t)
        acc += np.outer(vec, vec)
    return (8.0 * acc).astype(complex)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues lambdas[u, v] and orthonormal eigenvectors vectors[u, v]."""

    lambdas: np.ndarray   # shape (2, 2)
    vectors: np.ndarray   # shape (2, 2, 16)

    def reconstruct(self) -> np.ndarray:
        acc = np.zeros((16, 16))
        for u, v in itertools.product(BITS, repeat=2):
            acc += self.lambdas[u, v] * np.outer(self.vectors[u, v],
                                                 self.vectors[u, v])
        return acc.astype(complex)


def lambda_capital(state: BellDiagonalState) -> np.ndarray:
    """Eigenvalue grid L[u, v] = sum_{k,l} lam[k, l, k^u, l^v]."""
    lam = state.coeffs
    out = np.zeros((2, 2))
    for u, v in itertools.product(BITS, repeat=2):
        out[u, v] = sum(lam[k, l, k ^ u, l ^ v]
                        for k, l in itertools.product(BITS, repeat=2))
    return out


def eve_avg_xy_state(state: BellDiagonalState, b: int, a: int,
                     t: int) -> SpectralDecomposition:
    """Spectral decomposition of the adversary's state averaged over (x, y).

    Rank at most 4; eigenvectors carry the (a, t)-dependent sign pattern and
    do not depend on b. Zero-eigenvalue slots get zero vectors.
    """
    lam = state.coeffs
    lambdas = lambda_capital(state)
    vectors = np.zeros((2, 2, 16))
    for u, v in itertools.product(BITS, repeat=2):
        vec = np.zeros(16)
        for k, l in itertools.product(BITS, repeat=2):
            sign = (-1.0) ** ((a + v) * (1 - k) + t * (k + l))
            vec[8 * k + 4 * l + 2 * (k ^ u) + (l ^ v)] = \
                sign * np.sqrt(lam[k, l, k ^ u, l ^ v])
        if lambdas[u, v] > 1e-14:
            vectors[u, v] = vec / np.sqrt(lambdas[u, v])
    return SpectralDecomposition(lambdas=lambdas, vectors=vectors)


# ---------------------------------------------------------------------------
# Reference constructions used by the verification suite
# ---------------------------------------------------------------------------

def purified_joint_state(state: BellDiagonalState) -> np.ndarray:
    """The 256-dim pure state shared by the parties and the adversary.

    sum sqrt(lam) |Phi_a1b1>|Phi_a2b2>|e^{a1b1}_{a2b2}>, laid out as the
    16-dim (A1,B1,A2,B2) system tensored with the 16-dim purification space.
    """
    lam = state.as_vector()
    psi = np.zeros((16, 16), dtype=complex)
    for idx in range(16):
        psi[:, idx] = np.sqrt(lam[idx]) * _BELL_BASIS[:, idx]
    return psi.reshape(256)


def measurement_vector(b: int, x: int, y: int, a: int, t: int) -> np.ndarray:
    """POVM vector |phi^b_xyat> combining both parties' measurements.

    (1/sqrt 2) sum_p |p>_{A1} |psi^b_x>_{B1} (sx^t sz^{a^t}|p>)_{A2}
    |psi^b_y>_{B2}; the sixteen vectors at fixed b form an orthonormal basis.
    """
    flip_op = np.linalg.matrix_power(qmath.pauli(1), t) @ \
        np.linalg.matrix_power(qmath.pauli(3), a ^ t)
    acc = np.zeros(16, dtype=complex)
    for p in BITS:
        ket_p = qmath.basis_state(p, 0)
        vec = np.kron(np.kron(ket_p, qmath.basis_state(x, b)),
                      np.kron(flip_op @ ket_p, qmath.basis_state(y, b)))
        acc += vec
    return acc / np.sqrt(2.0)


def eve_conditional_state_oracle(state: BellDiagonalState, b: int, x: int,
                                 y: int, a: int, t: int) -> np.ndarray:
    """Contraction <phi^b_xyat | psi^{ABE}>: independent route to the closed form."""
    psi = purified_joint_state(state).reshape(16, 16)
    phi = measurement_vector(b, x, y, a, t)
    return phi.conj() @ psi
