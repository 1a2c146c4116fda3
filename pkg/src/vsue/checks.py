"""Numerical verification battery for the attack-model constructions.

Each check re-derives one guaranteed property of the conditional-state
machinery through an independent route (direct basis extraction, generic
linear solvers, explicit purification contraction, matrix eigendecomposition)
and compares against the closed forms at a fixed tolerance. The battery backs
the `verify-lemmas` CLI subcommand and the acceptance test suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import attack, qmath, security

BITS = (0, 1)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    max_err: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        out = (f"{status}  {self.name}: max_err={self.max_err:.3e} "
               f"tol={self.tolerance:.0e}")
        return out + (f"  [{self.detail}]" if self.detail else "")


def _random_states(count: int, rng: np.random.Generator):
    return [attack.BellDiagonalState.random(rng) for _ in range(count)]


def _random_density(rng: np.random.Generator, dim: int = 16) -> np.ndarray:
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = raw @ raw.conj().T
    return rho / rho.trace().real


def check_twirl_diagonality(rng, states: int = 50,
                            fault: float = 0.0) -> CheckResult:
    """Twirling leaves exactly the Bell-product diagonal of a random state."""
    tol = 1e-12
    worst = 0.0
    for _ in range(states):
        rho = _random_density(rng)
        if fault:
            rho = rho + fault * np.eye(16) / 16.0  # breaks the unit trace
        twirled = attack.symmetrize(rho)  # raises if off-diagonal mass remains
        direct = attack.bell_diagonal_of(rho)
        worst = max(worst, float(np.max(np.abs(twirled.as_vector() - direct))))
    return CheckResult("twirl_diagonality", worst <= tol, worst, tol,
                       f"{states} random 16-dim states")


def check_marginal_constraint_solution(rng, betas=None) -> CheckResult:
    """Closed-form single-channel marginals vs a generic linear solve.

    The three per-basis rate constraints plus normalization form a 4x4 linear
    system in the pair coefficients c[a, b]; its unique solution must equal
    the closed form.
    """
    tol = 1e-10
    betas = betas if betas is not None else np.arange(0.02, 0.21, 0.02)
    # rows: error sets of bases z, x, y, then normalization; unknown order
    # (a,b) = 00, 01, 10, 11
    system = np.array([
        [0.0, 0.0, 1.0, 1.0],   # z-basis errors: a = 1
        [0.0, 1.0, 0.0, 1.0],   # x-basis errors: b = 1
        [0.0, 1.0, 1.0, 0.0],   # y-basis errors: a != b
        [1.0, 1.0, 1.0, 1.0],
    ])
    worst = 0.0
    for beta in betas:
        numeric, *_ = np.linalg.lstsq(system,
                                      np.array([beta, beta, beta, 1.0]),
                                      rcond=None)
        closed = attack.solve_check_a(float(beta)).reshape(4)
        worst = max(worst, float(np.max(np.abs(numeric - closed))))
    return CheckResult("marginal_constraint_solution", worst <= tol, worst, tol,
                       f"{len(betas)} beta values vs 4x4 solver")


def check_joint_constraint_solution(rng, pairs: int = 8) -> CheckResult:
    """Closed-form accept state vs least squares on all sixteen constraints.

    Builds the full constraint matrix (three per-basis clauses per channel,
    nine joint clauses, normalization) acting on the 16 coefficients and
    solves it numerically.
    """
    tol = 1e-10
    rows = []

    def err_mask1(b):
        mask = np.zeros((2, 2))
        for a1, b1 in itertools.product(BITS, repeat=2):
            err = a1 if b == 0 else (b1 if b == 1 else a1 ^ b1)
            mask[a1, b1] = float(err)
        return mask

    masks = [err_mask1(b) for b in range(3)]
    ones = np.ones((2, 2))
    for b in range(3):
        rows.append(("r1", b, np.einsum("ij,kl->ijkl", masks[b], ones)))
        rows.append(("r2", b, np.einsum("ij,kl->ijkl", ones, masks[b])))
    for b, bp in itertools.product(range(3), repeat=2):
        rows.append(("s", (b, bp),
                     np.einsum("ij,kl->ijkl", masks[b], masks[bp])))
    rows.append(("norm", None, np.ones((2, 2, 2, 2))))

    worst = 0.0
    for _ in range(pairs):
        beta = float(rng.uniform(0.01, 0.2))
        gamma = float(rng.uniform(0.01, 0.2))
        mat = np.array([r[2].reshape(16) for r in rows])
        rhs = np.array([{"r1": beta, "r2": gamma, "s": beta * gamma,
                         "norm": 1.0}[kind] for kind, _, _ in rows])
        numeric, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
        closed = attack.solve_check_b(attack.NoiseParams(beta, gamma))
        worst = max(worst, float(np.max(np.abs(numeric - closed.as_vector()))))
    return CheckResult("joint_constraint_solution", worst <= tol, worst, tol,
                       f"{pairs} random (beta, gamma) vs 16x16 least squares")


def check_conditional_state_contraction(rng, states: int = 50) -> CheckResult:
    """Closed-form conditional states vs the 256-dim purification contraction."""
    tol = 1e-10
    worst = 0.0
    for _ in range(states):
        st = attack.BellDiagonalState.random(rng)
        for b, x, y, a, t in itertools.product(BITS, repeat=5):
            closed = attack.eve_conditional_state(st, b, x, y, a, t)
            oracle = attack.eve_conditional_state_oracle(st, b, x, y, a, t)
            worst = max(worst, float(np.max(np.abs(closed - oracle))))
            norm_err = abs(np.vdot(closed, closed).real
                           - attack.outcome_probability(st, b, x, y, a, t))
            worst = max(worst, float(norm_err))
    return CheckResult("conditional_state_contraction", worst <= tol, worst,
                       tol, f"{states} random states, all 32 outcome tuples")


def check_conditional_state_orthogonality(rng, states: int = 50) -> CheckResult:
    """Single flips of x, y or t (and the triple flip) give orthogonal states;
    a generic even flip pair does not."""
    tol = 1e-10
    worst = 0.0
    generic_best = 0.0
    for _ in range(states):
        st = attack.BellDiagonalState.random(rng)
        for b, x, y, a, t in itertools.product(BITS, repeat=5):
            base = attack.eve_conditional_state(st, b, x, y, a, t)
            flips = [(1 - x, y, t), (x, 1 - y, t), (x, y, 1 - t),
                     (1 - x, 1 - y, 1 - t)]
            for fx, fy, ft in flips:
                other = attack.eve_conditional_state(st, b, fx, fy, a, ft)
                worst = max(worst, abs(float(np.dot(base, other))))
            even = attack.eve_conditional_state(st, b, 1 - x, 1 - y, a, t)
            generic_best = max(generic_best, abs(float(np.dot(base, even))))
    passed = worst <= tol and generic_best > 1e-6
    return CheckResult("conditional_state_orthogonality", passed, worst, tol,
                       f"generic even-flip overlap reaches {generic_best:.2e}")


def check_conditional_average_diagonal(rng, states: int = 20) -> CheckResult:
    """Averaging the conditional states over all outcomes returns diag(lam)."""
    tol = 1e-10
    worst = 0.0
    for _ in range(states):
        st = attack.BellDiagonalState.random(rng)
        for b in BITS:
            acc = np.zeros((16, 16))
            for x, y, a, t in itertools.product(BITS, repeat=4):
                vec = attack.eve_conditional_state(st, b, x, y, a, t)
                acc += np.outer(vec, vec)
            worst = max(worst, float(np.max(np.abs(acc - np.diag(st.as_vector())))))
    return CheckResult("conditional_average_diagonal", worst <= tol, worst, tol)


def check_averaged_y_spectrum(rng, pairs: int = 10) -> CheckResult:
    """Averaged-over-y states of accept sources have the two-point spectrum
    {combined rate, 1 - combined rate}, independent of the outcome tuple."""
    tol = 1e-10
    worst = 0.0
    for _ in range(pairs):
        beta = float(rng.uniform(0.0, 0.12))
        gamma = float(rng.uniform(0.0, 0.12))
        st = attack.solve_check_b(attack.NoiseParams(beta, gamma))
        sg = security.star(beta, gamma)
        want = np.zeros(16)
        want[-2:] = sorted([sg, 1.0 - sg])
        for b, x, a, t in itertools.product(BITS, repeat=4):
            vals = np.sort(np.linalg.eigvalsh(
                attack.eve_avg_y_state(st, b, x, a, t)).real)
            worst = max(worst, float(np.max(np.abs(vals - want))))
    return CheckResult("averaged_y_spectrum", worst <= tol, worst, tol,
                       f"{pairs} accept states x 16 outcome tuples")


def check_averaged_xy_decomposition(rng, states: int = 50) -> CheckResult:
    """Spectral form of the (x, y)-averaged state: eigenvalue formula,
    orthonormal eigenvectors, and reconstruction of the direct average."""
    tol = 1e-10
    worst = 0.0
    for _ in range(states):
        st = attack.BellDiagonalState.random(rng)
        for b, a, t in itertools.product(BITS, repeat=3):
            dec = attack.eve_avg_xy_state(st, b, a, t)
            direct = np.zeros((16, 16))
            for x, y in itertools.product(BITS, repeat=2):
                vec = attack.eve_conditional_state(st, b, x, y, a, t)
                direct += 4.0 * np.outer(vec, vec)
            worst = max(worst, float(np.max(np.abs(dec.reconstruct() - direct))))
            gram = np.einsum("uvi,pqi->uvpq", dec.vectors,
                             dec.vectors).reshape(4, 4)
            worst = max(worst, float(np.max(np.abs(gram - np.eye(4)))))
            worst = max(worst, abs(float(dec.lambdas.sum()) - 1.0))
    return CheckResult("averaged_xy_decomposition", worst <= tol, worst, tol,
                       f"{states} random states x 8 (b,a,t) tuples")


def check_outcome_marginal_uniform(rng, states: int = 50,
                                   fault: float = 0.0) -> CheckResult:
    """Marginal over y of the outcome law is exactly 1/8 for every state."""
    tol = 1e-12
    worst = 0.0
    for _ in range(states):
        st = attack.BellDiagonalState.random(rng)
        lam = st.as_vector()
        if fault:
            lam = lam.copy()
            lam[3] += fault
            st = attack.BellDiagonalState.from_vector(lam)  # normalization check
        for b, x, a, t in itertools.product(BITS, repeat=4):
            p = sum(attack.outcome_probability(st, b, x, y, a, t) for y in BITS)
            worst = max(worst, abs(p - 0.125))
    return CheckResult("outcome_marginal_uniform", worst <= tol, worst, tol)


def check_entropy_identities(rng, pairs: int = 20) -> CheckResult:
    """Adversary entropies of accept states match the closed forms.

    Full state: J(beta) + J(gamma); averaged-over-y state: h(beta star gamma).
    Both via the generic matrix entropy, not the coefficient formulas.
    """
    tol = 1e-10
    worst = 0.0
    for _ in range(pairs):
        beta = float(rng.uniform(0.0, 0.1))
        gamma = float(rng.uniform(0.0, 0.1))
        st = attack.solve_check_b(attack.NoiseParams(beta, gamma))
        s_full = qmath.von_neumann_entropy(np.diag(st.as_vector()))
        want_full = security.j_entropy(beta) + security.j_entropy(gamma)
        worst = max(worst, abs(s_full - want_full))
        s_cond = qmath.von_neumann_entropy(attack.eve_avg_y_state(st, 0, 0, 0, 0))
        want_cond = security.binary_entropy(security.star(beta, gamma))
        worst = max(worst, abs(s_cond - want_cond))
    return CheckResult("entropy_identities", worst <= tol, worst, tol,
                       f"{pairs} random (beta, gamma) pairs in [0, 0.1]^2")


def check_reject_case_maximum(betas=None, starts: int = 20) -> CheckResult:
    """Constrained maximization of the adversary's entropy gain hits J(beta)
    and lands on the predicted solution family."""
    value_tol, family_tol = 1e-6, 1e-5
    betas = betas if betas is not None else np.arange(0.01, 0.101, 0.01)
    worst_value = worst_family = 0.0
    for beta in betas:
        res = security.reject_case_max(float(beta), starts=starts)
        worst_value = max(worst_value,
                          abs(res.value - security.j_entropy(float(beta))))
        worst_family = max(worst_family, res.family_residual)
        # the flat-direction relation Lambda_uv (1 - 3b/2) = lam[0, uv]
        lam_cap = attack.lambda_capital(res.maximizer)
        row0 = res.maximizer.coeffs[0, 0]
        worst_family = max(worst_family, float(np.max(np.abs(
            lam_cap * (1.0 - 1.5 * beta) - row0))))
    passed = worst_value <= value_tol and worst_family <= family_tol
    return CheckResult("reject_case_maximum", passed, worst_value, value_tol,
                       f"family residual {worst_family:.2e} (tol {family_tol:.0e}) "
                       f"over betas {betas[0]:.2f}..{betas[-1]:.2f}")


LEMMA_CHECKS = (
    check_twirl_diagonality,
    check_marginal_constraint_solution,
    check_joint_constraint_solution,
    check_conditional_state_contraction,
    check_conditional_state_orthogonality,
    check_conditional_average_diagonal,
    check_averaged_y_spectrum,
    check_averaged_xy_decomposition,
    check_outcome_marginal_uniform,
    check_entropy_identities,
)


def run_lemma_checks(seed: int = 2024, fault: float = 0.0,
                     betas=None) -> list[CheckResult]:
    """Run the full battery; `fault` perturbs inputs as a negative control."""
    results = []
    for fn in LEMMA_CHECKS:
        rng = np.random.default_rng(seed)
        try:
            if fault and fn in (check_twirl_diagonality,
                                check_outcome_marginal_uniform):
                results.append(fn(rng, fault=fault))
            else:
                results.append(fn(rng))
        except ValueError as exc:
            results.append(CheckResult(fn.__name__.removeprefix("check_"),
                                       False, float("nan"), float("nan"),
                                       f"rejected: {exc}"))
    results.append(check_reject_case_maximum(betas=betas))
    return results
