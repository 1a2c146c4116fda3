"""Closed-form and numerical security quantities.

Entropy helpers, the accept/reject trace-distance bounds, admissible message
lengths, the communication-rate formulas for both key-refresh strategies, the
two-way QKD key rate with its published comparator, and the numerical
maximization of the adversary's reject-case entropy gain.

All bound arithmetic is done in log2 space: bounds carry their exponent
explicitly so that values far below float underflow remain meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import attack


def binary_entropy(p: float) -> float:
    """h(p) = p log2(1/p) + (1-p) log2(1/(1-p)) in bits."""
    return entropy_vec([p, 1.0 - p])


def entropy_vec(probs) -> float:
    """sum_i p_i log2(1/p_i) for a (sub-)distribution, 0 log 0 := 0."""
    arr = np.asarray(probs, dtype=float)
    if arr.min() < -1e-12 or arr.sum() > 1.0 + 1e-12:
        raise ValueError(f"not a probability vector: {arr}")
    arr = np.clip(arr, 0.0, None)
    nz = arr[arr > 0.0]
    return float(-(nz * np.log2(nz)).sum())


def star(beta: float, gamma: float) -> float:
    """Combined error rate of two serial binary symmetric channels."""
    return beta * (1.0 - gamma) + (1.0 - beta) * gamma


def j_entropy(beta: float) -> float:
    """Four-outcome entropy h(1 - 3b/2, b/2, b/2, b/2) in bits.

    Governs six-state-style key rates; 0 at beta = 0, maximal (2 bits) at
    beta = 1/2 where the four outcomes are uniform.
    """
    if not 0.0 <= beta <= 2.0 / 3.0:
        raise ValueError(f"beta must be in [0, 2/3], got {beta}")
    return entropy_vec([1.0 - 1.5 * beta, beta / 2.0, beta / 2.0, beta / 2.0])


@dataclass(frozen=True)
class BoundValue:
    """A probability bound tracked in log2 space.

    value = weight * min(1, 2^(exponent_bits / 2)); `value` may underflow to
    zero while `exponent_bits` stays exact.
    """

    weight: float
    exponent_bits: float

    @property
    def value(self) -> float:
        if self.exponent_bits >= 0.0:
            return self.weight
        half = 0.5 * self.exponent_bits
        return self.weight * (2.0 ** half if half > -1074 else 0.0)


def theorem_bounds(n: int, msg_len: float, beta_star: float, gamma_star: float,
                   pr_accept: float) -> tuple[BoundValue, BoundValue]:
    """Accept- and reject-case distinguishability bounds.

    eps_acc = Pr[accept] * min(1, sqrt(2^(l - n + n J(b*) + n J(g*))))
    eps_rej = Pr[reject] * min(1, sqrt(2^(l - n + n J(b*) + n h(b* star g*))))
    """
    if not 0.0 <= pr_accept <= 1.0:
        raise ValueError(f"pr_accept must be a probability, got {pr_accept}")
    jb, jg = j_entropy(beta_star), j_entropy(gamma_star)
    acc_exp = msg_len - n + n * jb + n * jg
    rej_exp = msg_len - n + n * jb + n * binary_entropy(star(beta_star, gamma_star))
    return (BoundValue(weight=pr_accept, exponent_bits=acc_exp),
            BoundValue(weight=1.0 - pr_accept, exponent_bits=rej_exp))


@dataclass(frozen=True)
class MessageLengthBound:
    """Admissible message length and the two per-case thresholds it is the min of."""

    l_max: float
    accept_threshold: float
    reject_threshold: float


def max_message_length(n: int, beta_star: float,
                       gamma_star: float) -> MessageLengthBound:
    """Largest message length making both bound exponents nonpositive.

    l <= n - n J(b*) - n max(h(b* star g*), J(g*)); at gamma* = beta* this
    reduces to n (1 - 2 J(b*)).
    """
    jb = j_entropy(beta_star)
    accept_threshold = n - n * jb - n * j_entropy(gamma_star)
    reject_threshold = n - n * jb - n * binary_entropy(star(beta_star, gamma_star))
    return MessageLengthBound(
        l_max=min(accept_threshold, reject_threshold),
        accept_threshold=accept_threshold,
        reject_threshold=reject_threshold)


def rate_vsue_refresh(beta_star: float) -> float:
    """Message bits per qubit when single-use keys ride along in the message.

    1 - 2 J(b*) - h(b* star b*); may go negative, callers clamp for reporting.
    """
    return 1.0 - 2.0 * j_entropy(beta_star) \
        - binary_entropy(star(beta_star, beta_star))


def rate_qkd_refresh(beta_star: float) -> float:
    """Message bits per qubit when single-use keys are refreshed by six-state QKD.

    (1 - 2J)(1 - J) / (1 - J + h(b* star b*)) with J = J(b*).
    """
    j = j_entropy(beta_star)
    return (1.0 - 2.0 * j) * (1.0 - j) \
        / (1.0 - j + binary_entropy(star(beta_star, beta_star)))


def qkd_rate(beta: float, gamma: float) -> float:
    """Two-way QKD key rate: 1 - h(b star g) - J(b) - J(g) + J(b star g)."""
    sg = star(beta, gamma)
    return 1.0 - binary_entropy(sg) - j_entropy(beta) - j_entropy(gamma) \
        + j_entropy(sg)


def lm05_rate(beta: float, gamma: float) -> float:
    """Published two-way QKD comparator: 1 - h(b star g) - min(h(b), h(g))."""
    return 1.0 - binary_entropy(star(beta, gamma)) \
        - min(binary_entropy(beta), binary_entropy(gamma))


def qkd_bound_exponent(n: int, msg_len: float, beta: float,
                       gamma: float) -> float:
    """log2 of the squared QKD distinguishability bound (before the sqrt)."""
    sg = star(beta, gamma)
    return msg_len - n + n * binary_entropy(sg) + n * j_entropy(beta) \
        + n * j_entropy(gamma) - n * j_entropy(sg)


def clamped(rate: float) -> float:
    """Reported rate floor: max(0, rate)."""
    return max(0.0, rate)


def postselection_penalty(n: int, d: int = 16) -> float:
    """Extra privacy amplification for lifting collective to general attacks.

    2 (d^2 - 1) log2(n + 1) bits to subtract from the admissible message
    length; o(n), so asymptotically free.
    """
    if n < 1 or d < 2:
        raise ValueError("need n >= 1 and d >= 2")
    return 2.0 * (d * d - 1) * np.log2(n + 1.0)


def zero_crossing(fn, lo: float, hi: float, tol: float = 1e-6,
                  samples: int = 256) -> float:
    """First zero of a scalar function on [lo, hi], located by bisection.

    The interval is scanned on a grid to bracket the first sign change, then
    bisected to the requested tolerance.
    """
    xs = np.linspace(lo, hi, samples)
    vals = [fn(x) for x in xs]
    bracket = None
    for i in range(len(xs) - 1):
        if vals[i] == 0.0:
            return float(xs[i])
        if vals[i] * vals[i + 1] <= 0.0:
            bracket = (xs[i], xs[i + 1], vals[i])
            break
    if bracket is None:
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    a, b, fa = bracket
    while b - a > tol:
        mid = 0.5 * (a + b)
        if fa * fn(mid) <= 0.0:
            b = mid
        else:
            a = mid
    return float(0.5 * (a + b))


# ---------------------------------------------------------------------------
# Reject-case maximization
# ---------------------------------------------------------------------------

@dataclass
class RejectCaseResult:
    """Outcome of maximizing the adversary's reject-case entropy gain.

    value: the maximum of H(lam) - H(Lambda) found (bits);
    maximizer: the attaining state; family_residual: worst deviation from the
    one-parameter-family structure lam[r, s] = c_r * Lambda_{r xor s};
    converged: False when the iteration budget ran out before the step and
    objective tolerances were met.
    """

    beta: float
    value: float
    maximizer: attack.BellDiagonalState
    family_residual: float
    converged: bool
    starts: list = field(default_factory=list, repr=False)


def _project_row_simplex(v: np.ndarray, mass: float) -> np.ndarray:
    """Euclidean projection of v onto {x >= 0, sum x = mass}."""
    if mass <= 0.0:
        return np.zeros_like(v)
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - mass
    ind = np.arange(1, len(v) + 1)
    rho = np.count_nonzero(u - cssv / ind > 0)
    theta = cssv[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def _objective_and_gradient(lam: np.ndarray) -> tuple[float, np.ndarray]:
    """H(lam) - H(Lambda) and its gradient on the 4x4 grid (rows r, cols s).

    Lambda_d = sum_r lam[r, r xor d]; the gradient entry at (r, s) is
    log2(Lambda_{r xor s} / lam[r, s]).
    """
    tiny = 1e-300
    xor = np.arange(4)[:, None] ^ np.arange(4)[None, :]
    lam_cap = np.zeros(4)
    for r in range(4):
        lam_cap[xor[r]] += lam[r]
    h_lam = -(lam * np.log2(np.maximum(lam, tiny))).sum()
    h_cap = -(lam_cap * np.log2(np.maximum(lam_cap, tiny))).sum()
    grad = np.log2(np.maximum(lam_cap[xor], tiny)) \
        - np.log2(np.maximum(lam, tiny))
    return h_lam - h_cap, grad


def _grid_to_state(lam: np.ndarray) -> attack.BellDiagonalState:
    return attack.BellDiagonalState.from_vector(lam.reshape(16))


def reject_case_max(beta: float, starts: int = 20, max_iter: int = 100_000,
                    seed: int = 20240 ) -> RejectCaseResult:
    """Maximize H(lam) - H(Lambda) under the four channel-1 marginal constraints.

    Projected gradient ascent on the product of four scaled simplices (one per
    (a1, b1) row, each with the mass fixed by the marginal solution at beta),
    with multi-start and backtracking step control. The maximum equals
    j_entropy(beta) and is attained on a three-parameter family.
    """
    if not 0.0 < beta < 2.0 / 3.0:
        raise ValueError(f"beta must be in (0, 2/3), got {beta}")
    masses = attack.pair_marginal_coeffs(beta).reshape(4)
    rng = np.random.default_rng(seed)

    def project(lam):
        return np.array([_project_row_simplex(lam[r], masses[r])
                         for r in range(4)])

    best_val, best_lam, best_converged = -np.inf, None, False
    start_values = []
    for _ in range(starts):
        lam = np.array([m * rng.dirichlet(np.ones(4)) if m > 0 else np.zeros(4)
                        for m in masses])
        step = 0.25
        val, grad = _objective_and_gradient(lam)
        converged = False
        for _ in range(max_iter):
            cand = project(lam + step * grad)
            cand_val, cand_grad = _objective_and_gradient(cand)
            if cand_val > val:
                moved = np.max(np.abs(cand - lam))
                lam, val, grad = cand, cand_val, cand_grad
                step = min(step * 1.25, 4.0)
                if moved < 1e-12:
                    converged = True
                    break
            else:
                step *= 0.5
                if step < 1e-14:
                    converged = True
                    break
        start_values.append(val)
        if val > best_val:
            best_val, best_lam, best_converged = val, lam, converged

    lam_cap = np.zeros(4)
    xor = np.arange(4)[:, None] ^ np.arange(4)[None, :]
    for r in range(4):
        lam_cap[xor[r]] += best_lam[r]
    family = masses[:, None] * lam_cap[xor]
    return RejectCaseResult(
        beta=beta,
        value=best_val,
        maximizer=_grid_to_state(best_lam),
        family_residual=float(np.max(np.abs(best_lam - family))),
        converged=best_converged,
        starts=start_values)


# ---------------------------------------------------------------------------
# Aggregate report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EntropyInputs:
    """The three adversary entropies of one Bell-diagonal state (bits).

    s_full: the whole purification marginal; s_conditional: averaged over the
    unknown second outcome only; s_outcome_averaged: averaged over both
    receiver outcomes. All lie in [0, 4].
    """

    state: "attack.BellDiagonalState"
    s_full: float
    s_conditional: float
    s_outcome_averaged: float

    def __post_init__(self):
        for value in (self.s_full, self.s_conditional,
                      self.s_outcome_averaged):
            if not -1e-12 <= value <= 4.0 + 1e-12:
                raise ValueError(f"entropy {value} outside [0, 4] bits")


def entropy_inputs(state: "attack.BellDiagonalState") -> EntropyInputs:
    """Compute the adversary entropies of a state through the matrix route."""
    from . import qmath

    s_full = qmath.von_neumann_entropy(np.diag(state.as_vector()))
    s_cond = qmath.von_neumann_entropy(attack.eve_avg_y_state(state, 0, 0, 0, 0))
    s_bat = qmath.von_neumann_entropy(
        attack.eve_avg_xy_state(state, 0, 0, 0).reconstruct())
    return EntropyInputs(state=state, s_full=s_full, s_conditional=s_cond,
                         s_outcome_averaged=s_bat)


@dataclass(frozen=True)
class SecurityReport:
    """All security quantities for one parameter point (n, beta*, gamma*)."""

    n: int
    beta_star: float
    gamma_star: float
    pr_accept: float
    s_accept: float
    s_conditional: float
    eps_acc: BoundValue
    eps_rej: BoundValue
    length_bound: MessageLengthBound
    rates: dict
    rates_clamped: dict
    postselection_bits: float | None


def security_report(n: int, beta_star: float, gamma_star: float,
                    pr_accept: float = 1.0, msg_len: float | None = None,
                    finite_size: bool = False) -> SecurityReport:
    """Assemble the closed-form security summary for one parameter point."""
    bound = max_message_length(n, beta_star, gamma_star)
    if msg_len is None:
        msg_len = bound.l_max
    eps_acc, eps_rej = theorem_bounds(n, msg_len, beta_star, gamma_star,
                                      pr_accept)
    rates = {
        "via_vsue": rate_vsue_refresh(beta_star),
        "via_qkd": rate_qkd_refresh(beta_star),
        "qkd_two_way": qkd_rate(beta_star, gamma_star),
        "lm05_comparator": lm05_rate(beta_star, gamma_star),
    }
    return SecurityReport(
        n=n, beta_star=beta_star, gamma_star=gamma_star, pr_accept=pr_accept,
        s_accept=j_entropy(beta_star) + j_entropy(gamma_star),
        s_conditional=binary_entropy(star(beta_star, gamma_star)),
        eps_acc=eps_acc, eps_rej=eps_rej, length_bound=bound,
        rates=rates,
        rates_clamped={k: clamped(v) for k, v in rates.items()},
        postselection_bits=postselection_penalty(n) if finite_size else None)
