"""Statistical channel-monitoring verdicts from test-qubit outcome strings.

Two verdicts are computed from the per-basis error vectors of the monitored
positions: the sender's one-channel check (CheckA) and the receiver's joint
two-channel check (CheckB). Each asks whether a single pair of channel error
rates (beta, gamma) below the agreed thresholds explains every per-basis and
joint error count.

A count with E expected events fluctuates on the scale sqrt(E), so the
tolerance windows are delta*sqrt(beta) for per-basis rates and
delta*sqrt(2*beta*gamma) for the joint rate. Each clause then inverts to an
exact interval for beta (resp. the product beta*gamma), and a verdict is the
feasibility of the interval intersection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BASES = (0, 1, 2)


class ConfigurationError(ValueError):
    """Inputs structurally unusable (empty basis cell, length mismatch)."""


@dataclass(frozen=True)
class TestRecord:
    """Everything measured at the monitoring positions of one run.

    bases1/bases2: per-position encoding bases of the two channel uses;
    xi/xi_prime: channel-1 reference and received strings;
    eta/eta_prime: channel-2 reference and received strings.
    """

    __test__ = False  # not a pytest class, despite the name

    bases1: np.ndarray
    bases2: np.ndarray
    xi: np.ndarray
    xi_prime: np.ndarray
    eta: np.ndarray
    eta_prime: np.ndarray

    def __post_init__(self):
        arrays = {name: np.asarray(getattr(self, name), dtype=np.uint8)
                  for name in ("bases1", "bases2", "xi", "xi_prime",
                               "eta", "eta_prime")}
        lengths = {len(v) for v in arrays.values()}
        if len(lengths) != 1:
            raise ConfigurationError(f"field lengths differ: {lengths}")
        count = lengths.pop()
        if count == 0 or count % 9 != 0:
            raise ConfigurationError(
                f"test count {count} must be a positive multiple of 9")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    @property
    def test_count(self) -> int:
        return len(self.xi)


@dataclass(frozen=True)
class DeltaCounts:
    """Per-basis error vectors of both channels and their (b, b') joint cells.

    delta1[b], delta2[b]: error vectors restricted to basis b of the relevant
    channel; d1[b][bp], d2[b][bp]: error vectors restricted to the positions
    with basis pair (b, b').
    """

    delta1: tuple
    delta2: tuple
    d1: tuple
    d2: tuple

    def rate1(self, b: int) -> float:
        return float(self.delta1[b].sum()) / len(self.delta1[b])

    def rate2(self, b: int) -> float:
        return float(self.delta2[b].sum()) / len(self.delta2[b])

    def joint_rate(self, b: int, bp: int) -> float:
        cell = self.d1[b][bp] & self.d2[b][bp]
        return float(cell.sum()) / len(cell)


def compute_deltas(record: TestRecord, epr: bool = False) -> DeltaCounts:
    """Partition the XOR error strings by basis and by basis pair.

    With epr=True the y-basis anti-correlation of the source pairs is
    compensated: positions monitored in basis 2 have their error bit flipped.
    """
    err1 = record.xi ^ record.xi_prime
    err2 = record.eta ^ record.eta_prime
    if epr:
        err1 = err1 ^ (record.bases1 == 2).astype(np.uint8)
        err2 = err2 ^ (record.bases2 == 2).astype(np.uint8)
    delta1, delta2, d1, d2 = [], [], [], []
    for b in BASES:
        mask1 = record.bases1 == b
        mask2 = record.bases2 == b
        if not mask1.any() or not mask2.any():
            raise ConfigurationError(f"basis {b} has no test positions")
        delta1.append(err1[mask1])
        delta2.append(err2[mask2])
        row1, row2 = [], []
        for bp in BASES:
            cell = mask1 & (record.bases2 == bp)
            if not cell.any():
                raise ConfigurationError(f"basis pair ({b},{bp}) is empty")
            row1.append(err1[cell])
            row2.append(err2[cell])
        d1.append(tuple(row1))
        d2.append(tuple(row2))
    return DeltaCounts(delta1=tuple(delta1), delta2=tuple(delta2),
                       d1=tuple(d1), d2=tuple(d2))


def _sqrt_tolerance_interval(rate: float, tol: float) -> tuple[float, float]:
    """Solve |rate - p| <= tol * sqrt(p) for p; returns the closed interval.

    Substituting w = sqrt(p) turns each side into a quadratic in w with one
    admissible root, so the feasible set is a single interval.
    """
    disc = np.sqrt(tol * tol + 4.0 * rate)
    lo = max(0.0, (-tol + disc) / 2.0) ** 2
    hi = ((tol + disc) / 2.0) ** 2
    return lo, hi


def _intersect(intervals) -> tuple[float, float]:
    intervals = list(intervals)
    lo = max(i[0] for i in intervals)
    hi = min(i[1] for i in intervals)
    return lo, hi


def check_a(deltas: DeltaCounts, beta_star: float, delta: float) -> int:
    """1 iff one error rate beta <= beta_star explains all three channel-1 cells."""
    lo, hi = _intersect(_sqrt_tolerance_interval(deltas.rate1(b), delta)
                        for b in BASES)
    return int(lo <= min(hi, beta_star))


def check_b(deltas: DeltaCounts, beta_star: float, gamma_star: float,
            delta: float) -> int:
    """1 iff rates (beta, gamma) below threshold explain all fifteen cells.

    The three channel-1 cells bound beta, the three channel-2 cells bound
    gamma, and the nine joint cells bound the product beta*gamma; the verdict
    is feasibility of the combined system.
    """
    b_lo, b_hi = _intersect(_sqrt_tolerance_interval(deltas.rate1(b), delta)
                            for b in BASES)
    b_hi = min(b_hi, beta_star)
    g_lo, g_hi = _intersect(_sqrt_tolerance_interval(deltas.rate2(b), delta)
                            for b in BASES)
    g_hi = min(g_hi, gamma_star)
    if b_lo > b_hi or g_lo > g_hi:
        return 0
    joint_tol = delta * np.sqrt(2.0)
    p_lo, p_hi = _intersect(
        _sqrt_tolerance_interval(deltas.joint_rate(b, bp), joint_tol)
        for b in BASES for bp in BASES)
    # beta*gamma sweeps exactly [b_lo*g_lo, b_hi*g_hi] over the two intervals
    return int(max(p_lo, b_lo * g_lo) <= min(p_hi, b_hi * g_hi))


def default_delta(test_count: int) -> float:
    """Monitoring tolerance shrinking as O(1/sqrt(n)): 3/sqrt(test_count/9)."""
    if test_count <= 0 or test_count % 9:
        raise ConfigurationError("test_count must be a positive multiple of 9")
    return 3.0 / np.sqrt(test_count / 9.0)


@dataclass(frozen=True)
class MonitorVerdict:
    """Both verdicts plus the estimated rates and raw per-cell counts."""

    check_a: int
    check_b: int
    beta_hat: float
    gamma_hat: float
    counts1: np.ndarray       # shape (3,): |Delta1(b)|
    counts2: np.ndarray       # shape (3,): |Delta2(b)|
    joint_counts: np.ndarray  # shape (3, 3): |d1 & d2|

    def __post_init__(self):
        if self.check_b and not self.check_a:
            raise ValueError("check_b = 1 requires check_a = 1")


def monitor_verdict(record: TestRecord, beta_star: float, gamma_star: float,
                    delta: float, epr: bool = False) -> MonitorVerdict:
    """Evaluate both checks on a record and collect the count statistics."""
    deltas = compute_deltas(record, epr=epr)
    a_bit = check_a(deltas, beta_star, delta)
    b_bit = check_b(deltas, beta_star, gamma_star, delta)
    return MonitorVerdict(
        check_a=a_bit,
        check_b=b_bit,
        beta_hat=float(np.mean([deltas.rate1(b) for b in BASES])),
        gamma_hat=float(np.mean([deltas.rate2(b) for b in BASES])),
        counts1=np.array([int(deltas.delta1[b].sum()) for b in BASES]),
        counts2=np.array([int(deltas.delta2[b].sum()) for b in BASES]),
        joint_counts=np.array([[int((deltas.d1[b][bp] & deltas.d2[b][bp]).sum())
                                for bp in BASES] for b in BASES]),
    )


def round_robin_bases(test_count: int) -> tuple[np.ndarray, np.ndarray]:
    """Basis assignment giving each of the nine (b, b') cells test_count/9 slots."""
    if test_count % 9:
        raise ConfigurationError("test_count must be a multiple of 9")
    cells = np.arange(test_count) % 9
    return (cells // 3).astype(np.uint8), (cells % 3).astype(np.uint8)


def sample_record(test_count: int, beta: float, gamma: float,
                  rng: np.random.Generator,
                  correlated: bool = False) -> TestRecord:
    """Draw a synthetic monitoring record under independent or fully
    correlated channel noise (the latter repeats every channel-1 flip in
    channel 2)."""
    bases1, bases2 = round_robin_bases(test_count)
    xi = rng.integers(0, 2, size=test_count).astype(np.uint8)
    eta = rng.integers(0, 2, size=test_count).astype(np.uint8)
    flips1 = (rng.random(test_count) < beta).astype(np.uint8)
    if correlated:
        flips2 = flips1.copy()
    else:
        flips2 = (rng.random(test_count) < gamma).astype(np.uint8)
    return TestRecord(bases1=bases1, bases2=bases2,
                      xi=xi, xi_prime=xi ^ flips1,
                      eta=eta, eta_prime=eta ^ flips2)
