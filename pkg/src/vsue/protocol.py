"""Executable state machines for the two-way encryption protocol.

Two equivalent variants are implemented: the prepare-and-measure protocol
(qubits bounce from the receiver to the sender and back) and its
entanglement-based reformulation (an untrusted source distributes two noisy
EPR pairs per position and both parties measure).

Qubit transport is simulated classically: for the BB84 payload states and the
six-state test states under the supported noise models, every observable of
the protocol is a flip statistic, and the per-position joint flip distribution
of the two channel uses is determined by the monitored rates r1(b), r2(b'),
s(b, b'). A run is a deterministic function of (params, keys, message, rng).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import attack, classical, monitor
from .classical import (HashSeed, LinearCode, MacKey, bits_to_int,
                        int_to_bits)
from .monitor import ConfigurationError


def substream(master_seed: int, index: int) -> np.random.Generator:
    """Counter-based per-trial generator: (master seed, trial index) -> stream."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class ProtocolParams:
    """Sizes, thresholds and primitives of one protocol configuration."""

    n: int
    test_count: int
    msg_len: int
    beta_star: float
    gamma_star: float
    delta: float
    code: LinearCode
    mac_bits: int

    def __post_init__(self):
        if self.test_count <= 0 or self.test_count % 9:
            raise ConfigurationError("test_count must be a positive multiple of 9")
        if not 0 < self.msg_len <= self.n:
            raise ConfigurationError("need 0 < msg_len <= n")
        if self.code.n != self.n:
            raise ConfigurationError(
                f"code block length {self.code.n} != n = {self.n}")
        if not 1 <= self.mac_bits <= 64 or self.mac_bits >= self.msg_len:
            raise ConfigurationError("need 1 <= mac_bits < msg_len (<= 64)")
        if not 1 <= self.n <= 64:
            raise ConfigurationError("hash blocks limited to 64 bits; need n <= 64")
        if self.delta <= 0:
            raise ConfigurationError("delta must be positive")

    @property
    def total_positions(self) -> int:
        return self.n + self.test_count


def default_params(n: int = 56, test_count: int = 900, msg_len: int = 40,
                   beta_star: float = 0.05, gamma_star: float = 0.05,
                   delta: float | None = None, mac_bits: int = 16,
                   code: LinearCode | None = None) -> ProtocolParams:
    """Desk-scale defaults: four [14,6] two-error-correcting blocks at n = 56."""
    if code is None:
        base = classical.code_14_6()
        if n % base.n:
            raise ConfigurationError(f"default code needs n divisible by {base.n}")
        code = classical.block_code(base, n // base.n)
    return ProtocolParams(
        n=n, test_count=test_count, msg_len=msg_len, beta_star=beta_star,
        gamma_star=gamma_star,
        delta=delta if delta is not None else monitor.default_delta(test_count),
        code=code, mac_bits=mac_bits)


@dataclass(frozen=True)
class KeyMaterial:
    """All pre-shared key material of one run.

    u is the reusable hash seed; everything else is single-use. The receiver's
    per-run basis and payload strings are generated inside the run, not here.
    """

    u: HashSeed
    k_syn: np.ndarray
    k_test: np.ndarray
    i_test: np.ndarray
    b_test1: np.ndarray
    b_test2: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    mac_message: MacKey
    mac_forward: MacKey
    mac_feedback: MacKey


def _random_balanced_bases(test_count: int,
                           rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Random placement with each of the nine basis pairs equally represented."""
    b1, b2 = monitor.round_robin_bases(test_count)
    order = rng.permutation(test_count)
    return b1[order], b2[order]


def generate_keys(params: ProtocolParams, rng: np.random.Generator) -> KeyMaterial:
    """Draw fresh key material (the hash seed is drawn invertible)."""
    b1, b2 = _random_balanced_bases(params.test_count, rng)
    i_test = np.sort(rng.choice(params.total_positions, size=params.test_count,
                                replace=False))
    return KeyMaterial(
        u=classical.random_hash_seed(params.n, rng, invertible=True),
        k_syn=rng.integers(0, 2, params.code.syndrome_bits).astype(np.uint8),
        k_test=rng.integers(0, 2, params.test_count).astype(np.uint8),
        i_test=i_test.astype(np.int64),
        b_test1=b1, b_test2=b2,
        xi=rng.integers(0, 2, params.test_count).astype(np.uint8),
        eta=rng.integers(0, 2, params.test_count).astype(np.uint8),
        mac_message=classical.random_mac_key(params.mac_bits, rng),
        mac_forward=classical.random_mac_key(params.mac_bits, rng),
        mac_feedback=classical.random_mac_key(params.mac_bits, rng))


def key_update(keys: KeyMaterial, omega: int, params: ProtocolParams,
               rng: np.random.Generator) -> KeyMaterial:
    """Refresh every single-use key; the hash seed u is re-used unchanged."""
    fresh = generate_keys(params, rng)
    return replace(fresh, u=keys.u)


def attach_message_tag(keys: KeyMaterial, payload: np.ndarray) -> np.ndarray:
    """Build the message payload || tag authenticated with the message MAC key."""
    payload = np.asarray(payload, dtype=np.uint8)
    return np.concatenate([payload, classical.mac_tag(keys.mac_message, payload)])


def random_message(params: ProtocolParams, keys: KeyMaterial,
                   rng: np.random.Generator) -> np.ndarray:
    payload = rng.integers(0, 2, params.msg_len - params.mac_bits).astype(np.uint8)
    return attach_message_tag(keys, payload)


def _split_message(params: ProtocolParams,
                   message: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cut = params.msg_len - params.mac_bits
    return message[:cut], message[cut:]


# ---------------------------------------------------------------------------
# Channel models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelModel:
    """Noise on the two quantum channel uses.

    modes: "independent" (per-channel flip rates beta/gamma), "bell_diagonal"
    (per-position joint statistics of a twirled two-pair state), and
    "intercept_resend" (a measure-and-resend demo attacker who only knows the
    two payload bases and therefore stands out in the third monitoring basis).
    An explicit seed gives the noise its own deterministic substream.
    """

    mode: str = "independent"
    beta: float = 0.0
    gamma: float = 0.0
    state: attack.BellDiagonalState | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.mode not in ("independent", "bell_diagonal", "intercept_resend"):
            raise ConfigurationError(f"unknown channel mode {self.mode!r}")
        if self.mode == "bell_diagonal" and self.state is None:
            raise ConfigurationError("bell_diagonal mode needs a state")
        if not (0.0 <= self.beta <= 1.0 and 0.0 <= self.gamma <= 1.0):
            raise ConfigurationError("flip probabilities must be in [0, 1]")

    def joint_tables(self) -> np.ndarray:
        """cells[3*b + b'] = cumulative distribution of (f1, f2) at bases (b, b')."""
        if self.mode == "independent":
            r1 = np.full(3, self.beta)
            r2 = np.full(3, self.gamma)
            s = np.outer(r1, r2)
        elif self.mode == "intercept_resend":
            r1 = np.array([0.25, 0.25, 0.5])
            r2 = np.array([0.25, 0.25, 0.5])
            s = np.outer(r1, r2)
        else:
            rates = attack.error_rates(self.state)
            r1, r2, s = rates.r1, rates.r2, rates.s
        cells = np.zeros((9, 4))
        for b in range(3):
            for bp in range(3):
                p11 = s[b, bp]
                p10 = r1[b] - p11
                p01 = r2[bp] - p11
                p00 = 1.0 - p10 - p01 - p11
                cells[3 * b + bp] = np.cumsum([p00, p01, p10, p11])
        return cells

    def noise_rng(self, rng: np.random.Generator) -> np.random.Generator:
        return rng if self.seed is None else substream(self.seed, 0)


def _sample_flips(cells: np.ndarray, bases1: np.ndarray, bases2: np.ndarray,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Joint per-position flip pair (f1, f2) for the two channel uses."""
    idx = 3 * bases1.astype(np.int64) + bases2.astype(np.int64)
    u = rng.random(len(idx))
    outcome = (u[:, None] > cells[idx]).sum(axis=1)
    return (outcome >> 1).astype(np.uint8), (outcome & 1).astype(np.uint8)


# ---------------------------------------------------------------------------
# Transcripts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AuthenticatedMessage:
    """Classical-channel frame: payload bits plus one-time MAC tag."""

    payload: np.ndarray
    tag: np.ndarray

    def verify(self, key: MacKey) -> bool:
        return classical.mac_verify(key, self.payload, self.tag)


def _authenticate(bits: np.ndarray, key: MacKey) -> AuthenticatedMessage:
    bits = np.asarray(bits, dtype=np.uint8)
    return AuthenticatedMessage(payload=bits, tag=classical.mac_tag(key, bits))


@dataclass(frozen=True)
class RunSecrets:
    """Test-only view of the volatile and one-sided values of a run.

    A real deployment deletes these; the simulator keeps them behind this
    accessor so tests can verify flip statistics and decode behavior.
    """

    x: np.ndarray
    b: np.ndarray
    y: np.ndarray
    t: np.ndarray
    r_pad: np.ndarray | None
    z: np.ndarray | None
    s: np.ndarray | None
    payload_errors: np.ndarray | None


@dataclass(frozen=True)
class RunTranscript:
    """Everything a protocol run exposes.

    mu is the sender's classical message (None encodes an abort): for the
    prepare-and-measure variant (masked xi', masked syndrome, c); for the
    EPR variant (a, c). Secrets are test instrumentation only.
    """

    variant: str
    mu: tuple | None
    mu_frame: AuthenticatedMessage
    omega: int
    omega_frame: AuthenticatedMessage
    m_hat: np.ndarray | None
    monitor: monitor.MonitorVerdict
    mac_failure: bool
    secrets: RunSecrets

    def __post_init__(self):
        if self.mu is None and self.omega != 0:
            raise ValueError("mu = abort requires omega = 0")
        if self.omega == 0 and self.m_hat is not None:
            raise ValueError("omega = 0 requires m_hat = None")


def _validate_run_inputs(params: ProtocolParams, keys: KeyMaterial,
                         message: np.ndarray):
    message = np.asarray(message, dtype=np.uint8)
    if len(message) != params.msg_len:
        raise ConfigurationError(
            f"message length {len(message)} != msg_len {params.msg_len}")
    if keys.u.field_bits != params.n:
        raise ConfigurationError("hash seed field size must equal n")
    if len(keys.i_test) != params.test_count or \
            len(keys.k_test) != params.test_count:
        raise ConfigurationError("key material sized for a different test_count")
    if len(keys.k_syn) != params.code.syndrome_bits:
        raise ConfigurationError("syndrome pad sized for a different code")
    if keys.i_test.max() >= params.total_positions or \
            len(np.unique(keys.i_test)) != len(keys.i_test):
        raise ConfigurationError("test positions invalid")
    payload, tag = _split_message(params, message)
    if not classical.mac_verify(keys.mac_message, payload, tag):
        raise ConfigurationError("message does not carry a valid MAC suffix")
    return message


def _payload_mask(params: ProtocolParams, i_test: np.ndarray) -> np.ndarray:
    mask = np.ones(params.total_positions, dtype=bool)
    mask[i_test] = False
    return mask


def _hash_message_block(u: HashSeed, message: np.ndarray, r_pad: np.ndarray,
                        n: int) -> np.ndarray:
    z_int = classical.hash_inv(u, bits_to_int(message), bits_to_int(r_pad),
                               ell=len(message))
    return int_to_bits(z_int, n)


def _decode(params: ProtocolParams, keys: KeyMaterial, z_prime: np.ndarray,
            s: np.ndarray) -> tuple[np.ndarray, np.ndarray, bool]:
    """Error-correct z' against the syndrome s, hash down, verify the MAC."""
    code = params.code
    err = classical.syn_dec(code, s ^ classical.syn(code, z_prime))
    z_hat = z_prime ^ err
    m_hat = int_to_bits(classical.hash_phi(keys.u, bits_to_int(z_hat),
                                           params.msg_len), params.msg_len)
    payload, tag = _split_message(params, m_hat)
    return z_hat, m_hat, classical.mac_verify(keys.mac_message, payload, tag)


def run_pm_protocol(params: ProtocolParams, keys: KeyMaterial,
                    message: np.ndarray, channel: ChannelModel,
                    rng: np.random.Generator) -> RunTranscript:
    """One run of the prepare-and-measure protocol.

    The receiver bounces encoded qubits off the sender, who flips payload
    positions by a volatile pad t and reports masked monitoring data; the
    receiver monitors both channels and decodes on accept.
    """
    message = _validate_run_inputs(params, keys, message)
    noise = channel.noise_rng(rng)
    cells = channel.joint_tables()
    payload_pos = _payload_mask(params, keys.i_test)

    # Receiver prepares: payload bits x in BB84 bases b, test payload xi.
    x = rng.integers(0, 2, params.n).astype(np.uint8)
    b = rng.integers(0, 2, params.n).astype(np.uint8)
    bases1 = np.empty(params.total_positions, dtype=np.uint8)
    bases2 = np.empty(params.total_positions, dtype=np.uint8)
    bases1[keys.i_test], bases2[keys.i_test] = keys.b_test1, keys.b_test2
    bases1[payload_pos] = b
    bases2[payload_pos] = b

    f1, f2 = _sample_flips(cells, bases1, bases2, noise)

    # Sender: measure tests after channel 1, flip payload by t, return states.
    xi_prime = keys.xi ^ f1[keys.i_test]
    t = rng.integers(0, 2, params.n).astype(np.uint8)
    eta_prime = keys.eta ^ f2[keys.i_test]
    y = x ^ t ^ f1[payload_pos] ^ f2[payload_pos]

    record = monitor.TestRecord(bases1=keys.b_test1, bases2=keys.b_test2,
                                xi=keys.xi, xi_prime=xi_prime,
                                eta=keys.eta, eta_prime=eta_prime)
    verdict = monitor.monitor_verdict(record, params.beta_star,
                                      params.gamma_star, params.delta)

    mu = None
    m_hat = None
    omega = 0
    mac_failure = False
    r_pad = z = s = payload_errors = None
    if verdict.check_a:
        r_pad = rng.integers(0, 2, params.n - params.msg_len).astype(np.uint8)
        z = _hash_message_block(keys.u, message, r_pad, params.n)
        c = z ^ t
        s = classical.syn(params.code, z)
        mu = (xi_prime ^ keys.k_test, s ^ keys.k_syn, c)
        # Receiver: unmask, run the joint check, decode on accept.
        omega = verdict.check_b
        if omega:
            z_prime = x ^ y ^ c
            payload_errors = z_prime ^ z
            s_received = mu[1] ^ keys.k_syn
            _, m_hat, mac_ok = _decode(params, keys, z_prime, s_received)
            if not mac_ok:
                m_hat, mac_failure = None, True

    mu_frame = _authenticate(_serialize_mu(mu), keys.mac_forward)
    omega_frame = _authenticate(np.array([omega], dtype=np.uint8),
                                keys.mac_feedback)
    if not (mu_frame.verify(keys.mac_forward)
            and omega_frame.verify(keys.mac_feedback)):
        raise ConfigurationError("classical channel authentication failed")

    return RunTranscript(
        variant="pm", mu=mu, mu_frame=mu_frame, omega=omega,
        omega_frame=omega_frame, m_hat=m_hat, monitor=verdict,
        mac_failure=mac_failure,
        secrets=RunSecrets(x=x, b=b, y=y, t=t, r_pad=r_pad, z=z, s=s,
                           payload_errors=payload_errors))


def _serialize_mu(mu: tuple | None) -> np.ndarray:
    """Flag bit plus the concatenated components (abort is the lone 0 bit)."""
    if mu is None:
        return np.zeros(1, dtype=np.uint8)
    return np.concatenate([np.ones(1, dtype=np.uint8)]
                          + [np.asarray(part, dtype=np.uint8) for part in mu])


def sample_payload_outcomes(source: attack.BellDiagonalState, b: np.ndarray,
                            rng: np.random.Generator) -> tuple[np.ndarray, ...]:
    """Draw (x, y, a, t) per position from the outcome law of the source state.

    b holds the receiver's per-position basis bits; outcomes are sampled from
    the sixteen-way distribution P(x, y, a, t | b).
    """
    b = np.asarray(b, dtype=np.uint8)
    out = np.empty(len(b), dtype=np.int64)
    for basis in (0, 1):
        mask = b == basis
        if not mask.any():
            continue
        probs = np.array([attack.outcome_probability(source, basis,
                                                     (o >> 3) & 1, (o >> 2) & 1,
                                                     (o >> 1) & 1, o & 1)
                          for o in range(16)])
        out[mask] = rng.choice(16, size=int(mask.sum()), p=probs / probs.sum())
    x = ((out >> 3) & 1).astype(np.uint8)
    y = ((out >> 2) & 1).astype(np.uint8)
    a = ((out >> 1) & 1).astype(np.uint8)
    t = (out & 1).astype(np.uint8)
    return x, y, a, t


def run_epr_protocol(params: ProtocolParams, keys: KeyMaterial,
                     message: np.ndarray, source: attack.BellDiagonalState,
                     rng: np.random.Generator) -> RunTranscript:
    """One run of the entanglement-based variant.

    An untrusted source distributes, per position, the same twirled two-pair
    state; single-use keys are regenerated in-run (the hash seed and MAC keys
    are taken from `keys`), a random position permutation is applied, the
    sender Bell-measures payload pairs and both parties measure test pairs in
    secret shared bases.
    """
    message = _validate_run_inputs(params, keys, message)
    run_keys = key_update(keys, omega=1, params=params, rng=rng)
    rates = attack.error_rates(source)

    # Random permutation of positions; the single-use test locations follow.
    perm = rng.permutation(params.total_positions)
    i_test = np.sort(perm[run_keys.i_test])
    run_keys = replace(run_keys, i_test=i_test)
    payload_pos = _payload_mask(params, i_test)

    b = rng.integers(0, 2, params.n).astype(np.uint8)
    x, y, a_bits, t = sample_payload_outcomes(source, b, rng)

    # Test pairs: both parties measure in the shared bases; the source state
    # anti-correlates y-basis outcomes, and the per-position error pair across
    # the channels follows the joint monitored statistics of the source.
    cells = np.zeros((9, 4))
    for bb in range(3):
        for bp in range(3):
            p11 = rates.s[bb, bp]
            p10, p01 = rates.r1[bb] - p11, rates.r2[bp] - p11
            cells[3 * bb + bp] = np.cumsum([1.0 - p10 - p01 - p11, p01, p10, p11])
    e1, e2 = _sample_flips(cells, run_keys.b_test1, run_keys.b_test2, rng)
    xi = rng.integers(0, 2, params.test_count).astype(np.uint8)
    eta = rng.integers(0, 2, params.test_count).astype(np.uint8)
    xi_prime = xi ^ (run_keys.b_test1 == 2).astype(np.uint8) ^ e1
    eta_prime = eta ^ (run_keys.b_test2 == 2).astype(np.uint8) ^ e2

    record = monitor.TestRecord(bases1=run_keys.b_test1, bases2=run_keys.b_test2,
                                xi=xi, xi_prime=xi_prime,
                                eta=eta, eta_prime=eta_prime)
    verdict = monitor.monitor_verdict(record, params.beta_star,
                                      params.gamma_star, params.delta, epr=True)

    mu = None
    m_hat = None
    omega = 0
    mac_failure = False
    r_pad = z = s = payload_errors = None
    if verdict.check_a:
        r_pad = rng.integers(0, 2, params.n - params.msg_len).astype(np.uint8)
        z = _hash_message_block(keys.u, message, r_pad, params.n)
        c = t ^ z
        s = classical.syn(params.code, z)
        mu = (a_bits, c)
        omega = verdict.check_b
        if omega:
            t_hat = x ^ y ^ (b & a_bits)
            z_prime = t_hat ^ c
            payload_errors = z_prime ^ z  # = t_hat ^ t
            _, m_hat, mac_ok = _decode(params, keys, z_prime, s)
            if not mac_ok:
                m_hat, mac_failure = None, True

    mu_frame = _authenticate(_serialize_mu(mu), keys.mac_forward)
    omega_frame = _authenticate(np.array([omega], dtype=np.uint8),
                                keys.mac_feedback)
    return RunTranscript(
        variant="epr", mu=mu, mu_frame=mu_frame, omega=omega,
        omega_frame=omega_frame, m_hat=m_hat, monitor=verdict,
        mac_failure=mac_failure,
        secrets=RunSecrets(x=x, b=b, y=y, t=t, r_pad=r_pad, z=z, s=s,
                           payload_errors=payload_errors))


# ---------------------------------------------------------------------------
# Variant equivalence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonLine:
    """One compared statistic with its three-sigma agreement verdict."""

    name: str
    value_pm: float
    value_epr: float
    sigma: float
    ok: bool


@dataclass(frozen=True)
class EquivalenceReport:
    trials: int
    beta: float
    gamma: float
    lines: tuple
    passed: bool


def _proportion_line(name: str, hits_pm: int, hits_epr: int,
                     trials: int) -> ComparisonLine:
    p_pm, p_epr = hits_pm / trials, hits_epr / trials
    pooled = (hits_pm + hits_epr) / (2 * trials)
    sigma = float(np.sqrt(max(pooled * (1 - pooled) * 2 / trials, 1e-12)))
    return ComparisonLine(name, p_pm, p_epr, sigma,
                          abs(p_pm - p_epr) <= 3 * sigma)


def _mean_line(name: str, samples_pm: np.ndarray,
               samples_epr: np.ndarray) -> ComparisonLine:
    m_pm, m_epr = float(np.mean(samples_pm)), float(np.mean(samples_epr))
    var = np.var(samples_pm) / len(samples_pm) \
        + np.var(samples_epr) / len(samples_epr)
    sigma = float(np.sqrt(max(var, 1e-12)))
    return ComparisonLine(name, m_pm, m_epr, sigma,
                          abs(m_pm - m_epr) <= 3 * sigma)


def equivalence_check(params: ProtocolParams, keys: KeyMaterial,
                      message: np.ndarray, noise: attack.NoiseParams,
                      trials: int, master_seed: int = 0) -> EquivalenceReport:
    """Compare the two variants' observable distributions at the same noise.

    The prepare-and-measure variant runs under independent flips (beta, gamma)
    while the EPR variant consumes the matching accept-compatible source
    state; accept rate, decode success and monitoring counts must agree within
    three Monte-Carlo sigma.
    """
    channel = ChannelModel(mode="independent", beta=noise.beta,
                           gamma=noise.gamma)
    source = attack.solve_check_b(noise)
    acc = {"pm": 0, "epr": 0}
    success = {"pm": 0, "epr": 0}
    counts1 = {"pm": [], "epr": []}
    counts2 = {"pm": [], "epr": []}
    joints = {"pm": [], "epr": []}
    for trial in range(trials):
        rng = substream(master_seed, trial)
        run_keys = key_update(keys, omega=1, params=params, rng=rng)
        msg = attach_message_tag(run_keys, _split_message(params, message)[0])
        for variant in ("pm", "epr"):
            if variant == "pm":
                tr = run_pm_protocol(params, run_keys, msg, channel, rng)
            else:
                tr = run_epr_protocol(params, run_keys, msg, source, rng)
            acc[variant] += tr.omega
            success[variant] += int(tr.m_hat is not None
                                    and np.array_equal(tr.m_hat, msg))
            counts1[variant].append(tr.monitor.counts1.sum())
            counts2[variant].append(tr.monitor.counts2.sum())
            joints[variant].append(tr.monitor.joint_counts.sum())
    lines = (
        _proportion_line("accept_rate", acc["pm"], acc["epr"], trials),
        _proportion_line("decode_success", success["pm"], success["epr"], trials),
        _mean_line("channel1_errors", np.array(counts1["pm"]),
                   np.array(counts1["epr"])),
        _mean_line("channel2_errors", np.array(counts2["pm"]),
                   np.array(counts2["epr"])),
        _mean_line("joint_errors", np.array(joints["pm"]),
                   np.array(joints["epr"])),
    )
    return EquivalenceReport(trials=trials, beta=noise.beta, gamma=noise.gamma,
                             lines=lines, passed=all(l.ok for l in lines))
