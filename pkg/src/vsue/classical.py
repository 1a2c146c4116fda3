"""Classical crypto and coding primitives.

GF(2^nu) carryless arithmetic on Python ints, the invertible pairwise
independent hash F_u(x) = a*x + b, a Wegman-Carter style one-time MAC built
from it, and binary linear codes with coset-leader syndrome decoding.

Bit-order convention everywhere: index 0 is the most significant bit, so
"the ell most significant bits" of a nu-bit value v is v >> (nu - ell).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


class FieldMismatchError(ValueError):
    """Operands belong to different GF(2^nu) fields."""


class NonInvertibleSeedError(ValueError):
    """Hash seed has a = 0, so F_u is not invertible."""


# Lowest-weight irreducible polynomial per field degree (trinomial if one
# exists, else the lexicographically first pentanomial). Fixed so that all
# outputs are reproducible bit-exactly.
IRREDUCIBLE_POLY = {
    1: 0x3, 2: 0x7, 3: 0xb, 4: 0x13, 5: 0x25, 6: 0x43, 7: 0x83,
    8: 0x11b, 9: 0x203, 10: 0x409, 11: 0x805, 12: 0x1009, 13: 0x201b,
    14: 0x4021, 15: 0x8003, 16: 0x1002b, 17: 0x20009, 18: 0x40009,
    19: 0x80027, 20: 0x100009, 21: 0x200005, 22: 0x400003, 23: 0x800021,
    24: 0x100001b, 25: 0x2000009, 26: 0x400001b, 27: 0x8000027,
    28: 0x10000003, 29: 0x20000005, 30: 0x40000003, 31: 0x80000009,
    32: 0x10000008d, 33: 0x200000401, 34: 0x400000081, 35: 0x800000005,
    36: 0x1000000201, 37: 0x2000000053, 38: 0x4000000063, 39: 0x8000000011,
    40: 0x10000000039, 41: 0x20000000009, 42: 0x40000000081,
    43: 0x80000000059, 44: 0x100000000021, 45: 0x20000000001b,
    46: 0x400000000003, 47: 0x800000000021, 48: 0x100000000002d,
    49: 0x2000000000201, 50: 0x400000000001d, 51: 0x800000000004b,
    52: 0x10000000000009, 53: 0x20000000000047, 54: 0x40000000000201,
    55: 0x80000000000081, 56: 0x100000000000095, 57: 0x200000000000011,
    58: 0x400000000080001, 59: 0x800000000000095, 60: 0x1000000000000003,
    61: 0x2000000000000027, 62: 0x4000000020000001, 63: 0x8000000000000003,
    64: 0x1000000000000001b,
}


@dataclass(frozen=True)
class GFElement:
    """Element of GF(2^field_bits), value stored as a field_bits-bit int."""

    field_bits: int
    value: int

    def __post_init__(self):
        if not 1 <= self.field_bits <= 64:
            raise ValueError(f"field_bits must be in 1..64, got {self.field_bits}")
        if not 0 <= self.value < (1 << self.field_bits):
            raise ValueError(
                f"value {self.value:#x} out of range for GF(2^{self.field_bits})")


def _check_same_field(x: GFElement, y: GFElement):
    if x.field_bits != y.field_bits:
        raise FieldMismatchError(
            f"GF(2^{x.field_bits}) vs GF(2^{y.field_bits})")


def gf_add(x: GFElement, y: GFElement) -> GFElement:
    _check_same_field(x, y)
    return GFElement(x.field_bits, x.value ^ y.value)


def gf_mul(x: GFElement, y: GFElement) -> GFElement:
    """Carryless product reduced modulo the fixed irreducible polynomial."""
    _check_same_field(x, y)
    nu = x.field_bits
    poly = IRREDUCIBLE_POLY[nu]
    a, b, acc = x.value, y.value, 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a >> nu:
            a ^= poly
    return GFElement(nu, acc)


def gf_pow(x: GFElement, e: int) -> GFElement:
    result = GFElement(x.field_bits, 1)
    base = x
    while e:
        if e & 1:
            result = gf_mul(result, base)
        base = gf_mul(base, base)
        e >>= 1
    return result


def gf_inv(x: GFElement) -> GFElement:
    """Multiplicative inverse via x^(2^nu - 2); zero has no inverse."""
    if x.value == 0:
        raise ZeroDivisionError("zero has no inverse in GF(2^nu)")
    return gf_pow(x, (1 << x.field_bits) - 2)


@dataclass(frozen=True)
class HashSeed:
    """Seed u = (a, b) of the invertible pairwise-independent hash family."""

    a: GFElement
    b: GFElement

    def __post_init__(self):
        _check_same_field(self.a, self.b)

    @property
    def field_bits(self) -> int:
        return self.a.field_bits


def random_hash_seed(field_bits: int, rng: np.random.Generator,
                     invertible: bool = True) -> HashSeed:
    """Draw a uniform seed; with invertible=True, a is drawn nonzero."""
    hi = 1 << field_bits
    a = int(rng.integers(1 if invertible else 0, hi))
    b = int(rng.integers(0, hi))
    return HashSeed(GFElement(field_bits, a), GFElement(field_bits, b))


def hash_full(u: HashSeed, x: int) -> int:
    """F_u(x) = a*x + b over GF(2^nu)."""
    nu = u.field_bits
    return gf_add(gf_mul(u.a, GFElement(nu, x)), u.b).value


def hash_phi(u: HashSeed, x: int, ell: int) -> int:
    """Phi_u(x): the ell most significant bits of F_u(x)."""
    nu = u.field_bits
    if not 0 < ell <= nu:
        raise ValueError(f"output length {ell} must be in 1..{nu}")
    return hash_full(u, x) >> (nu - ell)


def hash_inv(u: HashSeed, c: int, r: int, ell: int) -> int:
    """Preimage z with Phi_u(z) = c, selected by the (nu-ell)-bit padding r.

    Computes F_u^{-1}(c || r); distinct r give distinct preimages.
    """
    nu = u.field_bits
    if not 0 < ell <= nu:
        raise ValueError(f"output length {ell} must be in 1..{nu}")
    if not 0 <= c < (1 << ell):
        raise ValueError(f"hash value {c:#x} out of range for {ell} bits")
    if not 0 <= r < (1 << (nu - ell)):
        raise ValueError(f"padding {r:#x} out of range for {nu - ell} bits")
    if u.a.value == 0:
        raise NonInvertibleSeedError("seed has a = 0; F_u is not invertible")
    w = (c << (nu - ell)) | r
    return gf_mul(gf_add(GFElement(nu, w), u.b), gf_inv(u.a)).value


@dataclass(frozen=True)
class MacKey:
    """One-time MAC key: hash seed over GF(2^nu_mac) plus the tag width."""

    seed: HashSeed
    tag_bits: int

    def __post_init__(self):
        if not 0 < self.tag_bits <= self.seed.field_bits:
            raise ValueError("tag_bits must be in 1..field_bits")


def random_mac_key(field_bits: int, rng: np.random.Generator,
                   tag_bits: int | None = None) -> MacKey:
    return MacKey(random_hash_seed(field_bits, rng, invertible=False),
                  tag_bits if tag_bits is not None else field_bits)


def mac_tag(key: MacKey, message: np.ndarray) -> np.ndarray:
    """Polynomial-evaluation MAC over the message bits.

    The message is split into nu-bit blocks (last block zero-padded), the bit
    length is appended as a final block to make the encoding injective, and
    the blocks are hashed with Horner evaluation keyed by `a`, offset by `b`,
    then truncated to tag_bits. Returns the tag as a bit array.
    """
    bits = np.asarray(message, dtype=np.uint8).ravel()
    nu = key.seed.field_bits
    blocks = []
    for start in range(0, len(bits), nu):
        chunk = bits[start:start + nu]
        val = 0
        for bit in chunk:
            val = (val << 1) | int(bit)
        val <<= nu - len(chunk)  # zero-pad on the least significant side
        blocks.append(val)
    blocks.append(len(bits) & ((1 << nu) - 1))
    acc = GFElement(nu, 0)
    for block in blocks:
        acc = gf_mul(gf_add(acc, GFElement(nu, block)), key.seed.a)
    tag_val = (acc.value ^ key.seed.b.value) >> (nu - key.tag_bits)
    return int_to_bits(tag_val, key.tag_bits)


def mac_verify(key: MacKey, message: np.ndarray, tag: np.ndarray) -> bool:
    tag = np.asarray(tag, dtype=np.uint8).ravel()
    expected = mac_tag(key, message)
    return len(tag) == len(expected) and bool(np.all(tag == expected))


def bits_to_int(bits: np.ndarray) -> int:
    """MSB-first bit array -> int."""
    val = 0
    for bit in np.asarray(bits, dtype=np.uint8).ravel():
        val = (val << 1) | int(bit)
    return val


def int_to_bits(value: int, width: int) -> np.ndarray:
    """int -> MSB-first bit array of the given width."""
    if not 0 <= value < (1 << width):
        raise ValueError(f"value {value:#x} does not fit in {width} bits")
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)],
                    dtype=np.uint8)


# ---------------------------------------------------------------------------
# Linear codes with coset-leader syndrome decoding
# ---------------------------------------------------------------------------

@dataclass
class LinearCode:
    """Binary [n, k] linear code given by its parity check matrix.

    `syndrome_table` maps each syndrome (as an int, MSB-first) to the
    minimal-weight error pattern of its coset. It is built on demand for
    single-block codes (n <= 24) and composed blockwise for block codes.
    """

    n: int
    k: int
    parity_check: np.ndarray
    syndrome_table: dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    block: "LinearCode | None" = field(default=None, repr=False)

    MAX_TABLE_N = 24

    def __post_init__(self):
        self.parity_check = np.asarray(self.parity_check, dtype=np.uint8) % 2
        rows, cols = self.parity_check.shape
        if cols != self.n or rows != self.n - self.k:
            raise ValueError(
                f"parity check shape {self.parity_check.shape} does not match "
                f"[{self.n}, {self.k}]")
        if self.block is None and not self.syndrome_table:
            if self.n > self.MAX_TABLE_N:
                raise ValueError(
                    f"table decoding limited to n <= {self.MAX_TABLE_N}; "
                    "compose larger codes from blocks")
            self.syndrome_table = _coset_leader_table(self.parity_check)

    @property
    def syndrome_bits(self) -> int:
        return self.n - self.k

    @classmethod
    def from_parity_check_file(cls, path) -> "LinearCode":
        """Load a parity check from a plain text file, one 0/1 row per line."""
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip().replace(" ", "")
                if not line or line.startswith("#"):
                    continue
                if set(line) - {"0", "1"}:
                    raise ValueError(f"invalid parity-check row: {line!r}")
                rows.append([int(ch) for ch in line])
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("parity-check file must hold equal-length 0/1 rows")
        mat = np.array(rows, dtype=np.uint8)
        return cls(n=mat.shape[1], k=mat.shape[1] - mat.shape[0], parity_check=mat)


def _coset_leader_table(parity_check: np.ndarray) -> dict[int, np.ndarray]:
    """Enumerate error patterns by increasing weight until every coset has a leader."""
    rows, n = parity_check.shape
    total = 1 << rows
    table: dict[int, np.ndarray] = {0: np.zeros(n, dtype=np.uint8)}
    for weight in range(1, n + 1):
        if len(table) == total:
            break
        for positions in itertools.combinations(range(n), weight):
            err = np.zeros(n, dtype=np.uint8)
            err[list(positions)] = 1
            key = bits_to_int(parity_check @ err % 2)
            if key not in table:
                table[key] = err
                if len(table) == total:
                    break
    if len(table) != total:
        raise ValueError("parity check rows are linearly dependent; "
                         "some syndromes unreachable")
    return table


def syn(code: LinearCode, word: np.ndarray) -> np.ndarray:
    """Syndrome: parity_check . word over GF(2)."""
    word = np.asarray(word, dtype=np.uint8).ravel()
    if len(word) != code.n:
        raise ValueError(f"word length {len(word)} != block length {code.n}")
    return (code.parity_check @ word % 2).astype(np.uint8)


def syn_dec(code: LinearCode, syndrome: np.ndarray) -> np.ndarray:
    """Coset leader (minimal-weight error pattern) for the given syndrome."""
    syndrome = np.asarray(syndrome, dtype=np.uint8).ravel()
    if len(syndrome) != code.syndrome_bits:
        raise ValueError(
            f"syndrome length {len(syndrome)} != {code.syndrome_bits}")
    if code.block is not None:
        sub = code.block
        parts = [syn_dec(sub, syndrome[i:i + sub.syndrome_bits])
                 for i in range(0, len(syndrome), sub.syndrome_bits)]
        return np.concatenate(parts)
    return code.syndrome_table[bits_to_int(syndrome)].copy()


def hamming_7_4() -> LinearCode:
    """The perfect single-error-correcting [7,4] Hamming code."""
    h = np.array([[1, 0, 1, 0, 1, 0, 1],
                  [0, 1, 1, 0, 0, 1, 1],
                  [0, 0, 0, 1, 1, 1, 1]], dtype=np.uint8)
    return LinearCode(n=7, k=4, parity_check=h)


def code_14_6() -> LinearCode:
    """A [14,6] minimum-distance-5 code (two-error correcting).

    Obtained by shortening the two-error-correcting [15,7] cyclic code with
    generator x^8+x^7+x^6+x^4+1; all weight-2 error patterns are coset leaders.
    """
    h = np.array([
        [1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0],
        [1, 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0],
        [0, 1, 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0],
        [0, 0, 1, 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0],
        [1, 0, 1, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0],
        [1, 1, 0, 1, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0],
        [1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 1, 0],
        [0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 1],
    ], dtype=np.uint8)
    return LinearCode(n=14, k=6, parity_check=h)


def random_systematic_code(n: int, k: int,
                           rng: np.random.Generator) -> LinearCode:
    """Random systematic code H = [P^T | I] with table-based decoding (n <= 24)."""
    if not 0 < k < n <= LinearCode.MAX_TABLE_N:
        raise ValueError(f"need 0 < k < n <= {LinearCode.MAX_TABLE_N}")
    p = rng.integers(0, 2, size=(k, n - k)).astype(np.uint8)
    h = np.concatenate([p.T, np.eye(n - k, dtype=np.uint8)], axis=1)
    return LinearCode(n=n, k=k, parity_check=h)


def block_code(base: LinearCode, copies: int) -> LinearCode:
    """Code acting independently on `copies` consecutive blocks of `base`."""
    if copies < 1:
        raise ValueError("copies must be positive")
    if base.block is not None:
        raise ValueError("cannot nest block codes")
    if copies == 1:
        return base
    h = np.zeros((copies * base.syndrome_bits, copies * base.n), dtype=np.uint8)
    for i in range(copies):
        h[i * base.syndrome_bits:(i + 1) * base.syndrome_bits,
          i * base.n:(i + 1) * base.n] = base.parity_check
    return LinearCode(n=copies * base.n, k=copies * base.k,
                      parity_check=h, block=base)
