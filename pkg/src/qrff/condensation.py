"""Condensation operators, bit packing, and memory accounting.

The condensation operator is the sparse block matrix V = I_p (x) v for a
length-lambda weight vector v; its normalized form Vt = sqrt(2)/(sqrt(p)*||v||_2) * V
satisfies ||Vt||_F^2 = 2, which makes <Vt z(x), Vt z(y)> an unbiased estimate
of the kernel. Condensed features are computed as block dot products; the
p x m matrix is never materialized.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .quantizers import Alphabet, Beta, NoiseShapingConfig, SigmaDelta, quantize_batch

__all__ = [
    "WeightVector",
    "CondensedFeature",
    "PackedStream",
    "sigma_delta_weights",
    "beta_weights",
    "condensation_weights",
    "condense",
    "encode",
    "encode_batch",
    "memory_footprint",
    "golden_beta_exponent",
    "beta_theoretical_bits",
    "pack",
    "unpack",
]


@dataclass(frozen=True)
class WeightVector:
    """Block weight vector v with its scheme tag.

    Sigma-Delta weights are the (positive, symmetric, integer) coefficients of
    (1 + z + ... + z^(lt-1))^r; beta weights are the geometric vector
    (beta^-1, ..., beta^-lambda).
    """

    v: np.ndarray = field(repr=False)
    kind: str  # "sigma_delta" | "beta"
    order: int | None = None
    lam_tilde: int | None = None
    beta: float | None = None

    @property
    def block_len(self) -> int:
        return int(self.v.shape[0])

    @property
    def norm1(self) -> float:
        return float(np.sum(np.abs(self.v)))

    @property
    def norm2(self) -> float:
        return float(np.linalg.norm(self.v))


@dataclass(frozen=True)
class CondensedFeature:
    """Length-p condensed feature vector, the object all estimates consume.

    ``source`` is "quantized" or "unquantized"; ``prescale`` records the input
    scaling applied before quantization (estimates divide by its square).
    """

    y: np.ndarray
    normalizer: float
    source: str
    scheme: str  # "sigma_delta" | "beta"
    bits: int | None = None
    prescale: float = 1.0

    @property
    def n_blocks(self) -> int:
        return int(self.y.shape[0])


def sigma_delta_weights(order: int, lam_tilde: int) -> WeightVector:
    """Coefficients of (1 + z + ... + z^(lt-1))^r, length r*lt - r + 1."""
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if lam_tilde < 1:
        raise ValueError(f"lam_tilde must be >= 1, got {lam_tilde}")
    ones = np.ones(lam_tilde)
    v = ones
    for _ in range(order - 1):
        v = np.convolve(v, ones)
    return WeightVector(v=v, kind="sigma_delta", order=order, lam_tilde=lam_tilde)


def beta_weights(beta: float, block_len: int) -> WeightVector:
    """Geometric weights (beta^-1, beta^-2, ..., beta^-lambda)."""
    if not 1.0 < beta < 2.0:
        raise ValueError(f"beta must lie in (1, 2), got {beta}")
    if block_len < 1:
        raise ValueError(f"block_len must be >= 1, got {block_len}")
    v = beta ** -np.arange(1.0, block_len + 1)
    return WeightVector(v=v, kind="beta", beta=beta)


def condensation_weights(config: NoiseShapingConfig) -> WeightVector:
    """The weight vector matching a quantizer configuration."""
    if isinstance(config.scheme, Beta):
        return beta_weights(config.scheme.beta, config.block_len)
    r = config.scheme.order
    lam_tilde = (config.block_len - 1) // r + 1
    return sigma_delta_weights(r, lam_tilde)


def condense(
    values: np.ndarray,
    weights: WeightVector,
    n_blocks: int,
    source: str = "unquantized",
    bits: int | None = None,
    prescale: float = 1.0,
) -> CondensedFeature:
    """Apply the normalized condensation operator to codes or raw features.

    y_k = sqrt(2)/(sqrt(p)*||v||_2) * sum_j v_j * values_{(k-1)*lambda + j}.
    """
    values = np.asarray(values, dtype=np.float64)
    lam = weights.block_len
    if values.shape != (lam * n_blocks,):
        raise ValueError(
            f"input length {values.shape} does not match block_len*{n_blocks} = {lam * n_blocks}"
        )
    normalizer = math.sqrt(2.0) / (math.sqrt(n_blocks) * weights.norm2)
    y = normalizer * (values.reshape(n_blocks, lam) @ weights.v)
    return CondensedFeature(
        y=y,
        normalizer=normalizer,
        source=source,
        scheme=weights.kind,
        bits=bits,
        prescale=prescale,
    )


def encode(
    z: np.ndarray,
    config: NoiseShapingConfig,
    rng: np.random.Generator | None = None,
    quantized: bool = True,
) -> CondensedFeature:
    """Full per-vector pipeline: (prescale, quantize,) condense.

    With ``quantized=False`` the raw features are condensed with no prescale,
    giving the unquantized reference object.
    """
    F, scale = encode_batch(np.asarray(z, dtype=np.float64)[None, :], config, rng, quantized)
    weights = condensation_weights(config)
    return CondensedFeature(
        y=F[0],
        normalizer=math.sqrt(2.0) / (math.sqrt(config.n_blocks) * weights.norm2),
        source="quantized" if quantized else "unquantized",
        scheme=weights.kind,
        bits=config.alphabet.bits if quantized else None,
        prescale=scale,
    )


def encode_batch(
    Z: np.ndarray,
    config: NoiseShapingConfig,
    rng: np.random.Generator | None = None,
    quantized: bool = True,
) -> tuple[np.ndarray, float]:
    """Condense each row of Z (n, m) into an (n, p) matrix.

    Returns (Y, prescale). Estimates built from the rows must be divided by
    prescale**2; equivalently Y/prescale is a feature matrix whose linear Gram
    estimates the kernel directly.
    """
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] != config.m:
        raise ValueError(f"expected rows of length {config.m}, got shape {Z.shape}")
    weights = condensation_weights(config)
    p = config.n_blocks
    if quantized:
        scale = config.prescale_factor
        Q, _, _ = quantize_batch(Z if scale == 1.0 else scale * Z, config, rng)
        source = Q
    else:
        scale = 1.0
        source = Z
    normalizer = math.sqrt(2.0) / (math.sqrt(p) * weights.norm2)
    Y = normalizer * (source.reshape(Z.shape[0], p, weights.block_len) @ weights.v)
    return Y, scale


def memory_footprint(
    method: str,
    m: int,
    bits: int | None = None,
    n_blocks: int | None = None,
    block_len: int | None = None,
    order: int | None = None,
    beta: float | None = None,
) -> int:
    """Bits needed to store one encoded sample, per method.

    Full-precision features count 32 bits per coordinate ("rff" and "semiq");
    "stocq" stores m*b bits. "sigma_delta" stores one block value per block:
    the block sum v.q takes exactly (2K-1)*||v||_1 + 1 distinct values, so
    p * ceil(log2((2K-1)*||v||_1 + 1)) bits suffice. "beta" admits no further
    compression in general and stores m*b bits (see
    :func:`beta_theoretical_bits` for the special expansion bases).
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if method in ("rff", "semiq"):
        return 32 * m
    if method == "stocq":
        if bits is None:
            raise ValueError("stocq footprint needs bits")
        return m * bits
    if method == "beta":
        if bits is None:
            raise ValueError("beta footprint needs bits")
        if block_len is not None and n_blocks is not None and block_len * n_blocks != m:
            raise ValueError(f"m={m} inconsistent with block_len*n_blocks")
        return m * bits
    if method == "sigma_delta":
        if bits is None or n_blocks is None or block_len is None or order is None:
            raise ValueError("sigma_delta footprint needs bits, n_blocks, block_len, order")
        if block_len * n_blocks != m:
            raise ValueError(
                f"m={m} inconsistent with block_len={block_len} * n_blocks={n_blocks}"
            )
        if (block_len - 1) % order != 0:
            raise ValueError(f"block_len={block_len} invalid for order={order}")
        lam_tilde = (block_len - 1) // order + 1
        norm1 = lam_tilde**order
        two_k = 2**bits
        distinct = (two_k - 1) * norm1 + 1
        return n_blocks * math.ceil(math.log2(distinct))
    raise ValueError(f"unknown method {method!r}")


def golden_beta_exponent(beta: float, max_k: int = 64, tol: float = 1e-9) -> int | None:
    """Smallest integer k > 1 with beta^k = beta + 1, or None.

    Such bases (k = 2 gives the golden ratio) make the condensed beta values
    representable with m*log2(beta) bits.
    """
    for k in range(2, max_k + 1):
        if abs(beta**k - (beta + 1.0)) <= tol:
            return k
    return None


def beta_theoretical_bits(beta: float, m: int) -> float | None:
    """m*log2(beta) when beta satisfies beta^k = beta + 1 for integer k > 1.

    Reported as a theoretical count only; the packed payload still stores b
    bits per symbol.
    """
    if golden_beta_exponent(beta) is None:
        return None
    return m * math.log2(beta)


_MAGIC = b"QRFFPACK"
_HEADER = struct.Struct("<8sBBBIIBdd")
_VERSION = 1
_SCHEME_IDS = {"none": 0, "sigma_delta": 1, "beta": 2}
_SCHEME_NAMES = {v: k for k, v in _SCHEME_IDS.items()}


@dataclass(frozen=True)
class PackedStream:
    """Bit-packed code vector with a self-describing header.

    Layout: 8-byte magic "QRFFPACK", version u8, scheme id u8, b u8,
    lambda u32, p u32, r u8, beta f64, prescale f64, then the payload with b
    bits per symbol packed LSB-first. Little-endian throughout.
    """

    scheme: str
    bits: int
    block_len: int
    n_blocks: int
    order: int
    beta: float
    prescale: float
    payload: bytes = field(repr=False)

    @property
    def m(self) -> int:
        return self.block_len * self.n_blocks

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(
            _MAGIC,
            _VERSION,
            _SCHEME_IDS[self.scheme],
            self.bits,
            self.block_len,
            self.n_blocks,
            self.order,
            self.beta,
            self.prescale,
        )
        return header + self.payload

    @classmethod
    def from_bytes(cls, raw: bytes) -> "PackedStream":
        if len(raw) < _HEADER.size:
            raise ValueError(f"truncated header: {len(raw)} bytes < {_HEADER.size}")
        magic, version, scheme_id, bits, lam, p, order, beta, prescale = _HEADER.unpack(
            raw[: _HEADER.size]
        )
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        if version != _VERSION:
            raise ValueError(f"unsupported version {version}")
        if scheme_id not in _SCHEME_NAMES:
            raise ValueError(f"unknown scheme id {scheme_id}")
        if not 1 <= bits <= 8:
            raise ValueError(f"corrupt header: bits={bits}")
        m = lam * p
        need = (m * bits + 7) // 8
        payload = raw[_HEADER.size :]
        if len(payload) < need:
            raise ValueError(f"truncated payload: {len(payload)} bytes < {need}")
        return cls(
            scheme=_SCHEME_NAMES[scheme_id],
            bits=bits,
            block_len=lam,
            n_blocks=p,
            order=order,
            beta=beta,
            prescale=prescale,
            payload=bytes(payload[:need]),
        )


def pack(
    codes: np.ndarray,
    alphabet: Alphabet,
    scheme: str = "none",
    block_len: int | None = None,
    n_blocks: int | None = None,
    order: int = 1,
    beta: float = 0.0,
    prescale: float = 1.0,
) -> PackedStream:
    """Pack alphabet codes at b bits per symbol via the index (a + 2K-1)/2.

    ``block_len``/``n_blocks`` default to a single block spanning the vector.
    Rejects values that are not alphabet levels.
    """
    codes = np.asarray(codes, dtype=np.float64)
    half = alphabet.half_levels
    numerators = codes * (2 * half - 1)
    a = np.rint(numerators)
    if not np.allclose(numerators, a, atol=1e-9) or np.any(np.abs(a) > 2 * half - 1) or np.any(
        a.astype(np.int64) % 2 == 0
    ):
        raise ValueError("codes contain values outside the alphabet")
    idx = ((a.astype(np.int64) + 2 * half - 1) // 2).astype(np.uint8)
    m = codes.shape[0]
    if block_len is None:
        block_len, n_blocks = m, 1
    if n_blocks is None or block_len * n_blocks != m:
        raise ValueError(f"block_len*n_blocks must equal m={m}")
    b = alphabet.bits
    bit_matrix = (idx[:, None] >> np.arange(b, dtype=np.uint8)) & 1
    payload = np.packbits(bit_matrix.reshape(-1), bitorder="little").tobytes()
    return PackedStream(
        scheme=scheme,
        bits=b,
        block_len=block_len,
        n_blocks=n_blocks,
        order=order,
        beta=beta,
        prescale=prescale,
        payload=payload,
    )


def unpack(stream: PackedStream | bytes) -> np.ndarray:
    """Recover the exact code vector from a packed stream."""
    if isinstance(stream, (bytes, bytearray)):
        stream = PackedStream.from_bytes(bytes(stream))
    m, b = stream.m, stream.bits
    bits = np.unpackbits(
        np.frombuffer(stream.payload, dtype=np.uint8), bitorder="little", count=m * b
    )
    idx = bits.reshape(m, b) @ (1 << np.arange(b, dtype=np.int64))
    half = 2 ** (b - 1)
    a = 2 * idx - (2 * half - 1)
    return a / (2 * half - 1)
