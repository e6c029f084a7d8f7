"""Scalar, stochastic, Sigma-Delta, and block noise-shaping quantizers.

All quantizers map real vectors onto the 2K-level midrise alphabet
{a / (2K-1) : a odd, |a| <= 2K-1}, encoded in b = log2(2K) bits. The
sequential schemes (Sigma-Delta and the beta block scheme) keep a running
state u whose boundedness drives every downstream error guarantee; its peak
magnitude and a range-violation flag are reported as telemetry, never raised
as errors, so long experiment sweeps cannot abort mid-run.

The sequential recursions run on the backend selected in ``qrff._backend``
(compiled extension when available, pure Python otherwise).

Tie-breaking in nearest-level rounding is toward +infinity. Inputs with
|z_i| = 1 exactly are accepted; cos attains the endpoints and floating point
will produce them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend

__all__ = [
    "Alphabet",
    "alphabet_from_bits",
    "msq",
    "stocq",
    "SigmaDelta",
    "Beta",
    "NoiseShapingConfig",
    "QuantizationResult",
    "sigma_delta_r1",
    "sigma_delta_randomized",
    "sigma_delta_general",
    "beta_quantize",
    "quantize",
    "quantize_batch",
]


@dataclass(frozen=True)
class Alphabet:
    """Midrise alphabet with 2K levels a/(2K-1) for odd a, b bits per symbol."""

    bits: int
    values: np.ndarray = field(repr=False)

    @property
    def half_levels(self) -> int:
        """K = 2^(b-1); the alphabet has 2K levels."""
        return 2 ** (self.bits - 1)

    @property
    def state_bound(self) -> float:
        """1/(2K-1): the certified state bound for the stable schemes."""
        return 1.0 / (2 * self.half_levels - 1)


def alphabet_from_bits(bits: int) -> Alphabet:
    """Build the 2^b-level alphabet; b must lie in 1..8."""
    if not isinstance(bits, (int, np.integer)) or isinstance(bits, bool):
        raise TypeError(f"bits must be an integer, got {bits!r}")
    if not 1 <= bits <= 8:
        raise ValueError(f"bits must be in 1..8, got {bits}")
    half = 2 ** (bits - 1)
    numerators = np.arange(-(2 * half - 1), 2 * half, 2, dtype=np.float64)
    return Alphabet(bits=int(bits), values=numerators / (2 * half - 1))


def msq(z: np.ndarray, alphabet: Alphabet) -> np.ndarray:
    """Memoryless scalar quantization: coordinatewise nearest alphabet value.

    Ties round toward +infinity; values outside [-1, 1] clip to the nearest
    extreme. Idempotent on its own output.
    """
    z = np.asarray(z, dtype=np.float64)
    half = alphabet.half_levels
    j = np.floor(z * (2 * half - 1) / 2.0)
    np.clip(j, -half, half - 1, out=j)
    return (2.0 * j + 1.0) / (2 * half - 1)


def stocq(z: np.ndarray, alphabet: Alphabet, rng: np.random.Generator) -> np.ndarray:
    """Stochastic quantization: unbiased randomized rounding per coordinate.

    Each entry is rounded to one of its two bracketing levels s <= z <= t with
    P(t) = (z-s)/(t-s), so E[output] = z. Entries outside [-1, 1] are clipped
    first.
    """
    z = np.asarray(z, dtype=np.float64)
    half = alphabet.half_levels
    t = np.clip(z, -1.0, 1.0) * (2 * half - 1)
    # greatest odd numerator <= t, clipped so the bracket [lo, lo+2] stays in range
    lo = 2.0 * np.floor((t - 1.0) / 2.0) + 1.0
    np.clip(lo, -(2 * half - 1), 2 * half - 3, out=lo)
    p_hi = (t - lo) / 2.0
    take_hi = rng.random(z.shape) < p_hi
    return (lo + 2.0 * take_hi) / (2 * half - 1)


@dataclass(frozen=True)
class SigmaDelta:
    """Sigma-Delta scheme of the given order with feedback filter g.

    ``g = (1,)`` (the delta sequence) is the greedy scheme, which satisfies
    D^r u = y - q exactly. Stable filters for 1-bit high-order schemes may be
    supplied as coefficients; they are never derived here.
    """

    order: int = 1
    g: tuple[float, ...] = (1.0,)

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if len(self.g) == 0:
            raise ValueError("filter g must be non-empty")
        if self.g[0] != 1.0:
            raise ValueError(f"filter g must have g[0] = 1, got {self.g[0]}")


@dataclass(frozen=True)
class Beta:
    """Distributed noise-shaping scheme with expansion base beta in (1, 2)."""

    beta: float

    def __post_init__(self) -> None:
        if not 1.0 < self.beta < 2.0:
            raise ValueError(f"beta must lie in (1, 2), got {self.beta}")


@dataclass(frozen=True)
class NoiseShapingConfig:
    """Quantizer selection plus the block geometry m = block_len * n_blocks.

    ``prescale="auto"`` shrinks beta-scheme inputs by (2K - beta)/(2K - 1) so
    the stability hypothesis holds; the factor is recorded so estimates can be
    divided by its square. Default is "none": the experiments feed raw
    features. For Sigma-Delta schemes "auto" is a no-op.
    """

    scheme: SigmaDelta | Beta
    block_len: int
    n_blocks: int
    alphabet: Alphabet
    prescale: str = "none"

    def __post_init__(self) -> None:
        if self.block_len < 1:
            raise ValueError(f"block_len must be >= 1, got {self.block_len}")
        if self.n_blocks < 1:
            raise ValueError(f"n_blocks must be >= 1, got {self.n_blocks}")
        if self.prescale not in ("none", "auto"):
            raise ValueError(f"prescale must be 'none' or 'auto', got {self.prescale!r}")
        if isinstance(self.scheme, SigmaDelta):
            r = self.scheme.order
            if (self.block_len - 1) % r != 0:
                raise ValueError(
                    f"block_len={self.block_len} is not of the form "
                    f"r*lt - r + 1 for order r={r}"
                )

    @property
    def m(self) -> int:
        return self.block_len * self.n_blocks

    @property
    def prescale_factor(self) -> float:
        if self.prescale == "auto" and isinstance(self.scheme, Beta):
            two_k = 2 * self.alphabet.half_levels
            return (two_k - self.scheme.beta) / (two_k - 1)
        return 1.0


@dataclass(frozen=True)
class QuantizationResult:
    """Quantized codes plus state-variable telemetry.

    ``u`` is the full state trajectory (used by the reconstruction-identity
    checks), ``max_state`` its peak magnitude. ``overload`` is True when some
    quantizer input left the alphabet's covered range [-2K/(2K-1), 2K/(2K-1)],
    which for the first-order and beta schemes is exactly the event
    max_state > 1/(2K-1). It is telemetry, not an error.
    """

    q: np.ndarray
    u: np.ndarray
    max_state: float
    overload: bool

    @property
    def u_final(self) -> float:
        return float(self.u[-1])


def _as_vector(z) -> np.ndarray:
    z = np.ascontiguousarray(z, dtype=np.float64)
    if z.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {z.shape}")
    return z


def sigma_delta_r1(z, alphabet: Alphabet, u0: float = 0.0) -> QuantizationResult:
    """First-order scheme: q_i = msq(z_i + u_{i-1}), u_i = u_{i-1} + z_i - q_i.

    With u0 = 0 and ||z||_inf <= 1 the state satisfies max|u| <= 1/(2K-1), so
    overload stays False.
    """
    z = _as_vector(z)
    q = np.empty_like(z)
    u = np.empty_like(z)
    max_state, clipped = _backend.sd1(z, alphabet.half_levels, float(u0), q, u)
    return QuantizationResult(q=q, u=u, max_state=max_state, overload=bool(clipped))


def sigma_delta_randomized(z, alphabet: Alphabet, rng: np.random.Generator) -> QuantizationResult:
    """First-order scheme with u0 drawn uniformly from [-1/(2^b-1), 1/(2^b-1)].

    Conditioned on any z in [-1, 1]^m, every state u_k is again uniform on
    that interval.
    """
    bound = alphabet.state_bound
    u0 = rng.uniform(-bound, bound)
    return sigma_delta_r1(z, alphabet, u0=u0)


def _greedy_h_tail(order: int) -> np.ndarray:
    # h = delta0 - D^r delta0, so h_j = (-1)^(j+1) * C(r, j) for j = 1..r
    return np.array(
        [(-1.0) ** (j + 1) * math.comb(order, j) for j in range(1, order + 1)]
    )


def _filter_h_tail(order: int, g: tuple[float, ...]) -> np.ndarray:
    if g == (1.0,):
        return _greedy_h_tail(order)
    diff_r = np.array([(-1.0) ** j * math.comb(order, j) for j in range(order + 1)])
    h_full = -np.convolve(np.asarray(g, dtype=np.float64), diff_r)
    h_full[0] += 1.0  # h = delta0 - D^r g; causality needs h_0 = 0, i.e. g_0 = 1
    if h_full[0] != 0.0:
        raise ValueError("filter g must satisfy g[0] = 1 so the scheme is causal")
    return h_full[1:]


def sigma_delta_general(
    z,
    alphabet: Alphabet,
    order: int = 1,
    g: tuple[float, ...] | None = None,
) -> QuantizationResult:
    """Order-r noise shaping via q_i = msq((h*v)_i + z_i) with h = delta0 - D^r g.

    The reported state is u = g * v, which satisfies D^r u = z - q. With the
    default g = (1,) this is the greedy scheme; for order 1 it reproduces
    :func:`sigma_delta_r1` with u0 = 0 bit-exactly. No certified state bound
    exists for r >= 2 with the greedy filter, so overload reports quantizer
    range violations instead.
    """
    scheme = SigmaDelta(order=order, g=(1.0,) if g is None else tuple(g))
    z = _as_vector(z)
    q = np.empty_like(z)
    v = np.empty_like(z)
    h_tail = np.ascontiguousarray(_filter_h_tail(scheme.order, scheme.g))
    _, clipped = _backend.sd_filtered(z, alphabet.half_levels, h_tail, q, v)
    if scheme.g == (1.0,):
        u = v
    else:
        u = np.convolve(np.asarray(scheme.g), v)[: z.shape[0]]
    max_state = float(np.max(np.abs(u))) if z.size else 0.0
    return QuantizationResult(q=q, u=u, max_state=max_state, overload=bool(clipped))


def beta_quantize(z, config: NoiseShapingConfig) -> QuantizationResult:
    """Block noise shaping: u_i = z_i + beta*u_{i-1} - q_i, state reset each block.

    Satisfies H u = z - q for the block-bidiagonal H = I_p (x) H_beta. Under
    ||z||_inf <= (2K - beta)/(2K - 1) the state obeys max|u| <= 1/(2K-1);
    beyond that, overload flags the violation and quantization still completes.
    Blocks are independent, so distinct blocks may be processed in parallel.
    """
    if not isinstance(config.scheme, Beta):
        raise TypeError("beta_quantize requires a config with a Beta scheme")
    z = _as_vector(z)
    if z.shape[0] != config.m:
        raise ValueError(
            f"input length {z.shape[0]} does not equal block_len*n_blocks = {config.m}"
        )
    q = np.empty_like(z)
    u = np.empty_like(z)
    max_state, clipped = _backend.beta_run(
        z, config.alphabet.half_levels, config.scheme.beta, config.block_len, q, u
    )
    return QuantizationResult(q=q, u=u, max_state=max_state, overload=bool(clipped))


def quantize(z, config: NoiseShapingConfig, rng: np.random.Generator | None = None) -> QuantizationResult:
    """Run the configured scheme on one vector (no prescaling applied here).

    Sigma-Delta of order 1 uses the randomized initialization when ``rng`` is
    given and u0 = 0 otherwise; higher orders use the filtered recursion.
    """
    if isinstance(config.scheme, Beta):
        return beta_quantize(z, config)
    if config.scheme.order == 1 and config.scheme.g == (1.0,):
        if rng is not None:
            return sigma_delta_randomized(z, config.alphabet, rng)
        return sigma_delta_r1(z, config.alphabet)
    return sigma_delta_general(z, config.alphabet, config.scheme.order, config.scheme.g)


def quantize_batch(
    Z: np.ndarray,
    config: NoiseShapingConfig,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Quantize each row of Z (n, m). Returns (Q, max_states, overloads).

    Rows are independent; randomized initializations are drawn row by row in
    order from ``rng``.
    """
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    if Z.ndim != 2:
        raise ValueError(f"expected a 2-D batch, got shape {Z.shape}")
    n, m = Z.shape
    if m != config.m:
        raise ValueError(f"row length {m} does not equal block_len*n_blocks = {config.m}")
    Q = np.empty_like(Z)
    max_states = np.empty(n)
    overloads = np.empty(n, dtype=bool)
    half = config.alphabet.half_levels

    if isinstance(config.scheme, Beta):
        u = np.empty(m)
        for i in range(n):
            max_states[i], overloads[i] = _backend.beta_run(
                Z[i], half, config.scheme.beta, config.block_len, Q[i], u
            )
        return Q, max_states, overloads

    order, g = config.scheme.order, config.scheme.g
    if order == 1 and g == (1.0,):
        bound = config.alphabet.state_bound
        u0s = rng.uniform(-bound, bound, n) if rng is not None else np.zeros(n)
        u = np.empty(m)
        for i in range(n):
            max_states[i], overloads[i] = _backend.sd1(Z[i], half, u0s[i], Q[i], u)
        return Q, max_states, overloads

    h_tail = np.ascontiguousarray(_filter_h_tail(order, g))
    v = np.empty(m)
    for i in range(n):
        _, overloads[i] = _backend.sd_filtered(Z[i], half, h_tail, Q[i], v)
        if g == (1.0,):
            max_states[i] = np.max(np.abs(v)) if m else 0.0
        else:
            ui = np.convolve(np.asarray(g), v)[:m]
            max_states[i] = np.max(np.abs(ui)) if m else 0.0
    return Q, max_states, overloads
