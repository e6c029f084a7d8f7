"""Exact RBF kernel, the approximate estimators, Gram construction, and
spectral sandwich checking.

Five approximations of k(x, y) are provided: the plain full-precision
estimate (in :mod:`qrff.features`), the one-bit universal estimate, the
semi-quantized estimate, the stochastic-quantization estimate, and the
condensed noise-shaped estimate. All are pure functions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .condensation import CondensedFeature
from .features import RFFMap

__all__ = [
    "GramMatrix",
    "SpectralCheckReport",
    "ScanResult",
    "rbf_kernel",
    "rbf_gram",
    "universal_estimate",
    "semiq_estimate",
    "stocq_estimate",
    "condensed_estimate",
    "gram",
    "condensed_gram",
    "spectral_delta",
    "spectral_sandwich_check",
    "sup_error_scan",
]


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric matrix of pairwise kernel estimates with its estimator tag."""

    entries: np.ndarray = field(repr=False)
    kind: str

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])


@dataclass(frozen=True)
class SpectralCheckReport:
    """Margins of the two-sided spectral approximation test.

    ``holds`` is True iff both margin eigenvalues are >= -1e-10.
    """

    delta: float
    lower_margin: float
    upper_margin: float
    holds: bool


@dataclass(frozen=True)
class ScanResult:
    """Pointwise error scan over a grid of pairs."""

    max_error: float
    errors: np.ndarray = field(repr=False)


def rbf_kernel(x: np.ndarray, y: np.ndarray, gamma: float) -> float:
    """exp(-gamma * ||x - y||^2); depends on x - y only."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    diff = x - y
    return float(np.exp(-gamma * np.dot(diff, diff)))


def rbf_gram(X: np.ndarray, gamma: float, Y: np.ndarray | None = None) -> GramMatrix:
    """Exact RBF Gram matrix; PSD with unit diagonal when Y is None."""
    X = np.asarray(X, dtype=np.float64)
    Y = X if Y is None else np.asarray(Y, dtype=np.float64)
    sq = (
        np.sum(X**2, axis=1)[:, None]
        + np.sum(Y**2, axis=1)[None, :]
        - 2.0 * X @ Y.T
    )
    np.maximum(sq, 0.0, out=sq)
    return GramMatrix(entries=np.exp(-gamma * sq), kind="exact")


def universal_estimate(zx: np.ndarray, zy: np.ndarray) -> float:
    """One-bit estimate (1/m) * <sign(zx), sign(zy)> with sign(0) = +1.

    Biased for the RBF kernel; kept as the binary-embedding baseline.
    """
    zx = np.asarray(zx, dtype=np.float64)
    zy = np.asarray(zy, dtype=np.float64)
    if zx.shape != zy.shape:
        raise ValueError(f"length mismatch: {zx.shape} vs {zy.shape}")
    sx = np.where(zx >= 0, 1.0, -1.0)
    sy = np.where(zy >= 0, 1.0, -1.0)
    return float(np.dot(sx, sy) / zx.shape[-1])


def semiq_estimate(zx: np.ndarray, qy: np.ndarray) -> float:
    """Semi-quantized estimate (pi / 2m) * <zx, qy>, qy produced by msq.

    Asymmetric by construction: one argument stays full precision.
    """
    zx = np.asarray(zx, dtype=np.float64)
    qy = np.asarray(qy, dtype=np.float64)
    if zx.shape != qy.shape:
        raise ValueError(f"length mismatch: {zx.shape} vs {qy.shape}")
    m = zx.shape[-1]
    return float(np.pi / (2.0 * m) * np.dot(zx, qy))


def stocq_estimate(qx: np.ndarray, qy: np.ndarray) -> float:
    """Stochastic-quantization estimate (2/m) * <qx, qy>."""
    qx = np.asarray(qx, dtype=np.float64)
    qy = np.asarray(qy, dtype=np.float64)
    if qx.shape != qy.shape:
        raise ValueError(f"length mismatch: {qx.shape} vs {qy.shape}")
    return float(2.0 / qx.shape[-1] * np.dot(qx, qy))


def condensed_estimate(fx: CondensedFeature, fy: CondensedFeature) -> float:
    """<fx.y, fy.y> divided by the shared prescale factor squared."""
    if fx.scheme != fy.scheme or fx.source != fy.source:
        raise ValueError(
            f"mismatched condensed features: {fx.scheme}/{fx.source} vs {fy.scheme}/{fy.source}"
        )
    if fx.y.shape != fy.y.shape:
        raise ValueError(f"length mismatch: {fx.y.shape} vs {fy.y.shape}")
    if fx.prescale != fy.prescale:
        raise ValueError(f"prescale mismatch: {fx.prescale} vs {fy.prescale}")
    return float(np.dot(fx.y, fy.y) / fx.prescale**2)


def gram(items: Sequence, estimator: Callable[[object, object], float], kind: str) -> GramMatrix:
    """Symmetric matrix of pairwise estimates over homogeneous items."""
    kinds = {type(it) for it in items}
    if len(kinds) > 1:
        raise ValueError(f"heterogeneous feature kinds: {sorted(k.__name__ for k in kinds)}")
    n = len(items)
    G = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            G[i, j] = G[j, i] = estimator(items[i], items[j])
    return GramMatrix(entries=G, kind=kind)


def condensed_gram(Y: np.ndarray, prescale: float = 1.0, kind: str = "sigma_delta") -> GramMatrix:
    """Fast path for condensed feature matrices: G = Y Y^T / prescale^2."""
    Y = np.asarray(Y, dtype=np.float64)
    return GramMatrix(entries=(Y @ Y.T) / prescale**2, kind=kind)


def spectral_delta(n_blocks: int, block_len: int, bits: int) -> float:
    """The diagonal inflation bound (8 + 26/(3p)) / (lambda * (2^b - 1)^2)."""
    if n_blocks < 1 or block_len < 1 or bits < 1:
        raise ValueError("n_blocks, block_len and bits must all be >= 1")
    return (8.0 + 26.0 / (3.0 * n_blocks)) / (block_len * (2.0**bits - 1.0) ** 2)


def _entries(K) -> np.ndarray:
    return K.entries if isinstance(K, GramMatrix) else np.asarray(K, dtype=np.float64)


def spectral_sandwich_check(
    K_exact,
    K_hat,
    eta: float,
    delta1: float,
    delta2: float,
    delta: float | None = None,
) -> SpectralCheckReport:
    """Check (1-D1)(K + eta*I) <= K_hat + eta*I <= (1+D2)(K + eta*I) in the PSD order.

    Margins are minimum eigenvalues of the two difference matrices, computed
    after symmetrization to absorb estimator round-off. If ``delta`` is given
    and delta2 < delta/eta, the guarantee's hypothesis is violated; warn but
    still evaluate.
    """
    K = _entries(K_exact)
    Kh = _entries(K_hat)
    if K.shape != Kh.shape or K.shape[0] != K.shape[1]:
        raise ValueError(f"need square matrices of equal size, got {K.shape} and {Kh.shape}")
    if np.max(np.abs(K - K.T)) > 1e-8 or np.max(np.abs(Kh - Kh.T)) > 1e-8:
        raise ValueError("inputs must be symmetric")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if delta1 < 0:
        raise ValueError(f"delta1 must be >= 0, got {delta1}")
    if delta is not None and delta2 < delta / eta:
        warnings.warn(
            f"delta2={delta2} below delta/eta={delta / eta:.4g}; sandwich is not guaranteed",
            stacklevel=2,
        )
    n = K.shape[0]
    eye = np.eye(n)
    reg = K + eta * eye
    reg_hat = Kh + eta * eye
    lower = reg_hat - (1.0 - delta1) * reg
    upper = (1.0 + delta2) * reg - reg_hat
    lower_margin = float(np.linalg.eigvalsh((lower + lower.T) / 2.0)[0])
    upper_margin = float(np.linalg.eigvalsh((upper + upper.T) / 2.0)[0])
    holds = lower_margin >= -1e-10 and upper_margin >= -1e-10
    return SpectralCheckReport(
        delta=float("nan") if delta is None else delta,
        lower_margin=lower_margin,
        upper_margin=upper_margin,
        holds=holds,
    )


def sup_error_scan(
    rff_map: RFFMap,
    pipeline: Callable[[RFFMap, np.ndarray, np.ndarray], np.ndarray],
    pairs: tuple[np.ndarray, np.ndarray],
) -> ScanResult:
    """Max absolute estimation error over a grid of point pairs.

    ``pipeline(map, X, Y)`` returns the vector of kernel estimates for the
    paired rows of X and Y; the exact RBF value comes from the map's spec. The
    grid is a finite sample of the domain, not a covering net.
    """
    X, Y = pairs
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape != Y.shape or X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("pairs must be two equal-shape nonempty 2-D arrays")
    estimates = np.asarray(pipeline(rff_map, X, Y), dtype=np.float64)
    exact = np.exp(-rff_map.spec.gamma * np.sum((X - Y) ** 2, axis=1))
    errors = np.abs(estimates - exact)
    return ScanResult(max_error=float(np.max(errors)), errors=errors)
