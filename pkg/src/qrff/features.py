"""Random Fourier feature maps for shift-invariant kernels.

The embedding is z(x) = cos(Omega^T x + xi) with the columns of Omega drawn
i.i.d. from the kernel's spectral measure and the phases xi i.i.d. uniform on
[0, 2*pi). For the RBF kernel k(x, y) = exp(-gamma * ||x - y||^2) the spectral
measure is N(0, 2*gamma * I_d).

Randomness is drawn from numpy's PCG64 generator seeded with the map seed;
Omega consumes the stream first (column by column, i.e. omega_1 fully before
omega_2), then xi. Gaussians come from numpy's ziggurat sampler. Rebuilding a
map from the same seed therefore reproduces Omega and xi bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["KernelSpec", "RFFMap", "sample_rff_map", "embed", "rff_kernel_estimate"]


@dataclass(frozen=True)
class KernelSpec:
    """A shift-invariant kernel with a known spectral sampler.

    Only the RBF family k(x, y) = exp(-gamma * ||x - y||^2) is implemented;
    the enum field exists so further families can be added with a sampler.
    """

    gamma: float
    dim: int
    family: str = "rbf"

    def __post_init__(self) -> None:
        if self.family != "rbf":
            raise ValueError(f"unsupported kernel family {self.family!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class RFFMap:
    """Frozen random embedding: frequency matrix, phases, and provenance.

    ``omega`` has shape (d, m) with columns drawn from N(0, 2*gamma*I_d),
    ``xi`` has shape (m,) with entries uniform on [0, 2*pi). Immutable after
    construction; :func:`embed` is pure, so maps are safe to share across
    threads.
    """

    omega: np.ndarray
    xi: np.ndarray
    spec: KernelSpec
    m: int
    seed: int

    def __post_init__(self) -> None:
        if self.omega.shape != (self.spec.dim, self.m):
            raise ValueError(
                f"omega shape {self.omega.shape} inconsistent with d={self.spec.dim}, m={self.m}"
            )
        if self.xi.shape != (self.m,):
            raise ValueError(f"xi shape {self.xi.shape} inconsistent with m={self.m}")


def sample_rff_map(spec: KernelSpec, m: int, seed: int) -> RFFMap:
    """Draw a fresh feature map of width ``m`` for ``spec``, deterministically in ``seed``."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    # standard_normal((m, d)) fills row-major, so omega_1 is drawn first.
    omega = rng.standard_normal((m, spec.dim)).T * np.sqrt(2.0 * spec.gamma)
    xi = rng.uniform(0.0, 2.0 * np.pi, m)
    return RFFMap(omega=omega, xi=xi, spec=spec, m=m, seed=seed)


def embed(rff_map: RFFMap, x: np.ndarray) -> np.ndarray:
    """Feature vector cos(Omega^T x + xi); every entry lies in [-1, 1].

    Accepts a single point of shape (d,) or a batch of shape (n, d), returning
    (m,) or (n, m) respectively.
    """
    x = np.asarray(x, dtype=np.float64)
    d = rff_map.spec.dim
    if x.ndim == 1:
        if x.shape[0] != d:
            raise ValueError(f"point has dimension {x.shape[0]}, map expects {d}")
    elif x.ndim == 2:
        if x.shape[1] != d:
            raise ValueError(f"points have dimension {x.shape[1]}, map expects {d}")
    else:
        raise ValueError(f"x must be 1-D or 2-D, got shape {x.shape}")
    return np.cos(x @ rff_map.omega + rff_map.xi)


def rff_kernel_estimate(zx: np.ndarray, zy: np.ndarray) -> float:
    """Plain full-precision estimate (2/m) * <zx, zy>."""
    zx = np.asarray(zx, dtype=np.float64)
    zy = np.asarray(zy, dtype=np.float64)
    if zx.shape != zy.shape:
        raise ValueError(f"feature length mismatch: {zx.shape} vs {zy.shape}")
    m = zx.shape[-1]
    return float((2.0 / m) * np.dot(zx, zy))
