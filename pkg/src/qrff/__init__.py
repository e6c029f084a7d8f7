"""Quantized random Fourier features.

Compresses random Fourier features of shift-invariant kernels with Sigma-Delta
and distributed noise-shaping quantizers plus condensation operators, then
approximates kernels and Gram matrices from the compressed representations.
Includes kernel ridge regression and MMD two-sample experiments and a CLI
(``qrff``) that sweeps accuracy/memory trade-offs.
"""

from ._backend import backend_name
from .condensation import (
    CondensedFeature,
    PackedStream,
    WeightVector,
    beta_weights,
    condense,
    encode,
    encode_batch,
    memory_footprint,
    pack,
    sigma_delta_weights,
    unpack,
)
from .features import KernelSpec, RFFMap, embed, rff_kernel_estimate, sample_rff_map
from .kernels import (
    GramMatrix,
    SpectralCheckReport,
    condensed_estimate,
    gram,
    rbf_kernel,
    semiq_estimate,
    spectral_delta,
    spectral_sandwich_check,
    stocq_estimate,
    sup_error_scan,
    universal_estimate,
)
from .quantizers import (
    Alphabet,
    Beta,
    NoiseShapingConfig,
    QuantizationResult,
    SigmaDelta,
    alphabet_from_bits,
    beta_quantize,
    msq,
    quantize,
    sigma_delta_general,
    sigma_delta_r1,
    sigma_delta_randomized,
    stocq,
)
from .tasks import (
    KRRModel,
    MMDReport,
    krr_predict,
    krr_train,
    mmd_squared,
    permutation_test,
    synth_circle_data,
    synth_krr_data,
    synth_toy_pairs,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "Beta",
    "CondensedFeature",
    "GramMatrix",
    "KRRModel",
    "KernelSpec",
    "MMDReport",
    "NoiseShapingConfig",
    "PackedStream",
    "QuantizationResult",
    "RFFMap",
    "SigmaDelta",
    "SpectralCheckReport",
    "WeightVector",
    "alphabet_from_bits",
    "backend_name",
    "beta_quantize",
    "beta_weights",
    "condense",
    "condensed_estimate",
    "embed",
    "encode",
    "encode_batch",
    "gram",
    "krr_predict",
    "krr_train",
    "memory_footprint",
    "mmd_squared",
    "msq",
    "pack",
    "permutation_test",
    "quantize",
    "rbf_kernel",
    "rff_kernel_estimate",
    "sample_rff_map",
    "semiq_estimate",
    "sigma_delta_general",
    "sigma_delta_r1",
    "sigma_delta_randomized",
    "sigma_delta_weights",
    "spectral_delta",
    "spectral_sandwich_check",
    "stocq",
    "stocq_estimate",
    "sup_error_scan",
    "synth_circle_data",
    "synth_krr_data",
    "synth_toy_pairs",
    "universal_estimate",
    "unpack",
]
