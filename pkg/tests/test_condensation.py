import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrff.condensation import (
    PackedStream,
    beta_theoretical_bits,
    beta_weights,
    condense,
    encode,
    encode_batch,
    golden_beta_exponent,
    memory_footprint,
    pack,
    sigma_delta_weights,
    unpack,
)
from qrff.features import KernelSpec, embed, sample_rff_map
from qrff.quantizers import Beta, NoiseShapingConfig, SigmaDelta, alphabet_from_bits


class TestSigmaDeltaWeights:
    def test_first_order_is_all_ones(self):
        assert sigma_delta_weights(1, 4).v.tolist() == [1.0, 1.0, 1.0, 1.0]

    def test_second_order_triangle(self):
        assert sigma_delta_weights(2, 3).v.tolist() == [1.0, 2.0, 3.0, 2.0, 1.0]

    def test_third_order_binomial(self):
        assert sigma_delta_weights(3, 2).v.tolist() == [1.0, 3.0, 3.0, 1.0]

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_symmetric_positive_integers(self, order):
        for lam_tilde in (1, 2, 5, 9):
            v = sigma_delta_weights(order, lam_tilde).v
            assert v.size == order * lam_tilde - order + 1
            assert np.array_equal(v, v[::-1])
            assert np.all(v > 0)
            assert np.array_equal(v, np.rint(v))

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_squared_norm_lower_bound(self, order):
        for lam_tilde in range(1, 65):
            w = sigma_delta_weights(order, lam_tilde)
            lam = w.block_len
            assert w.norm2**2 >= lam ** (2 * order - 1) * order ** (-2 * order) - 1e-9


class TestBetaWeights:
    def test_two_terms(self):
        assert np.allclose(beta_weights(1.5, 2).v, [2 / 3, 4 / 9])

    def test_single_term(self):
        assert np.allclose(beta_weights(1.25, 1).v, [0.8])

    def test_three_terms_to_four_places(self):
        assert np.allclose(beta_weights(1.5, 3).v, [0.6667, 0.4444, 0.2963], atol=5e-5)

    def test_strictly_decreasing(self):
        v = beta_weights(1.1, 16).v
        assert np.all(np.diff(v) < 0)

    @pytest.mark.parametrize("beta", [1.0, 2.0, 0.5, 2.5])
    def test_rejects_out_of_range(self, beta):
        with pytest.raises(ValueError):
            beta_weights(beta, 4)

    def test_annihilates_block_recursion_matrix(self):
        # v_beta @ H_beta = (0, ..., 0, beta^-lambda)
        beta = 1.37
        for lam in range(1, 33):
            v = beta_weights(beta, lam).v
            H = np.eye(lam) - beta * np.eye(lam, k=-1)
            product = v @ H
            expected = np.zeros(lam)
            expected[-1] = beta ** -float(lam)
            assert np.max(np.abs(product - expected)) < 1e-14


class TestCondense:
    def test_cancellation(self):
        w = sigma_delta_weights(1, 2)
        f = condense(np.array([1.0, -1.0]), w, n_blocks=1)
        assert f.y.tolist() == [0.0]
        assert f.normalizer == pytest.approx(1.0)

    def test_two_block_values(self):
        w = sigma_delta_weights(1, 2)
        f = condense(np.array([1.0, 1.0, -1.0, -1.0]), w, n_blocks=2)
        assert np.allclose(f.y, [math.sqrt(2), -math.sqrt(2)])

    def test_zero_input(self):
        w = beta_weights(1.5, 3)
        f = condense(np.zeros(12), w, n_blocks=4)
        assert np.all(f.y == 0.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            condense(np.zeros(7), sigma_delta_weights(1, 2), n_blocks=3)

    @pytest.mark.parametrize(
        "weights", [sigma_delta_weights(1, 5), sigma_delta_weights(2, 4), beta_weights(1.6, 6)]
    )
    def test_normalized_operator_frobenius_norm(self, weights):
        # ||Vt||_F^2 = normalizer^2 * p * ||v||^2 = 2 exactly
        p = 11
        normalizer = math.sqrt(2.0) / (math.sqrt(p) * weights.norm2)
        assert normalizer**2 * p * weights.norm2**2 == pytest.approx(2.0, rel=1e-12)

    def test_matches_dense_operator(self):
        w = sigma_delta_weights(2, 3)
        p = 4
        rng = np.random.default_rng(0)
        x = rng.normal(size=w.block_len * p)
        V = np.kron(np.eye(p), w.v)
        dense = (math.sqrt(2.0) / (math.sqrt(p) * w.norm2)) * V @ x
        assert np.allclose(condense(x, w, p).y, dense, rtol=1e-13)

    def test_unbiased_for_kernel(self):
        # E <Vt z(x), Vt z(y)> = k(x, y) over fresh maps
        gamma, d = 0.5, 3
        x = np.array([0.2, -0.4, 0.9])
        y = np.array([-0.3, 0.0, 0.5])
        k = math.exp(-gamma * np.sum((x - y) ** 2))
        w = beta_weights(1.5, 4)
        spec = KernelSpec(gamma=gamma, dim=d)
        estimates = np.empty(4000)
        for seed in range(estimates.size):
            rff_map = sample_rff_map(spec, m=32, seed=seed)
            fx = condense(embed(rff_map, x), w, 8)
            fy = condense(embed(rff_map, y), w, 8)
            estimates[seed] = fx.y @ fy.y
        se = estimates.std(ddof=1) / math.sqrt(estimates.size)
        assert abs(estimates.mean() - k) < 4 * se


class TestEncode:
    def test_encode_tags_source(self):
        cfg = NoiseShapingConfig(SigmaDelta(order=1), 4, 4, alphabet_from_bits(2))
        z = np.random.default_rng(1).uniform(-1, 1, 16)
        q_feat = encode(z, cfg)
        u_feat = encode(z, cfg, quantized=False)
        assert q_feat.source == "quantized" and q_feat.bits == 2
        assert u_feat.source == "unquantized" and u_feat.bits is None
        assert q_feat.y.shape == (4,)

    def test_encode_batch_matches_encode(self):
        cfg = NoiseShapingConfig(
            Beta(1.5), 4, 8, alphabet_from_bits(1), prescale="auto"
        )
        Z = np.random.default_rng(2).uniform(-1, 1, (5, 32))
        F, scale = encode_batch(Z, cfg)
        assert scale == pytest.approx(0.5)
        for i in range(5):
            assert np.allclose(F[i], encode(Z[i], cfg).y, rtol=1e-13)


class TestMemoryFootprint:
    def test_full_precision(self):
        assert memory_footprint("rff", 1000) == 32_000
        assert memory_footprint("semiq", 1000) == 32_000

    def test_stochastic(self):
        assert memory_footprint("stocq", 1000, bits=2) == 2000

    def test_sigma_delta_block_values(self):
        # four +-1 values sum to one of five levels: 3 bits per block
        assert (
            memory_footprint("sigma_delta", 1000, bits=1, n_blocks=250, block_len=4, order=1)
            == 750
        )

    def test_beta_no_free_compression(self):
        assert memory_footprint("beta", 960, bits=3, n_blocks=120, block_len=8) == 2880

    def test_rejects_inconsistent_blocks(self):
        with pytest.raises(ValueError):
            memory_footprint("sigma_delta", 1000, bits=1, n_blocks=100, block_len=4, order=1)
        with pytest.raises(ValueError):
            memory_footprint("nonsense", 10)

    def test_golden_ratio_detection(self):
        golden = (1 + math.sqrt(5)) / 2
        assert golden_beta_exponent(golden) == 2
        assert golden_beta_exponent(1.5) is None
        assert beta_theoretical_bits(golden, 1000) == pytest.approx(1000 * math.log2(golden))
        assert beta_theoretical_bits(1.5, 1000) is None


class TestPackUnpack:
    def test_one_bit_payload_bits(self):
        stream = pack(np.array([1.0, -1.0, 1.0]), alphabet_from_bits(1))
        # symbols 1, 0, 1 packed LSB-first: 0b101 = 5
        assert stream.payload == bytes([0b101])
        assert np.array_equal(unpack(stream), [1.0, -1.0, 1.0])

    def test_two_bit_four_codes_one_byte(self):
        codes = np.array([-1.0, -1 / 3, 1 / 3, 1.0])
        stream = pack(codes, alphabet_from_bits(2))
        assert len(stream.payload) == 1
        assert np.array_equal(unpack(stream), codes)

    @given(st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_round_trip(self, bits, seed):
        alphabet = alphabet_from_bits(bits)
        rng = np.random.default_rng(seed)
        codes = rng.choice(alphabet.values, size=37)
        stream = pack(codes, alphabet, scheme="beta", beta=1.5, prescale=0.25)
        recovered = unpack(PackedStream.from_bytes(stream.to_bytes()))
        assert np.array_equal(recovered, codes)

    def test_header_round_trip(self):
        stream = pack(
            np.array([1.0, -1.0, 1.0, -1.0]),
            alphabet_from_bits(1),
            scheme="sigma_delta",
            block_len=2,
            n_blocks=2,
            order=2,
            prescale=0.5,
        )
        parsed = PackedStream.from_bytes(stream.to_bytes())
        assert parsed.scheme == "sigma_delta"
        assert (parsed.block_len, parsed.n_blocks, parsed.order) == (2, 2, 2)
        assert parsed.prescale == 0.5

    def test_rejects_non_alphabet_codes(self):
        with pytest.raises(ValueError):
            pack(np.array([0.5]), alphabet_from_bits(1))

    def test_rejects_corrupt_header(self):
        stream = pack(np.array([1.0, -1.0]), alphabet_from_bits(1))
        raw = bytearray(stream.to_bytes())
        raw[0] = ord("X")
        with pytest.raises(ValueError, match="magic"):
            PackedStream.from_bytes(bytes(raw))
        with pytest.raises(ValueError, match="header"):
            PackedStream.from_bytes(b"QRFF")

    def test_rejects_truncated_payload(self):
        stream = pack(np.ones(64), alphabet_from_bits(1))
        raw = stream.to_bytes()
        with pytest.raises(ValueError, match="payload"):
            PackedStream.from_bytes(raw[:-4])
