import numpy as np
import pytest

from helpers import oracle_mfcc
from ttsalign.audio import AudioBuffer
from ttsalign.errors import FeatureError
from ttsalign.features import (
    FeatureConfig,
    FeatureMatrix,
    dct_matrix,
    hz_to_mel,
    mel_filterbank,
    mel_to_hz,
    mfcc,
    n_frames_for,
    read_features,
    write_features,
)


def buffer_from(samples, rate=16000):
    return AudioBuffer(samples=np.asarray(samples, dtype=np.float64), sample_rate=rate)


def sine(freq, duration_s=0.5, rate=16000, amp=0.5):
    t = np.arange(int(duration_s * rate)) / rate
    return buffer_from(amp * np.sin(2 * np.pi * freq * t), rate)


class TestMelScale:
    def test_zero(self):
        assert hz_to_mel(0.0) == 0.0

    def test_700_hz(self):
        assert hz_to_mel(700.0) == pytest.approx(2595.0 * np.log10(2.0), abs=1e-9)

    def test_inverse_identity(self):
        rng = np.random.default_rng(0)
        freqs = rng.uniform(0, 8000, size=100)
        assert np.allclose(mel_to_hz(hz_to_mel(freqs)), freqs, atol=1e-6)

    def test_negative_rejected(self):
        with pytest.raises(FeatureError):
            hz_to_mel(-1.0)


class TestFrameCount:
    def test_spec_example(self):
        assert n_frames_for(16000, 400, 160) == 98

    def test_formula_on_random_triples(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            window = int(rng.integers(2, 1000))
            hop = int(rng.integers(1, window + 1))
            n = int(rng.integers(0, 50000))
            expected = 0 if n < window else 1 + (n - window) // hop
            assert n_frames_for(n, window, hop) == expected


class TestDctAndFilterbank:
    def test_dct_orthonormal(self):
        g = dct_matrix(26, 26)
        assert np.max(np.abs(g @ g.T - np.eye(26))) < 1e-10

    def test_filterbank_shapes_and_positivity(self):
        cfg = FeatureConfig()
        bank = mel_filterbank(16000, cfg)
        assert bank.shape == (26, 257)
        areas = bank.sum(axis=1)
        assert np.all(areas > 0)

    def test_filter_peaks_strictly_increase(self):
        bank = mel_filterbank(16000, FeatureConfig())
        peaks = bank.argmax(axis=1)
        assert np.all(np.diff(peaks) > 0)

    def test_adjacent_filters_overlap(self):
        bank = mel_filterbank(16000, FeatureConfig())
        for m in range(bank.shape[0] - 1):
            assert np.any((bank[m] > 0) & (bank[m + 1] > 0))


class TestMfcc:
    def test_silence_is_stationary(self):
        buf = buffer_from(np.zeros(16000))
        feats = mfcc(buf)
        assert feats.data.shape == (98, 13)
        assert np.allclose(feats.data, feats.data[0])

    def test_gain_raises_log_energy(self):
        base = sine(440, 0.2)
        louder = buffer_from(np.clip(base.samples * 1.8, -1, 1))
        c0_base = mfcc(base).data[:, 0]
        c0_loud = mfcc(louder).data[:, 0]
        assert np.all(c0_loud[2:-2] > c0_base[2:-2])

    def test_sines_separate_in_mfcc_space(self):
        # oracle: same chain recomputed with a brute-force O(n^2) DFT
        cfg = FeatureConfig()
        a, b = sine(1000, 0.2), sine(3000, 0.2)
        ours_a, ours_b = mfcc(a, cfg).data, mfcc(b, cfg).data
        oracle_a = oracle_mfcc(a.samples, 16000, cfg)
        oracle_b = oracle_mfcc(b.samples, 16000, cfg)
        assert np.max(np.abs(ours_a - oracle_a)) < 1e-6
        assert np.max(np.abs(ours_b - oracle_b)) < 1e-6
        dist_oracle = np.mean(np.linalg.norm(oracle_a - oracle_b, axis=1))
        dist_ours = np.mean(np.linalg.norm(ours_a - ours_b, axis=1))
        assert dist_oracle > 0.5
        assert dist_ours > 0.5

    def test_deterministic(self):
        buf = sine(523, 0.3)
        first = mfcc(buf).data
        second = mfcc(buf).data
        assert np.array_equal(first, second)

    def test_too_short_rejected(self):
        with pytest.raises(FeatureError, match="too short"):
            mfcc(buffer_from(np.zeros(399)))

    def test_nan_rejected(self):
        samples = np.zeros(16000)
        buf = buffer_from(samples)
        object.__setattr__(buf, "samples", samples * np.nan)
        with pytest.raises(FeatureError):
            mfcc(buf)

    def test_cmn_flag_zeroes_means(self):
        buf = sine(880, 0.3)
        feats = mfcc(buf, FeatureConfig(cmn=True))
        assert np.allclose(feats.data.mean(axis=0), 0.0, atol=1e-12)

    def test_batching_seam_invisible(self):
        # force multiple batches through a tiny batch size
        import ttsalign.features as features_mod

        buf = sine(700, 0.5)
        whole = mfcc(buf).data
        original = features_mod._BATCH_FRAMES
        features_mod._BATCH_FRAMES = 7
        try:
            chunked = mfcc(buf).data
        finally:
            features_mod._BATCH_FRAMES = original
        # BLAS blocking differs with batch shape; frames must still agree
        assert chunked.shape == whole.shape
        assert np.allclose(chunked, whole, atol=1e-9, rtol=0)


class TestFeatureIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        feats = FeatureMatrix(data=rng.normal(size=(31, 13)).astype(np.float32),
                              hop_s=0.010)
        path = tmp_path / "f.feat"
        write_features(path, feats)
        again = read_features(path)
        assert again.n_frames == 31
        assert again.n_coeffs == 13
        assert again.hop_s == 0.010
        assert np.array_equal(again.data, feats.data)

    def test_truncated_rejected(self, tmp_path):
        path = tmp_path / "bad.feat"
        path.write_bytes(b"\x01\x02")
        with pytest.raises(FeatureError, match="truncated"):
            read_features(path)

    def test_size_mismatch_rejected(self, tmp_path):
        feats = FeatureMatrix(data=np.zeros((4, 3)), hop_s=0.01)
        path = tmp_path / "f.feat"
        write_features(path, feats)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(FeatureError, match="expected"):
            read_features(path)


class TestFeatureConfigValidation:
    def test_bad_preemphasis(self):
        with pytest.raises(FeatureError):
            FeatureConfig(preemphasis=1.0)

    def test_bad_coeff_count(self):
        with pytest.raises(FeatureError):
            FeatureConfig(n_coeffs=30, n_mels=26)

    def test_fft_smaller_than_window(self):
        with pytest.raises(FeatureError, match="fft_size"):
            mfcc(buffer_from(np.zeros(16000)), FeatureConfig(fft_size=256))
