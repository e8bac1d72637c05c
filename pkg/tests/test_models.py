import numpy as np
import pytest

from blindchan.exceptions import ConfigurationError, InputError
from blindchan.metrics import autocorr_norm, flatness
from blindchan import models


class TestRngStreams:
    def test_same_triple_is_bit_identical(self):
        a = models.RngStreams(42).stream("noise", 7).standard_normal(16)
        b = models.RngStreams(42).stream("noise", 7).standard_normal(16)
        np.testing.assert_array_equal(a, b)

    def test_labels_and_indices_are_independent(self):
        s = models.RngStreams(42)
        a = s.stream("noise", 0).standard_normal(16)
        b = s.stream("source", 0).standard_normal(16)
        c = s.stream("noise", 1).standard_normal(16)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_order_of_construction_is_irrelevant(self):
        s1 = models.RngStreams(9)
        first = s1.stream("a", 0).standard_normal(4)
        _ = s1.stream("b", 0).standard_normal(4)
        s2 = models.RngStreams(9)
        _ = s2.stream("b", 0).standard_normal(4)
        again = s2.stream("a", 0).standard_normal(4)
        np.testing.assert_array_equal(first, again)


class TestGaussianSubspace:
    def test_unit_second_moment(self, rng):
        model = models.gen_gaussian_subspace(100, 50, 20, rng)
        mean_sq = np.mean(np.abs(model.bases) ** 2)
        assert 0.98 <= mean_sq <= 1.02

    def test_square_basis_invertible(self, rng):
        model = models.gen_gaussian_subspace(12, 12, 3, rng)
        assert model.smallest_singular_value() > 0

    def test_condition_number_bounded_for_tall_bases(self, rng):
        # K >= 64 D keeps the blocks well conditioned for nearly every draw
        K, D = 64, 1
        good = 0
        for _ in range(100):
            model = models.gen_gaussian_subspace(K, D, 1, rng)
            s = np.linalg.svd(model.bases[0], compute_uv=False)
            good += s[0] / s[-1] <= 3
        assert good >= 95

    def test_dim_bounds(self, rng):
        with pytest.raises(ConfigurationError):
            models.gen_gaussian_subspace(4, 5, 2, rng)


def full_support_pulse(t, filter_len):
    """Broadband family touching every sample, for full-basis tests."""
    return np.exp(-np.abs(t) / filter_len) * np.exp(0.5j * t)


class TestPcaSubspace:
    def test_full_basis_reproduces_training(self, rng):
        K = 16
        model = models.gen_pca_subspace(full_support_pulse, K, K, 200, rng)
        fresh = models.sample_parametric_filter(full_support_pulse, K, rng)
        basis = model.bases[0]
        residual = fresh - basis @ (basis.conj().T @ fresh)
        assert np.linalg.norm(residual) <= 1e-10 * np.linalg.norm(fresh)

    def test_bandpass_family_rank_is_guarded(self, rng):
        # the compact window vanishes at its boundary, so the family spans
        # strictly fewer than K directions and a full basis is impossible
        with pytest.raises(ConfigurationError):
            models.gen_pca_subspace(models.bandpass_pulse, 16, 16, 200, rng)

    def test_orthonormal_columns(self, rng):
        model = models.gen_pca_subspace(models.bandpass_pulse, 24, 6, 300, rng)
        gram = model.bases[0].conj().T @ model.bases[0]
        np.testing.assert_allclose(gram, np.eye(6), atol=1e-10)

    def test_projection_residual_non_increasing_in_dim(self, rng):
        K = 32
        fresh = np.stack(
            [models.sample_parametric_filter(models.bandpass_pulse, K, rng) for _ in range(100)]
        )
        residuals = []
        for dim in (2, 4, 8, 16):
            model = models.gen_pca_subspace(
                models.bandpass_pulse, K, dim, 800, np.random.default_rng(5)
            )
            basis = model.bases[0]
            proj = fresh @ basis.conj() @ basis.T
            residuals.append(np.linalg.norm(fresh - proj))
        assert all(a >= b - 1e-12 for a, b in zip(residuals, residuals[1:]))

    def test_shared_across_channels(self, rng):
        model = models.gen_pca_subspace(models.bandpass_pulse, 16, 4, 200, rng, n_channels=3)
        np.testing.assert_array_equal(model.bases[0], model.bases[2])

    def test_insufficient_training(self, rng):
        with pytest.raises(ConfigurationError):
            models.gen_pca_subspace(models.bandpass_pulse, 16, 8, 4, rng)


class TestChannelsInSubspace:
    def test_flat_profile_flatness_one(self, rng):
        model = models.gen_gaussian_subspace(8, 3, 4, rng)
        u, _ = models.gen_channels_in_subspace(model, rng, "flat")
        assert flatness(u, 4) == pytest.approx(1.0, abs=1e-12)

    def test_spiky_profile_flatness_sqrt_m(self, rng):
        model = models.gen_gaussian_subspace(8, 3, 4, rng)
        u, _ = models.gen_channels_in_subspace(model, rng, "spiky")
        assert flatness(u, 4) == pytest.approx(2.0, abs=1e-12)

    def test_channels_lie_in_model_range(self, rng):
        model = models.gen_gaussian_subspace(8, 3, 4, rng)
        _, channels = models.gen_channels_in_subspace(model, rng)
        phi = model.block_diag()
        h = channels.stacked
        proj = phi @ np.linalg.lstsq(phi, h, rcond=None)[0]
        assert np.linalg.norm(h - proj) <= 1e-10 * np.linalg.norm(h)

    def test_stacked_concatenates_in_channel_order(self, rng):
        model = models.gen_gaussian_subspace(6, 2, 3, rng)
        _, channels = models.gen_channels_in_subspace(model, rng)
        np.testing.assert_array_equal(channels.stacked[6:12], channels.filters[1])

    def test_unknown_profile(self, rng):
        model = models.gen_gaussian_subspace(8, 3, 4, rng)
        with pytest.raises(InputError):
            models.gen_channels_in_subspace(model, rng, "lumpy")


class TestGenSource:
    def test_flat_spectrum_autocorr_is_energy(self, rng):
        x = models.gen_source("flat_spectrum", 64, 1.3, rng)
        ratio = autocorr_norm(x, 8) / np.linalg.norm(x) ** 2
        assert ratio == pytest.approx(1.0, abs=1e-10)

    def test_gaussian_sample_variance(self, rng):
        x = models.gen_source("gaussian", 100_000, 0.8, rng)
        assert np.mean(np.abs(x) ** 2) == pytest.approx(0.64, rel=0.03)

    def test_energy_concentration(self, rng):
        L, sx = 4096, 1.1
        x = models.gen_source("gaussian", L, sx, rng)
        assert np.linalg.norm(x) ** 2 == pytest.approx(L * sx**2, rel=0.05)

    def test_unknown_kind(self, rng):
        with pytest.raises(InputError):
            models.gen_source("chirp", 16, 1.0, rng)


class TestAddNoise:
    def test_zero_noise_is_identity(self, rng):
        s = models.complex_gaussian(rng, 12)
        np.testing.assert_array_equal(models.add_noise(s, 0.0, rng), s)

    def test_empirical_covariance(self, rng):
        L, sw = 8, 0.9
        draws = np.stack(
            [models.add_noise(np.zeros(L), sw, rng) for _ in range(10_000)]
        )
        cov = draws.conj().T @ draws / len(draws)
        target = sw**2 * np.eye(L)
        assert np.linalg.norm(cov - target) <= 0.05 * np.linalg.norm(target)

    def test_channels_get_independent_draws(self, rng):
        L, sw = 8, 1.0
        a = np.stack([models.add_noise(np.zeros(L), sw, rng) for _ in range(10_000)])
        b = np.stack([models.add_noise(np.zeros(L), sw, rng) for _ in range(10_000)])
        assert abs(np.mean(a.conj() * b)) <= 0.05 * sw**2


class TestSigmaForSnr:
    def test_formula_arithmetic(self):
        # direct formula evaluation: K ||x||^2 ||u||^2 / (M L eta)
        x = np.array([np.sqrt(10), 0, 0, 0, 0], dtype=complex)
        u = np.array([1.0, 1.0], dtype=complex)
        got = models.sigma_for_snr(8.0, 4, 5, 2, x, u)
        assert got == pytest.approx(4 * 10 * 2 / (2 * 5 * 8.0))

    def test_inverse_proportionality(self, rng):
        x = models.complex_gaussian(rng, 16)
        u = models.complex_gaussian(rng, 6)
        assert models.sigma_for_snr(8.0, 4, 16, 2, x, u) == pytest.approx(
            models.sigma_for_snr(4.0, 4, 16, 2, x, u) / 2
        )

    def test_zero_energy_rejected(self, rng):
        with pytest.raises(ConfigurationError):
            models.sigma_for_snr(1.0, 4, 8, 2, np.zeros(8), np.ones(4))


class TestBasisFiles:
    def test_roundtrip(self, tmp_path, rng):
        model = models.gen_gaussian_subspace(6, 3, 2, rng)
        path = tmp_path / "basis.txt"
        models.save_basis(path, model)
        loaded = models.load_basis(path, 6, 3, 2)
        np.testing.assert_allclose(loaded.bases, model.bases, atol=1e-12)

    def test_wrong_size_rejected(self, tmp_path, rng):
        model = models.gen_gaussian_subspace(6, 3, 2, rng)
        path = tmp_path / "basis.txt"
        models.save_basis(path, model)
        with pytest.raises(ConfigurationError):
            models.load_basis(path, 6, 3, 3)
