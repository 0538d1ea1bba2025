import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hbsim.channel import (
    arv,
    gen_geometric_channel,
    gen_rayleigh_channel,
)
from hbsim.combiner import (
    aoa_combiner,
    arv_bank,
    arv_tsac,
    build_codebook,
    dft_matrix,
    digital_combiner,
    greedy_mi,
    svd_combiner,
)
from hbsim.metrics import mutual_information
from hbsim.quantizer import QuantizerModel, quantization_covariance


def test_dft_trivial_sizes():
    np.testing.assert_allclose(dft_matrix(1), [[1.0]])
    np.testing.assert_allclose(
        dft_matrix(2), np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15
    )


@pytest.mark.parametrize("n", [3, 8, 16])
def test_dft_unitary_constant_modulus(n):
    w = dft_matrix(n)
    assert np.max(np.abs(w.conj().T @ w - np.eye(n))) < 1e-14
    assert np.max(np.abs(np.abs(w) - 1 / np.sqrt(n))) < 1e-14


def test_codebook_grid():
    np.testing.assert_allclose(build_codebook(4).spatial_angles, [-0.5, 0.0, 0.5, 1.0])
    np.testing.assert_allclose(build_codebook(1).spatial_angles, [1.0])
    angles = build_codebook(9).spatial_angles
    assert np.all(np.diff(angles) > 0)
    assert np.all((angles > -1) & (angles <= 1))


def test_codebook_rejects_zero_size():
    with pytest.raises(ValueError):
        build_codebook(0)


def test_full_codebook_bank_is_orthonormal():
    bank = arv_bank(build_codebook(32), 32)
    assert np.max(np.abs(bank.conj().T @ bank - np.eye(32))) < 1e-12


def _single_path_channel(n_antennas, angle, gain=1.0):
    return gain * np.sqrt(n_antennas) * arv(angle, n_antennas)[:, None]


def _channel_with_spatial_angles(n_antennas, spatial_angles, n_users):
    from hbsim.channel import ChannelRealization, PathParams, column_from_paths

    per_user = np.array_split(np.asarray(spatial_angles), n_users)
    paths = [
        [
            PathParams(gain=1.0 + 0j, physical_aoa=float(np.arcsin(t)),
                       spatial_angle=float(t))
            for t in chunk
        ]
        for chunk in per_user
    ]
    h = np.column_stack([column_from_paths(p, n_antennas) for p in paths])
    return ChannelRealization(h=h, paths=paths)


class TestArvTsac:
    def test_first_pick_matches_exhaustive_gain_search(self):
        n = 16
        cb = build_codebook(n)
        grid_angle = cb.spatial_angles[5]
        h = _single_path_channel(n, grid_angle)
        # oracle: evaluate the aggregated gain of every codebook ARV directly
        gains = [np.linalg.norm(arv(t, n).conj() @ h) ** 2 for t in cb.spatial_angles]
        assert np.argmax(gains) == 5
        pair = arv_tsac(h, 4, cb)
        assert pair.angles[0] == pytest.approx(grid_angle)

    def test_full_codebook_gives_semi_unitary_combiner(self):
        rng = np.random.default_rng(0)
        h = gen_geometric_channel(32, 4, 3.0, rng).h
        pair = arv_tsac(h, 12, build_codebook(32))
        w = pair.w_rf
        assert np.max(np.abs(w.conj().T @ w - np.eye(12))) < 1e-10

    def test_nrf_equal_codebook_selects_every_angle(self):
        rng = np.random.default_rng(1)
        h = gen_geometric_channel(8, 2, 2.0, rng).h
        pair = arv_tsac(h, 8, build_codebook(8))
        assert sorted(pair.angles) == pytest.approx(sorted(build_codebook(8).spatial_angles))

    def test_projection_removes_selected_direction(self):
        rng = np.random.default_rng(2)
        h = gen_geometric_channel(24, 3, 4.0, rng).h
        _, residuals = arv_tsac(h, 10, build_codebook(24), return_residuals=True)
        assert np.all(residuals < 1e-10 * np.linalg.norm(h))

    def test_exhausted_energy_pads_in_codebook_order(self):
        n = 8
        cb = build_codebook(n)
        h = _single_path_channel(n, cb.spatial_angles[3])
        pair = arv_tsac(h, 4, cb)
        assert pair.angles[0] == pytest.approx(cb.spatial_angles[3])
        # rank-one channel: remaining picks follow codebook order
        leftovers = [a for a in cb.spatial_angles if a != cb.spatial_angles[3]]
        np.testing.assert_allclose(pair.angles[1:], leftovers[:3])

    def test_user_permutation_invariance(self):
        rng = np.random.default_rng(3)
        h = gen_geometric_channel(16, 4, 3.0, rng).h
        a = arv_tsac(h, 6, build_codebook(16)).angles
        b = arv_tsac(h[:, [2, 0, 3, 1]], 6, build_codebook(16)).angles
        np.testing.assert_array_equal(a, b)

    def test_codebook_too_small_raises(self):
        with pytest.raises(ValueError):
            arv_tsac(np.ones((8, 1), dtype=complex), 5, build_codebook(4))

    def test_second_stage_is_dft(self):
        rng = np.random.default_rng(4)
        h = gen_geometric_channel(8, 2, 2.0, rng).h
        pair = arv_tsac(h, 4, build_codebook(8))
        np.testing.assert_allclose(pair.w_rf2, dft_matrix(4))


class TestSvdCombiner:
    def test_single_user_matched_filter(self):
        rng = np.random.default_rng(5)
        h = gen_rayleigh_channel(16, 1, rng).h
        pair = svd_combiner(h, 4, with_dft_stage=False)
        alignment = abs(np.vdot(pair.w_rf1[:, 0], h[:, 0])) / np.linalg.norm(h)
        assert alignment == pytest.approx(1.0, abs=1e-12)

    def test_product_semi_unitary_without_dft(self):
        rng = np.random.default_rng(6)
        h = gen_rayleigh_channel(20, 5, rng).h
        w = svd_combiner(h, 8, with_dft_stage=False).w_rf
        assert np.max(np.abs(w.conj().T @ w - np.eye(8))) < 1e-12

    def test_columns_ordered_by_singular_value(self):
        rng = np.random.default_rng(7)
        h = gen_rayleigh_channel(20, 5, rng).h
        w1 = svd_combiner(h, 5, with_dft_stage=False).w_rf1
        captured = np.linalg.norm(w1.conj().T @ h, axis=1)
        assert np.all(np.diff(captured) <= 1e-9)

    def test_phase_convention_pivot_real_positive(self):
        rng = np.random.default_rng(8)
        h = gen_rayleigh_channel(12, 3, rng).h
        w1 = svd_combiner(h, 6, with_dft_stage=False).w_rf1
        for col in w1.T:
            pivot = col[np.argmax(np.abs(col))]
            assert abs(pivot.imag) < 1e-12 and pivot.real > 0

    def test_dft_stage_spreads_gains_evenly(self):
        rng = np.random.default_rng(9)
        h = gen_rayleigh_channel(24, 4, rng).h
        pair = svd_combiner(h, 8, with_dft_stage=True)
        gains = pair.w_rf1.conj().T @ h @ h.conj().T @ pair.w_rf1
        spread = pair.w_rf2.conj().T @ gains @ pair.w_rf2
        diag = np.diag(spread).real
        np.testing.assert_allclose(diag, np.trace(gains).real / 8, rtol=1e-10)

    def test_nrf_exceeding_antennas_raises(self):
        with pytest.raises(ValueError):
            svd_combiner(np.ones((4, 2), dtype=complex), 5, with_dft_stage=False)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 16))
def test_constant_modulus_unitary_spreads_any_diagonal(seed, n):
    # holds for the DFT and for diagonal-phase-rotated DFT matrices
    rng = np.random.default_rng(seed)
    lam = rng.uniform(0, 10, size=n)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(2, n)))
    w2 = np.diag(phases[0]) @ dft_matrix(n) @ np.diag(phases[1])
    assert np.max(np.abs(np.abs(w2) - 1 / np.sqrt(n))) < 1e-12
    diag = np.diag(w2.conj().T @ np.diag(lam) @ w2).real
    np.testing.assert_allclose(diag, lam.sum() / n, rtol=1e-11)


class TestAoaCombiner:
    def test_single_path_leads_with_its_arv(self):
        rng = np.random.default_rng(10)
        chan = gen_geometric_channel(32, 1, 1e-9, rng)  # one path almost surely
        pair = aoa_combiner(chan, 4)
        expected = arv(chan.paths[0][0].spatial_angle, 32)
        np.testing.assert_allclose(pair.w_rf1[:, 0], expected)

    def test_complement_orthogonal_to_path_arvs(self):
        rng = np.random.default_rng(11)
        chan = gen_geometric_channel(64, 3, 2.0, rng)
        total = sum(chan.path_counts)
        pair = aoa_combiner(chan, total + 5)
        complement = pair.w_rf1[:, total:]
        cross = np.abs(pair.w_rf1[:, :total].conj().T @ complement)
        assert np.max(cross) < 1e-10

    def test_gram_near_identity_for_large_arrays(self):
        # well-separated arrival angles: ARV cross-correlations decay ~ 1/N
        angles = [-0.8, -0.5, -0.1, 0.3, 0.6, 0.9]
        chan = _channel_with_spatial_angles(1024, angles, n_users=2)
        pair = aoa_combiner(chan, len(angles) + 4)
        gram = pair.w_rf1.conj().T @ pair.w_rf1
        assert np.linalg.norm(gram - np.eye(len(angles) + 4)) < 0.05

    def test_deficit_reported(self):
        rng = np.random.default_rng(13)
        chan = gen_geometric_channel(16, 4, 6.0, rng)
        total = sum(chan.path_counts)
        with pytest.raises(ValueError, match=str(total - (total - 2))):
            aoa_combiner(chan, total - 2)

    def test_deterministic_complement(self):
        rng = np.random.default_rng(14)
        chan = gen_geometric_channel(32, 2, 2.0, rng)
        total = sum(chan.path_counts)
        a = aoa_combiner(chan, total + 3).w_rf1
        b = aoa_combiner(chan, total + 3).w_rf1
        np.testing.assert_array_equal(a, b)


class TestGreedyMi:
    def test_single_pick_matches_exhaustive_search(self):
        rng = np.random.default_rng(15)
        h = gen_geometric_channel(16, 3, 2.0, rng).h
        cb = build_codebook(16)
        q = QuantizerModel(2)
        pair = greedy_mi(h, 1, cb, 1.0, q)
        # oracle: evaluate the MI of every single-ARV combiner directly
        scores = [
            mutual_information(arv(t, 16)[:, None], h, 1.0, q)
            for t in cb.spatial_angles
        ]
        assert pair.angles[0] == pytest.approx(cb.spatial_angles[np.argmax(scores)])

    def test_selection_matches_direct_mi_argmax(self):
        rng = np.random.default_rng(16)
        h = gen_geometric_channel(12, 2, 2.0, rng).h
        cb = build_codebook(12)
        q = QuantizerModel(3)
        bank = arv_bank(cb, 12)
        # oracle: re-run the greedy loop scoring candidates with the full MI
        chosen: list[int] = []
        for _ in range(5):
            cands = [i for i in range(12) if i not in chosen]
            scores = [
                mutual_information(bank[:, chosen + [c]], h, 1.5, q) for c in cands
            ]
            chosen.append(cands[int(np.argmax(scores))])
        pair = greedy_mi(h, 5, cb, 1.5, q)
        np.testing.assert_allclose(pair.angles, cb.spatial_angles[chosen])

    def test_mi_nondecreasing_over_iterations(self):
        rng = np.random.default_rng(17)
        h = gen_geometric_channel(16, 3, 3.0, rng).h
        q = QuantizerModel(2)
        pair = greedy_mi(h, 8, build_codebook(16), 2.0, q)
        mis = [
            mutual_information(pair.w_rf1[:, : i + 1], h, 2.0, q)
            for i in range(8)
        ]
        assert np.all(np.diff(mis) > -1e-10)

    def test_full_codebook_output_semi_unitary(self):
        rng = np.random.default_rng(18)
        h = gen_geometric_channel(16, 2, 2.0, rng).h
        w = greedy_mi(h, 6, build_codebook(16), 1.0, QuantizerModel(2)).w_rf1
        assert np.max(np.abs(w.conj().T @ w - np.eye(6))) < 1e-10

    def test_second_stage_is_identity(self):
        rng = np.random.default_rng(19)
        h = gen_geometric_channel(8, 2, 2.0, rng).h
        pair = greedy_mi(h, 3, build_codebook(8), 1.0, QuantizerModel(2))
        np.testing.assert_array_equal(pair.w_rf2, np.eye(3))

    @settings(max_examples=15, deadline=None)
    @given(theta=st.floats(0, 2 * np.pi))
    def test_global_phase_invariance(self, theta):
        rng = np.random.default_rng(20)
        h = gen_geometric_channel(12, 2, 2.0, rng).h
        cb = build_codebook(12)
        q = QuantizerModel(2)
        base = greedy_mi(h, 4, cb, 1.0, q).angles
        rotated = greedy_mi(np.exp(1j * theta) * h, 4, cb, 1.0, q).angles
        np.testing.assert_array_equal(base, rotated)


class TestDigitalCombiner:
    def _setup(self, seed=21, n_rf=8, n_u=4):
        rng = np.random.default_rng(seed)
        w_rf = np.eye(n_rf, dtype=complex)
        h_eq = (rng.standard_normal((n_rf, n_u))
                + 1j * rng.standard_normal((n_rf, n_u))) / np.sqrt(2)
        return w_rf, h_eq

    def test_mrc_returns_effective_channel(self):
        w_rf, h_eq = self._setup()
        dc = digital_combiner("MRC", h_eq, w_rf, 1.0, QuantizerModel(2))
        np.testing.assert_array_equal(dc.w_bb, h_eq)

    def test_zf_inverts_effective_channel(self):
        w_rf, h_eq = self._setup()
        dc = digital_combiner("ZF", h_eq, w_rf, 1.0, QuantizerModel(2))
        np.testing.assert_allclose(dc.w_bb.conj().T @ h_eq, np.eye(4), atol=1e-9)

    def test_zf_rank_deficient_raises(self):
        w_rf, h_eq = self._setup()
        h_eq[:, 1] = h_eq[:, 0]
        with pytest.raises(np.linalg.LinAlgError):
            digital_combiner("ZF", h_eq, w_rf, 1.0, QuantizerModel(2))

    def test_mmse_minimizes_symbol_mse(self):
        # Monte Carlo oracle: simulate the quantized linear model and compare
        # raw per-symbol MSE; the MMSE combiner minimizes it over all linear
        # combiners, so no gain normalization is applied to any candidate
        w_rf, h_eq = self._setup(seed=22)
        snr, q = 2.0, QuantizerModel(2)
        rqq_sqrt = np.sqrt(np.diag(quantization_covariance(w_rf, h_eq, snr, q)).real)
        gen = np.random.default_rng(24)
        n_draws = 20_000

        def cgauss(shape):
            return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2)

        s = cgauss((4, n_draws))
        noise = cgauss((8, n_draws))
        qn = rqq_sqrt[:, None] * cgauss((8, n_draws))
        y = q.alpha * np.sqrt(snr) * h_eq @ s + q.alpha * noise + qn
        mse = {}
        for kind in ("MRC", "ZF", "MMSE"):
            dc = digital_combiner(kind, h_eq, w_rf, snr, q)
            est = dc.w_bb.conj().T @ y
            mse[kind] = float(np.mean(np.abs(est - s) ** 2))
        assert mse["MMSE"] <= mse["MRC"] + 1e-9
        assert mse["MMSE"] <= mse["ZF"] + 1e-9

    def test_unknown_kind_rejected(self):
        w_rf, h_eq = self._setup()
        with pytest.raises(ValueError):
            digital_combiner("DIRTY", h_eq, w_rf, 1.0, QuantizerModel(2))
