import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

import gausschan as gc
from conftest import channel_grid


def brute_binomial_row(k: int, t: Fraction) -> list[Fraction]:
    return [math.comb(k, m) * t**m * (1 - t) ** (k - m) for m in range(k + 1)]


def brute_amp_row(mu2: Fraction, m: int, l_max: int) -> list[Fraction]:
    out = [Fraction(0)] * (l_max + 1)
    for l in range(m, l_max + 1):
        out[l] = (1 - mu2) ** (m + 1) * mu2 ** (l - m) * math.comb(l, m)
    return out


class TestLossKernel:
    def test_full_transmission_point_mass(self):
        kern = gc.loss_kernel(1.0, 5, 5)
        assert kern.row(3).mass[3] == 1.0
        assert kern.row(3).tail_mass == 0.0

    def test_half_row2(self):
        row = gc.loss_kernel(0.5, 2, 2).row(2)
        np.testing.assert_allclose(row.mass, [0.25, 0.5, 0.25], atol=1e-15)

    def test_third_row4_mean(self):
        row = gc.loss_kernel(1.0 / 3.0, 4, 4).row(4)
        brute = sum(m * p for m, p in enumerate(brute_binomial_row(4, Fraction(1, 3))))
        assert row.mean() == pytest.approx(float(brute), abs=1e-14)
        assert float(brute) == pytest.approx(4.0 / 3.0, abs=1e-15)

    def test_no_tail_when_lmax_covers_kmax(self):
        kern = gc.loss_kernel(0.37, 12, 12)
        assert kern.row_tails.max() == 0.0

    def test_truncated_tail_is_complement(self):
        kern = gc.loss_kernel(0.9, 8, 3)
        brute = brute_binomial_row(8, Fraction(9, 10))
        assert kern.row_tails[8] == pytest.approx(float(sum(brute[4:])), abs=1e-14)

    def test_domain(self):
        with pytest.raises(ValueError):
            gc.loss_kernel(1.2, 3, 3)


class TestAmpKernel:
    def test_unit_gain_identity(self):
        kern = gc.amp_kernel(1.0, 4, 4)
        np.testing.assert_allclose(kern.probs, np.eye(5), atol=0)

    def test_vacuum_row_is_thermal(self):
        row = gc.amp_kernel(2.0, 0, 60).row(0)
        expected = 0.5 ** (np.arange(61) + 1)
        np.testing.assert_allclose(row.mass, expected, rtol=1e-12)
        thermal = gc.thermal_spectrum(1.0, 61)
        np.testing.assert_allclose(row.mass, thermal.values, rtol=1e-12)

    def test_row1_closed_form_and_normalization(self):
        row = gc.amp_kernel(2.0, 1, 400).row(1)
        l = np.arange(1, 401)
        np.testing.assert_allclose(row.mass[1:], 0.25 * l * 0.5 ** (l - 1), rtol=1e-10)
        brute = math.fsum(
            float(q) for q in brute_amp_row(Fraction(1, 2), 1, 200)
        )
        assert brute == pytest.approx(1.0, abs=1e-12) or brute < 1.0
        assert float(row.mass.sum()) + row.tail_mass == pytest.approx(1.0, abs=1e-12)

    def test_tail_matches_negative_binomial_survival(self):
        for gain in (1.5, 2.0, 3.0):
            kern = gc.amp_kernel(gain, 6, 40)
            for m in range(7):
                expected = stats.nbinom.sf(40 - m, m + 1, 1.0 / gain)
                assert kern.row_tails[m] == pytest.approx(expected, rel=1e-10, abs=1e-14)

    def test_row_means(self):
        kern = gc.amp_kernel(1.7, 5, 600)
        for m in range(6):
            assert kern.row(m).mean() == pytest.approx(1.7 * m + 0.7, abs=1e-8)

    def test_domain(self):
        with pytest.raises(ValueError):
            gc.amp_kernel(0.5, 3, 3)


class TestChannelKernel:
    def test_identity_point_mass(self):
        kern = gc.channel_kernel(gc.ChannelParams(1.0, 0.0), 6, 6)
        np.testing.assert_allclose(kern.probs, np.eye(7), atol=1e-14)

    def test_thermal_row4_mean(self):
        row = gc.channel_kernel(gc.ChannelParams(0.5, 1.5), 4, 200).row(4)
        assert row.mean() == pytest.approx(2.5, abs=1e-10)

    def test_additive_vacuum_row_equals_amplifier_row(self):
        ch = gc.make_additive(1.0)
        row = gc.channel_kernel(ch, 0, 80).row(0)
        amp_row = gc.amp_kernel(2.0, 0, 80).row(0)
        np.testing.assert_allclose(row.mass, amp_row.mass, rtol=1e-12)
        assert row.mean() == pytest.approx(1.0, abs=1e-10)

    def test_mean_law_on_grid(self):
        for ch in channel_grid():
            l_max = int(40 * (ch.tau * 20 + ch.noise_photons + 5))
            kern = gc.channel_kernel(ch, 20, l_max)
            for k in (0, 1, 5, 10, 20):
                expected = ch.tau * k + ch.noise_photons
                # Unresolved tail mass can only pull the resolved mean down.
                assert kern.row(k).mean() == pytest.approx(expected, abs=1e-7)
                assert kern.row_tails[k] < 1e-10

    def test_rows_normalized_on_grid(self):
        for ch in channel_grid():
            kern = gc.channel_kernel(ch, 12, 400)
            totals = kern.probs.sum(axis=1) + kern.row_tails
            np.testing.assert_allclose(totals, 1.0, atol=1e-10)

    def test_exponential_row_decay(self):
        ch = gc.ChannelParams(0.5, 1.5)
        dec = gc.decompose(ch)
        mu2 = 1.0 - 1.0 / dec.G
        row = gc.channel_kernel(ch, 3, 600).row(3)
        logs = np.log2(row.mass[500:560])
        slopes = np.diff(logs)
        assert np.all(slopes < 0)
        # affine up to the O(m / l) prefactor correction
        np.testing.assert_allclose(slopes, math.log2(mu2), atol=0.012)
        assert np.abs(np.diff(slopes)).max() < 1e-4

    def test_tail_budget_flag(self):
        with pytest.raises(gc.TruncationBudgetError):
            gc.channel_kernel(gc.ChannelParams(0.5, 1.5), 8, 10, row_tail_budget=1e-12)


class TestApplyKernelAndConvolve:
    def test_point_mass_picks_row(self):
        kern = gc.channel_kernel(gc.ChannelParams(0.5, 1.5), 5, 120)
        out = gc.apply_kernel(kern, gc.PhotonDistribution.point(0, 6))
        np.testing.assert_allclose(out.mass, kern.probs[0], atol=1e-15)

    def test_uniform_through_identity(self):
        kern = gc.channel_kernel(gc.ChannelParams(1.0, 0.0), 3, 3)
        out = gc.apply_kernel(kern, gc.PhotonDistribution(np.array([0.5, 0.5, 0.0, 0.0])))
        np.testing.assert_allclose(out.mass, [0.5, 0.5, 0.0, 0.0], atol=1e-15)

    def test_poisson_input_mean_composes_affinely(self):
        lam = 1.0
        levels = np.arange(31)
        mass = np.exp(-lam) * lam**levels / np.array([math.factorial(int(k)) for k in levels])
        dist = gc.PhotonDistribution(mass, tail_mass=max(0.0, 1.0 - math.fsum(mass.tolist())))
        kern = gc.channel_kernel(gc.ChannelParams(0.5, 1.5), 30, 400)
        out = gc.apply_kernel(kern, dist)
        assert out.mean() == pytest.approx(1.0, abs=1e-7)
        # independent route: mixture mean = sum_k w_k * row-mean_k
        mixture = float(sum(mass[k] * kern.row(k).mean() for k in range(31)))
        assert out.mean() == pytest.approx(mixture, abs=1e-10)

    def test_support_mismatch(self):
        kern = gc.channel_kernel(gc.ChannelParams(1.0, 0.0), 2, 2)
        with pytest.raises(ValueError):
            gc.apply_kernel(kern, gc.PhotonDistribution.point(5))

    def test_convolve_point_masses(self):
        out = gc.convolve(gc.PhotonDistribution.point(2), gc.PhotonDistribution.point(3))
        assert out.mass[5] == 1.0
        assert out.mass.sum() == 1.0

    def test_convolve_tails_accumulate(self):
        d1 = gc.PhotonDistribution(np.array([0.9, 0.05]), tail_mass=0.05)
        d2 = gc.PhotonDistribution(np.array([0.5, 0.5]))
        out = gc.convolve(d1, d2)
        assert out.tail_mass == pytest.approx(0.05, abs=1e-15)
        assert float(out.mass.sum()) + out.tail_mass == pytest.approx(1.0, abs=1e-12)


class TestKraus:
    def test_unit_transmissivity_single_identity(self):
        ops = gc.kraus_loss(1.0, 4)
        np.testing.assert_allclose(ops[0], np.eye(4), atol=0)
        assert all(np.all(op == 0) for op in ops[1:])

    def test_unit_gain_single_identity(self):
        ops = gc.kraus_amp(1.0, 4)
        np.testing.assert_allclose(ops[0], np.eye(4), atol=0)
        assert all(np.all(op == 0) for op in ops[1:])

    def test_loss_diagonal_action_matches_kernel(self):
        ops = gc.kraus_loss(0.5, 6)
        rho = np.zeros((6, 6))
        rho[2, 2] = 1.0
        out = sum(op @ rho @ op.T for op in ops)
        np.testing.assert_allclose(np.diag(out)[:3], [0.25, 0.5, 0.25], atol=1e-14)
        np.testing.assert_allclose(np.diag(out)[3:], 0.0, atol=1e-15)

    def test_loss_completeness_exact(self):
        for t in (0.0, 0.3, 0.8, 1.0):
            defect = gc.completeness_defect(gc.kraus_loss(t, 20))
            np.testing.assert_allclose(defect, 0.0, atol=1e-12)

    def test_amp_defect_matches_survival_function(self):
        d = 30
        for gain in (1.5, 2.0):
            defect = gc.completeness_defect(gc.kraus_amp(gain, d))
            for m in range(d):
                expected = stats.nbinom.sf(d - 1 - m, m + 1, 1.0 / gain)
                assert defect[m] == pytest.approx(expected, rel=1e-9, abs=1e-12)

    def test_diagonal_action_matches_kernel_rows(self):
        d = 30
        for ch in channel_grid():
            dec = gc.decompose(ch)
            loss_ops = gc.kraus_loss(dec.T, d)
            amp_ops = gc.kraus_amp(dec.G, d)
            kern = gc.channel_kernel(ch, d - 1, d - 1)
            for k in (0, 3, 11):
                rho = np.zeros((d, d))
                rho[k, k] = 1.0
                mid = sum(op @ rho @ op.T for op in loss_ops)
                out = sum(op @ mid @ op.T for op in amp_ops)
                np.testing.assert_allclose(np.diag(out), kern.probs[k], atol=1e-10)


class TestApplyChannelMatrix:
    def test_vacuum_through_thermal(self):
        ch = gc.ChannelParams(0.5, 1.5)
        out = gc.apply_channel_matrix(ch, gc.TruncatedOperator.vacuum(1), 60)
        kern = gc.channel_kernel(ch, 0, 59)
        np.testing.assert_allclose(out.diagonal(), kern.probs[0], atol=1e-12)
        assert np.abs(out.matrix - np.diag(out.diagonal())).max() < 1e-14
        assert float(np.arange(60) @ out.diagonal()) == pytest.approx(0.5, abs=1e-9)

    def test_identity_channel_preserves_state(self):
        psi = np.array([1.0, 1.0j, 0.5]) / math.sqrt(2.25)
        rho = gc.TruncatedOperator.from_pure(psi)
        out = gc.apply_channel_matrix(gc.ChannelParams(1.0, 0.0), rho, 3)
        np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-14)

    def test_loss_preserves_scaled_coherence(self):
        for t in (0.25, 0.5, 0.9):
            rho = gc.TruncatedOperator.from_pure(np.array([1.0, 1.0]) / math.sqrt(2))
            out = gc.apply_channel_matrix(gc.make_loss(t), rho, 4)
            assert out.matrix[0, 1].real == pytest.approx(math.sqrt(t) / 2.0, abs=1e-12)
            assert out.trace() == pytest.approx(1.0, abs=1e-12)

    def test_matrix_and_kernel_paths_agree_for_diagonal_input(self):
        ch = gc.make_additive(0.5)
        pops = np.array([0.4, 0.3, 0.2, 0.1])
        out = gc.apply_channel_matrix(ch, gc.TruncatedOperator.from_diagonal(pops), 80)
        kern = gc.channel_kernel(ch, 3, 79)
        expected = gc.apply_kernel(kern, gc.PhotonDistribution(pops))
        np.testing.assert_allclose(out.diagonal(), expected.mass, atol=1e-12)

    def test_trace_budget(self):
        ch = gc.make_amplifier(2.0, 1.0)
        with pytest.raises(gc.CutoffTooSmallError):
            gc.apply_channel_matrix(ch, gc.TruncatedOperator.vacuum(4), 4, trace_budget=1e-12)

    def test_operator_validation(self):
        with pytest.raises(ValueError):
            gc.TruncatedOperator(np.array([[0.5, 1.0], [0.0, 0.5]]))
        with pytest.raises(ValueError):
            gc.TruncatedOperator(np.diag([1.5, 0.0]))


class TestProjectorCount:
    def test_single_mode(self):
        assert gc.projector_count(1, 5) == 6

    def test_small_values(self):
        assert gc.projector_count(2, 2) == 6
        assert gc.projector_count(3, 3) == 20

    def test_exhaustive_enumeration(self):
        for n in range(1, 5):
            for total in range(9):
                count = sum(
                    1
                    for tup in itertools.product(range(total + 1), repeat=n)
                    if sum(tup) <= total
                )
                assert gc.projector_count(n, total) == count

    def test_big_integers_exact(self):
        assert gc.projector_count(64, 320) == math.comb(384, 64)


class TestCoherentOccupation:
    def test_vacuum(self):
        assert gc.coherent_occupation_probability(0.0, 7, 3) == 1.0

    def test_single_mode_anchor(self):
        expected = math.exp(-0.9) * (1.0 + 0.9)
        got = gc.coherent_occupation_probability(0.9, 1, 1)
        assert got == pytest.approx(expected, abs=1e-12)

    def test_weight_grows_with_n_at_budget_n(self):
        values = [gc.coherent_occupation_probability(0.9, n, n) for n in (10, 20, 40)]
        assert values[0] < values[1] < values[2]


class TestSampler:
    def test_identity_channel_deterministic(self):
        rng = np.random.default_rng(1)
        draws = gc.sample_output(gc.ChannelParams(1.0, 0.0), 7, rng, size=1000)
        assert np.all(draws == 7)

    def test_chi_square_against_exact_row(self):
        ch = gc.ChannelParams(0.5, 1.5)
        rng = np.random.default_rng(20240811)
        draws = gc.sample_output(ch, 4, rng, size=100_000)
        kern = gc.channel_kernel(ch, 4, 400)
        row = kern.probs[4]
        # group bins so every expected count is comfortably large
        edge = 15
        probs = np.append(row[:edge], 1.0 - row[:edge].sum())
        counts = np.bincount(np.minimum(draws, edge), minlength=edge + 1)
        result = stats.chisquare(counts, probs * draws.size)
        assert result.pvalue > 0.001

    def test_scalar_draw(self):
        rng = np.random.default_rng(3)
        value = gc.sample_output(gc.make_additive(1.0), 2, rng)
        assert value >= 0
