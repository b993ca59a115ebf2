"""Source/channel/input model checks against direct enumeration."""
import itertools
import math

import numpy as np
import pytest

from jsclab.models import (
    BudgetError,
    ConditionalInput,
    DmcChannel,
    EncoderInput,
    IidInput,
    IidSource,
    MixedSource,
    TableChannel,
    TableSource,
    UniformMessageSource,
    avg_max_gap_channel,
    avg_max_gap_instance,
    avg_max_gap_source,
    bsc,
    channel_kernel,
    channel_rows,
    deterministic_channel,
    entropy_spectrum,
    entropy_spectrum_bracket,
    information_spectrum,
    input_pmf,
    joint_density_spectrum,
    noiseless_channel,
    output_law,
    source_pmf,
    source_size,
)
from jsclab.spectra import ccdf, mix_spectra

BERN011 = IidSource(pmf=(0.89, 0.11))
BSC005 = bsc(0.05)
UNIFORM2 = IidInput(pmf=(0.5, 0.5))


def enum_density_atoms(x_pmf, kernel, n):
    """Oracle: enumerate (x^n, y^n) and bin the normalized density."""
    kx, ky = kernel.shape
    q = x_pmf @ kernel
    atoms = {}
    for xs in itertools.product(range(kx), repeat=n):
        px = math.prod(x_pmf[x] for x in xs)
        if px == 0.0:
            continue
        for ys in itertools.product(range(ky), repeat=n):
            w = math.prod(kernel[x, y] for x, y in zip(xs, ys))
            if w == 0.0:
                continue
            qy = math.prod(q[y] for y in ys)
            val = round((math.log(w) - math.log(qy)) / n, 11)
            atoms[val] = atoms.get(val, 0.0) + px * w
    return sorted(atoms.items())


class TestSources:
    def test_iid_pmf_is_the_kron_power(self):
        p = source_pmf(BERN011, 3)
        direct = [
            0.89**3, 0.89**2 * 0.11, 0.89**2 * 0.11, 0.89 * 0.11**2,
            0.89**2 * 0.11, 0.89 * 0.11**2, 0.89 * 0.11**2, 0.11**3,
        ]
        np.testing.assert_allclose(p, direct, rtol=0, atol=1e-15)

    def test_uniform_messages(self):
        src = UniformMessageSource.at_rate(0.5)
        assert source_size(src, 4) == math.ceil(math.exp(2.0))
        p = source_pmf(src, 4)
        assert np.all(p == p[0])
        spec = entropy_spectrum(src, 4)
        assert len(spec.values) == 1
        assert abs(spec.values[0] - math.log(source_size(src, 4)) / 4) < 1e-12

    def test_table_source_per_n(self):
        src = TableSource(pmfs={1: (0.5, 0.5), 2: (0.2, 0.3, 0.5)})
        assert source_size(src, 2) == 3
        np.testing.assert_allclose(source_pmf(src, 2), (0.2, 0.3, 0.5))
        with pytest.raises(KeyError):
            source_pmf(src, 3)

    def test_mixed_source_pmf(self):
        mix = MixedSource(components=((0.5, BERN011), (0.5, IidSource(pmf=(0.6, 0.4)))))
        p = source_pmf(mix, 2)
        a, b = source_pmf(BERN011, 2), source_pmf(IidSource(pmf=(0.6, 0.4)), 2)
        np.testing.assert_allclose(p, 0.5 * a + 0.5 * b, atol=1e-15)

    def test_mixed_weights_rejected(self):
        with pytest.raises(ValueError):
            MixedSource(components=((0.7, BERN011), (0.7, BERN011)))

    def test_budget_guard(self):
        with pytest.raises(BudgetError):
            source_pmf(BERN011, 40, budget=10**6)


class TestEntropySpectrum:
    def test_iid_agrees_with_flat_table(self):
        pmf2 = tuple(source_pmf(BERN011, 2))
        flat = TableSource(pmfs={2: pmf2})
        a = entropy_spectrum(BERN011, 2)
        b = entropy_spectrum(flat, 2)
        np.testing.assert_allclose(a.values, b.values, atol=1e-12)
        np.testing.assert_allclose(a.masses, b.masses, atol=1e-12)

    def test_mean_is_the_entropy(self):
        spec = entropy_spectrum(BERN011, 64)
        assert abs(spec.mean() - 0.34651533691866615) < 1e-10

    def test_mixed_exact_when_budget_allows(self):
        mix = MixedSource(components=((0.25, BERN011), (0.75, IidSource(pmf=(0.6, 0.4)))))
        spec = entropy_spectrum(mix, 3)
        per = mix_spectra(
            ((0.25, entropy_spectrum(BERN011, 3)),
             (0.75, entropy_spectrum(IidSource(pmf=(0.6, 0.4)), 3)))
        )
        # the exact mixed law reweights atoms of the pooled outcome
        # space, which differs from mixing the component spectra, but
        # total mass and mean must both be exact
        assert abs(spec.mean() - per.mean()) > 0.0  # distinct objects
        direct = source_pmf(mix, 3)
        mean = -np.sum(direct * np.log(direct)) / 3
        assert abs(spec.mean() - mean) < 1e-12

    def test_mixed_sandwich_modes(self):
        mix = MixedSource(components=((0.5, BERN011), (0.5, IidSource(pmf=(0.6, 0.4)))))
        lo = entropy_spectrum(mix, 4, mixed_mode="sandwich-lower")
        hi = entropy_spectrum(mix, 4, mixed_mode="sandwich-upper")
        lo2, hi2 = entropy_spectrum_bracket(mix, 4)
        np.testing.assert_allclose(lo.values, lo2.values, atol=1e-15)
        np.testing.assert_allclose(hi.values, hi2.values, atol=1e-15)
        shift = math.log(2.0) / 4
        np.testing.assert_allclose(hi.values, lo.values + shift, atol=1e-13)

    def test_exact_mixed_mode_respects_budget(self):
        mix = MixedSource(components=((0.5, BERN011), (0.5, IidSource(pmf=(0.6, 0.4)))))
        with pytest.raises(BudgetError):
            entropy_spectrum(mix, 30, budget=10**4, mixed_mode="exact")
        # auto falls back to the upper sandwich instead of failing
        spec = entropy_spectrum(mix, 30, budget=10**4)
        assert spec.n == 30


class TestChannels:
    def test_bsc_matrix(self):
        np.testing.assert_allclose(BSC005.matrix, ((0.95, 0.05), (0.05, 0.95)))

    def test_deterministic_channel_rows(self):
        ch = deterministic_channel([1, 0, 1], num_outputs=2)
        np.testing.assert_allclose(ch.matrix, ((0, 1), (1, 0), (0, 1)))

    def test_noiseless(self):
        ch = noiseless_channel(3)
        np.testing.assert_allclose(ch.matrix, np.eye(3))

    def test_rows_match_kron_power(self):
        full = channel_kernel(BSC005, 2)
        rows = channel_rows(BSC005, [1, 3], 2)
        w = np.asarray(BSC005.matrix)
        np.testing.assert_allclose(rows[0], np.kron(w[0], w[1]), atol=1e-15)
        np.testing.assert_allclose(rows[1], np.kron(w[1], w[1]), atol=1e-15)
        np.testing.assert_allclose(full[1], rows[0], atol=1e-15)

    def test_table_channel_is_flat(self):
        ch = TableChannel.constant(((1.0, 0.0), (0.0, 1.0), (1.0, 0.0)))
        k2 = channel_kernel(ch, 2)
        assert k2.shape == (3, 2)

    def test_budget_guard(self):
        with pytest.raises(BudgetError):
            channel_rows(BSC005, range(2**11), 22, budget=10**6)


class TestInputs:
    def test_iid_input_pmf(self):
        p = input_pmf(UNIFORM2, BSC005, 3)
        assert p.shape == (8,)
        assert np.all(p == 0.125)

    def test_skewed_input_pmf(self):
        p = input_pmf(IidInput(pmf=(0.7, 0.3)), BSC005, 2)
        np.testing.assert_allclose(p, (0.49, 0.21, 0.21, 0.09), atol=1e-15)

    def test_encoder_input_requires_matching_n(self):
        _, _, code = avg_max_gap_instance(0.2)
        inp = EncoderInput.fixed(code)
        assert inp.code_for(1) is code
        with pytest.raises(KeyError):
            inp.code_for(2)

    def test_conditional_input_rows(self):
        table = ((0.5, 0.5), (0.0, 1.0))
        inp = ConditionalInput.constant(table)
        src = TableSource.constant((0.4, 0.6))
        ch = TableChannel.constant(((0.9, 0.1), (0.2, 0.8)))
        m = np.asarray(inp.table(1))
        np.testing.assert_allclose(m, table)
        q = output_law(inp, ch, 1, src=src)
        # x law: 0.4*(0.5,0.5) + 0.6*(0,1) = (0.2, 0.8)
        np.testing.assert_allclose(q, 0.2 * np.array((0.9, 0.1)) + 0.8 * np.array((0.2, 0.8)))


class TestOutputLaw:
    def test_product_fast_path_matches_rows(self):
        q_fast = output_law(UNIFORM2, BSC005, 3)
        kernel = channel_kernel(BSC005, 3)
        q_slow = input_pmf(UNIFORM2, BSC005, 3) @ kernel
        np.testing.assert_allclose(q_fast, q_slow, atol=1e-15)

    def test_encoder_induced_output(self):
        src, ch, code = avg_max_gap_instance(0.2)
        q = output_law(EncoderInput.fixed(code), ch, 1, src=src)
        # symbols 0, 1 ride input 1 -> output 0; symbol 2 -> output 1
        np.testing.assert_allclose(q, (0.6, 0.4), atol=1e-15)


class TestInformationSpectrum:
    @pytest.mark.parametrize("inp_pmf", [(0.5, 0.5), (0.7, 0.3)])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_enumeration(self, inp_pmf, n):
        spec = information_spectrum(BSC005, IidInput(pmf=inp_pmf), n)
        oracle = enum_density_atoms(np.asarray(inp_pmf), np.asarray(BSC005.matrix), n)
        assert len(spec.values) == len(oracle)
        for (ov, om), sv, sm in zip(oracle, spec.values, spec.masses):
            assert abs(ov - sv) < 1e-9
            assert abs(om - sm) < 1e-10

    def test_mean_is_the_mutual_information_rate(self):
        spec = information_spectrum(BSC005, UNIFORM2, 32)
        assert abs(spec.mean() - 0.4946319372140727) < 1e-10

    def test_noiseless_uniform_is_a_point_mass(self):
        spec = information_spectrum(noiseless_channel(2), UNIFORM2, 5)
        assert len(spec.values) == 1
        assert abs(spec.values[0] - math.log(2)) < 1e-12

    def test_rejects_encoder_inputs(self):
        _, _, code = avg_max_gap_instance(0.2)
        with pytest.raises(ValueError):
            information_spectrum(avg_max_gap_channel(), EncoderInput.fixed(code), 1)


class TestJointDensitySpectrum:
    def test_independent_case_factorizes(self):
        joint = joint_density_spectrum(BERN011, UNIFORM2, BSC005, 3)
        a = information_spectrum(BSC005, UNIFORM2, 3)
        b = entropy_spectrum(BERN011, 3)
        ma, mb = joint.marginal_a(), joint.marginal_b()
        np.testing.assert_allclose(ma.values, a.values, atol=1e-12)
        np.testing.assert_allclose(ma.masses, a.masses, atol=1e-12)
        np.testing.assert_allclose(mb.values, b.values, atol=1e-12)

    def test_gap_instance_atoms_by_hand(self):
        src, ch, code = avg_max_gap_instance(0.2)
        joint = joint_density_spectrum(src, EncoderInput.fixed(code), ch, 1)
        # output law is (0.6, 0.4); densities ln(1/0.6), ln(1/0.4);
        # source values -ln(0.2), -ln(0.4) twice
        expected = {
            (math.log(1 / 0.6), -math.log(0.2)): 0.2,
            (math.log(1 / 0.6), -math.log(0.4)): 0.4,
            (math.log(1 / 0.4), -math.log(0.4)): 0.4,
        }
        assert len(joint.masses) == 3
        for av, bv, m in zip(joint.a_values, joint.b_values, joint.masses):
            match = [k for k in expected if abs(k[0] - av) < 1e-12 and abs(k[1] - bv) < 1e-12]
            assert len(match) == 1
            assert abs(expected[match[0]] - m) < 1e-12

    def test_conditional_input_total_mass(self):
        src = TableSource.constant((0.4, 0.6))
        ch = TableChannel.constant(((0.9, 0.1), (0.2, 0.8)))
        inp = ConditionalInput.constant(((0.5, 0.5), (0.0, 1.0)))
        joint = joint_density_spectrum(src, inp, ch, 1)
        assert abs(joint.masses.sum() - 1.0) < 1e-12


class TestGapInstance:
    def test_source_schedule(self):
        src = avg_max_gap_source(lambda n: 1.0 / n)
        np.testing.assert_allclose(source_pmf(src, 4), (0.25, 0.375, 0.375))

    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            source_pmf(avg_max_gap_source(1.5), 1)

    def test_instance_pieces_fit(self):
        src, ch, code = avg_max_gap_instance(0.5)
        assert code.n == 1
        assert source_size(src, 1) == 3
        assert channel_kernel(ch, 1).shape == (3, 2)
