"""Deterministic joint codes: decoders, exact error accounting, and the
random-coding ensemble average.

The load-bearing oracle here enumerates every codebook a random code
could draw, decodes each one exactly, and averages with the draw
probabilities. `ensemble_average_error` must match that sum to float
precision because it computes the same expectation in factorized form.
"""

import itertools
import math

import numpy as np
import pytest

from jsclab import (
    FAIL,
    BudgetError,
    ConditionalInput,
    ErrorReport,
    IidInput,
    IidSource,
    JointCode,
    TableSource,
    avg_max_gap_channel,
    avg_max_gap_instance,
    brute_force_optimal_error,
    bsc,
    ensemble_average_error,
    exact_error,
    map_decoder,
    noiseless_channel,
    parse_code,
    sample_codebook,
    serialize_code,
    threshold_decoder,
    two_step_code,
)
from jsclab.models import conditional_matrix, source_pmf

# Best deterministic two-step code at n = 6, c = 0.42, gamma = 0.07, seed 7
# on the Bernoulli(0.11) source over a BSC(0.05). Frozen from a direct run;
# the recheck below confirms the report against exact_error.
TWO_STEP_AVG_N6 = 0.3302724203345455


def enumerate_codebook_average(src, inp, ch, gamma, n):
    """Expected threshold-code error by summing over every codebook.

    Each source outcome draws its codeword independently, so a codebook
    is an assignment tuple with probability prod_v P(x_v | v). Decoding
    uses the same reference output law the ensemble formula uses.
    """
    p_v = source_pmf(src, n)
    cond = conditional_matrix(inp, src, ch, n)
    total = 0.0
    for assign in itertools.product(range(cond.shape[1]), repeat=len(p_v)):
        prob = float(np.prod([cond[v, assign[v]] for v in range(len(p_v))]))
        if prob == 0.0:
            continue
        code = threshold_decoder(np.array(assign), src, ch, inp, gamma, n)
        total += prob * exact_error(code, src, ch).average_error
    return total


class TestJointCode:
    def test_accepts_fail_entries_and_freezes_arrays(self):
        code = JointCode(
            n=1,
            encoder=np.array([0, 1]),
            decoder=np.array([FAIL, 1]),
            num_channel_inputs=2,
        )
        assert code.num_source_outcomes == 2
        assert code.num_channel_outputs == 2
        with pytest.raises(ValueError):
            code.encoder[0] = 1
        with pytest.raises(ValueError):
            code.decoder[1] = 0

    def test_rejects_encoder_outside_input_space(self):
        with pytest.raises(ValueError, match="channel input space"):
            JointCode(n=1, encoder=np.array([0, 2]), decoder=np.array([0]), num_channel_inputs=2)

    def test_rejects_decoder_outside_outcomes(self):
        with pytest.raises(ValueError, match="decoder output"):
            JointCode(n=1, encoder=np.array([0, 1]), decoder=np.array([2]), num_channel_inputs=2)
        with pytest.raises(ValueError, match="decoder output"):
            JointCode(n=1, encoder=np.array([0, 1]), decoder=np.array([-2]), num_channel_inputs=2)

    def test_rejects_empty_and_multidimensional_tables(self):
        with pytest.raises(ValueError, match="nonempty"):
            JointCode(n=1, encoder=np.array([], dtype=int), decoder=np.array([0]), num_channel_inputs=2)
        with pytest.raises(ValueError, match="1-D"):
            JointCode(n=1, encoder=np.array([[0, 1]]), decoder=np.array([0]), num_channel_inputs=2)


class TestSerialization:
    def test_round_trip_preserves_tables(self):
        _, _, code = avg_max_gap_instance(0.2)
        back = parse_code(serialize_code(code))
        assert back.n == code.n
        assert back.num_channel_inputs == code.num_channel_inputs
        assert np.array_equal(back.encoder, code.encoder)
        assert np.array_equal(back.decoder, code.decoder)

    def test_fail_renders_as_dash_and_round_trips(self):
        code = JointCode(
            n=2,
            encoder=np.array([3, 0]),
            decoder=np.array([1, FAIL, 0, FAIL]),
            num_channel_inputs=4,
        )
        text = serialize_code(code)
        lines = text.splitlines()
        assert lines[0] == "jsclab-code v1"
        assert "decoder 1 -" in lines
        back = parse_code(text)
        assert np.array_equal(back.decoder, code.decoder)

    @pytest.mark.parametrize(
        "text, complaint",
        [
            ("jsclab-data v9\nn 1\n", "not a jsclab-code"),
            ("jsclab-code v1\nn 1\ninputs 2\noutputs 1\nflux 0 0\ndecoder 0 0\n", "unrecognized line"),
            (
                "jsclab-code v1\nn 1\ninputs 2\noutputs 1\nencoder 0 0\nencoder 2 1\ndecoder 0 0\n",
                "encoder lines must cover",
            ),
            (
                "jsclab-code v1\nn 1\ninputs 2\noutputs 2\nencoder 0 0\ndecoder 0 0\ndecoder 0 0\n",
                "decoder lines must cover",
            ),
        ],
    )
    def test_rejects_malformed_tables(self, text, complaint):
        with pytest.raises(ValueError, match=complaint):
            parse_code(text)


class TestExactError:
    def test_gap_instance_average_versus_max(self):
        src, ch, code = avg_max_gap_instance(0.2)
        report = exact_error(code, src, ch)
        assert report.average_error == pytest.approx(0.2, abs=1e-15)
        assert report.max_error == 1.0
        assert report.per_symbol_errors == {0: 1.0, 1: 0.0, 2: 0.0}

    def test_rejects_code_sized_for_another_instance(self):
        src, ch, code = avg_max_gap_instance(0.2)
        with pytest.raises(ValueError, match="source outcomes"):
            exact_error(code, TableSource.constant((0.5, 0.5)), ch)
        with pytest.raises(ValueError, match="outputs"):
            exact_error(code, src, noiseless_channel(3))

    def test_report_validation(self):
        with pytest.raises(ValueError, match="average error"):
            ErrorReport(average_error=1.5, max_error=1.0, per_symbol_errors={0: 1.0})
        with pytest.raises(ValueError, match="disagrees"):
            ErrorReport(average_error=0.1, max_error=0.5, per_symbol_errors={0: 0.4})


class TestThresholdDecoder:
    def test_candidate_threshold_is_strict(self):
        # Geometric source over a noiseless quaternary channel with the
        # uniform reference law: the density is log 4 for every codeword
        # and the most probable outcome has self-information log 2. At
        # gamma = log 2 the candidate test lands exactly on the boundary
        # (doubling log 2 is exact in floats), so a strict rule keeps no
        # candidates at all and every output fails.
        src = TableSource.constant((0.5, 0.25, 0.125, 0.125))
        ch = noiseless_channel(4)
        ref = IidInput(pmf=(0.25, 0.25, 0.25, 0.25))
        codebook = np.array([0, 1, 2, 3])
        at_boundary = threshold_decoder(codebook, src, ch, ref, math.log(2.0), 1)
        assert np.all(at_boundary.decoder == FAIL)
        assert exact_error(at_boundary, src, ch).average_error == 1.0

        below = threshold_decoder(codebook, src, ch, ref, math.log(2.0) - 1e-9, 1)
        assert below.decoder[0] == 0
        assert np.all(below.decoder[1:] == FAIL)
        assert exact_error(below, src, ch).average_error == 0.5

    def test_two_candidates_fail_instead_of_guessing(self):
        # Outcomes 0 and 1 share a codeword and both clear the threshold
        # at output 0, so the unique-candidate rule must refuse.
        src = TableSource.constant((0.45, 0.45, 0.1))
        ch = noiseless_channel(2)
        ref = IidInput(pmf=(0.1, 0.9))
        code = threshold_decoder(np.array([0, 0, 1]), src, ch, ref, 0.1, 1)
        assert np.all(code.decoder == FAIL)
        report = exact_error(code, src, ch)
        assert report.average_error == 1.0
        assert set(report.per_symbol_errors.values()) == {1.0}

    def test_rejects_nonpositive_gamma_and_short_codebooks(self):
        src = TableSource.constant((0.5, 0.5))
        with pytest.raises(ValueError, match="gamma"):
            threshold_decoder(np.array([0, 1]), src, bsc(0.1), IidInput(pmf=(0.5, 0.5)), 0.0, 1)
        with pytest.raises(ValueError, match="codebook covers"):
            threshold_decoder(np.array([0]), src, bsc(0.1), IidInput(pmf=(0.5, 0.5)), 0.1, 1)


ENSEMBLE_CASES = [
    (TableSource.constant((0.7, 0.3)), IidInput(pmf=(0.6, 0.4)), bsc(0.1), 1),
    (TableSource.constant((0.8, 0.15, 0.05)), IidInput(pmf=(0.3, 0.7)), bsc(0.1), 1),
    (TableSource.constant((0.7, 0.3)), IidInput(pmf=(0.6, 0.4)), noiseless_channel(2), 1),
    (TableSource(pmfs=lambda n: (0.7, 0.3)), IidInput(pmf=(0.8, 0.2)), bsc(0.1), 2),
]


@pytest.mark.parametrize("case", range(len(ENSEMBLE_CASES)))
@pytest.mark.parametrize("gamma", [0.05, 0.2, 0.7])
def test_ensemble_average_matches_codebook_enumeration(case, gamma):
    src, inp, ch, n = ENSEMBLE_CASES[case]
    expected = enumerate_codebook_average(src, inp, ch, gamma, n)
    got = ensemble_average_error(src, inp, ch, gamma, n)
    assert got == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("gamma", [0.05, 0.3])
def test_ensemble_average_with_conditional_input(gamma):
    src = TableSource.constant((0.6, 0.4))
    inp = ConditionalInput.constant(((0.8, 0.2), (0.3, 0.7)))
    ch = bsc(0.2)
    expected = enumerate_codebook_average(src, inp, ch, gamma, 1)
    assert ensemble_average_error(src, inp, ch, gamma, 1) == pytest.approx(expected, abs=1e-12)


def test_ensemble_average_frozen_and_monotone_in_gamma():
    src, inp, ch, n = ENSEMBLE_CASES[0]
    assert ensemble_average_error(src, inp, ch, 0.05, n) == pytest.approx(0.37, abs=1e-15)
    assert ensemble_average_error(src, inp, ch, 0.2, n) == pytest.approx(0.748, abs=1e-15)
    errs = [ensemble_average_error(src, inp, ch, g, n) for g in (0.05, 0.2, 0.7, 1.5)]
    assert errs == sorted(errs)
    assert errs[-1] == 1.0


def test_ensemble_average_rejects_nonpositive_gamma():
    src, inp, ch, n = ENSEMBLE_CASES[0]
    with pytest.raises(ValueError, match="gamma"):
        ensemble_average_error(src, inp, ch, -0.1, n)


class TestMapDecoder:
    def test_prefers_heavier_posterior_on_merged_inputs(self):
        # Outcomes 0 and 1 collide at output 0; outcome 1 carries twice
        # the prior, so the posterior rule points there.
        src, ch, _ = avg_max_gap_instance(0.2)
        code = map_decoder(np.array([1, 1, 2]), src, ch, 1)
        assert code.decoder.tolist() == [1, 2]
        assert exact_error(code, src, ch).average_error == pytest.approx(0.2, abs=1e-15)

    def test_exact_tie_breaks_to_smaller_outcome(self):
        # 0.25 == 0.25 bit for bit, unlike near-ties built from thirds.
        src = TableSource.constant((0.25, 0.25, 0.5))
        code = map_decoder(np.array([1, 1, 2]), src, avg_max_gap_channel(), 1)
        assert code.decoder.tolist() == [0, 2]
        assert exact_error(code, src, avg_max_gap_channel()).average_error == pytest.approx(0.25, abs=1e-15)

    def test_budget_guard(self):
        src = IidSource(pmf=(0.5, 0.5))
        with pytest.raises(BudgetError):
            map_decoder(np.zeros(16, dtype=int), src, bsc(0.1), 4, budget=10)


class TestBruteForceOracle:
    def test_gap_instance_optimum(self):
        src, ch, _ = avg_max_gap_instance(0.2)
        report, code = brute_force_optimal_error(src, ch, 1)
        assert report.average_error == pytest.approx(0.2, abs=1e-15)
        assert report.max_error == 1.0
        # the optimum must sacrifice the light outcome to the collision
        assert code.encoder[0] == code.encoder[1]
        assert code.encoder[2] != code.encoder[0]
        recheck = exact_error(code, src, ch)
        assert recheck.average_error == report.average_error

    def test_beats_every_decoder_for_every_encoder(self):
        src = TableSource.constant((0.7, 0.3))
        ch = bsc(0.3)
        optimum, _ = brute_force_optimal_error(src, ch, 1)
        for encoder in itertools.product(range(2), repeat=2):
            mapped = exact_error(map_decoder(np.array(encoder), src, ch, 1), src, ch)
            for decoder in itertools.product((FAIL, 0, 1), repeat=2):
                code = JointCode(
                    n=1,
                    encoder=np.array(encoder),
                    decoder=np.array(decoder),
                    num_channel_inputs=2,
                )
                err = exact_error(code, src, ch).average_error
                assert err >= mapped.average_error - 1e-12
                assert err >= optimum.average_error - 1e-12

    def test_oracle_budget_guard(self):
        src = IidSource(pmf=(0.5, 0.5))
        with pytest.raises(BudgetError, match="oracle budget"):
            brute_force_optimal_error(src, bsc(0.1), 4, oracle_budget=100)


def test_sample_codebook_draws_product_blocks():
    rng = np.random.default_rng(3)
    draws = sample_codebook(rng, IidInput(pmf=(0.9, 0.1)), bsc(0.05), 4000, 2)
    assert draws.shape == (4000,)
    assert draws.min() >= 0 and draws.max() < 4
    # block index 0 is the all-zeros word, probability 0.81
    assert np.mean(draws == 0) == pytest.approx(0.81, abs=0.02)
    again = sample_codebook(np.random.default_rng(3), IidInput(pmf=(0.9, 0.1)), bsc(0.05), 4000, 2)
    assert np.array_equal(draws, again)


class TestTwoStepCode:
    SRC = IidSource(pmf=(0.89, 0.11))
    CH = bsc(0.05)
    INP = IidInput(pmf=(0.5, 0.5))

    def test_deterministic_given_seed(self):
        first = two_step_code(self.SRC, self.CH, self.INP, c=0.42, gamma=0.07, n=6, seed=7)
        second = two_step_code(self.SRC, self.CH, self.INP, c=0.42, gamma=0.07, n=6, seed=7)
        assert np.array_equal(first[0].encoder, second[0].encoder)
        assert np.array_equal(first[0].decoder, second[0].decoder)
        assert first[1].average_error == second[1].average_error

    def test_frozen_error_and_report_recheck(self):
        code, report = two_step_code(self.SRC, self.CH, self.INP, c=0.42, gamma=0.07, n=6, seed=7)
        assert report.average_error == pytest.approx(TWO_STEP_AVG_N6, abs=1e-12)
        # dropped source outcomes always decode wrongly
        assert report.max_error == 1.0
        recheck = exact_error(code, self.SRC, self.CH)
        assert recheck.average_error == report.average_error
        assert recheck.per_symbol_errors == report.per_symbol_errors

    def test_source_stage_keeps_most_probable_outcomes(self):
        n, c = 6, 0.42
        code, _ = two_step_code(self.SRC, self.CH, self.INP, c=c, gamma=0.07, n=n, seed=7)
        m = math.ceil(math.exp(c * n))
        assert len(np.unique(code.encoder)) <= m
        p_v = source_pmf(self.SRC, n)
        kept = set(np.argsort(-p_v, kind="stable")[:m].tolist())
        assert set(code.decoder.tolist()) <= kept | {FAIL}

    def test_extra_draws_never_hurt(self):
        # the sixteen-draw search starts with the single-draw codebook,
        # so its best error can only improve on it
        _, best = two_step_code(self.SRC, self.CH, self.INP, c=0.42, gamma=0.07, n=6, seed=7)
        _, single = two_step_code(
            self.SRC, self.CH, self.INP, c=0.42, gamma=0.07, n=6, num_codebooks=1, seed=7
        )
        assert best.average_error <= single.average_error + 1e-15

    def test_parameter_validation(self):
        with pytest.raises(ValueError, match="gamma"):
            two_step_code(self.SRC, self.CH, self.INP, c=0.4, gamma=0.0, n=4)
        with pytest.raises(ValueError, match="codebook"):
            two_step_code(self.SRC, self.CH, self.INP, c=0.4, gamma=0.1, n=4, num_codebooks=0)
