from structcode.entropy import (
    DistributionTable,
    InvalidDistribution,
    UnsupportedModel,
    binary_entropy,
    conditional_entropy,
    constrained_km_closed,
    constrained_sw_closed,
    cor1_gain,
    cor1_gain_limit,
    cor1_km_closed,
    cor1_sw_closed,
    corq3_km_bound,
    corq3_sw_closed,
    entropy_bits,
    entropy_from_probabilities,
    find_message_collision,
    h3,
    inner_message,
    inner_product_entropy,
    nonrecovery_check,
    product,
    pushforward,
    rate_km_inner,
    rate_km_inner_bound,
    rate_km_square,
    rate_km_symmetric,
    rate_report,
    rate_s_entrywise,
    rate_sv,
    rate_sw,
    source_a,
    source_pair,
)
from structcode.schemes.common import OddLength
from structcode.sources import (
    CrossPairedDSBS,
    PairedDSBS,
    SingleDSBS,
    TernaryCorrelated,
    parse_custom_table,
)

import math
import unittest

TOLERANCE = 1e-9
CLOSED_FORM_GRID = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9]

CONSTANT_PAIR_TABLE = """
2 2 1 1
0 0 1.0
"""


class EntropyPrimitiveTests(unittest.TestCase):
    def test_entropy_from_probabilities(self):
        self.assertAlmostEqual(1.0, entropy_from_probabilities((0.5, 0.5)))
        self.assertAlmostEqual(2.0, entropy_from_probabilities((0.25,) * 4))
        self.assertEqual(0.0, entropy_from_probabilities((1.0, 0.0)))

    def test_binary_entropy(self):
        self.assertEqual(0.0, binary_entropy(0.0))
        self.assertEqual(0.0, binary_entropy(1.0))
        self.assertAlmostEqual(0.811278124459, binary_entropy(0.25), places=10)
        self.assertAlmostEqual(binary_entropy(0.3), binary_entropy(0.7), places=12)

    def test_three_point_entropy(self):
        self.assertAlmostEqual(math.log2(3), h3(1 / 3, 1 / 3), places=12)
        self.assertAlmostEqual(binary_entropy(0.1), h3(0.9, 0.1), places=12)

    def test_distribution_table(self):
        t = DistributionTable.from_mapping({"x": 0.25, "y": 0.75})

        self.assertEqual(0.75, t.prob("y"))
        self.assertEqual(0.0, t.prob("z"))
        self.assertEqual(2, len(t))
        self.assertAlmostEqual(binary_entropy(0.25), entropy_bits(t))

    def test_distribution_table_errors(self):
        self.assertRaises(InvalidDistribution, lambda: DistributionTable(("x",), (0.5,)))
        self.assertRaises(InvalidDistribution, lambda: DistributionTable(("x", "x"), (0.5, 0.5)))
        self.assertRaises(InvalidDistribution, lambda: DistributionTable(("x", "y"), (1.5, -0.5)))
        self.assertRaises(InvalidDistribution, lambda: DistributionTable(("x",), (0.5, 0.5)))


class EnumeratedEntropyTests(unittest.TestCase):
    def test_pushforward_of_product(self):
        t = pushforward(SingleDSBS(0.2).build(), product(2))

        self.assertAlmostEqual(0.6, t.prob(0))
        self.assertAlmostEqual(0.4, t.prob(1))

    def test_conditional_entropy_of_dsbs(self):
        model = SingleDSBS(0.2).build()

        self.assertAlmostEqual(
            binary_entropy(0.2), conditional_entropy(model, source_pair, source_a), delta=TOLERANCE
        )

    def test_inner_product_entropy(self):
        self.assertAlmostEqual(
            binary_entropy(0.4), inner_product_entropy(SingleDSBS(0.2).build()), delta=TOLERANCE
        )

    def test_entrywise_and_embedding_rates_agree_on_one_entry(self):
        model = SingleDSBS(0.2).build()
        expected = 2 * (binary_entropy(0.2) + 0.8)

        self.assertAlmostEqual(expected, rate_s_entrywise(model), delta=TOLERANCE)
        self.assertAlmostEqual(expected, rate_sv(model), delta=TOLERANCE)

    def test_independent_uniform_bits(self):
        model = SingleDSBS(0.5).build()

        self.assertAlmostEqual(2.0, rate_sw(model), delta=TOLERANCE)
        self.assertAlmostEqual(3.0, rate_s_entrywise(model), delta=TOLERANCE)


class InnerProductRateTests(unittest.TestCase):
    def test_cross_paired_worked_value(self):
        self.assertAlmostEqual(4.120112, rate_km_inner(CrossPairedDSBS(2, 0.25).build()), places=6)

    def test_enumeration_matches_closed_forms(self):
        for m in [2, 4]:
            for p in CLOSED_FORM_GRID:
                model = CrossPairedDSBS(m, p).build()

                self.assertAlmostEqual(cor1_km_closed(m, p), rate_km_inner(model), delta=TOLERANCE)
                self.assertAlmostEqual(cor1_sw_closed(m, p), rate_sw(model), delta=TOLERANCE)
                self.assertAlmostEqual(rate_km_inner(model), rate_km_inner_bound(model), delta=TOLERANCE)

    def test_bound_is_an_upper_bound(self):
        for p in [0.1, 0.3]:
            model = PairedDSBS(2, p).build()
            self.assertLessEqual(rate_km_inner(model), rate_km_inner_bound(model) + TOLERANCE)

    def test_message_column_matches_symmetric_rate(self):
        model = CrossPairedDSBS(2, 0.2).build()
        self.assertAlmostEqual(rate_km_inner(model), rate_km_symmetric(model), delta=TOLERANCE)

    def test_inner_rates_need_even_columns(self):
        self.assertRaises(OddLength, lambda: rate_km_inner(SingleDSBS(0.1).build()))
        self.assertRaises(UnsupportedModel, lambda: rate_km_inner(TernaryCorrelated(2, 0.2, 0.1).build()))
        self.assertRaises(UnsupportedModel, lambda: rate_sv(TernaryCorrelated(1, 0.2, 0.1).build()))


class GainTests(unittest.TestCase):
    def test_worked_gain(self):
        self.assertAlmostEqual(4 / 5.5, cor1_gain(2, 0.5), places=12)
        self.assertAlmostEqual(0.72727, cor1_gain(2, 0.5), places=5)

    def test_limits_in_p(self):
        for m in [2, 4, 8, 64]:
            self.assertAlmostEqual(m / 2, cor1_gain(m, 1.0), places=12)
            self.assertEqual(math.inf, cor1_gain(m, 0.0))

    def test_gain_grows_as_p_shrinks(self):
        self.assertGreater(cor1_gain(4, 1e-3), cor1_gain(4, 1e-2))
        self.assertGreater(cor1_gain(4, 1e-2), cor1_gain(4, 1e-1))

        for m in [4, 8, 16]:
            for p in [0.01, 0.03, 0.05]:
                self.assertGreater(cor1_gain(m, p), 1.0)

    def test_approach_to_large_length_limit(self):
        limit = cor1_gain_limit(0.01)
        gaps = [abs(cor1_gain(m, 0.01) - limit) / limit for m in [16, 32, 64, 128]]

        self.assertSequenceEqual(sorted(gaps, reverse=True), gaps)
        self.assertLess(gaps[2], 0.1)
        self.assertEqual(math.inf, cor1_gain_limit(0.0))

    def test_constrained_closed_forms(self):
        self.assertAlmostEqual(8 * binary_entropy(0.1), constrained_km_closed(2, 0.1))
        self.assertAlmostEqual(4 * (1 + binary_entropy(0.1)), constrained_sw_closed(2, 0.1))


class TernaryTests(unittest.TestCase):
    GRID = [0.01, 0.05, 0.1, 0.2, 0.3]

    def test_worked_closed_form(self):
        self.assertAlmostEqual(2.039946, corq3_sw_closed(1, 0.2, 0.1), places=5)

    def test_enumerated_joint_entropy_matches_closed_form(self):
        for m in [1, 2]:
            for p in self.GRID:
                model = TernaryCorrelated(m, 0.2, p).build()
                self.assertAlmostEqual(corq3_sw_closed(m, 0.2, p), rate_sw(model), delta=TOLERANCE)

    def test_square_rate_under_bound(self):
        for m in [1, 2]:
            for p in self.GRID + [0.5, 0.9]:
                model = TernaryCorrelated(m, 0.2, p).build()
                self.assertLessEqual(
                    rate_km_square(model), corq3_km_bound(m, 0.2, p) + TOLERANCE, f"m={m} p={p}"
                )

    def test_bound_worked_value(self):
        # h3 collapses to h(p) and h(0.5) = 1.
        self.assertAlmostEqual(2 + 4 * math.log2(3), corq3_km_bound(1, 0.2, 0.5), places=12)

    def test_gain_grows_as_p_shrinks(self):
        def gain(p: float) -> float:
            model = TernaryCorrelated(1, 0.2, p).build()
            return rate_sw(model) / rate_km_square(model)

        self.assertGreater(gain(0.01), gain(0.1))

    def test_square_rate_needs_matrices(self):
        self.assertRaises(UnsupportedModel, lambda: rate_km_square(CrossPairedDSBS(2, 0.1).build()))


class NonrecoveryTests(unittest.TestCase):
    def test_cross_paired_residual(self):
        report = nonrecovery_check(CrossPairedDSBS(2, 0.25).build())

        self.assertAlmostEqual(1.5625, report.residual, places=4)
        self.assertGreater(report.residual, 0)
        self.assertAlmostEqual(report.lhs, report.h_product + report.h_side_given_product)

    def test_independent_uniform_sources_stay_hidden(self):
        report = nonrecovery_check(PairedDSBS(2, 0.5).build())
        self.assertGreater(report.residual, 0)

    def test_deterministic_models(self):
        self.assertFalse(nonrecovery_check(PairedDSBS(2, 0.0).build()).holds)
        self.assertTrue(nonrecovery_check(CrossPairedDSBS(2, 0.0).build()).holds)

    def test_expansion_equality(self):
        for model in [CrossPairedDSBS(2, p).build() for p in [0.0, 0.1, 0.25, 0.5]] + [
            PairedDSBS(2, 0.3).build(),
            CrossPairedDSBS(4, 0.2).build(),
        ]:
            self.assertLess(nonrecovery_check(model).expansion_gap, TOLERANCE, model.name)

    def test_only_inner_product_messages(self):
        self.assertRaises(UnsupportedModel, lambda: nonrecovery_check(TernaryCorrelated(1, 0.2, 0.1).build()))

    def test_message_collisions(self):
        collision = find_message_collision(CrossPairedDSBS(2, 0.25).build())

        self.assertIsNotNone(collision)
        assert collision is not None
        self.assertNotEqual(collision.first, collision.second)

        a, b = collision.first
        c, d = collision.second
        first = inner_message(2)(a.entries[None], b.entries[None])[0].tolist()
        second = inner_message(2)(c.entries[None], d.entries[None])[0].tolist()
        self.assertEqual(first, second)
        self.assertEqual(tuple(first), collision.message)

    def test_single_outcome_has_no_collision(self):
        self.assertIsNone(find_message_collision(parse_custom_table(CONSTANT_PAIR_TABLE)))


class RateReportTests(unittest.TestCase):
    def test_binary_column_model(self):
        report = rate_report(CrossPairedDSBS(2, 0.25).build())

        self.assertAlmostEqual(4.120112, report.r_km, places=6)
        self.assertIsNotNone(report.r_s)
        self.assertIsNotNone(report.r_sv)
        self.assertIsNotNone(report.h_inner)
        self.assertAlmostEqual(report.r_sw / report.r_km, report.gain)

    def test_ternary_matrix_model(self):
        model = TernaryCorrelated(1, 0.2, 0.1).build()
        report = rate_report(model)

        self.assertAlmostEqual(rate_km_square(model), report.r_km)
        self.assertIsNone(report.r_s)
        self.assertIsNone(report.r_sv)
        self.assertIsNone(report.h_inner)

    def test_gain_without_structured_rate(self):
        report = rate_report(SingleDSBS(0.1).build())

        self.assertIsNone(report.r_km)
        self.assertIsNone(report.gain)
