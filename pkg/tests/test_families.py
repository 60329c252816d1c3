import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cesaro_lab.errors import StructuralError
from cesaro_lab.families import (
    BurstRule,
    CallableFamily,
    CesaroFamily,
    ConstantRule,
    GrowthProbe,
    PowerRule,
    RuleFamily,
    SequenceWindow,
    TableFamily,
    UniformNoiseRule,
    cesaro,
    constant_family,
    convex_combination,
    diverges,
    evaluate,
    rule_from_dict,
)
from cesaro_lab.families.probe import block_maxima
from cesaro_lab.families.table import tag_from_meta
from cesaro_lab.models import AtomicSpace, AtomTag, SimpleRV


class TestEvaluate:
    def test_constant_in_atom(self):
        window = SequenceWindow(CallableFamily(lambda n, m: n), (1, 2, 3), AtomicSpace.uniform(3))
        assert evaluate(window, 2).values.tolist() == [2.0, 2.0, 2.0]

    def test_constant_in_index(self):
        window = SequenceWindow.first(CallableFamily(lambda n, m: m), AtomicSpace.uniform(4), 10)
        assert evaluate(window, 7).values.tolist() == [1.0, 2.0, 3.0, 4.0]

    def test_single_atom_spike(self):
        family = CallableFamily(lambda n, m: n if m == 2 else 0)
        window = SequenceWindow(family, (5, 10), AtomicSpace(masses=(0.5, 0.3, 0.2)))
        assert evaluate(window, 2).values.tolist() == [0.0, 10.0, 0.0]

    @pytest.mark.parametrize("k", [0, 4])
    def test_position_out_of_range(self, k):
        window = SequenceWindow(constant_family(1), (1, 2, 3), AtomicSpace.uniform(2))
        with pytest.raises(StructuralError):
            evaluate(window, k)

    @pytest.mark.parametrize("indices", [(), (0, 1), (2, 2), (3, 1)])
    def test_indices_must_increase(self, indices):
        with pytest.raises(StructuralError):
            SequenceWindow(constant_family(1), indices, AtomicSpace.uniform(2))

    def test_negative_coefficients_are_structural(self):
        window = SequenceWindow.first(CallableFamily(lambda n, m: -1.0), AtomicSpace.uniform(2), 4)
        with pytest.raises(StructuralError):
            window.matrix


class TestCesaro:
    def test_constant(self):
        window = SequenceWindow.first(constant_family(7), AtomicSpace.uniform(3), 50)
        for k in (1, 13, 50):
            assert cesaro(window, k).values == pytest.approx([7.0, 7.0, 7.0])

    @pytest.mark.parametrize("k", [1, 2, 10, 99])
    def test_arithmetic_series(self, k):
        window = SequenceWindow.first(CallableFamily(lambda n, m: n), AtomicSpace.uniform(2), 100)
        assert cesaro(window, k).values == pytest.approx([(k + 1) / 2] * 2)

    def test_alternating(self):
        window = SequenceWindow.first(CallableFamily(lambda n, m: n % 2), AtomicSpace.uniform(3), 64)
        assert cesaro(window, 64).values == pytest.approx([0.5, 0.5, 0.5])

    def test_matrix_agrees_with_exact_sum(self, three_atom_window):
        k = 777
        assert three_atom_window.cesaro_matrix[k - 1] == pytest.approx(cesaro(three_atom_window, k).values, rel=1e-12)

    def test_cesaro_family_mirrors_window(self, three_atom_window):
        hull = CesaroFamily(three_atom_window)
        assert hull.length == three_atom_window.length
        assert hull.evaluate(10).values == pytest.approx(three_atom_window.cesaro(10).values)
        # running means of a bounded rule stay bounded
        assert hull.atom_tags()[1].is_bounded


class TestConvexCombination:
    def test_identity(self):
        rv = SimpleRV([1.0, 5.0])
        assert convex_combination([rv], [1.0]).values.tolist() == [1.0, 5.0]

    def test_midpoint(self):
        combined = convex_combination([SimpleRV([1, 1]), SimpleRV([3, 3])], [0.5, 0.5])
        assert combined.values.tolist() == [2.0, 2.0]

    def test_three_terms(self):
        rvs = [SimpleRV([0, 4]), SimpleRV([4, 0]), SimpleRV([2, 2])]
        assert convex_combination(rvs, [0.25, 0.25, 0.5]).values.tolist() == [2.0, 2.0]

    @pytest.mark.parametrize("weights", [[0.5, 0.6], [1.2, -0.2], [0.5]])
    def test_rejects_bad_weights(self, weights):
        with pytest.raises(StructuralError):
            convex_combination([SimpleRV([1.0]), SimpleRV([2.0])], weights)

    def test_rejects_length_mismatch(self):
        with pytest.raises(StructuralError):
            convex_combination([SimpleRV([1.0]), SimpleRV([1.0, 2.0])], [0.5, 0.5])


class TestRules:
    def test_power_tags(self):
        assert PowerRule(alpha=1.0).tag().is_unbounded
        assert PowerRule(alpha=-2.0).tag().is_bounded
        assert PowerRule(alpha=2.0, scale=0.0).tag().is_bounded

    def test_bounded_tag_is_at_least_one(self):
        assert ConstantRule(0.25).tag().bound == 1.0
        assert ConstantRule(3.0).tag().bound == 3.0

    def test_burst_tags_follow_the_window(self):
        rule = BurstRule(base=1.0, spike=1.0, growth=1.0, period=2, phase=1)
        assert rule.tag().is_unbounded
        assert rule.tag(np.array([2, 4, 6, 8])).bound == 1.0
        assert rule.tag(np.array([2, 3])).is_unbounded
        assert rule.values(np.array([1, 2, 3])).tolist() == [2.0, 1.0, 4.0]

    def test_uniform_noise_is_reproducible_per_index(self):
        rule = UniformNoiseRule(low=0.0, high=2.0, seed=3, stream=1)
        full = rule.values(np.arange(1, 6))
        assert rule.values(np.array([3, 5])).tolist() == full[[2, 4]].tolist()
        assert ((full >= 0) & (full <= 2)).all()

    def test_uniform_noise_far_index_stands_alone(self):
        rule = UniformNoiseRule(low=1.0, high=3.0, seed=5)
        far = 10**12
        alone = rule.values(np.array([far]))
        mixed = rule.values(np.array([2, 7, far]))
        assert alone.shape == (1,)
        assert mixed[2] == alone[0]
        assert 1.0 <= alone[0] <= 3.0
        assert rule.values(np.array([], dtype=int)).size == 0

    def test_rule_from_dict(self):
        rule = rule_from_dict({"kind": "power", "alpha": 0.5, "scale": 2})
        assert rule == PowerRule(alpha=0.5, scale=2.0)
        assert rule_from_dict(rule.to_dict()) == rule

    @pytest.mark.parametrize("data", [{"kind": "wave"}, {"kind": "constant", "level": 1}, {"value": 1}])
    def test_rule_from_dict_rejects(self, data):
        with pytest.raises(StructuralError):
            rule_from_dict(data)

    def test_rule_family_needs_a_rule(self):
        family = RuleFamily({1: ConstantRule(1.0)})
        with pytest.raises(StructuralError):
            family.coefficients(np.array([1]), 2)

    def test_rule_family_round_trips(self, three_atom_family):
        restored = RuleFamily.from_dict(three_atom_family.to_dict())
        assert restored.rules == three_atom_family.rules


class TestTableFamily:
    def test_from_csv(self, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text("n,1,2\n1,0.5,1\n2,0.5,2\n3,0.5,3\n")
        table = TableFamily.from_csv(path, meta={2: AtomTag.unbounded()})
        assert table.max_index == 3
        assert table.coefficients(np.array([1, 3]), 2).tolist() == [1.0, 3.0]
        assert table.tag_for(1).is_unknown
        assert table.tag_for(2).is_unbounded

    def test_missing_cell(self, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text("n,1,2\n1,0.5,1\n2,,2\n")
        with pytest.raises(StructuralError, match="missing cell"):
            TableFamily.from_csv(path)

    def test_non_integer_header(self, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text("n,a,b\n1,0,0\n")
        with pytest.raises(StructuralError):
            TableFamily.from_csv(path)

    def test_row_outside_table(self):
        table = TableFamily.from_array(np.ones((4, 2)))
        with pytest.raises(StructuralError):
            table.coefficients(np.array([5]), 1)

    def test_cesaro_tags_keep_only_bounded(self):
        table = TableFamily.from_array(np.ones((4, 2)), meta={1: AtomTag.bounded(2.0), 2: AtomTag.unbounded()})
        assert table.cesaro_tag_for(1).bound == 2.0
        assert table.cesaro_tag_for(2).is_unknown

    def test_declared_cesaro_tags_win(self):
        table = TableFamily.from_array(
            np.ones((4, 3)),
            meta={1: AtomTag.bounded(2.0), 3: AtomTag.unbounded()},
            cesaro_meta={3: AtomTag.unbounded(), 2: AtomTag.bounded(5.0)},
        )
        assert table.cesaro_tag_for(1).bound == 2.0
        assert table.cesaro_tag_for(2).bound == 5.0
        assert table.cesaro_tag_for(3).is_unbounded
        assert table.cesaro_meta_for([1, 2, 3])[3].is_unbounded

    def test_tag_from_meta(self):
        assert tag_from_meta("unbounded").is_unbounded
        assert tag_from_meta("unknown").is_unknown
        assert tag_from_meta({"bounded": 4}).bound == 4.0
        with pytest.raises(StructuralError):
            tag_from_meta({"bounded": -1})


class TestGrowthProbe:
    def test_block_maxima(self):
        assert block_maxima(np.arange(1, 9)) == [1.0, 3.0, 7.0, 8.0]

    def test_linear_growth_diverges(self):
        assert diverges(np.arange(1, 1025, dtype=float))

    def test_bounded_sequences_do_not(self):
        n = np.arange(1, 4097, dtype=float)
        assert not diverges(np.full(n.size, 3.0))
        assert not diverges(2 * np.abs(np.sin(n)))

    def test_short_sequences_never_diverge(self):
        assert not diverges(np.arange(1, 8, dtype=float))

    def test_classify(self):
        probe = GrowthProbe()
        assert probe.classify(np.arange(1, 2049, dtype=float)).is_unbounded
        assert probe.classify(np.full(2048, 2.0)).bound == pytest.approx(2.2)


def coefficient_rows(rows):
    return st.lists(
        st.lists(st.floats(min_value=0, max_value=100, allow_nan=False), min_size=2, max_size=2),
        min_size=rows,
        max_size=rows,
    )


@settings(max_examples=50)
@given(st.integers(min_value=1, max_value=12), st.floats(min_value=0, max_value=1), st.data())
def test_cesaro_is_linear_in_the_family(rows, weight, data):
    first = np.array(data.draw(coefficient_rows(rows)))
    second = np.array(data.draw(coefficient_rows(rows)))
    k = data.draw(st.integers(min_value=1, max_value=rows))
    space = AtomicSpace(masses=(0.5, 0.5))

    windows = [SequenceWindow.first(TableFamily.from_array(values), space, rows) for values in (first, second)]
    mixed = SequenceWindow.first(TableFamily.from_array(weight * first + (1 - weight) * second), space, rows)

    expected = convex_combination([w.cesaro(k) for w in windows], [weight, 1 - weight])
    assert mixed.cesaro(k).values == pytest.approx(expected.values, rel=1e-9, abs=1e-9)


@given(st.floats(min_value=0, max_value=1), st.floats(min_value=0, max_value=1))
def test_nested_combinations_flatten(a, b):
    x, y, z = SimpleRV([1.0, 4.0]), SimpleRV([2.0, 0.0]), SimpleRV([8.0, 3.0])
    nested = convex_combination([convex_combination([x, y], [a, 1 - a]), z], [b, 1 - b])
    flat = convex_combination([x, y, z], [b * a, b * (1 - a), 1 - b])
    np.testing.assert_allclose(nested.values, flat.values, rtol=1e-12, atol=1e-12)
