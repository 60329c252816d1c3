import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cesaro_lab.analyzer import brute_force_boundedness_oracle, oracle_agreement
from cesaro_lab.analyzer.oracle import exceedance_curve, oracle_profile, sample_hull
from cesaro_lab.errors import StructuralError
from cesaro_lab.families import ConstantRule, PowerRule, RuleFamily, SequenceWindow
from cesaro_lab.models import AtomicSpace, Provenance, SimpleRV


def test_constant_rv_is_bounded_at_the_grid_point_above_it():
    decision = brute_force_boundedness_oracle([SimpleRV([1.0, 1.0])], AtomicSpace.uniform(2), 0.1, [0.5, 2.0])
    assert decision.bounded
    assert decision.bound == 2.0
    assert decision.method == "oracle"
    assert decision.provenance is Provenance.HEURISTIC


def test_linear_growth_is_unbounded_on_the_grid():
    rvs = [SimpleRV([float(n)]) for n in range(1, 101)]
    decision = brute_force_boundedness_oracle(
        rvs, AtomicSpace(masses=(1.0,)), 0.5, np.linspace(1.0, 50.0, 50), samples=200, seed=3
    )
    assert not decision.bounded


@pytest.mark.parametrize(
    "rvs, grid",
    [
        ([], [1.0]),
        ([SimpleRV([1.0, 1.0])], []),
        ([SimpleRV([1.0])], [1.0]),
        ([SimpleRV([np.inf, 1.0], is_limit=True)], [1.0]),
    ],
)
def test_rejects_bad_inputs(rvs, grid):
    with pytest.raises(StructuralError):
        brute_force_boundedness_oracle(rvs, AtomicSpace.uniform(2), 0.1, grid)


def test_sampling_does_not_depend_on_jobs():
    values = np.arange(12, dtype=float).reshape(4, 3)
    serial = sample_hull(values, samples=600, seed=9, jobs=1)
    threaded = sample_hull(values, samples=600, seed=9, jobs=4)
    assert serial.shape == (604, 3)
    np.testing.assert_array_equal(serial, threaded)


def test_hull_samples_stay_inside_the_hull():
    values = np.array([[0.0, 4.0], [4.0, 0.0]])
    members = sample_hull(values, samples=300, seed=1)
    np.testing.assert_allclose(members.sum(axis=1), 4.0)
    assert (members >= 0).all()


def test_exceedance_curve():
    space = AtomicSpace(masses=(0.5, 0.3, 0.2))
    members = np.array([[1.0, 2.0, 4.0], [3.0, 0.0, 0.0]])
    assert exceedance_curve(space, members, [0.5, 1.5, 3.5]).tolist() == pytest.approx([1.0, 0.5, 0.2])


class TestAgreement:
    def test_bounded_atoms(self, three_atom_window):
        result = oracle_agreement(three_atom_window, {1, 2}, 0.1, samples=100, seed=4)
        assert result.reduction.bounded
        assert result.oracle.bounded
        assert result.agrees

    def test_unbounded_atom(self, three_atom_window):
        result = oracle_agreement(three_atom_window, {3}, 0.1, samples=100, seed=4)
        assert not result.reduction.bounded
        assert not result.oracle.bounded
        assert result.agrees

    def test_light_unbounded_atom_lowers_epsilon(self, three_atom_window):
        result = oracle_agreement(three_atom_window, {1, 2, 3}, 0.5, samples=100, seed=4)
        assert result.effective_epsilon == pytest.approx(0.2)
        assert result.agrees

    def test_slow_growth_hides_below_the_grid(self):
        # n^0.1 stays under 1.8 up to 256 while the grid tops out above the constant 3
        family = RuleFamily({1: ConstantRule(3.0), 2: PowerRule(alpha=0.1)})
        window = SequenceWindow.first(family, AtomicSpace(masses=(0.5, 0.5)), 256)
        result = oracle_agreement(window, [1, 2], 0.1, samples=200)
        assert not result.reduction.bounded
        assert result.oracle.bounded
        assert not result.agrees

    def test_empty_restriction(self, three_atom_window):
        result = oracle_agreement(three_atom_window, set(), 0.1)
        assert result.reduction.bounded and result.oracle.bounded
        assert result.oracle.bound == 0.0


def test_profile_reports_every_epsilon(three_atom_window):
    decisions = oracle_profile(three_atom_window, [0.5, 0.1], m_grid=np.geomspace(0.1, 100.0, 32), samples=50, seed=2)
    assert [d.epsilon for d in decisions] == [0.5, 0.1]
    # the unbounded atom carries mass 0.2
    assert decisions[0].bounded
    assert not decisions[1].bounded


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=1, max_value=600))
def test_sampling_is_reproducible(seed, samples):
    values = np.arange(12.0).reshape(4, 3)
    first = sample_hull(values, samples=samples, seed=seed)
    np.testing.assert_array_equal(first, sample_hull(values, samples=samples, seed=seed, jobs=2))
