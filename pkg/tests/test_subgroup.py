import numpy as np
import pytest

from fidaudit.errors import DimensionMismatchError, EmptyGroupError
from fidaudit.importance import ImportanceMatrix
from fidaudit.subgroup import (
    GroupDistribution,
    SoftGroup,
    ThresholdGroup,
    fid_value,
    group_from_json_dict,
    group_size,
    membership,
)


def imp(col):
    col = np.asarray(col, dtype=float)
    return ImportanceMatrix(values=col[:, None], notion="EXTERNAL", feature_names=["f"])


def test_zero_theta_is_empty_group():
    S = np.column_stack([np.arange(4.0), np.ones(4)])
    w = membership(ThresholdGroup(theta=np.zeros(2)), S)
    np.testing.assert_array_equal(w, np.zeros(4))


def test_bias_only_positive_is_everyone():
    S = np.column_stack([np.arange(4.0), np.ones(4)])
    w = membership(ThresholdGroup(theta=np.array([0.0, 1.0])), S)
    np.testing.assert_array_equal(w, np.ones(4))


def test_unit_vector_indicates_binary_column():
    s = np.array([1.0, 0.0, 1.0, 0.0])
    S = np.column_stack([s, np.ones(4)])
    w = membership(ThresholdGroup(theta=np.array([1.0, 0.0])), S)
    np.testing.assert_array_equal(w, s)


def test_soft_membership_in_open_interval():
    S = np.column_stack([np.linspace(-3, 3, 7), np.ones(7)])
    w = membership(SoftGroup(theta=np.array([2.0, 0.0])), S)
    assert np.all((w > 0) & (w < 1))


def test_membership_dimension_check():
    with pytest.raises(DimensionMismatchError):
        membership(ThresholdGroup(theta=np.ones(3)), np.ones((4, 2)))


def test_hard_membership_scale_invariant():
    rng = np.random.default_rng(0)
    S = np.column_stack([rng.normal(size=10), np.ones(10)])
    theta = rng.normal(size=2)
    w1 = membership(ThresholdGroup(theta=theta), S)
    w2 = membership(ThresholdGroup(theta=17.3 * theta), S)
    np.testing.assert_array_equal(w1, w2)


def test_group_size_values():
    assert group_size(np.ones(10)) == 1.0
    assert group_size(np.zeros(5)) == 0.0
    assert group_size(np.array([1.0, 0.0, 1.0, 0.0])) == 0.5


def test_fid_of_population_is_zero():
    M = imp([0.3, -0.2, 0.5])
    fid, avg = fid_value(M, 0, np.ones(3))
    assert fid == 0.0
    assert avg == 0.0


def test_constant_column_has_zero_avg_fid():
    M = imp([0.7, 0.7, 0.7, 0.7])
    _, avg = fid_value(M, 0, np.array([1.0, 1.0, 0.0, 0.0]))
    assert avg == pytest.approx(0.0)


def test_fid_value_arithmetic():
    M = imp([1.0, -1.0, 0.0, 0.0])
    fid, avg = fid_value(M, 0, np.array([1.0, 0.0, 0.0, 0.0]))
    assert fid == pytest.approx(1.0)  # |1 - 0|
    assert avg == pytest.approx(1.0)  # |1/1 - 0/4|


def test_empty_group_raises_for_average():
    M = imp([1.0, 2.0])
    with pytest.raises(EmptyGroupError):
        fid_value(M, 0, np.zeros(2))
    fid, avg = fid_value(M, 0, np.zeros(2), allow_empty=True)
    assert fid == pytest.approx(3.0)
    assert np.isnan(avg)


def test_avg_fid_invariant_under_row_duplication():
    rng = np.random.default_rng(1)
    C = rng.normal(size=6)
    w = (rng.random(6) > 0.5).astype(float)
    if w.sum() == 0:
        w[0] = 1.0
    _, avg1 = fid_value(imp(C), 0, w)
    _, avg2 = fid_value(imp(np.tile(C, 2)), 0, np.tile(w, 2))
    assert avg1 == pytest.approx(avg2)


def test_complement_identity_exact():
    rng = np.random.default_rng(2)
    C = rng.normal(size=12)
    w = (rng.random(12) > 0.4).astype(float)
    M = imp(C)
    total = C.sum()
    assert w @ C + (1 - w) @ C == pytest.approx(total, abs=1e-12)


def test_group_json_round_trip():
    g = ThresholdGroup(theta=np.array([1.5, -0.5]))
    doc = g.to_json_dict(["s", "bias"])
    assert doc["kind"] == "hard"
    back = group_from_json_dict(doc)
    np.testing.assert_array_equal(back.theta, g.theta)

    soft = group_from_json_dict(SoftGroup(theta=np.array([0.2, 0.1])).to_json_dict())
    assert isinstance(soft, SoftGroup)


def test_distribution_normalizes_and_averages():
    thetas = np.array([[1.0, 0.0], [0.0, 1.0]])
    dist = GroupDistribution(thetas=thetas, weights=np.array([2.0, 2.0]))
    np.testing.assert_allclose(dist.weights, [0.5, 0.5])
    S = np.column_stack([np.array([1.0, -1.0]), np.ones(2)])
    # first group includes row 0 only; second includes both rows
    np.testing.assert_allclose(dist.mean_membership(S), [1.0, 0.5])
    members = dist.members
    assert len(members) == 2 and isinstance(members[0][0], ThresholdGroup)


def test_distribution_expected_fid_matches_manual():
    rng = np.random.default_rng(3)
    S = np.column_stack([rng.normal(size=8), np.ones(8)])
    thetas = rng.normal(size=(5, 2))
    C = rng.normal(size=8)
    M = imp(C)
    dist = GroupDistribution.uniform(thetas)
    manual = np.mean(
        [abs(membership(ThresholdGroup(theta=t), S) @ C - C.sum()) for t in thetas]
    )
    assert dist.expected_fid(M, 0, S) == pytest.approx(manual)
