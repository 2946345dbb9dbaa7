import numpy as np
import pytest

from deltanls.params import (
    InvalidExponents,
    MassInterval,
    Params,
    Region,
    ThresholdKind,
    classify,
    expected_solution_regime,
)


@pytest.mark.parametrize("p,q", [(2.0, 3.0), (3.0, 2.0), (1.5, 5.0), (4.0, -1.0)])
def test_rejects_inadmissible_exponents(p, q):
    with pytest.raises(InvalidExponents):
        Params(p, q)


def test_diagonal_flag_is_exact():
    assert Params(16.0, 9.0).diagonal
    assert Params(6.0, 4.0).diagonal
    assert not Params(6.0, 4.0 + 1e-12).diagonal
    assert not Params(4.0, 3.5).diagonal


@pytest.mark.parametrize("p,q,tag", [
    (4.0, 2.5, "A"),
    (6.0, 4.0, "I"),
    (4.0, 3.5, "F"),
    (6.0, 3.0, "B"),
    (6.0, 5.0, "D"),
    (8.0, 4.0, "H"),
    (5.0, 4.0, "G"),
    (8.0, 4.5, "C"),
    (3.0, 4.5, "E"),
    (10.0, 6.0, "I"),
    (8.0, 3.0, "B"),
    (7.0, 4.2, "C"),
])
def test_classify_examples(p, q, tag):
    assert classify(Params(p, q)) is Region(tag)


def _memberships(p, q):
    """Region definitions restated independently of the library."""
    half = p / 2 + 1
    found = []
    if 2 < p < 6 and 2 < q < half:
        found.append("A")
    if p >= 6 and 2 < q < 4:
        found.append("B")
    if p > 6 and 4 < q < half:
        found.append("C")
    if p >= 6 and q > half:
        found.append("D")
    if 2 < p < 6 and q > 4:
        found.append("E")
    if 2 < p < 6 and half < q < 4:
        found.append("F")
    if 2 < p < 6 and q == 4:
        found.append("G")
    if p > 6 and q == 4:
        found.append("H")
    if p > 2 and q == half:
        found.append("I")
    return found


def test_partition_property_on_quasirandom_points():
    rng = np.random.default_rng(101)
    pts = 2.01 + rng.random((10000, 2)) * (12.0 - 2.01)
    for p, q in pts:
        found = _memberships(float(p), float(q))
        assert len(found) == 1, f"({p}, {q}) matched {found}"
        assert classify(Params(float(p), float(q))).value == found[0]


def test_partition_property_on_boundary_lines():
    # points straddling each boundary line still land in exactly one region
    for p in (2.5, 4.0, 6.0, 7.5, 11.0):
        for q in (4.0, p / 2 + 1):
            if q <= 2:
                continue
            found = _memberships(p, q)
            assert len(found) == 1
            assert classify(Params(p, q)).value == found[0]


def test_regime_region_H_is_mass_above_two_unique():
    rule = expected_solution_regime(Params(8.0, 4.0))
    assert rule.interval is MassInterval.ABOVE_TWO
    assert rule.threshold is ThresholdKind.MASS_TWO
    assert rule.unique is True


def test_regime_diagonal_small_p_has_no_solutions():
    rule = expected_solution_regime(Params(6.0, 4.0))
    assert rule.interval is MassInterval.NONE
    rule16 = expected_solution_regime(Params(16.0, 9.0))
    assert rule16.interval is MassInterval.ALL


def test_regime_region_F_uniqueness_is_open():
    rule = expected_solution_regime(Params(4.0, 3.5))
    assert rule.interval is MassInterval.FROM_THRESHOLD
    assert rule.threshold is ThresholdKind.BRANCH_MINIMUM
    assert rule.unique is None


def test_regime_regions_A_G():
    rule_a = expected_solution_regime(Params(4.0, 2.5))
    assert rule_a.interval is MassInterval.UPTO_THRESHOLD
    assert rule_a.unique is True
    rule_g = expected_solution_regime(Params(5.0, 4.0))
    assert rule_g.interval is MassInterval.TWO_TO_THRESHOLD
    assert rule_g.threshold is ThresholdKind.ZERO_FREQUENCY_MASS
