import pytest

from robin_shapes.verify import SUITES, check_scaling, run_suites, union_split_value


@pytest.mark.parametrize("name", sorted(SUITES))
def test_quick_suite_passes(name):
    (result,) = run_suites([name])
    assert result.passed, result.line()


def test_boundary_perturbation_breaks_scaling():
    assert not check_scaling(boundary_factor=1.01).passed


def test_union_split_value_with_zero_index():
    a = [1.0, 4.0, 9.0]
    b = [2.0, 3.0]
    assert [union_split_value(a, b, k) for k in range(1, 6)] == [1.0, 2.0, 3.0, 4.0, 9.0]


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suites(["nope"])
