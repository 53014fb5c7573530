import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from robin_shapes.geometry import (
    GeometryError,
    area,
    generalized_perimeter,
    perimeter,
    square_with_slit,
    unit_square,
)
from robin_shapes.optimize import (
    Objective,
    channel_polygon,
    cut_domain,
    cut_probe,
    evaluate,
    golden_section,
    nelder_mead,
    project_to_perimeter,
    richardson,
    slit_widening_experiment,
    two_ball_candidate,
    widened_domain,
)
from robin_shapes.shapes import PolygonVertices, RadialFourier, perturbed_circle, random_star, realize

# λ₁ of the unit disk at β = 1, from mpmath; by symmetry the best k = 2 split
# of 4π is two unit disks
UNIT_DISK_LAMBDA1 = 1.5769927308086067


@pytest.mark.parametrize("seed", range(4))
def test_projection_hits_perimeter(seed):
    dom = project_to_perimeter(realize(random_star(seed)), 2 * math.pi)
    assert math.isclose(generalized_perimeter(dom), 2 * math.pi, rel_tol=1e-12)


def test_projection_with_crack():
    dom = project_to_perimeter(square_with_slit(), 10.0)
    assert math.isclose(generalized_perimeter(dom), 10.0, rel_tol=1e-13)
    with pytest.raises(ValueError):
        project_to_perimeter(unit_square(), 0.0)


def test_objective_validation():
    with pytest.raises(ValueError):
        Objective(indices=(1, 2))
    with pytest.raises(ValueError):
        Objective(perimeter=None)
    with pytest.raises(ValueError):
        Objective(perimeter=1.0, penalty=1.0)
    with pytest.raises(ValueError):
        Objective(indices=(0,))
    with pytest.raises(ValueError):
        Objective(combiner="pnorm", indices=(1, 2), q=0.5)


def test_combiners_monotone():
    y = np.array([1.0, 2.0, 3.0])
    s = Objective(indices=(1, 2, 3), combiner="sum")
    p = Objective(indices=(1, 2, 3), combiner="pnorm", q=3.0)
    assert s.combine(y) == 6.0
    assert math.isclose(p.combine(y), 36 ** (1 / 3))
    bumped = y + np.array([0.0, 0.1, 0.0])
    for obj in (s, p):
        c = obj.monotonicity_constant(bumped)
        assert obj.combine(bumped) - obj.combine(y) >= c * 0.1 - 1e-15


def test_evaluate_constraint_and_penalty():
    params = PolygonVertices(((0, 0), (1, 0), (1, 1), (0, 1)))
    ev = evaluate(Objective(perimeter=8.0), params, h=0.2)
    assert ev.feasible and math.isclose(ev.prob, 8.0, rel_tol=1e-13)
    assert math.isclose(area(ev.domain), 4.0, rel_tol=1e-12)
    pen = evaluate(Objective(perimeter=None, penalty=0.5), params, h=0.1)
    assert math.isclose(pen.value, pen.lambdas[0] + 0.5 * 4.0, rel_tol=1e-13)


def test_evaluate_infeasible_is_inf():
    ev = evaluate(Objective(), RadialFourier((1.0, 0.0, 1.5)))
    assert ev.value == math.inf and not ev.feasible
    assert "nonpositive radius" in ev.message


def test_golden_section():
    x, fx = golden_section(lambda t: (t - 0.3) ** 2, 0.0, 1.0, 1e-10)
    assert abs(x - 0.3) < 1e-9


def test_two_ball_regression():
    res = two_ball_candidate(2, 1.0, 4 * math.pi)
    assert math.isclose(res.value, UNIT_DISK_LAMBDA1, rel_tol=1e-8)
    assert res.split_index == 1
    assert math.isclose(res.p1, 2 * math.pi, rel_tol=1e-6)
    assert res.value < res.single_ball


def test_two_ball_k1_is_single_ball():
    res = two_ball_candidate(1, 1.0, 2 * math.pi)
    assert res.split_index == 0 and math.isclose(res.value, UNIT_DISK_LAMBDA1, rel_tol=1e-11)


def test_nelder_mead_budget_zero():
    run = nelder_mead(Objective(), perturbed_circle(0), 0, polish=False)
    assert run.evaluations == 1 and len(run.records) == 1


def test_nelder_mead_short_run_is_monotone_and_reproducible():
    obj = Objective(beta=1.0, perimeter=2 * math.pi)
    a = nelder_mead(obj, perturbed_circle(2), 15, seed=3, h_factor=0.08, polish=False)
    b = nelder_mead(obj, perturbed_circle(2), 15, seed=3, h_factor=0.08, polish=False, workers=3)
    assert a.evaluations == 15
    assert np.all(np.diff(a.objective_trajectory) <= 0)
    assert a.log_lines() == b.log_lines()
    assert "wall_ms" not in a.records[0]
    assert a.best_value == min(r["objective"] for r in a.records if r["objective"] is not None)


def test_nelder_mead_rejects_small_budget():
    with pytest.raises(ValueError):
        nelder_mead(Objective(), perturbed_circle(0), 3)


def test_channel_polygon_is_clockwise_rectangle():
    poly = channel_polygon(np.array([[0.25, 0.5], [0.75, 0.5]]), 0.1)
    from robin_shapes.geometry import signed_area

    assert signed_area(poly) < 0
    assert math.isclose(-signed_area(poly), 0.05, rel_tol=1e-12)


@pytest.mark.parametrize("w", [0.04, 0.02, 0.01])
def test_widened_perimeter(w):
    dom = widened_domain(unit_square(), np.array([[0.25, 0.5], [0.75, 0.5]]), w)
    assert math.isclose(perimeter(dom), 5.0 + 2 * w, rel_tol=1e-12)


def test_widened_channel_too_wide():
    with pytest.raises(GeometryError):
        widened_domain(unit_square(), np.array([[0.25, 0.5], [0.75, 0.5]]), 1.2)


def test_richardson_exact_on_power_law():
    h = np.array([1.0, 0.5, 0.25])
    vals = [np.array([2.0 + 3.0 * x ** 2]) for x in h]
    limit, order = richardson(vals)
    assert_allclose(limit, [2.0])
    assert_allclose(order, [2.0])


def test_widening_small_run():
    res = slit_widening_experiment(unit_square(), [(0.25, 0.5), (0.75, 0.5)], [0.08, 0.04], 1.0, 2, h=0.1)
    assert len(res.rows) == 2
    assert np.all(res.rows[1].gaps < res.rows[0].gaps)
    assert res.to_csv().splitlines()[0].startswith("width,perimeter,prob,lambda_1")
    with pytest.raises(ValueError):
        slit_widening_experiment(unit_square(), [(0.25, 0.5), (0.75, 0.5)], [0.01, 0.02], 1.0, 2)


def test_cut_domain_and_probe():
    dom = square_with_slit()
    cut, section = cut_domain(dom, 0.9)
    assert math.isclose(area(cut), 0.9, rel_tol=1e-12) and section == 1.0
    assert len(cut.cracks) == 1
    cut, _ = cut_domain(dom, 0.2)
    assert not cut.cracks
    # crack tip would land on the cut
    with pytest.raises(GeometryError, match="degenerate cut"):
        cut_domain(dom, 0.5)
    rows = cut_probe(unit_square(), [0.8, 1.0], 1.0, 1, 0.1)
    assert rows[0].difference > 0 and math.isfinite(rows[0].ratio)
    assert rows[1].difference == 0.0 and rows[1].section == 0.0
