import math
import time

import pytest

from pathfollow.curve import (
    EllipseParams,
    ImplicitCurve,
    build_curve,
    check_regularity,
    eval_error,
    fd_validate,
    make_circle,
    make_ellipse,
    make_line,
    normal,
    random_probes,
    register_curve,
    sample_band,
    tangent,
    trace_zero_level,
)
from pathfollow.errors import ConfigValidationError
from pathfollow.geometry import Vec2

# Квадрат 400 x 400 м
BOX_400 = (-200.0, 200.0, -200.0, 200.0)


def test_eval_error_keeps_sign(unit_circle, reference_ellipse):
    assert eval_error(unit_circle, Vec2(1.0, 0.0)) == 0.0
    assert eval_error(unit_circle, Vec2(0.0, 0.0)) == -1.0
    assert eval_error(reference_ellipse, Vec2(0.0, 0.0)) == pytest.approx(-1.0)


def test_normal(unit_circle, x_axis_line, reference_ellipse):
    assert normal(unit_circle, Vec2(1.0, 0.0)) == Vec2(2.0, 0.0)
    assert normal(x_axis_line, Vec2(12.0, -7.0)).x == pytest.approx(0.0, abs=1e-15)
    assert normal(x_axis_line, Vec2(12.0, -7.0)).y == pytest.approx(1.0)
    n = normal(reference_ellipse, Vec2(0.0, 0.0))
    assert n.norm() == 0.0


def test_tangent_is_normal_rotated(unit_circle, reference_ellipse):
    assert tangent(unit_circle, Vec2(1.0, 0.0)) == Vec2(0.0, -2.0)
    assert tangent(unit_circle, Vec2(1.0, 0.0), direction=-1) == Vec2(0.0, 2.0)
    for p in random_probes(BOX_400, 50, seed=3):
        n = normal(reference_ellipse, p)
        t = tangent(reference_ellipse, p)
        assert t.dot(n) == pytest.approx(0.0, abs=1e-12)
        assert t.norm() == pytest.approx(n.norm(), rel=1e-12)


def test_line_through_origin_is_y(x_axis_line):
    for p in random_probes(BOX_400, 20, seed=1):
        assert x_axis_line.phi(p) == pytest.approx(p.y, abs=1e-12)


def test_round_ellipse_matches_circle():
    curve = make_ellipse(EllipseParams(center=Vec2(0.0, 0.0), a=30.0, b=30.0, alpha=0.0))
    for p in random_probes(BOX_400, 20, seed=2):
        assert curve.phi(p) == pytest.approx((p.norm() / 30.0) ** 2 - 1.0, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize('factory', [
    lambda: make_line(Vec2(10.0, -20.0), math.radians(30.0)),
    lambda: make_circle(Vec2(5.0, 5.0), 60.0),
    lambda: make_ellipse(EllipseParams(center=Vec2(0.0, 0.0), a=50.0, b=75.0, alpha=math.radians(-15.0))),
])
def test_shipped_curves_match_finite_differences(factory):
    curve = factory()
    probes = random_probes(BOX_400, 1000, seed=0)
    started = time.perf_counter()
    report = fd_validate(curve, probes, h=1e-5)
    elapsed = time.perf_counter() - started
    assert report.probes == 1000
    assert report.max_grad_error < 1e-6
    assert report.max_hessian_error < 1e-6
    assert report.passed(1e-6)
    assert elapsed < 1.0


def test_line_hessian_error_is_exactly_zero(x_axis_line):
    report = fd_validate(x_axis_line, random_probes(BOX_400, 100, seed=4))
    assert report.max_hessian_error == 0.0


def test_wrong_gradient_is_flagged(unit_circle):
    corrupted = ImplicitCurve(phi=unit_circle.phi,
                              grad=lambda p: unit_circle.grad(p) * 2.0,
                              hessian=unit_circle.hessian,
                              c_star=unit_circle.c_star, name='corrupted')
    report = fd_validate(corrupted, random_probes((-3.0, 3.0, -3.0, 3.0), 200, seed=5))
    assert report.max_grad_error == pytest.approx(1.0, rel=1e-4)
    assert not report.passed(1e-6)


def test_nonfinite_evaluations_reported():
    curve = ImplicitCurve(phi=lambda p: 1.0 / p.x,
                          grad=lambda p: Vec2(-1.0 / (p.x * p.x), 0.0),
                          hessian=lambda p: make_line(Vec2(0.0, 0.0), 0.0).hessian(p),
                          c_star=1.0)
    report = fd_validate(curve, [Vec2(0.0, 1.0), Vec2(1.0, 1.0)])
    assert report.nonfinite_points == [Vec2(0.0, 1.0)]
    assert not report.passed(1e-6)


def test_fd_validate_rejects_bad_step(unit_circle):
    with pytest.raises(ValueError):
        fd_validate(unit_circle, [Vec2(1.0, 1.0)], h=0.0)


@pytest.mark.parametrize('a, b', [(0.0, 10.0), (10.0, -1.0)])
def test_nonpositive_axes_rejected(a, b):
    with pytest.raises(ValueError):
        EllipseParams(center=Vec2(0.0, 0.0), a=a, b=b, alpha=0.0)


def test_nonpositive_radius_rejected():
    with pytest.raises(ValueError):
        make_circle(Vec2(0.0, 0.0), 0.0)


def test_ellipse_band_excludes_center(reference_ellipse):
    lower, upper = reference_ellipse.band_limits(6.0)
    assert (lower, upper) == (-0.5, 6.0)
    assert not reference_ellipse.in_band(Vec2(0.0, 0.0), lower, upper)

    report = check_regularity(reference_ellipse, lower, upper, samples=2000)
    assert report.samples == 2000
    assert report.regular
    assert report.min_grad_norm > 1e-3


def test_gradient_vanishes_near_ellipse_center(reference_ellipse):
    # Полоса вокруг центра, где grad phi = 0
    report = check_regularity(reference_ellipse, -1.0, -0.999, samples=50, bbox=(-3.0, 3.0, -3.0, 3.0))
    assert report.samples > 0
    assert report.min_grad_norm < 1e-2


def test_sample_band_respects_limits(reference_ellipse):
    points = sample_band(reference_ellipse, -0.5, 6.0, 500, seed=7)
    assert len(points) == 500
    assert all(-0.5 <= reference_ellipse.phi(p) <= 6.0 for p in points)
    assert points == sample_band(reference_ellipse, -0.5, 6.0, 500, seed=7)


def test_trace_closes_on_ellipse(reference_ellipse):
    points = trace_zero_level(reference_ellipse, step=1.0)
    assert points[0] == points[-1]
    assert all(abs(reference_ellipse.phi(p)) < 1e-9 for p in points)
    # Периметр эллипса 50 x 75 около 396 м
    assert 380 < len(points) < 410


def test_trace_stops_at_line_box(x_axis_line):
    points = trace_zero_level(x_axis_line, step=5.0)
    assert 30 < len(points) < 50
    assert all(abs(p.y) < 1e-12 for p in points)


def test_build_curve_from_config():
    curve = build_curve('circle', {'center_x_m': 1.0, 'center_y_m': 2.0, 'radius_m': 3.0})
    assert curve.phi(Vec2(4.0, 2.0)) == pytest.approx(0.0)
    with pytest.raises(ConfigValidationError):
        build_curve('spiral', {})
    with pytest.raises(ConfigValidationError):
        build_curve('circle', {'center_x_m': 1.0, 'center_y_m': 2.0})
    with pytest.raises(ConfigValidationError):
        build_curve('circle', {'center_x_m': 1.0, 'center_y_m': 2.0, 'radius_m': -3.0})


def test_registered_curve_is_buildable():
    register_curve('unit_disk_test', lambda cfg: make_circle(Vec2(0.0, 0.0), float(cfg['radius_m'])))
    curve = build_curve('unit_disk_test', {'radius_m': 2.0})
    assert curve.phi(Vec2(2.0, 0.0)) == 0.0
