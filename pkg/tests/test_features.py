import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strokehmm.features import (
    DegenerateChord,
    TooShort,
    curvature_feature,
    direction_change,
    direction_features,
    estimate_jitter,
    extract_observations,
)
from strokehmm.geometry import RawStroke, resample

from shapes import as_resampled, circle_points, l_stroke


def test_direction_features_lines():
    pts = np.column_stack([np.arange(5.0), np.zeros(5)])
    assert direction_features(pts, 2) == pytest.approx((1.0, 0.0))
    pts = np.column_stack([np.arange(5.0), np.arange(5.0)])
    assert direction_features(pts, 2) == pytest.approx((math.sqrt(2) / 2, math.sqrt(2) / 2))


def test_direction_retrace_raises():
    pts = np.array([[0, 0], [1, 0], [0, 0]], dtype=float)
    with pytest.raises(DegenerateChord):
        direction_features(pts, 1)


def test_direction_is_tangent_on_circle():
    R = 20.0
    pts = circle_points(R, 1.0, 30, start=0.3)
    for i in range(1, 29):
        x, y = pts[i]
        tangent = np.array([-y, x]) / R  # anticlockwise travel
        assert np.allclose(direction_features(pts, i), tangent, atol=1e-9)


def arc_spaced(R, d, n, clockwise=False):
    """Points ``d`` apart along the arc (not along the chord)."""
    sgn = -1.0 if clockwise else 1.0
    ang = 1.1 + sgn * (d / R) * np.arange(n)
    return R * np.column_stack([np.cos(ang), np.sin(ang)])


@pytest.mark.parametrize("R", [10.0, 20.0, 50.0])
@pytest.mark.parametrize("clockwise", [False, True])
def test_circle_oracles(R, clockwise):
    d = 1.0
    # sagitta oracle: arc-length spacing d, chord over four steps has half-angle 2d/R
    pts = arc_spaced(R, d, 40, clockwise)
    h = R * (1 - math.cos(2 * d / R))
    for i in range(2, 38):
        f3 = curvature_feature(pts, i, d)
        assert abs(abs(f3) - h) < 1e-6 * d
        assert (f3 > 0) == clockwise  # positive for clockwise in a y-up frame
    # turning oracle: chord spacing d, as produced by resampling
    pts = circle_points(R, d, 40, start=1.1, clockwise=clockwise)
    psi = 2 * math.asin(d / (2 * R))
    h_chord = R * (1 - math.cos(4 * math.asin(d / (2 * R))))
    for i in range(2, 38):
        assert abs(direction_change(pts, i) - psi) < 1e-6
        assert abs(abs(curvature_feature(pts, i, d)) - h_chord) < 1e-6 * d


def test_documented_sagitta_values():
    # closed-form values with the chord spanning 2d/R either side; the band
    # edges R=10 and R=50 bracket every in-band arc
    for R, want in ((10, 0.199334), (20, 0.099917), (50, 0.039995)):
        assert R * (1 - math.cos(2 / R)) == pytest.approx(want, abs=1e-6)
    assert 2 * math.asin(1 / 40) == pytest.approx(0.050005, abs=1e-6)


def test_screen_handedness_flips_sign():
    pts = circle_points(20.0, 1.0, 10, clockwise=True)
    assert curvature_feature(pts, 4, 1.0, "math") == pytest.approx(-curvature_feature(pts, 4, 1.0, "screen"))


def test_line_features_zero():
    pts = np.column_stack([np.arange(11.0) * 0.6, np.arange(11.0) * 0.8])
    for i in range(11):
        assert abs(curvature_feature(pts, i, 1.0)) < 1e-9
        assert abs(direction_change(pts, i)) < 1e-9


def test_right_angle_turn():
    pts = np.array([[0, 1], [0, 0], [1, 0]], dtype=float)
    assert direction_change(pts, 1) == pytest.approx(math.pi / 2)


def test_extract_straight():
    rs = resample(RawStroke.from_points([[0, 0], [10, 0]]), 1.0)
    obs = extract_observations(rs)
    assert len(obs) == 11
    np.testing.assert_allclose(obs.array, np.tile([1, 0, 0, 0], (11, 1)), atol=1e-12)


def test_extract_too_short():
    with pytest.raises(TooShort):
        extract_observations(as_resampled(np.arange(8.0).reshape(4, 2), 1.0))


def test_extract_matches_scalar_functions():
    pts = circle_points(15.0, 1.0, 25) + np.random.default_rng(0).normal(0, 0.05, (25, 2))
    obs = extract_observations(as_resampled(pts, 1.0)).array
    for i in range(25):
        assert obs[i, :2] == pytest.approx(direction_features(pts, i))
        assert obs[i, 2] == pytest.approx(curvature_feature(pts, i, 1.0))
        assert obs[i, 3] == pytest.approx(direction_change(pts, i))


def test_l_stroke_partition():
    stroke, _ = l_stroke(10.0, 0.05)
    obs = extract_observations(resample(stroke, 1.0)).array
    f3, f4 = np.abs(obs[:, 2]), obs[:, 3]
    turning = np.flatnonzero(np.abs(f4 - math.pi / 2) < 0.2)
    assert len(turning) == 1
    c = turning[0]
    assert f3[c] > 1 / 8
    others = np.delete(np.arange(len(obs)), c)
    assert np.all(f4[others] < 0.1)
    # the five-point window lets the corner reach one neighbour either side
    far = np.delete(np.arange(len(obs)), [c - 1, c, c + 1])
    assert np.all(f3[far] < 1 / 8)


def test_f3_clamped():
    pts = np.array([[0, 0], [1, 0], [1, 5], [1.000001, 0.0], [2, 0]], dtype=float)
    obs = extract_observations(as_resampled(pts, 1.0)).array
    assert np.all(np.abs(obs[:, 2]) <= 2.0)


def test_estimate_jitter():
    pts = circle_points(25.0, 1.0, 120)
    assert estimate_jitter(extract_observations(as_resampled(pts, 1.0))) == pytest.approx(0.0, abs=1e-9)
    rng = np.random.default_rng(1)
    est = []
    for _ in range(20):
        raw = np.column_stack([np.linspace(0, 60, 181), np.zeros(181)]) + rng.normal(0, 0.1, (181, 2))
        rs = resample(RawStroke.from_points(raw), 1.0)
        est.append(estimate_jitter(extract_observations(rs)))
    assert 0.05 < np.median(est) < 0.2


angles = st.floats(-math.pi, math.pi)


def _noisy(seed, n=20):
    return circle_points(18.0, 1.0, n) + np.random.default_rng(seed).normal(0, 0.1, (n, 2))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), angles)
def test_rotation_covariance(seed, alpha):
    pts = _noisy(seed)
    c, s = math.cos(alpha), math.sin(alpha)
    rot = pts @ np.array([[c, s], [-s, c]])
    a = extract_observations(as_resampled(pts, 1.0)).array
    b = extract_observations(as_resampled(rot, 1.0)).array
    np.testing.assert_allclose(b[:, 2:], a[:, 2:], atol=1e-9)
    np.testing.assert_allclose(b[:, 0], c * a[:, 0] - s * a[:, 1], atol=1e-9)
    np.testing.assert_allclose(b[:, 1], s * a[:, 0] + c * a[:, 1], atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 20))
def test_scaling(seed, k):
    pts = _noisy(seed)
    a = extract_observations(as_resampled(pts, 1.0)).array
    b = extract_observations(as_resampled(k * pts, k)).array
    np.testing.assert_allclose(b[:, [0, 1, 3]], a[:, [0, 1, 3]], atol=1e-9)
    np.testing.assert_allclose(b[:, 2], k * a[:, 2], atol=1e-9 * k)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_reversal(seed):
    pts = _noisy(seed)
    a = extract_observations(as_resampled(pts, 1.0)).array
    b = extract_observations(as_resampled(pts[::-1], 1.0)).array[::-1]
    np.testing.assert_allclose(b[:, 2], -a[:, 2], atol=1e-9)
    np.testing.assert_allclose(b[:, 3], a[:, 3], atol=1e-9)
    # direction windows are clamped differently at the ends, so compare interior points
    np.testing.assert_allclose(b[1:-1, :2], -a[1:-1, :2], atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(10, 200))
def test_f3_bound_on_circles(R):
    pts = circle_points(R, 1.0, 12)
    raw = abs(curvature_feature(pts, 5, 1e9))  # effectively unclamped
    assert raw <= 2.0
