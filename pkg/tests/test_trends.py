from __future__ import annotations

import math
from datetime import date

import numpy as np
import pytest

from shoulderseason.trends import (
    confidence_band,
    linear_trend,
    moving_average,
    pearson,
    pearson_with_cutoff,
    shift_probability,
)


class TestShiftProbability:
    def test_zero_slope_is_even_odds(self) -> None:
        assert shift_probability(0.0, 1.0, "earlier") == pytest.approx(0.5)
        assert shift_probability(0.0, 1.0, "later") == pytest.approx(0.5)

    def test_strong_earlier_shift(self) -> None:
        assert shift_probability(-2.326, 1.0, "earlier") == pytest.approx(0.99, abs=0.005)

    def test_moderate_later_shift(self) -> None:
        assert shift_probability(1.341, 1.0, "later") == pytest.approx(0.91, abs=0.005)

    def test_zero_stderr_saturates_by_sign(self) -> None:
        assert shift_probability(-1.0, 0.0, "earlier") == 1.0
        assert shift_probability(-1.0, 0.0, "later") == 0.0
        assert shift_probability(0.0, 0.0, "earlier") == 0.5

    def test_directions_sum_to_one(self) -> None:
        rng = np.random.default_rng(17)
        for _ in range(100):
            slope = float(rng.normal())
            stderr = float(rng.uniform(0.01, 3.0))
            total = shift_probability(slope, stderr, "earlier") + shift_probability(
                slope, stderr, "later"
            )
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_bad_arguments(self) -> None:
        with pytest.raises(ValueError, match="direction"):
            shift_probability(1.0, 1.0, "sideways")
        with pytest.raises(ValueError, match="stderr"):
            shift_probability(1.0, -1.0, "earlier")


class TestLinearTrend:
    def test_exact_line(self) -> None:
        points = [(x, 2.0 * x + 1.0) for x in range(10)]
        result = linear_trend(points, direction="later")
        assert result.slope == pytest.approx(2.0)
        assert result.intercept == pytest.approx(1.0)
        assert result.slope_stderr == pytest.approx(0.0, abs=1e-9)
        assert result.shift_probability == 1.0  # saturates
        assert result.n == 10

    def test_flat_symmetric_noise(self) -> None:
        # Residuals orthogonal to x keep the slope exactly zero.
        xs = np.arange(8, dtype=float)
        noise = np.array([1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0, 1.0])
        assert abs(noise.sum()) < 1e-12
        assert abs((noise * (xs - xs.mean())).sum()) < 1e-12
        result = linear_trend(list(zip(xs, 50.0 + noise)))
        assert result.slope == pytest.approx(0.0, abs=1e-12)
        assert result.shift_probability == pytest.approx(0.5, abs=1e-9)

    def test_calibrated_slope_to_stderr_ratio(self) -> None:
        # Construct data whose fitted slope / stderr is exactly -2.326 and
        # check the earlier-shift probability lands on 0.99.
        xs = np.arange(1959.0, 2023.0)
        slope = -0.24
        base = np.ones_like(xs)
        pattern = np.cos(np.arange(xs.size) * 1.7)
        xc = xs - xs.mean()
        pattern -= pattern.mean()
        pattern -= (pattern * xc).sum() / (xc * xc).sum() * xc  # orthogonal to fit space
        sxx = float((xc * xc).sum())
        dof = xs.size - 2
        target_stderr = abs(slope) / 2.326
        ssr_target = target_stderr**2 * sxx * dof
        resid = pattern * math.sqrt(ssr_target / float((pattern * pattern).sum()))
        ys = slope * xs + 100.0 + resid
        result = linear_trend(list(zip(xs, ys)), direction="earlier")
        assert result.slope == pytest.approx(slope, rel=1e-9)
        assert result.slope / result.slope_stderr == pytest.approx(-2.326, rel=1e-9)
        assert result.shift_probability == pytest.approx(0.99, abs=0.005)
        assert result.slope_per_decade == pytest.approx(-2.4)

    def test_offset_changes_intercept_only(self) -> None:
        rng = np.random.default_rng(29)
        points = [(float(x), float(rng.normal(50, 5))) for x in range(12)]
        base = linear_trend(points)
        shifted = linear_trend([(x, y + 100.0) for x, y in points])
        assert shifted.slope == pytest.approx(base.slope, abs=1e-9)
        assert shifted.intercept == pytest.approx(base.intercept + 100.0, abs=1e-9)
        assert shifted.slope_stderr == pytest.approx(base.slope_stderr, abs=1e-9)

    def test_scaling_leaves_probability_unchanged(self) -> None:
        rng = np.random.default_rng(31)
        points = [(float(x), float(rng.normal(10 - 0.2 * x, 2))) for x in range(15)]
        base = linear_trend(points)
        scaled = linear_trend([(x, 4.0 * y) for x, y in points])
        assert scaled.slope == pytest.approx(4.0 * base.slope, rel=1e-9)
        assert scaled.slope_stderr == pytest.approx(4.0 * base.slope_stderr, rel=1e-9)
        assert scaled.shift_probability == pytest.approx(base.shift_probability, abs=1e-12)

    def test_degenerate_abscissae(self) -> None:
        with pytest.raises(ValueError, match="degenerate abscissae"):
            linear_trend([(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)])

    def test_too_few_points(self) -> None:
        with pytest.raises(ValueError, match="at least 3 points"):
            linear_trend([(1.0, 2.0), (2.0, 3.0)])

    def test_explicit_exclusions(self) -> None:
        points = [(float(x), 2.0 * x) for x in range(8)] + [(8.0, 500.0)]
        result = linear_trend(points, exclusions=[8.0])
        assert result.slope == pytest.approx(2.0)
        assert result.excluded_points == ((8.0, 500.0),)
        assert result.n == 8

    def test_auto_exclusion_removes_planted_outlier(self) -> None:
        rng = np.random.default_rng(37)
        points = [(float(x), 10.0 + 0.5 * x + float(rng.normal(0, 0.2))) for x in range(20)]
        points[7] = (7.0, 80.0)
        result = linear_trend(points, auto_exclude=True)
        assert any(p[0] == 7.0 for p in result.excluded_points)
        assert result.slope == pytest.approx(0.5, abs=0.05)
        assert result.n == 19

    def test_auto_exclusion_cap(self) -> None:
        rng = np.random.default_rng(41)
        points = [(float(x), float(rng.normal(0, 1))) for x in range(30)]
        for i in range(8):
            points[i] = (float(i), 1000.0 + i)
        result = linear_trend(points, auto_exclude=True, max_auto_exclusions=5)
        assert len(result.excluded_points) <= 5

    def test_mapping_input(self) -> None:
        result = linear_trend({2000: 10.0, 2001: 12.0, 2002: 14.0}, direction="later")
        assert result.slope == pytest.approx(2.0)

    def test_explicit_exclusions_do_not_consume_auto_budget(self) -> None:
        rng = np.random.default_rng(1)
        points = [(float(x), 5.0 + 0.3 * x + float(rng.normal(0, 0.1))) for x in range(30)]
        points[4] = (4.0, 400.0)
        result = linear_trend(
            points,
            exclusions=[20.0, 21.0, 22.0, 23.0, 24.0],
            auto_exclude=True,
        )
        # five explicit removals must not exhaust the auto-trim cap
        assert (4.0, 400.0) in result.excluded_points
        assert result.slope == pytest.approx(0.3, abs=0.05)


class TestConfidenceBand:
    def test_zero_noise_zero_width(self) -> None:
        result = linear_trend([(x, 3.0 * x) for x in range(5)])
        band = confidence_band(result, [0.0, 2.0, 4.0])
        for x, fit, lo, hi in band:
            assert fit == pytest.approx(3.0 * x)
            assert hi - lo == pytest.approx(0.0, abs=1e-9)

    def test_band_contains_fit_and_widens_away_from_mean(self) -> None:
        rng = np.random.default_rng(43)
        points = [(float(x), float(rng.normal(2 * x, 1))) for x in range(10)]
        result = linear_trend(points)
        band = confidence_band(result, [4.5, 20.0])
        near, far = band
        assert near[2] <= near[1] <= near[3]
        assert (far[3] - far[2]) > (near[3] - near[2])


class TestMovingAverage:
    def test_constant_series_unchanged(self) -> None:
        points = {y: 7.0 for y in range(2000, 2010)}
        assert moving_average(points, k=5) == [(y, 7.0) for y in range(2000, 2010)]

    def test_k_one_is_identity(self) -> None:
        points = [(2000, 1.0), (2001, 5.0), (2002, 3.0)]
        assert moving_average(points, k=1) == points

    def test_hand_computed_k3(self) -> None:
        points = [(1, 1.0), (2, 2.0), (3, 3.0), (4, 4.0), (5, 5.0)]
        assert moving_average(points, k=3) == [
            (1, 1.5),
            (2, 2.0),
            (3, 3.0),
            (4, 4.0),
            (5, 4.5),
        ]

    def test_missing_years_truncate_window(self) -> None:
        points = {2000: 1.0, 2001: 3.0, 2005: 10.0}
        out = dict(moving_average(points, k=3))
        assert out[2000] == pytest.approx(2.0)
        assert out[2005] == pytest.approx(10.0)  # no neighbors within +-1 year

    def test_even_k_rejected(self) -> None:
        with pytest.raises(ValueError, match="odd"):
            moving_average([(1, 1.0)], k=4)


class TestPearsonWithCutoff:
    def test_identity_pairs(self) -> None:
        x = {y: float(y % 50 + 60) for y in range(2000, 2010)}
        result = pearson_with_cutoff(x, dict(x), "spring", 30.0)
        assert result.r == pytest.approx(1.0)
        assert result.excluded_count == 0

    def test_negated_pairs(self) -> None:
        x = {y: float(y - 2000 + 60) for y in range(2000, 2010)}
        y = {k: -v for k, v in x.items()}
        result = pearson_with_cutoff(x, y, "spring", 0.0)
        assert result.r == pytest.approx(-1.0)

    def test_spring_cutoff_excludes_early_onsets(self) -> None:
        cutoff = date(2000, 2, 14)
        x = {
            2000: date(2000, 1, 20),   # before Feb 14 -> excluded
            2001: date(2001, 2, 13),   # before -> excluded
            2002: date(2002, 2, 14),   # on the cutoff -> kept
            2003: date(2003, 3, 1),
            2004: date(2004, 3, 10),
            2005: date(2005, 4, 2),
        }
        y = {k: date(k, 3, 1) for k in x}
        result = pearson_with_cutoff(x, y, "spring", cutoff)
        assert result.excluded_count == 2
        assert result.excluded_years == (2000, 2001)
        assert result.n_used == 4

    def test_fall_cutoff_excludes_late_onsets(self) -> None:
        cutoff = date(2000, 11, 25)
        x = {
            2000: date(2000, 12, 1),   # after Nov 25 -> excluded
            2001: date(2001, 11, 25),  # on the cutoff -> kept
            2002: date(2002, 11, 2),
            2003: date(2003, 10, 20),
            2004: date(2004, 10, 1),
        }
        y = {k: date(k, 11, 1) for k in x}
        result = pearson_with_cutoff(x, y, "fall", cutoff)
        assert result.excluded_years == (2000,)
        assert result.n_used == 4

    def test_too_few_pairs_after_cutoff(self) -> None:
        x = {2000: date(2000, 1, 5), 2001: date(2001, 1, 6), 2002: date(2002, 3, 1)}
        y = {k: date(k, 3, 1) for k in x}
        with pytest.raises(ValueError, match="need at least 3"):
            pearson_with_cutoff(x, y, "spring", date(2000, 2, 14))

    def test_affine_invariance(self) -> None:
        rng = np.random.default_rng(47)
        x = {y: float(rng.uniform(60, 120)) for y in range(2000, 2012)}
        y = {k: v * 1.3 + float(rng.normal(0, 4)) for k, v in x.items()}
        base = pearson_with_cutoff(x, y, "spring", 0.0)
        transformed = pearson_with_cutoff(
            x, {k: 2.5 * v + 40.0 for k, v in y.items()}, "spring", 0.0
        )
        assert transformed.r == pytest.approx(base.r, abs=1e-12)

    def test_mixed_types_rejected(self) -> None:
        x = {2000: date(2000, 3, 1), 2001: date(2001, 3, 2), 2002: date(2002, 3, 3)}
        y = {k: 10.0 for k in x}
        with pytest.raises(TypeError, match="both be dates"):
            pearson_with_cutoff(x, y, "spring", 50.0)

    def test_plain_pearson_zero_variance(self) -> None:
        with pytest.raises(ValueError, match="zero variance"):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
