import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from garchorder.distributions import DiscreteDist, EmpiricalDist
from garchorder.orders import (
    Direction,
    TestFunctionFamily,
    binned_kde,
    check_cx,
    check_icx,
    check_kurtosis,
    check_peakedness,
    check_st,
    check_supermodular_cx,
    comparison_grid,
    default_tolerance,
    density_crossings,
    sign_changes,
)

A, B = Direction.A_BELOW_B, Direction.B_BELOW_A
PM1 = DiscreteDist([-1.0, 1.0], [0.5, 0.5])
R2 = math.sqrt(2.0)
THREE = DiscreteDist([-R2, 0.0, R2], [0.25, 0.5, 0.25])


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(2024)


@st.composite
def discrete_laws(draw):
    n = draw(st.integers(1, 6))
    pts = draw(st.lists(st.floats(-5, 5), min_size=n, max_size=n))
    w = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n)))
    return DiscreteDist(pts, w / w.sum())


class TestStochastic:
    def test_half_normal_scaling(self, rng):
        z1, z2 = rng.standard_normal(100_000), rng.standard_normal(100_000)
        v = check_st(EmpiricalDist(np.abs(z1)), EmpiricalDist(np.abs(1.5 * z2)))
        assert v.direction is A and v.is_consistent()

    def test_self_indistinguishable(self):
        v = check_st(THREE, THREE)
        assert v.direction is Direction.INDISTINGUISHABLE and abs(v.margin) <= v.tolerance

    def test_squared_two_point_degenerate(self):
        assert check_st(PM1.square(), PM1.square()).direction is Direction.INDISTINGUISHABLE

    def test_exact_tolerance(self):
        assert default_tolerance(PM1, THREE) == 1e-12
        e = EmpiricalDist(np.arange(100.0))
        assert default_tolerance(e, e) == pytest.approx(3 * math.sqrt(math.log(100) / 100))

    def test_union_support_grid(self):
        assert np.array_equal(comparison_grid(PM1, THREE), [-R2, -1.0, 0.0, 1.0, R2])


class TestConvexOrders:
    def test_raw_two_vs_three_point_not_ordered(self):
        # unequal variances are not the point: the stop-loss curves cross
        assert check_icx(PM1, THREE).direction is Direction.INCOMPARABLE
        assert check_cx(PM1, THREE).direction is Direction.INCOMPARABLE

    def test_squares_ordered(self):
        v = check_icx(PM1.square(), THREE.square())
        assert v.direction is A and v.margin <= 1e-12

    def test_dilation_pair(self):
        spread = DiscreteDist([-2.0, 0.0, 2.0], [0.25, 0.5, 0.25])
        v = check_cx(PM1, spread)
        assert v.direction is A
        assert v.evidence["mean_a"] == v.evidence["mean_b"] == 0.0

    def test_shift_breaks_cx(self):
        v = check_cx(THREE, THREE.map(lambda x: x + 0.1))
        assert v.direction is Direction.INCOMPARABLE and "reason" in v.evidence

    def test_self(self):
        assert check_icx(THREE, THREE).direction is Direction.INDISTINGUISHABLE

    def test_gaussian_vs_t5_squares(self, rng):
        g = rng.standard_normal(200_000)
        t = rng.standard_t(5, 200_000) * math.sqrt(3 / 5)
        v = check_icx(EmpiricalDist(g**2), EmpiricalDist(t**2))
        assert v.direction is A

    @settings(max_examples=80, deadline=None)
    @given(discrete_laws(), discrete_laws())
    def test_antisymmetry(self, a, b):
        for check in (check_st, check_icx, check_cx):
            ab, ba = check(a, b), check(b, a)
            assert ba.direction is ab.direction.flipped()
            assert ba.margin == -ab.margin

    @settings(max_examples=80, deadline=None)
    @given(discrete_laws(), st.lists(st.floats(0.0, 2.0), min_size=6, max_size=6))
    def test_st_implies_icx(self, a, shifts):
        # a pointwise nondecreasing map x -> x + s(x) with s >= 0 gives st dominance
        shift = np.asarray(shifts)[: a.n]
        b = DiscreteDist(a.points + shift, a.probs)
        assert check_st(a, b).direction in (A, Direction.INDISTINGUISHABLE)
        assert check_icx(a, b).direction in (A, Direction.INDISTINGUISHABLE)


class TestVerdictSerialization:
    def test_json_and_csv(self, tmp_path):
        v = check_icx(PM1.square(), THREE.square())
        data = json.loads(v.to_json())
        assert data["relation"] == "icx" and data["direction"] == "A_below_B"
        assert len(data["grid"]) == len(data["evidence"]["stop_loss_a"])
        path = tmp_path / "curve.csv"
        v.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "k,value_A,value_B" and len(lines) == v.grid.size + 1

    def test_summary_form(self):
        d = check_cx(PM1, THREE).to_dict(curves=False)
        assert set(d["grid"]) == {"size", "min", "max"}
        assert "stop_loss_a" not in d["evidence"]

    def test_slack(self):
        v = check_st(PM1.abs(), THREE.abs())
        assert v.slack == pytest.approx(-np.max(v.gaps))


class TestPeakedness:
    def test_gaussian_scale(self, rng):
        a = EmpiricalDist(rng.standard_normal(100_000))
        b = EmpiricalDist(2.0 * rng.standard_normal(100_000))
        v = check_peakedness(a, b)
        assert v.direction is A
        assert v.evidence["squared_direction"] is A
        assert v.evidence["single_cut_direction"] is A
        assert "warnings" not in v.evidence

    def test_self(self):
        assert check_peakedness(THREE, THREE).direction is Direction.INDISTINGUISHABLE

    def test_asymmetry_warning(self):
        v = check_peakedness(DiscreteDist([-1.0, 3.0], [0.75, 0.25]), PM1)
        assert v.evidence["warnings"]

    def test_sign_changes_gaussians(self):
        grid = np.linspace(-6, 6, 2001)
        assert sign_changes(stats.norm(), stats.norm(scale=1.5), grid, 1e-9) == (1, ("+", "-"))
        count, seq = sign_changes(stats.norm(), stats.norm(loc=0.5), grid, 1e-9)
        assert count == 0 and len(seq) == 1
        assert sign_changes(PM1, PM1) == (0, ())


class TestKurtosis:
    def test_exact_two_point_vs_three_point(self):
        v = check_kurtosis(PM1, THREE)
        assert v.direction is A and v.evidence["beta2_a"] == 1.0

    def test_follows_squared_icx_at_equal_variance(self):
        spread = DiscreteDist([-2.0, 0.0, 2.0], [0.125, 0.75, 0.125])
        assert spread.moment(2) == PM1.moment(2)
        assert check_icx(PM1.square(), spread.square()).direction is A
        assert check_kurtosis(PM1, spread).direction is A


class TestDensity:
    def test_kde_integrates_to_one(self, rng):
        x = rng.standard_normal(50_000)
        grid = np.linspace(-6, 6, 1201)
        f = binned_kde(x, grid, 0.1)
        assert np.trapezoid(f, grid) == pytest.approx(1.0, abs=2e-3)
        assert f[600] == pytest.approx(stats.norm.pdf(0), abs=0.02)

    def test_crossing_counts(self, rng):
        n = 1_000_000
        g = rng.standard_normal(n)
        t = rng.standard_t(5, n) * math.sqrt(3 / 5)
        assert density_crossings(g, t)[0] == 4
        assert density_crossings(g, 1.5 * rng.standard_normal(n))[0] == 2
        assert density_crossings(g, g) == (0, [])

    def test_undersized(self):
        with pytest.raises(ValueError):
            density_crossings(np.zeros(100), np.zeros(100))


class TestSupermodular:
    def test_family_members_valid(self):
        fam = TestFunctionFamily.supermodular_convex(3, thresholds=[-1.0, 0.0, 1.5])
        assert fam.weights.shape == (8, 3)
        assert fam.validate()
        assert TestFunctionFamily.convex([-1, 0, 1]).validate()
        assert TestFunctionFamily.increasing_convex([-1, 0, 1]).validate()

    def test_self_and_dimension_mismatch(self, rng):
        x = rng.standard_normal((5000, 3))
        assert check_supermodular_cx(x, x).direction is Direction.INDISTINGUISHABLE
        with pytest.raises(ValueError):
            check_supermodular_cx(x, x[:, :2])

    def test_single_coordinate_reduces_to_icx(self):
        pts_a = np.array([[-1.0, 0.0], [1.0, 0.0]])
        pts_b = np.array([[-R2, 0.0], [0.0, 0.0], [R2, 0.0]])
        fam = TestFunctionFamily("supermodular_convex_multivariate", [[1.0, 0.0]], powers=(1,))
        v = check_supermodular_cx((pts_a ** 2, [0.5, 0.5]), (pts_b ** 2, [0.25, 0.5, 0.25]), fam)
        assert v.direction is check_icx(PM1.square(), THREE.square()).direction

    def test_comonotone_dominates_independent(self):
        # same marginals; the comonotone coupling is larger in supermodular order
        vals = [-1.0, 1.0]
        indep = np.array([[a, b] for a in vals for b in vals])
        como = np.array([[-1.0, -1.0], [1.0, 1.0]])
        v = check_supermodular_cx((indep, [0.25] * 4), (como, [0.5, 0.5]))
        assert v.direction is A
        assert check_supermodular_cx((como, [0.5, 0.5]), (indep, [0.25] * 4)).direction is B
