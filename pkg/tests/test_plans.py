"""Strategy-plan tests against the frozen reference design.

The running example is the four-look DLBCL-style OS monitoring schedule
(theta0 = 1.3, theta1 = 0.8, 1:1 allocation, looks at 89/110/131/178
pooled deaths). Expected values were derived through the erf-series
oracle in ``oracles.py`` and are frozen as literals.
"""

import pytest

from choose4 import (
    DomainError,
    NonmonotoneDeaths,
    PatternMismatch,
    build_plan,
    discrete_approximation,
    discrete_threshold_plan,
    fda_t2d_plan,
    fleming_plan,
    plan_table,
    recompute_for_observed,
    rodriguez_plan,
    snap_to_grid,
    standard_ci_plan,
    threshold_curve,
)

DEATHS = [89, 110, 131, 178]

FLEMING_THRESHOLDS = [1.049742438282068, 1.0214658908431609,
                      1.0007961257531233, 0.96904254819133]
FLEMING_IA_ALPHAS = [0.15658703886424302, 0.10303017086745869, 0.06721043319338996]


def make_fleming():
    return fleming_plan(1.3, 0.8, DEATHS, beta=0.1, final_alpha=0.025)


def test_fleming_plan_values():
    plan = make_fleming()
    assert [s.label for s in plan.stages] == ["IA1", "IA2", "IA3", "FA"]
    assert plan.deaths() == DEATHS
    for got, want in zip(plan.thresholds(), FLEMING_THRESHOLDS):
        assert got == pytest.approx(want, abs=1e-12)
    for got, want in zip(plan.alphas()[:3], FLEMING_IA_ALPHAS):
        assert got == pytest.approx(want, abs=1e-12)
    fa = plan.stages[-1]
    assert fa.is_final
    assert fa.spec.alpha == pytest.approx(0.025, abs=1e-12)
    assert 1.0 - fa.spec.beta == pytest.approx(0.8995122207277712, abs=1e-12)
    # interims hold 90% power by construction
    for stage in plan.stages[:3]:
        assert 1.0 - stage.spec.beta == pytest.approx(0.9, abs=1e-12)


def test_rodriguez_plan_values():
    plan = rodriguez_plan(1.3, 0.8, alphas=[0.05, 0.025], beta=0.1)
    assert plan.deaths() == [145.0, 178.0]
    assert plan.thresholds()[0] == pytest.approx(0.9897633331284637, abs=1e-12)
    assert plan.thresholds()[1] == pytest.approx(0.9694456657756634, abs=1e-12)
    assert plan.alphas()[0] == pytest.approx(0.05033723365676868, abs=1e-12)
    assert plan.alphas()[1] == pytest.approx(0.025162595026413638, abs=1e-12)
    for stage in plan.stages:
        assert stage.result.rounding is not None
        assert stage.result.rounding.policy == "nearest"
        assert 1.0 - stage.spec.beta == pytest.approx(0.9, abs=1e-12)


def test_rodriguez_exact_keeps_fractional_counts():
    plan = rodriguez_plan(1.3, 0.8, alphas=[0.05, 0.025], beta=0.1, rounding="exact")
    assert plan.deaths()[0] == pytest.approx(145.3237036326719, rel=1e-10)
    assert plan.deaths()[1] == pytest.approx(178.3050972767276, rel=1e-10)
    assert plan.alphas()[0] == pytest.approx(0.05, abs=1e-9)


def test_standard_ci_plan_constant_alpha():
    plan = standard_ci_plan(1.3, 0.8, DEATHS, alphas=0.025)
    want_thresholds = [0.8580033550108499, 0.8945931879558829,
                       0.923004256983969, 0.96904254819133]
    want_powers = [0.6293649241011274, 0.7210825638873752,
                   0.7934588453190655, 0.8995122207277712]
    for stage, ts, pw in zip(plan.stages, want_thresholds, want_powers):
        assert stage.spec.theta_star == pytest.approx(ts, abs=1e-12)
        assert 1.0 - stage.spec.beta == pytest.approx(pw, abs=1e-12)
        assert stage.spec.alpha == pytest.approx(0.025, abs=1e-15)


def test_standard_ci_plan_stepped_alphas():
    plan = standard_ci_plan(1.3, 0.8, DEATHS, alphas=[0.15, 0.10, 0.05, 0.025])
    want_thresholds = [1.0435630061427619, 1.018144618751332,
                       0.9752525724853061, 0.96904254819133]
    want_powers = [0.8950249018649576, 0.8969698291325412,
                   0.8715171020410979, 0.8995122207277712]
    for stage, ts, pw in zip(plan.stages, want_thresholds, want_powers):
        assert stage.spec.theta_star == pytest.approx(ts, abs=1e-12)
        assert 1.0 - stage.spec.beta == pytest.approx(pw, abs=1e-12)


def test_discrete_threshold_plan_values():
    plan = discrete_threshold_plan(1.3, 0.8, DEATHS, thresholds=[1.1, 1.05, 1.0, 1.0])
    want_alphas = [0.21535053433525064, 0.13135857907016102,
                   0.06661984653475056, 0.04004294461581419]
    want_powers = [0.9334699407839979, 0.9230705100351994,
                   0.8991984068709347, 0.9316974618020147]
    for stage, a, pw in zip(plan.stages, want_alphas, want_powers):
        assert stage.spec.alpha == pytest.approx(a, abs=1e-12)
        assert 1.0 - stage.spec.beta == pytest.approx(pw, abs=1e-12)


def test_fda_t2d_matches_fleming_thresholds_bitwise():
    fleming = make_fleming()
    t2d = fda_t2d_plan(1.3, 0.8, DEATHS, alpha=0.025, beta=0.1)
    # not just close: both routes compute the identical expression
    assert t2d.thresholds() == fleming.thresholds()
    want_theta0 = [1.5905126265496148, 1.4843681753606146, 1.4095655070219866]
    for stage, t0 in zip(t2d.stages[:3], want_theta0):
        assert stage.spec.theta0 == pytest.approx(t0, rel=1e-12)
        assert stage.spec.alpha == pytest.approx(0.025, abs=1e-15)
    assert t2d.stages[-1].spec.theta0 == 1.3
    assert 1.0 - t2d.stages[-1].spec.beta == pytest.approx(0.8995122207277712, abs=1e-12)


def test_build_plan_dispatcher():
    plan = build_plan("fleming", {"theta0": 1.3, "theta1": 0.8, "deaths": DEATHS,
                                  "beta": 0.1, "final_alpha": 0.025})
    assert plan.thresholds() == make_fleming().thresholds()

    with pytest.raises(DomainError, match="unknown strategy"):
        build_plan("bonferroni", {})
    with pytest.raises(DomainError, match="missing config fields"):
        build_plan("fleming", {"theta0": 1.3, "theta1": 0.8, "deaths": DEATHS})
    with pytest.raises(DomainError, match="unexpected config fields"):
        build_plan("fleming", {"theta0": 1.3, "theta1": 0.8, "deaths": DEATHS,
                               "beta": 0.1, "final_alpha": 0.025, "gamma": 1})
    with pytest.raises(DomainError, match="rounding applies only"):
        build_plan("standard_ci", {"theta0": 1.3, "theta1": 0.8, "deaths": DEATHS,
                                   "alphas": 0.025, "rounding": "ceil"})


def test_build_plan_custom():
    plan = build_plan("custom", {"stages": [
        {"theta0": 1.3, "theta1": 0.8, "d": 89, "beta": 0.1},
        {"theta0": 1.3, "theta1": 0.8, "d": 178, "alpha": 0.025},
    ]})
    assert plan.strategy == "custom"
    assert plan.thresholds()[0] == pytest.approx(1.049742438282068, abs=1e-12)
    assert plan.thresholds()[1] == pytest.approx(0.96904254819133, abs=1e-12)


def test_nonmonotone_deaths_rejected():
    with pytest.raises(NonmonotoneDeaths):
        fleming_plan(1.3, 0.8, [89, 89, 131], beta=0.1, final_alpha=0.025)
    with pytest.raises(NonmonotoneDeaths):
        fleming_plan(1.3, 0.8, [131, 110], beta=0.1, final_alpha=0.025)
    # two looks at the same alpha solve to the same death count
    with pytest.raises(NonmonotoneDeaths):
        rodriguez_plan(1.3, 0.8, alphas=[0.05, 0.05], beta=0.1)


def test_recompute_for_observed():
    plan = make_fleming()
    updated = recompute_for_observed(plan, 2, 115)
    assert updated.deaths() == [89, 115, 131, 178]
    assert updated.thresholds()[1] == pytest.approx(1.0159935981078003, abs=1e-12)
    assert updated.alphas()[1] == pytest.approx(0.09313502085425251, abs=1e-12)
    # untouched stages keep their original resolved specs
    assert updated.thresholds()[0] == plan.thresholds()[0]
    assert updated.thresholds()[2:] == plan.thresholds()[2:]
    # power designation survives the update
    assert 1.0 - updated.stages[1].spec.beta == pytest.approx(0.9, abs=1e-12)


def test_recompute_for_observed_guards():
    plan = make_fleming()
    with pytest.raises(NonmonotoneDeaths):
        recompute_for_observed(plan, 2, 88)      # falls below IA1
    with pytest.raises(DomainError):
        recompute_for_observed(plan, 7, 120)
    solved_d = rodriguez_plan(1.3, 0.8, alphas=[0.05, 0.025], beta=0.1)
    with pytest.raises(PatternMismatch):
        recompute_for_observed(solved_d, 1, 150)


def test_plan_table_roles_and_display():
    rows = plan_table(make_fleming())
    assert len(rows) == 4
    ia1 = rows[0]
    assert ia1["label"] == "IA1"
    assert ia1["cells"]["d"]["chosen"] is True
    assert ia1["cells"]["beta"]["chosen"] is True
    assert ia1["cells"]["alpha"]["chosen"] is False
    assert ia1["cells"]["theta_star"]["chosen"] is False
    assert ia1["cells"]["theta_star"]["display"] == "1.050"
    assert ia1["cells"]["alpha"]["display"] == "0.157"
    assert ia1["cells"]["power"]["display"] == "0.900"
    assert ia1["cells"]["d"]["display"] == "89"
    fa = rows[3]
    assert fa["is_final"]
    assert fa["cells"]["alpha"]["chosen"] is True
    assert fa["cells"]["beta"]["chosen"] is False
    assert fa["cells"]["theta_star"]["display"] == "0.969"


def test_threshold_curve_values():
    curve = threshold_curve(0.8, 0.1, [40, 60, 200])
    assert curve[0]["theta_star"] == pytest.approx(1.1997565213033863, abs=1e-12)
    assert curve[1]["theta_star"] == pytest.approx(1.1137710949146358, abs=1e-12)
    assert curve[2]["theta_star"] == pytest.approx(0.958961078117569, abs=1e-12)
    # strictly decreasing in d
    values = [p["theta_star"] for p in curve]
    assert values == sorted(values, reverse=True)


def test_snap_to_grid():
    assert snap_to_grid(1.0214658908431609) == pytest.approx(1.05)
    assert snap_to_grid(1.049742438282068) == pytest.approx(1.05)
    assert snap_to_grid(0.9897633331284637) == pytest.approx(1.00)
    assert snap_to_grid(0.958961078117569) == pytest.approx(1.00)
    assert snap_to_grid(0.92) == pytest.approx(0.95)
    # exact grid points stay put
    assert snap_to_grid(1.0) == pytest.approx(1.0)
    assert snap_to_grid(0.8) == pytest.approx(0.8)
    assert snap_to_grid(1.05) == pytest.approx(1.05)


def test_discrete_approximation_bands():
    bands = discrete_approximation(1.3, 0.8, 0.1, 40, 200, alpha_cap=0.15)
    # bands tile [40, 200] without gaps or overlaps
    assert bands[0].d_lo == 40 and bands[-1].d_hi == 200
    for left, right in zip(bands, bands[1:]):
        assert right.d_lo == left.d_hi + 1
        assert right.threshold < left.threshold  # snapped curve is non-increasing
    # the snapped rule never loses power against theta1
    for band in bands:
        assert band.power_lo >= 0.9 - 1e-12
        assert band.power_hi >= 0.9 - 1e-12
    # d=110 snaps up to 1.05 with the frozen marginal alpha at that count
    band_110 = next(b for b in bands if b.d_lo <= 110 <= b.d_hi)
    assert band_110.threshold == pytest.approx(1.05)
    import choose4
    assert choose4.alpha_from(band_110.threshold, 1.3, 110) == pytest.approx(
        0.13135857907016102, abs=1e-12)
    # generous thresholds at low death counts blow through the alpha cap
    assert bands[0].exceeds_cap
    assert not bands[-1].exceeds_cap


def test_discrete_approximation_guards():
    with pytest.raises(DomainError):
        discrete_approximation(1.3, 0.8, 0.1, 0, 100)
    with pytest.raises(DomainError):
        discrete_approximation(1.3, 0.8, 0.1, 50, 40)
    with pytest.raises(DomainError):
        discrete_approximation(1.3, 0.8, 0.1, 40, 100, grid_step=0.0)
