"""Reference values for long real and imaginary times. Run with -m slow."""

import numpy as np
import pytest

from thimble import asymptotics, saddles
from thimble.errors import LabelExcludedError

pytestmark = pytest.mark.slow


@pytest.mark.parametrize(
    "label, T, p, action",
    [((2, 1), 10.0, 1.001 + 0.027j, -0.038 - 1.22j), ((3, 2), 15.0, 0.987 + 0.024j, -0.051 - 1.871j)],
)
def test_near_sphaleron_solutions(label, T, p, action):
    bc = saddles.BoundaryData.from_duration(-1.0, 1.0, T)
    sol = saddles.solveModulus(label, bc)
    assert abs(sol.p - p) < 5e-3
    assert abs(saddles.action(sol).value - action) < 5e-3


@pytest.mark.parametrize(
    "label, T, p, action",
    [((31, 30), 100.0, 0.427 + 0.155j, -1.072 + 0.007j), ((52, 50), 172.0, 0.528 + 0.185j, -2.892 + 0.092j)],
)
def test_oscillatory_tunneling_solutions(label, T, p, action):
    predictions, errors = asymptotics.oscillatoryTunnelingScan(T, labels=[label], n_jobs=1)
    assert not errors
    (prediction,) = predictions
    assert abs(prediction.p - p) < 1e-2
    assert abs(prediction.action - action) < 1e-2


@pytest.mark.parametrize("label, T", [((2, 1), 10.0), ((3, 2), 15.0)])
def test_near_sphaleron_shooting(label, T):
    bc = saddles.BoundaryData.from_duration(-1.0, 1.0, T)
    sol = saddles.solveModulus(label, bc)
    times = np.linspace(bc.ti, bc.tf, 41)
    shot = saddles.shootingTrajectory(sol, times)
    closed = saddles.trajectory(sol, times)
    assert np.max(np.abs(closed - shot)) < 1e-6 * max(1.0, np.max(np.abs(closed)))


@pytest.fixture(scope="module")
def imaginary_bc():
    return saddles.BoundaryData.from_duration(-1.0, 1.0, 10.0, saddles.IMAGINARY_TIME)


@pytest.mark.parametrize("label", [(0, 0), (1, 0)])
def test_single_instanton_action(label, imaginary_bc):
    sol = saddles.solveModulus(label, imaginary_bc)
    value = saddles.action(sol).value
    assert abs(value.real - (-4.0 / 3.0)) < 1e-3


def test_three_instanton_action(imaginary_bc):
    sol = saddles.solveModulus((3, 0), imaginary_bc)
    value = saddles.action(sol).value
    assert abs(value.real - (-3.93)) < 1e-2


@pytest.mark.parametrize("T", [10.0, 12.0, 14.0])
def test_instanton_energy_law(T):
    bc = saddles.BoundaryData.from_duration(-1.0, 1.0, T, saddles.IMAGINARY_TIME)
    sol = saddles.solveModulus((0, 0), bc)
    predicted = asymptotics.instantonImagTime((0, 0), T).p
    assert abs(sol.p - predicted) < 1e-2 * abs(predicted)


def test_instanton_profile(imaginary_bc):
    sol = saddles.solveModulus((0, 0), imaginary_bc)
    t = np.linspace(0.0, 10.0, 201)
    profile = asymptotics.instantonTrajectory((0, 0), 10.0, t)
    assert np.max(np.abs(saddles.trajectory(sol, t) - profile)) < 1e-3


def sigma_labels(limit):
    return [
        label for label in saddles.atlas_labels(limit, limit) if (label.n, label.m) != (0, 0)
    ]


@pytest.mark.parametrize("label", sigma_labels(5), ids=str)
def test_sign_rule_matches_solver(label):
    bc = saddles.BoundaryData.from_duration(0.0, 0.0, 0.5)
    sol = saddles.solveModulus(label, bc)
    value = saddles.action(sol).value
    rule = asymptotics.signRule(label)
    kind = saddles.classify(sol, action_value=value).kind
    if rule == asymptotics.REAL:
        assert kind == saddles.REAL_SOLUTION
    elif rule == asymptotics.EXCLUDED:
        assert value.real > 0 and kind == saddles.COMPLEX_EXCLUDED
    else:
        assert value.real < 0 and kind == saddles.COMPLEX_SUPPRESSED


@pytest.mark.parametrize("label", sigma_labels(3), ids=str)
def test_excluded_class_never_contributes(label, atlas_bc):
    try:
        sol = saddles.solveModulus(label, atlas_bc)
    except LabelExcludedError:
        return
    result = saddles.classify(sol)
    if result.kind == saddles.COMPLEX_EXCLUDED:
        assert result.nSigma == 0
        assert result.reI > 0
    if result.kind == saddles.COMPLEX_SUPPRESSED:
        assert result.nSigma is None


def test_asymptotics_report_rows():
    rows = asymptotics.asymptoticsReport()
    assert [row["regime"] for row in rows] == (
        [asymptotics.SHORT_TIME] * 3
        + [asymptotics.IMAG_INSTANTON] * 2
        + [asymptotics.REAL_SPHALERON] * 2
        + [asymptotics.OSCILLATORY_TUNNELING] * 2
    )
    for row in rows:
        assert row["error"] is None
    short = [row for row in rows if row["regime"] == asymptotics.SHORT_TIME]
    assert all(row["p_relative_error"] < 5e-3 for row in short)
    oscillating = [row for row in rows if row["regime"] == asymptotics.OSCILLATORY_TUNNELING]
    assert [(row["n"], row["m"]) for row in oscillating] == [(31, 30), (52, 50)]
    for row in oscillating:
        assert abs(row["p_solver"] - row["p_asymptotic"]) < 1e-2
        assert abs(row["action_solver"] - row["action_asymptotic"]) < 1e-2


def test_sphaleron_trajectory_follows_even_label():
    T = 15.0
    bc = saddles.BoundaryData.from_duration(-1.0, 1.0, T)
    sol = saddles.solveModulus((3, 2), bc)
    t = np.linspace(0.0, T, 121)
    profile = asymptotics.sphaleronTrajectory(2, T, t)
    assert abs(profile[0] + 1.0) < 0.05
    assert abs(profile[-1] - 1.0) < 0.05
    assert np.max(np.abs(profile - saddles.trajectory(sol, t))) < 0.1


def test_sphaleron_trajectory_away_from_odd_peak():
    T = 10.0
    bc = saddles.BoundaryData.from_duration(-1.0, 1.0, T)
    sol = saddles.solveModulus((2, 1), bc)
    t = np.linspace(0.0, T, 101)
    t = t[np.abs(t - asymptotics.sphaleronPeakTime(T)) > 2.0]
    profile = asymptotics.sphaleronTrajectory(1, T, t)
    assert np.max(np.abs(profile - saddles.trajectory(sol, t))) < 0.1
