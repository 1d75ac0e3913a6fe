import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracsde.errors import ClassicalSolutionError, DomainError
from fracsde.fou_analysis import fou_limit_variance
from fracsde.special_functions import ml_eval
from fracsde.spde_analysis import (
    SWEEP_HEADER,
    SpdeParams,
    VerdictTag,
    classify,
    growth_probe,
    gronwall_envelope,
    second_moment_volterra,
    sweep,
    threshold_coefficient,
)
from fracsde.volterra_sim import GridSpec, empirical_moments, simulate_fgbm

WP = VerdictTag.WELL_POSED
NWP = VerdictTag.NOT_WELL_POSED
AT = VerdictTag.WELL_POSED_AT_THRESHOLD
UNK = VerdictTag.UNKNOWN
NCS = VerdictTag.NO_CLASSICAL_SOLUTION


@pytest.mark.parametrize(
    "beta,gamma,alpha,nu,b,sigma,tag",
    [
        (0.8, 0.3, 1.5, 1.5, 1.0, 5.0, WP),
        (0.8, 0.3, 1.0, 1.5, 1.0, 0.1, NWP),
        (0.8, 0.5, 1.0, 1.0, 1.0, 0.1, NWP),
        (0.8, 0.5, 1.2, 1.0, 1.0, 3.0, WP),
        (0.8, 0.5, 0.8, 1.0, 1.0, 3.0, NWP),
        (1.0, 1.0, 2.0, 1.0, 1.0, 1.0, AT),
        (1.0, 1.0, 2.0, 1.0, 1.0, 2.0, UNK),
        (1.0, 1.0, 1.5, 1.0, 1.0, 1.0, UNK),
        (0.9, 0.7, 1.5, 1.0, 1.0, 1.0, WP),
        (0.2, 0.9, 2.0, 0.5, 1.0, 1.0, NCS),
    ],
)
def test_classifier_table(beta, gamma, alpha, nu, b, sigma, tag):
    verdict = classify(SpdeParams(beta, gamma, alpha, nu, b, sigma))
    assert verdict.tag == tag
    assert verdict.reason


@given(st.floats(0.01, 10.0), st.floats(-5.0, 5.0))
def test_classical_corner_threshold(b, sigma):
    tag = classify(SpdeParams(1.0, 1.0, 2.0, 1.0, b, sigma)).tag
    assert (tag == AT) == (2 * b >= sigma**2)
    assert tag in (AT, UNK)


@given(st.floats(0.05, 1.0), st.floats(0.01, 0.49), st.floats(0.1, 2.0), st.floats(0.1, 2.0))
def test_subcritical_noise_rule(beta, gamma, alpha, nu):
    if beta - gamma <= -0.5:
        return
    tag = classify(SpdeParams(beta, gamma, alpha, nu, 1.0, 1.0)).tag
    assert tag == (WP if alpha >= nu else NWP)


def test_boundary_continuity_at_half():
    p = SpdeParams(1.0, 0.5 + 1e-6, 1.0, 1.0, 1.0, 1.0)
    assert p.critical_alpha == pytest.approx(p.nu, abs=1e-5)
    assert p.critical_alpha > p.nu


def test_tolerance_snaps_onto_boundaries():
    near_half = SpdeParams(1.0, 0.5 + 1e-9, 1.0, 1.0, 1.0, 1.0)
    assert classify(near_half).tag == UNK
    assert classify(near_half, tol=1e-6).tag == NWP
    near_critical = SpdeParams(1.0, 1.0, 2.0 - 1e-9, 1.0, 1.0, 1.0)
    assert classify(near_critical).tag == UNK
    assert classify(near_critical, tol=1e-6).tag == AT
    with pytest.raises(DomainError):
        classify(near_half, tol=-1.0)


def test_threshold_coefficient():
    assert threshold_coefficient(1.0, 1.0) == pytest.approx(0.5, abs=1e-12)
    eps = 0.3 / 0.9
    expected = fou_limit_variance(1.0, 0.9, 0.8) ** (1.0 / (2.0 - 2.0 * eps))
    assert threshold_coefficient(0.9, 0.8) == pytest.approx(expected, rel=1e-12)
    for bad in ((1.0, 0.5), (0.3, 0.9)):
        with pytest.raises(DomainError):
            threshold_coefficient(*bad)


def test_classifier_is_even_in_sigma():
    for sigma in (0.5, 1.3, 2.0):
        a = classify(SpdeParams(1.0, 1.0, 2.0, 1.0, 1.0, sigma))
        b = classify(SpdeParams(1.0, 1.0, 2.0, 1.0, 1.0, -sigma))
        assert a == b


@pytest.mark.parametrize("kwargs", [{"beta": 0.0}, {"gamma": 1.5}, {"alpha": 2.5}, {"nu": 0.0}, {"b": 0.0}, {"sigma": math.inf}])
def test_params_validation(kwargs):
    base = dict(beta=1.0, gamma=1.0, alpha=2.0, nu=1.0, b=1.0, sigma=1.0)
    base.update(kwargs)
    with pytest.raises(DomainError):
        SpdeParams(**base)


@pytest.mark.parametrize("b,sigma,y", [(1.0, 1.0, 1.5), (0.5, 1.2, 2.0), (1.0, 0.0, 3.0)])
def test_second_moment_classical_corner(b, sigma, y):
    # beta = gamma = 1, alpha = 2, nu = 1: V' = (sigma**2 - 2b) y**2 V.
    grid = GridSpec(1.0, 256)
    v = second_moment_volterra(SpdeParams(1.0, 1.0, 2.0, 1.0, b, sigma), y, grid)
    expected = np.exp((sigma**2 - 2 * b) * y**2 * grid.t)
    np.testing.assert_allclose(v.values, expected, rtol=5e-5)


def test_second_moment_without_noise():
    grid = GridSpec(2.0, 128)
    p = SpdeParams(0.7, 0.4, 1.5, 1.0, 0.8, 0.0)
    v = second_moment_volterra(p, 2.0, grid)
    expected = ml_eval(0.7, 1.0, -0.8 * 2.0**1.5 * grid.t**0.7) ** 2
    np.testing.assert_allclose(v.values, expected, rtol=1e-12)
    assert all(r <= 1.0 for _, r in growth_probe(p, range(1, 65), GridSpec(1.0, 64)))


def test_second_moment_matches_monte_carlo():
    # The Fourier mode at |y| is a fractional GBM with a = -b |y|**alpha and noise sigma |y|**nu.
    p = SpdeParams(0.8, 0.6, 1.0, 1.0, 1.0, 0.5)
    y = 1.3
    grid = GridSpec(1.0, 256)
    v = second_moment_volterra(p, y, grid).values[-1]
    ens = simulate_fgbm(1.0, -p.b * y**p.alpha, p.sigma * y**p.nu, p.beta, p.gamma, grid, 10_000, seed=11)
    sq = ens.data[:, -1] ** 2
    se = sq.std(ddof=1) / math.sqrt(sq.size)
    assert abs(sq.mean() - v) < 3 * se
    assert empirical_moments(ens).mean.values[0] == 1.0


def test_blow_up_is_flagged_not_raised():
    # V = exp(175 t) crosses the blow-up level near t = 0.39.
    v = second_moment_volterra(SpdeParams(1.0, 1.0, 2.0, 1.0, 1.0, 3.0), 5.0, GridSpec(1.0, 128)).values
    finite = np.isfinite(v)
    first_inf = int(np.argmin(finite))
    assert 0.3 < first_inf / 128 < 0.5
    assert np.all(finite[:first_inf]) and np.all(np.isinf(v[first_inf:]))


def test_second_moment_domain_errors():
    with pytest.raises(ClassicalSolutionError):
        second_moment_volterra(SpdeParams(0.2, 0.9, 1.0, 1.0, 1.0, 1.0), 1.0, GridSpec(1.0, 8))
    with pytest.raises(DomainError):
        second_moment_volterra(SpdeParams(1.0, 1.0, 1.0, 1.0, 1.0, 1.0), 0.0, GridSpec(1.0, 8))


def test_threshold_separates_bounded_from_growing():
    # At alpha = nu/(1 - eps) with beta = gamma = 1 the threshold is sigma**2 = 2b.
    grid = GridSpec(1.0, 256)
    below = growth_probe(SpdeParams(1.0, 1.0, 2.0, 1.0, 1.0, 1.0), range(1, 65), grid)
    assert max(r for _, r in below) <= 1.0 + 1e-9
    above = growth_probe(SpdeParams(1.0, 1.0, 2.0, 1.0, 1.0, 2.0), range(1, 65), grid)
    ratios = [r for _, r in above]
    assert ratios[1] > 10 * ratios[0]
    assert math.isinf(ratios[-1])


def test_growth_probe_regimes():
    grid = GridSpec(1.0, 256)
    ys = range(1, 65)
    bounded = [r for _, r in growth_probe(SpdeParams(1.0, 0.3, 1.0, 1.0, 1.0, 1.0), ys, grid)]
    assert max(bounded) / min(bounded) < 10
    growing = [r for _, r in growth_probe(SpdeParams(1.0, 0.5, 1.0, 1.0, 1.0, 1.0), ys, grid)]
    assert growing[-1] >= 10 * growing[0]
    assert np.all(np.diff(growing[8:]) > 0)


@pytest.mark.parametrize("gamma,sigma", [(0.3, 1.0), (0.2, 2.0), (0.45, 0.7)])
def test_gronwall_envelope_dominates(gamma, sigma):
    p = SpdeParams(0.9, gamma, 1.0, 1.0, 1.0, sigma)
    grid = GridSpec(1.0, 256)
    for y in (1.0, 4.0, 16.0):
        v = second_moment_volterra(p, y, grid).values
        env = gronwall_envelope(p, y, grid).values
        assert np.all(v <= env * (1 + 1e-9))


def test_sweep_rows_and_header():
    rows = sweep([1.0], [0.3, 1.0], [1.0, 2.0], [1.0], [1.0], [1.0, 2.0])
    assert len(rows) == 8
    records = [r.as_record() for r in rows]
    assert tuple(records[0]) == SWEEP_HEADER
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_HEADER)
    writer.writeheader()
    writer.writerows(records)
    assert buf.getvalue().splitlines()[0] == "beta,gamma,alpha,nu,b,sigma,verdict,reason"
    tags = {(r["gamma"], r["alpha"], r["sigma"]): r["verdict"] for r in records}
    assert tags[(1.0, 2.0, 1.0)] == "WellPosedAtThreshold"
    assert tags[(0.3, 1.0, 2.0)] == "WellPosed"
