import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fock_oracle import enumerate_link
from satqnet.channel import (
    ChannelError,
    LinkModel,
    OpticalConfig,
    SourceConfig,
    apply_pure_loss,
    emission_probability,
    fock_index,
    link_metrics,
    metrics_from_eta,
    source_state,
    transmissivity,
)
from satqnet.orbital import LinkGeometry

OPTICS = OpticalConfig(0.2, 2.0, 737e-9, 0.028125e-3)


def one_mode_state(photons: int) -> np.ndarray:
    psi = np.zeros(81)
    psi[fock_index((photons, 0, 0, 0))] = 1.0
    return psi


def test_emission_vacuum():
    assert emission_probability(0.0, 0) == 1.0
    assert emission_probability(0.0, 1) == 0.0
    assert emission_probability(0.0, 5) == 0.0


def test_emission_unit_mean():
    assert emission_probability(1.0, 0) == pytest.approx(0.25, abs=1e-15)
    assert emission_probability(1.0, 1) == pytest.approx(0.25, abs=1e-15)
    assert emission_probability(1.0, 2) == pytest.approx(0.1875, abs=1e-15)


@pytest.mark.parametrize("n_s", [0.0, 0.0078, 0.1, 1.0, 2.5, 5.0])
def test_emission_normalised(n_s):
    assert math.fsum(emission_probability(n_s, n) for n in range(201)) == pytest.approx(1.0, abs=1e-9)


def test_emission_domain():
    with pytest.raises(ChannelError):
        emission_probability(-0.1, 0)
    with pytest.raises(ChannelError):
        emission_probability(0.1, -1)


def test_free_space_example():
    geo = LinkGeometry(1_000_000.0, 1.0, 0.0, True)
    eta_f, eta_a, eta = transmissivity(OPTICS, geo)
    assert eta_f == pytest.approx((math.pi * 0.01) * (math.pi * 1.0) / 0.737**2, rel=1e-12)
    assert eta_f == pytest.approx(0.1817, abs=5e-5)
    assert eta_a == 1.0
    assert eta == eta_f


def test_atmosphere_example():
    geo = LinkGeometry(1_000_000.0, 1.0, 10_000.0, True)
    _, eta_a, _ = transmissivity(OPTICS, geo)
    assert eta_a == pytest.approx(math.exp(-0.28125), rel=1e-12)
    assert eta_a == pytest.approx(0.7548396, abs=1e-6)


def test_transmissivity_limits():
    far = transmissivity(OPTICS, LinkGeometry(1e12, 1.0, 0.0, True))
    assert far[0] < 1e-9
    near = transmissivity(OPTICS, LinkGeometry(1.0, 1.0, 0.0, True))
    assert near[0] == 1.0


def test_transmissivity_requires_visibility():
    with pytest.raises(ChannelError):
        transmissivity(OPTICS, LinkGeometry(1e6, -0.1, None, False))
    with pytest.raises(ChannelError):
        link_metrics(SourceConfig(0.01, 1e9), OPTICS, LinkGeometry(1e6, -0.1, None, False), LinkGeometry(1e6, 0.5, 1e4, True))


def test_bad_configs():
    with pytest.raises(ChannelError):
        OpticalConfig(0.0, 2.0, 737e-9, 1e-5)
    with pytest.raises(ChannelError):
        SourceConfig(-1.0, 1e9)
    with pytest.raises(ChannelError):
        SourceConfig(0.01, 1e9, dark_click_probability=1.0)
    with pytest.raises(ChannelError):
        SourceConfig(0.01, 1e9, sign=0)


def test_source_vacuum():
    psi = source_state(SourceConfig(0.0, 1e9)).vector()
    expected = np.zeros(81)
    expected[0] = 1.0
    np.testing.assert_array_equal(psi, expected)


def test_source_sector_ratio_unit_mean():
    amps = source_state(SourceConfig(1.0, 1e9)).amplitudes
    one = amps[(1, 0, 0, 1)] ** 2 + amps[(0, 1, 1, 0)] ** 2
    assert one / amps[(0, 0, 0, 0)] ** 2 == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("n_s", [0.0, 1e-4, 0.0078, 0.5, 3.0])
@pytest.mark.parametrize("sign", [1, -1])
def test_source_normalised(n_s, sign):
    psi = source_state(SourceConfig(n_s, 1e9, sign=sign)).vector()
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


def test_source_sign():
    plus = source_state(SourceConfig(0.1, 1e9, sign=1)).amplitudes
    minus = source_state(SourceConfig(0.1, 1e9, sign=-1)).amplitudes
    assert minus[(0, 1, 1, 0)] == -plus[(0, 1, 1, 0)]
    assert minus[(1, 1, 1, 1)] == -plus[(1, 1, 1, 1)]
    assert minus[(2, 0, 0, 2)] == plus[(2, 0, 0, 2)]


@pytest.mark.parametrize("eta", [0.0, 0.3, 0.9, 1.0])
def test_loss_single_photon(eta):
    out = apply_pure_loss(one_mode_state(1), eta, 1.0)
    one = fock_index((1, 0, 0, 0))
    assert out.density[one, one] == pytest.approx(eta, abs=1e-15)
    assert out.density[0, 0] == pytest.approx(1 - eta, abs=1e-15)


@pytest.mark.parametrize("eta", [0.0, 0.3, 0.9, 1.0])
def test_loss_two_photons(eta):
    rho = apply_pure_loss(one_mode_state(2), eta, 1.0).density
    diag = [rho[fock_index((k, 0, 0, 0)), fock_index((k, 0, 0, 0))] for k in (2, 1, 0)]
    np.testing.assert_allclose(diag, [eta**2, 2 * eta * (1 - eta), (1 - eta) ** 2], atol=1e-15)


def test_loss_identity():
    psi = source_state(SourceConfig(0.3, 1e9)).vector()
    out = apply_pure_loss(psi, 1.0, 1.0)
    np.testing.assert_allclose(out.density, np.outer(psi, psi), atol=1e-12)
    assert out.loss_record == {(0, 0): pytest.approx(1.0)}


def test_loss_trace_preserved_on_grid():
    psi = source_state(SourceConfig(0.2, 1e9)).vector()
    grid = np.linspace(0.0, 1.0, 11)
    for e1 in grid:
        for e2 in grid:
            out = apply_pure_loss(psi, e1, e2)
            assert abs(np.trace(out.density) - 1.0) < 1e-12
            assert abs(math.fsum(out.loss_record.values()) - 1.0) < 1e-12


def test_loss_domain():
    with pytest.raises(ChannelError):
        apply_pure_loss(one_mode_state(1), 1.2, 0.5)
    with pytest.raises(ChannelError):
        apply_pure_loss(one_mode_state(1), 0.5, -0.1)
    with pytest.raises(ChannelError):
        apply_pure_loss(np.ones(5), 0.5, 0.5)


def test_perfect_channel_low_brightness():
    prob, fid = metrics_from_eta(SourceConfig(1e-6, 1e9), 1.0, 1.0)
    assert fid > 0.999999
    assert prob == pytest.approx(emission_probability(1e-6, 1), rel=1e-4)
    prob4, fid4 = metrics_from_eta(SourceConfig(1e-4, 1e9), 1.0, 1.0)
    assert prob4 > prob and fid4 > 0.999


@pytest.mark.parametrize("n_s", [0.001, 0.005, 0.0078])
@pytest.mark.parametrize("eta", [1e-4, 1e-2, 0.1])
def test_leading_order_rate(n_s, eta):
    prob, _ = metrics_from_eta(SourceConfig(n_s, 1e9), eta, eta)
    lead = emission_probability(n_s, 1) * eta * eta
    assert abs(prob / lead - 1.0) < 0.05
    # the correction is the two-pair sector, at most four times p(2) eta^2
    assert 0.0 <= prob - lead <= 4.0 * emission_probability(n_s, 2) * eta * eta


def test_two_pair_correction_coefficient():
    # (psi/rate - p1 eta^2) / (p2 eta^2) -> 4 as eta -> 0
    n_s, eta = 0.01, 1e-5
    prob, _ = metrics_from_eta(SourceConfig(n_s, 1e9), eta, eta)
    coeff = (prob - emission_probability(n_s, 1) * eta**2) / (emission_probability(n_s, 2) * eta**2)
    assert coeff == pytest.approx(4.0, abs=1e-3)


@pytest.mark.parametrize("eta", [0.3, 1.0])
def test_one_dark_arm_gives_zero(eta):
    src = SourceConfig(0.05, 1e9)
    assert metrics_from_eta(src, 0.0, eta)[0] == 0.0
    assert metrics_from_eta(src, eta, 0.0)[0] == 0.0


def test_rate_monotone_in_eta():
    model = LinkModel(SourceConfig(0.05, 1e9))
    grid = np.linspace(0.0, 1.0, 21)
    e1, e2 = np.meshgrid(grid, grid, indexing="ij")
    prob, _ = model.evaluate(e1, e2)
    assert np.all(np.diff(prob, axis=0) >= -1e-15)
    assert np.all(np.diff(prob, axis=1) >= -1e-15)


@pytest.mark.parametrize("eta", [1e-3, 0.1, 0.5, 1.0])
def test_fidelity_non_increasing_in_brightness(eta):
    grid = [0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5]
    fids = [metrics_from_eta(SourceConfig(n, 1e9), eta, eta)[1] for n in grid]
    assert all(b <= a + 1e-12 for a, b in zip(fids, fids[1:]))


def test_dark_clicks_lower_fidelity_at_long_range():
    clean = metrics_from_eta(SourceConfig(0.0078, 1e10), 1e-4, 1e-4)
    noisy = metrics_from_eta(SourceConfig(0.0078, 1e10, dark_click_probability=1e-6), 1e-4, 1e-4)
    assert noisy[0] > clean[0]
    assert noisy[1] < clean[1] - 0.01


def test_oracle_grid():
    worst = 0.0
    for n_s in (0.005, 0.05):
        for e1 in (0.01, 0.5, 1.0):
            for e2 in (0.01, 0.5, 1.0):
                for dark in (0.0, 1e-6):
                    got = metrics_from_eta(SourceConfig(n_s, 1e9, dark), e1, e2)
                    ref = enumerate_link(n_s, e1, e2, dark)
                    worst = max(worst, abs(got[0] - ref[0]), abs(got[0] * got[1] - ref[0] * ref[1]))
    assert worst < 1e-10


@settings(max_examples=30, deadline=None)
@given(
    n_s=st.floats(0.0, 2.0),
    e1=st.floats(0.0, 1.0),
    e2=st.floats(0.0, 1.0),
    dark=st.sampled_from([0.0, 1e-6, 1e-3, 0.05]),
    sign=st.sampled_from([1, -1]),
)
def test_oracle_random(n_s, e1, e2, dark, sign):
    got = metrics_from_eta(SourceConfig(n_s, 1e9, dark, sign=sign), e1, e2)
    ref = enumerate_link(n_s, e1, e2, dark, sign)
    assert got[0] == pytest.approx(ref[0], abs=1e-12)
    assert got[0] * got[1] == pytest.approx(ref[0] * ref[1], abs=1e-12)


def test_fast_path_matches_density_path():
    src = SourceConfig(0.0078, 1e10, 1e-6)
    model = LinkModel(src)
    rng = np.random.default_rng(5)
    e1 = np.concatenate([rng.random(20), 10.0 ** rng.uniform(-8, 0, 20), [0.0, 1.0]])
    e2 = np.concatenate([rng.random(20), 10.0 ** rng.uniform(-8, 0, 20), [1.0, 0.0]])
    prob, fid = model.evaluate(e1, e2)
    for k in range(len(e1)):
        ref = metrics_from_eta(src, e1[k], e2[k])
        assert prob[k] == pytest.approx(ref[0], rel=1e-9, abs=1e-20)
        assert fid[k] == pytest.approx(ref[1], abs=1e-9)
    np.testing.assert_allclose(model.rate(e1, e2), src.repetition_rate * prob)


def test_link_metrics_combines_arms():
    src = SourceConfig(0.0078, 1e10, 1e-6)
    g1 = LinkGeometry(1_500_000.0, 0.7, 12_000.0, True)
    g2 = LinkGeometry(2_200_000.0, 0.3, 30_000.0, True)
    m = link_metrics(src, OPTICS, g1, g2)
    assert m.eta[0] == pytest.approx(m.eta_free[0] * m.eta_atm[0])
    prob, fid = metrics_from_eta(src, *m.eta)
    assert m.success_probability == prob
    assert m.rate == pytest.approx(1e10 * prob)
    assert m.fidelity == fid
