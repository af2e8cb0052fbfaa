import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from offgrid_doa.array_model import AngularGrid, ArrayGeometry
from offgrid_doa.metrics import PEAK, DoAEstimate, music_spectrum, reconstruction_error, recover_doas, rmse
from offgrid_doa.signal_sim import Scenario, exact_covariance

GRID = AngularGrid.default()


def _x_with(groups):
    x = np.zeros(2 * GRID.N)
    for i, s, p in groups:
        x[i], x[i + GRID.N] = s, p
    return x


def test_music_on_grid_single_source():
    geo = ArrayGeometry.ula(8)
    R = exact_covariance(Scenario((20.0,), (1.0,)), geo)
    spec, est = music_spectrum(R, geo, GRID, 1)
    assert GRID.phi[np.argmax(spec)] == 20.0
    assert est.thetas[0] == 20.0 and est.betas[0] == 0.0


def test_music_two_sources_nearest_atoms():
    geo = ArrayGeometry.ula(8)
    R = exact_covariance(Scenario((-30.2, 13.2220), (1.0, 1.0)), geo)
    _, est = music_spectrum(R, geo, GRID, 2)
    np.testing.assert_array_equal(est.thetas, [-30.0, 13.0])


def test_music_flat_on_white_noise():
    geo = ArrayGeometry.ula(8)
    spec, _ = music_spectrum(np.eye(8), geo, GRID, 2)
    assert spec.max() / spec.min() <= 1 + 1e-6


def test_music_needs_k_below_m():
    with pytest.raises(ValueError):
        music_spectrum(np.eye(4), ArrayGeometry.ula(4), GRID, 4)


def test_recover_clamps_beta():
    i = GRID.nearest(10.0)
    est = recover_doas(_x_with([(i, 1.0, 0.3)]), GRID, 1)
    assert est.betas[0] == 0.25 and est.thetas[0] == pytest.approx(10.25)
    # p / s = 0.15 is inside the cell and is kept
    est = recover_doas(_x_with([(i, 2.0, 0.3)]), GRID, 1)
    assert est.betas[0] == pytest.approx(0.15) and est.powers[0] == 2.0


@pytest.mark.parametrize("refine", ["centroid", PEAK])
def test_recover_exact_off_grid_solution(refine):
    x = _x_with([(GRID.nearest(13.2220), 1.0, 0.2220), (GRID.nearest(28.6022), 1.5, 1.5 * 0.1022)])
    est = recover_doas(x, GRID, 2, refine=refine)
    np.testing.assert_allclose(est.thetas, [13.2220, 28.6022], atol=1e-12)


def test_recover_centroid_of_split_atom():
    # a source at 13.25 split evenly across the atoms 13.0 and 13.5
    i = GRID.nearest(13.0)
    x = _x_with([(i, 1.0, 0.25), (i + 1, 0.9, -0.9 * 0.25)])
    assert recover_doas(x, GRID, 1).thetas[0] == pytest.approx(13.25)
    assert recover_doas(x, GRID, 1, refine=PEAK).thetas[0] == pytest.approx(13.25)
    x = _x_with([(i, 1.0, 0.0), (i + 1, 1.0, 0.0)])
    assert recover_doas(x, GRID, 1).thetas[0] == pytest.approx(13.25)
    assert recover_doas(x, GRID, 1, refine=PEAK).thetas[0] == 13.0


def test_recover_pads_when_too_few_peaks():
    est = recover_doas(_x_with([(100, 1.0, 0.0)]), GRID, 2)
    assert est.padded and len(est.thetas) == 2


def test_recover_planted_support():
    rng = np.random.default_rng(3)
    for _ in range(20):
        idx = np.sort(rng.choice(np.arange(5, 355, 10), size=3, replace=False))
        s = rng.uniform(0.5, 2.0, 3)
        x = _x_with([(i, si, rng.uniform(-0.25, 0.25) * si) for i, si in zip(idx, s)])
        np.testing.assert_array_equal(recover_doas(x, GRID, 3).grid_indices, idx)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 1e3))
def test_recover_scale_invariant(c):
    rng = np.random.default_rng(0)
    x = np.abs(rng.normal(size=2 * GRID.N)) * (rng.random(2 * GRID.N) < 0.05)
    x[GRID.N:] = np.clip(rng.normal(size=GRID.N), -0.25, 0.25) * x[:GRID.N]
    a, b = recover_doas(x, GRID, 2), recover_doas(c * x, GRID, 2)
    np.testing.assert_allclose(a.thetas, b.thetas, atol=1e-12)


def test_rmse_examples():
    th = [13.2220, 28.6022]
    assert rmse([np.array(th)] * 3, th) == 0.0
    assert rmse([np.array([13.5220, 29.0022])], th) == pytest.approx(0.3535533906, rel=1e-9)
    assert rmse([np.array(th), np.array(th) + 0.5], th) == pytest.approx(np.sqrt(0.125))
    # ascending pairing
    assert rmse([np.array([28.6022, 13.2220])], th) == 0.0
    with pytest.raises(ValueError):
        rmse([np.array([1.0])], th)


def test_rmse_accepts_estimates():
    est = DoAEstimate(np.array([13.0, 28.5]), np.zeros(2), np.ones(2), np.array([206, 237]))
    assert rmse([est], [13.0, 28.5]) == 0.0


def test_reconstruction_error_examples():
    th = np.array([13.2220, 28.6022])
    assert reconstruction_error(th, th) == 0.0
    # ||(0.25, -0.25)|| / ||theta|| = 0.353553 / 31.510544
    assert reconstruction_error(th + [0.25, -0.25], th) == pytest.approx(0.0112202024, abs=1e-10)
    assert reconstruction_error(2 * (th + [0.25, -0.25]), 2 * th) == pytest.approx(
        reconstruction_error(th + [0.25, -0.25], th), rel=1e-12)
