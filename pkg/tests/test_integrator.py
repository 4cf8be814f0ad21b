import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from hopfsync.errors import Blowup, ParameterError
from hopfsync.integrator import (
    SimConfig,
    advance_deterministic,
    integrate,
    integrate_from,
    sample_initial_state,
    trial_streams,
    wiener_increments,
)
from hopfsync.model import ModelParams

R_STAR = math.sqrt((-1 + math.sqrt(5)) / 2)  # root of lambda(r) = 0 at lambda0 = 0.2


def test_simconfig_defaults():
    cfg = SimConfig()
    assert (cfg.dt, cfg.t_burn, cfg.t_end, cfg.ic_sigma, cfg.bound) == (0.01, 15.0, 100.0, 0.008, 1e6)
    assert cfg.n_steps == 10000
    assert cfg.burn_steps == 1500
    assert cfg.n_samples == 8501


@pytest.mark.parametrize(
    "kw",
    [dict(dt=0.0), dict(t_burn=100.0), dict(t_burn=-1.0), dict(ic_sigma=-0.1), dict(seed=-1), dict(dt=math.nan)],
)
def test_simconfig_validation(kw):
    with pytest.raises(ParameterError):
        SimConfig(**kw)


def test_initial_state_degenerate():
    assert tuple(sample_initial_state(trial_streams(0), 0.0)) == (0.0, 0.0, 0.0, 0.0)


def test_initial_state_moments():
    streams = trial_streams(123)
    x = np.array([sample_initial_state(streams, 0.008).x1 for _ in range(100_000)])
    assert abs(x.mean()) < 3 * 0.008 / math.sqrt(x.size)
    assert x.var() == pytest.approx(0.008**2, rel=0.05)


def test_wiener_empty():
    assert wiener_increments(trial_streams(0), 0).shape == (0, 2)


def test_wiener_moments_and_independence():
    w = wiener_increments(trial_streams(9), 1_000_000)
    assert w.var(axis=0) == pytest.approx([1.0, 1.0], rel=0.005)
    assert abs(np.corrcoef(w.T)[0, 1]) < 3 / math.sqrt(1_000_000)


def test_streams_depend_on_seed_and_trial():
    a = wiener_increments(trial_streams(1, 0), 5)
    assert np.array_equal(a, wiener_increments(trial_streams(1, 0), 5))
    assert not np.array_equal(a, wiener_increments(trial_streams(1, 1), 5))
    assert not np.array_equal(a, wiener_increments(trial_streams(2, 0), 5))


def test_trajectory_sampling():
    traj = integrate(ModelParams(delta1=0.1, delta2=0.1), SimConfig(seed=4))
    assert len(traj) == 8501
    assert traj.t[0] == 15.0
    np.testing.assert_allclose(traj.t[-1], 100.0, rtol=1e-12)
    np.testing.assert_allclose(np.diff(traj.t), 0.01, rtol=1e-9)
    assert np.all(np.isfinite(traj.samples))


def test_determinism():
    p = ModelParams(d1=0.3, d2=0.01, delta1=0.05, delta2=0.9)
    a = integrate(p, SimConfig(seed=21))
    b = integrate(p, SimConfig(seed=21))
    assert np.array_equal(a.samples, b.samples)


def test_determinism_under_threads():
    p = ModelParams(d1=0.1, d2=0.2, delta1=0.3, delta2=0.4)
    cfg = SimConfig(seed=5, t_end=30)
    serial = [integrate(p, cfg, trial_streams(5, k)).samples for k in range(6)]
    with ThreadPoolExecutor(4) as ex:
        parallel = list(ex.map(lambda k: integrate(p, cfg, trial_streams(5, k)).samples, range(6)))
    for s, q in zip(serial, parallel):
        assert np.array_equal(s, q)


def test_exchange_symmetry_exact():
    p = ModelParams(lambda0=-0.3, d1=0.3, d2=0.01, delta1=0.05, delta2=0.9)
    cfg = SimConfig(seed=8, t_end=40)
    streams = trial_streams(8, 3)
    a = integrate(p, cfg, streams)
    b = integrate(p.swapped(), cfg, trial_streams(8, 3)[::-1])
    assert np.array_equal(a.swapped().samples, b.samples)


def test_noise_only_on_x():
    # starting at the origin with noise on x1 only, y1 moves only through the rotation
    p = ModelParams(delta1=1.0)
    cfg = SimConfig(dt=0.01, t_end=0.01, t_burn=0.0, ic_sigma=0.0)
    traj = integrate_from((0, 0, 0, 0), p, cfg, np.array([[1.0, 1.0]]))
    np.testing.assert_array_equal(traj.samples[1], [0.1, 0.0, 0.0, 0.0])


def test_damped_oscillation_without_noise():
    traj = integrate(ModelParams(lambda0=-0.5), SimConfig(seed=2))
    last = traj.t >= 90.0
    assert np.abs(traj.samples[last][:, [0, 2]]).max() < 1e-6


def test_linear_decay_matches_exponential():
    # explicit Euler adds about omega0^2 dt / 2 growth per unit time, so use a fine step
    cfg = SimConfig(dt=1e-3, t_end=5.0, t_burn=0.0, seed=3)
    traj = integrate(ModelParams(lambda0=-0.5), cfg)
    r = traj.amplitudes()[:, 0]
    keep = r < 0.05
    expect = r[0] * np.exp(-0.5 * traj.t)
    np.testing.assert_allclose(r[keep], expect[keep], rtol=0.02)


def test_limit_cycle_amplitude():
    cfg = SimConfig(dt=1e-3, t_end=100.0, t_burn=80.0, seed=1)
    r = integrate(ModelParams(lambda0=0.2), cfg).amplitudes()
    np.testing.assert_allclose(r[-1], R_STAR, rtol=0.01)


def test_halving_dt_changes_mean_amplitude_little():
    p = ModelParams(lambda0=0.2)
    a = integrate(p, SimConfig(dt=1e-3, seed=6)).amplitudes().mean()
    b = integrate(p, SimConfig(dt=5e-4, seed=6)).amplitudes().mean()
    assert abs(a - b) / b < 0.005


def test_blowup_raised():
    with pytest.raises(Blowup) as exc:
        integrate(ModelParams(lambda0=0.5, delta1=0.1), SimConfig(bound=0.05))
    assert exc.value.step > 0


def test_blowup_on_nonfinite():
    p = ModelParams(lambda0=0.5, alpha=0.5, gamma=0.5)  # subcritical growth without saturation
    with pytest.raises(Blowup):
        integrate(p, SimConfig(ic_sigma=1.0, bound=1e300))


def test_noise_shape_checked():
    with pytest.raises(ParameterError):
        integrate_from((0, 0, 0, 0), ModelParams(), SimConfig(), np.zeros((10, 2)))


def test_advance_deterministic_rk4_amplitude():
    state = np.array([0.5, 0.0, 0.5, 0.0])
    for _ in range(40):
        m1, m2 = advance_deterministic(state, ModelParams(lambda0=0.2), 5e-3, 2000, method="rk4")
    assert m1 == pytest.approx(R_STAR, rel=1e-6)
    assert m2 == pytest.approx(R_STAR, rel=1e-6)


def test_advance_deterministic_bad_method():
    with pytest.raises(ParameterError):
        advance_deterministic(np.zeros(4), ModelParams(), 0.01, 1, method="midpoint")
