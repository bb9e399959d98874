import math

import numpy as np
import pytest

from gazesim.gimbal import (GazeState, GimbalConfig, NUM_ACTIONS, STAY_ACTION,
                            action_direction, random_init, step_gaze, teleport)


def test_stay_action_is_zero():
    assert action_direction(STAY_ACTION, GimbalConfig()) == (0.0, 0.0)


def test_action_zero_is_pure_east():
    assert action_direction(0, GimbalConfig()) == (1.0, 0.0)


def test_diagonal_normalization():
    daz, del_ = action_direction(1, GimbalConfig(diagonal_normalized=True))
    assert daz == pytest.approx(0.7071, abs=1e-4)
    assert del_ == pytest.approx(0.7071, abs=1e-4)
    daz, del_ = action_direction(1, GimbalConfig(diagonal_normalized=False))
    assert (daz, del_) == (1.0, 1.0)


def test_compass_covers_eight_directions():
    cfg = GimbalConfig(diagonal_normalized=False)
    dirs = {action_direction(a, cfg) for a in range(8)}
    assert len(dirs) == 8


def test_out_of_range_action_rejected():
    with pytest.raises(ValueError):
        action_direction(9, GimbalConfig())
    with pytest.raises(ValueError):
        action_direction(-1, GimbalConfig())


def test_stay_from_rest_leaves_state_unchanged():
    cfg = GimbalConfig()
    s = GazeState(0.2, -0.1)
    for _ in range(5):
        s = step_gaze(s, STAY_ACTION, cfg)
    assert s.azimuth == pytest.approx(0.2) and s.elevation == pytest.approx(-0.1)


def test_unsmoothed_east_step():
    cfg = GimbalConfig(step_size=0.05, smoothing_alpha=1.0)
    s = step_gaze(GazeState(), 0, cfg)
    assert s.azimuth == pytest.approx(0.05) and s.elevation == 0.0


def test_elevation_saturates_at_limit():
    cfg = GimbalConfig(step_size=0.05, smoothing_alpha=0.5)
    s = GazeState()
    for _ in range(100):
        s = step_gaze(s, 2, cfg)  # pure up
    assert s.elevation == pytest.approx(cfg.elev_limit)


def test_cardinal_displacement_equals_step_size():
    cfg = GimbalConfig(step_size=0.03, smoothing_alpha=1.0)
    for action in (0, 2, 4, 6):
        s0 = GazeState(0.1, 0.0)
        s1 = step_gaze(s0, action, cfg)
        disp = math.hypot(s1.azimuth - s0.azimuth, s1.elevation - s0.elevation)
        assert disp == pytest.approx(cfg.step_size)


def test_azimuth_wraps_across_pi():
    cfg = GimbalConfig(step_size=0.1, smoothing_alpha=1.0)
    s = step_gaze(GazeState(azimuth=math.pi - 0.02), 0, cfg)
    assert s.azimuth == pytest.approx(-math.pi + 0.08)
    assert -math.pi < s.azimuth <= math.pi


def test_elevation_never_escapes_limit_fuzz():
    cfg = GimbalConfig(step_size=0.08, smoothing_alpha=0.7,
                       elev_limit=math.radians(45))
    rng = np.random.default_rng(0)
    for _ in range(200):
        s = GazeState(elevation=rng.uniform(-cfg.elev_limit, cfg.elev_limit))
        for a in rng.integers(0, NUM_ACTIONS, 500):
            s = step_gaze(s, int(a), cfg)
            assert -cfg.elev_limit <= s.elevation <= cfg.elev_limit
            assert -math.pi < s.azimuth <= math.pi


def test_random_init_ranges():
    for seed in range(200):
        s = random_init(np.random.default_rng(seed))
        assert -math.pi / 2 <= s.azimuth <= math.pi / 2
        assert abs(s.elevation) <= 0.2618  # 15 degrees
        assert s.smoothed_velocity == (0.0, 0.0)


def test_random_init_reproducible():
    a = random_init(np.random.default_rng(123))
    b = random_init(np.random.default_rng(123))
    assert a == b


def test_teleport_clamps_and_zeroes_velocity():
    cfg = GimbalConfig(elev_limit=math.radians(30))
    s = GazeState(0.0, 0.0, (0.5, 0.5))
    t = teleport(s, 4.0, 1.0, cfg)
    assert -math.pi < t.azimuth <= math.pi
    assert t.elevation == pytest.approx(cfg.elev_limit)
    assert t.smoothed_velocity == (0.0, 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        GimbalConfig(step_size=0.0)
    with pytest.raises(ValueError):
        GimbalConfig(smoothing_alpha=0.0)
    with pytest.raises(ValueError):
        GimbalConfig(elev_limit=2.0)
