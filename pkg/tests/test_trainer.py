"""Training loop determinism, checkpoint round-trips, and resume equivalence."""

from dataclasses import replace

import numpy as np
import pytest

from metis.errors import CheckpointError, IncompatiblePolicy, TrainingDiverged
from metis.nets import NetworkConfig, PolicyValueNet
from metis.ppo import Adam
from metis.rewards import POTENTIAL, CurriculumState, RewardConfig
from metis.trainer import (
    TrainerConfig,
    TrainerState,
    init_trainer,
    load_checkpoint,
    metrics_record,
    policy_from_checkpoint,
    random_policy,
    save_checkpoint,
    train,
)
from metis.world import Scenario, load_sample

SMALL_NET = NetworkConfig(input_dim=70, hidden_width=32, hidden_depth=2)


def tiny_cfg(total_steps=384, seed=3):
    return TrainerConfig(rollout_horizon=16, minibatch_size=32,
                         num_parallel_agents=4, total_steps=total_steps,
                         seed=seed)


def tiny_state(scenario, cfg, reward=None):
    return init_trainer(scenario, reward or RewardConfig(shaping_mode=POTENTIAL),
                        cfg, net_cfg=SMALL_NET)


def run_training(scenario, cfg, state=None):
    reward = RewardConfig(shaping_mode=POTENTIAL)
    if state is None:
        state = tiny_state(scenario, cfg, reward)
    return train(scenario, reward, cfg, state=state)


def test_training_is_deterministic_per_seed():
    s = load_sample("small_room")
    state_a, metrics_a = run_training(s, tiny_cfg(seed=3))
    state_b, metrics_b = run_training(s, tiny_cfg(seed=3))
    assert metrics_a == metrics_b
    np.testing.assert_array_equal(state_a.params, state_b.params)

    _, metrics_c = run_training(s, tiny_cfg(seed=4))
    assert metrics_a != metrics_c


def test_metrics_stream_shape():
    s = load_sample("small_room")
    state, metrics = run_training(s, tiny_cfg())
    assert len(metrics) == 6  # 384 steps / (16 horizon * 4 agents)
    assert state.global_step == 384
    for rec in metrics:
        assert set(rec) == {"step", "mean_return_20", "unlocked_areas",
                            "policy_loss", "value_loss", "entropy"}
        assert rec["unlocked_areas"] == 1
        assert np.isfinite(rec["policy_loss"])
    assert metrics[0]["step"] == 64
    # not enough finished episodes yet for the rolling window
    assert metrics[0]["mean_return_20"] is None


def test_on_metrics_callback_sees_every_record():
    s = load_sample("small_room")
    seen = []
    reward = RewardConfig(shaping_mode=POTENTIAL)
    state = tiny_state(s, tiny_cfg(), reward)
    _, metrics = train(s, reward, tiny_cfg(), state=state,
                       on_metrics=seen.append)
    assert seen == metrics


def test_checkpoint_save_load_save_is_byte_identical():
    s = load_sample("small_room")
    state, _ = run_training(s, tiny_cfg())
    data = save_checkpoint(state)
    loaded = load_checkpoint(data)
    assert save_checkpoint(loaded) == data
    np.testing.assert_array_equal(loaded.params, state.params)
    np.testing.assert_array_equal(loaded.adam.m, state.adam.m)
    np.testing.assert_array_equal(loaded.adam.v, state.adam.v)
    assert loaded.adam.step == state.adam.step
    assert loaded.global_step == state.global_step
    assert loaded.recent_returns == state.recent_returns
    assert loaded.curriculum == state.curriculum
    assert loaded.agent_snapshot == state.agent_snapshot
    # the restored rng continues the same stream
    assert loaded.rng.random() == state.rng.random()


def test_fresh_state_checkpoint_round_trip():
    s = load_sample("small_room")
    state = tiny_state(s, tiny_cfg())
    data = save_checkpoint(state)
    loaded = load_checkpoint(data)
    assert loaded.adam.m is None  # untrained: moments stay lazily unset
    assert save_checkpoint(loaded) == data


def test_checkpoint_rejects_corruption():
    s = load_sample("small_room")
    data = save_checkpoint(tiny_state(s, tiny_cfg()))
    with pytest.raises(CheckpointError):
        load_checkpoint(data[:5])
    with pytest.raises(CheckpointError):
        load_checkpoint(data[:len(data) // 2])
    with pytest.raises(CheckpointError):
        load_checkpoint(b"NOTAMAGIC" + data[9:])
    bad_version = bytearray(data)
    bad_version[9:13] = (99).to_bytes(4, "little")
    with pytest.raises(CheckpointError):
        load_checkpoint(bytes(bad_version))


def test_checkpoint_f32_block_alone_still_loads():
    s = load_sample("small_room")
    state, _ = run_training(s, tiny_cfg())
    data = save_checkpoint(state)
    n = len(state.params)
    marker_at = len(data) - (3 * 8 * n + 4)
    assert data[marker_at:marker_at + 4] == b"F64X"
    loaded = load_checkpoint(data[:marker_at])
    # single precision: close but not exact
    np.testing.assert_allclose(loaded.params, state.params, atol=1e-5)
    assert not np.array_equal(loaded.params, state.params)


def test_resume_reproduces_uninterrupted_metrics():
    s = load_sample("small_room")
    _, full = run_training(s, tiny_cfg(total_steps=384))

    state, first = run_training(s, tiny_cfg(total_steps=192))
    blob = save_checkpoint(state)
    resumed = load_checkpoint(blob)
    resumed.trainer_config = replace(resumed.trainer_config, total_steps=384)
    resumed, second = train(s, resumed.reward_config, resumed.trainer_config,
                            state=resumed)
    assert first + second == full
    fresh, _ = run_training(s, tiny_cfg(total_steps=384))
    np.testing.assert_array_equal(resumed.params, fresh.params)


def test_divergence_raises_with_context():
    s = load_sample("small_room")
    state = tiny_state(s, tiny_cfg())
    state.params[:] = np.nan
    with pytest.raises(TrainingDiverged) as info:
        train(s, state.reward_config, state.trainer_config, state=state)
    assert info.value.last_good_checkpoint is None


def test_train_rejects_invalid_scenario():
    with pytest.raises(ValueError):
        train(Scenario(), RewardConfig(), tiny_cfg())
    s = load_sample("small_room")
    s.spawn_areas = []
    with pytest.raises(ValueError):
        train(s, RewardConfig(), tiny_cfg())


def test_trainer_config_validation():
    with pytest.raises(ValueError):
        TrainerConfig(gamma=0.0)
    with pytest.raises(ValueError):
        TrainerConfig(learning_rate=-1.0)
    with pytest.raises(ValueError):
        TrainerConfig(clip_epsilon=1.5)


def test_metrics_record_window_gate():
    s = load_sample("small_room")
    state = tiny_state(s, tiny_cfg())
    stats = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0}
    assert metrics_record(state, stats)["mean_return_20"] is None
    state.recent_returns = [0.5] * 19
    assert metrics_record(state, stats)["mean_return_20"] is None
    state.recent_returns = [0.5] * 20
    assert metrics_record(state, stats)["mean_return_20"] == pytest.approx(0.5)


def test_policy_from_checkpoint_checks_input_width():
    wrong = TrainerState(
        net_config=NetworkConfig(input_dim=5, hidden_width=8, hidden_depth=1,
                                 branch_sizes=(2,)),
        trainer_config=TrainerConfig(),
        reward_config=RewardConfig(),
        params=PolicyValueNet(NetworkConfig(input_dim=5, hidden_width=8,
                                            hidden_depth=1, branch_sizes=(2,)))
        .init_params(np.random.default_rng(0)),
        adam=Adam(learning_rate=0.001),
        curriculum=CurriculumState(area_count=1),
        rng=np.random.default_rng(0),
    )
    data = save_checkpoint(wrong)
    load_checkpoint(data)  # loading itself is fine
    with pytest.raises(IncompatiblePolicy):
        policy_from_checkpoint(data)


def test_policy_from_checkpoint_acts():
    s = load_sample("small_room")
    state, _ = run_training(s, tiny_cfg())
    policy = policy_from_checkpoint(save_checkpoint(state))
    actions = policy.act_batch(np.zeros((3, 70)))
    assert actions.shape == (3, 2)
    assert set(actions.ravel()) <= {0, 1}


def test_random_policy_is_seed_stable():
    a = random_policy(7)
    b = random_policy(7)
    np.testing.assert_array_equal(a.params, b.params)
    c = random_policy(8)
    assert not np.array_equal(a.params, c.params)
    acts = a.act_batch(np.zeros((2, 70)))
    np.testing.assert_array_equal(acts, b.act_batch(np.zeros((2, 70))))
