"""
학습 루프 테스트 (비트 동일성, 재생 버퍼 감사, 타깃 동기화, 발산 보고)
"""
import numpy as np
import pytest

from app.agent.networks import build_network
from app.agent.params import ParamVector
from app.core.exceptions import ContractViolation
from app.dto.approx import MLPSpec
from app.dto.envs import EnvSpec
from app.dto.trainer import AgentVariant
from app.services.env_service import RIGHT, get_env
from app.services.trainer_service import greedy_policy_of, sync_target, train_run, train_tabular_run
from app.services.value_iteration import greedy_policy, value_iteration


def _trajectory(env, variant, frames, seed, **kwargs):
    """프레임별 (behavior_q, 온라인 파라미터) 기록"""
    records = []

    def hook(frame, transition, online, target):
        records.append((transition.behavior_q, online.values.copy()))

    result = train_run(env, variant, frames, seed, hook=hook, **kwargs)
    return result, records


class TestTrainRun:
    def test_rejects_zero_frames(self, chain5, fast_config):
        with pytest.raises(ContractViolation):
            train_run(chain5, AgentVariant(base="dqn", config=fast_config), 0, seed=0)

    @pytest.mark.parametrize("base", ["dqn", "ddqn", "duel"])
    def test_delta_zero_matches_plain(self, chain5, fast_config, base):
        config = fast_config.model_copy(update={"delta": 0.0})
        with_h, records_h = _trajectory(chain5, AgentVariant(base=base, hindsight=True, config=config), 1000, 3)
        without, records = _trajectory(chain5, AgentVariant(base=base, hindsight=False, config=config), 1000, 3)
        assert len(records_h) == len(records) == 1000
        for (bq_h, theta_h), (bq, theta) in zip(records_h, records):
            assert bq_h == bq
            assert np.array_equal(theta_h, theta)
        assert np.array_equal(with_h.params.values, without.params.values)

    def test_lr_half_is_half_step(self, chain5, fast_config):
        half = AgentVariant(
            base="dqn", hindsight=False,
            config=fast_config.model_copy(update={"delta": 1.0, "lr_half_mode": True}),
        )
        plain = AgentVariant(
            base="dqn", hindsight=False,
            config=fast_config.model_copy(update={"delta": 0.0, "alpha": fast_config.alpha / 2}),
        )
        a = train_run(chain5, half, 1000, seed=1)
        b = train_run(chain5, plain, 1000, seed=1)
        assert np.array_equal(a.params.values, b.params.values)

    def test_stored_q_is_acting_q(self, chain5, fast_config):
        network = build_network("dqn", chain5.obs_dim, chain5.n_actions, [])
        mismatches = []

        def hook(frame, transition, online, target):
            q = network.q_values(online, np.array(transition.state))[transition.action]
            if q != transition.behavior_q:
                mismatches.append(frame)

        train_run(chain5, AgentVariant(base="dqn", config=fast_config), 800, seed=2, hook=hook)
        assert mismatches == []

    def test_target_constant_between_syncs(self, chain5, fast_config):
        period = fast_config.target_sync_period
        targets = {}

        def hook(frame, transition, online, target):
            targets.setdefault(frame // period, []).append(target.values.copy())

        result = train_run(chain5, AgentVariant(base="ddqn", config=fast_config), 400, seed=4, hook=hook)
        for snapshots in targets.values():
            assert all(np.array_equal(snapshots[0], s) for s in snapshots)
        assert not np.array_equal(targets[0][0], targets[7][0])
        assert result.diagnostics.target_syncs == 400 // period

    def test_deterministic_for_seed(self, chain5, fast_config):
        variant = AgentVariant(base="duel", config=fast_config)
        a = train_run(chain5, variant, 300, seed=9, eval_interval=100, eval_episodes=2)
        b = train_run(chain5, variant, 300, seed=9, eval_interval=100, eval_episodes=2)
        assert np.array_equal(a.params.values, b.params.values)
        assert a.episodes == b.episodes
        assert a.evals == b.evals

    def test_seeds_differ(self, chain5, fast_config):
        variant = AgentVariant(base="dqn", config=fast_config)
        a = train_run(chain5, variant, 200, seed=0)
        b = train_run(chain5, variant, 200, seed=1)
        assert not np.array_equal(a.params.values, b.params.values)

    def test_evaluation_schedule(self, chain5, fast_config):
        variant = AgentVariant(base="dqn", config=fast_config)
        result = train_run(chain5, variant, 250, seed=0, eval_interval=100, eval_episodes=1)
        assert [e.frame for e in result.evals] == [100, 200, 250]
        assert result.diagnostics.status == "completed"
        assert result.diagnostics.frames_run == 250

    def test_episode_bookkeeping(self, chain5, fast_config):
        result = train_run(chain5, AgentVariant(base="dqn", config=fast_config), 600, seed=0)
        assert [e.episode for e in result.episodes] == list(range(len(result.episodes)))
        frames = [e.frame_index for e in result.episodes]
        assert frames == sorted(frames)
        assert all(1 <= e.steps <= chain5.max_episode_steps for e in result.episodes)

    def test_updates_start_when_buffer_holds_a_batch(self, chain5, fast_config):
        result = train_run(chain5, AgentVariant(base="dqn", config=fast_config), 100, seed=0)
        assert result.diagnostics.updates == 100 - fast_config.batch_size + 1

    def test_divergence_is_reported(self, chain5, fast_config):
        config = fast_config.model_copy(update={"q_ceiling": 1e-6})
        result = train_run(chain5, AgentVariant(base="dqn", config=config), 100, seed=0)
        diagnostics = result.diagnostics
        assert diagnostics.status == "diverged"
        assert diagnostics.diverged_frame is not None
        assert diagnostics.frames_run == diagnostics.diverged_frame
        assert diagnostics.reason


class TestSyncTarget:
    def test_copies_values(self, rng):
        spec = MLPSpec(layer_widths=[2, 3])
        online = ParamVector(spec, rng.normal(size=spec.param_count))
        target = ParamVector(spec)
        sync_target(online, target)
        assert np.array_equal(online.values, target.values)
        online.values[0] += 1.0
        assert not np.array_equal(online.values, target.values)

    def test_layout_mismatch(self):
        with pytest.raises(ContractViolation):
            sync_target(ParamVector(MLPSpec(layer_widths=[2, 3])), ParamVector(MLPSpec(layer_widths=[3, 2])))


class TestTabularRun:
    @pytest.mark.parametrize("hindsight", [True, False])
    def test_learns_chain_policy(self, chain5, fast_config, hindsight):
        result = train_tabular_run(chain5, fast_config, 5_000, seed=0, hindsight=hindsight)
        q_star = value_iteration(chain5.mdp)
        np.testing.assert_array_equal(greedy_policy(result.params)[:4], [RIGHT] * 4)
        np.testing.assert_allclose(result.params[:4].max(axis=1), q_star[:4].max(axis=1), atol=0.05)

    def test_delta_zero_matches_watkins(self, chain5, fast_config):
        config = fast_config.model_copy(update={"delta": 0.0})
        a = train_tabular_run(chain5, config, 1_000, seed=5, hindsight=True)
        b = train_tabular_run(chain5, config, 1_000, seed=5, hindsight=False)
        assert np.array_equal(a.params, b.params)


@pytest.mark.slow
@pytest.mark.parametrize("delta", [0.0, 1.0])
def test_chain_policy_matches_oracle(fast_config, delta):
    env = get_env(EnvSpec(kind="chain", n_states=10, max_episode_steps=200), gamma=0.9)
    config = fast_config.model_copy(update={
        "delta": delta, "batch_size": 32, "target_sync_period": 100, "epsilon_decay_steps": 10_000,
    })
    oracle = greedy_policy(value_iteration(env.mdp))[:9]
    matches = 0
    for seed in range(5):
        result = train_run(env, AgentVariant(base="dqn", config=config), 50_000, seed, eval_episodes=1)
        network = build_network("dqn", env.obs_dim, env.n_actions, [])
        if np.array_equal(greedy_policy_of(network, result.params, env)[:9], oracle):
            matches += 1
    assert matches >= 4
