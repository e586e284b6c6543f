import numpy as np
import pytest

from dqlab.core import (
    Dataset,
    ProblemSpec,
    Provenance,
    RngContract,
    Trajectory,
    derive_stream,
    load_dataset,
    save_dataset,
    validate_trajectory,
)
from dqlab.envs import TabularEnv, UniformBehavior, benchmark_mdp, generate_dataset


def toy_spec(T=2, U=1.0):
    acts = (((0.25,), (0.75,)),) * T
    return ProblemSpec(
        horizon=T,
        state_dims=(1,) * (T + 1),
        action_dims=(1,) * T,
        action_sets=acts,
        reward_bound=U,
        mu=2.0,
    )


class TestValidateTrajectory:
    def test_well_formed_accepts(self):
        spec = toy_spec()
        traj = Trajectory(
            states=((0.1,), (0.2,), (0.3,)),
            actions=((0.25,), (0.75,)),
            rewards=(0.5, -0.5),
        )
        assert validate_trajectory(traj, spec).ok

    def test_reward_bound_violation(self):
        spec = toy_spec(U=1.0)
        traj = Trajectory(
            states=((0.1,), (0.2,), (0.3,)),
            actions=((0.25,), (0.75,)),
            rewards=(2.0, 0.0),
        )
        res = validate_trajectory(traj, spec)
        assert not res.ok
        assert res.reason == "reward bound violated"

    def test_length_mismatch(self):
        spec = toy_spec(T=2)
        traj = Trajectory(states=((0.1,), (0.2,)), actions=((0.25,), (0.75,)), rewards=(0.0, 0.0))
        res = validate_trajectory(traj, spec)
        assert not res.ok
        assert res.reason == "length mismatch"

    def test_state_out_of_box(self):
        spec = toy_spec()
        traj = Trajectory(
            states=((1.5,), (0.2,), (0.3,)),
            actions=((0.25,), (0.75,)),
            rewards=(0.0, 0.0),
        )
        res = validate_trajectory(traj, spec)
        assert not res.ok
        assert "outside [0,1]" in res.reason


class TestStreams:
    def test_same_triple_same_draws(self):
        a = derive_stream(RngContract(7), "rollout", 0).random(100)
        b = derive_stream(RngContract(7), "rollout", 0).random(100)
        assert np.array_equal(a, b)

    def test_different_index_differs(self):
        a = derive_stream(RngContract(7), "rollout", 0).random()
        b = derive_stream(RngContract(7), "rollout", 1).random()
        assert a != b

    def test_different_seed_differs(self):
        a = derive_stream(RngContract(7), "rollout", 0).random()
        b = derive_stream(RngContract(8), "rollout", 0).random()
        assert a != b

    def test_different_label_differs(self):
        a = derive_stream(RngContract(7), "rollout", 0).random()
        b = derive_stream(RngContract(7), "train", 0).random()
        assert a != b


class TestDatasetRoundTrip:
    def test_bit_identical(self, tmp_path):
        env = TabularEnv(benchmark_mdp())
        ds = generate_dataset(env, UniformBehavior(), 25, seed=11)
        path = tmp_path / "ds.jsonl"
        save_dataset(ds, path)
        back = load_dataset(path)
        assert back == ds
        # and a second save produces identical bytes
        path2 = tmp_path / "ds2.jsonl"
        save_dataset(back, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_header_validation(self, tmp_path):
        p = tmp_path / "bad.jsonl"
        p.write_text('{"kind": "something-else"}\n')
        with pytest.raises(ValueError):
            load_dataset(p)


def test_uniform_behavior_frequencies():
    # at m = 10,000 every action's empirical frequency per stage stays
    # within 0.02 of the 1/mu uniform share
    env = TabularEnv(benchmark_mdp())
    ds = generate_dataset(env, UniformBehavior(), 10_000, seed=3)
    mu = env.problem.mu
    T = env.problem.horizon
    acts = env.problem.action_sets[0]
    for t in range(T):
        chosen = [tr.actions[t] for tr in ds.trajectories]
        for a in acts:
            freq = sum(1 for c in chosen if c == a) / len(chosen)
            assert freq >= 1.0 / mu - 0.02


def test_problem_spec_validation():
    with pytest.raises(ValueError):
        ProblemSpec(0, (1,), (), (), 1.0, 1.0)
    with pytest.raises(ValueError):
        toy = toy_spec()
        ProblemSpec(
            horizon=toy.horizon,
            state_dims=toy.state_dims,
            action_dims=toy.action_dims,
            action_sets=(((1.5,), (0.5,)),) * 2,
            reward_bound=1.0,
            mu=2.0,
        )
