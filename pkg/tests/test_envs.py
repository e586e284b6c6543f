import numpy as np
import pytest

from dqlab.approx import CubicPartition, random_constant_spec
from dqlab.core import RngContract
from dqlab.envs import (
    BeerGameConfig,
    BeerGameEnv,
    PiecewiseEnv,
    PiecewiseMdp,
    RecommenderConfig,
    RecommenderEnv,
    RewardBoundExceeded,
    TabularEnv,
    UniformBehavior,
    base_stock_level,
    base_stock_order,
    beer_game_shaped_reward,
    beer_game_step,
    benchmark_mdp,
    build_catalog,
    choice_probabilities,
    expected_engagement,
    generate_dataset,
    rollout,
)
from dqlab.envs.beer_game import initial_state
from dqlab.envs.recommender import engagement


def quiet_state(cfg, inventory):
    """A chain state with empty pipelines and no on-order stock."""
    base = initial_state(cfg)
    z = (0,) * cfg.ship_lead
    zi = (0,) * cfg.info_lead
    return base.__class__(
        inventory=tuple(inventory),
        on_order=(0, 0, 0, 0),
        ship_pipes=(z, z, z, z),
        info_pipes=(zi, zi, zi, zi),
        production_pipe=zi,
        last_order=(0, 0, 0, 0),
        cost_accum=(0.0,) * 4,
        agent_history=((0, 0, 0),) * cfg.history_window,
        period=1,
    )


class TestBeerGameStep:
    cfg = BeerGameConfig(holding_costs=(1.0,) * 4, penalty_costs=(2.0,) * 4)

    def test_holding_case(self):
        state = quiet_state(self.cfg, (10, 0, 0, 0))
        nxt, rewards, costs = beer_game_step(state, (0, 0, 0, 0), demand=3, cfg=self.cfg)
        assert nxt.inventory[0] == 7
        assert rewards[0] == -7.0

    def test_backlog_case(self):
        state = quiet_state(self.cfg, (1, 0, 0, 0))
        nxt, rewards, _ = beer_game_step(state, (0, 0, 0, 0), demand=4, cfg=self.cfg)
        assert nxt.inventory[0] == -3
        assert rewards[0] == -6.0

    def test_fixed_point(self):
        state = quiet_state(self.cfg, (0, 0, 0, 0))
        nxt, rewards, _ = beer_game_step(state, (0, 0, 0, 0), demand=0, cfg=self.cfg)
        assert nxt.inventory == state.inventory
        assert nxt.ship_pipes == state.ship_pipes
        assert nxt.on_order == state.on_order
        assert all(r == 0.0 for r in rewards)

    def test_negative_orders_rejected(self):
        state = quiet_state(self.cfg, (0, 0, 0, 0))
        with pytest.raises(ValueError):
            beer_game_step(state, (-1, 0, 0, 0), demand=0, cfg=self.cfg)

    def test_material_balance_random_episode(self):
        cfg = self.cfg
        stream = RngContract(4).stream("bg")
        state = initial_state(cfg)
        for _ in range(40):
            demand = int(stream.integers(0, 9))
            orders = tuple(int(o) for o in stream.integers(0, 12, size=4))
            before = state
            state, _, _ = beer_game_step(state, orders, demand, cfg)
            arrivals = [p[0] for p in before.ship_pipes]
            incoming = [demand] + [before.info_pipes[i][0] for i in range(1, 4)]
            for i in range(4):
                # net level moves exactly by arrivals minus incoming orders
                assert state.inventory[i] == before.inventory[i] + arrivals[i] - incoming[i]
                assert len(state.ship_pipes[i]) == cfg.ship_lead
            for i in range(1, 4):
                assert len(state.info_pipes[i]) == cfg.info_lead


class TestShapedReward:
    def test_zero_weight_is_classical(self):
        trace = [(3.0, 1.0, 2.0, 4.0), (1.0, 0.0, 5.0, 2.0)]
        shaped = beer_game_shaped_reward(trace, agent=0, weights=(0.0, 0.0, 0.0), horizon=2)
        assert shaped == [-3.0, -1.0]

    def test_full_weight_zero_other_costs(self):
        trace = [(3.0, 0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0)]
        shaped = beer_game_shaped_reward(trace, agent=0, weights=(1.0, 1.0, 1.0), horizon=2)
        assert shaped == [-3.0, -1.0]

    def test_toy_redistribution(self):
        # agent cost 3 total, others total 9, weight 1/3 each: correction -3
        trace = [(1.0, 2.0, 1.0, 1.0), (2.0, 2.0, 2.0, 1.0)]
        shaped = beer_game_shaped_reward(trace, agent=0, weights=(1 / 3,) * 3, horizon=2)
        assert shaped[0] == -1.0
        assert shaped[1] == pytest.approx(-2.0 - 3.0)
        # episode sum equals the weighted system cost, negated
        assert sum(shaped) == pytest.approx(-(3.0 + 9.0 / 3.0))

    def test_short_trace_rejected(self):
        with pytest.raises(ValueError):
            beer_game_shaped_reward([(1.0,) * 4], agent=0, weights=(1 / 3,) * 3, horizon=2)

    def test_env_agrees_with_batch_formula(self):
        cfg = BeerGameConfig(horizon=6)
        env = BeerGameEnv(cfg, reward_mode="shaped")
        stream = RngContract(9).stream("ep")
        _, _, rewards, infos = rollout(env, UniformBehavior(), stream)
        trace = [info["costs"] for info in infos]
        want = beer_game_shaped_reward(
            trace, cfg.agent, cfg.shaping_weights, cfg.horizon, cfg.reward_scale
        )
        assert np.allclose(rewards, want)

    def test_weight_zero_reproduces_classical_bitexact(self):
        cfg0 = BeerGameConfig(horizon=5, shaping_weights=(0.0, 0.0, 0.0))
        env_shaped = BeerGameEnv(cfg0, reward_mode="shaped")
        env_classic = BeerGameEnv(BeerGameConfig(horizon=5), reward_mode="classical")
        s1 = RngContract(3).stream("ep")
        s2 = RngContract(3).stream("ep")
        _, a1, r1, _ = rollout(env_shaped, UniformBehavior(), s1)
        _, a2, r2, _ = rollout(env_classic, UniformBehavior(), s2)
        assert a1 == a2
        assert r1 == r2


class TestBaseStock:
    def test_deterministic_demand_level(self):
        cfg = BeerGameConfig(demand_lo=4, demand_hi=4, info_lead=1, ship_lead=2)
        # lead 3 plus the review period: S* = 4 * 4
        assert base_stock_level(cfg, 0) == 16

    def test_order_capped_at_zero(self):
        assert base_stock_order(inventory_position=30, level=20) == 0
        assert base_stock_order(inventory_position=12, level=20) == 8

    def test_extreme_penalty_pushes_to_upper_end(self):
        cfg = BeerGameConfig(penalty_costs=(1e8,) * 4, holding_costs=(1.0,) * 4)
        lvl = base_stock_level(cfg, 0)
        assert lvl == (cfg.total_lead + 1) * cfg.demand_hi
        mild = BeerGameConfig(penalty_costs=(2.0,) * 4, holding_costs=(1.0,) * 4)
        assert base_stock_level(mild, 0) < lvl

    def test_zero_shortage_steady_state_deterministic(self):
        cfg = BeerGameConfig(demand_lo=4, demand_hi=4)
        env = BeerGameEnv(cfg)
        stream = RngContract(0).stream("bs")
        state = initial_state(cfg)
        shortages = []
        for _ in range(30):
            orders = tuple(
                base_stock_order(state.inventory[i] + state.on_order[i], env.levels[i])
                for i in range(4)
            )
            state, _, _ = beer_game_step(state, orders, 4, cfg)
            shortages.append(min(state.inventory))
        # after the pipeline settles there is no backlog anywhere
        assert all(s >= 0 for s in shortages[8:])

    def test_baseline_cost_reasonable(self):
        cfg = BeerGameConfig()
        env = BeerGameEnv(cfg)
        cost = env.baseline_cost(20, RngContract(1).stream("base"))
        assert 0 < cost < 5000


class TestBeerGameEnv:
    def test_rollout_shapes_and_bounds(self):
        env = BeerGameEnv(BeerGameConfig(horizon=8))
        ds = generate_dataset(env, UniformBehavior(), 3, seed=5)
        assert len(ds) == 3
        for tr in ds.trajectories:
            assert len(tr.states) == 9
            assert all(0.0 <= c <= 1.0 for s in tr.states for c in s)

    def test_replay_reproduces(self):
        env = BeerGameEnv(BeerGameConfig(horizon=8))
        a = rollout(env, UniformBehavior(), RngContract(7).stream("x"))
        b = rollout(env, UniformBehavior(), RngContract(7).stream("x"))
        assert a[0] == b[0] and a[1] == b[1] and a[2] == b[2]


class TestRecommender:
    cfg = RecommenderConfig()

    def test_catalog_fixed(self):
        assert build_catalog(self.cfg) == build_catalog(self.cfg)

    def test_probabilities_sum_to_one(self):
        docs = build_catalog(self.cfg)[:2]
        interest = (0.5, 0.2, 0.1, 0.9, 0.3)
        p = choice_probabilities(self.cfg, interest, docs)
        assert abs(p.sum() - 1.0) < 1e-12

    def test_identical_docs_symmetric(self):
        docs = build_catalog(self.cfg)
        same_topic = [d for d in docs if d.topic == 0][:2]
        # force equal utility by equalizing quality
        d1 = same_topic[0]
        d2 = same_topic[0].__class__(topic=d1.topic, quality=d1.quality)
        interest = (0.4, 0.1, 0.1, 0.1, 0.1)
        p = choice_probabilities(self.cfg, interest, [d1, d2])
        assert p[0] == pytest.approx(p[1])

    def test_malformed_slate_rejected(self):
        docs = build_catalog(self.cfg)
        with pytest.raises(ValueError):
            choice_probabilities(self.cfg, (0.5,) * 5, [docs[0]])
        with pytest.raises(ValueError):
            choice_probabilities(self.cfg, (0.5,) * 5, [docs[0], docs[0]])

    def test_expected_matches_monte_carlo(self):
        env = RecommenderEnv(self.cfg, reward_mode="standard")
        stream = RngContract(11).stream("mc")
        interest = (0.7, 0.6, 0.2, 0.1, 0.1)
        action = 17
        want = expected_engagement(self.cfg, interest, [env.catalog[i] for i in env.slates[action]])
        n = 100_000
        draws = np.empty(n)
        for i in range(n):
            _, r, _ = env.step(1, interest, action, stream)
            draws[i] = r
        se = draws.std(ddof=1) / np.sqrt(n)
        assert abs(draws.mean() - want) <= 3 * se

    def test_no_click_margin_tail(self):
        cfg = RecommenderConfig(affinity_weight=0.0, quality_weight=0.0, no_click_utility=7.0)
        docs = [build_catalog(cfg)[0], build_catalog(cfg)[1]]
        interest = (0.0,) * 5
        p = choice_probabilities(cfg, interest, docs)
        assert p[:-1].sum() < 1e-3 + 2e-3  # click mass ~ 2 e^{-7}
        assert expected_engagement(cfg, interest, docs) < 1e-3

    def test_interest_stays_in_box_and_shifts_toward_topic(self):
        env = RecommenderEnv(self.cfg, reward_mode="standard")
        stream = RngContract(13).stream("ep")
        state = env.reset(stream)
        for t in range(1, self.cfg.horizon + 1):
            action = int(stream.integers(0, len(env.slates)))
            prev = state
            state, _, info = env.step(t, state, action, stream)
            assert all(0.0 <= v <= 1.0 for v in state)
            if info["clicked"]:
                # exactly one coordinate moved up (the clicked topic), unless
                # it was already at its shifted value
                ups = [k for k in range(5) if state[k] > prev[k] + 1e-12]
                assert len(ups) <= 1

    def test_env_replay_deterministic(self):
        env = RecommenderEnv(self.cfg, reward_mode="expected")
        a = rollout(env, UniformBehavior(), RngContract(3).stream("r"))
        b = rollout(env, UniformBehavior(), RngContract(3).stream("r"))
        assert a[:3] == b[:3]


class TestPiecewiseEnv:
    def test_single_stage_conditional_mean_recovers_spec(self):
        part = CubicPartition(2, 2)
        stream = RngContract(17).stream("spec")
        specs = tuple(random_constant_spec(part, 3, 1.0, stream) for _ in range(2))
        mdp = PiecewiseMdp(horizon=1, reward_specs=(specs,), reward_noise=0.1)
        env = PiecewiseEnv(mdp)
        ds = generate_dataset(env, UniformBehavior(), 20_000, seed=23)
        states = np.array([tr.states[0] for tr in ds.trajectories])
        acts = np.array([tr.actions[0][0] for tr in ds.trajectories])
        rews = np.array([tr.rewards[0] for tr in ds.trajectories])
        cubes = part.cube_of(states)
        for a_idx, spec in enumerate(specs):
            a_val = (a_idx + 0.5) / 2
            for cube in range(part.n_cubes):
                sel = (cubes == cube) & (np.abs(acts - a_val) < 1e-9)
                if sel.sum() < 200:
                    continue
                want = spec.evaluate(np.array([part.center(cube)]))[0]
                assert abs(rews[sel].mean() - want) < 0.05

    def test_designated_transition_family(self):
        part = CubicPartition(1, 4)
        spec = random_constant_spec(part, 2, 1.0, RngContract(1).stream("s"))
        mdp = PiecewiseMdp(
            horizon=2,
            reward_specs=((spec,), (spec,)),
            target_cubes={(1, c, 0): (3,) for c in range(4)},
        )
        env = PiecewiseEnv(mdp)
        stream = RngContract(2).stream("roll")
        for _ in range(20):
            s = env.reset(stream)
            s2, _, _ = env.step(1, s, 0, stream)
            assert 0.75 <= s2[0] <= 1.0


class TestDatasetGeneration:
    def test_m_zero_rejected(self):
        env = TabularEnv(benchmark_mdp())
        with pytest.raises(ValueError):
            generate_dataset(env, UniformBehavior(), 0, seed=0)

    def test_m_one(self):
        env = TabularEnv(benchmark_mdp())
        ds = generate_dataset(env, UniformBehavior(), 1, seed=0)
        assert len(ds) == 1
        assert len(ds.trajectories[0].rewards) == 3

    def test_reward_bound_violation_aborts(self):
        class BadEnv(TabularEnv):
            def step(self, t, state, action, stream):
                s, _, info = super().step(t, state, action, stream)
                return s, 99.0, info

        env = BadEnv(benchmark_mdp())
        with pytest.raises(RewardBoundExceeded):
            generate_dataset(env, UniformBehavior(), 2, seed=0)
