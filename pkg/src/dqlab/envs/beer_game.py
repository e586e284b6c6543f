"""Four-echelon beer game: retailer, warehouse, distributor, manufacturer.

Each period every echelon receives shipments, observes the order arriving
from downstream (customer demand at the retailer), fills what it can from
stock, backlogs the rest, and places a new order upstream.  The manufacturer
orders from an unconstrained source.  Inventory is tracked as a signed net
level (negative = backlog).  The learning agent is the retailer by default;
the other echelons follow base-stock rules.  Rewards are the agent's own
holding-plus-backlog cost (classical) or that plus a terminal correction
redistributing a share of the other echelons' episode costs (shaped).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..core import ProblemSpec
from .base import Environment

__all__ = [
    "BeerGameConfig",
    "BeerGameState",
    "beer_game_step",
    "beer_game_shaped_reward",
    "base_stock_level",
    "base_stock_order",
    "BeerGameEnv",
]

N_ECHELONS = 4


@dataclass(frozen=True)
class BeerGameConfig:
    horizon: int = 20
    demand_lo: int = 0
    demand_hi: int = 8
    # optional regime switch: from period demand_step_at on, demand draws
    # uniformly on [demand_lo2, demand_hi2] instead
    demand_step_at: int | None = None
    demand_lo2: int = 8
    demand_hi2: int = 16
    info_lead: int = 2
    ship_lead: int = 2
    holding_costs: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0)
    penalty_costs: tuple[float, ...] = (2.0, 2.0, 2.0, 2.0)
    # cost bracket: units are charged per started bracket of this size
    # (pallet/truck-style step charges); 1 recovers plain per-unit costs
    cost_bracket: int = 1
    action_offsets: tuple[int, ...] = (-2, -1, 0, 1, 2)
    init_inventory: tuple[int, ...] = (8, 8, 8, 8)
    agent: int = 0
    shaping_weights: tuple[float, ...] = (1 / 3, 1 / 3, 1 / 3)  # non-agent echelons
    reward_scale: float = 100.0
    # featurization: "history" feeds the last `history_window` periods of
    # (incoming order, order placed, arriving shipment) plus the net level;
    # "aggregate" feeds precomputed on-order and pipeline sums instead
    feature_mode: str = "history"
    history_window: int = 5
    # featurization caps (values are clipped into [0,1] after scaling)
    inv_cap: float = 50.0
    pipe_cap: float = 25.0
    on_order_cap: float = 60.0

    @property
    def mean_demand(self) -> float:
        return (self.demand_lo + self.demand_hi) / 2.0

    @property
    def total_lead(self) -> int:
        return self.info_lead + self.ship_lead


@dataclass(frozen=True)
class BeerGameState:
    """Immutable per-period snapshot of the whole chain."""

    inventory: tuple[int, ...]          # signed net level per echelon
    on_order: tuple[int, ...]           # placed but not yet received
    ship_pipes: tuple[tuple[int, ...], ...]   # inbound shipments per echelon
    info_pipes: tuple[tuple[int, ...], ...]   # inbound orders, echelons 1..3
    production_pipe: tuple[int, ...]    # manufacturer orders at the source
    last_order: tuple[int, ...]         # most recent order seen from downstream
    cost_accum: tuple[float, ...]       # per-echelon episode cost so far (raw)
    agent_history: tuple[tuple[int, int, int], ...]  # (incoming, placed, arrived)
    period: int                         # 1-based index of the next period


def initial_state(cfg: BeerGameConfig) -> BeerGameState:
    prime = int(round(cfg.mean_demand))
    ship = tuple(tuple([prime] * cfg.ship_lead) for _ in range(N_ECHELONS))
    info = tuple(tuple([prime] * cfg.info_lead) for _ in range(N_ECHELONS))
    on_order = tuple(prime * (cfg.ship_lead + cfg.info_lead) for _ in range(N_ECHELONS))
    history = tuple((prime, prime, prime) for _ in range(cfg.history_window))
    return BeerGameState(
        inventory=tuple(cfg.init_inventory),
        on_order=on_order,
        ship_pipes=ship,
        info_pipes=info,
        production_pipe=tuple([prime] * cfg.info_lead),
        last_order=tuple([prime] * N_ECHELONS),
        cost_accum=(0.0,) * N_ECHELONS,
        agent_history=history,
        period=1,
    )


def beer_game_step(
    state: BeerGameState, orders: tuple[int, ...], demand: int, cfg: BeerGameConfig
) -> tuple[BeerGameState, tuple[float, ...], tuple[float, ...]]:
    """One period of the chain dynamics with explicit per-echelon orders.

    Returns (next state, per-echelon classical rewards, per-echelon costs).
    Classical reward of echelon i is -(c_h * max(IL,0) + c_p * max(-IL,0)),
    unscaled.  Material balance per echelon: IL' = IL + arrival - incoming
    order, and the shipment downstream is min(stock on hand, backlog + order).
    """
    if any(o < 0 for o in orders):
        raise ValueError("orders must be nonnegative")
    inv = list(state.inventory)
    on_order = list(state.on_order)
    ship_pipes = [list(p) for p in state.ship_pipes]
    info_pipes = [list(p) for p in state.info_pipes]
    production = list(state.production_pipe)

    arrivals = [p.pop(0) for p in ship_pipes]
    incoming = [demand] + [info_pipes[i].pop(0) for i in range(1, N_ECHELONS)]
    source_due = production.pop(0)

    shipments = [0] * N_ECHELONS
    for i in range(N_ECHELONS):
        stock = max(inv[i], 0) + arrivals[i]
        owed = max(-inv[i], 0) + incoming[i]
        shipments[i] = min(stock, owed)
        inv[i] = inv[i] + arrivals[i] - incoming[i]
        on_order[i] -= arrivals[i]

    # shipments move downstream; the unconstrained source always fills
    for i in range(N_ECHELONS - 1):
        ship_pipes[i].append(shipments[i + 1])
    ship_pipes[N_ECHELONS - 1].append(source_due)

    for i in range(N_ECHELONS):
        o = orders[i]
        on_order[i] += o
        if i < N_ECHELONS - 1:
            info_pipes[i + 1].append(o)
        else:
            production.append(o)

    q = cfg.cost_bracket
    costs = tuple(
        cfg.holding_costs[i] * q * -(-max(inv[i], 0) // q)
        + cfg.penalty_costs[i] * q * -(-max(-inv[i], 0) // q)
        for i in range(N_ECHELONS)
    )
    rewards = tuple(-c for c in costs)
    a = cfg.agent
    history = state.agent_history[1:] + ((incoming[a], orders[a], arrivals[a]),)
    nxt = BeerGameState(
        inventory=tuple(inv),
        on_order=tuple(on_order),
        ship_pipes=tuple(tuple(p) for p in ship_pipes),
        info_pipes=tuple(tuple(p) for p in info_pipes),
        production_pipe=tuple(production),
        last_order=tuple(incoming),
        cost_accum=tuple(a_ + c for a_, c in zip(state.cost_accum, costs)),
        agent_history=history,
        period=state.period + 1,
    )
    return nxt, rewards, costs


def beer_game_shaped_reward(
    costs_trace: list[tuple[float, ...]],
    agent: int,
    weights: tuple[float, ...],
    horizon: int,
    reward_scale: float = 1.0,
) -> list[float]:
    """Shaped per-period rewards from a complete episode cost trace.

    Each period pays the agent's own classical reward; the final period adds
    a correction redistributing weights[k] of the k-th other echelon's
    accumulated cost, so the episode sum equals the weighted system cost
    (negated).  Zero weights reproduce the classical rewards exactly.
    """
    if len(costs_trace) < horizon:
        raise ValueError("episode trace shorter than the horizon")
    others = [i for i in range(N_ECHELONS) if i != agent]
    if len(weights) != len(others):
        raise ValueError("one shaping weight per non-agent echelon")
    shaped = [-row[agent] / reward_scale for row in costs_trace[:horizon]]
    correction = sum(
        w * sum(row[i] for row in costs_trace[:horizon]) for w, i in zip(weights, others)
    )
    shaped[horizon - 1] -= correction / reward_scale
    return shaped


def demand_pmf(cfg: BeerGameConfig) -> np.ndarray:
    n = cfg.demand_hi - cfg.demand_lo + 1
    pmf = np.zeros(cfg.demand_hi + 1)
    pmf[cfg.demand_lo:] = 1.0 / n
    return pmf


def base_stock_level(cfg: BeerGameConfig, echelon: int) -> int:
    """Newsvendor order-up-to level: the smallest y whose cumulative
    (lead + 1)-period demand probability reaches c_p / (c_p + c_h)."""
    fractile = cfg.penalty_costs[echelon] / (cfg.penalty_costs[echelon] + cfg.holding_costs[echelon])
    pmf = demand_pmf(cfg)
    conv = pmf.copy()
    for _ in range(cfg.total_lead):
        conv = np.convolve(conv, pmf)
    cdf = np.cumsum(conv)
    return int(np.searchsorted(cdf, fractile - 1e-12, side="left"))


def base_stock_order(inventory_position: int, level: int) -> int:
    """Order-up-to rule: order the shortfall, never negative."""
    return max(0, level - inventory_position)


class BeerGameEnv(Environment):
    """Single-agent view of the chain.

    The agent picks an offset x and orders max(0, observed order + x); the
    other echelons play base-stock.  reward_mode selects classical or shaped
    agent rewards (both scaled by cfg.reward_scale); episode_score is the
    raw total system cost, which is the quantity the studies track.
    """

    def __init__(self, cfg: BeerGameConfig, reward_mode: str = "shaped"):
        if reward_mode not in ("classical", "shaped"):
            raise ValueError(f"unknown reward mode {reward_mode!r}")
        self.cfg = cfg
        self.reward_mode = reward_mode
        self.name = f"beer-game-{reward_mode}"
        self.levels = tuple(base_stock_level(cfg, i) for i in range(N_ECHELONS))
        T = cfg.horizon
        if cfg.feature_mode == "history":
            n_feat = 2 + 3 * cfg.history_window + 1
        elif cfg.feature_mode == "aggregate":
            n_feat = 3 + cfg.ship_lead + 2
        else:
            raise ValueError(f"unknown feature mode {cfg.feature_mode!r}")
        offs = cfg.action_offsets
        span = max(offs) - min(offs)
        acts = tuple(((o - min(offs)) / span if span else 0.5,) for o in offs)
        self.problem = ProblemSpec(
            horizon=T,
            state_dims=(n_feat,) * (T + 1),
            action_dims=(1,) * T,
            action_sets=(acts,) * T,
            reward_bound=self._reward_bound(),
            mu=float(len(offs)),
        )

    def _reward_bound(self) -> float:
        cfg = self.cfg
        max_order = cfg.demand_hi + max(cfg.action_offsets)
        prime = int(round(cfg.mean_demand)) * (cfg.ship_lead + cfg.info_lead)
        level_cap = max(
            max(base_stock_level(cfg, i) for i in range(N_ECHELONS)),
            max_order,
        )
        pos_cap = max(cfg.init_inventory) + prime + cfg.horizon * max(max_order, level_cap)
        neg_cap = cfg.horizon * max(cfg.demand_hi, max_order, level_cap)
        per_period = max(max(cfg.holding_costs), max(cfg.penalty_costs)) * (pos_cap + neg_cap)
        total = per_period * (1.0 + cfg.horizon * max(sum(cfg.shaping_weights), 1.0))
        return total / cfg.reward_scale

    def reset(self, stream):
        return initial_state(self.cfg)

    def featurize(self, t, state: BeerGameState) -> tuple[float, ...]:
        cfg = self.cfg
        a = cfg.agent
        inv = state.inventory[a]

        def clip01(x):
            return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)

        feats = [
            clip01(max(inv, 0) / cfg.inv_cap),
            clip01(max(-inv, 0) / cfg.inv_cap),
        ]
        if cfg.feature_mode == "history":
            flow_cap = float(cfg.demand_hi + max(cfg.action_offsets))
            for incoming, placed, arrived in state.agent_history:
                feats.append(clip01(incoming / max(cfg.demand_hi, 1)))
                feats.append(clip01(placed / flow_cap))
                feats.append(clip01(arrived / flow_cap))
        else:
            feats.append(clip01(state.on_order[a] / cfg.on_order_cap))
            feats.extend(clip01(v / cfg.pipe_cap) for v in state.ship_pipes[a])
            feats.append(clip01(state.last_order[a] / max(cfg.demand_hi, 1)))
        feats.append(clip01((t - 1) / cfg.horizon))
        return tuple(feats)

    def _orders(self, state: BeerGameState, agent_offset: int) -> tuple[int, ...]:
        cfg = self.cfg
        orders = []
        for i in range(N_ECHELONS):
            if i == cfg.agent:
                orders.append(max(0, state.last_order[i] + agent_offset))
            else:
                ip = state.inventory[i] + state.on_order[i]
                orders.append(base_stock_order(ip, self.levels[i]))
        return tuple(orders)

    def step(self, t, state: BeerGameState, action, stream):
        cfg = self.cfg
        if cfg.demand_step_at is not None and t >= cfg.demand_step_at:
            demand = int(stream.integers(cfg.demand_lo2, cfg.demand_hi2 + 1))
        else:
            demand = int(stream.integers(cfg.demand_lo, cfg.demand_hi + 1))
        offset = cfg.action_offsets[action]
        orders = self._orders(state, offset)
        nxt, rewards, costs = beer_game_step(state, orders, demand, cfg)
        r = rewards[cfg.agent] / cfg.reward_scale
        if self.reward_mode == "shaped" and t == cfg.horizon:
            others = [nxt.cost_accum[i] for i in range(N_ECHELONS) if i != cfg.agent]
            r -= sum(w * c for w, c in zip(cfg.shaping_weights, others)) / cfg.reward_scale
        return nxt, r, {"costs": costs, "demand": demand, "orders": orders}

    def episode_score(self, rewards, infos) -> float:
        return float(sum(sum(info["costs"]) for info in infos))

    def baseline_cost(self, n_episodes: int, stream) -> float:
        """Mean episode system cost when every echelon, including the agent's
        slot, plays base-stock (the study baseline)."""
        cfg = self.cfg
        total = 0.0
        for _ in range(n_episodes):
            state = initial_state(cfg)
            for _t in range(cfg.horizon):
                t = _t + 1
                if cfg.demand_step_at is not None and t >= cfg.demand_step_at:
                    demand = int(stream.integers(cfg.demand_lo2, cfg.demand_hi2 + 1))
                else:
                    demand = int(stream.integers(cfg.demand_lo, cfg.demand_hi + 1))
                orders = []
                for i in range(N_ECHELONS):
                    ip = state.inventory[i] + state.on_order[i]
                    orders.append(base_stock_order(ip, self.levels[i]))
                state, _, costs = beer_game_step(state, tuple(orders), demand, cfg)
                total += sum(costs)
        return total / n_episodes

