"""Slate recommender with evolving user interests.

A fixed catalog of documents (topic, quality) is served two at a time.  The
user clicks via a multinomial logit over the slate plus a no-click option;
a click yields engagement (interest times quality) and pulls the interest
vector toward the clicked topic.  Reward mode "standard" pays the realized
engagement (zero on no-click); "expected" pays its analytic expectation
under the choice model, a deterministic function of state and slate.  The
transition draw is identical in both modes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..core import ProblemSpec
from .base import Environment

__all__ = [
    "RecommenderConfig",
    "Document",
    "build_catalog",
    "choice_probabilities",
    "expected_engagement",
    "RecommenderEnv",
]


@dataclass(frozen=True)
class RecommenderConfig:
    n_topics: int = 5
    n_docs: int = 20
    slate_size: int = 2
    horizon: int = 10
    affinity_weight: float = 4.0
    quality_weight: float = 1.0
    no_click_utility: float = 1.5
    shift_rate: float = 0.25
    catalog_seed: int = 7
    topic_quality_mean: tuple[float, ...] = (0.15, 0.2, 0.5, 0.85, 0.9)
    quality_spread: float = 0.08
    init_interest_lo: tuple[float, ...] = (0.55, 0.55, 0.15, 0.02, 0.02)
    init_interest_hi: tuple[float, ...] = (0.9, 0.9, 0.35, 0.15, 0.15)


@dataclass(frozen=True)
class Document:
    topic: int
    quality: float


def build_catalog(cfg: RecommenderConfig) -> tuple[Document, ...]:
    """Deterministic catalog: topics round-robin, qualities drawn around the
    per-topic mean from the catalog seed."""
    stream = np.random.Generator(np.random.PCG64(cfg.catalog_seed))
    docs = []
    for i in range(cfg.n_docs):
        topic = i % cfg.n_topics
        q = cfg.topic_quality_mean[topic] + stream.uniform(-cfg.quality_spread, cfg.quality_spread)
        docs.append(Document(topic=topic, quality=float(np.clip(q, 0.0, 1.0))))
    return tuple(docs)


def _utilities(cfg: RecommenderConfig, interest, slate_docs) -> list[float]:
    return [
        cfg.affinity_weight * interest[d.topic] + cfg.quality_weight * d.quality
        for d in slate_docs
    ]


def choice_probabilities(cfg: RecommenderConfig, interest, slate_docs) -> np.ndarray:
    """Click probabilities for each slate position plus the trailing
    no-click option; multinomial logit, sums to 1."""
    if len(slate_docs) != cfg.slate_size or len(set(id(d) for d in slate_docs)) != cfg.slate_size:
        raise ValueError("slate must hold exactly slate_size distinct documents")
    u = _utilities(cfg, interest, slate_docs) + [cfg.no_click_utility]
    z = np.exp(np.array(u) - max(u))
    return z / z.sum()


def engagement(interest, doc: Document) -> float:
    return float(interest[doc.topic] * doc.quality)


def expected_engagement(cfg: RecommenderConfig, interest, slate_docs) -> float:
    probs = choice_probabilities(cfg, interest, slate_docs)
    return float(sum(p * engagement(interest, d) for p, d in zip(probs[:-1], slate_docs)))


class RecommenderEnv(Environment):
    """State features: the interest vector plus normalized session step.
    Actions: every unordered document pair, featurized as the two documents'
    topic one-hots and qualities in index order."""

    def __init__(self, cfg: RecommenderConfig, reward_mode: str = "standard"):
        if reward_mode not in ("standard", "expected"):
            raise ValueError(f"unknown reward mode {reward_mode!r}")
        self.cfg = cfg
        self.reward_mode = reward_mode
        self.name = f"recommender-{reward_mode}"
        self.catalog = build_catalog(cfg)
        self.slates = tuple(itertools.combinations(range(cfg.n_docs), cfg.slate_size))
        feats = []
        for slate in self.slates:
            vec: list[float] = []
            for di in slate:
                onehot = [0.0] * cfg.n_topics
                onehot[self.catalog[di].topic] = 1.0
                vec.extend(onehot)
                vec.append(self.catalog[di].quality)
            feats.append(tuple(vec))
        T = cfg.horizon
        d_s = cfg.n_topics + 1
        d_a = cfg.slate_size * (cfg.n_topics + 1)
        self.problem = ProblemSpec(
            horizon=T,
            state_dims=(d_s,) * (T + 1),
            action_dims=(d_a,) * T,
            action_sets=(tuple(feats),) * T,
            reward_bound=1.0,
            mu=float(len(self.slates)),
        )

    def reset(self, stream):
        cfg = self.cfg
        lo = np.array(cfg.init_interest_lo)
        hi = np.array(cfg.init_interest_hi)
        return tuple(float(v) for v in stream.uniform(lo, hi))

    def featurize(self, t, state):
        return tuple(state) + ((t - 1) / self.cfg.horizon,)

    def step(self, t, state, action, stream):
        cfg = self.cfg
        slate = self.slates[action]
        docs = [self.catalog[i] for i in slate]
        probs = choice_probabilities(cfg, state, docs)
        exp_r = float(sum(p * engagement(state, d) for p, d in zip(probs[:-1], docs)))
        u = stream.random()
        choice = int(np.searchsorted(np.cumsum(probs), u, side="right"))
        choice = min(choice, len(probs) - 1)
        if choice < len(docs):
            clicked = docs[choice]
            realized = engagement(state, clicked)
            interest = list(state)
            for k in range(cfg.n_topics):
                target = 1.0 if k == clicked.topic else 0.0
                interest[k] = float(np.clip(interest[k] + cfg.shift_rate * (target - interest[k]), 0.0, 1.0))
            nxt = tuple(interest)
        else:
            realized = 0.0
            nxt = tuple(state)
        reward = exp_r if self.reward_mode == "expected" else realized
        info = {"expected": exp_r, "realized": realized, "clicked": choice < len(docs)}
        return nxt, reward, info

    def episode_score(self, rewards, infos) -> float:
        """Mean expected engagement per step: the same low-variance metric
        for every policy regardless of the training reward mode."""
        return float(sum(info["expected"] for info in infos) / len(infos))
