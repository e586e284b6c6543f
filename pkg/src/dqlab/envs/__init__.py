from .base import (
    Environment,
    EpsGreedyBehavior,
    RewardBoundExceeded,
    UniformBehavior,
    generate_dataset,
    rollout,
)
from .beer_game import (
    BeerGameConfig,
    BeerGameEnv,
    BeerGameState,
    base_stock_level,
    base_stock_order,
    beer_game_shaped_reward,
    beer_game_step,
)
from .recommender import (
    RecommenderConfig,
    RecommenderEnv,
    build_catalog,
    choice_probabilities,
    expected_engagement,
)
from .synthetic import (
    PiecewiseEnv,
    PiecewiseMdp,
    TabularEnv,
    TabularMdp,
    benchmark_mdp,
    rollout_batch_tabular,
)

__all__ = [
    "Environment",
    "EpsGreedyBehavior",
    "RewardBoundExceeded",
    "UniformBehavior",
    "generate_dataset",
    "rollout",
    "BeerGameConfig",
    "BeerGameEnv",
    "BeerGameState",
    "base_stock_level",
    "base_stock_order",
    "beer_game_shaped_reward",
    "beer_game_step",
    "RecommenderConfig",
    "RecommenderEnv",
    "build_catalog",
    "choice_probabilities",
    "expected_engagement",
    "PiecewiseEnv",
    "PiecewiseMdp",
    "TabularEnv",
    "TabularMdp",
    "benchmark_mdp",
    "rollout_batch_tabular",
]
