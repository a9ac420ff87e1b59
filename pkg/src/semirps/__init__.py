"""Semi-restricted Rock-Paper-Scissors: exact values, simulation and limit laws."""

from semirps.engine import GameState, Move, Transcript, payoff, play_round, run_game
from semirps.limit_law import LimitRep, constants
from semirps.montecarlo import ExperimentConfig, SummaryStats, run_experiment
from semirps.solver import compute_value_table, greedy_chain_expectation, optimal_value
from semirps.strategies import STRATEGIES, Observation, StageMix, get_strategy

__all__ = [
    "ExperimentConfig",
    "GameState",
    "LimitRep",
    "Move",
    "Observation",
    "STRATEGIES",
    "StageMix",
    "SummaryStats",
    "Transcript",
    "compute_value_table",
    "constants",
    "get_strategy",
    "greedy_chain_expectation",
    "optimal_value",
    "payoff",
    "play_round",
    "run_experiment",
    "run_game",
]
