"""Club strength ratings and the models built on them.

Elo ratings and UEFA club coefficients, logistic models comparing their
predictive power, a league-phase draw and a Monte Carlo league simulator.
"""

from .coefficient import club_coefficient, load_rulebook
from .elo import EloParams, expected_score, rate_history, snapshot_at, update
from .glm import DesignMatrix, fit_logistic, fit_multinomial
from .simulate import OutcomeModel, outcome_probs, simulate_league
from .swiss_draw import DrawInput, draw, validate

__version__ = "0.1.0"

__all__ = [
    "DesignMatrix",
    "DrawInput",
    "EloParams",
    "OutcomeModel",
    "club_coefficient",
    "draw",
    "expected_score",
    "fit_logistic",
    "fit_multinomial",
    "load_rulebook",
    "outcome_probs",
    "rate_history",
    "simulate_league",
    "snapshot_at",
    "update",
    "validate",
]
