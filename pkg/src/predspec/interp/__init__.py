"""Reference engines: top-down SLD-NF and stratified bottom-up evaluation."""

from predspec.interp.topdown import AnswerSet, EngineLimits, TopDownEngine, solve_topdown
from predspec.interp.bottomup import Model, eval_bottom_up, query_model, solve_bottom_up, strata
from predspec.interp.equiv import Verdict, check_equivalence, compare_answers, solve

__all__ = [
    "AnswerSet", "EngineLimits", "TopDownEngine", "solve_topdown",
    "Model", "eval_bottom_up", "query_model", "solve_bottom_up", "strata",
    "Verdict", "check_equivalence", "compare_answers", "solve",
]
