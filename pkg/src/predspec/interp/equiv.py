"""Answer-set comparison between a program and its transformed version."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from predspec.ast import Goal, Program
from predspec.errors import (
    Floundering, HasFunctions, NotStratified, ResourceExhausted,
    TypeCheckError, UnboundPredicateCall,
)
from predspec.interp.bottomup import solve_bottom_up
from predspec.interp.topdown import AnswerSet, EngineLimits, solve_topdown


@dataclass(frozen=True)
class Verdict:
    result: str  # "equal", "differs" or "inconclusive"
    steps_lhs: int = 0
    steps_rhs: int = 0
    witness: Optional[tuple] = None  # (side, binding) present on one side only
    reason: Optional[str] = None
    engines: tuple = ()

    def record(self) -> str:
        return f"result={self.result} steps_lhs={self.steps_lhs} steps_rhs={self.steps_rhs}"

    def describe(self) -> str:
        line = self.record()
        if self.witness is not None:
            side, binding = self.witness
            shown = ", ".join(f"{k}={v}" for k, v in binding) or "yes"
            line += f" witness={side}:{shown}"
        if self.reason:
            line += f" reason={self.reason}"
        return line


def solve(program: Program, goal: Goal, limits: EngineLimits = EngineLimits(), occurs_check=False,
          engine="auto"):
    """Answers of ``goal``, bottom-up when the program allows it; returns (answers, engine)."""
    if engine in ("auto", "bottomup"):
        try:
            return solve_bottom_up(program, goal), "bottomup"
        except (HasFunctions, NotStratified, TypeCheckError):
            if engine == "bottomup":
                raise
    return solve_topdown(program, goal, limits, occurs_check), "topdown"


def _bindings(ans: AnswerSet):
    return {tuple(sorted(zip(ans.vars, row))) for row in ans.rows}


def compare_answers(lhs: AnswerSet, rhs: AnswerSet, engines=()) -> Verdict:
    a, b = _bindings(lhs), _bindings(rhs)
    if a == b:
        return Verdict("equal", lhs.steps, rhs.steps, engines=engines)
    if a - b:
        witness = ("lhs", min(a - b))
    else:
        witness = ("rhs", min(b - a))
    return Verdict("differs", lhs.steps, rhs.steps, witness, engines=engines)


def check_equivalence(p1: Program, g1: Goal, p2: Program, g2: Goal,
                      limits: EngineLimits = EngineLimits(), occurs_check=False) -> Verdict:
    """Compare the answers of two (program, goal) pairs.

    Goal variables are matched by name, which the renaming and the baseline
    encoding both preserve.
    """
    try:
        lhs, e1 = solve(p1, g1, limits, occurs_check)
        rhs, e2 = solve(p2, g2, limits, occurs_check)
        # a non-ground top-down answer stands for all its instances, while
        # bottom-up lists instances over the active domain: compare like with like
        if e1 != e2 and not (lhs.ground and rhs.ground):
            if e1 == "bottomup":
                lhs, e1 = solve(p1, g1, limits, occurs_check, engine="topdown")
            else:
                rhs, e2 = solve(p2, g2, limits, occurs_check, engine="topdown")
    except (ResourceExhausted, Floundering, UnboundPredicateCall) as exc:
        return Verdict("inconclusive", reason=f"{type(exc).__name__}: {exc}")
    return compare_answers(lhs, rhs, (e1, e2))
