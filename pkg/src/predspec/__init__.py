"""Predicate specialization of definitional higher-order logic programs.

Turns higher-order programs (predicates as arguments, calls through
predicate variables) into first-order Prolog by specializing predicates to
their predicate arguments.
"""

__version__ = "0.1.0"

from predspec.ast import (  # noqa: E402
    App, Clause, Const, Eq, FunApp, Goal, Literal, Pred, Program, Substitution, Var,
    apply_subst, canonicalize_atom, classify_type, vars_of,
)
from predspec.parser import load_program, parse_program, parse_query, typecheck_program  # noqa: E402
from predspec.analysis import (  # noqa: E402
    build_dependency_graph, check_definitional, check_extended_fragment, check_h_fragment,
)
from predspec.specializer import (  # noqa: E402
    abstract, eliminate_partial_apps, firstify, rename, specialize, unfold,
)
from predspec.emitter import defunctionalize_reynolds, emit_hl, emit_prolog  # noqa: E402
