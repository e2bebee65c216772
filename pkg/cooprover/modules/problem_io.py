"""
Reading and writing CNF problem files.

Grammar (one statement per form, whitespace insignificant, `%` comments):

    cnf(<name>, <role>, ( <lit> ( '|' <lit> )* )).

with role one of axiom, hypothesis, negated_conjecture; a literal is
`[~] atom`, an atom `p`, `p(t, ...)`, `s = t` or `s != t`. Identifiers
start lowercase, variables uppercase. `$false` denotes the empty clause.
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

from cooprover.modules.kernel import (
    EQUALITY,
    ROLE_AXIOM,
    ROLE_DERIVED,
    ROLE_GOAL,
    App,
    ArityError,
    Clause,
    Literal,
    ParseError,
    Symbol,
    Term,
    Var,
)

ROLES = {
    "axiom": ROLE_AXIOM,
    "hypothesis": ROLE_AXIOM,
    "negated_conjecture": ROLE_GOAL,
}

TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<comment>%[^\n]*)"
    r"|(?P<false>\$false)"
    r"|(?P<ident>[a-z][A-Za-z0-9_]*)"
    r"|(?P<var>[A-Z][A-Za-z0-9_]*)"
    r"|(?P<int>[0-9]+)"
    r"|(?P<neq>!=)"
    r"|(?P<punct>[(),|~.=])"
)


class Mode(str, Enum):
    CTC = "ctc"
    CTC_NEG = "ctcneg"


@dataclass(frozen=True)
class Problem:
    clauses: tuple = ()
    name: str = field(default="", compare=False)

    @property
    def has_equality(self) -> bool:
        return any(lit.is_equality for c in self.clauses for lit in c)

    @property
    def is_horn(self) -> bool:
        return all(c.is_horn for c in self.clauses)

    def functions(self) -> dict[str, int]:
        """Function symbols in order of first appearance."""
        found: dict[str, int] = {}

        def visit(t: Term):
            if isinstance(t, App):
                found.setdefault(t.symbol, len(t.args))
                for a in t.args:
                    visit(a)

        for clause in self.clauses:
            for lit in clause:
                for a in lit.args:
                    visit(a)
        return found

    def predicates(self) -> dict[str, int]:
        found: dict[str, int] = {}
        for clause in self.clauses:
            for lit in clause:
                found.setdefault(lit.predicate, len(lit.args))
        return found

    @property
    def signature(self) -> frozenset:
        return frozenset(
            [Symbol(n, a, "function") for n, a in self.functions().items()]
            + [Symbol(n, a, "predicate") for n, a in self.predicates().items()]
        )

    def extend(
        self, clauses: Iterable[Clause], role: str = ROLE_AXIOM
    ) -> "Problem":
        """Append clauses, numbering them after the existing ones."""
        next_id = max((c.id for c in self.clauses), default=0) + 1
        added = []
        for offset, clause in enumerate(clauses):
            added.append(
                clause.with_id(next_id + offset, role or clause.role)
            )
        return Problem(self.clauses + tuple(added), self.name)


class _Parser(object):
    def __init__(self, text: str):
        self.tokens = list(self._tokenize(text))
        self.pos = 0
        self.pending: list[tuple[str, int, int, int]] = []
        self.arities: dict[tuple[str, str], tuple[int, int, int]] = {
            (EQUALITY, "predicate"): (2, 0, 0)
        }

    @staticmethod
    def _tokenize(text: str):
        line, line_start, idx = 1, 0, 0
        while idx < len(text):
            m = TOKEN.match(text, idx)
            if m is None:
                raise ParseError(
                    line, idx - line_start + 1, f"unexpected character {text[idx]!r}"
                )
            kind = m.lastgroup
            value = m.group()
            if kind not in ("ws", "comment"):
                yield kind, value, line, idx - line_start + 1
            newlines = value.count("\n")
            if newlines:
                line += newlines
                line_start = idx + value.rfind("\n") + 1
            idx = m.end()
        yield "eof", "", line, idx - line_start + 1

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, value: str):
        kind, got, line, col = self.advance()
        if got != value:
            shown = got or "end of input"
            raise ParseError(line, col, f"expected '{value}', found '{shown}'")

    def _check_arity(self, name, kind, arity, line, col):
        seen = self.arities.get((name, kind))
        if seen is None:
            self.arities[(name, kind)] = (arity, line, col)
        elif seen[0] != arity:
            raise ArityError(line, col, name, seen[0], arity)

    def problem(self) -> list[Clause]:
        clauses = []
        while self.peek()[0] != "eof":
            clauses.append(self.statement(len(clauses) + 1))
        return clauses

    def statement(self, idx: int) -> Clause:
        kind, value, line, col = self.advance()
        if value != "cnf":
            raise ParseError(line, col, f"expected 'cnf', found '{value}'")
        self.expect("(")
        kind, name, line, col = self.advance()
        if kind not in ("ident", "var", "int"):
            raise ParseError(line, col, f"invalid statement name '{name}'")
        self.expect(",")
        kind, role, line, col = self.advance()
        if role not in ROLES:
            raise ParseError(line, col, f"unknown role '{role}'")
        self.expect(",")
        self.expect("(")
        literals = self.disjunction()
        self.expect(")")
        self.expect(")")
        self.expect(".")
        return Clause(tuple(literals), id=idx, role=ROLES[role], name=name)

    def disjunction(self) -> list[Literal]:
        if self.peek()[0] == "false":
            self.advance()
            return []
        literals = [self.literal()]
        while self.peek()[1] == "|":
            self.advance()
            literals.append(self.literal())
        return literals

    def literal(self) -> Literal:
        positive = True
        if self.peek()[1] == "~":
            self.advance()
            positive = False
        _, _, line, col = self.peek()
        # symbols are checked once we know whether the head is a predicate
        self.pending = []
        left = self.term()
        op = self.peek()[1]
        if op in ("=", "!="):
            self.advance()
            right = self.term()
            if op == "!=":
                positive = not positive
            self._register_functions(self.pending)
            return Literal(positive, EQUALITY, (left, right))
        if isinstance(left, Var):
            raise ParseError(line, col, f"variable '{left}' used as an atom")
        head = self.pending.pop()
        self._check_arity(head[0], "predicate", head[1], head[2], head[3])
        self._register_functions(self.pending)
        return Literal(positive, left.symbol, left.args)

    def _register_functions(self, entries):
        for name, arity, line, col in entries:
            self._check_arity(name, "function", arity, line, col)

    def term(self) -> Term:
        kind, value, line, col = self.advance()
        if kind == "var":
            return Var(value)
        if kind != "ident":
            shown = value or "end of input"
            raise ParseError(line, col, f"expected a term, found '{shown}'")
        args: list[Term] = []
        if self.peek()[1] == "(":
            self.advance()
            args.append(self.term())
            while self.peek()[1] == ",":
                self.advance()
                args.append(self.term())
            self.expect(")")
        self.pending.append((value, len(args), line, col))
        return App(value, tuple(args))


def parse_problem(text: str, name: str = "") -> Problem:
    """
    Parse problem text. Raises ParseError (or its subclass ArityError)
    pointing into the source on malformed input.
    """
    return Problem(tuple(_Parser(text).problem()), name)


def read_problem(path: Path) -> Problem:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        return parse_problem(f.read(), path.stem)


def _role_name(clause: Clause) -> str:
    return "negated_conjecture" if clause.role == ROLE_GOAL else "axiom"


def serialize_clause(clause: Clause, name: str | None = None) -> str:
    name = name or clause.name or f"c{clause.id}"
    return f"cnf({name},{_role_name(clause)},({clause}))."


def serialize(problem: Problem) -> str:
    lines = [serialize_clause(c) for c in problem.clauses]
    return "\n".join(lines) + "\n" if lines else ""


def _eq(s: Term, t: Term, positive: bool = True) -> Literal:
    return Literal(positive, EQUALITY, (s, t))


def equality_axioms(problem: Problem) -> list[Clause]:
    x, y, z = Var("X"), Var("Y"), Var("Z")
    axioms = [
        Clause((_eq(x, x),), role=ROLE_AXIOM, name="eq_reflexivity"),
        Clause(
            (_eq(x, y, False), _eq(y, x)), role=ROLE_AXIOM, name="eq_symmetry"
        ),
        Clause(
            (_eq(x, y, False), _eq(y, z, False), _eq(x, z)),
            role=ROLE_AXIOM,
            name="eq_transitivity",
        ),
    ]
    for symbol, arity in problem.functions().items():
        for pos in range(arity):
            left = [Var(f"A{j}") for j in range(arity)]
            right = list(left)
            left[pos], right[pos] = x, y
            axioms.append(
                Clause(
                    (
                        _eq(x, y, False),
                        _eq(App(symbol, tuple(left)), App(symbol, tuple(right))),
                    ),
                    role=ROLE_AXIOM,
                    name=f"eq_subst_{symbol}_{pos + 1}",
                )
            )
    for symbol, arity in problem.predicates().items():
        if symbol == EQUALITY:
            continue
        for pos in range(arity):
            left = [Var(f"A{j}") for j in range(arity)]
            right = list(left)
            left[pos], right[pos] = x, y
            axioms.append(
                Clause(
                    (
                        _eq(x, y, False),
                        Literal(False, symbol, tuple(left)),
                        Literal(True, symbol, tuple(right)),
                    ),
                    role=ROLE_AXIOM,
                    name=f"eq_subst_{symbol}_{pos + 1}",
                )
            )
    return axioms


def add_equality_axioms(problem: Problem) -> Problem:
    """
    Append reflexivity, symmetry, transitivity and one substitution axiom
    per argument position of every function and predicate symbol.
    No-op for problems without equality.
    """
    if not problem.has_equality:
        return problem
    return problem.extend(equality_axioms(problem), ROLE_AXIOM)


def goal_clauses(problem: Problem, mode: Mode) -> list[Clause]:
    """
    Start clauses: everything under CTC, all-negative and goal-role
    clauses under CTC_neg. May be empty; callers report that.
    """
    if Mode(mode) == Mode.CTC:
        return list(problem.clauses)
    return [
        c for c in problem.clauses if c.is_negative or c.role == ROLE_GOAL
    ]


__all__ = [
    "Mode",
    "Problem",
    "ParseError",
    "ArityError",
    "ROLE_DERIVED",
    "parse_problem",
    "read_problem",
    "serialize",
    "serialize_clause",
    "equality_axioms",
    "add_equality_axioms",
    "goal_clauses",
]
