"""
Logical kernel: terms, literals, clauses, substitutions, unification,
matching, subsumption and syntactic measures.

All values are immutable. Substitutions are plain dicts keyed by variable
name; the only mutable helpers are the trail-based `unify_into` used by the
engines for cheap backtracking and the `VariantIndex` used for duplicate
detection.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property, singledispatch
from itertools import count
from typing import Iterable, Iterator, Union

EQUALITY = "="

ROLE_AXIOM = "axiom"
ROLE_GOAL = "goal"
ROLE_DERIVED = "derived"

_FRESH = count(1)


class CooproverError(Exception):
    """Base class for all errors raised by cooprover."""


class ParseError(CooproverError):
    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


class ArityError(ParseError):
    def __init__(self, line: int, column: int, symbol: str, seen: int, got: int):
        self.symbol = symbol
        super().__init__(
            line,
            column,
            f"symbol '{symbol}' used with arity {got}, "
            f"previously with arity {seen}",
        )


class ConfigError(CooproverError):
    """Unknown configuration key or invalid value."""


class OracleBudgetExceeded(CooproverError):
    """The proof length oracle ran out of search nodes."""


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    kind: str  # "function" or "predicate"


@dataclass(frozen=True)
class Var:
    name: str

    @cached_property
    def key(self) -> tuple:
        return (0, self.name)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple = ()

    @cached_property
    def key(self) -> tuple:
        return (1, self.symbol, len(self.args), tuple(a.key for a in self.args))

    def __str__(self) -> str:
        if not self.args:
            return self.symbol
        return f"{self.symbol}({','.join(str(a) for a in self.args)})"


Term = Union[Var, App]
Substitution = dict[str, Term]


@dataclass(frozen=True)
class Literal:
    positive: bool
    predicate: str
    args: tuple = ()

    @cached_property
    def key(self) -> tuple:
        return (
            int(self.positive),
            self.predicate,
            len(self.args),
            tuple(a.key for a in self.args),
        )

    @property
    def is_equality(self) -> bool:
        return self.predicate == EQUALITY

    @property
    def atom(self) -> App:
        return App(self.predicate, self.args)

    def complement(self) -> "Literal":
        return Literal(not self.positive, self.predicate, self.args)

    def __str__(self) -> str:
        if self.is_equality:
            op = "=" if self.positive else "!="
            return f"{self.args[0]} {op} {self.args[1]}"
        atom = str(self.atom)
        return atom if self.positive else f"~{atom}"


@dataclass(frozen=True)
class Clause:
    """
    A set of literals kept in canonical order.
    `id`, `role` and `name` are bookkeeping and ignored by equality.
    """

    literals: tuple = ()
    id: int = field(default=0, compare=False)
    role: str = field(default=ROLE_DERIVED, compare=False)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        unique = dict.fromkeys(self.literals)
        object.__setattr__(
            self, "literals", tuple(sorted(unique, key=lambda lit: lit.key))
        )

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.literals)

    @property
    def is_empty(self) -> bool:
        return not self.literals

    @property
    def is_unit(self) -> bool:
        return len(self.literals) == 1

    @property
    def is_fact(self) -> bool:
        return self.is_unit and self.literals[0].positive

    @property
    def is_negative(self) -> bool:
        return bool(self.literals) and not any(
            lit.positive for lit in self.literals
        )

    @property
    def is_horn(self) -> bool:
        return sum(lit.positive for lit in self.literals) <= 1

    @cached_property
    def variables(self) -> frozenset:
        return frozenset(
            v for lit in self.literals for a in lit.args for v in term_vars(a)
        )

    def with_id(self, id: int, role: str | None = None) -> "Clause":
        return replace(self, id=id, role=role or self.role)

    def __str__(self) -> str:
        if not self.literals:
            return "$false"
        return " | ".join(str(lit) for lit in self.literals)


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    else:
        for a in t.args:
            yield from term_vars(a)


def literal_vars(lit: Literal) -> Iterator[str]:
    for a in lit.args:
        yield from term_vars(a)


# --------------------------------------------------------------- substitution


def walk(t: Term, bindings: Substitution) -> Term:
    while isinstance(t, Var) and t.name in bindings:
        t = bindings[t.name]
    return t


@singledispatch
def _apply(x, sigma: Substitution):
    raise TypeError(f"cannot apply a substitution to {type(x).__name__}")


@_apply.register
def _(x: Var, sigma: Substitution) -> Term:
    return sigma.get(x.name, x)


@_apply.register
def _(x: App, sigma: Substitution) -> Term:
    if not x.args:
        return x
    return App(x.symbol, tuple(_apply(a, sigma) for a in x.args))


@_apply.register
def _(x: Literal, sigma: Substitution) -> Literal:
    if not x.args:
        return x
    return Literal(
        x.positive, x.predicate, tuple(_apply(a, sigma) for a in x.args)
    )


@_apply.register
def _(x: Clause, sigma: Substitution) -> Clause:
    if not sigma:
        return x
    return Clause(
        tuple(_apply(lit, sigma) for lit in x.literals),
        id=x.id,
        role=x.role,
        name=x.name,
    )


def apply(sigma: Substitution, x):
    """Instantiate a term, literal or clause (simultaneous replacement)."""
    return _apply(x, sigma)


def resolve(t: Term, bindings: Substitution) -> Term:
    """Instantiate t under triangular bindings."""
    t = walk(t, bindings)
    if isinstance(t, Var) or not t.args:
        return t
    return App(t.symbol, tuple(resolve(a, bindings) for a in t.args))


def resolve_literal(lit: Literal, bindings: Substitution) -> Literal:
    if not lit.args or not bindings:
        return lit
    return Literal(
        lit.positive,
        lit.predicate,
        tuple(resolve(a, bindings) for a in lit.args),
    )


def occurs(name: str, t: Term, bindings: Substitution) -> bool:
    t = walk(t, bindings)
    if isinstance(t, Var):
        return t.name == name
    return any(occurs(name, a, bindings) for a in t.args)


def unify_into(s, t, bindings: Substitution, trail: list) -> bool:
    """
    Extend `bindings` in place so that s and t become equal.
    Bound variable names are pushed onto `trail`; on failure the caller
    undoes them with `undo_to`.
    """
    if isinstance(s, Literal):
        if s.predicate != t.predicate or len(s.args) != len(t.args):
            return False
        return all(
            unify_into(a, b, bindings, trail) for a, b in zip(s.args, t.args)
        )
    stack = [(s, t)]
    while stack:
        a, b = stack.pop()
        a = walk(a, bindings)
        b = walk(b, bindings)
        if a == b:
            continue
        if isinstance(a, Var):
            if occurs(a.name, b, bindings):
                return False
            bindings[a.name] = b
            trail.append(a.name)
        elif isinstance(b, Var):
            if occurs(b.name, a, bindings):
                return False
            bindings[b.name] = a
            trail.append(b.name)
        elif a.symbol != b.symbol or len(a.args) != len(b.args):
            return False
        else:
            stack.extend(zip(a.args, b.args))
    return True


def undo_to(bindings: Substitution, trail: list, mark: int) -> None:
    while len(trail) > mark:
        del bindings[trail.pop()]


def normalize(bindings: Substitution) -> Substitution:
    """Resolve triangular bindings into an idempotent substitution."""
    resolved = {name: resolve(t, bindings) for name, t in bindings.items()}
    return {name: t for name, t in resolved.items() if t != Var(name)}


def unify(s, t, sigma: Substitution | None = None) -> Substitution | None:
    """
    Most general unifier of two terms or two literal atoms (polarity is
    ignored), or None. The result is idempotent.
    """
    bindings = dict(sigma) if sigma else {}
    if not unify_into(s, t, bindings, []):
        return None
    return normalize(bindings)


def _match_term(p: Term, t: Term, sigma: Substitution) -> bool:
    if isinstance(p, Var):
        bound = sigma.get(p.name)
        if bound is None:
            sigma[p.name] = t
            return True
        return bound == t
    if isinstance(t, Var) or p.symbol != t.symbol or len(p.args) != len(t.args):
        return False
    return all(_match_term(a, b, sigma) for a, b in zip(p.args, t.args))


def _match_into(pattern, target, sigma: Substitution) -> bool:
    if isinstance(pattern, Literal):
        if (
            pattern.positive != target.positive
            or pattern.predicate != target.predicate
            or len(pattern.args) != len(target.args)
        ):
            return False
        return all(
            _match_term(a, b, sigma)
            for a, b in zip(pattern.args, target.args)
        )
    return _match_term(pattern, target, sigma)


def match(pattern, target, sigma: Substitution | None = None):
    """One-sided unification: σ with σ(pattern) = target, or None."""
    work = dict(sigma) if sigma else {}
    if not _match_into(pattern, target, work):
        return None
    return {k: v for k, v in work.items() if v != Var(k)}


# ------------------------------------------------------------------ renaming


def _base(name: str) -> str:
    return name.split("_", 1)[0]


def rename_apart(
    clause: Clause, used: Iterable[str] = (), counter: count | None = None
) -> Clause:
    """
    Variant of `clause` with fresh variable names. Ground clauses are
    returned unchanged.
    """
    if not clause.variables:
        return clause
    return apply(fresh_renaming(clause.variables, used, counter), clause)


def fresh_renaming(
    variables: Iterable[str], used: Iterable[str] = (), counter: count | None = None
) -> Substitution:
    counter = counter if counter is not None else _FRESH
    variables = sorted(variables)
    used = set(used) | set(variables)
    renaming: Substitution = {}
    for name in variables:
        fresh = f"{_base(name)}_{next(counter)}"
        while fresh in used:
            fresh = f"{_base(name)}_{next(counter)}"
        renaming[name] = Var(fresh)
    return renaming


def normalize_variables(clause: Clause) -> Clause:
    """Rename variables to X1, X2, ... in order of first occurrence."""
    renaming: Substitution = {}
    for lit in clause.literals:
        for name in literal_vars(lit):
            if name not in renaming:
                renaming[name] = Var(f"X{len(renaming) + 1}")
    return apply(renaming, clause)


# --------------------------------------------------------------- subsumption


def _injective_match(
    source: tuple, target: tuple, sigma: Substitution, used: set, var_only
) -> bool:
    if not source:
        return True
    head, rest = source[0], source[1:]
    for idx, lit in enumerate(target):
        if idx in used:
            continue
        work = dict(sigma)
        if not _match_into(head, lit, work):
            continue
        if var_only and not _renaming_ok(work):
            continue
        used.add(idx)
        if _injective_match(rest, target, work, used, var_only):
            return True
        used.discard(idx)
    return False


def _renaming_ok(sigma: Substitution) -> bool:
    images = list(sigma.values())
    return all(isinstance(t, Var) for t in images) and len(
        set(images)
    ) == len(images)


def subsumes(c: Clause, d: Clause) -> bool:
    """True iff some σ maps the literals of c injectively into d."""
    if len(c) > len(d):
        return False
    return _injective_match(c.literals, d.literals, {}, set(), False)


def variant_equal(c: Clause, d: Clause) -> bool:
    if len(c) != len(d) or skeleton_key(c) != skeleton_key(d):
        return False
    return _injective_match(c.literals, d.literals, {}, set(), True)


def _skeleton_term(t: Term) -> tuple:
    if isinstance(t, Var):
        return (0,)
    return (1, t.symbol, tuple(_skeleton_term(a) for a in t.args))


def skeleton_key(clause: Clause) -> tuple:
    """Variable-anonymous key shared by all variants of a clause."""
    return tuple(
        sorted(
            (lit.positive, lit.predicate, tuple(_skeleton_term(a) for a in lit.args))
            for lit in clause.literals
        )
    )


class VariantIndex(object):
    """Buckets clauses by skeleton; membership is checked up to variants."""

    def __init__(self, clauses: Iterable[Clause] = ()):
        self._buckets: dict[tuple, list[Clause]] = {}
        for clause in clauses:
            self.add(clause)

    def find(self, clause: Clause) -> Clause | None:
        for other in self._buckets.get(skeleton_key(clause), ()):
            if variant_equal(other, clause):
                return other
        return None

    def __contains__(self, clause: Clause) -> bool:
        return self.find(clause) is not None

    def add(self, clause: Clause) -> bool:
        """Returns False when a variant is already present."""
        if clause in self:
            return False
        self._buckets.setdefault(skeleton_key(clause), []).append(clause)
        return True

    def remove(self, clause: Clause) -> None:
        bucket = self._buckets.get(skeleton_key(clause), [])
        for idx, other in enumerate(bucket):
            if variant_equal(other, clause):
                del bucket[idx]
                return


def is_tautology(clause: Clause) -> bool:
    lits = set(clause.literals)
    for lit in clause.literals:
        if lit.complement() in lits:
            return True
        if lit.is_equality and lit.positive and lit.args[0] == lit.args[1]:
            return True
    return False


# ------------------------------------------------------------------ measures


@dataclass(frozen=True)
class Measures:
    symbol_count: int = 0
    var_occurrences: int = 0
    distinct_vars: int = 0
    max_depth: int = 0


def term_size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def term_depth(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 1
    return 1 + max(term_depth(a) for a in t.args)


def literal_size(lit: Literal) -> int:
    # polarity is not a symbol
    return 1 + sum(term_size(a) for a in lit.args)


def literal_depth(lit: Literal) -> int:
    return 1 + max((term_depth(a) for a in lit.args), default=0)


@singledispatch
def measures(x) -> Measures:
    raise TypeError(f"no measures for {type(x).__name__}")


@measures.register
def _(x: Literal) -> Measures:
    occurrences = list(literal_vars(x))
    return Measures(
        symbol_count=literal_size(x),
        var_occurrences=len(occurrences),
        distinct_vars=len(set(occurrences)),
        max_depth=literal_depth(x),
    )


@measures.register
def _(x: Clause) -> Measures:
    if x.is_empty:
        return Measures()
    parts = [measures(lit) for lit in x.literals]
    return Measures(
        symbol_count=sum(p.symbol_count for p in parts),
        var_occurrences=sum(p.var_occurrences for p in parts),
        distinct_vars=len(x.variables),
        max_depth=max(p.max_depth for p in parts),
    )


def symbol_occurrences(x) -> dict[str, int]:
    """Occurrence counts of function symbols (constants included)."""
    counts: dict[str, int] = {}

    def visit(t: Term):
        if isinstance(t, App):
            counts[t.symbol] = counts.get(t.symbol, 0) + 1
            for a in t.args:
                visit(a)

    lits = x.literals if isinstance(x, Clause) else (x,)
    for lit in lits:
        for a in lit.args:
            visit(a)
    return counts


# ------------------------------------------------------------ term positions


def subterms(t: Term, path: tuple = ()) -> Iterator[tuple[tuple, Term]]:
    """Non-variable subterms of t with their argument paths."""
    if isinstance(t, Var):
        return
    yield path, t
    for idx, a in enumerate(t.args):
        yield from subterms(a, path + (idx,))


def replace_at(t: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    head, rest = path[0], path[1:]
    args = list(t.args)
    args[head] = replace_at(args[head], rest, new)
    return App(t.symbol, tuple(args))


def make_clause(*literals: Literal, role: str = ROLE_DERIVED) -> Clause:
    return Clause(tuple(literals), role=role)
