"""LTL syntax, parsing, lasso semantics, and the scheduling formula builders.

Formulas are immutable ASTs over atomic propositions that name either a
communication link (``e_i_j``) or a command node (``c_j``).  The concrete
syntax uses ASCII operators ``! & | -> X U R G F`` with precedence
unary > U/R > & > | > ->.  Words are ultimately periodic: a finite prefix
followed by a forever-repeated nonempty suffix, each position a set of
propositions; :func:`eval_lasso` is the semantic ground truth the rest of
the package is validated against.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .network import Graph, Link, SensorNetwork, link


# ---------------------------------------------------------------------------
# atomic propositions

@dataclass(frozen=True, order=True)
class AtomicProp:
    kind: str  # "link" or "node"
    indices: tuple[int, ...]

    def __post_init__(self):
        if self.kind == "link":
            i, j = self.indices
            if not 0 <= i < j:
                raise ValueError(f"link proposition needs 0 <= i < j, got {self.indices}")
        elif self.kind == "node":
            (j,) = self.indices
            if j < 0:
                raise ValueError("node proposition needs a non-negative index")
        else:
            raise ValueError(f"unknown proposition kind {self.kind!r}")

    @property
    def name(self) -> str:
        if self.kind == "link":
            return f"e_{self.indices[0]}_{self.indices[1]}"
        return f"c_{self.indices[0]}"

    def __str__(self) -> str:
        return self.name


def link_prop(i: int, j: int) -> AtomicProp:
    return AtomicProp("link", link(i, j))


def node_prop(j: int) -> AtomicProp:
    return AtomicProp("node", (j,))


Word = Sequence[Iterable[AtomicProp]]


# ---------------------------------------------------------------------------
# formula AST

class LtlFormula:
    """Base class; concrete nodes are frozen dataclasses below."""

    def __str__(self) -> str:
        return render(self)

    def size(self) -> int:
        return formula_size(self)

    def atoms(self) -> frozenset[AtomicProp]:
        return atoms_of(self)


@dataclass(frozen=True)
class TrueF(LtlFormula):
    pass


@dataclass(frozen=True)
class FalseF(LtlFormula):
    pass


@dataclass(frozen=True)
class Atom(LtlFormula):
    prop: AtomicProp


@dataclass(frozen=True)
class Not(LtlFormula):
    child: LtlFormula


@dataclass(frozen=True)
class And(LtlFormula):
    children: tuple[LtlFormula, ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("And needs at least two children")


@dataclass(frozen=True)
class Or(LtlFormula):
    children: tuple[LtlFormula, ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Or needs at least two children")


@dataclass(frozen=True)
class Next(LtlFormula):
    child: LtlFormula


@dataclass(frozen=True)
class Until(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Release(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Always(LtlFormula):
    child: LtlFormula


@dataclass(frozen=True)
class Eventually(LtlFormula):
    child: LtlFormula


def conj(children: Iterable[LtlFormula]) -> LtlFormula:
    """Conjunction with the empty/singleton conventions (empty = true)."""
    cs = tuple(children)
    if not cs:
        return TrueF()
    if len(cs) == 1:
        return cs[0]
    return And(cs)


def disj(children: Iterable[LtlFormula]) -> LtlFormula:
    """Disjunction with the empty/singleton conventions (empty = false)."""
    cs = tuple(children)
    if not cs:
        return FalseF()
    if len(cs) == 1:
        return cs[0]
    return Or(cs)


def implies(a: LtlFormula, b: LtlFormula) -> LtlFormula:
    return Or((Not(a), b))


def formula_size(f: LtlFormula) -> int:
    """Symbol count: atoms, constants and operators each count one; an
    n-ary And/Or counts n-1 connectives."""
    if isinstance(f, (TrueF, FalseF, Atom)):
        return 1
    if isinstance(f, (Not, Next, Always, Eventually)):
        return 1 + formula_size(f.child)
    if isinstance(f, (And, Or)):
        return len(f.children) - 1 + sum(formula_size(c) for c in f.children)
    if isinstance(f, (Until, Release)):
        return 1 + formula_size(f.left) + formula_size(f.right)
    raise TypeError(f"not a formula: {f!r}")


def atoms_of(f: LtlFormula) -> frozenset[AtomicProp]:
    if isinstance(f, Atom):
        return frozenset({f.prop})
    if isinstance(f, (TrueF, FalseF)):
        return frozenset()
    if isinstance(f, (Not, Next, Always, Eventually)):
        return atoms_of(f.child)
    if isinstance(f, (And, Or)):
        out: frozenset[AtomicProp] = frozenset()
        for c in f.children:
            out |= atoms_of(c)
        return out
    if isinstance(f, (Until, Release)):
        return atoms_of(f.left) | atoms_of(f.right)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# rendering (round-trips through parse)

_LEVEL_OR = 1
_LEVEL_AND = 2
_LEVEL_UNTIL = 3
_LEVEL_UNARY = 4


def _level(f: LtlFormula) -> int:
    if isinstance(f, Or):
        return _LEVEL_OR
    if isinstance(f, And):
        return _LEVEL_AND
    if isinstance(f, (Until, Release)):
        return _LEVEL_UNTIL
    return _LEVEL_UNARY


def render(f: LtlFormula) -> str:
    def wrap(child: LtlFormula, minimum: int) -> str:
        text = render(child)
        return f"({text})" if _level(child) < minimum else text

    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Atom):
        return f.prop.name
    if isinstance(f, Not):
        return f"!{wrap(f.child, _LEVEL_UNARY)}"
    if isinstance(f, Next):
        return f"X {wrap(f.child, _LEVEL_UNARY)}"
    if isinstance(f, Always):
        return f"G {wrap(f.child, _LEVEL_UNARY)}"
    if isinstance(f, Eventually):
        return f"F {wrap(f.child, _LEVEL_UNARY)}"
    if isinstance(f, And):
        return " & ".join(wrap(c, _LEVEL_AND + 1) if isinstance(c, And) else wrap(c, _LEVEL_AND) for c in f.children)
    if isinstance(f, Or):
        return " | ".join(wrap(c, _LEVEL_OR + 1) if isinstance(c, Or) else wrap(c, _LEVEL_OR) for c in f.children)
    if isinstance(f, Until):
        # right-associative; left operand must bind tighter
        return f"{wrap(f.left, _LEVEL_UNARY)} U {wrap(f.right, _LEVEL_UNTIL)}"
    if isinstance(f, Release):
        return f"{wrap(f.left, _LEVEL_UNARY)} R {wrap(f.right, _LEVEL_UNTIL)}"
    raise TypeError(f"not a formula: {f!r}")


def sort_key(f: LtlFormula) -> str:
    return render(f)


# ---------------------------------------------------------------------------
# parser

class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


_TOKEN = re.compile(r"\s*(->|[()&|!]|[A-Za-z_][A-Za-z0-9_]*)")
_LINK_NAME = re.compile(r"^e_(\d+)_(\d+)$")
_NODE_NAME = re.compile(r"^c_(\d+)$")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            break
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, declarations: Mapping[str, AtomicProp] | None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.declarations = dict(declarations or {})

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.pos())
        self.i += 1
        return tok

    def expect(self, token: str) -> None:
        if self.peek() != token:
            raise ParseError(f"expected {token!r}", self.pos())
        self.i += 1

    def parse(self) -> LtlFormula:
        f = self.implication()
        if self.peek() is not None:
            raise ParseError(f"trailing input {self.peek()!r}", self.pos())
        return f

    def implication(self) -> LtlFormula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            right = self.implication()
            return implies(left, right)
        return left

    def disjunction(self) -> LtlFormula:
        parts = [self.conjunction()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> LtlFormula:
        parts = [self.until()]
        while self.peek() == "&":
            self.take()
            parts.append(self.until())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def until(self) -> LtlFormula:
        left = self.unary()
        tok = self.peek()
        if tok in ("U", "R"):
            self.take()
            right = self.until()
            return Until(left, right) if tok == "U" else Release(left, right)
        return left

    def unary(self) -> LtlFormula:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.pos())
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "X":
            self.take()
            return Next(self.unary())
        if tok == "G":
            self.take()
            return Always(self.unary())
        if tok == "F":
            self.take()
            return Eventually(self.unary())
        if tok == "(":
            self.take()
            inner = self.implication()
            self.expect(")")
            return inner
        return self.atom()

    def atom(self) -> LtlFormula:
        pos = self.pos()
        tok = self.take()
        if tok == "true":
            return TrueF()
        if tok == "false":
            return FalseF()
        if not re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", tok):
            raise ParseError(f"expected a proposition, got {tok!r}", pos)
        if tok in self.declarations:
            return Atom(self.declarations[tok])
        m = _LINK_NAME.match(tok)
        if m:
            return Atom(link_prop(int(m.group(1)), int(m.group(2))))
        m = _NODE_NAME.match(tok)
        if m:
            return Atom(node_prop(int(m.group(1))))
        raise ParseError(f"undeclared proposition {tok!r}", pos)


def parse(text: str, declarations: Mapping[str, AtomicProp] | None = None) -> LtlFormula:
    """Parse concrete syntax into a formula.

    Link props ``e_<i>_<j>`` and command props ``c_<j>`` are recognized
    directly; any other identifier must be supplied in ``declarations``.
    ``a -> b`` is desugared to ``!a | b``.
    """
    return _Parser(text, declarations).parse()


# ---------------------------------------------------------------------------
# negation normal form and light simplification

def to_nnf(f: LtlFormula) -> LtlFormula:
    """Push negations to atoms using the standard dualities."""
    if isinstance(f, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, And):
        return And(tuple(to_nnf(c) for c in f.children))
    if isinstance(f, Or):
        return Or(tuple(to_nnf(c) for c in f.children))
    if isinstance(f, Next):
        return Next(to_nnf(f.child))
    if isinstance(f, Until):
        return Until(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Release):
        return Release(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Always):
        return Always(to_nnf(f.child))
    if isinstance(f, Eventually):
        return Eventually(to_nnf(f.child))
    if isinstance(f, Not):
        g = f.child
        if isinstance(g, TrueF):
            return FalseF()
        if isinstance(g, FalseF):
            return TrueF()
        if isinstance(g, Atom):
            return f
        if isinstance(g, Not):
            return to_nnf(g.child)
        if isinstance(g, And):
            return Or(tuple(to_nnf(Not(c)) for c in g.children))
        if isinstance(g, Or):
            return And(tuple(to_nnf(Not(c)) for c in g.children))
        if isinstance(g, Next):
            return Next(to_nnf(Not(g.child)))
        if isinstance(g, Until):
            return Release(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
        if isinstance(g, Release):
            return Until(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
        if isinstance(g, Always):
            return Eventually(to_nnf(Not(g.child)))
        if isinstance(g, Eventually):
            return Always(to_nnf(Not(g.child)))
    raise TypeError(f"not a formula: {f!r}")


def is_nnf(f: LtlFormula) -> bool:
    if isinstance(f, Not):
        return isinstance(f.child, Atom)
    if isinstance(f, (TrueF, FalseF, Atom)):
        return True
    if isinstance(f, (And, Or)):
        return all(is_nnf(c) for c in f.children)
    if isinstance(f, (Next, Always, Eventually)):
        return is_nnf(f.child)
    if isinstance(f, (Until, Release)):
        return is_nnf(f.left) and is_nnf(f.right)
    raise TypeError(f"not a formula: {f!r}")


def simplify(f: LtlFormula) -> LtlFormula:
    """Constant folding and idempotence only; no deeper rewriting."""
    if isinstance(f, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, Not):
        c = simplify(f.child)
        if isinstance(c, TrueF):
            return FalseF()
        if isinstance(c, FalseF):
            return TrueF()
        if isinstance(c, Not):
            return c.child
        return Not(c)
    if isinstance(f, (And, Or)):
        absorbing, neutral = (FalseF, TrueF) if isinstance(f, And) else (TrueF, FalseF)
        kept: list[LtlFormula] = []
        for c in map(simplify, f.children):
            if isinstance(c, absorbing):
                return absorbing()
            if isinstance(c, neutral) or c in kept:
                continue
            kept.append(c)
        if not kept:
            return neutral()
        return kept[0] if len(kept) == 1 else type(f)(tuple(kept))
    if isinstance(f, Next):
        c = simplify(f.child)
        return c if isinstance(c, (TrueF, FalseF)) else Next(c)
    if isinstance(f, Always):
        c = simplify(f.child)
        return c if isinstance(c, (TrueF, FalseF)) else Always(c)
    if isinstance(f, Eventually):
        c = simplify(f.child)
        return c if isinstance(c, (TrueF, FalseF)) else Eventually(c)
    if isinstance(f, Until):
        a, b = simplify(f.left), simplify(f.right)
        if isinstance(b, (TrueF, FalseF)):
            return b
        if isinstance(a, FalseF):
            return b
        return Until(a, b)
    if isinstance(f, Release):
        a, b = simplify(f.left), simplify(f.right)
        if isinstance(b, (TrueF, FalseF)):
            return b
        return Release(a, b)
    raise TypeError(f"not a formula: {f!r}")


def normalized_conj(formulas: Sequence[LtlFormula]) -> LtlFormula:
    """Conjunction flattened, deduplicated and sorted; singletons unchanged."""
    fs = tuple(formulas)
    if not fs:
        return TrueF()
    if len(fs) == 1:
        return fs[0]
    flat: list[LtlFormula] = []
    stack = list(reversed(fs))
    while stack:
        f = stack.pop()
        if isinstance(f, And):
            stack.extend(reversed(f.children))
        else:
            flat.append(f)
    unique = sorted(set(flat), key=sort_key)
    return conj(unique)


# ---------------------------------------------------------------------------
# lasso semantics

def eval_lasso(f: LtlFormula, prefix: Word, suffix: Word) -> bool:
    """Truth of ``f`` at position 0 of the word prefix . suffix^omega.

    Fixpoint evaluation over the finitely many distinct positions; this is
    the independent semantic oracle the automaton pipeline is checked
    against.
    """
    if not suffix:
        raise ValueError("suffix must be nonempty")
    word = [frozenset(w) for w in (*prefix, *suffix)]
    n = len(word)
    loop = len(prefix)
    succ = [t + 1 for t in range(n)]
    succ[n - 1] = loop

    memo: dict[LtlFormula, list[bool]] = {}

    def vec(g: LtlFormula) -> list[bool]:
        cached = memo.get(g)
        if cached is not None:
            return cached
        if isinstance(g, TrueF):
            v = [True] * n
        elif isinstance(g, FalseF):
            v = [False] * n
        elif isinstance(g, Atom):
            v = [g.prop in word[t] for t in range(n)]
        elif isinstance(g, Not):
            c = vec(g.child)
            v = [not x for x in c]
        elif isinstance(g, And):
            vs = [vec(c) for c in g.children]
            v = [all(col) for col in zip(*vs)]
        elif isinstance(g, Or):
            vs = [vec(c) for c in g.children]
            v = [any(col) for col in zip(*vs)]
        elif isinstance(g, Next):
            c = vec(g.child)
            v = [c[succ[t]] for t in range(n)]
        elif isinstance(g, (Until, Eventually)):
            if isinstance(g, Until):
                a, b = vec(g.left), vec(g.right)
            else:
                a, b = [True] * n, vec(g.child)
            v = b[:]  # least fixpoint of v = b or (a and X v)
            for _ in range(n):
                changed = False
                for t in range(n - 1, -1, -1):
                    nv = b[t] or (a[t] and v[succ[t]])
                    if nv != v[t]:
                        v[t] = nv
                        changed = True
                if not changed:
                    break
        elif isinstance(g, (Release, Always)):
            if isinstance(g, Release):
                a, b = vec(g.left), vec(g.right)
            else:
                a, b = [False] * n, vec(g.child)
            v = b[:]  # greatest fixpoint of v = b and (a or X v)
            for _ in range(n):
                changed = False
                for t in range(n - 1, -1, -1):
                    nv = b[t] and (a[t] or v[succ[t]])
                    if nv != v[t]:
                        v[t] = nv
                        changed = True
                if not changed:
                    break
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = v
        return v

    return vec(f)[0]


# ---------------------------------------------------------------------------
# scheduling specifications

def build_phi_ij(g: Graph | SensorNetwork, e: Link) -> LtlFormula:
    """Per-link requirement: interfering links stay silent while the link
    is active, and the link itself fires infinitely often."""
    e = link(*e)
    others = sorted(link_neighborhood_of(g, e) - {e})
    pi = Atom(link_prop(*e))
    silence = conj([Not(Atom(link_prop(*o))) for o in others])
    safety = Always(implies(pi, silence))
    liveness = Always(Eventually(pi))
    return And((safety, liveness))


def link_neighborhood_of(g: Graph | SensorNetwork, e: Link) -> frozenset[Link]:
    graph = g.graph if isinstance(g, SensorNetwork) else g
    return graph.link_neighborhood(e)


def build_phi(g: Graph | SensorNetwork) -> LtlFormula:
    """Conjunction of the per-link requirements over every edge."""
    graph = g.graph if isinstance(g, SensorNetwork) else g
    return conj([build_phi_ij(graph, e) for e in graph.sorted_edges()])


def build_psi(g_cmd: Graph) -> LtlFormula:
    """Command-node activation spec: a node excludes its neighbors while
    active, and every node activates infinitely often."""
    parts = []
    for j in g_cmd.nodes:
        pi = Atom(node_prop(j))
        excl = conj([Not(Atom(node_prop(k))) for k in sorted(g_cmd.neighbors(j))])
        parts.append(And((Always(implies(pi, excl)), Always(Eventually(pi)))))
    return conj(parts)


def build_fairness(g: Graph | SensorNetwork, e: Link) -> LtlFormula:
    """After a link activates, it stays off until some interfering link
    gets a turn.  Rejected for links with no interfering neighbors (the
    disjunction would be empty)."""
    e = link(*e)
    others = sorted(link_neighborhood_of(g, e) - {e})
    if not others:
        raise ValueError(f"link {e} has no interfering neighbors; fairness is vacuous")
    pi = Atom(link_prop(*e))
    turn = disj([Atom(link_prop(*o)) for o in others])
    return Always(implies(pi, Next(Until(Not(pi), turn))))


def item_prop(item) -> AtomicProp:
    """Proposition for an activation item: a link pair or a command node."""
    if isinstance(item, tuple):
        return link_prop(*item)
    return node_prop(item)


def link_word(steps: Iterable[Iterable[Link]]) -> list[frozenset[AtomicProp]]:
    """Edge-set steps as proposition-set word positions."""
    return [frozenset(link_prop(i, j) for i, j in step) for step in steps]


def node_word(steps: Iterable[Iterable[int]]) -> list[frozenset[AtomicProp]]:
    """Command-node activation steps as proposition-set word positions."""
    return [frozenset(node_prop(j) for j in step) for step in steps]


def semantic_laplacian_step(
    g: Graph, assignment: Mapping[int, LtlFormula]
) -> dict[int, LtlFormula]:
    """One diffusion step of formulas over the graph: every node conjoins
    the formulas of its closed neighborhood (flattened, deduplicated,
    sorted).  Iterating propagates semantics to consensus per component."""
    missing = [v for v in g.nodes if v not in assignment]
    if missing:
        raise KeyError(f"nodes without a formula: {missing}")
    out: dict[int, LtlFormula] = {}
    for v in g.nodes:
        closed = sorted({v, *g.neighbors(v)})
        out[v] = normalized_conj([assignment[w] for w in closed])
    return out
