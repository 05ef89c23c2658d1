"""Immutable propositional formulas.

Nodes are interned by their canonical text: every node carries its serialized
form (``key``), which doubles as the structural-equality and hashing key.
Children of ``And``/``Or`` are flattened and sorted by key on construction, so
two formulas that only differ in operand order compare equal.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping


class Formula:
    __slots__ = ("key", "_hash", "_size")

    key: str

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return isinstance(other, Formula) and self.key == other.key

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"{type(self).__name__}<{self.key}>"

    def __str__(self) -> str:
        return self.key

    def __reduce__(self):
        from .text import parse_formula

        return (parse_formula, (self.key,))

    # operator sugar, used heavily in tests
    def __and__(self, other: Formula) -> Formula:
        return conj([self, other])

    def __or__(self, other: Formula) -> Formula:
        return disj([self, other])

    def __invert__(self) -> Formula:
        return Not(self)

    def __xor__(self, other: Formula) -> Formula:
        return Xor(self, other)

    @property
    def children(self) -> tuple[Formula, ...]:
        return ()

    def size(self) -> int:
        """Number of nodes in the tree."""
        return self._size

    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if isinstance(node, Var):
                out.add(node.name)
            else:
                stack.extend(node.children)
        return frozenset(out)

    def walk(self) -> Iterator[Formula]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children)

    def _init(self, key: str, size: int) -> None:
        self.key = key
        self._hash = hash(key)
        self._size = size


class Const(Formula):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value
        self._init("true" if value else "false", 1)


TRUE = Const(True)
FALSE = Const(False)


class Var(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str):
        if not name:
            raise ValueError("variable name must be non-empty")
        self.name = name
        self._init(name, 1)


def _atomic(f: Formula) -> bool:
    return isinstance(f, (Const, Var, Not))


def _wrap(f: Formula) -> str:
    return f.key if _atomic(f) else f"({f.key})"


class Not(Formula):
    __slots__ = ("child",)

    def __init__(self, child: Formula):
        self.child = child
        self._init("!" + _wrap(child), child._size + 1)

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.child,)


class _NAry(Formula):
    __slots__ = ("_children",)
    op = ""

    def __init__(self, children: Iterable[Formula]):
        flat: list[Formula] = []
        for c in children:
            if type(c) is type(self):
                flat.extend(c._children)  # type: ignore[attr-defined]
            else:
                flat.append(c)
        if len(flat) < 2:
            raise ValueError(f"{type(self).__name__} needs at least two operands")
        flat.sort(key=_sort_key)
        self._children = tuple(flat)
        sep = f" {self.op} "
        self._init(sep.join(_wrap(c) for c in flat), 1 + sum(c._size for c in flat))

    @property
    def children(self) -> tuple[Formula, ...]:
        return self._children


def _sort_key(f: Formula) -> str:
    return f.key


class And(_NAry):
    __slots__ = ()
    op = "&&"


class Or(_NAry):
    __slots__ = ()
    op = "||"


class Xor(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right
        self._init(f"{_wrap(left)} ^ {_wrap(right)}", left._size + right._size + 1)

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)


def conj(items: Iterable[Formula]) -> Formula:
    """Conjunction without folding: empty -> TRUE, single item -> the item."""
    items = list(items)
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return And(items)


def disj(items: Iterable[Formula]) -> Formula:
    """Disjunction without folding: empty -> FALSE, single item -> the item."""
    items = list(items)
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return Or(items)


def rebuild(f: Formula, children: list[Formula]) -> Formula:
    """Same node kind as *f* over new children."""
    if isinstance(f, Not):
        return Not(children[0])
    if isinstance(f, And):
        return conj(children)
    if isinstance(f, Or):
        return disj(children)
    if isinstance(f, Xor):
        return Xor(children[0], children[1])
    return f


def substitute_many(f: Formula, values: Mapping[str, Formula]) -> Formula:
    """Replace every variable named in *values*; no simplification."""
    if not values:
        return f
    cache: dict[Formula, Formula] = {}

    def go(node: Formula) -> Formula:
        if isinstance(node, Var):
            return values.get(node.name, node)
        if isinstance(node, Const):
            return node
        hit = cache.get(node)
        if hit is not None:
            return hit
        kids = node.children
        new = [go(c) for c in kids]
        out = node if all(a is b for a, b in zip(new, kids)) else rebuild(node, new)
        cache[node] = out
        return out

    return go(f)


def substitute(f: Formula, var: str, value: bool | Const) -> Formula:
    if not isinstance(value, Const):
        value = TRUE if value else FALSE
    return substitute_many(f, {var: value})


def evaluate(f: Formula, assignment: Mapping[str, bool]) -> bool:
    """Evaluate under a total assignment; raises KeyError on a missing variable."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Var):
        try:
            return bool(assignment[f.name])
        except KeyError:
            raise KeyError(f"assignment has no value for variable {f.name!r}") from None
    if isinstance(f, Not):
        return not evaluate(f.child, assignment)
    if isinstance(f, And):
        return all(evaluate(c, assignment) for c in f.children)
    if isinstance(f, Or):
        return any(evaluate(c, assignment) for c in f.children)
    if isinstance(f, Xor):
        return evaluate(f.left, assignment) != evaluate(f.right, assignment)
    raise TypeError(f"not a formula: {f!r}")


def eliminate_xor(f: Formula) -> Formula:
    """Rewrite ``a ^ b`` as ``(a && !b) || (!a && b)`` throughout; no folding."""
    cache: dict[Formula, Formula] = {}

    def go(node: Formula) -> Formula:
        if isinstance(node, (Var, Const)):
            return node
        hit = cache.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Xor):
            a, b = go(node.left), go(node.right)
            out: Formula = Or([And([a, Not(b)]), And([Not(a), b])])
        else:
            out = rebuild(node, [go(c) for c in node.children])
        cache[node] = out
        return out

    return go(f)


def has_xor(f: Formula) -> bool:
    return any(isinstance(n, Xor) for n in f.walk())
