"""Rule-based simplification.

Rules, applied bottom-up until nothing changes: constant folding, double
negation, idempotence, complement, absorption (including the negated forms
``x && (!x || y) -> x && y`` and ``x && !(x && y) -> x && !y``), and the XOR
constant/self rules. Results are equivalent to the input, constant-free unless
the whole formula is a constant, and never larger than the input. No
minimality is attempted.
"""

from __future__ import annotations

from .formula import FALSE, TRUE, And, Const, Formula, Not, Or, Var, Xor, conj, disj


def negate(f: Formula) -> Formula:
    """Negation with constant folding and double-negation removal."""
    if isinstance(f, Const):
        return FALSE if f.value else TRUE
    if isinstance(f, Not):
        return f.child
    return Not(f)


def _complement_of(f: Formula) -> Formula:
    return f.child if isinstance(f, Not) else Not(f)


def _nary(kind: type, children: list[Formula], memo: dict) -> Formula:
    """Simplify an And (kind=And) or Or (kind=Or) over already-simplified children."""
    dual = Or if kind is And else And
    unit = TRUE if kind is And else FALSE
    zero = FALSE if kind is And else TRUE

    items: dict[Formula, None] = {}
    pending = list(children)
    while pending:
        c = pending.pop()
        if isinstance(c, kind):
            pending.extend(c.children)
        elif c == unit:
            continue
        elif c == zero:
            return zero
        else:
            items[c] = None

    changed = True
    while changed:
        changed = False
        present = set(items)
        for c in present:
            if _complement_of(c) in present:
                return zero
        plain = {c for c in present if not isinstance(c, dual)}
        # negated same-kind child: x && !(x && y) -> x && !y
        for c in present:
            if not (isinstance(c, Not) and isinstance(c.child, kind)):
                continue
            parts = c.child.children
            if any(_complement_of(p) in plain for p in parts):
                del items[c]
                changed = True
                continue
            keep = [p for p in parts if p not in plain]
            if len(keep) != len(parts):
                del items[c]
                changed = True
                reduced = negate(_simp(conj(keep) if kind is And else disj(keep), memo))
                if reduced == zero:
                    return zero
                if reduced == unit:
                    continue
                if isinstance(reduced, kind):
                    items.update(dict.fromkeys(reduced.children))
                else:
                    items[reduced] = None
        if changed:
            continue
        duals = sorted((c for c in present if isinstance(c, dual)), key=lambda d: len(d.children))
        kept: list[frozenset] = []
        check_subsumption = len(duals) <= _SUBSUMPTION_LIMIT
        for d in duals:
            parts = frozenset(d.children)
            # absorption: x && (x || y) -> x
            if parts & plain:
                del items[d]
                changed = True
                continue
            # a smaller dual whose operands are a subset absorbs this one
            if check_subsumption and any(k < parts for k in kept):
                del items[d]
                changed = True
                continue
            # negated absorption: x && (!x || y) -> x && y
            keep = [p for p in d.children if _complement_of(p) not in plain]
            if len(keep) != len(d.children):
                del items[d]
                changed = True
                reduced = _simp(conj(keep) if dual is And else disj(keep), memo)
                if reduced == zero:
                    return zero
                if reduced == unit:
                    continue
                if isinstance(reduced, kind):
                    items.update(dict.fromkeys(reduced.children))
                else:
                    items[reduced] = None
                continue
            kept.append(parts)
    if not items:
        return unit
    ordered = list(items)
    return conj(ordered) if kind is And else disj(ordered)


_SUBSUMPTION_LIMIT = 64


def _simp(f: Formula, memo: dict) -> Formula:
    if isinstance(f, (Const, Var)):
        return f
    hit = memo.get(f)
    if hit is not None:
        return hit
    if isinstance(f, Not):
        out = negate(_simp(f.child, memo))
    elif isinstance(f, (And, Or)):
        out = _nary(type(f), [_simp(c, memo) for c in f.children], memo)
    elif isinstance(f, Xor):
        out = _xor(_simp(f.left, memo), _simp(f.right, memo))
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[f] = out
    return out


def _xor(a: Formula, b: Formula) -> Formula:
    if isinstance(a, Const):
        a, b = b, a
    if isinstance(b, Const):
        return negate(a) if b.value else a
    if a == b:
        return FALSE
    if a == _complement_of(b):
        return TRUE
    return Xor(a, b)


def simplify(f: Formula) -> Formula:
    memo: dict[Formula, Formula] = {}
    while True:
        g = _simp(f, memo)
        if g == f:
            return g
        f = g
