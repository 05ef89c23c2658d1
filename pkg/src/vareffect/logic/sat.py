"""Satisfiability under domain axioms: Tseitin CNF conversion plus DPLL.

The solver is a plain DPLL with two-watched-literal unit propagation and
chronological backtracking. Auxiliary Tseitin variables live only inside a
single call.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .formula import And, Const, Formula, Not, Or, Var, Xor


class CNF:
    """Clause database with a name -> index mapping for problem variables."""

    def __init__(self) -> None:
        self.index: dict[str, int] = {}
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.empty = False
        self._aux: dict[Formula, int] = {}

    def var(self, name: str) -> int:
        v = self.index.get(name)
        if v is None:
            self.nvars += 1
            v = self.index[name] = self.nvars
        return v

    def fresh(self) -> int:
        self.nvars += 1
        return self.nvars

    def add_clause(self, lits: Iterable[int]) -> None:
        clause = sorted(set(lits), key=abs)
        for a, b in zip(clause, clause[1:]):
            if a == -b:
                return  # tautological clause
        if not clause:
            self.empty = True
        self.clauses.append(clause)

    def add_formula(self, f: Formula) -> None:
        """Assert *f*; top-level conjunctions and plain clauses skip Tseitin."""
        if isinstance(f, Const):
            if not f.value:
                self.empty = True
                self.clauses.append([])
            return
        if isinstance(f, And):
            for c in f.children:
                self.add_formula(c)
            return
        clause = self._as_clause(f)
        if clause is not None:
            self.add_clause(clause)
            return
        self.add_clause([self.literal(f)])

    def _as_clause(self, f: Formula) -> list[int] | None:
        """Literals of *f* if it is a disjunction of literals (or a negated conjunction of literals)."""
        if isinstance(f, Or):
            parts = f.children
            negate = False
        elif isinstance(f, Not) and isinstance(f.child, And):
            parts = f.child.children
            negate = True
        else:
            return None
        lits = []
        for p in parts:
            if isinstance(p, Var):
                lit = self.var(p.name)
            elif isinstance(p, Not) and isinstance(p.child, Var):
                lit = -self.var(p.child.name)
            else:
                return None
            lits.append(-lit if negate else lit)
        return lits

    def literal(self, f: Formula) -> int:
        """Literal equivalent to *f*, introducing definitional clauses as needed."""
        if isinstance(f, Var):
            return self.var(f.name)
        if isinstance(f, Not):
            return -self.literal(f.child)
        if isinstance(f, Const):
            t = self._aux.get(f)
            if t is None:
                t = self._aux[f] = self.fresh()
                self.add_clause([t] if f.value else [-t])
            return t
        hit = self._aux.get(f)
        if hit is not None:
            return hit
        kids = [self.literal(c) for c in f.children]
        t = self.fresh()
        if isinstance(f, And):
            for k in kids:
                self.add_clause([-t, k])
            self.add_clause([t] + [-k for k in kids])
        elif isinstance(f, Or):
            for k in kids:
                self.add_clause([t, -k])
            self.add_clause([-t] + kids)
        elif isinstance(f, Xor):
            a, b = kids
            self.add_clause([-t, a, b])
            self.add_clause([-t, -a, -b])
            self.add_clause([t, -a, b])
            self.add_clause([t, a, -b])
        else:
            raise TypeError(f"not a formula: {f!r}")
        self._aux[f] = t
        return t


def solve(nvars: int, clauses: Sequence[Sequence[int]]) -> dict[int, bool] | None:
    """DPLL search. Returns a (partial) model or None when unsatisfiable."""
    value: list[int] = [0] * (nvars + 1)  # 0 unassigned, 1 true, -1 false
    watches: dict[int, list[list[int]]] = {}
    trail: list[int] = []
    units: list[int] = []

    for c in clauses:
        if not c:
            return None
        if len(c) == 1:
            units.append(c[0])
            continue
        c = list(c)
        watches.setdefault(c[0], []).append(c)
        watches.setdefault(c[1], []).append(c)

    def lit_value(lit: int) -> int:
        v = value[abs(lit)]
        return v if lit > 0 else -v

    def assign(lit: int) -> None:
        value[abs(lit)] = 1 if lit > 0 else -1
        trail.append(lit)

    def propagate(queue: list[int]) -> bool:
        """Assign queued literals and propagate; False on conflict."""
        head = 0
        while head < len(queue):
            lit = queue[head]
            head += 1
            lv = lit_value(lit)
            if lv == 1:
                continue
            if lv == -1:
                return False
            assign(lit)
            false_lit = -lit
            watching = watches.get(false_lit)
            if not watching:
                continue
            i = 0
            while i < len(watching):
                c = watching[i]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                other = c[0]
                if lit_value(other) == 1:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(c)):
                    if lit_value(c[k]) != -1:
                        c[1], c[k] = c[k], c[1]
                        watches.setdefault(c[1], []).append(c)
                        watching[i] = watching[-1]
                        watching.pop()
                        moved = True
                        break
                if moved:
                    continue
                i += 1
                ov = lit_value(other)
                if ov == -1:
                    return False
                if ov == 0:
                    queue.append(other)
        return True

    if not propagate(units):
        return None

    # occurrence counts for a static branching order
    score = [0] * (nvars + 1)
    for c in clauses:
        for lit in c:
            score[abs(lit)] += 1
    order = sorted(range(1, nvars + 1), key=lambda v: -score[v])

    # decision stack: (trail length before decision, literal, tried_both)
    decisions: list[tuple[int, int, bool]] = []
    pos = 0
    while True:
        while pos < len(order) and value[order[pos]] != 0:
            pos += 1
        if pos == len(order):
            return {v: value[v] == 1 for v in range(1, nvars + 1) if value[v] != 0}
        var = order[pos]
        decisions.append((len(trail), var, False))
        ok = propagate([var])
        while not ok:
            # backtrack to the most recent decision with an untried polarity
            while decisions and decisions[-1][2]:
                mark, _, _ = decisions.pop()
                _undo(trail, value, mark)
            if not decisions:
                return None
            mark, lit, _ = decisions.pop()
            _undo(trail, value, mark)
            decisions.append((mark, -lit, True))
            ok = propagate([-lit])
        pos = 0


def _undo(trail: list[int], value: list[int], mark: int) -> None:
    while len(trail) > mark:
        value[abs(trail.pop())] = 0


class AxiomSet:
    """Domain constraints, grouped into variable-connected components.

    A query only needs the components that share variables with the query
    formula; the remaining components are checked for satisfiability once.
    """

    def __init__(self, axioms: Iterable[Formula] = ()):
        self.axioms: tuple[Formula, ...] = tuple(axioms)
        parent: dict[str, str] = {}

        def find(x: str) -> str:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        self._vars = [a.variables() for a in self.axioms]
        for vs in self._vars:
            first = None
            for v in vs:
                parent.setdefault(v, v)
                if first is None:
                    first = find(v)
                else:
                    r = find(v)
                    if r != first:
                        parent[r] = first
        self._component_of = {v: find(v) for v in parent}
        self._members: dict[str | None, list[Formula]] = {}
        for ax, vs in zip(self.axioms, self._vars):
            root = self._component_of[next(iter(vs))] if vs else None
            self._members.setdefault(root, []).append(ax)
        self._component_sat: dict[str | None, bool] = {}

    def __len__(self) -> int:
        return len(self.axioms)

    def __iter__(self):
        return iter(self.axioms)

    def relevant(self, variables: Iterable[str]) -> tuple[list[Formula], set]:
        roots = {self._component_of[v] for v in variables if v in self._component_of}
        out: list[Formula] = []
        for r in sorted(roots):
            out.extend(self._members[r])
        return out, roots

    def others_satisfiable(self, used_roots: set) -> bool:
        for root, members in self._members.items():
            if root in used_roots:
                continue
            sat = self._component_sat.get(root)
            if sat is None:
                cnf = CNF()
                for ax in members:
                    cnf.add_formula(ax)
                sat = not cnf.empty and solve(cnf.nvars, cnf.clauses) is not None
                self._component_sat[root] = sat
            if not sat:
                return False
        return True


EMPTY_AXIOMS = AxiomSet()


def _check(f: Formula, axioms: AxiomSet | None) -> dict[str, bool] | None:
    axioms = axioms if axioms is not None else EMPTY_AXIOMS
    if isinstance(axioms, (list, tuple)):
        axioms = AxiomSet(axioms)
    relevant, roots = axioms.relevant(f.variables())
    if not axioms.others_satisfiable(roots):
        return None
    cnf = CNF()
    cnf.add_formula(f)
    for ax in relevant:
        cnf.add_formula(ax)
    if cnf.empty:
        return None
    model = solve(cnf.nvars, cnf.clauses)
    if model is None:
        return None
    return {name: model.get(i, False) for name, i in cnf.index.items()}


def is_satisfiable(f: Formula, axioms: AxiomSet | None = None) -> bool:
    """True iff some assignment satisfies *f* together with every axiom."""
    if isinstance(f, Const):
        return f.value and _check(f, axioms) is not None
    return _check(f, axioms) is not None


def find_model(f: Formula, axioms: AxiomSet | None = None) -> dict[str, bool] | None:
    """A satisfying assignment over the variables of *f* and the relevant axioms."""
    return _check(f, axioms)


def is_tautology(f: Formula, axioms: AxiomSet | None = None) -> bool:
    """True iff ``!f`` is unsatisfiable under the axioms."""
    if isinstance(f, Const) and f.value:
        return True
    return not is_satisfiable(Not(f), axioms)


def equivalent(a: Formula, b: Formula, axioms: AxiomSet | None = None) -> bool:
    """Semantic equivalence under the axioms."""
    return is_tautology(Or([And([a, b]), And([Not(a), Not(b)])]), axioms)
