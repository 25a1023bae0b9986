"""Exact linear programming over the rationals.

Problems have the form ``A x <= b, x >= 0`` with an optional linear
objective.  The solver is a dictionary-form simplex using Bland's rule, so
it always terminates, and a single auxiliary variable for phase one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LpResult:
    status: str
    x: list[Fraction] | None = None
    objective: Fraction | None = None

    @property
    def feasible(self) -> bool:
        return self.status != INFEASIBLE


class _Dictionary:
    """basic[i] = rhs[i] + sum_j coef[i][j] * nonbasic[j]; z = z0 + sum_j obj[j] * nonbasic[j]."""

    def __init__(self, A, b, nvars):
        self.nonbasic = list(range(nvars))
        self.basic = list(range(nvars, nvars + len(A)))
        self.rhs = [Fraction(v) for v in b]
        self.coef = [[-Fraction(v) for v in row] for row in A]
        self.obj = [Fraction(0)] * nvars
        self.z0 = Fraction(0)

    def pivot(self, i: int, j: int) -> None:
        row = self.coef[i]
        cj = row[j]
        inv = -1 / cj
        new_row = [v * inv for v in row]
        new_row[j] = 1 / cj
        new_rhs = self.rhs[i] * inv
        self.coef[i] = new_row
        self.rhs[i] = new_rhs
        for r in range(len(self.coef)):
            if r == i:
                continue
            f = self.coef[r][j]
            if not f:
                continue
            target = self.coef[r]
            for k, v in enumerate(new_row):
                if k == j:
                    target[k] = f * v
                elif v:
                    target[k] += f * v
            self.rhs[r] += f * new_rhs
        f = self.obj[j]
        if f:
            for k, v in enumerate(new_row):
                if k == j:
                    self.obj[k] = f * v
                elif v:
                    self.obj[k] += f * v
            self.z0 += f * new_rhs
        self.nonbasic[j], self.basic[i] = self.basic[i], self.nonbasic[j]

    def run(self) -> str:
        """Maximise with Bland's rule from a feasible dictionary."""
        while True:
            entering = [(self.nonbasic[j], j) for j, v in enumerate(self.obj) if v > 0]
            if not entering:
                return OPTIMAL
            _, j = min(entering)
            best = None
            for i, row in enumerate(self.coef):
                if row[j] < 0:
                    key = (self.rhs[i] / -row[j], self.basic[i], i)
                    if best is None or key < best:
                        best = key
            if best is None:
                return UNBOUNDED
            self.pivot(best[2], j)

    def values(self, nvars: int) -> list[Fraction]:
        x = [Fraction(0)] * nvars
        for i, v in enumerate(self.basic):
            if v < nvars:
                x[v] = self.rhs[i]
        return x


def solve_lp(A: Sequence[Sequence], b: Sequence, c: Sequence | None = None, maximize: bool = True) -> LpResult:
    """Optimise ``c . x`` subject to ``A x <= b`` and ``x >= 0``."""
    m = len(A)
    n = len(A[0]) if m else (len(c) if c is not None else 0)
    c = [Fraction(v) for v in (c if c is not None else [0] * n)]
    if not maximize:
        c = [-v for v in c]
    if m == 0:
        if any(v > 0 for v in c):
            return LpResult(UNBOUNDED)
        return LpResult(OPTIMAL, [Fraction(0)] * n, Fraction(0))
    d = _Dictionary(A, b, n)
    if min(d.rhs) < 0:
        # phase one: one auxiliary variable added to every row, maximise -x0
        aux = n + m
        d.nonbasic.append(aux)
        for row in d.coef:
            row.append(Fraction(1))
        d.obj = [Fraction(0)] * n + [Fraction(-1)]
        worst = min(range(m), key=lambda i: (d.rhs[i], d.basic[i]))
        d.pivot(worst, n)
        d.run()
        if d.z0 < 0:
            return LpResult(INFEASIBLE)
        if aux in d.basic:
            i = d.basic.index(aux)
            j = next(j for j, v in enumerate(d.coef[i]) if v and d.nonbasic[j] != aux)
            d.pivot(i, j)
        j = d.nonbasic.index(aux)
        d.nonbasic.pop(j)
        for row in d.coef:
            row.pop(j)
    d.obj = [Fraction(0)] * len(d.nonbasic)
    d.z0 = Fraction(0)
    col = {v: j for j, v in enumerate(d.nonbasic)}
    for v in range(n):
        if not c[v]:
            continue
        if v in col:
            d.obj[col[v]] += c[v]
        else:
            i = d.basic.index(v)
            d.z0 += c[v] * d.rhs[i]
            for k, w in enumerate(d.coef[i]):
                if w:
                    d.obj[k] += c[v] * w
    status = d.run()
    if status == UNBOUNDED:
        return LpResult(UNBOUNDED, d.values(n))
    value = d.z0 if maximize else -d.z0
    return LpResult(OPTIMAL, d.values(n), value)


def satisfies(A, b, x, tol=0) -> bool:
    """Check ``A x <= b`` and ``x >= 0`` by exact substitution."""
    if any(v < 0 for v in x):
        return False
    return all(sum(Fraction(a) * v for a, v in zip(row, x)) <= b_i for row, b_i in zip(A, b))


def farkas_certificate(A, b) -> list[Fraction] | None:
    """A vector ``y >= 0`` with ``y A >= 0`` and ``y b <= -1``, or None.

    Such a ``y`` exists exactly when ``A x <= b, x >= 0`` is infeasible.
    """
    m = len(A)
    if m == 0:
        return None
    n = len(A[0])
    rows = [[-Fraction(A[i][j]) for i in range(m)] for j in range(n)]
    rows.append([Fraction(v) for v in b])
    rhs = [0] * n + [-1]
    res = solve_lp(rows, rhs, [1] * m, maximize=False)
    if res.status != OPTIMAL:
        return None
    return res.x


def check_certificate(A, b, y) -> bool:
    """Re-check a Farkas certificate by substitution."""
    if len(y) != len(A) or any(v < 0 for v in y):
        return False
    n = len(A[0]) if A else 0
    for j in range(n):
        if sum(y[i] * A[i][j] for i in range(len(A))) < 0:
            return False
    return sum(yi * bi for yi, bi in zip(y, b)) < 0


def scale_to_integers(x: Sequence[Fraction]) -> tuple[list[int], int]:
    """Multiply by the lcm of the denominators; return the integers and the factor."""
    factor = 1
    for v in x:
        factor = math.lcm(factor, Fraction(v).denominator)
    return [int(Fraction(v) * factor) for v in x], factor
