"""Integer lattices in row Hermite normal form."""

from __future__ import annotations

from typing import Iterable, Sequence


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def hermite_normal_form(rows: Iterable[Sequence[int]], ncols: int | None = None) -> list[list[int]]:
    """Row-style HNF of the lattice spanned by ``rows``.

    The result has no zero rows, strictly increasing pivot columns, positive
    pivots, and every entry above a pivot reduced into ``[0, pivot)``.
    """
    mat = [list(r) for r in rows]
    if ncols is None:
        ncols = len(mat[0]) if mat else 0
    mat = [r for r in mat if any(r)]
    out: list[list[int]] = []
    col = 0
    while mat and col < ncols:
        nz = [r for r in mat if r[col] != 0]
        if not nz:
            col += 1
            continue
        rest = [r for r in mat if r[col] == 0]
        pivot = nz[0]
        for r in nz[1:]:
            g, x, y = _xgcd(pivot[col], r[col])
            a, b = pivot[col] // g, r[col] // g
            new_pivot = [x * p + y * q for p, q in zip(pivot, r)]
            new_r = [b * p - a * q for p, q in zip(pivot, r)]
            pivot = new_pivot
            if any(new_r):
                rest.append(new_r)
        if pivot[col] < 0:
            pivot = [-v for v in pivot]
        out.append(pivot)
        mat = [r for r in rest if any(r)]
        col += 1
    pivots = [_pivot_col(r) for r in out]
    # reduce entries above each pivot
    for i, (row, pc) in enumerate(zip(out, pivots)):
        p = row[pc]
        for j in range(i):
            q = out[j][pc] // p
            if q:
                out[j] = [a - q * b for a, b in zip(out[j], row)]
    return out


def _pivot_col(row: Sequence[int]) -> int:
    for j, v in enumerate(row):
        if v:
            return j
    raise ValueError("zero row has no pivot")


def reduce_vector(basis: Sequence[Sequence[int]], v: Sequence[int]) -> list[int]:
    """Canonical residue of v modulo the lattice given by an HNF basis.

    Two vectors are congruent modulo the lattice iff their residues agree.
    """
    v = list(v)
    for row in basis:
        pc = _pivot_col(row)
        q = v[pc] // row[pc]
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return v


def is_member(basis: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    """Membership by successive pivot reduction."""
    v = list(v)
    for row in basis:
        pc = _pivot_col(row)
        if v[pc] % row[pc]:
            return False
        q = v[pc] // row[pc]
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return not any(v)


def is_hnf(basis: Sequence[Sequence[int]]) -> bool:
    prev = -1
    pivots = []
    for row in basis:
        if not any(row):
            return False
        pc = _pivot_col(row)
        if pc <= prev or row[pc] <= 0:
            return False
        pivots.append(pc)
        prev = pc
    for i, pc in enumerate(pivots):
        p = basis[i][pc]
        for j in range(i):
            if not 0 <= basis[j][pc] < p:
                return False
    return True
