"""Exact integer lattice reductions (Hermite normal form style)."""

from __future__ import annotations

from collections.abc import Sequence


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def row_hnf(rows: Sequence[Sequence[int]], dim: int) -> list[list[int]]:
    """Echelon basis of the row lattice with positive pivots."""
    work = [list(r) for r in rows if any(r)]
    basis: list[list[int]] = []
    col = 0
    while work and col < dim:
        nz = [r for r in work if r[col] != 0]
        if not nz:
            col += 1
            continue
        pivot = nz[0]
        for r in nz[1:]:
            g, x, y = _egcd(pivot[col], r[col])
            a, b = pivot[col] // g, r[col] // g
            new_pivot = [x * p + y * q for p, q in zip(pivot, r)]
            r[:] = [-b * p + a * q for p, q in zip(pivot, r)]
            pivot = new_pivot
        if pivot[col] < 0:
            pivot = [-p for p in pivot]
        for b_row in basis:
            if b_row[col] != 0:
                q = b_row[col] // pivot[col]
                b_row[:] = [p - q * s for p, s in zip(b_row, pivot)]
        basis.append(pivot)
        work = [r for r in work if r is not nz[0] and any(r) and r[col] == 0]
        work = [r for r in work if any(r)]
        col += 1
    return basis


def in_lattice(v: Sequence[int], basis: Sequence[Sequence[int]]) -> bool:
    v = list(v)
    for row in basis:
        col = next(i for i, x in enumerate(row) if x)
        if v[col] % row[col]:
            return False
        q = v[col] // row[col]
        v = [a - q * b for a, b in zip(v, row)]
    return not any(v)


def quotient_projection(rows: Sequence[Sequence[int]], dim: int) -> list[list[int]]:
    """Integer matrix P (dim x (dim - rank)) whose kernel on Z^dim is the
    rational span of ``rows`` intersected with Z^dim and which maps Z^dim
    onto Z^(dim - rank).

    Built from unimodular column operations M U = [B | 0]; P is the last
    columns of U.
    """
    m = [list(r) for r in rows]
    u = [[int(i == j) for j in range(dim)] for i in range(dim)]

    def combine(p: int, j: int, coeffs: tuple[int, int, int, int]) -> None:
        x, y, s, t = coeffs
        for mat in (m, u):
            for row in mat:
                cp, cj = row[p], row[j]
                row[p], row[j] = x * cp + y * cj, s * cp + t * cj

    pc = 0
    for row in m:
        if pc >= dim:
            break
        for j in range(pc + 1, dim):
            if row[j] == 0:
                continue
            a, b = row[pc], row[j]
            g, x, y = _egcd(a, b)
            combine(pc, j, (x, y, -b // g, a // g))
        if row[pc] == 0:
            # all remaining entries were zero
            continue
        pc += 1
    return [r[pc:] for r in u]


def apply_projection(v: Sequence[int], proj: Sequence[Sequence[int]]) -> list[int]:
    if not proj:
        return []
    width = len(proj[0])
    return [sum(v[i] * proj[i][k] for i in range(len(v))) for k in range(width)]
