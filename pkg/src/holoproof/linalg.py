"""Exact linear algebra over the rational-function field."""

from __future__ import annotations

from .arith import RF, RationalFunction


def _weight(r: RationalFunction) -> int:
    return len(r.num.monoms()) * 4 + len(r.den.monoms()) + r.num.total_degree() + r.den.total_degree()


def row_reduce(rows: list[list[RationalFunction]], ncols: int):
    """Reduced row echelon form. Returns (rows, pivot columns)."""
    m = [list(r) for r in rows]
    pivots: list[int] = []
    top = 0
    for col in range(ncols):
        best = None
        for i in range(top, len(m)):
            e = m[i][col]
            if not e.is_zero() and (best is None or _weight(e) < _weight(m[best][col])):
                best = i
        if best is None:
            continue
        m[top], m[best] = m[best], m[top]
        piv = m[top][col]
        if not piv.is_one():
            inv = piv.inverse()
            m[top] = [x * inv if not x.is_zero() else x for x in m[top]]
        prow = m[top]
        for i in range(len(m)):
            if i != top:
                f = m[i][col]
                if not f.is_zero():
                    m[i] = [x - f * p if not p.is_zero() else x for x, p in zip(m[i], prow)]
        pivots.append(col)
        top += 1
        if top == len(m):
            break
    return m[:top], pivots


def nullspace(rows: list[list[RationalFunction]], ncols: int) -> list[list[RationalFunction]]:
    """Basis of {x : rows * x = 0}."""
    red, pivots = row_reduce(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        x = [RF(0)] * ncols
        x[fc] = RF(1)
        for r, pc in zip(red, pivots):
            x[pc] = -r[fc]
        basis.append(x)
    return basis


def solve(columns: list[list[RationalFunction]], rhs: list[RationalFunction]):
    """Solve sum_j x_j * columns[j] = rhs; None if inconsistent (x arbitrary on free vars = 0)."""
    n = len(columns)
    dim = len(rhs)
    rows = [[columns[j][i] for j in range(n)] + [rhs[i]] for i in range(dim)]
    red, pivots = row_reduce(rows, n + 1)
    if n in pivots:
        return None
    x = [RF(0)] * n
    for r, pc in zip(red, pivots):
        x[pc] = r[n]
    return x


def first_dependency(vectors_iter, max_count: int):
    """Consume vectors w_0, w_1, ... and return (N, c) for the first N with
    w_N = sum_{i<N} c_i w_i, or None after ``max_count`` vectors.

    Maintains an incremental echelon basis so each new vector costs one
    reduction pass.
    """
    basis: list[tuple[int, list[RationalFunction], list[RationalFunction]]] = []
    # each entry: (pivot index, normalized vector, combination expressing it in w's)
    for N, w in enumerate(vectors_iter):
        if N >= max_count:
            return None
        vec = list(w)
        comb = [RF(0)] * N + [RF(1)]
        for piv, bv, bc in basis:
            f = vec[piv]
            if not f.is_zero():
                vec = [x - f * y if not y.is_zero() else x for x, y in zip(vec, bv)]
                comb = [x - f * (bc[i] if i < len(bc) else RF(0)) for i, x in enumerate(comb)]
        nz = [i for i, x in enumerate(vec) if not x.is_zero()]
        if not nz:
            # 0 = comb . w  ->  w_N = -sum comb_i w_i (comb_N = 1)
            return N, [-c for c in comb[:N]]
        piv = min(nz, key=lambda i: (_weight(vec[i]), i))
        inv = vec[piv].inverse()
        vec = [x * inv for x in vec]
        comb = [x * inv for x in comb]
        # keep earlier basis vectors reduced at this pivot
        new_basis = []
        for p2, bv, bc in basis:
            f = bv[piv]
            if not f.is_zero():
                bv = [x - f * y for x, y in zip(bv, vec)]
                bc = [(bc[i] if i < len(bc) else RF(0)) - f * comb[i] for i in range(len(comb))]
            new_basis.append((p2, bv, bc))
        basis = new_basis + [(piv, vec, comb)]
    return None
