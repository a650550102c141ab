"""
Integer cochain calculus of a branched shadow

Cochains on vertices, edges and regions, the boundary matrix and both
coboundaries, Smith normal form with unimodular transforms, and SNF-based
presentations of H^1 and H^2 with class-membership queries. All arithmetic is
exact; matrices are sympy integer matrices.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from sympy import Matrix, eye

from errors import CochainError
from shadow_core import BranchedShadow

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cochain:
    """
    Integer cochain of a given degree.

    `scale` 2 means the values are doubled half-integers.
    """

    degree: int
    values: tuple[int, ...]
    scale: int = 1

    def __post_init__(self):
        if self.degree not in (0, 1, 2):
            raise CochainError(f"cochain degree must be 0, 1 or 2, got {self.degree}")
        if self.scale not in (1, 2):
            raise CochainError(f"cochain scale must be 1 or 2, got {self.scale}")
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    @staticmethod
    def zero(degree: int, size: int, scale: int = 1) -> "Cochain":
        return Cochain(degree, (0,) * size, scale)

    @staticmethod
    def basis(degree: int, size: int, index: int) -> "Cochain":
        values = [0] * size
        values[index] = 1
        return Cochain(degree, tuple(values))

    def _compatible(self, other: "Cochain"):
        if not isinstance(other, Cochain):
            return NotImplemented
        if other.degree != self.degree or len(other.values) != len(self.values):
            raise CochainError(f"cannot combine degree {self.degree} and degree {other.degree} cochains")
        if other.scale != self.scale:
            raise CochainError("cannot combine cochains of different scale; convert with doubled() first")

    def __add__(self, other: "Cochain") -> "Cochain":
        self._compatible(other)
        return Cochain(self.degree, tuple(a + b for a, b in zip(self.values, other.values)), self.scale)

    def __sub__(self, other: "Cochain") -> "Cochain":
        self._compatible(other)
        return Cochain(self.degree, tuple(a - b for a, b in zip(self.values, other.values)), self.scale)

    def __neg__(self) -> "Cochain":
        return Cochain(self.degree, tuple(-a for a in self.values), self.scale)

    def __len__(self) -> int:
        return len(self.values)

    def doubled(self) -> "Cochain":
        """Same cochain written in doubled units."""
        if self.scale == 2:
            return self
        return Cochain(self.degree, tuple(2 * v for v in self.values), 2)

    def mod2(self) -> tuple[int, ...]:
        return tuple(v % 2 for v in self.values)

    def to_line(self) -> str:
        body = " ".join(f"{i}:{v}" for i, v in enumerate(self.values))
        return f"cochain {self.degree} {self.scale} {body}".rstrip()


def cell_count(shadow: BranchedShadow, degree: int) -> int:
    return (shadow.n_vertices, shadow.n_edges, shadow.n_regions)[degree]


def _expect(shadow: BranchedShadow, c: Cochain, degree: int):
    if c.degree != degree:
        raise CochainError(f"expected a degree {degree} cochain, got degree {c.degree}")
    if len(c.values) != cell_count(shadow, degree):
        raise CochainError(
            f"degree {degree} cochain has {len(c.values)} values, shadow has {cell_count(shadow, degree)} cells"
        )


def boundary_rows(shadow: BranchedShadow) -> list[list[int]]:
    """Boundary incidences as plain integer rows (edges x regions)."""
    rows = [[0] * shadow.n_regions for _ in range(shadow.n_edges)]
    for e in range(shadow.n_edges):
        for r, k in shadow.passages_of[e]:
            rows[e][r] += -1 if shadow.preferred[e] == (r, k) else 1
    return rows


def boundary_matrix(shadow: BranchedShadow) -> Matrix:
    """
    Edge x region incidence matrix.

    Entry (e, R) sums +1 over the non-preferred passages of R through e and -1
    over its preferred passage; every row sums to +1. The second homology is
    the kernel of the region-to-edge boundary this matrix describes.
    """
    return Matrix(boundary_rows(shadow))


def coboundary1(shadow: BranchedShadow, b: Cochain) -> Cochain:
    """
    Coboundary of an edge cochain.

    Args:
        shadow: Valid shadow
        b: Degree 1 cochain, scale kept

    Returns:
        Degree 2 cochain with (delta b)(R) = sum over edges of the boundary entry (e, R) times b(e)
    """
    _expect(shadow, b, 1)
    rows = boundary_rows(shadow)
    values = [0] * shadow.n_regions
    for e, row in enumerate(rows):
        if b.values[e]:
            for r, entry in enumerate(row):
                values[r] += entry * b.values[e]
    return Cochain(2, tuple(values), b.scale)


def coboundary0(shadow: BranchedShadow, a: Cochain) -> Cochain:
    """(delta a)(e) = a(branching head of e) - a(branching tail of e); zero on loops."""
    _expect(shadow, a, 0)
    if shadow.loop_edges:
        logger.warning("coboundary of vertex cochain sums both ends of loop edges %s", list(shadow.loop_edges))
    values = []
    for e in range(shadow.n_edges):
        values.append(a.values[shadow.branch_head(e)[0]] - a.values[shadow.branch_tail(e)[0]])
    return Cochain(1, tuple(values), a.scale)


def coboundary0_matrix(shadow: BranchedShadow) -> Matrix:
    m = [[0] * shadow.n_vertices for _ in range(shadow.n_edges)]
    for e in range(shadow.n_edges):
        m[e][shadow.branch_head(e)[0]] += 1
        m[e][shadow.branch_tail(e)[0]] -= 1
    return Matrix(shadow.n_edges, shadow.n_vertices, lambda i, j: m[i][j])


def format_matrix(matrix: Matrix) -> str:
    """Dense integer text block, one row per line."""
    return "\n".join(" ".join(str(int(matrix[i, j])) for j in range(matrix.cols)) for i in range(matrix.rows))


# -- Smith normal form ------------------------------------------------------


def _pivot(m: Matrix, s: int) -> Optional[tuple[int, int]]:
    best = None
    for i in range(s, m.rows):
        for j in range(s, m.cols):
            if m[i, j] != 0 and (best is None or abs(m[i, j]) < abs(m[best])):
                best = (i, j)
    return best


def smith_normal_form(matrix) -> tuple[Matrix, Matrix, Matrix]:
    """
    Smith normal form with transforms.

    Args:
        matrix: Integer matrix (anything sympy.Matrix accepts)

    Returns:
        (U, D, W) with D = U * M * W diagonal, d_1 | d_2 | ..., and U, W unimodular
    """
    m = Matrix(matrix).copy()
    rows, cols = m.shape
    left, right = eye(rows), eye(cols)

    for s in range(min(rows, cols)):
        pos = _pivot(m, s)
        if pos is None:
            break
        if pos[0] != s:
            m.row_swap(s, pos[0])
            left.row_swap(s, pos[0])
        if pos[1] != s:
            m.col_swap(s, pos[1])
            right.col_swap(s, pos[1])

        while True:
            moved = False
            for i in range(s + 1, rows):
                if m[i, s] != 0:
                    q = m[i, s] // m[s, s]
                    m.row_op(i, lambda val, col: val - q * m[s, col])
                    left.row_op(i, lambda val, col: val - q * left[s, col])
                    if m[i, s] != 0:
                        m.row_swap(s, i)
                        left.row_swap(s, i)
                        moved = True
                        break
            if moved:
                continue
            for j in range(s + 1, cols):
                if m[s, j] != 0:
                    q = m[s, j] // m[s, s]
                    m.col_op(j, lambda val, row: val - q * m[row, s])
                    right.col_op(j, lambda val, row: val - q * right[row, s])
                    if m[s, j] != 0:
                        m.col_swap(s, j)
                        right.col_swap(s, j)
                        moved = True
                        break
            if moved:
                continue
            # the pivot must divide the remaining block
            bad = next(
                (i for i in range(s + 1, rows) for j in range(s + 1, cols) if m[i, j] % m[s, s] != 0),
                None,
            )
            if bad is None:
                break
            m.row_op(s, lambda val, col: val + m[bad, col])
            left.row_op(s, lambda val, col: val + left[bad, col])

        if m[s, s] < 0:
            m.row_op(s, lambda val, col: -val)
            left.row_op(s, lambda val, col: -val)

    return left, m, right


def invariant_factors(matrix) -> list[int]:
    """Nonzero diagonal of the Smith normal form."""
    _, d, _ = smith_normal_form(matrix)
    return [int(d[i, i]) for i in range(min(d.shape)) if d[i, i] != 0]


# -- presentations ----------------------------------------------------------


class PresentedGroup:
    """
    Finitely generated abelian group given as the cokernel of an integer matrix.

    `chart` maps ambient cochain coordinates to generator coordinates (identity
    for H^2, the kernel chart of delta^1 for H^1).
    """

    def __init__(self, relations: Matrix, chart: Optional[Matrix] = None, label: str = ""):
        self.relations = relations
        self.generators = relations.rows
        self.chart = chart
        self.label = label
        u, d, _ = smith_normal_form(relations) if relations.cols else (eye(relations.rows), relations, None)
        self._u = u
        self.diagonal = tuple(int(d[i, i]) for i in range(min(d.shape)) if d[i, i] != 0)
        self.rank = self.generators - len(self.diagonal)
        self.torsion = tuple(x for x in self.diagonal if x > 1)

    def describe(self) -> str:
        parts = [f"Z/{t}" for t in self.torsion]
        if self.rank:
            parts.insert(0, "Z" if self.rank == 1 else f"Z^{self.rank}")
        return " + ".join(parts) if parts else "0"

    def normal_form(self, values: Sequence[int]) -> tuple[int, ...]:
        vec = Matrix(list(values))
        if self.chart is not None:
            vec = self.chart * vec
        if vec.rows != self.generators:
            raise CochainError(f"{self.label or 'group'} expects {self.generators} coordinates, got {vec.rows}")
        y = self._u * vec
        r = len(self.diagonal)
        torsion_part = [int(y[i]) % d for i, d in enumerate(self.diagonal) if d > 1]
        return tuple(torsion_part + [int(y[i]) for i in range(r, self.generators)])

    def is_zero(self, values: Sequence[int]) -> bool:
        return not any(self.normal_form(values))

    def to_dict(self) -> dict:
        return {
            "generators": self.generators,
            "rank": self.rank,
            "torsion": list(self.torsion),
            "diagonal": list(self.diagonal),
            "group": self.describe(),
        }


def _integral(c: Cochain):
    if c.scale != 1:
        raise CochainError("class queries need an integral cochain; convert with integral_gleam_part first")


def homology2(shadow: BranchedShadow) -> dict:
    """Second homology: rank of ker(boundary) and a Z-basis of cycles."""
    boundary = boundary_matrix(shadow)
    u, d, w = smith_normal_form(boundary)
    r = sum(1 for i in range(min(d.shape)) if d[i, i] != 0)
    basis = [[int(w[i, j]) for i in range(w.rows)] for j in range(r, w.cols)]
    return {"rank": len(basis), "basis": basis}


def cohomology(shadow: BranchedShadow, degree: int) -> PresentedGroup:
    """
    H^1 = ker(delta^1) / im(delta^0) or H^2 = coker(delta^1), presented via SNF.
    """
    delta1 = boundary_matrix(shadow).T
    if degree == 2:
        return PresentedGroup(delta1, label="H^2")
    if degree != 1:
        raise CochainError(f"cohomology is presented in degree 1 or 2, got {degree}")
    _, d, w = smith_normal_form(delta1)
    r = sum(1 for i in range(min(d.shape)) if d[i, i] != 0)
    w_inv = w.inv()
    chart = w_inv[r:, :]
    relations = chart * coboundary0_matrix(shadow)
    return PresentedGroup(relations, chart=chart, label="H^1")


def class_of(shadow: BranchedShadow, c: Cochain, group: Optional[PresentedGroup] = None) -> tuple[int, ...]:
    """Normal form of the cohomology class of an integral cocycle."""
    _integral(c)
    if c.degree not in (1, 2):
        raise CochainError(f"classes live in degree 1 or 2, got {c.degree}")
    _expect(shadow, c, c.degree)
    if c.degree == 1 and any(coboundary1(shadow, c).values):
        raise CochainError("degree 1 cochain is not a cocycle")
    group = group or cohomology(shadow, c.degree)
    return group.normal_form(c.values)


def classes_equal(shadow: BranchedShadow, c1: Cochain, c2: Cochain) -> bool:
    """
    Compare two integral cocycles in cohomology.

    Args:
        shadow: Valid shadow
        c1: Integral cocycle of degree 1 or 2
        c2: Integral cocycle of the same degree

    Returns:
        True when c1 - c2 is a coboundary
    """
    _integral(c1)
    _integral(c2)
    return not any(class_of(shadow, c1 - c2))


def solve_coboundary_mod2(shadow: BranchedShadow, bits: Sequence[int]) -> Optional[list[int]]:
    """
    Solve delta^0 a = bits over the field with two elements.

    Returns a vertex bit vector or None when `bits` is not a mod-2 coboundary.
    """
    if len(bits) != shadow.n_edges:
        raise CochainError(f"expected {shadow.n_edges} edge bits, got {len(bits)}")
    n = shadow.n_vertices
    # each row: (bitmask over vertices, rhs)
    rows = []
    for e in range(shadow.n_edges):
        mask = (1 << shadow.branch_head(e)[0]) ^ (1 << shadow.branch_tail(e)[0])
        rows.append([mask, bits[e] % 2])
    pivots = []
    rank = 0
    for col in range(n):
        sel = next((i for i in range(rank, len(rows)) if rows[i][0] >> col & 1), None)
        if sel is None:
            continue
        rows[rank], rows[sel] = rows[sel], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][0] >> col & 1:
                rows[i][0] ^= rows[rank][0]
                rows[i][1] ^= rows[rank][1]
        pivots.append(col)
        rank += 1
    if any(rhs for mask, rhs in rows[rank:]):
        return None
    solution = [0] * n
    for i, col in enumerate(pivots):
        solution[col] = rows[i][1]
    return solution


def is_coboundary_mod2(shadow: BranchedShadow, c) -> bool:
    """True when an edge cochain or bit vector is delta^0 of some vertex bit vector."""
    bits = c.values if isinstance(c, Cochain) else c
    return solve_coboundary_mod2(shadow, bits) is not None


def is_cycle(shadow: BranchedShadow, z: Sequence[int]) -> bool:
    rows = boundary_rows(shadow)
    return all(sum(row[r] * z[r] for r in range(len(z))) == 0 for row in rows)


def pair(shadow: BranchedShadow, c: Cochain, z: Sequence[int]) -> int:
    """
    Evaluate a region cochain on a cycle.

    Scale-2 cochains give the doubled value; on cycles it is always even.
    """
    _expect(shadow, c, 2)
    if len(z) != shadow.n_regions:
        raise CochainError(f"cycle needs {shadow.n_regions} coefficients, got {len(z)}")
    if not is_cycle(shadow, z):
        raise CochainError("chain is not a cycle")
    return sum(a * b for a, b in zip(c.values, z))

