"""
Exact integer feasibility

Small integer feasibility problems with linear inequalities, variable bounds
and mod-2 parity rows. The solver first looks for a rational Farkas
certificate of the linear relaxation (phase-1 simplex over Fractions with
Bland's rule), then propagates integer bounds and runs a deterministic
depth-first search inside a variable cap. Verdicts are FEASIBLE with a
re-verified witness, INFEASIBLE with a certificate, or UNKNOWN when the cap or
the node budget truncated the search.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from errors import InternalModelError, SolverError

logger = logging.getLogger(__name__)

FEASIBLE = "FEASIBLE"
INFEASIBLE = "INFEASIBLE"
UNKNOWN = "UNKNOWN"

DEFAULT_NODE_LIMIT = 200_000


@dataclass(frozen=True)
class Variable:
    name: str
    lower: Optional[int] = None
    upper: Optional[int] = None


@dataclass(frozen=True)
class Inequality:
    """sum(coeffs[j] * x_j) <= rhs"""

    coeffs: tuple[tuple[int, int], ...]
    rhs: int
    label: str = ""


@dataclass(frozen=True)
class ParityRow:
    """sum(x_j for j in indices) == residue (mod 2)"""

    indices: tuple[int, ...]
    residue: int
    label: str = ""


class FeasibilityProblem:
    """
    Integer variables, linear inequalities and parity rows.

    Variables are searched in the order they were added.
    """

    def __init__(self, name: str = ""):
        self.name = name
        self.variables: list[Variable] = []
        self.inequalities: list[Inequality] = []
        self.parities: list[ParityRow] = []

    def add_variable(self, name: str, lower: Optional[int] = None, upper: Optional[int] = None) -> int:
        if lower is not None and upper is not None and lower > upper:
            raise SolverError(f"variable {name}: lower bound {lower} exceeds upper bound {upper}")
        self.variables.append(Variable(name, lower, upper))
        return len(self.variables) - 1

    def add_inequality(self, coeffs: dict[int, int], rhs: int, label: str = ""):
        items = []
        for j, a in sorted(coeffs.items()):
            if not isinstance(a, int) or not isinstance(j, int):
                raise SolverError(f"constraint {label!r}: coefficients must be integers")
            if not (0 <= j < len(self.variables)):
                raise SolverError(f"constraint {label!r}: unknown variable index {j}")
            if a:
                items.append((j, a))
        if not isinstance(rhs, int):
            raise SolverError(f"constraint {label!r}: right-hand side must be an integer")
        self.inequalities.append(Inequality(tuple(items), rhs, label))

    def add_parity(self, indices: Iterable[int], residue: int, label: str = ""):
        counts: dict[int, int] = {}
        for j in indices:
            if not (0 <= j < len(self.variables)):
                raise SolverError(f"parity row {label!r}: unknown variable index {j}")
            counts[j] = counts.get(j, 0) + 1
        # repeated indices cancel in pairs
        kept = tuple(sorted(j for j, c in counts.items() if c % 2))
        self.parities.append(ParityRow(kept, residue % 2, label))

    def violations(self, values: Sequence[int]) -> list[str]:
        bad = []
        for j, var in enumerate(self.variables):
            if var.lower is not None and values[j] < var.lower:
                bad.append(f"{var.name} >= {var.lower}")
            if var.upper is not None and values[j] > var.upper:
                bad.append(f"{var.name} <= {var.upper}")
        for row in self.inequalities:
            if sum(a * values[j] for j, a in row.coeffs) > row.rhs:
                bad.append(row.label or "inequality")
        for row in self.parities:
            if sum(values[j] for j in row.indices) % 2 != row.residue:
                bad.append(row.label or "parity")
        return bad

    def to_dict(self) -> dict:
        names = [v.name for v in self.variables]
        return {
            "name": self.name,
            "variables": [{"name": v.name, "lower": v.lower, "upper": v.upper} for v in self.variables],
            "inequalities": [
                {"label": row.label, "coeffs": {names[j]: a for j, a in row.coeffs}, "rhs": row.rhs}
                for row in self.inequalities
            ],
            "parities": [
                {"label": row.label, "variables": [names[j] for j in row.indices], "residue": row.residue}
                for row in self.parities
            ],
        }


@dataclass
class FeasibilityResult:
    verdict: str
    cap: int
    values: Optional[tuple[int, ...]] = None
    witness: Optional[dict] = None
    certificate: Optional[dict] = None
    complete: bool = False
    nodes: int = 0
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "cap": self.cap,
            "witness": self.witness,
            "certificate": self.certificate,
            "complete": self.complete,
            "nodes": self.nodes,
        }


# -- relaxation -------------------------------------------------------------


def _relaxation_rows(problem: FeasibilityProblem) -> list[tuple[dict, int, str]]:
    rows = [(dict(row.coeffs), row.rhs, row.label or f"row {i}") for i, row in enumerate(problem.inequalities)]
    for j, var in enumerate(problem.variables):
        if var.lower is not None:
            rows.append(({j: -1}, -var.lower, f"{var.name} >= {var.lower}"))
        if var.upper is not None:
            rows.append(({j: 1}, var.upper, f"{var.name} <= {var.upper}"))
    return rows


def _pivot(tableau: list[list[Fraction]], r: int, c: int):
    pivot = tableau[r][c]
    tableau[r] = [x / pivot for x in tableau[r]]
    for i, row in enumerate(tableau):
        if i != r and row[c] != 0:
            factor = row[c]
            tableau[i] = [x - factor * y for x, y in zip(row, tableau[r])]


def farkas_certificate(problem: FeasibilityProblem) -> Optional[dict]:
    """
    Rational multipliers proving the linear relaxation infeasible.

    Looks for y >= 0 with y^T A = 0 and y^T b = -1 over the inequality rows and
    the finite variable bounds. Returns None when the relaxation is feasible.
    """
    rows = _relaxation_rows(problem)
    n = len(problem.variables)
    count = len(rows)
    if count == 0:
        return None
    # equality system: one row per variable, plus -b^T y = 1
    system = [[Fraction(rows[i][0].get(j, 0)) for i in range(count)] for j in range(n)]
    system.append([Fraction(-rows[i][1]) for i in range(count)])
    rhs = [Fraction(0)] * n + [Fraction(1)]
    p = n + 1
    tableau = [system[r] + [Fraction(int(c == r)) for c in range(p)] + [rhs[r]] for r in range(p)]
    basis = [count + r for r in range(p)]
    cost = [0] * count + [1] * p

    while True:
        entering = None
        for j in range(count + p):
            if j in basis:
                continue
            reduced = cost[j] - sum(cost[basis[r]] * tableau[r][j] for r in range(p))
            if reduced < 0:
                entering = j
                break
        if entering is None:
            break
        leaving = None
        for r in range(p):
            if tableau[r][entering] > 0:
                ratio = tableau[r][-1] / tableau[r][entering]
                if leaving is None or ratio < leaving[0] or (ratio == leaving[0] and basis[r] < basis[leaving[1]]):
                    leaving = (ratio, r)
        if leaving is None:
            raise InternalModelError("phase-1 simplex reported an unbounded direction")
        _pivot(tableau, leaving[1], entering)
        basis[leaving[1]] = entering

    if sum(cost[basis[r]] * tableau[r][-1] for r in range(p)) != 0:
        return None
    y = [Fraction(0)] * count
    for r in range(p):
        if basis[r] < count:
            y[basis[r]] = tableau[r][-1]

    combo = [sum(y[i] * rows[i][0].get(j, 0) for i in range(count)) for j in range(n)]
    if any(c != 0 for c in combo) or sum(y[i] * rows[i][1] for i in range(count)) != -1 or min(y) < 0:
        raise InternalModelError("Farkas multipliers failed verification")
    return {
        "kind": "farkas",
        "multipliers": [{"row": rows[i][2], "y": str(y[i])} for i in range(count) if y[i] != 0],
    }


# -- bounds and search ------------------------------------------------------


def propagate_bounds(problem: FeasibilityProblem, max_rounds: Optional[int] = None):
    """
    Integer bound propagation from the inequality rows.

    Returns (lower, upper, empty) with None for unbounded sides.
    """
    lo = [v.lower for v in problem.variables]
    hi = [v.upper for v in problem.variables]
    rounds = max_rounds if max_rounds is not None else 50 * (len(lo) + 1)
    for _ in range(rounds):
        changed = False
        for row in problem.inequalities:
            for j, a in row.coeffs:
                rest = 0
                for k, b in row.coeffs:
                    if k == j:
                        continue
                    bound = lo[k] if b > 0 else hi[k]
                    if bound is None:
                        rest = None
                        break
                    rest += b * bound
                if rest is None:
                    continue
                slack = row.rhs - rest
                if a > 0:
                    new = slack // a
                    if hi[j] is None or new < hi[j]:
                        hi[j] = new
                        changed = True
                else:
                    new = _ceil_div(slack, a)
                    if lo[j] is None or new > lo[j]:
                        lo[j] = new
                        changed = True
                if lo[j] is not None and hi[j] is not None and lo[j] > hi[j]:
                    return lo, hi, True
        if not changed:
            break
    return lo, hi, False


def _ceil_div(p: int, q: int) -> int:
    return -((-p) // q)


def _search(problem: FeasibilityProblem, lo: list[int], hi: list[int], node_limit: int):
    n = len(problem.variables)
    touching: list[list[int]] = [[] for _ in range(n)]
    for i, row in enumerate(problem.inequalities):
        for j, _ in row.coeffs:
            touching[j].append(i)
    # suffix[i][j]: least value of the row restricted to variables >= j
    suffix = []
    for row in problem.inequalities:
        tail = [0] * (n + 1)
        coeff = dict(row.coeffs)
        for j in range(n - 1, -1, -1):
            a = coeff.get(j, 0)
            tail[j] = tail[j + 1] + (min(a * lo[j], a * hi[j]) if a else 0)
        suffix.append(tail)
    closing: list[list[ParityRow]] = [[] for _ in range(n)]
    for row in problem.parities:
        if not row.indices:
            if row.residue:
                return None, 0, True
            continue
        closing[row.indices[-1]].append(row)

    if any(suffix[i][0] > row.rhs for i, row in enumerate(problem.inequalities)):
        return None, 0, True

    partial = [0] * len(problem.inequalities)
    values = [0] * n
    nodes = 0
    coeffs = [dict(row.coeffs) for row in problem.inequalities]

    def candidates(j):
        return sorted(range(lo[j], hi[j] + 1), key=lambda v: (abs(v), v))

    def dfs(j):
        nonlocal nodes
        if j == n:
            return True
        for v in candidates(j):
            nodes += 1
            if nodes > node_limit:
                raise _NodeBudget()
            values[j] = v
            ok = True
            for i in touching[j]:
                partial[i] += coeffs[i][j] * v
            for i in touching[j]:
                if partial[i] + suffix[i][j + 1] > problem.inequalities[i].rhs:
                    ok = False
                    break
            if ok:
                for row in closing[j]:
                    if sum(values[k] for k in row.indices) % 2 != row.residue:
                        ok = False
                        break
            if ok and dfs(j + 1):
                return True
            for i in touching[j]:
                partial[i] -= coeffs[i][j] * v
        return False

    try:
        found = dfs(0)
    except _NodeBudget:
        return None, nodes, False
    return (tuple(values) if found else None), nodes, True


class _NodeBudget(Exception):
    pass


def ilp_feasible(problem: FeasibilityProblem, cap: int, node_limit: int = DEFAULT_NODE_LIMIT) -> FeasibilityResult:
    """
    Decide an integer feasibility problem inside a variable cap.

    Args:
        problem: The problem
        cap: Bound on |x_j| for the search
        node_limit: Search node budget before giving up with UNKNOWN

    Returns:
        FeasibilityResult; a FEASIBLE witness is the least one in variable
        order, values ordered by (|v|, v)
    """
    if cap < 0:
        raise SolverError(f"cap must be non-negative, got {cap}")
    for row in problem.parities:
        if row.residue not in (0, 1):
            raise SolverError(f"parity row {row.label!r} has residue {row.residue}")

    certificate = farkas_certificate(problem)
    if certificate is not None:
        return FeasibilityResult(INFEASIBLE, cap, certificate=certificate, complete=True)

    lo, hi, empty = propagate_bounds(problem)
    if empty:
        return FeasibilityResult(
            INFEASIBLE, cap, certificate={"kind": "bounds", "lower": lo, "upper": hi}, complete=True
        )
    complete = all(l is not None and h is not None and -cap <= l and h <= cap for l, h in zip(lo, hi))
    search_lo = [max(-cap, l) if l is not None else -cap for l in lo]
    search_hi = [min(cap, h) if h is not None else cap for h in hi]
    if any(l > h for l, h in zip(search_lo, search_hi)):
        return FeasibilityResult(UNKNOWN, cap, complete=False)

    values, nodes, finished = _search(problem, search_lo, search_hi, node_limit)
    if values is not None:
        bad = problem.violations(values)
        if bad:
            raise InternalModelError(f"witness fails re-substitution: {', '.join(bad)}")
        witness = {v.name: x for v, x in zip(problem.variables, values)}
        return FeasibilityResult(FEASIBLE, cap, values=values, witness=witness, complete=complete, nodes=nodes)
    if finished and complete:
        return FeasibilityResult(
            INFEASIBLE,
            cap,
            certificate={"kind": "exhaustion", "lower": search_lo, "upper": search_hi, "nodes": nodes},
            complete=True,
            nodes=nodes,
        )
    return FeasibilityResult(UNKNOWN, cap, complete=False, nodes=nodes)


def solve_with_cap_policy(
    problem: FeasibilityProblem, cap: int, ceiling: int, node_limit: int = DEFAULT_NODE_LIMIT
) -> FeasibilityResult:
    """Run ilp_feasible, doubling the cap while the verdict is UNKNOWN and the ceiling allows."""
    warnings = []
    while True:
        result = ilp_feasible(problem, cap, node_limit)
        if result.verdict != UNKNOWN or cap >= ceiling:
            break
        new_cap = min(2 * cap, ceiling) if cap else 1
        message = f"{problem.name or 'problem'}: UNKNOWN at cap {cap}, retrying with cap {new_cap}"
        logger.warning(message)
        warnings.append(message)
        cap = new_cap
    if result.verdict == UNKNOWN:
        message = f"{problem.name or 'problem'}: UNKNOWN at cap ceiling {cap}"
        logger.warning(message)
        warnings.append(message)
    result.warnings = warnings
    return result
