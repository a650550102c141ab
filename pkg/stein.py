"""
Stein structure checks and Legendrian surgery certificates

Builds the integer feasibility problems behind the two sufficient conditions
for a shadow's thickening to carry a Stein structure, turns feasible lifts
into per-region framing and zig-zag data, enumerates the resulting classes in
H^2, and runs the branched-spine and minimal-genus corollaries.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from chain_algebra import (
    Cochain,
    PresentedGroup,
    boundary_rows,
    class_of,
    cohomology,
    is_cycle,
    pair,
    is_coboundary_mod2,
    solve_coboundary_mod2,
)
from config import Settings
from errors import (
    CochainError,
    EnumerationLimitError,
    InternalModelError,
    ShadowInputError,
    ValidationError,
)
from ilp import FEASIBLE, FeasibilityProblem, FeasibilityResult, solve_with_cap_policy
from invariants import (
    check_embedding_parity,
    euler_cochain,
    gleam_cochain,
    he_rewrite,
    integral_gleam_part,
    special_corner_counts,
    up_down_cochain,
)
from shadow_core import BranchedShadow, EmbeddingData, generate_pn, negate_gleams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SteinCertificate:
    """
    Legendrian surgery data for one shadow.

    `ud2` is the doubled lift UD per edge; per region, `framing` is the surgery
    coefficient k and `hplus`/`hminus` the positive/negative zig-zag counts.
    """

    ud2: tuple[int, ...]
    framing: tuple[int, ...]
    hplus: tuple[int, ...]
    hminus: tuple[int, ...]
    class_shift: Cochain

    def to_dict(self) -> dict:
        return {
            "ud2": list(self.ud2),
            "regions": [
                {"region": i, "framing": k, "hplus": p, "hminus": m}
                for i, (k, p, m) in enumerate(zip(self.framing, self.hplus, self.hminus))
            ],
            "class_shift": list(self.class_shift.values),
        }


@dataclass
class SteinCheck:
    verdict: str
    problem: FeasibilityProblem
    result: FeasibilityResult
    ud2: Optional[tuple[int, ...]] = None
    choice: Optional[tuple[int, ...]] = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "ud2": list(self.ud2) if self.ud2 is not None else None,
            "choice": list(self.choice) if self.choice is not None else None,
            "solver": self.result.to_dict(),
            "constraints": self.problem.to_dict(),
        }


def _region_constants(shadow: BranchedShadow) -> list[int]:
    """2*Eul_i + gleam2_i per region."""
    eul = euler_cochain(shadow)
    return [2 * n + g for n, g in zip(eul.values, gleam_cochain(shadow).values)]


def initial_cap(shadow: BranchedShadow) -> int:
    constants = _region_constants(shadow)
    return 2 * (1 + max((abs(c) for c in constants), default=0))


def build_mainteo_problem(shadow: BranchedShadow) -> FeasibilityProblem:
    """
    Feasibility problem for Eul + gl + delta(UD) <= 0 with UD a non-negative lift.

    Variables: one choice bit a_v per vertex (the Up&Down labelling), then
    t_e = 2*UD(e) >= 0 per edge. Parity rows: t_e + a_tail + a_head = ud(e)
    mod 2 for the all-zero labelling. One row per region plus the summed row.
    """
    shadow.require_standard("check_mainteo")
    ud0 = up_down_cochain(shadow).values
    rows = boundary_rows(shadow)
    constants = _region_constants(shadow)
    problem = FeasibilityProblem(f"{shadow.name}: Eul+gl+dUD<=0")
    choice = [problem.add_variable(f"a{v}", lower=0, upper=1) for v in range(shadow.n_vertices)]
    t = [problem.add_variable(f"t{e}", lower=0) for e in range(shadow.n_edges)]
    for i, const in enumerate(constants):
        coeffs = {t[e]: rows[e][i] for e in range(shadow.n_edges) if rows[e][i]}
        problem.add_inequality(coeffs, -const, label=f"region {i}")
    problem.add_inequality({t[e]: 1 for e in range(shadow.n_edges)}, -sum(constants), label="sum of regions")
    for edge in shadow.edges:
        indices = [t[edge.id]]
        if not edge.is_loop:
            indices += [choice[edge.tail[0]], choice[edge.head[0]]]
        problem.add_parity(indices, ud0[edge.id], label=f"parity edge {edge.id}")
    return problem


def check_mainteo(shadow: BranchedShadow, settings: Optional[Settings] = None) -> SteinCheck:
    """
    Decide the first Stein condition by integer feasibility.

    Returns:
        SteinCheck with the doubled witness lift `ud2` and the labelling it lifts
        when FEASIBLE
    """
    settings = settings or Settings()
    problem = build_mainteo_problem(shadow)
    cap = settings.cap or initial_cap(shadow)
    result = solve_with_cap_policy(problem, cap, max(cap, settings.cap_ceiling))
    check = SteinCheck(result.verdict, problem, result)
    if result.verdict == FEASIBLE:
        v = shadow.n_vertices
        check.choice = tuple(result.values[:v])
        check.ud2 = tuple(result.values[v:])
        logger.info("%s: lift %s over labelling %s", shadow.name, list(check.ud2), list(check.choice))
    return check


def build_genfo_problem(
    boundary: Sequence[Sequence[int]],
    iplus: Sequence[int],
    iminus: Sequence[int],
    u2: Sequence[int],
    name: str = "",
) -> FeasibilityProblem:
    """
    Feasibility problem for the second Stein condition.

    Args:
        boundary: Edge x region incidence rows
        iplus: I+ per region
        iminus: I- per region
        u2: Doubled lift U per edge

    Returns:
        Problem over b+_e then b-_e (free integers) with U + b+ + b- >= 0 per
        edge and I+/- + delta b+/- <= 0 per region
    """
    n_edges = len(boundary)
    n_regions = len(iplus)
    problem = FeasibilityProblem(name or "U+b>=0, I+db<=0")
    bplus = [problem.add_variable(f"bp{e}") for e in range(n_edges)]
    bminus = [problem.add_variable(f"bm{e}") for e in range(n_edges)]
    for e in range(n_edges):
        problem.add_inequality({bplus[e]: -2, bminus[e]: -2}, u2[e], label=f"lift edge {e}")
    for sign, variables, index in (("+", bplus, iplus), ("-", bminus, iminus)):
        for i in range(n_regions):
            coeffs = {variables[e]: boundary[e][i] for e in range(n_edges) if boundary[e][i]}
            problem.add_inequality(coeffs, -index[i], label=f"I{sign} region {i}")
    return problem


def check_genfo(
    shadow: BranchedShadow, emb: Optional[EmbeddingData] = None, settings: Optional[Settings] = None
) -> dict:
    """
    Decide the second Stein condition for embedded shadows.

    Open regions carry no index rows.
    """
    settings = settings or Settings()
    emb = emb or shadow.embedding
    if emb is None:
        raise ShadowInputError("shadow has no [embedding] section")
    check_embedding_parity(shadow, emb)
    closed = [r.id for r in shadow.regions if not r.open]
    rows = boundary_rows(shadow)
    problem = build_genfo_problem(
        [[row[i] for i in closed] for row in rows],
        [emb.iplus[i] for i in closed],
        [emb.iminus[i] for i in closed],
        emb.u2,
        name=f"{shadow.name}: U+b>=0, I+db<=0",
    )
    cap = settings.cap or 2 * (1 + max([abs(x) for x in emb.iplus + emb.iminus + emb.u2], default=0))
    result = solve_with_cap_policy(problem, cap, max(cap, settings.cap_ceiling))
    report = {
        "verdict": result.verdict,
        "solver": result.to_dict(),
        "constraints": problem.to_dict(),
        "warnings": list(result.warnings),
    }
    if result.verdict == FEASIBLE:
        e = shadow.n_edges
        bplus = Cochain(1, result.values[:e])
        bminus = Cochain(1, result.values[e:])
        rewritten = he_rewrite(shadow, emb, bplus, bminus)
        if any(rewritten.iplus[i] > 0 or rewritten.iminus[i] > 0 for i in closed) or min(rewritten.u2) < 0:
            raise InternalModelError("rewritten embedding data violates the sign conditions")
        report.update(
            {
                "bplus": list(bplus.values),
                "bminus": list(bminus.values),
                "rewritten": {
                    "iplus": list(rewritten.iplus),
                    "iminus": list(rewritten.iminus),
                    "u2": list(rewritten.u2),
                },
            }
        )
    return report


def _delta_lift(shadow: BranchedShadow, ud2: Sequence[int]) -> list[int]:
    rows = boundary_rows(shadow)
    return [sum(rows[e][i] * ud2[e] for e in range(shadow.n_edges)) for i in range(shadow.n_regions)]


def zigzag_bounds(shadow: BranchedShadow, ud2: Sequence[int]) -> list[int]:
    """Per region, h+ + h- = -(Eul + gl + delta UD)."""
    bounds = []
    for i, (const, d) in enumerate(zip(_region_constants(shadow), _delta_lift(shadow, ud2))):
        total = const + d
        if total % 2:
            raise InternalModelError(f"region {i}: 2Eul + gleam2 + delta(2UD) = {total} is odd")
        bounds.append(-total // 2)
    return bounds


def check_lift(shadow: BranchedShadow, ud2: Sequence[int]) -> tuple[int, ...]:
    """
    Validate a doubled Up&Down lift supplied by the caller.

    Args:
        shadow: Standard shadow
        ud2: One doubled value per edge

    Returns:
        The lift as a tuple of ints; a wrong length or a negative entry raises
        ShadowInputError, a parity no Up&Down cochain has raises u_parity
    """
    ud2 = tuple(int(x) for x in ud2)
    if len(ud2) != shadow.n_edges or min(ud2, default=0) < 0:
        raise ShadowInputError("lift needs one non-negative doubled value per edge")
    ud0 = up_down_cochain(shadow).values
    if not is_coboundary_mod2(shadow, [(x - d) % 2 for x, d in zip(ud2, ud0)]):
        raise ValidationError("u_parity", "lift parity is not that of any Up&Down cochain")
    return ud2


def emit_surgery_certificate(
    shadow: BranchedShadow, ud2: Sequence[int], splits: Optional[Sequence[tuple[int, int]]] = None
) -> SteinCertificate:
    """
    Surgery certificate from a feasible doubled lift.

    Args:
        shadow: Standard shadow
        ud2: Doubled non-negative lift of an Up&Down cochain
        splits: Per-region (h+, h-); defaults to all zig-zags positive

    Returns:
        The verified certificate
    """
    shadow.require_standard("emit_surgery_certificate")
    ud2 = check_lift(shadow, ud2)

    bounds = zigzag_bounds(shadow, ud2)
    if any(h < 0 for h in bounds):
        bad = next(i for i, h in enumerate(bounds) if h < 0)
        raise ShadowInputError(f"region {bad}: Eul + gl + delta UD is positive, no certificate exists for this lift")
    if splits is None:
        splits = [(h, 0) for h in bounds]
    if len(splits) != shadow.n_regions:
        raise ShadowInputError(f"expected {shadow.n_regions} splits, got {len(splits)}")
    for i, ((hp, hm), h) in enumerate(zip(splits, bounds)):
        if hp < 0 or hm < 0 or hp + hm != h:
            raise ShadowInputError(f"region {i}: split ({hp}, {hm}) must be non-negative with sum {h}")

    framing = tuple(-1 - h for h in bounds)
    special = special_corner_counts(shadow)
    delta = _delta_lift(shadow, ud2)
    for i, region in enumerate(shadow.regions):
        if framing[i] > -1:
            raise InternalModelError(f"region {i}: framing {framing[i]} above -1")
        # gl = k + c' + p with c' = -delta UD and p = 1 - Eul, doubled
        if region.gleam2 != 2 * framing[i] - delta[i] + special[i]:
            raise InternalModelError(f"region {i}: gleam recomputation from the certificate failed")
    return SteinCertificate(
        ud2=ud2,
        framing=framing,
        hplus=tuple(hp for hp, _ in splits),
        hminus=tuple(hm for _, hm in splits),
        class_shift=Cochain(2, tuple(-hm for _, hm in splits)),
    )


def split_count(bounds: Sequence[int]) -> int:
    count = 1
    for h in bounds:
        count *= h + 1
    return count


def enumerate_split_classes(group: PresentedGroup, bounds: Sequence[int], limit: int) -> dict:
    """
    Distinct classes of sum(-h-_i R_i) for 0 <= h-_i <= bounds[i].

    Returns:
        {"classes": [{"class": normal form, "hminus": first split}], "zero_splits": n, "splits": total}
    """
    total = split_count(bounds)
    if total > limit:
        raise EnumerationLimitError(f"{total} zig-zag splits exceed the enumeration limit {limit}")
    seen: dict[tuple, list[int]] = {}
    zero = 0
    for hminus in itertools.product(*(range(h + 1) for h in bounds)):
        form = group.normal_form([-h for h in hminus])
        if not any(form):
            zero += 1
            continue
        seen.setdefault(form, list(hminus))
    return {
        "classes": [{"class": list(form), "hminus": split} for form, split in seen.items()],
        "zero_splits": zero,
        "splits": total,
    }


def enumerate_stein_classes(
    shadow: BranchedShadow, ud2: Sequence[int], settings: Optional[Settings] = None
) -> dict:
    """Nonzero H^2 classes reachable by moving zig-zags from positive to negative."""
    settings = settings or Settings()
    shadow.require_standard("enumerate_stein_classes")
    bounds = zigzag_bounds(shadow, check_lift(shadow, ud2))
    if any(h < 0 for h in bounds):
        raise ShadowInputError("lift does not satisfy Eul + gl + delta UD <= 0")
    group = cohomology(shadow, 2)
    found = enumerate_split_classes(group, bounds, settings.enum_limit)
    found["bounds"] = bounds
    found["h2"] = group.to_dict()
    return found


def spine_report(shadow: BranchedShadow) -> dict:
    """
    Branched-spine corollary: with ud a mod-2 coboundary and Eul <= 0, both the
    flat-gleam shadow and its negation carry certificates with UD = 0.

    `is_spine` is the coboundary test alone. The certificates are built for the
    flat-gleam copy whatever the input gleams are, so `gleam_flat` only reports
    whether the input already is that copy.
    """
    shadow.require_standard("spine_report")
    ud0 = up_down_cochain(shadow).values
    choice = solve_coboundary_mod2(shadow, ud0)
    eul = euler_cochain(shadow).values
    report = {
        "is_spine": choice is not None,
        "gleam_flat": all(r.gleam2 == 0 for r in shadow.regions),
        "euler": list(eul),
        "spine_choice": choice,
        "certificates": None,
    }
    if choice is None:
        report["status"] = "not a spine"
        return report
    if any(n > 0 for n in eul):
        report["status"] = "condition not met"
        return report
    flat = shadow.with_gleams([0] * shadow.n_regions, name=f"{shadow.name}-flat")
    zero = (0,) * shadow.n_edges
    positive = emit_surgery_certificate(flat, zero)
    negative = emit_surgery_certificate(negate_gleams(flat), zero)
    boundary_euler = 2 * sum(eul)
    if boundary_euler > 0:
        raise InternalModelError(f"boundary Euler characteristic {boundary_euler} of a thickened spine is positive")
    report.update(
        {
            "status": "certificates emitted",
            "certificates": {"positive": positive.to_dict(), "negative": negative.to_dict()},
            "boundary_euler": boundary_euler,
        }
    )
    return report


def minimal_genus_check(shadow: BranchedShadow, z: Sequence[int], settings: Optional[Settings] = None) -> dict:
    """
    Adjunction check for a carried cycle.

    Args:
        shadow: Standard shadow
        z: Non-negative, nonzero cycle of regions

    Returns:
        Report with chi = <Eul, z>, the self-intersection <gl, z>, the verdict
        and the implied genus of a connected closed representative
    """
    shadow.require_standard("minimal_genus_check")
    z = [int(x) for x in z]
    if len(z) != shadow.n_regions:
        raise CochainError(f"cycle needs {shadow.n_regions} coefficients, got {len(z)}")
    if not any(z) or min(z) < 0:
        raise CochainError("carried cycle must be non-negative and nonzero")
    if not is_cycle(shadow, z):
        raise CochainError("chain is not a cycle")

    check = check_mainteo(shadow, settings)
    report = {"cycle": z, "stein": check.verdict}
    if check.verdict != FEASIBLE:
        report["status"] = "hypothesis unmet"
        return report
    chi = pair(shadow, euler_cochain(shadow), z)
    square2 = pair(shadow, gleam_cochain(shadow), z)
    square = pair(shadow, integral_gleam_part(shadow), z)
    if square2 != 2 * square:
        raise InternalModelError(f"gleam pairing {square2}/2 disagrees with its integral part {square}")
    c1 = chi + square
    tight = c1 <= 0
    report.update(
        {
            "status": "adjunction-tight" if tight else "not tight",
            "chi": chi,
            "self_intersection": square,
            "c1": c1,
            "tight": tight,
            "genus": (2 - chi) // 2 if chi % 2 == 0 else None,
        }
    )
    return report


def pn_report(n: int, settings: Optional[Settings] = None) -> dict:
    """
    Stein checks and class counts on P_n and on its negation.

    A one-region shadow has H^2 = 0, so the class counts are reported next to
    the number of admissible zig-zag splits.
    """
    settings = settings or Settings()
    shadow = generate_pn(n, settings)
    report = {"n": n, "vertices": shadow.n_vertices, "regions": shadow.n_regions, "gleam2": shadow.regions[0].gleam2}
    for label, target, expected in (
        ("positive", shadow, n - 1),
        ("negative", negate_gleams(shadow), max(n - 2, 0)),
    ):
        check = check_mainteo(target, settings)
        entry = {"verdict": check.verdict, "expected_min_classes": expected}
        if check.verdict == FEASIBLE:
            classes = enumerate_stein_classes(target, check.ud2, settings)
            found = len(classes["classes"])
            entry.update(
                {
                    "ud2": list(check.ud2),
                    "classes_found": found,
                    "zig_zag_splits": classes["splits"],
                    "shortfall": max(expected - found, 0),
                }
            )
        report[label] = entry
    return report
