"""
Canonical cochains of a branched shadow

Up&Down cochains and their canonical lifts, the Euler cochain counted from
the maw field, the gleam cochain and its integral part, the c1 cochain,
Bishop index calculus and the rewriting of complex-point cochains along
edges.
"""

import logging
from typing import Optional, Sequence

from chain_algebra import (
    Cochain,
    boundary_matrix,
    class_of,
    coboundary0_matrix,
    coboundary1,
    cohomology,
    format_matrix,
    homology2,
    is_coboundary_mod2,
    pair,
)
from errors import InternalModelError, ShadowInputError, ValidationError
from shadow_core import BranchedShadow, EmbeddingData, abstract_base_stats

logger = logging.getLogger(__name__)

# Rotation of the maw field relative to the outward normal, in quarter turns,
# across a corner, keyed by (preferred before, preferred after). The field only
# turns where preferred-ness switches, a half turn against the boundary, so the
# preferred flags fix the table without reading the corner slots.
ROTATION_QUARTER_TURNS = {
    (False, False): 0,
    (True, True): 0,
    (False, True): -2,
    (True, False): -2,
}


def _choice(shadow: BranchedShadow, choice: Optional[Sequence[int]]) -> tuple[int, ...]:
    if choice is None:
        return (0,) * shadow.n_vertices
    choice = tuple(int(b) for b in choice)
    if len(choice) != shadow.n_vertices or any(b not in (0, 1) for b in choice):
        raise ShadowInputError(f"Up&Down choice needs one bit per vertex ({shadow.n_vertices}), got {list(choice)}")
    return choice


def up_down_cochain(shadow: BranchedShadow, choice: Optional[Sequence[int]] = None) -> Cochain:
    """
    Mod-2 edge cochain of an Up&Down labelling.

    Bit 0 at a vertex marks the vertical corner through slot 0 as "up", bit 1
    marks the other one. An edge gets 1 when the up/down labels of the vertical
    germs at its two ends disagree along the sheets of the edge.

    Args:
        shadow: Valid shadow
        choice: One bit per vertex (defaults to all zero)

    Returns:
        Degree 1 cochain with values in {0, 1}
    """
    choice = _choice(shadow, choice)
    values = []
    for edge in shadow.edges:
        ends = []
        for end, (v, s) in ((0, edge.tail), (1, edge.head)):
            model = shadow.vertex_models[v]
            corner = next(c for c in model.vertical if s in c)
            sheet = next(sh for sh in shadow.sheets[edge.id] if sh.corner_at(end) == corner)
            ends.append((sheet.ref, int(model.vertical[choice[v]] == corner)))
        (tail_sheet, up_tail), (head_sheet, up_head) = ends
        values.append(1 ^ up_tail ^ up_head ^ int(tail_sheet == head_sheet))
    return Cochain(1, tuple(values))


def canonical_lift(ud: Cochain) -> Cochain:
    """Doubled lift taking value 1/2 where ud is 1 and 0 elsewhere."""
    return Cochain(1, tuple(v % 2 for v in ud.values), scale=2)


def euler_cochain(shadow: BranchedShadow) -> Cochain:
    """
    Region-wise index sums of the maw field.

    Each region is a polygon with one side per passage; the field points
    inward on preferred sides and outward elsewhere, and turns by the
    ROTATION_QUARTER_TURNS amount at each corner.
    """
    shadow.require_standard("euler_cochain")
    values = []
    for region in shadow.regions:
        m = len(region.circuit)
        total = 0
        for k in range(m):
            before = shadow.is_preferred((region.id, k))
            after = shadow.is_preferred((region.id, (k + 1) % m))
            total += ROTATION_QUARTER_TURNS[(before, after)]
        if total % 4:
            raise InternalModelError(
                f"region {region.id}: maw rotation of {total} quarter turns is not a whole number of turns"
            )
        values.append(1 + total // 4)
    return Cochain(2, tuple(values))


def special_corner_counts(shadow: BranchedShadow) -> tuple[int, ...]:
    """
    Per region, the corners joining two incoming or two outgoing half-edges.

    Counted from the in/out slots of the vertex models. A corner is special
    exactly when preferred-ness switches across it, so the count is 2 - 2*Eul.
    """
    counts = [0] * shadow.n_regions
    for region in shadow.regions:
        for k in range(len(region.circuit)):
            v, x, y = shadow.corner_after((region.id, k))
            model = shadow.vertex_models[v]
            if model.is_in(x) == model.is_in(y):
                counts[region.id] += 1
    return tuple(counts)


def gleam_cochain(shadow: BranchedShadow) -> Cochain:
    """
    Doubled gleams as a region cochain.

    Args:
        shadow: Valid shadow

    Returns:
        Scale 2 degree 2 cochain; open regions contribute 0
    """
    return Cochain(2, tuple(0 if r.open else r.gleam2 for r in shadow.regions), scale=2)


def integral_gleam_part(shadow: BranchedShadow, choice: Optional[Sequence[int]] = None) -> Cochain:
    """gl_Z = gl - 1/2 delta(canonical lift of ud), integral by the parity law."""
    lift = canonical_lift(up_down_cochain(shadow, choice))
    doubled = gleam_cochain(shadow) - coboundary1(shadow, lift)
    odd = [i for i, v in enumerate(doubled.values) if v % 2 and not shadow.regions[i].open]
    if odd:
        raise ValidationError("parity", "gleam is not integral after the canonical shift", locus=f"region {odd[0]}")
    return Cochain(2, tuple(v // 2 for v in doubled.values))


def c1_cochain(shadow: BranchedShadow) -> Cochain:
    """Eul + gl, in doubled units."""
    return euler_cochain(shadow).doubled() + gleam_cochain(shadow)


def c1_evaluate(shadow: BranchedShadow, z: Sequence[int], choice: Optional[Sequence[int]] = None) -> int:
    """Exact value of c1 on a cycle, computed as <Eul + gl_Z, z>."""
    return pair(shadow, euler_cochain(shadow) + integral_gleam_part(shadow, choice), z)


def bishop_indices(chi: int, nu: int, c1: int) -> tuple[int, int]:
    """
    Total indices of positive and negative complex points of a region.

    Args:
        chi: Euler characteristic of the region
        nu: Normal Euler number contribution
        c1: Chern number of the region

    Returns:
        (I+, I-) = ((chi + nu + c1) / 2, (chi + nu - c1) / 2)
    """
    if (chi + nu + c1) % 2:
        raise ShadowInputError(f"chi + nu + c1 = {chi + nu + c1} must be even")
    return (chi + nu + c1) // 2, (chi + nu - c1) // 2


def check_embedding_parity(shadow: BranchedShadow, emb: EmbeddingData):
    """The lift U must be odd exactly on the edges of some Up&Down cochain."""
    ud = up_down_cochain(shadow)
    diff = [(u - d) % 2 for u, d in zip(emb.u2, ud.values)]
    if not is_coboundary_mod2(shadow, diff):
        raise ValidationError("u_parity", "u2 parity is not that of any Up&Down cochain")


def he_rewrite(shadow: BranchedShadow, emb: EmbeddingData, bplus: Cochain, bminus: Cochain) -> EmbeddingData:
    """
    Trade complex points across edges.

    Returns (I+ + delta b+, I- + delta b-, U + b+ + b-); the classes of I+ and
    I- are unchanged.
    """
    iplus = Cochain(2, emb.iplus)
    iminus = Cochain(2, emb.iminus)
    new_plus = iplus + coboundary1(shadow, bplus)
    new_minus = iminus + coboundary1(shadow, bminus)
    u2 = tuple(u + 2 * p + 2 * m for u, p, m in zip(emb.u2, bplus.values, bminus.values))
    h2 = cohomology(shadow, 2)
    if any(class_of(shadow, new_plus - iplus, h2)):
        raise InternalModelError("rewriting changed the class of I+")
    if any(class_of(shadow, new_minus - iminus, h2)):
        raise InternalModelError("rewriting changed the class of I-")
    return EmbeddingData(iplus=new_plus.values, iminus=new_minus.values, u2=u2)


def invariants_report(shadow: BranchedShadow, choice: Optional[Sequence[int]] = None) -> dict:
    """Per-region and per-edge invariants plus the homology and cohomology presentations."""
    shadow.require_standard("invariants")
    eul = euler_cochain(shadow)
    ud = up_down_cochain(shadow, choice)
    u2 = canonical_lift(ud)
    gl_z = integral_gleam_part(shadow, choice)
    special = special_corner_counts(shadow)
    h2 = homology2(shadow)
    logger.debug("%s: Eul %s, gl_Z %s", shadow.name, list(eul.values), list(gl_z.values))
    return {
        "regions": [
            {
                "region": r.id,
                "euler": eul.values[r.id],
                "gleam2": r.gleam2,
                "gl_z": gl_z.values[r.id],
                "z2": shadow.z2[r.id],
                "special_corners": special[r.id],
            }
            for r in shadow.regions
        ],
        "edges": [{"edge": e, "ud": ud.values[e], "u2": u2.values[e]} for e in range(shadow.n_edges)],
        "euler_sum": sum(eul.values),
        "homology2": {
            "rank": h2["rank"],
            "basis": h2["basis"],
            "c1": [c1_evaluate(shadow, z, choice) for z in h2["basis"]],
            "euler": [pair(shadow, eul, z) for z in h2["basis"]],
        },
        "cohomology1": cohomology(shadow, 1).to_dict(),
        "cohomology2": cohomology(shadow, 2).to_dict(),
        "abstract_base": abstract_base_stats(shadow),
        "cochains": [eul.to_line(), gleam_cochain(shadow).to_line(), ud.to_line(), u2.to_line()],
        "matrices": {
            "boundary": format_matrix(boundary_matrix(shadow)),
            "coboundary0": format_matrix(coboundary0_matrix(shadow)),
        },
    }
