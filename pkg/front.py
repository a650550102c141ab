"""
Legendrian fronts on a disc

Combinatorial wavefront diagrams (`.fr` files): oriented, cooriented closed
curves with crossings and cusps, their faces, cusp signs and
Thurston-Bennequin numbers, the gleams read off a local contribution table,
and the branched mapping cylinder shadow with its complex-point data.
"""

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from config import Settings
from errors import ShadowInputError, ValidationError
from invariants import canonical_lift, up_down_cochain
from shadow_core import BranchedShadow, Edge, EmbeddingData, Region

logger = logging.getLogger(__name__)

SIDES = ("L", "R")
CROSSING_PATTERNS = ("TT", "TF", "FT", "FF")
CUSP_PATTERNS = ("+beak", "+outside", "-beak", "-outside")

_ARC = re.compile(r"^([A-Za-z_][\w-]*)\.(\d+)([LR])$")
_NAME = re.compile(r"^[A-Za-z_][\w-]*$")


@dataclass(frozen=True)
class Curve:
    id: str
    reversed: bool
    coorient: str
    path: tuple[str, ...]


@dataclass(frozen=True)
class Face:
    id: str
    outer: bool
    # (curve, arc index, side of the arc the face lies on)
    boundary: tuple[tuple[str, int, str], ...]


def _other(side: str) -> str:
    return "R" if side == "L" else "L"


class FrontDiagram:
    """
    A validated front on a disc.

    Arc `c.k` runs from `path[k]` to `path[k+1]` of curve `c`. Each face lists
    its boundary as a closed walk with the face on the left, an arc side `L`
    meaning the face lies to the left of the arc in path order.
    """

    def __init__(
        self,
        name: str,
        curves: list[Curve],
        crossings: dict[str, int],
        cusps: dict[str, str],
        faces: list[Face],
    ):
        self.name = name
        self.curves = tuple(curves)
        self.crossings = dict(crossings)
        self.cusps = dict(cusps)
        self.faces = tuple(faces)
        self.curve_index = {c.id: i for i, c in enumerate(self.curves)}

        self._check_nodes()
        self._derive_coorientation()
        self._check_faces()
        self._check_euler()

    def _check_nodes(self):
        if len(self.curve_index) != len(self.curves):
            raise ValidationError("front", "duplicate curve id")
        clash = set(self.crossings) & set(self.cusps)
        if clash:
            raise ValidationError("front", f"node {sorted(clash)[0]} is both a crossing and a cusp")
        self.visits: dict[str, list[tuple[str, int]]] = {x: [] for x in self.crossings}
        cusp_seen: dict[str, tuple[str, int]] = {}
        for curve in self.curves:
            if not curve.path:
                raise ValidationError("front", "empty path", locus=f"curve {curve.id}")
            for pos, node in enumerate(curve.path):
                if node in self.crossings:
                    self.visits[node].append((curve.id, pos))
                elif node in self.cusps:
                    if node in cusp_seen:
                        raise ValidationError("front", f"cusp {node} visited twice", locus=f"curve {curve.id}")
                    cusp_seen[node] = (curve.id, pos)
                else:
                    raise ValidationError("front", f"undeclared node {node}", locus=f"curve {curve.id}")
            count = sum(1 for node in curve.path if node in self.cusps)
            if count % 2:
                raise ValidationError(
                    "front", f"{count} cusps: the coorientation cannot close up", locus=f"curve {curve.id}"
                )
        for x, seen in self.visits.items():
            if len(seen) != 2:
                raise ValidationError("front", f"crossing visited {len(seen)} times, expected 2", locus=f"crossing {x}")
        missing = set(self.cusps) - set(cusp_seen)
        if missing:
            raise ValidationError("front", f"cusp {sorted(missing)[0]} lies on no curve")
        self.cusp_position = cusp_seen

    def _derive_coorientation(self):
        # side of each arc (relative to path order) carrying the coorientation
        self.arc_coorient: dict[tuple[str, int], str] = {}
        for curve in self.curves:
            side = curve.coorient
            for k in range(len(curve.path)):
                if k and curve.path[k] in self.cusps:
                    side = _other(side)
                self.arc_coorient[(curve.id, k)] = side

    def arc_count(self, curve: str) -> int:
        return len(self.curves[self.curve_index[curve]].path)

    def arc_ends(self, curve: str, k: int) -> tuple[tuple[str, int], tuple[str, int]]:
        """Path positions (curve, pos) at the start and end of arc k in path order."""
        n = self.arc_count(curve)
        return (curve, k), (curve, (k + 1) % n)

    def node_at(self, position: tuple[str, int]) -> str:
        curve, pos = position
        return self.curves[self.curve_index[curve]].path[pos]

    def walk_ends(self, item: tuple[str, int, str]) -> tuple[tuple[str, int], tuple[str, int]]:
        """Start and end path positions of a face boundary item, walked with the face on the left."""
        curve, k, side = item
        start, end = self.arc_ends(curve, k)
        return (start, end) if side == "L" else (end, start)

    def _check_faces(self):
        used: dict[tuple[str, int, str], str] = {}
        outer = [f.id for f in self.faces if f.outer]
        if self.curves and len(outer) != 1:
            raise ValidationError("front", f"expected exactly one outer face, found {len(outer)}")
        if len({f.id for f in self.faces}) != len(self.faces):
            raise ValidationError("front", "duplicate face id")
        self.crossing_corners: dict[str, set] = {x: set() for x in self.crossings}
        for face in self.faces:
            if not face.boundary:
                raise ValidationError("front", "empty boundary", locus=f"face {face.id}")
            m = len(face.boundary)
            for i, item in enumerate(face.boundary):
                curve, k, side = item
                if curve not in self.curve_index or not (0 <= k < self.arc_count(curve)):
                    raise ValidationError("front", f"unknown arc {curve}.{k}", locus=f"face {face.id}")
                if item in used:
                    raise ValidationError(
                        "front", f"arc side {curve}.{k}{side} bounds faces {used[item]} and {face.id}"
                    )
                used[item] = face.id
                _, end = self.walk_ends(item)
                nxt = face.boundary[(i + 1) % m]
                if nxt[0] not in self.curve_index or not (0 <= nxt[1] < self.arc_count(nxt[0])):
                    continue
                start, _ = self.walk_ends(nxt)
                node = self.node_at(end)
                if self.node_at(start) != node:
                    raise ValidationError(
                        "front", f"boundary breaks between {curve}.{k} and {nxt[0]}.{nxt[1]}", locus=f"face {face.id}"
                    )
                if node in self.cusps:
                    if start != end:
                        raise ValidationError("front", f"boundary leaves the curve at cusp {node}", locus=f"face {face.id}")
                else:
                    if start == end:
                        raise ValidationError(
                            "front", f"boundary goes straight through crossing {node}", locus=f"face {face.id}"
                        )
                    # half-edges: (curve, arc, 1 at the arc's path end, 0 at its start)
                    corner = ((curve, k, int(side == "L")), (nxt[0], nxt[1], int(nxt[2] == "R")))
                    if corner in self.crossing_corners[node]:
                        raise ValidationError("front", "corner used twice", locus=f"crossing {node}")
                    self.crossing_corners[node].add(corner)
        expected = {(c.id, k, s) for c in self.curves for k in range(len(c.path)) for s in SIDES}
        if set(used) != expected:
            (curve, k, side) = sorted(expected - set(used))[0]
            raise ValidationError("front", f"arc side {curve}.{k}{side} bounds no face")
        for x, corners in self.crossing_corners.items():
            if len(corners) != 4:
                raise ValidationError("front", f"{len(corners)} face corners, expected 4", locus=f"crossing {x}")

    def components(self) -> int:
        parent = {c.id: c.id for c in self.curves}

        def find(a):
            while parent[a] != a:
                a = parent[a]
            return a

        for seen in self.visits.values():
            (c1, _), (c2, _) = seen
            parent[find(c1)] = find(c2)
        return len({find(c.id) for c in self.curves})

    def _check_euler(self):
        if not self.curves:
            return
        nodes = len(self.crossings) + len(self.cusps)
        arcs = sum(len(c.path) for c in self.curves)
        expected = 1 + self.components()
        if nodes - arcs + len(self.faces) != expected:
            raise ValidationError(
                "front",
                f"planar map has V - E + F = {nodes - arcs + len(self.faces)}, expected {expected}",
            )


# -- text format ------------------------------------------------------------


def _syntax(message: str, lineno: int, col: int = 1) -> ShadowInputError:
    return ShadowInputError(message, line=lineno, column=col)


def parse_front(text: str) -> FrontDiagram:
    """
    Parse `.fr` text.

    Grammar, one declaration per line (`#` starts a comment):

        front <name>
        curve <id> oriented <cw|ccw> coorient <L|R> path <node> ...
        crossing <id> sign <+|->
        cusp <id> side <L|R>
        face <id> [outer] boundary <curve>.<k><L|R> ...

    `ccw` orients the curve along its path, `cw` against it. `coorient` is the
    side of arc 0 (in path order) the coorientation points to; it flips at
    every cusp. A cusp's side is the side of the path its beak lies on.
    """
    name = None
    curves, faces = [], []
    crossings: dict[str, int] = {}
    cusps: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]
        if not tokens:
            continue
        words = [t for t, _ in tokens]
        keyword = words[0]
        if keyword == "front":
            if len(words) != 2:
                raise _syntax("expected 'front <name>'", lineno)
            name = words[1]
        elif keyword == "curve":
            if len(words) < 8 or words[2] != "oriented" or words[4] != "coorient" or words[6] != "path":
                raise _syntax("expected 'curve <id> oriented <cw|ccw> coorient <L|R> path <nodes>'", lineno)
            if words[3] not in ("cw", "ccw"):
                raise _syntax(f"orientation must be cw or ccw, got {words[3]!r}", lineno, tokens[3][1])
            if words[5] not in SIDES:
                raise _syntax(f"coorientation must be L or R, got {words[5]!r}", lineno, tokens[5][1])
            curves.append(Curve(words[1], words[3] == "cw", words[5], tuple(words[7:])))
        elif keyword == "crossing":
            if len(words) != 4 or words[2] != "sign" or words[3] not in ("+", "-"):
                raise _syntax("expected 'crossing <id> sign <+|->'", lineno)
            if words[1] in crossings:
                raise _syntax(f"duplicate crossing {words[1]}", lineno, tokens[1][1])
            crossings[words[1]] = 1 if words[3] == "+" else -1
        elif keyword == "cusp":
            if len(words) != 4 or words[2] != "side" or words[3] not in SIDES:
                raise _syntax("expected 'cusp <id> side <L|R>'", lineno)
            if words[1] in cusps:
                raise _syntax(f"duplicate cusp {words[1]}", lineno, tokens[1][1])
            cusps[words[1]] = words[3]
        elif keyword == "face":
            rest = words[2:]
            outer = bool(rest) and rest[0] == "outer"
            if outer:
                rest = rest[1:]
            if len(words) < 2 or not rest or rest[0] != "boundary":
                raise _syntax("expected 'face <id> [outer] boundary <arcs>'", lineno)
            boundary = []
            offset = len(words) - len(rest) + 1
            for tok, col in tokens[offset:]:
                m = _ARC.match(tok)
                if not m:
                    raise _syntax(f"bad arc side {tok!r}", lineno, col)
                boundary.append((m.group(1), int(m.group(2)), m.group(3)))
            faces.append(Face(words[1], outer, tuple(boundary)))
        else:
            raise _syntax(f"unknown keyword {keyword!r}", lineno, tokens[0][1])
    if name is None:
        raise ShadowInputError("missing 'front <name>' line")
    for ident in [c.id for c in curves] + list(crossings) + list(cusps):
        if not _NAME.match(ident):
            raise ShadowInputError(f"bad identifier {ident!r}")
    return FrontDiagram(name, curves, crossings, cusps, faces)


def load_front(path) -> FrontDiagram:
    return parse_front(Path(path).read_text(encoding="utf-8"))


# -- signs and framings -----------------------------------------------------


def cusp_signs(front: FrontDiagram) -> dict[str, int]:
    """Positive iff the cusp points to the left of the oriented curve."""
    signs = {}
    for cusp, (curve, _) in sorted(front.cusp_position.items()):
        left = front.cusps[cusp] == "L"
        if front.curves[front.curve_index[curve]].reversed:
            left = not left
        signs[cusp] = 1 if left else -1
    return signs


def writhe(front: FrontDiagram, curve: str) -> int:
    return sum(
        front.crossings[x]
        for x, seen in sorted(front.visits.items())
        if all(c == curve for c, _ in seen)
    )


def tb(front: FrontDiagram, curve: str) -> int:
    """Thurston-Bennequin number: writhe minus half the number of cusps."""
    if curve not in front.curve_index:
        raise ShadowInputError(f"unknown curve {curve}")
    path = front.curves[front.curve_index[curve]].path
    count = sum(1 for node in path if node in front.cusps)
    if count % 2:
        raise ValidationError("front", f"odd cusp count {count}", locus=f"curve {curve}")
    return writhe(front, curve) - count // 2


# -- gleams -----------------------------------------------------------------


def load_polyak_table(path=None) -> dict:
    """
    Read the local gleam contribution table.

    Values are stored in quarter units. The table must cover every crossing
    corner pattern and every cusp pattern.
    """
    path = Path(path) if path else Settings().polyak_table
    try:
        table = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ShadowInputError(f"cannot read gleam table {path}: {exc}") from exc
    for key, patterns in (("crossing", CROSSING_PATTERNS), ("cusp", CUSP_PATTERNS)):
        block = table.get(key)
        if not isinstance(block, dict):
            raise ShadowInputError(f"gleam table {path} has no {key!r} block")
        for pattern in patterns:
            if not isinstance(block.get(pattern), int):
                raise ShadowInputError(f"gleam table {path} misses pattern {key}/{pattern}")
    if not isinstance(table.get("annulus_per_cusp"), int):
        raise ShadowInputError(f"gleam table {path} misses annulus_per_cusp")
    return table


def _corner_contribution(front: FrontDiagram, face: Face, i: int, table: dict, signs: dict) -> int:
    item = face.boundary[i]
    nxt = face.boundary[(i + 1) % len(face.boundary)]
    _, end = front.walk_ends(item)
    node = front.node_at(end)
    if node in front.cusps:
        beak = item[2] == front.cusps[node]
        key = ("+" if signs[node] > 0 else "-") + ("beak" if beak else "outside")
        return table["cusp"][key]
    pattern = "".join("T" if side == front.arc_coorient[(c, k)] else "F" for c, k, side in (item, nxt))
    return table["crossing"][pattern]


def polyak_gleams(front: FrontDiagram, table: Optional[dict] = None) -> dict:
    """
    Doubled gleams of the faces and of the curve annuli.

    Faces: twice the sum of the local contributions minus twice the Euler
    characteristic (1 for a disc face); the outer face has no gleam. Annuli:
    annulus_per_cusp times the cusp count, giving -c/2 with the shipped table.
    """
    table = table or load_polyak_table()
    signs = cusp_signs(front)
    faces = {}
    for face in front.faces:
        if face.outer:
            faces[face.id] = None
            continue
        quarters = sum(_corner_contribution(front, face, i, table, signs) for i in range(len(face.boundary)))
        if quarters % 2:
            raise ShadowInputError(f"face {face.id}: contributions sum to {quarters}/4, not a half-integer")
        faces[face.id] = quarters // 2 - 2
    curves = {}
    for curve in front.curves:
        quarters = table["annulus_per_cusp"] * sum(1 for node in curve.path if node in front.cusps)
        if quarters % 2:
            raise ShadowInputError(f"curve {curve.id}: annulus gleam {quarters}/4 is not a half-integer")
        curves[curve.id] = quarters // 2
    return {"faces": faces, "curves": curves}


# -- mapping cylinder -------------------------------------------------------


def _orientation_positions(curve: Curve) -> list[int]:
    n = len(curve.path)
    return list(range(n)) if not curve.reversed else [(-i) % n for i in range(n)]


def _cylinder_edges(front: FrontDiagram):
    """
    Edges of the singular set: runs of arcs between crossings, along the curve orientation.

    Returns (edges as (tail position, head position), arc -> edge id).
    """
    edges = []
    arc_edge: dict[tuple[str, int], int] = {}
    for curve in front.curves:
        order = _orientation_positions(curve)
        n = len(order)
        starts = [i for i, pos in enumerate(order) if curve.path[pos] in front.crossings]
        if not starts:
            raise ValidationError(
                "non_standard", f"curve {curve.id} has no crossings, its mapping cylinder has no vertices"
            )
        i = starts[0]
        for _ in range(len(starts)):
            tail = order[i % n]
            while True:
                a, b = order[i % n], order[(i + 1) % n]
                arc = a if not curve.reversed else b
                arc_edge[(curve.id, arc)] = len(edges)
                i += 1
                if curve.path[b] in front.crossings:
                    break
            edges.append(((curve.id, tail), (curve.id, b)))
    return edges, arc_edge


def mapping_cylinder_shadow(front: FrontDiagram, table: Optional[dict] = None) -> BranchedShadow:
    """
    Branched mapping cylinder of the front projection.

    Vertices are the crossings (declaration order). Regions: one annulus per
    curve, oriented by the curve and carrying one free boundary circle, then
    one region per face oriented as the disc, the outer face open.
    """
    if not front.crossings:
        raise ValidationError("non_standard", "front has no crossings, its mapping cylinder has no vertices")
    gleams = polyak_gleams(front, table)
    vertex = {x: v for v, x in enumerate(front.crossings)}
    edge_ends, arc_edge = _cylinder_edges(front)

    next_slot = [0] * len(vertex)

    def slot(position):
        v = vertex[front.node_at(position)]
        s = next_slot[v]
        next_slot[v] += 1
        return v, s

    edges = []
    for e, (tail, head) in enumerate(edge_ends):
        edges.append(Edge(e, slot(tail), slot(head)))

    regions = []
    for curve in front.curves:
        circuit = []
        for pos in _orientation_positions(curve):
            arc = pos if not curve.reversed else (pos - 1) % len(curve.path)
            e = arc_edge[(curve.id, arc)]
            if not circuit or circuit[-1][0] != e:
                circuit.append((e, 1))
        if len(circuit) > 1 and circuit[0][0] == circuit[-1][0]:
            circuit.pop()
        regions.append(Region(len(regions), tuple(circuit), gleams["curves"][curve.id], False, 1))

    for face in front.faces:
        items = list(face.boundary)
        # rotate so the walk starts right after a crossing
        first = next(
            (i for i, item in enumerate(items) if front.node_at(front.walk_ends(item)[0]) in front.crossings), None
        )
        if first is None:
            raise ValidationError("non_standard", f"face {face.id} meets no crossing")
        items = items[first:] + items[:first]
        circuit = []
        for i, (curve, k, side) in enumerate(items):
            start, _ = front.walk_ends((curve, k, side))
            if i and front.node_at(start) in front.cusps:
                continue
            left_of_orientation = (side == "L") != front.curves[front.curve_index[curve]].reversed
            circuit.append((arc_edge[(curve, k)], 1 if left_of_orientation else -1))
        if face.outer:
            regions.append(Region(len(regions), tuple(circuit), None, True, 0))
        else:
            regions.append(Region(len(regions), tuple(circuit), gleams["faces"][face.id], False, 0))

    logger.info("%s: mapping cylinder with %d vertices, %d edges, %d regions", front.name, len(vertex), len(edges), len(regions))
    return BranchedShadow(f"{front.name}-cylinder", len(vertex), edges, regions)


def front_embedding(
    front: FrontDiagram, shadow: Optional[BranchedShadow] = None, convention: str = "proof"
) -> EmbeddingData:
    """
    Complex-point data of the mapping cylinder.

    Every cusp of the hyperbolic sign (negative under "statement", positive
    under "proof") puts one hyperbolic point on its curve's annulus, positive
    when the coorientation lies on the left of the oriented curve there. The
    lift U is the canonical lift of the all-zero Up&Down cochain.
    """
    if convention not in ("statement", "proof"):
        raise ShadowInputError(f"unknown cusp convention {convention!r}")
    shadow = shadow or mapping_cylinder_shadow(front)
    hyperbolic = -1 if convention == "statement" else 1
    iplus = [0] * shadow.n_regions
    iminus = [0] * shadow.n_regions
    signs = cusp_signs(front)
    for cusp, (curve_id, pos) in sorted(front.cusp_position.items()):
        if signs[cusp] != hyperbolic:
            continue
        curve = front.curves[front.curve_index[curve_id]]
        region = front.curve_index[curve_id]
        if not curve.reversed:
            left = front.arc_coorient[(curve_id, pos)] == "L"
        else:
            left = front.arc_coorient[(curve_id, (pos - 1) % len(curve.path))] == "R"
        if left:
            iplus[region] += 1
        else:
            iminus[region] += 1
    logger.warning("cusp convention %r: %d hyperbolic points", convention, sum(iplus) + sum(iminus))
    u2 = canonical_lift(up_down_cochain(shadow)).values
    return EmbeddingData(tuple(iplus), tuple(iminus), tuple(u2))
