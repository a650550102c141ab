"""
Branched shadows

Data model, `.bsh` parsing and serialization, validation and the derived
branching structure (preferred passages, vertex models, sheet tables) of
branched standard polyhedra with gleams. Also hosts the Z2-gleam, the branched
1->2 move, the join of non-preferred regions, the P_n generator and the
abstract base statistics.

Half-integer gleams are always stored doubled (`gleam2`).
"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from config import Settings
from errors import InternalModelError, MoveError, ShadowInputError, ValidationError

logger = logging.getLogger(__name__)

Slot = tuple[int, int]
Passage = tuple[int, int]
PassageRef = tuple[int, int]

SEED_FIXTURE = "seed_one_vertex.bsh"


@dataclass(frozen=True)
class Edge:
    id: int
    tail: Slot
    head: Slot

    @property
    def is_loop(self) -> bool:
        return self.tail[0] == self.head[0]


@dataclass(frozen=True)
class Region:
    id: int
    circuit: tuple[Passage, ...]
    gleam2: Optional[int] = 0
    open: bool = False
    free: int = 0

    @property
    def closed_disc(self) -> bool:
        return not self.open and self.free == 0


@dataclass(frozen=True)
class EmbeddingData:
    """Per-region index cochains I+/I- and the doubled lift U of an Up&Down cochain."""

    iplus: tuple[int, ...]
    iminus: tuple[int, ...]
    u2: tuple[int, ...]


@dataclass(frozen=True)
class Sheet:
    """One passage of a region through an edge, with its corners at both edge ends."""

    ref: PassageRef
    sign: int
    preferred: bool
    tail_corner: frozenset
    head_corner: frozenset

    def corner_at(self, end: int) -> frozenset:
        return self.tail_corner if end == 0 else self.head_corner


@dataclass(frozen=True)
class VertexModel:
    vertex: int
    in_slots: tuple[int, int]
    out_slots: tuple[int, int]
    strands: tuple[tuple[int, int], tuple[int, int]]
    vertical: tuple[frozenset, frozenset]
    cyclic_order: tuple[int, int, int, int]
    # (arrival slot, departure slot) -> owning passage ref, for every corner
    traversals: dict = field(compare=False, hash=False)
    flagged: bool = False

    def is_in(self, slot: int) -> bool:
        return slot in self.in_slots

    def next_slot(self, slot: int) -> int:
        i = self.cyclic_order.index(slot)
        return self.cyclic_order[(i + 1) % 4]


def passage_ends(edge: Edge, sign: int) -> tuple[Slot, Slot]:
    """Return (start, end) endpoints of a passage travelling along `edge` with `sign`."""
    return (edge.tail, edge.head) if sign > 0 else (edge.head, edge.tail)


class BranchedShadow:
    """
    A validated branched polyhedron with gleams.

    Construction validates every structural invariant and populates the derived
    branching data. Instances are never mutated afterwards; moves return new
    shadows.
    """

    def __init__(
        self,
        name: str,
        n_vertices: int,
        edges: Sequence[Edge],
        regions: Sequence[Region],
        embedding: Optional[EmbeddingData] = None,
        transfer_log: Iterable[dict] = (),
        check_parity: bool = True,
    ):
        """
        Build and validate a shadow.

        Args:
            name: Shadow name
            n_vertices: Number of vertices
            edges: Edges ordered by id
            regions: Regions ordered by id
            embedding: Optional embedding data (I+, I-, U lift)
            transfer_log: Gleam transfer records left by the move that produced this shadow
            check_parity: Enforce the gleam parity law (moves switch it off while fixing gleams)
        """
        self.name = name
        self.n_vertices = n_vertices
        self.edges = tuple(edges)
        self.regions = tuple(regions)
        self.embedding = embedding
        self.transfer_log = tuple(transfer_log)

        self._check_ids()
        self._check_slots()
        self._collect_passages()
        self._check_branching()
        self._derive_corners()
        self._derive_vertex_models()
        self._check_connected()
        self._check_embedding()
        self._z2 = tuple(self._monodromy(r.id) for r in self.regions)
        if check_parity:
            self._check_parity()

    # -- validation -----------------------------------------------------

    def _check_ids(self):
        if self.n_vertices < 0:
            raise ValidationError("ids", "vertex count must be non-negative")
        for i, edge in enumerate(self.edges):
            if edge.id != i:
                raise ValidationError("ids", f"edge ids must be contiguous from 0, found {edge.id} at {i}", locus=f"edge {edge.id}")
        for i, region in enumerate(self.regions):
            if region.id != i:
                raise ValidationError("ids", f"region ids must be contiguous from 0, found {region.id} at {i}", locus=f"region {region.id}")
            if not region.circuit:
                raise ValidationError("circuit", "empty circuit", locus=f"region {region.id}")
            if region.free < 0:
                raise ValidationError("ids", "free boundary count must be non-negative", locus=f"region {region.id}")
            if region.open and region.gleam2 is not None:
                raise ValidationError("ids", "open regions carry no gleam", locus=f"region {region.id}")
            if not region.open and region.gleam2 is None:
                raise ValidationError("ids", "closed regions need a gleam", locus=f"region {region.id}")

    def _check_slots(self):
        used: dict[Slot, int] = {}
        for edge in self.edges:
            for end in (edge.tail, edge.head):
                v, s = end
                if not (0 <= v < self.n_vertices) or s not in (0, 1, 2, 3):
                    raise ValidationError("slot", f"endpoint {v}.{s} out of range", locus=f"edge {edge.id}")
                if end in used:
                    raise ValidationError(
                        "slot", f"slot {v}.{s} used by edges {used[end]} and {edge.id}", locus=f"vertex {v}"
                    )
                used[end] = edge.id
        for v in range(self.n_vertices):
            for s in range(4):
                if (v, s) not in used:
                    raise ValidationError("slot", f"slot {v}.{s} is not used by any edge", locus=f"vertex {v}")
        self._slot_edge = used

    def _collect_passages(self):
        self.passages_of: list[list[PassageRef]] = [[] for _ in self.edges]
        for region in self.regions:
            for k, (e, sign) in enumerate(region.circuit):
                if not (0 <= e < len(self.edges)):
                    raise ValidationError("dangling", f"circuit references unknown edge {e}", locus=f"region {region.id}")
                if sign not in (1, -1):
                    raise ValidationError("circuit", f"bad direction {sign} on edge {e}", locus=f"region {region.id}")
                self.passages_of[e].append((region.id, k))
        for edge in self.edges:
            count = len(self.passages_of[edge.id])
            if count != 3:
                raise ValidationError("passages", f"edge occurs in {count} passages, expected 3", locus=f"edge {edge.id}")

    def _check_branching(self):
        orientation = []
        preferred = []
        for edge in self.edges:
            signs = [self.passage(ref)[1] for ref in self.passages_of[edge.id]]
            total = sum(signs)
            if abs(total) == 3:
                raise ValidationError(
                    "branching", "all three passages induce the same orientation", locus=f"edge {edge.id}"
                )
            sigma = 1 if total > 0 else -1
            orientation.append(sigma)
            preferred.append(next(ref for ref in self.passages_of[edge.id] if self.passage(ref)[1] != sigma))
        self.orientation = tuple(orientation)
        self.preferred = tuple(preferred)

    def _derive_corners(self):
        # corner_after[(r, k)] = (vertex, arrival slot, departure slot) between passages k and k+1
        corner_after: dict[PassageRef, tuple[int, int, int]] = {}
        seen: dict[tuple[int, frozenset], PassageRef] = {}
        for region in self.regions:
            m = len(region.circuit)
            for k in range(m):
                e1, s1 = region.circuit[k]
                e2, s2 = region.circuit[(k + 1) % m]
                _, (v, x) = passage_ends(self.edges[e1], s1)
                (w, y), _ = passage_ends(self.edges[e2], s2)
                if v != w:
                    raise ValidationError(
                        "circuit",
                        f"passages {k} and {(k + 1) % m} do not meet (vertex {v} vs {w})",
                        locus=f"region {region.id}",
                    )
                if x == y:
                    raise ValidationError(
                        "circuit", f"passage {k} turns back through slot {v}.{x}", locus=f"region {region.id}"
                    )
                key = (v, frozenset((x, y)))
                if key in seen:
                    raise ValidationError(
                        "corner",
                        f"corner {{{min(x, y)},{max(x, y)}}} traversed twice (regions {seen[key][0]} and {region.id})",
                        locus=f"vertex {v}",
                    )
                seen[key] = (region.id, k)
                corner_after[(region.id, k)] = (v, x, y)
        for v in range(self.n_vertices):
            count = sum(1 for (w, _) in seen if w == v)
            if count != 6:
                raise ValidationError("corner", f"{count} corners traversed, expected 6", locus=f"vertex {v}")
        self._corner_after = corner_after

        sheets: list[tuple[Sheet, ...]] = []
        for edge in self.edges:
            row = []
            for ref in self.passages_of[edge.id]:
                r, k = ref
                m = len(self.regions[r].circuit)
                sign = self.passage(ref)[1]
                _, a, b = corner_after[(r, (k - 1) % m)]
                start_corner = frozenset((a, b))
                _, a, b = corner_after[ref]
                end_corner = frozenset((a, b))
                tail_corner, head_corner = (start_corner, end_corner) if sign > 0 else (end_corner, start_corner)
                row.append(
                    Sheet(
                        ref=ref,
                        sign=sign,
                        preferred=ref == self.preferred[edge.id],
                        tail_corner=tail_corner,
                        head_corner=head_corner,
                    )
                )
            sheets.append(tuple(row))
        self.sheets = tuple(sheets)

        # (edge, 0 for tail / 1 for head, corner) -> passage owning that corner at that end
        self._end_corner_owner: dict[tuple[int, int, frozenset], PassageRef] = {}
        for e, row in enumerate(self.sheets):
            for sheet in row:
                self._end_corner_owner[(e, 0, sheet.tail_corner)] = sheet.ref
                self._end_corner_owner[(e, 1, sheet.head_corner)] = sheet.ref

    def _derive_vertex_models(self):
        traversals: list[dict] = [{} for _ in range(self.n_vertices)]
        for ref, (v, x, y) in self._corner_after.items():
            traversals[v][(x, y)] = ref

        models = []
        for v in range(self.n_vertices):
            ins, outs = [], []
            for s in range(4):
                e = self._slot_edge[(v, s)]
                edge = self.edges[e]
                branch_head = edge.head if self.orientation[e] > 0 else edge.tail
                (ins if branch_head == (v, s) else outs).append(s)
            if len(ins) != 2:
                raise ValidationError(
                    "valence", f"{len(ins)} incoming and {len(outs)} outgoing half-edges", locus=f"vertex {v}"
                )
            i1, i2 = ins
            o1, o2 = outs
            qualified = [
                pairing
                for pairing in (((i1, o1), (i2, o2)), ((i1, o2), (i2, o1)))
                if all((i, o) in traversals[v] for i, o in pairing)
            ]
            if not qualified:
                raise ValidationError(
                    "vertex_model", "no strand pairing is non-preferred on both edges", locus=f"vertex {v}"
                )
            strands = min(qualified)
            flagged = len(qualified) > 1
            if flagged:
                logger.warning("vertex %d admits two strand pairings, using %s", v, strands)

            vertical = tuple(sorted((frozenset(s) for s in strands), key=min))
            horizontal = {
                frozenset((x, y)) for (x, y) in traversals[v] if frozenset((x, y)) not in vertical
            }
            # walk the horizontal 4-cycle starting along the in-in corner
            x, y = next((a, b) for (a, b) in traversals[v] if a in ins and b in ins)
            order = [x, y]
            while len(order) < 4:
                last, prev = order[-1], order[-2]
                order.append(next(z for z in range(4) if z != prev and frozenset((last, z)) in horizontal))
            start = order.index(0)
            models.append(
                VertexModel(
                    vertex=v,
                    in_slots=(i1, i2),
                    out_slots=(o1, o2),
                    strands=strands,
                    vertical=vertical,
                    cyclic_order=tuple(order[start:] + order[:start]),
                    traversals=traversals[v],
                    flagged=flagged,
                )
            )
        self.vertex_models = tuple(models)

    def _check_connected(self):
        parent = list(range(self.n_vertices))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for edge in self.edges:
            parent[find(edge.tail[0])] = find(edge.head[0])
        roots = {find(v) for v in range(self.n_vertices)}
        if len(roots) > 1:
            raise ValidationError("disconnected", f"singular graph has {len(roots)} components")

    def _check_embedding(self):
        emb = self.embedding
        if emb is None:
            return
        if len(emb.iplus) != len(self.regions) or len(emb.iminus) != len(self.regions):
            raise ValidationError("ids", "embedding index cochains must have one entry per region")
        if len(emb.u2) != len(self.edges):
            raise ValidationError("ids", "embedding lift must have one entry per edge")

    def _check_parity(self):
        for region in self.regions:
            if not region.closed_disc:
                continue
            if region.gleam2 % 2 != self._z2[region.id]:
                raise ValidationError(
                    "parity",
                    f"gleam2 {region.gleam2} has the wrong parity for Z2-gleam {self._z2[region.id]}",
                    locus=f"region {region.id}",
                )

    def _monodromy(self, r: int) -> int:
        circuit = self.regions[r].circuit
        m = len(circuit)
        lookup = self._end_corner_owner
        e0 = circuit[0][0]
        start = next(ref for ref in self.passages_of[e0] if ref != (r, 0))
        current = start
        for k in range(m):
            e, sign = circuit[k]
            end = 1 if sign > 0 else 0
            h = self.edges[e].head[1] if end == 1 else self.edges[e].tail[1]
            corner = self.sheet(current).corner_at(end)
            (a,) = corner - {h}
            e2, sign2 = circuit[(k + 1) % m]
            entry = 0 if sign2 > 0 else 1
            h2 = self.edges[e2].tail[1] if entry == 0 else self.edges[e2].head[1]
            current = lookup[(e2, entry, frozenset((h2, a)))]
        return 0 if current == start else 1

    # -- accessors ------------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    @property
    def standard(self) -> bool:
        return self.n_vertices >= 1 and all(r.closed_disc for r in self.regions)

    @property
    def z2(self) -> tuple[int, ...]:
        return self._z2

    @property
    def loop_edges(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.edges if e.is_loop)

    def passage(self, ref: PassageRef) -> Passage:
        r, k = ref
        return self.regions[r].circuit[k]

    def sheet(self, ref: PassageRef) -> Sheet:
        e = self.passage(ref)[0]
        return next(s for s in self.sheets[e] if s.ref == ref)

    def is_preferred(self, ref: PassageRef) -> bool:
        return self.preferred[self.passage(ref)[0]] == ref

    def corner_after(self, ref: PassageRef) -> tuple[int, int, int]:
        """(vertex, arrival slot, departure slot) of the corner following passage `ref`."""
        return self._corner_after[ref]

    def branch_tail(self, e: int) -> Slot:
        edge = self.edges[e]
        return edge.tail if self.orientation[e] > 0 else edge.head

    def branch_head(self, e: int) -> Slot:
        edge = self.edges[e]
        return edge.head if self.orientation[e] > 0 else edge.tail

    def require_standard(self, operation: str):
        if not self.standard:
            raise ValidationError(
                "non_standard", f"{operation} needs a standard shadow (vertices, closed disc regions only)"
            )

    def with_gleams(self, gleam2: Sequence[Optional[int]], name: Optional[str] = None) -> "BranchedShadow":
        regions = [
            Region(r.id, r.circuit, None if r.open else g, r.open, r.free) for r, g in zip(self.regions, gleam2)
        ]
        return BranchedShadow(name or self.name, self.n_vertices, self.edges, regions, self.embedding)

    def with_embedding(self, embedding: Optional[EmbeddingData]) -> "BranchedShadow":
        return BranchedShadow(self.name, self.n_vertices, self.edges, self.regions, embedding)


def z2_gleam(shadow: BranchedShadow, region: int) -> int:
    """
    Return the Z2-gleam of a region.

    Walks the region's circuit carrying one of the two other sheets of the
    current edge; at each vertex the sheet with corner {h, x} continues as the
    sheet with corner {h', x}. Returns 1 iff the carried sheet comes back
    swapped.
    """
    if not (0 <= region < shadow.n_regions):
        raise ShadowInputError(f"unknown region {region}")
    return shadow.z2[region]


def negate_gleams(shadow: BranchedShadow) -> BranchedShadow:
    """Shadow of the reversed ambient orientation: every gleam changes sign."""
    gleams = [None if r.open else -r.gleam2 for r in shadow.regions]
    return shadow.with_gleams(gleams, name=f"{shadow.name}-negated")


# -- text format ------------------------------------------------------------

_TOKEN = re.compile(r"\S+")
_SLOT = re.compile(r"^(\d+)\.(\d+)$")
_PASSAGE = re.compile(r"^(\d+)([+-])$")


def _int_token(tok: str, line: int, col: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError as exc:
        raise ShadowInputError(f"expected integer {what}, got {tok!r}", line=line, column=col) from exc


def parse_shadow(text: str) -> BranchedShadow:
    """
    Parse `.bsh` text into a validated BranchedShadow.

    Args:
        text: Shadow file contents

    Returns:
        The validated shadow with derived data populated
    """
    name = None
    n_vertices = None
    edges: dict[int, Edge] = {}
    regions: dict[int, Region] = {}
    emb: dict[str, dict[int, int]] = {"iplus": {}, "iminus": {}, "u2": {}}
    in_embedding = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(stripped)]
        if not tokens:
            continue
        (word, col), rest = tokens[0], tokens[1:]

        if in_embedding:
            if word not in emb or len(rest) != 2:
                raise ShadowInputError(
                    f"expected 'iplus|iminus <region> <int>' or 'u2 <edge> <int>', got {word!r}", line=lineno, column=col
                )
            key = _int_token(rest[0][0], lineno, rest[0][1], "id")
            emb[word][key] = _int_token(rest[1][0], lineno, rest[1][1], "value")
            continue

        if word == "[embedding]":
            in_embedding = True
        elif word == "shadow":
            if len(rest) != 1:
                raise ShadowInputError("expected 'shadow <name>'", line=lineno, column=col)
            name = rest[0][0]
        elif word == "vertices":
            if len(rest) != 1:
                raise ShadowInputError("expected 'vertices <V>'", line=lineno, column=col)
            n_vertices = _int_token(rest[0][0], lineno, rest[0][1], "vertex count")
        elif word == "edge":
            if len(rest) != 3:
                raise ShadowInputError("expected 'edge <id> <v>.<slot> <v>.<slot>'", line=lineno, column=col)
            eid = _int_token(rest[0][0], lineno, rest[0][1], "edge id")
            ends = []
            for tok, tcol in rest[1:]:
                m = _SLOT.match(tok)
                if not m:
                    raise ShadowInputError(f"expected <v>.<slot>, got {tok!r}", line=lineno, column=tcol)
                ends.append((int(m.group(1)), int(m.group(2))))
            if eid in edges:
                raise ShadowInputError(f"duplicate edge id {eid}", line=lineno, column=rest[0][1])
            edges[eid] = Edge(eid, ends[0], ends[1])
        elif word == "region":
            regions_entry = _parse_region(rest, lineno, col)
            if regions_entry.id in regions:
                raise ShadowInputError(f"duplicate region id {regions_entry.id}", line=lineno, column=rest[0][1])
            regions[regions_entry.id] = regions_entry
        else:
            raise ShadowInputError(f"unknown keyword {word!r}", line=lineno, column=col)

    if name is None:
        raise ShadowInputError("missing 'shadow <name>' line")
    if n_vertices is None:
        raise ShadowInputError("missing 'vertices <V>' line")

    embedding = None
    if in_embedding:
        embedding = EmbeddingData(
            iplus=tuple(emb["iplus"].get(r, 0) for r in range(len(regions))),
            iminus=tuple(emb["iminus"].get(r, 0) for r in range(len(regions))),
            u2=tuple(emb["u2"].get(e, 0) for e in range(len(edges))),
        )
        for key, ids in (("iplus", len(regions)), ("iminus", len(regions)), ("u2", len(edges))):
            stray = [i for i in emb[key] if not (0 <= i < ids)]
            if stray:
                raise ValidationError("dangling", f"{key} references unknown id {stray[0]}")

    return BranchedShadow(
        name,
        n_vertices,
        [edges[k] for k in sorted(edges)],
        [regions[k] for k in sorted(regions)],
        embedding,
    )


def _parse_region(rest: list, lineno: int, col: int) -> Region:
    if len(rest) < 3:
        raise ShadowInputError("expected 'region <id> gleam2 <int>|open circuit ...'", line=lineno, column=col)
    rid = _int_token(rest[0][0], lineno, rest[0][1], "region id")
    i = 1
    gleam2 = None
    is_open = False
    if rest[i][0] == "gleam2":
        if i + 1 >= len(rest):
            raise ShadowInputError("gleam2 needs a value", line=lineno, column=rest[i][1])
        gleam2 = _int_token(rest[i + 1][0], lineno, rest[i + 1][1], "gleam2")
        i += 2
    elif rest[i][0] == "open":
        is_open = True
        i += 1
    else:
        raise ShadowInputError(f"expected 'gleam2' or 'open', got {rest[i][0]!r}", line=lineno, column=rest[i][1])
    if i >= len(rest) or rest[i][0] != "circuit":
        where = rest[i][1] if i < len(rest) else col
        raise ShadowInputError("expected 'circuit'", line=lineno, column=where)
    i += 1
    circuit = []
    free = 0
    while i < len(rest):
        tok, tcol = rest[i]
        if tok == "free":
            if i + 2 != len(rest):
                raise ShadowInputError("'free <k>' must end the region line", line=lineno, column=tcol)
            free = _int_token(rest[i + 1][0], lineno, rest[i + 1][1], "free count")
            break
        m = _PASSAGE.match(tok)
        if not m:
            raise ShadowInputError(f"expected <edge><+|->, got {tok!r}", line=lineno, column=tcol)
        circuit.append((int(m.group(1)), 1 if m.group(2) == "+" else -1))
        i += 1
    return Region(rid, tuple(circuit), gleam2, is_open, free)


def format_passage(p: Passage) -> str:
    return f"{p[0]}{'+' if p[1] > 0 else '-'}"


def serialize_shadow(shadow: BranchedShadow) -> str:
    """Canonical `.bsh` text; `parse_shadow` inverts it."""
    lines = [f"shadow {shadow.name}", f"vertices {shadow.n_vertices}"]
    for e in shadow.edges:
        lines.append(f"edge {e.id} {e.tail[0]}.{e.tail[1]} {e.head[0]}.{e.head[1]}")
    for r in shadow.regions:
        head = f"region {r.id} open" if r.open else f"region {r.id} gleam2 {r.gleam2}"
        line = f"{head} circuit {' '.join(format_passage(p) for p in r.circuit)}"
        if r.free:
            line += f" free {r.free}"
        lines.append(line)
    if shadow.embedding is not None:
        lines.append("[embedding]")
        emb = shadow.embedding
        lines.extend(f"iplus {i} {v}" for i, v in enumerate(emb.iplus))
        lines.extend(f"iminus {i} {v}" for i, v in enumerate(emb.iminus))
        lines.extend(f"u2 {i} {v}" for i, v in enumerate(emb.u2))
    return "\n".join(lines) + "\n"


def load_shadow(path) -> BranchedShadow:
    """
    Read and parse a `.bsh` file.

    Args:
        path: File path (str or Path), read as UTF-8

    Returns:
        The validated shadow
    """
    return parse_shadow(Path(path).read_text(encoding="utf-8"))


def validate_shadow(shadow: BranchedShadow) -> dict:
    """Validation report: counts, standardness and the derived branching data."""
    return {
        "name": shadow.name,
        "vertices": shadow.n_vertices,
        "edges": shadow.n_edges,
        "regions": shadow.n_regions,
        "standard": shadow.standard,
        "orientation": list(shadow.orientation),
        "preferred": [{"edge": e, "region": r, "position": k} for e, (r, k) in enumerate(shadow.preferred)],
        "vertex_models": [
            {
                "vertex": m.vertex,
                "in": list(m.in_slots),
                "out": list(m.out_slots),
                "strands": [list(s) for s in m.strands],
                "vertical": [sorted(c) for c in m.vertical],
                "cyclic_order": list(m.cyclic_order),
                "flagged": m.flagged,
            }
            for m in shadow.vertex_models
        ],
        "flagged_vertices": [m.vertex for m in shadow.vertex_models if m.flagged],
        "loop_edges": list(shadow.loop_edges),
        "z2": list(shadow.z2),
    }


# -- moves ------------------------------------------------------------------


def _rebuild_with_transfer(
    name: str, n_vertices: int, edges: list, regions: list, transfer: dict, log: list
) -> BranchedShadow:
    """
    Build without the parity law, then repair the gleams of the regions in `transfer`.

    `transfer` maps the regions a move may touch to the step (+1 or -1) added to
    their gleam2 when their Z2-gleam no longer matches. Any other closed region
    must still obey the parity law with its inherited gleam.
    """
    draft = BranchedShadow(name, n_vertices, edges, regions, check_parity=False)
    fixed = []
    for r in draft.regions:
        gleam2 = r.gleam2
        if r.closed_disc and gleam2 % 2 != draft.z2[r.id]:
            if r.id not in transfer:
                raise InternalModelError(f"move flipped the Z2-gleam of untouched region {r.id}")
            gleam2 += transfer[r.id]
            log.append({"region": r.id, "from": r.gleam2, "gleam2": gleam2, "rule": "transfer"})
            logger.info("region %d gleam2 %d -> %d to match Z2-gleam %d", r.id, r.gleam2, gleam2, draft.z2[r.id])
        fixed.append(Region(r.id, r.circuit, gleam2, r.open, r.free))
    return BranchedShadow(name, n_vertices, edges, fixed, transfer_log=log)


def move_one_two(shadow: BranchedShadow, vertex: int, variant: int) -> BranchedShadow:
    """
    Branched 1->2 move at `vertex`.

    The variant picks the edge at slot `variant // 2` of the vertex and, with
    `variant % 2`, which of its two non-preferred sheets passes over the new
    vertex first. The edge is cut by a new vertex carrying a small loop that
    bounds a new disc region.

    The two non-preferred sheets run over the loop; the preferred sheet crosses
    the new vertex straight, which swaps the other two sheets for its region.
    That region's Z2-gleam flips, so half a unit of gleam moves from it to the
    new disc (gleam2 -1 there, +1 on the disc). Every other region keeps its
    gleam.

    Args:
        shadow: Input shadow
        vertex: Vertex id
        variant: Resolution id in 0..7

    Returns:
        The new shadow; its `transfer_log` records every gleam assignment
    """
    if not (0 <= vertex < shadow.n_vertices):
        raise MoveError(f"unknown vertex {vertex}")
    if not isinstance(variant, int) or not (0 <= variant < 8):
        raise MoveError(f"invalid variant {variant!r}, expected 0..7")
    slot, swap = divmod(variant, 2)
    e = shadow._slot_edge[(vertex, slot)]
    old = shadow.edges[e]
    sigma = shadow.orientation[e]
    majority = sorted(ref for ref in shadow.passages_of[e] if shadow.passage(ref)[1] == sigma)
    a_ref, b_ref = (majority[1], majority[0]) if swap else (majority[0], majority[1])
    c_ref = shadow.preferred[e]

    u = shadow.n_vertices
    new_b = shadow.n_edges
    loop = shadow.n_edges + 1
    if sigma > 0:
        edge_a = Edge(e, old.tail, (u, 0))
        edge_b = Edge(new_b, (u, 1), old.head)
        first, second = e, new_b
    else:
        edge_a = Edge(e, old.tail, (u, 1))
        edge_b = Edge(new_b, (u, 0), old.head)
        first, second = new_b, e
    edges = list(shadow.edges)
    edges[e] = edge_a
    edges.extend([edge_b, Edge(loop, (u, 2), (u, 3))])

    replacement = {
        a_ref: [(first, sigma), (loop, 1), (second, sigma)],
        b_ref: [(first, sigma), (loop, -1), (second, sigma)],
        c_ref: [(second, -sigma), (first, -sigma)],
    }
    regions = []
    for r in shadow.regions:
        circuit = []
        for k, p in enumerate(r.circuit):
            circuit.extend(replacement.get((r.id, k), [p]))
        regions.append(Region(r.id, tuple(circuit), r.gleam2, r.open, r.free))
    disc = len(regions)
    regions.append(Region(disc, ((loop, 1),), 0))
    log = [{"move": "one_two", "vertex": vertex, "variant": variant, "edge": e, "new_vertex": u, "new_region": disc}]
    logger.info("1->2 move at vertex %d on edge %d (variant %d)", vertex, e, variant)
    try:
        return _rebuild_with_transfer(shadow.name, u + 1, edges, regions, {c_ref[0]: -1, disc: 1}, log)
    except ValidationError as exc:
        raise MoveError(f"1->2 move result fails validation: {exc}") from exc


def move_join_nonpreferred(shadow: BranchedShadow, edge: int) -> BranchedShadow:
    """
    Splice the two non-preferred regions at `edge` into one region.

    Args:
        shadow: Input shadow
        edge: Edge whose two non-preferred passages lie in distinct regions

    Returns:
        Shadow with one region fewer; the merged region keeps the smaller id and
        the sum of the two gleams. A parity repair adds 1 to the merged region
        and, when it is a third region, takes 1 from the preferred region of
        `edge`.
    """
    if not (0 <= edge < shadow.n_edges):
        raise MoveError(f"unknown edge {edge}")
    p, q = sorted(ref for ref in shadow.passages_of[edge] if ref != shadow.preferred[edge])
    rp, rq = shadow.regions[p[0]], shadow.regions[q[0]]
    if rp.id == rq.id:
        raise MoveError(f"both non-preferred passages of edge {edge} lie in region {rp.id}")
    if rp.open != rq.open:
        raise MoveError(f"cannot join open region with closed region at edge {edge}")

    def from_(region: Region, k: int) -> list:
        return list(region.circuit[k:] + region.circuit[:k])

    circuit = [rp.circuit[p[1]]] + from_(rq, q[1])[1:] + [rq.circuit[q[1]]] + from_(rp, p[1])[1:]
    keep, drop = rp.id, rq.id
    gleam2 = None if rp.open else rp.gleam2 + rq.gleam2
    regions = []
    for r in shadow.regions:
        if r.id == drop:
            continue
        new_id = r.id if r.id < drop else r.id - 1
        if r.id == keep:
            regions.append(Region(new_id, tuple(circuit), gleam2, rp.open, rp.free + rq.free))
        else:
            regions.append(Region(new_id, r.circuit, r.gleam2, r.open, r.free))
    # the preferred region of the edge sees its two other sheets exchanged
    transfer = {keep: 1}
    straight = shadow.preferred[edge][0]
    if straight not in (keep, drop):
        transfer[straight if straight < drop else straight - 1] = -1
    log = [{"move": "join", "edge": edge, "kept": keep, "removed": drop, "gleam2": gleam2}]
    if drop < shadow.n_regions - 1:
        logger.info("join at edge %d: regions above %d renumbered down by one", edge, drop)
    try:
        return _rebuild_with_transfer(shadow.name, shadow.n_vertices, list(shadow.edges), regions, transfer, log)
    except ValidationError as exc:
        raise MoveError(f"join at edge {edge} fails validation: {exc}") from exc


def generate_pn(n: int, settings: Optional[Settings] = None) -> BranchedShadow:
    """
    One-region branched shadow with n vertices, grown from the seed fixture.

    Each step applies a 1->2 move on the newest loop edge and joins the new
    disc region back into the old one at the new loop. The final gleam is the
    smallest non-negative value allowed by the Z2-gleam.
    """
    if not isinstance(n, int) or n < 1:
        raise ShadowInputError(f"n must be a positive integer, got {n!r}")
    settings = settings or Settings()
    shadow = load_shadow(settings.fixture_path(SEED_FIXTURE))
    loop = 0
    for _ in range(n - 1):
        tail_vertex, tail_slot = shadow.edges[loop].tail
        shadow = move_one_two(shadow, tail_vertex, 2 * tail_slot)
        loop = shadow.n_edges - 1
        shadow = move_join_nonpreferred(shadow, loop)
    return shadow.with_gleams(list(shadow.z2), name=f"pn-{n}")


def abstract_base_stats(shadow: BranchedShadow) -> dict:
    """
    Discs, strips, Euler characteristic and boundary components of the abstract base.

    Boundary components are the cycles of the permutation "cross the strip, then
    turn to the next slot of the horizontal disc" on half-edges.
    """
    models = shadow.vertex_models
    other_end = {}
    for e in shadow.edges:
        other_end[e.tail] = e.head
        other_end[e.head] = e.tail
    unseen = set(other_end)
    components = 0
    while unseen:
        start = min(unseen)
        dart = start
        while True:
            unseen.discard(dart)
            v, s = other_end[dart]
            dart = (v, models[v].next_slot(s))
            if dart == start:
                break
        components += 1
    discs = shadow.n_vertices
    strips = shadow.n_edges
    return {
        "discs": discs,
        "strips": strips,
        "euler_characteristic": discs - strips,
        "boundary_components": components,
    }
