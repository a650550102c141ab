"""Parsing, validation, moves and the P_n generator."""

import pytest

from conftest import SHADOW_FIXTURES
from errors import MoveError, ShadowInputError, ValidationError
from shadow_core import (
    BranchedShadow,
    abstract_base_stats,
    generate_pn,
    move_join_nonpreferred,
    move_one_two,
    negate_gleams,
    parse_shadow,
    serialize_shadow,
    validate_shadow,
    z2_gleam,
)

SEED = """shadow seed-1v
vertices 1
edge 0 0.0 0.1
edge 1 0.2 0.3
region 0 gleam2 0 circuit 0- 1+ 1+ 0+ 0+ 1-
"""


@pytest.mark.parametrize("name", SHADOW_FIXTURES)
def test_fixtures_serialize_canonically(name, fixture_text):
    text = fixture_text(name)
    assert serialize_shadow(parse_shadow(text)) == text


def test_seed_structure(shadow):
    seed = shadow("seed_one_vertex.bsh")
    assert seed.standard
    assert seed.z2 == (0,)
    assert seed.loop_edges == (0, 1)
    report = validate_shadow(seed)
    assert report["vertices"] == 1
    assert report["edges"] == 2
    assert report["regions"] == 1
    assert report["vertex_models"][0]["vertical"] == [[0, 1], [2, 3]]
    assert report["flagged_vertices"] == []


def test_solid_torus_vertical_corners(shadow):
    report = validate_shadow(shadow("spine_solid_torus.bsh"))
    for model in report["vertex_models"]:
        assert model["vertical"] == [[0, 2], [1, 3]]
        assert sorted(model["in"] + model["out"]) == [0, 1, 2, 3]


def test_every_edge_has_one_preferred_passage(shadow):
    for name in SHADOW_FIXTURES:
        s = shadow(name)
        for e in range(s.n_edges):
            preferred = [ref for ref in s.passages_of[e] if s.is_preferred(ref)]
            assert len(preferred) == 1
            assert s.passage(preferred[0])[1] == -s.orientation[e]


def test_syntax_error_carries_line_and_column():
    with pytest.raises(ShadowInputError) as info:
        parse_shadow("shadow x\nvertices one\n")
    assert info.value.line == 2
    assert info.value.column == 10


def test_missing_header_is_rejected():
    with pytest.raises(ShadowInputError):
        parse_shadow("vertices 1\n")


def test_branching_violation(fixture_text):
    with pytest.raises(ValidationError) as info:
        parse_shadow(fixture_text("bad_branching.bsh"))
    assert info.value.code == "branching"
    assert info.value.locus == "edge 0"


def test_reused_slot_is_rejected():
    text = SEED.replace("edge 1 0.2 0.3", "edge 1 0.0 0.3")
    with pytest.raises(ValidationError) as info:
        parse_shadow(text)
    assert info.value.code == "slot"


def test_edge_in_two_passages_is_rejected():
    text = SEED.replace("0- 1+ 1+ 0+ 0+ 1-", "0- 1+ 1+ 0+ 1-")
    with pytest.raises(ValidationError) as info:
        parse_shadow(text)
    assert info.value.code == "passages"


def test_gleam_parity_law(fixture_text):
    text = fixture_text("sphere_spine.bsh").replace("region 0 gleam2 -2", "region 0 gleam2 -1")
    with pytest.raises(ValidationError) as info:
        parse_shadow(text)
    assert info.value.code == "parity"


def test_open_region_makes_shadow_non_standard():
    text = SEED.replace("region 0 gleam2 0 circuit", "region 0 open circuit")
    s = parse_shadow(text)
    assert not s.standard
    assert s.regions[0].gleam2 is None


def test_negate_gleams(shadow):
    s = negate_gleams(shadow("sphere_spine.bsh"))
    assert [r.gleam2 for r in s.regions] == [2, 2, 0]
    assert s.name == "one-vertex-sphere-negated"


def test_z2_gleam_rejects_unknown_region(shadow):
    seed = shadow("seed_one_vertex.bsh")
    assert z2_gleam(seed, 0) == 0
    with pytest.raises(ShadowInputError):
        z2_gleam(seed, 3)


def test_embedding_section_defaults_to_zero(shadow):
    s = shadow("solid_torus_embedded.bsh")
    assert s.embedding.iplus == (0, 0)
    assert s.embedding.u2 == (1, 1, 1, 1)
    text = serialize_shadow(s).replace("u2 3 1\n", "")
    assert parse_shadow(text).embedding.u2 == (1, 1, 1, 0)


def test_one_two_move_adds_vertex_and_disc(shadow):
    seed = shadow("seed_one_vertex.bsh")
    moved = move_one_two(seed, 0, 0)
    assert moved.n_vertices == 2
    assert moved.n_edges == 4
    assert moved.n_regions == 2
    assert moved.transfer_log[0]["move"] == "one_two"
    for r in moved.regions:
        assert r.gleam2 % 2 == moved.z2[r.id]


def test_move_preconditions(shadow):
    seed = shadow("seed_one_vertex.bsh")
    with pytest.raises(MoveError):
        move_one_two(seed, 0, 8)
    with pytest.raises(MoveError):
        move_one_two(seed, 1, 0)
    with pytest.raises(MoveError):
        move_join_nonpreferred(seed, 0)


def test_join_splices_new_disc_back(shadow):
    seed = shadow("seed_one_vertex.bsh")
    vertex, slot = seed.edges[0].tail
    moved = move_one_two(seed, vertex, 2 * slot)
    joined = move_join_nonpreferred(moved, moved.n_edges - 1)
    assert joined.n_regions == moved.n_regions - 1
    assert joined.n_vertices == moved.n_vertices
    assert joined.transfer_log[0]["move"] == "join"
    with pytest.raises(MoveError):
        move_join_nonpreferred(moved, moved.n_edges)


def test_generate_pn_two_matches_fixture(fixture_text):
    assert serialize_shadow(generate_pn(2)) == fixture_text("f1_pn2.bsh")


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_generate_pn_family(n):
    pn = generate_pn(n)
    assert isinstance(pn, BranchedShadow)
    assert pn.n_vertices == n
    assert pn.n_vertices <= 2 * n
    assert pn.n_regions == 1
    assert pn.regions[0].gleam2 == pn.z2[0]
    assert pn.name == f"pn-{n}"


def test_generate_pn_rejects_bad_n():
    with pytest.raises(ShadowInputError):
        generate_pn(0)


def test_abstract_base_counts(shadow):
    for name in SHADOW_FIXTURES:
        s = shadow(name)
        stats = abstract_base_stats(s)
        assert stats["euler_characteristic"] == s.n_vertices - s.n_edges
        assert stats["boundary_components"] >= 1


def edge_at(s, vertex, slot):
    return next(e.id for e in s.edges if (vertex, slot) in (e.tail, e.head))


def move_bases(shadow):
    bases = [shadow(name) for name in SHADOW_FIXTURES] + [generate_pn(n) for n in (1, 2, 3)]
    return bases + [move_one_two(s, 0, 0) for s in bases]


def test_one_two_move_keeps_inherited_gleams(shadow):
    for s in move_bases(shadow):
        for vertex in range(s.n_vertices):
            for variant in range(8):
                straight = s.preferred[edge_at(s, vertex, variant // 2)][0]
                moved = move_one_two(s, vertex, variant)
                disc = moved.regions[-1]
                assert moved.z2[straight] != s.z2[straight]
                assert disc.gleam2 == 1
                for r in s.regions:
                    after = moved.regions[r.id].gleam2
                    if r.id == straight and r.closed_disc:
                        assert after == r.gleam2 - 1
                    else:
                        assert after == r.gleam2
                        assert moved.z2[r.id] == s.z2[r.id] or r.id == straight


def test_one_two_move_conserves_total_gleam(shadow):
    seed = shadow("seed_one_vertex.bsh")
    moved = move_one_two(seed, 0, 0)
    assert [r.gleam2 for r in moved.regions] == [-1, 1]
    assert moved.transfer_log[1] == {"region": 0, "from": 0, "gleam2": -1, "rule": "transfer"}
    assert moved.transfer_log[2] == {"region": 1, "from": 0, "gleam2": 1, "rule": "transfer"}


def test_join_touches_only_merged_and_preferred_regions(shadow):
    for s in move_bases(shadow):
        for edge in range(s.n_edges):
            try:
                joined = move_join_nonpreferred(s, edge)
            except MoveError:
                continue
            keep, drop = joined.transfer_log[0]["kept"], joined.transfer_log[0]["removed"]
            straight = s.preferred[edge][0]
            for r in s.regions:
                if r.id in (keep, drop, straight):
                    continue
                new_id = r.id if r.id < drop else r.id - 1
                assert joined.regions[new_id].gleam2 == r.gleam2


@pytest.mark.parametrize(
    "name, components",
    [("seed_one_vertex.bsh", 1), ("sphere_spine.bsh", 1), ("spine_solid_torus.bsh", 2)],
)
def test_abstract_base_boundary_components(shadow, name, components):
    stats = abstract_base_stats(shadow(name))
    assert stats["boundary_components"] == components
    assert stats["boundary_components"] <= 2 * stats["strips"]
