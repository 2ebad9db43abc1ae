import random

import pytest

from rabuild.clump import (
    Clump,
    ball_by_unfolding,
    chamber_clump,
    load_clump,
    save_clump,
    sheet_mirror_table,
    sheets,
    unfold,
    unfold_steps_to_ball,
)
from rabuild.errors import DomainError


def test_gallery_connectivity_required(d23):
    with pytest.raises(DomainError):
        Clump(d23, {(), ((1, 1), (0, 1))})  # 1 and ts are not adjacent


def test_boundary_mirrors_single_chamber(d23):
    y0 = chamber_clump(d23)
    mirrors = y0.boundary_mirrors()
    assert len(mirrors) == 2
    assert {g for g, _ in mirrors} == {0, 1}


def test_boundary_mirrors_whole_building(square23):
    whole = square23.ball(1)
    assert whole.is_whole_building
    assert whole.boundary_mirrors() == []
    assert whole.sides() == []


def test_boundary_mirrors_ball1(d23):
    # panel-membership counting oracle
    ball = d23.ball(1)
    gp = d23.gp
    expected = set()
    for c in ball.chambers:
        for g in range(2):
            rep = gp.strip(c, 1 << g)
            panel = [gp.mul(rep, ((g, e),)) if e else rep for e in range(gp.qs[g])]
            inside = sum(1 for p in panel if p in ball.chambers)
            if inside == 1:
                expected.add((g, rep))
    assert set(ball.boundary_mirrors()) == expected
    # concretely: the s-mirrors of t and t^2, plus the t-mirror of s
    names = {
        (d23.system.generators[g], tuple(tuple(p) for p in d23.serialize_chamber(r)))
        for g, r in ball.boundary_mirrors()
    }
    assert names == {
        ("s", (("t", 1),)),
        ("s", (("t", 2),)),
        ("t", (("s", 1),)),
    }


def test_boundary_type_examples(d23):
    y0 = chamber_clump(d23)
    s_vertex = d23.face_of((), 1 << 0)
    assert y0.boundary_type(s_vertex) == {"s"}
    # after unfolding along the t-side, the t-mirror is interior
    tside = [k for k in y0.sides() if k.gen == 1][0]
    u = unfold(y0, tside)
    t_vertex = d23.face_of((), 1 << 1)
    assert u.boundary_type(t_vertex) == frozenset()
    with pytest.raises(DomainError):
        u.boundary_type(d23.face_of(((0, 1), (1, 1)), 1 << 0))


def test_fully_interior_vertex(square23):
    whole = square23.ball(1)
    for tmask in square23.spherical_masks:
        face = square23.face_of((), tmask)
        assert whole.boundary_type(face) == frozenset()


def test_sides_basic(d23, hex3):
    assert len(chamber_clump(d23).sides()) == 2
    hex_sides = chamber_clump(hex3).sides()
    assert len(hex_sides) == 6
    assert sorted(s.gen for s in hex_sides) == list(range(6))


def test_same_type_mirrors_one_side(square23):
    # the t-mirrors of two s-adjacent chambers lie in one side
    y0 = chamber_clump(square23)
    sside = [k for k in y0.sides() if k.gen == square23.system.index["s"]][0]
    u = unfold(y0, sside)
    tsides = [k for k in u.sides() if k.gen == square23.system.index["t"]]
    assert len(tsides) == 1
    assert len(tsides[0].mirrors) == 2


def test_unfold_examples(d23):
    y0 = chamber_clump(d23)
    tside = [k for k in y0.sides() if k.gen == 1][0]
    u = unfold(y0, tside)
    assert sorted(d23.serialize_chamber(c) for c in u.chambers) == [
        [],
        [["t", 1]],
        [["t", 2]],
    ]
    # the consumed side is no longer a side of the result
    with pytest.raises(DomainError):
        unfold(u, tside)


def test_unfolded_mirrors_become_interior(d23):
    y0 = chamber_clump(d23)
    for side in y0.sides():
        u = unfold(y0, side)
        for rep in side.mirrors:
            assert u.panel_count(side.gen, rep) == d23.gp.qs[side.gen]


def test_sheets_counts(d23, d33):
    for bld in (d23, d33):
        y0 = chamber_clump(bld)
        for side in y0.sides():
            part = sheets(y0, side)
            assert len(part.blocks) == bld.gp.qs[side.gen] - 1


def test_sheet_mirror_bijection(hex3):
    y1, steps = unfold_steps_to_ball(hex3, 1)
    for st in steps:
        part = sheets(st.before, st.side)
        tables = sheet_mirror_table(st.before, part)
        for table in tables:
            assert set(table) == set(st.side.mirrors)
            assert len(set(table.values())) == len(st.side.mirrors)


def test_ball_by_unfolding_matches_ball(suite):
    for name, bld, _ in suite:
        for n in (1, 2):
            final, sides_used = ball_by_unfolding(bld, n)
            assert final.chambers == bld.ball_chambers(n), name


def test_ball_by_unfolding_d23(d23):
    final, sides_used = ball_by_unfolding(d23, 1)
    assert len(sides_used) == 2
    assert len(final.chambers) == 4


def test_randomized_side_order_also_reaches_ball(d33, hex3):
    for bld in (d33, hex3):
        rng = random.Random(99)
        final, _ = unfold_steps_to_ball(bld, 2 if bld is d33 else 1, rng=rng)
        n = 2 if bld is d33 else 1
        assert final.chambers == bld.ball_chambers(n)


def test_boundary_type_three_case_law(d23, d33, square23, hex3):
    # unfolding along a type-u side: off-side vertices keep their boundary
    # type, on-side vertices lose exactly u, and new vertices only grow
    # relative to their companion in the old clump
    for bld in (d23, d33, square23, hex3):
        current = chamber_clump(bld)
        for _ in range(3):
            sides = current.sides()
            if not sides:
                break
            side = sides[0]
            u = side.gen
            after = unfold(current, side)
            gp = bld.gp
            before_scwol = current.scwol()
            after_scwol = after.scwol()
            new_chambers = after.chambers - current.chambers
            for face in after_scwol.vertices:
                bt_after = after.boundary_type_mask(face)
                old = face in before_scwol.face_chambers
                on_side = bool((face[0] >> u) & 1) and any(
                    gp.strip(c, 1 << u) in set(side.mirrors)
                    for c in after_scwol.face_chambers[face]
                )
                if old and not on_side:
                    assert bt_after == current.boundary_type_mask(face)
                elif old and on_side:
                    assert bt_after == current.boundary_type_mask(face) & ~(1 << u)
                else:
                    # new face: companion through the side's panels
                    c = after_scwol.face_chambers[face][0]
                    rep = gp.strip(c, 1 << u)
                    panel = [
                        gp.mul(rep, ((u, e),)) if e else rep
                        for e in range(gp.qs[u])
                    ]
                    companion = [p for p in panel if p in current.chambers][0]
                    lift = bld.face_of(companion, face[0])
                    assert current.boundary_type_mask(lift) & bt_after == \
                        current.boundary_type_mask(lift)
            current = after


def test_clump_serialization(tmp_path, d23):
    final, steps = unfold_steps_to_ball(d23, 2)
    path = tmp_path / "clump.json"
    save_clump(path, final)
    loaded = load_clump(path, d23)
    assert loaded.chambers == final.chambers
    assert len(loaded.provenance) == len(final.provenance)
