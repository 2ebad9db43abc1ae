"""Symmetries at desk scale.

Ball automorphisms are verified finite objects: a bijection of a clump's
chambers together with a type permutation, checked to preserve adjacency
and to map sides to sides.  They feed four pipelines:

* ``extend_action``: a ball automorphism induces a simple automorphism of
  the clump's complex of groups, with local maps permuting the cyclic
  factors according to the images of the sides through each vertex;
* ``quotient_cog``: a finite automorphism group induces a complex of
  groups over the orbit space, together with a covering from the original,
  verified against the covering axioms (the base is subdivided into
  residue chains whenever a group element fixes a vertex but moves an edge
  at it, which is the rule for type-rotating symmetries);
* the discreteness classifier for full and type-preserving automorphism
  groups of the building, with the nerve rigidity oracle;
* apartment fragments through the base chamber and the sheet-swap
  witnesses that carry any fragment to any other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .building import Building, face_key, syllable_key
from .clump import Clump, sheet_mirror_table, sheets, unfold, unfold_steps_to_ball
from .coxeter import identity as w_identity, reduce as w_reduce
from .covering import CoveringReport, check_covering
from .errors import DomainError, InternalError, SizeCapError


# ---------------------------------------------------------------------------
# type permutations
# ---------------------------------------------------------------------------


def type_permutation_group(building: Building):
    """All permutations of the generators preserving both q and m."""
    sysm = building.system
    rank = sysm.rank
    qs = building.gp.qs
    out = []
    for perm in itertools.permutations(range(rank)):
        if any(qs[perm[i]] != qs[i] for i in range(rank)):
            continue
        ok = True
        for i in range(rank):
            for j in range(i + 1, rank):
                a = (sysm.comm[i] >> j) & 1
                b = (sysm.comm[perm[i]] >> perm[j]) & 1
                if a != b:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(perm)
    return out


def permute_mask(perm, mask):
    out = 0
    g = 0
    while mask >> g:
        if (mask >> g) & 1:
            out |= 1 << perm[g]
        g += 1
    return out


# ---------------------------------------------------------------------------
# ball automorphisms
# ---------------------------------------------------------------------------


class BallAutomorphism:
    """Chamber bijection of a clump realizing a type permutation."""

    def __init__(self, clump: Clump, mapping: dict, perm: tuple):
        self.clump = clump
        self.mapping = dict(mapping)
        self.perm = tuple(perm)
        self._face_cache = {}
        self._key = (
            self.perm,
            tuple(sorted(self.mapping.items(), key=lambda kv: syllable_key(kv[0]))),
        )

    def __eq__(self, other):
        return isinstance(other, BallAutomorphism) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def is_identity(self):
        return all(k == v for k, v in self.mapping.items()) and all(
            self.perm[i] == i for i in range(len(self.perm))
        )

    def to_json(self):
        """Witness certificate: the chamber bijection table."""
        bld = self.clump.building
        return {
            "type_permutation": {
                bld.system.generators[i]: bld.system.generators[p]
                for i, p in enumerate(self.perm)
            },
            "chambers": [
                [bld.serialize_chamber(c), bld.serialize_chamber(d)]
                for c, d in sorted(
                    self.mapping.items(), key=lambda kv: syllable_key(kv[0])
                )
            ],
        }

    def chamber_image(self, c):
        return self.mapping[c]

    def face_image(self, face):
        got = self._face_cache.get(face)
        if got is not None:
            return got
        members = self.clump.scwol().face_chambers.get(face)
        if not members:
            raise DomainError("face is not incident to the clump")
        tmask = permute_mask(self.perm, face[0])
        images = {
            self.clump.building.face_of(self.mapping[c], tmask) for c in members
        }
        if len(images) != 1:
            raise InternalError("chamber map does not induce a face map")
        image = images.pop()
        self._face_cache[face] = image
        return image

    def side_image(self, side):
        """The side carrying the images of the side's mirrors."""
        image_mirrors = tuple(
            sorted(
                (self.face_image((1 << side.gen, m))[1] for m in side.mirrors),
                key=syllable_key,
            )
        )
        gen = self.perm[side.gen]
        for cand in self.clump.sides():
            if cand.gen == gen and cand.mirrors == image_mirrors:
                return cand
        raise InternalError("image of a side is not a side")

    def compose(self, other):
        """self after other (both on the same clump)."""
        if self.clump.chambers != other.clump.chambers:
            raise DomainError("automorphisms live on different clumps")
        mapping = {c: self.mapping[other.mapping[c]] for c in other.mapping}
        perm = tuple(self.perm[other.perm[i]] for i in range(len(self.perm)))
        return BallAutomorphism(self.clump, mapping, perm)

    def inverse(self):
        mapping = {v: k for k, v in self.mapping.items()}
        inv = [0] * len(self.perm)
        for i, p in enumerate(self.perm):
            inv[p] = i
        return BallAutomorphism(self.clump, mapping, tuple(inv))

    def verify(self):
        """Structural problems, empty when this is an automorphism."""
        problems = []
        clump = self.clump
        if set(self.mapping) != clump.chambers or set(
            self.mapping.values()
        ) != clump.chambers:
            problems.append("not a bijection of the clump's chambers")
            return problems
        bld = clump.building
        for c in clump.chambers:
            for d in clump.chambers:
                t = bld.adjacency_type(c, d)
                ti = bld.adjacency_type(self.mapping[c], self.mapping[d])
                expect = None if t is None else self.perm[t]
                if ti != expect:
                    problems.append(
                        f"adjacency not preserved at {c!r},{d!r}"
                    )
                    return problems
        try:
            for face in clump.scwol().vertices:
                self.face_image(face)
        except InternalError as exc:
            problems.append(str(exc))
        try:
            for side in clump.sides():
                self.side_image(side)
        except InternalError as exc:
            problems.append(str(exc))
        return problems


def identity_automorphism(clump: Clump) -> BallAutomorphism:
    rank = len(clump.building.gp.qs)
    return BallAutomorphism(
        clump, {c: c for c in clump.chambers}, tuple(range(rank))
    )


def from_type_permutation(clump: Clump, perm) -> BallAutomorphism:
    """The automorphism relabeling every syllable by the permutation."""
    gp = clump.building.gp
    mapping = {}
    for c in clump.chambers:
        image = gp.norm(tuple((perm[g], e) for g, e in c))
        if image not in clump.chambers:
            raise DomainError("permutation does not preserve the clump")
        mapping[c] = image
    h = BallAutomorphism(clump, mapping, perm)
    problems = h.verify()
    if problems:
        raise InternalError(f"induced map is not an automorphism: {problems[0]}")
    return h


def automorphism_group_from_permutations(clump: Clump):
    """Ball automorphisms induced by all q- and m-preserving permutations."""
    return [
        from_type_permutation(clump, perm)
        for perm in type_permutation_group(clump.building)
    ]


def close_under_composition(autos):
    elems = list(dict.fromkeys(autos))
    changed = True
    while changed:
        changed = False
        for a in list(elems):
            for b in list(elems):
                c = a.compose(b)
                if c not in elems:
                    elems.append(c)
                    changed = True
    return elems


# ---------------------------------------------------------------------------
# induced simple automorphisms of the complex of groups
# ---------------------------------------------------------------------------


@dataclass
class SimpleCogAutomorphism:
    auto: BallAutomorphism
    vertex_maps: dict  # face -> {gen -> image gen} on the local mask


def extend_action(clump: Clump, h: BallAutomorphism) -> SimpleCogAutomorphism:
    """Local maps of the induced automorphism of the complex of groups.

    At each boundary vertex the cyclic factor of type t is carried to the
    factor named by the type of the image of the side through the vertex.
    """
    cog = clump.cog()
    vertex_maps = {}
    for face in cog.scwol.vertices:
        mask = cog.local_masks[face]
        vmap = {}
        for g in range(len(clump.building.gp.qs)):
            if not (mask >> g) & 1:
                continue
            members = cog.scwol.face_chambers[face]
            panels = {
                clump.building.gp.strip(c, 1 << g)
                for c in members
            }
            boundary_panels = [
                p for p in panels if clump.panel_count(g, p) == 1
            ]
            owners = {clump.side_of_mirror(g, p) for p in boundary_panels}
            owners.discard(None)
            if len(owners) != 1:
                raise InternalError(
                    "boundary panels at a vertex span several sides"
                )
            side = owners.pop()
            vmap[g] = h.side_image(side).gen
        image_mask = cog.local_masks[h.face_image(face)]
        if permute_mask_from_map(vmap, mask) != image_mask:
            raise InternalError("local map does not hit the image local group")
        if any(
            clump.building.gp.qs[g] != clump.building.gp.qs[u]
            for g, u in vmap.items()
        ):
            raise InternalError("local map does not preserve cyclic orders")
        vertex_maps[face] = vmap
    for src, dst in cog.scwol.edges:
        sub = vertex_maps[src]
        sup = vertex_maps[dst]
        if any(sup.get(g) != u for g, u in sub.items()):
            raise InternalError("local maps do not commute with inclusions")
    return SimpleCogAutomorphism(h, vertex_maps)


def permute_mask_from_map(vmap, mask):
    out = 0
    for g, u in vmap.items():
        if (mask >> g) & 1:
            out |= 1 << u
    return out


def apply_local_map(vmap, qs, vec_syllables):
    """Apply a {gen -> gen} map to a canonical subgroup element."""
    return tuple(sorted((vmap[g], e) for g, e in vec_syllables))


# ---------------------------------------------------------------------------
# quotient complexes of groups and their coverings
# ---------------------------------------------------------------------------


def _action_has_inversions(clump, autos):
    scwol = clump.scwol()
    for h in autos:
        if h.is_identity():
            continue
        for src, dst in scwol.edges:
            if h.face_image(src) == src and h.face_image(dst) != dst:
                return True
    return False


class _Cells:
    """Quotient base: scwol vertices, or residue chains when subdividing.

    A cell is a tuple of faces with strictly increasing types along scwol
    edges; its local group is the local group of its smallest face.  An
    edge goes from a chain to each proper nonempty subchain, so an element
    fixing a cell fixes every edge out of it.
    """

    def __init__(self, clump, subdivide):
        self.clump = clump
        self.building = clump.building
        cog = clump.cog()
        self.cog = cog
        scwol = cog.scwol
        if subdivide:
            children = {}
            for src, dst in scwol.edges:
                children.setdefault(src, []).append(dst)
            chains = []
            stack = [(v,) for v in scwol.vertices]
            while stack:
                chain = stack.pop()
                chains.append(chain)
                for nxt in children.get(chain[-1], ()):
                    stack.append(chain + (nxt,))
            self.cells = tuple(
                sorted(chains, key=lambda ch: tuple(face_key(f) for f in ch))
            )
            edges = []
            for chain in self.cells:
                n = len(chain)
                if n == 1:
                    continue
                for bits in range(1, (1 << n) - 1):
                    sub = tuple(chain[i] for i in range(n) if (bits >> i) & 1)
                    edges.append((chain, sub))
            self.edges = tuple(sorted(edges, key=self._edge_key))
        else:
            self.cells = tuple((v,) for v in scwol.vertices)
            edges = [((src,), (dst,)) for src, dst in scwol.edges]
            self.edges = tuple(sorted(edges, key=self._edge_key))
        self.local_mask = {c: cog.local_masks[self._group_face(c)] for c in self.cells}
        self.out_edges = {}
        self.in_edges = {}
        for e in self.edges:
            self.out_edges.setdefault(e[0], []).append(e)
            self.in_edges.setdefault(e[1], []).append(e)
        self._edge_set = set(self.edges)

    @staticmethod
    def _edge_key(e):
        return (
            tuple(face_key(f) for f in e[0]),
            tuple(face_key(f) for f in e[1]),
        )

    @staticmethod
    def cell_key(c):
        return tuple(face_key(f) for f in c)

    def _group_face(self, cell):
        return min(cell, key=face_key)

    def group_face(self, cell):
        return self._group_face(cell)

    def compose(self, a, b):
        """Composition of a: c -> d after b: e -> c."""
        if a[0] != b[1]:
            return None
        e = (b[0], a[1])
        return e if e in self._edge_set else None

    def composable_pairs(self):
        out = []
        for b in self.edges:
            for a in self.out_edges.get(b[1], ()):
                ab = self.compose(a, b)
                if ab is None:
                    raise InternalError("missing composite edge")
                out.append(((a, b), ab))
        return out


class _SourceAdapter:
    """check_covering view of the (possibly subdivided) source cog."""

    def __init__(self, cells: _Cells):
        self.cells = cells
        self.building = cells.building
        self._pairs = cells.composable_pairs()

    def vertices(self):
        return self.cells.cells

    def edges(self):
        return self.cells.edges

    def in_edges(self, v):
        return self.cells.in_edges.get(v, ())

    def ends(self, a):
        return a

    def elements(self, v):
        return self.building.subgroup(self.cells.local_mask[v])

    def identity(self, v):
        return ()

    def mult(self, v, x, y):
        return self.building.gp.mul(x, y)

    def inv(self, v, x):
        return self.building.gp.inv(x)

    def psi(self, a, x):
        return x

    def compose(self, a, b):
        return self.cells.compose(a, b)

    def composable_pairs(self):
        return self._pairs

    def twist(self, a, b):
        return ()


class QuotientCog:
    """Complex of groups induced on the orbit space of a cell action.

    Local groups are semidirect products: pairs (g, h) with g in the local
    group of the orbit representative and h in its stabilizer, multiplied
    through the action of h on local coordinates.  Monomorphisms, twists
    and the covering data all come from fixed orbit-representative and
    transporter choices, every one canonical-least.
    """

    def __init__(self, clump: Clump, autos, subdivide=None):
        autos = close_under_composition(autos)
        autos.sort(key=lambda h: h._key)
        self.autos = autos
        self.clump = clump
        self.building = clump.building
        if subdivide is None:
            subdivide = _action_has_inversions(clump, autos)
        self.subdivided = subdivide
        self.cells = _Cells(clump, subdivide)
        self.simple = {h: extend_action(clump, h) for h in autos}
        self._hindex = {h: i for i, h in enumerate(autos)}
        self._comp = {}
        self._inv = {}
        for i, a in enumerate(autos):
            self._inv[i] = self._hindex[a.inverse()]
            for j, b in enumerate(autos):
                self._comp[(i, j)] = self._hindex[a.compose(b)]
        self._id = next(i for i, h in enumerate(autos) if h.is_identity())
        self._cell_image_cache = {}
        self._build()

    # -- group action plumbing ------------------------------------------

    def cell_image(self, hi, cell):
        got = self._cell_image_cache.get((hi, cell))
        if got is None:
            h = self.autos[hi]
            got = tuple(h.face_image(f) for f in cell)
            self._cell_image_cache[(hi, cell)] = got
        return got

    def local_map_at(self, hi, cell):
        face = self.cells.group_face(cell)
        return self.simple[self.autos[hi]].vertex_maps[face]

    def apply_local(self, hi, cell, x):
        """phi^h at the cell's group face, on a canonical subgroup element."""
        vmap = self.local_map_at(hi, cell)
        return tuple(sorted(((vmap[g], e) for g, e in x)))

    # -- construction ------------------------------------------------------

    def _build(self):
        cells = self.cells
        nh = len(self.autos)
        orbits = {}
        for c in cells.cells:
            images = sorted(
                (self.cell_image(i, c) for i in range(nh)), key=_Cells.cell_key
            )
            orbits[c] = images[0]
        self.rep_of = orbits
        self.reps = tuple(
            sorted(set(orbits.values()), key=_Cells.cell_key)
        )
        self.k_to_rep = {}
        for c in cells.cells:
            self.k_to_rep[c] = min(
                (i for i in range(nh) if self.cell_image(i, c) == orbits[c])
            )
        self.stab = {
            rep: tuple(
                i for i in range(nh) if self.cell_image(i, rep) == rep
            )
            for rep in self.reps
        }

        # quotient edges: orbit of a cell edge, keyed by a canonical member
        edge_orbit = {}
        for e in cells.edges:
            images = sorted(
                (
                    (self.cell_image(i, e[0]), self.cell_image(i, e[1]))
                    for i in range(nh)
                ),
                key=_Cells._edge_key,
            )
            edge_orbit[e] = images[0]
        self.edge_orbit = edge_orbit
        self.z_edges = tuple(
            sorted(set(edge_orbit.values()), key=_Cells._edge_key)
        )

        # representative edge with initial vertex at the orbit rep, and the
        # transporter moving its terminal vertex to its own rep
        self.edge_rep = {}
        self.kappa = {}
        for b in self.z_edges:
            cands = [
                e
                for e in cells.edges
                if edge_orbit[e] == b and e[0] == self.rep_of[b[0]]
            ]
            if not cands:
                raise InternalError("edge orbit misses its representative vertex")
            abar = min(cands, key=_Cells._edge_key)
            self.edge_rep[b] = abar
            self.kappa[b] = self.k_to_rep[abar[1]]

        self.z_ends = {
            b: (self.rep_of[b[0]], self.rep_of[b[1]]) for b in self.z_edges
        }
        self.z_in_edges = {}
        for b in self.z_edges:
            self.z_in_edges.setdefault(self.z_ends[b][1], []).append(b)

        # local groups: (g, stab index) pairs at each representative
        self.elements_at = {}
        for rep in self.reps:
            vecs = self.building.subgroup(self.cells.local_mask[rep])
            self.elements_at[rep] = tuple(
                (g, i) for g in vecs for i in self.stab[rep]
            )

        # quotient composition and twists
        self.z_compose = {}
        self.z_twist = {}
        for b in self.z_edges:
            for bp in self.z_edges:
                if self.z_ends[bp][1] != self.z_ends[b][0]:
                    continue
                abar_b = self.edge_rep[b]
                abar_bp = self.edge_rep[bp]
                kp_inv = self._inv[self.kappa[bp]]
                moved = (
                    self.cell_image(kp_inv, abar_b[0]),
                    self.cell_image(kp_inv, abar_b[1]),
                )
                if moved[0] != abar_bp[1]:
                    raise InternalError("transporter does not align edges")
                comp = (abar_bp[0], moved[1])
                if comp not in self.cells._edge_set:
                    raise InternalError("missing composite of representative edges")
                bb = self.edge_orbit[comp]
                self.z_compose[(b, bp)] = bb
                tw = self._comp[
                    (self.kappa[b], self._comp[(self.kappa[bp], self._inv[self.kappa[bb]])])
                ]
                if tw not in self.stab[self.z_ends[b][1]]:
                    raise InternalError("twist transporter does not stabilize")
                self.z_twist[(b, bp)] = ((), tw)

    # -- group operations at a representative cell -------------------------

    def mult(self, rep, x, y):
        (g1, h1), (g2, h2) = x, y
        return (
            self.building.gp.mul(g1, self.apply_local(h1, rep, g2)),
            self._comp[(h1, h2)],
        )

    def inv(self, rep, x):
        g, h = x
        hi = self._inv[h]
        return (
            self.apply_local(hi, rep, self.building.gp.inv(g)),
            hi,
        )

    def identity(self, rep):
        return ((), self._id)

    def theta(self, b, x):
        """Monomorphism along a quotient edge."""
        g, h = x
        abar = self.edge_rep[b]
        k = self.kappa[b]
        return (
            self.apply_local(k, abar[1], g),
            self._comp[(k, self._comp[(h, self._inv[k])])],
        )

    # -- adapter protocol ----------------------------------------------------

    def vertices(self):
        return self.reps

    def edges(self):
        return self.z_edges

    def in_edges(self, v):
        return self.z_in_edges.get(v, ())

    def ends(self, b):
        return self.z_ends[b]

    def elements(self, v):
        return self.elements_at[v]

    def psi(self, b, x):
        return self.theta(b, x)

    def compose(self, b, bp):
        return self.z_compose.get((b, bp))

    def composable_pairs(self):
        return [((b, bp), bb) for (b, bp), bb in self.z_compose.items()]

    def twist(self, b, bp):
        return self.z_twist[(b, bp)]


@dataclass
class QuotientResult:
    quotient: QuotientCog
    report: CoveringReport
    sheet_count: int

    def to_json(self):
        return {
            "subdivided": self.quotient.subdivided,
            "group_order": len(self.quotient.autos),
            "orbit_vertices": len(self.quotient.reps),
            "orbit_edges": len(self.quotient.z_edges),
            "sheets": self.sheet_count,
            "ok": self.report.ok,
        }


def _quotient_morphism(qc: QuotientCog):
    f_vertex = {c: qc.rep_of[c] for c in qc.cells.cells}
    f_edge = {e: qc.edge_orbit[e] for e in qc.cells.edges}

    def make_phi(c):
        k = qc.k_to_rep[c]

        def phi(x):
            return (qc.apply_local(k, c, x), qc._id)

        return phi

    phi_vertex = {c: make_phi(c) for c in qc.cells.cells}
    phi_edge = {}
    for e in qc.cells.edges:
        b = qc.edge_orbit[e]
        delta = qc._comp[
            (
                qc.k_to_rep[e[1]],
                qc._comp[(qc._inv[qc.k_to_rep[e[0]]], qc._inv[qc.kappa[b]])],
            )
        ]
        phi_edge[e] = ((), delta)
    return f_vertex, f_edge, phi_vertex, phi_edge


def quotient_cog(clump: Clump, autos) -> QuotientResult:
    """Quotient complex of groups and the verified covering onto it."""
    qc = QuotientCog(clump, autos)
    src = _SourceAdapter(qc.cells)
    f_vertex, f_edge, phi_vertex, phi_edge = _quotient_morphism(qc)
    report = check_covering(src, qc, f_vertex, f_edge, phi_vertex, phi_edge)
    return QuotientResult(qc, report, report.sheet_count)


def composed_quotient_covering(labeling, autos_on_chamber) -> CoveringReport:
    """Verify the composite of the unfolding covering with a quotient.

    The unfolding covering onto the one-chamber complex of groups is
    re-presented over residue chains (labels transported to chain edges by
    their minimal faces), then composed with the quotient covering of the
    single chamber under the given automorphisms.  The composite must again
    satisfy every covering axiom.
    """
    clump = labeling.clump
    building = clump.building
    y0 = Clump(building, {()}, validate=False)
    qc = QuotientCog(y0, autos_on_chamber)
    src_cells = _Cells(clump, qc.subdivided)
    src = _SourceAdapter(src_cells)

    def type_chain(cell):
        return tuple((f[0], ()) for f in cell)

    # unfolding covering over chains: labels attach by minimal faces
    def chain_label(e):
        v_from = src_cells.group_face(e[0])
        v_to = src_cells.group_face(e[1])
        if v_from == v_to:
            return ()
        vec = labeling.labels[(v_from, v_to)]
        return building.gp.norm(tuple((g, x) for g, x in enumerate(vec) if x))

    fq_vertex, fq_edge, phiq_vertex, phiq_edge = _quotient_morphism(qc)

    f_vertex = {c: fq_vertex[type_chain(c)] for c in src_cells.cells}
    f_edge = {}
    phi_vertex = {}
    phi_edge = {}
    for c in src_cells.cells:
        mid = type_chain(c)

        def make(mid=mid):
            inner = phiq_vertex[mid]
            return lambda x: inner(x)

        phi_vertex[c] = make()
    for e in src_cells.edges:
        mid_e = (type_chain(e[0]), type_chain(e[1]))
        f_edge[e] = fq_edge[mid_e]
        t_rep = f_vertex[e[1]]
        carried = phiq_vertex[mid_e[1]](chain_label(e))
        phi_edge[e] = qc.mult(t_rep, carried, phiq_edge[mid_e])
    return check_covering(src, qc, f_vertex, f_edge, phi_vertex, phi_edge)


# ---------------------------------------------------------------------------
# discreteness classification
# ---------------------------------------------------------------------------

RIGIDITY_RANK_CAP = 10


def nerve_automorphisms(building_or_system):
    sysm = getattr(building_or_system, "system", building_or_system)
    if sysm.rank > RIGIDITY_RANK_CAP:
        raise SizeCapError(
            f"rank {sysm.rank} exceeds the rigidity enumeration cap"
        )
    rank = sysm.rank
    out = []
    for perm in itertools.permutations(range(rank)):
        if all(
            ((sysm.comm[i] >> j) & 1) == ((sysm.comm[perm[i]] >> perm[j]) & 1)
            for i in range(rank)
            for j in range(i + 1, rank)
        ):
            out.append(perm)
    return out


def is_rigid(building_or_system) -> bool:
    """No nontrivial nerve automorphism fixes a closed vertex star pointwise."""
    sysm = getattr(building_or_system, "system", building_or_system)
    rank = sysm.rank
    autos = nerve_automorphisms(sysm)
    for perm in autos:
        if all(perm[i] == i for i in range(rank)):
            continue
        for v in range(rank):
            star = {v} | {
                j for j in range(rank) if (sysm.comm[v] >> j) & 1
            }
            if all(perm[x] == x for x in star):
                return False
    return True


@dataclass(frozen=True)
class DiscretenessVerdict:
    case: str  # "finite", "1", "2", "3"
    g0_discrete: bool
    g_discrete: bool
    nerve_rigid: bool
    reason: str

    def to_json(self):
        return {
            "case": self.case,
            "type_preserving_discrete": self.g0_discrete,
            "full_group_discrete": self.g_discrete,
            "nerve_rigid": self.nerve_rigid,
            "reason": self.reason,
        }


def classify_discreteness(building: Building) -> DiscretenessVerdict:
    sysm = building.system
    qs = building.gp.qs
    rigid = is_rigid(sysm)
    if sysm.is_finite():
        return DiscretenessVerdict(
            "finite", True, True, rigid, "finite Coxeter group, finite building"
        )
    rank = sysm.rank
    for i in range(rank):
        if qs[i] <= 2:
            continue
        for j in range(rank):
            if i != j and not (sysm.comm[i] >> j) & 1:
                return DiscretenessVerdict(
                    "1",
                    False,
                    False,
                    rigid,
                    f"q[{sysm.generators[i]}] > 2 with no relation to "
                    f"{sysm.generators[j]}",
                )
    if all(q == 2 for q in qs):
        return DiscretenessVerdict(
            "2",
            True,
            rigid,
            rigid,
            "all parameters are 2; full group follows nerve rigidity",
        )
    return DiscretenessVerdict(
        "3",
        True,
        rigid,
        rigid,
        "every thick direction commutes with everything; "
        "full group follows nerve rigidity",
    )


# ---------------------------------------------------------------------------
# apartments through the base chamber
# ---------------------------------------------------------------------------


def w_ball(system, n):
    """Elements of the thin chamber system within combinatorial radius n."""
    from . import coxeter

    poset = coxeter.spherical_poset(system)
    maximal = poset.maximal()
    subsets = []
    for t in maximal:
        words = [[]]
        for s in sorted(t, key=lambda s: system.index[s]):
            words += [w + [s] for w in words]
        subsets.append([tuple(w) for w in words])
    current = {w_identity(system)}
    frontier = [w_identity(system)]
    for _ in range(n):
        new = []
        for w in frontier:
            for words in subsets:
                for word in words:
                    cand = w_reduce(system, w.word + word)
                    if cand not in current:
                        current.add(cand)
                        new.append(cand)
        frontier = new
        if not frontier:
            break
    return current


@dataclass(frozen=True)
class ApartmentFragment:
    """Thin, distance-faithful section of the ball over the thin ball."""

    building: Building
    radius: int
    chambers: frozenset
    by_w: tuple  # sorted ((w word), chamber) pairs

    def chamber_for(self, word):
        return dict(self.by_w)[tuple(word)]


APARTMENT_COUNT_CAP = 20000


def apartments_through_base(building: Building, n: int, cap=APARTMENT_COUNT_CAP):
    """Every apartment fragment through the base chamber in the radius-n ball.

    A fragment assigns to each thin-ball element a chamber, adjacent in the
    right type to each of its shorter neighbors; elements whose neighbors
    leave the thin ball impose nothing.
    """
    sysm = building.system
    gp = building.gp
    ball = building.ball(n)
    words = sorted(
        (w.word for w in w_ball(sysm, n)),
        key=lambda w: (len(w), tuple(sysm.index[s] for s in w)),
    )
    windex = {w: k for k, w in enumerate(words)}
    # descents: letters ending a reduced expression
    descents = {}
    for w in words:
        ds = []
        for s in sysm.generators:
            shorter = w_reduce(sysm, w + (s,)).word
            if len(shorter) < len(w) and shorter in windex:
                ds.append((s, shorter))
        descents[w] = ds

    results = []
    assignment = {(): ()}

    def backtrack(k):
        if len(results) > cap:
            raise SizeCapError("apartment enumeration exceeded its cap")
        if k == len(words):
            results.append(dict(assignment))
            return
        w = words[k]
        ds = descents[w]
        if not ds:
            raise InternalError("nonidentity element with no descent")
        s0, v0 = ds[0]
        g0 = sysm.index[s0]
        base = assignment[v0]
        for e in range(1, gp.qs[g0]):
            cand = gp.mul(base, ((g0, e),))
            if cand not in ball.chambers:
                continue
            ok = True
            for s, v in ds[1:]:
                d = gp.delta(assignment[v], cand)
                if len(d) != 1 or d[0][0] != sysm.index[s]:
                    ok = False
                    break
            if ok:
                assignment[w] = cand
                backtrack(k + 1)
                del assignment[w]

    backtrack(1)
    fragments = []
    for mapping in results:
        by_w = tuple(sorted(mapping.items()))
        fragments.append(
            ApartmentFragment(
                building, n, frozenset(mapping.values()), by_w
            )
        )
    fragments.sort(key=lambda f: tuple(sorted(syllable_key(c) for c in f.chambers)))
    return fragments


def is_apartment_fragment(building, n, chambers) -> bool:
    """Direct validation of the fragment conditions on a chamber set."""
    chambers = frozenset(chambers)
    if () not in chambers:
        return False
    words = {w.word for w in w_ball(building.system, n)}
    shadows = {}
    for c in chambers:
        w = tuple(building.system.generators[g] for g, _ in c)
        if w in shadows:
            return False
        shadows[w] = c
    if set(shadows) != words:
        return False
    for w, c in shadows.items():
        for s in building.system.generators:
            ws = w_reduce(building.system, w + (s,)).word
            if ws not in shadows:
                continue
            d = building.gp.delta(shadows[ws], c)
            if len(d) != 1 or d[0][0] != building.system.index[s]:
                return False
    return True


# ---------------------------------------------------------------------------
# sheet swaps and strong-transitivity witnesses
# ---------------------------------------------------------------------------


def sheet_swap(clump_before: Clump, side, i: int, j: int) -> BallAutomorphism:
    """Automorphism of the unfolding fixing the old clump and exchanging
    two sheets through the mirror correspondence."""
    part = sheets(clump_before, side)
    nblocks = len(part.blocks)
    if i == j or not (0 <= i < nblocks and 0 <= j < nblocks):
        raise DomainError(f"invalid sheet indices {i},{j} among {nblocks}")
    tables = sheet_mirror_table(clump_before, part)
    after = unfold(clump_before, side)
    mapping = {c: c for c in after.chambers}
    for m in side.mirrors:
        a, b = tables[i][m], tables[j][m]
        mapping[a], mapping[b] = b, a
    rank = len(clump_before.building.gp.qs)
    h = BallAutomorphism(after, mapping, tuple(range(rank)))
    problems = h.verify()
    if problems:
        raise InternalError(f"sheet swap is not an automorphism: {problems[0]}")
    return h


def extend_to_ball(partial: dict, ball: Clump, perm=None) -> BallAutomorphism:
    """Complete a partial chamber map to an automorphism of the ball.

    Depth-first search over the unassigned chambers, keeping full local
    consistency: a candidate image must reproduce the adjacency type (or
    non-adjacency) with every chamber already mapped.
    """
    bld = ball.building
    rank = len(bld.gp.qs)
    perm = tuple(range(rank)) if perm is None else tuple(perm)
    todo = sorted(ball.chambers - set(partial), key=syllable_key)
    mapping = dict(partial)
    used = set(mapping.values())

    neighbors = {}
    for c in ball.chambers:
        for g in range(rank):
            for e in range(1, bld.gp.qs[g]):
                nb = bld.gp.mul(c, ((g, e),))
                if nb in ball.chambers:
                    neighbors.setdefault(c, []).append((g, nb))

    def candidates(c):
        anchor = None
        for g, nb in neighbors.get(c, ()):
            if nb in mapping:
                anchor = (g, nb)
                break
        if anchor is None:
            return [x for x in sorted(ball.chambers - used, key=syllable_key)]
        g, nb = anchor
        out = []
        for e in range(1, bld.gp.qs[perm[g]]):
            cand = bld.gp.mul(mapping[nb], ((perm[g], e),))
            if cand in used or cand not in ball.chambers:
                continue
            ok = True
            for d, img in mapping.items():
                t = bld.adjacency_type(c, d)
                ti = bld.adjacency_type(cand, img)
                if ti != (None if t is None else perm[t]):
                    ok = False
                    break
            if ok:
                out.append(cand)
        return out

    order = []
    seen = set(mapping)
    queue = sorted(mapping, key=syllable_key)
    while queue:
        c = queue.pop(0)
        for _, nb in neighbors.get(c, ()):
            if nb not in seen:
                seen.add(nb)
                order.append(nb)
                queue.append(nb)
    for c in todo:
        if c not in seen:
            order.append(c)

    def solve(k):
        if k == len(order):
            return True
        c = order[k]
        for cand in candidates(c):
            mapping[c] = cand
            used.add(cand)
            if solve(k + 1):
                return True
            del mapping[c]
            used.discard(cand)
        return False

    if not solve(0):
        raise DomainError("partial map does not extend to the ball")
    h = BallAutomorphism(ball, mapping, perm)
    problems = h.verify()
    if problems:
        raise InternalError(f"extension is not an automorphism: {problems[0]}")
    return h


def transitivity_witness(
    building: Building, frag1: ApartmentFragment, frag2: ApartmentFragment, n: int
) -> BallAutomorphism:
    """A ball automorphism fixing the base chamber with h(frag1) = frag2.

    Walks the unfolding sequence of the ball; at the first clump where the
    image of the first fragment and the second fragment disagree, their new
    chambers lie in different sheets of that unfolding, and swapping those
    sheets (extended back to the whole ball) restores agreement.
    """
    if frag1.radius != n or frag2.radius != n:
        raise DomainError("fragments were enumerated at a different radius")
    ball, steps = unfold_steps_to_ball(building, n)
    for frag in (frag1, frag2):
        if not frag.chambers <= ball.chambers or not is_apartment_fragment(
            building, n, frag.chambers
        ):
            raise DomainError("not an apartment fragment through the base")
    h = identity_automorphism(ball)
    for step in steps:
        image = frozenset(h.mapping[c] for c in frag1.chambers)
        a = image & step.after.chambers
        b = frag2.chambers & step.after.chambers
        if a == b:
            continue
        if a & step.before.chambers != b & step.before.chambers:
            raise InternalError("fragments disagree before the current step")
        part = sheets(step.before, step.side)
        blocks_a = {
            k for k, blk in enumerate(part.blocks) if blk & (a - step.before.chambers)
        }
        blocks_b = {
            k for k, blk in enumerate(part.blocks) if blk & (b - step.before.chambers)
        }
        if len(blocks_a) != 1 or len(blocks_b) != 1:
            raise InternalError("fragment meets several sheets of one unfolding")
        ia, ib = blocks_a.pop(), blocks_b.pop()
        if ia == ib:
            raise InternalError("distinct fragments in the same sheet")
        swap = sheet_swap(step.before, step.side, ia, ib)
        g = extend_to_ball(dict(swap.mapping), ball)
        h = g.compose(h)
    final = frozenset(h.mapping[c] for c in frag1.chambers)
    if final != frag2.chambers:
        raise InternalError("witness construction did not align the fragments")
    if h.mapping[()] != ():
        raise InternalError("witness moved the base chamber")
    return h
