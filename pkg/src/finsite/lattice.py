"""Finite distributive lattices: the powerset embedding through
join-irreducibles and the same embedding recovered from two-valued
chase models — the corollary's two routes, cross-validated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .chase import CONTAINED, WITNESS, separate_subobjects
from .fincat import poset_category
from .site import Family, SiteSpec


class NonDistributiveError(Exception):
    pass


class InconclusiveError(Exception):
    """A chase budget ran out before the embedding could be certified."""


@dataclass(frozen=True)
class FinLattice:
    """A finite lattice as a leq matrix; meets and joins are table lookups."""

    leq: tuple[tuple[bool, ...], ...]
    names: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.leq)

    @property
    def elements(self) -> range:
        return range(self.n)

    def name(self, a: int) -> str:
        return self.names[a] if self.names else str(a)

    @cached_property
    def meet(self):
        return self._bound_table(lower=True)

    @cached_property
    def join(self):
        return self._bound_table(lower=False)

    def _bound_table(self, lower: bool):
        table = []
        for a in self.elements:
            row = []
            for b in self.elements:
                if lower:
                    bounds = [c for c in self.elements
                              if self.leq[c][a] and self.leq[c][b]]
                    best = [c for c in bounds
                            if all(self.leq[d][c] for d in bounds)]
                else:
                    bounds = [c for c in self.elements
                              if self.leq[a][c] and self.leq[b][c]]
                    best = [c for c in bounds
                            if all(self.leq[c][d] for d in bounds)]
                row.append(best[0] if best else None)
            table.append(tuple(row))
        return tuple(table)

    @cached_property
    def bottom(self):
        for a in self.elements:
            if all(self.leq[a][b] for b in self.elements):
                return a
        return None

    @cached_property
    def top(self):
        for a in self.elements:
            if all(self.leq[b][a] for b in self.elements):
                return a
        return None

    def join_of(self, subset) -> int | None:
        out = self.bottom
        for a in subset:
            if out is None:
                return None
            out = self.join[out][a]
        return out

    def meet_of(self, subset) -> int | None:
        out = self.top
        for a in subset:
            if out is None:
                return None
            out = self.meet[out][a]
        return out


def validate_lattice(lat: FinLattice) -> list[str]:
    report = []
    n = lat.n
    for a in range(n):
        if not lat.leq[a][a]:
            report.append(f"order not reflexive at {a}")
    for a in range(n):
        for b in range(n):
            if a != b and lat.leq[a][b] and lat.leq[b][a]:
                report.append(f"order not antisymmetric at ({a},{b})")
            for c in range(n):
                if lat.leq[a][b] and lat.leq[b][c] and not lat.leq[a][c]:
                    report.append(f"order not transitive at ({a},{b},{c})")
    if report:
        return report
    for a in range(n):
        for b in range(n):
            if lat.meet[a][b] is None:
                report.append(f"meet missing for ({a},{b})")
            if lat.join[a][b] is None:
                report.append(f"join missing for ({a},{b})")
    return report


def is_distributive(lat: FinLattice) -> bool:
    """Full triple scan of a ∧ (b ∨ c) = (a ∧ b) ∨ (a ∧ c)."""
    for a, b, c in itertools.product(lat.elements, repeat=3):
        lhs = lat.meet[a][lat.join[b][c]]
        rhs = lat.join[lat.meet[a][b]][lat.meet[a][c]]
        if lhs != rhs:
            return False
    return True


def complements(lat: FinLattice):
    """Complement table, or None where no (unique) complement exists."""
    out = []
    for a in lat.elements:
        cands = [b for b in lat.elements
                 if lat.meet[a][b] == lat.bottom and lat.join[a][b] == lat.top]
        out.append(cands[0] if len(cands) == 1 else None)
    return tuple(out)


def is_2_distributive_identity(lat: FinLattice, pairs) -> bool:
    """The Boolean identity  ⋂_i (b_i0 ∨ b_i1) = ⋃_{h: I -> 2} ⋂_i b_ih(i),
    checked by computing both sides outright."""
    comp = complements(lat)
    if any(c is None for c in comp):
        raise ValueError("the identity needs a Boolean lattice with complements")
    pairs = list(pairs)
    lhs = lat.meet_of(lat.join[b0][b1] for b0, b1 in pairs)
    rhs = lat.join_of(
        lat.meet_of(pair[h] for pair, h in zip(pairs, choice))
        for choice in itertools.product((0, 1), repeat=len(pairs)))
    return lhs == rhs


def join_irreducibles(lat: FinLattice) -> list[int]:
    """Non-bottom elements that are not proper joins."""
    out = []
    for p in lat.elements:
        if p == lat.bottom:
            continue
        if any(lat.join[a][b] == p for a in lat.elements for b in lat.elements
               if a != p and b != p):
            continue
        out.append(p)
    return out


@dataclass(frozen=True)
class Embedding:
    """An order map into a powerset: element -> frozenset over the index set."""

    points: tuple  # the index set X
    images: tuple[frozenset, ...]

    def verify(self, lat: FinLattice, prescribed) -> list[str]:
        report = []
        if len(set(self.images)) != lat.n:
            report.append("not injective")
        for a in lat.elements:
            for b in lat.elements:
                if self.images[lat.meet[a][b]] != self.images[a] & self.images[b]:
                    report.append(f"meet not preserved at ({a},{b})")
        top_image = frozenset(self.points)
        if lat.top is not None and self.images[lat.top] != top_image:
            report.append("empty meet (top) not preserved")
        for subset in prescribed:
            join = lat.join_of(subset)
            union = frozenset().union(*(self.images[a] for a in subset)) \
                if subset else frozenset()
            if self.images[join] != union:
                report.append(f"prescribed join of {tuple(subset)} not preserved")
        return report


def birkhoff_embed(lat: FinLattice, prescribed=()) -> Embedding:
    """a |-> {join-irreducible p : p <= a}; injective and meet-preserving on
    any finite distributive lattice, and join-preserving outright there."""
    if not is_distributive(lat):
        raise NonDistributiveError("NON_DISTRIBUTIVE")
    for subset in prescribed:
        if lat.join_of(subset) is None:
            raise ValueError("a prescribed subset has no join")
    points = tuple(join_irreducibles(lat))
    images = tuple(frozenset(p for p in points if lat.leq[p][a])
                   for a in lat.elements)
    return Embedding(points, images)


def lattice_site(lat: FinLattice, prescribed=()) -> SiteSpec:
    """The lattice as a poset site whose covers are the prescribed joins."""
    cat = poset_category([list(row) for row in lat.leq],
                         tuple(lat.name(a) for a in lat.elements))
    terminal = lat.top
    covers = [Family.make(terminal, [cat.identity[terminal]])]
    for subset in prescribed:
        join = lat.join_of(subset)
        legs = []
        for a in subset:
            legs.append(cat.identity[a] if a == join
                        else cat.hom(a, join)[0])
        covers.append(Family.make(join, legs))
    return SiteSpec.make(cat, covers)


def model_embed(lat: FinLattice, prescribed=(), budget: int = 64) -> Embedding:
    """The corollary's model route: separate every non-contained pair by a
    chase witness; the two-valued witnesses index the powerset.

    A poset-site branch colimit is a representable, so each witness is the
    indicator of a principal filter; the map sends a to the set of witnesses
    that contain it.
    """
    if not is_distributive(lat):
        raise NonDistributiveError("NON_DISTRIBUTIVE")
    site = lattice_site(lat, prescribed)
    cat = site.cat
    top = lat.top
    witnesses = {}  # stabilized object -> model
    for a in lat.elements:
        for b in lat.elements:
            if lat.leq[a][b]:
                continue
            u = cat.identity[a] if a == top else cat.hom(a, top)[0]
            v = cat.identity[b] if b == top else cat.hom(b, top)[0]
            result = separate_subobjects(site, top, u, v, budget=budget)
            if result.verdict == CONTAINED:
                raise AssertionError("order disagrees with mono factorization")
            if result.verdict != WITNESS:
                raise InconclusiveError(f"budget exhausted separating ({a},{b})")
            witnesses[result.witness_branch.current] = result.witness
    points = tuple(sorted(witnesses))
    images = tuple(frozenset(w for w in points
                             if witnesses[w].functor.sizes[a] > 0)
                   for a in lat.elements)
    return Embedding(points, images)


def downset_lattice(n_points: int, relation) -> FinLattice:
    """The lattice of downsets of a poset given by its strict relation pairs."""
    leq_pts = [[i == j for j in range(n_points)] for i in range(n_points)]
    for i, j in relation:
        leq_pts[i][j] = True
    for k in range(n_points):  # transitive closure
        for i in range(n_points):
            for j in range(n_points):
                if leq_pts[i][k] and leq_pts[k][j]:
                    leq_pts[i][j] = True
    downsets = []
    for bits in itertools.product((0, 1), repeat=n_points):
        members = {i for i in range(n_points) if bits[i]}
        if all(j in members for i in members
               for j in range(n_points) if leq_pts[j][i]):
            downsets.append(frozenset(members))
    downsets.sort(key=lambda s: (len(s), tuple(sorted(s))))
    leq = tuple(tuple(a <= b for b in downsets) for a in downsets)
    return FinLattice(leq)


def _canonical_form(lat: FinLattice):
    """Isomorphism invariant by brute force over order-preserving bijections:
    the lexicographically least leq matrix over all relabelings."""
    n = lat.n
    best = None
    for perm in itertools.permutations(range(n)):
        mat = tuple(tuple(lat.leq[perm[a]][perm[b]] for b in range(n))
                    for a in range(n))
        if best is None or mat < best:
            best = mat
    return best


def distributive_catalogue(max_size: int = 6) -> list[FinLattice]:
    """Every distributive lattice with at most max_size elements, one per
    isomorphism class, via Birkhoff duality: downset lattices of all posets
    on at most max_size - 1 points (relations within a linear extension)."""
    seen = {}
    max_points = max_size - 1
    for n_points in range(max_points + 1):
        pairs = [(i, j) for i in range(n_points) for j in range(i + 1, n_points)]
        for bits in itertools.product((0, 1), repeat=len(pairs)):
            relation = [p for p, bit in zip(pairs, bits) if bit]
            rel_set = set(relation)
            ok = all((i, k) in rel_set
                     for i, j in relation for j2, k in relation if j2 == j)
            if not ok:
                continue
            lat = downset_lattice(n_points, relation)
            if lat.n > max_size:
                continue
            key = (lat.n, _canonical_form(lat))
            if key not in seen:
                seen[key] = lat
    return [seen[key] for key in sorted(seen)]


def m3() -> FinLattice:
    """The diamond M3: bottom, three incomparable atoms, top."""
    leq = [[i == j for j in range(5)] for i in range(5)]
    for a in range(5):
        leq[0][a] = True
        leq[a][4] = True
    return FinLattice(tuple(tuple(row) for row in leq),
                      ("bot", "x", "y", "z", "top"))


def n5() -> FinLattice:
    """The pentagon N5: 0 < a < b < 1 and 0 < c < 1 with c incomparable to a, b."""
    names = ("bot", "a", "b", "c", "top")
    leq = [[i == j for j in range(5)] for i in range(5)]
    for a in range(5):
        leq[0][a] = True
        leq[a][4] = True
    leq[1][2] = True
    return FinLattice(tuple(tuple(row) for row in leq), names)


def has_forbidden_sublattice(lat: FinLattice) -> bool:
    """Independent distributivity oracle: an M3 or N5 sublattice exists.

    A subset counts when it is closed under the ambient meet and join and its
    induced order matches one of the two forbidden shapes.
    """
    targets = [m3(), n5()]
    for subset in itertools.combinations(lat.elements, 5):
        closed = all(lat.meet[a][b] in subset and lat.join[a][b] in subset
                     for a in subset for b in subset)
        if not closed:
            continue
        sub_leq = FinLattice(tuple(
            tuple(lat.leq[a][b] for b in subset) for a in subset))
        for target in targets:
            if _canonical_form(sub_leq) == _canonical_form(target):
                return True
    return False
