"""Models of a finite site: lex, cover-preserving set-valued functors.

Enumeration, the Nat-limit bijection over the category of elements, the
lex-cover-preserving hull, and the Kan-extension point functor (a union-find
colimit over elements).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from . import limits
from .fincat import (COVARIANT, FinCategory, NatTransData, SetValuedFunctor,
                     all_nat_transformations)
from .site import SiteSpec


@dataclass(frozen=True)
class ModelBound:
    max_carrier: int

    def __post_init__(self):
        if self.max_carrier < 1:
            raise ValueError("bound must be at least 1")


@dataclass(frozen=True)
class Model:
    functor: SetValuedFunctor
    is_lex: bool
    preserves_covers: bool

    @staticmethod
    def analyze(site: SiteSpec, functor: SetValuedFunctor) -> "Model":
        return Model(functor, is_lex(site.cat, functor),
                     preserves_covers(functor, site))


@lru_cache(maxsize=None)
def _lex_probes(cat: FinCategory):
    """Terminal object plus one canonical pullback square per cospan.

    At fixture scale these generate all finite limits; binary products are
    the cospans over the terminal object.
    """
    terminal = limits.terminal_object(cat)
    squares = []
    for f in cat.morphisms:
        for g in cat.morphisms:
            if cat.cod[f] != cat.cod[g]:
                continue
            square = limits.pullback(cat, f, g)
            if square is not None:
                squares.append((f, g, square))
    return terminal, tuple(squares)


def is_lex(cat: FinCategory, m: SetValuedFunctor) -> bool:
    """m sends the terminal object to a point and every canonical pullback
    square to a bijection onto the set-level fiber product."""
    if m.variance != COVARIANT:
        raise ValueError("lexness is checked for covariant functors")
    terminal, squares = _lex_probes(cat)
    if terminal is None or m.sizes[terminal] != 1:
        return False
    for f, g, square in squares:
        fiber = [(a, b)
                 for a in m.carrier(cat.dom[f]) for b in m.carrier(cat.dom[g])
                 if m.action[f][a] == m.action[g][b]]
        image = [(m.action[square.to_left][p], m.action[square.to_right][p])
                 for p in m.carrier(square.apex)]
        if len(set(image)) != m.sizes[square.apex] or set(image) != set(fiber) \
                or m.sizes[square.apex] != len(fiber):
            return False
    return True


def preserves_covers(m: SetValuedFunctor, site: SiteSpec) -> bool:
    """Every E-family maps to a jointly surjective family (the empty family
    asks for an empty image carrier)."""
    for fam in site.covers:
        hit = set()
        for f in fam.legs:
            hit.update(m.action[f])
        if len(hit) != m.sizes[fam.codomain]:
            return False
    return True


def enumerate_set_functors(cat: FinCategory, bound: int,
                           fixed_sizes=None, prune=None):
    """All covariant functors with carriers <= bound, in lexicographic order
    of (sizes, action tables), by backtracking over morphism actions.

    ``prune(sizes)`` may reject a size assignment before actions are tried.
    """
    nonid = [f for f in cat.morphisms if not cat.is_identity(f)]
    # composition facts among non-identity morphisms, checked incrementally
    triples = [(g, f, cat.comp[g][f]) for g in nonid for f in nonid
               if cat.cod[f] == cat.dom[g] and not cat.is_identity(cat.comp[g][f])]
    id_facts = [(g, f, cat.comp[g][f]) for g in cat.morphisms for f in cat.morphisms
                if cat.cod[f] == cat.dom[g] and cat.is_identity(cat.comp[g][f])
                and not (cat.is_identity(g) and cat.is_identity(f))]

    size_choices = itertools.product(*[range(bound + 1) for _ in cat.objects]) \
        if fixed_sizes is None else [tuple(fixed_sizes)]
    for sizes in size_choices:
        if prune is not None and not prune(sizes):
            continue
        action = [None] * cat.n_morphisms
        for x in cat.objects:
            action[cat.identity[x]] = tuple(range(sizes[x]))

        def assign(k):
            if k == len(nonid):
                for g, f, h in id_facts:  # g∘f an identity: composite must be too
                    comp = tuple(action[g][v] for v in action[f])
                    if comp != tuple(range(sizes[cat.dom[f]])):
                        return
                yield SetValuedFunctor(cat, COVARIANT, sizes, tuple(action))
                return
            f = nonid[k]
            src, tgt = sizes[cat.dom[f]], sizes[cat.cod[f]]
            for table in itertools.product(range(tgt), repeat=src):
                action[f] = table
                ok = True
                for g, fa, h in triples:
                    if action[g] is None or action[fa] is None or action[h] is None:
                        continue
                    if tuple(action[g][v] for v in action[fa]) != action[h]:
                        ok = False
                        break
                if ok:
                    yield from assign(k + 1)
            action[f] = None

        yield from assign(0)


def enumerate_models(site: SiteSpec, bound: ModelBound) -> list[Model]:
    """All lex cover-preserving functors with carriers <= B, up to table
    equality, lexicographically; terminal preservation prunes the size search."""
    cat = site.cat
    terminal, _ = _lex_probes(cat)
    if terminal is None:
        return []

    def prune(sizes):
        if sizes[terminal] != 1:
            return False
        for fam in site.covers:  # empty covers force empty carriers
            if not fam.legs and sizes[fam.codomain] != 0:
                return False
        return True

    out = []
    for functor in enumerate_set_functors(cat, bound.max_carrier, prune=prune):
        if is_lex(cat, functor) and preserves_covers(functor, site):
            out.append(Model(functor, True, True))
    return out


def enumerate_lex_functors(cat: FinCategory, bound: int) -> list[SetValuedFunctor]:
    """Lex functors with carriers <= B, no cover condition (feeds C-tilde)."""
    terminal, _ = _lex_probes(cat)
    if terminal is None:
        return []
    return [fn for fn in enumerate_set_functors(
                cat, bound, prune=lambda sizes: sizes[terminal] == 1)
            if is_lex(cat, fn)]


def nat_transformations(m: SetValuedFunctor, n: SetValuedFunctor) -> list[NatTransData]:
    return list(all_nat_transformations(m, n))


def elements_category(m: SetValuedFunctor):
    """Objects of ∫M as (object, point) pairs in ascending order."""
    return [(x, p) for x in m.cat.objects for p in m.carrier(x)]


def nat_via_limit(m: SetValuedFunctor, n: SetValuedFunctor) -> list[tuple[int, ...]]:
    """lim over ∫M of N(x): families (a_(x,p)) with N(f)(a_(x,p)) = a_(y,M(f)p).

    Returned in lexicographic order over the ascending element list.
    """
    cat = m.cat
    elems = elements_category(m)
    position = {e: k for k, e in enumerate(elems)}
    out = []
    for values in itertools.product(*[n.carrier(x) for x, _ in elems]):
        ok = True
        for f in cat.morphisms:
            x, y = cat.dom[f], cat.cod[f]
            for p in m.carrier(x):
                if n.action[f][values[position[(x, p)]]] \
                        != values[position[(y, m.action[f][p])]]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(values)
    return out


def delta_pairing(m: SetValuedFunctor, n: SetValuedFunctor):
    """The canonical map Nat(M,N) -> lim_{∫M} N, alpha |-> (alpha_x(p)).

    Returns (nats, families, pairing) where pairing[i] is the family index
    of the i-th transformation, or None when some image is not a family.
    """
    nats = nat_transformations(m, n)
    families = nat_via_limit(m, n)
    index = {fam: k for k, fam in enumerate(families)}
    elems = elements_category(m)
    pairing = []
    for alpha in nats:
        fam = tuple(alpha.components[x][p] for x, p in elems)
        if fam not in index:
            return nats, families, None
        pairing.append(index[fam])
    return nats, families, pairing


def lex_hull(site: SiteSpec, m: SetValuedFunctor, seed) -> tuple[tuple[int, ...], ...]:
    """Least sub-collection of M containing the seed and stable under the
    three closure operators: M(f)-images, one canonical cover preimage per
    element, and elements forced by limit cones over already-kept points.

    The cover preimage is the least element of the least-id leg that hits
    the point; the choice depends only on M, which keeps the closure
    extensive, monotone and idempotent.
    """
    cat = site.cat
    kept = [set(seed[x]) if x < len(seed) else set() for x in cat.objects] \
        if not isinstance(seed, dict) else [set(seed.get(x, ())) for x in cat.objects]
    for x in cat.objects:
        if not all(0 <= e < m.sizes[x] for e in kept[x]):
            raise ValueError("seed escapes the carriers of M")
    terminal, squares = _lex_probes(cat)
    changed = True
    while changed:
        changed = False
        for f in cat.morphisms:
            x, y = cat.dom[f], cat.cod[f]
            for e in list(kept[x]):
                if m.action[f][e] not in kept[y]:
                    kept[y].add(m.action[f][e])
                    changed = True
        for fam in site.covers:
            if not fam.legs:
                continue
            for e in list(kept[fam.codomain]):
                pre = None
                for leg in fam.legs:
                    for cand in m.carrier(cat.dom[leg]):
                        if m.action[leg][cand] == e:
                            pre = (leg, cand)
                            break
                    if pre is not None:
                        break
                if pre is not None and pre[1] not in kept[cat.dom[pre[0]]]:
                    kept[cat.dom[pre[0]]].add(pre[1])
                    changed = True
        if terminal is not None and m.sizes[terminal] == 1 and 0 not in kept[terminal]:
            kept[terminal].add(0)  # the empty compatible family forces the point
            changed = True
        for f, g, square in squares:
            xa, xb = cat.dom[f], cat.dom[g]
            for a in list(kept[xa]):
                for b in list(kept[xb]):
                    if m.action[f][a] != m.action[g][b]:
                        continue
                    for p in m.carrier(square.apex):
                        if m.action[square.to_left][p] == a \
                                and m.action[square.to_right][p] == b:
                            if p not in kept[square.apex]:
                                kept[square.apex].add(p)
                                changed = True
                            break
    return tuple(tuple(sorted(k)) for k in kept)


def subfunctor(m: SetValuedFunctor, kept) -> SetValuedFunctor:
    """M restricted to the kept elements, carriers renumbered densely."""
    cat = m.cat
    index = [{e: k for k, e in enumerate(kept[x])} for x in cat.objects]
    sizes = tuple(len(kept[x]) for x in cat.objects)
    action = []
    for f in cat.morphisms:
        x, y = m.source_obj(f), m.target_obj(f)
        action.append(tuple(index[y][m.action[f][e]] for e in kept[x]))
    return SetValuedFunctor(cat, m.variance, sizes, tuple(action))


class _UnionFind:
    def __init__(self, items):
        self.parent = {item: item for item in items}

    def find(self, item):
        while self.parent[item] != item:
            self.parent[item] = self.parent[self.parent[item]]
            item = self.parent[item]
        return item

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass(frozen=True)
class LanResult:
    """colim over ∫F of M: zig-zag classes of (object, section, point)."""

    classes: tuple[tuple[tuple[int, int, int], ...], ...]

    @property
    def size(self) -> int:
        return len(self.classes)

    def class_of(self, x: int, s: int, point: int) -> int:
        for k, cls in enumerate(self.classes):
            if (x, s, point) in cls:
                return k
        raise ValueError("triple not in the colimit")


def lan_ay(m: SetValuedFunctor, f_presheaf) -> LanResult:
    """The Kan-extension point functor on one presheaf, by union-find.

    Triples (x, s ∈ F(x), p ∈ M(x)) are glued along every arrow of the base:
    for h: x -> y and t ∈ F(y), (x, F(h)(t), p) ~ (y, t, M(h)(p)).
    Accepts a bare presheaf or a sheaf object carrying one.
    """
    f_presheaf = getattr(f_presheaf, "presheaf", f_presheaf)
    cat = m.cat
    triples = [(x, s, p) for x in cat.objects
               for s in f_presheaf.carrier(x) for p in m.carrier(x)]
    uf = _UnionFind(triples)
    for h in cat.morphisms:
        x, y = cat.dom[h], cat.cod[h]
        for t in f_presheaf.carrier(y):
            s = f_presheaf.action[h][t]  # restriction along h
            for p in m.carrier(x):
                uf.union((x, s, p), (y, t, m.action[h][p]))
    buckets = {}
    for triple in triples:
        buckets.setdefault(uf.find(triple), []).append(triple)
    classes = tuple(tuple(sorted(buckets[root])) for root in sorted(buckets))
    return LanResult(classes)


def lan_map(m: SetValuedFunctor, theta: NatTransData) -> dict[int, int]:
    """Map induced on lan_ay classes by a presheaf map theta: F => G."""
    src = lan_ay(m, theta.source)
    tgt = lan_ay(m, theta.target)
    out = {}
    for k, cls in enumerate(src.classes):
        x, s, p = cls[0]
        out[k] = tgt.class_of(x, theta.components[x][s], p)
    return out


def eta_check(site: SiteSpec, m: SetValuedFunctor) -> bool:
    """lan_ay(M, ay(x)) is naturally isomorphic to M(x), componentwise.

    The canonical comparison sends p to the class of (x, unit(id_x), p);
    bijectivity at every x plus naturality along every base morphism is the
    finite content of the eta-is-iso claim.
    """
    from .presheaf import ay
    cat = site.cat
    lans = {}
    can = {}
    for x in cat.objects:
        sh = ay(site, x)
        lans[x] = lan_ay(m, sh.sheaf.presheaf)
        id_pos = cat.hom(x, x).index(cat.identity[x])
        generic = sh.unit.components[x][id_pos]
        can[x] = [lans[x].class_of(x, generic, p) for p in m.carrier(x)]
        if len(set(can[x])) != m.sizes[x] or lans[x].size != m.sizes[x]:
            return False
    for f in cat.morphisms:
        x, y = cat.dom[f], cat.cod[f]
        from .presheaf import sheafified_postcompose
        pushed = lan_map(m, sheafified_postcompose(site, f))
        for p in m.carrier(x):
            if pushed[can[x][p]] != can[y][m.action[f][p]]:
                return False
    return True
