"""Presheaves over a finite site: the +-construction, sheafification as two
plus passes, sheafified representables, and the cover-factorization lemmas.

Element ids of plus-carriers are canonical: classes of matching families are
indexed by their least representative in (sieve order, assignment) order, so
every downstream table is bit-identical across runs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .fincat import (CONTRAVARIANT, FinCategory, NatTransData, SetValuedFunctor,
                     all_nat_transformations, compose_nat, op_category,
                     representable_presheaf)
from .site import Sieve, SieveTopology, SiteSpec, site_topology


class FactorizationError(Exception):
    """Raised when a transformation is not natural enough to factor (FAILED)."""


def enumerate_presheaves(cat: FinCategory, bound: int):
    """All presheaves with carriers <= bound, via the covariant enumerator on
    the opposite category (the action tables transfer unchanged)."""
    from .models import enumerate_set_functors
    for fn in enumerate_set_functors(op_category(cat), bound):
        yield SetValuedFunctor(cat, CONTRAVARIANT, fn.sizes, fn.action)


def _sorted_arrows(sieve: Sieve) -> tuple[int, ...]:
    return tuple(sorted(sieve.arrows))


def matching_families(p: SetValuedFunctor, sieve: Sieve):
    """All compatible assignments over the sieve, lexicographic in arrow order.

    An assignment gives each arrow f in the sieve an element of P(dom f);
    compatibility demands assignment(f∘g) = P(g)(assignment(f)).
    """
    cat = p.cat
    arrows = _sorted_arrows(sieve)
    position = {f: k for k, f in enumerate(arrows)}
    out = []
    for values in itertools.product(*[p.carrier(cat.dom[f]) for f in arrows]):
        ok = True
        for f in arrows:
            for g in cat.into(cat.dom[f]):
                if values[position[cat.comp[f][g]]] != p.action[g][values[position[f]]]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(values)
    return arrows, out


def _agrees_on_refinement(cat, topology, x, fam1, fam2):
    """(S1,m1) ~ (S2,m2): agreement on some covering sieve inside S1 ∩ S2."""
    (s1, pos1, m1), (s2, pos2, m2) = fam1, fam2
    meet = s1.arrows & s2.arrows
    for s3 in topology.covering_sieves(x):
        if not s3.arrows <= meet:
            continue
        if all(m1[pos1[f]] == m2[pos2[f]] for f in s3.arrows):
            return True
    return False


@dataclass(frozen=True)
class PlusData:
    """P⁺ together with its unit and the class bookkeeping needed to locate
    an arbitrary matching family inside it."""

    source: SetValuedFunctor
    topology: SieveTopology
    presheaf: SetValuedFunctor
    unit: NatTransData
    # per object: one (sieve, arrows, assignment) representative per class
    representatives: tuple[tuple[tuple[Sieve, tuple[int, ...], tuple[int, ...]], ...], ...]

    def class_of(self, x: int, sieve: Sieve, assignment: tuple[int, ...]) -> int:
        position = {f: k for k, f in enumerate(_sorted_arrows(sieve))}
        candidate = (sieve, position, assignment)
        for k, (rsieve, rarrows, rassign) in enumerate(self.representatives[x]):
            rpos = {f: i for i, f in enumerate(rarrows)}
            if _agrees_on_refinement(self.source.cat, self.topology, x,
                                     candidate, (rsieve, rpos, rassign)):
                return k
        raise ValueError("assignment is not a matching family over a covering sieve")


@lru_cache(maxsize=None)
def plus(p: SetValuedFunctor, topology: SieveTopology) -> PlusData:
    """The +-construction: sections are classes of matching families over
    covering sieves, identified on common refining covers."""
    cat = p.cat
    fams_by_obj = []
    classes_by_obj = []
    for x in cat.objects:
        fams = []
        for sieve in topology.covering_sieves(x):
            arrows, assignments = matching_families(p, sieve)
            pos = {f: k for k, f in enumerate(arrows)}
            for assignment in assignments:
                fams.append((sieve, arrows, pos, assignment))
        classes = []  # list of lists of family indices
        for i, (s1, a1, p1, m1) in enumerate(fams):
            placed = False
            for cls in classes:
                s2, a2, p2, m2 = fams[cls[0]]
                if _agrees_on_refinement(cat, topology, x, (s1, p1, m1), (s2, p2, m2)):
                    cls.append(i)
                    placed = True
                    break
            if not placed:
                classes.append([i])
        fams_by_obj.append(fams)
        classes_by_obj.append(classes)

    reps = tuple(
        tuple((fams[cls[0]][0], fams[cls[0]][1], fams[cls[0]][3]) for cls in classes)
        for fams, classes in zip(fams_by_obj, classes_by_obj))
    sizes = tuple(len(classes) for classes in classes_by_obj)

    def locate(x, sieve, assignment):
        pos = {f: k for k, f in enumerate(_sorted_arrows(sieve))}
        for k, (rs, ra, rm) in enumerate(reps[x]):
            rpos = {f: i for i, f in enumerate(ra)}
            if _agrees_on_refinement(cat, topology, x,
                                     (sieve, pos, assignment), (rs, rpos, rm)):
                return k
        raise AssertionError("matching family escaped its own classes")

    action = []
    for f in cat.morphisms:
        x, z = cat.cod[f], cat.dom[f]  # contravariant: restrict along f: z -> x
        column = []
        for rs, ra, rm in reps[x]:
            pulled = Sieve(z, frozenset(
                g for g in cat.into(z) if cat.comp[f][g] in rs.arrows))
            pos = {a: k for k, a in enumerate(ra)}
            assignment = tuple(rm[pos[cat.comp[f][g]]]
                               for g in _sorted_arrows(pulled))
            column.append(locate(z, pulled, assignment))
        action.append(tuple(column))
    plus_presheaf = SetValuedFunctor(cat, CONTRAVARIANT, sizes, tuple(action))

    unit_components = []
    for x in cat.objects:
        maximal = Sieve(x, frozenset(cat.into(x)))
        arrows = _sorted_arrows(maximal)
        unit_components.append(tuple(
            locate(x, maximal, tuple(p.action[f][s] for f in arrows))
            for s in p.carrier(x)))
    unit = NatTransData(p, plus_presheaf, tuple(unit_components))
    return PlusData(p, topology, plus_presheaf, unit, reps)


def plus_map(theta: NatTransData, topology: SieveTopology) -> NatTransData:
    """Functorial action of the +-construction on a map of presheaves."""
    src_plus = plus(theta.source, topology)
    tgt_plus = plus(theta.target, topology)
    cat = theta.source.cat
    components = []
    for x in cat.objects:
        column = []
        for rs, ra, rm in src_plus.representatives[x]:
            pushed = tuple(theta.components[cat.dom[f]][v]
                           for f, v in zip(ra, rm))
            column.append(tgt_plus.class_of(x, rs, pushed))
        components.append(tuple(column))
    return NatTransData(src_plus.presheaf, tgt_plus.presheaf, tuple(components))


def is_sheaf(p: SetValuedFunctor, topology: SieveTopology) -> bool:
    """For every covering sieve the canonical comparison map is a bijection."""
    cat = p.cat
    for x in cat.objects:
        for sieve in topology.covering_sieves(x):
            arrows, fams = matching_families(p, sieve)
            images = {tuple(p.action[f][s] for f in arrows) for s in p.carrier(x)}
            if len(images) != p.sizes[x] or len(fams) != p.sizes[x]:
                return False
    return True


def sheaf_for_family(p: SetValuedFunctor, cat: FinCategory, fam) -> bool:
    """Descent along one family, phrased over the sieve it generates."""
    from .site import generated_sieve
    sieve = generated_sieve(cat, fam)
    arrows, fams = matching_families(p, sieve)
    images = {tuple(p.action[f][s] for f in arrows) for s in p.carrier(fam.codomain)}
    return len(images) == p.sizes[fam.codomain] and len(fams) == p.sizes[fam.codomain]


@dataclass(frozen=True)
class SheafObject:
    """A presheaf plus the per-sieve bijection certificates."""

    presheaf: SetValuedFunctor
    certificate: tuple  # (object, sieve, per-section assignment) triples

    @staticmethod
    def build(p: SetValuedFunctor, topology: SieveTopology) -> "SheafObject":
        cat = p.cat
        entries = []
        for x in cat.objects:
            for sieve in topology.covering_sieves(x):
                arrows, fams = matching_families(p, sieve)
                table = tuple(tuple(p.action[f][s] for f in arrows)
                              for s in p.carrier(x))
                if len(set(table)) != p.sizes[x] or len(fams) != p.sizes[x]:
                    raise ValueError(f"sheaf condition fails at object {x}")
                entries.append((x, sieve, table))
        return SheafObject(p, tuple(entries))


@dataclass(frozen=True)
class Sheafification:
    sheaf: SheafObject
    unit: NatTransData  # P => aP, the composite of the two plus units


@lru_cache(maxsize=None)
def sheafify(p: SetValuedFunctor, topology: SieveTopology) -> Sheafification:
    """a = (+)(+); both passes always run, idempotence is a test not an assumption."""
    first = plus(p, topology)
    second = plus(first.presheaf, topology)
    unit = compose_nat(second.unit, first.unit)
    return Sheafification(SheafObject.build(second.presheaf, topology), unit)


def sheafify_map(theta: NatTransData, topology: SieveTopology) -> NatTransData:
    return plus_map(plus_map(theta, topology), topology)


@lru_cache(maxsize=None)
def ay(site: SiteSpec, x: int) -> Sheafification:
    """Sheafification of the representable at x."""
    return sheafify(representable_presheaf(site.cat, x), site_topology(site))


def postcompose_nat(cat: FinCategory, g: int) -> NatTransData:
    """(g)_*: y(dom g) => y(cod g), h |-> g∘h."""
    u, x = cat.dom[g], cat.cod[g]
    src = representable_presheaf(cat, u)
    tgt = representable_presheaf(cat, x)
    components = []
    for w in cat.objects:
        hom_u = cat.hom(w, u)
        index = {m: k for k, m in enumerate(cat.hom(w, x))}
        components.append(tuple(index[cat.comp[g][h]] for h in hom_u))
    return NatTransData(src, tgt, tuple(components))


@lru_cache(maxsize=None)
def sheafified_postcompose(site: SiteSpec, g: int) -> NatTransData:
    """a((g)_*): ay(dom g) => ay(cod g)."""
    return sheafify_map(postcompose_nat(site.cat, g), site_topology(site))


@lru_cache(maxsize=None)
def _unit_tables(site: SiteSpec, x: int):
    """Per object w: map from ay(x)(w) elements back to the least morphism
    g: w -> x whose unit image they are (None for glued-only sections)."""
    cat = site.cat
    sh = ay(site, x)
    tables = []
    for w in cat.objects:
        table = [None] * sh.sheaf.presheaf.sizes[w]
        for k, g in reversed(list(enumerate(cat.hom(w, x)))):
            table[sh.unit.components[w][k]] = g  # least g wins
        tables.append(tuple(table))
    return tuple(tables)


def extremal_epi_in_sh(topology: SieveTopology, legs) -> bool:
    """Every section of the common target lifts through the legs cover-locally."""
    legs = list(legs)
    if not legs:
        raise ValueError("need the codomain; pass at least one leg or use the family form")
    target = legs[0].target
    if any(leg.target != target for leg in legs):
        raise ValueError("legs do not share a codomain")
    cat = target.cat
    hit = [set() for _ in cat.objects]
    for leg in legs:
        for z in cat.objects:
            hit[z].update(leg.components[z])
    for x in cat.objects:
        for s in target.carrier(x):
            if not any(all(target.action[f][s] in hit[cat.dom[f]]
                           for f in sieve.arrows)
                       for sieve in topology.covering_sieves(x)):
                return False
    return True


def extremal_epi_family_in_sh(topology, legs, target: SetValuedFunctor) -> bool:
    """Family form of extremal_epi_in_sh: tolerates the empty family, for
    which only an empty covering sieve can witness the lifting condition."""
    if legs:
        return extremal_epi_in_sh(topology, legs)
    cat = target.cat
    for x in cat.objects:
        for _ in target.carrier(x):
            if not any(len(sieve.arrows) == 0
                       for sieve in topology.covering_sieves(x)):
                return False
    return True


@dataclass(frozen=True)
class CoverFactorization:
    family: tuple[int, ...]   # legs f_i: u_i -> x, a covering family
    arrows: tuple[int, ...]   # g_i: u_i -> x' with alpha ∘ a((f_i)_*) = a((g_i)_*)


def factor_through_cover(site: SiteSpec, alpha: NatTransData,
                         x: int, x_prime: int) -> CoverFactorization:
    """Lemma: any map of sheafified representables is cover-locally a
    sheafified post-composition.

    The arrows along which the transported generic section is a unit image
    form a sieve; it covers exactly when alpha is natural.  If the identity
    is among them the identity family is returned, otherwise the
    factoring-maximal arrows (which generate the same sieve).
    """
    from .fincat import check_nat
    cat = site.cat
    topology = site_topology(site)
    sh_x = ay(site, x)
    unit_back = _unit_tables(site, x_prime)
    id_pos = cat.hom(x, x).index(cat.identity[x])
    generic = sh_x.unit.components[x][id_pos]
    e0 = alpha.components[x][generic]
    target = alpha.target
    sieve_arrows = [f for f in cat.into(x)
                    if unit_back[cat.dom[f]][target.action[f][e0]] is not None]
    sieve = Sieve(x, frozenset(sieve_arrows))
    if not topology.covers(sieve):
        if not check_nat(alpha):
            raise FactorizationError("transformation is not natural")
        raise FactorizationError("generic section is not locally a unit image")
    if cat.identity[x] in sieve.arrows:
        legs = (cat.identity[x],)
    else:
        legs = _maximal_arrows(cat, sieve_arrows)
    gs = tuple(unit_back[cat.dom[f]][target.action[f][e0]] for f in legs)
    for f, g in zip(legs, gs):
        lhs = compose_nat(alpha, sheafified_postcompose(site, f))
        rhs = sheafified_postcompose(site, g)
        if lhs.components != rhs.components:
            raise FactorizationError("factorization equations fail; alpha is not natural")
    return CoverFactorization(legs, gs)


def _maximal_arrows(cat, arrows) -> tuple[int, ...]:
    """Arrows not strictly below another under the factoring preorder,
    one least id per mutual-factoring class."""
    arrows = sorted(set(arrows))
    below = {f: {g for g in arrows if cat.factors_through(f, g) is not None}
             for f in arrows}
    keep = []
    for f in arrows:
        if any(g in below[f] and f not in below[g] for g in arrows):
            continue  # strictly below g
        if any(k in below[f] and f in below[k] for k in keep):
            continue  # mutual class already represented by a smaller id
        keep.append(f)
    return tuple(keep)


def representable_map_into(site: SiteSpec, z: int, target: SetValuedFunctor,
                           section: int) -> NatTransData:
    """The map ay(z) => F classified by a section of F(z), found by brute
    force and pinned at the generic point (unique when F is a sheaf)."""
    cat = site.cat
    sh_z = ay(site, z)
    id_pos = cat.hom(z, z).index(cat.identity[z])
    generic = sh_z.unit.components[z][id_pos]
    for beta in all_nat_transformations(sh_z.sheaf.presheaf, target):
        if beta.components[z][generic] == section:
            return beta
    raise ValueError(f"no map ay({z}) => F hits the given section")


@dataclass(frozen=True)
class RepresentableCoverEntry:
    object: int
    beta: NatTransData  # ay(object) => F
    arrow: int          # g: object -> x with iota ∘ beta = a((g)_*)


def cover_mono_by_representables(site: SiteSpec, iota: NatTransData,
                                 x: int) -> list[RepresentableCoverEntry]:
    """Cover the domain of a mono into ay(x) with sheafified representables
    whose composites into ay(x) are sheafified post-compositions."""
    cat = site.cat
    f_obj = iota.source
    if any(len(set(iota.components[z])) != f_obj.sizes[z] for z in cat.objects):
        raise ValueError("iota is not pointwise injective")
    unit_back = _unit_tables(site, x)
    elements = [(z, s) for z in cat.objects for s in f_obj.carrier(z)]
    restricts = {}  # (z,s) -> elements it restricts from (one hop up)
    for z, s in elements:
        above = set()
        for h in cat.out_of(z):
            w = cat.cod[h]
            above.update((w, t) for t in f_obj.carrier(w)
                         if f_obj.action[h][t] == s)
        restricts[(z, s)] = above
    closure = {elt: _restriction_closure(restricts, elt) for elt in elements}
    entries = []
    kept = []
    for elt in elements:
        if any(other in closure[elt] and elt not in closure[other]
               for other in elements):
            continue  # elt is strictly a restriction of another element
        if any(k in closure[elt] and elt in closure[k] for k in kept):
            continue  # mutual class already represented
        kept.append(elt)
    for z, s in kept:
        beta = representable_map_into(site, z, f_obj, s)
        e = iota.components[z][s]
        g = unit_back[z][e]
        if g is not None:
            entries.append(RepresentableCoverEntry(z, beta, g))
            continue
        factored = factor_through_cover(site, compose_nat(iota, beta), z, x)
        for f, g_leg in zip(factored.family, factored.arrows):
            entries.append(RepresentableCoverEntry(
                cat.dom[f], compose_nat(beta, sheafified_postcompose(site, f)), g_leg))
    return entries


def _restriction_closure(restricts, elt):
    """Elements reachable upward from elt along restriction edges."""
    seen = {elt}
    frontier = [elt]
    while frontier:
        cur = frontier.pop()
        for nxt in restricts[cur]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen
