"""Sites (C, E): pullback closure, pasting saturation at stage omega,
and the generated Grothendieck topology in sieve form.

Families are sets of legs, never multisets: covering is repetition
invariant, and subsets of a finite morphism set make every fixpoint here
terminate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from . import limits
from .fincat import FinCategory, FunctorData, validate_category, validate_functor

# guard for the per-object sieve enumeration; fixtures stay far below it
MAX_ARROWS_FOR_SIEVES = 20


class MissingPullbackError(Exception):
    def __init__(self, f, g):
        super().__init__(f"MISSING_PULLBACK for cospan ({f}, {g})")
        self.cospan = (f, g)


@dataclass(frozen=True)
class Family:
    """A set of arrows with a common codomain; legs sorted and deduplicated."""

    codomain: int
    legs: tuple[int, ...]

    @staticmethod
    def make(codomain, legs) -> "Family":
        return Family(codomain, tuple(sorted(set(legs))))

    def sort_key(self):
        return (self.codomain, self.legs)


@dataclass(frozen=True)
class SiteSpec:
    cat: FinCategory
    covers: tuple[Family, ...]

    @staticmethod
    def make(cat, covers) -> "SiteSpec":
        return SiteSpec(cat, tuple(sorted(set(covers), key=Family.sort_key)))

    def covers_on(self, y: int):
        return [fam for fam in self.covers if fam.codomain == y]


def validate_site(site: SiteSpec) -> list[str]:
    report = validate_category(site.cat)
    if report:
        return report
    cat = site.cat
    for fam in site.covers:
        if not 0 <= fam.codomain < cat.n_objects:
            report.append(f"cover codomain {fam.codomain} is not an object")
        elif any(cat.cod[f] != fam.codomain for f in fam.legs):
            report.append(f"cover on {fam.codomain} has a leg with the wrong codomain")
    terminal = limits.terminal_object(cat)
    if terminal is None:
        report.append("no terminal object (the site must contain id: 1 -> 1)")
    elif Family.make(terminal, [cat.identity[terminal]]) not in site.covers:
        report.append("the identity family on the terminal object is missing from E")
    return report


def pullback_closure(site: SiteSpec) -> list[Family]:
    """E^pb: every E-family pulled back along every map into its codomain.

    Pulling back along the identity keeps E itself in the result.
    """
    cat = site.cat
    out = set()
    for fam in site.covers:
        for h in cat.into(fam.codomain):
            legs = []
            for f in fam.legs:
                square = limits.pullback(cat, f, h)
                if square is None:
                    raise MissingPullbackError(f, h)
                legs.append(square.to_right)
            out.add(Family.make(cat.dom[h], legs))
    return sorted(out, key=Family.sort_key)


@dataclass(frozen=True)
class SaturationResult:
    families: tuple[Family, ...]
    rounds: int

    def __contains__(self, fam):
        return fam in self._family_set

    @property
    def _family_set(self):
        return frozenset(self.families)


def tree_saturation(site: SiteSpec) -> SaturationResult:
    """<E> at stage omega: least pasting-closed set over E^pb plus iso singletons.

    Pasting replaces one leg f by {f∘g} over a saturated family on dom(f);
    iterated to a fixpoint this realizes every finite-height cotree, which is
    all of them at kappa = aleph_0 (no infinite branches exist).
    """
    cat = site.cat
    fams = set(pullback_closure(site))
    for f in cat.morphisms:
        if cat.is_iso(f):
            fams.add(Family.make(cat.cod[f], [f]))
    by_codomain = {}

    def index(fam):
        by_codomain.setdefault(fam.codomain, set()).add(fam)

    for fam in fams:
        index(fam)
    rounds = 0
    changed = True
    while changed:
        changed = False
        rounds += 1
        for fam in sorted(fams, key=Family.sort_key):
            for leg in fam.legs:
                dom = cat.dom[leg]
                for inner in sorted(by_codomain.get(dom, ()), key=Family.sort_key):
                    pasted_legs = set(fam.legs)
                    pasted_legs.discard(leg)
                    pasted_legs.update(cat.comp[leg][g] for g in inner.legs)
                    pasted = Family.make(fam.codomain, pasted_legs)
                    if pasted not in fams:
                        fams.add(pasted)
                        index(pasted)
                        changed = True
    return SaturationResult(tuple(sorted(fams, key=Family.sort_key)), rounds)


@dataclass(frozen=True)
class Sieve:
    target: int
    arrows: frozenset[int]

    def sort_key(self):
        return (len(self.arrows), tuple(sorted(self.arrows)))


def is_sieve(cat: FinCategory, target: int, arrows) -> bool:
    arrows = frozenset(arrows)
    if any(cat.cod[f] != target for f in arrows):
        return False
    return all(cat.comp[f][g] in arrows
               for f in arrows for g in cat.into(cat.dom[f]))


def maximal_sieve(cat: FinCategory, y: int) -> Sieve:
    return Sieve(y, frozenset(cat.into(y)))


def generated_sieve(cat: FinCategory, fam: Family) -> Sieve:
    arrows = set()
    for f in fam.legs:
        arrows.add(f)
        arrows.update(cat.comp[f][g] for g in cat.into(cat.dom[f]))
    return Sieve(fam.codomain, frozenset(arrows))


def pull_sieve(cat: FinCategory, sieve: Sieve, h: int) -> Sieve:
    """h*S = {g into dom(h) : h∘g ∈ S}."""
    if cat.cod[h] != sieve.target:
        raise ValueError("cannot pull a sieve back along a map into another object")
    z = cat.dom[h]
    return Sieve(z, frozenset(g for g in cat.into(z) if cat.comp[h][g] in sieve.arrows))


@lru_cache(maxsize=None)
def all_sieves(cat: FinCategory, y: int) -> tuple[Sieve, ...]:
    arrows = cat.into(y)
    if len(arrows) > MAX_ARROWS_FOR_SIEVES:
        raise ValueError(f"too many arrows into {y} to enumerate sieves")
    out = []
    for k in range(len(arrows) + 1):
        for subset in itertools.combinations(arrows, k):
            if is_sieve(cat, y, subset):
                out.append(Sieve(y, frozenset(subset)))
    return tuple(sorted(out, key=Sieve.sort_key))


@dataclass(frozen=True)
class SieveTopology:
    cat: FinCategory
    covering: tuple[frozenset[Sieve], ...]  # per object

    def covers(self, sieve: Sieve) -> bool:
        return sieve in self.covering[sieve.target]

    def covering_sieves(self, y: int) -> list[Sieve]:
        return sorted(self.covering[y], key=Sieve.sort_key)


def generate_sieve_topology(site: SiteSpec) -> SieveTopology:
    """Least Grothendieck topology whose covers include the E-generated sieves.

    Fixpoint over the materialized finite sieve lattice: seed with maximal and
    generated sieves, then close under pullback and local character until
    stable.
    """
    cat = site.cat
    universe = {y: all_sieves(cat, y) for y in cat.objects}
    j = {y: set() for y in cat.objects}
    for y in cat.objects:
        j[y].add(maximal_sieve(cat, y))
    for fam in site.covers:
        j[fam.codomain].add(generated_sieve(cat, fam))
    changed = True
    while changed:
        changed = False
        for y in cat.objects:
            for sieve in list(j[y]):
                for h in cat.into(y):
                    pulled = pull_sieve(cat, sieve, h)
                    if pulled not in j[cat.dom[h]]:
                        j[cat.dom[h]].add(pulled)
                        changed = True
        for y in cat.objects:
            for sieve in universe[y]:
                if sieve in j[y]:
                    continue
                for cover in j[y]:
                    if all(pull_sieve(cat, sieve, h) in j[cat.dom[h]]
                           for h in cover.arrows):
                        j[y].add(sieve)
                        changed = True
                        break
    return SieveTopology(cat, tuple(frozenset(j[y]) for y in cat.objects))


@lru_cache(maxsize=None)
def site_topology(site: SiteSpec) -> SieveTopology:
    return generate_sieve_topology(site)


def family_covers(site: SiteSpec, topology: SieveTopology, fam: Family) -> bool:
    return topology.covers(generated_sieve(site.cat, fam))


def preserves_limit_cone(fun: FunctorData, diagram, cone) -> bool:
    """The image of the given limit cone is again terminal among cones."""
    cat = fun.target
    image_diagram = limits.Diagram(diagram.shape, FunctorData(
        diagram.shape, cat,
        tuple(fun.obj_map[x] for x in diagram.labeling.obj_map),
        tuple(fun.mor_map[f] for f in diagram.labeling.mor_map)))
    image_cone = limits.Cone(fun.obj_map[cone.apex],
                             tuple(fun.mor_map[leg] for leg in cone.legs))
    for other in limits.cones(cat, image_diagram):
        if len(limits.factorizations(cat, other, image_cone)) != 1:
            return False
    return True


def _generating_diagrams(cat: FinCategory):
    """Terminal, binary products, equalizers and pullbacks with their limits."""
    out = []
    diagram = limits.empty_diagram(cat)
    cone = limits.limit(cat, diagram)
    if cone is not None:
        out.append((diagram, cone))
    for x, y in itertools.combinations_with_replacement(cat.objects, 2):
        diagram = limits.discrete_diagram(cat, (x, y))
        cone = limits.limit(cat, diagram)
        if cone is not None:
            out.append((diagram, cone))
    for f in cat.morphisms:
        for g in cat.morphisms:
            if cat.dom[f] == cat.dom[g] and cat.cod[f] == cat.cod[g] and f <= g:
                diagram = limits.parallel_pair_diagram(cat, f, g)
                cone = limits.limit(cat, diagram)
                if cone is not None:
                    out.append((diagram, cone))
            if cat.cod[f] == cat.cod[g]:
                diagram = limits.cospan_diagram(cat, f, g)
                cone = limits.limit(cat, diagram)
                if cone is not None:
                    out.append((diagram, cone))
    return out


def is_site_morphism(fun: FunctorData, source: SiteSpec, target: SiteSpec) -> bool:
    """fun preserves finite limits and sends E-families to covering families."""
    if fun.source != source.cat or fun.target != target.cat:
        raise ValueError("functor does not match the given sites")
    if validate_functor(fun):
        return False
    for diagram, cone in _generating_diagrams(source.cat):
        if not preserves_limit_cone(fun, diagram, cone):
            return False
    topology = site_topology(target)
    for fam in source.covers:
        image = Family.make(fun.obj_map[fam.codomain],
                            [fun.mor_map[f] for f in fam.legs])
        if not family_covers(target, topology, image):
            return False
    return True
