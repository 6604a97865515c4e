"""Shared builders and slow independent oracles for the test suite.

The oracles here deliberately avoid the library's pruned/backtracking code
paths: functors are generated by full cartesian products and filtered by the
raw definitions, so agreement tests compare genuinely different deciders.
"""

from __future__ import annotations

import itertools

from finsite import limits
from finsite.fincat import (COVARIANT, FinCategory, SetValuedFunctor,
                            make_category, poset_category, validate_set_functor)
from finsite.site import Family, SiteSpec


def fork_category() -> FinCategory:
    """Two parallel arrows f, g: x -> y merged by q: y -> z (q∘f = q∘g = h)."""
    # objects x=0, y=1, z=2; arrows f=3, g=4, q=5, h=6
    return make_category(
        3, [(0, 1), (0, 1), (1, 2), (0, 2)],
        {(5, 3): 6, (5, 4): 6},
        ("x", "y", "z"), ("f", "g", "q", "h"))


def discrete2_category() -> FinCategory:
    return make_category(2, [], {}, ("x", "y"), ())


def cospan_only_category() -> FinCategory:
    """u -> w <- v and nothing else: the cospan has no cone at all."""
    return make_category(3, [(0, 2), (1, 2)], {}, ("u", "v", "w"), ("f", "g"))


def glue_site() -> SiteSpec:
    """Poset 0 < a,b < p < m,c < T with the (non-extremal) cover {a,b} -> m.

    hom(m, c) is empty while a, b both map to c, so ay(m) => ay(c) has a
    glued-only section; exactly the shape the cover-factorization lemma eats.
    """
    names = ("0", "a", "b", "p", "m", "c", "T")
    ups = {"0": set(names), "a": {"a", "p", "m", "c", "T"},
           "b": {"b", "p", "m", "c", "T"}, "p": {"p", "m", "c", "T"},
           "m": {"m", "T"}, "c": {"c", "T"}, "T": {"T"}}
    leq = [[names[j] in ups[names[i]] for j in range(7)] for i in range(7)]
    cat = poset_category(leq, names)
    idx = {n: i for i, n in enumerate(names)}
    return SiteSpec.make(cat, [
        Family.make(idx["T"], [cat.identity[idx["T"]]]),
        Family.make(idx["m"], [cat.hom(idx["a"], idx["m"])[0],
                               cat.hom(idx["b"], idx["m"])[0]]),
    ])


def slow_enumerate_functors(cat: FinCategory, bound: int):
    """Every covariant functor with carriers <= bound by raw product-and-filter."""
    for sizes in itertools.product(range(bound + 1), repeat=cat.n_objects):
        tables = []
        for f in cat.morphisms:
            src, tgt = sizes[cat.dom[f]], sizes[cat.cod[f]]
            tables.append(list(itertools.product(range(tgt), repeat=src)))
        for action in itertools.product(*tables):
            fn = SetValuedFunctor(cat, COVARIANT, sizes, action)
            if not validate_set_functor(fn):
                yield fn


def slow_is_lex(cat: FinCategory, fn: SetValuedFunctor) -> bool:
    """Definition-based lex check: terminal to a point, each canonical
    pullback square to a square with the set-level universal property."""
    terminal = limits.terminal_object(cat)
    if terminal is None or fn.sizes[terminal] != 1:
        return False
    for f in cat.morphisms:
        for g in cat.morphisms:
            if cat.cod[f] != cat.cod[g]:
                continue
            square = limits.pullback(cat, f, g)
            if square is None:
                continue
            pairs = {}
            for p in fn.carrier(square.apex):
                key = (fn.action[square.to_left][p], fn.action[square.to_right][p])
                if key in pairs:
                    return False  # comparison not injective
                pairs[key] = p
            for a in fn.carrier(cat.dom[f]):
                for b in fn.carrier(cat.dom[g]):
                    if fn.action[f][a] == fn.action[g][b] and (a, b) not in pairs:
                        return False  # comparison not surjective
    return True


def slow_preserves_covers(fn: SetValuedFunctor, site: SiteSpec) -> bool:
    for fam in site.covers:
        for target in fn.carrier(fam.codomain):
            if not any(fn.action[leg][e] == target
                       for leg in fam.legs for e in fn.carrier(fn.cat.dom[leg])):
                return False
    return True


def slow_models(site: SiteSpec, bound: int):
    return [fn for fn in slow_enumerate_functors(site.cat, bound)
            if slow_is_lex(site.cat, fn) and slow_preserves_covers(fn, site)]


def injective(components, sizes_at) -> bool:
    return len(set(components)) == len(components) == sizes_at


def nat_is_pointwise_injective(alpha) -> bool:
    return all(len(set(alpha.components[x])) == alpha.source.sizes[x]
               for x in alpha.source.cat.objects)


def nat_is_pointwise_bijective(alpha) -> bool:
    return nat_is_pointwise_injective(alpha) and all(
        alpha.source.sizes[x] == alpha.target.sizes[x]
        for x in alpha.source.cat.objects)
