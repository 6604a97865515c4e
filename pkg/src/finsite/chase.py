"""The completeness chase: fairly scheduled pullback refinements whose branch
colimits of representables are models, subobject separation, and chase-based
cover detection.

Budgets are honest: BUDGET_EXCEEDED is a first-class outcome and no colimit
is ever extrapolated from an unfinished branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import limits
from .fincat import constant_singleton, covariant_representable
from .models import Model, is_lex, preserves_covers
from .site import Family, MissingPullbackError, SiteSpec

STABILIZED = "STABILIZED"
DEAD = "DEAD"
BUDGET_EXCEEDED = "BUDGET_EXCEEDED"

FIRST_LEG = "first-leg"


def pairing(alpha: int, beta: int) -> int:
    """Cantor pairing; satisfies pairing(alpha, beta) >= beta, which is what
    fair scheduling needs (a task is never solved before it is enqueued)."""
    if alpha < 0 or beta < 0:
        raise ValueError("pairing is defined on non-negative integers")
    return (alpha + beta) * (alpha + beta + 1) // 2 + beta


def unpairing(n: int) -> tuple[int, int]:
    if n < 0:
        raise ValueError("unpairing is defined on non-negative integers")
    w = (math.isqrt(8 * n + 1) - 1) // 2
    beta = n - w * (w + 1) // 2
    return w - beta, beta


@dataclass(frozen=True)
class Task:
    stage: int    # column the task was enqueued in
    arrow: int    # u_stage -> y
    family: Family


@dataclass(frozen=True)
class ChaseBranch:
    site: SiteSpec
    root: int
    chain: tuple[tuple[int, int], ...]    # (object, connecting mor into previous)
    choices: tuple[tuple[int, int], ...]  # per solved step: (task index, leg index)
    columns: tuple[tuple[Task, ...], ...]
    status: str

    @property
    def current(self) -> int:
        return self.chain[-1][0]

    def composite_to(self, stage: int) -> int:
        """Connecting composite from the newest object back to stage."""
        cat = self.site.cat
        out = cat.identity[self.current]
        for _, connect in reversed(self.chain[stage + 1:]):
            out = cat.comp[connect][out]
        return out


def nonempty_covers(site: SiteSpec) -> list[Family]:
    """E^-: the covers actually scheduled; empty ones route through DEAD
    detection instead, exactly as the construction cancels them."""
    return [fam for fam in site.covers if fam.legs]


@lru_cache(maxsize=None)
def _task_list(site: SiteSpec, u: int) -> tuple[Task, ...]:
    """T_u: every (arrow out of u, nonempty family on its codomain) diagram,
    ordered by (arrow id, family position)."""
    cat = site.cat
    fams = nonempty_covers(site)
    out = []
    for arrow in cat.out_of(u):
        for fam in fams:
            if fam.codomain == cat.cod[arrow]:
                out.append(Task(-1, arrow, fam))
    return tuple(out)


@lru_cache(maxsize=None)
def _dead_objects(site: SiteSpec) -> frozenset[int]:
    """Objects whose branches are written off: the strict initial (unless the
    site is degenerate and it is also terminal, where the dichotomy is
    non-exclusive) and everything that maps into an empty-covered object."""
    cat = site.cat
    dead = set()
    initial = limits.strict_initial(cat)
    terminal = limits.terminal_object(cat)
    if initial is not None and initial != terminal:
        dead.add(initial)
    empty_covered = {fam.codomain for fam in site.covers if not fam.legs}
    for x in cat.objects:
        if any(cat.hom(x, z) for z in empty_covered):
            dead.add(x)
    return frozenset(dead)


@lru_cache(maxsize=None)
def _stabilized_objects(site: SiteSpec) -> frozenset[int]:
    """u is stable when every arrow out of u factors through a leg of every
    scheduled family on its codomain: from such a u every present and future
    task admits an identity refinement, so the branch colimit is C(u,-).

    Quantifying over earlier stages is subsumed: composites out of u_n are
    themselves arrows out of u_n.
    """
    cat = site.cat
    out = set()
    for u in cat.objects:
        ok = True
        for h in cat.out_of(u):
            for fam in nonempty_covers(site):
                if fam.codomain != cat.cod[h]:
                    continue
                if not any(cat.factors_through(h, leg) is not None
                           for leg in fam.legs):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.add(u)
    return frozenset(out)


def solve_task(site: SiteSpec, branch_chain, task: Task, leg_index: int):
    """One pullback step: refine the newest object along the chosen leg.

    When the composite already factors through the chosen leg the stage is an
    identity stage: the pullback would be an iso anyway, and identity stages
    are what make stabilization detectable.
    """
    cat = site.cat
    if leg_index >= len(task.family.legs):
        raise ValueError("leg index out of range")
    leg = task.family.legs[leg_index]
    current = branch_chain[-1][0]
    composite = cat.identity[current]
    for _, connect in reversed(branch_chain[task.stage + 1:]):
        composite = cat.comp[connect][composite]
    arrow = cat.comp[task.arrow][composite]  # current -> y
    if cat.factors_through(arrow, leg) is not None:
        return current, cat.identity[current]
    square = limits.pullback(cat, leg, arrow)
    if square is None:
        raise MissingPullbackError(leg, arrow)
    return square.apex, square.to_right


def run_branch(site: SiteSpec, root: int, strategy=FIRST_LEG,
               budget: int = 64) -> ChaseBranch:
    """Run one branch for at most ``budget`` solving steps.

    Step n fills column n with T_{u_n} and solves task unpairing(n); the task
    index addresses its column cyclically, realizing the construction's
    padding of task lists by repetition.  An explicit choice sequence defers
    the stabilization certificate until its choices are spent, so prescribed
    leg choices can still walk a stable object into a refinement.
    """
    cat = site.cat
    explicit = None if strategy == FIRST_LEG else tuple(strategy)
    dead = _dead_objects(site)
    stable = _stabilized_objects(site)
    chain = [(root, cat.identity[root])]
    columns: list[tuple[Task, ...]] = []
    choices: list[tuple[int, int]] = []
    status = BUDGET_EXCEEDED
    for n in range(budget):
        u = chain[-1][0]
        if u in dead:
            status = DEAD
            break
        deferred = explicit is not None and len(choices) < len(explicit)
        if not deferred and len(chain) >= 2 and chain[-1][0] == chain[-2][0] \
                and cat.is_identity(chain[-1][1]) and u in stable:
            status = STABILIZED
            break
        columns.append(tuple(Task(n, t.arrow, t.family)
                             for t in _task_list(site, u)))
        alpha, beta = unpairing(n)
        column = columns[beta]
        if not column:
            raise ValueError("empty task list; the site is missing id: 1 -> 1")
        task = column[alpha % len(column)]
        if explicit is None:
            leg_index = 0
        elif len(choices) < len(explicit):
            leg_index = explicit[len(choices)] % len(task.family.legs)
        else:
            leg_index = 0
        obj, connect = solve_task(site, chain, task, leg_index)
        chain.append((obj, connect))
        choices.append((alpha % len(column), leg_index))
    return ChaseBranch(site, root, tuple(chain), tuple(choices),
                       tuple(columns), status)


def branch_colimit(branch: ChaseBranch) -> Model:
    """DEAD branches yield the terminal copresheaf; stabilized ones the
    representable at the stable object, which is lex and preserves every
    nonempty cover (the empty ones were cancelled from the list)."""
    site = branch.site
    if branch.status == DEAD:
        functor = constant_singleton(site.cat)
    elif branch.status == STABILIZED:
        functor = covariant_representable(site.cat, branch.current)
    else:
        raise ValueError("branch exceeded its budget; no colimit is computed")
    nonempty = SiteSpec.make(site.cat, nonempty_covers(site))
    return Model(functor, is_lex(site.cat, functor),
                 preserves_covers(functor, nonempty))


@dataclass(frozen=True)
class CotreeNode:
    branch: ChaseBranch
    children: tuple[tuple[int, "CotreeNode"], ...]  # (leg index, subtree)


@dataclass(frozen=True)
class Cotree:
    root: CotreeNode
    leaves: tuple[ChaseBranch, ...]
    all_terminated: bool
    has_live_branch: bool
    pruned: bool  # a width limit actually cut leg options somewhere


def explore_cotree(site: SiteSpec, root: int, budget: int = 64,
                   width: int | None = None) -> Cotree:
    """Expand the leg options of every scheduled task, depth-limited by the
    budget and breadth-limited by the width (all legs when width is None).

    A node is a branch prefix; it becomes a leaf once the branch run under
    that prefix terminates without consuming more choices.
    """
    leaves = []
    pruned = [False]

    def expand(prefix):
        branch = run_branch(site, root, strategy=tuple(prefix), budget=budget)
        depth = len(prefix)
        if len(branch.choices) <= depth:
            leaves.append(branch)
            return CotreeNode(branch, ())
        alpha, beta = unpairing(depth)
        column = branch.columns[beta]
        n_legs = len(column[alpha % len(column)].family.legs)
        take = n_legs if width is None else min(width, n_legs)
        if take < n_legs:
            pruned[0] = True
        children = tuple((leg, expand(prefix + [leg])) for leg in range(take))
        return CotreeNode(branch, children)

    root_node = expand([])
    terminated = all(leaf.status != BUDGET_EXCEEDED for leaf in leaves)
    live = any(leaf.status == STABILIZED for leaf in leaves)
    return Cotree(root_node, tuple(leaves), terminated, live, pruned[0])


CONTAINED = "CONTAINED"
WITNESS = "WITNESS"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class SeparationResult:
    verdict: str
    witness: Model | None = None
    witness_branch: ChaseBranch | None = None


def separate_subobjects(site: SiteSpec, x: int, u: int, v: int,
                        budget: int = 64, width: int | None = None) -> SeparationResult:
    """u <= v iff u factors through v; when it does not, some stabilized
    branch colimit rooted at dom(u) keeps the generic point of u outside the
    image of v, and that witness is returned re-verified."""
    cat = site.cat
    if cat.cod[u] != x or cat.cod[v] != x:
        raise ValueError("u and v must be subobjects of x")
    if cat.factors_through(u, v) is not None:
        return SeparationResult(CONTAINED)
    tree = explore_cotree(site, root=cat.dom[u], budget=budget, width=width)
    for branch in tree.leaves:
        if branch.status != STABILIZED:
            continue
        model = branch_colimit(branch)
        w = branch.current
        connect = branch.composite_to(0)   # w -> dom(u)
        point = cat.comp[u][connect]       # [1_u] pushed into M(x)
        if not any(cat.comp[v][d] == point for d in cat.hom(w, cat.dom[v])):
            assert model.is_lex and model.preserves_covers
            return SeparationResult(WITNESS, model, branch)
    return SeparationResult(INCONCLUSIVE)


@dataclass(frozen=True)
class CoverCheckResult:
    verdict: bool | None  # None encodes INCONCLUSIVE
    countermodel: Model | None = None


def family_jointly_covers(site: SiteSpec, fam: Family, budget: int = 64,
                          width: int | None = None) -> CoverCheckResult:
    """Chase-based cover detection: the family covers iff the generic point
    of every terminating branch colimit is hit by the family's image."""
    cat = site.cat
    x = fam.codomain
    if any(cat.cod[f] != x for f in fam.legs):
        raise ValueError("family has mixed codomains")
    tree = explore_cotree(site, root=x, budget=budget, width=width)
    for branch in tree.leaves:
        if branch.status != STABILIZED:
            continue
        w = branch.current
        generic = branch.composite_to(0)   # class of 1_x in M(x)
        hit = any(cat.comp[leg][d] == generic
                  for leg in fam.legs for d in cat.hom(w, cat.dom[leg]))
        if not hit:
            model = branch_colimit(branch)
            assert model.is_lex and model.preserves_covers
            return CoverCheckResult(False, model)
    if not tree.all_terminated or tree.pruned:
        return CoverCheckResult(None)  # an unexplored branch could refute
    return CoverCheckResult(True)
