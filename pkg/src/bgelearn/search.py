"""Structure search over DAG space.

Two modes: exhaustive enumeration with equivalence-class ranking for up to
six variables, and deterministic greedy hill-climbing over single-arc moves
(add, delete, reverse) for anything larger. Both share a local-score cache,
so a candidate move re-scores only the children it touches.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .data import Dataset
from .errors import TooLargeError, VariableMismatchError
from .network import (
    Dag,
    EquivalenceClass,
    class_members,
    enumerate_dags,
    partition_classes,
    topological_order,
)
from .priors import NormalWishartPrior, StructurePrior
from .scoring import (
    LocalScoreCache,
    StructureScore,
    local_score,
    normalize_log_weights,
    score_structure,
)

# Tie-break order among equal-delta moves.
_MOVE_RANK = {"delete": 0, "reverse": 1, "add": 2}


class Move(NamedTuple):
    kind: str
    arc: tuple[str, str]
    delta: float


class RankedEntry(NamedTuple):
    unit: EquivalenceClass | Dag
    log_score: float
    posterior: float


@dataclass(frozen=True)
class SearchReport:
    """Outcome of a structure search.

    ``ranked`` is sorted by log score descending (ties broken by the
    representative's edge list); posteriors are normalized over exactly the
    entries listed. ``terminal`` is the greedy end point, when applicable.
    """

    ranked: tuple[RankedEntry, ...]
    trace: tuple[Move, ...]
    evaluations: int
    terminal: Dag | None = None

    @property
    def best(self) -> RankedEntry:
        return self.ranked[0]


def _rank_entries(units, log_scores) -> tuple[RankedEntry, ...]:
    posteriors = normalize_log_weights(log_scores)
    entries = list(zip(units, log_scores, posteriors))
    entries.sort(
        key=lambda e: (
            -e[1],
            sorted(_unit_representative(e[0]).edge_names()),
        )
    )
    return tuple(RankedEntry(u, float(s), float(p)) for u, s, p in entries)


def _unit_representative(unit) -> Dag:
    return unit.representative if isinstance(unit, EquivalenceClass) else unit


def exhaustive(
    d: Dataset,
    prior: NormalWishartPrior,
    policy: StructurePrior = StructurePrior.UNIFORM_CLASSES,
    cache: LocalScoreCache | None = None,
    verify: bool = False,
) -> SearchReport:
    """Score every structure on the dataset's variables, ranked by class.

    One representative is scored per equivalence class; with ``verify`` a
    second member (where one exists) is also scored and must agree to 1e-9,
    a direct check that the metric is score equivalent. Class posteriors
    are uniform over classes, or aggregate labeled-DAG mass when the policy
    is uniform over structures.
    """
    n = len(d.variables)
    dags = enumerate_dags(n, d.variables)  # raises TooLargeError beyond the cap
    classes = partition_classes(dags)
    cache = cache if cache is not None else LocalScoreCache()
    evaluations = 0
    log_scores = []
    for cls in classes:
        rep_score = score_structure(cls.representative, d, prior, cache=cache)
        evaluations += 1
        if verify and cls.size > 1:
            other = score_structure(cls.members[1], d, prior, cache=cache)
            evaluations += 1
            if abs(other.log_marginal - rep_score.log_marginal) > 1e-9:
                raise AssertionError(
                    "score equivalence violated within class "
                    f"{cls.representative.edge_names()}: "
                    f"{rep_score.log_marginal} vs {other.log_marginal}"
                )
        if policy is StructurePrior.UNIFORM_STRUCTURES:
            # Class mass aggregates its members under a per-DAG uniform prior.
            log_prior = -float(np.log(len(dags))) + float(np.log(cls.size))
        else:
            log_prior = -float(np.log(len(classes)))
        log_scores.append(log_prior + rep_score.log_marginal)
    return SearchReport(
        ranked=_rank_entries(classes, log_scores),
        trace=(),
        evaluations=evaluations,
    )


def _has_path(dag: Dag, src: int, dst: int) -> bool:
    """Directed path src -> ... -> dst along child links."""
    children = [[] for _ in range(dag.size)]
    for c, ps in enumerate(dag.parents):
        for p in ps:
            children[p].append(c)
    stack, seen = [src], set()
    while stack:
        node = stack.pop()
        if node == dst:
            return True
        if node in seen:
            continue
        seen.add(node)
        stack.extend(children[node])
    return False


def _legal_moves(dag: Dag):
    """All structure-preserving single-arc moves, with the post-move parent
    sets of every affected child."""
    n = dag.size
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            if u in dag.parents[v]:
                yield "delete", (u, v), {v: dag.parents[v] - {u}}
                # Reversal is legal unless another u -> v path remains.
                without = dag.replace_parents(v, dag.parents[v] - {u})
                if not _has_path(without, u, v):
                    yield "reverse", (u, v), {
                        v: dag.parents[v] - {u},
                        u: dag.parents[u] | {v},
                    }
            elif v not in dag.parents[u] and not _has_path(dag, v, u):
                yield "add", (u, v), {v: dag.parents[v] | {u}}


def hill_climb(
    d: Dataset,
    prior: NormalWishartPrior,
    policy: StructurePrior = StructurePrior.UNIFORM_CLASSES,
    start: Dag | None = None,
    max_iters: int = 100,
    restarts: int = 0,
    seed: int = 0,
    cache: LocalScoreCache | None = None,
) -> SearchReport:
    """Greedy best-first search over single-arc moves.

    Each iteration applies the best strictly improving move; ties go to
    deletes before reverses before adds, then to the lexicographically
    least arc. Restarts rerun the climb from seed-derived random DAGs and
    the best terminal wins. The ranked list covers the distinct terminal
    classes found; the uniform structure priors are constant per DAG and
    cancel in that normalization, so they are not recomputed here.
    """
    if start is None:
        start = Dag.from_edges(d.variables)
    if set(start.variables) != set(d.variables):
        raise VariableMismatchError(
            f"start variables {sorted(start.variables)} do not match "
            f"dataset {sorted(d.variables)}"
        )
    topological_order(start)
    cache = cache if cache is not None else LocalScoreCache()
    evaluations = 0
    runs = []
    rng = np.random.default_rng(seed)
    for run_index in range(restarts + 1):
        origin = start if run_index == 0 else _random_dag(d.variables, rng)
        terminal, trace, evals = _climb_once(d, prior, origin, max_iters, cache)
        evaluations += evals
        score = score_structure(terminal, d, prior, cache=cache)
        runs.append((terminal, trace, score))
    best_terminal, best_trace, _ = min(
        runs, key=lambda r: (-r[2].log_marginal, sorted(r[0].edge_names()))
    )

    distinct: dict[tuple, tuple[Dag, StructureScore]] = {}
    for terminal, _, score in runs:
        unit_key = tuple(sorted(terminal.edge_names()))
        distinct.setdefault(unit_key, (terminal, score))
    units, log_scores = [], []
    seen_classes = []
    for terminal, score in distinct.values():
        cls = _terminal_class(terminal)
        key = tuple(sorted(cls.representative.edge_names()))
        if key in seen_classes:
            continue
        seen_classes.append(key)
        units.append(cls)
        log_scores.append(score.log_marginal)
    return SearchReport(
        ranked=_rank_entries(units, log_scores),
        trace=tuple(best_trace),
        evaluations=evaluations,
        terminal=best_terminal,
    )


def _terminal_class(dag: Dag) -> EquivalenceClass:
    try:
        return class_members(dag)
    except TooLargeError:
        # Too many edges to enumerate the class; report the DAG alone.
        return EquivalenceClass((dag,), dag)


def _climb_once(d, prior, start, max_iters, cache):
    names = start.variables
    current = start
    current_locals = {
        v: local_score(names[v], (names[p] for p in start.parents[v]), d, prior, cache)
        for v in range(start.size)
    }
    trace: list[Move] = []
    evaluations = 0
    for _ in range(max_iters):
        best = None
        for kind, (u, v), new_parents in _legal_moves(current):
            delta = 0.0
            for child, parents in new_parents.items():
                delta += local_score(
                    names[child], (names[p] for p in parents), d, prior, cache
                )
                delta -= current_locals[child]
            evaluations += 1
            key = (_MOVE_RANK[kind], (names[u], names[v]))
            if delta > 0.0 and (
                best is None
                or delta > best[0]
                or (delta == best[0] and key < best[1])
            ):
                best = (delta, key, kind, (u, v), new_parents)
        if best is None:
            break
        delta, _, kind, (u, v), new_parents = best
        for child, parents in new_parents.items():
            current = current.replace_parents(child, parents)
            current_locals[child] = local_score(
                names[child], (names[p] for p in parents), d, prior, cache
            )
        trace.append(Move(kind, (names[u], names[v]), delta))
    return current, trace, evaluations


def _random_dag(variables, rng) -> Dag:
    """A uniform-order random DAG with arc probability 1/2."""
    n = len(variables)
    order = rng.permutation(n)
    parents = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.5:
                parents[order[j]].add(int(order[i]))
    return Dag(tuple(variables), tuple(frozenset(ps) for ps in parents))
