"""Detection of reciprocal curation pairs and dense colluding groups.

Both detectors read the same author-excluded, URI-normalized curation
relation as the metrics: an edge u -> v means u curated at least one item
authored by v, and repeated curation of the same item still counts once
per direction. They are advisory analytics: reports never feed back into
any metric.

Pairs are scored by reciprocity share, the fraction of a scholar's distinct
curated items that are authored by one specific peer. A dedicated dyad
scores 1.0; a pair that merely includes each other once among many
interests scores low and is not flagged.

Groups are found by greedy density peeling: repeatedly drop the member with
the fewest reciprocated partners (ties broken by ascending scholar id).
Reciprocation is what separates a ring from ordinary popularity: an author
whom many people curate has high in-degree but few mutual partners, so
honest neighborhoods dissolve early while rings, mutual by construction,
survive. Candidate groups are the mutually-connected components of the
survivors (one-way curation alone never merges two candidates), and any
candidate whose ordered-pair density clears the threshold is flagged.
Since peeling only ever shrinks components, the maximal qualifying form of
each dense core is the one reported, and several disjoint rings surface in
a single pass even when honest curation glues the full graph together.
Raising a threshold can only shrink the flagged set. Every flag ships the
evidence triples (curator, item, issue) that produced it.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass

from . import metrics as metrics_mod
from .ledger import EngineState, digest


class InvalidThreshold(ValueError):
    pass


@dataclass(slots=True)
class DetectorParams:
    theta: float = 0.5
    delta: float = 0.8
    min_size: int = 3

    def validate(self) -> None:
        if not 0 < self.theta <= 1:
            raise InvalidThreshold(f"theta must be in (0, 1], got {self.theta}")
        if not 0 < self.delta <= 1:
            raise InvalidThreshold(f"delta must be in (0, 1], got {self.delta}")
        if self.min_size < 2:
            raise InvalidThreshold(f"min_size must be at least 2, got {self.min_size}")


@dataclass(slots=True)
class ReciprocityRecord:
    a: str
    b: str
    a_curates_b: int
    b_curates_a: int
    reciprocity_share: float


@dataclass(slots=True)
class FlaggedGroup:
    members: tuple[str, ...]
    density: float
    evidence: list[dict]


@dataclass(slots=True)
class AnomalyReport:
    generated_from: str
    parameters: DetectorParams
    pairs: list[ReciprocityRecord]
    groups: list[FlaggedGroup]

    def to_dict(self) -> dict:
        return {
            "generated_from": self.generated_from,
            "parameters": {
                "theta": self.parameters.theta,
                "delta": self.parameters.delta,
                "min_size": self.parameters.min_size,
            },
            "pairs": [
                {
                    "a": r.a,
                    "b": r.b,
                    "a_curates_b": r.a_curates_b,
                    "b_curates_a": r.b_curates_a,
                    "reciprocity_share": r.reciprocity_share,
                }
                for r in self.pairs
            ],
            "groups": [
                {
                    "members": list(g.members),
                    "density": g.density,
                    "evidence": g.evidence,
                }
                for g in self.groups
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)


def reciprocity_records(state: EngineState) -> list[ReciprocityRecord]:
    """One record per unordered scholar pair with any cross-curation."""
    graph = metrics_mod.curation_graph(state)
    cross = graph.cross_curation()
    counts: dict[tuple[str, str], tuple[int, int]] = {}
    for (curator, author), items in cross.items():
        pair = (curator, author) if curator < author else (author, curator)
        a_to_b, b_to_a = counts.get(pair, (0, 0))
        if curator == pair[0]:
            a_to_b += len(items)
        else:
            b_to_a += len(items)
        counts[pair] = (a_to_b, b_to_a)
    records = []
    for (a, b) in sorted(counts):
        a_to_b, b_to_a = counts[(a, b)]
        total_a = len(graph.curated_items.get(a, ()))
        total_b = len(graph.curated_items.get(b, ()))
        share = max(
            a_to_b / total_a if total_a else 0.0,
            b_to_a / total_b if total_b else 0.0,
        )
        records.append(
            ReciprocityRecord(
                a=a, b=b, a_curates_b=a_to_b, b_curates_a=b_to_a, reciprocity_share=share
            )
        )
    return records


def flag_pairs(records: list[ReciprocityRecord], theta: float) -> list[ReciprocityRecord]:
    """Pairs curating each other in both directions with share >= theta."""
    if not 0 < theta <= 1:
        raise InvalidThreshold(f"theta must be in (0, 1], got {theta}")
    return [
        r
        for r in records
        if r.a_curates_b >= 1 and r.b_curates_a >= 1 and r.reciprocity_share >= theta
    ]


def _component_of(
    start: str, alive: set[str], adj: dict[str, set[str]]
) -> set[str]:
    comp = {start}
    frontier = [start]
    while frontier:
        u = frontier.pop()
        for v in adj[u]:
            if v in alive and v not in comp:
                comp.add(v)
                frontier.append(v)
    return comp


def _qualifying(
    comp: set[str],
    out_adj: dict[str, set[str]],
    delta: float,
    min_size: int,
) -> bool:
    size = len(comp)
    if size < min_size:
        return False
    edges = sum(len(out_adj[u] & comp) for u in comp)
    # Compare via division: 16 of 20 ordered pairs must clear delta=0.8
    # exactly, which a delta*size*(size-1) product can miss by one ulp.
    return edges / (size * (size - 1)) >= delta


def flag_groups(state: EngineState, delta: float, min_size: int) -> list[FlaggedGroup]:
    """Dense cross-curation groups by density peeling over components.

    Nodes leave in order of fewest reciprocated partners (ascending id on
    ties). Before each removal, any not-yet-flagged mutually-connected
    component of the survivors whose ordered-pair density reaches `delta`
    is flagged. Components only shrink as peeling proceeds, so each flag is
    the maximal qualifying form of its core, and a later component that
    touches a flagged one is necessarily contained in it. Deterministic for
    a given (state, parameters).
    """
    if not 0 < delta <= 1:
        raise InvalidThreshold(f"delta must be in (0, 1], got {delta}")
    if min_size < 2:
        raise InvalidThreshold(f"min_size must be at least 2, got {min_size}")
    graph = metrics_mod.curation_graph(state)
    cross = graph.cross_curation()
    out_adj: dict[str, set[str]] = {}
    nodes: set[str] = set()
    for (curator, author) in cross:
        out_adj.setdefault(curator, set()).add(author)
        nodes.add(curator)
        nodes.add(author)
    mutual: dict[str, set[str]] = {}
    for u in nodes:
        out_adj.setdefault(u, set())
    for u in nodes:
        mutual[u] = {v for v in out_adj[u] if u in out_adj[v]}

    alive = set(nodes)
    flagged: set[str] = set()
    cores: list[set[str]] = []

    def consider(seeds: set[str]) -> None:
        visited: set[str] = set()
        for seed in sorted(seeds):
            if seed in visited or seed in flagged or seed not in alive:
                continue
            comp = _component_of(seed, alive, mutual)
            visited |= comp
            if comp & flagged:
                continue  # shrunken remnant of an already-flagged core
            if _qualifying(comp, out_adj, delta, min_size):
                flagged.update(comp)
                cores.append(comp)

    consider(alive)
    degrees = {u: len(mutual[u] & alive) for u in alive}
    heap = [(deg, u) for u, deg in degrees.items()]
    heapq.heapify(heap)
    while len(alive) > min_size and heap:
        while heap:
            deg, u = heapq.heappop(heap)
            if u in alive and degrees[u] == deg:
                break
        else:
            break
        alive.discard(u)
        touched = mutual[u] & alive
        for v in touched:
            degrees[v] -= 1
            heapq.heappush(heap, (degrees[v], v))
        consider(touched)

    groups = [_describe_group(core, cross, graph) for core in cores]
    groups.sort(key=lambda g: g.members)
    return groups


def _describe_group(
    core: set[str],
    cross: dict[tuple[str, str], set[str]],
    graph: metrics_mod.CurationGraph,
) -> FlaggedGroup:
    members = tuple(sorted(core))
    edge_count = 0
    evidence: list[dict] = []
    seen: set[tuple[str, str, str]] = set()
    for curator in members:
        for author in members:
            items = cross.get((curator, author))
            if not items:
                continue
            edge_count += 1
            for item in sorted(items):
                for issue_id, spelled in graph.curation_sources.get((curator, item), ()):
                    triple = (curator, spelled, issue_id)
                    if triple not in seen:
                        seen.add(triple)
                        evidence.append(
                            {"curator": curator, "item": spelled, "issue": issue_id}
                        )
    size = len(members)
    return FlaggedGroup(
        members=members,
        density=edge_count / (size * (size - 1)),
        evidence=evidence,
    )


def anomaly_report(state: EngineState, params: DetectorParams) -> AnomalyReport:
    """Bundle flagged pairs and groups with the input state's digest."""
    params.validate()
    records = reciprocity_records(state)
    return AnomalyReport(
        generated_from=digest(state).digest,
        parameters=params,
        pairs=flag_pairs(records, params.theta),
        groups=flag_groups(state, params.delta, params.min_size),
    )
