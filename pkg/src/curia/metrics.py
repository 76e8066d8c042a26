"""Article-level metrics and curation-network views.

Three quantifiers, all pure functions of a replayed state:

* validity: how many distinct scholars currently vote on an article and
  which fraction of them consider it up to standards (latest vote per
  scholar wins; the fraction is an exact rational, absent when nobody
  voted).
* importance: the number of distinct curators who included the item in a
  released issue of their journal. Curating the same item in ten issues
  still counts once, and an item's own authors never count.
* priority: how many scholars currently hold an active attention mark on
  the item.

The curation graph bundles the scholar-to-item relations (curation,
authorship, reviewing) with derived co-curation and cross-curation views
used by the network analytics and the collusion detector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from typing import Optional

from .ledger import EngineState
from .model import RuleViolation, VoteChoice
from .uris import normalize_uri


@dataclass(slots=True)
class ValidityTally:
    article_id: str
    voter_count: int
    validated_count: int
    fraction: Optional[Fraction]
    per_version: dict[int, tuple[int, int]]


@dataclass(slots=True)
class ImportanceCount:
    item: str
    curators: frozenset[str]

    @property
    def count(self) -> int:
        return len(self.curators)


@dataclass(slots=True)
class PriorityCount:
    item: str
    count: int


@dataclass(slots=True)
class ReviewScore:
    review_id: str
    up: int
    down: int


@dataclass(slots=True)
class AcknowledgmentRecord:
    article_id: str
    version: int
    reviewers: frozenset[str]


@dataclass
class CurationGraph:
    """Scholar/item relations plus derived network views.

    Items are normalized URIs throughout. `curation_sources` keeps, per
    (curator, item), the issues that curated it and the item spelling used
    there, so detector evidence can be traced back to log events.
    """

    curated_items: dict[str, set[str]] = field(default_factory=dict)
    item_curators: dict[str, set[str]] = field(default_factory=dict)
    curation_sources: dict[tuple[str, str], list[tuple[str, str]]] = field(default_factory=dict)
    authored_items: dict[str, set[str]] = field(default_factory=dict)
    item_authors: dict[str, frozenset[str]] = field(default_factory=dict)
    reviewed_articles: dict[str, set[str]] = field(default_factory=dict)

    def co_curation_weights(self) -> dict[tuple[str, str], int]:
        """weight(a, b) = number of distinct scholars who curated both."""
        weights: dict[tuple[str, str], int] = {}
        for items in self.curated_items.values():
            ordered = sorted(items)
            for i, a in enumerate(ordered):
                for b in ordered[i + 1 :]:
                    weights[(a, b)] = weights.get((a, b), 0) + 1
        return weights

    def cross_curation(self) -> dict[tuple[str, str], set[str]]:
        """(curator, author) -> authored items the curator curated.

        Authors never appear as their own curators; this is the relation
        the collusion detector peels.
        """
        edges: dict[tuple[str, str], set[str]] = {}
        for curator, items in self.curated_items.items():
            for item in items:
                for author in self.item_authors.get(item, ()):
                    if author != curator:
                        edges.setdefault((curator, author), set()).add(item)
        return edges


def _build_graph(state: EngineState) -> CurationGraph:
    graph = CurationGraph()
    for article in state.articles.values():
        key = normalize_uri(article.canonical_uri)
        graph.item_authors[key] = article.authors
        for author in article.authors:
            graph.authored_items.setdefault(author, set()).add(key)
    for issue in state.issues.values():
        owner = issue.journal_owner
        curated = graph.curated_items.setdefault(owner, set())
        for entry in issue.entries:
            key = normalize_uri(entry.item)
            curated.add(key)
            graph.item_curators.setdefault(key, set()).add(owner)
            graph.curation_sources.setdefault((owner, key), []).append(
                (issue.issue_id, entry.item)
            )
    for review in state.reviews.values():
        graph.reviewed_articles.setdefault(review.reviewer, set()).add(review.article_id)
    return graph


def curation_graph(state: EngineState) -> CurationGraph:
    """Build (or reuse) the curation graph for a state.

    The memo is keyed by last_seq: any append invalidates it.
    """
    memo = getattr(state, "_graph_memo", None)
    if memo is not None and memo[0] == state.last_seq:
        return memo[1]
    graph = _build_graph(state)
    state._graph_memo = (state.last_seq, graph)
    return graph


def validity_tally(state: EngineState, article_id: str) -> ValidityTally:
    """Current validity votes on an article, total and per version seen."""
    if article_id not in state.articles:
        raise RuleViolation("UnknownArticle", f"article {article_id!r} does not exist")
    votes = state.validity_votes.get(article_id, {})
    n = len(votes)
    validated = sum(1 for v in votes.values() if v.choice is VoteChoice.REACHED_STANDARDS)
    per_version: dict[int, list[int]] = {}
    for vote in votes.values():
        bucket = per_version.setdefault(vote.version_seen, [0, 0])
        bucket[0] += 1
        if vote.choice is VoteChoice.REACHED_STANDARDS:
            bucket[1] += 1
    return ValidityTally(
        article_id=article_id,
        voter_count=n,
        validated_count=validated,
        fraction=Fraction(validated, n) if n else None,
        per_version={v: (b[0], b[1]) for v, b in sorted(per_version.items())},
    )


def importance(state: EngineState, item: str) -> ImportanceCount:
    """Distinct non-author curators of an item across all released issues."""
    key = normalize_uri(item)
    graph = curation_graph(state)
    curators = graph.item_curators.get(key, set())
    authors = graph.item_authors.get(key, frozenset())
    return ImportanceCount(item=key, curators=frozenset(curators - authors))


def priority(state: EngineState, item: str) -> PriorityCount:
    """Scholars whose latest mark on the item is active."""
    key = normalize_uri(item)
    return PriorityCount(item=key, count=state.priority_counts.get(key, 0))


def review_score(state: EngineState, review_id: str) -> ReviewScore:
    """Current +1/-1 counts on a review, one contribution per voter."""
    if review_id not in state.reviews:
        raise RuleViolation("UnknownReview", f"review {review_id!r} does not exist")
    votes = state.review_votes.get(review_id, {})
    up = sum(1 for v in votes.values() if v.sign == 1)
    return ReviewScore(review_id=review_id, up=up, down=len(votes) - up)


def acknowledged_reviewers(
    state: EngineState, article_id: str, version: int
) -> AcknowledgmentRecord:
    """Reviewers acknowledged by any version up to and including `version`.

    The set is a union over versions, so it can only grow as the article
    evolves; version 1 acknowledges nobody.
    """
    article = state.articles.get(article_id)
    if article is None:
        raise RuleViolation("UnknownArticle", f"article {article_id!r} does not exist")
    if not 1 <= version <= article.latest_version:
        raise RuleViolation(
            "UnknownVersion", f"article {article_id!r} has no version {version}"
        )
    reviewers: set[str] = set()
    for v in article.versions[:version]:
        for review_id in v.acknowledged_reviews:
            reviewers.add(state.reviews[review_id].reviewer)
    return AcknowledgmentRecord(
        article_id=article_id, version=version, reviewers=frozenset(reviewers)
    )


# --- exports ---------------------------------------------------------------

def render_fraction(fraction: Optional[Fraction]) -> Optional[float]:
    """Decimal rendering of an exact fraction, 4 places, half-even."""
    if fraction is None:
        return None
    value = Decimal(fraction.numerator) / Decimal(fraction.denominator)
    return float(value.quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN))


def item_metrics(state: EngineState, item: str) -> dict:
    """One export record: {uri, validity, importance, priority}."""
    key = normalize_uri(item)
    article_id = state.article_by_uri.get(key)
    if article_id is not None:
        tally = validity_tally(state, article_id)
        validity = {
            "n": tally.voter_count,
            "validated": tally.validated_count,
            "fraction": render_fraction(tally.fraction),
        }
    else:
        validity = {"n": 0, "validated": 0, "fraction": None}
    return {
        "uri": key,
        "validity": validity,
        "importance": importance(state, key).count,
        "priority": priority(state, key).count,
    }


def known_items(state: EngineState) -> list[str]:
    """Every item the state has an opinion about, in sorted order."""
    items: set[str] = set(state.article_by_uri)
    items.update(curation_graph(state).item_curators)
    items.update(k for k, marks in state.priority_marks.items() if marks)
    return sorted(items)


def collect_item_metrics(state: EngineState, items: Optional[list[str]] = None) -> list[dict]:
    selected = known_items(state) if items is None else [normalize_uri(i) for i in items]
    return [item_metrics(state, item) for item in selected]


def metrics_csv(records: list[dict]) -> str:
    """CSV rendering with the same columns as the JSON records."""
    lines = ["uri,validity_n,validity_validated,validity_fraction,importance,priority"]
    for record in records:
        fraction = record["validity"]["fraction"]
        lines.append(
            ",".join(
                [
                    _csv_field(record["uri"]),
                    str(record["validity"]["n"]),
                    str(record["validity"]["validated"]),
                    "" if fraction is None else f"{fraction:.4f}",
                    str(record["importance"]),
                    str(record["priority"]),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _csv_field(value: str) -> str:
    if any(ch in value for ch in ',"\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


def graph_edge_list(graph: CurationGraph) -> str:
    """Tab-separated edge list: kind, from, to, weight."""
    lines: list[str] = []
    for scholar in sorted(graph.curated_items):
        for item in sorted(graph.curated_items[scholar]):
            lines.append(f"curation\t{scholar}\t{item}\t1")
    for scholar in sorted(graph.authored_items):
        for item in sorted(graph.authored_items[scholar]):
            lines.append(f"authorship\t{scholar}\t{item}\t1")
    for scholar in sorted(graph.reviewed_articles):
        for article_id in sorted(graph.reviewed_articles[scholar]):
            lines.append(f"reviewer\t{scholar}\t{article_id}\t1")
    weights = graph.co_curation_weights()
    for (a, b) in sorted(weights):
        lines.append(f"co_curation\t{a}\t{b}\t{weights[(a, b)]}")
    return "\n".join(lines) + "\n" if lines else ""
