"""Domain entities and per-action validation rules of the evaluation protocol.

The protocol records who registered, what they published, how peers reviewed
and voted, and what each scholar curated into the issues of their personal
journal. Every rule here is pure: a check inspects a replayed state and a
candidate action, and either passes or names exactly one broken rule. The
ledger refuses any event whose payload fails its check, so a replayed state
can never contain a rule violation.

Rule highlights:

* A "needs revisions" validity vote must be substantiated by a review the
  voter wrote or currently up-votes; a "reached standards" vote stands alone.
* Authors never review or validity-vote their own articles; review authors
  never vote on their own reviews.
* A released issue is immutable, carries a title and an editorial, and holds
  at least ``MIN_ISSUE_SIZE`` pairwise-distinct items. Items are arbitrary
  web URIs, not only platform articles.
* Article versions are numbered consecutively. A revision may acknowledge
  reviews of earlier versions of the same article only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Optional

from .uris import is_valid_item_uri, normalize_uri

if TYPE_CHECKING:  # pragma: no cover
    from .ledger import EngineState

# Minimum number of entries in a released issue. Deployments may override
# via replay(..., min_issue_size=...); 4 is the protocol default.
MIN_ISSUE_SIZE = 4


class RuleViolation(Exception):
    """A named protocol rule failure.

    Check functions return instances (they are verdicts, not control flow);
    the ledger raises the same instances when an append is refused.
    """

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message}


class VoteChoice(str, Enum):
    REACHED_STANDARDS = "reached_standards"
    NEEDS_REVISIONS = "needs_revisions"


@dataclass(slots=True)
class Scholar:
    scholar_id: str
    display_name: str
    registered_at: int


@dataclass(slots=True)
class ArticleVersion:
    number: int
    content_digest: str
    acknowledged_reviews: frozenset[str]
    created_at: int


@dataclass(slots=True)
class Article:
    article_id: str
    canonical_uri: str
    authors: frozenset[str]
    versions: list[ArticleVersion]

    @property
    def latest_version(self) -> int:
        return self.versions[-1].number


@dataclass(slots=True)
class Review:
    review_id: str
    article_id: str
    target_version: int
    reviewer: str
    body: str
    posted_at: int


@dataclass(slots=True)
class ReviewVote:
    voter: str
    review_id: str
    sign: int
    cast_at: int


@dataclass(slots=True)
class ValidityVote:
    voter: str
    article_id: str
    choice: VoteChoice
    substantiation: Optional[str]
    version_seen: int
    cast_at: int


@dataclass(slots=True)
class PriorityMark:
    scholar_id: str
    item: str
    active: bool
    toggled_at: int


@dataclass(slots=True)
class CuratedEntry:
    item: str
    comment: Optional[str] = None


@dataclass(slots=True)
class Issue:
    issue_id: str
    journal_owner: str
    title: str
    editorial: str
    entries: list[CuratedEntry]
    released_at: int


@dataclass(slots=True)
class SelfJournal:
    owner: str
    issues: list[str] = field(default_factory=list)
    subscribers: set[str] = field(default_factory=set)


def check_registration(state: "EngineState", scholar: Scholar) -> Optional[RuleViolation]:
    """Scholar ids are opaque but must be non-empty and unused."""
    if not scholar.scholar_id:
        return RuleViolation("InvalidIdentifier", "scholar_id must be non-empty")
    if scholar.scholar_id in state.scholars:
        return RuleViolation(
            "DuplicateScholar", f"scholar {scholar.scholar_id!r} already registered"
        )
    return None


def check_submission(state: "EngineState", article: Article) -> Optional[RuleViolation]:
    """An article needs a fresh id, a fresh URI, and registered authors."""
    if not article.article_id:
        return RuleViolation("InvalidIdentifier", "article_id must be non-empty")
    if article.article_id in state.articles:
        return RuleViolation(
            "DuplicateArticle", f"article {article.article_id!r} already submitted"
        )
    if not article.authors:
        return RuleViolation("EmptyAuthors", "an article needs at least one author")
    for author in article.authors:
        if author not in state.scholars:
            return RuleViolation("UnknownScholar", f"author {author!r} is not registered")
    if not is_valid_item_uri(article.canonical_uri):
        return RuleViolation(
            "InvalidItemUri", f"canonical_uri {article.canonical_uri!r} is not a web identifier"
        )
    key = normalize_uri(article.canonical_uri)
    if key in state.article_by_uri:
        return RuleViolation(
            "DuplicateUri",
            f"uri {article.canonical_uri!r} already identifies article"
            f" {state.article_by_uri[key]!r}",
        )
    return None


def check_review(state: "EngineState", review: Review) -> Optional[RuleViolation]:
    """Reviews are open to all scholars except the article's own authors.

    The target version must exist at posting time and the body must carry
    an actual argument; blank reviews are refused.
    """
    if not review.review_id:
        return RuleViolation("InvalidIdentifier", "review_id must be non-empty")
    if review.review_id in state.reviews:
        return RuleViolation("DuplicateReview", f"review {review.review_id!r} already posted")
    if review.reviewer not in state.scholars:
        return RuleViolation("UnknownScholar", f"reviewer {review.reviewer!r} is not registered")
    article = state.articles.get(review.article_id)
    if article is None:
        return RuleViolation("UnknownArticle", f"article {review.article_id!r} does not exist")
    if review.reviewer in article.authors:
        return RuleViolation(
            "AuthorSelfReview", f"{review.reviewer!r} cannot review own article"
        )
    if not 1 <= review.target_version <= article.latest_version:
        return RuleViolation(
            "UnknownVersion",
            f"article {review.article_id!r} has no version {review.target_version}",
        )
    if not review.body.strip():
        return RuleViolation("EmptyBody", "a review must state its argument")
    return None


def check_review_vote(state: "EngineState", vote: ReviewVote) -> Optional[RuleViolation]:
    """One +/- vote per (voter, review); the review's author abstains."""
    if vote.voter not in state.scholars:
        return RuleViolation("UnknownScholar", f"voter {vote.voter!r} is not registered")
    review = state.reviews.get(vote.review_id)
    if review is None:
        return RuleViolation("UnknownReview", f"review {vote.review_id!r} does not exist")
    if vote.voter == review.reviewer:
        return RuleViolation("SelfReviewVote", "review authors cannot vote on their own review")
    if vote.sign not in (1, -1):
        return RuleViolation("InvalidSign", f"review vote sign must be +1 or -1, got {vote.sign}")
    return None


def check_validity_vote(state: "EngineState", vote: ValidityVote) -> Optional[RuleViolation]:
    """Validate a validity vote, including its substantiation chain.

    A NEEDS_REVISIONS vote must cite a review of the same article that the
    voter authored or currently up-votes; a REACHED_STANDARDS vote must not
    carry a substantiation. The chain is checked against the current state
    only. A vote stays valid if the cited up-vote is later withdrawn: it was
    substantiated when cast.
    """
    if vote.voter not in state.scholars:
        return RuleViolation("UnknownScholar", f"voter {vote.voter!r} is not registered")
    article = state.articles.get(vote.article_id)
    if article is None:
        return RuleViolation("UnknownArticle", f"article {vote.article_id!r} does not exist")
    if vote.voter in article.authors:
        return RuleViolation("AuthorSelfVote", "authors cannot vote on their own article")
    if vote.choice is VoteChoice.REACHED_STANDARDS:
        if vote.substantiation is not None:
            return RuleViolation(
                "SuperfluousSubstantiation",
                "a reached_standards vote does not carry a substantiation",
            )
        return None
    if vote.substantiation is None:
        return RuleViolation(
            "MissingSubstantiation",
            "a needs_revisions vote must cite a review the voter wrote or up-votes",
        )
    review = state.reviews.get(vote.substantiation)
    if review is None:
        return RuleViolation(
            "InvalidSubstantiation", f"review {vote.substantiation!r} does not exist"
        )
    if review.article_id != vote.article_id:
        return RuleViolation(
            "InvalidSubstantiation",
            f"review {vote.substantiation!r} targets a different article",
        )
    if review.reviewer != vote.voter:
        current = state.review_votes.get(vote.substantiation, {}).get(vote.voter)
        if current is None or current.sign != 1:
            return RuleViolation(
                "InvalidSubstantiation",
                f"voter {vote.voter!r} neither wrote nor up-votes review"
                f" {vote.substantiation!r}",
            )
    return None


def check_priority_toggle(state: "EngineState", mark: PriorityMark) -> Optional[RuleViolation]:
    """Marks alternate: a toggle must change the scholar's latest state."""
    if mark.scholar_id not in state.scholars:
        return RuleViolation("UnknownScholar", f"scholar {mark.scholar_id!r} is not registered")
    if not is_valid_item_uri(mark.item):
        return RuleViolation("InvalidItemUri", f"item {mark.item!r} is not a web identifier")
    current = state.priority_marks.get(normalize_uri(mark.item), {}).get(mark.scholar_id)
    currently_active = current.active if current is not None else False
    if mark.active == currently_active:
        state_word = "active" if currently_active else "inactive"
        return RuleViolation(
            "RedundantToggle", f"mark is already {state_word} for this scholar"
        )
    return None


def check_issue(
    state: "EngineState", issue: Issue, min_issue_size: Optional[int] = None
) -> Optional[RuleViolation]:
    """An issue needs a title, an editorial, and enough distinct items.

    Entry identity uses normalized URIs, so an issue cannot meet the size
    floor by listing one item under several spellings.
    """
    minimum = state.min_issue_size if min_issue_size is None else min_issue_size
    if not issue.issue_id:
        return RuleViolation("InvalidIdentifier", "issue_id must be non-empty")
    if issue.issue_id in state.issues:
        return RuleViolation("DuplicateIssue", f"issue {issue.issue_id!r} already released")
    if issue.journal_owner not in state.scholars:
        return RuleViolation(
            "UnknownScholar", f"journal owner {issue.journal_owner!r} is not registered"
        )
    if not issue.title.strip():
        return RuleViolation("EmptyTitle", "an issue must carry a title")
    if not issue.editorial.strip():
        return RuleViolation("EmptyEditorial", "an issue must carry an editorial")
    if len(issue.entries) < minimum:
        return RuleViolation(
            "TooFewEntries",
            f"an issue needs at least {minimum} entries, got {len(issue.entries)}",
        )
    seen: set[str] = set()
    for entry in issue.entries:
        if not is_valid_item_uri(entry.item):
            return RuleViolation(
                "InvalidItemUri", f"entry {entry.item!r} is not a web identifier"
            )
        key = normalize_uri(entry.item)
        if key in seen:
            return RuleViolation("DuplicateEntry", f"item {entry.item!r} listed twice")
        seen.add(key)
    return None


def check_revision(
    state: "EngineState", article_id: str, new_version: ArticleVersion
) -> Optional[RuleViolation]:
    """Versions are consecutive; acknowledgments cite earlier reviews of
    this article only."""
    article = state.articles.get(article_id)
    if article is None:
        return RuleViolation("UnknownArticle", f"article {article_id!r} does not exist")
    expected = article.latest_version + 1
    if new_version.number != expected:
        return RuleViolation(
            "NonConsecutiveVersion",
            f"expected version {expected}, got {new_version.number}",
        )
    for review_id in new_version.acknowledged_reviews:
        review = state.reviews.get(review_id)
        if review is None:
            return RuleViolation("UnknownReview", f"review {review_id!r} does not exist")
        if review.article_id != article_id:
            return RuleViolation(
                "ForeignReviewAcknowledged",
                f"review {review_id!r} targets article {review.article_id!r},"
                f" not {article_id!r}",
            )
    return None


def check_subscription(
    state: "EngineState", scholar_id: str, journal_owner: str, subscribed: bool
) -> Optional[RuleViolation]:
    """Subscription changes must actually change the subscriber set."""
    if scholar_id not in state.scholars:
        return RuleViolation("UnknownScholar", f"scholar {scholar_id!r} is not registered")
    journal = state.journals.get(journal_owner)
    if journal is None:
        return RuleViolation(
            "UnknownScholar", f"journal owner {journal_owner!r} is not registered"
        )
    if (scholar_id in journal.subscribers) == subscribed:
        state_word = "subscribed" if subscribed else "not subscribed"
        return RuleViolation(
            "RedundantSubscriptionChange", f"scholar is already {state_word}"
        )
    return None
