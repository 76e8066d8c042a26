"""Append-only event log with validated appends and deterministic replay.

Every state the engine ever exposes is a pure fold of `append` over a
prefix of the log. The logical `seq` number is the only ordering that
matters; the `at` timestamp is informational. An append first validates the
event against the current state and only then mutates it, so a refused
event provably leaves the state untouched.

Persistence is JSON Lines: one event per line, UTF-8, top-level fields
{at, kind, payload, seq} in alphabetical key order, no floating-point
fields anywhere in a payload. `load_log(save_log(events))` returns the
identical events and re-saving is byte-identical; parsing is strict by
default and rejects unknown kinds, unknown or missing fields, and
duplicate or non-consecutive seq numbers.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Iterator, Optional, Union

from . import model
from .model import (
    Article,
    ArticleVersion,
    CuratedEntry,
    Issue,
    PriorityMark,
    Review,
    ReviewVote,
    RuleViolation,
    Scholar,
    SelfJournal,
    ValidityVote,
    VoteChoice,
)
from .uris import normalize_uri

KIND_SCHOLAR_REGISTERED = "ScholarRegistered"
KIND_ARTICLE_SUBMITTED = "ArticleSubmitted"
KIND_ARTICLE_REVISED = "ArticleRevised"
KIND_REVIEW_POSTED = "ReviewPosted"
KIND_REVIEW_VOTE_CAST = "ReviewVoteCast"
KIND_VALIDITY_VOTE_CAST = "ValidityVoteCast"
KIND_PRIORITY_TOGGLED = "PriorityToggled"
KIND_ISSUE_RELEASED = "IssueReleased"
KIND_SUBSCRIPTION_CHANGED = "SubscriptionChanged"

EVENT_KINDS = (
    KIND_SCHOLAR_REGISTERED,
    KIND_ARTICLE_SUBMITTED,
    KIND_ARTICLE_REVISED,
    KIND_REVIEW_POSTED,
    KIND_REVIEW_VOTE_CAST,
    KIND_VALIDITY_VOTE_CAST,
    KIND_PRIORITY_TOGGLED,
    KIND_ISSUE_RELEASED,
    KIND_SUBSCRIPTION_CHANGED,
)


class ReplayError(Exception):
    """Replay stopped at the first invalid event."""

    def __init__(self, seq: int, violation: RuleViolation):
        super().__init__(f"event seq {seq} rejected: {violation}")
        self.seq = seq
        self.violation = violation


class LogParseError(Exception):
    """A log line could not be parsed; `line` is 1-based."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(slots=True)
class Event:
    seq: int
    at: str
    kind: str
    payload: dict


@dataclass(slots=True)
class StateDigest:
    digest: str


@dataclass
class EngineState:
    """Aggregate view derived from an event prefix.

    All maps are keyed by identifier. `article_by_uri`, `reviews_by_article`
    and `priority_counts` are derived indexes kept for O(1) lookups; they are
    excluded from the digest because they are functions of the other fields.
    Treat instances as immutable snapshots: only `append` may mutate one, and
    only for the single event it admits.
    """

    min_issue_size: int = model.MIN_ISSUE_SIZE
    last_seq: int = 0
    scholars: dict[str, Scholar] = field(default_factory=dict)
    articles: dict[str, Article] = field(default_factory=dict)
    article_by_uri: dict[str, str] = field(default_factory=dict)
    reviews: dict[str, Review] = field(default_factory=dict)
    reviews_by_article: dict[str, list[str]] = field(default_factory=dict)
    review_votes: dict[str, dict[str, ReviewVote]] = field(default_factory=dict)
    validity_votes: dict[str, dict[str, ValidityVote]] = field(default_factory=dict)
    priority_marks: dict[str, dict[str, PriorityMark]] = field(default_factory=dict)
    priority_counts: dict[str, int] = field(default_factory=dict)
    journals: dict[str, SelfJournal] = field(default_factory=dict)
    issues: dict[str, Issue] = field(default_factory=dict)

    def canonical_form(self) -> dict:
        """Order-independent plain-data rendering used for the digest."""
        return {
            "last_seq": self.last_seq,
            "scholars": {
                sid: {"display_name": s.display_name, "registered_at": s.registered_at}
                for sid, s in self.scholars.items()
            },
            "articles": {
                aid: {
                    "canonical_uri": a.canonical_uri,
                    "authors": sorted(a.authors),
                    "versions": [
                        {
                            "number": v.number,
                            "content_digest": v.content_digest,
                            "acknowledged_reviews": sorted(v.acknowledged_reviews),
                            "created_at": v.created_at,
                        }
                        for v in a.versions
                    ],
                }
                for aid, a in self.articles.items()
            },
            "reviews": {
                rid: {
                    "article_id": r.article_id,
                    "target_version": r.target_version,
                    "reviewer": r.reviewer,
                    "body": r.body,
                    "posted_at": r.posted_at,
                }
                for rid, r in self.reviews.items()
            },
            "review_votes": {
                rid: {
                    voter: {"sign": v.sign, "cast_at": v.cast_at}
                    for voter, v in votes.items()
                }
                for rid, votes in self.review_votes.items()
                if votes
            },
            "validity_votes": {
                aid: {
                    voter: {
                        "choice": v.choice.value,
                        "substantiation": v.substantiation,
                        "version_seen": v.version_seen,
                        "cast_at": v.cast_at,
                    }
                    for voter, v in votes.items()
                }
                for aid, votes in self.validity_votes.items()
                if votes
            },
            "priority_marks": {
                item: {
                    sid: {"active": m.active, "toggled_at": m.toggled_at}
                    for sid, m in marks.items()
                }
                for item, marks in self.priority_marks.items()
                if marks
            },
            "journals": {
                owner: {"issues": list(j.issues), "subscribers": sorted(j.subscribers)}
                for owner, j in self.journals.items()
            },
            "issues": {
                iid: {
                    "journal_owner": i.journal_owner,
                    "title": i.title,
                    "editorial": i.editorial,
                    "entries": [
                        {"item": e.item, "comment": e.comment} for e in i.entries
                    ],
                    "released_at": i.released_at,
                }
                for iid, i in self.issues.items()
            },
        }


def digest(state: EngineState) -> StateDigest:
    """Canonical fingerprint of a state, independent of map insertion order."""
    blob = json.dumps(
        state.canonical_form(), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    )
    return StateDigest(hashlib.sha256(blob.encode("utf-8")).hexdigest())


# --- payload validation -------------------------------------------------

def _want_str(payload: dict, key: str) -> str:
    value = payload.get(key)
    if not isinstance(value, str):
        raise ValueError(f"field {key!r} must be a string")
    return value


def _want_int(payload: dict, key: str) -> int:
    value = payload.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueError(f"field {key!r} must be an integer")
    return value


def _want_bool(payload: dict, key: str) -> bool:
    value = payload.get(key)
    if not isinstance(value, bool):
        raise ValueError(f"field {key!r} must be a boolean")
    return value


def _want_str_list(payload: dict, key: str) -> list[str]:
    value = payload.get(key)
    if not isinstance(value, list) or any(not isinstance(x, str) for x in value):
        raise ValueError(f"field {key!r} must be a list of strings")
    if len(set(value)) != len(value):
        raise ValueError(f"field {key!r} must not repeat values")
    return value


_PAYLOAD_FIELDS = {
    KIND_SCHOLAR_REGISTERED: ({"scholar_id", "display_name"}, set()),
    KIND_ARTICLE_SUBMITTED: (
        {"article_id", "canonical_uri", "authors", "content_digest"},
        set(),
    ),
    KIND_ARTICLE_REVISED: (
        {"article_id", "number", "content_digest", "acknowledged_reviews"},
        set(),
    ),
    KIND_REVIEW_POSTED: (
        {"review_id", "article_id", "target_version", "reviewer", "body"},
        set(),
    ),
    KIND_REVIEW_VOTE_CAST: ({"voter", "review_id", "sign"}, set()),
    KIND_VALIDITY_VOTE_CAST: ({"voter", "article_id", "choice"}, {"substantiation"}),
    KIND_PRIORITY_TOGGLED: ({"scholar_id", "item", "active"}, set()),
    KIND_ISSUE_RELEASED: (
        {"issue_id", "journal_owner", "title", "editorial", "entries"},
        set(),
    ),
    KIND_SUBSCRIPTION_CHANGED: ({"scholar_id", "journal_owner", "subscribed"}, set()),
}


# Exact-type fast paths, one per kind. `type(x) is int` also rejects bools,
# which isinstance would let through. On any mismatch the slow path rebuilds
# the precise error message.

def _fast_scholar(p: dict) -> bool:
    return (
        len(p) == 2
        and type(p.get("scholar_id")) is str
        and type(p.get("display_name")) is str
    )


def _fast_str_list(value) -> bool:
    return (
        type(value) is list
        and all(type(x) is str for x in value)
        and len(set(value)) == len(value)
    )


def _fast_submitted(p: dict) -> bool:
    return (
        len(p) == 4
        and type(p.get("article_id")) is str
        and type(p.get("canonical_uri")) is str
        and type(p.get("content_digest")) is str
        and _fast_str_list(p.get("authors"))
        and len(p["authors"]) > 0
    )


def _fast_revised(p: dict) -> bool:
    return (
        len(p) == 4
        and type(p.get("article_id")) is str
        and type(p.get("content_digest")) is str
        and type(p.get("number")) is int
        and _fast_str_list(p.get("acknowledged_reviews"))
    )


def _fast_review(p: dict) -> bool:
    return (
        len(p) == 5
        and type(p.get("review_id")) is str
        and type(p.get("article_id")) is str
        and type(p.get("reviewer")) is str
        and type(p.get("body")) is str
        and type(p.get("target_version")) is int
    )


def _fast_review_vote(p: dict) -> bool:
    return (
        len(p) == 3
        and type(p.get("voter")) is str
        and type(p.get("review_id")) is str
        and type(p.get("sign")) is int
        and p["sign"] in (1, -1)
    )


def _fast_validity_vote(p: dict) -> bool:
    n = len(p)
    if n not in (3, 4):
        return False
    if not (
        type(p.get("voter")) is str
        and type(p.get("article_id")) is str
        and p.get("choice") in ("reached_standards", "needs_revisions")
    ):
        return False
    return n == 3 or type(p.get("substantiation")) is str


def _fast_priority(p: dict) -> bool:
    return (
        len(p) == 3
        and type(p.get("scholar_id")) is str
        and type(p.get("item")) is str
        and type(p.get("active")) is bool
    )


def _fast_entry(e) -> bool:
    if type(e) is not dict or type(e.get("item")) is not str:
        return False
    if len(e) == 1:
        return True
    return len(e) == 2 and type(e.get("comment")) is str


def _fast_issue(p: dict) -> bool:
    entries = p.get("entries")
    return (
        len(p) == 5
        and type(p.get("issue_id")) is str
        and type(p.get("journal_owner")) is str
        and type(p.get("title")) is str
        and type(p.get("editorial")) is str
        and type(entries) is list
        and all(_fast_entry(e) for e in entries)
    )


def _fast_subscription(p: dict) -> bool:
    return (
        len(p) == 3
        and type(p.get("scholar_id")) is str
        and type(p.get("journal_owner")) is str
        and type(p.get("subscribed")) is bool
    )


_FAST_VALIDATORS = {
    KIND_SCHOLAR_REGISTERED: _fast_scholar,
    KIND_ARTICLE_SUBMITTED: _fast_submitted,
    KIND_ARTICLE_REVISED: _fast_revised,
    KIND_REVIEW_POSTED: _fast_review,
    KIND_REVIEW_VOTE_CAST: _fast_review_vote,
    KIND_VALIDITY_VOTE_CAST: _fast_validity_vote,
    KIND_PRIORITY_TOGGLED: _fast_priority,
    KIND_ISSUE_RELEASED: _fast_issue,
    KIND_SUBSCRIPTION_CHANGED: _fast_subscription,
}


def validate_payload(kind: str, payload: dict) -> None:
    """Structural validation shared by the parser and `append`.

    Checks field presence and JSON types only; protocol rules are the
    model's job. Raises ValueError with a human reason.
    """
    fast = _FAST_VALIDATORS.get(kind)
    if fast is None:
        raise ValueError(f"unknown event kind {kind!r}")
    if type(payload) is dict and fast(payload):
        return
    _explain_invalid_payload(kind, payload)


def _explain_invalid_payload(kind: str, payload) -> None:
    if not isinstance(payload, dict):
        raise ValueError("payload must be an object")
    required, optional = _PAYLOAD_FIELDS[kind]
    keys = set(payload)
    missing = required - keys
    if missing:
        raise ValueError(f"missing payload field {sorted(missing)[0]!r}")
    unknown = keys - required - optional
    if unknown:
        raise ValueError(f"unknown payload field {sorted(unknown)[0]!r}")

    if kind == KIND_SCHOLAR_REGISTERED:
        _want_str(payload, "scholar_id")
        _want_str(payload, "display_name")
    elif kind == KIND_ARTICLE_SUBMITTED:
        _want_str(payload, "article_id")
        _want_str(payload, "canonical_uri")
        _want_str(payload, "content_digest")
        if not _want_str_list(payload, "authors"):
            raise ValueError("field 'authors' must not be empty")
    elif kind == KIND_ARTICLE_REVISED:
        _want_str(payload, "article_id")
        _want_str(payload, "content_digest")
        _want_int(payload, "number")
        _want_str_list(payload, "acknowledged_reviews")
    elif kind == KIND_REVIEW_POSTED:
        _want_str(payload, "review_id")
        _want_str(payload, "article_id")
        _want_str(payload, "reviewer")
        _want_str(payload, "body")
        _want_int(payload, "target_version")
    elif kind == KIND_REVIEW_VOTE_CAST:
        _want_str(payload, "voter")
        _want_str(payload, "review_id")
        if _want_int(payload, "sign") not in (1, -1):
            raise ValueError("field 'sign' must be 1 or -1")
    elif kind == KIND_VALIDITY_VOTE_CAST:
        _want_str(payload, "voter")
        _want_str(payload, "article_id")
        choice = _want_str(payload, "choice")
        if choice not in (VoteChoice.REACHED_STANDARDS.value, VoteChoice.NEEDS_REVISIONS.value):
            raise ValueError(f"field 'choice' has unknown value {choice!r}")
        if "substantiation" in payload:
            _want_str(payload, "substantiation")
    elif kind == KIND_PRIORITY_TOGGLED:
        _want_str(payload, "scholar_id")
        _want_str(payload, "item")
        _want_bool(payload, "active")
    elif kind == KIND_ISSUE_RELEASED:
        _want_str(payload, "issue_id")
        _want_str(payload, "journal_owner")
        _want_str(payload, "title")
        _want_str(payload, "editorial")
        entries = payload.get("entries")
        if not isinstance(entries, list):
            raise ValueError("field 'entries' must be a list")
        for entry in entries:
            if not isinstance(entry, dict):
                raise ValueError("each entry must be an object")
            extra = set(entry) - {"item", "comment"}
            if extra:
                raise ValueError(f"unknown entry field {sorted(extra)[0]!r}")
            _want_str(entry, "item")
            if "comment" in entry:
                _want_str(entry, "comment")
    elif kind == KIND_SUBSCRIPTION_CHANGED:
        _want_str(payload, "scholar_id")
        _want_str(payload, "journal_owner")
        _want_bool(payload, "subscribed")
    # The fast check refused the payload, so one of the above must raise;
    # this is unreachable unless the two paths disagree.
    raise ValueError("malformed payload")


# --- append / replay ----------------------------------------------------

def _apply_scholar_registered(state: EngineState, seq: int, p: dict) -> None:
    scholar = Scholar(p["scholar_id"], p["display_name"], seq)
    violation = model.check_registration(state, scholar)
    if violation:
        raise violation
    state.scholars[scholar.scholar_id] = scholar
    state.journals[scholar.scholar_id] = SelfJournal(owner=scholar.scholar_id)


def _apply_article_submitted(state: EngineState, seq: int, p: dict) -> None:
    article = Article(
        article_id=p["article_id"],
        canonical_uri=p["canonical_uri"],
        authors=frozenset(p["authors"]),
        versions=[ArticleVersion(1, p["content_digest"], frozenset(), seq)],
    )
    violation = model.check_submission(state, article)
    if violation:
        raise violation
    state.articles[article.article_id] = article
    state.article_by_uri[normalize_uri(article.canonical_uri)] = article.article_id


def _apply_article_revised(state: EngineState, seq: int, p: dict) -> None:
    version = ArticleVersion(
        number=p["number"],
        content_digest=p["content_digest"],
        acknowledged_reviews=frozenset(p["acknowledged_reviews"]),
        created_at=seq,
    )
    violation = model.check_revision(state, p["article_id"], version)
    if violation:
        raise violation
    state.articles[p["article_id"]].versions.append(version)


def _apply_review_posted(state: EngineState, seq: int, p: dict) -> None:
    review = Review(
        review_id=p["review_id"],
        article_id=p["article_id"],
        target_version=p["target_version"],
        reviewer=p["reviewer"],
        body=p["body"],
        posted_at=seq,
    )
    violation = model.check_review(state, review)
    if violation:
        raise violation
    state.reviews[review.review_id] = review
    state.reviews_by_article.setdefault(review.article_id, []).append(review.review_id)


def _apply_review_vote_cast(state: EngineState, seq: int, p: dict) -> None:
    vote = ReviewVote(voter=p["voter"], review_id=p["review_id"], sign=p["sign"], cast_at=seq)
    violation = model.check_review_vote(state, vote)
    if violation:
        raise violation
    state.review_votes.setdefault(vote.review_id, {})[vote.voter] = vote


def _apply_validity_vote_cast(state: EngineState, seq: int, p: dict) -> None:
    article = state.articles.get(p["article_id"])
    vote = ValidityVote(
        voter=p["voter"],
        article_id=p["article_id"],
        choice=VoteChoice(p["choice"]),
        substantiation=p.get("substantiation"),
        version_seen=article.latest_version if article is not None else 0,
        cast_at=seq,
    )
    violation = model.check_validity_vote(state, vote)
    if violation:
        raise violation
    state.validity_votes.setdefault(vote.article_id, {})[vote.voter] = vote


def _apply_priority_toggled(state: EngineState, seq: int, p: dict) -> None:
    mark = PriorityMark(
        scholar_id=p["scholar_id"], item=p["item"], active=p["active"], toggled_at=seq
    )
    violation = model.check_priority_toggle(state, mark)
    if violation:
        raise violation
    key = normalize_uri(mark.item)
    state.priority_marks.setdefault(key, {})[mark.scholar_id] = mark
    state.priority_counts[key] = state.priority_counts.get(key, 0) + (
        1 if mark.active else -1
    )


def _apply_issue_released(state: EngineState, seq: int, p: dict) -> None:
    issue = Issue(
        issue_id=p["issue_id"],
        journal_owner=p["journal_owner"],
        title=p["title"],
        editorial=p["editorial"],
        entries=[CuratedEntry(e["item"], e.get("comment")) for e in p["entries"]],
        released_at=seq,
    )
    violation = model.check_issue(state, issue)
    if violation:
        raise violation
    state.issues[issue.issue_id] = issue
    state.journals[issue.journal_owner].issues.append(issue.issue_id)


def _apply_subscription_changed(state: EngineState, seq: int, p: dict) -> None:
    violation = model.check_subscription(
        state, p["scholar_id"], p["journal_owner"], p["subscribed"]
    )
    if violation:
        raise violation
    subscribers = state.journals[p["journal_owner"]].subscribers
    if p["subscribed"]:
        subscribers.add(p["scholar_id"])
    else:
        subscribers.discard(p["scholar_id"])


_APPLIERS = {
    KIND_SCHOLAR_REGISTERED: _apply_scholar_registered,
    KIND_ARTICLE_SUBMITTED: _apply_article_submitted,
    KIND_ARTICLE_REVISED: _apply_article_revised,
    KIND_REVIEW_POSTED: _apply_review_posted,
    KIND_REVIEW_VOTE_CAST: _apply_review_vote_cast,
    KIND_VALIDITY_VOTE_CAST: _apply_validity_vote_cast,
    KIND_PRIORITY_TOGGLED: _apply_priority_toggled,
    KIND_ISSUE_RELEASED: _apply_issue_released,
    KIND_SUBSCRIPTION_CHANGED: _apply_subscription_changed,
}


def append(state: EngineState, event: Event) -> EngineState:
    """Validate `event` against `state`, then apply it.

    Raises RuleViolation and leaves the state untouched if any check fails;
    validation completes before the first mutation. Returns the state for
    fold-style call sites.
    """
    if event.seq != state.last_seq + 1:
        raise RuleViolation(
            "SequenceGap", f"expected seq {state.last_seq + 1}, got {event.seq}"
        )
    applier = _APPLIERS.get(event.kind)
    if applier is None:
        raise RuleViolation("UnknownKind", f"unknown event kind {event.kind!r}")
    try:
        validate_payload(event.kind, event.payload)
    except ValueError as exc:
        raise RuleViolation("MalformedPayload", str(exc)) from None
    applier(state, event.seq, event.payload)
    state.last_seq = event.seq
    return state


def replay(
    events: Iterable[Event],
    *,
    min_issue_size: int = model.MIN_ISSUE_SIZE,
    allow_gaps: bool = False,
) -> EngineState:
    """Fold `append` over `events`, failing atomically on the first bad one.

    `allow_gaps` admits logs thinned by a permissive load (seq strictly
    increasing instead of consecutive); strict mode is the default.
    """
    state = EngineState(min_issue_size=min_issue_size)
    for event in events:
        if allow_gaps and event.seq > state.last_seq + 1:
            state.last_seq = event.seq - 1
        try:
            append(state, event)
        except RuleViolation as violation:
            raise ReplayError(event.seq, violation) from None
    return state


# --- persistence ----------------------------------------------------------

@dataclass(slots=True)
class LogLoadResult:
    """Events parsed from a log plus counts of permissively skipped kinds."""

    events: list[Event]
    skipped_kinds: dict[str, int]

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)


def save_log(events: Iterable[Event]) -> bytes:
    """Serialize events to canonical JSON Lines (UTF-8, sorted keys)."""
    lines = []
    for event in events:
        lines.append(
            json.dumps(
                {"at": event.at, "kind": event.kind, "payload": event.payload, "seq": event.seq},
                sort_keys=True,
                separators=(",", ":"),
                ensure_ascii=False,
            )
        )
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


_AT_PATTERN = re.compile(
    r"\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(?:\.\d+)?(?:Z|[+-]\d{2}:\d{2})?$"
)


def load_log(data: Union[bytes, str], *, permissive: bool = False) -> LogLoadResult:
    """Parse a JSON Lines log, strictly by default.

    Strict mode rejects unknown kinds, unknown/missing fields, bad field
    types, and duplicate or non-consecutive seq numbers. Permissive mode
    skips lines with unknown kinds (counting them per kind) and requires
    seq to be strictly increasing rather than consecutive.
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data
    events: list[Event] = []
    skipped: dict[str, int] = {}
    last_seq = 0
    loads = json.loads
    at_match = _AT_PATTERN.match
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        try:
            raw = loads(line)
        except json.JSONDecodeError as exc:
            raise LogParseError(line_no, f"invalid JSON: {exc.msg}") from None
        if type(raw) is not dict:
            raise LogParseError(line_no, "event must be a JSON object")
        if (
            len(raw) != 4
            or "seq" not in raw
            or "at" not in raw
            or "kind" not in raw
            or "payload" not in raw
        ):
            missing = {"at", "kind", "payload", "seq"} - set(raw)
            if missing:
                raise LogParseError(line_no, f"missing field {sorted(missing)[0]!r}")
            extra = set(raw) - {"at", "kind", "payload", "seq"}
            raise LogParseError(line_no, f"unknown field {sorted(extra)[0]!r}")
        seq = raw["seq"]
        if type(seq) is not int or seq < 1:
            raise LogParseError(line_no, "field 'seq' must be a positive integer")
        at = raw["at"]
        if type(at) is not str or at_match(at) is None:
            raise LogParseError(line_no, f"field 'at' is not an ISO-8601 timestamp: {at!r}")
        kind = raw["kind"]
        if type(kind) is not str:
            raise LogParseError(line_no, "field 'kind' must be a string")
        if seq <= last_seq:
            raise LogParseError(line_no, f"duplicate or decreasing seq {seq}")
        if kind not in _FAST_VALIDATORS:
            if permissive:
                skipped[kind] = skipped.get(kind, 0) + 1
                last_seq = seq
                continue
            raise LogParseError(line_no, f"unknown event kind {kind!r}")
        if not permissive and seq != last_seq + 1:
            raise LogParseError(line_no, f"non-consecutive seq {seq}, expected {last_seq + 1}")
        try:
            validate_payload(kind, raw["payload"])
        except ValueError as exc:
            raise LogParseError(line_no, str(exc)) from None
        events.append(Event(seq=seq, at=at, kind=kind, payload=raw["payload"]))
        last_seq = seq
    return LogLoadResult(events=events, skipped_kinds=skipped)


# --- event builders -------------------------------------------------------
# Convenience constructors used by the simulator, fixtures, and tests. Each
# produces a canonical payload (optional fields omitted when absent).

def event_at(seq: int) -> str:
    """Deterministic informational timestamp derived from seq."""
    base = 1577836800  # 2020-01-01T00:00:00Z
    stamp = datetime.fromtimestamp(base + seq, tz=timezone.utc)
    return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")


def make_event(seq: int, kind: str, payload: dict, at: Optional[str] = None) -> Event:
    return Event(seq=seq, at=at if at is not None else event_at(seq), kind=kind, payload=payload)


def scholar_registered(seq: int, scholar_id: str, display_name: str) -> Event:
    return make_event(
        seq, KIND_SCHOLAR_REGISTERED, {"scholar_id": scholar_id, "display_name": display_name}
    )


def article_submitted(
    seq: int, article_id: str, canonical_uri: str, authors: list[str], content_digest: str
) -> Event:
    return make_event(
        seq,
        KIND_ARTICLE_SUBMITTED,
        {
            "article_id": article_id,
            "canonical_uri": canonical_uri,
            "authors": list(authors),
            "content_digest": content_digest,
        },
    )


def article_revised(
    seq: int, article_id: str, number: int, content_digest: str, acknowledged: list[str]
) -> Event:
    return make_event(
        seq,
        KIND_ARTICLE_REVISED,
        {
            "article_id": article_id,
            "number": number,
            "content_digest": content_digest,
            "acknowledged_reviews": list(acknowledged),
        },
    )


def review_posted(
    seq: int, review_id: str, article_id: str, target_version: int, reviewer: str, body: str
) -> Event:
    return make_event(
        seq,
        KIND_REVIEW_POSTED,
        {
            "review_id": review_id,
            "article_id": article_id,
            "target_version": target_version,
            "reviewer": reviewer,
            "body": body,
        },
    )


def review_vote_cast(seq: int, voter: str, review_id: str, sign: int) -> Event:
    return make_event(
        seq, KIND_REVIEW_VOTE_CAST, {"voter": voter, "review_id": review_id, "sign": sign}
    )


def validity_vote_cast(
    seq: int, voter: str, article_id: str, choice: str, substantiation: Optional[str] = None
) -> Event:
    payload = {"voter": voter, "article_id": article_id, "choice": choice}
    if substantiation is not None:
        payload["substantiation"] = substantiation
    return make_event(seq, KIND_VALIDITY_VOTE_CAST, payload)


def priority_toggled(seq: int, scholar_id: str, item: str, active: bool) -> Event:
    return make_event(
        seq, KIND_PRIORITY_TOGGLED, {"scholar_id": scholar_id, "item": item, "active": active}
    )


def issue_released(
    seq: int,
    issue_id: str,
    journal_owner: str,
    title: str,
    editorial: str,
    entries: list[dict],
) -> Event:
    return make_event(
        seq,
        KIND_ISSUE_RELEASED,
        {
            "issue_id": issue_id,
            "journal_owner": journal_owner,
            "title": title,
            "editorial": editorial,
            "entries": entries,
        },
    )


def subscription_changed(seq: int, scholar_id: str, journal_owner: str, subscribed: bool) -> Event:
    return make_event(
        seq,
        KIND_SUBSCRIPTION_CHANGED,
        {"scholar_id": scholar_id, "journal_owner": journal_owner, "subscribed": subscribed},
    )
