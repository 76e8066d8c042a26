"""Agent-based test bench for the evaluation protocol.

Generates synthetic event logs under configurable honest and adversarial
strategies, then measures how well the metrics track latent article quality
and how well the detector finds planted collusion. Every run is a pure
function of its config: one RNG stream per agent is derived from
(seed, agent_id), agents are scheduled round-robin in ascending id order,
and intended actions are appended in that order, so identical configs give
byte-identical logs.

Strategies:

* honest       reads recent work sampled by priority then recency, votes by
               perceived quality, shortlists strong reads and periodically
               releases them as a journal issue padded with external links.
* spammer      releases large issues of arbitrary items without reading.
* colluder     honest reader, but validity praise and curation are directed
               at clique members' articles; issue minimums are padded from
               its own reading.
* friend_biased  honest, but only friends' articles are ever curated.
* free_rider   publishes and does nothing else.

Intended actions that break protocol rules are dropped at append time and
counted, never raised: the log a scenario emits always replays cleanly.
"""

from __future__ import annotations

import bisect
import json
import math
import random
from dataclasses import dataclass, field, replace
from typing import Optional

from scipy.stats import spearmanr

from . import anomaly as anomaly_mod
from . import ledger, metrics
from .anomaly import DetectorParams
from .ledger import EngineState, Event
from .model import MIN_ISSUE_SIZE, RuleViolation, VoteChoice
from .uris import normalize_uri

HONEST = "honest"
SPAMMER = "spammer"
COLLUDER = "colluder"
FRIEND_BIASED = "friend_biased"
FREE_RIDER = "free_rider"

STRATEGIES = (HONEST, COLLUDER, FRIEND_BIASED, FREE_RIDER, SPAMMER)

# Validity fraction only enters the quality-signal report once this many
# scholars voted on the article.
MIN_VOTERS_FOR_FRACTION = 5


class InvalidConfig(ValueError):
    pass


@dataclass(slots=True)
class QualityParams:
    alpha: float = 2.0
    beta: float = 5.0
    noise_sigma: float = 0.1


@dataclass(slots=True)
class BehaviorParams:
    """Calibration knobs for agent activity. Values are per agent.

    Defaults are tuned so honest populations produce a clear quality signal
    while keeping curation diffuse: one scholar curates only a handful of
    distinct authors, which is what separates organic mutual interest from
    the dense reciprocal rings the detector hunts.
    """

    articles_per_round: float = 0.1
    reviews_per_round: float = 1.0       # cap on reviews written per round
    reading_capacity: int = 10           # hard cap on reads per round
    reads_per_round: int = 3             # typical reads, <= capacity
    reading_window: int = 250            # how far back discovery reaches
    reading_slice: int = 60              # sampled from the top of the ranking
    issue_cadence: int = 5               # rounds between curation attempts
    vote_prob: float = 0.85              # chance a read leads to a validity vote
    reached_cutoff: float = 0.5          # perceived quality for a REACHED vote
    review_prob: float = 0.1             # chance of a spontaneous critical review
    downvote_prob: float = 0.08          # chance a satisfied reader pans a critique
    priority_bar: float = 0.75           # perceived quality to flag priority
    curation_bar: float = 0.6            # perceived quality to shortlist a read
    curation_prob: float = 0.35          # chance a strong read is shortlisted
    issue_platform_min: int = 2          # shortlisted articles needed to release
    issue_platform_max: int = 3          # platform articles per issue
    spam_issue_size: int = 12
    subscribe_prob: float = 0.02
    revise_prob: float = 0.1


@dataclass(slots=True)
class AgentSpec:
    agent_id: str
    strategy: str
    clique_id: Optional[str] = None
    friends: tuple[str, ...] = ()
    articles_per_round: Optional[float] = None
    reviews_per_round: Optional[float] = None
    reading_capacity: Optional[int] = None
    issue_cadence: Optional[int] = None


@dataclass(slots=True)
class ScenarioConfig:
    seed: int
    rounds: int
    agents: list[AgentSpec]
    quality: QualityParams = field(default_factory=QualityParams)
    behavior: BehaviorParams = field(default_factory=BehaviorParams)
    detector: DetectorParams = field(default_factory=DetectorParams)
    min_issue_size: int = MIN_ISSUE_SIZE

    def validate(self) -> None:
        if self.rounds < 0:
            raise InvalidConfig(f"rounds must be >= 0, got {self.rounds}")
        if not self.agents:
            raise InvalidConfig("a scenario needs at least one agent")
        seen: set[str] = set()
        for spec in self.agents:
            if spec.strategy not in STRATEGIES:
                raise InvalidConfig(f"unknown strategy {spec.strategy!r}")
            if spec.agent_id in seen:
                raise InvalidConfig(f"duplicate agent_id {spec.agent_id!r}")
            seen.add(spec.agent_id)
            if spec.strategy == COLLUDER and spec.clique_id is None:
                raise InvalidConfig(f"colluder {spec.agent_id!r} has no clique_id")
        if self.min_issue_size < 1:
            raise InvalidConfig("min_issue_size must be positive")
        try:
            self.detector.validate()
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from None


class QualityModel:
    """Latent article quality and per-agent noisy perception.

    Both are keyed RNG draws: a quality never depends on when it is asked
    for, and a perception never depends on read order.
    """

    def __init__(self, seed: int, params: QualityParams):
        self.seed = seed
        self.params = params
        self._quality: dict[str, float] = {}
        self._perception: dict[tuple[str, str], float] = {}

    def quality(self, article_id: str) -> float:
        q = self._quality.get(article_id)
        if q is None:
            rng = random.Random(f"{self.seed}:q:{article_id}")
            q = rng.betavariate(self.params.alpha, self.params.beta)
            self._quality[article_id] = q
        return q

    def perception(self, agent_id: str, article_id: str) -> float:
        key = (agent_id, article_id)
        p = self._perception.get(key)
        if p is None:
            rng = random.Random(f"{self.seed}:p:{agent_id}:{article_id}")
            noise = rng.gauss(0.0, self.params.noise_sigma)
            p = min(1.0, max(0.0, self.quality(article_id) + noise))
            self._perception[key] = p
        return p


@dataclass(slots=True)
class GroundTruth:
    """Labels a report is scored against."""

    quality: QualityModel
    strategies: dict[str, str]
    cliques: dict[str, tuple[str, ...]]

    @property
    def colluders(self) -> set[str]:
        return {a for a, s in self.strategies.items() if s == COLLUDER}


@dataclass(slots=True)
class ScenarioReport:
    spearman_quality_importance: Optional[float]
    spearman_quality_validity: Optional[float]
    inflation_by_clique: dict[str, Optional[float]]
    detector_precision: Optional[float]
    detector_recall: Optional[float]
    flagged_scholars: list[str]
    event_counts: dict[str, int]
    dropped_intentions: dict[str, int]
    articles: int
    state_digest: str

    def to_dict(self) -> dict:
        return {
            "spearman_quality_importance": self.spearman_quality_importance,
            "spearman_quality_validity": self.spearman_quality_validity,
            "inflation_by_clique": self.inflation_by_clique,
            "detector_precision": self.detector_precision,
            "detector_recall": self.detector_recall,
            "flagged_scholars": self.flagged_scholars,
            "event_counts": self.event_counts,
            "dropped_intentions": self.dropped_intentions,
            "articles": self.articles,
            "state_digest": self.state_digest,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)


@dataclass(slots=True)
class ScenarioRun:
    events: list[Event]
    report: ScenarioReport
    truth: GroundTruth
    state: EngineState


# --- config parsing -------------------------------------------------------

_COUNTS_ORDER = (HONEST, COLLUDER, FRIEND_BIASED, FREE_RIDER, SPAMMER)


def make_agents(
    counts: dict[str, int], clique_size: int = 5, friend_group_size: int = 4
) -> list[AgentSpec]:
    """Expand per-strategy counts into concrete agent specs.

    Ids are zero-padded and assigned in a fixed strategy order; colluders
    are grouped into consecutive cliques, friend groups likewise.
    """
    for strategy, n in counts.items():
        if strategy not in STRATEGIES:
            raise InvalidConfig(f"unknown strategy {strategy!r}")
        if not isinstance(n, int) or isinstance(n, bool) or n < 0:
            raise InvalidConfig(f"count for {strategy!r} must be a non-negative integer")
    if clique_size < 2:
        raise InvalidConfig("clique_size must be at least 2")
    if friend_group_size < 2:
        raise InvalidConfig("friend_group_size must be at least 2")
    total = sum(counts.values())
    width = max(4, len(str(total)))
    specs: list[AgentSpec] = []
    by_strategy: dict[str, list[AgentSpec]] = {}
    idx = 0
    for strategy in _COUNTS_ORDER:
        for _ in range(counts.get(strategy, 0)):
            idx += 1
            spec = AgentSpec(agent_id=f"s{idx:0{width}d}", strategy=strategy)
            specs.append(spec)
            by_strategy.setdefault(strategy, []).append(spec)
    for i, spec in enumerate(by_strategy.get(COLLUDER, [])):
        spec.clique_id = f"clique{i // clique_size + 1:02d}"
    friends = by_strategy.get(FRIEND_BIASED, [])
    for i in range(0, len(friends), friend_group_size):
        group = friends[i : i + friend_group_size]
        ids = [s.agent_id for s in group]
        for spec in group:
            spec.friends = tuple(f for f in ids if f != spec.agent_id)
    return specs


def _take_fields(raw: dict, cls, what: str):
    known = set(cls.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise InvalidConfig(f"unknown {what} field {sorted(unknown)[0]!r}")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise InvalidConfig(f"bad {what}: {exc}") from None


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    """Parse and validate a scenario config document."""
    if not isinstance(raw, dict):
        raise InvalidConfig("config must be a JSON object")
    allowed = {
        "seed",
        "rounds",
        "agents",
        "clique_size",
        "friend_group_size",
        "quality",
        "behavior",
        "detector",
        "min_issue_size",
    }
    unknown = set(raw) - allowed
    if unknown:
        raise InvalidConfig(f"unknown config field {sorted(unknown)[0]!r}")
    for key in ("seed", "rounds", "agents"):
        if key not in raw:
            raise InvalidConfig(f"missing config field {key!r}")
    seed = raw["seed"]
    rounds = raw["rounds"]
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise InvalidConfig("seed must be an integer")
    if not isinstance(rounds, int) or isinstance(rounds, bool) or rounds < 0:
        raise InvalidConfig("rounds must be a non-negative integer")
    agents_raw = raw["agents"]
    if isinstance(agents_raw, dict):
        agents = make_agents(
            agents_raw,
            clique_size=raw.get("clique_size", 5),
            friend_group_size=raw.get("friend_group_size", 4),
        )
    elif isinstance(agents_raw, list):
        agents = []
        for item in agents_raw:
            if not isinstance(item, dict):
                raise InvalidConfig("each agent spec must be an object")
            spec = dict(item)
            if "friends" in spec:
                spec["friends"] = tuple(spec["friends"])
            agents.append(_take_fields(spec, AgentSpec, "agent spec"))
    else:
        raise InvalidConfig("agents must be a strategy-count object or a list of specs")
    config = ScenarioConfig(
        seed=seed,
        rounds=rounds,
        agents=agents,
        quality=_take_fields(raw.get("quality", {}), QualityParams, "quality"),
        behavior=_take_fields(raw.get("behavior", {}), BehaviorParams, "behavior"),
        detector=_take_fields(raw.get("detector", {}), DetectorParams, "detector"),
        min_issue_size=raw.get("min_issue_size", MIN_ISSUE_SIZE),
    )
    config.validate()
    return config


# --- per-agent runtime ------------------------------------------------------

@dataclass
class AgentRuntime:
    spec: AgentSpec
    index: int
    rng: random.Random
    behavior: BehaviorParams
    read: set[str] = field(default_factory=set)
    marked: set[str] = field(default_factory=set)
    voted: set[str] = field(default_factory=set)
    upvoted: set[str] = field(default_factory=set)
    downvoted: set[str] = field(default_factory=set)
    shortlist: dict[str, float] = field(default_factory=dict)
    curated: set[str] = field(default_factory=set)
    curated_authors: list[str] = field(default_factory=list)
    subscribed: set[str] = field(default_factory=set)
    clique_peers: tuple[str, ...] = ()
    article_count: int = 0
    review_count: int = 0
    issue_count: int = 0
    note_count: int = 0

    def next_article_id(self) -> str:
        self.article_count += 1
        return f"{self.spec.agent_id}-a{self.article_count}"

    def next_review_id(self) -> str:
        self.review_count += 1
        return f"{self.spec.agent_id}-r{self.review_count}"

    def next_issue_id(self) -> str:
        self.issue_count += 1
        return f"{self.spec.agent_id}-i{self.issue_count}"

    def next_note_uri(self) -> str:
        self.note_count += 1
        return f"https://notes.example/{self.spec.agent_id}/{self.note_count}"


@dataclass
class SimWorld:
    """Shared per-run bookkeeping outside the engine state."""

    article_ids: list[str] = field(default_factory=list)
    uri_of: dict[str, str] = field(default_factory=dict)
    by_author: dict[str, list[str]] = field(default_factory=dict)
    round_candidates: list[str] = field(default_factory=list)


def _effective_behavior(spec: AgentSpec, base: BehaviorParams) -> BehaviorParams:
    overrides = {}
    for name in ("articles_per_round", "reviews_per_round", "reading_capacity", "issue_cadence"):
        value = getattr(spec, name)
        if value is not None:
            overrides[name] = value
    return replace(base, **overrides) if overrides else base


def article_uri(article_id: str) -> str:
    return f"https://articles.example/{article_id}"


# --- intention generation ---------------------------------------------------

Intention = tuple[str, dict]


def _intend_submissions(rt: AgentRuntime) -> list[Intention]:
    b = rt.behavior
    count = int(b.articles_per_round)
    if rt.rng.random() < b.articles_per_round - count:
        count += 1
    intents: list[Intention] = []
    for _ in range(count):
        article_id = rt.next_article_id()
        intents.append(
            (
                ledger.KIND_ARTICLE_SUBMITTED,
                {
                    "article_id": article_id,
                    "canonical_uri": article_uri(article_id),
                    "authors": [rt.spec.agent_id],
                    "content_digest": f"sha-{article_id}-v1",
                },
            )
        )
    return intents


def _pick_substantiation(rt: AgentRuntime, state: EngineState, article_id: str) -> Optional[str]:
    """Best existing review to cite: own, already up-voted, else untainted."""
    me = rt.spec.agent_id
    fallback = None
    for review_id in state.reviews_by_article.get(article_id, ()):
        if state.reviews[review_id].reviewer == me:
            return review_id
        if review_id in rt.upvoted:
            return review_id
        if fallback is None and review_id not in rt.downvoted:
            fallback = review_id
    return fallback


def _intend_vote(
    rt: AgentRuntime, state: EngineState, article_id: str, reached: bool
) -> list[Intention]:
    """A validity vote plus whatever substantiation it needs."""
    me = rt.spec.agent_id
    rt.voted.add(article_id)
    if reached:
        return [
            (
                ledger.KIND_VALIDITY_VOTE_CAST,
                {"voter": me, "article_id": article_id, "choice": "reached_standards"},
            )
        ]
    intents: list[Intention] = []
    substantiation = _pick_substantiation(rt, state, article_id)
    if substantiation is None:
        substantiation = rt.next_review_id()
        intents.append(
            (
                ledger.KIND_REVIEW_POSTED,
                {
                    "review_id": substantiation,
                    "article_id": article_id,
                    "target_version": state.articles[article_id].latest_version,
                    "reviewer": me,
                    "body": f"Revision needed: methodology concerns ({substantiation}).",
                },
            )
        )
    elif state.reviews[substantiation].reviewer != me and substantiation not in rt.upvoted:
        rt.upvoted.add(substantiation)
        rt.downvoted.discard(substantiation)
        intents.append(
            (
                ledger.KIND_REVIEW_VOTE_CAST,
                {"voter": me, "review_id": substantiation, "sign": 1},
            )
        )
    intents.append(
        (
            ledger.KIND_VALIDITY_VOTE_CAST,
            {
                "voter": me,
                "article_id": article_id,
                "choice": "needs_revisions",
                "substantiation": substantiation,
            },
        )
    )
    return intents


def _intend_reading(
    rt: AgentRuntime, state: EngineState, quality: QualityModel, world: SimWorld
) -> list[Intention]:
    """Read, mark, vote on, and shortlist a sample of recent articles."""
    b = rt.behavior
    me = rt.spec.agent_id
    reads = min(b.reads_per_round, b.reading_capacity)
    if reads <= 0:
        return []
    pool: list[str] = []
    for aid in world.round_candidates:
        if aid not in rt.read and me not in state.articles[aid].authors:
            pool.append(aid)
            if len(pool) >= b.reading_slice:
                break
    if not pool:
        return []
    chosen = rt.rng.sample(pool, min(reads, len(pool)))
    intents: list[Intention] = []
    reviews_left = int(math.ceil(b.reviews_per_round))
    for aid in chosen:
        rt.read.add(aid)
        q_hat = quality.perception(me, aid)
        article = state.articles[aid]
        if q_hat >= b.priority_bar and aid not in rt.marked:
            rt.marked.add(aid)
            intents.append(
                (
                    ledger.KIND_PRIORITY_TOGGLED,
                    {"scholar_id": me, "item": article.canonical_uri, "active": True},
                )
            )
        author = next(iter(article.authors))
        is_peer = author in rt.clique_peers
        if is_peer:
            intents.extend(_intend_vote(rt, state, aid, reached=True))
        elif rt.rng.random() < b.vote_prob:
            reached = q_hat >= b.reached_cutoff
            if not reached and reviews_left <= 0 and _pick_substantiation(rt, state, aid) is None:
                pass  # out of review budget with nothing to up-vote: abstain
            else:
                before = len(intents)
                intents.extend(_intend_vote(rt, state, aid, reached=reached))
                if any(k == ledger.KIND_REVIEW_POSTED for k, _ in intents[before:]):
                    reviews_left -= 1
                if reached and rt.rng.random() < b.downvote_prob:
                    intents.extend(self_downvote(rt, state, aid))
        if (
            not is_peer
            and reviews_left > 0
            and q_hat < b.reached_cutoff
            and aid not in rt.voted
            and rt.rng.random() < b.review_prob
        ):
            review_id = rt.next_review_id()
            reviews_left -= 1
            intents.append(
                (
                    ledger.KIND_REVIEW_POSTED,
                    {
                        "review_id": review_id,
                        "article_id": aid,
                        "target_version": article.latest_version,
                        "reviewer": me,
                        "body": f"Open questions on the analysis ({review_id}).",
                    },
                )
            )
        shortlist_ok = q_hat >= b.curation_bar and rt.rng.random() < b.curation_prob
        if rt.spec.strategy == FRIEND_BIASED and author not in rt.spec.friends:
            shortlist_ok = False
        if rt.spec.strategy == COLLUDER and is_peer:
            shortlist_ok = False  # peer articles flow through the clique issue
        if shortlist_ok and aid not in rt.curated:
            rt.shortlist[aid] = q_hat
    return intents


def self_downvote(rt: AgentRuntime, state: EngineState, article_id: str) -> list[Intention]:
    """A satisfied reader pans the first standing critique, if any."""
    me = rt.spec.agent_id
    for review_id in state.reviews_by_article.get(article_id, ()):
        review = state.reviews[review_id]
        if review.reviewer != me and review_id not in rt.upvoted and review_id not in rt.downvoted:
            rt.downvoted.add(review_id)
            return [
                (
                    ledger.KIND_REVIEW_VOTE_CAST,
                    {"voter": me, "review_id": review_id, "sign": -1},
                )
            ]
    return []


def _intend_clique_vote(rt: AgentRuntime, state: EngineState, world: SimWorld) -> list[Intention]:
    """One directed REACHED vote per round on an unvoted clique article."""
    for peer in rt.clique_peers:
        for aid in world.by_author.get(peer, ()):
            if aid not in rt.voted:
                return _intend_vote(rt, state, aid, reached=True)
    return []


def _intend_issue(
    rt: AgentRuntime, state: EngineState, world: SimWorld, minimum: int
) -> list[Intention]:
    b = rt.behavior
    picks: list[str] = []
    if rt.spec.strategy == COLLUDER:
        candidates = sorted(
            aid
            for peer in rt.clique_peers
            for aid in world.by_author.get(peer, ())
            if aid not in rt.curated
        )
        picks = candidates[: b.issue_platform_max]
        if not picks:
            return []
        need = minimum - len(picks)
        if need > 0:
            own = sorted(rt.shortlist, key=lambda a: (-rt.shortlist[a], a))
            picks.extend(own[:need])
    else:
        if len(rt.shortlist) < b.issue_platform_min:
            return []
        ranked = sorted(rt.shortlist, key=lambda a: (-rt.shortlist[a], a))
        picks = ranked[: b.issue_platform_max]
    for aid in picks:
        rt.shortlist.pop(aid, None)
        rt.curated.add(aid)
        rt.curated_authors.extend(sorted(state.articles[aid].authors))
    issue_id = rt.next_issue_id()
    entries = [
        {"item": state.articles[aid].canonical_uri, "comment": f"Selected by {rt.spec.agent_id}"}
        for aid in picks
    ]
    while len(entries) < minimum:
        entries.append({"item": rt.next_note_uri()})
    return [
        (
            ledger.KIND_ISSUE_RELEASED,
            {
                "issue_id": issue_id,
                "journal_owner": rt.spec.agent_id,
                "title": f"Selections no. {rt.issue_count}",
                "editorial": f"Readings worth attention, picked by {rt.spec.agent_id}.",
                "entries": entries,
            },
        )
    ]


def _intend_spam_issue(
    rt: AgentRuntime, world: SimWorld, minimum: int
) -> list[Intention]:
    b = rt.behavior
    take = min(b.spam_issue_size, len(world.article_ids))
    picks = rt.rng.sample(world.article_ids, take) if take else []
    entries: list[dict] = [{"item": article_uri(aid)} for aid in picks]
    while len(entries) < minimum:
        entries.append({"item": rt.next_note_uri()})
    issue_id = rt.next_issue_id()
    return [
        (
            ledger.KIND_ISSUE_RELEASED,
            {
                "issue_id": issue_id,
                "journal_owner": rt.spec.agent_id,
                "title": f"Roundup {rt.issue_count}",
                "editorial": "Everything you may have missed.",
                "entries": entries,
            },
        )
    ]


def _intend_revision(rt: AgentRuntime, state: EngineState) -> list[Intention]:
    b = rt.behavior
    me = rt.spec.agent_id
    if rt.rng.random() >= b.revise_prob:
        return []
    for n in range(1, rt.article_count + 1):
        aid = f"{me}-a{n}"
        article = state.articles.get(aid)
        if article is None:
            continue
        acked: set[str] = set()
        for version in article.versions:
            acked |= version.acknowledged_reviews
        fresh = [r for r in state.reviews_by_article.get(aid, ()) if r not in acked]
        if fresh:
            number = article.latest_version + 1
            return [
                (
                    ledger.KIND_ARTICLE_REVISED,
                    {
                        "article_id": aid,
                        "number": number,
                        "content_digest": f"sha-{aid}-v{number}",
                        "acknowledged_reviews": sorted(fresh),
                    },
                )
            ]
    return []


def _intend_subscription(rt: AgentRuntime) -> list[Intention]:
    b = rt.behavior
    me = rt.spec.agent_id
    if not rt.curated_authors or rt.rng.random() >= b.subscribe_prob:
        return []
    target = rt.rng.choice(rt.curated_authors)
    if target == me or target in rt.subscribed:
        return []
    rt.subscribed.add(target)
    return [
        (
            ledger.KIND_SUBSCRIPTION_CHANGED,
            {"scholar_id": me, "journal_owner": target, "subscribed": True},
        )
    ]


def agent_round(
    state: EngineState,
    rt: AgentRuntime,
    quality: QualityModel,
    world: SimWorld,
    round_no: int,
) -> list[Intention]:
    """Intended actions for one agent in one round, against a round-start view."""
    b = rt.behavior
    strategy = rt.spec.strategy
    intents = _intend_submissions(rt)
    if strategy == FREE_RIDER:
        return intents
    if strategy == SPAMMER:
        intents.extend(_intend_spam_issue(rt, world, state.min_issue_size))
        return intents
    intents.extend(_intend_reading(rt, state, quality, world))
    if strategy == COLLUDER:
        intents.extend(_intend_clique_vote(rt, state, world))
    if (round_no + rt.index) % b.issue_cadence == 0:
        intents.extend(_intend_issue(rt, state, world, state.min_issue_size))
    intents.extend(_intend_revision(rt, state))
    intents.extend(_intend_subscription(rt))
    return intents


# --- scenario loop ----------------------------------------------------------

def _rank_candidates(state: EngineState, world: SimWorld, window: int) -> list[str]:
    recent = world.article_ids[-window:]

    def sort_key(aid: str) -> tuple[int, int]:
        uri = world.uri_of[aid]
        return (
            -state.priority_counts.get(uri, 0),
            -state.articles[aid].versions[0].created_at,
        )

    return sorted(recent, key=sort_key)


def run_scenario(config: ScenarioConfig) -> ScenarioRun:
    """Run a scenario to completion and score it.

    The emitted log replays cleanly by construction; intended actions that
    a rule refuses are dropped and counted in the report.
    """
    config.validate()
    quality = QualityModel(config.seed, config.quality)
    state = EngineState(min_issue_size=config.min_issue_size)
    world = SimWorld()
    events: list[Event] = []
    dropped: dict[str, int] = {}

    cliques: dict[str, list[str]] = {}
    for spec in config.agents:
        if spec.clique_id is not None:
            cliques.setdefault(spec.clique_id, []).append(spec.agent_id)

    runtimes: list[AgentRuntime] = []
    for index, spec in enumerate(sorted(config.agents, key=lambda s: s.agent_id)):
        rt = AgentRuntime(
            spec=spec,
            index=index,
            rng=random.Random(f"{config.seed}:a:{spec.agent_id}"),
            behavior=_effective_behavior(spec, config.behavior),
        )
        if spec.clique_id is not None:
            rt.clique_peers = tuple(
                a for a in sorted(cliques[spec.clique_id]) if a != spec.agent_id
            )
        runtimes.append(rt)

    def admit(kind: str, payload: dict) -> None:
        event = ledger.make_event(state.last_seq + 1, kind, payload)
        try:
            ledger.append(state, event)
        except RuleViolation as violation:
            dropped[violation.code] = dropped.get(violation.code, 0) + 1
            return
        events.append(event)
        if kind == ledger.KIND_ARTICLE_SUBMITTED:
            aid = payload["article_id"]
            world.article_ids.append(aid)
            world.uri_of[aid] = normalize_uri(payload["canonical_uri"])
            for author in payload["authors"]:
                world.by_author.setdefault(author, []).append(aid)

    for rt in runtimes:
        admit(
            ledger.KIND_SCHOLAR_REGISTERED,
            {"scholar_id": rt.spec.agent_id, "display_name": f"Scholar {rt.spec.agent_id}"},
        )

    for round_no in range(1, config.rounds + 1):
        world.round_candidates = _rank_candidates(state, world, config.behavior.reading_window)
        batches = [agent_round(state, rt, quality, world, round_no) for rt in runtimes]
        for batch in batches:
            for kind, payload in batch:
                admit(kind, payload)

    truth = GroundTruth(
        quality=quality,
        strategies={spec.agent_id: spec.strategy for spec in config.agents},
        cliques={cid: tuple(sorted(members)) for cid, members in sorted(cliques.items())},
    )
    report = evaluate(
        events, truth, config.detector, min_issue_size=config.min_issue_size, state=state
    )
    report.dropped_intentions = dict(sorted(dropped.items()))
    return ScenarioRun(events=events, report=report, truth=truth, state=state)


# --- evaluation -------------------------------------------------------------

def _spearman(xs: list[float], ys: list[float]) -> Optional[float]:
    if len(xs) < 2 or len(set(xs)) < 2 or len(set(ys)) < 2:
        return None
    rho = spearmanr(xs, ys)[0]
    return None if math.isnan(rho) else float(rho)


def evaluate(
    events: list[Event],
    truth: GroundTruth,
    detector: DetectorParams,
    *,
    min_issue_size: int = MIN_ISSUE_SIZE,
    state: Optional[EngineState] = None,
) -> ScenarioReport:
    """Score a log against ground truth: metric fidelity and detection."""
    if state is None:
        state = ledger.replay(events, min_issue_size=min_issue_size)
    graph = metrics.curation_graph(state)

    article_ids = sorted(state.articles)
    qualities: list[float] = []
    importances: list[float] = []
    importance_of: dict[str, int] = {}
    for aid in article_ids:
        article = state.articles[aid]
        key = normalize_uri(article.canonical_uri)
        count = len(graph.item_curators.get(key, set()) - article.authors)
        importance_of[aid] = count
        qualities.append(truth.quality.quality(aid))
        importances.append(float(count))

    voted_q: list[float] = []
    voted_fraction: list[float] = []
    for aid in article_ids:
        votes = state.validity_votes.get(aid, {})
        if len(votes) >= MIN_VOTERS_FOR_FRACTION:
            reached = sum(
                1 for v in votes.values() if v.choice is VoteChoice.REACHED_STANDARDS
            )
            voted_q.append(truth.quality.quality(aid))
            voted_fraction.append(reached / len(votes))

    report_obj = anomaly_mod.anomaly_report(state, detector)
    flagged: set[str] = set()
    for group in report_obj.groups:
        flagged.update(group.members)
    for pair in report_obj.pairs:
        flagged.add(pair.a)
        flagged.add(pair.b)
    colluders = truth.colluders
    hits = len(flagged & colluders)
    precision = hits / len(flagged) if flagged else None
    recall = hits / len(colluders) if colluders else None

    counts: dict[str, int] = {}
    for event in events:
        counts[event.kind] = counts.get(event.kind, 0) + 1

    return ScenarioReport(
        spearman_quality_importance=_spearman(qualities, importances),
        spearman_quality_validity=_spearman(voted_q, voted_fraction),
        inflation_by_clique=_inflation_by_clique(state, truth, importance_of),
        detector_precision=precision,
        detector_recall=recall,
        flagged_scholars=sorted(flagged),
        event_counts=dict(sorted(counts.items())),
        dropped_intentions={},
        articles=len(article_ids),
        state_digest=report_obj.generated_from,
    )


def _inflation_by_clique(
    state: EngineState, truth: GroundTruth, importance_of: dict[str, int]
) -> dict[str, Optional[float]]:
    """Mean clique-article importance over honest articles of equal quality decile."""
    result: dict[str, Optional[float]] = {}
    if not truth.cliques:
        return result
    honest = [
        aid
        for aid in sorted(state.articles)
        if all(truth.strategies.get(a) == HONEST for a in state.articles[aid].authors)
    ]
    if len(honest) < 10:
        return {cid: None for cid in truth.cliques}
    honest_q = sorted(truth.quality.quality(aid) for aid in honest)

    def decile(q: float) -> int:
        rank = bisect.bisect_right(honest_q, q)
        return min(9, rank * 10 // len(honest_q))

    decile_imp: dict[int, list[int]] = {}
    for aid in honest:
        decile_imp.setdefault(decile(truth.quality.quality(aid)), []).append(importance_of[aid])
    decile_mean = {d: sum(v) / len(v) for d, v in decile_imp.items()}

    for cid, members in truth.cliques.items():
        member_set = set(members)
        arts = [
            aid for aid in sorted(state.articles) if state.articles[aid].authors & member_set
        ]
        usable = [
            (importance_of[aid], decile_mean[decile(truth.quality.quality(aid))])
            for aid in arts
            if decile(truth.quality.quality(aid)) in decile_mean
        ]
        if not usable:
            result[cid] = None
            continue
        mean_clique = sum(i for i, _ in usable) / len(usable)
        mean_expected = sum(e for _, e in usable) / len(usable)
        result[cid] = (mean_clique / mean_expected) if mean_expected > 0 else None
    return result
