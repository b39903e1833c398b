"""Destination grounding: abstract instruction -> concrete map POI.

Two stages, both behind an adapter interface so a hosted VLM can drop in:
category proposal (instruction -> place categories to search) and destination
selection (instruction + pooled candidates -> one POI with a rationale). The
shipped reference model is a deterministic keyword-rule table, which keeps the
whole pipeline testable offline. Whatever the adapter does, this module
enforces that the selected destination is one of the offered candidates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

from .errors import IntentModelFailure, NoCandidates
from .geodesy import GeoPoint, haversine_distance
from .map_service import MapClient, PoiCandidate

POOL_RADIUS_M = 2_000.0
POOL_LIMIT_PER_CATEGORY = 10

# Candidates whose best distance is within this of each other count as tied
# and fall through to the lexicographic-id tie-break.
DISTANCE_TIE_M = 1.0


@dataclass(frozen=True)
class Instruction:
    """A user utterance plus the GPS context it was issued from."""

    text: str
    issued_at: GeoPoint

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("instruction text must be non-empty")


@dataclass(frozen=True)
class IntentSelection:
    """Adapter response for destination selection."""

    candidate_id: str
    rationale: str
    confidence: float | None = None


@dataclass(frozen=True)
class GroundedDestination:
    choice: PoiCandidate
    rationale: str
    proposed_categories: tuple[str, ...]


class IntentModel(Protocol):
    """Adapter contract for the instruction-grounding model.

    Requests carry the instruction (text + GPS context) and, for selection,
    the serialized candidate list; responses are a category list or an
    IntentSelection. Adapters may be remote and slow; callers issue at most
    one call at a time per episode.
    """

    def propose_categories(self, instruction: Instruction) -> Sequence[str]:
        ...

    def select_destination(self, instruction: Instruction, candidates: Sequence[PoiCandidate]) -> IntentSelection:
        ...


# Keyword rules, first match wins. Matching is case-insensitive substring.
_CATEGORY_RULES: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...] = (
    (("deliver", "package", "drop off"), ("building",)),
    (("take",), ("building",)),  # "take X to Y" delivery phrasing
    (("walk", "stroll"), ("park", "plaza", "riverside walkway")),
    (("shopping", "shop", "buy", "mall", "store"), ("mall", "market")),
    (("relax", "rest", "quiet"), ("park", "plaza")),
    (("eat", "coffee", "hungry", "restaurant", "cafe"), ("cafe", "restaurant")),
)
_FALLBACK_CATEGORIES = ("plaza", "park")


class RuleIntentModel:
    """Reference intent model: keyword rules + name/category/distance ranking.

    Pure function of (instruction text, candidates); ties are broken by
    category priority, then distance from the user, then lexicographic id.
    """

    def propose_categories(self, instruction: Instruction) -> list[str]:
        text = instruction.text.lower()
        for keywords, categories in _CATEGORY_RULES:
            if any(k in text for k in keywords):
                return list(categories)
        return list(_FALLBACK_CATEGORIES)

    def select_destination(self, instruction: Instruction, candidates: Sequence[PoiCandidate]) -> IntentSelection:
        text = instruction.text.lower()
        categories = [c.lower() for c in self.propose_categories(instruction)]

        # A candidate explicitly named in the instruction beats category rank.
        named = [c for c in candidates if c.name.lower() in text]
        pool = named if named else list(candidates)

        def category_rank(c: PoiCandidate) -> int:
            try:
                return categories.index(c.category.lower())
            except ValueError:
                return len(categories)

        scored = [(category_rank(c), haversine_distance(instruction.issued_at, c.location), c) for c in pool]
        best_rank, best_dist, _ = min(scored, key=lambda t: (t[0], t[1], t[2].id))
        tied = [c for rank, dist, c in scored if rank == best_rank and dist <= best_dist + DISTANCE_TIE_M]
        choice = min(tied, key=lambda c: c.id)
        dist = haversine_distance(instruction.issued_at, choice.location)
        rationale = (
            f"Selected {choice.name} ({choice.category}, {dist:.0f} m away) "
            f"as the best match for the request '{instruction.text}'."
        )
        return IntentSelection(candidate_id=choice.id, rationale=rationale, confidence=1.0)


def propose_categories(intent_model: IntentModel, instruction: Instruction) -> list[str]:
    """Ask the model for 1-5 distinct place categories for the instruction."""
    try:
        raw = list(intent_model.propose_categories(instruction))
    except Exception as exc:
        raise IntentModelFailure(f"category proposal failed: {exc}") from exc
    cleaned: list[str] = []
    for cat in raw:
        if not isinstance(cat, str) or not cat.strip():
            raise IntentModelFailure(f"model proposed a non-text category: {cat!r}")
        if cat not in cleaned:
            cleaned.append(cat)
    if not 1 <= len(cleaned) <= 5:
        raise IntentModelFailure(f"model proposed {len(cleaned)} categories, expected 1-5")
    return cleaned


def pool_candidates(
    map_client: MapClient,
    categories: Sequence[str],
    near: GeoPoint,
    radius_m: float = POOL_RADIUS_M,
    limit: int = POOL_LIMIT_PER_CATEGORY,
) -> list[PoiCandidate]:
    """Query each category in order and de-duplicate candidates by id."""
    pooled: list[PoiCandidate] = []
    seen: set[str] = set()
    for category in categories:
        for candidate in map_client.poi_search(category, near, radius_m, limit):
            if candidate.id not in seen:
                seen.add(candidate.id)
                pooled.append(candidate)
    return pooled


def ground_destination(
    intent_model: IntentModel,
    instruction: Instruction,
    candidates: Sequence[PoiCandidate],
    categories: Sequence[str] | None = None,
) -> GroundedDestination:
    """Select one destination from `candidates`, never outside them.

    Pass `categories` when the proposal was already made (saves a second
    adapter round-trip); otherwise the model is asked again.
    """
    if not candidates:
        raise NoCandidates(f"no candidates to ground '{instruction.text}' against")
    try:
        selection = intent_model.select_destination(instruction, candidates)
    except Exception as exc:
        raise IntentModelFailure(f"destination selection failed: {exc}") from exc
    by_id = {c.id: c for c in candidates}
    if selection.candidate_id not in by_id:
        raise IntentModelFailure(
            f"model selected {selection.candidate_id!r}, which is not among the {len(candidates)} offered candidates"
        )
    if not selection.rationale.strip():
        raise IntentModelFailure("model returned an empty rationale")
    if categories is None:
        categories = propose_categories(intent_model, instruction)
    return GroundedDestination(
        choice=by_id[selection.candidate_id],
        rationale=selection.rationale,
        proposed_categories=tuple(categories),
    )
