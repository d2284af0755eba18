"""In-memory knowledge graph: entities with synonyms and definitions, labelled
relations, directed triples, plus the derived indexes the rest of the pipeline
relies on (per-entity outgoing triples, global per-relation frequencies).

Graphs are immutable once built; share them freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (
    DanglingEntityError,
    DanglingRelationError,
    DuplicateEntityError,
    DuplicateRelationError,
)
from .text import normalize

# Entity ids are plain strings (e.g. UMLS CUIs): non-empty, tab- and
# newline-free so they stay TSV-safe.
EntityId = str


def _check_id(value: str, what: str) -> None:
    if not isinstance(value, str) or not value:
        raise ValueError(f"{what} must be a non-empty string")
    if "\t" in value or "\n" in value or "\r" in value:
        raise ValueError(f"{what} {value!r} contains tab or newline characters")


def _check_surface(value: str, what: str) -> None:
    _check_id(value, what)


@dataclass(frozen=True)
class Entity:
    """A concept with its surface forms.

    ``synonyms[0]`` is always the preferred name; the list is free of
    duplicates under :func:`kgel.text.normalize`, original casing retained.
    """

    id: EntityId
    preferred_name: str
    synonyms: tuple[str, ...]
    definition: str | None = None

    def __post_init__(self):
        _check_id(self.id, "entity id")
        _check_surface(self.preferred_name, "preferred name")
        if not self.synonyms or self.synonyms[0] != self.preferred_name:
            raise ValueError(f"entity {self.id}: synonyms[0] must equal the preferred name")
        seen = set()
        for syn in self.synonyms:
            _check_surface(syn, f"synonym of {self.id}")
            key = normalize(syn)
            if key in seen:
                raise ValueError(f"entity {self.id}: duplicate synonym {syn!r} after normalization")
            seen.add(key)
        if self.definition is not None and "\n" in self.definition:
            raise ValueError(f"entity {self.id}: definition contains a newline")

    @classmethod
    def make(
        cls,
        id: EntityId,
        preferred_name: str,
        synonyms: Iterable[str] = (),
        definition: str | None = None,
    ) -> "Entity":
        """Build an entity, putting the preferred name first and dropping
        synonyms that are duplicates after normalization (first wins)."""
        ordered = [preferred_name]
        seen = {normalize(preferred_name)}
        for syn in synonyms:
            key = normalize(syn)
            if key in seen:
                continue
            seen.add(key)
            ordered.append(syn)
        return cls(
            id=id,
            preferred_name=preferred_name,
            synonyms=tuple(ordered),
            definition=definition or None,
        )


@dataclass(frozen=True)
class Relation:
    id: str
    label: str

    def __post_init__(self):
        _check_id(self.id, "relation id")
        _check_surface(self.label, "relation label")


@dataclass(frozen=True)
class Triple:
    """Directed edge: head --relation--> tail."""

    head: EntityId
    relation: str
    tail: EntityId

    def __post_init__(self):
        _check_id(self.head, "triple head")
        _check_id(self.relation, "triple relation")
        _check_id(self.tail, "triple tail")


@dataclass(frozen=True)
class KnowledgeGraph:
    entities: Mapping[EntityId, Entity]
    relations: Mapping[str, Relation]
    triples: tuple[Triple, ...]
    outgoing: Mapping[EntityId, tuple[Triple, ...]]
    relation_freq: Mapping[str, int]

    def out_triples(self, entity_id: EntityId) -> tuple[Triple, ...]:
        return self.outgoing.get(entity_id, ())


def build_kg(
    entities: Iterable[Entity],
    relations: Iterable[Relation],
    triples: Iterable[Triple],
) -> KnowledgeGraph:
    """Validate the parts and assemble a graph with its derived indexes.

    Rejects duplicate entity/relation ids and triples whose endpoints or
    relation do not resolve. Self-loops are allowed.
    """
    entity_map: dict[str, Entity] = {}
    for entity in entities:
        if entity.id in entity_map:
            raise DuplicateEntityError(f"duplicate entity id {entity.id!r}")
        entity_map[entity.id] = entity

    relation_map: dict[str, Relation] = {}
    for relation in relations:
        if relation.id in relation_map:
            raise DuplicateRelationError(f"duplicate relation id {relation.id!r}")
        relation_map[relation.id] = relation

    triple_list: list[Triple] = []
    outgoing: dict[str, list[Triple]] = {}
    freq = {rid: 0 for rid in relation_map}
    for triple in triples:
        if triple.head not in entity_map:
            raise DanglingEntityError(f"triple {triple} references unknown entity {triple.head!r}")
        if triple.tail not in entity_map:
            raise DanglingEntityError(f"triple {triple} references unknown entity {triple.tail!r}")
        if triple.relation not in relation_map:
            raise DanglingRelationError(
                f"triple {triple} references unknown relation {triple.relation!r}"
            )
        triple_list.append(triple)
        outgoing.setdefault(triple.head, []).append(triple)
        freq[triple.relation] += 1

    return KnowledgeGraph(
        entities=entity_map,
        relations=relation_map,
        triples=tuple(triple_list),
        outgoing={eid: tuple(ts) for eid, ts in outgoing.items()},
        relation_freq=freq,
    )


@dataclass(frozen=True)
class StatsReport:
    concepts: int
    with_definitions: int
    with_multiple_synonyms: int
    with_triples: int
    mean_triples: float
    relation_freq: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "concepts": self.concepts,
            "with_definitions": self.with_definitions,
            "with_multiple_synonyms": self.with_multiple_synonyms,
            "with_triples": self.with_triples,
            "mean_triples": self.mean_triples,
            "relation_freq": self.relation_freq,
        }


def kg_stats(kg: KnowledgeGraph) -> StatsReport:
    """Concept counts and connectivity. "Connected" means the entity has at
    least one outgoing triple; the mean is over connected concepts only."""
    degrees = [len(ts) for ts in kg.outgoing.values() if ts]
    return StatsReport(
        concepts=len(kg.entities),
        with_definitions=sum(1 for e in kg.entities.values() if e.definition),
        with_multiple_synonyms=sum(1 for e in kg.entities.values() if len(e.synonyms) >= 2),
        with_triples=len(degrees),
        mean_triples=sum(degrees) / len(degrees) if degrees else 0.0,
        relation_freq=dict(sorted(kg.relation_freq.items())),
    )
