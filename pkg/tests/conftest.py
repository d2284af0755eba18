import hashlib
import random

import pytest

from pathlib import Path

from kgel.ingest import Document, Mention, parse_dataset, parse_kg_dir
from kgel.kg import Entity, KnowledgeGraph, Relation, Triple, build_kg

FIXTURES = Path(__file__).parent / "fixtures"
TOY_KG_DIR = FIXTURES / "kg_toy"
TOY_DATASET = FIXTURES / "dataset_toy.jsonl"


@pytest.fixture(scope="session")
def toy_kg() -> KnowledgeGraph:
    return parse_kg_dir(TOY_KG_DIR)


@pytest.fixture(scope="session")
def toy_docs() -> list[Document]:
    return parse_dataset(TOY_DATASET)


def make_documents(mentions_per_doc: list[list[tuple[str, str]]], prefix: str = "d") -> list[Document]:
    """Build documents whose text is the space-joined mention surfaces, with
    byte offsets computed from the UTF-8 encoding."""
    docs = []
    for i, pairs in enumerate(mentions_per_doc):
        text = " ".join(surface for surface, _ in pairs)
        mentions = []
        offset = 0
        for surface, gold in pairs:
            width = len(surface.encode("utf-8"))
            mentions.append(Mention(start=offset, end=offset + width, surface=surface, gold=gold))
            offset += width + 1
        docs.append(Document(doc_id=f"{prefix}{i}", text=text, mentions=tuple(mentions)))
    return docs


def build_linkbench(n_entities: int = 50) -> tuple[KnowledgeGraph, list[Document]]:
    """An unambiguous benchmark KG: every token occurs in exactly one entity,
    so exact-match linking has a provably unique winner. Mentions are the
    preferred names."""
    entities = []
    for i in range(n_entities):
        synonyms = [f"alt{i} form{i}"]
        if i % 3 == 0:
            synonyms.append(f"variant{i}")
        entities.append(
            Entity.make(
                f"C{1000 + i}",
                f"term{i}",
                synonyms,
                definition=f"benchmark concept number {i}" if i % 2 == 0 else None,
            )
        )
    relations = [Relation("r_common", "affects"), Relation("r_rare", "binds")]
    triples = [Triple(f"C{1000 + i}", "r_common", f"C{1000 + (i + 1) % n_entities}") for i in range(n_entities)]
    triples.append(Triple(f"C{1000}", "r_rare", f"C{1000 + n_entities // 2}"))
    kg = build_kg(entities, relations, triples)

    pairs = [(f"term{i}", f"C{1000 + i}") for i in range(n_entities)]
    docs = make_documents([pairs[i:i + 5] for i in range(0, n_entities, 5)], prefix="bench")
    return kg, docs


@pytest.fixture(scope="session")
def linkbench() -> tuple[KnowledgeGraph, list[Document]]:
    return build_linkbench()


class HashScorer:
    """Deterministic pseudo-random scorer: the score of (prefix, token) is a
    pure function of the pair, so any evaluation order sees the same values."""

    def __init__(self, salt: str = ""):
        self.salt = salt

    def _score(self, prefix, token) -> float:
        key = (self.salt + "\x1f" + "\x1f".join(prefix) + "\x1e" + token).encode("utf-8")
        digest = hashlib.blake2b(key, digest_size=8).digest()
        return -5.0 * int.from_bytes(digest, "big") / 2**64

    def score_next(self, prefix, candidates):
        return {token: self._score(prefix, token) for token in candidates}


def enumerate_hypotheses(surfaces: list[str], scorer, max_len: int) -> list[tuple[tuple[str, ...], float]]:
    """Independent oracle for constrained search: enumerate every registered
    surface and score it step by step, with candidate sets derived from the
    surface list itself (never from the trie under test)."""
    tokenized = sorted({tuple(s.split()) for s in surfaces})
    children: dict[tuple[str, ...], set[str]] = {}
    for tokens in tokenized:
        for i in range(len(tokens)):
            children.setdefault(tokens[:i], set()).add(tokens[i])
    results = []
    for tokens in tokenized:
        if len(tokens) > max_len:
            continue
        score = 0.0
        for i, token in enumerate(tokens):
            score += scorer.score_next(tokens[:i], children[tokens[:i]])[token]
        results.append((tokens, score))
    results.sort(key=lambda item: (-item[1], item[0]))
    return results


def random_surface_set(rng: random.Random, max_surfaces: int = 200, max_depth: int = 6) -> list[str]:
    """Random surface forms over a small token alphabet, deduplicated."""
    alphabet = [f"t{j}" for j in range(rng.randint(3, 9))]
    n = rng.randint(1, max_surfaces)
    surfaces = set()
    for _ in range(n):
        length = rng.randint(1, max_depth)
        surfaces.add(" ".join(rng.choice(alphabet) for _ in range(length)))
    return sorted(surfaces)
