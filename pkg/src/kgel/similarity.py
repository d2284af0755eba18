"""String similarity: drives target-synonym selection and ambiguity resolution.

The Levenshtein kernel is the hot loop when linking whole datasets, so a
compiled implementation is preferred and the pure-Python one is the fallback;
``BACKEND`` records which is active.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from .text import normalize

if TYPE_CHECKING:
    from .kg import Entity

try:
    from ._editdist import levenshtein as _levenshtein

    BACKEND = "c"
except ImportError:  # pragma: no cover - depends on the build environment
    from ._editdist_py import levenshtein as _levenshtein

    BACKEND = "python"


def edit_distance(a: str, b: str) -> int:
    """Unit-cost Levenshtein distance between two strings, per Unicode character."""
    return _levenshtein(a, b)


def similarity(a: str, b: str, *, normalized: bool = True) -> float:
    """Similarity in [0, 1]: 1 - distance / max length.

    Equals 1.0 iff the (normalized) strings are equal; two empty strings
    count as identical. ``normalized=False`` compares raw strings.
    """
    if normalized:
        a, b = normalize(a), normalize(b)
    if not a and not b:
        return 1.0
    return 1.0 - edit_distance(a, b) / max(len(a), len(b))


def select_target_synonym(mention_surface: str, entity: "Entity") -> str:
    """The entity synonym closest to the mention; ties prefer the shorter
    synonym, then the lexicographically smaller one."""
    return min(entity.synonyms, key=lambda s: (-similarity(mention_surface, s), len(s), s))
