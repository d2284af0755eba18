"""Surface-form normalization shared by dedup, the trie, the lookup table and
the n-gram scorer: case-fold and collapse runs of whitespace."""


def tokenize(text: str) -> list[str]:
    return text.casefold().split()


def normalize(text: str) -> str:
    return " ".join(text.casefold().split())
