"""Pure-Python edit-distance kernel, used when the compiled one is absent.

Must stay observably identical to ``kgel._editdist``; the test suite compares
the two whenever both import.
"""


def levenshtein(a: str, b: str) -> int:
    """Unit-cost Levenshtein distance over Unicode characters."""
    if a == b:
        return 0
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    if lb > la:
        a, b, la, lb = b, a, lb, la
    prev = list(range(lb + 1))
    curr = [0] * (lb + 1)
    for i in range(1, la + 1):
        curr[0] = i
        ca = a[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ca == b[j - 1] else 1
            curr[j] = min(prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + cost)
        prev, curr = curr, prev
    return prev[lb]
