"""Switching sequences within one filter window.

A sequence ``s`` of length ``d`` has ``s[0] = 1`` and ``s[n] = 1`` exactly
when a new, independent network is drawn at step ``n + 1``.  Sequences are
plain tuples of ints.
"""

from __future__ import annotations

import itertools

import numpy as np

__all__ = [
    "MAX_WINDOW",
    "enumerate_sequences",
    "num_networks",
    "sequence_probability",
    "composition_of",
    "partial_count",
    "partial_counts",
    "sample_sequence",
    "sequence_to_bits",
    "sequence_from_bits",
]

MAX_WINDOW = 20


def _check_d(d):
    if d < 1:
        raise ValueError(f"window length must be >= 1, got {d}")
    if d > MAX_WINDOW:
        raise ValueError(f"window length {d} exceeds the maximum of {MAX_WINDOW}")


def _validate(s):
    s = tuple(int(b) for b in s)
    if not s or s[0] != 1 or any(b not in (0, 1) for b in s):
        raise ValueError(f"invalid switching sequence {s!r}")
    return s


def enumerate_sequences(d):
    """All ``2**(d-1)`` sequences in lexicographic order."""
    _check_d(d)
    return [(1,) + tail for tail in itertools.product((0, 1), repeat=d - 1)]


def num_networks(s):
    return sum(_validate(s))


def sequence_probability(s, p_sw):
    s = _validate(s)
    if not 0.0 <= p_sw <= 1.0:
        raise ValueError(f"p_sw must lie in [0, 1], got {p_sw}")
    switches = sum(s) - 1
    stays = len(s) - 1 - switches
    # Python defines 0.0 ** 0 == 1.0
    return p_sw ** switches * (1.0 - p_sw) ** stays


def composition_of(s):
    """Run lengths of each network's usage, e.g. ``(1,0,1,0) -> (2, 2)``."""
    s = _validate(s)
    starts = [n for n, b in enumerate(s) if b] + [len(s)]
    return tuple(b - a for a, b in zip(starts[:-1], starts[1:]))


def partial_count(s, m, n):
    """Steps network ``m`` (1-based) has been used up to and including step ``n``."""
    parts = composition_of(s)
    if not 1 <= m <= len(parts):
        raise IndexError(f"network index {m} outside 1..{len(parts)}")
    if not 0 <= n <= len(s):
        raise IndexError(f"iteration index {n} outside 0..{len(s)}")
    start = sum(parts[:m - 1])
    if n < start:
        return 0
    if n > start + parts[m - 1]:
        return parts[m - 1]
    return n - start


def partial_counts(s):
    """Table ``C[m, n] = partial_count(s, m + 1, n)`` for all networks and
    ``n = 0..d``."""
    parts = np.array(composition_of(s))
    starts = np.concatenate([[0], np.cumsum(parts)[:-1]])
    n = np.arange(len(s) + 1)
    return np.clip(n[None, :] - starts[:, None], 0, parts[:, None])


def sample_sequence(d, p_sw, rng):
    _check_d(d)
    if not 0.0 <= p_sw <= 1.0:
        raise ValueError(f"p_sw must lie in [0, 1], got {p_sw}")
    tail = rng.random(d - 1) < p_sw
    return (1,) + tuple(int(b) for b in tail)


def sequence_to_bits(s):
    return "".join(str(b) for b in _validate(s))


def sequence_from_bits(bits):
    return _validate(int(c) for c in bits.strip())
