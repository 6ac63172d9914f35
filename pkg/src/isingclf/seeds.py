"""Deterministic seed derivation.

Every stochastic component takes an integer seed and derives child seeds by
counter mixing, so results never depend on execution order and adding a
worker/method/split does not perturb the streams of the existing ones.
"""

import hashlib

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 step; a cheap, well-mixed 64-bit hash of an integer."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def child_seed(seed: int, index: int) -> int:
    """Seed for the ``index``-th parallel unit of work under ``seed``."""
    return (seed & _MASK64) ^ splitmix64(index)


def derive_seed(seed: int, *keys: int | str) -> int:
    """Fold an arbitrary mix of integer and string keys into ``seed``.

    String keys are hashed with blake2b so the result is stable across
    processes (unlike builtin ``hash``).
    """
    out = seed & _MASK64
    for key in keys:
        if isinstance(key, str):
            key = int.from_bytes(
                hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest(), "big"
            )
        out = splitmix64(out ^ splitmix64(key & _MASK64))
    return out
