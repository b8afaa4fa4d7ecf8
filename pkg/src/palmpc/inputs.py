"""Input loading and generator families for the command line and tests."""

import numpy as np

from .strings import Text


def load_bytes(path: str, alphabet: int | None = None) -> Text:
    """Read a file as raw bytes, symbols in [0, 256) unless restricted."""
    with open(path, "rb") as fh:
        data = fh.read()
    sym = np.frombuffer(data, dtype=np.uint8).astype(np.int64)
    sigma = 256 if alphabet is None else alphabet
    if alphabet is not None and sym.size and int(sym.max()) >= alphabet:
        raise ValueError(f"input byte {int(sym.max())} outside alphabet [0, {alphabet})")
    return Text(sym, sigma)


def random_text(n: int, sigma: int, seed: int) -> Text:
    if n < 1 or sigma < 1:
        raise ValueError("need n >= 1 and sigma >= 1")
    rng = np.random.default_rng(seed)
    return Text(rng.integers(0, sigma, n).astype(np.int64), sigma)


def unary_text(n: int) -> Text:
    if n < 1:
        raise ValueError("need n >= 1")
    return Text(np.zeros(n, dtype=np.int64), 2)


def alternating_text(n: int) -> Text:
    if n < 1:
        raise ValueError("need n >= 1")
    return Text((np.arange(n) % 2).astype(np.int64), 2)


def fibonacci_text(n: int) -> Text:
    """Prefix of the infinite Fibonacci word over {0, 1}."""
    if n < 1:
        raise ValueError("need n >= 1")
    a, b = [0], [0, 1]
    while len(b) < n:
        a, b = b, b + a
    return Text(np.asarray(b[:n], dtype=np.int64), 2)


def thue_morse_text(n: int) -> Text:
    """Prefix of the Thue-Morse sequence (parity of ones in the index)."""
    if n < 1:
        raise ValueError("need n >= 1")
    idx = np.arange(n, dtype=np.uint64)
    bits = np.zeros(n, dtype=np.int64)
    while idx.any():
        bits ^= (idx & 1).astype(np.int64)
        idx >>= 1
    return Text(bits, 2)
