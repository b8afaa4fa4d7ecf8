"""Hot numeric kernels, JIT-compiled with numba when available.

Set the environment variable ``PALMPC_NO_NUMBA=1`` to force the pure-Python
fallback path (same functions, no compilation). ``benchmarks/jit_vs_fallback.py``
compares the two.

All fingerprint arithmetic is carried out modulo the Mersenne prime 2**61 - 1
in signed 64-bit values; multiplication goes through :func:`mulmod61`, which is
the only operation whose intermediates would not fit in int64.
"""

import os

import numpy as np

M61 = (1 << 61) - 1

_DISABLE = os.environ.get("PALMPC_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLE:
        raise ImportError
    from numba import njit as _numba_njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False


def njit(*args, **kwargs):
    """numba.njit when enabled, identity decorator otherwise."""
    if not NUMBA_ENABLED:
        if args and callable(args[0]):
            return args[0]
        return lambda func: func
    if args and callable(args[0]):
        return _numba_njit(cache=True)(args[0])
    kwargs.setdefault("cache", True)
    return _numba_njit(*args, **kwargs)


if NUMBA_ENABLED:
    # uint64 limb constants; mixing uint64 with signed literals inside numba
    # promotes to float64, so every operand is pre-cast once here.
    _U32 = np.uint64(32)
    _U29 = np.uint64(29)
    _U61 = np.uint64(61)
    _MASK32 = np.uint64(0xFFFFFFFF)
    _MASK29 = np.uint64((1 << 29) - 1)
    _M61_U = np.uint64(M61)

    @_numba_njit(cache=True)
    def mulmod61(a, b):
        """(a * b) mod (2**61 - 1) for 0 <= a, b < 2**61, without int128.

        Splits into 32-bit limbs; every intermediate stays below 2**64.
        """
        au = np.uint64(a)
        bu = np.uint64(b)
        ah = au >> _U32
        al = au & _MASK32
        bh = bu >> _U32
        bl = bu & _MASK32
        hi = ah * bh                # < 2**58
        mid = ah * bl + al * bh     # < 2**62
        lo = al * bl                # < 2**64
        # a*b = hi*2**64 + mid*2**32 + lo, and 2**61 == 1 (mod M61)
        acc = (hi << np.uint64(3))                 # hi * 8
        acc += mid >> _U29                         # mid_hi * 2**61 -> mid_hi
        acc += (mid & _MASK29) << _U32             # < 2**61
        acc += lo >> _U61
        acc += lo & _M61_U
        res = (acc & _M61_U) + (acc >> _U61)
        if res >= _M61_U:
            res -= _M61_U
        return np.int64(res)

else:

    def mulmod61(a, b):
        return (int(a) * int(b)) % M61


@njit
def manacher_tables(sym):
    """All maximal palindrome lengths of ``sym``, odd and even centers.

    Returns (odd, even, ops): odd[c] is the length of the longest palindrome
    centered at position c (always odd, >= 1); even[m] the length of the
    longest palindrome centered between positions m and m+1 (even, >= 0).
    Linear time; no sentinel transform, so indices equal text positions.
    """
    n = sym.size
    odd = np.empty(n, np.int64)
    even = np.empty(max(n - 1, 0), np.int64)
    ops = np.int64(0)

    d1 = np.empty(n, np.int64)
    left = 0
    right = -1
    for i in range(n):
        if i > right:
            k = 1
        else:
            k = min(d1[left + right - i], right - i + 1)
        while i - k >= 0 and i + k < n and sym[i - k] == sym[i + k]:
            k += 1
            ops += 1
        d1[i] = k
        ops += 2
        if i + k - 1 > right:
            left = i - k + 1
            right = i + k - 1
        odd[i] = 2 * k - 1

    d2 = np.empty(n, np.int64)
    left = 0
    right = -1
    for i in range(n):
        if i > right:
            k = 0
        else:
            k = min(d2[left + right - i + 1], right - i + 1)
        while i - k - 1 >= 0 and i + k < n and sym[i - k - 1] == sym[i + k]:
            k += 1
            ops += 1
        d2[i] = k
        ops += 2
        if i + k - 1 > right:
            left = i - k
            right = i + k - 1
    for m in range(n - 1):
        even[m] = 2 * d2[m + 1]
    return odd, even, ops


@njit
def kmp_smallest_period(sym):
    """Smallest period of a nonempty symbol array, via the prefix function."""
    n = sym.size
    pi = np.zeros(n, np.int64)
    ops = np.int64(0)
    for i in range(1, n):
        j = pi[i - 1]
        while j > 0 and sym[i] != sym[j]:
            j = pi[j - 1]
            ops += 1
        if sym[i] == sym[j]:
            j += 1
        pi[i] = j
        ops += 2
    return n - pi[n - 1], ops


@njit
def lcp_doubled(base, p1, p2):
    """Longest common prefix of two suffixes of base . reverse(base).

    Positions index the logical doubled string of length 2n; position k >= n
    reads base[2n - 1 - k]. Literal symbol-by-symbol comparison.
    """
    n = base.size
    total = 2 * n
    length = np.int64(0)
    a = p1
    b = p2
    while a + length < total and b + length < total:
        pa = a + length
        pb = b + length
        sa = base[pa] if pa < n else base[total - 1 - pa]
        sb = base[pb] if pb < n else base[total - 1 - pb]
        if sa != sb:
            break
        length += 1
    return length


@njit
def fragment_fp_scan(letters, span, width, x, x_pow_w, out):
    """Sliding-window fingerprints over ``letters`` for one hash layer.

    out[j] = fingerprint of letters[j : min(j + width, len(letters))] for
    j in [0, span). The buffer may extend up to width - 1 symbols past the
    span so interior windows are full length. Single right-to-left pass,
    two modular multiplications per position.
    """
    total = letters.size
    val = np.int64(0)
    ops = np.int64(0)
    for j in range(total - 1, -1, -1):
        val = (letters[j] + mulmod61(x, val)) % M61
        if j + width < total:
            drop = mulmod61(x_pow_w, letters[j + width])
            val = (val + M61 - drop) % M61
        if j < span:
            out[j] = val
        ops += 2
    return ops


@njit
def prefix_fp_scan(letters, x, out):
    """Prefix fingerprints of one hash layer: out[j] = fp(letters[0..j])."""
    n = letters.size
    val = np.int64(0)
    xp = np.int64(1)
    ops = np.int64(0)
    for j in range(n):
        val = (val + mulmod61(xp, letters[j])) % M61
        xp = mulmod61(xp, x)
        out[j] = val
        ops += 2
    return ops


@njit
def poly_fp(letters, x):
    """Fingerprint value of a whole symbol array for one hash layer."""
    val = np.int64(0)
    xp = np.int64(1)
    for j in range(letters.size):
        val = (val + mulmod61(xp, letters[j])) % M61
        xp = mulmod61(xp, x)
    return val


@njit
def first_unequal_run(eq_flags):
    """Length of the leading all-true run, and whether any later flag is true.

    Used by the in-window refinement scan: a true flag after the first false
    one contradicts prefix monotonicity and indicates a hash collision.
    """
    n = eq_flags.size
    run = np.int64(0)
    while run < n and eq_flags[run]:
        run += 1
    tainted = False
    for j in range(run + 1, n):
        if eq_flags[j]:
            tainted = True
            break
    return run, tainted
