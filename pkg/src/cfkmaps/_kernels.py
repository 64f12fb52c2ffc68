"""Compiled hot loops for the Monte Carlo paths.

Everything here is a plain function of an explicit 64-bit seed, built on
a counter-based splitmix64 generator, so repeated calls with the same
seed reproduce the same letters no matter how a window was grown.  The
pure-Python implementations elsewhere are the reference; these kernels
exist because the rejection sampler needs billions of attempts at the
larger sizes.

Letter codes: 0=a, 1=b, 2=A, 3=B, 4=F.  Matching arrays use the partner
index for matched letters, -1 for leftover burgers, -2 for unfulfilled
orders.
"""

from __future__ import annotations

import numpy as np

try:
    import numba
    from numba import njit, prange

    numba.config.THREADING_LAYER = "workqueue"
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _fin64(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def mix64(seed, counter):
    """Decorrelated 64-bit hash of (seed, counter)."""
    return _fin64(_fin64(U64(seed) + _GOLDEN) + U64(counter) * _GOLDEN)


@njit(cache=True, inline="always")
def uniform01(seed, counter):
    """Uniform in [0, 1) addressed by (seed, counter)."""
    return (mix64(seed, counter) >> U64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def _letter_from_u(u, p):
    # thresholds: a .25 | b .50 | A .50+(1-p)/4 | B .75+p/4 | F
    if u < 0.25:
        return 0
    if u < 0.5:
        return 1
    ta = 0.5 + (1.0 - p) * 0.25
    if u < ta:
        return 2
    if u < ta + (1.0 - p) * 0.25:
        return 3
    return 4


@njit(cache=True)
def letters_window(seed, lo, hi, p):
    """Letters at indices [lo, hi); index i is addressed by counter
    2i (i >= 0) or -2i-1 (i < 0), so windows extend consistently."""
    out = np.empty(hi - lo, dtype=np.int8)
    for i in range(lo, hi):
        c = 2 * i if i >= 0 else -2 * i - 1
        out[i - lo] = _letter_from_u(uniform01(U64(seed), U64(c)), p)
    return out


@njit(cache=True)
def match_letters(letters):
    """Stack matching of a letter-code array.

    Returns partner positions (array indices, not word indices);
    -1 marks leftover burgers, -2 unfulfilled orders.
    """
    n = letters.shape[0]
    phi = np.empty(n, dtype=np.int32)
    stack_a = np.empty(n, dtype=np.int32)
    stack_b = np.empty(n, dtype=np.int32)
    na = 0
    nb = 0
    for i in range(n):
        c = letters[i]
        if c == 0:
            stack_a[na] = i
            na += 1
            phi[i] = -1
        elif c == 1:
            stack_b[nb] = i
            nb += 1
            phi[i] = -1
        else:
            j = -1
            if c == 2:
                if na > 0:
                    na -= 1
                    j = stack_a[na]
            elif c == 3:
                if nb > 0:
                    nb -= 1
                    j = stack_b[nb]
            else:
                if na > 0 and (nb == 0 or stack_a[na - 1] > stack_b[nb - 1]):
                    na -= 1
                    j = stack_a[na]
                elif nb > 0:
                    nb -= 1
                    j = stack_b[nb]
            if j < 0:
                phi[i] = -2
            else:
                phi[i] = j
                phi[j] = i
    return phi


@njit(cache=True)
def rejection_sample(seed, two_n, p, max_attempts, out):
    """Draw i.i.d. letters and accept when the reduction is empty.

    Fills ``out`` (length ``two_n``) with the accepted word and returns
    the number of attempts used, or -1 if ``max_attempts`` ran out.
    Aborts an attempt as soon as an order goes unfulfilled or the stack
    cannot be emptied by the letters that remain.
    """
    stack_a = np.empty(two_n, dtype=np.int64)
    stack_b = np.empty(two_n, dtype=np.int64)
    counter = U64(0)
    attempts = 0
    while attempts < max_attempts:
        attempts += 1
        na = 0
        nb = 0
        ok = True
        for i in range(two_n):
            u = uniform01(U64(seed), counter)
            counter += U64(1)
            c = _letter_from_u(u, p)
            out[i] = c
            if c == 0:
                stack_a[na] = i
                na += 1
            elif c == 1:
                stack_b[nb] = i
                nb += 1
            elif c == 2:
                if na == 0:
                    ok = False
                    break
                na -= 1
            elif c == 3:
                if nb == 0:
                    ok = False
                    break
                nb -= 1
            else:
                if na > 0 and (nb == 0 or stack_a[na - 1] > stack_b[nb - 1]):
                    na -= 1
                elif nb > 0:
                    nb -= 1
                else:
                    ok = False
                    break
            if na + nb > two_n - 1 - i:
                ok = False  # stack can no longer be emptied in time
                break
        if ok and na + nb == 0:
            return attempts
    return -1


@njit(cache=True, parallel=True)
def rejection_sample_batch(seed, two_n, p, count, max_attempts):
    """Parallel batch of :func:`rejection_sample`.

    Sample i draws from the counter stream of mix64(seed, i), so the
    output does not depend on thread scheduling.  Returns the letter
    matrix and the per-sample attempt counts (-1 where capped).
    """
    letters = np.empty((count, two_n), dtype=np.int8)
    attempts = np.empty(count, dtype=np.int64)
    for i in prange(count):
        sub = mix64(U64(seed), U64(i))
        attempts[i] = rejection_sample(sub, two_n, p, max_attempts, letters[i])
    return letters, attempts


@njit(cache=True)
def root_degree_samples(seed, p, n_samples, start_halfwidth, max_halfwidth):
    """Sample (N0, N0plus) pairs of the hamburger-count walk.

    For each sample a fresh bi-infinite word (its own derived seed) is
    materialized on a growing window until the walk's first hits of -1
    on both sides of 0 are resolved from in-window matches.  Returns an
    (n_samples, 2) array; rows are (-1, -1) if the cap was hit.
    """
    out = np.empty((n_samples, 2), dtype=np.int64)
    for s in range(n_samples):
        sub = mix64(U64(seed), U64(s))
        m = start_halfwidth
        n0 = -1
        n0p = -1
        while m <= max_halfwidth:
            letters = letters_window(sub, -m, m, p)
            phi = match_letters(letters)
            # X increments per position; 99 marks "undefined in window"
            inc = np.empty(2 * m, dtype=np.int8)
            for i in range(2 * m):
                c = letters[i]
                if c == 0:
                    inc[i] = 1
                elif c == 1:
                    inc[i] = 0
                else:
                    j = phi[i]
                    if j < 0:
                        inc[i] = 99
                    elif letters[j] == 0:
                        inc[i] = -1
                    else:
                        inc[i] = 0
            # positive side: find j0 = first j>0 with X_j = -1
            x = 0
            j0 = -1
            n0p_acc = 1  # X_0 = 0 counts
            for k in range(m, 2 * m):
                if inc[k] == 99:
                    break
                x += inc[k]
                if x == -1:
                    j0 = k - m + 1
                    break
                if x == 0:
                    n0p_acc += 1
            if j0 < 0:
                m *= 2
                continue
            # negative side: find i0 = last i<0 with X_i = -1
            x = 0
            i0 = 1
            n0_acc = n0p_acc
            for k in range(m - 1, -1, -1):
                if inc[k] == 99:
                    break
                x -= inc[k]
                if x == -1:
                    i0 = k - m
                    break
                if x == 0:
                    n0_acc += 1
            if i0 > 0:
                m *= 2
                continue
            n0 = n0_acc
            n0p = n0p_acc
            break
        out[s, 0] = n0
        out[s, 1] = n0p
    return out


@njit(cache=True)
def pending_indicator_samples(seed, p, n_samples):
    """Fraction of seeds whose letters at -1, 0 form a pending-root pattern
    (hamburger at -1, order at 0 that is a plain hamburger order or flexible)."""
    hits = 0
    for s in range(n_samples):
        sub = mix64(U64(seed), U64(s))
        cm1 = _letter_from_u(uniform01(sub, U64(1)), p)  # counter for index -1
        c0 = _letter_from_u(uniform01(sub, U64(0)), p)  # counter for index 0
        if cm1 == 0 and (c0 == 2 or c0 == 4):
            hits += 1
    return hits
