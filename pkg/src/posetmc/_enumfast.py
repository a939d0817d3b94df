"""Compiled cores for exhaustive enumeration of naturally labeled posets.

Every poset on [n] arises exactly once from a poset on [n-1] by choosing an
order ideal (downset) of it as the past of the new top-labeled element, so a
depth-first scan over ideal choices visits the whole sample space without
storing it. The per-depth ``req`` tables make the downset test O(1) per
candidate subset: req[S] is the union of the pasts of S's members, and S is
a downset iff req[S] is contained in S.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _ctz(x):
    """Index of the lowest set bit (x must be a power of two here)."""
    c = 0
    while x > 1:
        x >>= 1
        c += 1
    return c


@njit(cache=True, nogil=True)
def _popcount_small(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True, nogil=True)
def count_and_tally(n, h0, want_chi):
    """One streaming pass over all naturally labeled n-posets.

    Returns (total, height_counts, relation_counts, nmin_counts,
    nmax_counts, chi_counts) where chi_counts = [#chi=0, #chi=1,
    #abandoned] (only filled when want_chi).
    """
    max_r = n * (n - 1) // 2
    height_c = np.zeros(n + 1, np.int64)
    r_c = np.zeros(max_r + 1, np.int64)
    nmin_c = np.zeros(n + 1, np.int64)
    nmax_c = np.zeros(n + 1, np.int64)
    chi_c = np.zeros(3, np.int64)
    total = 0

    if n == 1:
        height_c[1] += 1
        r_c[0] += 1
        nmin_c[1] += 1
        nmax_c[1] += 1
        chi_c[1] += 1
        return 1, height_c, r_c, nmin_c, nmax_c, chi_c

    up = np.zeros(n, np.int64)
    down = np.zeros(n, np.int64)
    level = np.zeros(n, np.int64)
    lvl_mask = np.zeros(n + 3, np.int64)
    suf = np.zeros(n + 4, np.int64)

    req = np.zeros((n, 1 << (n - 1)), np.int64)
    sub = np.zeros(n, np.int64)
    r_stack = np.zeros(n, np.int64)
    h_stack = np.zeros(n, np.int64)
    mn_stack = np.zeros(n, np.int64)
    mm_stack = np.zeros(n, np.int64)

    # poset on [1]: the single element 0
    level[0] = 1
    r_cur = 0
    h_cur = 1
    mn_cur = 1  # number of minimal elements so far
    mm_cur = 1  # bitmask of maximal elements so far

    k = 1
    req[1, 0] = 0
    req[1, 1] = down[0]
    sub[1] = 0

    while True:
        if sub[k] >= (1 << k):
            if k == 1:
                break
            k -= 1
            s = down[k]
            while s:
                low = s & -s
                up[_ctz(low)] &= ~(1 << k)
                s ^= low
            down[k] = 0
            r_cur = r_stack[k]
            h_cur = h_stack[k]
            mn_cur = mn_stack[k]
            mm_cur = mm_stack[k]
            continue
        s = sub[k]
        sub[k] += 1
        if req[k, s] & ~s:
            continue
        if k == n - 1:
            # complete poset: current elements plus element n-1 with past s
            pc = _popcount_small(s)
            lvl_new = 1
            m = s
            while m:
                low = m & -m
                z = _ctz(low)
                if level[z] + 1 > lvl_new:
                    lvl_new = level[z] + 1
                m ^= low
            r_leaf = r_cur + pc
            h_leaf = h_cur if h_cur > lvl_new else lvl_new
            total += 1
            height_c[h_leaf] += 1
            r_c[r_leaf] += 1
            nmin_c[mn_cur + (1 if s == 0 else 0)] += 1
            nmax_c[_popcount_small(mm_cur & ~s) + 1] += 1
            if want_chi:
                if h_leaf > h0:
                    chi_c[2] += 1
                else:
                    for j in range(h_leaf + 3):
                        lvl_mask[j] = 0
                    for z in range(n - 1):
                        lvl_mask[level[z]] |= 1 << z
                    lvl_mask[lvl_new] |= 1 << (n - 1)
                    suf[h_leaf + 1] = 0
                    suf[h_leaf + 2] = 0
                    for j in range(h_leaf, 0, -1):
                        suf[j] = suf[j + 1] | lvl_mask[j]
                    ok = True
                    for z in range(n - 1):
                        if level[z] + 2 <= h_leaf:
                            uz = up[z]
                            if (s >> z) & 1:
                                uz |= 1 << (n - 1)
                            if suf[level[z] + 2] & ~uz:
                                ok = False
                                break
                    if ok and lvl_new + 2 <= h_leaf and suf[lvl_new + 2] != 0:
                        ok = False
                    chi_c[1 if ok else 0] += 1
            continue
        # descend: place element k with past s
        r_stack[k] = r_cur
        h_stack[k] = h_cur
        mn_stack[k] = mn_cur
        mm_stack[k] = mm_cur
        down[k] = s
        lvl = 1
        m = s
        while m:
            low = m & -m
            z = _ctz(low)
            up[z] |= 1 << k
            if level[z] + 1 > lvl:
                lvl = level[z] + 1
            m ^= low
        level[k] = lvl
        r_cur += _popcount_small(s)
        if lvl > h_cur:
            h_cur = lvl
        mn_cur += 1 if s == 0 else 0
        mm_cur = (mm_cur & ~s) | (1 << k)
        k += 1
        req[k, 0] = 0
        for s2 in range(1, 1 << k):
            low = s2 & -s2
            req[k, s2] = req[k, s2 ^ low] | down[_ctz(low)]
        sub[k] = 0

    return total, height_c, r_c, nmin_c, nmax_c, chi_c


@njit(cache=True, nogil=True)
def count_posets(n):
    total, _, _, _, _, _ = count_and_tally(n, n + 1, False)
    return total


@njit(cache=True, nogil=True)
def _ideal_count_into(n, down, memo, stack, touched):
    """Downset count of the poset given by `down` rows, by maximal-element
    splitting with a direct-address memo (reset via the touched list)."""
    full = (1 << n) - 1
    if full == 0:
        return 1
    ntouch = 0
    top = 0
    stack[top] = full
    top += 1
    while top > 0:
        cur = stack[top - 1]
        if memo[cur] >= 0:
            top -= 1
            continue
        # highest label in cur is maximal within the induced subposet
        m = 0
        t = cur
        while t > 1:
            t >>= 1
            m += 1
        a = cur & ~(1 << m)  # ideals avoiding m
        b = cur & ~(down[m] | (1 << m))  # ideals containing m (past forced in)
        ma = memo[a]
        mb = memo[b]
        if ma >= 0 and mb >= 0:
            memo[cur] = ma + mb
            touched[ntouch] = cur
            ntouch += 1
            top -= 1
        else:
            if ma < 0:
                stack[top] = a
                top += 1
            if mb < 0:
                stack[top] = b
                top += 1
    result = memo[full]
    for i in range(ntouch):
        memo[touched[i]] = -1
    return result


@njit(cache=True, nogil=True)
def ideal_count(n, down):
    """Standalone downset count for one poset (down = past bitmasks)."""
    memo = np.full(1 << n, -1, np.int64)
    memo[0] = 1
    stack = np.empty(2 << n, np.int64)
    touched = np.empty(1 << n, np.int64)
    return _ideal_count_into(n, down, memo, stack, touched)


@njit(cache=True, nogil=True)
def sum_ideal_counts(n):
    """Sum of order_ideals(P) over every naturally labeled n-poset P.

    This is the right-hand side of the extension recursion: it must equal
    the number of naturally labeled (n+1)-posets.
    """
    memo = np.full(1 << n, -1, np.int64)
    memo[0] = 1
    stack = np.empty(2 << n, np.int64)
    touched = np.empty(1 << n, np.int64)
    down = np.zeros(n, np.int64)

    if n == 1:
        return _ideal_count_into(n, down, memo, stack, touched)

    req = np.zeros((n, 1 << (n - 1)), np.int64)
    sub = np.zeros(n, np.int64)
    total = 0

    k = 1
    req[1, 0] = 0
    req[1, 1] = down[0]
    sub[1] = 0
    while True:
        if sub[k] >= (1 << k):
            if k == 1:
                break
            k -= 1
            down[k] = 0
            continue
        s = sub[k]
        sub[k] += 1
        if req[k, s] & ~s:
            continue
        down[k] = s
        if k == n - 1:
            total += _ideal_count_into(n, down, memo, stack, touched)
            down[k] = 0
            continue
        k += 1
        req[k, 0] = 0
        for s2 in range(1, 1 << k):
            low = s2 & -s2
            req[k, s2] = req[k, s2 ^ low] | down[_ctz(low)]
        sub[k] = 0
    return total


@njit(cache=True, nogil=True)
def brute_force_count(n):
    """Count transitively closed irreflexive upper-triangular matrices by
    scanning all 2^C(n,2) candidates. Independent of the ideal recursion."""
    m = n * (n - 1) // 2
    bx = np.empty(m, np.int64)
    by = np.empty(m, np.int64)
    i = 0
    for y in range(n):
        for x in range(y):
            bx[i] = x
            by[i] = y
            i += 1
    rows = np.zeros(n, np.int64)
    total = 0
    for mask in range(1 << m):
        for z in range(n):
            rows[z] = 0
        for b in range(m):
            if (mask >> b) & 1:
                rows[bx[b]] |= 1 << by[b]
        ok = True
        for x in range(n):
            cand = rows[x]
            while cand:
                low = cand & -cand
                y = _ctz(low)
                if rows[y] & ~rows[x]:
                    ok = False
                    break
                cand ^= low
            if not ok:
                break
        if ok:
            total += 1
    return total
