"""Pure-Python syllable kernel.

Elements of a graph product of cyclic groups are stored as tuples of
``(generator_index, exponent)`` syllables.  A word is *reduced* when no two
syllables with the same generator can see each other across a block of
commuting syllables, and *canonical* when it is additionally the
lexicographically least shuffle of its reduced form (generators compared by
index).  Canonical words are unique per group element, so tuple equality is
element equality.

Every function takes the group data positionally: ``qs`` is a tuple of
cyclic orders (all >= 2) and ``comm`` a tuple of bitmasks, bit ``j`` of
``comm[i]`` set iff generators ``i != j`` commute.

The compiled kernel in ``_speedups.pyx`` implements the same API; this
module is the semantic reference and the import-time fallback.
"""

BACKEND = "python"


def _reduce(syls, qs, comm):
    """Merge same-generator syllables visible across commuting blocks."""
    syls = [(g, e % qs[g]) for g, e in syls if e % qs[g]]
    changed = True
    while changed:
        changed = False
        n = len(syls)
        for i in range(n):
            gi = syls[i][0]
            for j in range(i + 1, n):
                gj = syls[j][0]
                if gj == gi:
                    e = (syls[i][1] + syls[j][1]) % qs[gi]
                    del syls[j]
                    if e:
                        syls[i] = (gi, e)
                    else:
                        del syls[i]
                    changed = True
                    break
                if not (comm[gi] >> gj) & 1:
                    break
            if changed:
                break
    return syls


def _canonicalize(syls, comm):
    """Greedy least-available linearization of the dependence order."""
    rem = list(syls)
    out = []
    while rem:
        best = -1
        for k in range(len(rem)):
            gk = rem[k][0]
            ok = True
            for i in range(k):
                gi = rem[i][0]
                if gi == gk or not (comm[gi] >> gk) & 1:
                    ok = False
                    break
            if ok and (best < 0 or gk < rem[best][0]):
                best = k
        out.append(rem[best])
        del rem[best]
    return tuple(out)


def normalize(word, qs, comm):
    """Canonical form of an arbitrary syllable word."""
    return _canonicalize(_reduce(list(word), qs, comm), comm)


def multiply(a, b, qs, comm):
    return normalize(tuple(a) + tuple(b), qs, comm)


def inverse(a, qs, comm):
    return normalize([(g, qs[g] - e) for g, e in reversed(a)], qs, comm)


def strip_coset(a, tmask, qs, comm):
    """Least element of the right coset of ``a`` by the subgroup on ``tmask``.

    Repeatedly deletes right-visible syllables whose generator lies in the
    mask; removable syllables commute with everything after them, so the
    word stays reduced throughout.
    """
    syls = list(normalize(a, qs, comm))
    changed = True
    while changed:
        changed = False
        for i in range(len(syls) - 1, -1, -1):
            g = syls[i][0]
            if not (tmask >> g) & 1:
                continue
            visible = True
            for j in range(i + 1, len(syls)):
                gj = syls[j][0]
                if gj == g or not (comm[g] >> gj) & 1:
                    visible = False
                    break
            if visible:
                del syls[i]
                changed = True
                break
    return _canonicalize(syls, comm)


def support_mask(a):
    m = 0
    for g, _ in a:
        m |= 1 << g
    return m
