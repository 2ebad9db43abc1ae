# cython: boundscheck=False, wraparound=False
"""Compiled syllable kernel.  Same API and semantics as _kernel_py."""

from libc.stdlib cimport malloc, free

BACKEND = "c"


cdef int _reduce_arrays(int* gs, int* es, int n, const int* qs, const unsigned long long* comm) noexcept:
    """In-place visible-merge reduction; returns the new length."""
    cdef int i, j, k, gi, gj, e
    cdef bint changed = True
    while changed:
        changed = False
        i = 0
        while i < n and not changed:
            gi = gs[i]
            j = i + 1
            while j < n:
                gj = gs[j]
                if gj == gi:
                    e = (es[i] + es[j]) % qs[gi]
                    for k in range(j, n - 1):
                        gs[k] = gs[k + 1]
                        es[k] = es[k + 1]
                    n -= 1
                    if e:
                        es[i] = e
                    else:
                        for k in range(i, n - 1):
                            gs[k] = gs[k + 1]
                            es[k] = es[k + 1]
                        n -= 1
                    changed = True
                    break
                if not (comm[gi] >> gj) & 1:
                    break
                j += 1
            i += 1
    return n


cdef tuple _canonical_tuple(int* gs, int* es, int n, const unsigned long long* comm):
    cdef int k, i, best, gk
    cdef bint ok
    out = []
    while n > 0:
        best = -1
        for k in range(n):
            gk = gs[k]
            ok = True
            for i in range(k):
                if gs[i] == gk or not (comm[gs[i]] >> gk) & 1:
                    ok = False
                    break
            if ok and (best < 0 or gk < gs[best]):
                best = k
        out.append((gs[best], es[best]))
        for i in range(best, n - 1):
            gs[i] = gs[i + 1]
            es[i] = es[i + 1]
        n -= 1
    return tuple(out)


cdef class _Buf:
    cdef int* gs
    cdef int* es
    cdef int* qs
    cdef unsigned long long* comm
    cdef int cap
    cdef int ngen

    def __cinit__(self, int cap, int ngen):
        self.gs = <int*> malloc(cap * sizeof(int))
        self.es = <int*> malloc(cap * sizeof(int))
        self.qs = <int*> malloc(ngen * sizeof(int))
        self.comm = <unsigned long long*> malloc(ngen * sizeof(unsigned long long))
        self.cap = cap
        self.ngen = ngen

    def __dealloc__(self):
        free(self.gs)
        free(self.es)
        free(self.qs)
        free(self.comm)


cdef _Buf _load(word, qs, comm, int extra):
    cdef int n = len(word)
    cdef int ngen = len(qs)
    cdef _Buf buf = _Buf(n + extra + 1, ngen)
    cdef int i = 0
    for g, e in word:
        buf.gs[i] = g
        buf.es[i] = e % qs[g]
        i += 1
    for i in range(ngen):
        buf.qs[i] = qs[i]
        buf.comm[i] = comm[i]
    return buf


cdef int _drop_trivial(int* gs, int* es, int n) noexcept:
    cdef int i = 0, k
    while i < n:
        if es[i] == 0:
            for k in range(i, n - 1):
                gs[k] = gs[k + 1]
                es[k] = es[k + 1]
            n -= 1
        else:
            i += 1
    return n


def normalize(word, qs, comm):
    cdef _Buf buf = _load(word, qs, comm, 0)
    cdef int n = _drop_trivial(buf.gs, buf.es, len(word))
    n = _reduce_arrays(buf.gs, buf.es, n, buf.qs, buf.comm)
    return _canonical_tuple(buf.gs, buf.es, n, buf.comm)


def multiply(a, b, qs, comm):
    return normalize(tuple(a) + tuple(b), qs, comm)


def inverse(a, qs, comm):
    return normalize([(g, qs[g] - e) for g, e in reversed(a)], qs, comm)


def strip_coset(a, tmask, qs, comm):
    cdef _Buf buf
    cdef int n, i, j, g
    cdef bint changed, visible
    cdef unsigned long long mask = tmask
    norm = normalize(a, qs, comm)
    buf = _load(norm, qs, comm, 0)
    n = len(norm)
    changed = True
    while changed:
        changed = False
        for i in range(n - 1, -1, -1):
            g = buf.gs[i]
            if not (mask >> g) & 1:
                continue
            visible = True
            for j in range(i + 1, n):
                if buf.gs[j] == g or not (buf.comm[g] >> buf.gs[j]) & 1:
                    visible = False
                    break
            if visible:
                for j in range(i, n - 1):
                    buf.gs[j] = buf.gs[j + 1]
                    buf.es[j] = buf.es[j + 1]
                n -= 1
                changed = True
                break
    return _canonical_tuple(buf.gs, buf.es, n, buf.comm)


def support_mask(a):
    cdef unsigned long long m = 0
    for g, _ in a:
        m |= 1ULL << <int> g
    return m
