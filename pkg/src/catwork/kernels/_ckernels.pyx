# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled search kernels. Same contract as ``_pykernels``."""

import numpy as np
cimport numpy as cnp

BACKEND = "cython"


def iso_search(color_l, color_r, adj_l, adj_r, order, fixed, long limit):
    cdef cnp.int64_t[:] cl = np.ascontiguousarray(color_l, dtype=np.int64)
    cdef cnp.int64_t[:] cr = np.ascontiguousarray(color_r, dtype=np.int64)
    cdef cnp.int64_t[:, :] al = np.ascontiguousarray(adj_l, dtype=np.int64)
    cdef cnp.int64_t[:, :] ar = np.ascontiguousarray(adj_r, dtype=np.int64)
    cdef cnp.int64_t[:] od = np.ascontiguousarray(order, dtype=np.int64)
    cdef cnp.int64_t[:] fx = np.ascontiguousarray(fixed, dtype=np.int64)
    cdef Py_ssize_t n = cl.shape[0]

    # flattened candidate lists, one block per depth
    cdef cnp.int64_t[:] cstart = np.zeros(n + 1, dtype=np.int64)
    buckets = {}
    cdef Py_ssize_t v, u, i, d, w, x, depth
    for v in range(n):
        buckets.setdefault(cr[v], []).append(v)
    flat = []
    for d in range(n):
        u = od[d]
        cstart[d] = len(flat)
        if fx[u] >= 0:
            if cr[fx[u]] == cl[u]:
                flat.append(fx[u])
        else:
            flat.extend(buckets.get(cl[u], ()))
    cstart[n] = len(flat)
    cdef cnp.int64_t[:] cand = np.asarray(flat if flat else [0], dtype=np.int64)

    cdef cnp.int64_t[:] assign = np.full(n, -1, dtype=np.int64)
    cdef cnp.uint8_t[:] used = np.zeros(n, dtype=np.uint8)
    cdef cnp.int64_t[:] ptr = np.zeros(n + 1, dtype=np.int64)
    cdef bint found, ok
    out = []
    depth = 0
    for d in range(n + 1):
        ptr[d] = cstart[d] if d < n else 0
    while depth >= 0:
        if depth == n:
            out.append([int(assign[i]) for i in range(n)])
            if 0 <= limit <= len(out):
                return out
            depth -= 1
            continue
        u = od[depth]
        if assign[u] >= 0:
            used[assign[u]] = 0
            assign[u] = -1
        found = False
        i = ptr[depth]
        while i < cstart[depth + 1]:
            v = cand[i]
            i += 1
            if used[v] or al[u, u] != ar[v, v]:
                continue
            ok = True
            for d in range(depth):
                w = od[d]
                x = assign[w]
                if al[u, w] != ar[v, x] or al[w, u] != ar[x, v]:
                    ok = False
                    break
            if ok:
                found = True
                break
        ptr[depth] = i
        if found:
            assign[u] = v
            used[v] = 1
            depth += 1
            if depth < n:
                ptr[depth] = cstart[depth]
        else:
            ptr[depth] = cstart[depth]
            depth -= 1
    return out


cdef class _EFGame:
    cdef cnp.int64_t[:] ca
    cdef cnp.int64_t[:] cb
    cdef cnp.int64_t[:, :] aa
    cdef cnp.int64_t[:, :] ab
    cdef Py_ssize_t na, nb
    cdef dict memo
    cdef cnp.int64_t[:] pa
    cdef cnp.int64_t[:] pb

    def __init__(self, color_a, color_b, adj_a, adj_b, rounds):
        self.ca = np.ascontiguousarray(color_a, dtype=np.int64)
        self.cb = np.ascontiguousarray(color_b, dtype=np.int64)
        self.aa = np.ascontiguousarray(adj_a, dtype=np.int64).reshape(len(color_a), len(color_a))
        self.ab = np.ascontiguousarray(adj_b, dtype=np.int64).reshape(len(color_b), len(color_b))
        self.na = self.ca.shape[0]
        self.nb = self.cb.shape[0]
        self.memo = {}
        self.pa = np.zeros(rounds + 1, dtype=np.int64)
        self.pb = np.zeros(rounds + 1, dtype=np.int64)

    cdef bint compatible(self, Py_ssize_t npeb, Py_ssize_t x, Py_ssize_t y):
        cdef Py_ssize_t i, xp, yp
        if self.ca[x] != self.cb[y] or self.aa[x, x] != self.ab[y, y]:
            return False
        for i in range(npeb):
            xp = self.pa[i]
            yp = self.pb[i]
            if (x == xp) != (y == yp):
                return False
            if self.aa[x, xp] != self.ab[y, yp] or self.aa[xp, x] != self.ab[yp, y]:
                return False
        return True

    cdef bint pebbled_a(self, Py_ssize_t npeb, Py_ssize_t x):
        cdef Py_ssize_t i
        for i in range(npeb):
            if self.pa[i] == x:
                return True
        return False

    cdef bint pebbled_b(self, Py_ssize_t npeb, Py_ssize_t y):
        cdef Py_ssize_t i
        for i in range(npeb):
            if self.pb[i] == y:
                return True
        return False

    cdef bint wins(self, Py_ssize_t npeb, int left):
        cdef Py_ssize_t x, y, i
        cdef bint answered, result
        if left == 0:
            return True
        key = (frozenset([(self.pa[i], self.pb[i]) for i in range(npeb)]), left)
        cached = self.memo.get(key)
        if cached is not None:
            return cached
        result = True
        for x in range(self.na):
            if self.pebbled_a(npeb, x):
                continue
            answered = False
            for y in range(self.nb):
                if self.compatible(npeb, x, y):
                    self.pa[npeb] = x
                    self.pb[npeb] = y
                    if self.wins(npeb + 1, left - 1):
                        answered = True
                        break
            if not answered:
                result = False
                break
        if result:
            for y in range(self.nb):
                if self.pebbled_b(npeb, y):
                    continue
                answered = False
                for x in range(self.na):
                    if self.compatible(npeb, x, y):
                        self.pa[npeb] = x
                        self.pb[npeb] = y
                        if self.wins(npeb + 1, left - 1):
                            answered = True
                            break
                if not answered:
                    result = False
                    break
        self.memo[key] = result
        return result

    def run(self, int rounds):
        return bool(self.wins(0, rounds))


def ef_game(color_a, color_b, adj_a, adj_b, int rounds):
    return _EFGame(color_a, color_b, adj_a, adj_b, rounds).run(rounds)
