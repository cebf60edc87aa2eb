"""Pure-Python search kernels.

Reference twin of ``_ckernels.pyx``; both must return identical results in
identical order.  Structures arrive encoded as

* ``color``: one int per element, already refined so that equal colours are a
  necessary condition for being matched;
* ``adj``: an ``n x n`` int64 matrix whose entry ``[a, b]`` is the bitmask of
  binary relations holding of ``(a, b)``.
"""

BACKEND = "python"


def iso_search(color_l, color_r, adj_l, adj_r, order, fixed, limit):
    """Enumerate colour- and adjacency-preserving bijections left -> right.

    ``order`` is the assignment order of left elements, ``fixed[u]`` forces
    ``u`` onto a right element (``-1`` = free).  Stops after ``limit``
    solutions (``limit < 0`` means no limit).  Each solution is a list
    ``m`` with ``m[u]`` the image of ``u``.
    """
    n = len(color_l)
    color_l = [int(c) for c in color_l]
    color_r = [int(c) for c in color_r]
    adj_l = [[int(x) for x in row] for row in adj_l]
    adj_r = [[int(x) for x in row] for row in adj_r]
    order = [int(u) for u in order]
    fixed = [int(v) for v in fixed]

    buckets = {}
    for v in range(n):
        buckets.setdefault(color_r[v], []).append(v)
    cands = []
    for u in order:
        if fixed[u] >= 0:
            cands.append([fixed[u]] if color_r[fixed[u]] == color_l[u] else [])
        else:
            cands.append(buckets.get(color_l[u], []))

    assign = [-1] * n
    used = [False] * n
    ptr = [0] * (n + 1)
    out = []
    depth = 0
    while depth >= 0:
        if depth == n:
            out.append(list(assign))
            if 0 <= limit <= len(out):
                return out
            depth -= 1
            continue
        u = order[depth]
        if assign[u] >= 0:
            used[assign[u]] = False
            assign[u] = -1
        cl = cands[depth]
        found = False
        i = ptr[depth]
        while i < len(cl):
            v = cl[i]
            i += 1
            if used[v] or adj_l[u][u] != adj_r[v][v]:
                continue
            row_lu, row_rv = adj_l[u], adj_r[v]
            ok = True
            for d in range(depth):
                w = order[d]
                x = assign[w]
                if row_lu[w] != row_rv[x] or adj_l[w][u] != adj_r[x][v]:
                    ok = False
                    break
            if ok:
                found = True
                break
        ptr[depth] = i
        if found:
            assign[u] = v
            used[v] = True
            depth += 1
            if depth <= n:
                ptr[depth] = 0
        else:
            ptr[depth] = 0
            depth -= 1
    return out


def ef_game(color_a, color_b, adj_a, adj_b, rounds):
    """True iff Duplicator wins the ``rounds``-round EF game on (a, b)."""
    color_a = [int(c) for c in color_a]
    color_b = [int(c) for c in color_b]
    adj_a = [[int(x) for x in row] for row in adj_a]
    adj_b = [[int(x) for x in row] for row in adj_b]
    na, nb = len(color_a), len(color_b)
    memo = {}

    def compatible(pa, pb, x, y):
        if color_a[x] != color_b[y] or adj_a[x][x] != adj_b[y][y]:
            return False
        for xp, yp in zip(pa, pb):
            if (x == xp) != (y == yp):
                return False
            if adj_a[x][xp] != adj_b[y][yp] or adj_a[xp][x] != adj_b[yp][y]:
                return False
        return True

    def wins(pa, pb, left):
        if left == 0:
            return True
        key = (frozenset(zip(pa, pb)), left)
        if key in memo:
            return memo[key]
        result = True
        for x in range(na):
            if x in pa:
                continue
            if not any(
                compatible(pa, pb, x, y) and wins(pa + (x,), pb + (y,), left - 1)
                for y in range(nb)
            ):
                result = False
                break
        if result:
            for y in range(nb):
                if y in pb:
                    continue
                if not any(
                    compatible(pa, pb, x, y) and wins(pa + (x,), pb + (y,), left - 1)
                    for x in range(na)
                ):
                    result = False
                    break
        memo[key] = result
        return result

    return wins((), (), rounds)
