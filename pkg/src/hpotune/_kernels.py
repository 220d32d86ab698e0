"""Compiled inner loops for tree growth and forest prediction."""
import numpy as np
from numba import njit

GINI = 0
ENTROPY = 1
_TIE_EPS = 1e-12


@njit(cache=True, nogil=True)
def _n_present(counts):
    k = 0
    for c in range(counts.shape[0]):
        if counts[c] > 0:
            k += 1
    return k


@njit(cache=True, nogil=True)
def grow_tree(X, y, w, order, sorted_x, n_classes, max_depth, n_sub, crit, keys, inv, klogk):
    """Breadth-first CART growth over presorted feature orders.

    ``w`` holds per-row bootstrap multiplicities (0 = out of bag). Every node
    keeps one contiguous segment per feature of its in-bag rows, sorted by
    that feature; a split stably partitions the segments, so children stay
    sorted without re-sorting. Each node considered for splitting consumes
    the next row of ``keys``: the ``n_sub`` features with the smallest keys
    form its candidate subset. Thresholds are midpoints of consecutive
    distinct in-node values; ties in weighted child impurity keep the earlier
    (feature, threshold).

    ``sorted_x[f, r]`` is ``X[order[f, r], f]``. ``inv[k] = 1/k`` and
    ``klogk[k] = k*log2(k)`` must cover the total bootstrap weight.
    """
    n, n_feat = X.shape
    cap = keys.shape[0]
    max_nodes = 2 * cap + 1
    feat = np.full(max_nodes, -1, np.int64)
    thr = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    depth = np.zeros(max_nodes, np.int64)
    counts = np.zeros((max_nodes, n_classes), np.int64)
    subsets = np.full((max_nodes, n_sub), -1, np.int64)
    seg_lo = np.zeros(max_nodes, np.int64)
    seg_hi = np.zeros(max_nodes, np.int64)

    m = 0
    total_w = 0
    for i in range(n):
        if w[i] > 0:
            m += 1
            total_w += w[i]
            counts[0, y[i]] += w[i]
    # one spare column so the branch-free fill can always write
    rows = np.empty((n_feat, m + 1), np.int64)
    xs = np.empty((n_feat, m + 1))
    for f in range(n_feat):
        k = 0
        for r in range(n):
            i = order[f, r]
            rows[f, k] = i
            xs[f, k] = sorted_x[f, r]
            k += w[i] > 0
    seg_hi[0] = m
    n_nodes = 1

    queue = np.empty(max_nodes, np.int64)
    q_head = 0
    q_tail = 0
    if max_depth > 0 and _n_present(counts[0]) > 1:
        queue[0] = 0
        q_tail = 1

    leftc = np.zeros(n_classes, np.int64)
    node_c = np.zeros(n_classes, np.int64)
    goes_left = np.zeros(n, np.int64)
    buf_rows = np.empty(m, np.int64)
    buf_xs = np.empty(m)
    taken = np.zeros(n_feat, np.bool_)
    chosen = np.zeros(n_sub, np.int64)
    attempts = 0
    while q_head < q_tail:
        nd = queue[q_head]
        q_head += 1
        lo = seg_lo[nd]
        hi = seg_hi[nd]
        total = 0
        for c in range(n_classes):
            node_c[c] = counts[nd, c]
            total += node_c[c]

        # the n_sub smallest keys, returned in ascending feature order
        taken[:] = False
        for j in range(n_sub):
            arg = -1
            for f in range(n_feat):
                if not taken[f] and (arg < 0 or keys[attempts, f] < keys[attempts, arg]):
                    arg = f
            taken[arg] = True
        attempts += 1
        j = 0
        for f in range(n_feat):
            if taken[f]:
                chosen[j] = f
                subsets[nd, j] = f
                j += 1

        best_imp = np.inf
        best_f = -1
        best_t = 0.0
        for j in range(n_sub):
            f = chosen[j]
            if n_classes == 2:
                # two-class scan with the left counts kept in registers
                t0 = node_c[0]
                t1 = node_c[1]
                l1 = 0
                nl = 0
                last = xs[f, lo]
                for r in range(lo, hi):
                    i = rows[f, r]
                    x = xs[f, r]
                    # evaluated unconditionally (cheap, branch-free); only
                    # positions after a value change are real candidates
                    nr = total - nl
                    l0 = nl - l1
                    r0 = t0 - l0
                    r1 = t1 - l1
                    if crit == GINI:
                        sq_l = float(l0 * l0 + l1 * l1)
                        sq_r = float(r0 * r0 + r1 * r1)
                        imp = (total - sq_l * inv[nl] - sq_r * inv[nr]) * inv[total]
                    else:
                        acc = klogk[nl] + klogk[nr] - klogk[l0] - klogk[l1] - klogk[r0] - klogk[r1]
                        imp = acc * inv[total]
                    if imp < best_imp - _TIE_EPS and x > last:
                        best_imp = imp
                        best_f = f
                        t = 0.5 * (last + x)
                        if t >= x:
                            t = last
                        best_t = t
                    wi = w[i]
                    l1 += wi * y[i]
                    nl += wi
                    last = x
                continue
            leftc[:] = 0
            nl = 0
            last = xs[f, lo]
            for r in range(lo, hi):
                i = rows[f, r]
                x = xs[f, r]
                if x > last:
                    # candidate between `last` and `x`
                    nr = total - nl
                    if crit == GINI:
                        sq_l = 0.0
                        sq_r = 0.0
                        for c in range(n_classes):
                            a = leftc[c]
                            b = node_c[c] - a
                            sq_l += a * a
                            sq_r += b * b
                        # n*gini = n - sum(count^2)/n
                        imp = (total - sq_l * inv[nl] - sq_r * inv[nr]) * inv[total]
                    else:
                        # n*entropy = n*log2(n) - sum(count*log2(count))
                        acc = klogk[nl] + klogk[nr]
                        for c in range(n_classes):
                            a = leftc[c]
                            acc -= klogk[a] + klogk[node_c[c] - a]
                        imp = acc * inv[total]
                    if imp < best_imp - _TIE_EPS:
                        best_imp = imp
                        best_f = f
                        t = 0.5 * (last + x)
                        if t >= x:
                            t = last
                        best_t = t
                leftc[y[i]] += w[i]
                nl += w[i]
                last = x

        if best_f < 0:
            continue
        feat[nd] = best_f
        thr[nd] = best_t
        L = n_nodes
        R = n_nodes + 1
        n_nodes += 2
        left[nd] = L
        right[nd] = R
        depth[L] = depth[nd] + 1
        depth[R] = depth[nd] + 1

        n_go_left = 0
        for r in range(lo, hi):
            i = rows[best_f, r]
            gl = xs[best_f, r] <= best_t
            goes_left[i] = 1 if gl else 0
            if gl:
                n_go_left += 1
                counts[L, y[i]] += w[i]
            else:
                counts[R, y[i]] += w[i]
        open_l = depth[L] < max_depth and _n_present(counts[L]) > 1
        open_r = depth[R] < max_depth and _n_present(counts[R]) > 1
        if open_l or open_r:
            for f in range(n_feat):
                a = lo
                b = 0
                for r in range(lo, hi):
                    # branchless stable partition: write to both sides, advance one
                    i = rows[f, r]
                    x = xs[f, r]
                    gl = goes_left[i]
                    rows[f, a] = i
                    xs[f, a] = x
                    buf_rows[b] = i
                    buf_xs[b] = x
                    a += gl
                    b += 1 - gl
                for k in range(b):
                    rows[f, a + k] = buf_rows[k]
                    xs[f, a + k] = buf_xs[k]
        seg_lo[L] = lo
        seg_hi[L] = lo + n_go_left
        seg_lo[R] = lo + n_go_left
        seg_hi[R] = hi
        if open_l:
            queue[q_tail] = L
            q_tail += 1
        if open_r:
            queue[q_tail] = R
            q_tail += 1

    label = np.zeros(n_nodes, np.int64)
    for nd in range(n_nodes):
        best = -1
        for c in range(n_classes):
            if counts[nd, c] > best:
                best = counts[nd, c]
                label[nd] = c
    return (feat[:n_nodes].copy(), thr[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), depth[:n_nodes].copy(), counts[:n_nodes].copy(),
            label, subsets[:n_nodes].copy())


@njit(cache=True, nogil=True)
def forest_votes(X, feat, thr, left, right, label, offsets, n_classes):
    n = X.shape[0]
    votes = np.zeros((n, n_classes), np.int64)
    n_trees = offsets.shape[0] - 1
    # tree-major so one tree's nodes stay in cache across all rows
    for t in range(n_trees):
        base = offsets[t]
        for i in range(n):
            nd = base
            while feat[nd] >= 0:
                if X[i, feat[nd]] <= thr[nd]:
                    nd = base + left[nd]
                else:
                    nd = base + right[nd]
            votes[i, label[nd]] += 1
    return votes


@njit(cache=True)
def score_tables(total):
    """``1/k`` and ``k*log2(k)`` for ``k = 0..total`` (zero at k = 0)."""
    inv = np.zeros(total + 1)
    klogk = np.zeros(total + 1)
    for k in range(1, total + 1):
        inv[k] = 1.0 / k
        klogk[k] = k * np.log2(k)
    return inv, klogk
