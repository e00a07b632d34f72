"""Pure-Python search kernels.

These are the reference implementations; ``_ckernels.pyx`` mirrors them
statement for statement (same floating-point evaluation order) so both
backends return identical estimates and operation counts.

Operation-count conventions (real multiplications/divisions):

* receive-side search: 3 per accumulated real receive dimension;
* transmit-side search: 2 per antenna for the imaginary-part interval,
  ``2 nt + 3`` per real-part interval, ``3 nt`` per examined candidate;
* tree search (SMX): 2 for the top-level interval, ``2 nt + 3`` for every
  other interval, 3 per visited node.
"""

import math
from bisect import bisect_left, bisect_right

import numpy as np

INF = math.inf


def _se_order(vals, a, b, c):
    """Indices ``a..b-1`` of sorted ``vals`` ordered by distance to ``c``."""
    out = []
    k = bisect_left(vals, c, a, b)
    left, right = k - 1, k
    while left >= a or right < b:
        if right >= b or (left >= a and c - vals[left] <= vals[right] - c):
            out.append(left)
            left -= 1
        else:
            out.append(right)
            right += 1
    return out


def _rx_one(hb, yb, sre, sim, nt, r2, ntilde):
    m = len(sre)
    nr2 = len(yb)
    best = INF
    best_ant = best_sym = -1
    ops = 0
    for ell in range(nt):
        col_re = [row[ell] for row in hb]
        col_im = [row[ell + nt] for row in hb]
        for s in range(m):
            re, im = sre[s], sim[s]
            acc = 0.0
            n = 0
            for r in range(nr2):
                t = yb[r] - col_re[r] * re - col_im[r] * im
                acc += t * t
                n += 1
                if acc > r2:
                    break
            ops += 3 * n
            ntilde[ell * m + s] += n
            if acc <= r2:
                if acc < best:
                    best = acc
                    best_ant, best_sym = ell, s
                r2 = acc
    return best_ant, best_sym, best, ops


def _tx_one(d, z, r2, im_lv, gs, gl, gre, gsym, nt, m, update, inside):
    n2 = 2 * nt
    tail = [0.0] * (n2 + 1)
    for i in range(n2 - 1, nt - 1, -1):
        tail[i] = tail[i + 1] + z[i] * z[i]
    best = INF
    best_ant = best_sym = -1
    ops = examined = n19 = 0
    for ell in range(nt):
        a = ell + nt
        rad = math.sqrt(r2)
        daa = d[a][a]
        lo = (z[a] - rad) / daa
        hi = (z[a] + rad) / daa
        ops += 2
        ia = bisect_left(im_lv, lo)
        ib = bisect_right(im_lv, hi)
        if ia >= ib:
            continue
        for k in _se_order(im_lv, ia, ib, 0.5 * (lo + hi)):
            im = im_lv[k]
            s = tail[a + 1]
            for v in range(nt, a + 1):
                t = z[v] - d[v][a] * im
                s += t * t
            n19 += 1
            ops += n2 + 3
            rp2 = r2 - s
            if rp2 < 0.0:
                continue
            zr = z[ell] - d[ell][a] * im
            rp = math.sqrt(rp2)
            dll = d[ell][ell]
            rlo = (zr - rp) / dll
            rhi = (zr + rp) / dll
            st = gs[k]
            en = st + gl[k]
            ja = bisect_left(gre, rlo, st, en)
            jb = bisect_right(gre, rhi, st, en)
            if ja >= jb:
                continue
            for j in _se_order(gre, ja, jb, 0.5 * (rlo + rhi)):
                re = gre[j]
                examined += 1
                ops += 3 * nt
                q = s
                for v in range(nt):
                    t = z[v] - d[v][ell] * re - d[v][a] * im
                    q += t * t
                if q <= r2:
                    sym = gsym[j]
                    inside[ell * m + sym] = 1
                    if q < best:
                        best = q
                        best_ant, best_sym = ell, sym
                    if update:
                        r2 = q
    return best_ant, best_sym, best, ops, examined, n19


def _tree_one(d, z, r2, im_lv, gs, gl, gre, gsym, nt, out):
    n2 = 2 * nt
    top = n2 - 1
    order = [None] * n2
    pos = [0] * n2
    partial = [0.0] * n2
    zc = [0.0] * n2
    x = [0.0] * n2
    kidx = [0] * n2
    best = INF
    best_k = None
    ops = nodes = 0

    def interval(i):
        # centre and admissible index range for level i
        zi = z[i]
        row = d[i]
        for j in range(i + 1, n2):
            zi -= row[j] * x[j]
        zc[i] = zi
        rem = r2 - partial[i]
        if rem < 0.0:
            order[i] = []
            pos[i] = 0
            return
        rad = math.sqrt(rem)
        lo = (zi - rad) / row[i]
        hi = (zi + rad) / row[i]
        if i >= nt:
            vals, a, b = im_lv, 0, len(im_lv)
        else:
            k = kidx[i + nt]
            vals, a, b = gre, gs[k], gs[k] + gl[k]
        ia = bisect_left(vals, lo, a, b)
        ib = bisect_right(vals, hi, a, b)
        order[i] = _se_order(vals, ia, ib, 0.5 * (lo + hi)) if ia < ib else []
        pos[i] = 0

    i = top
    interval(i)
    ops += 2
    while True:
        if pos[i] >= len(order[i]):
            i += 1
            if i > top:
                break
            continue
        idx = order[i][pos[i]]
        pos[i] += 1
        v = im_lv[idx] if i >= nt else gre[idx]
        t = zc[i] - d[i][i] * v
        dist = partial[i] + t * t
        ops += 3
        nodes += 1
        if dist > r2:
            pos[i] = len(order[i])
            continue
        x[i] = v
        kidx[i] = idx
        if i == 0:
            if dist < best:
                best = dist
                best_k = kidx[:nt]
            r2 = dist
        else:
            i -= 1
            partial[i] = dist
            interval(i)
            ops += n2 + 3
    if best_k is not None:
        for ell in range(nt):
            out[ell] = gsym[best_k[ell]]
    return best, ops, nodes


def sm_rx_batch(hbar, ybar, sym_re, sym_im, nt, r2, ntilde):
    b = hbar.shape[0]
    ant = np.full(b, -1, dtype=np.int64)
    sym = np.full(b, -1, dtype=np.int64)
    ops = np.zeros(b, dtype=np.int64)
    restarts = np.zeros(b, dtype=np.int64)
    metric = np.full(b, INF)
    sre = sym_re.tolist()
    sim = sym_im.tolist()
    for t in range(b):
        hb = hbar[t].tolist()
        yb = ybar[t].tolist()
        rad = float(r2[t])
        nt_row = [0] * ntilde.shape[1]
        while True:
            la, ls, best, n = _rx_one(hb, yb, sre, sim, nt, rad, nt_row)
            ops[t] += n
            if la >= 0:
                break
            restarts[t] += 1
            rad *= 4.0
        ntilde[t] += nt_row
        ant[t], sym[t], metric[t] = la, ls, best
    return ant, sym, ops, restarts, metric


def sm_tx_batch(d, z, r2, im_lv, gs, gl, gre, gsym, nt, update, restart, inside):
    b = d.shape[0]
    m = inside.shape[1] // nt
    ant = np.full(b, -1, dtype=np.int64)
    sym = np.full(b, -1, dtype=np.int64)
    ops = np.zeros(b, dtype=np.int64)
    examined = np.zeros(b, dtype=np.int64)
    n19 = np.zeros(b, dtype=np.int64)
    restarts = np.zeros(b, dtype=np.int64)
    metric = np.full(b, INF)
    tabs = (im_lv.tolist(), gs.tolist(), gl.tolist(), gre.tolist(), gsym.tolist())
    for t in range(b):
        dt = d[t].tolist()
        zt = z[t].tolist()
        rad = float(r2[t])
        while True:
            flags = [0] * (nt * m)
            la, ls, best, n, ex, c19 = _tx_one(dt, zt, rad, *tabs, nt, m, update, flags)
            ops[t] += n
            examined[t] += ex
            n19[t] += c19
            if la >= 0 or not restart:
                break
            restarts[t] += 1
            rad *= 4.0
        inside[t] = flags
        ant[t], sym[t], metric[t] = la, ls, best
    return ant, sym, ops, examined, n19, restarts, metric


def tree_batch(d, z, r2, im_lv, gs, gl, gre, gsym, nt, out):
    b = d.shape[0]
    ops = np.zeros(b, dtype=np.int64)
    nodes = np.zeros(b, dtype=np.int64)
    restarts = np.zeros(b, dtype=np.int64)
    metric = np.full(b, INF)
    tabs = (im_lv.tolist(), gs.tolist(), gl.tolist(), gre.tolist(), gsym.tolist())
    for t in range(b):
        dt = d[t].tolist()
        zt = z[t].tolist()
        rad = float(r2[t])
        row = [-1] * nt
        while True:
            best, n, nd = _tree_one(dt, zt, rad, *tabs, nt, row)
            ops[t] += n
            nodes[t] += nd
            if best < INF:
                break
            restarts[t] += 1
            rad *= 4.0
        out[t] = row
        metric[t] = best
    return ops, nodes, restarts, metric
