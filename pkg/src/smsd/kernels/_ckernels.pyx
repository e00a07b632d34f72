# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled search kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


cdef inline Py_ssize_t _bl(const double[::1] v, double x, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if v[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _br(const double[::1] v, double x, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if x < v[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


cdef Py_ssize_t _se_order(const double[::1] v, Py_ssize_t a, Py_ssize_t b, double c,
                          Py_ssize_t* out) noexcept nogil:
    cdef Py_ssize_t k = _bl(v, c, a, b)
    cdef Py_ssize_t left = k - 1, right = k, n = 0
    while left >= a or right < b:
        if right >= b or (left >= a and c - v[left] <= v[right] - c):
            out[n] = left
            left -= 1
        else:
            out[n] = right
            right += 1
        n += 1
    return n


cdef long _rx_one(const double[:, ::1] hb, const double[::1] yb, const double[::1] sre,
                  const double[::1] sim, Py_ssize_t nt, double r2, long long[::1] ntilde,
                  Py_ssize_t* best_ant, Py_ssize_t* best_sym, double* best_out) noexcept nogil:
    cdef Py_ssize_t m = sre.shape[0], nr2 = yb.shape[0]
    cdef Py_ssize_t ell, s, r, n
    cdef double best = INFINITY, acc, t, re, im
    cdef long ops = 0
    best_ant[0] = -1
    best_sym[0] = -1
    for ell in range(nt):
        for s in range(m):
            re = sre[s]
            im = sim[s]
            acc = 0.0
            n = 0
            for r in range(nr2):
                t = yb[r] - hb[r, ell] * re - hb[r, ell + nt] * im
                acc += t * t
                n += 1
                if acc > r2:
                    break
            ops += 3 * n
            ntilde[ell * m + s] += n
            if acc <= r2:
                if acc < best:
                    best = acc
                    best_ant[0] = ell
                    best_sym[0] = s
                r2 = acc
    best_out[0] = best
    return ops


def sm_rx_batch(const double[:, :, ::1] hbar, const double[:, ::1] ybar,
                const double[::1] sym_re, const double[::1] sym_im, Py_ssize_t nt,
                const double[::1] r2, long long[:, ::1] ntilde):
    cdef Py_ssize_t b = hbar.shape[0], t, la, ls
    ant_a = np.full(b, -1, dtype=np.int64)
    sym_a = np.full(b, -1, dtype=np.int64)
    ops_a = np.zeros(b, dtype=np.int64)
    rst_a = np.zeros(b, dtype=np.int64)
    met_a = np.full(b, np.inf)
    cdef long long[::1] ant = ant_a, sym = sym_a, ops = ops_a, rst = rst_a
    cdef double[::1] met = met_a
    cdef double rad, best
    with nogil:
        for t in range(b):
            rad = r2[t]
            while True:
                ops[t] += _rx_one(hbar[t], ybar[t], sym_re, sym_im, nt, rad, ntilde[t],
                                  &la, &ls, &best)
                if la >= 0:
                    break
                rst[t] += 1
                rad *= 4.0
            ant[t] = la
            sym[t] = ls
            met[t] = best
    return ant_a, sym_a, ops_a, rst_a, met_a


cdef void _tx_one(const double[:, ::1] d, const double[::1] z, double r2,
                  const double[::1] im_lv, const long long[::1] gs, const long long[::1] gl,
                  const double[::1] gre, const long long[::1] gsym, Py_ssize_t nt, Py_ssize_t m,
                  bint update, unsigned char[::1] inside, double* tail,
                  Py_ssize_t* ord_im, Py_ssize_t* ord_re, long long* res, double* best_out) noexcept nogil:
    # res: [ant, sym, ops, examined, n19]
    cdef Py_ssize_t n2 = 2 * nt, i, ell, a, ia, ib, nk, kk, k, v, st, en, ja, jb, nj, jj, j, sym
    cdef double best = INFINITY, rad, daa, lo, hi, im, s, t, rp2, zr, rp, dll, rlo, rhi, re, q
    cdef long long ops = 0, examined = 0, n19 = 0
    res[0] = -1
    res[1] = -1
    tail[n2] = 0.0
    i = n2 - 1
    while i >= nt:
        tail[i] = tail[i + 1] + z[i] * z[i]
        i -= 1
    for ell in range(nt):
        a = ell + nt
        rad = sqrt(r2)
        daa = d[a, a]
        lo = (z[a] - rad) / daa
        hi = (z[a] + rad) / daa
        ops += 2
        ia = _bl(im_lv, lo, 0, im_lv.shape[0])
        ib = _br(im_lv, hi, 0, im_lv.shape[0])
        if ia >= ib:
            continue
        nk = _se_order(im_lv, ia, ib, 0.5 * (lo + hi), ord_im)
        for kk in range(nk):
            k = ord_im[kk]
            im = im_lv[k]
            s = tail[a + 1]
            for v in range(nt, a + 1):
                t = z[v] - d[v, a] * im
                s += t * t
            n19 += 1
            ops += n2 + 3
            rp2 = r2 - s
            if rp2 < 0.0:
                continue
            zr = z[ell] - d[ell, a] * im
            rp = sqrt(rp2)
            dll = d[ell, ell]
            rlo = (zr - rp) / dll
            rhi = (zr + rp) / dll
            st = gs[k]
            en = st + gl[k]
            ja = _bl(gre, rlo, st, en)
            jb = _br(gre, rhi, st, en)
            if ja >= jb:
                continue
            nj = _se_order(gre, ja, jb, 0.5 * (rlo + rhi), ord_re)
            for jj in range(nj):
                j = ord_re[jj]
                re = gre[j]
                examined += 1
                ops += 3 * nt
                q = s
                for v in range(nt):
                    t = z[v] - d[v, ell] * re - d[v, a] * im
                    q += t * t
                if q <= r2:
                    sym = gsym[j]
                    inside[ell * m + sym] = 1
                    if q < best:
                        best = q
                        res[0] = ell
                        res[1] = sym
                    if update:
                        r2 = q
    res[2] = ops
    res[3] = examined
    res[4] = n19
    best_out[0] = best


def sm_tx_batch(const double[:, :, ::1] d, const double[:, ::1] z, const double[::1] r2,
                const double[::1] im_lv, const long long[::1] gs, const long long[::1] gl,
                const double[::1] gre, const long long[::1] gsym, Py_ssize_t nt,
                bint update, bint restart, unsigned char[:, ::1] inside):
    cdef Py_ssize_t b = d.shape[0], t, m = inside.shape[1] // nt
    ant_a = np.full(b, -1, dtype=np.int64)
    sym_a = np.full(b, -1, dtype=np.int64)
    ops_a = np.zeros(b, dtype=np.int64)
    ex_a = np.zeros(b, dtype=np.int64)
    n19_a = np.zeros(b, dtype=np.int64)
    rst_a = np.zeros(b, dtype=np.int64)
    met_a = np.full(b, np.inf)
    cdef long long[::1] ant = ant_a, sym = sym_a, ops = ops_a, ex = ex_a, n19 = n19_a, rst = rst_a
    cdef double[::1] met = met_a
    tail_a = np.zeros(2 * nt + 1)
    ord_im_a = np.zeros(im_lv.shape[0] + 1, dtype=np.intp)
    ord_re_a = np.zeros(gre.shape[0] + 1, dtype=np.intp)
    cdef double[::1] tail = tail_a
    cdef Py_ssize_t[::1] ord_im = ord_im_a, ord_re = ord_re_a
    cdef long long res[5]
    cdef double rad, best
    with nogil:
        for t in range(b):
            rad = r2[t]
            while True:
                inside[t, :] = 0
                _tx_one(d[t], z[t], rad, im_lv, gs, gl, gre, gsym, nt, m, update, inside[t],
                        &tail[0], &ord_im[0], &ord_re[0], res, &best)
                ops[t] += res[2]
                ex[t] += res[3]
                n19[t] += res[4]
                if res[0] >= 0 or not restart:
                    break
                rst[t] += 1
                rad *= 4.0
            ant[t] = res[0]
            sym[t] = res[1]
            met[t] = best
    return ant_a, sym_a, ops_a, ex_a, n19_a, rst_a, met_a


cdef void _interval(Py_ssize_t i, const double[:, ::1] d, const double[::1] z, double r2,
                    const double[::1] im_lv, const long long[::1] gs, const long long[::1] gl,
                    const double[::1] gre, Py_ssize_t nt, double* partial, double* zc,
                    double* x, Py_ssize_t* kidx, Py_ssize_t* order, Py_ssize_t* cnt,
                    Py_ssize_t* pos, Py_ssize_t stride) noexcept nogil:
    cdef Py_ssize_t n2 = 2 * nt, j, k, a, b, ia, ib
    cdef double zi = z[i], rem, rad, lo, hi
    cdef const double[::1] vals
    for j in range(i + 1, n2):
        zi -= d[i, j] * x[j]
    zc[i] = zi
    pos[i] = 0
    rem = r2 - partial[i]
    if rem < 0.0:
        cnt[i] = 0
        return
    rad = sqrt(rem)
    lo = (zi - rad) / d[i, i]
    hi = (zi + rad) / d[i, i]
    if i >= nt:
        vals = im_lv
        a = 0
        b = im_lv.shape[0]
    else:
        k = kidx[i + nt]
        vals = gre
        a = gs[k]
        b = gs[k] + gl[k]
    ia = _bl(vals, lo, a, b)
    ib = _br(vals, hi, a, b)
    if ia < ib:
        cnt[i] = _se_order(vals, ia, ib, 0.5 * (lo + hi), order + i * stride)
    else:
        cnt[i] = 0


cdef double _tree_one(const double[:, ::1] d, const double[::1] z, double r2,
                      const double[::1] im_lv, const long long[::1] gs, const long long[::1] gl,
                      const double[::1] gre, const long long[::1] gsym, Py_ssize_t nt,
                      long long[::1] out, double* partial, double* zc, double* x,
                      Py_ssize_t* kidx, Py_ssize_t* best_k, Py_ssize_t* order, Py_ssize_t* cnt,
                      Py_ssize_t* pos, Py_ssize_t stride, long long* counts) noexcept nogil:
    cdef Py_ssize_t n2 = 2 * nt, top = n2 - 1, i, idx, ell
    cdef double best = INFINITY, v, t, dist
    cdef long long ops = 0, nodes = 0
    cdef bint found = False
    for i in range(n2):
        partial[i] = 0.0
        zc[i] = 0.0
        x[i] = 0.0
        kidx[i] = 0
    i = top
    _interval(i, d, z, r2, im_lv, gs, gl, gre, nt, partial, zc, x, kidx, order, cnt, pos, stride)
    ops += 2
    while True:
        if pos[i] >= cnt[i]:
            i += 1
            if i > top:
                break
            continue
        idx = order[i * stride + pos[i]]
        pos[i] += 1
        if i >= nt:
            v = im_lv[idx]
        else:
            v = gre[idx]
        t = zc[i] - d[i, i] * v
        dist = partial[i] + t * t
        ops += 3
        nodes += 1
        if dist > r2:
            pos[i] = cnt[i]
            continue
        x[i] = v
        kidx[i] = idx
        if i == 0:
            if dist < best:
                best = dist
                found = True
                for ell in range(nt):
                    best_k[ell] = kidx[ell]
            r2 = dist
        else:
            i -= 1
            partial[i] = dist
            _interval(i, d, z, r2, im_lv, gs, gl, gre, nt, partial, zc, x, kidx, order, cnt,
                      pos, stride)
            ops += n2 + 3
    if found:
        for ell in range(nt):
            out[ell] = gsym[best_k[ell]]
    counts[0] = ops
    counts[1] = nodes
    return best


def tree_batch(const double[:, :, ::1] d, const double[:, ::1] z, const double[::1] r2,
               const double[::1] im_lv, const long long[::1] gs, const long long[::1] gl,
               const double[::1] gre, const long long[::1] gsym, Py_ssize_t nt,
               long long[:, ::1] out):
    cdef Py_ssize_t b = d.shape[0], t, n2 = 2 * nt
    cdef Py_ssize_t stride = max(im_lv.shape[0], gre.shape[0]) + 1
    ops_a = np.zeros(b, dtype=np.int64)
    nodes_a = np.zeros(b, dtype=np.int64)
    rst_a = np.zeros(b, dtype=np.int64)
    met_a = np.full(b, np.inf)
    cdef long long[::1] ops = ops_a, nodes = nodes_a, rst = rst_a
    cdef double[::1] met = met_a
    fbuf_a = np.zeros((3, n2))
    ibuf_a = np.zeros((4, n2), dtype=np.intp)
    order_a = np.zeros(n2 * stride, dtype=np.intp)
    cdef double[:, ::1] fbuf = fbuf_a
    cdef Py_ssize_t[:, ::1] ibuf = ibuf_a
    cdef Py_ssize_t[::1] order = order_a
    cdef long long counts[2]
    cdef double rad, best
    with nogil:
        for t in range(b):
            rad = r2[t]
            out[t, :] = -1
            while True:
                best = _tree_one(d[t], z[t], rad, im_lv, gs, gl, gre, gsym, nt, out[t],
                                 &fbuf[0, 0], &fbuf[1, 0], &fbuf[2, 0], &ibuf[0, 0], &ibuf[1, 0],
                                 &order[0], &ibuf[2, 0], &ibuf[3, 0], stride, counts)
                ops[t] += counts[0]
                nodes[t] += counts[1]
                if best < INFINITY:
                    break
                rst[t] += 1
                rad *= 4.0
            met[t] = best
    return ops_a, nodes_a, rst_a, met_a
