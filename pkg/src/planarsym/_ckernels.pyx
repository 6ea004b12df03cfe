# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled orbit kernels; semantics identical to ``_pykernels``."""

import numpy as np

from libc.math cimport sin, cos, exp, sqrt, fabs, tanh, hypot, isfinite, isinf

cdef enum:
    MAXDEG = 64
    UNRESOLVED = 0
    TO_FIXED = 1
    TO_INFINITY = 2
    PERIODIC = 3
    NOTE_NONE = 0
    NOTE_DOMAIN = 1
    NOTE_NONFINITE = 2
    NOTE_MAXITER = 3
    TRAPPED = 0
    ESCAPED = 1
    UNDECIDED = 2
    FAILED = 3


cdef class CompiledMap:
    cdef int kind
    cdef int nterms
    cdef int maxj, maxk
    cdef long long[::1] js
    cdef long long[::1] ks
    cdef double[::1] cre
    cdef double[::1] cim
    cdef int[::1] cx
    cdef int[::1] ax
    cdef int[::1] cy
    cdef int[::1] ay
    cdef double[::1] consts
    cdef double[::1] stack
    cdef double zr[MAXDEG + 1]
    cdef double zi[MAXDEG + 1]
    cdef double wr[MAXDEG + 1]
    cdef double wi[MAXDEG + 1]

    def __init__(self, prog):
        self.kind = int(prog.kind)
        self.js = np.ascontiguousarray(prog.js, dtype=np.int64)
        self.ks = np.ascontiguousarray(prog.ks, dtype=np.int64)
        self.cre = np.ascontiguousarray(prog.cre, dtype=np.float64)
        self.cim = np.ascontiguousarray(prog.cim, dtype=np.float64)
        self.cx = np.ascontiguousarray(prog.code_x, dtype=np.int32)
        self.ax = np.ascontiguousarray(prog.arg_x, dtype=np.int32)
        self.cy = np.ascontiguousarray(prog.code_y, dtype=np.int32)
        self.ay = np.ascontiguousarray(prog.arg_y, dtype=np.int32)
        self.consts = np.ascontiguousarray(prog.consts, dtype=np.float64)
        self.stack = np.zeros(max(int(prog.stack_size), 1) + 1)
        self.nterms = len(prog.js)
        self.maxj = int(max(prog.js)) if self.nterms else 0
        self.maxk = int(max(prog.ks)) if self.nterms else 0
        if self.maxj > MAXDEG or self.maxk > MAXDEG:
            raise ValueError("polynomial degree too large for the compiled kernel")

    cdef int _rpn(self, int[::1] codes, int[::1] args, double x, double y, double* out):
        cdef Py_ssize_t n = codes.shape[0]
        cdef Py_ssize_t i
        cdef int top = -1
        cdef int code, arg, r
        cdef double a, b, acc
        cdef double[::1] st = self.stack
        for i in range(n):
            code = codes[i]
            arg = args[i]
            if code == 0:
                top += 1
                st[top] = self.consts[arg]
            elif code == 1:
                top += 1
                st[top] = x
            elif code == 2:
                top += 1
                st[top] = y
            elif code == 3:
                st[top] = -st[top]
            elif code <= 7:
                b = st[top]
                top -= 1
                a = st[top]
                if code == 4:
                    st[top] = a + b
                elif code == 5:
                    st[top] = a - b
                elif code == 6:
                    st[top] = a * b
                else:
                    if b == 0.0:
                        return 1
                    st[top] = a / b
            elif code == 8:
                a = st[top]
                if arg == 0:
                    st[top] = 1.0
                else:
                    acc = a
                    for r in range(arg - 1):
                        acc = acc * a
                    st[top] = acc
            else:
                a = st[top]
                if code == 9:
                    st[top] = sin(a)
                elif code == 10:
                    st[top] = cos(a)
                elif code == 11:
                    st[top] = exp(a)
                elif code == 12:
                    if a < 0.0:
                        return 2
                    st[top] = sqrt(a)
                elif code == 13:
                    st[top] = fabs(a)
                else:
                    st[top] = tanh(a)
        out[0] = st[top]
        return 0

    cdef int eval1(self, double x, double y, double* u, double* v):
        cdef int e, t, j, k
        cdef double a, b, pr, pi, qr, qi, ur, ui
        if self.kind == 1:
            e = self._rpn(self.cx, self.ax, x, y, u)
            if e:
                return e
            return self._rpn(self.cy, self.ay, x, y, v)
        self.zr[0] = 1.0
        self.zi[0] = 0.0
        for t in range(self.maxj):
            a = self.zr[t]
            b = self.zi[t]
            self.zr[t + 1] = a * x - b * y
            self.zi[t + 1] = a * y + b * x
        self.wr[0] = 1.0
        self.wi[0] = 0.0
        for t in range(self.maxk):
            a = self.wr[t]
            b = self.wi[t]
            self.wr[t + 1] = a * x + b * y
            self.wi[t + 1] = b * x - a * y
        ur = 0.0
        ui = 0.0
        for t in range(self.nterms):
            j = <int>self.js[t]
            k = <int>self.ks[t]
            pr = self.cre[t] * self.zr[j] - self.cim[t] * self.zi[j]
            pi = self.cre[t] * self.zi[j] + self.cim[t] * self.zr[j]
            qr = pr * self.wr[k] - pi * self.wi[k]
            qi = pr * self.wi[k] + pi * self.wr[k]
            ur = ur + qr
            ui = ui + qi
        u[0] = ur
        v[0] = ui
        return 0


cdef inline bint _finite(double a, double b):
    return isfinite(a) and isfinite(b)


def eval_points(CompiledMap cm, xs, ys):
    cdef double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    u = np.empty(n)
    v = np.empty(n)
    err = np.zeros(n, dtype=np.int8)
    cdef double[::1] uv = u
    cdef double[::1] vv = v
    cdef signed char[::1] ev = err
    cdef Py_ssize_t i
    cdef double a, b
    cdef int e
    for i in range(n):
        a = 0.0
        b = 0.0
        e = cm.eval1(xv[i], yv[i], &a, &b)
        if e:
            a = 0.0
            b = 0.0
        uv[i] = a
        vv[i] = b
        ev[i] = e
    return u, v, err


cdef int _confirm_cycle(CompiledMap cm, double cx, double cy, int lam, double ctol):
    cdef double px = cx, py = cy, nx, ny
    cdef int q = 0, i, r, reps, e
    for i in range(1, lam + 1):
        e = cm.eval1(px, py, &nx, &ny)
        if e or not _finite(nx, ny):
            return 0
        px = nx
        py = ny
        if hypot(px - cx, py - cy) <= ctol:
            q = i
            break
    if q < 2:
        return 0
    reps = max(2, (64 + q - 1) // q)
    px = cx
    py = cy
    for r in range(reps):
        for i in range(q):
            e = cm.eval1(px, py, &nx, &ny)
            if e or not _finite(nx, ny):
                return 0
            px = nx
            py = ny
        if hypot(px - cx, py - cy) > ctol:
            return 0
    return q


def classify_orbits(CompiledMap cm, xs, ys, long long max_iter, double r_esc, double r_fix,
                    double ctol, int fix_need, int esc_need):
    cdef double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    kind_a = np.zeros(n, dtype=np.int8)
    period_a = np.zeros(n, dtype=np.int64)
    iters_a = np.zeros(n, dtype=np.int64)
    fx_a = np.zeros(n)
    fy_a = np.zeros(n)
    note_a = np.zeros(n, dtype=np.int8)
    cdef signed char[::1] kind = kind_a
    cdef long long[::1] period = period_a
    cdef long long[::1] iters = iters_a
    cdef double[::1] fx = fx_a
    cdef double[::1] fy = fy_a
    cdef signed char[::1] note = note_a
    cdef Py_ssize_t s
    cdef long long it, power, lam
    cdef double x, y, tx, ty, nx, ny, nrm, step, prev_norm
    cdef int fix_cnt, esc_cnt, e, q, k, p, nt
    for s in range(n):
        x = xv[s]
        y = yv[s]
        tx = x
        ty = y
        power = 1
        lam = 0
        fix_cnt = 0
        esc_cnt = 0
        prev_norm = hypot(x, y)
        k = UNRESOLVED
        p = 0
        nt = NOTE_MAXITER
        it = max_iter
        for it in range(1, max_iter + 1):
            e = cm.eval1(x, y, &nx, &ny)
            if e:
                nt = NOTE_DOMAIN
                break
            if not _finite(nx, ny):
                if isinf(nx) or isinf(ny) or prev_norm > r_esc:
                    k = TO_INFINITY
                    nt = NOTE_NONE
                else:
                    nt = NOTE_NONFINITE
                break
            nrm = hypot(nx, ny)
            if nrm > r_esc and nrm > prev_norm:
                esc_cnt += 1
            else:
                esc_cnt = 0
            step = hypot(nx - x, ny - y)
            if step <= r_fix:
                fix_cnt += 1
            else:
                fix_cnt = 0
            x = nx
            y = ny
            prev_norm = nrm
            if esc_cnt >= esc_need:
                k = TO_INFINITY
                nt = NOTE_NONE
                break
            if fix_cnt >= fix_need:
                k = TO_FIXED
                p = 1
                nt = NOTE_NONE
                break
            lam += 1
            if lam >= 2 and step > r_fix and hypot(x - tx, y - ty) <= ctol:
                q = _confirm_cycle(cm, x, y, <int>lam, ctol)
                if q >= 2:
                    k = PERIODIC
                    p = q
                    nt = NOTE_NONE
                    break
            if lam == power:
                tx = x
                ty = y
                power *= 2
                lam = 0
        kind[s] = k
        period[s] = p
        iters[s] = it
        fx[s] = x
        fy[s] = y
        note[s] = nt
    return kind_a, period_a, iters_a, fx_a, fy_a, note_a


def trap_probe(CompiledMap cm, xs, ys, long long n_steps, double r_trap, double r_esc):
    cdef double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    status_a = np.full(n, UNDECIDED, dtype=np.int8)
    when_a = np.zeros(n, dtype=np.int64)
    cdef signed char[::1] status = status_a
    cdef long long[::1] when = when_a
    cdef Py_ssize_t i
    cdef long long it
    cdef double x, y, nx, ny
    cdef bint entered, left, inside
    cdef int st, e
    for i in range(n):
        x = xv[i]
        y = yv[i]
        entered = False
        left = False
        st = UNDECIDED
        for it in range(1, n_steps + 1):
            e = cm.eval1(x, y, &nx, &ny)
            if e:
                st = FAILED
                when[i] = it
                break
            x = nx
            y = ny
            if not _finite(x, y) or hypot(x, y) > r_esc:
                st = ESCAPED
                when[i] = it
                break
            inside = hypot(x, y) <= r_trap
            if inside and not entered:
                entered = True
                when[i] = it
            elif entered and not inside:
                left = True
        if st == UNDECIDED and entered and not left:
            st = TRAPPED
        status[i] = st
    return status_a, when_a


def trajectories(CompiledMap cm, xs, ys, long long n_steps):
    cdef double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    out_a = np.full((n, n_steps + 1, 2), np.nan)
    cdef double[:, :, ::1] out = out_a
    cdef Py_ssize_t i
    cdef long long it
    cdef double x, y, nx, ny
    cdef int e
    for i in range(n):
        x = xv[i]
        y = yv[i]
        out[i, 0, 0] = x
        out[i, 0, 1] = y
        for it in range(1, n_steps + 1):
            e = cm.eval1(x, y, &nx, &ny)
            if e or not _finite(nx, ny):
                break
            x = nx
            y = ny
            out[i, it, 0] = x
            out[i, it, 1] = y
    return out_a
