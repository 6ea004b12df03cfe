"""Pure-Python orbit kernels; reference semantics for ``_ckernels.pyx``.

Both backends evaluate maps with the same operation order (terms summed in
sorted order, integer powers by repeated multiplication, complex products
written out in real arithmetic) so they agree bit for bit.
"""

import math

import numpy as np

UNRESOLVED, TO_FIXED, TO_INFINITY, PERIODIC = 0, 1, 2, 3
NOTE_NONE, NOTE_DOMAIN, NOTE_NONFINITE, NOTE_MAXITER = 0, 1, 2, 3
TRAPPED, ESCAPED, UNDECIDED, FAILED = 0, 1, 2, 3

_NAN = float("nan")
_INF = float("inf")


def _safe(fn, a):
    try:
        return fn(a)
    except OverflowError:
        return _INF
    except ValueError:
        return _NAN


class CompiledMap:
    def __init__(self, prog):
        self.kind = int(prog.kind)
        self.js = [int(v) for v in prog.js]
        self.ks = [int(v) for v in prog.ks]
        self.cre = [float(v) for v in prog.cre]
        self.cim = [float(v) for v in prog.cim]
        self.cx = [int(v) for v in prog.code_x]
        self.ax = [int(v) for v in prog.arg_x]
        self.cy = [int(v) for v in prog.code_y]
        self.ay = [int(v) for v in prog.arg_y]
        self.consts = [float(v) for v in prog.consts]
        self.maxj = max(self.js, default=0)
        self.maxk = max(self.ks, default=0)

    def _rpn(self, codes, args, x, y):
        st = []
        consts = self.consts
        for code, arg in zip(codes, args):
            if code == 0:
                st.append(consts[arg])
            elif code == 1:
                st.append(x)
            elif code == 2:
                st.append(y)
            elif code == 3:
                st[-1] = -st[-1]
            elif code <= 7:
                b = st.pop()
                a = st[-1]
                if code == 4:
                    st[-1] = a + b
                elif code == 5:
                    st[-1] = a - b
                elif code == 6:
                    st[-1] = a * b
                else:
                    if b == 0.0:
                        return 0.0, 1
                    st[-1] = a / b
            elif code == 8:
                base = st[-1]
                if arg == 0:
                    st[-1] = 1.0
                else:
                    acc = base
                    for _ in range(arg - 1):
                        acc = acc * base
                    st[-1] = acc
            else:
                a = st[-1]
                if code == 9:
                    st[-1] = _safe(math.sin, a)
                elif code == 10:
                    st[-1] = _safe(math.cos, a)
                elif code == 11:
                    st[-1] = _safe(math.exp, a)
                elif code == 12:
                    if a < 0.0:
                        return 0.0, 2
                    st[-1] = _safe(math.sqrt, a)
                elif code == 13:
                    st[-1] = abs(a)
                else:
                    st[-1] = _safe(math.tanh, a)
        return st[-1], 0

    def eval1(self, x, y):
        """Image of one point: ``(u, v, err)`` with ``err`` 0, 1 (x/0) or 2 (sqrt < 0)."""
        if self.kind == 1:
            u, e = self._rpn(self.cx, self.ax, x, y)
            if e:
                return 0.0, 0.0, e
            v, e = self._rpn(self.cy, self.ay, x, y)
            return u, v, e
        zr, zi = [1.0], [0.0]
        for _ in range(self.maxj):
            a, b = zr[-1], zi[-1]
            zr.append(a * x - b * y)
            zi.append(a * y + b * x)
        wr, wi = [1.0], [0.0]
        for _ in range(self.maxk):
            a, b = wr[-1], wi[-1]
            wr.append(a * x + b * y)
            wi.append(b * x - a * y)
        ur = ui = 0.0
        for t in range(len(self.js)):
            j, k = self.js[t], self.ks[t]
            cr, ci = self.cre[t], self.cim[t]
            pr = cr * zr[j] - ci * zi[j]
            pi = cr * zi[j] + ci * zr[j]
            qr = pr * wr[k] - pi * wi[k]
            qi = pr * wi[k] + pi * wr[k]
            ur = ur + qr
            ui = ui + qi
        return ur, ui, 0


def _finite(a, b):
    return math.isfinite(a) and math.isfinite(b)


def eval_points(cm, xs, ys):
    n = len(xs)
    u = np.empty(n)
    v = np.empty(n)
    err = np.zeros(n, dtype=np.int8)
    for i in range(n):
        a, b, e = cm.eval1(float(xs[i]), float(ys[i]))
        u[i], v[i], err[i] = a, b, e
    return u, v, err


def _confirm_cycle(cm, cx, cy, lam, ctol):
    px, py = cx, cy
    q = 0
    for i in range(1, lam + 1):
        px, py, e = cm.eval1(px, py)
        if e or not _finite(px, py):
            return 0
        if math.hypot(px - cx, py - cy) <= ctol:
            q = i
            break
    if q < 2:
        return 0
    reps = max(2, -(-64 // q))
    px, py = cx, cy
    for _ in range(reps):
        for _ in range(q):
            px, py, e = cm.eval1(px, py)
            if e or not _finite(px, py):
                return 0
        if math.hypot(px - cx, py - cy) > ctol:
            return 0
    return q


def classify_one(cm, x, y, max_iter, r_esc, r_fix, ctol, fix_need, esc_need):
    tx, ty = x, y
    power, lam = 1, 0
    fix_cnt = esc_cnt = 0
    prev_norm = math.hypot(x, y)
    for it in range(1, max_iter + 1):
        nx, ny, e = cm.eval1(x, y)
        if e:
            return UNRESOLVED, 0, it, x, y, NOTE_DOMAIN
        if not _finite(nx, ny):
            if math.isinf(nx) or math.isinf(ny) or prev_norm > r_esc:
                return TO_INFINITY, 0, it, x, y, NOTE_NONE
            return UNRESOLVED, 0, it, x, y, NOTE_NONFINITE
        nrm = math.hypot(nx, ny)
        esc_cnt = esc_cnt + 1 if (nrm > r_esc and nrm > prev_norm) else 0
        step = math.hypot(nx - x, ny - y)
        fix_cnt = fix_cnt + 1 if step <= r_fix else 0
        x, y, prev_norm = nx, ny, nrm
        if esc_cnt >= esc_need:
            return TO_INFINITY, 0, it, x, y, NOTE_NONE
        if fix_cnt >= fix_need:
            return TO_FIXED, 1, it, x, y, NOTE_NONE
        lam += 1
        if lam >= 2 and step > r_fix and math.hypot(x - tx, y - ty) <= ctol:
            q = _confirm_cycle(cm, x, y, lam, ctol)
            if q >= 2:
                return PERIODIC, q, it, x, y, NOTE_NONE
        if lam == power:
            tx, ty = x, y
            power *= 2
            lam = 0
    return UNRESOLVED, 0, max_iter, x, y, NOTE_MAXITER


def classify_orbits(cm, xs, ys, max_iter, r_esc, r_fix, ctol, fix_need, esc_need):
    n = len(xs)
    kind = np.zeros(n, dtype=np.int8)
    period = np.zeros(n, dtype=np.int64)
    iters = np.zeros(n, dtype=np.int64)
    fx = np.zeros(n)
    fy = np.zeros(n)
    note = np.zeros(n, dtype=np.int8)
    for i in range(n):
        r = classify_one(
            cm, float(xs[i]), float(ys[i]), int(max_iter), float(r_esc), float(r_fix),
            float(ctol), int(fix_need), int(esc_need),
        )
        kind[i], period[i], iters[i], fx[i], fy[i], note[i] = r
    return kind, period, iters, fx, fy, note


def trap_probe(cm, xs, ys, n_steps, r_trap, r_esc):
    """Per seed: TRAPPED (entered the trap ball and stayed), ESCAPED, UNDECIDED or FAILED."""
    n = len(xs)
    status = np.full(n, UNDECIDED, dtype=np.int8)
    when = np.zeros(n, dtype=np.int64)
    for i in range(n):
        x, y = float(xs[i]), float(ys[i])
        entered = False
        left = False
        st = UNDECIDED
        for it in range(1, int(n_steps) + 1):
            x, y, e = cm.eval1(x, y)
            if e:
                st = FAILED
                when[i] = it
                break
            if not _finite(x, y) or math.hypot(x, y) > r_esc:
                st = ESCAPED
                when[i] = it
                break
            inside = math.hypot(x, y) <= r_trap
            if inside and not entered:
                entered = True
                when[i] = it
            elif entered and not inside:
                left = True
        if st == UNDECIDED and entered and not left:
            st = TRAPPED
        status[i] = st
    return status, when


def trajectories(cm, xs, ys, n_steps):
    n = len(xs)
    out = np.full((n, int(n_steps) + 1, 2), np.nan)
    for i in range(n):
        x, y = float(xs[i]), float(ys[i])
        out[i, 0] = x, y
        for it in range(1, int(n_steps) + 1):
            x, y, e = cm.eval1(x, y)
            if e or not _finite(x, y):
                break
            out[i, it] = x, y
    return out
