"""Jit-compiled hybrid-system integrator core.

Internal module.  Fixed-layout numpy arrays in, fixed-layout arrays out; the
public wrappers in :mod:`vines.dynamics` translate to and from dataclasses.

State vector layout (length 6):
    y = [x1, v1, x2, v2, i_damp, i_coil]
where i_damp = integral of v1**2 and i_coil = integral of (v1 - v2)**2.
Impact-dissipated energy (unhalved units) is carried separately as a scalar.

Sample rows are (tau, x1, v1, x2, v2, i_damp, i_coil, e_imp) with a phase tag:
    0 = uniform-grid sample        1 = pre-impact state
    2 = post-impact state          3 = stick-release state
    4 = trajectory end off the grid
Impact rows are
    (tau, wall, v1_pre, v2_pre, v1_post, v2_post, energy_loss,
     grazing, sticking, extra_loss)
where extra_loss is the additional energy removed when the chattering guard
projects the pair onto a common velocity.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

# ---------------------------------------------------------------------------
# status / phase codes

OK = 0
ZENO = 1  # impact budget exhausted
UNDERFLOW = 2  # step size collapsed
NON_FINITE = 3  # state or error estimate became non-finite
MAX_STEPS = 4  # step budget exhausted
BAD_INPUT = 5  # zero initial energy (batch kernel only)

PH_GRID = 0
PH_PRE = 1
PH_POST = 2
PH_RELEASE = 3
PH_END = 4

# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) tableau (classic DOPRI5 coefficients)

_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
# embedded 4th-order error weights (difference of the two b rows)
_E1, _E3, _E4, _E5, _E6, _E7 = (-71.0 / 57600.0, 71.0 / 16695.0,
                                -71.0 / 1920.0, 17253.0 / 339200.0,
                                -22.0 / 525.0, 1.0 / 40.0)
# quartic interpolant: y(t+h*th) = y + h * sum_j K_j * sum_k P[j,k] * th**(k+1)
_P = np.array([
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
     69997945.0 / 29380423.0],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_SCAN_DT = 2.5e-3  # target spacing of the event-scan mesh
_H_FLOOR = 1e-13
_STEP_BUDGET = 50_000_000


@njit(cache=True)
def _rhs(y, mode, eps, lam, ce, out):
    # mode 0: free flight; mode +-1: pair stuck together at that wall
    if mode == 0:
        dv = y[1] - y[3]
        out[0] = y[1]
        out[1] = -y[0] - eps * lam * y[1] - ce * dv
        out[2] = y[3]
        out[3] = ce * dv / eps
        out[4] = y[1] * y[1]
        out[5] = dv * dv
    else:
        a = -(y[0] + eps * lam * y[1]) / (1.0 + eps)
        out[0] = y[1]
        out[1] = a
        out[2] = y[1]
        out[3] = a
        out[4] = y[1] * y[1]
        out[5] = 0.0


@njit(cache=True)
def _try_step(y, h, mode, eps, lam, ce, rtol, atol, f0, K, ynew, yt):
    """One RK attempt with f0 = f(t, y).  Returns the scaled RMS error
    estimate; fills K and ynew."""
    for i in range(6):
        K[0, i] = f0[i]
        yt[i] = y[i] + h * (_A21 * K[0, i])
    _rhs(yt, mode, eps, lam, ce, K[1])
    for i in range(6):
        yt[i] = y[i] + h * (_A31 * K[0, i] + _A32 * K[1, i])
    _rhs(yt, mode, eps, lam, ce, K[2])
    for i in range(6):
        yt[i] = y[i] + h * (_A41 * K[0, i] + _A42 * K[1, i] + _A43 * K[2, i])
    _rhs(yt, mode, eps, lam, ce, K[3])
    for i in range(6):
        yt[i] = y[i] + h * (_A51 * K[0, i] + _A52 * K[1, i] +
                            _A53 * K[2, i] + _A54 * K[3, i])
    _rhs(yt, mode, eps, lam, ce, K[4])
    for i in range(6):
        yt[i] = y[i] + h * (_A61 * K[0, i] + _A62 * K[1, i] + _A63 * K[2, i] +
                            _A64 * K[3, i] + _A65 * K[4, i])
    _rhs(yt, mode, eps, lam, ce, K[5])
    for i in range(6):
        ynew[i] = y[i] + h * (_B1 * K[0, i] + _B3 * K[2, i] + _B4 * K[3, i] +
                              _B5 * K[4, i] + _B6 * K[5, i])
    _rhs(ynew, mode, eps, lam, ce, K[6])
    err = 0.0
    for i in range(6):
        e = h * (_E1 * K[0, i] + _E3 * K[2, i] + _E4 * K[3, i] +
                 _E5 * K[4, i] + _E6 * K[5, i] + _E7 * K[6, i])
        ay = abs(y[i])
        an = abs(ynew[i])
        sc = atol + rtol * (ay if ay > an else an)
        err += (e / sc) * (e / sc)
    return np.sqrt(err / 6.0)


@njit(cache=True)
def _dense_q(K, Q):
    # Q[i, k] = sum_j K[j, i] * P[j, k]
    for i in range(6):
        for k in range(4):
            acc = 0.0
            for j in range(7):
                acc += K[j, i] * _P[j, k]
            Q[i, k] = acc


@njit(cache=True)
def _dense_state(y, Q, h, th, out):
    for i in range(6):
        out[i] = y[i] + h * th * (Q[i, 0] + th * (Q[i, 1] +
                                  th * (Q[i, 2] + th * Q[i, 3])))


@njit(cache=True)
def _qeval(b0, q, h, th):
    return b0 + h * th * (q[0] + th * (q[1] + th * (q[2] + th * q[3])))


@njit(cache=True)
def _qslope(q, th):
    # d/dth of the quartic, up to the positive factor h
    return q[0] + th * (2.0 * q[1] + th * (3.0 * q[2] + 4.0 * q[3] * th))


@njit(cache=True)
def _slope_root(q, a, b):
    fa = _qslope(q, a)
    for _ in range(80):
        m = 0.5 * (a + b)
        fm = _qslope(q, m)
        if fm == 0.0 or (b - a) < 1e-14:
            return m
        if (fm > 0.0) == (fa > 0.0):
            a = m
            fa = fm
        else:
            b = m
    return 0.5 * (a + b)


@njit(cache=True)
def _illinois(b0, q, h, target, a, b, fa, fb, gtol):
    # root of quartic(th) - target on [a, b] with fa, fb straddling zero
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    side = 0
    for _ in range(100):
        m = b - fb * (b - a) / (fb - fa)
        if m <= a or m >= b:
            m = 0.5 * (a + b)
        fm = _qeval(b0, q, h, m) - target
        if abs(fm) <= gtol or (b - a) <= 1e-14:
            return m
        if (fm > 0.0) == (fb > 0.0):
            b = m
            fb = fm
            if side == 1:
                fa *= 0.5
            side = 1
        else:
            a = m
            fa = fm
            if side == -1:
                fb *= 0.5
            side = -1
    return 0.5 * (a + b)


@njit(cache=True)
def _scan_free(w0, qw, h, Lc, gap_tol, sup_p, sup_m):
    """Locate the earliest wall event of the relative coordinate on [0, 1].

    Returns (kind, theta, side): kind 0 none, 1 crossing, 2 grazing touch.
    sup_p / sup_m suppress touch events at the +/- wall while the step starts
    inside that wall's contact layer (departure from a resolved contact).
    """
    n = int(h / _SCAN_DT) + 1
    if n < 8:
        n = 8
    elif n > 4096:
        n = 4096
    gtol = 1e-12 if gap_tol > 1e-12 else gap_tol
    best_th = 2.0
    best_kind = 0
    best_s = 0.0
    pth = 0.0
    pw = w0
    psl = _qslope(qw, 0.0)
    for i in range(1, n + 1):
        th = i / n
        wv = _qeval(w0, qw, h, th)
        sl = _qslope(qw, th)
        if pw < Lc and wv >= Lc:
            r = _illinois(w0, qw, h, Lc, pth, th, pw - Lc, wv - Lc, gtol)
            if r < best_th:
                best_th, best_kind, best_s = r, 1, 1.0
        if pw > -Lc and wv <= -Lc:
            r = _illinois(w0, qw, h, -Lc, pth, th, pw + Lc, wv + Lc, gtol)
            if r < best_th:
                best_th, best_kind, best_s = r, 1, -1.0
        if psl > 0.0 and sl <= 0.0:
            # interior maximum: may touch or pierce the + wall and return
            tm = _slope_root(qw, pth, th)
            wm = _qeval(w0, qw, h, tm)
            if wm >= Lc and pw < Lc:
                r = _illinois(w0, qw, h, Lc, pth, tm, pw - Lc, wm - Lc, gtol)
                if r < best_th:
                    best_th, best_kind, best_s = r, 1, 1.0
            elif wm >= Lc - gap_tol and not sup_p:
                if tm < best_th:
                    best_th, best_kind, best_s = tm, 2, 1.0
        if psl < 0.0 and sl >= 0.0:
            tm = _slope_root(qw, pth, th)
            wm = _qeval(w0, qw, h, tm)
            if wm <= -Lc and pw > -Lc:
                r = _illinois(w0, qw, h, -Lc, pth, tm, pw + Lc, wm + Lc, gtol)
                if r < best_th:
                    best_th, best_kind, best_s = r, 1, -1.0
            elif wm <= -(Lc - gap_tol) and not sup_m:
                if tm < best_th:
                    best_th, best_kind, best_s = tm, 2, -1.0
        if best_kind > 0:
            break
        pth = th
        pw = wv
        psl = sl
    return best_kind, best_th, best_s


@njit(cache=True)
def _scan_release(r0, qr, h):
    """First upward zero crossing of the stick-release function on (0, 1]."""
    n = int(h / _SCAN_DT) + 1
    if n < 8:
        n = 8
    elif n > 4096:
        n = 4096
    pth = 0.0
    pr = r0
    for i in range(1, n + 1):
        th = i / n
        rv = _qeval(r0, qr, h, th)
        if pr <= 0.0 and rv > 0.0:
            return 3, _illinois(r0, qr, h, 0.0, pth, th, pr, rv, 1e-12)
        pth = th
        pr = rv
    return 0, 0.0


@njit(cache=True)
def _resolve(y, e_imp, s, eps, lam, kappa, graze_eps, forced):
    """Apply the restitution map at wall s; engage the chattering guard when
    the approach is grazing or when forced.  Mutates y in place."""
    v1a = y[1]
    v2a = y[3]
    r = v1a - v2a
    P = v1a + eps * v2a
    v1b = (P - eps * kappa * r) / (1.0 + eps)
    v2b = (P + kappa * r) / (1.0 + eps)
    loss = eps * (1.0 - kappa * kappa) * r * r / (1.0 + eps)
    e_imp += loss
    y[1] = v1b
    y[3] = v2b
    graze = abs(r) < graze_eps
    new_mode = 0
    stuck = False
    extra = 0.0
    if graze or forced:
        rb = v1b - v2b
        vstar = (v1b + eps * v2b) / (1.0 + eps)
        extra = eps * rb * rb / (1.0 + eps)
        e_imp += extra
        y[1] = vstar
        y[3] = vstar
        # the wall can only push: hold the pair while the free relative
        # acceleration presses outward
        if s * (y[0] + eps * lam * vstar) <= 0.0:
            new_mode = 1 if s > 0.0 else -1
            stuck = True
    return e_imp, new_mode, v1a, v2a, v1b, v2b, loss, graze, stuck, extra


@njit(cache=True)
def _emit(ts, ys, ph, ns, t, y, e_imp, phase):
    if ns == ts.shape[0]:
        cap = 2 * ts.shape[0]
        nts = np.empty(cap)
        nys = np.empty((cap, 7))
        nph = np.empty(cap, np.int8)
        nts[:ns] = ts
        nys[:ns] = ys
        nph[:ns] = ph
        ts, ys, ph = nts, nys, nph
    ts[ns] = t
    for i in range(6):
        ys[ns, i] = y[i]
    ys[ns, 6] = e_imp
    ph[ns] = phase
    return ts, ys, ph, ns + 1


@njit(cache=True)
def _emit_imp(imp, ni, tau, wall, v1a, v2a, v1b, v2b, loss, grz, stk, extra):
    if ni == imp.shape[0]:
        cap = 2 * imp.shape[0]
        nimp = np.empty((cap, 10))
        nimp[:ni] = imp
        imp = nimp
    imp[ni, 0] = tau
    imp[ni, 1] = wall
    imp[ni, 2] = v1a
    imp[ni, 3] = v2a
    imp[ni, 4] = v1b
    imp[ni, 5] = v2b
    imp[ni, 6] = loss
    imp[ni, 7] = 1.0 if grz else 0.0
    imp[ni, 8] = 1.0 if stk else 0.0
    imp[ni, 9] = extra
    return imp, ni + 1


@njit(cache=True)
def _initial_h(y, f0, span, mode, eps, lam, ce, rtol, atol, max_step, yt, ft):
    d0 = 0.0
    d1 = 0.0
    for i in range(6):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (f0[i] / sc) ** 2
    d0 = np.sqrt(d0 / 6.0)
    d1 = np.sqrt(d1 / 6.0)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    if h0 > span:
        h0 = span
    for i in range(6):
        yt[i] = y[i] + h0 * f0[i]
    _rhs(yt, mode, eps, lam, ce, ft)
    d2 = 0.0
    for i in range(6):
        sc = atol + rtol * abs(y[i])
        d2 += ((ft[i] - f0[i]) / sc) ** 2
    d2 = np.sqrt(d2 / 6.0) / h0
    dm = d1 if d1 > d2 else d2
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = 1e-6 if 1e-6 > h0 * 1e-3 else h0 * 1e-3
    else:
        h1 = (0.01 / dm) ** 0.2
    h = 100.0 * h0 if 100.0 * h0 < h1 else h1
    if h > max_step:
        h = max_step
    if h > span:
        h = span
    return h


@njit(cache=True)
def integrate_core(y_in, e0, t0, t_end, eps, lam, ce, kappa, Lc, mode_in,
                   rtol, atol, max_step, sample_dt, collect, stop_pre_event,
                   gap_tol, graze_eps, close_gap, max_close, max_impacts):
    """Event-driven integration of the coupled pair from t0 to t_end.

    Returns (status, t, y, e_imp, mode, n_impacts, n_graze, n_stick,
    n_steps, n_rejected, sample_taus, sample_rows, sample_phases,
    impact_rows)."""
    y = y_in.copy()
    e_imp = e0
    t = t0
    mode = mode_in
    status = OK
    n_imp = 0
    n_graze = 0
    n_stick = 0
    n_steps = 0
    n_rej = 0
    close_run = 0
    last_imp_t = -1.0e300

    cap = 256 if collect else 1
    ts = np.empty(cap)
    ys = np.empty((cap, 7))
    ph = np.empty(cap, np.int8)
    ns = 0
    imp = np.empty((16 if collect else 1, 10))
    ni = 0

    f0 = np.empty(6)
    K = np.empty((7, 6))
    ynew = np.empty(6)
    yt = np.empty(6)
    Q = np.empty((6, 4))
    qw = np.empty(4)
    work = np.empty(6)

    have_grid = sample_dt > 0.0
    if have_grid:
        kg = int(np.floor(t0 / sample_dt + 1e-12)) + 1
        on_grid = abs(t0 - np.rint(t0 / sample_dt) * sample_dt) <= 1e-12
    else:
        kg = 0
        on_grid = True
    if collect:
        ts, ys, ph, ns = _emit(ts, ys, ph, ns, t, y, e_imp,
                               PH_GRID if on_grid else PH_END)

    # --- resolve a start on (or beyond) a wall ------------------------------
    if mode == 0:
        w0 = y[0] - y[2]
        if w0 >= Lc - gap_tol or w0 <= -(Lc - gap_tol):
            s = 1.0 if w0 > 0.0 else -1.0
            y[2] = y[0] - s * Lc
            r0 = y[1] - y[3]
            if s * r0 > graze_eps:
                # launched outward against the wall: collide immediately
                if stop_pre_event:
                    P = y[1] + eps * y[3]
                    v1b = (P - eps * kappa * r0) / (1.0 + eps)
                    v2b = (P + kappa * r0) / (1.0 + eps)
                    loss = eps * (1.0 - kappa * kappa) * r0 * r0 / (1.0 + eps)
                    if collect:
                        ts, ys, ph, ns = _emit(ts, ys, ph, ns, t, y, e_imp,
                                               PH_PRE)
                        imp, ni = _emit_imp(imp, ni, t, s, y[1], y[3], v1b,
                                            v2b, loss, False, False, 0.0)
                    return (status, t, y, e_imp, mode, n_imp, n_graze,
                            n_stick, n_steps, n_rej, ts[:ns].copy(),
                            ys[:ns].copy(), ph[:ns].copy(), imp[:ni].copy())
                if collect:
                    ts, ys, ph, ns = _emit(ts, ys, ph, ns, t, y, e_imp, PH_PRE)
                e_imp, mode, v1a, v2a, v1b, v2b, loss, grz, stk, extra = \
                    _resolve(y, e_imp, s, eps, lam, kappa, graze_eps, False)
                n_imp += 1
                if grz:
                    n_graze += 1
                if stk:
                    n_stick += 1
                last_imp_t = t
                if collect:
                    imp, ni = _emit_imp(imp, ni, t, s, v1a, v2a, v1b, v2b,
                                        loss, grz, stk, extra)
                    ts, ys, ph, ns = _emit(ts, ys, ph, ns, t, y, e_imp,
                                           PH_POST)
            elif s * r0 >= -graze_eps:
                # resting contact: stick if the wall is loaded, else depart
                r = y[1] - y[3]
                v = (y[1] + eps * y[3]) / (1.0 + eps)
                e_imp += eps * r * r / (1.0 + eps)
                y[1] = v
                y[3] = v
                if s * (y[0] + eps * lam * v) <= 0.0:
                    mode = 1 if s > 0.0 else -1
                    n_stick += 1

    _rhs(y, mode, eps, lam, ce, f0)
    h = _initial_h(y, f0, t_end - t, mode, eps, lam, ce, rtol, atol,
                   max_step, ynew, yt)

    while status == OK and t_end - t > 1e-12:
        if n_steps >= _STEP_BUDGET:
            status = MAX_STEPS
            break
        hstep = h
        if hstep > t_end - t:
            hstep = t_end - t
        if hstep > max_step:
            hstep = max_step
        err = 0.0
        rejected = False
        accepted = False
        while not accepted:
            err = _try_step(y, hstep, mode, eps, lam, ce, rtol, atol,
                            f0, K, ynew, yt)
            n_steps += 1
            if not np.isfinite(err):
                status = NON_FINITE
                break
            if err <= 1.0:
                accepted = True
            else:
                n_rej += 1
                rejected = True
                fac = _SAFETY * err ** -0.2
                if fac < _MIN_FACTOR:
                    fac = _MIN_FACTOR
                hstep *= fac
                if hstep < _H_FLOOR:
                    status = UNDERFLOW
                    break
        if status != OK:
            break
        if err == 0.0:
            fac = _MAX_FACTOR
        else:
            fac = _SAFETY * err ** -0.2
            if fac > _MAX_FACTOR:
                fac = _MAX_FACTOR
        if rejected and fac > 1.0:
            fac = 1.0
        h = hstep * fac

        _dense_q(K, Q)
        t_new = t + hstep

        kind = 0
        th = 0.0
        s_ev = 0.0
        if mode == 0:
            w0 = y[0] - y[2]
            for k in range(4):
                qw[k] = Q[0, k] - Q[2, k]
            sup_p = w0 > Lc - 2.0 * gap_tol
            sup_m = w0 < -(Lc - 2.0 * gap_tol)
            kind, th, s_ev = _scan_free(w0, qw, hstep, Lc, gap_tol,
                                        sup_p, sup_m)
        else:
            s = 1.0 if mode > 0 else -1.0
            r0v = s * (y[0] + eps * lam * y[1])
            for k in range(4):
                qw[k] = s * (Q[0, k] + eps * lam * Q[1, k])
            kind, th = _scan_release(r0v, qw, hstep)
            s_ev = s

        if kind == 0:
            if collect and have_grid:
                while True:
                    tg = kg * sample_dt
                    if tg > t_new + 1e-12 or tg > t_end + 1e-12:
                        break
                    thg = (tg - t) / hstep
                    if thg < 0.0:
                        thg = 0.0
                    elif thg > 1.0:
                        thg = 1.0
                    _dense_state(y, Q, hstep, thg, work)
                    ts, ys, ph, ns = _emit(ts, ys, ph, ns, tg, work, e_imp,
                                           PH_GRID)
                    kg += 1
            t = t_new
            for i in range(6):
                y[i] = ynew[i]
                f0[i] = K[6, i]
            if mode != 0:
                # re-assert the contact constraint against roundoff drift
                s = 1.0 if mode > 0 else -1.0
                y[3] = y[1]
                y[2] = y[0] - s * Lc
        else:
            t_ev = t + th * hstep
            if collect and have_grid:
                while True:
                    tg = kg * sample_dt
                    if tg >= t_ev:
                        break
                    thg = (tg - t) / hstep
                    if thg < 0.0:
                        thg = 0.0
                    _dense_state(y, Q, hstep, thg, work)
                    ts, ys, ph, ns = _emit(ts, ys, ph, ns, tg, work, e_imp,
                                           PH_GRID)
                    kg += 1
            _dense_state(y, Q, hstep, th, work)
            for i in range(6):
                y[i] = work[i]
            t = t_ev
            if kind == 3:
                s = 1.0 if mode > 0 else -1.0
                y[3] = y[1]
                y[2] = y[0] - s * Lc
                mode = 0
                if collect:
                    ts, ys, ph, ns = _emit(ts, ys, ph, ns, t, y, e_imp,
                                           PH_RELEASE)
            else:
                s = s_ev
                y[2] = y[0] - s * Lc
                if collect:
                    ts, ys, ph, ns = _emit(ts, ys, ph, ns, t, y, e_imp,
                                           PH_PRE)
                if stop_pre_event:
                    r = y[1] - y[3]
                    P = y[1] + eps * y[3]
                    v1b = (P - eps * kappa * r) / (1.0 + eps)
                    v2b = (P + kappa * r) / (1.0 + eps)
                    loss = eps * (1.0 - kappa * kappa) * r * r / (1.0 + eps)
                    if collect:
                        imp, ni = _emit_imp(imp, ni, t, s, y[1], y[3], v1b,
                                            v2b, loss, abs(r) < graze_eps,
                                            False, 0.0)
                    break
                if t - last_imp_t < close_gap:
                    close_run += 1
                else:
                    close_run = 0
                last_imp_t = t
                forced = close_run >= max_close
                e_imp, mode, v1a, v2a, v1b, v2b, loss, grz, stk, extra = \
                    _resolve(y, e_imp, s, eps, lam, kappa, graze_eps, forced)
                n_imp += 1
                if grz or forced:
                    n_graze += 1
                if stk:
                    n_stick += 1
                    close_run = 0
                if collect:
                    imp, ni = _emit_imp(imp, ni, t, s, v1a, v2a, v1b, v2b,
                                        loss, grz, stk, extra)
                    ts, ys, ph, ns = _emit(ts, ys, ph, ns, t, y, e_imp,
                                           PH_POST)
                if n_imp >= max_impacts:
                    status = ZENO
                    break
            _rhs(y, mode, eps, lam, ce, f0)

    if collect:
        if ns == 0 or abs(ts[ns - 1] - t) > 1e-9:
            if have_grid and abs(t - np.rint(t / sample_dt) * sample_dt) <= 1e-12:
                end_phase = PH_GRID
            else:
                end_phase = PH_END
            ts, ys, ph, ns = _emit(ts, ys, ph, ns, t, y, e_imp, end_phase)

    return (status, t, y, e_imp, mode, n_imp, n_graze, n_stick, n_steps,
            n_rej, ts[:ns].copy(), ys[:ns].copy(), ph[:ns].copy(),
            imp[:ni].copy())


@njit(cache=True, parallel=True)
def batch_dissipation(kappa, Lc, ce, v10, eps, lam, x10, x20, v20, horizon,
                      rtol, atol, max_step, gap_tol, graze_eps, close_gap,
                      max_close, max_impacts, out_eff, out_status):
    """Dissipation fraction (percent of initial energy routed through the
    sink: impacts plus coil) for a batch of parameter samples.

    Writes results into preallocated slots only, so the output is invariant
    under the number of threads."""
    n = kappa.shape[0]
    for idx in prange(n):
        y0 = np.empty(6)
        y0[0] = x10
        y0[1] = v10[idx]
        L = Lc[idx]
        x2 = x20
        w = x10 - x2
        if w > L:
            x2 = x10 - L
        elif w < -L:
            x2 = x10 + L
        y0[2] = x2
        y0[3] = v20
        y0[4] = 0.0
        y0[5] = 0.0
        E0 = x10 * x10 + v10[idx] * v10[idx] + eps * v20 * v20
        if E0 <= 0.0:
            out_eff[idx] = 0.0
            out_status[idx] = BAD_INPUT
            continue
        res = integrate_core(y0, 0.0, 0.0, horizon, eps, lam, ce[idx],
                             kappa[idx], L, 0, rtol, atol, max_step, -1.0,
                             False, False, gap_tol, graze_eps, close_gap,
                             max_close, max_impacts)
        yf = res[2]
        out_eff[idx] = 100.0 * (res[3] + 2.0 * ce[idx] * yf[5]) / E0
        out_status[idx] = res[0]
