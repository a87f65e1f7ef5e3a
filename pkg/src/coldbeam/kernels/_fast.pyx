# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of kernels/pykernel.py.

Line-by-line C transliteration of the pure-Python kernel; must produce
bit-identical results. Keep expressions, branch structure, and random-draw
order in lockstep with pykernel.py. Compiled with -ffp-contract=off and
-fno-builtin so every float op and libm call matches CPython's.

Array layouts are fixed by kernels/layout.py; the integer offsets below
mirror that module.
"""

from libc.math cimport cos, exp, log, sin, sqrt, INFINITY

ctypedef unsigned long long u64

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

cdef double TWO_PI = 6.283185307179586
cdef double INV53 = 1.0 / 9007199254740992.0
cdef double ENTRY_NUDGE = 1e-10

DEF MAX_BEAMS = 16

# --- Philox 4x64-10 counter-based stream (twin of rng.RngStream) -----------

cdef u64 M0 = 0xD2E7470EE14C6C93ULL
cdef u64 M1 = 0xCA5A826395121157ULL
cdef u64 W0 = 0x9E3779B97F4A7C15ULL
cdef u64 W1 = 0xBB67AE8584CAA73BULL

cdef struct Rng:
    u64 k0
    u64 k1
    u64 ctr_lo
    u64 ctr_hi
    u64 buf[4]
    int pos

cdef inline void rng_init(Rng* r, u64 seed, u64 stream) nogil:
    r.k0 = seed
    r.k1 = stream
    r.ctr_lo = 0
    r.ctr_hi = 0
    r.pos = 4

cdef inline void rng_block(Rng* r) nogil:
    cdef u64 x0, x1, x2, x3, k0, k1, hi0, lo0, hi1, lo1
    cdef u128 p0, p1
    cdef int i
    r.ctr_lo += 1
    if r.ctr_lo == 0:
        r.ctr_hi += 1
    x0 = r.ctr_lo
    x1 = r.ctr_hi
    x2 = 0
    x3 = 0
    k0 = r.k0
    k1 = r.k1
    for i in range(10):
        p0 = (<u128>M0) * x0
        p1 = (<u128>M1) * x2
        lo0 = <u64>p0
        hi0 = <u64>(p0 >> 64)
        lo1 = <u64>p1
        hi1 = <u64>(p1 >> 64)
        x0 = hi1 ^ x1 ^ k0
        x1 = lo1
        x2 = hi0 ^ x3 ^ k1
        x3 = lo0
        k0 = k0 + W0
        k1 = k1 + W1
    r.buf[0] = x0
    r.buf[1] = x1
    r.buf[2] = x2
    r.buf[3] = x3
    r.pos = 0

cdef inline double rng_uniform(Rng* r) nogil:
    cdef u64 x
    if r.pos == 4:
        rng_block(r)
    x = r.buf[r.pos]
    r.pos += 1
    return (<double>(x >> 11) + 0.5) * INV53

# --- geometry helpers (twins of pykernel helpers) ---------------------------

cdef inline double first_inside_quadratic(double a, double b, double c) nogil:
    cdef double disc, sq, s1, s2, r1, r2, hi
    if a == 0.0:
        if b >= 0.0:
            return INFINITY
        return -c / b
    disc = b * b - 4.0 * a * c
    if a > 0.0:
        if disc < 0.0:
            return INFINITY
        sq = sqrt(disc)
        s2 = (-b + sq) / (2.0 * a)
        if s2 < 0.0:
            return INFINITY
        s1 = (-b - sq) / (2.0 * a)
        return s1 if s1 > 0.0 else 0.0
    if disc < 0.0:
        return INFINITY
    sq = sqrt(disc)
    r1 = (-b - sq) / (2.0 * a)
    r2 = (-b + sq) / (2.0 * a)
    hi = r1 if r1 > r2 else r2
    return hi if hi > 0.0 else 0.0

cdef inline double beam_c0(const double* bm, double px, double py, double pz) nogil:
    cdef double dx, dy, dz, zl, r2, g, dzf
    dx = px - bm[3]
    dy = py - bm[4]
    dz = pz - bm[5]
    zl = dx * bm[0] + dy * bm[1] + dz * bm[2]
    r2 = dx * dx + dy * dy + dz * dz - zl * zl
    g = (bm[6] * bm[6]) / (bm[7] * bm[7])
    dzf = zl - bm[10]
    return r2 - bm[6] * bm[6] - g * dzf * dzf

cdef inline double beam_entry(const double* bm, double px, double py, double pz,
                              double vx, double vy, double vz) nogil:
    cdef double dx, dy, dz, zl, vk, r2, g, dzf, a, b, c
    dx = px - bm[3]
    dy = py - bm[4]
    dz = pz - bm[5]
    zl = dx * bm[0] + dy * bm[1] + dz * bm[2]
    vk = vx * bm[0] + vy * bm[1] + vz * bm[2]
    r2 = dx * dx + dy * dy + dz * dz - zl * zl
    g = (bm[6] * bm[6]) / (bm[7] * bm[7])
    dzf = zl - bm[10]
    a = vx * vx + vy * vy + vz * vz - vk * vk - g * vk * vk
    b = 2.0 * (dx * vx + dy * vy + dz * vz - zl * vk - g * vk * dzf)
    c = r2 - bm[6] * bm[6] - g * dzf * dzf
    if c <= 0.0:
        return 0.0
    return first_inside_quadratic(a, b, c)

cdef inline double beam_saturation(const double* bm, double px, double py, double pz,
                                   double vx, double vy, double vz,
                                   double kmag, double gamma) nogil:
    cdef double dx, dy, dz, zl, r2, u, w2, s0g, kv, d
    dx = px - bm[3]
    dy = py - bm[4]
    dz = pz - bm[5]
    zl = dx * bm[0] + dy * bm[1] + dz * bm[2]
    r2 = dx * dx + dy * dy + dz * dz - zl * zl
    if r2 < 0.0:
        r2 = 0.0
    u = (zl - bm[10]) / bm[7]
    w2 = bm[6] * bm[6] * (1.0 + u * u)
    s0g = bm[8] * (bm[6] * bm[6] / w2) * exp(-2.0 * r2 / w2)
    kv = kmag * (bm[0] * vx + bm[1] * vy + bm[2] * vz)
    d = 2.0 * (bm[9] - kv) / gamma
    return s0g / (1.0 + d * d)

cdef inline double ray_tube(double px, double py, double pz,
                            double vx, double vy, double vz,
                            double cx, double cy, double cz,
                            double ax, double ay, double az,
                            double wc, double hg) nogil:
    cdef double dx, dy, dz, pa, va, dpx, dpy, dpz, vpx, vpy, vpz
    cdef double a, b, c, disc, sq, r_lo, r_hi, a1, a2, ax_lo, ax_hi, lo, hi
    dx = px - cx
    dy = py - cy
    dz = pz - cz
    pa = dx * ax + dy * ay + dz * az
    va = vx * ax + vy * ay + vz * az
    dpx = dx - pa * ax
    dpy = dy - pa * ay
    dpz = dz - pa * az
    vpx = vx - va * ax
    vpy = vy - va * ay
    vpz = vz - va * az
    a = vpx * vpx + vpy * vpy + vpz * vpz
    b = 2.0 * (dpx * vpx + dpy * vpy + dpz * vpz)
    c = dpx * dpx + dpy * dpy + dpz * dpz - wc * wc
    if a > 0.0:
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            return INFINITY
        sq = sqrt(disc)
        r_lo = (-b - sq) / (2.0 * a)
        r_hi = (-b + sq) / (2.0 * a)
    else:
        if c > 0.0:
            return INFINITY
        r_lo = -INFINITY
        r_hi = INFINITY
    if va != 0.0:
        a1 = (-hg - pa) / va
        a2 = (hg - pa) / va
        if a1 <= a2:
            ax_lo = a1
            ax_hi = a2
        else:
            ax_lo = a2
            ax_hi = a1
    else:
        if pa < -hg or pa > hg:
            return INFINITY
        ax_lo = -INFINITY
        ax_hi = INFINITY
    lo = r_lo if r_lo > ax_lo else ax_lo
    hi = r_hi if r_hi < ax_hi else ax_hi
    if lo < 0.0:
        lo = 0.0
    if lo > hi:
        return INFINITY
    return lo

cdef inline double ray_box_exit(double px, double py, double pz,
                                double vx, double vy, double vz,
                                double b0, double b1, double b2,
                                double b3, double b4, double b5) nogil:
    cdef double s = INFINITY
    cdef double t
    if vx > 0.0:
        t = (b1 - px) / vx
        if t < s:
            s = t
    elif vx < 0.0:
        t = (b0 - px) / vx
        if t < s:
            s = t
    if vy > 0.0:
        t = (b3 - py) / vy
        if t < s:
            s = t
    elif vy < 0.0:
        t = (b2 - py) / vy
        if t < s:
            s = t
    if vz > 0.0:
        t = (b5 - pz) / vz
        if t < s:
            s = t
    elif vz < 0.0:
        t = (b4 - pz) / vz
        if t < s:
            s = t
    if s < 0.0:
        s = 0.0
    return s

# --- per-atom state machine (twin of pykernel.run_atom, bulk path) ----------

cdef void run_atom(const double* scal, const long long* iscal,
                   const double* beams, const long long* bints,
                   const double* cg_exc, const double* cg_cross,
                   const double* dec_minus,
                   u64 seed, long long idx,
                   long long* out_outcome, long long* out_events,
                   double* out_final, double* out_mexit,
                   long long* out_internal) nogil:
    cdef Rng kin, intr
    cdef double gamma, kmag, vr
    cdef long long engine, cavity, step_cap, nb
    cdef double ccx, ccy, ccz, cax, cay, caz, cwc, chg
    cdef double b0, b1, b2, b3, b4, b5
    cdef double u1, u2, u3, u4, ua, ub, gsn, rr, psi, sx, sy, rv, psiv, svx, svy, svz
    cdef double r00, r01, r02, r10, r11, r12, r20, r21, r22
    cdef double px, py, pz, vx, vy, vz, t
    cdef long long m, axis, events, iters, ib, j, e
    cdef bint inside, entered, exit_fresh, seek, have_mexit
    cdef double s_w[MAX_BEAMS]
    cdef double s, s_t, gamma_p, uw, dt, s_c, s_b, s_e, se, us, target, cum
    cdef double u5, u6, cth, sth, ph
    cdef double mexit0, mexit1, mexit2, mexit3, mexit4, mexit5, mexit6
    cdef long long outcome

    rng_init(&kin, seed, <u64>(2 * idx))
    rng_init(&intr, seed, <u64>(2 * idx + 1))

    gamma = scal[0]
    kmag = scal[1]
    vr = scal[2]
    engine = iscal[0]
    cavity = iscal[1]
    step_cap = iscal[2]
    nb = iscal[3]

    ccx = scal[19]
    ccy = scal[20]
    ccz = scal[21]
    cax = scal[22]
    cay = scal[23]
    caz = scal[24]
    cwc = scal[25]
    chg = scal[26]
    b0 = scal[27]
    b1 = scal[28]
    b2 = scal[29]
    b3 = scal[30]
    b4 = scal[31]
    b5 = scal[32]

    # source sampling (same draw order as pykernel)
    u1 = rng_uniform(&kin)
    u2 = rng_uniform(&kin)
    rr = scal[6] * sqrt(u1)
    psi = TWO_PI * u2
    sx = rr * cos(psi)
    sy = rr * sin(psi)
    u3 = rng_uniform(&kin)
    u4 = rng_uniform(&kin)
    rv = scal[7] * sqrt(u3)
    psiv = TWO_PI * u4
    svx = rv * cos(psiv)
    svy = rv * sin(psiv)
    while True:
        ua = rng_uniform(&kin)
        ub = rng_uniform(&kin)
        gsn = sqrt(-2.0 * log(ua)) * cos(TWO_PI * ub)
        svz = scal[8] + scal[9] * gsn
        if svz > 0.0:
            break
    r00 = scal[10]
    r01 = scal[11]
    r02 = scal[12]
    r10 = scal[13]
    r11 = scal[14]
    r12 = scal[15]
    r20 = scal[16]
    r21 = scal[17]
    r22 = scal[18]
    px = scal[3] + r00 * sx + r01 * sy
    py = scal[4] + r10 * sx + r11 * sy
    pz = scal[5] + r20 * sx + r21 * sy
    vx = r00 * svx + r01 * svy + r02 * svz
    vy = r10 * svx + r11 * svy + r12 * svz
    vz = r20 * svx + r21 * svy + r22 * svz
    t = 0.0
    m = -1

    axis = 0
    if engine == 2:
        if m < 0:
            m = 0 if rng_uniform(&intr) < 0.5 else 1
    else:
        m = -1

    events = 0
    iters = 0
    entered = False
    exit_fresh = False
    have_mexit = False
    mexit0 = mexit1 = mexit2 = mexit3 = mexit4 = mexit5 = mexit6 = 0.0
    outcome = 1  # OUTCOME_WALL

    while True:
        iters += 1
        if iters > step_cap:
            outcome = 2  # OUTCOME_CAP
            break

        inside = False
        if engine != 0:
            for ib in range(nb):
                if beam_c0(beams + 11 * ib, px, py, pz) <= 0.0:
                    inside = True
                    break

        if inside:
            entered = True
            exit_fresh = False
            s_t = 0.0
            for ib in range(nb):
                s = beam_saturation(beams + 11 * ib, px, py, pz, vx, vy, vz, kmag, gamma)
                if engine == 2:
                    if bints[2 * ib + 1] == axis:
                        s = s * cg_exc[2 * m + (bints[2 * ib] + 1) / 2]
                    else:
                        s = s * cg_cross[m]
                s_w[ib] = s
                s_t += s
            gamma_p = 0.5 * gamma * s_t / (1.0 + s_t)

            if gamma_p > 0.0:
                uw = rng_uniform(&kin)
                dt = -log(uw) / gamma_p
                if cavity != 0:
                    s_c = ray_tube(px, py, pz, vx, vy, vz, ccx, ccy, ccz,
                                   cax, cay, caz, cwc, chg)
                else:
                    s_c = INFINITY
                s_b = ray_box_exit(px, py, pz, vx, vy, vz, b0, b1, b2, b3, b4, b5)
                if s_c <= dt and s_c <= s_b:
                    px += vx * s_c
                    py += vy * s_c
                    pz += vz * s_c
                    t += s_c
                    outcome = 0  # OUTCOME_COUPLED
                    break
                if s_b <= dt:
                    px += vx * s_b
                    py += vy * s_b
                    pz += vz * s_b
                    t += s_b
                    outcome = 1
                    break
                px += vx * dt
                py += vy * dt
                pz += vz * dt
                t += dt

                us = rng_uniform(&kin)
                target = us * s_t
                cum = 0.0
                j = nb - 1
                for ib in range(nb):
                    cum += s_w[ib]
                    if target <= cum:
                        j = ib
                        break

                if engine == 2:
                    if bints[2 * j + 1] != axis:
                        m = 0 if rng_uniform(&intr) < 0.5 else 1
                        axis = bints[2 * j + 1]
                    e = m + bints[2 * j] + 1
                    m = 0 if rng_uniform(&intr) < dec_minus[e] else 1

                vx += vr * beams[11 * j]
                vy += vr * beams[11 * j + 1]
                vz += vr * beams[11 * j + 2]
                u5 = rng_uniform(&kin)
                u6 = rng_uniform(&kin)
                cth = 2.0 * u5 - 1.0
                sth = sqrt(1.0 - cth * cth)
                ph = TWO_PI * u6
                vx += vr * sth * cos(ph)
                vy += vr * sth * sin(ph)
                vz += vr * cth

                events += 1
                continue
            seek = False
        else:
            if entered and not exit_fresh:
                mexit0 = t
                mexit1 = px
                mexit2 = py
                mexit3 = pz
                mexit4 = vx
                mexit5 = vy
                mexit6 = vz
                have_mexit = True
                exit_fresh = True
            seek = engine != 0

        if cavity != 0:
            s_c = ray_tube(px, py, pz, vx, vy, vz, ccx, ccy, ccz,
                           cax, cay, caz, cwc, chg)
        else:
            s_c = INFINITY
        s_b = ray_box_exit(px, py, pz, vx, vy, vz, b0, b1, b2, b3, b4, b5)
        s_e = INFINITY
        if seek:
            for ib in range(nb):
                se = beam_entry(beams + 11 * ib, px, py, pz, vx, vy, vz)
                if se < s_e:
                    s_e = se
        if s_c <= s_b and s_c <= s_e:
            px += vx * s_c
            py += vy * s_c
            pz += vz * s_c
            t += s_c
            outcome = 0
            break
        if s_e < s_b:
            s_e += ENTRY_NUDGE
            px += vx * s_e
            py += vy * s_e
            pz += vz * s_e
            t += s_e
            continue
        px += vx * s_b
        py += vy * s_b
        pz += vz * s_b
        t += s_b
        outcome = 1
        break

    if entered and not exit_fresh:
        mexit0 = t
        mexit1 = px
        mexit2 = py
        mexit3 = pz
        mexit4 = vx
        mexit5 = vy
        mexit6 = vz
        have_mexit = True

    out_outcome[0] = outcome
    out_events[0] = events
    out_final[0] = t
    out_final[1] = px
    out_final[2] = py
    out_final[3] = pz
    out_final[4] = vx
    out_final[5] = vy
    out_final[6] = vz
    if have_mexit:
        out_mexit[0] = mexit0
        out_mexit[1] = mexit1
        out_mexit[2] = mexit2
        out_mexit[3] = mexit3
        out_mexit[4] = mexit4
        out_mexit[5] = mexit5
        out_mexit[6] = mexit6
    out_internal[0] = m


def simulate_chunk(const double[::1] scal, const long long[::1] iscal,
                   const double[:, ::1] beams, const long long[:, ::1] bints,
                   const double[:, ::1] cg_exc, const double[::1] cg_cross,
                   const double[::1] dec_minus,
                   unsigned long long seed, long long lo, long long hi,
                   long long[::1] outcome, long long[::1] nevents,
                   double[:, ::1] final, double[:, ::1] mexit,
                   long long[::1] internal):
    """Run atoms [lo, hi) into preallocated output arrays; releases the GIL."""
    cdef long long i
    if iscal[3] > MAX_BEAMS:
        raise ValueError("too many beams for the compiled kernel")
    with nogil:
        for i in range(lo, hi):
            run_atom(&scal[0], &iscal[0], &beams[0, 0], &bints[0, 0],
                     &cg_exc[0, 0], &cg_cross[0], &dec_minus[0],
                     seed, i,
                     &outcome[i], &nevents[i], &final[i, 0], &mexit[i, 0],
                     &internal[i])


def philox_raw(unsigned long long seed, unsigned long long stream, int n):
    """First n raw 64-bit words of a stream (for cross-checking rng.py)."""
    cdef Rng r
    rng_init(&r, seed, stream)
    out = []
    cdef int i
    cdef u64 x
    for i in range(n):
        if r.pos == 4:
            rng_block(&r)
        x = r.buf[r.pos]
        r.pos += 1
        out.append(x)
    return out
