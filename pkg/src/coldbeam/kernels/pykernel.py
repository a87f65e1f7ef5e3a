"""Pure-Python reference kernel for the per-atom simulation loop.

This module defines the event-by-event algorithm: source sampling, ballistic
flight between boundaries, the scattering loop inside the beam region, the
cavity-coupling test, and termination. kernels/_fast.pyx is a line-by-line C
transliteration of the functions below and must stay in lockstep; any change
here must be mirrored there (the test suite compares the two bit for bit).

All floating-point expressions are written in the exact evaluation order the
C code uses, and all transcendental calls go through libm via ``math``.
"""

from __future__ import annotations

import math

from ..rng import RngStream
from .layout import (
    B_AX,
    B_AY,
    B_AZ,
    B_DET,
    B_FOCUS,
    B_KX,
    B_KY,
    B_KZ,
    B_S0,
    B_W0,
    B_ZR,
    BI_AXIS,
    BI_POL,
    ENGINE_NONE,
    ENGINE_SIX_LEVEL,
    I_CAVITY,
    I_ENGINE,
    I_NBEAMS,
    I_STEP_CAP,
    OUTCOME_CAP,
    OUTCOME_COUPLED,
    OUTCOME_EXITED,
    OUTCOME_TRUNCATED,
    OUTCOME_WALL,
    S_BOX,
    S_CAV_AX,
    S_CAV_AY,
    S_CAV_AZ,
    S_CAV_CX,
    S_CAV_CY,
    S_CAV_CZ,
    S_CAV_HG,
    S_CAV_WC,
    S_GAMMA,
    S_KMAG,
    S_ROT,
    S_SRC_CX,
    S_SRC_CY,
    S_SRC_CZ,
    S_SRC_RADIUS,
    S_SRC_SIGMA,
    S_SRC_V0,
    S_SRC_VTMAX,
    S_VR,
)

INF = math.inf
TWO_PI = 6.283185307179586
# Nudge past a region boundary after a ballistic entry so a grazing
# trajectory cannot stall on the surface (0.1 ns ~ 1.4 nm at 14 m/s).
ENTRY_NUDGE = 1e-10


def _first_inside_quadratic(a, b, c):
    """Smallest s >= 0 with a s^2 + b s + c <= 0, or inf. Assumes c > 0."""
    if a == 0.0:
        if b >= 0.0:
            return INF
        return -c / b
    disc = b * b - 4.0 * a * c
    if a > 0.0:
        if disc < 0.0:
            return INF
        sq = math.sqrt(disc)
        s2 = (-b + sq) / (2.0 * a)
        if s2 < 0.0:
            return INF
        s1 = (-b - sq) / (2.0 * a)
        return s1 if s1 > 0.0 else 0.0
    # a < 0: the parabola opens down; with c > 0 we sit between the roots.
    if disc < 0.0:
        return INF
    sq = math.sqrt(disc)
    r1 = (-b - sq) / (2.0 * a)
    r2 = (-b + sq) / (2.0 * a)
    hi = r1 if r1 > r2 else r2
    return hi if hi > 0.0 else 0.0


def _beam_c0(bm, px, py, pz):
    """r^2 - w(z)^2 at a point: <= 0 means inside this beam's 1/e^2 envelope."""
    dx = px - bm[B_AX]
    dy = py - bm[B_AY]
    dz = pz - bm[B_AZ]
    zl = dx * bm[B_KX] + dy * bm[B_KY] + dz * bm[B_KZ]
    r2 = dx * dx + dy * dy + dz * dz - zl * zl
    g = (bm[B_W0] * bm[B_W0]) / (bm[B_ZR] * bm[B_ZR])
    dzf = zl - bm[B_FOCUS]
    return r2 - bm[B_W0] * bm[B_W0] - g * dzf * dzf


def _beam_entry(bm, px, py, pz, vx, vy, vz):
    """First s >= 0 at which the ray enters this beam's envelope, or inf."""
    dx = px - bm[B_AX]
    dy = py - bm[B_AY]
    dz = pz - bm[B_AZ]
    zl = dx * bm[B_KX] + dy * bm[B_KY] + dz * bm[B_KZ]
    vk = vx * bm[B_KX] + vy * bm[B_KY] + vz * bm[B_KZ]
    r2 = dx * dx + dy * dy + dz * dz - zl * zl
    g = (bm[B_W0] * bm[B_W0]) / (bm[B_ZR] * bm[B_ZR])
    dzf = zl - bm[B_FOCUS]
    a = vx * vx + vy * vy + vz * vz - vk * vk - g * vk * vk
    b = 2.0 * (dx * vx + dy * vy + dz * vz - zl * vk - g * vk * dzf)
    c = r2 - bm[B_W0] * bm[B_W0] - g * dzf * dzf
    if c <= 0.0:
        return 0.0
    return _first_inside_quadratic(a, b, c)


def _beam_saturation(bm, px, py, pz, vx, vy, vz, kmag, gamma):
    """Doppler-shifted saturation parameter of one beam at (pos, vel)."""
    dx = px - bm[B_AX]
    dy = py - bm[B_AY]
    dz = pz - bm[B_AZ]
    zl = dx * bm[B_KX] + dy * bm[B_KY] + dz * bm[B_KZ]
    r2 = dx * dx + dy * dy + dz * dz - zl * zl
    if r2 < 0.0:
        r2 = 0.0
    u = (zl - bm[B_FOCUS]) / bm[B_ZR]
    w2 = bm[B_W0] * bm[B_W0] * (1.0 + u * u)
    s0g = bm[B_S0] * (bm[B_W0] * bm[B_W0] / w2) * math.exp(-2.0 * r2 / w2)
    kv = kmag * (bm[B_KX] * vx + bm[B_KY] * vy + bm[B_KZ] * vz)
    d = 2.0 * (bm[B_DET] - kv) / gamma
    return s0g / (1.0 + d * d)


def _ray_tube(px, py, pz, vx, vy, vz, cx, cy, cz, ax, ay, az, wc, hg):
    """First s >= 0 at which the ray is inside the coupling tube, or inf.

    Tube: perpendicular distance from the cavity axis <= wc while the axial
    coordinate lies within the mirror half-gap.
    """
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
            return INF
        sq = math.sqrt(disc)
        r_lo = (-b - sq) / (2.0 * a)
        r_hi = (-b + sq) / (2.0 * a)
    else:
        if c > 0.0:
            return INF
        r_lo = -INF
        r_hi = INF
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
            return INF
        ax_lo = -INF
        ax_hi = INF
    lo = r_lo if r_lo > ax_lo else ax_lo
    hi = r_hi if r_hi < ax_hi else ax_hi
    if lo < 0.0:
        lo = 0.0
    if lo > hi:
        return INF
    return lo


def _ray_box_exit(px, py, pz, vx, vy, vz, b0, b1, b2, b3, b4, b5):
    """Time to the first box-face crossing (0 if already outside)."""
    s = INF
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


def run_atom(
    scal,
    iscal,
    beams,
    bints,
    cg_exc,
    cg_cross,
    dec_minus,
    kin: RngStream,
    intr: RngStream,
    init_state=None,
    trace=None,
    stop_on_exit=False,
    max_events=None,
):
    """Simulate one atom from source (or a given state) to termination.

    Returns (outcome, n_events, final7, mexit7_or_None, internal) where the
    7-tuples are (t, x, y, z, vx, vy, vz) and mexit is the state just after
    the atom last left the beam region (None if it never entered).
    """
    gamma = scal[S_GAMMA]
    kmag = scal[S_KMAG]
    vr = scal[S_VR]
    engine = iscal[I_ENGINE]
    cavity = iscal[I_CAVITY]
    step_cap = iscal[I_STEP_CAP]
    nb = iscal[I_NBEAMS]

    ccx = scal[S_CAV_CX]
    ccy = scal[S_CAV_CY]
    ccz = scal[S_CAV_CZ]
    cax = scal[S_CAV_AX]
    cay = scal[S_CAV_AY]
    caz = scal[S_CAV_AZ]
    cwc = scal[S_CAV_WC]
    chg = scal[S_CAV_HG]
    b0 = scal[S_BOX]
    b1 = scal[S_BOX + 1]
    b2 = scal[S_BOX + 2]
    b3 = scal[S_BOX + 3]
    b4 = scal[S_BOX + 4]
    b5 = scal[S_BOX + 5]

    if init_state is None:
        # Source sampling: position disk, transverse-velocity disk, then
        # Box-Muller pairs until the longitudinal speed is positive.
        u1 = kin.uniform()
        u2 = kin.uniform()
        rr = scal[S_SRC_RADIUS] * math.sqrt(u1)
        psi = TWO_PI * u2
        sx = rr * math.cos(psi)
        sy = rr * math.sin(psi)
        u3 = kin.uniform()
        u4 = kin.uniform()
        rv = scal[S_SRC_VTMAX] * math.sqrt(u3)
        psiv = TWO_PI * u4
        svx = rv * math.cos(psiv)
        svy = rv * math.sin(psiv)
        while True:
            ua = kin.uniform()
            ub = kin.uniform()
            gsn = math.sqrt(-2.0 * math.log(ua)) * math.cos(TWO_PI * ub)
            svz = scal[S_SRC_V0] + scal[S_SRC_SIGMA] * gsn
            if svz > 0.0:
                break
        r00 = scal[S_ROT]
        r01 = scal[S_ROT + 1]
        r02 = scal[S_ROT + 2]
        r10 = scal[S_ROT + 3]
        r11 = scal[S_ROT + 4]
        r12 = scal[S_ROT + 5]
        r20 = scal[S_ROT + 6]
        r21 = scal[S_ROT + 7]
        r22 = scal[S_ROT + 8]
        px = scal[S_SRC_CX] + r00 * sx + r01 * sy
        py = scal[S_SRC_CY] + r10 * sx + r11 * sy
        pz = scal[S_SRC_CZ] + r20 * sx + r21 * sy
        vx = r00 * svx + r01 * svy + r02 * svz
        vy = r10 * svx + r11 * svy + r12 * svz
        vz = r20 * svx + r21 * svy + r22 * svz
        t = 0.0
        m = -1
    else:
        t, px, py, pz, vx, vy, vz, m = init_state

    axis = 0
    if engine == ENGINE_SIX_LEVEL:
        if m < 0:
            m = 0 if intr.uniform() < 0.5 else 1
    else:
        m = -1

    if trace is not None:
        trace.append((t, px, py, pz, vx, vy, vz))

    events = 0
    iters = 0
    entered = False
    exit_fresh = False
    mexit = None
    outcome = OUTCOME_WALL
    s_w = [0.0] * nb

    while True:
        iters += 1
        if iters > step_cap:
            outcome = OUTCOME_CAP
            break

        inside = False
        if engine != ENGINE_NONE:
            for ib in range(nb):
                if _beam_c0(beams[ib], px, py, pz) <= 0.0:
                    inside = True
                    break

        if inside:
            entered = True
            exit_fresh = False
            s_t = 0.0
            for ib in range(nb):
                s = _beam_saturation(beams[ib], px, py, pz, vx, vy, vz, kmag, gamma)
                if engine == ENGINE_SIX_LEVEL:
                    if bints[ib][BI_AXIS] == axis:
                        s = s * cg_exc[m][(bints[ib][BI_POL] + 1) // 2]
                    else:
                        s = s * cg_cross[m]
                s_w[ib] = s
                s_t += s
            gamma_p = 0.5 * gamma * s_t / (1.0 + s_t)

            if gamma_p > 0.0:
                uw = kin.uniform()
                dt = -math.log(uw) / gamma_p
                if cavity != 0:
                    s_c = _ray_tube(
                        px, py, pz, vx, vy, vz, ccx, ccy, ccz, cax, cay, caz, cwc, chg
                    )
                else:
                    s_c = INF
                s_b = _ray_box_exit(px, py, pz, vx, vy, vz, b0, b1, b2, b3, b4, b5)
                if s_c <= dt and s_c <= s_b:
                    px += vx * s_c
                    py += vy * s_c
                    pz += vz * s_c
                    t += s_c
                    outcome = OUTCOME_COUPLED
                    break
                if s_b <= dt:
                    px += vx * s_b
                    py += vy * s_b
                    pz += vz * s_b
                    t += s_b
                    outcome = OUTCOME_WALL
                    break
                px += vx * dt
                py += vy * dt
                pz += vz * dt
                t += dt

                us = kin.uniform()
                target = us * s_t
                cum = 0.0
                j = nb - 1
                for ib in range(nb):
                    cum += s_w[ib]
                    if target <= cum:
                        j = ib
                        break

                if engine == ENGINE_SIX_LEVEL:
                    if bints[j][BI_AXIS] != axis:
                        m = 0 if intr.uniform() < 0.5 else 1
                        axis = bints[j][BI_AXIS]
                    e = m + bints[j][BI_POL] + 1
                    m = 0 if intr.uniform() < dec_minus[e] else 1

                vx += vr * beams[j][B_KX]
                vy += vr * beams[j][B_KY]
                vz += vr * beams[j][B_KZ]
                u5 = kin.uniform()
                u6 = kin.uniform()
                cth = 2.0 * u5 - 1.0
                sth = math.sqrt(1.0 - cth * cth)
                ph = TWO_PI * u6
                vx += vr * sth * math.cos(ph)
                vy += vr * sth * math.sin(ph)
                vz += vr * cth

                events += 1
                if trace is not None:
                    trace.append((t, px, py, pz, vx, vy, vz))
                if max_events is not None and events >= max_events:
                    outcome = OUTCOME_TRUNCATED
                    break
                continue
            # All rates vanish (e.g. s0 = 0): ballistic flight, but do not
            # search for a region entry we are already inside of.
            seek = False
        else:
            if entered and not exit_fresh:
                mexit = (t, px, py, pz, vx, vy, vz)
                exit_fresh = True
            if stop_on_exit and entered:
                outcome = OUTCOME_EXITED
                break
            seek = engine != ENGINE_NONE

        if cavity != 0:
            s_c = _ray_tube(
                px, py, pz, vx, vy, vz, ccx, ccy, ccz, cax, cay, caz, cwc, chg
            )
        else:
            s_c = INF
        s_b = _ray_box_exit(px, py, pz, vx, vy, vz, b0, b1, b2, b3, b4, b5)
        s_e = INF
        if seek:
            for ib in range(nb):
                se = _beam_entry(beams[ib], px, py, pz, vx, vy, vz)
                if se < s_e:
                    s_e = se
        if s_c <= s_b and s_c <= s_e:
            px += vx * s_c
            py += vy * s_c
            pz += vz * s_c
            t += s_c
            outcome = OUTCOME_COUPLED
            break
        if s_e < s_b:
            s_e += ENTRY_NUDGE
            px += vx * s_e
            py += vy * s_e
            pz += vz * s_e
            t += s_e
            if trace is not None:
                trace.append((t, px, py, pz, vx, vy, vz))
            continue
        px += vx * s_b
        py += vy * s_b
        pz += vz * s_b
        t += s_b
        outcome = OUTCOME_WALL
        break

    if entered and not exit_fresh:
        mexit = (t, px, py, pz, vx, vy, vz)
    if trace is not None:
        trace.append((t, px, py, pz, vx, vy, vz))
    return outcome, events, (t, px, py, pz, vx, vy, vz), mexit, m


def simulate_chunk(
    scal,
    iscal,
    beams,
    bints,
    cg_exc,
    cg_cross,
    dec_minus,
    seed,
    lo,
    hi,
    outcome,
    nevents,
    final,
    mexit,
    internal,
):
    """Run atoms [lo, hi) into preallocated output arrays (bulk entry point)."""
    scal_t = tuple(float(v) for v in scal)
    iscal_t = tuple(int(v) for v in iscal)
    beams_t = tuple(tuple(float(v) for v in row) for row in beams)
    bints_t = tuple(tuple(int(v) for v in row) for row in bints)
    cg_exc_t = tuple(tuple(float(v) for v in row) for row in cg_exc)
    cg_cross_t = tuple(float(v) for v in cg_cross)
    dec_t = tuple(float(v) for v in dec_minus)
    for i in range(lo, hi):
        kin = RngStream(seed, 2 * i)
        intr = RngStream(seed, 2 * i + 1)
        out, nev, fin, mex, m = run_atom(
            scal_t, iscal_t, beams_t, bints_t, cg_exc_t, cg_cross_t, dec_t, kin, intr
        )
        outcome[i] = out
        nevents[i] = nev
        for k in range(7):
            final[i, k] = fin[k]
        if mex is not None:
            for k in range(7):
                mexit[i, k] = mex[k]
        internal[i] = m
