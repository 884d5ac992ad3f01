"""Compiled per-step kernels used by the engine.

Same formulas as :mod:`pedsim.forces`, evaluated for a whole population.
Every sum runs in ascending pedestrian id, so results are bit-reproducible.
"""

import math

import numpy as np
from numba import njit

# Layout of the packed parameter vector.
A_MEAN, B_MEAN, K_BORDER, K_PED, A_ISO, B_ISO, TAU, FRICTION = range(8)
SIDE_SIGN, VD, LAMBDA, LS, N_LIMIT, SIDE_STRENGTH, V_MAX_FACTOR = range(8, 15)
N_PARAMS = 15

MIN_MOTION_SPEED = 0.01
HEAD_ON_COS = 0.9


def pack_params(p) -> np.ndarray:
    side = {"right": 1.0, "left": -1.0, "none": 0.0}[p.side_preference.value]
    return np.array(
        [
            p.a_social_mean,
            p.b_social_mean,
            p.k_physical_border,
            p.k_physical_ped,
            p.a_social_iso,
            p.b_social_iso,
            p.tau,
            p.friction_coefficient,
            side,
            p.velocity_dependence,
            p.lambda_anisotropy,
            p.longitudinal_scale,
            float(p.neighbor_limit),
            p.side_bias_strength,
            p.v_max_factor,
        ]
    )


@njit(cache=True)
def desired_directions(pos, rad, active, half_width, depth, out):
    n = pos.shape[0]
    for i in range(n):
        if not active[i]:
            out[i, 0] = 0.0
            out[i, 1] = 0.0
            continue
        x = pos[i, 0]
        y = pos[i, 1]
        inset = max(half_width - rad[i], 0.0)
        if x > depth or (x >= 0.0 and abs(y) <= inset):
            out[i, 0] = 1.0
            out[i, 1] = 0.0
            continue
        ty = min(max(y, -inset), inset)
        dx = -x
        dy = ty - y
        norm = math.hypot(dx, dy)
        out[i, 0] = dx / norm
        out[i, 1] = dy / norm


@njit(cache=True)
def _wall_term(x, y, r, wall, k):
    ax = wall[0]
    ay = wall[1]
    abx = wall[2] - ax
    aby = wall[3] - ay
    t = ((x - ax) * abx + (y - ay) * aby) / (abx * abx + aby * aby)
    sided = wall[6] != 0.0
    if sided and 0.0 < t < 1.0:
        nx = wall[4]
        ny = wall[5]
        signed = (x - ax) * nx + (y - ay) * ny
        thickness = r if wall[7] < 0.0 else wall[7]
        if -thickness < signed <= 0.0:
            m = k * (r - signed)
            return m * nx, m * ny, 0
    t = min(max(t, 0.0), 1.0)
    dx = x - (ax + t * abx)
    dy = y - (ay + t * aby)
    d = math.hypot(dx, dy)
    overlap = max(0.0, r - d)
    if overlap == 0.0:
        return 0.0, 0.0, 0
    if d == 0.0:
        if not sided:
            return 0.0, 0.0, 1
        m = k * overlap
        return m * wall[4], m * wall[5], 0
    m = k * overlap / d
    return m * dx, m * dy, 0


@njit(cache=True)
def accelerations(pos, vel, v0, rad, active, walls, edes, prm, comp):
    """Fill ``comp[i, c, :]`` with the five force components of pedestrian i.

    Components: driving, social_mean, social_iso, contact, side_bias.
    Returns -1 on success or the id of a pedestrian with degenerate geometry.
    """
    n = pos.shape[0]
    n_lim = int(prm[N_LIMIT])
    ls = prm[LS]
    lam = prm[LAMBDA]
    vd = prm[VD]
    side_sign = prm[SIDE_SIGN]
    best_d = np.empty(n_lim)
    best_id = np.empty(n_lim, dtype=np.int64)
    for i in range(n):
        for c in range(5):
            comp[i, c, 0] = 0.0
            comp[i, c, 1] = 0.0
        if not active[i]:
            continue
        xi = pos[i, 0]
        yi = pos[i, 1]
        vxi = vel[i, 0]
        vyi = vel[i, 1]
        ri = rad[i]
        exd = edes[i, 0]
        eyd = edes[i, 1]

        comp[i, 0, 0] = (v0[i] * exd - vxi) / prm[TAU]
        comp[i, 0, 1] = (v0[i] * eyd - vyi) / prm[TAU]

        speed = math.hypot(vxi, vyi)
        if speed < MIN_MOTION_SPEED:
            ex = exd
            ey = eyd
        else:
            ex = vxi / speed
            ey = vyi / speed

        # one pass over all others: contact forces (ascending j) and the
        # k nearest by (squared distance, id), ascending j keeping the lower
        # id on ties
        cx = 0.0
        cy = 0.0
        cnt = 0
        for j in range(n):
            if j == i or not active[j]:
                continue
            dx = xi - pos[j, 0]
            dy = yi - pos[j, 1]
            d2 = dx * dx + dy * dy
            rs = ri + rad[j]
            if d2 < rs * rs:
                if d2 == 0.0:
                    return i
                d = math.sqrt(d2)
                overlap = rs - d
                if overlap > 0.0:
                    nx = dx / d
                    ny = dy / d
                    tx = -ny
                    ty = nx
                    dvt = (vel[j, 0] - vxi) * tx + (vel[j, 1] - vyi) * ty
                    cx += prm[K_PED] * overlap * nx + prm[FRICTION] * overlap * dvt * tx
                    cy += prm[K_PED] * overlap * ny + prm[FRICTION] * overlap * dvt * ty
            if cnt == n_lim and d2 >= best_d[cnt - 1]:
                continue
            if cnt < n_lim:
                cnt += 1
            slot = cnt - 1
            while slot > 0 and best_d[slot - 1] > d2:
                best_d[slot] = best_d[slot - 1]
                best_id[slot] = best_id[slot - 1]
                slot -= 1
            best_d[slot] = d2
            best_id[slot] = j
        # sum in ascending id order
        for a in range(1, cnt):
            v = best_id[a]
            b = a
            while b > 0 and best_id[b - 1] > v:
                best_id[b] = best_id[b - 1]
                b -= 1
            best_id[b] = v

        mx = 0.0
        my = 0.0
        ix = 0.0
        iy = 0.0
        sx_acc = 0.0
        sy_acc = 0.0
        for a in range(cnt):
            j = best_id[a]
            dxij = xi - pos[j, 0]
            dyij = yi - pos[j, 1]
            d = math.sqrt(dxij * dxij + dyij * dyij)
            if d == 0.0:
                return i
            nx = dxij / d
            ny = dyij / d
            sx = -dxij
            sy = -dyij
            # separation and relative displacement in the motion frame
            s_par = ls * (sx * ex + sy * ey)
            s_perp = -sx * ey + sy * ex
            rvx = (vel[j, 0] - vxi) * vd
            rvy = (vel[j, 1] - vyi) * vd
            y_par = ls * (rvx * ex + rvy * ey)
            y_perp = -rvx * ey + rvy * ex
            ns = math.sqrt(s_par * s_par + s_perp * s_perp)
            nsy = math.sqrt((s_par - y_par) ** 2 + (s_perp - y_perp) ** 2)
            ny_ = math.sqrt(y_par * y_par + y_perp * y_perp)
            b_eff = 0.5 * math.sqrt(max((ns + nsy) ** 2 - ny_**2, 0.0))
            mag = prm[A_MEAN] * math.exp((ri + rad[j] - b_eff) / prm[B_MEAN])
            cos_phi = (ex * sx + ey * sy) / d
            w = lam + (1.0 - lam) * (1.0 + cos_phi) / 2.0
            fmx = mag * w * nx
            fmy = mag * w * ny
            mx += fmx
            my += fmy

            m_iso = prm[A_ISO] * math.exp((ri + rad[j] - d) / prm[B_ISO])
            ix += m_iso * nx
            iy += m_iso * ny

            if side_sign != 0.0:
                closing = (vel[j, 0] - vxi) * sx + (vel[j, 1] - vyi) * sy < 0.0
                if cos_phi > HEAD_ON_COS and closing:
                    fm = prm[SIDE_STRENGTH] * math.hypot(fmx, fmy)
                    if side_sign > 0.0:
                        sx_acc += fm * ey
                        sy_acc += fm * -ex
                    else:
                        sx_acc += fm * -ey
                        sy_acc += fm * ex
        comp[i, 1, 0] = mx
        comp[i, 1, 1] = my
        comp[i, 2, 0] = ix
        comp[i, 2, 1] = iy
        comp[i, 4, 0] = sx_acc
        comp[i, 4, 1] = sy_acc

        for k in range(walls.shape[0]):
            fx, fy, bad = _wall_term(xi, yi, ri, walls[k], prm[K_BORDER])
            if bad:
                return i
            cx += fx
            cy += fy
        comp[i, 3, 0] = cx
        comp[i, 3, 1] = cy
    return -1


@njit(cache=True)
def _confine(x, y, vx, vy, r, walls):
    """Put a center that slipped behind a sided wall back onto its line.

    The velocity component into the wall is dropped as well.
    """
    for k in range(walls.shape[0]):
        w = walls[k]
        if w[6] == 0.0:
            continue
        abx = w[2] - w[0]
        aby = w[3] - w[1]
        t = ((x - w[0]) * abx + (y - w[1]) * aby) / (abx * abx + aby * aby)
        if not (0.0 < t < 1.0):
            continue
        nx = w[4]
        ny = w[5]
        signed = (x - w[0]) * nx + (y - w[1]) * ny
        thickness = r if w[7] < 0.0 else w[7]
        if -thickness < signed < 0.0:
            x -= signed * nx
            y -= signed * ny
            vn = vx * nx + vy * ny
            if vn < 0.0:
                vx -= vn * nx
                vy -= vn * ny
    return x, y, vx, vy


@njit(cache=True)
def integrate(pos, vel, v0, rad, active, passage, comp, noise, prm, walls, dt, t0, measure_x, removal_x):
    """Semi-implicit Euler update in place.

    The acceleration is the sum of the five force components plus ``noise``.
    Returns -1, or the id of the first pedestrian whose acceleration is not
    finite (state is left untouched in that case).
    """
    n = pos.shape[0]
    for i in range(n):
        if not active[i]:
            continue
        for c in range(2):
            s = comp[i, 0, c] + comp[i, 1, c] + comp[i, 2, c] + comp[i, 3, c] + comp[i, 4, c] + noise[i, c]
            if not math.isfinite(s):
                return i
    vmax_f = prm[V_MAX_FACTOR]
    for i in range(n):
        if not active[i]:
            continue
        ax = comp[i, 0, 0] + comp[i, 1, 0] + comp[i, 2, 0] + comp[i, 3, 0] + comp[i, 4, 0] + noise[i, 0]
        ay = comp[i, 0, 1] + comp[i, 1, 1] + comp[i, 2, 1] + comp[i, 3, 1] + comp[i, 4, 1] + noise[i, 1]
        vx = vel[i, 0] + ax * dt
        vy = vel[i, 1] + ay * dt
        sp = math.hypot(vx, vy)
        vmax = vmax_f * v0[i]
        if sp > vmax:
            f = vmax / sp
            vx *= f
            vy *= f
        x_old = pos[i, 0]
        x_new = x_old + vx * dt
        y_new = pos[i, 1] + vy * dt
        x_new, y_new, vx, vy = _confine(x_new, y_new, vx, vy, rad[i], walls)
        vel[i, 0] = vx
        vel[i, 1] = vy
        pos[i, 0] = x_new
        pos[i, 1] = y_new
        if math.isnan(passage[i]) and x_old < measure_x <= x_new:
            passage[i] = t0 + dt * (measure_x - x_old) / (x_new - x_old)
        if x_new >= removal_x:
            active[i] = False
    return -1


@njit(cache=True)
def count_violations(pos, vel, v0, rad, active, prm, half_width, corridor_half, depth, tol_factor):
    """(wall penetrations deeper than tol_factor * radius, speed-clamp excesses).

    Penetration is measured against the bottleneck geometry: behind the
    corridor walls upstream, or inside the solid block flanking the passage.
    """
    n = pos.shape[0]
    pen = 0
    fast = 0
    for i in range(n):
        if not active[i]:
            continue
        if math.hypot(vel[i, 0], vel[i, 1]) > prm[V_MAX_FACTOR] * v0[i] * (1.0 + 1e-12):
            fast += 1
        x = pos[i, 0]
        ay = abs(pos[i, 1])
        if x < 0.0:
            depth_in = ay - corridor_half
        elif x <= depth:
            depth_in = min(x, ay - half_width)
        else:
            continue
        if depth_in > tol_factor * rad[i]:
            pen += 1
    return pen, fast
