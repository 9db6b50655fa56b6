"""Pure-Python twins of the compiled kernels.

Same arithmetic in the same order as _core.pyx, so results agree bitwise;
only speed differs. Kept dependency-free beyond numpy so the package works
without a C toolchain.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def _sech2(t: float) -> float:
    e = math.exp(-2.0 * abs(t))
    return 4.0 * e / ((1.0 + e) * (1.0 + e))


def _duality_v(prof: int, a: float, beta: float, x: float) -> float:
    t = x / a
    if abs(t) < 1e-3:
        if prof == 0:
            s3_0, s1_0 = -2.0, 1.0
        elif prof == 1:
            s3_0, s1_0 = -3.0, 1.0
        else:
            s3_0, s1_0 = -7.5, 1.875
        return (beta * s3_0 / (a * a * a)) / (1.0 + beta * s1_0 / a)
    if prof == 0:
        s = math.tanh(t)
        s2 = -2.0 * s * _sech2(t)
    elif prof == 1:
        u = 1.0 + t * t
        s = t / math.sqrt(u)
        s2 = -3.0 * t / (u * u * math.sqrt(u))
    else:
        if t >= 1.0 or t <= -1.0:
            return 0.0
        # chained products, not pow(): keeps the compiled twin bitwise
        s = (15.0 * t - 10.0 * t * t * t + 3.0 * t * t * t * t * t) / 8.0
        s2 = -7.5 * t * (1.0 - t * t)
    return (beta * s2 / (a * a)) / (x + beta * s)


def rk4_duality(prof: int, a: float, beta: float, k: float,
                h: float, n_steps: int, record_every: int):
    if n_steps % record_every != 0:
        raise ValueError("n_steps must be a multiple of record_every")
    n_rec = n_steps // record_every + 1
    xs = np.empty(n_rec)
    ps = np.empty(n_rec)
    ws = np.empty(n_rec)
    x, p, w = 0.0, 0.0, 1.0
    k2 = k * k
    j = 0
    for i in range(n_steps + 1):
        if i % record_every == 0:
            xs[j] = x
            ps[j] = p
            ws[j] = w
            j += 1
        if i == n_steps:
            break
        p1 = w
        w1 = (_duality_v(prof, a, beta, x) - k2) * p
        xm = x + 0.5 * h
        p2 = w + 0.5 * h * w1
        w2 = (_duality_v(prof, a, beta, xm) - k2) * (p + 0.5 * h * p1)
        p3 = w + 0.5 * h * w2
        w3 = (_duality_v(prof, a, beta, xm) - k2) * (p + 0.5 * h * p2)
        p4 = w + h * w3
        w4 = (_duality_v(prof, a, beta, x + h) - k2) * (p + h * p3)
        p += h * (p1 + 2.0 * p2 + 2.0 * p3 + p4) / 6.0
        w += h * (w1 + 2.0 * w2 + 2.0 * w3 + w4) / 6.0
        x += h
    return xs, ps, ws


def e2_lattice_sum(occ_h, occ_mask, vt, M: int, kappa: float, L: float):
    acc = 0.0
    m2 = 2 * M
    half_ang = np.pi / m2
    for hl in occ_h:
        hl = int(hl)
        sl = math.sin(half_ang * hl) ** 2
        for hm in occ_h:
            hm = int(hm)
            sm = math.sin(half_ang * hm) ** 2
            for pnu in range(M):
                hlv = (hl + 2 * pnu) % m2
                if occ_mask[hlv]:
                    continue
                hmv = (hm - 2 * pnu) % m2
                if occ_mask[hmv]:
                    continue
                num = vt[((hl - hm) // 2 + pnu) % M] - vt[pnu]
                if num == 0.0:
                    continue
                num = num * num
                den = (sl + sm - math.sin(half_ang * hlv) ** 2
                       - math.sin(half_ang * hmv) ** 2)
                if abs(den) < 1e-14:
                    return None, (hl, hm, pnu)
                acc += num / den
    return acc * kappa * kappa / (4.0 * L**3), None
