# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot loops.

Two genuinely sequential/branchy kernels live here: fixed-step RK4
propagation of the regularized two-body equation (the independent oracle
behind the adaptive solver, 1e5-1e6 unvectorizable steps) and the
second-order lattice perturbation sum with its occupation exclusions.
Both have bit-identical pure-Python twins in _fallback.py.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, sin, sqrt, tanh

cnp.import_array()

BACKEND = "cython"


cdef inline double _sech2(double t) noexcept nogil:
    cdef double e = exp(-2.0 * fabs(t))
    return 4.0 * e / ((1.0 + e) * (1.0 + e))


cdef double _duality_v(int prof, double a, double beta, double x) noexcept nogil:
    """V = beta*sigma_a''/(x+beta*sigma_a); prof 0=tanh 1=algebraic 2=smoothstep."""
    cdef double t = x / a
    cdef double s, s2, u, s1_0, s3_0
    if fabs(t) < 1e-3:
        if prof == 0:
            s3_0 = -2.0; s1_0 = 1.0
        elif prof == 1:
            s3_0 = -3.0; s1_0 = 1.0
        else:
            s3_0 = -7.5; s1_0 = 1.875
        return (beta * s3_0 / (a * a * a)) / (1.0 + beta * s1_0 / a)
    if prof == 0:
        s = tanh(t)
        s2 = -2.0 * s * _sech2(t)
    elif prof == 1:
        u = 1.0 + t * t
        s = t / sqrt(u)
        s2 = -3.0 * t / (u * u * sqrt(u))
    else:
        if t >= 1.0:
            return 0.0
        if t <= -1.0:
            return 0.0
        s = (15.0 * t - 10.0 * t * t * t + 3.0 * t * t * t * t * t) / 8.0
        s2 = -7.5 * t * (1.0 - t * t)
    return (beta * s2 / (a * a)) / (x + beta * s)


def rk4_duality(int prof, double a, double beta, double k,
                double h, long n_steps, long record_every):
    """Propagate psi''=(V-k^2)psi from (psi,psi')=(0,1) at x=0, fixed step.

    Records every `record_every`-th node (n_steps must be a multiple).
    Returns (x, psi, dpsi) arrays of length n_steps//record_every + 1.
    """
    if n_steps % record_every != 0:
        raise ValueError("n_steps must be a multiple of record_every")
    cdef long n_rec = n_steps // record_every + 1
    cdef cnp.ndarray[cnp.float64_t] xs = np.empty(n_rec)
    cdef cnp.ndarray[cnp.float64_t] ps = np.empty(n_rec)
    cdef cnp.ndarray[cnp.float64_t] ws = np.empty(n_rec)
    cdef double x = 0.0, p = 0.0, w = 1.0
    cdef double k2 = k * k
    cdef double p1, w1, p2, w2, p3, w3, p4, w4, xm
    cdef long i, j = 0
    with nogil:
        for i in range(n_steps + 1):
            if i % record_every == 0:
                with gil:
                    xs[j] = x; ps[j] = p; ws[j] = w
                j += 1
            if i == n_steps:
                break
            # classical RK4 for (p, w)' = (w, (V-k^2) p)
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


def e2_lattice_sum(cnp.ndarray[cnp.int64_t] occ_h,
                   cnp.ndarray[cnp.uint8_t] occ_mask,
                   cnp.ndarray[cnp.float64_t] vt,
                   long M, double kappa, double L):
    """Second-order lattice PT sum on the doubled momentum grid.

    Momenta are doubled indices h: the angle is pi*h/M, so integer momenta
    sit at even h and the half-integer grid (even particle number, from the
    ring's hopping wrap sign) at odd h. occ_mask (length 2M) flags occupied
    h; momentum transfers are integer, vt[p] the interaction transform at
    transfer angle 2*pi*p/M. Terms with Pauli-blocked finals are skipped;
    exactly-zero numerators are skipped; a vanishing denominator under a
    nonzero numerator returns the offending (h_lam, h_mu, p_nu) triple for
    the caller to raise on. Deterministic accumulation order.
    """
    cdef long n_occ = occ_h.shape[0]
    cdef long m2 = 2 * M
    cdef long il, im, pnu, hl, hm, hlv, hmv, pnum
    cdef double acc = 0.0, num, den, sl, sm, slv, smv
    cdef double half_ang = np.pi / m2   # sin^2(theta/2), theta = pi*h/M
    cdef long bad_l = -1, bad_m = -1, bad_v = -1
    with nogil:
        for il in range(n_occ):
            hl = occ_h[il]
            sl = sin(half_ang * hl)
            sl = sl * sl
            for im in range(n_occ):
                hm = occ_h[im]
                sm = sin(half_ang * hm)
                sm = sm * sm
                for pnu in range(M):
                    hlv = (hl + 2 * pnu) % m2
                    if occ_mask[hlv]:
                        continue
                    # cdivision makes % C-style: renormalize negatives
                    hmv = (hm - 2 * pnu) % m2
                    if hmv < 0:
                        hmv += m2
                    if occ_mask[hmv]:
                        continue
                    pnum = ((hl - hm) / 2 + pnu) % M
                    if pnum < 0:
                        pnum += M
                    num = vt[pnum] - vt[pnu]
                    if num == 0.0:
                        continue
                    num = num * num
                    slv = sin(half_ang * hlv)
                    smv = sin(half_ang * hmv)
                    den = sl + sm - slv * slv - smv * smv
                    if fabs(den) < 1e-14:
                        bad_l = hl; bad_m = hm; bad_v = pnu
                        break
                    acc += num / den
                if bad_l >= 0:
                    break
            if bad_l >= 0:
                break
    if bad_l >= 0:
        return None, (bad_l, bad_m, bad_v)
    return acc * kappa * kappa / (4.0 * L * L * L), None
