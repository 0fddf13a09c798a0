# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled slot-loop kernel.

Same arithmetic, in the same expression order, as ``_kernel_py.py``: the
two backends must produce identical outcome arrays for identical inputs.
"""

from libc.math cimport cos, M_PI, M_PI_2


def simulate_slots(
    const double[::1] v_angles,
    const double[::1] moduli,
    const double[::1] set_a,
    const double[::1] set_b,
    const unsigned char[::1] master_is_b,
    double u,
    bint contextual,
    const double[::1] mem0,
    signed char[::1] out_a,
    signed char[::1] out_b,
):
    """Run the per-slot measurement loop, filling out_a/out_b in place.

    mem0 holds the four initial gate accumulators (A+, A-, B+, B-) and is
    not modified; all angles must already be reduced to [0, pi).
    """
    cdef Py_ssize_t n = v_angles.shape[0]
    cdef Py_ssize_t t
    cdef double ma_p = mem0[0], ma_m = mem0[1], mb_p = mem0[2], mb_m = mem0[3]
    cdef double m, m2, vt, th_m, th_s, mp, mm, sp, sm
    cdef double c, ep, em, pre_p, pre_m, axis
    cdef bint fp, fm, is_b
    cdef int om, os_

    for t in range(n):
        m = moduli[t]
        m2 = m * m
        vt = v_angles[t]
        is_b = master_is_b[t]
        if is_b:
            th_m = set_b[t]
            th_s = set_a[t]
            mp = mb_p
            mm = mb_m
            sp = ma_p
            sm = ma_m
        else:
            th_m = set_a[t]
            th_s = set_b[t]
            mp = ma_p
            mm = ma_m
            sp = mb_p
            sm = mb_m

        c = cos(vt - th_m)
        ep = m2 * (c * c)
        em = m2 - ep
        pre_p = mp + ep
        pre_m = mm + em
        fp = pre_p >= u
        fm = pre_m >= u
        mp = pre_p - u if fp else pre_p
        mm = pre_m - u if fm else pre_m
        if fp:
            om = (1 if pre_p >= pre_m else -1) if fm else 1
        else:
            om = -1 if fm else 0

        if contextual and om != 0:
            axis = th_m if om == 1 else th_m + M_PI_2
            if axis >= M_PI:
                axis -= M_PI
            c = cos(axis - th_s)
        else:
            c = cos(vt - th_s)
        ep = m2 * (c * c)
        em = m2 - ep
        pre_p = sp + ep
        pre_m = sm + em
        fp = pre_p >= u
        fm = pre_m >= u
        sp = pre_p - u if fp else pre_p
        sm = pre_m - u if fm else pre_m
        if fp:
            os_ = (1 if pre_p >= pre_m else -1) if fm else 1
        else:
            os_ = -1 if fm else 0

        if is_b:
            mb_p = mp
            mb_m = mm
            ma_p = sp
            ma_m = sm
            out_b[t] = om
            out_a[t] = os_
        else:
            ma_p = mp
            ma_m = mm
            mb_p = sp
            mb_m = sm
            out_a[t] = om
            out_b[t] = os_
