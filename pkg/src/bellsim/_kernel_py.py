"""Pure-Python slot-loop kernel.

Fallback for environments without the compiled extension.  The arithmetic
mirrors ``_kernel.pyx`` expression for expression so both backends produce
identical outcome arrays for identical inputs.
"""

from __future__ import annotations

import math

import numpy as np

_PI = math.pi
_HALF_PI = math.pi / 2.0


def simulate_slots(
    v_angles: np.ndarray,
    moduli: np.ndarray,
    set_a: np.ndarray,
    set_b: np.ndarray,
    master_is_b: np.ndarray,
    u: float,
    contextual: bool,
    mem0: np.ndarray,
    out_a: np.ndarray,
    out_b: np.ndarray,
) -> None:
    """Run the per-slot measurement loop, filling out_a/out_b in place.

    mem0 holds the four initial gate accumulators (A+, A-, B+, B-) and is
    not modified; all angles must already be reduced to [0, pi).
    """
    n = len(v_angles)
    v_l = v_angles.tolist()
    mod_l = moduli.tolist()
    sa_l = set_a.tolist()
    sb_l = set_b.tolist()
    mb_l = master_is_b.tolist()
    ra = [0] * n
    rb = [0] * n
    ma_p, ma_m, mb_p, mb_m = (float(x) for x in mem0)
    cos = math.cos
    for t in range(n):
        m = mod_l[t]
        m2 = m * m
        vt = v_l[t]
        if mb_l[t]:
            th_m = sb_l[t]
            th_s = sa_l[t]
            mp, mm = mb_p, mb_m
            sp, sm = ma_p, ma_m
        else:
            th_m = sa_l[t]
            th_s = sb_l[t]
            mp, mm = ma_p, ma_m
            sp, sm = mb_p, mb_m

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
            axis = th_m if om == 1 else th_m + _HALF_PI
            if axis >= _PI:
                axis -= _PI
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

        if mb_l[t]:
            mb_p, mb_m = mp, mm
            ma_p, ma_m = sp, sm
            rb[t] = om
            ra[t] = os_
        else:
            ma_p, ma_m = mp, mm
            mb_p, mb_m = sp, sm
            ra[t] = om
            rb[t] = os_

    out_a[:] = ra
    out_b[:] = rb
