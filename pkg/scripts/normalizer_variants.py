#!/usr/bin/env python3
"""Numerical comparison of the two candidate flat-limit normalizers a(q).

The squared form Gamma(m_a/2)^2 / (Gamma(m_a) 2^{1 + 3 m_2a/2}) and the
single-Gamma form (square dropped) differ by a factor Gamma(m_a/2) -> inf.
This sweep shows which one actually sends the flat-limit error

    g_q = a(q) (delta^{1/2} phi_lam)(log m_a + r) - K_lam(e^{-r})

to zero: the squared form does (g_q ~ 1/q), while the single-Gamma form
collapses the spherical term entirely, so g_q -> -K_lam(e^{-r}).
"""

import math

from myproc.series import g_q_error
from myproc.specialfn import Multiplicities, macdonald_k

LAM, R = 0.2, 1.0

print(f"lam = {LAM}, r = {R}, K = {macdonald_k(LAM, math.exp(-R)):.6f}")
print(f"{'q':>6s} {'g_q (squared)':>16s} {'g_q (single)':>16s}")
for q in (8, 16, 32, 64, 128, 256, 512, 1024):
    mult = Multiplicities.from_group("SU", q)
    gs = g_q_error(LAM, R, mult, a_variant="squared")
    g1 = g_q_error(LAM, R, mult, a_variant="single")
    print(f"{q:6d} {gs:16.3e} {g1:16.3e}")
