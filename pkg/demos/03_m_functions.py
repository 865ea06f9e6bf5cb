#!/usr/bin/env python3
"""Weyl m-functions and the whole-line M-function.

The half-line m-function is computed by the backward Moebius recursion
m_{n-1} = -1/(z - v_n + m_n); for the free operator at z = i the fixed
point is i (sqrt(5)-1)/2.  The combination M = (m+ m- - 1)/(m+ + m-)
reproduces the corner sum G(0,0) + G(1,1) of the finite-section
resolvent, which is verified directly below.
"""

import math

from quasispec import M_function, Potential, m_minus, m_plus, m_triple, phi, psi, resolve_alpha
from quasispec.weyl import box_M, box_m_plus

alpha = resolve_alpha("golden").alpha
free = Potential.zero()

m = m_plus(1j, free, alpha, 0.0, 1e-12)
print("free m+(i) =", m, " exact:", 1j * (math.sqrt(5) - 1) / 2)
print("free m-(i) =", m_minus(1j, free, alpha, 0.0, 1e-12), " (reflection symmetry)")

v = Potential.amo(0.5)
z = complex(0.4, 1e-2)
t = m_triple(z, v, alpha, 0.31, 1e-9)
print(f"\nAMO(0.5) at z = {z}:")
print("  m+       =", t.m_plus)
print("  u1/u0(-) =", t.m_minus)
print("  M        =", t.M, f"(depth {t.truncation_depth}, est {t.est_error:.1e})")
print("  box oracle m+:", box_m_plus(z, v, alpha, 0.31, 2000))
print("  box oracle M :", box_M(z, v, alpha, 0.31, 2000))

print("\nphi/psi functionals:")
for w in (1j, 2j, t.m_plus):
    print(f"  phi({w:.4f}) = {phi(w):.4f}   psi = {psi(w):.4f}")
print("  psi(M) <= psi(m+):", psi(t.M) <= psi(t.m_plus) * (1 + 1e-9))

print("\nHerglotz kernel monotonicity (Im M / eps falls, eps Im M rises):")
for eps in (1e-1, 1e-2, 1e-3):
    tt = m_triple(complex(0.0, eps), v, alpha, 0.0, 1e-9)
    print(f"  eps = {eps:.0e}: Im M/eps = {tt.M.imag / eps:10.4f}   eps Im M = {eps * tt.M.imag:.6f}")
