#!/usr/bin/env python3
"""Transfer-matrix cocycles, Lyapunov exponents, and iterate growth.

For the free operator the Lyapunov exponent vanishes on the spectrum
[-2,2] and equals ln((|E| + sqrt(E^2-4))/2) outside it.  For the
almost Mathieu operator at coupling 2 (potential 4 cos) the exponent
equals ln 2 throughout the spectrum.  At subcritical coupling the
iterates stay bounded at almost reducible energies: the growth profile
is flat, well under the linear bound.
"""

import math

import numpy as np

from quasispec import Potential, growth_profile, iterate, lyapunov, resolve_alpha

alpha = resolve_alpha("golden").alpha
free = Potential.zero()

print("free operator:")
for E in (0.0, 1.0, 2.5, 3.0):
    L = lyapunov(E, free, alpha, 4000, 16)
    exact = 0.0 if abs(E) <= 2 else math.log((abs(E) + math.sqrt(E * E - 4)) / 2)
    print(f"  L({E:+.1f}) = {L:+.4f}   (exact {exact:+.4f})")

print("\nalmost Mathieu, coupling 2 (supercritical):")
v2 = Potential.amo(2.0)
for E in (0.0, 1.0, 2.5):
    print(f"  L({E:+.1f}) = {lyapunov(E, v2, alpha, 20000, 32):+.4f}   (ln 2 = {math.log(2):.4f} on the spectrum)")

print("\ncocycle product bookkeeping (rescaled, log tracked):")
m, s = iterate(2.5, free, alpha, 0.0, 200)
print(f"  ||A_200|| = exp({s:.2f}) ~ 2^{s / math.log(2):.1f}")

print("\ngrowth profiles sup_x ||A_s(x)||, s <= 4000:")
amo = Potential.amo(0.5)
for E, label in ((0.0, "AMO(0.5), E=0 in spectrum"), (3.0, "free, E=3 hyperbolic")):
    v = amo if label.startswith("AMO") else free
    gp = growth_profile(E, v, alpha, 4000, 32)
    print(f"  {label}: log-log slope {gp.loglog_slope():+.3f}, "
          f"exp rate {gp.exp_rate():+.4f}")
