#!/usr/bin/env python3
"""IDS, gap labelling, Thouless formula, and the Hoelder-1/2 signature.

The window proxy w(eps) = 2 eps Im M(E + i eps) scales like eps at
energies with bounded spectral density, and like sqrt(eps) at gap
edges, where the density has its square-root singularity.  The gap
labels (plateau values of the IDS) sit on k*alpha mod 1.
"""

import math

import numpy as np

from quasispec import Potential, holder_fit, ids, gap_edges, lyapunov, resolve_alpha, thouless_check
from quasispec.spectral import refine_gap_edge

alpha = resolve_alpha("golden").alpha
free = Potential.zero()
amo = Potential.amo(0.5)

print("free IDS checks: N(0) = 1/2, arccos profile:")
tab = ids(free, alpha, np.linspace(-3, 3, 1201), "finite_box", size=4000)
for E in (-1.0, 0.0, 1.0):
    print(f"  N({E:+.1f}) = {tab.value(E):.4f}   exact {math.acos(-E / 2) / math.pi:.4f}")

print("\nThouless formula, free operator at E = 3:")
L = lyapunov(3.0, free, alpha, 4000, 16)
big = ids(free, alpha, np.linspace(-4, 4, 4001), "finite_box", size=5000)
rec = thouless_check(3.0, free, alpha, big, L)
print(f"  L = {L:.5f}   integral = {rec.integral:.5f}   residual = {rec.residual:.5f}")

print("\nAMO(0.5) gaps (IDS plateaus) with their labels k:")
tab2 = ids(amo, alpha, np.linspace(-3.2, 3.2, 6401), "finite_box", size=4000)
gaps = sorted(gap_edges(tab2), key=lambda g: g.e_right - g.e_left, reverse=True)
for g in gaps[:5]:
    k = min(range(-40, 41), key=lambda k: abs(g.n_plateau - (k * alpha) % 1.0) if k else 9e9)
    print(f"  [{g.e_left:+.4f}, {g.e_right:+.4f}]  N = {g.n_plateau:.5f}  label k = {k}")

edge = refine_gap_edge(amo, alpha, gaps[0], "right", half_width=5e-3)
print(f"\ndominant gap right edge refined to {edge:.8f}")
print("window-proxy scaling exponents (slope of ln w vs ln eps):")
for E, label in ((0.0, "AMO interior"), (edge, "AMO gap edge"),):
    fit = holder_fit(E, amo, alpha, 0.0, (1e-4, 1e-1), 12, tol=1e-8)
    print(f"  {label:14s} E = {E:+.6f}: slope = {fit.slope:.3f}")
for E, label in ((0.0, "free interior"), (2.0, "free band edge")):
    fit = holder_fit(E, free, alpha, 0.0, (1e-4, 1e-1), 12, tol=1e-9)
    print(f"  {label:14s} E = {E:+.6f}: slope = {fit.slope:.3f}")
print("(interior ~ 1, edges ~ 1/2: the sharp Hoelder-1/2 behaviour)")
