"""Half-line Weyl m-functions, the whole-line M-function, and the
phi/psi functionals on the upper half-plane.

The m-function of the right half-line [1, oo) with Dirichlet condition
u_0 = 0 is the Borel transform of the half-line spectral measure of e_1.
It equals -u_1/u_0 for the l2(+oo) solution and is computed here by the
backward Moebius recursion

    m_{n-1} = -1 / (z - v(theta + n alpha) + m_n),

run from an adaptively chosen depth N with two seeds (i and 2i); the
recursion contracts the hyperbolic metric of the half-plane for
Im z > 0, so seed agreement within tol certifies the value without any
Weyl-disk bookkeeping.  The depth scales like O((1/Im z) ln(1/tol)).

``m_minus`` is the Dirichlet m-function of the left half-line
(-oo, -1]: reflecting n -> -n maps it onto the right half-line problem
with site potentials v(theta - n alpha), so the same recursion applies
and m_minus equals -u_{-1}/u_0 for the l2(-oo) solution.  For even
potentials this gives m_minus(theta) = m_plus(-theta), hence equality
of the two at theta = 0 and for the free operator.

The combination M = (m+ m- - 1)/(m+ + m-) is the Borel transform of the
corner measure mu^{e_0} + mu^{e_1} of the whole-line operator when m+
is ``m_plus`` and m- is the left solution ratio u_1/u_0 =
z - v(theta) + m_minus(theta); ``m_triple`` assembles exactly that and
the choice is validated against the finite-box resolvent in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cocycle import Potential

DEPTH_CAP_DEFAULT = 10**7


class NoConvergence(RuntimeError):
    """Seed-independence not reached before the depth cap."""


def _require_upper(z: complex, name: str = "z") -> complex:
    z = complex(z)
    if not z.imag > 0:
        raise ValueError(f"{name} must have strictly positive imaginary part, got {z}")
    return z


def phi(z: complex) -> float:
    """phi(z) = (1 + |z|^2) / (2 Im z), >= 1 on the upper half-plane."""
    z = _require_upper(z)
    return (1.0 + abs(z) ** 2) / (2.0 * z.imag)


def psi(z: complex) -> float:
    """psi(z) = phi + sqrt(phi^2 - 1) = sup over beta of |rotate_beta(z, beta)|."""
    p = phi(z)
    return p + math.sqrt(max(p * p - 1.0, 0.0))


def rotate_beta(z: complex, beta: float):
    """Moebius action of the rotation matrix R_{-beta/2pi} on z.

    The action is on the Riemann sphere; a pole of the chart is returned
    as complex infinity (only reachable for real z, never for z in the
    open half-plane).
    """
    c, s = math.cos(beta), math.sin(beta)
    den = -s * z + c
    if den == 0:
        return complex(math.inf, 0.0)
    return (c * z + s) / den


def M_function(m_plus_val: complex, m_minus_val: complex) -> complex:
    """Whole-line combination (m+ m- - 1)/(m+ + m-); maps H x H into H."""
    a = _require_upper(m_plus_val, "m_plus")
    b = _require_upper(m_minus_val, "m_minus")
    out = (a * b - 1.0) / (a + b)
    assert out.imag > 0
    return out


def _tree_product(mats: np.ndarray) -> np.ndarray:
    """Ordered product mats[0] @ mats[1] @ ... with per-level rescaling.

    Scalar rescaling is invisible to the Moebius action, so each level is
    normalised by its max-abs entry to keep the entries finite.
    """
    while len(mats) > 1:
        half = len(mats) // 2
        prod = mats[0:2 * half:2] @ mats[1:2 * half:2]
        if len(mats) % 2:
            prod = np.concatenate([prod, mats[-1:]])
        scale = np.max(np.abs(prod).reshape(len(prod), 4), axis=1)
        mats = prod / scale[:, None, None]
    return mats[0]


def _mobius(mat: np.ndarray, w: complex) -> complex:
    return (mat[0, 0] * w + mat[0, 1]) / (mat[1, 0] * w + mat[1, 1])


def _step_block(z: complex, vvals: np.ndarray) -> np.ndarray:
    out = np.zeros((len(vvals), 2, 2), dtype=complex)
    out[:, 0, 1] = -1.0
    out[:, 1, 0] = 1.0
    out[:, 1, 1] = z - vvals
    return out


def _halfline_m(z, site_values, tol, depth_cap):
    """Backward coefficient-stripping recursion with two-seed control.

    ``site_values(lo, hi)`` must return the potential at sites lo..hi-1
    (1-based).  Returns (m, est_error, depth).
    """
    z = _require_upper(z)
    if tol <= 0:
        raise ValueError("tol must be positive")
    depth = 64
    total = None
    done = 0
    while True:
        block = _step_block(z, site_values(done + 1, depth + 1))
        prod = _tree_product(block)
        total = prod if total is None else total @ prod
        total /= np.max(np.abs(total))
        done = depth
        m1 = _mobius(total, 1j)
        m2 = _mobius(total, 2j)
        est = abs(m1 - m2)
        if est <= tol:
            return m1, est, depth
        if depth >= depth_cap:
            raise NoConvergence(
                f"m-function at z={z} not seed-independent within depth cap {depth_cap} "
                f"(residual {est:.3e}, tol {tol:.3e})"
            )
        depth = min(2 * depth, depth_cap)


def m_plus(z, v: Potential, alpha: float, theta: float, tol: float = 1e-8,
           depth_cap: int = DEPTH_CAP_DEFAULT, full_output: bool = False):
    """Right half-line Dirichlet m-function at z = E + i eps.

    Parameters
    ----------
    z : complex with Im z > 0
    v, alpha, theta : potential, frequency and phase; site n carries
        potential v(theta + n alpha), n >= 1.
    tol : seed-independence tolerance (certifies est_error <= tol).
    depth_cap : recursion depth cap; exceeded depth raises NoConvergence.
    full_output : also return (est_error, depth).
    """
    sites = lambda lo, hi: v(theta + alpha * np.arange(lo, hi))
    m, est, depth = _halfline_m(z, sites, tol, depth_cap)
    return (m, est, depth) if full_output else m


def m_minus(z, v: Potential, alpha: float, theta: float, tol: float = 1e-8,
            depth_cap: int = DEPTH_CAP_DEFAULT, full_output: bool = False):
    """Left half-line Dirichlet m-function (reflected recursion).

    Computed as m_plus of the reflected potential x -> v(theta - n alpha);
    equals -u_{-1}/u_0 for the l2(-oo) solution u of H u = z u.
    """
    sites = lambda lo, hi: v(theta - alpha * np.arange(lo, hi))
    m, est, depth = _halfline_m(z, sites, tol, depth_cap)
    return (m, est, depth) if full_output else m


@dataclass(frozen=True)
class MTriple:
    """m+, the left solution ratio u_1/u_0, and their M combination.

    ``m_minus`` here is the ratio +u_1/u_0 of the l2(-oo) solution,
    i.e. z - v(theta) + (left Dirichlet m-function); with that payload
    M = (m+ m- - 1)/(m+ + m-) is exactly the Borel transform of
    mu^{e_0} + mu^{e_1} at phase theta.
    """

    m_plus: complex
    m_minus: complex
    M: complex
    z: complex
    truncation_depth: int
    est_error: float

    def __post_init__(self):
        for name in ("m_plus", "m_minus", "M"):
            _require_upper(getattr(self, name), name)


def m_triple(z, v: Potential, alpha: float, theta: float, tol: float = 1e-8,
             depth_cap: int = DEPTH_CAP_DEFAULT) -> MTriple:
    """Assemble (m+, u_1/u_0 ratio, M) at z = E + i eps and phase theta."""
    mp_val, ep, dp = m_plus(z, v, alpha, theta, tol, depth_cap, full_output=True)
    ml_val, em, dm = m_minus(z, v, alpha, theta, tol, depth_cap, full_output=True)
    ratio = z - complex(v(theta)) + ml_val
    M = M_function(mp_val, ratio)
    return MTriple(m_plus=mp_val, m_minus=ratio, M=M, z=complex(z),
                   truncation_depth=max(dp, dm), est_error=ep + em)


def box_m_plus(z, v: Potential, alpha: float, theta: float, size: int) -> complex:
    """Finite-section oracle for m_plus: G(1,1) of the half-line truncation.

    Solves the tridiagonal system (H - z) g = e_1 on sites 1..size with
    Dirichlet ends; the error decays exponentially in size * Im z.
    """
    from scipy.linalg import solve_banded

    z = _require_upper(z)
    diag = v(theta + alpha * np.arange(1, size + 1)).astype(complex) - z
    ab = np.zeros((3, size), dtype=complex)
    ab[0, 1:] = 1.0
    ab[1] = diag
    ab[2, :-1] = 1.0
    rhs = np.zeros(size, dtype=complex)
    rhs[0] = 1.0
    g = solve_banded((1, 1), ab, rhs)
    return complex(g[0])


def box_m_minus(z, v: Potential, alpha: float, theta: float, size: int) -> complex:
    """Finite-section oracle for m_minus: G(-1,-1) of the left half-line
    truncation to sites -size..-1 with Dirichlet ends."""
    from scipy.linalg import solve_banded

    z = _require_upper(z)
    sites = np.arange(-size, 0)
    diag = v(theta + alpha * sites).astype(complex) - z
    ab = np.zeros((3, size), dtype=complex)
    ab[0, 1:] = 1.0
    ab[1] = diag
    ab[2, :-1] = 1.0
    rhs = np.zeros(size, dtype=complex)
    rhs[-1] = 1.0  # site -1
    g = solve_banded((1, 1), ab, rhs)
    return complex(g[-1])


def box_M(z, v: Potential, alpha: float, theta: float, size: int) -> complex:
    """Finite-section oracle for M: G(0,0) + G(1,1) of the whole-line
    truncation to sites -size..size+1."""
    from scipy.linalg import solve_banded

    z = _require_upper(z)
    sites = np.arange(-size, size + 2)
    diag = v(theta + alpha * sites).astype(complex) - z
    n = len(sites)
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = 1.0
    ab[1] = diag
    ab[2, :-1] = 1.0
    out = 0.0 + 0.0j
    for corner in (0, 1):
        rhs = np.zeros(n, dtype=complex)
        idx = int(np.where(sites == corner)[0][0])
        rhs[idx] = 1.0
        g = solve_banded((1, 1), ab, rhs)
        out += g[idx]
    return complex(out)
