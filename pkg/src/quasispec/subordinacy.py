"""P-matrices, the eps_k scale ladder, and the Jitomirskaya-Last
bracket diagnostics.

P_(k) = sum_{j=1}^k A_{2j-1}^*(x+alpha) A_{2j-1}(x+alpha) is an
increasing family of positive matrices; the quadratic form
<P_(k) (u_1,u_0), (u_1,u_0)> equals the truncated solution norm
||u||_{2k}^2, so ||P_(k)|| and det P_(k) control solution growth for
every boundary condition at once.  The subordinacy scale is
eps_k = (4 det P_(k))^{-1/2}, and the bracket

    1/C < psi(m+(E + i eps_k)) / (2 eps_k ||P_(k)||) < C,  C = 5+sqrt(24)

ties the half-line m-function to the ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cocycle import Potential, solution_norm_sq_batch
from .weyl import DEPTH_CAP_DEFAULT, m_plus, psi, rotate_beta

JL_UPPER = 5.0 + math.sqrt(24.0)
JL_LOWER = 5.0 - math.sqrt(24.0)
KKL_UPPER = 2.0 + math.sqrt(3.0)
KKL_LOWER = 2.0 - math.sqrt(3.0)


@dataclass(frozen=True)
class PMatrix:
    """Positive matrix controlling solution growth up to length 2k.

    The determinant is carried in log form from the QR accumulation;
    the entrywise formula on ``entries`` is cancellation-prone once the
    matrix is badly conditioned.
    """

    k: int
    entries: np.ndarray  # 2x2, hermitian positive definite
    log_det: float
    x: float
    E: float

    @property
    def norm(self) -> float:
        return _herm_eigs(self.entries)[1]

    @property
    def det(self) -> float:
        return math.exp(self.log_det)

    @property
    def smallest_eig(self) -> float:
        return math.exp(self.log_det - math.log(self.norm))

    @property
    def eps(self) -> float:
        """Subordinacy scale eps_k = (4 det)^{-1/2}."""
        return 0.5 * math.exp(-0.5 * self.log_det)

    @property
    def trace(self) -> float:
        return float((self.entries[0, 0] + self.entries[1, 1]).real)


def _herm_eigs(m: np.ndarray) -> tuple[float, float]:
    a = float(m[0, 0].real)
    d = float(m[1, 1].real)
    b2 = abs(m[0, 1]) ** 2
    half = 0.5 * (a + d)
    disc = math.sqrt(max(0.25 * (a - d) ** 2 + b2, 0.0))
    return half - disc, half + disc


def _p_entries_upto(E: float, v: Potential, alpha: float, x: float, ks):
    """One cumulative pass of transfer steps from phase x+alpha, sampling
    (p11, p12, p22, log_det) at each requested k.

    P_(k) = G^T G for the 2k x 2 stack G of the odd-iterate rows, so its
    determinant is computed from an incremental Givens QR of the stack:
    det P = (r11 r22)^2 with no cancellation, where the entrywise
    p11*p22 - p12^2 loses all digits once cond(P) passes 1/eps_mach
    (hyperbolic energies)."""
    ks = sorted(set(int(k) for k in ks))
    if ks[0] < 1:
        raise ValueError("k must be >= 1")
    kmax = ks[-1]
    es = (E - np.asarray(v((x + alpha * np.arange(1, 2 * kmax)) % 1.0), dtype=float)).tolist()
    out = {}
    want = set(ks)
    a, b, c, d = es[0], -1.0, 1.0, 0.0  # A_1(x+alpha)
    p11, p12, p22 = a * a + c * c, a * b + c * d, b * b + d * d
    r11 = r12 = r22 = 0.0
    for u, w in ((a, b), (c, d)):
        if u != 0.0:
            r = math.hypot(r11, u)
            c1, s1 = r11 / r, u / r
            r11, r12, w = r, c1 * r12 + s1 * w, -s1 * r12 + c1 * w
        r22 = math.hypot(r22, w)
    if 1 in want:
        out[1] = (p11, p12, p22, 2.0 * (math.log(r11) + math.log(r22)))
    for j in range(2, 2 * kmax):
        e = es[j - 1]
        a, c = e * a - c, a
        b, d = e * b - d, b
        if j % 2 == 1:
            p11 += a * a + c * c
            p12 += a * b + c * d
            p22 += b * b + d * d
            for u, w in ((a, b), (c, d)):
                if u != 0.0:
                    r = math.hypot(r11, u)
                    c1, s1 = r11 / r, u / r
                    r11, r12, w = r, c1 * r12 + s1 * w, -s1 * r12 + c1 * w
                r22 = math.hypot(r22, w)
            kk = (j + 1) // 2
            if kk in want:
                out[kk] = (p11, p12, p22, 2.0 * (math.log(r11) + math.log(r22)))
        if max(abs(a), abs(b), abs(c), abs(d)) > 1e120:
            raise OverflowError(
                f"transfer matrices exceed 1e120 at step {j}; energy {E} looks hyperbolic"
            )
    return out


def p_matrix(E: float, v: Potential, alpha: float, x: float, k: int) -> PMatrix:
    """P_(k) at real energy E and base phase x, hermitian-symmetrized."""
    p11, p12, p22, logdet = _p_entries_upto(E, v, alpha, x, [k])[k]
    m = np.array([[p11, p12], [p12, p22]], dtype=float)
    return PMatrix(k=int(k), entries=m, log_det=logdet, x=float(x), E=float(E))


def _beta_products(betas: np.ndarray, E, v, alpha, x, L) -> np.ndarray:
    """||u^beta||_L^2 * ||u^{beta+pi/2}||_L^2 over a batch of betas,
    computed from the defining recurrences (independent of P_(k))."""
    u0 = -np.sin(betas)
    u1 = np.cos(betas)
    s1 = solution_norm_sq_batch(u0, u1, E, v, alpha, x, L)
    s2 = solution_norm_sq_batch(-u1, u0, E, v, alpha, x, L)  # beta + pi/2
    return s1 * s2


def det_via_beta_scan(E: float, v: Potential, alpha: float, x: float, k: int,
                      grid: int = 256, full_output: bool = False):
    """Independent oracle for det P_(k): minimize the product
    ||u^beta||^2 ||u^{beta+pi/2}||^2 over beta in [0, pi).

    A coarse grid locates the minimum; golden-section refines it to
    1e-10 in beta.  The infimum is attained at critical points of
    beta -> ||u^beta||^2.

    The comparison is meaningful while cond(P_(k)) stays below ~1e12:
    past that the product minimum is narrower in beta than double
    precision resolves (width ~ sqrt(det)/||P||), which happens at
    hyperbolic energies once 4 L(E) k exceeds ~28.
    """
    if grid < 8:
        raise ValueError("grid must be >= 8")
    L = 2 * k
    betas = np.pi * np.arange(grid) / grid
    vals = _beta_products(betas, E, v, alpha, x, L)
    i = int(np.argmin(vals))
    h = np.pi / grid
    lo, hi = betas[i] - h, betas[i] + h

    def f(b):
        return float(_beta_products(np.array([b]), E, v, alpha, x, L)[0])

    invphi = (math.sqrt(5) - 1) / 2
    a_, b_ = lo, hi
    c_ = b_ - invphi * (b_ - a_)
    d_ = a_ + invphi * (b_ - a_)
    fc, fd = f(c_), f(d_)
    while b_ - a_ > 1e-10:
        if fc < fd:
            b_, d_, fd = d_, c_, fc
            c_ = b_ - invphi * (b_ - a_)
            fc = f(c_)
        else:
            a_, c_, fc = c_, d_, fd
            d_ = a_ + invphi * (b_ - a_)
            fd = f(d_)
    beta_min = 0.5 * (a_ + b_)
    val = f(beta_min)
    if full_output:
        return val, beta_min
    return val


@dataclass(frozen=True)
class ProfileRow:
    k: int
    norm_P: float
    det_P: float
    eps_k: float
    psi_mplus: float
    ratio_jl: float
    ratio_blabl: float


@dataclass(frozen=True)
class SubordinacyProfile:
    """Per-scale ladder of P-matrix data and JL ratios at one energy."""

    E: float
    theta: float
    rows: tuple[ProfileRow, ...]

    CSV_HEADER = "k,norm_P,det_P,eps_k,psi_mplus,ratio_jl,ratio_blabl"

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def csv_rows(self):
        for r in self.rows:
            yield [r.k, r.norm_P, r.det_P, r.eps_k, r.psi_mplus, r.ratio_jl, r.ratio_blabl]


def default_k_list(k_max: int, ratio: float = 1.3) -> list[int]:
    """Geometric ladder k = ceil(ratio^j), deduplicated, capped at k_max."""
    ks = []
    j = 0
    while True:
        k = math.ceil(ratio ** j)
        if k > k_max:
            break
        if not ks or k > ks[-1]:
            ks.append(k)
        j += 1
    return ks


def profile(E: float, v: Potential, alpha: float, theta: float,
            k_list=None, tol: float = 1e-7, eps_floor: float = 0.0,
            depth_cap: int = DEPTH_CAP_DEFAULT) -> SubordinacyProfile:
    """Subordinacy profile at real energy E.

    For each k the row carries ||P_(k)||, det P_(k), eps_k, the value
    psi(m+(E + i eps_k)) and the two ratios

        ratio_jl    = psi / (2 eps_k ||P_(k)||)
        ratio_blabl = ||P_(k)|| / ||P_(k)^{-1}||^{-3}

    Rows whose eps_k falls below ``eps_floor`` are dropped (the
    m-function cost scales like 1/eps).  NoConvergence from the
    m-function propagates.
    """
    if k_list is None:
        k_list = default_k_list(1000)
    entries = _p_entries_upto(E, v, alpha, theta, k_list)
    rows = []
    for k in sorted(entries):
        p11, p12, p22, logdet = entries[k]
        m = np.array([[p11, p12], [p12, p22]])
        big = _herm_eigs(m)[1]
        eps_k = 0.5 * math.exp(-0.5 * logdet)
        if eps_k < eps_floor:
            continue
        mp_val = m_plus(complex(E, eps_k), v, alpha, theta, tol, depth_cap)
        ps = psi(mp_val)
        rows.append(ProfileRow(
            k=k, norm_P=big, det_P=math.exp(logdet), eps_k=eps_k, psi_mplus=ps,
            ratio_jl=ps / (2.0 * eps_k * big),
            ratio_blabl=math.exp(4.0 * math.log(big) - 3.0 * logdet),
        ))
    return SubordinacyProfile(E=float(E), theta=float(theta), rows=tuple(rows))


@dataclass(frozen=True)
class BracketRecord:
    """One Jitomirskaya-Last bracket evaluation at scale L = 2k."""

    E: float
    beta: float
    k: int
    eps: float
    scale_residual: float   # |2 eps ||u^b|| ||u^{b+pi/2}|| - 1|
    value: float            # |m+_beta| ||u^b|| / ||u^{b+pi/2}||
    in_bracket: bool        # value in (5-sqrt24, 5+sqrt24)
    kkl_eps: float
    kkl_value: float        # psi(m+)/(eps ||P_(k)||) at det P = 1/eps^2
    kkl_in_bracket: bool


def jl_bracket_check(E: float, v: Potential, alpha: float, theta: float,
                     beta: float, k: int, tol: float = 1e-8,
                     slack: float = 0.0) -> BracketRecord:
    """Evaluate the JL bracket at the scale where
    ||u^beta||_L ||u^{beta+pi/2}||_L = 1/(2 eps), L = 2k.

    The scale equation is solved for eps by monotone bisection (the left
    side is fixed, the right side varies).  The kkl variant evaluates
    psi(m+)/(eps ||P_(k)||) at the scale det P_(k) = 1/eps^2.
    """
    L = 2 * k
    prod_sq = float(_beta_products(np.array([beta]), E, v, alpha, theta, L)[0])
    X = math.sqrt(prod_sq)  # ||u^b||_L * ||u^{b+pi/2}||_L
    lo, hi = 0.25 / X, 1.0 / X
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 2.0 * mid * X - 1.0 > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-16 * hi:
            break
    eps = 0.5 * (lo + hi)
    scale_residual = abs(2.0 * eps * X - 1.0)

    u0, u1 = -math.sin(beta), math.cos(beta)
    nb = math.sqrt(float(solution_norm_sq_batch(np.array([u0]), np.array([u1]), E, v, alpha, theta, L)[0]))
    nbp = math.sqrt(float(solution_norm_sq_batch(np.array([-u1]), np.array([u0]), E, v, alpha, theta, L)[0]))
    mp_val = m_plus(complex(E, eps), v, alpha, theta, tol)
    value = abs(rotate_beta(mp_val, beta)) * nb / nbp
    in_bracket = JL_LOWER * (1 - slack) < value < JL_UPPER * (1 + slack)

    pm = p_matrix(E, v, alpha, theta, k)
    kkl_eps = 1.0 / math.sqrt(pm.det)
    mp2 = m_plus(complex(E, kkl_eps), v, alpha, theta, tol)
    kkl_value = psi(mp2) / (kkl_eps * pm.norm)
    kkl_in = KKL_LOWER * (1 - slack) < kkl_value < KKL_UPPER * (1 + slack)

    return BracketRecord(E=float(E), beta=float(beta), k=int(k), eps=eps,
                         scale_residual=scale_residual, value=value,
                         in_bracket=in_bracket, kkl_eps=kkl_eps,
                         kkl_value=kkl_value, kkl_in_bracket=kkl_in)
