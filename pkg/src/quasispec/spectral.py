"""Spectral-measure window estimates, Hoelder-exponent fitting,
integrated density of states and the Thouless formula.

The window proxy is w(eps) = 2 eps Im M(E + i eps), an exact upper
bound for the corner measure of (E-eps, E+eps); the tool fits the
scaling of Im M and never claims pointwise measure values.  Finite-box
IDS uses Sturm-sequence eigenvalue counting on the symmetric
tridiagonal truncation, O(size) per energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cocycle import Potential
from .weyl import m_triple


def sturm_counts(diag: np.ndarray, E_grid: np.ndarray) -> np.ndarray:
    """Number of eigenvalues < E of tridiag(diag, offdiag=1), per E.

    Standard LDL^T pivot-sign count; pivots that vanish are nudged to
    -tiny, the usual convention for eigenvalues exactly at E.
    """
    E = np.asarray(E_grid, dtype=float)
    count = np.zeros(E.shape, dtype=np.int64)
    d = np.full(E.shape, np.inf)
    tiny = 1e-300
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for a in diag:
            d = (a - E) - 1.0 / d
            d = np.where(d == 0.0, -tiny, d)
            count += d < 0
    return count


@dataclass(frozen=True)
class IdsTable:
    """Integrated density of states sampled on an energy grid."""

    energies: np.ndarray
    N_values: np.ndarray
    method: str
    size: int

    def value(self, E: float) -> float:
        return float(np.interp(E, self.energies, self.N_values))

    @property
    def grid_step(self) -> float:
        return float(np.min(np.diff(self.energies)))


def ids(v: Potential, alpha: float, E_grid, method: str = "finite_box",
        size: int = 3000, theta: float = 0.0, phases: int = 64,
        threads: int = 1) -> IdsTable:
    """Integrated density of states N(E) on a grid.

    ``finite_box`` counts eigenvalues of the size x size truncation with
    Dirichlet ends at the fixed phase theta (self-averaging).
    ``phase_average`` averages the center-site spectral distribution of
    smaller boxes over ``phases`` equispaced phases.
    """
    if size < 100:
        raise ValueError("size must be >= 100")
    E = np.asarray(E_grid, dtype=float)
    if method == "finite_box":
        diag = np.asarray(v((theta + alpha * np.arange(size)) % 1.0), dtype=float)
        N = sturm_counts(diag, E) / size
        return IdsTable(energies=E, N_values=N, method=method, size=size)
    if method == "phase_average":
        from scipy.linalg import eigh_tridiagonal

        off = np.ones(size - 1)
        center = size // 2

        def one_phase(j):
            th = theta + j / phases
            diag = np.asarray(v((th + alpha * np.arange(size)) % 1.0), dtype=float)
            w, vecs = eigh_tridiagonal(diag, off, select="a")
            weights = np.abs(vecs[center, :]) ** 2
            cum = np.concatenate([[0.0], np.cumsum(weights)])
            idx = np.searchsorted(w, E, side="right")
            return cum[idx]

        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as ex:
                parts = list(ex.map(one_phase, range(phases)))
        else:
            parts = [one_phase(j) for j in range(phases)]
        N = np.sum(parts, axis=0) / phases
        return IdsTable(energies=E, N_values=N, method=method, size=size)
    raise ValueError("method must be 'finite_box' or 'phase_average'")


def in_spectrum(v: Potential, alpha: float, E: float, delta: float,
                size: int = 20000, theta: float = 0.0) -> bool:
    """Spectrum membership proxy: the finite-box IDS must increase by
    more than the possible boundary-state count across [E-delta, E+delta]."""
    diag = np.asarray(v((theta + alpha * np.arange(size)) % 1.0), dtype=float)
    counts = sturm_counts(diag, np.array([E - delta, E + delta]))
    return int(counts[1] - counts[0]) > 2


def smoothed_window(E: float, eps: float, v: Potential, alpha: float,
                    theta: float, tol: float = 1e-8) -> float:
    """w = 2 eps Im M(E + i eps), an upper proxy for the corner-measure
    window mu(E-eps, E+eps)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    t = m_triple(complex(E, eps), v, alpha, theta, tol)
    return 2.0 * eps * t.M.imag


@dataclass(frozen=True)
class HolderFit:
    """Log-log fit of the window proxy against eps on a geometric ladder."""

    E: float
    eps: np.ndarray
    w: np.ndarray
    im_M: np.ndarray
    slope: float
    residual: float
    window: tuple[float, float]

    @property
    def im_sqrt_eps(self) -> np.ndarray:
        """Im M * eps^{1/2} along the ladder (bounded above at good energies)."""
        return self.im_M * np.sqrt(self.eps)

    @property
    def im_over_sqrt_eps(self) -> np.ndarray:
        """Im M / eps^{1/2} companion check (bounded below at good energies)."""
        return self.im_M / np.sqrt(self.eps)

    CSV_HEADER = "E,eps,w,im_M"

    def csv_rows(self):
        for e, w, im in zip(self.eps, self.w, self.im_M):
            yield [self.E, e, w, im]


def holder_fit(E: float, v: Potential, alpha: float, theta: float,
               eps_range: tuple[float, float], points: int,
               tol: float = 1e-8, threads: int = 1) -> HolderFit:
    """Fit the scaling exponent of ln w against ln eps on a geometric
    eps ladder; slope ~1/2 is the Hoelder-1/2 signature at gap edges."""
    if points < 4:
        raise ValueError("points must be >= 4")
    lo, hi = min(eps_range), max(eps_range)
    if lo <= 0:
        raise ValueError("eps_range must be positive")
    eps = np.geomspace(lo, hi, points)

    def one(e):
        t = m_triple(complex(E, e), v, alpha, theta, tol)
        return t.M.imag

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            im = np.array(list(ex.map(one, eps)))
    else:
        im = np.array([one(e) for e in eps])
    w = 2.0 * eps * im
    coef = np.polyfit(np.log(eps), np.log(w), 1)
    fitted = np.polyval(coef, np.log(eps))
    residual = float(np.sqrt(np.mean((np.log(w) - fitted) ** 2)))
    return HolderFit(E=float(E), eps=eps, w=w, im_M=im,
                     slope=float(coef[0]), residual=residual, window=(lo, hi))


@dataclass(frozen=True)
class ThoulessRecord:
    E: float
    integral: float
    lyapunov: float
    residual: float


def thouless_check(E: float, v: Potential, alpha: float, ids_table: IdsTable,
                   lyap_value: float) -> ThoulessRecord:
    """Compare the Thouless integral of the IDS with a Lyapunov value.

    The Stieltjes integral of ln|E'-E| against dN is evaluated exactly
    on each cell for piecewise-linear N: the antiderivative
    (t-E) ln|t-E| - t integrates the logarithmic singularity with no
    special-casing of the two cells adjacent to E.
    """
    Es = ids_table.energies
    Ns = ids_table.N_values

    def F(t):
        u = t - E
        out = np.where(u == 0.0, 0.0, u * np.log(np.maximum(np.abs(u), 1e-300)))
        return out - t

    dN = np.diff(Ns)
    dE = np.diff(Es)
    good = dE > 0
    rho = np.zeros_like(dN)
    rho[good] = dN[good] / dE[good]
    integral = float(np.sum(rho * (F(Es[1:]) - F(Es[:-1]))))
    return ThoulessRecord(E=float(E), integral=integral, lyapunov=float(lyap_value),
                          residual=abs(integral - float(lyap_value)))


def l1_window_bound(f: dict[int, complex], J: tuple[float, float], v: Potential,
                    alpha: float, theta: float, tol: float = 1e-8) -> float:
    """Upper proxy for mu^f(J) via the seminorm triangle inequality:
    (sum_k |f(k)| w_k^{1/2})^2, with w_k the smoothed window at phase
    theta + k alpha and eps = |J|/2 centered on J.

    Per-vector measures are bounded through the shift identity
    mu^{e_k}_x = mu^{e_0}_{x + k alpha}; they are never computed
    independently.
    """
    a, b = min(J), max(J)
    mid, eps = 0.5 * (a + b), 0.5 * (b - a)
    if eps <= 0:
        raise ValueError("J must have positive length")
    total = 0.0
    for k in sorted(f):
        c = abs(f[k])
        if c == 0:
            continue
        wk = smoothed_window(mid, eps, v, alpha, theta + k * alpha, tol)
        total += c * math.sqrt(max(wk, 0.0))
    return total * total


@dataclass(frozen=True)
class GapRecord:
    e_left: float
    e_right: float
    n_plateau: float


def gap_edges(ids_table: IdsTable, plateau_tol: float | None = None) -> list[GapRecord]:
    """Maximal intervals (>= 3 grid points) where N is constant within
    plateau_tol; endpoints are gap edges.  Plateaus at N=0 and N=1
    (outside the spectrum) are not gaps and are dropped.

    Dirichlet ends leave up to two boundary eigenvalues inside a true
    gap, each stepping the box IDS by 1/size and splitting the plateau;
    adjacent plateaus whose levels differ by at most 3/size and whose
    separation is at most 3 grid steps are merged back into one gap.
    """
    Es = ids_table.energies
    Ns = ids_table.N_values
    if plateau_tol is None:
        plateau_tol = 0.5 / ids_table.size
    raw = []
    i = 0
    n = len(Es)
    while i < n:
        j = i
        lo = hi = Ns[i]
        while j + 1 < n:
            nlo, nhi = min(lo, Ns[j + 1]), max(hi, Ns[j + 1])
            if nhi - nlo > plateau_tol:
                break
            lo, hi, j = nlo, nhi, j + 1
        if j - i + 1 >= 3:
            raw.append((float(Es[i]), float(Es[j]), 0.5 * (lo + hi)))
        i = j + 1
    merged = []
    step = ids_table.grid_step
    for rec in raw:
        if merged and rec[0] - merged[-1][1] <= 3 * step \
                and abs(rec[2] - merged[-1][2]) <= 3.0 / ids_table.size:
            prev = merged[-1]
            merged[-1] = (prev[0], rec[1], 0.5 * (prev[2] + rec[2]))
        else:
            merged.append(rec)
    out = []
    for e_left, e_right, mid in merged:
        if 2 * plateau_tol < mid < 1 - 2 * plateau_tol:
            out.append(GapRecord(e_left=e_left, e_right=e_right, n_plateau=float(mid)))
    return out


def refine_gap_edge(v: Potential, alpha: float, gap: GapRecord, side: str,
                    half_width: float | None = None, size: int = 200000,
                    theta: float = 0.0, stages: int = 3, pts: int = 64) -> float:
    """Locate a gap edge to ~half_width/pts^stages via staged IDS scans.

    The plateau level is re-measured at the refinement box size (the
    coarse level is off by O(1/coarse size), far more than the 3/size
    crossing offset), then the energy where the box IDS leaves the
    plateau by more than the possible boundary-state count is narrowed
    by ``stages`` vectorised Sturm scans around the coarse edge.
    ``side`` is 'left' for the lower edge or 'right' for the upper.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    diag = np.asarray(v((theta + alpha * np.arange(size)) % 1.0), dtype=float)
    mid_gap = 0.5 * (gap.e_left + gap.e_right)
    level = float(sturm_counts(diag, np.array([mid_gap]))[0]) / size
    target = level - 3.0 / size if side == "left" else level + 3.0 / size
    edge = gap.e_left if side == "left" else gap.e_right
    if half_width is None:
        half_width = 0.5 * (gap.e_right - gap.e_left)
    lo, hi = edge - half_width, edge + half_width
    for _ in range(stages):
        grid = np.linspace(lo, hi, pts)
        N = sturm_counts(diag, grid) / size
        above = N >= target  # monotone: False ... True
        idx = int(np.searchsorted(above, True))
        idx = min(max(idx, 1), pts - 1)
        lo, hi = grid[idx - 1], grid[idx]
    return float(0.5 * (lo + hi))
