"""
Linearized Operator, Evans Function and Condition (D)

The linearized operator about a profile is
    L v = (B(x) v')' - (A(x) v)' + C(x) v,
    A(x) = df(u(x)) - dB(u(x))(., u'(x)),  B(x) = B(u(x)),
with C = 0 except in test-only planted systems. Its eigenvalue problem is
written in flux variables w = B v' - A v as the 2n-dimensional system
    v' = B^{-1}(w + A v),  w' = (lambda - C) v,
and the Evans function is the pairing at x = 0 of the n-fold exterior powers
of the decaying solution spaces at -inf and +inf.

Dependencies:
    - numpy: For array operations
    - scipy: For solve_ivp, CubicSpline, Schur forms, sparse assembly, dense eigensolves
      and nearest-point queries against the dispersion curves
    - pandas: For the contour sample table
    - tqdm: For progress over contour samples
"""
#%%
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Callable, Optional
import json
import logging
import os

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.linalg import eigvals, schur
from scipy.spatial import cKDTree
from tqdm import tqdm

from .errors import ConfigError, EssentialSpectrum, PhaseJump, StiffIntegration

logger = logging.getLogger(__name__)
#%%
@dataclass(frozen=True)
class EvansOptions:
    """
    Controls of Evans-function evaluation and contour winding.

    Args:
        r0 (float): Origin indentation and inner circle radius
        outer_radius (float): Radius of the D-shaped outer contour
        initial_samples (int): Samples per contour piece before refinement
        max_samples (int): Refinement cap per contour
        rtol, atol (float): solve_ivp tolerances
        gap_factor (float): Gap-lemma disk radius as a fraction of min a^2/(4 beta_max)
        tol_evans (float): |D| below this counts as a zero
        margin_fraction (float): Smallest accepted distance to the dispersion curves, per |lambda|
        margin_samples (int): Contour points per contour used for the margin
        lambda_zero (float): Replacement of lambda = 0
        half_width (float, optional): Integration endpoints +-X (default: profile grid ends)
        threads (int): Worker threads for contour sampling
        progress (bool): Show tqdm bars
    """
    r0: float = 1e-2
    outer_radius: float = 8.0
    initial_samples: int = 32
    max_samples: int = 2 ** 14
    rtol: float = 1e-8
    atol: float = 1e-10
    gap_factor: float = 0.5
    tol_evans: float = 1e-6
    margin_fraction: float = 0.05
    margin_samples: int = 4096
    lambda_zero: float = 1e-8
    half_width: Optional[float] = None
    threads: int = 1
    progress: bool = False

    def __post_init__(self):
        if not 0 < self.r0 < self.outer_radius:
            raise ConfigError("need 0 < r0 < outer_radius", r0=self.r0,
                              outer_radius=self.outer_radius)
        if self.initial_samples < 4 or self.max_samples < self.initial_samples:
            raise ConfigError("need 4 <= initial_samples <= max_samples")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
#%%
@dataclass(frozen=True)
class LinearizedSystem:
    """
    Coefficients of the operator linearized about a profile.

    Args:
        grid (np.ndarray): Profile grid
        A_values, B_values (np.ndarray): A(x_k), B(x_k), shape (n, n, K)
        A_minus, A_plus, B_minus, B_plus (np.ndarray): Endstate limits
        reaction (callable, optional): C(x), vectorized scalar coefficient
        name (str): Label of the underlying model
    """
    grid: np.ndarray
    A_values: np.ndarray
    B_values: np.ndarray
    A_minus: np.ndarray
    A_plus: np.ndarray
    B_minus: np.ndarray
    B_plus: np.ndarray
    reaction: Optional[Callable] = None
    name: str = "custom"
    _splines: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_splines", (
            CubicSpline(self.grid, self.A_values, axis=-1),
            CubicSpline(self.grid, self.B_values, axis=-1),
        ))

    @property
    def n(self):
        return self.A_minus.shape[0]

    def _extend(self, spline, x, left, right):
        x = np.asarray(x, dtype=float)
        inside = spline(np.clip(x, self.grid[0], self.grid[-1]))
        if x.ndim == 0:
            if x < self.grid[0]:
                return left.copy()
            return right.copy() if x > self.grid[-1] else inside
        out = np.where(x < self.grid[0], left[..., None], inside)
        return np.where(x > self.grid[-1], right[..., None], out)

    def A(self, x):
        return self._extend(self._splines[0], x, self.A_minus, self.A_plus)

    def B(self, x):
        return self._extend(self._splines[1], x, self.B_minus, self.B_plus)

    def C(self, x):
        if self.reaction is None:
            return np.zeros(np.shape(x))
        return np.asarray(self.reaction(np.asarray(x, dtype=float)), dtype=float)

    def with_reaction(self, reaction, name=None):
        """Copy of the system with reaction coefficient C(x)."""
        return LinearizedSystem(
            grid=self.grid, A_values=self.A_values, B_values=self.B_values,
            A_minus=self.A_minus, A_plus=self.A_plus, B_minus=self.B_minus,
            B_plus=self.B_plus, reaction=reaction, name=name or f"{self.name}+C",
        )

    def first_order_matrix(self, x, lam):
        """2n x 2n matrix of the eigenvalue ODE at x."""
        n = self.n
        Binv = np.linalg.inv(self.B(x))
        M = np.zeros((2 * n, 2 * n), dtype=complex)
        M[:n, :n] = Binv @ self.A(x)
        M[:n, n:] = Binv
        M[n:, :n] = (lam - self.C(x)) * np.eye(n)
        return M

    def asymptotic_matrix(self, side, lam):
        n = self.n
        A, B = (self.A_minus, self.B_minus) if side == "minus" else (self.A_plus, self.B_plus)
        Binv = np.linalg.inv(B)
        M = np.zeros((2 * n, 2 * n), dtype=complex)
        M[:n, :n] = Binv @ A
        M[:n, n:] = Binv
        M[n:, :n] = lam * np.eye(n)
        return M

    def gap_radius(self, factor=0.5):
        """Radius of the disk about 0 where D is continued into Re lambda < 0."""
        a = np.concatenate([np.linalg.eigvals(self.A_minus).real,
                            np.linalg.eigvals(self.A_plus).real])
        beta = max(np.max(np.linalg.eigvals(self.B_minus).real),
                   np.max(np.linalg.eigvals(self.B_plus).real))
        return float(factor * np.min(a ** 2) / (4.0 * beta))


def linearized_coefficients(model, profile, reaction=None):
    """
    A(x) = df(u) - dB(u)(., u') and B(x) = B(u) on the profile grid.

    Args:
        model (FluxModel): The system
        profile (Profile): Converged profile
        reaction (callable, optional): Test-only reaction coefficient C(x)

    Returns:
        LinearizedSystem: Coefficients with endstate limits
    """
    u, du = profile.values, profile.derivative
    n, K = u.shape
    A = model.jacobian(u).copy()
    for j in range(n):
        direction = np.zeros((n, K))
        direction[j] = 1.0
        A[:, j] -= model.viscosity_derivative(u, direction, du)
    B = model.viscosity(u)
    return LinearizedSystem(
        grid=profile.grid, A_values=A, B_values=B,
        A_minus=model.jacobian(model.u_minus), A_plus=model.jacobian(model.u_plus),
        B_minus=model.viscosity(model.u_minus), B_plus=model.viscosity(model.u_plus),
        reaction=reaction, name=model.name,
    )
#%%
def _permutation_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def _wedge_tables(N, k):
    """Index tables of the k-th compound of an N x N matrix and of the wedge pairing."""
    subsets = list(combinations(range(N), k))
    index = {s: i for i, s in enumerate(subsets)}
    rows, cols, src_row, src_col, signs = [], [], [], [], []
    for col, J in enumerate(subsets):
        for p, jp in enumerate(J):
            for i in range(N):
                if i in J and i != jp:
                    continue
                new = list(J)
                new[p] = i
                rows.append(index[tuple(sorted(new))])
                cols.append(col)
                src_row.append(i)
                src_col.append(jp)
                signs.append(_permutation_sign(new))
    complement, pair_sign = [], []
    for I in subsets:
        rest = tuple(i for i in range(N) if i not in I)
        complement.append(index[rest])
        pair_sign.append(_permutation_sign(I + rest))
    return (subsets, np.array(rows), np.array(cols), np.array(src_row), np.array(src_col),
            np.array(signs, dtype=float), np.array(complement), np.array(pair_sign, dtype=float))


def compound_matrix(M, k):
    """Matrix of the derivation induced by M on the k-th exterior power."""
    N = M.shape[0]
    subsets, rows, cols, src_row, src_col, signs, _, _ = _wedge_tables(N, k)
    out = np.zeros((len(subsets), len(subsets)), dtype=complex)
    np.add.at(out, (rows, cols), signs * M[src_row, src_col])
    return out


def plucker(Y):
    """Plücker coordinates of the column span of Y (N x k)."""
    N, k = Y.shape
    subsets = _wedge_tables(N, k)[0]
    return np.array([np.linalg.det(Y[list(I), :]) for I in subsets], dtype=complex)


def wedge_pairing(y_minus, y_plus, N, k):
    _, _, _, _, _, _, complement, pair_sign = _wedge_tables(N, k)
    return complex(np.sum(pair_sign * y_minus * y_plus[complement]))
#%%
def _growing(mu, lam, rho):
    """Modes that decay toward -inf, continued into the gap disk through slow modes."""
    if lam.real >= 0:
        return mu.real > 0
    slow = np.abs(mu) < rho
    with np.errstate(divide="ignore", invalid="ignore"):
        a_tilde = -lam / mu
    return np.where(slow, a_tilde.real < 0, mu.real > 0)


def _decaying_subspace(sys, side, lam, gap_factor):
    """Analytic basis P(lambda) R0 and trace of the decaying subspace at side."""
    n = sys.n
    rho = 0.5 * min(np.min(np.abs(np.linalg.eigvals(
        np.linalg.solve(B, A)))) for A, B in ((sys.A_minus, sys.B_minus),
                                               (sys.A_plus, sys.B_plus)))
    if lam.real < 0 and abs(lam) > sys.gap_radius(gap_factor):
        raise EssentialSpectrum(f"lambda = {lam} lies left of the admissible region",
                                lam=str(lam))
    M = sys.asymptotic_matrix(side, lam)
    mu, R = np.linalg.eig(M)
    grow = _growing(mu, lam, rho)
    chosen = grow if side == "minus" else ~grow
    if np.count_nonzero(chosen) != n:
        raise EssentialSpectrum(f"lambda = {lam}: {np.count_nonzero(chosen)} decaying modes "
                                f"at {side} instead of {n}", lam=str(lam))
    P = R[:, chosen] @ np.linalg.inv(R)[chosen, :]
    M_ref = sys.asymptotic_matrix(side, 1.0).real
    _, Z, sdim = schur(M_ref, output="real", sort="rhp" if side == "minus" else "lhp")
    return P @ Z[:, :sdim], complex(np.sum(mu[chosen]))


def evans_evaluate(sys, lam, options=None):
    """
    Evans function D(lambda) by the compound-matrix method.

    The n-fold exterior powers of the decaying subspaces are integrated from
    -X and +X to 0 with the analytic trace of the asymptotic subspace removed,
    then paired by the wedge product. lambda = 0 is replaced by a small
    positive lambda_zero.

    Args:
        sys (LinearizedSystem): Linearized coefficients
        lam (complex): Spectral parameter
        options (EvansOptions, optional): Controls

    Returns:
        complex: D(lambda)

    Raises:
        EssentialSpectrum: lambda outside the admissible region
        StiffIntegration: The integrator failed
    """
    options = options or EvansOptions()
    lam = complex(lam)
    if lam == 0:
        lam = complex(options.lambda_zero)
    n, N = sys.n, 2 * sys.n
    X = options.half_width or float(max(-sys.grid[0], sys.grid[-1]))
    values = []
    for side, start in (("minus", -X), ("plus", X)):
        basis, trace = _decaying_subspace(sys, side, lam, options.gap_factor)
        y0 = plucker(basis)
        shift = trace * np.eye(y0.size)

        def rhs(x, y):
            return (compound_matrix(sys.first_order_matrix(x, lam), n) - shift) @ y

        sol = solve_ivp(rhs, (start, 0.0), y0, method="DOP853",
                        rtol=options.rtol, atol=options.atol)
        if sol.status < 0:
            raise StiffIntegration(f"Evans ODE failed at lambda = {lam}: {sol.message}",
                                   lam=str(lam))
        values.append(sol.y[:, -1])
    return wedge_pairing(values[0], values[1], N, n)
#%%
class Contour:
    """
    Closed piecewise-parametrized curve in the lambda plane.

    Each piece maps t in [0, 1] to lambda; the global parameter s in [0, 1]
    runs through the pieces in order, counterclockwise.
    """

    def __init__(self, pieces, kind="custom", params=None):
        self.pieces = tuple(pieces)
        self.kind = kind
        self.params = params or {}

    def __call__(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        P = len(self.pieces)
        idx = np.minimum((s * P).astype(int), P - 1)
        local = s * P - idx
        out = np.empty(s.shape, dtype=complex)
        for k, piece in enumerate(self.pieces):
            sel = idx == k
            if np.any(sel):
                out[sel] = piece(local[sel])
        return out

    def to_dict(self):
        return {"kind": self.kind, "params": self.params}

    @classmethod
    def circle(cls, center=0.0, radius=1.0):
        def piece(t):
            return center + radius * np.exp(2j * np.pi * t)
        return cls([piece], "circle", {"center": [np.real(center), np.imag(center)],
                                        "radius": radius})

    @classmethod
    def polygon(cls, vertices):
        vertices = [complex(v) for v in vertices]
        pieces = []
        for a, b in zip(vertices, vertices[1:] + vertices[:1]):
            pieces.append(lambda t, a=a, b=b: a + (b - a) * t)
        return cls(pieces, "polygon", {"vertices": [[v.real, v.imag] for v in vertices]})

    @classmethod
    def rectangle(cls, re_min, re_max, im_min, im_max):
        c = cls.polygon([complex(re_min, im_min), complex(re_max, im_min),
                         complex(re_max, im_max), complex(re_min, im_max)])
        c.kind = "rectangle"
        c.params = {"re_min": re_min, "re_max": re_max, "im_min": im_min, "im_max": im_max}
        return c

    @classmethod
    def d_shape(cls, radius, r0):
        """Boundary of {Re lambda >= 0, r0 <= |lambda| <= radius}, origin indented."""
        pieces = [
            lambda t: radius * np.exp(1j * np.pi * (t - 0.5)),
            lambda t: 1j * (radius + (r0 - radius) * t),
            lambda t: r0 * np.exp(1j * np.pi * (0.5 - t)),
            lambda t: -1j * (r0 + (radius - r0) * t),
        ]
        return cls(pieces, "d_shape", {"radius": radius, "r0": r0})

    def split(self):
        """Two rectangles whose windings sum to this rectangle's."""
        if self.kind != "rectangle":
            raise ValueError("only rectangles can be split")
        p = self.params
        mid = 0.5 * (p["re_min"] + p["re_max"])
        return (Contour.rectangle(p["re_min"], mid, p["im_min"], p["im_max"]),
                Contour.rectangle(mid, p["re_max"], p["im_min"], p["im_max"]))
#%%
def ray_crossings(values):
    """Signed crossings of the positive real axis by a closed polygonal path."""
    x, y = values.real, values.imag
    winding = 0
    above = y[0] >= 0
    for i in range(1, len(x)):
        if (y[i] >= 0) != above:
            above = y[i] >= 0
            if x[i] > 0 and x[i - 1] > 0:
                winding += 2 * above - 1
            elif not (x[i] <= 0 and x[i - 1] <= 0):
                cross = (x[i - 1] * y[i] - x[i] * y[i - 1]) / (y[i] - y[i - 1])
                if cross > 0:
                    winding += 2 * above - 1
    return winding


def _evaluate_many(sys, lams, options):
    if options.threads > 1:
        with ThreadPoolExecutor(max_workers=options.threads) as pool:
            return np.array(list(pool.map(lambda z: evans_evaluate(sys, z, options), lams)))
    it = tqdm(lams, desc="Evans samples", disable=not options.progress, leave=False)
    return np.array([evans_evaluate(sys, z, options) for z in it])


def sample_contour(sys, contour, options=None):
    """
    Adaptively sample D along a closed contour.

    Midpoints are inserted until every phase increment is below pi/2.

    Returns:
        tuple: (s, lambdas, D) closed arrays, the last entry repeating the first

    Raises:
        PhaseJump: The cap is reached with increments still >= pi/2, or D vanishes
    """
    options = options or EvansOptions()
    m = options.initial_samples * len(contour.pieces)
    s = np.linspace(0.0, 1.0, m + 1)[:-1]
    lams = contour(s)
    D = _evaluate_many(sys, lams, options)
    while True:
        closed = np.append(D, D[0])
        if np.min(np.abs(closed)) <= options.tol_evans:
            k = int(np.argmin(np.abs(D)))
            raise PhaseJump(f"D vanishes on the contour near lambda = {lams[k]}",
                            lam=str(lams[k]), modulus=float(abs(D[k])))
        steps = np.abs(np.angle(closed[1:] / closed[:-1]))
        bad = np.nonzero(steps >= np.pi / 2)[0]
        if bad.size == 0:
            break
        if s.size + bad.size > options.max_samples:
            raise PhaseJump("refinement cap reached with phase increments >= pi/2",
                            samples=int(s.size), max_increment=float(np.max(steps)))
        s_closed = np.append(s, 1.0)
        new_s = 0.5 * (s_closed[bad] + s_closed[bad + 1])
        new_D = _evaluate_many(sys, contour(new_s), options)
        s = np.concatenate([s, new_s])
        D = np.concatenate([D, new_D])
        order = np.argsort(s)
        s, D = s[order], D[order]
        lams = contour(s)
        logger.debug("contour %s refined to %d samples", contour.kind, s.size)
    return np.append(s, 1.0), np.append(lams, lams[0]), np.append(D, D[0])


def winding_numbers(values):
    """Ray-crossing count and phase-sum winding of a closed sampled path."""
    values = np.asarray(values)
    phase = float(np.sum(np.angle(values[1:] / values[:-1])) / (2 * np.pi))
    return ray_crossings(values), phase


def winding_count(sys, contour, options=None):
    """
    Winding number of D around 0 along the contour (zeros enclosed, with multiplicity).

    Raises:
        PhaseJump: Refinement cap reached, or the ray count and phase sum disagree
    """
    s, lams, D = sample_contour(sys, contour, options)
    winding, phase = winding_numbers(D)
    if winding != int(np.round(phase)):
        raise PhaseJump(f"ray count {winding} and phase sum {phase:.3f} disagree on {contour.kind}",
                        winding=winding, phase=phase)
    return winding
#%%
def essential_spectrum_curves(sys, k=None):
    """Dispersion curves lambda(k) in sigma(-ik A_+- - k^2 B_+-), flattened."""
    if k is None:
        k = np.concatenate([-np.geomspace(1e-3, 1e2, 400)[::-1], [0.0], np.geomspace(1e-3, 1e2, 400)])
    curves = []
    for A, B in ((sys.A_minus, sys.B_minus), (sys.A_plus, sys.B_plus)):
        for kk in k:
            curves.append(np.linalg.eigvals(-1j * kk * A - kk ** 2 * B))
    return np.concatenate(curves)


def essential_spectrum_margin(sys, lams, gap_factor=0.5, relative=False):
    """
    Distance of contour points outside the gap disk to the dispersion curves.

    Args:
        sys (LinearizedSystem): Linearized coefficients
        lams (np.ndarray): Contour points
        gap_factor (float): Gap-lemma disk radius factor
        relative (bool): Divide each distance by |lambda| before taking the minimum

    Returns:
        float or None: None when every point lies in the disk, where D is
        defined by continuation across the curves
    """
    lams = np.asarray(lams)
    outside = lams[np.abs(lams) > sys.gap_radius(gap_factor)]
    if outside.size == 0:
        return None
    curves = essential_spectrum_curves(sys)
    tree = cKDTree(np.column_stack([curves.real, curves.imag]))
    dist, _ = tree.query(np.column_stack([outside.real, outside.imag]))
    if relative:
        dist = dist / np.abs(outside)
    return float(np.min(dist))


def discretized_spectrum(sys, n_points=600, half_width=None):
    """
    Eigenvalues of L by second-order finite differences with Dirichlet ends.

    Args:
        sys (LinearizedSystem): Linearized coefficients
        n_points (int): Interior grid points
        half_width (float, optional): Truncated domain [-X, X]

    Returns:
        np.ndarray: Complex eigenvalues sorted by decreasing real part
    """
    n = sys.n
    X = half_width or min(float(max(-sys.grid[0], sys.grid[-1])), 30.0)
    x = np.linspace(-X, X, n_points + 2)
    h = x[1] - x[0]
    xi = x[1:-1]
    xh = 0.5 * (x[1:] + x[:-1])
    A = sys.A(x)
    Bh = sys.B(xh)
    C = sys.C(xi)
    m = n_points
    L = sparse.lil_matrix((n * m, n * m))
    for i in range(m):
        for p in range(n):
            row = n * i + p
            L[row, row] += C[i]
            for q in range(n):
                L[row, n * i + q] -= (Bh[p, q, i + 1] + Bh[p, q, i]) / h ** 2
                if i + 1 < m:
                    L[row, n * (i + 1) + q] += Bh[p, q, i + 1] / h ** 2 - A[p, q, i + 2] / (2 * h)
                if i > 0:
                    L[row, n * (i - 1) + q] += Bh[p, q, i] / h ** 2 + A[p, q, i] / (2 * h)
    values = eigvals(L.toarray())
    return values[np.argsort(-values.real)]
#%%
@dataclass
class EvansRecord:
    """Outcome of the condition (D) check."""
    contour: dict
    lambdas: np.ndarray
    samples: np.ndarray
    winding: int
    ell_expected: int
    inner_winding: int
    essential_spectrum_margin: Optional[float]
    verdict: bool
    message: str
    inner_lambdas: np.ndarray = None
    inner_samples: np.ndarray = None
    margin_ratio: Optional[float] = None
    phase_windings: tuple = None

    def to_dict(self):
        return {
            "contour": self.contour,
            "vertices": [[z.real, z.imag] for z in self.lambdas],
            "samples": [[z.real, z.imag] for z in self.samples],
            "winding": int(self.winding),
            "inner_winding": int(self.inner_winding),
            "ell_expected": self.ell_expected,
            "essential_spectrum_margin": self.essential_spectrum_margin,
            "margin_ratio": self.margin_ratio,
            "phase_windings": None if self.phase_windings is None else list(self.phase_windings),
            "verdict": self.verdict,
            "message": self.message,
        }

    def to_frame(self):
        frames = []
        for label, lams, D in (("outer", self.lambdas, self.samples),
                               ("inner", self.inner_lambdas, self.inner_samples)):
            if lams is None:
                continue
            frames.append(pd.DataFrame({"contour": label, "re_lambda": lams.real,
                                        "im_lambda": lams.imag, "re_D": D.real,
                                        "im_D": D.imag}))
        return pd.concat(frames, ignore_index=True)

    def write(self, folder):
        os.makedirs(folder, exist_ok=True)
        with open(os.path.join(folder, "evans.json"), "w") as f:
            json.dump(self.to_dict(), f, indent=4, sort_keys=True)
        self.to_frame().to_csv(os.path.join(folder, "evans.csv"), index=False)


def check_condition_D(sys, ell, options=None):
    """
    Condition (D): no zeros of D in Re lambda >= 0 except ell at the origin.

    The outer D-shaped contour must have winding 0 and the circle of radius
    r0 about the origin winding ell. Both contours must keep a distance of
    margin_fraction |lambda| from the dispersion curves outside the gap disk,
    and on each contour the ray count must agree with the phase sum.

    Returns:
        EvansRecord: Windings, samples and verdict
    """
    options = options or EvansOptions()
    outer = Contour.d_shape(options.outer_radius, options.r0)
    inner = Contour.circle(0.0, options.r0)
    _, lams, D = sample_contour(sys, outer, options)
    outer_winding, outer_phase = winding_numbers(D)
    _, inner_lams, inner_D = sample_contour(sys, inner, options)
    inner_winding, inner_phase = winding_numbers(inner_D)
    s = np.linspace(0.0, 1.0, options.margin_samples, endpoint=False)
    dense = np.concatenate([outer(s), inner(s)])
    margin = essential_spectrum_margin(sys, dense, options.gap_factor)
    ratio = essential_spectrum_margin(sys, dense, options.gap_factor, relative=True)
    messages = []
    if outer_winding != 0:
        messages.append(f"{outer_winding} zero(s) in the nonstable half-plane")
    if inner_winding != ell:
        messages.append(f"origin multiplicity {inner_winding} ≠ {ell}")
    if ratio is not None and ratio < options.margin_fraction:
        messages.append(f"contour within {ratio:.3g}|lambda| of the essential spectrum")
    for label, count, phase in (("outer", outer_winding, outer_phase),
                                ("inner", inner_winding, inner_phase)):
        if count != int(np.round(phase)):
            messages.append(f"{label} ray count {count} and phase sum {phase:.3f} disagree")
    verdict = not messages
    logger.info("condition (D) for %s: outer %d, origin %d, ell %d", sys.name,
                outer_winding, inner_winding, ell)
    return EvansRecord(
        contour={"outer": outer.to_dict(), "inner": inner.to_dict()},
        lambdas=lams, samples=D, winding=outer_winding, ell_expected=int(ell),
        inner_winding=inner_winding, essential_spectrum_margin=margin, verdict=verdict,
        message="; ".join(messages) or "pass", inner_lambdas=inner_lams, inner_samples=inner_D,
        margin_ratio=ratio, phase_windings=(outer_phase, inner_phase),
    )
