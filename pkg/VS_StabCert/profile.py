"""
Viscous Shock Profiles

This module computes the traveling wave B(u)u' = f(u) - f(u_-) joining u_-
to u_+, the dimension of the connection manifold, and the local family of
profiles around a base connection.

The profile is found by shooting out of the unstable subspace at u_- and then
refined as a two-point boundary value problem on a doubled half line:
uL(xi) = u(-xi) and uR(xi) = u(xi) for xi in [0, X], matched at xi = 0 and
closed by projection conditions at xi = X.

Dependencies:
    - numpy: For array operations
    - scipy: For solve_bvp, solve_ivp, CubicSpline, brentq and Schur forms
    - pandas: For writing profile tables
"""
#%%
from dataclasses import dataclass, field
from typing import Optional
import json
import logging
import os

import numpy as np
import pandas as pd
from scipy.integrate import solve_bvp, solve_ivp, trapezoid
from scipy.interpolate import CubicSpline
from scipy.linalg import null_space, schur
from scipy.optimize import brentq

from .errors import (
    ConfigError, ContinuationFailed, NoConnection, NonTransverse, SingularViscosity,
    UnsupportedShockKind,
)
from .model import (
    LAX, OVERCOMPRESSIVE, UNDERCOMPRESSIVE, classify, endstate_spectrum, mass_projection,
)

logger = logging.getLogger(__name__)

HYPERBOLIC_TOL = 1e-10
COND_MAX = 1e12
#%%
@dataclass(frozen=True)
class ProfileOptions:
    """
    Controls of the profile solver.

    Args:
        tol_tail (float): Target distance of the truncated tails to u_+-
        tol_profile (float): Accepted max-norm ODE residual on the output grid
        n_points (int): Output grid size (odd, so x = 0 is a node)
        bvp_tol (float): Collocation tolerance passed to solve_bvp
        max_nodes (int): Collocation mesh cap
        seed_scale (float): Distance of the shooting seeds from u_-
        inner_fraction (float): Share of grid points in |x| <= 10/eta
        half_width (float, optional): Override of the truncation X
        max_seeds (int): Number of shooting seeds tried by collocation
    """
    tol_tail: float = 1e-10
    tol_profile: float = 1e-8
    n_points: int = 1201
    bvp_tol: float = 1e-10
    max_nodes: int = 200000
    seed_scale: float = 1e-6
    inner_fraction: float = 0.6
    half_width: Optional[float] = None
    max_seeds: int = 4

    def __post_init__(self):
        if not (0 < self.tol_tail < 1 and 0 < self.tol_profile < 1 and 0 < self.bvp_tol < 1):
            raise ConfigError("profile tolerances must lie in (0, 1)")
        if self.n_points < 11:
            raise ConfigError("n_points must be at least 11", n_points=self.n_points)
        if not 0 < self.inner_fraction < 1:
            raise ConfigError("inner_fraction must lie in (0, 1)")
        if self.half_width is not None and self.half_width <= 0:
            raise ConfigError("half_width must be positive")
        if self.max_seeds < 1:
            raise ConfigError("max_seeds must be at least 1")
#%%
def _stack_endstate(u_ref, like):
    return np.asarray(u_ref, dtype=float).reshape((-1,) + (1,) * (np.ndim(like) - 1))


def solve_viscosity(model, u, rhs):
    """Solve B(u) y = rhs pointwise, vectorized over trailing axes."""
    Bm = np.moveaxis(model.viscosity(u), (0, 1), (-2, -1))
    r = np.moveaxis(np.asarray(rhs, dtype=float), 0, -1)
    cond = np.linalg.cond(Bm)
    if not np.all(np.isfinite(cond)) or np.max(cond) > COND_MAX:
        raise SingularViscosity("B(u) is not invertible", condition=float(np.max(cond)))
    return np.moveaxis(np.linalg.solve(Bm, r[..., None])[..., 0], -1, 0)


def traveling_wave_rhs(model, u):
    """
    Right-hand side of the profile ODE u' = B(u)^{-1}(f(u) - f(u_-)).

    Args:
        model (FluxModel): The system
        u (np.ndarray): States of shape (n,) or (n, m)

    Returns:
        np.ndarray: Same shape as u

    Raises:
        SingularViscosity: B(u) not invertible within tolerance
    """
    u = np.asarray(u, dtype=float)
    g = model.flux(u) - _stack_endstate(model.flux(model.u_minus), u)
    return solve_viscosity(model, u, g)


def traveling_wave_jacobian(model, u):
    """Linearization of traveling_wave_rhs at a single state u."""
    u = np.asarray(u, dtype=float)
    F = traveling_wave_rhs(model, u)
    basis = np.eye(model.n)
    cols = [model.jacobian(u)[:, j] - model.viscosity_derivative(u, basis[j], F)
            for j in range(model.n)]
    return np.linalg.solve(model.viscosity(u), np.column_stack(cols))
#%%
@dataclass(frozen=True)
class RestPointData:
    """Invariant subspaces of the linearized profile ODE at u_- and u_+."""
    J_minus: np.ndarray
    J_plus: np.ndarray
    unstable_minus: np.ndarray  # n x dU real basis
    stable_plus: np.ndarray     # n x dS real basis
    rate_minus: float
    rate_plus: float

    @property
    def dim_unstable(self):
        return self.unstable_minus.shape[1]

    @property
    def dim_stable(self):
        return self.stable_plus.shape[1]

    @property
    def ell_formula(self):
        return self.dim_unstable + self.dim_stable - self.J_minus.shape[0]

    @property
    def eta_estimate(self):
        return min(self.rate_minus, self.rate_plus)


def rest_point_data(model):
    """
    Unstable subspace at u_- and stable subspace at u_+ of the profile ODE.

    Raises:
        NoConnection: A rest point is not hyperbolic
    """
    out = {}
    for side, sort in (("minus", "rhp"), ("plus", "lhp")):
        J = traveling_wave_jacobian(model, model.endstate(side))
        values = np.linalg.eigvals(J)
        if np.min(np.abs(values.real)) < HYPERBOLIC_TOL:
            raise NoConnection(f"u_{side} is not a hyperbolic rest point", mismatch=np.inf)
        _, Z, sdim = schur(J, output="real", sort=sort)
        selected = values.real[values.real > 0] if side == "minus" else -values.real[values.real < 0]
        out[side] = (J, Z[:, :sdim], float(np.min(selected)) if selected.size else np.inf)
    return RestPointData(
        J_minus=out["minus"][0], J_plus=out["plus"][0],
        unstable_minus=out["minus"][1], stable_plus=out["plus"][1],
        rate_minus=out["minus"][2], rate_plus=out["plus"][2],
    )
#%%
@dataclass(frozen=True)
class Profile:
    """
    Discrete traveling wave on a clustered grid.

    Args:
        grid (np.ndarray): Strictly increasing abscissae, shape (K,)
        values (np.ndarray): Profile states, shape (n, K)
        derivative (np.ndarray): Profile derivative, shape (n, K)
        eta (float): Fitted exponential decay rate
        residual (float): Max-norm ODE residual on the grid
        ell (int): Dimension of the connection manifold
        u_minus, u_plus (np.ndarray): Endstates
        shock (ShockClassification): Classification of the shock
        model_name (str): Name of the generating model
        decay_constant (float): C in |u - u_+-| <= C exp(-eta |x|)
        unfolding_defect (float): Bordering parameter of a saddle-saddle solve, 0 otherwise
    """
    grid: np.ndarray
    values: np.ndarray
    derivative: np.ndarray
    eta: float
    residual: float
    ell: int
    u_minus: np.ndarray
    u_plus: np.ndarray
    shock: object = None
    model_name: str = "custom"
    decay_constant: float = 1.0
    unfolding_defect: float = 0.0
    _spline: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_spline", CubicSpline(self.grid, self.values, axis=1))

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def half_width(self):
        return float(max(-self.grid[0], self.grid[-1]))

    @property
    def tail_error(self):
        return float(max(np.linalg.norm(self.values[:, 0] - self.u_minus),
                         np.linalg.norm(self.values[:, -1] - self.u_plus)))

    def interpolate(self, x):
        """Profile at arbitrary x, extended by the endstates outside the grid."""
        x = np.asarray(x, dtype=float)
        inside = self._spline(np.clip(x, self.grid[0], self.grid[-1]))
        left = x < self.grid[0]
        right = x > self.grid[-1]
        out = np.where(left, self.u_minus.reshape((-1,) + (1,) * x.ndim), inside)
        return np.where(right, self.u_plus.reshape((-1,) + (1,) * x.ndim), out)

    def interpolate_derivative(self, x):
        x = np.asarray(x, dtype=float)
        inside = self._spline(np.clip(x, self.grid[0], self.grid[-1]), 1)
        outside = (x < self.grid[0]) | (x > self.grid[-1])
        return np.where(outside, 0.0, inside)

    def to_frame(self):
        data = {"x": self.grid}
        for i in range(self.n):
            data[f"u_{i + 1}"] = self.values[i]
        for i in range(self.n):
            data[f"du_{i + 1}"] = self.derivative[i]
        return pd.DataFrame(data)

    def to_dict(self):
        return {
            "model": self.model_name,
            "u_minus": self.u_minus.tolist(),
            "u_plus": self.u_plus.tolist(),
            "eta": self.eta,
            "decay_constant": self.decay_constant,
            "ell": self.ell,
            "residual": self.residual,
            "tail_error": self.tail_error,
            "unfolding_defect": self.unfolding_defect,
            "n_points": int(self.grid.size),
            "half_width": self.half_width,
            "shock": None if self.shock is None else self.shock.to_dict(),
        }

    def write(self, folder, tol_profile=1e-8):
        """
        Save profile.csv and profile.json into folder.

        Side Effects:
            Creates folder if needed
        """
        os.makedirs(folder, exist_ok=True)
        self.to_frame().to_csv(os.path.join(folder, "profile.csv"), index=False)
        payload = self.to_dict()
        payload["verdict"] = bool(self.residual <= tol_profile)
        with open(os.path.join(folder, "profile.json"), "w") as f:
            json.dump(payload, f, indent=4, sort_keys=True)
#%%
def clustered_grid(half_width, n_points, inner_width, inner_fraction=0.6):
    """
    Symmetric sinh-stretched grid with inner_fraction of the points in |x| <= inner_width.
    """
    t = np.linspace(-1.0, 1.0, n_points)
    ratio = inner_width / half_width
    if ratio >= inner_fraction:
        return half_width * t
    c = brentq(lambda c: np.arcsinh(np.sinh(c) * ratio) / c - inner_fraction, 1e-6, 60.0)
    return half_width * np.sinh(c * t) / np.sinh(c)


def _fit_decay(grid, values, u_minus, u_plus, scale, fallback):
    rates, tails = [], []
    for side_mask, end in ((grid < 0, u_minus), (grid > 0, u_plus)):
        d = np.linalg.norm(values - end[:, None], axis=0)
        sel = side_mask & (d > 1e-8 * scale) & (d < 1e-3 * scale)
        if np.count_nonzero(sel) >= 3:
            slope = np.polyfit(np.abs(grid[sel]), np.log(d[sel]), 1)[0]
            rates.append(-slope)
        tails.append((side_mask, d))
    eta = min(rates) if rates and min(rates) > 0 else fallback
    constant = 0.0
    for side_mask, d in tails:
        sel = side_mask & (d > 1e-9 * scale)
        if np.any(sel):
            constant = max(constant, float(np.max(d[sel] * np.exp(eta * np.abs(grid[sel])))))
    return float(eta), constant


def _phase_components(model, ell):
    jump = np.abs(model.u_minus - model.u_plus)
    return np.sort(np.argsort(-jump, kind="stable")[:ell])
#%%
class _DoubledProblem:
    """
    Collocation problem for (uL, uR[, q]) on [0, X].

    mode "phase":    ell midpoint conditions fix the member of the family
    mode "bordered": one midpoint condition and an unfolding parameter p
                     multiplying a localized forcing transverse to the orbit
    mode "chart":    ell mass coordinates q with q(0) = 0, q(X) = delta
    """

    def __init__(self, model, rest, mode, comps=(), forcing=None, eta=1.0,
                 base=None, projection=None, delta=None):
        self.model = model
        self.n = model.n
        self.mode = mode
        self.comps = np.asarray(comps, dtype=int)
        self.mid = 0.5 * (model.u_minus + model.u_plus)
        self.Y_minus = null_space(rest.unstable_minus.T)
        self.Y_plus = null_space(rest.stable_plus.T)
        self.forcing = forcing
        self.eta = eta
        self.base = base
        self.projection = projection
        self.delta = None if delta is None else np.atleast_1d(np.asarray(delta, dtype=float))

    def fun(self, xi, Y, p=None):
        n = self.n
        FL = traveling_wave_rhs(self.model, Y[:n])
        FR = traveling_wave_rhs(self.model, Y[n:2 * n])
        if self.mode == "bordered":
            push = p[0] * np.exp(-(self.eta * xi) ** 2) * self.forcing[:, None]
            FL, FR = FL + push, FR + push
        parts = [-FL, FR]
        if self.mode == "chart":
            drift = (Y[:n] - self.base.interpolate(-xi)) + (Y[n:2 * n] - self.base.interpolate(xi))
            parts.append(self.projection @ drift)
        return np.vstack(parts)

    def bc(self, ya, yb, p=None):
        n = self.n
        res = [ya[:n] - ya[n:2 * n]]
        if self.mode in ("phase", "bordered"):
            res.append(ya[n + self.comps] - self.mid[self.comps])
        res.append(self.Y_minus.T @ (yb[:n] - self.model.u_minus))
        res.append(self.Y_plus.T @ (yb[n:2 * n] - self.model.u_plus))
        if self.mode == "chart":
            res.append(ya[2 * n:])
            res.append(yb[2 * n:] - self.delta)
        return np.concatenate(res)

    def solve(self, mesh, Y0, p0, options):
        if self.mode == "bordered":
            return solve_bvp(self.fun, self.bc, mesh, Y0, p=p0, tol=options.bvp_tol,
                             max_nodes=options.max_nodes)
        return solve_bvp(lambda x, y: self.fun(x, y), lambda a, b: self.bc(a, b), mesh, Y0,
                         tol=options.bvp_tol, max_nodes=options.max_nodes)
#%%
def _shooting_seeds(rest):
    E = rest.unstable_minus
    seeds = []
    for i in range(E.shape[1]):
        seeds += [E[:, i], -E[:, i]]
    for i in range(E.shape[1]):
        for j in range(i + 1, E.shape[1]):
            for sign in (1.0, -1.0):
                v = E[:, i] + sign * E[:, j]
                seeds += [v / np.linalg.norm(v), -v / np.linalg.norm(v)]
    return seeds


def _shoot(model, rest, options, half_width, scale):
    """Trajectories out of u_- sorted by their closest approach to u_+."""
    bound = 1e3 * (1.0 + np.max(np.abs(np.concatenate([model.u_minus, model.u_plus]))))
    eps = options.seed_scale * max(1.0, scale)

    def arrived(x, u):
        return np.linalg.norm(u - model.u_plus) - 1e-6 * scale
    arrived.terminal = True

    def escaped(x, u):
        return np.linalg.norm(u) - bound
    escaped.terminal = True

    shots = []
    for v in _shooting_seeds(rest):
        sol = solve_ivp(lambda x, u: traveling_wave_rhs(model, u), (0.0, 4.0 * half_width),
                        model.u_minus + eps * v, method="LSODA", rtol=1e-10, atol=1e-13,
                        events=(arrived, escaped), dense_output=True)
        if sol.t.size < 2:
            continue
        xs = np.linspace(sol.t[0], sol.t[-1], 4001)
        us = sol.sol(xs)
        dist = np.linalg.norm(us - model.u_plus[:, None], axis=0)
        k = int(np.argmin(dist))
        shots.append((float(dist[k]), xs[:k + 1], us[:, :k + 1]))
    shots.sort(key=lambda s: s[0])
    return shots


def _guess_from_shot(model, shot, comps, shift):
    """Initial doubled-system guess from a trajectory, phased at the first midpoint crossing."""
    _, xs, us = shot
    c = comps[0]
    mid = 0.5 * (model.u_minus[c] + model.u_plus[c])
    sign = np.sign(model.u_plus[c] - model.u_minus[c])
    crossed = np.nonzero(sign * (us[c] - mid) >= 0)[0]
    x0 = xs[crossed[0]] if crossed.size else xs[xs.size // 2]
    xs = xs - x0 + shift

    def guess(x):
        out = np.empty((model.n, np.size(x)))
        for i in range(model.n):
            out[i] = np.interp(x, xs, us[i], left=model.u_minus[i], right=model.u_plus[i])
        return out
    return guess


def _output(model, sol, half_width, options, eta_guess):
    scale = float(np.linalg.norm(model.u_minus - model.u_plus))
    n = model.n
    grid = clustered_grid(half_width, options.n_points, min(10.0 / eta_guess, half_width),
                          options.inner_fraction)
    left = grid < 0
    xi = np.abs(grid)
    Y = sol.sol(xi)
    dY = sol.sol(xi, 1)
    values = np.where(left, Y[:n], Y[n:2 * n])
    derivative = np.where(left, -dY[:n], dY[n:2 * n])
    g = model.flux(values) - model.flux(model.u_minus)[:, None]
    Bu = np.einsum("ijk,jk->ik", model.viscosity(values), derivative)
    residual = float(np.max(np.abs(Bu - g)))
    eta, constant = _fit_decay(grid, values, model.u_minus, model.u_plus, scale, eta_guess)
    return grid, values, derivative, residual, eta, constant


def _classify_profile(model, ell):
    return classify(endstate_spectrum(model, "minus"), endstate_spectrum(model, "plus"), ell)
#%%
def solve_profile(model, options=None, initial_shift=0.0):
    """
    Compute the viscous profile joining u_- to u_+.

    Args:
        model (FluxModel): The system
        options (ProfileOptions, optional): Solver controls
        initial_shift (float): Translation applied to the shooting guess

    Returns:
        Profile: Converged profile, phase-normalized so that the component of
        largest endstate jump takes its midpoint value at x = 0

    Raises:
        NoConnection: No seed converges; carries the smallest mismatch found
    """
    options = options or ProfileOptions()
    rest = rest_point_data(model)
    ell_formula = rest.ell_formula
    if ell_formula < 0:
        raise NoConnection("unstable and stable manifolds cannot intersect",
                           mismatch=np.inf, ell_formula=ell_formula)
    saddle = ell_formula == 0
    ell = 1 if saddle else ell_formula
    scale = float(np.linalg.norm(model.u_minus - model.u_plus))
    eta_guess = rest.eta_estimate
    half_width = options.half_width or float(np.log(10.0 * scale / options.tol_tail) / eta_guess)
    comps = _phase_components(model, ell)

    shots = _shoot(model, rest, options, half_width, scale)
    if not shots:
        raise NoConnection("shooting produced no trajectory", mismatch=np.inf)
    best_mismatch = shots[0][0]
    logger.debug("%s: %d shots, best mismatch %.3e", model.name, len(shots), best_mismatch)

    t = np.linspace(0.0, 1.0, 301)
    inner = min(10.0 / eta_guess, half_width)
    mesh = np.abs(clustered_grid(half_width, 2 * t.size - 1, inner))[t.size - 1:]

    failures = []
    for shot in shots[:options.max_seeds]:
        for attempt in range(3):
            guess = _guess_from_shot(model, shot, comps, initial_shift)
            Y0 = np.vstack([guess(-mesh), guess(mesh)])
            if saddle:
                tangent = traveling_wave_rhs(model, guess(np.array([0.0]))[:, 0])
                forcing = null_space(tangent[None, :])[:, 0]
                problem = _DoubledProblem(model, rest, "bordered", comps[:1], forcing, eta_guess)
                sol = problem.solve(mesh, Y0, np.array([0.0]), options)
            else:
                problem = _DoubledProblem(model, rest, "phase", comps)
                sol = problem.solve(mesh, Y0, None, options)
            if not sol.success:
                failures.append(float(np.max(sol.rms_residuals)))
                break
            grid, values, derivative, residual, eta, constant = _output(
                model, sol, half_width, options, eta_guess)
            defect = float(abs(sol.p[0])) if saddle else 0.0
            tail = max(np.linalg.norm(values[:, 0] - model.u_minus),
                       np.linalg.norm(values[:, -1] - model.u_plus))
            if tail > options.tol_tail and options.half_width is None and attempt < 2:
                half_width *= 1.25
                mesh = np.abs(clustered_grid(half_width, 2 * t.size - 1, inner))[t.size - 1:]
                continue
            if residual > options.tol_profile or defect > options.tol_profile:
                failures.append(max(residual, defect))
                break
            profile = Profile(
                grid=grid, values=values, derivative=derivative, eta=eta, residual=residual,
                ell=ell, u_minus=model.u_minus.copy(), u_plus=model.u_plus.copy(),
                shock=_classify_profile(model, ell), model_name=model.name,
                decay_constant=constant, unfolding_defect=defect,
            )
            logger.info("%s profile: residual %.2e, eta %.3f, ell %d",
                        model.name, residual, eta, ell)
            return profile
    mismatch = min(failures + [best_mismatch])
    raise NoConnection(f"no seed converged for {model.name}", mismatch=mismatch)
#%%
def _continue_subspace(model, profile, basis, x_start, segments=12):
    """Transport span(basis) from x_start to 0 along the linearized profile ODE."""
    n, k = basis.shape
    Q = np.linalg.qr(basis)[0]

    def rhs(x, y):
        J = traveling_wave_jacobian(model, profile.interpolate(x))
        return (J @ y.reshape(n, k)).ravel()

    edges = np.linspace(x_start, 0.0, segments + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        sol = solve_ivp(rhs, (a, b), Q.ravel(), method="LSODA", rtol=1e-9, atol=1e-12)
        if not sol.success:
            raise NonTransverse(f"subspace continuation failed: {sol.message}")
        Q = np.linalg.qr(sol.y[:, -1].reshape(n, k))[0]
    return Q


def connection_indices(model, profile, rank_tol=1e-6):
    """
    Dimension of the connection manifold with a transversality check.

    ell = dU + dS - n from the rest-point linearizations; a saddle-saddle
    connection (dU + dS = n) is counted as ell = 1. The unstable subspace at
    u_- and the stable subspace at u_+ are carried to x = 0 and their sum must
    have rank dU + dS - ell.

    Raises:
        NonTransverse: The rank test fails
    """
    rest = rest_point_data(model)
    ell = rest.ell_formula if rest.ell_formula >= 1 else 1
    U = _continue_subspace(model, profile, rest.unstable_minus, profile.grid[0])
    S = _continue_subspace(model, profile, rest.stable_plus, profile.grid[-1])
    sv = np.linalg.svd(np.hstack([U, S]), compute_uv=False)
    rank = int(np.sum(sv > rank_tol * sv[0]))
    expected = rest.dim_unstable + rest.dim_stable - ell
    if rank != expected:
        raise NonTransverse(
            f"rank[U, S] = {rank}, expected {expected}", rank=rank, expected=expected,
            singular_values=sv.tolist(),
        )
    return ell
#%%
def _translate(profile, shift):
    values = profile.interpolate(profile.grid - shift)
    derivative = profile.interpolate_derivative(profile.grid - shift)
    return Profile(
        grid=profile.grid, values=values, derivative=derivative, eta=profile.eta,
        residual=profile.residual, ell=profile.ell, u_minus=profile.u_minus,
        u_plus=profile.u_plus, shock=profile.shock, model_name=profile.model_name,
        decay_constant=profile.decay_constant, unfolding_defect=profile.unfolding_defect,
    )


def uses_translation(profile):
    kind = profile.shock.kind if profile.shock is not None else LAX
    return kind in (LAX, UNDERCOMPRESSIVE) or profile.ell == 1


def profile_family(model, profile, delta, options=None):
    """
    Member u^delta of the local profile manifold.

    For ell = 1 (Lax and undercompressive kinds) this is the translate
    u(x - delta). For overcompressive kinds the member is re-solved with the
    mass chart delta = Pi * integral(u^delta - u) as boundary data, Pi the
    rows annihilating the outgoing modes.

    Args:
        model (FluxModel): The system
        profile (Profile): Base profile, the member delta = 0
        delta (float or array-like): Chart coordinate of length ell
        options (ProfileOptions, optional): Solver controls for re-solves

    Returns:
        Profile: The deformed profile on the base grid

    Raises:
        ContinuationFailed: The deformed connection does not converge
    """
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    if delta.size != profile.ell:
        raise ValueError(f"delta must have length ell = {profile.ell}")
    if not np.any(delta):
        return profile
    if uses_translation(profile):
        return _translate(profile, float(delta[0]))
    if profile.shock.kind != OVERCOMPRESSIVE:
        raise UnsupportedShockKind("mixed shocks with ell > 1 have no mass chart",
                                   kind=profile.shock.kind)

    options = options or ProfileOptions()
    rest = rest_point_data(model)
    Pi = mass_projection(endstate_spectrum(model, "minus"), endstate_spectrum(model, "plus"))
    half_width = profile.half_width
    xi = profile.grid[profile.grid >= 0]
    base = np.vstack([profile.interpolate(-xi), profile.interpolate(xi)])
    Y0 = np.vstack([base, np.outer(delta, xi / half_width)])
    problem = _DoubledProblem(model, rest, "chart", base=profile, projection=Pi, delta=delta)
    sol = problem.solve(xi, Y0, None, options)
    if not sol.success:
        raise ContinuationFailed(f"family member at delta={delta.tolist()} did not converge",
                                 message_bvp=sol.message, delta=delta.tolist())
    n = model.n
    left = profile.grid < 0
    Y = sol.sol(np.abs(profile.grid))
    dY = sol.sol(np.abs(profile.grid), 1)
    values = np.where(left, Y[:n], Y[n:2 * n])
    derivative = np.where(left, -dY[:n], dY[n:2 * n])
    g = model.flux(values) - model.flux(model.u_minus)[:, None]
    residual = float(np.max(np.abs(np.einsum("ijk,jk->ik", model.viscosity(values), derivative) - g)))
    return Profile(
        grid=profile.grid, values=values, derivative=derivative, eta=profile.eta,
        residual=residual, ell=profile.ell, u_minus=profile.u_minus, u_plus=profile.u_plus,
        shock=profile.shock, model_name=profile.model_name,
        decay_constant=profile.decay_constant,
    )


def family_tangent(model, profile, delta=None, step=1e-4, options=None):
    """
    d u^delta / d delta by central differences, shape (ell, n, K) on profile.grid.
    """
    delta = np.zeros(profile.ell) if delta is None else np.atleast_1d(np.asarray(delta, float))
    out = np.empty((profile.ell, profile.n, profile.grid.size))
    for i in range(profile.ell):
        e = np.zeros(profile.ell)
        e[i] = step
        up = profile_family(model, profile, delta + e, options)
        down = profile_family(model, profile, delta - e, options)
        out[i] = (up.values - down.values) / (2.0 * step)
    return out


def tangent_masses(model, profile, options=None):
    """Masses of the family tangents, an n x ell matrix."""
    return trapezoid(family_tangent(model, profile, options=options), profile.grid, axis=-1).T
#%%
class FamilyChart:
    """
    Local model of delta -> u^delta around a base point delta*.

    Translation families are exact. Otherwise the chart is the quadratic
    Taylor model built from central differences of re-solved members.
    """

    def __init__(self, model, profile, delta_star=None, step=1e-3, options=None):
        self.model = model
        self.root = profile
        self.ell = profile.ell
        self.delta_star = (np.zeros(self.ell) if delta_star is None
                           else np.atleast_1d(np.asarray(delta_star, dtype=float)))
        self.translation = uses_translation(profile)
        self.grid = profile.grid
        self.base = profile_family(model, profile, self.delta_star, options)
        if self.translation:
            return
        ell, h = self.ell, step
        members = {}

        def member(offset):
            key = tuple(np.round(offset / h).astype(int))
            if key not in members:
                members[key] = profile_family(model, profile, self.delta_star + offset, options).values
            return members[key]

        eye = np.eye(ell) * h
        u0 = self.base.values
        T = np.empty((ell, model.n, self.grid.size))
        H = np.empty((ell, ell, model.n, self.grid.size))
        for i in range(ell):
            T[i] = (member(eye[i]) - member(-eye[i])) / (2 * h)
            H[i, i] = (member(eye[i]) - 2 * u0 + member(-eye[i])) / h ** 2
            for j in range(i + 1, ell):
                H[i, j] = (member(eye[i] + eye[j]) - member(eye[i] - eye[j])
                           - member(-eye[i] + eye[j]) + member(-eye[i] - eye[j])) / (4 * h ** 2)
                H[j, i] = H[i, j]
        self._base_spline = CubicSpline(self.grid, u0, axis=-1)
        self._T_spline = CubicSpline(self.grid, T, axis=-1)
        self._H_spline = CubicSpline(self.grid, H, axis=-1)

    def _offset(self, delta):
        return np.atleast_1d(np.asarray(delta, dtype=float)) - self.delta_star

    def evaluate(self, delta, x=None):
        """u^delta at x (default the profile grid), shape (n, m)."""
        x = self.grid if x is None else np.asarray(x, dtype=float)
        d = self._offset(delta)
        if self.translation:
            return self.base.interpolate(x - d[0])
        xc = np.clip(x, self.grid[0], self.grid[-1])
        out = (self._base_spline(xc) + np.einsum("i,i...->...", d, self._T_spline(xc))
               + 0.5 * np.einsum("i,j,ij...->...", d, d, self._H_spline(xc)))
        outside_left = x < self.grid[0]
        outside_right = x > self.grid[-1]
        out = np.where(outside_left, self.base.u_minus[:, None], out)
        return np.where(outside_right, self.base.u_plus[:, None], out)

    def tangent(self, delta, x=None):
        """d u^delta / d delta at x, shape (ell, n, m)."""
        x = self.grid if x is None else np.asarray(x, dtype=float)
        d = self._offset(delta)
        if self.translation:
            return -self.base.interpolate_derivative(x - d[0])[None]
        xc = np.clip(x, self.grid[0], self.grid[-1])
        out = self._T_spline(xc) + np.einsum("j,ij...->i...", d, self._H_spline(xc))
        outside = (x < self.grid[0]) | (x > self.grid[-1])
        return np.where(outside, 0.0, out)
