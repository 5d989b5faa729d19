"""
Time Evolution, Phase Tracking and Bound Reports

Evolves perturbations of a stationary profile under the full system and its
linearization, recovers the shock location delta(t) from the integral
representation through the excited kernels, predicts delta(+inf) from mass
conservation, probes columns of the Green function against the remainder
envelope, and reports the pointwise and L^p ratios of the stability bounds
together with their change under horizon doubling.

The spatial scheme is a conservative finite-volume discretization with
central fluxes on a uniform grid and homogeneous Neumann ends; time stepping
is second-order IMEX (SBDF2), implicit in the frozen viscous operator and
explicit in the rest.

Dependencies:
    - numpy: For array operations
    - scipy: For sparse LU factorization, trapezoid and minimize_scalar
    - pandas: For trajectory and track tables
    - tqdm: For progress over time stepping and fixed-point sweeps
"""
#%%
from dataclasses import dataclass, field
from typing import Optional
import json
import logging
import os

import numpy as np
import pandas as pd
import scipy.sparse as sp
from scipy.integrate import trapezoid
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import splu
from tqdm import tqdm

from .errors import (
    BlowUp, ConfigError, DomainError, FixedPointDivergence, OrthogonalityViolation,
    RankDeficient, StepUnderflow, UnsupportedShockKind,
)
from .model import (
    LAX, OVERCOMPRESSIVE, classify, endstate_spectrum, mass_projection, outgoing_modes,
)
from .profile import FamilyChart, tangent_masses, uses_translation
from .templates import ExcitedKernel, green_envelope, psi1, psi2, source_psi, phi1, phi2, theta

logger = logging.getLogger(__name__)

SHAPES = ("zero", "algebraic", "gaussian", "translation", "outgoing")
#%%
@dataclass(frozen=True)
class EvolveControls:
    """
    Controls of a trajectory and its post-processing.

    Args:
        E0 (float): Amplitude of the initial perturbation
        T (float): Final time
        dx, dt (float): Grid spacing and initial time step
        n_snapshots (int): Stored times, half logarithmic and half uniform
        margin (float, optional): Extra half-width beyond a_max T; default 20 / eta
        blowup_factor (float): BlowUp once |u| exceeds blowup_factor * e0_cap
        e0_cap (float): Largest admissible sup |u0| (1+|x|)^{3/2}
        tol_cons (float): Per-step conservation residual
        tol_track (float): Allowed |delta - delta_fit| in units of E0
        tol_fixed_point (float): Relative change ending the delta iteration
        max_iterations (int): Fixed-point iteration cap
        tol_orthogonality (float): Allowed |int Pi S dy| and |int e(inf) u0 dy|
        track_points (int): Largest number of y nodes in tracking quadratures
        t_fit_min (float): First time of the L^p slope fits
        min_step_fraction (float): Smallest dt / dt0 before StepUnderflow
        shape (str): Initial perturbation shape
        progress (bool): Show progress bars
    """
    E0: float = 0.01
    T: float = 100.0
    dx: float = 0.1
    dt: float = 0.05
    n_snapshots: int = 200
    margin: Optional[float] = None
    blowup_factor: float = 10.0
    e0_cap: float = 0.1
    tol_cons: float = 1e-8
    tol_track: float = 1.0
    tol_fixed_point: float = 1e-8
    max_iterations: int = 25
    tol_orthogonality: float = 1e-5
    track_points: int = 4000
    t_fit_min: float = 10.0
    min_step_fraction: float = 2.0 ** -10
    shape: str = "algebraic"
    progress: bool = True

    def __post_init__(self):
        positive = ("E0", "T", "dx", "dt", "blowup_factor", "e0_cap", "tol_cons", "tol_track",
                    "tol_fixed_point", "tol_orthogonality", "min_step_fraction")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"evolution.{name} must be positive", value=getattr(self, name))
        if self.dt > self.T:
            raise ConfigError("evolution.dt must not exceed evolution.T", dt=self.dt, T=self.T)
        if self.n_snapshots < 4 or self.max_iterations < 1 or self.track_points < 16:
            raise ConfigError("evolution counts too small")
        if self.margin is not None and self.margin <= 0:
            raise ConfigError("evolution.margin must be positive", value=self.margin)
        if self.shape not in SHAPES:
            raise ConfigError(f"evolution.shape must be one of {SHAPES}", value=self.shape)
        if self.E0 > self.e0_cap:
            raise ConfigError("evolution.E0 exceeds evolution.e0_cap", E0=self.E0, cap=self.e0_cap)

    def replace(self, **changes):
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return EvolveControls(**values)
#%%
def max_speed(model):
    return float(max(np.max(np.abs(endstate_spectrum(model, side).a)) for side in ("minus", "plus")))


def evolution_grid(model, profile, controls, T=None):
    """Uniform grid x = k dx with half-width max(a_max T + margin, profile half-width)."""
    T = controls.T if T is None else T
    margin = controls.margin if controls.margin is not None else 20.0 / profile.eta
    X = max(max_speed(model) * T + margin, profile.half_width)
    K = int(np.ceil(X / controls.dx))
    return controls.dx * np.arange(-K, K + 1)


def snapshot_times(T, dt, count):
    """0, then half logarithmic and half uniform times, snapped to multiples of dt."""
    steps = int(round(T / dt))
    half = max(count // 2, 2)
    k = np.concatenate([np.geomspace(1, steps, half), np.linspace(0, steps, half + 1)])
    k = np.unique(np.clip(np.round(k), 0, steps).astype(int))
    return k * dt


def initial_perturbation(shape, E0, x, profile=None, model=None, center=0.0, width=1.0,
                         direction=None):
    """
    Initial data on the grid x, shape (n, N).

    Args:
        shape (str): "zero", "algebraic" E0 (1+|x|)^{-3/2} r, "gaussian" E0 exp(-(x-c)^2/2w^2) r,
            "translation" E0 u', or "outgoing" E0 (1+|x|)^{-3/2} r_out
        E0 (float): Amplitude
        x (np.ndarray): Grid
        profile (Profile, optional): Needed for "translation"
        model (FluxModel, optional): Needed for "outgoing" and the dimension
        center, width (float): Gaussian placement
        direction (array-like, optional): Unit vector r, default e_1

    Returns:
        np.ndarray: Initial perturbation
    """
    x = np.asarray(x, dtype=float)
    n = profile.n if profile is not None else (model.n if model is not None else 1)
    r = np.zeros(n)
    r[0] = 1.0
    if direction is not None:
        r = np.asarray(direction, dtype=float)
        r = r / np.linalg.norm(r)
    if shape == "zero":
        return np.zeros((n, x.size))
    if shape == "algebraic":
        return E0 * np.outer(r, (1.0 + np.abs(x)) ** -1.5)
    if shape == "gaussian":
        return E0 * np.outer(r, np.exp(-0.5 * ((x - center) / width) ** 2))
    if shape == "translation":
        if profile is None:
            raise ValueError("translation data needs a profile")
        return E0 * profile.interpolate_derivative(x)
    if shape == "outgoing":
        if model is None:
            raise ValueError("outgoing data needs a model")
        R_out = outgoing_modes(endstate_spectrum(model, "minus"), endstate_spectrum(model, "plus"))
        if R_out.shape[1] == 0:
            raise UnsupportedShockKind("the shock has no outgoing modes", model=model.name)
        return E0 * np.outer(R_out[:, 0], (1.0 + np.abs(x)) ** -1.5)
    raise ValueError(f"unknown initial shape {shape!r}")


def envelope_amplitude(u0, x):
    """E0 = sup |u0(x)| (1+|x|)^{3/2}."""
    return float(np.max(np.linalg.norm(u0, axis=0) * (1.0 + np.abs(x)) ** 1.5))
#%%
@dataclass
class PerturbationField:
    """
    Stored trajectory of a perturbation w = u~ - u(bar) on a uniform grid.

    Args:
        grid (np.ndarray): Cell centers, shape (N,)
        times (np.ndarray): Snapshot times t_0 = 0 < ... < t_m
        values (np.ndarray): Snapshots, shape (m+1, n, N)
        base (np.ndarray): Profile on the grid, shape (n, N)
        base_derivative (np.ndarray): Profile derivative on the grid
        dt, dx (float): Initial time step and spacing
        linear (bool): Linearized rather than full evolution
        E0 (float): Measured sup |u0| (1+|x|)^{3/2}
        mass (np.ndarray): int w dx per snapshot, shape (m+1, n)
        conservation_error (float): Largest per-step conservation residual
        steps (int): Accepted steps
    """
    grid: np.ndarray
    times: np.ndarray
    values: np.ndarray
    base: np.ndarray
    base_derivative: np.ndarray
    dt: float
    dx: float
    linear: bool
    E0: float
    mass: np.ndarray
    conservation_error: float
    steps: int
    model_name: str = "custom"
    scheme: str = "sbdf2"
    order: int = 2

    @property
    def n(self):
        return self.values.shape[1]

    @property
    def initial(self):
        return self.values[0]

    def sup_norms(self):
        return np.max(np.linalg.norm(self.values, axis=1), axis=-1)

    def to_frame(self, max_times=20):
        """Long table x, t, w_i over a logarithmic subset of the snapshots."""
        index = np.unique(np.round(np.geomspace(1, self.times.size, max_times)).astype(int) - 1)
        frames = []
        for j in index:
            data = {"x": self.grid, "t": np.full(self.grid.size, self.times[j])}
            for i in range(self.n):
                data[f"w_{i + 1}"] = self.values[j, i]
            frames.append(pd.DataFrame(data))
        return pd.concat(frames, ignore_index=True)

    def to_dict(self):
        return {
            "model": self.model_name, "linear": self.linear, "E0": self.E0,
            "T": float(self.times[-1]), "dt": self.dt, "dx": self.dx,
            "n_points": int(self.grid.size), "half_width": float(self.grid[-1]),
            "scheme": self.scheme, "order": self.order, "steps": self.steps,
            "conservation_error": self.conservation_error,
            "times": self.times.tolist(), "sup_norm": self.sup_norms().tolist(),
            "mass": self.mass.tolist(),
        }

    def write(self, folder, tol_cons=1e-8):
        """
        Save trajectory.csv and trajectory.json into folder.

        Side Effects:
            Creates folder if needed
        """
        os.makedirs(folder, exist_ok=True)
        self.to_frame().to_csv(os.path.join(folder, "trajectory.csv"), index=False)
        payload = self.to_dict()
        payload["verdict"] = bool(self.conservation_error <= tol_cons)
        with open(os.path.join(folder, "trajectory.json"), "w") as f:
            json.dump(payload, f, indent=4, sort_keys=True)
#%%
def _face_states(u):
    return 0.5 * (u[:, :-1] + u[:, 1:])


def viscous_operator(model, base, dx):
    """
    Sparse L w = D[B(u(bar))_{k+1/2} (w_{k+1} - w_k) / dx] with zero flux at both ends.

    Unknowns are ordered component-major, index i N + k.
    """
    n, N = base.shape
    Bf = model.viscosity(_face_states(base)) / dx ** 2
    k = np.arange(N - 1)
    rows, cols, vals = [], [], []
    for i in range(n):
        for j in range(n):
            b = Bf[i, j]
            if not np.any(b):
                continue
            rows += [i * N + k, i * N + k, i * N + k + 1, i * N + k + 1]
            cols += [j * N + k + 1, j * N + k, j * N + k + 1, j * N + k]
            vals += [b, -b, -b, b]
    if not rows:
        return sp.csc_matrix((n * N, n * N))
    return sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n * N, n * N)).tocsc()


def _divergence(g, Fv, dx):
    """-(F_{k+1/2} - F_{k-1/2}) / dx with central interior faces and boundary faces g."""
    faces = 0.5 * (g[:, :-1] + g[:, 1:]) - Fv
    faces = np.concatenate([g[:, :1], faces, g[:, -1:]], axis=1)
    return -(faces[:, 1:] - faces[:, :-1]) / dx, g[:, 0], g[:, -1]


def nonlinear_explicit(model, base, dx):
    """Explicit part of the perturbation equation; vanishes identically at w = 0."""
    f_base = model.flux(base)
    B_base = model.viscosity(_face_states(base))

    def explicit(w):
        u = base + w
        g = model.flux(u) - f_base
        du = (u[:, 1:] - u[:, :-1]) / dx
        Fv = np.einsum("ijk,jk->ik", model.viscosity(_face_states(u)) - B_base, du)
        return _divergence(g, Fv, dx)
    return explicit


def linear_explicit(model, base, base_x, dx):
    """Explicit part of v_t = (B v_x)_x - (A v)_x with A v = df v - (dB v) u(bar)'."""
    J = model.jacobian(base)

    def explicit(v):
        g = np.einsum("ijk,jk->ik", J, v) - model.viscosity_derivative(base, v, base_x)
        return _divergence(g, np.zeros((v.shape[0], v.shape[1] - 1)), dx)
    return explicit


class _ImexStepper:
    """SBDF2 with an IMEX Euler start; LU factors cached per (coefficient, dt)."""

    def __init__(self, L, explicit, shape):
        self.L = L
        self.explicit = explicit
        self.shape = shape
        self.eye = sp.identity(L.shape[0], format="csc")
        self._lu = {}

    def _solve(self, c, dt, rhs):
        key = (c, dt)
        if key not in self._lu:
            self._lu[key] = splu((c * self.eye - dt * self.L).tocsc())
        return self._lu[key].solve(rhs.ravel()).reshape(self.shape)

    def euler(self, w, E, dt):
        return self._solve(1.0, dt, w + dt * E)

    def sbdf2(self, w, w_prev, E, E_prev, dt):
        return self._solve(3.0, dt, 4.0 * w - w_prev + 2.0 * dt * (2.0 * E - E_prev))


def _march(x, w0, L, explicit, controls, T, desc):
    """
    Integrate to T, storing snapshots and the per-step conservation residual.

    Raises:
        BlowUp: |w| exceeds blowup_factor * e0_cap
        StepUnderflow: Non-finite steps persist below min_step_fraction * dt
    """
    dx = x[1] - x[0]
    times = snapshot_times(T, controls.dt, controls.n_snapshots)
    stepper = _ImexStepper(L, explicit, w0.shape)
    ceiling = controls.blowup_factor * controls.e0_cap
    dt = controls.dt
    t, w, steps = 0.0, w0.copy(), 0
    history = None
    snaps, masses = [w0.copy()], [w0.sum(axis=1) * dx]
    cons_error = 0.0
    k = 1
    with tqdm(total=len(times) - 1, desc=desc, disable=not controls.progress) as bar:
        while k < len(times):
            h = min(dt, times[k] - t)
            E, left, right = explicit(w)
            if history is not None and np.isclose(h, history[3]):
                w_prev, E_prev, bflux_prev, _ = history
                w_new = stepper.sbdf2(w, w_prev, E, E_prev, h)
                residual = ((3.0 * w_new - 4.0 * w + w_prev).sum(axis=1) * dx / (2.0 * h)
                            - (2.0 * (left - right) - bflux_prev))
            else:
                w_new = stepper.euler(w, E, h)
                residual = (w_new - w).sum(axis=1) * dx / h - (left - right)
            if not np.all(np.isfinite(w_new)):
                dt *= 0.5
                history = None
                if dt < controls.min_step_fraction * controls.dt:
                    raise StepUnderflow("time step underflow", time=t, dt=dt)
                logger.debug("non-finite step at t=%.4g, dt -> %.3g", t, dt)
                continue
            if np.max(np.abs(w_new)) > ceiling:
                raise BlowUp(f"perturbation exceeded {ceiling:.3g}", time=t + h)
            cons_error = max(cons_error, float(np.max(np.abs(residual))))
            history = (w, E, left - right, h)
            w, t = w_new, t + h
            steps += 1
            if np.isclose(t, times[k], rtol=0.0, atol=1e-9 * max(1.0, T)):
                t = times[k]
                snaps.append(w.copy())
                masses.append(w.sum(axis=1) * dx)
                k += 1
                bar.update(1)
    return times, np.array(snaps), np.array(masses), cons_error, steps


def _prepare(model, profile, u0, controls, T, x, cap=None):
    x = evolution_grid(model, profile, controls, T) if x is None else np.asarray(x, float)
    w0 = u0(x) if callable(u0) else np.asarray(u0, dtype=float)
    w0 = np.atleast_2d(w0)
    if w0.shape != (profile.n, x.size):
        raise DomainError("initial data does not match the grid", shape=w0.shape, n_points=x.size)
    E0 = envelope_amplitude(w0, x)
    cap = controls.e0_cap if cap is None else cap
    if E0 > cap:
        raise DomainError(f"initial amplitude {E0:.3g} exceeds the cap {cap:.3g}", E0=E0, cap=cap)
    return x, w0, E0, profile.interpolate(x), profile.interpolate_derivative(x)


def evolve_nonlinear(model, profile, u0, T=None, controls=None, x=None):
    """
    Evolve u~ = u(bar) + w under u_t + f(u)_x = (B(u) u_x)_x.

    Args:
        model (FluxModel): The system
        profile (Profile): Stationary profile
        u0 (callable or np.ndarray): Initial perturbation, x -> (n, N) or values on x
        T (float, optional): Final time, default controls.T
        controls (EvolveControls, optional): Stepping controls
        x (np.ndarray, optional): Uniform grid, default evolution_grid

    Returns:
        PerturbationField: Snapshots of w
    """
    controls = controls or EvolveControls()
    T = controls.T if T is None else T
    x, w0, E0, base, base_x = _prepare(model, profile, u0, controls, T, x)
    dx = x[1] - x[0]
    L = viscous_operator(model, base, dx)
    times, values, mass, cons, steps = _march(x, w0, L, nonlinear_explicit(model, base, dx),
                                              controls, T, "Evolving nonlinear")
    logger.info("nonlinear run to T=%g: %d steps, sup|w| = %.3g", T, steps, np.max(np.abs(values[-1])))
    return PerturbationField(
        grid=x, times=times, values=values, base=base, base_derivative=base_x,
        dt=controls.dt, dx=dx, linear=False, E0=E0, mass=mass, conservation_error=cons,
        steps=steps, model_name=model.name,
    )


def evolve_linearized(model, profile, v0, T=None, controls=None, x=None):
    """Evolve v_t = (B v_x)_x - (A v)_x with coefficients frozen along the profile."""
    controls = controls or EvolveControls()
    T = controls.T if T is None else T
    x, w0, E0, base, base_x = _prepare(model, profile, v0, controls, T, x, cap=np.inf)
    dx = x[1] - x[0]
    L = viscous_operator(model, base, dx)
    times, values, mass, cons, steps = _march(
        x, w0, L, linear_explicit(model, base, base_x, dx),
        controls.replace(e0_cap=max(controls.e0_cap, E0)), T, "Evolving linearized")
    return PerturbationField(
        grid=x, times=times, values=values, base=base, base_derivative=base_x,
        dt=controls.dt, dx=dx, linear=True, E0=E0, mass=mass, conservation_error=cons,
        steps=steps, model_name=model.name,
    )
#%%
@dataclass
class GreenProbe:
    """
    Fitted constants of |G - E| <= C (remainder envelope) for one source point.

    The unsubtracted column G must not fit the decaying envelope: its ratio
    to the envelope either grows by raw_growth_factor from mid-horizon to T or
    its constant exceeds the remainder constant by raw_excess_factor.
    """
    y0: float
    widths: tuple
    fitted_C: list
    refinement_ratio: float
    times: np.ndarray
    remainder_sup: np.ndarray
    raw_sup: np.ndarray
    raw_fitted_C: list = field(default_factory=list)
    remainder_ratio: np.ndarray = None
    raw_ratio: np.ndarray = None
    tol_refine: float = 0.1
    raw_growth_factor: float = 2.0
    raw_excess_factor: float = 10.0

    @property
    def raw_growth(self):
        """Sup of |G| / envelope at T over its value at T/2."""
        if self.raw_ratio is None:
            return None
        mid = int(np.argmin(np.abs(self.times - 0.5 * self.times[-1])))
        if self.raw_ratio[mid] <= 0:
            return np.inf
        return float(self.raw_ratio[-1] / self.raw_ratio[mid])

    @property
    def raw_rejected(self):
        if not self.raw_fitted_C:
            return False
        raw_C, C = self.raw_fitted_C[-1], self.fitted_C[-1]
        if not np.isfinite(raw_C):
            return True
        growth = self.raw_growth
        return bool((growth is not None and growth >= self.raw_growth_factor)
                    or raw_C >= self.raw_excess_factor * C)

    @property
    def verdict(self):
        return bool(all(np.isfinite(self.fitted_C)) and abs(self.refinement_ratio - 1.0) <= self.tol_refine
                    and self.raw_rejected)

    def to_dict(self):
        return {
            "y0": self.y0, "widths": list(self.widths), "fitted_C": list(self.fitted_C),
            "raw_fitted_C": list(self.raw_fitted_C), "raw_growth": self.raw_growth,
            "raw_rejected": self.raw_rejected,
            "refinement_ratio": self.refinement_ratio, "times": self.times.tolist(),
            "remainder_sup": self.remainder_sup.tolist(), "raw_sup": self.raw_sup.tolist(),
            "verdict": self.verdict,
        }


def green_probe(model, profile, params, y0=-5.0, widths=(0.5, 0.25), T=30.0, controls=None,
                t_min=1.0, rel_floor=1e-6):
    """
    Compare numerical Green columns, minus their excited part, with the remainder envelope.

    Each column starts as a unit-mass Gaussian at y0 in one component. The excited
    part E(x, t; y0) = sum_j d u^delta / d delta_j (x) e_j(y0, t) is subtracted and
    |G - E| is divided by the envelope wherever the envelope exceeds rel_floor
    times its maximum at that time. The unsubtracted |G| is divided the same way.

    Args:
        model (FluxModel): The system
        profile (Profile): Stationary profile
        params (TemplateParams): Envelope constants and kernel weights
        y0 (float): Source point
        widths (tuple): Gaussian widths, successively halved for the refinement ratio
        T (float): Final time
        controls (EvolveControls, optional): Stepping controls
        t_min (float): First compared time
        rel_floor (float): Relative envelope floor of the compared region

    Returns:
        GreenProbe: Fitted constants per width and the refinement ratio
    """
    controls = (controls or EvolveControls()).replace(T=T, progress=False)
    x = evolution_grid(model, profile, controls, T)
    if not x[0] + 10 < y0 < x[-1] - 10:
        raise DomainError("y0 must lie inside the grid", y0=y0)
    kernel = ExcitedKernel(params)
    tangent = FamilyChart(model, profile).tangent(np.zeros(profile.ell), x)
    fitted, raw_fitted = [], []
    remainder_sup = raw_sup = times = rem_ratio = raw_ratio = None
    for width in widths:
        rem_t = raw_t = rem_ratio = raw_ratio = None
        for j in range(profile.n):
            v0 = np.zeros((profile.n, x.size))
            v0[j] = np.exp(-0.5 * ((x - y0) / width) ** 2) / (width * np.sqrt(2.0 * np.pi))
            run = evolve_linearized(model, profile, v0, T, controls, x)
            times = run.times
            e = kernel(np.full(times.size, y0), times)[:, j]
            excited = np.einsum("lnk,lm->mnk", tangent, e)
            rem = np.linalg.norm(run.values - excited, axis=1)
            raw = np.linalg.norm(run.values, axis=1)
            rem_t = rem.max(axis=1) if rem_t is None else np.maximum(rem_t, rem.max(axis=1))
            raw_t = raw.max(axis=1) if raw_t is None else np.maximum(raw_t, raw.max(axis=1))
            if rem_ratio is None:
                rem_ratio, raw_ratio = np.zeros(times.size), np.zeros(times.size)
            for m in np.nonzero(times >= t_min)[0]:
                env = green_envelope(x, times[m], y0, params)
                region = env >= rel_floor * env.max()
                rem_ratio[m] = max(rem_ratio[m], float(np.max(rem[m][region] / env[region])))
                raw_ratio[m] = max(raw_ratio[m], float(np.max(raw[m][region] / env[region])))
        fitted.append(float(rem_ratio.max()))
        raw_fitted.append(float(raw_ratio.max()))
        remainder_sup, raw_sup = rem_t, raw_t
    ratio = fitted[-1] / fitted[-2] if len(fitted) > 1 and fitted[-2] > 0 else 1.0
    logger.info("green probe at y0=%g: C = %s, raw C = %s", y0, fitted, raw_fitted)
    return GreenProbe(y0=y0, widths=tuple(widths), fitted_C=fitted, refinement_ratio=ratio,
                      times=times, remainder_sup=remainder_sup, raw_sup=raw_sup,
                      raw_fitted_C=raw_fitted, remainder_ratio=rem_ratio, raw_ratio=raw_ratio)
#%%
@dataclass
class ShockTrack:
    """
    Shock location history.

    Args:
        times (np.ndarray): Snapshot times
        delta (np.ndarray): Functional estimate, shape (m, ell)
        delta_dot (np.ndarray): Its time derivative
        delta_fit (np.ndarray, optional): Least-squares fit, shape (m, ell)
        delta_infinity (np.ndarray): Mass-predicted limit, or delta(T) without a mass relation
        method (str): "mass" or "final" origin of delta_infinity
        kind (str): Shock kind
        delta_star (np.ndarray, optional): Centering point of an overcompressive run
        masses (np.ndarray, optional): Outgoing masses m_j^+-
        iterations (int): Fixed-point iterations used
        E0 (float): Initial amplitude
        diagnostics (dict): Orthogonality residuals and source ratios
    """
    times: np.ndarray
    delta: np.ndarray
    delta_dot: np.ndarray
    delta_fit: Optional[np.ndarray]
    delta_infinity: np.ndarray
    method: str
    kind: str
    delta_star: Optional[np.ndarray] = None
    masses: Optional[np.ndarray] = None
    iterations: int = 0
    E0: float = 0.0
    tol_track: float = 1.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def ell(self):
        return self.delta.shape[1]

    def disagreement(self, t_min=1.0):
        """max |delta - delta_fit| over t >= t_min; delta vanishes at t = 0 while the fit does not."""
        if self.delta_fit is None:
            return None
        mask = self.times >= t_min
        if not np.any(mask):
            return 0.0
        return float(np.max(np.abs(self.delta[mask] - self.delta_fit[mask])))

    @property
    def verdict(self):
        gap = self.disagreement()
        return bool(gap is None or gap <= self.tolerance)

    @property
    def tolerance(self):
        """tol_track E0 + 10 E0^2, the allowed gap between delta and its fit."""
        return self.tol_track * self.E0 + 10.0 * self.E0 ** 2

    def to_frame(self):
        data = {"t": self.times}
        for j in range(self.ell):
            data[f"delta_{j + 1}"] = self.delta[:, j]
            data[f"delta_dot_{j + 1}"] = self.delta_dot[:, j]
            if self.delta_fit is not None:
                data[f"delta_fit_{j + 1}"] = self.delta_fit[:, j]
        return pd.DataFrame(data)

    def to_dict(self):
        return {
            "kind": self.kind, "method": self.method, "E0": self.E0, "iterations": self.iterations,
            "delta_final": self.delta[-1].tolist(),
            "delta_infinity": np.asarray(self.delta_infinity).tolist(),
            "delta_star": None if self.delta_star is None else self.delta_star.tolist(),
            "masses": None if self.masses is None else np.asarray(self.masses).tolist(),
            "disagreement": self.disagreement(), "tol_track": self.tol_track, "tolerance": self.tolerance,
            "diagnostics": self.diagnostics, "verdict": self.verdict,
        }

    def write(self, folder):
        os.makedirs(folder, exist_ok=True)
        self.to_frame().to_csv(os.path.join(folder, "track.csv"), index=False)
        with open(os.path.join(folder, "track.json"), "w") as f:
            json.dump(self.to_dict(), f, indent=4, sort_keys=True)


def quadratic_source(model, base, base_x, u, u_x):
    """Q = f(u+w) - f(u) - df(u) w - [(B(u+w) - B(u))(u+w)_x - (dB(u) w) u_x], u the base."""
    full = base + u
    convective = model.flux(full) - model.flux(base) - np.einsum("ijk,jk->ik", model.jacobian(base), u)
    viscous = (np.einsum("ijk,jk->ik", model.viscosity(full) - model.viscosity(base), base_x + u_x)
               - model.viscosity_derivative(base, u, base_x))
    return convective - viscous


def centering_source(model, base, base_x, star, star_x, u, u_x):
    """R: linear part about the moving member minus the linear part about the center."""
    convective = np.einsum("ijk,jk->ik", model.jacobian(base) - model.jacobian(star), u)
    viscous = (np.einsum("ijk,jk->ik", model.viscosity(base) - model.viscosity(star), u_x)
               + model.viscosity_derivative(base, u, base_x)
               - model.viscosity_derivative(star, u, star_x))
    return convective - viscous


def _stride(field, controls):
    return max(1, int(np.ceil(field.grid.size / controls.track_points)))


def _kernel_history(kernel, y, times, sources, key, progress, desc):
    """For every t_i, int_0^{t_i} int K(y, t_i - s) . source(y, s) dy ds; shape (m, ell)."""
    out = np.zeros((times.size, kernel.params.ell))
    limit = kernel.limit(y)[0][:, :, None, :] if key == "e_minus_limit" else None
    for i in tqdm(range(1, times.size), desc=desc, disable=not progress, leave=False):
        tau = times[i] - times[:i + 1]
        terms = kernel.terms(y[None, :], tau[:, None])
        K = terms["e"] - limit if key == "e_minus_limit" else terms[key]
        inner = trapezoid(np.einsum("lnjk,jnk->ljk", K, sources[:i + 1]), y, axis=-1)
        out[i] = trapezoid(inner, times[:i + 1], axis=-1)
    return out


def _initial_term(kernel, y, times, u0, subtract_limit=False):
    e = kernel.terms(y[None, :], times[:, None])["e"]
    if subtract_limit:
        e = e - kernel.limit(y)[0][:, :, None, :]
    return trapezoid(np.einsum("lnjk,nk->jlk", e, u0), y, axis=-1)


def _iterate(update, m, ell, controls, desc):
    delta = np.zeros((m, ell))
    for iteration in range(1, controls.max_iterations + 1):
        new = update(delta)
        change = float(np.max(np.abs(new - delta))) / max(float(np.max(np.abs(new))), 1e-300)
        delta = new
        logger.debug("%s iteration %d: relative change %.3e", desc, iteration, change)
        if change < controls.tol_fixed_point:
            return delta, iteration
    raise FixedPointDivergence(f"{desc} did not converge in {controls.max_iterations} iterations",
                               change=change)


def _time_derivative(delta, times):
    return np.gradient(delta, times, axis=0) if times.size > 2 else np.zeros_like(delta)


def fit_translation(field, profile):
    """delta_fit(t) = argmin_delta |u~(., t) - u(bar)(. - delta)|_2 per snapshot."""
    x = field.grid
    out = np.zeros((field.times.size, 1))
    guess = 0.0
    for j, w in enumerate(field.values):
        state = field.base + w
        objective = lambda d: float(np.sum((state - profile.interpolate(x - d)) ** 2))
        res = minimize_scalar(objective, bounds=(guess - 2.0, guess + 2.0), method="bounded",
                              options={"xatol": 1e-12})
        guess = out[j, 0] = res.x
    return out


def _shifted(field, profile, delta):
    """Centered perturbation u(x, s) = u~(x + delta(s), s) - u(bar)(x)."""
    x = field.grid
    out = np.empty_like(field.values)
    for j, w in enumerate(field.values):
        shifted = x + delta[j, 0]
        for i in range(field.n):
            out[j, i] = np.interp(shifted, x, w[i])
        out[j] += profile.interpolate(shifted) - field.base
    return out


def centered_perturbation(field, track, profile, chart=None):
    """u(x, t) = u~(x + delta(t), t) - u(bar)(x), or u~ - u^delta(t) on a mass chart."""
    if chart is None or chart.translation:
        return _shifted(field, profile, track.delta)
    return np.stack([field.base + w - chart.evaluate(d, field.grid)
                     for w, d in zip(field.values, track.delta)])


def asymptotic_location(model, u0, x=None, profile=None, ell=None):
    """
    Mass split int u0 = sum_j m(d u^delta/d delta_j) delta_j + sum_k m_k r_k(outgoing).

    Args:
        model (FluxModel): The system
        u0 (np.ndarray): Initial perturbation on x, shape (n, N), or its mass vector (n,)
        x (np.ndarray, optional): Grid of u0
        profile (Profile, optional): Gives the kind and the tangent masses of an
            overcompressive family; without it the mass chart Pi m = I is assumed
        ell (int, optional): Manifold dimension when no profile is given

    Returns:
        tuple: delta_infinity (ell,), outgoing masses in outgoing_modes order

    Raises:
        UnsupportedShockKind: Undercompressive or mixed shocks
        RankDeficient: The mass system is singular
    """
    u0 = np.asarray(u0, dtype=float)
    mass = trapezoid(u0, x, axis=-1) if x is not None else np.atleast_1d(u0)
    spec_minus, spec_plus = endstate_spectrum(model, "minus"), endstate_spectrum(model, "plus")
    R_out = outgoing_modes(spec_minus, spec_plus)
    if profile is not None:
        kind, ell = profile.shock.kind, profile.ell
    else:
        ell = 1 if ell is None else ell
        kind = classify(spec_minus, spec_plus, ell).kind
    if kind == LAX:
        tangents = (model.u_minus - model.u_plus)[:, None]
    elif kind == OVERCOMPRESSIVE:
        tangents = (tangent_masses(model, profile) if profile is not None
                    else mass_projection(spec_minus, spec_plus).T)
    else:
        raise UnsupportedShockKind("no mass relation for this shock kind", kind=kind)
    system = np.hstack([tangents, R_out])
    if np.linalg.matrix_rank(system) < model.n:
        raise RankDeficient("mass system is rank deficient", rank=int(np.linalg.matrix_rank(system)),
                            n=model.n)
    solution = np.linalg.lstsq(system, mass, rcond=None)[0]
    return solution[:ell], solution[ell:]


def track_phase(field, kernel, model, profile, controls=None):
    """
    delta(t) = int e(y, t) u0 dy + int_0^t int e_y(y, t-s) (Q - delta' u)(y, s) dy ds.

    u is the centered perturbation u~(x + delta(s), s) - u(bar)(x); the whole history
    of delta is iterated to a fixed point starting from delta = 0.

    Sign convention: the family is the translate u(bar)(x - delta), whose tangent
    is -u(bar)'. Measuring the perturbation as the centered u above flips the sign
    of the initial term and of the delta' u term against the form written with the
    tangent +u(bar)'. So delta(inf) = int u0 / (u_- - u_+) for a scalar Lax shock,
    and data E0 u(bar)' = u(bar)(x + E0) - u(bar) + O(E0^2) gives delta -> -E0.

    Raises:
        UnsupportedShockKind: ell > 1
        FixedPointDivergence: No convergence within max_iterations
    """
    controls = controls or EvolveControls()
    if profile.ell != 1 or not uses_translation(profile):
        raise UnsupportedShockKind("track_phase needs a translation family", ell=profile.ell)
    stride = _stride(field, controls)
    y, times = field.grid[::stride], field.times
    base, base_x = field.base[:, ::stride], field.base_derivative[:, ::stride]
    start = _initial_term(kernel, y, times, field.initial[:, ::stride])
    dy = field.dx

    def update(delta):
        u = _shifted(field, profile, delta)
        u_x = np.gradient(u, dy, axis=-1)[..., ::stride]
        u = u[..., ::stride]
        delta_dot = _time_derivative(delta, times)
        sources = np.stack([quadratic_source(model, base, base_x, u[j], u_x[j]) - delta_dot[j, 0] * u[j]
                            for j in range(times.size)])
        return start + _kernel_history(kernel, y, times, sources, "e_y", controls.progress,
                                       "Tracking phase")

    delta, iterations = _iterate(update, times.size, 1, controls, "track_phase")
    kind = profile.shock.kind
    fit = fit_translation(field, profile)
    if kind == LAX:
        delta_inf, masses = asymptotic_location(model, field.initial, field.grid, profile)
        method = "mass"
    else:
        delta_inf, masses, method = delta[-1].copy(), None, "final"
    return ShockTrack(
        times=times, delta=delta, delta_dot=_time_derivative(delta, times), delta_fit=fit,
        delta_infinity=np.atleast_1d(delta_inf), method=method, kind=kind, masses=masses,
        iterations=iterations, E0=field.E0, tol_track=controls.tol_track,
    )


def track_phase_oc(field, kernel, model, profile, controls=None, params=None, chart=None):
    """
    Overcompressive phase on the mass chart around delta* = asymptotic_location.

    delta(t) = delta* + int (e(t) - e(inf)) u0 dy + int int (e - e(inf))(t-s) S dy ds
    + int int e_y(t-s) (Q + R) dy ds, with u = u~ - u^delta(s), S = (T* - T^delta(s)) delta'(s)
    and R the centering error of linearizing about u^delta* instead of u^delta(s).

    Raises:
        UnsupportedShockKind: Not an overcompressive profile
        OrthogonalityViolation: int e(inf) u0 or int Pi S exceeds tol_orthogonality
        FixedPointDivergence: No convergence within max_iterations
    """
    controls = controls or EvolveControls()
    if profile.shock is None or profile.shock.kind != OVERCOMPRESSIVE:
        raise UnsupportedShockKind("track_phase_oc needs an overcompressive profile")
    x, times, ell = field.grid, field.times, profile.ell
    delta_star, masses = asymptotic_location(model, field.initial, x, profile)
    chart = chart or FamilyChart(model, profile, delta_star=delta_star)
    Pi = mass_projection(endstate_spectrum(model, "minus"), endstate_spectrum(model, "plus"))
    stride = _stride(field, controls)
    y = x[::stride]
    star = chart.evaluate(delta_star, x)
    star_x = np.gradient(star, field.dx, axis=-1)
    u0 = field.base + field.initial - star
    zed0 = float(np.max(np.abs(trapezoid(np.einsum("lnk,nk->lk", kernel.limit(x)[0], u0), x, axis=-1))))
    if zed0 > controls.tol_orthogonality:
        raise OrthogonalityViolation("initial data is not centered", residual=zed0)
    T_star = chart.tangent(delta_star, x)
    start = delta_star + _initial_term(kernel, y, times, u0[:, ::stride], subtract_limit=True)
    worst_orth = [0.0]

    def update(delta):
        delta_dot = _time_derivative(delta, times)
        F, S = [], []
        for j, w in enumerate(field.values):
            d = delta_star + delta[j]
            member = chart.evaluate(d, x)
            member_x = np.gradient(member, field.dx, axis=-1)
            u = field.base + w - member
            u_x = np.gradient(u, field.dx, axis=-1)
            F.append((quadratic_source(model, member, member_x, u, u_x)
                      + centering_source(model, member, member_x, star, star_x, u, u_x))[:, ::stride])
            s_term = np.einsum("lnk,l->nk", T_star - chart.tangent(d, x), delta_dot[j])
            worst_orth[0] = max(worst_orth[0], float(np.max(np.abs(Pi @ trapezoid(s_term, x, axis=-1)))))
            S.append(s_term[:, ::stride])
        F, S = np.stack(F), np.stack(S)
        centered = start - delta_star
        centered = centered + _kernel_history(kernel, y, times, S, "e_minus_limit", controls.progress,
                                              "Tracking centering")
        centered = centered + _kernel_history(kernel, y, times, F, "e_y", controls.progress,
                                              "Tracking phase")
        return centered

    offset, iterations = _iterate(update, times.size, ell, controls, "track_phase_oc")
    if worst_orth[0] > controls.tol_orthogonality:
        raise OrthogonalityViolation("Pi S does not integrate to zero", residual=worst_orth[0])
    delta = delta_star + offset
    diagnostics = {"zed0_residual": zed0, "orthogonality_residual": worst_orth[0]}
    if params is not None:
        diagnostics.update(_source_ratios(field, model, chart, delta, delta_star, params))
    return ShockTrack(
        times=times, delta=delta, delta_dot=_time_derivative(delta, times), delta_fit=None,
        delta_infinity=np.atleast_1d(delta_star), method="mass", kind=OVERCOMPRESSIVE,
        delta_star=np.atleast_1d(delta_star), masses=masses, iterations=iterations, E0=field.E0,
        tol_track=controls.tol_track, diagnostics=diagnostics,
    )


def _source_ratios(field, model, chart, delta, delta_star, params):
    """sup |Q| / Psi, |R| / (Psi + Phi1) and |S| / Phi2 over the run, t > 0."""
    x = field.grid
    star = chart.evaluate(delta_star, x)
    star_x = np.gradient(star, field.dx, axis=-1)
    delta_dot = _time_derivative(delta, field.times)
    ratios = {"Q_over_Psi": 0.0, "R_over_Psi_Phi1": 0.0, "S_over_Phi2": 0.0}
    for j in range(1, field.times.size):
        s = field.times[j]
        member = chart.evaluate(delta[j], x)
        member_x = np.gradient(member, field.dx, axis=-1)
        u = field.base + field.values[j] - member
        u_x = np.gradient(u, field.dx, axis=-1)
        Q = np.linalg.norm(quadratic_source(model, member, member_x, u, u_x), axis=0)
        R = np.linalg.norm(centering_source(model, member, member_x, star, star_x, u, u_x), axis=0)
        S = np.linalg.norm(np.einsum("lnk,l->nk", chart.tangent(delta_star, x) - chart.tangent(delta[j], x),
                                     delta_dot[j]), axis=0)
        psi = source_psi(x, s, params)
        ratios["Q_over_Psi"] = max(ratios["Q_over_Psi"], float(np.max(Q / psi)))
        ratios["R_over_Psi_Phi1"] = max(ratios["R_over_Psi_Phi1"],
                                        float(np.max(R / (psi + phi1(x, s, params)))))
        ratios["S_over_Phi2"] = max(ratios["S_over_Phi2"], float(np.max(S / phi2(x, s, params))))
    return ratios
#%%
@dataclass
class BoundReport:
    """
    Ratios of the stability bounds along a run.

    Args:
        times (np.ndarray): Snapshot times
        pointwise_ratio (np.ndarray): sup_x |u| / (theta + psi1 + psi2)
        delta_dot_ratio (np.ndarray): |delta'| (1 + t)
        delta_ratio (np.ndarray): |delta - delta(inf)| (1 + t)^{1/2}
        zeta (np.ndarray): Running sup of the summed ratios
        lp_slopes (dict): Fitted exponents of |u|_{L^p} against 1 + t, None when undefined
        derivative_ratio (float): Worst smoothing ratio with tau = 1
    """
    times: np.ndarray
    pointwise_ratio: np.ndarray
    delta_dot_ratio: np.ndarray
    delta_ratio: np.ndarray
    zeta: np.ndarray
    lp_slopes: dict
    derivative_ratio: float
    E0: float = 0.0

    @property
    def ceilings(self):
        return self.ceilings_between()

    def ceilings_between(self, t_min=0.0, t_max=np.inf):
        """Ceilings over the snapshots with t_min <= t <= t_max."""
        mask = (self.times >= t_min) & (self.times <= t_max)
        if not np.any(mask):
            raise DomainError("no snapshot in the window", t_min=t_min, t_max=t_max)
        return {
            "pointwise": float(np.max(self.pointwise_ratio[mask])),
            "delta_dot": float(np.max(self.delta_dot_ratio[mask])),
            "delta": float(np.max(self.delta_ratio[mask])),
            "zeta": float(self.zeta[mask][-1]),
        }

    @property
    def verdict(self):
        values = list(self.ceilings.values()) + [self.derivative_ratio]
        return bool(all(np.isfinite(v) for v in values))

    def to_dict(self):
        return {
            "E0": self.E0, "times": self.times.tolist(),
            "pointwise_ratio": self.pointwise_ratio.tolist(),
            "delta_dot_ratio": self.delta_dot_ratio.tolist(),
            "delta_ratio": self.delta_ratio.tolist(), "zeta": self.zeta.tolist(),
            "lp_slopes": self.lp_slopes, "derivative_ratio": self.derivative_ratio,
            "ceilings": self.ceilings,
            "zeta_over_E0": self.ceilings["zeta"] / self.E0 if self.E0 > 0 else 0.0,
            "verdict": self.verdict,
        }

    def write(self, folder):
        os.makedirs(folder, exist_ok=True)
        with open(os.path.join(folder, "bounds.json"), "w") as f:
            json.dump(self.to_dict(), f, indent=4, sort_keys=True)


def lp_norms(field, track, profile, chart=None):
    """Table of t and the L^1, L^2, L^inf norms of the centered perturbation."""
    u = np.linalg.norm(centered_perturbation(field, track, profile, chart), axis=1)
    return pd.DataFrame({
        "t": field.times,
        "L1": trapezoid(u, field.grid, axis=-1),
        "L2": np.sqrt(trapezoid(u ** 2, field.grid, axis=-1)),
        "Linf": np.max(u, axis=-1),
    })


def _slope(times, norms, t_min):
    mask = (times >= t_min) & (norms > 0)
    if np.count_nonzero(mask) < 3:
        return None
    return float(np.polyfit(np.log1p(times[mask]), np.log(norms[mask]), 1)[0])


def bound_report(field, track, p, profile, chart=None, t_fit_min=10.0, tau=1.0):
    """
    Ratios (pointwise, delta', delta - delta(inf)), running zeta, L^p slopes and smoothing.

    The overcompressive zeta also carries |delta - delta*| (1+s)^{1/2}; for other
    kinds delta_ratio is reported but not summed into zeta.

    Returns:
        BoundReport: Report only; nothing here raises on large ratios
    """
    times, x = field.times, field.grid
    u = np.linalg.norm(centered_perturbation(field, track, profile, chart), axis=1)
    T_grid, X_grid = np.meshgrid(times, x, indexing="ij")
    template = theta(X_grid, T_grid, p) + psi1(X_grid, T_grid, p) + psi2(X_grid, T_grid, p)
    pointwise = np.max(u / template, axis=1)
    delta_dot_ratio = np.max(np.abs(track.delta_dot), axis=1) * (1.0 + times)
    delta_ratio = np.max(np.abs(track.delta - track.delta_infinity), axis=1) * np.sqrt(1.0 + times)
    summed = pointwise + delta_dot_ratio
    if track.kind == OVERCOMPRESSIVE:
        summed = summed + delta_ratio
    zeta = np.maximum.accumulate(summed)
    norms = lp_norms(field, track, profile, chart)
    slopes = {p_name: _slope(times, norms[col].to_numpy(), t_fit_min)
              for p_name, col in (("1", "L1"), ("2", "L2"), ("inf", "Linf"))}
    u_x = np.max(np.abs(np.gradient(u, field.dx, axis=-1)) / template, axis=1)
    later = times >= tau
    if np.any(later) and np.any(pointwise > 0):
        earlier = np.interp(times[later] - tau, times, pointwise)
        denom = tau ** -0.5 * np.where(earlier > 0, earlier, np.inf)
        derivative_ratio = float(np.max(u_x[later] / denom))
    else:
        derivative_ratio = 0.0
    return BoundReport(
        times=times, pointwise_ratio=pointwise, delta_dot_ratio=delta_dot_ratio,
        delta_ratio=delta_ratio, zeta=zeta, lp_slopes=slopes, derivative_ratio=derivative_ratio,
        E0=field.E0,
    )
#%%
@dataclass
class HorizonComparison:
    """
    Ceilings of one run over [t_min, T/2] and [t_min, T].

    delta is causal in t, so the first window is the report a run stopped at
    T/2 would produce; the ceilings must agree within tol_growth.
    """
    t_short: float
    t_long: float
    short: dict
    long: dict
    t_min: float = 0.0
    tol_growth: float = 0.1

    @property
    def growth(self):
        out = {}
        for key, value in self.short.items():
            if value > 0:
                out[key] = self.long[key] / value
            else:
                out[key] = 1.0 if self.long[key] == 0 else np.inf
        return out

    @property
    def verdict(self):
        return bool(all(np.isfinite(g) and abs(g - 1.0) <= self.tol_growth
                        for g in self.growth.values()))

    def to_dict(self):
        return {
            "t_short": self.t_short, "t_long": self.t_long, "t_min": self.t_min,
            "short": self.short, "long": self.long, "growth": self.growth,
            "tol_growth": self.tol_growth, "verdict": self.verdict,
        }


def compare_horizons(report, t_short=None, keys=("pointwise", "delta"), t_min=0.0, tol_growth=0.1):
    """
    Horizon-doubling check of the pointwise and phase ceilings.

    Args:
        report (BoundReport): Report of a run up to T
        t_short (float, optional): Shorter horizon, default T/2
        keys (tuple): Ceilings compared
        t_min (float): Start of both windows
        tol_growth (float): Allowed relative change of each ceiling

    Returns:
        HorizonComparison: Ceilings of both windows and the verdict
    """
    T = float(report.times[-1])
    t_short = 0.5 * T if t_short is None else float(t_short)
    if not t_min <= t_short < T:
        raise DomainError("need t_min <= t_short < T", t_min=t_min, t_short=t_short, T=T)
    short = report.ceilings_between(t_min, t_short)
    long = report.ceilings_between(t_min, T)
    comparison = HorizonComparison(
        t_short=t_short, t_long=T, short={k: short[k] for k in keys},
        long={k: long[k] for k in keys}, t_min=t_min, tol_growth=tol_growth,
    )
    logger.info("ceiling growth from T=%g to T=%g: %s", t_short, T, comparison.growth)
    return comparison
