"""
Conservation-Law Models, Endstate Spectra and Shock Classification

This module defines the systems u_t + f(u)_x = (B(u) u_x)_x handled by the
toolkit, computes the characteristic data at the endstates, checks the
standing hypotheses (H0)-(H3) and classifies the shock as Lax,
undercompressive, overcompressive or mixed.

All model callables are vectorized over trailing grid axes: a state array of
shape (n, ...) gives f of shape (n, ...) and B, df of shape (n, n, ...).

Dependencies:
    - numpy: For array operations and eigendecompositions
    - scipy: For the null space of the outgoing modes
"""
#%%
from dataclasses import dataclass, field
from typing import Callable, Optional
import logging

import numpy as np
from scipy.linalg import null_space

from .errors import (
    ModelDefinitionError, NonRealSpectrum, ZeroCharacteristic, InconsistentEll
)

logger = logging.getLogger(__name__)

EIG_TOL = 1e-10
LAX, UNDERCOMPRESSIVE, OVERCOMPRESSIVE, MIXED = (
    "Lax", "undercompressive", "overcompressive", "mixed"
)
#%%
def _fd_step(u):
    return np.cbrt(np.finfo(float).eps) * (1.0 + np.linalg.norm(u, axis=0))


def fd_jacobian(func, u):
    """
    Central finite-difference Jacobian of a vectorized map.

    Args:
        func (callable): Map from states of shape (n, ...) to (n, ...)
        u (np.ndarray): States of shape (n, ...)

    Returns:
        np.ndarray: Jacobian of shape (n, n, ...)
    """
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    h = _fd_step(u)
    J = np.empty((n, n) + u.shape[1:])
    for j in range(n):
        du = np.zeros_like(u)
        du[j] = h
        J[:, j] = (np.asarray(func(u + du)) - np.asarray(func(u - du))) / (2.0 * h)
    return J


def fd_viscosity_derivative(B, u, v, w):
    """(DB(u) v) w by central differences in the direction v."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    h = _fd_step(u)
    dBv = (B(u + h * v) - B(u - h * v)) / (2.0 * h)
    return np.einsum("ij...,j...->i...", dBv, np.asarray(w, dtype=float))


def constant_matrix(M):
    """Return a vectorized B(u) that is the constant matrix M."""
    M = np.atleast_2d(np.asarray(M, dtype=float))

    def B(u):
        u = np.asarray(u, dtype=float)
        shaped = M.reshape(M.shape + (1,) * (u.ndim - 1))
        return np.broadcast_to(shaped, M.shape + u.shape[1:]).copy()

    return B


def _zero_dB(u, v, w):
    return np.zeros(np.broadcast(np.asarray(u), np.asarray(w)).shape)


def _diagonal_jacobian(u):
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    J = np.zeros((n, n) + u.shape[1:])
    for i in range(n):
        J[i, i] = u[i]
    return J
#%%
@dataclass(frozen=True)
class FluxModel:
    """
    A strictly parabolic system of conservation laws with shock endstates.

    Args:
        n (int): State dimension
        f (callable): Flux, states (n, ...) -> (n, ...)
        B (callable): Viscosity matrix, states (n, ...) -> (n, n, ...)
        u_minus, u_plus (array-like): Endstates at x = -inf and x = +inf
        df (callable, optional): Analytic Jacobian of f; finite differences otherwise
        dB (callable, optional): dB(u, v, w) = (DB(u) v) w; finite differences otherwise
        name (str): Registry name or "custom"
        speed (float): Shock speed, always 0 after normalization
        constant_viscosity (bool): True when B does not depend on u
        tol_rh (float): Tolerance of the Rankine-Hugoniot check f(u_-) = f(u_+)
    """
    n: int
    f: Callable
    B: Callable
    u_minus: np.ndarray
    u_plus: np.ndarray
    df: Optional[Callable] = None
    dB: Optional[Callable] = None
    name: str = "custom"
    speed: float = 0.0
    constant_viscosity: bool = False
    tol_rh: float = 1e-8
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        u_minus = np.atleast_1d(np.asarray(self.u_minus, dtype=float))
        u_plus = np.atleast_1d(np.asarray(self.u_plus, dtype=float))
        object.__setattr__(self, "u_minus", u_minus)
        object.__setattr__(self, "u_plus", u_plus)
        if self.n < 1:
            raise ModelDefinitionError("state dimension must be at least 1", n=self.n)
        if u_minus.shape != (self.n,) or u_plus.shape != (self.n,):
            raise ModelDefinitionError("endstates must have shape (n,)", n=self.n)
        if self.speed != 0.0:
            raise ModelDefinitionError("shock speed must be normalized to 0", speed=self.speed)
        if np.asarray(self.f(u_minus)).shape != (self.n,):
            raise ModelDefinitionError("flux must map (n,) to (n,)")
        if np.asarray(self.B(u_minus)).shape != (self.n, self.n):
            raise ModelDefinitionError("viscosity must map (n,) to (n, n)")
        rh = self.rankine_hugoniot_residual()
        if rh >= self.tol_rh:
            raise ModelDefinitionError(
                f"Rankine-Hugoniot violated at s=0: |f(u-)-f(u+)| = {rh:.3e}", residual=rh
            )

    def flux(self, u):
        return np.asarray(self.f(np.asarray(u, dtype=float)), dtype=float)

    def jacobian(self, u):
        u = np.asarray(u, dtype=float)
        if self.df is not None:
            return np.asarray(self.df(u), dtype=float)
        return fd_jacobian(self.f, u)

    def viscosity(self, u):
        return np.asarray(self.B(np.asarray(u, dtype=float)), dtype=float)

    def viscosity_derivative(self, u, v, w):
        """(DB(u) v) w, the bilinear form dB(u)(v, w)."""
        if self.dB is not None:
            return np.asarray(self.dB(u, v, w), dtype=float)
        if self.constant_viscosity:
            return _zero_dB(u, v, w)
        return fd_viscosity_derivative(self.B, u, v, w)

    def rankine_hugoniot_residual(self):
        return float(np.linalg.norm(self.flux(self.u_minus) - self.flux(self.u_plus)))

    def endstate(self, side):
        if side == "minus":
            return self.u_minus
        if side == "plus":
            return self.u_plus
        raise ValueError(f"side must be 'minus' or 'plus', got {side!r}")

    def scaled(self, c):
        """Model with f and B multiplied by c > 0 (same endstates)."""
        f, B = self.f, self.B
        df = None if self.df is None else (lambda u: c * self.df(u))
        dB = None if self.dB is None else (lambda u, v, w: c * self.dB(u, v, w))
        return FluxModel(
            n=self.n, f=lambda u: c * f(u), B=lambda u: c * B(u),
            u_minus=self.u_minus, u_plus=self.u_plus, df=df, dB=dB,
            name=f"{self.name}*{c:g}", constant_viscosity=self.constant_viscosity,
            tol_rh=self.tol_rh * max(1.0, c), parameters=dict(self.parameters),
        )
#%%
@dataclass(frozen=True)
class EndstateSpectrum:
    """Characteristic data of df(u_side): a_1 < ... < a_n, r_j, l_j, beta_j."""
    side: str
    a: np.ndarray
    r: np.ndarray       # columns are right eigenvectors
    l: np.ndarray       # rows are left eigenvectors, l @ r = I
    beta: np.ndarray

    @property
    def n(self):
        return self.a.size

    def to_dict(self):
        return {
            "side": self.side,
            "a": self.a.tolist(),
            "r": self.r.tolist(),
            "l": self.l.tolist(),
            "beta": self.beta.tolist(),
        }


def endstate_spectrum(model, side, tol=EIG_TOL):
    """
    Eigen-decomposition of the limiting convection matrix df(u_side).

    Args:
        model (FluxModel): The system
        side (str): "minus" or "plus"
        tol (float): Tolerance for imaginary parts, ties and zero eigenvalues

    Returns:
        EndstateSpectrum: Sorted eigenvalues, biorthonormal eigenvectors, beta_j = l_j B r_j

    Raises:
        NonRealSpectrum: Complex or repeated eigenvalues
        ZeroCharacteristic: An eigenvalue within tol of zero
    """
    u = model.endstate(side)
    A = model.jacobian(u)
    values, vectors = np.linalg.eig(A)
    if np.max(np.abs(values.imag)) > tol:
        raise NonRealSpectrum(f"df(u_{side}) has complex eigenvalues", eigenvalues=repr(values))
    order = np.argsort(values.real)
    a = values.real[order]
    R = vectors.real[:, order]
    if a.size > 1 and np.min(np.diff(a)) < tol:
        raise NonRealSpectrum(f"df(u_{side}) has repeated eigenvalues", eigenvalues=repr(a))
    if np.min(np.abs(a)) < tol:
        raise ZeroCharacteristic(f"df(u_{side}) has a zero characteristic speed", eigenvalues=repr(a))
    R = R / np.linalg.norm(R, axis=0)
    signs = np.sign(R[np.argmax(np.abs(R), axis=0), np.arange(a.size)])
    R = R * signs
    Lrows = np.linalg.inv(R)
    Bmat = model.viscosity(u)
    beta = np.einsum("ji,jk,ki->i", Lrows.T, Bmat, R)
    return EndstateSpectrum(side=side, a=a, r=R, l=Lrows, beta=beta)
#%%
@dataclass
class AssumptionReport:
    """Pass/fail entries for (H0)-(H3) and Rankine-Hugoniot."""
    passed: dict
    theta: float
    details: dict

    @property
    def all_passed(self):
        return all(self.passed.values())

    def to_dict(self):
        return {"passed": dict(self.passed), "theta": self.theta, "details": dict(self.details),
                "verdict": self.all_passed}


def h3_wavenumbers(k0=1.0):
    """k in {+-2^j k0 : j = -10..10}."""
    k = k0 * 2.0 ** np.arange(-10, 11)
    return np.concatenate([-k[::-1], k])


def check_assumptions(model, probe_states, tol=EIG_TOL):
    """
    Check the standing hypotheses on a model.

    (H0) is probed by comparing df with a finite-difference Jacobian at each
    probe state; (H1) by Re sigma(B) > 0 at each probe state; (H2) and (H3)
    at the endstates, (H3) by sampling k on a logarithmic grid and fitting the
    largest theta with max Re sigma(-ik df - k^2 B) <= -theta k^2.

    Args:
        model (FluxModel): The system
        probe_states (iterable): States of shape (n,), endstates and profile samples
        tol (float): Eigenvalue tolerance

    Returns:
        AssumptionReport: Report; failures are entries, never exceptions
    """
    states = [np.atleast_1d(np.asarray(s, dtype=float)) for s in probe_states]
    if not states:
        raise ValueError("probe_states must be nonempty")
    passed, details = {}, {}

    rh = model.rankine_hugoniot_residual()
    passed["RH"] = rh < model.tol_rh
    details["RH"] = rh

    h0_err = 0.0
    for u in states:
        J = model.jacobian(u)
        if not np.all(np.isfinite(J)):
            h0_err = np.inf
            break
        if model.df is not None:
            scale = 1.0 + np.max(np.abs(J))
            h0_err = max(h0_err, float(np.max(np.abs(J - fd_jacobian(model.f, u)))) / scale)
    passed["H0"] = bool(h0_err < 1e-5)
    details["H0"] = h0_err

    min_re_B = np.inf
    for u in states:
        min_re_B = min(min_re_B, float(np.min(np.linalg.eigvals(model.viscosity(u)).real)))
    passed["H1"] = bool(min_re_B > 0.0)
    details["H1"] = min_re_B

    h2_ok, h2_msgs = True, []
    for side in ("minus", "plus"):
        values = np.linalg.eigvals(model.jacobian(model.endstate(side)))
        if np.max(np.abs(values.imag)) > tol:
            h2_ok = False
            h2_msgs.append(f"{side}: complex")
        a = np.sort(values.real)
        if a.size > 1 and np.min(np.diff(a)) < tol:
            h2_ok = False
            h2_msgs.append(f"{side}: repeated")
        if np.min(np.abs(a)) < tol:
            h2_ok = False
            h2_msgs.append(f"{side}: zero")
    passed["H2"] = h2_ok
    details["H2"] = "; ".join(h2_msgs) or "real, distinct, nonzero"

    theta = np.inf
    for side in ("minus", "plus"):
        u = model.endstate(side)
        A, B = model.jacobian(u), model.viscosity(u)
        for k in h3_wavenumbers():
            growth = np.max(np.linalg.eigvals(-1j * k * A - k ** 2 * B).real)
            theta = min(theta, -growth / k ** 2)
    passed["H3"] = bool(theta > 0.0)
    details["H3"] = theta
    logger.debug("assumptions for %s: %s", model.name, passed)
    return AssumptionReport(passed=passed, theta=float(theta), details=details)
#%%
@dataclass(frozen=True)
class ShockClassification:
    """Characteristic counts and type of the shock (Definition of type)."""
    i_minus: int
    i_plus: int
    n: int
    ell: int
    kind: str

    @property
    def i(self):
        return self.i_minus + self.i_plus

    @property
    def gamma(self):
        return 1 if self.kind in (UNDERCOMPRESSIVE, MIXED) else 0

    def to_dict(self):
        return {"i_minus": self.i_minus, "i_plus": self.i_plus, "i": self.i, "n": self.n,
                "ell": self.ell, "kind": self.kind, "gamma": self.gamma}


def classify(spec_minus, spec_plus, ell):
    """
    Classify the shock by i - n and the purity condition on ell.

    Args:
        spec_minus (EndstateSpectrum): Spectrum at u_-
        spec_plus (EndstateSpectrum): Spectrum at u_+
        ell (int): Dimension of the profile manifold

    Returns:
        ShockClassification: Counts, ell and kind

    Raises:
        InconsistentEll: ell < 1, or ell > i - n for an overcompressive shock
    """
    i_minus = int(np.sum(spec_minus.a > 0))
    i_plus = int(np.sum(spec_plus.a < 0))
    n = spec_minus.n
    ell = int(ell)
    if ell < 1:
        raise InconsistentEll("ell must be at least 1", ell=ell)
    excess = i_minus + i_plus - n
    if excess < 1:
        kind = UNDERCOMPRESSIVE if ell == 1 else MIXED
    elif excess == 1:
        kind = LAX if ell == 1 else MIXED
    else:
        if ell > excess:
            raise InconsistentEll(
                f"ell = {ell} exceeds i - n = {excess} for an overcompressive shock",
                ell=ell, excess=excess,
            )
        kind = OVERCOMPRESSIVE if ell == excess else MIXED
    return ShockClassification(i_minus=i_minus, i_plus=i_plus, n=n, ell=ell, kind=kind)


def outgoing_modes(spec_minus, spec_plus):
    """Right eigenvectors r_j^- (a_j^- < 0) and r_j^+ (a_j^+ > 0), as columns."""
    cols = [spec_minus.r[:, j] for j in range(spec_minus.n) if spec_minus.a[j] < 0]
    cols += [spec_plus.r[:, j] for j in range(spec_plus.n) if spec_plus.a[j] > 0]
    if not cols:
        return np.zeros((spec_minus.n, 0))
    return np.column_stack(cols)


def mass_projection(spec_minus, spec_plus):
    """
    Rows spanning the annihilator of the outgoing modes.

    Returns:
        np.ndarray: Pi of shape (n - n_out, n) with orthonormal rows and
        Pi @ r = 0 for every outgoing mode r; the identity when no mode is outgoing
    """
    R_out = outgoing_modes(spec_minus, spec_plus)
    if R_out.shape[1] == 0:
        return np.eye(spec_minus.n)
    return null_space(R_out.T).T
#%%
def burgers(u_minus=1.0, u_plus=None, viscosity=1.0):
    """Scalar Burgers f(u) = u^2/2 with constant viscosity."""
    u_plus = -u_minus if u_plus is None else u_plus
    return FluxModel(
        n=1, f=lambda u: 0.5 * np.asarray(u) ** 2, B=constant_matrix([[viscosity]]),
        u_minus=[u_minus], u_plus=[u_plus], df=_diagonal_jacobian, dB=_zero_dB,
        name="burgers", constant_viscosity=True,
        parameters={"u_minus": u_minus, "u_plus": u_plus, "viscosity": viscosity},
    )


def burgers2x2(u_minus=(1.0, 2.0), u_plus=None, viscosity=(1.0, 1.0)):
    """Decoupled pair of Burgers equations with diagonal viscosity."""
    u_minus = np.asarray(u_minus, dtype=float)
    u_plus = -u_minus if u_plus is None else np.asarray(u_plus, dtype=float)
    return FluxModel(
        n=2, f=lambda u: 0.5 * np.asarray(u) ** 2, B=constant_matrix(np.diag(viscosity)),
        u_minus=u_minus, u_plus=u_plus, df=_diagonal_jacobian, dB=_zero_dB,
        name="burgers2x2", constant_viscosity=True,
        parameters={"u_minus": u_minus.tolist(), "u_plus": u_plus.tolist(),
                    "viscosity": list(viscosity)},
    )


def coupled_quadratic(kappa=0.5):
    """
    f(u) = (u1^2/2 - kappa u2^2/2, -kappa u1 u2), B = I, u_+- = (-+1, 0).

    The line u2 = 0 is invariant for the traveling-wave ODE and carries the
    saddle-saddle connection u1 = -tanh(x/2), an undercompressive shock with
    characteristic speeds (-kappa, 1) at u_- and (-1, kappa) at u_+. The
    parameters are toolkit-selected.
    """
    def f(u):
        u = np.asarray(u, dtype=float)
        return np.stack([0.5 * u[0] ** 2 - 0.5 * kappa * u[1] ** 2, -kappa * u[0] * u[1]])

    def df(u):
        u = np.asarray(u, dtype=float)
        return np.stack([
            np.stack([u[0], -kappa * u[1]]),
            np.stack([-kappa * u[1], -kappa * u[0]]),
        ])

    return FluxModel(
        n=2, f=f, B=constant_matrix(np.eye(2)), u_minus=[1.0, 0.0], u_plus=[-1.0, 0.0],
        df=df, dB=_zero_dB, name="coupled_quadratic", constant_viscosity=True,
        parameters={"kappa": kappa},
    )


def slemrod_reduced(epsilon=0.5):
    """
    Reduced viscosity-capillarity model with diagonal viscosity diag(epsilon, 1).

    f(v, w) = (-w, p(v)) with the nonmonotone pressure p(v) = -v^3 + 3v;
    endstates (-+sqrt(3), 0) share p = 0 and are joined by a standing
    phase boundary. epsilon is toolkit-selected.
    """
    def f(u):
        u = np.asarray(u, dtype=float)
        return np.stack([-u[1], -u[0] ** 3 + 3.0 * u[0]])

    def df(u):
        u = np.asarray(u, dtype=float)
        zero, one = np.zeros_like(u[0]), np.ones_like(u[0])
        return np.stack([
            np.stack([zero, -one]),
            np.stack([-3.0 * u[0] ** 2 + 3.0, zero]),
        ])

    root = np.sqrt(3.0)
    return FluxModel(
        n=2, f=f, B=constant_matrix(np.diag([epsilon, 1.0])), u_minus=[-root, 0.0],
        u_plus=[root, 0.0], df=df, dB=_zero_dB, name="slemrod_reduced",
        constant_viscosity=True, parameters={"epsilon": epsilon},
    )


MODEL_REGISTRY = {
    "burgers": burgers,
    "burgers2x2": burgers2x2,
    "coupled_quadratic": coupled_quadratic,
    "slemrod_reduced": slemrod_reduced,
}


def get_model(name, **overrides):
    """
    Build a registry model by name.

    Args:
        name (str): One of MODEL_REGISTRY
        **overrides: Keyword parameters of the model factory

    Returns:
        FluxModel: The model
    """
    if name not in MODEL_REGISTRY:
        raise ModelDefinitionError(f"unknown model {name!r}", known=", ".join(MODEL_REGISTRY))
    try:
        return MODEL_REGISTRY[name](**overrides)
    except TypeError as exc:
        raise ModelDefinitionError(f"bad parameters for model {name!r}: {exc}") from exc
#%%
class _Polynomial:
    """Sum of monomials c * prod_i u_i^p_i, vectorized over trailing axes."""

    def __init__(self, terms, n):
        self.terms = []
        for term in terms:
            coefficient = float(term["coefficient"])
            powers = [int(p) for p in term["powers"]]
            if len(powers) != n or min(powers) < 0:
                raise ModelDefinitionError("monomial powers must be n nonnegative integers",
                                           powers=repr(powers))
            self.terms.append((coefficient, powers))
        self.n = n

    def __call__(self, u):
        out = np.zeros(np.shape(u)[1:])
        for c, powers in self.terms:
            value = c
            for i, p in enumerate(powers):
                if p:
                    value = value * u[i] ** p
            out = out + value
        return out

    def gradient(self, u):
        out = np.zeros((self.n,) + np.shape(u)[1:])
        for c, powers in self.terms:
            for j, pj in enumerate(powers):
                if pj == 0:
                    continue
                value = c * pj
                for i, p in enumerate(powers):
                    exponent = p - 1 if i == j else p
                    if exponent:
                        value = value * u[i] ** exponent
                out[j] = out[j] + value
        return out


def polynomial_model(definition):
    """
    Build a FluxModel from a structured polynomial definition.

    Args:
        definition (dict): Keys
            - n: state dimension
            - flux: list of n term lists, each term {"coefficient": c, "powers": [p_1..p_n]}
            - viscosity: n x n nested list; each entry a number or a term list
            - u_minus, u_plus: endstates
            - name (optional): model name

    Returns:
        FluxModel: Model with analytic df and dB
    """
    try:
        n = int(definition["n"])
        flux = [_Polynomial(terms, n) for terms in definition["flux"]]
        entries = definition["viscosity"]
        u_minus, u_plus = definition["u_minus"], definition["u_plus"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelDefinitionError(f"malformed model definition: {exc}") from exc
    if len(flux) != n or len(entries) != n or any(len(row) != n for row in entries):
        raise ModelDefinitionError("flux must have n components and viscosity n x n entries")

    constant = all(isinstance(e, (int, float)) for row in entries for e in row)
    visc = [[_Polynomial([{"coefficient": e, "powers": [0] * n}], n)
             if isinstance(e, (int, float)) else _Polynomial(e, n) for e in row] for row in entries]

    def f(u):
        u = np.asarray(u, dtype=float)
        return np.stack([p(u) for p in flux])

    def df(u):
        u = np.asarray(u, dtype=float)
        return np.stack([p.gradient(u) for p in flux])

    def B(u):
        u = np.asarray(u, dtype=float)
        return np.stack([np.stack([p(u) for p in row]) for row in visc])

    def dB(u, v, w):
        u, v, w = (np.asarray(a, dtype=float) for a in (u, v, w))
        grads = np.stack([np.stack([p.gradient(u) for p in row]) for row in visc])
        dBv = np.einsum("ijk...,k...->ij...", grads, v)
        return np.einsum("ij...,j...->i...", dBv, w)

    return FluxModel(
        n=n, f=f, B=B, u_minus=u_minus, u_plus=u_plus, df=df, dB=dB,
        name=str(definition.get("name", "custom")), constant_viscosity=constant,
        parameters={"definition": definition},
    )
