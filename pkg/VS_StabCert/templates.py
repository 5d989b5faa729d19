"""
Pointwise Templates, Source Terms and Excited Kernels

Decay templates theta, psi1, psi2 bounding the perturbation, the source
envelopes Psi, Phi1, Phi2 of the nonlinear and centering terms, the Green
remainder envelope, and the excited kernels e_j(y, t) that feed initial mass
into the shock location.

Every function here needs endstate data only; no profile is computed.

Dependencies:
    - numpy: For vectorized evaluation
    - scipy: For erf
    - pandas: For template field tables
"""
#%%
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.special import erf

from .errors import DomainError
from .model import (
    LAX, UNDERCOMPRESSIVE, classify, endstate_spectrum, mass_projection,
    outgoing_modes,
)
from .profile import rest_point_data
#%%
def errfn(z):
    """Gaussian cumulative distribution 1/2 (1 + erf z); errfn(-inf) = 0, errfn(+inf) = 1."""
    return 0.5 * (1.0 + erf(z))


def _gauss(z):
    return np.exp(-np.square(z)) / np.sqrt(np.pi)


def _gaussian_factor(x, center, t, width):
    """exp(-|x - center|^2 / (width t)), with the limit values at t = 0."""
    x, center, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(center, float),
                                       np.asarray(t, float))
    positive = t > 0
    t_safe = np.where(positive, t, 1.0)
    value = np.exp(-np.square(x - center) / (width * t_safe))
    return np.where(positive, value, (x == center).astype(float))
#%%
@dataclass(frozen=True)
class LShape:
    """
    y-dependence g(y) of the kernel weights l_jk(y) = g(y) l_jk.

    kind "constant" gives g = 1; kind "decaying" gives g = 1 + 1/2 exp(-eta |y|),
    whose derivative is bounded by eta/2 exp(-eta |y|).
    """
    kind: str = "constant"
    eta: float = 1.0

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "constant":
            return np.ones_like(y), np.zeros_like(y)
        if self.kind == "decaying":
            decay = np.exp(-self.eta * np.abs(y))
            return 1.0 + 0.5 * decay, -0.5 * self.eta * np.sign(y) * decay
        raise ValueError(f"unknown l-shape {self.kind!r}")


def decaying_shape(eta):
    return LShape("decaying", eta)


@dataclass(frozen=True)
class TemplateParams:
    """
    Everything needed to evaluate templates, sources and excited kernels.

    Args:
        a_minus, a_plus (np.ndarray): Sorted characteristic speeds at u_-, u_+
        beta_minus, beta_plus (np.ndarray): Diffusion coefficients l_j B r_j
        L (float): Template Gaussian width constant
        M (float): Envelope width constant
        eta (float): Spatial decay rate
        gamma (int): 1 for undercompressive and mixed shocks, else 0
        weights_minus, weights_plus (np.ndarray): l_jk rows, shape (ell, n, n), [j, k, :]
        l_shape (LShape): y-dependence of l_jk
        kind (str): Shock kind
        C (float): Envelope constant
    """
    a_minus: np.ndarray
    a_plus: np.ndarray
    beta_minus: np.ndarray
    beta_plus: np.ndarray
    L: float
    M: float
    eta: float
    gamma: int
    weights_minus: np.ndarray
    weights_plus: np.ndarray
    l_shape: LShape = field(default_factory=LShape)
    kind: str = "Lax"
    C: float = 1.0

    def __post_init__(self):
        if not (self.L > 0 and self.M > 0 and self.eta > 0):
            raise DomainError("L, M and eta must be positive", L=self.L, M=self.M, eta=self.eta)

    @property
    def ell(self):
        return self.weights_minus.shape[0]

    @property
    def n(self):
        return self.a_minus.size

    @property
    def a_envelope(self):
        """Slowest incoming speed, the 'a' of the e - e(+inf) envelope."""
        incoming = np.concatenate([self.a_minus[self.a_minus > 0], -self.a_plus[self.a_plus < 0]])
        return float(np.min(incoming)) if incoming.size else 1.0

    @property
    def outgoing_minus(self):
        return self.a_minus[self.a_minus < 0]

    @property
    def outgoing_plus(self):
        return self.a_plus[self.a_plus > 0]

    def replace(self, **changes):
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return TemplateParams(**values)

    def mirrored(self):
        """Parameters of the reflected problem x -> -x."""
        return self.replace(
            a_minus=-self.a_plus[::-1], a_plus=-self.a_minus[::-1],
            beta_minus=self.beta_plus[::-1], beta_plus=self.beta_minus[::-1],
            weights_minus=self.weights_plus[:, ::-1], weights_plus=self.weights_minus[:, ::-1],
        )

    def to_dict(self):
        return {
            "a_minus": self.a_minus.tolist(), "a_plus": self.a_plus.tolist(),
            "beta_minus": self.beta_minus.tolist(), "beta_plus": self.beta_plus.tolist(),
            "L": self.L, "M": self.M, "eta": self.eta, "gamma": self.gamma, "C": self.C,
            "kind": self.kind, "l_shape": self.l_shape.kind,
        }


def kernel_weights(spec_minus, spec_plus, shock, jump):
    """
    Weights l_jk^+- = c_j(k) l_k^+- from the mass relation.

    The mass r_k of an incoming mode splits as sum_j c_j(k) m_j plus outgoing
    modes, m_j the masses of the family tangents. Pi annihilates the outgoing
    modes, so for a Lax shock (m = u_- - u_+) c(k) solves (Pi m) c = Pi r_k and
    on the overcompressive mass chart (Pi m = I) c(k) = Pi r_k. The
    undercompressive split is the least-squares one.
    """
    n, ell = spec_minus.n, shock.ell
    translate = np.zeros((n, 1))
    if ell == 1:
        translate[:, 0] = jump
    out = []
    for spec, incoming in ((spec_minus, spec_minus.a > 0), (spec_plus, spec_plus.a < 0)):
        W = np.zeros((ell, n, n))
        for k in np.nonzero(incoming)[0]:
            r = spec.r[:, k]
            if shock.kind == UNDERCOMPRESSIVE:
                system = np.hstack([translate[:, :ell], outgoing_modes(spec_minus, spec_plus)])
                c = np.linalg.lstsq(system, r, rcond=None)[0][:ell]
            else:
                Pi = mass_projection(spec_minus, spec_plus)
                if shock.kind == LAX:
                    c = np.linalg.lstsq(Pi @ translate, Pi @ r, rcond=None)[0]
                else:
                    c = (Pi @ r)[:ell]
            W[:, k, :] = np.outer(c, spec.l[k])
        out.append(W)
    return out[0], out[1]


def template_params(model, ell=None, eta=None, L=None, M=None, l_shape=None, C=1.0):
    """
    Build TemplateParams from endstate data.

    Args:
        model (FluxModel): The system
        ell (int, optional): Manifold dimension; default from the rest-point count
        eta (float, optional): Decay rate; default the slowest rest-point rate
        L, M (float, optional): Width constants; defaults 4 max(beta) + 1 and 2 L
        l_shape (LShape, optional): y-dependence of l_jk
        C (float): Envelope constant

    Returns:
        TemplateParams: Parameters for templates and kernels
    """
    if ell is None or eta is None:
        rest = rest_point_data(model)
        ell = ell if ell is not None else max(rest.ell_formula, 1)
        eta = eta if eta is not None else rest.eta_estimate
    spec_minus = endstate_spectrum(model, "minus")
    spec_plus = endstate_spectrum(model, "plus")
    shock = classify(spec_minus, spec_plus, ell)
    beta_max = float(max(np.max(spec_minus.beta), np.max(spec_plus.beta)))
    L = 4.0 * beta_max + 1.0 if L is None else float(L)
    M = 2.0 * L if M is None else float(M)
    W_minus, W_plus = kernel_weights(spec_minus, spec_plus, shock,
                                      model.u_minus - model.u_plus)
    return TemplateParams(
        a_minus=spec_minus.a, a_plus=spec_plus.a, beta_minus=spec_minus.beta,
        beta_plus=spec_plus.beta, L=L, M=M, eta=float(eta), gamma=shock.gamma,
        weights_minus=W_minus, weights_plus=W_plus, l_shape=l_shape or LShape(),
        kind=shock.kind, C=C,
    )
#%%
def _chi(x, t, p):
    return ((x >= p.a_minus[0] * t) & (x <= p.a_plus[-1] * t)).astype(float)


def theta(x, t, p):
    """Outgoing diffusion waves: sum over outgoing speeds of (1+t)^{-1/2} Gaussians."""
    x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
    out = np.zeros(x.shape)
    for a in np.concatenate([p.outgoing_minus, p.outgoing_plus]):
        out += (1.0 + t) ** -0.5 * _gaussian_factor(x, a * t, t, p.L)
    return out


def psi1(x, t, p):
    """Interior interaction template, supported on [a_1^- t, a_n^+ t]."""
    x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
    out = np.zeros(x.shape)
    for a in np.concatenate([p.outgoing_minus, p.outgoing_plus]):
        out += (1.0 + np.abs(x) + t) ** -0.5 * (1.0 + np.abs(x - a * t)) ** -0.5
    return _chi(x, t, p) * out


def psi2(x, t, p):
    """Algebraic tails outside [a_1^- t, a_n^+ t]."""
    x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
    root = np.sqrt(t)
    tails = ((1.0 + np.abs(x - p.a_minus[0] * t) + root) ** -1.5
             + (1.0 + np.abs(x - p.a_plus[-1] * t) + root) ** -1.5)
    return (1.0 - _chi(x, t, p)) * tails


def template_total(x, t, p):
    return theta(x, t, p) + psi1(x, t, p) + psi2(x, t, p)


def source_psi(y, s, p):
    """Psi = (1+s)^{1/2} s^{-1/2} (theta+psi1+psi2)^2 + (1+s)^{-1} (theta+psi1+psi2)."""
    s = np.asarray(s, dtype=float)
    total = template_total(y, s, p)
    return (1.0 + s) ** 0.5 * s ** -0.5 * total ** 2 + (1.0 + s) ** -1 * total


def phi1(y, s, p):
    """Phi1 = exp(-eta |y|) s^{-1/2} (theta+psi1+psi2)."""
    s = np.asarray(s, dtype=float)
    return np.exp(-p.eta * np.abs(y)) * s ** -0.5 * template_total(y, s, p)


def phi2(y, s, p):
    """Phi2 = exp(-eta |y|) (1+s)^{-3/2}."""
    return np.exp(-p.eta * np.abs(np.asarray(y, float))) * (1.0 + np.asarray(s, float)) ** -1.5


def template_field(x, t, p):
    """Table of theta, psi1, psi2 and their sum over the grid x cross t."""
    X, T = np.meshgrid(np.asarray(x, float), np.asarray(t, float), indexing="ij")
    th, p1, p2 = theta(X, T, p), psi1(X, T, p), psi2(X, T, p)
    return pd.DataFrame({"x": X.ravel(), "t": T.ravel(), "theta": th.ravel(),
                         "psi1": p1.ravel(), "psi2": p2.ravel(),
                         "psi_total": (th + p1 + p2).ravel()})
#%%
def _left_green_envelope(x, t, y, p, alpha_x, alpha_y):
    M, eta = p.M, p.eta
    t_safe = np.where(t > 0, t, 1.0)
    x_pos, x_neg = np.maximum(x, 0.0), np.maximum(-x, 0.0)
    total = np.zeros(np.broadcast(x, t, y).shape)
    for a in p.a_minus:
        total = total + t_safe ** -0.5 * np.exp(-np.square(x - y - a * t) / (M * t_safe)
                                                 - eta * x_pos)
    for ak in p.a_minus[p.a_minus > 0]:
        active = np.abs(ak * t) >= np.abs(y)
        lag = t - np.abs(y / ak)
        for aj in p.outgoing_minus:
            total = total + active * t_safe ** -0.5 * np.exp(
                -np.square(x - aj * lag) / (M * t_safe) - eta * x_pos)
        for aj in p.outgoing_plus:
            total = total + active * t_safe ** -0.5 * np.exp(
                -np.square(x - aj * lag) / (M * t_safe) - eta * x_neg)
    order = alpha_x + alpha_y
    prefactor = (t_safe ** (-order / 2.0) + alpha_y * p.gamma * np.exp(-eta * np.abs(y))
                 + alpha_x * np.exp(-eta * np.abs(x)))
    return np.where(t > 0, p.C * prefactor * total, 0.0)


def green_envelope(x, t, y, p, alpha_x=0, alpha_y=0):
    """
    Convection, reflection and transmission envelope of the Green remainder.

    Args:
        x, t, y (array-like): Broadcastable evaluation points, t > 0
        p (TemplateParams): Parameters (C, M, eta, gamma, speeds)
        alpha_x, alpha_y (int): Derivative orders, alpha_x + alpha_y <= 2

    Returns:
        np.ndarray: Envelope values; y > 0 uses the mirrored parameters
    """
    x, t, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float),
                                  np.asarray(y, float))
    left = _left_green_envelope(x, t, y, p, alpha_x, alpha_y)
    right = _left_green_envelope(-x, t, -y, p.mirrored(), alpha_x, alpha_y)
    return np.where(y <= 0, left, right)
#%%
def _errfn_difference(yv, t, a, beta):
    """errfn((y+at)/sqrt(4 beta t)) - errfn((y-at)/sqrt(4 beta t)) and its y, t, yt derivatives."""
    positive = t > 0
    t_safe = np.where(positive, t, 1.0)
    st = np.sqrt(4.0 * beta * t_safe)
    z1, z2 = (yv + a * t_safe) / st, (yv - a * t_safe) / st
    g1, g2 = _gauss(z1), _gauss(z2)
    D = errfn(z1) - errfn(z2)
    D_y = (g1 - g2) / st
    dz1 = (a * t_safe - yv) / (2.0 * t_safe * st)
    dz2 = -(a * t_safe + yv) / (2.0 * t_safe * st)
    D_t = g1 * dz1 - g2 * dz2
    D_yt = (-2.0 * z1 * g1 * dz1 + 2.0 * z2 * g2 * dz2) / st - (g1 - g2) / (2.0 * t_safe * st)
    return tuple(np.where(positive, v, 0.0) for v in (D, D_y, D_t, D_yt))


class ExcitedKernel:
    """
    e_j(y, t) as row vectors acting on perturbation data, shape (ell, n, ...).

    For y <= 0 the sum runs over incoming speeds a_k^- > 0, for y > 0 over
    a_k^+ < 0 with the mirrored errfn difference.
    """

    def __init__(self, params):
        self.params = params
        self._limit_cache = {}

    def _sides(self, y):
        p = self.params
        yield y <= 0, p.a_minus, p.beta_minus, p.weights_minus, 1.0
        yield y > 0, -p.a_plus, p.beta_plus, p.weights_plus, -1.0

    def terms(self, y, t):
        """Dictionary with e, e_t, e_y, e_yt, each of shape (ell, n) + broadcast(y, t)."""
        y, t = np.broadcast_arrays(np.asarray(y, float), np.asarray(t, float))
        p = self.params
        shape = (p.ell, p.n) + y.shape
        out = {key: np.zeros(shape) for key in ("e", "e_t", "e_y", "e_yt")}
        g, g_prime = p.l_shape(y)
        pad = (slice(None), slice(None)) + (None,) * y.ndim
        for mask, speeds, betas, W, sign in self._sides(y):
            for k in np.nonzero(speeds > 0)[0]:
                D, D_y, D_t, D_yt = _errfn_difference(sign * y, t, speeds[k], betas[k])
                D_y, D_yt = sign * D_y, sign * D_yt
                w = W[:, k, :][pad]
                out["e"] += w * np.where(mask, D * g, 0.0)
                out["e_t"] += w * np.where(mask, D_t * g, 0.0)
                out["e_y"] += w * np.where(mask, D_y * g + D * g_prime, 0.0)
                out["e_yt"] += w * np.where(mask, D_yt * g + D_t * g_prime, 0.0)
        return out

    def __call__(self, y, t):
        return self.terms(y, t)["e"]

    def limit(self, y):
        """e(y, +inf) and e_y(y, +inf)."""
        y = np.asarray(y, dtype=float)
        p = self.params
        g, g_prime = p.l_shape(y)
        pad = (slice(None), slice(None)) + (None,) * y.ndim
        e = np.zeros((p.ell, p.n) + y.shape)
        e_y = np.zeros_like(e)
        for mask, speeds, _, W, _ in self._sides(y):
            w = W[:, speeds > 0, :].sum(axis=1)[pad]
            e += w * np.where(mask, g, 0.0)
            e_y += w * np.where(mask, g_prime, 0.0)
        return e, e_y

    def asymptotic_weight(self, side):
        """Constant e(y, +inf) on the side for constant l-shape, shape (ell, n)."""
        if side not in self._limit_cache:
            p = self.params
            speeds, W = (p.a_minus, p.weights_minus) if side == "minus" else (-p.a_plus, p.weights_plus)
            self._limit_cache[side] = W[:, speeds > 0, :].sum(axis=1)
        return self._limit_cache[side]


def excited_kernel(y, t, p):
    """e_j(y, t), shape (ell, n) + broadcast(y, t)."""
    return ExcitedKernel(p)(y, t)


def excited_kernel_derivatives(y, t, p):
    """e, e_t, e_y and e_yt in closed form, each of shape (ell, n) + broadcast(y, t)."""
    return ExcitedKernel(p).terms(y, t)


def excited_limit(y, p):
    """e_j(y, +inf), the pointwise limit sum of l_jk over incoming speeds."""
    return ExcitedKernel(p).limit(y)[0]


def kernel_norm(values):
    """Pointwise Frobenius norm over the (ell, n) axes."""
    return np.sqrt(np.sum(np.square(values), axis=(0, 1)))
#%%
def _incoming_sum(y, t, p, fn):
    """Sum over incoming speeds of fn(yv, t, a, beta) on each side."""
    y, t = np.broadcast_arrays(np.asarray(y, float), np.asarray(t, float))
    out = np.zeros(y.shape)
    for mask, speeds, betas, sign in ((y <= 0, p.a_minus, p.beta_minus, 1.0),
                                      (y > 0, -p.a_plus, p.beta_plus, -1.0)):
        for k in np.nonzero(speeds > 0)[0]:
            out += np.where(mask, fn(sign * y, t, speeds[k], betas[k]), 0.0)
    return out


def e_derivative_envelopes(y, t, p):
    """
    Right-hand envelopes of |e|, |e - e(inf)|, |e_t|, |e_y|, |e_y - e_y(inf)| and |e_yt|.

    Args:
        y, t (array-like): Evaluation points, t > 0
        p (TemplateParams): C, M, eta, gamma and speeds

    Returns:
        dict: Envelope arrays keyed e, e_minus_limit, e_t, e_y, e_y_minus_limit, e_yt
    """
    y, t = np.broadcast_arrays(np.asarray(y, float), np.asarray(t, float))
    C, M, a, gamma, eta = p.C, p.M, p.a_envelope, p.gamma, p.eta
    if np.any(t <= 0):
        raise DomainError("envelopes need t > 0")
    differences = _incoming_sum(y, t, p, lambda yv, tt, ak, bk: _errfn_difference(yv, tt, ak, bk)[0])
    gaussians = _incoming_sum(y, t, p, lambda yv, tt, ak, bk: np.exp(-np.square(yv + ak * tt) / (M * tt)))
    decay = np.exp(-eta * np.abs(y))
    return {
        "e": C * differences,
        "e_minus_limit": C * errfn((np.abs(y) - a * t) / (M * np.sqrt(t))),
        "e_t": C * t ** -0.5 * gaussians,
        "e_y": C * t ** -0.5 * gaussians + C * gamma * decay * differences,
        "e_y_minus_limit": C * t ** -0.5 * gaussians,
        "e_yt": C * (1.0 / t + gamma * t ** -0.5 * decay) * gaussians,
    }
