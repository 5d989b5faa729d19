"""
Run Configuration

Loads a JSON run configuration into frozen dataclasses. Every section maps
onto the option dataclass its module already takes, so the library calls and
the command line share one set of defaults. Unknown keys at any level and
out-of-range controls raise ConfigError before anything is written.

Dependencies:
    - numpy: For grid defaults
"""
#%%
from dataclasses import dataclass, field, fields
from typing import Optional
import json

import numpy as np

from .errors import ConfigError, DomainError, ModelDefinitionError
from .evolve import EvolveControls
from .lemma_verify import LemmaGrid, LemmaId
from .model import get_model, polynomial_model
from .profile import ProfileOptions
from .spectral import EvansOptions
from .templates import LShape, decaying_shape, template_params
#%%
@dataclass(frozen=True)
class ModelConfig:
    """Registry name (default burgers) with parameter overrides, or an inline polynomial definition."""
    name: Optional[str] = None
    parameters: dict = field(default_factory=dict)
    definition: Optional[dict] = None

    def __post_init__(self):
        if self.name is not None and self.definition is not None:
            raise ConfigError("model takes a name or a definition, not both")

    def build(self):
        try:
            if self.definition is not None:
                return polynomial_model(self.definition)
            return get_model(self.name or "burgers", **self.parameters)
        except ModelDefinitionError as exc:
            raise ConfigError(f"model: {exc}", **exc.details) from exc


@dataclass(frozen=True)
class TemplateConfig:
    """Overrides of the template constants; None keeps the endstate defaults."""
    L: Optional[float] = None
    M: Optional[float] = None
    eta: Optional[float] = None
    C: float = 1.0
    l_shape: str = "constant"

    def __post_init__(self):
        for name in ("L", "M", "eta", "C"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"templates.{name} must be positive", value=value)
        if self.l_shape not in ("constant", "decaying"):
            raise ConfigError("templates.l_shape must be 'constant' or 'decaying'", value=self.l_shape)

    def params(self, model, ell=None, eta=None):
        """TemplateParams for model; an explicit eta here wins over the argument."""
        eta = self.eta if self.eta is not None else eta
        shape = LShape()
        if self.l_shape == "decaying":
            shape = decaying_shape(eta if eta is not None else 1.0)
        return template_params(model, ell=ell, eta=eta, L=self.L, M=self.M, l_shape=shape, C=self.C)


@dataclass(frozen=True)
class VerificationConfig:
    """
    Lemma selection and resolution, plus the Green-probe placement.

    Args:
        lemmas (tuple): LemmaId values to run; empty runs all
        n_draws (int): Random draws per algebraic identity
        t_values (tuple): Times of the (x, t) quadrature grid
        x_count, s_nodes, y_base, y_local, refine_factor (int): LemmaGrid resolution
        tol_refine (float): Allowed relative change of fitted_C under refinement
        probe_y0 (float): Source point of the Green probe
        probe_widths (tuple): Successively halved initial widths
        probe_T (float): Horizon of the Green probe
        tol_growth (float): Allowed change of the bound ceilings when the horizon doubles
    """
    lemmas: tuple = ()
    n_draws: int = 10_000
    t_values: tuple = tuple(float(t) for t in np.geomspace(0.1, 64.0, 8))
    x_count: int = 25
    s_nodes: int = 24
    y_base: int = 1601
    y_local: int = 81
    refine_factor: int = 2
    tol_refine: float = 0.1
    probe_y0: float = -5.0
    probe_widths: tuple = (0.5, 0.25)
    probe_T: float = 30.0
    tol_growth: float = 0.1

    def __post_init__(self):
        known = {lemma.value for lemma in LemmaId}
        unknown = [v for v in self.lemmas if v not in known]
        if unknown:
            raise ConfigError(f"unknown lemmas {unknown}", known=", ".join(sorted(known)))
        if self.n_draws < 1:
            raise ConfigError("verification.n_draws must be positive")
        if not 0 < self.tol_refine < 1:
            raise ConfigError("verification.tol_refine must lie in (0, 1)")
        if len(self.probe_widths) < 2 or min(self.probe_widths) <= 0 or self.probe_T <= 0:
            raise ConfigError("green probe needs two positive widths and a positive horizon")
        self.grid()

    def grid(self):
        try:
            return LemmaGrid(
                t_values=tuple(self.t_values), x_count=self.x_count, s_nodes=self.s_nodes,
                y_base=self.y_base, y_local=self.y_local, refine_factor=self.refine_factor,
                tol_refine=self.tol_refine,
            )
        except DomainError as exc:
            raise ConfigError(f"verification: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    profile: ProfileOptions = field(default_factory=ProfileOptions)
    spectral: EvansOptions = field(default_factory=EvansOptions)
    templates: TemplateConfig = field(default_factory=TemplateConfig)
    evolution: EvolveControls = field(default_factory=EvolveControls)
    verification: VerificationConfig = field(default_factory=VerificationConfig)
    output_dir: str = "output"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.threads < 1:
            raise ConfigError("threads must be at least 1", threads=self.threads)
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative", seed=self.seed)

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return RunConfig(**values)

    def to_dict(self):
        def plain(obj):
            if hasattr(obj, "__dataclass_fields__"):
                return {f.name: plain(getattr(obj, f.name)) for f in fields(obj)}
            if isinstance(obj, tuple):
                return [plain(v) for v in obj]
            return obj
        return plain(self)
#%%
SECTIONS = {
    "model": ModelConfig,
    "profile": ProfileOptions,
    "spectral": EvansOptions,
    "templates": TemplateConfig,
    "evolution": EvolveControls,
    "verification": VerificationConfig,
}
TUPLE_KEYS = {"lemmas", "t_values", "probe_widths"}


def _section(cls, data, name):
    if not isinstance(data, dict):
        raise ConfigError(f"section {name!r} must be an object")
    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {unknown}", section=name)
    values = {k: tuple(v) if k in TUPLE_KEYS and isinstance(v, list) else v for k, v in data.items()}
    try:
        return cls(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError, DomainError) as exc:
        raise ConfigError(f"invalid {name!r} section: {exc}", section=name) from exc


def config_from_dict(data):
    """
    Build a RunConfig from a parsed JSON document.

    Args:
        data (dict): Top-level keys are the RunConfig fields

    Returns:
        RunConfig: Validated configuration

    Raises:
        ConfigError: Unknown keys, wrong types or out-of-range values
    """
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    top = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - top)
    if unknown:
        raise ConfigError(f"unknown top-level keys: {unknown}")
    values = {}
    for key, value in data.items():
        values[key] = _section(SECTIONS[key], value, key) if key in SECTIONS else value
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path=None):
    """Read a JSON configuration file; None gives the defaults."""
    if path is None:
        return RunConfig()
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}", path=str(path)) from exc
    return config_from_dict(data)
