import json

import pytest

from VS_StabCert.config import (
    ModelConfig, RunConfig, TemplateConfig, VerificationConfig, config_from_dict, load_config,
)
from VS_StabCert.errors import ConfigError


def test_defaults():
    cfg = load_config()
    assert cfg.model.build().name == "burgers"
    assert cfg.evolution.E0 == 0.01
    assert cfg.verification.grid().tol_refine == 0.1
    assert cfg.output_dir == "output"
    assert json.loads(json.dumps(cfg.to_dict()))["evolution"]["T"] == 100.0


def test_sections_are_loaded():
    cfg = config_from_dict({
        "model": {"name": "coupled_quadratic"},
        "evolution": {"E0": 0.005, "T": 20.0},
        "verification": {"lemmas": ["interaction1"], "t_values": [1.0, 4.0]},
        "seed": 7,
    })
    assert cfg.model.build().n == 2
    assert cfg.evolution.T == 20.0
    assert cfg.verification.lemmas == ("interaction1",)
    assert cfg.verification.grid().t_values == (1.0, 4.0)
    assert cfg.seed == 7


def test_inline_definition():
    definition = {"n": 1, "flux": [[{"coefficient": 0.5, "powers": [2]}]],
                  "viscosity": [[1.0]], "u_minus": [1.0], "u_plus": [-1.0]}
    model = config_from_dict({"model": {"definition": definition}}).model.build()
    assert model.n == 1
    with pytest.raises(ConfigError):
        ModelConfig(name="burgers", definition=definition)


@pytest.mark.parametrize("data", [
    {"modle": {}},
    {"evolution": {"E0": 0.01, "dtt": 0.1}},
    {"profile": {"n_points": 5}},
    {"evolution": {"shape": "square"}},
    {"verification": {"lemmas": ["no_such_lemma"]}},
    {"verification": {"y_base": 1}},
    {"templates": {"L": -1.0}},
    {"templates": {"l_shape": "linear"}},
    {"threads": 0},
    {"spectral": []},
])
def test_bad_configurations(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_unknown_model_becomes_config_error():
    with pytest.raises(ConfigError):
        ModelConfig(name="no_such_model").build()
    with pytest.raises(ConfigError):
        ModelConfig(name="burgers", parameters={"wrong": 1.0}).build()


def test_template_config(burgers):
    p = TemplateConfig(L=7.0, C=3.0).params(burgers)
    assert p.L == 7.0
    assert p.C == 3.0
    decaying = TemplateConfig(l_shape="decaying").params(burgers, eta=2.0)
    assert decaying.l_shape.kind == "decaying"


def test_verification_defaults_run_everything():
    assert VerificationConfig().lemmas == ()
    assert VerificationConfig().tol_growth == 0.1


def test_load_from_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"model": {"name": "burgers"}, "output_dir": str(tmp_path / "out")}))
    cfg = load_config(path)
    assert cfg.output_dir == str(tmp_path / "out")
    assert cfg.replace(seed=3).seed == 3
    assert isinstance(cfg, RunConfig)


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(broken)