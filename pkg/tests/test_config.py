import pytest

from christoffel_minkowski_pde.io.config import FORMATS, RunConfig, emit_config, load_config, parse_config
from christoffel_minkowski_pde.model.scenarios import ScenarioRecipe, scenario_recipe
from christoffel_minkowski_pde.utils.exceptions import ConfigSemanticError, ConfigSyntaxError

INLINE = """\
[scenario]
name = anisotropic_spheroid
n = 3
k = 2
p = 4
phi = sin2_power
phi_epsilon = 0.2
phi_m = 5
initial = spheroid
initial_a = 1
initial_c = 1.3

[grid]
num_points = 48

[engine]
t_max = 12.5
renorm_projection = yes
"""


def test_registered_scenario_with_defaults():
    config = parse_config("[scenario]\nname = round_sphere\n")
    assert config == RunConfig("round_sphere", scenario_recipe("round_sphere"))
    assert not config.inline
    assert config.num_points == 256
    assert config.formats == FORMATS
    assert config.engine_kwargs()["normalization"] == "normalized_pde"


def test_normalization_defaults_to_the_recipe():
    assert parse_config("[scenario]\nname = counterexample\n").normalization == "unnormalized"
    text = "[scenario]\nname = counterexample\n[engine]\nnormalization = rescale_each_step\n"
    assert parse_config(text).normalization == "rescale_each_step"


def test_inline_scenario():
    config = parse_config(INLINE)
    assert config.inline
    assert config.recipe == ScenarioRecipe(n=3, k=2, p=4., phi_kind="sin2_power",
                                           phi_parameters={"epsilon": 0.2, "m": 5.}, initial_kind="spheroid",
                                           initial_parameters={"a": 1., "c": 1.3})
    assert config.num_points == 48
    assert config.t_max == 12.5
    assert config.renorm_projection is True


def test_comments_and_quotes():
    text = "; run file\n[scenario]\nname = \"spheroid_sphere\"  # registered\n[grid]\nnum_points = 64 ; finer\n"
    config = parse_config(text)
    assert config.scenario == "spheroid_sphere"
    assert config.num_points == 64


@pytest.mark.parametrize("text, lineno", [
    ("name = round_sphere\n", 1),
    ("[scenario]\nname = round_sphere\nthis line is bad\n", 3),
    ("[grid]\nnum_points = 32\nnum_points = 64\n[scenario]\nname = round_sphere\n", 3),
    ("[scenario]\nname = round_sphere\n[scenario]\n", 3),
])
def test_syntax_errors_name_the_line(text, lineno):
    with pytest.raises(ConfigSyntaxError) as error:
        parse_config(text)
    assert error.value.lineno == lineno
    assert str(error.value).startswith(f"line {lineno}: ")


@pytest.mark.parametrize("text, match", [
    ("[scenario]\nname = mine\nn = 2\nk = 3\np = 3\n", "k must satisfy"),
    ("[scenario]\nname = bad\nn = 2\nk = 2\np = 3\nphi = counterexample\nphi_m = 3\ninitial = counterexample\n"
     "expected_outcome = breakdown\n", "k < n"),
    ("[scenario]\nname = round_sphere\n[engine]\nspeed = 3\n", "unknown key"),
    ("[scenario]\nname = round_sphere\n[plots]\n", "unknown section"),
    ("[scenario]\nname = round_sphere\n[grid]\nnum_points = many\n", "cannot read"),
    ("[scenario]\nname = round_sphere\n[engine]\ncfl = 2\n", "cfl"),
    ("[scenario]\nname = round_sphere\n[engine]\nrenorm_projection = perhaps\n", "cannot read"),
    ("[scenario]\nname = round_sphere\n[output]\nformats = csv, xlsx\n", "formats"),
    ("[scenario]\nname = torus\n", "unknown scenario"),
    ("[scenario]\nname = round_sphere\nn = 3\n", "cannot be redefined"),
    ("[scenario]\nname = mine\nn = 3\n", "missing"),
    ("[grid]\nnum_points = 32\n", "missing key 'name'"),
])
def test_semantic_errors(text, match):
    with pytest.raises(ConfigSemanticError, match=match):
        parse_config(text)


@pytest.mark.parametrize("text", [
    INLINE,
    "[scenario]\nname = theorem1\n[grid]\nnum_points = 40\n[engine]\ncfl = 0.1\nresidual_tol = 1e-9\n"
    "breakdown_zeta_tol = -1e-10\nsample_stride = 7\n[output]\ndirectory = runs/theorem1\nformats = csv\n",
])
def test_emit_round_trip(text):
    config = parse_config(text)
    assert parse_config(emit_config(config)) == config


def test_overrides():
    config = parse_config("[scenario]\nname = spheroid_sphere\n")
    changed = config.with_overrides(num_points=64, t_max=None, output_dir="elsewhere")
    assert changed.num_points == 64
    assert changed.t_max == config.t_max
    assert changed.output_dir == "elsewhere"
    with pytest.raises(ConfigSemanticError):
        config.with_overrides(num_points=4)


def test_load_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(INLINE, encoding="utf-8")
    assert load_config(path) == parse_config(INLINE)
