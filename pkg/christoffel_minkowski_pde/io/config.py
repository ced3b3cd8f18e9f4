# !/usr/bin/python3
# -*-coding utf-8 -*-
# @Time     : 2026/09/06 10:05
# @Project  : expanding_curvature_flow
# @File     : config.py
# @Software : PyCharm
import configparser
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Tuple, Union

from christoffel_minkowski_pde.model.scenarios import Outcome, ScenarioRecipe, list_scenarios, scenario_recipe, \
    validate_recipe
from christoffel_minkowski_pde.utils.exceptions import ConfigSemanticError, ConfigSyntaxError, FlowError

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")

_SECTIONS = {
    "scenario": ("name", "n", "k", "p", "phi", "phi_epsilon", "phi_m", "phi_delta", "initial", "initial_a",
                 "initial_c", "initial_radius", "expected_outcome"),
    "grid": ("num_points",),
    "engine": ("cfl", "t_max", "residual_tol", "normalization", "renorm_projection", "breakdown_zeta_tol",
               "sample_stride"),
    "output": ("directory", "formats"),
}


@dataclass(frozen=True)
class RunConfig:
    """
    Fully validated run configuration. Every default is explicit.
    """
    scenario: str
    recipe: ScenarioRecipe
    num_points: int = 256
    cfl: float = 0.2
    t_max: float = 50.
    residual_tol: float = 1e-6
    normalization: str = "normalized_pde"
    renorm_projection: bool = False
    breakdown_zeta_tol: float = -1e-8
    sample_stride: int = 1
    output_dir: str = "output"
    formats: Tuple[str, ...] = field(default=FORMATS)

    @property
    def inline(self) -> bool:
        """
        Whether the scenario is described in the configuration instead of taken from the registry.
        """
        return self.scenario not in list_scenarios() or self.recipe != scenario_recipe(self.scenario)

    def engine_kwargs(self) -> Dict[str, object]:
        """
        Keyword arguments of FlowParams / make_scenario.
        """
        return dict(cfl=self.cfl, t_max=self.t_max, residual_tol=self.residual_tol,
                    normalization=self.normalization, renorm_projection=self.renorm_projection,
                    breakdown_zeta_tol=self.breakdown_zeta_tol, sample_stride=self.sample_stride)

    def with_overrides(self, **overrides) -> "RunConfig":
        """
        Copy with some keys replaced (None values are ignored), validated again.
        """
        overrides = {key: value for key, value in overrides.items() if value is not None}
        config = replace(self, **overrides)
        validate_config(config)
        return config


def validate_config(config: RunConfig):
    """
    Checks the preconditions of the flow and of the scenario.

    Raises
    ------
    ConfigSemanticError
        Naming the violated precondition.
    """
    unknown = set(config.formats) - set(FORMATS)
    if unknown or not config.formats:
        raise ConfigSemanticError(f"[output] formats must be a non-empty subset of {list(FORMATS)}. "
                                  f"Currently is {list(config.formats)}.")
    try:
        validate_recipe(config.recipe, config.num_points, **config.engine_kwargs())
    except (FlowError, TypeError, ValueError) as error:
        raise ConfigSemanticError(str(error)) from error


class _Reader:
    """
    Typed access to the options of a parsed configuration, remembering which keys were consumed.
    """

    def __init__(self, parser: configparser.ConfigParser):
        self.parser = parser

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def raw(self, section: str, key: str) -> str:
        value = self.parser.get(section, key).strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        return value

    def get(self, section: str, key: str, convert, default=None):
        if not self.has(section, key):
            return default
        value = self.raw(section, key)
        try:
            return convert(value)
        except ValueError:
            raise ConfigSemanticError(f"[{section}] {key}: cannot read {value!r} as "
                                      f"'{getattr(convert, '__name__', 'value')}'.") from None


def _boolean(value: str) -> bool:
    states = configparser.ConfigParser.BOOLEAN_STATES
    if value.lower() not in states:
        raise ValueError(value)
    return states[value.lower()]


def _formats(value: str) -> Tuple[str, ...]:
    return tuple(item.strip() for item in value.split(",") if item.strip())


def _parse_text(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=("#", ";"),
                                       empty_lines_in_values=False, default_section="__defaults__")
    parser.optionxform = str
    try:
        parser.read_string(text, source="<config>")
    except configparser.MissingSectionHeaderError as error:
        raise ConfigSyntaxError(f"expected a section header, found {error.line.strip()!r}", error.lineno) from None
    except configparser.DuplicateSectionError as error:
        raise ConfigSyntaxError(f"duplicate section [{error.section}]", error.lineno) from None
    except configparser.DuplicateOptionError as error:
        raise ConfigSyntaxError(f"duplicate key '{error.option}' in [{error.section}]", error.lineno) from None
    except configparser.ParsingError as error:
        lineno, line = error.errors[0]
        raise ConfigSyntaxError(f"expected 'key = value', found {line.strip()!r}", lineno) from None
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigSemanticError(f"unknown section [{section}]. Options are {list(_SECTIONS)}.")
        for key in parser.options(section):
            if key not in _SECTIONS[section]:
                raise ConfigSemanticError(f"unknown key '{key}' in [{section}].")
    return parser


def _parse_recipe(reader: _Reader) -> Tuple[str, ScenarioRecipe]:
    if not reader.has("scenario", "name"):
        raise ConfigSemanticError("missing key 'name' in [scenario].")
    name = reader.raw("scenario", "name")
    inline_keys = [key for key in _SECTIONS["scenario"] if key != "name" and reader.has("scenario", key)]
    if not inline_keys:
        if name not in list_scenarios():
            raise ConfigSemanticError(f"unknown scenario '{name}'. Options are {list_scenarios()}, "
                                      f"or describe it with the keys n, k, p, phi and initial.")
        return name, scenario_recipe(name)
    if name in list_scenarios():
        raise ConfigSemanticError(f"scenario '{name}' is registered and cannot be redefined "
                                  f"(found {inline_keys}).")
    missing = [key for key in ("n", "k", "p") if not reader.has("scenario", key)]
    if missing:
        raise ConfigSemanticError(f"inline scenario '{name}' is missing {missing}.")
    phi_parameters = {key[len("phi_"):]: reader.get("scenario", key, float)
                      for key in ("phi_epsilon", "phi_m", "phi_delta") if reader.has("scenario", key)}
    initial_parameters = {key[len("initial_"):]: reader.get("scenario", key, float)
                          for key in ("initial_a", "initial_c", "initial_radius") if reader.has("scenario", key)}
    recipe = ScenarioRecipe(
        n=reader.get("scenario", "n", int),
        k=reader.get("scenario", "k", int),
        p=reader.get("scenario", "p", float),
        phi_kind=reader.get("scenario", "phi", str, "constant"),
        phi_parameters=phi_parameters,
        initial_kind=reader.get("scenario", "initial", str, "sphere"),
        initial_parameters=initial_parameters,
        expected_outcome=reader.get("scenario", "expected_outcome", str, Outcome.CONVERGE.value),
    )
    return name, recipe


def parse_config(text: str) -> RunConfig:
    """
    Parses and validates a run configuration.

    The text is INI-like: 'key = value' lines under the sections [scenario], [grid], [engine] and [output], with
    '#' or ';' comments. A scenario is either a registered name or an inline description (n, k, p, phi, phi_*,
    initial, initial_*, expected_outcome) under a new name.

    Parameters
    ----------
    text : str
        Configuration text.

    Returns
    -------
    RunConfig

    Raises
    ------
    ConfigSyntaxError
        With the line number of the first malformed line.
    ConfigSemanticError
        Naming the violated precondition.
    """
    reader = _Reader(_parse_text(text))
    name, recipe = _parse_recipe(reader)
    config = RunConfig(
        scenario=name,
        recipe=recipe,
        num_points=reader.get("grid", "num_points", int, 256),
        cfl=reader.get("engine", "cfl", float, 0.2),
        t_max=reader.get("engine", "t_max", float, 50.),
        residual_tol=reader.get("engine", "residual_tol", float, 1e-6),
        normalization=reader.get("engine", "normalization", str, recipe.normalization),
        renorm_projection=reader.get("engine", "renorm_projection", _boolean, False),
        breakdown_zeta_tol=reader.get("engine", "breakdown_zeta_tol", float, -1e-8),
        sample_stride=reader.get("engine", "sample_stride", int, 1),
        output_dir=reader.get("output", "directory", str, "output"),
        formats=reader.get("output", "formats", _formats, FORMATS),
    )
    validate_config(config)
    logger.debug("Parsed configuration of scenario '%s'", name)
    return config


def load_config(path: Union[str, Path]) -> RunConfig:
    """
    Reads and parses a configuration file.
    """
    return parse_config(Path(path).read_text(encoding="utf-8"))


def emit_config(config: RunConfig) -> str:
    """
    Configuration text with every value explicit; parse_config gives back an equal RunConfig.
    """
    lines = ["[scenario]", f"name = {config.scenario}"]
    if config.inline:
        recipe = config.recipe
        lines += [f"n = {recipe.n}", f"k = {recipe.k}", f"p = {float(recipe.p)!r}", f"phi = {recipe.phi_kind}"]
        lines += [f"phi_{key} = {float(value)!r}" for key, value in sorted(recipe.phi_parameters.items())]
        lines += [f"initial = {recipe.initial_kind}"]
        lines += [f"initial_{key} = {float(value)!r}" for key, value in sorted(recipe.initial_parameters.items())]
        lines += [f"expected_outcome = {recipe.expected_outcome}"]
    lines += [
        "",
        "[grid]",
        f"num_points = {config.num_points}",
        "",
        "[engine]",
        f"cfl = {float(config.cfl)!r}",
        f"t_max = {float(config.t_max)!r}",
        f"residual_tol = {float(config.residual_tol)!r}",
        f"normalization = {config.normalization}",
        f"renorm_projection = {str(config.renorm_projection).lower()}",
        f"breakdown_zeta_tol = {float(config.breakdown_zeta_tol)!r}",
        f"sample_stride = {config.sample_stride}",
        "",
        "[output]",
        f"directory = {config.output_dir}",
        f"formats = {', '.join(config.formats)}",
    ]
    return "\n".join(lines) + "\n"
