from collections.abc import Callable
from dataclasses import dataclass, field, fields, replace

import logging
import os

from structcode.utils import find_ints, parse_grid

logger = logging.getLogger(__name__)

MODELS = ("crosspaired", "paired", "dsbs", "ternary", "custom")


class ExpectedConfigKeyMissing(ValueError):
    key: str
    config_path: str | None

    def __init__(self, key: str, config_path: str | None = None):
        where = "on the command line" if config_path is None else f"in {config_path}"
        super().__init__(f"{key} must be set {where}")
        self.key = key
        self.config_path = config_path


class InvalidConfigValue(ValueError):
    key: str
    value: str
    config_path: str | None

    def __init__(self, key: str, value: str, config_path: str | None = None, reason: str | None = None):
        message = f"invalid value `{value}` for {key}"

        if reason is not None:
            message += f": {reason}"

        if config_path is not None:
            message += f" (in {config_path})"

        super().__init__(message)
        self.key = key
        self.value = value
        self.config_path = config_path


def _int_list(text: str) -> list[int]:
    values = find_ints(text)

    if len(values) == 0:
        raise ValueError("expected one or more integers")

    return values


def _model_name(text: str) -> str:
    if text not in MODELS:
        raise ValueError(f"expected one of {', '.join(MODELS)}")

    return text


def _grid(text: str) -> str:
    values = parse_grid(text)

    if any(not (0.0 < p < 1.0) for p in values):
        raise ValueError("grid points must lie strictly between 0 and 1")

    return text


CONVERTERS: dict[str, Callable[[str], object]] = {
    "scheme": str,
    "model": _model_name,
    "figure": str,
    "table": str,
    "q": int,
    "m": int,
    "l": int,
    "p": float,
    "p_grid": _grid,
    "epsilon": float,
    "trials": int,
    "n": int,
    "k": _int_list,
    "seed": int,
    "out": str,
    "workers": int,
}


@dataclass(frozen=True)
class RunConfig:
    """
    Parameters of one CLI run. A field left at `None` falls back to the
    command's own default.
    """

    subcommand: str | None = None
    scheme: str | None = None
    model: str | None = None
    figure: str | None = None
    table: str | None = None
    q: int = 2
    m: int = 2
    l: int = 1
    p: float | None = None
    p_grid: str | None = None
    epsilon: float = 0.2
    trials: int = 2000
    n: int = 20
    k: list[int] = field(default_factory=lambda: [17])
    seed: int = 0
    out: str | None = None
    workers: int = 1
    config_path: str | None = None

    def sweep(self, default: list[float]) -> list[float]:
        """The p values to evaluate: the grid if one is set, else the single p, else `default`."""
        if self.p_grid is not None:
            return parse_grid(self.p_grid)
        elif self.p is not None:
            return [self.p]
        else:
            return default

    def require(self, key: str) -> object:
        value = getattr(self, key)

        if value is None:
            raise ExpectedConfigKeyMissing(key, self.config_path)

        return value

    def with_overrides(self, **overrides) -> "RunConfig":
        """Copy with every override that is not `None` applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @staticmethod
    def load_from_str(file_text: str, config_path: str | None = None) -> "RunConfig":
        """Create a run config from `key = value` lines. Unknown keys are ignored."""
        values: dict[str, object] = {}

        for line in file_text.splitlines():
            line = line.strip()

            if line == "" or line.startswith("#"):
                continue

            if "=" not in line:
                raise InvalidConfigValue(line, "", config_path, "expected `key = value`")

            name, value = line.split("=", maxsplit=1)
            name = name.strip()
            value = value.strip()

            if name not in CONVERTERS:
                logger.info(f"unknown config key `{name}`")
                continue

            if value == "":
                raise ExpectedConfigKeyMissing(name, config_path=config_path)

            try:
                values[name] = CONVERTERS[name](value)
            except ValueError as e:
                raise InvalidConfigValue(name, value, config_path, str(e)) from e

        return RunConfig(config_path=config_path, **values)

    @staticmethod
    def load_from_file(file_name: str) -> "RunConfig":
        """Tries to load a run configuration from the provided file path"""
        with open(file_name, "r") as file:
            return RunConfig.load_from_str(file.read(), config_path=os.path.abspath(file_name))


def config_keys() -> list[str]:
    return [f.name for f in fields(RunConfig) if f.name in CONVERTERS]
