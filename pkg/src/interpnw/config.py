"""Flat ``key = value`` run configuration files.

Blank lines and ``#`` comments are ignored.  Recognized keys::

    scenario.name        catalog id (required)
    scenario.d           dimension (default 1)
    param.<key>          scenario parameter override, e.g. param.sigma = 0.1
    kernel.name          kernel id (required)
    kernel.a             singularity exponent (default 0.49 for singular kernels)
    kernel.force         true to skip the a < d/2 check
    experiment.n_grid    comma-separated sample sizes
    experiment.replicates
    experiment.seed
    experiment.eval      pointwise | integrated | both
    experiment.x0        comma-separated query point for pointwise runs
    experiment.n_eval    evaluation draws for integrated runs
    experiment.excess_risk
    experiment.workers
    probe.n              comma-separated sample sizes for bias-variance
    probe.x0
    probe.design_reps
    probe.noise_reps
    output.dir           directory for result files (required)
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from interpnw.errors import ConfigError

KEYS = {
    "scenario.name", "scenario.d",
    "kernel.name", "kernel.a", "kernel.force",
    "experiment.n_grid", "experiment.replicates", "experiment.seed", "experiment.eval",
    "experiment.x0", "experiment.n_eval", "experiment.excess_risk", "experiment.workers",
    "probe.n", "probe.x0", "probe.design_reps", "probe.noise_reps",
    "output.dir",
}
REQUIRED = ("scenario.name", "kernel.name", "output.dir")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class RunConfig:
    values: dict[str, str]
    source: str = "<config>"

    def __contains__(self, key: str) -> bool:
        return key in self.values

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.values.get(key, default)

    def get_int(self, key: str, default: int | None = None) -> int:
        raw = self.values.get(key)
        if raw is None:
            if default is None:
                raise ConfigError(f"{self.source}: missing key {key}")
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{self.source}: {key} must be an integer, got {raw!r}") from None

    def get_float(self, key: str, default: float | None = None) -> float | None:
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{self.source}: {key} must be a number, got {raw!r}") from None

    def get_bool(self, key: str, default: bool = False) -> bool:
        raw = self.values.get(key)
        if raw is None:
            return default
        if raw.lower() in _TRUE:
            return True
        if raw.lower() in _FALSE:
            return False
        raise ConfigError(f"{self.source}: {key} must be true or false, got {raw!r}")

    def get_ints(self, key: str, default: list[int] | None = None) -> list[int]:
        raw = self.values.get(key)
        if raw is None:
            if default is None:
                raise ConfigError(f"{self.source}: missing key {key}")
            return default
        try:
            return [int(t) for t in raw.split(",") if t.strip()]
        except ValueError:
            raise ConfigError(f"{self.source}: {key} must be a list of integers, got {raw!r}") from None

    def get_floats(self, key: str) -> list[float] | None:
        raw = self.values.get(key)
        if raw is None:
            return None
        try:
            return [float(t) for t in raw.split(",") if t.strip()]
        except ValueError:
            raise ConfigError(f"{self.source}: {key} must be a list of numbers, got {raw!r}") from None

    def scenario_params(self) -> dict[str, str]:
        return {k[len("param."):]: v for k, v in self.values.items() if k.startswith("param.")}


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (t.strip() for t in line.split("=", 1))
        if key not in KEYS and not (key.startswith("param.") and len(key) > len("param.")):
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"{source}: missing required key(s) {', '.join(missing)}")
    return RunConfig(values, source)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))
