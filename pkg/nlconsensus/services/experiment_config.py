"""
Experiment config files
=======================
Flat `key = value` text, one setting per line, '#' comments allowed:

    name = example1_case1
    graph = three_agent.txt        # relative paths resolve against the config file
    protocol = linsin:2
    x0 = 1, 2, 3
    dt = 0.001
    mode = certified               # or unchecked
    plot = true

Simulation keys (dt, t_max, consensus_tol, record_every, integrator) fall back
to the settings defaults when absent.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from nlconsensus.core.config import settings
from nlconsensus.core.exceptions import ConfigError
from nlconsensus.core.logger import logger
from nlconsensus.models.state import ExperimentConfig, SimulationConfig

SIM_KEYS = ("dt", "t_max", "consensus_tol", "record_every", "integrator")
EXPERIMENT_KEYS = ("name", "graph", "format", "protocol", "x0", "mode", "plot", "outputs")

# compare presets expand to a pair of simulate presets
COMPARE_PRESETS = {"example2": ("example2_nonlinear", "example2_linear")}


def parse_vector(text: str) -> List[float]:
    try:
        return [float(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError as e:
        raise ConfigError(f"bad vector {text!r}: {e}") from e


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"bad boolean {text!r}")


def _resolve(path: str, base_dir: Path) -> str:
    p = Path(path)
    return str(p if p.is_absolute() else (base_dir / p).resolve())


class ExperimentConfigLoader:

    def parse_pairs(self, text: str, source: str = "<config>") -> Dict[str, str]:
        pairs: Dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().lower()
            if not sep or not key:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
            if key not in SIM_KEYS and key not in EXPERIMENT_KEYS:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
            pairs[key] = value.strip()
        return pairs

    def build(self, pairs: Dict[str, Any], base_dir: Path, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        """Merge file values with CLI overrides (None means not given) and validate."""
        merged = dict(pairs)
        for key, value in (overrides or {}).items():
            if value is not None:
                merged[key] = value

        for required in ("graph", "protocol", "x0"):
            if required not in merged:
                raise ConfigError(f"config is missing required key {required!r}")

        protocol = str(merged["protocol"])
        if protocol.lower().startswith("table:"):
            protocol = "table:" + _resolve(protocol.split(":", 1)[1], base_dir)

        x0 = merged["x0"]
        if isinstance(x0, str):
            x0 = parse_vector(x0)
        plot = merged.get("plot", False)
        if isinstance(plot, str):
            plot = _parse_bool(plot)

        sim_values = {k: merged[k] for k in SIM_KEYS if k in merged}
        try:
            sim = SimulationConfig(**sim_values)
            return ExperimentConfig(
                name=str(merged.get("name", "experiment")),
                graph_source=_resolve(str(merged["graph"]), base_dir),
                graph_format=str(merged.get("format", "auto")),
                protocol_spec=protocol,
                x0=x0,
                sim=sim,
                outputs=str(merged.get("outputs", settings.OUTPUT_DIR)),
                mode=str(merged.get("mode", "certified")),
                plot=plot,
            )
        except ValidationError as e:
            err = e.errors()[0]
            where = ".".join(str(part) for part in err["loc"]) or "config"
            raise ConfigError(f"invalid config ({where}): {err['msg']}") from e

    def load(self, path: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        pairs = self.parse_pairs(p.read_text(encoding="utf-8"), source=str(p))
        cfg = self.build(pairs, p.resolve().parent, overrides)
        logger.info(f"Loaded experiment config {cfg.name!r} from {path}")
        return cfg

    def preset_path(self, name: str) -> Path:
        path = Path(settings.PRESETS_DIR) / f"{name}.cfg"
        if not path.exists():
            available = sorted(p.stem for p in Path(settings.PRESETS_DIR).glob("*.cfg"))
            raise ConfigError(f"unknown preset {name!r}; available: {', '.join(available)}")
        return path

    def load_preset(self, name: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        return self.load(str(self.preset_path(name)), overrides)

    def load_compare_preset(self, name: str, overrides: Optional[Dict[str, Any]] = None):
        if name not in COMPARE_PRESETS:
            raise ConfigError(f"unknown compare preset {name!r}; available: {', '.join(COMPARE_PRESETS)}")
        first, second = COMPARE_PRESETS[name]
        return self.load_preset(first, overrides), self.load_preset(second, overrides)


config_loader = ExperimentConfigLoader()
