import os
from dataclasses import dataclass, fields
from typing import Any, Dict, Optional, get_args

from dotenv import load_dotenv

from smoothcopula.shared.errors import ConfigurationError

ENV_PREFIX = "SMOOTHCOPULA_"


@dataclass(kw_only=True)
class Configuration:
    """Runtime settings shared by the simulations and the command-line front end."""

    seed: int = 42  # Default seed for stochastic subcommands
    threads: Optional[int] = None  # Worker threads; None -> os.cpu_count()
    reps: int = 2000  # Desk-scale replications
    long_reps: int = 20000  # Replications in long mode
    integration_nodes: int = 1024  # Sobol nodes per experiment
    mc_samples: int = 100000  # Draws used by the mixture oracle
    grid_size: int = 11  # Default u-grid size per coordinate
    rho_epsilon: float = 1e-9  # Offset used when clamping rho below n - 1
    log_level: str = "INFO"
    log_dir: Optional[str] = None
    show_progress: bool = True  # tqdm bars on replication loops

    @classmethod
    def from_env(cls, overrides: Optional[Dict[str, Any]] = None,
                 dotenv_path: Optional[str] = None) -> "Configuration":
        """
        Create a Configuration from ``.env``, ``SMOOTHCOPULA_<FIELD>`` variables and overrides.

        Args:
            overrides: explicit values that win over the environment; ``None`` entries are ignored
            dotenv_path: optional path of a dotenv file (default: search upwards from the cwd)

        Returns:
            Configuration instance
        """
        load_dotenv(dotenv_path=dotenv_path, override=False)
        overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

        values: Dict[str, Any] = {}
        for f in fields(cls):
            if not f.init:
                continue
            raw = overrides.get(f.name, os.environ.get(f"{ENV_PREFIX}{f.name.upper()}"))
            if raw is None:
                continue
            values[f.name] = _coerce(f.name, f.type, raw)

        unknown = set(overrides) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigurationError(f"unknown configuration fields: {sorted(unknown)}")
        return cls(**values)

    def resolved_threads(self) -> int:
        """Number of worker threads to use (at least one)."""
        return max(1, int(self.threads or os.cpu_count() or 1))

    def to_dict(self) -> Dict[str, Any]:
        """Convert the configuration to a dictionary."""
        return {f.name: getattr(self, f.name) for f in fields(self) if f.init}


def _coerce(name: str, annotation: Any, raw: Any) -> Any:
    if not isinstance(raw, str):
        return raw
    # Optional[X] -> X
    candidates = [a for a in get_args(annotation) if a is not type(None)] or [annotation]
    target = candidates[0]
    if isinstance(target, str):
        target = {"int": int, "float": float, "bool": bool, "str": str}.get(target, str)
    try:
        if target is bool:
            lowered = raw.strip().lower()
            if lowered not in {"1", "0", "true", "false", "yes", "no"}:
                raise ValueError(raw)
            return lowered in {"1", "true", "yes"}
        if target is int:
            return int(raw)
        if target is float:
            return float(raw)
        return raw
    except ValueError as e:
        raise ConfigurationError(f"invalid value for {name}: {raw!r}") from e
