from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from smoothcopula.estimation.estimators import EstimatorTag, PilotKind, SmoothSpec, SurvivalCopula
from smoothcopula.models.copula_models import CopulaModel, model_from_tau, param_to_tau
from smoothcopula.shared.errors import ConfigurationError
from smoothcopula.validation.grammar import (format_estimator, format_model, format_number, parse_estimator,
                                             parse_model)

SweepAxis = Literal["tau", "n", "rho", "pilot_tau"]

# ===================================================================
# Experiment configuration
# ===================================================================


class ExperimentConfig(BaseModel):
    """
    One Monte Carlo experiment: a data-generating model, a sample size and
    the estimators compared on common random samples.
    """

    model_config = ConfigDict(frozen=True)

    model: Any = Field(description="Data-generating copula (model string or CopulaModel).")
    n: int = Field(ge=1, description="Sample size.")
    reps: int = Field(2000, ge=2, description="Number of replications.")
    integration_nodes: int = Field(1024, ge=1, description="Number of Sobol integration nodes.")
    estimators: List[Any] = Field(min_length=1, description="Estimator strings or specifications.")
    seed: int = Field(42, description="Seed of the experiment.")

    @field_validator("model", mode="before")
    @classmethod
    def _parse_model(cls, value: Any) -> CopulaModel:
        if isinstance(value, str):
            return parse_model(value)
        if not isinstance(value, CopulaModel):
            raise ValueError(f"expected a model string, got {value!r}")
        return value

    @field_validator("estimators", mode="before")
    @classmethod
    def _parse_estimators(cls, values: Any) -> List[Any]:
        if isinstance(values, (str, SmoothSpec, EstimatorTag)):
            values = [values]
        parsed = []
        for value in values:
            if isinstance(value, (SmoothSpec, EstimatorTag)):
                parsed.append(value)
            elif isinstance(value, str):
                parsed.append(parse_estimator(value))
            else:
                raise ValueError(f"expected an estimator string, got {value!r}")
        return parsed

    @model_validator(mode="after")
    def _check_dimensions(self) -> "ExperimentConfig":
        for spec in self.estimators:
            if isinstance(spec, SmoothSpec) and spec.survival_copula.kind == PilotKind.FIXED \
                    and spec.survival_copula.model.d != self.model.d:
                raise ValueError(f"estimator {format_estimator(spec)} does not match d={self.model.d}")
        return self

    @field_serializer("model")
    def _dump_model(self, value: CopulaModel) -> str:
        return format_model(value)

    @field_serializer("estimators")
    def _dump_estimators(self, values: List[Any]) -> List[str]:
        return [format_estimator(v) for v in values]

    def labels(self) -> List[str]:
        return [format_estimator(v) for v in self.estimators]


def axis_label(spec: Any, axis: Optional[str]) -> str:
    """Estimator label with the swept parameter removed."""
    if isinstance(spec, EstimatorTag) or axis not in ("rho", "pilot_tau"):
        return format_estimator(spec)

    margin, pilot = spec.margin, spec.survival_copula
    head = margin.kind.value
    if margin.rho is not None and axis != "rho":
        head += f":rho={format_number(margin.rho)}"

    if pilot.kind != PilotKind.FIXED:
        return f"{head}:pilot={pilot.kind.value}"
    if axis == "pilot_tau":
        prefix = "survival-" if pilot.model.survival else ""
        return f"{head}:fixed-pilot={prefix}{pilot.model.family.value}:d={pilot.model.d}"
    return f"{head}:fixed-pilot={format_model(pilot.model)}"


def axis_value(config: ExperimentConfig, axis: str) -> float:
    """Value of the swept parameter in ``config``."""
    if axis == "n":
        return float(config.n)
    if axis == "tau":
        return float(param_to_tau(config.model))
    for spec in config.estimators:
        if not isinstance(spec, SmoothSpec):
            continue
        if axis == "rho" and spec.margin.rho is not None:
            return float(spec.margin.rho)
        if axis == "pilot_tau" and spec.survival_copula.kind == PilotKind.FIXED:
            return float(param_to_tau(spec.survival_copula.model))
    raise ConfigurationError(f"no estimator carries the swept parameter {axis!r}")


def _with_axis_value(spec: Any, axis: str, value: float) -> Any:
    if not isinstance(spec, SmoothSpec):
        return spec
    if axis == "rho" and spec.margin.rho is not None:
        return SmoothSpec(spec.margin.model_copy(update={"rho": float(value)}), spec.survival_copula)
    if axis == "pilot_tau" and spec.survival_copula.kind == PilotKind.FIXED:
        model = spec.survival_copula.model
        pilot = model_from_tau(model.family, value, d=model.d, survival=model.survival)
        return SmoothSpec(spec.margin, SurvivalCopula.fixed(pilot))
    return spec


class SweepConfig(BaseModel):
    """A base experiment swept along one axis."""

    model_config = ConfigDict(frozen=True)

    base: ExperimentConfig
    axis: SweepAxis = "n"
    values: List[float] = Field(default_factory=list)
    reference: Optional[str] = Field(None, description="Estimator label used for relative efficiencies.")

    @model_validator(mode="before")
    @classmethod
    def _split_base(cls, data: Any) -> Any:
        # Flat documents: experiment fields next to axis / values / reference
        if isinstance(data, dict) and "base" not in data:
            sweep_keys = {"axis", "values", "reference"}
            data = {"base": {k: v for k, v in data.items() if k not in sweep_keys},
                    **{k: v for k, v in data.items() if k in sweep_keys}}
        return data

    def expand(self) -> List[ExperimentConfig]:
        """One ExperimentConfig per axis value (the base alone when no values are given)."""
        if not self.values:
            return [self.base]
        configs = []
        for value in self.values:
            update: Dict[str, Any] = {}
            if self.axis == "n":
                if int(value) != value or value < 1:
                    raise ConfigurationError(f"n axis values must be positive integers, got {value}")
                update["n"] = int(value)
            elif self.axis == "tau":
                model = self.base.model
                extra = {k: v for k, v in model.params.items() if k in ("s1", "s2")}
                update["model"] = model_from_tau(model.family, value, d=model.d,
                                                 survival=model.survival, extra=extra)
            else:
                update["estimators"] = [_with_axis_value(s, self.axis, value) for s in self.base.estimators]
            configs.append(self.base.model_copy(update=update))
        return configs


# ===================================================================
# Reports
# ===================================================================


class EstimatorPerformance(BaseModel):
    """Integrated performance measures of one estimator with Monte Carlo standard errors."""

    isb: float
    ivar: float
    imse: float
    se_isb: float
    se_ivar: float
    se_imse: float


class PerformanceReport(BaseModel):
    """Performance of every estimator of an experiment, in configuration order."""

    config: ExperimentConfig
    performances: Dict[str, EstimatorPerformance]
    ties_seen: bool = False


class SweepRow(BaseModel):
    axis: float
    estimator: str
    isb: float
    ivar: float
    imse: float
    se_isb: float
    se_ivar: float
    se_imse: float
    rel_eff: Optional[float] = None


class EquivalenceRow(BaseModel):
    """Median grid-sup distance between the smooth and classical sequential processes."""

    n: int
    median_sup: float
    q25: float
    q75: float
    se_median: float
