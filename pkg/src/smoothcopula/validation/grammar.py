import re
from typing import Dict, List, Optional, Tuple

from pydantic import ValidationError

from smoothcopula.estimation.estimators import EstimatorSpec, EstimatorTag, PilotKind, SmoothSpec, SurvivalCopula
from smoothcopula.estimation.smoothing_margins import MarginFamily, MarginKind
from smoothcopula.models.copula_models import CopulaFamily, CopulaModel, model_from_tau
from smoothcopula.shared.errors import DomainError, GrammarError
from smoothcopula.shared.utils.logger import SmoothCopulaLogger

FAMILY_ALIASES = {
    "independence": CopulaFamily.INDEPENDENCE,
    "indep": CopulaFamily.INDEPENDENCE,
    "pi": CopulaFamily.INDEPENDENCE,
    "clayton": CopulaFamily.CLAYTON,
    "frank": CopulaFamily.FRANK,
    "gumbel": CopulaFamily.GUMBEL_HOUGAARD,
    "gumbel-hougaard": CopulaFamily.GUMBEL_HOUGAARD,
    "gaussian": CopulaFamily.GAUSSIAN,
    "normal": CopulaFamily.GAUSSIAN,
    "khoudraji-clayton": CopulaFamily.KHOUDRAJI_CLAYTON,
}

_FAMILY = "|".join(sorted(FAMILY_ALIASES, key=len, reverse=True))
_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"

MODEL_PATTERN = re.compile(
    rf"^(?P<survival>survival-)?(?P<family>{_FAMILY})(?P<params>(?::(?:tau|theta|r|s1|s2|d)={_NUMBER})*)$"
)


class GrammarValidator:
    """Estimator and model string validation"""

    def __init__(self, logger: Optional[SmoothCopulaLogger] = None):
        self.patterns = self._initialize_patterns()
        self.logger = logger or SmoothCopulaLogger("grammar_validator")

    def _initialize_patterns(self) -> List[re.Pattern]:
        """Initialize regex patterns for estimator strings"""
        return [
            # tags: "ecdf", "ebc"
            re.compile(r"^(?P<tag>ecdf|ebc)$"),
            # scaled binomial: "binomial:pilot=ebc"
            re.compile(r"^(?P<margin>binomial)(?::pilot=(?P<pilot>indep|ebc))?$"),
            # dispersed margins: "beta-binomial:rho=4:pilot=ebc", "beta:rho=0.5"
            re.compile(rf"^(?P<margin>beta-binomial|beta):rho=(?P<rho>{_NUMBER})(?::pilot=(?P<pilot>indep|ebc))?$"),
            # fixed survival copula: "beta-binomial:rho=2:fixed-pilot=survival-clayton:tau=0.3"
            re.compile(rf"^(?:(?P<margin>binomial)|(?P<dmargin>beta-binomial|beta):rho=(?P<rho>{_NUMBER}))"
                       r":fixed-pilot=(?P<model>.+)$"),
            # fixed survival copula with binomial margins: "fixed-pilot=clayton:tau=0.5"
            re.compile(r"^fixed-pilot=(?P<model>.+)$"),
        ]

    def match(self, line: str) -> Optional[re.Match]:
        clean_line = line.strip()
        for pattern in self.patterns:
            found = pattern.match(clean_line)
            if found:
                return found
        return None

    def validate_line(self, line: str) -> bool:
        """
        Validate a single estimator string

        Args:
            line: estimator string

        Returns:
            bool: True if valid
        """
        if not line.strip():
            return False
        found = self.match(line)
        if found is None:
            return False
        model = found.groupdict().get("model")
        return model is None or MODEL_PATTERN.match(model.strip()) is not None

    def find_invalid_lines(self, text: str) -> List[str]:
        """Estimator strings (one per line, '#' comments allowed) that do not parse"""
        invalid_lines = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if not self.validate_line(line):
                invalid_lines.append(line)
        return invalid_lines

    def check_format(self, text: str) -> Tuple[bool, List[str]]:
        """
        Check the format and return results

        Returns:
            Tuple[bool, List[str]]: (overall validity, list of invalid lines)
        """
        invalid_lines = self.find_invalid_lines(text)
        is_valid = len(invalid_lines) == 0

        if is_valid:
            self.logger.debug("✅ All estimator strings have valid format")
        else:
            self.logger.warning(f"⚠️ {len(invalid_lines)} invalid estimator strings detected")
        return is_valid, invalid_lines

    def parse(self, line: str) -> EstimatorSpec:
        found = self.match(line)
        if found is None:
            raise GrammarError(f"invalid estimator string: {line!r}")
        groups = {k: v for k, v in found.groupdict().items() if v is not None}

        if "tag" in groups:
            return EstimatorTag(groups["tag"])

        margin_name = groups.get("margin") or groups.get("dmargin") or MarginKind.SCALED_BINOMIAL.value
        try:
            margin = MarginFamily(kind=MarginKind(margin_name),
                                  rho=float(groups["rho"]) if "rho" in groups else None)
        except ValidationError as e:
            raise DomainError(f"invalid margin in {line!r}: {e.errors()[0]['msg']}") from e

        if "model" in groups:
            survival_copula = SurvivalCopula.fixed(parse_model(groups["model"]))
        else:
            survival_copula = SurvivalCopula(PilotKind(groups.get("pilot", PilotKind.INDEPENDENCE.value)))
        return SmoothSpec(margin=margin, survival_copula=survival_copula)


def parse_model(text: str) -> CopulaModel:
    """
    Parse a model string such as ``clayton:tau=0.5:d=3`` or ``survival-gumbel:theta=2``.

    Raises:
        GrammarError: the string does not follow the grammar
        DomainError: the parameters are outside the family's range
    """
    found = MODEL_PATTERN.match(text.strip().lower())
    if found is None:
        raise GrammarError(f"invalid model string: {text!r}")

    family = FAMILY_ALIASES[found.group("family")]
    values: Dict[str, float] = {}
    for item in filter(None, found.group("params").split(":")):
        key, value = item.split("=", 1)
        if key in values:
            raise GrammarError(f"parameter {key!r} given twice in {text!r}")
        values[key] = float(value)

    d = values.pop("d", 2.0)
    if int(d) != d:
        raise GrammarError(f"dimension must be an integer in {text!r}")
    survival = found.group("survival") is not None

    if "tau" in values:
        tau = values.pop("tau")
        return model_from_tau(family, tau, d=int(d), survival=survival, extra=values)
    return CopulaModel(family, values, int(d), survival)


def parse_estimator(text: str, validator: Optional[GrammarValidator] = None) -> EstimatorSpec:
    """Parse an estimator string such as ``beta-binomial:rho=4:pilot=ebc``."""
    return (validator or GrammarValidator()).parse(text)


def format_number(value: float) -> str:
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def format_model(model: CopulaModel) -> str:
    """Canonical model string; ``parse_model(format_model(m)) == m``."""
    prefix = "survival-" if model.survival else ""
    params = "".join(f":{key}={format_number(value)}" for key, value in model.params.items())
    return f"{prefix}{model.family.value}{params}:d={model.d}"


def format_estimator(spec: EstimatorSpec) -> str:
    """Canonical estimator string."""
    if isinstance(spec, EstimatorTag):
        return spec.value
    margin = spec.margin
    head = margin.kind.value
    if margin.kind != MarginKind.SCALED_BINOMIAL:
        head += f":rho={format_number(margin.rho)}"
    if spec.survival_copula.kind == PilotKind.FIXED:
        return f"{head}:fixed-pilot={format_model(spec.survival_copula.model)}"
    return f"{head}:pilot={spec.survival_copula.kind.value}"
