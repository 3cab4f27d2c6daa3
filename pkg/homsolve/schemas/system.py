from typing import List, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from homsolve.dependencies.error_code import ErrorCode, ValidationError
from homsolve.models.scalar import Regime, Scalar, format_scalar_part, parse_scalar
from homsolve.models.system import HomogeneousSystem, MultiIndex, validate_system

ScalarText = Union[str, int, float]


class ScalarDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    re: ScalarText = Field(..., description="Real part: 'p/q' string when exact, number when float")
    im: ScalarText = Field(default=0, description="Imaginary part")

    def to_domain(self, regime: Regime) -> Scalar:
        return parse_scalar(self.re, self.im, regime)

    @classmethod
    def from_domain(cls, value: Scalar) -> "ScalarDoc":
        return cls(re=format_scalar_part(value.re), im=format_scalar_part(value.im))


class CoefficientDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    equation: int = Field(..., description="Equation index n, 1-based")
    exponents: List[int] = Field(..., description="Exponents (m_1, ..., m_N)")
    re: ScalarText
    im: ScalarText = 0


class SystemDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_vars: int = Field(..., description="Number of dependent variables N")
    degree: int = Field(..., description="Homogeneity degree M")
    regime: Literal["exact", "float"] = "exact"
    coefficients: List[CoefficientDoc] = Field(default_factory=list)

    @model_validator(mode="after")
    def reject_duplicates(self) -> "SystemDoc":
        seen = set()
        for c in self.coefficients:
            key = (c.equation, tuple(c.exponents))
            if key in seen:
                raise ValueError(f"duplicate coefficient for equation {c.equation}, exponents {list(c.exponents)}")
            seen.add(key)
        return self

    def to_domain(self) -> HomogeneousSystem:
        regime = Regime(self.regime)
        coeffs = {
            (c.equation, MultiIndex(c.exponents)): parse_scalar(c.re, c.im, regime)
            for c in self.coefficients
        }
        system = HomogeneousSystem(self.n_vars, self.degree, coeffs, regime)
        violations = validate_system(system)
        if violations:
            raise ValidationError(
                "; ".join(str(v) for v in violations),
                code=ErrorCode.INVALID_SYSTEM,
                details={"violations": [str(v) for v in violations]},
            )
        return system

    @classmethod
    def from_domain(cls, system: HomogeneousSystem) -> "SystemDoc":
        coefficients = [
            CoefficientDoc(
                equation=n,
                exponents=list(mi),
                re=format_scalar_part(value.re),
                im=format_scalar_part(value.im),
            )
            for n in range(1, system.n_vars + 1)
            for mi, value in system.terms(n)
        ]
        return cls(
            n_vars=system.n_vars,
            degree=system.degree,
            regime=system.regime.value,
            coefficients=coefficients,
        )
