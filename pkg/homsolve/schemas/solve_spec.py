from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from homsolve.core.config import settings
from homsolve.dependencies.error_code import ErrorCode, ValidationError
from homsolve.models.scalar import Regime
from homsolve.models.system import MultiIndex
from homsolve.schemas.system import ScalarDoc
from homsolve.services.constraints import SolveMode, SolveSpec, Unknown, UnknownKind


class DesignatedDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    equation: int
    exponents: List[int]


class UnknownDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["z", "ratio", "coefficient"]
    index: Optional[int] = Field(default=None, description="k of r_k for ratio unknowns")
    equation: Optional[int] = None
    exponents: Optional[List[int]] = None

    def to_domain(self) -> Unknown:
        return Unknown(
            kind=UnknownKind(self.kind),
            index=self.index,
            equation=self.equation,
            exponents=MultiIndex(self.exponents) if self.exponents is not None else None,
        )


class GuessDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    Z: ScalarDoc
    ratios: List[ScalarDoc] = Field(default_factory=list, description="r_1 .. r_{N-1}")


class SolveSpecDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Literal["coefficients", "z-pivot", "newton"]
    designated: List[DesignatedDoc] = Field(default_factory=list)
    pivot_equation: Optional[int] = None
    guess: Optional[GuessDoc] = None
    unknowns: Optional[List[UnknownDoc]] = None
    tol: Optional[float] = Field(default=None, description="Defaults to NEWTON_TOL")
    max_iter: Optional[int] = Field(default=None, description="Defaults to NEWTON_MAX_ITER")
    max_halvings: Optional[int] = Field(default=None, description="Defaults to NEWTON_MAX_HALVINGS")

    def to_domain(self, regime: Regime) -> SolveSpec:
        guess_regime = Regime.FLOAT if self.mode == "newton" else regime
        designated = {}
        for d in self.designated:
            if d.equation in designated:
                raise ValidationError(f"equation {d.equation} is designated twice", code=ErrorCode.INVALID_SOLVE_SPEC)
            designated[d.equation] = MultiIndex(d.exponents)
        controls = settings.newton_defaults()
        controls.update(self.model_dump(include=set(controls), exclude_none=True))
        return SolveSpec(
            mode=SolveMode(self.mode),
            designated=designated,
            pivot_equation=self.pivot_equation,
            guess_z=self.guess.Z.to_domain(guess_regime) if self.guess else None,
            guess_ratios=[g.to_domain(guess_regime) for g in self.guess.ratios] if self.guess else None,
            unknowns=[u.to_domain() for u in self.unknowns] if self.unknowns else None,
            **controls,
        )
