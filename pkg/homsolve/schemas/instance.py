from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from homsolve.models.scalar import Regime
from homsolve.models.system import StateVector
from homsolve.schemas.system import ScalarDoc, SystemDoc
from homsolve.services.constraints import Certificate, SolvableInstance
from homsolve.services.harness import VerificationReport


class InitDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    z0: List[ScalarDoc] = Field(..., min_length=1)

    def to_domain(self, regime: Regime) -> StateVector:
        return StateVector(tuple(z.to_domain(regime) for z in self.z0), 0)

    @classmethod
    def from_domain(cls, z0: StateVector) -> "InitDoc":
        return cls(z0=[ScalarDoc.from_domain(z) for z in z0])


class CertificateDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_residual: float
    mode: str


class InstanceDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    system: SystemDoc
    z0: List[ScalarDoc] = Field(..., min_length=1)
    Z: ScalarDoc
    certificate: CertificateDoc

    def to_domain(self) -> SolvableInstance:
        system = self.system.to_domain()
        z0 = StateVector(tuple(z.to_domain(system.regime) for z in self.z0), 0)
        return SolvableInstance(
            system=system,
            z0=z0,
            Z=self.Z.to_domain(system.regime),
            certificate=Certificate(self.certificate.max_residual, self.certificate.mode),
        )

    @classmethod
    def from_domain(cls, instance: SolvableInstance) -> "InstanceDoc":
        return cls(
            system=SystemDoc.from_domain(instance.system),
            z0=[ScalarDoc.from_domain(z) for z in instance.z0],
            Z=ScalarDoc.from_domain(instance.Z),
            certificate=CertificateDoc(
                max_residual=instance.certificate.max_residual,
                mode=instance.certificate.mode,
            ),
        )


class StepDeviationDoc(BaseModel):
    step: int
    max_abs: float
    max_rel: float


class ReportDoc(BaseModel):
    horizon_requested: int
    horizon_achieved: int
    regime: str
    verdict: str
    steps: List[StepDeviationDoc]
    truncated_at: Optional[int] = None
    truncation_reason: Optional[str] = None
    first_mismatch: Optional[Tuple[int, int]] = None
    degenerate: bool = False

    @classmethod
    def from_domain(cls, report: VerificationReport) -> "ReportDoc":
        return cls(
            horizon_requested=report.horizon_requested,
            horizon_achieved=report.horizon_achieved,
            regime=report.regime.value,
            verdict=report.verdict.value,
            steps=[StepDeviationDoc(step=d.step, max_abs=d.max_abs, max_rel=d.max_rel) for d in report.steps],
            truncated_at=report.truncated_at,
            truncation_reason=report.truncation_reason.value if report.truncation_reason else None,
            first_mismatch=report.first_mismatch,
            degenerate=report.degenerate,
        )
