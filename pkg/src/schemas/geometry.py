import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class PortGrid(BaseModel):
    """Uniform 2-D fluid-antenna port grid; apertures are in wavelengths."""

    model_config = ConfigDict(frozen=True)

    n1: int = Field(1, ge=1, description="Ports along axis 1")
    n2: int = Field(1, ge=1, description="Ports along axis 2")
    w1: float = Field(0.0, ge=0.0, description="Aperture along axis 1 (wavelengths)")
    w2: float = Field(0.0, ge=0.0, description="Aperture along axis 2 (wavelengths)")

    @property
    def n_ports(self) -> int:
        return self.n1 * self.n2

    @property
    def label(self) -> str:
        return f"{self.n1}x{self.n2}-w{self.w1:g}x{self.w2:g}"


class CorrelationMatrix(BaseModel):
    """Symmetric unit-diagonal port correlation with its Cholesky factor.

    ``chol @ chol.T == entries + jitter * I``. Arrays are read-only.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    entries: np.ndarray
    chol: np.ndarray
    jitter: float = 0.0
    kernel: str = "spherical"

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @property
    def regularized(self) -> np.ndarray:
        return self.entries + self.jitter * np.eye(self.dim)
