from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

Grading = Literal["linear", "log", "composite"]


class RadialGrid(BaseModel):
    """Composite Gauss–Legendre panels on [rho_min, rho_max]."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    nodes: np.ndarray
    weights: np.ndarray
    breakpoints: np.ndarray  # panel edges, len = panels + 1
    panel_order: int
    grading: Grading

    @model_validator(mode="after")
    def _check(self):
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ValueError("radial nodes and weights must be 1-D arrays of equal length")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("radial nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("radial weights must be positive")
        if len(self.nodes) != (len(self.breakpoints) - 1) * self.panel_order:
            raise ValueError("node count does not match panels × panel order")
        return self

    @property
    def rho_min(self) -> float:
        return float(self.breakpoints[0])

    @property
    def rho_max(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def size(self) -> int:
        return len(self.nodes)

    def panel_of(self) -> np.ndarray:
        """Panel index of every node."""
        return np.repeat(np.arange(len(self.breakpoints) - 1), self.panel_order)

    def panel_widths(self) -> np.ndarray:
        """Width of the panel that contains each node."""
        return np.diff(self.breakpoints)[self.panel_of()]


class SphereGrid(BaseModel):
    """Quadrature on S^{n−1}; weights sum to the unnormalized surface area."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    level: int
    points: np.ndarray  # (J, n) unit vectors
    weights: np.ndarray  # (J,)
    # Structured coordinates: n=2 angle φ_j; n=3 (cos θ, φ) index layout
    polar_nodes: Optional[np.ndarray] = None
    azimuth_count: int = 0

    @model_validator(mode="after")
    def _check(self):
        if self.points.ndim != 2 or self.points.shape[1] != self.n:
            raise ValueError(f"sphere points must have shape (J, {self.n})")
        if self.points.shape[0] != self.weights.shape[0]:
            raise ValueError("sphere points and weights differ in length")
        if np.max(np.abs(np.linalg.norm(self.points, axis=1) - 1.0)) > 1e-14:
            raise ValueError("sphere points must be unit vectors")
        return self

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def area(self) -> float:
        return float(np.sum(self.weights))

    @property
    def degree(self) -> int:
        """Polynomial degree integrated exactly."""
        return self.level


class GridField(BaseModel):
    """Samples of a d-component field on the product grid, values[d, i_radial, j_sphere]."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    radial: RadialGrid
    sphere: SphereGrid
    values: np.ndarray

    @model_validator(mode="after")
    def _check(self):
        if self.values.ndim == 2:
            self.values = self.values[None, :, :]
        expected = (self.radial.size, self.sphere.size)
        if self.values.ndim != 3 or self.values.shape[1:] != expected:
            raise ValueError(f"field values must have shape (d, {expected[0]}, {expected[1]}), "
                             f"got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")
        return self

    @property
    def components(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.sphere.n

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean norm over components, shape (radial, sphere)."""
        if self.components == 1:
            return np.abs(self.values[0])
        return np.sqrt(np.sum(self.values ** 2, axis=0))

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(radial=self.radial, sphere=self.sphere, values=values)

    def points(self) -> np.ndarray:
        """Cartesian coordinates of every node, shape (radial, sphere, n)."""
        return self.radial.nodes[:, None, None] * self.sphere.points[None, :, :]


class SpectralField(BaseModel):
    """Real vector field on the periodic box [0, L)^3 sampled on N^3 points, values[d, i, j, k]."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    length: float
    values: np.ndarray
    # Weights |x − center|^α are measured from here (min-image distance)
    center: Optional[tuple[float, float, float]] = None

    @model_validator(mode="after")
    def _check(self):
        if self.values.ndim == 3:
            self.values = self.values[None]
        if self.values.ndim != 4 or len(set(self.values.shape[1:])) != 1:
            raise ValueError(f"spectral field must have shape (d, N, N, N), got {self.values.shape}")
        if np.iscomplexobj(self.values):
            raise ValueError("spectral field samples must be real")
        if self.center is None:
            half = self.length / 2.0
            self.center = (half, half, half)
        return self

    @property
    def resolution(self) -> int:
        return self.values.shape[1]

    @property
    def components(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return self.length / self.resolution

    def spectrum(self) -> np.ndarray:
        """Fourier coefficients over the three spatial axes."""
        return np.fft.fftn(self.values, axes=(1, 2, 3))

    @classmethod
    def from_spectrum(cls, spectrum: np.ndarray, length: float, center=None) -> "SpectralField":
        values = np.fft.ifftn(spectrum, axes=(1, 2, 3)).real
        return cls(length=length, values=values, center=center)

    def with_values(self, values: np.ndarray) -> "SpectralField":
        return SpectralField(length=self.length, values=values, center=self.center)

    def coordinates(self) -> np.ndarray:
        """Node coordinates along one axis."""
        return np.arange(self.resolution) * self.spacing
