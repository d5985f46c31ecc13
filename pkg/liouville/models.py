"""Data models for liouville.

This module defines the core data structures used throughout the package:
- DomainSpec / ConformalMap: planar domains and their conformal self-maps
- SpectralGFF / CircleAverageEvaluator: truncated Gaussian Free Field samples
- BrownianPath: a stopped, discretised planar Brownian trajectory
- ClockProcess / LBMTrajectory: the Liouville clock and its time change
- AuxFieldKernel / MomentEstimate: the exact-scaling auxiliary field
- ThickScale / ThickPointCover / CoverDimension: thick-point covers
- ConformalCheckReport: rotation-invariance test outcome
- ExperimentConfig: a fully resolved CLI run
"""

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from liouville.errors import ValidationError


class DomainKind(str, Enum):
    """Supported simulation domains."""
    UNIT_SQUARE = "square"
    UNIT_DISC = "disc"


class MapKind(str, Enum):
    DISC_AUTOMORPHISM = "disc-automorphism"
    AFFINE = "affine"


class Direction(str, Enum):
    FORWARD = "forward"
    INVERSE = "inverse"


class VarianceMode(str, Enum):
    """How Var h_eps(B_s) enters the clock integrand.

    ANALYTIC_MODE_SUM uses the exact variance of the truncated field,
    CONFORMAL_RADIUS_FORMULA uses -log eps + log R(B_s; D) and
    NORMALIZED uses -log eps alone (the normalised field h-bar).
    """
    ANALYTIC_MODE_SUM = "analytic"
    CONFORMAL_RADIUS_FORMULA = "conformal-radius"
    NORMALIZED = "normalized"


class Command(str, Enum):
    FIELD_STATS = "field-stats"
    CLOCK_MEAN = "clock-mean"
    CONVERGE = "converge"
    POSITIVITY = "positivity"
    CONFORMAL_CHECK = "conformal-check"
    THICK_DIM = "thick-dim"
    KPZ_TABLE = "kpz-table"
    MOMENTS = "moments"
    PAIR_COUNT = "pair-count"


@dataclass(frozen=True)
class DomainSpec:
    """The simulation domain D and its stopping margin.

    Attributes:
        kind: Unit square [0, 1]^2 or unit disc
        inner_margin: Distance to the boundary at which paths are stopped
        grid_n: Lattice resolution per side for grid exports
    """
    kind: DomainKind = DomainKind.UNIT_SQUARE
    inner_margin: float = 0.1
    grid_n: int = 64

    def __post_init__(self) -> None:
        if not 0.0 < self.inner_margin < 0.5:
            raise ValidationError(f"inner_margin must lie in (0, 1/2), got {self.inner_margin}")
        if self.grid_n < 16:
            raise ValidationError(f"grid_n must be at least 16, got {self.grid_n}")

    @classmethod
    def square(cls, inner_margin: float = 0.1, grid_n: int = 64) -> "DomainSpec":
        return cls(DomainKind.UNIT_SQUARE, inner_margin, grid_n)

    @classmethod
    def disc(cls, inner_margin: float = 0.1, grid_n: int = 64) -> "DomainSpec":
        return cls(DomainKind.UNIT_DISC, inner_margin, grid_n)


@dataclass(frozen=True)
class ConformalMap:
    """A conformal self-map of the disc or an affine map of the plane.

    DiscAutomorphism: z -> e^{i theta} (z - a) / (1 - conj(a) z)
    Affine:           z -> scale e^{i rotation} z + translation
    """
    kind: MapKind
    a: complex = 0j
    theta: float = 0.0
    scale: float = 1.0
    rotation: float = 0.0
    translation: complex = 0j

    def __post_init__(self) -> None:
        if self.kind is MapKind.DISC_AUTOMORPHISM and abs(self.a) >= 1.0:
            raise ValidationError(f"disc automorphism needs |a| < 1, got {self.a}")
        if self.kind is MapKind.AFFINE and self.scale <= 0.0:
            raise ValidationError(f"affine scale must be positive, got {self.scale}")

    @classmethod
    def disc_automorphism(cls, a: complex = 0j, theta: float = 0.0) -> "ConformalMap":
        return cls(MapKind.DISC_AUTOMORPHISM, a=complex(a), theta=float(theta))

    @classmethod
    def affine(cls, scale: float = 1.0, rotation: float = 0.0,
               translation: complex = 0j) -> "ConformalMap":
        return cls(MapKind.AFFINE, scale=float(scale), rotation=float(rotation),
                   translation=complex(translation))

    @classmethod
    def rotation_by(cls, theta: float) -> "ConformalMap":
        return cls.disc_automorphism(0j, theta)

    @property
    def is_rotation(self) -> bool:
        """True for maps with |phi'| identically 1 that fix the origin."""
        if self.kind is MapKind.DISC_AUTOMORPHISM:
            return self.a == 0
        return self.scale == 1.0 and self.translation == 0


@dataclass(frozen=True, eq=False)
class SpectralGFF:
    """Truncated eigen-expansion of the Gaussian Free Field on the unit square.

    h = sum_i coeff_i e_i with e_mn(x, y) = 2 sin(m pi x) sin(n pi y) and
    coeff_i = X_i sqrt(2 pi / lambda_i). Modes are sorted by eigenvalue.

    Attributes:
        domain: Domain the field was sampled on (always the unit square)
        m: First mode index per mode
        n: Second mode index per mode
        coeff: Mode coefficients
        seed: Root seed of the sampling stream
        replicate: Replicate index of the sampling stream
    """
    domain: DomainSpec
    m: np.ndarray
    n: np.ndarray
    coeff: np.ndarray
    seed: int = 0
    replicate: int = 0

    @property
    def n_modes(self) -> int:
        return int(self.coeff.size)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.pi ** 2 * (self.m.astype(float) ** 2 + self.n.astype(float) ** 2)


@dataclass(frozen=True, eq=False)
class CircleAverageEvaluator:
    """Read-only evaluator of h_eps at points of a domain.

    Attributes:
        field: The sampled field
        epsilon: Circle radius in domain units
        domain: Domain whose points are evaluated (may differ from the
            field's own square, see geometry.to_field_coordinates)
        attenuation: J0(sqrt(lambda) * host radius) per mode
        table: coeff * attenuation scattered on the (m, n) index grid
    """
    field: SpectralGFF
    epsilon: float
    domain: DomainSpec
    attenuation: np.ndarray
    table: np.ndarray


@dataclass(frozen=True, eq=False)
class BrownianPath:
    """Planar Brownian path sampled at times i * dt and stopped at T_r.

    Attributes:
        start: Starting point
        dt: Time step
        positions: Complex positions B(i dt), i = 0..stop_index
        stop_index: First index within the margin, or n_steps
        n_steps: Number of steps requested (max_time / dt)
        seed: Root seed of the path stream
        replicate: Replicate index of the path stream
        domain: Stopping domain, None for free planar motion
    """
    start: complex
    dt: float
    positions: np.ndarray
    stop_index: int
    n_steps: int
    seed: int = 0
    replicate: int = 0
    domain: Optional[DomainSpec] = None

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.stop_index + 1)

    @property
    def duration(self) -> float:
        """Euclidean time covered by the stored positions."""
        return self.stop_index * self.dt

    @property
    def stopped(self) -> bool:
        """True when the margin was reached before max_time."""
        return self.stop_index < self.n_steps


@dataclass(frozen=True, eq=False)
class ClockProcess:
    """Sampled Liouville clock mu_eps(i dt) along a path.

    Attributes:
        path: Underlying Brownian path
        gamma: Coupling constant in [0, 2)
        k: Dyadic level, epsilon = 2**-k
        values: Nondecreasing clock values with values[0] = 0
        variance_mode: Variance convention used in the integrand
    """
    path: BrownianPath
    gamma: float
    k: int
    values: np.ndarray
    variance_mode: VarianceMode = VarianceMode.ANALYTIC_MODE_SUM

    @property
    def epsilon(self) -> float:
        return 2.0 ** -self.k

    @property
    def times(self) -> np.ndarray:
        return self.path.times

    @property
    def total(self) -> float:
        """Quantum time accumulated up to the stopping index."""
        return float(self.values[-1])


@dataclass(frozen=True, eq=False)
class LBMTrajectory:
    """Liouville Brownian motion sampled on a quantum-time grid.

    Attributes:
        quantum_dt: Quantum time step
        points: Z_eps(j quantum_dt)
        euclidean_times: mu_eps^{-1}(j quantum_dt)
        total_quantum_time: mu_eps at the stopping index
    """
    quantum_dt: float
    points: np.ndarray
    euclidean_times: np.ndarray
    total_quantum_time: float


@dataclass(frozen=True)
class AuxFieldKernel:
    """Exact-scaling covariance c_eps with bump phi(x) = sqrt((1 - x)_+).

    Attributes:
        epsilon: Scale parameter (sigma_eps formula needs epsilon <= 1)
    """
    epsilon: float

    def __post_init__(self) -> None:
        if self.epsilon <= 0.0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def sigma_sq(self) -> float:
        """c_eps(0, 0) = -log eps + phi(0) = -log eps + 1."""
        return -math.log(self.epsilon) + 1.0


@dataclass
class MomentEstimate:
    """Monte-Carlo estimate of f_eps(z) with its checkerboard split.

    Attributes:
        q: Moment order in (1, 2)
        gamma: Coupling constant
        epsilon: Auxiliary field scale
        m: Checkerboard depth (squares of side 2**-m)
        value: Mean of the q-th power of the occupation integral
        stderr: Standard error of value
        n_replicates: Number of replicates
        diagonal: Mean same-square contribution
        cross: Mean different-square contribution
        seed: Root seed
    """
    q: float
    gamma: float
    epsilon: float
    m: int
    value: float
    stderr: float
    n_replicates: int
    diagonal: float = 0.0
    cross: float = 0.0
    seed: int = 0

    @property
    def diagonal_share(self) -> float:
        total = self.diagonal + self.cross
        return self.diagonal / total if total > 0 else 0.0

    @property
    def cross_share(self) -> float:
        total = self.diagonal + self.cross
        return self.cross / total if total > 0 else 0.0

    def to_report(self) -> Dict[str, float]:
        return {
            "gamma": self.gamma,
            "q": self.q,
            "epsilon": self.epsilon,
            "m": self.m,
            "estimate": self.value,
            "stderr": self.stderr,
            "diagonal_share": self.diagonal_share,
            "cross_share": self.cross_share,
            "n_replicates": self.n_replicates,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class ThickScale:
    """One scale r_n of a thick-point cover.

    Attributes:
        n: Scale index
        radius: r_n = n**-K
        net_size: Net times evaluated (inside the covered prefix)
        selected: Selected net indices j (the set I_n)
        field_values: h_{r_n}(B(t_nj)) for the selected j
        intervals: Quantum-time intervals, shape (len(selected), 2)
        dropped: Net times skipped because the circle left the domain
        expected_selected: Sum over the tested net points of
            P(N(0, Var h_{r_n}) >= threshold), the Gaussian-tail mean of |I_n|
    """
    n: int
    radius: float
    net_size: int
    selected: np.ndarray
    field_values: np.ndarray
    intervals: np.ndarray
    dropped: int = 0
    expected_selected: float = 0.0

    @property
    def diameters(self) -> np.ndarray:
        return self.intervals[:, 1] - self.intervals[:, 0]


@dataclass(frozen=True, eq=False)
class ThickPointCover:
    """Covering of the times spent near alpha-thick points.

    Attributes:
        alpha: Thickness level
        gamma: Coupling constant of the clock
        delta: Threshold slack
        eta: Exponent slack
        exponent: K in r_n = n**-K
        scales: Admissible scales in increasing n
        skipped_scales: Scale indices dropped because r_n**2 < dt
        partial_coverage: True when the path stopped before the horizon
    """
    alpha: float
    gamma: float
    delta: float
    eta: float
    exponent: float
    scales: List[ThickScale] = field(default_factory=list)
    skipped_scales: List[int] = field(default_factory=list)
    partial_coverage: bool = False

    def diameters(self) -> np.ndarray:
        if not self.scales:
            return np.empty(0)
        return np.concatenate([scale.diameters for scale in self.scales])


@dataclass
class CoverDimension:
    """Result of a cover-sum dimension estimate."""
    value: float
    empty: bool
    sums: Dict[float, float] = field(default_factory=dict)


@dataclass
class ConformalCheckReport:
    """Two-sample comparison of total clocks under a rotation."""
    theta: float
    gamma: float
    q_value: float
    statistic: float
    pvalue: float
    reject: bool
    direct: np.ndarray
    rotated: np.ndarray


@dataclass
class ExperimentConfig:
    """Fully resolved configuration of one CLI run.

    Every field is flat so the manifest can be fed back via --config.
    """
    command: Command
    seed: int = 1
    gamma: float = 1.0
    gammas: List[float] = field(default_factory=lambda: [0.5, 1.0, 1.5])
    k: int = 5
    k_min: int = 3
    k_max: int = 7
    n_modes: int = 512 ** 2
    dt: Optional[float] = None
    margin: float = 0.1
    n_replicates: int = 20
    domain: str = "square"
    grid_n: int = 64
    output_dir: str = "runs"
    start: List[float] = field(default_factory=lambda: [0.5, 0.5])
    horizon: float = 0.05
    max_time: float = 1.0
    variance_mode: str = "analytic"
    alpha: float = 1.3
    delta: float = 0.05
    eta: float = 0.5
    n_range: List[int] = field(default_factory=lambda: [2, 3, 4, 5, 6])
    q_grid: List[float] = field(default_factory=lambda: [0.05 * i for i in range(1, 21)])
    threshold: float = 1.0
    q: float = 1.2
    m: int = 2
    epsilons: List[float] = field(default_factory=lambda: [0.125, 0.0625])
    theta: List[float] = field(default_factory=lambda: [math.pi / 3, math.pi / 2])
    d0: List[float] = field(default_factory=lambda: [0.25 * i for i in range(9)])
    ks: List[int] = field(default_factory=lambda: [4, 5, 6, 7])
    n_offsets: int = 4
    resolution: float = 2.0 ** -6
    max_points: int = 2000
    shared_seeds: bool = False
    export_series: bool = False
    export_grid: bool = False

    def to_dict(self) -> Dict[str, object]:
        data = asdict(self)
        data["command"] = self.command.value
        return data

    def start_point(self) -> complex:
        return complex(self.start[0], self.start[1])

    def domain_spec(self) -> DomainSpec:
        return DomainSpec(DomainKind(self.domain), self.margin, self.grid_n)
