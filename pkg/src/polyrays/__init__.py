"""External rays, critical portraits, and parameter-ray landing for
polynomials with escaping critical orbits."""

from .angles import (
    Angle,
    CriticalPortrait,
    OrbitSummary,
    PortraitBlock,
    PortraitClass,
    PortraitReport,
    ValidationReport,
    angle_orbit,
    angle_times_d,
    blocks_unlinked,
    classify_portrait,
    enumerate_portraits,
    quadratic_portrait,
    validate_portrait,
)
from .errors import (
    AngleResolutionError,
    BranchAmbiguityError,
    BranchCollisionError,
    CapExceededError,
    ContinuationStallError,
    DegenerateAnnulusError,
    DomainError,
    LevelBelowCriticalError,
    MultiplicityCollisionError,
    NewtonDivergenceError,
    NonEscapingPointError,
    NotInShiftLocusError,
    NumericError,
    OriginInRegionError,
    PolyraysError,
    RootFindingError,
    SharedAngleError,
)
from .geometry import (
    AnalyticMap,
    AnnulusSpec,
    CirclePair,
    Disk,
    DiskTriple,
    LevelStats,
    NestedDiskSystem,
    NestedReport,
    NestedViolation,
    PreimageComponent,
    Region,
    RoundConcentric,
    ScatterEntry,
    ScatterReport,
    StabilityReport,
    area_rho_star,
    backward_stability_probe,
    disk_region,
    modulus,
    preimage_components,
    shape,
    standard_test_maps,
    validate_m_nested,
    validate_scattered,
)
from .poly import (
    CriticalPoint,
    CriticalSet,
    MonicPolynomial,
    PointOrbit,
    critical_points,
    critical_values,
    default_escape_radius,
    orbit,
)
from .potential import (
    BottcherValue,
    EquipotentialSample,
    PotentialSample,
    bottcher,
    critical_value_rates,
    equipotential,
    green,
    green_gradient,
    log_bottcher,
    max_critical_rate,
)
from .rays import (
    Bifurcated,
    Landed,
    RayPath,
    RaySample,
    StepControl,
    Truncated,
    landing_point,
    ray_point,
    trace_ray,
)
from .shiftlocus import (
    LandingDiagnostics,
    ParamRayPoint,
    continue_param_ray,
    initial_guess,
    landing_probe,
    portrait_of,
    solve_f_r,
)

__all__ = [
    "AnalyticMap",
    "Angle",
    "AngleResolutionError",
    "AnnulusSpec",
    "Bifurcated",
    "BottcherValue",
    "BranchAmbiguityError",
    "BranchCollisionError",
    "CapExceededError",
    "CirclePair",
    "ContinuationStallError",
    "CriticalPoint",
    "CriticalPortrait",
    "CriticalSet",
    "DegenerateAnnulusError",
    "Disk",
    "DiskTriple",
    "DomainError",
    "EquipotentialSample",
    "Landed",
    "LandingDiagnostics",
    "LevelBelowCriticalError",
    "LevelStats",
    "MonicPolynomial",
    "MultiplicityCollisionError",
    "NestedDiskSystem",
    "NestedReport",
    "NestedViolation",
    "NewtonDivergenceError",
    "NonEscapingPointError",
    "NotInShiftLocusError",
    "NumericError",
    "OrbitSummary",
    "OriginInRegionError",
    "ParamRayPoint",
    "PointOrbit",
    "PolyraysError",
    "PortraitBlock",
    "PortraitClass",
    "PortraitReport",
    "PotentialSample",
    "PreimageComponent",
    "RayPath",
    "RaySample",
    "Region",
    "RootFindingError",
    "RoundConcentric",
    "ScatterEntry",
    "ScatterReport",
    "SharedAngleError",
    "StabilityReport",
    "StepControl",
    "Truncated",
    "ValidationReport",
    "angle_orbit",
    "angle_times_d",
    "area_rho_star",
    "backward_stability_probe",
    "blocks_unlinked",
    "bottcher",
    "classify_portrait",
    "continue_param_ray",
    "critical_points",
    "critical_value_rates",
    "critical_values",
    "default_escape_radius",
    "disk_region",
    "enumerate_portraits",
    "equipotential",
    "green",
    "green_gradient",
    "initial_guess",
    "landing_point",
    "landing_probe",
    "log_bottcher",
    "max_critical_rate",
    "modulus",
    "orbit",
    "portrait_of",
    "preimage_components",
    "quadratic_portrait",
    "ray_point",
    "shape",
    "solve_f_r",
    "standard_test_maps",
    "trace_ray",
    "validate_m_nested",
    "validate_portrait",
    "validate_scattered",
]

__version__ = "0.1.0"
