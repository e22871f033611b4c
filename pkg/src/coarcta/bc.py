"""Mass-flow boundary conditions from velocity profiles.

Peak-snapshot values are taken at the instant of peak inlet flow and the
inlet is replaced by the exact sum of the outlet flows so every set
conserves mass. Four outlet configurations are supported:

======  =========  ==========================  ==========================
type    inlet      arch branches               descending aorta
======  =========  ==========================  ==========================
BC1     mass flow  zero pressure               zero pressure
BC2     mass flow  mass flow                   zero pressure
BC3     mass flow  zero pressure + target flow zero pressure + target flow
BC4     mass flow  mass flow                   zero pressure + target flow
======  =========  ==========================  ==========================
"""
import math
import re
from dataclasses import dataclass, field

import numpy as np
import yaml

from coarcta.domain import BOUNDARY_VESSELS, INLET, OUTLETS, VesselId, as_vessel
from coarcta.errors import (
    BoundaryConditionError,
    ConfigError,
    GridMismatchError,
    ParseError,
    UndefinedDeviationError,
)

MASS_FLOW = "mass_flow"
ZERO_PRESSURE = "zero_pressure"
ZERO_PRESSURE_TARGET = "zero_pressure_target_mass_flow"
KINDS = (MASS_FLOW, ZERO_PRESSURE, ZERO_PRESSURE_TARGET)
UNITS = {MASS_FLOW: "kg/s", ZERO_PRESSURE: "Pa", ZERO_PRESSURE_TARGET: "kg/s"}
VALUED_KINDS = (MASS_FLOW, ZERO_PRESSURE_TARGET)

BC_TYPES = ("BC1", "BC2", "BC3", "BC4")
# (arch branch kind, descending aorta kind); the inlet is always mass flow
BC_TABLE = {
    "BC1": (ZERO_PRESSURE, ZERO_PRESSURE),
    "BC2": (MASS_FLOW, ZERO_PRESSURE),
    "BC3": (ZERO_PRESSURE_TARGET, ZERO_PRESSURE_TARGET),
    "BC4": (MASS_FLOW, ZERO_PRESSURE_TARGET),
}

FILE_MAGIC = "#coarcta-bc"
FILE_VERSION = "v1"
NOT_ADJUSTED = "not_adjusted"


@dataclass(frozen=True)
class FluidProperties:
    density: float = 1060.0  # kg/m^3
    viscosity: float = 0.004  # kg/(m s); export metadata only

    def __post_init__(self):
        if not self.density > 0:
            raise ConfigError("density must be positive")
        if not self.viscosity >= 0:
            raise ConfigError("viscosity must be non-negative")


# Synthetic placeholder geometry (paediatric-sized circular sections), for
# tests and demos only. Real studies must supply segmented areas.
PLACEHOLDER_DIAMETERS_MM = {
    VesselId.ASCENDING_AORTA: 14.0,
    VesselId.INNOMINATE_ARTERY: 7.0,
    VesselId.LEFT_COMMON_CAROTID: 5.0,
    VesselId.LEFT_SUBCLAVIAN: 5.5,
    VesselId.COARCTATION: 5.8,
    VesselId.DESCENDING_AORTA: 10.0,
}
PLACEHOLDER_THROAT_DIAMETER_MM = 5.8


def _circle_area(d_mm):
    return math.pi * (d_mm * 1e-3) ** 2 / 4.0


@dataclass(frozen=True)
class VesselGeometry:
    areas: dict  # VesselId -> m^2
    coarctation_throat_area: float  # m^2

    def __post_init__(self):
        areas = {as_vessel(k): float(v) for k, v in self.areas.items()}
        for vessel, a in areas.items():
            if not a > 0:
                raise ConfigError(f"area of {vessel} must be positive")
        if not self.coarctation_throat_area > 0:
            raise ConfigError("coarctation_throat_area_m2 must be positive")
        aao = areas.get(VesselId.ASCENDING_AORTA)
        if aao is not None and not self.coarctation_throat_area < aao:
            raise ConfigError("coarctation throat area must be smaller than the ascending aorta area")
        object.__setattr__(self, "areas", areas)
        object.__setattr__(self, "coarctation_throat_area", float(self.coarctation_throat_area))

    def area(self, vessel):
        vessel = as_vessel(vessel)
        try:
            return self.areas[vessel]
        except KeyError:
            raise ConfigError(f"no area configured for vessel {vessel}") from None

    @classmethod
    def placeholder(cls):
        return cls(
            {v: _circle_area(d) for v, d in PLACEHOLDER_DIAMETERS_MM.items()},
            _circle_area(PLACEHOLDER_THROAT_DIAMETER_MM),
        )

    def to_dict(self):
        d = {v.value: a for v, a in self.areas.items()}
        d["coarctation_throat_area_m2"] = self.coarctation_throat_area
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "coarctation_throat_area_m2" not in d:
            raise ConfigError("geometry is missing coarctation_throat_area_m2")
        throat = d.pop("coarctation_throat_area_m2")
        areas = {}
        for key, value in d.items():
            try:
                areas[as_vessel(key)] = float(value)
            except (ValueError, TypeError):
                raise ConfigError(f"geometry key {key!r} is not a vessel name with a numeric area") from None
        return cls(areas, float(throat))

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: geometry must be a mapping of vessel -> area")
        return cls.from_dict(data)

    def dump(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=False)


@dataclass(frozen=True)
class MassFlowProfile:
    times: np.ndarray
    mass_flow: np.ndarray
    vessel: VesselId

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        m = np.asarray(self.mass_flow, dtype=np.float64)
        if t.shape != m.shape:
            raise ValueError("times and mass_flow differ in length")
        if np.any(m < 0):
            raise ValueError("mass flow must be non-negative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "mass_flow", m)
        object.__setattr__(self, "vessel", as_vessel(self.vessel))

    def __eq__(self, other):
        if not isinstance(other, MassFlowProfile):
            return NotImplemented
        return (self.vessel == other.vessel and np.array_equal(self.times, other.times)
                and np.array_equal(self.mass_flow, other.mass_flow))

    __hash__ = None


def velocity_to_massflow(trace, geometry, fluid=FluidProperties()):
    """Plug-flow mass flow rate: density * area * velocity."""
    area = geometry.area(trace.vessel)
    return MassFlowProfile(trace.times.copy(), fluid.density * area * np.asarray(trace.velocities), trace.vessel)


@dataclass(frozen=True)
class PeakSnapshot:
    t_peak: float
    index: int
    values: dict  # VesselId -> kg/s


def peak_snapshot(inlet, all_profiles):
    """Every profile's flow at the time of peak inlet flow (earliest on ties)."""
    i = int(np.argmax(inlet.mass_flow))
    values = {}
    for prof in all_profiles:
        if prof.times.shape != inlet.times.shape or not np.array_equal(prof.times, inlet.times):
            raise GridMismatchError(f"{prof.vessel} profile is not on the inlet time grid")
        values[prof.vessel] = float(prof.mass_flow[i])
    return PeakSnapshot(float(inlet.times[i]), i, values)


def enforce_continuity(outlet_values):
    """Inlet flow equal to the (correctly rounded, order independent) outlet sum."""
    values = list(outlet_values.values()) if isinstance(outlet_values, dict) else list(outlet_values)
    if len(values) != len(OUTLETS):
        raise BoundaryConditionError(f"expected {len(OUTLETS)} outlet values, got {len(values)}")
    for v in values:
        if not v >= 0:
            raise BoundaryConditionError(f"negative outlet mass flow {v}")
    return math.fsum(values)


def continuity_profile(outlet_profiles):
    """Pointwise inlet profile as the exact sum of outlet profiles."""
    profiles = [outlet_profiles[v] for v in OUTLETS]
    times = profiles[0].times
    for p in profiles[1:]:
        if not np.array_equal(p.times, times):
            raise GridMismatchError(f"{p.vessel} profile is not on the common time grid")
    stacked = np.stack([p.mass_flow for p in profiles])
    summed = np.array([math.fsum(col) for col in stacked.T])
    return MassFlowProfile(times, summed, INLET)


@dataclass(frozen=True)
class Boundary:
    vessel: VesselId
    kind: str
    value: float = None  # kg/s where the kind carries one

    @property
    def units(self):
        return UNITS[self.kind]


@dataclass(frozen=True)
class BoundaryConditionSet:
    bc_type: str
    inlet: Boundary
    outlets: tuple
    provenance: str
    # peak flows of all boundary vessels, kept so zero-pressure outlets can be
    # resolved by continuity; not written to BC files
    reference_flows: dict = field(default=None, compare=False)

    @property
    def boundaries(self):
        return (self.inlet,) + tuple(self.outlets)

    def outlet(self, vessel):
        vessel = as_vessel(vessel)
        for b in self.outlets:
            if b.vessel == vessel:
                return b
        raise KeyError(vessel)

    def numeric_values(self):
        return {b.vessel: b.value for b in self.boundaries if b.value is not None}


def _check_provenance(name):
    if not name or re.search(r"\s", name):
        raise BoundaryConditionError(f"provenance must be a non-empty token without whitespace, got {name!r}")


def assemble_bc_set(bc_type, peak_values, provenance):
    """Boundary set of the given type from continuity-corrected peak flows.

    ``peak_values`` maps every boundary vessel (inlet and four outlets) to kg/s.
    """
    if bc_type not in BC_TABLE:
        raise BoundaryConditionError(f"unknown bc_type {bc_type!r}; choose from {BC_TYPES}")
    _check_provenance(provenance)
    values = {as_vessel(k): float(v) for k, v in peak_values.items()}
    missing = [v.value for v in BOUNDARY_VESSELS if v not in values]
    if missing:
        raise BoundaryConditionError(f"missing peak values for {missing}")
    arch_kind, dao_kind = BC_TABLE[bc_type]
    outlets = []
    for vessel in OUTLETS:
        kind = dao_kind if vessel == VesselId.DESCENDING_AORTA else arch_kind
        outlets.append(Boundary(vessel, kind, values[vessel] if kind in VALUED_KINDS else None))
    inlet = Boundary(INLET, MASS_FLOW, values[INLET])
    return BoundaryConditionSet(bc_type, inlet, tuple(outlets), provenance,
                                {v: values[v] for v in BOUNDARY_VESSELS})


def build_bc_sets(peak_values, provenance):
    """All four set types after replacing the inlet by the outlet sum."""
    corrected = {as_vessel(k): float(v) for k, v in peak_values.items()}
    corrected[INLET] = enforce_continuity([corrected[v] for v in OUTLETS])
    return {t: assemble_bc_set(t, corrected, provenance) for t in BC_TYPES}


def bc_deviation_stats(bc_sets, vessels=BOUNDARY_VESSELS):
    """Mean absolute deviation from the cross-set mean, in percent of that mean, per vessel.

    Only vessels with a numeric value in at least two sets are reported.
    """
    out = {}
    for vessel in vessels:
        vals = [s.numeric_values()[vessel] for s in bc_sets if vessel in s.numeric_values()]
        if len(vals) < 2:
            continue
        arr = np.array(vals)
        mean = arr.mean()
        if mean == 0:
            raise UndefinedDeviationError(f"mean {vessel} flow is zero; percent deviation undefined")
        if arr.min() == arr.max():
            out[vessel] = 0.0  # the rounded mean need not equal the common value
        else:
            out[vessel] = float(100.0 * np.mean(np.abs(arr - mean)) / abs(mean))
    if not out:
        raise BoundaryConditionError("need at least 2 sets with numeric values for some vessel")
    return out


# -- BC file format --------------------------------------------------------

def export_bc(bc_set, mode="snapshot", profiles=None):
    """Render a BC set as text.

    Snapshot files carry one ``value`` line per valued boundary. Transient
    files also carry ``point`` rows of the full mass-flow time series for
    every valued boundary; ``profiles`` maps vessel -> MassFlowProfile.
    """
    if mode not in ("snapshot", "transient"):
        raise BoundaryConditionError(f"unknown export mode {mode!r}")
    if mode == "transient" and profiles is None:
        raise BoundaryConditionError("transient export requires mass-flow profiles")
    _check_provenance(bc_set.provenance)
    lines = [f"{FILE_MAGIC} {FILE_VERSION} {bc_set.bc_type} {bc_set.provenance}"]
    for b in bc_set.boundaries:
        lines.append(f"boundary,{b.vessel.value},{b.kind},{b.units}")
    for b in bc_set.boundaries:
        if b.value is not None:
            lines.append(f"value,{b.vessel.value},{b.value!r}")
    if mode == "transient":
        profiles = {as_vessel(k): v for k, v in profiles.items()}
        for b in bc_set.boundaries:
            if b.value is None:
                continue
            if b.vessel not in profiles:
                raise BoundaryConditionError(f"no transient profile for {b.vessel}")
            prof = profiles[b.vessel]
            for t, m in zip(prof.times, prof.mass_flow):
                lines.append(f"point,{b.vessel.value},{float(t)!r},{float(m)!r}")
    return "\n".join(lines) + "\n"


def parse_bc(text):
    """Inverse of :func:`export_bc`; returns ``(bc_set, profiles_or_None)``."""
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty BC file", row=1)
    header = lines[0].split()
    if len(header) != 4 or header[0] != FILE_MAGIC or header[1] != FILE_VERSION:
        raise ParseError(f"bad header {lines[0]!r}", row=1)
    bc_type, provenance = header[2], header[3]
    if bc_type not in BC_TABLE:
        raise ParseError(f"unknown bc_type {bc_type!r}", row=1)
    kinds, values, points = {}, {}, {}
    order = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        try:
            if parts[0] == "boundary" and len(parts) == 4:
                vessel = as_vessel(parts[1])
                if parts[2] not in KINDS or UNITS[parts[2]] != parts[3]:
                    raise ValueError(f"bad kind/units {parts[2]!r}/{parts[3]!r}")
                kinds[vessel] = parts[2]
                order.append(vessel)
            elif parts[0] == "value" and len(parts) == 3:
                values[as_vessel(parts[1])] = float(parts[2])
            elif parts[0] == "point" and len(parts) == 4:
                points.setdefault(as_vessel(parts[1]), []).append((float(parts[2]), float(parts[3])))
            else:
                raise ValueError(f"unrecognised record {line!r}")
        except ValueError as exc:
            raise ParseError(str(exc), row=lineno) from None
    if tuple(order) != BOUNDARY_VESSELS:
        raise ParseError(f"expected boundaries {[v.value for v in BOUNDARY_VESSELS]}")
    boundaries = [Boundary(v, kinds[v], values.get(v)) for v in order]
    bc_set = BoundaryConditionSet(bc_type, boundaries[0], tuple(boundaries[1:]), provenance)
    arch_kind, dao_kind = BC_TABLE[bc_type]
    for b in bc_set.outlets:
        expected = dao_kind if b.vessel == VesselId.DESCENDING_AORTA else arch_kind
        if b.kind != expected:
            raise ParseError(f"{b.vessel} kind {b.kind} does not match {bc_type}")
    profiles = None
    if points:
        profiles = {}
        for vessel, pts in points.items():
            arr = np.array(pts)
            profiles[vessel] = MassFlowProfile(arr[:, 0], arr[:, 1], vessel)
    return bc_set, profiles


def bc_filename(provenance, bc_type):
    return f"{provenance}_{bc_type}.bc"
