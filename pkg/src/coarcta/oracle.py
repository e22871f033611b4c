"""Reduced-order check of a boundary-condition set.

Inviscid and quasi-steady: the peak coarctation velocity follows from
continuity through the throat, and the pressure drop from the clinical
simplified Bernoulli relation. No 3D effects (jet contraction, losses).
"""
import csv
import io
import math
from dataclasses import dataclass

from coarcta.bc import FluidProperties
from coarcta.domain import ARCH_BRANCHES, OUTLETS, VesselId
from coarcta.errors import BoundaryConditionError, ConfigError, DomainError

INTERVENTION_THRESHOLD_MMHG = 20.0
REPORT_COLUMNS = ("provenance", "bc_type", "v_max_m_per_s", "dp_mmHg", "percent_error",
                  "continuity_residual_kg_per_s")


def _flow(bc, vessel):
    """Boundary flow: its own value, else the recorded reference peak flow."""
    b = bc.inlet if vessel == bc.inlet.vessel else bc.outlet(vessel)
    if b.value is not None:
        return b.value
    refs = bc.reference_flows or {}
    if vessel not in refs:
        raise BoundaryConditionError(f"{bc.provenance} {bc.bc_type}: no flow available for {vessel}")
    return refs[vessel]


def descending_flow(bc):
    """Flow through the coarctation, kg/s.

    Uses the descending-aorta value when the set carries one, otherwise inlet
    minus the arch-branch flows.
    """
    dao = bc.outlet(VesselId.DESCENDING_AORTA)
    if dao.value is not None:
        return dao.value
    return bc.inlet.value - math.fsum(_flow(bc, v) for v in ARCH_BRANCHES)


def coarct_velocity(bc, geometry, fluid=FluidProperties()):
    area = geometry.coarctation_throat_area
    if not area > 0:
        raise ConfigError("coarctation throat area missing")
    return descending_flow(bc) / (fluid.density * area)


def simplified_bernoulli(v_max):
    """Peak pressure drop in mmHg from peak jet velocity in m/s (4 v^2)."""
    if v_max < 0:
        raise DomainError("velocity must be non-negative")
    return 4.0 * v_max * v_max


def percent_error(simulated, measured):
    if not measured > 0:
        raise DomainError("measured velocity must be positive")
    return 100.0 * abs(simulated - measured) / measured


def continuity_residual(bc):
    return bc.inlet.value - math.fsum(_flow(bc, v) for v in OUTLETS)


@dataclass(frozen=True)
class OracleReport:
    provenance: str
    bc_type: str
    peak_coarctation_velocity: float
    pressure_drop: float
    percent_error_vs_measured: float
    continuity_residual: float

    @property
    def warrants_intervention(self):
        return self.pressure_drop > INTERVENTION_THRESHOLD_MMHG

    def row(self):
        return (self.provenance, self.bc_type, repr(self.peak_coarctation_velocity), repr(self.pressure_drop),
                repr(self.percent_error_vs_measured), repr(self.continuity_residual))


def evaluate_bc_set(bc, geometry, fluid=FluidProperties(), measured_v=3.49):
    v = coarct_velocity(bc, geometry, fluid)
    if v < 0:
        raise DomainError(f"{bc.provenance} {bc.bc_type}: negative coarctation flow")
    return OracleReport(
        bc.provenance,
        bc.bc_type,
        v,
        simplified_bernoulli(v),
        percent_error(v, measured_v),
        continuity_residual(bc),
    )


def reports_to_csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in reports:
        writer.writerow(r.row())
    return buf.getvalue()
