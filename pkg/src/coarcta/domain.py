"""Closed vocabularies shared across the pipeline."""
from enum import Enum


class VesselId(str, Enum):
    ASCENDING_AORTA = "ascending_aorta"
    INNOMINATE_ARTERY = "innominate_artery"
    LEFT_COMMON_CAROTID = "left_common_carotid"
    LEFT_SUBCLAVIAN = "left_subclavian"
    COARCTATION = "coarctation"
    DESCENDING_AORTA = "descending_aorta"

    def __str__(self):
        return self.value


class CaseId(str, Enum):
    PRE_INTERVENTION = "pre_intervention"
    POST_INTERVENTION = "post_intervention"

    def __str__(self):
        return self.value


INLET = VesselId.ASCENDING_AORTA
ARCH_BRANCHES = (
    VesselId.INNOMINATE_ARTERY,
    VesselId.LEFT_COMMON_CAROTID,
    VesselId.LEFT_SUBCLAVIAN,
)
# outlets 1-4 in the usual ordering of the arch topology
OUTLETS = ARCH_BRANCHES + (VesselId.DESCENDING_AORTA,)
BOUNDARY_VESSELS = (INLET,) + OUTLETS


def as_vessel(value):
    try:
        return VesselId(str(value))
    except ValueError:
        raise ValueError(f"unknown vessel {value!r}") from None


def as_case(value):
    try:
        return CaseId(str(value))
    except ValueError:
        raise ValueError(f"unknown case {value!r}") from None
