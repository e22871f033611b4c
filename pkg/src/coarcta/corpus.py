"""Synthetic stand-in for the digitized patient corpus.

Sixteen traces: one per vessel and case (twelve) plus four extra coarctation
recordings (one pre-, three post-intervention). Thirteen single-cycle traces
resample to 200 steps and three multi-cycle ones to 350, giving a
3650-row dataset. Waveforms depend on heart rate through the systolic
ejection time and a mild peak-velocity gain.
"""
import csv
import io
from dataclasses import dataclass

import numpy as np

from coarcta.domain import CaseId, VesselId
from coarcta.traces import synth_trace

PRE = CaseId.PRE_INTERVENTION
POST = CaseId.POST_INTERVENTION

# peak velocity (m/s) at 120 BPM
BASE_PEAK = {
    (VesselId.ASCENDING_AORTA, PRE): 1.05,
    (VesselId.INNOMINATE_ARTERY, PRE): 1.20,
    (VesselId.LEFT_COMMON_CAROTID, PRE): 0.95,
    (VesselId.LEFT_SUBCLAVIAN, PRE): 1.10,
    (VesselId.COARCTATION, PRE): 3.30,
    (VesselId.DESCENDING_AORTA, PRE): 1.10,
    (VesselId.ASCENDING_AORTA, POST): 1.00,
    (VesselId.INNOMINATE_ARTERY, POST): 1.05,
    (VesselId.LEFT_COMMON_CAROTID, POST): 0.90,
    (VesselId.LEFT_SUBCLAVIAN, POST): 1.00,
    (VesselId.COARCTATION, POST): 1.90,
    (VesselId.DESCENDING_AORTA, POST): 1.25,
}

# Doppler direction: flow away from the probe is recorded negative
AWAY_FROM_PROBE = {VesselId.COARCTATION, VesselId.DESCENDING_AORTA}


@dataclass(frozen=True)
class CorpusEntry:
    vessel: VesselId
    case: CaseId
    heart_rate: float
    n_cycles: int
    label: str


ENTRIES = (
    CorpusEntry(VesselId.ASCENDING_AORTA, PRE, 131.0, 1, "aao_pre"),
    CorpusEntry(VesselId.INNOMINATE_ARTERY, PRE, 133.0, 1, "innom_pre"),
    CorpusEntry(VesselId.LEFT_COMMON_CAROTID, PRE, 137.0, 1, "lcca_pre"),
    CorpusEntry(VesselId.LEFT_SUBCLAVIAN, PRE, 134.0, 1, "lsa_pre"),
    CorpusEntry(VesselId.COARCTATION, PRE, 135.6, 1, "coa_pre"),
    CorpusEntry(VesselId.DESCENDING_AORTA, PRE, 132.0, 1, "dao_pre"),
    CorpusEntry(VesselId.ASCENDING_AORTA, POST, 104.0, 1, "aao_post"),
    CorpusEntry(VesselId.INNOMINATE_ARTERY, POST, 110.0, 1, "innom_post"),
    CorpusEntry(VesselId.LEFT_COMMON_CAROTID, POST, 98.0, 1, "lcca_post"),
    CorpusEntry(VesselId.LEFT_SUBCLAVIAN, POST, 107.0, 1, "lsa_post"),
    CorpusEntry(VesselId.COARCTATION, POST, 112.0, 1, "coa_post"),
    CorpusEntry(VesselId.DESCENDING_AORTA, POST, 101.0, 1, "dao_post"),
    CorpusEntry(VesselId.COARCTATION, PRE, 139.0, 1, "coa_pre_extra1"),
    CorpusEntry(VesselId.COARCTATION, POST, 95.0, 3, "coa_post_extra1"),
    CorpusEntry(VesselId.COARCTATION, POST, 116.0, 3, "coa_post_extra2"),
    CorpusEntry(VesselId.COARCTATION, POST, 106.0, 3, "coa_post_extra3"),
)


def ejection_time(heart_rate):
    """Systolic ejection time in seconds; shortens linearly with heart rate."""
    return 0.413 - 0.0017 * heart_rate


def peak_velocity(vessel, case, heart_rate):
    return BASE_PEAK[(vessel, case)] * (1.0 + 0.004 * (heart_rate - 120.0))


def peak_times(heart_rate, n_peaks=5):
    """Times of successive systolic maxima, as read off an image."""
    period = 60.0 / heart_rate
    return np.arange(n_peaks) * period + ejection_time(heart_rate) / 2.0


def synthetic_corpus(seed=0, noise_amplitude=0.02):
    """List of ``(label, RawTrace, peak_times)``."""
    out = []
    for i, e in enumerate(ENTRIES):
        period = 60.0 / e.heart_rate
        raw = synth_trace(
            e.heart_rate,
            peak_velocity(e.vessel, e.case, e.heart_rate),
            ejection_time(e.heart_rate) / period,
            n_cycles=e.n_cycles,
            vessel=e.vessel,
            case=e.case,
            noise_amplitude=noise_amplitude,
            seed=seed * 1000 + i,
            sign=-1.0 if e.vessel in AWAY_FROM_PROBE else 1.0,
        )
        out.append((e.label, raw, peak_times(e.heart_rate)))
    return out


def trace_to_csv(raw):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("time_s", "velocity_m_per_s"))
    for t, v in zip(raw.times, raw.velocities):
        writer.writerow((repr(float(t)), repr(float(v))))
    return buf.getvalue()
