"""Boundary conditions for coarctation flow models from Doppler velocity traces."""
from coarcta.domain import CaseId, VesselId
from coarcta.kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "CaseId", "VesselId", "__version__"]
