"""Quantum-field environments: propagators, dipole kernels, overdamped
master-equation coefficients, constant-separation decoherence and the
plate dissipation formula."""

from .kernels import (RADIAL_MEASURE, DampedPropagatorSpec, FieldSpec, dipole_kernels,
                      eta_moment, local_eta_moment, make_field_spec, overdamped_Vn_Vd,
                      propagators_damped, propagators_free)
from .master import (DensityGrid, MasterCoefficients, evolve_master, master_coefficients,
                     stability_number)
from .plate import plate_power
from .separation import (closed_form_report, decoherence_DL_highT, decoherence_DL_highT_cos,
                         decoherence_DL_numeric, decoherence_DL_zeroT, decoherence_DL_zeroT_cos,
                         report_json)

__all__ = [
    "RADIAL_MEASURE", "DampedPropagatorSpec", "FieldSpec", "dipole_kernels", "eta_moment",
    "local_eta_moment", "make_field_spec", "overdamped_Vn_Vd", "propagators_damped",
    "propagators_free", "DensityGrid", "MasterCoefficients", "evolve_master",
    "master_coefficients", "stability_number", "plate_power", "closed_form_report",
    "decoherence_DL_highT", "decoherence_DL_highT_cos", "decoherence_DL_numeric",
    "decoherence_DL_zeroT", "decoherence_DL_zeroT_cos", "report_json",
]
