"""oscinv: spectral forward, asymptotic, and inverse solvers for hyperbolic
equations driven by rapidly oscillating sources."""

from .basis import (EigenBasis, SeparableAmplitude, SpatialField,
                    build_dirichlet_interval_basis, build_rectangle_basis,
                    build_sturm_liouville_basis, check_boundary_traces,
                    project, synthesize)
from .asymptotics import (AsymptoticExpansion, build_expansion,
                          evaluate_expansion, expansion_coefficients,
                          lambda_profile, residual_norm)
from .config import (ConfigError, ExperimentConfig, config_from_dict,
                     load_config, load_observation, make_basis, make_source)
from .forward import (SpaceTimeField, UnderResolvedError, duhamel_coefficient,
                      make_time_grid, solve_direct, solve_with_initial_data)
from .harness import (StudyReport, emit_report, fit_slope, run_order_study,
                      run_roundtrip)
from .inverse import (AdmissibilityError, AdmissibilityReport,
                      ObservationData, check_admissibility, ip1_build_targets,
                      ip1_recover, ip2_recover, ip3_recover)
from .selftest import run_selftest
from .sources import (FastProfile, OscillatorySource, corner_values, rho0,
                      rho1, split_source, tau_mean)
from .traces import TimeTrace, uniform_grid
from .volterra import (VolterraKernel, build_kernel, solve_second_kind,
                       volterra_residual)

__version__ = "0.1.0"

__all__ = [
    "EigenBasis", "SeparableAmplitude", "SpatialField",
    "build_dirichlet_interval_basis", "build_rectangle_basis",
    "build_sturm_liouville_basis", "check_boundary_traces", "project",
    "synthesize",
    "AsymptoticExpansion", "build_expansion", "evaluate_expansion",
    "expansion_coefficients", "lambda_profile", "residual_norm",
    "ConfigError", "ExperimentConfig", "config_from_dict", "load_config",
    "load_observation", "make_basis", "make_source",
    "SpaceTimeField", "UnderResolvedError", "duhamel_coefficient",
    "make_time_grid", "solve_direct", "solve_with_initial_data",
    "StudyReport", "emit_report", "fit_slope", "run_order_study",
    "run_roundtrip",
    "AdmissibilityError", "AdmissibilityReport", "ObservationData",
    "check_admissibility", "ip1_build_targets", "ip1_recover", "ip2_recover",
    "ip3_recover",
    "run_selftest",
    "FastProfile", "OscillatorySource", "corner_values", "rho0", "rho1",
    "split_source", "tau_mean",
    "TimeTrace", "uniform_grid",
    "VolterraKernel", "build_kernel", "solve_second_kind",
    "volterra_residual",
]
