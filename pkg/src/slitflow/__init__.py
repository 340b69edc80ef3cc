"""Vortex dynamics outside a flat plate, approached through a family of
thin obstacles shrinking onto it.

The package builds the exterior flow from conformal maps onto the unit-disk
exterior, advects point-vortex discretizations of smooth vorticity, and
measures how solutions outside thickened obstacles converge to the plate
flow, including the vortex sheet the plate carries.
"""

from .conformal import (BranchedPoint, ConformalMap, disk_identity_map,
                        epsilon_map, joukowski, map_from_config,
                        register_map_provider, segment_exterior_map,
                        segment_map, segment_map_derivative, side_limit_map)
from .geometry import JordanArc, Side, SidePoint, arc_from_config, segment_arc
from .harness import (FitResult, ResultBundle, RunConfig, config_digest,
                      default_config, export_field, fit_exponent, load_config,
                      parse_config, run_experiment, write_rows)
from .jump import (JumpTable, distributional_curl_check, divergence_free_check,
                   endpoint_coefficient, jump_density,
                   jump_density_extrapolated, jump_mass, jump_profile,
                   pure_circulation_jump, sample_jump_table, slit_pairing)
from .kernels import (FlowConfig, ObstaclePenetration, SINGULAR_BOUND_CONSTANT,
                      VelocityEvaluator, biot_savart_apply, biot_savart_kernel,
                      contour_circulation, green_function, harmonic_field,
                      kernel_magnitude, side_velocity, singular_bound_constant,
                      singular_integral_bound,
                      star, total_circulation, total_velocity)
from .limits import (CutoffField, EpsilonSweep, MapFamilyRow, ball_nodes,
                     cutoff_eval, cutoff_grad, cutoff_profile,
                     cutoff_profile_deriv, extension_consistency, flux_norm,
                     l2loc_velocity_error, map_family_report,
                     moment_rate_proxy, transition_measure, weak_residual)
from .testfuncs import (BoxPlateau, RadialPlateau, SpaceTimeTest, TimeWindow,
                        smoothstep, smoothstep_deriv)
from .transport import (ConservationReport, InitialVorticity, Trajectory,
                        VorticitySample, conservation_report, discretize,
                        particle_velocities, rk4_step, run)

__version__ = "0.1.0"
