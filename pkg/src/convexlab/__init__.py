"""Staggered softmax-tower hard instances for convex optimization, their
Monte Carlo derivative oracle, and the query-complexity experiments that
exhibit the wall."""

from .schedule import InstanceParams, ScheduleError, params_schedule
from .frames import (OrthonormalFrame, haar_frame, complete_frame,
                     concentration_check, save_frame, load_frame)
from .nemirovski import vec_embed, nemirovski_value, nemirovski_subgradient
from .softmax import (smax, smax_prefix, smax_grad, smax_hessian,
                      grad_closeness, smax_lipschitz_bound)
from .smoothing import (SmoothingConfig, SmoothedEstimate, ball_point,
                        ball_points, nested_smooth_value, nested_smooth_grad,
                        smoothing_property_suite)
from .instance import (HardInstance, OracleResponse, make_instance, f_value,
                       h_value, h_subgrad, oracle_query, branch_stable,
                       optimum_witness, lipschitz_probe, is_epsilon_optimal,
                       epsilon_threshold)
from .optimizers import (OptimizerTrace, subgradient_descent, nesterov_agd,
                         random_search, exact_oracle)
from .experiments import (HidingReport, GameTranscript, measure_delta1,
                          measure_delta2, hiding_report, run_hybrid_game,
                          guess_response, GuessOracle,
                          reproduce_theorem_main_table)

__version__ = "0.1.0"
