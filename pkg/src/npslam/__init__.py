"""Nonparametric pose-graph SLAM.

Joint inference of robot trajectory, object landmarks, class beliefs, and
measurement-to-object association, with a reproducible 2D simulator and a
benchmark CLI comparing against frame-by-frame, open-loop, and robust-SLAM
baselines.
"""

from .association import (ClassBelief, DPParams, dp_prior, ml_class,
                          posterior_over_objects, prune_false_positives,
                          reassign_all, resolve_dp_params,
                          update_class_beliefs)
from .graph import (Landmark, PoseGraph, SolveResult, SolverError,
                    SolverSettings, build_graph, chi2, dead_reckon,
                    landmark_means, optimize)
from .metrics import (MetricsReport, association_accuracy, evaluate_run,
                      object_errors, trajectory_errors)
from .models import (ConsistencyError, Dataset, Detection, ModelError,
                     Odometry, class_log_likelihood, joint_log_likelihood,
                     measurement_log_factor, odometry_log_factor)
from .pipeline import (NpSlamResult, RunConfig, run_fbf, run_np_slam, run_ol,
                       run_rslam)
from .se2 import (Point2, Pose2, between, compose, jacobians_between,
                  jacobians_to_local, normalize_angle, to_global, to_local)
from .simulate import (ConfigError, GroundTruth, SimConfig, generate_trajectory,
                       generate_world, simulate)

__version__ = "0.1.0"

__all__ = [
    "ClassBelief", "DPParams", "dp_prior", "ml_class", "posterior_over_objects",
    "prune_false_positives", "reassign_all", "resolve_dp_params",
    "update_class_beliefs",
    "Landmark", "PoseGraph", "SolveResult", "SolverError", "SolverSettings",
    "build_graph", "chi2", "dead_reckon", "landmark_means", "optimize",
    "MetricsReport", "association_accuracy", "evaluate_run", "object_errors",
    "trajectory_errors",
    "ConsistencyError", "Dataset", "Detection", "ModelError", "Odometry",
    "class_log_likelihood", "joint_log_likelihood", "measurement_log_factor",
    "odometry_log_factor",
    "NpSlamResult", "RunConfig", "run_fbf", "run_np_slam", "run_ol", "run_rslam",
    "Point2", "Pose2", "between", "compose", "jacobians_between",
    "jacobians_to_local", "normalize_angle", "to_global", "to_local",
    "ConfigError", "GroundTruth", "SimConfig", "generate_trajectory",
    "generate_world", "simulate",
]
