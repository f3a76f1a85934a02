"""Group-aware crowd navigation with visible-edge pentagon group spaces.

Library layout mirrors the processing pipeline: geometry primitives,
clustering, LiDAR sensing, group-space construction, key-point prediction,
the sampling MPC planner, pedestrian crowd engines, and the benchmark
harness with its statistics.
"""

from .clustering import ClusterLabeling, associate_centroids, dbscan, filter_large_clusters
from .crowd import (
    OrcaAgent,
    TrajectoryDataset,
    load_dataset,
    orca_step,
    replay_step,
    save_dataset,
    synthetic_crowd,
)
from .geometry import (
    ConvexHullShape,
    EggParams,
    GroupSurroundsRobot,
    Pentagon,
    angular_extremes,
    convex_hull,
    egg_boundary,
    point_polygon_distance,
    point_segment_distance,
)
from .grouping import (
    Group,
    GroupingParams,
    GroupSpace,
    assign_groups,
    build_edge_spaces,
    build_hull_spaces,
    build_pentagon,
    convex_hull_space,
    visible_edge_keypoints,
)
from .planner import (
    ControlPlan,
    MpcParams,
    PlannerDegenerate,
    RobotState,
    plan,
    plan_entities,
    plan_hulls,
    rollout,
    step_cost,
)
from .prediction import (
    ExternalOracle,
    KeypointHistory,
    OracleUnavailable,
    PredictionParams,
    predict_group_spaces,
    predict_hull_linear,
    predict_keypoints_linear,
    update_histories,
)
from .sensing import (
    AugmentedEntity,
    LidarConfig,
    Scan,
    SensorOccluded,
    augment_pedestrians,
    augment_scan,
    simulate_scan,
)

__version__ = "0.1.0"
