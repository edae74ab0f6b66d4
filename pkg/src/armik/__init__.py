"""Closed-form inverse kinematics for a 7-DOF arm with a wrist offset.

The arm angle about the shoulder-to-axis7-center line parameterizes the
redundancy; for a fixed pose and arm angle the solver returns every
feasible branch (up to 16) analytically, with per-branch diagnostics and
singularity classification.
"""

from .errors import (
    AllCoefficientsZero,
    ArmikError,
    AxisParallel,
    DegenerateArm,
    DegenerateReference,
    DegreeZero,
    ElbowDegenerate,
    InvalidInput,
    InvalidParams,
    InvalidRotation,
    NearAxisParallel,
    NoConvergence,
    NoValidRoots,
    Unreachable,
    WristLikeDegenerate,
    ZeroSC,
)
from .robot import (
    FramePoints,
    JointConfig,
    RobotParams,
    Transform,
    default_params,
    forward_kinematics,
    frame_points,
    load_params,
    mdh_transform,
)
from .arm_angle import (
    ReducedPose,
    arm_angle,
    arm_angle_points,
    reconstruct_pose,
    reduce_pose,
    special_pose,
)
from .quartic import RealRoots, solve_quartic
from .ik_core import (
    PSI_TOL,
    REASON_CATEGORY,
    REASON_NAMES,
    IkBranch,
    IkRequest,
    RejectedBranch,
    QuarticSetup,
    SolutionSet,
    ToleranceSet,
    build_quartic,
    leaf_label,
    shoulder_consistency,
    shoulder_in_frame6,
    solve,
    solve_q123,
    solve_q4,
    solve_q5,
    solve_q6_q8,
    solve_q7,
    solve_special,
    unsquared_residual,
)
from .singularity import (
    SingularityReport,
    classify,
    family_distance,
    numeric_jacobian,
)
from .verify import (
    CheckResult,
    check_all,
    fk_oracle,
    fk_oracle_batch,
    numeric_ik,
    quartic_oracle,
)
from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "unsquared_residual",
    "shoulder_consistency",
    "leaf_label",
    "RejectedBranch",
    "REASON_NAMES",
    "REASON_CATEGORY",
    "PSI_TOL",
    "AllCoefficientsZero",
    "ArmikError",
    "AxisParallel",
    "BACKEND",
    "CheckResult",
    "DegenerateArm",
    "DegenerateReference",
    "DegreeZero",
    "ElbowDegenerate",
    "FramePoints",
    "IkBranch",
    "IkRequest",
    "InvalidInput",
    "InvalidParams",
    "InvalidRotation",
    "JointConfig",
    "NearAxisParallel",
    "NoConvergence",
    "NoValidRoots",
    "QuarticSetup",
    "RealRoots",
    "ReducedPose",
    "RobotParams",
    "SingularityReport",
    "SolutionSet",
    "ToleranceSet",
    "Transform",
    "Unreachable",
    "WristLikeDegenerate",
    "ZeroSC",
    "arm_angle",
    "arm_angle_points",
    "build_quartic",
    "check_all",
    "classify",
    "default_params",
    "family_distance",
    "fk_oracle",
    "fk_oracle_batch",
    "forward_kinematics",
    "frame_points",
    "load_params",
    "mdh_transform",
    "numeric_ik",
    "numeric_jacobian",
    "quartic_oracle",
    "reconstruct_pose",
    "reduce_pose",
    "solve",
    "solve_q123",
    "solve_q4",
    "solve_q5",
    "solve_q6_q8",
    "solve_q7",
    "solve_quartic",
    "solve_special",
    "special_pose",
    "shoulder_in_frame6",
]
