"""Robot model: link-transform convention, parameters, forward kinematics.

The kinematic chain is described by modified Denavit-Hartenberg rows
(alpha, a, d, theta_offset), one per joint, with the link transform

    T_i = RotX(alpha_i) * TransX(a_i) * RotZ(theta_offset_i + q_i) * TransZ(d_i)

applied left to right from the base. Joint values q are the user-facing
coordinates; theta_offset absorbs any constant rotation between the
user zero and the solver's internal zero.
"""

from dataclasses import dataclass, field
import json
import math
import importlib.resources

import numpy as np

from .errors import InvalidInput, InvalidParams, InvalidRotation
from ._kernels import active as _K
from ._kernels_impl import BASE_OFFSETS

ROT_TOL = 1e-9

# canonical chain structure: alpha and a columns are fixed by the geometry,
# d column carries the three link lengths, row 7 carries the wrist offset
_CANON_ALPHA = np.array(
    [0.0, -math.pi / 2, math.pi / 2, -math.pi / 2, math.pi / 2, -math.pi / 2, math.pi / 2]
)


def _as_vec(x, n, name):
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.shape[0] != n:
        raise InvalidInput(f"{name} must have {n} elements, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise InvalidInput(f"{name} contains non-finite values")
    return v


def check_rotation(R, tol=ROT_TOL):
    """Validate that R is a proper rotation within tol. Returns R as float64."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise InvalidRotation(f"rotation must be 3x3, got {R.shape}")
    if not np.all(np.isfinite(R)):
        raise InvalidRotation("rotation contains non-finite values")
    err = np.abs(R @ R.T - np.eye(3)).max()
    if err > tol:
        raise InvalidRotation(f"rotation is not orthonormal (deviation {err:.3e})")
    d = np.linalg.det(R)
    if abs(d - 1.0) > tol:
        raise InvalidRotation(f"rotation determinant is {d:.12f}, expected +1")
    return R


@dataclass
class Transform:
    """Rigid transform: rotation (3,3) and translation (3,)."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        self.rotation = check_rotation(self.rotation)
        self.translation = _as_vec(self.translation, 3, "translation")

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, T):
        T = np.asarray(T, dtype=float)
        if T.shape != (4, 4):
            raise InvalidInput(f"homogeneous matrix must be 4x4, got {T.shape}")
        return cls(T[:3, :3], T[:3, 3])

    @property
    def matrix(self):
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    def compose(self, other):
        return Transform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self):
        Rt = self.rotation.T
        return Transform(Rt, -Rt @ self.translation)

    def apply(self, point):
        p = _as_vec(point, 3, "point")
        return self.rotation @ p + self.translation


@dataclass
class JointConfig:
    """Seven joint values in radians."""

    q: np.ndarray

    def __post_init__(self):
        self.q = _as_vec(self.q, 7, "joints")

    def wrapped(self):
        return JointConfig(np.array([_K.wrap_angle(v) for v in self.q]))

    def __iter__(self):
        return iter(self.q)

    def __len__(self):
        return 7


@dataclass
class FramePoints:
    """Key chain points in base coordinates.

    shoulder: intersection of axes 1-3, elbow: intersection of axes 3-5,
    wrist: intersection of axes 5-6, axis7: a point on joint axis 7.
    """

    shoulder: np.ndarray
    elbow: np.ndarray
    wrist: np.ndarray
    axis7: np.ndarray


@dataclass
class RobotParams:
    """Geometry of the arm.

    d_bs: base to shoulder, d_se: shoulder to elbow, d_ew: elbow to wrist,
    a_wr: perpendicular offset between joint axes 6 and 7. All in meters.
    mdh: (7,4) table of (alpha, a, d, theta_offset) rows.
    """

    d_bs: float
    d_se: float
    d_ew: float
    a_wr: float
    mdh: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("d_bs", "d_se", "d_ew", "a_wr"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidParams(f"{name} is not finite")
            setattr(self, name, v)
        if self.d_bs <= 0 or self.d_se <= 0 or self.d_ew <= 0:
            raise InvalidParams("link lengths d_bs, d_se, d_ew must be positive")
        if self.a_wr < 0:
            raise InvalidParams("wrist offset a_wr must be non-negative")
        if self.a_wr >= self.d_ew:
            raise InvalidParams("wrist offset a_wr must be smaller than d_ew")
        if self.mdh is None:
            self.mdh = self._canonical_mdh()
        self.mdh = np.asarray(self.mdh, dtype=float)
        if self.mdh.shape != (7, 4):
            raise InvalidParams(f"mdh table must be (7,4), got {self.mdh.shape}")
        if not np.all(np.isfinite(self.mdh)):
            raise InvalidParams("mdh table contains non-finite values")
        self._check_structure()

    def _canonical_mdh(self):
        m = np.zeros((7, 4))
        m[:, 0] = _CANON_ALPHA
        m[6, 1] = self.a_wr
        m[0, 2] = self.d_bs
        m[2, 2] = -self.d_se
        m[4, 2] = -self.d_ew
        m[:, 3] = BASE_OFFSETS
        return m

    def _check_structure(self):
        canon = self._canonical_mdh()
        # theta offsets are free, everything else must match the canonical chain
        for col, name in ((0, "alpha"), (1, "a"), (2, "d")):
            dev = np.abs(self.mdh[:, col] - canon[:, col]).max()
            if dev > 1e-9:
                raise InvalidParams(
                    f"mdh {name} column deviates from the supported chain "
                    f"structure by {dev:.3e}"
                )
        # cross-check the declared lengths against a zero-joint FK pass
        pts = frame_points(self, np.zeros(7))
        checks = (
            (np.linalg.norm(pts.elbow - pts.shoulder), self.d_se, "shoulder-elbow"),
            (np.linalg.norm(pts.wrist - pts.elbow), self.d_ew, "elbow-wrist"),
            (np.linalg.norm(pts.axis7 - pts.wrist), self.a_wr, "wrist-axis7"),
            (pts.shoulder[2], self.d_bs, "base-shoulder height"),
        )
        for got, want, name in checks:
            if abs(got - want) > 1e-9:
                raise InvalidParams(
                    f"zero-pose {name} distance {got:.12f} does not match "
                    f"declared {want:.12f}"
                )

    @property
    def delta(self):
        """Offset between user joint coordinates and internal coordinates."""
        return self.mdh[:, 3] - BASE_OFFSETS

    def to_dict(self):
        return {
            "d_bs": self.d_bs,
            "d_se": self.d_se,
            "d_ew": self.d_ew,
            "a_wr": self.a_wr,
            "mdh": self.mdh.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise InvalidParams("parameter document must be a JSON object")
        missing = [k for k in ("d_bs", "d_se", "d_ew", "a_wr") if k not in d]
        if missing:
            raise InvalidParams(f"missing parameter keys: {', '.join(missing)}")
        try:
            mdh = d.get("mdh")
            return cls(
                d_bs=float(d["d_bs"]),
                d_se=float(d["d_se"]),
                d_ew=float(d["d_ew"]),
                a_wr=float(d["a_wr"]),
                mdh=None if mdh is None else np.asarray(mdh, dtype=float),
            )
        except (TypeError, ValueError) as e:
            raise InvalidParams(f"malformed parameter values: {e}") from None


def load_params(path):
    """Load robot parameters from a JSON file."""
    try:
        with open(path, "r") as f:
            doc = json.load(f)
    except OSError as e:
        raise InvalidParams(f"cannot read parameter file: {e}") from None
    except json.JSONDecodeError as e:
        raise InvalidParams(f"parameter file is not valid JSON: {e}") from None
    return RobotParams.from_dict(doc)


def default_params():
    """Built-in parameter set shipped with the package."""
    ref = importlib.resources.files("armik").joinpath("data/default_params.json")
    return RobotParams.from_dict(json.loads(ref.read_text()))


def _joints_array(joints):
    if isinstance(joints, JointConfig):
        return joints.q
    return _as_vec(joints, 7, "joints")


def mdh_transform(alpha, a, d, theta):
    """Single link transform for one table row at joint angle theta."""
    T = np.empty((4, 4))
    _K.mdh_matrix(alpha, a, d, theta, T)
    return Transform.from_matrix(T)


def forward_kinematics(params, joints):
    """Pose of frame 7 in base coordinates."""
    q = _joints_array(joints)
    T = np.empty((4, 4))
    S = np.empty(3)
    E = np.empty(3)
    W = np.empty(3)
    _K.fk_chain(params.mdh, q, T, S, E, W)
    return Transform.from_matrix(T)


def frame_points(params, joints):
    """Shoulder, elbow, wrist and axis-7 points in base coordinates."""
    q = _joints_array(joints)
    T = np.empty((4, 4))
    S = np.empty(3)
    E = np.empty(3)
    W = np.empty(3)
    _K.fk_chain(params.mdh, q, T, S, E, W)
    return FramePoints(shoulder=S, elbow=E, wrist=W, axis7=T[:3, 3].copy())
