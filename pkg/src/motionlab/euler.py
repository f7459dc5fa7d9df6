"""Euler-angle helpers.

Convention used throughout the package: degrees, rotation matrices composed
as R = Rz @ Ry @ Rx acting on column vectors in a right-handed frame with
+X = character's left, +Y = up, +Z = forward.  This matches BVH channel
order "Zrotation Yrotation Xrotation".
"""

import math

import numpy as np

Vec3 = tuple[float, float, float]


def canonicalize_deg(angle: float) -> float:
    """Wrap an angle into (-180, 180]."""
    a = math.fmod(angle, 360.0)
    if a > 180.0:
        a -= 360.0
    elif a <= -180.0:
        a += 360.0
    return a


def euler_to_matrix(angles_deg) -> np.ndarray:
    """3x3 rotation matrix for (x, y, z) degrees, R = Rz @ Ry @ Rx."""
    x, y, z = (math.radians(a) for a in angles_deg)
    cx, sx = math.cos(x), math.sin(x)
    cy, sy = math.cos(y), math.sin(y)
    cz, sz = math.cos(z), math.sin(z)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rz @ ry @ rx


def matrix_to_euler(rot: np.ndarray) -> Vec3:
    """Inverse of euler_to_matrix; returns (x, y, z) degrees.

    At the y = +-90 deg singularity the x/z split is not unique; z is set
    to 0 there, which round-trips through euler_to_matrix exactly.
    """
    # R = Rz @ Ry @ Rx  =>  R[2,0] = -sin(y)
    sy = -float(rot[2, 0])
    sy = max(-1.0, min(1.0, sy))
    y = math.asin(sy)
    if abs(sy) < 1.0 - 1e-12:
        x = math.atan2(float(rot[2, 1]), float(rot[2, 2]))
        z = math.atan2(float(rot[1, 0]), float(rot[0, 0]))
    else:
        x = math.atan2(-float(rot[1, 2]), float(rot[1, 1]))
        z = 0.0
    return (math.degrees(x), math.degrees(y), math.degrees(z))
