"""Rotation representations and their forward/backward maps.

Each representation is a pair of maps:

* ``manifold_map`` (projection): raw ambient vector -> point on the
  representation's manifold (unit quaternion, orthonormal two-frame, SO(3)
  itself, or the unit eigenvector of a symmetric 4x4 form);
* ``rotation_map``: manifold point -> rotation matrix.

``representation_map`` goes the other way (rotation -> manifold point) and
``embed`` re-injects a manifold point into ambient coordinates.  The two
Euclidean baselines (Euler angles, axis-angle) have trivial projections.

Per-sample projections run on the deterministic fixed-size solvers from
``lin_core``; the ``*_batch`` helpers implement the same maps over a leading
batch axis with numpy's batched linear algebra, which the training loops need
for throughput.  Tests pin the two routes against each other.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import so3
from .lin_core import eig_sym4, svd3

# Degeneracy thresholds for the projections.  Inputs this close to the
# singular set have no stable projection and are rejected.
QUAT_NORM_MIN = 1e-8
GRAM_RESIDUAL_MIN = 1e-8
SIGMA_SUM_MIN = 1e-8
EIGENGAP_MIN = 1e-10

_FD_STEP = 1e-5

# row-major upper-triangle order used to pack a symmetric 4x4 matrix into
# the ten free parameters of the 10-dim representation
_SYM4_INDEX = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)]


class DegenerateInputError(ValueError):
    """Raw vector lies too close to the projection's singular set."""


class RepKind(enum.Enum):
    EULER3 = "euler"
    AXIS_ANGLE3 = "axis-angle"
    QUAT4 = "quat"
    SIX_D = "6d"
    NINE_D = "9d"
    TEN_D = "10d"

    @property
    def ambient_dim(self) -> int:
        return {"euler": 3, "axis-angle": 3, "quat": 4, "6d": 6, "9d": 9, "10d": 10}[self.value]

    @property
    def has_manifold(self) -> bool:
        """True for representations with a nontrivial projection."""
        return self in (RepKind.QUAT4, RepKind.SIX_D, RepKind.NINE_D, RepKind.TEN_D)


REP_BY_NAME = {k.value: k for k in RepKind}

MANIFOLD_REPS = (RepKind.QUAT4, RepKind.SIX_D, RepKind.NINE_D, RepKind.TEN_D)


@dataclass(frozen=True)
class ManifoldPoint:
    """Point on a representation manifold.

    value layout per rep: quat/10d -> unit quaternion (4,); 6d -> rows
    (u_hat, v_hat) of shape (2, 3); 9d -> rotation matrix (3, 3);
    euler/axis-angle -> the raw 3-vector itself.
    """
    rep: RepKind
    value: np.ndarray


def sym4_from_params(theta) -> np.ndarray:
    """Symmetric 4x4 matrix from its ten row-major upper-triangle entries."""
    theta = np.asarray(theta, dtype=np.float64)
    a = np.empty((4, 4))
    for t, (i, j) in zip(theta, _SYM4_INDEX):
        a[i, j] = t
        a[j, i] = t
    return a


def params_from_sym4(a) -> np.ndarray:
    """Inverse of :func:`sym4_from_params` (reads the upper triangle)."""
    a = np.asarray(a, dtype=np.float64)
    return np.array([a[i, j] for i, j in _SYM4_INDEX])


def _check_dim(rep: RepKind, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (rep.ambient_dim,):
        raise ValueError(f"{rep.value}: expected shape ({rep.ambient_dim},), got {x.shape}")
    return x


def manifold_map(rep: RepKind, x) -> ManifoldPoint:
    """Project a raw ambient vector onto the representation manifold."""
    x = _check_dim(rep, x)
    if rep in (RepKind.EULER3, RepKind.AXIS_ANGLE3):
        return ManifoldPoint(rep, x.copy())

    if rep is RepKind.QUAT4:
        n = float(np.linalg.norm(x))
        if n <= QUAT_NORM_MIN:
            raise DegenerateInputError(f"quat norm {n:.3e} below {QUAT_NORM_MIN:.0e}")
        return ManifoldPoint(rep, x / n)

    if rep is RepKind.SIX_D:
        u, v = x[:3], x[3:]
        nu = float(np.linalg.norm(u))
        if nu <= GRAM_RESIDUAL_MIN:
            raise DegenerateInputError(f"6d first-column norm {nu:.3e} below {GRAM_RESIDUAL_MIN:.0e}")
        u_hat = u / nu
        w = v - float(v @ u_hat) * u_hat
        nw = float(np.linalg.norm(w))
        if nw <= GRAM_RESIDUAL_MIN:
            raise DegenerateInputError(f"6d Gram-Schmidt residual {nw:.3e} below {GRAM_RESIDUAL_MIN:.0e}")
        return ManifoldPoint(rep, np.stack([u_hat, w / nw]))

    if rep is RepKind.NINE_D:
        res = svd3(x.reshape(3, 3))
        if res.sigma[1] + res.sigma[2] <= SIGMA_SUM_MIN:
            raise DegenerateInputError(
                f"9d singular values sigma2+sigma3 = {res.sigma[1] + res.sigma[2]:.3e} "
                f"below {SIGMA_SUM_MIN:.0e}")
        d = float(np.linalg.det(res.u @ res.v.T))
        r = (res.u * np.array([1.0, 1.0, d])) @ res.v.T
        return ManifoldPoint(rep, r)

    # TEN_D: unit eigenvector of the smallest eigenvalue of A(x)
    res = eig_sym4(sym4_from_params(x))
    gap = float(res.values[1] - res.values[0])
    if gap <= EIGENGAP_MIN:
        raise DegenerateInputError(f"10d smallest-eigenvalue gap {gap:.3e} below {EIGENGAP_MIN:.0e}")
    q = so3.canonical_quat(res.vectors[:, 0])
    return ManifoldPoint(rep, q)


def rotation_map(point: ManifoldPoint) -> np.ndarray:
    """Rotation matrix of a manifold point."""
    rep, val = point.rep, point.value
    if rep in (RepKind.QUAT4, RepKind.TEN_D):
        return so3.quat_to_rot(val)
    if rep is RepKind.SIX_D:
        u_hat, v_hat = val[0], val[1]
        return np.stack([u_hat, v_hat, np.cross(u_hat, v_hat)], axis=1)
    if rep is RepKind.NINE_D:
        return val.copy()
    if rep is RepKind.EULER3:
        return euler_xyz_to_rot(val)
    return so3.exp_so3(np.eye(3), val)  # AXIS_ANGLE3


def representation_map(r, rep: RepKind) -> ManifoldPoint:
    """Map a rotation matrix to its canonical manifold point."""
    r = np.asarray(r, dtype=np.float64)
    if rep is RepKind.QUAT4:
        return ManifoldPoint(rep, so3.rot_to_quat(r))
    if rep is RepKind.SIX_D:
        return ManifoldPoint(rep, np.stack([r[:, 0], r[:, 1]]))
    if rep is RepKind.NINE_D:
        return ManifoldPoint(rep, r.copy())
    if rep is RepKind.TEN_D:
        return ManifoldPoint(rep, so3.rot_to_quat(r))
    if rep is RepKind.EULER3:
        return ManifoldPoint(rep, rot_to_euler_xyz(r))
    return ManifoldPoint(rep, so3.log_so3(np.eye(3), r))  # AXIS_ANGLE3


def embed(point: ManifoldPoint) -> np.ndarray:
    """Ambient coordinates of a manifold point (a fixed point of the projection)."""
    rep, val = point.rep, point.value
    if rep is RepKind.QUAT4:
        return val.copy()
    if rep is RepKind.SIX_D:
        return np.concatenate([val[0], val[1]])
    if rep is RepKind.NINE_D:
        return val.ravel().copy()
    if rep is RepKind.TEN_D:
        # symmetric form I - q q^T has eigenvalue 0 exactly on q
        return params_from_sym4(np.eye(4) - np.outer(val, val))
    return val.copy()


def baseline_rotation(rep: RepKind, x) -> np.ndarray:
    """Full forward map: raw ambient vector -> rotation matrix."""
    return rotation_map(manifold_map(rep, x))


# ---------------------------------------------------------------------------
# Euler helpers (X-Y-Z intrinsic: R = Rx(a) @ Ry(b) @ Rz(c))

def euler_xyz_to_rot(angles) -> np.ndarray:
    a, b, c = angles
    return so3.rot_x(a) @ so3.rot_y(b) @ so3.rot_z(c)


def rot_to_euler_xyz(r) -> np.ndarray:
    """Angles (a, b, c) with R = Rx(a) Ry(b) Rz(c); c = 0 at gimbal lock."""
    sb = max(-1.0, min(1.0, float(r[0, 2])))
    b = math.asin(sb)
    if abs(sb) > 1.0 - 1e-12:
        return np.array([math.atan2(r[2, 1], r[1, 1]), b, 0.0])
    return np.array([math.atan2(-r[1, 2], r[2, 2]), b, math.atan2(-r[0, 1], r[0, 0])])


# ---------------------------------------------------------------------------
# Batched forward maps (numpy batched linear algebra; same semantics as the
# per-sample route, tested against it)

def _quat_to_rot_batch(q: np.ndarray) -> np.ndarray:
    q0, q1, q2, q3 = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    r = np.empty((q.shape[0], 3, 3))
    r[:, 0, 0] = 2.0 * (q0 * q0 + q1 * q1) - 1.0
    r[:, 0, 1] = 2.0 * (q1 * q2 - q0 * q3)
    r[:, 0, 2] = 2.0 * (q1 * q3 + q0 * q2)
    r[:, 1, 0] = 2.0 * (q1 * q2 + q0 * q3)
    r[:, 1, 1] = 2.0 * (q0 * q0 + q2 * q2) - 1.0
    r[:, 1, 2] = 2.0 * (q2 * q3 - q0 * q1)
    r[:, 2, 0] = 2.0 * (q1 * q3 - q0 * q2)
    r[:, 2, 1] = 2.0 * (q2 * q3 + q0 * q1)
    r[:, 2, 2] = 2.0 * (q0 * q0 + q3 * q3) - 1.0
    return r


def _normalize_quat_batch(xs: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(xs, axis=1)
    bad = n <= QUAT_NORM_MIN
    if bad.any():
        raise DegenerateInputError(
            f"quat norm below {QUAT_NORM_MIN:.0e} at sample {int(np.nonzero(bad)[0][0])}")
    return xs / n[:, None]


def _six_d_frames_batch(xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u, v = xs[:, :3], xs[:, 3:]
    nu = np.linalg.norm(u, axis=1)
    bad = nu <= GRAM_RESIDUAL_MIN
    if bad.any():
        raise DegenerateInputError(
            f"6d first-column norm below {GRAM_RESIDUAL_MIN:.0e} at sample {int(np.nonzero(bad)[0][0])}")
    u_hat = u / nu[:, None]
    w = v - np.einsum('bi,bi->b', v, u_hat)[:, None] * u_hat
    nw = np.linalg.norm(w, axis=1)
    bad = nw <= GRAM_RESIDUAL_MIN
    if bad.any():
        raise DegenerateInputError(
            f"6d Gram-Schmidt residual below {GRAM_RESIDUAL_MIN:.0e} at sample {int(np.nonzero(bad)[0][0])}")
    return u_hat, w / nw[:, None]


def _sym4_batch(xs: np.ndarray) -> np.ndarray:
    a = np.empty((xs.shape[0], 4, 4))
    for k, (i, j) in enumerate(_SYM4_INDEX):
        a[:, i, j] = xs[:, k]
        a[:, j, i] = xs[:, k]
    return a


def smallest_eigvec_batch(xs: np.ndarray) -> np.ndarray:
    """Unit eigenvector (canonical sign) of the smallest eigenvalue of A(x)."""
    vals, vecs = np.linalg.eigh(_sym4_batch(xs))
    gap = vals[:, 1] - vals[:, 0]
    bad = gap <= EIGENGAP_MIN
    if bad.any():
        raise DegenerateInputError(
            f"10d smallest-eigenvalue gap below {EIGENGAP_MIN:.0e} at sample {int(np.nonzero(bad)[0][0])}")
    q = vecs[:, :, 0].copy()
    q[q[:, 0] < 0.0] *= -1.0
    for i in np.nonzero(q[:, 0] == 0.0)[0]:
        q[i] = so3.canonical_quat(q[i])
    return q


def rotations_from_raw(rep: RepKind, xs: np.ndarray) -> np.ndarray:
    """Batched ``baseline_rotation``: (B, n) raw vectors -> (B, 3, 3)."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != rep.ambient_dim:
        raise ValueError(f"{rep.value}: expected (B, {rep.ambient_dim}), got {xs.shape}")

    if rep is RepKind.QUAT4:
        return _quat_to_rot_batch(_normalize_quat_batch(xs))

    if rep is RepKind.SIX_D:
        u_hat, v_hat = _six_d_frames_batch(xs)
        return np.stack([u_hat, v_hat, np.cross(u_hat, v_hat)], axis=2)

    if rep is RepKind.NINE_D:
        m = xs.reshape(-1, 3, 3)
        u, s, vt = np.linalg.svd(m)
        bad = s[:, 1] + s[:, 2] <= SIGMA_SUM_MIN
        if bad.any():
            raise DegenerateInputError(
                f"9d sigma2+sigma3 below {SIGMA_SUM_MIN:.0e} at sample {int(np.nonzero(bad)[0][0])}")
        d = np.linalg.det(u @ vt)
        u = u.copy()
        u[:, :, 2] *= d[:, None]
        return u @ vt

    if rep is RepKind.TEN_D:
        return _quat_to_rot_batch(smallest_eigvec_batch(xs))

    if rep is RepKind.EULER3:
        a, b, c = xs[:, 0], xs[:, 1], xs[:, 2]
        ca, sa, cb, sb, cc, sc = np.cos(a), np.sin(a), np.cos(b), np.sin(b), np.cos(c), np.sin(c)
        r = np.empty((xs.shape[0], 3, 3))
        r[:, 0, 0] = cb * cc
        r[:, 0, 1] = -cb * sc
        r[:, 0, 2] = sb
        r[:, 1, 0] = ca * sc + sa * sb * cc
        r[:, 1, 1] = ca * cc - sa * sb * sc
        r[:, 1, 2] = -sa * cb
        r[:, 2, 0] = sa * sc - ca * sb * cc
        r[:, 2, 1] = sa * cc + ca * sb * sc
        r[:, 2, 2] = ca * cb
        return r

    # AXIS_ANGLE3: vectorized Rodrigues with the same small-angle series
    theta2 = np.einsum('bi,bi->b', xs, xs)
    theta = np.sqrt(theta2)
    small = theta < 1e-6
    with np.errstate(invalid='ignore', divide='ignore'):
        a_ = np.where(small, 1.0 - theta2 / 6.0, np.sin(theta) / np.where(small, 1.0, theta))
        b_ = np.where(small, 0.5 - theta2 / 24.0, (1.0 - np.cos(theta)) / np.where(small, 1.0, theta2))
    k = np.zeros((xs.shape[0], 3, 3))
    k[:, 0, 1] = -xs[:, 2]
    k[:, 0, 2] = xs[:, 1]
    k[:, 1, 0] = xs[:, 2]
    k[:, 1, 2] = -xs[:, 0]
    k[:, 2, 0] = -xs[:, 1]
    k[:, 2, 1] = xs[:, 0]
    return np.eye(3) + a_[:, None, None] * k + b_[:, None, None] * (k @ k)


# ---------------------------------------------------------------------------
# Backward maps for the plain chain-rule baseline

def _quat_backward_batch(xs: np.ndarray, gs: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(xs, axis=1)
    q = xs / n[:, None]
    q0, q1, q2, q3 = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    z = np.zeros_like(q0)
    dr = np.empty((xs.shape[0], 4, 3, 3))
    dr[:, 0] = 2.0 * np.stack([
        np.stack([2 * q0, -q3, q2], -1),
        np.stack([q3, 2 * q0, -q1], -1),
        np.stack([-q2, q1, 2 * q0], -1)], -2)
    dr[:, 1] = 2.0 * np.stack([
        np.stack([2 * q1, q2, q3], -1),
        np.stack([q2, z, -q0], -1),
        np.stack([q3, q0, z], -1)], -2)
    dr[:, 2] = 2.0 * np.stack([
        np.stack([z, q1, q0], -1),
        np.stack([q1, 2 * q2, q3], -1),
        np.stack([-q0, q3, z], -1)], -2)
    dr[:, 3] = 2.0 * np.stack([
        np.stack([z, -q0, q1], -1),
        np.stack([q0, z, q2], -1),
        np.stack([q1, q2, 2 * q3], -1)], -2)
    gq = np.einsum('bij,bkij->bk', gs, dr)
    # project through the normalization x -> x/|x|
    return (gq - np.einsum('bk,bk->b', gq, q)[:, None] * q) / n[:, None]


def _six_d_backward_batch(xs: np.ndarray, gs: np.ndarray) -> np.ndarray:
    u, v = xs[:, :3], xs[:, 3:]
    nu = np.linalg.norm(u, axis=1)
    u_hat = u / nu[:, None]
    vu = np.einsum('bi,bi->b', v, u_hat)
    w = v - vu[:, None] * u_hat
    nw = np.linalg.norm(w, axis=1)
    v_hat = w / nw[:, None]

    g1, g2, g3 = gs[:, :, 0], gs[:, :, 1], gs[:, :, 2]
    # adjoint of the cross product c3 = u_hat x v_hat
    gu_hat = g1 + np.cross(v_hat, g3)
    gv_hat = g2 + np.cross(g3, u_hat)
    # through v_hat = w / |w|
    gw = (gv_hat - np.einsum('bi,bi->b', gv_hat, v_hat)[:, None] * v_hat) / nw[:, None]
    # through w = v - (v.u_hat) u_hat
    gv = gw - np.einsum('bi,bi->b', gw, u_hat)[:, None] * u_hat
    gu_hat = gu_hat - vu[:, None] * gw - np.einsum('bi,bi->b', gw, u_hat)[:, None] * v
    # through u_hat = u / |u|
    gu = (gu_hat - np.einsum('bi,bi->b', gu_hat, u_hat)[:, None] * u_hat) / nu[:, None]
    return np.concatenate([gu, gv], axis=1)


def _euler_backward_batch(xs: np.ndarray, gs: np.ndarray) -> np.ndarray:
    rs = rotations_from_raw(RepKind.EULER3, xs)
    d = gs @ np.swapaxes(rs, 1, 2)
    vee = np.stack([d[:, 2, 1] - d[:, 1, 2],
                    d[:, 0, 2] - d[:, 2, 0],
                    d[:, 1, 0] - d[:, 0, 1]], axis=1)
    a, b = xs[:, 0], xs[:, 1]
    ca, sa, cb, sb = np.cos(a), np.sin(a), np.cos(b), np.sin(b)
    # world-frame axes of the three intrinsic rotations
    w1 = np.zeros_like(xs)
    w1[:, 0] = 1.0
    w2 = np.stack([np.zeros_like(ca), ca, sa], axis=1)           # Rx e2
    w3 = np.stack([sb, -sa * cb, ca * cb], axis=1)               # Rx Ry e3
    return np.stack([np.einsum('bi,bi->b', w, vee) for w in (w1, w2, w3)], axis=1)


def _axis_angle_backward_batch(xs: np.ndarray, gs: np.ndarray) -> np.ndarray:
    rs = rotations_from_raw(RepKind.AXIS_ANGLE3, xs)
    c = np.swapaxes(rs, 1, 2) @ gs
    t = np.stack([c[:, 2, 1] - c[:, 1, 2],
                  c[:, 0, 2] - c[:, 2, 0],
                  c[:, 1, 0] - c[:, 0, 1]], axis=1)
    theta2 = np.einsum('bi,bi->b', xs, xs)
    theta = np.sqrt(theta2)
    small = theta < 1e-4
    with np.errstate(invalid='ignore', divide='ignore'):
        f1 = np.where(small, 0.5 - theta2 / 24.0,
                      (1.0 - np.cos(theta)) / np.where(small, 1.0, theta2))
        f2 = np.where(small, 1.0 / 6.0 - theta2 / 120.0,
                      (theta - np.sin(theta)) / np.where(small, 1.0, theta2 * theta))
    k = np.zeros((xs.shape[0], 3, 3))
    k[:, 0, 1] = -xs[:, 2]
    k[:, 0, 2] = xs[:, 1]
    k[:, 1, 0] = xs[:, 2]
    k[:, 1, 2] = -xs[:, 0]
    k[:, 2, 0] = -xs[:, 1]
    k[:, 2, 1] = xs[:, 0]
    # right Jacobian of the exponential map
    jr = np.eye(3) - f1[:, None, None] * k + f2[:, None, None] * (k @ k)
    return np.einsum('bji,bj->bi', jr, t)


def _fd_backward_batch(rep: RepKind, xs: np.ndarray, gs: np.ndarray, h: float = _FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of the forward map contracted with gs.

    Used for the 9- and 10-dim projections, whose derivative would otherwise
    require differentiating through SVD / eigenvector computations.
    """
    b, n = xs.shape
    eye = np.eye(n)
    pert = np.concatenate([xs[:, None, :] + h * eye[None], xs[:, None, :] - h * eye[None]], axis=1)
    rs = rotations_from_raw(rep, pert.reshape(b * 2 * n, n)).reshape(b, 2, n, 3, 3)
    jac = (rs[:, 0] - rs[:, 1]) / (2.0 * h)
    return np.einsum('bij,bkij->bk', gs, jac)


def vanilla_backward_batch(rep: RepKind, xs: np.ndarray, gs: np.ndarray) -> np.ndarray:
    """Batched chain rule through rotation_map(manifold_map(x)).

    ``gs`` holds per-sample Euclidean loss gradients dL/dR of shape (B, 3, 3);
    the result is dL/dx of shape (B, n).
    """
    xs = np.asarray(xs, dtype=np.float64)
    gs = np.asarray(gs, dtype=np.float64)
    if rep is RepKind.QUAT4:
        return _quat_backward_batch(xs, gs)
    if rep is RepKind.SIX_D:
        return _six_d_backward_batch(xs, gs)
    if rep is RepKind.EULER3:
        return _euler_backward_batch(xs, gs)
    if rep is RepKind.AXIS_ANGLE3:
        return _axis_angle_backward_batch(xs, gs)
    return _fd_backward_batch(rep, xs, gs)


def baseline_backward(rep: RepKind, x, dl_dr) -> np.ndarray:
    """Chain rule dL/dx for a single sample given dL/dR.

    Analytic for the Euclidean, quaternion and 6-dim representations; the 9-
    and 10-dim projections use central finite differences of the forward map
    over all ambient coordinates (step 1e-5).
    """
    x = _check_dim(rep, x)
    dl_dr = np.asarray(dl_dr, dtype=np.float64)
    return vanilla_backward_batch(rep, x[None, :], dl_dr[None])[0]
