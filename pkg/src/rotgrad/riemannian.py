"""Losses on SO(3) and the Riemannian gradient-descent step.

The update never differentiates through a projection: the Euclidean loss
gradient dL/dR is projected onto the tangent space at R (components along the
body-frame generators R @ hat(e_k)) and one geodesic step of size tau gives
the goal rotation.

For losses whose Riemannian gradient norm is proportional to the distance to
the optimum there is a closed-form converging step size ``tau_converge_for``:
1/4 for the squared-Frobenius loss, 1/2 for the squared-geodesic loss.  Point
losses (flow, chamfer) have no such constant and the caller must supply tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import so3


class NoAnalyticTauError(ValueError):
    """Requested the closed-form converging step size of a loss that has none."""


@dataclass(frozen=True)
class L2Frobenius:
    """L(R) = ||R - r_gt||_F^2."""
    r_gt: np.ndarray


@dataclass(frozen=True)
class GeodesicSquared:
    """L(R) = d(R, r_gt)^2 with d the geodesic (angular) distance."""
    r_gt: np.ndarray


@dataclass(frozen=True)
class Flow:
    """L(R) = ||R X - r_gt X||_F^2 over a canonical point set X (3, N)."""
    r_gt: np.ndarray
    points: np.ndarray
    gram: np.ndarray = field(default=None, repr=False)  # X X^T, cached

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] != 3 or pts.shape[1] > 4096:
            raise ValueError(f"flow points must be (3, N<=4096), got {pts.shape}")
        object.__setattr__(self, 'points', pts)
        object.__setattr__(self, 'gram', pts @ pts.T)


@dataclass(frozen=True)
class Chamfer:
    """Symmetric Chamfer distance between ``canonical`` and R^T @ observed.

    Both point sets are (N, 3) with N <= 4096; correspondences are recomputed
    at every evaluation and held fixed inside the subgradient.
    """
    canonical: np.ndarray
    observed: np.ndarray

    def __post_init__(self):
        for name in ("canonical", "observed"):
            pts = np.asarray(getattr(self, name), dtype=np.float64)
            if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] > 4096:
                raise ValueError(f"chamfer {name} must be (N<=4096, 3), got {pts.shape}")
            object.__setattr__(self, name, pts)


LossKind = Union[L2Frobenius, GeodesicSquared, Flow, Chamfer]


def _chamfer_pairs(loss: Chamfer, r: np.ndarray):
    """Nearest-neighbor matches between canonical Z and back-rotated observations."""
    y = loss.observed @ r  # row j is r^T @ observed[j]
    z = loss.canonical
    d2 = ((z[:, None, :] - y[None, :, :]) ** 2).sum(-1)  # (K, M)
    return y, d2, d2.argmin(axis=1), d2.argmin(axis=0)


def loss_value(loss: LossKind, r) -> float:
    r = np.asarray(r, dtype=np.float64)
    if isinstance(loss, L2Frobenius):
        return float(((r - loss.r_gt) ** 2).sum())
    if isinstance(loss, GeodesicSquared):
        return so3.geodesic_distance(r, loss.r_gt) ** 2
    if isinstance(loss, Flow):
        d = (r - loss.r_gt) @ loss.points
        return float((d * d).sum())
    if isinstance(loss, Chamfer):
        _, d2, jz, iy = _chamfer_pairs(loss, r)
        k, m = d2.shape
        return float(d2[np.arange(k), jz].mean() + d2[iy, np.arange(m)].mean())
    raise TypeError(f"unknown loss {type(loss).__name__}")


def euclid_grad(loss: LossKind, r) -> np.ndarray:
    """Euclidean gradient dL/dR, treating R as nine free entries."""
    r = np.asarray(r, dtype=np.float64)
    if isinstance(loss, L2Frobenius):
        return 2.0 * (r - loss.r_gt)
    if isinstance(loss, GeodesicSquared):
        theta = so3.geodesic_distance(r, loss.r_gt)
        if theta > math.pi - 1e-9:
            raise ValueError("squared-geodesic gradient is undefined at the cut locus")
        # d/dR of acos((tr(r_gt^T R) - 1) / 2) squared
        factor = 1.0 + theta * theta / 6.0 if theta < 1e-6 else theta / math.sin(theta)
        return -factor * loss.r_gt
    if isinstance(loss, Flow):
        return 2.0 * (r - loss.r_gt) @ loss.gram
    if isinstance(loss, Chamfer):
        y, _, jz, iy = _chamfer_pairs(loss, r)
        k, m = len(loss.canonical), len(loss.observed)
        # each matched term ||z - r^T xobs||^2 contributes -2 xobs (z - y)^T
        e_z = loss.canonical - y[jz]            # (K, 3)
        e_y = loss.canonical[iy] - y            # (M, 3)
        return (-2.0 / k) * loss.observed[jz].T @ e_z + (-2.0 / m) * loss.observed.T @ e_y
    raise TypeError(f"unknown loss {type(loss).__name__}")


def riemannian_grad(r, dl_dr) -> np.ndarray:
    """Tangent components of dL/dR at R: phi_k = <dL/dR, R @ hat(e_k)>."""
    c = np.asarray(r).T @ np.asarray(dl_dr)
    return np.array([c[2, 1] - c[1, 2], c[0, 2] - c[2, 0], c[1, 0] - c[0, 1]])


def goal_rotation(r, phi_grad, tau: float) -> np.ndarray:
    """One Riemannian gradient-descent step of size tau from R."""
    return so3.exp_so3(r, -tau * np.asarray(phi_grad, dtype=np.float64))


def tau_converge_for(loss) -> float:
    """Step size that lands exactly on the optimum as the error goes to zero."""
    if isinstance(loss, L2Frobenius) or loss is L2Frobenius:
        return 0.25
    if isinstance(loss, GeodesicSquared) or loss is GeodesicSquared:
        return 0.5
    name = loss.__name__ if isinstance(loss, type) else type(loss).__name__
    raise NoAnalyticTauError(f"{name} has no analytic converging step size; supply tau explicitly")


def tau_gt_l2(theta: float) -> float:
    """Exact per-sample step size landing on the target under the squared-
    Frobenius loss at angular error theta: theta / (4 sin theta)."""
    if theta >= math.pi:
        raise ValueError("no finite landing step at the cut locus")
    if theta < 1e-4:
        return 0.25 * (1.0 + theta * theta / 6.0)
    return theta / (4.0 * math.sin(theta))


@dataclass(frozen=True)
class TauSchedule:
    """Staircase ramp from tau_init to tau_converge over total_iters."""
    tau_init: float
    tau_converge: float
    total_iters: int
    n_steps: int = 10

    def __post_init__(self):
        if self.n_steps < 1 or self.total_iters < 0:
            raise ValueError("schedule needs n_steps >= 1 and total_iters >= 0")


def tau_at(schedule: TauSchedule, iteration: int) -> float:
    """Step size at an iteration: piecewise-constant, clamped at tau_converge."""
    if schedule.n_steps == 1 or schedule.total_iters == 0:
        return schedule.tau_converge
    s = (iteration * schedule.n_steps) // schedule.total_iters
    s = min(s, schedule.n_steps - 1)
    tau = schedule.tau_init + s * (schedule.tau_converge - schedule.tau_init) / (schedule.n_steps - 1)
    lo, hi = sorted((schedule.tau_init, schedule.tau_converge))
    return min(max(tau, lo), hi)
