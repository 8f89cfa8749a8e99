"""Iterative local greedy search over the 7 pose parameters.

Starting from a (typically human-provided) pose, the search repeatedly sweeps
the parameters in the fixed order (azimuth, elevation, in-plane, depth, focal,
principal u, principal v).  For each parameter both the +step and -step
candidates are rendered and scored by silhouette IoU against the reference
mask, and the pose greedily moves to whichever of {current, plus, minus}
scores best.  A sweep that fails to improve the IoU halves the step scale;
the search converges once the scale drops to the configured threshold.  The
accepted IoU sequence is non-decreasing by construction, so the search always
reaches a local optimum of the overlap objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .camera import PoseParams
from .mesh import TriangleMesh
from .rasterizer import BinaryMask, render_silhouette
from .segmentation import NoReferenceError, iou

SWEEP_ORDER = ("azimuth_deg", "elevation_deg", "inplane_deg",
               "depth", "focal", "principal_u", "principal_v")


class DegenerateInitializationError(ValueError):
    """The mesh rendered empty at the initial pose and at every first-sweep candidate."""


@dataclass(frozen=True)
class RefinerConfig:
    """Search hyperparameters.

    epsilon holds the per-parameter update units in sweep order: degrees for
    the three angles, world units for depth, pixels for focal and the
    principal point.  The effective step for parameter i is alpha * epsilon[i]
    with alpha starting at alpha0 and halving on stalled sweeps down to
    alpha_threshold.
    """

    epsilon: tuple[float, float, float, float, float, float, float]
    alpha0: float = 4.0
    alpha_threshold: float = 0.125
    max_sweeps: int = 50

    def __post_init__(self):
        eps = tuple(float(x) for x in self.epsilon)
        if len(eps) != 7:
            raise ValueError(f"epsilon must have 7 components, got {len(eps)}")
        if any(x <= 0.0 or not math.isfinite(x) for x in eps):
            raise ValueError(f"epsilon components must be positive, got {eps}")
        if not 0.0 < self.alpha_threshold < self.alpha0:
            raise ValueError(
                f"need 0 < alpha_threshold < alpha0, got {self.alpha_threshold} vs {self.alpha0}")
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps}")
        object.__setattr__(self, "epsilon", eps)

    @classmethod
    def for_initial_pose(cls, initial: PoseParams, **overrides) -> "RefinerConfig":
        """Default units: 1 degree per angle, 2% of the initial depth and
        focal, 2 pixels for the principal point."""
        eps = (1.0, 1.0, 1.0, 0.02 * initial.depth, 0.02 * initial.focal, 2.0, 2.0)
        return cls(epsilon=eps, **overrides)

    def max_stalled_sweeps(self) -> int:
        """Halvings needed to bring alpha0 down to alpha_threshold."""
        return math.ceil(math.log2(self.alpha0 / self.alpha_threshold))


@dataclass(frozen=True)
class RefineResult:
    pose: PoseParams
    iou_initial: float
    iou_final: float
    sweeps: int
    trajectory: tuple[tuple[int, float], ...] = field(default_factory=tuple)
    converged: bool = False
    evaluations: int = 0  # candidate evaluations, 14 per sweep
    final_alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "trajectory", tuple((int(s), float(j)) for s, j in self.trajectory))


def objective(mesh: TriangleMesh, pose: PoseParams, reference: BinaryMask) -> float:
    """J(p) = IoU between the rendered silhouette and the reference mask."""
    rendered = render_silhouette(mesh, pose, reference.width, reference.height)
    return iou(rendered, reference)


def _candidate_valid(vec: np.ndarray) -> bool:
    # mirrors PoseParams invariants: rejected candidates count as IoU -inf
    if not np.isfinite(vec).all():
        return False
    a, e, t, d, f, u, v = vec
    return d > 0.0 and f > 0.0 and -90.0 <= e <= 90.0


def refine(mesh: TriangleMesh, initial: PoseParams, reference: BinaryMask,
           config: RefinerConfig | None = None) -> RefineResult:
    """Run the local greedy pose search and return the refined pose.

    Ties keep the current pose; between equally improving +/- candidates the
    + candidate wins.  Candidates violating the pose domain are rejected as if
    they scored -inf.  Angles are re-normalized after every accepted move.
    """
    if reference.area() == 0:
        raise NoReferenceError("reference mask is empty")
    if config is None:
        config = RefinerConfig.for_initial_pose(initial)

    width, height = reference.width, reference.height
    eps = np.array(config.epsilon)

    def score(pose: PoseParams) -> tuple[float, int]:
        rendered = render_silhouette(mesh, pose, width, height)
        return iou(rendered, reference), rendered.area()

    pose = initial
    vec = pose.as_vector()
    current_iou, area = score(pose)
    saw_nonempty_render = area > 0

    alpha = float(config.alpha0)
    sweeps = 0
    evaluations = 0
    converged = False
    trajectory: list[tuple[int, float]] = [(0, current_iou)]
    iou_initial = current_iou

    while True:
        iou_before_sweep = current_iou
        for dim in range(7):
            # both candidates step from the same pre-dimension pose; the
            # accepted pose then feeds the next dimension (Gauss-Seidel)
            best_iou = current_iou
            best_pose = None
            for sign in (1.0, -1.0):
                evaluations += 1
                cand_vec = vec.copy()
                cand_vec[dim] += sign * alpha * eps[dim]
                if not _candidate_valid(cand_vec):
                    continue
                cand_pose = PoseParams.from_vector(cand_vec)
                cand_iou, cand_area = score(cand_pose)
                if sweeps == 0 and cand_area > 0:
                    saw_nonempty_render = True
                # strict >: ties keep the current pose, and an equal-scoring
                # "-" never displaces the already-accepted "+"
                if cand_iou > best_iou:
                    best_iou = cand_iou
                    best_pose = cand_pose
            if best_pose is not None:
                current_iou = best_iou
                pose = best_pose  # PoseParams re-normalized the angles
                vec = pose.as_vector()
        sweeps += 1
        trajectory.append((sweeps, current_iou))
        if sweeps == 1 and not saw_nonempty_render:
            raise DegenerateInitializationError(
                "mesh renders empty at the initial pose and at every first-sweep candidate")
        if current_iou == iou_before_sweep:
            alpha = alpha / 2.0
            if alpha <= config.alpha_threshold:
                converged = True
                break
        if sweeps >= config.max_sweeps:
            break

    return RefineResult(
        pose=pose,
        iou_initial=iou_initial,
        iou_final=current_iou,
        sweeps=sweeps,
        trajectory=tuple(trajectory),
        converged=converged,
        evaluations=evaluations,
        final_alpha=alpha,
    )
