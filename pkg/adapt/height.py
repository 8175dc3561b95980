"""
Height search over rotations

h(phi) is the supremum of the Newton distance over coordinate systems. For
the convex finite-line-type graphs handled here rotations suffice, so the
search maximizes d(phi o R) over R in SO(3). d is piecewise constant in R and
its maximum usually sits on a lower-dimensional set, so the multistart is
seeded with the identity and with Hessian eigenframes (kernel directions
last) before the seeded random rotations; each start is then refined by
coordinate-wise rotations with a shrinking angle.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from polyalg import LinearChange, Polynomial, compose_linear
from newton import DistanceResult, build_polyhedron, distance, support
from tool.schema import format_rational, format_real

logger = logging.getLogger(__name__)

DEFAULT_STARTS = 64
DEFAULT_ITERS = 40
DEFAULT_PRUNE_TOL = 1e-10
INITIAL_STEP = 0.5
FINAL_STEP = 5e-5
FRAME_SWEEP = 8

# coordinate planes used by the refinement, as (i, j) index pairs
REFINEMENT_PLANES = ((1, 2), (0, 2), (0, 1))


@dataclass(frozen=True)
class HeightResult:
    """Best Newton distance found over rotations"""
    h: Fraction
    maximizer: LinearChange
    d_original: Fraction
    certified: bool
    trace: Tuple[Tuple[Tuple[float, ...], Fraction], ...]
    distance: DistanceResult

    def to_dict(self) -> dict:
        return {
            'h': format_rational(self.h),
            'd_original': format_rational(self.d_original),
            'certified': self.certified,
            'rotation': [[format_real(v) for v in row] for row in self.maximizer.matrix],
            'principal_face_dim': self.distance.principal_face_dim,
            'trace': [
                {'rotvec': [format_real(v) for v in rotvec], 'd': format_rational(d)}
                for rotvec, d in self.trace
            ],
        }


class HeightSearch:
    """Multistart maximization of d(phi o R) over rotations R"""

    def __init__(self, phi: Polynomial, prune_tol: float = DEFAULT_PRUNE_TOL,
                 initial_step: float = INITIAL_STEP, final_step: float = FINAL_STEP,
                 frame_sweep: int = FRAME_SWEEP):
        """
        Initialize HeightSearch

        Args:
            phi: Polynomial in three variables
            prune_tol: Relative coefficient threshold applied after each rotation
            initial_step: First refinement angle (radians)
            final_step: Last refinement angle (radians)
            frame_sweep: Angles swept about the eigenframe axes

        Raises:
            ValueError: If phi does not have three variables
        """
        if phi.nvars != 3:
            raise ValueError(f"Height search works over SO(3); got {phi.nvars} variables")
        if phi.constant_term != 0:
            logger.warning(f"Dropping constant term {phi.constant_term:g} before the height search")
            phi = phi - phi.constant_term
        support(phi)  # raises EmptySupportError early
        self.phi = phi
        self.prune_tol = prune_tol
        self.initial_step = initial_step
        self.final_step = final_step
        self.frame_sweep = frame_sweep

    # ------------------------------------------------------------------
    # Objective
    # ------------------------------------------------------------------

    def evaluate(self, rotation: LinearChange) -> DistanceResult:
        """Newton distance of phi in the rotated coordinates"""
        rotated = compose_linear(self.phi, rotation, prune_tol=self.prune_tol)
        return distance(build_polyhedron(support(rotated)))

    # ------------------------------------------------------------------
    # Starts
    # ------------------------------------------------------------------

    def seed_rotations(self) -> List[LinearChange]:
        """Identity, Hessian eigenframe and frame sweeps about its first and last axes"""
        seeds = [LinearChange.identity(3)]
        frame = self._hessian_frame()
        if frame is None:
            return seeds
        seeds.append(frame)
        for k in range(1, self.frame_sweep):
            angle = k * np.pi / self.frame_sweep
            seeds.append(frame @ LinearChange.axis_rotation(0, 1, angle))
            seeds.append(frame @ LinearChange.axis_rotation(1, 2, angle))
        return seeds

    def _hessian_frame(self) -> Optional[LinearChange]:
        hess = np.zeros((3, 3))
        for term in self.phi.terms:
            if term.degree != 2:
                continue
            idx = [i for i, e in enumerate(term.exponents) for _ in range(e)]
            i, j = idx
            if i == j:
                hess[i, i] = 2.0 * term.coefficient
            else:
                hess[i, j] = hess[j, i] = term.coefficient
        eigenvalues, vectors = np.linalg.eigh(hess)
        frame = vectors[:, np.argsort(-eigenvalues, kind='stable')]
        if np.linalg.det(frame) < 0:
            frame[:, -1] = -frame[:, -1]
        try:
            return LinearChange.from_array(frame)
        except ValueError:
            logger.warning("Hessian eigenframe is singular; skipping frame seeds")
            return None

    # ------------------------------------------------------------------
    # Refinement
    # ------------------------------------------------------------------

    def refine(self, start: LinearChange, iters: int) -> Tuple[LinearChange, DistanceResult]:
        """Coordinate-wise angular ascent; accepts strict improvements only"""
        current = start
        best = self.evaluate(start)
        if iters <= 0:
            return current, best
        shrink = (self.final_step / self.initial_step) ** (1.0 / max(iters - 1, 1))
        step = self.initial_step
        for _ in range(iters):
            for i, j in REFINEMENT_PLANES:
                for sign in (1.0, -1.0):
                    candidate = current @ LinearChange.axis_rotation(i, j, sign * step)
                    result = self.evaluate(candidate)
                    if result.d > best.d:
                        current, best = candidate, result
            step *= shrink
        return current, best

    # ------------------------------------------------------------------
    # Driver
    # ------------------------------------------------------------------

    def run(self, starts: int = DEFAULT_STARTS, iters: int = DEFAULT_ITERS, seed: int = 0,
            workers: int = 1) -> HeightResult:
        """
        Run the multistart search

        Args:
            starts: Number of random starting rotations (>= 1)
            iters: Refinement rounds per start (>= 0)
            seed: Seed for the random starts
            workers: Thread pool size (results do not depend on it)

        Returns:
            HeightResult with the best distance as h
        """
        if starts < 1:
            raise ValueError(f"starts must be at least 1, got {starts}")
        if iters < 0:
            raise ValueError(f"iters must be non-negative, got {iters}")

        d_original = self.evaluate(LinearChange.identity(3)).d
        random_starts = Rotation.random(num=starts, random_state=seed).as_matrix()
        candidates = self.seed_rotations() + [LinearChange.from_array(m) for m in random_starts]
        logger.info(f"Height search: {len(candidates)} starts, {iters} refinement rounds, seed {seed}")

        optima: Dict[int, Tuple[LinearChange, DistanceResult]] = {}
        with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
            future_to_index = {
                executor.submit(self.refine, candidate, iters): index
                for index, candidate in enumerate(candidates)
            }
            for future in as_completed(future_to_index):
                optima[future_to_index[future]] = future.result()

        best_index = min(optima, key=lambda k: (-optima[k][1].d, k))
        maximizer, best = optima[best_index]
        trace = tuple(
            (tuple(float(v) for v in Rotation.from_matrix(optima[k][0].array).as_rotvec()), optima[k][1].d)
            for k in sorted(optima)
        )
        logger.info(f"Height search: d_original = {d_original}, h = {best.d} (start {best_index})")
        return HeightResult(
            h=best.d,
            maximizer=maximizer,
            d_original=d_original,
            certified=best.compact_principal_facet,
            trace=trace,
            distance=best,
        )


def height_search(p: Polynomial, starts: int = DEFAULT_STARTS, iters: int = DEFAULT_ITERS,
                  seed: int = 0, prune_tol: float = DEFAULT_PRUNE_TOL, workers: int = 1) -> HeightResult:
    """Best Newton distance of p over rotations; a certified lower bound for the height"""
    return HeightSearch(p, prune_tol=prune_tol).run(starts=starts, iters=iters, seed=seed, workers=workers)
