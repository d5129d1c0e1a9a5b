import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from typing import List, NamedTuple, Optional, Tuple

from trescashape.contact.energy import energy
from trescashape.contact.problem import ProblemData
from trescashape.contact.switching import solve_tresca
from trescashape.exceptions import DeformationException, DeformationStallException
from trescashape.mesh.mesh import Mesh, area, deform, mesh_quality, relax_interior
from trescashape.optimizer.config import OptimConfig
from trescashape.optimizer.hooks import EmptyOptimizationHook, OptimizationHook
from trescashape.shape.descent import deformation_direction
from trescashape.shape.gradient import LinearShapeFunctional, boundary_form_functional, volume_form_functional
from trescashape.utils import logger
from trescashape.utils.timer import Timer

HISTORY_CSV_COLUMNS = ["iter", "J", "volume", "multiplier", "step", "switch_iters", "min_angle"]


class IterationRecord(NamedTuple):
    """One solved iterate Ω_k, k = 0 for the initial shape; step is the step that produced it (0 at k = 0), min_angle in degrees."""

    iter: int
    J: float
    volume: float
    multiplier: float
    step: float
    switch_iters: int
    min_angle: float


@dataclass
class OptimHistory:
    records: List[IterationRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, index) -> IterationRecord:
        return self.records[index]

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.J for r in self.records])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r._asdict() for r in self.records], columns=HISTORY_CSV_COLUMNS)


def stopping_check(history: OptimHistory, cfg: OptimConfig) -> bool:
    """At iteration k = W·j (j ≥ 1, the initial shape being iteration 0), compare 𝒥 at iterations W·j and W·(j−1)."""
    k = len(history) - 1
    if k < cfg.window or k % cfg.window != 0:
        return False
    return abs(history[k].J - history[k - cfg.window].J) < cfg.delta_j


def volume_constraint_gradient(mesh: Mesh) -> LinearShapeFunctional:
    """θ ↦ ∫_Γ θ·n ds with nodal arc weights, zero at Dirichlet nodes."""
    frame = mesh.frame
    coef = np.zeros((mesh.n_vertices, 2))
    coef[frame.nodes] = frame.weights[:, None] * frame.normals
    coef[mesh.dirichlet_nodes] = 0.0
    return LinearShapeFunctional.on(mesh, {"volume": coef.reshape(-1)})


def _energy_gradient(mesh: Mesh, problem: ProblemData, u, state, cfg: OptimConfig) -> LinearShapeFunctional:
    if cfg.gradient_form == "boundary":
        return boundary_form_functional(mesh, problem, u, state)
    return volume_form_functional(mesh, problem, u, state)


def run_optimization(
    mesh0: Mesh, problem: ProblemData, cfg: OptimConfig, hook: Optional[OptimizationHook] = None
) -> Tuple[Mesh, OptimHistory]:
    """Uzawa descent on 𝒥(Ω) + ℓ(|Ω| − V*) (+ penalty/2 (|Ω| − V*)²) with H1 descent directions.

    Accepted meshes whose minimum angle falls below cfg.relax_angle_deg get their interior vertices relaxed.
    """
    hook = hook if hook is not None else EmptyOptimizationHook()
    step0 = cfg.step0 if cfg.step0 is not None else 0.1 * mesh0.h_mean
    floor = cfg.min_angle
    initial_angle = mesh_quality(mesh0).min_angle
    if initial_angle < floor:
        logger.fs.warning(f"[run_optimization] initial mesh min angle {math.degrees(initial_angle):.3f}° is below the floor")

    mesh, state = mesh0, None
    ell, step = cfg.ell0, 0.0
    history = OptimHistory()
    hook.on_start(mesh, cfg.max_iters)
    try:
        for k in range(cfg.max_iters):
            with Timer(f"optimization iteration {k}"):
                u, state = solve_tresca(mesh, problem, warm_start=state)
                volume = area(mesh)
                quality = mesh_quality(mesh)
                record = IterationRecord(
                    iter=k,
                    J=energy(mesh, problem, u),
                    volume=volume,
                    multiplier=ell,
                    step=step,
                    switch_iters=state.switch_iters,
                    min_angle=math.degrees(quality.min_angle),
                )
                history.records.append(record)
                logger.fs.debug(f"[run_optimization] {record}")
                hook.on_iteration(record)
                if cfg.snapshot_every and k % cfg.snapshot_every == 0:
                    hook.on_snapshot(k, mesh, u)
                if stopping_check(history, cfg) or k == cfg.max_iters - 1:
                    break

                weight = ell + cfg.penalty * (volume - cfg.target_volume)
                functional = _energy_gradient(mesh, problem, u, state, cfg).plus(volume_constraint_gradient(mesh), weight=weight)
                theta = deformation_direction(mesh, functional, motion=cfg.mesh_motion)
                peak = float(np.max(np.abs(theta.values)))
                if peak <= 1e-14 * mesh.diameter:
                    logger.fs.info(f"[run_optimization] descent direction vanished at iteration {k}")
                    break
                direction = theta.scaled(1.0 / peak)

                t, accepted = step0, None
                angle_floor = min(floor, quality.min_angle)
                for _ in range(cfg.max_shrinks + 1):
                    try:
                        candidate = deform(mesh, direction, t)
                    except DeformationException as e:
                        logger.fs.debug(f"[run_optimization] step {t:.3e} rejected: {e}")
                    else:
                        if mesh_quality(candidate).min_angle >= angle_floor:
                            accepted = candidate
                            break
                    t *= cfg.shrink
                if accepted is None:
                    raise DeformationStallException(
                        f"no admissible step after {cfg.max_shrinks} reductions of {step0:.3e} at iteration {k}", history=history
                    )
                if mesh_quality(accepted).min_angle < cfg.relax_angle:
                    accepted = relax_interior(accepted)
                mesh, step = accepted, t
                ell = ell + cfg.rho * (area(mesh) - cfg.target_volume)
    finally:
        hook.on_finish(history)
    return mesh, history
