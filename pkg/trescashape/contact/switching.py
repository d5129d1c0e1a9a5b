"""Iterative switching (primal active-set) solver for the Tresca friction problem.

Each iteration fixes a stick/slip partition of the Tresca nodes: stick nodes carry the directional constraint u·τ = 0,
slip nodes the tangential load −g s w τ, and the normal direction stays traction free. Tractions are recovered from
the residual and the partition is updated from the friction-law violations until it no longer changes.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from typing import List, Optional, Tuple

from trescashape.contact.problem import ProblemData
from trescashape.contact.state import ContactState, stick_modes
from trescashape.exceptions import SwitchingNonConvergenceException
from trescashape.fem.assembly import assemble_elasticity, assemble_load
from trescashape.fem.fields import VectorField
from trescashape.fem.system import SparseSystem, solve_constrained
from trescashape.fem.traction import boundary_traction
from trescashape.mesh.mesh import Mesh
from trescashape.utils import logger
from trescashape.utils.timer import Timer


@dataclass(frozen=True, eq=False)
class DiscreteProblem:
    """Assembled stiffness and volume load of a ProblemData on a mesh."""

    mesh: Mesh
    problem: ProblemData
    stiffness: sp.csr_matrix
    load: np.ndarray

    @classmethod
    def assemble(cls, mesh: Mesh, problem: ProblemData) -> "DiscreteProblem":
        return cls(mesh, problem, assemble_elasticity(mesh, problem.mu, problem.lam), assemble_load(mesh, problem.f))

    def system(self, rhs: Optional[np.ndarray] = None) -> SparseSystem:
        """Elasticity system with u = 0 on the Dirichlet nodes."""
        rhs = self.load.copy() if rhs is None else rhs
        return SparseSystem(self.mesh, self.stiffness, rhs).fix_nodes(self.mesh.dirichlet_nodes)

    def solve(self, system: SparseSystem) -> VectorField:
        return solve_constrained(system, tol=self.problem.linear_tol, method=self.problem.linear_method)


def solve_dirichlet_neumann(mesh: Mesh, problem: ProblemData) -> VectorField:
    """u = 0 on Γ_D, traction free on Γ_T."""
    dp = DiscreteProblem.assemble(mesh, problem)
    return dp.solve(dp.system())


def solve_pure_stick(mesh: Mesh, problem: ProblemData) -> VectorField:
    """u = 0 on Γ_D, u·τ = 0 and zero normal traction on Γ_T."""
    dp = DiscreteProblem.assemble(mesh, problem)
    system = dp.system()
    frame = mesh.frame
    for node, tau in zip(mesh.tresca_nodes, frame.tangents[mesh.tresca_positions]):
        system.fix_direction(node, tau)
    return dp.solve(system)


def _solve_partition(dp: DiscreteProblem, is_slip: np.ndarray, signs: np.ndarray, g: np.ndarray) -> VectorField:
    mesh = dp.mesh
    frame = mesh.frame
    pos, nodes = mesh.tresca_positions, mesh.tresca_nodes
    tau, w = frame.tangents[pos], frame.weights[pos]

    rhs = dp.load.copy().reshape(-1, 2)
    slip = np.flatnonzero(is_slip)
    rhs[nodes[slip]] += -(g[slip] * signs[slip] * w[slip])[:, None] * tau[slip]
    system = dp.system(rhs.reshape(-1))
    for k in np.flatnonzero(~is_slip):
        system.fix_direction(nodes[k], tau[k])
    return dp.solve(system)


def _partition_key(is_slip: np.ndarray, signs: np.ndarray) -> bytes:
    return (np.where(is_slip, signs, 0).astype(np.int8)).tobytes()


def solve_tresca(mesh: Mesh, problem: ProblemData, warm_start: Optional[ContactState] = None) -> Tuple[VectorField, ContactState]:
    g = problem.threshold(mesh)
    dp = DiscreteProblem.assemble(mesh, problem)
    frame = mesh.frame
    pos, nodes = mesh.tresca_positions, mesh.tresca_nodes
    tau = frame.tangents[pos]

    if warm_start is not None and warm_start.compatible_with(mesh):
        is_slip, signs = warm_start.is_slip.copy(), warm_start.slip_signs.astype(np.int64).copy()
    else:
        if warm_start is not None:
            logger.fs.warning("[solve_tresca] warm start ignored: Tresca node numbering differs")
        is_slip, signs = np.zeros(len(nodes), dtype=bool), np.ones(len(nodes), dtype=np.int64)

    seen = set()
    history: List[np.ndarray] = []
    switches = 0
    with Timer(f"solve_tresca on {mesh.n_vertices} vertices"):
        while True:
            seen.add(_partition_key(is_slip, signs))
            history.append(np.where(is_slip, signs, 0))
            u = _solve_partition(dp, is_slip, signs, g)
            traction = boundary_traction(mesh, u, problem.mu, problem.lam, dp.load, stiffness=dp.stiffness)
            s_tau = traction.s_tau
            u_tau = np.einsum("ia,ia->i", u.values[nodes], tau)

            to_slip = ~is_slip & (np.abs(s_tau) > g * (1.0 + problem.switching_tol))
            to_stick = is_slip & (u_tau * signs < 0)
            logger.fs.debug(
                f"[solve_tresca] iteration {switches}: {int(is_slip.sum())} slip / {int((~is_slip).sum())} stick, "
                f"{int(to_slip.sum())} to slip, {int(to_stick.sum())} to stick"
            )
            if not (to_slip.any() or to_stick.any()):
                break
            if switches >= problem.max_switch_iters:
                raise SwitchingNonConvergenceException(
                    f"switching did not converge within {problem.max_switch_iters} partition updates", partition_history=history
                )

            new_slip, new_signs = is_slip.copy(), signs.copy()
            new_slip[to_slip], new_signs[to_slip] = True, np.where(s_tau[to_slip] > 0, -1, 1)
            new_slip[to_stick] = False
            if _partition_key(new_slip, new_signs) in seen:
                # cycling: switch only the worst node
                u_scale = max(float(np.max(np.abs(u_tau))), 1e-300)
                violation = np.full(len(nodes), -np.inf)
                violation[to_slip] = np.abs(s_tau[to_slip]) / g[to_slip] - 1.0
                violation[to_stick] = -u_tau[to_stick] * signs[to_stick] / u_scale
                k = int(np.argmax(violation))
                new_slip, new_signs = is_slip.copy(), signs.copy()
                new_slip[k] = not is_slip[k]
                if new_slip[k]:
                    new_signs[k] = -1 if s_tau[k] > 0 else 1
                logger.fs.debug(f"[solve_tresca] partition repeats, switching node {int(nodes[k])} alone")
            is_slip, signs = new_slip, new_signs
            switches += 1

    stick = ~is_slip
    signs = np.where(stick, np.where(s_tau > 0, -1, 1), signs)
    u_tau = np.where(stick, 0.0, u_tau)
    state = ContactState(
        mesh_token=mesh.token,
        nodes=nodes.copy(),
        modes=stick_modes(is_slip, s_tau, g, problem.eps_slip),
        slip_signs=signs.astype(np.int64),
        traction=traction,
        g=g,
        u_tau=u_tau,
        switch_iters=switches,
    )
    logger.fs.debug(f"[solve_tresca] converged after {switches} switches, {int(is_slip.sum())} slip nodes")
    return u, state
