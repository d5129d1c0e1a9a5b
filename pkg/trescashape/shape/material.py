"""Directional material derivative ū′ of the discrete Tresca solution and the shape derivative u′ = ū′ − ∇uθ.

ū′ is the derivative of the nodal solution under the vertex motion x ↦ x + tθ. Differentiating the discrete
equilibrium K u = F + r (r the boundary traction forces) gives K ū′ = Ḟ − K̇u + ṙ, where at the Tresca nodes
ṙ = ∇θ r + w p(θ)(s_τ/g) τ + ν τ, and −K̇u + ∇θ r carries the Neumann data ξ^m(θ) in weak form. Strictly
sticking nodes keep ū′·τ = −(∇θᵀu)·τ with a free multiplier ν; slipping nodes have ν = 0; threshold nodes choose
between the two by an active-set loop.
"""
import numpy as np
from typing import Dict, List, NamedTuple, Optional

from trescashape.contact.problem import ProblemData
from trescashape.contact.state import ContactMode, ContactState
from trescashape.contact.switching import DiscreteProblem
from trescashape.exceptions import ActiveSetNonConvergenceException, TrescaShapeException
from trescashape.fem.assembly import MIDPOINT_BARYCENTRIC, element_dofs, midpoint_quadrature
from trescashape.fem.calculus import element_gradients, lame_stress, nodal_gradients
from trescashape.fem.fields import VectorField
from trescashape.fem.sources import evaluate_vector, fd_step, vector_gradient
from trescashape.fem.traction import nodal_residual
from trescashape.mesh.mesh import Mesh
from trescashape.shape.derivative_data import derivative_data
from trescashape.utils import logger


class ShapeDerivative(NamedTuple):
    u_prime: VectorField
    w: VectorField


def _scatter(mesh: Mesh, local: np.ndarray) -> np.ndarray:
    out = np.zeros(2 * mesh.n_vertices)
    np.add.at(out, element_dofs(mesh).ravel(), local.reshape(-1))
    return out


def load_rate(mesh: Mesh, problem: ProblemData, theta: VectorField) -> np.ndarray:
    """Ḟ: derivative of the midpoint-rule load vector, ∫(divθ f + ∇f θ)φ_k."""
    points, weights = midpoint_quadrature(mesh)
    pts = points.reshape(-1, 2)
    nt = mesh.n_triangles
    fq = evaluate_vector(problem.f, pts).reshape(nt, 3, 2)
    grad_f = vector_gradient(problem.f, pts, fd_step(mesh.diameter)).reshape(nt, 3, 2, 2)
    Gt = element_gradients(mesh, theta)
    div = Gt[:, 0, 0] + Gt[:, 1, 1]
    theta_q = np.einsum("qk,tkc->tqc", MIDPOINT_BARYCENTRIC, theta.values[mesh.triangles])
    integrand = div[:, None, None] * fq + np.einsum("tqab,tqb->tqa", grad_f, theta_q)
    return _scatter(mesh, np.einsum("tq,qk,tqc->tkc", weights, MIDPOINT_BARYCENTRIC, integrand))


def stiffness_rate_action(mesh: Mesh, problem: ProblemData, u: VectorField, theta: VectorField) -> np.ndarray:
    """K̇u: Σ_T |T| (divθ σ − A(∇u∇θ) − σ∇θᵀ) ∇φ_k."""
    Gu = element_gradients(mesh, u)
    Gt = element_gradients(mesh, theta)
    div = Gt[:, 0, 0] + Gt[:, 1, 1]
    sigma = lame_stress(Gu, problem.mu, problem.lam)
    M = div[:, None, None] * sigma - lame_stress(Gu @ Gt, problem.mu, problem.lam) - sigma @ np.swapaxes(Gt, 1, 2)
    return _scatter(mesh, np.einsum("t,tac,tkc->tka", mesh.triangle_areas, M, mesh.basis_gradients))


def neumann_rate(mesh: Mesh, theta: VectorField, residual: np.ndarray) -> np.ndarray:
    """(n_tresca, 2): ∇θ r at the Tresca nodes, residual the (n_tresca, 2) traction forces r = K u − F there."""
    Gt = nodal_gradients(mesh, theta)[mesh.tresca_nodes]
    return np.einsum("iab,ib->ia", Gt, residual)


def solve_material_derivative(
    mesh: Mesh,
    problem: ProblemData,
    u0: VectorField,
    state: ContactState,
    theta: VectorField,
    max_iter: Optional[int] = None,
    tol: float = 1e-10,
) -> VectorField:
    u0.check_mesh(mesh)
    theta.check_mesh(mesh)
    if not state.compatible_with(mesh) or state.mesh_token != mesh.token:
        raise TrescaShapeException("contact state was computed on a different mesh")
    max_iter = max_iter if max_iter is not None else problem.max_switch_iters

    dp = DiscreteProblem.assemble(mesh, problem)
    data = derivative_data(mesh, problem, u0, state, theta)

    frame = mesh.frame
    pos, nodes = mesh.tresca_positions, mesh.tresca_nodes
    tau, w = frame.tangents[pos], frame.weights[pos]
    r = nodal_residual(mesh, u0, dp.stiffness, dp.load).reshape(-1, 2)

    rhs = (load_rate(mesh, problem, theta) - stiffness_rate_action(mesh, problem, u0, theta)).reshape(-1, 2)
    rhs[nodes] += neumann_rate(mesh, theta, r[nodes]) + data.friction_rate(w)
    rhs = rhs.reshape(-1)
    target = -data.offsets

    strict = np.flatnonzero(state.modes == ContactMode.STICK_STRICT)
    boundary = np.flatnonzero(state.modes == ContactMode.STICK_BOUNDARY)
    # μ0 = −s_τ/g, the sign of the friction multiplier on threshold nodes
    mu0_b = -np.einsum("ia,ia->i", data.multiplier_direction[boundary], tau[boundary])
    constrained = np.ones(len(boundary), dtype=bool)
    trace: List[Dict] = []
    for it in range(max_iter + 1):
        system = dp.system(rhs.copy())
        for k in np.concatenate([strict, boundary[constrained]]):
            system.fix_direction(nodes[k], tau[k], target[k])
        ud = dp.solve(system)
        if len(boundary) == 0:
            return ud

        res = (dp.stiffness @ ud.flat - rhs).reshape(-1, 2)[nodes[boundary]]
        kb = boundary
        mu_dot = -np.einsum("ia,ia->i", res, tau[kb]) / (state.g[kb] * w[kb])
        q = np.einsum("ia,ia->i", ud.values[nodes[kb]], tau[kb]) - target[kb]
        scale = 1.0 + max(float(np.max(np.abs(mu_dot))), float(np.max(np.abs(q))))
        release = constrained & (mu_dot * mu0_b > tol * scale)
        lock = ~constrained & (q * mu0_b < -tol * scale)
        trace.append({"iteration": it, "constrained": int(constrained.sum()), "release": int(release.sum()), "lock": int(lock.sum())})
        logger.fs.debug(f"[solve_material_derivative] {trace[-1]}")
        if not (release.any() or lock.any()):
            return ud
        constrained = (constrained & ~release) | lock
    raise ActiveSetNonConvergenceException(f"active set did not settle within {max_iter} iterations", trace=trace)


def shape_derivative(mesh: Mesh, u0: VectorField, ubar_prime: VectorField, theta: VectorField) -> ShapeDerivative:
    """u′ = ū′ − ∇uθ and W(θ) = −∇θᵀu − ∇uθ, with recovered nodal gradients."""
    ubar_prime.check_mesh(mesh)
    Gu = nodal_gradients(mesh, u0)
    Gt = nodal_gradients(mesh, theta)
    transport = np.einsum("iab,ib->ia", Gu, theta.values)
    u_prime = VectorField.on(mesh, ubar_prime.values - transport)
    w = VectorField.on(mesh, -np.einsum("iab,ia->ib", Gt, u0.values) - transport)
    return ShapeDerivative(u_prime=u_prime, w=w)
