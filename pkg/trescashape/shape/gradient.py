"""Shape gradient of the Tresca energy in its volume (duality) form and its boundary form.

Both forms are linear in θ at fixed (u, ContactState); each is assembled once as named coefficient vectors over the
interleaved nodal dofs, so evaluating a direction is a dot product per term.
"""
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from typing import Dict, List, Optional

from trescashape.contact.problem import ProblemData
from trescashape.contact.state import ContactMode, ContactState
from trescashape.contact.switching import DiscreteProblem
from trescashape.exceptions import TrescaShapeException
from trescashape.fem.assembly import GAUSS2_POINTS, GAUSS2_WEIGHTS, MIDPOINT_BARYCENTRIC, element_dofs, midpoint_quadrature
from trescashape.fem.calculus import element_gradients, lame_stress, nodal_gradients, recovered_gradient_operator
from trescashape.fem.fields import VectorField
from trescashape.fem.sources import evaluate_scalar, evaluate_vector, fd_step, scalar_gradient
from trescashape.fem.traction import nodal_residual
from trescashape.mesh.frame import normal_component_operator, rotation_rate_operator, stretch_rate_operator, tangential_transport_operator
from trescashape.mesh.mesh import BoundaryTag, Mesh
from trescashape.shape.derivative_data import contract_gradient_rows, p_theta_operator

BOUNDARY_RECOVERIES = ("traction", "average")


@dataclass(frozen=True, eq=False)
class LinearShapeFunctional:
    """θ ↦ Σ_terms c_term · θ over interleaved dofs; term order is the summation order."""

    mesh_token: str
    terms: Dict[str, np.ndarray]

    @classmethod
    def on(cls, mesh: Mesh, terms: Dict[str, np.ndarray]) -> "LinearShapeFunctional":
        n = 2 * mesh.n_vertices
        checked = {}
        for name, c in terms.items():
            c = np.asarray(c, dtype=float).reshape(-1)
            if c.shape != (n,):
                raise TrescaShapeException(f"term {name} has {c.shape[0]} coefficients, expected {n}")
            checked[name] = c
        return cls(mesh.token, checked)

    @property
    def coefficients(self) -> np.ndarray:
        total = None
        for c in self.terms.values():
            total = c.copy() if total is None else total + c
        return total

    def evaluate_terms(self, theta: VectorField) -> Dict[str, float]:
        if theta.mesh_token != self.mesh_token:
            raise TrescaShapeException("direction belongs to a different mesh than the functional")
        x = theta.flat
        return {name: float(c @ x) for name, c in self.terms.items()}

    def __call__(self, theta: VectorField) -> float:
        total = 0.0
        for value in self.evaluate_terms(theta).values():
            total += value
        return total

    def plus(self, other: "LinearShapeFunctional", weight: float = 1.0) -> "LinearShapeFunctional":
        if other.mesh_token != self.mesh_token:
            raise TrescaShapeException("cannot combine functionals on different meshes")
        terms = dict(self.terms)
        for name, c in other.terms.items():
            terms[name] = terms[name] + weight * c if name in terms else weight * c
        return LinearShapeFunctional(self.mesh_token, terms)


def _scatter_local(mesh: Mesh, local: np.ndarray) -> np.ndarray:
    """Sum (nt, 3, 2) per-element coefficients into a (2nv,) vector."""
    out = np.zeros(2 * mesh.n_vertices)
    np.add.at(out, element_dofs(mesh).ravel(), local.reshape(-1))
    return out


def _slip_mask(mesh: Mesh, u0: VectorField, state: Optional[ContactState]) -> np.ndarray:
    if state is not None:
        return state.modes == ContactMode.SLIP
    tau = mesh.frame.tangents[mesh.tresca_positions]
    u_tau = np.abs(np.einsum("ia,ia->i", u0.values[mesh.tresca_nodes], tau))
    scale = float(np.max(np.abs(u0.values))) if u0.values.size else 0.0
    return u_tau > 1e-12 * max(scale, 1e-300)


def volume_form_functional(
    mesh: Mesh, problem: ProblemData, u0: VectorField, state: Optional[ContactState] = None, discrete: Optional[DiscreteProblem] = None
) -> LinearShapeFunctional:
    """∫divθ ½σ:e + ∫f·∇uθ − ∫σ:∇u∇θ − ∫_{Γ_T}θ·n f·u − ⟨σn, ∇θᵀu⟩ + Σ_N p(θ)|u_τ|w."""
    u0.check_mesh(mesh)
    dp = discrete if discrete is not None else DiscreteProblem.assemble(mesh, problem)
    areas, grads = mesh.triangle_areas, mesh.basis_gradients

    Gu = element_gradients(mesh, u0)
    sigma = lame_stress(Gu, problem.mu, problem.lam)
    density = 0.5 * np.einsum("tab,tab->t", sigma, 0.5 * (Gu + np.swapaxes(Gu, 1, 2)))

    divergence_energy = _scatter_local(mesh, (areas * density)[:, None, None] * grads)
    stress_transport = _scatter_local(mesh, -np.einsum("t,tac,tab,tkb->tkc", areas, Gu, sigma, grads))

    points, weights = midpoint_quadrature(mesh)
    fq = evaluate_vector(problem.f, points.reshape(-1, 2)).reshape(mesh.n_triangles, 3, 2)
    load_transport = _scatter_local(mesh, np.einsum("tq,qk,tac,tqa->tkc", weights, MIDPOINT_BARYCENTRIC, Gu, fq))

    # −∫_{Γ_T} θ·n (f·u) ds, two-point Gauss per Tresca edge with the exact edge normal
    boundary_load = np.zeros((mesh.n_vertices, 2))
    edges = mesh.boundary_edges[mesh.edge_tags == BoundaryTag.TRESCA]
    if len(edges):
        xi, xj = mesh.vertices[edges[:, 0]], mesh.vertices[edges[:, 1]]
        ui, uj = u0.values[edges[:, 0]], u0.values[edges[:, 1]]
        d = xj - xi
        length = np.hypot(d[:, 0], d[:, 1])
        normal = np.stack([d[:, 1], -d[:, 0]], axis=1) / length[:, None]
        for s, omega in zip(GAUSS2_POINTS, GAUSS2_WEIGHTS):
            xq = (1.0 - s) * xi + s * xj
            fu = np.einsum("ia,ia->i", evaluate_vector(problem.f, xq), (1.0 - s) * ui + s * uj)
            flux = -(length * omega * fu)[:, None] * normal
            np.add.at(boundary_load, edges[:, 0], (1.0 - s) * flux)
            np.add.at(boundary_load, edges[:, 1], s * flux)

    # −Σ_i r_i·(∇θ_iᵀ u_i): entry 4i+2a+b of the pairing is u_{i,a} r_{i,b}
    nodes = mesh.tresca_nodes
    r = nodal_residual(mesh, u0, dp.stiffness, dp.load).reshape(-1, 2)
    pairing = np.zeros((mesh.n_vertices, 2, 2))
    pairing[nodes] = np.einsum("ia,ib->iab", u0.values[nodes], r[nodes])
    duality = -(recovered_gradient_operator(mesh).T @ pairing.reshape(-1))

    tau = mesh.frame.tangents[mesh.tresca_positions]
    w = mesh.frame.weights[mesh.tresca_positions]
    u_tau = np.abs(np.einsum("ia,ia->i", u0.values[nodes], tau))
    slip_weight = np.where(_slip_mask(mesh, u0, state), w * u_tau, 0.0)
    friction = p_theta_operator(mesh, problem.g).T @ slip_weight

    return LinearShapeFunctional.on(
        mesh,
        {
            "divergence_energy": divergence_energy,
            "load_transport": load_transport,
            "stress_transport": stress_transport,
            "boundary_load": boundary_load.reshape(-1),
            "duality": duality,
            "friction": friction,
        },
    )


def boundary_form_functional(
    mesh: Mesh, problem: ProblemData, u0: VectorField, state: ContactState, recovery: str = "traction"
) -> LinearShapeFunctional:
    """∫_{Γ_T} θ·n(½σ:e − f·u − σ_τ·∂_n u + |u_τ|(Hg + ∂_n g)) + ∫_{Γ_T} u_n σ_τ·τ (∇_τθ_τ − ∇θτ)·n.

    recovery selects how σ:e and ∂_n u are obtained at the Tresca nodes. "traction" rebuilds the full gradient from the
    boundary data σn = s_τ τ and the rates of u along the boundary polyline:
        e_ττ = ε (stretch rate), n·∂_n u = −λε/(2μ + λ), τ·∂_n u = s_τ/μ − n·∂_s u,
    so ½σ:e = 2μ(μ + λ)/(2μ + λ) ε² + s_τ²/(2μ). "average" uses the area-averaged element gradients.
    """
    if recovery not in BOUNDARY_RECOVERIES:
        raise TrescaShapeException(f"unknown boundary recovery {recovery!r}, expected one of {BOUNDARY_RECOVERIES}")
    u0.check_mesh(mesh)
    frame = mesh.frame
    pos, nodes = mesh.tresca_positions, mesh.tresca_nodes
    n, tau, w, H = frame.normals[pos], frame.tangents[pos], frame.weights[pos], frame.curvature[pos]
    x, u = mesh.vertices[nodes], u0.values[nodes]

    s_tau = state.s_tau
    if recovery == "traction":
        mu, lam = problem.mu, problem.lam
        stretch = stretch_rate_operator(mesh)[pos] @ u0.flat
        rotation = rotation_rate_operator(mesh)[pos] @ u0.flat
        density = 2.0 * mu * (mu + lam) / (2.0 * mu + lam) * stretch**2 + s_tau**2 / (2.0 * mu)
        dn_u_tau = s_tau / mu - rotation
    else:
        Gu = nodal_gradients(mesh, u0)[nodes]
        sigma = lame_stress(Gu, problem.mu, problem.lam)
        density = 0.5 * np.einsum("iab,iab->i", sigma, 0.5 * (Gu + np.swapaxes(Gu, 1, 2)))
        dn_u_tau = np.einsum("ia,iab,ib->i", tau, Gu, n)
    fu = np.einsum("ia,ia->i", evaluate_vector(problem.f, x), u)
    g = evaluate_scalar(problem.g, x)
    dn_g = np.einsum("ia,ia->i", scalar_gradient(problem.g, x, fd_step(mesh.diameter)), n)
    u_tau = np.abs(np.einsum("ia,ia->i", u, tau))
    u_n = np.einsum("ia,ia->i", u, n)
    slip = state.modes == ContactMode.SLIP

    normal_op = normal_component_operator(mesh)[pos]
    # (∇_τθ_τ − ∇θτ)·n
    transport_op = tangential_transport_operator(mesh)[pos] - contract_gradient_rows(mesh, nodes, np.einsum("ia,ib->iab", n, tau))

    return LinearShapeFunctional.on(
        mesh,
        {
            "energy_density": normal_op.T @ (w * density),
            "load": normal_op.T @ (-w * fu),
            "shear_normal_derivative": normal_op.T @ (-w * s_tau * dn_u_tau),
            "curvature_friction": normal_op.T @ np.where(slip, w * u_tau * (H * g + dn_g), 0.0),
            "tangential_transport": sp.csr_matrix(transport_op).T @ (w * u_n * s_tau),
        },
    )


def shape_gradient_volume(
    mesh: Mesh, problem: ProblemData, u0: VectorField, theta: VectorField, state: Optional[ContactState] = None
) -> float:
    return volume_form_functional(mesh, problem, u0, state)(theta)


def shape_gradient_boundary(
    mesh: Mesh, problem: ProblemData, u0: VectorField, state: ContactState, theta: VectorField, recovery: str = "traction"
) -> float:
    return boundary_form_functional(mesh, problem, u0, state, recovery=recovery)(theta)


def junction_nodes(mesh: Mesh) -> np.ndarray:
    """Tresca nodes with a Dirichlet neighbor along the boundary loop."""
    loop = mesh.boundary_nodes
    dirichlet = mesh.dirichlet_mask[loop]
    near = np.roll(dirichlet, 1) | np.roll(dirichlet, -1)
    return loop[near & ~dirichlet]


@dataclass
class ShapeGradientReport:
    value_boundary: float
    value_volume: float
    terms: Dict[str, float]
    theta_norm_h1: float
    junction_nodes: List[int] = field(default_factory=list)
    theta: Optional[VectorField] = field(default=None, repr=False)

    def to_summary_dict(self):
        return {
            "value_boundary": self.value_boundary,
            "value_volume": self.value_volume,
            "terms": dict(self.terms),
            "theta_norm_h1": self.theta_norm_h1,
            "junction_nodes": [int(i) for i in self.junction_nodes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_summary_dict(), indent=2) + "\n"


def shape_gradient_report(
    mesh: Mesh, problem: ProblemData, u0: VectorField, state: ContactState, theta: VectorField
) -> ShapeGradientReport:
    from trescashape.shape.descent import h1_norm

    volume_terms = volume_form_functional(mesh, problem, u0, state).evaluate_terms(theta)
    boundary_terms = boundary_form_functional(mesh, problem, u0, state).evaluate_terms(theta)
    value_volume = 0.0
    for v in volume_terms.values():
        value_volume += v
    value_boundary = 0.0
    for v in boundary_terms.values():
        value_boundary += v
    terms = {f"volume.{k}": v for k, v in volume_terms.items()}
    terms.update({f"boundary.{k}": v for k, v in boundary_terms.items()})
    return ShapeGradientReport(
        value_boundary=value_boundary,
        value_volume=value_volume,
        terms=terms,
        theta_norm_h1=h1_norm(mesh, theta),
        junction_nodes=junction_nodes(mesh).tolist(),
        theta=theta,
    )
