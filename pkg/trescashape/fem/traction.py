from typing import Optional

import numpy as np
import scipy.sparse as sp

from trescashape.fem.assembly import assemble_elasticity
from trescashape.fem.fields import TractionField, VectorField
from trescashape.mesh.mesh import Mesh


def nodal_residual(mesh: Mesh, u: VectorField, stiffness: sp.csr_matrix, load: np.ndarray) -> np.ndarray:
    """r = K u − F over all dofs; at boundary nodes this is the discrete traction force ∫ σ(u)n φ_i."""
    u.check_mesh(mesh)
    return stiffness @ u.flat - load


def boundary_traction(
    mesh: Mesh, u: VectorField, mu: float, lam: float, volume_load: np.ndarray, stiffness: Optional[sp.csr_matrix] = None
) -> TractionField:
    """Residual-recovered tractions at the Tresca nodes, per unit length and split along (n, τ)."""
    K = stiffness if stiffness is not None else assemble_elasticity(mesh, mu, lam)
    r = nodal_residual(mesh, u, K, volume_load).reshape(-1, 2)
    frame = mesh.frame
    pos, nodes = mesh.tresca_positions, mesh.tresca_nodes
    t = r[nodes] / frame.weights[pos][:, None]
    return TractionField(
        nodes=nodes.copy(),
        sigma_n=np.einsum("ia,ia->i", t, frame.normals[pos]),
        s_tau=np.einsum("ia,ia->i", t, frame.tangents[pos]),
    )
