import inspect
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from typing import Dict, List, Tuple

from trescashape.exceptions import AssemblyException, ConstraintException, LinearSolverException
from trescashape.fem.fields import VectorField
from trescashape.mesh.mesh import Mesh
from trescashape.utils import logger

ComponentConstraint = Tuple[int, float]
DirectionalConstraint = Tuple[int, np.ndarray, float]

SOLVER_METHODS = ("direct", "cg")


@dataclass
class SparseSystem:
    """K u = rhs over interleaved dofs, with componentwise (dof, value) and directional (node, d, c: u·d = c) constraints."""

    mesh: Mesh
    operator: sp.csr_matrix
    rhs: np.ndarray
    component_constraints: List[ComponentConstraint] = field(default_factory=list)
    directional_constraints: List[DirectionalConstraint] = field(default_factory=list)

    def __post_init__(self):
        n = 2 * self.mesh.n_vertices
        self.operator = sp.csr_matrix(self.operator)
        self.rhs = np.asarray(self.rhs, dtype=float)
        if self.operator.shape != (n, n) or self.rhs.shape != (n,):
            raise AssemblyException(f"system of shape {self.operator.shape} / {self.rhs.shape} does not match {n} dofs")
        asym = abs(self.operator - self.operator.T).max() if self.operator.nnz else 0.0
        scale = abs(self.operator).max() if self.operator.nnz else 1.0
        if asym > 1e-12 * scale:
            raise AssemblyException(f"operator is not symmetric (max asymmetry {asym:.3e})")

    def fix_nodes(self, nodes, value: float = 0.0) -> "SparseSystem":
        for i in nodes:
            self.component_constraints.append((2 * int(i), value))
            self.component_constraints.append((2 * int(i) + 1, value))
        return self

    def fix_values(self, nodes, values) -> "SparseSystem":
        """u(node) = values[k] for the k-th node."""
        for i, (vx, vy) in zip(nodes, np.asarray(values, dtype=float)):
            self.component_constraints.append((2 * int(i), float(vx)))
            self.component_constraints.append((2 * int(i) + 1, float(vy)))
        return self

    def fix_direction(self, node: int, direction, value: float = 0.0) -> "SparseSystem":
        self.directional_constraints.append((int(node), np.asarray(direction, dtype=float), float(value)))
        return self


def _normalized_constraints(system: SparseSystem) -> Tuple[Dict[int, float], Dict[int, Tuple[np.ndarray, float]]]:
    components: Dict[int, float] = {}
    for dof, value in system.component_constraints:
        dof, value = int(dof), float(value)
        if not 0 <= dof < 2 * system.mesh.n_vertices:
            raise ConstraintException(f"constrained dof {dof} out of range")
        if dof in components and components[dof] != value:
            raise ConstraintException(f"dof {dof} is constrained to both {components[dof]} and {value}")
        components[dof] = value

    directions: Dict[int, Tuple[np.ndarray, float]] = {}
    for node, d, c in system.directional_constraints:
        norm = float(np.hypot(d[0], d[1]))
        if norm == 0.0:
            raise ConstraintException(f"directional constraint at node {node} has a zero direction")
        if 2 * node in components or 2 * node + 1 in components:
            raise ConstraintException(f"node {node} has both component and directional constraints")
        unit, value = np.asarray(d, dtype=float) / norm, float(c) / norm
        if node in directions:
            prev_unit, prev_value = directions[node]
            if not (np.allclose(prev_unit, unit, rtol=0, atol=1e-14) and prev_value == value):
                raise ConstraintException(f"node {node} has conflicting directional constraints")
        directions[node] = (unit, value)
    return components, directions


def _rotation(n_vertices: int, directions: Dict[int, Tuple[np.ndarray, float]]) -> sp.csr_matrix:
    """Block-diagonal Q with u = Q w; at a rotated node w_0 is the component along d and w_1 along d rotated by +π/2."""
    diag = np.ones(2 * n_vertices)
    rows, cols, data = [], [], []
    for node, (d, _) in directions.items():
        i, j = 2 * node, 2 * node + 1
        diag[i] = diag[j] = 0.0
        rows += [i, i, j, j]
        cols += [i, j, i, j]
        data += [d[0], -d[1], d[1], d[0]]
    Q = sp.diags(diag) + sp.csr_matrix((data, (rows, cols)), shape=(2 * n_vertices, 2 * n_vertices))
    return Q.tocsr()


def _cg_tolerance(tol: float) -> dict:
    params = inspect.signature(spla.cg).parameters
    return {"rtol": tol, "atol": 0.0} if "rtol" in params else {"tol": tol, "atol": 0.0}


def _solve_free(A: sp.csr_matrix, b: np.ndarray, tol: float, max_iter, method: str, dense_below: int) -> np.ndarray:
    n = len(b)
    if method == "direct":
        x = spla.spsolve(A.tocsc(), b) if n > 1 else b / A.toarray().ravel()
        return np.atleast_1d(x)
    if n < dense_below:
        return np.linalg.solve(A.toarray(), b)
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise LinearSolverException("operator has a non-positive diagonal on the free space", residual=float("nan"))
    M = spla.LinearOperator((n, n), matvec=lambda r: r / diag, dtype=float)
    x, info = spla.cg(A, b, M=M, maxiter=max_iter if max_iter is not None else 10 * n, **_cg_tolerance(tol))
    if info != 0:
        bnorm = np.linalg.norm(b)
        res = float(np.linalg.norm(b - A @ x) / (bnorm if bnorm > 0 else 1.0))
        raise LinearSolverException(f"conjugate gradient did not converge ({info} iterations)", residual=res)
    return x


def solve_constrained(
    system: SparseSystem, tol: float = 1e-10, max_iter=None, method: str = "cg", dense_below: int = 400
) -> VectorField:
    """Solve the constrained system on the free space.

    Directional constraints rotate the node's 2x2 block so the constrained direction becomes a coordinate; constrained
    coordinates are then eliminated and the remaining SPD block is solved by sparse LU ("direct") or Jacobi-preconditioned
    CG ("cg", dense factorization below dense_below free dofs).
    """
    if method not in SOLVER_METHODS:
        raise ConstraintException(f"unknown linear solver method {method!r}, expected one of {SOLVER_METHODS}")
    mesh = system.mesh
    n = 2 * mesh.n_vertices
    components, directions = _normalized_constraints(system)

    Q = _rotation(mesh.n_vertices, directions)
    K = (Q.T @ system.operator @ Q).tocsr()
    F = Q.T @ system.rhs

    w = np.zeros(n)
    fixed = np.zeros(n, dtype=bool)
    for dof, value in components.items():
        w[dof], fixed[dof] = value, True
    for node, (_, value) in directions.items():
        w[2 * node], fixed[2 * node] = value, True
    free = np.flatnonzero(~fixed)

    if len(free):
        b = F[free] - K[free][:, fixed] @ w[fixed]
        A = K[free][:, free]
        w[free] = _solve_free(A, b, tol, max_iter, method, dense_below)
        bnorm = np.linalg.norm(b)
        res = float(np.linalg.norm(b - A @ w[free]) / (bnorm if bnorm > 0 else 1.0))
        if not np.all(np.isfinite(w)) or res > max(tol, 1e-8):
            raise LinearSolverException(f"{method} solve left relative residual {res:.3e}", residual=res)
        logger.fs.debug(f"[solve_constrained] {method}: {len(free)} free dofs, relative residual {res:.3e}")
    return VectorField.on(mesh, Q @ w)
