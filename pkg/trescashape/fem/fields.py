from dataclasses import dataclass

import numpy as np

from trescashape.exceptions import TrescaShapeException
from trescashape.mesh.mesh import Mesh


@dataclass(frozen=True, eq=False)
class VectorField:
    """Nodal P1 2-vector field; remembers the identity token of the mesh it lives on."""

    mesh_token: str
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(values)):
            raise TrescaShapeException("vector field has non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def on(cls, mesh: Mesh, values) -> "VectorField":
        values = np.asarray(values, dtype=float).reshape(-1, 2)
        if len(values) != mesh.n_vertices:
            raise TrescaShapeException(f"field has {len(values)} nodes, mesh has {mesh.n_vertices}")
        return cls(mesh.token, values)

    @classmethod
    def zeros(cls, mesh: Mesh) -> "VectorField":
        return cls.on(mesh, np.zeros((mesh.n_vertices, 2)))

    def check_mesh(self, mesh: Mesh):
        if self.mesh_token != mesh.token:
            raise TrescaShapeException("vector field belongs to a different mesh")

    @property
    def flat(self) -> np.ndarray:
        """Interleaved dof vector (x0, y0, x1, y1, ...)."""
        return self.values.reshape(-1)

    def __add__(self, other: "VectorField") -> "VectorField":
        if other.mesh_token != self.mesh_token:
            raise TrescaShapeException("cannot combine fields on different meshes")
        return VectorField(self.mesh_token, self.values + other.values)

    def __sub__(self, other: "VectorField") -> "VectorField":
        if other.mesh_token != self.mesh_token:
            raise TrescaShapeException("cannot combine fields on different meshes")
        return VectorField(self.mesh_token, self.values - other.values)

    def scaled(self, factor: float) -> "VectorField":
        return VectorField(self.mesh_token, factor * self.values)


@dataclass(frozen=True, eq=False)
class TractionField:
    """Recovered tractions at the Tresca nodes (mesh.tresca_nodes order), force per length."""

    nodes: np.ndarray
    sigma_n: np.ndarray
    s_tau: np.ndarray
