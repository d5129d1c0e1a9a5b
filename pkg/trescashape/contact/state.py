from dataclasses import dataclass
from enum import IntEnum

import numpy as np
import pandas as pd
from typing import TYPE_CHECKING, NamedTuple

from trescashape.fem.fields import TractionField
from trescashape.mesh.mesh import Mesh

if TYPE_CHECKING:
    from trescashape.contact.problem import ProblemData

CONTACT_CSV_COLUMNS = ["node", "x", "y", "mode", "sigma_n", "s_tau", "g", "u_tau"]


class ContactMode(IntEnum):
    STICK_STRICT = 0
    STICK_BOUNDARY = 1
    SLIP = 2


class BoundaryPartition(NamedTuple):
    """Vertex ids of the slipping (N), strictly sticking (D) and threshold-sticking (S) Tresca nodes."""

    slip: np.ndarray
    stick_strict: np.ndarray
    stick_boundary: np.ndarray


def stick_modes(is_slip: np.ndarray, s_tau: np.ndarray, g: np.ndarray, eps_slip: float) -> np.ndarray:
    modes = np.where(np.abs(s_tau) >= g * (1.0 - eps_slip), int(ContactMode.STICK_BOUNDARY), int(ContactMode.STICK_STRICT))
    return np.where(is_slip, int(ContactMode.SLIP), modes).astype(np.int64)


@dataclass(frozen=True, eq=False)
class ContactState:
    """Converged Tresca boundary state, one entry per Tresca node in mesh.tresca_nodes order.

    slip_signs[k] = s means u·τ = s|u·τ| on a SLIP node; on stick nodes it is the sign slip would take, −sign(s_τ).
    """

    mesh_token: str
    nodes: np.ndarray
    modes: np.ndarray
    slip_signs: np.ndarray
    traction: TractionField
    g: np.ndarray
    u_tau: np.ndarray
    switch_iters: int = 0

    @property
    def is_slip(self) -> np.ndarray:
        return self.modes == ContactMode.SLIP

    @property
    def sigma_n(self) -> np.ndarray:
        return self.traction.sigma_n

    @property
    def s_tau(self) -> np.ndarray:
        return self.traction.s_tau

    def positions(self, mode: ContactMode) -> np.ndarray:
        """Indices into the Tresca node arrays of the nodes in a given mode."""
        return np.flatnonzero(self.modes == mode)

    def compatible_with(self, mesh: Mesh) -> bool:
        """True when this state can warm-start a solve on mesh (same Tresca node numbering)."""
        return len(self.nodes) == len(mesh.tresca_nodes) and bool(np.all(self.nodes == mesh.tresca_nodes))

    def to_frame(self, mesh: Mesh) -> pd.DataFrame:
        x = mesh.vertices[self.nodes]
        return pd.DataFrame(
            {
                "node": self.nodes.astype(np.int64),
                "x": x[:, 0],
                "y": x[:, 1],
                "mode": self.modes.astype(np.int64),
                "sigma_n": self.sigma_n,
                "s_tau": self.s_tau,
                "g": self.g,
                "u_tau": self.u_tau,
            },
            columns=CONTACT_CSV_COLUMNS,
        )


def classify_boundary(state: ContactState, problem: "ProblemData") -> BoundaryPartition:
    """N = SLIP, D = stick with |s_τ| < g(1 − ε_slip), S = stick at the threshold band."""
    modes = stick_modes(state.is_slip, state.s_tau, state.g, problem.eps_slip)
    return BoundaryPartition(
        slip=state.nodes[modes == ContactMode.SLIP],
        stick_strict=state.nodes[modes == ContactMode.STICK_STRICT],
        stick_boundary=state.nodes[modes == ContactMode.STICK_BOUNDARY],
    )
