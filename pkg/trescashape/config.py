import configparser
import math
from dataclasses import dataclass, fields, is_dataclass, replace
from pathlib import Path

import numpy as np
from typing import Any, List, Optional

from trescashape.contact.problem import ProblemData
from trescashape.exceptions import BadConfigException, DataEvaluationException
from trescashape.expression import ExpressionScalarField, ExpressionVectorField, Variable, evaluate, parse_expression
from trescashape.fem.sources import evaluate_scalar
from trescashape.mesh.generators import Arc, generate_ellipse_mesh
from trescashape.mesh.mesh import Mesh
from trescashape.optimizer.config import OptimConfig
from trescashape.utils.definitions import format_float
from trescashape.utils.fn import PathLike

_SECTION = "run"

# config key -> (value type, may be "none")
_FLAG_TYPES = {
    "a": (float, False),
    "b": (float, False),
    "h": (float, False),
    "gammaD": (str, False),
    "mu": (float, False),
    "lambda": (float, False),
    "f_x": (str, False),
    "f_y": (str, False),
    "g": (str, False),
    "window_radius": (float, True),
    "linear_tol": (float, False),
    "switching_tol": (float, False),
    "eps_slip": (float, False),
    "max_switch_iters": (int, False),
    "linear_method": (str, False),
    "target_volume": (float, False),
    "rho": (float, False),
    "ell0": (float, False),
    "step0": (float, True),
    "shrink": (float, False),
    "max_iters": (int, False),
    "window": (int, False),
    "delta_j": (float, False),
    "min_angle_deg": (float, False),
    "max_shrinks": (int, False),
    "gradient_form": (str, False),
    "penalty": (float, False),
    "mesh_motion": (str, False),
    "relax_angle_deg": (float, False),
    "snapshot_every": (int, False),
    "out": (str, False),
    "seed": (int, False),
}

_DEFAULT_FLAGS = {
    "a": 1.1,
    "b": 1.0 / 1.1,
    "h": 0.05,
    "gammaD": "[2pi/3,4pi/3];[5pi/3,7pi/3]",
    "mu": 0.5,
    "lambda": 0.0,
    "f_x": "-5*x*exp(x)",
    "f_y": "0.6*exp(x^2)",
    "g": "1+sin(-y*pi/2)+1e-3",
    "window_radius": None,
    "linear_tol": 1e-10,
    "switching_tol": 1e-8,
    "eps_slip": 1e-6,
    "max_switch_iters": 200,
    "linear_method": "direct",
    "target_volume": math.pi,
    "rho": 1.0,
    "ell0": 0.0,
    "step0": None,
    "shrink": 0.5,
    "max_iters": 200,
    "window": 20,
    "delta_j": 1e-4,
    "min_angle_deg": 5.0,
    "max_shrinks": 20,
    "gradient_form": "volume",
    "penalty": 0.0,
    "mesh_motion": "elasticity",
    "relax_angle_deg": 20.0,
    "snapshot_every": 0,
    "out": "out",
    "seed": 0,
}

# config keys that are not valid Python identifiers or shadow builtins
_KEY_TO_FIELD = {"lambda": "lam", "gammaD": "gamma_d"}
_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}

G_POSITIVITY_SAMPLES = 10_000


def constant_value(text: str) -> float:
    """Evaluate an expression without variables, e.g. "2pi/3" or "1/1.1"."""
    expr = parse_expression(text)
    if _has_variable(expr):
        raise BadConfigException(f"expected a constant, got an expression in x, y: {text!r}")
    value = float(evaluate(expr, 0.0, 0.0))
    if not math.isfinite(value):
        raise BadConfigException(f"constant {text!r} is not finite")
    return value


def _has_variable(expr) -> bool:
    if isinstance(expr, Variable):
        return True
    return any(_has_variable(getattr(expr, f.name)) for f in fields(expr) if is_dataclass(getattr(expr, f.name)))


def parse_arcs(text: str) -> List[Arc]:
    """`[2pi/3,4pi/3];[5pi/3,7pi/3]` -> [(2.094..., 4.188...), (5.235..., 7.330...)]"""
    arcs = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if not (part.startswith("[") and part.endswith("]")) or part.count(",") != 1:
            raise BadConfigException(f"Dirichlet arc {part!r} must look like [start,end]")
        lo, hi = part[1:-1].split(",")
        arcs.append((constant_value(lo), constant_value(hi)))
    return arcs


def _map_type(key: str, value: str):
    val_type, optional = _FLAG_TYPES[key]
    value = value.strip()
    if optional and value.lower() == "none":
        return None
    if val_type is float:
        return constant_value(value)
    if val_type is int:
        try:
            return int(value)
        except ValueError:
            raise BadConfigException(f"{key} must be an integer, got {value!r}")
    return value


def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


@dataclass(frozen=True)
class RunConfig:
    a: float = _DEFAULT_FLAGS["a"]
    b: float = _DEFAULT_FLAGS["b"]
    h: float = _DEFAULT_FLAGS["h"]
    gamma_d: str = _DEFAULT_FLAGS["gammaD"]
    mu: float = _DEFAULT_FLAGS["mu"]
    lam: float = _DEFAULT_FLAGS["lambda"]
    f_x: str = _DEFAULT_FLAGS["f_x"]
    f_y: str = _DEFAULT_FLAGS["f_y"]
    g: str = _DEFAULT_FLAGS["g"]
    window_radius: Optional[float] = _DEFAULT_FLAGS["window_radius"]
    linear_tol: float = _DEFAULT_FLAGS["linear_tol"]
    switching_tol: float = _DEFAULT_FLAGS["switching_tol"]
    eps_slip: float = _DEFAULT_FLAGS["eps_slip"]
    max_switch_iters: int = _DEFAULT_FLAGS["max_switch_iters"]
    linear_method: str = _DEFAULT_FLAGS["linear_method"]
    target_volume: float = _DEFAULT_FLAGS["target_volume"]
    rho: float = _DEFAULT_FLAGS["rho"]
    ell0: float = _DEFAULT_FLAGS["ell0"]
    step0: Optional[float] = _DEFAULT_FLAGS["step0"]
    shrink: float = _DEFAULT_FLAGS["shrink"]
    max_iters: int = _DEFAULT_FLAGS["max_iters"]
    window: int = _DEFAULT_FLAGS["window"]
    delta_j: float = _DEFAULT_FLAGS["delta_j"]
    min_angle_deg: float = _DEFAULT_FLAGS["min_angle_deg"]
    max_shrinks: int = _DEFAULT_FLAGS["max_shrinks"]
    gradient_form: str = _DEFAULT_FLAGS["gradient_form"]
    penalty: float = _DEFAULT_FLAGS["penalty"]
    mesh_motion: str = _DEFAULT_FLAGS["mesh_motion"]
    relax_angle_deg: float = _DEFAULT_FLAGS["relax_angle_deg"]
    snapshot_every: int = _DEFAULT_FLAGS["snapshot_every"]
    out: str = _DEFAULT_FLAGS["out"]
    seed: int = _DEFAULT_FLAGS["seed"]

    def __post_init__(self):
        if self.window_radius is not None and not self.window_radius > 0:
            raise BadConfigException(f"window_radius must be positive, got {self.window_radius}")
        if self.seed < 0:
            raise BadConfigException(f"seed must be non-negative, got {self.seed}")
        # surface bad expressions, arcs and solver settings at load time
        parse_arcs(self.gamma_d)
        self.problem_data()
        self.optim_config()

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",))
        parser.optionxform = str
        try:
            parser.read_string(f"[{_SECTION}]\n" + text)
        except configparser.Error as e:
            raise BadConfigException(f"malformed config: {e}") from e
        if parser.sections() != [_SECTION]:
            raise BadConfigException("config files are flat key = value lists without [sections]")

        kwargs = {}
        for key, value in parser[_SECTION].items():
            if key not in _FLAG_TYPES:
                raise BadConfigException(f"unknown config key {key!r}")
            kwargs[_KEY_TO_FIELD.get(key, key)] = _map_type(key, value)
        return cls(**kwargs)

    def to_text(self) -> str:
        lines = ["# trescashape run configuration"]
        for f in fields(self):
            lines.append(f"{_FIELD_TO_KEY.get(f.name, f.name)} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def with_overrides(self, **overrides) -> "RunConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @property
    def dirichlet_arcs(self) -> List[Arc]:
        return parse_arcs(self.gamma_d)

    def body_force(self) -> ExpressionVectorField:
        return ExpressionVectorField(self.f_x, self.f_y, self.window_radius)

    def threshold(self) -> ExpressionScalarField:
        return ExpressionScalarField(self.g, self.window_radius)

    def problem_data(self) -> ProblemData:
        return ProblemData(
            f=self.body_force(),
            g=self.threshold(),
            mu=self.mu,
            lam=self.lam,
            linear_tol=self.linear_tol,
            switching_tol=self.switching_tol,
            eps_slip=self.eps_slip,
            max_switch_iters=self.max_switch_iters,
            linear_method=self.linear_method,
        )

    def optim_config(self) -> OptimConfig:
        return OptimConfig(
            target_volume=self.target_volume,
            rho=self.rho,
            ell0=self.ell0,
            step0=self.step0,
            shrink=self.shrink,
            max_iters=self.max_iters,
            window=self.window,
            delta_j=self.delta_j,
            min_angle_deg=self.min_angle_deg,
            max_shrinks=self.max_shrinks,
            gradient_form=self.gradient_form,
            penalty=self.penalty,
            mesh_motion=self.mesh_motion,
            relax_angle_deg=self.relax_angle_deg,
            snapshot_every=self.snapshot_every,
        )

    def build_mesh(self) -> Mesh:
        return generate_ellipse_mesh(self.a, self.b, self.h, self.dirichlet_arcs)

    def positivity_samples(self, n_samples: int = G_POSITIVITY_SAMPLES) -> np.ndarray:
        """Half on the ellipse boundary, half uniform in its interior, seeded by `seed`."""
        rng = np.random.default_rng(self.seed)
        n_boundary = n_samples // 2
        gamma = np.linspace(0.0, 2.0 * math.pi, n_boundary, endpoint=False)
        boundary = np.stack([self.a * np.cos(gamma), self.b * np.sin(gamma)], axis=1)
        r = np.sqrt(rng.uniform(size=n_samples - n_boundary))
        phi = rng.uniform(0.0, 2.0 * math.pi, size=n_samples - n_boundary)
        interior = np.stack([self.a * r * np.cos(phi), self.b * r * np.sin(phi)], axis=1)
        return np.vstack([boundary, interior])

    def check_threshold(self, n_samples: int = G_POSITIVITY_SAMPLES) -> float:
        """Smallest sampled g; raises DataEvaluationException unless every sample is positive."""
        points = self.positivity_samples(n_samples)
        values = evaluate_scalar(self.threshold(), points)
        k = int(np.argmin(values))
        if values[k] <= 0:
            x, y = points[k]
            raise DataEvaluationException(f"friction threshold g = {self.g!r} is {values[k]:.6g} <= 0 at ({x:.6g}, {y:.6g})")
        return float(values[k])

    def to_summary_dict(self):
        return {_FIELD_TO_KEY.get(f.name, f.name): getattr(self, f.name) for f in fields(self)}


def load_config(path: PathLike) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise BadConfigException(f"Config file not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise BadConfigException(f"cannot read config file {path}: {e}") from e
    return RunConfig.from_text(text)

