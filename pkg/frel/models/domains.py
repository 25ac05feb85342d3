import json
import math
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

from frel.errors import DomainError

UNIT_TOL = 1e-12
INTERIOR_TOL = 1e-12
# Cap on the Chebyshev radius so unbounded polyhedra keep a finite LP.
RADIUS_CAP = 1e6


def _unit(vector: tuple[float, ...], label: str) -> tuple[float, ...]:
    length = math.hypot(*vector)
    if abs(length - 1.0) > UNIT_TOL:
        raise ValueError(f"{label} must be a unit vector, got length {length!r}")
    return vector


def normalized(vector: list[float] | tuple[float, ...]) -> tuple[float, ...]:
    length = math.hypot(*vector)
    if length == 0:
        raise DomainError("Normal vector must be nonzero")
    return tuple(float(v) / length for v in vector)


class HalfSpace(BaseModel):
    """{x : normal . x > 0} with inward unit normal."""

    model_config = {"extra": "ignore", "frozen": True}

    kind: Literal["halfspace"] = "halfspace"
    normal: tuple[float, ...]

    @field_validator("normal")
    @classmethod
    def _check_normal(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        return _unit(value, "Half-space normal")

    @classmethod
    def from_normal(cls, vector: list[float] | tuple[float, ...]) -> "HalfSpace":
        return cls(normal=normalized(vector))

    @property
    def dimension(self) -> int:
        return len(self.normal)


class Face(BaseModel):
    model_config = {"extra": "ignore", "frozen": True}

    normal: tuple[float, ...]
    offset: float

    @field_validator("normal")
    @classmethod
    def _check_normal(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        return _unit(value, "Face normal")


class ConvexPolytope(BaseModel):
    """{x : normal_i . x <= offset_i for every face} with outward unit normals."""

    model_config = {"extra": "ignore", "frozen": True}

    kind: Literal["polytope"] = "polytope"
    faces: list[Face] = Field(min_length=1)
    name: str | None = None

    @model_validator(mode="after")
    def _check_interior(self) -> "ConvexPolytope":
        dims = {len(face.normal) for face in self.faces}
        if len(dims) != 1:
            raise ValueError(f"Face normals have mixed dimensions {sorted(dims)}")
        _, radius = chebyshev_center(self.normal_matrix, self.offsets)
        if radius <= INTERIOR_TOL:
            raise ValueError("Polytope has empty interior")
        return self

    @cached_property
    def normal_matrix(self) -> np.ndarray:
        matrix = np.array([face.normal for face in self.faces], dtype=float)
        matrix.setflags(write=False)
        return matrix

    @cached_property
    def offsets(self) -> np.ndarray:
        offsets = np.array([face.offset for face in self.faces], dtype=float)
        offsets.setflags(write=False)
        return offsets

    @property
    def dimension(self) -> int:
        return len(self.faces[0].normal)

    @cached_property
    def interior_point(self) -> np.ndarray:
        center, _ = chebyshev_center(self.normal_matrix, self.offsets)
        return center

    @classmethod
    def from_inequalities(cls, normals: list[list[float]], offsets: list[float], name: str | None = None):
        faces = []
        for normal, offset in zip(normals, offsets, strict=True):
            length = math.hypot(*normal)
            if length == 0:
                raise DomainError("Face normal must be nonzero")
            faces.append(Face(normal=tuple(float(v) / length for v in normal), offset=float(offset) / length))
        return cls(faces=faces, name=name)

    @classmethod
    def box(cls, lo: list[float], hi: list[float], name: str | None = None) -> "ConvexPolytope":
        normals: list[list[float]] = []
        offsets: list[float] = []
        for axis, (a, b) in enumerate(zip(lo, hi, strict=True)):
            if not a < b:
                raise DomainError(f"Box axis {axis} is empty: [{a}, {b}]")
            upper = [0.0] * len(lo)
            upper[axis] = 1.0
            lower = [0.0] * len(lo)
            lower[axis] = -1.0
            normals.extend([lower, upper])
            offsets.extend([-float(a), float(b)])
        return cls.from_inequalities(normals, offsets, name=name)

    @classmethod
    def unit_square(cls) -> "ConvexPolytope":
        return cls.box([0.0, 0.0], [1.0, 1.0], name="unit-square")

    @classmethod
    def from_vertices(cls, points: list[list[float]] | np.ndarray, name: str | None = None) -> "ConvexPolytope":
        try:
            hull = ConvexHull(np.asarray(points, dtype=float))
        except (RuntimeError, ValueError) as exc:
            raise DomainError(f"Vertices do not span a polygon: {exc}") from exc
        # each row is [unit outward normal, offset] with normal . x + offset <= 0 inside
        normals = hull.equations[:, :-1]
        offsets = -hull.equations[:, -1]
        return cls.from_inequalities(normals.tolist(), offsets.tolist(), name=name)

    def vertices(self) -> np.ndarray:
        """Polygon vertices in counter-clockwise order (bounded planar polytopes only)."""
        if self.dimension != 2:
            raise DomainError("Vertex enumeration is implemented for polygons only")
        halfspaces = np.column_stack((self.normal_matrix, -self.offsets))
        try:
            intersection = HalfspaceIntersection(halfspaces, self.interior_point)
        except Exception as exc:
            raise DomainError(f"Could not enumerate polygon vertices: {exc}") from exc
        points = intersection.intersections
        if not np.all(np.isfinite(points)):
            raise DomainError("Polygon is unbounded")
        center = points.mean(axis=0)
        order = np.argsort(np.arctan2(points[:, 1] - center[1], points[:, 0] - center[0]), kind="stable")
        points = points[order]
        keep = [0]
        for index in range(1, points.shape[0]):
            if np.linalg.norm(points[index] - points[keep[-1]]) > 1e-12:
                keep.append(index)
        if len(keep) > 1 and np.linalg.norm(points[keep[-1]] - points[keep[0]]) <= 1e-12:
            keep.pop()
        return points[keep]


def chebyshev_center(normals: np.ndarray, offsets: np.ndarray) -> tuple[np.ndarray, float]:
    """Largest inscribed ball of {x : normals x <= offsets}, via a linear program."""
    _, dimension = normals.shape
    norms = np.linalg.norm(normals, axis=1)
    cost = np.zeros(dimension + 1)
    cost[-1] = -1.0
    a_ub = np.column_stack((normals, norms))
    bounds = [(None, None)] * dimension + [(0.0, RADIUS_CAP)]
    result = linprog(cost, A_ub=a_ub, b_ub=offsets, bounds=bounds, method="highs")
    if result.status != 0:
        return np.zeros(dimension), 0.0
    return np.asarray(result.x[:dimension]), float(result.x[-1])


def domain_from_json(raw: str | bytes | dict[str, Any]) -> HalfSpace | ConvexPolytope:
    """Read `{"faces": [{"normal": [a, b], "offset": c}, ...]}`, `{"vertices": [[x, y], ...]}` or `{"normal": [a, b]}`."""
    try:
        data = json.loads(raw) if isinstance(raw, str | bytes) else dict(raw)
        kind = data.get("kind") or ("polytope" if "faces" in data or "vertices" in data else "halfspace")
        if kind == "halfspace":
            return HalfSpace.from_normal(data["normal"])
        if kind != "polytope":
            raise DomainError(f"Unknown domain kind {kind!r}")
        if "vertices" in data:
            return ConvexPolytope.from_vertices(data["vertices"], name=data.get("name"))
        normals = [face["normal"] for face in data["faces"]]
        offsets = [face["offset"] for face in data["faces"]]
        return ConvexPolytope.from_inequalities(normals, offsets, name=data.get("name"))
    except DomainError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"Invalid domain description: {exc}") from exc


def load_domain(path: str | Path) -> HalfSpace | ConvexPolytope:
    return domain_from_json(Path(path).read_text())


def parse_vector(text: str) -> list[float]:
    try:
        return [float(Fraction(part.strip())) for part in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"Cannot read vector from {text!r}") from exc


def domain_preset(spec: str) -> HalfSpace | ConvexPolytope:
    """Named presets: `unit-square`, `halfspace:<nx>,<ny>`, `box:x0,x1,y0,y1`."""
    if spec == "unit-square":
        return ConvexPolytope.unit_square()
    if spec.startswith("halfspace:"):
        return HalfSpace.from_normal(parse_vector(spec.split(":", 1)[1]))
    if spec.startswith("box:"):
        values = parse_vector(spec.split(":", 1)[1])
        if len(values) % 2:
            raise DomainError(f"Box preset needs lo,hi pairs, got {spec!r}")
        return ConvexPolytope.box(values[0::2], values[1::2], name=spec)
    raise DomainError(f"Unknown domain preset {spec!r}")
