"""Exact-formula primitives of the Poincare ball model of hyperbolic space.

Points live in the open unit ball of R^N carrying the metric
(2/(1-|x|^2))^2 delta_ij.  Isometries are kept in factored form as ordered
lists of reflections in hyperplanes through the origin and in spheres
orthogonal to the unit sphere; composition is list concatenation and the
inverse is the reversed list, because every factor is an involution.

Array convention: a point is a 1-D array of length N; batched operations
accept (m, N) arrays and act along the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "BOUNDARY_MARGIN",
    "DEFAULT_TOL",
    "GeometryError",
    "BoundaryError",
    "InversionPoleError",
    "BallEscapeError",
    "DiscPoint",
    "HalfSpacePoint",
    "PlaneReflection",
    "SphereReflection",
    "Isometry",
    "Plane",
    "Sphere",
    "Cap",
    "metric_factor",
    "distance",
    "distance_to_origin",
    "reflect_plane",
    "reflect_sphere",
    "translation",
    "apply",
    "ball_to_halfspace",
    "halfspace_to_ball",
    "halfspace_map",
    "halfspace_distance",
    "orthogonal",
    "cap_isometry",
]

# Points with 1 - |x| below this margin are refused; all quadrature in the
# package stays inside it, so the metric-factor overflow regime never occurs.
BOUNDARY_MARGIN = 1e-8

DEFAULT_TOL = 1e-10


class GeometryError(ValueError):
    """Base class for domain errors of the ball model."""


class BoundaryError(GeometryError):
    """Point too close to (or outside) the unit sphere."""


class InversionPoleError(GeometryError):
    """Sphere inversion evaluated at its own center."""


class BallEscapeError(GeometryError):
    """A claimed ball isometry produced a point outside the closed ball."""


def _as_points(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim not in (1, 2):
        raise ValueError("expected a point (N,) or a batch of points (m, N)")
    return a


def _sq_norm(x: np.ndarray) -> np.ndarray:
    return np.sum(x * x, axis=-1)


def _check_in_ball(x: np.ndarray, margin: float = BOUNDARY_MARGIN):
    r2 = _sq_norm(x)
    if np.any(r2 >= (1.0 - margin) ** 2):
        raise BoundaryError(
            f"point with |x| >= 1 - {margin:g} rejected (|x|max = {np.sqrt(np.max(r2)):.17g})"
        )


@dataclass(frozen=True)
class DiscPoint:
    """A point of the ball model; |coords| < 1 strictly."""

    coords: np.ndarray

    def __init__(self, coords):
        c = np.asarray(coords, dtype=float)
        if c.ndim != 1:
            raise ValueError("DiscPoint takes a 1-D coordinate array")
        _check_in_ball(c)
        object.__setattr__(self, "coords", c)

    @property
    def N(self) -> int:
        return self.coords.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coords, dtype=dtype)


@dataclass(frozen=True)
class HalfSpacePoint:
    """A point (z, r) of the upper half-space model, r > 0 strictly."""

    z: np.ndarray
    r: float

    def __init__(self, z, r):
        z = np.asarray(z, dtype=float)
        if z.ndim != 1:
            raise ValueError("z must be a 1-D array of length N-1")
        if not r > 0.0:
            raise GeometryError(f"half-space height r must be positive, got {r}")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "r", float(r))

    @property
    def N(self) -> int:
        return self.z.shape[0] + 1


def _coords(x) -> np.ndarray:
    if isinstance(x, DiscPoint):
        return x.coords
    return _as_points(x)


# ---------------------------------------------------------------------------
# metric, distance
# ---------------------------------------------------------------------------

def metric_factor(x) -> Union[float, np.ndarray]:
    """Conformal factor 2/(1-|x|^2); the volume density is its N-th power."""
    c = _coords(x)
    _check_in_ball(c)
    out = 2.0 / (1.0 - _sq_norm(c))
    return float(out) if out.ndim == 0 else out


def distance(x, y) -> Union[float, np.ndarray]:
    """Hyperbolic distance arccosh(1 + 2|x-y|^2 / ((1-|x|^2)(1-|y|^2)))."""
    a, b = _coords(x), _coords(y)
    _check_in_ball(a)
    _check_in_ball(b)
    num = _sq_norm(a - b)
    arg = 1.0 + 2.0 * num / ((1.0 - _sq_norm(a)) * (1.0 - _sq_norm(b)))
    out = np.arccosh(np.maximum(arg, 1.0))
    return float(out) if out.ndim == 0 else out


def distance_to_origin(x) -> Union[float, np.ndarray]:
    """d(0, x) = 2 artanh |x| (closed form agreeing with `distance`)."""
    c = _coords(x)
    _check_in_ball(c)
    out = 2.0 * np.arctanh(np.sqrt(_sq_norm(c)))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# primitive reflections
# ---------------------------------------------------------------------------

def reflect_plane(a, t: float, x) -> np.ndarray:
    """Reflection in the hyperplane P(a, t) = {x : x.a = t}, |a| = 1."""
    a = np.asarray(a, dtype=float)
    if abs(_sq_norm(a) - 1.0) > 1e-12:
        raise GeometryError(f"plane normal must be a unit vector (|a| = {np.linalg.norm(a):.17g})")
    pts = _as_points(x)
    proj = pts @ a
    return pts + 2.0 * (t - proj)[..., None] * a


def reflect_sphere(b, r: float, x) -> np.ndarray:
    """Inversion in the sphere S(b, r): x -> b + (r/|x-b|)^2 (x-b)."""
    b = np.asarray(b, dtype=float)
    if not r > 0.0:
        raise GeometryError("sphere radius must be positive")
    pts = _as_points(x)
    d = pts - b
    d2 = _sq_norm(d)
    if np.any(d2 == 0.0):
        raise InversionPoleError("inversion evaluated at the sphere center")
    return b + (r * r / d2)[..., None] * d


@dataclass(frozen=True)
class PlaneReflection:
    """Reflection in P(a, t); a ball isometry exactly when t = 0."""

    normal: np.ndarray
    offset: float = 0.0

    def __init__(self, normal, offset: float = 0.0):
        n = np.asarray(normal, dtype=float)
        n = n / np.linalg.norm(n)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(offset))

    def apply(self, x) -> np.ndarray:
        return reflect_plane(self.normal, self.offset, x)

    def preserves_ball(self, tol: float = 1e-12) -> bool:
        return abs(self.offset) <= tol

    def to_record(self) -> dict:
        return {"type": "plane", "normal": self.normal.tolist(), "offset": self.offset}


@dataclass(frozen=True)
class SphereReflection:
    """Inversion in S(center, radius); a ball isometry iff |center|^2 = 1 + radius^2."""

    center: np.ndarray
    radius: float

    def __init__(self, center, radius: float):
        c = np.asarray(center, dtype=float)
        if not radius > 0.0:
            raise GeometryError("sphere radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(radius))

    def apply(self, x) -> np.ndarray:
        return reflect_sphere(self.center, self.radius, x)

    def preserves_ball(self, tol: float = 1e-12) -> bool:
        return abs(_sq_norm(self.center) - (1.0 + self.radius ** 2)) <= tol * (
            1.0 + self.radius ** 2
        )

    def to_record(self) -> dict:
        return {"type": "sphere", "center": self.center.tolist(), "radius": self.radius}


Factor = Union[PlaneReflection, SphereReflection]


@dataclass(frozen=True)
class Isometry:
    """A ball isometry stored as an ordered tuple of reflection factors.

    Factors are applied left to right.  Every factor must individually
    preserve the ball (plane through the origin, or sphere orthogonal to
    S^(N-1)); the composite then maps the open ball to itself exactly.
    """

    factors: tuple = field(default_factory=tuple)

    def __init__(self, factors=()):
        factors = tuple(factors)
        for f in factors:
            if not isinstance(f, (PlaneReflection, SphereReflection)):
                raise TypeError(f"invalid isometry factor {f!r}")
            if not f.preserves_ball():
                raise GeometryError(
                    "factor does not preserve the ball "
                    "(plane offset nonzero or sphere not orthogonal to S^(N-1))"
                )
        object.__setattr__(self, "factors", factors)

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(())

    def apply(self, x, check: bool = True) -> np.ndarray:
        pts = _coords(x)
        _check_in_ball(pts)
        for f in self.factors:
            pts = f.apply(pts)
        if check and np.any(_sq_norm(pts) > 1.0 + 1e-12):
            raise BallEscapeError("isometry image escaped the closed ball beyond 1e-12")
        return pts

    def __call__(self, x) -> np.ndarray:
        return self.apply(x)

    def inverse(self) -> "Isometry":
        # each factor is an involution, so reversing the list inverts the map
        return Isometry(tuple(reversed(self.factors)))

    def compose(self, other: "Isometry") -> "Isometry":
        """Composite mapping x -> other(self(x))."""
        return Isometry(self.factors + other.factors)

    def to_records(self) -> list:
        return [f.to_record() for f in self.factors]

    @classmethod
    def from_records(cls, records) -> "Isometry":
        factors = []
        for rec in records:
            if rec["type"] == "plane":
                factors.append(PlaneReflection(rec["normal"], rec["offset"]))
            elif rec["type"] == "sphere":
                factors.append(SphereReflection(rec["center"], rec["radius"]))
            else:
                raise ValueError(f"unknown factor type {rec['type']!r}")
        return cls(tuple(factors))


def apply(iso: Isometry, x) -> np.ndarray:
    """Evaluate the reflection composition at x."""
    return iso.apply(x)


def translation(b) -> Isometry:
    """Hyperbolic translation tau_b with tau_b(0) = b.

    Factored as inversion in the sphere through b* = b/|b|^2 orthogonal to
    S^(N-1), preceded by reflection in the hyperplane b.x = 0.  tau_0 is the
    identity.
    """
    b = _coords(b)
    _check_in_ball(b)
    b2 = float(_sq_norm(b))
    if b2 == 0.0:
        return Isometry.identity()
    bstar = b / b2
    radius = float(np.sqrt(_sq_norm(bstar) - 1.0))
    return Isometry((PlaneReflection(b, 0.0), SphereReflection(bstar, radius)))


# ---------------------------------------------------------------------------
# ball <-> half-space
# ---------------------------------------------------------------------------

def halfspace_map(x) -> np.ndarray:
    """Self-inverse Moebius map exchanging the ball and {x_1 > 0}.

    In coordinates (x_1, x~) it is the inversion in the sphere of radius
    sqrt(2) centered at -e_1:

        x -> ((1 - |x|^2)/D, 2 x~/D),   D = (1 + x_1)^2 + |x~|^2.

    Reading slot 1 as the half-space height r and the remaining slots as z,
    the same formula realises both directions of the ball <-> half-space
    correspondence; applying it twice is the identity.
    """
    pts = _as_points(x)
    first = pts[..., 0]
    rest = pts[..., 1:]
    D = (1.0 + first) ** 2 + _sq_norm(rest)
    if np.any(D == 0.0):
        raise InversionPoleError("half-space map evaluated at its pole -e_1")
    out = np.empty_like(pts)
    out[..., 0] = (1.0 - _sq_norm(pts)) / D
    out[..., 1:] = 2.0 * rest / D
    return out


def ball_to_halfspace(x) -> HalfSpacePoint:
    """Map a ball point to (z, r) in the upper half-space model."""
    if isinstance(x, DiscPoint):
        c = x.coords
    else:
        c = _as_points(x)
        if c.ndim != 1:
            raise ValueError("ball_to_halfspace takes a single point")
        _check_in_ball(c)
    img = halfspace_map(c)
    r = float(img[0])
    if r <= 0.0:
        raise GeometryError("image degenerated to r <= 0")
    return HalfSpacePoint(img[1:], r)


def halfspace_to_ball(y: HalfSpacePoint) -> DiscPoint:
    """Map a half-space point (z, r) to the ball model."""
    if not isinstance(y, HalfSpacePoint):
        raise TypeError("halfspace_to_ball takes a HalfSpacePoint")
    vec = np.concatenate(([y.r], y.z))
    img = halfspace_map(vec)
    if _sq_norm(img) >= 1.0:
        raise GeometryError("image degenerated to |x| >= 1")
    return DiscPoint(img)


def halfspace_distance(y1: HalfSpacePoint, y2: HalfSpacePoint) -> float:
    """Distance in the half-space model: arccosh(1 + (|z1-z2|^2+(r1-r2)^2)/(2 r1 r2))."""
    dz2 = float(_sq_norm(y1.z - y2.z))
    arg = 1.0 + (dz2 + (y1.r - y2.r) ** 2) / (2.0 * y1.r * y2.r)
    return float(np.arccosh(max(arg, 1.0)))


# ---------------------------------------------------------------------------
# spheres, planes, orthogonality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Plane:
    """Extended hyperplane P(a, t) = {x : x.a = t} with unit normal a."""

    normal: np.ndarray
    offset: float = 0.0

    def __init__(self, normal, offset: float = 0.0):
        n = np.asarray(normal, dtype=float)
        n = n / np.linalg.norm(n)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(offset))


@dataclass(frozen=True)
class Sphere:
    """Euclidean sphere S(center, radius)."""

    center: np.ndarray
    radius: float

    def __init__(self, center, radius: float):
        c = np.asarray(center, dtype=float)
        if not radius > 0.0:
            raise GeometryError("sphere radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(radius))


def orthogonal(s1, s2, tol: float = 1e-12) -> bool:
    """Orthogonality of two spheres of the extended space R^N + {inf}.

    Plane/plane: normals orthogonal.  Sphere/plane: center on the plane.
    Sphere/sphere: |a-b|^2 = r^2 + s^2.
    """
    if isinstance(s1, Plane) and isinstance(s2, Plane):
        return bool(abs(float(s1.normal @ s2.normal)) <= tol)
    if isinstance(s1, Sphere) and isinstance(s2, Plane):
        s1, s2 = s2, s1
    if isinstance(s1, Plane) and isinstance(s2, Sphere):
        return bool(abs(float(s2.center @ s1.normal) - s1.offset) <= tol)
    if isinstance(s1, Sphere) and isinstance(s2, Sphere):
        lhs = float(_sq_norm(s1.center - s2.center))
        rhs = s1.radius ** 2 + s2.radius ** 2
        return bool(abs(lhs - rhs) <= tol * max(1.0, rhs))
    raise TypeError("arguments must be Sphere or Plane descriptors")


# ---------------------------------------------------------------------------
# caps and cap-to-cap isometries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cap:
    """Cap A(a, r) = B(a, r) intersected with the ball, where |a|^2 = 1 + r^2.

    The defining condition makes the boundary sphere orthogonal to S^(N-1),
    so the cap is bounded by a totally geodesic hypersurface.
    """

    a: np.ndarray
    r: float

    def __init__(self, a, r: float):
        a = np.asarray(a, dtype=float)
        if not r > 0.0:
            raise GeometryError("cap radius must be positive")
        if abs(float(_sq_norm(a)) - (1.0 + r * r)) > 1e-9 * (1.0 + r * r):
            raise GeometryError("cap apex must satisfy |a|^2 = 1 + r^2")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "r", float(r))

    @property
    def N(self) -> int:
        return self.a.shape[0]

    @property
    def sphere(self) -> Sphere:
        return Sphere(self.a, self.r)

    @property
    def axis_foot(self) -> float:
        """Distance from the origin to the cap along the apex direction, |a| - r."""
        # equals 1/(|a| + r), always in (0, 1)
        na = float(np.linalg.norm(self.a))
        return 1.0 / (na + self.r)

    def contains(self, x, margin: float = 0.0) -> np.ndarray:
        """Membership in A(a, r): inside both B(a, r) and the unit ball."""
        pts = _as_points(x)
        din = self.r - np.sqrt(_sq_norm(pts - self.a))
        inside_ball = _sq_norm(pts) < 1.0
        return (din > -margin) & inside_ball

    def membership_margin(self, x) -> np.ndarray:
        """Signed distance r - |x - a| to the defining sphere (positive inside)."""
        pts = _as_points(x)
        return self.r - np.sqrt(_sq_norm(pts - self.a))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform samples of the cap by rejection from B(a, r)."""
        out = []
        need = n
        dim = self.N
        while need > 0:
            m = max(4 * need, 64)
            dirs = rng.standard_normal((m, dim))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            radii = self.r * rng.random(m) ** (1.0 / dim)
            pts = self.a + radii[:, None] * dirs
            keep = pts[_sq_norm(pts) < (1.0 - BOUNDARY_MARGIN) ** 2]
            out.append(keep[:need])
            need -= len(keep[:need])
        return np.vstack(out)

    def boundary_sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Points of the defining sphere lying inside the unit ball."""
        out = []
        need = n
        dim = self.N
        while need > 0:
            m = max(4 * need, 64)
            dirs = rng.standard_normal((m, dim))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            pts = self.a + self.r * dirs
            keep = pts[_sq_norm(pts) < (1.0 - BOUNDARY_MARGIN) ** 2]
            out.append(keep[:need])
            need -= len(keep[:need])
        return np.vstack(out)


def _rotation_factors(u: np.ndarray, v: np.ndarray) -> tuple:
    """Reflection factors through the origin carrying unit vector u to v."""
    if float(np.linalg.norm(u - v)) <= 1e-14:
        return ()
    if float(np.linalg.norm(u + v)) <= 1e-14:
        return (PlaneReflection(u, 0.0),)
    return (PlaneReflection(u - v, 0.0),)


def cap_isometry(c1: Cap, c2: Cap) -> Isometry:
    """A ball isometry carrying the cap A(a_1, r_1) onto A(a_2, r_2).

    Construction: rotate the apex direction of c1 onto the first axis,
    translate along that axis so the geodesic boundary hypersurface lands on
    the boundary hypersurface of c2 (the defining spheres meet the axis
    orthogonally at |a| - r), then rotate onto the apex direction of c2.
    The result is deterministic and built entirely from ball-preserving
    factors.
    """
    if c1.N != c2.N:
        raise GeometryError("caps live in different dimensions")
    N = c1.N
    e1 = np.zeros(N)
    e1[0] = 1.0
    u1 = c1.a / np.linalg.norm(c1.a)
    u2 = c2.a / np.linalg.norm(c2.a)

    rho1 = c1.axis_foot
    rho2 = c2.axis_foot
    gamma = (rho2 - rho1) / (1.0 - rho1 * rho2)

    factors = list(_rotation_factors(u1, e1))
    factors += list(translation(gamma * e1).factors)
    factors += list(_rotation_factors(e1, u2))
    return Isometry(tuple(factors))
