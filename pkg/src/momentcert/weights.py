"""Named weight-function families for weighted norms and determinacy sums.

All weights satisfy ``k2(r) >= 1``.  Suprema of sampled weight families over
boxes and balls are taken at a fixed resolution and multiplied by a safety
margin; the looseness is in the conservative direction for every use in
this package (admission bounds and determinacy denominators only grow).
Constant weights are evaluated exactly, with no margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedFamily, WeightBelowOne

SUP_RESOLUTION = 0.01
SUP_MARGIN = 1.05


def derivative_order_for_dimension(dimension: int) -> int:
    """Derivative orders entering the envelope: ceil((d+1)/2)."""
    return (dimension + 2) // 2


def _radii(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0:
        return np.abs(pts)
    if pts.ndim == 1:
        return np.abs(pts)
    return np.sqrt(np.sum(pts * pts, axis=-1))


@dataclass(frozen=True)
class ConstantWeight:
    """k2(r) = c with c >= 1; suprema are exact."""

    value: float = 1.0

    def __post_init__(self):
        if self.value < 1.0:
            raise WeightBelowOne(f"constant weight {self.value} < 1")

    def __call__(self, points) -> np.ndarray:
        return np.full(np.shape(_radii(points)), self.value)

    def envelope(self, points, l: int) -> np.ndarray:
        # all derivatives vanish; the zeroth-order term c^2 dominates
        return np.full(np.shape(_radii(points)), self.value ** 2)

    def to_json(self) -> dict:
        return {"name": "const", "params": {"c": self.value}}


@dataclass(frozen=True)
class PolyEvenWeight:
    """k2(r) = sum_i coeffs[i] * |r|^(2i); coeffs[0] >= 1, others >= 0.

    Radial and non-decreasing in |r| in any dimension.  Derivative
    magnitudes are bounded through the radial profile q(s), s = |r|^2:
    |grad| <= 2|r| q'(s) and |second partials| <= 4|r|^2 q''(s) + 2 q'(s),
    which covers envelope orders up to 2 (spatial dimension d <= 3).
    """

    coeffs: tuple[float, ...]

    def __post_init__(self):
        if not self.coeffs or self.coeffs[0] < 1.0:
            raise WeightBelowOne("constant coefficient must be >= 1")
        if any(c < 0.0 for c in self.coeffs[1:]):
            raise WeightBelowOne("higher coefficients must be >= 0 to keep k2 >= 1")

    @classmethod
    def pair(cls, scale: float, power: int) -> "PolyEvenWeight":
        """The family C * (1 + r^(2n))."""
        coeffs = [0.0] * (power + 1)
        coeffs[0] = float(scale)
        coeffs[power] = float(scale)
        return cls(tuple(coeffs))

    def pair_parameters(self) -> tuple[float, int] | None:
        """Recover (C, n) if the coefficients match C*(1 + r^(2n))."""
        nz = [i for i, c in enumerate(self.coeffs) if c != 0.0]
        if len(nz) == 2 and nz[0] == 0 and self.coeffs[0] == self.coeffs[nz[1]]:
            return self.coeffs[0], nz[1]
        return None

    def _profile(self, s: np.ndarray, order: int) -> np.ndarray:
        """order-th derivative of q(s) = sum c_i s^i."""
        total = np.zeros_like(s)
        for i, c in enumerate(self.coeffs):
            if i < order or c == 0.0:
                continue
            fac = c * math.prod(range(i - order + 1, i + 1))
            total += fac * s ** (i - order)
        return total

    def __call__(self, points) -> np.ndarray:
        s = _radii(points) ** 2
        return self._profile(s, 0)

    def envelope(self, points, l: int) -> np.ndarray:
        """max over |kappa| <= l of |D^kappa k2|^2 (radial upper bounds)."""
        if l > 2:
            raise UnsupportedFamily(
                "polynomial envelope implemented for derivative orders <= 2 "
                "(spatial dimension <= 3)")
        rho = _radii(points)
        s = rho ** 2
        best = self._profile(s, 0) ** 2
        if l >= 1:
            best = np.maximum(best, (2.0 * rho * self._profile(s, 1)) ** 2)
        if l >= 2:
            second = 4.0 * s * self._profile(s, 2) + 2.0 * self._profile(s, 1)
            best = np.maximum(best, second ** 2)
        return best

    def to_json(self) -> dict:
        return {"name": "poly_even", "params": {"coeffs": list(self.coeffs)}}


@dataclass(frozen=True)
class ExpWeight:
    """k2(r) = C * (1 + e^(a r)) on the line; C >= 1."""

    scale: float
    rate: float

    def __post_init__(self):
        if self.scale < 1.0:
            raise WeightBelowOne(f"scale {self.scale} < 1")

    def __call__(self, points) -> np.ndarray:
        r = np.asarray(points, dtype=float)
        if r.ndim > 1:
            if r.shape[-1] != 1:
                raise UnsupportedFamily("exponential weights are one-dimensional")
            r = r[..., 0]
        return self.scale * (1.0 + np.exp(self.rate * r))

    def derivative(self, points) -> np.ndarray:
        r = np.asarray(points, dtype=float)
        return self.scale * self.rate * np.exp(self.rate * r)

    def envelope(self, points, l: int) -> np.ndarray:
        if l > 1:
            raise UnsupportedFamily(
                "exponential envelope implemented for derivative order 1 (d = 1)")
        vals = self(points) ** 2
        if l >= 1:
            vals = np.maximum(vals, self.derivative(points) ** 2)
        return vals

    def to_json(self) -> dict:
        return {"name": "exp", "params": {"C": self.scale, "a": self.rate}}


Weight = ConstantWeight | PolyEvenWeight | ExpWeight


def weight_from_json(obj: dict) -> Weight:
    name = obj["name"]
    params = obj.get("params", {})
    if name == "const":
        return ConstantWeight(float(params.get("c", 1.0)))
    if name == "poly_even":
        return PolyEvenWeight(tuple(float(c) for c in params["coeffs"]))
    if name == "exp":
        return ExpWeight(float(params["C"]), float(params["a"]))
    raise UnsupportedFamily(f"unknown weight family {name!r}")


# ---------------------------------------------------------------------------
# sampled suprema
# ---------------------------------------------------------------------------

def _sample_count(lo: float, hi: float, resolution: float) -> int:
    return max(2, int(math.ceil((hi - lo) / resolution)) + 1)


def sup_sqrt_weight_box(weight: Weight, center, half_width: float = 1.0,
                        dimension: int = 1, resolution: float = SUP_RESOLUTION,
                        margin: float = SUP_MARGIN) -> float:
    """sup of sqrt(k2) over the box center + [-hw, hw]^d, sampled with margin."""
    if isinstance(weight, ConstantWeight):
        return math.sqrt(weight.value)
    if dimension == 1:
        c = float(np.asarray(center).reshape(-1)[0]) if np.ndim(center) else float(center)
        rs = np.linspace(c - half_width, c + half_width,
                         _sample_count(c - half_width, c + half_width, resolution))
        return float(np.sqrt(weight(rs).max())) * margin
    if isinstance(weight, PolyEvenWeight):
        # radial, non-decreasing profile: the box is inside the ball of
        # radius |center| + hw*sqrt(d); sample the radius range
        rho_max = float(np.linalg.norm(np.asarray(center, dtype=float))) \
            + half_width * math.sqrt(dimension)
        rs = np.linspace(0.0, rho_max, _sample_count(0.0, rho_max, resolution))
        return float(np.sqrt(weight(rs).max())) * margin
    raise UnsupportedFamily("multi-dimensional supremum needs a radial weight")


def sup_sqrt_weight_ball_box(weight: Weight, ball_radius: float,
                             dimension: int = 1,
                             resolution: float = SUP_RESOLUTION,
                             margin: float = SUP_MARGIN) -> float:
    """sup of sqrt(k2) over {z + x : |z| <= R, x in [-1,1]^d}."""
    if isinstance(weight, ConstantWeight):
        return math.sqrt(weight.value)
    if dimension == 1:
        hi = ball_radius + 1.0
        rs = np.linspace(-hi, hi, _sample_count(-hi, hi, resolution))
        return float(np.sqrt(weight(rs).max())) * margin
    if isinstance(weight, PolyEvenWeight):
        rho_max = ball_radius + math.sqrt(dimension)
        rs = np.linspace(0.0, rho_max, _sample_count(0.0, rho_max, resolution))
        return float(np.sqrt(weight(rs).max())) * margin
    raise UnsupportedFamily("multi-dimensional supremum needs a radial weight")


def sup_sqrt_envelope_ball_box(weight: Weight, ball_radius: float,
                               dimension: int = 1,
                               resolution: float = SUP_RESOLUTION,
                               margin: float = SUP_MARGIN) -> float:
    """sup of sqrt(envelope) over the same Minkowski set.

    The envelope dominates |D^kappa k2|^2 for all |kappa| <= ceil((d+1)/2),
    including kappa = 0.
    """
    l = derivative_order_for_dimension(dimension)
    if isinstance(weight, ConstantWeight):
        return weight.value
    if dimension == 1:
        hi = ball_radius + 1.0
        rs = np.linspace(-hi, hi, _sample_count(-hi, hi, resolution))
        return float(np.sqrt(weight.envelope(rs, l).max())) * margin
    if isinstance(weight, PolyEvenWeight):
        rho_max = ball_radius + math.sqrt(dimension)
        rs = np.linspace(0.0, rho_max, _sample_count(0.0, rho_max, resolution))
        return float(np.sqrt(weight.envelope(rs, l).max())) * margin
    raise UnsupportedFamily("multi-dimensional envelope needs a radial weight")
