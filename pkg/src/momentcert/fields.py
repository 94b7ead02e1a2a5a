"""Moment tensors of random measures discretized on a finite grid.

The infinite-dimensional realizability problem is audited here at desk
scale: measures on measures become weighted mixtures of grid measures,
moment functions become symmetric tensors over grid cells (kept in exact
atomic-rank form ``sum_j w_j eta_j^(x n)`` whenever possible), and the
support conditions for "all Radon measures" and "density bounded by c"
become positive-semidefiniteness of generalized moment and localizing
matrices probed along a documented sample set of non-negative test
functions.  Passing verdicts are necessary-at-sample-set only; failing
verdicts are disproofs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import logsumexp

from . import quasianalytic as qa
from .errors import (
    GridMismatch,
    MissingOrder,
    NegativeContraction,
    NegativePhi,
    NoDensity,
    NonPositiveC,
    NotSymmetric,
    OrderOverflow,
    TensorTooLarge,
    WeightBelowOne,
)
from .moments import DEFAULT_PSD_TOL, PsdReport, is_psd
from .weights import Weight, sup_sqrt_envelope_ball_box, weight_from_json

DENSE_ENTRY_WALL = 10 ** 6     # max entries of a materialized tensor
MATRIX_DIM_WALL = 2048         # max rows of an assembled matrix


# ---------------------------------------------------------------------------
# grid, measures, test functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Uniform grid with g points per axis; discrete Lebesgue cell volume h^d."""

    dimension: int
    points_per_axis: int
    spacing: float
    origin: tuple[float, ...] = ()

    def __post_init__(self):
        if self.points_per_axis < 1 or self.spacing <= 0 or self.dimension < 1:
            raise ValueError("grid needs g >= 1, h > 0, d >= 1")
        if not self.origin:
            object.__setattr__(self, "origin", (0.0,) * self.dimension)
        elif len(self.origin) != self.dimension:
            raise GridMismatch("origin length differs from dimension")

    @property
    def num_cells(self) -> int:
        return self.points_per_axis ** self.dimension

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dimension

    def coordinates(self) -> np.ndarray:
        """Cell centers as an array of shape (num_cells, d), row-major."""
        axes = [np.asarray(self.origin[a]) + self.spacing * np.arange(self.points_per_axis)
                for a in range(self.dimension)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def flat_index(self, cell) -> int:
        if isinstance(cell, (int, np.integer)):
            idx = int(cell)
            if not 0 <= idx < self.num_cells:
                raise IndexError(f"cell {idx} out of range")
            return idx
        return int(np.ravel_multi_index(tuple(int(c) for c in cell),
                                        (self.points_per_axis,) * self.dimension))

    def to_json(self) -> dict:
        return {"d": self.dimension, "g": self.points_per_axis,
                "h": self.spacing, "origin": list(self.origin)}

    @classmethod
    def from_json(cls, obj: dict) -> "Grid":
        return cls(int(obj["d"]), int(obj["g"]), float(obj["h"]),
                   tuple(float(v) for v in obj.get("origin", []) or ()))


@dataclass(eq=False)
class GridMeasure:
    """Non-negative mass per grid cell (a Radon measure on the grid)."""

    grid: Grid
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.weights.size != self.grid.num_cells:
            raise GridMismatch("weight vector length differs from cell count")
        if np.any(self.weights < 0.0):
            raise ValueError("grid measure weights must be >= 0")

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def density(self) -> np.ndarray:
        return self.weights / self.grid.cell_volume


@dataclass(eq=False)
class TestFunction:
    """Real values per grid cell; the pairing with a measure is a dot product."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.values.size != self.grid.num_cells:
            raise GridMismatch("value vector length differs from cell count")

    @property
    def nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0.0))

    @classmethod
    def constant(cls, grid: Grid, c: float = 1.0) -> "TestFunction":
        return cls(grid, np.full(grid.num_cells, float(c)))

    @classmethod
    def indicator(cls, grid: Grid, cell) -> "TestFunction":
        v = np.zeros(grid.num_cells)
        v[grid.flat_index(cell)] = 1.0
        return cls(grid, v)

    @classmethod
    def box_indicator(cls, grid: Grid, corner: Sequence[int], width: int) -> "TestFunction":
        """Indicator of the axis-aligned cube of the given cell width."""
        g, d = grid.points_per_axis, grid.dimension
        corner = tuple(int(c) for c in corner)
        if any(c < 0 or c + width > g for c in corner):
            raise IndexError("box leaves the grid")
        v = np.zeros((g,) * d)
        v[tuple(slice(c, c + width) for c in corner)] = 1.0
        return cls(grid, v.ravel())


def default_phi_samples(grid: Grid, max_box_width: int = 3) -> list[TestFunction]:
    """Documented probe set for the non-negative constraint cone.

    All single-cell indicators plus all axis-aligned cube indicators of
    widths 2..max_box_width.  Every sample is an honest member of the cone,
    so failures are disproofs; passes certify positivity on this set only.
    """
    g, d = grid.points_per_axis, grid.dimension
    out = [TestFunction.indicator(grid, i) for i in range(grid.num_cells)]
    for width in range(2, max_box_width + 1):
        if width > g:
            break
        for corner in itertools.product(range(g - width + 1), repeat=d):
            out.append(TestFunction.box_indicator(grid, corner, width))
    return out


# ---------------------------------------------------------------------------
# moment tensor sequences
# ---------------------------------------------------------------------------

def _check_symmetric_tensor(t: np.ndarray, rtol: float = 1e-10) -> None:
    # adjacent transpositions generate the symmetric group
    scale = np.abs(t).max() if t.size else 0.0
    for axis in range(t.ndim - 1):
        perm = list(range(t.ndim))
        perm[axis], perm[axis + 1] = perm[axis + 1], perm[axis]
        if np.abs(t - np.transpose(t, perm)).max() > rtol * (1.0 + scale):
            raise NotSymmetric(f"order-{t.ndim} tensor not permutation symmetric")


@dataclass(eq=False)
class MomentTensorSeq:
    """Sequence of symmetric order-n moment tensors over a grid.

    Atomic-rank form stores ``(w_j, eta_j)`` with ``m^(n) = sum_j w_j
    eta_j^(x n)`` and evaluates every operation without materializing
    tensors; dense form stores the tensors themselves up to the entry wall.
    Atomic weights are strictly positive for sequences claiming to come from
    a measure on measures; shifted sequences produced by localizing
    operations may carry signed weights.

    ``has_density`` marks that ``m^(n) = alpha^(n) * h^(dn)`` is to be read
    through its density ``alpha^(n)`` (grid measures always have one).
    """

    grid: Grid
    max_order: int
    atom_weights: np.ndarray | None = None
    atom_etas: np.ndarray | None = None
    tensors: tuple[np.ndarray, ...] | None = None
    has_density: bool = False

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_atoms(cls, grid: Grid, weights: Sequence[float],
                   etas: Sequence[np.ndarray] | np.ndarray, max_order: int,
                   *, density: bool = True, require_positive: bool = True,
                   ) -> "MomentTensorSeq":
        w = np.asarray(weights, dtype=float).reshape(-1)
        e = np.asarray(etas, dtype=float).reshape(len(w), -1)
        if e.shape[1] != grid.num_cells:
            raise GridMismatch("atom length differs from cell count")
        if require_positive and np.any(w <= 0.0):
            raise ValueError("atomic weights must be > 0")
        return cls(grid=grid, max_order=max_order, atom_weights=w, atom_etas=e,
                   has_density=density)

    @classmethod
    def from_ensemble(cls, measures: Sequence[GridMeasure],
                      weights: Sequence[float], max_order: int) -> "MomentTensorSeq":
        grid = measures[0].grid
        if any(gm.grid != grid for gm in measures):
            raise GridMismatch("ensemble measures on different grids")
        return cls.from_atoms(grid, weights, [gm.weights for gm in measures], max_order)

    @classmethod
    def from_tensors(cls, grid: Grid, tensors: Sequence[np.ndarray],
                     *, density: bool = False) -> "MomentTensorSeq":
        fixed = []
        for n, t in enumerate(tensors):
            t = np.asarray(t, dtype=float)
            if n == 0:
                t = t.reshape(())
            else:
                if t.size != grid.num_cells ** n:
                    raise GridMismatch(f"order-{n} tensor has wrong size")
                if t.size > DENSE_ENTRY_WALL:
                    raise TensorTooLarge(
                        f"order-{n} tensor has {t.size} entries (> {DENSE_ENTRY_WALL}); "
                        "use the atomic-rank representation")
                t = t.reshape((grid.num_cells,) * n)
                _check_symmetric_tensor(t)
            fixed.append(t)
        return cls(grid=grid, max_order=len(fixed) - 1, tensors=tuple(fixed),
                   has_density=density)

    # -- basics -----------------------------------------------------------

    @property
    def is_atomic(self) -> bool:
        return self.atom_weights is not None

    @property
    def total_mass(self) -> float:
        if self.is_atomic:
            return float(self.atom_weights.sum())
        return float(self.tensors[0])

    def tensor(self, n: int) -> np.ndarray:
        """Materialize m^(n); guarded by the dense entry wall."""
        if n > self.max_order:
            raise OrderOverflow(f"order {n} > max order {self.max_order}")
        if not self.is_atomic:
            return self.tensors[n]
        if n == 0:
            return np.asarray(self.total_mass)
        if self.grid.num_cells ** n > DENSE_ENTRY_WALL:
            raise TensorTooLarge(
                f"materializing order {n} needs {self.grid.num_cells ** n} entries")
        out = np.zeros((self.grid.num_cells,) * n)
        for w, eta in zip(self.atom_weights, self.atom_etas):
            t = np.asarray(w, dtype=float)
            for _ in range(n):
                t = np.multiply.outer(t, eta)
            out += t
        return out

    def to_dense(self) -> "MomentTensorSeq":
        return MomentTensorSeq.from_tensors(
            self.grid, [self.tensor(n) for n in range(self.max_order + 1)],
            density=self.has_density)

    def densities(self) -> "MomentTensorSeq":
        if not self.has_density:
            raise NoDensity("sequence does not carry a density interpretation")
        return self

    # -- JSON ------------------------------------------------------------

    def to_json(self) -> dict:
        out: dict = {"grid": self.grid.to_json(), "N": self.max_order}
        if self.is_atomic:
            out["atoms"] = [{"w": float(w), "eta": [float(v) for v in eta]}
                            for w, eta in zip(self.atom_weights, self.atom_etas)]
        else:
            out["tensors"] = [{"n": n, "entries": [float(v) for v in
                                                   np.ravel(self.tensors[n])]}
                              for n in range(self.max_order + 1)]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "MomentTensorSeq":
        grid = Grid.from_json(obj["grid"])
        if "atoms" in obj:
            atoms = obj["atoms"]
            return cls.from_atoms(grid, [a["w"] for a in atoms],
                                  [a["eta"] for a in atoms], int(obj["N"]))
        entries = sorted(obj["tensors"], key=lambda e: e["n"])
        tensors = [np.asarray(e["entries"], dtype=float) for e in entries]
        return cls.from_tensors(grid, tensors)


# ---------------------------------------------------------------------------
# pairings and the field shift
# ---------------------------------------------------------------------------

def _require_same_grid(grid: Grid, others: Iterable) -> None:
    for o in others:
        if o.grid != grid:
            raise GridMismatch("objects live on different grids")


def pair(fs: Sequence[TestFunction], m: MomentTensorSeq) -> float:
    """Duality pairing ``<f_1 x ... x f_n, m^(n)>`` with n = len(fs).

    Atomic form evaluates ``sum_j w_j prod_i <f_i, eta_j>`` without
    materializing tensors; n = 0 returns the total mass.
    """
    n = len(fs)
    if n > m.max_order:
        raise OrderOverflow(f"pairing order {n} > max order {m.max_order}")
    _require_same_grid(m.grid, fs)
    if n == 0:
        return m.total_mass
    if m.is_atomic:
        inner = np.stack([m.atom_etas @ f.values for f in fs])  # (n, J)
        return float(np.sum(m.atom_weights * np.prod(inner, axis=0)))
    t = m.tensor(n)
    for f in fs:
        t = np.tensordot(f.values, t, axes=(0, 0))
    return float(t)


def pair_tensor(coeff: np.ndarray, m: MomentTensorSeq) -> float:
    """Pairing ``<coeff, m^(n)>`` for a general order-n coefficient tensor."""
    coeff = np.asarray(coeff, dtype=float)
    n = coeff.ndim if coeff.shape != () else 0
    if n > m.max_order:
        raise OrderOverflow(f"pairing order {n} > max order {m.max_order}")
    if n == 0:
        return float(coeff) * m.total_mass
    if m.is_atomic:
        total = 0.0
        for w, eta in zip(m.atom_weights, m.atom_etas):
            t = coeff
            for _ in range(n):
                t = np.tensordot(t, eta, axes=(0, 0))
            total += w * float(t)
        return total
    return float(np.vdot(coeff, m.tensor(n)))


@dataclass(eq=False)
class FieldPolynomial:
    """Polynomial on measures: ``P(eta) = p0 + sum_j <p^(j), eta^(x j)>``."""

    grid: Grid
    constant: float = 0.0
    coeff_tensors: tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        fixed = []
        for j, t in enumerate(self.coeff_tensors, start=1):
            t = np.asarray(t, dtype=float).reshape((self.grid.num_cells,) * j)
            _check_symmetric_tensor(t)
            fixed.append(t)
        self.coeff_tensors = tuple(fixed)

    @property
    def order(self) -> int:
        return len(self.coeff_tensors)

    @classmethod
    def constant_poly(cls, grid: Grid, c: float) -> "FieldPolynomial":
        return cls(grid, constant=float(c))

    @classmethod
    def linear(cls, phi: TestFunction) -> "FieldPolynomial":
        """The evaluation polynomial ``eta -> <phi, eta>``."""
        return cls(phi.grid, constant=0.0, coeff_tensors=(phi.values.copy(),))

    @classmethod
    def density_slack(cls, c: float, phi: TestFunction) -> "FieldPolynomial":
        """``eta -> c <phi, lambda> - <phi, eta>`` with lambda the cell-volume measure."""
        lam_pairing = float(phi.values.sum()) * phi.grid.cell_volume
        return cls(phi.grid, constant=c * lam_pairing,
                   coeff_tensors=(-phi.values,))

    def evaluate(self, eta: np.ndarray | GridMeasure) -> float:
        vals = eta.weights if isinstance(eta, GridMeasure) else np.asarray(eta, float)
        total = self.constant
        for t in self.coeff_tensors:
            c = t
            for _ in range(c.ndim):
                c = np.tensordot(c, vals, axes=(0, 0))
            total += float(c)
        return total


def field_shift(m: MomentTensorSeq, p: FieldPolynomial) -> MomentTensorSeq:
    """Shifted sequence with pairing ``<f, (_Pm)^(n)> = sum_j <p^(j) x f, m^(n+j)>``.

    Atomic form just rescales each atom weight by ``P(eta_j)`` (the shifted
    sequence realizes the signed measure ``P dmu``); the truncation order
    drops by the order of ``P``.
    """
    if p.grid != m.grid:
        raise GridMismatch("polynomial and sequence grids differ")
    if p.order > m.max_order:
        raise OrderOverflow(f"shift order {p.order} > max order {m.max_order}")
    new_order = m.max_order - p.order
    if m.is_atomic:
        new_w = np.array([w * p.evaluate(eta)
                          for w, eta in zip(m.atom_weights, m.atom_etas)])
        return MomentTensorSeq(grid=m.grid, max_order=new_order,
                               atom_weights=new_w, atom_etas=m.atom_etas,
                               has_density=m.has_density)
    new_tensors = []
    for n in range(new_order + 1):
        acc = p.constant * m.tensors[n]
        for j, coeff in enumerate(p.coeff_tensors, start=1):
            acc = acc + np.tensordot(coeff, m.tensors[n + j], axes=j)
        new_tensors.append(acc)
    return MomentTensorSeq(grid=m.grid, max_order=new_order,
                           tensors=tuple(new_tensors), has_density=m.has_density)


# ---------------------------------------------------------------------------
# generalized moment matrices
# ---------------------------------------------------------------------------

def basis_words(n_basis: int, t: int) -> list[tuple[int, ...]]:
    """Words over the basis of length <= t, ordered by (length, lex).

    With this order the level-t matrix is the leading principal submatrix
    of every higher level.
    """
    words: list[tuple[int, ...]] = []
    for length in range(t + 1):
        words.extend(itertools.product(range(n_basis), repeat=length))
    return words


def _guard_matrix_dim(dim: int) -> None:
    if dim > MATRIX_DIM_WALL:
        raise TensorTooLarge(
            f"matrix dimension {dim} exceeds the desk-scale wall "
            f"{MATRIX_DIM_WALL}; lower t or the basis size")


def generalized_moment_matrix(m: MomentTensorSeq, basis: Sequence[TestFunction],
                              t: int) -> np.ndarray:
    """Matrix of ``m`` over products of basis evaluations up to degree t.

    Rows and columns are indexed by words over the basis (including the
    empty word); the entry at (u, v) is the pairing of the concatenated
    word against ``m^(|u|+|v|)``.  PSD for every sequence realized by a
    non-negative measure.
    """
    if 2 * t > m.max_order:
        raise OrderOverflow(f"2t = {2 * t} > max order {m.max_order}")
    _require_same_grid(m.grid, basis)
    words = basis_words(len(basis), t)
    dim = len(words)
    _guard_matrix_dim(dim)
    if m.is_atomic:
        inner = np.stack([f.values @ m.atom_etas.T for f in basis]) \
            if basis else np.zeros((0, len(m.atom_weights)))
        rows = np.ones((dim, len(m.atom_weights)))
        for r, word in enumerate(words):
            for i in word:
                rows[r] *= inner[i]
        return (rows * m.atom_weights) @ rows.T
    cache: dict[tuple[int, ...], float] = {}

    def entry(word: tuple[int, ...]) -> float:
        key = tuple(sorted(word))
        if key not in cache:
            cache[key] = pair([basis[i] for i in key], m)
        return cache[key]

    h = np.empty((dim, dim))
    for i, u in enumerate(words):
        for j in range(i, dim):
            v = entry(u + words[j])
            h[i, j] = v
            h[j, i] = v
    return h


def _validate_phis(phis: Sequence[TestFunction]) -> None:
    for i, phi in enumerate(phis):
        if not phi.nonnegative:
            raise NegativePhi(f"phi sample {i} has a negative value")


def check_radon(m: MomentTensorSeq, basis: Sequence[TestFunction],
                phi_samples: Sequence[TestFunction], t: int,
                tol: float = DEFAULT_PSD_TOL) -> list[PsdReport]:
    """Necessary conditions for realizability on the cone of Radon measures.

    One report for the generalized moment matrix and one for the shifted
    matrix of each non-negative sample function (its localizing matrix).
    Levels are capped by the available truncation order.
    """
    if m.max_order < 1:
        raise OrderOverflow("need max order >= 1 for the shifted conditions")
    _validate_phis(phi_samples)
    t0 = min(t, m.max_order // 2)
    t1 = min(t, (m.max_order - 1) // 2)
    reports = [is_psd(generalized_moment_matrix(m, basis, t0), tol,
                      name="moment", level=t0)]
    for i, phi in enumerate(phi_samples):
        shifted = field_shift(m, FieldPolynomial.linear(phi))
        reports.append(is_psd(generalized_moment_matrix(shifted, basis, t1), tol,
                              name=f"radon_shift[{i}]", level=t1))
    return reports


def check_bounded_density(m: MomentTensorSeq, c: float,
                          basis: Sequence[TestFunction],
                          phi_samples: Sequence[TestFunction], t: int,
                          tol: float = DEFAULT_PSD_TOL) -> list[PsdReport]:
    """Necessary conditions for support in {density <= c}.

    The Radon reports plus, per sample phi, the localizing matrix of the
    slack ``c <phi, lambda> - <phi, eta>``.
    """
    if not c > 0.0:
        raise NonPositiveC(f"density bound must be > 0, got {c}")
    reports = check_radon(m, basis, phi_samples, t, tol)
    t1 = min(t, (m.max_order - 1) // 2)
    for i, phi in enumerate(phi_samples):
        shifted = field_shift(m, FieldPolynomial.density_slack(c, phi))
        reports.append(is_psd(generalized_moment_matrix(shifted, basis, t1), tol,
                              name=f"density_bound[{i}]", level=t1))
    return reports


# ---------------------------------------------------------------------------
# density-slice positivity
# ---------------------------------------------------------------------------

def sliced_density_psd(m: MomentTensorSeq, y, t: int,
                       tol: float = DEFAULT_PSD_TOL, variant: str = "plain",
                       c: float | None = None) -> PsdReport:
    """PSD test of a density-slice sequence in the generalized sense.

    variant "plain":     the density sequence alpha^(n) itself
    variant "shifted":   alpha^(n+1)(., y) with the last argument frozen at
                         the cell y
    variant "hausdorff": c * alpha^(n)(.) - alpha^(n+1)(., y)

    The matrix is indexed by words of grid cells (length <= t), i.e. the
    canonical indicator basis; entries are density tensor values.
    """
    if variant not in ("plain", "shifted", "hausdorff"):
        raise ValueError(f"unknown variant {variant!r}")
    if not m.has_density:
        raise NoDensity("sequence does not carry a density interpretation")
    if variant == "hausdorff":
        if c is None or not c > 0.0:
            raise NonPositiveC("hausdorff variant needs c > 0")
    y_idx = m.grid.flat_index(y)
    extra = 0 if variant == "plain" else 1
    if 2 * t + extra > m.max_order:
        raise OrderOverflow(f"2t + {extra} > max order {m.max_order}")
    g = m.grid.num_cells
    words = basis_words(g, t)
    dim = len(words)
    _guard_matrix_dim(dim)
    vol = m.grid.cell_volume

    if m.is_atomic:
        rho = m.atom_etas / vol
        if variant == "plain":
            v = m.atom_weights.copy()
        elif variant == "shifted":
            v = m.atom_weights * rho[:, y_idx]
        else:
            v = m.atom_weights * (c - rho[:, y_idx])
        rows = np.ones((dim, len(v)))
        for r, word in enumerate(words):
            for cell in word:
                rows[r] *= rho[:, cell]
        h = (rows * v) @ rows.T
    else:
        def alpha(order: int) -> np.ndarray:
            return m.tensor(order) / vol ** order

        h = np.empty((dim, dim))
        for i, u in enumerate(words):
            for j in range(i, dim):
                cells = u + words[j]
                n = len(cells)
                if variant == "plain":
                    val = float(alpha(n)[cells]) if n else float(alpha(0))
                elif variant == "shifted":
                    val = float(alpha(n + 1)[cells + (y_idx,)])
                else:
                    base = float(alpha(n)[cells]) if n else float(alpha(0))
                    val = c * base - float(alpha(n + 1)[cells + (y_idx,)])
                h[i, j] = val
                h[j, i] = val
    return is_psd(h, tol, name=f"slice_{variant}[y={y_idx}]", level=t)


# ---------------------------------------------------------------------------
# weighted determinacy sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightFamily:
    """Per-order weight functions ``k2^(n)`` for the determinacy sums."""

    default: Weight | None = None
    per_order: dict[int, Weight] = field(default_factory=dict)

    def weight_for(self, n: int) -> Weight:
        if n in self.per_order:
            return self.per_order[n]
        if self.default is not None:
            return self.default
        raise MissingOrder(f"no weight registered for order {n}")

    @classmethod
    def uniform(cls, weight: Weight) -> "WeightFamily":
        return cls(default=weight)

    def to_json(self) -> dict:
        out: dict = {"per_order": [{"n": n, **w.to_json()}
                                   for n, w in sorted(self.per_order.items())]}
        if self.default is not None:
            out["default"] = self.default.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "WeightFamily":
        default = weight_from_json(obj["default"]) if "default" in obj else None
        per_order = {int(e["n"]): weight_from_json(e)
                     for e in obj.get("per_order", [])}
        return cls(default=default, per_order=per_order)


@dataclass(frozen=True)
class FieldCarlemanReport:
    """Weighted determinacy sums of a field moment sequence.

    ``partial_sums[k]`` is the sum of the first k+1 terms; a vanishing
    weighted contraction makes the terms +inf from there on and the
    sequence is reported divergent (determining) by convention.
    """

    variant: str
    n_terms: int
    partial_sums: np.ndarray
    terms: np.ndarray
    sup_factors: np.ndarray
    log_contractions: np.ndarray
    degenerate: bool
    verdict: qa.QaVerdict | None

    @property
    def divergent(self) -> bool | None:
        if self.degenerate:
            return True
        if self.verdict is None:
            return None
        if self.verdict.classification == qa.QUASI_ANALYTIC:
            return True
        if self.verdict.classification == qa.NOT_QUASI_ANALYTIC:
            return False
        return None

    @property
    def determinate(self) -> bool | None:
        return self.divergent


def _log_weighted_contraction(m: MomentTensorSeq, inv_weights: np.ndarray,
                              order: int) -> float:
    """ln of ``sum m^(order)[x...] / prod k2(x_l)``; -inf for an exact zero."""
    if m.is_atomic:
        dots = m.atom_etas @ inv_weights
        if np.all(m.atom_weights > 0.0) and np.all(dots >= 0.0):
            with np.errstate(divide="ignore"):
                logs = np.log(m.atom_weights) + order * np.where(
                    dots > 0.0, np.log(np.where(dots > 0.0, dots, 1.0)), -np.inf)
            return float(logsumexp(logs))
        value = float(np.sum(m.atom_weights * dots ** order))
    else:
        t = m.tensor(order)
        for _ in range(order):
            t = np.tensordot(t, inv_weights, axes=(0, 0))
        value = float(t)
    if value < 0.0:
        raise NegativeContraction(
            f"weighted contraction at order {order} is {value} < 0; "
            "input data is not a moment sequence of a non-negative measure")
    return math.log(value) if value > 0.0 else -math.inf


def weighted_carleman_field(m: MomentTensorSeq, w_family: WeightFamily,
                            n_terms: int, variant: str = "carleman",
                            thresholds: qa.ClassifierThresholds | None = None,
                            ) -> FieldCarlemanReport:
    """Weighted Carleman / generalized Stieltjes determinacy sums.

    Per n the weighted even-order contraction ``I_2n`` (atomic closed form
    or dense contraction) and the sampled sup factor ``s_n`` of the
    derivative envelope of ``k2^(2n)`` over the Minkowski set ball(n) +
    box(1) are combined into the terms

        carleman:   1 / (s_n * I_2n**(1/2n))
        stieltjes:  1 / (sqrt(s_n) * I_2n**(1/4n))

    Divergence of the series is the determinacy certificate.  The
    classification runs the quasi-analyticity thresholds on the sequence
    whose n-th root reproduces the term denominators.
    """
    if variant not in ("carleman", "stieltjes"):
        raise ValueError(f"unknown variant {variant!r}")
    coords = m.grid.coordinates()
    terms = np.empty(n_terms)
    sup_factors = np.empty(n_terms)
    log_contr = np.empty(n_terms)
    log_class_terms = [0.0]
    degenerate = False
    for n in range(1, n_terms + 1):
        weight = w_family.weight_for(2 * n)
        vals = np.asarray(weight(coords), dtype=float)
        if np.any(vals < 1.0 - 1e-12):
            raise WeightBelowOne(f"weight for order {2 * n} dips below 1 on the grid")
        inv = 1.0 / vals
        log_i = _log_weighted_contraction(m, inv, 2 * n)
        s_n = sup_sqrt_envelope_ball_box(weight, ball_radius=float(n),
                                         dimension=m.grid.dimension)
        sup_factors[n - 1] = s_n
        log_contr[n - 1] = log_i
        if log_i == -math.inf:
            degenerate = True
            terms[n - 1] = math.inf
            log_class_terms.append(math.inf)
            continue
        log_m = n * math.log(s_n) + 0.5 * log_i
        if variant == "stieltjes":
            log_m *= 0.5
        log_class_terms.append(log_m)
        terms[n - 1] = math.exp(-log_m / n)
    sums = np.cumsum(terms)

    verdict = None
    if not degenerate and n_terms >= 50:
        verdict = qa.classify(qa.PositiveSequence.from_log_terms(log_class_terms),
                              n_terms=n_terms, thresholds=thresholds)
    return FieldCarlemanReport(variant=variant, n_terms=n_terms,
                               partial_sums=sums, terms=terms,
                               sup_factors=sup_factors,
                               log_contractions=log_contr,
                               degenerate=degenerate, verdict=verdict)


# ---------------------------------------------------------------------------
# determining bound from dual norms
# ---------------------------------------------------------------------------

def _per_order(values, n: int, what: str, log_scale: bool) -> float:
    if callable(values):
        v = values(n)
    else:
        if n - 1 >= len(values):
            raise MissingOrder(f"{what} missing order {n}")
        v = values[n - 1]
    v = float(v)
    if not log_scale and not v > 0.0:
        raise MissingOrder(f"{what} at order {n} must be positive, got {v}")
    return math.log(v) if not log_scale else v


def determining_bound(e_bounds, dual_norms, n_terms: int = 200,
                      log_scale: bool = False,
                      thresholds: qa.ClassifierThresholds | None = None,
                      ) -> tuple[qa.PositiveSequence, qa.QaVerdict]:
    """Bound sequence ``(d_n)**n * norm_n**(1/2)`` and its classification.

    ``e_bounds[n]`` bounds the test functions admitted at order 2n and
    ``dual_norms[n]`` is the dual norm of the order-2n moment function;
    both are given per order n = 1.. as sequences or callables (values, or
    natural logs with ``log_scale=True``).  The derived scalar sequence
    dominates the determining-sequence terms, so quasi-analyticity of its
    class certifies determinacy.
    """
    logs = [0.0]
    for n in range(1, n_terms + 1):
        le = _per_order(e_bounds, n, "distance bound", log_scale)
        ln = _per_order(dual_norms, n, "dual norm", log_scale)
        logs.append(n * le + 0.5 * ln)
    seq = qa.PositiveSequence.from_log_terms(logs)
    return seq, qa.classify(seq, n_terms=n_terms, thresholds=thresholds)
