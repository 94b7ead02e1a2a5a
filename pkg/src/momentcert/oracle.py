"""Independent ground truth for the certificate machinery.

Finite-atomic measures are the one class whose moments are computable
exactly, so they anchor every necessity test: seeded ensembles of point or
grid-measure atoms, their exact moment sequences, a self-contained
non-negative least-squares fitter for brute-force realizability on a
candidate support, and single-entry perturbation for sensitivity probes.

Seeding contract: a single 64-bit seed feeds ``numpy.random.default_rng``
(PCG64 via SeedSequence).  Draw order is fixed and documented per domain:
first the J atom weights as ``uniform(0.2, 1.0, J)``, then the atom bodies
in atom order (point domain: one ``uniform(lo, hi, d)`` row per atom; field
domain: one ``uniform(0.0, 1.0, num_cells)`` row per atom).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegreeOverflow, IndexOutOfRange, OrderOverflow
from .fields import Grid, GridMeasure, MomentTensorSeq
from .moments import MomentSequence, MultiIndex, multi_indices, _raw_sequence

FIT_ITERATION_CAP = 100_000
FIT_CONVERGENCE_TOL = 1e-8


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointDomain:
    """Atoms are points of a box in R^d."""

    dimension: int
    box: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.box:
            object.__setattr__(self, "box", ((0.0, 1.0),) * self.dimension)
        if len(self.box) != self.dimension:
            raise ValueError("box length differs from dimension")


@dataclass(frozen=True)
class FieldDomain:
    """Atoms are non-negative grid measures."""

    grid: Grid


@dataclass(eq=False)
class AtomicEnsemble:
    """Finite mixture sum_j w_j delta(atom_j) with strictly positive weights."""

    domain: PointDomain | FieldDomain
    weights: np.ndarray
    points: np.ndarray | None = None        # (J, d) for point domains
    measures: list[GridMeasure] | None = None
    seed: int | None = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if np.any(self.weights <= 0.0):
            raise ValueError("ensemble weights must be > 0")

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def to_json(self) -> dict:
        recipe = ("weights=uniform(0.2,1.0,J) then atoms in atom order; "
                  "rng=numpy default_rng(seed)")
        if isinstance(self.domain, PointDomain):
            return {"d": self.domain.dimension,
                    "box": [[lo, hi] for lo, hi in self.domain.box],
                    "atoms": [{"w": float(w), "x": [float(v) for v in x]}
                              for w, x in zip(self.weights, self.points)],
                    "seed": self.seed, "recipe": recipe}
        return {"grid": self.domain.grid.to_json(),
                "atoms": [{"w": float(w), "eta": [float(v) for v in gm.weights]}
                          for w, gm in zip(self.weights, self.measures)],
                "seed": self.seed, "recipe": recipe}

    @classmethod
    def from_json(cls, obj: dict) -> "AtomicEnsemble":
        if "grid" in obj:
            grid = Grid.from_json(obj["grid"])
            domain = FieldDomain(grid)
            measures = [GridMeasure(grid, np.asarray(a["eta"], dtype=float))
                        for a in obj["atoms"]]
            return cls(domain=domain,
                       weights=[a["w"] for a in obj["atoms"]],
                       measures=measures, seed=obj.get("seed"))
        d = int(obj["d"])
        box = tuple((float(lo), float(hi)) for lo, hi in obj["box"])
        pts = np.asarray([a["x"] for a in obj["atoms"]], dtype=float).reshape(-1, d)
        return cls(domain=PointDomain(d, box),
                   weights=[a["w"] for a in obj["atoms"]],
                   points=pts, seed=obj.get("seed"))


def sample_atomic_ensemble(seed: int, j_atoms: int,
                           domain: PointDomain | FieldDomain) -> AtomicEnsemble:
    """Deterministic ensemble for a seed, per the documented draw order."""
    if j_atoms < 1:
        raise ValueError("need at least one atom")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    weights = rng.uniform(0.2, 1.0, j_atoms)
    if isinstance(domain, PointDomain):
        lows = np.array([lo for lo, _ in domain.box])
        highs = np.array([hi for _, hi in domain.box])
        points = np.stack([rng.uniform(lows, highs) for _ in range(j_atoms)])
        return AtomicEnsemble(domain=domain, weights=weights, points=points,
                              seed=seed)
    measures = [GridMeasure(domain.grid,
                            rng.uniform(0.0, 1.0, domain.grid.num_cells))
                for _ in range(j_atoms)]
    return AtomicEnsemble(domain=domain, weights=weights, measures=measures,
                          seed=seed)


def exact_moments(ensemble: AtomicEnsemble, n: int):
    """Exact moments of the ensemble up to degree/order n.

    Point domains give a :class:`MomentSequence` with
    ``m(alpha) = sum_j w_j x_j**alpha``; field domains give a
    :class:`MomentTensorSeq` in atomic-rank form.
    """
    if n < 0:
        raise DegreeOverflow("truncation must be >= 0")
    if isinstance(ensemble.domain, PointDomain):
        d = ensemble.domain.dimension
        values: dict[MultiIndex, float] = {}
        for alpha in multi_indices(d, n):
            powered = ensemble.points ** np.asarray(alpha, dtype=float)
            values[alpha] = float(np.sum(ensemble.weights * np.prod(powered, axis=1)))
        return MomentSequence(d, n, values)
    return MomentTensorSeq.from_atoms(
        ensemble.domain.grid, ensemble.weights,
        [gm.weights for gm in ensemble.measures], n)


# ---------------------------------------------------------------------------
# brute-force realizability on a candidate support
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    """Non-negative fit of moments on candidate atoms.

    ``feasible`` means the residual met the requested tolerance with all
    weights >= 0.  ``converged`` False marks an iteration-cap exit; an
    infeasible verdict is then inconclusive.
    """

    feasible: bool
    weights: np.ndarray
    residual: float
    iterations: int
    converged: bool

    def to_json(self) -> dict:
        return {"feasible": self.feasible,
                "weights": [float(w) for w in self.weights],
                "residual": self.residual,
                "iterations": self.iterations,
                "converged": self.converged}


def _nnls_projected_gradient(a: np.ndarray, b: np.ndarray,
                             cap: int = FIT_ITERATION_CAP,
                             conv_tol: float = FIT_CONVERGENCE_TOL,
                             ) -> tuple[np.ndarray, int, bool]:
    """argmin ||Aw - b|| over w >= 0 by accelerated projected gradient.

    Fixed step 1/L with Nesterov momentum and a monotone restart;
    self-contained and deterministic on purpose (no external optimizer).
    Stops when the projection map is stationary (step change below
    conv_tol**2 relative) or the residual has settled to conv_tol relative
    between probes; gives up at the iteration cap.
    """
    n_cols = a.shape[1]
    ata = a.T @ a
    atb = a.T @ b
    lam = float(np.linalg.eigvalsh(ata)[-1])
    if lam <= 0.0:
        return np.zeros(n_cols), 0, True
    step = 1.0 / lam

    def objective(x: np.ndarray) -> float:
        r = a @ x - b
        return float(r @ r)

    w = np.zeros(n_cols)
    z = w.copy()
    t_mom = 1.0
    obj_prev = objective(w)
    probe_prev = obj_prev
    for it in range(1, cap + 1):
        w_new = np.maximum(0.0, z - step * (ata @ z - atb))
        obj_new = objective(w_new)
        if obj_new > obj_prev:           # monotone restart
            z = w.copy()
            t_mom = 1.0
            w_new = np.maximum(0.0, z - step * (ata @ z - atb))
            obj_new = objective(w_new)
        t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_mom * t_mom) ** 0.5)
        z = w_new + ((t_mom - 1.0) / t_next) * (w_new - w)
        delta = float(np.max(np.abs(w_new - w)))
        w, t_mom, obj_prev = w_new, t_next, obj_new
        if delta <= conv_tol * conv_tol * (1.0 + float(np.max(np.abs(w)))):
            return w, it, True
        if it % 128 == 0:
            if abs(probe_prev - obj_new) <= (conv_tol * (1.0 + obj_new)) ** 2:
                return w, it, True
            probe_prev = obj_new
    return w, cap, False


def brute_force_realizable(m: MomentSequence, candidates: Sequence[Sequence[float]],
                           t_match: int, tol: float = 1e-8) -> FitResult:
    """Fit non-negative weights on candidate atoms matching moments <= t_match.

    Feasible iff the Euclidean residual over all matched moments is <= tol.
    The candidate list is the putative support: feasibility certifies
    realizability on it, infeasibility (after convergence) disproves
    realizability on that candidate set.
    """
    if t_match > m.max_degree:
        raise DegreeOverflow(f"t_match = {t_match} > truncation {m.max_degree}")
    pts = np.asarray(candidates, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.shape[1] != m.dimension:
        pts = pts.reshape(-1, m.dimension)
    indices = multi_indices(m.dimension, t_match)
    a = np.empty((len(indices), pts.shape[0]))
    b = np.empty(len(indices))
    for row, alpha in enumerate(indices):
        a[row] = np.prod(pts ** np.asarray(alpha, dtype=float), axis=1)
        b[row] = m.value(alpha)
    w, iters, converged = _nnls_projected_gradient(a, b)
    residual = float(np.linalg.norm(a @ w - b))
    return FitResult(feasible=bool(residual <= tol), weights=w,
                     residual=residual, iterations=iters, converged=converged)


# ---------------------------------------------------------------------------
# perturbation
# ---------------------------------------------------------------------------

def perturb(m, target, eps: float):
    """Copy with one targeted moment entry shifted by eps.

    Finite-dimensional sequences take a multi-index; dense field sequences
    take ``(order, cell_tuple)`` and shift the whole symmetric orbit of the
    entry (the abstract symmetric moment it represents).
    """
    if isinstance(m, MomentSequence):
        key = tuple(int(v) for v in target)
        if key not in m.values:
            raise IndexOutOfRange(f"no moment at index {key}")
        values = dict(m.values)
        values[key] = values[key] + eps
        # perturbed sequences are corruption probes, not claimed realizable
        return _raw_sequence(m.dimension, m.max_degree, values)
    if isinstance(m, MomentTensorSeq):
        order, cell = target
        if m.is_atomic:
            raise IndexOutOfRange(
                "perturbation targets dense entries; materialize with to_dense()")
        if order > m.max_order:
            raise OrderOverflow(f"order {order} > max order {m.max_order}")
        cell = tuple(int(v) for v in cell)
        if len(cell) != order:
            raise IndexOutOfRange(f"need {order} cell indices, got {len(cell)}")
        tensors = [t.copy() for t in m.tensors]
        t = tensors[order]
        orbit = {tuple(cell[i] for i in perm)
                 for perm in itertools.permutations(range(len(cell)))}
        for entry in orbit:
            t[entry] += eps
        return MomentTensorSeq(grid=m.grid, max_order=m.max_order,
                               tensors=tuple(tensors), has_density=m.has_density)
    raise TypeError(f"cannot perturb {type(m).__name__}")
