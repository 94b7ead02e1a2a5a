"""Finite-dimensional moment sequences and their positivity certificates.

A truncated multi-sequence of putative moments is checked against the
necessary conditions for being realized by a non-negative measure on a basic
semi-algebraic set: positive semidefiniteness of the moment matrix and of
the localizing matrices of the defining polynomials, plus the per-axis
Carleman determinacy sums.  Every matrix verdict here is *necessary at its
truncation level*: a pass is evidence, a fail is a disproof.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import quasianalytic as qa
from .errors import (
    DegreeOverflow,
    DimensionMismatch,
    IncompleteSequence,
    NegativeEvenMoment,
    NegativeMass,
    NotSymmetric,
)

MultiIndex = tuple[int, ...]


def multi_indices(dimension: int, max_degree: int) -> list[MultiIndex]:
    """All multi-indices of degree <= max_degree in graded-lex order.

    Graded lexicographic: sorted by total degree first, then by the plain
    tuple order of the entries.  This is the documented row/column order of
    every matrix built here, so certificates are reproducible.
    """
    out: list[MultiIndex] = []
    for deg in range(max_degree + 1):
        level = [idx for idx in itertools.product(range(deg + 1), repeat=dimension)
                 if sum(idx) == deg]
        out.extend(sorted(level))
    return out


def _add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Polynomial:
    """Real polynomial on R^d as a finitely supported coefficient map."""

    dimension: int
    coeffs: dict[MultiIndex, float]

    def __post_init__(self):
        for alpha in self.coeffs:
            if len(alpha) != self.dimension or any(k < 0 for k in alpha):
                raise DimensionMismatch(f"bad multi-index {alpha} for d={self.dimension}")

    @classmethod
    def from_coeffs(cls, dimension: int,
                    coeffs: Mapping[Sequence[int], float]) -> "Polynomial":
        cleaned = {tuple(int(k) for k in a): float(c)
                   for a, c in coeffs.items() if float(c) != 0.0}
        return cls(dimension, cleaned)

    @classmethod
    def constant(cls, dimension: int, c: float) -> "Polynomial":
        return cls.from_coeffs(dimension, {(0,) * dimension: c})

    @classmethod
    def monomial(cls, dimension: int, alpha: Sequence[int], c: float = 1.0) -> "Polynomial":
        return cls.from_coeffs(dimension, {tuple(alpha): c})

    @classmethod
    def variable(cls, dimension: int, axis: int) -> "Polynomial":
        alpha = [0] * dimension
        alpha[axis] = 1
        return cls.monomial(dimension, alpha)

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.coeffs), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if other.dimension != self.dimension:
            raise DimensionMismatch("polynomial dimensions differ")
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out.get(a, 0.0) + c
        return Polynomial.from_coeffs(self.dimension, out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            if other.dimension != self.dimension:
                raise DimensionMismatch("polynomial dimensions differ")
            out: dict[MultiIndex, float] = {}
            for a, ca in self.coeffs.items():
                for b, cb in other.coeffs.items():
                    key = _add(a, b)
                    out[key] = out.get(key, 0.0) + ca * cb
            return Polynomial.from_coeffs(self.dimension, out)
        return Polynomial.from_coeffs(
            self.dimension, {a: c * float(other) for a, c in self.coeffs.items()})

    __rmul__ = __mul__

    def square(self) -> "Polynomial":
        return self * self

    def __call__(self, point: Sequence[float]) -> float:
        x = np.asarray(point, dtype=float)
        total = 0.0
        for a, c in self.coeffs.items():
            total += c * float(np.prod(x ** np.asarray(a)))
        return total

    def to_json(self) -> dict:
        return {"d": self.dimension,
                "coeffs": [{"alpha": list(a), "c": c}
                           for a, c in sorted(self.coeffs.items(),
                                              key=lambda kv: (sum(kv[0]), kv[0]))]}

    @classmethod
    def from_json(cls, obj: dict) -> "Polynomial":
        return cls.from_coeffs(int(obj["d"]),
                               {tuple(e["alpha"]): e["c"] for e in obj["coeffs"]})


# ---------------------------------------------------------------------------
# moment sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentSequence:
    """Moments ``m_alpha`` for every multi-index of degree <= max_degree."""

    dimension: int
    max_degree: int
    values: dict[MultiIndex, float]

    def __post_init__(self):
        expected = multi_indices(self.dimension, self.max_degree)
        missing = [a for a in expected if a not in self.values]
        if missing or len(self.values) != len(expected):
            raise IncompleteSequence(
                f"sequence must carry exactly the {len(expected)} indices of "
                f"degree <= {self.max_degree}; missing {missing[:3]}"
            )
        if self.values[(0,) * self.dimension] < 0.0:
            raise NegativeMass("m at the zero index (total mass) must be >= 0")

    def value(self, alpha: Sequence[int]) -> float:
        key = tuple(int(k) for k in alpha)
        try:
            return self.values[key]
        except KeyError:
            raise DegreeOverflow(f"index {key} beyond truncation degree "
                                 f"{self.max_degree}") from None

    @property
    def mass(self) -> float:
        return self.values[(0,) * self.dimension]

    def to_json(self) -> dict:
        return {"d": self.dimension, "N": self.max_degree,
                "values": [{"alpha": list(a), "m": self.values[a]}
                           for a in multi_indices(self.dimension, self.max_degree)]}

    @classmethod
    def from_json(cls, obj: dict) -> "MomentSequence":
        return cls(int(obj["d"]), int(obj["N"]),
                   {tuple(e["alpha"]): float(e["m"]) for e in obj["values"]})


@dataclass(frozen=True)
class SemiAlgebraicSpec:
    """Defining polynomials P_i of a basic semi-algebraic set {P_i >= 0}.

    Index 0 is the constant polynomial 1 by convention (the unconstrained
    moment matrix is its localizing matrix).
    """

    constraints: tuple[Polynomial, ...]

    def __post_init__(self):
        if not self.constraints:
            raise ValueError("constraint list must be non-empty")
        first = self.constraints[0]
        if first.coeffs != {(0,) * first.dimension: 1.0}:
            raise ValueError("constraints[0] must be the constant polynomial 1")
        d = first.dimension
        if any(p.dimension != d for p in self.constraints):
            raise DimensionMismatch("constraints live in different dimensions")

    @property
    def dimension(self) -> int:
        return self.constraints[0].dimension

    @classmethod
    def make(cls, dimension: int, polys: Iterable[Polynomial]) -> "SemiAlgebraicSpec":
        """Prepend the conventional constant 1 to user constraints."""
        return cls((Polynomial.constant(dimension, 1.0), *polys))

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float]) -> "SemiAlgebraicSpec":
        """The box [lower, upper] as {x_i - lo_i >= 0, hi_i - x_i >= 0}."""
        d = len(lower)
        polys = []
        for i in range(d):
            xi = Polynomial.variable(d, i)
            polys.append(xi - Polynomial.constant(d, float(lower[i])))
            polys.append(Polynomial.constant(d, float(upper[i])) - xi)
        return cls.make(d, polys)

    def to_json(self) -> dict:
        return {"d": self.dimension,
                "constraints": [p.to_json() for p in self.constraints]}

    @classmethod
    def from_json(cls, obj: dict) -> "SemiAlgebraicSpec":
        return cls(tuple(Polynomial.from_json(p) for p in obj["constraints"]))


# ---------------------------------------------------------------------------
# Riesz functional, shift, matrices
# ---------------------------------------------------------------------------

def _raw_sequence(dimension: int, max_degree: int,
                  values: dict[MultiIndex, float]) -> MomentSequence:
    """Construct without the non-negative-mass check (signed sequences)."""
    out = object.__new__(MomentSequence)
    object.__setattr__(out, "dimension", dimension)
    object.__setattr__(out, "max_degree", max_degree)
    object.__setattr__(out, "values", values)
    return out


def riesz(m: MomentSequence, p: Polynomial) -> float:
    """Apply the Riesz functional of ``m`` to ``p``:  sum_a c_a * m_a."""
    if p.dimension != m.dimension:
        raise DimensionMismatch("polynomial and sequence dimensions differ")
    if p.degree > m.max_degree:
        raise DegreeOverflow(f"deg P = {p.degree} > truncation {m.max_degree}")
    return float(sum(c * m.values[a] for a, c in p.coeffs.items()))


def shift(m: MomentSequence, p: Polynomial) -> MomentSequence:
    """The shifted sequence with Riesz functional ``Q -> L_m(P*Q)``.

    ``(_Pm)(alpha) = sum_beta coeff(beta) * m(alpha + beta)``, truncated at
    ``max_degree - deg P``.  For realizable ``m`` this is the moment
    sequence of the signed measure ``P dmu``.
    """
    if p.dimension != m.dimension:
        raise DimensionMismatch("polynomial and sequence dimensions differ")
    deg = p.degree
    if deg > m.max_degree:
        raise DegreeOverflow(f"deg P = {deg} > truncation {m.max_degree}")
    new_n = m.max_degree - deg
    values = {}
    for alpha in multi_indices(m.dimension, new_n):
        values[alpha] = float(sum(c * m.values[_add(alpha, beta)]
                                  for beta, c in p.coeffs.items()))
    # the shifted object represents a signed measure; a negative zero entry
    # is meaningful evidence here, so bypass the non-negative-mass check
    return _raw_sequence(m.dimension, new_n, values)


def moment_matrix(m: MomentSequence, t: int) -> np.ndarray:
    """Matrix ``H[alpha, beta] = m(alpha + beta)`` over degrees <= t.

    Rows and columns follow the graded-lex order of :func:`multi_indices`,
    so the level-t matrix is the leading principal submatrix of every
    higher level.  Symmetric by construction.
    """
    if t < 0:
        raise DegreeOverflow("level t must be >= 0")
    if 2 * t > m.max_degree:
        raise DegreeOverflow(f"2t = {2 * t} > truncation {m.max_degree}")
    idx = multi_indices(m.dimension, t)
    n = len(idx)
    h = np.empty((n, n))
    for i, a in enumerate(idx):
        for j in range(i, n):
            v = m.values[_add(a, idx[j])]
            h[i, j] = v
            h[j, i] = v
    return h


def localizing_matrix(m: MomentSequence, p: Polynomial, t: int) -> np.ndarray:
    """Moment matrix of the shifted sequence; PSD iff L_m(P h^2) >= 0 at level t."""
    return moment_matrix(shift(m, p), t)


# ---------------------------------------------------------------------------
# PSD verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PsdReport:
    """Outcome of a positive-semidefiniteness test on a symmetric matrix."""

    dimension: int
    verdict: str                      # "psd" | "not_psd"
    min_eigenvalue: float
    tol: float
    threshold: float                  # effective threshold tol*(1+max|H|)
    witness: np.ndarray | None = None  # direction with v'Hv < 0 when not psd
    quad_form: float | None = None
    name: str | None = None
    level: int | None = None

    @property
    def is_psd(self) -> bool:
        return self.verdict == "psd"

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "dimension": self.dimension,
            "verdict": self.verdict,
            "min_eigenvalue": self.min_eigenvalue,
            "tol": self.tol,
            "threshold": self.threshold,
            "level": self.level,
        }
        if self.witness is not None:
            out["witness"] = [float(v) for v in self.witness]
            out["quad_form"] = self.quad_form
        return out


DEFAULT_PSD_TOL = 1e-9


def is_psd(h: np.ndarray, tol: float = DEFAULT_PSD_TOL, *,
           name: str | None = None, level: int | None = None) -> PsdReport:
    """Eigenvalue PSD test with a negative-direction witness on failure.

    ``tol`` is relative: the verdict is psd iff the minimum eigenvalue is
    >= -tol * (1 + max|H|).  A full symmetric eigendecomposition is used
    (rather than Cholesky) so a witness vector is always available.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {h.shape}")
    if tol < 0:
        raise ValueError("tol must be >= 0")
    scale = 1.0 + (np.abs(h).max() if h.size else 0.0)
    asym = np.abs(h - h.T).max() if h.size else 0.0
    threshold = tol * scale
    if asym > max(threshold, 1e-12 * scale):
        raise NotSymmetric(f"matrix asymmetry {asym:.3e} exceeds tolerance")
    sym = 0.5 * (h + h.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    lam = float(eigvals[0])
    if lam >= -threshold:
        return PsdReport(dimension=h.shape[0], verdict="psd", min_eigenvalue=lam,
                         tol=tol, threshold=threshold, name=name, level=level)
    v = eigvecs[:, 0]
    quad = float(v @ sym @ v)
    return PsdReport(dimension=h.shape[0], verdict="not_psd", min_eigenvalue=lam,
                     tol=tol, threshold=threshold, witness=v, quad_form=quad,
                     name=name, level=level)


def check_semialgebraic(m: MomentSequence, s: SemiAlgebraicSpec, t: int,
                        tol: float = DEFAULT_PSD_TOL) -> list[PsdReport]:
    """Necessary conditions for realizability on ``{P_i >= 0}`` at level t.

    Returns one report for the moment matrix at level t and one localizing
    report per constraint i >= 1 at level ``t_i = min(t, (N - deg P_i)//2)``
    (the per-constraint level is capped by the available degrees).  A pass
    is necessary-at-level-t only; any failing report is a disproof.
    """
    if s.dimension != m.dimension:
        raise DimensionMismatch("spec and sequence dimensions differ")
    if 2 * t > m.max_degree:
        raise DegreeOverflow(f"2t = {2 * t} > truncation {m.max_degree}")
    reports = [is_psd(moment_matrix(m, t), tol, name="moment", level=t)]
    for i, p in enumerate(s.constraints[1:], start=1):
        if p.degree > m.max_degree:
            raise DegreeOverflow(
                f"constraint {i} has degree {p.degree} > truncation {m.max_degree}")
        t_i = min(t, (m.max_degree - p.degree) // 2)
        reports.append(is_psd(localizing_matrix(m, p, t_i), tol,
                              name=f"localizing[{i}]", level=t_i))
    return reports


def all_psd(reports: Iterable[PsdReport]) -> bool:
    return all(r.is_psd for r in reports)


# ---------------------------------------------------------------------------
# multivariate Carleman condition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CarlemanReport:
    """Per-axis Carleman partial sums with a determinacy classification.

    ``partial_sums[k]`` is ``S_{k+1} = sum_{n<=k+1} m_{2n}**(-1/(2n))`` along
    the requested axis.  ``degenerate`` marks a vanishing even diagonal
    moment (the sum is +inf from there on; reported divergent).  The
    classifier verdict, when available, refers to the class spanned by
    ``sqrt(m_{2n})``.  No cross-axis verdict is formed; axes are reported
    individually.
    """

    axis: int
    n_used: int
    partial_sums: np.ndarray
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


def multivariate_carleman(m, axis: int = 0, n_terms: int = 200,
                          thresholds: qa.ClassifierThresholds | None = None,
                          ) -> CarlemanReport:
    """Carleman determinacy sums along one coordinate axis.

    ``m`` is either a :class:`MomentSequence` (diagonal moments read off up
    to the truncation) or a :class:`~momentcert.quasianalytic.PositiveSequence`
    whose value at ``n`` is the even diagonal moment of order ``2n``.  A zero
    diagonal moment makes every later term +inf and the condition is
    reported divergent (mass degenerating onto the hyperplane).
    """
    if isinstance(m, MomentSequence):
        if not 0 <= axis < m.dimension:
            raise DimensionMismatch(f"axis {axis} out of range for d={m.dimension}")
        n_avail = m.max_degree // 2
        n_used = min(n_terms, n_avail)
        log_diag = []
        degenerate = False
        for n in range(1, n_used + 1):
            alpha = [0] * m.dimension
            alpha[axis] = 2 * n
            v = m.value(alpha)
            if v < 0.0:
                raise NegativeEvenMoment(f"m_{tuple(alpha)} = {v} < 0")
            if v == 0.0:
                degenerate = True
                log_diag.append(math.inf)
            else:
                log_diag.append(math.log(v))
    else:
        seq: qa.PositiveSequence = m
        n_used = n_terms
        degenerate = False
        log_diag = [seq.log_value(n) for n in range(1, n_used + 1)]

    terms = np.empty(n_used)
    for i, lv in enumerate(log_diag, start=1):
        terms[i - 1] = math.inf if math.isinf(lv) and lv > 0 else math.exp(-lv / (2 * i))
    # a zero moment contributes an infinite term: divergence by convention
    if degenerate:
        first_inf = next(i for i, lv in enumerate(log_diag) if math.isinf(lv))
        terms[first_inf:] = math.inf
    sums = np.cumsum(terms)

    verdict = None
    if not degenerate and n_used >= 50:
        # the associated class is spanned by sqrt(m_{2n}); normalize M_0 = 1
        # (classification is scale invariant)
        half_logs = [0.0] + [0.5 * lv for lv in log_diag]
        verdict = qa.classify(qa.PositiveSequence.from_log_terms(half_logs),
                              n_terms=n_used, thresholds=thresholds)
    return CarlemanReport(axis=axis, n_used=n_used, partial_sums=sums,
                          degenerate=degenerate, verdict=verdict)


# ---------------------------------------------------------------------------
# quadratic-module certificate verification
# ---------------------------------------------------------------------------

def verify_qm_certificate(s: SemiAlgebraicSpec,
                          sos_blocks: Sequence[Sequence[Polynomial]],
                          target: Polynomial,
                          tol: float = 1e-9) -> bool:
    """Check a quadratic-module membership certificate coefficientwise.

    Verifies ``sum_i (sum_k h_{i,k}^2) * P_i == target`` with one SOS block
    per constraint (blocks may be empty).  Certificates are only verified
    here, never searched for.
    """
    if len(sos_blocks) != len(s.constraints):
        raise DimensionMismatch(
            f"need one SOS block per constraint: {len(sos_blocks)} blocks for "
            f"{len(s.constraints)} constraints")
    d = s.dimension
    if target.dimension != d:
        raise DimensionMismatch("target dimension differs from the spec")
    total = Polynomial.from_coeffs(d, {})
    for p_i, block in zip(s.constraints, sos_blocks):
        for h in block:
            if h.dimension != d:
                raise DimensionMismatch("certificate polynomial dimension differs")
            total = total + h.square() * p_i
    diff = total - target
    return all(abs(c) <= tol for c in diff.coeffs.values())
