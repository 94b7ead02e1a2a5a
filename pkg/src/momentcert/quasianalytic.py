"""Quasi-analyticity analysis of positive sequences.

A positive sequence ``(M_n)`` spans a class of smooth functions whose n-th
derivatives are bounded by ``beta * B**n * M_n``; the class is quasi-analytic
when vanishing of all derivatives at a point forces the zero function.  This
module provides the log-convex regularization of a sequence, the four
equivalent divergence criteria for quasi-analyticity, a numeric classifier
built on them, and the constructive sequence manipulations (subsequence
classes, scaling, dominating summable sequences) used by the determinacy
checks elsewhere in the package.

All internal arithmetic is done on natural logarithms of the terms so that
catalog sequences like ``(n!)**2`` remain usable far beyond the float
overflow point near ``n = 170``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import polygamma

from .errors import (
    InsufficientTerms,
    NonPositiveScale,
    NonPositiveTerm,
    NotDecreasing,
    NotLogConvexWarning,
    SequenceIsQuasiAnalytic,
    TailNotComputable,
)

QUASI_ANALYTIC = "quasi_analytic"
NOT_QUASI_ANALYTIC = "not_quasi_analytic"
INCONCLUSIVE = "inconclusive"

_MIN_CLASSIFIER_TERMS = 50


# ---------------------------------------------------------------------------
# positive sequences
# ---------------------------------------------------------------------------

def _factorial_power_rule(params: dict) -> Callable[[int], float]:
    p = float(params["p"])
    return lambda n: p * math.lgamma(n + 1)


def _factorial_logpow_rule(params: dict) -> Callable[[int], float]:
    # terms at n <= 1 are set to 1; the log factor starts at n = 2
    p = float(params.get("p", 1.0))
    q = float(params.get("q", 2.0))

    def rule(n: int) -> float:
        if n < 2:
            return 0.0
        return p * math.lgamma(n + 1) + q * n * math.log(math.log(n))

    return rule


def _custom_table_rule(params: dict) -> Callable[[int], float]:
    if "log_terms" in params:
        table = [float(v) for v in params["log_terms"]]
    else:
        terms = [float(v) for v in params["terms"]]
        if any(t <= 0 for t in terms):
            raise NonPositiveTerm("custom_table terms must be positive")
        table = [math.log(t) for t in terms]

    def rule(n: int) -> float:
        if n >= len(table):
            raise InsufficientTerms(
                f"custom_table holds {len(table)} terms, index {n} requested"
            )
        return table[n]

    return rule


_NAMED_RULES: dict[str, Callable[[dict], Callable[[int], float]]] = {
    "factorial_power": _factorial_power_rule,
    "factorial_logpow": _factorial_logpow_rule,
    "custom_table": _custom_table_rule,
}


@dataclass(frozen=True)
class PositiveSequence:
    """Positive reals ``M_0..M_K`` with an optional rule for ``n > K``.

    Terms are stored as natural logs.  ``rule_spec`` survives JSON round
    trips for the named rules; programmatic log-space callables are allowed
    through :meth:`from_log_fn` but do not serialize.
    """

    log_terms: tuple[float, ...] = ()
    log_rule: Callable[[int], float] | None = field(default=None, repr=False)
    rule_spec: dict | None = None

    # -- constructors -------------------------------------------------

    @classmethod
    def from_terms(cls, terms: Sequence[float]) -> "PositiveSequence":
        terms = [float(t) for t in terms]
        if any(not math.isfinite(t) or t <= 0.0 for t in terms):
            raise NonPositiveTerm("all terms must be finite and > 0")
        return cls(log_terms=tuple(math.log(t) for t in terms))

    @classmethod
    def from_log_terms(cls, log_terms: Sequence[float]) -> "PositiveSequence":
        return cls(log_terms=tuple(float(v) for v in log_terms))

    @classmethod
    def from_rule(cls, name: str, params: dict | None = None) -> "PositiveSequence":
        params = dict(params or {})
        if name not in _NAMED_RULES:
            raise ValueError(f"unknown rule {name!r}; known: {sorted(_NAMED_RULES)}")
        return cls(log_rule=_NAMED_RULES[name](params),
                   rule_spec={"name": name, "params": params})

    @classmethod
    def from_log_fn(cls, fn: Callable[[int], float]) -> "PositiveSequence":
        """Wrap a callable returning ``ln M_n`` (not serializable)."""
        return cls(log_rule=fn)

    # -- access --------------------------------------------------------

    def log_value(self, n: int) -> float:
        if n < 0:
            raise IndexError(n)
        if n < len(self.log_terms):
            return self.log_terms[n]
        if self.log_rule is not None:
            return float(self.log_rule(n))
        raise InsufficientTerms(
            f"term {n} requested but only {len(self.log_terms)} terms and no rule"
        )

    def value(self, n: int) -> float:
        return math.exp(self.log_value(n))

    def log_values(self, n_max: int) -> np.ndarray:
        """Logs of ``M_0..M_{n_max}`` as an array."""
        return np.array([self.log_value(n) for n in range(n_max + 1)])

    @property
    def terms(self) -> tuple[float, ...]:
        return tuple(math.exp(v) for v in self.log_terms)

    @property
    def normalized(self) -> bool:
        return bool(self.log_terms) and self.log_terms[0] == 0.0

    def is_log_convex(self, rel_tol: float = 1e-12) -> bool:
        logs = np.asarray(self.log_terms)
        if logs.size < 3:
            return True
        defect = 2.0 * logs[1:-1] - logs[:-2] - logs[2:]
        return bool(np.all(defect <= rel_tol * (1.0 + np.abs(logs[1:-1]))))

    # -- JSON ------------------------------------------------------------

    def to_json(self) -> dict:
        out: dict = {"terms": list(self.terms)}
        if self.rule_spec is not None:
            out["rule"] = dict(self.rule_spec)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PositiveSequence":
        terms = obj.get("terms", []) or []
        base = cls.from_terms(terms) if terms else cls()
        rule = obj.get("rule")
        if rule is None:
            if not terms:
                raise NonPositiveTerm("sequence JSON has neither terms nor rule")
            return base
        ruled = cls.from_rule(rule["name"], rule.get("params"))
        return cls(log_terms=base.log_terms, log_rule=ruled.log_rule,
                   rule_spec=ruled.rule_spec)


# ---------------------------------------------------------------------------
# log-convex regularization
# ---------------------------------------------------------------------------

def lower_log_envelope(logs: np.ndarray) -> tuple[np.ndarray, tuple[int, ...]]:
    """Lower convex envelope of the points ``(n, logs[n])``.

    Monotone-chain lower hull over the already x-sorted points.  Returns the
    envelope values and the indices of the hull vertices (where the envelope
    equals the input exactly).  Popping compares the cross product against
    exactly zero and the result is clamped below the input, which keeps the
    convexity defect at rounding level even for large-magnitude logs.
    """
    logs = np.asarray(logs, dtype=float)
    k = logs.size
    if k == 0:
        return logs.copy(), ()
    hull = [0]
    for i in range(1, k):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (i1 - i0) * (logs[i] - logs[i0]) - (i - i0) * (logs[i1] - logs[i0])
            if cross <= 0.0:
                hull.pop()
            else:
                break
        hull.append(i)
    env = np.empty(k)
    for a, b in zip(hull[:-1], hull[1:]):
        env[a] = logs[a]
        env[b] = logs[b]
        if b - a > 1:
            span = b - a
            for i in range(a + 1, b):
                t = (i - a) / span
                env[i] = logs[a] + t * (logs[b] - logs[a])
    if len(hull) == 1:
        env[hull[0]] = logs[hull[0]]
    np.minimum(env, logs, out=env)
    return env, tuple(hull)


def log_convex_regularize(m: PositiveSequence, k: int | None = None) -> PositiveSequence:
    """Largest log-convex minorant of ``M_0..M_K``.

    ``exp`` of the lower convex envelope of ``(n, ln M_n)``.  The result
    equals the input on hull vertices and is termwise <= the input.
    """
    if k is None:
        if not m.log_terms:
            raise InsufficientTerms("no terms to regularize")
        k = len(m.log_terms) - 1
    env, _ = lower_log_envelope(m.log_values(k))
    return PositiveSequence.from_log_terms(env)


# ---------------------------------------------------------------------------
# Denjoy-Carleman criteria and the classifier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DenjoyCarlemanSums:
    """Partial-sum curves of the four divergence criteria, index n = 1..N.

    ``raw_root``       sums of 1 / M_n**(1/n)
    ``beta``           sums of 1 / beta_n, beta_n = inf_{n<=k<=N} M_k**(1/k)
    ``envelope_root``  sums of 1 / (M^c_n)**(1/n)
    ``ratio``          sums of M^c_{n-1} / M^c_n
    """

    n_terms: int
    raw_root: np.ndarray
    beta: np.ndarray
    envelope_root: np.ndarray
    ratio: np.ndarray


def _criterion_sums(logs: np.ndarray, env: np.ndarray) -> DenjoyCarlemanSums:
    n_terms = logs.size - 1
    ns = np.arange(1, n_terms + 1, dtype=float)
    raw_terms = np.exp(-logs[1:] / ns)
    env_terms = np.exp(-env[1:] / ns)
    ratio_terms = np.exp(env[:-1] - env[1:])
    roots = logs[1:] / ns
    # suffix minimum truncated at n_terms: an over-estimate of the true
    # beta_n, so the beta sums are a lower bound on the untruncated ones
    log_beta = np.minimum.accumulate(roots[::-1])[::-1]
    beta_terms = np.exp(-log_beta)
    return DenjoyCarlemanSums(
        n_terms=n_terms,
        raw_root=np.cumsum(raw_terms),
        beta=np.cumsum(beta_terms),
        envelope_root=np.cumsum(env_terms),
        ratio=np.cumsum(ratio_terms),
    )


def denjoy_carleman_sums(m: PositiveSequence, n_terms: int) -> DenjoyCarlemanSums:
    """Partial sums of the four equivalent quasi-analyticity criteria."""
    logs = m.log_values(n_terms)
    env, _ = lower_log_envelope(logs)
    return _criterion_sums(logs, env)


@dataclass(frozen=True)
class ClassifierThresholds:
    """Decision margins for the numeric quasi-analyticity classifier.

    ``n ln n`` is the exact boundary (``ln n! ~ n ln n``), so the growth
    exponent ``s_n = ln M^c_n / (n ln n)`` compared against 1 is the
    discriminating statistic; the divergence floor guards the borderline
    slow-growth cases.
    """

    exponent_margin: float = 0.05   # accept quasi-analytic up to 1 + margin
    exponent_gap: float = 0.10      # reject only from 1 + gap upward
    divergence_factor: float = 0.5  # envelope-root sum must exceed factor*ln N
    window_fraction: float = 0.5    # tail window for the exponent estimate


@dataclass(frozen=True)
class QaVerdict:
    """Classifier outcome plus the evidence it was based on."""

    classification: str
    exponent_high: float
    exponent_low: float
    partial_sums: dict[str, float]
    n_terms: int
    thresholds: ClassifierThresholds

    @property
    def is_quasi_analytic(self) -> bool:
        return self.classification == QUASI_ANALYTIC

    def to_json(self) -> dict:
        return {
            "classification": self.classification,
            "exponent_high": self.exponent_high,
            "exponent_low": self.exponent_low,
            "partial_sums": dict(self.partial_sums),
            "n_terms": self.n_terms,
            "thresholds": {
                "exponent_margin": self.thresholds.exponent_margin,
                "exponent_gap": self.thresholds.exponent_gap,
                "divergence_factor": self.thresholds.divergence_factor,
            },
        }


def classify(m: PositiveSequence, n_terms: int = 200,
             thresholds: ClassifierThresholds | None = None) -> QaVerdict:
    """Classify the class spanned by ``(M_n)`` from its first ``n_terms`` terms.

    quasi_analytic      exponent estimate <= 1 + margin and the envelope-root
                        partial sum clears the divergence floor
    not_quasi_analytic  exponent estimate >= 1 + gap throughout the tail
                        window (the terms then decay like n**-(1+gap), a
                        convergent tail)
    inconclusive        anything in between

    This is an inherently asymptotic property judged from finitely many
    terms; the verdict records the evidence it used.
    """
    if n_terms < _MIN_CLASSIFIER_TERMS:
        raise InsufficientTerms(
            f"classifier needs at least {_MIN_CLASSIFIER_TERMS} terms, got {n_terms}"
        )
    th = thresholds or ClassifierThresholds()
    logs = m.log_values(n_terms)
    env, _ = lower_log_envelope(logs)
    sums = _criterion_sums(logs, env)

    ns = np.arange(2, n_terms + 1, dtype=float)
    exponents = env[2:] / (ns * np.log(ns))
    lo = max(2, int(math.floor(n_terms * th.window_fraction)))
    window = exponents[int(lo) - 2:]
    s_high = float(window.max())
    s_low = float(window.min())

    sum3 = float(sums.envelope_root[-1])
    diverging = sum3 >= th.divergence_factor * math.log(n_terms)

    if s_high <= 1.0 + th.exponent_margin and diverging:
        verdict = QUASI_ANALYTIC
    elif s_low >= 1.0 + th.exponent_gap:
        verdict = NOT_QUASI_ANALYTIC
    else:
        verdict = INCONCLUSIVE

    return QaVerdict(
        classification=verdict,
        exponent_high=s_high,
        exponent_low=s_low,
        partial_sums={
            "raw_root": float(sums.raw_root[-1]),
            "beta": float(sums.beta[-1]),
            "envelope_root": sum3,
            "ratio": float(sums.ratio[-1]),
        },
        n_terms=n_terms,
        thresholds=th,
    )


# ---------------------------------------------------------------------------
# sequence manipulations preserving the verdict
# ---------------------------------------------------------------------------

def subsequence_class(m: PositiveSequence, j: int) -> PositiveSequence:
    """The sequence ``(M_{jn})**(1/j)`` in ``n``.

    For log-convex ``M`` this spans a quasi-analytic class exactly when the
    original does.  Non-log-convex explicit terms trigger an advisory
    warning; the operation still executes.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    if m.log_terms and not m.is_log_convex():
        warnings.warn("input terms are not log-convex; regularize first for "
                      "a verdict-preserving subsequence class", NotLogConvexWarning)
    if j == 1:
        return m
    new_terms = tuple(m.log_terms[j * n] / j
                      for n in range(len(m.log_terms) // j + 1)
                      if j * n < len(m.log_terms))
    rule = None
    if m.log_rule is not None or m.log_terms:
        def rule(n: int, _m=m, _j=j) -> float:
            return _m.log_value(_j * n) / _j
    return PositiveSequence(log_terms=new_terms, log_rule=rule)


def scale(m: PositiveSequence, delta: float) -> PositiveSequence:
    """Termwise ``delta * M_n``; the classification verdict is invariant."""
    if not (delta > 0.0) or not math.isfinite(delta):
        raise NonPositiveScale(f"scale factor must be positive, got {delta}")
    shift_log = math.log(delta)
    terms = tuple(v + shift_log for v in m.log_terms)
    rule = None
    if m.log_rule is not None:
        def rule(n: int, _m=m, _s=shift_log) -> float:
            return _m.log_value(n) + _s
    return PositiveSequence(log_terms=terms, log_rule=rule)


# ---------------------------------------------------------------------------
# dominating summable sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SummableSequence:
    """Decreasing positive summable sequence with computable tail sums.

    ``log_term(n)`` returns ``ln a_n`` and ``log_tail(m)`` returns
    ``ln sum_{n>=m} a_n``; both in log space so geometric decay stays usable
    past float underflow.
    """

    log_term: Callable[[int], float]
    log_tail: Callable[[int], float] | None = None
    name: str = "custom"

    @classmethod
    def geometric(cls, ratio: float = 0.5) -> "SummableSequence":
        """a_n = ratio**n; tail(m) = ratio**m / (1 - ratio)."""
        if not 0.0 < ratio < 1.0:
            raise ValueError("ratio must be in (0, 1)")
        lr = math.log(ratio)
        tail_const = -math.log1p(-ratio)
        return cls(log_term=lambda n: n * lr,
                   log_tail=lambda m: m * lr + tail_const,
                   name=f"geometric:{ratio}")

    @classmethod
    def inverse_square(cls) -> "SummableSequence":
        """a_n = 1/(n+1)**2; tail via the trigamma function."""
        return cls(log_term=lambda n: -2.0 * math.log(n + 1),
                   log_tail=lambda m: math.log(float(polygamma(1, m + 1))),
                   name="inverse_square")


_ZETA_MINUS_HALF = -0.20788622497735456  # zeta(-1/2), Euler-Maclaurin constant
_EXACT_SQRT_SUM_CAP = 1 << 21


@dataclass(frozen=True)
class DominatingSequence:
    """Output of :func:`dominating_summable_sequence`.

    ``b`` stays summable (within ``sum a + zeta(3/2)``), is non-increasing,
    and the ratio ``b_n / a_n`` is non-decreasing and eventually unbounded.
    Values underflowing to 0.0 in ``b`` are reported as 0; the log arrays
    carry the exact information.
    """

    b: np.ndarray
    ratio: np.ndarray
    log_b: np.ndarray
    log_ratio: np.ndarray

    def first_ratio_exceeding(self, level: float) -> int | None:
        idx = np.nonzero(self.ratio > level)[0]
        return int(idx[0]) if idx.size else None


def _log_sqrt_sum_asymptotic(log_k: float) -> float:
    """ln(sum_{k<=K} sqrt(k)) via Euler-Maclaurin for huge K given as ln K.

    (2/3)K^{3/2} + (1/2)K^{1/2} + zeta(-1/2) + O(K^{-1/2}); the corrections
    are negligible in the regime where this is called (K > 2**21).
    """
    corr = 0.5 * math.exp(-log_k) + _ZETA_MINUS_HALF * math.exp(-1.5 * log_k)
    return 1.5 * log_k + math.log(2.0 / 3.0) + math.log1p(corr * 1.5)


def dominating_summable_sequence(a: SummableSequence, n_terms: int) -> DominatingSequence:
    """Build ``b`` dominating ``a`` while staying summable.

    With ``N_k = min{m : tail(m) <= 1/k**2}`` the construction is

        b_n = min( a_n * (1 + sum_{k : N_k <= n} sqrt(k)), b_{n-1} ).

    Membership ``N_k <= n`` is equivalent to ``k <= floor(tail(n)**-0.5)``,
    so the inner sum is a prefix sum of sqrt over ``k`` up to a cutoff that
    is non-decreasing in ``n``.  The ratio recursion is computed in log
    space so its monotonicity is exact in floating point.
    """
    if a.log_tail is None:
        raise TailNotComputable(f"sequence {a.name!r} has no tail rule")
    log_a = np.array([float(a.log_term(n)) for n in range(n_terms + 1)])
    if np.any(np.diff(log_a) > 0.0):
        raise NotDecreasing("term sequence must be non-increasing")

    log_b = np.empty(n_terms + 1)
    log_ratio = np.empty(n_terms + 1)
    k_cut_prev = 0
    sqrt_running = 0.0
    log_cap = math.log(_EXACT_SQRT_SUM_CAP)
    for n in range(n_terms + 1):
        log_k_cut = -0.5 * float(a.log_tail(n))
        if log_k_cut < log_cap:
            # nudge before floor so exact-integer cutoffs survive rounding
            k_cut = int(math.floor(math.exp(log_k_cut) * (1.0 + 1e-12)))
            k_cut = max(k_cut, k_cut_prev, 0)
            for k in range(k_cut_prev + 1, k_cut + 1):
                sqrt_running += math.sqrt(k)
            k_cut_prev = k_cut
            if k_cut == 0:
                growth = 0.0  # empty sum: 1 + 0
            else:
                growth = math.log1p(sqrt_running)
        else:
            log_s = _log_sqrt_sum_asymptotic(log_k_cut)
            growth = math.log1p(math.exp(log_s)) if log_s < 36.0 else log_s

        if n == 0:
            log_ratio[0] = growth
            log_b[0] = log_a[0] + growth
        else:
            step = log_a[n - 1] - log_a[n]  # >= 0 by the decrease check
            log_ratio[n] = min(growth, log_ratio[n - 1] + step)
            log_b[n] = min(log_a[n] + log_ratio[n], log_b[n - 1])

    with np.errstate(under="ignore"):
        b = np.exp(log_b)
        ratio = np.exp(log_ratio)
    return DominatingSequence(b=b, ratio=ratio, log_b=log_b, log_ratio=log_ratio)


# ---------------------------------------------------------------------------
# bump-construction token
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BumpBoundToken:
    """Certifies ``d_seq`` as usable for the compactly supported bump family.

    The construction of a smooth bump with n-th derivative bounded by d_n
    requires the sequence *not* to span a quasi-analytic class; the token
    records the classifier evidence and is consumed by the sampled-function
    builder in the Sobolev module.
    """

    d_seq: PositiveSequence
    verdict: QaVerdict


def bump_derivative_bounds(d_seq: PositiveSequence, n_terms: int = 200,
                           thresholds: ClassifierThresholds | None = None) -> BumpBoundToken:
    """Validate a derivative-bound sequence for the bump construction."""
    verdict = classify(d_seq, n_terms=n_terms, thresholds=thresholds)
    if verdict.classification != NOT_QUASI_ANALYTIC:
        raise SequenceIsQuasiAnalytic(
            "bump construction requires a sequence that is not quasi-analytic; "
            f"classifier returned {verdict.classification!r}"
        )
    return BumpBoundToken(d_seq=d_seq, verdict=verdict)
