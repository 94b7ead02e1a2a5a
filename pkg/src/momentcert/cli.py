"""Batch front door: load JSON artifacts, dispatch checks, emit reports.

Every invocation prints one JSON report to standard output (diagnostics go
to standard error) and exits with

    0   all checks passed
    1   at least one disproof (not_psd / infeasible)
    2   inconclusive
    3   input error (malformed JSON, bad flags, domain errors)

Numeric output is serialized with 17 significant digits so reports are
bit-reproducible across runs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import fields, moments, oracle, quasianalytic as qa, sobolev
from .errors import RealizabilityError
from .weights import ConstantWeight, ExpWeight, PolyEvenWeight, weight_from_json

EXIT_PASS = 0
EXIT_DISPROOF = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT_ERROR = 3


class CliInputError(Exception):
    """Raised for anything that should map to exit code 3."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise CliInputError(message)


# ---------------------------------------------------------------------------
# JSON with 17 significant digits
# ---------------------------------------------------------------------------

def _format_float(x: float) -> str:
    if x != x:
        return "NaN"
    if x == float("inf"):
        return "Infinity"
    if x == float("-inf"):
        return "-Infinity"
    return format(x, ".17g")


def dumps(obj, indent: int = 0) -> str:
    pad = " " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k))}: {dumps(v, indent + 2)}'
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        flat = all(isinstance(v, (int, float, np.integer, np.floating, str,
                                  bool, type(None))) for v in seq)
        if flat:
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        items = [f"{pad}  {dumps(v, indent + 2)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# input loading
# ---------------------------------------------------------------------------

def _load_json_arg(value: str, inputs: dict, label: str) -> dict:
    """Parse an inline JSON object or a path to a JSON file."""
    stripped = value.strip()
    if stripped.startswith("{"):
        raw = stripped
        source = "<inline>"
    else:
        try:
            with open(value, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise CliInputError(f"{label}: cannot read {value}: {exc}")
        raw = data.decode("utf-8")
        source = value
    try:
        parsed = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CliInputError(
            f"{label}: malformed JSON in {source} at line {exc.lineno} "
            f"column {exc.colno}: {exc.msg}")
    inputs[label] = {"source": source,
                     "sha256": hashlib.sha256(raw.encode("utf-8")).hexdigest()}
    return parsed


def _load_moments(value: str, inputs: dict):
    obj = _load_json_arg(value, inputs, "moments")
    try:
        if "values" in obj:
            return moments.MomentSequence.from_json(obj)
        return fields.MomentTensorSeq.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliInputError(f"moments: bad schema: {exc}")


def _indicator_basis(grid: fields.Grid, t: int) -> list[fields.TestFunction]:
    dim = sum(grid.num_cells ** l for l in range(t + 1))
    if dim > fields.MATRIX_DIM_WALL:
        raise CliInputError(
            f"indicator basis gives matrix dimension {dim} beyond the wall; "
            "lower --t or use a smaller grid")
    return [fields.TestFunction.indicator(grid, i) for i in range(grid.num_cells)]


def _psd_summary(reports) -> dict:
    failing = [r.name for r in reports if not r.is_psd]
    return {"reports": [r.to_json() for r in reports],
            "all_psd": not failing,
            "failing": failing}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_gen(args, inputs: dict) -> tuple[dict, int]:
    if args.point:
        domain = oracle.PointDomain(args.d, ((args.box[0], args.box[1]),) * args.d)
    else:
        grid = fields.Grid(args.d, args.grid, args.h)
        domain = oracle.FieldDomain(grid)
    ens = oracle.sample_atomic_ensemble(args.seed, args.atoms, domain)
    mom = oracle.exact_moments(ens, args.N)
    ens_path = f"{args.out}_ensemble.json"
    mom_path = f"{args.out}_moments.json"
    with open(ens_path, "w") as fh:
        fh.write(dumps(ens.to_json()) + "\n")
    with open(mom_path, "w") as fh:
        fh.write(dumps(mom.to_json()) + "\n")
    return {"ensemble": ens_path, "moments": mom_path,
            "seed": args.seed, "atoms": args.atoms, "N": args.N}, EXIT_PASS


def _cmd_check(args, inputs: dict) -> tuple[dict, int]:
    m = _load_moments(args.moments, inputs)
    tol = args.tol
    if args.check == "psd":
        if isinstance(m, moments.MomentSequence):
            t = args.t if args.t is not None else m.max_degree // 2
            rep = moments.is_psd(moments.moment_matrix(m, t), tol,
                                 name="moment", level=t)
            reports = [rep]
        else:
            t = args.t if args.t is not None else m.max_order // 2
            basis = _indicator_basis(m.grid, t)
            rep = moments.is_psd(
                fields.generalized_moment_matrix(m, basis, t), tol,
                name="moment", level=t)
            reports = [rep]
    elif args.check == "semialgebraic":
        if not isinstance(m, moments.MomentSequence):
            raise CliInputError("semialgebraic checks need a finite-dimensional sequence")
        spec_obj = _load_json_arg(args.constraints, inputs, "constraints")
        spec = moments.SemiAlgebraicSpec.from_json(spec_obj)
        t = args.t if args.t is not None else m.max_degree // 2
        reports = moments.check_semialgebraic(m, spec, t, tol)
    elif args.check == "radon":
        if not isinstance(m, fields.MomentTensorSeq):
            raise CliInputError("radon checks need a field moment sequence")
        t = args.t if args.t is not None else m.max_order // 2
        basis = _indicator_basis(m.grid, t)
        phis = fields.default_phi_samples(m.grid, args.phi_width)
        reports = fields.check_radon(m, basis, phis, t, tol)
    else:  # bounded-density
        if not isinstance(m, fields.MomentTensorSeq):
            raise CliInputError("bounded-density checks need a field moment sequence")
        if args.c is None:
            raise CliInputError("--c is required for bounded-density")
        t = args.t if args.t is not None else m.max_order // 2
        basis = _indicator_basis(m.grid, t)
        phis = fields.default_phi_samples(m.grid, args.phi_width)
        reports = fields.check_bounded_density(m, args.c, basis, phis, t, tol)
    summary = _psd_summary(reports)
    summary["note"] = ("verdicts are necessary conditions at the stated "
                       "truncation level and sample set; a failure is a disproof")
    return summary, EXIT_PASS if summary["all_psd"] else EXIT_DISPROOF


def _verdict_exit(classification: str) -> int:
    return EXIT_INCONCLUSIVE if classification == qa.INCONCLUSIVE else EXIT_PASS


def _cmd_qa(args, inputs: dict) -> tuple[dict, int]:
    if args.qa == "dominate":
        name = args.a
        if name.startswith("geometric"):
            ratio = float(name.split(":", 1)[1]) if ":" in name else 0.5
            seq = qa.SummableSequence.geometric(ratio)
        elif name in ("invsquare", "inverse_square"):
            seq = qa.SummableSequence.inverse_square()
        else:
            raise CliInputError(f"unknown summable sequence {name!r}")
        dom = qa.dominating_summable_sequence(seq, args.n)
        head = min(args.n + 1, 20)
        return {"a": seq.name, "n_terms": args.n,
                "b_head": [float(v) for v in dom.b[:head]],
                "ratio_head": [float(v) for v in dom.ratio[:head]],
                "ratio_final": float(dom.ratio[-1]),
                "log_ratio_final": float(dom.log_ratio[-1]),
                "sum_b": float(dom.b.sum()),
                "first_ratio_above_10": dom.first_ratio_exceeding(10.0)}, EXIT_PASS

    seq_obj = _load_json_arg(args.seq, inputs, "sequence")
    seq = qa.PositiveSequence.from_json(seq_obj)
    if args.qa == "classify":
        verdict = qa.classify(seq, n_terms=args.n)
        return {"verdict": verdict.to_json()}, _verdict_exit(verdict.classification)
    if args.qa == "regularize":
        k = args.k if args.k is not None else len(seq.log_terms) - 1
        reg = qa.log_convex_regularize(seq, k)
        return {"K": k, "regularized_terms": list(reg.terms),
                "log_terms": list(reg.log_terms)}, EXIT_PASS
    # sums
    sums = qa.denjoy_carleman_sums(seq, args.n)
    return {"n_terms": args.n,
            "raw_root": float(sums.raw_root[-1]),
            "beta": float(sums.beta[-1]),
            "envelope_root": float(sums.envelope_root[-1]),
            "ratio": float(sums.ratio[-1]),
            "curves": {"raw_root": [float(v) for v in sums.raw_root],
                       "beta": [float(v) for v in sums.beta],
                       "envelope_root": [float(v) for v in sums.envelope_root],
                       "ratio": [float(v) for v in sums.ratio]}}, EXIT_PASS


def _load_weight(value: str | None, inputs: dict):
    if value is None:
        return ConstantWeight(1.0)
    return weight_from_json(_load_json_arg(value, inputs, "weight"))


def _cmd_sobolev(args, inputs: dict) -> tuple[dict, int]:
    if args.sobolev == "norm":
        fn_obj = _load_json_arg(args.fn, inputs, "function")
        f = sobolev.SampledFunction.from_json(fn_obj)
        k = sobolev.SobolevIndex(args.k1, _load_weight(args.weight, inputs))
        value = sobolev.weighted_sobolev_norm(f, k)
        return {"k1": args.k1, "norm": value}, EXIT_PASS
    if args.sobolev == "bound":
        k = sobolev.SobolevIndex(args.k1, _load_weight(args.weight, inputs))
        d_obj = _load_json_arg(args.d_seq, inputs, "d_seq")
        d_seq = qa.PositiveSequence.from_json(d_obj)
        value = sobolev.bump_norm_bound(args.y, args.p, k, d_seq)
        return {"y": args.y, "p": args.p, "k1": args.k1, "bound": value}, EXIT_PASS
    # condition-d
    if args.family == "poly":
        weight = PolyEvenWeight.pair(args.C, args.n_param)
    else:
        weight = ExpWeight(args.C, float(args.n_param))
    k = sobolev.SobolevIndex(args.k1, weight)
    witness = sobolev.condition_d_witness(k, window=args.window)
    rs = np.arange(-args.window, args.window + 1e-9, 0.01)
    dominated = bool(np.all(
        np.asarray(witness.k_prime.k2(rs))
        >= np.maximum(np.abs(witness.q(rs)), np.abs(witness.q_prime(rs))) ** 2))
    out = {"family": args.family, "C": args.C, "n": args.n_param,
           "k_prime": {"k1": witness.k_prime.k1,
                       "k2": witness.k_prime.k2.to_json()},
           "integral_k2_over_q2": witness.integral,
           "window": witness.window,
           "dominates_on_window": dominated}
    if witness.b_factor is not None:
        out["b_factor"] = witness.b_factor
    return out, EXIT_PASS if dominated else EXIT_DISPROOF


def _cmd_oracle(args, inputs: dict) -> tuple[dict, int]:
    if args.oracle == "fit":
        m = _load_moments(args.moments, inputs)
        if not isinstance(m, moments.MomentSequence):
            raise CliInputError("the fitter works on finite-dimensional sequences")
        try:
            cands = [[float(v) for v in part.split(",")]
                     for part in args.candidates.split(";")] \
                if ";" in args.candidates else \
             [[float(v)] for v in args.candidates.split(",")]
        except ValueError as exc:
            raise CliInputError(f"bad --candidates: {exc}")
        t_match = args.t_match if args.t_match is not None else m.max_degree
        fit = oracle.brute_force_realizable(m, cands, t_match, args.tol)
        result = {"fit": fit.to_json(), "t_match": t_match, "tol": args.tol}
        if fit.feasible:
            return result, EXIT_PASS
        return result, EXIT_DISPROOF if fit.converged else EXIT_INCONCLUSIVE
    # perturb
    m = _load_moments(args.moments, inputs)
    if not isinstance(m, moments.MomentSequence):
        raise CliInputError("perturb targets finite-dimensional sequences here")
    try:
        alpha = tuple(int(v) for v in args.alpha.split(","))
    except ValueError as exc:
        raise CliInputError(f"bad --alpha: {exc}")
    perturbed = oracle.perturb(m, alpha, args.eps)
    out_obj = perturbed.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps(out_obj) + "\n")
        return {"out": args.out, "alpha": list(alpha), "eps": args.eps}, EXIT_PASS
    return {"moments": out_obj, "alpha": list(alpha), "eps": args.eps}, EXIT_PASS


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="momentcert",
                     description="moment/realizability certificate checks")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a seeded ensemble with its moments")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--atoms", type=int, default=3)
    gen.add_argument("--N", type=int, default=4)
    gen.add_argument("--point", action="store_true",
                     help="point atoms in a box instead of grid measures")
    gen.add_argument("--d", type=int, default=1)
    gen.add_argument("--grid", type=int, default=4, help="points per axis")
    gen.add_argument("--h", type=float, default=0.5, help="grid spacing")
    gen.add_argument("--box", type=float, nargs=2, default=(0.0, 1.0))
    gen.add_argument("--out", default="ensemble")

    chk = sub.add_parser("check", help="positivity certificate checks")
    chk.add_argument("check", choices=["psd", "semialgebraic", "radon",
                                       "bounded-density"])
    chk.add_argument("--moments", required=True)
    chk.add_argument("--t", type=int, default=None, help="truncation level")
    chk.add_argument("--tol", type=float, default=moments.DEFAULT_PSD_TOL)
    chk.add_argument("--constraints", help="semi-algebraic spec JSON")
    chk.add_argument("--c", type=float, default=None, help="density bound")
    chk.add_argument("--phi-width", type=int, default=3,
                     help="max box width of the sampled constraint functions")

    qac = sub.add_parser("qa", help="quasi-analyticity analysis")
    qac.add_argument("qa", choices=["classify", "regularize", "sums", "dominate"])
    qac.add_argument("--seq", help="positive sequence JSON")
    qac.add_argument("--n", type=int, default=200, help="number of terms")
    qac.add_argument("--k", type=int, default=None, help="regularization range")
    qac.add_argument("--a", default="geometric:0.5",
                     help="summable sequence for dominate (geometric:R | invsquare)")

    sob = sub.add_parser("sobolev", help="weighted Sobolev utilities")
    sob.add_argument("sobolev", choices=["norm", "bound", "condition-d"])
    sob.add_argument("--fn", help="sampled function JSON")
    sob.add_argument("--k1", type=int, default=0)
    sob.add_argument("--weight", help="weight JSON {name, params}")
    sob.add_argument("--y", type=float, default=0.0)
    sob.add_argument("--p", type=float, default=0.0)
    sob.add_argument("--d-seq", help="derivative bound sequence JSON")
    sob.add_argument("--family", choices=["poly", "exp"], default="poly")
    sob.add_argument("--C", type=float, default=1.0)
    sob.add_argument("--n-param", type=int, default=1)
    sob.add_argument("--window", type=float, default=10.0)

    orc = sub.add_parser("oracle", help="brute-force fitting and perturbation")
    orc.add_argument("oracle", choices=["fit", "perturb"])
    orc.add_argument("--moments", required=True)
    orc.add_argument("--candidates", default="0,0.25,0.5,0.75,1")
    orc.add_argument("--t-match", type=int, default=None)
    orc.add_argument("--tol", type=float, default=1e-8)
    orc.add_argument("--alpha", default="0", help="multi-index, comma separated")
    orc.add_argument("--eps", type=float, default=0.0)
    orc.add_argument("--out", default=None)

    return parser


_DISPATCH = {
    "gen": _cmd_gen,
    "check": _cmd_check,
    "qa": _cmd_qa,
    "sobolev": _cmd_sobolev,
    "oracle": _cmd_oracle,
}


def run(argv: list[str]) -> tuple[dict, int]:
    """Execute one CLI invocation; returns (report, exit code)."""
    started = time.perf_counter()
    inputs: dict = {}
    report: dict = {"command": list(argv)}
    try:
        args = build_parser().parse_args(argv)
        result, code = _DISPATCH[args.command](args, inputs)
    except CliInputError as exc:
        report.update({"error": str(exc), "inputs": inputs,
                       "elapsed_seconds": time.perf_counter() - started,
                       "exit_code": EXIT_INPUT_ERROR})
        return report, EXIT_INPUT_ERROR
    except RealizabilityError as exc:
        report.update({"error": f"{type(exc).__name__}: {exc}", "inputs": inputs,
                       "elapsed_seconds": time.perf_counter() - started,
                       "exit_code": EXIT_INPUT_ERROR})
        return report, EXIT_INPUT_ERROR
    report.update({"inputs": inputs, "result": result,
                   "elapsed_seconds": time.perf_counter() - started,
                   "exit_code": code})
    return report, code


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    report, code = run(argv)
    print(dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
