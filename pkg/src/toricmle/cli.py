"""Command-line front end.

Every command writes one JSON document ``{"status", "payload", "diagnostics"}``
to standard output (or a plain table with ``--format table``).  Exit codes:
0 ok, 1 selftest failure, 2 usage, 3 malformed input file, 4 invalid input,
5 computation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from . import __version__, delpezzo, discriminant as disc, jsonio, phylo, selftest, tfp
from .ipf import IpfConfig, ipf_solve
from .model import (DataVector, DesignMatrix, LatticePolytope, Scaling, birch_residual,
                    polytope_to_matrix)

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_USAGE = 2
EXIT_MALFORMED = 3
EXIT_INVALID = 4
EXIT_COMPUTATION = 5

ERROR_CODES = {
    EXIT_SELFTEST: "selftest_failed",
    EXIT_USAGE: "usage",
    EXIT_MALFORMED: "malformed_input",
    EXIT_INVALID: "invalid_input",
    EXIT_COMPUTATION: "computation_failed",
}


class UsageError(Exception):
    pass


class MalformedInput(Exception):
    pass


@dataclass
class CommandResult:
    status: str
    payload: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK
    message: str = ""

    @classmethod
    def error(cls, exit_code, message, diagnostics=None):
        return cls("error", {}, diagnostics or {}, exit_code, message)

    def as_dict(self):
        out = {"status": self.status, "payload": self.payload, "diagnostics": self.diagnostics}
        if self.status == "error":
            out["error"] = {"code": ERROR_CODES.get(self.exit_code, "error"),
                            "message": self.message}
        return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- input helpers -------------------------------------------------------------

def _load(path):
    try:
        return jsonio.load(path)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise MalformedInput(f"{path}: {exc.strerror or exc}") from None


def _counts(obj):
    """``{"counts": [...]}``, ``{"counts": {label: n}}``, a bare list or a bare mapping."""
    if isinstance(obj, dict) and "counts" in obj:
        obj = obj["counts"]
    if isinstance(obj, dict):
        return {str(k): _int(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_int(v) for v in obj]
    raise ValueError("data must be a list of counts or a mapping from labels to counts")


def _int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValueError(f"counts must be integers, got {v!r}")
    return v


def _count_list(obj):
    c = _counts(obj)
    if isinstance(c, dict):
        raise ValueError("this command needs counts as a list in point order")
    return c


def _model(obj):
    """Model JSON: ``{"points": [[...], ...]}`` or ``{"matrix": [[...], ...]}``, optional scaling."""
    if not isinstance(obj, dict):
        raise ValueError("model must be a JSON object")
    if "points" in obj:
        poly = LatticePolytope(tuple(tuple(p) for p in obj["points"]))
        A = polytope_to_matrix(poly)
    elif "matrix" in obj:
        A = DesignMatrix(tuple(tuple(r) for r in obj["matrix"]))
        poly = LatticePolytope(tuple(A.columns()))
    else:
        raise ValueError("model needs 'points' or 'matrix'")
    scaling = None
    if "scaling" in obj:
        scaling = Scaling(tuple(jsonio.parse_exact(c) for c in obj["scaling"]))
        if len(scaling) != A.n_cols:
            raise ValueError(f"scaling has {len(scaling)} entries for {A.n_cols} points")
    gens = tuple(jsonio.parse_binomial(g) for g in obj.get("generators", ()))
    return poly, A, scaling, gens


def _tfp_config(obj):
    if not isinstance(obj, dict):
        raise ValueError("config must be a JSON object")
    try:
        cfg = tfp.GradedConfig(obj["grading"], obj["B"], obj["C"], obj["pi1"], obj["pi2"])
    except KeyError as exc:
        raise ValueError(f"config is missing {exc.args[0]!r}") from None
    F = [jsonio.parse_binomial(g) for g in obj.get("F", ())]
    G = [jsonio.parse_binomial(g) for g in obj.get("G", ())]
    return cfg, F, G


def _check_length(u, n, what="data"):
    if len(u) != n:
        raise ValueError(f"{what} has {len(u)} entries, expected {n}")


# -- commands ------------------------------------------------------------------

def cmd_mle_loglinear(args):
    _, A, scaling, gens = _model(_load(args.model))
    if scaling is not None and any(c != 1 for c in scaling):
        raise ValueError("iterative scaling here supports unit scaling only")
    u = _count_list(_load(args.data))
    _check_length(u, A.n_cols)
    cfg = IpfConfig(tolerance=args.tol or 1e-10, max_iterations=args.max_iter)
    res = ipf_solve(A, u, cfg, gens=gens)
    resid = birch_residual(res.estimate.values, u, A, gens)
    diag = {"iterations": res.iterations, "residual": resid.as_dict(),
            "trace": list(res.trace)}
    return CommandResult("ok", res.as_dict(), diag)


def cmd_mle_delpezzo(args):
    u = _count_list(_load(args.data))
    e = delpezzo.entry(args.label)
    _check_length(u, len(e.polytope))
    DataVector(tuple(u))
    tol = args.tol or 1e-10
    est, method, details = delpezzo.delpezzo_mle(args.label, u, tol=tol, order=args.order)
    payload = {"label": e.label, "method": method, "order": args.order,
               "points": [list(p) for p in e.polytope.points], "estimate": list(est.values)}
    if method == "closed_form":
        payload.update({"x": details.x, "s": details.s, "theta": list(details.theta),
                        "coefficients": list(details.coefficients),
                        "polynomial": list(details.polynomial)})
        diag = {"residual": details.residual.as_dict(), "real_roots": list(details.real_roots),
                "permutation": list(delpezzo.closed_form_permutation(e.label))}
    else:
        diag = {"iterations": details.iterations, "final_residual": details.final_residual,
                "status": details.status, "generator_residual": details.generator_residual}
    return CommandResult("ok", payload, diag)


def cmd_mle_phylo(args):
    T = phylo.PhyloTree.from_json(_load(args.tree))
    u = _counts(_load(args.data))
    u = phylo.as_label_vector(T, u)
    labels = [phylo.label_string(l) for l in phylo.valid_labelings(T)]
    methods = {"direct": lambda: phylo.phylo_mle(T, u),
               "tfp": lambda: phylo.phylo_mle_tfp(T, u)}
    if T.n_leaves >= 4:
        methods["horn"] = lambda: phylo.horn_mle(phylo.horn_matrix(T), u)
    if args.method not in methods:
        raise ValueError(f"method {args.method!r} is not available for this tree")
    est = methods[args.method]()
    cross = {}
    for name, fn in methods.items():
        if name != args.method:
            cross[name] = fn().values == est.values
    A = DesignMatrix.from_columns(phylo.valid_labelings(T))
    res = birch_residual(est.values, u, A)
    payload = {"method": args.method, "estimate": dict(zip(labels, est.values))}
    diag = {"cross_check": cross, "residual": res.as_dict(), "edges": [list(e) for e in T.edges]}
    return CommandResult("ok", payload, diag)


def _tfp_payload_vector(cfg, p):
    return [{"index": [i, j, k], "value": p[i, j, k]} for i, j, k in cfg.indices()]


def cmd_mle_tfp(args):
    cfg, _, _ = _tfp_config(_load(args.config))
    u = _count_list(_load(args.data))
    _check_length(u, len(cfg.indices()))
    p, (pA, pB, pC) = tfp.tfp_mle(cfg, u)
    uA, uB, uC = tfp.marginals(p)
    exact = not any(isinstance(x, float) for x in p.flat())
    payload = {"estimate": _tfp_payload_vector(cfg, p), "pA": list(pA), "pB": list(pB),
               "pC": list(pC)}
    diag = {"exact": exact,
            "margins_match": bool(tuple(uA) == tuple(pA) and tuple(uB) == tuple(pB)
                                  and tuple(uC) == tuple(pC)) if exact else None,
            "slice_minors_zero": all(m == 0 for m in tfp.slice_minors(p)) if exact else None}
    return CommandResult("ok", payload, diag)


def cmd_catalog(args):
    entries = [e.as_dict() for e in delpezzo.catalog()]
    for d in entries:
        d["closed_form"] = d["label"] in delpezzo.CLOSED_FORM_LABELS
    return CommandResult("ok", {"entries": entries}, {"count": len(entries)})


def _veronese_matrix(obj):
    if isinstance(obj, dict):
        if "C" in obj:
            obj = obj["C"]
        elif "coefficients" in obj:
            return disc.VeroneseScaling.from_coefficients(
                *(jsonio.parse_exact(c) for c in obj["coefficients"]))
    if not isinstance(obj, list):
        raise ValueError("expected a 3x3 matrix or {\"C\": ...}")
    return disc.VeroneseScaling(tuple(tuple(jsonio.parse_exact(x) for x in row) for row in obj))


def cmd_discriminant_veronese(args):
    C = _veronese_matrix(_load(args.C))
    f = disc.veronese_EA(C)
    theta = disc.veronese_rank_singularity(C)
    payload = {"factors": {"det_C": f.det_C, "d123": f.d123, "d356": f.d356, "d145": f.d145},
               "product": f.product, "pattern": ["nonzero" if b else "zero" for b in f.pattern()],
               "drop": disc.predict_drop_veronese(C)}
    diag = {"C": [list(r) for r in C.C], "scaling": list(C.coefficients()),
            "rank_singular_point": list(theta) if theta is not None else None}
    return CommandResult("ok", payload, diag)


def cmd_discriminant_check(args):
    poly, A, scaling, _ = _model(_load(args.model))
    th = _load(args.theta)
    if isinstance(th, dict):
        th = th.get("theta")
    if not isinstance(th, list):
        raise ValueError("theta must be a list")
    theta = tuple(jsonio.parse_exact(t) for t in th)
    cfg = disc.ScaledConfig.build(poly, scaling)
    tol = args.tol or disc.SINGULAR_TOL
    value, grad = disc.f_c(cfg, theta)
    payload = {"singular": disc.verify_singular_point(cfg, theta, tol), "value": value,
               "gradient": list(grad)}
    edges = [{"points": [list(A.column(j)) for j in f.indices],
              "lattice_length": disc.lattice_length(f, A)} for f in cfg.edges()]
    return CommandResult("ok", payload, {"edges": edges})


def cmd_generators_tfp(args):
    cfg, F, G = _tfp_config(_load(args.config))
    gens = tfp.generators(F, G, cfg)
    lifts = len([g for f in F for g in tfp.lift(f, cfg, "B")]) + \
        len([g for f in G for g in tfp.lift(f, cfg, "C")])
    payload = {"generators": [jsonio.binomial_json(g) for g in gens]}
    diag = {"count": len(gens), "lifts": lifts, "quads": len(tfp.quad(cfg))}
    return CommandResult("ok", payload, diag)


def cmd_horn(args):
    T = phylo.PhyloTree.from_json(_load(args.tree))
    hd = phylo.horn_matrix(T)
    col_sums = [sum(c) for c in zip(*hd.H)]
    return CommandResult("ok", hd.as_dict(), {"shape": list(hd.shape),
                                              "columns_sum_to_zero": all(s == 0 for s in col_sums)})


def cmd_selftest(args):
    outcomes = selftest.run(args.filter, seed=args.seed)
    failed = [o.name for o in outcomes if not o.passed]
    payload = {"checks": [o.as_dict() for o in outcomes]}
    diag = {"total": len(outcomes), "failed": failed}
    if not outcomes:
        return CommandResult("error", payload, diag, EXIT_USAGE,
                             f"no check matches filter {args.filter!r}")
    if failed:
        return CommandResult("error", payload, diag, EXIT_SELFTEST,
                             f"{len(failed)} of {len(outcomes)} checks failed")
    return CommandResult("ok", payload, diag)


# -- parser --------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default=argparse.SUPPRESS)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    p = _Parser(prog="toricmle", description="Maximum likelihood estimation on toric models.",
                parents=[common])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def add(parent, name, fn, help):
        sp = parent.add_parser(name, help=help, parents=[common])
        sp.set_defaults(func=fn)
        return sp

    mle = sub.add_parser("mle", help="compute an MLE").add_subparsers(
        dest="kind", parser_class=_Parser, required=True)
    sp = add(mle, "loglinear", cmd_mle_loglinear, "iterative scaling on any model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--max-iter", type=int, default=10**6)
    sp = add(mle, "delpezzo", cmd_mle_delpezzo, "MLE for a catalog surface")
    sp.add_argument("--label", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--order", choices=("catalog", "closed_form"), default="catalog")
    sp = add(mle, "phylo", cmd_mle_phylo, "exact MLE for a 3-valent tree")
    sp.add_argument("--tree", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--method", choices=("direct", "horn", "tfp"), default="direct")
    sp = add(mle, "tfp", cmd_mle_tfp, "MLE on a codimension-zero fiber product")
    sp.add_argument("--config", required=True)
    sp.add_argument("--data", required=True)

    add(sub, "catalog", cmd_catalog, "list the 16 surfaces")

    dsc = sub.add_parser("discriminant", help="discriminant checks").add_subparsers(
        dest="kind", parser_class=_Parser, required=True)
    sp = add(dsc, "veronese", cmd_discriminant_veronese, "factors of E_A for a scaled Veronese")
    sp.add_argument("--C", required=True)
    sp = add(dsc, "check-singular", cmd_discriminant_check, "is theta a singular point of f_c")
    sp.add_argument("--model", required=True)
    sp.add_argument("--theta", required=True)

    gen = sub.add_parser("generators", help="ideal generators").add_subparsers(
        dest="kind", parser_class=_Parser, required=True)
    sp = add(gen, "tfp", cmd_generators_tfp, "Lift and Quad generators")
    sp.add_argument("--config", required=True)

    sp = add(sub, "horn", cmd_horn, "Horn matrix of a 3-valent tree")
    sp.add_argument("--tree", required=True)

    sp = add(sub, "selftest", cmd_selftest, "run the reference checks")
    sp.add_argument("--filter", default=None)
    return p


def run(argv) -> CommandResult:
    try:
        args = build_parser().parse_args(list(argv))
    except UsageError as exc:
        return CommandResult.error(EXIT_USAGE, str(exc))
    for name, default in (("format", "json"), ("tol", None), ("seed", 0)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except MalformedInput as exc:
        return CommandResult.error(EXIT_MALFORMED, str(exc))
    except (ValueError, KeyError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        return CommandResult.error(EXIT_INVALID, f"{type(exc).__name__}: {msg}")
    except ArithmeticError as exc:
        return CommandResult.error(EXIT_COMPUTATION, f"{type(exc).__name__}: {exc}")


def render_table(result: CommandResult) -> str:
    data = jsonio.jsonable(result.as_dict())
    lines = []

    def emit(prefix, value):
        if isinstance(value, dict) and value:
            for k, v in value.items():
                emit(f"{prefix}.{k}" if prefix else k, v)
        elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            keys = list(value[0])
            rows = [[_cell(v.get(k)) for k in keys] for v in value]
            widths = [max(len(k), *(len(r[n]) for r in rows)) for n, k in enumerate(keys)]
            lines.append(f"{prefix}:")
            lines.append("  " + "  ".join(k.ljust(w) for k, w in zip(keys, widths)))
            for r in rows:
                lines.append("  " + "  ".join(c.ljust(w) for c, w in zip(r, widths)))
        else:
            lines.append(f"{prefix}: {_cell(value)}")

    emit("", data)
    return "\n".join(lines)


def _cell(v):
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, list):
        return "[" + ", ".join(_cell(x) for x in v) + "]"
    if isinstance(v, dict):
        return json.dumps(v)
    return str(v)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    result = run(argv)
    fmt = "table" if "table" in _format_flag(argv) else "json"
    text = render_table(result) if fmt == "table" else jsonio.dumps(result.as_dict())
    sys.stdout.write(text + "\n")
    return result.exit_code


def _format_flag(argv):
    out = []
    for n, a in enumerate(argv):
        if a == "--format" and n + 1 < len(argv):
            out.append(argv[n + 1])
        elif a.startswith("--format="):
            out.append(a.split("=", 1)[1])
    return out[-1:] or ["json"]


if __name__ == "__main__":
    sys.exit(main())
