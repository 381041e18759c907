"""Command-line front end: each subcommand writes one deterministic JSON report.

Exit status: 0 PASS, 1 FAIL, 2 parse error, 3 dimension mismatch,
4 requested check outside the verified window (only with ``--window-strict``).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .bracket import Metric, bracket_density
from .diffring import DiffPoly, TruncationPolicy, decode, from_json_obj, from_text, rational_str, to_json_obj, to_text
from .hierarchy import build_master, commutation_matrix, mc_residual, stationary_restrict
from .localfunc import ConstantTermError, LocalFunctional, canonical_representative
from .tft import DimensionError, PhaseSpaceData, PhaseSpaceError, check_trr_all

EXIT_PASS, EXIT_FAIL, EXIT_PARSE, EXIT_DIMENSION, EXIT_WINDOW = 0, 1, 2, 3, 4

_ERROR_NAMES = {EXIT_PARSE: "parse_error", EXIT_DIMENSION: "dimension_mismatch", EXIT_WINDOW: "window_too_small"}


class CLIError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def functional_obj(p: DiffPoly) -> dict:
    """Canonical density of ``oint p`` plus its Euler tuple."""
    canon = canonical_representative(p)
    euler = LocalFunctional(canon).euler
    return {
        "density": to_text(canon),
        "terms": to_json_obj(canon),
        "euler": {str(decode(k)): to_text(v) for k, v in sorted(euler.items())},
        "zero": not euler,
    }


class Window:
    """Shrink-and-warn (or fail under ``strict``) when a request exceeds what is verified."""

    def __init__(self, strict: bool):
        self.strict = strict
        self.warnings = []

    def clamp(self, what: str, requested: Optional[int], verified: int) -> int:
        if requested is None or requested <= verified:
            return verified if requested is None else requested
        msg = f"{what}: requested {requested} exceeds verified {verified}"
        if self.strict:
            raise CLIError(EXIT_WINDOW, msg)
        self.warnings.append(msg + "; shrunk")
        return verified


# ---- inputs ------------------------------------------------------------

def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise CLIError(EXIT_PARSE, f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CLIError(EXIT_PARSE, f"{path} is not valid JSON: {exc}") from exc


def load_phase(path: str) -> PhaseSpaceData:
    obj = _read_json(path)
    try:
        return PhaseSpaceData.from_json_obj(obj)
    except DimensionError as exc:
        raise CLIError(EXIT_DIMENSION, str(exc)) from exc
    except (PhaseSpaceError, ValueError) as exc:
        raise CLIError(EXIT_PARSE, str(exc)) from exc


def load_metric(path: str) -> Metric:
    obj = _read_json(path)
    rows = obj.get("metric") if isinstance(obj, dict) else obj
    try:
        return Metric(rows)
    except (TypeError, ValueError) as exc:
        raise CLIError(EXIT_PARSE, f"bad metric in {path}: {exc}") from exc


def load_density(arg: str) -> DiffPoly:
    """A density given inline in text form, or a file with text or JSON terms."""
    text = arg
    p = Path(arg)
    if p.is_file():
        text = p.read_text()
    try:
        stripped = text.strip()
        if stripped.startswith("["):
            return from_json_obj(json.loads(stripped))
        return from_text(stripped)
    except (ValueError, KeyError, TypeError) as exc:
        raise CLIError(EXIT_PARSE, f"cannot parse density {arg!r}: {exc}") from exc


def parse_trunc(text: Optional[str], default: TruncationPolicy) -> TruncationPolicy:
    if text is None:
        return default
    try:
        return TruncationPolicy.parse(text)
    except ValueError as exc:
        raise CLIError(EXIT_PARSE, f"bad truncation {text!r}: {exc}") from exc


def _level_truncation(args, top_degree=None) -> TruncationPolicy:
    """Default window covers Hamiltonian degree ``K+2`` (or ``top_degree``)."""
    k = args.max_level
    if k < 0:
        raise CLIError(EXIT_PARSE, "max level must be non-negative")
    n = max(8, (k + 2 if top_degree is None else top_degree) + 1)
    t = parse_trunc(args.trunc, TruncationPolicy(n, k, n, 2))
    return replace(t, max_level=k)


def _check_metric(d: PhaseSpaceData, win: Window):
    for a, b, c, g in d.metric_mismatches():
        win.warnings.append(
            f"metric entry ({d.names[a]}, {d.names[b]}) = {rational_str(g)} but <O O P> = {rational_str(c)}"
        )


# ---- subcommands -------------------------------------------------------

def cmd_hamiltonians(args, win: Window) -> dict:
    d = load_phase(args.phase)
    t = _level_truncation(args)
    _check_metric(d, win)
    verified = min(t.max_insertions - 1, t.max_degree)
    win.clamp("hamiltonian degree", t.max_level + 2, verified)
    res = stationary_restrict(build_master(d, t, extra_max_level=0), d.metric)
    hams = [
        {
            "k": h.k,
            "alpha": d.names[h.alpha],
            "density": to_text(h.G),
            "terms": to_json_obj(h.G),
            "window": h.window,
        }
        for h in res.hamiltonians
    ]
    residual = functional_obj(res.bracket_direct - res.bracket_expanded)
    return {
        "truncation": t.as_list(),
        "window": {"max_degree": verified},
        "hamiltonians": hams,
        "residuals": {"stationary_bracket": residual},
        "verdict": _verdict(residual["zero"]),
    }


def cmd_commute(args, win: Window) -> dict:
    d = load_phase(args.phase)
    # {G_k, G_m} has degree k + m + 3
    t = _level_truncation(args, 2 * args.max_level + 3)
    _check_metric(d, win)
    verified = min(t.max_insertions - 1, t.max_degree)
    win.clamp("hamiltonian degree", t.max_level + 2, verified)
    hams = stationary_restrict(build_master(d, t, extra_max_level=0)).hamiltonians
    # a bracket piece of degree w only uses Hamiltonian terms of degree <= w
    clipped = [replace(h, G=h.G.filter(lambda f: len(f) <= verified)) for h in hams]
    cm = commutation_matrix(clipped, d.metric)
    entries = []
    matrix = []
    for i, h1 in enumerate(clipped):
        row = []
        for j, h2 in enumerate(clipped):
            dens = cm.densities[i][j]
            inside = dens.filter(lambda f: len(f) <= verified)
            obj = functional_obj(inside)
            row.append(obj["density"])
            entries.append(
                {
                    "left": {"k": h1.k, "alpha": d.names[h1.alpha]},
                    "right": {"k": h2.k, "alpha": d.names[h2.alpha]},
                    "density": to_text(inside),
                    "functional": obj,
                    "unverified_terms": len(dens.terms) - len(inside.terms),
                }
            )
        matrix.append(row)
    ok = all(e["functional"]["zero"] for e in entries)
    return {
        "truncation": t.as_list(),
        "window": {"max_degree": verified},
        "labels": [f"G[{h.k}][{d.names[h.alpha]}]" for h in clipped],
        "matrix": matrix,
        "residuals": entries,
        "verdict": _verdict(ok),
    }


def cmd_mc_check(args, win: Window) -> dict:
    d = load_phase(args.phase)
    t = parse_trunc(args.trunc, TruncationPolicy())
    _check_metric(d, win)
    rep = mc_residual(build_master(d, t), d.metric)
    top = win.clamp("residual degree", args.degree, rep.window_degree)
    pieces = {}
    for f, c in rep.inside.terms.items():
        pieces.setdefault(len(f) - 3, {})[f] = c
    residuals = []
    failing = []
    for deg in sorted(pieces):
        if deg > top:
            continue
        obj = functional_obj(DiffPoly(pieces[deg]))
        if not obj["zero"]:
            failing.append(deg)
            residuals.append({"degree": deg, "functional": obj})
    return {
        "truncation": t.as_list(),
        "window": {
            "max_degree": top,
            "max_factors": rep.max_factors,
            "max_eta_level": rep.max_eta_level,
        },
        "checked_terms": sum(len(p) for deg, p in pieces.items() if deg <= top),
        "unverified_terms": len(rep.outside.terms),
        "failing_degrees": failing,
        "residuals": residuals,
        "verdict": _verdict(not failing),
    }


def cmd_trr_check(args, win: Window) -> dict:
    d = load_phase(args.phase)
    t = parse_trunc(args.trunc, TruncationPolicy())
    _check_metric(d, win)
    rep = check_trr_all(d, t, args.max_index_level)
    top = win.clamp("residual degree", args.degree, rep.window)
    residuals = []
    failing = set()
    for r in rep.results:
        for deg in sorted(set(r.failing_degrees)):
            if deg > top:
                continue
            failing.add(deg)
            piece = r.residual.filter(lambda f, deg=deg: len(f) == deg)
            residuals.append(
                {
                    "indices": [[k, d.names[a]] for k, a in r.indices],
                    "degree": deg,
                    "residual": to_text(piece),
                }
            )
    return {
        "truncation": t.as_list(),
        "window": {"max_degree": top},
        "checked": len(rep.results),
        "failing_degrees": sorted(failing),
        "residuals": residuals,
        "verdict": _verdict(not failing),
    }


def cmd_bracket_eval(args, win: Window) -> dict:
    g = load_metric(args.metric)
    l1, l2 = load_density(args.left), load_density(args.right)
    for p in (l1, l2):
        for f in p.terms:
            for c in f:
                if decode(c).alpha >= g.dim:
                    raise CLIError(EXIT_DIMENSION, f"density uses index {decode(c).alpha} but the metric has dim {g.dim}")
    try:
        dens = bracket_density(l1, l2, g)
        obj = functional_obj(dens)
    except ConstantTermError as exc:
        raise CLIError(EXIT_PARSE, str(exc)) from exc
    ok = obj["zero"] or not args.expect_zero
    return {
        "inputs_parsed": [to_text(l1), to_text(l2)],
        "density": to_text(dens),
        "bracket": obj,
        "is_zero": obj["zero"],
        "verdict": _verdict(ok),
    }


def cmd_transfer_check(args, win: Window) -> dict:
    from .transfer.contraction import verify_compatibility, verify_contraction
    from .transfer.fixtures import FixtureError, fixture_from_json, poly_to_json
    from .transfer.homotopy import transfer_interaction
    from .transfer.spaces import arities, verify_shifted_symplectic

    obj = _read_json(args.fixture)
    try:
        fx = fixture_from_json(obj)
    except (FixtureError, ValueError, KeyError, TypeError, IndexError) as exc:
        raise CLIError(EXIT_PARSE, f"bad fixture: {exc}") from exc
    if args.arity_cap < 3:
        raise CLIError(EXIT_PARSE, "arity cap must be at least 3")
    top = max(arities(fx.I), default=3)
    win.clamp("interaction arity", top, args.arity_cap)
    sides = {
        "symplectic": verify_shifted_symplectic(fx.s),
        "contraction": verify_contraction(fx.contraction),
        "compatibility": verify_compatibility(fx.contraction, fx.s),
    }
    side_obj = {k: {"checked": r.checked, "failures": r.failures} for k, r in sides.items()}
    sides_ok = all(r.ok for r in sides.values())
    before = fx.s.cme_residual(fx.I)
    out = {
        "fixture": fx.name,
        "arity_cap": args.arity_cap,
        "method": args.method,
        "side_conditions": side_obj,
        "residuals": {"before": poly_to_json(before, fx.s.space)},
    }
    ok = sides_ok and not before.terms
    if sides_ok:
        r = transfer_interaction(fx.I, fx.contraction, fx.s, args.arity_cap, args.method)
        after = r.cme_residual()
        out["target_basis"] = [[l, d] for l, d in zip(r.target.space.labels, r.target.space.degrees)]
        out["transferred"] = poly_to_json(r.I_H, r.target.space)
        out["residuals"]["after"] = poly_to_json(after, r.target.space)
        ok = ok and not after.terms
    out["verdict"] = _verdict(ok)
    return out


# ---- driver --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bvhier", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", "-o", help="write the report here instead of stdout")
        sp.add_argument("--window-strict", action="store_true",
                        help="fail when a request exceeds the verified window")

    for name, helptext in [("hamiltonians", "print the stationary Hamiltonians"),
                           ("commute", "bracket the stationary Hamiltonians pairwise")]:
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("phase")
        sp.add_argument("--max-level", type=int, required=True)
        sp.add_argument("--trunc", help="N,K,D,M (K is replaced by --max-level)")
        common(sp)

    for name, helptext in [("mc-check", "Maurer-Cartan residual of the master functional"),
                           ("trr-check", "topological recursion residuals")]:
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("phase")
        sp.add_argument("--trunc", help="N,K,D,M (default 8,3,8,2)")
        sp.add_argument("--degree", type=int, help="highest residual degree to check")
        if name == "trr-check":
            sp.add_argument("--max-index-level", type=int)
        common(sp)

    sp = sub.add_parser("bracket-eval", help="bracket two densities")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--metric", required=True)
    sp.add_argument("--expect-zero", action="store_true", help="FAIL unless the bracket vanishes")
    common(sp)

    sp = sub.add_parser("transfer-check", help="homotopy transfer of a finite BV fixture")
    sp.add_argument("fixture")
    sp.add_argument("--arity-cap", type=int, default=6)
    sp.add_argument("--method", choices=["trees", "skeletons", "flow"], default="trees")
    common(sp)
    return p


COMMANDS = {
    "hamiltonians": cmd_hamiltonians,
    "commute": cmd_commute,
    "mc-check": cmd_mc_check,
    "trr-check": cmd_trr_check,
    "bracket-eval": cmd_bracket_eval,
    "transfer-check": cmd_transfer_check,
}


def run(argv=None) -> tuple:
    """Return ``(report, exit status)``."""
    report, code, _ = _run(build_parser().parse_args(argv))
    return report, code


def _run(args) -> tuple:
    win = Window(args.window_strict)
    inputs = {k: v for k, v in vars(args).items() if k not in ("command", "output")}
    report = {"command": args.command, "inputs": inputs}
    try:
        body = COMMANDS[args.command](args, win)
        report.update(body)
        code = EXIT_PASS if body["verdict"] == "PASS" else EXIT_FAIL
    except CLIError as exc:
        report.update({"verdict": "ERROR", "error": {"code": _ERROR_NAMES[exc.code], "message": str(exc)}})
        code = exc.code
    report["warnings"] = win.warnings
    report["exit_status"] = code
    return report, code, args.output


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv=None) -> int:
    report, code, out = _run(build_parser().parse_args(argv))
    text = dumps(report)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    for w in report["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
