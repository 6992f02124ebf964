"""Command line front end: ``wakimoto-fock <group> <command> [flags]``.

Exit status is 0 when every check passes, 1 when a check fails and 2 for
bad flags or malformed input.  Reports are deterministic: the same flags give
byte-identical output.
"""

from __future__ import annotations

import argparse
import sys

from .algebra import FockPoly, Params, ParseError, format_poly, format_rational, parse_poly, to_rational
from .report import Report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _rational(text: str):
    try:
        return to_rational(text)
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError(f"expected p/q or an integer, got {text!r}")


def _rational_list(text: str) -> list:
    if not text.strip():
        return []
    return [_rational(part) for part in text.split(",")]


def _int_list(text: str) -> list:
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def _mode_map(text: str) -> dict:
    """``m:q,m:q`` (e.g. ``0:5,1:1/2``) for the Jakobsen-Kac scalar sequence."""
    out = {}
    for part in filter(None, text.split(",")):
        try:
            m, q = part.split(":")
            out[int(m)] = to_rational(q)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected m:p/q pairs, got {part!r}")
    return out


def _common(p: argparse.ArgumentParser, params=True):
    if params:
        p.add_argument("--n", type=int, default=1)
        p.add_argument("--r", type=int, default=0)
        p.add_argument("--gamma2", type=_rational, default=0)
        p.add_argument("--lambda", dest="lam", type=_rational_list, default=None)
    p.add_argument("--mode-window", type=int, default=3)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--report", choices=("text", "json"), default="text")
    p.add_argument("--output", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wakimoto-fock", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)

    verify = groups.add_parser("verify").add_subparsers(dest="command", required=True)
    p = verify.add_parser("relations", help="defining relations, oscillator CCR, root brackets")
    _common(p)
    p = verify.add_parser("highest-weight", help="vacuum annihilation and eigenvalues")
    _common(p)
    p.add_argument("--borel", choices=("inducing", "realized"), default="inducing")

    matrix = groups.add_parser("matrix").add_subparsers(dest="command", required=True)
    p = matrix.add_parser("det-b", help="closed form against elimination")
    _common(p)

    character = groups.add_parser("character").add_subparsers(dest="command", required=True)
    p = character.add_parser("compare", help="complement census against Fock variables")
    _common(p)
    p.add_argument("--delta", type=int, default=2)
    p.add_argument("--borel", choices=("inducing", "realized"), default="inducing")

    generate = groups.add_parser("generate").add_subparsers(dest="command", required=True)
    p = generate.add_parser("witness", help="constructive program for one monomial")
    _common(p)
    p.add_argument("--target", required=True)
    p = generate.add_parser("check", help="witness programs for every windowed monomial")
    _common(p)

    probe = groups.add_parser("probe").add_subparsers(dest="command", required=True)
    p = probe.add_parser("submodule", help="search U(g)v for an r-part vector")
    _common(p)
    p.add_argument("--vector", required=True)
    p.add_argument("--delta", type=int, default=2)
    p.add_argument("--length", type=int, default=2)

    sl2 = groups.add_parser("sl2").add_subparsers(dest="command", required=True)
    p = sl2.add_parser("singular", help="singularity of a Wilson vector in V(0)")
    _common(p, params=False)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=_int_list, required=True)
    p.add_argument("--check-window", type=int, default=4)
    p = sl2.add_parser("realization", help="relation suite of an explicit sl(2) realization")
    _common(p, params=False)
    p.add_argument("--kind", choices=("first", "jk", "bf", "second"), required=True)
    p.add_argument("--K", type=_rational, default=0)
    p.add_argument("--J", type=_rational, default=0)
    p.add_argument("--jk-lambda", type=_mode_map, default={})
    return parser


def _params(args) -> Params:
    try:
        return Params(args.n, args.r, args.gamma2, tuple(args.lam or ()))
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc))


def _parse_vector(text: str, params: Params) -> FockPoly:
    try:
        return parse_poly(text, params)
    except (ParseError, IndexError, ValueError) as exc:
        raise UsageError(f"cannot parse {text!r}: {exc}")


# --------------------------------------------------------------------------
# command bodies; each returns a Report


def cmd_verify_relations(args) -> Report:
    from .relations import run_suite

    return run_suite(_params(args), args.mode_window, args.degree)


def cmd_verify_highest_weight(args) -> Report:
    from .relations import check_highest_weight

    params = _params(args)
    report = Report(f"highest-weight({args.borel})", params)
    return check_highest_weight(params, args.mode_window, report=report, borel=args.borel)


def cmd_matrix_det_b(args) -> Report:
    from .oscillator import build_b_matrix, det_b

    params = _params(args)
    closed, elim = det_b(params)
    report = Report("det-b", params)
    for row in build_b_matrix(params):
        report.notes.append("[" + ", ".join(format_rational(q) for q in row) + "]")
    report.notes.append(f"closed={format_rational(closed)} eliminated={format_rational(elim)}")
    report.add("closed form equals elimination", closed == elim, f"{closed} vs {elim}")
    g, r, n = params.gamma2, params.r, params.n
    expected = (r >= 1 and g == 0) or (r < n and g == r + 1)
    report.add(f"degenerate={str(elim == 0).lower()}", (elim == 0) == expected, f"expected {expected}")
    return report


def cmd_character_compare(args) -> Report:
    from .structure import character_compare

    params = _params(args)
    report = Report(f"character({args.borel})", params)
    return character_compare(params, args.mode_window, args.delta, borel=args.borel, report=report)


def cmd_generate_witness(args) -> Report:
    from .structure import generation_witness

    params = _params(args)
    target = _parse_vector(args.target, params)
    if len(target) != 1 or next(iter(target.terms.values())) != 1:
        raise UsageError("--target must be a single monomial with coefficient 1")
    (mono,) = target.terms
    report = Report("generation-witness", params)
    try:
        prog = generation_witness(mono, params)
    except AssertionError as exc:
        report.add(f"reach {format_poly(target)}", False, str(exc))
        return report
    report.notes.extend(prog.instructions())
    report.extra["program"] = prog.instructions()
    report.add(f"reach {format_poly(target)}", True)
    return report


def cmd_generate_check(args) -> Report:
    from .structure import generation_check

    return generation_check(_params(args), args.mode_window, args.degree)


def cmd_probe_submodule(args) -> Report:
    from .structure import submodule_probe

    params = _params(args)
    v = _parse_vector(args.vector, params)
    if not v:
        raise UsageError("--vector must be nonzero")
    found, report = submodule_probe(v, params, args.delta, args.length, mode_window=args.mode_window)
    report.notes.append(f"found: {format_poly(found)}" if found is not None else "verdict: INCONCLUSIVE")
    return report


def cmd_sl2_singular(args) -> Report:
    from .sl2 import format_vpoly, singularity_check, wilson_vector

    try:
        v = wilson_vector(args.r, args.s)
    except ValueError as exc:
        raise UsageError(str(exc))
    report = Report("sl2-singular")
    report.notes.append(f"v = {format_vpoly(v)}")
    if not v:
        report.notes.append("wilson vector vanishes (repeated shift)")
        report.add("nonzero vector", False, "v = 0")
        return report
    e_ok, h_ok, witnesses = singularity_check(v, args.check_window)
    report.notes.append(f"e-annihilated: {str(e_ok).lower()}")
    report.notes.append(f"h-annihilated: {str(h_ok).lower()}")
    report.notes.extend(f"  {w}" for w in witnesses)
    e_wit = next((w for w in witnesses if w.startswith("e")), None)
    report.add(f"e[i] v = 0 for |i| <= {args.check_window}", e_ok, e_wit)
    # h-annihilation is reported above but is not required of these vectors
    return report


def cmd_sl2_realization(args) -> Report:
    from .sl2 import make_realization, second_vs_engine, sl2_relation_check, sl2_test_vectors

    real = make_realization(args.kind, K=args.K, J=args.J, lam=args.jk_lambda)
    tests = sl2_test_vectors(args.mode_window, args.degree, real.has_y)
    report = sl2_relation_check(real, args.mode_window, tests)
    if args.kind == "second":
        report.extend(second_vs_engine(args.K, args.mode_window, tests))
    return report


COMMANDS = {
    ("verify", "relations"): cmd_verify_relations,
    ("verify", "highest-weight"): cmd_verify_highest_weight,
    ("matrix", "det-b"): cmd_matrix_det_b,
    ("character", "compare"): cmd_character_compare,
    ("generate", "witness"): cmd_generate_witness,
    ("generate", "check"): cmd_generate_check,
    ("probe", "submodule"): cmd_probe_submodule,
    ("sl2", "singular"): cmd_sl2_singular,
    ("sl2", "realization"): cmd_sl2_realization,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "mode_window", 0) < 0 or getattr(args, "degree", 0) < 0:
        print("error: windows and bounds must be nonnegative", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = COMMANDS[(args.group, args.command)](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = report.to_json() if args.report == "json" else report.to_text()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
