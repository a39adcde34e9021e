"""Command-line entry point.

Exit codes: 0 success (or feasible), 1 certificate rejected by ``verify``,
2 dual evidence, 3 undecided, 64 usage error, 65 malformed input,
70 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction

import numpy as np

from . import certkit, mateval
from .config import DEFAULT_SOLVER, DEFAULT_TOLERANCES, default_seed
from .ncpoly import (NcPoly, NotCyclicallyZero, commutator_decomposition, cyc_equiv, cyclic_classes,
                     polarize_step, resubstitute)
from .parsing import ParseError, format_poly, format_word, parse

EX_OK, EX_REJECTED, EX_DUAL, EX_UNDECIDED = 0, 1, 2, 3
EX_USAGE, EX_DATAERR, EX_SOFTWARE = 64, 65, 70


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(human)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _load_json(path: str) -> dict:
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _poly(text: str, n: int | None = None) -> NcPoly:
    return parse(text.strip(), n)


def _poly_arg(args) -> NcPoly:
    text = getattr(args, "poly", None)
    path = getattr(args, "poly_file", None)
    if path:
        text = _read(path)
    elif text is not None and os.path.isfile(text):
        text = _read(text)
    if text is None:
        raise UsageError("a polynomial is required (--poly or --poly-file)")
    return _poly(text, args.n)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a rational number: {text!r}") from exc


def _seed(args) -> int:
    return default_seed() if args.seed is None else args.seed


def _tuple_arg(path: str) -> mateval.MatTuple:
    try:
        return mateval.MatTuple.from_dict(_load_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: not a matrix tuple ({exc})") from exc


# subcommands


def cmd_canon(args) -> int:
    f = _poly_arg(args)
    classes = sorted(cyclic_classes(f).items(), key=lambda t: (len(t[0]), t[0]))
    payload = {"n": f.n, "classes": {format_word(w): certkit._frac_str(c) for w, c in classes}}
    human = format_poly(NcPoly(f.n, dict(classes))) if classes else "0"
    _emit(args, payload, human)
    return EX_OK


def cmd_cyceq(args) -> int:
    f, g = _poly(args.f), _poly(args.g)
    n = max(f.n, g.n)
    eq = cyc_equiv(f.with_n(n), g.with_n(n))
    _emit(args, {"equivalent": eq}, "equivalent" if eq else "not equivalent")
    return EX_OK


def cmd_decompose(args) -> int:
    f = _poly(args.f, args.n)
    try:
        pairs = commutator_decomposition(f)
    except NotCyclicallyZero as exc:
        residue = NcPoly(f.n, exc.residue)
        _emit(args, {"cyclically_zero": False, "residue": format_poly(residue)},
              f"not cyclically zero; residue {format_poly(residue)}")
        return EX_OK
    payload = {"cyclically_zero": True,
               "commutators": [{"p": format_poly(p), "q": format_poly(q)} for p, q in pairs]}
    human = "\n".join(f"[{format_poly(p)}, {format_poly(q)}]" for p, q in pairs) or "0"
    _emit(args, payload, human)
    return EX_OK


def cmd_falsify(args) -> int:
    f = _poly_arg(args)
    w = mateval.falsify_trace_nonneg(f, max_size=args.size, trials=args.trials, rng_seed=_seed(args))
    if w is None:
        _emit(args, {"witness": None}, "no witness found")
        return EX_OK
    value = w.normalized_trace if args.normalized else w.trace
    label = "normalized trace" if args.normalized else "trace"
    _emit(args, {"witness": w.to_dict(), "value": value, "normalized": args.normalized},
          f"witness of size {w.tuple.s} with {label} {value:.12g}")
    return EX_OK


def cmd_psd_check(args) -> int:
    f = _poly_arg(args)
    A = _tuple_arg(args.tuple)
    if A.n < f.n:
        raise UsageError(f"tuple has {A.n} matrices, polynomial uses {f.n} variables")
    f = f.with_n(A.n)
    M = mateval.evaluate(f, A)
    eig = float(np.linalg.eigvalsh((M + M.T) / 2).min())
    psd = mateval.psd_check(f, A)
    trace = mateval.trace_value(f, A, normalized=args.normalized)
    _emit(args, {"psd": psd, "min_eigenvalue": eig, "trace": trace, "value": M.tolist()},
          f"{'PSD' if psd else 'not PSD'}; least eigenvalue {eig:.12g}; trace {trace:.12g}")
    return EX_OK


def cmd_certify(args) -> int:
    from .tsos import certify
    from .tsos.dual import TracialFunctional

    f = _poly_arg(args)
    eps = _fraction(args.eps)
    if eps < 0:
        raise UsageError("epsilon must be nonnegative")
    report = certify(f, eps, args.kmax, DEFAULT_SOLVER, fast_path=args.fast_path,
                     tol=DEFAULT_TOLERANCES, seed=_seed(args))
    if report.certificate is not None:
        c = report.certificate
        _emit(args, certkit.certificate_to_dict(c),
              f"feasible at level {report.level}: {len(c.terms)} terms, {len(c.commutators)} commutators"
              + (f" ({report.note})" if report.note else ""))
    elif isinstance(report.functional, TracialFunctional):
        L = report.functional
        _emit(args, L.to_dict(),
              f"infeasible at level {L.k}: separating functional with L(f + eps) = {L(f + eps):.6g}")
    else:
        _emit(args, {"status": report.status, "level": report.level, "note": report.note},
              f"undecided up to level {args.kmax}" + (f" ({report.note})" if report.note else ""))
    return report.exit_code


def cmd_verify(args) -> int:
    try:
        c = certkit.certificate_from_dict(_load_json(args.file))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.file}: not a certificate ({exc})") from exc
    report = certkit.verify(c)
    _emit(args, {"ok": report.ok, "problems": list(report.problems),
                 "mismatches": {format_word(w): certkit._frac_str(v) for w, v in report.mismatches.items()}},
          report.describe())
    return EX_OK if report.ok else EX_REJECTED


def cmd_lift_putinar(args) -> int:
    try:
        cc = certkit.commutative_certificate_from_dict(_load_json(args.file))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.file}: not a commutative certificate ({exc})") from exc
    if not certkit.verify_commutative(cc):
        raise InputError("the commutative certificate does not verify")
    c = certkit.putinar_lift(cc)
    return _emit_certificate(args, c)


def _emit_certificate(args, c: certkit.Certificate) -> int:
    report = certkit.verify(c)
    if not report.ok:
        raise RuntimeError(f"builder produced an invalid certificate: {report.describe()}")
    lhs = format_poly(c.target) + (f" + {c.epsilon}" if c.epsilon else "")
    _emit(args, certkit.certificate_to_dict(c),
          f"{lhs}: {len(c.terms)} terms, "
          f"{len(c.commutators)} commutators, level {c.level}; verified")
    return EX_OK


def cmd_example42(args) -> int:
    if args.m < 2:
        raise UsageError("m must be at least 2")
    return _emit_certificate(args, certkit.example42(args.m))


def cmd_motzkin(args) -> int:
    eps = _fraction(args.eps)
    if eps <= 0:
        raise UsageError("epsilon must be positive")
    return _emit_certificate(args, certkit.motzkin_decomposition(eps))


def cmd_bound_cert(args) -> int:
    w = _poly(args.word, args.n)
    if len(w.coeffs) != 1 or next(iter(w.coeffs.values())) != 1:
        raise UsageError("--word must be a single monomial")
    word = next(iter(w.coeffs))
    sign = 1 if args.sign == "+" else -1
    return _emit_certificate(args, certkit.word_bound_certificate(word, sign, w.n))


def cmd_moments(args) -> int:
    if args.tuple:
        A = _tuple_arg(args.tuple)
    else:
        A = mateval.sample_contraction_tuple(args.n or 2, args.size, _seed(args))
    table = mateval.moment_table(A, args.k)
    human = "\n".join(f"{format_word(w)}\t{v:.12g}" for w, v in table.values.items())
    _emit(args, table.to_dict(), human)
    return EX_OK


def cmd_gns(args) -> int:
    data = _load_json(args.moments)
    try:
        if "level" in data:
            from .tsos.dual import TracialFunctional

            L = TracialFunctional.from_dict(data, int(data.get("n", args.n or 2)))
        else:
            L = mateval.MomentTable.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.moments}: not a moment table ({exc})") from exc
    try:
        model = mateval.gns_truncated(L, args.k, L.n)
    except mateval.IndefiniteMoments as exc:
        raise InputError(str(exc)) from exc
    payload = {"dimension": model.dimension, "kernel_dim": model.kernel_dim, "defect": model.defect,
               "tuple": model.as_tuple().to_dict(), "vector": model.vector.tolist()}
    _emit(args, payload, f"GNS model of dimension {model.dimension} (kernel {model.kernel_dim}); "
                         f"max moment defect {model.defect:.3e}")
    return EX_OK


def cmd_polarize(args) -> int:
    f = _poly_arg(args)
    g = polarize_step(f, args.var, args.degree)
    back = resubstitute(g, args.var, args.degree)
    if back != f.with_n(back.n):
        raise RuntimeError("polarization does not resubstitute to the input")
    _emit(args, {"polarized": format_poly(g), "n": g.n}, format_poly(g))
    return EX_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tracecert", description="Trace positivity of noncommutative polynomials.")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_text, poly=False):
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--json", action="store_true", help="emit JSON")
        sp.add_argument("--n", type=int, default=None, help="number of variables (default: inferred)")
        if poly:
            sp.add_argument("--poly", help="polynomial text, or a file holding it")
            sp.add_argument("--poly-file", help="file holding the polynomial")
        sp.set_defaults(func=fn)
        return sp

    add("canon", cmd_canon, "cyclic canonical form: summed coefficients per rotation class", poly=True)
    sp = add("cyceq", cmd_cyceq, "decide cyclic equivalence of two polynomials")
    sp.add_argument("f")
    sp.add_argument("g")
    sp = add("decompose", cmd_decompose, "write a cyclically zero polynomial as a sum of commutators")
    sp.add_argument("f")
    sp = add("falsify", cmd_falsify, "search contraction tuples for a negative trace", poly=True)
    sp.add_argument("--size", type=int, default=4, help="largest matrix size")
    sp.add_argument("--trials", type=int, default=100, help="random draws per size")
    sp.add_argument("--seed", type=int, default=None, help="RNG seed (default: $TRACECERT_SEED or 0)")
    sp.add_argument("--normalized", action="store_true", help="report the normalized trace")
    sp = add("psd-check", cmd_psd_check, "evaluate a symmetric polynomial at a matrix tuple", poly=True)
    sp.add_argument("--tuple", required=True, help="matrix tuple JSON file")
    sp.add_argument("--normalized", action="store_true", help="report the normalized trace")
    sp = add("certify", cmd_certify, "search for an exact certificate of trace positivity of f + eps", poly=True)
    sp.add_argument("--eps", required=True, help="rational epsilon, e.g. 1/10")
    sp.add_argument("--kmax", type=int, default=6, help="largest level tried")
    sp.add_argument("--fast-path", choices=["auto", "on", "off"], default="auto",
                    help="commutative route for cyclically sorted inputs in two variables")
    sp.add_argument("--seed", type=int, default=None, help="RNG seed (default: $TRACECERT_SEED or 0)")
    sp = add("verify", cmd_verify, "check a certificate JSON file exactly")
    sp.add_argument("file")
    sp = add("lift-putinar", cmd_lift_putinar, "lift a commutative certificate through sorted words")
    sp.add_argument("file")
    sp = add("example42", cmd_example42, "certificate for (1-X^2)(1-Y^2) + 1/m")
    sp.add_argument("--m", type=int, required=True)
    sp = add("motzkin", cmd_motzkin, "certificate for the sorted Motzkin polynomial plus eps")
    sp.add_argument("--eps", default="1/4")
    sp = add("bound-cert", cmd_bound_cert, "certificate for 2 - s(w + w*) for a word w and s = +1 or -1")
    sp.add_argument("--word", required=True, help="a monomial, e.g. X1*X2^2")
    sp.add_argument("--sign", choices=["+", "-"], default="+")
    sp = add("moments", cmd_moments, "normalized trace moments of a matrix tuple")
    sp.add_argument("--tuple", help="matrix tuple JSON file (default: a random contraction tuple)")
    sp.add_argument("--k", type=int, default=2, help="largest word length")
    sp.add_argument("--size", type=int, default=4, help="matrix size of the random tuple")
    sp.add_argument("--seed", type=int, default=None, help="RNG seed (default: $TRACECERT_SEED or 0)")
    sp = add("gns", cmd_gns, "truncated GNS model from a moment table or functional JSON")
    sp.add_argument("--moments", required=True, help="JSON from `moments` or `certify`")
    sp.add_argument("--k", type=int, required=True, help="level; the input must cover length 2k")
    sp = add("polarize", cmd_polarize, "split the degree-k variable X_i into a fresh variable", poly=True)
    sp.add_argument("--var", type=int, required=True)
    sp.add_argument("--degree", type=int, required=True)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EX_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EX_DATAERR
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EX_DATAERR
    except (UsageError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EX_SOFTWARE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
