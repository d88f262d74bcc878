"""Command-line entry point: ``qmult <command> QUIVER.json [...]``.

Every command prints one JSON object with sorted keys and a ``schema``
field.  Exit status is 0 on success, 2 on domain errors and 1 on parse or
I/O errors.  Wall-clock timing is only included with ``--timing``, as a
separate top-level field.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from pathlib import Path
from typing import Sequence

from . import census, grading, quiver, rep, stability, stabilizers, symplectic, unfold
from .errors import DomainError, ParseError, QmultError
from .fields import parse_field
from .serialize import (
    load_json,
    load_quiver,
    parse_classical,
    parse_cotangent,
    parse_group,
    parse_point,
)


def parse_vector(Q: quiver.QuiverWithMult, text: str | None, name: str) -> dict | None:
    """Comma list in vertex order, or a JSON object keyed by vertex."""
    if text is None:
        return None
    text = text.strip()
    try:
        if text.startswith("{"):
            raw = json.loads(text)
        else:
            raw = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ParseError(f"bad {name} vector {text!r}") from exc
    return quiver.as_vector(Q, raw, name)


def _need(value, flag: str):
    if value is None:
        raise ParseError(f"{flag} is required for this command")
    return value


# commands ----------------------------------------------------------------------


def cmd_constants(args, Q, F) -> dict:
    return quiver.derived_constants(Q).to_dict()


def cmd_euler(args, Q, F) -> dict:
    r = _need(parse_vector(Q, args.rank, "rank"), "--rank")
    s = parse_vector(Q, args.s, "s") or r
    return {"r": r, "s": s, "euler": quiver.euler_form(Q, r, s)}


def cmd_truncate(args, Q, F) -> dict:
    x = parse_point(Q, F, load_json(_need(args.input, "INPUT")))
    return {"classical": rep.classical_dict(rep.truncate(x))}


def cmd_iota(args, Q, F) -> dict:
    v = parse_classical(Q, F, load_json(_need(args.input, "INPUT")))
    return {"point": rep.point_dict(rep.section_iota(v, Q))}


def cmd_act(args, Q, F) -> dict:
    g = parse_group(Q, F, load_json(_need(args.group, "--group")))
    x = parse_point(Q, F, load_json(_need(args.input, "INPUT")))
    return {"point": rep.point_dict(rep.act(g, x))}


def cmd_stability(args, Q, F) -> dict:
    x = parse_point(Q, F, load_json(_need(args.input, "INPUT")))
    theta = _need(parse_vector(Q, args.theta, "theta"), "--theta")
    rho = parse_vector(Q, args.rho, "rho")
    out = stability.semistable_mult(x, theta, rho, args.guard).to_dict()
    if args.oracle:
        out["oracle"] = stability.semistable_direct_oracle(x, theta, rho).to_dict()
    return out


def cmd_polystable(args, Q, F) -> dict:
    x = parse_point(Q, F, load_json(_need(args.input, "INPUT")))
    theta = _need(parse_vector(Q, args.theta, "theta"), "--theta")
    rho = parse_vector(Q, args.rho, "rho")
    jh = stability.jh_filtration(x, theta, rho, args.guard)
    return {
        "polystable": stability.polystable(x, theta, rho, args.guard),
        "jh_factors": [rep.point_dict(f) for f in jh.factors],
        "graded": rep.point_dict(jh.graded),
    }


def cmd_framed(args, Q, F) -> dict:
    framing = _need(parse_vector(Q, args.framing, "framing"), "--framing")
    r = _need(parse_vector(Q, args.rank, "rank"), "--rank")
    theta = parse_vector(Q, args.theta, "theta") or {i: 0 for i in Q.vertices}
    fr = quiver.build_framed(Q, framing, r, args.m_inf)
    out = {"quiver": fr.quiver.to_dict(), "rank": fr.rank, "theta_hat": fr.theta_hat(theta), "framing_vertex": fr.inf}
    if F.is_finite:
        out["census"] = census.count_framed(Q, framing, r, theta, F, args.m_inf, guard=args.guard).to_dict()
    return out


def cmd_stabilizers(args, Q, F) -> dict:
    v = parse_classical(Q, F, load_json(_need(args.input, "INPUT")))
    out = stabilizers.unip_stab(v, Q)
    out["levels"] = [lev.to_dict() for lev in stabilizers.admissible_levels(Q)]
    return out


def cmd_assumption_u(args, Q, F) -> dict:
    r = _need(parse_vector(Q, args.rank, "rank"), "--rank")
    theta = _need(parse_vector(Q, args.theta, "theta"), "--theta")
    out = stabilizers.check_assumption_U(Q, r, theta, F, args.guard)
    out["sufficient_conditions"] = stabilizers.sufficient_conditions(Q, r, theta, F, args.guard)
    return out


def cmd_moment(args, Q, F) -> dict:
    p = parse_cotangent(Q, F, load_json(_need(args.input, "INPUT")))
    mu = symplectic.moment_map(p)
    return {"moment": mu.to_dict(), "in_gl0": symplectic.in_gl0(mu)}


def cmd_fiber(args, Q, F) -> dict:
    x = parse_point(Q, F, load_json(_need(args.input, "INPUT")))
    gamma = symplectic.parse_gamma(Q, x.r, F, json.loads(args.gamma) if args.gamma else None)
    return symplectic.moment_fiber_solve(x, gamma).to_dict()


def _alpha(args, Q) -> dict:
    return parse_vector(Q, args.alpha, "alpha") or quiver.canonical_alpha(Q)


def cmd_grading_weights(args, Q, F) -> dict:
    kind, C = grading.parse_grading(args.grading)
    alpha = _alpha(args, Q)
    p = grading.make_params(Q, alpha)
    table = grading.weight_table(Q, None, p)
    out = {
        "params": p.to_dict(),
        "valid": grading.is_valid(Q, p),
        "violation": grading.line_violation(Q, p),
        "weights": [
            {"arrow": k[0], "m": k[1], "f1": k[2], "f2": k[3], "weight": w} for k, w in sorted(table.items())
        ],
    }
    if kind == "revised":
        beta = symplectic.revised_beta(Q, alpha, C)
        out["revised"] = symplectic.equivariance_weights(Q, alpha, beta, C)
    return out


def cmd_limit(args, Q, F) -> dict:
    x = parse_point(Q, F, load_json(_need(args.input, "INPUT")))
    p = grading.make_params(Q, _alpha(args, Q))
    return {"limit": rep.classical_dict(grading.limit_zero(x, p))}


def cmd_unfold(args, Q, F) -> dict:
    out = {
        "quiver": quiver.unfolded_quiver(Q).to_dict(),
        "correspondence": unfold.correspondence(Q),
        "formal_exponents": [
            {"arrow": k[0], "m": k[1], "f1": k[2], "f2": k[3], "exponent": e}
            for k, e in sorted(unfold.formal_exponents(Q).items())
        ],
        "lossless": unfold.is_injective_on(Q),
    }
    if args.input:
        zeta = unfold.primitive_root(Q.M, F)
        x = parse_point(Q, F, load_json(args.input))
        out["root"] = zeta.to_dict()
        out["point"] = rep.point_dict(unfold.unfold_embed(x, zeta))
    return out


def cmd_census(args, Q, F) -> dict:
    r = _need(parse_vector(Q, args.rank, "rank"), "--rank")
    theta = _need(parse_vector(Q, args.theta, "theta"), "--theta")
    rho = parse_vector(Q, args.rho, "rho")
    fields = [parse_field(f"Fp:{q}") for q in args.q_list.split(",")] if args.q_list else [F]
    reports = []
    for Fq in fields:
        gamma = None
        if args.mode == "nakajima" and args.gamma:
            gamma = symplectic.parse_gamma(Q, r, Fq, json.loads(args.gamma))
        rep_ = census.count_semistable(
            Q,
            r,
            theta,
            rho,
            Fq,
            mode=args.mode,
            gamma=gamma,
            method=args.method,
            guard=args.guard,
            workers=args.workers,
            checkpoint=args.checkpoint,
        )
        reports.append(rep_.to_dict())
    if len(reports) == 1:
        return reports[0]
    return {"reports": reports}


def cmd_fit(args, Q, F) -> dict:
    pts = []
    for item in _need(args.points, "--points").split(","):
        try:
            q, c = item.split(":")
            pts.append((int(q), int(c)))
        except ValueError as exc:
            raise ParseError(f"bad point {item!r}; expected q:count") from exc
    return census.poly_fit(pts, args.degree).to_dict()


COMMANDS = {
    "constants": cmd_constants,
    "euler": cmd_euler,
    "truncate": cmd_truncate,
    "iota": cmd_iota,
    "act": cmd_act,
    "stability": cmd_stability,
    "polystable": cmd_polystable,
    "framed": cmd_framed,
    "stabilizers": cmd_stabilizers,
    "assumption-u": cmd_assumption_u,
    "moment": cmd_moment,
    "fiber": cmd_fiber,
    "grading-weights": cmd_grading_weights,
    "limit": cmd_limit,
    "unfold": cmd_unfold,
    "census": cmd_census,
    "fit": cmd_fit,
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags, which would read as a domain error
    def error(self, message: str):
        raise ParseError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qmult", description="Representations of quivers with multiplicities.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("quiver", nargs="?", help="quiver JSON file (not needed for 'fit')")
    ap.add_argument("input", nargs="?", help="point, classical representation or cotangent JSON")
    ap.add_argument("--field", default="Fp:2", help="'Q' or 'Fp:<p>'")
    ap.add_argument("--rank", help="rank vector, e.g. 1,1")
    ap.add_argument("--s", help="second rank vector for 'euler'")
    ap.add_argument("--theta")
    ap.add_argument("--rho")
    ap.add_argument("--gamma", help='JSON {vertex: [coefficients]}')
    ap.add_argument("--alpha")
    ap.add_argument("--grading", default="default", help="'default' or 'revised:C'")
    ap.add_argument("--group", help="group element JSON for 'act'")
    ap.add_argument("--framing")
    ap.add_argument("--m-inf", type=int, default=1, dest="m_inf")
    ap.add_argument("--mode", choices=census.MODES, default="ordinary")
    ap.add_argument("--method", choices=census.METHODS, default="auto")
    ap.add_argument("--q-list", dest="q_list", help="comma-separated primes")
    ap.add_argument("--points", help="q:count pairs for 'fit'")
    ap.add_argument("--degree", type=int, default=8)
    ap.add_argument("--guard", type=int, default=None)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--checkpoint", help="resumable census cursor file")
    ap.add_argument("--oracle", action="store_true", help="also run the definition-level check")
    ap.add_argument("--timing", action="store_true")
    ap.add_argument("--out", help="write the report here instead of stdout")
    return ap


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--theta -1,1`` into ``--theta=-1,1`` so argparse does not read a flag."""
    out: list[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and re.fullmatch(r"-\d[\d,\s-]*", tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv: Sequence[str] | None = None) -> tuple[int, dict]:
    """Execute one command; returns the exit code and the report."""
    ap = build_parser()
    argv = _glue_negative_values(sys.argv[1:] if argv is None else argv)
    try:
        args = ap.parse_intermixed_args(argv)
    except ParseError as exc:
        return 1, {"error": "ParseError", "message": str(exc), "schema": "qmult.usage/1"}
    if args.guard is None:
        args.guard = census.default_guard()
    start = time.perf_counter()
    try:
        F = parse_field(args.field)
        Q = load_quiver(args.quiver) if args.quiver else None
        if Q is None and args.command != "fit":
            raise ParseError("a quiver file is required")
        body = COMMANDS[args.command](args, Q, F)
        code = 0
    except DomainError as exc:
        body, code = {"error": type(exc).__name__, "message": str(exc)}, 2
    except (ParseError, OSError) as exc:
        body, code = {"error": type(exc).__name__, "message": str(exc)}, 1
    except QmultError as exc:  # pragma: no cover
        body, code = {"error": type(exc).__name__, "message": str(exc)}, 1
    body["schema"] = f"qmult.{args.command}/1"
    if args.timing:
        body["timing_seconds"] = round(time.perf_counter() - start, 6)
    return code, body


def main(argv: Sequence[str] | None = None) -> int:
    argv = _glue_negative_values(sys.argv[1:] if argv is None else argv)
    code, body = run(argv)
    text = json.dumps(body, sort_keys=True, indent=2) + "\n"
    try:
        out = build_parser().parse_intermixed_args(argv).out
    except ParseError:
        out = None
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            sys.stderr.write(f"qmult: cannot write {out}: {exc}\n")
            return 1
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
