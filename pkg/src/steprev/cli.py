"""Command-line front end.

Every command prints one JSON document (or DOT text) on standard output
and exits with 0 when the property holds or the problem is solved, 1 when
it fails or is unsolvable, and 2 for usage, schema and limit errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import io
from .constructions import (
    add_direction_mutexes,
    check_split_reverse_net,
    combine_reversal,
    lift_to_mixed,
    mix2set_transform,
    normalize_reverse_arcs,
    split_reverse_with_read_arcs,
)
from .errors import (
    LimitExceeded,
    NoHomeState,
    NotASetSystem,
    NotCest,
    PreconditionFailed,
    SchemaError,
    SteprevError,
)
from .petri import DEFAULT_MAX_STATES, DEFAULT_MAX_STEP, build_crg
from .reversal import MODES, reverse
from .synthesis import decide_direct_reversibility_set, decide_mixed_reversibility, synthesize
from .sts import validate_cest

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
TRANSFORMS = ("mix2set", "combine", "normalize", "lift", "mutex", "splitrev")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="steprev", description="Reversibility tools for step transition systems and Petri nets.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def limits(p):
        p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
        p.add_argument("--max-step", type=int, default=DEFAULT_MAX_STEP)

    def output(p):
        p.add_argument("-o", "--output", help="write the resulting document here instead of embedding it")

    p = sub.add_parser("validate", help="check the CEST axioms")
    p.add_argument("sts")

    p = sub.add_parser("crg", help="concurrent reachability graph of a net")
    p.add_argument("net")
    limits(p)
    p.add_argument("--format", choices=("json", "dot"), default="json")

    p = sub.add_parser("reverse", help="reverse a CEST-system")
    p.add_argument("sts")
    p.add_argument("--mode", choices=MODES, required=True)

    p = sub.add_parser("synth", help="synthesise a net")
    p.add_argument("sts")
    output(p)

    p = sub.add_parser("decide-mixrev", help="decide solvability of the mixed reverse")
    p.add_argument("sts")
    p.add_argument("--home", nargs="+", help="states of a home cover")
    output(p)

    p = sub.add_parser("decide-rev-set", help="decide solvability of the direct reverse of a set system")
    p.add_argument("sts")
    output(p)

    p = sub.add_parser("transform", help="apply a net transformation")
    p.add_argument("net")
    p.add_argument("--op", choices=TRANSFORMS, required=True)
    p.add_argument("--sts", help="the forward system (mix2set, combine, lift, mutex)")
    p.add_argument("--backward", help="net for the reversed system (combine)")
    p.add_argument("--cover", nargs="+", help="home cover used for the backward net (combine)")
    p.add_argument("--k", type=int, help="step bound for mix2set")
    p.add_argument("--seq-policy", choices=("strict", "after-noidx"), default="after-noidx")
    limits(p)
    output(p)

    p = sub.add_parser("verify-splitrev", help="check a net with read arcs against a split reverse")
    p.add_argument("candidate")
    p.add_argument("--against", required=True)
    p.add_argument("--seq-policy", choices=("strict", "after-noidx"), default="after-noidx")
    limits(p)
    return parser


def _emit(out, doc) -> None:
    out.write(io.dumps(doc))


def _attach(doc: dict, key: str, artifact, path: str | None) -> dict:
    if artifact is None:
        return doc
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(io.serialize(artifact))
        doc[key + "File"] = path
    else:
        doc[key] = io.net_to_doc(artifact) if key == "net" else io.sts_to_doc(artifact)
    return doc


def _outcome(outcome, path) -> tuple[int, dict]:
    doc = _attach(outcome.to_json(), "net", outcome.net if outcome.solved else None, path)
    return (EXIT_OK if outcome.solved else EXIT_FAIL), doc


def _need(args, name: str):
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--op {args.op} requires --{name}")
    return value


def _transform(args):
    net = io.read_net(args.net)
    op = args.op
    if op == "normalize":
        out = normalize_reverse_arcs(net)
        return EXIT_OK, _attach({"ok": True}, "net", out, args.output)
    if op == "splitrev":
        report = split_reverse_with_read_arcs(net, args.max_states, args.max_step, seq_policy=args.seq_policy)
    else:
        sts = io.read_sts(_need(args, "sts"))
        if op == "mix2set":
            report = mix2set_transform(net, None, sts, k=args.k)
        elif op == "combine":
            backward = io.read_net(_need(args, "backward"))
            report = combine_reversal(net, None, backward, None, sts, args.cover)
        elif op == "lift":
            report = lift_to_mixed(net, sts)
        else:
            report = add_direction_mutexes(net, None, sts)
    doc = _attach(report.to_json(), "net", report.net, args.output)
    return (EXIT_OK if report.ok else EXIT_FAIL), doc


def run(args, out) -> int:
    cmd = args.command
    if cmd == "validate":
        report = validate_cest(io.read_sts(args.sts))
        code, doc = (EXIT_OK if report.ok else EXIT_FAIL), report.to_json()
    elif cmd == "crg":
        result = build_crg(io.read_net(args.net), args.max_states, args.max_step)
        if args.format == "dot":
            out.write(io.to_dot(result.sts, "crg"))
            return EXIT_OK
        code, doc = EXIT_OK, io.sts_to_doc(result.sts)
    elif cmd == "reverse":
        code, doc = EXIT_OK, io.sts_to_doc(reverse(io.read_sts(args.sts), args.mode))
    elif cmd == "synth":
        code, doc = _outcome(synthesize(io.read_sts(args.sts)), args.output)
    elif cmd == "decide-mixrev":
        code, doc = _outcome(decide_mixed_reversibility(io.read_sts(args.sts), args.home), args.output)
    elif cmd == "decide-rev-set":
        code, doc = _outcome(decide_direct_reversibility_set(io.read_sts(args.sts)), args.output)
    elif cmd == "transform":
        code, doc = _transform(args)
    else:
        verdict = check_split_reverse_net(
            io.read_net(args.candidate),
            io.read_net(args.against),
            args.seq_policy,
            max_states=args.max_states,
            max_step_size=args.max_step,
        )
        code, doc = (EXIT_OK if verdict.ok else EXIT_FAIL), verdict.to_json()
    _emit(out, doc)
    return code


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return run(args, out)
    except UsageError as exc:
        err.write(f"steprev: usage error: {exc}\n")
        return EXIT_ERROR
    except (SchemaError, LimitExceeded) as exc:
        _emit(out, {"error": type(exc).__name__, "message": str(exc)})
        return EXIT_ERROR
    except NotCest as exc:
        doc = {"error": "NotCest", "message": str(exc)}
        if exc.report is not None:
            doc["report"] = exc.report.to_json()
        _emit(out, doc)
        return EXIT_FAIL
    except PreconditionFailed as exc:
        doc = {"error": "PreconditionFailed", "clause": exc.clause, "message": str(exc)}
        if exc.witness is not None:
            doc["witness"] = exc.witness.to_json()
        _emit(out, doc)
        return EXIT_FAIL
    except (NoHomeState, NotASetSystem) as exc:
        _emit(out, {"error": type(exc).__name__, "message": str(exc)})
        return EXIT_FAIL
    except SteprevError as exc:
        # malformed arguments such as unknown states or actions
        _emit(out, {"error": type(exc).__name__, "message": str(exc)})
        return EXIT_ERROR
    except OSError as exc:
        err.write(f"steprev: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
