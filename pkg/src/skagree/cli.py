"""Command-line interface.

Subcommands: ``capacity`` (secret-key capacity of a model or network),
``protocol`` (compile and verify a complete-graph tree protocol),
``verify`` (seeded randomized identity campaigns), ``cmi`` (evaluate the
conditional multipartite information of an ad-hoc matrix).

Reports are JSON on stdout with exact rationals rendered as ``p/q``
strings; errors go to stderr.  Exit codes: 0 all checks pass, 1 a
verification failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction

from . import __version__
from . import pin as pinmod
from . import protocol as protomod
from .cmi import cmi_oracle
from .gf2 import BitMatrix, rank
from .partition import (
    FractionalPartition,
    canonical_lambda_star,
    solve_capacity,
)
from .sources import (
    ExactnessError,
    mask_from_terminals,
    pin_to_pmf,
    pmf_from_json_obj,
    subset_entropy,
    terminals_from_mask,
)
from .verify import SUITES, run_suite


class InputError(ValueError):
    """Unusable command input (bad file, bad combination of flags)."""


def _rat(value) -> str:
    return str(Fraction(value))


def _digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None


def _load_graph(path: str) -> pinmod.Graph:
    """Graph file: JSON {"vertices": m, "edges": [[u,v],...]} or a
    whitespace edge list, one "u v" pair per line."""
    try:
        obj = _load_json(path)
    except InputError:
        obj = None
    if obj is not None:
        try:
            return pinmod.Graph(int(obj["vertices"]), [tuple(e) for e in obj["edges"]])
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"{path}: malformed graph object: {e}") from None
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise InputError(f"{path}: line {lineno}: expected 'u v'")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise InputError(f"{path}: line {lineno}: non-integer endpoint") from None
    if not edges:
        raise InputError(f"{path}: no edges found")
    m = max(max(u, v) for u, v in edges)
    return pinmod.Graph(m, edges)


def _load_partition(path: str, m: int) -> FractionalPartition:
    obj = _load_json(path)
    try:
        weights = {
            mask_from_terminals(m, (int(t) for t in key.split(","))): Fraction(value)
            for key, value in obj["weights"].items()
        }
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{path}: malformed partition object: {e}") from None
    return FractionalPartition(m, weights)


def _partition_obj(partition: FractionalPartition) -> dict:
    return {
        ",".join(map(str, terminals_from_mask(mask))): _rat(w)
        for mask, w in partition.weights.items()
    }


def _resolve_pin_args(args) -> tuple[pinmod.Graph, dict]:
    if args.complete is not None:
        if args.complete < 2:
            raise InputError("--complete needs at least 2 terminals")
        return pinmod.Graph.complete(args.complete), {"complete": args.complete}
    graph = _load_graph(args.pin)
    return graph, {"pin": args.pin, "sha256": _digest(args.pin)}


def _emit(report: dict, human: bool) -> None:
    if human:
        for key, value in sorted(report.items()):
            if isinstance(value, dict):
                print(f"{key}:")
                for k2, v2 in sorted(value.items()):
                    print(f"  {k2} = {_humanize(v2)}")
            else:
                print(f"{key} = {_humanize(value)}")
    else:
        print(json.dumps(report, indent=2, sort_keys=True))


def _humanize(value):
    if isinstance(value, str) and "/" in value:
        try:
            return f"{value} ({float(Fraction(value)):.6f})"
        except ValueError:
            return value
    return value


def cmd_capacity(args) -> tuple[dict, bool]:
    report: dict = {"command": "capacity", "version": __version__}
    if args.model is not None:
        pmf = pmf_from_json_obj(_load_json(args.model))
        report["inputs"] = {"model": args.model, "sha256": _digest(args.model)}
        entropies = {}
        exact = True
        for mask in range(1 << pmf.m):
            try:
                entropies[mask] = subset_entropy(pmf, mask, exact=True)
            except ExactnessError:
                exact = False
                break
        if not exact:
            entropies = {
                mask: subset_entropy(pmf, mask) for mask in range(1 << pmf.m)
            }
        result = solve_capacity(entropies, pmf.m)
        lam, canonical = canonical_lambda_star(result, pmf.m)
        report.update(
            {
                "terminals": pmf.m,
                "capacity": _rat(result.capacity),
                "total_entropy": _rat(result.total_entropy),
                "lambda": _partition_obj(lam),
                "lambda_canonical": canonical,
                "exact": result.exact,
            }
        )
        return report, True

    graph, inputs = _resolve_pin_args(args)
    report["inputs"] = inputs
    pin = pinmod.build_pin(graph, 1)
    result = solve_capacity(pinmod.pin_subset_entropies(pin), graph.vertex_count)
    lam, canonical = canonical_lambda_star(result, graph.vertex_count)
    report.update(
        {
            "terminals": graph.vertex_count,
            "capacity": _rat(result.capacity),
            "total_entropy": _rat(result.total_entropy),
            "lambda": _partition_obj(lam),
            "lambda_canonical": canonical,
            "exact": result.exact,
            "omniscience_rate": _rat(pinmod.omniscience_rate(pin)),
            "packing_rate": _rat(pinmod.packing_rate(graph, args.n)),
        }
    )
    return report, True


def _transcript_obj(proto: pinmod.PinProtocol) -> dict:
    pin = proto.transcript.pin
    width = max(1, (pin.space.dimension + 3) // 4)
    return {
        "pin": {
            "vertices": pin.graph.vertex_count,
            "edges": [list(e) for e in pin.graph.edges],
            "n": pin.n,
        },
        "transmissions": [
            {"sender": sender, "row": format(row, f"0{width}x")}
            for sender, row in proto.transcript.transmissions
        ],
        "key": proto.key.to_hex(),
    }


def cmd_protocol(args) -> tuple[dict, bool]:
    if args.complete < 2:
        raise InputError("--complete needs at least 2 terminals")
    graph = pinmod.Graph.complete(args.complete)
    pin = pinmod.build_pin(graph, args.n)
    m, n = args.complete, args.n
    if (m * n) % 2:
        print(
            f"warning: {n}x complete graph on {m} terminals has odd total degree; "
            "the packing, and hence the key rate, is sub-maximal",
            file=sys.stderr,
        )
    packing = pinmod.pack_spanning_trees(pin)
    proto = pinmod.compile_tree_protocol(pin, packing)
    base = pinmod.build_pin(graph, 1)
    capacity = solve_capacity(
        pinmod.pin_subset_entropies(base), m
    ).capacity
    valid = protomod.validate_transcript(proto.transcript)
    omniscience = protomod.is_common_randomness(proto.cr, proto.transcript)
    recovery = protomod.is_common_randomness(proto.key, proto.transcript)
    sk = protomod.is_secret_key(proto.key, proto.transcript, capacity)
    ci = protomod.is_interactive_ci(proto.cr, proto.transcript)
    bound = protomod.communication_bound_report(proto.key, proto.transcript)
    margin = protomod.communication_entropy_margin(proto.transcript)
    verdicts = {
        "transcript_valid": valid.ok,
        "omniscience": omniscience.ok,
        "key_recovery": recovery.ok,
        "secret_key": sk.ok,
        "interactive_ci": ci.ok,
        "rate_bound_ok": bound.bound_ok,
    }
    report = {
        "command": "protocol",
        "version": __version__,
        "inputs": {"complete": m, "n": n},
        "trees": len(packing),
        "key_rate": _rat(proto.key_rate),
        "communication_bit_rate": _rat(proto.communication_bit_rate),
        "communication_rank_rate": _rat(proto.communication_rank_rate),
        "capacity": _rat(capacity),
        "leakage_bits": sk.leakage,
        "rate_lower_bound": _rat(bound.rate_lower_bound),
        "rate_bound_tight": bound.bound_tight,
        "entropy_margin": _rat(margin),
        "verdicts": verdicts,
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(_transcript_obj(proto), fh, indent=2, sort_keys=True)
            fh.write("\n")
        report["transcript_file"] = args.out
    return report, all(verdicts.values())


def cmd_verify(args) -> tuple[dict, bool]:
    result = run_suite(args.suite, args.trials, args.seed)
    report = {
        "command": "verify",
        "version": __version__,
        "suite": result.name,
        "trials": result.trials,
        "seed": args.seed,
        "violations": len(result.failures),
        "failed_trials": list(result.failures),
        "values": list(result.values),
    }
    return report, result.ok


def cmd_cmi(args) -> tuple[dict, bool]:
    graph, inputs = _resolve_pin_args(args)
    pin = pinmod.build_pin(graph, args.n)
    obj = _load_json(args.matrix)
    try:
        matrix = BitMatrix.from_hex(pin.space, obj["rows"])
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{args.matrix}: malformed matrix object: {e}") from None
    partition = None
    if args.partition:
        partition = _load_partition(args.partition, graph.vertex_count)
    report_obj = pinmod.cmi_rank(pin, matrix, partition)
    inputs["matrix"] = args.matrix
    inputs["matrix_sha256"] = _digest(args.matrix)
    report = {
        "command": "cmi",
        "version": __version__,
        "inputs": inputs,
        "n": args.n,
        "rank": rank(matrix),
        "cmi": _rat(report_obj.value),
        "lambda": _partition_obj(report_obj.lambda_used),
        "conditional_entropy": _rat(report_obj.conditional_entropy),
    }
    if graph.is_complete():
        report["cmi_floor"] = _rat(pinmod.cmi_rank_lower_bound(pin, matrix))
        report["incidence_margin"] = pinmod.incidence_rank_margin(pin, matrix)
    if args.oracle:
        pmf = pin_to_pmf(pin, cap=args.oracle_cap)
        oracle = cmi_oracle(
            pmf, pinmod.matrix_outcome_map(pin, matrix), report_obj.lambda_used
        )
        report["cmi_oracle"] = oracle.value
    return report, True


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skagree",
        description="Secret-key capacity, PIN models, and linear protocol checks.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    cap = sub.add_parser("capacity", help="secret-key capacity of a source")
    group = cap.add_mutually_exclusive_group(required=True)
    group.add_argument("--complete", type=int, metavar="M", help="complete graph on M terminals")
    group.add_argument("--pin", metavar="FILE", help="graph file (JSON or edge list)")
    group.add_argument("--model", metavar="FILE", help="explicit joint pmf (JSON)")
    cap.add_argument("-n", type=int, default=1, help="replication count for packing rate")
    cap.add_argument("--human", action="store_true", help="key = value output")
    cap.set_defaults(func=cmd_capacity)

    proto = sub.add_parser("protocol", help="compile and verify a tree protocol")
    proto.add_argument("--complete", type=int, required=True, metavar="M")
    proto.add_argument("-n", type=int, default=1, help="replication count")
    proto.add_argument("--out", metavar="FILE", help="write the transcript JSON here")
    proto.add_argument("--human", action="store_true")
    proto.set_defaults(func=cmd_protocol)

    ver = sub.add_parser("verify", help="run a randomized identity campaign")
    ver.add_argument("--suite", required=True, choices=sorted(SUITES))
    ver.add_argument("--trials", type=int, default=100)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--human", action="store_true")
    ver.set_defaults(func=cmd_verify)

    cm = sub.add_parser("cmi", help="evaluate an ad-hoc revealed matrix")
    group = cm.add_mutually_exclusive_group(required=True)
    group.add_argument("--complete", type=int, metavar="M")
    group.add_argument("--pin", metavar="FILE")
    cm.add_argument("-n", type=int, default=1)
    cm.add_argument("--matrix", required=True, metavar="FILE", help='JSON {"rows": [hex,...]}')
    cm.add_argument("--partition", metavar="FILE", help="fractional partition JSON")
    cm.add_argument("--oracle", action="store_true", help="cross-check by enumeration")
    cm.add_argument("--oracle-cap", type=int, default=20)
    cm.add_argument("--human", action="store_true")
    cm.set_defaults(func=cmd_cmi)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        report, ok = args.func(args)
    except (InputError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    _emit(report, getattr(args, "human", False))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
