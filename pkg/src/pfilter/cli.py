"""Command-line front end.

Subcommands:
  run           apply a procedure to p-values and partitions from files
  simulate      run the Monte-Carlo benchmark designs, write a CSV table
  oracle-check  cross-check the filter against the brute-force oracle

Exit codes: 0 ok, 1 check failure, 2 malformed input or bad flags,
3 partition-validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .classic import bh_khat, bh_reject, group_simes_bh, simes
from .comparators import bb_procedure
from .core import Layer, MultiLayerProblem, as_pvalues, validate_layer
from .engine import (
    DiscoveryReport,
    ThresholdVector,
    brute_force_pfilter,
    pfilter,
    random_problem,
)
from .simulate import run_trials

__all__ = [
    "main",
    "parse_pvalue_file",
    "parse_layer_file",
    "report_to_dict",
    "report_from_dict",
    "oracle_check",
]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_VALIDATION = 3

_LAYER_COLUMNS = {"grouped": ("hypotheses", "groups"), "grid": ("entries", "rows", "columns")}


class InputError(Exception):
    """Malformed input file; the message carries file/line context."""


class PartitionError(Exception):
    def __init__(self, path: str, violations: list[str]):
        super().__init__(f"{path}: invalid partition")
        self.path = path
        self.violations = violations


def _split_record(line: str) -> list[str]:
    if "," in line:
        return [f.strip() for f in line.split(",")]
    return line.split()


def _read_records(path: str, n_fields: int) -> list[tuple[int, list[str]]]:
    """(line number, fields) for each data line; a non-numeric first line is
    treated as a header and skipped."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    records = []
    first_data = True
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = _split_record(line)
        if first_data:
            first_data = False
            try:
                int(fields[0])
            except ValueError:
                continue  # header row
        if len(fields) != n_fields:
            raise InputError(
                f"{path}:{lineno}: expected {n_fields} fields, got {len(fields)}"
            )
        records.append((lineno, fields))
    if not records:
        raise InputError(f"{path}: no data records")
    return records


def parse_pvalue_file(path: str) -> np.ndarray:
    """Read (id, p) records; ids must be exactly 1..n. Returns p in id order."""
    records = _read_records(path, 2)
    entries = []
    for lineno, (id_field, p_field) in records:
        try:
            ident = int(id_field)
        except ValueError:
            raise InputError(f"{path}:{lineno}: id {id_field!r} is not an integer")
        try:
            pval = float(p_field)
        except ValueError:
            raise InputError(f"{path}:{lineno}: p-value {p_field!r} is not a number")
        entries.append((ident, pval, lineno))
    entries.sort()
    n = len(entries)
    ids = [e[0] for e in entries]
    if ids != list(range(1, n + 1)):
        for rank, (ident, _, lineno) in enumerate(entries, start=1):
            if ident != rank:
                raise InputError(
                    f"{path}:{lineno}: ids must be exactly 1..{n} (saw {ident})"
                )
    p = np.array([e[1] for e in entries])
    try:
        return as_pvalues(p)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}")


def parse_layer_file(path: str, n: int) -> tuple[Layer, list[str]]:
    """Read (id, group_label) records and build a layer over 1..n.

    Labels are arbitrary strings, mapped to group indices by first
    appearance in id order. Raises PartitionError when the records do not
    form an exact partition (duplicate or missing ids included).
    """
    records = _read_records(path, 2)
    pairs = []
    for lineno, (id_field, label) in records:
        try:
            ident = int(id_field)
        except ValueError:
            raise InputError(f"{path}:{lineno}: id {id_field!r} is not an integer")
        pairs.append((ident, label))
    pairs.sort(key=lambda t: t[0])
    label_order: dict[str, int] = {}
    groups: list[list[int]] = []
    labels: list[str] = []
    for ident, label in pairs:
        g = label_order.get(label)
        if g is None:
            g = len(groups)
            label_order[label] = g
            groups.append([])
            labels.append(label)
        groups[g].append(ident)
    violations = validate_layer(groups, n)
    if violations:
        raise PartitionError(path, violations)
    return Layer(groups, n), labels


def report_to_dict(
    report: DiscoveryReport,
    layers: tuple[Layer, ...],
    alphas: tuple[float, ...],
    layer_labels: list[list[str]],
) -> dict:
    """JSON-ready view of a report; floats survive a round-trip exactly."""
    return {
        "method": "pfilter",
        "n": layers[0].n,
        "alphas": list(alphas),
        "layer_sizes": [layer.G for layer in layers],
        "thresholds": [
            {"index": k, "of": layer.G, "value": v}
            for k, v, layer in zip(
                report.thresholds.indices, report.thresholds.values, layers
            )
        ],
        "selected": sorted(report.selected),
        "layer_selected": [
            {
                "indices": sorted(sel),
                "labels": [layer_labels[mi][g - 1] for g in sorted(sel)],
            }
            for mi, sel in enumerate(report.layer_selected)
        ],
        "estimated_fdps": list(report.estimated_fdps),
        "passes": report.passes,
        "trace": [list(t) for t in report.trace],
    }


def report_from_dict(obj: dict) -> DiscoveryReport:
    """Rebuild the in-memory report from its JSON form."""
    return DiscoveryReport(
        thresholds=ThresholdVector(
            values=tuple(float(t["value"]) for t in obj["thresholds"]),
            indices=tuple(int(t["index"]) for t in obj["thresholds"]),
        ),
        selected=frozenset(obj["selected"]),
        layer_selected=tuple(
            frozenset(entry["indices"]) for entry in obj["layer_selected"]
        ),
        estimated_fdps=tuple(float(x) for x in obj["estimated_fdps"]),
        passes=int(obj["passes"]),
        trace=tuple(tuple(int(k) for k in row) for row in obj["trace"]),
    )


def _write_output(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _usage_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INPUT


def cmd_run(args) -> int:
    try:
        p = parse_pvalue_file(args.pvalues)
        layers = []
        labels = []
        for path in args.layer:
            layer, lab = parse_layer_file(path, p.size)
            layers.append(layer)
            labels.append(lab)
    except InputError as exc:
        return _usage_error(str(exc))
    except PartitionError as exc:
        print(f"error: {exc.path}: partition is invalid:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return EXIT_VALIDATION

    alphas = tuple(args.alpha or [])
    method = args.method
    if method == "pfilter":
        if not layers or len(layers) != len(alphas):
            return _usage_error(
                f"pfilter needs one --alpha per --layer (got {len(layers)} layers, "
                f"{len(alphas)} alphas)"
            )
        report = pfilter(MultiLayerProblem(p, tuple(layers), alphas))
        payload = report_to_dict(report, tuple(layers), alphas, labels)
    elif method == "bh":
        if len(alphas) != 1 or layers:
            return _usage_error("bh takes exactly one --alpha and no --layer")
        khat = bh_khat(p, alphas[0])
        payload = {
            "method": "bh",
            "n": int(p.size),
            "alpha": alphas[0],
            "khat": khat,
            "threshold": alphas[0] * khat / p.size,
            "selected": sorted(bh_reject(p, alphas[0])),
        }
    elif method == "simes":
        if alphas or layers:
            return _usage_error("simes takes no --alpha and no --layer")
        payload = {"method": "simes", "n": int(p.size), "simes": simes(p)}
    elif method == "group-bh":
        if len(layers) != 1 or len(alphas) != 1:
            return _usage_error("group-bh takes exactly one --layer and one --alpha")
        sel = group_simes_bh(p, layers[0], alphas[0])
        payload = {
            "method": "group-bh",
            "n": int(p.size),
            "alpha": alphas[0],
            "selected_groups": sorted(sel),
            "selected_labels": [labels[0][g - 1] for g in sorted(sel)],
        }
    elif method == "bb":
        if len(layers) != 1 or len(alphas) != 2:
            return _usage_error(
                "bb takes exactly one --layer and two --alpha values "
                "(group level first, then overall)"
            )
        rep = bb_procedure(p, layers[0], alphas[0], alphas[1])
        payload = {
            "method": "bb",
            "n": int(p.size),
            "alpha_grp": alphas[0],
            "alpha_ov": alphas[1],
            "selected_groups": sorted(rep.selected_groups),
            "within": {str(g): sorted(rep.within[g]) for g in sorted(rep.within)},
        }
    else:  # pragma: no cover - argparse restricts choices
        return _usage_error(f"unknown method {method!r}")

    _write_output(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    layer_names = _LAYER_COLUMNS[args.design]
    alphas = tuple(args.alpha) if args.alpha else (0.2,) * len(layer_names)
    if len(alphas) != len(layer_names):
        return _usage_error(
            f"design {args.design!r} has {len(layer_names)} layers; "
            f"got {len(alphas)} --alpha values"
        )
    methods = args.method or ["pfilter", "bh", "bb"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "design", "method", "layer", "mu", "alpha", "trials",
            "mean_fdr", "se_fdr", "mean_power", "se_power",
        ]
    )
    try:
        for mu in args.mu:
            results = run_trials(
                args.design, methods, alphas, mu, args.trials, args.seed
            )
            for name in methods:
                agg = results[name]
                for mi, layer_name in enumerate(layer_names):
                    writer.writerow(
                        [
                            args.design, name, layer_name, repr(float(mu)),
                            repr(float(alphas[mi])), args.trials,
                            repr(agg.fdr[mi]), repr(agg.se_fdr[mi]),
                            repr(agg.power[mi]), repr(agg.se_power[mi]),
                        ]
                    )
    except ValueError as exc:
        return _usage_error(str(exc))
    _write_output(buf.getvalue(), args.out)
    return EXIT_OK


def oracle_check(trials: int, seed: int, max_n: int, max_m: int) -> tuple[bool, str]:
    """Compare the filter against the brute-force oracle on random instances.

    Returns (ok, message); on a mismatch the message holds the full instance
    for reproduction.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    for t in range(trials):
        problem = random_problem(rng, max_n=max_n, max_m=max_m)
        got = pfilter(problem).thresholds
        want = brute_force_pfilter(problem)
        if got.indices != want.indices:
            lines = [
                f"mismatch on instance {t}:",
                f"  pvalues = {problem.pvalues.tolist()!r}",
                f"  layers  = {[layer.groups for layer in problem.layers]!r}",
                f"  alphas  = {problem.alphas!r}",
                f"  filter thresholds     = {got.indices!r} {got.values!r}",
                f"  exhaustive thresholds = {want.indices!r} {want.values!r}",
            ]
            return False, "\n".join(lines)
    return True, f"{trials} instances checked, all thresholds match"


def cmd_oracle_check(args) -> int:
    if args.max_n > 12 or args.max_m > 3:
        return _usage_error("oracle-check is limited to --max-n 12 and --max-m 3")
    if args.max_n < 1 or args.max_m < 1 or args.trials < 0:
        return _usage_error("--trials, --max-n and --max-m must be positive")
    ok, message = oracle_check(args.trials, args.seed, args.max_n, args.max_m)
    print(message)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pfilter",
        description="Simultaneous FDR control across multiple partitions of hypotheses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="apply a procedure to data from files")
    run.add_argument("--pvalues", required=True, help="CSV/whitespace file of (id, p)")
    run.add_argument(
        "--layer", action="append", default=[], metavar="PATH",
        help="(id, group_label) file; repeat for multiple layers, in order",
    )
    run.add_argument(
        "--alpha", action="append", type=float, metavar="FLOAT",
        help="target FDR level; repeat per layer, in order",
    )
    run.add_argument(
        "--method", default="pfilter",
        choices=["pfilter", "bh", "bb", "simes", "group-bh"],
    )
    run.add_argument("--out", default=None, help="output path (default: stdout)")
    run.set_defaults(func=cmd_run)

    sim = sub.add_parser("simulate", help="run a benchmark design, write a CSV table")
    sim.add_argument("--design", required=True, choices=["grouped", "grid"])
    sim.add_argument(
        "--mu", action="append", type=float, required=True,
        help="signal strength; repeatable",
    )
    sim.add_argument("--trials", type=int, default=100)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument(
        "--alpha", action="append", type=float,
        help="per-layer target level (default 0.2 for every layer)",
    )
    sim.add_argument(
        "--method", action="append", choices=["pfilter", "bh", "bb"],
        help="methods to score (default: all three)",
    )
    sim.add_argument("--out", default=None)
    sim.set_defaults(func=cmd_simulate)

    oc = sub.add_parser(
        "oracle-check", help="randomized cross-check against the exhaustive oracle"
    )
    oc.add_argument("--trials", type=int, default=1000)
    oc.add_argument("--seed", type=int, default=0)
    oc.add_argument("--max-n", type=int, default=12)
    oc.add_argument("--max-m", type=int, default=3)
    oc.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
