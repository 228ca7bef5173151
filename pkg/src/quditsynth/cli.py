"""Command-line front end.

Subcommands: ``blocks`` and ``gates`` synthesize from a permutation input
file, ``verify`` re-checks a written artifact, ``bounds`` prints the
counting lower bounds, ``selftest`` runs the small exhaustive suites.
Outputs are deterministic: the same input and flags always produce
byte-identical files.

Exit codes: 0 success/equivalent, 1 verification mismatch, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field

from .block_synth import BlockProgram, block_lower_bound, synthesize_blocks
from .gate_synth import CostModel, algorithm1_synthesize, circuit_from_json, circuit_to_json
from .grid_decomp import swap_pair_ops
from .perm_core import Permutation, compose_all
from .sim_verify import (
    block_program_to_perm,
    gate_lower_bound,
    report_to_json,
    verify_equiv,
)


@dataclass
class RunConfig:
    pipeline: str
    d: int
    n: int
    in_path: str
    out_path: str | None = None
    report_path: str | None = None
    lowering: str = "primitive"
    verify: bool = False
    seed: int = 0
    model: CostModel = field(default_factory=CostModel)


class InputError(Exception):
    """Bad user input: maps to exit code 2."""


def _cycle_element(token: str, d: int, n: int) -> int:
    """A cycle element is a decimal state index, or — when d <= 10 and the
    token is exactly n digits below d — a most-significant-first digit
    string ("0007" names the state with digit value 7 on qudit 0)."""
    if not token.isdigit():
        raise InputError(f"cycle element {token!r} is not a number")
    if d <= 10 and len(token) == n and all(int(ch) < d for ch in token):
        return int(token, d)
    return int(token, 10)


def parse_perm(data: bytes, d: int, n: int) -> Permutation:
    """Parse a permutation input file: JSON map or cycle text."""
    size = d ** n
    text = data.decode("utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise InputError(f"bad JSON: {e}") from None
        for key, want in (("d", d), ("n", n)):
            if key in obj and int(obj[key]) != want:
                raise InputError(
                    f"input file says {key}={obj[key]} but the flags say {want}"
                )
        if "map" not in obj:
            raise InputError('JSON input needs a "map" array')
        m = obj["map"]
        if len(m) != size:
            raise InputError(f"map has {len(m)} entries, expected {size}")
        seen: dict[int, int] = {}
        for pos, raw in enumerate(m):
            v = int(raw)
            if not 0 <= v < size:
                raise InputError(f"map entry {v} at position {pos} is out of range")
            if v in seen:
                raise InputError(
                    f"map is not a bijection: image {v} appears at positions "
                    f"{seen[v]} and {pos}"
                )
            seen[v] = pos
        return Permutation([int(raw) for raw in m])
    # cycle text: "(a b c)(d e)", whitespace and newlines free
    body = text.strip()
    if not body:
        return Permutation(list(range(size)))
    cycles: list[tuple[int, ...]] = []
    pos = 0
    while pos < len(body):
        ch = body[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch != "(":
            raise InputError(f"unexpected character {ch!r} at offset {pos}")
        end = body.find(")", pos)
        if end < 0:
            raise InputError("unclosed cycle")
        tokens = body[pos + 1:end].replace(",", " ").split()
        if len(tokens) < 2:
            raise InputError("a cycle needs at least two elements")
        elems = []
        for t in tokens:
            v = _cycle_element(t, d, n)
            if not 0 <= v < size:
                raise InputError(f"cycle element {t!r} is out of range for {d}^{n} states")
            elems.append(v)
        cycles.append(tuple(elems))
        pos = end + 1
    try:
        return Permutation.from_cycles(cycles, size)
    except ValueError as e:
        raise InputError(str(e)) from None


def _write(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def _json_text(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _print_summary(report, header: str) -> None:
    print(header)
    counts = " ".join(f"{k}={v}" for k, v in sorted(report.gate_counts.items()))
    print(f"gate counts: {counts or '(empty)'}")
    print(f"weighted cost: {report.weighted_cost}")
    bc = report.bound_comparison
    print(f"lower bound: {bc['lower_bound_value']:.3f} (measured {bc['measured']})")
    print(f"equivalent: {'yes' if report.equivalent else 'NO'} "
          f"(coverage {report.coverage * 100:.1f}%)")
    if report.first_mismatch is not None:
        x, want, got = report.first_mismatch
        print(f"first mismatch: input {x} expected {want} got {got}")


def run(config: RunConfig) -> int:
    """Synthesize per config, optionally verify, write artifacts."""
    try:
        with open(config.in_path, "rb") as fh:
            data = fh.read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        f = parse_perm(data, config.d, config.n)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    model = CostModel(
        two_qudit_weight=config.model.two_qudit_weight,
        cnx_coeff=config.model.cnx_coeff,
        mode="naive_lowered" if config.lowering == "naive" else "primitive",
    )
    try:
        if config.pipeline == "blocks":
            artifact = synthesize_blocks(f, config.n, config.d)
            payload = _json_text(artifact.to_json_dict())
        elif config.pipeline == "gates":
            artifact = algorithm1_synthesize(f, config.n, config.d)
            payload = _json_text(circuit_to_json(artifact))
        else:
            print(f"error: unknown pipeline {config.pipeline!r}", file=sys.stderr)
            return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    if config.out_path:
        _write(config.out_path, payload)
    else:
        sys.stdout.write(payload)

    code = 0
    report = None
    if config.verify or config.report_path:
        contract = config.pipeline == "gates"
        report = verify_equiv(artifact, f, ancilla_contract=contract, model=model)
        _print_summary(report, f"pipeline: {config.pipeline} d={config.d} n={config.n}")
        if config.verify and not report.equivalent:
            code = 1
    if config.report_path and report is not None:
        _write(config.report_path, report_to_json(report) + "\n")
    return code


def _cmd_verify(args) -> int:
    try:
        with open(args.artifact, "rb") as fh:
            artifact_data = json.loads(fh.read().decode("utf-8"))
        with open(args.in_path, "rb") as fh:
            perm_data = fh.read()
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        f = parse_perm(perm_data, args.d, args.n)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    pipeline = args.pipeline
    if pipeline is None:
        pipeline = "blocks" if "ops" in artifact_data else "gates"
    model = CostModel(mode="naive_lowered" if args.lowering == "naive" else "primitive")
    try:
        if pipeline == "blocks":
            artifact = BlockProgram.from_json_dict(artifact_data)
            report = verify_equiv(artifact, f, ancilla_contract=False, model=model)
        else:
            artifact = circuit_from_json(artifact_data)
            report = verify_equiv(
                artifact, f, ancilla_contract=artifact.ancillas > 0, model=model
            )
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    _print_summary(report, f"pipeline: {pipeline} d={args.d} n={args.n}")
    if args.report:
        _write(args.report, report_to_json(report) + "\n")
    return 0 if report.equivalent else 1


def _cmd_bounds(args) -> int:
    try:
        gates = gate_lower_bound(args.n, args.d)
        blocks = block_lower_bound(args.n, args.d)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"d={args.d} n={args.n}")
    print(f"gate lower bound: {gates:.3f}")
    print(f"block lower bound: {blocks}")
    if args.report:
        _write(args.report, _json_text({
            "d": args.d,
            "n": args.n,
            "gate_lower_bound": gates,
            "block_lower_bound": blocks,
        }))
    return 0


def _selftest_grid() -> bool:
    # every 4-distinct-cell swap pair on the 3x3 grid, checked exactly
    cells = [(r, c) for r in range(3) for c in range(3)]
    for a in cells:
        for ap in cells:
            if ap == a:
                continue
            for b in cells:
                if b in (a, ap):
                    continue
                for bp in cells:
                    if bp in (a, ap, b):
                        continue
                    ops = swap_pair_ops(a, ap, b, bp, 3, 3)
                    if len(ops) > 20:
                        return False
                    got = compose_all([op.grid_perm().perm for op in ops], 9)
                    want = compose_all([
                        Permutation.transposition(9, a[0] * 3 + a[1], ap[0] * 3 + ap[1]),
                        Permutation.transposition(9, b[0] * 3 + b[1], bp[0] * 3 + bp[1]),
                    ], 9)
                    if got.map != want.map:
                        return False
    return True


def _selftest_blocks(rng: random.Random) -> bool:
    for _ in range(10):
        m = list(range(27))
        rng.shuffle(m)
        f = Permutation(m)
        if not f.is_even():
            i, j = m.index(0), m.index(1)
            m[i], m[j] = m[j], m[i]
            f = Permutation(m)
        p = synthesize_blocks(f, 3, 3)
        if block_program_to_perm(p).map != f.map:
            return False
    return True


def _selftest_gates(rng: random.Random) -> bool:
    for _ in range(6):
        m = list(range(27))
        rng.shuffle(m)
        f = Permutation(m)
        c = algorithm1_synthesize(f, 3, 3)
        if not verify_equiv(c, f, ancilla_contract=True).equivalent:
            return False
    return True


def _cmd_selftest(args) -> int:
    rng = random.Random(args.seed)
    checks = [
        ("grid swap pairs (3x3 exhaustive)", _selftest_grid),
        ("block pipeline (d=3 n=3 random)", lambda: _selftest_blocks(rng)),
        ("gate pipeline (d=3 n=3 random)", lambda: _selftest_gates(rng)),
        ("bounds evaluate", lambda: gate_lower_bound(64, 64) > 0 and block_lower_bound(8, 5) > 0),
    ]
    failed = False
    for name, check in checks:
        ok = check()
        print(f"{'ok' if ok else 'FAIL'}  {name}")
        failed = failed or not ok
    return 1 if failed else 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="synth",
        description="Synthesize reversible qudit circuits from permutations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, pipeline=None):
        p.add_argument("--d", type=int, required=True, help="digit alphabet size")
        p.add_argument("--n", type=int, required=True, help="number of data qudits")
        p.add_argument("--in", dest="in_path", required=True,
                       help="permutation file: JSON map or cycle text")
        if pipeline:
            p.add_argument("--out", dest="out_path", default=None,
                           help="artifact JSON path (stdout when omitted)")
            p.add_argument("--verify", action="store_true",
                           help="simulate the artifact against the input")
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--lowering", choices=["primitive", "naive"],
                       default="primitive", help="cost model for reports")
        p.add_argument("--report", default=None, help="verification report JSON path")

    for name in ("blocks", "gates"):
        p = sub.add_parser(name, help=f"synthesize with the {name} pipeline")
        add_common(p, pipeline=name)

    pv = sub.add_parser("verify", help="re-check a written artifact")
    pv.add_argument("artifact", help="circuit or program JSON file")
    add_common(pv)
    pv.add_argument("--pipeline", choices=["blocks", "gates"], default=None,
                    help="artifact kind (sniffed from the file when omitted)")

    pb = sub.add_parser("bounds", help="print counting lower bounds")
    pb.add_argument("--d", type=int, required=True)
    pb.add_argument("--n", type=int, required=True)
    pb.add_argument("--report", default=None)

    ps = sub.add_parser("selftest", help="run the small exhaustive suites")
    ps.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    if args.command in ("blocks", "gates"):
        config = RunConfig(
            pipeline=args.command,
            d=args.d,
            n=args.n,
            in_path=args.in_path,
            out_path=args.out_path,
            report_path=args.report,
            lowering=args.lowering,
            verify=args.verify,
            seed=args.seed,
        )
        return run(config)
    if args.command == "verify":
        return _cmd_verify(args)
    if args.command == "bounds":
        return _cmd_bounds(args)
    return _cmd_selftest(args)


if __name__ == "__main__":
    sys.exit(main())
