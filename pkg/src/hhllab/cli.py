"""``hhllab`` command line: example, solve, sweep, complexity.

Exit codes: 0 success, 1 a built-in check failed, 2 bad input or model.
Output files go to ``--out`` (or ``$HHLLAB_OUT`` when set).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from .bench import crossover_table
from .errors import HHLLabError
from .hhl import (
    HHLProblem,
    HHLResult,
    load_problem,
    preprocess,
    result_to_json,
    run_hhl,
    verify_solution,
    worked_example,
)
from .noise import NoiseModel, gnuplot_script, noise_sweep

DEFAULT_SHOTS = 4096
DEFAULT_GRID = "0:0.15:0.025"
EXPECTED_SOLUTION = np.array([-0.25, 0.75])


class Reporter:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def __call__(self, *lines: str) -> None:
        if not self.quiet:
            for line in lines:
                print(line)


def _clean(x: float) -> float:
    # round-off residue below 1e-14 prints as 0
    return 0.0 if abs(x) < 1e-14 else x


def fmt(x) -> str:
    if isinstance(x, complex) or np.iscomplexobj(x):
        z = complex(x)
        re, im = _clean(z.real), _clean(z.imag)
        return f"{re:.12g}" if im == 0 else f"{re:.12g}{im:+.12g}j"
    return f"{float(x):.12g}"


def fmt_vec(v) -> str:
    return "(" + ", ".join(fmt(complex(x)) for x in v) + ")"


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` (inclusive of ``b``), a comma list, or a single value."""
    try:
        if ":" in text:
            a, b, step = (float(x) for x in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            count = int(math.floor((b - a) / step + 1e-9)) + 1
            return [round(a + i * step, 12) for i in range(count)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; expected a:b:step") from None


def load_noise(spec: str | None) -> NoiseModel:
    if spec is None or spec == "transmon":
        return NoiseModel.transmon()
    if spec == "zero":
        return NoiseModel.ideal()
    return NoiseModel.load(spec)


def out_dir(args) -> Path:
    path = Path(os.environ.get("HHLLAB_OUT") or args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _basis_label(index: int, p: HHLProblem) -> str:
    anc = index & 1
    clock = (index >> 1) & ((1 << p.n_clock) - 1)
    b = index >> (1 + p.n_clock)
    return f"a={anc} clock={clock:0{p.n_clock}b} b={b:0{p.n_b}b}"


def print_snapshots(say: Reporter, p: HHLProblem, r: HHLResult) -> None:
    for label in sorted(r.snapshots, key=lambda s: int(s[3:])):
        say(f"{label}:")
        amps = r.snapshots[label].amplitudes
        for i in np.flatnonzero(np.abs(amps) > 1e-12):
            say(f"  {_basis_label(int(i), p)}  {fmt(complex(amps[i]))}")


def _write_outputs(path: Path, stem: str, payload: dict, r: HHLResult | None) -> None:
    (path / f"{stem}.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if r is not None and r.histogram is not None:
        (path / f"{stem}_histogram.csv").write_text(r.histogram.to_csv(), encoding="utf-8")


def _shot_run(p: HHLProblem, args, shots: int) -> HHLResult:
    if args.backend == "density":
        return run_hhl(p, "noisy", shots, args.seed, load_noise(args.noise or "zero"))
    return run_hhl(p, "shots", shots, args.seed)


def _report_common(say: Reporter, p: HHLProblem, exact: HHLResult, sampled: HHLResult, report) -> None:
    say(
        f"clock qubits: {p.n_clock}  t: {fmt(p.t)}  C: {fmt(p.C)}  "
        f"rescaled eigenvalues: {fmt_vec(p.lambda_tilde.real)}",
        f"success probability: {fmt(exact.success_probability)}",
        f"direction: {fmt_vec(exact.direction)}",
        f"rescaled solution: {fmt_vec(exact.rescaled_solution)}",
        f"classical solution: {fmt_vec(report.classical_solution)}",
        f"relative residual: {fmt(report.residual)}",
        f"cosine similarity: {fmt(report.cosine_similarity)}",
    )
    if exact.ratio_11_01 is not None:
        say(f"P(11)/P(01) statevector: {fmt(exact.ratio_11_01)}")
    if sampled.histogram is not None:
        hist = sampled.histogram
        say(f"histogram ({hist.shots} shots, seed {hist.seed}, {sampled.mode}):")
        for key in sorted(hist.counts):
            say(f"  {key}  {hist.counts[key]}")
        if sampled.ratio_11_01 is not None:
            say(f"count(11)/count(01): {fmt(sampled.ratio_11_01)}")


def cmd_example(args) -> int:
    say = Reporter(args.quiet)
    A, b = worked_example()
    p = preprocess(A, b)
    shots = args.shots or DEFAULT_SHOTS
    exact = run_hhl(p, "statevector")
    sampled = _shot_run(p, args, shots)
    report = verify_solution(p, exact)
    print_snapshots(say, p, exact)
    _report_common(say, p, exact, sampled, report)

    failures = []
    if np.max(np.abs(exact.rescaled_solution - EXPECTED_SOLUTION)) > 1e-9:
        failures.append("rescaled solution differs from (-1/4, 3/4)")
    if abs(exact.ratio_11_01 - 9.0) > 1e-9:
        failures.append("statevector P(11)/P(01) is not 9")
    if report.residual > 1e-9:
        failures.append("relative residual above 1e-9")
    clean = args.backend == "statevector" or args.noise in (None, "zero")
    if args.backend == "density":
        diff = max(abs(sampled.outcome_probabilities[k] - exact.outcome_probabilities[k]) for k in exact.outcome_probabilities)
        say(f"max |P_density - P_statevector|: {fmt(diff)}")
        if clean and diff > 1e-10:
            failures.append("zero-noise density run disagrees with the statevector")
    if clean and not 7.5 <= sampled.ratio_11_01 <= 10.5:
        failures.append("sampled count(11)/count(01) outside [7.5, 10.5]")

    payload = result_to_json(p, sampled, report)
    payload["statevector"] = result_to_json(p, exact, report)
    _write_outputs(out_dir(args), "example", payload, sampled)
    for f in failures:
        print(f"check failed: {f}", file=sys.stderr)
    return 1 if failures else 0


def cmd_solve(args) -> int:
    say = Reporter(args.quiet)
    if not args.problem:
        print("error: solve needs --problem", file=sys.stderr)
        return 2
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        p = load_problem(args.problem)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    shots = args.shots or DEFAULT_SHOTS
    exact = run_hhl(p, "statevector")
    sampled = _shot_run(p, args, shots)
    report = verify_solution(p, exact)
    _report_common(say, p, exact, sampled, report)
    payload = result_to_json(p, sampled, report)
    payload["statevector"] = result_to_json(p, exact, report)
    _write_outputs(out_dir(args), "solve", payload, sampled)
    if p.exact and report.residual > 1e-8:
        print(f"check failed: residual {fmt(report.residual)} above 1e-8", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args) -> int:
    say = Reporter(args.quiet)
    base = load_noise(args.noise)
    p = load_problem(args.problem) if args.problem else preprocess(*worked_example())
    result = noise_sweep(p, args.grid, shots=args.shots, seed=args.seed, base=base)
    path = out_dir(args)
    text = result.to_csv()
    (path / "sweep.csv").write_text(text, encoding="utf-8")
    if result.width == 2:
        (path / "sweep.gp").write_text(gnuplot_script("sweep.csv", result), encoding="utf-8")
    say(text.rstrip("\n"))
    if args.shots is None and result.width == 2:
        for mode in ("2q_only", "full"):
            series = result.series(mode, "11")
            if any(b > a + 1e-12 for a, b in zip(series, series[1:])):
                print(f"check failed: P_11 increases along the grid in {mode} mode", file=sys.stderr)
                return 1
    return 0


def cmd_complexity(args) -> int:
    if args.n_values:
        grid = [int(x) for x in args.n_values.split(",") if x.strip()]
    else:
        lo, hi = (int(x) for x in args.log2n.split(":"))
        grid = [2 ** e for e in range(lo, hi + 1)]
    table = crossover_table(args.sparsity, args.condition, args.eps, grid)
    text = table.to_csv()
    (out_dir(args) / "complexity.csv").write_text(text, encoding="utf-8")
    Reporter(args.quiet)(text.rstrip("\n"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--shots", type=int, default=None, help=f"number of shots (default {DEFAULT_SHOTS}; sweep defaults to exact)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--backend", choices=("statevector", "density"), default="statevector")
    common.add_argument("--problem", help="problem JSON file")
    common.add_argument("--noise", help="noise-model JSON file, 'zero' or 'transmon'")
    common.add_argument("--grid", type=parse_grid, default=parse_grid(DEFAULT_GRID), help="p_2q grid a:b:step")
    common.add_argument("--out", default="hhllab-out", help="output directory")
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="hhllab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("example", parents=[common], help="run the 2x2 worked example").set_defaults(func=cmd_example)
    sub.add_parser("solve", parents=[common], help="solve a system from --problem").set_defaults(func=cmd_solve)
    sub.add_parser("sweep", parents=[common], help="noise sweep over --grid").set_defaults(func=cmd_sweep)
    cx = sub.add_parser("complexity", parents=[common], help="operation-count crossover table")
    cx.add_argument("--sparsity", type=int, default=2)
    cx.add_argument("--condition", type=float, default=2.0)
    cx.add_argument("--eps", type=float, default=0.1)
    cx.add_argument("--log2n", default="4:20", help="range of log2(N), inclusive")
    cx.add_argument("--n-values", help="explicit comma-separated N values")
    cx.set_defaults(func=cmd_complexity)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.shots is not None and args.shots < 1:
        print("error: --shots must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (HHLLabError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
