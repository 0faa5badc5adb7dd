"""Command-line front end: compile, optimize, simulate, bench.

Every command is deterministic given its flags and seeds. Floats in CSV
output are printed with 17 significant digits so reruns are byte-identical.
Failures exit nonzero with a one-line machine-readable error JSON on stdout:
exit code 2 for input errors, 1 for pipeline failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .device import DeviceModel, propagate
from .gates import named_gate
from .lattice import PrecisionUnreachable
from .linalg import haar_random_unitary, require_unitary
from .optimizer import OptimizationResult, OptimizationTask, optimize
from .planner import ChipPlan, GapInfeasible, PlanError, compile_unitary
from .su2 import BoundsInfeasible


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def load_unitary_file(path: str) -> np.ndarray:
    """Load a complex matrix from JSON: {"matrix": [[[re, im], ...], ...]}."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    rows = payload["matrix"] if isinstance(payload, dict) else payload
    matrix = np.array([[complex(re, im) for re, im in row] for row in rows])
    return require_unitary(matrix, atol=1e-8, what=f"matrix from {path}")


def _resolve_target(args) -> tuple[np.ndarray, str]:
    if getattr(args, "matrix", None):
        return load_unitary_file(args.matrix), args.matrix
    if not getattr(args, "gate", None):
        raise ValueError("provide either --gate or --matrix")
    if args.d is None:
        raise ValueError("--d is required with --gate")
    return named_gate(args.gate, args.d), args.gate


def _jobs(args) -> int:
    env = os.environ.get("PWA_SYNTH_JOBS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"PWA_SYNTH_JOBS must be an integer, got {env!r}") from None
    return max(1, getattr(args, "jobs", 1) or 1)


def _cmd_compile(args) -> int:
    target, name = _resolve_target(args)
    zero_voltage = None
    if args.gap > 0.0:
        model = DeviceModel()
        zero_voltage = (
            args.zero_beta if args.zero_beta is not None else model.beta_zero,
            args.zero_coupling if args.zero_coupling is not None else model.base_coupling,
        )
    plan = compile_unitary(
        target,
        section_length=args.L,
        trotter_steps=args.N,
        j1=args.j1,
        j2=args.j2,
        epsilon=args.eps,
        gap_length=args.gap,
        zero_voltage=zero_voltage,
        prune_identity=args.prune_identity,
        target_name=name,
    )
    print(f"K = {plan.section_budget}")
    print(f"sections = {len(plan.sections)}")
    print(f"measured_error = {_fmt(plan.measured_error)}")
    if plan.epsilon_certificate is not None:
        print(f"epsilon_certificate = {_fmt(plan.epsilon_certificate)}")
    if args.out:
        Path(args.out).write_text(plan.to_json(), encoding="utf-8")
        print(f"plan written to {args.out}")
    return 0


def _cmd_optimize(args) -> int:
    target, name = _resolve_target(args)
    model = DeviceModel() if args.L is None else DeviceModel(section_length=args.L, gap_length=0.1 * args.L)
    task = OptimizationTask(
        target=target,
        sections=args.K,
        model=model,
        restarts=args.restarts,
        seed=args.seed,
        max_iterations=args.maxiter,
    )
    result = optimize(task, jobs=_jobs(args))
    print(f"best_infidelity = {_fmt(result.infidelity)}")
    print(f"best_fidelity = {_fmt(result.fidelity)}")
    print(f"restarts = {task.restarts}")
    if args.out:
        Path(args.out).write_text(
            result.to_json(model=model, extra={"target": name, "K": args.K, "d": task.dimension}),
            encoding="utf-8",
        )
        print(f"voltages written to {args.out}")
    if args.csv:
        Path(args.csv).write_text(result.restarts_csv(), encoding="utf-8")
        print(f"per-restart CSV written to {args.csv}")
    return 0


def _cmd_simulate(args) -> int:
    if bool(args.plan) == bool(args.voltages):
        raise ValueError("provide exactly one of --plan or --voltages")
    model = DeviceModel()
    if args.plan:
        chip = ChipPlan.from_json(Path(args.plan).read_text(encoding="utf-8"))
        d = chip.dimension
    else:
        volts, model = OptimizationResult.voltages_from_json(Path(args.voltages).read_text(encoding="utf-8"))
        chip = volts
        d = volts[0].dimension
    if not 0 <= args.input < d:
        raise ValueError(f"--input must be a basis index in [0, {d - 1}]")
    state = np.zeros(d, dtype=complex)
    state[args.input] = 1.0
    trace = propagate(state, chip, model=model, dz=args.dz)
    csv = trace.to_csv()
    if args.out:
        Path(args.out).write_text(csv, encoding="utf-8")
        print(f"trace written to {args.out} ({trace.z.size} samples)")
    else:
        sys.stdout.write(csv)
    return 0


@dataclass(frozen=True)
class BenchSpec:
    """One benchmark run: which experiment, over which sweeps."""

    experiment: str
    dimensions: tuple[int, ...]
    section_counts: tuple[int, ...] = (1, 3, 5)
    lengths: tuple[float, ...] = (6e-3,)
    gates: tuple[str, ...] = ("dft", "clock", "shift")
    seeds: tuple[int, ...] = (0,)
    haar_count: int = 10
    trotter_steps: tuple[int, ...] = (4, 8, 16, 32)
    restarts: int = 8
    max_iterations: int = 500
    output_dir: str = "."

    def __post_init__(self):
        if self.experiment not in ("gate-sweep", "haar-sweep", "error-scaling", "propagation"):
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not self.dimensions:
            raise ValueError("empty dimension sweep")
        if not self.lengths or any(l <= 0 for l in self.lengths):
            raise ValueError("lengths must be positive and non-empty")
        if self.experiment in ("gate-sweep", "haar-sweep") and not self.section_counts:
            raise ValueError("empty section-count sweep")


def _bench_rows(spec: BenchSpec, jobs: int) -> list[str]:
    """Execute the sweep; one CSV line per row, ordering fixed by the sweep key."""

    def opt_row(gate_name, target, d, k, length, seed):
        model = DeviceModel(section_length=length, gap_length=0.1 * length)
        try:
            task = OptimizationTask(
                target=target,
                sections=k,
                model=model,
                restarts=spec.restarts,
                seed=seed,
                max_iterations=spec.max_iterations,
            )
            result = optimize(task)
            return f"{gate_name},{d},{k},{_fmt(length)},{seed},{_fmt(result.infidelity)},ok"
        except Exception as exc:  # per-row failures recorded, run continues
            return f"{gate_name},{d},{k},{_fmt(length)},{seed},nan,error:{exc}"

    work = []
    if spec.experiment == "gate-sweep":
        for gate in spec.gates:
            for d in spec.dimensions:
                for k in spec.section_counts:
                    for length in spec.lengths:
                        for seed in spec.seeds:
                            work.append((gate, named_gate(gate, d), d, k, length, seed))
    elif spec.experiment == "haar-sweep":
        for d in spec.dimensions:
            for i in range(spec.haar_count):
                target = haar_random_unitary(d, i)
                for k in spec.section_counts:
                    for length in spec.lengths:
                        work.append((f"haar:{i}", target, d, k, length, spec.seeds[0]))
    else:
        raise ValueError(f"_bench_rows cannot run {spec.experiment}")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda w: opt_row(*w), work))
    return [opt_row(*w) for w in work]


def run_bench(spec: BenchSpec, jobs: int = 1) -> list[Path]:
    """Run one experiment, returning the files written."""
    outdir = Path(spec.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if spec.experiment in ("gate-sweep", "haar-sweep"):
        rows = _bench_rows(spec, jobs)
        path = outdir / f"{spec.experiment.replace('-', '_')}.csv"
        path.write_text(
            "gate,d,K,L_m,seed,best_infidelity,status\n" + "\n".join(rows) + "\n",
            encoding="utf-8",
        )
        written.append(path)
    elif spec.experiment == "error-scaling":
        lines = ["gate,d,N,L_m,error"]
        slopes = ["gate,d,L_m,slope"]
        for gate in spec.gates:
            for d in spec.dimensions:
                target = named_gate(gate, d)
                for length in spec.lengths:
                    errors = []
                    for n in spec.trotter_steps:
                        try:
                            plan = compile_unitary(target, section_length=length, trotter_steps=n)
                            errors.append(plan.measured_error)
                            lines.append(f"{gate},{d},{n},{_fmt(length)},{_fmt(plan.measured_error)}")
                        except Exception as exc:
                            lines.append(f"{gate},{d},{n},{_fmt(length)},error:{exc}")
                    if len(errors) == len(spec.trotter_steps) and len(errors) >= 2:
                        slope = float(
                            np.polyfit(np.log(spec.trotter_steps), np.log(errors), 1)[0]
                        )
                        slopes.append(f"{gate},{d},{_fmt(length)},{_fmt(slope)}")
                        print(f"error-scaling {gate} d={d} L={_fmt(length)}: slope = {_fmt(slope)}")
        path = outdir / "error_scaling.csv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)
        path = outdir / "error_scaling_slopes.csv"
        path.write_text("\n".join(slopes) + "\n", encoding="utf-8")
        written.append(path)
    else:  # propagation
        for gate in spec.gates:
            for d in spec.dimensions:
                target = named_gate(gate, d)
                length = spec.lengths[0]
                k = spec.section_counts[-1]
                model = DeviceModel(section_length=length, gap_length=0.1 * length)
                task = OptimizationTask(
                    target=target,
                    sections=k,
                    model=model,
                    restarts=spec.restarts,
                    seed=spec.seeds[0],
                    max_iterations=spec.max_iterations,
                )
                result = optimize(task)
                for basis in range(d):
                    state = np.zeros(d, dtype=complex)
                    state[basis] = 1.0
                    trace = propagate(state, result.voltages, model=model, dz=length / 50.0)
                    path = outdir / f"propagation_{gate}_d{d}_K{k}_in{basis}.csv"
                    path.write_text(trace.to_csv(), encoding="utf-8")
                    written.append(path)
    return written


def _cmd_bench(args) -> int:
    spec = BenchSpec(
        experiment=args.experiment,
        dimensions=tuple(int(x) for x in args.dims.split(",")),
        section_counts=tuple(int(x) for x in args.sections.split(",")),
        lengths=tuple(float(x) for x in args.lengths.split(",")),
        gates=tuple(args.gates.split(",")),
        seeds=tuple(int(x) for x in args.seeds.split(",")),
        haar_count=args.haar_count,
        trotter_steps=tuple(int(x) for x in args.N_values.split(",")),
        restarts=args.restarts,
        max_iterations=args.maxiter,
        output_dir=args.out,
    )
    written = run_bench(spec, jobs=_jobs(args))
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pwa-synth",
        description="Compile, optimize, simulate, and benchmark waveguide-array unitaries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="decompose a unitary into a physical section plan")
    p.add_argument("--gate", help="named gate: dft, clock, shift, identity, hadamard, pauli-x, haar:<seed>")
    p.add_argument("--matrix", help="JSON file with a unitary matrix ([re, im] pairs)")
    p.add_argument("--d", type=int, help="dimension for --gate")
    p.add_argument("--L", type=float, default=6e-3, help="section length in meters")
    p.add_argument("--N", type=int, default=8, help="Trotter steps per section")
    p.add_argument("--j1", type=int, default=1, help="background coupling winding")
    p.add_argument("--j2", type=int, default=1, help="background level winding")
    p.add_argument("--eps", type=float, default=None, help="Diophantine precision (default: budget)")
    p.add_argument("--gap", type=float, default=0.0, help="electrode gap length in meters")
    p.add_argument("--zero-beta", type=float, default=None, help="zero-voltage beta for gaps")
    p.add_argument("--zero-coupling", type=float, default=None, help="zero-voltage coupling for gaps")
    p.add_argument("--prune-identity", action="store_true", help="drop identity factors")
    p.add_argument("--out", help="plan JSON output path")
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("optimize", help="optimize per-section voltages against a target")
    p.add_argument("--gate")
    p.add_argument("--matrix")
    p.add_argument("--d", type=int)
    p.add_argument("--K", type=int, required=True, help="number of voltage sections")
    p.add_argument("--L", type=float, default=None, help="section length (default 6e-3 m)")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--maxiter", type=int, default=2000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="voltages JSON output path")
    p.add_argument("--csv", help="per-restart CSV output path")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("simulate", help="propagate a basis state through a plan or voltages")
    p.add_argument("--plan", help="plan JSON from compile")
    p.add_argument("--voltages", help="voltages JSON from optimize")
    p.add_argument("--input", type=int, default=0, help="basis state index")
    p.add_argument("--dz", type=float, default=1e-4, help="sampling step in meters")
    p.add_argument("--out", help="trace CSV path (stdout when omitted)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("bench", help="run a benchmark sweep")
    p.add_argument("--experiment", required=True,
                   choices=["gate-sweep", "haar-sweep", "error-scaling", "propagation"])
    p.add_argument("--dims", default="3,4")
    p.add_argument("--sections", default="1,3,5")
    p.add_argument("--lengths", default="6e-3")
    p.add_argument("--gates", default="dft,clock,shift")
    p.add_argument("--seeds", default="0")
    p.add_argument("--haar-count", type=int, default=10)
    p.add_argument("--N-values", default="4,8,16,32")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--maxiter", type=int, default=500)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="bench_out")
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, BoundsInfeasible, GapInfeasible, FileNotFoundError, KeyError) as exc:
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}))
        return 2
    except (PlanError, PrecisionUnreachable) as exc:
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
