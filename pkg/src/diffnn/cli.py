"""Command-line front end and benchmark harness.

Subcommands::

    diffnn verify --net-a A.json --net-b B.json --region global:0.01 --epsilon 1
    diffnn bench --config bench.json
    diffnn gen --arch rnn:4x8 --seed 0 --out f.json --quantize-out f16.json
    diffnn bounds --surface f1 --box "x,-1,1;dx,0,0.01;y,-1,1;dy,0,0.01"

Exit codes: 0 proved, 1 unknown, 2 usage or structural error.
The ``DIFFNN_LOG`` environment variable sets the log level (e.g. ``DEBUG``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .engine import DEFAULT_DEADLINE, VerdictReport, verify
from .global_opt import OptParams, de_extremize
from .interval import Box, Interval
from .netmodel import (Activation, ArchSpec, InputRegion, NetworkFormatError,
                       StructuralMismatchError, diff_weights, generate_network,
                       load_network, quantize_weights, save_network)
from .surfaces import VARS, SurfaceKind
from .validator import ValidationError, ValidatorParams, validate_and_adjust

log = logging.getLogger("diffnn")

EXIT_PROVED, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2
CANONICAL_RANGE = Interval(-1.0, 1.0)
REPORT_HEADER = ["instance", "verdict", "seconds", "max_abs_delta"]


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RegionSpec:
    kind: str  # "global" | "targeted" | "file"
    fraction: float = 0.01
    count: int = 3
    seed: int = 0
    path: str | None = None

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> RegionSpec:
        kind, _, arg = text.partition(":")
        kind = kind.strip().lower()
        try:
            if kind == "global":
                return cls("global", fraction=float(arg or 0.01), seed=seed)
            if kind == "targeted":
                return cls("targeted", count=int(arg or 3), seed=seed)
        except ValueError:
            raise UsageError(f"bad region argument in {text!r}") from None
        if kind == "file" and arg:
            return cls("file", path=arg, seed=seed)
        raise UsageError(f"bad region spec {text!r}; use global:F, targeted:K or file:PATH")


def parse_region(spec: RegionSpec, input_dim: int, input_range: Interval = CANONICAL_RANGE,
                 center=None) -> InputRegion:
    """Build the input box described by ``spec`` around ``center``.

    global:   every variable is ``center +- fraction * width(input_range)``
    targeted: ``count`` variables picked by a seeded draw span the full range,
              the rest are fixed at ``center``
    file:     a JSON list of ``[lo, hi]`` pairs
    """
    if spec.kind == "file":
        items = json.loads(Path(spec.path).read_text())
        region = InputRegion.from_intervals(items)
        if len(region) != input_dim:
            raise UsageError(f"region file has {len(region)} variables, expected {input_dim}")
        return region
    center = np.zeros(input_dim) if center is None else np.asarray(center, dtype=np.float64)
    if center.shape != (input_dim,):
        raise UsageError(f"base input has {center.size} values, expected {input_dim}")
    if spec.kind == "global":
        if not spec.fraction > 0:
            raise UsageError("global perturbation fraction must be positive")
        return InputRegion.from_center(center, spec.fraction * input_range.width)
    if spec.kind == "targeted":
        if spec.count < 0 or spec.count > input_dim:
            raise UsageError(f"cannot target {spec.count} of {input_dim} inputs")
        idx = targeted_indices(input_dim, spec.count, spec.seed)
        lo, hi = center.copy(), center.copy()
        lo[idx], hi[idx] = input_range.lo, input_range.hi
        return InputRegion(lo, hi)
    raise UsageError(f"unknown region kind {spec.kind!r}")


def targeted_indices(input_dim: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(input_dim, size=count, replace=False))


def base_input(input_dim: int, seed: int, input_range: Interval = CANONICAL_RANGE) -> np.ndarray:
    """Seeded stand-in for a test input, uniform over the input range."""
    return np.random.default_rng(seed).uniform(input_range.lo, input_range.hi, input_dim)


def exit_code(report: VerdictReport) -> int:
    return EXIT_PROVED if report.proved else EXIT_UNKNOWN


def run_verify(net_a, net_b, region: RegionSpec, epsilon: float,
               deadline: float = DEFAULT_DEADLINE, center=None, jobs: int = 1,
               input_range: Interval = CANONICAL_RANGE) -> tuple[VerdictReport, int]:
    a, b = load_network(net_a), load_network(net_b)
    dn = diff_weights(a, b)
    n = a.dims.n_inputs
    if center is None and region.kind != "file":
        center = base_input(n, region.seed, input_range)
    reg = parse_region(region, n, input_range, center)
    report = verify(dn, reg, epsilon, deadline=deadline, jobs=jobs)
    return report, exit_code(report)


# ---------------------------------------------------------------------------
# Benchmarks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkConfig:
    arch: str = "rnn:4x8"
    instances: int = 1
    epsilon: float = 1.0
    region: str = "global:0.01"
    seed: int = 0
    deadline: float = DEFAULT_DEADLINE
    output: str = "report.csv"
    jobs: int = 1
    inputs: int = 4
    outputs: int = 3
    activation: str = "tanh"
    # "quantize": f vs binary16(f); "identical": f vs f
    pairing: str = "quantize"
    net_a: str | None = None
    net_b: str | None = None
    # wall-clock times make reports non-reproducible; disable for byte-stable output
    timing: bool = True

    def __post_init__(self):
        if self.instances < 1:
            raise UsageError("instances must be >= 1")
        if not self.epsilon > 0:
            raise UsageError("epsilon must be positive")
        if self.pairing not in ("quantize", "identical"):
            raise UsageError(f"unknown pairing {self.pairing!r}")

    @classmethod
    def from_file(cls, path) -> BenchmarkConfig:
        doc = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)


def _bench_instance(args):
    cfg, i = args
    if cfg.net_a:
        a = load_network(cfg.net_a)
        b = load_network(cfg.net_b) if cfg.net_b else a
    else:
        spec = ArchSpec.parse(cfg.arch, inputs=cfg.inputs, outputs=cfg.outputs,
                              activation=Activation(cfg.activation))
        a = generate_network(spec, cfg.seed + i)
        b = a
    if cfg.pairing == "quantize" and not cfg.net_b:
        b = quantize_weights(a)
    dn = diff_weights(a, b)
    n = a.dims.n_inputs
    rspec = RegionSpec.parse(cfg.region, seed=cfg.seed + i)
    reg = parse_region(rspec, n, CANONICAL_RANGE, base_input(n, 10_000 + cfg.seed + i))
    opt = OptParams(seed=cfg.seed + i)
    report = verify(dn, reg, cfg.epsilon, deadline=cfg.deadline, opt=opt)
    return report.verdict, report.elapsed, report.max_abs_delta


def format_report(cfg: BenchmarkConfig, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for i, (verdict, secs, mad) in enumerate(rows):
        w.writerow([i, verdict, f"{secs:.3f}" if cfg.timing else "", repr(mad)])
    verified = sum(r[0] == "Proved" for r in rows)
    avg = f"{sum(r[1] for r in rows) / len(rows):.3f}" if cfg.timing else ""
    buf.write(f"#summary,{verified},{len(rows)},{avg}\n")
    return buf.getvalue()


def run_benchmark(cfg: BenchmarkConfig) -> Path:
    """Verify ``cfg.instances`` pairs and write the CSV report."""
    items = [(cfg, i) for i in range(cfg.instances)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_bench_instance, items))
    else:
        rows = [_bench_instance(it) for it in items]
    out = Path(cfg.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(format_report(cfg, rows))
    return out


def read_summary(path) -> tuple[int, int]:
    for line in Path(path).read_text().splitlines():
        if line.startswith("#summary,"):
            _, verified, total, _ = line.split(",")
            return int(verified), int(total)
    raise ValueError(f"no summary line in {path}")


# ---------------------------------------------------------------------------
# argparse glue
# ---------------------------------------------------------------------------

def parse_box(text: str) -> Box:
    """Parse ``"x,lo,hi;dx,lo,hi;y,lo,hi;dy,lo,hi"`` (names optional, any order)."""
    parts = [p for p in text.split(";") if p.strip()]
    if len(parts) != 4:
        raise UsageError("box needs exactly four 'name,lo,hi' entries")
    dims = {}
    for k, part in enumerate(parts):
        items = [s.strip() for s in part.split(",")]
        if len(items) == 2:
            items = [VARS[k], *items]
        if len(items) != 3 or items[0] not in VARS:
            raise UsageError(f"bad box entry {part!r}")
        try:
            dims[items[0]] = Interval(float(items[1]), float(items[2]))
        except ValueError as exc:
            raise UsageError(f"bad box entry {part!r}: {exc}") from None
    if set(dims) != set(VARS):
        raise UsageError(f"box must name each of {VARS}")
    return Box(tuple(dims[v] for v in VARS))


def _parse_range(text: str) -> Interval:
    lo, hi = (float(v) for v in text.split(","))
    return Interval(lo, hi)


def _cmd_verify(args) -> int:
    center = None
    if args.input:
        center = np.asarray(json.loads(Path(args.input).read_text()), dtype=np.float64)
    region = RegionSpec.parse(args.region, seed=args.seed)
    report, code = run_verify(args.net_a, args.net_b, region, args.epsilon, args.deadline,
                              center, args.jobs, _parse_range(args.input_range))
    print(report.summary())
    return code


def _cmd_bench(args) -> int:
    cfg = BenchmarkConfig.from_file(args.config)
    out = run_benchmark(cfg)
    verified, total = read_summary(out)
    print(f"{verified}/{total} verified; report written to {out}")
    return EXIT_PROVED if verified == total else EXIT_UNKNOWN


def _cmd_gen(args) -> int:
    spec = ArchSpec.parse(args.arch, inputs=args.inputs, outputs=args.outputs,
                          activation=Activation(args.activation))
    net = generate_network(spec, args.seed)
    save_network(net, args.out)
    print(f"wrote {args.out}")
    if args.quantize_out:
        save_network(quantize_weights(net), args.quantize_out)
        print(f"wrote {args.quantize_out}")
    return 0


def _cmd_bounds(args) -> int:
    kind = SurfaceKind(args.surface)
    box = parse_box(args.box)
    ext = de_extremize(kind, box, OptParams(seed=args.seed))
    print(f"candidate: [{ext.min:.12g}, {ext.max:.12g}]")
    print(f"argmin: {ext.argmin.tolist()}")
    print(f"argmax: {ext.argmax.tolist()}")
    params = ValidatorParams(delta=args.delta)
    try:
        proved = validate_and_adjust(kind, box, Interval(ext.min, ext.max), params)
    except ValidationError as exc:
        print(f"validation failed: {exc}")
        return EXIT_UNKNOWN
    print(f"validated (up to delta={params.delta:g}): [{proved.lo:.12g}, {proved.hi:.12g}]")
    return EXIT_PROVED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diffnn", description="Differential verification of neural networks.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="verify one pair of networks")
    v.add_argument("--net-a", required=True)
    v.add_argument("--net-b", required=True)
    v.add_argument("--region", default="global:0.01",
                   help="global:FRACTION | targeted:COUNT | file:PATH (default global:0.01)")
    v.add_argument("--seed", type=int, default=0, help="seed for base input and targeted picks")
    v.add_argument("--input", help="JSON list with the base input (default: seeded sample)")
    v.add_argument("--input-range", default="-1,1")
    v.add_argument("--epsilon", type=float, required=True)
    v.add_argument("--deadline", type=float, default=DEFAULT_DEADLINE, help="seconds")
    v.add_argument("--jobs", type=int, default=1)
    v.set_defaults(func=_cmd_verify)

    b = sub.add_parser("bench", help="run a benchmark sweep from a JSON config")
    b.add_argument("--config", required=True)
    b.set_defaults(func=_cmd_bench)

    g = sub.add_parser("gen", help="generate a random network (and its binary16 twin)")
    g.add_argument("--arch", required=True, help="e.g. rnn:4x8, lstm:3x4, ffnn:3x16")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--inputs", type=int, default=4)
    g.add_argument("--outputs", type=int, default=3)
    g.add_argument("--activation", default="tanh", choices=[a.value for a in Activation])
    g.add_argument("--out", required=True)
    g.add_argument("--quantize-out")
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("bounds", help="optimise and validate one LSTM surface over a box")
    s.add_argument("--surface", required=True, choices=[k.value for k in SurfaceKind])
    s.add_argument("--box", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--delta", type=float, default=ValidatorParams.delta)
    s.set_defaults(func=_cmd_bounds)
    return p


def _setup_logging():
    level = os.environ.get("DIFFNN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, NetworkFormatError, StructuralMismatchError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
