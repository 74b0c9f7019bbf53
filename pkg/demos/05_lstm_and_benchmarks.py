"""LSTM verification and a small benchmark sweep.

The sweep writes a CSV with one row per instance and a closing summary line,
the same output the `diffnn bench` subcommand produces.
"""

import tempfile
from pathlib import Path

import numpy as np

from diffnn import ArchSpec, InputRegion, diff_weights, generate_network, quantize_weights, verify
from diffnn.cli import BenchmarkConfig, run_benchmark

net = generate_network(ArchSpec.parse("lstm:2x3"), seed=4)
pair = diff_weights(net, quantize_weights(net))
region = InputRegion.from_center(np.zeros(net.dims.n_inputs), 0.02)
report = verify(pair, region, epsilon=0.1)
print(report.summary())
for row in report.diagnostics:
    print("  ", row)

with tempfile.TemporaryDirectory() as tmp:
    out = run_benchmark(BenchmarkConfig(arch="rnn:4x8", instances=5, epsilon=1.0,
                                        output=str(Path(tmp) / "report.csv")))
    print(out.read_text())
