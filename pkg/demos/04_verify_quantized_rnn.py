"""Certifying a compressed RNN.

Round every weight of a float32 RNN to binary16 and ask whether the outputs
can move by one unit or more anywhere in a small box around an input.
"""

import numpy as np

from diffnn import (ArchSpec, InputRegion, diff_weights, forward, generate_network,
                    naive_output_diff, quantize_weights, verify)

net = generate_network(ArchSpec.parse("rnn:4x8"), seed=0)
twin = quantize_weights(net)
pair = diff_weights(net, twin)

center = np.random.default_rng(1).uniform(-1, 1, net.dims.n_inputs)
region = InputRegion.from_center(center, 0.02)       # +-1% of the range [-1, 1]

report = verify(pair, region, epsilon=1.0)
print(report.summary())

naive = naive_output_diff(pair, region)
print("naive width / direct width per output:", np.round(naive.width / report.delta_y.width, 1))

xs = region.sample(2000, np.random.default_rng(2))
observed = forward(twin, xs) - forward(net, xs)
print("largest observed difference:", np.abs(observed).max())

# Comparing a network with itself is proved for any epsilon.
print("self-check:", verify(diff_weights(net, net), region, epsilon=1e-12).verdict)
