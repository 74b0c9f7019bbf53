import json
import math

import numpy as np
import pytest

from diffnn.netmodel import (Activation, ArchSpec, Dims, Network, NetworkFormatError,
                             StructuralMismatchError, diff_weights, dumps_network, forward,
                             generate_network, load_network, loads_network, quantize_weights,
                             save_network, to_float16)
from oracles import float16_oracle


def _minimal_doc():
    return {
        "format_version": 1, "arch": "rnn", "activation": "sigmoid",
        "dims": {"input": 1, "hidden": 1, "output": 1, "steps": 1},
        "weights": {"W_hh": [[0.0]], "W_hx": [[0.0]], "b_h": [[0.0]],
                    "W_hy": [[0.0]], "b_y": [[0.0]]},
        "h0": [0.0],
    }


class TestFormat:
    def test_minimal(self):
        net = loads_network(json.dumps(_minimal_doc()))
        assert net.dims.hidden == 1 and net.dims.input == 1
        assert net.activation is Activation.SIGMOID

    def test_wrong_shape(self):
        doc = _minimal_doc()
        doc["weights"]["W_hh"] = [[0.0, 1.0]]
        with pytest.raises(NetworkFormatError, match="dimension mismatch"):
            loads_network(json.dumps(doc))

    @pytest.mark.parametrize("patch", [
        {"format_version": 7}, {"arch": "gru"}, {"activation": "relu"}, {"dims": None}])
    def test_bad_header(self, patch):
        doc = _minimal_doc()
        doc.update(patch)
        with pytest.raises(NetworkFormatError):
            loads_network(json.dumps(doc))

    def test_missing_weight(self):
        doc = _minimal_doc()
        del doc["weights"]["b_y"]
        with pytest.raises(NetworkFormatError, match="missing"):
            loads_network(json.dumps(doc))

    def test_parse_error(self):
        with pytest.raises(NetworkFormatError):
            loads_network("{not json")

    def test_non_finite(self):
        doc = _minimal_doc()
        text = json.dumps(doc).replace('"W_hh": [[0.0]]', '"W_hh": [[NaN]]')
        with pytest.raises(NetworkFormatError):
            loads_network(text)

    @pytest.mark.parametrize("arch", ["ffnn:3x16", "rnn:4x8", "lstm:3x4"])
    def test_round_trip_bytes(self, arch, tmp_path):
        net = generate_network(ArchSpec.parse(arch), 11)
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_network(net, p1)
        save_network(load_network(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert load_network(p2).same_values(net)

    def test_quantized_round_trip(self, tmp_path):
        net = quantize_weights(generate_network(ArchSpec.parse("rnn:2x3"), 5))
        save_network(net, tmp_path / "q.json")
        assert dumps_network(load_network(tmp_path / "q.json")) == dumps_network(net)

    def test_weights_read_only(self, rnn48):
        with pytest.raises(ValueError):
            rnn48["W_hh"][0, 0] = 1.0


class TestQuantize:
    def test_examples(self):
        assert to_float16(0.1) == 0.0999755859375
        assert to_float16(0.5) == 0.5
        third = float(to_float16(1.0 / 3.0))
        assert third == 0.333251953125
        assert abs(third - 1 / 3) <= 2.0**-11 * (1 / 3)

    def test_idempotent(self, rng):
        v = rng.normal(size=1000)
        q = to_float16(v)
        np.testing.assert_array_equal(to_float16(q), q)

    def test_matches_oracle(self, rng):
        v = np.concatenate([rng.normal(size=500), rng.uniform(-1e-5, 1e-5, 200)])
        q = to_float16(v)
        assert all(float(a) == float16_oracle(float(b)) for a, b in zip(q, v))

    def test_clamps_overflow(self, caplog):
        with caplog.at_level("WARNING"):
            out = to_float16([1e6, -7e4])
        np.testing.assert_array_equal(out, [65504.0, -65504.0])
        assert "clamped" in caplog.text

    def test_quantize_network(self, rnn48):
        q = quantize_weights(rnn48)
        assert q.arch == rnn48.arch and q.dims == rnn48.dims
        for k, w in q.weights.items():
            np.testing.assert_array_equal(w, to_float16(rnn48[k]))


class TestGenerate:
    def test_deterministic(self):
        spec = ArchSpec.parse("rnn:4x8")
        assert generate_network(spec, 1).same_values(generate_network(spec, 1))
        assert not generate_network(spec, 1).same_values(generate_network(spec, 2))

    def test_weight_range(self):
        net = generate_network(ArchSpec.parse("rnn:4x8"), 0)
        bound = 1 / math.sqrt(8)
        for w in net.weights.values():
            assert np.all(np.abs(w) <= bound)

    def test_float32_representable(self, lstm34):
        for w in lstm34.weights.values():
            np.testing.assert_array_equal(w.astype(np.float32).astype(np.float64), w)

    def test_shapes(self):
        net = generate_network(ArchSpec.parse("ffnn:3x16", inputs=5, outputs=2), 0)
        assert net["W_1"].shape == (16, 5) and net["W_4"].shape == (2, 16)
        assert net.n_layers == 4
        lstm = generate_network(ArchSpec.parse("lstm:3x4", activation=Activation.TANH), 0)
        assert lstm.activation is Activation.SIGMOID

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            ArchSpec.parse("gru:2x2")


class TestDiff:
    def test_self_diff_zero(self, rnn48):
        dn = diff_weights(rnn48, rnn48)
        assert dn.is_zero()
        assert all(not np.any(dn.delta(k)) for k in rnn48.weights)

    def test_quantized_delta_bound(self, rnn48):
        dn = diff_weights(rnn48, quantize_weights(rnn48))
        wmax = max(float(np.abs(w).max()) for w in rnn48.weights.values())
        # half a binary16 ulp at the largest magnitude
        e = math.floor(math.log2(wmax))
        bound = 2.0 ** (e - 11)
        assert max(float(np.abs(dn.delta(k)).max()) for k in rnn48.weights) <= bound

    def test_activation_mismatch(self):
        a = generate_network(ArchSpec.parse("rnn:2x3", activation=Activation.SIGMOID), 0)
        b = generate_network(ArchSpec.parse("rnn:2x3", activation=Activation.TANH), 0)
        with pytest.raises(StructuralMismatchError):
            diff_weights(a, b)

    def test_arch_mismatch(self, rnn48, lstm34):
        with pytest.raises(StructuralMismatchError):
            diff_weights(rnn48, lstm34)


class TestForward:
    def test_rnn_by_hand(self):
        w = {"W_hh": np.array([[0.5]]), "W_hx": np.array([[2.0]]), "b_h": np.array([0.1]),
             "W_hy": np.array([[3.0]]), "b_y": np.array([-1.0])}
        net = Network("rnn", Activation.TANH, Dims(1, 1, 1, 2), w)
        x = np.array([[0.3, -0.2]])
        h1 = math.tanh(2 * 0.3 + 0.1)
        h2 = math.tanh(0.5 * h1 + 2 * -0.2 + 0.1)
        assert forward(net, x)[0, 0] == pytest.approx(3 * h2 - 1, rel=1e-14)

    def test_input_length_checked(self, rnn48):
        with pytest.raises(ValueError):
            forward(rnn48, np.zeros((1, 3)))
