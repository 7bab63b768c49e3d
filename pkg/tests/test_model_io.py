"""Model initialization and binary round-tripping."""

import numpy as np
import pytest

from layoutdiff.nn.model import DEFAULT_HYPER, MAGIC, Model


def test_init_is_deterministic():
    a = Model.init(5)
    b = Model.init(5)
    assert a.to_bytes() == b.to_bytes()


def test_different_seeds_differ():
    assert Model.init(1).to_bytes() != Model.init(2).to_bytes()


def test_parameter_census():
    m = Model.init(0)
    names = [p.name for p in m.parameters()]
    assert len(names) == 25
    assert len(set(names)) == 25
    assert m.num_values == 63857


def test_init_bounds_follow_fan_in():
    m = Model.init(3)
    w = m.param("enc.text.w").data  # fan-in 128
    bound = 1.0 / np.sqrt(128)
    assert np.abs(w).max() <= bound
    assert np.abs(w).max() > bound * 0.9  # seeded uniform fills the range


def test_round_trip_bit_identical():
    m = Model.init(11)
    blob = m.to_bytes()
    again = Model.from_bytes(blob)
    assert again.to_bytes() == blob
    assert again.hyper == m.hyper
    for p, q in zip(m.parameters(), again.parameters()):
        assert p.name == q.name
        assert p.tensor.data.tobytes() == q.tensor.data.tobytes()


def test_file_round_trip(tmp_path):
    m = Model.init(4)
    path = tmp_path / "m.lgm"
    m.save(path)
    assert Model.load(path).to_bytes() == m.to_bytes()


def test_hyper_overrides_survive_round_trip():
    m = Model.init(0, {"tau": 0.3, "K": 3})
    again = Model.from_bytes(m.to_bytes())
    assert again.hyper["tau"] == 0.3
    assert again.hyper["K"] == 3
    assert again.hyper["node_dim"] == DEFAULT_HYPER["node_dim"]


def test_loaded_parameters_are_trainable():
    m = Model.from_bytes(Model.init(0).to_bytes())
    assert all(p.tensor.requires_grad for p in m.parameters())


def test_truncated_file_rejected():
    blob = Model.init(0).to_bytes()
    with pytest.raises(ValueError, match="truncated model file"):
        Model.from_bytes(blob[: len(blob) // 2])


def test_bad_magic_rejected():
    blob = b"XXXX" + Model.init(0).to_bytes()[4:]
    with pytest.raises(ValueError, match="bad magic"):
        Model.from_bytes(blob)


def test_unsupported_version_rejected():
    blob = bytearray(Model.init(0).to_bytes())
    blob[4] = 99
    with pytest.raises(ValueError, match="version"):
        Model.from_bytes(bytes(blob))


def test_trailing_bytes_rejected():
    blob = Model.init(0).to_bytes() + b"\x00"
    with pytest.raises(ValueError, match="trailing bytes"):
        Model.from_bytes(blob)


def test_magic_prefix():
    assert Model.init(0).to_bytes()[:4] == MAGIC


def test_zero_grad_clears_all():
    m = Model.init(0)
    for p in m.parameters():
        p.tensor.grad = np.ones_like(p.tensor.data)
    m.zero_grad()
    assert all(p.tensor.grad is None for p in m.parameters())
