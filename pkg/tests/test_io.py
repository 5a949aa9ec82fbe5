import json
import struct

import numpy as np
import pytest

from proxpen.instances import gen_linconstr_qp, gen_simplex_qp
from proxpen.io import MAGIC, instance_bytes, load_instance, save_instance


def _same(a, b):
    for k in ("A", "B", "d", "b"):
        assert np.array_equal(getattr(a, k), getattr(b, k))
    assert (a.xi, a.tau, a.M, a.m, a.seed) == (b.xi, b.tau, b.M, b.m, b.seed)


def test_round_trip_is_bit_exact(tmp_path):
    inst = gen_simplex_qp(4, 12, 16777216.0, 16.0, seed=9)
    p = tmp_path / "a.pxpn"
    save_instance(p, inst)
    back = load_instance(p)
    _same(inst, back)
    assert instance_bytes(back) == p.read_bytes()


def test_round_trip_linconstr(tmp_path):
    inst = gen_linconstr_qp(3, 10, 2, 100.0, 1.0, seed=5)
    p = tmp_path / "c.pxpn"
    save_instance(p, inst)
    back = load_instance(p)
    _same(inst, back)
    for k in ("A_eq", "b_eq", "z_feas"):
        assert np.array_equal(getattr(inst, k), getattr(back, k))
    assert back.l_eq == 2


def test_layout(tmp_path):
    raw = instance_bytes(gen_simplex_qp(2, 5, 10.0, 1.0, seed=1))
    assert raw[:4] == MAGIC
    (size,) = struct.unpack("<Q", raw[4:12])
    header = json.loads(raw[12:12 + size])
    assert [s["name"] for s in header["sections"]] == ["A", "B", "d", "b"]
    assert len(raw) == 12 + size + 8 * (2 * 5 + 5 * 5 + 5 + 2)


def test_bad_magic(tmp_path):
    p = tmp_path / "x.pxpn"
    p.write_bytes(b"NOPE" + instance_bytes(gen_simplex_qp(2, 5, 10.0, 1.0, seed=1))[4:])
    with pytest.raises(ValueError):
        load_instance(p)


@pytest.mark.parametrize("edit", [lambda r: r + b"\0" * 8, lambda r: r[:-8]])
def test_trailing_or_missing_data(tmp_path, edit):
    p = tmp_path / "x.pxpn"
    p.write_bytes(edit(instance_bytes(gen_simplex_qp(2, 5, 10.0, 1.0, seed=1))))
    with pytest.raises(ValueError):
        load_instance(p)
