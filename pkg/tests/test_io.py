"""Round trips and corruption handling for the binary formats."""

import io as stdio
import struct

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from mtnr import io as mio
from mtnr.network import MtnrModel, RankMatrix, TnComponent

RNG = np.random.default_rng(5150)


def small_component(rng):
    ranks = RankMatrix(3)
    ranks.set_bond(0, 1, 2)
    ranks.set_bond(1, 2, 3)
    factors = [rng.standard_normal([4 if j == k else ranks.bond(j, k) for j in range(3)])
               for k in range(3)]
    return TnComponent(factors, ranks, max_connections=3)


def test_dnt_round_trip(tmp_path):
    t = RNG.standard_normal((3, 5, 2, 4))
    path = tmp_path / "t.dnt"
    mio.write_dnt(path, t)
    assert_array_equal(mio.read_dnt(path), t)


def test_dnt_layout_is_little_endian_flat():
    t = np.arange(24, dtype=float).reshape((2, 3, 4), order="F")
    raw = mio.roundtrip_bytes(mio.write_dnt, t)
    assert raw[:4] == b"DNT1"
    order, d0, d1, d2 = struct.unpack("<4I", raw[4:20])
    assert (order, d0, d1, d2) == (3, 2, 3, 4)
    values = np.frombuffer(raw[20:], dtype="<f8")
    assert_array_equal(values, np.arange(24, dtype=float))


def test_dnt_corruption_detected():
    t = RNG.standard_normal((2, 2))
    raw = mio.roundtrip_bytes(mio.write_dnt, t)
    with pytest.raises(mio.FormatError):
        mio.read_dnt(stdio.BytesIO(b"XXXX" + raw[4:]))
    with pytest.raises(mio.FormatError):
        mio.read_dnt(stdio.BytesIO(raw[:-8]))  # truncated payload


def test_tnc_round_trip(tmp_path):
    c = small_component(RNG)
    path = tmp_path / "c.tnc"
    mio.write_tnc(path, c)
    back = mio.read_tnc(path)
    assert back.order == c.order
    assert back.max_connections == c.max_connections
    assert back.ranks == c.ranks
    for f, g in zip(back.factors, c.factors):
        assert_array_equal(f, g)


def test_tnc_rejects_inconsistent_payload():
    c = small_component(RNG)
    raw = bytearray(mio.roundtrip_bytes(mio.write_tnc, c))
    # corrupt one bond entry of the stored table: factors no longer match
    raw[12:16] = struct.pack("<I", 5)
    with pytest.raises(mio.FormatError):
        mio.read_tnc(stdio.BytesIO(bytes(raw)))


def test_mtnr_round_trip(tmp_path):
    model = MtnrModel([small_component(RNG), small_component(RNG)])
    path = tmp_path / "m.mtnr"
    mio.write_mtnr(path, model)
    back = mio.read_mtnr(path)
    assert back.target_dims == model.target_dims
    assert len(back.components) == 2
    for a, b in zip(back.components, model.components):
        assert a.ranks == b.ranks
        for f, g in zip(a.factors, b.factors):
            assert_array_equal(f, g)


def test_mtnr_magic_checked():
    model = MtnrModel([small_component(RNG)])
    raw = mio.roundtrip_bytes(mio.write_mtnr, model)
    with pytest.raises(mio.FormatError):
        mio.read_mtnr(stdio.BytesIO(b"NOPE" + raw[4:]))


def test_msk_round_trip(tmp_path):
    mask = RNG.random((5, 7, 3)) < 0.3
    path = tmp_path / "m.msk"
    mio.write_msk(path, mask)
    assert_array_equal(mio.read_msk(path), mask)


def test_msk_bit_packing():
    # 9 entries: second byte holds only the last bit
    mask = np.array([1, 0, 1, 1, 0, 0, 0, 1, 1], dtype=bool).reshape((9, 1))
    raw = mio.roundtrip_bytes(mio.write_msk, mask)
    assert raw[:4] == b"MSK1"
    assert raw[4:16] == struct.pack("<3I", 2, 9, 1)
    assert raw[16:] == bytes([0b10001101, 0b00000001])


def test_msk_requires_bool():
    with pytest.raises(ValueError):
        mio.write_msk(stdio.BytesIO(), np.zeros((2, 2)))


def test_png_round_trip(tmp_path):
    img = RNG.random((6, 5, 3))
    path = tmp_path / "img.png"
    mio.write_png(path, img)
    back = mio.read_png(path)
    assert back.shape == (6, 5, 3)
    # 8-bit quantization: half a step at most
    assert np.abs(back - img).max() <= 0.5 / 255.0 + 1e-12
