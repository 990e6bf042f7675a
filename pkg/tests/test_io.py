import numpy as np
import pytest

from bcns.io import SnapshotError, read_snapshot, write_snapshot
from bcns.spectral import forward_transform, make_grid


def _random_field(grid, seed, vector=False):
    rng = np.random.default_rng(seed)
    shape = (grid.d,) + grid.shape if vector else grid.shape
    return forward_transform(rng.standard_normal(shape), grid)


def test_round_trip_scalar_bit_exact(tmp_path):
    g = make_grid(2, 16)
    f = _random_field(g, 0)
    path = tmp_path / "a.snap"
    write_snapshot(path, f, t=0.1 + 1e-17)
    back, t = read_snapshot(path)
    assert t == 0.1 + 1e-17
    assert back.grid == g
    assert np.array_equal(back.coeffs, f.coeffs)


def test_round_trip_vector_bit_exact(tmp_path):
    g = make_grid(3, 8)
    f = _random_field(g, 1, vector=True)
    path = tmp_path / "v.snap"
    write_snapshot(path, f, t=2.25)
    back, t = read_snapshot(path)
    assert t == 2.25
    assert back.is_vector and back.ncomp == 3
    assert np.array_equal(back.coeffs, f.coeffs)

    # file bytes are reproducible
    path2 = tmp_path / "v2.snap"
    write_snapshot(path2, f, t=2.25)
    assert path.read_bytes() == path2.read_bytes()


def test_header_format(tmp_path):
    g = make_grid(2, 16)
    f = _random_field(g, 2)
    path = tmp_path / "h.snap"
    write_snapshot(path, f, t=0.5)
    first = path.read_bytes().split(b"\n", 1)[0]
    assert first == b"BCNS1 2 16 1 0.5"


def test_header_handles_numpy_scalar_time(tmp_path):
    g = make_grid(2, 16)
    f = _random_field(g, 2)
    path = tmp_path / "h.snap"
    write_snapshot(path, f, t=np.float64(0.1))
    first = path.read_bytes().split(b"\n", 1)[0]
    assert first == b"BCNS1 2 16 1 0.1"
    _, t = read_snapshot(path)
    assert t == 0.1


@pytest.mark.parametrize("mangle", [
    lambda b: b"XXXX1" + b[5:],                       # magic
    lambda b: b.replace(b"BCNS1 2 16 1", b"BCNS1 2 16 7", 1),  # bad rank
    lambda b: b[:40],                                 # truncated payload
    lambda b: b + b"\x00",                            # trailing bytes
])
def test_corrupt_snapshots_rejected(tmp_path, mangle):
    g = make_grid(2, 16)
    f = _random_field(g, 3)
    path = tmp_path / "c.snap"
    write_snapshot(path, f, t=0.0)
    (tmp_path / "bad.snap").write_bytes(mangle(path.read_bytes()))
    with pytest.raises(SnapshotError):
        read_snapshot(tmp_path / "bad.snap")
