import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from sslab import extdyn, io, qdyn, vnalg
from sslab.maxwell import fields as F
from sslab.maxwell.lattice import LatticeGeometry
from sslab.systems import SystemSpec

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


class TestMatrixText:
    def test_parse(self):
        M = io.parse_matrix("2\n1+0i 0-1.5i\n# comment\n2.5+3i -1-1i\n")
        np.testing.assert_array_equal(M, [[1, -1.5j], [2.5 + 3j, -1 - 1j]])

    def test_feeds_commutant(self, tmp_path):
        path = tmp_path / "diag.txt"
        io.write_matrix(path, np.diag([1.0, 2.0]))
        assert vnalg.commutant([io.read_matrix(path)]).dim == 2

    @pytest.mark.parametrize("text", ["", "x\n1+0i\n", "2\n1+0i 2+0i\n", "1\n1+0i 2+0i\n", "1\nabc\n"])
    def test_malformed(self, text):
        with pytest.raises(io.FormatError):
            io.parse_matrix(text)

    @given(hnp.arrays(complex, st.tuples(st.integers(1, 5)).map(lambda s: (s[0], s[0])),
                      elements=st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False)))
    def test_round_trip(self, M):
        np.testing.assert_array_equal(io.parse_matrix(io.format_matrix(M)), M)


class TestWavefunction:
    def test_grid_round_trip(self, tmp_path):
        wf = qdyn.gaussian_state(qdyn.Grid(32, 10.0, 2), [0.5, -0.5], 1.0, [0.3, 0.0])
        io.save_grid_wavefunction(tmp_path / "wf.bin", wf)
        back = io.load_grid_wavefunction(tmp_path / "wf.bin")
        assert back.grid == wf.grid
        np.testing.assert_array_equal(back.psi, wf.psi)

    def test_layout(self, tmp_path):
        psi = np.array([1 + 2j, 3 - 4j])
        io.write_wavefunction(tmp_path / "w.bin", psi, [(2, 5.0)])
        raw = (tmp_path / "w.bin").read_bytes()
        assert raw[:4] == b"SSWF"
        assert len(raw) == 4 + 8 + 12 + 32
        np.testing.assert_array_equal(np.frombuffer(raw[24:], "<f8"), [1, 2, 3, -4])

    def test_truncated(self, tmp_path):
        io.write_wavefunction(tmp_path / "w.bin", np.ones(4, complex), [(4, 1.0)])
        (tmp_path / "t.bin").write_bytes((tmp_path / "w.bin").read_bytes()[:-8])
        with pytest.raises(io.FormatError):
            io.read_wavefunction(tmp_path / "t.bin")

    def test_wrong_magic(self, tmp_path):
        (tmp_path / "x.bin").write_bytes(b"NOPE" + bytes(16))
        with pytest.raises(io.FormatError):
            io.read_wavefunction(tmp_path / "x.bin")

    def test_shape_mismatch(self, tmp_path):
        with pytest.raises(ValueError):
            io.write_wavefunction(tmp_path / "w.bin", np.ones(4, complex), [(5, 1.0)])


def test_field_snapshot_round_trip(tmp_path):
    geo = LatticeGeometry(radius=3)
    state, ch = F.initial_state(geo, F.central_charge(geo))
    io.save_field_snapshot(tmp_path / "s.bin", state, ch)
    back = io.read_snapshot(tmp_path / "s.bin")
    np.testing.assert_array_equal(back["E"], state.E)
    np.testing.assert_array_equal(back["f_lm"], ch.f)
    assert back["t"][0] == state.t


def test_snapshot_trailing_bytes(tmp_path):
    io.write_snapshot(tmp_path / "s.bin", {"a": np.arange(3.0)})
    with open(tmp_path / "s.bin", "ab") as fh:
        fh.write(b"\0")
    with pytest.raises(io.FormatError):
        io.read_snapshot(tmp_path / "s.bin")


@given(st.lists(st.lists(finite, min_size=3, max_size=3), min_size=1, max_size=10))
def test_csv_round_trip_is_exact(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("csv") / "t.csv"
    io.write_csv(path, ["a", "b", "c"], rows)
    header, data = io.read_csv(path)
    assert header == ["a", "b", "c"]
    np.testing.assert_array_equal(data, np.array(rows, dtype=float))


def test_trajectory_csv(tmp_path):
    s0 = extdyn.ExtendedState([[0.0, 1.0]], [[0.5, 0.0]], [0.0], [2.0])
    traj = extdyn.integrate(s0, SystemSpec([2.0], 2), 0.1, 0.05)
    io.write_trajectory_csv(tmp_path / "traj.csv", traj)
    header, data = io.read_csv(tmp_path / "traj.csv")
    assert header == ["t", "x_0_x", "x_0_y", "p_0_x", "p_0_y", "lambda_0", "m_0"]
    np.testing.assert_array_equal(data[:, 5], traj.lam[:, 0])
    assert np.all(data[:, 6] == 2.0)
