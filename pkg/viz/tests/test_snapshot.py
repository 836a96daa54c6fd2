import struct

import numpy as np
import pytest

from peridyn_viz.snapshot import Snapshot, SnapshotError, read_convergence_csv, read_snapshot


def write_raw(path, n, a, b, time, values):
    with open(path, "wb") as fh:
        fh.write(struct.pack("<6sqddd", b"PDFLD1", n, a, b, time))
        fh.write(np.asarray(values, dtype="<f8").tobytes())


class TestReadSnapshot:
    def test_parses_hand_written_file(self, tmp_path):
        rng = np.random.default_rng(3)
        vals = rng.standard_normal((6, 6))
        path = tmp_path / "f.pdfld"
        write_raw(path, 6, -0.25, 1.25, 3.5, vals)
        snap = read_snapshot(path)
        assert (snap.n, snap.a, snap.b, snap.time) == (6, -0.25, 1.25, 3.5)
        assert np.array_equal(snap.values, vals)

    def test_row_major_orientation(self, tmp_path):
        # values[i, j]: i walks x1; the first row of the file is x1 = a
        vals = np.arange(16.0).reshape(4, 4)
        path = tmp_path / "o.pdfld"
        write_raw(path, 4, 0.0, 1.0, 0.0, vals)
        snap = read_snapshot(path)
        assert snap.values[1, 2] == 6.0

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.pdfld"
        path.write_bytes(b"XXFLD1" + b"\0" * 100)
        with pytest.raises(SnapshotError):
            read_snapshot(path)

    def test_truncated_payload_rejected(self, tmp_path):
        path = tmp_path / "short.pdfld"
        write_raw(path, 4, 0.0, 1.0, 0.0, np.zeros((4, 4)))
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(SnapshotError):
            read_snapshot(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        path = tmp_path / "long.pdfld"
        write_raw(path, 4, 0.0, 1.0, 0.0, np.zeros((4, 4)))
        path.write_bytes(path.read_bytes() + b"\0")
        with pytest.raises(SnapshotError):
            read_snapshot(path)

    def test_inconsistent_count_rejected(self):
        with pytest.raises(SnapshotError):
            Snapshot(4, 0.0, 1.0, 0.0, np.zeros((3, 3)))

    def test_axis_points_exclude_right_endpoint(self, tmp_path):
        path = tmp_path / "g.pdfld"
        write_raw(path, 4, 0.0, 1.0, 0.0, np.zeros((4, 4)))
        snap = read_snapshot(path)
        assert list(snap.axis_points()) == [0.0, 0.25, 0.5, 0.75]


class TestReadConvergenceCsv:
    def test_parses_rates_and_blanks(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("resolution,error,rate\n0.2,0.5,\n0.1,0.1,2.3219\n")
        rows = read_convergence_csv(path)
        assert rows[0] == (0.2, 0.5, None)
        assert rows[1] == (0.1, 0.1, 2.3219)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("res,err\n1,2\n")
        with pytest.raises(SnapshotError):
            read_convergence_csv(path)

    def test_empty_table_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("resolution,error,rate\n")
        with pytest.raises(SnapshotError):
            read_convergence_csv(path)

    def test_malformed_row_rejected(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("resolution,error,rate\n0.2,half,\n")
        with pytest.raises(SnapshotError):
            read_convergence_csv(path)
