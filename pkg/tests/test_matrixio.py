import numpy as np
import pytest

from mkmc import matrixio
from mkmc.errors import FormatError
from mkmc.views import VisibilityPattern

from conftest import random_symmetric


class TestCsvFormat:
    def test_round_trip_exact(self, rng, tmp_path):
        a = random_symmetric(rng, 6)
        path = tmp_path / "m.csv"
        matrixio.write_csv_matrix(path, a)
        assert np.array_equal(matrixio.read_csv_matrix(path), a)

    def test_one_by_one(self, tmp_path):
        path = tmp_path / "m.csv"
        matrixio.write_csv_matrix(path, np.array([[3.25]]))
        out = matrixio.read_csv_matrix(path)
        assert out.shape == (1, 1) and out[0, 0] == 3.25

    def test_garbage_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\nfoo,bar\n")
        with pytest.raises(FormatError):
            matrixio.read_csv_matrix(path)


class TestBinaryFormat:
    def test_round_trip_exact(self, rng, tmp_path):
        a = random_symmetric(rng, 5)
        path = tmp_path / "m.mkm"
        matrixio.write_binary_matrix(path, a)
        assert np.array_equal(matrixio.read_binary_matrix(path), a)

    def test_header_layout(self, rng, tmp_path):
        a = random_symmetric(rng, 3)
        path = tmp_path / "m.mkm"
        matrixio.write_binary_matrix(path, a)
        raw = path.read_bytes()
        assert raw[:4] == b"MKMC"
        assert raw[4] == 1
        assert int.from_bytes(raw[5:9], "little") == 3
        assert int.from_bytes(raw[9:13], "little") == 3
        assert len(raw) == 13 + 8 * 9

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.mkm"
        path.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(FormatError):
            matrixio.read_binary_matrix(path)

    def test_truncated_payload(self, rng, tmp_path):
        a = random_symmetric(rng, 3)
        path = tmp_path / "m.mkm"
        matrixio.write_binary_matrix(path, a)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(FormatError):
            matrixio.read_binary_matrix(path)


class TestSniffing:
    def test_read_matrix_dispatches(self, rng, tmp_path):
        a = random_symmetric(rng, 4)
        csv_path = tmp_path / "a.csv"
        bin_path = tmp_path / "a.mkm"
        matrixio.write_matrix(csv_path, a)
        matrixio.write_matrix(bin_path, a)
        assert np.array_equal(matrixio.read_matrix(csv_path), a)
        assert np.array_equal(matrixio.read_matrix(bin_path), a)


class TestMaskFile:
    def test_round_trip(self, tmp_path):
        pat = VisibilityPattern(ell=6, hidden=((1, 3), ()))
        path = tmp_path / "mask.json"
        matrixio.write_mask(path, pat)
        assert matrixio.read_mask(path) == pat

    def test_invalid_mask(self, tmp_path):
        path = tmp_path / "mask.json"
        path.write_text('{"nope": 1}')
        with pytest.raises(FormatError):
            matrixio.read_mask(path)


class TestRunConfig:
    def test_valid_config(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(
            '{"method": "pca", "rank": {"criterion": "gk"}, "tol": 1e-8,'
            ' "inputs": ["a.csv"], "mask": "m.json", "output_dir": "out"}'
        )
        cfg = matrixio.load_run_config(path)
        assert cfg["method"] == "pca"

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"method": "fc", "bogus": 1}')
        with pytest.raises(FormatError):
            matrixio.load_run_config(path)

    def test_bad_method_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"method": "svd"}')
        with pytest.raises(FormatError):
            matrixio.load_run_config(path)
