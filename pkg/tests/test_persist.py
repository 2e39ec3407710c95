import numpy as np
import pytest

from fneq.clustering import ClusteringParams
from fneq.core import Dataset
from fneq.errors import CorruptionError
from fneq.neq import scan_scores, select_top_k, train_index
from fneq.persist import MAGIC, load_index, save_index

from conftest import make_mips_data


def trained(mode, m, m_prime, seed, n=80, dim=12, k_star=8):
    data = Dataset(make_mips_data(n, dim, seed=seed))
    return train_index(data, mode, m, m_prime, k_star, ClusteringParams(seed=seed))


class TestRoundTrip:
    @pytest.mark.parametrize(
        "mode,m,m_prime",
        [("pq", 3, 0), ("rq", 2, 0), ("neq_kmeans", 4, 1), ("fuzzy2_neq", 3, 1)],
    )
    def test_artifact_survives_roundtrip(self, tmp_path, mode, m, m_prime):
        index = trained(mode, m, m_prime, seed=3)
        path = tmp_path / "index.fneq"
        save_index(path, index)
        loaded = load_index(path)
        assert loaded.mode == index.mode
        assert loaded.metadata == index.metadata.__class__(
            **{**index.metadata.__dict__, "params": None}
        )
        np.testing.assert_array_equal(loaded.codes.codes, index.codes.codes)
        for a, b in zip(loaded.dir_codebooks, index.dir_codebooks):
            np.testing.assert_array_equal(a.codewords, b.codewords)
        for a, b in zip(loaded.norm_codebooks, index.norm_codebooks):
            np.testing.assert_array_equal(a.values, b.values)
            assert a.signed == b.signed

    def test_rankings_bit_identical_across_roundtrip(self, tmp_path):
        rng = np.random.default_rng(7)
        for seed, (mode, m, mp) in enumerate(
            [("pq", 2, 0), ("neq_kmeans", 3, 1), ("fuzzy2_neq", 3, 1), ("rq", 2, 0), ("neq_kmeans", 5, 2)]
        ):
            index = trained(mode, m, mp, seed=seed + 20)
            path = tmp_path / f"{seed}.fneq"
            save_index(path, index)
            loaded = load_index(path)
            for _ in range(5):
                q = rng.normal(size=12)
                s_orig, s_load = scan_scores(q, index), scan_scores(q, loaded)
                np.testing.assert_array_equal(s_orig, s_load)
                np.testing.assert_array_equal(
                    select_top_k(s_orig, 10), select_top_k(s_load, 10)
                )

    def test_file_size_matches_layout(self, tmp_path):
        index = trained("neq_kmeans", 3, 1, seed=5, n=50, dim=8, k_star=8)
        path = tmp_path / "index.fneq"
        save_index(path, index)
        d_star = 8 // 2
        expected = 51 + 8 * 4 + 2 * (8 * d_star * 4) + 3 * 50 * 1
        assert path.stat().st_size == expected

    def test_u16_codes_roundtrip(self, tmp_path):
        index = trained("pq", 2, 0, seed=6, n=400, dim=8, k_star=300)
        path = tmp_path / "wide.fneq"
        save_index(path, index)
        loaded = load_index(path)
        np.testing.assert_array_equal(loaded.codes.codes, index.codes.codes)


class TestCorruption:
    def make_file(self, tmp_path):
        index = trained("neq_kmeans", 3, 1, seed=8, n=40, dim=8)
        path = tmp_path / "index.fneq"
        save_index(path, index)
        return path

    def test_bad_magic(self, tmp_path):
        path = self.make_file(tmp_path)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"WAT!"
        path.write_bytes(raw)
        with pytest.raises(CorruptionError, match="magic"):
            load_index(path)

    def test_bad_version(self, tmp_path):
        path = self.make_file(tmp_path)
        raw = bytearray(path.read_bytes())
        raw[4:6] = (9).to_bytes(2, "little")
        path.write_bytes(raw)
        with pytest.raises(CorruptionError, match="version"):
            load_index(path)

    def test_truncated_payload(self, tmp_path):
        path = self.make_file(tmp_path)
        raw = path.read_bytes()
        path.write_bytes(raw[:-10])
        with pytest.raises(CorruptionError, match="truncated"):
            load_index(path)

    def test_trailing_garbage(self, tmp_path):
        path = self.make_file(tmp_path)
        path.write_bytes(path.read_bytes() + b"\x00\x01")
        with pytest.raises(CorruptionError, match="trailing"):
            load_index(path)

    def test_nonzero_reserved(self, tmp_path):
        path = self.make_file(tmp_path)
        raw = bytearray(path.read_bytes())
        raw[40] = 1
        path.write_bytes(raw)
        with pytest.raises(CorruptionError, match="reserved"):
            load_index(path)

    def test_out_of_range_code(self, tmp_path):
        path = self.make_file(tmp_path)
        raw = bytearray(path.read_bytes())
        raw[-1] = 255  # codes are the final section; k_star is 8
        path.write_bytes(raw)
        with pytest.raises(CorruptionError, match="validation"):
            load_index(path)

    def test_header_only_file(self, tmp_path):
        path = tmp_path / "short.fneq"
        path.write_bytes(MAGIC)
        with pytest.raises(CorruptionError, match="shorter"):
            load_index(path)
