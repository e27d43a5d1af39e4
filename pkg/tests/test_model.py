"""Model initialization, cosine helpers, and vector-file serialization."""

import numpy as np
import pytest

from embda.model import (
    MODES,
    VectorFormatError,
    WordVectors,
    ZeroVectorError,
    cosine_rows,
    init_model,
    load_vectors,
    save_vectors,
    write_vectors,
)


class TestInitModel:
    @pytest.mark.parametrize("mode", MODES)
    def test_shapes_and_dtypes(self, small_vocab, mode):
        m = init_model(small_vocab, 8, mode, seed=3)
        assert m.input.shape == (5, 8) and m.input.dtype == np.float32
        assert m.output.shape == (5, 8) and m.output.dtype == np.float32

    def test_input_within_bounds(self, small_vocab):
        m = init_model(small_vocab, 16, "sg", seed=0)
        bound = 0.5 / 16
        assert np.all(np.abs(m.input) <= bound)
        assert np.any(m.input != 0)

    def test_output_starts_at_zero(self, small_vocab):
        m = init_model(small_vocab, 8, "cbow", seed=1)
        assert not m.output.any()

    def test_indicator_only_for_sg_di(self, small_vocab):
        assert init_model(small_vocab, 4, "sg-di").indicator is not None
        for mode in ("sg", "cbow", "cbow-da"):
            assert init_model(small_vocab, 4, mode).indicator is None

    def test_seed_determinism(self, small_vocab):
        a = init_model(small_vocab, 8, "sg", seed=9)
        b = init_model(small_vocab, 8, "sg", seed=9)
        c = init_model(small_vocab, 8, "sg", seed=10)
        np.testing.assert_array_equal(a.input, b.input)
        assert not np.array_equal(a.input, c.input)

    def test_validation(self, small_vocab):
        with pytest.raises(ValueError):
            init_model(small_vocab, 0, "sg")
        with pytest.raises(ValueError):
            init_model(small_vocab, 4, "nope")

    def test_check_finite(self, small_vocab):
        m = init_model(small_vocab, 4, "sg")
        m.check_finite()
        m.output[2, 1] = np.nan
        with pytest.raises(FloatingPointError, match="output"):
            m.check_finite()


class TestCosine:
    def test_identical_rows(self):
        mat = np.array([[1.0, 2.0], [1.0, 2.0]], dtype=np.float32)
        assert cosine_rows(mat, 0, 1) == pytest.approx(1.0)

    def test_orthogonal(self):
        mat = np.array([[1.0, 0.0], [0.0, 3.0]], dtype=np.float32)
        assert cosine_rows(mat, 0, 1) == pytest.approx(0.0)

    def test_forty_five_degrees(self):
        mat = np.array([[1.0, 0.0], [1.0, 1.0]], dtype=np.float32)
        assert cosine_rows(mat, 0, 1) == pytest.approx(1 / np.sqrt(2))

    def test_zero_vector(self):
        mat = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.float32)
        with pytest.raises(ZeroVectorError):
            cosine_rows(mat, 0, 1)


class TestVectorIO:
    def test_full_precision_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        mat = rng.standard_normal((4, 7)).astype(np.float32)
        path = tmp_path / "vecs.txt"
        write_vectors(["a", "b", "c", "d"], mat, path, full_precision=True)
        loaded = load_vectors(path)
        assert loaded.words == ["a", "b", "c", "d"]
        np.testing.assert_array_equal(loaded.matrix, mat)

    def test_default_precision_close(self, tmp_path):
        mat = np.array([[1 / 3, 2 / 3]], dtype=np.float32)
        path = tmp_path / "vecs.txt"
        write_vectors(["w"], mat, path)
        np.testing.assert_allclose(load_vectors(path).matrix, mat, rtol=1e-5)

    def test_header_format(self, tmp_path):
        path = tmp_path / "vecs.txt"
        write_vectors(["a", "b"], np.zeros((2, 3), dtype=np.float32), path)
        assert path.read_text().splitlines()[0] == "2 3"

    def test_save_model_matrices(self, small_vocab, tmp_path):
        m = init_model(small_vocab, 4, "sg-di", seed=2)
        for which in ("input", "output", "indicator"):
            save_vectors(m, which, tmp_path / f"{which}.txt", full_precision=True)
        loaded = load_vectors(tmp_path / "input.txt")
        np.testing.assert_array_equal(loaded.matrix, m.input)

    def test_save_unknown_matrix(self, small_vocab, tmp_path):
        m = init_model(small_vocab, 4, "sg")
        with pytest.raises(ValueError, match="unknown matrix"):
            save_vectors(m, "hidden", tmp_path / "x.txt")

    def test_save_missing_indicator(self, small_vocab, tmp_path):
        m = init_model(small_vocab, 4, "cbow")
        with pytest.raises(ValueError, match="no indicator"):
            save_vectors(m, "indicator", tmp_path / "x.txt")


class TestLoadVectorErrors:
    def _load(self, tmp_path, text):
        path = tmp_path / "bad.txt"
        path.write_text(text)
        return load_vectors(path)

    def test_malformed_header(self, tmp_path):
        with pytest.raises(VectorFormatError, match="malformed header"):
            self._load(tmp_path, "3\n")

    def test_non_integer_header(self, tmp_path):
        with pytest.raises(VectorFormatError, match="non-integer"):
            self._load(tmp_path, "two 3\n")

    def test_empty_model(self, tmp_path):
        with pytest.raises(VectorFormatError, match="empty model"):
            self._load(tmp_path, "0 4\n")

    def test_row_length_mismatch(self, tmp_path):
        with pytest.raises(VectorFormatError, match="expected 3 values"):
            self._load(tmp_path, "1 3\nw 0.5 0.5\n")

    def test_duplicate_word(self, tmp_path):
        with pytest.raises(VectorFormatError, match="duplicate"):
            self._load(tmp_path, "2 1\nw 0.5\nw 0.25\n")


class TestWordVectors:
    def test_lookup_and_dim(self):
        wv = WordVectors(words=["a", "b"], matrix=np.zeros((2, 6), dtype=np.float32))
        assert wv.id_of["b"] == 1
        assert wv.dim == 6
        assert len(wv) == 2
