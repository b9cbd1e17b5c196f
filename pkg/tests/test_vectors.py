import numpy as np
import pytest

from driftlab import vectors
from driftlab.vectors import FormatError

from conftest import space_from_matrix


def f32_space(rng, n=20, d=7):
    keys = [f"word{i}#NOUN" for i in range(n)]
    return space_from_matrix(keys, rng.normal(size=(n, d)).astype(np.float32), counts=list(range(n, 0, -1)))


def test_text_round_trip_exact(tmp_path, rng):
    space = f32_space(rng)
    vectors.write_text(space, tmp_path / "v.txt")
    back = vectors.read_text(tmp_path / "v.txt")
    assert back.vocab.keys == space.vocab.keys
    assert np.asarray(back.input_vectors, dtype=np.float32).tobytes() == np.asarray(space.input_vectors, dtype=np.float32).tobytes()


def test_text_header(tmp_path, rng):
    vectors.write_text(f32_space(rng, 5, 3), tmp_path / "v.txt")
    assert (tmp_path / "v.txt").read_text().splitlines()[0] == "5 3"


def test_text_rejects_whitespace_key(tmp_path):
    space = space_from_matrix(["bad key"], np.ones((1, 2), dtype=np.float32))
    with pytest.raises(FormatError):
        vectors.write_text(space, tmp_path / "v.txt")


def test_text_truncated(tmp_path):
    (tmp_path / "v.txt").write_text("2 3\na 1 2 3\n")
    with pytest.raises(FormatError):
        vectors.read_text(tmp_path / "v.txt")


def test_binary_round_trip(tmp_path, rng):
    space = f32_space(rng)
    vectors.write_binary(space, tmp_path / "v.bin")
    back = vectors.read_binary(tmp_path / "v.bin")
    assert back.vocab.keys == space.vocab.keys
    np.testing.assert_array_equal(back.vocab.counts, space.vocab.counts)
    np.testing.assert_array_equal(back.input_vectors, space.input_vectors)


def test_binary_bad_magic(tmp_path):
    (tmp_path / "v.bin").write_bytes(b"NOTVEC" + b"\0" * 40)
    with pytest.raises(FormatError):
        vectors.read_binary(tmp_path / "v.bin")


def test_unicode_keys(tmp_path, rng):
    space = space_from_matrix(["café#NOUN", "naïve#ADJ"], rng.normal(size=(2, 3)).astype(np.float32))
    vectors.write_text(space, tmp_path / "v.txt")
    vectors.write_binary(space, tmp_path / "v.bin")
    assert vectors.read_text(tmp_path / "v.txt").vocab.keys == space.vocab.keys
    assert vectors.read_binary(tmp_path / "v.bin").vocab.keys == space.vocab.keys
