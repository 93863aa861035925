import numpy as np
import pytest

from robustmc import io
from robustmc.basis import ObservedCoefficients
from robustmc.matcore import InputError


def test_matrix_roundtrip_is_exact(tmp_path, rng):
    A = rng.standard_normal((4, 3)) * 10.0 ** rng.integers(-300, 300, size=(4, 3))
    io.write_matrix(tmp_path / "a.txt", A)
    B = io.read_matrix(tmp_path / "a.txt")
    assert A.tobytes() == B.tobytes()
    assert (tmp_path / "a.txt").read_text().splitlines()[0] == "4 3"


def test_matrix_format_errors(tmp_path):
    (tmp_path / "bad.txt").write_text("2 2\n1 2\n3\n")
    with pytest.raises(InputError):
        io.read_matrix(tmp_path / "bad.txt")
    (tmp_path / "nan.txt").write_text("1 1\nnan\n")
    with pytest.raises(InputError):
        io.read_matrix(tmp_path / "nan.txt")


def test_mask_and_observed_roundtrip(tmp_path, rng):
    mask = rng.random((5, 6)) < 0.5
    io.write_mask(tmp_path / "m.txt", mask)
    np.testing.assert_array_equal(io.read_mask(tmp_path / "m.txt", (5, 6)), mask)
    obs = ObservedCoefficients(mask, rng.standard_normal((5, 6)))
    io.write_observed(tmp_path / "o.txt", obs)
    back = io.read_observed(tmp_path / "o.txt", (5, 6))
    np.testing.assert_array_equal(back.mask, obs.mask)
    assert back.values.tobytes() == obs.values.tobytes()
    with pytest.raises(InputError):
        io.read_mask(tmp_path / "m.txt", (2, 2))


def test_csv_pgm_config(tmp_path):
    io.write_csv(tmp_path / "r.csv", ["a", "b"], [[1, 0.5], [2, 1e-9]])
    rows = io.read_csv(tmp_path / "r.csv")
    assert rows == [{"a": "1", "b": "0.5"}, {"a": "2", "b": "1e-09"}]
    grid = np.array([[0, 128], [255, 3]])
    io.write_pgm(tmp_path / "g.pgm", grid)
    assert (tmp_path / "g.pgm").read_text().startswith("P2\n2 2\n255\n")
    np.testing.assert_array_equal(io.read_pgm(tmp_path / "g.pgm"), grid)
    (tmp_path / "c.cfg").write_text("# comment\nnoise-variance = 2\nn=5  # trailing\n")
    assert io.read_config(tmp_path / "c.cfg") == {"noise_variance": "2", "n": "5"}
    (tmp_path / "bad.cfg").write_text("oops\n")
    with pytest.raises(InputError):
        io.read_config(tmp_path / "bad.cfg")


def test_atomic_write_leaves_nothing_on_failure(tmp_path):
    class Boom:
        def __str__(self):
            raise RuntimeError("boom")

    target = tmp_path / "x.txt"
    target.write_text("old\n")
    with pytest.raises(TypeError):
        io.atomic_write(target, Boom())
    assert target.read_text() == "old\n"
    assert [p.name for p in tmp_path.iterdir()] == ["x.txt"]


def test_unwritable_path_names_the_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file/sub/out.txt"):
        io.atomic_write(blocker / "sub" / "out.txt", "x")
