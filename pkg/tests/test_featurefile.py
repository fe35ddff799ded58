import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nfgcd.featurefile import (
    MAGIC,
    VERSION,
    FeatureFileError,
    FeatureSet,
    read_feature_file,
    write_feature_file,
)


def random_feature_set(rng, max_n=20, max_dim=8) -> FeatureSet:
    n = int(rng.integers(0, max_n + 1))
    dim = int(rng.integers(1, max_dim + 1))
    n_classes = int(rng.integers(1, 6))
    names = [f"class-{i}" if i % 2 == 0 else f"klsä-{i}" for i in range(n_classes)]
    features = rng.normal(size=(n, dim)).astype(np.float32)
    labels = rng.integers(0, n_classes, n)
    return FeatureSet(features=features, labels=labels, class_names=names)


class TestGoldenFile:
    def test_minimal_file_round_trip(self, tmp_path):
        path = tmp_path / "mini.nfgc"
        fs = FeatureSet(
            features=np.array([[0.5, -1.0]], dtype=np.float32),
            labels=np.array([0]),
            class_names=["only"],
        )
        write_feature_file(fs, path)
        back = read_feature_file(path)
        assert back.n == 1 and back.dim == 2
        assert back.class_names == ["only"]
        assert np.array_equal(back.features, fs.features)
        assert np.array_equal(back.labels, fs.labels)

    def test_exact_bytes_of_minimal_file(self, tmp_path):
        path = tmp_path / "mini.nfgc"
        fs = FeatureSet(
            features=np.array([[0.5, -1.0]], dtype=np.float32),
            labels=np.array([0]),
            class_names=["only"],
        )
        write_feature_file(fs, path)
        expected = (
            struct.pack("<4s4I", MAGIC, VERSION, 1, 2, 1)
            + struct.pack("<I", 4)
            + b"only"
            + struct.pack("<I", 0)
            + struct.pack("<2f", 0.5, -1.0)
        )
        assert path.read_bytes() == expected

    def test_empty_set_round_trips(self, tmp_path):
        path = tmp_path / "empty.nfgc"
        fs = FeatureSet(
            features=np.empty((0, 3), dtype=np.float32),
            labels=np.empty(0, dtype=np.int64),
            class_names=["a", "b"],
        )
        write_feature_file(fs, path)
        back = read_feature_file(path)
        assert back.n == 0 and back.dim == 3 and back.class_names == ["a", "b"]

    def test_multibyte_class_names(self, tmp_path):
        path = tmp_path / "names.nfgc"
        names = ["élève", "機械", "plain"]
        fs = FeatureSet(
            features=np.zeros((3, 1), dtype=np.float32),
            labels=np.array([0, 1, 2]),
            class_names=names,
        )
        write_feature_file(fs, path)
        assert read_feature_file(path).class_names == names


class TestErrors:
    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.nfgc"
        path.write_bytes(b"XXXX" + b"\x00" * 16)
        with pytest.raises(FeatureFileError, match="magic"):
            read_feature_file(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "bad.nfgc"
        path.write_bytes(struct.pack("<4s4I", MAGIC, 9, 0, 1, 0))
        with pytest.raises(FeatureFileError, match="version"):
            read_feature_file(path)

    def test_truncated_payload_names_byte_counts(self, tmp_path):
        path = tmp_path / "trunc.nfgc"
        fs = FeatureSet(
            features=np.ones((2, 3), dtype=np.float32),
            labels=np.array([0, 0]),
            class_names=["x"],
        )
        write_feature_file(fs, path)
        data = path.read_bytes()
        path.write_bytes(data[:-5])
        with pytest.raises(FeatureFileError, match=r"expected 32"):
            read_feature_file(path)

    def test_trailing_garbage_rejected(self, tmp_path):
        path = tmp_path / "extra.nfgc"
        fs = FeatureSet(
            features=np.ones((1, 1), dtype=np.float32),
            labels=np.array([0]),
            class_names=["x"],
        )
        write_feature_file(fs, path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(FeatureFileError, match="payload"):
            read_feature_file(path)

    def test_nan_feature_names_record(self, tmp_path):
        path = tmp_path / "nan.nfgc"
        fs = FeatureSet(
            features=np.zeros((3, 2), dtype=np.float32),
            labels=np.array([0, 0, 0]),
            class_names=["x"],
        )
        write_feature_file(fs, path)
        data = bytearray(path.read_bytes())
        # poke a NaN into record 1's first value
        offset = len(data) - 3 * 12 + 12 + 4
        data[offset : offset + 4] = struct.pack("<f", float("nan"))
        path.write_bytes(bytes(data))
        with pytest.raises(FeatureFileError, match="record 1"):
            read_feature_file(path)

    def test_class_index_out_of_range(self, tmp_path):
        path = tmp_path / "badlabel.nfgc"
        fs = FeatureSet(
            features=np.zeros((1, 1), dtype=np.float32),
            labels=np.array([0]),
            class_names=["x"],
        )
        write_feature_file(fs, path)
        data = bytearray(path.read_bytes())
        data[-8:-4] = struct.pack("<I", 7)
        path.write_bytes(bytes(data))
        with pytest.raises(FeatureFileError, match="class index"):
            read_feature_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            read_feature_file(tmp_path / "nope.nfgc")


class TestRoundTripProperty:
    def test_write_read_write_byte_identical(self, tmp_path):
        rng = np.random.default_rng(123)
        for i in range(50):
            path_a = tmp_path / f"a{i}.nfgc"
            path_b = tmp_path / f"b{i}.nfgc"
            fs = random_feature_set(rng)
            write_feature_file(fs, path_a)
            back = read_feature_file(path_a)
            write_feature_file(back, path_b)
            assert path_a.read_bytes() == path_b.read_bytes()
            assert np.array_equal(back.features, fs.features)
            assert np.array_equal(back.labels, fs.labels)
            assert back.class_names == fs.class_names


@st.composite
def feature_sets(draw):
    n = draw(st.integers(0, 12))
    dim = draw(st.integers(1, 6))
    n_classes = draw(st.integers(1, 4))
    names = draw(
        st.lists(st.text(min_size=0, max_size=12), min_size=n_classes,
                 max_size=n_classes, unique=True)
    )
    finite32 = st.floats(width=32, allow_nan=False, allow_infinity=False)
    values = draw(
        st.lists(st.lists(finite32, min_size=dim, max_size=dim), min_size=n, max_size=n)
    )
    labels = draw(st.lists(st.integers(0, n_classes - 1), min_size=n, max_size=n))
    return FeatureSet(
        features=np.asarray(values, dtype=np.float32).reshape(n, dim),
        labels=np.asarray(labels, dtype=np.int64),
        class_names=names,
    )


class TestRoundTripHypothesis:
    @settings(max_examples=60, deadline=None)
    @given(fs=feature_sets())
    def test_any_finite_set_round_trips(self, fs, tmp_path_factory):
        tmp = tmp_path_factory.mktemp("rt")
        a, b = tmp / "a.nfgc", tmp / "b.nfgc"
        write_feature_file(fs, a)
        back = read_feature_file(a)
        write_feature_file(back, b)
        assert a.read_bytes() == b.read_bytes()
        assert np.array_equal(back.features, fs.features)
        assert back.class_names == fs.class_names


class TestCsvFallback:
    def test_reads_by_extension(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text(
            "label,f0,f1\n"
            "cat,0.5,-1.0\n"
            "dog,1.5,2.5\n"
            "cat,0.25,0.125\n"
        )
        fs = read_feature_file(path)
        assert fs.n == 3 and fs.dim == 2
        assert fs.class_names == ["cat", "dog"]  # first-appearance order
        assert fs.labels.tolist() == [0, 1, 0]
        assert fs.features[0].tolist() == [0.5, -1.0]

    def test_rejects_ragged_rows(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("label,f0,f1\ncat,1.0\n")
        with pytest.raises(FeatureFileError, match="line 2"):
            read_feature_file(path)

    def test_rejects_nan(self, tmp_path):
        path = tmp_path / "nan.csv"
        path.write_text("label,f0\ncat,nan\n")
        with pytest.raises(FeatureFileError, match="line 2"):
            read_feature_file(path)

    def test_rejects_empty(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(FeatureFileError, match="header"):
            read_feature_file(path)
