import numpy as np
import pytest

from fsod.fvec import write_features
from fsod.manifest import (
    ManifestError,
    load_dataset,
    load_manifest,
    read_labels,
    write_labels,
)


def make_labeled(tmp_path, n_classes=3, per_class=4, dim=2, with_test=True):
    rng = np.random.default_rng(0)
    rows = n_classes * per_class
    labels = np.repeat(np.arange(n_classes), per_class)
    write_features(rng.normal(size=(rows, dim)).astype(np.float32), tmp_path / "train.fvec")
    write_labels(labels, tmp_path / "train_labels.txt")
    text = (
        "name = toy\n"
        "role = labeled-multiclass\n"
        "feature_file = train.fvec\n"
        "labels = train_labels.txt\n"
    )
    if with_test:
        write_features(
            rng.normal(size=(rows, dim)).astype(np.float32), tmp_path / "test.fvec"
        )
        write_labels(labels, tmp_path / "test_labels.txt")
        text += "test_feature_file = test.fvec\ntest_labels = test_labels.txt\n"
    path = tmp_path / "data.manifest"
    path.write_text(text)
    return path


def test_labeled_manifest_resolves_for_one_vs_all(tmp_path):
    manifest = load_manifest(make_labeled(tmp_path))
    train_x, train_y = load_dataset(manifest, "train")
    test_x, test_y = load_dataset(manifest, "test")
    assert train_x.shape == (12, 2)
    assert sorted(set(train_y.tolist())) == [0, 1, 2]
    assert test_x.shape == (12, 2)
    assert test_y is not None


def test_label_count_mismatch(tmp_path):
    path = make_labeled(tmp_path, with_test=False)
    write_labels(np.zeros(5, dtype=np.int64), tmp_path / "train_labels.txt")
    manifest = load_manifest(path)
    with pytest.raises(ManifestError, match="label count 5"):
        load_dataset(manifest, "train")


def test_unlabeled_inlier_manifest_valid(tmp_path):
    write_features(np.ones((3, 2), dtype=np.float32), tmp_path / "x.fvec")
    path = tmp_path / "m.manifest"
    path.write_text("name=inliers\nrole=inlier\nfeature_file=x.fvec\n")
    manifest = load_manifest(path)
    assert manifest.role == "inlier"
    features, labels = load_dataset(manifest, "train")
    assert features.shape == (3, 2)
    assert labels is None


def test_missing_required_key(tmp_path):
    path = tmp_path / "m.manifest"
    path.write_text("name=x\nrole=inlier\n")
    with pytest.raises(ManifestError, match="missing required keys"):
        load_manifest(path)


def test_unknown_key(tmp_path):
    path = tmp_path / "m.manifest"
    path.write_text("name=x\nrole=inlier\nfeature_file=x.fvec\nbogus=1\n")
    with pytest.raises(ManifestError, match="unknown key"):
        load_manifest(path)


def test_unknown_role(tmp_path):
    path = tmp_path / "m.manifest"
    path.write_text("name=x\nrole=wat\nfeature_file=x.fvec\n")
    with pytest.raises(ManifestError, match="unknown role"):
        load_manifest(path)


def test_labeled_multiclass_requires_labels(tmp_path):
    path = tmp_path / "m.manifest"
    path.write_text("name=x\nrole=labeled-multiclass\nfeature_file=x.fvec\n")
    with pytest.raises(ManifestError, match="requires labels"):
        load_manifest(path)


def test_noncontiguous_classes_rejected(tmp_path):
    path = make_labeled(tmp_path, with_test=False)
    write_labels(np.array([0, 0, 0, 0, 2, 2, 2, 2, 3, 3, 3, 3]), tmp_path / "train_labels.txt")
    with pytest.raises(ManifestError, match="contiguous from 0"):
        load_dataset(load_manifest(path), "train")


def test_missing_test_split(tmp_path):
    manifest = load_manifest(make_labeled(tmp_path, with_test=False))
    with pytest.raises(ManifestError, match="no test split"):
        load_dataset(manifest, "test")


def test_comments_and_blank_lines(tmp_path):
    write_features(np.ones((2, 2), dtype=np.float32), tmp_path / "x.fvec")
    path = tmp_path / "m.manifest"
    path.write_text("# comment\n\nname=x\nrole=outlier\nfeature_file=x.fvec\n")
    assert load_manifest(path).name == "x"


def test_labels_roundtrip(tmp_path):
    labels = np.array([0, 1, 2, 1, 0])
    write_labels(labels, tmp_path / "l.txt")
    assert (read_labels(tmp_path / "l.txt") == labels).all()


def test_bad_label_line(tmp_path):
    (tmp_path / "l.txt").write_text("0\nfoo\n")
    with pytest.raises(ManifestError, match="not an integer"):
        read_labels(tmp_path / "l.txt")
