import numpy as np
import pytest

from fsod_export import (
    export_array_features,
    export_features,
    read_fvec,
    read_order_manifest,
)


def test_export_rows_match_order_manifest(extractor, image_dir, tmp_path):
    folder = image_dir(count=5)
    out = tmp_path / "f.fvec"
    result = export_features(folder, extractor, out, batch_size=2)
    assert result.rows == 5
    assert result.dim == extractor.spec.output_dim == 2048
    features = read_fvec(out)
    assert features.shape == (5, 2048)
    order = read_order_manifest(tmp_path / "f.fvec.order")
    assert len(order) == features.shape[0]
    assert order == sorted(order)


def test_export_deterministic(extractor, image_dir, tmp_path):
    folder = image_dir(count=3, seed=5)
    first, second = tmp_path / "a.fvec", tmp_path / "b.fvec"
    export_features(folder, extractor, first, batch_size=2)
    export_features(folder, extractor, second, batch_size=2)
    assert first.read_bytes() == second.read_bytes()


def test_export_empty_folder(extractor, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(ValueError, match="no images"):
        export_features(empty, extractor, tmp_path / "f.fvec")


def test_export_missing_folder(extractor, tmp_path):
    with pytest.raises(FileNotFoundError):
        export_features(tmp_path / "nope", extractor, tmp_path / "f.fvec")


def test_undecodable_image_skipped(extractor, image_dir, tmp_path, caplog):
    folder = image_dir(count=3, seed=2)
    (folder / "img_000.png").write_bytes(b"this is not a png")
    out = tmp_path / "f.fvec"
    with caplog.at_level("WARNING"):
        result = export_features(folder, extractor, out, batch_size=4)
    assert result.rows == 2
    assert result.skipped == ("img_000.png",)
    assert any("undecodable" in record.message for record in caplog.records)
    provenance = (tmp_path / "f.fvec.provenance").read_text()
    assert "skipped=img_000.png" in provenance
    assert "checkpoint_sha256=random-init" in provenance


def test_export_array_features(extractor, tmp_path):
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, size=(6, 28, 28, 3), dtype=np.uint8)
    out = tmp_path / "a.fvec"
    result = export_array_features(images, extractor, out, batch_size=4)
    assert result.rows == 6
    assert read_fvec(out).shape == (6, 2048)
    assert read_order_manifest(tmp_path / "a.fvec.order") == [str(i) for i in range(6)]


def test_export_array_rejects_bad_shape(extractor, tmp_path):
    with pytest.raises(ValueError, match=r"N, H, W, 3"):
        export_array_features(
            np.zeros((4, 8, 8), dtype=np.uint8), extractor, tmp_path / "x.fvec"
        )


def test_batch_size_validation(extractor, image_dir, tmp_path):
    with pytest.raises(ValueError, match="batch size"):
        export_features(image_dir(), extractor, tmp_path / "f.fvec", batch_size=0)
