import numpy as np
import pytest

from roadworld.geometry import Pose
from roadworld.rten import open_rten_memmap, read_rten, write_rten
from roadworld.segments import list_segments, load_segment, save_segment


class TestRawTensor:
    def test_roundtrip(self, tmp_path):
        arr = np.random.default_rng(0).standard_normal((3, 4, 5)).astype(np.float32)
        p = tmp_path / "t.rt"
        write_rten(p, arr)
        assert np.array_equal(read_rten(p), arr)

    def test_memmap_matches(self, tmp_path):
        arr = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
        p = tmp_path / "t.rt"
        write_rten(p, arr)
        m = open_rten_memmap(p)
        assert m.shape == (2, 3, 4)
        assert np.array_equal(np.array(m[1]), arr[1])

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "junk.rt"
        p.write_bytes(b"JUNKxxxxxxxxxxxx")
        with pytest.raises(ValueError):
            read_rten(p)

    def test_header_layout(self, tmp_path):
        arr = np.zeros((2, 3), dtype=np.float32)
        p = tmp_path / "t.rt"
        write_rten(p, arr)
        raw = p.read_bytes()
        assert raw[:4] == b"RTEN"
        assert raw[4:8] == (1).to_bytes(4, "little")  # format version
        assert raw[8] == 0  # dtype code f32
        assert raw[9] == 2  # ndim
        assert int.from_bytes(raw[10:18], "little") == 2
        assert int.from_bytes(raw[18:26], "little") == 3


class TestSegmentFormat:
    def test_roundtrip(self, tmp_path):
        n, h, w = 4, 8, 12
        rng = np.random.default_rng(1)
        frames = rng.random((n, h, w)).astype(np.float32)
        depths = rng.random((n, h, w)).astype(np.float32) * 50
        poses = [Pose(x=float(i), yaw=0.1 * i) for i in range(n)]
        speeds = [10.0 + i for i in range(n)]
        actions = [(0.01 * i, 0.1) for i in range(n)]
        offsets = [0.1 * i for i in range(n)]
        impulses = [0, 0, 1, 0]
        save_segment(tmp_path / "seg", frames, depths, poses, speeds, actions, offsets, impulses)
        seg = load_segment(tmp_path / "seg", mmap=False)
        assert np.array_equal(seg.frames, frames)
        assert np.array_equal(seg.depths, depths)
        assert seg.poses == poses
        assert np.allclose(seg.actions, actions)
        assert list(seg.impulses) == impulses

    def test_length_mismatch_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            save_segment(tmp_path / "seg", np.zeros((2, 4, 4)), np.zeros((3, 4, 4)),
                         [Pose(), Pose()], [0, 0], [(0, 0), (0, 0)], [0, 0], [0, 0])

    def test_missing_dataset_dir(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            list_segments(tmp_path / "nope")
