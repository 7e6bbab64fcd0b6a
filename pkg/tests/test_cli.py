import csv
import io

import numpy as np
import pytest
from PIL import Image

import voxslice as vx
from voxslice.cli import main
from voxslice.vhs1 import read_vhs1

SPEC_TEXT = """\
# small phantom for tool round trips
nx=16
ny=12
nz=4
sx=1.0
sy=1.0
background=20,20,20
ellipsoid: center=8,6,1.5 axes=5,4,1.4 label=1 color=200,60,60 name=blob
"""


@pytest.fixture
def spec_path(tmp_path):
    p = tmp_path / "phantom.txt"
    p.write_text(SPEC_TEXT)
    return p


@pytest.fixture
def vhs_path(tmp_path, spec_path):
    out = tmp_path / "vol.vhs1"
    assert main(["phantom", str(spec_path), str(out), "--compress"]) == 0
    return out


class TestPhantom:
    def test_raw_export_writes_slices_and_sidecars(self, tmp_path, spec_path,
                                                   capsys):
        out = tmp_path / "raw"
        assert main(["phantom", str(spec_path), str(out)]) == 0
        assert sorted(p.name for p in out.glob("*.png")) == [
            f"slice_{k:05d}.png" for k in range(4)]
        assert (out / "manifest.txt").exists()
        assert "label=1" in (out / "keys.txt").read_text()
        assert "wrote 4 slices" in capsys.readouterr().out

    def test_compressed_export_is_deterministic(self, tmp_path, spec_path):
        a = tmp_path / "a.vhs1"
        b = tmp_path / "b.vhs1"
        assert main(["phantom", str(spec_path), str(a), "--compress"]) == 0
        assert main(["phantom", str(spec_path), str(b), "--compress"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_spec_is_usage_error(self, tmp_path, capsys):
        rc = main(["phantom", str(tmp_path / "nope.txt"), str(tmp_path / "o")])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_malformed_spec_is_usage_error(self, tmp_path, capsys):
        p = tmp_path / "bad.txt"
        p.write_text("nx=16\nny=12\n")          # nz missing
        assert main(["phantom", str(p), str(tmp_path / "o")]) == 2
        assert "nz" in capsys.readouterr().err


class TestIngest:
    def test_round_trip_and_ratio(self, tmp_path, spec_path, capsys):
        raw = tmp_path / "raw"
        main(["phantom", str(spec_path), str(raw)])
        capsys.readouterr()
        out = tmp_path / "ingested.vhs1"
        rc = main(["ingest", str(raw), "--keys", str(raw / "keys.txt"),
                   "-o", str(out)])
        assert rc == 0
        got = capsys.readouterr().out
        # 16 texels at 3 bytes against an 8-byte block is exactly 6:1
        assert "6.0:1" in got
        vol, lab = read_vhs1(out)
        assert (vol.meta.nx, vol.meta.ny, vol.meta.nz) == (16, 12, 4)
        assert lab is not None
        assert [p.name for p in vol.meta.palette] == ["blob"]

    def test_matches_direct_compression(self, tmp_path, spec_path, vhs_path):
        raw = tmp_path / "raw"
        main(["phantom", str(spec_path), str(raw)])
        out = tmp_path / "ingested.vhs1"
        main(["ingest", str(raw), "--keys", str(raw / "keys.txt"),
              "-o", str(out)])
        a, _ = read_vhs1(out)
        b, _ = read_vhs1(vhs_path)
        for sa, sb in zip(a.slices, b.slices):
            assert sa.payload == sb.payload

    def test_missing_manifest_is_usage_error(self, tmp_path, capsys):
        src = tmp_path / "dir"
        src.mkdir()
        Image.fromarray(np.zeros((8, 8, 3), np.uint8)).save(src / "s0.png")
        rc = main(["ingest", str(src), "-o", str(tmp_path / "x.vhs1")])
        assert rc == 2
        assert "manifest" in capsys.readouterr().err

    def test_mismatched_dims_rejected(self, tmp_path, spec_path, capsys):
        raw = tmp_path / "raw"
        main(["phantom", str(spec_path), str(raw)])
        Image.fromarray(np.zeros((3, 5, 3), np.uint8)).save(
            raw / "slice_99999.png")
        rc = main(["ingest", str(raw), "-o", str(tmp_path / "x.vhs1")])
        assert rc == 2


class TestInfo:
    def test_summary(self, vhs_path, capsys):
        assert main(["info", str(vhs_path)]) == 0
        out = capsys.readouterr().out
        assert "dims: 16 x 12 x 4" in out
        assert "labels: yes" in out
        assert "1: blob" in out

    def test_bad_magic_is_usage_error(self, tmp_path, capsys):
        p = tmp_path / "junk.vhs1"
        p.write_bytes(b"JUNKJUNKJUNK")
        assert main(["info", str(p)]) == 2


class TestSlice:
    def test_axial_preset_reproduces_stored_slice(self, tmp_path, vhs_path):
        vol, _ = read_vhs1(vhs_path)
        k = 1
        out = tmp_path / "s.png"
        rc = main(["slice", str(vhs_path),
                   "--axial", str(float(vol.meta.z_table[k])),
                   "-o", str(out)])
        assert rc == 0
        img = np.asarray(Image.open(out))
        assert np.array_equal(img[..., :3], vol.decoded_slice(k)[::-1])
        assert (tmp_path / "s.png.txt").exists()

    def test_explicit_plane_and_determinism(self, tmp_path, vhs_path):
        args = ["slice", str(vhs_path), "--center", "8,6,1.5",
                "--u", "1,0,0", "--v", "0,0,1", "--hu", "8", "--hv", "2",
                "--width", "32", "--height", "8"]
        a = tmp_path / "a.png"
        b = tmp_path / "b.png"
        assert main(args + ["-o", str(a)]) == 0
        assert main(args + ["-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert np.asarray(Image.open(a)).shape == (8, 32, 4)

    def test_ppm_output(self, tmp_path, vhs_path):
        out = tmp_path / "s.ppm"
        assert main(["slice", str(vhs_path), "--axial", "0", "-o",
                     str(out)]) == 0
        assert out.read_bytes().startswith(b"P6\n16 12\n255\n")

    def test_missing_basis_is_usage_error(self, vhs_path, tmp_path, capsys):
        rc = main(["slice", str(vhs_path), "--center", "8,6,1.5",
                   "-o", str(tmp_path / "x.png")])
        assert rc == 2
        assert "--u" in capsys.readouterr().err


class TestBench:
    def parse_csv(self, text):
        return list(csv.reader(io.StringIO(text)))

    def test_header_only_with_zero_iterations(self, vhs_path, capsys):
        assert main(["bench", str(vhs_path), "--iterations", "0"]) == 0
        rows = self.parse_csv(capsys.readouterr().out)
        assert rows == [["kind", "scale", "median_ms", "p95_ms",
                         "throughput"]]

    def test_rows_cover_scales_and_texel_decode(self, vhs_path, capsys):
        assert main(["bench", str(vhs_path), "--iterations", "2"]) == 0
        rows = self.parse_csv(capsys.readouterr().out)
        assert len(rows) == 5
        body = rows[1:]
        assert [r[0] for r in body] == ["render"] * 3 + ["texel_decode"]
        assert [float(r[1]) for r in body[:3]] == [1.0, 0.5, 0.25]
        for r in body:
            assert len(r) == 5
            assert float(r[2]) > 0 and float(r[3]) > 0 and float(r[4]) > 0


class TestArgErrors:
    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_missing_required_output(self, vhs_path, capsys):
        assert main(["ingest", str(vhs_path)]) == 2

    def test_no_args(self, capsys):
        assert main([]) == 2
