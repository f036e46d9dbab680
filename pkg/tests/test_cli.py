import hashlib
import json
import math
import os

import pytest

from laguerre_riesz import cli
from laguerre_riesz.laguerre_ops import heat_kernel_1d


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def value_of(csv_text):
    lines = csv_text.strip().splitlines()
    return float(lines[1].split(",")[-1])


class TestEval:
    def test_basis(self, capsys):
        code, out, _ = run(capsys, "eval", "basis", "--nu", "-0.5", "--k", "0", "--x", "1.0")
        assert code == 0
        assert value_of(out) == pytest.approx((2 / math.sqrt(math.pi)) ** 0.5 * math.exp(-0.5),
                                              rel=1e-15)

    def test_kernel_forwarding(self, capsys):
        code, out, _ = run(capsys, "eval", "kernel", "--nu", "0.5", "--t", "0.5", "--x", "1",
                           "--y", "2")
        assert code == 0 and value_of(out) == heat_kernel_1d(0.5, 0.5, 1.0, 2.0)

    def test_riesz_diagonal_is_domain_error(self, capsys):
        code, _, err = run(capsys, "eval", "riesz-kernel", "--nu", "0.5", "--k", "1",
                           "--x", "1", "--y", "1")
        assert code == 3 and len(err.strip().splitlines()) == 1

    def test_point_list(self, capsys):
        code, out, _ = run(capsys, "eval", "kernel", "--nu", "0.5", "--t", "0.5,1",
                           "--x", "1,2", "--y", "2")
        assert code == 0 and len(out.strip().splitlines()) == 5

    def test_multidimensional(self, capsys):
        code, out, _ = run(capsys, "eval", "delta-kernel", "--nu", "0.5,-0.75", "--k", "1,2",
                           "--t", "0.5", "--x", "1,2", "--y", "2,1")
        assert code == 0 and len(out.strip().splitlines()) == 2

    @pytest.mark.parametrize("argv", [
        ["eval", "kernel", "--nu", "-1.5", "--t", "1", "--x", "1", "--y", "1"],
        ["eval", "kernel", "--nu", "0.5", "--x", "1", "--y", "1"],
        ["eval", "delta-kernel", "--nu", "0.5", "--t", "1", "--x", "1", "--y", "1"],
        ["eval", "kernel", "--nu", "abc", "--t", "1", "--x", "1", "--y", "1"],
        ["eval", "nonsense", "--nu", "0.5", "--x", "1"],
        ["verify", "bounds", "--nu", "0.5,0.5", "--k", "1"],
        ["sweep", "--p", ""],
        ["sweep", "--p", "0.5"],
        ["sweep", "--sizes", "512,256"],
        ["sweep", "--nu", "0.5,0.5", "--k", "1,1"],
        [],
    ])
    def test_config_errors(self, capsys, tmp_path, argv):
        if argv and argv[0] != "eval":
            argv = argv + ["--out", str(tmp_path)]
        code, _, err = run(capsys, *argv)
        assert code == 2 and err.startswith("error")


class TestVerify:
    def test_bessel_defaults(self, capsys, tmp_path):
        code, _, _ = run(capsys, "verify", "bessel", "--out", str(tmp_path))
        assert code == 0
        assert (tmp_path / "verify-bessel.csv").exists()

    def test_bounds(self, capsys, tmp_path):
        code, _, _ = run(capsys, "verify", "bounds", "--nu", "-0.75", "--k", "1",
                         "--out", str(tmp_path))
        assert code == 0
        text = (tmp_path / "verify-bounds.csv").read_text()
        assert text.startswith("role,expected,name,a,e_x,e_y,c,C,C_refined")
        assert "control" in text

    def test_bounds_negative_control(self, capsys, tmp_path):
        code, out, _ = run(capsys, "verify", "bounds", "--nu", "-0.75", "--k", "1",
                           "--profile-ey", "0", "--out", str(tmp_path))
        assert code == 1 and "unexpected failure" in out

    def test_env_output_dir(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
        code, _, _ = run(capsys, "verify", "kernel-identities")
        assert code == 0 and (tmp_path / "env" / "verify-kernel-identities.csv").exists()

    @pytest.mark.parametrize("suite", ["odd-improvement", "convolution", "offdiagonal",
                                       "spectral"])
    def test_other_suites(self, capsys, tmp_path, suite):
        code, _, _ = run(capsys, "verify", suite, "--out", str(tmp_path))
        assert code == 0

    def test_offdiagonal_bad_exponents(self, capsys, tmp_path):
        code, _, _ = run(capsys, "verify", "offdiagonal", "--p", "1.1", "--out", str(tmp_path))
        assert code == 2


class TestReproducibility:
    def test_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            assert run(capsys, "verify", "bounds", "--nu", "0.5", "--k", "2",
                       "--out", str(d))[0] == 0
        assert (a / "verify-bounds.csv").read_bytes() == (b / "verify-bounds.csv").read_bytes()

    def test_manifest_digests_and_no_orphans(self, capsys, tmp_path):
        run(capsys, "verify", "bessel", "--out", str(tmp_path))
        run(capsys, "verify", "kernel-identities", "--out", str(tmp_path))
        manifests = sorted(tmp_path.glob("*.manifest.json"))
        referenced = []
        for m in manifests:
            data = json.loads(m.read_text())
            for name, digest in data["outputs"].items():
                blob = (tmp_path / name).read_bytes()
                assert hashlib.sha256(blob).hexdigest() == digest
                referenced.append(name)
        outputs = sorted(p.name for p in tmp_path.iterdir() if not p.name.endswith(".json"))
        assert sorted(referenced) == outputs
        assert not [p for p in tmp_path.iterdir() if p.name.startswith(".tmp-")]

    def test_argv_round_trip(self, capsys, tmp_path):
        first = tmp_path / "first"
        run(capsys, "verify", "convolution", "--a", "0.1", "--out", str(first))
        data = json.loads((first / "verify-convolution.manifest.json").read_text())
        argv = data["config"]["argv"]
        assert data["config"]["options"]["a"] == 0.1
        second = tmp_path / "second"
        argv = [str(second) if v == str(first) else v for v in argv]
        assert cli.main(argv) == 0
        capsys.readouterr()
        assert ((first / "verify-convolution.csv").read_bytes()
                == (second / "verify-convolution.csv").read_bytes())

    def test_float_format(self):
        text = cli.rows_to_csv([{"v": 0.1, "n": 3, "s": "a,b"}])
        assert text == 'v,n,s\n0.10000000000000001,3,"a,b"\n'
        assert float(text.splitlines()[1].split(",")[0]) == 0.1


class TestSweepCommand:
    def test_small_sweep(self, capsys, tmp_path):
        code, _, _ = run(capsys, "sweep", "--k", "1", "--p", "2", "--sizes", "64,96",
                         "--out", str(tmp_path))
        assert code == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert lines[0] == "p,alpha,N,norm,verdict,condition"
        assert len(lines) == 3

    def test_module_entry(self):
        assert os.path.exists(cli.__file__)
