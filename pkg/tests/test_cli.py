import io
import subprocess
import sys

import pytest

from pathlim.cli import main
from pathlim.fixtures import NAMES, fixture_path


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def fx(name):
    return str(fixture_path(name))


def lines_with(text, prefix):
    return [line for line in text.splitlines() if line.startswith(prefix)]


class TestAnalyze:
    def test_g4(self):
        code, out, _ = run("analyze", fx("G4"))
        assert code == 0
        assert "classes: 2" in out
        assert "rho: 1.41421356" in out
        assert "height: 1" in out
        assert "umbrella: true" in out

    def test_g3(self):
        code, out, _ = run("analyze", fx("G3"))
        assert code == 0
        assert "height: 2" in out
        assert "umbrella: false" in out

    def test_from(self):
        code, out, _ = run("analyze", fx("G3"), "--from", "a")
        assert code == 0
        assert "gamma(a): 1" in out

    def test_empty_file(self, tmp_path):
        f = tmp_path / "empty.txt"
        f.write_text("")
        code, _, err = run("analyze", f)
        assert code == 2
        assert err.startswith("error:")

    def test_missing_file(self, tmp_path):
        assert run("analyze", tmp_path / "nope.txt")[0] == 2

    def test_malformed(self, tmp_path):
        f = tmp_path / "bad.txt"
        f.write_text("a b -1\n")
        assert run("analyze", f)[0] == 2

    def test_degenerate(self, tmp_path):
        f = tmp_path / "dag.txt"
        f.write_text("a b 1\nb c 1\n")
        code, _, err = run("analyze", f)
        assert code == 3
        assert "error" in err


class TestResidual:
    def test_g2_check(self):
        code, out, _ = run("residual", fx("G2"), "--check")
        assert code == 0
        assert out.splitlines()[:4] == ["height: 1", ",a,b", "a,0,1", "b,0,1"]
        gap = float(lines_with(out, "check-gap:")[0].split()[1])
        assert gap <= 1e-4
        assert "check: PASS" in out

    def test_g3(self):
        code, out, _ = run("residual", fx("G3"))
        assert code == 0
        assert out.splitlines()[0] == "height: 2"
        assert out.splitlines()[1:] == [",a,b", "a,0,1", "b,0,0"]

    def test_g3_umbrella_method(self):
        assert run("residual", fx("G3"), "--method", "umbrella")[0] == 4

    @pytest.mark.parametrize("name", ["G1", "G2", "G4", "G5"])
    def test_methods_agree(self, name):
        a = run("residual", fx(name), "--method", "recursive")[1]
        b = run("residual", fx(name), "--method", "auto")[1]
        assert a == b

    def test_nine_significant_digits(self):
        code, out, _ = run("residual", fx("G4"))
        assert code == 0
        assert "c,0,0.353553391,0.5" in out

    def test_bad_method(self):
        assert run("residual", fx("G2"), "--method", "magic")[0] == 2


class TestKernel:
    def test_g2(self):
        code, out, _ = run("kernel", fx("G2"), "--from", "a")
        assert code == 0
        assert out.splitlines()[-3:] == [",a,b", "a,0.5,0.5", "b,0,1"]

    def test_g3_support_note(self):
        code, out, _ = run("kernel", fx("G3"), "--from", "a")
        assert code == 0
        assert "note: U(a) = {a}" in out
        assert out.splitlines()[-2:] == [",a", "a,1"]

    def test_unknown_vertex(self):
        code, _, err = run("kernel", fx("G4"), "--from", "z")
        assert code == 2
        assert "z" in err


class TestConverge:
    def test_g4_diverges(self):
        code, out, _ = run("converge", fx("G4"), "--from", "a")
        assert code == 0
        assert "verdict: DIVERGES" in out
        assert "witness: a b" in out
        assert "a b,0.666666667,0.5" in out

    def test_g2_aperiodic(self):
        code, out, _ = run("converge", fx("G2"), "--from", "a")
        assert code == 0
        assert "verdict: CONVERGES (aperiodic)" in out

    def test_g5(self):
        code, out, _ = run("converge", fx("G5"), "--from", "a")
        assert code == 0
        assert "verdict: CONVERGES" in out
        assert "(aperiodic)" not in out

    def test_max_len(self):
        out = run("converge", fx("G4"), "--from", "a", "--max-len", "1")[1]
        assert "max-len: 1" in out
        assert "a b c" not in out


class TestSample:
    ARGS = ("sample", None, "--from", "a", "--mode", "uniform:8", "--count", "10", "--seed", "7")

    def args(self, name="G2", **over):
        argv = list(self.ARGS)
        argv[1] = fx(name)
        for key, value in over.items():
            argv[argv.index(f"--{key}") + 1] = value
        return argv

    def test_shape(self):
        code, out, _ = run(*self.args())
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 10
        assert all(len(line.split()) == 9 for line in lines)

    def test_repeatable(self):
        assert run(*self.args())[1] == run(*self.args())[1]

    def test_seed_changes_output(self):
        assert run(*self.args())[1] != run(*self.args(seed="8"))[1]

    def test_env_seed_overrides(self, monkeypatch):
        expected = run(*self.args(seed="123"))[1]
        monkeypatch.setenv("PATHLIM_SEED", "123")
        assert run(*self.args(seed="7"))[1] == expected

    def test_env_seed_hex(self, monkeypatch):
        expected = run(*self.args(seed="255"))[1]
        monkeypatch.setenv("PATHLIM_SEED", "0xff")
        assert run(*self.args())[1] == expected

    def test_env_seed_invalid(self, monkeypatch):
        monkeypatch.setenv("PATHLIM_SEED", "seven")
        assert run(*self.args())[0] == 2

    def test_boltzmann_out_of_range(self):
        assert run(*self.args(mode="boltzmann:0.6"))[0] == 4

    def test_boltzmann(self):
        code, out, _ = run(*self.args(mode="boltzmann:0.3"))
        assert code == 0
        assert all(line.split()[0] == "a" for line in out.splitlines())

    def test_walk(self):
        code, out, _ = run(*self.args(name="G5", mode="walk:3"))
        assert code == 0
        assert set(out.splitlines()) == {"a b a b"}

    def test_bad_mode(self):
        assert run(*self.args(mode="gibbs:2"))[0] == 2

    def test_no_path(self, tmp_path):
        f = tmp_path / "g.txt"
        f.write_text("a b 1\nc c 1\n")
        code, _, err = run("sample", f, "--from", "a", "--mode", "uniform:3")
        assert code == 4
        assert "no path" in err


class TestVerify:
    @pytest.mark.parametrize("name", NAMES)
    def test_fixtures_pass(self, name):
        code, out, _ = run("verify", fx(name))
        assert code == 0, out
        assert out.splitlines()[-1] == "verify: PASS"

    def test_corrupted_theta(self):
        code, out, _ = run("verify", fx("G3"), "--corrupt-theta", "0.01")
        assert code == 1
        assert "residual vs numeric: FAIL" in out

    def test_cap_warning(self, tmp_path):
        f = tmp_path / "k3.txt"
        f.write_text("".join(f"{a} {b} 1\n" for a in "xyz" for b in "xyz"))
        code, out, err = run("verify", f, "--cap", "50")
        assert code == 0
        assert "warning" in err
        assert "path counts: PASS (partial)" in out

    def test_degenerate(self, tmp_path):
        f = tmp_path / "dag.txt"
        f.write_text("a b 1\n")
        code, out, _ = run("verify", f)
        assert code == 3
        assert "SKIP" in out


class TestExport:
    def test_dot(self):
        code, out, _ = run("export", fx("G4"), "--dot")
        assert code == 0
        assert out.startswith("digraph")
        assert "c0 -> c1;" in out

    def test_theta(self):
        out = run("export", fx("G5"), "--theta")[1]
        assert out.splitlines() == [",a,b", "a,0.5,0.5", "b,0.5,0.5"]

    def test_projector(self):
        out = run("export", fx("G5"), "--projector")[1]
        assert out.splitlines()[0] == "d: 2"

    def test_bases(self):
        out = run("export", fx("G2"), "--bases")[1]
        assert out.splitlines()[0] == ",l0,r0"

    def test_bases_not_umbrella(self):
        assert run("export", fx("G3"), "--bases")[0] == 4

    def test_requires_one_flag(self):
        assert run("export", fx("G2"))[0] == 2


def test_no_command():
    assert run()[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pathlim.cli", "analyze", fx("G1")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "height: 1" in proc.stdout
