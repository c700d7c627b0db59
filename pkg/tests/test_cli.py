"""End-to-end command line behavior: parsing, outputs, exit codes."""

import json
import math

import pytest

from deltachi.cli import PLANCHEREL_NS, main


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


class TestChars:
    def test_modulus_five(self, capsys):
        rc, out, _ = run(capsys, "chars", "--modulus", "5")
        assert rc == 0
        assert "4 character(s)" in out
        assert "order 4" in out and "principal" in out

    def test_json(self, capsys):
        rc, out, _ = run(capsys, "chars", "--modulus", "4", "--json")
        assert rc == 0
        doc = json.loads(out)
        assert doc["config"]["modulus"] == 4
        assert sorted(c["order"] for c in doc["characters"]) == [1, 2]
        assert doc["characters"][1]["exponents"][3] in (0, 1)

    def test_trivial_modulus(self, capsys):
        rc, out, _ = run(capsys, "chars", "--modulus", "1", "--json")
        assert rc == 0
        doc = json.loads(out)
        assert len(doc["characters"]) == 1
        assert doc["characters"][0]["principal"]

    def test_cap(self, capsys):
        rc, _, err = run(capsys, "chars", "--modulus", "0")
        assert rc == 2
        assert "error" in err


class TestSieve:
    def test_dump(self, capsys, tmp_path):
        path = tmp_path / "cols.csv"
        rc, out, _ = run(capsys, "sieve", "--limit", "12", "--dump-csv", str(path))
        assert rc == 0
        lines = path.read_text().splitlines()
        assert lines[0] == "n,spf,omega,mu2,tau"
        assert lines[1] == "1,1,0,1,1"
        assert lines[12] == "12,2,2,0,6"

    def test_identical_bytes(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "sieve", "--limit", "50", "--dump-csv", str(a))
        run(capsys, "sieve", "--limit", "50", "--dump-csv", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_bad_limit(self, capsys):
        rc, _, err = run(capsys, "sieve", "--limit", "2.5", "--dump-csv", "x.csv")
        assert rc == 2


class TestDelta:
    def test_plain(self, capsys):
        rc, out, _ = run(capsys, "delta", "--n", "12", "--weight", "char:4:1",
                         "--V", "1")
        assert rc == 0
        assert "delta = 1.0" in out
        assert "window u =" in out

    def test_json_witness(self, capsys):
        rc, out, _ = run(capsys, "delta", "--n", "60", "--weight", "unit",
                         "--V", "2", "--json")
        doc = json.loads(out)
        assert doc["mode"] == "sup"
        assert doc["value"] >= 3.0
        i, j = doc["run"]
        assert doc["run_divisors"][0] <= doc["run_divisors"][1]
        assert math.log(doc["run_divisors"][1] / doc["run_divisors"][0]) < 2.0

    def test_star(self, capsys):
        rc, out, _ = run(capsys, "delta", "--n", "60", "--weight", "mu",
                         "--V", "2", "--star", "1", "--json")
        doc = json.loads(out)
        assert doc["mode"] == "star"
        assert doc["config"]["star"] == 1.0

    def test_bad_weight(self, capsys):
        rc, _, err = run(capsys, "delta", "--n", "12", "--weight", "sigma",
                         "--V", "1")
        assert rc == 2
        assert "sigma" in err

    def test_bad_window(self, capsys):
        rc, _, _ = run(capsys, "delta", "--n", "12", "--weight", "unit",
                       "--V", "-1")
        assert rc == 2


class TestConstants:
    def test_t_one(self, capsys):
        rc, out, _ = run(capsys, "constants", "--t", "1")
        assert rc == 0
        assert "lambda = 2" in out
        assert "y0 = 1" in out
        assert "y1 = 1" in out

    def test_beta(self, capsys):
        rc, out, _ = run(capsys, "constants", "--t", "2", "--r", "5")
        assert rc == 0
        assert "beta = 3/4" in out

    def test_json(self, capsys):
        rc, out, _ = run(capsys, "constants", "--t", "2", "--r", "5", "--y", "1",
                         "--json")
        doc = json.loads(out)
        assert doc["lambda"] == pytest.approx(6.0, rel=1e-12)
        assert doc["y0"] == pytest.approx(2.0 / 7.0)
        assert doc["beta"] == "3/4"

    def test_fractional_t_with_r(self, capsys):
        rc, _, _ = run(capsys, "constants", "--t", "1.5", "--r", "4")
        assert rc == 2

    def test_small_t(self, capsys):
        rc, _, _ = run(capsys, "constants", "--t", "0.5")
        assert rc == 2


class TestMoments:
    def test_frozen_example(self, capsys):
        rc, out, _ = run(capsys, "moments", "--x", "10", "--t", "1", "--V", "1",
                         "--f", "char:4:1", "--g", "mu2yomega:1")
        assert rc == 0
        assert "S = 7.0" in out

    def test_csv_schema(self, capsys, tmp_path):
        path = tmp_path / "series.csv"
        rc, _, _ = run(capsys, "moments", "--x", "1000", "--t", "1", "--V", "2",
                       "--f", "char:4:1", "--g", "mu2yomega:1", "--out", str(path))
        assert rc == 0
        lines = path.read_text().splitlines()
        assert lines[0] == "x,S,t,V,mode,f,g,slope_hint"
        last = lines[-1].split(",")
        assert last[0] == "1000"
        assert last[4] == "sup"
        assert last[5] == "char:4:1"
        assert last[6] == "mu2yomega:1"
        assert float(last[7]) == float(lines[1].split(",")[7])

    def test_identical_bytes(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ("moments", "--x", "2000", "--t", "1", "--V", "1",
                "--f", "char:5:1", "--g", "yomega:0.5")
        run(capsys, *args, "--out", str(a))
        run(capsys, *args, "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_json_mirror(self, capsys, tmp_path):
        path = tmp_path / "series.json"
        rc, _, _ = run(capsys, "moments", "--x", "10", "--t", "1", "--V", "1",
                       "--f", "char:4:1", "--g", "mu2yomega:1", "--out", str(path))
        doc = json.loads(path.read_text())
        assert doc["series"]["values"][-1] == 7.0
        assert doc["envelope"]["upper_exponent"] == 0.0
        assert doc["envelope"]["fitted_slope"] is None  # too short to fit
        assert doc["slope_hint"] is None
        assert doc["config"]["x"] == 10

    def test_json_stdout_star(self, capsys):
        rc, out, _ = run(capsys, "moments", "--x", "10", "--t", "1", "--V", "1",
                         "--f", "char:4:1", "--g", "mu2yomega:1", "--star", "1",
                         "--json")
        doc = json.loads(out)
        assert doc["series"]["mode"] == "star"
        assert doc["series"]["values"][-1] == 7.0

    def test_mu_envelope_sanitized(self, capsys):
        # The third lower exponent does not apply to the Moebius family;
        # it must appear as null, keeping the JSON strict.
        rc, out, _ = run(capsys, "moments", "--x", "100", "--t", "1", "--V", "1",
                         "--f", "mu", "--g", "unit", "--json")
        doc = json.loads(out)
        assert doc["envelope"]["lower_exponents"][2] is None

    def test_x_cap(self, capsys):
        rc, _, _ = run(capsys, "moments", "--x", "1e20", "--t", "1", "--V", "1",
                       "--f", "unit", "--g", "unit")
        assert rc == 2

    def test_bad_g(self, capsys):
        rc, _, _ = run(capsys, "moments", "--x", "10", "--t", "1", "--V", "1",
                       "--f", "unit", "--g", "sigma:3")
        assert rc == 2


class TestVerify:
    def test_plancherel_small(self, capsys):
        rc, out, _ = run(capsys, "verify", "--suite", "plancherel",
                         "--max-n", "100")
        assert rc == 0
        assert "0 FAIL" in out

    def test_ulimits(self, capsys):
        rc, out, _ = run(capsys, "verify", "--suite", "ulimits")
        assert rc == 0
        assert "4/4 ok" in out

    def test_constants_identities(self, capsys):
        rc, out, _ = run(capsys, "verify", "--suite", "constants-identities")
        assert rc == 0

    def test_lemma31_small(self, capsys):
        rc, out, _ = run(capsys, "verify", "--suite", "lemma31", "--max-n", "120")
        assert rc == 0

    def test_split_small(self, capsys):
        rc, out, _ = run(capsys, "verify", "--suite", "split", "--max-n", "120")
        assert rc == 0

    def test_oracle_small(self, capsys):
        rc, out, _ = run(capsys, "verify", "--suite", "oracle-equivalence",
                         "--max-n", "120")
        assert rc == 0

    def test_trivialbound_small(self, capsys):
        rc, out, _ = run(capsys, "verify", "--suite", "trivialbound",
                         "--max-n", "200")
        assert rc == 0

    def test_lowerbounds_reports_false_floors(self, capsys):
        # The pointwise floors V*tau/log n and tau(n)V/(1+log n) are
        # refuted at small n (n=2 resp. n=1); the suite must say so.
        rc, out, _ = run(capsys, "verify", "--suite", "lowerbounds",
                         "--max-n", "200")
        assert rc == 1
        assert "FAIL" in out
        assert "vtaufloor" in out
        assert "REPORT-ONLY" in out

    def test_report_json_out(self, capsys, tmp_path):
        path = tmp_path / "report.json"
        rc, _, _ = run(capsys, "verify", "--suite", "ulimits",
                       "--out", str(path), "--json")
        doc = json.loads(path.read_text())
        assert doc["suite"] == "ulimits"
        assert doc["passed"] is True
        assert all(e["status"] == "PASS" for e in doc["entries"])

    def test_report_bytes_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(capsys, "verify", "--suite", "plancherel", "--max-n", "40",
            "--out", str(a))
        run(capsys, "verify", "--suite", "plancherel", "--max-n", "40",
            "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_unknown_suite(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["verify", "--suite", "bogus"])
        assert exc.value.code == 2

    def test_bad_max_n(self, capsys):
        rc, _, _ = run(capsys, "verify", "--suite", "ulimits", "--max-n", "0")
        assert rc == 2


def test_corpus_grid_shape():
    assert len(PLANCHEREL_NS) == 30
    assert PLANCHEREL_NS[0] == 1
    assert PLANCHEREL_NS[-1] == 10000
    assert list(PLANCHEREL_NS) == sorted(PLANCHEREL_NS)
