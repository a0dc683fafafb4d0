import json
import subprocess
import sys

import pytest

from ulam.cli import main


def run_cli(*argv, env_extra=None, stdin=""):
    import os
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "ulam.cli", *argv],
                          capture_output=True, text=True, input=stdin, env=env)


class TestSample:
    def test_words_satisfy_invariants(self, tmp_path):
        out = tmp_path / "words.csv"
        assert main(["sample", "--n", "2", "--k", "2", "--count", "3",
                     "--seed", "1", "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 3
        for line in lines:
            letters = sorted(int(v) for v in line.split(","))
            assert letters == [1, 1, 2, 2]

    def test_unique_word(self):
        res = run_cli("sample", "--n", "1", "--k", "3", "--count", "1")
        assert res.returncode == 0
        assert res.stdout.strip() == "1,1,1"

    def test_json_format(self, tmp_path):
        out = tmp_path / "words.json"
        main(["sample", "--n", "2", "--k", "1", "--count", "2", "--seed", "4",
              "--format", "json", "--out", str(out)])
        data = json.loads(out.read_text())
        assert isinstance(data, list) and len(data) == 2

    def test_missing_n_exits_2(self):
        res = run_cli("sample", "--k", "2", "--count", "1")
        assert res.returncode == 2
        assert "--n" in res.stderr


class TestLis:
    def test_word_examples(self, capsys):
        assert main(["lis", "--word", "2,2,1,1", "--order", "strict"]) == 0
        assert capsys.readouterr().out.strip() == "1"
        assert main(["lis", "--word", "1,1,2,2", "--order", "weak"]) == 0
        assert capsys.readouterr().out.strip() == "4"

    def test_empty_input(self):
        res = run_cli("lis", stdin="")
        assert res.returncode == 0
        assert res.stdout.strip() == "0"

    def test_point_file(self, tmp_path, capsys):
        f = tmp_path / "pts.csv"
        f.write_text("0.5,1\n0.7,2\n0.9,2\n")
        assert main(["lis", "--input", str(f), "--order", "weak"]) == 0
        assert capsys.readouterr().out.strip() == "3"

    def test_parse_failure_exits_2(self):
        res = run_cli("lis", "--word", "a,b,c")
        assert res.returncode == 2


class TestSimulate:
    def test_counts_non_decreasing(self, tmp_path):
        d = tmp_path / "sim"
        assert main(["simulate", "--x", "10", "--t", "100", "--lambda", "1",
                     "--variant", "strict", "--seed", "7", "--out-dir", str(d)]) == 0
        rows = (d / "counts.csv").read_text().strip().splitlines()[1:]
        assert len(rows) == 100
        counts = [int(r.split(",")[1]) for r in rows]
        assert all(b >= a for a, b in zip(counts, counts[1:]))

    def test_alpha_derives_sink_rate(self, tmp_path):
        d = tmp_path / "simb"
        assert main(["simulate", "--x", "5", "--t", "20", "--lambda", "1",
                     "--variant", "strict", "--alpha", "1", "--seed", "3",
                     "--out-dir", str(d)]) == 0
        man = json.loads((d / "manifest.json").read_text())
        assert man["parameters"]["sink_param"] == pytest.approx(0.5)

    def test_invalid_weak_rate_exits_2(self, tmp_path):
        code = main(["simulate", "--x", "1", "--t", "5", "--lambda", "1",
                     "--variant", "weak", "--beta", "0.5",
                     "--out-dir", str(tmp_path / "x")])
        assert code == 2

    def test_trace_written(self, tmp_path):
        d = tmp_path / "simt"
        main(["simulate", "--x", "3", "--t", "10", "--lambda", "1",
              "--variant", "weak", "--seed", "9", "--trace", "--out-dir", str(d)])
        header = (d / "trace.csv").read_text().splitlines()[0]
        assert header == "step,particle_index,position,event"


class TestEstimate:
    def test_report_schema_and_prediction(self, tmp_path):
        d = tmp_path / "est"
        assert main(["estimate", "--n", "400", "--k", "100", "--order", "strict",
                     "--reps", "10", "--seed", "3", "--out-dir", str(d)]) == 0
        rep = json.loads((d / "report.json").read_text())
        assert rep["predicted"] == 300.0
        assert set(rep) == {"command", "params", "seed", "mean", "stderr",
                            "reps", "predicted", "rel_error"}
        plot = (d / "plot.csv").read_text().splitlines()
        assert plot[0] == "n,k,mean,stderr,predicted"

    def test_poisson_mode(self, tmp_path):
        d = tmp_path / "estp"
        assert main(["estimate", "--mode", "poisson", "--x", "1", "--t", "4",
                     "--lambda", "1", "--order", "weak", "--reps", "20",
                     "--seed", "5", "--out-dir", str(d)]) == 0
        rep = json.loads((d / "report.json").read_text())
        assert rep["predicted"] == 5.0


class TestVerifyAndTails:
    def test_verify_passes(self, capsys):
        assert main(["verify", "--clouds", "60", "--boundary", "30",
                     "--seed", "5"]) == 0
        assert "passed" in capsys.readouterr().out

    def test_tails_poisson_certificate(self, tmp_path, capsys):
        out = tmp_path / "cert.csv"
        assert main(["tails", "--kind", "poisson", "--out", str(out)]) == 0
        header = out.read_text().splitlines()[0]
        assert header.startswith("kind,lam,a,")

    def test_tails_geomsum_reports_violations(self, tmp_path):
        # the geometric-sum closed form genuinely fails in the heavy corner;
        # the certificate must say so and exit nonzero
        out = tmp_path / "cert.csv"
        assert main(["tails", "--kind", "geomsum", "--out", str(out)]) == 1
        body = out.read_text()
        assert ",False" in body and ",True" in body


class TestReproducibility:
    def test_same_seed_byte_identical(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        for d in (d1, d2):
            main(["estimate", "--n", "20", "--k", "2", "--order", "strict",
                  "--reps", "10", "--seed", "11", "--out-dir", str(d)])
        assert (d1 / "report.json").read_bytes() == (d2 / "report.json").read_bytes()
        assert (d1 / "plot.csv").read_bytes() == (d2 / "plot.csv").read_bytes()

    def test_manifest_replay_reproduces(self, tmp_path):
        d = tmp_path / "run"
        main(["estimate", "--n", "15", "--k", "2", "--order", "weak",
              "--reps", "8", "--seed", "13", "--out-dir", str(d)])
        first = (d / "report.json").read_bytes()
        assert main(["--manifest", str(d / "manifest.json")]) == 0
        assert (d / "report.json").read_bytes() == first

    def test_manifest_written_before_results(self, tmp_path):
        d = tmp_path / "m"
        main(["simulate", "--x", "2", "--t", "5", "--lambda", "1",
              "--seed", "2", "--out-dir", str(d)])
        man = json.loads((d / "manifest.json").read_text())
        assert man["command"] == "simulate"
        assert man["finished"] is not None
        assert str(d / "counts.csv") in man["output_paths"]

    def test_env_seed_default(self, tmp_path):
        res1 = run_cli("sample", "--n", "3", "--k", "1", "--count", "2",
                       env_extra={"ULAM_SEED": "77"})
        res2 = run_cli("sample", "--n", "3", "--k", "1", "--count", "2",
                       "--seed", "77")
        assert res1.stdout == res2.stdout

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("word = 2,2,1,1\norder = weak\n")
        assert main(["lis", "--config", str(cfg)]) == 0
        assert capsys.readouterr().out.strip() == "2"
        assert main(["lis", "--config", str(cfg), "--order", "strict"]) == 0
        assert capsys.readouterr().out.strip() == "1"

    def test_jobs_flag_result_invariant(self, tmp_path):
        d1, d2 = tmp_path / "j1", tmp_path / "j8"
        for d, jobs in ((d1, "1"), (d2, "8")):
            main(["estimate", "--n", "12", "--k", "2", "--order", "strict",
                  "--reps", "16", "--seed", "21", "--jobs", jobs,
                  "--out-dir", str(d)])
        assert (d1 / "report.json").read_bytes() == (d2 / "report.json").read_bytes()
