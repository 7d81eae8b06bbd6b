import json

import pytest
import yaml

from app.cli import build_parser, main
from app.process import GenerationSeries, OffspringCounts, read_observations, write_series_csv


def test_no_command_prints_help(capsys):
    assert main([]) == 1
    assert "simulate" in capsys.readouterr().out


class TestSimulate:
    def test_complete_csv(self, tmp_path):
        out = tmp_path / "counts.csv"
        assert main(["simulate", "--offspring", "poisson:1.2", "--generations", "5", "--seed", "3", "--out", str(out)]) == 0
        counts = read_observations(out)
        assert isinstance(counts, OffspringCounts)
        assert 1 <= counts.n <= 5

    def test_incomplete_csv(self, tmp_path):
        out = tmp_path / "series.csv"
        argv = ["simulate", "--offspring", "finite:0.25,0.25,0.25,0.25", "--incomplete", "--seed", "3", "--out", str(out)]
        assert main(argv) == 0
        series = read_observations(out)
        assert isinstance(series, GenerationSeries)
        assert series.z[0] == 1

    def test_same_seed_same_file(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            main(["simulate", "--offspring", "poisson:1.5", "--seed", "9", "--stream", "2", "--out", str(path)])
        assert paths[0].read_text() == paths[1].read_text()

    def test_bad_offspring(self, capsys):
        assert main(["simulate", "--offspring", "cauchy:1"]) == 2
        assert "Error (invalid_distribution)" in capsys.readouterr().err


class TestExtinction:
    def test_text(self, capsys):
        assert main(["extinction", "--offspring", "poisson:1.5"]) == 0
        assert "0.417" in capsys.readouterr().out

    def test_json(self, capsys):
        assert main(["extinction", "--offspring", "geometric:0.25", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["q"] == pytest.approx(1.0 / 3.0)
        assert payload["method"] == "closed_form"


class TestEstimate:
    @pytest.fixture
    def series_file(self, tmp_path):
        path = tmp_path / "series.csv"
        write_series_csv(GenerationSeries((1, 2, 3, 1, 3, 4)), path)
        return path

    def test_mle(self, series_file, capsys):
        assert main(["estimate", "--input", str(series_file), "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["estimator"] == "mle"
        assert payload["summary"]["m_hat"] == pytest.approx(1.3)
        assert payload["summary"]["classification"] == "supercritical"

    def test_complete_only_method_on_totals(self, series_file, capsys):
        assert main(["estimate", "--input", str(series_file), "--method", "dp"]) == 2
        assert "complete offspring counts" in capsys.readouterr().err

    def test_dirichlet_on_counts(self, tmp_path, capsys):
        path = tmp_path / "counts.csv"
        path.write_text("generation,j0,j1,j2\n0,0,0,1\n1,1,1,0\n2,1,0,0\n")
        argv = ["estimate", "--input", str(path), "--method", "dirichlet", "--k", "2", "--prior", "flat", "--format", "json"]
        assert main(argv) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["summary"]["m_hat"] == pytest.approx(6.0 / 7.0)
        assert payload["params"] == {"k": 2, "prior": "flat", "variant": "A"}

    def test_k_must_be_integer_or_auto(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["estimate", "--input", "x.csv", "--k", "many"])


class TestBench:
    def test_list(self, capsys, tmp_path):
        assert main(["bench", "--list", "--catalog", str(tmp_path / "none.yaml")]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 24
        assert lines[0].startswith("complete-known-m0.9")

    def test_dump_catalog(self, tmp_path):
        out = tmp_path / "catalog.yaml"
        assert main(["bench", "--catalog", str(tmp_path / "none.yaml"), "--dump-catalog", str(out)]) == 0
        assert len(yaml.safe_load(out.read_text())["groups"]) == 6

    def test_run_one_scenario(self, capsys, tmp_path):
        argv = [
            "bench", "--catalog", str(tmp_path / "none.yaml"),
            "--scenario", "complete-known-m1.2", "--reps", "3", "--seed", "4", "--format", "csv",
        ]
        assert main(argv) == 0
        out = capsys.readouterr().out
        assert out.startswith("scenario,m_true,estimator,proportion_correct")
        assert "dp(a=100)" in out

    def test_unknown_scenario(self, capsys, tmp_path):
        argv = ["bench", "--catalog", str(tmp_path / "none.yaml"), "--scenario", "nope"]
        assert main(argv) == 2
        assert "unknown_scenario" in capsys.readouterr().err


class TestCovid:
    def test_report(self, case_fixture, capsys):
        argv = [
            "covid", "--input", str(case_fixture),
            "--wave-start", "2020-02-26", "--wave-start", "2020-08-20", "--wave-days", "10",
            "--methods", "mle,heyde", "--format", "json",
        ]
        assert main(argv) == 0
        reports = json.loads(capsys.readouterr().out)
        assert [r["wave"] for r in reports] == ["wave 1 (2020-02-26)", "wave 2 (2020-08-20)"]
        assert len(reports[0]["rows"]) == 10
        assert reports[1]["rows"][-2]["m_hat"] == pytest.approx(71 / 55)

    def test_days_option(self, case_fixture, capsys):
        argv = ["covid", "--input", str(case_fixture), "--days", "2,3", "--methods", "mle", "--format", "csv"]
        assert main(argv) == 0
        assert "q_geometric" in capsys.readouterr().out.splitlines()[0]

    def test_bad_file(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("date,count\n2020-01-01,x\n")
        assert main(["covid", "--input", str(path)]) == 2
        assert "line 2" in capsys.readouterr().err
