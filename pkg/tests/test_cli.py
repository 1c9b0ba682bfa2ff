"""End-to-end command line runs."""

from __future__ import annotations

import json
import math
import subprocess
import sys

import pytest

from ppsmc.cli import main
from ppsmc.models import PoissonProcessModel, log_probability
from ppsmc.music.encoding import MusicEvent, Vocabulary, events_to_codes
from ppsmc.music.files import write_events


@pytest.fixture()
def constraint_file(tmp_path):
    path = tmp_path / "cs.json"
    path.write_text(json.dumps({"version": 1, "kind": "constraints",
                                "z": [0.3, 0.6], "b": [True, False]}))
    return path


def read_json(path):
    return json.loads(path.read_text())


class TestSampleCommand:
    def test_writes_result_samples_and_diagnostics(self, tmp_path, constraint_file):
        out = tmp_path / "out"
        code = main(["sample", "--model", "poisson:rate=5", "--constraints",
                     str(constraint_file), "--seed", "9", "--particles", "40",
                     "--out", str(out)])
        assert code == 0
        result = read_json(out / "result.json")
        assert result["survived"] is True
        times = read_json(out / "sample_0000.json")["times"]
        assert 0.3 in times and times[-1] == 0.6
        lines = (out / "diagnostics.jsonl").read_text().splitlines()
        assert json.loads(lines[0])["kind"] == "diagnostics"
        assert len(lines) == 3  # header + two interior barriers

    def test_same_invocation_is_byte_identical(self, tmp_path, constraint_file):
        args = ["sample", "--model", "poisson:rate=5", "--constraints",
                str(constraint_file), "--seed", "4", "--particles", "30",
                "--keep", "0"]
        main(args + ["--out", str(tmp_path / "a")])
        main(args + ["--out", str(tmp_path / "b")])
        for name in ("result.json", "diagnostics.jsonl", "sample_0001.json"):
            assert (tmp_path / "a" / name).read_bytes() == \
                   (tmp_path / "b" / name).read_bytes()

    def test_multi_run_summary(self, tmp_path, constraint_file):
        out = tmp_path / "out"
        code = main(["sample", "--model", "poisson:rate=5", "--constraints",
                     str(constraint_file), "--seed", "2", "--particles", "20",
                     "--runs", "3", "--out", str(out)])
        assert code == 0
        summary = read_json(out / "summary.json")
        assert summary["runs"] == 3 and summary["survived"] == 3
        assert (out / "run_002" / "result.json").exists()

    def test_dead_ensemble_exits_3(self, tmp_path):
        # A closed 0.3-wide gap can never be one hop for gaps capped at 0.02.
        cs = tmp_path / "dead.json"
        cs.write_text(json.dumps({"version": 1, "kind": "constraints",
                                  "z": [0.3, 0.6], "b": [False, False]}))
        out = tmp_path / "out"
        code = main(["sample", "--model", "uniform:low=0.01,high=0.02",
                     "--constraints", str(cs), "--seed", "1",
                     "--particles", "10", "--out", str(out)])
        assert code == 3
        result = read_json(out / "result.json")
        assert result["survived"] is False and result["failed_barrier"] == 2

    def test_unknown_model_exits_1(self, tmp_path, constraint_file, capsys):
        code = main(["sample", "--model", "cauchy:loc=0", "--constraints",
                     str(constraint_file), "--seed", "1", "--out", str(tmp_path / "x")])
        assert code == 1
        assert "unknown model" in capsys.readouterr().err

    def test_missing_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2


class TestBeamCommand:
    def test_reports_scores(self, tmp_path, constraint_file):
        out = tmp_path / "out"
        code = main(["beam", "--model", "poisson:rate=5", "--constraints",
                     str(constraint_file), "--seed", "9", "--beam-b", "4",
                     "--beam-f", "3", "--keep", "0", "--out", str(out)])
        assert code == 0
        result = read_json(out / "result.json")
        assert len(result["log_probs"]) == len(result["samples"]) >= 1


class TestLogprobCommand:
    def test_empty_sequence_scores_zero(self, tmp_path):
        sample = tmp_path / "empty.json"
        sample.write_text(json.dumps({"version": 1, "kind": "times", "times": []}))
        report_path = tmp_path / "report.json"
        assert main(["logprob", "--model", "poisson:rate=2", "--out",
                     str(report_path), str(sample)]) == 0
        report = read_json(report_path)
        assert report["entries"][0]["log_prob"] == 0.0

    def test_agrees_with_library_scoring(self, tmp_path):
        times = [0.1, 0.4, 0.75]
        sample = tmp_path / "s.json"
        sample.write_text(json.dumps({"version": 1, "kind": "times", "times": times}))
        report_path = tmp_path / "report.json"
        main(["logprob", "--model", "poisson:rate=3", "--out", str(report_path),
              str(sample)])
        entry = read_json(report_path)["entries"][0]
        expected = log_probability(PoissonProcessModel(rate=3.0), tuple(times))
        assert entry["log_prob"] == pytest.approx(expected, rel=1e-12)

    def test_impossible_step_is_flagged(self, tmp_path):
        sample = tmp_path / "s.json"
        sample.write_text(json.dumps({"version": 1, "kind": "times",
                                      "times": [0.3, 0.35]}))
        report_path = tmp_path / "report.json"
        main(["logprob", "--model", "uniform:low=0.2,high=0.4", "--out",
              str(report_path), str(sample)])
        entry = read_json(report_path)["entries"][0]
        assert entry["log_prob"] is None and entry["offending_step"] == 1


class TestOracleCommand:
    def test_small_comparison_passes(self, tmp_path):
        report_path = tmp_path / "oracle.json"
        code = main(["oracle", "--cells", "6", "--observed", "3", "--grid",
                     "const:p=0.4", "--particles", "400", "--runs", "20",
                     "--seed", "12", "--threshold", "0.08", "--out", str(report_path)])
        assert code == 0
        report = read_json(report_path)
        assert report["pass"] is True and report["tv"] < 0.08


class TestMusicPipeline:
    def make_corpus(self, directory, vocab):
        directory.mkdir()
        pieces = [
            [MusicEvent(0, 61), MusicEvent(0, 65), MusicEvent(2, 189),
             MusicEvent(2, 193)],
            [MusicEvent(0, 65), MusicEvent(1, 61), MusicEvent(1, 193),
             MusicEvent(3, 189)],
            [MusicEvent(0, 61), MusicEvent(2, 65), MusicEvent(2, 189),
             MusicEvent(4, 193)],
        ]
        for i, piece in enumerate(pieces):
            write_events(directory / f"p{i}.jsonl", piece, vocab)

    def test_train_extract_sample_logprob(self, tmp_path):
        vocab = Vocabulary(s_max=4)
        corpus = tmp_path / "corpus"
        self.make_corpus(corpus, vocab)

        model_path = tmp_path / "model.json"
        assert main(["train", "--corpus", str(corpus), "--order", "2",
                     "--alpha", "0.5", "--s-max", "4", "--out", str(model_path)]) == 0

        cs_path = tmp_path / "cs.json"
        assert main(["extract-constraints", "--events", str(corpus / "p0.jsonl"),
                     "--split-tick", "1", "--part", "0", "--out", str(cs_path)]) == 0
        payload = read_json(cs_path)
        assert payload["prefix"] == events_to_codes(
            [MusicEvent(0, 61), MusicEvent(0, 65)], vocab)

        out = tmp_path / "gen"
        assert main(["sample", "--model", str(model_path), "--constraints",
                     str(cs_path), "--seed", "6", "--particles", "30",
                     "--out", str(out)]) == 0
        sample_file = out / "sample_0000.jsonl"
        assert sample_file.exists()

        report_path = tmp_path / "lp.json"
        assert main(["logprob", "--model", str(model_path), "--out",
                     str(report_path), str(sample_file)]) == 0
        entry = read_json(report_path)["entries"][0]
        assert entry["log_prob"] is not None and entry["log_prob"] < 0.0


class TestConvertCommand:
    def test_events_to_midi_and_back(self, tmp_path):
        vocab = Vocabulary()
        piece = [MusicEvent(0, 61), MusicEvent(2400, 189)]
        events_path = tmp_path / "p.jsonl"
        write_events(events_path, piece, vocab)
        midi_path = tmp_path / "p.mid"
        back_path = tmp_path / "back.jsonl"
        assert main(["convert", "--to-midi", str(events_path), str(midi_path)]) == 0
        assert main(["convert", "--to-events", str(midi_path), str(back_path)]) == 0
        assert events_path.read_bytes() == back_path.read_bytes()


class TestConsoleScript:
    def test_entry_point_is_installed(self):
        proc = subprocess.run([sys.executable, "-m", "ppsmc.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "sample" in proc.stdout
