"""File formats, splitting, and end-to-end experiment runs."""

import numpy as np
import pytest

from ldprepr.codec import EmbeddingVector
from ldprepr.errors import ParameterError, ParseError
from ldprepr.io import (
    BitDataset,
    EmbeddingDataset,
    format_report,
    load_bits,
    load_embeddings,
    parse_config,
    read_report,
    write_bits,
    write_embeddings,
    write_report,
)
from ldprepr.codec import BitVector
from ldprepr.ldp import RngSeed
from ldprepr.pipeline import (
    ExperimentConfig,
    emit_probability_curves,
    make_synthetic_embeddings,
    run_experiment,
    split,
)


def write_text(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


GOOD_EMB = "#emb dim=3 classes=2\n0\t1.5,-2.25,0.75\n1\t0.0,4.0,-1.0\n"


class TestEmbeddingFile:
    def test_parses_well_formed_file(self, tmp_path):
        ds = load_embeddings(write_text(tmp_path / "e.tsv", GOOD_EMB))
        assert ds.dim == 3 and ds.num_classes == 2
        assert len(ds.records) == 2
        np.testing.assert_array_equal(ds.records[0].values, [1.5, -2.25, 0.75])
        assert ds.records[1].label == 1

    def test_round_trip(self, tmp_path):
        original = make_synthetic_embeddings(num_records=8, dim=5, seed=3)
        path = str(tmp_path / "rt.tsv")
        write_embeddings(original, path)
        loaded = load_embeddings(path)
        assert len(loaded.records) == 8
        for a, b in zip(original.records, loaded.records):
            assert a.label == b.label
            np.testing.assert_array_equal(a.values, b.values)

    def test_wrong_value_count_names_line(self, tmp_path):
        bad = "#emb dim=3 classes=2\n0\t1.0,2.0,3.0\n1\t1.0,2.0\n"
        with pytest.raises(ParseError) as err:
            load_embeddings(write_text(tmp_path / "bad.tsv", bad))
        assert err.value.line == 3

    def test_empty_file(self, tmp_path):
        with pytest.raises(ParseError) as err:
            load_embeddings(write_text(tmp_path / "empty.tsv", ""))
        assert err.value.line == 1

    def test_header_only(self, tmp_path):
        with pytest.raises(ParseError):
            load_embeddings(write_text(tmp_path / "h.tsv", "#emb dim=3 classes=2\n"))

    @pytest.mark.parametrize("row,line", [
        ("x\t1.0,2.0,3.0", 2),
        ("5\t1.0,2.0,3.0", 2),
        ("0\t1.0,nan,3.0", 2),
        ("0\t1.0,two,3.0", 2),
        ("0 1.0,2.0,3.0", 2),
    ])
    def test_malformed_rows(self, tmp_path, row, line):
        text = "#emb dim=3 classes=2\n" + row + "\n"
        with pytest.raises(ParseError) as err:
            load_embeddings(write_text(tmp_path / "m.tsv", text))
        assert err.value.line == line

    def test_bad_header(self, tmp_path):
        with pytest.raises(ParseError):
            load_embeddings(write_text(tmp_path / "bh.tsv", "#emb dim=x classes=2\n"))


class TestBitFile:
    def test_round_trip(self, tmp_path):
        gen = np.random.default_rng(0)
        records = [
            BitVector(label=int(i % 2), bits=gen.integers(0, 2, 20, dtype=np.uint8))
            for i in range(5)
        ]
        path = str(tmp_path / "bits.tsv")
        write_bits(BitDataset(records=records, length=20, num_classes=2), path)
        loaded = load_bits(path)
        assert loaded.length == 20
        for a, b in zip(records, loaded.records):
            assert a.label == b.label
            np.testing.assert_array_equal(a.bits, b.bits)

    def test_rejects_wrong_length_and_alphabet(self, tmp_path):
        text = "#bits len=4 classes=2\n0\t0101\n1\t010\n"
        with pytest.raises(ParseError) as err:
            load_bits(write_text(tmp_path / "b1.tsv", text))
        assert err.value.line == 3
        text = "#bits len=4 classes=2\n0\t0102\n"
        with pytest.raises(ParseError):
            load_bits(write_text(tmp_path / "b2.tsv", text))


class TestConfigFile:
    def test_parses_full_config(self, tmp_path):
        text = (
            "# comment line\n"
            "mode = ldpnn\n"
            "protocol = sue\n"
            "epsilon = 2.5\n"
            "lambda = 50\n"
            "runs = 3\n"
            "epochs = 7\n"
            "base_seed = 99\n"
            "split_ratio = 0.75\n"
            "input_path = data.tsv\n"
            "output_path = report.txt\n"
        )
        config = parse_config(write_text(tmp_path / "exp.cfg", text))
        assert config.mode == "ldpnn"
        assert config.protocol == "sue"
        assert config.epsilon == 2.5
        assert config.lam == 50.0
        assert config.runs == 3
        assert config.epochs == 7
        assert config.base_seed == 99
        assert config.split_ratio == 0.75
        # untouched defaults
        assert config.int_bits == 4 and config.frac_bits == 5
        assert config.batch_size == 32

    def test_unknown_key_names_line(self, tmp_path):
        text = "mode = npnn\ninput_path = a\noutput_path = b\nbogus = 1\n"
        with pytest.raises(ParseError) as err:
            parse_config(write_text(tmp_path / "u.cfg", text))
        assert err.value.line == 4

    def test_missing_required_key(self, tmp_path):
        with pytest.raises(ParseError):
            parse_config(write_text(tmp_path / "m.cfg", "mode = npnn\n"))

    def test_env_overrides_base_seed(self, tmp_path, monkeypatch):
        text = "mode = npnn\nbase_seed = 1\ninput_path = a\noutput_path = b\n"
        path = write_text(tmp_path / "env.cfg", text)
        monkeypatch.setenv("LDPREPR_SEED", "777")
        assert parse_config(path).base_seed == 777

    def test_rejects_bad_mode(self, tmp_path):
        text = "mode = nope\ninput_path = a\noutput_path = b\n"
        with pytest.raises(ParameterError):
            parse_config(write_text(tmp_path / "bm.cfg", text))


class TestSplit:
    def test_eighty_twenty_sizes(self):
        records = list(range(1000))
        train, test = split(records, 0.8, RngSeed(0))
        assert len(train) == 800 and len(test) == 200

    def test_floor_rule(self):
        train, test = split([1, 2, 3], 0.5, RngSeed(0))
        assert len(train) == 1 and len(test) == 2

    def test_same_seed_same_partition(self):
        records = list(range(50))
        assert split(records, 0.8, RngSeed(4)) == split(records, 0.8, RngSeed(4))

    def test_disjoint_and_exhaustive(self):
        records = list(range(101))
        train, test = split(records, 0.37, RngSeed(5))
        assert sorted(train + test) == records
        assert not set(train) & set(test)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ParameterError):
            split(list(range(10)), 1.0, RngSeed(0))
        with pytest.raises(ParameterError):
            split([1], 0.5, RngSeed(0))


class TestSyntheticData:
    def test_shape_balance_determinism(self):
        ds = make_synthetic_embeddings(num_records=40, dim=10, seed=5)
        assert ds.dim == 10 and ds.num_classes == 2
        labels = [r.label for r in ds.records]
        assert labels.count(0) == labels.count(1) == 20
        again = make_synthetic_embeddings(num_records=40, dim=10, seed=5)
        np.testing.assert_array_equal(ds.records[7].values, again.records[7].values)

    def test_classes_are_separated(self):
        ds = make_synthetic_embeddings(num_records=200, dim=50, seed=6)
        X = np.stack([r.values for r in ds.records])
        y = np.array([r.label for r in ds.records])
        gap = np.linalg.norm(X[y == 0].mean(axis=0) - X[y == 1].mean(axis=0))
        assert gap > 5.0


def smoke_config(tmp_path, **overrides):
    ds = make_synthetic_embeddings(num_records=60, dim=10, seed=1)
    input_path = str(tmp_path / "data.tsv")
    write_embeddings(ds, input_path)
    fields = dict(
        mode="ldpnn", input_path=input_path,
        output_path=str(tmp_path / "report.txt"),
        protocol="ome", epsilon=1.0, lam=100.0, hidden_units=8,
        batch_size=16, epochs=2, runs=2, base_seed=3,
    )
    fields.update(overrides)
    return ExperimentConfig(**fields)


class TestRunExperiment:
    def test_report_structure_and_consistency(self, tmp_path):
        report = run_experiment(smoke_config(tmp_path, runs=3))
        assert len(report.accuracies) == 3
        assert report.mean_accuracy == pytest.approx(
            float(np.mean(report.accuracies)), abs=1e-12
        )
        assert report.std_accuracy == pytest.approx(
            float(np.std(report.accuracies)), abs=1e-12
        )
        assert set(report.probabilities) == {"p1", "p2", "q"}
        assert report.duration_seconds > 0
        assert all(0.0 <= a <= 1.0 for a in report.accuracies)

    def test_trust_boundary_audit(self, tmp_path):
        report = run_experiment(smoke_config(tmp_path))
        assert len(report.audit) == 2 * report.config.runs
        assert all("ome-perturbed bits" in entry for entry in report.audit)
        assert not any("real" in entry or "clean" in entry for entry in report.audit)

    def test_npnn_uses_real_embeddings(self, tmp_path):
        report = run_experiment(smoke_config(tmp_path, mode="npnn"))
        assert all("normalized real embeddings" in entry for entry in report.audit)
        assert report.probabilities == {}

    def test_npnn_bits_diagnostic_mode(self, tmp_path):
        report = run_experiment(smoke_config(tmp_path, mode="npnn_bits"))
        assert all("clean encoded bits" in entry for entry in report.audit)

    def test_ue_protocol_probability_echo(self, tmp_path):
        report = run_experiment(smoke_config(tmp_path, protocol="oue"))
        assert report.probabilities["p1"] == 0.5
        assert report.probabilities["p1"] == report.probabilities["p2"]

    def test_reproducible_modulo_wall_clock(self, tmp_path):
        config = smoke_config(tmp_path)
        a = run_experiment(config)
        b = run_experiment(config)
        assert a.accuracies == b.accuracies

        def body(report):
            return [
                line for line in format_report(report).splitlines()
                if not line.startswith("duration_seconds")
            ]

        assert body(a) == body(b)

    def test_report_file_round_trip(self, tmp_path):
        config = smoke_config(tmp_path)
        report = run_experiment(config)
        write_report(report, config.output_path)
        parsed = read_report(config.output_path)
        assert parsed["mode"] == "ldpnn"
        assert parsed["lambda"] == "100.0"
        assert float(parsed["mean_accuracy"]) == report.mean_accuracy
        assert float(parsed["q"]) == report.probabilities["q"]
        assert f"run_{config.runs - 1}_accuracy" in parsed

    def test_twenty_runs_list_twenty_accuracies(self, tmp_path):
        config = smoke_config(tmp_path, runs=20, epochs=1, hidden_units=4)
        report = run_experiment(config)
        assert len(report.accuracies) == 20

    def test_wide_vectors_run_end_to_end(self, tmp_path):
        ds = make_synthetic_embeddings(num_records=20, dim=768, seed=2)
        input_path = str(tmp_path / "wide.tsv")
        write_embeddings(ds, input_path)
        config = ExperimentConfig(
            mode="ldpnn", input_path=input_path, protocol="ome",
            hidden_units=4, epochs=1, runs=1, batch_size=8,
        )
        report = run_experiment(config)
        assert len(report.accuracies) == 1


class TestProbabilityCurves:
    def test_reference_values_in_file(self, tmp_path):
        # 50 elements x 11 bits puts the OME sensitivity at 550 while the
        # unary-encoding sensitivity 2r stays at 100.
        out = str(tmp_path / "curves.tsv")
        emit_probability_curves(
            ["ome", "sue", "oue"], [0.5, 1.0, 5.0, 10.0],
            [1.0, 10.0, 50.0, 100.0], 50, 11, out,
        )
        lines = open(out, encoding="utf-8").read().splitlines()
        assert lines[0] == "protocol\tepsilon\tlambda\tp1\tp2\tq"
        rows = [line.split("\t") for line in lines[1:]]
        ome = {(r[1], r[2]): r for r in rows if r[0] == "ome"}
        assert len(ome) == 16
        q = float(ome[("1.0", "100.0")][5])
        assert q == pytest.approx(0.00988318240762078, abs=1e-12)
        sue = {r[1]: r for r in rows if r[0] == "sue"}
        assert float(sue["0.5"][5]) == pytest.approx(0.49875000260416, abs=1e-12)
        assert sue["0.5"][2] == ""
        oue = [r for r in rows if r[0] == "oue"]
        assert all(float(r[3]) == 0.5 for r in oue)

    def test_rejects_empty_grid(self, tmp_path):
        with pytest.raises(ParameterError):
            emit_probability_curves(["ome"], [], [1.0], 55, 10, str(tmp_path / "x"))
