import json

import numpy as np
import pandas as pd
import pytest

from smoothcopula.estimation.estimators import EstimatorTag
from smoothcopula.schemas import SweepRow
from smoothcopula.shared.errors import ConfigurationError, DataIOError, DomainError, GrammarError
from smoothcopula.shared.utils.file_handler import (list_presets, load_config, load_observations,
                                                    load_sweep_config, parse_sweep_document, save_csv, save_json)

DOCUMENT = {
    "model": "clayton:tau=0.5",
    "n": 20,
    "reps": 10,
    "integration_nodes": 16,
    "estimators": ["ebc", "beta-binomial:rho=4"],
    "axis": "n",
    "values": [10, 20],
}


class TestLoadObservations:
    def test_with_header(self, tmp_path):
        path = tmp_path / "sample.csv"
        path.write_text("x,y\n0.1,0.2\n0.3,0.4\n", encoding="utf-8")
        sample = load_observations(path)
        assert (sample.n, sample.d) == (2, 2)
        np.testing.assert_array_equal(sample.values, [[0.1, 0.2], [0.3, 0.4]])

    def test_without_header(self, tmp_path):
        path = tmp_path / "sample.csv"
        path.write_text("0.1,0.2,5\n0.3,0.4,-1e3\n", encoding="utf-8")
        sample = load_observations(path)
        np.testing.assert_array_equal(sample.values, [[0.1, 0.2, 5.0], [0.3, 0.4, -1000.0]])

    @pytest.mark.parametrize("content", ["", "x,y\n", "x,y\n0.1,abc\n"])
    def test_unusable_files(self, tmp_path, content):
        path = tmp_path / "sample.csv"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(DataIOError):
            load_observations(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataIOError):
            load_observations(tmp_path / "missing.csv")

    def test_non_finite_values(self, tmp_path):
        path = tmp_path / "sample.csv"
        path.write_text("0.1,inf\n0.3,0.4\n", encoding="utf-8")
        with pytest.raises(DomainError):
            load_observations(path)


class TestSaveCsv:
    def test_round_trip_is_exact(self, tmp_path, rng):
        values = rng.random((25, 3)) * 10.0 ** rng.integers(-8, 8, (25, 3))
        path = tmp_path / "nested" / "out.csv"
        save_csv(pd.DataFrame(values, columns=["u1", "u2", "u3"]), path)
        np.testing.assert_array_equal(load_observations(path).values, values)

    def test_line_endings(self, tmp_path):
        path = tmp_path / "out.csv"
        save_csv(pd.DataFrame({"n": [1, 2], "value": [0.5, 0.25]}), path)
        content = path.read_bytes()
        assert b"\r\n" not in content
        assert content.decode("utf-8").splitlines()[0] == "n,value"

    def test_stdout(self, capsys):
        save_csv(pd.DataFrame({"a": [0.1]}))
        assert capsys.readouterr().out == "a\n0.10000000000000001\n"

    def test_unwritable_target(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("", encoding="utf-8")
        with pytest.raises(DataIOError):
            save_csv(pd.DataFrame({"a": [1.0]}), blocker / "out.csv")


class TestConfigs:
    def test_presets_are_bundled(self):
        presets = list_presets()
        assert {"clayton_comparison", "frank_comparison", "gumbel3d_comparison", "rho_sweep", "pilot_tau_sweep"} <= set(presets)

    @pytest.mark.parametrize("name", ["clayton_comparison", "frank_comparison", "gumbel3d_comparison", "clayton_tau_sweep",
                                      "clayton_n_sweep", "rho_sweep", "pilot_tau_sweep"])
    def test_presets_validate(self, name):
        sweep_config = load_sweep_config(name)
        assert sweep_config.expand()

    def test_documented_defaults(self):
        sweep_config = parse_sweep_document({"model": "clayton:tau=0.5", "n": 30, "estimators": ["ebc"]})
        base = sweep_config.base
        assert (base.reps, base.integration_nodes, base.seed) == (2000, 1024, 42)
        assert (sweep_config.axis, sweep_config.values, sweep_config.reference) == ("n", [], None)
        assert sweep_config.expand() == [base]

    @pytest.mark.parametrize("name", list_presets())
    def test_presets_use_documented_fields(self, name):
        documented = {"model", "n", "reps", "integration_nodes", "estimators", "seed", "axis", "values", "reference"}
        assert set(load_config(name)) <= documented

    def test_overrides(self):
        sweep_config = load_sweep_config("clayton_comparison.json", overrides={"reps": 10, "seed": None})
        assert sweep_config.base.reps == 10
        assert sweep_config.base.seed == 20170301
        assert sweep_config.axis == "tau"
        assert sweep_config.base.estimators[0] == EstimatorTag.EMPIRICAL_BETA

    def test_yaml_file(self, tmp_path):
        path = tmp_path / "sweep.yaml"
        path.write_text("model: frank:tau=-0.3\nn: 15\nestimators: [ebc, 'binomial:pilot=ebc']\n"
                        "axis: n\nvalues: [10, 15]\n", encoding="utf-8")
        sweep_config = load_sweep_config(path)
        assert [config.n for config in sweep_config.expand()] == [10, 15]

    def test_nested_document(self):
        sweep_config = parse_sweep_document({"base": {k: v for k, v in DOCUMENT.items()
                                                      if k not in ("axis", "values")},
                                             "axis": "n", "values": [10]})
        assert sweep_config.base.n == 20

    def test_unknown_config(self):
        with pytest.raises(DataIOError):
            load_config("no_such_preset")

    @pytest.mark.parametrize("content", ["{not json", "[1, 2]"])
    def test_unparsable_config(self, tmp_path, content):
        path = tmp_path / "bad.json"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(ConfigurationError):
            load_config(path)

    @pytest.mark.parametrize("update, error", [
        ({"estimators": ["ebc", "bogus"]}, GrammarError),
        ({"model": "clayton:tau=-0.5"}, DomainError),
        ({"reps": 1}, ConfigurationError),
        ({"axis": "theta"}, ConfigurationError),
        ({"n": None}, ConfigurationError),
    ])
    def test_schema_errors_keep_their_kind(self, update, error):
        document = {**DOCUMENT, **update}
        with pytest.raises(error):
            parse_sweep_document(document)


def test_save_json(tmp_path):
    row = SweepRow(axis=0.5, estimator="ebc", isb=1e-4, ivar=2e-4, imse=3e-4, se_isb=0.0, se_ivar=0.0,
                   se_imse=0.0, rel_eff=100.0)
    path = tmp_path / "out" / "rows.json"
    save_json({"rows": [row], "nodes": np.arange(3), "scale": np.float64(0.5), "tag": EstimatorTag.EMPIRICAL},
              path)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["rows"][0]["estimator"] == "ebc"
    assert data["nodes"] == [0, 1, 2]
    assert data["scale"] == 0.5
    assert data["tag"] == "ecdf"
