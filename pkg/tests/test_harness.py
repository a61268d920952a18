import io
import json
import warnings

import numpy as np
import pytest

from conftest import make_dataset
from kqic import (
    ConfigError,
    ExperimentConfig,
    GeneratorModel,
    RejectionReport,
    emit_report,
    run_benchmark,
    run_realdata,
    validate,
)
from kqic.harness import CSV_HEADER, CellResult, config_from_dict


def _tiny_config(**kw):
    base = dict(
        model=GeneratorModel(kind="null"),
        n_values=(20,),
        parameter_values=(0.0,),
        methods=("KQIC_Gauss", "MB"),
        trials=3,
        bootstrap_draws=40,
        master_seed=7,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_benchmark_deterministic_view_identical():
    cfg = _tiny_config()
    a = run_benchmark(cfg)
    b = run_benchmark(cfg)
    assert a.deterministic_view() == b.deterministic_view()


def test_benchmark_rate_consistency_and_cells():
    report = run_benchmark(_tiny_config())
    assert len(report.cells) == 2
    for cell in report.cells:
        assert cell.rejection_rate == cell.rejections / cell.trials
        assert cell.trials == 3
        assert len(cell.trial_spawn_keys) == 3
        assert cell.trial_spawn_keys[0] == (cell.cell_index, 0)


def test_benchmark_single_trial_rate_binary():
    report = run_benchmark(_tiny_config(trials=1, methods=("MB",)))
    assert report.cells[0].rejection_rate in (0.0, 1.0)


def test_benchmark_censoring_resolved_per_parameter():
    cfg = _tiny_config(
        model=GeneratorModel(kind="null", censor_target=0.3),
        methods=("MB",),
        trials=2,
    )
    report = run_benchmark(cfg)
    assert report.cells[0].trials == 2


def test_config_validation():
    with pytest.raises(ConfigError):
        _tiny_config(methods=())
    with pytest.raises(ConfigError):
        _tiny_config(methods=("Mystery",))
    with pytest.raises(ConfigError):
        _tiny_config(trials=0)
    with pytest.raises(ConfigError):
        _tiny_config(n_values=(1,))
    with pytest.raises(ConfigError):
        _tiny_config(alpha=0.0)


def test_emit_csv():
    empty = RejectionReport(cells=(), config_echo={}, master_seed=0)
    assert emit_report(empty, "csv") == CSV_HEADER + "\n"
    one = RejectionReport(
        cells=(
            CellResult(
                method="MB", parameter=0.25, n=50, trials=4, rejections=1,
                rejection_rate=0.25, mean_runtime_s=0.001234567, cell_index=0,
                trial_spawn_keys=((0, 0), (0, 1), (0, 2), (0, 3)),
            ),
        ),
        config_echo={},
        master_seed=0,
    )
    text = emit_report(one, "csv")
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1] == "MB,0.250000,50,4,0.250000,0.001235"
    assert len(lines) == 2


def test_emit_json_round_trip_byte_identical():
    report = run_benchmark(_tiny_config(methods=("MB",)))
    text = emit_report(report, "json")
    parsed = json.loads(text)
    again = json.dumps(parsed, sort_keys=True, separators=(",", ":")) + "\n"
    assert again == text
    with pytest.raises(ConfigError):
        emit_report(report, "yaml")


def test_config_from_dict_round_trip():
    obj = {
        "model": {"kind": "monotone", "censor_target": 0.5},
        "n_values": [50],
        "parameter_values": [0.0, 0.4],
        "methods": ["KQIC_Gauss"],
        "trials": 5,
        "selection": {"split_fraction": 0.2, "lam": 0.01, "family": "gaussian"},
        "master_seed": 3,
    }
    cfg = config_from_dict(obj)
    assert cfg.model.kind == "monotone"
    assert cfg.parameter_values == (0.0, 0.4)
    assert cfg.selection.family == "gaussian"
    with pytest.raises(ConfigError):
        config_from_dict({"model": {"kind": "monotone"}})


def test_run_realdata_groups_and_warnings():
    rng = np.random.default_rng(5)
    base = make_dataset(rng, 40)
    labels = tuple("a" if i < 34 else "b" for i in range(40))
    from kqic import TruncatedDataset

    ds = TruncatedDataset(base.entry, base.observed, base.event, labels)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rows = run_realdata(ds, ["KQIC_Gauss", "MB"], draws=40, seed=2)
    assert any("only" in str(w.message) for w in caught)
    groups = {r["group"] for r in rows}
    assert groups == {"combined", "a", "b"}
    assert len(rows) == 6
    for r in rows:
        assert 0.0 < r["p_value"] <= 1.0


def test_run_realdata_empty_methods():
    rng = np.random.default_rng(6)
    with pytest.raises(ConfigError):
        run_realdata(make_dataset(rng, 20), [])
