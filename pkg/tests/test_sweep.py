"""Tests for sweep configuration, seeded trials and aggregation."""
from __future__ import annotations

import json
import math
import pickle

import numpy as np
import pytest

from src.onebit.errors import InvalidParameterError, TrialError
from src.onebit.experiments.figures import FIGURE_NAMES, get_project_root, load_figure, load_figures, resolve_names
from src.onebit.experiments.sweep import draw_instance, run_sweep, run_trial, standard_error
from src.onebit.experiments.sweep_config import (
    SweepConfig,
    VariantSpec,
    dump_provenance,
    load_document,
    load_sweep_config,
)
from utils.seeding import substream


def small_config(**overrides) -> SweepConfig:
    fields = dict(
        name="unit",
        n=64,
        k=4,
        m_grid=(24, 48),
        trials=3,
        tau=0.01,
        max_iters=100,
        master_seed=3,
        variants=(
            VariantSpec(name="biht", algorithm="biht"),
            VariantSpec(name="psw", algorithm="biht_psw", sweep="rho", values=(0.0, 0.9), false_positives=True),
        ),
    )
    fields.update(overrides)
    return SweepConfig(**fields)


class TestVariantSpec:
    def test_unknown_algorithm(self):
        with pytest.raises(InvalidParameterError):
            VariantSpec(name="x", algorithm="iht")

    def test_sweep_must_fit_algorithm(self):
        with pytest.raises(InvalidParameterError):
            VariantSpec(name="x", algorithm="biht", sweep="rho", values=(0.5,))

    def test_weight_rho_defaults_to_rho(self):
        spec = VariantSpec(name="psw", algorithm="biht_psw", sweep="rho", values=(0.3,))
        assert spec.settings(0.3)["weight_rho"] == 0.3

    def test_weight_rho_sweep_keeps_estimate_rho(self):
        spec = VariantSpec(name="psw", algorithm="biht_psw", rho=0.9, sweep="weight_rho", values=(0.1,))
        settings = spec.settings(0.1)
        assert (settings["rho"], settings["weight_rho"]) == (0.9, 0.1)

    def test_lambda_key(self):
        spec = VariantSpec.from_dict({"algorithm": "biht_urw", "lambda": 0.25, "sweep": "n_rw", "values": [1, 2]})
        assert spec.lam == 0.25
        assert spec.settings(2.0)["n_rw"] == 2
        assert spec.to_dict()["lambda"] == 0.25

    @pytest.mark.parametrize("values", [(0.5, 1.0), (1.5,)])
    def test_bad_c(self, values):
        with pytest.raises(InvalidParameterError):
            VariantSpec(name="o", algorithm="biht_oracle", sweep="c", values=values)


    @pytest.mark.parametrize(
        "entry",
        [
            {"algorithm": "biht_psw", "rho": "high"},
            {"algorithm": "biht_psw", "weight_rho": [0.5]},
            {"algorithm": "biht_oracle", "c": "0.5"},
            {"algorithm": "biht_urw", "lambda": True},
            {"algorithm": "biht_psw", "sweep": "rho", "values": ["low", 0.5]},
            {"algorithm": "biht_fourset", "false_positives": "yes"},
        ],
    )
    def test_wrong_types_rejected(self, entry):
        with pytest.raises(InvalidParameterError):
            VariantSpec.from_dict(entry)

class TestSweepConfig:
    def test_grid_must_increase(self):
        with pytest.raises(InvalidParameterError):
            small_config(m_grid=(48, 24))

    def test_unique_names(self):
        with pytest.raises(InvalidParameterError):
            small_config(variants=(VariantSpec(name="a", algorithm="biht"), VariantSpec(name="a", algorithm="biht")))

    def test_false_positive_room(self):
        spec = VariantSpec(name="f", algorithm="biht_fourset", sweep="rho", values=(0.0,), false_positives=True)
        with pytest.raises(InvalidParameterError):
            small_config(n=6, k=4, variants=(spec,))

    def test_unknown_field(self):
        with pytest.raises(InvalidParameterError):
            SweepConfig.from_dict({"m_grid": [10], "variants": [{"algorithm": "biht"}], "colour": "red"})

    @pytest.mark.parametrize(
        "changes",
        [{"tau": "fast"}, {"tol": None}, {"master_seed": "seven"}, {"master_seed": 1.5}, {"master_seed": -1}],
    )
    def test_wrong_types_rejected(self, changes):
        document = {"m_grid": [10], "n": 16, "k": 2, "variants": [{"algorithm": "biht"}], **changes}
        with pytest.raises(InvalidParameterError):
            SweepConfig.from_dict(document)

    def test_integral_float_seed(self):
        cfg = SweepConfig.from_dict({"m_grid": [10], "n": 16, "k": 2, "master_seed": 4.0, "variants": [{"algorithm": "biht"}]})
        assert cfg.master_seed == 4
        assert isinstance(cfg.master_seed, int)

    def test_json_file(self):
        cfg = load_sweep_config(get_project_root() / "config" / "example_sweep.json")
        assert cfg.name == "psw_small"
        assert cfg.m_grid == (40, 80, 120)
        assert [v.name for v in cfg.variants] == ["biht", "psw"]

    def test_single_variant_key(self, tmp_path):
        path = tmp_path / "one.json"
        path.write_text(json.dumps({"m_grid": [10], "variant": {"algorithm": "biht"}, "n": 16, "k": 2}))
        cfg = load_sweep_config(path)
        assert cfg.name == "one"
        assert cfg.variants[0].name == "biht"

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_document(tmp_path / "nope.json")

    def test_broken_file(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("m_grid: [1, 2\n")
        with pytest.raises(InvalidParameterError):
            load_document(path)

    def test_overrides(self):
        cfg = small_config().with_overrides(master_seed=99, trials=7)
        assert (cfg.master_seed, cfg.trials) == (99, 7)


class TestFigures:
    def test_every_figure_loads(self):
        figures = load_figures()
        assert sorted(figures) == sorted(FIGURE_NAMES)
        for cfg in figures.values():
            assert cfg.n == 256
            assert cfg.m_grid == tuple(range(50, 501, 50))
            assert cfg.variants[0].algorithm == "biht"

    def test_fig5b_sparsity(self):
        assert load_figure("fig5b").k == 20

    def test_fig4_mismatch(self):
        psw = load_figure("fig4").variants[1]
        assert psw.rho == 0.9
        assert psw.values == (0.9, 0.1)

    def test_resolve(self):
        assert resolve_names("all") == FIGURE_NAMES
        assert resolve_names("fig3a") == ["fig3a"]
        with pytest.raises(InvalidParameterError):
            resolve_names("fig9")


class TestRunTrial:
    def test_deterministic(self):
        cfg = small_config()
        assert run_trial(cfg, 48, 1, 1, 1) == run_trial(cfg, 48, 1, 1, 1)

    def test_variants_share_instance(self):
        cfg = small_config()
        a_signal, a_ens = draw_instance(cfg, 48, 2)
        b_signal, b_ens = draw_instance(cfg, 48, 2)
        np.testing.assert_array_equal(a_ens.matrix, b_ens.matrix)
        np.testing.assert_array_equal(a_signal.values, b_signal.values)

    @pytest.mark.parametrize("trial", range(3))
    def test_psw_rho_zero_matches_biht(self, trial):
        cfg = small_config()
        assert run_trial(cfg, 48, trial, 1, 0).mse == run_trial(cfg, 48, trial, 0, 0).mse

    def test_rejects_m_outside_grid(self):
        with pytest.raises(InvalidParameterError):
            run_trial(small_config(), 30, 0)

    def test_failure_carries_provenance(self, monkeypatch):
        import src.onebit.experiments.sweep as sweep_module

        def boom(*args, **kwargs):
            raise RuntimeError("solver exploded")

        monkeypatch.setattr(sweep_module, "recover", boom)
        with pytest.raises(TrialError) as info:
            run_trial(small_config(), 24, 2, 1, 1)
        assert info.value.provenance == {
            "master_seed": 3,
            "m": 24,
            "variant": "psw",
            "param_value": 0.9,
            "trial_index": 2,
        }
        assert isinstance(info.value.__cause__, RuntimeError)

    def test_trial_error_pickles(self):
        error = pickle.loads(pickle.dumps(TrialError("bad", {"m": 4})))
        assert error.provenance == {"m": 4}
        assert "m=4" in str(error)


class TestRunSweep:
    def test_single_cell(self):
        cfg = small_config(m_grid=(48,), trials=1, variants=(VariantSpec(name="biht", algorithm="biht"),))
        result = run_sweep(cfg)
        assert len(result.rows) == 1
        assert len(result.trials) == 1

    def test_row_layout(self):
        result = run_sweep(small_config())
        assert len(result.rows) == 2 * 3
        assert [(r.m, r.variant, r.param_value) for r in result.rows[:3]] == [
            (24, "biht", 0.0),
            (24, "psw", 0.0),
            (24, "psw", 0.9),
        ]
        assert result.provenance["master_seed"] == 3
        assert result.provenance["config"]["name"] == "unit"

    def test_standard_error_from_trials(self):
        result = run_sweep(small_config())
        for row in result.rows:
            mses = [t.metrics.mse for t in result.trials
                    if (t.m, t.variant, t.param_value) == (row.m, row.variant, row.param_value)]
            assert len(mses) == 3
            assert row.mean_mse == pytest.approx(float(np.mean(mses)))
            assert row.sem_mse == pytest.approx(float(np.std(mses, ddof=1)) / math.sqrt(3))

    def test_worker_count_does_not_matter(self):
        cfg = small_config()
        assert run_sweep(cfg, workers=1).rows == run_sweep(cfg, workers=2).rows

    def test_bad_workers(self):
        with pytest.raises(InvalidParameterError):
            run_sweep(small_config(), workers=0)

    def test_row_lookup(self):
        result = run_sweep(small_config())
        assert result.row(48, "psw", 0.9).m == 48
        with pytest.raises(KeyError):
            result.row(48, "psw")

    def test_provenance_yaml(self, tmp_path):
        result = run_sweep(small_config(trials=1))
        path = tmp_path / "prov.yaml"
        dump_provenance(result.provenance, path)
        assert load_document(path)["config"]["m_grid"] == [24, 48]

    def test_more_measurements_lower_error(self):
        cfg = small_config(
            m_grid=(8, 160), trials=10, max_iters=200, variants=(VariantSpec(name="biht", algorithm="biht"),)
        )
        result = run_sweep(cfg)
        assert result.row(160, "biht").mean_mse < result.row(8, "biht").mean_mse


def test_standard_error_single_value():
    assert standard_error([0.3]) == 0.0


def test_substream_rejects_negative_keys():
    with pytest.raises(ValueError):
        substream(1, (-1, 0))
