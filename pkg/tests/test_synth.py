import math

import numpy as np
import pytest

from motifpersist.correlation import weighted_kendall
from motifpersist.errors import ScenarioError
from motifpersist.ingest import load_prices, log_returns
from motifpersist.synth import (
    BlockSpec,
    ScenarioSpec,
    generate,
    ground_truth_motifs,
    load_scenario,
    save_scenario,
    to_price_panel,
    write_prices_csv,
)


def block_scenario(rho=0.9, members=(0, 1, 2, 3), n_days=1200, seed=0, active=None):
    return ScenarioSpec(
        n_assets=10,
        n_days=n_days,
        seed=seed,
        blocks=(BlockSpec(members=members, rho=rho, active=active),),
    )


class TestGenerate:
    def test_block_correlation_recovered(self):
        panel = generate(block_scenario())
        block = panel.values[:, :4]
        corr = np.corrcoef(block, rowvar=False)
        off = corr[np.triu_indices(4, 1)]
        assert np.all(np.abs(off - 0.9) < 0.03)

    def test_null_panel_uncorrelated(self):
        spec = ScenarioSpec(n_assets=8, n_days=2000, seed=3)
        panel = generate(spec)
        corr = np.corrcoef(panel.values, rowvar=False)
        off = corr[np.triu_indices(8, 1)]
        assert np.all(np.abs(off) < 3.0 / math.sqrt(2000))

    def test_regime_switch_kills_correlation(self):
        spec = block_scenario(n_days=1200, active=(0, 600), seed=5)
        panel = generate(spec)
        late = panel.values[600:, :4]
        corr = np.corrcoef(late, rowvar=False)
        off = corr[np.triu_indices(4, 1)]
        assert np.all(np.abs(off) < 3.0 / math.sqrt(600))

    def test_deterministic_bits(self):
        a = generate(block_scenario(seed=9))
        b = generate(block_scenario(seed=9))
        assert np.array_equal(a.values, b.values)
        c = generate(block_scenario(seed=10))
        assert not np.array_equal(a.values, c.values)

    def test_marginal_volatility(self):
        panel = generate(block_scenario(seed=4))
        sigmas = panel.values.std(axis=0, ddof=1)
        assert np.all(np.abs(sigmas - 0.01) < 0.001)

    def test_invalid_block_structure(self):
        # rho < -1/(k-1) for a 4-block is not positive definite
        with pytest.raises(ScenarioError, match="positive definite"):
            generate(block_scenario(rho=-0.5))

    def test_member_range_validated(self):
        with pytest.raises(ScenarioError):
            generate(block_scenario(members=(7, 8, 9, 10)))


class TestGaussKendallOracle:
    def test_arcsin_relation(self):
        # Kendall tau of a Gaussian pair is (2/pi) asin(rho)
        for rho, seed in ((0.3, 1), (0.6, 2), (0.9, 3)):
            spec = ScenarioSpec(
                n_assets=4,
                n_days=5000,
                seed=seed,
                blocks=(BlockSpec(members=(0, 1), rho=rho),),
            )
            panel = generate(spec)
            tau = weighted_kendall(
                panel.values[:, 0], panel.values[:, 1], np.full(5000, 1 / 5000)
            )
            assert abs(tau - 2.0 / math.pi * math.asin(rho)) < 0.02


class TestGroundTruth:
    def test_single_block_of_four(self):
        truth = ground_truth_motifs(block_scenario())
        assert len(truth["triangles"]) == 4
        assert truth["tetrahedra"] == [(0, 1, 2, 3)]

    def test_block_of_three(self):
        spec = ScenarioSpec(
            n_assets=6, n_days=100, blocks=(BlockSpec((1, 2, 3), 0.5),)
        )
        truth = ground_truth_motifs(spec)
        assert truth["triangles"] == [(1, 2, 3)]
        assert truth["tetrahedra"] == []

    def test_two_blocks_union(self):
        spec = ScenarioSpec(
            n_assets=10,
            n_days=100,
            blocks=(BlockSpec((0, 1, 2, 3), 0.5), BlockSpec((5, 6, 7), 0.5)),
        )
        truth = ground_truth_motifs(spec)
        assert len(truth["triangles"]) == 5
        assert len(truth["tetrahedra"]) == 1

    def test_temporary_block_excluded(self):
        spec = block_scenario(active=(0, 600))
        assert ground_truth_motifs(spec) == {"triangles": [], "tetrahedra": []}


class TestRoundTrip:
    def test_price_csv_roundtrip(self, tmp_path):
        spec = block_scenario(n_days=50, seed=7)
        panel = generate(spec)
        path = tmp_path / "prices.csv"
        write_prices_csv(to_price_panel(panel, spec), path)
        loaded, dropped = load_prices(path)
        assert dropped == []
        back = log_returns(loaded)
        assert back.assets == panel.assets
        assert np.allclose(back.values, panel.values, atol=1e-12)

    def test_scenario_file_roundtrip(self, tmp_path):
        spec = block_scenario(seed=21, active=(5, 900))
        path = tmp_path / "scenario.json"
        save_scenario(spec, path)
        assert load_scenario(path) == spec

    def test_malformed_scenario(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"n_days": 100}')
        with pytest.raises(ScenarioError):
            load_scenario(path)

    def test_generated_panel_passes_ingest_invariants(self):
        spec = block_scenario(seed=15)
        panel = generate(spec)  # ReturnPanel __post_init__ validates
        assert panel.n_days == spec.n_days
        assert list(panel.assets) == sorted(panel.assets)
