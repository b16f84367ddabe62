"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see every line.

The heavy fixtures (the planted-block panel and the i.i.d. null panel, both
analyzed at window=126, theta=46, T=50 starting layers, max shift 400) are
built once and shared across criteria 7-8.
"""

import math
import time
from dataclasses import replace
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from motifpersist.correlation import weighted_kendall
from motifpersist.filtergraph import build_tmfg, check_planarity_chordality
from motifpersist.ingest import ReturnPanel
from motifpersist.persistence import (
    LayerConfig,
    Motif,
    build_layer_series,
    edge_independence_product,
    motif_members,
    motif_persistence_fraction,
    persistence_curve,
    plateau_scores,
    rank_motifs,
    soft_persistent,
)
from motifpersist.pipeline import (
    RunConfig,
    load_panel,
    make_split,
    run_analysis,
    write_analysis_artifacts,
    write_manifest,
    write_portfolio_artifacts,
)
from motifpersist.portfolio import (
    run_experiment_motif_vs_random,
    run_experiment_vol_vs_persist,
)
from motifpersist.regimefit import adjusted_triangle_exponent, fit_two_regimes
from motifpersist.synth import generate, load_scenario
from motifpersist.persistence import PersistenceCurve


def verdict(name: str, ok: bool, detail: str) -> bool:
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} — {detail}")
    return ok


# ---------------------------------------------------------------------------
# shared heavy fixtures

ACCEPT_CONFIG = RunConfig(
    window=126,
    theta=46.0,
    n_start=50,
    max_shift=400,
    top_k=10,
    n_random=10_000,
    n_selections=1000,
    selection_size=25,
    seed=123,
)


@pytest.fixture(scope="module")
def planted(request):
    spec = load_scenario("scenarios/planted_block.json")
    panel = generate(spec)
    start = time.time()
    analysis = run_analysis(panel, ACCEPT_CONFIG)
    elapsed = time.time() - start
    return {
        "spec": spec,
        "panel": panel,
        "analysis": analysis,
        "analysis_seconds": elapsed,
        "blocks": [set(b.members) for b in spec.blocks],
    }


@pytest.fixture(scope="module")
def null_panel():
    spec = load_scenario("scenarios/null.json")
    panel = generate(spec)
    analysis = run_analysis(panel, ACCEPT_CONFIG)
    return {"panel": panel, "analysis": analysis}


# ---------------------------------------------------------------------------
# criterion 1: TMFG structural counts


def test_criterion_1_tmfg_counts():
    start = time.time()
    ok = True
    for seed in range(20):
        rng = np.random.default_rng(seed)
        corr = np.corrcoef(rng.standard_normal((130, 100)), rowvar=False)
        graph = build_tmfg(corr)
        counts = (
            len(graph.edges),
            len(graph.tetrahedra),
            len(graph.separators),
            len(graph.faces),
        )
        report = check_planarity_chordality(graph)
        ok &= counts == (294, 97, 96, 196)
        ok &= len(graph.faces) + len(graph.separators) == 292
        ok &= report.planar and report.chordal
    elapsed = time.time() - start
    ok &= elapsed < 10.0
    assert verdict(
        "1 (TMFG counts)",
        ok,
        f"20 seeds N=100: 294/97/96/196 edges/tetrahedra/separators/faces, "
        f"planar+chordal, {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# criterion 2: weighted Kendall vs brute force


def kendall_brute(x, y, w):
    num, den = [], []
    n = len(x)
    for i in range(n):
        for j in range(i + 1, n):
            sx = (x[i] > x[j]) - (x[i] < x[j])
            sy = (y[i] > y[j]) - (y[i] < y[j])
            num.append(w[i] * w[j] * sx * sy)
            den.append(w[i] * w[j])
    return math.fsum(num) / math.fsum(den)


def tau_a_fraction(x, y):
    n = len(x)
    net = 0
    for i in range(n):
        for j in range(i + 1, n):
            net += ((x[i] > x[j]) - (x[i] < x[j])) * ((y[i] > y[j]) - (y[i] < y[j]))
    return Fraction(net, n * (n - 1) // 2)


def test_criterion_2_weighted_kendall_oracle():
    rng = np.random.default_rng(7)
    bitwise = 0
    uniform_ok = 0
    n_uniform = 0
    for case in range(1000):
        n = int(rng.integers(2, 51))
        x = rng.normal(size=n)
        y = rng.normal(size=n)
        if case % 4 == 0:  # uniform-weight cases
            w = np.full(n, 1.0 / n)
        else:
            w = rng.uniform(0.01, 1.0, size=n)
            w /= w.sum()
        engine = weighted_kendall(x, y, w)
        bitwise += engine == kendall_brute(x.tolist(), y.tolist(), w.tolist())
        if case % 4 == 0:
            n_uniform += 1
            exact = tau_a_fraction(x.tolist(), y.tolist())
            uniform_ok += math.isclose(engine, float(exact), rel_tol=0, abs_tol=1e-12)
    ok = bitwise == 1000 and uniform_ok == n_uniform
    assert verdict(
        "2 (weighted Kendall oracle)",
        ok,
        f"{bitwise}/1000 bitwise vs brute force; "
        f"{uniform_ok}/{n_uniform} uniform cases match classical tau-a",
    )


# ---------------------------------------------------------------------------
# criterion 3: Gaussian copula closed form


def test_criterion_3_gaussian_copula_kendall():
    n_days = 5000
    w = np.full(n_days, 1.0 / n_days)
    worst = 0.0
    ok = True
    for rho, seed in ((0.3, 11), (0.6, 12), (0.9, 13)):
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((n_days, 2))
        x = z[:, 0]
        y = rho * z[:, 0] + math.sqrt(1.0 - rho * rho) * z[:, 1]
        tau = weighted_kendall(x, y, w)
        err = abs(tau - 2.0 / math.pi * math.asin(rho))
        worst = max(worst, err)
        ok &= err < 0.02
    assert verdict(
        "3 (Gaussian copula Kendall)",
        ok,
        f"rho in (0.3, 0.6, 0.9), 5000 days: worst |tau - (2/pi)asin rho| = {worst:.4f} < 0.02",
    )


# ---------------------------------------------------------------------------
# criterion 4: toy persistence oracle (nested loops, exact)


def test_criterion_4_persistence_brute_force():
    rng = np.random.default_rng(21)
    values = 0.01 * rng.standard_normal((24, 6))
    dates = tuple(f"d{i:04d}" for i in range(24))
    panel = ReturnPanel(dates, tuple(f"A{i}" for i in range(6)), values)
    config = LayerConfig(window=10, theta=4.0, n_start=3, max_shift=5)
    series = build_layer_series(panel, config)
    ok = True

    # Eq. 1: binary conjunction semantics
    for t in range(3):
        for tau in range(6):
            cat_a = series.catalogs[t]
            cat_b = series.catalogs[t + tau]
            for kind in ("edge", "triangle", "tetrahedron"):
                for vertices in motif_members(cat_a, kind):
                    expected = vertices in motif_members(cat_b, kind)
                    got = soft_persistent(Motif(vertices, kind), cat_a, cat_b)
                    ok &= got == expected

    # Eq. 3: per-shift averages
    for kind in ("edge", "triangle", "face", "separator", "tetrahedron"):
        curve = persistence_curve(series, kind)
        ok &= curve.values[0] == 1.0
        for tau in range(6):
            per_start = []
            for t in range(3):
                start = motif_members(series.catalogs[t], kind)
                later = motif_members(series.catalogs[t + tau], kind)
                per_start.append(sum(1 for m in start if m in later) / len(start))
            ok &= curve.values[tau] == float(np.mean(np.array(per_start)))

    # Eq. 2: plateau averages per motif
    for tau_plat in (1, 2, 3):
        scores = plateau_scores(series, "tetrahedron", tau_plat)
        universe = set()
        for t in range(3):
            universe |= series.catalogs[t].tetrahedra
        ok &= set(scores) == universe
        for vertices in universe:
            count = 0
            for t in range(3):
                if vertices not in series.catalogs[t].tetrahedra:
                    continue
                for tau in range(tau_plat, 5):
                    if vertices in series.catalogs[t + tau].tetrahedra:
                        count += 1
            ok &= scores[vertices] == count / (3 * (5 - tau_plat))

    assert verdict(
        "4 (persistence brute-force oracle)",
        ok,
        "toy series N=6, T=3, max shift 5: Eq.1/2/3 nested-loop values match exactly",
    )


# ---------------------------------------------------------------------------
# criterion 5: two-regime fit recovery


def test_criterion_5_two_regime_recovery():
    cases = [(-0.392, -0.05, 100), (-0.785, -0.174, 80), (-1.024, -0.10, 120)]
    ok = True
    details = []
    for i, (decay, plateau, breakpoint) in enumerate(cases):
        taus = np.arange(0, 401, dtype=float)
        vals = np.empty(401)
        vals[0] = 1.0
        t = taus[1:]
        scale = float(breakpoint) ** (decay - plateau)
        vals[1:] = np.where(t <= breakpoint, t**decay, scale * t**plateau)
        rng = np.random.default_rng(100 + i)
        vals[1:] *= np.exp(0.01 * rng.standard_normal(400))
        curve = PersistenceCurve("tetrahedron", taus, vals)
        start = time.time()
        fit = fit_two_regimes(curve)
        elapsed = time.time() - start
        ok &= abs(fit.decay.exponent - decay) < 0.03
        ok &= abs(fit.plateau.exponent - plateau) < 0.03
        ok &= abs(fit.tau_plat - breakpoint) <= 0.1 * breakpoint
        ok &= elapsed < 1.0
        details.append(
            f"({decay}/{plateau}, k={breakpoint}) -> "
            f"({fit.decay.exponent:+.3f}/{fit.plateau.exponent:+.3f}, "
            f"k={fit.tau_plat}, {elapsed * 1000:.0f}ms)"
        )
    assert verdict("5 (two-regime recovery)", ok, "; ".join(details))


# ---------------------------------------------------------------------------
# criterion 6: adjusted motif exponent


def test_criterion_6_adjusted_exponent():
    rows = [(-0.398, -0.133), (-0.471, -0.157), (-0.458, -0.153), (-0.830, -0.277)]
    results = {raw: round(adjusted_triangle_exponent(raw), 3) for raw, _ in rows}
    ok = all(results[raw] == expected for raw, expected in rows)
    assert verdict(
        "6 (adjusted triangle exponent)",
        ok,
        "; ".join(f"{raw} -> {results[raw]}" for raw, _ in rows),
    )


# ---------------------------------------------------------------------------
# criterion 7: planted-block reproduction of the two-regime shape


def test_criterion_7a_two_regimes_with_band_breakpoint(planted):
    """Every class curve must show two regimes with tau_plat in [63, 126].

    Separators are excluded: the source material itself flags separator
    fits as unreliable and sets no acceptance target for them.
    """
    analysis = planted["analysis"]
    details = []
    ok = True
    for kind in ("edge", "triangle", "face", "tetrahedron"):
        fit = analysis.fits.get(kind)
        if fit is None:
            ok = False
            details.append(f"{kind}: fit failed")
            continue
        two_regimes = abs(fit.plateau.exponent) <= abs(fit.decay.exponent)
        in_band = 63 <= fit.tau_plat <= 126
        ok &= two_regimes and in_band
        details.append(
            f"{kind}: k={fit.tau_plat}{'' if in_band else ' OUT OF [63,126]'}"
            f" (decay {fit.decay.exponent:+.2f}, plateau {fit.plateau.exponent:+.2f})"
        )
    ok &= planted["analysis_seconds"] < 900.0
    details.append(f"analysis {planted['analysis_seconds']:.0f}s")
    assert verdict("7a (two-regime breakpoint band)", ok, "; ".join(details))


def test_criterion_7b_top_triangles_inside_blocks(planted):
    analysis = planted["analysis"]
    blocks = planted["blocks"]
    inside = sum(
        1
        for motif, _ in analysis.ranking
        if any(set(motif.vertices) <= block for block in blocks)
    )
    ok = len(analysis.ranking) == 10 and inside == 10
    assert verdict(
        "7b (top-10 triangles in planted blocks)",
        ok,
        f"{inside}/10 ranked triangles lie inside planted blocks",
    )


def test_criterion_7c_independence_product_gap(planted):
    analysis = planted["analysis"]
    series = analysis.series
    n_top = max(1, (3 * 100 - 8) // 10)  # top decile of the 292 triangles
    top = rank_motifs(series, "triangle", analysis.tau_plat["triangle"], n_top)
    ok = True
    details = []
    for tau in (126, 200, 300):
        gaps = [
            motif_persistence_fraction(series, motif, tau)
            - edge_independence_product(series, motif, tau)
            for motif, _ in top
        ]
        mean_gap = float(np.mean(gaps))
        ok &= mean_gap > 0.0
        details.append(f"tau={tau}: mean gap {mean_gap:+.4f}")
    assert verdict(
        "7c (triangle persistence beats edge-independence null)", ok, "; ".join(details)
    )


# ---------------------------------------------------------------------------
# criterion 8: portfolio experiments


def test_criterion_8a_motif_portfolio_percentile(planted):
    split = make_split(planted["panel"], ACCEPT_CONFIG)
    report = run_experiment_motif_vs_random(
        planted["panel"],
        planted["analysis"].ranking,
        split,
        ACCEPT_CONFIG.n_random,
        ACCEPT_CONFIG.seed,
    )
    ok = report.percentile >= 90.0
    assert verdict(
        "8a (motif portfolio percentile)",
        ok,
        f"motif volatility {report.motif_volatility:.5f} at percentile "
        f"{report.percentile:.1f} of {report.n_portfolios} random portfolios "
        f"(size {report.size})",
    )


def test_criterion_8b_persistence_weighting_beats_inverse_vol(planted):
    split = make_split(planted["panel"], ACCEPT_CONFIG)
    report = run_experiment_vol_vs_persist(
        planted["panel"],
        planted["analysis"].node_scores,
        split,
        ACCEPT_CONFIG.n_selections,
        ACCEPT_CONFIG.selection_size,
        ACCEPT_CONFIG.seed,
    )
    ok = report.mean_persist < report.mean_vol and report.fraction_persist_wins > 0.5
    assert verdict(
        "8b (1/persistence beats 1/sigma out of sample)",
        ok,
        f"mean PERSIST {report.mean_persist:.6f} vs mean VOL {report.mean_vol:.6f}; "
        f"persist wins {100 * report.fraction_persist_wins:.1f}% of "
        f"{report.n_selections} paired selections",
    )


def test_criterion_8c_null_panel_schemes_indistinguishable(null_panel):
    split = make_split(null_panel["panel"], ACCEPT_CONFIG)
    report = run_experiment_vol_vs_persist(
        null_panel["panel"],
        null_panel["analysis"].node_scores,
        split,
        ACCEPT_CONFIG.n_selections,
        ACCEPT_CONFIG.selection_size,
        ACCEPT_CONFIG.seed,
    )
    ok = report.p_value > 0.01
    assert verdict(
        "8c (null panel: schemes statistically indistinguishable)",
        ok,
        f"Welch two-sample p = {report.p_value:.3g} (need > 0.01); "
        f"mean PERSIST {report.mean_persist:.6f} vs mean VOL {report.mean_vol:.6f}",
    )


# ---------------------------------------------------------------------------
# criterion 9: byte-identical reports


def test_criterion_9_determinism(tmp_path):
    config = RunConfig(
        window=30,
        theta=11.0,
        n_start=3,
        max_shift=10,
        top_k=4,
        min_segment=3,
        n_random=300,
        n_selections=50,
        selection_size=5,
        min_eval_days=30,
        seed=17,
    )
    rng = np.random.default_rng(33)
    values = 0.01 * rng.standard_normal((110, 12))
    corr = np.eye(12)
    for i, j in combinations(range(4), 2):
        corr[i, j] = corr[j, i] = 0.9
    values = values @ np.linalg.cholesky(corr).T
    panel = ReturnPanel(
        tuple(f"d{i:04d}" for i in range(110)),
        tuple(f"A{i:02d}" for i in range(12)),
        values,
    )

    trees = []
    for run, threads in (("r1", 1), ("r2", 1), ("r3", 3)):
        outdir = tmp_path / run
        run_config = replace(config, threads=threads)
        analysis = run_analysis(panel, run_config)
        artifacts = write_analysis_artifacts(analysis, outdir, dump_layer0=True)
        split = make_split(panel, run_config)
        motif_report = run_experiment_motif_vs_random(
            panel, analysis.ranking, split, run_config.n_random, run_config.seed
        )
        paired_report = run_experiment_vol_vs_persist(
            panel,
            analysis.node_scores,
            split,
            run_config.n_selections,
            run_config.selection_size,
            run_config.seed,
        )
        artifacts.update(write_portfolio_artifacts(motif_report, paired_report, outdir))
        write_manifest(outdir, run_config, artifacts)
        trees.append(
            {p.name: p.read_bytes() for p in sorted(outdir.iterdir()) if p.is_file()}
        )

    ok = trees[0] == trees[1] == trees[2]
    assert verdict(
        "9 (byte-identical reports)",
        ok,
        f"{len(trees[0])} artifacts identical across reruns and thread counts",
    )
