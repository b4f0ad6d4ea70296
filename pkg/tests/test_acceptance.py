"""Acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line with the measured
numbers and then asserts. The lines are repeated in the terminal summary.
Run with ``pytest tests/test_acceptance.py -s`` to see them inline as well.

Reference market: five stocks, diagonal log-cap covariance 0.04 per year,
one-year horizon, caps 500..100, seeds 0..19, one Brownian path per seed
sampled at 252, 504 and 1008 steps.
"""
import json

import numpy as np
import pytest

from spt_decomp.cli import main as cli_main
from spt_decomp.decomposition import decompose
from spt_decomp.generators import builtin_generator, generated_weights
from spt_decomp.market import GbmSpec, WeightPath, market_weights, simulate_gbm
from spt_decomp.paths import ScalarPath, TimeGrid, cross_variation, fs_chain_rule_residual, fs_integral, ito_integral
from spt_decomp.portfolio import buy_and_hold_weights, constant_weights
from spt_decomp.scenarios import leapfrog_experiment
from spt_decomp.studies import (
    log_chain_rule_study,
    prop1_study,
    prop2_study,
    strictly_decreasing,
    trading_sup_study,
)

SPEC = GbmSpec.diagonal(5, 0.04, initial_caps=[500, 400, 300, 200, 100], horizon=1.0)
SEEDS = list(range(20))
LEVELS = [252, 504, 1008]
CW = [0.1, 0.15, 0.2, 0.25, 0.3]

GENERATORS = {
    "entropy": builtin_generator("entropy"),
    "diversity(p=0.76)": builtin_generator("diversity", p=0.76),
    "geometric_mean": builtin_generator("geometric_mean"),
    "constant_weighted": builtin_generator("constant_weighted", w=CW),
}


def report(log, number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    log.append(line)
    assert ok, line


def fmt(values):
    return "[" + ", ".join(f"{v:.3g}" for v in values) + "]"


def test_criterion_1_fs_minus_ito_identity(criterion_log):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(2, 500))
        times = np.concatenate([[0.0], np.cumsum(rng.uniform(0.001, 0.1, k - 1))])
        y = ScalarPath(TimeGrid(times), rng.normal(size=k).cumsum() * rng.uniform(0.1, 10))
        x = ScalarPath(TimeGrid(times), rng.normal(size=k).cumsum() * rng.uniform(0.1, 10))
        lhs = fs_integral(y, x).values - ito_integral(y, x).values
        rhs = 0.5 * cross_variation(x, y).values
        # relative to the accumulated magnitude of the summed terms
        scale = np.concatenate(
            [[1.0], np.cumsum(np.abs(np.diff(x.values)) * (np.abs(y.values[:-1]) + np.abs(y.values[1:])))]
        )
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))
    report(criterion_log, 1, worst <= 1e-12, f"100 path pairs, max relative deviation {worst:.2e} (tol 1e-12)")


def test_criterion_2_decomposition_identity(criterion_log):
    rng = np.random.default_rng(7)
    worst = {"long-only": 0.0, "mildly short": 0.0}
    for seed in range(50):
        m = simulate_gbm(SPEC.with_(seed=seed))
        raw = rng.dirichlet(np.ones(5), size=len(m.grid)).T
        for kind, w in (("long-only", raw), ("mildly short", 1.2 * raw - 0.2 / 5)):
            r = decompose(m, WeightPath(m.grid, w))
            res = np.abs(r.structural_log.values + r.trading.values - r.relative_log_return.values)
            worst[kind] = max(worst[kind], float(res.max()))
    ok = max(worst.values()) <= 1e-12
    detail = ", ".join(f"{k} max residual {v:.2e}" for k, v in worst.items())
    report(criterion_log, 2, ok, f"50 GBM paths each: {detail} (tol 1e-12)")


def test_criterion_3_fs_chain_rule(criterion_log):
    quad = 0.0
    for seed in SEEDS:
        m = simulate_gbm(SPEC.with_(seed=seed, steps=1008))
        x = ScalarPath(m.grid, m.caps[0])
        res = fs_chain_rule_residual(lambda v: 0.5 * v * v, lambda v: v, x)
        quad = max(quad, res.sup_norm() / (0.5 * np.max(x.values) ** 2))
    table = log_chain_rule_study(SPEC, SEEDS, LEVELS + [2016])
    meds = table.medians
    ok = quad <= 1e-12 and strictly_decreasing(meds)
    report(
        criterion_log,
        3,
        ok,
        f"x^2/2 residual {quad:.1e} relative to F (roundoff); "
        f"log residual medians at {LEVELS + [2016]} steps {fmt(meds)}",
    )


def test_criterion_4_generator_residuals(criterion_log):
    parts = []
    ok = True
    for name, g in GENERATORS.items():
        tables = prop2_study(SPEC, g, SEEDS, LEVELS)
        for key in ("r1", "r2"):
            meds = tables[key].medians
            good = strictly_decreasing(meds)
            ok &= good
            parts.append(f"{name} {key} {fmt(meds)}{'' if good else ' NOT decreasing'}")
    market = prop2_study(SPEC, builtin_generator("market"), SEEDS, LEVELS)
    worst = max(float(np.max(market[k].values)) for k in ("r1", "r2"))
    exact = worst == 0.0
    ok &= exact
    parts.append(f"market max residual {worst:.2e}{'' if exact else ' NOT 0'}")
    report(criterion_log, 4, ok, "; ".join(parts))


def test_criterion_5_total_variation_scaling(criterion_log):
    parts = []
    ok = True
    for name, g in GENERATORS.items():
        tv = prop1_study(SPEC, g, SEEDS, LEVELS)
        rel = tv["tv_relative"].median_ratios
        trade = tv["tv_trading"].median_ratios
        good = all(1.25 <= r <= 1.60 for r in rel) and all(0.75 <= r <= 1.25 for r in trade)
        ok &= good
        parts.append(f"{name} TV(rel) ratios {fmt(rel)} TV(T) ratios {fmt(trade)}")
    report(criterion_log, 5, ok, "; ".join(parts))


def test_criterion_6_discussion_cases(criterion_log):
    shares = np.array([1.0, 2.0, 0.5, 3.0, 1.0])
    cases_a = {
        "market": market_weights,
        "buy-and-hold": lambda m: buy_and_hold_weights(m, shares),
    }
    cases_b = {
        "equal": lambda m: constant_weights(m.grid, [0.2] * 5),
        "constant": lambda m: constant_weights(m.grid, CW),
    }
    parts = []
    ok = True
    for name, rule in cases_a.items():
        meds = trading_sup_study(SPEC, rule, SEEDS, LEVELS).medians
        good = strictly_decreasing(meds) and meds[-1] < 1e-2
        ok &= good
        parts.append(f"{name} sup|T| {fmt(meds)}")
    for name, rule in cases_b.items():
        meds = trading_sup_study(SPEC, rule, SEEDS, LEVELS, against_growth=True).medians
        good = strictly_decreasing(meds)
        ok &= good
        parts.append(f"{name} sup|T - G| {fmt(meds)}")
    report(criterion_log, 6, ok, "; ".join(parts))


def _fd_log_gradient(g, x, h=1e-5):
    eye = np.eye(x.size) * h
    return np.array([(g.log_value(x + e) - g.log_value(x - e)) / (2 * h) for e in eye])


def _fd_hessian(g, x, h=1e-4):
    eye = np.eye(x.size) * h
    return np.array(
        [
            [
                (g.value(x + a + b) - g.value(x + a - b) - g.value(x - a + b) + g.value(x - a - b)) / (4 * h * h)
                for b in eye
            ]
            for a in eye
        ]
    )


def test_criterion_7_generator_calculus(criterion_log):
    rng = np.random.default_rng(11)
    points = 0.8 * rng.dirichlet(np.ones(5), size=100) + 0.04
    gens = dict(GENERATORS, market=builtin_generator("market"))
    grad_err = hess_err = 0.0
    for g in gens.values():
        for x in points:
            fd = _fd_log_gradient(g, x)
            grad_err = max(grad_err, float(np.max(np.abs(g.log_gradient(x) - fd) / np.maximum(np.abs(fd), 1e-3))))
            fh = _fd_hessian(g, x)
            scale = max(1.0, float(np.max(np.abs(fh))))
            hess_err = max(hess_err, float(np.max(np.abs(g.hessian(x) - fh))) / scale)
    mu = WeightPath(TimeGrid(np.arange(100.0)), points.T)
    sum_err = max(
        float(np.max(np.abs(generated_weights(g, mu).weights.sum(axis=0) - 1))) for g in gens.values()
    )
    pi = generated_weights(builtin_generator("entropy"), WeightPath(TimeGrid([0.0, 1.0]), [[0.8, 0.8], [0.2, 0.2]]))
    closed = np.array([0.8 * np.log(0.8), 0.2 * np.log(0.2)])
    closed /= closed.sum()
    got = pi.weights[:, 0]
    ent_err = max(float(np.max(np.abs(got - [0.35674, 0.64326]))), float(np.max(np.abs(got - closed))))
    ok = grad_err <= 1e-6 and hess_err <= 1e-4 and sum_err <= 1e-12 and ent_err <= 1e-5
    report(
        criterion_log,
        7,
        ok,
        f"gradient rel err {grad_err:.1e} (1e-6), Hessian rel err {hess_err:.1e} (1e-4), "
        f"weight sums {sum_err:.1e} (1e-12), entropy at (0.8, 0.2) -> ({got[0]:.5f}, {got[1]:.5f})",
    )


def test_criterion_8_leapfrog(criterion_log):
    _, summary = leapfrog_experiment([400.0, 300.0, 270.0, 100.0], 2)
    ok = summary["trading_share"] >= 0.95 and abs(summary["structural_share"]) <= 0.05
    report(
        criterion_log,
        8,
        ok,
        f"loss {summary['relative_log_return']:+.6f}, trading share {summary['trading_share']:.4f}, "
        f"structural share {summary['structural_share']:.4f}",
    )


@pytest.mark.slow
def test_criterion_9_determinism(criterion_log, tmp_path):
    config = tmp_path / "run.ini"
    config.write_text("[portfolio]\ngenerator = entropy\n[experiment]\nseeds = 0,1,2\nrefinements = 63,126,252\n")
    commands = ["simulate", "decompose", "convergence", "leapfrog"]
    differing = []
    for cmd in commands:
        outputs = []
        for run in ("a", "b"):
            out = tmp_path / cmd / run
            cli_main([cmd, "--config", str(config), "--out", str(out)])
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if outputs[0] != outputs[1] or not outputs[0]:
            differing.append(cmd)
    summary = json.loads((tmp_path / "convergence" / "a" / "convergence_summary.json").read_text())
    ok = not differing and bool(summary["tables"])
    report(
        criterion_log,
        9,
        ok,
        f"{len(commands)} commands run twice, byte-identical outputs: "
        f"{'all' if ok else 'differs for ' + ', '.join(differing)}",
    )
