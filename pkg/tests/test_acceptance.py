"""Acceptance gate: one test per criterion, printed as pass/fail lines.

Criterion 6's "< 1.01 at 40 dB" clause is asserted as stated and is known
to fail on i.i.d. Rayleigh channels at the pinned scenario: the multi-user
zero-forcing beamforming loss trace((V V^H)^-1)/p is ~1.30 there, worth
~0.35 bits/layer at high SINR, which keeps the single-user/multi-user
ratio near 1.029 at 40 dB regardless of interference cancellation quality
(the measured cross-user leak is at the 1e-9 level). Reaching 1.01 would
need t on the order of 1500 antennas for 16 layers (loss ~ 1 + (p-1)/t).
"""

import dataclasses

import numpy as np
import pytest

from mimosim import checks
from mimosim.detection import (
    CovarianceModel,
    build_covariance,
    qpsk,
    qr_mld_detect,
)
from mimosim.experiment import parse_config, rows_to_csv, run_sweep, write_csv
from mimosim.precoding import rczf_precode, reduce_ezf
from mimosim.system import Scenario, calibrate_noise, generate_channels

from conftest import CONFIG_DIR, crandn


def _report(criterion: int, passed: bool, detail: str) -> None:
    print(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")


def _by_scheme(rows, precoder, detector):
    return {
        r.su_sinr_db: r for r in rows if r.precoder == precoder and r.detector == detector
    }


@pytest.fixture(scope="module")
def fig3_rows():
    return run_sweep(parse_config((CONFIG_DIR / "fig3.cfg").read_text()))


@pytest.fixture(scope="module")
def fig4_rows():
    return run_sweep(parse_config((CONFIG_DIR / "fig4.cfg").read_text()))


@pytest.fixture(scope="module")
def fig5_rows():
    return run_sweep(parse_config((CONFIG_DIR / "fig5.cfg").read_text()))


@pytest.fixture(scope="module")
def fig5_irc_rows():
    """Interference-aware baseline at fig5's exact scenario/grid/seed."""
    cfg = parse_config((CONFIG_DIR / "fig5.cfg").read_text())
    cfg = dataclasses.replace(cfg, precoders=("ezf",), detectors=("mmse-irc",))
    return run_sweep(cfg)


def test_criterion_01_identity_suite():
    res = checks.identity_suite()
    _report(1, res.passed, res.detail)
    assert res.passed, res.detail


def test_criterion_02_mmse_irc_equality_and_rate():
    eq = checks.mmse_irc_noiseless_suite()
    rate = checks.mmse_irc_rate_suite()
    _report(2, eq.passed and rate.passed, f"{eq.detail}; {rate.detail}")
    assert eq.passed, eq.detail
    assert rate.passed, rate.detail


def test_criterion_03_lambda_independence():
    res = checks.lambda_independence_suite()
    _report(3, res.passed, res.detail)
    assert res.passed, res.detail


def test_criterion_04_limit_and_qr_identities():
    lim = checks.lse_limit_suite()
    qr = checks.qr_factor_identity_suite()
    rot = checks.whitener_invariance_suite()
    ok = lim.passed and qr.passed and rot.passed
    _report(4, ok, f"{lim.detail}; {qr.detail}; {rot.detail}")
    assert lim.passed, lim.detail
    assert qr.passed, qr.detail
    assert rot.passed, rot.detail


def test_criterion_05_qr_mld_limit():
    res = checks.qr_mld_limit_suite()
    _report(5, res.passed, res.detail)
    assert res.passed, res.detail


def test_criterion_06a_fig3_ratio_monotone(fig3_rows):
    worst_step = -np.inf
    for detector in ("mmse-irc", "qr-mld"):
        curve = _by_scheme(fig3_rows, "ezf", detector)
        dbs = sorted(curve)
        ratios = [curve[db].ratio_mean for db in dbs]
        worst_step = max(
            worst_step, max(b - a for a, b in zip(ratios, ratios[1:]))
        )
    passed = worst_step <= 0.0
    _report(6, passed, f"fig3 ratio_mean monotone non-increasing, worst step {worst_step:+.3e}")
    assert passed, f"ratio_mean increased along the grid by {worst_step}"


def test_criterion_06b_fig3_ratio_near_unity_at_40db(fig3_rows):
    vals = {
        det: _by_scheme(fig3_rows, "ezf", det)[40.0].ratio_mean
        for det in ("mmse-irc", "qr-mld")
    }
    worst = max(vals.values())
    passed = worst < 1.01
    _report(6, passed, f"fig3 ratio_mean(40 dB) = {worst:.6f} (required < 1.01)")
    assert passed, (
        f"ratio_mean(40 dB) = {worst:.6f} >= 1.01: unreachable on i.i.d. Rayleigh "
        "channels at t=64 with 16 layers; the multi-user zero-forcing beamforming "
        "loss alone keeps the SU/MU ratio near 1.029 at 40 dB (see the module "
        "docstring for the analysis)"
    )


def test_criterion_07_fig4_saturation_vs_growth(fig4_rows):
    ezf = _by_scheme(fig4_rows, "ezf", "qr-mld")
    mrt = _by_scheme(fig4_rows, "mrt", "qr-mld")
    ezf_gain = ezf[40.0].mu_se_mean - ezf[30.0].mu_se_mean
    mrt_gain = mrt[40.0].mu_se_mean - mrt[30.0].mu_se_mean
    growth = ezf[40.0].mu_se_mean / ezf[10.0].mu_se_mean
    ok = (
        mrt_gain < 0.1 * ezf_gain
        and growth > 2.0
        and mrt_gain < 0.2  # frozen from the oracle run: measured 0.13
        and ezf_gain > 3.0  # frozen from the oracle run: measured 53.1
    )
    _report(
        7,
        ok,
        f"fig4 MRT gain(30->40) = {mrt_gain:.3f} vs EZF gain {ezf_gain:.2f} "
        f"(< 10% required), EZF mu(40)/mu(10) = {growth:.2f} (> 2 required)",
    )
    assert mrt_gain < 0.1 * ezf_gain
    assert growth > 2.0
    assert mrt_gain < 0.2
    assert ezf_gain > 3.0


def test_criterion_08_fig5_plain_mmse_saturation(fig5_rows, fig5_irc_rows):
    mmse = _by_scheme(fig5_rows, "ezf", "mmse")
    irc = _by_scheme(fig5_irc_rows, "ezf", "mmse-irc")
    mmse_gain = mmse[40.0].mu_se_mean - mmse[30.0].mu_se_mean
    irc_gain = irc[40.0].mu_se_mean - irc[30.0].mu_se_mean
    frac = mmse_gain / irc_gain
    ok = frac < 0.25
    _report(
        8,
        ok,
        f"fig5 EZF+MMSE gain(30->40) = {mmse_gain:.2f} = {100 * frac:.1f}% of "
        f"EZF+MMSE-IRC gain {irc_gain:.2f} (< 25% required)",
    )
    assert ok, f"plain-MMSE gain fraction {frac:.3f} >= 0.25"


def test_criterion_09_qr_mld_sic_end_to_end():
    # Monte-Carlo leg: 10^4 symbol vectors through the full noisy link.
    scenario = Scenario(t=64, users=((4, 2),) * 8, total_power=1.0, seed=1)
    channels = generate_channels(scenario)
    noise = calibrate_noise(channels, 30.0)
    prec = rczf_precode(reduce_ezf(channels), 1.0)
    cov = build_covariance(channels, prec, noise)
    c = qpsk()
    rng = np.random.default_rng(2024)
    n_vec = 10_000
    idx = rng.integers(0, 4, size=(16, n_vec))
    sent = c.points[idx]
    x = prec.stacked @ sent
    errors = 0
    for k, h in enumerate(channels.matrices):
        y = h @ x + noise.sigma * crandn(rng, 4, n_vec)
        out = qr_mld_detect(y, cov, c, user=k)
        errors += int(np.sum(~np.isclose(out, sent[2 * k:2 * k + 2], atol=1e-9)))
    ser = errors / (16 * n_vec)

    # Exhaustive leg: triangular coupling 1.2. Sub-unit coupling can never
    # flip an equal-amplitude QPSK decision (per-axis perturbation c/sqrt(2)
    # against a decision distance of 1/sqrt(2)), so c > 1 is required for a
    # non-vacuous one-shot comparison.
    t = np.array([[1.0, 1.2], [0.0, 1.0]], dtype=complex)
    toy = CovarianceModel((t,), (np.eye(2, dtype=complex),),
                          (np.eye(2, dtype=complex),), noiseless=False)
    one_shot_failures = 0
    for s1 in c.points:
        for s2 in c.points:
            s = np.array([s1, s2])
            y = t @ s
            np.testing.assert_allclose(qr_mld_detect(y, toy, c), s, atol=1e-9)
            if not np.allclose(c.nearest(y), s, atol=1e-9):
                one_shot_failures += 1

    ok = ser < 1e-3 and one_shot_failures >= 1
    _report(
        9,
        ok,
        f"SER = {ser:.2e} over {16 * n_vec} symbols (< 1e-3 required); "
        f"SIC exact on all 16 coupled pairs, one-shot slicing fails {one_shot_failures}",
    )
    assert ser < 1e-3
    assert one_shot_failures >= 1


def test_sweep_curve_invariants(fig3_rows, fig4_rows, fig5_rows):
    """mu_se non-decreasing along the grid and ratio >= 1 on averaged curves."""
    for rows in (fig3_rows, fig4_rows, fig5_rows):
        assert all(r.ratio_mean >= 1.0 - 1e-9 for r in rows)
        schemes = {(r.precoder, r.detector) for r in rows}
        for precoder, detector in schemes:
            curve = _by_scheme(rows, precoder, detector)
            mu = [curve[db].mu_se_mean for db in sorted(curve)]
            assert all(b >= a for a, b in zip(mu, mu[1:])), (precoder, detector)


def test_criterion_10_csv_byte_determinism(tmp_path):
    text = (CONFIG_DIR / "fig3.cfg").read_text()
    cfg = parse_config(text)
    cfg = dataclasses.replace(
        cfg, trials=3, su_sinr_grid_db=(0.0, 20.0), output_path=str(tmp_path / "a.csv")
    )
    rows_a = run_sweep(cfg)
    rows_b = run_sweep(cfg)
    write_csv(rows_a, tmp_path / "a.csv")
    write_csv(rows_b, tmp_path / "b.csv")
    identical = (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    same_text = rows_to_csv(rows_a) == rows_to_csv(rows_b)
    _report(10, identical and same_text, "two runs produce byte-identical CSV")
    assert identical and same_text
