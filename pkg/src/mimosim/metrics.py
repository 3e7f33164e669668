"""Effective-link decomposition, post-detection SINR, and spectral efficiency.

The single-user / multi-user report serves every user jointly, then each
user alone (eigen zero-forcing at its proportional share of the power
budget, same noise, same detector scheme). When the joint system suppresses
inter-user interference the ratio of the two summed spectral efficiencies
decays toward 1 as the noise floor drops; schemes that leak interference
saturate and the ratio diverges instead.
"""

import math
import re
from dataclasses import dataclass

import numpy as np

from .detection import (
    CovarianceModel,
    Detector,
    build_covariance,
    gen_lse,
    lse_limit,
    mmse_irc,
    plain_mmse,
    qr_mld_linear,
)
from .errors import ConfigError
from .precoding import Precoder, mrt_precode, rczf_precode, reduce_ezf, reduce_full_zf
from .system import ChannelSet, NoiseModel

# Noiseless perfect links cap here instead of producing infinite SE.
SINR_CAP = 1e12

PRECODER_SCHEMES = ("zf", "ezf", "mrt")
DETECTOR_SCHEMES = ("mmse-irc", "mmse", "gen-lse", "lse-limit", "qr-mld")

_GEN_LSE_RE = re.compile(r"^gen-lse\(([^)]+)\)$")


@dataclass(frozen=True)
class LinkReport:
    """Per-user effective blocks T_kj = G_k H_k W_j plus SINR/SE summaries."""

    blocks: list
    sinr: list
    se: list
    interference_power: list
    mu_se: float
    su_se: float
    ratio: float


def effective_links(
    channels: ChannelSet, precoder: Precoder, detector: Detector
) -> list:
    """All cross blocks: blocks[k][j] = G_k @ H_k @ W_j (p_k x p_j)."""
    out = []
    for k, h in enumerate(channels.matrices):
        g = detector.filters[k]
        gh = g @ h
        out.append([gh @ w for w in precoder.blocks])
    return out


def sinr_per_layer(blocks_k: list, user: int, g: np.ndarray, l: np.ndarray) -> np.ndarray:
    """Post-detection SINR for each layer of one user.

    signal_i = |T_kk[i,i]|^2, against the off-diagonal of the own block,
    the rows of every cross block, and the noise power ||row_i(G L)||^2.
    Perfect noiseless layers cap at SINR_CAP; an all-zero layer reports 0.
    """
    own = blocks_k[user]
    p = own.shape[0]
    gl = g @ l
    out = np.empty(p)
    for i in range(p):
        signal = abs(own[i, i]) ** 2
        self_leak = float(np.sum(np.abs(own[i]) ** 2)) - signal
        cross = sum(
            float(np.sum(np.abs(t[i]) ** 2))
            for j, t in enumerate(blocks_k)
            if j != user
        )
        noise = float(np.sum(np.abs(gl[i]) ** 2))
        denom = self_leak + cross + noise
        if signal == 0.0:
            out[i] = 0.0
        elif denom <= signal / SINR_CAP:
            out[i] = SINR_CAP
        else:
            out[i] = min(signal / denom, SINR_CAP)
    return out


def spectral_efficiency(sinrs) -> float:
    """Shannon sum over layers, sum log2(1 + sinr_i), in bits/s/Hz."""
    sinrs = np.asarray(sinrs, dtype=float)
    if np.any(sinrs < 0):
        raise ValueError("SINR values must be >= 0")
    return float(np.sum(np.log2(1.0 + sinrs)))


def parse_detector_scheme(name: str) -> tuple[str, float]:
    """Split a detector token into (base name, gen-lse lambda)."""
    name = name.strip()
    m = _GEN_LSE_RE.match(name)
    if m:
        try:
            lam = float(m.group(1))
        except ValueError:
            raise ConfigError(f"bad gen-lse parameter in '{name}'") from None
        if not lam > 0:
            raise ConfigError(f"gen-lse parameter must be > 0, got {lam}")
        return "gen-lse", lam
    if name not in DETECTOR_SCHEMES:
        raise ConfigError(
            f"unknown detector '{name}' (expected one of {', '.join(DETECTOR_SCHEMES)})"
        )
    return name, 1.0


def make_precoder(channels: ChannelSet, scheme: str, total_power: float) -> Precoder:
    """Build a named precoder; `zf` needs full-rank transmission (p_k = q_k)."""
    if scheme == "zf":
        return rczf_precode(reduce_full_zf(channels), total_power)
    if scheme == "ezf":
        return rczf_precode(reduce_ezf(channels), total_power)
    if scheme == "mrt":
        return mrt_precode(channels, total_power)
    raise ConfigError(
        f"unknown precoder '{scheme}' (expected one of {', '.join(PRECODER_SCHEMES)})"
    )


def make_detector(cov: CovarianceModel, scheme: str, sigma: float) -> Detector:
    """Build a named detector from a covariance model."""
    base, lam = parse_detector_scheme(scheme)
    if base == "mmse-irc":
        return mmse_irc(cov)
    if base == "mmse":
        return plain_mmse(cov, sigma)
    if base == "gen-lse":
        return gen_lse(cov, lam)
    if base == "lse-limit":
        return lse_limit(cov)
    return qr_mld_linear(cov)


def _service_report(
    channels: ChannelSet,
    precoder: Precoder,
    detector_scheme: str,
    noise: NoiseModel,
) -> tuple[list, list, list, list]:
    cov = build_covariance(channels, precoder, noise)
    detector = make_detector(cov, detector_scheme, noise.sigma)
    blocks = effective_links(channels, precoder, detector)
    sinrs, ses, leaks = [], [], []
    for k in range(channels.scenario.num_users):
        s = sinr_per_layer(blocks[k], k, detector.filters[k], noise.factors[k])
        sinrs.append(s)
        ses.append(spectral_efficiency(s))
        leaks.append(
            sum(
                float(np.linalg.norm(t) ** 2)
                for j, t in enumerate(blocks[k])
                if j != k
            )
        )
    return blocks, sinrs, ses, leaks


def su_mu_report(
    channels: ChannelSet,
    precoder_scheme: str,
    detector_scheme: str,
    noise: NoiseModel,
) -> LinkReport:
    """Joint multi-user service versus each user served alone.

    The single-user leg uses the user's own eigen zero-forcing precoder at
    power P * p_k / p (its share of the budget) with the same noise factor
    and detector scheme, so the SU/MU ratio isolates the cost of sharing
    the channel rather than the power split.
    """
    scenario = channels.scenario
    precoder = make_precoder(channels, precoder_scheme, scenario.total_power)
    blocks, sinrs, ses, leaks = _service_report(
        channels, precoder, detector_scheme, noise
    )
    mu_se = float(sum(ses))

    su_se = 0.0
    share = scenario.total_power / scenario.total_layers
    for k in range(scenario.num_users):
        alone = channels.single_user(k)
        _, p_k = scenario.users[k]
        su_precoder = rczf_precode(reduce_ezf(alone), share * p_k)
        su_noise = NoiseModel((noise.factors[k],), noise.sigma)
        _, _, su_ses, _ = _service_report(alone, su_precoder, detector_scheme, su_noise)
        su_se += su_ses[0]

    ratio = su_se / mu_se if mu_se > 0 else math.inf
    return LinkReport(
        blocks=blocks,
        sinr=sinrs,
        se=ses,
        interference_power=leaks,
        mu_se=mu_se,
        su_se=float(su_se),
        ratio=float(ratio),
    )
