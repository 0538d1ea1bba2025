"""Mutual information, per-user achievable rates, and closed-form curves.

The mutual information between the transmitted symbols and the quantized
RF-chain outputs under the AQNM is

    C(W) = log2 | I + snr * alpha^2 * (alpha^2 W^H W + R_qq)^{-1} W^H H H^H W |

and is evaluated through a Cholesky factor of the Hermitian positive-definite
noise matrix (never an explicit inverse), which stays stable at high SNR.

Closed forms implemented here:

* ``theory_optimal_mi``       exact MI of the two-stage combiner when all
  channel singular values are equal
* ``theory_svd_upper_bound``  SNR-independent ceiling of the one-stage
  singular-vector combiner under coarse quantization
* ``theory_ergodic_rate``     MRC ergodic sum-rate approximations for the
  sparse beamspace channel, with and without the spreading stage
* ``theory_quantization_noise``  auto / cross quantization-noise variances
* ``empirical_moments``       Monte Carlo estimates of the beamspace moment
  identities the rate approximations rest on
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .channel import gen_virtual_channel
from .combiner import DigitalCombiner, dft_matrix
from .quantizer import QuantizerModel

SEMI_UNITARY_TOL = 1e-8


def db_to_linear(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


@dataclass(frozen=True)
class RateReport:
    per_user_rates: np.ndarray
    sum_rate: float
    method_label: str = ""


@dataclass(frozen=True)
class TheoryInputs:
    """Parameters of the closed-form expressions (snr is linear scale)."""

    n_antennas: int
    n_rf: int
    n_users: int
    snr: float
    quantizer: QuantizerModel
    paths_per_user: int | None = None
    singular_value: float | None = None

    def __post_init__(self):
        if not (self.n_users <= self.n_rf <= self.n_antennas):
            raise ValueError(
                "need n_users <= n_rf <= n_antennas, got "
                f"({self.n_users}, {self.n_rf}, {self.n_antennas})"
            )
        if self.snr < 0:
            raise ValueError("snr must be nonnegative")


def mutual_information(
    w_rf: np.ndarray, h: np.ndarray, snr: float, q: QuantizerModel
) -> float:
    """MI (bits/s/Hz) between transmit symbols and quantized combiner outputs."""
    if w_rf.shape[0] != h.shape[0]:
        raise ValueError(f"dimension mismatch: W_RF {w_rf.shape} vs H {h.shape}")
    if snr < 0:
        raise ValueError("snr must be nonnegative")
    if snr == 0:
        return 0.0
    h_eq = w_rf.conj().T @ h
    wgram = w_rf.conj().T @ w_rf
    rqq = q.alpha * q.beta * (
        snr * np.sum(np.abs(h_eq) ** 2, axis=1) + np.diag(wgram).real
    )
    noise = q.alpha**2 * wgram + np.diag(rqq.astype(complex))
    try:
        chol = np.linalg.cholesky(noise)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "effective noise matrix is not positive definite; "
            "the combiner is rank deficient or inputs are corrupted"
        ) from exc
    s = solve_triangular(chol, h_eq, lower=True) * (q.alpha * np.sqrt(snr))
    sv = np.linalg.svd(s, compute_uv=False)
    return float(np.sum(np.log2(1.0 + sv**2)))


def per_user_rate(
    w_rf: np.ndarray,
    combiner: DigitalCombiner,
    h: np.ndarray,
    snr: float,
    q: QuantizerModel,
) -> RateReport:
    """Per-user achievable rates for a semi-unitary analog combiner.

    rate_k = log2(1 + alpha^2 snr |w_k^H h_k|^2 / eta_k) where eta_k collects
    inter-user interference, AWGN, and quantization noise seen through the
    digital combiner column w_k. The semi-unitary property of W_RF is a
    hypothesis of this expression, so it is asserted rather than repaired.
    """
    if w_rf.shape[0] != h.shape[0]:
        raise ValueError(f"dimension mismatch: W_RF {w_rf.shape} vs H {h.shape}")
    n_rf = w_rf.shape[1]
    wgram = w_rf.conj().T @ w_rf
    if np.max(np.abs(wgram - np.eye(n_rf))) > SEMI_UNITARY_TOL:
        raise ValueError("W_RF is not semi-unitary (W^H W != I)")
    h_eq = w_rf.conj().T @ h
    w_bb = combiner.w_bb
    if w_bb.shape != h_eq.shape:
        raise ValueError(
            f"combiner/channel dimension mismatch: {w_bb.shape} vs {h_eq.shape}"
        )
    rqq = q.alpha * q.beta * (snr * np.sum(np.abs(h_eq) ** 2, axis=1) + 1.0)
    cross = np.abs(w_bb.conj().T @ h_eq) ** 2  # |w_k^H h_u|^2 at [k, u]
    signal = q.alpha**2 * snr * np.diag(cross)
    interference = q.alpha**2 * snr * (np.sum(cross, axis=1) - np.diag(cross))
    awgn = q.alpha**2 * np.sum(np.abs(w_bb) ** 2, axis=0)
    quant = np.einsum("j,jk->k", rqq, np.abs(w_bb) ** 2)
    rates = np.log2(1.0 + signal / (interference + awgn + quant))
    return RateReport(
        per_user_rates=rates,
        sum_rate=float(np.sum(rates)),
        method_label=combiner.kind,
    )


def theory_optimal_mi(inputs: TheoryInputs) -> float:
    """Exact MI of the spread two-stage combiner for equal singular values."""
    lam = inputs.singular_value
    if lam is None or lam < 0:
        raise ValueError("singular_value must be provided and nonnegative")
    if inputs.snr == 0 or lam == 0:
        return 0.0
    q = inputs.quantizer
    denom = lam * inputs.n_users * (1.0 - q.alpha) + inputs.n_rf / inputs.snr
    return inputs.n_users * math.log2(1.0 + q.alpha * lam * inputs.n_rf / denom)


def theory_svd_upper_bound(n_users: int, q: QuantizerModel) -> float:
    """Quantization ceiling of the one-stage singular-vector combiner.

    Infinite for perfect quantization (the combiner is then capacity optimal
    and unbounded in SNR).
    """
    if n_users < 0:
        raise ValueError("n_users must be nonnegative")
    if n_users == 0:
        return 0.0
    if q.beta == 0.0:
        return math.inf
    return n_users * math.log2(1.0 + q.alpha / q.beta)


def theory_ergodic_rate(variant: str, inputs: TheoryInputs) -> float:
    """MRC ergodic sum-rate approximation on the sparse beamspace channel.

    ``two_stage`` spreads the aggregated gains with the DFT stage before
    quantization; ``one_stage`` quantizes the aggregation output directly,
    which inflates the quantization-noise term by n_rf / paths_per_user.
    """
    if variant not in ("two_stage", "one_stage"):
        raise ValueError(f"unknown variant: {variant!r}")
    lpaths = inputs.paths_per_user
    if lpaths is None:
        raise ValueError("paths_per_user is required")
    if lpaths > inputs.n_rf:
        raise ValueError(
            f"paths_per_user ({lpaths}) must not exceed n_rf ({inputs.n_rf})"
        )
    if inputs.snr == 0:
        return 0.0
    q = inputs.quantizer
    snr, n_r, n_rf, n_u = inputs.snr, inputs.n_antennas, inputs.n_rf, inputs.n_users
    numer = snr * q.alpha * n_r * n_rf * (1.0 + 1.0 / lpaths)
    quant = 2.0 * snr * (1.0 - q.alpha) * n_r
    if variant == "one_stage":
        quant *= n_rf / lpaths
    denom = n_rf + snr * n_r * (n_u - 1) + quant
    return n_u * math.log2(1.0 + numer / denom)


def theory_quantization_noise(
    kind: str, n_antennas: int, n_rf: int, n_users: int
) -> float:
    """Average auto / cross quantization-noise variance after DFT spreading."""
    if n_rf < 1:
        raise ValueError("n_rf must be >= 1")
    if kind == "auto":
        return 2.0 * n_antennas**2 / n_rf
    if kind == "cross":
        return n_antennas**2 * (n_users - 1) / n_rf
    raise ValueError(f"unknown kind: {kind!r}")


@dataclass(frozen=True)
class MomentScenario:
    n_antennas: int
    n_rf: int
    n_users: int
    paths_per_user: int


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    stderr: float
    closed_form: float


def moment_closed_forms(sc: MomentScenario) -> dict[str, float]:
    n_r, n_rf, n_u, lp = sc.n_antennas, sc.n_rf, sc.n_users, sc.paths_per_user
    return {
        "h_norm_sq": float(n_r),
        "h_norm_4th": n_r**2 * (1.0 + lp) / lp,
        "cross_gram_sq": n_r**2 / n_rf,
        "psi_auto": 2.0 * n_r**2 / n_rf,
        "psi_cross": n_r**2 * (n_u - 1) / n_rf,
        "psi_one_stage": n_r**2 * (2.0 / lp + (n_u - 1) / n_rf),
    }


def empirical_moments(
    sc: MomentScenario, n_samples: int, rng: np.random.Generator
) -> dict[str, MomentEstimate]:
    """Monte Carlo estimates of the beamspace moment identities.

    Per draw of the sparse beamspace channel: the squared and fourth-power
    norm of user 0's channel, the squared inner product with user 1, the
    DFT-domain auto and cross quantization-noise statistics, and the
    one-stage (no spreading) quantization-noise statistic.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    if sc.n_users < 2:
        raise ValueError("scenario needs at least two users for cross moments")
    w_dft = dft_matrix(sc.n_rf)
    samples = {name: np.empty(n_samples) for name in moment_closed_forms(sc)}
    for i in range(n_samples):
        chan = gen_virtual_channel(
            sc.n_rf, sc.n_users, sc.paths_per_user, sc.n_antennas, rng
        )
        hb = chan.h_b
        h0 = hb[:, 0]
        sq = float((h0.conj() @ h0).real)
        samples["h_norm_sq"][i] = sq
        samples["h_norm_4th"][i] = sq**2
        samples["cross_gram_sq"][i] = np.abs(h0.conj() @ hb[:, 1]) ** 2
        z = w_dft.conj().T @ hb  # beamspace channel seen by each RF chain
        z0_sq = np.abs(z[:, 0]) ** 2
        samples["psi_auto"][i] = float(np.sum(z0_sq**2))
        cross_power = np.sum(np.abs(z[:, 1:]) ** 2, axis=1)
        samples["psi_cross"][i] = float(z0_sq @ cross_power)
        chain_power = np.sum(np.abs(hb) ** 2, axis=1)
        samples["psi_one_stage"][i] = float(np.abs(h0) ** 2 @ chain_power)
    closed = moment_closed_forms(sc)
    out = {}
    for name, vals in samples.items():
        out[name] = MomentEstimate(
            value=float(np.mean(vals)),
            stderr=float(np.std(vals, ddof=1) / np.sqrt(n_samples)),
            closed_form=closed[name],
        )
    return out
