"""Additive quantization noise model (AQNM) and the MMSE scalar quantizer.

The AQNM linearizes b-bit scalar quantization of each real dimension into a
gain ``alpha = 1 - beta`` plus uncorrelated Gaussian noise, where ``beta`` is
the normalized MSE of the MMSE (Lloyd-Max) quantizer for a Gaussian input.
The noise covariance after an analog combiner W applied to a channel H is

    R_qq = alpha * beta * diag{ snr * W^H H H^H W + W^H W }.

``GAUSSIAN_DISTORTION`` holds the b <= 5 distortion values; they were computed
with ``lloyd_max_design`` (converged below 1e-12) and frozen here so the
constants are reproducible from this module alone. For b > 5 the closed-form
high-resolution approximation ``(pi * sqrt(3) / 2) * 2**(-2b)`` is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.stats import norm

# Normalized Lloyd-Max MSE for a unit-variance Gaussian, b = 1..5 bits.
GAUSSIAN_DISTORTION = {
    1: 0.3633802276324186,
    2: 0.11748184782981319,
    3: 0.03454776079149968,
    4: 0.00950100802123921,
    5: 0.002504668409709754,
}

_HIGH_RES_COEFF = math.pi * math.sqrt(3.0) / 2.0


def distortion_factor(bits: int | float) -> float:
    """Normalized quantization MSE beta_b for a Gaussian input at b bits.

    ``math.inf`` bits means perfect quantization (beta = 0).
    """
    if bits == math.inf:
        return 0.0
    if bits != int(bits) or bits < 1:
        raise ValueError(f"bits must be a positive integer or inf, got {bits}")
    bits = int(bits)
    if bits <= 5:
        return GAUSSIAN_DISTORTION[bits]
    return _HIGH_RES_COEFF * 2.0 ** (-2 * bits)


@dataclass(frozen=True)
class QuantizerModel:
    """ADC resolution with its AQNM distortion ``beta`` and gain ``alpha``."""

    bits: int | float

    @property
    def beta(self) -> float:
        return distortion_factor(self.bits)

    @property
    def alpha(self) -> float:
        return 1.0 - self.beta

    @property
    def is_infinite(self) -> bool:
        return self.bits == math.inf


@dataclass(frozen=True)
class ScalarQuantizer:
    """Scalar quantizer codebook for one real dimension, unit-variance scale.

    ``thresholds`` are the decision boundaries between adjacent ``levels``
    (midpoints at the MMSE fixed point), so nearest-level mapping is a
    ``searchsorted`` over thresholds.
    """

    levels: np.ndarray
    thresholds: np.ndarray


@dataclass(frozen=True)
class LloydMaxResult:
    quantizer: ScalarQuantizer
    distortion: float
    history: np.ndarray  # per-iteration distortion, monotone nonincreasing


class LloydMaxConvergenceError(RuntimeError):
    """Raised when the alternating design stalls; carries the last distortion."""

    def __init__(self, bits: int, max_iters: int, last_distortion: float):
        self.last_distortion = last_distortion
        super().__init__(
            f"Lloyd-Max design for {bits} bits did not converge within "
            f"{max_iters} iterations (last distortion {last_distortion:.6e})"
        )


def _cell_masses(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # probability mass and first moment of the standard Gaussian per cell
    p = norm.cdf(edges[1:]) - norm.cdf(edges[:-1])
    m = norm.pdf(edges[:-1]) - norm.pdf(edges[1:])
    return p, m


def _quadrature_distortion(levels: np.ndarray, thresholds: np.ndarray) -> float:
    edges = np.concatenate(([-np.inf], thresholds, [np.inf]))
    total = 0.0
    for lo, hi, y in zip(edges[:-1], edges[1:], levels):
        val, _ = integrate.quad(
            lambda x, y=y: (x - y) ** 2 * norm.pdf(x), lo, hi, epsabs=1e-12, limit=200
        )
        total += val
    return total


def lloyd_max_design(
    bits: int, max_iters: int = 50_000, tol: float = 1e-12
) -> LloydMaxResult:
    """Design the MMSE scalar quantizer for a unit-variance Gaussian source.

    Alternates centroid and midpoint-threshold updates until the distortion
    change drops below ``tol``. Cell centroids use the exact Gaussian cell
    moments; the final achieved distortion is re-evaluated by adaptive
    quadrature of the error integral (absolute tolerance 1e-12).
    """
    if not 1 <= bits <= 8:
        raise ValueError(f"bits must be in 1..8, got {bits}")
    n = 2**bits
    levels = norm.ppf((np.arange(n) + 0.5) / n)
    history = []
    prev_d = np.inf
    for _ in range(max_iters):
        thresholds = 0.5 * (levels[:-1] + levels[1:])
        edges = np.concatenate(([-np.inf], thresholds, [np.inf]))
        p, m = _cell_masses(edges)
        levels = m / p
        # distortion with centroid levels: E[X^2] - sum(p * centroid^2)
        d = 1.0 - float(np.sum(m * m / p))
        history.append(d)
        if abs(prev_d - d) < tol:
            quant = ScalarQuantizer(levels=levels, thresholds=thresholds)
            return LloydMaxResult(
                quantizer=quant,
                distortion=_quadrature_distortion(levels, thresholds),
                history=np.asarray(history),
            )
        prev_d = d
    raise LloydMaxConvergenceError(bits, max_iters, history[-1])


def scalar_quantize(
    signal: np.ndarray,
    quantizer: ScalarQuantizer | None,
    per_dim_variance: float,
) -> np.ndarray:
    """Quantize real and imaginary parts independently with nearest levels.

    Components are normalized by ``sqrt(per_dim_variance)`` before the
    codebook lookup and rescaled afterwards. ``quantizer=None`` models
    infinite resolution and returns the signal unchanged.
    """
    if per_dim_variance <= 0:
        raise ValueError("per_dim_variance must be positive")
    signal = np.asarray(signal)
    if quantizer is None:
        return signal.copy()
    scale = np.sqrt(per_dim_variance)

    def _map(x: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(quantizer.thresholds, x / scale)
        return quantizer.levels[idx] * scale

    if np.iscomplexobj(signal):
        return _map(signal.real) + 1j * _map(signal.imag)
    return _map(signal)


def quantization_noise_diagonal(
    w_rf: np.ndarray, h: np.ndarray, snr: float, q: QuantizerModel
) -> np.ndarray:
    """Diagonal of R_qq as a real vector (length = number of RF chains)."""
    if w_rf.ndim != 2 or h.ndim != 2 or w_rf.shape[0] != h.shape[0]:
        raise ValueError(
            f"dimension mismatch: W_RF {w_rf.shape} vs H {h.shape}"
        )
    if snr < 0:
        raise ValueError("snr must be nonnegative")
    h_eq = w_rf.conj().T @ h
    signal_part = snr * np.sum(np.abs(h_eq) ** 2, axis=1)
    noise_part = np.sum(np.abs(w_rf) ** 2, axis=0)
    return q.alpha * q.beta * (signal_part + noise_part)


def quantization_covariance(
    w_rf: np.ndarray, h: np.ndarray, snr: float, q: QuantizerModel
) -> np.ndarray:
    """Quantization-noise covariance R_qq (diagonal, real, nonnegative)."""
    return np.diag(quantization_noise_diagonal(w_rf, h, snr, q))
