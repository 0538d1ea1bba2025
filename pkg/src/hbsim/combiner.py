"""Analog and digital combiner construction.

Analog combiners come in two stages: a channel-gain aggregation stage W_RF1
(tall, ideally semi-unitary) and an optional spreading stage W_RF2 (square,
unitary with constant-modulus entries, realized by a normalized DFT matrix).
The spreading stage equalizes per-RF-chain signal power, which keeps coarse
ADCs from being overloaded by a few strong chains.

Builders:

* ``arv_tsac``   greedy array-response-vector selection + DFT spreading
* ``svd_combiner``  left-singular-vector aggregation, with or without DFT
* ``aoa_combiner``  true-arrival-angle ARVs padded with an orthonormal
  complement, + DFT
* ``greedy_mi``  one-stage greedy mutual-information maximization over an
  ARV codebook

Digital combiners (MRC / ZF / MMSE) act on the quantized RF-chain outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .channel import ChannelRealization, arv, complex_normal
from .quantizer import QuantizerModel

# Fixed stream for the orthonormal-complement directions in aoa_combiner,
# so the combiner is a deterministic function of the channel realization.
_COMPLEMENT_SEED = 0x0A0A_C0DE


@dataclass(frozen=True)
class Codebook:
    """Evenly spaced spatial angles ``2n/size - 1`` for n = 1..size."""

    spatial_angles: np.ndarray

    @property
    def size(self) -> int:
        return len(self.spatial_angles)


def build_codebook(size: int) -> Codebook:
    if size < 1:
        raise ValueError("codebook size must be >= 1")
    angles = 2.0 * np.arange(1, size + 1) / size - 1.0
    return Codebook(spatial_angles=angles)


def arv_bank(codebook: Codebook, n_antennas: int) -> np.ndarray:
    """Matrix whose columns are the ARVs of every codebook angle."""
    m = np.arange(n_antennas)[:, None]
    phases = np.exp(-1j * np.pi * m * codebook.spatial_angles[None, :])
    return phases / np.sqrt(n_antennas)


def dft_matrix(n: int) -> np.ndarray:
    """Normalized n x n DFT matrix: unitary, every entry of modulus 1/sqrt(n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


@dataclass(frozen=True)
class AnalogCombinerPair:
    """First-stage and second-stage analog combiners.

    ``angles`` records the greedy selection order for codebook-based builders
    (None for SVD-based ones).
    """

    w_rf1: np.ndarray
    w_rf2: np.ndarray
    angles: np.ndarray | None = None

    @property
    def w_rf(self) -> np.ndarray:
        return self.w_rf1 @ self.w_rf2


@dataclass(frozen=True)
class DigitalCombiner:
    kind: str
    w_bb: np.ndarray


def arv_tsac(
    h: np.ndarray,
    n_rf: int,
    codebook: Codebook,
    return_residuals: bool = False,
):
    """Two-stage analog combiner: greedy max-gain ARV selection + DFT.

    Each iteration picks the codebook angle whose ARV captures the largest
    remaining channel gain, appends it to W_RF1, and projects the remaining
    channel onto the orthogonal complement of that ARV. Ties break toward the
    lowest codebook index. If the residual gain collapses below
    1e-12 * ||H||_F^2 the remaining columns are filled with unused codebook
    ARVs in codebook order.

    With ``return_residuals=True`` also returns the post-projection gain
    ``||a(theta*)^H H_rm||`` of each selected angle (zero up to roundoff).
    """
    n_antennas = h.shape[0]
    if n_rf > codebook.size:
        raise ValueError(f"n_rf ({n_rf}) exceeds codebook size ({codebook.size})")
    if n_rf > n_antennas:
        raise ValueError(f"n_rf ({n_rf}) exceeds antenna count ({n_antennas})")
    bank = arv_bank(codebook, n_antennas)
    h_rm = h.astype(complex, copy=True)
    available = np.ones(codebook.size, dtype=bool)
    energy_floor = 1e-12 * np.linalg.norm(h) ** 2
    selected: list[int] = []
    residuals: list[float] = []
    for _ in range(n_rf):
        gains = np.sum(np.abs(bank.conj().T @ h_rm) ** 2, axis=1)
        gains[~available] = -np.inf
        best = int(np.argmax(gains))
        if gains[best] < energy_floor:
            break
        a = bank[:, best]
        h_rm -= np.outer(a, a.conj() @ h_rm)
        available[best] = False
        selected.append(best)
        residuals.append(float(np.linalg.norm(a.conj() @ h_rm)))
    # channel energy exhausted: pad with unused angles in codebook order
    for idx in np.flatnonzero(available):
        if len(selected) == n_rf:
            break
        selected.append(int(idx))
        residuals.append(0.0)
        available[idx] = False
    pair = AnalogCombinerPair(
        w_rf1=bank[:, selected],
        w_rf2=dft_matrix(n_rf),
        angles=codebook.spatial_angles[selected],
    )
    if return_residuals:
        return pair, np.asarray(residuals)
    return pair


def _fix_column_phases(u: np.ndarray) -> np.ndarray:
    # rotate each column so its largest-magnitude entry is real positive
    idx = np.argmax(np.abs(u), axis=0)
    pivots = u[idx, np.arange(u.shape[1])]
    return u * (pivots.conj() / np.abs(pivots))


def svd_combiner(h: np.ndarray, n_rf: int, with_dft_stage: bool) -> AnalogCombinerPair:
    """First ``n_rf`` left-singular vectors of H, optionally DFT-spread.

    Singular vectors are ordered by decreasing singular value; columns beyond
    the channel rank are an orthonormal basis of the complement. Column
    phases are normalized for backend-independent reproducibility.
    """
    n_antennas = h.shape[0]
    if n_rf > n_antennas:
        raise ValueError(f"n_rf ({n_rf}) exceeds antenna count ({n_antennas})")
    u, _, _ = np.linalg.svd(h, full_matrices=True)
    w1 = _fix_column_phases(u[:, :n_rf])
    w2 = dft_matrix(n_rf) if with_dft_stage else np.eye(n_rf, dtype=complex)
    return AnalogCombinerPair(w_rf1=w1, w_rf2=w2)


def aoa_combiner(
    chan: ChannelRealization,
    n_rf: int,
    rng: np.random.Generator | None = None,
) -> AnalogCombinerPair:
    """ARVs at the true arrival angles, padded to n_rf with an orthonormal
    complement, followed by the DFT spreading stage.

    The complement is built by orthonormalizing random Gaussian directions
    against the span of the path ARVs (Householder QR, so orthogonality holds
    to machine precision). Requires the total path count to fit in n_rf.
    """
    spatial_angles = [p.spatial_angle for user in chan.paths for p in user]
    total_paths = len(spatial_angles)
    if total_paths == 0:
        raise ValueError("channel realization carries no path parameters")
    if total_paths > n_rf:
        raise ValueError(
            f"total path count ({total_paths}) exceeds n_rf ({n_rf}) "
            f"by {total_paths - n_rf}"
        )
    n_antennas = chan.n_antennas
    a_aoa = np.column_stack([arv(t, n_antennas) for t in spatial_angles])
    n_extra = n_rf - total_paths
    if n_extra > 0:
        if rng is None:
            rng = np.random.default_rng(_COMPLEMENT_SEED)
        q_span, _ = np.linalg.qr(a_aoa)
        g = complex_normal(rng, (n_antennas, n_extra))
        q_full, _ = np.linalg.qr(np.column_stack([q_span, g]))
        complement = q_full[:, total_paths : total_paths + n_extra]
        w1 = np.column_stack([a_aoa, complement])
    else:
        w1 = a_aoa
    return AnalogCombinerPair(
        w_rf1=w1, w_rf2=dft_matrix(n_rf), angles=np.asarray(spatial_angles)
    )


def _greedy_mi_orthonormal(
    bank: np.ndarray,
    h: np.ndarray,
    n_rf: int,
    snr: float,
    q: QuantizerModel,
) -> list[int]:
    # For an orthonormal bank, the quantization-aware MI of any ARV subset S is
    #   log2 |I + snr*alpha^2 * E_S^H D_S^{-1} E_S|,  E = bank^H h,
    # with D diagonal, d_j = alpha^2 + alpha*beta*(snr*||E_j||^2 + 1).
    # Appending column c multiplies the determinant by (1 + gamma_c u_c^H K^{-1} u_c)
    # with u_c = conj(E_c), so each round scores all candidates from one
    # Cholesky factor of the running K.
    n_cb = bank.shape[1]
    e = bank.conj().T @ h
    d = q.alpha**2 + q.alpha * q.beta * (snr * np.sum(np.abs(e) ** 2, axis=1) + 1.0)
    gamma = snr * q.alpha**2 / d
    n_users = h.shape[1]
    k_mat = np.eye(n_users, dtype=complex)
    available = np.ones(n_cb, dtype=bool)
    selected: list[int] = []
    for _ in range(n_rf):
        cands = np.flatnonzero(available)
        u = e[cands].conj().T  # (n_users, n_cands)
        chol = np.linalg.cholesky(k_mat)
        z = solve_triangular(chol, u, lower=True)
        scores = gamma[cands] * np.sum(np.abs(z) ** 2, axis=0)
        best = int(cands[np.argmax(scores)])
        u_best = e[best].conj()
        k_mat = k_mat + gamma[best] * np.outer(u_best, u_best.conj())
        available[best] = False
        selected.append(best)
    return selected


def greedy_mi(
    h: np.ndarray,
    n_rf: int,
    codebook: Codebook,
    snr: float,
    q: QuantizerModel,
) -> AnalogCombinerPair:
    """One-stage greedy MI maximization over the ARV codebook.

    Each round appends the codebook ARV that maximizes the mutual information
    of the partially built combiner (second stage = identity). Previously
    selected directions stay in place; candidates are not projected.
    """
    n_antennas = h.shape[0]
    if n_rf > codebook.size:
        raise ValueError(f"n_rf ({n_rf}) exceeds codebook size ({codebook.size})")
    bank = arv_bank(codebook, n_antennas)
    gram = bank.conj().T @ bank
    orthonormal = np.max(np.abs(gram - np.eye(codebook.size))) < 1e-9
    if orthonormal:
        selected = _greedy_mi_orthonormal(bank, h, n_rf, snr, q)
    else:
        from .metrics import mutual_information

        available = np.ones(codebook.size, dtype=bool)
        selected = []
        for _ in range(n_rf):
            cands = np.flatnonzero(available)
            scores = [
                mutual_information(bank[:, selected + [int(c)]], h, snr, q)
                for c in cands
            ]
            best = int(cands[np.argmax(scores)])
            available[best] = False
            selected.append(best)
    return AnalogCombinerPair(
        w_rf1=bank[:, selected],
        w_rf2=np.eye(n_rf, dtype=complex),
        angles=codebook.spatial_angles[selected],
    )


def digital_combiner(
    kind: str,
    h_eq: np.ndarray,
    w_rf: np.ndarray,
    snr: float,
    q: QuantizerModel,
) -> DigitalCombiner:
    """MRC, ZF, or MMSE digital combiner on the effective channel W_RF^H H.

    MMSE accounts for both the AWGN after analog combining and the
    quantization-noise covariance.
    """
    n_rf, n_users = h_eq.shape
    if kind == "MRC":
        w_bb = h_eq.copy()
    elif kind == "ZF":
        if np.linalg.matrix_rank(h_eq) < n_users:
            raise np.linalg.LinAlgError(
                "ZF combiner requires a full-column-rank effective channel"
            )
        gram = h_eq.conj().T @ h_eq
        w_bb = np.linalg.solve(gram, h_eq.conj().T).conj().T
    elif kind == "MMSE":
        wgram = w_rf.conj().T @ w_rf
        # diag R_qq from the effective channel: W^H H H^H W = H_eq H_eq^H
        rqq = q.alpha * q.beta * (
            snr * np.sum(np.abs(h_eq) ** 2, axis=1) + np.diag(wgram).real
        )
        r_yy = (
            q.alpha**2 * snr * (h_eq @ h_eq.conj().T)
            + q.alpha**2 * wgram
            + np.diag(rqq)
        )
        w_bb = np.linalg.solve(r_yy, q.alpha * snr * h_eq)
    else:
        raise ValueError(f"unknown digital combiner kind: {kind!r}")
    return DigitalCombiner(kind=kind, w_bb=w_bb)
