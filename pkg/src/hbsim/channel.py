"""Channel generation for multi-user uplink MIMO with a uniform-linear-array receiver.

Three channel families are supported:

* geometric: each user's channel is a sum of a small number of propagation
  paths, each contributing a complex gain times an array response vector,
* rayleigh: i.i.d. unit-variance complex Gaussian entries,
* virtual (beamspace): a sparse reduced-dimension channel whose nonzero
  entries sit on a uniformly random support of RF-chain indices.

All generators are pure functions of their parameters and an explicit
``numpy.random.Generator``; identical seeds give bit-identical realizations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """Unit-total-variance complex Gaussian draws (real/imag each N(0, 1/2))."""
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return (re + 1j * im) / np.sqrt(2.0)


def arv(spatial_angle: float, n_antennas: int) -> np.ndarray:
    """Array response vector of a ULA for a normalized spatial angle.

    Entry m is ``exp(-1j * m * pi * spatial_angle) / sqrt(n_antennas)``, so the
    vector always has unit Euclidean norm. For the uniform grid of angles
    ``2n/N - 1`` with ``N == n_antennas`` the set of ARVs is orthonormal.
    """
    if n_antennas < 1:
        raise ValueError("n_antennas must be >= 1")
    if not np.isfinite(spatial_angle):
        raise ValueError(f"spatial angle must be finite, got {spatial_angle}")
    m = np.arange(n_antennas)
    return np.exp(-1j * np.pi * m * spatial_angle) / np.sqrt(n_antennas)


@dataclass(frozen=True)
class PathParams:
    """One propagation path: complex gain plus its arrival angle.

    ``spatial_angle`` is ``(2 d / lambda) * sin(physical_aoa)``; with
    half-wavelength spacing it equals ``sin(physical_aoa)`` and lies in
    [-1, 1].
    """

    gain: complex
    physical_aoa: float
    spatial_angle: float


@dataclass(frozen=True)
class ChannelRealization:
    """Channel matrix ``h`` (n_antennas x n_users) plus its generating paths.

    For geometric channels, column k reconstructs as
    ``sqrt(n_antennas / L_k) * sum_l gain_l * arv(angle_l)``. Rayleigh
    channels carry empty path lists.
    """

    h: np.ndarray
    paths: list[list[PathParams]] = field(default_factory=list)

    @property
    def n_antennas(self) -> int:
        return self.h.shape[0]

    @property
    def n_users(self) -> int:
        return self.h.shape[1]

    @property
    def path_counts(self) -> list[int]:
        return [len(p) for p in self.paths]


@dataclass(frozen=True)
class VirtualChannelRealization:
    """Sparse beamspace channel ``h_b`` (n_rf x n_users) with its supports.

    Each column has exactly ``paths_per_user`` nonzero entries equal to
    ``sqrt(n_antennas / paths_per_user) * xi`` with xi unit complex Gaussian;
    ``n_antennas`` records the full-array dimension the scale factor refers to.
    """

    h_b: np.ndarray
    supports: list[np.ndarray]
    n_antennas: int

    @property
    def n_rf(self) -> int:
        return self.h_b.shape[0]

    @property
    def n_users(self) -> int:
        return self.h_b.shape[1]


def column_from_paths(paths: list[PathParams], n_antennas: int) -> np.ndarray:
    """Assemble one user's channel column from its path parameters."""
    n_paths = len(paths)
    if n_paths == 0:
        raise ValueError("need at least one path")
    col = np.zeros(n_antennas, dtype=complex)
    for p in paths:
        col += p.gain * arv(p.spatial_angle, n_antennas)
    return np.sqrt(n_antennas / n_paths) * col


def draw_path_count(mean_paths: float, rng: np.random.Generator) -> int:
    """Number of propagation paths: ``max(1, Poisson(mean_paths))``."""
    if mean_paths <= 0:
        raise ValueError("mean_paths must be positive")
    return max(1, int(rng.poisson(mean_paths)))


def gen_geometric_channel(
    n_antennas: int,
    n_users: int,
    mean_paths: float,
    rng: np.random.Generator,
    d_over_lambda: float = 0.5,
) -> ChannelRealization:
    """Multipath channel: per-user Poisson path count (floored at one path),
    arrival angles uniform on [-pi/2, pi/2], unit complex Gaussian gains."""
    if n_antennas < 1 or n_users < 1:
        raise ValueError("n_antennas and n_users must be >= 1")
    cols = []
    all_paths: list[list[PathParams]] = []
    for _ in range(n_users):
        n_paths = draw_path_count(mean_paths, rng)
        aoas = rng.uniform(-np.pi / 2, np.pi / 2, size=n_paths)
        gains = complex_normal(rng, n_paths)
        paths = [
            PathParams(
                gain=complex(g),
                physical_aoa=float(a),
                spatial_angle=float(2.0 * d_over_lambda * np.sin(a)),
            )
            for g, a in zip(gains, aoas)
        ]
        cols.append(column_from_paths(paths, n_antennas))
        all_paths.append(paths)
    return ChannelRealization(h=np.column_stack(cols), paths=all_paths)


def gen_rayleigh_channel(
    n_antennas: int, n_users: int, rng: np.random.Generator
) -> ChannelRealization:
    """I.i.d. unit-variance complex Gaussian channel (no path structure)."""
    if n_antennas < 1 or n_users < 1:
        raise ValueError("n_antennas and n_users must be >= 1")
    h = complex_normal(rng, (n_antennas, n_users))
    return ChannelRealization(h=h, paths=[[] for _ in range(n_users)])


def gen_virtual_channel(
    n_rf: int,
    n_users: int,
    paths_per_user: int,
    n_antennas: int,
    rng: np.random.Generator,
) -> VirtualChannelRealization:
    """Sparse beamspace channel with a uniform random support per user."""
    if paths_per_user < 1:
        raise ValueError("paths_per_user must be >= 1")
    if paths_per_user > n_rf:
        raise ValueError(
            f"paths_per_user ({paths_per_user}) must not exceed n_rf ({n_rf})"
        )
    if n_users < 1:
        raise ValueError("n_users must be >= 1")
    scale = np.sqrt(n_antennas / paths_per_user)
    h_b = np.zeros((n_rf, n_users), dtype=complex)
    supports = []
    for k in range(n_users):
        support = rng.choice(n_rf, size=paths_per_user, replace=False)
        h_b[support, k] = scale * complex_normal(rng, paths_per_user)
        supports.append(np.sort(support))
    return VirtualChannelRealization(h_b=h_b, supports=supports, n_antennas=n_antennas)


def gen_homogeneous_channel(
    n_antennas: int, n_users: int, singular_value: float, rng: np.random.Generator
) -> np.ndarray:
    """Synthetic channel with all squared singular values equal.

    Returns ``sqrt(singular_value) * Q`` where Q is the first ``n_users``
    columns of a Haar-random unitary, so ``H^H H = singular_value * I``
    exactly (``singular_value`` is the common eigenvalue of ``H H^H``).
    """
    if singular_value < 0:
        raise ValueError("singular_value must be nonnegative")
    if n_users > n_antennas:
        raise ValueError("n_users must not exceed n_antennas")
    z = complex_normal(rng, (n_antennas, n_users))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return np.sqrt(singular_value) * q
