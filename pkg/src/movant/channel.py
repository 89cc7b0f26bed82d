"""Deterministic line-of-sight channel, zero-forcing beamforming, and the
scalar objectives (rate, effective throughput, trace of the inverse Gram).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from .errors import SingularChannel
from .scenario import Scenario, as_positions

__all__ = [
    "SINGULAR_COND_LIMIT",
    "ChannelState",
    "channel_vector",
    "channel_state",
    "trace_objective",
    "zf_beamformer",
    "optimal_power",
    "common_sinr",
    "achievable_rate",
    "effective_throughput",
]

# Gram condition number above which the channel is treated as singular
SINGULAR_COND_LIMIT = 1e12


@dataclass(frozen=True)
class ChannelState:
    """Stacked channel matrix H (N x K), its Gram G = H^H H, and G^-1.

    Column k of H is the conjugated steering vector of user k, so G is
    Hermitian positive definite for any full-rank deployment.
    """

    H: np.ndarray
    G: np.ndarray
    G_inv: np.ndarray
    cond: float


def channel_vector(scenario: Scenario, deployment, k: int) -> np.ndarray:
    """Channel row vector of user ``k`` for the given deployment.

    Entry n is ``sqrt(beta_k) * exp(+1j * wavenumber * dot(a_n, b_k))`` where
    ``b_k`` is the user's direction vector; every entry has modulus
    sqrt(beta_k).
    """
    if not 0 <= k < scenario.num_users:
        raise ValueError(f"user index {k} out of range [0, {scenario.num_users})")
    pos = as_positions(deployment)
    if pos.shape[0] != scenario.num_antennas:
        raise ValueError("deployment size does not match the scenario")
    b = scenario.direction_vectors()[k]
    amp = scenario.amplitudes()[k]
    return amp * np.exp(1j * scenario.wavenumber * (pos @ b))


def channel_state(scenario: Scenario, deployment) -> ChannelState:
    """Build the stacked channel matrix and its (inverted) Gram.

    Raises
    ------
    SingularChannel
        If the Gram condition number exceeds ``SINGULAR_COND_LIMIT`` (e.g.
        coinciding antennas or indistinguishable users).
    """
    pos = as_positions(deployment)
    if pos.shape[0] != scenario.num_antennas:
        raise ValueError("deployment size does not match the scenario")
    H = kernels.channel_matrix(
        pos, scenario.direction_vectors(), scenario.amplitudes(), scenario.wavenumber
    )
    G = np.conj(H.T) @ H
    eigvals = np.linalg.eigvalsh(G)
    cond = np.inf if eigvals[0] <= 0 else float(eigvals[-1] / eigvals[0])
    if cond > SINGULAR_COND_LIMIT:
        raise SingularChannel(
            f"Gram condition number {cond:.3e} exceeds {SINGULAR_COND_LIMIT:.0e}"
        )
    cho = scipy.linalg.cho_factor(G, lower=True)
    G_inv = scipy.linalg.cho_solve(cho, np.eye(scenario.num_users, dtype=complex))
    return ChannelState(H=H, G=G, G_inv=G_inv, cond=cond)


def trace_objective(scenario: Scenario, deployment) -> float:
    """tr(G^-1) for the deployment; strictly positive, lower is better."""
    pos = as_positions(deployment)
    trace, cond = kernels.trace_at(
        pos,
        scenario.direction_vectors(),
        scenario.amplitudes(),
        scenario.wavenumber,
        SINGULAR_COND_LIMIT,
    )
    if np.isnan(trace):
        raise SingularChannel(
            f"Gram condition number {cond:.3e} exceeds {SINGULAR_COND_LIMIT:.0e}"
        )
    return float(trace)


def zf_beamformer(scenario: Scenario, deployment, k: int) -> np.ndarray:
    """Unit-norm zero-forcing beamformer for user ``k``.

    Projects user k's conjugate channel onto the orthogonal complement of all
    other users' channels, then normalizes. For a single user this reduces to
    the matched filter.
    """
    state = channel_state(scenario, deployment)
    h_k = state.H[:, k]  # conjugate transpose of the channel row
    if scenario.num_users == 1:
        return h_k / np.linalg.norm(h_k)
    B = np.delete(state.H, k, axis=1)
    A = np.conj(B.T) @ B
    eigvals = np.linalg.eigvalsh(A)
    if eigvals[0] <= 0 or eigvals[-1] / eigvals[0] > SINGULAR_COND_LIMIT:
        raise SingularChannel("interfering channels are linearly dependent")
    w = h_k - B @ np.linalg.solve(A, np.conj(B.T) @ h_k)
    norm = np.linalg.norm(w)
    if norm < 1e-12 * np.linalg.norm(h_k):
        raise SingularChannel("channel lies in the interferers' span")
    return w / norm


def optimal_power(scenario: Scenario, deployment) -> np.ndarray:
    """Per-user transmit powers that equalize the post-ZF SINRs.

    Proportional to the diagonal of G^-1 and summing to the power budget.
    """
    state = channel_state(scenario, deployment)
    diag = np.real(np.diag(state.G_inv))
    return scenario.total_power * diag / diag.sum()


def common_sinr(scenario: Scenario, deployment) -> float:
    """The SINR shared by all users under ZF beamforming with the
    equal-SINR power split: total_power / (tr(G^-1) * noise_power)."""
    return scenario.snr_scale / trace_objective(scenario, deployment)


def achievable_rate(scenario: Scenario, deployment) -> float:
    """Common per-user rate log2(1 + common_sinr), in bits/s/Hz."""
    return float(np.log2(1.0 + common_sinr(scenario, deployment)))


def effective_throughput(scenario: Scenario, deployment, t_mov: float) -> float:
    """Bits/Hz delivered when ``t_mov`` seconds of the interval are spent
    repositioning: (interval - t_mov) * rate."""
    if not 0.0 <= t_mov <= scenario.interval:
        raise ValueError(f"t_mov must lie in [0, {scenario.interval}], got {t_mov}")
    remaining = scenario.interval - t_mov
    if remaining == 0.0:
        return 0.0
    return remaining * achievable_rate(scenario, deployment)
