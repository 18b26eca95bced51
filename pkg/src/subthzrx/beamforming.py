"""Hardware-constrained analog precoder/combiner design and MMSE combining.

Analog weights are realized by phase shifters, so every nonzero entry of the
transmit precoder and (for the hybrid layouts) the receive combiner must have
unit magnitude; the sub-array combiner and the per-user precoder additionally
carry block-diagonal support. Within those constraints the design is:

1. a deterministic initializer that phase-aligns each column with the
   dominant eigenvector of the relevant wideband covariance, and
2. an optional coordinate-ascent refinement that sweeps the free phases over
   a fixed 64-point grid, keeping any move that increases a wideband log-det
   sum-rate surrogate (so the surrogate never decreases).

The digital combiner is the per-subcarrier MMSE solution on the effective
channel seen behind the analog stages. Each user's phased array radiates
total power 1/U regardless of its element count, i.e. the unit-modulus
precoder columns act through a 1/sqrt(N_U) power split; the same scaling is
used everywhere the effective channel appears.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .config import Architecture, ReceiverConfig

PHASE_GRID_SIZE = 64
UNIT_MODULUS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CombinerSet:
    """Analog TX precoder, analog RX combiner, per-subcarrier digital combiner.

    Shapes: ``v_rf`` is (U*N_U, U) block diagonal, ``w_rf`` is (N_BS, N_RF),
    ``w_d`` is (K, N_RF, U).
    """

    v_rf: np.ndarray
    w_rf: np.ndarray
    w_d: np.ndarray


def tx_power_scale(n_tx_per_user: int) -> float:
    """Per-element amplitude scale so each user's array radiates power 1/U
    for unit-power streams, independent of its element count."""
    return 1.0 / math.sqrt(n_tx_per_user)


def effective_channel(channel: ChannelRealization, w_rf: np.ndarray, v_rf: np.ndarray) -> np.ndarray:
    """Per-subcarrier channel behind both analog stages: W^H H[k] V scaled by
    the transmit power split. Shape (K, N_RF, U)."""
    scale = tx_power_scale(channel.n_tx_per_user)
    return scale * (w_rf.conj().T @ channel.h @ v_rf)


def _phase_align(vec: np.ndarray) -> np.ndarray:
    """Unit-modulus vector with the phases of ``vec``, rotated so the first
    entry is exactly 1 (resolves the eigenvector's global-phase ambiguity)."""
    phases = np.angle(vec) - np.angle(vec[0])
    return np.exp(1j * phases)


def _dominant_eigvecs(matrix: np.ndarray, count: int) -> np.ndarray:
    """Leading ``count`` eigenvectors of a Hermitian matrix, as columns in
    descending eigenvalue order."""
    hermitized = 0.5 * (matrix + matrix.conj().T)
    _, vecs = np.linalg.eigh(hermitized)
    return vecs[:, : -count - 1 : -1]


def design_tx_precoder(channel: ChannelRealization, cfg: ReceiverConfig) -> np.ndarray:
    """Block-diagonal unit-modulus precoder, one column per user.

    Each user's column takes the element-wise phases of the dominant
    eigenvector of its wideband transmit covariance (1/K) sum_k H_u^H H_u,
    which phase-aligns the array with its strongest propagation mode. An
    all-zero channel degenerates to the zero-phase (all-ones) column.
    """
    _check_channel(channel, cfg)
    n_u, users = cfg.n_u, cfg.users
    v_rf = np.zeros((users * n_u, users), dtype=np.complex128)
    for u in range(users):
        h_u = channel.user_channel(u)
        cov = np.einsum("kru,krv->uv", h_u.conj(), h_u) / channel.subcarriers
        if not np.any(cov):
            column = np.ones(n_u, dtype=np.complex128)
        else:
            column = _phase_align(_dominant_eigvecs(cov, 1)[:, 0])
        start, stop = channel.user_slices[u]
        v_rf[start:stop, u] = column
    return v_rf


def design_analog_combiner(channel: ChannelRealization, cfg: ReceiverConfig) -> np.ndarray:
    """Architecture-constrained analog combiner initializer.

    Digital array: identity (combining is fully digital). Fully connected:
    column j phase-aligns with the j-th dominant eigenvector of the wideband
    receive covariance R = (1/K) sum_k H[k] H[k]^H. Sub-array: each chain's
    block phase-aligns with the dominant eigenvector of its diagonal block
    of R.
    """
    _check_channel(channel, cfg)
    n_bs, n_rf = cfg.n_bs, cfg.rf_chains
    if cfg.architecture is Architecture.DIGITAL:
        return np.eye(n_bs, dtype=np.complex128)

    cov = np.zeros((n_bs, n_bs), dtype=np.complex128)
    for k in range(channel.subcarriers):
        h_k = channel.h[k]
        cov += h_k @ h_k.conj().T
    cov /= channel.subcarriers

    w_rf = np.zeros((n_bs, n_rf), dtype=np.complex128)
    if cfg.architecture is Architecture.FULLY_CONNECTED:
        vecs = _dominant_eigvecs(cov, n_rf)
        for j in range(n_rf):
            w_rf[:, j] = _phase_align(vecs[:, j])
        return w_rf

    block = n_bs // n_rf
    for m in range(n_rf):
        rows = slice(m * block, (m + 1) * block)
        w_rf[rows, m] = _phase_align(_dominant_eigvecs(cov[rows, rows], 1)[:, 0])
    return w_rf


def _free_entries(cfg: ReceiverConfig) -> list[tuple[int, int]]:
    """Adjustable (row, column) positions of the analog combiner."""
    if cfg.architecture is Architecture.DIGITAL:
        return []
    if cfg.architecture is Architecture.SUBARRAY:
        block = cfg.n_bs // cfg.rf_chains
        return [(m * block + r, m) for m in range(cfg.rf_chains) for r in range(block)]
    return [(i, j) for j in range(cfg.rf_chains) for i in range(cfg.n_bs)]


def surrogate_sum_rate(channel: ChannelRealization, w_rf: np.ndarray, v_rf: np.ndarray,
                       snr: float, users: int) -> float:
    """Wideband sum-rate surrogate maximized by the refinement:

        J = sum_k log2 det(I_U + (snr/U) Heff[k]^H (W^H W)^{-1} Heff[k])

    with Heff the effective channel behind both analog stages. Accounts for
    the noise coloring the analog combiner introduces.
    """
    heff = effective_channel(channel, w_rf, v_rf)
    gram = w_rf.conj().T @ w_rf
    k_count, n_rf, users_dim = heff.shape
    flat = heff.transpose(1, 0, 2).reshape(n_rf, k_count * users_dim)
    whitened = np.linalg.solve(gram, flat).reshape(n_rf, k_count, users_dim).transpose(1, 0, 2)
    inner = heff.conj().swapaxes(-1, -2) @ whitened   # (K, U, U)
    eye = np.eye(inner.shape[-1])
    sign, logdet = np.linalg.slogdet(eye + (snr / users) * inner)
    if not np.all(np.isfinite(logdet)) or np.any(sign.real <= 0):
        raise np.linalg.LinAlgError("surrogate objective is not positive definite (rank-deficient W_RF?)")
    return float(np.sum(logdet) / math.log(2))


def refine_analog_combiner(w_rf: np.ndarray, channel: ChannelRealization, cfg: ReceiverConfig,
                           v_rf: np.ndarray | None = None, max_sweeps: int = 3,
                           tol: float = 1e-3) -> tuple[np.ndarray, list[float]]:
    """Coordinate-ascent phase refinement of the analog combiner.

    Cycles over the free entries of ``w_rf``; each entry is set to the best
    of 64 grid phases under the surrogate objective, keeping the current
    value unless a grid candidate strictly improves it. Stops after a full
    sweep improves the surrogate by less than ``tol`` (relative) or after
    ``max_sweeps`` sweeps.

    Returns the refined matrix and the surrogate value history (initial
    value followed by one entry per completed sweep); the history is
    non-decreasing by construction. ``max_sweeps=0`` or an architecture with
    no free phases returns the input unchanged.
    """
    _check_channel(channel, cfg)
    if v_rf is None:
        v_rf = design_tx_precoder(channel, cfg)
    entries = _free_entries(cfg)
    initial = surrogate_sum_rate(channel, w_rf, v_rf, cfg.per_antenna_snr, cfg.users)
    if max_sweeps == 0 or not entries or cfg.per_antenna_snr == 0:
        return w_rf.copy(), [initial]

    w = w_rf.copy()
    rho_over_u = cfg.per_antenna_snr / cfg.users
    ht = tx_power_scale(channel.n_tx_per_user) * (channel.h @ v_rf)  # (K, N_BS, U)
    heff = np.einsum("ij,kiu->kju", w.conj(), ht)                    # (K, N_RF, U)
    gram = w.conj().T @ w
    s_mats = gram[None] + rho_over_u * (heff @ heff.conj().swapaxes(-1, -2))
    j_current = _surrogate_from_state(s_mats, gram)
    history = [j_current]

    candidates = np.exp(2j * np.pi * np.arange(PHASE_GRID_SIZE) / PHASE_GRID_SIZE)
    k_count = channel.subcarriers
    for _ in range(max_sweeps):
        for i, j in entries:
            deltas = candidates - w[i, j]                                  # (P,)
            row_new = heff[:, j, :][None] + deltas.conj()[:, None, None] * ht[:, i, :][None]  # (P, K, U)

            gcol = gram[:, j][None] + deltas[:, None] * w[i, :].conj()[None]  # (P, N_RF)
            gcol[:, j] = gram[j, j]
            cross = rho_over_u * np.einsum("kmu,pku->pkm", heff, row_new.conj())
            s_col = gcol[:, None, :] + cross                               # (P, K, N_RF)
            s_col[:, :, j] = gram[j, j].real + rho_over_u * np.sum(np.abs(row_new) ** 2, axis=2)

            s_cand = np.broadcast_to(s_mats, (PHASE_GRID_SIZE,) + s_mats.shape).copy()
            s_cand[:, :, :, j] = s_col
            s_cand[:, :, j, :] = s_col.conj()
            s_cand[:, :, j, j] = s_col[:, :, j].real
            g_cand = np.broadcast_to(gram, (PHASE_GRID_SIZE,) + gram.shape).copy()
            g_cand[:, :, j] = gcol
            g_cand[:, j, :] = gcol.conj()
            g_cand[:, j, j] = gram[j, j].real

            sign_s, logdet_s = np.linalg.slogdet(s_cand)
            sign_g, logdet_g = np.linalg.slogdet(g_cand)
            j_cand = (np.sum(logdet_s, axis=1) - k_count * logdet_g) / math.log(2)
            j_cand = np.where(
                np.all(sign_s.real > 0, axis=1) & (sign_g.real > 0) & np.isfinite(j_cand),
                j_cand, -np.inf)

            best = int(np.argmax(j_cand))
            if j_cand[best] > j_current:
                w[i, j] = candidates[best]
                heff[:, j, :] = row_new[best]
                gram[:, j] = gcol[best]
                gram[j, :] = gcol[best].conj()
                s_mats[:, :, j] = s_col[best]
                s_mats[:, j, :] = s_col[best].conj()
                j_current = float(j_cand[best])
        improvement = j_current - history[-1]
        history.append(j_current)
        if improvement < tol * max(abs(history[-2]), 1e-30):
            break
    return w, history


def _surrogate_from_state(s_mats: np.ndarray, gram: np.ndarray) -> float:
    sign_s, logdet_s = np.linalg.slogdet(s_mats)
    sign_g, logdet_g = np.linalg.slogdet(gram)
    if np.any(sign_s.real <= 0) or sign_g.real <= 0:
        raise np.linalg.LinAlgError("surrogate state is not positive definite")
    return float((np.sum(logdet_s) - len(s_mats) * logdet_g) / math.log(2))


def mmse_digital_combiner(heff: np.ndarray, gram: np.ndarray, noise_power: float,
                          users: int) -> np.ndarray:
    """MMSE combiner for effective channel(s) ``heff`` (..., N_RF, U) with
    analog-combiner Gram matrix ``gram`` coloring the noise:

        W_D = (Heff Heff^H + noise_power * U * W^H W)^{-1} Heff
    """
    regularizer = noise_power * users * gram
    normal = heff @ heff.conj().swapaxes(-1, -2) + regularizer
    return np.linalg.solve(normal, heff)


def design_digital_combiner(channel: ChannelRealization, w_rf: np.ndarray, v_rf: np.ndarray,
                            cfg: ReceiverConfig) -> np.ndarray:
    """Per-subcarrier MMSE digital combiner, shape (K, N_RF, U).

    Noise enters at the antennas, so after the analog combiner its
    covariance is sigma^2 W_RF^H W_RF with sigma^2 = 1/snr for unit-power
    streams; that coloring is part of the regularizer.
    """
    _check_channel(channel, cfg)
    if cfg.per_antenna_snr <= 0:
        raise ValueError("per-antenna SNR must be positive for MMSE combining")
    heff = effective_channel(channel, w_rf, v_rf)
    gram = w_rf.conj().T @ w_rf
    return mmse_digital_combiner(heff, gram, 1.0 / cfg.per_antenna_snr, cfg.users)


def design_combiners(channel: ChannelRealization, cfg: ReceiverConfig,
                     refine_sweeps: int = 0, refine_tol: float = 1e-3) -> CombinerSet:
    """Full combiner design pipeline: precoder, analog combiner (optionally
    refined), then the per-subcarrier MMSE digital combiner."""
    v_rf = design_tx_precoder(channel, cfg)
    w_rf = design_analog_combiner(channel, cfg)
    if refine_sweeps > 0:
        w_rf, _ = refine_analog_combiner(w_rf, channel, cfg, v_rf=v_rf,
                                         max_sweeps=refine_sweeps, tol=refine_tol)
    w_d = design_digital_combiner(channel, w_rf, v_rf, cfg)
    return CombinerSet(v_rf=v_rf, w_rf=w_rf, w_d=w_d)


def check_hardware_constraints(combiners: CombinerSet, cfg: ReceiverConfig,
                               tol: float = UNIT_MODULUS_TOL) -> None:
    """Verify unit-modulus and support constraints; raise ValueError if broken."""
    n_bs, n_rf, users, n_u = cfg.n_bs, cfg.rf_chains, cfg.users, cfg.n_u
    v_rf, w_rf, w_d = combiners.v_rf, combiners.w_rf, combiners.w_d

    if v_rf.shape != (users * n_u, users):
        raise ValueError(f"v_rf shape {v_rf.shape}, expected {(users * n_u, users)}")
    v_mask = np.zeros_like(v_rf, dtype=bool)
    for u in range(users):
        v_mask[u * n_u:(u + 1) * n_u, u] = True
    if np.any(np.abs(v_rf[~v_mask]) > tol):
        raise ValueError("v_rf has support outside its per-user diagonal blocks")
    if np.any(np.abs(np.abs(v_rf[v_mask]) - 1) > tol):
        raise ValueError("v_rf block entries are not unit modulus")

    if w_rf.shape != (n_bs, n_rf):
        raise ValueError(f"w_rf shape {w_rf.shape}, expected {(n_bs, n_rf)}")
    if cfg.architecture is Architecture.DIGITAL:
        if np.any(np.abs(w_rf - np.eye(n_bs)) > tol):
            raise ValueError("digital-array w_rf must be the identity")
    else:
        if cfg.architecture is Architecture.SUBARRAY:
            block = n_bs // n_rf
            w_mask = np.zeros_like(w_rf, dtype=bool)
            for m in range(n_rf):
                w_mask[m * block:(m + 1) * block, m] = True
            if np.any(np.abs(w_rf[~w_mask]) > tol):
                raise ValueError("sub-array w_rf has support outside its diagonal blocks")
        else:
            w_mask = np.ones_like(w_rf, dtype=bool)
        if np.any(np.abs(np.abs(w_rf[w_mask]) - 1) > tol):
            raise ValueError("w_rf entries on the hardware support are not unit modulus")

    if w_d.shape[1:] != (n_rf, users):
        raise ValueError(f"w_d per-subcarrier shape {w_d.shape[1:]}, expected {(n_rf, users)}")
    if not np.all(np.isfinite(w_d)):
        raise ValueError("w_d contains non-finite entries")


def _check_channel(channel: ChannelRealization, cfg: ReceiverConfig) -> None:
    expected = (cfg.subcarriers, cfg.n_bs, cfg.users * cfg.n_u)
    if channel.h.shape != expected:
        raise ValueError(f"channel shape {channel.h.shape} does not match config {expected}")
