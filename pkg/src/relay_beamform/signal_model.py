"""Amplify-and-forward signal model.

Relay ``r`` forwards ``w[r] * y[r] / d[r]`` where ``y[r]`` is what it received
in the first phase and ``d[r]`` normalizes its average received power. All
quadratic forms below are written directly in the raw weights ``w``, so that
``w.conj() @ Q @ w`` is a power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ChannelSet, ScenarioConfig


@dataclass(frozen=True)
class NormalizedModel:
    d: np.ndarray  # (R,) AF normalization, sqrt of mean relay receive power
    F: np.ndarray  # (N, M, R) SU-TX m -> SU-RX j through relay r, per unit weight
    u: np.ndarray  # (N, R) PU-TX -> SU-RX j through relay r
    gtilde_p: np.ndarray  # (R,) relay r -> PU-RX, normalized
    Sigma_n: np.ndarray  # (R,) relay noise pass-through gain sigma_n^2 / d_r^2
    H: np.ndarray  # (R, M) raw SU-TX -> relay channels
    Hhat: np.ndarray  # (N, R) raw relay -> SU-RX channels


@dataclass(frozen=True)
class ReceiverForms:
    """Hermitian quadratic forms of every secondary receiver and of the PU-RX.

    Arrays are stacked along the first axis by receiver. ``f[j]`` is the
    desired effective channel of receiver ``j``, so the desired signal power is
    ``P_s * |f[j] @ w|**2 == w^H Q_sig[j] w``.
    """

    Q_sig: np.ndarray  # (N, R, R)
    Q_ip: np.ndarray  # (N, R, R)
    Q_is: np.ndarray  # (N, R, R)
    Q_n: np.ndarray  # (N, R, R), diagonal
    c: np.ndarray  # (N,)
    D_pu: np.ndarray  # (R, R)
    f: np.ndarray  # (N, R)
    P_s: float

    @property
    def n_relays(self) -> int:
        return self.D_pu.shape[0]

    @property
    def n_receivers(self) -> int:
        return self.c.shape[0]

    @property
    def Q_in(self) -> np.ndarray:
        """Interference-plus-forwarded-noise forms, (N, R, R)."""
        return self.Q_ip + self.Q_is + self.Q_n


def build_normalized(config: ScenarioConfig, channels: ChannelSet) -> NormalizedModel:
    H, g, Hhat, ghat = channels.H, channels.g, channels.Hhat, channels.ghat
    P_p, P_s, s2 = config.P_p, config.P_s, config.sigma_n2
    d = np.sqrt(P_p * np.abs(g) ** 2 + P_s * np.sum(np.abs(H) ** 2, axis=1) + s2)
    F = np.einsum("jr,rm->jmr", Hhat, H) / d
    u = Hhat * g / d
    return NormalizedModel(d=d, F=F, u=u, gtilde_p=ghat / d, Sigma_n=s2 / d**2, H=H, Hhat=Hhat)


def _outer(v: np.ndarray) -> np.ndarray:
    """conj(v) v^T, batched over leading axes."""
    return np.conj(v)[..., :, None] * v[..., None, :]


def _diag(v: np.ndarray) -> np.ndarray:
    R = v.shape[-1]
    out = np.zeros(v.shape + (R,), dtype=complex)
    out[..., np.arange(R), np.arange(R)] = v
    return out


def build_forms(config: ScenarioConfig, model: NormalizedModel) -> ReceiverForms:
    N, M, R = model.F.shape
    if N != M:
        raise ValueError(f"receivers and transmitters must pair up, got N={N}, M={M}")
    if model.u.shape != (N, R) or model.d.shape != (R,) or model.Hhat.shape != (N, R):
        raise ValueError("normalized model has inconsistent dimensions")
    P_p, P_s, s2 = config.P_p, config.P_s, config.sigma_n2

    idx = np.arange(N)
    f = model.F[idx, idx]
    per_source = _outer(model.F)  # (N, M, R, R)
    Q_sig = P_s * per_source[idx, idx]
    Q_is = P_s * (per_source.sum(axis=1) - per_source[idx, idx])
    Q_ip = P_p * _outer(model.u)
    Q_n = _diag(np.abs(model.Hhat) ** 2 * model.Sigma_n)

    v = model.gtilde_p[:, None] * model.H  # (R, M), column m is v_m
    D_pu = P_s * _outer(v.T).sum(axis=0) + _diag(np.abs(model.gtilde_p) ** 2 * s2)
    return ReceiverForms(
        Q_sig=Q_sig, Q_ip=Q_ip, Q_is=Q_is, Q_n=Q_n,
        c=np.full(N, float(s2)), D_pu=D_pu, f=f, P_s=float(P_s))


def forms_for(config: ScenarioConfig, channels: ChannelSet) -> ReceiverForms:
    """Shortcut: normalize, then build the receiver forms."""
    channels.check(config)
    return build_forms(config, build_normalized(config, channels))


def _quad(w: np.ndarray, Q: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("r,...rs,s->...", np.conj(w), Q, w))


def sinr(w, forms: ReceiverForms, j: int) -> float:
    """SINR of secondary receiver ``j`` under weights ``w``."""
    w = np.asarray(w, dtype=complex)
    if not 0 <= j < forms.n_receivers:
        raise IndexError(f"receiver index {j} out of range")
    s = _quad(w, forms.Q_sig[j])
    den = _quad(w, forms.Q_in[j]) + forms.c[j]
    return float(max(s, 0.0) / den)


def sinr_all(w, forms: ReceiverForms) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    s = np.maximum(_quad(w, forms.Q_sig), 0.0)
    return s / (_quad(w, forms.Q_in) + forms.c)


def pu_interference(w, forms: ReceiverForms) -> float:
    """SU-originated power (signal plus forwarded relay noise) at the PU-RX."""
    w = np.asarray(w, dtype=complex)
    return float(max(_quad(w, forms.D_pu), 0.0))


def total_power(w) -> float:
    w = np.asarray(w, dtype=complex)
    return float(np.real(np.vdot(w, w)))


@dataclass(frozen=True)
class EmpiricalPowers:
    """Monte-Carlo power estimates with standard errors of the means.

    ``S``, ``I``, ``N`` are per secondary receiver: desired signal, PU plus
    cross-SU interference, and forwarded relay noise plus receiver noise.
    """

    S: np.ndarray
    I: np.ndarray
    N: np.ndarray
    pu: float
    S_se: np.ndarray
    I_se: np.ndarray
    N_se: np.ndarray
    pu_se: float
    n_samples: int

    @property
    def sinr(self) -> np.ndarray:
        return self.S / (self.I + self.N)


_QPSK = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)


def empirical_powers(w, config: ScenarioConfig, channels: ChannelSet, n_samples: int,
                     seed: int, chunk: int = 65536) -> EmpiricalPowers:
    """Simulate both transmission phases and average the received powers.

    Symbols are unit-power QPSK; relay and receiver noises are CN(0, sigma_n2).
    Each received signal is split by origin (PU-TX, desired SU-TX, other
    SU-TXs, noise) and the squared magnitudes averaged over ``n_samples``
    independent channel uses. Samples are drawn in fixed-size chunks from one
    generator, so the result depends only on ``seed``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    channels.check(config)
    w = np.asarray(w, dtype=complex)
    H, g, Hhat, ghat = channels.H, channels.g, channels.Hhat, channels.ghat
    R, M, N = channels.shape
    if w.shape != (R,):
        raise ValueError(f"weight vector must have length {R}")
    P_p, P_s, s2 = config.P_p, config.P_s, config.sigma_n2
    d = np.sqrt(P_p * np.abs(g) ** 2 + P_s * np.sum(np.abs(H) ** 2, axis=1) + s2)
    gain = w / d  # relay r forwards gain[r] * y[r]
    rng = np.random.default_rng(seed)

    # accumulators: sums and sums of squares of |component|^2
    acc = {k: np.zeros(N) for k in ("S", "I", "N")}
    acc2 = {k: np.zeros(N) for k in ("S", "I", "N")}
    pu_sum = pu_sum2 = 0.0
    done = 0
    while done < n_samples:
        B = min(chunk, n_samples - done)
        xp = _QPSK[rng.integers(0, 4, size=B)]
        xs = _QPSK[rng.integers(0, 4, size=(B, M))]
        nr = np.sqrt(s2 / 2) * (rng.standard_normal((B, R)) + 1j * rng.standard_normal((B, R)))
        nj = np.sqrt(s2 / 2) * (rng.standard_normal((B, N)) + 1j * rng.standard_normal((B, N)))

        # first phase, split by origin
        y_p = np.sqrt(P_p) * xp[:, None] * g  # (B, R)
        y_s = np.sqrt(P_s) * xs[:, None, :] * H  # (B, R, M), per source
        # second phase: relay r transmits gain[r] * y[r]
        t_p = y_p * gain
        t_s = y_s * gain[:, None]
        t_n = nr * gain
        rx_p = t_p @ Hhat.T  # (B, N)
        rx_s = np.einsum("brm,jr->bjm", t_s, Hhat)  # (B, N, M)
        rx_n = t_n @ Hhat.T + nj

        desired = rx_s[:, np.arange(N), np.arange(N)]
        cross = rx_s.sum(axis=2) - desired
        comps = {"S": desired, "I": rx_p + cross, "N": rx_n}
        for k, v in comps.items():
            p = np.abs(v) ** 2
            acc[k] += p.sum(axis=0)
            acc2[k] += (p**2).sum(axis=0)

        at_pu = (t_s.sum(axis=2) + t_n) @ ghat  # (B,)
        p = np.abs(at_pu) ** 2
        pu_sum += p.sum()
        pu_sum2 += (p**2).sum()
        done += B

    def mean_se(s, s2_):
        m = s / n_samples
        var = np.maximum(s2_ / n_samples - m**2, 0.0)
        se = np.sqrt(var / max(n_samples - 1, 1))
        return m, se

    S, S_se = mean_se(acc["S"], acc2["S"])
    I, I_se = mean_se(acc["I"], acc2["I"])
    Nn, N_se = mean_se(acc["N"], acc2["N"])
    pu, pu_se = mean_se(pu_sum, pu_sum2)
    return EmpiricalPowers(S=S, I=I, N=Nn, pu=float(pu), S_se=S_se, I_se=I_se, N_se=N_se,
                           pu_se=float(pu_se), n_samples=n_samples)
