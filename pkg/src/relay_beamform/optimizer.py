"""Max-min SINR relay beamforming by bisection on the SINR level."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import socp
from .signal_model import ReceiverForms, pu_interference, sinr_all, total_power

log = logging.getLogger(__name__)

SOUND_RTOL = 1e-6


class BeamStatus(str, Enum):
    CONVERGED = "Converged"
    INFEASIBLE_AT_ZERO = "InfeasibleAtZero"
    SOLVER_FAILURE = "SolverFailure"


@dataclass(frozen=True)
class SolverSettings:
    tol_gamma_rel: float = 1e-4
    max_bisection: int = 64
    tol_feas: float = 1e-8
    tol_gap: float = 1e-8
    max_iter: int = 200
    anchor: int | None = None  # receiver whose effective channel fixes the global phase

    def __post_init__(self):
        if not self.tol_gamma_rel > 0:
            raise ValueError("tol_gamma_rel must be positive")
        if self.max_bisection < 1:
            raise ValueError("max_bisection must be >= 1")


@dataclass
class BeamSolution:
    w: np.ndarray
    gamma_star: float  # min_j SINR_j(w)
    sinr_per_rx: np.ndarray
    pu_interference: float
    total_power: float
    bracket: tuple[float, float]
    bisection_steps: int
    status: BeamStatus
    trace: list[tuple[float, float]] = field(default_factory=list)
    failed_gamma: float | None = None

    def is_sound(self, I_p: float, P_t: float, rtol: float = SOUND_RTOL) -> bool:
        """Constraint check of the returned weights against the final bracket."""
        lo = self.bracket[0]
        return bool(
            np.min(self.sinr_per_rx, initial=np.inf) >= lo * (1 - rtol)
            and self.pu_interference <= I_p * (1 + rtol)
            and self.total_power <= P_t * (1 + rtol))

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "gamma_star": self.gamma_star,
            "gamma_star_db": _db(self.gamma_star),
            "w_re": self.w.real.tolist(),
            "w_im": self.w.imag.tolist(),
            "sinr_per_rx": self.sinr_per_rx.tolist(),
            "pu_interference": self.pu_interference,
            "total_power": self.total_power,
            "bracket": list(self.bracket),
            "bisection_steps": self.bisection_steps,
            "failed_gamma": self.failed_gamma,
        }


def _db(x: float) -> float | None:
    return float(10 * np.log10(x)) if x > 0 else None


def upper_bound_gamma(forms: ReceiverForms, P_t: float) -> float:
    """Interference-free, power-capped SINR bound: min_j lambda_max(Q_sig[j]) P_t / c_j.

    ``Q_sig`` already carries the transmit power ``P_s``.
    """
    lam = np.array([np.linalg.eigvalsh(Q)[-1] for Q in forms.Q_sig])
    return float(np.min(np.maximum(lam, 0.0) * P_t / forms.c))


def power_limited_bound(forms: ReceiverForms, P_t: float) -> float:
    """Tighter bound keeping each receiver's own interference but dropping the PU cap.

    At full power ``||w||^2 = P_t`` the noise term equals ``w^H (c/P_t) I w``, so
    the best single-receiver SINR is ``P_s f^H (Q_in + c/P_t I)^{-1} f``
    (with ``f`` conjugated to match the form convention).
    """
    R = forms.n_relays
    vals = []
    for j in range(forms.n_receivers):
        K = forms.Q_in[j] + (forms.c[j] / P_t) * np.eye(R)
        a = np.conj(forms.f[j])
        vals.append(forms.P_s * np.real(np.vdot(a, np.linalg.solve(K, a))))
    return float(max(min(vals), 0.0))


def restricted_level(w: np.ndarray, forms: ReceiverForms) -> float:
    """Largest level at which ``w`` satisfies every Re-restricted SINR cone."""
    amp = np.sqrt(forms.P_s) * np.maximum((forms.f @ w).real, 0.0)
    den = np.real(np.einsum("r,jrs,s->j", np.conj(w), forms.Q_in, w)) + forms.c
    return float(np.min(amp**2 / den))


def _solution(w, forms, lo, hi, steps, status, trace, failed=None) -> BeamSolution:
    s = sinr_all(w, forms)
    return BeamSolution(
        w=w, gamma_star=float(np.min(s)), sinr_per_rx=s,
        pu_interference=pu_interference(w, forms), total_power=total_power(w),
        bracket=(lo, hi), bisection_steps=steps, status=status, trace=trace,
        failed_gamma=failed)


def maximize_min_sinr(forms: ReceiverForms, I_p: float, P_t: float,
                      settings: SolverSettings | None = None) -> BeamSolution:
    """Bisection on the worst-case SINR level.

    Each step solves the max-slack cone problem at amplitude ``sqrt(gamma)``.
    A step with ``t* >= 0`` whose weights pass a direct constraint check
    raises the lower end to the level those weights certify; otherwise the
    upper end drops to the midpoint. Zero weights make ``gamma = 0`` always
    attainable, so the bracket never empties.
    """
    settings = settings or SolverSettings()
    R = forms.n_relays
    w_best = np.zeros(R, dtype=complex)
    lo = 0.0
    hi = min(upper_bound_gamma(forms, P_t), power_limited_bound(forms, P_t))
    trace = [(lo, hi)]
    if hi <= 0:
        return _solution(w_best, forms, 0.0, 0.0, 0, BeamStatus.CONVERGED, trace)

    factors = socp.factor_forms(forms)
    steps = 0
    while steps < settings.max_bisection and hi - lo > settings.tol_gamma_rel * max(hi, 1e-12):
        mid = 0.5 * (lo + hi)
        prob = socp.build_feasibility(forms, np.sqrt(mid), I_p, P_t,
                                      anchor=settings.anchor, factors=factors)
        sol = socp.solve(prob, settings.tol_feas, settings.tol_gap, settings.max_iter)
        steps += 1
        if not sol.ok:
            log.warning("cone solver returned %s at gamma=%.6g", sol.status.value, mid)
            return _solution(w_best, forms, lo, hi, steps, BeamStatus.SOLVER_FAILURE,
                             trace, failed=mid)
        w = socp.unlift_vector(sol.x[:-1])
        feasible = (
            sol.slack >= 0
            and np.min(sinr_all(w, forms)) >= mid * (1 - SOUND_RTOL)
            and pu_interference(w, forms) <= I_p * (1 + SOUND_RTOL)
            and total_power(w) <= P_t * (1 + SOUND_RTOL))
        if feasible:
            w_best = w
            lo = max(mid, min(restricted_level(w, forms), hi))
        else:
            if sol.slack >= 0:
                log.debug("t*=%.3g at gamma=%.6g failed the direct check", sol.slack, mid)
            hi = mid
        trace.append((lo, hi))
        log.debug("step %d: gamma in [%.6g, %.6g], t*=%.3g", steps, lo, hi, sol.slack)
    return _solution(w_best, forms, lo, hi, steps, BeamStatus.CONVERGED, trace)


def grid_oracle(forms: ReceiverForms, I_p: float, P_t: float, n_samples: int = 10**6,
                seed: int = 0, chunk: int = 100_000) -> tuple[float, np.ndarray]:
    """Random-search lower bound on the max-min SINR for tiny relay counts.

    Directions are drawn uniformly on the complex unit sphere. Along a ray
    every SINR grows with the radius, so each direction is evaluated at the
    largest radius allowed by both the power budget and the PU cap.
    """
    R = forms.n_relays
    if R > 3:
        raise ValueError(f"grid oracle is limited to R <= 3 relays, got R={R}")
    rng = np.random.default_rng(seed)
    best = -1.0
    w_best = np.zeros(R, dtype=complex)
    done = 0
    while done < n_samples:
        B = min(chunk, n_samples - done)
        u = rng.standard_normal((B, R)) + 1j * rng.standard_normal((B, R))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        uc = np.conj(u)
        sig = np.real(np.einsum("br,jrs,bs->bj", uc, forms.Q_sig, u))
        inn = np.real(np.einsum("br,jrs,bs->bj", uc, forms.Q_in, u))
        pu = np.real(np.einsum("br,rs,bs->b", uc, forms.D_pu, u))
        with np.errstate(divide="ignore"):
            a = np.minimum(P_t, np.where(pu > 0, I_p / pu, np.inf))
        g = np.min(a[:, None] * sig / (a[:, None] * inn + forms.c), axis=1)
        k = int(np.argmax(g))
        if g[k] > best:
            best = float(g[k])
            w_best = np.sqrt(a[k]) * u[k]
        done += B
    return max(best, 0.0), w_best
