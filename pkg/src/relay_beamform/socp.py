"""Real second-order-cone programs and the per-level beamforming feasibility problem.

A cone block ``(A, b)`` with ``k`` rows stands for

    || A[1:] @ x + b[1:] ||_2 <= A[0] @ x + b[0]

and a one-row block is a plain linear inequality. Problems maximize a linear
objective over the intersection of blocks and optional linear equalities.
Solving is delegated to CVXOPT's primal-dual interior-point cone solver.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum

import cvxopt
import numpy as np
from cvxopt import solvers

from .signal_model import ReceiverForms

log = logging.getLogger(__name__)


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"


class NotHermitianError(ValueError):
    pass


class FactorizationError(ArithmeticError):
    """A form that should be PSD could not be factored."""


@dataclass(frozen=True)
class ConeBlock:
    A: np.ndarray
    b: np.ndarray
    name: str = ""

    def margin(self, x: np.ndarray) -> float:
        v = self.A @ x + self.b
        return float(v[0] - np.linalg.norm(v[1:]))


@dataclass(frozen=True)
class ConeProblem:
    """maximize objective @ x over the cone blocks and ``A_eq @ x == b_eq``."""

    n: int
    objective: np.ndarray
    cones: tuple[ConeBlock, ...]
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None

    def __post_init__(self):
        obj = np.asarray(self.objective, dtype=float)
        if obj.shape != (self.n,):
            raise ValueError(f"objective must have length {self.n}")
        object.__setattr__(self, "objective", obj)
        for blk in self.cones:
            if blk.A.ndim != 2 or blk.A.shape[1] != self.n or blk.A.shape[0] < 1:
                raise ValueError(f"cone {blk.name!r}: A must be k x {self.n} with k >= 1")
            if blk.b.shape != (blk.A.shape[0],):
                raise ValueError(f"cone {blk.name!r}: b must have {blk.A.shape[0]} entries")
        if (self.A_eq is None) != (self.b_eq is None):
            raise ValueError("A_eq and b_eq must be given together")
        if self.A_eq is not None and (self.A_eq.ndim != 2 or self.A_eq.shape[1] != self.n
                                      or self.b_eq.shape != (self.A_eq.shape[0],)):
            raise ValueError("equality block has inconsistent dimensions")

    @property
    def names(self) -> list[str]:
        return [blk.name for blk in self.cones]

    def margins(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([blk.margin(x) for blk in self.cones])

    def to_json(self) -> str:
        """Debug dump for cross-checking against another conic solver."""
        doc = {
            "n": self.n,
            "objective": self.objective.tolist(),
            "cones": [{"name": blk.name, "A": blk.A.tolist(), "b": blk.b.tolist()}
                      for blk in self.cones],
        }
        if self.A_eq is not None:
            doc["A_eq"] = self.A_eq.tolist()
            doc["b_eq"] = self.b_eq.tolist()
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "ConeProblem":
        doc = json.loads(text)
        cones = tuple(ConeBlock(np.array(c["A"], dtype=float).reshape(-1, doc["n"]),
                                np.array(c["b"], dtype=float), c.get("name", ""))
                      for c in doc["cones"])
        A_eq = b_eq = None
        if "A_eq" in doc:
            A_eq = np.array(doc["A_eq"], dtype=float).reshape(-1, doc["n"])
            b_eq = np.array(doc["b_eq"], dtype=float)
        return cls(doc["n"], np.array(doc["objective"], dtype=float), cones, A_eq, b_eq)


@dataclass(frozen=True)
class ConeSolution:
    status: Status
    x: np.ndarray | None
    slack: float  # attained objective value
    iterations: int
    residuals: tuple[float, float, float] = field(default=(np.nan, np.nan, np.nan))

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL


def solve(problem: ConeProblem, tol_feas: float = 1e-8, tol_gap: float = 1e-8,
          max_iter: int = 200) -> ConeSolution:
    lin = [blk for blk in problem.cones if blk.A.shape[0] == 1]
    soc = [blk for blk in problem.cones if blk.A.shape[0] > 1]
    # s = A x + b must lie in the cone, i.e. G = -A, h = b
    blocks = lin + soc
    if blocks:
        G = -np.vstack([blk.A for blk in blocks])
        h = np.concatenate([blk.b for blk in blocks])
    else:
        G = np.zeros((0, problem.n))
        h = np.zeros(0)
    dims = {"l": len(lin), "q": [blk.A.shape[0] for blk in soc], "s": []}
    args = [cvxopt.matrix(-problem.objective), cvxopt.matrix(G), cvxopt.matrix(h), dims]
    if problem.A_eq is not None and problem.A_eq.shape[0]:
        args += [cvxopt.matrix(problem.A_eq), cvxopt.matrix(problem.b_eq)]
    opts = {"show_progress": False, "maxiters": int(max_iter),
            "feastol": tol_feas, "abstol": tol_gap, "reltol": tol_gap}
    try:
        res = solvers.conelp(*args, options=opts)
    except (ValueError, ArithmeticError) as exc:
        log.debug("cone solver raised: %s", exc)
        return ConeSolution(Status.NUMERICAL_FAILURE, None, np.nan, 0)

    iters = int(res.get("iterations", 0))
    resid = (float(res.get("primal infeasibility") or np.nan),
             float(res.get("dual infeasibility") or np.nan),
             float(res.get("gap") or np.nan))
    x = None if res["x"] is None else np.array(res["x"]).ravel()
    st = res["status"]
    if st == "optimal":
        status = Status.OPTIMAL
    elif st == "primal infeasible":
        status = Status.INFEASIBLE
        x = None
    elif st == "dual infeasible":
        status = Status.UNBOUNDED
        x = None
    elif iters >= max_iter:
        status = Status.MAX_ITERATIONS
    else:
        status = Status.NUMERICAL_FAILURE
    slack = float(problem.objective @ x) if x is not None else np.nan
    return ConeSolution(status, x, slack, iters, resid)


# -- complex to real embedding -------------------------------------------------

def lift_vector(w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    return np.concatenate([w.real, w.imag])


def unlift_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    R = x.shape[0] // 2
    return x[:R] + 1j * x[R:2 * R]


def lift_form(Q, rtol: float = 1e-12) -> np.ndarray:
    """Real symmetric 2R x 2R matrix with ``x^T Qr x == w^H Q w``."""
    Q = np.asarray(Q, dtype=complex)
    scale = max(np.max(np.abs(Q), initial=0.0), np.finfo(float).tiny)
    if np.max(np.abs(Q - Q.conj().T), initial=0.0) > rtol * scale:
        raise NotHermitianError("form is not Hermitian within tolerance")
    A, B = Q.real, Q.imag
    return np.block([[A, -B], [B, A]])


def lift_functional(f) -> np.ndarray:
    """Two rows mapping ``[Re w; Im w]`` to ``Re(f @ w)`` and ``Im(f @ w)``."""
    f = np.asarray(f, dtype=complex)
    return np.array([np.concatenate([f.real, -f.imag]),
                     np.concatenate([f.imag, f.real])])


def psd_factor(Q: np.ndarray, jitter: float = 1e-12) -> np.ndarray:
    """Return ``L`` with ``L.T @ L ~= Q`` for a real symmetric PSD ``Q``.

    Tries a plain Cholesky first, then one retry with ``jitter`` times the
    largest diagonal entry added on the diagonal.
    """
    Q = 0.5 * (Q + Q.T)
    try:
        return np.linalg.cholesky(Q).T
    except np.linalg.LinAlgError:
        pass
    eps = jitter * max(float(np.max(np.diag(Q), initial=0.0)), 1.0)
    try:
        return np.linalg.cholesky(Q + eps * np.eye(Q.shape[0])).T
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("form is indefinite beyond jitter tolerance") from exc


# -- beamforming feasibility at a fixed SINR level ---------------------------

@dataclass(frozen=True)
class _Factors:
    L_in: tuple[np.ndarray, ...]
    L_pu: np.ndarray
    sig_rows: np.ndarray  # (N, 2, 2R): Re and Im of f_j @ w


def factor_forms(forms: ReceiverForms) -> _Factors:
    """Square-root factors that do not depend on the SINR level."""
    L_in = tuple(psd_factor(lift_form(Q)) for Q in forms.Q_in)
    L_pu = psd_factor(lift_form(forms.D_pu))
    sig_rows = np.stack([lift_functional(f) for f in forms.f])
    return _Factors(L_in, L_pu, sig_rows)


def build_feasibility(forms: ReceiverForms, rho: float, I_p: float, P_t: float,
                      anchor: int | None = 0, factors: _Factors | None = None) -> ConeProblem:
    """Max-slack cone problem at amplitude level ``rho`` (SINR level ``rho**2``).

    Variables are ``x = [Re w; Im w; t]``; ``t`` is maximized. For every
    receiver ``j``::

        sqrt(P_s) Re(f_j @ w) - t >= rho * || [L_j x~; sqrt(c_j)] ||

    plus the PU-RX cap ``sqrt(I_p) - t >= ||L_pu x~||`` and the power budget
    ``sqrt(P_t) - t >= ||x~||``. The level is attainable iff ``t* >= 0``.
    Using ``Re`` instead of ``|.|`` is exact for one receiver and a convex
    restriction otherwise. ``anchor`` pins ``Im(f_anchor @ w) = 0``; pass
    ``None`` to leave the global phase free.
    """
    if rho < 0:
        raise ValueError("rho must be non-negative")
    fac = factors if factors is not None else factor_forms(forms)
    R = forms.n_relays
    n = 2 * R + 1
    t_col = np.zeros((1, n))
    t_col[0, -1] = 1.0
    pad = lambda M: np.hstack([M, np.zeros((M.shape[0], 1))])  # noqa: E731

    cones = []
    sqrt_ps = np.sqrt(forms.P_s)
    for j in range(forms.n_receivers):
        head = sqrt_ps * pad(fac.sig_rows[j][:1]) - t_col
        A = np.vstack([head, rho * pad(fac.L_in[j]), np.zeros((1, n))])
        b = np.zeros(A.shape[0])
        b[-1] = rho * np.sqrt(forms.c[j])
        cones.append(ConeBlock(A, b, f"sinr[{j}]"))

    A = np.vstack([-t_col, pad(fac.L_pu)])
    b = np.zeros(A.shape[0])
    b[0] = np.sqrt(I_p)
    cones.append(ConeBlock(A, b, "pu_cap"))

    A = np.vstack([-t_col, pad(np.eye(2 * R))])
    b = np.zeros(A.shape[0])
    b[0] = np.sqrt(P_t)
    cones.append(ConeBlock(A, b, "power"))

    A_eq = b_eq = None
    if anchor is not None:
        row = fac.sig_rows[anchor][1]
        if np.any(row != 0):
            A_eq = pad(row[None, :])
            b_eq = np.zeros(1)
    obj = np.zeros(n)
    obj[-1] = 1.0
    return ConeProblem(n, obj, tuple(cones), A_eq, b_eq)
