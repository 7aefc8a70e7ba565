"""Scaling-law fit and extrapolation of normalized log-determinants.

Given prefix log-determinants ``ell[q-1]`` for leading q-by-q submatrices of
a Gram matrix built from datapoints with d outputs each, the normalized
sequence is ``L_j = ell[j*d - 1] / j``.  Over a window j in [n0, ns] this is
fitted by linear regression,

    y_j = c0 * x_{j,0} + sum_i nu_{i-1} * x_{j,i} + eps,

with y_j = n_j (n_j - 1)^{-1/2} (L_{n_j} - L_{n0}), x_{j,0} = (n_j - 1)^{1/2}
and x_{j,i} = -(n_j - 1)^{-1/2} n_j^{-i+1} * lgamma(n_j + 1), where the
log-gamma term evaluates log(n_j!).  Extrapolation then follows

    L_hat(n) = L_{n0} + c0 (1 - 1/n) - sum_i nu_{i-1} n^{-i} lgamma(n + 1),

and ell_hat(n) = n * L_hat(n).  The residual scale sigma_hat yields normal
prediction intervals on ell_hat of half-width z * sigma_hat * sqrt(n - 1).

The q extra coefficients correct the decay exponent non-asymptotically
(nu(n) = nu_0 + sum nu_i n^-i); small q (<= 10) is typically enough.  A
burn-in n0 > 1 discards early, erratic prefix entries; ``select_burn_in``
grid-searches it by held-out tail error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln
from scipy.stats import norm

from .errors import ConditioningError

BURN_IN_GRID = (1, 50, 100, 200, 300, 500)


def extract_l(ell: np.ndarray, d: int, n0: int, ns: int) -> np.ndarray:
    """Normalized sequence L_j = ell_{j d} / j for j = n0..ns (inclusive)."""
    if d < 1 or n0 < 1 or ns < n0:
        raise ValueError(f"need d >= 1 and 1 <= n0 <= ns, got d={d}, n0={n0}, ns={ns}")
    if len(ell) < ns * d:
        raise ValueError(f"prefix has {len(ell)} entries, need at least {ns * d}")
    j = np.arange(n0, ns + 1)
    vals = np.asarray(ell, dtype=np.float64)[j * d - 1] / j
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite normalized log-determinants in the window")
    return vals


def build_design(L: np.ndarray, n0: int, ns: int, q: int):
    """Design matrix ((ns-n0) x (q+2)) and response for the window fit.

    ``L`` holds L_j for j = n0..ns as produced by :func:`extract_l`.
    """
    if q < 0:
        raise ValueError(f"Laurent order q must be >= 0, got {q}")
    rows = ns - n0
    if rows < q + 2:
        raise ValueError(f"window [{n0}, {ns}] has {rows} points; need >= {q + 2}")
    if len(L) != rows + 1:
        raise ValueError(f"L has {len(L)} entries, expected {rows + 1}")
    nj = np.arange(n0 + 1, ns + 1, dtype=np.float64)
    root = np.sqrt(nj - 1.0)
    lg = gammaln(nj + 1.0)
    y = nj / root * (L[1:] - L[0])
    X = np.empty((rows, q + 2))
    X[:, 0] = root
    for i in range(1, q + 2):
        X[:, i] = -lg / (nj ** (i - 1) * root)
    return X, y


def fit_design(X: np.ndarray, y: np.ndarray):
    """Least-squares fit of the design; returns (beta, sigma_hat, residuals).

    Solved by orthogonal factorization on max-abs-scaled columns (the raw
    columns span many orders of magnitude), with one refinement pass.
    sigma_hat**2 is RSS / (rows - cols), or 0 when there are no spare rows.
    """
    rows, cols = X.shape
    scale = np.max(np.abs(X), axis=0)
    if np.any(scale == 0.0):
        bad = int(np.argmin(scale))
        raise ConditioningError(f"design column {bad} is identically zero")
    Xs = X / scale
    beta_s, _, rank, _ = np.linalg.lstsq(Xs, y, rcond=None)
    if rank < cols:
        raise ConditioningError(
            f"design is rank deficient ({rank} < {cols}); "
            f"column scales {scale.tolist()}")
    beta_s += np.linalg.lstsq(Xs, y - Xs @ beta_s, rcond=None)[0]
    residuals = y - Xs @ beta_s
    dof = rows - cols
    sigma_hat = float(np.sqrt(residuals @ residuals / dof)) if dof > 0 else 0.0
    return beta_s / scale, sigma_hat, residuals


@dataclass(frozen=True)
class FlodanceFit:
    """Fitted window, coefficients, anchor value, and residual scale."""

    n0: int
    ns: int
    q: int
    c0: float
    nu: np.ndarray
    sigma_hat: float
    anchor: float                       # L_{n0}
    residuals: np.ndarray = field(repr=False, default=None)

    def to_json_dict(self) -> dict:
        return {"n0": self.n0, "ns": self.ns, "q": self.q, "c0": self.c0,
                "nu": [float(v) for v in self.nu],
                "sigma_hat": self.sigma_hat, "anchor_L": self.anchor}


def fit_prefix(ell: np.ndarray, d: int, n0: int, ns: int, q: int) -> FlodanceFit:
    """Window fit straight from a prefix sequence."""
    L = extract_l(ell, d, n0, ns)
    X, y = build_design(L, n0, ns, q)
    beta, sigma_hat, residuals = fit_design(X, y)
    return FlodanceFit(n0=n0, ns=ns, q=q, c0=float(beta[0]), nu=beta[1:],
                       sigma_hat=sigma_hat, anchor=float(L[0]),
                       residuals=residuals)


def predict(fit: FlodanceFit, n) -> tuple:
    """Normalized and raw log-determinant estimates (L_hat, ell_hat) at n."""
    n = np.asarray(n, dtype=np.float64)
    lg = gammaln(n + 1.0)
    L_hat = fit.anchor + fit.c0 * (1.0 - 1.0 / n)
    for i in range(1, fit.q + 2):
        L_hat = L_hat - fit.nu[i - 1] * n ** (-float(i)) * lg
    return L_hat, n * L_hat


def predict_interval(fit: FlodanceFit, n: int, level: float = 0.95):
    """Central normal interval for ell_hat(n) at the given coverage level."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    _, ell_hat = predict(fit, n)
    half = norm.ppf(0.5 + level / 2.0) * fit.sigma_hat * np.sqrt(n - 1.0)
    return float(ell_hat - half), float(ell_hat + half)


def scaling_ratio_trace(ell: np.ndarray, d: int) -> np.ndarray:
    """log of successive determinant ratios: ell_{nd} - ell_{(n-1)d}, n >= 2.

    The diagnostic for the power-law decay assumption; on a log-log plot the
    trend slope is minus the decay exponent.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    ell = np.asarray(ell, dtype=np.float64)
    n_max = len(ell) // d
    if n_max < 2:
        raise ValueError("prefix must cover at least 2 datapoints")
    idx = np.arange(1, n_max + 1) * d - 1
    return np.diff(ell[idx])


def select_burn_in(ell: np.ndarray, d: int, ns: int, q: int,
                   candidates=BURN_IN_GRID, holdout: float = 0.2) -> int:
    """Pick a burn-in from a grid by held-out tail error.

    Fits on [n0, n_fit] with n_fit = ns - holdout tail, scores mean |relative
    error| of the predicted L over (n_fit, ns], and returns the best n0.
    """
    n_fit = max(2, int(round(ns * (1.0 - holdout))))
    best_n0, best_score = None, np.inf
    tail = np.arange(n_fit + 1, ns + 1)
    if len(tail) == 0:
        raise ValueError(f"window [1, {ns}] leaves no held-out tail")
    L_true = extract_l(ell, d, int(tail[0]), ns)
    for n0 in candidates:
        if n_fit - n0 < q + 2:
            continue
        f = fit_prefix(ell, d, n0, n_fit, q)
        L_pred, _ = predict(f, tail)
        score = float(np.mean(np.abs(L_pred - L_true)
                              / np.maximum(1.0, np.abs(L_true))))
        if score < best_score:
            best_n0, best_score = n0, score
    if best_n0 is None:
        raise ValueError(f"no burn-in candidate leaves >= {q + 2} fit points")
    return best_n0
