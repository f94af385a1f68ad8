"""Mixed smoothing of rectangle indicators and its exact partial derivatives.

The smoothed indicator composes a Lipschitz ramp of slope ``phi`` with the
max-margin function of a rectangle, then convolves with a centered Gaussian at
scale ``eps``.  For diagonal covariance the result and all its mixed partials
reduce to one-dimensional Gauss-Legendre quadrature of products of normal
CDFs and Gaussian-density Hermite terms, which is what the derivative-sum
verification sweeps evaluate.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import hermite_e, polynomial as npoly
from scipy.special import ndtr

from .errors import BudgetExceeded, NonDiagonalSigma, OrderTooHigh
from .matcore import CovarianceModel, RectangleSpec, enlarge

MAX_DERIVATIVE_ORDER = 6
TUPLE_BUDGET = 10_000
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# -- Hermite machinery -------------------------------------------------------

def hermite_coefficients(nu: int) -> np.ndarray:
    """Power-basis coefficients of the probabilists' Hermite polynomial."""
    if nu < 0:
        raise ValueError("nu must be >= 0")
    basis = np.zeros(nu + 1)
    basis[nu] = 1.0
    return hermite_e.herme2poly(basis)


def hermite_max_root(nu: int) -> float:
    """Largest root of the nu-th probabilists' Hermite polynomial (nu >= 1)."""
    if nu < 1:
        raise ValueError("nu must be >= 1")
    basis = np.zeros(nu + 1)
    basis[nu] = 1.0
    return float(np.max(hermite_e.hermeroots(basis).real))


@dataclass(frozen=True)
class HermiteTable:
    """Coefficients and largest root of one Hermite polynomial."""

    order: int
    coefficients: np.ndarray = field(init=False)
    max_root: Optional[float] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", hermite_coefficients(self.order))
        object.__setattr__(self, "max_root",
                           hermite_max_root(self.order) if self.order >= 1 else None)


def gaussian_pdf(t: np.ndarray) -> np.ndarray:
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(t))


def h_nu(nu: int, t) -> np.ndarray:
    """h_nu(t) = H_{nu-1}(t) * standard normal pdf(t); 0 at infinite t."""
    if nu < 1:
        raise ValueError("nu must be >= 1")
    t = np.asarray(t, dtype=float)
    finite = np.isfinite(t)
    tt = np.where(finite, t, 0.0)
    vals = npoly.polyval(tt, hermite_coefficients(nu - 1)) * gaussian_pdf(tt)
    return np.where(finite, vals, 0.0)


def h_derivative_coefficient_check(nu: int) -> bool:
    """Exact coefficient check of d/dt h_nu = -h_{nu+1}.

    Equivalent polynomial identity: H'_{nu-1}(t) - t H_{nu-1}(t) = -H_nu(t).
    """
    c = hermite_coefficients(nu - 1)
    lhs = npoly.polysub(npoly.polyder(c), npoly.polymul([0.0, 1.0], c))
    rhs = -hermite_coefficients(nu)
    lhs = np.trim_zeros(lhs, "b")
    rhs = np.trim_zeros(rhs, "b")
    return len(lhs) == len(rhs) and np.allclose(lhs, rhs, rtol=0, atol=1e-12)


# -- smoothing functions -----------------------------------------------------

def g_phi(t: float, phi: float) -> float:
    """Ramp: 1 on t <= 0, linear down to 0 at t = 1/phi; indicator at phi=inf."""
    if phi <= 0:
        raise ValueError("phi must be > 0")
    if math.isinf(phi):
        return 1.0 if t <= 0 else 0.0
    if t <= 0:
        return 1.0
    if t >= 1.0 / phi:
        return 0.0
    return 1.0 - phi * t


@dataclass(frozen=True)
class SmoothingParams:
    """Rectangle, ramp slope, Gaussian scale, covariance, perturbation ball."""

    rect: RectangleSpec
    phi: float
    eps: float
    sigma: CovarianceModel
    K: float = 4.0
    y_grid: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.phi <= 0:
            raise ValueError("phi must be > 0")
        if self.eps <= 0:
            raise ValueError("eps must be > 0")
        if self.rect.dim != self.sigma.dim:
            raise ValueError("rectangle and covariance dimensions differ")

    @property
    def d(self) -> int:
        return self.rect.dim

    @property
    def sigma_star(self) -> float:
        return float(math.sqrt(np.min(self.sigma.diagonal)))

    @property
    def eta(self) -> float:
        return self.K / math.sqrt(math.log(self.d)) if self.d >= 2 else self.K

    @property
    def y_radius(self) -> float:
        return self.eps * self.sigma_star * self.eta

    def perturbations(self) -> np.ndarray:
        """Finite approximation of the sup over the l_inf ball of radius
        eps*sigma_* *eta: the 2^d corners plus center for d <= 6, else the 2d
        axis-extreme points plus center."""
        if self.y_grid is not None:
            return np.asarray(self.y_grid, dtype=float)
        r = self.y_radius
        d = self.d
        if d <= 6:
            corners = r * np.array(list(itertools.product((-1.0, 1.0), repeat=d)))
        else:
            corners = np.concatenate([r * np.eye(d), -r * np.eye(d)])
        return np.vstack([np.zeros(d), corners])


def m_indicator(w, params: SmoothingParams) -> float:
    """Smoothed rectangle indicator g_phi(max_j[(w_j-b_j) v (a_j-w_j)])."""
    w = np.asarray(w, dtype=float)
    margin = np.max(np.maximum(w - params.rect.upper, params.rect.lower - w))
    return g_phi(float(margin), params.phi)


def _require_diagonal(params: SmoothingParams):
    if not params.sigma.is_diagonal:
        raise NonDiagonalSigma(
            "analytic path requires diagonal covariance; use Monte Carlo instead")
    if np.any(params.sigma.diagonal <= 0):
        raise ValueError("diagonal covariance entries must be positive")


def _phi_factors(w, params: SmoothingParams, s: np.ndarray) -> np.ndarray:
    """(d, len(s)) array of CDF-difference factors for the integrand."""
    sd = params.eps * np.sqrt(params.sigma.diagonal)
    up = params.rect.upper[:, None] + s[None, :] - np.asarray(w)[:, None]
    lo = params.rect.lower[:, None] - s[None, :] - np.asarray(w)[:, None]
    with np.errstate(invalid="ignore"):
        f_up = np.where(np.isinf(up), (up > 0).astype(float), ndtr(up / sd[:, None]))
        f_lo = np.where(np.isinf(lo), (lo > 0).astype(float), ndtr(lo / sd[:, None]))
    return f_up - f_lo


def _h_factors(w, params: SmoothingParams, s: np.ndarray, orders: dict) -> np.ndarray:
    """Product over differentiated coordinates of the signed h_nu terms."""
    sd = params.eps * np.sqrt(params.sigma.diagonal)
    out = np.ones_like(s)
    for j, nu in orders.items():
        up = (params.rect.upper[j] + s - w[j]) / sd[j]
        lo = (params.rect.lower[j] - s - w[j]) / sd[j]
        # each derivative in w_j pulls out -1/sd_j and steps h_nu -> h_{nu+1}
        # via h' = -h_{nu+1}, so the net sign is -1 for every order nu
        out = out * -(1.0 / sd[j]) ** nu * (h_nu(nu, up) - h_nu(nu, lo))
    return out


def _quadrature(f, upper: float, order: int, tol: float = 1e-10,
                max_order: int = 512) -> float:
    """Gauss-Legendre on [0, upper] with order doubling to tolerance."""
    prev = None
    while True:
        nodes, weights = np.polynomial.legendre.leggauss(order)
        s = 0.5 * upper * (nodes + 1.0)
        val = 0.5 * upper * float(np.dot(weights, f(s)))
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        if order >= max_order:
            return val
        prev = val
        order *= 2


def rho_eval(w, params: SmoothingParams, quad_order: int = 32) -> float:
    """Gaussian-convolved smoothed indicator at w (diagonal covariance).

    phi * integral over [0, 1/phi] of the product of per-coordinate CDF
    differences of the s-enlarged rectangle; at phi = inf, the integrand at
    s = 0 (plain Gaussian convolution of the indicator).
    """
    _require_diagonal(params)
    if quad_order < 8:
        raise ValueError("quad_order must be >= 8")
    w = np.asarray(w, dtype=float)

    def integrand(s):
        return np.prod(_phi_factors(w, params, np.asarray(s)), axis=0)

    if math.isinf(params.phi):
        return float(integrand(np.array([0.0]))[0])
    return params.phi * _quadrature(integrand, 1.0 / params.phi, quad_order)


def rho_eval_mc(w, params: SmoothingParams, reps: int, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo fallback for general covariance: mean of the smoothed
    indicator at w + eps*Z; returns (estimate, standard error)."""
    from .sampler import substream

    w = np.asarray(w, dtype=float)
    rng = substream(seed, 30)
    z = rng.standard_normal((reps, params.d)) @ params.sigma.chol.T
    pts = w + params.eps * z
    margins = np.max(np.maximum(pts - params.rect.upper,
                                params.rect.lower - pts), axis=1)
    if math.isinf(params.phi):
        vals = (margins <= 0).astype(float)
    else:
        vals = np.clip(1.0 - params.phi * margins, 0.0, 1.0)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(reps))


def _orders_from_index(multi_index: Sequence[int], d: int) -> dict:
    orders: dict = {}
    for j in multi_index:
        j = int(j)
        if not 0 <= j < d:
            raise IndexError(f"coordinate index {j} out of range for d={d}")
        orders[j] = orders.get(j, 0) + 1
    return orders


def rho_partial(w, multi_index: Sequence[int], params: SmoothingParams,
                quad_order: int = 32) -> float:
    """Exact mixed partial of the smoothed function at w.

    ``multi_index`` lists coordinate indices with repetition, e.g. (0, 0, 2)
    for the third-order partial twice in coordinate 0 and once in 2.  Each
    differentiated coordinate replaces its CDF-difference factor by
    ``-(1/(eps*sigma_j))^nu * [h_nu(upper arg) - h_nu(lower arg)]``.
    """
    _require_diagonal(params)
    w = np.asarray(w, dtype=float)
    v = len(multi_index)
    if v < 1:
        return rho_eval(w, params, quad_order)
    if v > MAX_DERIVATIVE_ORDER:
        raise OrderTooHigh(f"total order {v} exceeds cap {MAX_DERIVATIVE_ORDER}")
    orders = _orders_from_index(multi_index, params.d)
    plain = [j for j in range(params.d) if j not in orders]

    def integrand(s):
        s = np.asarray(s)
        val = _h_factors(w, params, s, orders)
        if plain:
            factors = _phi_factors(w, params, s)[plain]
            val = val * np.prod(factors, axis=0)
        return val

    if math.isinf(params.phi):
        return float(integrand(np.array([0.0]))[0])
    return params.phi * _quadrature(integrand, 1.0 / params.phi, quad_order)


def derivative_sum(v: int, w, params: SmoothingParams,
                   quad_order: int = 32) -> float:
    """S_v(w): sum over all d^v index tuples of the y-grid sup of |partial|.

    The sup over the perturbation ball is approximated from below by the
    finite grid in ``params.perturbations()``; tuples sharing a per-coordinate
    order profile are evaluated once and weighted by their multiplicity.
    """
    if not 1 <= v <= 4:
        raise ValueError("v must be in 1..4")
    d = params.d
    if d**v > TUPLE_BUDGET:
        raise BudgetExceeded(f"d^v = {d**v} exceeds budget {TUPLE_BUDGET}")
    w = np.asarray(w, dtype=float)
    ys = params.perturbations()
    total = 0.0
    for combo in itertools.combinations_with_replacement(range(d), v):
        counts: dict = {}
        for j in combo:
            counts[j] = counts.get(j, 0) + 1
        mult = math.factorial(v)
        for c in counts.values():
            mult //= math.factorial(c)
        best = max(abs(rho_partial(w + y, combo, params, quad_order)) for y in ys)
        total += mult * best
    return total


# -- lemma verification sweeps ----------------------------------------------

VERIFY_COLUMNS = ("d", "v", "phi", "eps", "K",
                  "attained_C61", "attained_C62", "decay_ratio")


def _boundary_w_grid(rect: RectangleSpec) -> np.ndarray:
    """Points on/near the rectangle boundary: upper corner, face centers,
    and the center."""
    center = np.where(np.isfinite(rect.lower) & np.isfinite(rect.upper),
                      0.5 * (np.nan_to_num(rect.lower) + np.nan_to_num(rect.upper)),
                      0.0)
    pts = [center, np.where(np.isfinite(rect.upper), rect.upper, center)]
    for j in range(rect.dim):
        if np.isfinite(rect.upper[j]):
            face = center.copy()
            face[j] = rect.upper[j]
            pts.append(face)
    return np.unique(np.array(pts), axis=0)


def verify_lemmas(d_list: Sequence[int], v_list: Sequence[int],
                  phi_list: Sequence[float], eps_list: Sequence[float],
                  K: float, kappa: float = 4.0,
                  half_width: float = 1.5, quad_order: int = 32) -> list[dict]:
    """Attained-constant table across (d, v, phi, eps) cells.

    Per cell, with S_v the boundary-grid max of :func:`derivative_sum`:

    * ``attained_C61`` = S_v (eps sigma_*)^{v-1} / (phi (log d)^{(v-1)/2})
      (NaN at phi = inf),
    * ``attained_C62`` = S_v (eps sigma_*)^v / (log d)^{v/2},
    * ``decay_ratio``  = S_v(boundary) / S_v(w_far) where w_far sits a
      distance 2*eps*kappa + 1/phi outside the rectangle corner, the measured
      decay the tail-vanishing bound controls from below by
      exp((kappa - eta)^2 / ...) factors.
    """
    rows = []
    for d in d_list:
        rect = RectangleSpec(np.full(d, -half_width), np.full(d, half_width))
        sigma = CovarianceModel.identity(d)
        w_grid = _boundary_w_grid(rect)
        for v in v_list:
            for phi in phi_list:
                for eps in eps_list:
                    params = SmoothingParams(rect=rect, phi=phi, eps=eps,
                                             sigma=sigma, K=K)
                    s_boundary = max(derivative_sum(v, w, params, quad_order)
                                     for w in w_grid)
                    ld = math.log(d)
                    c61 = (math.nan if math.isinf(phi) else
                           s_boundary * (eps * params.sigma_star) ** (v - 1)
                           / (phi * ld ** ((v - 1) / 2.0)))
                    c62 = s_boundary * (eps * params.sigma_star) ** v / ld ** (v / 2.0)
                    margin = 2.0 * eps * kappa + (0.0 if math.isinf(phi) else 1.0 / phi)
                    w_far = np.asarray(rect.upper) + margin + 1e-9
                    s_far = derivative_sum(v, w_far, params, quad_order)
                    decay = s_boundary / s_far if s_far > 0 else math.inf
                    rows.append({"d": d, "v": v, "phi": phi, "eps": eps, "K": K,
                                 "attained_C61": c61, "attained_C62": c62,
                                 "decay_ratio": decay})
    return rows


def write_verify_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=VERIFY_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in VERIFY_COLUMNS})
