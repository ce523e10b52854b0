"""Velocity functionals, geometric factors and explicit light-cone envelopes."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .evolve import operator_norm
from .liouvillian import build_gprime, build_gtilde
from .model import LatticeModel, StripError, build_hamiltonian, deform_matrix, imag_part

NU_GRID_FRACTIONS = (0.1, 0.2, 0.4, 0.6, 0.8, 0.9)
BOUNDS_COLUMNS = ("nu", "c_prime", "mu", "eps", "c_mu", "c")


@dataclass
class VelocityBound:
    nu: float
    etas: tuple
    operators: dict = field(repr=False)
    top_eigenvalues: dict = field(default_factory=dict)
    c_prime: float = math.nan


@dataclass
class ConeEnvelope:
    mu: float
    nu: float
    eps: float
    c_mu: float
    c: float
    prefactor: float | None = None

    @property
    def shrink(self) -> float:
        return 1.0 - 2.5 * self.eps

    def envelope(self, distance: float, t: float) -> float:
        """``C exp(-2 mu (distance - c t))``; needs a prefactor."""
        if self.prefactor is None:
            raise ValueError("envelope prefactor has not been assembled")
        return self.prefactor * math.exp(-2 * self.mu * (distance - self.c * t))


@dataclass
class GeometryFactors:
    U: tuple
    V: tuple
    b: int
    r_U: float
    r_V: float
    delta: float

    def weight(self, nu: float) -> float:
        """``exp(-nu delta)``, the bound on ``|chi_U T_{-zeta}| |chi_V T_zeta|``."""
        return math.exp(-nu * self.delta)


def default_nu_grid(model: LatticeModel) -> list[float]:
    a = model.decay_rate if math.isfinite(model.decay_rate) else 1.0
    return [a * f for f in NU_GRID_FRACTIONS]


def _check_nu(model: LatticeModel, nu: float) -> float:
    nu = float(nu)
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    if not nu < model.decay_rate:
        raise StripError(
            f"nu={nu} leaves the analyticity strip |Im zeta| < a = {model.decay_rate}"
        )
    return nu


def velocity_operator(model: LatticeModel, eta: float) -> np.ndarray:
    """``Im H_{i eta} + G-tilde_{i eta}``."""
    h = build_hamiltonian(model)
    zeta = 1j * float(eta)
    return imag_part(deform_matrix(h, zeta, model.periodic)) + build_gtilde(model, zeta)


def velocity_c_prime(model: LatticeModel, nu: float) -> VelocityBound:
    """``c'(nu) = max over eta = +-nu of sup spec(Im H_{i eta} + G-tilde_{i eta}) / nu``."""
    nu = _check_nu(model, nu)
    ops, tops = {}, {}
    for eta in (nu, -nu):
        op = velocity_operator(model, eta)
        ops[eta] = op
        tops[eta] = float(np.linalg.eigvalsh(op)[-1])
    return VelocityBound(nu, (nu, -nu), ops, tops, max(tops.values()) / nu)


def velocity_c_mu(model: LatticeModel, mu: float, eps: float) -> ConeEnvelope:
    """``nu = mu / (1 - 5 eps / 2)``, ``c(mu) = c'(nu)``, ``c = c(mu) / (1 - 5 eps / 2)``."""
    eps = float(eps)
    if not 0 < eps < 0.4:
        raise ValueError(f"eps must lie in (0, 2/5), got {eps}")
    shrink = 1.0 - 2.5 * eps
    nu = float(mu) / shrink
    c_mu = velocity_c_prime(model, nu).c_prime
    return ConeEnvelope(float(mu), nu, eps, c_mu, c_mu / shrink)


def dispersion(model: LatticeModel, k):
    """Band function ``omega(k) = V + sum_r t_r exp(-i k r)`` (real for Hermitian hopping)."""
    k = np.asarray(k, dtype=float)
    w = np.full(k.shape, float(model.potential[0]), dtype=complex)
    for r, t in model.hopping.items():
        w += t * np.exp(-1j * k * r)
    return w.real


def group_velocity(model: LatticeModel, k):
    k = np.asarray(k, dtype=float)
    v = np.zeros(k.shape, dtype=complex)
    for r, t in model.hopping.items():
        v += -1j * r * t * np.exp(-1j * k * r)
    return v.real


def max_group_speed(model: LatticeModel, grid: int = 1 << 14) -> float:
    if not model.hopping:
        return 0.0
    ks = np.linspace(-np.pi, np.pi, grid, endpoint=False)
    speeds = np.abs(group_velocity(model, ks))
    i = int(np.argmax(speeds))
    h = 2 * np.pi / grid
    res = minimize_scalar(
        lambda k: -abs(float(group_velocity(model, k))),
        bounds=(ks[i] - h, ks[i] + h),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return max(float(speeds[i]), -float(res.fun))


def small_nu_slope(model: LatticeModel) -> float:
    """``max_k |omega'(k)| - |G-tilde'|``; positive means ``c(nu) > 0`` for small nu."""
    v = model.potential
    if np.ptp(v) > 1e-12 * max(1.0, float(np.max(np.abs(v)))):
        raise ValueError("slope undefined for disordered V (the potential is not constant)")
    return max_group_speed(model) - operator_norm(build_gprime(model))


def fit_second_order(model: LatticeModel, nus: Sequence[float] = (1e-2, 1e-3)) -> dict:
    """Smallest ``K >= 0`` with ``nu c'(nu) >= slope nu - K nu^2`` on the given nus."""
    slope = small_nu_slope(model)
    rows = []
    k_fit = 0.0
    for nu in nus:
        growth = nu * velocity_c_prime(model, nu).c_prime
        k_fit = max(k_fit, (slope * nu - growth) / nu**2)
        rows.append({"nu": nu, "nu_c_prime": growth})
    return {"slope": slope, "K": k_fit, "rows": rows}


def _sites(s: Iterable[int]) -> np.ndarray:
    arr = np.unique(np.asarray(list(s), dtype=int))
    if arr.size == 0:
        raise ValueError("site sets must be nonempty")
    return arr


def set_distance(a: Iterable[int], b: Iterable[int]) -> float:
    a, b = _sites(a), _sites(b)
    return float(np.min(np.abs(a[:, None] - b[None, :])))


def geometry_delta(U: Iterable[int], V: Iterable[int], b: int) -> GeometryFactors:
    """``delta_UV = min_{x in U} b x - max_{y in V} b y`` for ``b = +-1``."""
    if b not in (1, -1):
        raise ValueError(f"direction must be +1 or -1, got {b}")
    u, v = _sites(U), _sites(V)
    r_u = float(np.min(b * u))
    r_v = float(np.max(b * v))
    return GeometryFactors(tuple(u.tolist()), tuple(v.tolist()), b, r_u, r_v, r_u - r_v)


def best_geometry(U: Iterable[int], V: Iterable[int]) -> GeometryFactors:
    """The direction with the larger ``delta_UV`` (pointing from V towards U)."""
    return max((geometry_delta(U, V, b) for b in (1, -1)), key=lambda g: g.delta)


def ball_envelope(delta: float, nu: float, c_prime: float, t: float) -> float:
    """``4 exp(-2 nu delta + 2 nu c' t)``."""
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    return 4.0 * math.exp(-2 * nu * delta + 2 * nu * c_prime * t)


def partition_cover(sites: Iterable[int], radius: float) -> list[np.ndarray]:
    """Greedy cover by intervals of the given radius centred at points of the set.

    The pieces are disjoint and each lies in ``[c - radius, c + radius]`` for
    some centre ``c`` in the set.
    """
    s = _sites(sites)
    pieces = []
    i = 0
    while i < s.size:
        x0 = s[i]
        centre = s[s <= x0 + radius].max()
        j = i
        while j < s.size and s[j] <= centre + radius:
            j += 1
        pieces.append(s[i:j])
        i = j
    return pieces


def partition_sum(X: Iterable[int], Y: Iterable[int], eps: float, nu: float) -> float:
    """``C_XY = max_{j1} sum_k sum_{j2} exp(-nu'(d(X_k, Y_j1) + d(X_k, Y_j2)))``.

    ``X`` is the measured set and ``Y`` the set holding the state;
    ``nu' = nu (1 - eps/2)``.
    """
    x, y = _sites(X), _sites(Y)
    if np.intersect1d(x, y).size:
        raise ValueError("sets overlap; the partition constant needs disjoint sets")
    d_xy = set_distance(x, y)
    radius = eps * d_xy / 2
    xs, ys = partition_cover(x, radius), partition_cover(y, radius)
    nu_p = nu * (1 - eps / 2)
    dist = np.array([[set_distance(a, b) for b in ys] for a in xs])
    w = np.exp(-nu_p * dist)
    # totals[j1] = sum_k w[k, j1] * sum_j2 w[k, j2]
    totals = (w * w.sum(axis=1, keepdims=True)).sum(axis=0)
    return float(totals.max())


def assemble_partition_constant(
    X: Iterable[int], Y: Iterable[int], eps: float, nu: float
) -> float:
    """Explicit prefactor ``4 exp(2 nu eps d_XY) C_XY``.

    Multiplied by ``exp(2 nu c' t) Tr(rho)`` it bounds
    ``Tr(chi_X beta_t(chi_Y rho chi_Y))``.
    """
    if not 0 < eps < 0.4:
        raise ValueError(f"eps must lie in (0, 2/5), got {eps}")
    d_xy = set_distance(X, Y)
    return 4.0 * math.exp(2 * nu * eps * d_xy) * partition_sum(X, Y, eps, nu)


def bounds_table(
    model: LatticeModel,
    eps: float,
    nu_grid: Sequence[float] | None = None,
    mu_grid: Sequence[float] | None = None,
) -> list[dict]:
    """Rows ``(nu, c_prime, mu, eps, c_mu, c)`` over the nu grid and the mu grid."""
    shrink = 1.0 - 2.5 * eps
    nus = list(default_nu_grid(model) if nu_grid is None else nu_grid)
    nus += [m / shrink for m in (mu_grid or [])]
    rows = []
    for nu in nus:
        cp = velocity_c_prime(model, nu).c_prime
        rows.append({"nu": nu, "c_prime": cp, "mu": nu * shrink, "eps": eps,
                     "c_mu": cp, "c": cp / shrink})
    return rows


def fmt(x: float) -> str:
    """12 significant digits, '.' decimal."""
    return f"{x:.12g}"


def write_bounds_csv(rows: Sequence[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BOUNDS_COLUMNS)
        for row in rows:
            w.writerow([fmt(row[c]) for c in BOUNDS_COLUMNS])
