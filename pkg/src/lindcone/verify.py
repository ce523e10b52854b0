"""Executable certificates for the light-cone and map inequalities.

Every checker returns a :class:`CheckReport` holding one sample per
(input, time) with ``margin = bound - measured``.  A sample passes when its
margin is at least ``-tol`` where ``tol`` is fixed when the sample is made
(``tolerance * max(1, bound)`` for inequalities, ``0`` for error-vs-threshold
samples).  Checkers are deterministic given their arguments and seed.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bounds import (
    assemble_partition_constant,
    best_geometry,
    ball_envelope,
    set_distance,
    velocity_c_mu,
    velocity_c_prime,
)
from .evolve import (
    evolve_columns,
    matrix_exp,
    operator_norm,
    s1_opnorm_lower,
    trace_norm,
)
from .liouvillian import (
    Superoperator,
    adjoint_generator,
    build_deformed_generator,
    build_lindbladian,
    deformation_superoperator,
    deformed_parts,
    unvec,
    vec,
)
from .model import LatticeModel, StripError, build_hamiltonian, deform_matrix, imag_part

log = logging.getLogger(__name__)

INEQUALITY_TOL = 1e-9
CS_TOL = 1e-10


@dataclass
class Sample:
    digest: str
    measured: float
    bound: float
    tol: float
    vacuous: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.bound - self.measured

    @property
    def ok(self) -> bool:
        return self.margin >= -self.tol

    def to_dict(self) -> dict:
        return {
            "digest": self.digest,
            "measured": _num(self.measured),
            "bound": _num(self.bound),
            "margin": _num(self.margin),
            "vacuous": bool(self.vacuous),
            "meta": {**self.meta, "tol": _num(self.tol)},
        }


@dataclass
class CheckReport:
    check: str
    params: dict
    seed: int | None
    samples: list
    tolerance: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = sorted(self.samples, key=lambda s: s.digest)

    @property
    def verdict(self) -> str:
        return "pass" if all(s.ok for s in self.samples) else "fail"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def failures(self) -> list:
        return [s for s in self.samples if not s.ok]

    def min_margin(self, include_vacuous: bool = False) -> float:
        margins = [s.margin for s in self.samples if include_vacuous or not s.vacuous]
        return min(margins) if margins else math.inf

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "params": _jsonable(self.params),
            "seed": self.seed,
            "samples": [s.to_dict() for s in self.samples],
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "diagnostics": _jsonable(self.diagnostics),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False)


def _num(x: float):
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _num(obj.real), "im": _num(obj.imag)}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def digest(check: str, meta: dict, *arrays) -> str:
    h = hashlib.sha256()
    h.update(check.encode())
    h.update(json.dumps(_jsonable(meta), sort_keys=True).encode())
    for a in arrays:
        a = np.ascontiguousarray(np.asarray(a, dtype=complex))
        h.update(a.tobytes())
    return h.hexdigest()[:16]


def inequality(check: str, measured: float, bound: float, meta: dict, *arrays,
               tolerance: float = INEQUALITY_TOL, vacuous: bool = False) -> Sample:
    return Sample(digest(check, meta, *arrays), float(measured), float(bound),
                  tolerance * max(1.0, abs(float(bound))), vacuous, meta)


def threshold(check: str, error: float, limit: float, meta: dict, *arrays) -> Sample:
    """An error that must not exceed a fixed limit (no extra slack)."""
    return Sample(digest(check, meta, *arrays), float(error), float(limit), 0.0, False, meta)


# ---------------------------------------------------------------------------
# random inputs


def random_pure_state(rng: np.random.Generator, d: int, sites: Iterable[int]) -> np.ndarray:
    """Haar-random pure density matrix supported on the given sites."""
    sites = np.asarray(list(sites), dtype=int)
    psi = np.zeros(d, dtype=complex)
    psi[sites] = rng.normal(size=sites.size) + 1j * rng.normal(size=sites.size)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_matrix(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2 * d)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def localized_states(rng: np.random.Generator, d: int, sites, n_states: int) -> list:
    """Haar pure states on span(sites) plus mixtures of consecutive pairs."""
    n_pure = max(1, (n_states + 1) // 2)
    pure = [random_pure_state(rng, d, sites) for _ in range(n_pure)]
    mixed = [0.5 * (pure[i] + pure[(i + 1) % n_pure]) for i in range(n_states - n_pure)]
    return pure + mixed


def projector(d: int, sites) -> np.ndarray:
    chi = np.zeros(d)
    chi[np.asarray(list(sites), dtype=int)] = 1.0
    return chi


def cut_mask(d: int, sites) -> np.ndarray:
    """Diagonal of ``lam -> chi lam chi`` in vectorized form."""
    chi = projector(d, sites)
    return np.outer(chi, chi).reshape(-1)


def _require_open(model: LatticeModel, what: str):
    if model.periodic:
        raise ValueError(f"{what} uses the linear position functional; needs an open chain")


def _disjoint(X, Y) -> tuple[list, list]:
    x, y = sorted(set(int(v) for v in X)), sorted(set(int(v) for v in Y))
    if not x or not y:
        raise ValueError("site sets must be nonempty")
    if set(x) & set(y):
        raise ValueError(f"sets overlap at sites {sorted(set(x) & set(y))}")
    return x, y


def _times(times) -> list:
    times = [float(t) for t in times]
    if any(t < 0 for t in times):
        raise ValueError("times must be nonnegative")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("times must be strictly ascending")
    return times


def semigroup_matrices(gen: Superoperator, times) -> list:
    """``exp(L t)`` for every requested time, one exponential per increment."""
    return evolve_columns(gen, np.eye(gen.dim**2, dtype=complex), times)


# ---------------------------------------------------------------------------
# light cones


def cone_envelope(model: LatticeModel, X, Y, mu: float, eps: float):
    """Envelope for leakage from X into Y with its assembled constant."""
    x, y = _disjoint(X, Y)
    env = velocity_c_mu(model, mu, eps)
    d_xy = set_distance(x, y)
    # Y is measured, X holds the state
    pre = assemble_partition_constant(y, x, eps, env.nu)
    env.prefactor = pre * math.exp(2 * env.mu * d_xy)
    return env, d_xy, pre


def fitted_decay_rate(populations: np.ndarray, distances: np.ndarray, floor: float = 1e-14) -> float:
    """``-slope`` of a least-squares line through ``log p`` vs distance."""
    keep = populations > floor
    if keep.sum() < 2:
        return math.nan
    slope = np.polyfit(distances[keep], np.log(populations[keep]), 1)[0]
    return float(-slope)


def check_leakage_cone(model: LatticeModel, X, Y, mu: float, eps: float, times,
                       seed: int = 0, n_states: int = 16, fit_span: int = 5) -> CheckReport:
    """``Tr(chi_Y beta_t(rho)) <= C exp(-2 mu (d_XY - c t)) Tr(rho)`` for rho localized in X."""
    _require_open(model, "check_leakage_cone")
    name = "check_leakage_cone"
    x, y = _disjoint(X, Y)
    times = _times(times)
    env, d_xy, pre = cone_envelope(model, x, y, mu, eps)
    d = model.n_sites
    rng = np.random.default_rng(seed)
    states = localized_states(rng, d, x, n_states)
    gen = build_lindbladian(model)
    cols = np.stack([vec(r) for r in states], axis=1)
    evolved = evolve_columns(gen, cols, times)
    chi_y = cut_mask(d, y)
    samples = []
    for t, block in zip(times, evolved):
        leak = (chi_y @ block).real
        for k, rho in enumerate(states):
            tr = float(np.trace(rho).real)
            bound = env.envelope(d_xy, t) * tr
            meta = {"t": t, "d_XY": d_xy, "state": k}
            samples.append(inequality(name, leak[k], bound, meta, rho, vacuous=bound > tr))
    # empirical tail: populations of the first state at increasing distance, last time
    t_fit = times[-1]
    pops = unvec(evolved[-1][:, 0], d).diagonal().real
    dist_of = np.array([min(abs(s - xx) for xx in x) for s in range(d)])
    span = np.arange(int(d_xy), int(d_xy) + fit_span)
    per_dist = np.array([pops[(dist_of == r) & np.isin(np.arange(d), y)].sum() for r in span])
    rate = fitted_decay_rate(per_dist, span.astype(float))
    log.info("leakage tail at t=%g: fitted decay rate %.4g (2 mu = %.4g)", t_fit, rate, 2 * mu)
    params = {"model": model.name, "X": x, "Y": y, "mu": mu, "eps": eps, "nu": env.nu,
              "times": times, "n_states": n_states}
    diag = {"c_prime": env.c_mu, "c": env.c, "C": env.prefactor, "partition_prefactor": pre,
            "d_XY": d_xy, "fit_time": t_fit, "fitted_decay_rate": rate, "two_mu": 2 * mu}
    return CheckReport(name, params, seed, samples, INEQUALITY_TOL, diag)


def check_ball_bound(model: LatticeModel, U, V, nu: float, times, seed: int = 0,
                     restarts: int = 20) -> CheckReport:
    """``|chi_U beta_t chi_V|_1^op <= 4 exp(-2 nu delta_UV + 2 nu c' t)``."""
    _require_open(model, "check_ball_bound")
    name = "check_ball_bound"
    u, v = _disjoint(U, V)
    times = _times(times)
    vb = velocity_c_prime(model, nu)
    geo = best_geometry(u, v)
    d = model.n_sites
    mu_, mv_ = cut_mask(d, u), cut_mask(d, v)
    ident = vec(np.eye(d))
    samples = []
    diag_exact = []
    for t, e in zip(times, semigroup_matrices(build_lindbladian(model), times)):
        cut = mu_[:, None] * e * mv_[None, :]
        est = s1_opnorm_lower(cut, restarts=restarts, seed=seed)
        # the cut map is CP, so its norm is |cut'(I)|
        exact = operator_norm(unvec(cut.T @ ident, d).T)
        diag_exact.append(exact)
        bound = ball_envelope(geo.delta, nu, vb.c_prime, t)
        meta = {"t": t, "d_XY": set_distance(u, v), "delta_UV": geo.delta, "exact_cp_norm": exact}
        samples.append(inequality(name, est.value, bound, meta, vacuous=bound > 1.0))
    params = {"model": model.name, "U": u, "V": v, "nu": nu, "times": times,
              "restarts": restarts}
    diag = {"c_prime": vb.c_prime, "b": geo.b, "delta_UV": geo.delta, "exact_cp_norms": diag_exact}
    return CheckReport(name, params, seed, samples, INEQUALITY_TOL, diag)


def check_dual_cone(model: LatticeModel, X, Y, mu: float, eps: float, times,
                    seed: int = 0, n_samples: int = 16, n_pairs: int = 4) -> CheckReport:
    """``|chi_X beta'_t(chi_Y A chi_Y) chi_X| <= C exp(-2 mu (d_XY - c t)) |A|``.

    ``A = I`` is always sampled; by Russo-Dye it attains the norm of this
    CP map, so the reported value is exact up to rounding.
    """
    _require_open(model, "check_dual_cone")
    name = "check_dual_cone"
    x, y = _disjoint(X, Y)
    times = _times(times)
    env, d_xy, pre = cone_envelope(model, x, y, mu, eps)
    d = model.n_sites
    rng = np.random.default_rng(seed)
    observables = [np.eye(d, dtype=complex)] + [random_unitary(rng, d) for _ in range(n_samples - 1)]
    chi_y = np.diag(projector(d, y))
    chi_x = np.diag(projector(d, x))
    gen = build_lindbladian(model)
    dual = adjoint_generator(gen)
    cols = np.stack([vec(chi_y @ a @ chi_y) for a in observables], axis=1)
    evolved = evolve_columns(dual, cols, times)
    samples = []
    for t, block in zip(times, evolved):
        norms = [operator_norm(chi_x @ unvec(block[:, k], d) @ chi_x) for k in range(len(observables))]
        bound = env.envelope(d_xy, t)
        meta = {"t": t, "d_XY": d_xy, "kind": "dual_norm"}
        samples.append(inequality(name, max(norms), bound, meta, vacuous=bound > 1.0))
    # duality cross-check on random (A, rho) pairs
    pairs = [(random_matrix(rng, d), random_density(rng, d)) for _ in range(n_pairs)]
    fwd = evolve_columns(gen, np.stack([vec(r) for _, r in pairs], axis=1), times)
    bwd = evolve_columns(dual, np.stack([vec(a) for a, _ in pairs], axis=1), times)
    worst = 0.0
    for t, fb, bb in zip(times, fwd, bwd):
        for k, (a, rho) in enumerate(pairs):
            lhs = np.trace(unvec(bb[:, k], d) @ rho)
            rhs = np.trace(a @ unvec(fb[:, k], d))
            scale = max(1.0, operator_norm(a) * trace_norm(rho))
            err = abs(lhs - rhs) / scale
            worst = max(worst, err)
            samples.append(threshold(name, err, 1e-10, {"t": t, "pair": k, "kind": "duality"}, a, rho))
    params = {"model": model.name, "X": x, "Y": y, "mu": mu, "eps": eps, "nu": env.nu,
              "times": times, "n_samples": n_samples}
    diag = {"c_prime": env.c_mu, "c": env.c, "C": env.prefactor, "partition_prefactor": pre,
            "d_XY": d_xy, "duality_error": worst}
    return CheckReport(name, params, seed, samples, INEQUALITY_TOL, diag)


# ---------------------------------------------------------------------------
# deformed semigroups


def _etas(nu: float) -> tuple:
    return (nu, -nu) if nu > 0 else (0.0,)


def check_deformed_growth(model: LatticeModel, nu: float, times, seed: int = 0,
                          n_states: int = 32, restarts: int = 20) -> CheckReport:
    """Rank-one ``|beta_{t,i eta}|_1^op <= 4 e^{2 nu c' t}`` and
    ``|beta_{t,i eta}(rho)|_1 <= e^{2 nu c' t} |rho|_1`` on positive states."""
    name = "check_deformed_growth"
    times = _times(times)
    vb = velocity_c_prime(model, nu)
    d = model.n_sites
    rng = np.random.default_rng(seed)
    states = [random_density(rng, d, rank=int(rng.integers(1, d + 1))) for _ in range(n_states)]
    cols = np.stack([vec(r) for r in states], axis=1)
    samples = []
    for eta in _etas(nu):
        gen = build_deformed_generator(model, 1j * eta, -1j * eta)
        mats = semigroup_matrices(gen, times)
        for t, e in zip(times, mats):
            rate = math.exp(2 * nu * vb.c_prime * t)
            est = s1_opnorm_lower(e, restarts=restarts, seed=seed)
            samples.append(inequality(name, est.value, 4 * rate,
                                      {"t": t, "eta": eta, "kind": "opnorm"}))
            out = e @ cols
            for k, rho in enumerate(states):
                g = trace_norm(unvec(out[:, k], d)) / trace_norm(rho)
                samples.append(inequality(name, g, rate,
                                          {"t": t, "eta": eta, "kind": "positive", "state": k}, rho))
    params = {"model": model.name, "nu": nu, "times": times, "n_states": n_states,
              "restarts": restarts}
    return CheckReport(name, params, seed, samples, INEQUALITY_TOL, {"c_prime": vb.c_prime})


def check_deformed_positivity(model: LatticeModel, nu: float, times, seed: int = 0,
                              n_states: int = 32) -> CheckReport:
    """``min spec beta_{t,i eta}(rho) >= -1e-9 |beta_{t,i eta}(rho)|_1`` for rho >= 0."""
    name = "check_deformed_positivity"
    times = _times(times)
    if nu < 0 or (nu > 0 and not nu < model.decay_rate):
        raise StripError(f"nu={nu} leaves the analyticity strip a = {model.decay_rate}")
    d = model.n_sites
    rng = np.random.default_rng(seed)
    states = [random_density(rng, d, rank=int(rng.integers(1, d + 1))) for _ in range(max(0, n_states - 2))]
    # a wave packet localized mid-chain
    psi = np.exp(-0.5 * (np.arange(d) - d // 2) ** 2).astype(complex)
    psi /= np.linalg.norm(psi)
    states += [np.outer(psi, psi.conj()), np.eye(d) / d]
    cols = np.stack([vec(r) for r in states], axis=1)
    samples = []
    for eta in _etas(nu):
        gen = build_deformed_generator(model, 1j * eta, -1j * eta)
        for t, block in zip(times, evolve_columns(gen, cols, times)):
            for k, rho in enumerate(states):
                out = unvec(block[:, k], d)
                herm = 0.5 * (out + out.conj().T)
                lam_min = float(np.linalg.eigvalsh(herm)[0])
                rel = -lam_min / max(trace_norm(out), 1e-300)
                samples.append(inequality(name, rel, 0.0, {"t": t, "eta": eta, "state": k}, rho))
    params = {"model": model.name, "nu": nu, "times": times, "n_states": len(states)}
    return CheckReport(name, params, seed, samples, INEQUALITY_TOL)


def check_contraction_and_growth(model: LatticeModel, zeta: complex, zeta_t: complex, times,
                                 seed: int = 0, restarts: int = 20) -> CheckReport:
    """``|e^{Lt}|_1^op <= 4`` and
    ``|e^{L_{z,zt} t}|_1^op <= exp(4t(|G_{z,zt}| + |Im H_z| + |Im H_zt|))``."""
    name = "check_contraction_and_growth"
    zeta, zeta_t = complex(zeta), complex(zeta_t)
    if zeta.real != 0 or zeta_t.real != 0:
        raise ValueError("check_contraction_and_growth needs Re zeta = Re zeta_tilde = 0")
    times = _times(times)
    h = build_hamiltonian(model)
    per = model.periodic
    l0, g = deformed_parts(model, zeta, zeta_t)
    g_norm = s1_opnorm_lower(g, restarts=restarts, seed=seed).value
    im_z = operator_norm(imag_part(deform_matrix(h, zeta, per)))
    im_zt = operator_norm(imag_part(deform_matrix(h, zeta_t, per)))
    rate = g_norm + im_z + im_zt
    lind = build_lindbladian(model)
    deformed = Superoperator(l0 + g, model.n_sites, "deformed", {"zeta": zeta, "zeta_tilde": zeta_t})
    samples = []
    for t, e0, ez in zip(times, semigroup_matrices(lind, times), semigroup_matrices(deformed, times)):
        v0 = s1_opnorm_lower(e0, restarts=restarts, seed=seed).value
        vz = s1_opnorm_lower(ez, restarts=restarts, seed=seed).value
        samples.append(inequality(name, v0, 4.0, {"t": t, "kind": "contraction"}))
        samples.append(inequality(name, vz, math.exp(4 * t * rate), {"t": t, "kind": "deformed"}))
    params = {"model": model.name, "zeta": zeta, "zeta_tilde": zeta_t, "times": times,
              "restarts": restarts}
    diag = {"G_norm_lower": g_norm, "ImH_zeta": im_z, "ImH_zeta_tilde": im_zt}
    return CheckReport(name, params, seed, samples, INEQUALITY_TOL, diag)


def check_analyticity(model: LatticeModel, t: float, zeta0: complex = 0.0, radius: float = 0.05,
                      samples: int = 8, seed: int = 0, key_zeta: complex = 0.3j,
                      U=None, V=None) -> CheckReport:
    """Mean-value property of ``zeta -> exp(L_{zeta,-zeta} t)`` on a small circle and
    the conjugation identity ``chi_U beta_t chi_V = chi_U T_{-z,z} beta_{t,z} T_{z,-z} chi_V``."""
    _require_open(model, "check_analyticity")
    name = "check_analyticity"
    zeta0 = complex(zeta0)
    if not 0 <= radius <= 0.1:
        raise ValueError(f"radius must lie in [0, 0.1], got {radius}")
    if not abs(zeta0.imag) + radius < model.decay_rate:
        raise StripError(f"disk |zeta - {zeta0}| <= {radius} escapes the strip a = {model.decay_rate}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    d = model.n_sites
    out = []

    def flow(z):
        return matrix_exp(build_deformed_generator(model, z, -z).matrix, t)

    centre = flow(zeta0)
    if radius == 0:
        err = 0.0
    else:
        ring = [zeta0 + radius * np.exp(2j * np.pi * k / samples) for k in range(samples)]
        avg = sum(flow(z) for z in ring) / samples
        err = float(np.max(np.abs(avg - centre)) / np.max(np.abs(centre)))
    out.append(threshold(name, err, 1e-6, {"kind": "mean_value", "zeta0": zeta0, "radius": radius}))

    if U is None or V is None:
        third = max(1, d // 3)
        U, V = range(0, third), range(d - third, d)
    u, v = sorted(set(U)), sorted(set(V))
    rng = np.random.default_rng(seed)
    lam = random_matrix(rng, d)
    base = matrix_exp(build_lindbladian(model).matrix, t)
    mu_, mv_ = cut_mask(d, u), cut_mask(d, v)
    lhs = mu_ * (base @ (mv_ * vec(lam)))
    real_zeta = complex(abs(complex(key_zeta)) or 0.3)
    for z, limit in ((complex(key_zeta), 1e-8), (real_zeta, 1e-12)):
        fwd = deformation_superoperator(d, z, -z)
        back = deformation_superoperator(d, -z, z)
        rhs = mu_ * (back * (flow(z) @ (fwd * (mv_ * vec(lam)))))
        # the real (isometric) case is measured against the input, whose norm
        # bounds the output; the strict relative error of a tiny lhs is rounding noise
        scale = np.linalg.norm(lhs) if z.imag else np.linalg.norm(mv_ * vec(lam))
        scale = max(scale, 1e-300)
        kerr = float(np.linalg.norm(lhs - rhs) / scale)
        out.append(threshold(name, kerr, limit, {"kind": "key_relation", "zeta": z}, lam))
    params = {"model": model.name, "t": t, "zeta0": zeta0, "radius": radius, "samples": samples,
              "key_zeta": complex(key_zeta), "U": u, "V": v}
    return CheckReport(name, params, seed, out, 0.0)


# ---------------------------------------------------------------------------
# sub-completely positive maps and the trace Cauchy-Schwarz inequality


def psi_prime(us: Sequence[np.ndarray], vs: Sequence[np.ndarray], a: np.ndarray) -> np.ndarray:
    """``sum_j V_j* A U_j``."""
    return sum(v.conj().T @ a @ u for u, v in zip(us, vs))


def g_prime_uv(us, vs, a: np.ndarray) -> np.ndarray:
    """``psi'_UV(A) - 1/2 {psi'_UV(I), A}``."""
    one = psi_prime(us, vs, np.eye(a.shape[0]))
    return psi_prime(us, vs, a) - 0.5 * (one @ a + a @ one)


def g_uv(us, vs, lam: np.ndarray) -> np.ndarray:
    """``sum_j U_j lam V_j* - 1/2 {V_j* U_j, lam}`` (predual of ``g_prime_uv``)."""
    out = np.zeros_like(lam, dtype=complex)
    for u, v in zip(us, vs):
        vu = v.conj().T @ u
        out += u @ lam @ v.conj().T - 0.5 * (vu @ lam + lam @ vu)
    return out


def family_cauchy_schwarz(as_: Sequence[np.ndarray], bs: Sequence[np.ndarray]) -> tuple:
    """``(|sum A*B|, |sum A*A|^1/2 |sum B*B|^1/2)``."""
    lhs = operator_norm(sum(a.conj().T @ b for a, b in zip(as_, bs)))
    rhs = math.sqrt(operator_norm(sum(a.conj().T @ a for a in as_))
                    * operator_norm(sum(b.conj().T @ b for b in bs)))
    return lhs, rhs


def check_subcp(seed: int = 0, dims: Sequence[int] = (2, 3, 4, 5, 6),
                family_sizes: Sequence[int] = (1, 2, 3, 4, 5), n_instances: int = 150) -> CheckReport:
    name = "check_subcp"
    samples = []
    for i in range(n_instances):
        rng = np.random.default_rng([seed, i])
        d = int(rng.choice(dims))
        j = int(rng.choice(family_sizes))
        scale = rng.uniform(0.2, 3.0)
        us = [random_matrix(rng, d, scale) for _ in range(j)]
        vs = [random_matrix(rng, d, scale) for _ in range(j)]
        a = random_matrix(rng, d, rng.uniform(0.2, 3.0))
        lam = random_matrix(rng, d)
        n_uu = operator_norm(psi_prime(us, us, np.eye(d)))
        n_vv = operator_norm(psi_prime(vs, vs, np.eye(d)))
        cross = 3 * math.sqrt(n_uu * n_vv)
        meta = {"instance": i, "d": d, "J": j}
        arrays = (*us, *vs, a, lam)
        samples.append(inequality(name, operator_norm(g_prime_uv(us, vs, a)), cross * operator_norm(a),
                                  {**meta, "kind": "G'_UV"}, *arrays, tolerance=CS_TOL))
        samples.append(inequality(name, trace_norm(g_uv(us, vs, lam)), cross * trace_norm(lam),
                                  {**meta, "kind": "G_UV"}, *arrays, tolerance=CS_TOL))
        samples.append(inequality(name, operator_norm(g_prime_uv(us, us, a)), 2 * n_uu * operator_norm(a),
                                  {**meta, "kind": "G'"}, *arrays, tolerance=CS_TOL))
        lhs, rhs = family_cauchy_schwarz(us, vs)
        samples.append(inequality(name, lhs, rhs, {**meta, "kind": "family_cs"}, *arrays,
                                  tolerance=CS_TOL))
    params = {"dims": list(dims), "family_sizes": list(family_sizes), "n_instances": n_instances}
    return CheckReport(name, params, seed, samples, CS_TOL)


def kraus_apply(kraus: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in kraus)


def cs_trace_sides(kraus, a, b, t, v, rho) -> tuple:
    """``|Tr(A beta(T rho V) B)|`` and
    ``Tr(A beta(T rho T*) A*)^1/2 Tr(B* beta(V* rho V) B)^1/2``."""
    lhs = abs(np.trace(a @ kraus_apply(kraus, t @ rho @ v) @ b))
    left = np.trace(a @ kraus_apply(kraus, t @ rho @ t.conj().T) @ a.conj().T).real
    right = np.trace(b.conj().T @ kraus_apply(kraus, v.conj().T @ rho @ v) @ b).real
    return float(lhs), math.sqrt(max(left, 0.0) * max(right, 0.0))


def check_cs_trace(seed: int = 0, dims: Sequence[int] = (2, 3, 4, 5), n_instances: int = 100,
                   max_kraus: int = 4) -> CheckReport:
    name = "check_cs_trace"
    samples = []
    for i in range(n_instances):
        rng = np.random.default_rng([seed, i])
        d = int(rng.choice(dims))
        n_k = int(rng.integers(1, max_kraus + 1))
        kraus = [random_matrix(rng, d) for _ in range(n_k)]
        a, b, t, v = (random_matrix(rng, d, rng.uniform(0.2, 3.0)) for _ in range(4))
        rho = random_density(rng, d, rank=int(rng.integers(1, d + 1)))
        lhs, rhs = cs_trace_sides(kraus, a, b, t, v, rho)
        samples.append(inequality(name, lhs, rhs, {"instance": i, "d": d, "n_kraus": n_k},
                                  *kraus, a, b, t, v, rho, tolerance=CS_TOL))
    params = {"dims": list(dims), "n_instances": n_instances, "max_kraus": max_kraus}
    return CheckReport(name, params, seed, samples, CS_TOL)


CHECKS = {
    "check_leakage_cone": check_leakage_cone,
    "check_ball_bound": check_ball_bound,
    "check_deformed_growth": check_deformed_growth,
    "check_deformed_positivity": check_deformed_positivity,
    "check_subcp": check_subcp,
    "check_cs_trace": check_cs_trace,
    "check_contraction_and_growth": check_contraction_and_growth,
    "check_analyticity": check_analyticity,
    "check_dual_cone": check_dual_cone,
}
