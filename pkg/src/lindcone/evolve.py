"""Semigroups, propagation and trace-class norm machinery."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .liouvillian import Superoperator, unvec, vec

MAX_SUPEROP_DIM = 4096

# Pade coefficients b_0..b_m and 1-norm thresholds theta_m (Higham 2005)
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0, 13: 5.371920351148152e0}


class PropagationOverflow(OverflowError):
    """Non-finite result while propagating a (strongly deformed) generator."""

    def __init__(self, t: float, zeta=None):
        self.t = t
        self.zeta = zeta
        where = f" at zeta={zeta}" if zeta is not None else ""
        super().__init__(f"propagation overflowed at t={t}{where}")


def _pade(a: np.ndarray, m: int) -> np.ndarray:
    b = _PADE[m]
    n = a.shape[0]
    ident = np.eye(n, dtype=a.dtype)
    a2 = a @ a
    if m == 13:
        a4 = a2 @ a2
        a6 = a2 @ a4
        u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
                 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
        v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
             + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    else:
        u = b[1] * ident
        v = b[0] * ident
        power = ident
        for k in range(1, m // 2 + 1):
            power = power @ a2
            u = u + b[2 * k + 1] * power
            v = v + b[2 * k] * power
        u = a @ u
    return np.linalg.solve(v - u, v + u)


def matrix_exp(m: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(M t)`` by scaling and squaring with a diagonal Pade approximant."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix_exp needs a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_SUPEROP_DIM:
        raise ValueError(f"dimension {m.shape[0]} exceeds the dense limit {MAX_SUPEROP_DIM}")
    a = np.asarray(m * t, dtype=complex if np.iscomplexobj(m) or np.iscomplexobj(t) else float)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix_exp input has non-finite entries")
    if a.shape[0] == 0:
        return a.copy()
    norm = np.linalg.norm(a, 1)
    for deg in (3, 5, 7, 9):
        if norm <= _THETA[deg]:
            return _pade(a, deg)
    s = max(0, int(math.ceil(math.log2(norm / _THETA[13])))) if norm > 0 else 0
    out = _pade(a / 2.0**s, 13)
    for _ in range(s):
        out = out @ out
    return out


def exp_generator(gen: Superoperator, t: float) -> Superoperator:
    """``exp(L t)`` as a superoperator; raises PropagationOverflow on non-finite output."""
    with np.errstate(over="ignore", invalid="ignore"):
        e = matrix_exp(gen.matrix, t)
    if not np.all(np.isfinite(e)):
        raise PropagationOverflow(t, gen.params.get("zeta"))
    params = dict(gen.params)
    params.update(source=gen.kind, t=float(t))
    return Superoperator(e, gen.dim, "exponential", params)


@dataclass
class Trajectory:
    times: list
    states: list
    provenance: str

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("trajectory times must be strictly ascending")


class _StepCache:
    """Caches ``exp(L dt)`` per time increment."""

    def __init__(self, gen: Superoperator):
        self.gen = gen
        self._cache: dict[float, np.ndarray] = {}

    def step(self, dt: float) -> np.ndarray:
        key = round(float(dt), 14)
        if key not in self._cache:
            self._cache[key] = exp_generator(self.gen, dt).matrix
        return self._cache[key]


def evolve_columns(gen: Superoperator, columns: np.ndarray, times) -> list:
    """Apply ``exp(L t)`` to every column of a ``d^2 x k`` block at each time.

    Exponentials are computed once per distinct increment between times.
    """
    times = [float(t) for t in times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("times must be strictly ascending")
    cache = _StepCache(gen)
    cur = np.asarray(columns, dtype=complex)
    prev = 0.0
    out = []
    for t in times:
        dt = t - prev
        if dt != 0:
            cur = cache.step(dt) @ cur
        if not np.all(np.isfinite(cur)):
            raise PropagationOverflow(t, gen.params.get("zeta"))
        out.append(cur.copy())
        prev = t
    return out


def propagate(gen: Superoperator, rho0: np.ndarray, times) -> Trajectory:
    """States ``exp(L t) rho0`` at the requested (ascending) times."""
    times = [float(t) for t in times]
    if gen.kind == "lindblad" and times and times[0] < 0:
        raise ValueError("a Lindblad semigroup is only propagated forward (t >= 0)")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (gen.dim, gen.dim):
        raise ValueError(f"initial state must be {gen.dim}x{gen.dim}, got {rho0.shape}")
    cols = evolve_columns(gen, vec(rho0)[:, None], times)
    states = [unvec(c[:, 0].copy(), gen.dim) for c in cols]
    return Trajectory(times, states, gen.kind)


def trace_norm(lam: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(np.asarray(lam), compute_uv=False)))


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def min_eigenvalue(rho: np.ndarray, atol: float = 1e-10) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    Hermiticity is checked to ``atol * max(1, max|rho|)``.
    """
    rho = np.asarray(rho)
    scale = max(1.0, float(np.max(np.abs(rho)))) if rho.size else 1.0
    defect = float(np.max(np.abs(rho - rho.conj().T))) if rho.size else 0.0
    if defect > atol * scale:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
    return float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])


def _abs_hermitian(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return (v * np.abs(w)) @ v.conj().T


def quadrant_decomposition(lam: np.ndarray) -> tuple:
    """Split ``lam = lp - lm + i (lp' - lm')`` into four positive parts."""
    lam = np.asarray(lam, dtype=complex)
    re = 0.5 * (lam + lam.conj().T)
    im = (lam - lam.conj().T) / 2j
    are, aim = _abs_hermitian(re), _abs_hermitian(im)
    return 0.5 * (are + re), 0.5 * (are - re), 0.5 * (aim + im), 0.5 * (aim - im)


@dataclass
class NormEstimate:
    value: float
    kind: str
    restarts_used: int
    witness: tuple | None = None


def _as_matrix(op) -> tuple[np.ndarray, int]:
    if isinstance(op, Superoperator):
        return op.matrix, op.dim
    m = np.asarray(op)
    d = int(round(math.sqrt(m.shape[0])))
    if m.ndim != 2 or m.shape[0] != m.shape[1] or d * d != m.shape[0]:
        raise ValueError(f"not a superoperator matrix: shape {m.shape}")
    return m, d


def _unit(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    return z / np.linalg.norm(z)


def _ascend(m: np.ndarray, mt: np.ndarray, d: int, psi, phi, max_iter: int, rtol: float):
    """Alternating maximization of ``|M(|psi><phi|)|_1`` over unit vectors.

    With ``A`` the adjoint polar factor of the current output, the next pair
    is the top singular pair of ``M'(A)``; the objective never decreases.
    """
    best, best_pair, prev = 0.0, (psi, phi), None
    for _ in range(max_iter):
        out = unvec(m @ np.outer(psi, phi.conj()).reshape(-1), d)
        u, s, vh = np.linalg.svd(out)
        val = float(s.sum())
        if val > best:
            best, best_pair = val, (psi, phi)
        if prev is not None and val - prev <= rtol * max(val, 1e-300):
            break
        prev = val
        a = vh.conj().T @ u.conj().T if val > 0 else np.eye(d, dtype=complex)
        # B = M'(A), from vec(B^T) = M^T vec(A^T)
        b = unvec(mt @ a.T.reshape(-1), d).T
        ub, sb, vbh = np.linalg.svd(b)
        if sb[0] <= 0.0:
            break
        psi, phi = vbh[0].conj(), ub[:, 0]
    return best, best_pair[0], best_pair[1]


def s1_opnorm_lower(
    op,
    restarts: int = 20,
    seed: int = 0,
    max_iter: int = 200,
    rtol: float = 1e-9,
    jobs: int = 1,
) -> NormEstimate:
    """Lower bound on the trace-class operator norm of a linear map.

    The norm is attained on rank-one inputs ``|psi><phi|``; each restart starts
    from a seeded random pair (restart ``k`` uses ``default_rng([seed, k])``,
    so more restarts can only raise the result) and climbs by alternating
    maximization.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    m, d = _as_matrix(op)
    mt = m.T

    def one(k: int):
        rng = np.random.default_rng([seed, k])
        psi, phi = _unit(rng, d), _unit(rng, d)
        return _ascend(m, mt, d, psi, phi, max_iter, rtol)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, range(restarts)))
    else:
        results = [one(k) for k in range(restarts)]
    # first maximum in restart order keeps the witness schedule-independent
    best = max(range(restarts), key=lambda k: (results[k][0], -k))
    val, psi, phi = results[best]
    return NormEstimate(val, "lower_bound", restarts, (psi, phi))
