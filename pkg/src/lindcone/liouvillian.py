"""Lindblad generators, their analytic deformations and the Heisenberg dual.

Operators are vectorized row-major (``vec(rho) = rho.reshape(-1)``), so the
two-sided product ``A rho B`` is the superoperator ``kron(A, B.T)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .model import (
    LatticeModel,
    ModelError,
    build_hamiltonian,
    check_strip,
    deform_matrix,
)

log = logging.getLogger(__name__)

KINDS = ("lindblad", "deformed", "adjoint", "exponential", "map")


def vec(op: np.ndarray) -> np.ndarray:
    return np.asarray(op).reshape(-1)


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.shape[0])))
    if dim * dim != v.shape[0]:
        raise ValueError(f"vector of length {v.shape[0]} is not a vectorized {dim}x{dim} operator")
    return v.reshape(dim, dim)


def sandwich(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of ``lam -> a @ lam @ b``."""
    return np.kron(a, np.asarray(b).T)


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Dense ``d^2 x d^2`` matrix acting on row-major vectorized operators."""

    matrix: np.ndarray
    dim: int
    kind: str = "map"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.dim * self.dim
        if m.shape != (n, n):
            raise ValueError(f"superoperator for d={self.dim} must be {n}x{n}, got {m.shape}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown superoperator kind {self.kind!r}")
        object.__setattr__(self, "matrix", m)

    def __call__(self, op: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(op), self.dim)

    def trace_defect(self) -> float:
        """``|vec(I)^* M| / |M|``: zero iff the generator preserves the trace."""
        ident = vec(np.eye(self.dim))
        scale = np.linalg.norm(self.matrix)
        return float(np.linalg.norm(ident.conj() @ self.matrix) / scale) if scale else 0.0

    def unit_defect(self) -> float:
        """``|M vec(I)| / |M|``: zero iff the (dual) generator kills the identity."""
        ident = vec(np.eye(self.dim))
        scale = np.linalg.norm(self.matrix)
        return float(np.linalg.norm(self.matrix @ ident) / scale) if scale else 0.0

    def to_json(self) -> dict:
        """Debug dump: row-major flat real/imag arrays with a dims header."""
        n = self.dim * self.dim
        return {
            "dims": [n, n],
            "dim": self.dim,
            "kind": self.kind,
            "re": self.matrix.real.reshape(-1).tolist(),
            "im": self.matrix.imag.reshape(-1).tolist(),
        }


def _dissipator(pairs, d: int) -> np.ndarray:
    """``sum_j A_j lam B_j - 1/2 C_j lam - 1/2 lam D_j`` from (A, B, C, D) tuples."""
    eye = np.eye(d)
    out = np.zeros((d * d, d * d), dtype=complex)
    for a, b, c, dd in pairs:
        out += sandwich(a, b) - 0.5 * sandwich(c, eye) - 0.5 * sandwich(eye, dd)
    return out


def _hamiltonian_part(h_left: np.ndarray, h_right: np.ndarray) -> np.ndarray:
    eye = np.eye(h_left.shape[0])
    return -1j * (sandwich(h_left, eye) - sandwich(eye, h_right))


def build_lindbladian(model: LatticeModel) -> Superoperator:
    """``L(rho) = -i[H, rho] + sum_j (W rho W* - 1/2 {W*W, rho})``."""
    d = model.n_sites
    h = build_hamiltonian(model)
    pairs = []
    for w in model.jump_matrices:
        ws = w.conj().T
        pairs.append((w, ws, ws @ w, ws @ w))
    m = _hamiltonian_part(h, h) + _dissipator(pairs, d)
    return Superoperator(m, d, "lindblad", {"model": model.name})


def deformed_parts(
    model: LatticeModel, zeta: complex, zeta_t: complex
) -> tuple[np.ndarray, np.ndarray]:
    """Hamiltonian and dissipative parts of the deformed generator.

    Each operator is deformed individually:
    ``L0 lam = -i(H_z lam - lam H_zt)`` and
    ``G lam = sum_j W_z lam (W*)_zt - 1/2 (W*)_z W_z lam - 1/2 lam (W*)_zt W_zt``.
    """
    a = model.decay_rate
    zeta = check_strip(zeta, a, "zeta")
    zeta_t = check_strip(zeta_t, a, "zeta_tilde")
    per = model.periodic
    h = build_hamiltonian(model)
    l0 = _hamiltonian_part(deform_matrix(h, zeta, per), deform_matrix(h, zeta_t, per))
    pairs = []
    for w in model.jump_matrices:
        ws = w.conj().T
        w_z = deform_matrix(w, zeta, per)
        w_zt = deform_matrix(w, zeta_t, per)
        ws_z = deform_matrix(ws, zeta, per)
        ws_zt = deform_matrix(ws, zeta_t, per)
        pairs.append((w_z, ws_zt, ws_z @ w_z, ws_zt @ w_zt))
    return l0, _dissipator(pairs, model.n_sites)


def build_deformed_generator(
    model: LatticeModel, zeta: complex, zeta_t: complex
) -> Superoperator:
    l0, g = deformed_parts(model, zeta, zeta_t)
    return Superoperator(
        l0 + g,
        model.n_sites,
        "deformed",
        {"model": model.name, "zeta": complex(zeta), "zeta_tilde": complex(zeta_t)},
    )


def deformation_superoperator(d: int, zeta: complex, zeta_t: complex) -> np.ndarray:
    """Diagonal of ``T_{zeta, zeta_t}: lam -> T_zeta lam T_zeta_t^{-1}`` (open chain).

    ``T_zeta`` multiplies by ``exp(-i zeta x)``.
    """
    x = np.arange(d)
    left = np.exp(-1j * complex(zeta) * x)
    right = np.exp(1j * complex(zeta_t) * x)
    return np.outer(left, right).reshape(-1)


def adjoint_generator(gen: Superoperator) -> Superoperator:
    """Adjoint with respect to the pairing ``Tr(A lam)``.

    ``Tr(L'(A) lam) = Tr(A L(lam))``.
    """
    d = gen.dim
    m4 = gen.matrix.reshape(d, d, d, d)
    adj = m4.transpose(3, 2, 1, 0).reshape(d * d, d * d)
    params = dict(gen.params)
    params["source"] = gen.kind
    return Superoperator(adj, d, "adjoint", params)


def build_heisenberg_generator(model: LatticeModel) -> Superoperator:
    """Direct assembly of ``L'A = i[H, A] + sum_j (W* A W - 1/2 {W*W, A})``."""
    d = model.n_sites
    h = build_hamiltonian(model)
    pairs = []
    for w in model.jump_matrices:
        ws = w.conj().T
        pairs.append((ws, w, ws @ w, ws @ w))
    m = -_hamiltonian_part(h, h) + _dissipator(pairs, d)
    return Superoperator(m, d, "adjoint", {"model": model.name, "source": "lindblad"})


def _require_imaginary(zeta: complex) -> complex:
    zeta = complex(zeta)
    if zeta.real != 0:
        raise ValueError(f"G-tilde is defined for purely imaginary zeta, got {zeta}")
    return zeta


def build_gtilde(model: LatticeModel, zeta: complex) -> np.ndarray:
    """``1/2 sum_j (W_z* W_z - 1/2 W_{-z}* W_z - 1/2 W_z* W_{-z})`` for ``Re zeta = 0``.

    The result is symmetrized; the pre-symmetrization defect is logged.
    """
    zeta = check_strip(_require_imaginary(zeta), model.decay_rate)
    per = model.periodic
    d = model.n_sites
    g = np.zeros((d, d), dtype=complex)
    scale = 0.0
    for w in model.jump_matrices:
        wp = deform_matrix(w, zeta, per)
        wm = deform_matrix(w, -zeta, per)
        term = wp.conj().T @ wp
        g += term - 0.5 * wm.conj().T @ wp - 0.5 * wp.conj().T @ wm
        # G-tilde is a near-cancellation (O(eta^2)), so the defect is judged
        # against the size of the individual terms
        scale += float(np.max(np.abs(term)))
    g *= 0.5
    defect = np.max(np.abs(g - g.conj().T)) if g.size else 0.0
    if defect > 1e-12 * max(scale, 1e-300):
        log.warning("G-tilde asymmetry %.3e (scale %.3e) at zeta=%s", defect, scale, zeta)
    else:
        log.debug("G-tilde asymmetry %.3e at zeta=%s", defect, zeta)
    return 0.5 * (g + g.conj().T)


def jump_derivative(model: LatticeModel, w: np.ndarray) -> np.ndarray:
    """``W' = -i [x, W]`` (minimal-image displacement on a ring)."""
    return -1j * model.displacement * w


def build_gprime(model: LatticeModel) -> np.ndarray:
    """``1/2 sum_j i (W* W' - W'* W)``, the first-order coefficient of ``G-tilde_{i eta}``."""
    d = model.n_sites
    g = np.zeros((d, d), dtype=complex)
    for w in model.jump_matrices:
        wd = jump_derivative(model, w)
        g += 1j * (w.conj().T @ wd - wd.conj().T @ w)
    g *= 0.5
    return 0.5 * (g + g.conj().T)


def dissipative_trace_functional(model: LatticeModel, zeta: complex, rho: np.ndarray) -> complex:
    """``Tr(G_{zeta,-zeta} rho)`` evaluated through the deformed generator."""
    _, g = deformed_parts(model, zeta, -zeta)
    d = model.n_sites
    return complex(np.trace(unvec(g @ vec(rho), d)))


def random_model_jumps(rng: np.random.Generator, d: int, n_jumps: int) -> list:
    """Dense random complex jump matrices (helper for randomized checks)."""
    if d < 1 or n_jumps < 0:
        raise ModelError("need d >= 1 and n_jumps >= 0")
    return [
        (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2 * d)
        for _ in range(n_jumps)
    ]
