"""Finite 1D lattice models, jump families and the exponential deformation.

Sites are labelled ``0..d-1`` and the Hilbert space is ``C^d`` in the position
basis.  The deformation of a matrix by the complex parameter ``zeta`` is

    A_zeta[x, y] = A[x, y] * exp(-1j * zeta * (x - y)),

i.e. conjugation by multiplication with ``exp(-1j * zeta * x)``.  On a periodic
ring the displacement ``x - y`` is replaced by its minimal image in
``[-d/2, d/2)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Sequence

import numpy as np

BOUNDARIES = ("open", "periodic")
JUMP_KINDS = ("dephasing", "hop", "custom")

# relative Hermiticity tolerance for matrices tagged hermitian
HERMITIAN_RTOL = 1e-12


class ModelError(ValueError):
    """Raised when a lattice model violates one of its invariants."""


class StripError(ValueError):
    """Raised when a deformation parameter leaves the analyticity strip."""


@dataclass(frozen=True, eq=False)
class JumpSpec:
    """One jump operator ``W_j``.

    ``dephasing`` gives ``sqrt(rate)|x><x|``, ``hop`` gives
    ``sqrt(rate)|x><x+direction|`` and ``custom`` carries an explicit matrix.
    """

    kind: str
    site: int | None = None
    direction: int | None = None
    rate: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in JUMP_KINDS:
            raise ModelError(f"unknown jump kind {self.kind!r}")
        if self.kind == "custom":
            if self.matrix is None:
                raise ModelError("custom jump needs a matrix")
            m = np.asarray(self.matrix, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ModelError(f"custom jump matrix must be square, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ModelError("custom jump matrix has non-finite entries")
            object.__setattr__(self, "matrix", m)
            return
        if self.site is None or self.rate is None:
            raise ModelError(f"{self.kind} jump needs 'site' and 'rate'")
        if not self.rate >= 0:
            raise ModelError(f"jump rate must be >= 0, got {self.rate}")
        if self.kind == "hop" and self.direction not in (1, -1):
            raise ModelError(f"hop direction must be +1 or -1, got {self.direction}")

    @classmethod
    def dephasing(cls, site: int, rate: float) -> JumpSpec:
        return cls("dephasing", site=int(site), rate=float(rate))

    @classmethod
    def hop(cls, site: int, direction: int, rate: float) -> JumpSpec:
        return cls("hop", site=int(site), direction=int(direction), rate=float(rate))

    @classmethod
    def custom(cls, matrix) -> JumpSpec:
        return cls("custom", matrix=np.asarray(matrix, dtype=complex))

    def realize(self, n_sites: int, periodic: bool = False) -> np.ndarray:
        """Dense ``n_sites x n_sites`` matrix of this jump."""
        if self.kind == "custom":
            if self.matrix.shape != (n_sites, n_sites):
                raise ModelError(
                    f"custom jump has shape {self.matrix.shape}, model has d={n_sites}"
                )
            return self.matrix.copy()
        x = self.site
        if not 0 <= x < n_sites:
            raise ModelError(f"jump site {x} outside 0..{n_sites - 1}")
        w = np.zeros((n_sites, n_sites), dtype=complex)
        amp = math.sqrt(self.rate)
        if self.kind == "dephasing":
            w[x, x] = amp
            return w
        y = x + self.direction
        if periodic:
            y %= n_sites
        elif not 0 <= y < n_sites:
            raise ModelError(f"hop jump from site {x} to {y} leaves the open chain")
        w[x, y] = amp
        return w

    def to_dict(self) -> dict:
        if self.kind == "custom":
            return {
                "kind": "custom",
                "re": self.matrix.real.tolist(),
                "im": self.matrix.imag.tolist(),
            }
        out = {"kind": self.kind, "site": self.site, "rate": self.rate}
        if self.kind == "hop":
            out["direction"] = self.direction
        return out


@dataclass(frozen=True, eq=False)
class LatticeModel:
    """A finite chain with hopping kernel, on-site potential and jumps.

    ``hopping`` maps an offset ``r = x - y != 0`` to the amplitude ``t_r``.
    ``decay_rate`` is the declared analyticity width ``a`` (``inf`` for
    finite-range hopping); deformation parameters must satisfy
    ``|Im zeta| < decay_rate``.
    """

    n_sites: int
    hopping: dict = field(default_factory=dict)
    potential: np.ndarray | None = None
    jumps: tuple = ()
    boundary: str = "open"
    decay_rate: float = math.inf
    decay_prefactor: float | None = None
    name: str = "custom"
    catalog: dict | None = None

    def __post_init__(self):
        d = int(self.n_sites)
        if d < 1:
            raise ModelError(f"n_sites must be positive, got {self.n_sites}")
        object.__setattr__(self, "n_sites", d)
        if self.boundary not in BOUNDARIES:
            raise ModelError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        hop = {int(r): complex(t) for r, t in dict(self.hopping).items()}
        object.__setattr__(self, "hopping", hop)
        v = np.zeros(d) if self.potential is None else np.asarray(self.potential, dtype=float)
        if v.shape != (d,):
            raise ModelError(f"potential must have length {d}, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ModelError("potential has non-finite entries")
        object.__setattr__(self, "potential", v)
        object.__setattr__(self, "jumps", tuple(self.jumps))
        a = float(self.decay_rate)
        if not a > 0:
            raise ModelError(f"decay_rate must be > 0, got {self.decay_rate}")
        object.__setattr__(self, "decay_rate", a)
        self._check_hopping()
        # realizing every jump validates sites and custom shapes
        _ = self.jump_matrices

    def _check_hopping(self):
        d = self.n_sites
        for r, t in self.hopping.items():
            if r == 0:
                raise ModelError("hopping offset 0 is not allowed; use the potential")
            limit = d / 2 if self.periodic else d
            if abs(r) >= limit:
                raise ModelError(
                    f"hopping offset {r} too long for {self.boundary} chain of {d} sites"
                )
            if not np.isfinite(t):
                raise ModelError(f"hopping amplitude at offset {r} is not finite")
        check_hermitian_hopping(self.hopping)
        if self.decay_prefactor is not None:
            for r, t in self.hopping.items():
                if abs(t) > self.decay_prefactor * math.exp(-self.decay_rate * abs(r)) * (1 + 1e-12):
                    raise ModelError(
                        f"|t_{r}| = {abs(t):.6g} exceeds C e^(-a|r|) with "
                        f"C={self.decay_prefactor}, a={self.decay_rate}"
                    )

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    @property
    def dim(self) -> int:
        return self.n_sites

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.n_sites, dtype=float)

    @cached_property
    def jump_matrices(self) -> tuple:
        return tuple(j.realize(self.n_sites, self.periodic) for j in self.jumps)

    @cached_property
    def displacement(self) -> np.ndarray:
        return displacement_matrix(self.n_sites, self.periodic)

    def with_jumps(self, jumps: Sequence[JumpSpec]) -> LatticeModel:
        return LatticeModel(
            n_sites=self.n_sites,
            hopping=self.hopping,
            potential=self.potential,
            jumps=tuple(jumps),
            boundary=self.boundary,
            decay_rate=self.decay_rate,
            decay_prefactor=self.decay_prefactor,
            name=self.name,
        )

    def to_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "boundary": self.boundary,
            "hopping": [
                {"offset": r, "re": t.real, "im": t.imag}
                for r, t in sorted(self.hopping.items())
            ],
            "potential": self.potential.tolist(),
            "decay_rate": self.decay_rate if math.isfinite(self.decay_rate) else None,
            "jumps": [j.to_dict() for j in self.jumps],
        }


def check_hermitian_hopping(hopping: dict) -> None:
    """Reject hopping maps with ``t_{-r} != conj(t_r)``, naming the offset."""
    for r, t in hopping.items():
        partner = hopping.get(-r, 0.0)
        if abs(partner - np.conj(t)) > 1e-12 * max(1.0, abs(t)):
            raise ModelError(
                f"non-Hermitian hopping at offset {r}: t_{r}={t}, t_{-r}={partner}"
            )


def displacement_matrix(n_sites: int, periodic: bool = False) -> np.ndarray:
    """``x - y`` for every pair of sites (minimal image on a ring)."""
    x = np.arange(n_sites)
    disp = x[:, None] - x[None, :]
    if periodic:
        half = n_sites // 2
        disp = (disp + half) % n_sites - half
    return disp.astype(float)


def build_hamiltonian(model: LatticeModel) -> np.ndarray:
    """Dense ``H = T + V`` with ``H[x, y] = t_{x-y} + delta_xy V(x)``."""
    check_hermitian_hopping(model.hopping)
    d = model.n_sites
    h = np.diag(model.potential.astype(complex))
    rows = np.arange(d)
    for r, t in model.hopping.items():
        cols = rows - r
        if model.periodic:
            cols = cols % d
            h[rows, cols] += t
        else:
            keep = (cols >= 0) & (cols < d)
            h[rows[keep], cols[keep]] += t
    return h


def deform_matrix(a: np.ndarray, zeta: complex, periodic: bool = False) -> np.ndarray:
    """Return ``A_zeta[x, y] = A[x, y] exp(-i zeta (x - y))``.

    Entire in ``zeta``; for real ``zeta`` this is a unitary conjugation.
    """
    a = np.asarray(a)
    disp = displacement_matrix(a.shape[0], periodic)
    return a * np.exp(-1j * complex(zeta) * disp)


def imag_part(a: np.ndarray) -> np.ndarray:
    """``(A - A*) / 2i``, always Hermitian."""
    a = np.asarray(a)
    return (a - a.conj().T) / 2j


def real_part(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    return (a + a.conj().T) / 2


def hermiticity_residual(a: np.ndarray) -> float:
    """``max|A - A*| / max|A|`` (0 for the zero matrix)."""
    a = np.asarray(a)
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)) / scale)


def is_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    return hermiticity_residual(a) <= rtol


def check_strip(zeta: complex, width: float, what: str = "zeta") -> complex:
    """Validate ``|Im zeta| < width`` and return ``zeta`` as a complex."""
    zeta = complex(zeta)
    if not abs(zeta.imag) < width:
        raise StripError(
            f"{what}={zeta} leaves the analyticity strip |Im {what}| < a = {width}"
        )
    return zeta


# ---------------------------------------------------------------------------
# catalog

CATALOG = {
    "i": "free open chain, t=-1, V=0",
    "ii": "free chain + on-site dephasing on every site",
    "iii": "free chain + directed hop jumps sqrt(gamma)|x><x+1| on every bond",
    "iv": "free chain + seeded uniform disorder in V",
}


def nearest_neighbour_hopping(t: float = -1.0) -> dict:
    return {1: complex(t), -1: complex(np.conj(t))}


def catalog_model(
    kind: str,
    n_sites: int = 21,
    gamma: float = 0.5,
    disorder: float = 1.0,
    seed: int = 0,
    boundary: str = "open",
    hopping: float = -1.0,
) -> LatticeModel:
    """Build one of the reference models ``i``..``iv``.

    ``gamma`` is the jump rate for ``ii``/``iii`` and ``disorder`` the width
    of the uniform distribution ``[-disorder/2, disorder/2]`` used by ``iv``.
    """
    kind = str(kind).lower()
    if kind not in CATALOG:
        raise ModelError(f"unknown catalog model {kind!r}; choose from {sorted(CATALOG)}")
    d = int(n_sites)
    periodic = boundary == "periodic"
    potential = np.zeros(d)
    jumps: list[JumpSpec] = []
    if kind == "ii":
        jumps = [JumpSpec.dephasing(x, gamma) for x in range(d)]
    elif kind == "iii":
        bonds = range(d) if periodic else range(d - 1)
        jumps = [JumpSpec.hop(x, +1, gamma) for x in bonds]
    elif kind == "iv":
        rng = np.random.default_rng(seed)
        potential = rng.uniform(-disorder / 2, disorder / 2, size=d)
    params = {"kind": kind, "n_sites": d, "gamma": gamma, "disorder": disorder,
              "seed": seed, "boundary": boundary, "hopping": hopping}
    return LatticeModel(
        n_sites=d,
        hopping=nearest_neighbour_hopping(hopping),
        potential=potential,
        jumps=tuple(jumps),
        boundary=boundary,
        name=f"catalog-{kind}",
        catalog=params,
    )


def resized(model: LatticeModel, n_sites: int) -> LatticeModel:
    """Rebuild a catalog model at a different size."""
    if model.catalog is None:
        raise ModelError("only catalog models can be resized")
    return catalog_model(**{**model.catalog, "n_sites": n_sites})


# ---------------------------------------------------------------------------
# JSON


def _expand_sites(value, d: int) -> list[int]:
    if value == "all":
        return list(range(d))
    if isinstance(value, list):
        return [int(v) for v in value]
    return [int(value)]


def _jump_from_dict(spec: dict, d: int, boundary: str) -> list[JumpSpec]:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ModelError(f"jump entry needs a 'kind' field: {spec!r}")
    kind = spec["kind"]
    if kind == "custom":
        if "re" not in spec:
            raise ModelError("custom jump needs 're' (and optionally 'im') arrays")
        re = np.asarray(spec["re"], dtype=float)
        im = np.asarray(spec.get("im", np.zeros_like(re)), dtype=float)
        return [JumpSpec.custom(re + 1j * im)]
    if "rate" not in spec or "site" not in spec:
        raise ModelError(f"{kind} jump needs 'site' and 'rate': {spec!r}")
    sites = spec["site"]
    if sites == "all" and kind == "hop" and boundary == "open":
        direction = int(spec.get("direction", 1))
        sites = list(range(d - 1)) if direction == 1 else list(range(1, d))
    out = []
    for x in _expand_sites(sites, d):
        if kind == "dephasing":
            out.append(JumpSpec.dephasing(x, float(spec["rate"])))
        elif kind == "hop":
            out.append(JumpSpec.hop(x, int(spec.get("direction", 1)), float(spec["rate"])))
        else:
            raise ModelError(f"unknown jump kind {kind!r}")
    return out


def model_from_dict(data: dict) -> LatticeModel:
    """Build a model from the documented JSON object.

    ``{"catalog": "ii", "n_sites": 41, "gamma": 0.5}`` is accepted as a
    shorthand for a catalog model.
    """
    if not isinstance(data, dict):
        raise ModelError("model description must be a JSON object")
    if "catalog" in data:
        kw = {k: v for k, v in data.items() if k != "catalog"}
        return catalog_model(data["catalog"], **kw)
    if "n_sites" not in data:
        raise ModelError("model description is missing 'n_sites'")
    d = int(data["n_sites"])
    boundary = data.get("boundary", "open")
    hopping = {}
    for entry in data.get("hopping", []):
        try:
            r = int(entry["offset"])
        except (KeyError, TypeError) as exc:
            raise ModelError(f"hopping entry needs 'offset': {entry!r}") from exc
        hopping[r] = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
    pot = data.get("potential")
    if pot is None:
        potential = np.zeros(d)
    elif isinstance(pot, dict) and "uniform" in pot:
        lo, hi = pot["uniform"]
        rng = np.random.default_rng(int(data.get("seed", 0)))
        potential = rng.uniform(lo, hi, size=d)
    else:
        potential = np.asarray(pot, dtype=float)
    jumps = []
    for spec in data.get("jumps", []):
        jumps.extend(_jump_from_dict(spec, d, boundary))
    a = data.get("decay_rate")
    return LatticeModel(
        n_sites=d,
        hopping=hopping,
        potential=potential,
        jumps=tuple(jumps),
        boundary=boundary,
        decay_rate=math.inf if a is None else float(a),
        decay_prefactor=data.get("decay_prefactor"),
        name=str(data.get("name", "custom")),
    )


def load_model(path: str | Path) -> LatticeModel:
    with open(path) as fh:
        data: Any = json.load(fh)
    return model_from_dict(data)
