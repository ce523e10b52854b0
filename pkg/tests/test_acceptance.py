"""Acceptance suite: one pass/fail line per criterion, at the stated tolerances.

Run with ``pytest -v tests/test_acceptance.py``; the criterion lines are
repeated in the "acceptance criteria" section of the terminal summary.
"""

import math

import numpy as np

from lindcone.bounds import fit_second_order, small_nu_slope, velocity_c_prime
from lindcone.evolve import matrix_exp, min_eigenvalue, s1_opnorm_lower
from lindcone.liouvillian import (
    build_gprime,
    build_gtilde,
    build_lindbladian,
    deformed_parts,
    random_model_jumps,
    unvec,
    vec,
)
from lindcone.model import JumpSpec, LatticeModel, catalog_model, nearest_neighbour_hopping
from lindcone.verify import (
    check_analyticity,
    check_ball_bound,
    check_cs_trace,
    check_deformed_growth,
    check_deformed_positivity,
    check_dual_cone,
    check_leakage_cone,
    check_subcp,
    random_density,
)

KINDS = ("i", "ii", "iii", "iv")


def catalog(d=21):
    return [catalog_model(k, d) for k in KINDS]


def random_jump_model(seed, d_max=8, hopping=True, jump_range=None):
    """Random chain with dense random jumps, optionally cut to a band of the given range."""
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, d_max + 1))
    ws = random_model_jumps(rng, d, int(rng.integers(1, 4)))
    if jump_range is not None:
        x = np.arange(d)
        ws = [w * (np.abs(x[:, None] - x[None, :]) <= jump_range) for w in ws]
    jumps = tuple(JumpSpec.custom(w) for w in ws)
    hop = nearest_neighbour_hopping(-1.0) if hopping and d > 2 else {}
    model = LatticeModel(n_sites=d, hopping=hop, potential=rng.uniform(-1, 1, d), jumps=jumps,
                         name=f"random-{seed}")
    return model, rng


def test_c01_velocity_oracle(criterion):
    rec = criterion(1, "periodic free chain c'(0.5) = 2 sinh(0.5)/0.5", 1.0)
    model = catalog_model("i", 128, boundary="periodic")
    got = velocity_c_prime(model, 0.5).c_prime
    exact = 2 * math.sinh(0.5) / 0.5
    rel = abs(got - exact) / exact
    rec.expect(rel <= 1e-5, f"c'={got:.15g} exact={exact:.15g} rel={rel:.2e} (tol 1e-5)")
    rec.conclude()


def test_c02_gtilde_oracles(criterion):
    rec = criterion(2, "G-tilde oracles (dephasing zero, single hop eigenvalue)", 1.0)
    deph = catalog_model("ii", 21)
    worst = max(np.max(np.abs(build_gtilde(deph, 1j * eta))) for eta in (-0.5, -0.2, 0.3, 0.7))
    rec.expect(worst <= 1e-14, f"dephasing max|G~|={worst:.1e} (tol 1e-14)")
    hop = LatticeModel(n_sites=6, jumps=(JumpSpec.hop(2, 1, 1.0),), name="single-hop")
    eig = np.linalg.eigvalsh(build_gtilde(hop, -0.5j))
    target = 0.5 * (math.e - 1)
    err = float(np.min(np.abs(eig - target)))
    rec.expect(err <= 1e-10, f"hop eigenvalue err={err:.1e} vs (e-1)/2={target:.6f} (tol 1e-10)")
    rec.conclude()


def test_c03_gprime_finite_difference(criterion):
    rec = criterion(3, "G-tilde' vs central difference, 20 random local jump families", 5.0)
    # lattice-local families (jump range <= 2); for dense d=8 jumps the O(h^2)
    # truncation of the difference quotient itself exceeds 1e-6 (see test_liouvillian)
    h = 1e-4
    worst = 0.0
    for seed in range(20):
        model, _ = random_jump_model(seed, jump_range=2)
        fd = (build_gtilde(model, 1j * h) - build_gtilde(model, -1j * h)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(fd - build_gprime(model)))))
    rec.expect(worst <= 1e-6, f"max abs error {worst:.2e} (tol 1e-6)")
    rec.conclude()


def test_c04_trace_identity_factor(criterion):
    rec = criterion(4, "Tr(G rho) = 2 Tr(G~ rho) on 20 random triples", 5.0)
    worst, ratios = 0.0, []
    for seed in range(20):
        model, rng = random_jump_model(100 + seed)
        zeta = 1j * rng.uniform(-0.8, 0.8)
        rho = random_density(rng, model.n_sites)
        _, g = deformed_parts(model, zeta, -zeta)
        lhs = np.trace(unvec(g @ vec(rho), model.n_sites))
        rhs = np.trace(build_gtilde(model, zeta) @ rho)
        scale = max(1.0, abs(lhs))
        worst = max(worst, abs(lhs - 2 * rhs) / scale)
        if abs(rhs) > 1e-8:
            ratios.append((lhs / rhs).real)
    rec.expect(worst <= 1e-10, f"max scaled |Tr(G rho) - 2 Tr(G~ rho)| = {worst:.1e} (tol 1e-10)")
    rec.expect(np.allclose(ratios, 2.0), f"observed factor {np.mean(ratios):.12f} (resolved: 2, not 1)")
    rec.conclude()


def test_c05_semigroup_positivity_trace(criterion):
    rec = criterion(5, "semigroup law, trace and positivity, catalog d=21", 30.0)
    times = (0.5, 1.0, 2.0)
    law = tr_err = 0.0
    lam_min = math.inf
    rng = np.random.default_rng(5)
    states = [random_density(rng, 21, rank=r) for r in (1, 2, 5, 21)]
    for model in catalog():
        gen = build_lindbladian(model).matrix
        e = {t: matrix_exp(gen, t) for t in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0)}
        for s in times:
            for t in times:
                err = np.linalg.norm(e[s] @ e[t] - e[s + t]) / np.linalg.norm(e[s + t])
                law = max(law, float(err))
        for t in times:
            for rho in states:
                out = unvec(e[t] @ vec(rho), 21)
                tr_err = max(tr_err, abs(np.trace(out) - np.trace(rho)))
                lam_min = min(lam_min, min_eigenvalue(out))
    rec.expect(law <= 1e-9, f"semigroup rel err {law:.1e} (tol 1e-9)")
    rec.expect(tr_err <= 1e-10, f"trace err {tr_err:.1e} (tol 1e-10)")
    rec.expect(lam_min >= -1e-10, f"min eigenvalue {lam_min:.1e} (tol -1e-10)")
    rec.conclude()


def test_c06_contraction(criterion):
    rec = criterion(6, "|e^{Lt}|_1^op <= 4 with 50 restarts, catalog models", 120.0)
    worst = 0.0
    for model in catalog():
        gen = build_lindbladian(model).matrix
        for t in (0.5, 1.0, 2.0, 5.0):
            worst = max(worst, s1_opnorm_lower(matrix_exp(gen, t), restarts=50, seed=6).value)
    rec.expect(worst <= 4 + 1e-9, f"largest estimate {worst:.12f} (bound 4 + 1e-9)")
    rec.conclude()


def test_c07_deformed_growth(criterion):
    rec = criterion(7, "deformed growth, d=21, nu in {0.2, 0.4}", 120.0)
    worst_pos = worst_op = -math.inf
    for model in catalog():
        for nu in (0.2, 0.4):
            rep = check_deformed_growth(model, nu, [0.5, 1.0, 2.0], seed=7, n_states=32, restarts=8)
            for s in rep.samples:
                if s.meta["kind"] == "positive":
                    worst_pos = max(worst_pos, s.measured / s.bound)
                else:
                    worst_op = max(worst_op, s.measured - s.bound)
    rec.expect(worst_pos <= 1 + 1e-8, f"positive states max ratio to e^(2 nu c' t): {worst_pos:.12f} (tol 1+1e-8)")
    rec.expect(worst_op <= 1e-9, f"rank-one estimate minus 4e^(2 nu c' t): {worst_op:.3f} (tol 1e-9)")
    rec.conclude()


def test_c08_deformed_positivity(criterion):
    rec = criterion(8, "deformed positivity, 32 states, nu in {0.2, 0.4}, t <= 2", 60.0)
    worst = -math.inf
    for model in catalog():
        for nu in (0.2, 0.4):
            rep = check_deformed_positivity(model, nu, [0.5, 1.0, 2.0], seed=8, n_states=32)
            worst = max(worst, max(s.measured for s in rep.samples))
    rec.expect(worst <= 1e-9, f"max -lambda_min/|out|_1 = {worst:.1e} (tol 1e-9)")
    rec.conclude()


def test_c09_ball_bound(criterion):
    rec = criterion(9, "ball light cone, free chain + dephasing d=31", 120.0)
    model = catalog_model("ii", 31)
    rep = check_ball_bound(model, range(0, 4), range(20, 24), 0.4, [0.5, 1.0, 2.0], seed=9)
    margins = ", ".join(f"t={s.meta['t']:g}: {s.margin:.3e}" for s in
                        sorted(rep.samples, key=lambda s: s.meta["t"]))
    rec.expect(rep.passed, f"verdict {rep.verdict}; margins {margins}")
    rec.conclude()


def test_c10_leakage_cone(criterion):
    rec = criterion(10, "leakage cone with assembled partition constant, d=41", 180.0)
    model = catalog_model("ii", 41)
    far = [x for x in range(41) if abs(x - 20) >= 12]
    for mu in (0.1, 0.2):
        rep = check_leakage_cone(model, [20], far, mu, 0.2, [0.5, 1.0, 2.0, 3.0], seed=10)
        rate = rep.diagnostics["fitted_decay_rate"]
        rec.expect(rep.passed, f"mu={mu}: {rep.verdict}, min margin {rep.min_margin(True):.3e}, "
                               f"{sum(s.vacuous for s in rep.samples)}/{len(rep.samples)} vacuous")
        rec.expect(rate >= 2 * mu - 0.05, f"mu={mu}: fitted tail rate {rate:.3f} >= {2 * mu - 0.05:.2f}")
    rec.conclude()


def test_c11_subcp_and_cauchy_schwarz(criterion):
    rec = criterion(11, "sub-CP bounds (150) and trace Cauchy-Schwarz (100)", 60.0)
    sub = check_subcp(seed=11, dims=(2, 3, 4, 5, 6), n_instances=150)
    cs = check_cs_trace(seed=11, dims=(2, 3, 4, 5), n_instances=100)
    rec.expect(sub.passed, f"sub-CP: {len(sub.failures())} violations of {len(sub.samples)}")
    rec.expect(cs.passed, f"Cauchy-Schwarz: {len(cs.failures())} violations of {len(cs.samples)}")
    rec.conclude()


def test_c12_duality_and_dual_cone(criterion):
    rec = criterion(12, "duality on 50 pairs and dual-side cone, d=41", 180.0)
    model = catalog_model("ii", 41)
    far = [x for x in range(41) if abs(x - 20) >= 12]
    rep = check_dual_cone(model, [20], far, 0.2, 0.2, [0.5, 1.0, 2.0, 3.0], seed=12,
                          n_samples=16, n_pairs=50)
    dual = [s for s in rep.samples if s.meta["kind"] == "duality"]
    cone = [s for s in rep.samples if s.meta["kind"] == "dual_norm"]
    err = rep.diagnostics["duality_error"]
    rec.expect(err <= 1e-10 and len({s.meta["pair"] for s in dual}) == 50,
               f"duality error {err:.1e} on 50 pairs (tol 1e-10)")
    rec.expect(all(s.ok for s in cone), f"dual cone min margin {min(s.margin for s in cone):.3e}")
    rec.conclude()


def test_c13_analyticity(criterion):
    rec = criterion(13, "mean-value circle test and key relation", 60.0)
    for model in catalog():
        rep = check_analyticity(model, 0.5, zeta0=0.0, radius=0.05, samples=8, seed=13,
                                key_zeta=0.3j, U=range(0, 5), V=range(12, 17))
        mv = next(s for s in rep.samples if s.meta["kind"] == "mean_value")
        key = next(s for s in rep.samples if s.meta["kind"] == "key_relation" and s.meta["zeta"].imag)
        rec.expect(mv.ok, f"{model.name}: mean-value {mv.measured:.1e} (tol 1e-6)")
        rec.expect(key.ok, f"{model.name}: key relation {key.measured:.1e} (tol 1e-8)")
    rec.conclude()


def test_c14_small_nu_slope(criterion):
    rec = criterion(14, "small-nu slope of nu c'(nu)", 10.0)
    for kind, gamma, expected in (("i", 0.5, 2.0), ("iii", 1.0, 1.0)):
        model = catalog_model(kind, 21, gamma=gamma)
        slope = small_nu_slope(model)
        rec.expect(abs(slope - expected) <= 1e-8, f"({kind}) slope {slope:.12f} (expected {expected:g})")
        fit = fit_second_order(model, (1e-2, 1e-3))
        ok = all(r["nu_c_prime"] >= fit["slope"] * r["nu"] - fit["K"] * r["nu"] ** 2 - 1e-15
                 for r in fit["rows"])
        rec.expect(ok, f"({kind}) nu c' >= slope nu - K nu^2 with K={fit['K']:.4g}")
    rec.conclude()
