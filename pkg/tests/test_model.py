import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lindcone.model import (
    JumpSpec,
    LatticeModel,
    ModelError,
    StripError,
    build_hamiltonian,
    catalog_model,
    check_strip,
    deform_matrix,
    displacement_matrix,
    hermiticity_residual,
    imag_part,
    load_model,
    model_from_dict,
    real_part,
    resized,
)


def test_free_chain_hamiltonian():
    h = build_hamiltonian(catalog_model("i", 5))
    expected = -(np.eye(5, k=1) + np.eye(5, k=-1))
    np.testing.assert_array_equal(h, expected)


def test_periodic_chain_wraps():
    h = build_hamiltonian(catalog_model("i", 6, boundary="periodic"))
    assert h[0, 5] == -1 and h[5, 0] == -1
    np.testing.assert_allclose(np.linalg.eigvalsh(h), np.sort(-2 * np.cos(2 * np.pi * np.arange(6) / 6)))


def test_complex_hopping_orientation():
    # H[x, x - r] = t_r
    m = LatticeModel(n_sites=4, hopping={1: 1j, -1: -1j})
    h = build_hamiltonian(m)
    assert h[1, 0] == 1j and h[0, 1] == -1j
    assert hermiticity_residual(h) == 0


def test_non_hermitian_hopping_names_offset():
    with pytest.raises(ModelError, match="offset 1"):
        LatticeModel(n_sites=4, hopping={1: 1.0, -1: 2.0})


def test_hopping_offset_limits():
    with pytest.raises(ModelError, match="too long"):
        LatticeModel(n_sites=4, hopping={3: 1.0, -3: 1.0}, boundary="periodic")
    LatticeModel(n_sites=4, hopping={3: 1.0, -3: 1.0})


def test_decay_envelope_enforced():
    with pytest.raises(ModelError, match="exceeds"):
        LatticeModel(n_sites=6, hopping={2: 1.0, -2: 1.0}, decay_rate=1.0, decay_prefactor=1.0)


def test_jump_validation():
    with pytest.raises(ModelError, match="leaves the open chain"):
        catalog_model("i", 4).with_jumps([JumpSpec.hop(3, 1, 1.0)])
    with pytest.raises(ModelError, match="outside"):
        catalog_model("i", 4).with_jumps([JumpSpec.dephasing(7, 1.0)])
    with pytest.raises(ModelError, match="rate"):
        JumpSpec.dephasing(0, -1.0)
    with pytest.raises(ModelError, match="square"):
        JumpSpec.custom(np.ones((2, 3)))


def test_hop_jump_matrix():
    w = JumpSpec.hop(1, 1, 4.0).realize(4)
    expected = np.zeros((4, 4))
    expected[1, 2] = 2.0
    np.testing.assert_array_equal(w, expected)
    # periodic wrap
    w = JumpSpec.hop(3, 1, 1.0).realize(4, periodic=True)
    assert w[3, 0] == 1.0


def test_catalog_inventory():
    assert len(catalog_model("i", 9).jumps) == 0
    assert len(catalog_model("ii", 9).jumps) == 9
    assert len(catalog_model("iii", 9).jumps) == 8
    assert len(catalog_model("iii", 9, boundary="periodic").jumps) == 9
    v = catalog_model("iv", 50, disorder=2.0, seed=3).potential
    assert np.all(np.abs(v) <= 1.0) and np.ptp(v) > 0
    np.testing.assert_array_equal(v, catalog_model("iv", 50, disorder=2.0, seed=3).potential)
    with pytest.raises(ModelError):
        catalog_model("v")


def test_resized_keeps_parameters():
    m = resized(catalog_model("iii", 9, gamma=0.7), 18)
    assert m.n_sites == 18 and m.jumps[0].rate == 0.7


def test_displacement_minimal_image():
    disp = displacement_matrix(6, periodic=True)
    assert disp[0, 5] == 1 and disp[5, 0] == -1 and disp[0, 3] == -3
    assert np.all((disp >= -3) & (disp < 3))


def test_deformation_is_conjugation():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    zeta = 0.3 - 0.7j
    t = np.diag(np.exp(-1j * zeta * np.arange(5)))
    np.testing.assert_allclose(deform_matrix(a, zeta), t @ a @ np.linalg.inv(t), atol=1e-12)


def test_real_deformation_is_unitary():
    h = build_hamiltonian(catalog_model("i", 7))
    hz = deform_matrix(h, 0.4)
    np.testing.assert_allclose(np.linalg.eigvalsh(hz), np.linalg.eigvalsh(h), atol=1e-12)
    assert hermiticity_residual(hz) < 1e-15


def test_imaginary_deformation_of_hop():
    # sqrt(g)|x><x+1| deforms to exp(-eta) times itself for zeta = i eta
    w = JumpSpec.hop(2, 1, 1.0).realize(5)
    np.testing.assert_allclose(deform_matrix(w, 0.5j), math.exp(-0.5) * w)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.floats(-1, 1), st.integers(0, 1000))
def test_real_and_imag_parts_recombine(d, eta, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    a = deform_matrix(a + a.conj().T, 1j * eta)
    np.testing.assert_allclose(real_part(a) + 1j * imag_part(a), a, atol=1e-12)
    assert hermiticity_residual(real_part(a)) < 1e-14
    assert hermiticity_residual(imag_part(a)) < 1e-14


def test_check_strip():
    assert check_strip(0.3j, 1.0) == 0.3j
    with pytest.raises(StripError, match="strip"):
        check_strip(1.0j, 1.0)


def test_model_json_roundtrip(tmp_path):
    spec = {
        "n_sites": 6,
        "hopping": [{"offset": 1, "re": -1}, {"offset": -1, "re": -1}],
        "potential": {"uniform": [-0.5, 0.5]},
        "seed": 4,
        "jumps": [{"kind": "dephasing", "site": "all", "rate": 0.2},
                  {"kind": "hop", "site": "all", "rate": 0.1, "direction": -1},
                  {"kind": "custom", "re": np.eye(6).tolist()}],
        "decay_rate": 2.0,
    }
    path = tmp_path / "m.json"
    path.write_text(json.dumps(spec))
    m = load_model(path)
    assert len(m.jumps) == 6 + 5 + 1 and m.decay_rate == 2.0
    again = model_from_dict(m.to_dict() | {"jumps": [j.to_dict() for j in m.jumps]})
    np.testing.assert_allclose(build_hamiltonian(again), build_hamiltonian(m))
    for a, b in zip(again.jump_matrices, m.jump_matrices):
        np.testing.assert_allclose(a, b)


def test_catalog_shorthand():
    m = model_from_dict({"catalog": "iii", "n_sites": 11, "gamma": 1.0})
    assert m.name == "catalog-iii" and len(m.jumps) == 10
