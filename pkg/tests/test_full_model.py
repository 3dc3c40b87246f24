import math

import numpy as np
import pytest

from lambda_repeater.full_model import (
    FullParams,
    FullRegister,
    build_full_hamiltonian,
    compare_effective,
    evolve_full,
    trace_distance_pure,
)
from lambda_repeater.registers import QutritRegister


def test_detunings_and_dissipation_combinations():
    p = FullParams.from_detunings(7.0, -3.0, gamma_e=0.5, gamma_g=0.1, kappa_a=0.2,
                                  gamma_f=0.05, kappa_b=0.3)
    assert p.Delta == pytest.approx(7.0) and p.delta == pytest.approx(-3.0)
    assert p.Gamma == pytest.approx(0.2) and p.gamma == pytest.approx(0.15)
    m = p.to_model_params()
    assert m.lambda1 == pytest.approx(1 / complex(7.0, -0.1))


def test_hamiltonian_shape_and_hermiticity():
    p = FullParams.from_detunings(10.0, 10.0, n_max=2)
    h = build_full_hamiltonian(p)
    assert h.shape == (p.dim, p.dim) == (81, 81)
    assert np.allclose(h, h.conj().T)
    lossy = build_full_hamiltonian(FullParams.from_detunings(10.0, 10.0, kappa_a=0.5))
    assert not np.allclose(lossy, lossy.conj().T)


def test_ground_pair_is_stationary():
    p = FullParams.from_detunings(5.0, 5.0)
    start = FullRegister.from_pair(QutritRegister.basis("gg"), p.n_max)
    out = evolve_full(p, start, 3.0)
    assert out.photon_population() < 1e-28
    assert abs(out.vacuum_projection().amplitude("gg")) == pytest.approx(1.0, abs=1e-13)


def test_single_mode_vacuum_rabi():
    # on resonance only the bright pair (eg + ge)/sqrt2 couples to |gg,1>, at rate sqrt2 g;
    # starting from |eg,0> half the weight is bright
    p = FullParams.from_detunings(0.0, 10.0, g1=1.0, g2=0.0, n_max=1)
    start = FullRegister.from_pair(QutritRegister.basis("eg"), 1)
    T = 0.6
    out = evolve_full(p, start, T)
    assert out.photon_population() == pytest.approx(0.5 * math.sin(math.sqrt(2) * T) ** 2, abs=1e-13)


def test_trace_distance_pure():
    a = np.array([1, 0, 0], dtype=complex)
    assert trace_distance_pure(a, 1j * a) == 0.0
    assert trace_distance_pure(a, np.array([0, 1, 0])) == pytest.approx(1.0)
    b = np.array([math.cos(0.3), math.sin(0.3), 0])
    assert trace_distance_pure(a, b) == pytest.approx(math.sin(0.3), abs=1e-15)


def test_dispersive_agreement_improves_with_detuning():
    grid = np.linspace(0.0, 5.0, 6)
    start = QutritRegister.basis("ge")
    devs = [compare_effective(FullParams.from_detunings(D, D), start, grid).max_deviation
            for D in (5.0, 10.0, 20.0)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 0.05


def test_report_contents():
    rep = compare_effective(FullParams.from_detunings(20.0, 20.0), QutritRegister.basis("ef"), [0.0, 2.0])
    d = rep.to_dict()
    assert d["pass"] and rep.passed
    assert d["deviations"][0] == 0.0
    assert rep.truncation_sensitivity < 1e-6
    assert max(rep.photon_populations) < 0.02


def test_requires_normalized_input():
    with pytest.raises(ValueError):
        compare_effective(FullParams(), QutritRegister.basis("ge", 2.0), [1.0])
    with pytest.raises(ValueError):
        FullParams(n_max=0)
