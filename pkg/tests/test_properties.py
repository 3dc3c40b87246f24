import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from lambda_repeater.dynamics import ModelParams, pair_propagator, pair_propagator_expm
from lambda_repeater.measures import negativity_sector, pure_state_negativity
from lambda_repeater.protocol import MEASURED_PAIRS, run_protocol, stage_two_state
from lambda_repeater.registers import QutritRegister, ket_index, outcomes, project_levels

finite = dict(allow_nan=False, allow_infinity=False)
coupling = st.floats(0.3, 2.5, **finite)
detuning = st.one_of(st.floats(1.5, 10.0, **finite), st.floats(-10.0, -1.5, **finite))
dissipation = st.floats(-3.0, 3.0, **finite)
params = st.builds(ModelParams, coupling, coupling, detuning, detuning, dissipation, dissipation)
lossless = st.builds(ModelParams, coupling, coupling, detuning, detuning)
amp = st.complex_numbers(max_magnitude=10.0, **finite)


@settings(max_examples=60, deadline=None)
@given(st.lists(amp, min_size=27, max_size=27), st.sampled_from([(0,), (1,), (0, 2), (2, 1)]))
def test_branch_weights_sum_to_norm(amps, positions):
    r = QutritRegister(np.array(amps))
    total = sum(project_levels(r, positions, lev)[1] for lev in outcomes(len(positions)))
    assert abs(total - r.squared_norm()) <= 1e-12 * max(1.0, r.squared_norm())


@settings(max_examples=100, deadline=None)
@given(amp, amp, st.sampled_from([("ge", "eg"), ("ef", "fe"), ("gf", "fg")]))
def test_sector_negativity_matches_partial_transpose(a, b, kets):
    if abs(a) ** 2 + abs(b) ** 2 < 1e-6:
        return
    psi = np.zeros(9, dtype=complex)
    psi[ket_index(kets[0])], psi[ket_index(kets[1])] = a, b
    n = negativity_sector(a, b)
    assert 0.0 <= n <= 0.5
    assert abs(n - pure_state_negativity(psi)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(params, st.floats(-6.0, 6.0, **finite))
def test_closed_form_propagator_matches_expm(p, T):
    a = pair_propagator(p.lambda1, p.lambda2, T).matrix
    b = pair_propagator_expm(p.lambda1, p.lambda2, T).matrix
    assert np.max(np.abs(a - b)) <= 1e-10 * max(1.0, np.max(np.abs(b)))


@settings(max_examples=40, deadline=None)
@given(params, st.floats(0.05, 5.0, **finite), st.floats(0.0, 10.0, **finite),
       st.integers(1, 8), st.booleans())
def test_protocol_outputs_in_range(p, t, tau, case, primed):
    outcome = list(MEASURED_PAIRS[case])[int(primed)]
    a = run_protocol(p, t, tau, case, outcome, "propagator")
    b = run_protocol(p, t, tau, case, outcome, "closed_form")
    assert 0.0 <= a.negativity <= 0.5 + 1e-12
    assert 0.0 <= a.success_probability <= 1.0 + 1e-12
    assert abs(a.negativity - b.negativity) < 1e-9
    assert abs(a.success_probability - b.success_probability) < 1e-9


@settings(max_examples=40, deadline=None)
@given(lossless, st.floats(0.0, 6.0, **finite), st.floats(0.0, 15.0, **finite), st.integers(1, 8))
def test_lossless_stage_two_stays_normalized(p, t, tau, case):
    assert abs(stage_two_state(case, p, t, tau).squared_norm() - 1.0) < 1e-10
