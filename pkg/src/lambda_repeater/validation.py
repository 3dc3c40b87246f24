"""
Self-checks behind ``lambda-repeater validate``.

Each check reports its tolerance, the observed maximum deviation and a
pass flag.  ``fast`` runs the closed-form/propagator equivalences, the
symmetry identities between swap cases, lossless unitarity and periodicity,
and a few point values; ``full`` adds the cavity-model comparison.

``flip_lambda2`` negates ``lambda2`` inside the closed-form route only.  It
exists to confirm that the equivalence checks can fail.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ModelParams, pair_propagator, pair_propagator_expm
from .errors import ZeroNormError
from .full_model import FullParams, compare_effective
from .measures import negativity_sector, pure_state_negativity
from .protocol import (
    BRANCH_KETS,
    MEASURED_PAIRS,
    STAGE_ONE_KETS,
    BranchSet,
    SwapCase,
    run_protocol,
    stabilized_negativity,
    stage_one_coefficients_from_rates,
    stage_one_state,
    stage_two_coefficients_from_rates,
    stage_two_measure,
    stage_two_state,
)
from .registers import QutritRegister, ket_index
from .sweep import LINES_A, LINES_B, CaseSelector, SweepConfig, run_sweep

SEED = 20240607


@dataclass
class Check:
    name: str
    tolerance: float
    observed: float
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.observed) and self.observed <= self.tolerance)

    def to_dict(self) -> dict:
        return {"name": self.name, "tolerance": self.tolerance, "observed": self.observed,
                "pass": self.passed, **self.detail}


def random_params(rng: np.random.Generator, lossless: bool = False) -> ModelParams:
    """Moderate random parameters; conditional norms stay within a few orders of magnitude."""
    sign = rng.choice([-1.0, 1.0], size=2)
    return ModelParams(
        g1=rng.uniform(0.5, 2.0), g2=rng.uniform(0.5, 2.0),
        Delta=sign[0] * rng.uniform(1.5, 10.0), delta=sign[1] * rng.uniform(1.5, 10.0),
        Gamma=0.0 if lossless else rng.uniform(-3.0, 3.0),
        gamma=0.0 if lossless else rng.uniform(-3.0, 3.0),
    )


def figure_param_sets() -> list[tuple[ModelParams, float]]:
    """(params, gt) for every line of the negativity and success-probability panels."""
    out = []
    for D, G, gt in LINES_A:
        out.append((ModelParams(1.0, 2.0, D, 2.0, G, 0.0), gt))
    for d, g, gt in LINES_B:
        out.append((ModelParams(1.0, 2.0, 10.0, d, 2.0, g), gt))
    return out


class _Route:
    """Closed-form evaluators, optionally with a deliberately wrong lambda2."""

    def __init__(self, flip_lambda2: bool = False):
        self.sign = -1.0 if flip_lambda2 else 1.0

    def rates(self, p: ModelParams):
        return p.lambda1, self.sign * p.lambda2

    def stage_one(self, p, t):
        return stage_one_coefficients_from_rates(*self.rates(p), t)

    def branches(self, k, p, t, tau) -> BranchSet:
        B = stage_two_coefficients_from_rates(k, *self.rates(p), t, tau)
        entries = tuple(zip(BRANCH_KETS[k], (B[i] for i in range(1, 7))))
        return BranchSet(entries, SwapCase.numbered(k), t, tau)

    def measures(self, k, p, t, tau):
        """(N, N', S, S') of case ``k``."""
        bs = self.branches(k, p, t, tau)
        first, second = (stage_two_measure(bs, o) for o in MEASURED_PAIRS[k])
        return (first.negativity, second.negativity,
                first.success_probability, second.success_probability)


def _scaled_err(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


# -- checks ------------------------------------------------------------------

def check_stage_one(route: _Route, n: int = 200, seed: int = SEED) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    idx = [ket_index(k) for k in STAGE_ONE_KETS.values()]
    for _ in range(n):
        p, t = random_params(rng), rng.uniform(0.0, 6.0)
        A = route.stage_one(p, t)
        want = np.zeros(81, dtype=complex)
        want[idx] = [A[i] for i in STAGE_ONE_KETS]
        worst = max(worst, _scaled_err(want, stage_one_state(p, t).amplitudes))
    return Check("stage_one_closed_form_vs_propagator", 1e-10, worst, {"points": n})


def check_stage_two(route: _Route, n: int = 200, seed: int = SEED + 1) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n):
        k = i % 8 + 1
        p, t, tau = random_params(rng), rng.uniform(0.05, 5.0), rng.uniform(0.0, 8.0)
        want = route.branches(k, p, t, tau).coefficients()
        got = stage_two_state(k, p, t, tau).coefficients()
        worst = max(worst, _scaled_err(want, got))
    return Check("stage_two_closed_form_vs_propagator", 1e-10, worst, {"points": n, "cases": 8})


def check_propagator_expm(n: int = 50, seed: int = SEED + 2) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        p, T = random_params(rng), rng.uniform(-5.0, 8.0)
        a = pair_propagator(p.lambda1, p.lambda2, T).matrix
        b = pair_propagator_expm(p.lambda1, p.lambda2, T).matrix
        worst = max(worst, _scaled_err(a, b))
    return Check("closed_form_propagator_vs_matrix_exponential", 1e-10, worst, {"points": n})


IDENTITIES = (
    ("N2=N'2=N3=N'3", [(2, 0), (2, 1), (3, 0), (3, 1)]),
    ("S2=S'2", [(2, 2), (2, 3)]),
    ("N1=N'4", [(1, 0), (4, 1)]),
    ("N'1=N4", [(1, 1), (4, 0)]),
    ("S4=S'1", [(4, 2), (1, 3)]),
    ("N5=N'8", [(5, 0), (8, 1)]),
    ("N6=N'6=N7=N'7", [(6, 0), (6, 1), (7, 0), (7, 1)]),
    ("S6=S'6", [(6, 2), (6, 3)]),
    ("S7=S'7", [(7, 2), (7, 3)]),
    ("N8=N'5", [(8, 0), (5, 1)]),
    ("S8=S'5", [(8, 2), (5, 3)]),
    ("S5=S'8", [(5, 2), (8, 3)]),
)


def check_identities(route: _Route, num_tau: int = 50) -> Check:
    worst = {name: 0.0 for name, _ in IDENTITIES}
    for p, gt in figure_param_sets():
        for tau in np.linspace(0.0, 15.0, num_tau):
            vals = {k: route.measures(k, p, gt, float(tau)) for k in range(1, 9)}
            for name, members in IDENTITIES:
                xs = [vals[k][q] for k, q in members]
                worst[name] = max(worst[name], max(xs) - min(xs))
    return Check("case_identities", 1e-10, max(worst.values()),
                 {"per_identity": worst, "tau_points": num_tau})


def check_unitarity(route: _Route, n: int = 50, seed: int = SEED + 3) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n):
        p = random_params(rng, lossless=True)
        t, tau = rng.uniform(0.0, 6.0), rng.uniform(0.0, 15.0)
        A = route.stage_one(p, t)
        worst = max(worst, abs(sum(abs(a) ** 2 for a in A.values()) - 1.0))
        worst = max(worst, abs(stage_one_state(p, t).squared_norm() - 1.0))
        k = i % 8 + 1
        worst = max(worst, abs(route.branches(k, p, t, tau).squared_norm() - 1.0))
        worst = max(worst, abs(stage_two_state(k, p, t, tau).squared_norm() - 1.0))
    return Check("lossless_unitarity", 1e-10, worst, {"points": n})


def check_periodicity(route: _Route, num_tau: int = 40) -> Check:
    p = ModelParams(1.0, 2.0, 6.0, 6.0, 0.0, 0.0)
    gt = 2.0
    worst = 0.0
    for k in range(1, 9):
        lam = p.lambda1.real if k <= 4 else p.lambda2.real
        period = math.pi / lam
        for tau in np.linspace(0.0, 15.0, num_tau):
            a = route.measures(k, p, gt, float(tau))
            b = route.measures(k, p, gt, float(tau) + period)
            worst = max(worst, abs(a[0] - b[0]), abs(a[1] - b[1]))
    return Check("lossless_negativity_periodicity", 1e-9, worst, {"params": p.as_dict(), "gt": gt})


def golden_case_one():
    """Lossless case 1 with lambda1 t = pi/4 at lambda1 tau = pi/4 and pi/8."""
    p = ModelParams(g1=1.0, g2=1.0, Delta=6.0, delta=6.0)
    t = 0.25 * math.pi / p.lambda1.real
    return p, t, {"S1@pi/4": (t, "success_probability", 0.25),
                  "N1@pi/4": (t, "negativity", 0.0),
                  "N1@pi/8": (0.5 * t, "negativity", math.sqrt(2) / 4)}


def check_golden(route: _Route) -> Check:
    p, t, targets = golden_case_one()
    worst, seen = 0.0, {}
    for name, (tau, quantity, want) in targets.items():
        N, _, S, _ = route.measures(1, p, t, tau)
        got = N if quantity == "negativity" else S
        seen[name] = got
        worst = max(worst, abs(got - want))
    return Check("golden_values_case_one", 1e-10, worst, {"values": seen})


def check_stabilization() -> Check:
    p, gt = ModelParams(1.0, 2.0, 2.0, 2.0, 4.0, 0.0), 2.0
    limit = stabilized_negativity(p, gt)
    worst = max(abs(run_protocol(p, gt, tau, 1, "eg", "closed_form").negativity - limit)
                for tau in (160.0, 180.0, 200.0))
    return Check("stabilized_negativity", 1e-3, worst, {"limit": limit})


def check_negativity_oracle(n: int = 100, seed: int = SEED + 4) -> Check:
    rng = np.random.default_rng(seed)
    worst, used = 0.0, 0
    while used < n:
        k = int(rng.integers(1, 9))
        p, t, tau = random_params(rng), rng.uniform(0.05, 5.0), rng.uniform(0.0, 10.0)
        outcome = list(MEASURED_PAIRS[k])[int(rng.integers(0, 2))]
        try:
            pair = run_protocol(p, t, tau, k, outcome)
            a = negativity_sector(*pair.coefficients)
        except ZeroNormError:
            continue
        worst = max(worst, abs(a - pure_state_negativity(pair.state.amplitudes)))
        used += 1
    return Check("negativity_sector_vs_partial_transpose", 1e-10, worst, {"points": n})


def check_sector_independence(route: _Route, seed: int = SEED + 5) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(40):
        k = i % 8 + 1
        p, t, tau = random_params(rng), rng.uniform(0.05, 5.0), rng.uniform(0.0, 10.0)
        q = random_params(rng)
        if k <= 4:
            other = ModelParams(p.g1, q.g2, p.Delta, q.delta, p.Gamma, q.gamma)
        else:
            other = ModelParams(q.g1, p.g2, q.Delta, p.delta, q.Gamma, p.gamma)
        a, b = route.measures(k, p, t, tau), route.measures(k, other, t, tau)
        worst = max(worst, abs(a[0] - b[0]), abs(a[1] - b[1]))
    return Check("negativity_ignores_other_cavity", 1e-10, worst)


def check_detuning_suppression() -> Check:
    taus = np.linspace(0.0, 15.0, 600)
    peak = {}
    for D in (2.0, 6.0):
        p = ModelParams(1.0, 2.0, D, 2.0, 4.0, 0.0)
        peak[D] = max(run_protocol(p, 2.0, float(x), 1, "eg", "closed_form").negativity for x in taus)
    return Check("detuning_lowers_peak_negativity", 0.0, peak[6.0] - peak[2.0],
                 {"peak_Delta_2": peak[2.0], "peak_Delta_6": peak[6.0]})


def check_dissipation_cancellation() -> Check:
    lossless = ModelParams(1.0, 2.0, 2.0, 3.0, 0.0, 0.0)
    derived = ModelParams.from_rates(g1=1.0, g2=2.0, Delta=2.0, delta=3.0, gamma_e=0.7,
                                     gamma_g=0.3, gamma_f=0.1, kappa=0.4, kappa_prime=0.6)
    sels = tuple(CaseSelector(SwapCase.numbered(k), o) for k, o in ((1, ("e", "g")), (6, ("e", "f"))))
    rows = [run_sweep(SweepConfig(pp, 2.0, (0.0, 15.0, 100), sels, ("negativity",)))
            for pp in (lossless, derived)]
    same = all(a.data_csv() == b.data_csv() for a, b in zip(*rows))
    dev = abs(derived.Gamma) + abs(derived.gamma) + (0.0 if same else 1.0)
    return Check("dissipation_cancellation_identical_rows", 0.0, dev,
                 {"derived_Gamma": derived.Gamma, "derived_gamma": derived.gamma, "rows_identical": same})


def check_full_model() -> list[Check]:
    p = FullParams.from_detunings(20.0, 20.0, g1=1.0, g2=1.0, n_max=2)
    grid = np.linspace(0.0, 5.0, 11)
    out = []
    for ket in ("ge", "ef"):
        rep = compare_effective(p, QutritRegister.basis(ket), grid)
        out.append(Check(f"full_model_vs_effective_{ket}", rep.threshold, rep.max_deviation,
                         {"peak_photon_population": max(rep.photon_populations)}))
        out.append(Check(f"full_model_truncation_{ket}", rep.truncation_threshold,
                         rep.truncation_sensitivity, {"n_max": [p.n_max, p.n_max + 1]}))
    return out


def validate(level: str = "fast", flip_lambda2: bool = False) -> dict:
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    route = _Route(flip_lambda2)
    start = time.perf_counter()
    checks = [
        check_stage_one(route),
        check_stage_two(route),
        check_propagator_expm(),
        check_identities(route),
        check_unitarity(route),
        check_periodicity(route),
        check_golden(route),
        check_sector_independence(route),
        check_negativity_oracle(),
        check_stabilization(),
        check_detuning_suppression(),
        check_dissipation_cancellation(),
    ]
    if level == "full":
        checks += check_full_model()
    return {
        "level": level,
        "flip_lambda2": flip_lambda2,
        "convention": "gef-msd",
        "checks": [c.to_dict() for c in checks],
        "pass": all(c.passed for c in checks),
        "seconds": round(time.perf_counter() - start, 3),
    }
