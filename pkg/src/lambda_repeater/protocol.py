"""
Two-stage entanglement swapping across eight Lambda-type atoms.

Atoms are labelled 1..8 and start as Bell pairs (1,2), (3,4), (5,6), (7,8).

Stage one
    Atoms (2,3) interact for time ``t`` and are measured; one of the outcomes
    ``eg, ge, ef, fe`` leaves (1,4) entangled.  Atoms (6,7) do the same for
    (5,8).  The four (1,4) residuals are called ``Psi, PsiP, PsiPP, PsiPPP``.
Stage two
    The normalized (1,4) and (5,8) residuals are joined, atoms (4,5) interact
    and are measured, leaving (1,8) entangled.

Time convention: ``t`` and ``tau`` are read on one clock.  The (4,5)
interaction starts when the first one ends, so it lasts ``tau - t``;
``tau < t`` evolves backwards, which is how the closed-form coefficients
behave.  Every quantity exists twice, as a closed-form coefficient evaluator
and as the generic propagator pipeline, and the two must agree.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import ModelParams, apply_pair_propagator, pair_propagator
from .errors import ZeroNormError
from .measures import (
    negativity_sector,
    pure_state_negativity,
    success_probability,
)
from .registers import (
    NORM_EPS,
    QutritRegister,
    ket_index,
    ket_label,
    normalize,
    project_levels,
    tensor_product,
)

# -- labels ---------------------------------------------------------------

# stage-one outcome label -> measured levels of the middle pair
STAGE_ONE_OUTCOMES = {
    "Psi": ("e", "g"),
    "PsiP": ("g", "e"),
    "PsiPP": ("e", "f"),
    "PsiPPP": ("f", "e"),
}
OUTCOME_ORDER = (("e", "g"), ("g", "e"), ("e", "f"), ("f", "e"))

# which A-coefficients survive each stage-one outcome (on |ge⟩,|eg⟩ or |ef⟩,|fe⟩)
STAGE_ONE_SURVIVORS = {"Psi": (2, 5), "PsiP": (3, 6), "PsiPP": (8, 11), "PsiPPP": (9, 12)}

STAGE_ONE_KETS = {
    1: "gggg", 2: "gege", 3: "ggee", 4: "ggff", 5: "eegg", 6: "egeg", 7: "eeee",
    8: "eeff", 9: "efef", 10: "ffgg", 11: "fefe", 12: "ffee", 13: "ffff",
}

SWAP_CASES = {
    1: ("Psi", "Psi"), 2: ("Psi", "PsiP"), 3: ("PsiP", "Psi"), 4: ("PsiP", "PsiP"),
    5: ("PsiPP", "PsiPP"), 6: ("PsiPP", "PsiPPP"), 7: ("PsiPPP", "PsiPP"), 8: ("PsiPPP", "PsiPPP"),
}

# ket order of B_1..B_6 on atoms (1,4,5,8) for each numbered case
BRANCH_KETS = {
    1: ("gege", "ggee", "eegg", "egeg", "egge", "geeg"),
    2: ("gege", "ggee", "geeg", "egge", "eegg", "egeg"),
    3: ("gege", "ggee", "geeg", "egge", "eegg", "egeg"),
    4: ("gege", "ggee", "eegg", "egeg", "geeg", "egge"),
    5: ("eeff", "efef", "ffee", "fefe", "effe", "feef"),
    6: ("efef", "eeff", "effe", "feef", "fefe", "ffee"),
    7: ("efef", "eeff", "effe", "feef", "fefe", "ffee"),
    8: ("efef", "eeff", "fefe", "ffee", "effe", "feef"),
}

# (4,5) outcome -> (i, j) such that the (1,8) state is B_i|xy⟩ + B_j|yx⟩.
# The first entry of each case gives N_k / S_k, the second N'_k / S'_k.
MEASURED_PAIRS = {
    1: {("e", "g"): (1, 3), ("g", "e"): (2, 4)},
    2: {("e", "g"): (1, 5), ("g", "e"): (2, 6)},
    3: {("e", "g"): (1, 5), ("g", "e"): (2, 6)},
    4: {("e", "g"): (1, 3), ("g", "e"): (2, 4)},
    5: {("e", "f"): (1, 4), ("f", "e"): (2, 3)},
    6: {("e", "f"): (2, 5), ("f", "e"): (1, 6)},
    7: {("e", "f"): (2, 5), ("f", "e"): (1, 6)},
    8: {("e", "f"): (2, 3), ("f", "e"): (1, 4)},
}

# register positions: stage one holds atoms (1,2,3,4), stage two (1,4,5,8)
_STAGE_ONE_PAIR = (1, 2)
_STAGE_TWO_PAIR = (1, 2)


def parse_outcome(outcome) -> tuple[str, str]:
    """Accept ``"eg"``, ``("e", "g")`` or a stage-one label such as ``"Psi"``."""
    if isinstance(outcome, str) and outcome in STAGE_ONE_OUTCOMES:
        return STAGE_ONE_OUTCOMES[outcome]
    levels = tuple(outcome)
    if len(levels) != 2 or levels not in OUTCOME_ORDER:
        raise ValueError(f"outcome {outcome!r} is not one of eg, ge, ef, fe")
    return levels


def primary_outcome(case_index: int) -> tuple[str, str]:
    """Outcome giving the unprimed N_k, S_k."""
    return next(iter(MEASURED_PAIRS[case_index]))


def primed_outcome(case_index: int) -> tuple[str, str]:
    return list(MEASURED_PAIRS[case_index])[1]


# -- domain types -----------------------------------------------------------

@dataclass(frozen=True)
class SwapCase:
    """Which stage-one outcomes were obtained on (1,4) and on (5,8)."""

    left: str
    right: str

    def __post_init__(self):
        for lab in (self.left, self.right):
            if lab not in STAGE_ONE_OUTCOMES:
                raise ValueError(f"unknown stage-one label {lab!r}")

    @classmethod
    def numbered(cls, index: int) -> "SwapCase":
        try:
            return cls(*SWAP_CASES[index])
        except KeyError:
            raise ValueError(f"case index must be 1..8, got {index!r}") from None

    @property
    def case_index(self) -> Optional[int]:
        """1..8 for the eight combinations with closed forms, ``None`` for the extended ones."""
        for k, pair in SWAP_CASES.items():
            if pair == (self.left, self.right):
                return k
        return None

    @property
    def extended(self) -> bool:
        return self.case_index is None

    def __str__(self):
        k = self.case_index
        return f"case {k}" if k else f"extended {self.left}x{self.right}"


def as_case(case) -> SwapCase:
    if isinstance(case, SwapCase):
        return case
    if isinstance(case, (tuple, list)):
        return SwapCase(*case)
    return SwapCase.numbered(int(case))


def all_cases() -> list[SwapCase]:
    """The eight numbered cases first, then the eight extended combinations."""
    numbered = [SwapCase.numbered(k) for k in range(1, 9)]
    extra = [SwapCase(a, b) for a in STAGE_ONE_OUTCOMES for b in STAGE_ONE_OUTCOMES
             if SwapCase(a, b) not in numbered]
    return numbered + extra


@dataclass(frozen=True)
class StageOneOutcome:
    label: str
    residual: QutritRegister  # unnormalized, atoms (1,4) or (5,8)
    branch_weight: float
    t: float

    def normalized(self) -> QutritRegister:
        return normalize(self.residual)[0]


@dataclass(frozen=True, eq=False)
class BranchSet:
    """Labelled unnormalized stage-two branches on atoms (1,4,5,8)."""

    entries: tuple[tuple[str, complex], ...]
    case: SwapCase
    t: float
    tau: float
    stage_one_weights: tuple[float, float] = (float("nan"), float("nan"))

    def __post_init__(self):
        kets = [k for k, _ in self.entries]
        if len(set(kets)) != len(kets):
            raise ValueError("branch kets must be distinct")

    def as_dict(self) -> dict[str, complex]:
        return dict(self.entries)

    @property
    def kets(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.entries)

    def coefficient(self, i: int) -> complex:
        """``B_i`` with 1-based numbering."""
        return self.entries[i - 1][1]

    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.entries], dtype=complex)

    def register(self) -> QutritRegister:
        return QutritRegister.from_kets(self.as_dict())

    def squared_norm(self) -> float:
        return float(np.sum(np.abs(self.coefficients()) ** 2))

    def selected(self, outcome) -> tuple[str, ...]:
        """Kets whose atoms (4,5) match ``outcome``."""
        lev = "".join(parse_outcome(outcome))
        return tuple(k for k in self.kets if k[1:3] == lev)

    def scaled(self, factor: complex) -> "BranchSet":
        return BranchSet(tuple((k, c * factor) for k, c in self.entries), self.case,
                         self.t, self.tau, self.stage_one_weights)


@dataclass(frozen=True)
class FinalPair:
    """Outcome of the full swap: the (1,8) state and its figures of merit.

    ``success_probability`` is the ratio over the stage-two branch set (the
    relative S).  ``selected_weight`` is the absolute squared norm of the
    selected branch given unit-norm stage-two input, and ``joint_weight``
    multiplies in the two stage-one branch weights.
    """

    state: QutritRegister
    negativity: float
    success_probability: float
    outcome: tuple[str, str]
    case: SwapCase
    selected_weight: float
    stage_one_weights: tuple[float, float]
    method: str = "closed_form"
    coefficients: tuple[complex, ...] = field(default=())

    @property
    def joint_weight(self) -> float:
        return self.selected_weight * self.stage_one_weights[0] * self.stage_one_weights[1]


# -- stage one ----------------------------------------------------------------

def initial_bell_pair() -> QutritRegister:
    """``(e^{-iπ/4}|gg⟩ - i e^{-iπ/4}|ee⟩ - i|ff⟩) / √3``."""
    w = cmath.exp(-0.25j * math.pi)
    s = 1 / math.sqrt(3)
    return QutritRegister.from_kets({"gg": s * w, "ee": -1j * s * w, "ff": -1j * s})


def stage_one_state(params: ModelParams, t: float) -> QutritRegister:
    """Bell ⊗ Bell on atoms (1,2,3,4) after atoms (2,3) interact for ``t``."""
    if t < 0:
        raise ValueError("stage-one time must be nonnegative")
    bell = initial_bell_pair()
    start = tensor_product(bell, bell)
    prop = pair_propagator(params.lambda1, params.lambda2, t)
    return apply_pair_propagator(start, _STAGE_ONE_PAIR, prop)


def _cos_phase(stark, rate, t):
    # e^{-i stark t} cos(rate t) built from exponentials of complex arguments
    return 0.5 * (cmath.exp(-1j * (stark - rate) * t) + cmath.exp(-1j * (stark + rate) * t))


def _sin_phase(stark, rate, t):
    return (cmath.exp(-1j * (stark - rate) * t) - cmath.exp(-1j * (stark + rate) * t)) / 2j


def stage_one_coefficients_from_rates(l1: complex, l2: complex, t: float) -> dict[int, complex]:
    w2 = cmath.exp(-0.5j * math.pi)
    w4 = cmath.exp(-0.25j * math.pi)
    lam = l1 + l2
    A = {}
    A[1] = w2 / 3
    A[2] = A[6] = -w2 / 3 * _sin_phase(lam, l1, t)
    A[3] = A[5] = -1j * w2 / 3 * _cos_phase(lam, l1, t)
    A[4] = A[10] = -1j * w4 / 3
    A[7] = -w2 / 3 * cmath.exp(-2j * lam * t)
    A[8] = A[12] = -w4 / 3 * _cos_phase(lam, l2, t)
    A[9] = A[11] = 1j * w4 / 3 * _sin_phase(lam, l2, t)
    A[13] = -1 / 3
    return dict(sorted(A.items()))


def stage_one_coefficients(params: ModelParams, t: float) -> dict[int, complex]:
    """Closed-form ``A_1 .. A_13`` keyed by index; kets in :data:`STAGE_ONE_KETS`."""
    if t < 0:
        raise ValueError("stage-one time must be nonnegative")
    return stage_one_coefficients_from_rates(params.lambda1, params.lambda2, t)


def stage_one_measure(state: QutritRegister, outcome, t: float = float("nan")) -> StageOneOutcome:
    """Project atoms (2,3) of a stage-one register.

    ``outcome`` is a label (``"Psi"`` ...) or the measured levels.  Raises
    :class:`ZeroNormError` only when the branch is identically dark.
    """
    if state.num_atoms != 4:
        raise ValueError("stage-one measurement needs the 4-atom register (1,2,3,4)")
    levels = parse_outcome(outcome)
    label = next(k for k, v in STAGE_ONE_OUTCOMES.items() if v == levels)
    residual, weight = project_levels(state, _STAGE_ONE_PAIR, levels)
    if weight < NORM_EPS ** 2:
        raise ZeroNormError(f"stage-one branch {label} {levels} is dark")
    return StageOneOutcome(label, residual, weight, t)


# -- stage two ------------------------------------------------------------------

_MIXING = {"ge": "eg", "eg": "ge", "ef": "fe", "fe": "ef"}


def _reachable(left: dict, right: dict) -> list[str]:
    kets = set()
    for a in left:
        for b in right:
            ket = a + b  # atoms (1,4,5,8)
            kets.add(ket)
            mid = ket[1:3]
            if mid in _MIXING:
                kets.add(ket[0] + _MIXING[mid] + ket[3])
    return sorted(kets, key=ket_index)


def _stage_one_outcome(params: ModelParams, t: float, label: str) -> StageOneOutcome:
    return stage_one_measure(stage_one_state(params, t), label, t)


def stage_two_state(case, params: ModelParams, t: float, tau: float,
                    right_params: Optional[ModelParams] = None) -> BranchSet:
    """Generic pipeline: normalize both stage-one residuals, evolve atoms (4,5) for ``tau - t``."""
    case = as_case(case)
    left = _stage_one_outcome(params, t, case.left)
    right = _stage_one_outcome(right_params or params, t, case.right)
    joined = tensor_product(left.normalized(), right.normalized())  # atoms (1,4,5,8)
    prop = pair_propagator(params.lambda1, params.lambda2, tau - t)
    evolved = apply_pair_propagator(joined, _STAGE_TWO_PAIR, prop)

    k = case.case_index
    kets = list(BRANCH_KETS[k]) if k else _reachable(
        left.residual.support(), right.residual.support())
    stray = set(evolved.support()) - set(kets)
    if stray:
        raise AssertionError(f"propagated state left the expected support: {sorted(stray)}")
    entries = tuple((ket, evolved.amplitude(ket)) for ket in kets)
    return BranchSet(entries, case, t, tau, (left.branch_weight, right.branch_weight))


def _pair_norm(a: complex, b: complex) -> float:
    n = abs(a) ** 2 + abs(b) ** 2
    if n < NORM_EPS ** 2:
        raise ZeroNormError("stage-one normalizer vanishes")
    return n


def stage_two_coefficients_from_rates(case_index: int, l1: complex, l2: complex,
                                      t: float, tau: float) -> dict[int, complex]:
    A = stage_one_coefficients_from_rates(l1, l2, t)
    lam = l1 + l2
    E = cmath.exp
    base = E(-1j * lam * tau)
    dd = E(-2j * lam * (tau - t))
    B = {}
    if case_index <= 4:
        p_plus = base * (E(1j * l1 * tau) * E(1j * l2 * t) + E(-1j * l1 * tau) * E(2j * l1 * t) * E(1j * l2 * t))
        p_minus = base * (E(1j * l1 * tau) * E(1j * l2 * t) - E(-1j * l1 * tau) * E(2j * l1 * t) * E(1j * l2 * t))
        n25 = _pair_norm(A[2], A[5])
        n36 = _pair_norm(A[3], A[6])
        if case_index == 1:
            B[1] = A[2] ** 2 / 2 / n25 * p_plus
            B[2] = -A[2] ** 2 / 2 / n25 * p_minus
            B[3] = -A[5] ** 2 / 2 / n25 * p_minus
            B[4] = A[5] ** 2 / 2 / n25 * p_plus
            B[5] = A[2] * A[5] / n25
            B[6] = A[2] * A[5] / n25 * dd
        elif case_index in (2, 3):
            K = math.sqrt(n25) * math.sqrt(n36)
            B[1] = A[2] * A[3] / (2 * K) * p_plus
            B[2] = -A[2] * A[3] / (2 * K) * p_minus
            if case_index == 2:
                B[3] = A[2] * A[6] / K * dd
                B[4] = A[3] * A[5] / K
            else:
                B[3] = A[3] * A[5] / K * dd
                B[4] = A[2] * A[6] / K
            B[5] = -A[5] * A[6] / (2 * K) * p_minus
            B[6] = A[5] * A[6] / (2 * K) * p_plus
        else:
            B[1] = A[3] ** 2 / 2 / n36 * p_plus
            B[2] = -A[3] ** 2 / 2 / n36 * p_minus
            B[3] = -A[6] ** 2 / 2 / n36 * p_minus
            B[4] = A[6] ** 2 / 2 / n36 * p_plus
            B[5] = A[3] * A[6] / n36 * dd
            B[6] = A[3] * A[6] / n36
    elif case_index <= 8:
        q_plus = base * (E(1j * l2 * tau) * E(1j * l1 * t) + E(-1j * l2 * tau) * E(1j * l1 * t) * E(2j * l2 * t))
        q_minus = base * (E(1j * l2 * tau) * E(1j * l1 * t) - E(-1j * l2 * tau) * E(1j * l1 * t) * E(2j * l2 * t))
        n811 = _pair_norm(A[8], A[11])
        n912 = _pair_norm(A[9], A[12])
        if case_index == 5:
            B[1] = -A[8] ** 2 / 2 / n811 * q_minus
            B[2] = A[8] ** 2 / 2 / n811 * q_plus
            B[3] = -A[11] ** 2 / 2 / n811 * q_minus
            B[4] = A[11] ** 2 / 2 / n811 * q_plus
            B[5] = A[8] * A[11] / n811
            B[6] = A[8] * A[11] / n811 * dd
        elif case_index in (6, 7):
            K = math.sqrt(n811) * math.sqrt(n912)
            B[1] = A[8] * A[9] / (2 * K) * q_plus
            B[2] = -A[8] * A[9] / (2 * K) * q_minus
            if case_index == 6:
                B[3] = A[8] * A[12] / K
                B[4] = A[9] * A[11] / K * dd
            else:
                B[3] = A[9] * A[11] / K
                B[4] = A[8] * A[12] / K * dd
            B[5] = A[11] * A[12] / (2 * K) * q_plus
            B[6] = -A[11] * A[12] / (2 * K) * q_minus
        else:
            B[1] = A[9] ** 2 / 2 / n912 * q_plus
            B[2] = -A[9] ** 2 / 2 / n912 * q_minus
            B[3] = A[12] ** 2 / 2 / n912 * q_plus
            B[4] = -A[12] ** 2 / 2 / n912 * q_minus
            B[5] = A[9] * A[12] / n912
            B[6] = A[9] * A[12] / n912 * dd
    else:
        raise ValueError(f"closed forms exist for cases 1..8, got {case_index!r}")
    return B


def stage_two_coefficients(case_index: int, params: ModelParams, t: float, tau: float) -> dict[int, complex]:
    """Closed-form ``B_1 .. B_6`` of case ``case_index`` (kets in :data:`BRANCH_KETS`)."""
    if case_index not in SWAP_CASES:
        raise ValueError(f"closed forms exist for cases 1..8, got {case_index!r}")
    return stage_two_coefficients_from_rates(case_index, params.lambda1, params.lambda2, t, tau)


def closed_form_branches(case_index: int, params: ModelParams, t: float, tau: float) -> BranchSet:
    B = stage_two_coefficients(case_index, params, t, tau)
    A = stage_one_coefficients(params, t)
    weights = tuple(abs(A[i]) ** 2 + abs(A[j]) ** 2
                    for i, j in (STAGE_ONE_SURVIVORS[lab] for lab in SWAP_CASES[case_index]))
    entries = tuple(zip(BRANCH_KETS[case_index], (B[i] for i in range(1, 7))))
    return BranchSet(entries, SwapCase.numbered(case_index), t, tau, weights)


def _is_sector(kets) -> bool:
    if len(kets) != 2:
        return False
    (a1, b1), (a2, b2) = kets
    return a1 != a2 and b1 != b2


def stage_two_measure(branches: BranchSet, outcome) -> FinalPair:
    """Measure atoms (4,5) and report the normalized (1,8) state."""
    levels = parse_outcome(outcome)
    kets = branches.selected(levels)
    coeffs = branches.as_dict()
    residual, weight = project_levels(branches.register(), _STAGE_TWO_PAIR, levels)
    state, _ = normalize(residual)
    selected_coeffs = tuple(coeffs[k] for k in kets)
    outer = [k[0] + k[3] for k in kets]
    if _is_sector(outer):
        neg = negativity_sector(*selected_coeffs)
        method = "closed_form"
    else:
        neg = pure_state_negativity(state.amplitudes)
        method = "partial_transpose"
    return FinalPair(
        state=state,
        negativity=neg,
        success_probability=success_probability(branches, kets),
        outcome=levels,
        case=branches.case,
        selected_weight=weight,
        stage_one_weights=branches.stage_one_weights,
        method=method,
        coefficients=selected_coeffs,
    )


def run_protocol(params: ModelParams, t: float, tau: float, case, outcome,
                 method: str = "propagator", right_params: Optional[ModelParams] = None) -> FinalPair:
    """End-to-end swap.

    ``method="propagator"`` runs the generic register pipeline;
    ``method="closed_form"`` evaluates the B-coefficient formulas (numbered
    cases only, one shared parameter set).
    """
    case = as_case(case)
    if method == "propagator":
        branches = stage_two_state(case, params, t, tau, right_params)
    elif method == "closed_form":
        if case.extended:
            raise ValueError(f"{case} has no closed form; use method='propagator'")
        if right_params is not None and right_params != params:
            raise ValueError("closed forms assume one parameter set for both cavities")
        branches = closed_form_branches(case.case_index, params, t, tau)
    else:
        raise ValueError(f"unknown method {method!r}")
    return stage_two_measure(branches, outcome)


def stabilized_negativity(params: ModelParams, t: float, case_index: int = 1) -> float:
    """Long-time limit ``r / (1 + r²)`` of the case-1 / primed case-4 negativity.

    ``r = (|A2(t)| / |A5(t)|)²``; valid when ``Im(lambda1) > 0`` so one
    exponential dominates both selected coefficients.
    """
    if case_index not in (1, 4):
        raise ValueError("limit implemented for cases 1 and 4")
    A = stage_one_coefficients(params, t)
    r = (abs(A[2]) / abs(A[5])) ** 2
    return r / (1 + r * r)


def ket_labels(num_atoms: int) -> list[str]:
    return [ket_label(i, num_atoms) for i in range(3 ** num_atoms)]
