"""
Effective two-atom dynamics in the dispersive regime.

With both cavity modes in vacuum and far detuned, each cavity mediates a
direct exchange between the two atoms it holds.  The ``g<->e`` transition
(mode a) gives the complex rate ``lambda1 = g1**2 / (Delta - i Gamma/2)``;
the ``f<->e`` transition (mode b) gives ``lambda2 = g2**2 / (delta - i gamma/2)``.
The pair Hamiltonian is

    H = (l1 + l2) (|e⟩⟨e| ⊗ 1 + 1 ⊗ |e⟩⟨e|)
        + l1 (|eg⟩⟨ge| + |ge⟩⟨eg|) + l2 (|ef⟩⟨fe| + |fe⟩⟨ef|)

Both exchange terms carry the *same* complex coefficient, so ``H`` equals its
transpose but is not Hermitian once any dissipation is present.

Rates are in units of a reference coupling ``g`` and times are dimensionless
``g t``.  With the dissipation combinations defined as emission minus loss
(``Gamma = gamma_e - gamma_g - kappa``), ``Im(l1)`` is positive for
``Gamma > 0`` and conditional norms grow; nothing here renormalizes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominatorError
from .expm import matrix_exponential
from .registers import QutritRegister, ket_index

DENOM_EPS = 1e-12

# flat indices in the 9-dim pair basis (g,e,f) x (g,e,f)
GG, GE, GF, EG, EE, EF, FG, FE, FF = range(9)
DARK_KETS = (GG, GF, FG, FF)


def effective_rate(coupling: float, detuning: float, dissipation: float) -> complex:
    """``coupling**2 / (detuning - i*dissipation/2)``."""
    denom = complex(detuning, -0.5 * dissipation)
    if abs(denom) < DENOM_EPS:
        raise DegenerateDenominatorError(
            f"|detuning - i*dissipation/2| = {abs(denom):.3e} is below {DENOM_EPS:g}"
        )
    return coupling ** 2 / denom


def _cancel(total: float, parts) -> float:
    # a difference of decimal inputs that cancels up to roundoff is zero
    scale = max((abs(p) for p in parts), default=0.0)
    return 0.0 if abs(total) <= 1e-12 * scale else total


@dataclass(frozen=True)
class ModelParams:
    """Couplings, detunings and effective dissipations, all in units of ``g``."""

    g1: float = 1.0
    g2: float = 1.0
    Delta: float = 2.0
    delta: float = 2.0
    Gamma: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("g1", "g2", "Delta", "delta", "Gamma", "gamma"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.g1 <= 0 or self.g2 <= 0:
            raise ValueError("couplings g1, g2 must be positive")
        # evaluating the rates validates both denominators
        self.lambda1
        self.lambda2

    @classmethod
    def from_rates(cls, *, g1=1.0, g2=1.0, Delta, delta, gamma_e, gamma_g, gamma_f,
                   kappa, kappa_prime) -> "ModelParams":
        """Derive ``Gamma, gamma`` from spontaneous-emission and leakage rates.

        ``Gamma = gamma_e - gamma_g - kappa`` and
        ``gamma = gamma_e - gamma_f - kappa_prime``.  Sums that cancel to
        within 1e-12 of the largest rate are set to exactly zero.
        """
        Gamma = _cancel(gamma_e - gamma_g - kappa, (gamma_e, gamma_g, kappa))
        gamma = _cancel(gamma_e - gamma_f - kappa_prime, (gamma_e, gamma_f, kappa_prime))
        return cls(g1=g1, g2=g2, Delta=Delta, delta=delta, Gamma=Gamma, gamma=gamma)

    @property
    def lambda1(self) -> complex:
        return effective_rate(self.g1, self.Delta, self.Gamma)

    @property
    def lambda2(self) -> complex:
        return effective_rate(self.g2, self.delta, self.gamma)

    def rates(self) -> tuple[complex, complex]:
        return self.lambda1, self.lambda2

    def as_dict(self) -> dict:
        return {"g1": self.g1, "g2": self.g2, "Delta": self.Delta, "delta": self.delta,
                "Gamma": self.Gamma, "gamma": self.gamma}


def build_effective_hamiltonian(l1: complex, l2: complex) -> np.ndarray:
    h = np.zeros((9, 9), dtype=complex)
    stark = l1 + l2
    for k in (GE, EG, EF, FE):
        h[k, k] = stark
    h[EE, EE] = 2 * stark
    h[GE, EG] = h[EG, GE] = l1
    h[EF, FE] = h[FE, EF] = l2
    return h


@dataclass(frozen=True, eq=False)
class PairPropagator:
    matrix: np.ndarray
    duration: float

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (9, 9):
            raise ValueError("pair propagator must be 9x9")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def _mix_block(stark: complex, rate: complex, T: float) -> tuple[complex, complex]:
    """Diagonal and off-diagonal of exp(-iT[[s, r],[r, s]]) via eigen-exponentials."""
    plus = np.exp(-1j * (stark + rate) * T)
    minus = np.exp(-1j * (stark - rate) * T)
    return 0.5 * (minus + plus), 0.5 * (plus - minus)


def pair_propagator(l1: complex, l2: complex, duration: float) -> PairPropagator:
    """Closed-form ``exp(-i H T)`` for the effective pair Hamiltonian.

    On ``{ge, eg}`` this is ``e^{-i(l1+l2)T} [[cos l1T, -i sin l1T], [-i sin l1T, cos l1T]]``,
    likewise on ``{ef, fe}`` with ``l2``; ``|ee⟩`` picks up ``e^{-2i(l1+l2)T}``
    and the four kets without an excited atom are untouched.

    ``duration`` may be negative (backward evolution); the protocol uses this
    when the second interaction clock is read before the first one ends.
    """
    T = float(duration)
    stark = l1 + l2
    u = np.zeros((9, 9), dtype=complex)
    for k in DARK_KETS:
        u[k, k] = 1.0
    diag, off = _mix_block(stark, l1, T)
    u[GE, GE] = u[EG, EG] = diag
    u[GE, EG] = u[EG, GE] = off
    diag, off = _mix_block(stark, l2, T)
    u[EF, EF] = u[FE, FE] = diag
    u[EF, FE] = u[FE, EF] = off
    u[EE, EE] = np.exp(-2j * stark * T)
    return PairPropagator(u, T)


def pair_propagator_expm(l1: complex, l2: complex, duration: float) -> PairPropagator:
    """Same propagator by numerically exponentiating the Hamiltonian."""
    h = build_effective_hamiltonian(l1, l2)
    return PairPropagator(matrix_exponential(h, -1j * float(duration)), float(duration))


def apply_pair_propagator(state: QutritRegister, positions: tuple[int, int], prop) -> QutritRegister:
    """Act with a 9x9 pair operator on atoms ``positions = (i, j)``, ``i < j``."""
    i, j = (int(p) for p in positions)
    n = state.num_atoms
    if not (0 <= i < j < n):
        raise ValueError(f"pair positions {positions} invalid for {n} atoms (need i < j)")
    u = prop.matrix if isinstance(prop, PairPropagator) else np.asarray(prop, dtype=complex)
    rest = [k for k in range(n) if k not in (i, j)]
    order = [i, j] + rest
    psi = np.transpose(state.tensor(), order).reshape(9, -1)
    psi = (u @ psi).reshape((3,) * n)
    return QutritRegister(np.transpose(psi, np.argsort(order)).reshape(-1))


def pair_ket(label: str) -> int:
    """Index of a two-atom ket in the 9-dim pair basis."""
    if len(label) != 2:
        raise ValueError("pair kets have two letters")
    return ket_index(label)
