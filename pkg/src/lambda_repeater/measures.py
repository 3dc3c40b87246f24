"""Negativity and post-selection success probability."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import NotNormalizedError, ZeroNormError
from .registers import DensityMatrix

SQ_EPS = 1e-24
EIG_EPS = 1e-12
TRACE_TOL = 1e-10


@dataclass(frozen=True)
class MeasureReport:
    negativity: float
    success_probability: float
    method: str  # "closed_form" or "partial_transpose"


def negativity_sector(a: complex, b: complex) -> float:
    """Negativity of ``a|xy⟩ + b|yx⟩`` (any normalization): ``|a||b| / (|a|²+|b|²)``.

    Uses the ``(‖ρ^T_A‖₁ - 1)/2`` convention, so a maximally entangled pair
    of this form gives 0.5.
    """
    ma, mb = abs(a), abs(b)
    total = ma * ma + mb * mb
    if total < SQ_EPS:
        raise ZeroNormError("both sector amplitudes vanish")
    return ma * mb / total


def partial_transpose(rho: np.ndarray, dims: tuple[int, int] = (3, 3)) -> np.ndarray:
    """Transpose the second subsystem of a bipartite operator."""
    da, db = dims
    r = np.asarray(rho).reshape(da, db, da, db)
    return r.transpose(0, 3, 2, 1).reshape(da * db, da * db)


def negativity_partial_transpose(rho, dims: tuple[int, int] = (3, 3)) -> float:
    """``(‖ρ^T_B‖₁ - 1) / 2`` for a unit-trace two-party density matrix."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    tr = np.trace(m)
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotNormalizedError(f"trace {tr:.6g} differs from 1")
    pt = partial_transpose(m, dims)
    evals = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    evals[np.abs(evals) < EIG_EPS] = 0.0
    return max(0.0, 0.5 * (float(np.abs(evals).sum()) - 1.0))


def pure_state_negativity(amplitudes) -> float:
    """Partial-transpose negativity of a (normalized or not) two-qutrit pure state."""
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    nrm = np.vdot(psi, psi).real
    if nrm < SQ_EPS:
        raise ZeroNormError("zero state has no negativity")
    psi = psi / np.sqrt(nrm)
    return negativity_partial_transpose(np.outer(psi, psi.conj()))


def success_probability(branches, selected: Iterable[str]) -> float:
    """Weight of the ``selected`` kets relative to the whole branch set.

    ``branches`` is a :class:`~lambda_repeater.protocol.BranchSet` or any
    mapping from ket label to coefficient.
    """
    coeffs = branches.as_dict() if hasattr(branches, "as_dict") else dict(branches)
    total = sum(abs(c) ** 2 for c in coeffs.values())
    if total < SQ_EPS:
        raise ZeroNormError("branch set has zero total weight")
    picked = 0.0
    for ket in selected:
        if ket not in coeffs:
            raise KeyError(f"ket {ket!r} is not part of the branch set")
        picked += abs(coeffs[ket]) ** 2
    return picked / total
