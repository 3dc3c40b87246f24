"""
Pure-state algebra for registers of three-level (Lambda-type) atoms.

Basis convention
----------------
Each atom has levels ``g, e, f`` mapped to indices ``0, 1, 2``.  A register
of ``n`` atoms is a dense complex vector of length ``3**n``; the leftmost atom
is the most significant base-3 digit, so the ket ``|g e f⟩`` sits at index
``0*9 + 1*3 + 2 = 5``.  Kets therefore read left to right in label order.  Serialized output carries the tag :data:`CONVENTION`.

Registers are immutable and unnormalized states are first-class: all of the
branch bookkeeping of the swapping protocol happens on unnormalized vectors.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, ZeroNormError

LEVELS = ("g", "e", "f")
LEVEL_INDEX = {"g": 0, "e": 1, "f": 2}
CONVENTION = "gef-msd"

MAX_ATOMS = 8
NORM_EPS = 1e-12


def _level_index(level) -> int:
    if isinstance(level, str):
        try:
            return LEVEL_INDEX[level]
        except KeyError:
            raise ValueError(f"unknown level {level!r}; expected one of g, e, f") from None
    idx = int(level)
    if idx not in (0, 1, 2):
        raise ValueError(f"level index {level!r} out of range")
    return idx


def ket_index(ket: str) -> int:
    """Flat index of a ket label such as ``"gege"``."""
    idx = 0
    for ch in ket:
        idx = 3 * idx + _level_index(ch)
    return idx


def ket_label(index: int, num_atoms: int) -> str:
    digits = []
    for _ in range(num_atoms):
        index, d = divmod(index, 3)
        digits.append(LEVELS[d])
    return "".join(reversed(digits))


@dataclass(frozen=True, eq=False)
class QutritRegister:
    """Pure (possibly unnormalized) state of ``num_atoms`` three-level atoms."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        n = _atoms_for_length(amps.size)
        if n > MAX_ATOMS:
            raise CapacityError(f"{n} atoms exceeds the maximum of {MAX_ATOMS}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    # -- construction --------------------------------------------------

    @classmethod
    def basis(cls, ket: str, amplitude: complex = 1.0) -> "QutritRegister":
        vec = np.zeros(3 ** len(ket), dtype=complex)
        vec[ket_index(ket)] = amplitude
        return cls(vec)

    @classmethod
    def from_kets(cls, terms: dict[str, complex]) -> "QutritRegister":
        """Build a register from ``{"ge": a, "eg": b, ...}``; labels must share a length."""
        sizes = {len(k) for k in terms}
        if len(sizes) != 1:
            raise ValueError("ket labels must all have the same number of atoms")
        vec = np.zeros(3 ** sizes.pop(), dtype=complex)
        for ket, amp in terms.items():
            vec[ket_index(ket)] += amp
        return cls(vec)

    # -- accessors -----------------------------------------------------

    @property
    def num_atoms(self) -> int:
        return _atoms_for_length(self.amplitudes.size)

    def amplitude(self, ket: str) -> complex:
        if len(ket) != self.num_atoms:
            raise ValueError(f"ket {ket!r} does not match {self.num_atoms} atoms")
        return complex(self.amplitudes[ket_index(ket)])

    def squared_norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis of length 3 per atom."""
        return self.amplitudes.reshape((3,) * self.num_atoms)

    def support(self, atol: float = 0.0) -> dict[str, complex]:
        """Nonzero amplitudes keyed by ket label, in index order."""
        idx = np.flatnonzero(np.abs(self.amplitudes) > atol)
        return {ket_label(i, self.num_atoms): complex(self.amplitudes[i]) for i in idx}

    def scaled(self, factor: complex) -> "QutritRegister":
        return QutritRegister(self.amplitudes * factor)

    def to_json(self) -> dict:
        return {
            "num_atoms": self.num_atoms,
            "convention": CONVENTION,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_json(cls, data: dict) -> "QutritRegister":
        if data.get("convention", CONVENTION) != CONVENTION:
            raise ValueError(f"unsupported basis convention {data['convention']!r}")
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
        reg = cls(amps)
        if reg.num_atoms != data["num_atoms"]:
            raise ValueError("num_atoms does not match amplitude count")
        return reg

    def __repr__(self) -> str:
        terms = " + ".join(f"({a:.4g})|{k}⟩" for k, a in self.support(1e-15).items())
        return f"QutritRegister({terms or '0'})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Reduced density matrix on a set of kept atoms (ordering as requested)."""

    matrix: np.ndarray
    atoms: tuple[int, ...]

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


def _atoms_for_length(size: int) -> int:
    n, rest = 0, size
    while rest > 1 and rest % 3 == 0:
        rest //= 3
        n += 1
    if rest != 1 or n == 0:
        raise ValueError(f"amplitude vector of length {size} is not 3**n with n >= 1")
    return n


def _check_positions(positions: Sequence[int], num_atoms: int) -> tuple[int, ...]:
    pos = tuple(int(p) for p in positions)
    if len(set(pos)) != len(pos):
        raise ValueError(f"positions {pos} are not distinct")
    for p in pos:
        if not 0 <= p < num_atoms:
            raise ValueError(f"position {p} outside register of {num_atoms} atoms")
    return pos


def tensor_product(a: QutritRegister, b: QutritRegister, max_atoms: int = MAX_ATOMS) -> QutritRegister:
    total = a.num_atoms + b.num_atoms
    if total > max_atoms:
        raise CapacityError(f"product of {total} atoms exceeds the maximum of {max_atoms}")
    return QutritRegister(np.kron(a.amplitudes, b.amplitudes))


def product(registers: Iterable[QutritRegister]) -> QutritRegister:
    regs = list(registers)
    out = regs[0]
    for r in regs[1:]:
        out = tensor_product(out, r)
    return out


def permute_atoms(state: QutritRegister, order: Sequence[int]) -> QutritRegister:
    """New register whose atom ``k`` is atom ``order[k]`` of ``state``."""
    order = _check_positions(order, state.num_atoms)
    if len(order) != state.num_atoms:
        raise ValueError("order must list every atom exactly once")
    return QutritRegister(np.transpose(state.tensor(), order).reshape(-1))


def project_levels(state: QutritRegister, positions: Sequence[int], levels: Sequence) -> tuple[QutritRegister, float]:
    """Post-select the atoms at ``positions`` on ``levels``.

    Returns the unnormalized residual on the remaining atoms (original order
    kept) and the branch weight, i.e. the squared norm of that residual.  A
    dark branch comes back as a zero vector with weight 0.
    """
    pos = _check_positions(positions, state.num_atoms)
    if len(levels) != len(pos):
        raise ValueError("levels and positions differ in length")
    if len(pos) >= state.num_atoms:
        raise ValueError("at least one atom must remain unmeasured")
    index = [slice(None)] * state.num_atoms
    for p, lev in zip(pos, levels):
        index[p] = _level_index(lev)
    residual = QutritRegister(state.tensor()[tuple(index)].reshape(-1))
    return residual, residual.squared_norm()


def outcomes(num_measured: int):
    """All level tuples for ``num_measured`` atoms, in basis order."""
    return itertools.product(LEVELS, repeat=num_measured)


def normalize(state: QutritRegister, eps: float = NORM_EPS) -> tuple[QutritRegister, float]:
    n = state.norm()
    if n < eps:
        raise ZeroNormError(f"state norm {n:.3e} is below {eps:g}")
    return QutritRegister(state.amplitudes / n), n


def reduced_density(state: QutritRegister, keep: Sequence[int]) -> DensityMatrix:
    """Partial trace of ``|ψ⟩⟨ψ|`` onto ``keep`` (kept atoms ordered as given).

    The trace equals the squared norm of ``state``; nothing is renormalized.
    """
    keep = _check_positions(keep, state.num_atoms)
    if not keep:
        raise ValueError("keep must name at least one atom")
    if state.squared_norm() == 0.0:
        raise ZeroNormError("cannot form a density matrix from the zero vector")
    traced = [p for p in range(state.num_atoms) if p not in keep]
    psi = np.transpose(state.tensor(), list(keep) + traced)
    psi = psi.reshape(3 ** len(keep), 3 ** len(traced))
    rho = psi @ psi.conj().T
    # exact Hermitian symmetrization removes matmul roundoff asymmetry
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho, keep)
