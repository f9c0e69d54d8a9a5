"""Dense statevector simulation with Pauli-string algebra.

Bit convention: qubit ``q`` is bit ``q`` of the amplitude index, so qubit 0 is
the least-significant bit. A Pauli string is written as a letter sequence whose
``i``-th letter acts on qubit ``i``; ``"XI"`` flips qubit 0 and maps index 0 to
index 1.

A Pauli string acts on a basis state as ``P|b> = phase(b) |b ^ xmask>``, so every
application is a gather plus an elementwise phase. No dense matrix is ever built
here; the oracle module owns dense construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, DimensionError

PAULI_LETTERS = frozenset("IXYZ")
_HERMITIAN_ATOL = 1e-12
_EXPECTATION_IMAG_ATOL = 1e-10


@dataclass(frozen=True)
class PauliTerm:
    """A weighted Pauli string ``coefficient * P``."""

    letters: str
    coefficient: complex = 1.0

    def __post_init__(self):
        letters = "".join(self.letters).upper()
        bad = set(letters) - PAULI_LETTERS
        if bad:
            raise ContractError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")
        if not letters:
            raise ContractError("Pauli string must act on at least one qubit")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    def support(self) -> list[int]:
        return [q for q, p in enumerate(self.letters) if p != "I"]

    def scaled(self, factor: complex) -> "PauliTerm":
        return PauliTerm(self.letters, self.coefficient * factor)

    @classmethod
    def from_sparse(cls, n_qubits: int, ops: dict[int, str], coefficient: complex = 1.0) -> "PauliTerm":
        """Build a term from ``{qubit: letter}``; unlisted qubits get identity."""
        letters = ["I"] * n_qubits
        for q, p in ops.items():
            if not 0 <= q < n_qubits:
                raise DimensionError(f"qubit {q} outside register of size {n_qubits}")
            letters[q] = p
        return cls("".join(letters), coefficient)

    def __str__(self):
        return f"{self.coefficient.real:+.6g}{self.coefficient.imag:+.6g}j*{self.letters}"


@dataclass
class PauliSum:
    """Linear combination of Pauli strings on a common register."""

    terms: list[PauliTerm] = field(default_factory=list)

    def __post_init__(self):
        self.terms = list(self.terms)
        sizes = {t.n_qubits for t in self.terms}
        if len(sizes) > 1:
            raise DimensionError(f"terms act on different register sizes {sorted(sizes)}")

    @property
    def n_qubits(self) -> int:
        if not self.terms:
            raise ContractError("empty PauliSum has no register size")
        return self.terms[0].n_qubits

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.terms + list(other.terms))

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other.scaled(-1.0)

    def scaled(self, factor: complex) -> "PauliSum":
        return PauliSum([t.scaled(factor) for t in self.terms])

    def is_hermitian(self, atol: float = _HERMITIAN_ATOL) -> bool:
        return all(abs(t.coefficient.imag) <= atol for t in self.terms)

    def simplify(self, atol: float = 0.0) -> "PauliSum":
        """Merge repeated strings and drop terms with ``|c| <= atol``.

        Order of first appearance is kept so output is deterministic.
        """
        merged: dict[str, complex] = {}
        for t in self.terms:
            merged[t.letters] = merged.get(t.letters, 0.0) + t.coefficient
        return PauliSum([PauliTerm(p, c) for p, c in merged.items() if abs(c) > atol])

    def coefficient_of(self, letters: str) -> complex:
        return sum((t.coefficient for t in self.terms if t.letters == letters), 0.0j)

    @classmethod
    def from_terms(cls, items: Iterable[tuple[complex, str]]) -> "PauliSum":
        return cls([PauliTerm(p, c) for c, p in items])

    def to_text(self) -> str:
        return "".join(f"{t.coefficient.real!r} {t.coefficient.imag!r} {t.letters}\n" for t in self.terms)

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        """Parse lines ``<re> <im> <letters>``; blank lines and ``#`` comments are skipped."""
        terms = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ContractError(f"line {lineno}: expected '<re> <im> <letters>', got {raw!r}")
            try:
                coeff = complex(float(parts[0]), float(parts[1]))
            except ValueError as exc:
                raise ContractError(f"line {lineno}: bad coefficient in {raw!r}") from exc
            letters = parts[2]
            if set(letters.upper()) - PAULI_LETTERS or letters != letters.upper():
                raise ContractError(f"line {lineno}: letters must be drawn from I, X, Y, Z: {letters!r}")
            terms.append(PauliTerm(letters, coeff))
        return cls(terms)


class StateVector:
    """Normalized amplitude vector over ``n_qubits`` qubits."""

    def __init__(self, amplitudes, n_qubits: int | None = None):
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        n = int(round(np.log2(amps.size))) if amps.size else -1
        if n < 1 or 2**n != amps.size:
            raise DimensionError(f"amplitude length {amps.size} is not 2^n with n >= 1")
        if n_qubits is not None and n_qubits != n:
            raise DimensionError(f"{amps.size} amplitudes do not describe {n_qubits} qubits")
        self.amplitudes = amps
        self.n_qubits = n

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.amplitudes / self.norm())

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits})"


@lru_cache(maxsize=4096)
def pauli_action(letters: str) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(source, phase)`` with ``(P psi)[c] = phase[c] * psi[source[c]]``."""
    n = len(letters)
    xmask = zmask = 0
    n_y = 0
    for q, p in enumerate(letters):
        if p in "XY":
            xmask |= 1 << q
        if p in "YZ":
            zmask |= 1 << q
        n_y += p == "Y"
    idx = np.arange(2**n, dtype=np.int64)
    source = idx ^ xmask
    # Phase of P|b> is i^{n_Y} (-1)^{popcount(b & zmask)}; evaluate at b = source.
    parity = np.zeros(idx.size, dtype=np.int64)
    masked = source & zmask
    for q in range(n):
        parity ^= (masked >> q) & 1
    phase = (1j**n_y) * (1 - 2 * parity)
    source.setflags(write=False)
    phase = phase.astype(np.complex128)
    phase.setflags(write=False)
    return source, phase


def _apply_letters(amps: np.ndarray, letters: str) -> np.ndarray:
    """Apply an unweighted Pauli string along the last axis of ``amps``."""
    source, phase = pauli_action(letters)
    return phase * amps[..., source]


def _rotate(amps: np.ndarray, letters: str, angle: float) -> np.ndarray:
    """``e^{i angle P}`` along the last axis: ``cos * psi + i sin * P psi``."""
    return np.cos(angle) * amps + (1j * np.sin(angle)) * _apply_letters(amps, letters)


def apply_sum_array(amps: np.ndarray, op: PauliSum) -> np.ndarray:
    out = np.zeros_like(amps)
    for t in op.terms:
        if t.is_identity:
            out += t.coefficient * amps
        else:
            out += t.coefficient * _apply_letters(amps, t.letters)
    return out


def _check_size(state: StateVector, n: int, what: str):
    if state.n_qubits != n:
        raise DimensionError(f"{what} acts on {n} qubits but the state has {state.n_qubits}")


def apply_pauli_string(state: StateVector, p: PauliTerm) -> StateVector:
    """Return ``coefficient * P|state>``."""
    _check_size(state, p.n_qubits, "Pauli string")
    return StateVector(p.coefficient * _apply_letters(state.amplitudes, p.letters))


def apply_pauli_sum(state: StateVector, op: PauliSum) -> np.ndarray:
    """Return the (generally unnormalized) amplitudes of ``op|state>``."""
    _check_size(state, op.n_qubits, "PauliSum")
    return apply_sum_array(state.amplitudes, op)


def apply_rotation(state: StateVector, generator: PauliTerm, angle: float) -> StateVector:
    """Return ``e^{i angle R}|state>`` for a unit-coefficient Pauli string ``R``."""
    if generator.coefficient != 1.0:
        raise ContractError(f"rotation generator must have coefficient 1, got {generator.coefficient}")
    _check_size(state, generator.n_qubits, "generator")
    return StateVector(_rotate(state.amplitudes, generator.letters, float(angle)))


def inner_product(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugating the first argument."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"inner product of {a.n_qubits}- and {b.n_qubits}-qubit states")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def expectation(state: StateVector, obs: PauliSum) -> float:
    if not obs.is_hermitian():
        raise ContractError("expectation requires a Hermitian PauliSum (real coefficients)")
    _check_size(state, obs.n_qubits, "observable")
    value = complex(np.vdot(state.amplitudes, apply_sum_array(state.amplitudes, obs)))
    scale = max(1.0, sum(abs(t.coefficient) for t in obs.terms))
    if abs(value.imag) > _EXPECTATION_IMAG_ATOL * scale:
        raise ContractError(f"expectation has imaginary part {value.imag:.3e}; state not normalized?")
    return value.real


def pauli_strings(n_qubits: int, letters: Sequence[str] = "IXYZ"):
    """Yield every Pauli string of length ``n_qubits`` over ``letters``."""
    if n_qubits == 0:
        yield ""
        return
    for head in letters:
        for tail in pauli_strings(n_qubits - 1, letters):
            yield head + tail
