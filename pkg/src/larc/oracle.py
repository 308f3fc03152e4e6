"""Exact Pauli-string arithmetic for certifying closure dimensions.

Products and brackets of Pauli strings stay inside the string family, so
the Lie closure of single-string generators can be enumerated exactly with
quarter-phase integer arithmetic and no floating point.  Distinct strings
are linearly independent, which is what makes the string count an exact
algebra dimension.

Positive real factors are irrelevant for spans, so brackets return the
product string with its unit phase and drop the overall factor 2; phases
are tracked modulo {+1, -1, +i, -i} and stripped entirely for dimension
counts.
"""

from dataclasses import dataclass

import numpy as np

from .errors import MixedSupport

_LETTERS = "IXYZ"

# single-qubit products: (a, b) -> (phase power of i, letter)
_MUL = {}
for _a in _LETTERS:
    _MUL[("I", _a)] = (0, _a)
    _MUL[(_a, "I")] = (0, _a)
    _MUL[(_a, _a)] = (0, "I")
_MUL[("X", "Y")] = (1, "Z")
_MUL[("Y", "X")] = (3, "Z")
_MUL[("Y", "Z")] = (1, "X")
_MUL[("Z", "Y")] = (3, "X")
_MUL[("Z", "X")] = (1, "Y")
_MUL[("X", "Z")] = (3, "Y")

_PHASES = (1, 1j, -1, -1j)  # i^k

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """Phase times a tensor word over {I, X, Y, Z}; q qubits, n = 2^q."""

    q: int
    letters: str
    phase: complex = 1

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("need at least one qubit")
        if len(self.letters) != self.q or any(c not in _LETTERS for c in self.letters):
            raise ValueError(f"letters {self.letters!r} invalid for {self.q} qubits")
        if self.phase not in _PHASES:
            raise ValueError(f"phase {self.phase!r} not a quarter phase")

    def to_matrix(self) -> np.ndarray:
        M = np.array([[self.phase]], dtype=complex)
        for c in self.letters:
            M = np.kron(M, _SINGLE[c])
        return M


def parse_pauli(word, q=None) -> PauliString:
    if q is None:
        q = len(word)
    return PauliString(q=q, letters=word)


def pauli_mul(P, Q) -> PauliString:
    if P.q != Q.q:
        raise ValueError(f"qubit-count mismatch: {P.q} vs {Q.q}")
    k = 0
    letters = []
    for a, b in zip(P.letters, Q.letters):
        dk, c = _MUL[(a, b)]
        k += dk
        letters.append(c)
    return PauliString(q=P.q, letters="".join(letters), phase=P.phase * Q.phase * _PHASES[k % 4])


def pauli_commute(P, Q) -> bool:
    """Strings commute iff an even number of sites anticommute."""
    if P.q != Q.q:
        raise ValueError(f"qubit-count mismatch: {P.q} vs {Q.q}")
    odd = sum(1 for a, b in zip(P.letters, Q.letters) if a != "I" and b != "I" and a != b)
    return odd % 2 == 0


def pauli_bracket(P, Q):
    """[P, Q] up to the positive factor 2; None when the strings commute.

    For anticommuting strings PQ = -QP, so [P, Q] = 2 PQ and the returned
    string with its unit phase determines the commutator direction exactly.
    """
    if pauli_commute(P, Q):
        return None
    return pauli_mul(P, Q)


def _as_string(g, q):
    if isinstance(g, PauliString):
        s = g
    elif isinstance(g, str):
        s = parse_pauli(g, q)
    else:
        raise ValueError(f"cannot interpret {g!r} as a Pauli string")
    if q is not None and s.q != q:
        raise ValueError(f"qubit-count mismatch: {s.q} vs {q}")
    return s


def pauli_closure_dimension(generators, q=None):
    """Exact dimension of the algebra generated by single-string generators.

    Each generator must be supported on exactly one Pauli string (supplied
    as a string, a :class:`PauliString`, or a singleton collection); then
    the string span equals the real span and the closed string count is the
    algebra dimension.  Anything else raises :class:`MixedSupport` rather
    than risking an over- or under-count.

    Returns ``(dimension, sorted letter strings)``.
    """
    strings = []
    for g in generators:
        if isinstance(g, (list, tuple, set, frozenset)):
            support = sorted(g) if not isinstance(g, (list, tuple)) else list(g)
            if len(support) != 1:
                raise MixedSupport(
                    f"generator support {support!r} is not a single Pauli string; "
                    "the exact oracle certifies single-string generators only"
                )
            g = support[0]
        strings.append(_as_string(g, q))
    if not strings:
        raise ValueError("no generators given")
    qq = strings[0].q
    for s in strings:
        if s.q != qq:
            raise ValueError("generators act on different qubit counts")

    closed = {s.letters for s in strings}
    frontier = list(closed)
    by_letters = {w: PauliString(q=qq, letters=w) for w in closed}
    while frontier:
        new = []
        snapshot = list(by_letters)
        for w in frontier:
            for v in snapshot:
                B = pauli_bracket(by_letters[w], by_letters[v])
                if B is not None and B.letters not in closed:
                    closed.add(B.letters)
                    by_letters[B.letters] = PauliString(q=qq, letters=B.letters)
                    new.append(B.letters)
        frontier = new
    return len(closed), sorted(closed)
