"""Phase-tracked Pauli operators in symplectic (x, z) form.

An operator is stored as ``i**phase`` times a tensor product of the letters
I, X, Y, Z, with Y kept as its own letter (Y = iXZ).  Hermitian Paulis are
exactly those with an even phase exponent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .lattice import Lattice, Region

_PHASE_TEXT = {0: "+1", 1: "+i", 2: "-1", 3: "-i"}
_TEXT_PHASE = {v: k for k, v in _PHASE_TEXT.items()}
_TEXT_PHASE.update({"+": 0, "-": 2, "1": 0, "i": 1, "-i": 3, "+i": 1})


def _frozen(a):
    a = np.array(a, dtype=bool)
    a.setflags(write=False)
    return a


def letter_phase(x1, z1, x2, z2) -> np.ndarray:
    """Per-site exponent of i picked up by letter(x1,z1) * letter(x2,z2)."""
    x1 = x1.astype(np.int64)
    z1 = z1.astype(np.int64)
    x2 = x2.astype(np.int64)
    z2 = z2.astype(np.int64)
    return (
        x1 * z1 * (z2 - x2)
        + x1 * (1 - z1) * z2 * (2 * x2 - 1)
        + (1 - x1) * z1 * x2 * (1 - 2 * z2)
    )


@dataclass(frozen=True, eq=False)
class PauliOp:
    x: np.ndarray
    z: np.ndarray
    phase: int = 0

    def __post_init__(self):
        x = _frozen(self.x)
        z = _frozen(self.z)
        if x.shape != z.shape or x.ndim != 1:
            raise InputError("x and z bit vectors must be 1-D and equally long")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @property
    def n(self) -> int:
        return self.x.size

    @classmethod
    def identity(cls, n: int) -> "PauliOp":
        return cls(np.zeros(n, bool), np.zeros(n, bool))

    @classmethod
    def from_letters(cls, letters: str, phase: int = 0) -> "PauliOp":
        """Build from a dense string such as ``"XIZY"`` (qubit 0 first)."""
        letters = letters.upper()
        if set(letters) - set("IXYZ"):
            raise InputError(f"bad Pauli letters {letters!r}")
        x = np.array([c in "XY" for c in letters], dtype=bool)
        z = np.array([c in "ZY" for c in letters], dtype=bool)
        return cls(x, z, phase)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliOp":
        s = ["I"] * n
        s[qubit] = letter
        return cls.from_letters("".join(s))

    @classmethod
    def on_sites(cls, lattice: Lattice, letter: str, sites, phase: int = 0) -> "PauliOp":
        """Same letter on every listed site."""
        x = np.zeros(lattice.n_sites, bool)
        z = np.zeros(lattice.n_sites, bool)
        for s in sites:
            i = lattice.index(lattice.check(s))
            x[i] = letter in "XY"
            z[i] = letter in "ZY"
        return cls(x, z, phase)

    def letters(self) -> str:
        table = np.array(list("IXZY"))
        return "".join(table[self.x.astype(int) + 2 * self.z.astype(int)])

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.x | self.z)

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        if not self.is_hermitian:
            raise InputError("non-Hermitian Pauli has no real sign")
        return 1 if self.phase == 0 else -1

    def is_identity(self) -> bool:
        return not (self.x.any() or self.z.any())

    def same_letters(self, other: "PauliOp") -> bool:
        return np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z)

    def __eq__(self, other):
        if not isinstance(other, PauliOp):
            return NotImplemented
        return self.same_letters(other) and self.phase == other.phase

    def __hash__(self):
        return hash((self.x.tobytes(), self.z.tobytes(), self.phase))

    def __neg__(self):
        return PauliOp(self.x, self.z, self.phase + 2)

    def __mul__(self, other):
        if isinstance(other, PauliOp):
            return pauli_mul(self, other)
        return NotImplemented

    def with_phase(self, phase: int) -> "PauliOp":
        return PauliOp(self.x, self.z, phase)

    def __repr__(self):
        return f"PauliOp({_PHASE_TEXT[self.phase]} {self.letters()})"

    def to_text(self, lattice: Lattice) -> str:
        if lattice.n_sites != self.n:
            raise InputError("lattice size does not match Pauli length")
        parts = [_PHASE_TEXT[self.phase]]
        table = "IXZY"
        for i in self.support:
            s = lattice.site(int(i))
            parts.append(f"{table[int(self.x[i]) + 2 * int(self.z[i])]}({s.x},{s.y})")
        return " ".join(parts)

    @classmethod
    def from_text(cls, text: str, lattice: Lattice) -> "PauliOp":
        tokens = text.split()
        if not tokens:
            raise InputError("empty Pauli text")
        phase = 0
        if tokens[0] in _TEXT_PHASE:
            phase = _TEXT_PHASE[tokens.pop(0)]
        x = np.zeros(lattice.n_sites, bool)
        z = np.zeros(lattice.n_sites, bool)
        pat = re.compile(r"^([XYZ])\((-?\d+),(-?\d+)\)$")
        for tok in tokens:
            m = pat.match(tok)
            if not m:
                raise InputError(f"bad Pauli factor {tok!r}")
            i = lattice.index(lattice.check((int(m.group(2)), int(m.group(3)))))
            if x[i] or z[i]:
                raise InputError(f"site repeated in Pauli text: {tok!r}")
            x[i] = m.group(1) in "XY"
            z[i] = m.group(1) in "ZY"
        return cls(x, z, phase)


def _same_n(p: PauliOp, q: PauliOp):
    if p.n != q.n:
        raise InputError(f"Pauli length mismatch: {p.n} vs {q.n}")


def pauli_mul(p: PauliOp, q: PauliOp) -> PauliOp:
    _same_n(p, q)
    extra = int(letter_phase(p.x, p.z, q.x, q.z).sum())
    return PauliOp(p.x ^ q.x, p.z ^ q.z, p.phase + q.phase + extra)


def symplectic(p: PauliOp, q: PauliOp) -> int:
    """Symplectic form <p, q> in {0, 1}; 1 iff the operators anticommute."""
    _same_n(p, q)
    return int(np.count_nonzero((p.x & q.z) ^ (p.z & q.x)) & 1)


def commutes(p: PauliOp, q: PauliOp) -> bool:
    return symplectic(p, q) == 0


def restrict(p: PauliOp, region, keep_phase: bool = True) -> PauliOp:
    """Factor of `p` on `region`.

    The M factor carries the phase and the complement factor carries +1, so
    ``restrict(p, M) * restrict(p, M^c, keep_phase=False) == p``.
    """
    mask = region.mask() if isinstance(region, Region) else np.asarray(region, bool)
    if mask.size != p.n:
        raise InputError("region does not match Pauli length")
    return PauliOp(p.x & mask, p.z & mask, p.phase if keep_phase else 0)


@dataclass(frozen=True)
class Bipartition:
    """Split of the lattice into M and its complement."""

    m: Region

    @property
    def lattice(self) -> Lattice:
        return self.m.lattice

    @property
    def complement(self) -> Region:
        return self.m.complement()

    def split(self, p: PauliOp) -> tuple[PauliOp, PauliOp]:
        """(P_M, P_Mc) with the phase on the M factor."""
        mask = self.m.mask()
        return restrict(p, mask), restrict(p, ~mask, keep_phase=False)


def twist_product(p: PauliOp, q: PauliOp, cut: Bipartition) -> PauliOp:
    """P_Mc . Q . P_M for Pauli P (whose bipartite decomposition has one term)."""
    _same_n(p, q)
    p_m, p_mc = cut.split(p)
    return pauli_mul(pauli_mul(p_mc, q), p_m)


def twist_sign(p: PauliOp, q: PauliOp, cut: Bipartition) -> int:
    """+1/-1 with twist_product(p, q, cut) == sign * p * q."""
    mask = cut.m.mask()
    return -1 if symplectic(restrict(p, mask), restrict(q, mask)) else 1
