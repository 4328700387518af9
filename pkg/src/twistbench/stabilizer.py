"""Stabilizer tableaux, local Clifford circuits and Pauli-noise ensembles.

The tableau follows the Aaronson-Gottesman layout: rows ``0..n-1`` are
destabilizers, rows ``n..2n-1`` stabilizers, each row a letter string in
(x, z) form plus a sign bit.  Expectation values of Pauli operators are
computed in batches with matrix products instead of row-by-row rowsum calls.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from . import gf2
from .errors import CircuitParseError, InputError, LocalityError
from .lattice import Lattice, Site, distance
from .pauli import PauliOp

ONE_QUBIT = ("H", "S", "X", "Y", "Z")
TWO_QUBIT = ("CNOT", "CZ")
GATES = ONE_QUBIT + TWO_QUBIT

# shots are generated and reduced in fixed-size blocks so results do not
# depend on how many workers process them
BLOCK = 1024


class Gate(NamedTuple):
    name: str
    sites: tuple

    def __str__(self):
        return self.name + " " + " ".join(f"({s[0]},{s[1]})" for s in self.sites)


@dataclass(frozen=True)
class Circuit:
    layers: tuple = ()
    locality_radius: int = 1

    def __post_init__(self):
        layers = tuple(
            tuple(Gate(g[0].upper(), tuple(Site(*s) for s in g[1])) for g in layer)
            for layer in self.layers
        )
        object.__setattr__(self, "layers", layers)
        if self.locality_radius < 1:
            raise InputError("locality_radius must be positive")

    @property
    def depth(self) -> int:
        return len(self.layers)

    def validate(self, lattice: Lattice) -> None:
        for k, layer in enumerate(self.layers):
            used: set = set()
            for gate in layer:
                if gate.name not in GATES:
                    raise InputError(f"layer {k}: unknown gate {gate.name!r}")
                arity = 1 if gate.name in ONE_QUBIT else 2
                if len(gate.sites) != arity:
                    raise InputError(f"layer {k}: {gate.name} takes {arity} site(s)")
                for s in gate.sites:
                    lattice.check(s)
                if arity == 2:
                    if gate.sites[0] == gate.sites[1]:
                        raise InputError(f"layer {k}: {gate} acts twice on one site")
                    d = distance(lattice, *gate.sites)
                    if d > self.locality_radius:
                        raise LocalityError(
                            f"layer {k}: {gate} spans distance {d} > "
                            f"locality radius {self.locality_radius}",
                            gate=gate,
                            distance=d,
                        )
                overlap = used.intersection(gate.sites)
                if overlap:
                    raise InputError(
                        f"layer {k}: {gate} overlaps another gate on {sorted(overlap)}"
                    )
                used.update(gate.sites)

    def to_text(self) -> str:
        return "\n".join("; ".join(str(g) for g in layer) for layer in self.layers) + "\n"

    @classmethod
    def parse(cls, text: str, locality_radius: int = 1) -> "Circuit":
        """One layer per line, gates separated by ';', e.g. ``H (0,0); CZ (1,0) (1,1)``."""
        site_pat = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")
        layers = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            layer = []
            for chunk in line.split(";"):
                chunk = chunk.strip()
                if not chunk:
                    continue
                m = re.match(r"^([A-Za-z]+)\s*(.*)$", chunk)
                if not m:
                    raise CircuitParseError(f"cannot parse gate {chunk!r}", lineno)
                name = m.group(1).upper()
                if name not in GATES:
                    raise CircuitParseError(f"unknown gate {name!r}", lineno)
                rest = m.group(2)
                sites = [(int(a), int(b)) for a, b in site_pat.findall(rest)]
                if site_pat.sub("", rest).strip():
                    raise CircuitParseError(f"trailing junk in {chunk!r}", lineno)
                arity = 1 if name in ONE_QUBIT else 2
                if len(sites) != arity:
                    raise CircuitParseError(
                        f"{name} needs {arity} site(s), got {len(sites)}", lineno
                    )
                layer.append(Gate(name, tuple(sites)))
            layers.append(tuple(layer))
        return cls(tuple(layers), locality_radius)


def random_local_circuit(lattice: Lattice, depth: int, rng: np.random.Generator) -> Circuit:
    """Brickwork of nearest-neighbour CNOT/CZ gates interleaved with H/S.

    Each layer picks one of the four brick orientations; every brick gets a
    two-qubit gate with probability 1/2, otherwise its sites receive random
    single-qubit gates.
    """
    layers = []
    for _ in range(depth):
        horizontal = bool(rng.integers(2))
        offset = int(rng.integers(2))
        layer = []
        paired = set()
        for y in range(lattice.height):
            for x in range(lattice.width):
                a = (x, y)
                coord = x if horizontal else y
                if (coord - offset) % 2:
                    continue
                b = lattice.wrap(x + 1, y) if horizontal else lattice.wrap(x, y + 1)
                if b is None or b == a or b in paired or a in paired:
                    continue
                paired.update((a, tuple(b)))
                if rng.random() < 0.5:
                    name = TWO_QUBIT[int(rng.integers(2))]
                    pair = (a, tuple(b)) if rng.random() < 0.5 else (tuple(b), a)
                    layer.append(Gate(name, pair))
                else:
                    for s in (a, tuple(b)):
                        g = ("H", "S", None)[int(rng.integers(3))]
                        if g:
                            layer.append(Gate(g, (s,)))
        for s in lattice.sites():
            if tuple(s) not in paired and rng.random() < 0.5:
                layer.append(Gate(("H", "S")[int(rng.integers(2))], (tuple(s),)))
        layers.append(tuple(layer))
    return Circuit(tuple(layers))


def _pauli_matrix(paulis: Sequence[PauliOp]):
    if not paulis:
        return np.zeros((0, 0), bool), np.zeros((0, 0), bool), np.zeros(0, np.int64)
    px = np.array([p.x for p in paulis], dtype=bool)
    pz = np.array([p.z for p in paulis], dtype=bool)
    ph = np.array([p.phase for p in paulis], dtype=np.int64)
    return px, pz, ph


class StabilizerState:
    """Mutable stabilizer tableau on n qubits."""

    def __init__(self, x, z, r):
        self.x = np.array(x, dtype=bool)
        self.z = np.array(z, dtype=bool)
        self.r = np.array(r, dtype=bool)
        self.n = self.x.shape[1]
        if self.x.shape != (2 * self.n, self.n) or self.z.shape != self.x.shape:
            raise InputError("tableau must have shape (2n, n)")

    @classmethod
    def zero(cls, n: int) -> "StabilizerState":
        if n < 1:
            raise InputError("need at least one qubit")
        eye = np.eye(n, dtype=bool)
        zero = np.zeros((n, n), dtype=bool)
        return cls(np.vstack([eye, zero]), np.vstack([zero, eye]), np.zeros(2 * n, bool))

    @classmethod
    def from_stabilizers(cls, stabilizers: Sequence[PauliOp]) -> "StabilizerState":
        """Tableau for the state fixed by n independent commuting Hermitian Paulis."""
        n = stabilizers[0].n
        if len(stabilizers) != n:
            raise InputError(f"need exactly {n} stabilizers, got {len(stabilizers)}")
        sx, sz, ph = _pauli_matrix(stabilizers)
        if np.any(ph % 2):
            raise InputError("stabilizers must be Hermitian")
        s = np.hstack([sx, sz])
        gram = gf2.matmul(s, np.hstack([sz, sx]).T)
        if gram.any():
            raise InputError("stabilizers do not commute")
        t = np.hstack([sz, sx])
        try:
            d = gf2.right_inverse(t).T
        except ValueError:
            raise InputError("stabilizers are not independent") from None
        m = gf2.matmul(d, np.hstack([d[:, n:], d[:, :n]]).T)
        low = np.tril(m, -1)
        d = d ^ gf2.matmul(low, s)
        x = np.vstack([d[:, :n], sx])
        z = np.vstack([d[:, n:], sz])
        r = np.concatenate([np.zeros(n, bool), ph == 2])
        return cls(x, z, r)

    def copy(self) -> "StabilizerState":
        return StabilizerState(self.x.copy(), self.z.copy(), self.r.copy())

    # -- gates -------------------------------------------------------------
    def h(self, a: int):
        self.r ^= self.x[:, a] & self.z[:, a]
        self.x[:, a], self.z[:, a] = self.z[:, a].copy(), self.x[:, a].copy()

    def s(self, a: int):
        self.r ^= self.x[:, a] & self.z[:, a]
        self.z[:, a] ^= self.x[:, a]

    def cnot(self, a: int, b: int):
        self.r ^= self.x[:, a] & self.z[:, b] & ~(self.x[:, b] ^ self.z[:, a])
        self.x[:, b] ^= self.x[:, a]
        self.z[:, a] ^= self.z[:, b]

    def cz(self, a: int, b: int):
        self.h(b)
        self.cnot(a, b)
        self.h(b)

    def pauli_x(self, a: int):
        self.r ^= self.z[:, a]

    def pauli_y(self, a: int):
        self.r ^= self.x[:, a] ^ self.z[:, a]

    def pauli_z(self, a: int):
        self.r ^= self.x[:, a]

    def apply_gate(self, name: str, qubits: Sequence[int]):
        fn = {
            "H": self.h, "S": self.s, "X": self.pauli_x, "Y": self.pauli_y,
            "Z": self.pauli_z, "CNOT": self.cnot, "CZ": self.cz,
        }[name]
        fn(*qubits)

    def apply_pauli(self, p: PauliOp):
        """Conjugate by a Pauli: flips the sign of every anticommuting row."""
        self.apply_error(p.x, p.z)

    def apply_error(self, ex, ez):
        flips = gf2.matmul(self.x, np.asarray(ez, bool)[:, None]) ^ gf2.matmul(
            self.z, np.asarray(ex, bool)[:, None]
        )
        self.r ^= flips[:, 0]

    # -- views -------------------------------------------------------------
    def _row(self, i: int) -> PauliOp:
        return PauliOp(self.x[i], self.z[i], 2 if self.r[i] else 0)

    def stabilizers(self) -> list[PauliOp]:
        return [self._row(i) for i in range(self.n, 2 * self.n)]

    def destabilizers(self) -> list[PauliOp]:
        return [self._row(i) for i in range(self.n)]

    def check_invariants(self) -> None:
        """Raise AssertionError unless the rows form a symplectic basis."""
        n = self.n
        rows = np.hstack([self.x, self.z])
        gram = gf2.matmul(rows, np.hstack([self.z, self.x]).T)
        expected = np.zeros((2 * n, 2 * n), bool)
        expected[:n, n:] = np.eye(n, dtype=bool)
        expected[n:, :n] = np.eye(n, dtype=bool)
        assert np.array_equal(gram, expected), "tableau rows lost the symplectic pattern"

    # -- expectations ------------------------------------------------------
    def expectations(self, paulis: Sequence[PauliOp]) -> np.ndarray:
        """Exact <P> in {-1, 0, +1} for each Hermitian Pauli in `paulis`."""
        if len(paulis) == 0:
            return np.zeros(0, dtype=np.int8)
        px, pz, ph = _pauli_matrix(paulis)
        if px.shape[1] != self.n:
            raise InputError(f"Pauli length {px.shape[1]} != {self.n} qubits")
        if np.any(ph % 2):
            raise InputError("expectation needs Hermitian Paulis (phase +1 or -1)")
        n = self.n
        sx, sz, sr = self.x[n:], self.z[n:], self.r[n:]
        dx, dz = self.x[:n], self.z[:n]
        anti = gf2.matmul(px, sz.T) ^ gf2.matmul(pz, sx.T)
        c = gf2.matmul(px, dz.T) ^ gf2.matmul(pz, dx.T)
        cf = c.astype(np.float64)
        xt = gf2.matmul(c, sx)
        zt = gf2.matmul(c, sz)
        ok = ~anti.any(axis=1)
        if not (np.array_equal(xt[ok], px[ok]) and np.array_equal(zt[ok], pz[ok])):
            raise AssertionError("Pauli commutes with the stabilizers but is not generated by them")
        ycount = np.count_nonzero(sx & sz, axis=1).astype(np.float64)
        k = np.triu(sz.astype(np.float64) @ sx.astype(np.float64).T, 1)
        quad = np.rint(((cf @ k) * cf).sum(axis=1)).astype(np.int64)
        e = (
            2 * np.rint(cf @ sr.astype(np.float64)).astype(np.int64)
            + np.rint(cf @ ycount).astype(np.int64)
            + 2 * quad
            - np.count_nonzero(xt & zt, axis=1)
        )
        rel = (ph - e) % 4
        out = np.where(rel == 0, 1, -1).astype(np.int8)
        out[~ok] = 0
        return out

    def expectation(self, p: PauliOp) -> int:
        return int(self.expectations([p])[0])


def init_zero(n: int) -> StabilizerState:
    return StabilizerState.zero(n)


def expectation(state: StabilizerState, p: PauliOp) -> int:
    return state.expectation(p)


def apply_circuit(
    state: StabilizerState, circuit: Circuit, lattice: Lattice, check: bool = False
) -> tuple[StabilizerState, int]:
    """Return (new state, depth).  `check` re-verifies the tableau after every layer."""
    if lattice.n_sites != state.n:
        raise InputError("lattice size does not match qubit count")
    circuit.validate(lattice)
    out = state.copy()
    for layer in circuit.layers:
        for gate in layer:
            out.apply_gate(gate.name, [lattice.index(s) for s in gate.sites])
        if check:
            out.check_invariants()
    return out, circuit.depth


@dataclass(frozen=True)
class NoiseModel:
    px: float = 0.0
    py: float = 0.0
    pz: float = 0.0

    def __post_init__(self):
        for name in ("px", "py", "pz"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InputError(f"{name} must lie in [0, 1], got {v}")
        if self.px + self.py + self.pz > 1.0 + 1e-12:
            raise InputError("px + py + pz must not exceed 1")

    @property
    def total(self) -> float:
        return self.px + self.py + self.pz

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        u = rng.random(n)
        is_x = u < self.px
        is_y = (u >= self.px) & (u < self.px + self.py)
        is_z = (u >= self.px + self.py) & (u < self.total)
        return is_x | is_y, is_z | is_y


@dataclass(frozen=True, eq=False)
class TrajectoryEnsemble:
    """Mixture of Pauli-error trajectories around a base stabilizer state."""

    base: StabilizerState
    noise: NoiseModel
    shots: int
    seed: int = 0
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        if self.shots < 1:
            raise InputError("shots must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a non-negative 64-bit integer")

    def shot_errors(self, shot: int) -> tuple[np.ndarray, np.ndarray]:
        if not 0 <= shot < self.shots:
            raise InputError(f"shot {shot} out of range [0, {self.shots})")
        rng = np.random.default_rng([self.seed, shot])
        return self.noise.sample(self.base.n, rng)

    def _block(self, start: int) -> tuple[np.ndarray, np.ndarray]:
        stop = min(start + BLOCK, self.shots)
        ex = np.empty((stop - start, self.base.n), bool)
        ez = np.empty_like(ex)
        for k, shot in enumerate(range(start, stop)):
            ex[k], ez[k] = self.shot_errors(shot)
        return ex, ez

    @cached_property
    def errors(self) -> tuple[np.ndarray, np.ndarray]:
        """(shots, n) X- and Z-component bit matrices of every trajectory."""
        starts = list(range(0, self.shots, BLOCK))
        if self.workers > 1 and len(starts) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                blocks = list(pool.map(self._block, starts))
        else:
            blocks = [self._block(s) for s in starts]
        return np.vstack([b[0] for b in blocks]), np.vstack([b[1] for b in blocks])

    def values(self, paulis: Sequence[PauliOp]) -> np.ndarray:
        """(shots, len(paulis)) int8 matrix of per-trajectory expectations.

        A Pauli error E maps <P> to +-<P> depending on whether E and P
        anticommute, so each trajectory only needs the base expectation and a
        sign.
        """
        base = self.base.expectations(paulis).astype(np.int8)
        if self.noise.total == 0:
            return np.broadcast_to(base, (self.shots, base.size)).copy()
        px, pz, _ = _pauli_matrix(paulis)
        ex, ez = self.errors
        flips = gf2.matmul(ex, pz.T) ^ gf2.matmul(ez, px.T)
        return np.where(flips, -base, base).astype(np.int8)


def mean_stderr(samples) -> tuple[float, float]:
    """Mean and standard error of integer samples, reduced exactly."""
    v = np.asarray(samples, dtype=np.int64)
    n = v.size
    s1 = int(v.sum())
    s2 = int((v * v).sum())
    mean = s1 / n
    if n < 2:
        return mean, 0.0
    var = (s2 - s1 * s1 / n) / (n - 1)
    return mean, float(np.sqrt(max(var, 0.0) / n))


def sample_trajectory(ensemble: TrajectoryEnsemble, shot: int) -> StabilizerState:
    ex, ez = ensemble.shot_errors(shot)
    state = ensemble.base.copy()
    state.apply_error(ex, ez)
    return state


def ensemble_expectation(ensemble: TrajectoryEnsemble, p: PauliOp) -> tuple[float, float]:
    if not p.is_hermitian:
        raise InputError("ensemble expectation needs a Hermitian Pauli")
    return mean_stderr(ensemble.values([p])[:, 0])
