"""Dense complex linear algebra over labelled registers.

States are immutable values. Register order is big-endian: the first register
in a state's list is the most significant index of the flat amplitude array.

Three state representations share one set of operations:

* ``StateVector``       pure state, one amplitude per basis configuration
* ``DensityOperator``   dense mixed state
* ``FactoredDensity``   rho = sum_ij C_ij |v_i><v_j| with a few full-size
                        vectors; used where a dense matrix would not fit

Every ket-level operation (gates, controlled copies, environment isometries)
is written once as a function on a batch of ket tensors and lifted to each
representation by :func:`map_kets`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence, Union

import numpy as np

CONSTRUCT_TOL = 1e-10
EQUAL_TOL = 1e-12
# eigenvalue positivity is only checked up to this many basis states
PSD_CHECK_MAX_DIM = 256

OUTSIDE = "outside"


class RegisterError(ValueError):
    """Unknown, duplicated or mismatched register labels."""


class DimensionError(ValueError):
    """Operator or basis size does not match its target registers."""


@dataclass(frozen=True)
class Register:
    label: str
    dim: int = 2

    def __post_init__(self):
        if not isinstance(self.label, str) or not self.label:
            raise RegisterError("register label must be a non-empty string")
        if int(self.dim) != self.dim or self.dim < 2:
            raise DimensionError(f"register {self.label!r}: dimension must be an integer >= 2")


def qubit(label: str) -> Register:
    return Register(label, 2)


def _as_registers(registers) -> tuple[Register, ...]:
    regs = tuple(registers)
    labels = [r.label for r in regs]
    if len(set(labels)) != len(labels):
        dup = sorted({lb for lb in labels if labels.count(lb) > 1})
        raise RegisterError(f"duplicate register label(s): {', '.join(dup)}")
    return regs


def _dims(registers) -> tuple[int, ...]:
    return tuple(r.dim for r in registers)


def _size(registers) -> int:
    return int(np.prod(_dims(registers), dtype=np.int64)) if registers else 1


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# state types


@dataclass(frozen=True, eq=False)
class StateVector:
    registers: tuple[Register, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        regs = _as_registers(self.registers)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != _size(regs):
            raise DimensionError(
                f"{amps.size} amplitudes given for registers of total dimension {_size(regs)}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > CONSTRUCT_TOL:
            raise ValueError(f"state vector is not normalised (norm = {norm!r})")
        object.__setattr__(self, "registers", regs)
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def dims(self) -> tuple[int, ...]:
        return _dims(self.registers)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(r.label for r in self.registers)

    @property
    def decohered(self) -> frozenset:
        return frozenset()

    def density(self) -> "DensityOperator":
        a = self.amplitudes
        return DensityOperator(self.registers, np.outer(a, a.conj()))

    def __repr__(self):
        return f"StateVector({', '.join(self.labels)}; dim={self.amplitudes.size})"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    registers: tuple[Register, ...]
    matrix: np.ndarray
    # labels of registers that an environment has copied; undo is refused on these
    decohered: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        regs = _as_registers(self.registers)
        n = _size(regs)
        m = np.array(self.matrix, dtype=np.complex128)
        if m.shape != (n, n):
            raise DimensionError(f"density matrix shape {m.shape} does not match dimension {n}")
        herm = np.max(np.abs(m - m.conj().T)) if n else 0.0
        if herm > CONSTRUCT_TOL:
            raise ValueError(f"density matrix is not Hermitian (deviation {herm:.3g})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > CONSTRUCT_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        if n <= PSD_CHECK_MAX_DIM:
            low = np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min()
            if low < -CONSTRUCT_TOL:
                raise ValueError(f"density matrix has negative eigenvalue {low:.3g}")
        object.__setattr__(self, "registers", regs)
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "decohered", frozenset(self.decohered))

    @property
    def dims(self) -> tuple[int, ...]:
        return _dims(self.registers)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(r.label for r in self.registers)

    def density(self) -> "DensityOperator":
        return self

    def __repr__(self):
        return f"DensityOperator({', '.join(self.labels)}; dim={self.matrix.shape[0]})"


@dataclass(frozen=True, eq=False)
class FactoredDensity:
    """rho = sum_ij coeffs[i, j] |vectors[i]><vectors[j]|.

    Rank stays small when a pure state is dephased along a pointer basis that
    the state is already (block) diagonal in, which is the regime of the
    Heisenberg-cut sweep.
    """

    registers: tuple[Register, ...]
    vectors: np.ndarray
    coeffs: np.ndarray
    decohered: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        regs = _as_registers(self.registers)
        v = np.array(self.vectors, dtype=np.complex128)
        v = v.reshape(v.shape[0] if v.ndim > 1 else 1, -1)
        c = np.array(self.coeffs, dtype=np.complex128).reshape(v.shape[0], v.shape[0])
        if v.shape[1] != _size(regs):
            raise DimensionError("factor vectors do not match register dimension")
        herm = np.max(np.abs(c - c.conj().T))
        if herm > CONSTRUCT_TOL:
            raise ValueError("coefficient matrix is not Hermitian")
        tr = np.einsum("ij,ji->", c, v.conj() @ v.T).real
        if abs(tr - 1.0) > CONSTRUCT_TOL:
            raise ValueError(f"factored density trace is {tr!r}, expected 1")
        object.__setattr__(self, "registers", regs)
        object.__setattr__(self, "vectors", _frozen(v))
        object.__setattr__(self, "coeffs", _frozen(c))
        object.__setattr__(self, "decohered", frozenset(self.decohered))

    @classmethod
    def from_state(cls, state: StateVector) -> "FactoredDensity":
        return cls(state.registers, state.amplitudes[None, :], np.ones((1, 1)))

    @property
    def dims(self) -> tuple[int, ...]:
        return _dims(self.registers)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(r.label for r in self.registers)

    @property
    def rank(self) -> int:
        return self.vectors.shape[0]

    def density(self) -> DensityOperator:
        v = self.vectors
        return DensityOperator(self.registers, v.T @ self.coeffs @ v.conj(), self.decohered)

    def compressed(self, tol: float = 1e-13) -> "FactoredDensity":
        """Re-express on an orthonormal basis of span(vectors), dropping null directions."""
        v = self.vectors
        gram = v.conj() @ v.T  # gram[i, j] = <v_i|v_j>
        lam, w = np.linalg.eigh(gram)
        keep = lam > tol * max(lam.max(), 1.0)
        lam, w = lam[keep], w[:, keep]
        # v = s^T u with u orthonormal rows, s = sqrt(lam) w^dagger
        s = np.sqrt(lam)[:, None] * w.conj().T
        u = (w.T @ v) / np.sqrt(lam)[:, None]
        c = s @ self.coeffs @ s.conj().T
        c = 0.5 * (c + c.conj().T)
        return FactoredDensity(self.registers, u, c, self.decohered)

    def __repr__(self):
        return f"FactoredDensity({', '.join(self.labels)}; rank={self.rank})"


State = Union[StateVector, DensityOperator, FactoredDensity]


@dataclass(frozen=True, eq=False)
class Unitary:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("unitary must be a square matrix")
        dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if dev > CONSTRUCT_TOL:
            raise ValueError(f"matrix is not unitary (|U^dag U - I| = {dev:.3g})")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dagger(self) -> "Unitary":
        return Unitary(self.matrix.conj().T)


@dataclass(frozen=True, eq=False)
class Basis:
    """Orthonormal vectors (rows of ``vectors``) with one outcome label each.

    A partial basis covers a subspace only; Born readout then reports the
    remaining weight under the ``OUTSIDE`` label.
    """

    vectors: np.ndarray
    labels: tuple
    partial: bool = False

    def __post_init__(self):
        v = np.array(self.vectors, dtype=np.complex128)
        if v.ndim != 2:
            raise DimensionError("basis vectors must form a 2-d array (one row per vector)")
        labels = tuple(self.labels)
        if len(labels) != v.shape[0]:
            raise ValueError("one outcome label per basis vector required")
        if len(set(labels)) != len(labels):
            raise ValueError("basis outcome labels must be distinct")
        if OUTSIDE in labels:
            raise ValueError(f"{OUTSIDE!r} is reserved for the complement of a partial basis")
        dev = gram_deviation(v)
        if dev > CONSTRUCT_TOL:
            raise ValueError(f"basis is not orthonormal (Gram deviation {dev:.3g})")
        if not self.partial and v.shape[0] != v.shape[1]:
            raise DimensionError(
                f"{v.shape[0]} vectors cannot span a {v.shape[1]}-dimensional space; "
                "mark the basis partial"
            )
        object.__setattr__(self, "vectors", _frozen(v))
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    def completed(self) -> tuple[np.ndarray, tuple]:
        """Full orthonormal frame: own vectors first, complement labelled OUTSIDE."""
        if not self.partial or self.size == self.dim:
            return self.vectors, self.labels
        proj = np.eye(self.dim) - self.vectors.T @ self.vectors.conj()
        u, s, _ = np.linalg.svd(proj)
        extra = u[:, : self.dim - self.size].T
        return np.vstack([self.vectors, extra]), self.labels + (OUTSIDE,) * (self.dim - self.size)

    def vector(self, label) -> np.ndarray:
        return self.vectors[self.labels.index(label)]


def gram_deviation(vectors) -> float:
    v = np.asarray(vectors, dtype=np.complex128)
    return float(np.max(np.abs(v.conj() @ v.T - np.eye(v.shape[0]))))


def computational_basis(dim: int = 2, labels: Sequence | None = None) -> Basis:
    return Basis(np.eye(dim), tuple(range(dim)) if labels is None else tuple(labels))


# ---------------------------------------------------------------------------
# construction helpers


def ket(registers: Sequence[Register], amplitudes) -> StateVector:
    """State from (possibly unnormalised) amplitudes; normalises them."""
    a = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    n = np.linalg.norm(a)
    if n == 0:
        raise ValueError("zero vector is not a state")
    return StateVector(tuple(registers), a / n)


def basis_state(registers: Sequence[Register], indices: Sequence[int]) -> StateVector:
    regs = tuple(registers)
    a = np.zeros(_size(regs), dtype=np.complex128)
    a[np.ravel_multi_index(tuple(indices), _dims(regs))] = 1.0
    return StateVector(regs, a)


def maximally_mixed(registers: Sequence[Register]) -> DensityOperator:
    n = _size(tuple(registers))
    return DensityOperator(tuple(registers), np.eye(n) / n)


# ---------------------------------------------------------------------------
# register bookkeeping


def _label_of(r) -> str:
    return r.label if isinstance(r, Register) else r


def target_axes(state: State, targets) -> list[int]:
    if isinstance(targets, (str, Register)):
        targets = [targets]
    labels = list(state.labels)
    axes = []
    for t in targets:
        lb = _label_of(t)
        if lb not in labels:
            raise RegisterError(f"unknown register {lb!r}")
        if isinstance(t, Register) and t.dim != state.registers[labels.index(lb)].dim:
            raise DimensionError(f"register {lb!r} has a different dimension in this state")
        axes.append(labels.index(lb))
    if len(set(axes)) != len(axes):
        raise RegisterError("target registers repeated")
    return axes


def registers_of(state: State, targets) -> tuple[Register, ...]:
    return tuple(state.registers[a] for a in target_axes(state, targets))


# ---------------------------------------------------------------------------
# lifting ket maps


KetMap = Callable[[np.ndarray], np.ndarray]


def map_kets(state: State, fn: KetMap, new_registers=None, decohered=None) -> State:
    """Apply the linear ket map ``fn`` as rho -> L rho L^dagger.

    ``fn`` receives an array of shape ``(batch, *dims)`` and returns
    ``(batch, *new_dims)``.  It must be linear in each ket.
    """
    regs = tuple(state.registers) if new_registers is None else tuple(new_registers)
    dims_in, dims_out = state.dims, _dims(regs)
    n_out = _size(regs)
    dec = state.decohered if decohered is None else frozenset(decohered)

    def run(batch):
        b = batch.shape[0]
        return fn(batch.reshape((b,) + dims_in)).reshape(b, n_out)

    if isinstance(state, StateVector):
        out = run(state.amplitudes[None, :])[0]
        return StateVector(regs, out)
    if isinstance(state, FactoredDensity):
        out = run(np.asarray(state.vectors))
        return FactoredDensity(regs, out, state.coeffs, dec)
    rho = state.matrix
    # columns of rho are kets: (L rho)^T
    l_rho = run(rho.T.copy()).T
    # columns of (L rho)^dagger are conj rows of L rho
    out = run(l_rho.conj()).T
    return DensityOperator(regs, 0.5 * (out + out.conj().T), dec)


def _apply_matrix_tensor(t: np.ndarray, m: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract ``m`` into ``axes`` of a batched ket tensor (axis 0 is the batch)."""
    axes = [a + 1 for a in axes]
    k = len(axes)
    moved = np.moveaxis(t, axes, range(1, k + 1))
    shape = moved.shape
    d = int(np.prod(shape[1 : k + 1]))
    flat = moved.reshape(shape[0], d, -1)
    out = np.einsum("ij,bjr->bir", m, flat, optimize=True).reshape(shape)
    return np.moveaxis(out, range(1, k + 1), axes)


def apply_matrix(state: State, matrix, targets) -> State:
    """Apply a square matrix on ``targets`` without a unitarity check (internal use)."""
    axes = target_axes(state, targets)
    m = np.asarray(matrix, dtype=np.complex128)
    d = int(np.prod([state.dims[a] for a in axes]))
    if m.shape != (d, d):
        raise DimensionError(f"operator of shape {m.shape} does not act on dimension {d}")
    return map_kets(state, lambda t: _apply_matrix_tensor(t, m, axes))


def apply_unitary(state: State, u, targets) -> State:
    """Apply ``u`` to ``targets``, identity elsewhere."""
    if not isinstance(u, Unitary):
        u = Unitary(u)
    return apply_matrix(state, u.matrix, targets)


# ---------------------------------------------------------------------------
# composition and reduction


def as_factored(state: State) -> FactoredDensity:
    if isinstance(state, FactoredDensity):
        return state
    if isinstance(state, StateVector):
        return FactoredDensity.from_state(state)
    lam, w = np.linalg.eigh(state.matrix)
    keep = lam > 1e-14
    return FactoredDensity(state.registers, w[:, keep].T, np.diag(lam[keep]), state.decohered)


def tensor(a: State, b: State) -> State:
    """Kronecker composition; pure with pure stays pure, anything factored stays factored."""
    regs = _as_registers(a.registers + b.registers)
    dec = a.decohered | b.decohered
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(regs, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, FactoredDensity) or isinstance(b, FactoredDensity):
        fa, fb = as_factored(a), as_factored(b)
        v = np.einsum("in,jm->ijnm", fa.vectors, fb.vectors).reshape(fa.rank * fb.rank, -1)
        return FactoredDensity(regs, v, np.kron(fa.coeffs, fb.coeffs), dec)
    return DensityOperator(regs, np.kron(a.density().matrix, b.density().matrix), dec)


def reorder(state: State, order) -> State:
    """Permute registers into ``order`` (labels or registers)."""
    axes = target_axes(state, order)
    if len(axes) != len(state.registers):
        raise RegisterError("reorder needs every register exactly once")
    regs = tuple(state.registers[a] for a in axes)
    return map_kets(state, lambda t: np.transpose(t, [0] + [a + 1 for a in axes]), regs)


def partial_trace(state: State, keep) -> DensityOperator:
    """Reduced state on ``keep``; kept registers retain their order in ``state``."""
    axes = sorted(target_axes(state, keep))
    if not axes:
        raise RegisterError("partial trace must keep at least one register")
    rest = [a for a in range(len(state.registers)) if a not in axes]
    regs = tuple(state.registers[a] for a in axes)
    dk = _size(regs)
    kept_labels = {r.label for r in regs}
    dec = frozenset(state.decohered) & kept_labels

    if isinstance(state, (StateVector, FactoredDensity)):
        vecs = state.amplitudes[None, :] if isinstance(state, StateVector) else state.vectors
        c = np.ones((1, 1)) if isinstance(state, StateVector) else state.coeffs
        t = vecs.reshape((vecs.shape[0],) + state.dims)
        t = np.transpose(t, [0] + [a + 1 for a in axes] + [a + 1 for a in rest])
        t = t.reshape(vecs.shape[0], dk, -1)
        rho = np.einsum("ij,iar,jbr->ab", c, t, t.conj(), optimize=True)
    else:
        n = len(state.registers)
        t = state.matrix.reshape(state.dims + state.dims)
        perm = axes + rest + [n + a for a in axes] + [n + a for a in rest]
        dr = state.matrix.shape[0] // dk
        t = np.transpose(t, perm).reshape(dk, dr, dk, dr)
        rho = np.einsum("ajbj->ab", t)
    return DensityOperator(regs, 0.5 * (rho + rho.conj().T), dec)


# ---------------------------------------------------------------------------
# Born rule


def project(state: State, projector, targets, floor: float = 1e-14) -> tuple[float, State | None]:
    """Projective (Lueders) update: probability and normalised post-state.

    Returns ``(p, None)`` when the projector has weight below ``floor``.
    """
    axes = target_axes(state, targets)
    m = np.asarray(projector, dtype=np.complex128)
    dims = state.dims
    d = int(np.prod([dims[a] for a in axes]))
    if m.shape != (d, d):
        raise DimensionError(f"projector of shape {m.shape} does not act on dimension {d}")

    def run(batch):
        b = batch.shape[0]
        return _apply_matrix_tensor(batch.reshape((b,) + dims), m, axes).reshape(b, -1)

    if isinstance(state, StateVector):
        out = run(state.amplitudes[None, :])[0]
        p = float(np.vdot(out, out).real)
        return (p, StateVector(state.registers, out / math.sqrt(p))) if p > floor else (0.0, None)
    if isinstance(state, FactoredDensity):
        v = run(np.asarray(state.vectors))
        p = float(np.einsum("ij,in,jn->", state.coeffs, v, v.conj()).real)
        if p <= floor:
            return 0.0, None
        return p, FactoredDensity(state.registers, v, state.coeffs / p, state.decohered)
    rho = state.matrix
    half = run(rho.T.copy()).T
    out = run(half.conj()).T
    p = float(np.trace(out).real)
    if p <= floor:
        return 0.0, None
    out = 0.5 * (out + out.conj().T) / p
    return p, DensityOperator(state.registers, out, state.decohered)


def diagonal(state: State) -> np.ndarray:
    """Probabilities of the computational basis configurations."""
    if isinstance(state, StateVector):
        return np.abs(state.amplitudes) ** 2
    if isinstance(state, FactoredDensity):
        v = state.vectors
        return np.einsum("ij,in,jn->n", state.coeffs, v, v.conj(), optimize=True).real
    return np.diag(state.matrix).real.copy()


MeasurementSpec = tuple  # (Basis, targets)


def joint_probabilities(state: State, measurements: Sequence[MeasurementSpec]) -> dict[tuple, float]:
    """Joint Born distribution of commuting measurements on disjoint register groups.

    Each entry of ``measurements`` is ``(basis, targets)``.  Keys of the result
    are tuples of outcome labels, one per measurement; the complement of a
    partial basis is reported as ``OUTSIDE``.
    """
    groups = []
    used: list[int] = []
    rotated = state
    for basis, targets in measurements:
        axes = target_axes(state, targets)
        if set(axes) & set(used):
            raise RegisterError("measurements must act on disjoint registers")
        used += axes
        d = int(np.prod([state.dims[a] for a in axes]))
        if basis.dim != d:
            raise DimensionError(f"basis of dimension {basis.dim} measured on registers of dimension {d}")
        frame, labels = basis.completed()
        rotated = apply_matrix(rotated, frame.conj(), targets)
        groups.append((axes, d, labels))

    p = np.clip(diagonal(rotated), 0.0, None).reshape(state.dims)
    order = [a for axes, _, _ in groups for a in axes]
    rest = tuple(a for a in range(len(state.dims)) if a not in order)
    if rest:
        p = p.sum(axis=rest)
    # remaining axes are in ascending order; bring them into group order
    remaining = sorted(order)
    p = np.transpose(p, [remaining.index(a) for a in order])
    p = p.reshape([d for _, d, _ in groups])

    out: dict[tuple, float] = {}
    for idx in np.ndindex(p.shape):
        key = tuple(groups[g][2][i] for g, i in enumerate(idx))
        out[key] = out.get(key, 0.0) + float(p[idx])
    return out


def born_probabilities(state: State, basis: Basis, targets) -> dict[Hashable, float]:
    """Outcome distribution of measuring ``targets`` in ``basis``."""
    joint = joint_probabilities(state, [(basis, targets)])
    return {k[0]: v for k, v in joint.items()}


def fidelity(a: State, b: State) -> float:
    """Squared-overlap fidelity; 1 iff equal up to global phase."""
    if set(a.labels) != set(b.labels):
        raise RegisterError(f"register mismatch: {a.labels} vs {b.labels}")
    if a.labels != b.labels:
        b = reorder(b, a.labels)
    if a.dims != b.dims:
        raise RegisterError("register dimensions differ")
    if isinstance(a, FactoredDensity):
        a = a.density()
    if isinstance(b, FactoredDensity):
        b = b.density()
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        f = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    elif isinstance(a, StateVector) or isinstance(b, StateVector):
        psi, rho = (a, b) if isinstance(a, StateVector) else (b, a)
        f = np.vdot(psi.amplitudes, rho.matrix @ psi.amplitudes).real
    else:
        sa = _psd_sqrt(a.matrix)
        inner = _psd_sqrt(sa @ b.matrix @ sa)
        f = np.trace(inner).real ** 2
    return float(min(1.0, max(0.0, f)))


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    lam, w = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (w * np.sqrt(np.clip(lam, 0.0, None))) @ w.conj().T


def von_neumann_entropy(rho: DensityOperator, base: float = 2.0) -> float:
    lam = np.linalg.eigvalsh(rho.matrix)
    lam = lam[lam > 1e-15]
    return float(-(lam * np.log(lam)).sum() / math.log(base))


# ---------------------------------------------------------------------------
# debug serialisation


def to_json(state: State) -> str:
    regs = [[r.label, r.dim] for r in state.registers]
    if isinstance(state, StateVector):
        body = {"amplitudes": [[float(z.real), float(z.imag)] for z in state.amplitudes]}
    else:
        m = state.density().matrix
        body = {"matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m]}
    return json.dumps({"registers": regs, **body})


def from_json(text: str) -> State:
    doc = json.loads(text)
    regs = tuple(Register(lb, d) for lb, d in doc["registers"])
    if "amplitudes" in doc:
        return StateVector(regs, [complex(re, im) for re, im in doc["amplitudes"]])
    m = np.array([[complex(re, im) for re, im in row] for row in doc["matrix"]])
    return DensityOperator(regs, m)
