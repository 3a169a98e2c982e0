"""Measurement theory: pre-measurement, decoherence, readout, undo.

A pre-measurement is the copy-in-basis unitary

    sum_i a_i |b_i>|0>...|0>  ->  sum_i a_i |b_i>|i>...|i>

on a system and its ancillas (device, friend). Decoherence copies a pointer
value into a fresh environment register and discards that register. A full
measurement is the two in sequence followed by Born readout of the pointer.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .qcore import (
    OUTSIDE,
    Basis,
    DensityOperator,
    DimensionError,
    FactoredDensity,
    Register,
    RegisterError,
    State,
    StateVector,
    _apply_matrix_tensor,
    as_factored,
    diagonal,
    map_kets,
    partial_trace,
    registers_of,
    target_axes,
)

DEFAULT_SEED = 42
ANCILLA_TOL = 1e-10
# above this many basis states, decoherence output stays in factored form
DENSE_MAX_DIM = 4096


class FriendPolicy(enum.Enum):
    PREMEASURE = "premeasure"
    FULL = "full"


class IrreversibleError(RuntimeError):
    """Undo requested after an environment recorded the pointer."""


class AncillaError(ValueError):
    """An ancilla was not in its initial state when a copy was attempted."""


@dataclass(frozen=True)
class PremeasurementRecord:
    system: tuple[Register, ...]
    basis: Basis
    ancillas: tuple[Register, ...]
    inverse_available: bool = True

    @property
    def labels(self) -> frozenset:
        return frozenset(r.label for r in self.system + self.ancillas)

    def available_on(self, state: State) -> bool:
        return self.inverse_available and not (self.labels & state.decohered)


@dataclass(frozen=True)
class MeasurementOutcome:
    label: Hashable
    probability: float
    post_state: object  # DensityOperator, or FactoredDensity for large states


def _group(targets) -> list:
    if isinstance(targets, (str, Register)):
        return [targets]
    return list(targets)


# ---------------------------------------------------------------------------
# the copy unitary


def _rolled_index(k: int, a: int, shift: int) -> np.ndarray:
    """Flat source index that rolls each of ``a`` base-``k`` digits by ``shift``."""
    j = np.arange(k**a)
    src = np.zeros_like(j)
    rem, mult = j.copy(), 1
    for _ in range(a):
        src += ((rem % k - shift) % k) * mult
        rem //= k
        mult *= k
    return src


def _shift_ancillas(t, sys_axes, anc_axes, sign):
    """Roll every ancilla by +-i where i is the combined system index."""
    b = t.shape[0]
    k, a = len(sys_axes), len(anc_axes)
    if not a:
        return t
    src = [x + 1 for x in sys_axes + anc_axes]
    moved = np.moveaxis(t, src, range(1, k + a + 1))
    shape = moved.shape
    d = int(np.prod(shape[1 : k + 1]))
    kd = shape[k + 1]
    m = moved.reshape(b, d, kd**a, -1)
    out = np.empty_like(m)
    for i in range(d):
        out[:, i] = m[:, i][:, _rolled_index(kd, a, sign * i)]
    return np.moveaxis(out.reshape(shape), range(1, k + a + 1), src)


def copy_unitary(state: State, system, basis: Basis, ancillas, inverse: bool = False) -> State:
    """Apply sum_i |b_i><b_i| (x) X^(+-i) on every ancilla."""
    sys_axes = target_axes(state, _group(system))
    anc_axes = target_axes(state, _group(ancillas))
    if set(sys_axes) & set(anc_axes):
        raise RegisterError("system and ancilla registers overlap")
    d = int(np.prod([state.dims[x] for x in sys_axes]))
    if basis.partial or basis.dim != d:
        raise DimensionError(f"copy basis must span the system (dimension {d})")
    for x in anc_axes:
        if state.dims[x] != basis.size:
            raise DimensionError(
                f"ancilla {state.labels[x]!r} has dimension {state.dims[x]}, basis has {basis.size} vectors"
            )
    to_basis = basis.vectors.conj()
    from_basis = basis.vectors.T
    sign = -1 if inverse else 1

    def fn(t):
        t = _apply_matrix_tensor(t, to_basis, sys_axes)
        t = _shift_ancillas(t, sys_axes, anc_axes, sign)
        return _apply_matrix_tensor(t, from_basis, sys_axes)

    return map_kets(state, fn)


def _initial_weight(state: State, axes: Sequence[int]) -> float:
    p = diagonal(state).reshape(state.dims)
    idx = tuple(0 if a in axes else slice(None) for a in range(len(state.dims)))
    return float(p[idx].sum())


def premeasure(state: State, system, basis: Basis, ancillas):
    """Correlate ``ancillas`` with ``system`` in ``basis``; returns (state, record)."""
    anc_axes = target_axes(state, _group(ancillas))
    w = _initial_weight(state, anc_axes)
    if w < 1.0 - ANCILLA_TOL:
        raise AncillaError(f"ancillas not in their initial state (overlap {w:.12g})")
    out = copy_unitary(state, system, basis, ancillas)
    record = PremeasurementRecord(
        registers_of(state, _group(system)), basis, registers_of(state, _group(ancillas))
    )
    return out, record


def undo_premeasure(state: State, record: PremeasurementRecord, force: bool = False) -> State:
    """Inverse copy unitary.

    Refused with :class:`IrreversibleError` once any involved register has
    been decohered, unless ``force`` is set (which applies the inverse to the
    mixture anyway, demonstrating that coherence is not restored).
    """
    if not record.available_on(state) and not force:
        raise IrreversibleError(
            "irreversible decoherence precedes undo: registers "
            f"{', '.join(sorted(record.labels & state.decohered)) or '(record closed)'}"
        )
    return copy_unitary(state, record.system, record.basis, record.ancillas, inverse=True)


# ---------------------------------------------------------------------------
# decoherence


def environment_vectors(d: int, strength: float) -> np.ndarray:
    """Columns e_i with <e_i|e_j> = 1 on the diagonal and 1 - strength off it."""
    if not 0.0 <= strength <= 1.0:
        raise ValueError("decoherence strength must lie in [0, 1]")
    if strength == 0.0:
        e = np.zeros((d, d))
        e[0, :] = 1.0
        return e
    gram = (1.0 - strength) * np.ones((d, d)) + strength * np.eye(d)
    # eigh instead of Cholesky: the Gram matrix is singular to rounding for tiny strengths
    w, u = np.linalg.eigh(gram)
    return np.sqrt(np.clip(w, 0.0, None))[:, None] * u.conj().T


def decohere(state: State, pointer_registers, pointer_basis: Basis, strength: float = 1.0):
    """Record the pointer value in a fresh environment register and discard it.

    Off-diagonal blocks in ``pointer_basis`` are scaled by ``1 - strength``;
    ``strength = 1`` is a perfect record. Returns a DensityOperator, or a
    FactoredDensity when the state is too large for a dense matrix.
    """
    regs = registers_of(state, _group(pointer_registers))
    d = int(np.prod([r.dim for r in regs]))
    if pointer_basis.partial or pointer_basis.dim != d:
        raise DimensionError(f"pointer basis must span the pointer registers (dimension {d})")
    k = pointer_basis.size
    e = environment_vectors(k, strength)
    # the environment starts in |0>, V_i|0> = e_i is written when the pointer reads b_i;
    # tracing it out in its own basis leaves Kraus operators K_j = sum_i (e_i)_j |b_i><b_i|
    b = pointer_basis.vectors
    kraus = [np.einsum("i,in,im->nm", e[j], b, b.conj()) for j in range(k)]
    p_axes = target_axes(state, regs)
    decohered = state.decohered | {r.label for r in regs}

    dense_out = isinstance(state, DensityOperator) or (
        isinstance(state, StateVector) and state.amplitudes.size <= DENSE_MAX_DIM
    )
    state = as_factored(state)
    r, dims = state.rank, state.dims
    t = np.asarray(state.vectors).reshape((r,) + dims)
    v = np.concatenate(
        [_apply_matrix_tensor(t, kj, p_axes).reshape(r, -1) for kj in kraus if np.any(kj)]
    )
    c = np.kron(np.eye(len(v) // r), state.coeffs)
    out = FactoredDensity(state.registers, v, c, decohered).compressed()
    return out.density() if dense_out else out


# ---------------------------------------------------------------------------
# readout


def _rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(DEFAULT_SEED if rng is None else rng)


def condition(state: State, register, values) -> tuple:
    """Probability and normalised state given ``register`` holds one of ``values``."""
    axis = target_axes(state, [register])[0]
    values = set(values)
    grid = np.indices(state.dims)[axis].reshape(-1) if state.dims else np.zeros(1)
    mask = np.isin(grid, list(values)).astype(float)
    if isinstance(state, StateVector):
        state = state.density()
    if isinstance(state, DensityOperator):
        m = state.matrix * np.outer(mask, mask)
        p = float(np.trace(m).real)
        if p <= 0:
            return 0.0, None
        return p, DensityOperator(state.registers, m / p, state.decohered)
    v = state.vectors * mask[None, :]
    p = float(np.einsum("ij,in,jn->", state.coeffs, v, v.conj()).real)
    if p <= 0:
        return 0.0, None
    return p, FactoredDensity(state.registers, v, state.coeffs / p, state.decohered)


def _full_frame(basis: Basis) -> tuple[Basis, list]:
    """Complete a partial basis; extra vectors read out as OUTSIDE."""
    if not basis.partial or basis.size == basis.dim:
        return Basis(basis.vectors, basis.labels), list(basis.labels)
    vecs, labels = basis.completed()
    internal = list(basis.labels) + [f"{OUTSIDE}:{j}" for j in range(basis.dim - basis.size)]
    return Basis(vecs, internal), list(labels)


def full_measure(state: State, system, basis: Basis, ancillas, rng=None, strength: float = 1.0):
    """Pre-measure, decohere the first ancilla, read it out.

    Returns ``(sampled, ensemble)`` where ``ensemble`` maps each outcome
    label to a :class:`MeasurementOutcome`.  ``rng`` is a Generator or a
    seed (default ``DEFAULT_SEED``).
    """
    frame, readout = _full_frame(basis)
    pre, _ = premeasure(state, system, frame, ancillas)
    pointer = registers_of(pre, _group(ancillas))[0]
    pointer_basis = Basis(np.eye(frame.size), tuple(range(frame.size)))
    rho = decohere(pre, pointer, pointer_basis, strength)

    values: dict = {}
    for i, lb in enumerate(readout):
        values.setdefault(lb, set()).add(i)
    ensemble = {}
    for lb, vals in values.items():
        p, post = condition(rho, pointer, vals)
        ensemble[lb] = MeasurementOutcome(lb, p, post)

    labels = list(ensemble)
    probs = np.array([ensemble[lb].probability for lb in labels])
    pick = _rng(rng).choice(len(labels), p=probs / probs.sum())
    return ensemble[labels[pick]], ensemble


# ---------------------------------------------------------------------------
# bases


def mub_basis(n: int) -> Basis:
    """Qubit bases n = 1, 2, 3: computational, then phases 0 and pi/2; eigenvalues (-1)^l."""
    if n == 1:
        return Basis(np.eye(2), (+1, -1))
    if n == 2:
        offset = 0.0
    elif n == 3:
        offset = math.pi / 2
    else:
        raise ValueError(f"mutually unbiased qubit basis index must be 1, 2 or 3, got {n!r}")
    vecs = [np.array([1.0, np.exp(1j * (offset + l * math.pi))]) / math.sqrt(2) for l in (0, 1)]
    return Basis(np.array(vecs), (+1, -1))


def phase_basis(phi: float, labels=(+1, -1)) -> Basis:
    """(|0> +- e^{i phi}|1>)/sqrt(2)."""
    ph = np.exp(1j * phi)
    vecs = np.array([[1.0, ph], [1.0, -ph]]) / math.sqrt(2)
    return Basis(vecs, tuple(labels))


def plane_basis(theta: float) -> Basis:
    """Eigenbasis of cos(theta) Z + sin(theta) X with eigenvalues +1, -1."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return Basis(np.array([[c, s], [-s, c]]), (+1, -1))


def dressed_basis(system: Register, friends, premeasure_basis: Basis, wigner_basis: Basis) -> Basis:
    """Joint system (x) friend(s) vectors |j;W> = sum_k <k|j> |k>_s |k>_F...

    ``k`` runs over the friend's pre-measurement basis and the friend
    pointers are the computational states written by :func:`premeasure`.
    Measuring these vectors after the pre-measurement gives the same
    amplitudes as measuring ``wigner_basis`` on the bare system.
    """
    friends = _group(friends)
    if premeasure_basis.partial or premeasure_basis.dim != system.dim:
        raise DimensionError("pre-measurement basis must span the system")
    if wigner_basis.dim != system.dim:
        raise DimensionError("Wigner basis must act on the system")
    k = premeasure_basis.size
    for f in friends:
        if f.dim != k:
            raise DimensionError(f"friend register {f.label!r} must have dimension {k}")
    overlaps = premeasure_basis.vectors.conj() @ wigner_basis.vectors.T  # [k, j] = <k|j>
    total = system.dim * k ** len(friends)
    vecs = np.zeros((wigner_basis.size, total), dtype=np.complex128)
    for kk in range(k):
        pointer = np.zeros(k ** len(friends))
        pointer[sum(kk * k**p for p in range(len(friends)))] = 1.0
        branch = np.kron(premeasure_basis.vectors[kk], pointer)
        vecs += overlaps[kk][:, None] * branch[None, :]
    return Basis(vecs, wigner_basis.labels, partial=vecs.shape[0] < total)
