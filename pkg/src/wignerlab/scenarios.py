"""Wigner's-Friend gedankenexperiments as executable protocols."""

from __future__ import annotations

import enum
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import meas
from .meas import FriendPolicy, dressed_basis, mub_basis, phase_basis, plane_basis
from .qcore import (
    OUTSIDE,
    Basis,
    DensityOperator,
    FactoredDensity,
    Register,
    State,
    StateVector,
    apply_matrix,
    as_factored,
    basis_state,
    born_probabilities,
    joint_probabilities,
    ket,
    partial_trace,
    qubit,
    tensor,
)

HT = Basis(np.eye(2), ("H", "T"))
# s-lab pointer values of the FR system are the eigenvalues -1, +1
S_BASIS = Basis(np.eye(2), (-1, +1))
HADAMARD = np.array([[1, 1], [1, -1]]) / math.sqrt(2)

PHI_GRID_25 = tuple(np.linspace(0.0, 2 * math.pi, 25))


def visibility(values: Sequence[float]) -> float:
    hi, lo = max(values), min(values)
    return (hi - lo) / (hi + lo) if hi + lo > 0 else 0.0


def _friend_acts(state: State, policy: FriendPolicy, system, basis, ancillas) -> State:
    """Pre-measurement, plus decoherence of the device pointer for a full measurement."""
    state, _ = meas.premeasure(state, system, basis, ancillas)
    if policy is FriendPolicy.FULL:
        state = meas.decohere(state, ancillas[0], Basis(np.eye(basis.size), basis.labels))
    return state


# ---------------------------------------------------------------------------
# Frauchiger-Renner


@dataclass(frozen=True)
class FRReport:
    policy: FriendPolicy
    p_ok_okbar: float  # P(W_g = -, W_s = -)
    p_wg_minus: float  # P(W_g = -)
    p_ok_given_okbar: float
    p_T_and_ok: float  # P(F_g holds T, L_s found in |->) before any Wigner acts
    p_ok_given_T: float | None  # only meaningful when F_g's record exists
    joint: dict  # (w_g, w_s) -> probability, sequential full_measure route
    joint_direct: dict  # same table from a single joint Born readout
    conditional: dict  # w_g -> {w_s: P(w_s | w_g)}
    symmetric_lab: dict = field(default_factory=dict)  # phi -> Wigner distribution

    def rows(self) -> list[dict]:
        out = []
        for (wg, ws), p in self.joint.items():
            cond = self.conditional.get(wg, {}).get(ws)
            out.append({"w_g": wg, "w_s": ws, "probability": p, "conditional": cond})
        return out


FR_REGISTERS = tuple(qubit(x) for x in ("g", "D_g", "F_g", "s", "D_s", "F_s"))


def fr_initial_state() -> StateVector:
    g = ket([FR_REGISTERS[0]], [math.sqrt(1 / 3), math.sqrt(2 / 3)])
    rest = basis_state(FR_REGISTERS[1:], [0] * 5)
    return tensor(g, rest)


def fr_emitted_state(policy: FriendPolicy) -> State:
    """F_g has acted and L_g has emitted s; F_s has not yet touched it."""
    g, dg, fg, s, ds, fs = FR_REGISTERS
    state = _friend_acts(fr_initial_state(), policy, g, HT, [dg, fg])
    # L_g emits s in |-1> on H and |+> = (|-1> + |+1>)/sqrt2 on T
    ctrl_h = np.kron(np.diag([1, 0]), np.eye(2)) + np.kron(np.diag([0, 1]), HADAMARD)
    return apply_matrix(state, ctrl_h, [dg, s])


def fr_lab_states(policy: FriendPolicy) -> State:
    """State of L_g (x) L_s after both Friends acted and before the Wigners."""
    g, dg, fg, s, ds, fs = FR_REGISTERS
    return _friend_acts(fr_emitted_state(policy), policy, s, S_BASIS, [ds, fs])


def wigner_bases() -> tuple[Basis, Basis]:
    g, dg, fg, s, ds, fs = FR_REGISTERS
    pm = phase_basis(0.0, ("+", "-"))
    return dressed_basis(g, [dg, fg], HT, pm), dressed_basis(s, [ds, fs], S_BASIS, pm)


def run_fr(policy: FriendPolicy = FriendPolicy.PREMEASURE, rng=None) -> FRReport:
    g, dg, fg, s, ds, fs = FR_REGISTERS
    lab_g, lab_s = [g, dg, fg], [s, ds, fs]
    wg_basis, ws_basis = wigner_bases()
    # F_g's record against s read directly in |+->_s
    emitted = joint_probabilities(fr_emitted_state(policy), [(HT, fg), (phase_basis(0.0, ("+", "-")), s)])
    p_T_and_ok = emitted[("T", "-")]
    state = fr_lab_states(policy)

    # each Wigner fully measures his lab with his own 8-level record
    rec_g, rec_s = Register("W_g", 8), Register("W_s", 8)
    _, ens_g = meas.full_measure(
        tensor(as_factored(state), basis_state([rec_g], [0])), lab_g, wg_basis, [rec_g], rng
    )
    joint: dict = {}
    conditional: dict = {}
    for wg, out_g in ens_g.items():
        if out_g.probability <= 1e-15:
            for ws in ws_basis.labels + (OUTSIDE,):
                joint[(wg, ws)] = 0.0
            continue
        _, ens_s = meas.full_measure(
            tensor(out_g.post_state, basis_state([rec_s], [0])), lab_s, ws_basis, [rec_s], rng
        )
        conditional[wg] = {ws: o.probability for ws, o in ens_s.items()}
        for ws, o in ens_s.items():
            joint[(wg, ws)] = out_g.probability * o.probability

    direct = joint_probabilities(state, [(wg_basis, lab_g), (ws_basis, lab_s)])
    p_wg_minus = sum(p for (wg, _), p in joint.items() if wg == "-")

    p_ok_given_T = None
    symmetric = {}
    if policy is FriendPolicy.FULL:
        on_T = joint_probabilities(state, [(HT, fg), (ws_basis, lab_s)])
        p_T = sum(p for (x, _), p in on_T.items() if x == "T")
        p_ok_given_T = on_T[("T", "-")] / p_T
        symmetric = {phi: decohered_lab_distribution(phi) for phi in (0.0, math.pi / 4, math.pi / 2)}

    return FRReport(
        policy=policy,
        p_ok_okbar=joint[("-", "-")],
        p_wg_minus=p_wg_minus,
        p_ok_given_okbar=conditional["-"]["-"],
        p_T_and_ok=p_T_and_ok,
        p_ok_given_T=p_ok_given_T,
        joint=joint,
        joint_direct=direct,
        conditional=conditional,
        symmetric_lab=symmetric,
    )


def decohered_lab_distribution(phi: float, alpha: complex = 1 / math.sqrt(2), beta: complex = 1 / math.sqrt(2)) -> dict:
    """Super-Wigner readout in |+-;phi>_L of a lab whose Friend fully measured."""
    g, d, f = qubit("g"), qubit("D_g"), qubit("F_g")
    state = tensor(ket([g], [alpha, beta]), basis_state([d, f], [0, 0]))
    rho = _friend_acts(state, FriendPolicy.FULL, g, HT, [d, f])
    basis = dressed_basis(g, [d, f], HT, phase_basis(phi, ("+", "-")))
    return born_probabilities(rho, basis, [g, d, f])


# ---------------------------------------------------------------------------
# concordant (E.P. Wigner) readout


@dataclass(frozen=True)
class ConcordantReport:
    alpha: complex
    beta: complex
    friend: dict  # record -> probability
    joint: dict  # (friend record, wigner outcome) -> probability
    agreement: float


def run_concordant_wigner(alpha: complex = 1 / math.sqrt(2), beta: complex = 1 / math.sqrt(2), rng=None) -> ConcordantReport:
    g, d, f = qubit("g"), qubit("D_g"), qubit("F_g")
    state = tensor(ket([g], [alpha, beta]), basis_state([d, f], [0, 0]))
    _, ensemble = meas.full_measure(state, g, HT, [d, f], rng)
    concordant = dressed_basis(g, [d, f], HT, HT)
    joint = {}
    for x, out in ensemble.items():
        if out.probability <= 0:
            continue
        for y, p in born_probabilities(out.post_state, concordant, [g, d, f]).items():
            joint[(x, y)] = out.probability * p
    agreement = sum(p for (x, y), p in joint.items() if x == y)
    return ConcordantReport(
        alpha, beta, {x: o.probability for x, o in ensemble.items()}, joint, agreement
    )


# ---------------------------------------------------------------------------
# GHZ


class Agent(enum.Enum):
    WIGNER = "wigner"  # friend pre-measures in n=3, super-Wigner reads the dressed basis
    FRIEND = "friend"  # friend's pre-measurement made factual: read her record
    DIRECT = "direct"  # no friend, the qubit is measured in |+-,phi>


@dataclass(frozen=True)
class GHZSettings:
    phis: tuple[float, float, float]
    agents: tuple[Agent, Agent, Agent] = (Agent.DIRECT,) * 3

    def __post_init__(self):
        phis = tuple(float(p) for p in self.phis)
        agents = tuple(Agent(a) for a in self.agents)
        if len(phis) != 3 or len(agents) != 3:
            raise ValueError("GHZ settings need three angles and three agents")
        if not all(math.isfinite(p) for p in phis):
            raise ValueError("GHZ angles must be finite")
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "agents", agents)


def ghz_state(n: int = 3) -> StateVector:
    regs = [qubit(f"s{m}") for m in range(1, n + 1)]
    a = np.zeros(2**n)
    a[0] = a[-1] = 1
    return ket(regs, a)


def ghz_distribution(settings: GHZSettings) -> dict:
    """Joint distribution P(r, s, t) of the three station outcomes."""
    state = ghz_state()
    friend_basis = mub_basis(3)
    specs = []
    for m, (phi, agent) in enumerate(zip(settings.phis, settings.agents), start=1):
        sm, fm = qubit(f"s{m}"), qubit(f"F{m}")
        direct = phase_basis(phi)
        if agent is Agent.DIRECT:
            specs.append((direct, [sm]))
            continue
        state = tensor(state, basis_state([fm], [0]))
        if agent is Agent.WIGNER:
            state, _ = meas.premeasure(state, sm, friend_basis, [fm])
            specs.append((dressed_basis(sm, [fm], friend_basis, direct), [sm, fm]))
        else:
            state, _ = meas.premeasure(state, sm, direct, [fm])
            specs.append((Basis(np.eye(2), direct.labels), [fm]))
    return joint_probabilities(state, specs)


def run_ghz_correlation(settings: GHZSettings) -> float:
    dist = ghz_distribution(settings)
    leak = sum(p for k, p in dist.items() if OUTSIDE in k)
    if leak > 1e-9:
        raise RuntimeError(f"dressed readout left the pre-measured subspace (weight {leak:.3g})")
    return float(sum(r * s * t * p for (r, s, t), p in dist.items() if OUTSIDE not in (r, s, t)))


# ---------------------------------------------------------------------------
# counterfactual assignments


VARIABLES = ("w1", "w2", "w3", "f1", "f2", "f3")


@dataclass(frozen=True, order=True)
class CounterfactualAssignment:
    w1: int
    w2: int
    w3: int
    f1: int
    f2: int
    f3: int

    def __post_init__(self):
        for name in VARIABLES:
            if getattr(self, name) not in (1, -1):
                raise ValueError(f"{name} must be +1 or -1")

    def value(self, station: int, kind: str) -> int:
        return getattr(self, f"{kind}{station}")


# w1 w2 w3 = 1, w1 f2 f3 = f1 w2 f3 = f1 f2 w3 = -1
GHZ_CONSTRAINTS = (("www", 1), ("wff", -1), ("fwf", -1), ("ffw", -1))


def _check_constraint(c) -> tuple[str, int]:
    try:
        mask, target = c
    except (TypeError, ValueError):
        raise ValueError(f"malformed constraint {c!r}: expected (mask, target)") from None
    if not isinstance(mask, str) or len(mask) != 3 or set(mask) - {"w", "f"}:
        raise ValueError(f"malformed constraint mask {mask!r}: three characters from 'w'/'f'")
    if target not in (1, -1):
        raise ValueError(f"constraint target must be +1 or -1, got {target!r}")
    return mask, target


def counterfactual_search(constraints) -> frozenset:
    """All assignments in {+1,-1}^6 whose station products meet every constraint."""
    cons = [_check_constraint(c) for c in constraints]
    # positions into (w1, w2, w3, f1, f2, f3) for each constraint
    index = [([m if kind == "w" else 3 + m for m, kind in enumerate(mask)], target) for mask, target in cons]
    found = set()
    for values in itertools.product((1, -1), repeat=6):
        if all(values[i] * values[j] * values[k] == target for (i, j, k), target in index):
            found.add(CounterfactualAssignment(*values))
    return frozenset(found)


# ---------------------------------------------------------------------------
# Brukner CHSH with (pre-)measuring Friends


CHSH_ANGLES = (0.0, math.pi / 2, math.pi / 4, -math.pi / 4)  # a, a', b, b'


@dataclass(frozen=True)
class CHSHReport:
    policy: FriendPolicy
    angles: tuple
    correlators: dict  # (setting a, setting b) -> E
    S: float
    grid_deg: float | None = None
    grid_max: float | None = None


def _brukner_state(policy: FriendPolicy) -> State:
    s1, s2, f1, f2 = (qubit(x) for x in ("s1", "s2", "F1", "F2"))
    singlet = ket([s1, s2], [0, 1, -1, 0])
    z = Basis(np.eye(2), (+1, -1))
    state = tensor(singlet, basis_state([f1, f2], [0, 0]))
    state = _friend_acts(state, policy, s1, z, [f1])
    return _friend_acts(state, policy, s2, z, [f2])


def _correlator_fn(policy: FriendPolicy):
    state = _brukner_state(policy)
    z = Basis(np.eye(2), (+1, -1))
    s1, s2, f1, f2 = (qubit(x) for x in ("s1", "s2", "F1", "F2"))
    if policy is FriendPolicy.FULL:
        sep = partial_trace(state, [s1, s2])

        def corr(a, b):
            d = joint_probabilities(sep, [(plane_basis(a), [s1]), (plane_basis(b), [s2])])
            return sum(x * y * p for (x, y), p in d.items())
    else:

        def corr(a, b):
            d = joint_probabilities(
                state,
                [
                    (dressed_basis(s1, [f1], z, plane_basis(a)), [s1, f1]),
                    (dressed_basis(s2, [f2], z, plane_basis(b)), [s2, f2]),
                ],
            )
            return sum(x * y * p for (x, y), p in d.items() if OUTSIDE not in (x, y))

    return corr


def chsh_value(e_ab: float, e_abp: float, e_apb: float, e_apbp: float) -> float:
    return abs(e_ab + e_abp + e_apb - e_apbp)


def chsh_grid_max(policy: FriendPolicy, step_deg: float = 10.0) -> float:
    """Largest CHSH value over every planar setting quadruple on the grid."""
    corr = _correlator_fn(policy)
    angles = np.deg2rad(np.arange(0.0, 360.0, step_deg))
    e = np.array([[corr(a, b) for b in angles] for a in angles])
    s = (
        e[:, None, :, None]
        + e[:, None, None, :]
        + e[None, :, :, None]
        - e[None, :, None, :]
    )
    return float(np.abs(s).max())


def run_brukner_chsh(policy: FriendPolicy, angles=CHSH_ANGLES, grid_deg: float | None = None) -> CHSHReport:
    a, ap, b, bp = angles
    corr = _correlator_fn(policy)
    e = {("a", "b"): corr(a, b), ("a", "b'"): corr(a, bp), ("a'", "b"): corr(ap, b), ("a'", "b'"): corr(ap, bp)}
    s = chsh_value(e[("a", "b")], e[("a", "b'")], e[("a'", "b")], e[("a'", "b'")])
    grid = chsh_grid_max(policy, grid_deg) if grid_deg else None
    return CHSHReport(policy, tuple(angles), e, s, grid_deg, grid)


# ---------------------------------------------------------------------------
# quantum eraser


@dataclass(frozen=True)
class EraserReport:
    phi: float
    filter_on: bool
    which_path: bool
    p_detector1: float
    phis: tuple
    sweep: tuple
    visibility: float


POL, PATH, MARKER = Register("pol", 2), Register("path", 2), Register("marker", 2)
D_POL = np.array([1.0, 1.0]) / math.sqrt(2)
# |h,1> -> |h,1>, |v,1> -> |v,2>
PBS = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
# |1> -> (|1> + i|2>)/sqrt2, |2> -> (|2> + i|1>)/sqrt2
EXIT_BS = np.array([[1, 1j], [1j, 1]]) / math.sqrt(2)


def eraser_probability(phi: float, filter_on: bool, which_path: bool = False) -> float:
    """Probability that the photon reaches the detector in exit beam 1."""
    state = tensor(ket([POL], D_POL), basis_state([PATH], [0]))
    state = apply_matrix(state, PBS, [POL, PATH])
    state = apply_matrix(state, np.diag([np.exp(1j * phi), 1.0]), [PATH])
    if which_path:
        state = tensor(state, basis_state([MARKER], [0]))
        state, _ = meas.premeasure(state, PATH, Basis(np.eye(2), (1, 2)), [MARKER])
    state = apply_matrix(state, EXIT_BS, [PATH])
    if filter_on:
        through = Basis(np.kron(D_POL, [1.0, 0.0])[None, :], ("d1",), partial=True)
        return born_probabilities(state, through, [POL, PATH])["d1"]
    return born_probabilities(state, Basis(np.eye(2), (1, 2)), [PATH])[1]


def run_eraser(phi: float = 0.0, filter_on: bool = True, points: int = 25, which_path: bool = False) -> EraserReport:
    phis = tuple(np.linspace(0.0, 2 * math.pi, points))
    sweep = tuple(eraser_probability(x, filter_on, which_path) for x in phis)
    return EraserReport(
        phi, filter_on, which_path, eraser_probability(phi, filter_on, which_path), phis, sweep, visibility(sweep)
    )


# ---------------------------------------------------------------------------
# Heisenberg cut


@dataclass(frozen=True)
class CutScalingConfig:
    m: int
    leak: float = 0.0
    phis: tuple = PHI_GRID_25
    max_m: int = 22
    threshold: float = 0.5

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("Friend qubit count must be >= 0")
        if self.m > self.max_m:
            raise ValueError(f"m = {self.m} exceeds the memory cap of {self.max_m} Friend qubits")
        if not 0.0 <= self.leak <= 1.0:
            raise ValueError("leak must lie in [0, 1]")


@dataclass(frozen=True)
class CutScalingResult:
    m: int
    leak: float
    phis: tuple
    p_plus: tuple
    visibility: float
    seconds: float
    rank: int


def cut_registers(m: int) -> tuple[Register, ...]:
    return (qubit("g"), qubit("D_g")) + tuple(qubit(f"F{n}") for n in range(1, m + 1))


def run_cut_scaling(config: CutScalingConfig) -> CutScalingResult:
    """Interference of g after Wigner disentangles an m-qubit Friend.

    The phase on g commutes with the Friend-qubit leak and with the
    g-controlled disentangler, so the lab is evolved once and the phase is
    applied to the reduced state of g for each grid point.
    """
    t0 = time.perf_counter()
    regs = cut_registers(config.m)
    g, pointers = regs[0], list(regs[1:])
    state = basis_state(regs, [0] * len(regs))
    state = apply_matrix(state, HADAMARD, [g])
    state, record = meas.premeasure(state, g, HT, pointers)
    lab = FactoredDensity.from_state(state)
    if config.leak > 0:
        for f in pointers[1:]:
            lab = meas.decohere(lab, f, HT, strength=config.leak)
    # Wigner's unitary |T>|T..T> -> |T>|H..H>; applied whether or not the Friend leaked
    lab = meas.copy_unitary(lab, record.system, record.basis, record.ancillas, inverse=True)
    rho_g = partial_trace(lab, [g])
    readout = phase_basis(0.0, ("+", "-"))
    p_plus = []
    for phi in config.phis:
        shifted = apply_matrix(rho_g, np.diag([1.0, np.exp(1j * phi)]), [g])
        p_plus.append(born_probabilities(shifted, readout, [g])["+"])
    seconds = time.perf_counter() - t0
    return CutScalingResult(config.m, config.leak, tuple(config.phis), tuple(p_plus), visibility(p_plus), seconds, lab.rank)


def cut_threshold(leak: float, m_values: Sequence[int], threshold: float = 0.5, max_m: int = 22) -> int | None:
    """Smallest m whose visibility drops below ``threshold`` (the operational cut)."""
    for m in m_values:
        if run_cut_scaling(CutScalingConfig(m, leak, max_m=max_m)).visibility < threshold:
            return m
    return None


# ---------------------------------------------------------------------------
# sealed lab with a universal polarising splitter


@dataclass(frozen=True)
class SealedLabSetting:
    alpha: float
    phi: float
    polarization: DensityOperator | None = None  # default |h><h|
    premeasure: bool = True

    def __post_init__(self):
        pol = self.polarization
        if pol is None:
            pol = basis_state([SL_POL], [0]).density()
        elif isinstance(pol, StateVector):
            pol = pol.density()
        if pol.dims != (2,):
            raise ValueError("input polarization must be a single qubit state")
        object.__setattr__(self, "polarization", DensityOperator((SL_POL,), pol.matrix))


@dataclass(frozen=True)
class SealedLabReport:
    setting: SealedLabSetting
    exits: dict  # exit -> probability
    exit_polarization: dict  # exit -> 2x2 density matrix (None when never used)


SL_POL, SL_PATH = Register("pol", 2), Register("path", 3)
EXITS = ("no-measurement", "h", "v")


def friend_device(alpha: float, phi: float) -> np.ndarray:
    """U^dagger(alpha, phi): |h> -> cos a|h> + e^{i phi} sin a|v>, |v> -> -e^{-i phi} sin a|h> + cos a|v>."""
    c, s, e = math.cos(alpha), math.sin(alpha), np.exp(1j * phi)
    return np.array([[c, -np.conj(e) * s], [e * s, c]])


def _splitter() -> np.ndarray:
    # path 0 is the entry / no-measurement fibre; h goes to exit 1, v to exit 2
    perm = np.eye(6)
    for a, b in (((0, 0), (0, 1)), ((1, 0), (1, 2))):
        i, j = np.ravel_multi_index(a, (2, 3)), np.ravel_multi_index(b, (2, 3))
        perm[[i, j]] = perm[[j, i]]
    return perm


def run_sealed_lab(setting: SealedLabSetting) -> SealedLabReport:
    state = tensor(setting.polarization, basis_state([SL_PATH], [0]).density())
    if setting.premeasure:
        state = apply_matrix(state, friend_device(setting.alpha, setting.phi), [SL_POL])
        state = apply_matrix(state, _splitter(), [SL_POL, SL_PATH])
    exits = born_probabilities(state, Basis(np.eye(3), EXITS), [SL_PATH])
    pol = {}
    for i, name in enumerate(EXITS):
        p, branch = meas.condition(state, SL_PATH, {i})
        pol[name] = None if branch is None else partial_trace(branch, [SL_POL]).matrix
    return SealedLabReport(setting, exits, pol)
