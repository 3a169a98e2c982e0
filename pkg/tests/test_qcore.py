import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wignerlab.qcore import (
    OUTSIDE,
    Basis,
    DensityOperator,
    DimensionError,
    FactoredDensity,
    Register,
    RegisterError,
    StateVector,
    apply_unitary,
    as_factored,
    basis_state,
    born_probabilities,
    fidelity,
    from_json,
    joint_probabilities,
    ket,
    maximally_mixed,
    partial_trace,
    project,
    qubit,
    reorder,
    tensor,
    to_json,
    von_neumann_entropy,
)

A, B, C = qubit("a"), qubit("b"), Register("c", 3)


def random_ket(rng, regs):
    n = int(np.prod([r.dim for r in regs]))
    return ket(regs, rng.normal(size=n) + 1j * rng.normal(size=n))


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


seeds = st.integers(0, 2**32 - 1)


def test_register_validation():
    with pytest.raises(DimensionError):
        Register("x", 1)
    with pytest.raises(RegisterError):
        Register("", 2)
    with pytest.raises(RegisterError):
        StateVector((A, A), np.eye(4)[0])


def test_state_rejects_bad_norm_and_shape():
    with pytest.raises(ValueError):
        StateVector((A,), [1.0, 1.0])
    with pytest.raises(DimensionError):
        StateVector((A,), [1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        DensityOperator((A,), np.diag([1.5, -0.5]))


def test_bell_state_partial_trace_is_mixed():
    bell = ket([A, B], [1, 0, 0, 1])
    rho = partial_trace(bell, [A])
    assert np.allclose(rho.matrix, np.eye(2) / 2, atol=1e-14)
    assert von_neumann_entropy(rho) == pytest.approx(1.0, abs=1e-12)


def test_born_rule_on_plus_state():
    plus = ket([A], [1, 1])
    probs = born_probabilities(plus, Basis(np.eye(2), (0, 1)), [A])
    assert probs == pytest.approx({0: 0.5, 1: 0.5}, abs=1e-15)


def test_partial_basis_reports_outside_weight():
    half = Basis(np.array([[1.0, 0.0]]), ("zero",), partial=True)
    probs = born_probabilities(ket([A], [1, 1]), half, [A])
    assert probs["zero"] == pytest.approx(0.5, abs=1e-15)
    assert probs[OUTSIDE] == pytest.approx(0.5, abs=1e-15)


def test_basis_checks():
    with pytest.raises(ValueError):
        Basis(np.array([[1.0, 0.0], [1.0, 0.0]]), (0, 1))
    with pytest.raises(DimensionError):
        Basis(np.array([[1.0, 0.0]]), (0,))
    with pytest.raises(ValueError):
        Basis(np.eye(2), (0, 0))


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_three_state_types_agree(seed):
    rng = np.random.default_rng(seed)
    psi = random_ket(rng, [A, C, B])
    rho = psi.density()
    fac = as_factored(rho)
    basis = Basis(random_unitary(rng, 3), ("x", "y", "z"))
    ref = born_probabilities(psi, basis, [C])
    for state in (rho, fac, FactoredDensity.from_state(psi)):
        got = born_probabilities(state, basis, [C])
        assert max(abs(got[k] - ref[k]) for k in ref) < 1e-12


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_unitary_preserves_trace_and_fidelity(seed):
    rng = np.random.default_rng(seed)
    psi = random_ket(rng, [A, B])
    u = random_unitary(rng, 2)
    out = apply_unitary(psi, u, [B])
    back = apply_unitary(out, u.conj().T, [B])
    assert fidelity(back, psi) == pytest.approx(1.0, abs=1e-12)
    dense = apply_unitary(psi.density(), u, [B])
    assert np.trace(dense.matrix).real == pytest.approx(1.0, abs=1e-12)
    assert fidelity(dense, out) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_partial_trace_matches_einsum(seed):
    rng = np.random.default_rng(seed)
    psi = random_ket(rng, [A, C, B])
    t = psi.amplitudes.reshape(2, 3, 2)
    expected = np.einsum("ijk,ljk->il", t, t.conj())
    assert np.allclose(partial_trace(psi, [A]).matrix, expected, atol=1e-13)
    assert np.allclose(partial_trace(as_factored(psi.density()), [A]).matrix, expected, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_projection_probabilities_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    psi = random_ket(rng, [A, B])
    u = random_unitary(rng, 2)
    total = 0.0
    for v in u.T:
        p, post = project(psi, np.outer(v, v.conj()), [A])
        total += p
        if post is not None:
            again, _ = project(post, np.outer(v, v.conj()), [A])
            assert again == pytest.approx(1.0, abs=1e-12)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_tensor_and_reorder():
    s = tensor(basis_state([A], [1]), basis_state([B], [0]))
    assert s.labels == ("a", "b")
    swapped = reorder(s, ["b", "a"])
    assert np.argmax(np.abs(swapped.amplitudes)) == 1
    f = tensor(as_factored(s), as_factored(basis_state([C], [2])))
    assert isinstance(f, FactoredDensity)
    assert joint_probabilities(f, [(Basis(np.eye(3), (0, 1, 2)), [C])])[(2,)] == pytest.approx(1.0)


def test_maximally_mixed_fidelity():
    assert fidelity(maximally_mixed([A]), basis_state([A], [0])) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_json_round_trip(seed):
    rng = np.random.default_rng(seed)
    psi = random_ket(rng, [A, C])
    back = from_json(to_json(psi))
    assert fidelity(back, psi) == pytest.approx(1.0, abs=1e-12)
    rho = from_json(to_json(psi.density()))
    assert np.allclose(rho.matrix, psi.density().matrix, atol=1e-15)


def test_compressed_keeps_the_operator():
    rng = np.random.default_rng(3)
    vecs = [random_ket(rng, [A, B]).amplitudes for _ in range(3)]
    v = np.array(vecs + [vecs[0] + vecs[1]])
    c = np.diag([0.25, 0.25, 0.25, 0.25 / np.linalg.norm(vecs[0] + vecs[1]) ** 2])
    f = FactoredDensity((A, B), v, c)
    g = f.compressed()
    assert g.rank == 3
    assert np.allclose(f.density().matrix, g.density().matrix, atol=1e-13)
    assert math.isclose(fidelity(f, g), 1.0, abs_tol=1e-10)
