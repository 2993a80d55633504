import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jqnn.qnn_compile import compile_monomial, compile_trig_poly
from jqnn.qnn_params import QnnParams
from jqnn.qsim import (
    BlockSpec,
    TooLarge,
    amplitude00,
    gate_h,
    gate_ry,
    gate_rz,
    gate_x,
    kron_all,
    lcu_amplitude_fast,
    lcu_amplitudes_fast,
    lcu_dense_unitary,
    lexicographic_box,
    single_qubit_amplitudes,
    single_qubit_unitary,
)
from jqnn.trig_core import TrigPoly1D

from oracles import unitary_defect

I2 = np.eye(2)
IDENT0 = QnnParams(0, [0.0], [0.0, 0.0])


def random_params(rng, depth):
    return QnnParams(depth, rng.uniform(-np.pi, np.pi, depth + 1), rng.uniform(-np.pi, np.pi, depth + 2))


def random_spec(rng, d, max_L=1, max_qubits=10):
    while True:
        L = tuple(int(v) for v in rng.integers(0, max_L + 1, size=d))
        box = lexicographic_box(L)
        if (len(box) - 1).bit_length() + d <= max_qubits:
            break
    blocks = tuple(tuple(random_params(rng, 2 * abs(nj)) for nj in n) for n in box)
    return BlockSpec(tuple(box), blocks, d)


def three_block_spec():
    """d=1, L=1: blocks realize (1/2)e^{-ix}, 1/2, (1/2)e^{ix}."""
    order = ((-1,), (0,), (1,))
    blocks = tuple((compile_monomial(0.5, n[0])[0],) for n in order)
    return BlockSpec(order, blocks, 1)


# -------------------------------------------------------------------- gates


def test_gate_examples():
    np.testing.assert_allclose(gate_ry(np.pi), [[0, -1], [1, 0]], atol=1e-15)
    assert np.max(np.abs(gate_h() @ gate_h() - I2)) <= 1e-15
    a, b = 0.3, -1.9
    assert np.max(np.abs(gate_rz(a) @ gate_rz(b) - gate_rz(a + b))) <= 1e-15


@given(st.floats(-10, 10))
def test_gates_unitary(theta):
    for U in (gate_ry(theta), gate_rz(theta), gate_h(), gate_x()):
        assert unitary_defect(U) <= 1e-11


def test_kron_associative_bitwise():
    # products of small integers are exact, so the layout must agree bit for bit
    rng = np.random.default_rng(0)
    A, B, C = (rng.integers(-8, 9, (2, 2)) + 1j * rng.integers(-8, 9, (2, 2)) for _ in range(3))
    left = np.kron(np.kron(A, B), C)
    assert np.array_equal(left, np.kron(A, np.kron(B, C)))
    assert np.array_equal(kron_all([A, B, C]), left)
    X = gate_x()
    assert np.array_equal(np.kron(np.kron(X, X), I2), np.kron(X, np.kron(X, I2)))


def test_kron_associative_to_rounding():
    rng = np.random.default_rng(1)
    A, B, C = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
    left = np.kron(np.kron(A, B), C)
    assert np.max(np.abs(left - np.kron(A, np.kron(B, C)))) <= 4e-16 * np.max(np.abs(left))


# ------------------------------------------------------------- single qubit


def test_single_qubit_examples():
    U = single_qubit_unitary(IDENT0, 1.234)
    assert np.max(np.abs(U - I2)) <= 1e-15
    p = QnnParams(0, [np.pi], [0.0, 0.0])
    assert abs(amplitude00(single_qubit_unitary(p, 0.5))) <= 1e-15
    half, _ = compile_trig_poly(TrigPoly1D.constant(0.5))
    assert amplitude00(single_qubit_unitary(half, 0.37)) == pytest.approx(0.5, abs=1e-10)


def test_amplitude00_examples():
    assert amplitude00(I2) == 1
    assert amplitude00(gate_h()) == pytest.approx(1 / math.sqrt(2))
    assert amplitude00(gate_x()) == 0
    with pytest.raises(ValueError):
        amplitude00(np.ones((2, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 8), st.integers(0, 10_000), st.floats(-np.pi, np.pi))
def test_single_qubit_vectorized_matches_matrix(depth, seed, x):
    p = random_params(np.random.default_rng(seed), depth)
    U = single_qubit_unitary(p, x)
    assert unitary_defect(U) <= 1e-12
    assert abs(single_qubit_amplitudes(p, x)[0] - U[0, 0]) <= 1e-13


# ---------------------------------------------------------------------- LCU


def test_lcu_single_identity_block():
    spec = BlockSpec(((0,),), ((IDENT0,),), 1)
    assert spec.q == 0 and spec.n_blocks == 1
    U = lcu_dense_unitary(spec, [0.8])
    assert np.max(np.abs(U - single_qubit_unitary(IDENT0, 0.8))) <= 1e-15
    assert lcu_amplitude_fast(spec, [2.1]) == pytest.approx(1.0)


def test_lcu_three_blocks():
    spec = three_block_spec()
    assert spec.q == 2 and spec.is_full_box()
    assert lcu_amplitude_fast(spec, [0.0]) == pytest.approx(0.375, abs=1e-12)
    for x in np.linspace(-3, 3, 7):
        expect = 0.25 * (0.5 * np.exp(-1j * x) + 0.5 + 0.5 * np.exp(1j * x))
        U = lcu_dense_unitary(spec, [x])
        assert abs(amplitude00(U) - expect) <= 1e-10
        assert abs(lcu_amplitude_fast(spec, [x]) - expect) <= 1e-10


def test_lcu_dense_unitary_at_zero():
    rng = np.random.default_rng(4)
    for d in (1, 2):
        spec = random_spec(rng, d, max_L=1)
        assert unitary_defect(lcu_dense_unitary(spec, np.zeros(d))) <= 1e-11


def test_fast_matches_dense_random():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(20):
        d = 1 + i % 3
        spec = random_spec(rng, d, max_L=2 if d == 1 else 1)
        assert spec.q + d <= 10
        xs = rng.uniform(-np.pi, np.pi, size=(20, d))
        fast = lcu_amplitudes_fast(spec, xs)
        for x, fv in zip(xs, fast):
            dense = amplitude00(lcu_dense_unitary(spec, x))
            worst = max(worst, abs(dense - fv), abs(lcu_amplitude_fast(spec, x) - fv))
    assert worst <= 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_lcu_triangle_bound(seed, d):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, d, max_L=1)
    xs = rng.uniform(-np.pi, np.pi, size=(8, d))
    amp = lcu_amplitudes_fast(spec, xs)
    per_block = np.array(
        [np.prod([np.abs(single_qubit_amplitudes(p, xs[:, j])) for j, p in enumerate(blk)], axis=0) for blk in spec.blocks]
    )
    assert np.all(np.abs(amp) <= 2.0**-spec.q * spec.n_blocks * per_block.max(axis=0) + 1e-12)


def test_dense_guard():
    box = lexicographic_box((4, 4, 4, 4))  # 6561 blocks: q = 13, d = 4
    zero = {k: QnnParams(2 * k, np.zeros(2 * k + 1), np.zeros(2 * k + 2)) for k in range(5)}
    huge = BlockSpec(tuple(box), tuple(tuple(zero[abs(nj)] for nj in n) for n in box), 4)
    assert huge.q + huge.d == 17
    with pytest.raises(TooLarge):
        lcu_dense_unitary(huge, np.zeros(4))
    assert np.isfinite(lcu_amplitude_fast(huge, np.zeros(4)))


def test_blockspec_validation():
    with pytest.raises(ValueError):
        BlockSpec(((1,),), ((IDENT0,),), 1)  # depth must be 2|n|
    with pytest.raises(ValueError):
        BlockSpec((), (), 1)
    with pytest.raises(ValueError):
        BlockSpec(((0, 0),), ((IDENT0,),), 2)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=3))
def test_box_cardinality_and_q(L):
    box = lexicographic_box(L)
    n = math.prod(2 * v + 1 for v in L)
    assert len(box) == n == len(set(box))
    assert box == sorted(box)
    if n > 1:
        assert (n - 1).bit_length() == math.ceil(math.log2(n))
