"""Bundled example models used by the test suite, the docs and the CLI corpus."""

import numpy as np

from .model import ControlSet, HamiltonianModel
from .oracle import parse_pauli


def pauli_matrix(word) -> np.ndarray:
    return parse_pauli(word).to_matrix()


def su2_xy_model(seed=0):
    """H(u1, u2) = u1 X + u2 Y on one qubit; generates su(2)."""
    model = HamiltonianModel.polynomial(2, [
        ((1, 0), pauli_matrix("X")),
        ((0, 1), pauli_matrix("Y")),
    ])
    controls = ControlSet.finite([(1.0, 0.0), (0.0, 1.0)], sampler_seed=seed)
    return model, controls


def u2_model(seed=0):
    """H(u1, u2, u3) = u1 X + u2 Y + u3 I on one qubit; generates u(2)."""
    model = HamiltonianModel.polynomial(3, [
        ((1, 0, 0), pauli_matrix("X")),
        ((0, 1, 0), pauli_matrix("Y")),
        ((0, 0, 1), pauli_matrix("I")),
    ])
    controls = ControlSet.finite([(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)],
                                 sampler_seed=seed)
    return model, controls


def abelian_z_model(seed=0):
    """H(u) = u Z on one qubit, u in [0, 1]; one-dimensional algebra."""
    model = HamiltonianModel.polynomial(1, [((1,), pauli_matrix("Z"))])
    controls = ControlSet.box([0.0], [1.0], sampler_seed=seed)
    return model, controls


def nonbilinear_xy_model(points=(1.0, 2.0), seed=0):
    """H(u) = u X + u^2 Y: one control, two independent directions.

    The generator span depends on which control values are sampled, which
    is exactly what a drift-plus-linear reading would miss.
    """
    model = HamiltonianModel.polynomial(1, [
        ((1,), pauli_matrix("X")),
        ((2,), pauli_matrix("Y")),
    ])
    controls = ControlSet.finite([(float(p),) for p in points], sampler_seed=seed)
    return model, controls


def drift_xy_model(seed=0):
    """H(u) = Z + u X + u^2 Y: three coefficient directions from one control."""
    model = HamiltonianModel.polynomial(1, [
        ((0,), pauli_matrix("Z")),
        ((1,), pauli_matrix("X")),
        ((2,), pauli_matrix("Y")),
    ])
    controls = ControlSet.box([-1.0], [1.0], sampler_seed=seed)
    return model, controls


def ising2_model(seed=0):
    """H(u) = u1 ZZ + u2 XI + u3 IX on two qubits (transverse-field pair)."""
    model = HamiltonianModel.polynomial(3, [
        ((1, 0, 0), pauli_matrix("ZZ")),
        ((0, 1, 0), pauli_matrix("XI")),
        ((0, 0, 1), pauli_matrix("IX")),
    ])
    controls = ControlSet.finite(
        [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)], sampler_seed=seed)
    return model, controls


def commuting2_model(seed=0):
    """H(u) = u1 XX + u2 YY on two qubits; the two strings commute."""
    model = HamiltonianModel.polynomial(2, [
        ((1, 0), pauli_matrix("XX")),
        ((0, 1), pauli_matrix("YY")),
    ])
    controls = ControlSet.finite([(1.0, 0.0), (0.0, 1.0)], sampler_seed=seed)
    return model, controls
