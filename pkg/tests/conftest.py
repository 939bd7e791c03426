"""Shared fixtures: the suite circuits exercised by the cross-cutting
invariants (flux balance, method equivalence, ergodicity, physicality).
"""
import numpy as np
import pytest

from dephnet import (load_builtin, make_additivity_pair, make_parallel_circuit,
                     make_pentagon, make_triangle_funnel, make_wire,
                     reverse_circuit)


def build_suite():
    a, b = make_additivity_pair()
    funnel = make_triangle_funnel("forward")
    return [
        make_wire(2),
        make_wire(3),
        make_parallel_circuit(3),
        a,
        b,
        make_pentagon(),
        funnel,
        reverse_circuit(funnel),
    ]


@pytest.fixture(scope="session")
def suite_circuits():
    return build_suite()


def random_density_matrix(rng: np.random.Generator, n: int,
                          trace: float) -> np.ndarray:
    """Random PSD matrix with the given trace (trace <= n keeps it a
    valid partially filled device state)."""
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = x @ x.conj().T
    return rho * (trace / np.trace(rho).real)
