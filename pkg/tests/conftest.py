"""Shared fixtures: example circuits, small fields and a staffed registry."""

from __future__ import annotations

from pathlib import Path

import pytest

from pouw.circuit import parse_circuit
from pouw.field import PrimeField
from pouw.r1cs import compile_circuit
from pouw.registry import RegistryParams, RegistryState

CIRCUITS = Path(__file__).resolve().parent.parent / "circuits"

FACTOR_SOURCE = """\
def main(
    private field factor1,
    private field factor2,
    public field product,
    public u32 integrity
) -> bool {
    assert(integrity != 0); // dummy utilization
    assert(factor1 * factor2 == product);
    return true;
}
"""

PLAIN_FACTOR_SOURCE = """\
def main(private field factor1, private field factor2, public field product) -> bool {
    assert(factor1 * factor2 == product);
    return true;
}
"""

TAUTOLOGY_SOURCE = "def main(public field x) -> bool { assert(x == x); return true; }"

AFFINE_SOURCE = """\
def main(private field a, private field x, private field b, public field bound) -> bool {
    field out_y = a * x + b;
    assert(out_y != bound);
    return true;
}
"""


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch, tmp_path):
    """No stray POUW_* variables or ./pouw.toml leak into a test."""
    for name in ("POUW_CONFIG", "POUW_SEED", "POUW_OUT"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def field() -> PrimeField:
    return PrimeField()


@pytest.fixture
def f11() -> PrimeField:
    return PrimeField(11)


@pytest.fixture
def factor_circuit():
    return parse_circuit(FACTOR_SOURCE)


@pytest.fixture
def factor_r1cs(factor_circuit, field):
    return compile_circuit(factor_circuit, field)


@pytest.fixture
def plain_factor():
    return parse_circuit(PLAIN_FACTOR_SOURCE)


@pytest.fixture
def registry() -> RegistryState:
    state = RegistryState(RegistryParams(), entropy=b"test-entropy")
    for i in range(3):
        state.add_node(bytes([i + 1]) * 20, 100)
    return state
