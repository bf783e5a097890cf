import pytest
from conftest import FACTOR_SOURCE, PLAIN_FACTOR_SOURCE

from pouw.circuit import circuit_id
from pouw.errors import (
    AlreadyInactive,
    CompileFailed,
    FeeTooLow,
    IntegrityParamUnused,
    NoActiveNodes,
    NotFound,
    NoValidContributions,
    UnknownNode,
)
from pouw.registry import (
    NodeBehavior,
    RegistryParams,
    RegistryState,
    SlashReason,
    contribution_tag,
    get_circuit,
    register_circuit,
    slash,
    validate_contribution,
)

NODE = bytes([1]) * 20


def test_register_splits_fee(registry, field):
    record = register_circuit(registry, FACTOR_SOURCE, 30, field)
    assert record.circuit_id == circuit_id(FACTOR_SOURCE)
    assert record.complexity == 2
    assert record.integrity_position == 1
    assert sorted(registry.balances.values()) == [10, 10, 10]
    assert get_circuit(registry, record.circuit_id) is record
    assert record.circuit.public_params[1].name == "integrity"


def test_fee_remainder_goes_to_first_node(registry, field):
    register_circuit(registry, FACTOR_SOURCE, 31, field)
    assert registry.balances[NODE] == 11
    assert sum(registry.balances.values()) == 31


def test_register_is_idempotent(registry, field):
    first = register_circuit(registry, FACTOR_SOURCE, 30, field)
    again = register_circuit(registry, FACTOR_SOURCE.replace("    ", "\t"), 30, field)
    assert again is first
    assert sum(registry.balances.values()) == 30


def test_fee_too_low(registry, field):
    with pytest.raises(FeeTooLow):
        register_circuit(registry, FACTOR_SOURCE, 9, field)


def test_integrity_parameter_required(registry, field):
    with pytest.raises(IntegrityParamUnused):
        register_circuit(registry, PLAIN_FACTOR_SOURCE, 30, field)
    unused = (
        "def main(public field integrity, private field a) -> bool {"
        " assert(a == a); return true; }"
    )
    with pytest.raises(IntegrityParamUnused):
        register_circuit(registry, unused, 30, field)


def test_compile_failure(registry, field):
    with pytest.raises(CompileFailed):
        register_circuit(registry, "def main(", 30, field)
    assert not registry.records


def test_no_active_nodes(field):
    with pytest.raises(NoActiveNodes):
        register_circuit(RegistryState(), FACTOR_SOURCE, 30, field)


def test_lookup_missing(registry):
    with pytest.raises(NotFound):
        get_circuit(registry, circuit_id(FACTOR_SOURCE))
    with pytest.raises(KeyError):
        registry.lookup(circuit_id(FACTOR_SOURCE))


def test_slash_until_inactive(registry):
    slash(registry, NODE, SlashReason.INVALID_SHARE)
    assert registry.nodes[NODE].stake == 50
    assert registry.nodes[NODE].active
    slash(registry, NODE, "unresponsive_query")
    assert registry.nodes[NODE].stake == 25
    assert not registry.nodes[NODE].active
    assert len(registry.active_nodes()) == 2
    with pytest.raises(AlreadyInactive):
        slash(registry, NODE, SlashReason.INVALID_SHARE)
    with pytest.raises(UnknownNode):
        slash(registry, bytes(20), SlashReason.INVALID_SHARE)


def test_misbehaving_nodes_are_slashed(registry, field):
    bad, silent = bytes([8]) * 20, bytes([9]) * 20
    registry.add_node(bad, 100, NodeBehavior.INVALID_SHARE)
    registry.add_node(silent, 100, "unresponsive")
    register_circuit(registry, FACTOR_SOURCE, 30, field)
    assert registry.nodes[bad].stake == 50
    assert registry.nodes[silent].stake == 50
    assert registry.balances[bad] == registry.balances[silent] == 0
    assert sorted(registry.balances.values()) == [0, 0, 10, 10, 10]
    reasons = {e["reason"] for e in registry.ledger if e["event"] == "slash"}
    assert reasons == {"invalid_share", "missed_contribution"}


def test_no_valid_contributions(field):
    state = RegistryState(RegistryParams(), b"x")
    state.add_node(NODE, 100, NodeBehavior.INVALID_SHARE)
    with pytest.raises(NoValidContributions):
        register_circuit(state, FACTOR_SOURCE, 30, field)
    assert state.nodes[NODE].stake == 50


def test_minimum_stake():
    with pytest.raises(ValueError):
        RegistryState().add_node(NODE, 29)


def test_setup_is_reproducible(field):
    def build(entropy):
        state = RegistryState(RegistryParams(), entropy)
        state.add_node(NODE, 100)
        return register_circuit(state, FACTOR_SOURCE, 10, field).keys

    assert build(b"a") == build(b"a")
    assert build(b"a") != build(b"b")


def test_contribution_validation():
    contribution = bytes(range(32))
    assert validate_contribution(contribution, contribution_tag(contribution))
    assert not validate_contribution(contribution, bytes(32))
    assert not validate_contribution(b"short", contribution_tag(b"short"))


def test_replay_rebuilds_state(tmp_path, field):
    log = tmp_path / "registry.jsonl"
    state = RegistryState(RegistryParams(), b"seed", log)
    state.add_node(NODE, 100)
    state.add_node(bytes([2]) * 20, 100, NodeBehavior.INVALID_SHARE)
    record = register_circuit(state, FACTOR_SOURCE, 30, field)

    replayed = RegistryState.replay(log, RegistryParams(), b"seed")
    assert replayed.records == state.records
    assert replayed.balances == state.balances
    assert replayed.nodes == state.nodes
    assert replayed.lookup(record.circuit_id).keys == record.keys
    assert len(log.read_text().splitlines()) == len(state.ledger)


def test_slash_fraction_bounds():
    with pytest.raises(ValueError):
        RegistryParams(slash_fraction=2)
