"""Circuit registry subnetwork.

Staked nodes store content-addressed circuit records and run a simulated
SMPC trusted setup for each registration.  Every state change is appended
to a JSON-lines event log (``node_join``, ``register``, ``slash``,
``fee_credit``) from which `RegistryState.replay` rebuilds the state.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path

from pouw.circuit import Circuit, CircuitId, circuit_id, parse_circuit
from pouw.encoding import Hash256, sha256
from pouw.errors import (
    AlreadyInactive,
    CircuitError,
    CompileFailed,
    FeeTooLow,
    IntegrityParamUnused,
    NoActiveNodes,
    NotFound,
    NoValidContributions,
    UnknownNode,
)
from pouw.field import PrimeField
from pouw.prover import MockKeys, mock_setup
from pouw.r1cs import R1CS, compile_circuit, constraint_count

INTEGRITY_PARAM = "integrity"
SHARE_TAG = b"woo-smpc"


class NodeBehavior(str, enum.Enum):
    HONEST = "honest"
    INVALID_SHARE = "invalid_share"
    UNRESPONSIVE = "unresponsive"


class SlashReason(str, enum.Enum):
    INVALID_SHARE = "invalid_share"
    MISSED_CONTRIBUTION = "missed_contribution"
    UNRESPONSIVE_QUERY = "unresponsive_query"


@dataclass
class RegistryNode:
    node_id: bytes
    stake: int
    active: bool = True
    behavior: NodeBehavior = NodeBehavior.HONEST


@dataclass(frozen=True)
class RegistryParams:
    min_stake: int = 30
    slash_fraction: Fraction = Fraction(1, 2)
    min_registration_fee: int = 10

    def __post_init__(self) -> None:
        object.__setattr__(self, "slash_fraction", Fraction(self.slash_fraction))
        if not 0 <= self.slash_fraction <= 1:
            raise ValueError("slash_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class CircuitRecord:
    circuit_id: CircuitId
    source: str
    r1cs: R1CS
    keys: MockKeys
    complexity: int
    registered_at: int
    integrity_position: int

    @cached_property
    def circuit(self) -> Circuit:
        return parse_circuit(self.source)

    def to_dict(self) -> dict:
        return {
            "circuit_id": self.circuit_id.hex,
            "source": self.source,
            "r1cs": self.r1cs.to_dict(),
            "keys": self.keys.to_dict(),
            "complexity": self.complexity,
            "registered_at": self.registered_at,
            "integrity_position": self.integrity_position,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CircuitRecord":
        return cls(
            circuit_id=CircuitId.from_hex(data["circuit_id"]),
            source=data["source"],
            r1cs=R1CS.from_dict(data["r1cs"]),
            keys=MockKeys.from_dict(data["keys"]),
            complexity=int(data["complexity"]),
            registered_at=int(data["registered_at"]),
            integrity_position=int(data["integrity_position"]),
        )


@dataclass
class RegistryState:
    params: RegistryParams = field(default_factory=RegistryParams)
    entropy: bytes = b""
    log_path: Path | None = None
    records: dict[CircuitId, CircuitRecord] = field(default_factory=dict)
    nodes: dict[bytes, RegistryNode] = field(default_factory=dict)
    balances: dict[bytes, int] = field(default_factory=dict)
    ledger: list[dict] = field(default_factory=list)

    def _log(self, event: dict) -> None:
        self.ledger.append(event)
        if self.log_path is not None:
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.log_path, "a") as f:
                f.write(json.dumps(event, sort_keys=True) + "\n")

    def add_node(
        self,
        node_id: bytes,
        stake: int,
        behavior: NodeBehavior | str = NodeBehavior.HONEST,
    ) -> RegistryNode:
        if stake < self.params.min_stake:
            raise ValueError(f"stake {stake} is below the minimum {self.params.min_stake}")
        node = RegistryNode(node_id, stake, True, NodeBehavior(behavior))
        self.nodes[node_id] = node
        self.balances.setdefault(node_id, 0)
        self._log({
            "event": "node_join", "node_id": node_id.hex(), "stake": stake,
            "behavior": node.behavior.value,
        })
        return node

    def active_nodes(self) -> list[RegistryNode]:
        return [self.nodes[k] for k in sorted(self.nodes) if self.nodes[k].active]

    def lookup(self, cid: CircuitId) -> CircuitRecord:
        return get_circuit(self, cid)

    @classmethod
    def replay(
        cls,
        path: Path,
        params: RegistryParams | None = None,
        entropy: bytes = b"",
    ) -> "RegistryState":
        """Rebuild a state from its event log (the log is not re-appended)."""
        state = cls(params or RegistryParams(), entropy)
        with open(path) as f:
            for line in f:
                if line.strip():
                    state._apply(json.loads(line))
        state.log_path = Path(path)
        return state

    def _apply(self, event: dict) -> None:
        kind = event["event"]
        if kind == "node_join":
            node_id = bytes.fromhex(event["node_id"])
            self.nodes[node_id] = RegistryNode(
                node_id, int(event["stake"]), True, NodeBehavior(event["behavior"])
            )
            self.balances.setdefault(node_id, 0)
        elif kind == "register":
            record = CircuitRecord.from_dict(event["record"])
            self.records[record.circuit_id] = record
        elif kind == "slash":
            node = self.nodes[bytes.fromhex(event["node_id"])]
            node.stake = int(event["stake_after"])
            node.active = bool(event["active"])
        elif kind == "fee_credit":
            node_id = bytes.fromhex(event["node_id"])
            self.balances[node_id] = self.balances.get(node_id, 0) + int(event["amount"])
        else:
            raise ValueError(f"unknown registry event {kind!r}")
        self.ledger.append(event)


# -- contributions --------------------------------------------------------------

def contribution_tag(contribution: bytes) -> Hash256:
    return sha256(SHARE_TAG, contribution)


def validate_contribution(contribution: bytes, proof_of_validity: Hash256) -> bool:
    return len(contribution) == 32 and contribution_tag(contribution) == proof_of_validity


def _node_share(
    state: RegistryState, node: RegistryNode, cid: CircuitId
) -> tuple[bytes, Hash256] | None:
    if node.behavior is NodeBehavior.UNRESPONSIVE:
        return None
    contribution = sha256(b"contribution", state.entropy, node.node_id, cid.digest)
    tag = contribution_tag(contribution)
    if node.behavior is NodeBehavior.INVALID_SHARE:
        tag = tag[:-1] + bytes([tag[-1] ^ 1])
    return contribution, tag


def integrity_position(circuit: Circuit) -> int:
    names = [p.name for p in circuit.public_params]
    if INTEGRITY_PARAM not in names:
        raise IntegrityParamUnused(f"circuit has no public {INTEGRITY_PARAM!r} parameter")
    return names.index(INTEGRITY_PARAM)


def _integrity_used(r1cs: R1CS, position: int) -> bool:
    var = 1 + position
    return any(idx == var for c in r1cs.constraints for row in c for idx, _ in row)


# -- operations -----------------------------------------------------------------

def register_circuit(
    state: RegistryState,
    source: str,
    fee: int,
    field: PrimeField,
    *,
    height: int = 0,
) -> CircuitRecord:
    cid = circuit_id(source)
    if cid in state.records:
        return state.records[cid]
    if fee < state.params.min_registration_fee:
        raise FeeTooLow(f"fee {fee} is below the minimum {state.params.min_registration_fee}")
    nodes = state.active_nodes()
    if not nodes:
        raise NoActiveNodes("no active registry nodes")
    try:
        circuit = parse_circuit(source)
        r1cs = compile_circuit(circuit, field)
    except CircuitError as exc:
        raise CompileFailed(str(exc)) from exc
    position = integrity_position(circuit)
    if not _integrity_used(r1cs, position):
        raise IntegrityParamUnused(f"{INTEGRITY_PARAM!r} appears in no constraint")

    contributors: list[RegistryNode] = []
    contributions: list[bytes] = []
    for node in nodes:
        share = _node_share(state, node, cid)
        if share is None:
            slash(state, node.node_id, SlashReason.MISSED_CONTRIBUTION)
        elif not validate_contribution(*share):
            slash(state, node.node_id, SlashReason.INVALID_SHARE)
        else:
            contributors.append(node)
            contributions.append(share[0])
    if not contributors:
        raise NoValidContributions("every registry node failed to contribute")

    keys = mock_setup(r1cs, contributions, circuit_id=cid)
    record = CircuitRecord(cid, source, r1cs, keys, constraint_count(r1cs), height, position)
    state.records[cid] = record
    state._log({"event": "register", "fee": fee, "record": record.to_dict()})

    share, remainder = divmod(fee, len(contributors))
    for i, node in enumerate(contributors):
        amount = share + (remainder if i == 0 else 0)
        state.balances[node.node_id] = state.balances.get(node.node_id, 0) + amount
        state._log({
            "event": "fee_credit", "node_id": node.node_id.hex(), "amount": amount,
            "circuit_id": cid.hex,
        })
    return record


def get_circuit(state: RegistryState, cid: CircuitId) -> CircuitRecord:
    try:
        return state.records[cid]
    except KeyError:
        raise NotFound(f"no circuit registered under {cid.hex}") from None


def slash(state: RegistryState, node_id: bytes, reason: SlashReason | str) -> RegistryState:
    node = state.nodes.get(node_id)
    if node is None:
        raise UnknownNode(f"unknown registry node {node_id.hex()}")
    if not node.active:
        raise AlreadyInactive(f"node {node_id.hex()} is already inactive")
    reason = SlashReason(reason)
    node.stake -= int(node.stake * state.params.slash_fraction)
    if node.stake < state.params.min_stake:
        node.active = False
    state._log({
        "event": "slash", "node_id": node_id.hex(), "reason": reason.value,
        "stake_after": node.stake, "active": node.active,
    })
    return state
