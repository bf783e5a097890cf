"""Command-line interface for pouw."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Sequence

from pouw import __version__
from pouw.chain import ProofTransaction
from pouw.circuit import Circuit, CircuitId, circuit_id, parse_circuit
from pouw.config import CONFIG_FILE, AppConfig
from pouw.encoding import sha256, u32, u64
from pouw.errors import ArityMismatch, ConfigError, Mismatch, PouwError
from pouw.experiments import (
    EXPERIMENTS,
    experiment_h1,
    experiment_h2,
    experiment_h3,
    experiment_h4,
    experiment_overlap,
)
from pouw.field import PrimeField
from pouw.logger import BOLD, GREEN, RED, RESET, error, info, log_command, print_history
from pouw.prover import MockKeys, MockProof, mock_prove, mock_setup, mock_verify
from pouw.r1cs import check_satisfaction, compile_circuit, constraint_count, generate_witness
from pouw.registry import (
    CircuitRecord,
    RegistryState,
    get_circuit,
    integrity_position,
    register_circuit,
)
from pouw.report import Table, metrics_table, update_summary, write_csv, write_table
from pouw.simulator import run_sim
from pouw.woo import (
    DEFAULT_ETA,
    MaskVector,
    client_request,
    decode_outputs,
    sample_masks,
    transform_circuit,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

REGISTRY_LOG = "registry.jsonl"


class Outcome:
    """Exit status plus a one-line summary for the history log."""

    def __init__(self, status: int = EXIT_OK, summary: str = "") -> None:
        self.status = status
        self.summary = summary


# -- parser ---------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", metavar="PATH", help=f"TOML config (default: ./{CONFIG_FILE})"
    )
    common.add_argument("--out", metavar="DIR", help="Output directory (default: ./out)")
    common.add_argument("--seed", type=int, metavar="N", help="Seed (falls back to $POUW_SEED)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="pouw",
        description="Proof-of-useful-work protocol kit and simulator",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    circuit = commands.add_parser("circuit", help="Compile and check DSL circuits")
    circuit_cmds = circuit.add_subparsers(dest="action", metavar="ACTION")
    circuit_cmds.required = True
    compile_p = circuit_cmds.add_parser("compile", parents=[common], help="Write R1CS JSON")
    compile_p.add_argument("file", type=Path)
    compile_p.add_argument(
        "-o", "--output", type=Path, help="R1CS path (default: <out>/<name>.r1cs.json)"
    )
    check_p = circuit_cmds.add_parser("check", parents=[common], help="Check an input assignment")
    check_p.add_argument("file", type=Path)
    check_p.add_argument("--public", default="", metavar="K=V,...", help="Public inputs or JSON")
    check_p.add_argument("--private", default="", metavar="K=V,...", help="Private inputs or JSON")

    woo = commands.add_parser("woo", help="Witness-obfuscating outsourcing workflow")
    woo_cmds = woo.add_subparsers(dest="action", metavar="ACTION")
    woo_cmds.required = True
    mask = woo_cmds.add_parser(
        "mask", parents=[common], help="Client: sample masks and publish the masked request"
    )
    mask.add_argument("file", type=Path, help="Base circuit")
    mask.add_argument("--public", default="", metavar="K=V,...")
    mask.add_argument("--private", default="", metavar="K=V,...")
    transform = woo_cmds.add_parser(
        "transform", parents=[common], help="Client: rewrite the circuit around the masks"
    )
    transform.add_argument("file", type=Path, help="Base circuit")
    transform.add_argument("--masks", type=Path, help="Masks JSON (default: <out>/masks.json)")
    prove = woo_cmds.add_parser("prove", parents=[common], help="Worker: prove a masked request")
    prove.add_argument("--transformed", type=Path, help="default: <out>/transformed.zk")
    prove.add_argument("--keys", type=Path, help="default: <out>/keys.json")
    prove.add_argument("--request", type=Path, help="default: <out>/request.json")
    prove.add_argument("--eta", type=int, default=DEFAULT_ETA, help="Integrity value")
    verify = woo_cmds.add_parser("verify", parents=[common], help="Verify a worker's proof")
    verify.add_argument("--transformed", type=Path, help="default: <out>/transformed.zk")
    verify.add_argument("--keys", type=Path, help="default: <out>/keys.json")
    verify.add_argument("--proof", type=Path, help="default: <out>/proof.json")
    verify.add_argument("--eta", type=int, help="Expected integrity value")
    verify.add_argument("--masks", type=Path, help="Also print the unmasked outputs")
    verify.add_argument("--circuit", type=Path, help="Base circuit (needed with --masks)")

    registry = commands.add_parser("registry", help="Circuit registry")
    registry_cmds = registry.add_subparsers(dest="action", metavar="ACTION")
    registry_cmds.required = True
    register = registry_cmds.add_parser("register", parents=[common], help="Register a circuit")
    register.add_argument("file", type=Path)
    register.add_argument("--fee", type=int, help="Registration fee (default: the minimum)")
    get = registry_cmds.add_parser("get", parents=[common], help="Look up a circuit by id")
    get.add_argument("circuit_id")
    tx = registry_cmds.add_parser(
        "tx", parents=[common], help="Build a proof transaction for a registered circuit"
    )
    tx.add_argument("circuit_id")
    tx.add_argument("--public", default="", metavar="K=V,...", help="Public inputs, without eta")
    tx.add_argument("--private", default="", metavar="K=V,...", help="Private inputs or JSON")
    tx.add_argument("--nonce", type=int, default=0)

    sim = commands.add_parser("sim", help="Block production simulation")
    sim_cmds = sim.add_subparsers(dest="action", metavar="ACTION")
    sim_cmds.required = True
    run = sim_cmds.add_parser(
        "run", parents=[common],
        help="Run one simulation; writes sim.csv (columns: miner_id, power, blocks_won, "
             "block_rewards, proof_rewards, useful_work, wasted_work, interrupted_work, "
             "proofs_completed)",
    )
    run.add_argument("--psi", type=float)
    run.add_argument("--kappa", type=int, help="Initial difficulty")
    run.add_argument("--k-bits", help="Bucket prefix length or 'auto'")
    run.add_argument("--blocks", type=int, help="Stop after N blocks")
    run.add_argument("--max-time", type=float, help="Stop at simulated time T")
    run.add_argument("--real-work", action="store_true", help="Check a real R1CS per proof")
    run.add_argument("--trace", action="store_true", help="Also write sim_trace.csv")

    experiment = commands.add_parser(
        "experiment", parents=[common],
        help="Reproduce a study: h1 (ratio, block_reward_ratio, proof_reward_ratio), "
             "h2 (pair, preference, block_reward_share), h3 (psi, wasted_fraction, gini), "
             "h4 (mempool, k_bits, buckets, wasted_fraction), "
             "overlap (m, t, analytic, montecarlo, abs_diff)",
    )
    experiment.add_argument("name", choices=EXPERIMENTS)
    experiment.add_argument("--seeds", type=int, metavar="N", help="Number of seeds per point")
    experiment.add_argument("--blocks", type=int, help="Blocks per run")
    experiment.add_argument("--workers", type=int, help="Parallel processes")
    experiment.add_argument("--tiny-mempool", action="store_true", help="h4: add Poisson rows")
    experiment.add_argument("--m", type=int, help="overlap: mempool size")
    experiment.add_argument("--t", type=int, help="overlap: block size")
    experiment.add_argument("--trials", type=int, default=1_000_000, help="overlap: trials")

    history = commands.add_parser("history", parents=[common], help="Show recent runs")
    history.add_argument("limit", nargs="?", type=int, default=20)

    init = commands.add_parser("init-config", parents=[common], help="Write a default config")
    init.add_argument("path", nargs="?", type=Path, default=CONFIG_FILE)
    return parser


# -- helpers --------------------------------------------------------------------

def _load_config(args: argparse.Namespace) -> AppConfig:
    cfg = AppConfig.load(args.config)
    if args.out:
        cfg.out_dir = Path(args.out)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _read_circuit(path: Path) -> tuple[str, Circuit]:
    source = Path(path).read_text()
    return source, parse_circuit(source)


def _read_json(path: Path) -> dict:
    with open(path) as f:
        return json.load(f)


def _write_json(path: Path, data: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def parse_assignments(text: str) -> dict[str, int]:
    """``a=1,b=2``, a JSON object, or the path of a JSON file."""
    text = text.strip()
    if not text:
        return {}
    if text.startswith("{"):
        data = json.loads(text)
    elif Path(text).is_file():
        data = _read_json(Path(text))
    else:
        data = {}
        for item in text.split(","):
            name, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"expected NAME=VALUE, got {item!r}")
            data[name.strip()] = value.strip()
    try:
        return {str(k): int(v) for k, v in data.items()}
    except (TypeError, ValueError):
        raise ConfigError(f"input values must be decimal integers: {text!r}") from None


def order_inputs(circuit: Circuit, public: dict[str, int], private: dict[str, int]):
    out = []
    for params, given, kind in (
        (circuit.public_params, public, "public"),
        (circuit.private_params, private, "private"),
    ):
        names = [p.name for p in params]
        missing = [n for n in names if n not in given]
        extra = sorted(set(given) - set(names))
        if missing or extra:
            raise ArityMismatch(f"{kind} inputs: missing {missing}, unexpected {extra}")
        out.append([given[n] for n in names])
    return out[0], out[1]


def _mask_seed(seed: int) -> bytes:
    return sha256(b"woo-mask", u64(seed))


def _load_masks(path: Path, base: Circuit, field: PrimeField, source: str) -> MaskVector:
    data = _read_json(path)
    if data.get("circuit_id") != circuit_id(source).hex:
        raise Mismatch(f"{path} was sampled for a different circuit")
    return MaskVector.from_dict(data["masks"], base, field)


# -- circuit --------------------------------------------------------------------

def cmd_circuit(args: argparse.Namespace, cfg: AppConfig) -> Outcome:
    source, circuit = _read_circuit(args.file)
    field = cfg.prime_field()
    r1cs = compile_circuit(circuit, field)
    if args.action == "compile":
        path = args.output or cfg.out_dir / f"{args.file.stem}.r1cs.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(r1cs.to_json() + "\n")
        print(f"constraints: {constraint_count(r1cs)}")
        print(f"circuit id:  {circuit_id(source)}")
        info(f"R1CS written to {path}")
        return Outcome(summary=f"{args.file.name}: {constraint_count(r1cs)} constraints")

    public, private = order_inputs(
        circuit, parse_assignments(args.public), parse_assignments(args.private)
    )
    witness = generate_witness(circuit, r1cs, public, private, check=False)
    if check_satisfaction(r1cs, witness):
        print(f"{GREEN}satisfied{RESET}")
        return Outcome(summary="satisfied")
    print(f"{RED}not satisfied{RESET}")
    return Outcome(EXIT_FAIL, "not satisfied")


# -- woo ------------------------------------------------------------------------

def cmd_woo(args: argparse.Namespace, cfg: AppConfig) -> Outcome:
    handlers: dict[str, Callable[[argparse.Namespace, AppConfig], Outcome]] = {
        "mask": _woo_mask,
        "transform": _woo_transform,
        "prove": _woo_prove,
        "verify": _woo_verify,
    }
    return handlers[args.action](args, cfg)


def _woo_mask(args: argparse.Namespace, cfg: AppConfig) -> Outcome:
    source, base = _read_circuit(args.file)
    field = cfg.prime_field()
    masks = sample_masks(base, _mask_seed(cfg.effective_seed), field)
    cid = circuit_id(source).hex
    masks_path = _write_json(cfg.out_dir / "masks.json", {
        "circuit_id": cid,
        "modulus": str(field.modulus),
        "masks": masks.to_dict(base),
    })
    info(f"masks written to {masks_path} (keep them private)")
    if not (args.public or args.private) and (base.public_params or base.private_params):
        return Outcome(summary="masks sampled")

    public, private = order_inputs(
        base, parse_assignments(args.public), parse_assignments(args.private)
    )
    transformed = transform_circuit(base, masks, field)
    request = client_request(transformed, public, private)
    request_path = _write_json(cfg.out_dir / "request.json", {
        "circuit_id": cid,
        "public_inputs": [str(v.value) for v in request.public_inputs],
        "masked_private": [str(v.value) for v in request.masked_private],
    })
    info(f"masked request written to {request_path}")
    return Outcome(summary="masks sampled, request written")


def _woo_transform(args: argparse.Namespace, cfg: AppConfig) -> Outcome:
    source, base = _read_circuit(args.file)
    field = cfg.prime_field()
    masks = _load_masks(args.masks or cfg.out_dir / "masks.json", base, field, source)
    transformed = transform_circuit(base, masks, field)
    new_source = transformed.source
    cid = circuit_id(new_source)
    keys = mock_setup(
        transformed.compiled,
        [sha256(b"woo-setup", u64(cfg.effective_seed))],
        circuit_id=cid,
    )
    out = cfg.out_dir
    (out / "transformed.zk").parent.mkdir(parents=True, exist_ok=True)
    (out / "transformed.zk").write_text(new_source)
    (out / "transformed.r1cs.json").write_text(transformed.compiled.to_json() + "\n")
    _write_json(out / "keys.json", keys.to_dict())
    base_count = constraint_count(compile_circuit(base, field))
    new_count = constraint_count(transformed.compiled)
    print(f"constraints: {base_count} -> {new_count} (+{new_count - base_count})")
    print(f"circuit id:  {cid}")
    info(f"transformed circuit, R1CS and keys written to {out}")
    return Outcome(summary=f"{cid.hex[:16]} +{new_count - base_count} constraints")


def _worker_inputs(args: argparse.Namespace, cfg: AppConfig):
    transformed_path = args.transformed or cfg.out_dir / "transformed.zk"
    source, circuit = _read_circuit(transformed_path)
    r1cs = compile_circuit(circuit, cfg.prime_field())
    keys = MockKeys.from_dict(_read_json(args.keys or cfg.out_dir / "keys.json"))
    return circuit, r1cs, keys, integrity_position(circuit)


def _woo_prove(args: argparse.Namespace, cfg: AppConfig) -> Outcome:
    circuit, r1cs, keys, position = _worker_inputs(args, cfg)
    request = _read_json(args.request or cfg.out_dir / "request.json")
    public = [int(v) for v in request["public_inputs"]]
    public.insert(position, args.eta % r1cs.field.modulus)
    private = [int(v) for v in request["masked_private"]]
    witness = generate_witness(circuit, r1cs, public, private)
    proof = mock_prove(keys.proving_key, r1cs, witness, public)
    path = _write_json(cfg.out_dir / "proof.json", {
        "circuit_id": proof.circuit_id.hex,
        "proof": proof.to_bytes().hex(),
        "public_inputs": [str(v) for v in public],
    })
    info(f"proof written to {path}")
    return Outcome(summary=f"proof {proof.digest.hex()[:16]}")


def _woo_verify(args: argparse.Namespace, cfg: AppConfig) -> Outcome:
    circuit, r1cs, keys, position = _worker_inputs(args, cfg)
    data = _read_json(args.proof or cfg.out_dir / "proof.json")
    proof = MockProof.from_bytes(bytes.fromhex(data["proof"]))
    public = [int(v) for v in data["public_inputs"]]
    if args.eta is not None:
        public[position] = args.eta % r1cs.field.modulus
    ok = mock_verify(keys.verifying_key, proof, public)
    if not ok:
        print(f"{RED}fail{RESET}")
        return Outcome(EXIT_FAIL, "fail")
    print(f"{GREEN}ok{RESET}")

    if args.masks:
        if args.circuit is None:
            raise ConfigError("--masks needs --circuit with the base circuit")
        source, base = _read_circuit(args.circuit)
        field = cfg.prime_field()
        transformed = transform_circuit(base, _load_masks(args.masks, base, field, source), field)
        if transformed.circuit != circuit:
            raise Mismatch("masks and base circuit do not match the transformed circuit")
        for name, value in decode_outputs(transformed, public).items():
            print(f"{name} = {value.value}")
    return Outcome(summary="ok")


# -- registry -------------------------------------------------------------------

def node_id(i: int) -> bytes:
    return sha256(b"registry-node", u32(i))[:20]


def open_registry(cfg: AppConfig) -> RegistryState:
    path = cfg.out_dir / REGISTRY_LOG
    params = cfg.registry_params()
    entropy = sha256(b"registry", u64(cfg.effective_seed))
    if path.exists():
        return RegistryState.replay(path, params, entropy)
    state = RegistryState(params, entropy, path)
    for i in range(cfg.nodes):
        state.add_node(node_id(i), cfg.node_stake)
    return state


def _parse_circuit_id(text: str) -> CircuitId:
    try:
        return CircuitId.from_hex(text)
    except ValueError:
        raise ConfigError(f"not a circuit id: {text!r}") from None


def _proof_transaction(args: argparse.Namespace, cfg: AppConfig, record: CircuitRecord) -> Outcome:
    """Fee is the configured `[registry] fee_rate` times the circuit's complexity."""
    public = parse_assignments(args.public)
    eta_name = record.circuit.public_params[record.integrity_position].name
    if eta_name in public:
        raise ConfigError(f"{eta_name!r} is bound when the proof is made; leave it out")
    public[eta_name] = 0
    public_values, private_values = order_inputs(
        record.circuit, public, parse_assignments(args.private)
    )
    del public_values[record.integrity_position]
    tx = ProofTransaction.create(
        record.circuit_id, record.complexity, public_values, private_values, cfg.fee_rate,
        nonce=args.nonce,
    )
    path = _write_json(cfg.out_dir / "tx.json", {
        "txid": tx.txid.hex(),
        "circuit_id": tx.circuit_id.hex,
        "public_inputs": [str(v) for v in tx.public_inputs],
        "private_inputs": [str(v) for v in tx.private_inputs],
        "fee": tx.fee,
        "complexity": tx.complexity,
        "nonce": tx.nonce,
    })
    print(f"txid: {tx.txid.hex()}")
    print(f"fee:  {tx.fee}")
    info(f"transaction written to {path}")
    return Outcome(summary=f"tx {tx.txid.hex()[:16]} fee={tx.fee}")


def cmd_registry(args: argparse.Namespace, cfg: AppConfig) -> Outcome:
    state = open_registry(cfg)
    if args.action == "register":
        source = Path(args.file).read_text()
        fee = cfg.min_registration_fee if args.fee is None else args.fee
        record = register_circuit(state, source, fee, cfg.prime_field(), height=len(state.records))
        print(f"circuit id:  {record.circuit_id}")
        print(f"complexity:  {record.complexity}")
        active = len(state.active_nodes())
        info(f"registered with {active} active node(s); log at {state.log_path}")
        return Outcome(summary=f"{record.circuit_id.hex[:16]} complexity={record.complexity}")

    record = get_circuit(state, _parse_circuit_id(args.circuit_id))
    if args.action == "tx":
        return _proof_transaction(args, cfg, record)
    print(json.dumps({
        "circuit_id": record.circuit_id.hex,
        "complexity": record.complexity,
        "registered_at": record.registered_at,
        "integrity_position": record.integrity_position,
        "r1cs_digest": record.r1cs.digest().hex(),
        "source": record.source,
    }, indent=2))
    return Outcome(summary=record.circuit_id.hex[:16])


# -- simulation -----------------------------------------------------------------

def cmd_sim(args: argparse.Namespace, cfg: AppConfig) -> Outcome:
    if args.psi is not None:
        cfg.psi = args.psi
    if args.kappa is not None:
        cfg.kappa0 = args.kappa
    if args.k_bits is not None:
        if args.k_bits != "auto" and not args.k_bits.isdigit():
            raise ConfigError(f"--k-bits must be an integer or 'auto', got {args.k_bits!r}")
        cfg.k_bits = args.k_bits if args.k_bits == "auto" else int(args.k_bits)
    if args.blocks is not None:
        cfg.max_blocks = args.blocks
    if args.max_time is not None:
        cfg.max_time = args.max_time
    cfg.real_work = cfg.real_work or args.real_work
    cfg.record_trace = cfg.record_trace or args.trace
    config = cfg.sim_config()

    metrics = run_sim(config)
    path = write_table(metrics_table(metrics), cfg.out_dir)
    if metrics.trace is not None:
        write_csv(cfg.out_dir / "sim_trace.csv", ("time", "kind", "miner_id"), metrics.trace)
    summary = {
        **metrics.summary(),
        "seed": config.seed,
        "psi": config.psi,
        "kappa0": config.kappa0,
        "k_bits": config.k_bits,
    }
    update_summary(cfg.out_dir, "sim", summary)
    line = (
        f"blocks={metrics.blocks} mean_block_time={metrics.mean_block_time:.2f} "
        f"wasted_fraction={metrics.wasted_fraction:.4f}"
    )
    print(line)
    info(f"metrics written to {path}")
    return Outcome(summary=line)


def cmd_experiment(args: argparse.Namespace, cfg: AppConfig) -> Outcome:
    workers = args.workers or cfg.workers
    sweep: dict = {"workers": workers, "on_done": _progress}
    if args.seeds:
        sweep["seeds"] = tuple(range(cfg.effective_seed + 1, cfg.effective_seed + 1 + args.seeds))
    if args.blocks:
        sweep["blocks"] = args.blocks

    if args.name == "h1":
        table = experiment_h1(**sweep)
    elif args.name == "h2":
        table = experiment_h2(**sweep)
    elif args.name == "h3":
        table = experiment_h3(**sweep)
    elif args.name == "h4":
        table = experiment_h4(tiny_mempool=args.tiny_mempool, **sweep)
    else:
        grid = None
        if args.m is not None or args.t is not None:
            if args.m is None or args.t is None:
                raise ConfigError("--m and --t go together")
            grid = [(args.m, args.t)]
        kwargs = {"trials": args.trials, "seed": cfg.effective_seed}
        table = experiment_overlap(grid, **kwargs) if grid else experiment_overlap(**kwargs)

    path = write_table(table, cfg.out_dir)
    update_summary(cfg.out_dir, table.name, _table_summary(table))
    print_table(table)
    info(f"table written to {path}")
    return Outcome(summary=f"{table.name}: {len(table.rows)} rows")


def _progress(run, metrics) -> None:
    info(f"{run.label} seed={run.seed}: {metrics.blocks} blocks")


def _table_summary(table: Table) -> dict:
    key, *values = table.columns
    out = {}
    for row in table.as_dicts():
        for column in values:
            out[f"{key}={row[key]}:{column}"] = row[column]
    return out


def print_table(table: Table) -> None:
    print(f"{BOLD}{'  '.join(table.columns)}{RESET}")
    for row in table.rows:
        print("  ".join(f"{v:.4f}" if isinstance(v, float) else str(v) for v in row))


# -- misc -----------------------------------------------------------------------

def cmd_history(args: argparse.Namespace, cfg: AppConfig) -> Outcome:
    print_history(cfg.out_dir, limit=args.limit)
    return Outcome()


def cmd_init_config(args: argparse.Namespace, cfg: AppConfig) -> Outcome:
    if AppConfig().write_default(args.path):
        print(f"[pouw] Config written to {args.path}")
        return Outcome(summary=str(args.path))
    print(f"[pouw] {args.path} already exists; left unchanged")
    return Outcome(summary="exists")


COMMANDS: dict[str, Callable[[argparse.Namespace, AppConfig], Outcome]] = {
    "circuit": cmd_circuit,
    "woo": cmd_woo,
    "registry": cmd_registry,
    "sim": cmd_sim,
    "experiment": cmd_experiment,
    "history": cmd_history,
    "init-config": cmd_init_config,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    command = " ".join(filter(None, [args.command, getattr(args, "action", None)]))

    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        error(str(exc))
        return EXIT_USAGE

    try:
        outcome = COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        error(str(exc))
        outcome = Outcome(EXIT_USAGE, str(exc))
    except OSError as exc:
        error(str(exc))
        outcome = Outcome(EXIT_USAGE, str(exc))
    except (PouwError, ValueError, KeyError) as exc:
        error(f"{type(exc).__name__}: {exc}")
        outcome = Outcome(EXIT_FAIL, f"{type(exc).__name__}: {exc}")

    if args.command != "history":
        log_command(cfg.out_dir, command, argv, cfg.seed, outcome.status, outcome.summary)
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
