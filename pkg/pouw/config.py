"""Configuration management for pouw.

Reads settings from (in order of priority):
  1. CLI flags
  2. Environment variables (POUW_SEED, POUW_OUT, POUW_CONFIG)
  3. A TOML file: --config PATH, $POUW_CONFIG, or ./pouw.toml
  4. Built-in defaults

Sections:
  [pouw]          modulus, out_dir, seed, workers
  [sim]           kappa0, psi, k_bits, proof_time_a, proof_time_b, block_reward,
                  proof_fee_rate, retarget_window, target_block_time, max_blocks,
                  max_time, real_work, record_trace, mempool, c_min, c_max,
                  tx_rate, initial_pending, target_per_bucket
  [[sim.miners]]  miner_id, power, preference, fixed_size, bucket_strategy,
                  fixed_bucket
  [[sim.power_changes]]  time, miner_id, power
  [registry]      min_stake, slash_fraction, min_registration_fee, fee_rate,
                  nodes, node_stake

Unknown sections or keys are rejected with ConfigError.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from pouw.errors import ConfigError
from pouw.field import DEFAULT_MODULUS, PrimeField
from pouw.registry import RegistryParams
from pouw.simulator import MempoolModel, MinerSpec, PowerChange, SimConfig

CONFIG_FILE = Path("pouw.toml")
DEFAULT_OUT = Path("out")


def _k_bits(value: Any) -> int | str:
    if value == "auto":
        return "auto"
    return _int(value)


def _int(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"expected an integer, got {value!r}")
    return value


def _float(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"expected a number, got {value!r}")
    return float(value)


def _bool(value: Any) -> bool:
    if not isinstance(value, bool):
        raise TypeError(f"expected true or false, got {value!r}")
    return value


def _str(value: Any) -> str:
    if not isinstance(value, str):
        raise TypeError(f"expected a string, got {value!r}")
    return value


def _optional(convert: Callable[[Any], Any]) -> Callable[[Any], Any]:
    return lambda value: None if value in ("", "none") else convert(value)


_POUW_KEYS: dict[str, Callable[[Any], Any]] = {
    "modulus": _int,
    "out_dir": lambda v: Path(_str(v)).expanduser(),
    "seed": _int,
    "workers": _int,
}

_SIM_KEYS: dict[str, Callable[[Any], Any]] = {
    "kappa0": _int,
    "psi": _float,
    "k_bits": _k_bits,
    "proof_time_a": _float,
    "proof_time_b": _float,
    "block_reward": _int,
    "proof_fee_rate": _int,
    "retarget_window": _int,
    "target_block_time": _optional(_float),
    "max_blocks": _optional(_int),
    "max_time": _optional(_float),
    "real_work": _bool,
    "record_trace": _bool,
    "mempool": _str,
    "c_min": _int,
    "c_max": _int,
    "tx_rate": _float,
    "initial_pending": _int,
    "target_per_bucket": _int,
}

_MINER_KEYS: dict[str, Callable[[Any], Any]] = {
    "miner_id": _int,
    "power": _float,
    "preference": _str,
    "fixed_size": _int,
    "bucket_strategy": _str,
    "fixed_bucket": _int,
}

_POWER_CHANGE_KEYS: dict[str, Callable[[Any], Any]] = {
    "time": _float,
    "miner_id": _int,
    "power": _float,
}

_REGISTRY_KEYS: dict[str, Callable[[Any], Any]] = {
    "min_stake": _int,
    "slash_fraction": lambda v: Fraction(_str(v)) if isinstance(v, str) else Fraction(_float(v)),
    "min_registration_fee": _int,
    "fee_rate": _int,
    "nodes": _int,
    "node_stake": _int,
}


def _section(data: dict, where: str, schema: dict[str, Callable[[Any], Any]]) -> dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigError(f"[{where}] must be a table")
    out = {}
    for key, value in data.items():
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in [{where}]")
        try:
            out[key] = schema[key](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{where}] {key}: {exc}") from None
    return out


@dataclass
class AppConfig:
    modulus: int = DEFAULT_MODULUS
    out_dir: Path = DEFAULT_OUT
    seed: int | None = None
    workers: int = 1

    # Simulation
    kappa0: int = 10_000
    psi: float = 0.0
    k_bits: int | str = 0
    proof_time_a: float = 1.0
    proof_time_b: float = 0.0
    block_reward: int = 100
    proof_fee_rate: int = 1
    retarget_window: int = 0
    target_block_time: float | None = None
    max_blocks: int | None = 1000
    max_time: float | None = None
    real_work: bool = False
    record_trace: bool = False
    mempool: str = "infinite"
    c_min: int = 100
    c_max: int = 100
    tx_rate: float = 0.0
    initial_pending: int = 0
    target_per_bucket: int = 4
    miners: list[MinerSpec] = field(default_factory=lambda: [MinerSpec(0), MinerSpec(1)])
    power_changes: list[PowerChange] = field(default_factory=list)

    # Registry
    min_stake: int = 30
    slash_fraction: Fraction = Fraction(1, 2)
    min_registration_fee: int = 10
    fee_rate: int = 1
    nodes: int = 3
    node_stake: int = 100

    source: Path | None = None

    @classmethod
    def load(cls, path: Path | str | None = None) -> "AppConfig":
        """Load config from file and environment, applying overrides."""
        cfg = cls()
        if path is None:
            if v := os.environ.get("POUW_CONFIG"):
                path = v
            elif CONFIG_FILE.exists():
                path = CONFIG_FILE
        if path is not None:
            cfg._load_toml(Path(path))
        cfg._apply_env_overrides()
        cfg.validate()
        return cfg

    def _load_toml(self, path: Path) -> None:
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib  # type: ignore[no-redef]

        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None

        for name in data:
            if name not in ("pouw", "sim", "registry"):
                raise ConfigError(f"unknown section [{name}] in {path}")

        values = _section(data.get("pouw", {}), "pouw", _POUW_KEYS)
        sim = dict(data.get("sim", {}))
        miners = sim.pop("miners", None)
        changes = sim.pop("power_changes", None)
        values.update(_section(sim, "sim", _SIM_KEYS))
        values.update(_section(data.get("registry", {}), "registry", _REGISTRY_KEYS))
        for key, value in values.items():
            setattr(self, key, value)

        if miners is not None:
            self.miners = [
                self._build(MinerSpec, _section(m, "sim.miners", _MINER_KEYS), i)
                for i, m in enumerate(miners)
            ]
        if changes is not None:
            self.power_changes = [
                self._build(PowerChange, _section(c, "sim.power_changes", _POWER_CHANGE_KEYS))
                for c in changes
            ]
        self.source = path

    @staticmethod
    def _build(kind, values: dict[str, Any], default_id: int | None = None):
        if default_id is not None:
            values.setdefault("miner_id", default_id)
        try:
            return kind(**values)
        except TypeError as exc:
            raise ConfigError(f"{kind.__name__}: {exc}") from None

    def _apply_env_overrides(self) -> None:
        if self.seed is None and (v := os.environ.get("POUW_SEED")):
            try:
                self.seed = int(v)
            except ValueError:
                raise ConfigError(f"POUW_SEED must be an integer, got {v!r}") from None
        if v := os.environ.get("POUW_OUT"):
            self.out_dir = Path(v).expanduser()

    def validate(self) -> None:
        self.prime_field()
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.nodes < 0 or self.fee_rate < 0:
            raise ConfigError("registry nodes and fee_rate must be non-negative")
        self.registry_params()

    def prime_field(self) -> PrimeField:
        """The configured field; small or composite moduli are rejected."""
        try:
            return PrimeField.production(self.modulus)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def effective_seed(self) -> int:
        return self.seed if self.seed is not None else 0

    def mempool_model(self) -> MempoolModel:
        return MempoolModel(
            kind=self.mempool,
            c_min=self.c_min,
            c_max=self.c_max,
            rate=self.tx_rate,
            initial_pending=self.initial_pending,
            target_per_bucket=self.target_per_bucket,
        )

    def sim_config(self) -> SimConfig:
        return SimConfig(
            miners=tuple(self.miners),
            kappa0=self.kappa0,
            psi=self.psi,
            k_bits=self.k_bits,
            proof_time_a=self.proof_time_a,
            proof_time_b=self.proof_time_b,
            block_reward=self.block_reward,
            proof_fee_rate=self.proof_fee_rate,
            retarget_window=self.retarget_window,
            target_block_time=self.target_block_time,
            mempool=self.mempool_model(),
            max_blocks=self.max_blocks,
            max_time=self.max_time,
            seed=self.effective_seed,
            power_changes=tuple(self.power_changes),
            real_work=self.real_work,
            record_trace=self.record_trace,
        )

    def registry_params(self) -> RegistryParams:
        try:
            return RegistryParams(
                min_stake=self.min_stake,
                slash_fraction=self.slash_fraction,
                min_registration_fee=self.min_registration_fee,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def write_default(self, path: Path = CONFIG_FILE) -> bool:
        """Write a default config file if one doesn't exist."""
        path = Path(path)
        if path.exists():
            return False
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            "# pouw configuration; CLI flags override these values.\n"
            "[pouw]\n"
            f"modulus = {self.modulus}\n"
            f'out_dir = "{self.out_dir}"\n'
            "# seed = 1\n"
            f"workers = {self.workers}\n"
            "\n"
            "[sim]\n"
            f"kappa0 = {self.kappa0}\n"
            f"psi = {self.psi}\n"
            "# integer prefix length, or \"auto\" with the poisson mempool\n"
            f"k_bits = {self.k_bits}\n"
            f"proof_time_a = {self.proof_time_a}\n"
            f"proof_time_b = {self.proof_time_b}\n"
            f"block_reward = {self.block_reward}\n"
            f"proof_fee_rate = {self.proof_fee_rate}\n"
            "# blocks per retarget window; 0 keeps kappa fixed\n"
            f"retarget_window = {self.retarget_window}\n"
            f"max_blocks = {self.max_blocks}\n"
            '# "infinite" or "poisson"\n'
            f'mempool = "{self.mempool}"\n'
            f"c_min = {self.c_min}\n"
            f"c_max = {self.c_max}\n"
            f"tx_rate = {self.tx_rate}\n"
            f"initial_pending = {self.initial_pending}\n"
            f"target_per_bucket = {self.target_per_bucket}\n"
            "\n"
            "[[sim.miners]]\n"
            "miner_id = 0\n"
            "power = 1.0\n"
            '# uniform_random | prefer_small | prefer_large | fixed\n'
            'preference = "uniform_random"\n'
            '# random | least_loaded | fixed\n'
            'bucket_strategy = "random"\n'
            "\n"
            "[[sim.miners]]\n"
            "miner_id = 1\n"
            "power = 1.0\n"
            "\n"
            "[registry]\n"
            f"min_stake = {self.min_stake}\n"
            f'slash_fraction = "{self.slash_fraction}"\n'
            f"min_registration_fee = {self.min_registration_fee}\n"
            f"fee_rate = {self.fee_rate}\n"
            f"nodes = {self.nodes}\n"
            f"node_stake = {self.node_stake}\n"
        )
        return True
