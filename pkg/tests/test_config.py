from fractions import Fraction
from pathlib import Path

import pytest

from pouw.config import CONFIG_FILE, DEFAULT_OUT, AppConfig
from pouw.errors import ConfigError
from pouw.field import DEFAULT_MODULUS


def _write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def test_defaults():
    cfg = AppConfig.load()
    assert cfg.modulus == DEFAULT_MODULUS
    assert cfg.out_dir == DEFAULT_OUT
    assert cfg.seed is None
    assert cfg.effective_seed == 0
    assert cfg.source is None
    sim = cfg.sim_config()
    assert len(sim.miners) == 2
    assert sim.kappa0 == 10_000


def test_configured_field(tmp_path):
    assert AppConfig.load().prime_field().modulus == DEFAULT_MODULUS
    path = _write(tmp_path / "field.toml", "[pouw]\nmodulus = 65537\n")
    assert AppConfig.load(path).prime_field().modulus == 65537


def test_load_file(tmp_path):
    path = _write(tmp_path / "custom.toml", """
[pouw]
seed = 9
workers = 4

[sim]
kappa0 = 5000
psi = 0.25
k_bits = "auto"
mempool = "poisson"
tx_rate = 0.5
initial_pending = 32
max_blocks = 50

[[sim.miners]]
power = 2.0
preference = "prefer_large"

[[sim.miners]]
power = 1.0
bucket_strategy = "least_loaded"

[[sim.power_changes]]
time = 100.0
miner_id = 1
power = 3.0

[registry]
slash_fraction = "1/3"
nodes = 5
""")
    cfg = AppConfig.load(path)
    assert cfg.source == path
    assert cfg.seed == 9 and cfg.workers == 4
    sim = cfg.sim_config()
    assert sim.seed == 9
    assert sim.k_bits == "auto"
    assert sim.mempool.kind == "poisson"
    assert sim.mempool.initial_pending == 32
    assert [m.miner_id for m in sim.miners] == [0, 1]
    assert sim.miners[0].preference == "prefer_large"
    assert sim.miners[1].bucket_strategy == "least_loaded"
    assert sim.power_changes[0].power == 3.0
    assert cfg.registry_params().slash_fraction == Fraction(1, 3)
    assert cfg.nodes == 5


def test_default_file_is_found_in_cwd(tmp_path):
    _write(tmp_path / CONFIG_FILE, "[sim]\nkappa0 = 123\n")
    assert AppConfig.load().kappa0 == 123


def test_config_env_var(tmp_path, monkeypatch):
    path = _write(tmp_path / "env.toml", "[sim]\npsi = 0.5\n")
    monkeypatch.setenv("POUW_CONFIG", str(path))
    assert AppConfig.load().psi == 0.5


def test_env_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("POUW_SEED", "17")
    monkeypatch.setenv("POUW_OUT", str(tmp_path / "results"))
    cfg = AppConfig.load()
    assert cfg.seed == 17
    assert cfg.out_dir == tmp_path / "results"


def test_file_seed_beats_env(tmp_path, monkeypatch):
    monkeypatch.setenv("POUW_SEED", "17")
    path = _write(tmp_path / "seeded.toml", "[pouw]\nseed = 3\n")
    assert AppConfig.load(path).seed == 3


@pytest.mark.parametrize("text", [
    "[pouw]\ncolour = true\n",
    "[network]\nport = 1\n",
    "[sim]\nkappa0 = \"big\"\n",
    "[sim]\nreal_work = 1\n",
    "[[sim.miners]]\npower = 1.0\nluck = 3\n",
    "[pouw]\nmodulus = 12\n",
    "[pouw]\nmodulus = 11\n",
    "[pouw]\nmodulus = 65521\n",
    "[pouw]\nworkers = 0\n",
    "[registry]\nslash_fraction = 2.0\n",
    "not toml at all [",
])
def test_invalid_files(tmp_path, text):
    path = _write(tmp_path / "bad.toml", text)
    with pytest.raises(ConfigError):
        AppConfig.load(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        AppConfig.load(tmp_path / "absent.toml")


def test_bad_env_seed(monkeypatch):
    monkeypatch.setenv("POUW_SEED", "seven")
    with pytest.raises(ConfigError):
        AppConfig.load()


def test_invalid_miner_surfaces_as_config_error(tmp_path):
    path = _write(tmp_path / "bad.toml", "[[sim.miners]]\npower = -1.0\n")
    with pytest.raises(ConfigError):
        AppConfig.load(path)


def test_write_default_round_trips(tmp_path):
    path = tmp_path / "pouw.toml"
    assert AppConfig().write_default(path)
    assert not AppConfig().write_default(path)
    cfg = AppConfig.load(path)
    assert cfg.sim_config() == AppConfig().sim_config()
    assert cfg.registry_params() == AppConfig().registry_params()
