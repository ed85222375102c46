"""
Run configuration of the forkpool command line.

A run is described by one JSON document with the sections ``network``,
``market``, ``population``, ``sim`` and ``sweep``. Unknown sections and keys
are rejected so that typos fail loudly. RunConfig.to_dict() returns the
resolved document with every default filled in; loading that document again
reproduces the same run.
"""

import json
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from forkpool_evolution.dynamics import hash_fraction
from forkpool_evolution.market import PoolMarket, PopulationState
from forkpool_metrics.sweep import SweepSpec
from forkpool_model.errors import ConfigError
from forkpool_model.fork_model import MODES
from forkpool_model.params import BlockSizeModel, HashDistribution, NetworkParams
from forkpool_sim.config import SimConfig

SECTION_KEYS = {
    "network": ("lambda", "tau", "block_size", "reward", "theta"),
    "market": ("omega", "miners", "unit_cost"),
    "population": ("r0", "hash_shares", "step", "t_max", "eps_converge", "mode", "sample_every"),
    "sim": ("horizon_blocks", "seed", "tie_mode", "split_mode"),
    "sweep": ("tau", "theta", "method", "workers"),
}

EVOLVE_DEFAULTS: Dict[str, Any] = {
    "step": 0.01,
    "t_max": 1e4,
    "eps_converge": 1e-9,
    "mode": "exact",
    "sample_every": 100,
}
SIM_DEFAULTS: Dict[str, Any] = {
    "horizon_blocks": 100000,
    "seed": 0,
    "tie_mode": "coin_flip",
    "split_mode": "deterministic_half",
}
SWEEP_DEFAULTS: Dict[str, Any] = {"method": "analytic", "workers": 1}

Grid = Union[str, Sequence[float]]


def parse_grid(value: Grid, name: str = "grid") -> List[float]:
    """
    Expand a grid given as a list of numbers or as "a:b:n".

    "a:b:n" stands for n evenly spaced points from a to b, both ends included.

    Raises:
        ConfigError: On malformed text or an empty list
    """
    if isinstance(value, str):
        parts = value.split(":")
        if len(parts) != 3:
            raise ConfigError(f"{name} must look like 'a:b:n', got {value!r}")
        try:
            start, stop = float(parts[0]), float(parts[1])
            count = int(parts[2])
        except ValueError:
            raise ConfigError(f"{name} must look like 'a:b:n', got {value!r}") from None
        if count < 1:
            raise ConfigError(f"{name} needs at least one point, got n={count}")
        return [float(v) for v in np.linspace(start, stop, count)]

    try:
        points = [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a list of numbers or 'a:b:n', got {value!r}") from None
    if not points:
        raise ConfigError(f"{name} must not be empty")
    return points


def _check_keys(data: Mapping[str, Any]) -> None:
    if not isinstance(data, Mapping):
        raise ConfigError("Config must be a JSON object")
    for section, body in data.items():
        if section not in SECTION_KEYS:
            raise ConfigError(f"Unknown config section {section!r}; expected one of {tuple(SECTION_KEYS)}")
        if not isinstance(body, Mapping):
            raise ConfigError(f"Config section {section!r} must be an object")
        for key in body:
            if key not in SECTION_KEYS[section]:
                raise ConfigError(
                    f"Unknown key {section}.{key}; expected one of {SECTION_KEYS[section]}"
                )


def _network(body: Mapping[str, Any]) -> NetworkParams:
    if "lambda" not in body:
        raise ConfigError("network.lambda is required")
    block_size = body.get("block_size")
    if block_size is not None:
        missing = [k for k in ("size", "gamma", "bandwidth") if k not in block_size]
        if missing:
            raise ConfigError(f"network.block_size is missing {missing}")
    return NetworkParams(
        lam=body["lambda"],
        tau=body.get("tau"),
        reward=body.get("reward", 1.0),
        theta=body.get("theta", 0.0),
        block_size=BlockSizeModel.from_dict(block_size) if block_size is not None else None,
    )


class RunConfig:
    """
    Validated contents of a config document.

    Attributes:
        network (NetworkParams): Network parameters
        market (Optional[PoolMarket]): Pools and miners, needed by the
            evolutionary commands
        r0 (Optional[PopulationState]): Initial population; uniform when a
            market is given without one
        hash_shares (Optional[HashDistribution]): Explicit hash fractions
        evolve (Dict[str, Any]): Integrator options and probability mode
        sim (Dict[str, Any]): Simulator options
        sweep (Dict[str, Any]): Sweep grids, method and worker count
    """

    def __init__(
        self,
        network: NetworkParams,
        market: Optional[PoolMarket] = None,
        r0: Optional[PopulationState] = None,
        hash_shares: Optional[HashDistribution] = None,
        evolve: Optional[Mapping[str, Any]] = None,
        sim: Optional[Mapping[str, Any]] = None,
        sweep: Optional[Mapping[str, Any]] = None,
    ):
        if r0 is not None and market is None:
            raise ConfigError("population.r0 needs a market section")
        if market is not None:
            if r0 is None:
                r0 = PopulationState.uniform(market.size)
            elif r0.size != market.size:
                raise ConfigError(f"population.r0 has {r0.size} entries for {market.size} pools")
            if hash_shares is not None and hash_shares.size != market.size:
                raise ConfigError(
                    f"population.hash_shares has {hash_shares.size} entries for {market.size} pools"
                )

        self.network = network
        self.market = market
        self.r0 = r0
        self.hash_shares = hash_shares
        self.evolve = dict(EVOLVE_DEFAULTS)
        self.evolve.update(evolve or {})
        self.sim = dict(SIM_DEFAULTS)
        self.sim.update(sim or {})
        self.sweep = dict(SWEEP_DEFAULTS)
        self.sweep.update(sweep or {})
        for axis in ("tau", "theta"):
            if self.sweep.get(axis) is not None:
                self.sweep[axis] = parse_grid(self.sweep[axis], f"sweep.{axis}")
        if self.evolve["mode"] not in MODES:
            raise ConfigError(f"population.mode must be one of {MODES}, got {self.evolve['mode']!r}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        """
        Build a config from a parsed JSON document.

        Raises:
            ConfigError: On unknown keys, missing sections or size mismatches
            DomainError: When a value violates a model precondition
        """
        _check_keys(data)
        if "network" not in data:
            raise ConfigError("Config needs a network section")
        population = dict(data.get("population", {}))
        market_body = data.get("market")

        market = None
        if market_body is not None:
            if "omega" not in market_body or "miners" not in market_body:
                raise ConfigError("market needs omega and miners")
            market = PoolMarket.from_dict(market_body)

        r0 = population.pop("r0", None)
        shares = population.pop("hash_shares", None)
        return cls(
            network=_network(data["network"]),
            market=market,
            r0=PopulationState(r0) if r0 is not None else None,
            hash_shares=HashDistribution(shares) if shares is not None else None,
            evolve=population,
            sim=data.get("sim"),
            sweep=data.get("sweep"),
        )

    def updated(self, overrides: Mapping[str, Mapping[str, Any]]) -> "RunConfig":
        """Return a copy with per-section overrides; None values are ignored."""
        data = self.to_dict()
        for section, values in overrides.items():
            body = data.setdefault(section, {})
            body.update({k: v for k, v in values.items() if v is not None})
        return RunConfig.from_dict(data)

    def require_market(self) -> PoolMarket:
        if self.market is None:
            raise ConfigError("This command needs a market section")
        return self.market

    def distribution(self) -> HashDistribution:
        """
        Hash fractions of the pools.

        Explicit population.hash_shares win; otherwise they follow from the
        market and the initial population.
        """
        if self.hash_shares is not None:
            return self.hash_shares
        if self.market is None or self.r0 is None:
            raise ConfigError("Config needs population.hash_shares or a market section")
        return hash_fraction(self.r0, self.market)

    def ode_options(self) -> Dict[str, Any]:
        """Keyword arguments for integrate(), without the mode."""
        return {k: v for k, v in self.evolve.items() if k != "mode"}

    def sim_config(self) -> SimConfig:
        return SimConfig(
            params=self.network,
            x=self.distribution(),
            horizon_blocks=self.sim["horizon_blocks"],
            seed=self.sim["seed"],
            tie_mode=self.sim["tie_mode"],
            split_mode=self.sim["split_mode"],
        )

    def sweep_spec(self) -> SweepSpec:
        for axis in ("tau", "theta"):
            if self.sweep.get(axis) is None:
                raise ConfigError(f"Sweep needs a {axis} grid (sweep.{axis} or --{axis})")
        options = self.ode_options()
        options.pop("sample_every", None)
        return SweepSpec(
            market=self.require_market(),
            params=self.network,
            tau_grid=self.sweep["tau"],
            theta_grid=self.sweep["theta"],
            method=self.sweep["method"],
            r0=self.r0,
            mode=self.evolve["mode"],
            ode_options=options,
            workers=self.sweep["workers"],
        )

    def to_dict(self) -> Dict[str, Any]:
        """Resolved document, defaults included."""
        population: Dict[str, Any] = {}
        if self.r0 is not None:
            population["r0"] = self.r0.to_list()
        if self.hash_shares is not None:
            population["hash_shares"] = self.hash_shares.to_list()
        population.update(self.evolve)

        data: Dict[str, Any] = {"network": self.network.to_dict()}
        if self.market is not None:
            data["market"] = self.market.to_dict()
        data["population"] = population
        data["sim"] = dict(self.sim)
        data["sweep"] = {k: v for k, v in self.sweep.items() if v is not None}
        return data

    def __repr__(self) -> str:
        pools = self.market.size if self.market is not None else None
        return f"RunConfig(network={self.network!r}, pools={pools})"


def load_config(path: str) -> RunConfig:
    """
    Read a config document from disk.

    Raises:
        OSError: If the file cannot be read
        ConfigError: If it is not valid JSON or fails validation
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    try:
        return RunConfig.from_dict(data)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: malformed config ({exc})") from None

