"""
Parameter sweeps over the propagation delay and the uncle fraction.

Every (tau, theta) grid point is solved independently, either with the
analytic classifier or by integrating the replicator dynamics from a shared
start. A failing point is recorded in its row and never aborts the sweep.
"""

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Mapping, Optional, Sequence, TextIO, Tuple

import numpy as np

from forkpool_equilibrium.classifier import ODE_DEFAULTS, classify
from forkpool_evolution.dynamics import hash_fraction
from forkpool_evolution.integrator import integrate
from forkpool_evolution.market import PoolMarket, PopulationState
from forkpool_model.errors import DomainError
from forkpool_model.fork_model import MODES, Mode
from forkpool_model.params import NetworkParams

from .centralization import gini

logger = logging.getLogger(__name__)

METHODS = ("analytic", "ode")
METHOD_ALIASES = {"analytic_classifier": "analytic", "ode_integration": "ode"}
STATUSES = ("ok", "nss_manifold", "ode_fallback", "not_converged", "error")


def normalize_method(method: str) -> str:
    name = METHOD_ALIASES.get(method, method)
    if name not in METHODS:
        raise DomainError(f"Unknown sweep method {method!r}; expected one of {METHODS}")
    return name


class SweepSpec:
    """
    A (tau, theta) grid over a fixed market.

    Attributes:
        market (PoolMarket): Pools and miners
        params (NetworkParams): Base network; lambda and R are kept, tau and
            theta come from the grids
        tau_grid (List[float]): Delays in seconds
        theta_grid (List[float]): Uncle fractions
        method (str): "analytic" or "ode"
        r0 (PopulationState): Shared start of every integration
        mode (str): Probability mode of the payoffs
        ode_options (Dict[str, Any]): Keyword arguments for integrate()
        workers (int): Worker processes; 1 runs in-process
    """

    def __init__(
        self,
        market: PoolMarket,
        params: NetworkParams,
        tau_grid: Sequence[float],
        theta_grid: Sequence[float],
        method: str = "analytic",
        r0: Optional[PopulationState] = None,
        mode: Mode = "exact",
        ode_options: Optional[Mapping[str, Any]] = None,
        workers: int = 1,
    ):
        if len(tau_grid) == 0 or len(theta_grid) == 0:
            raise DomainError("Sweep grids must not be empty")
        for tau in tau_grid:
            if not tau >= 0 or math.isinf(tau):
                raise DomainError(f"Grid delay must be finite and non-negative, got {tau}")
        for theta in theta_grid:
            if not 0.0 <= theta <= 1.0:
                raise DomainError(f"Grid uncle fraction must lie in [0, 1], got {theta}")
        if mode not in MODES:
            raise DomainError(f"Unknown probability mode {mode!r}; expected one of {MODES}")
        if r0 is not None and r0.size != market.size:
            raise DomainError(f"Initial population has {r0.size} entries for {market.size} pools")
        if workers < 1:
            raise DomainError(f"workers must be at least 1, got {workers}")

        self.market = market
        self.params = params
        self.tau_grid = [float(t) for t in tau_grid]
        self.theta_grid = [float(t) for t in theta_grid]
        self.method = normalize_method(method)
        self.r0 = r0 if r0 is not None else PopulationState.uniform(market.size)
        self.mode = mode
        self.ode_options = dict(ODE_DEFAULTS)
        self.ode_options.update(ode_options or {})
        self.workers = workers

    def points(self) -> List[Tuple[float, float]]:
        """Grid points, tau-major."""
        return [(tau, theta) for tau in self.tau_grid for theta in self.theta_grid]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tau": list(self.tau_grid),
            "theta": list(self.theta_grid),
            "method": self.method,
            "r0": self.r0.to_list(),
            "mode": self.mode,
            "ode_options": dict(self.ode_options),
            "workers": self.workers,
        }

    def __repr__(self) -> str:
        return (
            f"SweepSpec(points={len(self.tau_grid)}x{len(self.theta_grid)}, "
            f"method={self.method!r}, pools={self.market.size})"
        )


class SweepRow:
    """
    Outcome at one grid point.

    ``r`` and ``gini`` are None when the point has no single terminal state
    (an NSS manifold) or failed.
    """

    def __init__(self, tau: float, theta: float, r: Optional[List[float]], gini: Optional[float],
                 method: str, status: str, detail: Optional[str] = None):
        self.tau = tau
        self.theta = theta
        self.r = r
        self.gini = gini
        self.method = method
        self.status = status
        self.detail = detail

    @property
    def dominant(self) -> Optional[int]:
        """Index of the pool with the largest population share."""
        return int(np.argmax(self.r)) if self.r is not None else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tau": self.tau,
            "theta": self.theta,
            "r": self.r,
            "gini": self.gini,
            "method": self.method,
            "status": self.status,
            "detail": self.detail,
        }

    def __repr__(self) -> str:
        return f"SweepRow(tau={self.tau}, theta={self.theta}, r={self.r}, status={self.status!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SweepRow):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def _terminal_row(tau: float, theta: float, state: PopulationState, market: PoolMarket,
                  method: str, status: str, detail: Optional[str] = None) -> SweepRow:
    g = gini(hash_fraction(state, market))
    return SweepRow(tau, theta, state.to_list(), g, method, status, detail)


def evaluate_point(spec: SweepSpec, tau: float, theta: float) -> SweepRow:
    """Solve one grid point; domain failures become an error row."""
    try:
        p = spec.params.with_delay(tau, theta)
        if spec.method == "ode":
            traj = integrate(spec.r0, spec.market, p, mode=spec.mode, **spec.ode_options)
            status = "ok" if traj.converged else "not_converged"
            return _terminal_row(tau, theta, traj.terminal, spec.market, "ode", status)

        results = classify(spec.market, p, r0=spec.r0, mode=spec.mode, ode_options=spec.ode_options)
        if len(results) > 1:
            traj = integrate(spec.r0, spec.market, p, mode=spec.mode, **spec.ode_options)
            return _terminal_row(tau, theta, traj.terminal, spec.market, "analytic", "ode_fallback",
                                 f"{len(results)} vertex equilibria")
        [result] = results
        if result.kind == "nss_manifold":
            return SweepRow(tau, theta, None, None, "analytic", "nss_manifold",
                            f"sum r_i omega_i = {result.manifold_value!r}")
        if result.kind == "ode_terminal":
            return _terminal_row(tau, theta, result.state, spec.market, "analytic", "ode_fallback",
                                 result.witness.get("reason"))
        return _terminal_row(tau, theta, result.state, spec.market, "analytic", "ok")
    except DomainError as exc:
        logger.warning("Sweep point tau=%g theta=%g failed: %s", tau, theta, exc)
        return SweepRow(tau, theta, None, None, spec.method, "error", str(exc))


def _evaluate_packed(args: Tuple[SweepSpec, float, float]) -> SweepRow:
    return evaluate_point(*args)


def sweep(spec: SweepSpec) -> List[SweepRow]:
    """
    Solve every grid point of the sweep.

    Returns:
        List[SweepRow]: One row per point, tau-major, in grid order regardless
        of the number of workers
    """
    jobs = [(spec, tau, theta) for tau, theta in spec.points()]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(_evaluate_packed, jobs))
    else:
        rows = [_evaluate_packed(job) for job in jobs]

    failed = sum(1 for row in rows if row.status == "error")
    logger.info("Sweep finished: %d points, %d failed", len(rows), failed)
    return rows


def csv_header(pools: int) -> List[str]:
    return ["tau", "theta"] + [f"r_{i + 1}" for i in range(pools)] + ["gini", "method", "status"]


def write_csv(rows: Sequence[SweepRow], fh: TextIO, pools: int) -> None:
    """Write rows with columns tau, theta, r_1..r_M, gini, method, status."""
    writer = csv.writer(fh)
    writer.writerow(csv_header(pools))
    for row in rows:
        shares = [repr(v) for v in row.r] if row.r is not None else [""] * pools
        writer.writerow(
            [repr(row.tau), repr(row.theta)] + shares
            + [repr(row.gini) if row.gini is not None else "", row.method, row.status]
        )


def to_csv(rows: Sequence[SweepRow], pools: int) -> str:
    buffer = io.StringIO()
    write_csv(rows, buffer, pools)
    return buffer.getvalue()


def dominance_threshold(rows: Sequence[SweepRow], theta: float) -> Optional[float]:
    """
    First delay at which the dominating pool changes along a theta slice.

    Rows without a terminal state are skipped.

    Returns:
        The tau of the first row whose dominant pool differs from the previous
        row's, or None if the dominant pool never changes
    """
    slice_rows = sorted(
        (row for row in rows if math.isclose(row.theta, theta, abs_tol=1e-12) and row.r is not None),
        key=lambda row: row.tau,
    )
    for before, after in zip(slice_rows, slice_rows[1:]):
        if after.dominant != before.dominant:
            return after.tau
    return None
