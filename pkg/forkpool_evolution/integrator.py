"""
Fixed-step Runge-Kutta integration of the replicator dynamics.
"""

import csv
import io
import logging
import math
from typing import Any, Dict, List, Optional, TextIO

import numpy as np

from forkpool_model.errors import DomainError
from forkpool_model.fork_model import Mode
from forkpool_model.params import NetworkParams

from .dynamics import ReplicatorField
from .market import PoolMarket, PopulationState

logger = logging.getLogger(__name__)

CALM_STEPS = 10


class Trajectory:
    """
    Sampled path of the replicator dynamics.

    Attributes:
        times (np.ndarray): Strictly increasing sample times
        states (np.ndarray): One row of population fractions per sample time
        converged (bool): True if the velocity stayed below eps_converge for
            CALM_STEPS consecutive steps before t_max
        residual (float): Max-norm of the velocity at the terminal state
        steps (int): RK4 steps taken
    """

    def __init__(self, times: np.ndarray, states: np.ndarray, converged: bool, residual: float, steps: int):
        self.times = times
        self.states = states
        self.converged = converged
        self.residual = residual
        self.steps = steps

    @property
    def terminal(self) -> PopulationState:
        return PopulationState(self.states[-1])

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def state_list(self) -> List[PopulationState]:
        return [PopulationState(row) for row in self.states]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "times": self.times.tolist(),
            "states": self.states.tolist(),
            "terminal": self.states[-1].tolist(),
            "converged": self.converged,
            "residual": self.residual,
            "steps": self.steps,
        }

    def write_csv(self, fh: TextIO) -> None:
        """Write columns t, r_1..r_M."""
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"r_{i + 1}" for i in range(self.states.shape[1])])
        for t, row in zip(self.times.tolist(), self.states.tolist()):
            writer.writerow([repr(t)] + [repr(v) for v in row])

    def to_csv(self) -> str:
        buffer = io.StringIO()
        self.write_csv(buffer)
        return buffer.getvalue()

    def __repr__(self) -> str:
        return (
            f"Trajectory(samples={len(self.times)}, t_end={self.final_time}, "
            f"converged={self.converged}, residual={self.residual:.3e})"
        )


def integrate(
    r0: PopulationState,
    m: PoolMarket,
    p: NetworkParams,
    mode: Mode = "exact",
    step: float = 0.01,
    t_max: float = 1e4,
    eps_converge: float = 1e-9,
    sample_every: Optional[int] = 100,
) -> Trajectory:
    """
    Integrate the replicator dynamics with classical RK4.

    After every step negative components are clamped to zero and the state is
    renormalized onto the simplex. Integration stops once the velocity has
    stayed below eps_converge in max-norm for CALM_STEPS consecutive steps, or
    when t_max is reached.

    Args:
        r0: Initial population
        m: Pool market (sizes must match r0)
        p: Network parameters
        mode: Probability mode used for the uncle term
        step: Step size in integrator time
        t_max: Time limit
        eps_converge: Velocity threshold of the convergence test
        sample_every: Record every n-th step (the first and last states are
            always recorded); None records only those two

    Returns:
        Trajectory: Sampled path and terminal diagnostics

    Raises:
        DomainError: On non-positive step or t_max, or mismatched sizes
    """
    if not step > 0:
        raise DomainError(f"Step must be positive, got {step}")
    if not t_max > 0:
        raise DomainError(f"t_max must be positive, got {t_max}")
    if eps_converge < 0:
        raise DomainError(f"eps_converge must be non-negative, got {eps_converge}")
    if sample_every is not None and sample_every < 1:
        raise DomainError(f"sample_every must be at least 1, got {sample_every}")
    if r0.size != m.size:
        raise DomainError(f"Initial population has {r0.size} entries for {m.size} pools")

    field = ReplicatorField(m, p, mode)
    h = float(step)
    total_steps = max(1, math.ceil(t_max / h - 1e-9))

    r = r0.r.copy()
    k1 = field(r)
    residual = float(np.max(np.abs(k1)))
    times = [0.0]
    states = [r.copy()]
    calm = 0
    converged = False
    n = 0

    for n in range(1, total_steps + 1):
        k2 = field(r + 0.5 * h * k1)
        k3 = field(r + 0.5 * h * k2)
        k4 = field(r + h * k3)
        r = r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        np.clip(r, 0.0, None, out=r)
        r /= r.sum()

        k1 = field(r)
        residual = float(np.max(np.abs(k1)))
        calm = calm + 1 if residual < eps_converge else 0
        converged = calm >= CALM_STEPS
        last = converged or n == total_steps

        if last or (sample_every is not None and n % sample_every == 0):
            times.append(n * h)
            states.append(r.copy())
        if converged:
            break

    logger.debug(
        "RK4 stopped after %d steps at t=%g (converged=%s, residual=%.3e)",
        n, times[-1], converged, residual,
    )
    return Trajectory(
        times=np.asarray(times),
        states=np.vstack(states),
        converged=converged,
        residual=residual,
        steps=n,
    )
