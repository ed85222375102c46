"""
Local stability checks for equilibria of the replicator dynamics.

On the NSS manifold sum_i r_i omega_i = R / (p N) every payoff is zero, and
the Jacobian of the dynamics in the reduced coordinates (r_1 .. r_{M-1}, with
r_M = 1 - sum of the others) is the rank-one matrix

    J_ij = p r_i (1 - N p omega_i / R) (omega_j - omega_M).

Its only nonzero eigenvalue, the trace, is -(N p^2 / R) Var_r(omega): the
manifold attracts transversally and is neutral along itself.

invasion_test checks the ESS inequality directly: a small share eps of
invaders r' must not earn more than the incumbents at the mixed state.
"""

import logging
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from forkpool_evolution.dynamics import payoff_vector, replicator_rhs
from forkpool_evolution.integrator import integrate
from forkpool_evolution.market import PoolMarket, PopulationState
from forkpool_model.errors import DomainError
from forkpool_model.fork_model import Mode
from forkpool_model.params import NetworkParams

from .classifier import FORK_FREE_TOL

logger = logging.getLogger(__name__)

MANIFOLD_TOL = 1e-9

DEFAULT_EPSILONS = (0.005, 0.01, 0.05, 0.1, 0.25)
DEFAULT_INVADERS = 200
DEFAULT_SEED = 20190101

VERDICTS = ("ess_confirmed", "nss_confirmed", "refuted")


def _manifold_value(m: PoolMarket, p: NetworkParams) -> float:
    if p.fork_penalty > FORK_FREE_TOL:
        raise DomainError(
            f"Manifold analysis needs tau = 0 or theta = 1, got fork penalty {p.fork_penalty:.3g}"
        )
    return m.manifold_value(p.reward)


def _check_on_manifold(r: PopulationState, m: PoolMarket, p: NetworkParams, tol: float) -> float:
    if r.size != m.size:
        raise DomainError(f"Population has {r.size} entries for {m.size} pools")
    value = _manifold_value(m, p)
    gap = r.weighted_hash(m) - value
    if abs(gap) > tol:
        raise DomainError(f"State is off the NSS manifold: sum r_i omega_i - R/(pN) = {gap:.3e}")
    return value


def reduced_jacobian(
    r: PopulationState, m: PoolMarket, p: NetworkParams, tol: float = MANIFOLD_TOL
) -> np.ndarray:
    """
    Closed-form (M-1) x (M-1) Jacobian of the dynamics at a manifold point.

    Raises:
        DomainError: If forks are penalized or r is off the manifold
    """
    _check_on_manifold(r, m, p, tol)
    n_p = m.miners * m.unit_cost
    omega = m.omega
    u = m.unit_cost * r.r[:-1] * (1.0 - n_p * omega[:-1] / p.reward)
    v = omega[:-1] - omega[-1]
    return np.outer(u, v)


def finite_difference_jacobian(
    r: PopulationState,
    m: PoolMarket,
    p: NetworkParams,
    h: float = 1e-6,
    mode: Mode = "exact",
) -> np.ndarray:
    """
    Central-difference Jacobian of replicator_rhs in reduced coordinates.

    Column j moves r_j up by h and r_M down by h, staying on the simplex plane.
    """
    if not h > 0:
        raise DomainError(f"Difference step must be positive, got {h}")
    base = r.r
    size = base.size - 1
    jac = np.empty((size, size))
    for j in range(size):
        shift = np.zeros_like(base)
        shift[j] = h
        shift[-1] = -h
        plus = replicator_rhs(base + shift, m, p, mode)
        minus = replicator_rhs(base - shift, m, p, mode)
        jac[:, j] = (plus[:-1] - minus[:-1]) / (2.0 * h)
    return jac


def leading_minors(matrix: np.ndarray) -> List[float]:
    """Leading principal minors D_1 .. D_n."""
    return [float(np.linalg.det(matrix[:k, :k])) for k in range(1, matrix.shape[0] + 1)]


class JacobianMinors:
    """
    Minor test of a manifold point.

    Unpacks as (minors, negative_definite).

    Attributes:
        minors (List[float]): D_1 .. D_{M-1}
        negative_definite (bool): True if sign(D_k) = (-1)^k for every k
        transverse_eigenvalue (float): -(N p^2 / R) Var_r(omega)
        transversally_stable (bool): True if the transverse eigenvalue is negative
        jacobian (np.ndarray): The reduced Jacobian
    """

    def __init__(self, minors: List[float], transverse_eigenvalue: float, jacobian: np.ndarray):
        self.minors = minors
        self.negative_definite = all(np.sign(d) == (-1) ** k for k, d in enumerate(minors, start=1))
        self.transverse_eigenvalue = transverse_eigenvalue
        self.transversally_stable = transverse_eigenvalue < 0
        self.jacobian = jacobian

    @property
    def stability(self) -> str:
        if self.negative_definite:
            return "asymptotically_stable"
        return "lyapunov_stable" if self.transversally_stable else "undetermined"

    def __iter__(self) -> Iterator[Any]:
        return iter((self.minors, self.negative_definite))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "minors": list(self.minors),
            "negative_definite": self.negative_definite,
            "transverse_eigenvalue": self.transverse_eigenvalue,
            "transversally_stable": self.transversally_stable,
            "stability": self.stability,
        }

    def __repr__(self) -> str:
        return (
            f"JacobianMinors(minors={self.minors}, negative_definite={self.negative_definite}, "
            f"transverse_eigenvalue={self.transverse_eigenvalue:.3e})"
        )


def jacobian_minors(
    r: PopulationState, m: PoolMarket, p: NetworkParams, tol: float = MANIFOLD_TOL
) -> JacobianMinors:
    """
    Leading principal minors of the reduced Jacobian at a manifold point.

    Because the Jacobian has rank one, D_1 = p r_1 (1 - N p omega_1 / R)
    (omega_1 - omega_M) and every higher minor is exactly zero.

    Args:
        r: Population on the manifold
        m: Pool market
        p: Network parameters with tau = 0 or theta = 1
        tol: Allowed |sum_i r_i omega_i - R / (p N)|

    Raises:
        DomainError: If forks are penalized or r is off the manifold
    """
    value = _check_on_manifold(r, m, p, tol)
    jac = reduced_jacobian(r, m, p, tol)
    minors = [float(jac[0, 0])] + [0.0] * (jac.shape[0] - 1) if jac.size else []
    variance = float(np.dot(r.r, (m.omega - value) ** 2))
    transverse = -(m.miners * m.unit_cost ** 2 / p.reward) * variance
    return JacobianMinors(minors, transverse, jac)


def sample_manifold_points(
    m: PoolMarket, p: NetworkParams, count: int, seed: int = DEFAULT_SEED
) -> List[PopulationState]:
    """
    Random fully interior points of the NSS manifold.

    A Dirichlet(1) draw d is mixed with the vertex of the largest (or
    smallest) specification until sum_i r_i omega_i hits R / (p N).

    Raises:
        DomainError: If R / (p N) does not lie strictly between min and max omega
    """
    value = _manifold_value(m, p)
    omega = m.omega
    high, low = int(np.argmax(omega)), int(np.argmin(omega))
    if not omega[low] < value < omega[high]:
        raise DomainError(
            f"Manifold value {value} must lie strictly between {omega[low]} and {omega[high]}"
        )
    if count < 0:
        raise DomainError(f"count must be non-negative, got {count}")

    rng = np.random.default_rng(seed)
    points = []
    for d in rng.dirichlet(np.ones(m.size), size=count):
        s = float(np.dot(d, omega))
        if s > value:
            target, t = low, (s - value) / (s - omega[low])
        else:
            target, t = high, (value - s) / (omega[high] - s)
        r = (1.0 - t) * d
        r[target] += t
        points.append(PopulationState(r / r.sum()))
    return points


def default_invaders(
    m: int, count: int = DEFAULT_INVADERS, seed: int = DEFAULT_SEED
) -> List[PopulationState]:
    """Every vertex, the uniform state and Dirichlet(1) draws, count in total."""
    invaders = [PopulationState.vertex(i, m) for i in range(m)]
    invaders.append(PopulationState.uniform(m))
    extra = max(0, count - len(invaders))
    rng = np.random.default_rng(seed)
    for d in rng.dirichlet(np.ones(m), size=extra):
        invaders.append(PopulationState(d / d.sum()))
    return invaders


class InvasionReport:
    """
    Outcome of invasion_test().

    Attributes:
        verdict (str): One of VERDICTS
        witness (Optional[Dict[str, Any]]): The violating (epsilon, invader,
            margin) when refuted
        min_margin (float): Smallest incumbent advantage seen
        zero_pairs (int): Pairs whose advantage was zero within tolerance
        checked (int): Number of (epsilon, invader) pairs evaluated
    """

    def __init__(self, verdict: str, witness: Optional[Dict[str, Any]], min_margin: float,
                 zero_pairs: int, checked: int):
        self.verdict = verdict
        self.witness = witness
        self.min_margin = min_margin
        self.zero_pairs = zero_pairs
        self.checked = checked

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "witness": self.witness,
            "min_margin": self.min_margin,
            "zero_pairs": self.zero_pairs,
            "checked": self.checked,
        }

    def __repr__(self) -> str:
        return (
            f"InvasionReport(verdict={self.verdict!r}, checked={self.checked}, "
            f"min_margin={self.min_margin:.3e})"
        )


def invasion_test(
    r_star: PopulationState,
    m: PoolMarket,
    p: NetworkParams,
    mode: Mode = "exact",
    epsilons: Sequence[float] = DEFAULT_EPSILONS,
    invaders: Optional[Sequence[PopulationState]] = None,
) -> InvasionReport:
    """
    Brute-force check of the ESS inequality at r_star.

    For every pair the incumbent advantage
    sum_i (r*_i - r'_i) y_i((1 - eps) r* + eps r') is evaluated. Values within
    1e-9 (R/N + p max omega) |r* - r'|_1 of zero count as ties.

    Args:
        r_star: Candidate equilibrium
        m: Pool market
        p: Network parameters
        mode: Probability mode of the payoffs
        epsilons: Invading shares, each in (0, 1)
        invaders: Invading states; defaults to default_invaders(M)

    Returns:
        InvasionReport: ess_confirmed if every advantage is positive,
        nss_confirmed if some are zero, refuted on the first negative one
    """
    if r_star.size != m.size:
        raise DomainError(f"Population has {r_star.size} entries for {m.size} pools")
    for eps in epsilons:
        if not 0.0 < eps < 1.0:
            raise DomainError(f"Invading share must lie in (0, 1), got {eps}")
    pool = list(invaders) if invaders is not None else default_invaders(m.size)
    scale = p.reward / m.miners + m.unit_cost * float(np.max(m.omega))

    min_margin = float("inf")
    zeros = 0
    checked = 0
    for invader in pool:
        if invader.size != m.size:
            raise DomainError(f"Invader has {invader.size} entries for {m.size} pools")
        diff = r_star.r - invader.r
        distance = float(np.abs(diff).sum())
        if distance == 0.0:
            continue
        tol = 1e-9 * scale * distance
        for eps in epsilons:
            mixed = (1.0 - eps) * r_star.r + eps * invader.r
            margin = float(np.dot(diff, payoff_vector(mixed, m, p, mode)))
            checked += 1
            min_margin = min(min_margin, margin)
            if margin < -tol:
                witness = {"epsilon": eps, "invader": invader.to_list(), "margin": margin}
                logger.debug("Invasion succeeded: %s", witness)
                return InvasionReport("refuted", witness, margin, zeros, checked)
            if margin <= tol:
                zeros += 1

    verdict = "nss_confirmed" if zeros else "ess_confirmed"
    return InvasionReport(verdict, None, min_margin, zeros, checked)


def basin_probe(
    result_states: Sequence[PopulationState],
    m: PoolMarket,
    p: NetworkParams,
    starts: Sequence[PopulationState],
    mode: Mode = "exact",
    **ode_options: Any,
) -> List[Tuple[List[float], int]]:
    """
    Integrate from each start and report which candidate state it reaches.

    Returns:
        List of (start, index of the nearest candidate in L1)
    """
    hits = []
    for start in starts:
        terminal = integrate(start, m, p, mode=mode, **ode_options).terminal
        nearest = min(range(len(result_states)), key=lambda i: terminal.distance(result_states[i]))
        hits.append((start.to_list(), nearest))
    return hits
