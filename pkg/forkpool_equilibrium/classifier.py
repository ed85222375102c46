"""
Analytic equilibria of the pool-selection game.

Equal hash specifications make every vertex an ESS. Two pools with unequal
specifications either settle on a vertex or on the stable root of a cubic;
in the fork-free regime (tau = 0 or theta = 1) that root has a closed form.
With more pools and no fork penalty the neutrally stable states form the
affine manifold sum_i r_i omega_i = R / (p N). Everything else is left to the
replicator ODE.
"""

import logging
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from forkpool_evolution.integrator import integrate
from forkpool_evolution.market import PoolMarket, PopulationState
from forkpool_model.errors import DomainError, InconsistentConditionsError, NumericalFailureError
from forkpool_model.fork_model import Mode
from forkpool_model.params import NetworkParams

from .cubic import cubic_real_roots, polynomial_derivative, polynomial_value, residual_bound
from .result import EquilibriumResult

logger = logging.getLogger(__name__)

FORK_FREE_TOL = 1e-9
VERTEX_SNAP_TOL = 1e-7
ORDER_TOL = 1e-12

ODE_DEFAULTS: Dict[str, Any] = {"step": 0.1, "t_max": 1e4, "eps_converge": 1e-9}


def is_fork_free(p: NetworkParams) -> bool:
    """True when tau = 0 or theta = 1 (up to FORK_FREE_TOL)."""
    return p.fork_penalty <= FORK_FREE_TOL


def _check_two_pools(m: PoolMarket) -> Tuple[float, float]:
    if m.size != 2:
        raise DomainError(f"Two-pool analysis needs exactly 2 pools, got {m.size}")
    w1, w2 = float(m.omega[0]), float(m.omega[1])
    if not w1 > w2:
        raise DomainError(f"Two-pool analysis needs omega_1 > omega_2, got {w1} and {w2}")
    return w1, w2


def _two_pool_state(r1: float) -> PopulationState:
    return PopulationState([r1, 1.0 - r1])


def classify_equal_spec(m: PoolMarket, p: Optional[NetworkParams] = None) -> List[EquilibriumResult]:
    """
    Vertex equilibria of a market whose pools share one hash specification.

    Every vertex e_i is an ESS and no other ESS exists. When p is given and
    carries no fork penalty all payoffs coincide, so the vertices are only
    Lyapunov stable.

    Raises:
        DomainError: If the specifications differ
    """
    if not m.equal_spec:
        raise DomainError(f"Equal-specification analysis needs equal omega, got {m.omega.tolist()}")
    neutral = p is not None and is_fork_free(p)
    stability = "lyapunov_stable" if neutral else "asymptotically_stable"
    return [
        EquilibriumResult(
            "vertex_ess",
            stability,
            state=PopulationState.vertex(i, m.size),
            witness={"theorem": 2, "vertex": i},
        )
        for i in range(m.size)
    ]


def two_pool_cubic_coefficients(m: PoolMarket, p: NetworkParams) -> Tuple[float, float, float, float]:
    """
    Coefficients (a, b, c, d) whose roots are the two-pool rest points.

    The cubic is N S^3 (y_1 - y_2) as a function of r = r_1, with
    S = omega_2 + (omega_1 - omega_2) r and uncle probabilities in their
    Taylor form. Its sign therefore matches y_1 - y_2 on [0, 1].
    """
    w1, w2 = _check_two_pools(m)
    reward = p.reward
    n_p = m.miners * m.unit_cost
    k = p.fork_penalty
    delta = w1 - w2

    a = -n_p * delta ** 4
    b = reward * delta ** 3 + k * reward * w1 * w2 * delta - 3.0 * n_p * w2 * delta ** 3
    c = 2.0 * reward * w2 * delta ** 2 + 2.0 * k * reward * w1 * w2 ** 2 - 3.0 * n_p * w2 ** 2 * delta ** 2
    d = w2 ** 2 * ((reward - n_p * w2) * delta - k * reward * w1)
    return a, b, c, d


def two_pool_conditions(m: PoolMarket, p: NetworkParams) -> Dict[str, float]:
    """Both sides of the vertex conditions for r* = 1 and r* = 0."""
    w1, w2 = _check_two_pools(m)
    reward = p.reward
    n_p = m.miners * m.unit_cost
    k = p.fork_penalty
    delta = w1 - w2
    return {
        "large_vertex_lhs": n_p * w1,
        "large_vertex_rhs": reward + reward * k * w2 / delta,
        "small_vertex_lhs": n_p * w2,
        "small_vertex_rhs": reward - reward * k * w1 / delta,
    }


def two_pool_ess(m: PoolMarket, p: NetworkParams) -> EquilibriumResult:
    """
    ESS of two pools with omega_1 > omega_2 under a fork penalty.

    Args:
        m: Two-pool market, larger specification first
        p: Network parameters

    Returns:
        EquilibriumResult: Vertex e_1 (case 1), vertex e_2 (case 2) or the
        stable interior root of the cubic (case 3). A stable root within
        VERTEX_SNAP_TOL of 0 or 1 is reported as that vertex

    Raises:
        DomainError: If the market is not a two-pool market with omega_1 > omega_2
        InconsistentConditionsError: If both vertex conditions hold
        NumericalFailureError: If case 3 yields no stable interior root
    """
    conditions = two_pool_conditions(m, p)
    large = conditions["large_vertex_lhs"] < conditions["large_vertex_rhs"]
    small = conditions["small_vertex_lhs"] > conditions["small_vertex_rhs"]
    witness: Dict[str, Any] = {"theorem": 3, "conditions": conditions}

    if large and small:
        raise InconsistentConditionsError(
            "Both vertex conditions hold: r*=1 and r*=0 are each stable "
            f"({conditions})",
            candidates=[0, 1],
        )
    if large:
        witness["case"] = 1
        return EquilibriumResult(
            "vertex_ess", "asymptotically_stable", state=_two_pool_state(1.0), witness=witness
        )
    if small:
        witness["case"] = 2
        return EquilibriumResult(
            "vertex_ess", "asymptotically_stable", state=_two_pool_state(0.0), witness=witness
        )

    coeffs = list(two_pool_cubic_coefficients(m, p))
    witness["case"] = 3
    witness["coefficients"] = coeffs
    roots = cubic_real_roots(*coeffs)
    with_residuals = [(r, abs(polynomial_value(coeffs, r))) for r in roots]
    bound = residual_bound(*coeffs)

    stable = []
    snapped = []
    for r in roots:
        slope = polynomial_derivative(coeffs, r)
        if not slope < 0.0:
            continue
        tol = max(VERTEX_SNAP_TOL, bound / abs(slope))
        if r <= tol or r >= 1.0 - tol:
            if -tol <= r <= 1.0 + tol:
                snapped.append(r)
            continue
        stable.append(r)

    if not stable and snapped:
        # stable root at a vertex up to round-off
        r_vertex = 1.0 if snapped[0] > 0.5 else 0.0
        witness["snapped_root"] = snapped[0]
        logger.info(
            "Stable root %.3e lies within tolerance of r=%g; reporting the vertex", snapped[0], r_vertex
        )
        return EquilibriumResult(
            "vertex_ess",
            "asymptotically_stable",
            state=_two_pool_state(r_vertex),
            witness=witness,
            roots=with_residuals,
        )
    if not stable:
        raise NumericalFailureError(f"No stable interior root among {roots} for coefficients {coeffs}")

    ambiguous = len(stable) > 1
    if ambiguous:
        logger.warning("Several stable interior roots %s; reporting all of them", stable)
    return EquilibriumResult(
        "interior_ess",
        "asymptotically_stable",
        state=_two_pool_state(stable[0]),
        witness=witness,
        roots=with_residuals,
        ambiguous=ambiguous,
        alternatives=[_two_pool_state(r) for r in stable[1:]],
    )


def two_pool_ess_limit(m: PoolMarket, p: NetworkParams) -> EquilibriumResult:
    """
    ESS of two pools when forks cost nothing (theta -> 1).

    r* = 1 if R >= p N omega_1, r* = 0 if R <= p N omega_2, and otherwise
    r* = (R - omega_2 p N) / (p N (omega_1 - omega_2)).
    """
    w1, w2 = _check_two_pools(m)
    reward = p.reward
    n_p = m.miners * m.unit_cost
    witness: Dict[str, Any] = {
        "theorem": 4,
        "conditions": {"reward": reward, "large_vertex_cost": n_p * w1, "small_vertex_cost": n_p * w2},
    }

    if reward >= n_p * w1:
        witness["case"] = 1
        return EquilibriumResult(
            "vertex_ess", "asymptotically_stable", state=_two_pool_state(1.0), witness=witness
        )
    if reward <= n_p * w2:
        witness["case"] = 2
        return EquilibriumResult(
            "vertex_ess", "asymptotically_stable", state=_two_pool_state(0.0), witness=witness
        )

    witness["case"] = 3
    r_star = (reward - w2 * n_p) / (n_p * (w1 - w2))
    return EquilibriumResult(
        "interior_ess", "asymptotically_stable", state=_two_pool_state(r_star), witness=witness
    )


def _check_decreasing(omega: np.ndarray) -> None:
    if np.any(np.diff(omega) >= -ORDER_TOL):
        raise DomainError(f"Hash specifications must be strictly decreasing, got {omega.tolist()}")


def multi_pool_nss(m: PoolMarket, p: NetworkParams) -> EquilibriumResult:
    """
    Neutrally stable states of M pools without fork penalty.

    Args:
        m: Market with strictly decreasing omega
        p: Network parameters with tau = 0 or theta = 1

    Returns:
        EquilibriumResult: e_1 if R >= p N omega_1, e_M if R <= p N omega_M,
        otherwise the manifold sum_i r_i omega_i = R / (p N)

    Raises:
        DomainError: If omega is not strictly decreasing or forks are penalized
    """
    _check_decreasing(m.omega)
    if not is_fork_free(p):
        raise DomainError(
            f"NSS manifold needs tau = 0 or theta = 1, got fork penalty {p.fork_penalty:.3g}"
        )
    reward = p.reward
    n_p = m.miners * m.unit_cost
    w_first, w_last = float(m.omega[0]), float(m.omega[-1])
    witness: Dict[str, Any] = {
        "theorem": 5,
        "conditions": {"reward": reward, "largest_cost": n_p * w_first, "smallest_cost": n_p * w_last},
    }

    if reward >= n_p * w_first:
        witness["case"] = 1
        return EquilibriumResult(
            "vertex_ess", "asymptotically_stable", state=PopulationState.vertex(0, m.size), witness=witness
        )
    if reward <= n_p * w_last:
        witness["case"] = 2
        return EquilibriumResult(
            "vertex_ess",
            "asymptotically_stable",
            state=PopulationState.vertex(m.size - 1, m.size),
            witness=witness,
        )

    witness["case"] = 3
    return EquilibriumResult(
        "nss_manifold", "lyapunov_stable", manifold_value=m.manifold_value(reward), witness=witness
    )


def _permute(m: PoolMarket, order: np.ndarray) -> PoolMarket:
    return PoolMarket(m.omega[order], m.miners, m.unit_cost)


def _unpermute(result: EquilibriumResult, order: np.ndarray) -> EquilibriumResult:
    """Map a result computed on reordered pools back to the caller's order."""
    def restore(state: PopulationState) -> PopulationState:
        r = np.empty(state.size)
        r[order] = state.r
        return PopulationState(r)

    if result.state is None or np.array_equal(order, np.arange(order.size)):
        return result
    result.state = restore(result.state)
    result.alternatives = [restore(alt) for alt in result.alternatives]
    result.witness["pool_order"] = order.tolist()
    return result


def ode_equilibrium(
    m: PoolMarket,
    p: NetworkParams,
    r0: Optional[PopulationState] = None,
    mode: Mode = "exact",
    ode_options: Optional[Mapping[str, Any]] = None,
    reason: str = "no closed form",
) -> EquilibriumResult:
    """Terminal state of the replicator ODE, reported as an undetermined equilibrium."""
    start = r0 if r0 is not None else PopulationState.uniform(m.size)
    options = dict(ODE_DEFAULTS)
    options.update(ode_options or {})
    traj = integrate(start, m, p, mode=mode, **options)
    if not traj.converged:
        logger.warning("ODE fallback stopped at t=%g without converging (residual %.3e)",
                       traj.final_time, traj.residual)
    return EquilibriumResult(
        "ode_terminal",
        "undetermined",
        state=traj.terminal,
        witness={
            "method": "ode",
            "reason": reason,
            "r0": start.to_list(),
            "converged": traj.converged,
            "residual": traj.residual,
            "t": traj.final_time,
        },
    )


def classify(
    m: PoolMarket,
    p: NetworkParams,
    r0: Optional[PopulationState] = None,
    mode: Mode = "exact",
    ode_options: Optional[Mapping[str, Any]] = None,
) -> List[EquilibriumResult]:
    """
    Pick the analysis that applies to (m, p) and run it.

    Equal specifications give every vertex; two pools use the cubic (or its
    fork-free closed form); fork-free markets with distinct specifications
    give the NSS result. Any other market, and a two-pool market where both
    vertices are stable, is integrated from r0 (uniform by default).

    Returns:
        List[EquilibriumResult]: All vertex ESSs for equal specifications,
        otherwise a single result
    """
    if m.equal_spec:
        return classify_equal_spec(m, p)

    order = np.argsort(-m.omega, kind="stable")
    ordered = _permute(m, order)

    if m.size == 2:
        try:
            if is_fork_free(p):
                result = two_pool_ess_limit(ordered, p)
            else:
                result = two_pool_ess(ordered, p)
        except InconsistentConditionsError as exc:
            logger.warning("%s; falling back to the replicator ODE", exc)
            return [ode_equilibrium(m, p, r0, mode, ode_options, reason="bistable")]
        return [_unpermute(result, order)]

    if is_fork_free(p):
        try:
            _check_decreasing(ordered.omega)
        except DomainError:
            logger.warning(
                "Repeated hash specifications %s; falling back to the replicator ODE", m.omega.tolist()
            )
        else:
            return [_unpermute(multi_pool_nss(ordered, p), order)]

    logger.info("No closed form for %d pools with fork penalty %.3g; integrating", m.size, p.fork_penalty)
    return [ode_equilibrium(m, p, r0, mode, ode_options)]
