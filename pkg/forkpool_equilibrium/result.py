"""
Equilibrium result records.
"""

from typing import Any, Dict, List, Optional, Tuple

from forkpool_evolution.market import PopulationState
from forkpool_model.errors import DomainError

KINDS = ("vertex_ess", "interior_ess", "nss_manifold", "ode_terminal")
STABILITIES = ("asymptotically_stable", "lyapunov_stable", "undetermined")


class EquilibriumResult:
    """
    An equilibrium of the pool-selection game and how it was found.

    Attributes:
        kind (str): One of KINDS
        state (Optional[PopulationState]): The equilibrium population; None
            for a manifold
        manifold_value (Optional[float]): R / (p N) for an NSS manifold
            {r : sum_i r_i omega_i = R / (p N)}
        stability (str): One of STABILITIES
        witness (Dict[str, Any]): Theorem, case and evaluated conditions
        roots (List[Tuple[float, float]]): Cubic roots with their residuals,
            when a cubic was solved
        ambiguous (bool): True if several stable interior roots survived
        alternatives (List[PopulationState]): The other stable states when
            ambiguous
    """

    def __init__(
        self,
        kind: str,
        stability: str,
        state: Optional[PopulationState] = None,
        manifold_value: Optional[float] = None,
        witness: Optional[Dict[str, Any]] = None,
        roots: Optional[List[Tuple[float, float]]] = None,
        ambiguous: bool = False,
        alternatives: Optional[List[PopulationState]] = None,
    ):
        if kind not in KINDS:
            raise DomainError(f"Unknown equilibrium kind {kind!r}")
        if stability not in STABILITIES:
            raise DomainError(f"Unknown stability {stability!r}")
        if kind == "nss_manifold":
            if manifold_value is None:
                raise DomainError("An NSS manifold needs its constraint value")
        elif state is None:
            raise DomainError(f"A {kind} result needs a state")
        if kind == "vertex_ess" and not state.is_vertex():
            raise DomainError(f"Vertex ESS state {state.to_list()} is not a vertex")
        if kind == "interior_ess" and not state.is_interior():
            raise DomainError(f"Interior ESS state {state.to_list()} touches the boundary")

        self.kind = kind
        self.stability = stability
        self.state = state
        self.manifold_value = manifold_value
        self.witness = dict(witness or {})
        self.roots = list(roots or [])
        self.ambiguous = ambiguous
        self.alternatives = list(alternatives or [])

    @property
    def theorem(self) -> Optional[int]:
        return self.witness.get("theorem")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "state": self.state.to_list() if self.state is not None else None,
            "manifold_value": self.manifold_value,
            "stability": self.stability,
            "witness": self.witness,
            "roots": [{"root": r, "residual": res} for r, res in self.roots],
            "ambiguous": self.ambiguous,
            "alternatives": [alt.to_list() for alt in self.alternatives],
        }

    def __repr__(self) -> str:
        where = self.state.to_list() if self.state is not None else f"manifold={self.manifold_value}"
        return f"EquilibriumResult(kind={self.kind!r}, {where}, stability={self.stability!r})"
