"""Assembly of the nonlinear mass-balance system from a network and weather.

Given a pressure vector p (one entry per zone, in network order) and a
boundary state, this module produces:

* the residual f(p): net mass inflow per zone, including mechanical
  ventilation, which is zero at the solution;
* the Jacobian J(p) = df/dp for Newton steps;
* the linear fixed-point system A(p) x = B(p) with conductances frozen at
  the current iterate, used by the Picard initializer.

Stack pressures use a constant density per node column between the node's
reference height and the link elevation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .links import (
    DP_LIN_DEFAULT,
    GRAVITY,
    TwoWayFlow,
    air_density,
    crack_conductance,
    crack_derivative,
    crack_flow,
    large_opening_derivative,
    large_opening_flow,
)
from .network import Crack, ExternalNode, Fan, LargeOpening, Link, Network

__all__ = [
    "BoundaryState",
    "LinearSystem",
    "LinkFlow",
    "ReciprocalFlowError",
    "boundary_pressure",
    "external_pressures",
    "link_dp",
    "link_flows",
    "residual",
    "jacobian",
    "picard_system",
]


class ReciprocalFlowError(RuntimeError):
    """A large opening is currently bidirectional; the fixed-point
    linearization cannot represent it."""

    def __init__(self, link_id: str):
        self.link_id = link_id
        super().__init__(f"link '{link_id}' carries reciprocal (two-way) flow")


@dataclass(frozen=True)
class BoundaryState:
    """Exterior conditions at one instant.

    Wind direction is in degrees from north, normalized to [0, 360).
    """

    wind_speed: float
    wind_direction_deg: float
    outdoor_temp_k: float

    def __post_init__(self):
        if self.wind_speed < 0:
            raise ValueError(f"wind speed must be >= 0, got {self.wind_speed}")
        if self.outdoor_temp_k <= 0:
            raise ValueError(f"outdoor temperature must be > 0 K, got {self.outdoor_temp_k}")
        object.__setattr__(self, "wind_direction_deg", self.wind_direction_deg % 360.0)


@dataclass(frozen=True)
class LinearSystem:
    """Dense zone-balance system: matrix @ p = rhs (Pa -> kg/s)."""

    matrix: np.ndarray
    rhs: np.ndarray


@dataclass(frozen=True)
class LinkFlow:
    """Resolved flow through one link at a given state.

    `flow` is the signed net (positive from -> to); the directional
    components are both populated, and differ from the trivial split only
    for bidirectional large openings.
    """

    link_id: str
    flow: float
    flow_forward: float
    flow_reverse: float
    neutral_height: float | None = None


def boundary_pressure(node: ExternalNode, bc: BoundaryState) -> float:
    """Wind pressure at an external node, 0.5 * rho_out * Cp(dir) * v**2.

    Cp is linearly interpolated between the two adjacent 45-degree sector
    centers of the node's table.
    """
    rho_out = air_density(bc.outdoor_temp_k)
    sector = bc.wind_direction_deg / 45.0
    base = int(sector) % 8
    frac = sector - int(sector)
    cp = node.cp[base] * (1.0 - frac) + node.cp[(base + 1) % 8] * frac
    return 0.5 * rho_out * cp * bc.wind_speed**2


def external_pressures(net: Network, bc: BoundaryState) -> dict[str, float]:
    """Derived wind pressure for every external node."""
    return {n.id: boundary_pressure(n, bc) for n in net.external_nodes}


# ---------------------------------------------------------------------------
# node pressure columns

# Each link endpoint resolves to (zone column or None, constant offset, density):
# pressure at elevation z is p[column] + offset for a zone, or just offset for
# an external node (whose wind pressure is folded into the offset).


def _endpoint(
    net: Network,
    node_id: str,
    z: float,
    bc: BoundaryState,
    zone_index: dict[str, int],
    externals: dict[str, ExternalNode],
) -> tuple[int | None, float, float]:
    column = zone_index.get(node_id)
    if column is not None:
        zone = net.zones[column]
        rho = air_density(zone.temperature_k)
        return column, -rho * GRAVITY * (z - zone.ref_height_m), rho
    node = externals[node_id]
    rho = air_density(bc.outdoor_temp_k)
    offset = boundary_pressure(node, bc) - rho * GRAVITY * (z - node.ref_height_m)
    return None, offset, rho


def link_dp(net: Network, link: Link, p: np.ndarray, bc: BoundaryState) -> float:
    """Pressure difference across a link at its elevation (from minus to).

    For large openings the link elevation is the bottom edge, so this is the
    dp_bottom argument of the opening flow law.
    """
    zone_index = net.zone_index()
    externals = net.external_map()
    col_f, off_f, _ = _endpoint(net, link.from_node, link.elevation_m, bc, zone_index, externals)
    col_t, off_t, _ = _endpoint(net, link.to_node, link.elevation_m, bc, zone_index, externals)
    p_f = off_f + (p[col_f] if col_f is not None else 0.0)
    p_t = off_t + (p[col_t] if col_t is not None else 0.0)
    return p_f - p_t


def _link_state(
    net: Network,
    link: Link,
    p: np.ndarray,
    bc: BoundaryState,
    zone_index: dict[str, int],
    externals: dict[str, ExternalNode],
) -> tuple[int | None, int | None, float, float, float]:
    """(from column, to column, dp, rho_from, rho_to) at the link elevation."""
    col_f, off_f, rho_f = _endpoint(net, link.from_node, link.elevation_m, bc, zone_index, externals)
    col_t, off_t, rho_t = _endpoint(net, link.to_node, link.elevation_m, bc, zone_index, externals)
    p_f = off_f + (p[col_f] if col_f is not None else 0.0)
    p_t = off_t + (p[col_t] if col_t is not None else 0.0)
    return col_f, col_t, p_f - p_t, rho_f, rho_t


def _model_flow(link: Link, dp: float, rho_f: float, rho_t: float, dp_lin: float) -> TwoWayFlow:
    model = link.model
    if isinstance(model, Crack):
        flow = crack_flow(model.k, model.n, dp, dp_lin)
        return TwoWayFlow(max(flow, 0.0), max(-flow, 0.0), None)
    if isinstance(model, LargeOpening):
        return large_opening_flow(
            model.width_m, model.height_m, model.cd, rho_f, rho_t, dp, dp_lin
        )
    return TwoWayFlow(max(model.flow_kg_s, 0.0), max(-model.flow_kg_s, 0.0), None)


def _model_derivative(link: Link, dp: float, rho_f: float, rho_t: float, dp_lin: float) -> float:
    model = link.model
    if isinstance(model, Crack):
        return crack_derivative(model.k, model.n, dp, dp_lin)
    if isinstance(model, LargeOpening):
        return large_opening_derivative(
            model.width_m, model.height_m, model.cd, rho_f, rho_t, dp, dp_lin
        )
    return 0.0


# ---------------------------------------------------------------------------
# residual, Jacobian, fixed-point system


def residual(
    net: Network, p: np.ndarray, bc: BoundaryState, dp_lin: float = DP_LIN_DEFAULT
) -> np.ndarray:
    """Net mass inflow per zone (kg/s), in network zone order."""
    zone_index = net.zone_index()
    externals = net.external_map()
    f = np.array([z.mech_flow_kg_s for z in net.zones], dtype=float)
    for link in net.links:
        col_f, col_t, dp, rho_f, rho_t = _link_state(net, link, p, bc, zone_index, externals)
        flow = _model_flow(link, dp, rho_f, rho_t, dp_lin).net
        if col_f is not None:
            f[col_f] -= flow
        if col_t is not None:
            f[col_t] += flow
    return f


def jacobian(
    net: Network, p: np.ndarray, bc: BoundaryState, dp_lin: float = DP_LIN_DEFAULT
) -> np.ndarray:
    """Derivative of the residual with respect to the zone pressures."""
    zone_index = net.zone_index()
    externals = net.external_map()
    n = len(net.zones)
    jac = np.zeros((n, n))
    for link in net.links:
        col_f, col_t, dp, rho_f, rho_t = _link_state(net, link, p, bc, zone_index, externals)
        d = _model_derivative(link, dp, rho_f, rho_t, dp_lin)
        if d == 0.0:
            continue
        if col_f is not None:
            jac[col_f, col_f] -= d
            if col_t is not None:
                jac[col_f, col_t] += d
        if col_t is not None:
            jac[col_t, col_t] -= d
            if col_f is not None:
                jac[col_t, col_f] += d
    return jac


def link_flows(
    net: Network, p: np.ndarray, bc: BoundaryState, dp_lin: float = DP_LIN_DEFAULT
) -> dict[str, LinkFlow]:
    """Per-link resolved flows at the given pressures."""
    zone_index = net.zone_index()
    externals = net.external_map()
    out: dict[str, LinkFlow] = {}
    for link in net.links:
        _, _, dp, rho_f, rho_t = _link_state(net, link, p, bc, zone_index, externals)
        two_way = _model_flow(link, dp, rho_f, rho_t, dp_lin)
        out[link.id] = LinkFlow(
            link_id=link.id,
            flow=two_way.net,
            flow_forward=two_way.flow_forward,
            flow_reverse=two_way.flow_reverse,
            neutral_height=two_way.neutral_height,
        )
    return out


def picard_system(
    net: Network, p: np.ndarray, bc: BoundaryState, dp_lin: float = DP_LIN_DEFAULT
) -> LinearSystem:
    """Zone-balance system with conductances frozen at the current iterate.

    Cracks contribute their secant conductance; a large opening is collapsed
    to a single equivalent orifice at its mid-height (K = cd*W*H*sqrt(2*rho_mean),
    exponent 1/2).  All pressure-proportional terms go to the matrix and all
    constant terms (wind pressures, stack offsets, fans, mechanical flows) to
    the right-hand side, so a fixed point of the map is a root of the
    residual for crack-only networks.

    Raises ReciprocalFlowError when any large opening currently carries
    two-way flow: the single-conductance picture cannot represent it.
    """
    zone_index = net.zone_index()
    externals = net.external_map()
    n = len(net.zones)
    matrix = np.zeros((n, n))
    rhs = np.array([-z.mech_flow_kg_s for z in net.zones], dtype=float)

    for link in net.links:
        model = link.model
        if isinstance(model, Fan):
            # Constant flow out of `from` and into `to`; as a constant it is
            # negated onto the right-hand side with the row sign.
            col_f = zone_index.get(link.from_node)
            col_t = zone_index.get(link.to_node)
            if col_f is not None:
                rhs[col_f] += model.flow_kg_s
            if col_t is not None:
                rhs[col_t] -= model.flow_kg_s
            continue

        if isinstance(model, LargeOpening):
            col_f, col_t, dp_bottom, rho_f, rho_t = _link_state(
                net, link, p, bc, zone_index, externals
            )
            current = large_opening_flow(
                model.width_m, model.height_m, model.cd, rho_f, rho_t, dp_bottom, dp_lin
            )
            if current.bidirectional:
                raise ReciprocalFlowError(link.id)
            z_mid = link.elevation_m + 0.5 * model.height_m
            col_f, off_f, rho_f = _endpoint(net, link.from_node, z_mid, bc, zone_index, externals)
            col_t, off_t, rho_t = _endpoint(net, link.to_node, z_mid, bc, zone_index, externals)
            dp_mid = (off_f + (p[col_f] if col_f is not None else 0.0)) - (
                off_t + (p[col_t] if col_t is not None else 0.0)
            )
            rho_mean = 0.5 * (rho_f + rho_t)
            k_eq = model.cd * model.width_m * model.height_m * np.sqrt(2.0 * rho_mean)
            conductance = crack_conductance(k_eq, 0.5, dp_mid, dp_lin)
        else:
            col_f, off_f, _ = _endpoint(
                net, link.from_node, link.elevation_m, bc, zone_index, externals
            )
            col_t, off_t, _ = _endpoint(
                net, link.to_node, link.elevation_m, bc, zone_index, externals
            )
            dp = (off_f + (p[col_f] if col_f is not None else 0.0)) - (
                off_t + (p[col_t] if col_t is not None else 0.0)
            )
            conductance = crack_conductance(model.k, model.n, dp, dp_lin)

        # Row contribution for flow G * ((p_f + off_f) - (p_t + off_t)), with
        # sign +1 into the `to` zone, -1 out of the `from` zone.
        const = conductance * (off_f - off_t)
        for row, sign in ((col_f, -1.0), (col_t, +1.0)):
            if row is None:
                continue
            if col_f is not None:
                matrix[row, col_f] += sign * conductance
            if col_t is not None:
                matrix[row, col_t] -= sign * conductance
            rhs[row] -= sign * const
    return LinearSystem(matrix=matrix, rhs=rhs)
