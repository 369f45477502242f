"""Shared test utilities: independent oracles and random network generation.

The oracles here deliberately re-derive everything from scratch (ideal-gas
density, hand-rolled stack pressures, numerical quadrature for openings) so
they can cross-check the library without sharing its code paths.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

import airnet as an

G = 9.81
RHO_NUM = 353.05
DP_LIN = 1e-3


def oracle_density(temp_k: float) -> float:
    return RHO_NUM / temp_k


def oracle_cp(table, direction_deg: float) -> float:
    """Sector interpolation re-done with np.interp over wrapped centers."""
    xs = np.arange(0.0, 361.0, 45.0)
    ys = np.array(list(table) + [table[0]])
    return float(np.interp(direction_deg % 360.0, xs, ys))


def oracle_node_pressure(net: an.Network, bc: an.BoundaryState, node_id: str, z: float, p):
    """(pressure at elevation z, density) for either kind of node."""
    for i, zone in enumerate(net.zones):
        if zone.id == node_id:
            rho = oracle_density(zone.temperature_k)
            return p[i] - rho * G * (z - zone.ref_height_m), rho
    for node in net.external_nodes:
        if node.id == node_id:
            rho = oracle_density(bc.outdoor_temp_k)
            wind = 0.5 * rho * oracle_cp(node.cp, bc.wind_direction_deg) * bc.wind_speed**2
            return wind - rho * G * (z - node.ref_height_m), rho
    raise KeyError(node_id)


def oracle_opening_quadrature(width, height, cd, rho_from, rho_to, dp_bottom):
    """Forward/reverse opening flow by adaptive quadrature of the orifice law."""
    gradient = G * (rho_from - rho_to)

    def local_dp(z):
        return dp_bottom - gradient * z

    def forward(z):
        v = local_dp(z)
        return cd * width * math.sqrt(2.0 * rho_from * v) if v > 0 else 0.0

    def reverse(z):
        v = local_dp(z)
        return cd * width * math.sqrt(-2.0 * rho_to * v) if v < 0 else 0.0

    points = None
    if gradient != 0.0:
        z_neutral = dp_bottom / gradient
        if 0.0 < z_neutral < height:
            points = [z_neutral]
    fwd = quad(forward, 0.0, height, points=points, limit=200)[0]
    rev = quad(reverse, 0.0, height, points=points, limit=200)[0]
    return fwd, rev


def oracle_link_flow(net: an.Network, link: an.Link, p, bc: an.BoundaryState) -> float:
    """Signed link flow recomputed from the documented model definitions."""
    p_from, rho_from = oracle_node_pressure(net, bc, link.from_node, link.elevation_m, p)
    p_to, rho_to = oracle_node_pressure(net, bc, link.to_node, link.elevation_m, p)
    dp = p_from - p_to
    model = link.model
    if isinstance(model, an.Crack):
        if abs(dp) < DP_LIN:
            return model.k * DP_LIN ** (model.n - 1.0) * dp
        return math.copysign(model.k * abs(dp) ** model.n, dp)
    if isinstance(model, an.Fan):
        return model.flow_kg_s
    gradient = G * (rho_from - rho_to)
    dp_mid = dp - 0.5 * gradient * model.height_m
    if gradient == 0.0 or abs(gradient) * model.height_m <= 1e-6 * abs(dp_mid):
        # Documented degenerate form: equivalent orifice, linearized like a crack.
        rho_up = rho_from if dp_mid > 0 else rho_to
        k_eq = model.cd * model.width_m * model.height_m * math.sqrt(2.0 * rho_up)
        if abs(dp_mid) < DP_LIN:
            return k_eq * DP_LIN ** (-0.5) * dp_mid
        return math.copysign(k_eq * math.sqrt(abs(dp_mid)), dp_mid)
    fwd, rev = oracle_opening_quadrature(
        model.width_m, model.height_m, model.cd, rho_from, rho_to, dp
    )
    return fwd - rev


def oracle_residual(net: an.Network, p, bc: an.BoundaryState) -> np.ndarray:
    """Per-zone mass balance recomputed naively (quadrature for openings)."""
    out = []
    for zone in net.zones:
        total = zone.mech_flow_kg_s
        for link in net.links:
            if link.to_node == zone.id:
                total += oracle_link_flow(net, link, p, bc)
            elif link.from_node == zone.id:
                total -= oracle_link_flow(net, link, p, bc)
        out.append(total)
    return np.array(out)


def random_crack_network(rng: np.random.Generator, n_zones: int | None = None) -> an.Network:
    """Random reachable crack-only network with 2 external nodes."""
    n = int(n_zones if n_zones is not None else rng.integers(2, 7))
    zones = tuple(
        an.Zone(f"z{i}", float(rng.uniform(288, 303)), float(i * 2.7 + 1.35), 0.0)
        for i in range(n)
    )
    externals = tuple(
        an.ExternalNode(
            f"e{j}", float(rng.uniform(0, 3)), tuple(np.round(rng.uniform(-1, 1, 8), 3).tolist())
        )
        for j in range(2)
    )
    node_ids = [e.id for e in externals] + [z.id for z in zones]
    links: list[an.Link] = []

    def add(a: str, b: str) -> None:
        links.append(
            an.Link(
                f"L{len(links)}",
                a,
                b,
                float(rng.uniform(0, 8)),
                an.Crack(k=float(10 ** rng.uniform(-2.5, -1.3)), n=float(rng.uniform(0.5, 1.0))),
            )
        )

    add("e0", "z0")
    for i in range(1, n):
        add(str(rng.choice(node_ids[: 2 + i])), f"z{i}")
    for _ in range(n):
        a, b = rng.choice(node_ids, 2, replace=False)
        add(str(a), str(b))
    net = an.Network(zones=zones, external_nodes=externals, links=tuple(links))
    assert an.validate(net) == []
    return net


def random_boundary(rng: np.random.Generator) -> an.BoundaryState:
    return an.BoundaryState(
        wind_speed=float(rng.uniform(0, 8)),
        wind_direction_deg=float(rng.uniform(0, 360)),
        outdoor_temp_k=float(rng.uniform(285, 305)),
    )
