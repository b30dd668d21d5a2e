"""Three-layer capacitated flow networks, exact integral max-flow, min cuts,
and the layer-expansion flow transfer maps.

Two constructions share the layout source -> left -> right -> sink:

* the compact network: left nodes lam_1..lam_m (control copies) and
  nu_1..nu_n (state out-copies), right nodes mu_1..mu_n (state in-copies),
  with capacities k+1 / q(k+1) / q encoding the switch and ensemble counts;
* the expanded unit-capacity network: every left node is multiplied into
  its k+1 (and, for state copies, q) layers, every right node into its q
  copies, and all capacities collapse to 1.

The node-collapsing map phi sends expanded nodes onto compact ones; flows
transfer along phi in both directions with their value preserved.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction

from .errors import ConsistencyError, ScaleError
from .graph import Digraph

SOURCE = "s"
SINK = "t"

_INT64_MAX = (1 << 63) - 1
MAX_LIFTED_LEFT = 1 << 22  # guard on (k+1)(m+nq)

Node = str | tuple
Arc = tuple[Node, Node]


@dataclass
class FlowNetwork:
    """Immutable-after-construction capacitated digraph with provenance tags
    pointing back at the pattern digraph that produced each arc."""

    kind: str  # "small" | "lifted"
    n: int
    m: int
    k: int
    q: int
    witness_mode: bool
    nodes: tuple[Node, ...]
    arcs: tuple[Arc, ...]
    capacity: dict[Arc, int]
    provenance: dict[Arc, tuple]


@dataclass(frozen=True)
class FlowAssignment:
    """Per-arc flow values (exact ints or Fractions) and the total value."""

    values: dict[Arc, int | Fraction]
    value_total: int | Fraction


def build_small_network(g: Digraph, k: int, q: int, witness_mode: bool = False) -> FlowNetwork:
    """Compact network with 2n+m+2 nodes and 2n+m+|E| arcs.

    In witness mode every left-to-right capacity is replaced by a value larger
    than the total source capacity, which leaves the max-flow value unchanged
    (each left node is already throttled by its single source arc) but forces
    every min cut onto the source and sink arcs, where a violating subset can
    be read off directly.
    """
    if k < 0:
        raise ValueError("switch count k must be >= 0")
    if q < 1:
        raise ValueError("ensemble size q must be >= 1")
    n, m = g.n_state, g.n_control
    kp1 = k + 1
    big = q * kp1
    if big > _INT64_MAX:
        raise ScaleError("q*(k+1) exceeds the 64-bit capacity guard")
    inf_cap = 1 + m * kp1 + n * big  # strictly above every possible flow value
    lam = [("lam", i) for i in range(1, m + 1)]
    nu = [("nu", j) for j in range(1, n + 1)]
    mu = [("mu", j) for j in range(1, n + 1)]
    nodes = (SOURCE, *lam, *nu, *mu, SINK)
    arcs: list[Arc] = []
    capacity: dict[Arc, int] = {}
    provenance: dict[Arc, tuple] = {}

    def add(u, v, c, tag):
        arc = (u, v)
        arcs.append(arc)
        capacity[arc] = c
        provenance[arc] = tag

    for i in range(1, m + 1):
        add(SOURCE, ("lam", i), kp1, ("source", "control", i))
    for j in range(1, n + 1):
        add(SOURCE, ("nu", j), big, ("source", "state", j))
    for i, j in sorted(g.control_edges):
        add(("lam", i), ("mu", j), inf_cap if witness_mode else kp1, ("edge", "control", i, j))
    for i, j in sorted(g.state_edges):
        add(("nu", i), ("mu", j), inf_cap if witness_mode else big, ("edge", "state", i, j))
    for j in range(1, n + 1):
        add(("mu", j), SINK, q, ("sink", j))

    if sum(capacity.values()) > _INT64_MAX:
        raise ScaleError("total capacity exceeds the 64-bit guard")
    return FlowNetwork("small", n, m, k, q, witness_mode, nodes, tuple(arcs), capacity, provenance)


def build_lifted_network(g: Digraph, k: int, q: int) -> FlowNetwork:
    """Expanded unit-capacity network: left layer of (k+1)(m+nq) nodes, right
    layer of nq nodes, state copies wired within their own ensemble copy."""
    if k < 0:
        raise ValueError("switch count k must be >= 0")
    if q < 1:
        raise ValueError("ensemble size q must be >= 1")
    n, m = g.n_state, g.n_control
    kp1 = k + 1
    if kp1 * (m + n * q) > MAX_LIFTED_LEFT:
        raise ScaleError(f"(k+1)(m+nq) exceeds the {MAX_LIFTED_LEFT} node guard")
    lam = [("lam", ell, i) for ell in range(1, kp1 + 1) for i in range(1, m + 1)]
    nu = [
        ("nu", ell, p, j)
        for ell in range(1, kp1 + 1)
        for p in range(1, q + 1)
        for j in range(1, n + 1)
    ]
    mu = [("mu", p, j) for p in range(1, q + 1) for j in range(1, n + 1)]
    nodes = (SOURCE, *lam, *nu, *mu, SINK)
    arcs: list[Arc] = []
    capacity: dict[Arc, int] = {}
    provenance: dict[Arc, tuple] = {}

    def add(u, v, tag):
        arc = (u, v)
        arcs.append(arc)
        capacity[arc] = 1
        provenance[arc] = tag

    for node in lam:
        add(SOURCE, node, ("source", "control", node[2]))
    for node in nu:
        add(SOURCE, node, ("source", "state", node[3]))
    for i, j in sorted(g.control_edges):
        for ell in range(1, kp1 + 1):
            for p in range(1, q + 1):
                add(("lam", ell, i), ("mu", p, j), ("edge", "control", i, j))
    for i, j in sorted(g.state_edges):
        for ell in range(1, kp1 + 1):
            for p in range(1, q + 1):
                add(("nu", ell, p, i), ("mu", p, j), ("edge", "state", i, j))
    for node in mu:
        add(node, SINK, ("sink", node[2]))
    return FlowNetwork("lifted", n, m, k, q, False, nodes, tuple(arcs), capacity, provenance)


def max_flow(net: FlowNetwork) -> FlowAssignment:
    """Exact integral maximum flow (deterministic phase-based blocking flow).

    Identical networks yield identical assignments: arcs are explored in
    construction order and augmentation follows fixed pointer advancement.
    """
    index = {v: i for i, v in enumerate(net.nodes)}
    size = len(net.nodes)
    adj: list[list[list[int]]] = [[] for _ in range(size)]  # [to, residual, rev_index]
    arc_pos: list[tuple[int, int]] = []
    for u, v in net.arcs:
        ui, vi = index[u], index[v]
        adj[ui].append([vi, net.capacity[(u, v)], len(adj[vi])])
        adj[vi].append([ui, 0, len(adj[ui]) - 1])
        arc_pos.append((ui, len(adj[ui]) - 1))
    s, t = index[SOURCE], index[SINK]

    def bfs_levels():
        level = [-1] * size
        level[s] = 0
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for e in adj[u]:
                if e[1] > 0 and level[e[0]] < 0:
                    level[e[0]] = level[u] + 1
                    dq.append(e[0])
        return level if level[t] >= 0 else None

    while (level := bfs_levels()) is not None:
        pointer = [0] * size
        path: list[tuple[int, list[int]]] = []  # (tail node, edge)
        u = s
        while True:
            if u == t:
                aug = min(e[1] for _, e in path)
                for _, e in path:
                    e[1] -= aug
                    adj[e[0]][e[2]][1] += aug
                path = []
                u = s
                continue
            advanced = False
            while pointer[u] < len(adj[u]):
                e = adj[u][pointer[u]]
                if e[1] > 0 and level[e[0]] == level[u] + 1:
                    path.append((u, e))
                    u = e[0]
                    advanced = True
                    break
                pointer[u] += 1
            if advanced:
                continue
            if u == s:
                break
            tail, _ = path.pop()
            pointer[tail] += 1
            u = tail

    values: dict[Arc, int] = {}
    for arc, (ui, ei) in zip(net.arcs, arc_pos):
        values[arc] = net.capacity[arc] - adj[ui][ei][1]
    total = sum(values[arc] for arc in net.arcs if arc[0] == SOURCE)
    return FlowAssignment(values, total)


def verify_flow(net: FlowNetwork, f: FlowAssignment) -> bool:
    """Exact check of the capacity and conservation constraint families."""
    if set(f.values.keys()) != set(net.arcs):
        raise ValueError("flow assignment arcs do not match the network arcs")
    inflow: dict[Node, int | Fraction] = {v: 0 for v in net.nodes}
    outflow: dict[Node, int | Fraction] = {v: 0 for v in net.nodes}
    for (u, v), x in f.values.items():
        if x < 0 or x > net.capacity[(u, v)]:
            return False
        outflow[u] = outflow[u] + x
        inflow[v] = inflow[v] + x
    for node in net.nodes:
        if node in (SOURCE, SINK):
            continue
        if inflow[node] != outflow[node]:
            return False
    return True


def min_cut(net: FlowNetwork, f: FlowAssignment) -> frozenset[Node]:
    """Source side of a minimum cut derived from a maximum flow.

    Returns the complement of the nodes that still reach the sink in the
    residual graph (the source-maximal min cut), so a saturated network yields
    the all-sink-arcs cut.  Raises ConsistencyError when the cut capacity does
    not equal the flow value, i.e. when f is not maximal.
    """
    if set(f.values.keys()) != set(net.arcs):
        raise ValueError("flow assignment arcs do not match the network arcs")
    into: dict[Node, list[Node]] = {v: [] for v in net.nodes}  # reversed residual arcs
    for (u, v), x in f.values.items():
        if x < net.capacity[(u, v)]:
            into[v].append(u)
        if x > 0:
            into[u].append(v)
    reach_t = {SINK}
    dq = deque([SINK])
    while dq:
        v = dq.popleft()
        for u in into[v]:
            if u not in reach_t:
                reach_t.add(u)
                dq.append(u)
    cut = frozenset(v for v in net.nodes if v not in reach_t)
    cut_capacity = sum(net.capacity[(u, v)] for u, v in net.arcs if u in cut and v not in cut)
    if SOURCE not in cut or cut_capacity != f.value_total:
        raise ConsistencyError(
            f"cut capacity {cut_capacity} != flow value {f.value_total}; flow is not maximal"
        )
    return cut


def phi_node(node: Node) -> Node:
    """Node-collapsing map from the expanded network onto the compact one."""
    if isinstance(node, tuple):
        return (node[0], node[-1])
    return node


def phi_arc(arc: Arc) -> Arc:
    return (phi_node(arc[0]), phi_node(arc[1]))


def _check_pairing(small: FlowNetwork, lifted: FlowNetwork) -> None:
    if small.kind != "small" or lifted.kind != "lifted":
        raise ValueError("expected one compact and one expanded network")
    if (small.n, small.m, small.k, small.q) != (lifted.n, lifted.m, lifted.k, lifted.q):
        raise ValueError("networks were not built from the same (g, k, q)")
    if small.witness_mode:
        raise ValueError("flow transfer requires standard capacities, not witness mode")


def project_flow(f_hat: FlowAssignment, lifted: FlowNetwork, small: FlowNetwork) -> FlowAssignment:
    """Push an expanded-network flow down along phi: each compact arc receives
    the sum over its fiber.  Feasibility and value are preserved."""
    _check_pairing(small, lifted)
    if set(f_hat.values.keys()) != set(lifted.arcs):
        raise ValueError("flow assignment arcs do not match the expanded network")
    out: dict[Arc, int | Fraction] = {arc: 0 for arc in small.arcs}
    for arc in lifted.arcs:
        image = phi_arc(arc)
        if image not in out:
            raise ConsistencyError(f"arc {arc} maps outside the compact network")
        out[image] = out[image] + f_hat.values[arc]
    total = sum(out[arc] for arc in small.arcs if arc[0] == SOURCE)
    return FlowAssignment(out, total)


def lift_flow(f: FlowAssignment, small: FlowNetwork, lifted: FlowNetwork) -> FlowAssignment:
    """Spread a compact-network flow up along phi: every expanded arc carries
    an equal share f(e) / |fiber(e)| of its image's flow.  Values may be
    non-integral rationals; the flow value is preserved exactly."""
    _check_pairing(small, lifted)
    if set(f.values.keys()) != set(small.arcs):
        raise ValueError("flow assignment arcs do not match the compact network")
    fiber = Counter(phi_arc(arc) for arc in lifted.arcs)
    values: dict[Arc, Fraction] = {}
    for arc in lifted.arcs:
        image = phi_arc(arc)
        values[arc] = Fraction(f.values[image]) / fiber[image]
    total = sum(values[arc] for arc in lifted.arcs if arc[0] == SOURCE)
    return FlowAssignment(values, total)


def node_name(node: Node) -> str:
    if isinstance(node, str):
        return node
    return "_".join([node[0], *map(str, node[1:])])


def _flow_json_value(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    return x


def network_to_dict(net: FlowNetwork, flow: FlowAssignment | None = None) -> dict:
    arcs = []
    for arc in net.arcs:
        entry = {"from": node_name(arc[0]), "to": node_name(arc[1]), "cap": net.capacity[arc]}
        if flow is not None:
            entry["flow"] = _flow_json_value(flow.values[arc])
        arcs.append(entry)
    return {
        "kind": net.kind,
        "n": net.n,
        "m": net.m,
        "k": net.k,
        "q": net.q,
        "witness_mode": net.witness_mode,
        "nodes": [node_name(v) for v in net.nodes],
        "arcs": arcs,
    }


def network_to_dot(net: FlowNetwork, flow: FlowAssignment | None = None) -> str:
    """DOT export with "cap" (or "flow/cap" after solving) edge labels."""
    lines = ["digraph flownet {", "  rankdir=LR;"]
    for v in net.nodes:
        shape = "diamond" if isinstance(v, str) else ("square" if v[0] == "lam" else "circle")
        lines.append(f'  "{node_name(v)}" [shape={shape}];')
    for arc in net.arcs:
        cap = net.capacity[arc]
        if flow is None:
            label = str(cap)
        else:
            label = f"{_flow_json_value(flow.values[arc])}/{cap}"
        lines.append(f'  "{node_name(arc[0])}" -> "{node_name(arc[1])}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
