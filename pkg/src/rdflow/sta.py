"""Lite static timing: graph build, forward propagation, slack.

The timer works on a mapped netlist with a cell timing library. Wires add
lumped capacitance at the driver and no delay by default; an optional
distance-based RC model can supply per-sink net delays. Flip-flops cut the
graph: data pins are path endpoints, output pins restart paths at time 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    CombinationalLoop, EmptyGraph, NoClock, UnmappedCell, ZeroDelay,
)
from .io.verilog import Netlist
from .model import Constraints, Design
from .timinglib import TimingArc, TimingLibrary

DEFAULT_INPUT_SLEW = 5.0  # ps, used when no driving cell is given


@dataclass
class TimingNode:
    name: str  # "instance/pin" for cell pins, the bare name for ports
    arrival: float | None = None
    slew: float | None = None
    required: float | None = None
    slack: float | None = None


@dataclass
class TimingEdge:
    src: str
    dst: str
    kind: str  # "cell" | "net"
    arc: TimingArc | None = None
    net: str = ""
    delay: float = 0.0  # filled in by propagate


@dataclass
class TimingGraph:
    lib: TimingLibrary
    constraints: Constraints | None = None
    nodes: dict[str, TimingNode] = field(default_factory=dict)
    edges: list[TimingEdge] = field(default_factory=list)
    in_edges: dict[str, list[TimingEdge]] = field(default_factory=dict)
    out_edges: dict[str, list[TimingEdge]] = field(default_factory=dict)
    startpoints: list[str] = field(default_factory=list)
    endpoints: list[str] = field(default_factory=list)
    net_loads: dict[str, float] = field(default_factory=dict)  # fF
    drive_loads: dict[str, float] = field(default_factory=dict)  # node -> fF
    port_nets: dict[str, str] = field(default_factory=dict)
    topo: list[str] = field(default_factory=list)
    propagated: bool = False
    wns: float | None = None
    tns: float | None = None
    clock_period: float | None = None
    warnings: list[str] = field(default_factory=list)

    def node(self, name: str) -> TimingNode:
        n = self.nodes.get(name)
        if n is None:
            n = TimingNode(name)
            self.nodes[name] = n
            self.in_edges[name] = []
            self.out_edges[name] = []
        return n

    def add_edge(self, edge: TimingEdge):
        self.edges.append(edge)
        self.out_edges[edge.src].append(edge)
        self.in_edges[edge.dst].append(edge)


def _netlist_view(source):
    """Uniform (ports, cells, port_net) view of a Netlist or a Design.

    ports: list of (name, direction); cells: list of
    (instance, cell name, [(pin, net)]); port_net maps a port to the net
    it touches.
    """
    if isinstance(source, Netlist):
        ports = list(source.ports)
        cells = [(inst.name, inst.master, list(inst.connections))
                 for inst in source.instances]
        port_net = {name: name for name, _ in source.ports}
        return ports, cells, port_net
    if isinstance(source, Design):
        ports = [(p.name, p.direction) for p in source.ports.values()]
        pin_net: dict[tuple[str, str], str] = {}
        port_net: dict[str, str] = {}
        for net in source.nets.values():
            for np in net.pins:
                if np.instance is None:
                    port_net[np.pin] = net.name
                else:
                    pin_net[(np.instance, np.pin)] = net.name
        cells = []
        for inst in source.instances.values():
            conns = sorted((pin, net) for (iname, pin), net in pin_net.items()
                           if iname == inst.name)
            cells.append((inst.name, inst.master_name, conns))
        for name in source.ports:
            port_net.setdefault(name, name)
        return ports, cells, port_net
    raise TypeError(f"cannot time a {type(source).__name__}")


def build_timing_graph(source, lib: TimingLibrary,
                       constraints: Constraints | None = None) -> TimingGraph:
    """Build the pin-level timing graph for a mapped netlist.

    Cell arcs come from the library; every driven net adds one edge from
    its driver to each sink. Sequential cells contribute no arcs: their
    data pins end paths and their outputs start new ones at time zero.
    """
    ports, cells, port_net = _netlist_view(source)
    g = TimingGraph(lib=lib, constraints=constraints, port_nets=port_net)

    drivers: dict[str, list[str]] = {}  # net -> driving nodes
    sinks: dict[str, list[tuple[str, float]]] = {}  # net -> (node, cap fF)

    for name, direction in sorted(ports):
        g.node(name)
        net = port_net[name]
        if direction == "input":
            drivers.setdefault(net, []).append(name)
            g.startpoints.append(name)
        else:
            load = 0.0
            if constraints is not None:
                load = constraints.output_loads.get(name, 0.0)
            sinks.setdefault(net, []).append((name, load))
            g.endpoints.append(name)

    for inst, cell_name, conns in sorted(cells):
        cell = lib.cells.get(cell_name)
        if cell is None:
            raise UnmappedCell(cell_name)
        connected = {}
        for pin, net in conns:
            lp = cell.pins.get(pin)
            if lp is None:
                g.warnings.append(f"{inst}: pin '{pin}' not in cell {cell_name}")
                continue
            node = f"{inst}/{pin}"
            g.node(node)
            connected[pin] = node
            if lp.direction == "input":
                sinks.setdefault(net, []).append((node, lp.capacitance))
            else:
                drivers.setdefault(net, []).append(node)
        if cell.is_sequential:
            for pin, node in sorted(connected.items()):
                lp = cell.pins[pin]
                if lp.direction == "output":
                    g.startpoints.append(node)
                elif pin in cell.data_pins:
                    g.endpoints.append(node)
        else:
            for arc in cell.arcs:
                src = connected.get(arc.from_pin)
                dst = connected.get(arc.to_pin)
                if src is not None and dst is not None:
                    g.add_edge(TimingEdge(src, dst, "cell", arc=arc))

    for net in sorted(set(drivers) | set(sinks)):
        net_sinks = sinks.get(net, [])
        load = sum(cap for _, cap in net_sinks)
        g.net_loads[net] = load
        net_drivers = drivers.get(net, [])
        if not net_drivers:
            if net_sinks:
                g.warnings.append(f"net '{net}' has no driver")
            continue
        if len(net_drivers) > 1:
            g.warnings.append(f"net '{net}' has {len(net_drivers)} drivers")
        for drv in net_drivers:
            g.drive_loads[drv] = load
            for sink, _ in sorted(net_sinks):
                g.add_edge(TimingEdge(drv, sink, "net", net=net))

    g.topo = _topological_order(g)
    return g


def _topological_order(g: TimingGraph) -> list[str]:
    missing = {name: len(g.in_edges[name]) for name in g.nodes}
    ready = sorted((n for n, k in missing.items() if k == 0), reverse=True)
    order: list[str] = []
    while ready:
        name = ready.pop()
        order.append(name)
        for e in g.out_edges[name]:
            missing[e.dst] -= 1
            if missing[e.dst] == 0:
                ready.append(e.dst)
        ready.sort(reverse=True)
    if len(order) != len(g.nodes):
        raise CombinationalLoop(_find_cycle(g, {n for n, k in missing.items() if k > 0}))
    return order


def _find_cycle(g: TimingGraph, leftover: set[str]) -> list[str]:
    # every leftover node keeps at least one leftover predecessor, so a
    # backward walk must revisit a node; that revisit closes the cycle
    start = min(leftover)
    path = [start]
    seen = {start}
    cur = start
    while True:
        prev = min(e.src for e in g.in_edges[cur] if e.src in leftover)
        if prev in seen:
            cycle = path[path.index(prev):]
            cycle.reverse()
            return [prev] + cycle
        path.append(prev)
        seen.add(prev)
        cur = prev


def _clamped_lookup(g, table, slew, load):
    if not (table.slew_axis[0] <= slew <= table.slew_axis[-1]
            and table.load_axis[0] <= load <= table.load_axis[-1]):
        msg = "table lookup outside characterized range, clamped to boundary"
        if msg not in g.warnings:
            g.warnings.append(msg)
    return table.lookup(slew, load)


def _port_input_slew(g: TimingGraph, port: str) -> float:
    c = g.constraints
    if c is None or port not in c.input_drivers:
        return DEFAULT_INPUT_SLEW
    cell_name, pin = c.input_drivers[port]
    cell = g.lib.cells.get(cell_name)
    if cell is None:
        raise UnmappedCell(cell_name)
    load = g.net_loads.get(g.port_nets.get(port, port), 0.0)
    slews = [_clamped_lookup(g, arc.out_slew, DEFAULT_INPUT_SLEW, load)
             for arc in cell.arcs_to(pin)]
    if not slews:
        g.warnings.append(f"driver {cell_name}/{pin} of '{port}' has no arcs")
        return DEFAULT_INPUT_SLEW
    return max(slews)


def propagate(g: TimingGraph,
              net_delays: dict[tuple[str, str], float] | None = None,
              ) -> TimingGraph:
    """Forward pass: arrivals and slews in topological order.

    Arrival at a node is the max over in-edges of source arrival plus edge
    delay; slew is the max over in-edges. net_delays, when given, maps
    (net name, sink node) to a wire delay in ps; absent entries are 0.
    """
    best_pred: dict[str, str] = {}
    for name in g.topo:
        node = g.nodes[name]
        if not g.in_edges[name]:
            node.arrival = 0.0
            node.slew = _port_input_slew(g, name) if "/" not in name \
                else DEFAULT_INPUT_SLEW
        for e in g.out_edges[name]:
            if e.kind == "cell":
                load = g.drive_loads.get(e.dst, 0.0)
                e.delay = _clamped_lookup(g, e.arc.delay, node.slew, load)
                out_slew = _clamped_lookup(g, e.arc.out_slew, node.slew, load)
            else:
                e.delay = 0.0
                if net_delays is not None:
                    e.delay = net_delays.get((e.net, e.dst), 0.0)
                out_slew = node.slew
            dst = g.nodes[e.dst]
            candidate = node.arrival + e.delay
            if dst.arrival is None or candidate > dst.arrival \
                    or (candidate == dst.arrival and name < best_pred[e.dst]):
                dst.arrival = candidate
                best_pred[e.dst] = name
            dst.slew = out_slew if dst.slew is None else max(dst.slew, out_slew)
    g.propagated = True
    g._best_pred = best_pred
    return g


def critical_path(g: TimingGraph) -> tuple[list[str], float]:
    """Longest-arrival endpoint traced back to its startpoint.

    Ties pick the lexicographically smaller pin name at every step.
    """
    if not g.propagated:
        propagate(g)
    candidates = [name for name in g.endpoints
                  if g.nodes[name].arrival is not None]
    if not candidates:
        raise EmptyGraph("no timed endpoints")
    end = min(candidates, key=lambda n: (-g.nodes[n].arrival, n))
    path = [end]
    while path[-1] in g._best_pred:
        path.append(g._best_pred[path[-1]])
    path.reverse()
    return path, g.nodes[end].arrival


def derive_clock_period(g: TimingGraph) -> float:
    """80% of the critical path delay, rounded to the nearest picosecond."""
    _, delay = critical_path(g)
    if delay <= 0:
        raise ZeroDelay("critical path delay is zero")
    return float(round(0.8 * delay))


def compute_slack(g: TimingGraph,
                  constraints: Constraints | None = None) -> TimingGraph:
    """Backward pass: required times, per-node slack, WNS and TNS.

    The clock period is the required time at every endpoint; internal
    nodes take the min over fanout of required minus edge delay.
    """
    c = constraints if constraints is not None else g.constraints
    if c is None or c.clock_period is None:
        raise NoClock("no clock period given")
    if not g.propagated:
        propagate(g)
    period = float(c.clock_period)
    g.clock_period = period
    for node in g.nodes.values():
        node.required = None
    for name in g.endpoints:
        g.nodes[name].required = period
    for name in reversed(g.topo):
        node = g.nodes[name]
        for e in g.out_edges[name]:
            dst = g.nodes[e.dst]
            if dst.required is None:
                continue
            r = dst.required - e.delay
            if node.required is None or r < node.required:
                node.required = r
        if node.required is not None and node.arrival is not None:
            node.slack = node.required - node.arrival
    endpoint_slacks = [g.nodes[n].slack for n in g.endpoints
                       if g.nodes[n].slack is not None]
    g.wns = min(endpoint_slacks) if endpoint_slacks else None
    g.tns = sum(min(0.0, s) for s in endpoint_slacks) if endpoint_slacks else None
    return g


def rc_net_delays(design: Design, lib: TimingLibrary,
                  r_per_dbu: float, c_per_dbu: float,
                  constraints: Constraints | None = None,
                  ) -> dict[tuple[str, str], float]:
    """Distance-based wire delays: (net, sink node) -> ps.

    Each sink sees r*L*(c*L/2 + sink cap) with L the Manhattan distance
    from the net's driver, a single-segment RC estimate from placement.
    """
    out: dict[tuple[str, str], float] = {}
    if r_per_dbu == 0.0 and c_per_dbu == 0.0:
        return out
    for net in design.nets.values():
        driver_pos = None
        sink_list = []
        for np in net.pins:
            if np.instance is None:
                port = design.ports.get(np.pin)
                direction = port.direction if port else "input"
                cap = 0.0
                if constraints is not None:
                    cap = constraints.output_loads.get(np.pin, 0.0)
                entry = (np.pin, cap)
            else:
                inst = design.instances[np.instance]
                cell = lib.cells.get(inst.master_name)
                if cell is None:
                    raise UnmappedCell(inst.master_name)
                lp = cell.pins.get(np.pin)
                if lp is None:
                    continue
                direction = lp.direction
                cap = lp.capacitance
                entry = (f"{np.instance}/{np.pin}", cap)
            is_driver = (np.instance is None and direction == "input") or \
                (np.instance is not None and direction == "output")
            if is_driver:
                driver_pos = design.pin_position(np)
            else:
                sink_list.append((entry, np))
        if driver_pos is None:
            continue
        for (node, cap), np in sink_list:
            pos = design.pin_position(np)
            dist = abs(pos.x - driver_pos.x) + abs(pos.y - driver_pos.y)
            out[(net.name, node)] = r_per_dbu * dist * (c_per_dbu * dist / 2 + cap)
    return out


def timing_report(g: TimingGraph) -> str:
    """Human-readable and machine-stable summary of the timed graph."""
    lines = []
    path, delay = critical_path(g)
    lines.append(f"critical path delay: {delay:.3f} ps")
    if g.clock_period is not None:
        lines.append(f"clock period: {g.clock_period:.3f} ps")
    if g.wns is not None:
        lines.append(f"WNS: {g.wns:.3f} ps")
    if g.tns is not None:
        lines.append(f"TNS: {g.tns:.3f} ps")
    lines.append("wire delay model: lumped load, zero wire delay "
                 "unless RC delays were supplied")
    lines.append(f"critical path ({len(path)} pins):")
    prev = None
    for name in path:
        node = g.nodes[name]
        step = ""
        if prev is not None:
            edge = max((e for e in g.in_edges[name] if e.src == prev),
                       key=lambda e: e.delay)
            step = f"  +{edge.delay:.3f} ({edge.kind})"
        lines.append(f"  {name}  arrival {node.arrival:.3f}{step}")
        prev = name
    for w in g.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"
