//! Quasi-static fault currents on radial networks.
//!
//! Every connected piece of the network is a tree, so the nodal equations
//! are solved by collapsing subtrees into Norton equivalents (leaves to
//! root), then recovering voltages and branch currents root to leaves.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::network::{FaultElement, FaultScenario, RadialNetwork};
use crate::error::{Error, Result, Validate};

/// Share of the fault current owed to each source, obtained by solving with
/// only that source active.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FaultContributions {
    pub grid: f64,
    pub ders: BTreeMap<String, f64>,
    /// Combined effect of all loads (usually negative).
    pub loads: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSolution {
    /// Current into the fault; 0 for a healthy network.
    pub i_fault: f64,
    /// Current delivered by the external source.
    pub i_grid: f64,
    /// Bus voltages; `None` for buses in islands with no voltage reference.
    pub voltages: BTreeMap<String, Option<f64>>,
    /// Current magnitude seen at the breaker end of each line.
    pub branch_currents: BTreeMap<String, f64>,
    /// Signed current at the breaker end, positive from `from` to `to`.
    pub branch_flows: BTreeMap<String, f64>,
    /// For a line fault, the signed current from the fault point to `to`.
    pub far_end_flow: Option<f64>,
    /// Actual DER injections after island balancing.
    pub der_injections: BTreeMap<String, f64>,
    /// Served current per load, in input order.
    pub load_currents: Vec<f64>,
    pub contributions: FaultContributions,
}

pub(crate) struct Edge {
    pub a: usize,
    pub b: usize,
    pub z: f64,
    pub line: usize,
    /// The segment a breaker on this line interrupts.
    pub breaker_end: bool,
}

/// Network graph with an optional extra node for a fault inside a line.
pub(crate) struct Graph {
    pub nodes: usize,
    pub edges: Vec<Edge>,
    pub fault: Option<usize>,
    pub closed: Vec<bool>,
}

impl Graph {
    pub fn build(net: &RadialNetwork, fault: &FaultScenario, open: &BTreeSet<String>) -> Self {
        let n = net.buses.len();
        let healthy = fault.is_healthy();
        let mut edges = Vec::with_capacity(net.lines.len() + 1);
        let mut fault_node = None;
        let mut nodes = n;
        for (li, l) in net.lines.iter().enumerate() {
            let a = net.bus_index(&l.from).expect("validated");
            let b = net.bus_index(&l.to).expect("validated");
            match &fault.element {
                FaultElement::Line { id, position } if !healthy && *id == l.id => {
                    let f = n;
                    nodes = n + 1;
                    fault_node = Some(f);
                    edges.push(Edge { a, b: f, z: position * l.impedance, line: li, breaker_end: true });
                    edges.push(Edge { a: f, b, z: (1.0 - position) * l.impedance, line: li, breaker_end: false });
                }
                _ => edges.push(Edge { a, b, z: l.impedance, line: li, breaker_end: true }),
            }
        }
        if !healthy {
            if let FaultElement::Bus(bus) = &fault.element {
                fault_node = net.bus_index(bus);
            }
        }
        let open_lines: BTreeSet<&str> = net
            .breakers
            .iter()
            .filter(|b| open.contains(&b.id))
            .map(|b| b.line.as_str())
            .collect();
        let closed = edges
            .iter()
            .map(|e| !(e.breaker_end && open_lines.contains(net.lines[e.line].id.as_str())))
            .collect();
        Self { nodes, edges, fault: fault_node, closed }
    }

    /// Per node, (neighbour, edge index) over closed edges only, or over
    /// every edge when `all` is set.
    pub fn adjacency(&self, all: bool) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for (ei, e) in self.edges.iter().enumerate() {
            if all || self.closed[ei] {
                adj[e.a].push((e.b, ei));
                adj[e.b].push((e.a, ei));
            }
        }
        adj
    }

    /// Component label per node over closed edges.
    pub fn components(&self) -> Vec<usize> {
        label_components(&self.adjacency(false), self.nodes)
    }
}

pub(crate) fn label_components(adj: &[Vec<(usize, usize)>], nodes: usize) -> Vec<usize> {
    let mut comp = vec![usize::MAX; nodes];
    let mut next = 0;
    for s in 0..nodes {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut stack = vec![s];
        while let Some(n) = stack.pop() {
            for &(m, _) in &adj[n] {
                if comp[m] == usize::MAX {
                    comp[m] = next;
                    stack.push(m);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Breadth-first tree over closed edges from `root`: visit order and the
/// (parent, edge) link of every visited node.
fn spanning_tree(adj: &[Vec<(usize, usize)>], root: usize) -> (Vec<usize>, Vec<Option<(usize, usize)>>) {
    let mut parent = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut order = vec![root];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(n) = queue.pop_front() {
        for &(m, ei) in &adj[n] {
            if !seen[m] {
                seen[m] = true;
                parent[m] = Some((n, ei));
                order.push(m);
                queue.push_back(m);
            }
        }
    }
    (order, parent)
}

/// Current from `parent` into `child` along `edge`, signed in the edge's
/// own a→b direction.
fn oriented(edges: &[Edge], ei: usize, parent: usize, j: f64) -> f64 {
    if edges[ei].a == parent {
        j
    } else {
        -j
    }
}

/// Solves one grounded tree. `fixed` pins the root voltage (bolted fault);
/// otherwise the root must carry a shunt. Writes node voltages and signed
/// edge flows.
#[allow(clippy::too_many_arguments)]
fn solve_tree(
    graph: &Graph,
    adj: &[Vec<(usize, usize)>],
    root: usize,
    fixed: Option<f64>,
    g: &[f64],
    inj: &[f64],
    v: &mut [f64],
    flow: &mut [f64],
) -> Result<()> {
    let (order, parent) = spanning_tree(adj, root);
    let mut big_g = vec![0.0; graph.nodes];
    let mut big_i = vec![0.0; graph.nodes];
    for &n in &order {
        big_g[n] = g[n];
        big_i[n] = inj[n];
    }
    // Leaves to root: fold each subtree into its parent through the line.
    let mut seen_g = vec![0.0; graph.nodes];
    let mut seen_i = vec![0.0; graph.nodes];
    for &n in order.iter().rev() {
        if let Some((p, ei)) = parent[n] {
            let z = graph.edges[ei].z;
            let d = 1.0 + z * big_g[n];
            seen_g[n] = big_g[n] / d;
            seen_i[n] = big_i[n] / d;
            big_g[p] += seen_g[n];
            big_i[p] += seen_i[n];
        }
    }
    v[root] = match fixed {
        Some(x) => x,
        None => {
            if !(big_g[root] > 0.0) {
                return Err(Error::Numerical {
                    bus: root.to_string(),
                    detail: format!("reduced conductance {} at the reference node", big_g[root]),
                });
            }
            big_i[root] / big_g[root]
        }
    };
    // Root to leaves.
    for &n in order.iter().skip(1) {
        let (p, ei) = parent[n].expect("non-root");
        let j = seen_g[n] * v[p] - seen_i[n];
        v[n] = v[p] - graph.edges[ei].z * j;
        flow[ei] = oriented(&graph.edges, ei, p, j);
    }
    Ok(())
}

/// Net current leaving `node` into the network through closed edges.
fn outflow(graph: &Graph, adj: &[Vec<(usize, usize)>], node: usize, flow: &[f64]) -> f64 {
    adj[node]
        .iter()
        .map(|&(_, ei)| if graph.edges[ei].a == node { flow[ei] } else { -flow[ei] })
        .sum()
}

struct Electrical {
    g: Vec<f64>,
    grid: Vec<f64>,
    der: Vec<Vec<(String, f64)>>,
    load: Vec<Vec<(usize, f64)>>,
}

impl Electrical {
    fn new(net: &RadialNetwork, graph: &Graph, fault: &FaultScenario) -> Self {
        let mut g = vec![0.0; graph.nodes];
        let mut grid = vec![0.0; graph.nodes];
        let s = net.bus_index(&net.source.bus).expect("validated");
        if net.source.available {
            g[s] += 1.0 / net.source.impedance;
            grid[s] += net.source.voltage / net.source.impedance;
        }
        if let Some(f) = graph.fault {
            if fault.impedance > 0.0 && fault.impedance.is_finite() {
                g[f] += 1.0 / fault.impedance;
            }
        }
        let mut der = vec![Vec::new(); graph.nodes];
        for d in net.ders.iter().filter(|d| d.injecting) {
            der[net.bus_index(&d.bus).expect("validated")].push((d.id.clone(), d.i_der));
        }
        let mut load = vec![Vec::new(); graph.nodes];
        for (i, l) in net.loads.iter().enumerate() {
            load[net.bus_index(&l.bus).expect("validated")].push((i, l.current));
        }
        Self { g, grid, der, load }
    }

    fn total(&self, n: usize) -> f64 {
        self.grid[n] + self.der[n].iter().map(|x| x.1).sum::<f64>() - self.load[n].iter().map(|x| x.1).sum::<f64>()
    }
}

/// Solves the network with every breaker closed.
///
/// Errors when the fault point has no path to the source bus.
pub fn solve_fault_currents(net: &RadialNetwork, fault: &FaultScenario) -> Result<FaultSolution> {
    solve_with_open(net, fault, &BTreeSet::new())
}

/// Solves the network with the breakers in `open` opened. The reachability
/// check still uses the full line graph, so a fault isolated by trips is
/// solved rather than rejected.
pub fn solve_with_open(
    net: &RadialNetwork,
    fault: &FaultScenario,
    open: &BTreeSet<String>,
) -> Result<FaultSolution> {
    let mut v = net.violations();
    v.extend(fault.violations_for(net));
    v.into_result()?;

    let graph = Graph::build(net, fault, open);
    let src = net.bus_index(&net.source.bus).expect("validated");
    if let Some(f) = graph.fault {
        let all = label_components(&graph.adjacency(true), graph.nodes);
        if all[f] != all[src] {
            return Err(Error::UnreachableFault(fault.label()));
        }
    }
    let bolted = graph.fault.is_some() && fault.impedance == 0.0;
    let el = Electrical::new(net, &graph, fault);
    let adj = graph.adjacency(false);
    let comp = graph.components();
    let n_comp = comp.iter().copied().max().map_or(0, |m| m + 1);

    let mut volts = vec![f64::NAN; graph.nodes];
    let mut flow = vec![0.0; graph.edges.len()];
    let mut der_out: BTreeMap<String, f64> = net.ders.iter().map(|d| (d.id.clone(), 0.0)).collect();
    let mut load_out = vec![0.0; net.loads.len()];
    // Constant-current loads only draw while something in their component
    // drives current.
    let mut live = vec![false; n_comp];
    for n in 0..graph.nodes {
        if el.grid[n] != 0.0 || el.der[n].iter().any(|x| x.1 > 0.0) {
            live[comp[n]] = true;
        }
    }
    let inj: Vec<f64> = (0..graph.nodes)
        .map(|n| if live[comp[n]] { el.total(n) } else { 0.0 })
        .collect();

    #[allow(clippy::needless_range_loop)]
    for c in 0..n_comp {
        let members: Vec<usize> = (0..graph.nodes).filter(|&n| comp[n] == c).collect();
        let fault_here = graph.fault.filter(|f| comp[*f] == c);
        let root = match fault_here {
            Some(f) if bolted || el.g[f] > 0.0 => Some(f),
            _ => members.iter().copied().find(|&n| el.g[n] > 0.0),
        };
        match root {
            Some(r) => {
                let fixed = (bolted && Some(r) == fault_here).then_some(0.0);
                solve_tree(&graph, &adj, r, fixed, &el.g, &inj, &mut volts, &mut flow)?;
                for &n in members.iter().filter(|_| live[c]) {
                    for (id, i) in &el.der[n] {
                        der_out.insert(id.clone(), *i);
                    }
                    for &(li, i) in &el.load[n] {
                        load_out[li] = i;
                    }
                }
            }
            None => {
                // No voltage reference: sources and sinks can only balance
                // each other, so both are curtailed to the smaller total.
                let supply: f64 = members.iter().flat_map(|&n| el.der[n].iter().map(|x| x.1)).sum();
                let demand: f64 = members.iter().flat_map(|&n| el.load[n].iter().map(|x| x.1)).sum();
                let served = supply.min(demand);
                let ks = if supply > 0.0 { served / supply } else { 0.0 };
                let kd = if demand > 0.0 { served / demand } else { 0.0 };
                let mut net_inj = vec![0.0; graph.nodes];
                for &n in &members {
                    for (id, i) in &el.der[n] {
                        der_out.insert(id.clone(), i * ks);
                        net_inj[n] += i * ks;
                    }
                    for &(li, i) in &el.load[n] {
                        load_out[li] = i * kd;
                        net_inj[n] -= i * kd;
                    }
                }
                let (order, parent) = spanning_tree(&adj, members[0]);
                for &n in order.iter().rev() {
                    if let Some((p, ei)) = parent[n] {
                        flow[ei] = oriented(&graph.edges, ei, p, -net_inj[n]);
                        net_inj[p] += net_inj[n];
                    }
                }
            }
        }
    }

    let i_fault_from = |volts: &[f64], flow: &[f64], inj: &[f64]| match graph.fault {
        None => 0.0,
        Some(f) if bolted => inj[f] - outflow(&graph, &adj, f, flow),
        Some(f) if fault.impedance.is_finite() => volts[f] / fault.impedance,
        Some(_) => 0.0,
    };
    let i_fault = i_fault_from(&volts, &flow, &inj);
    let i_grid = if net.source.available {
        let vs = volts[src];
        let vs = if vs.is_nan() { 0.0 } else { vs };
        (net.source.voltage - vs) / net.source.impedance
    } else {
        0.0
    };

    // Superposition: the fault component solved once per source.
    let mut contributions = FaultContributions {
        ders: net.ders.iter().map(|d| (d.id.clone(), 0.0)).collect(),
        ..Default::default()
    };
    if let Some(f) = graph.fault {
        let c = comp[f];
        let fixed = bolted.then_some(0.0);
        let single = |inj: Vec<f64>| -> Result<f64> {
            let mut v2 = vec![f64::NAN; graph.nodes];
            let mut fl2 = vec![0.0; graph.edges.len()];
            solve_tree(&graph, &adj, f, fixed, &el.g, &inj, &mut v2, &mut fl2)?;
            Ok(i_fault_from(&v2, &fl2, &inj))
        };
        if live[c] && (bolted || el.g[f] > 0.0) {
            let mask = |n: usize| comp[n] == c;
            contributions.grid = single((0..graph.nodes).map(|n| if mask(n) { el.grid[n] } else { 0.0 }).collect())?;
            let mut load_inj = vec![0.0; graph.nodes];
            for n in (0..graph.nodes).filter(|&n| mask(n)) {
                load_inj[n] = -el.load[n].iter().map(|x| x.1).sum::<f64>();
                for (id, i) in &el.der[n] {
                    let mut one = vec![0.0; graph.nodes];
                    one[n] = *i;
                    contributions.ders.insert(id.clone(), single(one)?);
                }
            }
            contributions.loads = single(load_inj)?;
        }
    }

    let mut branch_flows = BTreeMap::new();
    let mut far_end_flow = None;
    for (ei, e) in graph.edges.iter().enumerate() {
        if e.breaker_end {
            branch_flows.insert(net.lines[e.line].id.clone(), flow[ei]);
        } else {
            far_end_flow = Some(flow[ei]);
        }
    }
    let branch_currents = branch_flows.iter().map(|(k, x)| (k.clone(), x.abs())).collect();
    let voltages = net
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| (b.clone(), (!volts[i].is_nan()).then_some(volts[i])))
        .collect();

    let check = [i_fault, i_grid]
        .into_iter()
        .chain(flow.iter().copied())
        .chain(contributions.ders.values().copied())
        .all(f64::is_finite);
    if !check {
        return Err(Error::Numerical {
            bus: net.source.bus.clone(),
            detail: "non-finite current in solution".into(),
        });
    }

    Ok(FaultSolution {
        i_fault,
        i_grid,
        voltages,
        branch_currents,
        branch_flows,
        far_end_flow,
        der_injections: der_out,
        load_currents: load_out,
        contributions,
    })
}
