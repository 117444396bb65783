//! Shared fixtures for integration tests: random radial networks and a
//! dense nodal solve used as the fault-current oracle.

#![allow(dead_code)]

use std::collections::BTreeMap;

use gridres_core::protection::{
    Breaker, DerSource, FaultElement, FaultScenario, Line, Load, RadialNetwork, Source,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Connected random tree on 2..=6 buses, source at `n0`, with random DER,
/// loads and a fault on a random bus or line.
pub fn random_case(rng: &mut impl Rng) -> (RadialNetwork, FaultScenario) {
    let n = rng.random_range(2..=6);
    let buses: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut lines = Vec::new();
    for i in 1..n {
        let parent = rng.random_range(0..i);
        lines.push(Line {
            id: format!("l{i}"),
            from: buses[parent].clone(),
            to: buses[i].clone(),
            impedance: rng.random_range(0.01..1.0),
        });
    }
    let mut ders = Vec::new();
    for k in 0..rng.random_range(0..=3) {
        ders.push(DerSource {
            id: format!("d{k}"),
            bus: buses[rng.random_range(0..n)].clone(),
            i_der: rng.random_range(0.0..2.0),
            injecting: true,
        });
    }
    let mut loads = Vec::new();
    for _ in 0..rng.random_range(0..=3) {
        loads.push(Load {
            bus: buses[rng.random_range(0..n)].clone(),
            current: rng.random_range(0.0..0.3),
        });
    }
    let breakers = lines
        .iter()
        .map(|l| Breaker {
            id: format!("b_{}", l.id),
            line: l.id.clone(),
            i_trip: 1.0,
            delay: 0.1,
        })
        .collect();
    let net = RadialNetwork {
        schema_version: 1,
        buses: buses.clone(),
        source: Source {
            bus: buses[0].clone(),
            voltage: 1.0,
            impedance: rng.random_range(0.01..0.5),
            available: true,
        },
        lines,
        ders,
        breakers,
        loads,
    };
    let impedance = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.001..1.0) };
    let element = if rng.random_bool(0.5) {
        FaultElement::Bus(buses[rng.random_range(0..n)].clone())
    } else {
        FaultElement::Line {
            id: format!("l{}", rng.random_range(1..n)),
            position: rng.random_range(0.05..0.95),
        }
    };
    (net, FaultScenario { element, impedance })
}

/// Reference solution from the full nodal matrix.
pub struct Dense {
    pub i_fault: f64,
    pub i_grid: f64,
    pub voltages: BTreeMap<String, f64>,
    /// Current magnitude at the `from` end of every line.
    pub branch_currents: BTreeMap<String, f64>,
}

/// Solves `Y v = i` for a connected network with the source available.
/// A line fault adds a node splitting the line at the fault position.
pub fn dense_solve(net: &RadialNetwork, fault: &FaultScenario) -> Dense {
    let mut names: Vec<String> = net.buses.clone();
    let idx = |names: &[String], b: &str| names.iter().position(|x| x == b).unwrap();
    // (a, b, z, line id of the from-end segment)
    let mut branches: Vec<(usize, usize, f64, Option<String>)> = Vec::new();
    let fault_node = match &fault.element {
        FaultElement::Bus(b) => idx(&names, b),
        FaultElement::Line { .. } => {
            names.push("fault".into());
            names.len() - 1
        }
    };
    for l in &net.lines {
        let (a, b) = (idx(&names, &l.from), idx(&names, &l.to));
        match &fault.element {
            FaultElement::Line { id, position } if *id == l.id => {
                branches.push((a, fault_node, l.impedance * position, Some(l.id.clone())));
                branches.push((fault_node, b, l.impedance * (1.0 - position), None));
            }
            _ => branches.push((a, b, l.impedance, Some(l.id.clone()))),
        }
    }
    let n = names.len();
    let mut y = DMatrix::<f64>::zeros(n, n);
    let mut inj = DVector::<f64>::zeros(n);
    for &(a, b, z, _) in &branches {
        let g = 1.0 / z;
        y[(a, a)] += g;
        y[(b, b)] += g;
        y[(a, b)] -= g;
        y[(b, a)] -= g;
    }
    let s = idx(&names, &net.source.bus);
    y[(s, s)] += 1.0 / net.source.impedance;
    inj[s] += net.source.voltage / net.source.impedance;
    for d in net.ders.iter().filter(|d| d.injecting) {
        inj[idx(&names, &d.bus)] += d.i_der;
    }
    for l in &net.loads {
        inj[idx(&names, &l.bus)] -= l.current;
    }
    let bolted = fault.impedance == 0.0;
    let v = if bolted {
        // Pin the fault node to 0 by replacing its equation.
        let mut yb = y.clone();
        let mut ib = inj.clone();
        for j in 0..n {
            yb[(fault_node, j)] = 0.0;
        }
        yb[(fault_node, fault_node)] = 1.0;
        ib[fault_node] = 0.0;
        yb.lu().solve(&ib).expect("nonsingular")
    } else {
        let mut yf = y.clone();
        yf[(fault_node, fault_node)] += 1.0 / fault.impedance;
        yf.lu().solve(&inj).expect("nonsingular")
    };
    let i_fault = if bolted {
        // KCL at the fault node: injections minus what leaves through the
        // network, with v[f] = 0.
        (inj[fault_node] - (&y * &v)[fault_node]).abs()
    } else {
        (v[fault_node] / fault.impedance).abs()
    };
    let mut branch_currents = BTreeMap::new();
    for (a, b, z, line) in &branches {
        if let Some(id) = line {
            branch_currents.insert(id.clone(), ((v[*a] - v[*b]) / z).abs());
        }
    }
    Dense {
        i_fault,
        i_grid: (net.source.voltage - v[s]) / net.source.impedance,
        voltages: net.buses.iter().map(|b| (b.clone(), v[idx(&names, b)])).collect(),
        branch_currents,
    }
}

/// Norm-wise relative error `max|a - b| / max|b|`, with an absolute floor
/// for all-zero references.
pub fn rel_err(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for (a, b) in pairs {
        num = num.max((a - b).abs());
        den = den.max(b.abs());
    }
    num / den.max(1e-12)
}

/// Worst relative error of the tree solver against the dense solve. All
/// currents (fault, grid, breaker ends) form one vector and the voltages
/// another, so lines carrying numerically zero current are judged against
/// the solution's current scale.
pub fn solver_error(net: &RadialNetwork, fault: &FaultScenario) -> f64 {
    let tree = gridres_core::protection::solve_fault_currents(net, fault).expect("solvable");
    let dense = dense_solve(net, fault);
    let mut currents = vec![(tree.i_fault, dense.i_fault), (tree.i_grid, dense.i_grid)];
    currents.extend(dense.branch_currents.iter().map(|(l, i)| (tree.branch_currents[l], *i)));
    let e_i = rel_err(currents);
    let e_v = rel_err(dense.voltages.iter().map(|(b, v)| (tree.voltages[b].expect("live bus"), *v)));
    e_i.max(e_v)
}
