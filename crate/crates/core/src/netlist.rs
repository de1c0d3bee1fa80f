//! Conductance networks with variable-labelled branches and their grounded
//! Laplacian pencils.
//!
//! ```text
//! # one-port, two branches in series
//! ports P
//! branch P M z1 1
//! branch M GND z2 1
//! ```

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, Tolerances};
use crate::pencil::{PsdPencil, RealizedFunction};

pub const GROUND: &str = "GND";

/// `None` is the ground node.
pub type Node = Option<usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub a: Node,
    pub b: Node,
    /// Zero-based variable index.
    pub var: usize,
    pub weight: f64,
    pub line: usize,
}

/// Nodes are ordered ports first, then internal nodes in order of appearance.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub nodes: Vec<String>,
    pub num_ports: usize,
    pub num_vars: usize,
    pub branches: Vec<Branch>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_netlist(text: &str) -> Result<Network> {
    let mut ports: Option<Vec<String>> = None;
    let mut raw: Vec<(usize, String, String, usize, f64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let content = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.first() {
            None => continue,
            Some(&"ports") => {
                if ports.is_some() {
                    return Err(parse_err(lineno, "duplicate ports line"));
                }
                let names: Vec<String> = tokens[1..].iter().map(|s| s.to_string()).collect();
                if names.is_empty() {
                    return Err(parse_err(lineno, "ports line lists no nodes"));
                }
                if names.iter().any(|n| n == GROUND) {
                    return Err(parse_err(lineno, "the ground node cannot be a port"));
                }
                for (j, n) in names.iter().enumerate() {
                    if names[..j].contains(n) {
                        return Err(parse_err(lineno, format!("port {n} listed twice")));
                    }
                }
                ports = Some(names);
            }
            Some(&"branch") => {
                if tokens.len() != 5 {
                    return Err(parse_err(lineno, "expected `branch <nodeA> <nodeB> z<k> <weight>`"));
                }
                let var = tokens[3]
                    .strip_prefix('z')
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| parse_err(lineno, format!("bad variable `{}`, expected z1, z2, …", tokens[3])))?;
                let weight: f64 = tokens[4]
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad weight `{}`", tokens[4])))?;
                if !(weight > 0.0 && weight.is_finite()) {
                    return Err(parse_err(lineno, format!("weight must be positive, got {weight}")));
                }
                if tokens[1] == tokens[2] {
                    return Err(parse_err(lineno, "branch connects a node to itself"));
                }
                raw.push((lineno, tokens[1].to_string(), tokens[2].to_string(), var - 1, weight));
            }
            Some(other) => return Err(parse_err(lineno, format!("unknown directive `{other}`"))),
        }
    }
    let ports = ports.ok_or_else(|| parse_err(0, "missing ports line"))?;
    if raw.is_empty() {
        return Err(Error::InvalidNetwork("the network has no branches".into()));
    }

    let mut nodes = ports.clone();
    let mut index: HashMap<String, usize> = ports.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
    let mut node = |name: &str| -> Node {
        if name == GROUND {
            return None;
        }
        let next = index.len();
        let i = *index.entry(name.to_string()).or_insert(next);
        if i == nodes.len() {
            nodes.push(name.to_string());
        }
        Some(i)
    };
    let branches: Vec<Branch> = raw
        .iter()
        .map(|(line, a, b, var, weight)| Branch {
            a: node(a),
            b: node(b),
            var: *var,
            weight: *weight,
            line: *line,
        })
        .collect();
    let net = Network {
        num_vars: branches.iter().map(|b| b.var + 1).max().unwrap_or(0),
        num_ports: ports.len(),
        nodes,
        branches,
    };
    net.validate()?;
    Ok(net)
}

impl Network {
    pub fn num_internal(&self) -> usize {
        self.nodes.len() - self.num_ports
    }

    /// Dangling nodes, internal islands, and disconnected pieces away from ground.
    pub fn validate(&self) -> Result<()> {
        let count = self.nodes.len();
        let mut degree = vec![0usize; count];
        for b in &self.branches {
            for n in [b.a, b.b].into_iter().flatten() {
                degree[n] += 1;
            }
        }
        for (i, name) in self.nodes.iter().enumerate() {
            if i < self.num_ports && degree[i] == 0 {
                return Err(Error::InvalidNetwork(format!("port {name} is dangling (no branches)")));
            }
            if i >= self.num_ports && degree[i] < 2 {
                return Err(Error::InvalidNetwork(format!("internal node {name} is dangling (one branch)")));
            }
        }
        // Union-find over nodes with ground as the last slot.
        let mut parent: Vec<usize> = (0..=count).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let slot = |n: Node| n.unwrap_or(count);
        let uses_ground = self.branches.iter().any(|b| b.a.is_none() || b.b.is_none());
        for b in &self.branches {
            let (x, y) = (find(&mut parent, slot(b.a)), find(&mut parent, slot(b.b)));
            parent[x] = y;
        }
        let mut has_port = HashMap::new();
        for i in 0..count {
            let r = find(&mut parent, i);
            *has_port.entry(r).or_insert(false) |= i < self.num_ports;
        }
        if uses_ground {
            let r = find(&mut parent, count);
            has_port.entry(r).or_insert(false);
        }
        if let Some(i) = (0..count).find(|&i| {
            let r = find(&mut parent, i);
            !has_port[&r] && (!uses_ground || r != find(&mut parent, count))
        }) {
            return Err(Error::InvalidNetwork(format!(
                "node {} lies on an island with neither a port nor ground",
                self.nodes[i]
            )));
        }
        if has_port.len() > 1 {
            let ground_root = uses_ground.then(|| find(&mut parent, count));
            if has_port.keys().any(|&r| Some(r) != ground_root) {
                return Err(Error::InvalidNetwork(
                    "the network has several components and not all of them touch ground".into(),
                ));
            }
        }
        Ok(())
    }

    /// Signed incidence column of a branch over the non-ground nodes.
    pub fn incidence(&self, b: &Branch) -> CMatrix {
        let mut w = CMatrix::zeros(self.nodes.len(), 1);
        if let Some(a) = b.a {
            w[(a, 0)] += 1.0;
        }
        if let Some(c) = b.b {
            w[(c, 0)] -= 1.0;
        }
        w
    }

    /// `(variable, g w wᵀ)` for every branch; each term has rank one.
    pub fn branch_terms(&self) -> Vec<(usize, CMatrix)> {
        self.branches
            .iter()
            .map(|b| {
                let w = self.incidence(b);
                (b.var, (&w * w.transpose()).scale(b.weight))
            })
            .collect()
    }
}

/// `A_k = Σ_{branches on z_k} g w wᵀ` with ports as `U` and internal nodes as
/// `H`; the Schur complement is the Kron-reduced port matrix.
pub fn network_pencil(net: &Network, tol: Tolerances) -> Result<RealizedFunction> {
    net.validate()?;
    let size = net.nodes.len();
    let mut coeffs = vec![CMatrix::zeros(size, size); net.num_vars];
    for (k, term) in net.branch_terms() {
        coeffs[k] += term;
    }
    let pencil = PsdPencil::from_coeffs(net.num_ports, net.num_internal(), coeffs, &tol)?;
    RealizedFunction::new(pencil, tol)
}
