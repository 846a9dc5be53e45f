//! On-chip optical feed network.
//!
//! A single source feeds a directed acyclic graph of waveguides, Y-branch
//! splitters, and photoconductive taps. [`propagate`](OpticalGraph::propagate)
//! walks the graph in topological order and records the optical power each
//! tap absorbs plus the power leaving any unconnected output (the residual).
//! Light not coupled by a tapered tap is scattered at the terminated taper
//! and is lost rather than tracked as residual.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::netlist::{NetlistAst, Span, StatementKind};

/// The two tap structures: a tapered tap ends the waveguide over the patch
/// (higher coupling, no through port); a through tap lets the remaining
/// light continue to downstream devices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DeviceType {
    Tapered,
    Through,
}

impl DeviceType {
    /// Fraction of incident power coupled into the patch.
    pub fn default_coupling(self) -> f64 {
        match self {
            DeviceType::Tapered => 0.84,
            DeviceType::Through => 0.67,
        }
    }
}

impl fmt::Display for DeviceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeviceType::Tapered => write!(f, "tapered"),
            DeviceType::Through => write!(f, "through"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("netlist has no source element")]
    NoSource,
    #[error("netlist has multiple sources: `{0}` and `{1}`")]
    MultipleSources(String, String),
    #[error("line {line}: `{consumer}` reads net `{net}` which nothing drives")]
    DanglingNet {
        net: String,
        consumer: String,
        line: usize,
    },
    #[error("net `{net}` is driven by both `{first}` and `{second}`")]
    MultipleDrivers {
        net: String,
        first: String,
        second: String,
    },
    #[error("net `{net}` feeds more than one element; fan-out requires a ybranch")]
    FanOut { net: String },
    #[error("cycle detected through element `{0}`")]
    Cycle(String),
}

/// One optical element of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalElement {
    pub id: String,
    pub kind: ElementKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Source {
        input_power_mw: f64,
    },
    Waveguide {
        excess_loss_db: f64,
    },
    YBranch {
        split_fraction: f64,
        excess_loss_db: f64,
    },
    Tap {
        device_type: DeviceType,
        coupling_fraction: f64,
    },
}

/// Validated optical network with a precomputed topological order.
/// Immutable after construction; propagation is a pure function.
#[derive(Debug, Clone)]
pub struct OpticalGraph {
    elements: Vec<OpticalElement>,
    /// Consumer element index per output port, `None` when terminated.
    outputs: Vec<Vec<Option<usize>>>,
    topo_order: Vec<usize>,
    source: usize,
}

/// Optical power bookkeeping after propagation, both maps keyed by element
/// id. `absorbed` has an entry for every element (zero for non-taps);
/// `residual` has an entry for every element with at least one terminated
/// output port.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSolution {
    pub absorbed: BTreeMap<String, f64>,
    pub residual: BTreeMap<String, f64>,
}

impl PowerSolution {
    pub fn total_absorbed_mw(&self) -> f64 {
        self.absorbed.values().sum()
    }

    pub fn total_residual_mw(&self) -> f64 {
        self.residual.values().sum()
    }
}

/// Splits `p_in_mw` at a Y-branch: applies the excess loss, then divides the
/// remainder `split_fraction : (1 - split_fraction)`.
pub fn split_ybranch(p_in_mw: f64, split_fraction: f64, excess_loss_db: f64) -> (f64, f64) {
    let total = p_in_mw * 10f64.powf(-excess_loss_db / 10.0);
    (total * split_fraction, total * (1.0 - split_fraction))
}

/// Builds and validates an [`OpticalGraph`] from a parsed netlist.
pub fn build_network(ast: &NetlistAst) -> Result<OpticalGraph, GraphError> {
    OpticalGraph::build(ast)
}

impl OpticalGraph {
    pub fn build(ast: &NetlistAst) -> Result<Self, GraphError> {
        let mut elements = Vec::with_capacity(ast.statements.len());
        // (net, producer index, output port index on the producer)
        let mut drivers: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        // (net, consumer index, statement span)
        let mut consumers: Vec<(&str, usize, Span)> = Vec::new();
        let mut source = None;

        fn drive<'a>(
            drivers: &mut BTreeMap<&'a str, (usize, usize)>,
            net: &'a str,
            idx: usize,
            port: usize,
            elements: &[OpticalElement],
        ) -> Result<(), GraphError> {
            if let Some(&(prev, _)) = drivers.get(net) {
                return Err(GraphError::MultipleDrivers {
                    net: net.to_string(),
                    first: elements[prev].id.clone(),
                    second: elements[idx].id.clone(),
                });
            }
            drivers.insert(net, (idx, port));
            Ok(())
        }

        for (idx, stmt) in ast.statements.iter().enumerate() {
            let kind = match &stmt.kind {
                StatementKind::Source { power_mw } => {
                    if let Some(first) = source {
                        return Err(GraphError::MultipleSources(
                            ast.statements[first as usize].id.clone(),
                            stmt.id.clone(),
                        ));
                    }
                    source = Some(idx);
                    ElementKind::Source {
                        input_power_mw: *power_mw,
                    }
                }
                StatementKind::Waveguide {
                    input,
                    output,
                    loss_db,
                } => {
                    consumers.push((input, idx, stmt.span));
                    let _ = output;
                    ElementKind::Waveguide {
                        excess_loss_db: *loss_db,
                    }
                }
                StatementKind::YBranch {
                    input,
                    outputs: _,
                    split,
                    loss_db,
                } => {
                    consumers.push((input, idx, stmt.span));
                    ElementKind::YBranch {
                        split_fraction: *split,
                        excess_loss_db: *loss_db,
                    }
                }
                StatementKind::Switch {
                    device_type,
                    input,
                    output: _,
                    coupling,
                } => {
                    consumers.push((input, idx, stmt.span));
                    ElementKind::Tap {
                        device_type: *device_type,
                        coupling_fraction: *coupling,
                    }
                }
            };
            elements.push(OpticalElement {
                id: stmt.id.clone(),
                kind,
            });
        }

        let source = source.ok_or(GraphError::NoSource)?;

        // Register drivers after all elements exist (for error messages).
        for (idx, stmt) in ast.statements.iter().enumerate() {
            match &stmt.kind {
                StatementKind::Source { .. } => drive(&mut drivers, &stmt.id, idx, 0, &elements)?,
                StatementKind::Waveguide { output, .. } => {
                    drive(&mut drivers, output, idx, 0, &elements)?
                }
                StatementKind::YBranch { outputs, .. } => {
                    drive(&mut drivers, &outputs.0, idx, 0, &elements)?;
                    drive(&mut drivers, &outputs.1, idx, 1, &elements)?;
                }
                StatementKind::Switch { output, .. } => {
                    if let Some(out) = output {
                        drive(&mut drivers, out, idx, 0, &elements)?;
                    }
                }
            }
        }

        // Wire consumers to drivers; reject dangling reads and net fan-out.
        let port_count = |kind: &ElementKind| match kind {
            ElementKind::Source { .. } | ElementKind::Waveguide { .. } => 1,
            ElementKind::YBranch { .. } => 2,
            ElementKind::Tap { device_type, .. } => match device_type {
                DeviceType::Tapered => 0,
                DeviceType::Through => 1,
            },
        };
        let mut outputs: Vec<Vec<Option<usize>>> = elements
            .iter()
            .map(|e| vec![None; port_count(&e.kind)])
            .collect();
        // A through tap with no `out=` net still has its port; it stays None.
        for (net, consumer, span) in consumers {
            let &(producer, port) = drivers.get(net).ok_or_else(|| GraphError::DanglingNet {
                net: net.to_string(),
                consumer: elements[consumer].id.clone(),
                line: span.line,
            })?;
            if outputs[producer][port].is_some() {
                return Err(GraphError::FanOut {
                    net: net.to_string(),
                });
            }
            outputs[producer][port] = Some(consumer);
        }

        // Kahn's algorithm; anything left over sits on a cycle.
        let n = elements.len();
        let mut indegree = vec![0usize; n];
        for outs in &outputs {
            for &c in outs.iter().flatten() {
                indegree[c] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut topo_order = Vec::with_capacity(n);
        while let Some(i) = queue.pop() {
            topo_order.push(i);
            for &c in outputs[i].iter().flatten() {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push(c);
                }
            }
        }
        if topo_order.len() != n {
            let on_cycle = (0..n).find(|&i| indegree[i] > 0).unwrap();
            return Err(GraphError::Cycle(elements[on_cycle].id.clone()));
        }

        Ok(Self {
            elements,
            outputs,
            topo_order,
            source,
        })
    }

    pub fn elements(&self) -> &[OpticalElement] {
        &self.elements
    }

    pub fn element(&self, id: &str) -> Option<&OpticalElement> {
        self.elements.iter().find(|e| e.id == id)
    }

    /// Tap elements in declaration order.
    pub fn taps(&self) -> impl Iterator<Item = (&str, DeviceType, f64)> {
        self.elements.iter().filter_map(|e| match e.kind {
            ElementKind::Tap {
                device_type,
                coupling_fraction,
            } => Some((e.id.as_str(), device_type, coupling_fraction)),
            _ => None,
        })
    }

    pub fn source_power_mw(&self) -> f64 {
        match self.elements[self.source].kind {
            ElementKind::Source { input_power_mw } => input_power_mw,
            _ => unreachable!("source index always points at a source"),
        }
    }

    /// Returns a copy of the graph with the source power replaced.
    pub fn with_source_power(&self, power_mw: f64) -> Self {
        let mut g = self.clone();
        g.elements[g.source].kind = ElementKind::Source {
            input_power_mw: power_mw,
        };
        g
    }

    /// Propagates power from the source through the network.
    pub fn propagate(&self) -> PowerSolution {
        let n = self.elements.len();
        let mut incoming = vec![0.0f64; n];
        let mut absorbed = BTreeMap::new();
        let mut residual = BTreeMap::new();

        for &i in &self.topo_order {
            let e = &self.elements[i];
            let p_in = incoming[i];
            let mut port_powers: Vec<f64> = Vec::with_capacity(2);
            let mut taken = 0.0;
            match e.kind {
                ElementKind::Source { input_power_mw } => {
                    port_powers.push(input_power_mw);
                }
                ElementKind::Waveguide { excess_loss_db } => {
                    port_powers.push(p_in * 10f64.powf(-excess_loss_db / 10.0));
                }
                ElementKind::YBranch {
                    split_fraction,
                    excess_loss_db,
                } => {
                    let (a, b) = split_ybranch(p_in, split_fraction, excess_loss_db);
                    port_powers.push(a);
                    port_powers.push(b);
                }
                ElementKind::Tap {
                    device_type,
                    coupling_fraction,
                } => {
                    taken = p_in * coupling_fraction;
                    if device_type == DeviceType::Through {
                        port_powers.push(p_in * (1.0 - coupling_fraction));
                    }
                }
            }
            absorbed.insert(e.id.clone(), taken);
            let mut terminated = 0.0;
            let mut has_open_port = false;
            for (port, &q) in port_powers.iter().enumerate() {
                match self.outputs[i][port] {
                    Some(consumer) => incoming[consumer] += q,
                    None => {
                        terminated += q;
                        has_open_port = true;
                    }
                }
            }
            if has_open_port {
                residual.insert(e.id.clone(), terminated);
            }
        }

        PowerSolution { absorbed, residual }
    }
}
