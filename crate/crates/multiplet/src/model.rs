//! Linkage graphs and their compilation into amplitude equations of motion.
//!
//! A graph names one decaying state, one vacuum target reached only through
//! spontaneous emission, and a set of field couplings between the remaining
//! (driven) states. Compiling it gives the matrix `A` of `dx/dt = A x` over the
//! driven states, excited state first.

use std::collections::{HashMap, HashSet};
use std::f64::consts::{FRAC_PI_2, PI};

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub from: String,
    pub to: String,
    /// Rabi magnitude in units of the decay rate.
    pub rabi: f64,
    /// Phase in radians, applied on the `from` row of the Hamiltonian.
    pub phase: f64,
}

impl Coupling {
    pub fn new(from: &str, to: &str, rabi: f64) -> Self {
        Coupling {
            from: from.to_string(),
            to: to.to_string(),
            rabi,
            phase: 0.0,
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    fn joins(&self, a: &str, b: &str) -> bool {
        (self.from == a && self.to == b) || (self.from == b && self.to == a)
    }

    /// Phase of `H[a][b]` when traversed starting from `a`.
    fn signed_phase(&self, a: &str) -> f64 {
        if self.from == a {
            self.phase
        } else {
            -self.phase
        }
    }
}

/// A validated atom-field linkage. Fields are private so that every value of
/// this type satisfies the graph invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkageGraph {
    states: Vec<String>,
    excited: String,
    vacuum: String,
    gamma: f64,
    couplings: Vec<Coupling>,
    initial: String,
}

impl LinkageGraph {
    pub fn new(
        states: Vec<String>,
        excited: &str,
        vacuum: &str,
        gamma: f64,
        couplings: Vec<Coupling>,
        initial: &str,
    ) -> Result<Self> {
        let graph = LinkageGraph {
            states,
            excited: excited.to_string(),
            vacuum: vacuum.to_string(),
            gamma,
            couplings,
            initial: initial.to_string(),
        };
        graph.validate()?;
        Ok(graph)
    }

    fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidGraph(msg));
        let mut seen = HashSet::new();
        for s in &self.states {
            if !seen.insert(s.as_str()) {
                return invalid(format!("state `{s}` declared twice"));
            }
        }
        for label in [&self.excited, &self.vacuum, &self.initial] {
            if !seen.contains(label.as_str()) {
                return Err(Error::UnknownState(label.clone()));
            }
        }
        if self.excited == self.vacuum {
            return invalid("excited state and vacuum target must be distinct".into());
        }
        if self.initial == self.vacuum {
            return invalid("initial state must not be the vacuum target".into());
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return invalid(format!("gamma must be positive, got {}", self.gamma));
        }
        let mut pairs = HashSet::new();
        let mut phased = 0;
        for c in &self.couplings {
            for label in [&c.from, &c.to] {
                if !seen.contains(label.as_str()) {
                    return Err(Error::UnknownState(label.clone()));
                }
            }
            if c.from == c.to {
                return invalid(format!("self-coupling on `{}`", c.from));
            }
            if c.from == self.vacuum || c.to == self.vacuum {
                return invalid(format!("vacuum target `{}` must not be field coupled", self.vacuum));
            }
            let key = if c.from < c.to {
                (c.from.as_str(), c.to.as_str())
            } else {
                (c.to.as_str(), c.from.as_str())
            };
            if !pairs.insert(key) {
                return invalid(format!("more than one coupling between `{}` and `{}`", key.0, key.1));
            }
            if !(c.rabi.is_finite() && c.rabi >= 0.0) {
                return invalid(format!("rabi magnitude must be non-negative, got {}", c.rabi));
            }
            if !c.phase.is_finite() {
                return invalid("phase must be finite".into());
            }
            if c.phase != 0.0 {
                phased += 1;
            }
        }
        if phased > 1 {
            return invalid("at most one coupling may carry a phase".into());
        }
        Ok(())
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        let graph = LinkageGraph { gamma, ..self };
        graph.validate()?;
        Ok(graph)
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn excited(&self) -> &str {
        &self.excited
    }

    pub fn vacuum(&self) -> &str {
        &self.vacuum
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn initial(&self) -> &str {
        &self.initial
    }

    /// Driven states in matrix order: excited first, then the rest in
    /// declaration order.
    pub fn driven_states(&self) -> Vec<&str> {
        let mut out = vec![self.excited.as_str()];
        out.extend(
            self.states
                .iter()
                .map(String::as_str)
                .filter(|s| *s != self.excited && *s != self.vacuum),
        );
        out
    }

    fn coupling(&self, a: &str, b: &str) -> Option<&Coupling> {
        self.couplings.iter().find(|c| c.joins(a, b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSystem {
    labels: Vec<String>,
    matrix: Array2<Complex64>,
    x0: Array1<Complex64>,
    g: f64,
    gamma: f64,
}

impl CoupledSystem {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn x0(&self) -> &Array1<Complex64> {
        &self.x0
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    /// Same couplings with a different decay rate. Zero is allowed here and
    /// gives the unitary limit.
    pub fn with_decay(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self.matrix[[0, 0]] = Complex64::new(-gamma / 2.0, 0.0);
        self
    }
}

pub fn compile(graph: &LinkageGraph) -> CoupledSystem {
    let labels = graph.driven_states();
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let n = labels.len();
    let mut matrix = Array2::<Complex64>::zeros((n, n));
    matrix[[0, 0]] = Complex64::new(-graph.gamma / 2.0, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    for c in &graph.couplings {
        let (a, b) = (index[c.from.as_str()], index[c.to.as_str()]);
        let h = Complex64::from_polar(c.rabi, c.phase);
        matrix[[a, b]] = minus_i * h;
        matrix[[b, a]] = minus_i * h.conj();
    }
    let mut x0 = Array1::<Complex64>::zeros(n);
    x0[index[graph.initial.as_str()]] = Complex64::new(1.0, 0.0);
    CoupledSystem {
        labels: labels.into_iter().map(String::from).collect(),
        matrix,
        x0,
        g: 1.0,
        gamma: graph.gamma,
    }
}

/// How a spectrum series was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Dressed,
    LinearSolve,
    TimeDomain,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Dressed => "dressed",
            Method::LinearSolve => "linear_solve",
            Method::TimeDomain => "time_domain",
        }
    }
}

/// Intensities `S(Δ)` (raw, `g = 1` convention) on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSeries {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub method: Method,
}

impl SpectrumSeries {
    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Root of the summed squared Rabi magnitudes of all couplings.
pub fn coupling_norm(graph: &LinkageGraph) -> f64 {
    graph.couplings.iter().map(|c| c.rabi * c.rabi).sum::<f64>().sqrt()
}

/// Effective Rabi frequency `|Omega|` of a recognised multiplet topology.
pub fn effective_rabi(graph: &LinkageGraph) -> Result<f64> {
    classify(graph)?;
    Ok(coupling_norm(graph))
}

/// Multiplet topologies with a closed-form spectrum. Phases are given in the
/// closed-form convention: the quartuplet depends on `sin(phase)` and the
/// quintuplet on `cos(phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    Lorentzian,
    Doublet {
        o1: f64,
    },
    /// Chain e - g1 - g3 - g2.
    Triplet {
        o1: f64,
        m1: f64,
        m2: f64,
    },
    /// Loop e - g1 - g3 - g2 - e.
    Quartuplet {
        o1: f64,
        o2: f64,
        m1: f64,
        m2: f64,
        phase: f64,
    },
    /// Loop e - g1 - g3 - g2 - e plus branch g2 - g4.
    Quintuplet {
        o1: f64,
        o2: f64,
        m1: f64,
        m2: f64,
        m3: f64,
        phase: f64,
    },
}

/// Loop phase offsets between the closed-form phase and the flux around the
/// e - g1 - g3 - g2 loop.
pub const QUARTUPLET_PHASE_OFFSET: f64 = FRAC_PI_2;
pub const QUINTUPLET_PHASE_OFFSET: f64 = PI;

/// Recognise the multiplet topology of the connected part of the graph
/// around the excited state. Closed forms assume the excited state starts
/// populated.
pub fn classify(graph: &LinkageGraph) -> Result<Topology> {
    let unsupported = |why: &str| Err(Error::UnsupportedTopology(why.to_string()));
    if graph.initial != graph.excited {
        return unsupported("closed forms need the excited state as the initial state");
    }

    let mut adj: HashMap<&str, Vec<&str>> = HashMap::new();
    for c in &graph.couplings {
        adj.entry(c.from.as_str()).or_default().push(c.to.as_str());
        adj.entry(c.to.as_str()).or_default().push(c.from.as_str());
    }
    let e = graph.excited.as_str();
    let mut component = vec![e];
    let mut seen: HashSet<&str> = HashSet::from([e]);
    let mut i = 0;
    while i < component.len() {
        for &n in adj.get(component[i]).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.insert(n) {
                component.push(n);
            }
        }
        i += 1;
    }
    let degree = |s: &str| adj.get(s).map_or(0, Vec::len);
    let nodes = component.len();
    let edges = component.iter().map(|s| degree(s)).sum::<usize>() / 2;
    let rabi = |a: &str, b: &str| graph.coupling(a, b).map_or(0.0, |c| c.rabi);

    if edges == 0 {
        return Ok(Topology::Lorentzian);
    }

    if edges + 1 == nodes {
        // tree: only a path hanging off the excited state is a known form
        if degree(e) != 1 || component.iter().any(|s| degree(s) > 2) {
            return unsupported("tree linkage that is not a chain from the excited state");
        }
        let mut path = vec![e];
        let mut prev = "";
        let mut cur = e;
        while let Some(&next) = adj[cur].iter().find(|&&n| n != prev) {
            path.push(next);
            prev = cur;
            cur = next;
        }
        return match path.len() {
            2 => Ok(Topology::Doublet {
                o1: rabi(path[0], path[1]),
            }),
            3 => Ok(Topology::Triplet {
                o1: rabi(path[0], path[1]),
                m1: rabi(path[1], path[2]),
                m2: 0.0,
            }),
            4 => Ok(Topology::Triplet {
                o1: rabi(path[0], path[1]),
                m1: rabi(path[1], path[2]),
                m2: rabi(path[2], path[3]),
            }),
            _ => unsupported("chain longer than three couplings"),
        };
    }

    if edges != nodes || degree(e) != 2 {
        return unsupported("no closed form for this linkage");
    }
    let (n0, n1) = (adj[e][0], adj[e][1]);
    let far: Vec<&str> = adj[n0]
        .iter()
        .copied()
        .filter(|&c| c != e && adj[n1].contains(&c))
        .collect();
    if far.len() != 1 {
        return unsupported("loop through the excited state must have four states");
    }
    let c = far[0];
    // summed rather than taken from the product's argument so that the
    // caller's branch of the phase survives unchanged
    let loop_phase = |a: &str, b: &str| {
        [e, a, c, b, e]
            .windows(2)
            .map(|w| graph.coupling(w[0], w[1]).map_or(0.0, |cp| cp.signed_phase(w[0])))
            .sum::<f64>()
    };

    match nodes {
        4 => {
            // keep declaration order for the two optical couplings
            let (a, b) = order_optical(graph, e, n0, n1);
            Ok(Topology::Quartuplet {
                o1: rabi(e, a),
                o2: rabi(e, b),
                m1: rabi(a, c),
                m2: rabi(c, b),
                phase: loop_phase(a, b) - QUARTUPLET_PHASE_OFFSET,
            })
        }
        5 => {
            let branch_of = |s: &str| adj[s].iter().copied().find(|&n| n != e && n != c);
            let (a, b, d) = match (branch_of(n0), branch_of(n1)) {
                (None, Some(d)) => (n0, n1, d),
                (Some(d), None) => (n1, n0, d),
                _ => return unsupported("branch must hang off an optically coupled ground state"),
            };
            if degree(d) != 1 {
                return unsupported("no closed form for this linkage");
            }
            Ok(Topology::Quintuplet {
                o1: rabi(e, a),
                o2: rabi(e, b),
                m1: rabi(a, c),
                m2: rabi(c, b),
                m3: rabi(b, d),
                phase: loop_phase(a, b) - QUINTUPLET_PHASE_OFFSET,
            })
        }
        _ => unsupported("no closed form for this linkage"),
    }
}

fn order_optical<'a>(graph: &LinkageGraph, e: &str, n0: &'a str, n1: &'a str) -> (&'a str, &'a str) {
    let pos = |s: &str| graph.couplings.iter().position(|c| c.joins(e, s));
    if pos(n0) <= pos(n1) {
        (n0, n1)
    } else {
        (n1, n0)
    }
}
