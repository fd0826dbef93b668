//! Spin registers, connectivity graphs, three-spin logical encodings, and
//! exchange-pulse sequences.
//!
//! A register state is a bitmask with bit `k` set when spin `k` points up.
//! Spins are numbered from 0. Each logical qubit is a triple `(s1, s2, s3)`
//! with
//!
//! ```text
//! |0⟩ = (|↑↓⟩ − |↓↑⟩)/√2 ⊗ |↓⟩
//! |1⟩ = (|↑↓⟩ + |↓↑⟩)/√6 ⊗ |↓⟩ − √(2/3) |↓↓⟩ ⊗ |↑⟩
//! ```
//!
//! on `(s1, s2) ⊗ s3`: total spin 1/2, Sz = −1/2, with `s1 s2` in a singlet or
//! triplet. Two-qubit logical states `|ab⟩` are ordered `2a + b` with the
//! first qubit as the more significant bit.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, C64, ONE, ZERO};

/// Basis of a spin-1/2 register, optionally restricted to one Sz value.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSector {
    n_spins: usize,
    twice_sz: Option<i32>,
    states: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl SpinSector {
    fn from_states(n_spins: usize, twice_sz: Option<i32>, states: Vec<u64>) -> Self {
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        SpinSector { n_spins, twice_sz, states, index }
    }

    /// All `2^n` states.
    pub fn full(n_spins: usize) -> Result<Self> {
        if n_spins == 0 || n_spins > 20 {
            return Err(Error::InvalidArgument(format!("register size {n_spins} outside 1..=20")));
        }
        Ok(SpinSector::from_states(n_spins, None, (0..1u64 << n_spins).collect()))
    }

    /// States with total Sz = `twice_sz / 2`.
    pub fn with_sz(n_spins: usize, twice_sz: i32) -> Result<Self> {
        let full = SpinSector::full(n_spins)?;
        let states: Vec<u64> =
            full.states.into_iter().filter(|&s| 2 * s.count_ones() as i32 - n_spins as i32 == twice_sz).collect();
        if states.is_empty() {
            return Err(Error::EmptySubspace(format!("no {n_spins}-spin states with 2Sz = {twice_sz}")));
        }
        Ok(SpinSector::from_states(n_spins, Some(twice_sz), states))
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn twice_sz(&self) -> Option<i32> {
        self.twice_sz
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn position(&self, state: u64) -> Option<usize> {
        self.index.get(&state).copied()
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        for k in [i, j] {
            if k >= self.n_spins {
                return Err(Error::SpinIndex { index: k, n_spins: self.n_spins });
            }
        }
        if i == j {
            return Err(Error::InvalidArgument(format!("exchange needs two distinct spins, got ({i}, {j})")));
        }
        Ok(())
    }

    /// `perm[k]` is the position of state `k` with spins `i` and `j` exchanged.
    pub fn swap_permutation(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        self.check_pair(i, j)?;
        Ok(self
            .states
            .iter()
            .map(|&s| {
                let bi = s >> i & 1;
                let bj = s >> j & 1;
                let t = (s & !((1 << i) | (1 << j))) | (bj << i) | (bi << j);
                self.index[&t]
            })
            .collect())
    }
}

fn permutation_matrix(perm: &[usize]) -> CMatrix {
    let n = perm.len();
    let mut m = CMatrix::zeros(n, n);
    for (k, &p) in perm.iter().enumerate() {
        m[(p, k)] = ONE;
    }
    m
}

/// `S_i · S_j` in units of ħ², i.e. `(SWAP_ij − 1/2)/2`.
pub fn heisenberg_coupling(i: usize, j: usize, sector: &SpinSector) -> Result<CMatrix> {
    let p = permutation_matrix(&sector.swap_permutation(i, j)?);
    let n = sector.dim();
    Ok((p - CMatrix::identity(n, n) * c(0.5, 0.0)) * c(0.5, 0.0))
}

/// Total Sz in units of ħ.
pub fn spin_total_sz(sector: &SpinSector) -> CMatrix {
    let n = sector.n_spins as f64;
    let d: Vec<C64> = sector.states.iter().map(|&s| c(s.count_ones() as f64 - n / 2.0, 0.0)).collect();
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(d))
}

/// Total S² in units of ħ².
pub fn spin_total_s_squared(sector: &SpinSector) -> CMatrix {
    let n = sector.n_spins;
    let dim = sector.dim();
    let mut m = CMatrix::identity(dim, dim) * c(0.75 * n as f64, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            m += heisenberg_coupling(i, j, sector).expect("valid pair") * c(2.0, 0.0);
        }
    }
    m
}

/// Coefficient `(e^{2πiτ} − 1)/2` of `(1 − SWAP)` in a pulse with the global
/// phase `e^{−iπτ/2}` removed.
pub fn pulse_coefficient(tau: f64) -> C64 {
    (C64::from_polar(1.0, 2.0 * PI * tau) - ONE) * 0.5
}

/// `exp(−2πi τ S_i·S_j)`, including its global phase.
pub fn exchange_unitary(i: usize, j: usize, tau: f64, sector: &SpinSector) -> Result<CMatrix> {
    let p = permutation_matrix(&sector.swap_permutation(i, j)?);
    let n = sector.dim();
    let id = CMatrix::identity(n, n);
    let k = pulse_coefficient(tau);
    let u = &id + (&id - p) * k;
    Ok(u * C64::from_polar(1.0, -PI * tau / 2.0))
}

/// Named connectivity presets of the six-spin, two-qubit register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraphLabel {
    /// Two hybrid qubits on four dots in a row, dots `[0 1][2][3 4][5]`.
    #[serde(rename = "d")]
    HybridLinearD,
    /// Two triple-dot qubits on six dots in a row.
    #[serde(rename = "e")]
    TripleDotLinearE,
    /// Two hybrid qubits on four dots in a row, dots `[2][0 1][5][3 4]`.
    #[serde(rename = "f")]
    HybridAltF,
    #[serde(rename = "custom")]
    Custom,
}

impl GraphLabel {
    pub fn parse(s: &str) -> Option<GraphLabel> {
        match s {
            "d" => Some(GraphLabel::HybridLinearD),
            "e" => Some(GraphLabel::TripleDotLinearE),
            "f" => Some(GraphLabel::HybridAltF),
            "custom" => Some(GraphLabel::Custom),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            GraphLabel::HybridLinearD => "d",
            GraphLabel::TripleDotLinearE => "e",
            GraphLabel::HybridAltF => "f",
            GraphLabel::Custom => "custom",
        }
    }
}

/// Spins and the pairs that can be exchange-coupled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectivityGraph {
    pub n_spins: usize,
    pub edges: Vec<(usize, usize)>,
    /// Spin triples forming the logical qubits.
    pub qubits: Vec<[usize; 3]>,
    #[serde(default = "custom_label")]
    pub label: GraphLabel,
}

fn custom_label() -> GraphLabel {
    GraphLabel::Custom
}

const QUBIT_A: [usize; 3] = [0, 1, 2];
const QUBIT_B: [usize; 3] = [3, 4, 5];

impl ConnectivityGraph {
    /// Validates and normalizes edges to `(low, high)` without duplicates.
    pub fn new(n_spins: usize, edges: &[(usize, usize)], qubits: Vec<[usize; 3]>, label: GraphLabel) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            for k in [i, j] {
                if k >= n_spins {
                    return Err(Error::SpinIndex { index: k, n_spins });
                }
            }
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop on spin {i}")));
            }
            let e = (i.min(j), i.max(j));
            if !norm.contains(&e) {
                norm.push(e);
            }
        }
        let mut seen = vec![false; n_spins];
        for q in &qubits {
            for &s in q {
                if s >= n_spins {
                    return Err(Error::SpinIndex { index: s, n_spins });
                }
                if seen[s] {
                    return Err(Error::InvalidArgument(format!("spin {s} belongs to two qubits")));
                }
                seen[s] = true;
            }
        }
        if qubits.len() != 2 {
            return Err(Error::InvalidArgument("exactly two logical qubits are supported".into()));
        }
        Ok(ConnectivityGraph { n_spins, edges: norm, qubits, label })
    }

    /// Re-validates a deserialized graph.
    pub fn validated(self) -> Result<Self> {
        ConnectivityGraph::new(self.n_spins, &self.edges, self.qubits, self.label)
    }

    pub fn preset(label: GraphLabel) -> Result<Self> {
        let edges: &[(usize, usize)] = match label {
            GraphLabel::HybridLinearD => &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3), (2, 4)],
            GraphLabel::TripleDotLinearE => &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)],
            GraphLabel::HybridAltF => &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (0, 5), (1, 5)],
            GraphLabel::Custom => return Err(Error::InvalidArgument("custom graphs have no preset".into())),
        };
        ConnectivityGraph::new(6, edges, vec![QUBIT_A, QUBIT_B], label)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.iter().position(|&e| e == (i.min(j), i.max(j)))
    }

    /// Edges joining spins of different qubits.
    pub fn inter_qubit_edges(&self) -> Vec<(usize, usize)> {
        let owner = |s: usize| self.qubits.iter().position(|q| q.contains(&s));
        self.edges.iter().copied().filter(|&(i, j)| owner(i) != owner(j)).collect()
    }
}

/// Three-spin qubit states over local bits `(s1, s2, s3)`; bit `k` is spin `s_{k+1}`.
pub fn three_spin_states() -> [[C64; 8]; 2] {
    let s2 = 0.5f64.sqrt();
    let mut zero = [ZERO; 8];
    let mut one = [ZERO; 8];
    // s1 up, s2 down, s3 down
    zero[0b001] = c(s2, 0.0);
    zero[0b010] = c(-s2, 0.0);
    let a = (1.0f64 / 6.0).sqrt();
    one[0b001] = c(a, 0.0);
    one[0b010] = c(a, 0.0);
    one[0b100] = c(-(2.0f64 / 3.0).sqrt(), 0.0);
    [zero, one]
}

/// Logical two-qubit subspace of a register sector.
#[derive(Debug, Clone)]
pub struct LogicalEncoding {
    pub qubit_groups: Vec<[usize; 3]>,
    pub encoded_states: [[C64; 8]; 2],
    /// Columns `|00⟩, |01⟩, |10⟩, |11⟩` in the sector basis.
    pub logical_basis: CMatrix,
    pub sector: SpinSector,
}

impl LogicalEncoding {
    /// Encoding on the sector holding both qubits at Sz = −1/2, with any
    /// spectator spins up (Sz = −1 for six spins).
    pub fn for_graph(graph: &ConnectivityGraph) -> Result<Self> {
        let sector = SpinSector::with_sz(graph.n_spins, graph.n_spins as i32 - 8)?;
        LogicalEncoding::new(graph.qubits.clone(), sector)
    }

    /// Encoding of two qubits on an arbitrary sector containing it.
    pub fn new(qubit_groups: Vec<[usize; 3]>, sector: SpinSector) -> Result<Self> {
        if qubit_groups.len() != 2 {
            return Err(Error::InvalidArgument("exactly two logical qubits are supported".into()));
        }
        let n = sector.n_spins;
        let others: u64 = {
            let mut used = 0u64;
            for q in &qubit_groups {
                for &s in q {
                    used |= 1 << s;
                }
            }
            // spectator spins are fixed up so the encoded space stays in one sector
            ((1u64 << n) - 1) & !used
        };
        let enc = three_spin_states();
        let mut b = CMatrix::zeros(sector.dim(), 4);
        for la in 0..2 {
            for lb in 0..2 {
                for (ka, &va) in enc[la].iter().enumerate() {
                    if va == ZERO {
                        continue;
                    }
                    for (kb, &vb) in enc[lb].iter().enumerate() {
                        if vb == ZERO {
                            continue;
                        }
                        let mut s = others;
                        for (bit, &spin) in qubit_groups[0].iter().enumerate() {
                            s |= ((ka as u64 >> bit) & 1) << spin;
                        }
                        for (bit, &spin) in qubit_groups[1].iter().enumerate() {
                            s |= ((kb as u64 >> bit) & 1) << spin;
                        }
                        let pos = sector.position(s).ok_or_else(|| {
                            Error::InvalidArgument("sector does not contain the encoded states".into())
                        })?;
                        b[(pos, 2 * la + lb)] += va * vb;
                    }
                }
            }
        }
        Ok(LogicalEncoding { qubit_groups, encoded_states: enc, logical_basis: b, sector })
    }
}

/// Projection of `u` onto the logical space, `M = B† U B`, and the leakage
/// `1 − ‖M‖²_F / 4` clamped to `[0, 1]`.
pub fn logical_block(u: &CMatrix, enc: &LogicalEncoding) -> (CMatrix, f64) {
    let b = &enc.logical_basis;
    let m = b.adjoint() * u * b;
    let leak = leakage_of(&m);
    (m, leak)
}

pub fn leakage_of(m: &CMatrix) -> f64 {
    let f2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    (1.0 - f2 / 4.0).clamp(0.0, 1.0)
}

/// Magic basis used by the local-equivalence invariants.
pub fn magic_basis() -> CMatrix {
    let s = 0.5f64.sqrt();
    let o = c(s, 0.0);
    let i = c(0.0, s);
    let z = ZERO;
    CMatrix::from_row_slice(4, 4, &[o, z, z, i, z, i, o, z, z, i, -o, z, o, z, z, -i])
}

/// Local-equivalence invariants `(G1, G2)` of a two-qubit unitary.
///
/// `m = (Q†MQ)ᵀ(Q†MQ)`, `G1 = tr²m / (16 det M)`, `G2 = (tr²m − tr m²) / (4 det M)`.
pub fn makhlin_invariants(m: &CMatrix) -> Result<(C64, f64)> {
    if m.shape() != (4, 4) {
        return Err(Error::DimensionMismatch { expected: 4, found: m.nrows() });
    }
    let dev = crate::linalg::unitarity_error(m);
    if dev > 1e-8 {
        return Err(Error::NonUnitary(dev));
    }
    let (g1, g2) = makhlin_raw(m);
    Ok((g1, g2.re))
}

/// The invariant formulas without the unitarity check; `G2` is returned complex.
pub fn makhlin_raw(m: &CMatrix) -> (C64, C64) {
    let q = magic_basis();
    let mb = q.adjoint() * m * &q;
    let mm = mb.transpose() * &mb;
    let det = m.determinant();
    let tr = mm.trace();
    let tr2 = (&mm * &mm).trace();
    (tr * tr / (det * 16.0), (tr * tr - tr2) / (det * 4.0))
}

/// `CNOT` with the first qubit as control.
pub fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

/// One exchange pulse of duration `tau` in units of h/J.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pulse {
    pub edge: (usize, usize),
    pub tau: f64,
}

/// Ordered pulses, applied first to last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSequence {
    /// Preset label or `"custom"`.
    pub graph: String,
    pub pulses: Vec<Pulse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_steps: Option<usize>,
    /// Graph definition when `graph` is `"custom"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_graph: Option<ConnectivityGraph>,
}

impl GateSequence {
    pub fn new(graph: &ConnectivityGraph, template: &[(usize, usize)], taus: &[f64]) -> Self {
        let pulses = template.iter().zip(taus).map(|(&edge, &tau)| Pulse { edge, tau: canonical_tau(tau) }).collect();
        let mut s = GateSequence {
            graph: graph.label.as_str().to_string(),
            pulses,
            seed: None,
            objective_value: None,
            time_steps: None,
            custom_graph: if graph.label == GraphLabel::Custom { Some(graph.clone()) } else { None },
        };
        s.time_steps = Some(s.count_time_steps());
        s
    }

    /// Resolves the graph this sequence refers to.
    pub fn resolve_graph(&self) -> Result<ConnectivityGraph> {
        match GraphLabel::parse(&self.graph) {
            Some(GraphLabel::Custom) => self
                .custom_graph
                .clone()
                .ok_or_else(|| Error::InvalidArgument("custom sequence without custom_graph".into()))?
                .validated(),
            Some(label) => ConnectivityGraph::preset(label),
            None => Err(Error::InvalidArgument(format!("unknown graph label {:?}", self.graph))),
        }
    }

    /// Number of layers when each pulse starts right after the last earlier
    /// pulse sharing a spin with it.
    pub fn count_time_steps(&self) -> usize {
        let mut free_at: HashMap<usize, usize> = HashMap::new();
        let mut depth = 0;
        for p in &self.pulses {
            let (i, j) = p.edge;
            let layer = free_at.get(&i).copied().unwrap_or(0).max(free_at.get(&j).copied().unwrap_or(0)) + 1;
            free_at.insert(i, layer);
            free_at.insert(j, layer);
            depth = depth.max(layer);
        }
        depth
    }

    pub fn validate_on(&self, graph: &ConnectivityGraph) -> Result<()> {
        for p in &self.pulses {
            let (i, j) = p.edge;
            for k in [i, j] {
                if k >= graph.n_spins {
                    return Err(Error::SpinIndex { index: k, n_spins: graph.n_spins });
                }
            }
            if !graph.contains(i, j) {
                return Err(Error::EdgeNotInGraph(i, j));
            }
            if !p.tau.is_finite() {
                return Err(Error::InvalidArgument("pulse duration must be finite".into()));
            }
        }
        Ok(())
    }
}

/// `tau` reduced to `[0, 1)`.
pub fn canonical_tau(tau: f64) -> f64 {
    let r = tau.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Product of the exchange unitaries, last pulse leftmost, on `sector`.
pub fn sequence_unitary(seq: &GateSequence, graph: &ConnectivityGraph, sector: &SpinSector) -> Result<CMatrix> {
    seq.validate_on(graph)?;
    let n = sector.dim();
    let mut u = CMatrix::identity(n, n);
    for p in &seq.pulses {
        u = exchange_unitary(p.edge.0, p.edge.1, p.tau, sector)? * u;
    }
    Ok(u)
}

/// Leakage bound for a sequence to count as CNOT-class.
pub const VERIFY_LEAKAGE_TOL: f64 = 1e-8;
/// Bound on `|G1|` and `|G2 − 1|` for a sequence to count as CNOT-class.
pub const VERIFY_INVARIANT_TOL: f64 = 1e-4;

/// Recomputed properties of a sequence on its graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub n_pulses: usize,
    pub time_steps: usize,
    pub leakage: f64,
    /// `[re, im]` of G1 on the closest unitary to the logical block.
    pub g1: [f64; 2],
    /// `[re, im]` of G2 on the closest unitary to the logical block.
    pub g2: [f64; 2],
    /// Phase-minimized Frobenius distance of the logical block to CNOT.
    pub distance_to_cnot: f64,
    pub cnot_class: bool,
    /// Logical block with off-diagonal entries below 1e-12 in modulus.
    pub diagonal: bool,
    /// Logical block as `[re, im]` pairs, row-major.
    pub logical_block: Vec<Vec<[f64; 2]>>,
}

/// Rebuilds the full sector unitary pulse by pulse and reads off leakage,
/// invariants and distance to CNOT.
pub fn verify_sequence(seq: &GateSequence) -> Result<Verification> {
    let graph = seq.resolve_graph()?;
    let enc = LogicalEncoding::for_graph(&graph)?;
    let u = sequence_unitary(seq, &graph, &enc.sector)?;
    let (m, leakage) = logical_block(&u, &enc);
    let w = crate::linalg::polar_unitary(&m);
    let (g1, g2) = makhlin_raw(&w);
    let distance_to_cnot = crate::linalg::phase_min_distance(&m, &cnot());
    let cnot_class = leakage < VERIFY_LEAKAGE_TOL
        && g1.norm() < VERIFY_INVARIANT_TOL
        && (g2 - ONE).norm() < VERIFY_INVARIANT_TOL;
    let mut diagonal = true;
    for i in 0..4 {
        for j in 0..4 {
            if i != j && m[(i, j)].norm() >= 1e-12 {
                diagonal = false;
            }
        }
    }
    let logical_block = (0..4).map(|i| (0..4).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
    Ok(Verification {
        n_pulses: seq.pulses.len(),
        time_steps: seq.count_time_steps(),
        leakage,
        g1: [g1.re, g1.im],
        g2: [g2.re, g2.im],
        distance_to_cnot,
        cnot_class,
        diagonal,
        logical_block,
    })
}
