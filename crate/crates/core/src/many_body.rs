//! Fermionic occupation-number basis and operator algebra.
//!
//! Mode ordering for the double-dot model is dot-major, then orbital, then
//! spin:
//!
//! | index | 0 | 1 | 2 | 3 | 4 | 5 | 6 | 7 |
//! |-------|---|---|---|---|---|---|---|---|
//! | mode  | L1↑ | L1↓ | L2↑ | L2↓ | R1↑ | R1↓ | R2↑ | R2↓ |
//!
//! A state is a bitmask with bit `k` set when mode `k` is occupied, and
//! `c†_a c†_b c†_c |0⟩` is the stored state with sign `+1` when `a < b < c`.
//! Creating or annihilating mode `k` picks up `(−1)^n` where `n` is the number
//! of occupied modes with index below `k`. Every sign in the crate follows
//! from this one rule.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigh, CMatrix, C64, ONE, ZERO};

/// Number of spin-orbitals in the double-dot model.
pub const DOUBLE_DOT_MODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dot {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

/// One of the eight single-particle modes of the double dot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinOrbital {
    pub dot: Dot,
    /// 1 = ground orbital, 2 = first excited orbital.
    pub orbital: u8,
    pub spin: Spin,
}

impl SpinOrbital {
    /// # Panics
    /// If `orbital` is not 1 or 2.
    pub fn new(dot: Dot, orbital: u8, spin: Spin) -> Self {
        assert!(orbital == 1 || orbital == 2, "orbital must be 1 or 2, got {orbital}");
        SpinOrbital { dot, orbital, spin }
    }

    pub fn index(&self) -> usize {
        let d = match self.dot {
            Dot::Left => 0,
            Dot::Right => 1,
        };
        let s = match self.spin {
            Spin::Up => 0,
            Spin::Down => 1,
        };
        d * 4 + (self.orbital as usize - 1) * 2 + s
    }

    pub fn from_index(index: usize) -> Option<Self> {
        if index >= DOUBLE_DOT_MODES {
            return None;
        }
        let dot = if index < 4 { Dot::Left } else { Dot::Right };
        let orbital = ((index % 4) / 2 + 1) as u8;
        let spin = if index % 2 == 0 { Spin::Up } else { Spin::Down };
        Some(SpinOrbital { dot, orbital, spin })
    }

    /// Spatial orbital index: L1 = 0, L2 = 1, R1 = 2, R2 = 3.
    pub fn site(&self) -> usize {
        self.index() / 2
    }

    pub fn all() -> [SpinOrbital; DOUBLE_DOT_MODES] {
        std::array::from_fn(|k| SpinOrbital::from_index(k).unwrap())
    }
}

/// Shorthand used in tests and state construction, e.g. `mode(Dot::Left, 1, Spin::Up)`.
pub fn mode(dot: Dot, orbital: u8, spin: Spin) -> usize {
    SpinOrbital::new(dot, orbital, spin).index()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// Occupation-number state over `n_modes` modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    occupation: u64,
    n_modes: u8,
}

impl FockState {
    /// # Panics
    /// If `n_modes > 62` or `occupation` has bits at or above `n_modes`.
    pub fn new(occupation: u64, n_modes: usize) -> Self {
        assert!(n_modes <= 62, "at most 62 modes are supported");
        assert!(occupation >> n_modes == 0, "occupation exceeds mode count");
        FockState { occupation, n_modes: n_modes as u8 }
    }

    pub fn vacuum(n_modes: usize) -> Self {
        FockState::new(0, n_modes)
    }

    /// Builds `c†_{m0} c†_{m1} … |0⟩` and returns it with its sign relative to
    /// the stored bitmask, or `None` when a mode repeats.
    pub fn from_creators(modes: &[usize], n_modes: usize) -> Option<(FockState, f64)> {
        let mut state = FockState::vacuum(n_modes);
        let mut sign = 1.0;
        for &m in modes.iter().rev() {
            let (next, s) = state.apply(m, Ladder::Create)?;
            state = next;
            sign *= s;
        }
        Some((state, sign))
    }

    pub fn occupation(&self) -> u64 {
        self.occupation
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes as usize
    }

    pub fn n_electrons(&self) -> u32 {
        self.occupation.count_ones()
    }

    pub fn is_occupied(&self, mode: usize) -> bool {
        self.occupation >> mode & 1 == 1
    }

    /// Electrons on the left and right halves of the mode list.
    pub fn charge_config(&self) -> (u32, u32) {
        let half = self.n_modes as usize / 2;
        let left_mask = (1u64 << half) - 1;
        ((self.occupation & left_mask).count_ones(), (self.occupation & !left_mask).count_ones())
    }

    /// Twice the total Sz. Even mode indices are spin up.
    pub fn twice_sz(&self) -> i32 {
        let up = self.occupation & 0x5555_5555_5555_5555;
        let down = self.occupation & 0xAAAA_AAAA_AAAA_AAAA;
        up.count_ones() as i32 - down.count_ones() as i32
    }

    /// Applies a creation or annihilation operator.
    ///
    /// # Panics
    /// If `mode >= n_modes`.
    pub fn apply(&self, mode: usize, kind: Ladder) -> Option<(FockState, f64)> {
        assert!(mode < self.n_modes as usize, "mode {mode} out of range");
        let bit = 1u64 << mode;
        let occupied = self.occupation & bit != 0;
        let next = match (kind, occupied) {
            (Ladder::Create, false) | (Ladder::Annihilate, true) => self.occupation ^ bit,
            _ => return None,
        };
        let sign = if (self.occupation & (bit - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        Some((FockState { occupation: next, n_modes: self.n_modes }, sign))
    }
}

/// See [`FockState::apply`].
pub fn apply_fermion(state: FockState, mode: SpinOrbital, kind: Ladder) -> Option<(FockState, f64)> {
    state.apply(mode.index(), kind)
}

/// Ordered set of fixed-particle-number states.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    n_modes: usize,
    n_electrons: usize,
    states: Vec<FockState>,
    index: HashMap<u64, usize>,
}

impl FockBasis {
    fn from_states(n_modes: usize, n_electrons: usize, states: Vec<FockState>) -> Self {
        let index = states.iter().enumerate().map(|(i, s)| (s.occupation, i)).collect();
        FockBasis { n_modes, n_electrons, states, index }
    }

    /// Sub-basis keeping the states accepted by `keep`, in the original order.
    pub fn restrict(&self, keep: impl Fn(&FockState) -> bool) -> Result<FockBasis> {
        let states: Vec<FockState> = self.states.iter().copied().filter(|s| keep(s)).collect();
        if states.is_empty() {
            return Err(Error::EmptySubspace("no basis state satisfies the predicate".into()));
        }
        Ok(FockBasis::from_states(self.n_modes, self.n_electrons, states))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn position(&self, state: &FockState) -> Option<usize> {
        self.index.get(&state.occupation).copied()
    }

    /// Column vector for `c†_{m0} c†_{m1} … |0⟩`.
    ///
    /// # Panics
    /// If the state is not in the basis or a mode repeats.
    pub fn slater(&self, modes: &[usize]) -> Vec<C64> {
        let (state, sign) = FockState::from_creators(modes, self.n_modes).expect("repeated mode");
        let pos = self.position(&state).expect("state outside basis");
        let mut v = vec![ZERO; self.dim()];
        v[pos] = C64::new(sign, 0.0);
        v
    }
}

/// All `C(n_modes, n_electrons)` states in ascending bitmask order.
pub fn build_basis(n_modes: usize, n_electrons: usize) -> Result<FockBasis> {
    if n_modes > 62 || n_electrons > n_modes {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= n_electrons <= n_modes <= 62, got n_modes={n_modes}, n_electrons={n_electrons}"
        )));
    }
    let mut states = Vec::new();
    if n_electrons == 0 {
        states.push(FockState::vacuum(n_modes));
    } else {
        // Gosper's hack walks fixed-popcount masks in increasing order
        let mut x: u64 = (1u64 << n_electrons) - 1;
        let limit = 1u64 << n_modes;
        while x < limit {
            states.push(FockState::new(x, n_modes));
            let c = x & x.wrapping_neg();
            let r = x + c;
            x = (((r ^ x) >> 2) / c) | r;
        }
    }
    Ok(FockBasis::from_states(n_modes, n_electrons, states))
}

/// Second-quantized operator term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Term {
    /// `coeff · n_mode`
    Number { mode: usize, coeff: C64 },
    /// `coeff · c†_create c_annihilate`
    Hopping { create: usize, annihilate: usize, coeff: C64 },
    /// `coeff · c†_{create[0]} c†_{create[1]} c_{annihilate[0]} c_{annihilate[1]}`
    TwoBody { create: [usize; 2], annihilate: [usize; 2], coeff: C64 },
}

impl Term {
    fn modes(&self) -> Vec<usize> {
        match *self {
            Term::Number { mode, .. } => vec![mode],
            Term::Hopping { create, annihilate, .. } => vec![create, annihilate],
            Term::TwoBody { create, annihilate, .. } => vec![create[0], create[1], annihilate[0], annihilate[1]],
        }
    }

    fn coeff(&self) -> C64 {
        match *self {
            Term::Number { coeff, .. } | Term::Hopping { coeff, .. } | Term::TwoBody { coeff, .. } => coeff,
        }
    }

    /// Operator string in left-to-right order.
    fn ladder(&self) -> Vec<(usize, Ladder)> {
        use Ladder::*;
        match *self {
            Term::Number { mode, .. } => vec![(mode, Create), (mode, Annihilate)],
            Term::Hopping { create, annihilate, .. } => vec![(create, Create), (annihilate, Annihilate)],
            Term::TwoBody { create, annihilate, .. } => vec![
                (create[0], Create),
                (create[1], Create),
                (annihilate[0], Annihilate),
                (annihilate[1], Annihilate),
            ],
        }
    }
}

fn apply_string(state: FockState, ops: &[(usize, Ladder)]) -> Option<(FockState, f64)> {
    let mut s = state;
    let mut sign = 1.0;
    for &(m, kind) in ops.iter().rev() {
        let (next, sg) = s.apply(m, kind)?;
        s = next;
        sign *= sg;
    }
    Some((s, sign))
}

/// Dense operator on a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct ManyBodyOperator {
    matrix: CMatrix,
    basis: Arc<FockBasis>,
}

impl ManyBodyOperator {
    pub fn new(matrix: CMatrix, basis: Arc<FockBasis>) -> Result<Self> {
        let n = basis.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        Ok(ManyBodyOperator { matrix, basis })
    }

    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let n = basis.dim();
        ManyBodyOperator { matrix: CMatrix::zeros(n, n), basis }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        crate::linalg::hermiticity_error(&self.matrix) <= tol
    }

    /// Matrix elements between the states of `sub`, which must be a sub-basis.
    pub fn restrict_to(&self, sub: &Arc<FockBasis>) -> Result<ManyBodyOperator> {
        let idx = sub_indices(&self.basis, sub)?;
        let m = CMatrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])]);
        ManyBodyOperator::new(m, sub.clone())
    }
}

impl std::ops::Add for &ManyBodyOperator {
    type Output = ManyBodyOperator;
    fn add(self, rhs: &ManyBodyOperator) -> ManyBodyOperator {
        assert!(Arc::ptr_eq(&self.basis, &rhs.basis) || *self.basis == *rhs.basis, "basis mismatch");
        ManyBodyOperator { matrix: &self.matrix + &rhs.matrix, basis: self.basis.clone() }
    }
}

/// Positions of the states of `sub` inside `full`.
pub fn sub_indices(full: &FockBasis, sub: &FockBasis) -> Result<Vec<usize>> {
    sub.states()
        .iter()
        .map(|s| {
            full.position(s)
                .ok_or_else(|| Error::InvalidArgument("basis is not a sub-basis of the operator basis".into()))
        })
        .collect()
}

/// Sums the matrix elements of `terms` over `basis`.
///
/// Terms whose action leaves the basis are dropped, so on a sub-basis the
/// result is the projected operator.
pub fn build_operator(basis: &Arc<FockBasis>, terms: &[Term]) -> Result<ManyBodyOperator> {
    let n_modes = basis.n_modes();
    for t in terms {
        if let Some(&bad) = t.modes().iter().find(|&&m| m >= n_modes) {
            return Err(Error::InvalidMode { mode: bad, n_modes });
        }
    }
    let n = basis.dim();
    let mut m = CMatrix::zeros(n, n);
    for t in terms {
        let coeff = t.coeff();
        if coeff == ZERO {
            continue;
        }
        let ops = t.ladder();
        for (col, &s) in basis.states().iter().enumerate() {
            if let Some((out, sign)) = apply_string(s, &ops) {
                if let Some(row) = basis.position(&out) {
                    m[(row, col)] += coeff * sign;
                }
            }
        }
    }
    ManyBodyOperator::new(m, basis.clone())
}

/// Total `Sz` in units of ħ.
pub fn total_sz(basis: &Arc<FockBasis>) -> ManyBodyOperator {
    let n = basis.dim();
    let mut m = CMatrix::zeros(n, n);
    for (i, s) in basis.states().iter().enumerate() {
        m[(i, i)] = C64::new(0.5 * s.twice_sz() as f64, 0.0);
    }
    ManyBodyOperator { matrix: m, basis: basis.clone() }
}

/// Total `S²` in units of ħ², as `S⁻S⁺ + Sz² + Sz`.
///
/// `S⁻S⁺` is written in normal order so it fits the term kinds of
/// [`build_operator`]. Exact on any basis closed under spin flips.
pub fn total_s_squared(basis: &Arc<FockBasis>) -> ManyBodyOperator {
    let n_sites = basis.n_modes() / 2;
    let mut terms = Vec::new();
    for p in 0..n_sites {
        let (pu, pd) = (2 * p, 2 * p + 1);
        terms.push(Term::Number { mode: pd, coeff: ONE });
        for q in 0..n_sites {
            let (qu, qd) = (2 * q, 2 * q + 1);
            // c†_{p↓} c_{p↑} c†_{q↑} c_{q↓} = δ_pq n_{p↓} − c†_{p↓} c†_{q↑} c_{p↑} c_{q↓}
            terms.push(Term::TwoBody { create: [pd, qu], annihilate: [pu, qd], coeff: -ONE });
        }
    }
    let mut op = build_operator(basis, &terms).expect("modes in range");
    let sz = total_sz(basis);
    op.matrix += &sz.matrix * &sz.matrix + &sz.matrix;
    op
}

/// Orthonormal column set and projector for a subspace of a basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    pub columns: CMatrix,
    pub projector: CMatrix,
}

impl Subspace {
    fn from_columns(columns: CMatrix) -> Self {
        let projector = &columns * columns.adjoint();
        Subspace { columns, projector }
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }
}

/// Span of the basis states accepted by `keep`.
pub fn project_states(basis: &FockBasis, keep: impl Fn(&FockState) -> bool) -> Result<Subspace> {
    let picked: Vec<usize> = (0..basis.dim()).filter(|&i| keep(&basis.states()[i])).collect();
    if picked.is_empty() {
        return Err(Error::EmptySubspace("no basis state satisfies the predicate".into()));
    }
    let mut cols = CMatrix::zeros(basis.dim(), picked.len());
    for (j, &i) in picked.iter().enumerate() {
        cols[(i, j)] = ONE;
    }
    Ok(Subspace::from_columns(cols))
}

/// States accepted by `keep` with total spin `twice_s / 2` and `Sz = twice_sz / 2`.
///
/// `keep` should select a set closed under spin rotations, such as a charge
/// configuration, otherwise `S²` is not block diagonal on it.
pub fn project_spin(
    basis: &Arc<FockBasis>,
    twice_s: u32,
    twice_sz: i32,
    keep: impl Fn(&FockState) -> bool,
) -> Result<Subspace> {
    let picked: Vec<usize> =
        (0..basis.dim()).filter(|&i| keep(&basis.states()[i]) && basis.states()[i].twice_sz() == twice_sz).collect();
    if picked.is_empty() {
        return Err(Error::EmptySubspace(format!("no states with 2Sz = {twice_sz}")));
    }
    let s2 = total_s_squared(basis);
    let block = CMatrix::from_fn(picked.len(), picked.len(), |i, j| s2.matrix[(picked[i], picked[j])]);
    let (w, v) = hermitian_eigh(&block);
    let s = twice_s as f64 / 2.0;
    let target = s * (s + 1.0);
    let chosen: Vec<usize> = (0..w.len()).filter(|&k| (w[k] - target).abs() < 1e-8).collect();
    if chosen.is_empty() {
        return Err(Error::EmptySubspace(format!("no states with S = {s}, 2Sz = {twice_sz}")));
    }
    let mut cols = CMatrix::zeros(basis.dim(), chosen.len());
    for (j, &k) in chosen.iter().enumerate() {
        for (r, &i) in picked.iter().enumerate() {
            cols[(i, j)] = v[(r, k)];
        }
    }
    Ok(Subspace::from_columns(cols))
}
