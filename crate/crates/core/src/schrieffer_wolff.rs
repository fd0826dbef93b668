//! Schrieffer–Wolff reduction of the double-dot Hamiltonian to a two-level
//! qubit, with an exact-diagonalization reference.
//!
//! The generator satisfies `T + [iS, U] = 0` on the (2,1) ⊕ (1,2) space. To
//! second order in `t` the transformed Hamiltonian is `U + ½[iS, T]`, and its
//! (2,1) block, written in the logical basis, is the qubit Hamiltonian.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hubbard::{dot_spectra, split_operators, HubbardParams, Site};
use crate::linalg::{commutator, hermitian_eigh, loglog_slope, max_abs, CMatrix, CVector, C64, ZERO};
use crate::many_body::{build_basis, project_spin, FockBasis, ManyBodyOperator};

/// Default smallest |U_n − U_m| accepted in generator denominators (meV).
pub const DEFAULT_DEGENERACY_FLOOR: f64 = 1e-6;

/// Generator `iS` with the eigen-decomposition of `U` it was built from.
#[derive(Debug, Clone)]
pub struct SwGenerator {
    /// Anti-Hermitian generator on the basis of `U`.
    pub is: ManyBodyOperator,
    /// Eigenvalues of `U`, one per column of `u_vectors`.
    pub u_values: Vec<f64>,
    /// Eigenvectors of `U`, computed block by block.
    pub u_vectors: CMatrix,
    /// Charge configuration of each eigenvector.
    pub u_blocks: Vec<(u32, u32)>,
}

/// Builds `iS` with `⟨n|iS|m⟩ = ⟨n|T|m⟩ / (U_n − U_m)` between eigenstates of
/// `U` in different charge configurations.
pub fn sw_generator(u: &ManyBodyOperator, t: &ManyBodyOperator, degeneracy_floor: f64) -> Result<SwGenerator> {
    let basis = u.basis().clone();
    if t.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: t.dim() });
    }
    let n = basis.dim();
    let labels: Vec<(u32, u32)> = basis.states().iter().map(|s| s.charge_config()).collect();
    let um = u.matrix();
    let tm = t.matrix();
    let u_scale = max_abs(um).max(1.0);
    let mut off_block = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if labels[i] != labels[j] {
                off_block = off_block.max(um[(i, j)].norm());
            } else if tm[(i, j)].norm() > 0.0 {
                return Err(Error::InvalidArgument("T has elements inside a charge configuration".into()));
            }
        }
    }
    if off_block > 1e-12 * u_scale {
        return Err(Error::NotBlockDiagonal(off_block));
    }

    let mut distinct = labels.clone();
    distinct.sort();
    distinct.dedup();
    let mut u_values = Vec::with_capacity(n);
    let mut u_vectors = CMatrix::zeros(n, n);
    let mut u_blocks = Vec::with_capacity(n);
    for lab in distinct {
        let idx: Vec<usize> = (0..n).filter(|&i| labels[i] == lab).collect();
        let block = CMatrix::from_fn(idx.len(), idx.len(), |a, b| um[(idx[a], idx[b])]);
        let (w, v) = hermitian_eigh(&block);
        for k in 0..idx.len() {
            let col = u_values.len();
            for (a, &i) in idx.iter().enumerate() {
                u_vectors[(i, col)] = v[(a, k)];
            }
            u_values.push(w[k]);
            u_blocks.push(lab);
        }
    }

    let t_eig = u_vectors.adjoint() * tm * &u_vectors;
    let tiny = 1e-13 * max_abs(tm);
    let mut is_eig = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            if u_blocks[a] == u_blocks[b] || t_eig[(a, b)].norm() <= tiny {
                continue;
            }
            let gap = u_values[a] - u_values[b];
            if gap.abs() < degeneracy_floor {
                return Err(Error::NearDegenerate { n: a, m: b, gap: gap.abs() });
            }
            is_eig[(a, b)] = t_eig[(a, b)] / gap;
        }
    }
    let is = &u_vectors * is_eig * u_vectors.adjoint();
    Ok(SwGenerator { is: ManyBodyOperator::new(is, basis)?, u_values, u_vectors, u_blocks })
}

/// `[iS, T]`, the second-order virtual-hopping operator.
pub fn second_order_block(gen: &SwGenerator, t: &ManyBodyOperator) -> ManyBodyOperator {
    let m = commutator(gen.is.matrix(), t.matrix());
    ManyBodyOperator::new(m, gen.is.basis().clone()).expect("same basis")
}

/// Exchange couplings of the closed-form model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub j1: f64,
    pub j2: f64,
    pub jp: f64,
    /// Tunneling amplitude used (L1–R1).
    pub t: f64,
    pub warnings: Vec<String>,
}

/// `J1 = 2t²/(E_S^R − E_S^L)`, `J2 = 2t²/(E_S^R − E_T^L)`, `J' = (J1 + J2)/2`,
/// with `t` the L1–R1 tunneling.
pub fn effective_couplings(p: &HubbardParams) -> Result<Couplings> {
    let d = dot_spectra(p);
    let den1 = d.e_s_r - d.e_s_l;
    let den2 = d.e_s_r - d.e_t_l;
    if den2 <= 0.0 || den1 <= 0.0 {
        return Err(Error::RegimeViolation(format!(
            "need E_S^R - E_S^L > 0 and E_S^R - E_T^L > 0, got {den1} and {den2} meV"
        )));
    }
    let (l1, l2, r1, r2) = (Site::L1.index(), Site::L2.index(), Site::R1.index(), Site::R2.index());
    let t = p.tun[l1][r1];
    let mut warnings = d.warnings();
    if p.tun[l2][r1] != t {
        warnings.push(format!(
            "unequal tunneling: t(L1,R1) = {t} meV but t(L2,R1) = {} meV; couplings use t(L1,R1)",
            p.tun[l2][r1]
        ));
    }
    if p.tun[l1][r2] != 0.0 || p.tun[l2][r2] != 0.0 {
        warnings.push("tunneling into R2 is not part of the closed-form couplings".into());
    }
    let j1 = 2.0 * t * t / den1;
    let j2 = 2.0 * t * t / den2;
    let jp = (j1 + j2) / 2.0;
    Ok(Couplings { j1, j2, jp, t, warnings })
}

/// Which closed form to use for the 2×2 qubit Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticForm {
    /// `[[−J1, √(3/2) J'], [√(3/2) J', E_ST − (3/2)(J1 + J2)]]`, the commonly
    /// quoted form built from the full commutator `[iS, T]`.
    Published,
    /// `[[−J1/2, √(3/2) J'/2], [√(3/2) J'/2, E_ST − (3/2) J2]]`, the projection of
    /// `U + ½[iS, T]` when the left levels are aligned with R1, which is the
    /// consistent second-order result.
    SecondOrder,
}

/// Two-level qubit Hamiltonian in the logical basis, in meV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveQubit {
    pub j1: f64,
    pub j2: f64,
    pub jp: f64,
    pub e_st_l: f64,
    pub h2: [[f64; 2]; 2],
}

impl EffectiveQubit {
    pub fn new(j1: f64, j2: f64, jp: f64, e_st_l: f64, form: AnalyticForm) -> Self {
        let s = 1.5f64.sqrt();
        let h2 = match form {
            AnalyticForm::Published => [[-j1, s * jp], [s * jp, e_st_l - 1.5 * (j1 + j2)]],
            AnalyticForm::SecondOrder => [[-0.5 * j1, 0.5 * s * jp], [0.5 * s * jp, e_st_l - 1.5 * j2]],
        };
        EffectiveQubit { j1, j2, jp, e_st_l, h2 }
    }

    /// Bare qubit with splitting `e_st_l` and no exchange.
    pub fn bare(e_st_l: f64) -> Self {
        EffectiveQubit::new(0.0, 0.0, 0.0, e_st_l, AnalyticForm::Published)
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        eigen2(&self.h2)
    }

    pub fn gap(&self) -> f64 {
        let [a, b] = self.eigenvalues();
        b - a
    }
}

fn eigen2(h: &[[f64; 2]; 2]) -> [f64; 2] {
    let mean = 0.5 * (h[0][0] + h[1][1]);
    let half = 0.5 * (h[0][0] - h[1][1]);
    let r = (half * half + h[0][1] * h[1][0]).max(0.0).sqrt();
    [mean - r, mean + r]
}

pub fn effective_hamiltonian_analytic(p: &HubbardParams, form: AnalyticForm) -> Result<EffectiveQubit> {
    let c = effective_couplings(p)?;
    let d = dot_spectra(p);
    Ok(EffectiveQubit::new(c.j1, c.j2, c.jp, d.delta_st_left(), form))
}

/// The two logical three-electron states.
#[derive(Debug, Clone)]
pub struct LogicalStates {
    pub ket0: CVector,
    pub ket1: CVector,
}

/// `|0⟩ = c†_{L1↑} c†_{L1↓} c†_{R1↓}|0⟩` and
/// `|1⟩ = √(1/6)(|L1↑ L2↓ R1↓⟩ + |L1↓ L2↑ R1↓⟩) − √(2/3)|L1↓ L2↓ R1↑⟩`,
/// each ket written as creators applied in the listed order.
///
/// `basis` must contain these occupations, e.g. the (8, 3) basis or its (2,1) part.
pub fn logical_states(basis: &FockBasis) -> Result<LogicalStates> {
    use crate::many_body::{mode, Dot::*, Spin::*};
    if basis.n_modes() != 8 || basis.n_electrons() != 3 {
        return Err(Error::InvalidArgument("logical states need the 8-mode, 3-electron basis".into()));
    }
    let l1u = mode(Left, 1, Up);
    let l1d = mode(Left, 1, Down);
    let l2u = mode(Left, 2, Up);
    let l2d = mode(Left, 2, Down);
    let r1u = mode(Right, 1, Up);
    let r1d = mode(Right, 1, Down);
    let needed = [[l1u, l1d, r1d], [l1u, l2d, r1d], [l1d, l2u, r1d], [l1d, l2d, r1u]];
    for m in needed {
        let (s, _) = crate::many_body::FockState::from_creators(&m, 8).expect("distinct modes");
        if basis.position(&s).is_none() {
            return Err(Error::InvalidArgument("basis lacks a logical-state occupation".into()));
        }
    }
    let ket0 = CVector::from_vec(basis.slater(&[l1u, l1d, r1d]));
    let a = (1.0f64 / 6.0).sqrt();
    let b = (2.0f64 / 3.0).sqrt();
    let t1 = CVector::from_vec(basis.slater(&[l1u, l2d, r1d]));
    let t2 = CVector::from_vec(basis.slater(&[l1d, l2u, r1d]));
    let t3 = CVector::from_vec(basis.slater(&[l1d, l2d, r1u]));
    let ket1 = (t1 + t2) * C64::new(a, 0.0) - t3 * C64::new(b, 0.0);
    Ok(LogicalStates { ket0, ket1 })
}

/// How much of the commutator enters the transformed Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// `U + ½[iS, T]`, the consistent second-order expansion of `e^{iS} H e^{−iS}`.
    SecondOrder,
    /// `U + [iS, T]`.
    FullCommutator,
}

/// Numerically projected qubit Hamiltonian.
#[derive(Debug, Clone)]
pub struct NumericEffective {
    /// Logical-basis matrix, shifted so that `⟨0|U|0⟩ = 0`.
    pub h2: [[C64; 2]; 2],
    /// Largest matrix element of the transformed (2,1) block between S = 1/2
    /// and S = 3/2 states with Sz = −1/2.
    pub spin_mixing: f64,
}

impl NumericEffective {
    pub fn real_h2(&self) -> [[f64; 2]; 2] {
        [[self.h2[0][0].re, self.h2[0][1].re], [self.h2[1][0].re, self.h2[1][1].re]]
    }

    pub fn gap(&self) -> f64 {
        let h = &self.h2;
        let half = 0.5 * (h[0][0].re - h[1][1].re);
        2.0 * (half * half + h[0][1].norm_sqr()).sqrt()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NumericOptions {
    pub truncation: Truncation,
    pub degeneracy_floor: f64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions { truncation: Truncation::SecondOrder, degeneracy_floor: DEFAULT_DEGENERACY_FLOOR }
    }
}

/// The transformed Hamiltonian on (2,1) ⊕ (1,2) with its basis.
pub fn transformed_hamiltonian(p: &HubbardParams, opts: NumericOptions) -> Result<ManyBodyOperator> {
    let full = build_basis(8, 3)?;
    let sub = Arc::new(full.restrict(|s| matches!(s.charge_config(), (2, 1) | (1, 2)))?);
    let (u0, u1, t) = split_operators(p, &sub)?;
    let u = &u0 + &u1;
    let gen = sw_generator(&u, &t, opts.degeneracy_floor)?;
    let k = second_order_block(&gen, &t);
    let f = match opts.truncation {
        Truncation::SecondOrder => 0.5,
        Truncation::FullCommutator => 1.0,
    };
    let m = u.matrix() + k.matrix() * C64::new(f, 0.0);
    ManyBodyOperator::new(m, sub)
}

pub fn effective_hamiltonian_numeric(p: &HubbardParams, opts: NumericOptions) -> Result<NumericEffective> {
    let h = transformed_hamiltonian(p, opts)?;
    let sub = h.basis().clone();
    let (u0, u1, _) = split_operators(p, &sub)?;
    let u = u0.matrix() + u1.matrix();
    let ls = logical_states(&sub)?;
    let kets = [&ls.ket0, &ls.ket1];
    let shift = (ls.ket0.adjoint() * &u * &ls.ket0)[(0, 0)].re;
    let mut h2 = [[ZERO; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            h2[a][b] = (kets[a].adjoint() * h.matrix() * kets[b])[(0, 0)];
        }
        h2[a][a] -= C64::new(shift, 0.0);
    }

    let in21 = |s: &crate::many_body::FockState| s.charge_config() == (2, 1);
    let doublets = project_spin(&sub, 1, -1, in21)?;
    let quartets = project_spin(&sub, 3, -1, in21)?;
    let mixing = quartets.columns.adjoint() * h.matrix() * &doublets.columns;
    Ok(NumericEffective { h2, spin_mixing: max_abs(&mixing) })
}

/// Two lowest S = 1/2, Sz = −1/2 levels of the full 56-state Hamiltonian.
pub fn exact_qubit_levels(p: &HubbardParams) -> Result<[f64; 2]> {
    let basis = Arc::new(build_basis(8, 3)?);
    let h = crate::hubbard::build_full_hamiltonian(p, &basis)?;
    let doublets = project_spin(&basis, 1, -1, |_| true)?;
    let hs = doublets.columns.adjoint() * h.matrix() * &doublets.columns;
    let (w, _) = hermitian_eigh(&hs);
    Ok([w[0], w[1]])
}

/// One point of a tunneling sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub t: f64,
    pub exact_gap: f64,
    pub analytic_gap: f64,
    pub numeric_gap: f64,
}

/// Gap errors against exact diagonalization over a tunneling sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub form: AnalyticForm,
    pub points: Vec<ScalingPoint>,
    /// Log-log slope of |analytic − exact| against t.
    pub analytic_exponent: f64,
    /// Log-log slope of |numeric − exact| against t.
    pub numeric_exponent: f64,
}

/// Sweeps `t = f · (E_S^R − E_T^L)` for each `f` in `fractions`.
///
/// Existing tunneling is rescaled so its ratios are kept; when L1–R1
/// tunneling is zero, L1–R1 and L2–R1 are set to `t`.
pub fn gap_scaling(p: &HubbardParams, fractions: &[f64], form: AnalyticForm) -> Result<ScalingReport> {
    let d = dot_spectra(p);
    let delta = d.e_s_r - d.e_t_l;
    if delta <= 0.0 {
        return Err(Error::RegimeViolation(format!("E_S^R - E_T^L = {delta} meV is not positive")));
    }
    let t_ref = p.tun[Site::L1.index()][Site::R1.index()];
    let mut points = Vec::with_capacity(fractions.len());
    for &f in fractions {
        let t = f * delta;
        let q = if t_ref != 0.0 { p.scaled_tunneling(t / t_ref) } else { p.with_equal_tunneling(t) };
        let [e0, e1] = exact_qubit_levels(&q)?;
        let analytic = effective_hamiltonian_analytic(&q, form)?;
        let numeric = effective_hamiltonian_numeric(&q, NumericOptions::default())?;
        points.push(ScalingPoint { t, exact_gap: e1 - e0, analytic_gap: analytic.gap(), numeric_gap: numeric.gap() });
    }
    let ts: Vec<f64> = points.iter().map(|x| x.t).collect();
    let ea: Vec<f64> = points.iter().map(|x| (x.analytic_gap - x.exact_gap).abs()).collect();
    let en: Vec<f64> = points.iter().map(|x| (x.numeric_gap - x.exact_gap).abs()).collect();
    Ok(ScalingReport { form, analytic_exponent: loglog_slope(&ts, &ea), numeric_exponent: loglog_slope(&ts, &en), points })
}
