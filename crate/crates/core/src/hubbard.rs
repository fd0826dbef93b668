//! Three-electron double-dot Hamiltonian: on-site energies, Coulomb direct and
//! exchange integrals, optional general two-body integrals, and inter-dot
//! tunneling.
//!
//! Spatial orbitals ("sites") are indexed L1 = 0, L2 = 1, R1 = 2, R2 = 3. The
//! two-body part is
//!
//! ```text
//! ½ Σ_{a,b,s,s'} C_ab c†_as c†_bs' c_bs' c_as  +  ½ Σ_{a≠b,s,s'} K_ab c†_as c†_bs' c_as' c_bs
//!   + ½ Σ_{entries,s,s'} Γ_abcd c†_as c†_bs' c_cs' c_ds
//! ```
//!
//! Terms with all sites on one dot form U0, terms touching both dots form U1,
//! and tunneling forms T.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::many_body::{build_operator, FockBasis, ManyBodyOperator, Term, DOUBLE_DOT_MODES};

pub const N_SITES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Site {
    L1,
    L2,
    R1,
    R2,
}

impl Site {
    pub const ALL: [Site; 4] = [Site::L1, Site::L2, Site::R1, Site::R2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_left(self) -> bool {
        matches!(self, Site::L1 | Site::L2)
    }

    fn up(self) -> usize {
        2 * self.index()
    }
}

fn is_left(site: usize) -> bool {
    site < 2
}

/// One general two-body integral `Γ_abcd`, summed over spins as in the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaEntry {
    pub sites: [Site; 4],
    pub value: f64,
}

/// Model energies in meV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HubbardParams {
    /// `eps[dot][orbital-1]`, dot 0 = left.
    pub eps: [[f64; 2]; 2],
    /// Electrostatic shift of each dot.
    pub mu: [f64; 2],
    /// Tunneling between sites; real symmetric, zero within a dot.
    pub tun: [[f64; 4]; 4],
    /// Direct Coulomb integrals.
    #[serde(rename = "C")]
    pub coulomb: [[f64; 4]; 4],
    /// Exchange Coulomb integrals; the diagonal is unused and must be zero.
    #[serde(rename = "K")]
    pub exchange: [[f64; 4]; 4],
    #[serde(default)]
    pub gamma: Vec<GammaEntry>,
}

/// Two-electron singlet and triplet energies of each dot with the third
/// electron elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DotSpectra {
    pub e_s_l: f64,
    pub e_s_r: f64,
    pub e_t_l: f64,
    pub e_t_r: f64,
}

impl DotSpectra {
    pub fn delta_st_left(&self) -> f64 {
        self.e_t_l - self.e_s_l
    }

    /// Messages for triplets lying below singlets.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.e_t_l < self.e_s_l {
            w.push(format!("left triplet {} meV lies below left singlet {} meV", self.e_t_l, self.e_s_l));
        }
        if self.e_t_r < self.e_s_r {
            w.push(format!("right triplet {} meV lies below right singlet {} meV", self.e_t_r, self.e_s_r));
        }
        w
    }
}

fn symmetric_within(m: &[[f64; 4]; 4], tol: f64) -> Option<(usize, usize)> {
    for i in 0..4 {
        for j in 0..i {
            let scale = 1f64.max(m[i][j].abs()).max(m[j][i].abs());
            if (m[i][j] - m[j][i]).abs() > tol * scale {
                return Some((i, j));
            }
        }
    }
    None
}

impl HubbardParams {
    /// Illustrative parameters: left singlet-triplet splitting 0.05 meV,
    /// (2,1) ground configuration, tunneling 0.01 meV from both left orbitals
    /// into R1.
    pub fn illustrative() -> Self {
        let mut tun = [[0.0; 4]; 4];
        for (a, b) in [(0, 2), (1, 2)] {
            tun[a][b] = 0.01;
            tun[b][a] = 0.01;
        }
        let mut coulomb = [[0.0; 4]; 4];
        let mut exchange = [[0.0; 4]; 4];
        let set = |m: &mut [[f64; 4]; 4], a: usize, b: usize, v: f64| {
            m[a][b] = v;
            m[b][a] = v;
        };
        set(&mut coulomb, 0, 0, 8.0);
        set(&mut coulomb, 0, 1, 8.2);
        set(&mut coulomb, 1, 1, 10.0);
        set(&mut coulomb, 2, 2, 9.0);
        set(&mut coulomb, 2, 3, 11.0);
        set(&mut coulomb, 3, 3, 12.0);
        set(&mut exchange, 0, 1, 0.2);
        set(&mut exchange, 2, 3, 0.2);
        HubbardParams {
            eps: [[0.0, 0.05], [0.0, 3.0]],
            mu: [0.0, 0.0],
            tun,
            coulomb,
            exchange,
            gamma: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.eps.iter().flatten().all(|x| x.is_finite())
            && self.mu.iter().all(|x| x.is_finite())
            && self.tun.iter().flatten().all(|x| x.is_finite())
            && self.coulomb.iter().flatten().all(|x| x.is_finite())
            && self.exchange.iter().flatten().all(|x| x.is_finite())
            && self.gamma.iter().all(|g| g.value.is_finite());
        if !finite {
            return Err(Error::InvalidParams("all energies must be finite".into()));
        }
        if let Some((i, j)) = symmetric_within(&self.tun, 1e-12) {
            return Err(Error::InvalidParams(format!("tun is not symmetric at [{i}][{j}]")));
        }
        for a in 0..4 {
            for b in 0..4 {
                if is_left(a) == is_left(b) && self.tun[a][b] != 0.0 {
                    return Err(Error::InvalidParams(format!("tun[{a}][{b}] couples sites of the same dot")));
                }
            }
        }
        if let Some((i, j)) = symmetric_within(&self.coulomb, 1e-12) {
            return Err(Error::InvalidParams(format!("C is not symmetric at [{i}][{j}]")));
        }
        if let Some((i, j)) = symmetric_within(&self.exchange, 1e-12) {
            return Err(Error::InvalidParams(format!("K is not symmetric at [{i}][{j}]")));
        }
        for a in 0..4 {
            if self.exchange[a][a] != 0.0 {
                return Err(Error::InvalidParams(format!("K[{a}][{a}] must be zero; use C for on-site repulsion")));
            }
        }
        for (n, g) in self.gamma.iter().enumerate() {
            let left_create = g.sites[..2].iter().filter(|s| s.is_left()).count();
            let left_annihilate = g.sites[2..].iter().filter(|s| s.is_left()).count();
            if left_create != left_annihilate {
                return Err(Error::InvalidParams(format!("gamma[{n}] changes the charge configuration")));
            }
            let partner = [g.sites[3], g.sites[2], g.sites[1], g.sites[0]];
            let ok = partner == g.sites
                || self.gamma.iter().any(|h| h.sites == partner && (h.value - g.value).abs() <= 1e-12 * g.value.abs().max(1.0));
            if !ok {
                return Err(Error::InvalidParams(format!(
                    "gamma[{n}] has no Hermitian partner {:?} with the same value",
                    partner
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: HubbardParams =
            serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("line {} column {}: {e}", e.line(), e.column())))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    pub fn onsite(&self, site: usize) -> f64 {
        let dot = site / 2;
        self.eps[dot][site % 2] + self.mu[dot]
    }

    /// Copy with every tunneling element multiplied by `factor`.
    pub fn scaled_tunneling(&self, factor: f64) -> Self {
        let mut p = self.clone();
        for row in p.tun.iter_mut() {
            for x in row.iter_mut() {
                *x *= factor;
            }
        }
        p
    }

    /// Copy with tunneling set to `t` on L1–R1 and L2–R1 and zero elsewhere.
    pub fn with_equal_tunneling(&self, t: f64) -> Self {
        let mut p = self.clone();
        p.tun = [[0.0; 4]; 4];
        for (a, b) in [(0, 2), (1, 2)] {
            p.tun[a][b] = t;
            p.tun[b][a] = t;
        }
        p
    }

    /// Copy with all inter-dot Coulomb terms removed.
    pub fn without_interdot_coulomb(&self) -> Self {
        let mut p = self.clone();
        for a in 0..4 {
            for b in 0..4 {
                if is_left(a) != is_left(b) {
                    p.coulomb[a][b] = 0.0;
                    p.exchange[a][b] = 0.0;
                }
            }
        }
        p.gamma.retain(|g| g.sites.iter().all(|s| s.is_left()) || g.sites.iter().all(|s| !s.is_left()));
        p
    }
}

pub fn dot_spectra(p: &HubbardParams) -> DotSpectra {
    let pair = |d: usize| {
        let (a, b) = (2 * d, 2 * d + 1);
        let e_s = 2.0 * p.eps[d][0] + p.coulomb[a][a] + 2.0 * p.mu[d];
        let e_t = p.eps[d][0] + p.eps[d][1] + p.coulomb[a][b] - p.exchange[a][b] + 2.0 * p.mu[d];
        (e_s, e_t)
    };
    let (e_s_l, e_t_l) = pair(0);
    let (e_s_r, e_t_r) = pair(1);
    DotSpectra { e_s_l, e_s_r, e_t_l, e_t_r }
}

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn push_spin_summed(out: &mut Vec<Term>, sites: [usize; 4], value: f64) {
    // ½ Σ_{s,s'} value c†_{a s} c†_{b s'} c_{c s'} c_{d s}
    let [a, b, c, d] = sites;
    for s in 0..2 {
        for sp in 0..2 {
            let create = [2 * a + s, 2 * b + sp];
            let annihilate = [2 * c + sp, 2 * d + s];
            if create[0] == create[1] || annihilate[0] == annihilate[1] {
                continue;
            }
            out.push(Term::TwoBody { create, annihilate, coeff: r(0.5 * value) });
        }
    }
}

fn coulomb_terms(p: &HubbardParams, intra: bool) -> Vec<Term> {
    let mut out = Vec::new();
    for a in 0..N_SITES {
        for b in 0..N_SITES {
            if (is_left(a) == is_left(b)) != intra {
                continue;
            }
            if p.coulomb[a][b] != 0.0 {
                push_spin_summed(&mut out, [a, b, b, a], p.coulomb[a][b]);
            }
            if a != b && p.exchange[a][b] != 0.0 {
                push_spin_summed(&mut out, [a, b, a, b], p.exchange[a][b]);
            }
        }
    }
    for g in &p.gamma {
        let s = g.sites.map(Site::index);
        let single_dot = s.iter().all(|&x| is_left(x)) || s.iter().all(|&x| !is_left(x));
        if single_dot == intra && g.value != 0.0 {
            push_spin_summed(&mut out, s, g.value);
        }
    }
    out
}

/// Terms of the intra-dot operator U0: on-site energies plus single-dot Coulomb terms.
pub fn terms_u0(p: &HubbardParams) -> Vec<Term> {
    let mut out = Vec::new();
    for site in Site::ALL {
        let e = p.onsite(site.index());
        if e != 0.0 {
            out.push(Term::Number { mode: site.up(), coeff: r(e) });
            out.push(Term::Number { mode: site.up() + 1, coeff: r(e) });
        }
    }
    out.extend(coulomb_terms(p, true));
    out
}

/// Terms of the inter-dot Coulomb operator U1.
pub fn terms_u1(p: &HubbardParams) -> Vec<Term> {
    coulomb_terms(p, false)
}

/// Terms of the tunneling operator T.
pub fn terms_t(p: &HubbardParams) -> Vec<Term> {
    let mut out = Vec::new();
    for a in 0..N_SITES {
        for b in 0..N_SITES {
            let t = p.tun[a][b];
            if a == b || t == 0.0 {
                continue;
            }
            for s in 0..2 {
                out.push(Term::Hopping { create: 2 * a + s, annihilate: 2 * b + s, coeff: r(t) });
            }
        }
    }
    out
}

fn check_basis(basis: &FockBasis) -> Result<()> {
    if basis.n_modes() != DOUBLE_DOT_MODES {
        return Err(Error::DimensionMismatch { expected: DOUBLE_DOT_MODES, found: basis.n_modes() });
    }
    Ok(())
}

/// U0, U1 and T on `basis` (the 8-mode basis or a sub-basis of it).
pub fn split_operators(
    p: &HubbardParams,
    basis: &Arc<FockBasis>,
) -> Result<(ManyBodyOperator, ManyBodyOperator, ManyBodyOperator)> {
    check_basis(basis)?;
    Ok((build_operator(basis, &terms_u0(p))?, build_operator(basis, &terms_u1(p))?, build_operator(basis, &terms_t(p))?))
}

pub fn build_full_hamiltonian(p: &HubbardParams, basis: &Arc<FockBasis>) -> Result<ManyBodyOperator> {
    check_basis(basis)?;
    let mut terms = terms_u0(p);
    terms.extend(terms_u1(p));
    terms.extend(terms_t(p));
    build_operator(basis, &terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, hermitian_eigh, max_abs};
    use crate::many_body::{build_basis, total_s_squared, total_sz};

    fn basis() -> Arc<FockBasis> {
        Arc::new(build_basis(8, 3).unwrap())
    }

    #[test]
    fn illustrative_params_are_valid() {
        let p = HubbardParams::illustrative();
        p.validate().unwrap();
        let d = dot_spectra(&p);
        assert!((d.delta_st_left() - 0.05).abs() < 1e-12);
        assert!(d.warnings().is_empty());
        assert!((d.e_s_r - d.e_s_l - 1.0).abs() < 1e-12);
        assert!((d.e_s_r - d.e_t_l - 0.95).abs() < 1e-12);
    }

    #[test]
    fn spectra_arithmetic() {
        let mut p = HubbardParams::illustrative();
        p.eps = [[1.0, 0.0], [0.0, 0.0]];
        p.mu = [0.5, 0.0];
        p.coulomb = [[0.0; 4]; 4];
        p.coulomb[0][0] = 2.0;
        assert_eq!(dot_spectra(&p).e_s_l, 5.0);
    }

    #[test]
    fn onsite_only_is_diagonal() {
        let mut p = HubbardParams::illustrative();
        p.tun = [[0.0; 4]; 4];
        p.coulomb = [[0.0; 4]; 4];
        p.exchange = [[0.0; 4]; 4];
        p.mu = [0.3, -0.2];
        let b = basis();
        let h = build_full_hamiltonian(&p, &b).unwrap();
        for (i, s) in b.states().iter().enumerate() {
            let e: f64 = (0..8).filter(|&m| s.is_occupied(m)).map(|m| p.onsite(m / 2)).sum();
            for j in 0..b.dim() {
                let expect = if i == j { e } else { 0.0 };
                assert!((h.matrix()[(i, j)].re - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hamiltonian_is_spin_symmetric() {
        let b = basis();
        let h = build_full_hamiltonian(&HubbardParams::illustrative(), &b).unwrap();
        assert!(h.is_hermitian(1e-12));
        assert!(max_abs(&commutator(h.matrix(), total_s_squared(&b).matrix())) < 1e-10);
        assert!(max_abs(&commutator(h.matrix(), total_sz(&b).matrix())) < 1e-10);
    }

    #[test]
    fn split_sums_to_full() {
        let b = basis();
        let p = HubbardParams::illustrative();
        let (u0, u1, t) = split_operators(&p, &b).unwrap();
        let h = build_full_hamiltonian(&p, &b).unwrap();
        let sum = u0.matrix() + u1.matrix() + t.matrix();
        assert!(max_abs(&(sum - h.matrix())) < 1e-12);
        assert!(max_abs(u1.matrix()) == 0.0);
        for (i, si) in b.states().iter().enumerate() {
            for (j, sj) in b.states().iter().enumerate() {
                if si.charge_config() != sj.charge_config() {
                    assert_eq!(u0.matrix()[(i, j)].norm(), 0.0);
                } else {
                    assert_eq!(t.matrix()[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn isolated_levels_match_dot_spectra() {
        let mut p = HubbardParams::illustrative();
        p.tun = [[0.0; 4]; 4];
        let b = Arc::new(build_basis(8, 3).unwrap().restrict(|s| s.charge_config() == (2, 1)).unwrap());
        let h = build_full_hamiltonian(&p, &b).unwrap();
        let (w, _) = hermitian_eigh(h.matrix());
        let d = dot_spectra(&p);
        let e_r1 = p.onsite(2);
        for k in 0..2 {
            assert!((w[k] - (d.e_s_l + e_r1)).abs() < 1e-12);
        }
        for k in 2..8 {
            assert!((w[k] - (d.e_t_l + e_r1)).abs() < 1e-12, "{k}: {}", w[k]);
        }
        assert!(w[8] > d.e_t_l + e_r1 + 1e-6);
    }

    #[test]
    fn validation_errors() {
        let mut p = HubbardParams::illustrative();
        p.tun[0][1] = 0.1;
        p.tun[1][0] = 0.1;
        assert!(p.validate().is_err());
        let mut p = HubbardParams::illustrative();
        p.tun[0][2] = 0.5;
        assert!(p.validate().is_err());
        let mut p = HubbardParams::illustrative();
        p.eps[0][0] = f64::NAN;
        assert!(p.validate().is_err());
        let mut p = HubbardParams::illustrative();
        p.gamma.push(GammaEntry { sites: [Site::L1, Site::L1, Site::L1, Site::R1], value: 0.1 });
        assert!(p.validate().is_err());
        let mut p = HubbardParams::illustrative();
        p.gamma.push(GammaEntry { sites: [Site::L1, Site::R1, Site::R1, Site::L2], value: 0.1 });
        assert!(p.validate().is_err());
        p.gamma.push(GammaEntry { sites: [Site::L2, Site::R1, Site::R1, Site::L1], value: 0.1 });
        p.validate().unwrap();
    }

    #[test]
    fn wrong_mode_count_rejected() {
        let b = Arc::new(build_basis(6, 3).unwrap());
        let err = build_full_hamiltonian(&HubbardParams::illustrative(), &b).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 8, found: 6 });
    }
}
