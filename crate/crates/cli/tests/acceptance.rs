//! Acceptance criteria, one PASS/FAIL line each.
//!
//! The report goes to stderr even when output is captured. Lines marked
//! `not gating` are printed but do not fail the run; the reason is given on
//! the line itself.

mod common;

use std::io::Write;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use hybrid_cli::{derive_effective, search_cnot, GraphSource, SearchRequest};
use hybrid_core::constants::HBAR_MEV_S;
use hybrid_core::dynamics::resonance_frequency;
use hybrid_core::encoded::*;
use hybrid_core::hubbard::{build_full_hamiltonian, split_operators, HubbardParams};
use hybrid_core::linalg::{commutator, frobenius, kron, phase_min_distance, CMatrix, C64};
use hybrid_core::many_body::{build_basis, total_s_squared, total_sz, FockBasis, ManyBodyOperator};
use hybrid_core::optimizer::{hybrid_search, preset_template, Objective, SearchConfig, Target, Weights};
use hybrid_core::schrieffer_wolff::{
    effective_couplings, effective_hamiltonian_analytic, gap_scaling, EffectiveQubit, transformed_hamiltonian, AnalyticForm,
    NumericOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SCALING_FRACTIONS: [f64; 3] = [0.02, 0.05, 0.1];
const MIN_EXPONENT: f64 = 2.7;
const MAX_REL_GAP_ERROR: f64 = 0.05;
const RESONANCE_GHZ: f64 = 12.09;
const RESONANCE_TOL_GHZ: f64 = 0.01;
const CALIBRATION_TOL: f64 = 1e-12;
const INVARIANT_ORACLE_TOL: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-10;
const LEAKAGE_TOL: f64 = 1e-8;
const INVARIANT_TOL: f64 = 1e-4;
const SEARCH_BUDGET_S: f64 = 1800.0;
const MAX_RESTARTS: usize = 20;

#[derive(Default)]
struct Report {
    lines: Vec<(String, bool, bool)>,
}

impl Report {
    fn record(&mut self, id: &str, pass: bool, gating: bool, detail: String) {
        let tag = match (pass, gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (not gating)",
        };
        let line = format!("{tag} [{id}] {detail}");
        // straight to the handle so the report shows without --nocapture
        let lead = if self.lines.is_empty() { "\n" } else { "" };
        let _ = writeln!(std::io::stderr(), "{lead}{line}");
        self.lines.push((line, pass, gating));
    }

    fn finish(&self) {
        let failed: Vec<&String> = self.lines.iter().filter(|l| l.2 && !l.1).map(|l| &l.0).collect();
        assert!(failed.is_empty(), "failing criteria:\n{}", failed.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("\n"));
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn sector() -> SpinSector {
    SpinSector::with_sz(6, -2).unwrap()
}

fn criterion_1(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n_sets = 12;
    let mut worst = [(f64::INFINITY, 0.0f64); 3];
    for _ in 0..n_sets {
        let p = common::closed_form_regime(&mut rng);
        for (k, form) in [AnalyticForm::Published, AnalyticForm::SecondOrder].into_iter().enumerate() {
            let s = gap_scaling(&p, &SCALING_FRACTIONS, form).unwrap();
            let mid = &s.points[1];
            let rel = (mid.analytic_gap - mid.exact_gap).abs() / mid.exact_gap;
            worst[k].0 = worst[k].0.min(s.analytic_exponent);
            worst[k].1 = worst[k].1.max(rel);
            if k == 1 {
                let rel_n = (mid.numeric_gap - mid.exact_gap).abs() / mid.exact_gap;
                worst[2].0 = worst[2].0.min(s.numeric_exponent);
                worst[2].1 = worst[2].1.max(rel_n);
            }
        }
    }
    let ok = |w: (f64, f64)| w.0 >= MIN_EXPONENT && w.1 < MAX_REL_GAP_ERROR;
    r.record(
        "1 published form",
        ok(worst[0]),
        false,
        format!(
            "SW gap vs 56-state ED, {n_sets} sets: min exponent {:.2} (need >= {MIN_EXPONENT}), max rel error at t/D=0.05 {:.2e} \
             (need < {MAX_REL_GAP_ERROR}); the closed form built from U + [iS,T] doubles the second-order shift, so its error is first order in J",
            worst[0].0, worst[0].1
        ),
    );
    r.record(
        "1 second-order form",
        ok(worst[1]),
        true,
        format!(
            "SW gap vs 56-state ED, {n_sets} sets: min exponent {:.2}, max rel error at t/D=0.05 {:.2e}",
            worst[1].0, worst[1].1
        ),
    );
    r.record(
        "1 numeric SW",
        ok(worst[2]),
        true,
        format!("projected U + 1/2[iS,T]: min exponent {:.2}, max rel error at t/D=0.05 {:.2e}", worst[2].0, worst[2].1),
    );
}

fn criterion_2(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut exact_jp = true;
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 200 {
        let mut p = common::closed_form_regime(&mut rng);
        let shift = rng.random_range(-0.05..0.05);
        p.eps[0] = [shift, shift + rng.random_range(0.0..0.05)];
        p.mu = [rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05)];
        let t = rng.random_range(1e-4..0.05);
        p = p.with_equal_tunneling(t);
        let Ok(cp) = effective_couplings(&p) else { continue };
        n += 1;
        exact_jp &= cp.jp == (cp.j1 + cp.j2) / 2.0;
        // singlet energies of two electrons on the lower orbital, triplet on both orbitals
        let es_l = 2.0 * p.eps[0][0] + p.coulomb[0][0] + 2.0 * p.mu[0];
        let et_l = p.eps[0][0] + p.eps[0][1] + p.coulomb[0][1] - p.exchange[0][1] + 2.0 * p.mu[0];
        let es_r = 2.0 * p.eps[1][0] + p.coulomb[2][2] + 2.0 * p.mu[1];
        let j1 = 2.0 * t * t / (es_r - es_l);
        let j2 = 2.0 * t * t / (es_r - et_l);
        worst = worst.max(((cp.j1 - j1) / j1).abs()).max(((cp.j2 - j2) / j2).abs());
    }
    r.record(
        "2",
        exact_jp && worst <= 4.0 * f64::EPSILON,
        true,
        format!("J' == (J1+J2)/2 bitwise on 200 sets: {exact_jp}; max rel deviation of J1, J2 from direct evaluation {worst:.1e}"),
    );
}

fn criterion_3(r: &mut Report) {
    let bare = resonance_frequency(&EffectiveQubit::bare(0.05));
    let mut p = HubbardParams::illustrative();
    p = p.with_equal_tunneling(1e-6);
    let q = effective_hamiltonian_analytic(&p, AnalyticForm::Published).unwrap();
    let from_params = resonance_frequency(&q);
    let pass = (bare - RESONANCE_GHZ).abs() <= RESONANCE_TOL_GHZ && (from_params - RESONANCE_GHZ).abs() <= RESONANCE_TOL_GHZ;
    r.record(
        "3",
        pass,
        true,
        format!("resonance at D_ST = 0.05 meV: bare {bare:.4} GHz, Hubbard set with t = 1e-6 meV {from_params:.4} GHz (hbar = {HBAR_MEV_S:e} meV s)"),
    );
}

fn criterion_4(r: &mut Report) {
    let two = SpinSector::full(2).unwrap();
    let o = c(1.0, 0.0);
    let z = c(0.0, 0.0);
    let swap = CMatrix::from_row_slice(4, 4, &[o, z, z, z, z, z, o, z, z, o, z, z, z, z, z, o]);
    let (p, m) = (c(0.5, 0.5), c(0.5, -0.5));
    let sqrt_swap = CMatrix::from_row_slice(4, 4, &[o, z, z, z, z, p, m, z, z, m, p, z, z, z, z, o]);
    let d_half = phase_min_distance(&exchange_unitary(0, 1, 0.5, &two).unwrap(), &swap);
    let d_quarter = phase_min_distance(&exchange_unitary(0, 1, 0.25, &two).unwrap(), &sqrt_swap);
    let sec = sector();
    let perm = sec.swap_permutation(2, 4).unwrap();
    let mut sw6 = CMatrix::zeros(sec.dim(), sec.dim());
    for (row, &col) in perm.iter().enumerate() {
        sw6[(row, col)] = o;
    }
    let d6 = phase_min_distance(&exchange_unitary(2, 4, 0.5, &sec).unwrap(), &sw6);
    let q = exchange_unitary(2, 4, 0.25, &sec).unwrap();
    let d6q = phase_min_distance(&(&q * &q), &sw6);
    let worst = d_half.max(d_quarter).max(d6).max(d6q);
    r.record(
        "4",
        worst < CALIBRATION_TOL,
        true,
        format!("tau=1/2 vs SWAP {d_half:.1e}, tau=1/4 vs sqrt(SWAP) {d_quarter:.1e}, six-spin sector {d6:.1e} / {d6q:.1e}"),
    );
}

/// Bell-type magic basis, columns `(|00⟩+|11⟩)/√2, i(|00⟩−|11⟩)/√2, i(|01⟩+|10⟩)/√2, (|01⟩−|10⟩)/√2`.
fn oracle_magic() -> CMatrix {
    let s = 0.5f64.sqrt();
    let mut q = CMatrix::zeros(4, 4);
    q[(0, 0)] = c(s, 0.0);
    q[(3, 0)] = c(s, 0.0);
    q[(0, 1)] = c(0.0, s);
    q[(3, 1)] = c(0.0, -s);
    q[(1, 2)] = c(0.0, s);
    q[(2, 2)] = c(0.0, s);
    q[(1, 3)] = c(s, 0.0);
    q[(2, 3)] = c(-s, 0.0);
    q
}

fn oracle_invariants(u: &CMatrix) -> (C64, C64) {
    let q = oracle_magic();
    let ub = q.adjoint() * u * &q;
    let m = ub.transpose() * &ub;
    let det = u.determinant();
    let tr = m.trace();
    let tr2 = (&m * &m).trace();
    (tr * tr / (det * 16.0), (tr * tr - tr2) / (det * 4.0))
}

fn random_su2(rng: &mut ChaCha8Rng) -> CMatrix {
    let (a, b, cc, d): (f64, f64, f64, f64) =
        (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
    let n = (a * a + b * b + cc * cc).sqrt();
    let (s, co) = n.sin_cos();
    let (x, y, zz) = (a / n, b / n, cc / n);
    let ph = C64::from_polar(1.0, d);
    CMatrix::from_row_slice(2, 2, &[ph * c(co, -s * zz), ph * c(-s * y, -s * x), ph * c(s * y, -s * x), ph * c(co, s * zz)])
}

fn criterion_5(r: &mut Report) {
    let o = c(1.0, 0.0);
    let z = c(0.0, 0.0);
    let mut cz = CMatrix::identity(4, 4);
    cz[(3, 3)] = -o;
    let swap = CMatrix::from_row_slice(4, 4, &[o, z, z, z, z, z, o, z, z, o, z, z, z, z, z, o]);
    let mut gates = vec![("I", CMatrix::identity(4, 4)), ("SWAP", swap), ("CNOT", cnot()), ("CZ", cz)];
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..100 {
        let k1 = kron(&random_su2(&mut rng), &random_su2(&mut rng));
        let k2 = kron(&random_su2(&mut rng), &random_su2(&mut rng));
        gates.push(("dressed CNOT", &k1 * cnot() * &k2));
    }
    let mut worst = 0.0f64;
    let mut class_ok = true;
    for (name, g) in &gates {
        let (g1, g2) = makhlin_invariants(g).unwrap();
        let (o1, o2) = oracle_invariants(g);
        worst = worst.max((g1 - o1).norm()).max((c(g2, 0.0) - o2).norm()).max(o2.im.abs());
        let is_class = g1.norm() < INVARIANT_TOL && (g2 - 1.0).abs() < INVARIANT_TOL;
        let expect = matches!(*name, "CNOT" | "CZ" | "dressed CNOT");
        class_ok &= is_class == expect;
    }
    // encoded level: intra-qubit pulses at both ends of a CNOT-class sequence
    let g = ConnectivityGraph::preset(GraphLabel::HybridLinearD).unwrap();
    let core = preset_template(GraphLabel::HybridLinearD, Target::CnotClass, 16).unwrap();
    let taus = [0.25, 0.25, 0.75, 0.75, 0.5, 0.5, 0.25, 0.75, 0.5, 0.25, 0.5, 0.75, 0.75, 0.25, 0.75, 0.25];
    let local = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)];
    for _ in 0..20 {
        let mut tpl = Vec::new();
        let mut t = Vec::new();
        for _ in 0..4 {
            tpl.push(local[rng.random_range(0..6)]);
            t.push(rng.random());
        }
        tpl.extend(&core);
        t.extend(taus);
        for _ in 0..4 {
            tpl.push(local[rng.random_range(0..6)]);
            t.push(rng.random());
        }
        class_ok &= verify_sequence(&GateSequence::new(&g, &tpl, &t)).unwrap().cnot_class;
    }
    r.record(
        "5",
        worst < INVARIANT_ORACLE_TOL && class_ok,
        true,
        format!("{} gates vs independent magic-basis oracle: max deviation {worst:.1e}; class detection stable under local dressing: {class_ok}", gates.len()),
    );
}

fn comm_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    frobenius(&commutator(a, b))
}

fn criterion_6(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let full: Arc<FockBasis> = Arc::new(build_basis(8, 3).unwrap());
    let low = Arc::new(full.restrict(|s| matches!(s.charge_config(), (2, 1) | (1, 2))).unwrap());
    let (s2f, szf) = (total_s_squared(&full), total_sz(&full));
    let (s2l, szl) = (total_s_squared(&low), total_sz(&low));
    let mut worst_h = 0.0f64;
    for _ in 0..10 {
        let mut p = common::closed_form_regime(&mut rng);
        p = p.with_equal_tunneling(rng.random_range(0.001..0.05));
        p.tun[1][3] = rng.random_range(-0.02..0.02);
        p.tun[3][1] = p.tun[1][3];
        let h = build_full_hamiltonian(&p, &full).unwrap();
        let (u0, u1, t) = split_operators(&p, &low).unwrap();
        let hs = transformed_hamiltonian(&p, NumericOptions::default()).unwrap();
        let ops: [(&ManyBodyOperator, &ManyBodyOperator, &ManyBodyOperator); 5] =
            [(&h, &s2f, &szf), (&u0, &s2l, &szl), (&u1, &s2l, &szl), (&t, &s2l, &szl), (&hs, &s2l, &szl)];
        for (op, s2, sz) in ops {
            worst_h = worst_h.max(comm_norm(op.matrix(), s2.matrix())).max(comm_norm(op.matrix(), sz.matrix()));
        }
    }
    let full6 = SpinSector::full(6).unwrap();
    let sec = sector();
    let s2 = spin_total_s_squared(&full6);
    let sz = spin_total_sz(&full6);
    let g = ConnectivityGraph::preset(GraphLabel::HybridLinearD).unwrap();
    let enc = LogicalEncoding::for_graph(&g).unwrap();
    let mut worst_u = 0.0f64;
    let mut worst_block = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(1..20);
        let tpl: Vec<(usize, usize)> = (0..n).map(|_| g.edges[rng.random_range(0..g.edges.len())]).collect();
        let taus: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let seq = GateSequence::new(&g, &tpl, &taus);
        let uf = sequence_unitary(&seq, &g, &full6).unwrap();
        worst_u = worst_u.max(comm_norm(&uf, &s2)).max(comm_norm(&uf, &sz));
        let us = sequence_unitary(&seq, &g, &sec).unwrap();
        let st = sec.states();
        let restricted = CMatrix::from_fn(st.len(), st.len(), |a, b| uf[(st[a] as usize, st[b] as usize)]);
        worst_block = worst_block.max(frobenius(&(&restricted - &us)));
        let bf = CMatrix::from_fn(64, 4, |row, col| {
            sec.position(row as u64).map_or(c(0.0, 0.0), |k| enc.logical_basis[(k, col)])
        });
        let mf = bf.adjoint() * &uf * &bf;
        let (ms, _) = logical_block(&us, &enc);
        worst_block = worst_block.max(frobenius(&(mf - ms)));
    }
    let pass = worst_h < SYMMETRY_TOL && worst_u < SYMMETRY_TOL && worst_block < SYMMETRY_TOL;
    r.record(
        "6",
        pass,
        true,
        format!(
            "Hamiltonians [H,S^2], [H,Sz] max {worst_h:.1e}; sequences max {worst_u:.1e}; Sz=-1 block vs 64-dim {worst_block:.1e}"
        ),
    );
}

struct SearchLine {
    pass: bool,
    detail: String,
}

fn search_geometry(label: GraphLabel, length: usize, seed: u64) -> SearchLine {
    let g = ConnectivityGraph::preset(label).unwrap();
    let enc = LogicalEncoding::for_graph(&g).unwrap();
    let Some(template) = preset_template(label, Target::CnotClass, length) else {
        return SearchLine { pass: false, detail: format!("graph {}: no {length}-pulse template available", label.as_str()) };
    };
    let cfg = SearchConfig { seed, restarts: MAX_RESTARTS, ..SearchConfig::default() };
    let start = Instant::now();
    let last = Mutex::new(0usize);
    let out = hybrid_search(&Objective::new(Target::CnotClass), &g, &enc, &template, &cfg, &|p| {
        *last.lock().unwrap() = p.restart;
    })
    .unwrap();
    let wall = start.elapsed().as_secs_f64();
    let v = verify_sequence(&out.sequence).unwrap();
    let g1 = v.g1[0].hypot(v.g1[1]);
    let g2 = (v.g2[0] - 1.0).hypot(v.g2[1]);
    let pass = out.success
        && out.sequence.pulses.len() == length
        && v.leakage < LEAKAGE_TOL
        && g1 < INVARIANT_TOL
        && g2 < INVARIANT_TOL
        && wall < SEARCH_BUDGET_S;
    SearchLine {
        pass,
        detail: format!(
            "graph {}: {} pulses in {} time steps, restart {} of <= {MAX_RESTARTS}, {wall:.0} s, objective {:.1e}, leakage {:.1e}, |G1| {g1:.1e}, |G2-1| {g2:.1e}",
            label.as_str(),
            out.sequence.pulses.len(),
            v.time_steps,
            out.restart + 1,
            out.objective_value,
            v.leakage
        ),
    }
}

fn criterion_7(r: &mut Report) {
    let a = search_geometry(GraphLabel::HybridLinearD, 16, 0);
    r.record("7a", a.pass, true, a.detail);
    let b = search_geometry(GraphLabel::TripleDotLinearE, 18, 0);
    r.record("7b", b.pass, true, b.detail);
    let e17 = search_geometry(GraphLabel::TripleDotLinearE, 17, 0);
    r.record("7 extra", e17.pass, false, format!("{} (shorter than required, informational)", e17.detail));
    let f15 = search_geometry(GraphLabel::HybridAltF, 15, 0);
    r.record("7 extra", f15.pass, false, format!("{} (informational)", f15.detail));
    let f = search_geometry(GraphLabel::HybridAltF, 14, 0);
    r.record("7 stretch", f.pass, false, format!("{} (stretch goal, not gating)", f.detail));
}

fn criterion_8(r: &mut Report) {
    let req = SearchRequest {
        graph: GraphSource::Preset(GraphLabel::HybridLinearD),
        length: 19,
        target: Target::CnotClass,
        weights: Weights::default(),
        config: SearchConfig { seed: 5, restarts: 3, ..SearchConfig::default() },
        template: None,
        random_templates: 1,
        result_name: "search_result.json".into(),
    };
    let a = search_cnot(&req, &|_| {}).unwrap();
    let b = search_cnot(&req, &|_| {}).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c3 = pool.install(|| search_cnot(&req, &|_| {}).unwrap());
    let search_same = a.artifacts == b.artifacts && a.artifacts == c3.artifacts;
    let text = HubbardParams::illustrative().to_json();
    let d1 = derive_effective(&text).unwrap();
    let d2 = derive_effective(&text).unwrap();
    let derive_same = d1.artifacts == d2.artifacts;
    r.record(
        "8",
        search_same && derive_same,
        true,
        format!("search rerun (1 and 3 threads) byte-identical: {search_same}; derive-effective rerun byte-identical: {derive_same}"),
    );
}

#[test]
fn acceptance() {
    let mut r = Report::default();
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    r.finish();
}
