#![allow(dead_code)]

use hybrid_core::hubbard::HubbardParams;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn sym(m: &mut [[f64; 4]; 4], a: usize, b: usize, v: f64) {
    m[a][b] = v;
    m[b][a] = v;
}

/// Parameters in the regime of the closed-form couplings: all single-particle
/// levels aligned except R2, large intra-dot Coulomb energies, no inter-dot
/// Coulomb terms, and a singlet-triplet splitting and charge-transfer gap set
/// directly. Tunneling is left at zero for the caller to sweep.
pub fn closed_form_regime(rng: &mut ChaCha8Rng) -> HubbardParams {
    let c11 = rng.random_range(100.0..200.0);
    let k12 = rng.random_range(0.05..0.1);
    let dst = rng.random_range(0.03..0.08);
    let dt = rng.random_range(0.3..0.8);
    let mut c = [[0.0; 4]; 4];
    let mut k = [[0.0; 4]; 4];
    sym(&mut c, 0, 0, c11);
    sym(&mut c, 0, 1, c11 + dst + k12);
    sym(&mut c, 1, 1, c11 + rng.random_range(5.0..10.0));
    let cr = c11 + dst + dt;
    sym(&mut c, 2, 2, cr);
    sym(&mut c, 2, 3, cr + rng.random_range(5.0..10.0));
    sym(&mut c, 3, 3, cr + rng.random_range(10.0..20.0));
    sym(&mut k, 0, 1, k12);
    sym(&mut k, 2, 3, rng.random_range(0.05..0.1));
    HubbardParams {
        eps: [[0.0, 0.0], [0.0, rng.random_range(2.0..4.0)]],
        mu: [0.0, 0.0],
        tun: [[0.0; 4]; 4],
        coulomb: c,
        exchange: k,
        gamma: Vec::new(),
    }
}
