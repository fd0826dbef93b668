#![allow(dead_code)]

use hybrid_core::hubbard::HubbardParams;
use hybrid_core::linalg::{CMatrix, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn sym(m: &mut [[f64; 4]; 4], a: usize, b: usize, v: f64) {
    m[a][b] = v;
    m[b][a] = v;
}

/// Arbitrary valid parameters with every kind of term switched on.
pub fn random_params(rng: &mut ChaCha8Rng) -> HubbardParams {
    let mut p = HubbardParams::illustrative();
    p.eps = [[rng.random_range(-0.2..0.2), rng.random_range(0.0..0.3)], [rng.random_range(-0.2..0.2), rng.random_range(1.0..3.0)]];
    p.mu = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
    p.tun = [[0.0; 4]; 4];
    for a in 0..2 {
        for b in 2..4 {
            sym(&mut p.tun, a, b, rng.random_range(-0.05..0.05));
        }
    }
    p.coulomb = [[0.0; 4]; 4];
    p.exchange = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in a..4 {
            sym(&mut p.coulomb, a, b, rng.random_range(0.5..10.0));
            if a != b {
                sym(&mut p.exchange, a, b, rng.random_range(0.0..0.3));
            }
        }
    }
    p
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-ish random 2×2 unitary from a random Hermitian generator.
pub fn random_su2(rng: &mut ChaCha8Rng) -> CMatrix {
    let (a, b, c, d): (f64, f64, f64, f64) =
        (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
    let n = (a * a + b * b + c * c).sqrt();
    let (s, co) = n.sin_cos();
    let (x, y, z) = (a / n, b / n, c / n);
    let ph = C64::from_polar(1.0, d);
    CMatrix::from_row_slice(
        2,
        2,
        &[
            ph * C64::new(co, -s * z),
            ph * C64::new(-s * y, -s * x),
            ph * C64::new(s * y, -s * x),
            ph * C64::new(co, s * z),
        ],
    )
}

pub fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
