//! Deterministic test states: random envelope-localized fields and Gaussian packets.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{norm, Grid, SpinorField};
use crate::scalar::{cplx, Real, C};

/// Smooth cutoff: 1 for r ≤ ℓ/2, 0 for r ≥ 0.9ℓ, C^∞ in between.
pub fn envelope<T: Real>(grid: &Grid<T>) -> Vec<T> {
    let l = grid.half_length().to_f64_lossy();
    grid.sample(|x| T::lit(smooth_step((0.9 * l - norm(x).to_f64_lossy()) / (0.4 * l))))
}

fn smooth_step(t: f64) -> f64 {
    let f = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        f(t) / (f(t) + f(1.0 - t))
    }
}

/// e^{ip·x − |x−c|²/(2w²)} u, normalized to unit L² norm.
pub fn gaussian_packet<T: Real>(
    grid: &Arc<Grid<T>>,
    center: &[f64],
    momentum: &[f64],
    width: f64,
    spinor: &[C<f64>],
) -> Result<SpinorField<T>> {
    let d = grid.d();
    if center.len() != d || momentum.len() != d {
        return Err(Error::Dimension(format!("packet vectors must have length {d}")));
    }
    if !(width > 0.0) || spinor.is_empty() {
        return Err(Error::Parameter("packet needs a positive width and a nonempty spinor".into()));
    }
    let f = SpinorField::from_fn(grid, spinor.len(), |x, out| {
        let (mut r2, mut ph) = (0.0, 0.0);
        for j in 0..d {
            let xj = x[j].to_f64_lossy();
            r2 += (xj - center[j]).powi(2);
            ph += momentum[j] * xj;
        }
        let amp = (-r2 / (2.0 * width * width)).exp();
        let (s, c) = ph.sin_cos();
        for (o, u) in out.iter_mut().zip(spinor) {
            let z = *u * C::new(c * amp, s * amp);
            *o = cplx(T::lit(z.re), T::lit(z.im));
        }
    });
    let n = f.l2_norm();
    Ok(f.scaled(cplx(T::one() / n, T::zero())))
}

/// A sum of one to three Gaussian bumps with random centers, widths, phases
/// and spinor amplitudes, multiplied by the envelope.
pub fn random_envelope_field<T: Real>(grid: &Arc<Grid<T>>, ncomp: usize, rng: &mut ChaCha8Rng) -> SpinorField<T> {
    let d = grid.d();
    let l = grid.half_length().to_f64_lossy();
    let h = grid.h().to_f64_lossy();
    let (w_lo, w_hi) = (2.0 * h, (l / 4.0).max(2.5 * h));
    let bumps = rng.gen_range(1..=3);
    let mut field = SpinorField::zeros(grid, ncomp);
    for _ in 0..bumps {
        let w = rng.gen_range(w_lo..w_hi);
        let center: Vec<f64> = (0..d).map(|_| rng.gen_range(-l / 4.0..l / 4.0)).collect();
        let momentum: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0) / w).collect();
        let spinor: Vec<C<f64>> = (0..ncomp).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let bump = gaussian_packet(grid, &center, &momentum, w, &spinor).expect("valid packet");
        let a = rng.gen_range(0.2..1.0);
        field.axpy(cplx(T::lit(a), T::zero()), &bump);
    }
    field.mul_node_weights(&envelope(grid))
}

/// The `count` fields generated from `seed`, produced lazily.
pub fn corpus<T: Real>(
    grid: &Arc<Grid<T>>,
    ncomp: usize,
    seed: u64,
    count: usize,
) -> impl Iterator<Item = SpinorField<T>> + '_ {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(move |_| random_envelope_field(grid, ncomp, &mut rng))
}
