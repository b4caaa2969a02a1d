//! Interior eigenpairs of H = H_D + V by Chebyshev-filtered subspace iteration
//! on (H − σ)², with Rayleigh–Ritz on H.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Propagator;
use crate::error::{Error, Result};
use crate::grid::SpinorField;
use crate::scalar::{cplx, Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenOptions {
    /// Extra block vectors beyond the requested count.
    pub extra: usize,
    /// Chebyshev degree per outer iteration.
    pub degree: usize,
    pub max_iterations: usize,
    /// Required ‖Hψ − λψ‖/‖ψ‖.
    pub tol: f64,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { extra: 4, degree: 40, max_iterations: 400, tol: 1e-8, seed: 0x5eed }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair<T: Real> {
    pub lambda: f64,
    pub residual: f64,
    /// Unit-norm eigenvector.
    pub field: SpinorField<T>,
}

fn dot<T: Real>(a: &SpinorField<T>, b: &SpinorField<T>) -> Complex64 {
    // ⟨b, a⟩ in the physics convention: Σ conj(b)·a·dV
    let z = b.inner(a).conj();
    Complex64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())
}

fn to_t<T: Real>(z: Complex64) -> C<T> {
    cplx(T::lit(z.re), T::lit(z.im))
}

/// Orthonormalizes in place by two passes of modified Gram–Schmidt; drops
/// numerically dependent vectors.
fn orthonormalize<T: Real>(v: &mut Vec<SpinorField<T>>) {
    let mut out: Vec<SpinorField<T>> = Vec::with_capacity(v.len());
    for mut x in v.drain(..) {
        let n0 = x.l2_norm().to_f64_lossy();
        for _ in 0..2 {
            for q in &out {
                let c = dot(&x, q);
                x.axpy(to_t(-c), q);
            }
        }
        let n = x.l2_norm().to_f64_lossy();
        if n > 1e-10 * n0 && n > 0.0 {
            x.scale_in_place(cplx(T::one() / T::lit(n), T::zero()));
            out.push(x);
        }
    }
    *v = out;
}

/// Eigenpairs of H with eigenvalue inside `window`, searched among the
/// `count` eigenvalues nearest the window center.
pub fn eigensolve<T: Real>(
    prop: &Propagator<T>,
    count: usize,
    window: (f64, f64),
    opts: &EigenOptions,
) -> Result<Vec<EigenPair<T>>> {
    let (lo, hi) = window;
    if !(lo < hi) || count == 0 {
        return Err(Error::Parameter("need lo < hi and count ≥ 1".into()));
    }
    let grid = prop.grid().clone();
    let ns = prop.rep().n_spin;
    let sigma = 0.5 * (lo + hi);
    let vmax = prop.potential().map_or(0.0, |p| p.sup_norm().to_f64_lossy());
    let a_max = (prop.max_free_energy().to_f64_lossy() + vmax + sigma.abs()).powi(2) * 1.01;
    let shift = |f: &SpinorField<T>| {
        let mut h = prop.apply_h(f);
        h.axpy(cplx(T::lit(-sigma), T::zero()), f);
        h
    };
    let apply_a = |f: &SpinorField<T>| shift(&shift(f));

    let k = count + opts.extra;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut block: Vec<SpinorField<T>> = (0..k)
        .map(|_| {
            SpinorField::from_fn(&grid, ns, |_, out| {
                for o in out.iter_mut() {
                    *o = cplx(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0)));
                }
            })
        })
        .collect();
    orthonormalize(&mut block);
    let mut a_cut = (0.5 * (hi - lo)).powi(2);
    let mut best = f64::INFINITY;

    for it in 0..opts.max_iterations {
        if it > 0 {
            block = block.iter().map(|x| chebyshev(x, &apply_a, opts.degree, a_cut, a_max)).collect();
            orthonormalize(&mut block);
        }
        let hx: Vec<SpinorField<T>> = block.iter().map(|x| prop.apply_h(x)).collect();
        let kk = block.len();
        let mut hm = DMatrix::<Complex64>::zeros(kk, kk);
        for i in 0..kk {
            for j in 0..kk {
                hm[(i, j)] = dot(&hx[j], &block[i]);
            }
        }
        let hm = (&hm + hm.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = hm.symmetric_eigen();
        let mut new_block = Vec::with_capacity(kk);
        let mut new_hx = Vec::with_capacity(kk);
        for c in 0..kk {
            let mut x = SpinorField::zeros(&grid, ns);
            let mut y = SpinorField::zeros(&grid, ns);
            for i in 0..kk {
                let w = to_t(eig.eigenvectors[(i, c)]);
                x.axpy(w, &block[i]);
                y.axpy(w, &hx[i]);
            }
            new_block.push(x);
            new_hx.push(y);
        }
        // Order by ‖(H − σ)y‖² = (θ − σ)² + ‖r‖², the Rayleigh quotient of A;
        // ordering by |θ − σ| alone would favour ± mixtures.
        let mut scored: Vec<(f64, f64, f64, usize)> = (0..kk)
            .map(|c| {
                let t = eig.eigenvalues[c];
                let (x, y) = (&new_block[c], &new_hx[c]);
                let mut r = y.clone();
                r.axpy(cplx(T::lit(-t), T::zero()), x);
                let res = (r.l2_norm() / x.l2_norm()).to_f64_lossy();
                ((t - sigma).powi(2) + res * res, t, res, c)
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let thetas: Vec<f64> = scored.iter().map(|s| s.1).collect();
        let residuals: Vec<f64> = scored.iter().map(|s| s.2).collect();
        let a_top = scored.last().map_or(0.0, |s| s.0);
        let mut slots: Vec<Option<SpinorField<T>>> = new_block.into_iter().map(Some).collect();
        block = scored.iter().map(|s| slots[s.3].take().expect("each column once")).collect();
        let wanted = count.min(kk);
        let worst = residuals[..wanted].iter().cloned().fold(0.0, f64::max);
        best = best.min(worst);
        if worst <= opts.tol {
            let mut out: Vec<EigenPair<T>> = (0..wanted)
                .filter(|&i| thetas[i] > lo && thetas[i] < hi)
                .map(|i| EigenPair { lambda: thetas[i], residual: residuals[i], field: block[i].clone() })
                .collect();
            out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
            return Ok(out);
        }
        a_cut = a_top.max(1e-12);
    }
    Err(Error::NoConvergence { iterations: opts.max_iterations, best_residual: best })
}

/// Scaled Chebyshev filter damping the interval [a, b] of the spectrum of A ≥ 0.
fn chebyshev<T: Real>(
    x: &SpinorField<T>,
    apply_a: &impl Fn(&SpinorField<T>) -> SpinorField<T>,
    degree: usize,
    a: f64,
    b: f64,
) -> SpinorField<T> {
    let e = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    let mut sigma = e / (0.0 - c);
    let tau = 2.0 / sigma;
    let lin = |f: &SpinorField<T>, s: f64| {
        let mut y = apply_a(f);
        y.axpy(cplx(T::lit(-c), T::zero()), f);
        y.scale_in_place(cplx(T::lit(s), T::zero()));
        y
    };
    let mut prev = x.clone();
    let mut cur = lin(x, sigma / e);
    for _ in 1..degree {
        let s_new = 1.0 / (tau - sigma);
        let mut next = lin(&cur, 2.0 * s_new / e);
        next.axpy(cplx(T::lit(-sigma * s_new), T::zero()), &prev);
        prev = cur;
        cur = next;
        sigma = s_new;
    }
    cur
}
