//! Trembling motion of ⟨x(t)⟩ for single-momentum superpositions.

use std::sync::Arc;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::{windowed_position, Propagator};
use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::grid::{Grid, SpinorField};
use crate::operators::{check_rep, lattice_momentum, plane_wave};
use crate::potentials::apply_pointwise;
use crate::scalar::{cplx, Real, C};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZitterTrace {
    pub times: Vec<f64>,
    /// ⟨x(t)⟩ = x(0) + ∫₀ᵗ ⟨α⟩.
    pub x: Vec<Vec<f64>>,
    pub alpha: Vec<Vec<f64>>,
    /// The common momentum when the state lives on a single Fourier mode.
    pub momentum: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OscillationFit {
    pub omega: f64,
    pub amplitude: f64,
    pub rms_residual: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ZitterFit {
    pub omega: f64,
    pub amplitude: f64,
    /// 2√(|p|² + m²).
    pub expected: f64,
    pub rel_error: f64,
}

/// The wavevector of the only occupied Fourier mode, if there is exactly one.
pub fn single_momentum<T: Real>(f: &SpinorField<T>) -> Option<Vec<f64>> {
    let g = f.grid();
    let npts = g.npts();
    let mut weight = vec![0.0f64; npts];
    for c in 0..f.ncomp() {
        let mut hat = f.component(c).to_vec();
        g.fft_forward(&mut hat);
        for (w, z) in weight.iter_mut().zip(&hat) {
            *w += z.norm_sqr().to_f64_lossy();
        }
    }
    let max = weight.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    let occupied: Vec<usize> = (0..npts).filter(|&i| weight[i] > 1e-20 * max).collect();
    if occupied.len() != 1 {
        return None;
    }
    let mut k = None;
    g.for_each_mode(|idx, kv| {
        if idx == occupied[0] {
            k = Some(kv.iter().map(|v| v.to_f64_lossy()).collect());
        }
    });
    k
}

/// w₊u₊ + w₋u₋ on the mode `modes`, with u± eigenvectors of α·p + mβ for
/// ±E_p. u₋ is the normalized negative-energy projection of α₁u₊, so the two
/// components interfere in ⟨α₁⟩.
pub fn zitterbewegung_initial<T: Real>(
    grid: &Arc<Grid<T>>,
    rep: &CliffordRep<T>,
    modes: &[i64],
    m: f64,
    w_pos: f64,
    w_neg: f64,
) -> Result<SpinorField<T>> {
    let p: Vec<f64> = lattice_momentum(grid, modes)?.iter().map(|v| v.to_f64_lossy()).collect();
    let rep64 = crate::clifford::build_dirac_matrices::<f64>(rep.d)?;
    let mut sym = rep64.alpha_dot(&p);
    sym.add_scaled(C::new(m, 0.0), &rep64.beta);
    let (vals, vecs) = sym.hermitian_eigen()?;
    let ns = rep.n_spin;
    let col = |c: usize| (0..ns).map(|i| vecs.get(i, c)).collect::<Vec<_>>();
    let pos = col(ns - 1);
    let mut a1u = vec![C::new(0.0, 0.0); ns];
    rep64.alphas[0].apply(&pos, &mut a1u);
    let mut neg = vec![C::new(0.0, 0.0); ns];
    for c in 0..ns {
        if vals[c] < 0.0 {
            let v = col(c);
            let ov: C<f64> = v.iter().zip(&a1u).map(|(a, b)| a.conj() * b).sum();
            for (n, vi) in neg.iter_mut().zip(&v) {
                *n += vi * ov;
            }
        }
    }
    let nn = neg.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nn < 1e-12 && w_neg != 0.0 {
        return Err(Error::Parameter("no interfering negative-energy state at this momentum".into()));
    }
    let u: Vec<C<T>> = pos
        .iter()
        .zip(&neg)
        .map(|(a, b)| {
            let z = a * w_pos + if nn > 0.0 { b * (w_neg / nn) } else { C::new(0.0, 0.0) };
            cplx(T::lit(z.re), T::lit(z.im))
        })
        .collect();
    let f = plane_wave(grid, modes, &u)?;
    let n = f.l2_norm();
    Ok(f.scaled(cplx(T::one() / n, T::zero())))
}

/// Free evolution of f0 sampled every dt up to t_max.
pub fn zitterbewegung_trace<T: Real>(
    f0: &SpinorField<T>,
    m: T,
    rep: &CliffordRep<T>,
    t_max: f64,
    dt: f64,
) -> Result<ZitterTrace> {
    check_rep(f0, rep)?;
    if !(dt > 0.0 && t_max > dt) {
        return Err(Error::Parameter("need 0 < dt < t_max".into()));
    }
    let prop = Propagator::new(f0.grid(), m, rep, None)?;
    let d = rep.d;
    let steps = (t_max / dt).round() as usize;
    let l = f0.grid().half_length().to_f64_lossy();
    let x0 = windowed_position(f0, &vec![0.0; d], 2.0 * l);
    let mut trace = ZitterTrace { times: vec![], x: vec![], alpha: vec![], momentum: single_momentum(f0) };
    let norm0 = f0.norm_sq();
    let mut x = x0;
    for s in 0..=steps {
        let t = s as f64 * dt;
        let psi = prop.free_step(f0, T::lit(t));
        let alpha: Vec<f64> = (0..d)
            .map(|j| {
                let a = apply_pointwise(&psi, |_| rep.alphas[j].clone());
                (a.inner(&psi).re / norm0).to_f64_lossy()
            })
            .collect();
        if let Some(prev) = trace.alpha.last() {
            for j in 0..d {
                x[j] += 0.5 * dt * (prev[j] + alpha[j]);
            }
        }
        trace.times.push(t);
        trace.x.push(x.clone());
        trace.alpha.push(alpha);
    }
    Ok(trace)
}

fn ls_fit(times: &[f64], y: &[f64], omega: f64) -> (Vector4<f64>, f64) {
    let mut a = Matrix4::zeros();
    let mut b = Vector4::zeros();
    for (&t, &v) in times.iter().zip(y) {
        let row = Vector4::new(1.0, t, (omega * t).cos(), (omega * t).sin());
        a += row * row.transpose();
        b += row * v;
    }
    let c = a.lu().solve(&b).unwrap_or_else(Vector4::zeros);
    let res: f64 = times
        .iter()
        .zip(y)
        .map(|(&t, &v)| {
            let f = c[0] + c[1] * t + c[2] * (omega * t).cos() + c[3] * (omega * t).sin();
            (v - f).powi(2)
        })
        .sum();
    (c, res)
}

/// Least-squares fit of a + bt + A cos(ωt + φ) over ω in (0, π/Δt).
pub fn fit_oscillation(times: &[f64], y: &[f64]) -> Result<OscillationFit> {
    if times.len() < 8 || times.len() != y.len() {
        return Err(Error::Parameter("need at least 8 samples".into()));
    }
    let dt = times[1] - times[0];
    let span = times[times.len() - 1] - times[0];
    let w_lo = 2.0 * std::f64::consts::PI / span;
    let w_hi = std::f64::consts::PI / dt * 0.95;
    let n = 4000;
    let mut best = (f64::INFINITY, w_lo);
    for i in 0..=n {
        let w = w_lo + (w_hi - w_lo) * i as f64 / n as f64;
        let (_, r) = ls_fit(times, y, w);
        if r < best.0 {
            best = (r, w);
        }
    }
    let step = (w_hi - w_lo) / n as f64;
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if ls_fit(times, y, c).1 <= ls_fit(times, y, d).1 {
            b = d;
        } else {
            a = c;
        }
    }
    let omega = 0.5 * (a + b);
    let (c, r) = ls_fit(times, y, omega);
    Ok(OscillationFit { omega, amplitude: c[2].hypot(c[3]), rms_residual: (r / times.len() as f64).sqrt() })
}

/// Fits ⟨x₁(t)⟩ and compares with 2E_p. Rejects states with more than one momentum.
pub fn zitterbewegung_fit(trace: &ZitterTrace, m: f64) -> Result<ZitterFit> {
    let p = trace
        .momentum
        .as_ref()
        .ok_or_else(|| Error::Parameter("frequency test needs a single-momentum state".into()))?;
    let x1: Vec<f64> = trace.x.iter().map(|x| x[0]).collect();
    let fit = fit_oscillation(&trace.times, &x1)?;
    let expected = 2.0 * (p.iter().map(|v| v * v).sum::<f64>() + m * m).sqrt();
    Ok(ZitterFit { omega: fit.omega, amplitude: fit.amplitude, expected, rel_error: (fit.omega - expected).abs() / expected })
}
