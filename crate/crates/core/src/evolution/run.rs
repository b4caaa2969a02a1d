//! Time evolution with conservation and smoothing diagnostics.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Propagator;
use crate::clifford::build_dirac_matrices;
use crate::error::{Error, Result};
use crate::grid::{radial_split_with_derivative, SpinorField};
use crate::multipliers::MultiplierProfile;
use crate::norms::{morrey_of_density, spherical_of_density};
use crate::operators::igphi_from_radial;
use crate::potentials::{extract_constants, PotentialSpec, RadialMesh, WeightFamily};
use crate::scalar::Real;

fn one() -> usize {
    1
}
fn one_f() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Steps between diagnostic samples.
    #[serde(default = "one")]
    pub cadence: usize,
    pub mass: f64,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    /// Radius R of the multiplier used for the T-term.
    #[serde(default = "one_f")]
    pub r_big: f64,
    /// Weight δ on the Morrey and |x|⁻³ terms of the smoothing functional.
    #[serde(default = "one_f")]
    pub delta: f64,
    /// Relative bound a of V; computed from the potential when absent.
    #[serde(default)]
    pub kato_a: Option<f64>,
    /// Radius of the window used for ⟨x⟩; ℓ/2 when absent.
    #[serde(default)]
    pub window_radius: Option<f64>,
    /// Accumulate the space-time smoothing integrals.
    #[serde(default = "yes")]
    pub smoothing: bool,
}

impl EvolutionConfig {
    pub fn new(dt: f64, t_max: f64, mass: f64) -> Self {
        Self {
            dt,
            t_max,
            cadence: 1,
            mass,
            potential: None,
            r_big: 1.0,
            delta: 1.0,
            kato_a: None,
            window_radius: None,
            smoothing: true,
        }
    }

    /// Number of steps; t_max must be a whole multiple of dt.
    pub fn steps(&self) -> Result<usize> {
        let bad = |m: String| Err(Error::Parameter(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        let s = (self.t_max / self.dt).round();
        if (s * self.dt - self.t_max).abs() > 1e-9 * self.t_max || s < 1.0 {
            return bad("t_max must be a whole number of steps".into());
        }
        let s = s as usize;
        if self.cadence == 0 || s % self.cadence != 0 {
            return bad(format!("cadence {} must divide the step count {s}", self.cadence));
        }
        if !(self.mass >= 0.0) {
            return bad("mass must be nonnegative".into());
        }
        if !(self.r_big > 0.0 && self.delta > 0.0) {
            return bad("R and δ must be positive".into());
        }
        Ok(s)
    }
}

/// Running space-time integrals of the smoothing functional.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SmoothingTerms {
    /// sup_R R⁻¹ ∫₀ᵗ∫_{|x|≤R} |∇ψ|².
    pub morrey_grad: f64,
    /// ∫₀ᵗ∫ |ψ|²/|x|³ (reported for d ≥ 4).
    pub inv_cube: f64,
    /// ½ ∫₀ᵗ∫ |∂_τψ|²/|x|.
    pub angular: f64,
    /// sup_R R⁻² ∫₀ᵗ∫_{|x|=R} |ψ|².
    pub spherical: f64,
    /// Weighted sum with the coefficients of the smoothing estimate.
    pub lhs: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub d: usize,
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    /// ‖(H_D + V)ψ‖².
    pub hamiltonian: Vec<f64>,
    /// ‖H_Dψ‖².
    pub hd_norm: Vec<f64>,
    /// ‖∇ψ‖².
    pub grad_norm: Vec<f64>,
    pub position: Vec<Vec<f64>>,
    pub smoothing: Vec<SmoothingTerms>,
    /// Im⟨H_Dψ, iG_φψ⟩ (d ≥ 3).
    pub t_term: Vec<f64>,
    /// C_d(‖∇ψ‖² + m²‖ψ‖²).
    pub t_bound: Vec<f64>,
    /// (1 − a)⁻² ‖(H_D + V)ψ(0)‖² when a < 1.
    pub energy_bound: Option<f64>,
    pub kato_a: Option<f64>,
    /// Time of the first non-finite state, if the run stopped early.
    pub aborted_at: Option<f64>,
}

/// C_d = (3/2)·3(2d−3)/(4(d−2)).
pub fn t_term_constant(d: usize) -> f64 {
    let d = d as f64;
    1.5 * 3.0 * (2.0 * d - 3.0) / (4.0 * (d - 2.0))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub schema_version: u32,
    pub samples: usize,
    pub t_final: f64,
    pub mass_drift: f64,
    pub hamiltonian_drift: f64,
    pub energy_bound_holds: Option<bool>,
    pub t_term_holds: Option<bool>,
    pub smoothing_final: Option<SmoothingTerms>,
    /// Smoothing functional over ‖(H_D + V)ψ(0)‖².
    pub smoothing_ratio: Option<f64>,
    pub aborted_at: Option<f64>,
    pub finite_horizon: bool,
}

impl DiagnosticsSeries {
    pub fn mass_drift(&self) -> f64 {
        drift(&self.mass)
    }

    pub fn hamiltonian_drift(&self) -> f64 {
        drift(&self.hamiltonian)
    }

    pub fn energy_bound_holds(&self) -> Option<bool> {
        self.energy_bound.map(|b| self.hd_norm.iter().all(|&h| h <= b * (1.0 + 1e-12)))
    }

    pub fn t_term_holds(&self) -> Option<bool> {
        if self.t_term.is_empty() {
            return None;
        }
        Some(self.t_term.iter().zip(&self.t_bound).all(|(t, b)| t.abs() <= *b))
    }

    pub fn smoothing_ratio(&self) -> Option<f64> {
        let s = self.smoothing.last()?;
        let h0 = *self.hamiltonian.first()?;
        Some(s.lhs / h0)
    }

    /// Smoothing functional at the last sample with t ≤ `t`.
    pub fn smoothing_at(&self, t: f64) -> Option<SmoothingTerms> {
        let i = self.times.iter().rposition(|&s| s <= t + 1e-12)?;
        self.smoothing.get(i).copied()
    }

    pub fn summary(&self) -> EvolutionSummary {
        EvolutionSummary {
            schema_version: 1,
            samples: self.times.len(),
            t_final: self.times.last().copied().unwrap_or(0.0),
            mass_drift: self.mass_drift(),
            hamiltonian_drift: self.hamiltonian_drift(),
            energy_bound_holds: self.energy_bound_holds(),
            t_term_holds: self.t_term_holds(),
            smoothing_final: self.smoothing.last().copied(),
            smoothing_ratio: self.smoothing_ratio(),
            aborted_at: self.aborted_at,
            finite_horizon: true,
        }
    }

    /// One header row, then one row per sample.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let mut head = vec!["t".to_string(), "M".into(), "H".into(), "hd_norm".into(), "grad_norm".into()];
        head.extend((1..=self.d).map(|j| format!("x{j}")));
        head.extend(["morrey_grad", "inv_cube", "angular", "spherical", "smoothing_lhs", "t_term", "t_bound"].map(String::from));
        writeln!(w, "{}", head.join(","))?;
        for i in 0..self.times.len() {
            let mut row = vec![self.times[i], self.mass[i], self.hamiltonian[i], self.hd_norm[i], self.grad_norm[i]];
            row.extend(self.position[i].iter().copied());
            let s = self.smoothing.get(i).copied().unwrap_or_default();
            row.extend([s.morrey_grad, s.inv_cube, s.angular, s.spherical, s.lhs]);
            row.push(self.t_term.get(i).copied().unwrap_or(f64::NAN));
            row.push(self.t_bound.get(i).copied().unwrap_or(f64::NAN));
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn drift(v: &[f64]) -> f64 {
    let Some(&v0) = v.first() else { return 0.0 };
    let scale = v0.abs().max(f64::MIN_POSITIVE);
    v.iter().map(|x| (x - v0).abs()).fold(0.0, f64::max) / scale
}

/// Windowed first moment of the density around `center`, using minimum-image
/// displacements.
pub fn windowed_position<T: Real>(f: &SpinorField<T>, center: &[f64], radius: f64) -> Vec<f64> {
    let g = f.grid();
    let d = g.d();
    let l = g.half_length().to_f64_lossy();
    let dens = f.density();
    let mut num = vec![0.0; d];
    let mut den = 0.0;
    let mut disp = vec![0.0; d];
    g.for_each_node(|idx, x| {
        for j in 0..d {
            let mut y = x[j].to_f64_lossy() - center[j];
            y -= 2.0 * l * ((y + l) / (2.0 * l)).floor();
            disp[j] = y;
        }
        let r = disp.iter().map(|v| v * v).sum::<f64>().sqrt();
        let t = r / radius;
        let w = if t < 1.0 { (1.0 - t * t).powi(2) } else { 0.0 };
        let p = dens[idx].to_f64_lossy() * w;
        den += p;
        for j in 0..d {
            num[j] += p * disp[j];
        }
    });
    if den == 0.0 {
        return center.to_vec();
    }
    center.iter().zip(&num).map(|(c, n)| c + n / den).collect()
}

struct Accumulator<T: Real> {
    grad: Vec<T>,
    dens: Vec<T>,
    angular: f64,
    inv_cube: f64,
    prev: Option<(Vec<T>, Vec<T>, f64, f64)>,
}

/// Propagates `initial` with Strang steps and records diagnostics.
pub fn run_evolution<T: Real>(config: &EvolutionConfig, initial: &SpinorField<T>) -> Result<DiagnosticsSeries> {
    let steps = config.steps()?;
    let grid = initial.grid().clone();
    let d = grid.d();
    let rep = build_dirac_matrices::<T>(d)?;
    if initial.ncomp() != rep.n_spin {
        return Err(Error::Shape(format!("initial state has {} components, need {}", initial.ncomp(), rep.n_spin)));
    }
    if !initial.is_finite() {
        return Err(Error::NonFinite(0.0));
    }
    let with_radial = d >= 3 && !grid.has_node_at_origin();
    if config.smoothing && !with_radial {
        return Err(Error::Parameter("smoothing integrals need d ≥ 3 and an offset grid".into()));
    }
    let m = T::lit(config.mass);
    let prop = Propagator::new(&grid, m, &rep, config.potential.as_ref())?;
    let profile = if d >= 3 { Some(MultiplierProfile::new(d, config.r_big)?) } else { None };
    let kato_a = match (&config.kato_a, &config.potential) {
        (Some(a), _) => Some(*a),
        (None, None) => Some(0.0),
        (None, Some(p)) if p.is_zero() => Some(0.0),
        (None, Some(p)) if d >= 3 => extract_constants(p, WeightFamily::Stationary, d, &RadialMesh::default())?.kato_a,
        _ => None,
    };
    let radius = config.window_radius.unwrap_or(0.5 * grid.half_length().to_f64_lossy());
    let radii = grid.radii();
    let dv = grid.dv();
    let dt_sample = config.dt * config.cadence as f64;
    let c_d = if d >= 3 { t_term_constant(d) } else { f64::NAN };

    let mut series = DiagnosticsSeries { d, kato_a, ..Default::default() };
    let mut acc = Accumulator::<T> {
        grad: vec![T::zero(); grid.npts()],
        dens: vec![T::zero(); grid.npts()],
        angular: 0.0,
        inv_cube: 0.0,
        prev: None,
    };
    let mut psi = initial.clone();
    let mut center = windowed_position(&psi, &vec![0.0; d], grid.half_length().to_f64_lossy() * 2.0);
    let dt = T::lit(config.dt);

    for step in 0..=steps {
        if step % config.cadence == 0 {
            let t = step as f64 * config.dt;
            if !psi.is_finite() {
                series.aborted_at = Some(t);
                break;
            }
            let hd = prop.apply_hd(&psi);
            let mut h = hd.clone();
            if let Some(p) = prop.potential() {
                h = h.add(&p.apply(&psi));
            }
            let mass = psi.norm_sq().to_f64_lossy();
            let hnorm = h.norm_sq().to_f64_lossy();
            let hdn = hd.norm_sq().to_f64_lossy();
            series.times.push(t);
            series.mass.push(mass);
            series.hamiltonian.push(hnorm);
            series.hd_norm.push(hdn);
            center = windowed_position(&psi, &center, radius);
            series.position.push(center.clone());
            if with_radial {
                let (split, dr) = radial_split_with_derivative(&psi)?;
                let grad_sq = (split.grad.iter().copied().sum::<T>() * dv).to_f64_lossy();
                series.grad_norm.push(grad_sq);
                if let Some(pr) = &profile {
                    let ig = igphi_from_radial(&psi, &dr, pr);
                    series.t_term.push(hd.inner(&ig).im.to_f64_lossy());
                    series.t_bound.push(c_d * (grad_sq + config.mass * config.mass * mass));
                }
                if config.smoothing {
                    let dens = psi.density();
                    let mut ang = T::zero();
                    let mut cube = T::zero();
                    for (i, &r) in radii.iter().enumerate() {
                        ang += split.tangential[i] / r;
                        cube += dens[i] / (r * r * r);
                    }
                    let (ang, cube) = ((ang * dv).to_f64_lossy(), (cube * dv).to_f64_lossy());
                    if let Some((pg, pd, pa, pc)) = acc.prev.take() {
                        let w = T::lit(0.5 * dt_sample);
                        for i in 0..grid.npts() {
                            acc.grad[i] += w * (pg[i] + split.grad[i]);
                            acc.dens[i] += w * (pd[i] + dens[i]);
                        }
                        acc.angular += 0.5 * dt_sample * (pa + ang);
                        acc.inv_cube += 0.5 * dt_sample * (pc + cube);
                    }
                    acc.prev = Some((split.grad, dens, ang, cube));
                    series.smoothing.push(smoothing_terms(&grid, &acc, config.delta));
                }
            } else {
                series.grad_norm.push(hdn - config.mass * config.mass * mass);
            }
        }
        if step < steps {
            psi = prop.step(&psi, dt);
        }
    }
    series.energy_bound = match (kato_a, series.hamiltonian.first()) {
        (Some(a), Some(&h0)) if a < 1.0 => Some(h0 / ((1.0 - a) * (1.0 - a))),
        _ => None,
    };
    Ok(series)
}

fn smoothing_terms<T: Real>(grid: &crate::grid::Grid<T>, acc: &Accumulator<T>, delta: f64) -> SmoothingTerms {
    let d = grid.d();
    let morrey_grad = morrey_of_density(grid, &acc.grad).0.to_f64_lossy();
    let spherical = spherical_of_density(grid, &acc.dens).0.to_f64_lossy();
    let angular = 0.5 * acc.angular;
    let inv_cube = if d >= 4 { acc.inv_cube } else { 0.0 };
    let sph_coef = if d >= 4 { (d as f64 - 1.0) / 16.0 } else { delta };
    let lhs = delta * morrey_grad + delta * inv_cube + angular + sph_coef * spherical;
    SmoothingTerms { morrey_grad, inv_cube, angular, spherical, lhs }
}
