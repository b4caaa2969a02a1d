//! Hardy, Morrey–Campanato and spherical norms, and the dyadic constant c_δ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{gradient_density, Grid, SpinorField};
use crate::scalar::Real;

/// Partial sum of c_δ² = Σ_j 2/(2^{−δj} + 2^{δj})² over |j| ≤ J, with a
/// rigorous bound on the omitted tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CDelta {
    pub delta: f64,
    pub terms: usize,
    pub partial: f64,
    pub tail_bound: f64,
}

impl CDelta {
    /// Upper end of the bracket [partial, partial + tail] for c_δ².
    pub fn upper(&self) -> f64 {
        self.partial + self.tail_bound
    }

    /// c_δ itself, from the upper bracket.
    pub fn c(&self) -> f64 {
        self.upper().sqrt()
    }
}

/// c_δ² for 0 < δ < 1/2.
pub fn c_delta(delta: f64, truncation: usize) -> Result<CDelta> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Parameter(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    if truncation == 0 {
        return Err(Error::Parameter("truncation must be at least 1".into()));
    }
    Ok(c_delta_unchecked(delta, truncation))
}

/// Same series for any δ > 0 (it converges for every positive δ).
pub fn c_delta_unchecked(delta: f64, truncation: usize) -> CDelta {
    let mut partial = 0.5;
    for j in 1..=truncation {
        let q = (-2.0 * delta * j as f64).exp2();
        // 2/(2^{δj} + 2^{−δj})² = 2q/(1 + q)² with q = 2^{−2δj}
        partial += 2.0 * (2.0 * q / ((1.0 + q) * (1.0 + q)));
    }
    let tail_bound = 4.0 * (-2.0 * delta * truncation as f64).exp2() / ((2.0 * delta).exp2() - 1.0);
    CDelta { delta, terms: truncation, partial, tail_bound }
}

/// Truncation that makes the tail bound at most `tol`.
pub fn c_delta_truncation(delta: f64, tol: f64) -> usize {
    let denom = (2.0 * delta).exp2() - 1.0;
    let j = ((4.0 / (tol * denom)).log2() / (2.0 * delta)).ceil();
    j.max(1.0) as usize
}

/// c_δ² with tail bound below 1e-12.
pub fn c_delta_converged(delta: f64) -> Result<CDelta> {
    c_delta(delta, c_delta_truncation(delta, 1e-12))
}

/// The small-δ approximation 2/(δ ln 2).
pub fn c_delta_asymptotic(delta: f64) -> f64 {
    2.0 / (delta * std::f64::consts::LN_2)
}

/// Ball and shell integrals of a node density, via radially sorted prefix sums.
pub struct RadialSums<'a, T: Real> {
    grid: &'a Grid<T>,
    prefix: Vec<T>,
}

impl<'a, T: Real> RadialSums<'a, T> {
    pub fn new(grid: &'a Grid<T>, density: &[T]) -> Self {
        let idx = grid.radial_index();
        let mut prefix = Vec::with_capacity(density.len() + 1);
        let mut acc = T::zero();
        prefix.push(acc);
        for &i in &idx.order {
            acc += density[i as usize];
            prefix.push(acc);
        }
        Self { grid, prefix }
    }

    fn count_le(&self, r: T) -> usize {
        self.grid.radial_index().radii.partition_point(|&x| x <= r)
    }

    fn count_lt(&self, r: T) -> usize {
        self.grid.radial_index().radii.partition_point(|&x| x < r)
    }

    /// ∫_{|x|≤R} density.
    pub fn ball(&self, r: T) -> T {
        self.prefix[self.count_le(r)] * self.grid.dv()
    }

    /// ∫_{|x|=R} density dσ: mean over the one-cell shell |r − R| < h/2,
    /// times the sphere area.
    pub fn shell(&self, r: T) -> T {
        let half = self.grid.h() * T::lit(0.5);
        let lo = self.count_le(r - half);
        let hi = self.count_lt(r + half);
        if hi <= lo {
            return T::zero();
        }
        let mean = (self.prefix[hi] - self.prefix[lo]) / T::from_usize_lossy(hi - lo);
        mean * self.grid.sphere_area(r)
    }

    pub fn total(&self) -> T {
        *self.prefix.last().unwrap() * self.grid.dv()
    }
}

/// Supremum of g over R on the grid 2^{k/4} covering [r_min, ℓ√d], refined
/// by golden-section search around the best grid point.
pub fn sup_over_radii<T: Real>(grid: &Grid<T>, g: impl Fn(T) -> T) -> (T, T) {
    let lo = grid.min_node_radius().to_f64_lossy().max(1e-12);
    let hi = grid.half_length().to_f64_lossy() * (grid.d() as f64).sqrt();
    let k0 = (4.0 * lo.log2()).floor() as i64;
    let k1 = (4.0 * hi.log2()).ceil() as i64;
    let radii: Vec<f64> = (k0..=k1).map(|k| (k as f64 / 4.0).exp2()).collect();
    let mut best = (T::neg_infinity(), T::zero(), 0usize);
    for (i, &r) in radii.iter().enumerate() {
        let v = g(T::lit(r));
        if v > best.0 {
            best = (v, T::lit(r), i);
        }
    }
    let i = best.2;
    let a = radii[i.saturating_sub(1)];
    let b = radii[(i + 1).min(radii.len() - 1)];
    let (mut x0, mut x1) = (a, b);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = x1 - phi * (x1 - x0);
    let mut d = x0 + phi * (x1 - x0);
    let (mut fc, mut fd) = (g(T::lit(c)), g(T::lit(d)));
    for _ in 0..60 {
        if fc >= fd {
            x1 = d;
            d = c;
            fd = fc;
            c = x1 - phi * (x1 - x0);
            fc = g(T::lit(c));
        } else {
            x0 = c;
            c = d;
            fc = fd;
            d = x0 + phi * (x1 - x0);
            fd = g(T::lit(d));
        }
        for (v, r) in [(fc, c), (fd, d)] {
            if v > best.0 {
                best = (v, T::lit(r), best.2);
            }
        }
    }
    (best.0.max(T::zero()), best.1)
}

/// sup_R R^{−1} ∫_{|x|≤R} density, with its argmax.
pub fn morrey_of_density<T: Real>(grid: &Grid<T>, density: &[T]) -> (T, T) {
    let sums = RadialSums::new(grid, density);
    sup_over_radii(grid, |r| sums.ball(r) / r)
}

/// sup_R R^{−2} ∫_{|x|=R} density, with its argmax.
pub fn spherical_of_density<T: Real>(grid: &Grid<T>, density: &[T]) -> (T, T) {
    let sums = RadialSums::new(grid, density);
    sup_over_radii(grid, |r| sums.shell(r) / (r * r))
}

/// Squared Morrey–Campanato norm of u, with the maximizing radius.
pub fn morrey_norm<T: Real>(u: &SpinorField<T>) -> (T, T) {
    morrey_of_density(u.grid(), &u.density())
}

/// Squared spherical norm of u, with the maximizing radius.
pub fn spherical_norm<T: Real>(u: &SpinorField<T>) -> (T, T) {
    spherical_of_density(u.grid(), &u.density())
}

/// Both sides of the two weighted comparison inequalities (squared form).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WeightedBounds {
    pub delta: f64,
    pub c_delta_sq: f64,
    /// ∫|u|²/(r^{1/2−δ} + r^{1/2+δ})²
    pub lhs_morrey: f64,
    /// c_δ²·sup_R R^{−1}∫_{B_R}|u|²
    pub rhs_morrey: f64,
    /// ∫|u|²/(r^{3/2−δ} + r^{3/2+δ})²
    pub lhs_spherical: f64,
    /// (c_δ²/2)·sup_R R^{−2}∫_{|x|=R}|u|²
    pub rhs_spherical: f64,
}

impl WeightedBounds {
    pub fn holds(&self, rel_slack: f64) -> bool {
        self.lhs_morrey <= self.rhs_morrey * (1.0 + rel_slack)
            && self.lhs_spherical <= self.rhs_spherical * (1.0 + rel_slack)
    }
}

pub fn verify_weighted_bounds<T: Real>(u: &SpinorField<T>, delta: f64) -> Result<WeightedBounds> {
    let cd = c_delta_converged(delta)?;
    let g = u.grid();
    if g.has_node_at_origin() {
        return Err(Error::NodeAtOrigin);
    }
    let dens = u.density();
    let radii = g.radii();
    let dl = T::lit(delta);
    let half = T::lit(0.5);
    let three_half = T::lit(1.5);
    let w1: Vec<T> = radii.iter().map(|&r| (r.powf(half - dl) + r.powf(half + dl)).powi(-2)).collect();
    let w2: Vec<T> = radii.iter().map(|&r| (r.powf(three_half - dl) + r.powf(three_half + dl)).powi(-2)).collect();
    let integ = |w: &[T]| (dens.iter().zip(w).map(|(&a, &b)| a * b).sum::<T>() * g.dv()).to_f64_lossy();
    let (morrey, _) = morrey_of_density(g, &dens);
    let (sph, _) = spherical_of_density(g, &dens);
    Ok(WeightedBounds {
        delta,
        c_delta_sq: cd.upper(),
        lhs_morrey: integ(&w1),
        rhs_morrey: cd.upper() * morrey.to_f64_lossy(),
        lhs_spherical: integ(&w2),
        rhs_spherical: 0.5 * cd.upper() * sph.to_f64_lossy(),
    })
}

/// ∫|u|²/|x|² against (4/(d−2)²)∫|∇u|².
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HardyCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl HardyCheck {
    pub fn ratio(&self) -> f64 {
        if self.rhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }

    pub fn holds(&self, rel_slack: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + rel_slack)
    }
}

pub fn hardy_constant_sq(d: usize) -> f64 {
    4.0 / ((d as f64 - 2.0) * (d as f64 - 2.0))
}

pub fn verify_hardy<T: Real>(u: &SpinorField<T>) -> Result<HardyCheck> {
    let g = u.grid();
    let d = g.d();
    if d < 3 {
        return Err(Error::Dimension(format!("Hardy's inequality needs d ≥ 3, got {d}")));
    }
    if g.has_node_at_origin() {
        return Err(Error::NodeAtOrigin);
    }
    let inv_r2: Vec<T> = g.radii().iter().map(|&r| T::one() / (r * r)).collect();
    let lhs = u.weighted_norm_sq(&inv_r2).to_f64_lossy();
    let grad = gradient_density(u).iter().copied().sum::<T>() * g.dv();
    Ok(HardyCheck { lhs, rhs: hardy_constant_sq(d) * grad.to_f64_lossy() })
}

/// Hardy ratio for the radial family u_σ = r^{−(d−2)/2+σ}χ(r), χ = 1 on
/// r ≤ 1 and ½(1 + cos πt), t = ln r / L, on 1 < r < e^L.
///
/// Both integrals reduce exactly to one-dimensional radial integrals; the
/// power-law core is integrated in closed form and the cutoff region by
/// composite Simpson in s = ln r.
pub fn hardy_radial_family(d: usize, sigma: f64, log_span: f64) -> Result<HardyCheck> {
    if d < 3 {
        return Err(Error::Dimension(format!("Hardy's inequality needs d ≥ 3, got {d}")));
    }
    if !(sigma > 0.0) || !(log_span > 0.0) {
        return Err(Error::Parameter("sigma and log_span must be positive".into()));
    }
    let p = -(d as f64 - 2.0) / 2.0 + sigma;
    let area = crate::grid::sphere_area::<f64>(d, 1.0);
    let steps = 20_000usize;
    let hs = log_span / steps as f64;
    let (mut lhs, mut grad) = (0.0, 0.0);
    for k in 0..=steps {
        let s = k as f64 * hs;
        let t = s / log_span;
        let chi = 0.5 * (1.0 + (std::f64::consts::PI * t).cos());
        let chi_s = -0.5 * std::f64::consts::PI * (std::f64::consts::PI * t).sin() / log_span;
        let e = (2.0 * sigma * s).exp();
        let w = if k == 0 || k == steps { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        lhs += w * e * chi * chi;
        grad += w * e * (p * chi + chi_s) * (p * chi + chi_s);
    }
    let core = 1.0 / (2.0 * sigma);
    lhs = area * (core + lhs * hs / 3.0);
    grad = area * (p * p * core + grad * hs / 3.0);
    Ok(HardyCheck { lhs, rhs: hardy_constant_sq(d) * grad })
}

/// All norms of one field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormReport {
    pub morrey: f64,
    pub morrey_argmax: f64,
    pub spherical: f64,
    pub spherical_argmax: f64,
    pub hardy_lhs: f64,
    pub hardy_rhs: f64,
    pub weighted: WeightedBounds,
}

pub fn norm_report<T: Real>(u: &SpinorField<T>, delta: f64) -> Result<NormReport> {
    let (m, mr) = morrey_norm(u);
    let (s, sr) = spherical_norm(u);
    let hardy = verify_hardy(u)?;
    Ok(NormReport {
        morrey: m.to_f64_lossy(),
        morrey_argmax: mr.to_f64_lossy(),
        spherical: s.to_f64_lossy(),
        spherical_argmax: sr.to_f64_lossy(),
        hardy_lhs: hardy.lhs,
        hardy_rhs: hardy.rhs,
        weighted: verify_weighted_bounds(u, delta)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_term_is_one_half() {
        let c = c_delta(0.3, 1).unwrap();
        assert!(c.partial > 0.5);
        let only_center = 0.5;
        for &delta in &[0.05, 0.2, 0.45] {
            assert!(c_delta(delta, 1).unwrap().partial >= only_center);
        }
    }

    #[test]
    fn range_guard() {
        assert!(c_delta(0.0, 10).is_err());
        assert!(c_delta(0.5, 10).is_err());
        assert!(c_delta(0.25, 0).is_err());
    }

    #[test]
    fn tail_bound_brackets_limit() {
        for &delta in &[0.05, 0.1, 0.25, 0.45] {
            let limit = c_delta_unchecked(delta, 200_000).partial;
            for j in [1usize, 5, 20, 100] {
                let c = c_delta(delta, j).unwrap();
                assert!(c.partial <= limit + 1e-12);
                assert!(limit <= c.upper() + 1e-12, "δ={delta} J={j}");
            }
        }
    }

    #[test]
    fn truncation_hits_tolerance() {
        let j = c_delta_truncation(0.1, 1e-10);
        assert!(c_delta(0.1, j).unwrap().tail_bound <= 1e-10);
    }

    #[test]
    fn radial_family_trend() {
        let r: Vec<f64> = [0.4, 0.2, 0.1].iter().map(|&s| hardy_radial_family(3, s, 20.0).unwrap().ratio()).collect();
        assert!(r[0] < r[1] && r[1] < r[2] && r[2] < 1.0);
    }
}
