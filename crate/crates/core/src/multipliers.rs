//! Radial multiplier φ = φ_M + φ_ls and the kinetic lower bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{radial_tangential_split, RadialSplit, SpinorField};
use crate::norms::RadialSums;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileKind {
    /// φ = r + φ_ls with local-smoothing radius R.
    Full { r_big: f64 },
    /// φ = r.
    Morawetz,
    /// φ = φ_ls alone.
    LocalSmoothing { r_big: f64 },
    /// φ = |x|².
    Quadratic,
    /// φ = const.
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierProfile {
    pub d: usize,
    pub kind: ProfileKind,
}

impl MultiplierProfile {
    /// The full multiplier φ_M + φ_ls.
    pub fn new(d: usize, r_big: f64) -> Result<Self> {
        Self::with_kind(d, ProfileKind::Full { r_big })
    }

    pub fn with_kind(d: usize, kind: ProfileKind) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("profile dimension must be at least 1".into()));
        }
        if let ProfileKind::Full { r_big } | ProfileKind::LocalSmoothing { r_big } = kind {
            if !(r_big > 0.0 && r_big.is_finite()) {
                return Err(Error::Parameter(format!("R must be positive, got {r_big}")));
            }
        }
        Ok(Self { d, kind })
    }

    pub fn morawetz(d: usize) -> Self {
        Self { d, kind: ProfileKind::Morawetz }
    }

    pub fn quadratic(d: usize) -> Self {
        Self { d, kind: ProfileKind::Quadratic }
    }

    pub fn r_big(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::Full { r_big } | ProfileKind::LocalSmoothing { r_big } => Some(r_big),
            _ => None,
        }
    }

    fn has_morawetz(&self) -> bool {
        matches!(self.kind, ProfileKind::Full { .. } | ProfileKind::Morawetz)
    }

    fn ls_prime<T: Real>(&self, r: T) -> T {
        let Some(rb) = self.r_big() else { return T::zero() };
        let (d, rb) = (T::from_usize_lossy(self.d), T::lit(rb));
        let one = T::one();
        let two = T::lit(2.0);
        if r <= rb {
            (d - one) / (two * d) * r / rb
        } else {
            T::lit(0.5) - (rb / r).powi(self.d as i32 - 1) / (two * d)
        }
    }

    fn ls_second<T: Real>(&self, r: T) -> T {
        let Some(rb) = self.r_big() else { return T::zero() };
        let (d, rb) = (T::from_usize_lossy(self.d), T::lit(rb));
        let one = T::one();
        let two = T::lit(2.0);
        if r <= rb {
            (d - one) / (two * d * rb)
        } else {
            (d - one) * (rb / r).powi(self.d as i32 - 1) / (two * d * r)
        }
    }

    /// φ′(r).
    pub fn phi_prime<T: Real>(&self, r: T) -> T {
        match self.kind {
            ProfileKind::Quadratic => T::lit(2.0) * r,
            ProfileKind::Constant => T::zero(),
            _ => {
                let m = if self.has_morawetz() { T::one() } else { T::zero() };
                m + self.ls_prime(r)
            }
        }
    }

    /// φ″(r) for r > 0.
    pub fn phi_second<T: Real>(&self, r: T) -> T {
        match self.kind {
            ProfileKind::Quadratic => T::lit(2.0),
            ProfileKind::Constant => T::zero(),
            _ => self.ls_second(r),
        }
    }

    pub fn checked_phi_prime(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Parameter(format!("r must be positive, got {r}")));
        }
        Ok(self.phi_prime(r))
    }

    pub fn checked_phi_second(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Parameter(format!("r must be positive, got {r}")));
        }
        Ok(self.phi_second(r))
    }

    /// Δφ = φ″ + (d−1)φ′/r.
    pub fn laplacian<T: Real>(&self, r: T) -> T {
        self.phi_second(r) + T::from_usize_lossy(self.d - 1) * self.phi_prime(r) / r
    }

    /// Absolutely continuous part of Δ²φ at r > 0.
    pub fn bilaplacian_regular<T: Real>(&self, r: T) -> T {
        let d = T::from_usize_lossy(self.d);
        let one = T::one();
        let coef = -(d - one) * (d - T::lit(3.0)) / (r * r * r);
        let mut out = T::zero();
        if self.has_morawetz() && self.d >= 3 {
            out += coef;
        }
        if let Some(rb) = self.r_big() {
            if r >= T::lit(rb) {
                out += coef * T::lit(0.5);
            }
        }
        out
    }

    /// Surface term of Δ²φ: weight multiplying δ_{|x|=R}.
    pub fn bilaplacian_surface(&self) -> Option<(f64, f64)> {
        self.r_big().map(|rb| (rb, -(self.d as f64 - 1.0) / (2.0 * rb * rb)))
    }

    /// Coefficient of δ₀ in Δ²φ (−8π in d = 3 from φ_M).
    pub fn bilaplacian_point_mass(&self) -> f64 {
        if self.has_morawetz() && self.d == 3 {
            -8.0 * std::f64::consts::PI
        } else {
            0.0
        }
    }
}

/// Pointwise φ″|∂_r f|² + (φ′/r)|∂_τ f|².
pub fn hessian_form<T: Real>(profile: &MultiplierProfile, f: &SpinorField<T>) -> Result<Vec<T>> {
    let split = radial_tangential_split(f)?;
    let radii = f.grid().radii();
    Ok(radii
        .iter()
        .enumerate()
        .map(|(i, &r)| profile.phi_second(r) * split.radial[i] + profile.phi_prime(r) / r * split.tangential[i])
        .collect())
}

/// |ψ(0)|² from a + b r² through the mean densities of the two innermost node shells.
pub fn density_at_origin<T: Real>(f: &SpinorField<T>) -> T {
    let g = f.grid();
    let idx = g.radial_index();
    let dens = f.density();
    let tol = T::lit(1e-9) * g.h();
    let mut shells: Vec<(T, T, usize)> = Vec::new();
    for (pos, &node) in idx.order.iter().enumerate() {
        let r = idx.radii[pos];
        match shells.last_mut() {
            Some(last) if (r - last.0).abs() <= tol => {
                last.1 += dens[node as usize];
                last.2 += 1;
            }
            _ => {
                if shells.len() == 2 {
                    break;
                }
                shells.push((r, dens[node as usize], 1));
            }
        }
    }
    if shells.len() < 2 {
        return shells.first().map_or(T::zero(), |s| s.1 / T::from_usize_lossy(s.2));
    }
    let (r1, m1) = (shells[0].0, shells[0].1 / T::from_usize_lossy(shells[0].2));
    let (r2, m2) = (shells[1].0, shells[1].1 / T::from_usize_lossy(shells[1].2));
    (r2 * r2 * m1 - r1 * r1 * m2) / (r2 * r2 - r1 * r1)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KineticReport {
    /// K = ½∫∇ψ D²φ ∇ψ̄ − ⅛∫Δ²φ|ψ|².
    pub k: f64,
    pub hessian_part: f64,
    pub regular_part: f64,
    pub surface_part: f64,
    pub point_part: f64,
    /// ½∫|∂_τψ|²/|x|, (d−1)/(4dR)∫_{B_R}|∇ψ|², (d−1)(d−3)/8∫|ψ|²/|x|³, (d−1)/(16R²)∫_{|x|=R}|ψ|².
    pub rhs_terms: [f64; 4],
    pub margin: f64,
}

/// Kinetic term K of the full multiplier and its lower bound.
pub fn kinetic_lower_bound_check<T: Real>(profile: &MultiplierProfile, f: &SpinorField<T>) -> Result<KineticReport> {
    let d = profile.d;
    if d < 3 {
        return Err(Error::Dimension(format!("the kinetic bound needs d ≥ 3, got {d}")));
    }
    if f.grid().d() != d {
        return Err(Error::Dimension(format!("profile d={d} on a d={} grid", f.grid().d())));
    }
    let split = radial_tangential_split(f)?;
    kinetic_from_split(profile, f, &split)
}

/// The same check for several radii R, sharing one gradient evaluation.
pub fn kinetic_lower_bound_sweep<T: Real>(d: usize, radii: &[f64], f: &SpinorField<T>) -> Result<Vec<KineticReport>> {
    if d < 3 {
        return Err(Error::Dimension(format!("the kinetic bound needs d ≥ 3, got {d}")));
    }
    if f.grid().d() != d {
        return Err(Error::Dimension(format!("profile d={d} on a d={} grid", f.grid().d())));
    }
    let split = radial_tangential_split(f)?;
    radii.iter().map(|&r| kinetic_from_split(&MultiplierProfile::new(d, r)?, f, &split)).collect()
}

fn kinetic_from_split<T: Real>(profile: &MultiplierProfile, f: &SpinorField<T>, split: &RadialSplit<T>) -> Result<KineticReport> {
    let d = profile.d;
    let ProfileKind::Full { r_big } = profile.kind else {
        return Err(Error::Parameter("the kinetic bound uses the full multiplier".into()));
    };
    let g = f.grid();
    let radii = g.radii();
    let dens = f.density();
    let dv = g.dv();
    let df = d as f64;
    let (mut hess, mut reg, mut tang_r, mut inv_r3) = (T::zero(), T::zero(), T::zero(), T::zero());
    for (i, &r) in radii.iter().enumerate() {
        hess += profile.phi_second(r) * split.radial[i] + profile.phi_prime(r) / r * split.tangential[i];
        reg += profile.bilaplacian_regular(r) * dens[i];
        tang_r += split.tangential[i] / r;
        inv_r3 += dens[i] / (r * r * r);
    }
    let f64v = |x: T| (x * dv).to_f64_lossy();
    let (hess, reg, tang_r, inv_r3) = (f64v(hess), f64v(reg), f64v(tang_r), f64v(inv_r3));
    let rb = T::lit(r_big);
    let shell = RadialSums::new(g, &dens).shell(rb).to_f64_lossy();
    let ball_grad = RadialSums::new(g, &split.grad).ball(rb).to_f64_lossy();
    let (_, surface_w) = profile.bilaplacian_surface().unwrap();
    let point = -0.125 * profile.bilaplacian_point_mass() * density_at_origin(f).to_f64_lossy();
    let hessian_part = 0.5 * hess;
    let regular_part = -0.125 * reg;
    let surface_part = -0.125 * surface_w * shell;
    let k = hessian_part + regular_part + surface_part + point;
    let rhs_terms = [
        0.5 * tang_r,
        (df - 1.0) / (4.0 * df * r_big) * ball_grad,
        (df - 1.0) * (df - 3.0) / 8.0 * inv_r3,
        (df - 1.0) / (16.0 * r_big * r_big) * shell,
    ];
    let margin = k - rhs_terms.iter().sum::<f64>();
    Ok(KineticReport { k, hessian_part, regular_part, surface_part, point_part: point, rhs_terms, margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuity_at_r_big() {
        for d in 3..=6 {
            for &rb in &[0.5, 1.0, 2.0] {
                let p = MultiplierProfile::new(d, rb).unwrap();
                let below = p.phi_prime(rb);
                let above = p.phi_prime(rb * (1.0 + 1e-13));
                assert!((below - above).abs() < 1e-12);
                assert!((below - 1.0 - (d as f64 - 1.0) / (2.0 * d as f64)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn example_values() {
        let p = MultiplierProfile::new(3, 1.0).unwrap();
        assert!((p.phi_prime(1.0f64) - 4.0 / 3.0).abs() < 1e-15);
        assert!((p.phi_prime(1e9f64) - 1.5).abs() < 1e-9);
        assert!((p.phi_prime(1e-12f64) - 1.0).abs() < 1e-11);
        assert!(p.checked_phi_prime(0.0).is_err());
        assert!(p.checked_phi_second(-1.0).is_err());
    }

    #[test]
    fn second_derivative_jump() {
        for d in 3..=6 {
            let rb = 1.7;
            let p = MultiplierProfile::new(d, rb).unwrap();
            let inner = p.phi_second(rb);
            let outer = p.phi_second(rb * (1.0 + 1e-14));
            let df = d as f64;
            assert!((inner - (df - 1.0) / (2.0 * df * rb)).abs() < 1e-12);
            assert!((outer - (df - 1.0) / (2.0 * df * rb)).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_profiles() {
        assert!(MultiplierProfile::new(3, 0.0).is_err());
        assert!(MultiplierProfile::new(0, 1.0).is_err());
    }
}
