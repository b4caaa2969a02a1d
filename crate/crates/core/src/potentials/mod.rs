//! Hermitian radial potentials V(x) = s(r)·I + b(r)·β + a(r)·A(x̂), with
//! A(x̂) = −i(α·x̂)β, and everything needed to certify them.
//!
//! All three channels are closed under the algebra used by the operators:
//! {A, β} = 0 and A² = I, so [α_j, V], [β, V], {V, β} and e^{−itV} have
//! closed forms.

mod certificate;
mod constants;
mod virial;

pub use certificate::*;
pub use constants::*;
pub use virial::*;

use serde::{Deserialize, Serialize};

use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::grid::{norm, Grid, SpinorField};
use crate::matrix::CMat;
use crate::scalar::{cplx, czero, times_i, Real, C};

/// Radial shape of one channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialProfile {
    /// g/r
    Coulomb { g: f64 },
    /// g/(r^{1−ε} + r^{1+ε})
    Smoothed { g: f64, eps: f64 },
    /// g·exp(−r²/(2w²))
    Gaussian { g: f64, width: f64 },
    /// g
    Constant { g: f64 },
}

impl RadialProfile {
    pub fn coupling(&self) -> f64 {
        match *self {
            Self::Coulomb { g } | Self::Smoothed { g, .. } | Self::Gaussian { g, .. } | Self::Constant { g } => g,
        }
    }

    pub fn with_coupling(&self, g: f64) -> Self {
        match *self {
            Self::Coulomb { .. } => Self::Coulomb { g },
            Self::Smoothed { eps, .. } => Self::Smoothed { g, eps },
            Self::Gaussian { width, .. } => Self::Gaussian { g, width },
            Self::Constant { .. } => Self::Constant { g },
        }
    }

    pub fn value<T: Real>(&self, r: T) -> T {
        match *self {
            Self::Coulomb { g } => T::lit(g) / r,
            Self::Smoothed { g, eps } => {
                let e = T::lit(eps);
                T::lit(g) / (r.powf(T::one() - e) + r.powf(T::one() + e))
            }
            Self::Gaussian { g, width } => {
                let w = T::lit(width);
                T::lit(g) * (-(r * r) / (T::lit(2.0) * w * w)).exp()
            }
            Self::Constant { g } => T::lit(g),
        }
    }

    pub fn derivative<T: Real>(&self, r: T) -> T {
        match *self {
            Self::Coulomb { g } => -T::lit(g) / (r * r),
            Self::Smoothed { g, eps } => {
                let e = T::lit(eps);
                let one = T::one();
                let den = r.powf(one - e) + r.powf(one + e);
                let dden = (one - e) * r.powf(-e) + (one + e) * r.powf(e);
                -T::lit(g) * dden / (den * den)
            }
            Self::Gaussian { g, width } => {
                let w = T::lit(width);
                -T::lit(g) * r / (w * w) * (-(r * r) / (T::lit(2.0) * w * w)).exp()
            }
            Self::Constant { .. } => T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parameter(m.to_string()));
        match *self {
            _ if !self.coupling().is_finite() => bad("coupling must be finite"),
            Self::Smoothed { eps, .. } if !(eps > 0.0 && eps < 1.0) => bad("smoothing exponent must lie in (0,1)"),
            Self::Gaussian { width, .. } if !(width > 0.0 && width.is_finite()) => bad("width must be positive"),
            _ => Ok(()),
        }
    }

    /// Degree of homogeneity, when the profile is a pure power.
    pub fn homogeneity(&self) -> Option<i32> {
        match self {
            Self::Coulomb { .. } => Some(-1),
            Self::Constant { .. } => Some(0),
            _ => None,
        }
    }

    pub fn singularity(&self) -> &'static str {
        match self {
            Self::Coulomb { .. } => "|x|^-1 at the origin",
            Self::Smoothed { .. } => "|x|^(eps-1) at the origin",
            Self::Gaussian { .. } | Self::Constant { .. } => "bounded",
        }
    }

    pub fn decay(&self) -> &'static str {
        match self {
            Self::Coulomb { .. } => "|x|^-1",
            Self::Smoothed { .. } => "|x|^(-1-eps)",
            Self::Gaussian { .. } => "gaussian",
            Self::Constant { .. } => "none",
        }
    }

    fn bounded_at_origin(&self) -> bool {
        matches!(self, Self::Gaussian { .. } | Self::Constant { .. })
    }
}

/// A named potential. Absent channels are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub name: String,
    /// s(r), multiplying the identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar: Option<RadialProfile>,
    /// b(r), multiplying β.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lorentz: Option<RadialProfile>,
    /// a(r), multiplying −i(α·x̂)β.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomalous: Option<RadialProfile>,
}

/// Values and radial derivatives of the three channels at one radius.
#[derive(Clone, Copy, Debug)]
pub struct ChannelValues<T> {
    pub s: T,
    pub b: T,
    pub a: T,
    pub ds: T,
    pub db: T,
    pub da: T,
}

impl PotentialSpec {
    pub fn zero() -> Self {
        Self { name: "zero".into(), scalar: None, lorentz: None, anomalous: None }
    }

    pub fn constant(c: f64) -> Self {
        Self { name: "constant".into(), scalar: Some(RadialProfile::Constant { g: c }), ..Self::zero() }
    }

    /// V = −ν/|x|·I.
    pub fn electrostatic(nu: f64) -> Self {
        Self { name: "electrostatic".into(), scalar: Some(RadialProfile::Coulomb { g: -nu }), ..Self::zero() }
    }

    /// V = −μ/|x|·β.
    pub fn lorentz_scalar(mu: f64) -> Self {
        Self { name: "lorentz_scalar".into(), lorentz: Some(RadialProfile::Coulomb { g: -mu }), ..Self::zero() }
    }

    /// V = −iτ(α·x)β/|x|².
    pub fn anomalous_magnetic(tau: f64) -> Self {
        Self { name: "anomalous_magnetic".into(), anomalous: Some(RadialProfile::Coulomb { g: tau }), ..Self::zero() }
    }

    /// V = −ν(|x|^{1−ε} + |x|^{1+ε})^{−1}·I.
    pub fn smooth_electrostatic(nu: f64, eps: f64) -> Self {
        Self {
            name: "smooth_electrostatic".into(),
            scalar: Some(RadialProfile::Smoothed { g: -nu, eps }),
            ..Self::zero()
        }
    }

    /// V = −μ(|x|^{1−ε} + |x|^{1+ε})^{−1}·β.
    pub fn smooth_lorentz_scalar(mu: f64, eps: f64) -> Self {
        Self {
            name: "smooth_lorentz_scalar".into(),
            lorentz: Some(RadialProfile::Smoothed { g: -mu, eps }),
            ..Self::zero()
        }
    }

    /// V = −iτ(α·x)β/(|x|^{2−ε} + |x|^{2+ε}).
    pub fn smooth_anomalous_magnetic(tau: f64, eps: f64) -> Self {
        Self {
            name: "smooth_anomalous_magnetic".into(),
            anomalous: Some(RadialProfile::Smoothed { g: tau, eps }),
            ..Self::zero()
        }
    }

    /// V = −v₀·exp(−|x|²/(2w²))·I.
    pub fn gaussian_well(v0: f64, width: f64) -> Self {
        Self {
            name: "gaussian_well".into(),
            scalar: Some(RadialProfile::Gaussian { g: -v0, width }),
            ..Self::zero()
        }
    }

    pub fn channels(&self) -> [Option<RadialProfile>; 3] {
        [self.scalar, self.lorentz, self.anomalous]
    }

    pub fn validate(&self) -> Result<()> {
        self.channels().iter().flatten().try_for_each(|p| p.validate())
    }

    pub fn is_zero(&self) -> bool {
        self.channels().iter().flatten().all(|p| p.coupling() == 0.0)
    }

    /// Only the identity channel is present.
    pub fn is_scalar(&self) -> bool {
        self.lorentz.is_none() && self.anomalous.is_none()
    }

    /// Every channel finite at the origin.
    pub fn bounded(&self) -> bool {
        self.channels().iter().flatten().all(|p| p.bounded_at_origin())
    }

    /// Homogeneous of degree −1 in every present channel (pure Coulomb).
    pub fn coulomb_homogeneous(&self) -> bool {
        let present: Vec<_> = self.channels().into_iter().flatten().collect();
        !present.is_empty() && present.iter().all(|p| p.homogeneity() == Some(-1))
    }

    /// Every coupling multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let f = |p: Option<RadialProfile>| p.map(|p| p.with_coupling(p.coupling() * s));
        Self { name: self.name.clone(), scalar: f(self.scalar), lorentz: f(self.lorentz), anomalous: f(self.anomalous) }
    }

    pub fn channel_values<T: Real>(&self, r: T) -> ChannelValues<T> {
        let v = |p: &Option<RadialProfile>| p.map_or(T::zero(), |p| p.value(r));
        let dv = |p: &Option<RadialProfile>| p.map_or(T::zero(), |p| p.derivative(r));
        ChannelValues {
            s: v(&self.scalar),
            b: v(&self.lorentz),
            a: v(&self.anomalous),
            ds: dv(&self.scalar),
            db: dv(&self.lorentz),
            da: dv(&self.anomalous),
        }
    }

    pub fn singularity(&self) -> String {
        describe(self, RadialProfile::singularity)
    }

    pub fn decay(&self) -> String {
        describe(self, RadialProfile::decay)
    }

    /// V(x).
    pub fn matrix<T: Real>(&self, rep: &CliffordRep<T>, x: &[T]) -> CMat<T> {
        let r = norm(x);
        let cv = self.channel_values(r);
        let mut m = rep.identity().scale_real(cv.s);
        m.add_scaled(cplx(cv.b, T::zero()), &rep.beta);
        if cv.a != T::zero() {
            m.add_scaled(cplx(cv.a, T::zero()), &anomalous_unit(rep, x));
        }
        m
    }

    /// ∂_j V(x) for every j.
    pub fn gradient<T: Real>(&self, rep: &CliffordRep<T>, x: &[T]) -> Vec<CMat<T>> {
        let r = norm(x);
        let cv = self.channel_values(r);
        let xh: Vec<T> = x.iter().map(|&v| v / r).collect();
        let a_unit = anomalous_unit(rep, x);
        let radial = self.radial_matrix(rep, &cv, &a_unit);
        let alpha_x = rep.alpha_dot(&xh);
        (0..rep.d)
            .map(|j| {
                let mut m = radial.scale_real(xh[j]);
                if cv.a != T::zero() {
                    // ∂_j A = −i(α_j − x̂_j α·x̂)β / r
                    let tang = &rep.alphas[j] - &alpha_x.scale_real(xh[j]);
                    let da = (&tang * &rep.beta).scale(cplx(T::zero(), -cv.a / r));
                    m = &m + &da;
                }
                m
            })
            .collect()
    }

    fn radial_matrix<T: Real>(&self, rep: &CliffordRep<T>, cv: &ChannelValues<T>, a_unit: &CMat<T>) -> CMat<T> {
        let mut m = rep.identity().scale_real(cv.ds);
        m.add_scaled(cplx(cv.db, T::zero()), &rep.beta);
        m.add_scaled(cplx(cv.da, T::zero()), a_unit);
        m
    }

    /// ∂_r V(x).
    pub fn radial_derivative<T: Real>(&self, rep: &CliffordRep<T>, x: &[T]) -> CMat<T> {
        let cv = self.channel_values(norm(x));
        self.radial_matrix(rep, &cv, &anomalous_unit(rep, x))
    }

    /// (x·∇)V = r ∂_r V.
    pub fn x_dot_grad<T: Real>(&self, rep: &CliffordRep<T>, x: &[T]) -> CMat<T> {
        self.radial_derivative(rep, x).scale_real(norm(x))
    }

    /// (α·∇)V = Σ_j α_j ∂_j V.
    pub fn alpha_dot_grad<T: Real>(&self, rep: &CliffordRep<T>, x: &[T]) -> CMat<T> {
        let grads = self.gradient(rep, x);
        let mut out = CMat::zeros(rep.n_spin);
        for (a, g) in rep.alphas.iter().zip(&grads) {
            out = &out + &(a * g);
        }
        out
    }

    /// [α_j, V] = 2b α_jβ − 2i a x̂_j β.
    pub fn comm_alpha<T: Real>(&self, rep: &CliffordRep<T>, x: &[T], j: usize) -> CMat<T> {
        let r = norm(x);
        let cv = self.channel_values(r);
        let two = T::lit(2.0);
        let mut m = (&rep.alphas[j] * &rep.beta).scale_real(two * cv.b);
        m.add_scaled(cplx(T::zero(), -two * cv.a * x[j] / r), &rep.beta);
        m
    }

    /// [β, V] = 2i a (α·x̂).
    pub fn comm_beta<T: Real>(&self, rep: &CliffordRep<T>, x: &[T]) -> CMat<T> {
        let r = norm(x);
        let cv = self.channel_values(r);
        let xh: Vec<T> = x.iter().map(|&v| v / r).collect();
        rep.alpha_dot(&xh).scale(cplx(T::zero(), T::lit(2.0) * cv.a))
    }

    /// {V, β} = 2sβ + 2b I.
    pub fn anticomm_beta<T: Real>(&self, rep: &CliffordRep<T>, x: &[T]) -> CMat<T> {
        let cv = self.channel_values(norm(x));
        let two = T::lit(2.0);
        let mut m = rep.beta.scale_real(two * cv.s);
        m.add_scaled(cplx(two * cv.b, T::zero()), &rep.identity());
        m
    }

    /// (x·∇){V, β} = 2r(s′β + b′I).
    pub fn x_grad_anticomm_beta<T: Real>(&self, rep: &CliffordRep<T>, x: &[T]) -> CMat<T> {
        let r = norm(x);
        let cv = self.channel_values(r);
        let two = T::lit(2.0);
        let mut m = rep.beta.scale_real(two * r * cv.ds);
        m.add_scaled(cplx(two * r * cv.db, T::zero()), &rep.identity());
        m
    }
}

fn describe(p: &PotentialSpec, f: fn(&RadialProfile) -> &'static str) -> String {
    let names = ["scalar", "lorentz", "anomalous"];
    let parts: Vec<String> = p
        .channels()
        .iter()
        .zip(names)
        .filter_map(|(c, n)| c.as_ref().map(|c| format!("{n}: {}", f(c))))
        .collect();
    if parts.is_empty() {
        "none".into()
    } else {
        parts.join("; ")
    }
}

/// A(x̂) = −i(α·x̂)β.
pub fn anomalous_unit<T: Real>(rep: &CliffordRep<T>, x: &[T]) -> CMat<T> {
    let r = norm(x);
    let xh: Vec<T> = x.iter().map(|&v| v / r).collect();
    (&rep.alpha_dot(&xh) * &rep.beta).scale(cplx(T::zero(), -T::one()))
}

/// Representative entries with default couplings.
pub fn catalog() -> Vec<PotentialSpec> {
    vec![
        PotentialSpec::zero(),
        PotentialSpec::electrostatic(0.2),
        PotentialSpec::lorentz_scalar(0.2),
        PotentialSpec::anomalous_magnetic(0.1),
        PotentialSpec::smooth_electrostatic(0.05, 0.25),
        PotentialSpec::smooth_lorentz_scalar(0.05, 0.25),
        PotentialSpec::smooth_anomalous_magnetic(0.02, 0.5),
        PotentialSpec::gaussian_well(2.0, 1.5),
    ]
}

/// V sampled on a grid, stored per channel.
#[derive(Clone, Debug)]
pub struct PotentialField<T: Real> {
    rep: CliffordRep<T>,
    s: Option<Vec<T>>,
    b: Option<Vec<T>>,
    a: Option<Vec<T>>,
    unit: Option<Vec<T>>,
}

impl<T: Real> PotentialField<T> {
    pub fn new(spec: &PotentialSpec, grid: &Grid<T>, rep: &CliffordRep<T>) -> Result<Self> {
        spec.validate()?;
        if rep.d != grid.d() {
            return Err(Error::Dimension(format!("representation d={} on a d={} grid", rep.d, grid.d())));
        }
        if grid.has_node_at_origin() && !spec.bounded() {
            return Err(Error::NodeAtOrigin);
        }
        let radii = grid.radii();
        let sample = |p: &Option<RadialProfile>| p.map(|p| radii.iter().map(|&r| p.value(r)).collect::<Vec<T>>());
        let unit = spec.anomalous.map(|_| crate::grid::unit_vectors(grid));
        Ok(Self { rep: rep.clone(), s: sample(&spec.scalar), b: sample(&spec.lorentz), a: sample(&spec.anomalous), unit })
    }

    pub fn is_scalar(&self) -> bool {
        self.b.is_none() && self.a.is_none()
    }

    pub fn rep(&self) -> &CliffordRep<T> {
        &self.rep
    }

    /// Largest pointwise operator norm |s| + sqrt(b² + a²) (exact for this class).
    pub fn sup_norm(&self) -> T {
        let n = self.s.as_ref().or(self.b.as_ref()).or(self.a.as_ref()).map_or(0, |v| v.len());
        let get = |v: &Option<Vec<T>>, i: usize| v.as_ref().map_or(T::zero(), |v| v[i]);
        (0..n).fold(T::zero(), |acc, i| {
            let (s, b, a) = (get(&self.s, i), get(&self.b, i), get(&self.a, i));
            acc.max(s.abs() + (b * b + a * a).sqrt())
        })
    }

    /// V f.
    pub fn apply(&self, f: &SpinorField<T>) -> SpinorField<T> {
        let mut out = SpinorField::zeros(f.grid(), f.ncomp());
        self.apply_into(f, &mut out);
        out
    }

    fn apply_into(&self, f: &SpinorField<T>, out: &mut SpinorField<T>) {
        let ns = f.ncomp();
        let npts = f.npts();
        let d = self.rep.d;
        let mut v = vec![czero(); ns];
        let mut bv = vec![czero(); ns];
        let mut av = vec![czero(); ns];
        let mut tmp = vec![czero(); ns];
        let mut res = vec![czero(); ns];
        for idx in 0..npts {
            f.spinor_at(idx, &mut v);
            res.iter_mut().for_each(|z| *z = czero());
            if let Some(s) = &self.s {
                for (o, &z) in res.iter_mut().zip(&v) {
                    *o += z * s[idx];
                }
            }
            if self.b.is_some() || self.a.is_some() {
                self.rep.beta.apply(&v, &mut bv);
                if let Some(b) = &self.b {
                    for (o, &z) in res.iter_mut().zip(&bv) {
                        *o += z * b[idx];
                    }
                }
                if let (Some(a), Some(unit)) = (&self.a, &self.unit) {
                    av.iter_mut().for_each(|z| *z = czero());
                    for j in 0..d {
                        self.rep.alphas[j].apply(&bv, &mut tmp);
                        let w = unit[idx * d + j];
                        for (o, &z) in av.iter_mut().zip(&tmp) {
                            *o += z * w;
                        }
                    }
                    // −i a (α·x̂)β v
                    for (o, &z) in res.iter_mut().zip(&av) {
                        *o += times_i(z) * (-a[idx]);
                    }
                }
            }
            out.set_spinor_at(idx, &res);
        }
    }

    /// Pointwise e^{−iθV(x)}: with V = sI + M and M² = (b² + a²)I,
    /// e^{−iθV} = e^{−iθs}(cos θρ − i sin θρ · M/ρ), ρ = (b² + a²)^{1/2}.
    pub fn exp_apply(&self, theta: T, f: &mut SpinorField<T>) {
        let npts = f.npts();
        let ns = f.ncomp();
        if self.is_scalar() {
            if let Some(s) = &self.s {
                for c in 0..ns {
                    for (z, &si) in f.component_mut(c).iter_mut().zip(s) {
                        let (sn, cs) = (theta * si).sin_cos();
                        *z = *z * cplx(cs, -sn);
                    }
                }
            }
            return;
        }
        let zero_s = PotentialField { rep: self.rep.clone(), s: None, b: self.b.clone(), a: self.a.clone(), unit: self.unit.clone() };
        let m_f = zero_s.apply(f);
        let get = |v: &Option<Vec<T>>, i: usize| v.as_ref().map_or(T::zero(), |v| v[i]);
        for c in 0..ns {
            let mc = m_f.component(c);
            let dst = f.component_mut(c);
            for idx in 0..npts {
                let (s, b, a) = (get(&self.s, idx), get(&self.b, idx), get(&self.a, idx));
                let rho = (b * b + a * a).sqrt();
                let (sn, cs) = (theta * rho).sin_cos();
                let sinc = if rho > T::zero() { sn / rho } else { theta };
                let rotated = dst[idx] * cs - times_i(mc[idx]) * sinc;
                let (ps, pc) = (theta * s).sin_cos();
                dst[idx] = rotated * cplx(pc, -ps);
            }
        }
    }

    /// Explicit pointwise matrix at node `idx` (for checks).
    pub fn matrix_at(&self, idx: usize) -> CMat<T> {
        let get = |v: &Option<Vec<T>>| v.as_ref().map_or(T::zero(), |v| v[idx]);
        let mut m = self.rep.identity().scale_real(get(&self.s));
        m.add_scaled(cplx(get(&self.b), T::zero()), &self.rep.beta);
        if let (Some(a), Some(unit)) = (&self.a, &self.unit) {
            let d = self.rep.d;
            let xh = &unit[idx * d..(idx + 1) * d];
            let au = (&self.rep.alpha_dot(xh) * &self.rep.beta).scale(cplx(T::zero(), -T::one()));
            m.add_scaled(cplx(a[idx], T::zero()), &au);
        }
        m
    }
}

/// Applies a pointwise matrix function: (M f)(x) = M(x) f(x).
pub fn apply_pointwise<T: Real>(f: &SpinorField<T>, m: impl Fn(&[T]) -> CMat<T>) -> SpinorField<T> {
    let ns = f.ncomp();
    let mut out = SpinorField::zeros(f.grid(), ns);
    let mut v = vec![czero(); ns];
    let mut w = vec![czero(); ns];
    f.grid().for_each_node(|idx, x| {
        f.spinor_at(idx, &mut v);
        m(x).apply(&v, &mut w);
        out.set_spinor_at(idx, &w);
    });
    out
}

/// Like [`apply_pointwise`] but with a scalar complex function.
pub fn apply_pointwise_scalar<T: Real>(f: &SpinorField<T>, s: impl Fn(&[T]) -> C<T>) -> SpinorField<T> {
    let vals: Vec<C<T>> = {
        let mut v = Vec::with_capacity(f.npts());
        f.grid().for_each_node(|_, x| v.push(s(x)));
        v
    };
    let mut out = f.clone();
    for c in 0..f.ncomp() {
        for (z, &w) in out.component_mut(c).iter_mut().zip(&vals) {
            *z = *z * w;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_dirac_matrices;

    fn points(d: usize) -> Vec<Vec<f64>> {
        let mut pts = Vec::new();
        for k in 0..12 {
            let t = k as f64 * 0.77 + 0.3;
            pts.push((0..d).map(|j| (t * (j as f64 + 1.3)).sin() * (0.2 + k as f64 * 0.4)).collect());
        }
        pts
    }

    fn all_potentials() -> Vec<PotentialSpec> {
        let mut v = catalog();
        v.push(PotentialSpec {
            name: "mixed".into(),
            scalar: Some(RadialProfile::Gaussian { g: 0.4, width: 0.8 }),
            lorentz: Some(RadialProfile::Smoothed { g: -0.3, eps: 0.4 }),
            anomalous: Some(RadialProfile::Coulomb { g: 0.25 }),
        });
        v
    }

    #[test]
    fn hermitian_everywhere() {
        for d in 1..=5 {
            let rep = build_dirac_matrices::<f64>(d).unwrap();
            for p in all_potentials() {
                for x in points(d) {
                    assert!(p.matrix(&rep, &x).hermitian_residual() <= 1e-12, "{} d={d}", p.name);
                }
            }
        }
    }

    #[test]
    fn registered_commutators_match_brute_force() {
        for d in 2..=5 {
            let rep = build_dirac_matrices::<f64>(d).unwrap();
            for p in all_potentials() {
                for x in points(d) {
                    let v = p.matrix(&rep, &x);
                    for j in 0..d {
                        let brute = CMat::commutator(&rep.alphas[j], &v);
                        assert!((&brute - &p.comm_alpha(&rep, &x, j)).sup_norm() <= 1e-12);
                    }
                    let cb = CMat::commutator(&rep.beta, &v);
                    assert!((&cb - &p.comm_beta(&rep, &x)).sup_norm() <= 1e-12);
                    let ab = CMat::anticommutator(&v, &rep.beta);
                    assert!((&ab - &p.anticomm_beta(&rep, &x)).sup_norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let d = 3;
        let rep = build_dirac_matrices::<f64>(d).unwrap();
        let h = 1e-5;
        for p in all_potentials() {
            for x in points(d) {
                let g = p.gradient(&rep, &x);
                for j in 0..d {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[j] += h;
                    xm[j] -= h;
                    let fd = (&p.matrix(&rep, &xp) - &p.matrix(&rep, &xm)).scale_real(0.5 / h);
                    let scale = 1.0 + g[j].sup_norm();
                    assert!((&fd - &g[j]).sup_norm() < 1e-6 * scale, "{} j={j}", p.name);
                }
                // (x·∇)V = Σ x_j ∂_j V
                let mut xg = CMat::zeros(rep.n_spin);
                for j in 0..d {
                    xg.add_scaled(cplx(x[j], 0.0), &g[j]);
                }
                assert!((&xg - &p.x_dot_grad(&rep, &x)).sup_norm() < 1e-12 * (1.0 + xg.sup_norm()));
            }
        }
    }

    #[test]
    fn anomalous_anticommutes_with_beta() {
        let rep = build_dirac_matrices::<f64>(3).unwrap();
        let p = PotentialSpec::anomalous_magnetic(0.7);
        for x in points(3) {
            assert!(p.anticomm_beta(&rep, &x).sup_norm() <= 1e-12);
        }
    }

    #[test]
    fn field_application_and_exponential_match_dense_matrices() {
        use crate::grid::GridSpec;
        let d = 3;
        let g = Grid::<f64>::new(GridSpec::new(d, 6, 2.0)).unwrap();
        let rep = build_dirac_matrices::<f64>(d).unwrap();
        let f = SpinorField::from_fn(&g, 4, |x, out| {
            for (c, z) in out.iter_mut().enumerate() {
                *z = cplx((x[0] + c as f64).sin(), (x[1] * x[2] - c as f64).cos());
            }
        });
        for p in all_potentials() {
            let pf = PotentialField::new(&p, &g, &rep).unwrap();
            let direct = apply_pointwise(&f, |x| p.matrix(&rep, x));
            assert!(pf.apply(&f).max_abs_diff(&direct) < 1e-12);
            let mut e = f.clone();
            pf.exp_apply(0.37, &mut e);
            let mut worst: f64 = 0.0;
            let mut v = vec![czero(); 4];
            let mut w = vec![czero(); 4];
            for idx in 0..g.npts() {
                let m = pf.matrix_at(idx).exp_i_hermitian(0.37).unwrap();
                f.spinor_at(idx, &mut v);
                m.apply(&v, &mut w);
                for c in 0..4 {
                    worst = worst.max((w[c] - e.component(c)[idx]).norm());
                }
            }
            assert!(worst < 1e-12, "{}: {worst}", p.name);
        }
    }

    #[test]
    fn json_round_trip() {
        for p in all_potentials() {
            let s = serde_json::to_string(&p).unwrap();
            assert_eq!(serde_json::from_str::<PotentialSpec>(&s).unwrap(), p);
        }
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"name":"x","bogus":1}"#).is_err());
    }
}
