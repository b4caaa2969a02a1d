//! Spectral realizations of H₀, H_D, iG, iG_φ, L, L_φ and commutators with V.
//!
//! All operators are bounded on the grid; the continuum domain questions have
//! no discrete analogue.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::grid::{partial, radial_derivative, wavenumber_sq, Grid, SpinorField};
use crate::matrix::CMat;
use crate::multipliers::MultiplierProfile;
use crate::potentials::{apply_pointwise, PotentialField, PotentialSpec};
use crate::scalar::{cplx, czero, Real, C};

/// Row-sparse copy of a small matrix; Dirac matrices have one entry per row.
#[derive(Clone, Debug)]
pub(crate) struct SparseRows<T> {
    rows: Vec<Vec<(usize, C<T>)>>,
}

impl<T: Real> SparseRows<T> {
    pub(crate) fn new(m: &CMat<T>) -> Self {
        let n = m.dim();
        let rows = (0..n)
            .map(|i| (0..n).filter_map(|j| Some((j, m.get(i, j))).filter(|(_, z)| *z != czero())).collect())
            .collect();
        Self { rows }
    }

    /// out += s·M v
    #[inline]
    pub(crate) fn apply_add(&self, s: T, v: &[C<T>], out: &mut [C<T>]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            for &(j, z) in row {
                *o += z * v[j] * s;
            }
        }
    }
}

/// Fourier symbol α·k + mβ of H_D.
#[derive(Clone, Debug)]
pub(crate) struct DiracSymbol<T> {
    alphas: Vec<SparseRows<T>>,
    beta: SparseRows<T>,
    ns: usize,
}

impl<T: Real> DiracSymbol<T> {
    pub(crate) fn new(rep: &CliffordRep<T>) -> Self {
        Self { alphas: rep.alphas.iter().map(SparseRows::new).collect(), beta: SparseRows::new(&rep.beta), ns: rep.n_spin }
    }

    #[inline]
    pub(crate) fn apply(&self, k: &[T], m: T, v: &[C<T>], out: &mut [C<T>]) {
        out.iter_mut().for_each(|z| *z = czero());
        for (a, &kj) in self.alphas.iter().zip(k) {
            if kj != T::zero() {
                a.apply_add(kj, v, out);
            }
        }
        if m != T::zero() {
            self.beta.apply_add(m, v, out);
        }
    }

    /// Applies a per-mode spinor map to every Fourier coefficient of `f`.
    pub(crate) fn map_modes(
        &self,
        f: &SpinorField<T>,
        mut op: impl FnMut(&Self, &[T], &[C<T>], &mut [C<T>]),
    ) -> SpinorField<T> {
        let g = f.grid().clone();
        let ns = self.ns;
        let npts = g.npts();
        let mut data = f.data().to_vec();
        for c in 0..ns {
            g.fft_forward(&mut data[c * npts..(c + 1) * npts]);
        }
        let mut v = vec![czero(); ns];
        let mut w = vec![czero(); ns];
        g.for_each_mode(|idx, k| {
            for c in 0..ns {
                v[c] = data[c * npts + idx];
            }
            op(self, k, &v, &mut w);
            for c in 0..ns {
                data[c * npts + idx] = w[c];
            }
        });
        for c in 0..ns {
            g.fft_inverse(&mut data[c * npts..(c + 1) * npts]);
        }
        SpinorField::from_data(&g, ns, data).expect("shape preserved")
    }
}

pub(crate) fn check_rep<T: Real>(f: &SpinorField<T>, rep: &CliffordRep<T>) -> Result<()> {
    if rep.d != f.grid().d() {
        return Err(Error::Dimension(format!("representation d={} on a d={} grid", rep.d, f.grid().d())));
    }
    if rep.n_spin != f.ncomp() {
        return Err(Error::Shape(format!("field has {} components, representation needs {}", f.ncomp(), rep.n_spin)));
    }
    Ok(())
}

/// H₀ = −Δ: multiplication by |k|².
pub fn apply_h0<T: Real>(f: &SpinorField<T>) -> SpinorField<T> {
    let g = f.grid().clone();
    let k2 = wavenumber_sq(&g);
    let mut out = f.clone();
    for c in 0..f.ncomp() {
        let comp = out.component_mut(c);
        g.fft_forward(comp);
        for (z, &k) in comp.iter_mut().zip(&k2) {
            *z = *z * k;
        }
        g.fft_inverse(comp);
    }
    out
}

/// H_D = α·p + mβ with p = −i∇.
pub fn apply_hd<T: Real>(f: &SpinorField<T>, m: T, rep: &CliffordRep<T>) -> Result<SpinorField<T>> {
    check_rep(f, rep)?;
    Ok(DiracSymbol::new(rep).map_modes(f, |s, k, v, w| s.apply(k, m, v, w)))
}

/// iG = ½Σ_j (x_j∂_j + ∂_j x_j), which equals d/2 + x·∇.
pub fn apply_ig<T: Real>(f: &SpinorField<T>) -> SpinorField<T> {
    let g = f.grid().clone();
    let mut out = SpinorField::zeros(&g, f.ncomp());
    let half = cplx(T::lit(0.5), T::zero());
    for j in 0..g.d() {
        let xj = coordinate(&g, j);
        let a = partial(f, j).mul_node_weights(&xj);
        let b = partial(&f.mul_node_weights(&xj), j);
        out.axpy(half, &a);
        out.axpy(half, &b);
    }
    out
}

/// d/2 + x·∇ evaluated without symmetrization.
pub fn apply_ig_pointwise<T: Real>(f: &SpinorField<T>) -> SpinorField<T> {
    let g = f.grid().clone();
    let mut out = f.scaled(cplx(T::from_usize_lossy(g.d()) * T::lit(0.5), T::zero()));
    for j in 0..g.d() {
        let xj = coordinate(&g, j);
        out.axpy(cone_t(), &partial(f, j).mul_node_weights(&xj));
    }
    out
}

fn cone_t<T: Real>() -> C<T> {
    cplx(T::one(), T::zero())
}

fn coordinate<T: Real>(g: &Grid<T>, j: usize) -> Vec<T> {
    g.sample(|x| x[j])
}

/// iG_φ = ¼Δφ + ½φ′∂_r, i.e. −¼[H₀, φ].
pub fn apply_igphi<T: Real>(f: &SpinorField<T>, profile: &MultiplierProfile) -> Result<SpinorField<T>> {
    let g = f.grid().clone();
    if profile.d != g.d() {
        return Err(Error::Dimension(format!("profile d={} on a d={} grid", profile.d, g.d())));
    }
    let dr = radial_derivative(f)?;
    Ok(igphi_from_radial(f, &dr, profile))
}

/// iG_φ f given ∂_r f.
pub(crate) fn igphi_from_radial<T: Real>(f: &SpinorField<T>, dr: &SpinorField<T>, profile: &MultiplierProfile) -> SpinorField<T> {
    let radii = f.grid().radii();
    let quarter = T::lit(0.25);
    let half = T::lit(0.5);
    let w0: Vec<T> = radii.iter().map(|&r| quarter * profile.laplacian(r)).collect();
    let w1: Vec<T> = radii.iter().map(|&r| half * profile.phi_prime(r)).collect();
    let mut out = f.mul_node_weights(&w0);
    out.axpy(cone_t(), &dr.mul_node_weights(&w1));
    out
}

/// L = {H_D, iG}.
pub fn apply_l<T: Real>(f: &SpinorField<T>, m: T, rep: &CliffordRep<T>) -> Result<SpinorField<T>> {
    let a = apply_hd(&apply_ig(f), m, rep)?;
    let b = apply_ig(&apply_hd(f, m, rep)?);
    Ok(a.add(&b))
}

/// L_φ = {H_D, iG_φ}.
pub fn apply_lphi<T: Real>(
    f: &SpinorField<T>,
    m: T,
    rep: &CliffordRep<T>,
    profile: &MultiplierProfile,
) -> Result<SpinorField<T>> {
    let a = apply_hd(&apply_igphi(f, profile)?, m, rep)?;
    let b = apply_igphi(&apply_hd(f, m, rep)?, profile)?;
    Ok(a.add(&b))
}

/// V f.
pub fn apply_v<T: Real>(f: &SpinorField<T>, pot: &PotentialSpec, rep: &CliffordRep<T>) -> Result<SpinorField<T>> {
    check_rep(f, rep)?;
    Ok(PotentialField::new(pot, f.grid(), rep)?.apply(f))
}

/// [H_D, V] = −i(α·∇)V − iΣ_j[α_j, V]∂_j + m[β, V], from the analytic derivatives.
pub fn commutator_hd_v<T: Real>(
    f: &SpinorField<T>,
    pot: &PotentialSpec,
    m: T,
    rep: &CliffordRep<T>,
) -> Result<SpinorField<T>> {
    check_rep(f, rep)?;
    if f.grid().has_node_at_origin() {
        return Err(Error::NodeAtOrigin);
    }
    let mi = cplx(T::zero(), -T::one());
    let mut out = apply_pointwise(f, |x| {
        let mut a = pot.alpha_dot_grad(rep, x).scale(mi);
        if m != T::zero() {
            a.add_scaled(cplx(m, T::zero()), &pot.comm_beta(rep, x));
        }
        a
    });
    for j in 0..rep.d {
        let dj = partial(f, j);
        out.axpy(mi, &apply_pointwise(&dj, |x| pot.comm_alpha(rep, x, j)));
    }
    Ok(out)
}

/// [iG, V] = (x·∇)V.
pub fn commutator_ig_v<T: Real>(f: &SpinorField<T>, pot: &PotentialSpec, rep: &CliffordRep<T>) -> Result<SpinorField<T>> {
    check_rep(f, rep)?;
    if f.grid().has_node_at_origin() {
        return Err(Error::NodeAtOrigin);
    }
    Ok(apply_pointwise(f, |x| pot.x_dot_grad(rep, x)))
}

/// [iG_φ, V] = ½φ′ ∂_r V.
pub fn commutator_igphi_v<T: Real>(
    f: &SpinorField<T>,
    pot: &PotentialSpec,
    rep: &CliffordRep<T>,
    profile: &MultiplierProfile,
) -> Result<SpinorField<T>> {
    check_rep(f, rep)?;
    if f.grid().has_node_at_origin() {
        return Err(Error::NodeAtOrigin);
    }
    Ok(apply_pointwise(f, |x| {
        let r = crate::grid::norm(x);
        pot.radial_derivative(rep, x).scale_real(T::lit(0.5) * profile.phi_prime(r))
    }))
}

/// Whether ⟨Af, g⟩ = ⟨f, Ag⟩ or ⟨Af, g⟩ = −⟨f, Ag⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
}

impl Symmetry {
    fn compose(self, other: Self, anti: bool) -> Self {
        let same = self == other;
        match (same, anti) {
            (true, false) | (false, true) => Symmetry::Antisymmetric,
            _ => Symmetry::Symmetric,
        }
    }
}

pub type ScalarFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

#[derive(Clone)]
pub enum OperatorKind<T: Real> {
    Identity,
    H0,
    HD,
    V(PotentialSpec),
    IG,
    IGphi(MultiplierProfile),
    L,
    Lphi(MultiplierProfile),
    /// Multiplication by a real function.
    Multiplication(ScalarFn<T>),
    Commutator(Box<OperatorHandle<T>>, Box<OperatorHandle<T>>),
    Anticommutator(Box<OperatorHandle<T>>, Box<OperatorHandle<T>>),
}

/// An operator together with the mass and representation it needs.
#[derive(Clone)]
pub struct OperatorHandle<T: Real> {
    pub kind: OperatorKind<T>,
    pub mass: T,
    pub rep: Arc<CliffordRep<T>>,
}

impl<T: Real> std::fmt::Debug for OperatorHandle<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "OperatorHandle({}, m={})", self.name(), self.mass)
    }
}

impl<T: Real> OperatorHandle<T> {
    pub fn new(kind: OperatorKind<T>, mass: T, rep: Arc<CliffordRep<T>>) -> Result<Self> {
        if mass < T::zero() {
            return Err(Error::Parameter("mass must be nonnegative".into()));
        }
        Ok(Self { kind, mass, rep })
    }

    fn with(&self, kind: OperatorKind<T>) -> Self {
        Self { kind, mass: self.mass, rep: self.rep.clone() }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.with(OperatorKind::Commutator(Box::new(self.clone()), Box::new(other.clone())))
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        self.with(OperatorKind::Anticommutator(Box::new(self.clone()), Box::new(other.clone())))
    }

    pub fn name(&self) -> String {
        match &self.kind {
            OperatorKind::Identity => "I".into(),
            OperatorKind::H0 => "H0".into(),
            OperatorKind::HD => "HD".into(),
            OperatorKind::V(p) => format!("V[{}]", p.name),
            OperatorKind::IG => "iG".into(),
            OperatorKind::IGphi(_) => "iGphi".into(),
            OperatorKind::L => "L".into(),
            OperatorKind::Lphi(_) => "Lphi".into(),
            OperatorKind::Multiplication(_) => "mult".into(),
            OperatorKind::Commutator(a, b) => format!("[{}, {}]", a.name(), b.name()),
            OperatorKind::Anticommutator(a, b) => format!("{{{}, {}}}", a.name(), b.name()),
        }
    }

    pub fn symmetry(&self) -> Symmetry {
        match &self.kind {
            OperatorKind::Identity
            | OperatorKind::H0
            | OperatorKind::HD
            | OperatorKind::V(_)
            | OperatorKind::Multiplication(_) => Symmetry::Symmetric,
            OperatorKind::IG | OperatorKind::IGphi(_) | OperatorKind::L | OperatorKind::Lphi(_) => {
                Symmetry::Antisymmetric
            }
            OperatorKind::Commutator(a, b) => a.symmetry().compose(b.symmetry(), false),
            OperatorKind::Anticommutator(a, b) => a.symmetry().compose(b.symmetry(), true),
        }
    }

    pub fn apply(&self, f: &SpinorField<T>) -> Result<SpinorField<T>> {
        let (m, rep) = (self.mass, &*self.rep);
        match &self.kind {
            OperatorKind::Identity => Ok(f.clone()),
            OperatorKind::H0 => Ok(apply_h0(f)),
            OperatorKind::HD => apply_hd(f, m, rep),
            OperatorKind::V(p) => apply_v(f, p, rep),
            OperatorKind::IG => Ok(apply_ig(f)),
            OperatorKind::IGphi(p) => apply_igphi(f, p),
            OperatorKind::L => apply_l(f, m, rep),
            OperatorKind::Lphi(p) => apply_lphi(f, m, rep, p),
            OperatorKind::Multiplication(w) => Ok(f.mul_fn(|x| w(x))),
            OperatorKind::Commutator(a, b) => {
                let ab = a.apply(&b.apply(f)?)?;
                let ba = b.apply(&a.apply(f)?)?;
                Ok(ab.sub(&ba))
            }
            OperatorKind::Anticommutator(a, b) => {
                let ab = a.apply(&b.apply(f)?)?;
                let ba = b.apply(&a.apply(f)?)?;
                Ok(ab.add(&ba))
            }
        }
    }
}

/// ⟨f, A f⟩, linear in the first slot.
pub fn expectation<T: Real>(a: &OperatorHandle<T>, f: &SpinorField<T>) -> Result<C<T>> {
    Ok(f.inner(&a.apply(f)?))
}

/// Plane-wave spinor e^{ik·x}u at the dual-lattice mode with integer indices `modes`.
pub fn plane_wave<T: Real>(grid: &Arc<Grid<T>>, modes: &[i64], u: &[C<T>]) -> Result<SpinorField<T>> {
    let k = lattice_momentum(grid, modes)?;
    Ok(SpinorField::from_fn(grid, u.len(), |x, out| {
        let phase = x.iter().zip(&k).fold(T::zero(), |a, (&xi, &ki)| a + xi * ki);
        let (s, c) = phase.sin_cos();
        for (o, &ui) in out.iter_mut().zip(u) {
            *o = ui * cplx(c, s);
        }
    }))
}

/// Momentum of the dual-lattice mode with the given integer indices.
pub fn lattice_momentum<T: Real>(grid: &Grid<T>, modes: &[i64]) -> Result<Vec<T>> {
    if modes.len() != grid.d() {
        return Err(Error::Dimension(format!("{} mode indices for d={}", modes.len(), grid.d())));
    }
    let n = grid.n() as i64;
    let base = T::lit(std::f64::consts::PI) / grid.half_length();
    modes
        .iter()
        .map(|&q| {
            if q < -n / 2 || q >= n / 2 {
                Err(Error::Parameter(format!("mode index {q} outside [-n/2, n/2)")))
            } else {
                Ok(base * T::lit(q as f64))
            }
        })
        .collect()
}
