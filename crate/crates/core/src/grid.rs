//! Periodic spectral grid on [−ℓ, ℓ)^d and spinor fields living on it.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{czero, times_i, Real, C};

fn default_offset() -> bool {
    true
}

/// Grid parameters. Nodes are x_k = −ℓ + (k + o)·2ℓ/n with o = 1/2 when
/// `origin_offset` is set, so no node sits at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub d: usize,
    pub n: usize,
    pub half_length: f64,
    #[serde(default = "default_offset")]
    pub origin_offset: bool,
}

impl GridSpec {
    pub fn new(d: usize, n: usize, half_length: f64) -> Self {
        Self { d, n, half_length, origin_offset: true }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Dimension("grid dimension must be at least 1".into()));
        }
        if self.n < 2 || self.n % 2 != 0 {
            return Err(Error::Parameter(format!("points per axis must be even and ≥ 2, got {}", self.n)));
        }
        if !(self.half_length.is_finite() && self.half_length > 0.0) {
            return Err(Error::Parameter(format!("half_length must be positive, got {}", self.half_length)));
        }
        let total = (self.n as f64).powi(self.d as i32);
        if total > u32::MAX as f64 {
            return Err(Error::Parameter(format!("{total} nodes exceed the supported grid size")));
        }
        Ok(())
    }

    pub fn npts(&self) -> usize {
        self.n.pow(self.d as u32)
    }
}

/// Node indices sorted by distance from the origin.
pub struct RadialIndex<T> {
    pub order: Vec<u32>,
    pub radii: Vec<T>,
}

/// Discretization data with cached FFT plans.
pub struct Grid<T: Real> {
    spec: GridSpec,
    h: T,
    dv: T,
    half_length: T,
    coords: Vec<T>,
    wavenumbers: Vec<T>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    radial: OnceLock<RadialIndex<T>>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl<T: Real> Grid<T> {
    pub fn new(spec: GridSpec) -> Result<Arc<Self>> {
        spec.validate()?;
        let n = spec.n;
        let half_length = T::lit(spec.half_length);
        let h = half_length * T::lit(2.0) / T::from_usize_lossy(n);
        let offset = if spec.origin_offset { T::lit(0.5) } else { T::zero() };
        let coords = (0..n).map(|k| -half_length + (T::from_usize_lossy(k) + offset) * h).collect();
        let scale = T::PI() / half_length;
        let wavenumbers = (0..n)
            .map(|k| {
                let f = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                T::lit(f) * scale
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let dv = h.powi(spec.d as i32);
        Ok(Arc::new(Self { spec, h, dv, half_length, coords, wavenumbers, fwd, inv, radial: OnceLock::new() }))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn d(&self) -> usize {
        self.spec.d
    }
    pub fn n(&self) -> usize {
        self.spec.n
    }
    pub fn npts(&self) -> usize {
        self.spec.npts()
    }
    /// Cell width 2ℓ/n.
    pub fn h(&self) -> T {
        self.h
    }
    /// Cell volume h^d.
    pub fn dv(&self) -> T {
        self.dv
    }
    pub fn half_length(&self) -> T {
        self.half_length
    }
    pub fn coords(&self) -> &[T] {
        &self.coords
    }
    pub fn wavenumbers(&self) -> &[T] {
        &self.wavenumbers
    }

    pub fn has_node_at_origin(&self) -> bool {
        !self.spec.origin_offset
    }

    /// Largest |k_j| on the dual lattice.
    pub fn max_wavenumber(&self) -> T {
        T::from_usize_lossy(self.spec.n / 2) * T::PI() / self.half_length
    }

    /// Coordinates of the node with flat index `idx` (last axis fastest).
    pub fn node(&self, mut idx: usize, out: &mut [T]) {
        let n = self.spec.n;
        for j in (0..self.spec.d).rev() {
            out[j] = self.coords[idx % n];
            idx /= n;
        }
    }

    pub fn radius(&self, idx: usize) -> T {
        let n = self.spec.n;
        let mut idx = idx;
        let mut r2 = T::zero();
        for _ in 0..self.spec.d {
            let x = self.coords[idx % n];
            r2 += x * x;
            idx /= n;
        }
        r2.sqrt()
    }

    pub fn min_node_radius(&self) -> T {
        let m = self.coords.iter().fold(T::infinity(), |a, &x| a.min(x.abs()));
        m * T::from_usize_lossy(self.spec.d).sqrt()
    }

    /// Visits every node in flat order with its coordinates.
    pub fn for_each_node(&self, mut f: impl FnMut(usize, &[T])) {
        walk(self.spec.d, self.spec.n, &self.coords, &mut f);
    }

    /// Visits every Fourier mode in flat order with its wavevector.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, &[T])) {
        walk(self.spec.d, self.spec.n, &self.wavenumbers, &mut f);
    }

    /// Samples a real function at every node.
    pub fn sample(&self, f: impl Fn(&[T]) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.npts());
        self.for_each_node(|_, x| out.push(f(x)));
        out
    }

    pub fn radii(&self) -> Vec<T> {
        self.sample(|x| norm(x))
    }

    pub fn radial_index(&self) -> &RadialIndex<T> {
        self.radial.get_or_init(|| {
            let radii = self.radii();
            let mut order: Vec<u32> = (0..radii.len() as u32).collect();
            order.sort_by(|&a, &b| radii[a as usize].partial_cmp(&radii[b as usize]).unwrap());
            let sorted = order.iter().map(|&i| radii[i as usize]).collect();
            RadialIndex { order, radii: sorted }
        })
    }

    /// Unnormalized forward DFT of one scalar component, in place.
    pub fn fft_forward(&self, data: &mut [C<T>]) {
        self.transform(data, &self.fwd);
    }

    /// Inverse DFT including the 1/n^d normalization.
    pub fn fft_inverse(&self, data: &mut [C<T>]) {
        self.transform(data, &self.inv);
        let s = T::one() / T::from_usize_lossy(self.npts());
        for z in data.iter_mut() {
            *z = *z * s;
        }
    }

    fn transform(&self, data: &mut [C<T>], plan: &Arc<dyn Fft<T>>) {
        let n = self.spec.n;
        let d = self.spec.d;
        assert_eq!(data.len(), self.npts(), "component length does not match grid");
        let mut scratch = vec![czero(); plan.get_inplace_scratch_len()];
        let mut buf: Vec<C<T>> = Vec::new();
        for axis in 0..d {
            let stride = n.pow((d - 1 - axis) as u32);
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = n * stride;
            buf.resize(block, czero());
            for chunk in data.chunks_mut(block) {
                for k in 0..n {
                    for s in 0..stride {
                        buf[s * n + k] = chunk[k * stride + s];
                    }
                }
                plan.process_with_scratch(&mut buf, &mut scratch);
                for k in 0..n {
                    for s in 0..stride {
                        chunk[k * stride + s] = buf[s * n + k];
                    }
                }
            }
        }
    }

    /// Surface measure of the sphere of radius r in ℝ^d.
    pub fn sphere_area(&self, r: T) -> T {
        sphere_area(self.spec.d, r)
    }
}

fn walk<T: Real>(d: usize, n: usize, axis: &[T], f: &mut impl FnMut(usize, &[T])) {
    let mut digits = vec![0usize; d];
    let mut x = vec![axis[0]; d];
    let total = n.pow(d as u32);
    for idx in 0..total {
        f(idx, &x);
        let mut j = d;
        while j > 0 {
            j -= 1;
            digits[j] += 1;
            if digits[j] < n {
                x[j] = axis[digits[j]];
                break;
            }
            digits[j] = 0;
            x[j] = axis[0];
        }
    }
}

#[inline]
pub fn norm<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |a, &v| a + v * v).sqrt()
}

/// |S^{d−1}| r^{d−1}.
pub fn sphere_area<T: Real>(d: usize, r: T) -> T {
    // 2π^{d/2}/Γ(d/2) via Γ(1/2) = √π, Γ(1) = 1 and Γ(z+1) = zΓ(z).
    let (mut gamma, mut z) = if d % 2 == 0 { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while z < d as f64 / 2.0 - 1e-9 {
        gamma *= z;
        z += 1.0;
    }
    let c = 2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma;
    T::lit(c) * r.powi(d as i32 - 1)
}

/// N-component complex field stored component-major.
#[derive(Clone)]
pub struct SpinorField<T: Real> {
    grid: Arc<Grid<T>>,
    ncomp: usize,
    data: Vec<C<T>>,
}

impl<T: Real> fmt::Debug for SpinorField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpinorField").field("grid", self.grid.spec()).field("ncomp", &self.ncomp).finish()
    }
}

impl<T: Real> SpinorField<T> {
    pub fn zeros(grid: &Arc<Grid<T>>, ncomp: usize) -> Self {
        Self { grid: grid.clone(), ncomp, data: vec![czero(); ncomp * grid.npts()] }
    }

    pub fn from_data(grid: &Arc<Grid<T>>, ncomp: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != ncomp * grid.npts() {
            return Err(Error::Shape(format!(
                "{} values for {} components on {} nodes",
                data.len(),
                ncomp,
                grid.npts()
            )));
        }
        Ok(Self { grid: grid.clone(), ncomp, data })
    }

    /// Fills every node from `f(x, spinor_out)`.
    pub fn from_fn(grid: &Arc<Grid<T>>, ncomp: usize, mut f: impl FnMut(&[T], &mut [C<T>])) -> Self {
        let mut out = Self::zeros(grid, ncomp);
        let npts = grid.npts();
        let mut spinor = vec![czero(); ncomp];
        grid.for_each_node(|idx, x| {
            spinor.iter_mut().for_each(|z| *z = czero());
            f(x, &mut spinor);
            for (c, &z) in spinor.iter().enumerate() {
                out.data[c * npts + idx] = z;
            }
        });
        out
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }
    pub fn ncomp(&self) -> usize {
        self.ncomp
    }
    pub fn npts(&self) -> usize {
        self.grid.npts()
    }
    pub fn data(&self) -> &[C<T>] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [C<T>] {
        &mut self.data
    }
    pub fn into_data(self) -> Vec<C<T>> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[C<T>] {
        let n = self.npts();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [C<T>] {
        let n = self.npts();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn spinor_at(&self, idx: usize, out: &mut [C<T>]) {
        let n = self.npts();
        for (c, z) in out.iter_mut().enumerate().take(self.ncomp) {
            *z = self.data[c * n + idx];
        }
    }

    pub fn set_spinor_at(&mut self, idx: usize, v: &[C<T>]) {
        let n = self.npts();
        for (c, &z) in v.iter().enumerate().take(self.ncomp) {
            self.data[c * n + idx] = z;
        }
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.spec() != other.grid.spec() {
            return Err(Error::Shape("fields live on different grids".into()));
        }
        if self.ncomp != other.ncomp {
            return Err(Error::Shape(format!("{} vs {} components", self.ncomp, other.ncomp)));
        }
        Ok(())
    }

    /// ⟨self, other⟩ = Σ self·conj(other)·dV, linear in the first slot.
    pub fn inner(&self, other: &Self) -> C<T> {
        debug_assert!(self.same_shape(other).is_ok());
        let mut acc = czero();
        for (&a, &b) in self.data.iter().zip(&other.data) {
            acc += a * b.conj();
        }
        acc * self.grid.dv()
    }

    pub fn norm_sq(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>() * self.grid.dv()
    }

    pub fn l2_norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Pointwise Σ_c |f_c|².
    pub fn density(&self) -> Vec<T> {
        let n = self.npts();
        let mut out = vec![T::zero(); n];
        for c in 0..self.ncomp {
            for (o, z) in out.iter_mut().zip(self.component(c)) {
                *o += z.norm_sqr();
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `self += a·x`.
    pub fn axpy(&mut self, a: C<T>, x: &Self) {
        for (s, &v) in self.data.iter_mut().zip(&x.data) {
            *s += v * a;
        }
    }

    pub fn scaled(&self, a: C<T>) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z = *z * a);
        out
    }

    pub fn scale_in_place(&mut self, a: C<T>) {
        self.data.iter_mut().for_each(|z| *z = *z * a);
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, &b)| *a += b);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, &b)| *a -= b);
        out
    }

    pub fn times_i(&self) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z = times_i(*z));
        out
    }

    /// Pointwise product with a real node function (same for every component).
    pub fn mul_node_weights(&self, w: &[T]) -> Self {
        let mut out = self.clone();
        let n = self.npts();
        for c in 0..self.ncomp {
            for (z, &wi) in out.data[c * n..(c + 1) * n].iter_mut().zip(w) {
                *z = *z * wi;
            }
        }
        out
    }

    /// Pointwise product with a real function of position.
    pub fn mul_fn(&self, f: impl Fn(&[T]) -> T) -> Self {
        self.mul_node_weights(&self.grid.sample(f))
    }

    /// ∫ w·|f|² for node weights `w`.
    pub fn weighted_norm_sq(&self, w: &[T]) -> T {
        self.density().iter().zip(w).map(|(&a, &b)| a * b).sum::<T>() * self.grid.dv()
    }

    /// Momentum-space norm, (Σ|f̂|²·dV/n^d)^{1/2}.
    pub fn momentum_norm(&self) -> T {
        let mut acc = T::zero();
        for c in 0..self.ncomp {
            let mut buf = self.component(c).to_vec();
            self.grid.fft_forward(&mut buf);
            acc += buf.iter().map(|z| z.norm_sqr()).sum::<T>();
        }
        (acc * self.grid.dv() / T::from_usize_lossy(self.npts())).sqrt()
    }

    /// Translation by whole cells along each axis (periodic).
    pub fn roll(&self, shift: &[isize]) -> Self {
        let g = &self.grid;
        let (d, n) = (g.d(), g.n());
        let mut out = Self::zeros(g, self.ncomp);
        let npts = self.npts();
        for idx in 0..npts {
            let mut rem = idx;
            let mut target = 0usize;
            let mut mult = 1usize;
            for j in (0..d).rev() {
                let k = rem % n;
                rem /= n;
                let s = shift.get(j).copied().unwrap_or(0);
                let kk = (k as isize + s).rem_euclid(n as isize) as usize;
                target += kk * mult;
                mult *= n;
            }
            for c in 0..self.ncomp {
                out.data[c * npts + target] = self.data[c * npts + idx];
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).fold(T::zero(), |a, (&x, &y)| a.max((x - y).norm()))
    }
}

/// Spectral ∂_j of every component.
pub fn partial<T: Real>(f: &SpinorField<T>, j: usize) -> SpinorField<T> {
    let g = f.grid().clone();
    let mut out = f.clone();
    let k = axis_wavenumbers(&g, j);
    for c in 0..f.ncomp() {
        let comp = out.component_mut(c);
        g.fft_forward(comp);
        for (z, &kj) in comp.iter_mut().zip(&k) {
            *z = times_i(*z) * kj;
        }
        g.fft_inverse(comp);
    }
    out
}

/// k_j at every mode.
pub fn axis_wavenumbers<T: Real>(g: &Grid<T>, j: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(g.npts());
    g.for_each_mode(|_, k| out.push(k[j]));
    out
}

/// |k|² at every mode.
pub fn wavenumber_sq<T: Real>(g: &Grid<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(g.npts());
    g.for_each_mode(|_, k| out.push(k.iter().fold(T::zero(), |a, &v| a + v * v)));
    out
}

/// Spectral gradient (∂₁f, …, ∂_d f).
pub fn gradient<T: Real>(f: &SpinorField<T>) -> Vec<SpinorField<T>> {
    let g = f.grid().clone();
    let d = g.d();
    let ks: Vec<Vec<T>> = (0..d).map(|j| axis_wavenumbers(&g, j)).collect();
    let mut outs: Vec<SpinorField<T>> = (0..d).map(|_| SpinorField::zeros(&g, f.ncomp())).collect();
    for c in 0..f.ncomp() {
        let mut hat = f.component(c).to_vec();
        g.fft_forward(&mut hat);
        for j in 0..d {
            let dst = outs[j].component_mut(c);
            for ((o, &z), &kj) in dst.iter_mut().zip(&hat).zip(&ks[j]) {
                *o = times_i(z) * kj;
            }
            g.fft_inverse(dst);
        }
    }
    outs
}

/// Pointwise Σ_j |∂_j f|², summed over components.
pub fn gradient_density<T: Real>(f: &SpinorField<T>) -> Vec<T> {
    radial_tangential_parts(f, false, false).0.grad
}

/// Pointwise |∂_r f|², |∂_τ f|² = |∇f|² − |∂_r f|² (clamped at 0) and |∇f|².
#[derive(Clone, Debug)]
pub struct RadialSplit<T> {
    pub radial: Vec<T>,
    pub tangential: Vec<T>,
    pub grad: Vec<T>,
}

pub fn radial_tangential_split<T: Real>(f: &SpinorField<T>) -> Result<RadialSplit<T>> {
    if f.grid().has_node_at_origin() {
        return Err(Error::NodeAtOrigin);
    }
    Ok(radial_tangential_parts(f, true, false).0)
}

/// The split together with the field ∂_r f, sharing one set of transforms.
pub fn radial_split_with_derivative<T: Real>(f: &SpinorField<T>) -> Result<(RadialSplit<T>, SpinorField<T>)> {
    if f.grid().has_node_at_origin() {
        return Err(Error::NodeAtOrigin);
    }
    let (split, dr) = radial_tangential_parts(f, true, true);
    Ok((split, dr.expect("requested")))
}

fn radial_tangential_parts<T: Real>(
    f: &SpinorField<T>,
    with_radial: bool,
    keep_dr: bool,
) -> (RadialSplit<T>, Option<SpinorField<T>>) {
    let g = f.grid().clone();
    let (d, npts) = (g.d(), g.npts());
    let ks: Vec<Vec<T>> = (0..d).map(|j| axis_wavenumbers(&g, j)).collect();
    let mut grad = vec![T::zero(); npts];
    let mut radial = vec![T::zero(); if with_radial { npts } else { 0 }];
    let unit = if with_radial { unit_vectors(&g) } else { Vec::new() };
    let mut dr = vec![czero(); if with_radial { npts } else { 0 }];
    let mut kept = if keep_dr { Some(SpinorField::zeros(&g, f.ncomp())) } else { None };
    let mut tmp = vec![czero(); npts];
    for c in 0..f.ncomp() {
        let mut hat = f.component(c).to_vec();
        g.fft_forward(&mut hat);
        dr.iter_mut().for_each(|z| *z = czero());
        for j in 0..d {
            for ((o, &z), &kj) in tmp.iter_mut().zip(&hat).zip(&ks[j]) {
                *o = times_i(z) * kj;
            }
            g.fft_inverse(&mut tmp);
            for (acc, z) in grad.iter_mut().zip(&tmp) {
                *acc += z.norm_sqr();
            }
            if with_radial {
                for (idx, (o, &z)) in dr.iter_mut().zip(&tmp).enumerate() {
                    *o += z * unit[idx * d + j];
                }
            }
        }
        if with_radial {
            for (acc, z) in radial.iter_mut().zip(&dr) {
                *acc += z.norm_sqr();
            }
        }
        if let Some(k) = kept.as_mut() {
            k.component_mut(c).copy_from_slice(&dr);
        }
    }
    let tangential = if with_radial {
        grad.iter().zip(&radial).map(|(&a, &b)| (a - b).max(T::zero())).collect()
    } else {
        Vec::new()
    };
    (RadialSplit { radial, tangential, grad }, kept)
}

/// x/|x| at every node, flattened node-major (length npts·d).
pub fn unit_vectors<T: Real>(g: &Grid<T>) -> Vec<T> {
    let d = g.d();
    let mut out = vec![T::zero(); g.npts() * d];
    g.for_each_node(|idx, x| {
        let r = norm(x);
        if r > T::zero() {
            for j in 0..d {
                out[idx * d + j] = x[j] / r;
            }
        }
    });
    out
}

/// ∂_r f = (x/|x|)·∇f.
pub fn radial_derivative<T: Real>(f: &SpinorField<T>) -> Result<SpinorField<T>> {
    let g = f.grid().clone();
    if g.has_node_at_origin() {
        return Err(Error::NodeAtOrigin);
    }
    let d = g.d();
    let ks: Vec<Vec<T>> = (0..d).map(|j| axis_wavenumbers(&g, j)).collect();
    let unit = unit_vectors(&g);
    let mut out = SpinorField::zeros(&g, f.ncomp());
    let mut tmp = vec![czero(); g.npts()];
    for c in 0..f.ncomp() {
        let mut hat = f.component(c).to_vec();
        g.fft_forward(&mut hat);
        let dst = out.component_mut(c);
        for j in 0..d {
            for ((o, &z), &kj) in tmp.iter_mut().zip(&hat).zip(&ks[j]) {
                *o = times_i(z) * kj;
            }
            g.fft_inverse(&mut tmp);
            for (idx, (o, &z)) in dst.iter_mut().zip(&tmp).enumerate() {
                *o += z * unit[idx * d + j];
            }
        }
    }
    Ok(out)
}
