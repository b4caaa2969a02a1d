//! Exact free propagator and Strang splitting.

use std::sync::Arc;

use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::grid::{Grid, SpinorField};
use crate::matrix::CMat;
use crate::operators::{check_rep, DiracSymbol};
use crate::potentials::{PotentialField, PotentialSpec};
use crate::scalar::{cplx, czero, Real};

/// Cached pieces of H = H_D + V for repeated stepping.
#[derive(Clone, Debug)]
pub struct Propagator<T: Real> {
    grid: Arc<Grid<T>>,
    mass: T,
    rep: CliffordRep<T>,
    symbol: DiracSymbol<T>,
    field: Option<PotentialField<T>>,
}

impl<T: Real> Propagator<T> {
    pub fn new(grid: &Arc<Grid<T>>, mass: T, rep: &CliffordRep<T>, pot: Option<&PotentialSpec>) -> Result<Self> {
        if !(mass >= T::zero()) {
            return Err(Error::Parameter("mass must be nonnegative".into()));
        }
        if rep.d != grid.d() {
            return Err(Error::Dimension(format!("representation d={} on a d={} grid", rep.d, grid.d())));
        }
        let field = match pot {
            Some(p) if !p.is_zero() => Some(PotentialField::new(p, grid, rep)?),
            _ => None,
        };
        Ok(Self { grid: grid.clone(), mass, rep: rep.clone(), symbol: DiracSymbol::new(rep), field })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn rep(&self) -> &CliffordRep<T> {
        &self.rep
    }

    pub fn potential(&self) -> Option<&PotentialField<T>> {
        self.field.as_ref()
    }

    /// Largest |E_p| on the grid, √(max|k|² + m²).
    pub fn max_free_energy(&self) -> T {
        let k = self.grid.max_wavenumber();
        (T::from_usize_lossy(self.grid.d()) * k * k + self.mass * self.mass).sqrt()
    }

    pub fn apply_hd(&self, f: &SpinorField<T>) -> SpinorField<T> {
        let m = self.mass;
        self.symbol.map_modes(f, |s, k, v, w| s.apply(k, m, v, w))
    }

    pub fn apply_v(&self, f: &SpinorField<T>) -> SpinorField<T> {
        match &self.field {
            Some(p) => p.apply(f),
            None => SpinorField::zeros(f.grid(), f.ncomp()),
        }
    }

    /// (H_D + V) f.
    pub fn apply_h(&self, f: &SpinorField<T>) -> SpinorField<T> {
        let mut out = self.apply_hd(f);
        if let Some(p) = &self.field {
            out.axpy(cplx(T::one(), T::zero()), &p.apply(f));
        }
        out
    }

    /// e^{−i dt H_D}: cos(dt E_p) − i sin(dt E_p)(α·p + mβ)/E_p at every mode.
    pub fn free_step(&self, f: &SpinorField<T>, dt: T) -> SpinorField<T> {
        let m = self.mass;
        self.symbol.map_modes(f, |s, k, v, w| {
            let e2 = k.iter().fold(m * m, |a, &x| a + x * x);
            if e2 == T::zero() {
                w.copy_from_slice(v);
                return;
            }
            let e = e2.sqrt();
            let (sn, cs) = (dt * e).sin_cos();
            s.apply(k, m, v, w);
            let c = cplx(T::zero(), -sn / e);
            for (wi, &vi) in w.iter_mut().zip(v) {
                *wi = vi * cs + *wi * c;
            }
        })
    }

    /// e^{−i dt V/2} e^{−i dt H_D} e^{−i dt V/2}.
    pub fn step(&self, f: &SpinorField<T>, dt: T) -> SpinorField<T> {
        match &self.field {
            None => self.free_step(f, dt),
            Some(p) => {
                let half = dt * T::lit(0.5);
                let mut g = f.clone();
                p.exp_apply(half, &mut g);
                let mut g = self.free_step(&g, dt);
                p.exp_apply(half, &mut g);
                g
            }
        }
    }
}

/// One exact free step.
pub fn free_propagator_step<T: Real>(f: &SpinorField<T>, dt: T, m: T, rep: &CliffordRep<T>) -> Result<SpinorField<T>> {
    check_rep(f, rep)?;
    Ok(Propagator::new(f.grid(), m, rep, None)?.free_step(f, dt))
}

/// One Strang step with a catalog potential (closed-form pointwise exponential).
pub fn strang_step<T: Real>(
    f: &SpinorField<T>,
    dt: T,
    m: T,
    rep: &CliffordRep<T>,
    pot: &PotentialSpec,
) -> Result<SpinorField<T>> {
    check_rep(f, rep)?;
    Ok(Propagator::new(f.grid(), m, rep, Some(pot))?.step(f, dt))
}

/// One Strang step with an arbitrary pointwise matrix potential, exponentiated
/// by eigendecomposition at every node. Rejects non-Hermitian matrices.
pub fn strang_step_matrices<T: Real>(
    f: &SpinorField<T>,
    dt: T,
    m: T,
    rep: &CliffordRep<T>,
    v: impl Fn(&[T]) -> CMat<T>,
) -> Result<SpinorField<T>> {
    check_rep(f, rep)?;
    let grid = f.grid().clone();
    let ns = f.ncomp();
    let mut half = Vec::with_capacity(grid.npts());
    let mut err = None;
    grid.for_each_node(|_, x| {
        if err.is_none() {
            match v(x).exp_i_hermitian(dt * T::lit(0.5)) {
                Ok(e) => half.push(e),
                Err(e) => err = Some(e),
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let apply = |g: &SpinorField<T>| {
        let mut out = SpinorField::zeros(&grid, ns);
        let mut a = vec![czero(); ns];
        let mut b = vec![czero(); ns];
        for (idx, e) in half.iter().enumerate() {
            g.spinor_at(idx, &mut a);
            e.apply(&a, &mut b);
            out.set_spinor_at(idx, &b);
        }
        out
    };
    let prop = Propagator::new(&grid, m, rep, None)?;
    Ok(apply(&prop.free_step(&apply(f), dt)))
}
