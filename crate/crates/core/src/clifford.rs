//! Dirac matrices α₁…α_d, β by recursive tensor doubling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CMat;
use crate::scalar::{cplx, Real, C};

/// A representation of the Clifford relations in spinor dimension `n_spin`.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordRep<T> {
    pub d: usize,
    pub n_spin: usize,
    pub alphas: Vec<CMat<T>>,
    pub beta: CMat<T>,
}

/// Spinor dimension 2^⌊(d+1)/2⌋.
pub fn spinor_dim(d: usize) -> usize {
    1usize << ((d + 1) / 2)
}

pub fn sigma1<T: Real>() -> CMat<T> {
    let (o, l) = (T::zero(), T::one());
    CMat::from_row_major(vec![cplx(o, o), cplx(l, o), cplx(l, o), cplx(o, o)]).unwrap()
}

pub fn sigma2<T: Real>() -> CMat<T> {
    let (o, l) = (T::zero(), T::one());
    CMat::from_row_major(vec![cplx(o, o), cplx(o, -l), cplx(o, l), cplx(o, o)]).unwrap()
}

pub fn sigma3<T: Real>() -> CMat<T> {
    let (o, l) = (T::zero(), T::one());
    CMat::from_row_major(vec![cplx(l, o), cplx(o, o), cplx(o, o), cplx(-l, o)]).unwrap()
}

/// Deterministic construction: d=1 gives (σ₁; σ₃), d=2 gives (σ₁, σ₂; σ₃),
/// and d → d+2 maps (α; β) to (σ₁⊗α_j, σ₁⊗β, σ₂⊗I; σ₃⊗I).
pub fn build_dirac_matrices<T: Real>(d: usize) -> Result<CliffordRep<T>> {
    if d == 0 {
        return Err(Error::Dimension("spatial dimension must be at least 1".into()));
    }
    let (mut alphas, mut beta, mut cur) = if d % 2 == 1 {
        (vec![sigma1()], sigma3(), 1)
    } else {
        (vec![sigma1(), sigma2()], sigma3(), 2)
    };
    while cur < d {
        let s1 = sigma1::<T>();
        let eye = CMat::identity(beta.dim());
        let mut next: Vec<CMat<T>> = alphas.iter().map(|a| s1.kron(a)).collect();
        next.push(s1.kron(&beta));
        next.push(sigma2::<T>().kron(&eye));
        beta = sigma3::<T>().kron(&eye);
        alphas = next;
        cur += 2;
    }
    let n_spin = beta.dim();
    debug_assert_eq!(n_spin, spinor_dim(d));
    Ok(CliffordRep { d, n_spin, alphas, beta })
}

impl<T: Real> CliffordRep<T> {
    /// `Σ_j v_j α_j`.
    pub fn alpha_dot(&self, v: &[T]) -> CMat<T> {
        let mut out = CMat::zeros(self.n_spin);
        for (a, &vj) in self.alphas.iter().zip(v) {
            out.add_scaled(cplx(vj, T::zero()), a);
        }
        out
    }

    pub fn identity(&self) -> CMat<T> {
        CMat::identity(self.n_spin)
    }

    pub fn to_json(&self) -> CliffordJson {
        CliffordJson {
            d: self.d,
            n_spin: self.n_spin,
            alphas: self.alphas.iter().map(matrix_to_json).collect(),
            beta: matrix_to_json(&self.beta),
        }
    }
}

/// Largest residual over {α_j,α_k} = 2δ_jk, {α_j,β} = 0, β² = I, Hermiticity
/// and the dimension count, in entrywise sup norm.
pub fn verify_clifford<T: Real>(rep: &CliffordRep<T>) -> T {
    let n = rep.n_spin;
    let eye = CMat::<T>::identity(n);
    let two = T::lit(2.0);
    let mut worst = T::zero();
    let mut consider = |v: T| {
        worst = if v.is_nan() { T::infinity() } else { worst.max(v) };
    };
    if rep.alphas.len() != rep.d || n != spinor_dim(rep.d) {
        consider(T::infinity());
    }
    if rep.alphas.iter().any(|a| a.dim() != n) || rep.beta.dim() != n {
        return T::infinity();
    }
    for (j, aj) in rep.alphas.iter().enumerate() {
        for (k, ak) in rep.alphas.iter().enumerate() {
            let target = if j == k { eye.scale_real(two) } else { CMat::zeros(n) };
            consider((&CMat::anticommutator(aj, ak) - &target).sup_norm());
        }
        consider(CMat::anticommutator(aj, &rep.beta).sup_norm());
        consider(aj.hermitian_residual());
    }
    consider((&(&rep.beta * &rep.beta) - &eye).sup_norm());
    consider(rep.beta.hermitian_residual());
    worst
}

/// `‖[T,{T,A}] − [T²,A]‖_sup`.
pub fn matrix_identity_check<T: Real>(t: &CMat<T>, a: &CMat<T>) -> Result<T> {
    if t.dim() != a.dim() {
        return Err(Error::Shape(format!("T is {0}×{0} but A is {1}×{1}", t.dim(), a.dim())));
    }
    let lhs = CMat::commutator(t, &CMat::anticommutator(t, a));
    let rhs = CMat::commutator(&(t * t), a);
    Ok((&lhs - &rhs).sup_norm())
}

/// JSON form: each matrix is a list of rows of `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CliffordJson {
    pub d: usize,
    pub n_spin: usize,
    pub alphas: Vec<Vec<Vec<[f64; 2]>>>,
    pub beta: Vec<Vec<[f64; 2]>>,
}

pub fn matrix_to_json<T: Real>(m: &CMat<T>) -> Vec<Vec<[f64; 2]>> {
    (0..m.dim())
        .map(|i| {
            (0..m.dim())
                .map(|j| {
                    let z = m.get(i, j);
                    [z.re.to_f64_lossy(), z.im.to_f64_lossy()]
                })
                .collect()
        })
        .collect()
}

pub fn matrix_from_json<T: Real>(rows: &[Vec<[f64; 2]>]) -> Result<CMat<T>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("matrix rows must all have the row count as length".into()));
    }
    let data: Vec<C<T>> = rows.iter().flatten().map(|p| cplx(T::lit(p[0]), T::lit(p[1]))).collect();
    CMat::from_row_major(data)
}

impl CliffordJson {
    pub fn to_rep<T: Real>(&self) -> Result<CliffordRep<T>> {
        Ok(CliffordRep {
            d: self.d,
            n_spin: self.n_spin,
            alphas: self.alphas.iter().map(|m| matrix_from_json(m)).collect::<Result<_>>()?,
            beta: matrix_from_json(&self.beta)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d1_is_pauli_pair() {
        let rep = build_dirac_matrices::<f64>(1).unwrap();
        assert_eq!(rep.n_spin, 2);
        assert_eq!(rep.alphas[0], sigma1());
        assert_eq!(rep.beta, sigma3());
        assert!(verify_clifford(&rep) <= 1e-12);
    }

    #[test]
    fn spinor_dimensions() {
        assert_eq!(build_dirac_matrices::<f64>(3).unwrap().n_spin, 4);
        assert_eq!(build_dirac_matrices::<f64>(4).unwrap().n_spin, 4);
        assert_eq!(build_dirac_matrices::<f64>(5).unwrap().n_spin, 8);
        assert_eq!(build_dirac_matrices::<f64>(6).unwrap().n_spin, 8);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(build_dirac_matrices::<f64>(0).is_err());
    }

    #[test]
    fn entries_are_units_or_zero() {
        for d in 1..=8 {
            let rep = build_dirac_matrices::<f64>(d).unwrap();
            for m in rep.alphas.iter().chain(std::iter::once(&rep.beta)) {
                for z in m.as_slice() {
                    let ok = [(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
                        .iter()
                        .any(|&(re, im)| z.re == re && z.im == im);
                    assert!(ok, "entry {z} in d={d}");
                }
            }
        }
    }

    #[test]
    fn corrupted_alpha_detected() {
        let mut rep = build_dirac_matrices::<f64>(2).unwrap();
        rep.alphas[0] = sigma3();
        assert!(verify_clifford(&rep) >= 1.0);
    }

    #[test]
    fn json_round_trip() {
        let rep = build_dirac_matrices::<f64>(3).unwrap();
        let text = serde_json::to_string(&rep.to_json()).unwrap();
        let back: CliffordJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_rep::<f64>().unwrap(), rep);
    }

    #[test]
    fn identity_check_trivial_cases() {
        let s1 = sigma1::<f64>();
        let s3 = sigma3::<f64>();
        assert_eq!(matrix_identity_check(&s1, &s3).unwrap(), 0.0);
        assert_eq!(matrix_identity_check(&CMat::identity(2), &s3).unwrap(), 0.0);
        assert!(matrix_identity_check(&s1, &CMat::identity(4)).is_err());
    }
}
