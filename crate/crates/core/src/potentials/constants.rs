//! Mesh extraction of the hypothesis constants C₁…C₄ and the Kato bound a.

use serde::{Deserialize, Serialize};

use crate::clifford::{build_dirac_matrices, CliffordRep};
use crate::error::{Error, Result};
use crate::matrix::CMat;
use crate::potentials::PotentialSpec;

/// Which decay profile the constants are measured against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightFamily {
    /// C₁/|x|², C₂/|x|, C₃/|x|², C₄/|x|².
    Stationary,
    /// C₁/(|x|^{2−ε}+|x|^{2+ε}), C₂/(|x|^{1−ε}+|x|^{1+ε}), C₄ as C₁;
    /// C₃ as C₁ in d = 3 and C₃/|x|² in d ≥ 4.
    Evolutionary { epsilon: f64 },
}

impl WeightFamily {
    pub fn epsilon(&self) -> Option<f64> {
        match self {
            Self::Stationary => None,
            Self::Evolutionary { epsilon } => Some(*epsilon),
        }
    }

    /// Inverse decay weights (w₁, w₂, w₃, w₄) at radius r.
    pub fn weights(&self, d: usize, r: f64) -> [f64; 4] {
        match *self {
            Self::Stationary => [r * r, r, r * r, r * r],
            Self::Evolutionary { epsilon: e } => {
                let two = r.powf(2.0 - e) + r.powf(2.0 + e);
                let one = r.powf(1.0 - e) + r.powf(1.0 + e);
                let w3 = if d >= 4 { r * r } else { two };
                [two, one, w3, two]
            }
        }
    }
}

/// Log-uniform radial mesh plus a fixed direction set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialMesh {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    /// Pseudo-random unit directions added to the axes and the main diagonal.
    #[serde(default = "default_random_dirs")]
    pub random_directions: usize,
}

fn default_random_dirs() -> usize {
    4
}

impl Default for RadialMesh {
    fn default() -> Self {
        Self { r_min: 1e-6, r_max: 1e6, points: 10_000, random_directions: default_random_dirs() }
    }
}

impl RadialMesh {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min <= 1e-6 && self.r_max >= 1e6 && self.points >= 10_000) {
            return Err(Error::Parameter(
                "mesh must span at least [1e-6, 1e6] with 10^4 or more points".into(),
            ));
        }
        Ok(())
    }

    pub fn radii(&self) -> Vec<f64> {
        let (a, b) = (self.r_min.ln(), self.r_max.ln());
        let n = self.points;
        (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
    }

    pub fn directions(&self, d: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            out.push(e);
        }
        if d > 1 {
            out.push(vec![1.0 / (d as f64).sqrt(); d]);
        }
        // Fixed-seed Weyl sequence so extraction is reproducible.
        let mut state = 0.5f64;
        for _ in 0..self.random_directions {
            let mut v: Vec<f64> = (0..d)
                .map(|_| {
                    state = (state + 0.618_033_988_749_894_9).fract();
                    2.0 * state - 1.0 + 1e-3
                })
                .collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= n);
            out.push(v);
        }
        out
    }
}

/// One extracted supremum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantDetail {
    /// `f64::INFINITY` when divergent.
    #[serde(with = "crate::scalar::extended_f64")]
    pub value: f64,
    pub argmax_r: f64,
    /// The supremum sits on a mesh endpoint (possibly not attained).
    pub at_endpoint: bool,
    pub divergent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisConstants {
    #[serde(with = "crate::scalar::extended_f64")]
    pub c1: f64,
    #[serde(with = "crate::scalar::extended_f64")]
    pub c2: f64,
    #[serde(with = "crate::scalar::extended_f64")]
    pub c3: f64,
    #[serde(with = "crate::scalar::extended_f64")]
    pub c4: f64,
    pub family: WeightFamily,
    pub details: [ConstantDetail; 4],
    /// a = C_H sup|x|‖V(x)‖ (absent for d < 3).
    #[serde(default, with = "crate::scalar::extended_f64::option")]
    pub kato_a: Option<f64>,
    /// True when a is exact rather than a mesh estimate.
    pub kato_rigorous: bool,
}

impl HypothesisConstants {
    pub fn epsilon(&self) -> Option<f64> {
        self.family.epsilon()
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.c1, self.c2, self.c3, self.c4]
    }

    pub fn any_divergent(&self) -> bool {
        self.details.iter().any(|d| d.divergent)
    }

    /// Constants of the potential with every coupling multiplied by s.
    pub fn scaled(&self, s: f64) -> Self {
        let s = s.abs();
        let sc = |c: f64| if c == 0.0 { 0.0 } else { c * s };
        let mut out = self.clone();
        out.c1 = sc(self.c1);
        out.c2 = sc(self.c2);
        out.c3 = sc(self.c3);
        out.c4 = sc(self.c4);
        for d in out.details.iter_mut() {
            d.value = sc(d.value);
        }
        out.kato_a = self.kato_a.map(sc);
        out
    }

    pub fn zero(family: WeightFamily) -> Self {
        let z = ConstantDetail { value: 0.0, argmax_r: 0.0, at_endpoint: false, divergent: false };
        Self { c1: 0.0, c2: 0.0, c3: 0.0, c4: 0.0, family, details: [z; 4], kato_a: Some(0.0), kato_rigorous: true }
    }
}

/// Pointwise hypothesis quantities (|∇V|, max_j|[α_j,V]|, |(x·∇){V,β}|, |[β,V]|)
/// in operator 2-norm. |∇V| is max(‖(α·∇)V‖, ‖Σ_j(∂_jV)†∂_jV‖^{1/2}).
pub fn pointwise_quantities(pot: &PotentialSpec, rep: &CliffordRep<f64>, x: &[f64]) -> [f64; 4] {
    let grads = pot.gradient(rep, x);
    let mut alpha_grad = CMat::zeros(rep.n_spin);
    let mut gram = CMat::zeros(rep.n_spin);
    for (a, g) in rep.alphas.iter().zip(&grads) {
        alpha_grad = &alpha_grad + &(a * g);
        gram = &gram + &(&g.adjoint() * g);
    }
    let q1 = alpha_grad.op_norm().max(gram.op_norm().sqrt());
    let q2 = (0..rep.d).map(|j| pot.comm_alpha(rep, x, j).op_norm()).fold(0.0, f64::max);
    let q3 = pot.x_grad_anticomm_beta(rep, x).op_norm();
    let q4 = pot.comm_beta(rep, x).op_norm();
    [q1, q2, q3, q4]
}

const DIVERGENCE_SLOPE: f64 = 0.05;

fn finish(values: &[f64], radii: &[f64]) -> ConstantDetail {
    let (mut best, mut arg) = (0.0f64, 0usize);
    for (i, &v) in values.iter().enumerate() {
        if v > best {
            best = v;
            arg = i;
        }
    }
    if best == 0.0 {
        return ConstantDetail { value: 0.0, argmax_r: radii[0], at_endpoint: false, divergent: false };
    }
    let last = values.len() - 1;
    let at_endpoint = arg == 0 || arg == last;
    let slope = |i: usize, j: usize| {
        if values[j] <= 0.0 {
            f64::INFINITY
        } else {
            (values[i] / values[j]).ln() / (radii[i] / radii[j]).ln().abs()
        }
    };
    let divergent = (arg == last && slope(last, last - 1) > DIVERGENCE_SLOPE)
        || (arg == 0 && slope(0, 1) > DIVERGENCE_SLOPE);
    ConstantDetail { value: if divergent { f64::INFINITY } else { best }, argmax_r: radii[arg], at_endpoint, divergent }
}

/// C_i = sup over the mesh (radii × directions) of weight_i(r)·quantity_i(x).
pub fn extract_constants(
    pot: &PotentialSpec,
    family: WeightFamily,
    d: usize,
    mesh: &RadialMesh,
) -> Result<HypothesisConstants> {
    mesh.validate()?;
    pot.validate()?;
    if let Some(e) = family.epsilon() {
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::Parameter(format!("epsilon must lie in (0,1), got {e}")));
        }
    }
    let rep = build_dirac_matrices::<f64>(d)?;
    let radii = mesh.radii();
    let mut dirs = mesh.directions(d);
    // Without the anomalous channel every quantity depends on |x| alone.
    if pot.anomalous.is_none() {
        dirs.truncate(1);
    }
    let mut series = vec![vec![0.0f64; radii.len()]; 4];
    let mut kato = vec![0.0f64; radii.len()];
    let mut x = vec![0.0; d];
    for (i, &r) in radii.iter().enumerate() {
        let w = family.weights(d, r);
        for u in &dirs {
            x.iter_mut().zip(u).for_each(|(xi, ui)| *xi = r * ui);
            let q = pointwise_quantities(pot, &rep, &x);
            for k in 0..4 {
                series[k][i] = series[k][i].max(w[k] * q[k]);
            }
            kato[i] = f64::max(kato[i], r * pot.matrix(&rep, &x).op_norm());
        }
    }
    let details = [0, 1, 2, 3].map(|k| finish(&series[k], &radii));
    let kato_a = if d >= 3 {
        let sup = finish(&kato, &radii);
        Some(2.0 / (d as f64 - 2.0) * sup.value)
    } else {
        None
    };
    Ok(HypothesisConstants {
        c1: details[0].value,
        c2: details[1].value,
        c3: details[2].value,
        c4: details[3].value,
        family,
        details,
        kato_a,
        kato_rigorous: pot.is_zero() || pot.coulomb_homogeneous(),
    })
}

/// Closed-form stationary constants for single-channel Coulomb potentials.
pub fn closed_form_stationary(pot: &PotentialSpec, d: usize) -> Option<[f64; 4]> {
    if pot.is_zero() {
        return Some([0.0; 4]);
    }
    let inf = f64::INFINITY;
    let coulomb = |p: &Option<crate::potentials::RadialProfile>| match p {
        Some(crate::potentials::RadialProfile::Coulomb { g }) => Some(g.abs()),
        _ => None,
    };
    match (pot.scalar, pot.lorentz, pot.anomalous) {
        (s @ Some(_), None, None) => coulomb(&s).map(|g| [g, 0.0, inf, 0.0]),
        (None, b @ Some(_), None) => coulomb(&b).map(|g| [g, 2.0 * g, inf, 0.0]),
        (None, None, a @ Some(_)) => {
            let df = d as f64;
            coulomb(&a).map(|g| [df.sqrt().max((df - 2.0).abs()) * g, 2.0 * g, 0.0, inf])
        }
        _ => None,
    }
}
