//! Theorem certificates: evaluate each sufficient condition exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{c_delta_converged, c_delta_truncation, c_delta_unchecked};
use crate::potentials::{HypothesisConstants, PotentialSpec, WeightFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "T1.2")]
    T1_2,
    #[serde(rename = "T1.3")]
    T1_3,
    #[serde(rename = "T1.5")]
    T1_5,
    #[serde(rename = "T1.6")]
    T1_6,
    #[serde(rename = "T1.7")]
    T1_7,
    #[serde(rename = "T1.8")]
    T1_8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// No eigenvalues (stationary theorems).
    Absent,
    /// Smoothing functional bounded (evolution theorems).
    Bounded,
    /// The sufficient condition fails; nothing is claimed.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub label: String,
    #[serde(with = "crate::scalar::extended_f64")]
    pub lhs: f64,
    #[serde(with = "crate::scalar::extended_f64")]
    pub rhs: f64,
    pub holds: bool,
}

impl Inequality {
    fn new(label: &str, lhs: f64, rhs: f64) -> Self {
        Self { label: label.into(), lhs, rhs, holds: lhs < rhs }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub theorem: TheoremId,
    pub d: usize,
    pub m: f64,
    pub potential: PotentialSpec,
    pub epsilon: Option<f64>,
    pub constants: HypothesisConstants,
    /// c_ε² and c_{ε/2}² used (upper brackets of the series).
    #[serde(default, with = "crate::scalar::extended_f64::option")]
    pub c_eps_sq: Option<f64>,
    #[serde(default, with = "crate::scalar::extended_f64::option")]
    pub c_eps_half_sq: Option<f64>,
    pub inequalities: Vec<Inequality>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Inconclusive
    }
}

/// coef·c, with 0·∞ read as 0.
fn t(coef: f64, c: f64) -> f64 {
    if coef == 0.0 || c == 0.0 {
        0.0
    } else {
        coef * c
    }
}

fn sum(terms: &[(f64, f64)]) -> f64 {
    terms.iter().map(|&(a, c)| t(a, c)).sum()
}

fn notes_for(constants: &HypothesisConstants) -> Vec<String> {
    let mut notes = Vec::new();
    for (i, d) in constants.details.iter().enumerate() {
        if d.divergent {
            notes.push(format!("C{} diverges on the sampling mesh (supremum at r = {:e})", i + 1, d.argmax_r));
        } else if d.at_endpoint && d.value > 0.0 {
            notes.push(format!(
                "C{} approached at the mesh endpoint r = {:e}; the supremum may not be attained",
                i + 1,
                d.argmax_r
            ));
        }
    }
    notes
}

/// Absence of eigenvalues: the massless condition for m = 0, the massive one for m > 0.
pub fn certify_stationary(d: usize, m: f64, pot: &PotentialSpec, constants: &HypothesisConstants) -> Result<Certificate> {
    if d < 3 {
        return Err(Error::Dimension(format!("the stationary theorems need d ≥ 3, got {d}")));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::Parameter(format!("mass must be nonnegative, got {m}")));
    }
    if constants.family != WeightFamily::Stationary {
        return Err(Error::Parameter("stationary certificates need stationary-family constants".into()));
    }
    let dm = d as f64 - 2.0;
    let [c1, c2, c3, c4] = constants.as_array();
    let (theorem, ineq) = if m == 0.0 {
        (TheoremId::T1_2, Inequality::new("4C1/(d-2) + C2 < 1", sum(&[(4.0 / dm, c1), (1.0, c2)]), 1.0))
    } else {
        let lhs = sum(&[(4.0 / dm, c1), (1.0, c2), (2.0 * m / dm, c4), (2.0 * m / (dm * dm), c3)]);
        (TheoremId::T1_3, Inequality::new("4C1/(d-2) + C2 + 2mC4/(d-2) + 2mC3/(d-2)^2 < 1", lhs, 1.0))
    };
    let verdict = if ineq.holds { Verdict::Absent } else { Verdict::Inconclusive };
    Ok(Certificate {
        theorem,
        d,
        m,
        potential: pot.clone(),
        epsilon: None,
        constants: constants.clone(),
        c_eps_sq: None,
        c_eps_half_sq: None,
        inequalities: vec![ineq],
        verdict,
        notes: notes_for(constants),
    })
}

/// Theorems 1.5–1.8, selected by d and m.
pub fn certify_smoothing(
    d: usize,
    m: f64,
    pot: &PotentialSpec,
    constants: &HypothesisConstants,
    epsilon: f64,
) -> Result<Certificate> {
    if d < 3 {
        return Err(Error::Dimension(format!("the smoothing theorems need d ≥ 3, got {d}")));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::Parameter(format!("mass must be nonnegative, got {m}")));
    }
    let theorem = match (d, m > 0.0) {
        (3, false) => TheoremId::T1_5,
        (3, true) => TheoremId::T1_6,
        (_, false) => TheoremId::T1_7,
        (_, true) => TheoremId::T1_8,
    };
    let upper = if theorem == TheoremId::T1_7 { 0.5 } else { 1.0 };
    if !(epsilon > 0.0 && epsilon < upper) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, {upper}) for {theorem:?}, got {epsilon}")));
    }
    match constants.family {
        WeightFamily::Evolutionary { epsilon: e } if (e - epsilon).abs() <= 1e-15 => {}
        _ => {
            return Err(Error::Parameter(
                "smoothing certificates need evolutionary-family constants with the same epsilon".into(),
            ))
        }
    }
    let mut notes = notes_for(constants);
    let [c1, c2, c3, c4] = constants.as_array();
    let half_sq = c_delta_converged(epsilon / 2.0)?.upper();
    let s2 = 2f64.sqrt();
    let df = d as f64;
    let (inequalities, c_eps_sq) = match theorem {
        TheoremId::T1_5 => (
            vec![
                Inequality::new(
                    "c_{e/2}^2 [3sqrt2/4 C1 + (3sqrt2+12)/8 C2] < 1/6",
                    half_sq * sum(&[(3.0 * s2 / 4.0, c1), ((3.0 * s2 + 12.0) / 8.0, c2)]),
                    1.0 / 6.0,
                ),
                Inequality::new(
                    "c_{e/2}^2 [3sqrt2/4 C1 + 3sqrt2/8 C2] < 1/8",
                    half_sq * sum(&[(3.0 * s2 / 4.0, c1), (3.0 * s2 / 8.0, c2)]),
                    1.0 / 8.0,
                ),
            ],
            None,
        ),
        TheoremId::T1_6 => (
            vec![
                Inequality::new(
                    "c_{e/2}^2 [3sqrt2/4 C1 + (3sqrt2+12)/8 C2 + 3sqrt2 m/8 C4] < 1/6",
                    half_sq * sum(&[(3.0 * s2 / 4.0, c1), ((3.0 * s2 + 12.0) / 8.0, c2), (3.0 * s2 * m / 8.0, c4)]),
                    1.0 / 6.0,
                ),
                Inequality::new(
                    "c_{e/2}^2 [3sqrt2/4 C1 + 3sqrt2/8 C2 + 3m/8 C3 + 3sqrt2 m/8 C4] < 1/8",
                    half_sq
                        * sum(&[
                            (3.0 * s2 / 4.0, c1),
                            (3.0 * s2 / 8.0, c2),
                            (3.0 * m / 8.0, c3),
                            (3.0 * s2 * m / 8.0, c4),
                        ]),
                    1.0 / 8.0,
                ),
            ],
            None,
        ),
        TheoremId::T1_7 | TheoremId::T1_8 => {
            let ceps = if epsilon < 0.5 {
                c_delta_converged(epsilon)?
            } else {
                notes.push(format!(
                    "c_eps evaluated from the defining series at eps = {epsilon} >= 1/2, outside the range stated for the series"
                ));
                c_delta_unchecked(epsilon, c_delta_truncation(epsilon, 1e-12))
            };
            let c = ceps.c();
            let mass = if theorem == TheoremId::T1_8 { m } else { 0.0 };
            let bracket = sum(&[(0.75, c1), (3.0 * (df - 1.0) / 16.0, c2), (3.0 * mass / 8.0, c4)]);
            let first = t(c, bracket) + t(1.5 * half_sq, c2);
            let second = t(c, bracket) + t(3.0 * mass / 8.0, c3);
            let (l1, l2) = if theorem == TheoremId::T1_7 {
                (
                    "[3/4 C1 + 3(d-1)/16 C2] c_e + 3/2 C2 c_{e/2}^2 < (d-1)/(4d)",
                    "[3/4 C1 + 3(d-1)/16 C2] c_e < (d-1)(d-3)/8",
                )
            } else {
                (
                    "[3/4 C1 + 3(d-1)/16 C2 + 3m/8 C4] c_e + 3/2 C2 c_{e/2}^2 < (d-1)/(4d)",
                    "[3/4 C1 + 3(d-1)/16 C2 + 3m/8 C4] c_e + 3m/8 C3 < (d-1)(d-3)/8",
                )
            };
            (
                vec![
                    Inequality::new(l1, first, (df - 1.0) / (4.0 * df)),
                    Inequality::new(l2, second, (df - 1.0) * (df - 3.0) / 8.0),
                ],
                Some(ceps.upper()),
            )
        }
        _ => unreachable!(),
    };
    let verdict = if inequalities.iter().all(|i| i.holds) { Verdict::Bounded } else { Verdict::Inconclusive };
    Ok(Certificate {
        theorem,
        d,
        m,
        potential: pot.clone(),
        epsilon: Some(epsilon),
        constants: constants.clone(),
        c_eps_sq,
        c_eps_half_sq: Some(half_sq),
        inequalities,
        verdict,
        notes,
    })
}

/// Largest coupling scale s for which the certificate of `pot.scaled(s)`
/// still passes, by bisection on [0, s_hi]. Constants scale linearly with s.
pub fn coupling_threshold(
    certify: impl Fn(&HypothesisConstants) -> Result<Certificate>,
    unit_constants: &HypothesisConstants,
    s_hi: f64,
) -> Result<f64> {
    let passes = |s: f64| -> Result<bool> { Ok(certify(&unit_constants.scaled(s))?.passed()) };
    if !passes(0.0)? {
        return Ok(0.0);
    }
    if passes(s_hi)? {
        return Ok(s_hi);
    }
    let (mut lo, mut hi) = (0.0, s_hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
