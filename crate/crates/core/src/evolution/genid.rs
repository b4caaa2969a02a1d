//! Time-dependent virial identity along the discrete flow.

use serde::{Deserialize, Serialize};

use super::Propagator;
use crate::error::Result;
use crate::grid::SpinorField;
use crate::multipliers::{kinetic_lower_bound_check, MultiplierProfile};
use crate::operators::apply_igphi;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GenIdReport {
    pub dt: f64,
    /// Central difference of Im⟨H_Dψ, iG_φψ⟩ over steps ±dt.
    pub d_fd: f64,
    /// Im⟨H_Dψ′, iG_φψ⟩ + Im⟨H_Dψ, iG_φψ′⟩ with ψ′ = −iHψ.
    pub d_exact: f64,
    /// Kinetic term K.
    pub kinetic: f64,
    /// ½⟨ψ, [V, L_φ]ψ⟩ = Re⟨Vψ, L_φψ⟩.
    pub potential: f64,
    /// −K − ½⟨ψ, [V, L_φ]ψ⟩.
    pub rhs: f64,
    pub time_residual: f64,
    pub spatial_residual: f64,
}

/// Im⟨H_Dψ, iG_φψ⟩.
pub fn virial_pairing<T: Real>(prop: &Propagator<T>, profile: &MultiplierProfile, psi: &SpinorField<T>) -> Result<f64> {
    let ig = apply_igphi(psi, profile)?;
    Ok(prop.apply_hd(psi).inner(&ig).im.to_f64_lossy())
}

pub fn gen_id_check<T: Real>(
    prop: &Propagator<T>,
    profile: &MultiplierProfile,
    psi: &SpinorField<T>,
    dt: f64,
) -> Result<GenIdReport> {
    let fwd = prop.step(psi, T::lit(dt));
    let bwd = prop.step(psi, T::lit(-dt));
    let d_fd = (virial_pairing(prop, profile, &fwd)? - virial_pairing(prop, profile, &bwd)?) / (2.0 * dt);

    let hd = prop.apply_hd(psi);
    let ig = apply_igphi(psi, profile)?;
    // ψ′ = −iHψ
    let dpsi = prop.apply_h(psi).times_i().scaled(crate::scalar::cplx(-T::one(), T::zero()));
    let d_exact = (prop.apply_hd(&dpsi).inner(&ig).im + hd.inner(&apply_igphi(&dpsi, profile)?).im).to_f64_lossy();

    let kinetic = kinetic_lower_bound_check(profile, psi)?.k;
    let potential = match prop.potential() {
        None => 0.0,
        Some(v) => {
            let vpsi = v.apply(psi);
            let a = prop.apply_hd(&vpsi).inner(&ig).re;
            let b = vpsi.inner(&apply_igphi(&hd, profile)?).re;
            (a + b).to_f64_lossy()
        }
    };
    let rhs = -kinetic - potential;
    Ok(GenIdReport {
        dt,
        d_fd,
        d_exact,
        kinetic,
        potential,
        rhs,
        time_residual: (d_fd - d_exact).abs(),
        spatial_residual: (d_exact - rhs).abs() / kinetic.abs().max(f64::MIN_POSITIVE),
    })
}
