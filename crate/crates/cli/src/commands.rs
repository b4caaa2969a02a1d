//! The five experiments. Each returns a JSON-serializable report and an
//! outcome that decides the exit code.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use dirac_virial::clifford::{matrix_identity_check, spinor_dim};
use dirac_virial::corpus::{corpus, gaussian_packet};
use dirac_virial::evolution::{
    eigensolve, run_evolution, zitterbewegung_fit, zitterbewegung_initial, zitterbewegung_trace, EvolutionConfig,
    EvolutionSummary, Propagator, SmoothingTerms, ZitterFit,
};
use dirac_virial::matrix::CMat;
use dirac_virial::multipliers::kinetic_lower_bound_check;
use dirac_virial::norms::{c_delta_converged, norm_report};
use dirac_virial::operators::{apply_h0, apply_hd, apply_ig};
use dirac_virial::potentials::{
    certify_smoothing, certify_stationary, extract_constants, v2_identity_check,
    verify_virial_on_eigenstate, Certificate, Verdict, WeightFamily,
};
use dirac_virial::{build_dirac_matrices, verify_clifford, Complex64, Field, Grid, Grid64, MultiplierProfile, PotentialSpec, Rep};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{EvolveMode, ExperimentConfig, TheoremFamily, SCHEMA_VERSION};

/// How a finished experiment maps onto the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Inconclusive,
    Fail,
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn rep_for(cfg: &ExperimentConfig) -> Result<Rep> {
    let rep = match &cfg.clifford {
        Some(j) => j.to_rep()?,
        None => build_dirac_matrices(cfg.grid.d)?,
    };
    ensure!(rep.d == cfg.grid.d, "representation has d = {} but the grid has d = {}", rep.d, cfg.grid.d);
    ensure!(rep.alphas.len() == rep.d, "representation needs exactly d α matrices");
    Ok(rep)
}

fn grid_for(cfg: &ExperimentConfig) -> Result<Arc<Grid64>> {
    Ok(Grid::new(cfg.grid.clone())?)
}

fn random_spinor(ns: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..ns).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn test_packet(cfg: &ExperimentConfig, g: &Arc<Grid64>, ns: usize, rng: &mut ChaCha8Rng) -> Result<Field> {
    let d = cfg.grid.d;
    let center: Vec<f64> = (0..d).map(|j| [0.3, -0.2, 0.1][j % 3]).collect();
    let momentum = vec![0.5; d];
    Ok(gaussian_packet(g, &center, &momentum, cfg.identities.packet_width, &random_spinor(ns, rng))?)
}

#[derive(Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Serialize)]
pub struct IdentitiesReport {
    pub schema_version: u32,
    pub d: usize,
    pub n: usize,
    pub mass: f64,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

fn rel_diff(a: &Field, b: &Field) -> f64 {
    a.sub(b).l2_norm() / b.l2_norm().max(f64::MIN_POSITIVE)
}

pub fn identities(cfg: &ExperimentConfig, out: &Path) -> Result<(IdentitiesReport, Outcome)> {
    let tol = &cfg.identities;
    let d = cfg.grid.d;
    let m = cfg.mass;
    let rep = rep_for(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();
    let mut push = |name: &str, residual: f64, tolerance: f64, note: Option<String>| {
        checks.push(Check { name: name.into(), residual, tolerance, pass: residual <= tolerance, note });
    };

    let cliff = verify_clifford(&rep);
    let dim_ok = rep.n_spin == spinor_dim(d);
    let note = (!dim_ok).then(|| format!("N = {} but 2^⌊(d+1)/2⌋ = {}", rep.n_spin, spinor_dim(d)));
    push("clifford", if dim_ok { cliff } else { f64::INFINITY }, tol.exact_tol, note);

    let mut worst = 0.0f64;
    for _ in 0..tol.random_pairs {
        let n = rep.n_spin;
        let mut draw = || CMat::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let (t, a) = (draw(), draw());
        let scale: f64 = t.sup_norm() * t.sup_norm() * a.sup_norm() * (n * n) as f64;
        worst = worst.max(matrix_identity_check(&t, &a)? / scale);
    }
    push("matrix_identity", worst, tol.exact_tol, Some(format!("{} random pairs", tol.random_pairs)));

    if !(cliff <= tol.exact_tol && dim_ok) {
        let all_pass = false;
        let report = IdentitiesReport { schema_version: SCHEMA_VERSION, d, n: cfg.grid.n, mass: m, checks, all_pass };
        write_json(out, "identities.json", &report)?;
        return Ok((report, Outcome::Fail));
    }

    let g = grid_for(cfg)?;
    let f = test_packet(cfg, &g, rep.n_spin, &mut rng)?;
    let hd = |x: &Field| apply_hd(x, m, &rep);
    let h0f = apply_h0(&f);
    let hdf = hd(&f)?;
    let mut shifted = h0f.clone();
    shifted.axpy(Complex64::new(m * m, 0.0), &f);
    push("spectral_square", rel_diff(&hd(&hdf)?, &shifted), tol.field_tol, None);

    let chi: Vec<f64> = g.radii().iter().map(|&r| (-r * r / 4.0).exp()).collect();
    let a = |x: &Field| x.mul_node_weights(&chi);
    let anti = |x: &Field| -> Result<Field> { Ok(hd(&a(x))?.add(&a(&hd(x)?))) };
    let lhs = hd(&anti(&f)?)?.sub(&anti(&hdf)?);
    let rhs = apply_h0(&a(&f)).sub(&a(&h0f));
    push("algebraic", rel_diff(&lhs, &rhs), tol.field_tol, Some("A = e^{-|x|²/4}".into()));

    let comm = apply_h0(&apply_ig(&f)).sub(&apply_ig(&h0f));
    let want = f.inner(&h0f) * 2.0;
    push("positive_commutator", (f.inner(&comm) - want).norm() / want.norm(), tol.field_tol, None);

    let default_pot = PotentialSpec::smooth_electrostatic(0.3, 0.5);
    let pot = cfg.potential.as_ref().unwrap_or(&default_pot);
    let v2 = v2_identity_check(&f, m, pot, &rep)?;
    push("potential_rewrite", v2.composed_residual(), tol.composed_tol, Some(format!("closed-form commutators: {:.3e}", v2.analytic_residual())));

    if d >= 3 {
        let profile = MultiplierProfile::new(d, cfg.multiplier_r)?;
        let k = kinetic_lower_bound_check(&profile, &f)?;
        push("kinetic_lower_bound", (-k.margin / k.k).max(0.0), tol.kinetic_tol, Some(format!("K = {:.6e}, margin = {:.6e}", k.k, k.margin)));
    }

    let all_pass = checks.iter().all(|c| c.pass);
    let report = IdentitiesReport { schema_version: SCHEMA_VERSION, d, n: cfg.grid.n, mass: m, checks, all_pass };
    write_json(out, "identities.json", &report)?;
    Ok((report, if all_pass { Outcome::Pass } else { Outcome::Fail }))
}

pub fn certify(cfg: &ExperimentConfig, out: &Path) -> Result<(Certificate, Outcome)> {
    let Some(pot) = &cfg.potential else { bail!("certify needs a potential in the config") };
    let d = cfg.grid.d;
    let c = &cfg.certify;
    let cert = match c.family {
        TheoremFamily::Stationary => {
            let k = extract_constants(pot, WeightFamily::Stationary, d, &c.mesh)?;
            certify_stationary(d, cfg.mass, pot, &k)?
        }
        TheoremFamily::Smoothing => {
            let Some(epsilon) = c.epsilon else { bail!("the smoothing family needs certify.epsilon") };
            let k = extract_constants(pot, WeightFamily::Evolutionary { epsilon }, d, &c.mesh)?;
            certify_smoothing(d, cfg.mass, pot, &k, epsilon)?
        }
    };
    write_json(out, "certificate.json", &cert)?;
    let outcome = if cert.verdict == Verdict::Inconclusive { Outcome::Inconclusive } else { Outcome::Pass };
    Ok((cert, outcome))
}

#[derive(Serialize)]
pub struct NormsSummary {
    pub schema_version: u32,
    pub d: usize,
    pub fields: usize,
    pub delta: f64,
    pub c_delta_sq: f64,
    pub hardy_holds: bool,
    pub hardy_max_ratio: f64,
    pub weighted_holds: bool,
    pub morrey_max_ratio: f64,
    pub spherical_max_ratio: f64,
}

pub fn norms(cfg: &ExperimentConfig, out: &Path) -> Result<(NormsSummary, Outcome)> {
    let n = &cfg.norms;
    let d = cfg.grid.d;
    ensure!(d >= 3, "the Hardy suite needs d ≥ 3");
    let g = grid_for(cfg)?;
    let mut s = NormsSummary {
        schema_version: SCHEMA_VERSION,
        d,
        fields: n.fields,
        delta: n.delta,
        c_delta_sq: c_delta_converged(n.delta)?.upper(),
        hardy_holds: true,
        hardy_max_ratio: 0.0,
        weighted_holds: true,
        morrey_max_ratio: 0.0,
        spherical_max_ratio: 0.0,
    };
    for u in corpus(&g, n.ncomp, cfg.seed, n.fields) {
        let r = norm_report(&u, n.delta)?;
        s.hardy_holds &= r.hardy_lhs <= r.hardy_rhs * (1.0 + n.slack);
        s.hardy_max_ratio = s.hardy_max_ratio.max(r.hardy_lhs / r.hardy_rhs);
        let w = &r.weighted;
        s.weighted_holds &= w.holds(n.slack);
        s.morrey_max_ratio = s.morrey_max_ratio.max(w.lhs_morrey / w.rhs_morrey);
        s.spherical_max_ratio = s.spherical_max_ratio.max(w.lhs_spherical / w.rhs_spherical);
    }
    write_json(out, "norms.json", &s)?;
    let ok = s.hardy_holds && s.weighted_holds;
    Ok((s, if ok { Outcome::Pass } else { Outcome::Fail }))
}

fn evolution_config(cfg: &ExperimentConfig) -> EvolutionConfig {
    let e = &cfg.evolve;
    let mut c = EvolutionConfig::new(e.dt, e.t_max, cfg.mass);
    c.cadence = e.cadence;
    c.potential = cfg.potential.clone();
    c.r_big = cfg.multiplier_r;
    c.delta = e.delta;
    c.window_radius = e.window_radius;
    c.smoothing = e.smoothing;
    c
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum EvolveReport {
    Packet(EvolutionSummary),
    Family(FamilySummary),
    Zitterbewegung(ZitterSummary),
}

#[derive(Serialize)]
pub struct FamilyMember {
    pub center: Vec<f64>,
    pub momentum: Vec<f64>,
    pub width: f64,
    pub ratio: Option<f64>,
    pub ratios_at: Vec<Option<f64>>,
    pub mass_drift: f64,
    pub energy_bound_holds: Option<bool>,
}

#[derive(Serialize)]
pub struct FamilySummary {
    pub schema_version: u32,
    pub size: usize,
    pub t_final: f64,
    pub max_ratio: f64,
    pub report_times: Vec<f64>,
    pub max_ratio_at: Vec<f64>,
    pub all_finite: bool,
    pub finite_horizon: bool,
    pub members: Vec<FamilyMember>,
}

#[derive(Serialize)]
pub struct ZitterSummary {
    pub schema_version: u32,
    pub modes: Vec<i64>,
    pub fit: ZitterFit,
}

pub fn evolve(cfg: &ExperimentConfig, out: &Path) -> Result<(EvolveReport, Outcome)> {
    let g = grid_for(cfg)?;
    let rep = rep_for(cfg)?;
    let d = cfg.grid.d;
    let ev = &cfg.evolve;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match ev.mode {
        EvolveMode::Packet => {
            let pk = &ev.packet;
            let spinor = match &pk.spinor {
                Some(s) => s.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
                None => random_spinor(rep.n_spin, &mut rng),
            };
            ensure!(spinor.len() == rep.n_spin, "packet spinor needs {} components", rep.n_spin);
            let zero = vec![0.0; d];
            let f = gaussian_packet(&g, pk.center.as_ref().unwrap_or(&zero), pk.momentum.as_ref().unwrap_or(&zero), pk.width, &spinor)?;
            let series = run_evolution(&evolution_config(cfg), &f)?;
            series.write_csv(BufWriter::new(File::create(out.join("diagnostics.csv"))?))?;
            let summary = series.summary();
            write_json(out, "summary.json", &summary)?;
            Ok((EvolveReport::Packet(summary), Outcome::Pass))
        }
        EvolveMode::Family => {
            let ec = evolution_config(cfg);
            let s = ev.family_spread;
            let mut members = Vec::new();
            for _ in 0..ev.family_size {
                let center: Vec<f64> = (0..d).map(|_| if s > 0.0 { rng.gen_range(-s..s) } else { 0.0 }).collect();
                let momentum: Vec<f64> = (0..d).map(|_| if s > 0.0 { rng.gen_range(-s..s) } else { 0.0 }).collect();
                let [w0, w1] = ev.family_widths;
                let width = if w1 > w0 { rng.gen_range(w0..w1) } else { w0 };
                let f = gaussian_packet(&g, &center, &momentum, width, &random_spinor(rep.n_spin, &mut rng))?;
                let series = run_evolution(&ec, &f)?;
                let h0 = series.hamiltonian.first().copied().unwrap_or(f64::NAN);
                let ratio_at = |t: f64| series.smoothing_at(t).map(|x: SmoothingTerms| x.lhs / h0);
                members.push(FamilyMember {
                    ratios_at: ev.report_times.iter().map(|&t| ratio_at(t)).collect(),
                    ratio: series.smoothing_ratio(),
                    center,
                    momentum,
                    width,
                    mass_drift: series.mass_drift(),
                    energy_bound_holds: series.energy_bound_holds(),
                });
            }
            let finite = |r: Option<f64>| r.filter(|x| x.is_finite());
            let all_finite = members.iter().all(|m| finite(m.ratio).is_some() && m.ratios_at.iter().all(|r| finite(*r).is_some()));
            let max_of = |get: &dyn Fn(&FamilyMember) -> Option<f64>| members.iter().filter_map(get).fold(f64::NAN, f64::max);
            let summary = FamilySummary {
                schema_version: SCHEMA_VERSION,
                size: members.len(),
                t_final: ev.t_max,
                max_ratio: max_of(&|m| m.ratio),
                max_ratio_at: (0..ev.report_times.len()).map(|i| max_of(&|m| m.ratios_at[i])).collect(),
                report_times: ev.report_times.clone(),
                all_finite,
                finite_horizon: true,
                members,
            };
            write_json(out, "summary.json", &summary)?;
            Ok((EvolveReport::Family(summary), Outcome::Pass))
        }
        EvolveMode::Zitterbewegung => {
            let mut modes = ev.zitter_modes.clone();
            modes.resize(d, 0);
            let f = zitterbewegung_initial(&g, &rep, &modes, cfg.mass, ev.zitter_positive, ev.zitter_negative)?;
            let trace = zitterbewegung_trace(&f, cfg.mass, &rep, ev.t_max, ev.dt)?;
            write_trace(&out.join("zitterbewegung.csv"), &trace.times, &trace.x, &trace.alpha)?;
            let fit = zitterbewegung_fit(&trace, cfg.mass)?;
            let summary = ZitterSummary { schema_version: SCHEMA_VERSION, modes, fit };
            write_json(out, "summary.json", &summary)?;
            Ok((EvolveReport::Zitterbewegung(summary), Outcome::Pass))
        }
    }
}

fn write_trace(path: &Path, times: &[f64], x: &[Vec<f64>], alpha: &[Vec<f64>]) -> Result<()> {
    use std::io::Write;
    let mut w = BufWriter::new(File::create(path)?);
    let d = x.first().map_or(0, Vec::len);
    let mut head = vec!["t".to_string()];
    head.extend((1..=d).map(|j| format!("x{j}")));
    head.extend((1..=d).map(|j| format!("alpha{j}")));
    writeln!(w, "{}", head.join(","))?;
    for (i, t) in times.iter().enumerate() {
        let row: Vec<String> = std::iter::once(*t).chain(x[i].iter().copied()).chain(alpha[i].iter().copied()).map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Serialize)]
pub struct SpectrumEntry {
    pub lambda: f64,
    pub residual: f64,
    pub virial_residual: f64,
    pub expanded_residual: f64,
    /// I₁ … I₅.
    pub terms: [f64; 5],
    pub chain_holds: bool,
}

#[derive(Serialize)]
pub struct SpectrumManifest {
    pub schema_version: u32,
    pub window: [f64; 2],
    pub entries: Vec<SpectrumEntry>,
}

pub fn spectrum(cfg: &ExperimentConfig, out: &Path) -> Result<(SpectrumManifest, Outcome)> {
    let g = grid_for(cfg)?;
    let rep = rep_for(cfg)?;
    let m = cfg.mass;
    let window = match cfg.spectrum.window {
        Some(w) => w,
        None if m > 0.0 => [-0.99 * m, 0.99 * m],
        None => bail!("the massless case has no gap; set spectrum.window"),
    };
    let zero = PotentialSpec::zero();
    let pot = cfg.potential.as_ref().unwrap_or(&zero);
    let prop = Propagator::new(&g, m, &rep, Some(pot))?;
    let pairs = eigensolve(&prop, cfg.spectrum.count, (window[0], window[1]), &cfg.spectrum.options)?;
    let mut entries = Vec::new();
    for p in &pairs {
        let v = verify_virial_on_eigenstate(m, pot, &rep, p.lambda, &p.field)?;
        entries.push(SpectrumEntry {
            lambda: p.lambda,
            residual: p.residual,
            virial_residual: v.direct_residual,
            expanded_residual: v.expanded_residual,
            terms: v.terms,
            chain_holds: v.chain_holds,
        });
    }
    let manifest = SpectrumManifest { schema_version: SCHEMA_VERSION, window, entries };
    write_json(out, "spectrum.json", &manifest)?;
    Ok((manifest, Outcome::Pass))
}
