//! Acceptance suite: one line per criterion, run with
//! `cargo test -p dirac-virial --test acceptance`.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use dirac_virial::clifford::{matrix_identity_check, spinor_dim};
use dirac_virial::corpus::{corpus, envelope, gaussian_packet};
use dirac_virial::evolution::*;
use dirac_virial::matrix::CMat;
use dirac_virial::multipliers::kinetic_lower_bound_sweep;
use dirac_virial::norms::*;
use dirac_virial::operators::{apply_h0, apply_hd, apply_ig, lattice_momentum, plane_wave};
use dirac_virial::potentials::*;
use dirac_virial::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot pass as stated; they still print FAIL.
const UNATTAINABLE: &[(usize, &str)] =
    &[(4, "the c_δ² series tends to 1/(δ ln 2), half of the stated asymptotic")];

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { pass: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, msg: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {msg}", if ok { "ok  " } else { "FAIL" }));
    }

    fn info(&mut self, msg: String) {
        self.lines.push(format!("info {msg}"));
    }

    fn within(&mut self, elapsed: Duration, limit_s: f64) {
        let s = elapsed.as_secs_f64();
        self.check(s < limit_s, format!("runtime {s:.1} s < {limit_s} s"));
    }
}

type Criterion = fn() -> Result<Outcome>;

fn grid(d: usize, n: usize, l: f64) -> Arc<Grid64> {
    Grid::new(GridSpec::new(d, n, l)).expect("valid grid")
}

fn unit_spinor(ns: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..ns).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Refinement is adequate when the error drops fourfold per doubling or is
/// already at roundoff.
fn second_order(coarse: f64, fine: f64) -> bool {
    fine <= coarse / 4.0 || fine <= 1e-12
}

fn c1_clifford() -> Result<Outcome> {
    let t = Instant::now();
    let mut o = Outcome::new();
    let mut worst = 0.0f64;
    for d in 1..=8 {
        let rep = build_dirac_matrices::<f64>(d)?;
        let r = verify_clifford(&rep);
        worst = worst.max(r);
        let expect = 1usize << ((d + 1) / 2);
        o.check(r <= 1e-12 && rep.n_spin == expect && spinor_dim(d) == expect, format!("d={d}: N={} residual {r:.1e}", rep.n_spin));
    }
    o.info(format!("worst residual {worst:.1e}"));
    o.within(t.elapsed(), 1.0);
    Ok(o)
}

fn c2_algebraic() -> Result<Outcome> {
    let t = Instant::now();
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = [2usize, 4, 8][rng.gen_range(0..3)];
        let mut draw = || CMat::from_fn(n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let (tm, am) = (draw(), draw());
        let scale: f64 = tm.sup_norm() * tm.sup_norm() * am.sup_norm() * (n * n) as f64;
        worst = worst.max(matrix_identity_check(&tm, &am)? / scale);
    }
    o.check(worst <= 1e-12, format!("[T,{{T,A}}] = [T²,A] on 1000 random pairs: worst scaled residual {worst:.1e}"));

    // [H_D,{H_D,A}]f = [H₀,A]f for a cutoff and for the enveloped dilation generator.
    let d = 2;
    let rep = build_dirac_matrices::<f64>(d)?;
    let spin = unit_spinor(rep.n_spin, 21);
    let mut alg = Vec::new();
    let mut pos = Vec::new();
    for n in [32usize, 64, 128] {
        let g = grid(d, n, 8.0);
        let f = gaussian_packet(&g, &[-0.7, 0.4], &[0.5, 0.5], 0.5, &spin)?;
        let env = envelope(&g);
        let chi: Vec<f64> = g.radii().iter().map(|&r| (-r * r / 4.0).exp()).collect();
        let a_chi = |x: &Field| x.mul_node_weights(&chi);
        let a_ig = |x: &Field| apply_ig(&x.mul_node_weights(&env)).mul_node_weights(&env);
        let hd = |x: &Field| apply_hd(x, 0.7, &rep).expect("matching rep");
        let mut worst = 0.0f64;
        for a in [&a_chi as &dyn Fn(&Field) -> Field, &a_ig] {
            let anti = |x: &Field| hd(&a(x)).add(&a(&hd(x)));
            let lhs = hd(&anti(&f)).sub(&anti(&hd(&f)));
            let rhs = apply_h0(&a(&f)).sub(&a(&apply_h0(&f)));
            worst = worst.max(lhs.sub(&rhs).l2_norm() / rhs.l2_norm());
        }
        alg.push(worst);
        let h0f = apply_h0(&f);
        let comm = apply_h0(&apply_ig(&f)).sub(&apply_ig(&h0f));
        let want = f.inner(&h0f) * 2.0;
        pos.push((f.inner(&comm) - want).norm() / want.norm());
    }
    o.check(
        alg[2] <= 1e-6 && second_order(alg[1], alg[2]),
        format!("[H_D,{{H_D,A}}] = [H₀,A] at n=32/64/128: {:.1e} {:.1e} {:.1e}", alg[0], alg[1], alg[2]),
    );
    o.check(
        pos[2] <= 1e-6 && second_order(pos[0], pos[1]) && second_order(pos[1], pos[2]),
        format!("⟨f,[H₀,iG]f⟩ = 2⟨f,H₀f⟩ at n=32/64/128: {:.1e} {:.1e} {:.1e}", pos[0], pos[1], pos[2]),
    );
    o.within(t.elapsed(), 120.0);
    Ok(o)
}

fn norm_grids() -> [(usize, Arc<Grid64>); 3] {
    [(3, grid(3, 32, 8.0)), (4, grid(4, 16, 8.0)), (5, grid(5, 12, 8.0))]
}

fn c3_hardy() -> Result<Outcome> {
    let t = Instant::now();
    let mut o = Outcome::new();
    for (d, g) in norm_grids() {
        let mut worst = 0.0f64;
        let mut all = true;
        for u in corpus(&g, 2, 300 + d as u64, 200) {
            let h = verify_hardy(&u)?;
            all &= h.holds(1e-6);
            worst = worst.max(h.ratio());
        }
        o.check(all, format!("d={d}: 200 fields satisfy Hardy with 4/(d−2)², largest ratio {worst:.3}"));
    }
    let sigmas = [0.4, 0.2, 0.1, 0.05, 0.025];
    let ratios: Vec<f64> = sigmas.iter().map(|&s| hardy_radial_family(3, s, 20.0).map(|h| h.ratio())).collect::<Result<_>>()?;
    let monotone = ratios.windows(2).all(|w| w[1] > w[0]);
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    o.check(
        monotone && max > 0.9 && ratios.iter().all(|&r| r <= 1.0),
        format!("near-extremal family σ={sigmas:?}: ratios {:.3?}", ratios),
    );
    // The same family sampled on a Cartesian grid, for comparison.
    let g = grid(3, 64, 8.0);
    let mut grid_ratios = Vec::new();
    for s in [0.4, 0.2, 0.1] {
        let l = g.half_length();
        let u = Field::from_fn(&g, 1, |x, out| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cut = if r <= 1.0 { 1.0 } else { 0.5 * (1.0 + (std::f64::consts::PI * r.ln() / (0.8 * l).ln()).cos()).max(0.0) };
            let cut = if r >= 0.8 * l { 0.0 } else { cut };
            out[0] = C::new(r.powf(-0.5 + s) * cut, 0.0);
        });
        grid_ratios.push(verify_hardy(&u)?.ratio());
    }
    o.info(format!("grid-sampled family σ=[0.4, 0.2, 0.1] at n=64: ratios {grid_ratios:.3?}"));
    o.within(t.elapsed(), 120.0);
    Ok(o)
}

fn c4_appendix() -> Result<Outcome> {
    let t = Instant::now();
    let mut o = Outcome::new();
    let delta = 0.25;
    for (d, g) in norm_grids() {
        let mut all = true;
        let (mut r1, mut r2) = (0.0f64, 0.0f64);
        for u in corpus(&g, 2, 400 + d as u64, 200) {
            let w = verify_weighted_bounds(&u, delta)?;
            all &= w.holds(1e-6);
            r1 = r1.max(w.lhs_morrey / w.rhs_morrey);
            r2 = r2.max(w.lhs_spherical / w.rhs_spherical);
        }
        o.check(all, format!("d={d}, δ={delta}: both weighted bounds on 200 fields, largest ratios {r1:.3} {r2:.3}"));
    }
    let mut bracket = true;
    for dl in [0.05, 0.1, 0.25, 0.45] {
        let j = c_delta_truncation(dl, 1e-6);
        let a = c_delta(dl, j)?;
        let b = c_delta(dl, 2 * j)?;
        let c = c_delta(dl, 8 * j)?;
        bracket &= a.partial <= b.partial && b.partial <= c.partial && c.partial <= a.upper() && c.partial <= b.upper();
    }
    o.check(bracket, "partial sums increase in J and stay below partial + tail bound".into());
    let dl = 0.05;
    let series = c_delta_converged(dl)?.upper();
    let stated = c_delta_asymptotic(dl);
    let limit = 1.0 / (dl * std::f64::consts::LN_2);
    o.check(
        rel(series, stated) <= 0.2,
        format!("δ={dl}: c_δ² = {series:.3} against 2/(δ ln 2) = {stated:.3}, off by {:.1}%", 100.0 * rel(series, stated)),
    );
    o.info(format!("δ={dl}: against 1/(δ ln 2) = {limit:.3}, off by {:.2}%", 100.0 * rel(series, limit)));
    o.within(t.elapsed(), 120.0);
    Ok(o)
}

fn c5_virial() -> Result<Outcome> {
    let t = Instant::now();
    let mut o = Outcome::new();
    let d = 3;
    let rep = build_dirac_matrices::<f64>(d)?;
    let m = 1.0;

    let g = grid(d, 32, 8.0);
    let free = PotentialSpec::zero();
    let mut worst = 0.0f64;
    for modes in [[1i64, 2, -1], [0, 0, 0], [3, -1, 2], [-16, 5, 0]] {
        let p = lattice_momentum(&g, &modes)?;
        let mut sym = rep.alpha_dot(&p);
        sym.add_scaled(C::new(m, 0.0), &rep.beta);
        let (vals, vecs) = sym.hermitian_eigen()?;
        for c in [0, rep.n_spin - 1] {
            let u: Vec<Complex64> = (0..rep.n_spin).map(|i| vecs.get(i, c)).collect();
            let psi = plane_wave(&g, &modes, &u)?;
            let r = verify_virial_on_eigenstate(m, &free, &rep, vals[c], &psi)?;
            worst = worst.max(r.direct_residual);
        }
    }
    o.check(worst <= 1e-10, format!("free plane-wave eigenstates: worst |Re⟨Hψ,Lψ⟩|/(‖ψ‖‖Lψ‖) = {worst:.1e}"));

    let well = PotentialSpec::gaussian_well(2.0, 1.5);
    let mut levels = Vec::new();
    let mut expanded = Vec::new();
    for n in [32usize, 48] {
        let g = grid(d, n, 8.0);
        let prop = Propagator::new(&g, m, &rep, Some(&well))?;
        let pairs = eigensolve(&prop, 2, (-0.99, 0.99), &EigenOptions::default())?;
        let mut direct = 0.0f64;
        let mut exp = 0.0f64;
        for p in &pairs {
            let r = verify_virial_on_eigenstate(m, &well, &rep, p.lambda, &p.field)?;
            direct = direct.max(r.direct_residual);
            exp = exp.max(r.expanded_residual);
        }
        o.check(
            !pairs.is_empty() && direct <= 1e-5,
            format!("well, n={n}: {} gap eigenpairs, λ={:.6}, direct residual {direct:.1e}, expanded {exp:.1e}", pairs.len(), pairs.first().map_or(f64::NAN, |p| p.lambda)),
        );
        levels.push(pairs.first().map_or(f64::NAN, |p| p.lambda));
        expanded.push(exp);
    }
    o.check(expanded[1] < expanded[0], format!("expanded residual improves under refinement: {:.2e} → {:.2e}", expanded[0], expanded[1]));
    o.info(format!("lowest gap level n=32 vs 48 differs by {:.1e}", (levels[0] - levels[1]).abs()));

    let g = grid(d, 32, 8.0);
    let mut worst = 0.0f64;
    let mut worst_analytic = 0.0f64;
    let pots = [
        PotentialSpec::smooth_electrostatic(0.3, 0.5),
        PotentialSpec::smooth_lorentz_scalar(0.3, 0.5),
        PotentialSpec::smooth_anomalous_magnetic(0.3, 0.5),
        PotentialSpec::gaussian_well(1.0, 1.0),
    ];
    for (k, psi) in corpus(&g, rep.n_spin, 55, 8).enumerate() {
        let c = v2_identity_check(&psi, m, &pots[k % pots.len()], &rep)?;
        worst = worst.max(c.composed_residual());
        worst_analytic = worst_analytic.max(c.analytic_residual());
    }
    o.check(worst <= 1e-8, format!("potential rewrite, composed commutators, 8 states: worst {worst:.1e}"));
    o.info(format!("same with closed-form commutators (discretization error): worst {worst_analytic:.1e}"));
    o.within(t.elapsed(), 600.0);
    Ok(o)
}

fn c6_certificates() -> Result<Outcome> {
    let t = Instant::now();
    let mut o = Outcome::new();
    let mesh = RadialMesh::default();
    let unit = PotentialSpec::electrostatic(1.0);
    let uc = extract_constants(&unit, WeightFamily::Stationary, 3, &mesh)?;
    let thr = coupling_threshold(|c| certify_stationary(3, 0.0, &unit, c), &uc, 10.0)?;
    o.check((thr - 0.25).abs() <= 1e-12, format!("d=3, m=0 electrostatic threshold ν* = {thr:.15}"));
    let verdicts: Vec<Verdict> = (0..=50)
        .map(|k| certify_stationary(3, 0.0, &unit, &uc.scaled(k as f64 * 0.01)).map(|c| c.verdict))
        .collect::<Result<_>>()?;
    let flips = verdicts.windows(2).filter(|w| w[0] != w[1]).count();
    o.check(
        flips == 1 && verdicts[24] == Verdict::Absent && verdicts[25] == Verdict::Inconclusive,
        format!("verdict monotone over ν ∈ [0, 0.5]: {flips} change, ABSENT at 0.24, INCONCLUSIVE at 0.25"),
    );
    let mut worst = 0.0f64;
    let mut same = true;
    for d in [3usize, 4] {
        for pot in [PotentialSpec::electrostatic(0.1), PotentialSpec::lorentz_scalar(0.1), PotentialSpec::anomalous_magnetic(0.1)] {
            let mc = extract_constants(&pot, WeightFamily::Stationary, d, &mesh)?;
            let cf = closed_form_stationary(&pot, d).expect("homogeneous");
            for (a, b) in mc.as_array().iter().zip(&cf) {
                if a.is_infinite() || b.is_infinite() {
                    same &= a == b;
                } else {
                    worst = worst.max(rel(*a, *b).min((a - b).abs()));
                }
            }
            let mut closed = mc.clone();
            [closed.c1, closed.c2, closed.c3, closed.c4] = cf;
            let a = certify_stationary(d, 1.0, &pot, &mc)?;
            let b = certify_stationary(d, 1.0, &pot, &closed)?;
            same &= a.verdict == b.verdict;
            let (la, lb) = (a.inequalities[0].lhs, b.inequalities[0].lhs);
            if la.is_finite() || lb.is_finite() {
                worst = worst.max(rel(la, lb));
            }
        }
    }
    o.check(worst <= 1e-10 && same, format!("m=1 condition with mesh vs closed-form constants, homogeneous potentials: worst {worst:.1e}"));
    o.within(t.elapsed(), 10.0);
    Ok(o)
}

fn c7_kinetic() -> Result<Outcome> {
    let t = Instant::now();
    let mut o = Outcome::new();
    let radii = [0.5, 1.0, 2.0];
    for (d, n) in [(3usize, 128usize), (4, 24), (5, 12)] {
        let g = grid(d, n, 8.0);
        let mut worst = f64::INFINITY;
        let mut third_zero = true;
        for f in corpus(&g, 2, 700 + d as u64, 100) {
            for r in kinetic_lower_bound_sweep(d, &radii, &f)? {
                worst = worst.min(r.margin / r.k);
                third_zero &= d != 3 || r.rhs_terms[2] == 0.0;
            }
        }
        o.check(worst >= -1e-4, format!("d={d}, n={n}: 100 fields × R ∈ {radii:?}, smallest margin/K = {worst:.3e}"));
        if d == 3 {
            o.check(third_zero, "d=3: the |x|⁻³ term vanishes identically".into());
        }
    }
    o.within(t.elapsed(), 600.0);
    Ok(o)
}

fn c8_evolution() -> Result<Outcome> {
    let t = Instant::now();
    let mut o = Outcome::new();
    let d = 3;
    let rep = build_dirac_matrices::<f64>(d)?;
    let spin = unit_spinor(rep.n_spin, 8);

    let g = grid(d, 32, 8.0);
    let pot = PotentialSpec::smooth_electrostatic(0.3, 0.5);
    let prop = Propagator::new(&g, 1.0, &rep, Some(&pot))?;
    let mut psi = gaussian_packet(&g, &[0.5, 0.0, 0.0], &[0.3, 0.0, 0.2], 1.5, &spin)?;
    let n0 = psi.l2_norm();
    let mut drift = 0.0f64;
    for _ in 0..10_000 {
        psi = prop.step(&psi, 0.01);
        drift = drift.max((psi.l2_norm() - n0).abs() / n0);
    }
    o.check(drift <= 1e-11, format!("10⁴ Strang steps (n=32): norm drift {drift:.1e}"));

    let g = grid(d, 64, 8.0);
    let f = gaussian_packet(&g, &[0.5, 0.0, -0.3], &[0.3, 0.2, 0.0], 1.5, &spin)?;
    let mut cfg = EvolutionConfig::new(0.05, 1.0, 1.0);
    cfg.smoothing = false;
    let s = run_evolution(&cfg, &f)?;
    o.check(
        s.mass_drift() <= 1e-12 && s.hamiltonian_drift() <= 1e-12,
        format!("V=0, n=64, 20 steps: mass drift {:.1e}, Hamiltonian drift {:.1e}", s.mass_drift(), s.hamiltonian_drift()),
    );
    let worst_t = s.t_term.iter().zip(&s.t_bound).map(|(a, b)| a.abs() / b).fold(0.0, f64::max);
    o.check(s.t_term_holds() == Some(true), format!("V=0: |Im⟨H_Dψ,iG_φψ⟩| ≤ C_d(‖∇ψ‖²+m²‖ψ‖²), C_3 = {:.4}, largest ratio {worst_t:.3}", t_term_constant(d)));

    let eps = 0.5;
    let fam = WeightFamily::Evolutionary { epsilon: eps };
    let unit = PotentialSpec::smooth_electrostatic(1.0, eps);
    let uc = extract_constants(&unit, fam, d, &RadialMesh::default())?;
    let thr = coupling_threshold(|c| certify_smoothing(d, 0.0, &unit, c, eps), &uc, 10.0)?;
    let pot = PotentialSpec::smooth_electrostatic(0.5 * thr, eps);
    let pc = extract_constants(&pot, fam, d, &RadialMesh::default())?;
    let cert = certify_smoothing(d, 0.0, &pot, &pc, eps)?;
    let mut cfg = EvolutionConfig::new(0.1, 2.0, 0.0);
    cfg.potential = Some(pot);
    cfg.kato_a = pc.kato_a;
    let s = run_evolution(&cfg, &f)?;
    let worst_e = s.energy_bound.map_or(f64::NAN, |b| s.hd_norm.iter().fold(0.0f64, |a, &h| a.max(h / b)));
    o.check(
        cert.verdict == Verdict::Bounded && s.energy_bound_holds() == Some(true) && s.t_term_holds() == Some(true),
        format!("certified ν = {:.4} (a = {:.3}): energy bound at all 21 samples, largest ‖H_Dψ‖²/bound {worst_e:.3}", 0.5 * thr, pc.kato_a.unwrap_or(f64::NAN)),
    );

    let gpot = PotentialSpec::smooth_electrostatic(0.2, 0.5);
    let prop = Propagator::new(&g, 1.0, &rep, Some(&gpot))?;
    let profile = MultiplierProfile::new(d, 1.0)?;
    let res: Vec<f64> =
        [2e-3, 1e-3, 5e-4].iter().map(|&dt| gen_id_check(&prop, &profile, &f, dt).map(|r| r.time_residual)).collect::<Result<_>>()?;
    let orders: Vec<f64> = res.windows(2).map(|w| w[0] / w[1]).collect();
    o.check(
        orders.iter().all(|&q| q >= 3.5),
        format!("time-dependent virial identity, dt = 2e-3/1e-3/5e-4: residual {:.2e} {:.2e} {:.2e}, ratios {:.2?}", res[0], res[1], res[2], orders),
    );
    let off = gaussian_packet(&g, &[3.0, 0.0, -0.3], &[0.3, 0.2, 0.0], 1.0, &spin)?;
    let mut worst = 0.0f64;
    for r_big in [1.0, 2.0] {
        let r = gen_id_check(&prop, &MultiplierProfile::new(d, r_big)?, &off, 1e-3)?;
        worst = worst.max(r.spatial_residual);
    }
    o.check(worst <= 1e-3, format!("identity closes against −K − ½⟨ψ,[V,L_φ]ψ⟩ at dt=1e-3: relative {worst:.1e}"));
    let centred = gen_id_check(&prop, &profile, &f, 1e-3)?;
    o.info(format!(
        "packet centred on the origin: relative {:.1e} (limited by the |x|⁻¹ weight of iG_φ at h = 0.25)",
        centred.spatial_residual
    ));
    o.within(t.elapsed(), 900.0);
    Ok(o)
}

fn c9_smoothing() -> Result<Outcome> {
    let t = Instant::now();
    let mut o = Outcome::new();
    let (d, n, l) = (4usize, 32usize, 18.0);
    let eps = 0.25;
    let fam = WeightFamily::Evolutionary { epsilon: eps };
    let unit = PotentialSpec::smooth_electrostatic(1.0, eps);
    let uc = extract_constants(&unit, fam, d, &RadialMesh::default())?;
    let thr = coupling_threshold(|c| certify_smoothing(d, 0.0, &unit, c, eps), &uc, 10.0)?;
    let pot = PotentialSpec::smooth_electrostatic(0.5 * thr, eps);
    let pc = extract_constants(&pot, fam, d, &RadialMesh::default())?;
    let cert = certify_smoothing(d, 0.0, &pot, &pc, eps)?;
    o.check(cert.verdict == Verdict::Bounded, format!("ν = {:.4}, ε = {eps}: {:?} ({:?})", 0.5 * thr, cert.verdict, cert.theorem));

    let g = grid(d, n, l);
    let (t1, t2) = (6.0, 12.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut max1, mut max2) = (0.0f64, 0.0f64);
    let mut finite = true;
    let mut reach = 0.0f64;
    for _ in 0..20 {
        let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let p: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let w = rng.gen_range(1.0..1.5);
        let spin: Vec<Complex64> = (0..4).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let f = gaussian_packet(&g, &c, &p, w, &spin)?;
        let mut cfg = EvolutionConfig::new(0.5, t2, 0.0);
        cfg.cadence = 2;
        cfg.potential = Some(pot.clone());
        cfg.kato_a = pc.kato_a;
        let s = run_evolution(&cfg, &f)?;
        let h0 = s.hamiltonian[0];
        let r1 = s.smoothing_at(t1).map_or(f64::NAN, |x| x.lhs / h0);
        let r2 = s.smoothing_at(t2).map_or(f64::NAN, |x| x.lhs / h0);
        finite &= r1.is_finite() && r2.is_finite() && s.aborted_at.is_none();
        max1 = max1.max(r1);
        max2 = max2.max(r2);
        reach = reach.max(c.iter().map(|v| v * v).sum::<f64>().sqrt() + 3.0 * w + t2);
    }
    o.check(finite, "20 packets, all ratios finite".into());
    o.check(
        rel(max2, max1) <= 0.1,
        format!("max ratio T={t1}: {max1:.4}, T={t2}: {max2:.4}, change {:+.1}%", 100.0 * (max2 / max1 - 1.0)),
    );
    o.check(reach < l, format!("fronts stay inside the box: |x₀| + 3w + T ≤ {reach:.2} < ℓ = {l}"));
    o.within(t.elapsed(), 1800.0);
    Ok(o)
}

fn c10_zitterbewegung() -> Result<Outcome> {
    let t = Instant::now();
    let mut o = Outcome::new();
    let rep = build_dirac_matrices::<f64>(3)?;
    let g = grid(3, 8, std::f64::consts::PI);
    for (m, modes) in [(1.0, [1i64, 0, 0]), (0.0, [1, 1, 0]), (2.0, [0, 2, 1])] {
        let f = zitterbewegung_initial(&g, &rep, &modes, m, 1.0, 1.0)?;
        let fit = zitterbewegung_fit(&zitterbewegung_trace(&f, m, &rep, 20.0, 0.05)?, m)?;
        o.check(
            fit.rel_error <= 0.01,
            format!("m={m}, p={modes:?}: ω = {:.6}, 2E_p = {:.6}, amplitude {:.3}", fit.omega, fit.expected, fit.amplitude),
        );
    }
    let pure = zitterbewegung_initial(&g, &rep, &[1, 0, 0], 1.0, 1.0, 0.0)?;
    let fit = zitterbewegung_fit(&zitterbewegung_trace(&pure, 1.0, &rep, 20.0, 0.05)?, 1.0)?;
    o.check(fit.amplitude <= 1e-10, format!("positive energy only: amplitude {:.1e}", fit.amplitude));
    let mixed = pure.add(&zitterbewegung_initial(&g, &rep, &[0, 1, 0], 1.0, 1.0, 1.0)?);
    let rejected = zitterbewegung_fit(&zitterbewegung_trace(&mixed, 1.0, &rep, 5.0, 0.05)?, 1.0).is_err();
    o.check(rejected, "two-momentum state rejected by the frequency fit".into());
    o.within(t.elapsed(), 60.0);
    Ok(o)
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, Criterion); 10] = [
        (1, "Clifford relations", c1_clifford),
        (2, "algebraic identities", c2_algebraic),
        (3, "Hardy inequality", c3_hardy),
        (4, "weighted Morrey and spherical bounds", c4_appendix),
        (5, "stationary virial identity", c5_virial),
        (6, "certificates", c6_certificates),
        (7, "kinetic lower bound", c7_kinetic),
        (8, "evolution", c8_evolution),
        (9, "smoothing ratio", c9_smoothing),
        (10, "Zitterbewegung", c10_zitterbewegung),
    ];
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut unexpected = 0;
    let mut summary = Vec::new();
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let (pass, lines) = match run() {
            Ok(o) => (o.pass, o.lines),
            Err(e) => (false, vec![format!("FAIL error: {e}")]),
        };
        let known = UNATTAINABLE.iter().find(|(k, _)| *k == id).map(|(_, why)| *why);
        if !pass && known.is_none() {
            unexpected += 1;
        }
        for l in &lines {
            println!("    {l}");
        }
        let verdict = if pass { "PASS" } else { "FAIL" };
        let note = match (pass, known) {
            (false, Some(why)) => format!(" (expected: {why})"),
            _ => String::new(),
        };
        let line = format!("criterion {id:>2} {verdict} {name} [{:.1} s]{note}", start.elapsed().as_secs_f64());
        println!("{line}");
        summary.push(line);
    }
    println!("\nacceptance summary");
    for l in &summary {
        println!("{l}");
    }
    if unexpected > 0 {
        println!("{unexpected} criterion(s) failed unexpectedly");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
