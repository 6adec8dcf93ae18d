//! Subcommand implementations. Every command returns whether all asserted
//! properties passed; hard errors are split into config (exit 2) and
//! numeric (exit 3) classes.

use std::fmt;
use std::path::{Path, PathBuf};

use frameflow_core::bundled;
use frameflow_core::dolgopyat::{measure_inputs, DolgopyatLab};
use frameflow_core::lie::{Family, LieAlgebraModel};
use frameflow_core::ncp::{chart_to_nil, default_delta_grid, ncp_witness_search};
use frameflow_core::rng::SplitMix64;
use frameflow_core::schottky::{GroupFamily, GroupFile, SchottkyGroup};
use frameflow_core::shift::CylFn;
use frameflow_core::suspension::{default_base, fit_exponential, Observable, SuspensionModel};
use frameflow_core::thermo::{
    critical_exponent, normalize_potential, nu_u, poincare_slope, rpf_solve, volume_entropy_bound,
    SymbolicSystem,
};
use frameflow_core::twist::{
    decay_rate_for, l2_norm, norm_1b, spectral_radius_estimate, RhoSpec, TwistRep, TwistedFn,
    TwistedOperator,
};
use num_complex::Complex64;

use crate::csvout::{b as pb, f as pf, Csv};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, fo: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(fo, "config error: {m}"),
            CliError::Numeric(m) => write!(fo, "numeric error: {m}"),
        }
    }
}

impl From<frameflow_core::Error> for CliError {
    fn from(e: frameflow_core::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CmdResult = Result<bool, CliError>;

pub fn load_group(path: &Path) -> Result<SchottkyGroup, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let gf: GroupFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid group JSON: {e}")))?;
    let group = SchottkyGroup::from_file(&gf)
        .map_err(|e| CliError::Config(format!("invalid group data: {e}")))?;
    group
        .ping_pong_check()
        .map_err(|e| CliError::Config(format!("group fails ping-pong: {e}")))?;
    Ok(group)
}

fn parse_family(family: &str, n: usize) -> Result<Family, CliError> {
    match family {
        "so" => Ok(Family::SoN1(n)),
        "su" => Ok(Family::SuN1(n)),
        "sp" => Ok(Family::SpN1(n)),
        "sl3" => Ok(Family::Sl3),
        other => Err(CliError::Config(format!("unknown family {other}; use so|su|sp|sl3"))),
    }
}

fn lie_rows(csv: &mut Csv, fam: Family, t: f64, seed: u64) -> Result<bool, CliError> {
    let model = LieAlgebraModel::new(fam)?;
    let name = fam.name();
    let mut all = true;
    let span = model.verify_bracket_span()?;
    all &= span.pass;
    csv.row(&[
        format!("{name} bracket_span"),
        format!("{}", span.achieved_dim),
        format!("{}", span.target_dim),
        pf(span.residual),
        pb(span.pass),
    ]);
    let two = model.verify_2alpha_bracket()?;
    all &= two.pass;
    csv.row(&[
        format!("{name} two_alpha{}", if two.skipped { " (skipped)" } else { "" }),
        format!("{}", two.achieved_dim),
        format!("{}", two.target_dim),
        pf(two.residual),
        pb(two.pass),
    ]);
    let grading = model.ad_exp_grading(t)?;
    let worst = grading.factors.iter().map(|f| f.2).fold(0.0f64, f64::max);
    all &= grading.pass;
    csv.row(&[
        format!("{name} ad_exp_grading"),
        pf(worst),
        pf(1e-8),
        pf(worst),
        pb(grading.pass),
    ]);
    let mut rng = SplitMix64::new(seed ^ 0x11E);
    let mut jac_worst: f64 = 0.0;
    for _ in 0..3 {
        let rand = |rng: &mut SplitMix64| {
            model.from_coords(&nalgebra::DVector::from_fn(model.dim, |_, _| rng.uniform(-1.0, 1.0)))
        };
        let (x, y, z) = (rand(&mut rng), rand(&mut rng), rand(&mut rng));
        let jac = model.bracket(&x, &model.bracket(&y, &z)?)?
            + model.bracket(&y, &model.bracket(&z, &x)?)?
            + model.bracket(&z, &model.bracket(&x, &y)?)?;
        jac_worst = jac_worst.max(jac.norm() / (1.0 + x.norm() * y.norm() * z.norm()));
    }
    let jac_pass = jac_worst <= 1e-9;
    all &= jac_pass;
    csv.row(&[
        format!("{name} jacobi"),
        pf(jac_worst),
        pf(1e-9),
        pf(jac_worst),
        pb(jac_pass),
    ]);
    let mut flip_worst: f64 = 0.0;
    for (label, basis) in &model.decomposition().roots {
        for v in basis {
            let tv = model.theta(v);
            let d = model.decompose(&tv)?;
            if let Some(opp) = d.component(label.neg()) {
                flip_worst = flip_worst.max((opp - &tv).norm());
            }
        }
    }
    let flip_pass = flip_worst <= 1e-9;
    all &= flip_pass;
    csv.row(&[
        format!("{name} theta_flip"),
        pf(flip_worst),
        pf(1e-9),
        pf(flip_worst),
        pb(flip_pass),
    ]);
    Ok(all)
}

pub fn lie_verify(family: &str, n: usize, t: f64, seed: u64, out: &Path) -> CmdResult {
    let fam = parse_family(family, n)?;
    let mut csv = Csv::new(
        "lie-verify",
        seed,
        &[("family", family.into()), ("n", n.to_string()), ("t", t.to_string())],
        &["identity_name", "achieved", "target", "residual", "pass"],
    );
    let all = lie_rows(&mut csv, fam, t, seed)?;
    csv.write(out)?;
    Ok(all)
}

pub fn limit_set(group_path: &Path, depth: usize, per_word: usize, seed: u64, out: &Path) -> CmdResult {
    let group = load_group(group_path)?;
    let samples = group.limit_set_sample(depth, per_word)?;
    let mut csv = Csv::new(
        "limit-set",
        seed,
        &[
            ("group", group_path.display().to_string()),
            ("depth", depth.to_string()),
            ("per_word", per_word.to_string()),
        ],
        &["index", "word", "re", "im"],
    );
    let mut ok = true;
    for (i, s) in samples.iter().enumerate() {
        ok &= group.disks[s.word[0] as usize].contains(s.z);
        let word = s
            .word
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(".");
        csv.row(&[i.to_string(), word, pf(s.z.re), pf(s.z.im)]);
    }
    csv.write(out)?;
    Ok(ok)
}

pub fn critexp(group_path: &Path, depth: usize, tol: f64, seed: u64, out: &Path) -> CmdResult {
    let group = load_group(group_path)?;
    if depth < 4 {
        return Err(CliError::Config("critexp depth must be at least 4".into()));
    }
    let mut csv = Csv::new(
        "critexp",
        seed,
        &[
            ("group", group_path.display().to_string()),
            ("depth", depth.to_string()),
            ("tol", tol.to_string()),
        ],
        &["depth", "delta", "bracket_lo", "bracket_hi", "poincare_lo_check", "poincare_hi_check"],
    );
    let bound = volume_entropy_bound(group.family);
    let mut deltas = Vec::new();
    let mut ok = true;
    for d in [depth - 2, depth] {
        let sys = SymbolicSystem::new(group.clone(), d)?;
        let ce = critical_exponent(&sys, tol)?;
        let lo_slope = poincare_slope(&group, ce.delta - 0.05, 12)?;
        let hi_slope = poincare_slope(&group, ce.delta + 0.05, 12)?;
        ok &= ce.delta > 0.0 && ce.delta < bound && lo_slope > 0.0 && hi_slope < 0.0;
        csv.row(&[
            d.to_string(),
            pf(ce.delta),
            pf(ce.bracket_lo),
            pf(ce.bracket_hi),
            pb(lo_slope > 0.0),
            pb(hi_slope < 0.0),
        ]);
        deltas.push(ce.delta);
    }
    ok &= (deltas[0] - deltas[1]).abs() <= 1e-3;
    csv.write(out)?;
    Ok(ok)
}

fn normalized_weights(
    group: &SchottkyGroup,
    depth: usize,
    a: f64,
) -> Result<(SymbolicSystem, Vec<f64>, Vec<f64>), CliError> {
    let sys = SymbolicSystem::new(group.clone(), depth)?;
    let delta = critical_exponent(&sys, 1e-9)?.delta;
    let sol0 = rpf_solve(&sys, &sys.roof_potential(delta))?;
    let fa = if a == 0.0 {
        normalize_potential(&sys, delta, 0.0, &sol0, &sol0)?
    } else {
        let sola = rpf_solve(&sys, &sys.roof_potential(delta + a))?;
        normalize_potential(&sys, delta, a, &sola, &sol0)?
    };
    let nuu = nu_u(&sol0);
    Ok((sys, fa, nuu))
}

#[allow(clippy::too_many_arguments)]
pub fn spectrum(
    group_path: &Path,
    depth: usize,
    a: f64,
    b: f64,
    ell: i64,
    kmax: usize,
    trials: usize,
    seed: u64,
    out: &Path,
) -> CmdResult {
    let group = load_group(group_path)?;
    let (sys, fa, nuu) = normalized_weights(&group, depth, a)?;
    let rep = TwistRep::new(b, if ell == 0 { RhoSpec::Trivial } else { RhoSpec::Character(ell) });
    let in_m0 = rep.in_m0(1.0);
    let op = TwistedOperator::new(&sys, fa, rep.clone())?;
    let mut csv = Csv::new(
        "spectrum",
        seed,
        &[
            ("group", group_path.display().to_string()),
            ("depth", depth.to_string()),
            ("a", a.to_string()),
            ("b", b.to_string()),
            ("ell", ell.to_string()),
            ("kmax", kmax.to_string()),
            ("rho_b_norm", pf(rep.rho_b_norm())),
        ],
        &["b", "ell", "k", "norm2", "rate", "pass"],
    );
    // One seeded orbit of norms for the record.
    let mut rng = SplitMix64::new(seed);
    let tower = sys.coarse_tower();
    let mut h = TwistedFn::Scalar(CylFn::from_values(
        sys.depth(),
        (0..sys.coarse().len())
            .map(|_| Complex64::new(rng.normal(), rng.normal()))
            .collect(),
    ));
    let nrm = norm_1b(&h, rep.rho_b_norm(), &tower)?;
    h.scale(1.0 / nrm.norm_1b);
    for k in 0..=kmax {
        csv.row(&[
            pf(b),
            ell.to_string(),
            k.to_string(),
            pf(l2_norm(&h, &nuu)),
            String::new(),
            String::new(),
        ]);
        if k < kmax {
            h = op.apply(&h)?;
        }
    }
    let report = spectral_radius_estimate(&op, &nuu, kmax, trials, seed)?;
    let pass = if in_m0 {
        report.rate < 1.0 - 1e-3
    } else if b == 0.0 && ell == 0 {
        // Trivial cell: the normalized operator fixes constants.
        let ones = TwistedFn::Scalar(CylFn::constant(sys.coarse(), Complex64::new(1.0, 0.0)));
        let (rate1, _) = decay_rate_for(&op, &ones, &nuu, kmax.min(10))?;
        (rate1 - 1.0).abs() <= 1e-3
    } else {
        true
    };
    csv.row(&[
        pf(b),
        ell.to_string(),
        "-1".to_string(),
        pf(report.rate_min),
        pf(report.rate),
        pb(pass),
    ]);
    csv.write(out)?;
    Ok(pass)
}

pub fn decay(
    group_path: &Path,
    depth: usize,
    tmax: f64,
    omega_phi: f64,
    omega_psi: f64,
    seed: u64,
    out: &Path,
) -> CmdResult {
    let group = load_group(group_path)?;
    let (sys, _fa, nuu) = normalized_weights(&group, depth, 0.0)?;
    let model = SuspensionModel::new(&sys, nuu, 2, depth + 4)?;
    let base = default_base(&model.obs_partition);
    let phi = Observable { base: base.clone(), omega: omega_phi, fiber: 0 };
    let psi = Observable { base, omega: omega_psi, fiber: 0 };
    let top = model.horizon.min(tmax);
    let t_grid: Vec<f64> = (0..60).map(|i| top * i as f64 / 59.0).collect();
    let curve = model.decay_curve(&phi, &psi, &t_grid)?;
    let fit = fit_exponential(&curve, 1e-12);
    let mut csv = Csv::new(
        "decay",
        seed,
        &[
            ("group", group_path.display().to_string()),
            ("depth", depth.to_string()),
            ("tmax", tmax.to_string()),
            ("horizon", pf(model.horizon)),
            ("omega_phi", omega_phi.to_string()),
            ("omega_psi", omega_psi.to_string()),
            ("eta_fit", pf(fit.eta)),
            ("r_squared", pf(fit.r_squared)),
            ("non_mixing_warning", curve.non_mixing_warning.to_string()),
        ],
        &["t", "corr", "abs_corr"],
    );
    for i in 0..curve.t.len() {
        csv.row(&[pf(curve.t[i]), pf(curve.corr[i]), pf(curve.abs_corr[i])]);
    }
    csv.write(out)?;
    Ok(!curve.non_mixing_warning && fit.r_squared >= 0.9 && fit.eta > 0.0)
}

pub fn ncp(
    group_path: &Path,
    eps_grid: &str,
    kappa: f64,
    depth: usize,
    seed: u64,
    out: &Path,
) -> CmdResult {
    let group = load_group(group_path)?;
    let (lo, hi) = parse_eps_grid(eps_grid)?;
    let samples = group.limit_set_sample(depth, 1)?;
    let pts: Vec<Complex64> = samples.iter().map(|s| s.z).collect();
    let two_dim = group.family == GroupFamily::Kleinian;
    let nil = chart_to_nil(&pts, two_dim);
    let model = nil[0].model;
    let dirs: Vec<frameflow_core::nil::NilPoint> = if two_dim {
        (0..8)
            .map(|i| {
                let phi = std::f64::consts::TAU * i as f64 / 8.0;
                model.point(vec![phi.cos(), phi.sin()], vec![]).unwrap()
            })
            .collect()
    } else {
        vec![
            model.point(vec![1.0], vec![]).unwrap(),
            model.point(vec![-1.0], vec![]).unwrap(),
        ]
    };
    let grid = default_delta_grid();
    let mut csv = Csv::new(
        "ncp",
        seed,
        &[
            ("group", group_path.display().to_string()),
            ("eps_grid", eps_grid.into()),
            ("kappa", kappa.to_string()),
            ("depth", depth.to_string()),
        ],
        &["x_index", "eps", "w_index", "delta_best", "pairing_over_eps", "witness", "found"],
    );
    let mut rng = SplitMix64::new(seed);
    let mut all_found = true;
    let mut min_delta = f64::INFINITY;
    for _ in 0..30 {
        let x = rng.below(nil.len());
        for ep in lo..=hi {
            let eps = 0.5f64.powi(ep as i32);
            for (wi, w) in dirs.iter().enumerate() {
                match ncp_witness_search(&nil, x, eps, w, kappa, &grid) {
                    Ok(res) => {
                        min_delta = min_delta.min(res.delta_best);
                        csv.row(&[
                            x.to_string(),
                            pf(eps),
                            wi.to_string(),
                            pf(res.delta_best),
                            pf(res.pairing_over_eps),
                            res.witness.to_string(),
                            "true".into(),
                        ]);
                    }
                    Err(frameflow_core::Error::NoWitness { .. }) => {
                        all_found = false;
                        csv.row(&[
                            x.to_string(),
                            pf(eps),
                            wi.to_string(),
                            String::new(),
                            String::new(),
                            String::new(),
                            "false".into(),
                        ]);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    csv.write(out)?;
    Ok(all_found && min_delta >= 0.5f64.powi(10))
}

fn parse_eps_grid(spec: &str) -> Result<(u32, u32), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 2 {
        return Err(CliError::Config(format!("eps-grid must be lo:hi, got {spec}")));
    }
    let lo: u32 = parts[0].parse().map_err(|_| CliError::Config("bad eps-grid".into()))?;
    let hi: u32 = parts[1].parse().map_err(|_| CliError::Config("bad eps-grid".into()))?;
    if lo > hi {
        return Err(CliError::Config("eps-grid lo must not exceed hi".into()));
    }
    Ok((lo, hi))
}

pub fn dolgopyat(
    group_path: &Path,
    b: f64,
    ell: i64,
    samples: usize,
    seed: u64,
    out: &Path,
) -> CmdResult {
    let group = load_group(group_path)?;
    let rep = TwistRep::new(b, if ell == 0 { RhoSpec::Trivial } else { RhoSpec::Character(ell) });
    if !rep.in_m0(1.0) {
        return Err(CliError::Config(
            "cell outside the large-frequency regime: need |b| > 1 or ell != 0".into(),
        ));
    }
    let inputs = measure_inputs(&group, std::slice::from_ref(&rep), seed ^ 0xD01)?;
    let lab = DolgopyatLab::build(group, inputs, rep.rho_b_norm())?;
    let cell_label = format!("b={b} ell={ell}");
    let report = lab.check_cell(rep, samples, seed)?;
    let mut csv = Csv::new(
        "dolgopyat",
        seed,
        &[
            ("group", group_path.display().to_string()),
            ("mode", format!("{:?}", lab.cfg.mode)),
            ("depth", lab.system.depth().to_string()),
            ("m1", lab.cfg.m1.to_string()),
            ("m2", lab.cfg.m2.to_string()),
            ("eps1", pf(lab.cfg.eps1)),
            ("eps2", pf(lab.cfg.eps2)),
            ("log_mu", pf(lab.cfg.mu_log)),
            ("samples", samples.to_string()),
        ],
        &["property", "cell", "measured", "bound", "pass"],
    );
    let rows: Vec<(&str, f64, f64, bool)> = vec![
        ("cone_log_lipschitz", report.cone_measured, report.cone_bound, report.cone_pass),
        ("l2_contraction_eta", report.eta, 0.999, report.eta_pass && report.eta <= 0.999),
        ("beta_lower", report.beta_min, 1.0 - report.rho_b_norm, report.beta_bounds_pass),
        ("beta_upper", report.beta_max, 1.0, report.beta_bounds_pass),
        ("beta_c1", report.beta_c1, report.beta_c1_bound, report.beta_c1_pass),
        (
            "component_size",
            report.component_max as f64,
            report.component_bound as f64,
            report.component_pass,
        ),
        ("h_trapping_lo", report.trapping_lo, 0.5, report.trapping_pass),
        ("h_trapping_hi", report.trapping_hi, 2.0, report.trapping_pass),
        (
            "domination_margin",
            report.domination_margin,
            0.0,
            report.domination_pass,
        ),
    ];
    let mut all = true;
    for (prop, measured, bound, pass) in rows {
        all &= pass;
        csv.row(&[prop.into(), cell_label.clone(), pf(measured), pf(bound), pb(pass)]);
    }
    csv.write(out)?;
    Ok(all)
}

/// Full experiment battery on the bundled groups; writes one CSV per tool.
pub fn all(seed: u64, threads: usize, out_dir: &Path) -> CmdResult {
    std::fs::create_dir_all(out_dir)?;
    let fuchsian_path = out_dir.join("groups/fuchsian.json");
    let kleinian_path = out_dir.join("groups/kleinian.json");
    write_group(&bundled::fuchsian(), &fuchsian_path)?;
    write_group(&bundled::kleinian(), &kleinian_path)?;
    let mut all_pass = true;

    // lie.csv over every bundled family.
    let mut lie_csv = Csv::new(
        "lie-verify",
        seed,
        &[("families", "so(2..4,1) su(2..3,1) sp(2,1) sl(3,R)".into()), ("t", "1".into())],
        &["identity_name", "achieved", "target", "residual", "pass"],
    );
    for fam in [
        Family::SoN1(2),
        Family::SoN1(3),
        Family::SoN1(4),
        Family::SuN1(2),
        Family::SuN1(3),
        Family::SpN1(2),
        Family::Sl3,
    ] {
        all_pass &= lie_rows(&mut lie_csv, fam, 1.0, seed)?;
    }
    lie_csv.write(&out_dir.join("lie.csv"))?;

    all_pass &= limit_set(&fuchsian_path, 6, 1, seed, &out_dir.join("limit_set.csv"))?;
    all_pass &= critexp(&fuchsian_path, 8, 1e-6, seed, &out_dir.join("critexp_fuchsian.csv"))?;
    all_pass &= critexp(&kleinian_path, 8, 1e-6, seed, &out_dir.join("critexp_kleinian.csv"))?;

    // Spectrum grid on the kleinian example, parallel over cells.
    let group = load_group(&kleinian_path)?;
    let (sys, f0, nuu) = normalized_weights(&group, 6, 0.0)?;
    let mut cells: Vec<(f64, i64)> = vec![(0.0, 0)];
    for &bb in &[0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
        for &ll in &[0i64, 1, 2, 5] {
            let rep = TwistRep::new(bb, if ll == 0 { RhoSpec::Trivial } else { RhoSpec::Character(ll) });
            if rep.in_m0(1.0) {
                cells.push((bb, ll));
            }
        }
    }
    let n_threads = if threads == 0 {
        std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
    } else {
        threads
    };
    let mut results: Vec<Option<(f64, f64, f64, bool)>> = vec![None; cells.len()];
    let chunk = cells.len().div_ceil(n_threads);
    std::thread::scope(|scope| -> Result<(), CliError> {
        let mut handles = Vec::new();
        for (ti, cell_chunk) in cells.chunks(chunk).enumerate() {
            let sys = &sys;
            let f0 = &f0;
            let nuu = &nuu;
            handles.push((
                ti,
                scope.spawn(move || -> Result<Vec<(f64, f64, f64, bool)>, CliError> {
                    let mut out = Vec::new();
                    for &(bb, ll) in cell_chunk {
                        let rep = TwistRep::new(
                            bb,
                            if ll == 0 { RhoSpec::Trivial } else { RhoSpec::Character(ll) },
                        );
                        let in_m0 = rep.in_m0(1.0);
                        let op = TwistedOperator::new(sys, f0.clone(), rep)?;
                        if in_m0 {
                            let r = spectral_radius_estimate(
                                &op,
                                nuu,
                                14,
                                3,
                                seed ^ ((bb * 10.0) as u64) ^ ((ll as u64) << 32),
                            )?;
                            out.push((r.rate, r.rate_min, r.rate_max, r.rate < 1.0 - 1e-3));
                        } else {
                            let ones = TwistedFn::Scalar(CylFn::constant(
                                sys.coarse(),
                                Complex64::new(1.0, 0.0),
                            ));
                            let (rate1, _) = decay_rate_for(&op, &ones, nuu, 10)?;
                            out.push((rate1, rate1, rate1, (rate1 - 1.0).abs() <= 1e-3));
                        }
                    }
                    Ok(out)
                }),
            ));
        }
        for (ti, h) in handles {
            let chunk_results = h.join().map_err(|_| CliError::Numeric("worker panicked".into()))??;
            for (i, r) in chunk_results.into_iter().enumerate() {
                results[ti * chunk + i] = Some(r);
            }
        }
        Ok(())
    })?;
    let mut spec_csv = Csv::new(
        "spectrum",
        seed,
        &[
            ("group", kleinian_path.display().to_string()),
            ("depth", "6".into()),
            ("kmax", "14".into()),
            ("trials", "3".into()),
            ("threads", n_threads.to_string()),
        ],
        &["b", "ell", "rate", "rate_min", "rate_max", "pass"],
    );
    for ((bb, ll), r) in cells.iter().zip(&results) {
        let (rate, lo, hi, pass) = r.expect("all cells computed");
        all_pass &= pass;
        spec_csv.row(&[pf(*bb), ll.to_string(), pf(rate), pf(lo), pf(hi), pb(pass)]);
    }
    spec_csv.write(&out_dir.join("spectrum.csv"))?;

    all_pass &= decay(&fuchsian_path, 8, 30.0, 0.6, 0.0, seed, &out_dir.join("decay.csv"))?;
    all_pass &= ncp(&fuchsian_path, "3:7", 0.5, 7, seed, &out_dir.join("ncp.csv"))?;
    all_pass &= dolgopyat(&fuchsian_path, 5.0, 0, 12, seed, &out_dir.join("dolgopyat_fuchsian.csv"))?;
    all_pass &= dolgopyat(&kleinian_path, 0.0, 1, 12, seed, &out_dir.join("dolgopyat_kleinian.csv"))?;
    Ok(all_pass)
}

fn write_group(group: &SchottkyGroup, path: &Path) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let text = serde_json::to_string_pretty(&group.to_file())
        .map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn out_path(out: &Option<PathBuf>, out_dir: &Path, default_name: &str) -> PathBuf {
    out.clone().unwrap_or_else(|| out_dir.join(default_name))
}
