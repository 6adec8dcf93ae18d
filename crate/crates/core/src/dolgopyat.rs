//! Dolgopyat operators at desk scale: the constants chain, Vitali covers on
//! funnel cylinders, bump families, the damped transfer iterate
//! N_{a,J} h = L_a^m(beta_J h), and measured versions of its cone,
//! contraction, and domination properties.

use num_complex::Complex64;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lnic::section_words;
use crate::mobius::C;
use crate::rng::SplitMix64;
use crate::schottky::SchottkyGroup;
use crate::shift::{CylFn, PartitionTower};
use crate::thermo::{critical_exponent, normalize_potential, nu_u, rpf_solve, SymbolicSystem};
use crate::twist::{log_lipschitz, sample_cone_function, TwistRep, TwistedFn, TwistedOperator};

// ---------------------------------------------------------------------------
// Strong triangle inequality
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct StrongTriangleReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// ||w1 + w2|| <= (1 - alpha^2 / (16 L)) ||w1|| + ||w2|| whenever the angle
/// between w1 and w2 is at least alpha and ||w1|| / ||w2|| <= L, L >= 1.
pub fn strong_triangle(w1: &[f64], w2: &[f64], alpha: f64, l: f64) -> Result<StrongTriangleReport> {
    if w1.len() != w2.len() || w1.len() < 2 {
        return Err(Error::Precondition("vectors need equal dimension >= 2".into()));
    }
    if !(0.0..=std::f64::consts::PI).contains(&alpha) {
        return Err(Error::Precondition(format!("alpha = {alpha} outside [0, pi]")));
    }
    if l < 1.0 {
        return Err(Error::Precondition(format!("L = {l} below 1")));
    }
    let n1 = w1.iter().map(|x| x * x).sum::<f64>().sqrt();
    let n2 = w2.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::Precondition("vectors must be nonzero".into()));
    }
    let dot: f64 = w1.iter().zip(w2).map(|(a, b)| a * b).sum();
    let angle = (dot / (n1 * n2)).clamp(-1.0, 1.0).acos();
    if angle < alpha - 1e-12 {
        return Err(Error::Precondition(format!("angle {angle} below alpha {alpha}")));
    }
    if n1 / n2 > l + 1e-12 {
        return Err(Error::Precondition(format!("norm ratio {} above L {l}", n1 / n2)));
    }
    let lhs = w1
        .iter()
        .zip(w2)
        .map(|(a, b)| (a + b) * (a + b))
        .sum::<f64>()
        .sqrt();
    let rhs = (1.0 - alpha * alpha / (16.0 * l)) * n1 + n2;
    Ok(StrongTriangleReport { lhs, rhs, pass: lhs <= rhs + 1e-12 })
}

// ---------------------------------------------------------------------------
// Constants chain
// ---------------------------------------------------------------------------

/// Quantities measured from a group and its discretization.
#[derive(Debug, Clone, Copy)]
pub struct MeasuredInputs {
    pub a0: f64,
    pub c0: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub t0: f64,
    /// Number of Markov rectangles (the alphabet size).
    pub n_rect: usize,
    pub eps1_maction: f64,
    pub eps2_lnic: f64,
    pub eps3_ncp: f64,
    pub delta_1_rho: f64,
}

/// Constants cited from outside the construction; all default to 1 except
/// the section size delta_hat, which is tied to the disk margin.
#[derive(Debug, Clone, Copy)]
pub struct OpaqueConstants {
    pub delta_psi: f64,
    pub c_bp: f64,
    pub c_exp_bp: f64,
    pub c_vit: f64,
    pub eps_cc: f64,
    pub delta_0: f64,
    pub c_ano: f64,
    pub c_phi: f64,
    pub delta_hat: f64,
    pub m0: usize,
    pub m1: usize,
}

impl Default for OpaqueConstants {
    fn default() -> Self {
        Self {
            delta_psi: 1.0,
            c_bp: 1.0,
            c_exp_bp: 1.0,
            c_vit: 1.0,
            eps_cc: 1.0,
            delta_0: 1.0,
            c_ano: 1.0,
            c_phi: 1.0,
            delta_hat: 0.5,
            m0: 1,
            m1: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigMode {
    /// Every constant from the full chain at safety factor 0.5.
    Chain,
    /// eps1 and eps2 replaced by resolvable scales; all other relations kept.
    Lab,
}

#[derive(Debug, Clone)]
pub struct DolgopyatConfig {
    pub mode: ConfigMode,
    pub b0: f64,
    pub e_cone: f64,
    pub delta1: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub eps4: f64,
    pub m1: usize,
    pub m2: usize,
    /// log mu; the chain pushes mu below f64 range for strongly expanding
    /// groups, so the exact value is carried in log space.
    pub mu_log: f64,
    pub inputs: MeasuredInputs,
    pub opaque: OpaqueConstants,
}

impl DolgopyatConfig {
    pub fn m(&self) -> usize {
        self.m1 + self.m2
    }

    /// mu clamped into f64; zero when the chain value is below the smallest
    /// positive float, in which case the bump damping is sub-rounding.
    pub fn mu(&self) -> f64 {
        self.mu_log.exp()
    }
}

fn check_inputs(inputs: &MeasuredInputs, opaque: &OpaqueConstants) -> Result<()> {
    let named: [(&str, f64); 10] = [
        ("A0 > 0", inputs.a0),
        ("c0 > 0", inputs.c0),
        ("kappa1 > 0", inputs.kappa1),
        ("kappa2 > 0", inputs.kappa2),
        ("T0 > 0", inputs.t0),
        ("eps1_maction > 0", inputs.eps1_maction),
        ("eps2_lnic > 0", inputs.eps2_lnic),
        ("eps3_ncp > 0", inputs.eps3_ncp),
        ("delta_1_rho > 0", inputs.delta_1_rho),
        ("delta_hat > 0", opaque.delta_hat),
    ];
    for (name, v) in named {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Infeasible(name.into()));
        }
    }
    if !(inputs.c0 < 1.0) {
        return Err(Error::Infeasible("c0 < 1".into()));
    }
    if !(inputs.kappa2 > 1.0) {
        return Err(Error::Infeasible("kappa2 > 1".into()));
    }
    if !(inputs.kappa1 > inputs.kappa2) {
        return Err(Error::Infeasible("kappa1 > kappa2".into()));
    }
    if inputs.n_rect < 2 {
        return Err(Error::Infeasible("N >= 2".into()));
    }
    if !(inputs.delta_1_rho <= 1.0) {
        return Err(Error::Infeasible("delta_1_rho <= 1".into()));
    }
    if !(opaque.delta_hat < 1.0) {
        return Err(Error::Infeasible("delta_hat < 1".into()));
    }
    Ok(())
}

fn delta1_bound(inputs: &MeasuredInputs, opaque: &OpaqueConstants) -> f64 {
    inputs.eps1_maction * inputs.eps2_lnic * inputs.eps3_ncp * opaque.delta_psi / 14.0
}

fn eps1_bound(inputs: &MeasuredInputs, opaque: &OpaqueConstants, delta1: f64) -> f64 {
    let i = inputs;
    let o = opaque;
    let k1m1 = i.kappa1.powi(o.m1 as i32);
    [
        o.c_vit,
        o.eps_cc,
        2.0 * o.delta_0 * i.delta_1_rho / o.c_bp,
        4.0 * delta1 / (o.c_bp * o.c_bp),
        4.0 * delta1 * i.delta_1_rho / o.c_exp_bp,
        1.0 / delta1,
        i.c0 * o.c_ano * o.c_phi * o.delta_hat * o.delta_hat.exp() / (5.0 * k1m1 * i.delta_1_rho),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

fn eps2_bound(inputs: &MeasuredInputs, eps1: f64, delta1: f64) -> f64 {
    let n = inputs.n_rect as f64;
    (inputs.eps3_ncp * eps1 / (4.0 * n))
        .min(delta1 * eps1 / (4.0 * n * (inputs.a0 + delta1)))
}

fn m2_requirement(cfg_e: f64, inputs: &MeasuredInputs, eps2: f64, delta1: f64) -> f64 {
    let n = inputs.n_rect as f64;
    [
        8.0 * inputs.a0,
        4.0 * cfg_e * n * eps2 / (inputs.c0 * std::f64::consts::LN_2),
        32.0 * cfg_e * n * eps2 / inputs.c0,
        4.0 * cfg_e / (inputs.c0 * delta1),
    ]
    .into_iter()
    .fold(0.0f64, f64::max)
}

/// log of min(E eps2 / 2N, 1/4N, arccos(1 - (delta1 eps1)^2/2)^2 / (256 e^{2 m2 T0} N)).
fn mu_bound_log(cfg: &DolgopyatConfig) -> f64 {
    let i = &cfg.inputs;
    let n = i.n_rect as f64;
    // arccos(1 - x^2/2) loses all precision for tiny x; it equals x up to
    // O(x^3), so use the stable form.
    let x = cfg.delta1 * cfg.eps1;
    let log_angle = if x < 1e-6 {
        x.ln()
    } else {
        (1.0 - x * x / 2.0).clamp(-1.0, 1.0).acos().ln()
    };
    let log_term3 = 2.0 * log_angle - (16.0f64 * 16.0 * n).ln() - 2.0 * cfg.m2 as f64 * i.t0;
    (cfg.e_cone * cfg.eps2 / (2.0 * n))
        .ln()
        .min((1.0 / (4.0 * n)).ln())
        .min(log_term3)
}

/// Solves the full constants chain at safety factor 0.5 inside every open
/// region, in dependency order, then re-validates it.
pub fn solve_constants(inputs: MeasuredInputs, opaque: OpaqueConstants) -> Result<DolgopyatConfig> {
    check_inputs(&inputs, &opaque)?;
    let b0 = 1.0;
    let e_cone = 2.0 * (2.0 * inputs.a0 / inputs.delta_1_rho).max(1.0 / b0).max(1.0 / inputs.delta_1_rho);
    let delta1 = 0.5 * delta1_bound(&inputs, &opaque);
    let eps1 = 0.5 * eps1_bound(&inputs, &opaque, delta1);
    let eps2 = 0.5 * eps2_bound(&inputs, eps1, delta1);
    let eps3 = inputs.c0 * inputs.kappa2.powi(opaque.m1 as i32) * eps2 / 2.0;
    let eps4 = 10.0 * inputs.kappa1.powi(opaque.m1 as i32) * eps1 / inputs.c0;
    let need = m2_requirement(e_cone, &inputs, eps2, delta1);
    let mut m2 = opaque.m0 + 1;
    while inputs.kappa2.powi(m2 as i32) <= need {
        m2 += 1;
        if m2 > 10_000 {
            return Err(Error::Infeasible("kappa2^m2 > max(...)".into()));
        }
    }
    let mut cfg = DolgopyatConfig {
        mode: ConfigMode::Chain,
        b0,
        e_cone,
        delta1,
        eps1,
        eps2,
        eps3,
        eps4,
        m1: opaque.m1,
        m2,
        mu_log: f64::NEG_INFINITY,
        inputs,
        opaque,
    };
    cfg.mu_log = 0.5f64.ln() + mu_bound_log(&cfg);
    validate_chain(&cfg)?;
    Ok(cfg)
}

/// Re-checks every inequality of the chain, naming the first violation.
pub fn validate_chain(cfg: &DolgopyatConfig) -> Result<()> {
    check_inputs(&cfg.inputs, &cfg.opaque)?;
    if cfg.b0 != 1.0 {
        return Err(Error::Infeasible("b0 = 1".into()));
    }
    if !(cfg.e_cone > 2.0 * cfg.inputs.a0 / cfg.inputs.delta_1_rho) {
        return Err(Error::Infeasible("E > 2 A0 / delta_1rho".into()));
    }
    if cfg.mode == ConfigMode::Chain {
        if !(cfg.delta1 < delta1_bound(&cfg.inputs, &cfg.opaque)) {
            return Err(Error::Infeasible("delta1 < eps1 eps2 eps3 delta_Psi / 14".into()));
        }
        if !(cfg.eps1 < eps1_bound(&cfg.inputs, &cfg.opaque, cfg.delta1)) {
            return Err(Error::Infeasible("eps1 < min(...)".into()));
        }
        if !(cfg.eps2 < eps2_bound(&cfg.inputs, cfg.eps1, cfg.delta1)) {
            return Err(Error::Infeasible("eps2 < min(eps3_ncp eps1 / 4N, delta1 eps1 / 4N(A0 + delta1))".into()));
        }
    } else {
        // Lab mode keeps the structural nesting 2 N eps2 < eps1 in place of
        // the chain upper bounds on eps1 and eps2.
        if !(2.0 * cfg.inputs.n_rect as f64 * cfg.eps2 < cfg.eps1) {
            return Err(Error::Infeasible("2 N eps2 < eps1".into()));
        }
    }
    let eps3 = cfg.inputs.c0 * cfg.inputs.kappa2.powi(cfg.m1 as i32) * cfg.eps2 / 2.0;
    if (cfg.eps3 - eps3).abs() > 1e-12 * eps3.max(1e-300) {
        return Err(Error::Infeasible("eps3 = c0 kappa2^m1 eps2 / 2".into()));
    }
    let eps4 = 10.0 * cfg.inputs.kappa1.powi(cfg.m1 as i32) * cfg.eps1 / cfg.inputs.c0;
    if (cfg.eps4 - eps4).abs() > 1e-12 * eps4.max(1e-300) {
        return Err(Error::Infeasible("eps4 = 10 kappa1^m1 eps1 / c0".into()));
    }
    if cfg.m2 <= cfg.opaque.m0 {
        return Err(Error::Infeasible("m2 > m0".into()));
    }
    let need = m2_requirement(cfg.e_cone, &cfg.inputs, cfg.eps2, cfg.delta1);
    if !(cfg.inputs.kappa2.powi(cfg.m2 as i32) > need) {
        return Err(Error::Infeasible("kappa2^m2 > max(8A0, ...)".into()));
    }
    let mu_cap_log = mu_bound_log(cfg);
    if !(cfg.mu_log.is_finite() && cfg.mu_log < mu_cap_log) {
        return Err(Error::Infeasible("mu < min(E eps2 / 2N, 1/4N, arccos(...)^2 / (256 e^{2 m2 T0} N))".into()));
    }
    Ok(())
}

/// Lab configuration: the ball scales eps1, eps2 are placed at resolvable
/// size for the given discretization instead of at their chain bounds; every
/// other constant keeps its chain formula. The substitution is recorded in
/// the mode tag.
pub fn lab_config(
    inputs: MeasuredInputs,
    opaque: OpaqueConstants,
    eps1: f64,
    eps2: f64,
) -> Result<DolgopyatConfig> {
    check_inputs(&inputs, &opaque)?;
    if !(eps1 > 0.0 && eps2 > 0.0 && 2.0 * inputs.n_rect as f64 * eps2 < eps1) {
        return Err(Error::Infeasible("2 N eps2 < eps1".into()));
    }
    let b0 = 1.0;
    let e_cone = 2.0 * (2.0 * inputs.a0 / inputs.delta_1_rho).max(1.0).max(1.0 / inputs.delta_1_rho);
    let delta1 = 0.5 * delta1_bound(&inputs, &opaque);
    let eps3 = inputs.c0 * inputs.kappa2.powi(opaque.m1 as i32) * eps2 / 2.0;
    let eps4 = 10.0 * inputs.kappa1.powi(opaque.m1 as i32) * eps1 / inputs.c0;
    let need = m2_requirement(e_cone, &inputs, eps2, delta1);
    let mut m2 = opaque.m0 + 1;
    while inputs.kappa2.powi(m2 as i32) <= need {
        m2 += 1;
        if m2 > 10_000 {
            return Err(Error::Infeasible("kappa2^m2 > max(...)".into()));
        }
    }
    let mut cfg = DolgopyatConfig {
        mode: ConfigMode::Lab,
        b0,
        e_cone,
        delta1,
        eps1,
        eps2,
        eps3,
        eps4,
        m1: opaque.m1,
        m2,
        mu_log: f64::NEG_INFINITY,
        inputs,
        opaque,
    };
    cfg.mu_log = 0.5f64.ln() + mu_bound_log(&cfg);
    validate_chain(&cfg)?;
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// Funnel cylinders and Vitali covers
// ---------------------------------------------------------------------------

/// The length-m1 funnel word into a target letter: (0, x, k) with the
/// smallest admissible middle letter.
pub fn funnel_word(group: &SchottkyGroup, target: usize) -> Result<Vec<u8>> {
    let n = group.n_letters();
    for x in 0..n {
        if group.admissible(0, x) && group.admissible(x, target) {
            return Ok(vec![0, x as u8, target as u8]);
        }
    }
    Err(Error::Domain(format!("no funnel into letter {target}")))
}

/// Limit-set samples inside one funnel cylinder, with their coding words.
#[derive(Debug, Clone)]
pub struct FunnelSamples {
    pub target: usize,
    pub word: Vec<u8>,
    /// Bounding radius of the funnel cylinder.
    pub radius: f64,
    pub points: Vec<C>,
    pub codings: Vec<Vec<u8>>,
}

pub fn funnel_samples(group: &SchottkyGroup, target: usize, extra_depth: usize) -> Result<FunnelSamples> {
    let word = funnel_word(group, target)?;
    let prefix_map = group.word_map(&word[..word.len() - 1]);
    let bounding = prefix_map.image_disk(&group.disks[target])?;
    // Extend the funnel word by all admissible suffixes.
    let mut words: Vec<Vec<u8>> = vec![word.clone()];
    for _ in 0..extra_depth {
        let mut next = Vec::with_capacity(words.len() * (group.n_letters() - 1));
        for w in &words {
            let last = *w.last().unwrap() as usize;
            for l in 0..group.n_letters() {
                if group.admissible(last, l) {
                    let mut nw = w.clone();
                    nw.push(l as u8);
                    next.push(nw);
                }
            }
        }
        words = next;
        if words.len() > 200_000 {
            return Err(Error::Depth { words: words.len(), budget: 200_000 });
        }
    }
    let mut points = Vec::with_capacity(words.len());
    for w in &words {
        let map = group.word_map(&w[..w.len() - 1]);
        points.push(map.apply(group.attracting_fixed_point(*w.last().unwrap() as usize))?);
    }
    Ok(FunnelSamples { target, word, radius: bounding.radius, points, codings: words })
}

#[derive(Debug, Clone)]
pub struct CoverGroup {
    pub funnel: usize,
    /// Indices into the funnel's sample list.
    pub centers: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct VitaliCover {
    pub rho_b_norm: f64,
    /// Core ball radius eps1 / |rho_b|.
    pub r_core: f64,
    /// D-ball radius eps2 / |rho_b|.
    pub r_d: f64,
    pub groups: Vec<CoverGroup>,
}

impl VitaliCover {
    pub fn total_balls(&self) -> usize {
        self.groups.iter().map(|g| g.centers.len()).sum()
    }
}

/// Greedy Vitali construction per funnel: keep samples 2 r_core-separated,
/// then certify the 5x covering. The density precondition asks every sample
/// to have a neighbor within eps2 / (2 |rho_b|).
pub fn build_cover(
    funnels: &[FunnelSamples],
    rho_b_norm: f64,
    cfg: &DolgopyatConfig,
) -> Result<VitaliCover> {
    let r_core = cfg.eps1 / rho_b_norm;
    let r_d = cfg.eps2 / rho_b_norm;
    let gap_scale = cfg.eps2 / (2.0 * rho_b_norm);
    let mut groups = Vec::with_capacity(funnels.len());
    for (fi, f) in funnels.iter().enumerate() {
        if f.points.is_empty() {
            return Err(Error::Cover(format!("funnel {fi} has no samples")));
        }
        if f.points.len() > 1 {
            let mut worst_nn = 0.0f64;
            for (i, p) in f.points.iter().enumerate() {
                let mut nn = f64::INFINITY;
                for (j, q) in f.points.iter().enumerate() {
                    if i != j {
                        nn = nn.min((p - q).norm());
                    }
                }
                worst_nn = worst_nn.max(nn);
            }
            if worst_nn > gap_scale {
                return Err(Error::Cover(format!(
                    "samples too sparse: nearest-neighbor gap {worst_nn:.3e} above {gap_scale:.3e}"
                )));
            }
        }
        let mut centers: Vec<usize> = Vec::new();
        for (i, p) in f.points.iter().enumerate() {
            if centers.iter().all(|&c| (p - f.points[c]).norm() > 2.0 * r_core) {
                centers.push(i);
            }
        }
        // Vitali guarantee: every sample is within 5 r_core of a center.
        for p in &f.points {
            let covered = centers.iter().any(|&c| (p - f.points[c]).norm() <= 5.0 * r_core);
            if !covered {
                return Err(Error::Cover("5x inflation fails to cover the funnel".into()));
            }
        }
        groups.push(CoverGroup { funnel: fi, centers });
    }
    Ok(VitaliCover { rho_b_norm, r_core, r_d, groups })
}

// ---------------------------------------------------------------------------
// Bumps and Dolgopyat operators
// ---------------------------------------------------------------------------

/// Smoothstep profile: 1 on [0, half], 0 beyond full, cubic in between; the
/// maximal slope is 1.5 / (full - half).
pub fn smoothstep(dist: f64, half: f64, full: f64) -> f64 {
    if dist <= half {
        1.0
    } else if dist >= full {
        0.0
    } else {
        let u = (dist - half) / (full - half);
        1.0 - u * u * (3.0 - 2.0 * u)
    }
}

/// One bump pulled back through a section: supported on the cylinders whose
/// word starts with the section word, with profile evaluated at the shifted
/// representative.
#[derive(Debug, Clone)]
pub struct BumpSpec {
    /// (funnel index, center index r) of the cover ball, p in {1, 2}.
    pub funnel: usize,
    pub r_index: usize,
    pub p: usize,
    /// Section index l in {1, 2}: 1 pulls back through alpha_0, 2 through
    /// the chosen alpha_j.
    pub l: usize,
    pub center: C,
    pub section: Vec<u8>,
}

/// beta_J = 1 - mu sum of pulled-back bumps, as a cylinder function on the
/// operator partition.
pub fn build_beta(
    system: &SymbolicSystem,
    cfg: &DolgopyatConfig,
    rho_b_norm: f64,
    bumps: &[BumpSpec],
) -> Result<CylFn<f64>> {
    let part = system.coarse();
    let m2 = cfg.m2;
    if part.depth <= m2 {
        return Err(Error::Precondition("operator depth must exceed m2".into()));
    }
    let image_depth = part.depth - m2;
    let image_part = system.tower.level(image_depth);
    if image_part.max_diameter() >= cfg.eps2 / (8.0 * rho_b_norm) {
        return Err(Error::Resolution {
            diameter: image_part.max_diameter(),
            bound: cfg.eps2 / (8.0 * rho_b_norm),
        });
    }
    let r_full = cfg.eps2 / rho_b_norm;
    let r_half = 0.5 * r_full;
    let mut values = vec![1.0f64; part.len()];
    for bump in bumps {
        if bump.section.len() != m2 {
            return Err(Error::Shape { expected: m2, got: bump.section.len() });
        }
        for (i, w) in part.words.iter().enumerate() {
            if w[..m2] != bump.section[..] {
                continue;
            }
            // sigma^{m2} of this cylinder: drop the section prefix.
            let shifted = &w[m2..];
            let mut idx = None;
            // The shifted word is located through the child maps by walking
            // the tower from depth 1.
            let mut cur = shifted[0] as u32;
            let mut ok = true;
            for (d, &letter) in shifted.iter().enumerate().skip(1) {
                match system.tower.level(d + 1).child_index(cur, letter) {
                    Some(next) => cur = next,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                idx = Some(cur as usize);
            }
            let Some(idx) = idx else { continue };
            let dist = (image_part.repr[idx] - bump.center).norm();
            values[i] -= cfg.mu() * smoothstep(dist, r_half, r_full);
        }
    }
    Ok(CylFn::from_values(part.depth, values))
}

/// N_{a,J}(h) = L_a^m(beta_J h).
pub fn apply_dolgopyat(
    system: &SymbolicSystem,
    weights: &[f64],
    beta: &CylFn<f64>,
    h: &CylFn<f64>,
    m: usize,
) -> Result<CylFn<f64>> {
    if beta.len() != h.len() {
        return Err(Error::Shape { expected: beta.len(), got: h.len() });
    }
    let mut cur = CylFn::from_values(
        h.depth,
        beta.values.iter().zip(&h.values).map(|(b, v)| b * v).collect(),
    );
    for _ in 0..m {
        cur = system.transfer_apply(weights, &cur)?;
    }
    Ok(cur)
}

fn l2(values: &[f64], nuu: &[f64]) -> f64 {
    values
        .iter()
        .zip(nuu)
        .map(|(v, w)| v * v * w)
        .sum::<f64>()
        .sqrt()
}

// ---------------------------------------------------------------------------
// The laboratory: measured inputs, covers, and property checks per twist cell
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct DolgopyatLab {
    pub group: SchottkyGroup,
    pub system: SymbolicSystem,
    pub coarse_tower: PartitionTower,
    pub word_index: HashMap<Vec<u8>, usize>,
    pub f0: Vec<f64>,
    pub nuu: Vec<f64>,
    pub lambda0: f64,
    pub h0: CylFn<f64>,
    pub delta: f64,
    pub cfg: DolgopyatConfig,
    pub sections: Vec<Vec<u8>>,
    pub funnels: Vec<FunnelSamples>,
    pub image_depth: usize,
}

#[derive(Debug, Clone)]
pub struct CellReport {
    pub rep: TwistRep,
    pub rho_b_norm: f64,
    pub in_m0: bool,
    pub cover_balls: usize,
    pub cone_bound: f64,
    pub cone_measured: f64,
    pub cone_pass: bool,
    pub eta: f64,
    pub eta_pass: bool,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_bounds_pass: bool,
    pub beta_c1: f64,
    pub beta_c1_bound: f64,
    pub beta_c1_pass: bool,
    pub component_max: usize,
    pub component_bound: usize,
    pub component_pass: bool,
    pub trapping_lo: f64,
    pub trapping_hi: f64,
    pub trapping_pass: bool,
    pub domination_pairs: usize,
    pub domination_margin: f64,
    pub domination_pass: bool,
    pub samples: usize,
}

impl DolgopyatLab {
    /// Builds the laboratory for a group: measures the hyperbolicity data,
    /// solves the lab constants at resolvable ball scales for the given
    /// largest twist norm, and prepares the discretization.
    pub fn build(group: SchottkyGroup, inputs: MeasuredInputs, rho_b_max: f64) -> Result<Self> {
        // Funnel radii set the largest usable core ball scale; C_Vit is the
        // measured clearance inside the funnels.
        let n = group.n_letters();
        let mut funnel_r = f64::INFINITY;
        for k in 0..n {
            let word = funnel_word(&group, k)?;
            let prefix = group.word_map(&word[..word.len() - 1]);
            funnel_r = funnel_r.min(prefix.image_disk(&group.disks[k])?.radius);
        }
        let opaque = OpaqueConstants {
            delta_hat: delta_hat_default(&group)?,
            c_vit: 0.5 * funnel_r,
            ..OpaqueConstants::default()
        };
        // Prefer the full chain when it stays resolvable at a tractable
        // depth; otherwise fall back to resolvable lab ball scales.
        const MAX_OPERATOR_DEPTH: usize = 10;
        let cfg = match solve_constants(inputs, opaque) {
            Ok(chain) => {
                let bound = chain.eps2 / (8.0 * rho_b_max);
                let cap = MAX_OPERATOR_DEPTH.saturating_sub(chain.m2).max(1);
                match resolution_depth(&group, bound, cap) {
                    Ok(_) => chain,
                    Err(_) => {
                        let eps1 = 0.5 * funnel_r;
                        let eps2 = eps1 / (4.0 * inputs.n_rect as f64);
                        lab_config(inputs, opaque, eps1, eps2)?
                    }
                }
            }
            _ => {
                let eps1 = 0.5 * funnel_r;
                let eps2 = eps1 / (4.0 * inputs.n_rect as f64);
                lab_config(inputs, opaque, eps1, eps2)?
            }
        };
        // Resolution: the sigma^{m2}-image cylinders must resolve the D-balls
        // at the largest twist norm in the grid.
        let bound = cfg.eps2 / (8.0 * rho_b_max);
        let image_depth = resolution_depth(&group, bound, 14)?;
        let depth = image_depth + cfg.m2;
        let system = SymbolicSystem::new(group.clone(), depth)?;
        let delta = critical_exponent(&system, 1e-9)?.delta;
        let sol0 = rpf_solve(&system, &system.roof_potential(delta))?;
        let f0 = normalize_potential(&system, delta, 0.0, &sol0, &sol0)?;
        let nuu = nu_u(&sol0);
        let m_dim = match group.family {
            crate::schottky::GroupFamily::Fuchsian => 0,
            crate::schottky::GroupFamily::Kleinian => 1,
        };
        let sections = section_words(&group, cfg.m2, 1 + 2 * (1 + m_dim))?;
        let extra = depth.saturating_sub(3).max(2);
        let funnels: Vec<FunnelSamples> = (0..n)
            .map(|k| funnel_samples(&group, k, extra))
            .collect::<Result<_>>()?;
        let word_index: HashMap<Vec<u8>, usize> = system
            .coarse()
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let coarse_tower = system.coarse_tower();
        Ok(Self {
            group,
            system,
            coarse_tower,
            word_index,
            f0,
            nuu,
            lambda0: sol0.lambda,
            h0: sol0.h,
            delta,
            cfg,
            sections,
            funnels,
            image_depth,
        })
    }

    /// Cylinder index of the point whose coding starts with the given word.
    fn cyl_of_word(&self, word: &[u8]) -> Result<usize> {
        let depth = self.system.depth();
        if word.len() < depth {
            return Err(Error::Domain("coding too short for the operator depth".into()));
        }
        self.word_index
            .get(&word[..depth])
            .copied()
            .ok_or(Error::NotInLimitChart)
    }

    /// Birkhoff sum of the normalized potential along a section from the
    /// sample with the given coding: the telescoped closed form.
    fn section_birkhoff(&self, section: &[u8], point: C, coding: &[u8]) -> Result<(f64, Complex64)> {
        let m2 = section.len();
        let d = self.group.word_derivative(section, point)?;
        let tau = -d.norm().ln();
        let theta = d.arg();
        let mut lifted = section.to_vec();
        lifted.extend_from_slice(coding);
        let top = self.cyl_of_word(&lifted)?;
        let base = self.cyl_of_word(coding)?;
        let f_sum = -(m2 as f64) * self.lambda0.ln() - self.delta * tau
            + self.h0.values[top].ln()
            - self.h0.values[base].ln();
        Ok((f_sum, Complex64::new(tau, theta)))
    }

    /// Full property check for one twist cell.
    pub fn check_cell(&self, rep: TwistRep, n_h: usize, seed: u64) -> Result<CellReport> {
        let cfg = &self.cfg;
        let nrm = rep.rho_b_norm();
        let n_rect = cfg.inputs.n_rect;
        let e_b = cfg.e_cone * nrm;
        let m = cfg.m();
        let cover = build_cover(&self.funnels, nrm, cfg)?;
        let mut rng = SplitMix64::new(seed);

        // Canonical dense J: the (k, r, 1, 1) bumps through alpha_0.
        let alpha0 = self.sections[0].clone();
        let mut bumps: Vec<BumpSpec> = Vec::new();
        for g in &cover.groups {
            for (r, &c) in g.centers.iter().enumerate() {
                bumps.push(BumpSpec {
                    funnel: g.funnel,
                    r_index: r,
                    p: 1,
                    l: 1,
                    center: self.funnels[g.funnel].points[c],
                    section: alpha0.clone(),
                });
            }
        }
        let beta = build_beta(&self.system, cfg, nrm, &bumps)?;
        let beta_min = beta.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let beta_max = beta.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let nmu = n_rect as f64 * cfg.mu();
        let beta_bounds_pass = beta_min >= 1.0 - nmu - 1e-15 && beta_max <= 1.0 + 1e-15;
        let beta_c1 = self
            .coarse_tower
            .difference_quotient(|i, j| (beta.values[i] - beta.values[j]).abs());
        let beta_c1_bound = 4.0 * (n_rect as f64) * cfg.mu() * nrm / cfg.eps2;
        let beta_c1_pass = beta_c1 <= beta_c1_bound + 1e-18;

        // Component bound over the D-ball system (both p slots).
        let mut ball_centers: Vec<C> = Vec::new();
        for g in &cover.groups {
            for &c in &g.centers {
                ball_centers.push(self.funnels[g.funnel].points[c]);
            }
        }
        let (component_max, component_bound) =
            (max_component(&ball_centers, 2.0 * cover.r_d), n_rect);
        let component_pass = component_max <= component_bound;

        // Cone preservation and L2 contraction over seeded samples.
        let mut cone_measured: f64 = 0.0;
        let mut eta: f64 = 0.0;
        let levels = [1.0, 0.5, 0.25];
        for i in 0..n_h {
            let level = levels[i % levels.len()];
            let h = sample_cone_function(&self.coarse_tower, level * e_b, &mut rng)?;
            let nh = apply_dolgopyat(&self.system, &self.f0, &beta, &h, m)?;
            cone_measured = cone_measured.max(log_lipschitz(&nh.values, &self.coarse_tower)?);
            eta = eta.max(l2(&nh.values, &self.nuu) / l2(&h.values, &self.nuu));
        }
        let cone_pass = cone_measured <= e_b;
        let eta_pass = eta < 1.0;

        // h-trapping and domination on a fresh cone/twist pair.
        let mut trapping_lo = f64::INFINITY;
        let mut trapping_hi: f64 = 0.0;
        let mut domination_margin = f64::NEG_INFINITY;
        let mut domination_pairs = 0usize;
        let mut domination_pass = true;
        let scalar_rep = rep.rho.dim() == 1;
        for trial in 0..3usize {
            let h = sample_cone_function(&self.coarse_tower, 0.5 * e_b, &mut rng)?;
            // H = h e^{i phi} with a phase field slow enough for (3b).
            let mut phi = crate::twist::random_log_field(&self.coarse_tower, &mut rng);
            let phi_lip = self
                .coarse_tower
                .difference_quotient(|i, j| (phi[i] - phi[j]).abs());
            let scale = if phi_lip > 0.0 { 0.5 * e_b / phi_lip } else { 0.0 };
            for p in &mut phi {
                *p *= scale;
            }
            let hvals: Vec<Complex64> = h
                .values
                .iter()
                .zip(&phi)
                .map(|(v, p)| Complex64::from_polar(*v, *p))
                .collect();
            let hfun = TwistedFn::Scalar(CylFn::from_values(h.depth, hvals));
            if !scalar_rep {
                continue;
            }
            let (trap, dom) = self.domination_once(&rep, &cover, &h, &hfun, trial as u64 ^ seed)?;
            trapping_lo = trapping_lo.min(trap.0);
            trapping_hi = trapping_hi.max(trap.1);
            domination_pairs += 1;
            domination_margin = domination_margin.max(dom);
            if dom > 1e-9 {
                domination_pass = false;
            }
        }
        let trapping_pass = trapping_lo >= 0.5 - 1e-12 && trapping_hi <= 2.0 + 1e-12;
        Ok(CellReport {
            rep,
            rho_b_norm: nrm,
            in_m0: true,
            cover_balls: cover.total_balls(),
            cone_bound: e_b,
            cone_measured,
            cone_pass,
            eta,
            eta_pass,
            beta_min,
            beta_max,
            beta_bounds_pass,
            beta_c1,
            beta_c1_bound,
            beta_c1_pass,
            component_max,
            component_bound,
            component_pass,
            trapping_lo,
            trapping_hi,
            trapping_pass,
            domination_pairs,
            domination_margin,
            domination_pass,
            samples: n_h,
        })
    }

    /// One (H, h) domination experiment: per cover ball, pick the partner
    /// point and section maximizing the holonomy-phase separation, run the
    /// chi <= 1 search over the four (p, l) choices, then verify the
    /// pointwise bound ||M^m H|| <= N_{a,J} h with the assembled dense J.
    /// Returns the h-trapping range and the worst pointwise margin.
    fn domination_once(
        &self,
        rep: &TwistRep,
        cover: &VitaliCover,
        h: &CylFn<f64>,
        hfun: &TwistedFn,
        _seed: u64,
    ) -> Result<((f64, f64), f64)> {
        let cfg = &self.cfg;
        let nrm = rep.rho_b_norm();
        let ell = match &rep.rho {
            crate::twist::RhoSpec::Trivial => 0,
            crate::twist::RhoSpec::Character(l) => *l,
            crate::twist::RhoSpec::Weights(_) => unreachable!("scalar cells only"),
        };
        let hvals = match hfun {
            TwistedFn::Scalar(f) => &f.values,
            _ => unreachable!(),
        };
        let nmu = cfg.inputs.n_rect as f64 * cfg.mu();
        let mut trapping = (f64::INFINITY, 0.0f64);
        let mut bumps: Vec<BumpSpec> = Vec::new();
        for g in &cover.groups {
            let funnel = &self.funnels[g.funnel];
            for (r, &c_idx) in g.centers.iter().enumerate() {
                let x1 = funnel.points[c_idx];
                let coding1 = &funnel.codings[c_idx];
                // omega from the alpha_0 branch at x1.
                let (_, tt) = self.section_birkhoff(&self.sections[0], x1, coding1)?;
                let phase0 = Complex64::from_polar(1.0, rep.b * tt.re - ell as f64 * tt.im);
                let h0v = hvals[self.cyl_of_word(&lift(&self.sections[0], coding1))?];
                if h0v.norm() < 1e-300 {
                    continue;
                }
                let omega = phase0 * h0v / h0v.norm();
                // Partner search in the annulus.
                let annulus_lo = cfg.eps3 * cfg.eps1 / (2.0 * nrm);
                let annulus_hi = cfg.eps1 / (2.0 * nrm);
                let mut best: Option<(usize, usize, f64)> = None; // (j, sample, score)
                for (j, alpha_j) in self.sections.iter().enumerate().skip(1) {
                    for (s_idx, y) in funnel.points.iter().enumerate() {
                        let d = (y - x1).norm();
                        if d < annulus_lo || d >= annulus_hi {
                            continue;
                        }
                        let bp = crate::lnic::bp_map(&self.group, &self.sections[0], alpha_j, x1, *y)?;
                        let rot = Complex64::from_polar(1.0, -rep.b * bp.0 + ell as f64 * bp.1);
                        let score = ((rot - Complex64::new(1.0, 0.0)) * omega).norm();
                        if best.map_or(true, |(_, _, s)| score > s) {
                            best = Some((j, s_idx, score));
                        }
                    }
                }
                let Some((jstar, partner, _)) = best else {
                    return Err(Error::Domination {
                        k: g.funnel,
                        r,
                        diagnostic: "empty partner annulus".into(),
                    });
                };
                let x2 = funnel.points[partner];
                // Collect D-hat ball samples around each candidate center.
                let r_hat = 2.0 * cfg.inputs.n_rect as f64 * cfg.eps2 / nrm;
                let centers = [x1, x2];
                let mut accepted: Option<(usize, usize)> = None; // (p, l)
                'pl: for p in 1..=2usize {
                    let center = centers[p - 1];
                    let in_ball: Vec<usize> = funnel
                        .points
                        .iter()
                        .enumerate()
                        .filter(|(_, q)| (*q - center).norm() <= r_hat)
                        .map(|(i, _)| i)
                        .collect();
                    for l in 1..=2usize {
                        let alpha_l = if l == 1 { &self.sections[0] } else { &self.sections[jstar] };
                        let alpha_other = if l == 1 { &self.sections[jstar] } else { &self.sections[0] };
                        let mut ok = true;
                        for &u_idx in &in_ball {
                            let u = funnel.points[u_idx];
                            let coding = &funnel.codings[u_idx];
                            let (fl, tl) = self.section_birkhoff(alpha_l, u, coding)?;
                            let (fo, to) = self.section_birkhoff(alpha_other, u, coding)?;
                            let cyl_l = self.cyl_of_word(&lift(alpha_l, coding))?;
                            let cyl_o = self.cyl_of_word(&lift(alpha_other, coding))?;
                            let vl = fl.exp()
                                * Complex64::from_polar(1.0, rep.b * tl.re - ell as f64 * tl.im)
                                * hvals[cyl_l];
                            let vo = fo.exp()
                                * Complex64::from_polar(1.0, rep.b * to.re - ell as f64 * to.im)
                                * hvals[cyl_o];
                            let numerator = (vl + vo).norm();
                            let denominator =
                                (1.0 - nmu) * fl.exp() * h.values[cyl_l] + fo.exp() * h.values[cyl_o];
                            if numerator > denominator * (1.0 + 1e-9) {
                                ok = false;
                                break;
                            }
                            // h-trapping within the ball, relative to the center.
                            let c_coding = if p == 1 { coding1 } else { &funnel.codings[partner] };
                            let hc = h.values[self.cyl_of_word(&lift(alpha_l, c_coding))?];
                            let ратио = h.values[cyl_l] / hc;
                            trapping.0 = trapping.0.min(ратио);
                            trapping.1 = trapping.1.max(ратио);
                        }
                        if ok {
                            accepted = Some((p, l));
                            break 'pl;
                        }
                    }
                }
                let Some((p, l)) = accepted else {
                    return Err(Error::Domination {
                        k: g.funnel,
                        r,
                        diagnostic: "no (p, l) satisfies chi <= 1 on the D-hat ball".into(),
                    });
                };
                bumps.push(BumpSpec {
                    funnel: g.funnel,
                    r_index: r,
                    p,
                    l,
                    center: centers[p - 1],
                    section: if l == 1 { self.sections[0].clone() } else { self.sections[jstar].clone() },
                });
            }
        }
        // Assembled dense J: verify the pointwise domination.
        let beta = build_beta(&self.system, cfg, nrm, &bumps)?;
        let nh = apply_dolgopyat(&self.system, &self.f0, &beta, h, cfg.m())?;
        let op = TwistedOperator::new(&self.system, self.f0.clone(), rep.clone())?;
        let mh = op.apply_iterated(hfun, cfg.m())?;
        let mut margin = f64::NEG_INFINITY;
        for (mm, nn) in mh.magnitudes().iter().zip(&nh.values) {
            margin = margin.max(mm - nn);
        }
        Ok((trapping, margin))
    }
}

fn lift(section: &[u8], coding: &[u8]) -> Vec<u8> {
    let mut w = section.to_vec();
    w.extend_from_slice(coding);
    w
}

/// Smallest depth whose cylinders all have diameter below the bound.
fn resolution_depth(group: &SchottkyGroup, bound: f64, cap: usize) -> Result<usize> {
    let mut probe = crate::shift::CylinderPartition::initial(group);
    let mut depth = 1;
    while probe.max_diameter() >= bound {
        probe = probe.refine(group)?;
        depth += 1;
        if depth > cap {
            return Err(Error::Resolution { diameter: probe.max_diameter(), bound });
        }
    }
    Ok(depth)
}

/// delta_hat default: just under the smallest boundary gap between disks.
pub fn delta_hat_default(group: &SchottkyGroup) -> Result<f64> {
    let mut gap = f64::INFINITY;
    let n = group.n_letters();
    for i in 0..n {
        for j in (i + 1)..n {
            let g = (group.disks[i].c() - group.disks[j].c()).norm()
                - group.disks[i].radius
                - group.disks[j].radius;
            gap = gap.min(g);
        }
    }
    Ok((0.99 * gap).min(0.99))
}

/// Size of the largest connected component of the union of equal balls,
/// via union-find on the overlap graph.
fn max_component(centers: &[C], diameter: f64) -> usize {
    let n = centers.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (centers[i] - centers[j]).norm() < diameter {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut counts = vec![0usize; n];
    let mut max = 0;
    for i in 0..n {
        let r = find(&mut parent, i);
        counts[r] += 1;
        max = max.max(counts[r]);
    }
    max
}

/// Measures the inputs of the constants chain from a group: hyperbolicity,
/// the Lasota-Yorke constant, branch-derivative bounds, and the measured
/// LNIC / NCP / m-action constants.
pub fn measure_inputs(
    group: &SchottkyGroup,
    reps: &[TwistRep],
    seed: u64,
) -> Result<MeasuredInputs> {
    let hyp = group.hyperbolicity(4)?;
    let sys = SymbolicSystem::new(group.clone(), 4)?;
    let delta = critical_exponent(&sys, 1e-9)?.delta;
    let sol0 = rpf_solve(&sys, &sys.roof_potential(delta))?;
    let f0 = normalize_potential(&sys, delta, 0.0, &sol0, &sol0)?;
    let op = TwistedOperator::new(&sys, f0.clone(), TwistRep::trivial())?;
    let a0 = crate::twist::fit_a0(&op, hyp.kappa2, 4, seed ^ 0xA0)?;
    // T0: the exact branch log-derivative magnitude |2c/(cz+d)| bounds both
    // the roof and holonomy slopes; the weight slope is measured at safe
    // scales only (finer pairs divide rounding noise by tiny distances).
    let mut t0: f64 = 0.0;
    for letter in 0..group.n_letters() {
        let t = group.transform(letter);
        for (d_idx, disk) in group.disks.iter().enumerate() {
            if d_idx == group.inverse_letter(letter) {
                continue;
            }
            for corner in 0..4 {
                let phi = std::f64::consts::FRAC_PI_2 * corner as f64;
                let z = disk.c() + disk.radius * C::new(phi.cos(), phi.sin());
                let den = t.c * z + t.d;
                t0 = t0.max((2.0 * t.c / den).norm());
            }
        }
    }
    let f_slope = sys
        .tower
        .difference_quotient_floored(|i, j| (f0[i] - f0[j]).abs(), 1e-6);
    let t0 = 1.1 * t0.max(f_slope);
    // LNIC at probe length 3.
    let m_dim = match group.family {
        crate::schottky::GroupFamily::Fuchsian => 0,
        crate::schottky::GroupFamily::Kleinian => 1,
    };
    let sections = section_words(group, 3, 1 + 2 * (1 + m_dim))?;
    let grid: Vec<C> = group
        .limit_set_sample(3, 1)?
        .into_iter()
        .filter(|p| p.word[0] == 0)
        .map(|p| p.z)
        .take(8)
        .collect();
    let lnic = crate::lnic::lnic_measure(group, &sections, &grid, 1e-5)?;
    // NCP over the chart samples.
    let samples = group.limit_set_sample(6, 1)?;
    let two_dim = group.family == crate::schottky::GroupFamily::Kleinian;
    let pts: Vec<C> = samples.iter().map(|s| s.z).collect();
    let nil = crate::ncp::chart_to_nil(&pts, two_dim);
    let model = nil[0].model;
    let dirs: Vec<crate::nil::NilPoint> = if two_dim {
        (0..8)
            .map(|i| {
                let phi = std::f64::consts::TAU * i as f64 / 8.0;
                model.point(vec![phi.cos(), phi.sin()], vec![]).unwrap()
            })
            .collect()
    } else {
        vec![model.point(vec![1.0], vec![]).unwrap()]
    };
    let grid_delta = crate::ncp::default_delta_grid();
    let mut eps3_ncp = f64::INFINITY;
    let mut rng = SplitMix64::new(seed ^ 0x9C9);
    for _ in 0..12 {
        let x = rng.below(nil.len());
        for eps_pow in 3..=7 {
            let eps = 0.5f64.powi(eps_pow);
            for w in &dirs {
                match crate::ncp::ncp_witness_search(&nil, x, eps, w, 0.5, &grid_delta) {
                    Ok(res) => eps3_ncp = eps3_ncp.min(res.delta_best),
                    Err(Error::NoWitness { .. }) => {
                        eps3_ncp = eps3_ncp.min(grid_delta[grid_delta.len() - 1]);
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    // m-action constant over the twist grid.
    let mut eps1_maction = f64::INFINITY;
    for rep in reps {
        if rep.rho_b_norm() > 0.0 {
            eps1_maction = eps1_maction.min(rep.maction_epsilon1(32, seed ^ 0x3A));
        }
    }
    if !eps1_maction.is_finite() {
        eps1_maction = 1.0;
    }
    Ok(MeasuredInputs {
        a0,
        c0: hyp.c0,
        kappa1: hyp.kappa1,
        kappa2: hyp.kappa2,
        t0,
        n_rect: group.n_letters(),
        eps1_maction,
        eps2_lnic: lnic.epsilon2,
        eps3_ncp,
        delta_1_rho: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn synthetic_inputs() -> MeasuredInputs {
        MeasuredInputs {
            a0: 2.0,
            c0: 0.5,
            kappa1: 4.0,
            kappa2: 1.2,
            t0: 3.0,
            n_rect: 4,
            eps1_maction: 1.0,
            eps2_lnic: 0.5,
            eps3_ncp: 0.25,
            delta_1_rho: 1.0,
        }
    }

    #[test]
    fn strong_triangle_reduces_to_triangle_at_zero_angle() {
        let r = strong_triangle(&[1.0, 0.0], &[0.5, 0.5], 0.0, 2.0).unwrap();
        assert!(r.pass);
        assert!((r.rhs - (1.0 + (0.5f64 * 0.5 + 0.25).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn strong_triangle_opposite_vectors() {
        let w = [0.7, -0.2, 0.1];
        let neg: Vec<f64> = w.iter().map(|x| -x).collect();
        let r = strong_triangle(&w, &neg, std::f64::consts::PI, 1.0).unwrap();
        assert!(r.pass);
        assert!(r.lhs < 1e-12);
    }

    #[test]
    fn strong_triangle_random_instances() {
        let mut rng = SplitMix64::new(63);
        for _ in 0..20_000 {
            let d = 2 + rng.below(7);
            let w1: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let w2: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let n1 = w1.iter().map(|x| x * x).sum::<f64>().sqrt();
            let n2 = w2.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n1 < 1e-6 || n2 < 1e-6 {
                continue;
            }
            let dot: f64 = w1.iter().zip(&w2).map(|(a, b)| a * b).sum();
            let alpha = (dot / (n1 * n2)).clamp(-1.0, 1.0).acos();
            let l = (n1 / n2).max(1.0);
            let r = strong_triangle(&w1, &w2, alpha, l).unwrap();
            assert!(r.pass, "violated at w1={w1:?} w2={w2:?}");
        }
    }

    #[test]
    fn chain_solves_and_revalidates() {
        let cfg = solve_constants(synthetic_inputs(), OpaqueConstants::default()).unwrap();
        assert_eq!(cfg.b0, 1.0);
        assert!(validate_chain(&cfg).is_ok());
        assert!((cfg.eps3 - cfg.inputs.c0 * cfg.inputs.kappa2.powi(2) * cfg.eps2 / 2.0).abs() < 1e-18);
        assert!(cfg.mu_log.is_finite() && cfg.mu() >= 0.0);
    }

    #[test]
    fn chain_rejects_bad_inputs_with_named_inequality() {
        let mut bad = synthetic_inputs();
        bad.c0 = 1.5;
        match solve_constants(bad, OpaqueConstants::default()) {
            Err(Error::Infeasible(name)) => assert!(name.contains("c0"), "{name}"),
            other => panic!("expected infeasible, got {other:?}"),
        }
        let mut bad2 = synthetic_inputs();
        bad2.kappa2 = 5.0; // above kappa1
        match solve_constants(bad2, OpaqueConstants::default()) {
            Err(Error::Infeasible(name)) => assert!(name.contains("kappa1"), "{name}"),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn chain_random_feasible_draws() {
        let mut rng = SplitMix64::new(77);
        let mut solved = 0;
        for _ in 0..100 {
            // Ranges kept inside the f64-representable region of the chain
            // (the mu bound shrinks like e^{-2 m2 T0}).
            let kappa2 = rng.uniform(1.3, 3.0);
            let inputs = MeasuredInputs {
                a0: rng.uniform(0.2, 3.0),
                c0: rng.uniform(0.1, 0.95),
                kappa1: kappa2 * rng.uniform(1.01, 10.0),
                kappa2,
                t0: rng.uniform(0.5, 3.0),
                n_rect: 2 + rng.below(6),
                eps1_maction: rng.uniform(0.3, 1.0),
                eps2_lnic: rng.uniform(0.1, 2.0),
                eps3_ncp: rng.uniform(0.05, 0.9),
                delta_1_rho: rng.uniform(0.5, 1.0),
            };
            let cfg = solve_constants(inputs, OpaqueConstants::default()).unwrap();
            validate_chain(&cfg).unwrap();
            solved += 1;
            // Doubling any single positive input either stays feasible or is
            // rejected with a named precondition.
            let mut doubled = inputs;
            doubled.a0 *= 2.0;
            match solve_constants(doubled, OpaqueConstants::default()) {
                Ok(c) => validate_chain(&c).unwrap(),
                Err(Error::Infeasible(_)) => {}
                Err(e) => panic!("unexpected: {e}"),
            }
        }
        assert_eq!(solved, 100);
    }

    #[test]
    fn smoothstep_profile_and_slope() {
        assert_eq!(smoothstep(0.0, 1.0, 2.0), 1.0);
        assert_eq!(smoothstep(1.0, 1.0, 2.0), 1.0);
        assert_eq!(smoothstep(2.0, 1.0, 2.0), 0.0);
        // max slope 1.5 / (full - half)
        let mut steep: f64 = 0.0;
        for i in 0..1000 {
            let x = 1.0 + i as f64 / 1000.0;
            let d = (smoothstep(x, 1.0, 2.0) - smoothstep(x + 1e-6, 1.0, 2.0)) / 1e-6;
            steep = steep.max(d);
        }
        assert!(steep <= 1.5 + 1e-3);
    }

    #[test]
    fn cover_packing_on_uniform_grid() {
        // Uniform grid on [0, 1]: the greedy cover cardinality is within a
        // factor 4 of 1 / (2 r_core).
        let pts: Vec<C> = (0..=1000).map(|i| C::new(i as f64 / 1000.0, 0.0)).collect();
        let funnel = FunnelSamples {
            target: 0,
            word: vec![0],
            radius: 0.5,
            points: pts.clone(),
            codings: vec![vec![0]; pts.len()],
        };
        let mut cfg = synthetic_cfg();
        cfg.eps1 = 0.05;
        cfg.eps2 = 0.003;
        let cover = build_cover(&[funnel], 1.0, &cfg).unwrap();
        let ideal = 1.0 / (2.0 * cfg.eps1);
        let got = cover.total_balls() as f64;
        assert!(got >= ideal / 4.0 && got <= 4.0 * ideal, "balls {got} vs ideal {ideal}");
        // Single sample: one ball, trivially covering.
        let single = FunnelSamples {
            target: 0,
            word: vec![0],
            radius: 0.5,
            points: vec![C::new(0.3, 0.0)],
            codings: vec![vec![0]],
        };
        let cover1 = build_cover(&[single], 1.0, &cfg).unwrap();
        assert_eq!(cover1.total_balls(), 1);
    }

    fn synthetic_cfg() -> DolgopyatConfig {
        DolgopyatConfig {
            mode: ConfigMode::Lab,
            b0: 1.0,
            e_cone: 2.0,
            delta1: 0.01,
            eps1: 0.05,
            eps2: 0.002,
            eps3: 0.001,
            eps4: 1.0,
            m1: 2,
            m2: 2,
            mu_log: 0.01f64.ln(),
            inputs: MeasuredInputs {
                a0: 1.0,
                c0: 0.5,
                kappa1: 10.0,
                kappa2: 5.0,
                t0: 1.0,
                n_rect: 4,
                eps1_maction: 1.0,
                eps2_lnic: 1.0,
                eps3_ncp: 0.5,
                delta_1_rho: 1.0,
            },
            opaque: OpaqueConstants::default(),
        }
    }

    #[test]
    fn beta_bump_value_at_center_and_monotone() {
        use crate::thermo::SymbolicSystem;
        let group = crate::bundled::fuchsian();
        let sys = SymbolicSystem::new(group.clone(), 5).unwrap();
        let mut cfg = synthetic_cfg();
        // Resolvable bump scale for the depth-3 image partition.
        let image = sys.tower.level(3);
        cfg.eps2 = 16.0 * image.max_diameter();
        cfg.eps1 = 10.0 * cfg.inputs.n_rect as f64 * cfg.eps2;
        let sections = crate::lnic::section_words(&group, 2, 2).unwrap();
        // Bump centered exactly at an image representative reachable from
        // the section: words starting with the section prefix.
        let sec = &sections[0];
        let i0 = sys
            .coarse()
            .words
            .iter()
            .position(|w| w[..2] == sec[..])
            .unwrap();
        let shifted = &sys.coarse().words[i0][2..];
        let img_idx = image.words.iter().position(|w| w[..] == shifted[..]).unwrap();
        let center = image.repr[img_idx];
        let bump = BumpSpec {
            funnel: 0,
            r_index: 0,
            p: 1,
            l: 1,
            center,
            section: sec.clone(),
        };
        let beta = build_beta(&sys, &cfg, 1.0, &[bump.clone()]).unwrap();
        assert!((beta.values[i0] - (1.0 - cfg.mu())).abs() < 1e-15);
        let lo = beta.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = beta.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi <= 1.0 && lo >= 1.0 - cfg.inputs.n_rect as f64 * cfg.mu());

        // N with J empty equals L^m exactly; more bumps never increase N h.
        let delta = crate::thermo::critical_exponent(&sys, 1e-9).unwrap().delta;
        let sol = crate::thermo::rpf_solve(&sys, &sys.roof_potential(delta)).unwrap();
        let f0 = crate::thermo::normalize_potential(&sys, delta, 0.0, &sol, &sol).unwrap();
        let ones = CylFn::constant(sys.coarse(), 1.0);
        let empty = build_beta(&sys, &cfg, 1.0, &[]).unwrap();
        let n_empty = apply_dolgopyat(&sys, &f0, &empty, &ones, 3).unwrap();
        let mut plain = ones.clone();
        for _ in 0..3 {
            plain = sys.transfer_apply(&f0, &plain).unwrap();
        }
        for (a, b) in n_empty.values.iter().zip(&plain.values) {
            assert_eq!(a, b); // bit-for-bit with J empty
        }
        let n_one = apply_dolgopyat(&sys, &f0, &beta, &ones, 3).unwrap();
        for (a, b) in n_one.values.iter().zip(&plain.values) {
            assert!(*a <= b + 1e-15);
        }
    }

    #[test]
    fn lab_smoke_on_kleinian() {
        let group = crate::bundled::kleinian();
        let cells = vec![TwistRep::new(2.0, crate::twist::RhoSpec::Trivial)];
        let inputs = measure_inputs(&group, &cells, 7).unwrap();
        let lab = DolgopyatLab::build(group, inputs, 2.0).unwrap();
        let rep = lab.check_cell(cells[0].clone(), 6, 11).unwrap();
        assert!(rep.cone_pass && rep.eta_pass && rep.beta_bounds_pass);
        assert!(rep.component_pass && rep.trapping_pass && rep.domination_pass);
        assert!(rep.eta < 0.999, "eta {}", rep.eta);
    }

    #[test]
    fn max_component_counts() {
        let centers = vec![
            C::new(0.0, 0.0),
            C::new(0.1, 0.0),
            C::new(0.2, 0.0),
            C::new(5.0, 0.0),
        ];
        assert_eq!(max_component(&centers, 0.15), 3);
        assert_eq!(max_component(&centers, 0.05), 1);
    }
}
