//! Transfer operators twisted by a frequency b and a unitary representation
//! of the holonomy group M (SO(2) for the kleinian family), together with
//! the modified C^1 norms, spectral-radius estimation, and Lasota-Yorke
//! checks.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::shift::{CylFn, PartitionTower};
use crate::thermo::SymbolicSystem;

/// Unitary representation data. Characters cover the irreducible SO(2) case;
/// `Weights` realizes an explicit diagonal unitary on C^d with integer
/// rotation weights (the 2-dimensional rotation representation is [1, -1]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RhoSpec {
    Trivial,
    Character(i64),
    Weights(Vec<i64>),
}

impl RhoSpec {
    pub fn dim(&self) -> usize {
        match self {
            RhoSpec::Trivial | RhoSpec::Character(_) => 1,
            RhoSpec::Weights(w) => w.len(),
        }
    }

    pub fn weights(&self) -> Vec<i64> {
        match self {
            RhoSpec::Trivial => vec![0],
            RhoSpec::Character(l) => vec![*l],
            RhoSpec::Weights(w) => w.clone(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.weights().iter().all(|&l| l == 0)
    }

    /// ||rho|| = sup over unit z in m of the generator action.
    pub fn norm(&self) -> f64 {
        self.weights().iter().map(|l| l.abs()).max().unwrap_or(0) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwistRep {
    pub b: f64,
    pub rho: RhoSpec,
}

impl TwistRep {
    pub fn new(b: f64, rho: RhoSpec) -> Self {
        Self { b, rho }
    }

    pub fn trivial() -> Self {
        Self { b: 0.0, rho: RhoSpec::Trivial }
    }

    /// ||rho_b|| = sup over unit z in a + m of ||d rho_b(z)||: for diagonal
    /// weights this is sqrt(b^2 + max_l l^2).
    pub fn rho_b_norm(&self) -> f64 {
        (self.b * self.b + self.rho.norm().powi(2)).sqrt()
    }

    /// Membership in the large-frequency regime: |b| > b0 or rho nontrivial.
    pub fn in_m0(&self, b0: f64) -> bool {
        self.b.abs() > b0 || !self.rho.is_trivial()
    }

    /// Measured lower bound epsilon_1: the smallest over unit omega of
    /// sup_{z in a+m, |z|=1} ||d rho_b(z)(omega)||_2 / ||rho_b||.
    pub fn maction_epsilon1(&self, omega_trials: usize, seed: u64) -> f64 {
        let ls = self.rho.weights();
        let d = ls.len();
        let nb = self.rho_b_norm();
        if nb == 0.0 {
            return 0.0;
        }
        let mut rng = SplitMix64::new(seed);
        let mut worst = f64::INFINITY;
        for _ in 0..omega_trials {
            let mut omega: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let n = omega.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n < 1e-12 {
                continue;
            }
            for x in &mut omega {
                *x /= n;
            }
            // sup over z = (cos phi, sin phi) of sum_j (-b cos + l_j sin)^2 w_j^2
            let mut best: f64 = 0.0;
            for k in 0..=720 {
                let phi = std::f64::consts::PI * k as f64 / 720.0;
                let (c, s) = (phi.cos(), phi.sin());
                let val: f64 = ls
                    .iter()
                    .zip(&omega)
                    .map(|(&l, &w)| {
                        let g = -self.b * c + l as f64 * s;
                        g * g * w * w
                    })
                    .sum();
                best = best.max(val.sqrt());
            }
            worst = worst.min(best / nb);
        }
        worst
    }
}

/// Scalar- or vector-valued cylinder function for twisted operators.
#[derive(Debug, Clone, PartialEq)]
pub enum TwistedFn {
    Scalar(CylFn<Complex64>),
    Vector(CylFn<Vec<Complex64>>),
}

impl TwistedFn {
    pub fn len(&self) -> usize {
        match self {
            TwistedFn::Scalar(f) => f.len(),
            TwistedFn::Vector(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pointwise Euclidean magnitude per cylinder.
    pub fn magnitudes(&self) -> Vec<f64> {
        match self {
            TwistedFn::Scalar(f) => f.values.iter().map(|z| z.norm()).collect(),
            TwistedFn::Vector(f) => f
                .values
                .iter()
                .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
                .collect(),
        }
    }

    /// Difference magnitude between two cylinders of the same function.
    fn diff_magnitude(&self, i: usize, j: usize) -> f64 {
        match self {
            TwistedFn::Scalar(f) => (f.values[i] - f.values[j]).norm(),
            TwistedFn::Vector(f) => f.values[i]
                .iter()
                .zip(&f.values[j])
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        match self {
            TwistedFn::Scalar(f) => f.values.iter_mut().for_each(|z| *z *= s),
            TwistedFn::Vector(f) => f
                .values
                .iter_mut()
                .for_each(|v| v.iter_mut().for_each(|z| *z *= s)),
        }
    }
}

/// L^2(nu_U) norm.
pub fn l2_norm(h: &TwistedFn, nu_u: &[f64]) -> f64 {
    let mags = h.magnitudes();
    mags.iter()
        .zip(nu_u)
        .map(|(m, w)| m * m * w)
        .sum::<f64>()
        .sqrt()
}

/// The sup norm, the discrete C^1 seminorm over same-parent cylinder pairs,
/// and the modified norm |H|_inf + |H|_C1 / max(1, |b|).
#[derive(Debug, Clone, Copy)]
pub struct NormReport {
    pub sup: f64,
    pub c1_seminorm: f64,
    pub norm_1b: f64,
}

pub fn norm_1b(h: &TwistedFn, b: f64, tower: &PartitionTower) -> Result<NormReport> {
    if tower.n_levels() < 2 {
        return Err(Error::Precondition("norm_1b needs depth >= 2 for finite differences".into()));
    }
    let mags = h.magnitudes();
    if mags.len() != tower.top().len() {
        return Err(Error::Shape { expected: tower.top().len(), got: mags.len() });
    }
    let sup = mags.iter().cloned().fold(0.0f64, f64::max);
    let c1 = tower.difference_quotient(|i, j| h.diff_magnitude(i, j));
    Ok(NormReport { sup, c1_seminorm: c1, norm_1b: sup + c1 / b.abs().max(1.0) })
}

/// Discrete log-Lipschitz constant of a positive function on the tower top,
/// measured over sibling pairs at every scale.
pub fn log_lipschitz(values: &[f64], tower: &PartitionTower) -> Result<f64> {
    if tower.n_levels() < 2 {
        return Err(Error::Precondition("log-Lipschitz needs depth >= 2".into()));
    }
    if values.len() != tower.top().len() {
        return Err(Error::Shape { expected: tower.top().len(), got: values.len() });
    }
    Ok(tower.difference_quotient(|i, j| (values[i].ln() - values[j].ln()).abs()))
}

/// The data of a normalized twisted transfer operator M_{xi, rho} at one
/// discretization depth.
#[derive(Debug, Clone)]
pub struct TwistedOperator<'a> {
    pub system: &'a SymbolicSystem,
    /// Normalized weights f_(a) per branch cylinder.
    pub weights: Vec<f64>,
    pub rep: TwistRep,
    /// Per-branch phase factors e^{i(b tau - l theta)} per representation weight.
    phases: Vec<Vec<Complex64>>,
    exp_weights: Vec<f64>,
}

impl<'a> TwistedOperator<'a> {
    pub fn new(system: &'a SymbolicSystem, weights: Vec<f64>, rep: TwistRep) -> Result<Self> {
        if weights.len() != system.topology.entries.len() {
            return Err(Error::Shape { expected: system.topology.entries.len(), got: weights.len() });
        }
        let ls = rep.rho.weights();
        let phases = system
            .topology
            .tau
            .iter()
            .zip(&system.topology.theta)
            .map(|(&tau, &theta)| {
                ls.iter()
                    .map(|&l| Complex64::from_polar(1.0, rep.b * tau - l as f64 * theta))
                    .collect()
            })
            .collect();
        let exp_weights = weights.iter().map(|f| f.exp()).collect();
        Ok(Self { system, weights, rep, phases, exp_weights })
    }

    /// One application of the operator. The untwisted case reuses the real
    /// kernel on the real and imaginary parts so it coincides with
    /// transfer_apply exactly.
    pub fn apply(&self, h: &TwistedFn) -> Result<TwistedFn> {
        match h {
            TwistedFn::Scalar(f) => {
                if self.rep.b == 0.0 && self.rep.rho.is_trivial() {
                    let re = CylFn::from_values(f.depth, f.values.iter().map(|z| z.re).collect());
                    let im = CylFn::from_values(f.depth, f.values.iter().map(|z| z.im).collect());
                    let lre = self.system.transfer_apply(&self.weights, &re)?;
                    let lim = self.system.transfer_apply(&self.weights, &im)?;
                    let values = lre
                        .values
                        .into_iter()
                        .zip(lim.values)
                        .map(|(r, i)| Complex64::new(r, i))
                        .collect();
                    return Ok(TwistedFn::Scalar(CylFn::from_values(f.depth, values)));
                }
                if f.len() != self.system.topology.n_coarse {
                    return Err(Error::Shape { expected: self.system.topology.n_coarse, got: f.len() });
                }
                let mut out = vec![Complex64::ZERO; self.system.topology.n_coarse];
                for (j, &(target, source)) in self.system.topology.entries.iter().enumerate() {
                    out[target as usize] +=
                        self.exp_weights[j] * self.phases[j][0] * f.values[source as usize];
                }
                Ok(TwistedFn::Scalar(CylFn::from_values(f.depth, out)))
            }
            TwistedFn::Vector(f) => {
                if f.len() != self.system.topology.n_coarse {
                    return Err(Error::Shape { expected: self.system.topology.n_coarse, got: f.len() });
                }
                let d = self.rep.rho.dim();
                let mut out = vec![vec![Complex64::ZERO; d]; self.system.topology.n_coarse];
                for (j, &(target, source)) in self.system.topology.entries.iter().enumerate() {
                    let src = &f.values[source as usize];
                    let t = &mut out[target as usize];
                    for c in 0..d {
                        t[c] += self.exp_weights[j] * self.phases[j][c] * src[c];
                    }
                }
                Ok(TwistedFn::Vector(CylFn::from_values(f.depth, out)))
            }
        }
    }

    pub fn apply_iterated(&self, h: &TwistedFn, k: usize) -> Result<TwistedFn> {
        let mut cur = h.clone();
        for _ in 0..k {
            cur = self.apply(&cur)?;
        }
        Ok(cur)
    }

    /// The untwisted positive operator with the same weights.
    pub fn untwisted_apply(&self, h: &CylFn<f64>) -> Result<CylFn<f64>> {
        self.system.transfer_apply(&self.weights, h)
    }
}

#[derive(Debug, Clone)]
pub struct RateReport {
    /// e^{slope} of the least-squares fit of log ||M^k H||_2 against k.
    pub rate: f64,
    pub rate_min: f64,
    pub rate_max: f64,
    pub trials: usize,
    /// Set when some trial fell below the 1e-13 noise floor before k_max.
    pub noise_floor_warning: bool,
}

/// Decay rate of one orbit of norms; the fit ignores k = 0 and stops at the
/// noise floor.
pub fn decay_rate_for(
    op: &TwistedOperator,
    h0: &TwistedFn,
    nu_u: &[f64],
    k_max: usize,
) -> Result<(f64, bool)> {
    let mut h = h0.clone();
    let mut logs: Vec<(f64, f64)> = Vec::new();
    let mut floored = false;
    for k in 0..=k_max {
        let n = l2_norm(&h, nu_u);
        if n < 1e-13 {
            floored = true;
            break;
        }
        if k >= 1 {
            logs.push((k as f64, n.ln()));
        }
        if k < k_max {
            h = op.apply(&h)?;
        }
    }
    if logs.len() < 2 {
        return Err(Error::Precondition("not enough points above the noise floor".into()));
    }
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|(x, _)| x).sum();
    let sy: f64 = logs.iter().map(|(_, y)| y).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = logs.iter().map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok((slope.exp(), floored))
}

/// Random-start estimate of the decay rate of ||M^k H||_2 over unit
/// ||.||_{1, ||rho_b||} initial functions.
pub fn spectral_radius_estimate(
    op: &TwistedOperator,
    nu_u: &[f64],
    k_max: usize,
    trials: usize,
    seed: u64,
) -> Result<RateReport> {
    let mut rng = SplitMix64::new(seed);
    let n = op.system.topology.n_coarse;
    let d = op.rep.rho.dim();
    let tower = op.system.coarse_tower();
    let mut rates = Vec::with_capacity(trials);
    let mut warn = false;
    for _ in 0..trials {
        let mut h = if d == 1 {
            TwistedFn::Scalar(CylFn::from_values(
                op.system.coarse().depth,
                (0..n)
                    .map(|_| Complex64::new(rng.normal(), rng.normal()))
                    .collect(),
            ))
        } else {
            TwistedFn::Vector(CylFn::from_values(
                op.system.coarse().depth,
                (0..n)
                    .map(|_| (0..d).map(|_| Complex64::new(rng.normal(), rng.normal())).collect())
                    .collect(),
            ))
        };
        let report = norm_1b(&h, op.rep.rho_b_norm(), &tower)?;
        h.scale(1.0 / report.norm_1b);
        let (rate, floored) = decay_rate_for(op, &h, nu_u, k_max)?;
        warn = warn || floored;
        rates.push(rate);
    }
    let rate = rates.iter().sum::<f64>() / rates.len() as f64;
    let rate_min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let rate_max = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(RateReport { rate, rate_min, rate_max, trials, noise_floor_warning: warn })
}

/// Random multi-scale field on the tower top: independent bounded noise per
/// cylinder at every level, weighted by the local cylinder diameter so
/// difference quotients stay active and uniform across scales. The top-level
/// rectangles get O(1) amplitude: the cone only constrains derivatives
/// within a rectangle, never jumps across the disjoint components.
pub fn random_log_field(tower: &PartitionTower, rng: &mut SplitMix64) -> Vec<f64> {
    let top_len = tower.top().len();
    let mut field = vec![0.0f64; top_len];
    for depth in 1..=tower.n_levels() {
        let level = tower.level(depth);
        let noise: Vec<f64> = (0..level.len()).map(|_| rng.uniform(-1.0, 1.0)).collect();
        for (i, f) in field.iter_mut().enumerate() {
            let anc = tower.ancestor(i, depth);
            let amp = if depth == 1 { 1.0 } else { level.diameter(anc) };
            *f += amp * noise[anc];
        }
    }
    field
}

/// Sample a member of the cone K_B: log h = field rescaled to discrete
/// log-Lipschitz constant exactly B.
pub fn sample_cone_function(
    tower: &PartitionTower,
    b_target: f64,
    rng: &mut SplitMix64,
) -> Result<CylFn<f64>> {
    let field = random_log_field(tower, rng);
    let h: Vec<f64> = field.iter().map(|x| x.exp()).collect();
    let lip = log_lipschitz(&h, tower)?;
    let scale = if lip > 0.0 { b_target / lip } else { 0.0 };
    Ok(CylFn::from_values(
        tower.top().depth,
        field.iter().map(|x| (x * scale).exp()).collect(),
    ))
}

#[derive(Debug, Clone, Copy)]
pub struct LasotaYorkeReport {
    pub b_input: f64,
    pub k: usize,
    pub b_measured: f64,
    pub b_bound: f64,
    pub pass: bool,
}

/// Measures the log-Lipschitz constant of L_a^k(h) for h in K_B and checks
/// it against A0 (B / kappa2^k + 1).
pub fn lasota_yorke_check(
    op: &TwistedOperator,
    b_input: f64,
    k: usize,
    a0: f64,
    kappa2: f64,
    samples: usize,
    seed: u64,
) -> Result<LasotaYorkeReport> {
    let mut rng = SplitMix64::new(seed);
    let tower = op.system.coarse_tower();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let h = sample_cone_function(&tower, b_input, &mut rng)?;
        let mut cur = h;
        for _ in 0..k {
            cur = op.untwisted_apply(&cur)?;
        }
        worst = worst.max(log_lipschitz(&cur.values, &tower)?);
    }
    let bound = a0 * (b_input / kappa2.powi(k as i32) + 1.0);
    Ok(LasotaYorkeReport { b_input, k, b_measured: worst, b_bound: bound, pass: worst <= bound })
}

/// Fits A0 from one-step images of cone functions across a spread of
/// Lipschitz budgets; the validated content of the Lasota-Yorke shape is the
/// kappa2^k decay on independent draws.
pub fn fit_a0(op: &TwistedOperator, kappa2: f64, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let tower = op.system.coarse_tower();
    let mut a0: f64 = 0.0;
    for &b in &[0.0, 0.05, 0.2, 1.0, 5.0, 40.0, 200.0] {
        for _ in 0..samples {
            let h = sample_cone_function(&tower, b, &mut rng)?;
            let lh = op.untwisted_apply(&h)?;
            let measured = log_lipschitz(&lh.values, &tower)?;
            a0 = a0.max(measured / (b / kappa2 + 1.0));
        }
    }
    // Headroom so the fit is a ceiling over fresh draws, not a tight
    // interpolation of the calibration family.
    Ok((1.5 * a0).max(0.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    
    use crate::schottky::SchottkyGroup;
    use crate::thermo::{critical_exponent, normalize_potential, nu_u, rpf_solve};
    use approx::assert_relative_eq;

    fn kleinian() -> SchottkyGroup {
        crate::bundled::kleinian()
    }

    fn normalized_system(depth: usize) -> (SymbolicSystem, Vec<f64>, Vec<f64>) {
        let sys = SymbolicSystem::new(kleinian(), depth).unwrap();
        let delta = critical_exponent(&sys, 1e-9).unwrap().delta;
        let sol0 = rpf_solve(&sys, &sys.roof_potential(delta)).unwrap();
        let f0 = normalize_potential(&sys, delta, 0.0, &sol0, &sol0).unwrap();
        let nuu = nu_u(&sol0);
        (sys, f0, nuu)
    }

    #[test]
    fn rho_b_norm_bounds() {
        for &b in &[0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
            for &l in &[0i64, 1, 2, 5] {
                let rep = TwistRep::new(b, RhoSpec::Character(l));
                let n = rep.rho_b_norm();
                let lo = b.abs().max(l.abs() as f64);
                let hi = b.abs() + l.abs() as f64;
                assert!(n >= lo - 1e-12 && n <= hi + 1e-12, "b={b} l={l} n={n}");
            }
        }
    }

    #[test]
    fn maction_epsilon1_positive() {
        let rep = TwistRep::new(1.0, RhoSpec::Character(1));
        let e1 = rep.maction_epsilon1(32, 7);
        assert!(e1 > 0.99, "characters achieve the full norm, got {e1}");
        let rep2 = TwistRep::new(1.0, RhoSpec::Weights(vec![1, -1]));
        let e2 = rep2.maction_epsilon1(64, 7);
        assert!(e2 > 0.0 && e2 <= 1.0 + 1e-9, "rotation rep epsilon1 = {e2}");
    }

    #[test]
    fn trivial_twist_collapses_to_transfer_apply() {
        let (sys, f0, _) = normalized_system(3);
        let op = TwistedOperator::new(&sys, f0.clone(), TwistRep::trivial()).unwrap();
        let mut rng = SplitMix64::new(4);
        let re: Vec<f64> = (0..sys.coarse().len()).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let h = TwistedFn::Scalar(CylFn::from_values(
            sys.coarse().depth,
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        ));
        let twisted = op.apply(&h).unwrap();
        let plain = sys
            .transfer_apply(&f0, &CylFn::from_values(sys.coarse().depth, re))
            .unwrap();
        match twisted {
            TwistedFn::Scalar(f) => {
                for (z, r) in f.values.iter().zip(&plain.values) {
                    assert_eq!(z.re, *r); // bit-for-bit
                    assert_eq!(z.im, 0.0);
                }
            }
            _ => panic!("scalar expected"),
        }
    }

    #[test]
    fn unitarity_pointwise_domination() {
        let (sys, f0, _) = normalized_system(3);
        let op = TwistedOperator::new(&sys, f0.clone(), TwistRep::new(2.5, RhoSpec::Character(1))).unwrap();
        let mut rng = SplitMix64::new(9);
        let h = TwistedFn::Scalar(CylFn::from_values(
            sys.coarse().depth,
            (0..sys.coarse().len())
                .map(|_| Complex64::new(rng.normal(), rng.normal()))
                .collect(),
        ));
        let mh = op.apply(&h).unwrap();
        let habs = CylFn::from_values(sys.coarse().depth, h.magnitudes());
        let lh = op.untwisted_apply(&habs).unwrap();
        for (m, l) in mh.magnitudes().iter().zip(&lh.values) {
            assert!(*m <= l + 1e-12, "unitarity violated: {m} > {l}");
        }
    }

    #[test]
    fn constant_twist_no_gap() {
        // Full-shift analogue: constant roof, constant angle. The normalized
        // twisted operator of a character keeps modulus 1 on constants.
        let (sys, f0, nuu) = normalized_system(2);
        // Overwrite tau/theta phases with constants by hand.
        let mut op = TwistedOperator::new(&sys, f0, TwistRep::new(3.0, RhoSpec::Character(2))).unwrap();
        let phase = Complex64::from_polar(1.0, 0.77);
        for p in &mut op.phases {
            p[0] = phase;
        }
        let ones = TwistedFn::Scalar(CylFn::constant(&sys.coarse(), Complex64::new(1.0, 0.0)));
        let m1 = op.apply(&ones).unwrap();
        // |M(1)| = L(1) = 1 pointwise: no cancellation under constant twist.
        for m in m1.magnitudes() {
            assert_relative_eq!(m, 1.0, epsilon = 1e-10);
        }
        let _ = nuu;
    }

    #[test]
    fn twisted_rate_below_one_kleinian() {
        let (sys, f0, nuu) = normalized_system(4);
        for rep in [
            TwistRep::new(0.0, RhoSpec::Character(1)),
            TwistRep::new(5.0, RhoSpec::Trivial),
        ] {
            let op = TwistedOperator::new(&sys, f0.clone(), rep.clone()).unwrap();
            let report = spectral_radius_estimate(&op, &nuu, 14, 3, 11).unwrap();
            assert!(report.rate < 1.0, "{rep:?} rate {}", report.rate);
        }
    }

    #[test]
    fn trivial_rate_is_one_on_constants_and_below_on_mean_zero() {
        let (sys, f0, nuu) = normalized_system(4);
        let op = TwistedOperator::new(&sys, f0, TwistRep::trivial()).unwrap();
        let ones = TwistedFn::Scalar(CylFn::constant(&sys.coarse(), Complex64::new(1.0, 0.0)));
        let (rate, _) = decay_rate_for(&op, &ones, &nuu, 10).unwrap();
        assert!((rate - 1.0).abs() < 1e-3, "rate on constants {rate}");
        // Mean-zero start decays at the subleading spectrum.
        let mut rng = SplitMix64::new(15);
        let mut vals: Vec<Complex64> = (0..sys.coarse().len())
            .map(|_| Complex64::new(rng.normal(), 0.0))
            .collect();
        let mean: Complex64 = vals
            .iter()
            .zip(&nuu)
            .map(|(v, w)| v * *w)
            .sum();
        for v in &mut vals {
            *v -= mean;
        }
        let h = TwistedFn::Scalar(CylFn::from_values(sys.coarse().depth, vals));
        let (rate0, _) = decay_rate_for(&op, &h, &nuu, 12).unwrap();
        assert!(rate0 < 0.9, "mean-zero rate {rate0}");
    }

    #[test]
    fn vector_representation_path() {
        let (sys, f0, nuu) = normalized_system(3);
        let rep = TwistRep::new(0.0, RhoSpec::Weights(vec![1, -1]));
        let op = TwistedOperator::new(&sys, f0, rep).unwrap();
        let mut rng = SplitMix64::new(21);
        let h = TwistedFn::Vector(CylFn::from_values(
            sys.coarse().depth,
            (0..sys.coarse().len())
                .map(|_| vec![Complex64::new(rng.normal(), 0.0), Complex64::new(rng.normal(), 0.0)])
                .collect(),
        ));
        let (rate, _) = decay_rate_for(&op, &h, &nuu, 12).unwrap();
        assert!(rate < 1.0, "rotation representation should decay, rate {rate}");
    }

    #[test]
    fn norm_report_properties() {
        let (sys, _, _) = normalized_system(3);
        let tower = sys.coarse_tower();
        let c = Complex64::new(-2.5, 1.0);
        let constant = TwistedFn::Scalar(CylFn::constant(&sys.coarse(), c));
        for &b in &[0.0, 1.0, 7.0] {
            let rep = norm_1b(&constant, b, &tower).unwrap();
            assert_relative_eq!(rep.norm_1b, c.norm(), epsilon = 1e-12);
            assert_eq!(rep.c1_seminorm, 0.0);
        }
        let mut rng = SplitMix64::new(33);
        let h = TwistedFn::Scalar(CylFn::from_values(
            sys.coarse().depth,
            (0..sys.coarse().len())
                .map(|_| Complex64::new(rng.normal(), rng.normal()))
                .collect(),
        ));
        let n1 = norm_1b(&h, 1.0, &tower).unwrap();
        let n3 = norm_1b(&h, 3.0, &tower).unwrap();
        let n9 = norm_1b(&h, 9.0, &tower).unwrap();
        assert!(n1.norm_1b >= n3.norm_1b && n3.norm_1b >= n9.norm_1b);
        // ||H||_{1,1} equals the full C1 norm.
        assert_relative_eq!(n1.norm_1b, n1.sup + n1.c1_seminorm, epsilon = 1e-14);
        // Homogeneity.
        let mut h2 = h.clone();
        h2.scale(2.0);
        let n2 = norm_1b(&h2, 3.0, &tower).unwrap();
        assert_relative_eq!(n2.norm_1b, 2.0 * n3.norm_1b, epsilon = 1e-12);
    }

    #[test]
    fn lasota_yorke_bounds_hold() {
        let (sys, f0, _) = normalized_system(4);
        let op = TwistedOperator::new(&sys, f0, TwistRep::trivial()).unwrap();
        let hyp = sys.group.hyperbolicity(4).unwrap();
        let a0 = fit_a0(&op, hyp.kappa2, 6, 101).unwrap();
        for &(b, k) in &[(0.0, 1usize), (5.0, 1), (5.0, 3), (40.0, 2), (200.0, 2), (200.0, 4)] {
            let rep = lasota_yorke_check(&op, b, k, a0, hyp.kappa2, 6, 55).unwrap();
            assert!(
                rep.pass,
                "LY failed at B={b} k={k}: measured {} bound {}",
                rep.b_measured, rep.b_bound
            );
        }
        // Constant h stays essentially constant: the measured constant is
        // pure roundoff over tiny sibling distances, far below the bound.
        let h = CylFn::constant(&sys.coarse(), 1.0);
        let lh = op.untwisted_apply(&h).unwrap();
        let measured = log_lipschitz(&lh.values, &sys.coarse_tower()).unwrap();
        assert!(measured <= 0.01 * a0, "constant input: {measured} vs A0 {a0}");
    }
}
