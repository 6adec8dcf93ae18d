//! Correlation decay for the suspension of the boundary map by its roof
//! function (and SO(2) fiber in the kleinian family), computed by exact
//! transport of cylinder masses along representative orbits.

use num_complex::Complex64;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::shift::CylinderPartition;
use crate::thermo::SymbolicSystem;

/// phi(u, s, theta) = base(u) e^{i omega s} e^{i fiber theta}, with the base
/// a real function on obs-depth cylinders.
#[derive(Debug, Clone)]
pub struct Observable {
    pub base: Vec<f64>,
    pub omega: f64,
    pub fiber: i64,
}

#[derive(Debug, Clone)]
pub struct DecayCurve {
    pub t: Vec<f64>,
    pub corr: Vec<f64>,
    pub abs_corr: Vec<f64>,
    pub non_mixing_warning: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ExpFit {
    /// Fitted decay exponent: |corr| ~ C e^{-eta t}.
    pub eta: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Suspension over the depth-K cylinder base with masses nu_U, roof and
/// holonomy evaluated exactly along representative orbits.
#[derive(Debug)]
pub struct SuspensionModel {
    pub nuu: Vec<f64>,
    pub nu_bar: f64,
    pub obs_partition: CylinderPartition,
    /// Per coarse cylinder: roof values along the orbit of its representative.
    orbit_tau: Vec<Vec<f64>>,
    orbit_theta: Vec<Vec<f64>>,
    /// Per coarse cylinder and orbit step: index into obs-depth cylinders.
    orbit_obs: Vec<Vec<u32>>,
    pub non_mixing: bool,
    /// Largest time for which the transported observable is still resolved
    /// by the base depth: beyond it the representative orbits only carry
    /// their periodic tails.
    pub horizon: f64,
}

fn coding_letter(word: &[u8], j: usize) -> u8 {
    if j < word.len() {
        word[j]
    } else {
        *word.last().unwrap()
    }
}

impl SuspensionModel {
    pub fn new(
        system: &SymbolicSystem,
        nuu: Vec<f64>,
        obs_depth: usize,
        n_steps: usize,
    ) -> Result<Self> {
        let model = Self::build(system, nuu, obs_depth, n_steps, None)?;
        Ok(model)
    }

    /// Product-structure control: identical base dynamics, constant roof.
    pub fn with_constant_roof(
        system: &SymbolicSystem,
        nuu: Vec<f64>,
        obs_depth: usize,
        n_steps: usize,
        roof: f64,
    ) -> Result<Self> {
        Self::build(system, nuu, obs_depth, n_steps, Some(roof))
    }

    fn build(
        system: &SymbolicSystem,
        nuu: Vec<f64>,
        obs_depth: usize,
        n_steps: usize,
        constant_roof: Option<f64>,
    ) -> Result<Self> {
        let group = &system.group;
        let coarse = &system.coarse();
        if nuu.len() != coarse.len() {
            return Err(Error::Shape { expected: coarse.len(), got: nuu.len() });
        }
        if obs_depth > coarse.depth {
            return Err(Error::Precondition(
                "observable depth must not exceed the base depth".into(),
            ));
        }
        let obs_partition = CylinderPartition::at_depth(group, obs_depth)?;
        let obs_index: HashMap<&[u8], u32> = obs_partition
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_slice(), i as u32))
            .collect();
        let mut orbit_tau = Vec::with_capacity(coarse.len());
        let mut orbit_theta = Vec::with_capacity(coarse.len());
        let mut orbit_obs = Vec::with_capacity(coarse.len());
        for i in 0..coarse.len() {
            let word = &coarse.words[i];
            let mut taus = Vec::with_capacity(n_steps);
            let mut thetas = Vec::with_capacity(n_steps);
            let mut obs = Vec::with_capacity(n_steps);
            for j in 0..n_steps {
                // sigma^j of the representative is the representative of the
                // shifted padded word; its first-return data comes from the
                // branch of letter coding[j] at the next orbit point.
                let letter = coding_letter(word, j) as usize;
                let tail: Vec<u8> = (j + 1..j + 1 + coarse.depth)
                    .map(|l| coding_letter(word, l))
                    .collect();
                let next_point = {
                    let last = *tail.last().unwrap() as usize;
                    let prefix = &tail[..tail.len() - 1];
                    group
                        .word_map(prefix)
                        .apply(group.attracting_fixed_point(last))?
                };
                let d = group.branch_derivative(letter, next_point)?;
                taus.push(constant_roof.unwrap_or(-d.norm().ln()));
                thetas.push(d.arg());
                let obs_word: Vec<u8> =
                    (j..j + obs_depth).map(|l| coding_letter(word, l)).collect();
                obs.push(*obs_index.get(obs_word.as_slice()).ok_or(Error::NotInLimitChart)?);
            }
            orbit_tau.push(taus);
            orbit_theta.push(thetas);
            orbit_obs.push(obs);
        }
        let nu_bar: f64 = nuu
            .iter()
            .zip(&orbit_tau)
            .map(|(w, taus)| w * taus[0])
            .sum();
        // Roof variance under nu_U detects the product-structure case.
        let mean: f64 = nu_bar / nuu.iter().sum::<f64>();
        let var: f64 = nuu
            .iter()
            .zip(&orbit_tau)
            .map(|(w, taus)| w * (taus[0] - mean) * (taus[0] - mean))
            .sum();
        // Exactness horizon: the s-window at time t reaches crossings up to
        // Birkhoff time t + tau_0, and only the first depth - obs_depth
        // crossings carry sharp letters.
        let genuine = coarse.depth.saturating_sub(obs_depth).min(n_steps.saturating_sub(1));
        let horizon = orbit_tau
            .iter()
            .map(|taus| taus.iter().take(genuine + 1).sum::<f64>() - taus[0])
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            nuu,
            nu_bar,
            obs_partition,
            orbit_tau,
            orbit_theta,
            orbit_obs,
            non_mixing: var < 1e-10,
            horizon,
        })
    }

    pub fn check_observable(&self, obs: &Observable) -> Result<()> {
        if obs.base.len() != self.obs_partition.len() {
            return Err(Error::Shape { expected: self.obs_partition.len(), got: obs.base.len() });
        }
        Ok(())
    }

    /// Mean of an observable under the flow-invariant measure.
    pub fn mean(&self, obs: &Observable) -> Result<Complex64> {
        self.check_observable(obs)?;
        if obs.fiber != 0 {
            return Ok(Complex64::ZERO);
        }
        let mut total = Complex64::ZERO;
        for i in 0..self.nuu.len() {
            let tau = self.orbit_tau[i][0];
            let base = obs.base[self.orbit_obs[i][0] as usize];
            total += self.nuu[i] * base * phase_integral(obs.omega, 0.0, tau);
        }
        Ok(total / self.nu_bar)
    }

    /// Raw correlation integral of phi after time t against psi.
    pub fn pairing(&self, phi: &Observable, psi: &Observable, t: f64) -> Result<Complex64> {
        self.check_observable(phi)?;
        self.check_observable(psi)?;
        if t < 0.0 {
            return Err(Error::Precondition("t must be nonnegative".into()));
        }
        // Haar integral over the fiber vanishes unless the indices cancel.
        if phi.fiber + psi.fiber != 0 {
            return Ok(Complex64::ZERO);
        }
        let omega_sum = phi.omega + psi.omega;
        let mut total = Complex64::ZERO;
        for i in 0..self.nuu.len() {
            let taus = &self.orbit_tau[i];
            let tau0 = taus[0];
            let psi_val = psi.base[self.orbit_obs[i][0] as usize];
            if psi_val == 0.0 && self.nuu[i] == 0.0 {
                continue;
            }
            let mut birkhoff = 0.0;
            let mut holonomy = 0.0;
            let mut cyl_total = Complex64::ZERO;
            for (n, &tau_n) in taus.iter().enumerate() {
                // s-window with sigma^n-crossing: birkhoff <= s + t < birkhoff + tau_n.
                let lo = (birkhoff - t).max(0.0);
                let hi = (birkhoff + tau_n - t).min(tau0);
                if hi > lo {
                    let phi_val = phi.base[self.orbit_obs[i][n] as usize];
                    let prefactor = Complex64::from_polar(
                        1.0,
                        phi.omega * (t - birkhoff) + phi.fiber as f64 * holonomy,
                    );
                    cyl_total += phi_val * prefactor * phase_integral(omega_sum, lo, hi);
                }
                birkhoff += tau_n;
                holonomy += self.orbit_theta[i][n];
                if birkhoff > t + tau0 {
                    break;
                }
            }
            if birkhoff <= t + tau0 {
                return Err(Error::Depth {
                    words: taus.len(),
                    budget: taus.len(),
                });
            }
            total += self.nuu[i] * psi_val * cyl_total;
        }
        Ok(total / self.nu_bar)
    }

    /// Centered correlation curve over a time grid inside the horizon.
    pub fn decay_curve(&self, phi: &Observable, psi: &Observable, t_grid: &[f64]) -> Result<DecayCurve> {
        let t_top = t_grid.iter().cloned().fold(0.0f64, f64::max);
        if t_top > self.horizon {
            return Err(Error::Precondition(format!(
                "t = {t_top} beyond the resolved horizon {:.3}; deepen the base partition",
                self.horizon
            )));
        }
        let mean_product = self.mean(phi)? * self.mean(psi)?;
        let mut t = Vec::with_capacity(t_grid.len());
        let mut corr = Vec::with_capacity(t_grid.len());
        let mut abs_corr = Vec::with_capacity(t_grid.len());
        for &tt in t_grid {
            let c = self.pairing(phi, psi, tt)? - mean_product;
            t.push(tt);
            corr.push(c.re);
            abs_corr.push(c.norm());
        }
        Ok(DecayCurve { t, corr, abs_corr, non_mixing_warning: self.non_mixing })
    }
}

/// Deterministic Lipschitz test observable on obs-depth cylinders.
pub fn default_base(obs_partition: &CylinderPartition) -> Vec<f64> {
    obs_partition
        .words
        .iter()
        .map(|w| {
            let head = if w[0] == 0 { 1.0 } else { -0.3 };
            head + 0.2 * w.get(1).copied().unwrap_or(0) as f64
        })
        .collect()
}

fn phase_integral(omega: f64, lo: f64, hi: f64) -> Complex64 {
    if omega.abs() < 1e-14 {
        Complex64::new(hi - lo, 0.0)
    } else {
        (Complex64::from_polar(1.0, omega * hi) - Complex64::from_polar(1.0, omega * lo))
            / Complex64::new(0.0, omega)
    }
}

/// Least-squares fit of log |corr| against t over points above the floor.
pub fn fit_exponential(curve: &DecayCurve, floor: f64) -> ExpFit {
    let pts: Vec<(f64, f64)> = curve
        .t
        .iter()
        .zip(&curve.abs_corr)
        .filter(|(_, &c)| c > floor)
        .map(|(&t, &c)| (t, c.ln()))
        .collect();
    if pts.len() < 3 {
        return ExpFit { eta: 0.0, r_squared: 0.0, points_used: pts.len() };
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|(_, y)| (y - mean_y) * (y - mean_y)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|(x, y)| {
            let p = intercept + slope * x;
            (y - p) * (y - p)
        })
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    ExpFit { eta: -slope, r_squared: r2, points_used: pts.len() }
}
