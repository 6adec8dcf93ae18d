//! The four-fold return-cocycle combination BP and its finite-difference
//! non-degeneracy: the AM-valued map
//! BP_j(u, u') = Phi(v_0 u)^{-1} Phi(v_0 u') Phi(v_j u')^{-1} Phi(v_j u)
//! paired against unit directions of a + m.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::schottky::{GroupFamily, SchottkyGroup};

/// Time and rotation components of an AM element (AM is abelian here).
pub type AmElement = (f64, f64);

/// Candidate section words: admissible words of the given length whose
/// terminal letter admits the base letter 0, chosen greedily to maximize the
/// minimal pairwise Hamming distance.
pub fn section_words(group: &SchottkyGroup, len: usize, count: usize) -> Result<Vec<Vec<u8>>> {
    let all = group.admissible_words(len)?;
    let candidates: Vec<Vec<u8>> = all
        .into_iter()
        .filter(|w| group.admissible(*w.last().unwrap() as usize, 0))
        .collect();
    if candidates.len() < count {
        return Err(Error::Precondition(format!(
            "only {} candidate sections of length {len}",
            candidates.len()
        )));
    }
    let hamming = |a: &[u8], b: &[u8]| a.iter().zip(b).filter(|(x, y)| x != y).count();
    let mut chosen: Vec<Vec<u8>> = vec![candidates[0].clone()];
    while chosen.len() < count {
        let best = candidates
            .iter()
            .filter(|c| !chosen.contains(c))
            .max_by_key(|c| chosen.iter().map(|s| hamming(c, s)).min().unwrap())
            .unwrap();
        chosen.push(best.clone());
    }
    Ok(chosen)
}

/// BP_j(u, u') as (time shift, rotation angle) from the word derivatives of
/// the two sections (unit determinant throughout).
pub fn bp_map(
    group: &SchottkyGroup,
    alpha0: &[u8],
    alphaj: &[u8],
    u: Complex64,
    uprime: Complex64,
) -> Result<AmElement> {
    for w in [alpha0, alphaj] {
        if !group.is_admissible_word(w) || !group.admissible(*w.last().unwrap() as usize, 0) {
            return Err(Error::Domain(format!("word {w:?} is not a section into the base letter")));
        }
    }
    let d0u = group.word_derivative(alpha0, u)?;
    let d0v = group.word_derivative(alpha0, uprime)?;
    let dju = group.word_derivative(alphaj, u)?;
    let djv = group.word_derivative(alphaj, uprime)?;
    // tau = -log |W'|, theta = arg W'; the combination telescopes to ratios.
    let dt = (d0u.norm() * djv.norm()).ln() - (d0v.norm() * dju.norm()).ln();
    let dtheta = ((d0v * dju) / (d0u * djv)).arg();
    let dtheta = if group.family == GroupFamily::Fuchsian { 0.0 } else { dtheta };
    Ok((dt, dtheta))
}

#[derive(Debug, Clone)]
pub struct LnicReport {
    /// min over (u, omega) of max over (j, Z) of |<dBP_{j,u}(Z), omega>|.
    pub epsilon2: f64,
    /// Largest Richardson deviation between steps h and 2h.
    pub richardson_dev: f64,
    pub sections: Vec<Vec<u8>>,
    pub grid_points: usize,
}

/// Central finite difference of BP_j(u, .) at u along the chart direction z.
fn bp_directional(
    group: &SchottkyGroup,
    alpha0: &[u8],
    alphaj: &[u8],
    u: Complex64,
    z: Complex64,
    h: f64,
) -> Result<AmElement> {
    let plus = bp_map(group, alpha0, alphaj, u, u + h * z)?;
    let minus = bp_map(group, alpha0, alphaj, u, u - h * z)?;
    Ok(((plus.0 - minus.0) / (2.0 * h), (plus.1 - minus.1) / (2.0 * h)))
}

/// Measures the non-degeneracy constant of the BP derivative pairing over a
/// grid of chart points and unit directions of a + m. The first section acts
/// as alpha_0; the rest are the alpha_j.
pub fn lnic_measure(
    group: &SchottkyGroup,
    sections: &[Vec<u8>],
    u_grid: &[Complex64],
    fd_step: f64,
) -> Result<LnicReport> {
    if sections.len() < 2 {
        return Err(Error::Precondition("need at least two sections".into()));
    }
    let alpha0 = &sections[0];
    let m_dim = match group.family {
        GroupFamily::Fuchsian => 0,
        GroupFamily::Kleinian => 1,
    };
    // Unit omega in a + m and unit Z along s+ chart directions.
    let omegas: Vec<(f64, f64)> = if m_dim == 0 {
        vec![(1.0, 0.0)]
    } else {
        (0..16)
            .map(|i| {
                let phi = std::f64::consts::TAU * i as f64 / 16.0;
                (phi.cos(), phi.sin())
            })
            .collect()
    };
    let dirs: Vec<Complex64> = match group.family {
        GroupFamily::Fuchsian => vec![Complex64::new(1.0, 0.0)],
        GroupFamily::Kleinian => (0..8)
            .map(|i| {
                let phi = std::f64::consts::TAU * i as f64 / 8.0;
                Complex64::new(phi.cos(), phi.sin())
            })
            .collect(),
    };
    let mut epsilon2 = f64::INFINITY;
    let mut richardson_dev: f64 = 0.0;
    for &u in u_grid {
        // Precompute derivatives per (section, direction) at both steps.
        let mut ders: Vec<Vec<AmElement>> = Vec::with_capacity(sections.len() - 1);
        for alphaj in &sections[1..] {
            let mut per_dir = Vec::with_capacity(dirs.len());
            for &z in &dirs {
                let d1 = bp_directional(group, alpha0, alphaj, u, z, fd_step)?;
                let d2 = bp_directional(group, alpha0, alphaj, u, z, 2.0 * fd_step)?;
                richardson_dev = richardson_dev
                    .max((d1.0 - d2.0).abs())
                    .max((d1.1 - d2.1).abs());
                per_dir.push(d1);
            }
            ders.push(per_dir);
        }
        for &(wa, wm) in &omegas {
            let mut best: f64 = 0.0;
            for per_dir in &ders {
                for d in per_dir {
                    best = best.max((d.0 * wa + d.1 * wm).abs());
                }
            }
            epsilon2 = epsilon2.min(best);
        }
    }
    Ok(LnicReport {
        epsilon2,
        richardson_dev,
        sections: sections.to_vec(),
        grid_points: u_grid.len(),
    })
}
