//! Non-concentration witness search: inside a gauge annulus around a sample
//! point, find limit-set directions with a definite component along a ring
//! direction of s+.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kfield::KField;
use crate::nil::{dilate, gauge_dist, inner_perp, nil_difference, nil_product, ring_membership, HoroModel, NilPoint};
use crate::rng::SplitMix64;

#[derive(Debug, Clone)]
pub struct NcpWitness {
    /// Largest grid delta admitting a witness.
    pub delta_best: f64,
    /// Index of a witness sample realizing it.
    pub witness: usize,
    /// The attained pairing |<(n_x)^{-1} y, w>| / eps.
    pub pairing_over_eps: f64,
}

/// Geometric delta grid 2^-1 .. 2^-10.
pub fn default_delta_grid() -> Vec<f64> {
    (1..=10).map(|i| 0.5f64.powi(i)).collect()
}

/// Searches the annulus eps*delta <= d_gauge(x, y) < eps for a sample y with
/// |<(n_x)^{-1} . y, w>| >= eps*delta, trying the largest delta first.
pub fn ncp_witness_search(
    samples: &[NilPoint],
    x_idx: usize,
    eps: f64,
    w: &NilPoint,
    kappa: f64,
    delta_grid: &[f64],
) -> Result<NcpWitness> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Precondition(format!("eps = {eps} outside (0,1)")));
    }
    if !ring_membership(w, kappa)? {
        return Err(Error::Precondition(format!(
            "w outside the ring set at kappa = {kappa}"
        )));
    }
    let x = &samples[x_idx];
    for &delta in delta_grid {
        let mut best: Option<(usize, f64)> = None;
        for (j, y) in samples.iter().enumerate() {
            if j == x_idx {
                continue;
            }
            let d = gauge_dist(x, y)?;
            if d < eps * delta || d >= eps {
                continue;
            }
            let pairing = inner_perp(&nil_difference(x, y)?, w).abs();
            if pairing >= eps * delta {
                match best {
                    Some((_, p)) if p >= pairing => {}
                    _ => best = Some((j, pairing)),
                }
            }
        }
        if let Some((j, p)) = best {
            return Ok(NcpWitness { delta_best: delta, witness: j, pairing_over_eps: p / eps });
        }
    }
    Err(Error::NoWitness { x_index: x_idx })
}

/// Complex chart samples as points of the abelian horospherical model
/// (K = R): the fuchsian chart is 1-dimensional, the kleinian chart is
/// 2-dimensional.
pub fn chart_to_nil(points: &[Complex64], two_dim: bool) -> Vec<NilPoint> {
    let model = if two_dim {
        HoroModel::new(KField::Real, 3)
    } else {
        HoroModel::new(KField::Real, 2)
    };
    points
        .iter()
        .map(|z| {
            let v = if two_dim { vec![z.re, z.im] } else { vec![z.re] };
            model.point(v, vec![]).unwrap()
        })
        .collect()
}

/// Self-similar synthetic cloud on the Heisenberg model: the attractor of
/// contracting maps p -> a_i . dilate(p, t), sampled over all words of the
/// given depth. The translations must spread s+ for the cloud to be
/// nondegenerate.
pub fn heisenberg_ifs_cloud(
    model: HoroModel,
    translations: &[NilPoint],
    contraction_t: f64,
    depth: usize,
) -> Result<Vec<NilPoint>> {
    if contraction_t <= 0.0 {
        return Err(Error::Precondition("contraction_t must be positive".into()));
    }
    let mut current = vec![model.zero()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(current.len() * translations.len());
        for p in &current {
            for a in translations {
                next.push(nil_product(a, &dilate(p, contraction_t))?);
            }
        }
        if next.len() > 1_000_000 {
            return Err(Error::Depth { words: next.len(), budget: 1_000_000 });
        }
        current = next;
    }
    Ok(current)
}

/// Degenerate control cloud: points confined to the hyperplane through x
/// orthogonal to w in the perp inner product, so every NCP pairing vanishes.
pub fn degenerate_cloud(
    model: HoroModel,
    x: &NilPoint,
    w: &NilPoint,
    count: usize,
    scale: f64,
    seed: u64,
) -> Result<Vec<NilPoint>> {
    let mut rng = SplitMix64::new(seed);
    let mut out = vec![x.clone()];
    let wv = &w.v;
    let wz = &w.z;
    let wnorm2 = inner_perp(w, w);
    for _ in 0..count {
        let mut d = model.zero();
        for v in &mut d.v {
            *v = scale * rng.normal();
        }
        for z in &mut d.z {
            *z = scale * scale * rng.normal();
        }
        // Project the offset onto the w-orthogonal hyperplane.
        let overlap: f64 = d.v.iter().zip(wv).map(|(a, b)| a * b).sum::<f64>()
            + d.z.iter().zip(wz).map(|(a, b)| a * b).sum::<f64>();
        let c = overlap / wnorm2;
        for (dv, wv) in d.v.iter_mut().zip(wv) {
            *dv -= c * wv;
        }
        for (dz, wz) in d.z.iter_mut().zip(wz) {
            *dz -= c * wz;
        }
        out.push(nil_product(x, &d)?);
    }
    Ok(out)
}
