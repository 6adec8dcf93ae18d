//! The 2-step nilpotent horospherical group n+ = s+ ⊕ [s+, s+] modeled on
//! K^{n-1} ⊕ Im K, with exact group law, dilations, and a homogeneous gauge
//! standing in for the Carnot-Caratheodory metric.

use crate::error::{Error, Result};
use crate::kfield::{im_bracket, KField};

/// Gauge constant in (|v|^4 + C |z|^2)^{1/4}, matching the Cygan/Koranyi
/// normalization.
pub const GAUGE_C: f64 = 16.0;

/// Coordinate model of n+ for one family: K^{n-1} ⊕ Im K.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HoroModel {
    pub field: KField,
    pub n: usize,
}

impl HoroModel {
    pub fn new(field: KField, n: usize) -> Self {
        assert!(n >= 2);
        Self { field, n }
    }

    pub fn v_dim(&self) -> usize {
        self.field.dim() * (self.n - 1)
    }

    pub fn z_dim(&self) -> usize {
        self.field.im_dim()
    }

    pub fn zero(&self) -> NilPoint {
        NilPoint {
            model: *self,
            v: vec![0.0; self.v_dim()],
            z: vec![0.0; self.z_dim()],
        }
    }

    pub fn point(&self, v: Vec<f64>, z: Vec<f64>) -> Result<NilPoint> {
        if v.len() != self.v_dim() || z.len() != self.z_dim() {
            return Err(Error::Shape {
                expected: self.v_dim() + self.z_dim(),
                got: v.len() + z.len(),
            });
        }
        Ok(NilPoint { model: *self, v, z })
    }
}

/// A point of n+ in (v, z) coordinates, v in s+ and z in [s+, s+].
#[derive(Debug, Clone, PartialEq)]
pub struct NilPoint {
    pub model: HoroModel,
    pub v: Vec<f64>,
    pub z: Vec<f64>,
}

impl NilPoint {
    pub fn v_norm(&self) -> f64 {
        self.v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn z_norm(&self) -> f64 {
        self.z.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Norm for the orthogonal inner product on s+ ⊕ [s+, s+].
    pub fn norm_perp(&self) -> f64 {
        (self.v.iter().map(|x| x * x).sum::<f64>() + self.z.iter().map(|x| x * x).sum::<f64>())
            .sqrt()
    }

    pub fn inverse(&self) -> NilPoint {
        NilPoint {
            model: self.model,
            v: self.v.iter().map(|x| -x).collect(),
            z: self.z.iter().map(|x| -x).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().all(|&x| x == 0.0) && self.z.iter().all(|&x| x == 0.0)
    }
}

/// <x, y>_perp, making s+ and [s+, s+] orthogonal.
pub fn inner_perp(x: &NilPoint, y: &NilPoint) -> f64 {
    x.v.iter().zip(&y.v).map(|(a, b)| a * b).sum::<f64>()
        + x.z.iter().zip(&y.z).map(|(a, b)| a * b).sum::<f64>()
}

/// Group product (v_x + v_y, z_x + z_y + [v_x, v_y]/2); exact 2-step BCH.
pub fn nil_product(x: &NilPoint, y: &NilPoint) -> Result<NilPoint> {
    if x.model != y.model {
        return Err(Error::Model("nil points from different models".into()));
    }
    let v: Vec<f64> = x.v.iter().zip(&y.v).map(|(a, b)| a + b).collect();
    let half_bracket = im_bracket(x.model.field, &x.v, &y.v);
    let z: Vec<f64> = x
        .z
        .iter()
        .zip(&y.z)
        .zip(&half_bracket)
        .map(|((a, b), c)| a + b + 0.5 * c)
        .collect();
    // For K = R the bracket is empty and z stays empty.
    let z = if x.model.z_dim() == 0 { vec![] } else { z };
    Ok(NilPoint { model: x.model, v, z })
}

/// x^{-1} . y, the left-invariant difference used by the gauge distance.
pub fn nil_difference(x: &NilPoint, y: &NilPoint) -> Result<NilPoint> {
    nil_product(&x.inverse(), y)
}

/// Nonisotropic dilation (e^{-t} v, e^{-2t} z).
pub fn dilate(x: &NilPoint, t: f64) -> NilPoint {
    let s = (-t).exp();
    NilPoint {
        model: x.model,
        v: x.v.iter().map(|a| s * a).collect(),
        z: x.z.iter().map(|a| s * s * a).collect(),
    }
}

/// Homogeneous gauge (|v|^4 + 16 |z|^2)^{1/4}.
pub fn gauge(x: &NilPoint) -> f64 {
    let v2 = x.v.iter().map(|a| a * a).sum::<f64>();
    let z2 = x.z.iter().map(|a| a * a).sum::<f64>();
    (v2 * v2 + GAUGE_C * z2).powf(0.25)
}

/// Left-invariant gauge distance gauge(x^{-1} . y).
pub fn gauge_dist(x: &NilPoint, y: &NilPoint) -> Result<f64> {
    Ok(gauge(&nil_difference(x, y)?))
}

/// Membership in the ring set R_kappa(s+): unit vectors of n+ whose
/// s+-component has norm at least kappa. The sup over unit w' in s+ of
/// |<w, w'>_perp| equals |v_w| by Cauchy-Schwarz.
pub fn ring_membership(w: &NilPoint, kappa: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::Precondition(format!("kappa = {kappa} outside [0,1]")));
    }
    let deviation = (w.norm_perp() - 1.0).abs();
    if deviation > 1e-10 {
        return Err(Error::NotUnitVector { deviation });
    }
    Ok(w.v_norm() >= kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn heis() -> HoroModel {
        HoroModel::new(KField::Complex, 2)
    }

    fn random_point(m: &HoroModel, rng: &mut SplitMix64) -> NilPoint {
        let v = (0..m.v_dim()).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let z = (0..m.z_dim()).map(|_| rng.uniform(-2.0, 2.0)).collect();
        m.point(v, z).unwrap()
    }

    #[test]
    fn identity_and_inverse() {
        let m = heis();
        let mut rng = SplitMix64::new(3);
        let x = random_point(&m, &mut rng);
        let e = m.zero();
        assert_eq!(nil_product(&x, &e).unwrap(), x);
        let p = nil_product(&x, &x.inverse()).unwrap();
        assert!(p.is_zero(), "{:?}", p);
    }

    #[test]
    fn heisenberg_z_increment() {
        // v_x = 1, v_y = i: z-increment [1, i]/2 = Im(1 * conj(i)) = -i.
        let m = heis();
        let x = m.point(vec![1.0, 0.0], vec![0.0]).unwrap();
        let y = m.point(vec![0.0, 1.0], vec![0.0]).unwrap();
        let p = nil_product(&x, &y).unwrap();
        assert_eq!(p.z, vec![-1.0]);
        // Oracle straight from the K-model bracket.
        let br = im_bracket(KField::Complex, &x.v, &y.v);
        assert_eq!(p.z[0], 0.5 * br[0]);
    }

    #[test]
    fn associativity_quaternionic() {
        let m = HoroModel::new(KField::Quaternion, 3);
        let mut rng = SplitMix64::new(9);
        for _ in 0..20 {
            let (x, y, w) = (
                random_point(&m, &mut rng),
                random_point(&m, &mut rng),
                random_point(&m, &mut rng),
            );
            let left = nil_product(&nil_product(&x, &y).unwrap(), &w).unwrap();
            let right = nil_product(&x, &nil_product(&y, &w).unwrap()).unwrap();
            for (a, b) in left.z.iter().zip(&right.z) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn two_step_nilpotency() {
        // [[v, w], u] = 0: central z-parts never feed back into brackets.
        let m = HoroModel::new(KField::Quaternion, 2);
        let mut rng = SplitMix64::new(13);
        let central = m.point(vec![0.0; m.v_dim()], vec![0.3, -0.7, 1.1]).unwrap();
        let x = random_point(&m, &mut rng);
        // Conjugation by a central element is trivial.
        let conj = nil_product(
            &nil_product(&central, &x).unwrap(),
            &central.inverse(),
        )
        .unwrap();
        for (a, b) in conj.v.iter().zip(&x.v) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
        for (a, b) in conj.z.iter().zip(&x.z) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn dilation_is_automorphism_and_gauge_homogeneous() {
        let m = heis();
        let mut rng = SplitMix64::new(21);
        for _ in 0..10 {
            let x = random_point(&m, &mut rng);
            let y = random_point(&m, &mut rng);
            let t = rng.uniform(-1.5, 1.5);
            let lhs = dilate(&nil_product(&x, &y).unwrap(), t);
            let rhs = nil_product(&dilate(&x, t), &dilate(&y, t)).unwrap();
            for (a, b) in lhs.v.iter().chain(&lhs.z).zip(rhs.v.iter().chain(&rhs.z)) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
            assert_relative_eq!(gauge(&dilate(&x, t)), (-t).exp() * gauge(&x), epsilon = 1e-12);
        }
        // t = log 2 halves the gauge.
        let x = random_point(&m, &mut rng);
        assert_relative_eq!(gauge(&dilate(&x, 2.0f64.ln())), gauge(&x) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn gauge_zero_and_abelian_case() {
        let m = heis();
        assert_eq!(gauge(&m.zero()), 0.0);
        let abelian = HoroModel::new(KField::Real, 3);
        let x = abelian.point(vec![3.0, 4.0], vec![]).unwrap();
        assert_relative_eq!(gauge(&x), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn gauge_left_invariance_exact() {
        let m = HoroModel::new(KField::Quaternion, 2);
        let mut rng = SplitMix64::new(29);
        for _ in 0..20 {
            let g = random_point(&m, &mut rng);
            let x = random_point(&m, &mut rng);
            let y = random_point(&m, &mut rng);
            let d0 = gauge_dist(&x, &y).unwrap();
            let d1 = gauge_dist(
                &nil_product(&g, &x).unwrap(),
                &nil_product(&g, &y).unwrap(),
            )
            .unwrap();
            assert_relative_eq!(d0, d1, epsilon = 1e-12 * (1.0 + d0));
        }
    }

    #[test]
    fn ball_translation_identity() {
        // Membership in gauge balls is preserved under left translation.
        let m = heis();
        let mut rng = SplitMix64::new(37);
        let center = random_point(&m, &mut rng);
        let g = random_point(&m, &mut rng);
        for _ in 0..50 {
            let p = random_point(&m, &mut rng);
            let inside = gauge_dist(&center, &p).unwrap() < 1.0;
            let moved = gauge_dist(
                &nil_product(&g, &center).unwrap(),
                &nil_product(&g, &p).unwrap(),
            )
            .unwrap()
                < 1.0;
            assert_eq!(inside, moved);
        }
    }

    #[test]
    fn quasi_triangle_constant_reported() {
        let m = heis();
        let mut rng = SplitMix64::new(41);
        let mut worst: f64 = 0.0;
        for _ in 0..2000 {
            let x = random_point(&m, &mut rng);
            let y = random_point(&m, &mut rng);
            let q = gauge(&nil_product(&x, &y).unwrap()) / (gauge(&x) + gauge(&y));
            worst = worst.max(q);
        }
        // The Koranyi-type gauge is quasi-subadditive with a modest constant.
        assert!(worst < 2.0, "measured quasi-triangle constant {worst}");
    }

    #[test]
    fn ring_membership_cases() {
        let m = heis();
        // Unit vector in s+ belongs for every kappa <= 1.
        let w = m.point(vec![1.0, 0.0], vec![0.0]).unwrap();
        assert!(ring_membership(&w, 1.0).unwrap());
        assert!(ring_membership(&w, 0.0).unwrap());
        // Unit vector in [s+, s+] fails at kappa = 0.5.
        let wz = m.point(vec![0.0, 0.0], vec![1.0]).unwrap();
        assert!(!ring_membership(&wz, 0.5).unwrap());
        assert!(ring_membership(&wz, 0.0).unwrap());
        // Balanced vector: |v| = |z| = 1/sqrt(2).
        let s = 1.0 / 2.0f64.sqrt();
        let wb = m.point(vec![s, 0.0], vec![s]).unwrap();
        assert!(!ring_membership(&wb, 0.7072).unwrap());
        assert!(ring_membership(&wb, 0.7071).unwrap());
        // Non-unit vectors are rejected.
        let big = m.point(vec![1.0, 1.0], vec![1.0]).unwrap();
        assert!(matches!(ring_membership(&big, 0.5), Err(Error::NotUnitVector { .. })));
        assert!(matches!(
            ring_membership(&w, 1.5),
            Err(Error::Precondition(_))
        ));
    }

    proptest! {
        #[test]
        fn prop_product_inverse_identity(vx in -3.0f64..3.0, vy in -3.0f64..3.0, z in -3.0f64..3.0) {
            let m = heis();
            let x = m.point(vec![vx, vy], vec![z]).unwrap();
            let p = nil_product(&x, &x.inverse()).unwrap();
            prop_assert!(p.is_zero());
        }

        #[test]
        fn prop_gauge_definite(vx in -3.0f64..3.0, vy in -3.0f64..3.0, z in -3.0f64..3.0) {
            let m = heis();
            let x = m.point(vec![vx, vy], vec![z]).unwrap();
            let g = gauge(&x);
            prop_assert!(g >= 0.0);
            prop_assert_eq!(g == 0.0, x.is_zero());
        }
    }
}
