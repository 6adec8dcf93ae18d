//! Unit-determinant Mobius transformations on the Riemann sphere, with exact
//! image circles, derivatives, and fixed points.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C = Complex64;

const POLE_EPS: f64 = 1e-14;

/// z -> (a z + b) / (c z + d) with ad - bc = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
}

/// A circle in the boundary chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disk {
    pub fn new(center: C, radius: f64) -> Self {
        Self { center: [center.re, center.im], radius }
    }

    pub fn c(&self) -> C {
        C::new(self.center[0], self.center[1])
    }

    pub fn contains(&self, z: C) -> bool {
        (z - self.c()).norm() <= self.radius
    }

    pub fn dist_to(&self, z: C) -> f64 {
        (z - self.c()).norm() - self.radius
    }
}

impl Mobius {
    pub fn new(a: C, b: C, c: C, d: C) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::new(C::new(1.0, 0.0), C::ZERO, C::ZERO, C::new(1.0, 0.0))
    }

    pub fn det(&self) -> C {
        self.a * self.d - self.b * self.c
    }

    /// Scale entries so det = 1 (up to overall sign, which is trivial in PSL).
    pub fn normalized(&self) -> Result<Self> {
        let det = self.det();
        if det.norm() < POLE_EPS {
            return Err(Error::Model("singular Mobius matrix".into()));
        }
        let s = det.sqrt();
        Ok(Self::new(self.a / s, self.b / s, self.c / s, self.d / s))
    }

    pub fn inverse(&self) -> Self {
        // For det = 1 the inverse is [[d, -b], [-c, a]].
        Self::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn compose(&self, o: &Mobius) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    pub fn pole(&self) -> Option<C> {
        if self.c.norm() < POLE_EPS {
            None
        } else {
            Some(-self.d / self.c)
        }
    }

    pub fn apply(&self, z: C) -> Result<C> {
        let den = self.c * z + self.d;
        if den.norm() < POLE_EPS {
            return Err(Error::Pole);
        }
        Ok((self.a * z + self.b) / den)
    }

    /// Derivative det/(cz + d)^2; modulus is the conformal factor and the
    /// argument is the frame rotation.
    pub fn derivative(&self, z: C) -> Result<C> {
        let den = self.c * z + self.d;
        if den.norm() < POLE_EPS {
            return Err(Error::Pole);
        }
        let d2 = den * den;
        Ok(self.det() / d2)
    }

    /// Derivative 1/(cz + d)^2 for matrices known to have det = 1. Avoids the
    /// cancellation in computing ad - bc for long word compositions.
    pub fn derivative1(&self, z: C) -> Result<C> {
        let den = self.c * z + self.d;
        if den.norm() < POLE_EPS {
            return Err(Error::Pole);
        }
        Ok(1.0 / (den * den))
    }

    /// Exact image of a circle that does not pass through the pole.
    pub fn image_disk(&self, disk: &Disk) -> Result<Disk> {
        let c0 = disk.c();
        let r = disk.radius;
        if self.c.norm() < POLE_EPS {
            // Affine map z -> (a/d) z + b/d.
            let scale = self.a / self.d;
            let center = scale * c0 + self.b / self.d;
            return Ok(Disk::new(center, scale.norm() * r));
        }
        let pole = -self.d / self.c;
        let w = c0 - pole;
        let denom = w.norm_sqr() - r * r;
        if denom.abs() < POLE_EPS {
            return Err(Error::Pole);
        }
        // Standard circle image: the image center is gamma(z_c) for
        // z_c = c0 - r^2 / conj(c0 - pole), and the radius follows from the
        // conformal factor |det| / |c|^2 / |denom|.
        let z_c = c0 - r * r / w.conj();
        let center = self.apply(z_c)?;
        let radius = (self.det().norm() / self.c.norm_sqr()) * r / denom.abs();
        Ok(Disk::new(center, radius))
    }

    /// Fixed points, attracting first when loxodromic/hyperbolic.
    pub fn fixed_points(&self) -> Result<(C, C)> {
        if self.c.norm() < POLE_EPS {
            // Fixed point at infinity not representable in this chart.
            return Err(Error::Domain("parabolic/affine map fixes infinity".into()));
        }
        // c z^2 + (d - a) z - b = 0.
        let disc = ((self.d - self.a) * (self.d - self.a) + 4.0 * self.b * self.c).sqrt();
        let z1 = (self.a - self.d + disc) / (2.0 * self.c);
        let z2 = (self.a - self.d - disc) / (2.0 * self.c);
        // Attracting fixed point has |derivative| < 1.
        let d1 = self.derivative(z1)?.norm();
        if d1 < 1.0 {
            Ok((z1, z2))
        } else {
            Ok((z2, z1))
        }
    }

    /// Eigenvalues of the matrix, |lambda| >= 1 first.
    pub fn eigenvalues(&self) -> (C, C) {
        let tr = self.a + self.d;
        let det = self.det();
        let disc = (tr * tr - 4.0 * det).sqrt();
        let l1 = (tr + disc) / 2.0;
        let l2 = (tr - disc) / 2.0;
        if l1.norm() >= l2.norm() {
            (l1, l2)
        } else {
            (l2, l1)
        }
    }
}

/// Mobius map sending the exterior of the disk (c1, r1) onto the interior of
/// the disk (c2, r2), twisted by the unit factor sigma:
/// z -> c2 + sigma r1 r2 / (z - c1), normalized to det 1.
pub fn pair_disks(c1: C, r1: f64, c2: C, r2: f64, sigma: C) -> Result<Mobius> {
    let m = Mobius::new(c2, sigma * r1 * r2 - c1 * c2, C::new(1.0, 0.0), -c1);
    m.normalized()
}
