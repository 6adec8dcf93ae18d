//! Schottky groups acting on the boundary circle/sphere: ping-pong
//! certification, the expanding boundary map and its inverse branches,
//! limit-set sampling, Busemann cocycles, and Poincare series.
//!
//! Letters 0..k are the generators, letters k..2k their inverses; the disk
//! of a letter is the region its transformation maps into. The transition
//! matrix forbids a letter followed by its inverse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobius::{Disk, Mobius, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupFamily {
    /// PSL(2,R): boundary R u {inf}, trivial holonomy group M.
    Fuchsian,
    /// PSL(2,C): boundary C u {inf}, M isomorphic to SO(2).
    Kleinian,
}

/// On-disk JSON schema for a Schottky group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupFile {
    pub family: GroupFamily,
    /// Generator entries [a, b, c, d], each as [re, im]; det must be 1.
    pub generators: Vec<[[f64; 2]; 4]>,
    /// 2k disks in letter order: generator targets, then inverse targets.
    pub disks: Vec<Disk>,
}

#[derive(Debug, Clone)]
pub struct SchottkyGroup {
    pub family: GroupFamily,
    pub generators: Vec<Mobius>,
    pub disks: Vec<Disk>,
    transforms: Vec<Mobius>,
    fixed: Vec<C>,
}

/// A boundary point together with the coding prefix that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    pub z: C,
    pub word: Vec<u8>,
}

#[derive(Debug, Clone, Copy)]
pub struct PingPongReport {
    pub pass: bool,
    /// Minimal margin over disk disjointness and mapping containments.
    pub margin: f64,
}

/// Measured branch hyperbolicity: c0 / kappa1^j <= |W'| <= 1 / (c0 kappa2^j).
#[derive(Debug, Clone, Copy)]
pub struct Hyperbolicity {
    pub c0: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

pub const WORD_BUDGET: usize = 1_000_000;

impl SchottkyGroup {
    pub fn new(family: GroupFamily, generators: Vec<Mobius>, disks: Vec<Disk>) -> Result<Self> {
        let k = generators.len();
        if k < 2 {
            return Err(Error::InsufficientGenerators(k));
        }
        if disks.len() != 2 * k {
            return Err(Error::Shape { expected: 2 * k, got: disks.len() });
        }
        for g in &generators {
            let dev = (g.det() - C::new(1.0, 0.0)).norm();
            if dev > 1e-12 {
                return Err(Error::Model(format!("generator determinant off by {dev:.3e}")));
            }
            if family == GroupFamily::Fuchsian {
                let imag = g.a.im.abs() + g.b.im.abs() + g.c.im.abs() + g.d.im.abs();
                if imag > 1e-12 {
                    return Err(Error::Model("fuchsian generators must be real".into()));
                }
            }
        }
        let mut transforms = Vec::with_capacity(2 * k);
        transforms.extend(generators.iter().cloned());
        transforms.extend(generators.iter().map(Mobius::inverse));
        let fixed = transforms
            .iter()
            .map(|t| t.fixed_points().map(|(att, _)| att))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { family, generators, disks, transforms, fixed })
    }

    pub fn from_file(gf: &GroupFile) -> Result<Self> {
        let generators = gf
            .generators
            .iter()
            .map(|g| {
                Mobius::new(
                    C::new(g[0][0], g[0][1]),
                    C::new(g[1][0], g[1][1]),
                    C::new(g[2][0], g[2][1]),
                    C::new(g[3][0], g[3][1]),
                )
            })
            .collect();
        Self::new(gf.family, generators, gf.disks.clone())
    }

    pub fn to_file(&self) -> GroupFile {
        GroupFile {
            family: self.family,
            generators: self
                .generators
                .iter()
                .map(|g| {
                    [
                        [g.a.re, g.a.im],
                        [g.b.re, g.b.im],
                        [g.c.re, g.c.im],
                        [g.d.re, g.d.im],
                    ]
                })
                .collect(),
            disks: self.disks.clone(),
        }
    }

    pub fn n_letters(&self) -> usize {
        self.transforms.len()
    }

    pub fn inverse_letter(&self, letter: usize) -> usize {
        let k = self.generators.len();
        (letter + k) % (2 * k)
    }

    pub fn transform(&self, letter: usize) -> &Mobius {
        &self.transforms[letter]
    }

    /// Attracting fixed point of a letter; lies inside the letter's disk.
    pub fn attracting_fixed_point(&self, letter: usize) -> C {
        self.fixed[letter]
    }

    pub fn admissible(&self, from: usize, to: usize) -> bool {
        to != self.inverse_letter(from)
    }

    /// Ping-pong certification by exact image circles. The margin is the
    /// smallest slack over pairwise disk disjointness and the containment of
    /// each letter's branch image in its disk.
    pub fn ping_pong_check(&self) -> Result<PingPongReport> {
        let n = self.n_letters();
        let mut margin = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let gap = (self.disks[i].c() - self.disks[j].c()).norm()
                    - self.disks[i].radius
                    - self.disks[j].radius;
                if gap <= 0.0 {
                    return Err(Error::PingPong(i, j, gap));
                }
                margin = margin.min(gap);
            }
        }
        for letter in 0..n {
            let t = self.transform(letter);
            let source = self.disks[self.inverse_letter(letter)];
            // The complement of the open source disk maps onto the closed disk
            // bounded by the image circle that contains t(infinity) = a/c.
            let img = t.image_disk(&source)?;
            if t.c.norm() < 1e-12 {
                return Err(Error::Model("affine generator cannot satisfy ping-pong with bounded disks".into()));
            }
            let t_inf = t.a / t.c;
            if (t_inf - img.c()).norm() > img.radius {
                return Err(Error::PingPong(letter, self.inverse_letter(letter), -1.0));
            }
            let slack = self.disks[letter].radius
                - (img.c() - self.disks[letter].c()).norm()
                - img.radius;
            if slack <= 0.0 {
                return Err(Error::PingPong(letter, self.inverse_letter(letter), slack));
            }
            margin = margin.min(slack);
        }
        Ok(PingPongReport { pass: true, margin })
    }

    /// Letter of the disk containing the point, if any.
    pub fn locate(&self, z: C) -> Option<usize> {
        (0..self.n_letters()).find(|&l| self.disks[l].contains(z))
    }

    /// One step of the expanding boundary map: applies the inverse of the
    /// disk's letter and returns (image, letter).
    pub fn boundary_map(&self, z: C) -> Result<(C, usize)> {
        let letter = self.locate(z).ok_or(Error::NotInLimitChart)?;
        let image = self.transform(letter).inverse().apply(z)?;
        Ok((image, letter))
    }

    /// Derivative of the inverse branch of a letter at a point of its domain:
    /// the conformal factor is its modulus, the holonomy angle its argument.
    pub fn branch_derivative(&self, letter: usize, z: C) -> Result<C> {
        self.transform(letter).derivative1(z)
    }

    /// Derivative of a composed word map at z (unit determinant assumed).
    pub fn word_derivative(&self, word: &[u8], z: C) -> Result<C> {
        self.word_map(word).derivative1(z)
    }

    /// Roof value -log |T_letter'(z)| of the branch through z.
    pub fn roof(&self, letter: usize, z: C) -> Result<f64> {
        Ok(-self.branch_derivative(letter, z)?.norm().ln())
    }

    /// Composition of the letters of a word, leftmost letter outermost.
    pub fn word_map(&self, word: &[u8]) -> Mobius {
        let mut m = Mobius::identity();
        for &l in word {
            m = m.compose(self.transform(l as usize));
        }
        m
    }

    pub fn is_admissible_word(&self, word: &[u8]) -> bool {
        word.windows(2).all(|w| self.admissible(w[0] as usize, w[1] as usize))
    }

    /// All admissible words of the given length, in lexicographic order.
    pub fn admissible_words(&self, depth: usize) -> Result<Vec<Vec<u8>>> {
        if depth == 0 {
            return Ok(vec![vec![]]);
        }
        let n = self.n_letters();
        let mut count = n;
        for _ in 1..depth {
            count *= n - 1;
            if count > WORD_BUDGET {
                return Err(Error::Depth { words: count, budget: WORD_BUDGET });
            }
        }
        let mut words: Vec<Vec<u8>> = (0..n as u8).map(|l| vec![l]).collect();
        for _ in 1..depth {
            let mut next = Vec::with_capacity(words.len() * (n - 1));
            for w in &words {
                let last = *w.last().unwrap() as usize;
                for l in 0..n {
                    if self.admissible(last, l) {
                        let mut nw = w.clone();
                        nw.push(l as u8);
                        next.push(nw);
                    }
                }
            }
            words = next;
        }
        Ok(words)
    }

    /// Limit-set samples: for each admissible word w of the given depth and
    /// each of the first per_word letters l admissible after w, the point
    /// gamma_w(fix(l)). With per_word = 1 this is gamma_w applied to the
    /// attracting fixed point of the terminal letter of w.
    pub fn limit_set_sample(&self, depth: usize, per_word: usize) -> Result<Vec<BoundaryPoint>> {
        if depth < 1 {
            return Err(Error::Precondition("depth must be >= 1".into()));
        }
        let words = self.admissible_words(depth)?;
        let n = self.n_letters();
        let mut out = Vec::new();
        for w in &words {
            let map = self.word_map(w);
            let last = *w.last().unwrap() as usize;
            // The terminal letter itself is always admissible after itself
            // and is listed first, so per_word = 1 yields gamma_w(fix(last)).
            let mut nexts = vec![last];
            nexts.extend((0..n).filter(|&l| l != last && self.admissible(last, l)));
            for &l in nexts.iter().take(per_word) {
                let z = map.apply(self.fixed[l])?;
                out.push(BoundaryPoint { z, word: w.clone() });
            }
        }
        Ok(out)
    }

    /// Measured hyperbolicity constants of the inverse branches from word
    /// derivatives at representatives up to the given depth.
    pub fn hyperbolicity(&self, depth: usize) -> Result<Hyperbolicity> {
        let mut per_level: Vec<Vec<f64>> = Vec::new();
        // level 1 seeds: derivative of each branch at admissible fixed points
        let n = self.n_letters();
        let mut current: Vec<(u8, C, f64)> = Vec::new(); // (first letter, point, |W'|)
        for l in 0..n {
            for m in 0..n {
                if self.admissible(l, m) {
                    let p = self.fixed[m];
                    let d = self.branch_derivative(l, p)?.norm();
                    current.push((l as u8, self.transform(l).apply(p)?, d));
                }
            }
        }
        per_level.push(current.iter().map(|t| t.2).collect());
        for _ in 1..depth {
            let mut next = Vec::with_capacity(current.len() * (n - 1));
            for &(first, p, d) in &current {
                for l in 0..n {
                    if self.admissible(l, first as usize) {
                        let dd = self.branch_derivative(l, p)?.norm() * d;
                        next.push((l as u8, self.transform(l).apply(p)?, dd));
                    }
                }
            }
            per_level.push(next.iter().map(|t| t.2).collect());
            current = next;
            if current.len() > WORD_BUDGET {
                return Err(Error::Depth { words: current.len(), budget: WORD_BUDGET });
            }
        }
        let deepest = per_level.last().unwrap();
        let j = per_level.len() as f64;
        let mut kappa2 = f64::INFINITY;
        let mut kappa1: f64 = 0.0;
        for &d in deepest {
            kappa2 = kappa2.min(d.powf(-1.0 / j));
            kappa1 = kappa1.max(d.powf(-1.0 / j));
        }
        // Shrink c0 until both bounds hold on every measured level.
        let mut c0: f64 = 0.95;
        for (lvl, ds) in per_level.iter().enumerate() {
            let jj = (lvl + 1) as i32;
            for &d in ds {
                // c0 <= d * kappa1^j and c0 <= 1 / (d kappa2^j)
                c0 = c0.min(d * kappa1.powi(jj));
                c0 = c0.min(1.0 / (d * kappa2.powi(jj)));
            }
        }
        if !(kappa1 >= kappa2 && kappa2 > 1.0 && c0 > 0.0) {
            return Err(Error::Model(format!(
                "branches not uniformly contracting: kappa1 {kappa1:.3}, kappa2 {kappa2:.3}"
            )));
        }
        // Keep the ordering strict for downstream constants.
        if kappa1 == kappa2 {
            kappa1 *= 1.0 + 1e-9;
        }
        Ok(Hyperbolicity { c0, kappa1, kappa2 })
    }

    /// Partial Poincare series increments: for each word length j <= max_len,
    /// the sum of e^{-s d(o, gamma o)} over admissible words of length j.
    pub fn poincare_increments(&self, s: f64, max_len: usize) -> Result<Vec<f64>> {
        let n = self.n_letters();
        let mut incs = Vec::with_capacity(max_len);
        let mut current: Vec<(u8, Mobius)> = (0..n)
            .map(|l| (l as u8, *self.transform(l)))
            .collect();
        for _ in 0..max_len {
            let inc: f64 = current
                .iter()
                .map(|(_, m)| (-s * translation_distance(m)).exp())
                .sum();
            incs.push(inc);
            if incs.len() == max_len {
                break;
            }
            let mut next = Vec::with_capacity(current.len() * (n - 1));
            for &(last, m) in &current {
                for l in 0..n {
                    if self.admissible(last as usize, l) {
                        next.push((l as u8, m.compose(self.transform(l))));
                    }
                }
            }
            if next.len() > WORD_BUDGET {
                return Err(Error::Depth { words: next.len(), budget: WORD_BUDGET });
            }
            current = next;
        }
        Ok(incs)
    }
}

/// d(o, gamma o) for the base point o of H^2 or H^3:
/// cosh d = ||gamma||_F^2 / 2 for unit-determinant matrices.
pub fn translation_distance(m: &Mobius) -> f64 {
    let c = (m.frobenius_sq() / 2.0).max(1.0);
    c.acosh()
}

/// A point of the upper half-space model: boundary coordinate w (real axis
/// for the fuchsian family) and height h > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorPoint {
    pub w: C,
    pub h: f64,
}

impl InteriorPoint {
    pub fn new(w: C, h: f64) -> Self {
        Self { w, h }
    }
}

/// Hyperbolic distance in the upper half-space model.
pub fn hyperbolic_distance(p: InteriorPoint, q: InteriorPoint) -> f64 {
    let num = (p.w - q.w).norm_sqr() + (p.h - q.h) * (p.h - q.h);
    (1.0 + num / (2.0 * p.h * q.h)).acosh()
}

/// Boundary point argument for the Busemann cocycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BusemannPoint {
    Finite(C),
    Infinity,
}

/// Busemann cocycle beta_xi(y, x) = lim_{t to inf} d(xi(t), y) - d(xi(t), x),
/// called as busemann(xi, x, y); positive when x is nearer to xi than y.
pub fn busemann(xi: BusemannPoint, x: InteriorPoint, y: InteriorPoint) -> Result<f64> {
    if x.h <= 0.0 || y.h <= 0.0 {
        return Err(Error::Domain("interior points need positive height".into()));
    }
    let potential = |p: InteriorPoint| -> f64 {
        match xi {
            // beta_inf(p, o) with o = (0, 1).
            BusemannPoint::Infinity => -p.h.ln(),
            BusemannPoint::Finite(c) => {
                (((p.w - c).norm_sqr() + p.h * p.h) / p.h).ln() - (1.0 + c.norm_sqr()).ln()
            }
        }
    };
    Ok(potential(y) - potential(x))
}
