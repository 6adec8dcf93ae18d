//! Subshift of finite type, cylinder partitions over a Schottky coding, and
//! piecewise-constant cylinder functions.
//!
//! A depth-k cylinder is an admissible word of k letters. Its canonical
//! representative is gamma_{w_0..w_{k-2}}(fix(w_{k-1})), so shifting a
//! representative lands exactly on the representative of the shifted word.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mobius::Disk;
use crate::schottky::{SchottkyGroup, WORD_BUDGET};

/// Transition structure on a finite alphabet.
#[derive(Debug, Clone)]
pub struct Subshift {
    pub n_letters: usize,
    pub transition: Vec<Vec<bool>>,
    /// Metric parameter of d_kappa; carried for completeness, the cylinder
    /// discretization never consumes it.
    pub kappa_metric: f64,
}

impl Subshift {
    pub fn new(transition: Vec<Vec<bool>>, kappa_metric: f64) -> Result<Self> {
        let n = transition.len();
        if n == 0 || transition.iter().any(|r| r.len() != n) {
            return Err(Error::Shape { expected: n, got: 0 });
        }
        if !(0.0 < kappa_metric && kappa_metric < 1.0) {
            return Err(Error::Precondition("kappa_metric must lie in (0,1)".into()));
        }
        let s = Self { n_letters: n, transition, kappa_metric };
        if !s.is_primitive() {
            return Err(Error::Model("transition matrix not irreducible and aperiodic".into()));
        }
        Ok(s)
    }

    pub fn full_shift(n: usize) -> Self {
        Self {
            n_letters: n,
            transition: vec![vec![true; n]; n],
            kappa_metric: 0.5,
        }
    }

    pub fn from_group(group: &SchottkyGroup) -> Self {
        let n = group.n_letters();
        let transition = (0..n)
            .map(|i| (0..n).map(|j| group.admissible(i, j)).collect())
            .collect();
        Self { n_letters: n, transition, kappa_metric: 0.5 }
    }

    pub fn admissible(&self, from: usize, to: usize) -> bool {
        self.transition[from][to]
    }

    /// Primitivity: some power of the transition matrix is strictly positive.
    pub fn is_primitive(&self) -> bool {
        let n = self.n_letters;
        let mut reach = self.transition.clone();
        for _ in 0..(n * n + 1) {
            if reach.iter().all(|row| row.iter().all(|&x| x)) {
                return true;
            }
            let mut next = vec![vec![false; n]; n];
            for i in 0..n {
                for k in 0..n {
                    if reach[i][k] {
                        for (j, nj) in next[i].iter_mut().enumerate() {
                            *nj = *nj || self.transition[k][j];
                        }
                    }
                }
            }
            reach = next;
        }
        false
    }

    /// Perron eigenvalue of the 0-1 transition matrix by power iteration.
    pub fn perron_eigenvalue(&self) -> f64 {
        let n = self.n_letters;
        let mut v = vec![1.0f64; n];
        let mut lambda = 0.0;
        for _ in 0..10_000 {
            let mut w = vec![0.0f64; n];
            for i in 0..n {
                for j in 0..n {
                    if self.transition[i][j] {
                        w[i] += v[j];
                    }
                }
            }
            let norm: f64 = w.iter().sum::<f64>() / n as f64;
            let new_lambda = norm;
            for x in &mut w {
                *x /= norm;
            }
            let done = (new_lambda - lambda).abs() < 1e-14 * new_lambda;
            lambda = new_lambda;
            v = w;
            if done {
                break;
            }
        }
        lambda
    }
}

/// The cylinder partition at a fixed depth, with representatives, exact
/// bounding disks, and the index maps needed by transfer operators.
#[derive(Debug, Clone)]
pub struct CylinderPartition {
    pub depth: usize,
    pub words: Vec<Vec<u8>>,
    /// Index of the word with the last letter dropped, in the previous level.
    pub parent: Vec<u32>,
    /// Index of the word with the first letter dropped, in the previous level.
    pub shift: Vec<u32>,
    /// (previous-level index, appended letter) -> index at this level.
    children: std::collections::HashMap<(u32, u8), u32>,
    pub repr: Vec<Complex64>,
    pub bounding: Vec<Disk>,
    prev_len: usize,
}

impl CylinderPartition {
    /// Depth-1 partition: one cylinder per letter.
    pub fn initial(group: &SchottkyGroup) -> Self {
        let n = group.n_letters();
        let mut children = std::collections::HashMap::new();
        for l in 0..n {
            children.insert((0u32, l as u8), l as u32);
        }
        CylinderPartition {
            depth: 1,
            words: (0..n as u8).map(|l| vec![l]).collect(),
            parent: vec![0; n],
            shift: vec![0; n],
            children,
            repr: (0..n).map(|l| group.attracting_fixed_point(l)).collect(),
            bounding: group.disks.clone(),
            prev_len: 1,
        }
    }

    /// One-letter refinement: every admissible extension of every cylinder.
    pub fn refine(&self, group: &SchottkyGroup) -> Result<CylinderPartition> {
        let n = group.n_letters();
        let projected = self.words.len() * (n - 1);
        if projected > WORD_BUDGET {
            return Err(Error::Depth { words: projected, budget: WORD_BUDGET });
        }
        let mut words = Vec::with_capacity(projected);
        let mut parent = Vec::with_capacity(projected);
        let mut shift = Vec::with_capacity(projected);
        let mut repr = Vec::with_capacity(projected);
        let mut bounding = Vec::with_capacity(projected);
        let mut children = std::collections::HashMap::with_capacity(projected);
        for (idx, w) in self.words.iter().enumerate() {
            let last = *w.last().unwrap() as usize;
            let prefix_map = group.word_map(w);
            for l in 0..n {
                if !group.admissible(last, l) {
                    continue;
                }
                let new_idx = words.len() as u32;
                let mut nw = w.clone();
                nw.push(l as u8);
                words.push(nw);
                parent.push(idx as u32);
                children.insert((idx as u32, l as u8), new_idx);
                repr.push(prefix_map.apply(group.attracting_fixed_point(l))?);
                bounding.push(prefix_map.image_disk(&group.disks[l])?);
                // shift(w . l) = child(shift(w), l) one level down.
                shift.push(self.children[&(self.shift[idx], l as u8)]);
            }
        }
        Ok(CylinderPartition {
            depth: self.depth + 1,
            words,
            parent,
            shift,
            children,
            repr,
            bounding,
            prev_len: self.words.len(),
        })
    }

    pub fn at_depth(group: &SchottkyGroup, depth: usize) -> Result<CylinderPartition> {
        if depth < 1 {
            return Err(Error::Precondition("depth must be >= 1".into()));
        }
        let mut p = Self::initial(group);
        while p.depth < depth {
            p = p.refine(group)?;
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn prev_len(&self) -> usize {
        self.prev_len
    }

    pub fn diameter(&self, idx: usize) -> f64 {
        2.0 * self.bounding[idx].radius
    }

    pub fn max_diameter(&self) -> f64 {
        self.bounding.iter().map(|d| 2.0 * d.radius).fold(0.0, f64::max)
    }

    pub fn child_index(&self, prev_idx: u32, letter: u8) -> Option<u32> {
        self.children.get(&(prev_idx, letter)).copied()
    }

    /// Indices of the same-parent siblings of each cylinder, grouped by parent.
    pub fn sibling_groups(&self) -> Vec<Vec<u32>> {
        let mut groups: Vec<Vec<u32>> = vec![Vec::new(); self.prev_len];
        for (i, &p) in self.parent.iter().enumerate() {
            groups[p as usize].push(i as u32);
        }
        groups
    }
}

/// The chain of partitions from depth 1 to a top depth, with descend maps
/// sending every cylinder to its canonical descendant (terminal letter
/// repeated) at the top. Difference quotients of cylinder functions are
/// measured across all levels of the tower.
#[derive(Debug, Clone)]
pub struct PartitionTower {
    levels: Vec<CylinderPartition>,
    /// descend[j][i] = top-level index of the canonical descendant of
    /// cylinder i at depth j+1.
    descend: Vec<Vec<u32>>,
}

impl PartitionTower {
    pub fn build(group: &SchottkyGroup, top_depth: usize) -> Result<Self> {
        let mut levels = vec![CylinderPartition::initial(group)];
        while levels.last().unwrap().depth < top_depth {
            let next = levels.last().unwrap().refine(group)?;
            levels.push(next);
        }
        // Walk each cylinder down by repeating its terminal letter.
        let mut descend: Vec<Vec<u32>> = Vec::with_capacity(levels.len());
        for j in 0..levels.len() {
            let mut ids: Vec<u32> = (0..levels[j].len() as u32).collect();
            for deeper in &levels[j + 1..] {
                for (src, id) in ids.iter_mut().enumerate() {
                    let letter = *levels[j].words[src].last().unwrap();
                    *id = deeper
                        .child_index(*id, letter)
                        .expect("terminal letter self-transition is always admissible");
                }
            }
            descend.push(ids);
        }
        Ok(Self { levels, descend })
    }

    pub fn top(&self) -> &CylinderPartition {
        self.levels.last().unwrap()
    }

    /// Tower over the same partitions up to a smaller top depth.
    pub fn truncated(&self, top_depth: usize) -> PartitionTower {
        assert!(top_depth >= 1 && top_depth <= self.n_levels());
        let levels: Vec<CylinderPartition> = self.levels[..top_depth].to_vec();
        let mut descend: Vec<Vec<u32>> = Vec::with_capacity(top_depth);
        for j in 0..top_depth {
            let mut ids: Vec<u32> = (0..levels[j].len() as u32).collect();
            for deeper in &levels[j + 1..] {
                for (src, id) in ids.iter_mut().enumerate() {
                    let letter = *levels[j].words[src].last().unwrap();
                    *id = deeper.child_index(*id, letter).unwrap();
                }
            }
            descend.push(ids);
        }
        PartitionTower { levels, descend }
    }

    /// Index at `depth` of the ancestor (word prefix) of a top cylinder.
    pub fn ancestor(&self, top_idx: usize, depth: usize) -> usize {
        let mut idx = top_idx;
        for lvl in (depth..self.n_levels()).rev() {
            idx = self.levels[lvl].parent[idx] as usize;
        }
        idx
    }

    pub fn level(&self, depth: usize) -> &CylinderPartition {
        &self.levels[depth - 1]
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    /// Top-level index of the canonical descendant of a cylinder.
    pub fn descendant(&self, depth: usize, idx: usize) -> usize {
        self.descend[depth - 1][idx] as usize
    }

    /// Largest difference quotient of a top-level function over sibling pairs
    /// at every tower level; `map` extracts the compared magnitude. Pairs
    /// closer than the floor are skipped: below it the quotient divides
    /// evaluation noise by a vanishing distance.
    pub fn difference_quotient_floored<F>(&self, map: F, min_dist: f64) -> f64
    where
        F: Fn(usize, usize) -> f64,
    {
        let mut worst: f64 = 0.0;
        for depth in 2..=self.n_levels() {
            let part = self.level(depth);
            let desc = &self.descend[depth - 1];
            for group in part.sibling_groups() {
                for (ai, &i) in group.iter().enumerate() {
                    for &j in group.iter().skip(ai + 1) {
                        let pi = part.repr[i as usize];
                        let pj = part.repr[j as usize];
                        let dist = (pi - pj).norm();
                        let floor =
                            min_dist.max(1e3 * f64::EPSILON * (pi.norm() + pj.norm()).max(1e-3));
                        if dist <= floor {
                            continue;
                        }
                        let d = map(desc[i as usize] as usize, desc[j as usize] as usize);
                        worst = worst.max(d / dist);
                    }
                }
            }
        }
        worst
    }

    /// Difference quotient with the default noise floor of 1e-10.
    pub fn difference_quotient<F>(&self, map: F) -> f64
    where
        F: Fn(usize, usize) -> f64,
    {
        self.difference_quotient_floored(map, 1e-10)
    }
}

/// A function constant on the cylinders of one depth.
#[derive(Debug, Clone, PartialEq)]
pub struct CylFn<T> {
    pub depth: usize,
    pub values: Vec<T>,
}

impl<T: Clone> CylFn<T> {
    pub fn constant(partition: &CylinderPartition, value: T) -> Self {
        CylFn { depth: partition.depth, values: vec![value; partition.len()] }
    }

    pub fn from_values(depth: usize, values: Vec<T>) -> Self {
        CylFn { depth, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl CylFn<f64> {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Gather topology of the one-step transfer operator: the operator acts on
/// depth-k functions and is indexed by the depth-(k+1) branch cylinders.
#[derive(Debug, Clone)]
pub struct TransferTopology {
    pub n_coarse: usize,
    /// For every depth-(k+1) word u: (index of u with first letter dropped,
    /// index of u with last letter dropped), both at depth k.
    pub entries: Vec<(u32, u32)>,
    /// Roof value of each branch cylinder, -log |T'| at the representative.
    pub tau: Vec<f64>,
    /// Holonomy angle of each branch cylinder, arg T' at the representative.
    pub theta: Vec<f64>,
}

impl TransferTopology {
    /// Build from a depth-(k+1) partition refining a depth-k one.
    pub fn build(group: &SchottkyGroup, fine: &CylinderPartition, coarse: &CylinderPartition) -> Result<Self> {
        if fine.depth != coarse.depth + 1 || fine.prev_len() != coarse.len() {
            return Err(Error::Shape { expected: coarse.depth + 1, got: fine.depth });
        }
        let mut entries = Vec::with_capacity(fine.len());
        let mut tau = Vec::with_capacity(fine.len());
        let mut theta = Vec::with_capacity(fine.len());
        for i in 0..fine.len() {
            let target = fine.shift[i];
            let source = fine.parent[i];
            let letter = fine.words[i][0] as usize;
            let d = group.branch_derivative(letter, coarse.repr[target as usize])?;
            entries.push((target, source));
            tau.push(-d.norm().ln());
            theta.push(d.arg());
        }
        Ok(TransferTopology { n_coarse: coarse.len(), entries, tau, theta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    
    
    
    use approx::assert_relative_eq;

    fn group() -> SchottkyGroup {
        crate::bundled::fuchsian()
    }

    #[test]
    fn full_shift_counts() {
        let s = Subshift::full_shift(2);
        assert!(s.is_primitive());
        assert_relative_eq!(s.perron_eigenvalue(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn schottky_cylinder_counts() {
        let g = group();
        let p1 = CylinderPartition::initial(&g);
        assert_eq!(p1.len(), 4);
        let p2 = p1.refine(&g).unwrap();
        assert_eq!(p2.len(), 12); // 4 letters, 3 admissible successors
        let p3 = p2.refine(&g).unwrap();
        assert_eq!(p3.len(), 36);
    }

    #[test]
    fn representatives_live_in_bounding_disks() {
        let g = group();
        let p = CylinderPartition::at_depth(&g, 4).unwrap();
        for i in 0..p.len() {
            assert!(
                p.bounding[i].contains(p.repr[i]),
                "cylinder {:?}",
                p.words[i]
            );
        }
    }

    #[test]
    fn refinement_nests_and_shrinks() {
        let g = group();
        let mut prev = CylinderPartition::initial(&g);
        let mut prev_max = prev.max_diameter();
        for _ in 0..4 {
            let next = prev.refine(&g).unwrap();
            for i in 0..next.len() {
                let parent = next.parent[i] as usize;
                // child bounding disk nests inside the parent's
                let pd = &prev.bounding[parent];
                let cd = &next.bounding[i];
                assert!(
                    (cd.c() - pd.c()).norm() + cd.radius <= pd.radius + 1e-12,
                    "nesting fails at {:?}",
                    next.words[i]
                );
            }
            let max = next.max_diameter();
            assert!(max < prev_max);
            prev_max = max;
            prev = next;
        }
    }

    #[test]
    fn shift_indices_consistent() {
        let g = group();
        let coarse = CylinderPartition::at_depth(&g, 3).unwrap();
        let fine = coarse.refine(&g).unwrap();
        for i in (0..fine.len()).step_by(7) {
            let w = &fine.words[i];
            let shifted = &coarse.words[fine.shift[i] as usize];
            assert_eq!(&w[1..], shifted.as_slice());
            let parent = &coarse.words[fine.parent[i] as usize];
            assert_eq!(&w[..w.len() - 1], parent.as_slice());
        }
    }

    #[test]
    fn shifted_representative_is_exact() {
        let g = group();
        let coarse = CylinderPartition::at_depth(&g, 3).unwrap();
        let fine = coarse.refine(&g).unwrap();
        for i in (0..fine.len()).step_by(5) {
            let z = fine.repr[i];
            let (img, letter) = g.boundary_map(z).unwrap();
            assert_eq!(letter as u8, fine.words[i][0]);
            let target = coarse.repr[fine.shift[i] as usize];
            assert_relative_eq!((img - target).norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn topology_roof_positive_and_angles_trivial_for_fuchsian() {
        let g = group();
        let coarse = CylinderPartition::at_depth(&g, 3).unwrap();
        let fine = coarse.refine(&g).unwrap();
        let top = TransferTopology::build(&g, &fine, &coarse).unwrap();
        assert_eq!(top.entries.len(), fine.len());
        for (&t, &th) in top.tau.iter().zip(&top.theta) {
            assert!(t > 0.0);
            assert!(th.abs() < 1e-12);
        }
    }
}
