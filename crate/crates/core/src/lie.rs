//! Matrix models of semisimple Lie algebras with restricted-root machinery.
//!
//! Four families are modeled: so(n,1), su(n,1), sp(n,1) (quaternions realized
//! as 2x2 complex blocks, then complex entries as 2x2 real blocks), and the
//! split higher-rank example sl(3,R). All elements are real matrices. The
//! Cartan involution is theta(x) = -x^T, which realifies -x^* for the
//! J-form families, and the generator H0 of a is normalized so that every
//! simple root takes the value 1 on it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kfield::{complexify_quaternion, realify_complex, KField, Quaternion};

pub const SPAN_TOL: f64 = 1e-9;
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// so(n,1), n >= 2
    SoN1(usize),
    /// su(n,1), n >= 2
    SuN1(usize),
    /// sp(n,1), n >= 2
    SpN1(usize),
    /// sl(3,R)
    Sl3,
}

impl Family {
    pub fn kfield(self) -> Option<KField> {
        match self {
            Family::SoN1(_) => Some(KField::Real),
            Family::SuN1(_) => Some(KField::Complex),
            Family::SpN1(_) => Some(KField::Quaternion),
            Family::Sl3 => None,
        }
    }

    pub fn rank(self) -> usize {
        match self {
            Family::Sl3 => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> String {
        match self {
            Family::SoN1(n) => format!("so({n},1)"),
            Family::SuN1(n) => format!("su({n},1)"),
            Family::SpN1(n) => format!("sp({n},1)"),
            Family::Sl3 => "sl(3,R)".to_string(),
        }
    }
}

/// Integer coefficients of a restricted root on the simple roots. Rank-one
/// labels have c[1] = 0; the simple root alpha is (1, 0) and 2*alpha is (2, 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RootLabel(pub [i32; 2]);

impl RootLabel {
    pub fn neg(self) -> RootLabel {
        RootLabel([-self.0[0], -self.0[1]])
    }

    /// Value of the root on H0 (each simple root evaluates to 1 on H0).
    pub fn on_h0(self) -> f64 {
        (self.0[0] + self.0[1]) as f64
    }
}

/// Frobenius-orthonormal bases for a, m, and every restricted root space.
#[derive(Debug, Clone)]
pub struct RootDecomposition {
    pub a: Vec<DMatrix<f64>>,
    pub m: Vec<DMatrix<f64>>,
    pub roots: Vec<(RootLabel, Vec<DMatrix<f64>>)>,
}

impl RootDecomposition {
    pub fn root_space(&self, label: RootLabel) -> Option<&[DMatrix<f64>]> {
        self.roots
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, b)| b.as_slice())
    }

    pub fn dim_a(&self) -> usize {
        self.a.len()
    }

    pub fn dim_m(&self) -> usize {
        self.m.len()
    }
}

/// Component matrices of an element along the root decomposition.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub a: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub roots: Vec<(RootLabel, DMatrix<f64>)>,
    /// Norm of x minus the sum of all components.
    pub residual: f64,
}

impl Decomposition {
    pub fn component(&self, label: RootLabel) -> Option<&DMatrix<f64>> {
        self.roots.iter().find(|(l, _)| *l == label).map(|(_, c)| c)
    }
}

/// Result of a span identity check via singular-value rank.
#[derive(Debug, Clone)]
pub struct SpanReport {
    pub identity: String,
    pub achieved_dim: usize,
    pub target_dim: usize,
    pub pass: bool,
    /// True when both sides are zero-dimensional and nothing was tested.
    pub skipped: bool,
    /// Largest singular value below the rank threshold, normalized.
    pub residual: f64,
    /// Raised when a singular value falls within 10x of the rank threshold.
    pub tolerance_warning: bool,
}

/// Per-summand report for the Ad_{exp(t H0)} grading check.
#[derive(Debug, Clone)]
pub struct GradingReport {
    pub t: f64,
    /// (label, expected factor, max relative error over the subspace basis)
    pub factors: Vec<(RootLabel, f64, f64)>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct LieAlgebraModel {
    pub family: Family,
    pub dim: usize,
    pub matrix_size: usize,
    basis: Vec<DMatrix<f64>>,
    /// Cholesky factor of the Frobenius Gram matrix of the basis.
    gram_chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    /// Realified defining form J; None for sl(3,R) where membership is tracelessness.
    j_form: Option<DMatrix<f64>>,
    h0: DMatrix<f64>,
    cartan: Vec<DMatrix<f64>>,
    decomposition: RootDecomposition,
}

fn frob(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

fn cmat(size: usize) -> DMatrix<Complex64> {
    DMatrix::zeros(size, size)
}

impl LieAlgebraModel {
    pub fn new(family: Family) -> Result<Self> {
        let (basis, j_form, h0, cartan) = match family {
            Family::SoN1(n) => {
                if n < 2 {
                    return Err(Error::Model(format!("so(n,1) needs n >= 2, got {n}")));
                }
                Self::so_basis(n)
            }
            Family::SuN1(n) => {
                if n < 2 {
                    return Err(Error::Model(format!("su(n,1) needs n >= 2, got {n}")));
                }
                Self::su_basis(n)
            }
            Family::SpN1(n) => {
                if n < 2 {
                    return Err(Error::Model(format!("sp(n,1) needs n >= 2, got {n}")));
                }
                Self::sp_basis(n)
            }
            Family::Sl3 => Self::sl3_basis(),
        };
        let dim = basis.len();
        let matrix_size = basis[0].nrows();
        let mut gram = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                gram[(i, j)] = frob(&basis[i], &basis[j]);
            }
        }
        let gram_chol = nalgebra::Cholesky::new(gram)
            .ok_or_else(|| Error::Model("basis Gram matrix not positive definite".into()))?;
        let mut model = LieAlgebraModel {
            family,
            dim,
            matrix_size,
            basis,
            gram_chol,
            j_form,
            h0,
            cartan,
            decomposition: RootDecomposition { a: vec![], m: vec![], roots: vec![] },
        };
        model.decomposition = model.build_decomposition()?;
        Ok(model)
    }

    fn so_basis(n: usize) -> (Vec<DMatrix<f64>>, Option<DMatrix<f64>>, DMatrix<f64>, Vec<DMatrix<f64>>) {
        let s = n + 1;
        let mut basis = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut x = DMatrix::zeros(s, s);
                x[(i, j)] = 1.0;
                x[(j, i)] = -1.0;
                basis.push(x);
            }
        }
        for i in 0..n {
            let mut x = DMatrix::zeros(s, s);
            x[(i, n)] = 1.0;
            x[(n, i)] = 1.0;
            basis.push(x);
        }
        let mut j_form = DMatrix::identity(s, s);
        j_form[(n, n)] = -1.0;
        let mut h0 = DMatrix::zeros(s, s);
        h0[(0, n)] = 1.0;
        h0[(n, 0)] = 1.0;
        let cartan = vec![h0.clone()];
        (basis, Some(j_form), h0, cartan)
    }

    fn su_basis(n: usize) -> (Vec<DMatrix<f64>>, Option<DMatrix<f64>>, DMatrix<f64>, Vec<DMatrix<f64>>) {
        let s = n + 1;
        let i_unit = Complex64::new(0.0, 1.0);
        let mut cbasis: Vec<DMatrix<Complex64>> = Vec::new();
        // Skew-Hermitian block A (indices 0..n), off-diagonal real then imaginary.
        for i in 0..n {
            for j in (i + 1)..n {
                let mut x = cmat(s);
                x[(i, j)] = Complex64::new(1.0, 0.0);
                x[(j, i)] = Complex64::new(-1.0, 0.0);
                cbasis.push(x);
                let mut y = cmat(s);
                y[(i, j)] = i_unit;
                y[(j, i)] = i_unit;
                cbasis.push(y);
            }
        }
        // Diagonal i*E_jj with trace compensated at the (n, n) slot.
        for j in 0..n {
            let mut x = cmat(s);
            x[(j, j)] = i_unit;
            x[(n, n)] = -i_unit;
            cbasis.push(x);
        }
        // b-column, real then imaginary.
        for i in 0..n {
            let mut x = cmat(s);
            x[(i, n)] = Complex64::new(1.0, 0.0);
            x[(n, i)] = Complex64::new(1.0, 0.0);
            cbasis.push(x);
            let mut y = cmat(s);
            y[(i, n)] = i_unit;
            y[(n, i)] = -i_unit;
            cbasis.push(y);
        }
        let basis: Vec<DMatrix<f64>> = cbasis.iter().map(realify_complex).collect();
        let mut jc = cmat(s);
        for k in 0..n {
            jc[(k, k)] = Complex64::new(1.0, 0.0);
        }
        jc[(n, n)] = Complex64::new(-1.0, 0.0);
        let mut h0c = cmat(s);
        h0c[(0, n)] = Complex64::new(1.0, 0.0);
        h0c[(n, 0)] = Complex64::new(1.0, 0.0);
        let h0 = realify_complex(&h0c);
        (basis, Some(realify_complex(&jc)), h0.clone(), vec![h0])
    }

    fn sp_basis(n: usize) -> (Vec<DMatrix<f64>>, Option<DMatrix<f64>>, DMatrix<f64>, Vec<DMatrix<f64>>) {
        let s = n + 1;
        let q0 = Quaternion::new(0.0, 0.0, 0.0, 0.0);
        let units = [
            Quaternion::new(1.0, 0.0, 0.0, 0.0),
            Quaternion::new(0.0, 1.0, 0.0, 0.0),
            Quaternion::new(0.0, 0.0, 1.0, 0.0),
            Quaternion::new(0.0, 0.0, 0.0, 1.0),
        ];
        let zero = || vec![vec![q0; s]; s];
        let mut qbasis: Vec<Vec<Vec<Quaternion>>> = Vec::new();
        // Skew-Hermitian A block: off-diagonal q E_ij - conj(q) E_ji.
        for i in 0..n {
            for j in (i + 1)..n {
                for q in units {
                    let mut x = zero();
                    x[i][j] = q;
                    let c = q.conj();
                    x[j][i] = Quaternion::new(-c.w, -c.x, -c.y, -c.z);
                    qbasis.push(x);
                }
            }
        }
        // Imaginary diagonal of A.
        for j in 0..n {
            for q in &units[1..] {
                let mut x = zero();
                x[j][j] = *q;
                qbasis.push(x);
            }
        }
        // b-column q E_in + conj(q) E_ni.
        for i in 0..n {
            for q in units {
                let mut x = zero();
                x[i][n] = q;
                x[n][i] = q.conj();
                qbasis.push(x);
            }
        }
        // Imaginary d at the (n, n) slot.
        for q in &units[1..] {
            let mut x = zero();
            x[n][n] = *q;
            qbasis.push(x);
        }
        let basis: Vec<DMatrix<f64>> = qbasis
            .iter()
            .map(|m| realify_complex(&complexify_quaternion(m)))
            .collect();
        let mut jq = zero();
        for k in 0..n {
            jq[k][k] = units[0];
        }
        jq[n][n] = Quaternion::new(-1.0, 0.0, 0.0, 0.0);
        let mut h0q = zero();
        h0q[0][n] = units[0];
        h0q[n][0] = units[0];
        let h0 = realify_complex(&complexify_quaternion(&h0q));
        let j_form = realify_complex(&complexify_quaternion(&jq));
        (basis, Some(j_form), h0.clone(), vec![h0])
    }

    fn sl3_basis() -> (Vec<DMatrix<f64>>, Option<DMatrix<f64>>, DMatrix<f64>, Vec<DMatrix<f64>>) {
        let mut basis = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let mut x = DMatrix::zeros(3, 3);
                    x[(i, j)] = 1.0;
                    basis.push(x);
                }
            }
        }
        let d1 = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, -1.0, 0.0]));
        let d2 = DMatrix::from_diagonal(&DVector::from_row_slice(&[0.0, 1.0, -1.0]));
        basis.push(d1.clone());
        basis.push(d2.clone());
        // H0 = diag(1, 0, -1) has alpha_1(H0) = alpha_2(H0) = 1.
        let h0 = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 0.0, -1.0]));
        (basis, None, h0, vec![d1, d2])
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn h0(&self) -> &DMatrix<f64> {
        &self.h0
    }

    pub fn decomposition(&self) -> &RootDecomposition {
        &self.decomposition
    }

    /// Cartan involution theta(x) = -x^T.
    pub fn theta(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        -x.transpose()
    }

    /// Residual of the defining-algebra condition: |x^T J + J x| for the
    /// J-form families, |tr x| for sl(3,R).
    pub fn defining_residual(&self, x: &DMatrix<f64>) -> f64 {
        match &self.j_form {
            Some(j) => (x.transpose() * j + j * x).norm(),
            None => x.trace().abs(),
        }
    }

    /// Coefficients of x in the model basis; errors when x is outside the span.
    pub fn coords(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        let rhs = DVector::from_fn(self.dim, |i, _| frob(&self.basis[i], x));
        let c = self.gram_chol.solve(&rhs);
        let mut recon = DMatrix::zeros(self.matrix_size, self.matrix_size);
        for (i, b) in self.basis.iter().enumerate() {
            recon += b * c[i];
        }
        let residual = (x - &recon).norm() / x.norm().max(1.0);
        if residual > SPAN_TOL {
            return Err(Error::Decomposition { residual });
        }
        Ok(c)
    }

    pub fn from_coords(&self, c: &DVector<f64>) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(self.matrix_size, self.matrix_size);
        for (i, b) in self.basis.iter().enumerate() {
            x += b * c[i];
        }
        x
    }

    /// Lie bracket xy - yx, re-expressed in the model basis.
    pub fn bracket(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.coords(x)?;
        self.coords(y)?;
        let comm = x * y - y * x;
        let c = self.coords(&comm)?;
        Ok(self.from_coords(&c))
    }

    /// Matrix of ad_x in basis coordinates.
    pub fn ad(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (j, b) in self.basis.iter().enumerate() {
            let col = self.coords(&(x * b - b * x))?;
            m.set_column(j, &col);
        }
        Ok(m)
    }

    /// Killing form B(x, y) = tr(ad_x ad_y).
    pub fn killing(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
        let ax = self.ad(x)?;
        let ay = self.ad(y)?;
        Ok((ax * ay).trace())
    }

    /// B_theta(x, y) = -B(x, theta(y)), positive definite.
    pub fn b_theta(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
        Ok(-self.killing(x, &self.theta(y))?)
    }

    /// Joint kernel of (ad_{c} - lambda_c I) over the Cartan generators,
    /// returned as Frobenius-orthonormalized matrices.
    fn joint_eigenspace(&self, ads: &[DMatrix<f64>], lambda: &[f64]) -> Vec<DMatrix<f64>> {
        let rows = self.dim * ads.len();
        let mut stacked = DMatrix::zeros(rows, self.dim);
        for (k, ad) in ads.iter().enumerate() {
            let mut block = ad.clone();
            for i in 0..self.dim {
                block[(i, i)] -= lambda[k];
            }
            stacked.view_mut((k * self.dim, 0), (self.dim, self.dim)).copy_from(&block);
        }
        let gram = stacked.transpose() * &stacked;
        let (eigenvalues, eigenvectors) = jacobi_eigen(&gram);
        let scale = eigenvalues.iter().cloned().fold(1.0f64, f64::max);
        // Kernel eigenvalues sit at rounding level while the rest are >= 1
        // (integer eigenvalue gaps squared), so the band is wide.
        let mut vectors = Vec::new();
        for (i, &ev) in eigenvalues.iter().enumerate() {
            if ev < 1e-10 * scale {
                vectors.push(self.from_coords(&eigenvectors.column(i).into_owned()));
            }
        }
        gram_schmidt(vectors)
    }

    fn build_decomposition(&self) -> Result<RootDecomposition> {
        let ads: Vec<DMatrix<f64>> = self
            .cartan
            .iter()
            .map(|h| self.ad(h))
            .collect::<Result<_>>()?;
        // Candidate eigenvalue tuples and their simple-root coefficients.
        let candidates: Vec<(Vec<f64>, RootLabel)> = match self.family {
            Family::Sl3 => {
                // Eigenvalues under H1 = diag(1,-1,0), H2 = diag(0,1,-1); the
                // coefficient labels follow from the Cartan matrix [[2,-1],[-1,2]].
                vec![
                    (vec![2.0, -1.0], RootLabel([1, 0])),
                    (vec![-1.0, 2.0], RootLabel([0, 1])),
                    (vec![1.0, 1.0], RootLabel([1, 1])),
                    (vec![-2.0, 1.0], RootLabel([-1, 0])),
                    (vec![1.0, -2.0], RootLabel([0, -1])),
                    (vec![-1.0, -1.0], RootLabel([-1, -1])),
                ]
            }
            _ => vec![
                (vec![1.0], RootLabel([1, 0])),
                (vec![-1.0], RootLabel([-1, 0])),
                (vec![2.0], RootLabel([2, 0])),
                (vec![-2.0], RootLabel([-2, 0])),
            ],
        };
        let mut roots = Vec::new();
        for (lambda, label) in candidates {
            let space = self.joint_eigenspace(&ads, &lambda);
            if !space.is_empty() {
                roots.push((label, space));
            }
        }
        roots.sort_by_key(|(l, _)| *l);
        // Zero eigenspace = a + m, split by the theta eigenvalue.
        let zero = self.joint_eigenspace(&ads, &vec![0.0; ads.len()]);
        let mut a_vecs = Vec::new();
        let mut m_vecs = Vec::new();
        for x in &zero {
            let th = self.theta(x);
            let p_part = (x - &th) * 0.5; // theta = -1 component
            let k_part = (x + &th) * 0.5; // theta = +1 component
            if p_part.norm() > 1e-10 {
                a_vecs.push(p_part);
            }
            if k_part.norm() > 1e-10 {
                m_vecs.push(k_part);
            }
        }
        let a = gram_schmidt(a_vecs);
        let m = gram_schmidt(m_vecs);
        let total: usize = a.len() + m.len() + roots.iter().map(|(_, b)| b.len()).sum::<usize>();
        if total != self.dim || a.len() != self.family.rank() {
            return Err(Error::Model(format!(
                "root decomposition dimensions {total} (dim a = {}) do not match dim g = {}",
                a.len(),
                self.dim
            )));
        }
        Ok(RootDecomposition { a, m, roots })
    }

    /// Orthogonal components of x along a, m, and each root space.
    pub fn decompose(&self, x: &DMatrix<f64>) -> Result<Decomposition> {
        self.coords(x)?;
        let d = &self.decomposition;
        let project = |basis: &[DMatrix<f64>]| {
            let mut p = DMatrix::zeros(self.matrix_size, self.matrix_size);
            for e in basis {
                p += e * frob(e, x);
            }
            p
        };
        let a = project(&d.a);
        let m = project(&d.m);
        let roots: Vec<(RootLabel, DMatrix<f64>)> = d
            .roots
            .iter()
            .map(|(l, b)| (*l, project(b)))
            .collect();
        let mut sum = a.clone() + &m;
        for (_, c) in &roots {
            sum += c;
        }
        let residual = (x - sum).norm();
        Ok(Decomposition { a, m, roots, residual })
    }

    /// Rank of span{[y, x] : y in g_alpha, x in g_{-alpha}} for each simple
    /// root, compared against dim(a) + dim(m).
    pub fn verify_bracket_span(&self) -> Result<SpanReport> {
        let d = &self.decomposition;
        let simple: Vec<RootLabel> = match self.family {
            Family::Sl3 => vec![RootLabel([1, 0]), RootLabel([0, 1])],
            _ => vec![RootLabel([1, 0])],
        };
        let mut rows: Vec<DVector<f64>> = Vec::new();
        for s in simple {
            let plus = d.root_space(s).unwrap_or(&[]);
            let minus = d.root_space(s.neg()).unwrap_or(&[]);
            for y in plus {
                for x in minus {
                    let br = self.bracket(y, x)?;
                    rows.push(self.coords(&br)?);
                }
            }
        }
        let target = d.dim_a() + d.dim_m();
        let (rank, residual, warning) = coord_rank(&rows, self.dim);
        Ok(SpanReport {
            identity: format!("[s-,s+]=a+m {}", self.family.name()),
            achieved_dim: rank,
            target_dim: target,
            pass: rank == target,
            skipped: false,
            residual,
            tolerance_warning: warning,
        })
    }

    /// Mutual containment of span{[x, y] : x, y in g_alpha} and g_{2 alpha}.
    pub fn verify_2alpha_bracket(&self) -> Result<SpanReport> {
        let d = &self.decomposition;
        let g2 = d.root_space(RootLabel([2, 0]));
        let identity = format!("[ga,ga]=g2a {}", self.family.name());
        let Some(g2) = g2 else {
            // Both sides trivial for so(n,1) and sl(3,R).
            return Ok(SpanReport {
                identity,
                achieved_dim: 0,
                target_dim: 0,
                pass: true,
                skipped: true,
                residual: 0.0,
                tolerance_warning: false,
            });
        };
        let ga = d.root_space(RootLabel([1, 0])).unwrap();
        let mut bracket_rows = Vec::new();
        for (i, x) in ga.iter().enumerate() {
            for y in ga.iter().skip(i + 1) {
                bracket_rows.push(self.coords(&self.bracket(x, y)?)?);
            }
        }
        let (rank_br, res1, warn1) = coord_rank(&bracket_rows, self.dim);
        let mut union_rows = bracket_rows;
        for x in g2 {
            union_rows.push(self.coords(x)?);
        }
        let (rank_union, res2, warn2) = coord_rank(&union_rows, self.dim);
        let target = g2.len();
        let pass = rank_br == target && rank_union == target;
        Ok(SpanReport {
            identity,
            achieved_dim: rank_br,
            target_dim: target,
            pass,
            skipped: false,
            residual: res1.max(res2),
            tolerance_warning: warn1 || warn2,
        })
    }

    /// exp(t H0) in closed form: every model's H0 satisfies H0^3 = H0
    /// (eigenvalues in {0, +1, -1}), so
    /// exp(t H0) = I + sinh(t) H0 + (cosh(t) - 1) H0^2.
    pub fn exp_th0(&self, t: f64) -> DMatrix<f64> {
        let h2 = &self.h0 * &self.h0;
        debug_assert!((&h2 * &self.h0 - &self.h0).norm() < 1e-12);
        DMatrix::identity(self.matrix_size, self.matrix_size)
            + &self.h0 * t.sinh()
            + h2 * (t.cosh() - 1.0)
    }

    /// Checks that Ad_{exp(t H0)} scales every root space g_beta by
    /// exp(t beta(H0)), with relative error at most 1e-8.
    pub fn ad_exp_grading(&self, t: f64) -> Result<GradingReport> {
        if t.abs() > 5.0 {
            return Err(Error::Precondition(format!("|t| = {} exceeds 5", t.abs())));
        }
        let g = self.exp_th0(t);
        let g_inv = self.exp_th0(-t);
        let mut factors = Vec::new();
        let mut pass = true;
        for (label, space) in &self.decomposition.roots {
            let expected = (t * label.on_h0()).exp();
            let mut max_err: f64 = 0.0;
            for x in space {
                let adx = &g * x * &g_inv;
                let err = (&adx - x * expected).norm() / (x.norm() * expected);
                max_err = max_err.max(err);
            }
            if max_err > 1e-8 {
                pass = false;
            }
            factors.push((*label, expected, max_err));
        }
        // a and m are centralized by exp(t H0).
        for (name, space) in [("a", &self.decomposition.a), ("m", &self.decomposition.m)] {
            let mut max_err: f64 = 0.0;
            for x in space.iter() {
                let adx = &g * x * &g_inv;
                max_err = max_err.max((&adx - x).norm() / x.norm());
            }
            if max_err > 1e-8 {
                return Err(Error::Grading { subspace: name.into(), residual: max_err });
            }
        }
        if !pass {
            let worst = factors.iter().map(|f| f.2).fold(0.0f64, f64::max);
            return Err(Error::Grading { subspace: "root spaces".into(), residual: worst });
        }
        Ok(GradingReport { t, factors, pass })
    }
}

/// Cyclic Jacobi eigensolver for small symmetric matrices: returns
/// (eigenvalues, orthogonal eigenvector columns). Robust for degenerate
/// spectra, where iterative tridiagonal solvers can mis-pair eigenvectors.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut q = DMatrix::<f64>::identity(n, n);
    let norm = a.norm().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() < 1e-15 * norm {
            break;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let apq = m[(i, j)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m[(i, i)];
                let aqq = m[(j, j)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mki, mkj) = (m[(k, i)], m[(k, j)]);
                    m[(k, i)] = c * mki - s * mkj;
                    m[(k, j)] = s * mki + c * mkj;
                }
                for k in 0..n {
                    let (mik, mjk) = (m[(i, k)], m[(j, k)]);
                    m[(i, k)] = c * mik - s * mjk;
                    m[(j, k)] = s * mik + c * mjk;
                }
                for k in 0..n {
                    let (qki, qkj) = (q[(k, i)], q[(k, j)]);
                    q[(k, i)] = c * qki - s * qkj;
                    q[(k, j)] = s * qki + c * qkj;
                }
            }
        }
    }
    (m.diagonal(), q)
}

/// Frobenius Gram-Schmidt, dropping near-zero directions.
fn gram_schmidt(vectors: Vec<DMatrix<f64>>) -> Vec<DMatrix<f64>> {
    let mut out: Vec<DMatrix<f64>> = Vec::new();
    for mut v in vectors {
        for e in &out {
            let c = frob(e, &v);
            v -= e * c;
        }
        let n = v.norm();
        if n > 1e-10 {
            out.push(v / n);
        }
    }
    out
}

/// Numerical rank of a set of coordinate vectors with the 1e-8 relative
/// threshold and a 10x ambiguity band.
fn coord_rank(rows: &[DVector<f64>], dim: usize) -> (usize, f64, bool) {
    if rows.is_empty() {
        return (0, 0.0, false);
    }
    let mut m = DMatrix::zeros(rows.len(), dim);
    for (i, r) in rows.iter().enumerate() {
        m.set_row(i, &r.transpose());
    }
    let svd = m.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return (0, 0.0, false);
    }
    let mut rank = 0;
    let mut dropped: f64 = 0.0;
    let mut warning = false;
    for &s in svd.singular_values.iter() {
        let rel = s / smax;
        if rel > RANK_TOL {
            rank += 1;
        } else {
            dropped = dropped.max(rel);
        }
        if rel > RANK_TOL / 10.0 && rel < RANK_TOL * 10.0 {
            warning = true;
        }
    }
    (rank, dropped, warning)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use approx::assert_relative_eq;

    fn all_families() -> Vec<Family> {
        vec![
            Family::SoN1(2),
            Family::SoN1(3),
            Family::SoN1(4),
            Family::SuN1(2),
            Family::SuN1(3),
            Family::SpN1(2),
            Family::Sl3,
        ]
    }

    fn random_element(model: &LieAlgebraModel, rng: &mut SplitMix64) -> DMatrix<f64> {
        let c = DVector::from_fn(model.dim, |_, _| rng.uniform(-1.0, 1.0));
        model.from_coords(&c)
    }

    #[test]
    fn defining_algebra_and_involution() {
        for fam in all_families() {
            let model = LieAlgebraModel::new(fam).unwrap();
            for b in model.basis() {
                assert!(model.defining_residual(b) <= 1e-12, "{}", fam.name());
                let tt = model.theta(&model.theta(b));
                assert_relative_eq!((tt - b).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn b_theta_positive_definite() {
        let mut rng = SplitMix64::new(11);
        for fam in all_families() {
            let model = LieAlgebraModel::new(fam).unwrap();
            for _ in 0..5 {
                let x = random_element(&model, &mut rng);
                if x.norm() > 1e-8 {
                    assert!(model.b_theta(&x, &x).unwrap() > 0.0, "{}", fam.name());
                }
            }
        }
    }

    #[test]
    fn expected_dimensions() {
        let dims: Vec<(Family, usize)> = vec![
            (Family::SoN1(2), 3),
            (Family::SoN1(3), 6),
            (Family::SoN1(4), 10),
            (Family::SuN1(2), 8),
            (Family::SuN1(3), 15),
            (Family::SpN1(2), 21),
            (Family::Sl3, 8),
        ];
        for (fam, d) in dims {
            assert_eq!(LieAlgebraModel::new(fam).unwrap().dim, d, "{}", fam.name());
        }
    }

    #[test]
    fn centralizer_m_dimensions() {
        // dim m must match the compact centralizer from Table-style counts:
        // so(n-1), u(n-1) mod center as (n-1)^2, sp(n-1) + sp(1), and 0 for sl3.
        let cases: Vec<(Family, usize)> = vec![
            (Family::SoN1(2), 0),
            (Family::SoN1(3), 1),
            (Family::SoN1(4), 3),
            (Family::SuN1(2), 1),
            (Family::SuN1(3), 4),
            (Family::SpN1(2), 6),
            (Family::Sl3, 0),
        ];
        for (fam, expect) in cases {
            let model = LieAlgebraModel::new(fam).unwrap();
            assert_eq!(model.decomposition().dim_m(), expect, "{}", fam.name());
            assert_eq!(model.decomposition().dim_a(), fam.rank());
        }
    }

    #[test]
    fn bracket_antisymmetry_and_zero() {
        let model = LieAlgebraModel::new(Family::SuN1(2)).unwrap();
        let mut rng = SplitMix64::new(5);
        let x = random_element(&model, &mut rng);
        let y = random_element(&model, &mut rng);
        let xy = model.bracket(&x, &y).unwrap();
        let yx = model.bracket(&y, &x).unwrap();
        assert_relative_eq!((&xy + &yx).norm(), 0.0, epsilon = 1e-10);
        assert_relative_eq!(model.bracket(&x, &x).unwrap().norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bracket_matches_dense_commutator_oracle() {
        // Independent oracle: triple-loop dense multiply, no nalgebra operators.
        fn mul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
            let n = a.nrows();
            let mut out = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += a[(i, k)] * b[(k, j)];
                    }
                    out[(i, j)] = s;
                }
            }
            out
        }
        let model = LieAlgebraModel::new(Family::SoN1(3)).unwrap();
        let mut rng = SplitMix64::new(17);
        for _ in 0..10 {
            let x = random_element(&model, &mut rng);
            let y = random_element(&model, &mut rng);
            let oracle = mul(&x, &y) - mul(&y, &x);
            let br = model.bracket(&x, &y).unwrap();
            assert_relative_eq!((br - oracle).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn bracket_rejects_non_span_element() {
        let model = LieAlgebraModel::new(Family::SoN1(2)).unwrap();
        let mut bad = DMatrix::zeros(3, 3);
        bad[(0, 0)] = 1.0; // symmetric diagonal is not in so(2,1)
        let err = model.bracket(&bad, &model.basis()[0].clone()).unwrap_err();
        assert!(matches!(err, Error::Decomposition { .. }));
    }

    #[test]
    fn decompose_zero_and_h0() {
        for fam in all_families() {
            let model = LieAlgebraModel::new(fam).unwrap();
            let zero = DMatrix::zeros(model.matrix_size, model.matrix_size);
            let d = model.decompose(&zero).unwrap();
            assert!(d.a.norm() < 1e-14 && d.m.norm() < 1e-14 && d.residual < 1e-14);
            let dh = model.decompose(&model.h0().clone()).unwrap();
            assert_relative_eq!((dh.a - model.h0()).norm(), 0.0, epsilon = 1e-10);
            assert!(dh.m.norm() < 1e-10);
            for (_, c) in &dh.roots {
                assert!(c.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn decompose_matches_least_squares_oracle() {
        // Oracle: least squares against the concatenated subspace bases.
        let model = LieAlgebraModel::new(Family::SuN1(2)).unwrap();
        let mut rng = SplitMix64::new(23);
        let x = random_element(&model, &mut rng);
        let d = model.decompose(&x).unwrap();
        assert!(d.residual <= 1e-10);

        let dec = model.decomposition();
        let mut all: Vec<&DMatrix<f64>> = dec.a.iter().collect();
        all.extend(dec.m.iter());
        for (_, b) in &dec.roots {
            all.extend(b.iter());
        }
        let n2 = model.matrix_size * model.matrix_size;
        let mut mat = DMatrix::zeros(n2, all.len());
        for (j, b) in all.iter().enumerate() {
            for (i, v) in b.iter().enumerate() {
                mat[(i, j)] = *v;
            }
        }
        let xv = DVector::from_iterator(n2, x.iter().cloned());
        let svd = mat.clone().svd(true, true);
        let sol = svd.solve(&xv, 1e-12).unwrap();
        let mut recon = DMatrix::zeros(model.matrix_size, model.matrix_size);
        for (j, b) in all.iter().enumerate() {
            recon += *b * sol[j];
        }
        let mut sum = d.a.clone() + &d.m;
        for (_, c) in &d.roots {
            sum += c;
        }
        assert_relative_eq!((recon - sum).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn jacobi_identity_random_triples() {
        let mut rng = SplitMix64::new(31);
        for fam in all_families() {
            let model = LieAlgebraModel::new(fam).unwrap();
            for _ in 0..5 {
                let x = random_element(&model, &mut rng);
                let y = random_element(&model, &mut rng);
                let z = random_element(&model, &mut rng);
                let j = model.bracket(&x, &model.bracket(&y, &z).unwrap()).unwrap()
                    + model.bracket(&y, &model.bracket(&z, &x).unwrap()).unwrap()
                    + model.bracket(&z, &model.bracket(&x, &y).unwrap()).unwrap();
                assert!(j.norm() <= 1e-9 * (1.0 + x.norm() * y.norm() * z.norm()), "{}", fam.name());
            }
        }
    }

    #[test]
    fn root_space_bracket_closure() {
        // [g_beta, g_gamma] lands in g_{beta+gamma} (or a+m when beta = -gamma).
        for fam in all_families() {
            let model = LieAlgebraModel::new(fam).unwrap();
            let dec = model.decomposition();
            for (lb, bb) in &dec.roots {
                for (lg, bg) in &dec.roots {
                    let sum = RootLabel([lb.0[0] + lg.0[0], lb.0[1] + lg.0[1]]);
                    for x in bb {
                        for y in bg {
                            let br = model.bracket(x, y).unwrap();
                            let d = model.decompose(&br).unwrap();
                            let mut off = 0.0f64;
                            if sum != RootLabel([0, 0]) {
                                off += d.a.norm() + d.m.norm();
                            }
                            for (l, c) in &d.roots {
                                if *l != sum {
                                    off += c.norm();
                                }
                            }
                            assert!(off <= 1e-9 * (1.0 + br.norm()), "{} {:?}+{:?}", fam.name(), lb, lg);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn theta_flips_root_spaces() {
        for fam in all_families() {
            let model = LieAlgebraModel::new(fam).unwrap();
            for (label, basis) in &model.decomposition().roots {
                for x in basis {
                    let tx = model.theta(x);
                    let d = model.decompose(&tx).unwrap();
                    let opposite = d.component(label.neg()).unwrap();
                    assert!(
                        (opposite - &tx).norm() <= 1e-9,
                        "{} {:?}",
                        fam.name(),
                        label
                    );
                }
            }
        }
    }

    #[test]
    fn bracket_span_all_families() {
        for fam in all_families() {
            let model = LieAlgebraModel::new(fam).unwrap();
            let rep = model.verify_bracket_span().unwrap();
            assert!(rep.pass, "{}: achieved {} target {}", fam.name(), rep.achieved_dim, rep.target_dim);
            assert!(!rep.tolerance_warning, "{}", fam.name());
        }
        // sp(3,1) as an extra stress case.
        let model = LieAlgebraModel::new(Family::SpN1(3)).unwrap();
        assert!(model.verify_bracket_span().unwrap().pass);
    }

    #[test]
    fn two_alpha_bracket() {
        let su = LieAlgebraModel::new(Family::SuN1(2)).unwrap();
        let rep = su.verify_2alpha_bracket().unwrap();
        assert!(rep.pass && !rep.skipped);
        assert_eq!(rep.target_dim, 1); // Im C

        let sp = LieAlgebraModel::new(Family::SpN1(2)).unwrap();
        let rep = sp.verify_2alpha_bracket().unwrap();
        assert!(rep.pass && !rep.skipped);
        assert_eq!(rep.target_dim, 3); // Im H

        let so = LieAlgebraModel::new(Family::SoN1(4)).unwrap();
        let rep = so.verify_2alpha_bracket().unwrap();
        assert!(rep.pass && rep.skipped);
    }

    #[test]
    fn grading_identity_at_t_zero() {
        let model = LieAlgebraModel::new(Family::SuN1(2)).unwrap();
        let rep = model.ad_exp_grading(0.0).unwrap();
        for (_, factor, err) in rep.factors {
            assert_relative_eq!(factor, 1.0);
            assert!(err <= 1e-10);
        }
    }

    #[test]
    fn grading_su21_at_t_one() {
        let model = LieAlgebraModel::new(Family::SuN1(2)).unwrap();
        let rep = model.ad_exp_grading(1.0).unwrap();
        assert!(rep.pass);
        // s+ = g_{-alpha} scales by e^{-1}, [s+, s+] = g_{-2alpha} by e^{-2}.
        let f1 = rep.factors.iter().find(|(l, _, _)| *l == RootLabel([-1, 0])).unwrap();
        assert_relative_eq!(f1.1, (-1.0f64).exp());
        let f2 = rep.factors.iter().find(|(l, _, _)| *l == RootLabel([-2, 0])).unwrap();
        assert_relative_eq!(f2.1, (-2.0f64).exp());
    }

    #[test]
    fn grading_so31_at_minus_two() {
        let model = LieAlgebraModel::new(Family::SoN1(3)).unwrap();
        let rep = model.ad_exp_grading(-2.0).unwrap();
        assert!(rep.pass);
        let f = rep.factors.iter().find(|(l, _, _)| *l == RootLabel([-1, 0])).unwrap();
        assert_relative_eq!(f.1, (2.0f64).exp());
        assert!(rep.factors.iter().all(|(l, _, _)| l.0[0].abs() == 1));
    }

    #[test]
    fn grading_rejects_large_t() {
        let model = LieAlgebraModel::new(Family::SoN1(2)).unwrap();
        assert!(matches!(model.ad_exp_grading(6.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn killing_form_properties() {
        let model = LieAlgebraModel::new(Family::SuN1(2)).unwrap();
        let mut rng = SplitMix64::new(41);
        let h0 = model.h0().clone();
        assert!(model.killing(&h0, &h0).unwrap() > 0.0);
        let x = random_element(&model, &mut rng);
        assert!(model.killing(&x, &model.theta(&x)).unwrap() < 0.0);
        // Ad-invariance: B([z,x],y) + B(x,[z,y]) = 0.
        let y = random_element(&model, &mut rng);
        let z = random_element(&model, &mut rng);
        let lhs = model.killing(&model.bracket(&z, &x).unwrap(), &y).unwrap()
            + model.killing(&x, &model.bracket(&z, &y).unwrap()).unwrap();
        assert!(lhs.abs() <= 1e-9 * (1.0 + x.norm() * y.norm() * z.norm()));
    }

    #[test]
    fn killing_proportional_to_trace_form() {
        // Fit the proportionality constant on one pair, then assert it on others.
        let model = LieAlgebraModel::new(Family::SuN1(2)).unwrap();
        let mut rng = SplitMix64::new(43);
        let x0 = random_element(&model, &mut rng);
        let y0 = random_element(&model, &mut rng);
        let c = model.killing(&x0, &y0).unwrap() / frob(&(x0.clone() * &y0), &DMatrix::identity(model.matrix_size, model.matrix_size));
        for _ in 0..5 {
            let x = random_element(&model, &mut rng);
            let y = random_element(&model, &mut rng);
            let tr = (x.clone() * &y).trace();
            let b = model.killing(&x, &y).unwrap();
            assert_relative_eq!(b, c * tr, epsilon = 1e-7 * (1.0 + b.abs()));
        }
    }
}
