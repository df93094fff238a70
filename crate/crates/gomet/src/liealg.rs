//! Compact matrix Lie algebras: bases, brackets, structure constants, and
//! the Ad-invariant inner product `Q(X, Y) = -trace(XY)`.
//!
//! Supported families:
//! - `so(n)`: real skew-symmetric matrices, basis `{e_ab = E_ab - E_ba}`.
//! - `u(n)`: skew-Hermitian matrices, basis `{e_ab, f_ab, f_aa}` with
//!   `f_ab = i (E_ab + E_ba)` and `f_aa = i E_aa`.
//! - `su(n)`: traceless skew-Hermitian; off-diagonal `{e_ab, f_ab}` plus the
//!   diagonal differences `f_ll - f_{l+1,l+1}`, orthogonalized once under `Q`
//!   (adjacent differences are not Q-orthogonal as written).
//! - `sp(n)`: complex `2n x 2n` matrices `Z` that are skew-Hermitian and
//!   satisfy `Z J = J conj(Z)` for `J = [[0, I], [-I, 0]]`, i.e. blocks
//!   `[[A, B], [-conj(B), conj(A)]]` with `A` skew-Hermitian, `B` symmetric.
//!
//! Every basis is Q-orthogonal; the Gram matrix is diagonal with positive
//! entries. Structure constants are computed once at construction and
//! cached. Algebras are immutable after construction and safe to share
//! across threads behind `Arc`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::Error;
use crate::Result;

pub type Cx = Complex<f64>;

/// Dense complex matrix realization of an algebra element.
pub type MatrixElement = DMatrix<Cx>;

/// Classical compact family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    So,
    U,
    Su,
    Sp,
}

impl Family {
    /// Size of the complex matrix realization for parameter `n`.
    pub fn matrix_size(self, n: usize) -> usize {
        match self {
            Family::Sp => 2 * n,
            _ => n,
        }
    }

    /// Real dimension of the family at parameter `n`.
    pub fn dim(self, n: usize) -> usize {
        match self {
            Family::So => n * (n - 1) / 2,
            Family::U => n * n,
            Family::Su => n * n - 1,
            Family::Sp => n * (2 * n + 1),
        }
    }

    /// Group name at parameter `n`, e.g. `SU(5)`.
    pub fn group_name(self, n: usize) -> String {
        match self {
            Family::So => format!("SO({n})"),
            Family::U => format!("U({n})"),
            Family::Su => format!("SU({n})"),
            Family::Sp => format!("Sp({n})"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::So => "so",
            Family::U => "u",
            Family::Su => "su",
            Family::Sp => "sp",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "so" => Ok(Family::So),
            "u" => Ok(Family::U),
            "su" => Ok(Family::Su),
            "sp" => Ok(Family::Sp),
            other => Err(Error::InvalidSpec(format!(
                "unknown family '{other}' (expected so, u, su or sp)"
            ))),
        }
    }
}

/// Role of a basis element; indices are 1-based as in the e/f notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// `e_ab = E_ab - E_ba`, `a < b` (embedded block-diagonally for sp).
    E { a: usize, b: usize },
    /// `f_ab = i (E_ab + E_ba)`, `a < b`.
    F { a: usize, b: usize },
    /// `f_aa = i E_aa` (u family and the sp diagonal).
    FDiag { a: usize },
    /// Orthogonalized traceless diagonal combination (su family).
    Diag { l: usize },
    /// sp only: `[[0, S], [-S, 0]]` with `S` real symmetric (`a <= b`).
    SpSymRe { a: usize, b: usize },
    /// sp only: `[[0, iS], [iS, 0]]` with `S` real symmetric (`a <= b`).
    SpSymIm { a: usize, b: usize },
}

impl BasisKind {
    fn label(self) -> String {
        fn pair(prefix: &str, a: usize, b: usize) -> String {
            if a < 10 && b < 10 {
                format!("{prefix}_{a}{b}")
            } else {
                format!("{prefix}_{a}_{b}")
            }
        }
        match self {
            BasisKind::E { a, b } => pair("e", a, b),
            BasisKind::F { a, b } => pair("f", a, b),
            BasisKind::FDiag { a } => pair("f", a, a),
            BasisKind::Diag { l } => format!("d_{l}"),
            BasisKind::SpSymRe { a, b } => pair("p", a, b),
            BasisKind::SpSymIm { a, b } => pair("q", a, b),
        }
    }
}

/// `Q(X, Y) = -trace(XY)`; real for skew-Hermitian arguments.
pub fn q_inner_mat(x: &MatrixElement, y: &MatrixElement) -> f64 {
    let n = x.nrows();
    let mut tr = Cx::new(0.0, 0.0);
    for r in 0..n {
        for c in 0..n {
            tr += x[(r, c)] * y[(c, r)];
        }
    }
    -tr.re
}

fn unit(n: usize, a: usize, b: usize) -> MatrixElement {
    let mut m = DMatrix::from_element(n, n, Cx::new(0.0, 0.0));
    m[(a - 1, b - 1)] = Cx::new(1.0, 0.0);
    m
}

/// `e_ab = E_ab - E_ba` as an `n x n` matrix (1-based indices).
pub fn e_mat(n: usize, a: usize, b: usize) -> MatrixElement {
    unit(n, a, b) - unit(n, b, a)
}

/// `f_ab = i (E_ab + E_ba)`; for `a == b` this is `2i E_aa`.
pub fn f_mat(n: usize, a: usize, b: usize) -> MatrixElement {
    (unit(n, a, b) + unit(n, b, a)) * Cx::new(0.0, 1.0)
}

/// `f_aa = i E_aa`.
pub fn f_diag_mat(n: usize, a: usize) -> MatrixElement {
    unit(n, a, a) * Cx::new(0.0, 1.0)
}

/// Compact matrix Lie algebra with a Q-orthogonal ordered basis, cached
/// structure constants and the Gram matrix of `Q`.
pub struct LieAlgebra {
    pub family: Family,
    pub n: usize,
    pub dim: usize,
    pub basis: Vec<MatrixElement>,
    pub kinds: Vec<BasisKind>,
    pub labels: Vec<String>,
    /// Gram matrix of `Q` on the basis; diagonal with positive entries.
    pub gram: DMatrix<f64>,
    /// Ratio `c` such that the Killing form is `-c * Q` (None for u(n),
    /// whose Killing form is degenerate). Recorded as homothety metadata.
    pub killing_scale: Option<f64>,
    pub tol: Tolerances,
    structure: Vec<Vec<(usize, f64)>>,
    bar_pairs: Vec<Option<(usize, f64)>>,
    label_index: HashMap<String, usize>,
}

impl fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LieAlgebra({}({}), dim {})", self.family, self.n, self.dim)
    }
}

/// Ordered su(n) basis `{e_ab, f_ab, diagonal differences}`.
pub fn su_basis(n: usize) -> Result<Arc<LieAlgebra>> {
    LieAlgebra::new(Family::Su, n, Tolerances::default())
}

/// Ordered so(n) basis `{e_ab}`.
pub fn so_basis(n: usize) -> Result<Arc<LieAlgebra>> {
    LieAlgebra::new(Family::So, n, Tolerances::default())
}

/// Ordered u(n) basis `{e_ab, f_ab, f_aa}`.
pub fn u_basis(n: usize) -> Result<Arc<LieAlgebra>> {
    LieAlgebra::new(Family::U, n, Tolerances::default())
}

/// Ordered sp(n) basis in the complex `2n x 2n` realization.
pub fn sp_basis(n: usize) -> Result<Arc<LieAlgebra>> {
    LieAlgebra::new(Family::Sp, n, Tolerances::default())
}

impl LieAlgebra {
    pub fn new(family: Family, n: usize, tol: Tolerances) -> Result<Arc<Self>> {
        if n < 2 {
            return Err(Error::InvalidSpec(format!(
                "{family}({n}): rank parameter must be at least 2"
            )));
        }
        if family.matrix_size(n) > 12 {
            return Err(Error::InvalidSpec(format!(
                "{family}({n}): matrix size {} exceeds the supported maximum of 12",
                family.matrix_size(n)
            )));
        }

        let (mut basis, kinds) = Self::raw_basis(family, n);
        if family == Family::Su {
            Self::orthogonalize_diagonal(&mut basis, &kinds);
        }

        let dim = basis.len();
        debug_assert_eq!(dim, family.dim(n));

        let mut gram = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                gram[(i, j)] = q_inner_mat(&basis[i], &basis[j]);
            }
        }
        for i in 0..dim {
            if gram[(i, i)] <= 0.0 {
                return Err(Error::Numerical(format!(
                    "basis element {i} has non-positive Q-norm"
                )));
            }
            for j in 0..dim {
                if i != j && gram[(i, j)].abs() > tol.abs * gram[(i, i)].max(1.0) {
                    return Err(Error::Numerical(format!(
                        "basis is not Q-orthogonal at pair ({i}, {j}): {}",
                        gram[(i, j)]
                    )));
                }
            }
        }

        let labels: Vec<String> = kinds.iter().map(|k| k.label()).collect();
        let label_index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();

        let killing_scale = match family {
            Family::So => Some((n as f64) - 2.0),
            Family::Su => Some(2.0 * n as f64),
            Family::Sp => Some(2.0 * n as f64 + 2.0),
            Family::U => None,
        };

        let mut alg = LieAlgebra {
            family,
            n,
            dim,
            basis,
            kinds,
            labels,
            gram,
            killing_scale,
            tol,
            structure: Vec::new(),
            bar_pairs: Vec::new(),
            label_index,
        };
        alg.compute_structure()?;
        alg.compute_bar_pairs();
        Ok(Arc::new(alg))
    }

    fn raw_basis(family: Family, n: usize) -> (Vec<MatrixElement>, Vec<BasisKind>) {
        let mut basis = Vec::new();
        let mut kinds = Vec::new();
        match family {
            Family::So => {
                for a in 1..=n {
                    for b in (a + 1)..=n {
                        basis.push(e_mat(n, a, b));
                        kinds.push(BasisKind::E { a, b });
                    }
                }
            }
            Family::U | Family::Su => {
                for a in 1..=n {
                    for b in (a + 1)..=n {
                        basis.push(e_mat(n, a, b));
                        kinds.push(BasisKind::E { a, b });
                    }
                }
                for a in 1..=n {
                    for b in (a + 1)..=n {
                        basis.push(f_mat(n, a, b));
                        kinds.push(BasisKind::F { a, b });
                    }
                }
                if family == Family::U {
                    for a in 1..=n {
                        basis.push(f_diag_mat(n, a));
                        kinds.push(BasisKind::FDiag { a });
                    }
                } else {
                    for l in 1..n {
                        basis.push(f_diag_mat(n, l) - f_diag_mat(n, l + 1));
                        kinds.push(BasisKind::Diag { l });
                    }
                }
            }
            Family::Sp => {
                let size = 2 * n;
                let embed_a = |a_block: MatrixElement| -> MatrixElement {
                    let mut m = DMatrix::from_element(size, size, Cx::new(0.0, 0.0));
                    m.view_mut((0, 0), (n, n)).copy_from(&a_block);
                    m.view_mut((n, n), (n, n)).copy_from(&a_block.map(|z| z.conj()));
                    m
                };
                let embed_b = |b_block: MatrixElement| -> MatrixElement {
                    let mut m = DMatrix::from_element(size, size, Cx::new(0.0, 0.0));
                    m.view_mut((0, n), (n, n)).copy_from(&b_block);
                    m.view_mut((n, 0), (n, n))
                        .copy_from(&b_block.map(|z| -z.conj()));
                    m
                };
                for a in 1..=n {
                    for b in (a + 1)..=n {
                        basis.push(embed_a(e_mat(n, a, b)));
                        kinds.push(BasisKind::E { a, b });
                    }
                }
                for a in 1..=n {
                    for b in (a + 1)..=n {
                        basis.push(embed_a(f_mat(n, a, b)));
                        kinds.push(BasisKind::F { a, b });
                    }
                }
                for a in 1..=n {
                    basis.push(embed_a(f_diag_mat(n, a)));
                    kinds.push(BasisKind::FDiag { a });
                }
                let sym = |a: usize, b: usize| -> MatrixElement {
                    if a == b {
                        unit(n, a, a)
                    } else {
                        unit(n, a, b) + unit(n, b, a)
                    }
                };
                for a in 1..=n {
                    for b in a..=n {
                        basis.push(embed_b(sym(a, b)));
                        kinds.push(BasisKind::SpSymRe { a, b });
                    }
                }
                for a in 1..=n {
                    for b in a..=n {
                        basis.push(embed_b(sym(a, b) * Cx::new(0.0, 1.0)));
                        kinds.push(BasisKind::SpSymIm { a, b });
                    }
                }
            }
        }
        (basis, kinds)
    }

    /// One-time Gram–Schmidt pass over the su diagonal differences, which
    /// are not pairwise Q-orthogonal as written (adjacent differences share
    /// an `f_ll` term).
    fn orthogonalize_diagonal(basis: &mut [MatrixElement], kinds: &[BasisKind]) {
        let diag_idx: Vec<usize> = kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| matches!(k, BasisKind::Diag { .. }))
            .map(|(i, _)| i)
            .collect();
        for pos in 0..diag_idx.len() {
            for prev in 0..pos {
                let i = diag_idx[pos];
                let j = diag_idx[prev];
                let c = q_inner_mat(&basis[i], &basis[j]) / q_inner_mat(&basis[j], &basis[j]);
                let adjusted = &basis[i] - &basis[j] * Cx::new(c, 0.0);
                basis[i] = adjusted;
            }
        }
    }

    fn compute_structure(&mut self) -> Result<()> {
        let dim = self.dim;
        self.structure = vec![Vec::new(); dim * dim];
        for i in 0..dim {
            for j in (i + 1)..dim {
                let comm = &self.basis[i] * &self.basis[j] - &self.basis[j] * &self.basis[i];
                let coeffs = self.matrix_coeffs(&comm);
                let recon = self.coeffs_matrix(&coeffs);
                let err = (&comm - &recon).norm();
                let scale = comm.norm().max(1.0);
                if err > 1e-10 * scale {
                    return Err(Error::Numerical(format!(
                        "bracket of basis pair ({i}, {j}) left the basis span (residual {err:.3e})"
                    )));
                }
                let mut row: Vec<(usize, f64)> = Vec::new();
                for (k, &c) in coeffs.iter().enumerate() {
                    if c.abs() > 1e-12 {
                        row.push((k, c));
                    }
                }
                self.structure[j * dim + i] = row.iter().map(|&(k, c)| (k, -c)).collect();
                self.structure[i * dim + j] = row;
            }
        }
        Ok(())
    }

    fn compute_bar_pairs(&mut self) {
        let mut pairs = vec![None; self.dim];
        if matches!(self.family, Family::U | Family::Su) {
            let mut f_index = HashMap::new();
            let mut e_index = HashMap::new();
            for (i, k) in self.kinds.iter().enumerate() {
                match *k {
                    BasisKind::E { a, b } => {
                        e_index.insert((a, b), i);
                    }
                    BasisKind::F { a, b } => {
                        f_index.insert((a, b), i);
                    }
                    _ => {}
                }
            }
            for (i, k) in self.kinds.iter().enumerate() {
                match *k {
                    BasisKind::E { a, b } => pairs[i] = f_index.get(&(a, b)).map(|&j| (j, 1.0)),
                    BasisKind::F { a, b } => pairs[i] = e_index.get(&(a, b)).map(|&j| (j, -1.0)),
                    _ => {}
                }
            }
        }
        self.bar_pairs = pairs;
    }

    /// Coefficients of an arbitrary matrix against the basis (valid when the
    /// matrix lies in the span; callers check the round trip).
    fn matrix_coeffs(&self, m: &MatrixElement) -> DVector<f64> {
        DVector::from_fn(self.dim, |k, _| {
            q_inner_mat(m, &self.basis[k]) / self.gram[(k, k)]
        })
    }

    fn coeffs_matrix(&self, coeffs: &DVector<f64>) -> MatrixElement {
        let size = self.family.matrix_size(self.n);
        let mut m = DMatrix::from_element(size, size, Cx::new(0.0, 0.0));
        for (k, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                m += &self.basis[k] * Cx::new(c, 0.0);
            }
        }
        m
    }

    /// Structure constants of the bracket `[b_i, b_j]` as a sparse row of
    /// `(k, c)` pairs with `[b_i, b_j] = sum_k c b_k`.
    pub fn structure_row(&self, i: usize, j: usize) -> &[(usize, f64)] {
        &self.structure[i * self.dim + j]
    }

    /// Single structure constant `c[i][j][k]`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure_row(i, j)
            .iter()
            .find(|&&(kk, _)| kk == k)
            .map(|&(_, c)| c)
            .unwrap_or(0.0)
    }

    pub fn basis_index(&self, label: &str) -> Option<usize> {
        self.label_index.get(label).copied()
    }

    /// Checks that a matrix is a valid element of this family's realization.
    pub fn validate_element(&self, m: &MatrixElement, tol: f64) -> Result<()> {
        let size = self.family.matrix_size(self.n);
        if m.nrows() != size || m.ncols() != size {
            return Err(Error::InvalidArgument(format!(
                "expected a {size}x{size} matrix"
            )));
        }
        let scale = m.norm().max(1.0);
        let skew_herm = (m + m.adjoint()).norm();
        match self.family {
            Family::So => {
                let im: f64 = m.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
                if im > tol * scale || skew_herm > tol * scale {
                    return Err(Error::InvalidArgument(
                        "so element must be real skew-symmetric".into(),
                    ));
                }
            }
            Family::U => {
                if skew_herm > tol * scale {
                    return Err(Error::InvalidArgument(
                        "u element must be skew-Hermitian".into(),
                    ));
                }
            }
            Family::Su => {
                let tr = m.trace();
                if skew_herm > tol * scale || tr.norm() > tol * scale {
                    return Err(Error::InvalidArgument(
                        "su element must be traceless skew-Hermitian".into(),
                    ));
                }
            }
            Family::Sp => {
                let half = size / 2;
                let mut j = DMatrix::from_element(size, size, Cx::new(0.0, 0.0));
                for k in 0..half {
                    j[(k, half + k)] = Cx::new(1.0, 0.0);
                    j[(half + k, k)] = Cx::new(-1.0, 0.0);
                }
                let quat = (m * &j - j * m.map(|z| z.conj())).norm();
                if skew_herm > tol * scale || quat > tol * scale {
                    return Err(Error::InvalidArgument(
                        "sp element must be skew-Hermitian with Z J = J conj(Z)".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Full invariant suite: Gram diagonality, structure-tensor consistency
    /// with the matrix bracket, the Jacobi identity and Ad-invariance of `Q`
    /// on all basis triples. Residuals are relative to operand norms.
    pub fn verify(&self) -> Result<()> {
        let dim = self.dim;
        let norms: Vec<f64> = (0..dim).map(|k| self.gram[(k, k)].sqrt()).collect();

        for i in 0..dim {
            for j in 0..dim {
                if i != j && self.gram[(i, j)].abs() > 1e-12 * norms[i] * norms[j] {
                    return Err(Error::Numerical(format!(
                        "gram not diagonal at ({i}, {j})"
                    )));
                }
            }
        }

        // Matrix bracket against the cached structure tensor.
        for i in 0..dim {
            for j in 0..dim {
                let comm = &self.basis[i] * &self.basis[j] - &self.basis[j] * &self.basis[i];
                let mut recon = DMatrix::from_element(
                    comm.nrows(),
                    comm.ncols(),
                    Cx::new(0.0, 0.0),
                );
                for &(k, c) in self.structure_row(i, j) {
                    recon += &self.basis[k] * Cx::new(c, 0.0);
                }
                let err = (&comm - &recon).norm();
                if err > 1e-12 * (norms[i] * norms[j]).max(1.0) {
                    return Err(Error::Numerical(format!(
                        "structure tensor mismatch at ({i}, {j}): {err:.3e}"
                    )));
                }
            }
        }

        // Dense bracket table for the triple checks.
        let brackets: Vec<DVector<f64>> = (0..dim * dim)
            .map(|idx| {
                let mut v = DVector::zeros(dim);
                for &(k, c) in &self.structure[idx] {
                    v[k] = c;
                }
                v
            })
            .collect();
        let bracket_with_basis = |v: &DVector<f64>, j: usize| -> DVector<f64> {
            let mut out = DVector::zeros(dim);
            for i in 0..dim {
                let vi = v[i];
                if vi == 0.0 {
                    continue;
                }
                for &(k, c) in self.structure_row(i, j) {
                    out[k] += vi * c;
                }
            }
            out
        };

        for i in 0..dim {
            for j in 0..dim {
                let bij = &brackets[i * dim + j];
                for k in 0..dim {
                    let scale = norms[i] * norms[j] * norms[k];
                    // Jacobi: [[i,j],k] + [[j,k],i] + [[k,i],j] = 0.
                    let r = bracket_with_basis(bij, k)
                        + bracket_with_basis(&brackets[j * dim + k], i)
                        + bracket_with_basis(&brackets[k * dim + i], j);
                    let jac = r
                        .iter()
                        .enumerate()
                        .map(|(l, &c)| (c * norms[l]).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    if jac > 1e-12 * scale {
                        return Err(Error::Numerical(format!(
                            "Jacobi identity fails at triple ({i}, {j}, {k}): {jac:.3e}"
                        )));
                    }
                    // Q([z,x],y) + Q(x,[z,y]) = 0 with z = b_i, x = b_j, y = b_k.
                    let t1 = brackets[i * dim + j][k] * self.gram[(k, k)];
                    let t2 = brackets[i * dim + k][j] * self.gram[(j, j)];
                    if (t1 + t2).abs() > 1e-12 * scale {
                        return Err(Error::Numerical(format!(
                            "Q is not ad-invariant at triple ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn same_algebra(&self, other: &LieAlgebra) -> bool {
        self.family == other.family && self.n == other.n
    }
}

/// Element of a [`LieAlgebra`] in basis coordinates.
#[derive(Clone)]
pub struct AlgebraVector {
    algebra: Arc<LieAlgebra>,
    coeffs: DVector<f64>,
}

impl fmt::Debug for AlgebraVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c.abs() > 1e-12 {
                parts.push(format!("{:+.4}*{}", c, self.algebra.labels[k]));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

impl AlgebraVector {
    pub fn new(algebra: Arc<LieAlgebra>, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != algebra.dim {
            return Err(Error::InvalidArgument(format!(
                "coefficient vector has length {}, algebra dimension is {}",
                coeffs.len(),
                algebra.dim
            )));
        }
        Ok(AlgebraVector { algebra, coeffs })
    }

    pub fn zero(algebra: Arc<LieAlgebra>) -> Self {
        let dim = algebra.dim;
        AlgebraVector {
            algebra,
            coeffs: DVector::zeros(dim),
        }
    }

    pub fn basis_vector(algebra: Arc<LieAlgebra>, index: usize) -> Self {
        let dim = algebra.dim;
        let mut coeffs = DVector::zeros(dim);
        coeffs[index] = 1.0;
        AlgebraVector { algebra, coeffs }
    }

    /// Basis element by label, e.g. `e_12`.
    pub fn from_label(algebra: &Arc<LieAlgebra>, label: &str) -> Result<Self> {
        let idx = algebra.basis_index(label).ok_or_else(|| {
            Error::InvalidArgument(format!("no basis element labelled '{label}'"))
        })?;
        Ok(Self::basis_vector(algebra.clone(), idx))
    }

    /// Expands a matrix in the basis; errors when the matrix is not in the
    /// span (checked by round trip).
    pub fn from_matrix(algebra: &Arc<LieAlgebra>, m: &MatrixElement) -> Result<Self> {
        let coeffs = algebra.matrix_coeffs(m);
        let recon = algebra.coeffs_matrix(&coeffs);
        let err = (m - &recon).norm();
        let scale = m.norm();
        if err > algebra.tol.abs.max(algebra.tol.rel * scale) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not in the span of the {}({}) basis (residual {err:.3e})",
                algebra.family, algebra.n
            )));
        }
        Ok(AlgebraVector {
            algebra: algebra.clone(),
            coeffs,
        })
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn to_matrix(&self) -> MatrixElement {
        self.algebra.coeffs_matrix(&self.coeffs)
    }

    fn check_same(&self, other: &AlgebraVector, op: &str) -> Result<()> {
        if !self.algebra.same_algebra(&other.algebra) {
            return Err(Error::InvalidArgument(format!(
                "{op}: operands belong to different algebras ({:?} vs {:?})",
                self.algebra, other.algebra
            )));
        }
        Ok(())
    }

    /// Lie bracket via the cached structure tensor.
    pub fn bracket(&self, other: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_same(other, "bracket")?;
        let dim = self.algebra.dim;
        let mut out = DVector::zeros(dim);
        for i in 0..dim {
            let xi = self.coeffs[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..dim {
                let yj = other.coeffs[j];
                if yj == 0.0 {
                    continue;
                }
                for &(k, c) in self.algebra.structure_row(i, j) {
                    out[k] += xi * yj * c;
                }
            }
        }
        Ok(AlgebraVector {
            algebra: self.algebra.clone(),
            coeffs: out,
        })
    }

    /// `Q(X, Y)` through the diagonal Gram matrix.
    pub fn inner(&self, other: &AlgebraVector) -> Result<f64> {
        self.check_same(other, "inner")?;
        Ok(self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .enumerate()
            .map(|(k, (&x, &y))| x * y * self.algebra.gram[(k, k)])
            .sum())
    }

    pub fn q_norm(&self) -> f64 {
        self.inner(self).expect("same algebra").sqrt()
    }

    /// The bar involution: swaps `e_ab <-> f_ab` coordinates with
    /// `bar(e) = f`, `bar(f) = -e`. Defined on the off-diagonal span of the
    /// u/su families; any diagonal coordinate must vanish.
    pub fn bar(&self) -> Result<AlgebraVector> {
        if !matches!(self.algebra.family, Family::U | Family::Su) {
            return Err(Error::InvalidArgument(format!(
                "bar map is defined for the u/su families, not {}",
                self.algebra.family
            )));
        }
        let mut out = DVector::zeros(self.algebra.dim);
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            match self.algebra.bar_pairs[k] {
                Some((j, sign)) => out[j] += sign * c,
                None => {
                    if c.abs() > self.algebra.tol.abs {
                        return Err(Error::InvalidArgument(format!(
                            "bar map requires zero diagonal coordinates; '{}' has coefficient {c}",
                            self.algebra.labels[k]
                        )));
                    }
                }
            }
        }
        Ok(AlgebraVector {
            algebra: self.algebra.clone(),
            coeffs: out,
        })
    }

    pub fn add(&self, other: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_same(other, "add")?;
        Ok(AlgebraVector {
            algebra: self.algebra.clone(),
            coeffs: &self.coeffs + &other.coeffs,
        })
    }

    pub fn sub(&self, other: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_same(other, "sub")?;
        Ok(AlgebraVector {
            algebra: self.algebra.clone(),
            coeffs: &self.coeffs - &other.coeffs,
        })
    }

    pub fn scale(&self, c: f64) -> AlgebraVector {
        AlgebraVector {
            algebra: self.algebra.clone(),
            coeffs: &self.coeffs * c,
        }
    }

    pub fn approx_eq(&self, other: &AlgebraVector, tol: f64) -> bool {
        self.algebra.same_algebra(&other.algebra) && (&self.coeffs - &other.coeffs).norm() <= tol
    }

    /// Named nonzero coefficients, for reports.
    pub fn labelled_coeffs(&self, cutoff: f64) -> Vec<(String, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > cutoff)
            .map(|(k, &c)| (self.algebra.labels[k].clone(), c))
            .collect()
    }
}

/// Lie bracket of two elements of the same algebra.
pub fn bracket(x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
    x.bracket(y)
}

/// Ad-invariant inner product `Q(X, Y) = -trace(XY)`.
pub fn inner(x: &AlgebraVector, y: &AlgebraVector) -> Result<f64> {
    x.inner(y)
}

/// The bar involution of the §-basis notation.
pub fn bar_map(x: &AlgebraVector) -> Result<AlgebraVector> {
    x.bar()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_of(alg: &Arc<LieAlgebra>, label: &str) -> AlgebraVector {
        AlgebraVector::from_label(alg, label).unwrap()
    }

    #[test]
    fn su5_has_24_basis_elements() {
        let alg = su_basis(5).unwrap();
        assert_eq!(alg.dim, 24);
        assert_eq!(alg.basis.len(), 24);
    }

    #[test]
    fn su2_basis_enumeration() {
        let alg = su_basis(2).unwrap();
        assert_eq!(alg.dim, 3);
        assert_eq!(alg.labels, vec!["e_12", "f_12", "d_1"]);
        // With a single diagonal difference the orthogonalization pass is a
        // no-op: d_1 = f_11 - f_22 exactly.
        let expected = f_diag_mat(2, 1) - f_diag_mat(2, 2);
        assert!((alg.basis[2].clone() - expected).norm() < 1e-15);
    }

    #[test]
    fn family_dims() {
        assert_eq!(so_basis(5).unwrap().dim, 10);
        assert_eq!(u_basis(3).unwrap().dim, 9);
        assert_eq!(sp_basis(2).unwrap().dim, 10);
    }

    #[test]
    fn rank_below_two_is_rejected() {
        assert!(matches!(su_basis(1), Err(Error::InvalidSpec(_))));
        assert!(matches!(so_basis(0), Err(Error::InvalidSpec(_))));
        assert!(matches!(sp_basis(1), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn su5_basis_is_q_orthogonal() {
        let alg = su_basis(5).unwrap();
        for i in 0..alg.dim {
            for j in 0..alg.dim {
                if i != j {
                    assert!(alg.gram[(i, j)].abs() < 1e-12, "pair ({i}, {j})");
                }
            }
        }
    }

    #[test]
    fn inner_of_e12_is_two() {
        // Oracle: -trace((E12 - E21)^2) = -trace(-E11 - E22) = 2, computed
        // here by direct matrix arithmetic.
        let m = e_mat(5, 1, 2);
        let direct = -(&m * &m).trace().re;
        assert!((direct - 2.0).abs() < 1e-15);

        let alg = su_basis(5).unwrap();
        let x = vec_of(&alg, "e_12");
        assert!((x.inner(&x).unwrap() - direct).abs() < 1e-12);
        let f = vec_of(&alg, "f_12");
        assert!(x.inner(&f).unwrap().abs() < 1e-12);
    }

    #[test]
    fn inner_positive_on_every_basis_element() {
        for alg in [
            su_basis(5).unwrap(),
            so_basis(5).unwrap(),
            u_basis(3).unwrap(),
            sp_basis(2).unwrap(),
        ] {
            for k in 0..alg.dim {
                let x = AlgebraVector::basis_vector(alg.clone(), k);
                assert!(x.inner(&x).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn bracket_e12_e23_is_e13() {
        let alg = su_basis(5).unwrap();
        let x = vec_of(&alg, "e_12");
        let y = vec_of(&alg, "e_23");
        let expected = vec_of(&alg, "e_13");
        assert!(x.bracket(&y).unwrap().approx_eq(&expected, 1e-12));
    }

    #[test]
    fn bracket_is_alternating() {
        let alg = su_basis(5).unwrap();
        let f = vec_of(&alg, "f_12");
        let z = f.bracket(&f).unwrap();
        assert!(z.coeffs().norm() < 1e-14);
    }

    #[test]
    fn bracket_w_e12_is_5_f12() {
        // w = 4 f_11 - f_22 - f_33 - f_44 - f_55 normalizes the isotropy
        // algebra of the SU(5) fixture; [w, e_12] = 5 f_12.
        let alg = su_basis(5).unwrap();
        let w_mat = f_diag_mat(5, 1) * Cx::new(4.0, 0.0)
            - f_diag_mat(5, 2)
            - f_diag_mat(5, 3)
            - f_diag_mat(5, 4)
            - f_diag_mat(5, 5);
        let w = AlgebraVector::from_matrix(&alg, &w_mat).unwrap();
        let e12 = vec_of(&alg, "e_12");
        let expected = vec_of(&alg, "f_12").scale(5.0);
        assert!(w.bracket(&e12).unwrap().approx_eq(&expected, 1e-12));
    }

    #[test]
    fn mismatched_algebras_error() {
        let a = su_basis(5).unwrap();
        let b = su_basis(4).unwrap();
        let x = AlgebraVector::basis_vector(a, 0);
        let y = AlgebraVector::basis_vector(b, 0);
        assert!(matches!(x.bracket(&y), Err(Error::InvalidArgument(_))));
        assert!(matches!(x.inner(&y), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn bar_swaps_e_and_f() {
        let alg = su_basis(5).unwrap();
        let e12 = vec_of(&alg, "e_12");
        let f12 = vec_of(&alg, "f_12");
        assert!(e12.bar().unwrap().approx_eq(&f12, 1e-15));
        assert!(f12.bar().unwrap().approx_eq(&e12.scale(-1.0), 1e-15));
        // bar(bar(X)) = -X
        let x = e12.scale(0.3).add(&f12.scale(-1.7)).unwrap();
        assert!(x.bar().unwrap().bar().unwrap().approx_eq(&x.scale(-1.0), 1e-14));
    }

    #[test]
    fn bar_rejects_diagonal_coordinates() {
        let alg = su_basis(5).unwrap();
        let d = vec_of(&alg, "d_1");
        assert!(matches!(d.bar(), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn bar_is_q_orthogonal() {
        let alg = su_basis(4).unwrap();
        let x = vec_of(&alg, "e_12")
            .scale(1.2)
            .add(&vec_of(&alg, "f_34").scale(-0.5))
            .unwrap();
        let y = vec_of(&alg, "f_13")
            .scale(0.7)
            .add(&vec_of(&alg, "e_24").scale(2.0))
            .unwrap()
            .add(&vec_of(&alg, "e_12").scale(-0.1))
            .unwrap();
        let lhs = x.bar().unwrap().inner(&y.bar().unwrap()).unwrap();
        let rhs = x.inner(&y).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn small_algebras_pass_full_verification() {
        for alg in [
            su_basis(3).unwrap(),
            so_basis(4).unwrap(),
            u_basis(3).unwrap(),
            sp_basis(2).unwrap(),
        ] {
            alg.verify().unwrap();
        }
    }

    #[test]
    fn catalog_algebras_pass_full_verification() {
        for alg in [
            so_basis(5).unwrap(),
            so_basis(6).unwrap(),
            u_basis(4).unwrap(),
            sp_basis(3).unwrap(),
            su_basis(5).unwrap(),
        ] {
            alg.verify().unwrap();
        }
    }

    #[test]
    fn matrix_size_is_capped_at_twelve() {
        assert!(so_basis(12).is_ok());
        assert!(matches!(so_basis(13), Err(Error::InvalidSpec(_))));
        assert!(sp_basis(6).is_ok());
        assert!(matches!(sp_basis(7), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn matrix_round_trip() {
        let alg = sp_basis(2).unwrap();
        let x = AlgebraVector::new(
            alg.clone(),
            DVector::from_fn(alg.dim, |k, _| 0.1 * (k as f64) - 0.4),
        )
        .unwrap();
        let back = AlgebraVector::from_matrix(&alg, &x.to_matrix()).unwrap();
        assert!(back.approx_eq(&x, 1e-12));
    }

    #[test]
    fn non_member_matrix_is_rejected() {
        let alg = su_basis(3).unwrap();
        // A Hermitian (not skew-Hermitian) matrix is outside the span.
        let m = f_mat(3, 1, 2) * Cx::new(0.0, 1.0);
        assert!(AlgebraVector::from_matrix(&alg, &m).is_err());
    }

    #[test]
    fn validate_element_families() {
        let su = su_basis(3).unwrap();
        su.validate_element(&e_mat(3, 1, 2), 1e-12).unwrap();
        assert!(su.validate_element(&f_diag_mat(3, 1), 1e-12).is_err());

        let sp = sp_basis(2).unwrap();
        for b in &sp.basis {
            sp.validate_element(b, 1e-12).unwrap();
        }
    }

    #[test]
    fn killing_scale_metadata() {
        assert_eq!(su_basis(5).unwrap().killing_scale, Some(10.0));
        assert_eq!(so_basis(5).unwrap().killing_scale, Some(3.0));
        assert_eq!(sp_basis(2).unwrap().killing_scale, Some(6.0));
        assert_eq!(u_basis(3).unwrap().killing_scale, None);
    }
}
