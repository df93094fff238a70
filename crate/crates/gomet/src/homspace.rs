//! Homogeneous-space data for `G/H`: the embedded isotropy subalgebra `h`,
//! its Q-orthogonal complement `m`, the normalizer of `h`, the `n ⊕ p`
//! split, and the decomposition of `m` into ad(h)-invariant summands.
//!
//! Isotropy blocks occupy the trailing coordinates (rows/columns
//! `n - sum(blocks) + 1 .. n`), so the leading coordinates are "free". All
//! outputs are immutable; operations are pure functions of their inputs.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::Error;
use crate::liealg::{e_mat, f_diag_mat, f_mat, AlgebraVector, Family, LieAlgebra, MatrixElement};
use crate::linalg;
use crate::Result;

/// Specification of a coset space `G/H` with block-diagonal isotropy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpaceSpec {
    pub family: Family,
    pub n: usize,
    /// Isotropy block sizes `n_1 .. n_s`.
    pub blocks: Vec<usize>,
    /// Apply the trace-zero / `S(...)` constraint to `h`.
    pub det_one: bool,
}

impl SpaceSpec {
    pub fn new(family: Family, n: usize, blocks: Vec<usize>, det_one: bool) -> Result<Self> {
        let spec = SpaceSpec {
            family,
            n,
            blocks,
            det_one,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::InvalidSpec(
                "at least one isotropy block is required (the coset would be the group itself)"
                    .into(),
            ));
        }
        if self.blocks.contains(&0) {
            return Err(Error::InvalidSpec("blocks must be positive".into()));
        }
        let total: usize = self.blocks.iter().sum();
        if total > self.n {
            return Err(Error::InvalidSpec(format!(
                "blocks sum to {total} > n = {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Hypothesis flags that do not invalidate the spec but mark it as
    /// outside the scope of the classification statements (so blocks of
    /// size 1).
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.family == Family::So && self.blocks.iter().any(|&b| b < 2) {
            w.push("so blocks of size 1 are outside the n_j > 1 hypothesis".into());
        }
        w
    }

    /// Coordinate sets (1-based) occupied by each block, trailing placement.
    pub fn block_coords(&self) -> Vec<Vec<usize>> {
        let total: usize = self.blocks.iter().sum();
        let mut start = self.n - total + 1;
        let mut out = Vec::new();
        for &b in &self.blocks {
            out.push((start..start + b).collect());
            start += b;
        }
        out
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self
            .blocks
            .iter()
            .map(|&b| match self.family {
                Family::So => format!("SO({b})"),
                Family::Sp => format!("Sp({b})"),
                Family::U => format!("U({b})"),
                Family::Su => {
                    if self.det_one {
                        format!("U({b})")
                    } else {
                        format!("SU({b})")
                    }
                }
            })
            .collect();
        let h = blocks.join("x");
        let h = if self.det_one && matches!(self.family, Family::Su | Family::U) {
            format!("S({h})")
        } else {
            h
        };
        write!(f, "{}/{}", self.family.group_name(self.n), h)
    }
}

/// `g = h ⊕ m` with Q-orthonormal bases for both factors and the
/// corresponding projections on coefficient vectors.
pub struct HomogeneousSpace {
    pub spec: SpaceSpec,
    pub g: Arc<LieAlgebra>,
    pub h_basis: Vec<AlgebraVector>,
    pub m_basis: Vec<AlgebraVector>,
    /// Q-orthogonal projection onto `h` in coefficient coordinates.
    pub proj_h: DMatrix<f64>,
    /// Q-orthogonal projection onto `m` in coefficient coordinates.
    pub proj_m: DMatrix<f64>,
    to_m: DMatrix<f64>,
    from_m: DMatrix<f64>,
}

impl fmt::Debug for HomogeneousSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "HomogeneousSpace({}, dim h = {}, dim m = {})",
            self.spec,
            self.dim_h(),
            self.dim_m()
        )
    }
}

impl HomogeneousSpace {
    pub fn dim_h(&self) -> usize {
        self.h_basis.len()
    }

    pub fn dim_m(&self) -> usize {
        self.m_basis.len()
    }

    /// Coordinates of (the m-component of) a vector in the orthonormal
    /// m-basis.
    pub fn to_m_coords(&self, v: &AlgebraVector) -> DVector<f64> {
        &self.to_m * v.coeffs()
    }

    pub fn from_m_coords(&self, coords: &DVector<f64>) -> AlgebraVector {
        AlgebraVector::new(self.g.clone(), &self.from_m * coords).expect("dimension fixed")
    }

    pub fn project_h(&self, v: &AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(self.g.clone(), &self.proj_h * v.coeffs()).expect("dimension fixed")
    }

    pub fn project_m(&self, v: &AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(self.g.clone(), &self.proj_m * v.coeffs()).expect("dimension fixed")
    }

    /// Matrix of `ad(z)|_m : m -> m` in orthonormal m-coordinates. Exact for
    /// `z ∈ h` (where `[h, m] ⊆ m`); for general `z` this is the compressed
    /// operator `proj_m ∘ ad(z)`.
    pub fn ad_on_m(&self, z: &AlgebraVector) -> Result<DMatrix<f64>> {
        let dm = self.dim_m();
        let mut op = DMatrix::zeros(dm, dm);
        for (q, mq) in self.m_basis.iter().enumerate() {
            let br = z.bracket(mq)?;
            op.set_column(q, &self.to_m_coords(&br));
        }
        Ok(op)
    }

    /// `ad(h_i)|_m` for every element of the h-basis.
    pub fn ad_h_ops(&self) -> Result<Vec<DMatrix<f64>>> {
        self.h_basis.iter().map(|a| self.ad_on_m(a)).collect()
    }

    /// Verifies the reductive-decomposition invariants at tolerance.
    pub fn verify(&self) -> Result<()> {
        let tol = self.g.tol;
        if self.dim_h() + self.dim_m() != self.g.dim {
            return Err(Error::Numerical("dim h + dim m != dim g".into()));
        }
        for hi in &self.h_basis {
            for mj in &self.m_basis {
                let q = hi.inner(mj)?;
                if q.abs() > 1e-10 {
                    return Err(Error::Numerical(format!(
                        "h and m are not Q-orthogonal: Q = {q:.3e}"
                    )));
                }
            }
        }
        for (i, hi) in self.h_basis.iter().enumerate() {
            for hj in &self.h_basis[i..] {
                let br = hi.bracket(hj)?;
                let off = self.project_m(&br).q_norm();
                if !tol.within(off, br.q_norm().max(1.0)) {
                    return Err(Error::Numerical(
                        "h is not closed under the bracket".into(),
                    ));
                }
            }
            for mj in &self.m_basis {
                let br = hi.bracket(mj)?;
                let off = self.project_h(&br).q_norm();
                if !tol.within(off, br.q_norm().max(1.0)) {
                    return Err(Error::Numerical("[h, m] is not contained in m".into()));
                }
            }
        }
        Ok(())
    }
}

fn su_like_block_generators(spec: &SpaceSpec, size: usize) -> Vec<MatrixElement> {
    // Off-diagonal generators inside each block, plus diagonal combinations:
    // per-block differences for a product of special blocks, differences
    // across the whole union for the S(...) constraint, and all f_aa for
    // plain u blocks.
    let mut gens = Vec::new();
    let coords = spec.block_coords();
    for block in &coords {
        for (i, &a) in block.iter().enumerate() {
            for &b in &block[i + 1..] {
                gens.push(e_mat(size, a, b));
                gens.push(f_mat(size, a, b));
            }
        }
    }
    let union: Vec<usize> = coords.iter().flatten().copied().collect();
    match (spec.family, spec.det_one) {
        (Family::U, false) => {
            for &a in &union {
                gens.push(f_diag_mat(size, a));
            }
        }
        (Family::U, true) | (Family::Su, true) => {
            for w in union.windows(2) {
                gens.push(f_diag_mat(size, w[0]) - f_diag_mat(size, w[1]));
            }
        }
        (Family::Su, false) => {
            for block in &coords {
                for w in block.windows(2) {
                    gens.push(f_diag_mat(size, w[0]) - f_diag_mat(size, w[1]));
                }
            }
        }
        _ => unreachable!(),
    }
    gens
}

fn sp_block_generators(spec: &SpaceSpec, n: usize) -> Vec<MatrixElement> {
    // sp(n_j) acting on the block's quaternionic coordinates: A-part entries
    // and symmetric B-part entries supported on block x block.
    let mut gens = Vec::new();
    let size = 2 * n;
    let unit = |a: usize, b: usize| -> MatrixElement {
        let mut m = DMatrix::from_element(size, size, nalgebra::Complex::new(0.0, 0.0));
        m[(a - 1, b - 1)] = nalgebra::Complex::new(1.0, 0.0);
        m
    };
    let i = nalgebra::Complex::new(0.0, 1.0);
    let a_part = |block: &MatrixElement| -> MatrixElement {
        let mut m = DMatrix::from_element(size, size, nalgebra::Complex::new(0.0, 0.0));
        let top = block.view((0, 0), (n, n)).into_owned();
        m.view_mut((0, 0), (n, n)).copy_from(&top);
        m.view_mut((n, n), (n, n)).copy_from(&top.map(|z| z.conj()));
        m
    };
    let b_part = |block: &MatrixElement| -> MatrixElement {
        let mut m = DMatrix::from_element(size, size, nalgebra::Complex::new(0.0, 0.0));
        let top = block.view((0, 0), (n, n)).into_owned();
        m.view_mut((0, n), (n, n)).copy_from(&top);
        m.view_mut((n, 0), (n, n)).copy_from(&top.map(|z| -z.conj()));
        m
    };
    for block in spec.block_coords() {
        for (idx, &a) in block.iter().enumerate() {
            for &b in &block[idx + 1..] {
                gens.push(a_part(&(unit(a, b) - unit(b, a))));
                gens.push(a_part(&((unit(a, b) + unit(b, a)) * i)));
            }
        }
        for &a in &block {
            gens.push(a_part(&(unit(a, a) * i)));
        }
        for (idx, &a) in block.iter().enumerate() {
            for &b in block[idx..].iter() {
                let s = if a == b {
                    unit(a, a)
                } else {
                    unit(a, b) + unit(b, a)
                };
                gens.push(b_part(&s));
                gens.push(b_part(&(s * i)));
            }
        }
    }
    gens
}

/// Builds the homogeneous space for a [`SpaceSpec`]: embeds `h`
/// block-diagonally in the trailing coordinates, takes `m` as the
/// Q-orthogonal complement, and prepares the projection maps.
pub fn build_space(spec: &SpaceSpec) -> Result<HomogeneousSpace> {
    build_space_with(spec, Tolerances::default())
}

pub fn build_space_with(spec: &SpaceSpec, tol: Tolerances) -> Result<HomogeneousSpace> {
    spec.validate()?;
    let g = LieAlgebra::new(spec.family, spec.n, tol)?;
    let size = spec.family.matrix_size(spec.n);

    let generators = match spec.family {
        Family::So => {
            let mut gens = Vec::new();
            for block in spec.block_coords() {
                for (i, &a) in block.iter().enumerate() {
                    for &b in &block[i + 1..] {
                        gens.push(e_mat(size, a, b));
                    }
                }
            }
            gens
        }
        Family::U | Family::Su => su_like_block_generators(spec, size),
        Family::Sp => sp_block_generators(spec, spec.n),
    };

    let gram_diag = DVector::from_fn(g.dim, |k, _| g.gram[(k, k)]);
    let h_raw: Vec<DVector<f64>> = generators
        .iter()
        .map(|m| AlgebraVector::from_matrix(&g, m).map(|v| v.coeffs().clone()))
        .collect::<Result<_>>()?;
    let h_ortho = linalg::gram_schmidt_weighted(&h_raw, &gram_diag, 1e-10);
    let h_basis: Vec<AlgebraVector> = h_ortho
        .iter()
        .map(|c| AlgebraVector::new(g.clone(), c.clone()).expect("dim"))
        .collect();

    // Complement of h in g, preferring pure basis directions: feed the
    // coordinate axes through a Gram–Schmidt pass against h.
    let mut candidates: Vec<DVector<f64>> = h_ortho.clone();
    for k in 0..g.dim {
        let mut e = DVector::zeros(g.dim);
        e[k] = 1.0;
        candidates.push(e);
    }
    let full = linalg::gram_schmidt_weighted(&candidates, &gram_diag, 1e-10);
    let m_ortho: Vec<DVector<f64>> = full[h_ortho.len()..].to_vec();
    if h_ortho.len() + m_ortho.len() != g.dim {
        return Err(Error::Numerical(format!(
            "h ⊕ m does not exhaust g: {} + {} != {}",
            h_ortho.len(),
            m_ortho.len(),
            g.dim
        )));
    }
    let m_basis: Vec<AlgebraVector> = m_ortho
        .iter()
        .map(|c| AlgebraVector::new(g.clone(), c.clone()).expect("dim"))
        .collect();

    // For Q-orthonormal columns B (in coefficients), the Q-projection is
    // B Bᵀ G with G the diagonal Gram matrix.
    let dim = g.dim;
    let gmat = DMatrix::from_fn(dim, dim, |r, c| if r == c { gram_diag[r] } else { 0.0 });
    let h_cols = DMatrix::from_fn(dim, h_ortho.len(), |r, c| h_ortho[c][r]);
    let m_cols = DMatrix::from_fn(dim, m_ortho.len(), |r, c| m_ortho[c][r]);
    let proj_h = &h_cols * h_cols.transpose() * &gmat;
    let proj_m = &m_cols * m_cols.transpose() * &gmat;
    let to_m = m_cols.transpose() * &gmat;
    let from_m = m_cols;

    let space = HomogeneousSpace {
        spec: spec.clone(),
        g,
        h_basis,
        m_basis,
        proj_h,
        proj_m,
        to_m,
        from_m,
    };
    space.verify()?;
    Ok(space)
}

/// Basis of the normalizer `n_g(h) = {x ∈ g : [x, h] ⊆ h}`, computed as the
/// kernel of `x ↦ (proj_m [x, h_i])_i`. The first `dim h` entries are the
/// h-basis itself.
pub fn normalizer(space: &HomogeneousSpace) -> Result<Vec<AlgebraVector>> {
    let dim = space.g.dim;
    let dm = space.dim_m();
    let dh = space.dim_h();
    let mut stacked = DMatrix::zeros(dh * dm, dim);
    for (i, hi) in space.h_basis.iter().enumerate() {
        for p in 0..dim {
            let bp = AlgebraVector::basis_vector(space.g.clone(), p);
            let br = bp.bracket(hi)?;
            let col = space.to_m_coords(&br);
            for q in 0..dm {
                stacked[(i * dm + q, p)] = col[q];
            }
        }
    }
    let kernel = linalg::nullspace(&stacked, space.g.tol.svd_cutoff);

    // h is always contained in the kernel; return h first, then the
    // Q-orthonormalized complement within the kernel.
    let gram_diag = DVector::from_fn(dim, |k, _| space.g.gram[(k, k)]);
    let mut ordered: Vec<DVector<f64>> =
        space.h_basis.iter().map(|h| h.coeffs().clone()).collect();
    ordered.extend(kernel.iter().cloned());
    let ortho = linalg::gram_schmidt_weighted(&ordered, &gram_diag, 1e-8);
    if ortho.len() < dh {
        return Err(Error::Numerical(
            "normalizer kernel does not contain h".into(),
        ));
    }
    Ok(ortho
        .into_iter()
        .map(|c| AlgebraVector::new(space.g.clone(), c).expect("dim"))
        .collect())
}

/// The Q-orthogonal split `m = n ⊕ p`: `n` is the m-part of the normalizer
/// (the Lie algebra of `N_G(H⁰)/H⁰`), `p` its complement in `m`.
pub struct ReductiveSplit {
    pub n_basis: Vec<AlgebraVector>,
    pub p_basis: Vec<AlgebraVector>,
    /// Orthonormal n-columns in m-coordinates (dim m x dim n).
    pub n_coords: DMatrix<f64>,
    /// Orthonormal p-columns in m-coordinates (dim m x dim p).
    pub p_coords: DMatrix<f64>,
}

impl ReductiveSplit {
    pub fn dim_n(&self) -> usize {
        self.n_basis.len()
    }

    pub fn dim_p(&self) -> usize {
        self.p_basis.len()
    }
}

pub fn reductive_split(
    space: &HomogeneousSpace,
    normalizer_basis: &[AlgebraVector],
) -> Result<ReductiveSplit> {
    let dm = space.dim_m();
    let mut n_candidates: Vec<DVector<f64>> = Vec::new();
    for v in normalizer_basis {
        n_candidates.push(space.to_m_coords(v));
    }
    let n_ortho = linalg::gram_schmidt(&n_candidates, 1e-8);

    let mut all = n_ortho.clone();
    for q in 0..dm {
        let mut e = DVector::zeros(dm);
        e[q] = 1.0;
        all.push(e);
    }
    let full = linalg::gram_schmidt(&all, 1e-10);
    let p_ortho = full[n_ortho.len()..].to_vec();
    if n_ortho.len() + p_ortho.len() != dm {
        return Err(Error::Numerical("n ⊕ p does not exhaust m".into()));
    }

    let n_coords = DMatrix::from_fn(dm, n_ortho.len(), |r, c| n_ortho[c][r]);
    let p_coords = DMatrix::from_fn(dm, p_ortho.len(), |r, c| p_ortho[c][r]);
    let n_basis = n_ortho.iter().map(|c| space.from_m_coords(c)).collect();
    let p_basis = p_ortho.iter().map(|c| space.from_m_coords(c)).collect();
    Ok(ReductiveSplit {
        n_basis,
        p_basis,
        n_coords,
        p_coords,
    })
}

/// An ad-invariant summand of `m`.
pub struct Summand {
    pub basis: Vec<AlgebraVector>,
    /// Orthonormal columns in m-coordinates (dim m x dim).
    pub coords: DMatrix<f64>,
    pub dim: usize,
    /// Equivalence class of the summand as an h-module; equal ids mean a
    /// nonzero intertwiner exists.
    pub class_id: usize,
    /// Whether the summand lies inside `n` (the Lie algebra of N/H⁰).
    pub in_n: bool,
}

impl Summand {
    pub fn projector(&self) -> DMatrix<f64> {
        &self.coords * self.coords.transpose()
    }
}

/// Decomposition of `m` into ad(h)-invariant summands, together with the
/// analogous decomposition under the full normalizer action (the two can
/// differ on the trivial part; both are recorded).
pub struct ModuleDecomposition {
    pub summands: Vec<Summand>,
    pub n_dim: usize,
    /// Summands of `m` under `ad(n_g(h))` rather than `ad(h)`.
    pub normalizer_summands: Vec<Summand>,
}

impl ModuleDecomposition {
    pub fn dims(&self) -> Vec<usize> {
        self.summands.iter().map(|s| s.dim).collect()
    }

    pub fn class_ids(&self) -> Vec<usize> {
        self.summands.iter().map(|s| s.class_id).collect()
    }
}

/// Splits an invariant subspace (orthonormal columns `sub`) under the given
/// skew operators by eigen-decomposing random elements of the symmetric
/// commutant, refining recursively until the commutant of each piece is
/// trivial.
fn invariant_split(
    ops: &[DMatrix<f64>],
    sub: DMatrix<f64>,
    rng: &mut ChaCha8Rng,
    tol: &Tolerances,
) -> Result<Vec<DMatrix<f64>>> {
    let d = sub.ncols();
    if d == 0 {
        return Ok(Vec::new());
    }
    let restricted: Vec<DMatrix<f64>> = ops
        .iter()
        .map(|op| sub.transpose() * op * &sub)
        .collect();
    for (op, r) in ops.iter().zip(&restricted) {
        let err = (op * &sub - &sub * r).norm();
        if err > 1e-8 * op.norm().max(1.0) {
            return Err(Error::Decomposition(format!(
                "subspace is not invariant under the generator set (residual {err:.3e})"
            )));
        }
    }

    let kernel = sym_commutant_kernel(&restricted, tol);
    if kernel.len() <= 1 {
        return Ok(vec![sub]);
    }

    // A generic symmetric commutant element has eigenspaces that refine the
    // invariant structure; a degenerate draw is retried.
    for _attempt in 0..4 {
        let mut s = DMatrix::zeros(d, d);
        for k in &kernel {
            let gamma: f64 = rng.sample(StandardNormal);
            s += k * gamma;
        }
        let s = (&s + s.transpose()) * 0.5;
        let scale = s.norm().max(1e-12);
        let (eigenvalues, eigenvectors) = linalg::sym_eigen(&(s / scale));
        let values: Vec<f64> = eigenvalues.iter().copied().collect();
        let clusters = match linalg::cluster_eigenvalues(&values, tol.cluster) {
            Ok(c) => c,
            Err((gap, _)) => {
                return Err(Error::Decomposition(format!(
                    "eigenvalue clusters unresolvable at tolerance {:.1e}: offending gap {gap:.3e}",
                    tol.cluster
                )))
            }
        };
        if clusters.len() <= 1 {
            continue; // degenerate sample, retry
        }
        let mut pieces = Vec::new();
        for cluster in clusters {
            let cols = DMatrix::from_fn(d, cluster.len(), |r, c| {
                eigenvectors[(r, cluster[c])]
            });
            let lifted = &sub * cols;
            pieces.extend(invariant_split(ops, lifted, rng, tol)?);
        }
        return Ok(pieces);
    }
    Err(Error::Decomposition(
        "commutant sampling failed to split a reducible subspace after 4 attempts".into(),
    ))
}

/// Basis of symmetric matrices commuting with every operator in `ops`.
pub(crate) fn sym_commutant_kernel(
    ops: &[DMatrix<f64>],
    tol: &Tolerances,
) -> Vec<DMatrix<f64>> {
    let d = ops.first().map(|o| o.nrows()).unwrap_or(0);
    if d == 0 {
        return Vec::new();
    }
    // Unknowns: upper triangle (p <= q) of a symmetric S; equations:
    // (S R - R S)_{uv} = 0 for every generator R.
    let unknowns: Vec<(usize, usize)> = (0..d)
        .flat_map(|p| (p..d).map(move |q| (p, q)))
        .collect();
    let ncols = unknowns.len();
    if ops.is_empty() {
        return unknowns
            .iter()
            .map(|&(p, q)| sym_basis_mat(d, p, q))
            .collect();
    }
    let mut rows = DMatrix::zeros(ops.len() * d * d, ncols);
    for (t, r) in ops.iter().enumerate() {
        for (col, &(p, q)) in unknowns.iter().enumerate() {
            for u in 0..d {
                for v in 0..d {
                    let mut val = 0.0;
                    // (S R)_{uv} with S supported at (p,q) and (q,p).
                    if u == p {
                        val += r[(q, v)];
                    }
                    if u == q && p != q {
                        val += r[(p, v)];
                    }
                    // -(R S)_{uv}
                    if v == p {
                        val -= r[(u, q)];
                    }
                    if v == q && p != q {
                        val -= r[(u, p)];
                    }
                    if val != 0.0 {
                        rows[(t * d * d + u * d + v, col)] = val;
                    }
                }
            }
        }
    }
    linalg::nullspace(&rows, tol.svd_cutoff)
        .into_iter()
        .map(|vec| {
            let mut s = DMatrix::zeros(d, d);
            for (col, &(p, q)) in unknowns.iter().enumerate() {
                s[(p, q)] = vec[col];
                s[(q, p)] = vec[col];
            }
            s
        })
        .collect()
}

fn sym_basis_mat(d: usize, p: usize, q: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(d, d);
    s[(p, q)] = 1.0;
    s[(q, p)] = 1.0;
    s
}

/// Dimension of the intertwiner space `Hom_h(S_i, S_j)`: maps `T` with
/// `T ad(a)|_{S_i} = ad(a)|_{S_j} T` for every generator.
fn intertwiner_dim(
    ops: &[DMatrix<f64>],
    si: &DMatrix<f64>,
    sj: &DMatrix<f64>,
    tol: &Tolerances,
) -> usize {
    let di = si.ncols();
    let dj = sj.ncols();
    if di == 0 || dj == 0 {
        return 0;
    }
    let mut rows = DMatrix::zeros(ops.len() * dj * di, dj * di);
    for (t, op) in ops.iter().enumerate() {
        let a_i = si.transpose() * op * si; // di x di
        let a_j = sj.transpose() * op * sj; // dj x dj
        // T a_i - a_j T = 0, unknowns T (dj x di) flattened row-major.
        for u in 0..dj {
            for v in 0..di {
                let row = t * dj * di + u * di + v;
                for w in 0..di {
                    rows[(row, u * di + w)] += a_i[(w, v)];
                }
                for w in 0..dj {
                    rows[(row, w * di + v)] -= a_j[(u, w)];
                }
            }
        }
    }
    linalg::nullspace(&rows, tol.svd_cutoff.max(1e-8)).len()
}

fn build_summands(
    space: &HomogeneousSpace,
    split: &ReductiveSplit,
    ops: &[DMatrix<f64>],
    seed: u64,
) -> Result<Vec<Summand>> {
    let tol = &space.g.tol;
    let dm = space.dim_m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let identity = DMatrix::identity(dm, dm);
    let pieces = invariant_split(ops, identity, &mut rng, tol)?;

    // in_n flags: each piece must lie entirely inside n or p.
    let mut summands = Vec::new();
    for coords in pieces {
        let d = coords.ncols();
        let in_n_norm = (split.n_coords.transpose() * &coords).norm();
        let in_p_norm = (split.p_coords.transpose() * &coords).norm();
        let in_n = if in_n_norm < 1e-8 {
            false
        } else if in_p_norm < 1e-8 {
            true
        } else {
            return Err(Error::Decomposition(
                "a summand straddles the n ⊕ p split".into(),
            ));
        };
        let basis = (0..d)
            .map(|c| space.from_m_coords(&coords.column(c).into_owned()))
            .collect();
        summands.push(Summand {
            basis,
            coords,
            dim: d,
            class_id: 0,
            in_n,
        });
    }

    // Deterministic ordering: n-summands first, then by dimension, then by
    // the first m-coordinate the summand touches.
    let first_touch = |s: &Summand| -> usize {
        for q in 0..dm {
            let row_norm: f64 = (0..s.dim).map(|c| s.coords[(q, c)].powi(2)).sum();
            if row_norm > 1e-6 {
                return q;
            }
        }
        dm
    };
    summands.sort_by_key(|s| (!s.in_n, s.dim, first_touch(s)));

    // Equivalence classes via intertwiner dimensions.
    let k = summands.len();
    let mut class = (0..k).collect::<Vec<usize>>();
    for i in 0..k {
        for j in (i + 1)..k {
            if summands[i].dim != summands[j].dim {
                continue;
            }
            if intertwiner_dim(ops, &summands[i].coords, &summands[j].coords, tol) > 0 {
                let (ci, cj) = (class[i], class[j]);
                let target = ci.min(cj);
                for c in class.iter_mut() {
                    if *c == ci || *c == cj {
                        *c = target;
                    }
                }
            }
        }
    }
    // Renumber classes consecutively.
    let mut canonical = Vec::new();
    for (i, s) in summands.iter_mut().enumerate() {
        let c = class[i];
        let id = match canonical.iter().position(|&x| x == c) {
            Some(p) => p,
            None => {
                canonical.push(c);
                canonical.len() - 1
            }
        };
        s.class_id = id;
    }
    Ok(summands)
}

/// Splits `m` into ad(h)-invariant summands via random elements of the
/// symmetric commutant, assigns equivalence classes by intertwiner-space
/// dimension, and flags the summands spanning `n`. The analogous split under
/// the full normalizer action is recorded alongside.
pub fn isotypic_decompose(space: &HomogeneousSpace, seed: u64) -> Result<ModuleDecomposition> {
    let norm_basis = normalizer(space)?;
    let split = reductive_split(space, &norm_basis)?;
    isotypic_decompose_with(space, &norm_basis, &split, seed)
}

pub fn isotypic_decompose_with(
    space: &HomogeneousSpace,
    normalizer_basis: &[AlgebraVector],
    split: &ReductiveSplit,
    seed: u64,
) -> Result<ModuleDecomposition> {
    let h_ops = space.ad_h_ops()?;
    let summands = build_summands(space, split, &h_ops, seed)?;

    let mut norm_ops = h_ops.clone();
    for z in normalizer_basis.iter().skip(space.dim_h()) {
        norm_ops.push(space.ad_on_m(z)?);
    }
    let normalizer_summands = build_summands(space, split, &norm_ops, seed ^ 0x9e37_79b9)?;

    Ok(ModuleDecomposition {
        summands,
        n_dim: split.dim_n(),
        normalizer_summands,
    })
}

/// Splits an ad(h)-invariant subspace of `m` (orthonormal columns in
/// m-coordinates) into irreducible pieces. A summand produced by
/// [`isotypic_decompose`] comes back unchanged (refinement idempotence).
pub fn split_subspace(
    space: &HomogeneousSpace,
    coords: &DMatrix<f64>,
    seed: u64,
) -> Result<Vec<DMatrix<f64>>> {
    let ops = space.ad_h_ops()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    invariant_split(&ops, coords.clone(), &mut rng, &space.g.tol)
}

/// The desk-scale catalog exercised by the acceptance suite.
pub fn catalog() -> Vec<SpaceSpec> {
    vec![
        SpaceSpec::new(Family::So, 5, vec![2, 2], false).unwrap(),
        SpaceSpec::new(Family::So, 6, vec![2, 3], false).unwrap(),
        SpaceSpec::new(Family::U, 3, vec![2], false).unwrap(),
        SpaceSpec::new(Family::U, 4, vec![2, 2], false).unwrap(),
        SpaceSpec::new(Family::Sp, 2, vec![1], false).unwrap(),
        SpaceSpec::new(Family::Sp, 3, vec![1, 1], false).unwrap(),
        SpaceSpec::new(Family::Su, 5, vec![2, 2], true).unwrap(),
    ]
}

/// The SU(5)/S(U(2)xU(2)) fixture spec.
pub fn su5_fixture_spec() -> SpaceSpec {
    SpaceSpec::new(Family::Su, 5, vec![2, 2], true).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::Cx;

    #[test]
    fn su5_fixture_dims() {
        let space = build_space(&su5_fixture_spec()).unwrap();
        assert_eq!(space.dim_h(), 7);
        assert_eq!(space.dim_m(), 17);
    }

    #[test]
    fn so5_dims() {
        let spec = SpaceSpec::new(Family::So, 5, vec![2, 2], false).unwrap();
        let space = build_space(&spec).unwrap();
        assert_eq!(space.dim_h(), 2);
        assert_eq!(space.dim_m(), 8);
    }

    #[test]
    fn sp2_dims() {
        let spec = SpaceSpec::new(Family::Sp, 2, vec![1], false).unwrap();
        let space = build_space(&spec).unwrap();
        assert_eq!(space.dim_h(), 3);
        assert_eq!(space.dim_m(), 7);
    }

    #[test]
    fn oversized_blocks_are_rejected() {
        assert!(matches!(
            SpaceSpec::new(Family::Sp, 2, vec![3], false),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            SpaceSpec::new(Family::Su, 5, vec![], true),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn su5_fixture_h_contains_v() {
        let space = build_space(&su5_fixture_spec()).unwrap();
        let v_mat = f_diag_mat(5, 2) + f_diag_mat(5, 3) - f_diag_mat(5, 4) - f_diag_mat(5, 5);
        let v = AlgebraVector::from_matrix(&space.g, &v_mat).unwrap();
        let residual = space.project_m(&v).q_norm();
        assert!(residual < 1e-12, "v is not in h (residual {residual:.3e})");
    }

    #[test]
    fn su5_normalizer_is_h_plus_w() {
        let space = build_space(&su5_fixture_spec()).unwrap();
        let norm = normalizer(&space).unwrap();
        assert_eq!(norm.len(), 8);
        let w_mat = f_diag_mat(5, 1) * Cx::new(4.0, 0.0)
            - f_diag_mat(5, 2)
            - f_diag_mat(5, 3)
            - f_diag_mat(5, 4)
            - f_diag_mat(5, 5);
        let w = AlgebraVector::from_matrix(&space.g, &w_mat).unwrap();
        // w must lie in the normalizer span: project away every basis vector.
        let mut r = w.clone();
        for b in &norm {
            let c = r.inner(b).unwrap();
            r = r.sub(&b.scale(c)).unwrap();
        }
        assert!(r.q_norm() < 1e-10 * w.q_norm());
    }

    #[test]
    fn normalizer_contains_h_and_is_bracket_closed() {
        for spec in [
            SpaceSpec::new(Family::So, 5, vec![2, 2], false).unwrap(),
            SpaceSpec::new(Family::U, 3, vec![2], false).unwrap(),
            SpaceSpec::new(Family::Sp, 2, vec![1], false).unwrap(),
        ] {
            let space = build_space(&spec).unwrap();
            let norm = normalizer(&space).unwrap();
            assert!(norm.len() >= space.dim_h());
            for (i, a) in norm.iter().enumerate() {
                for b in &norm[i..] {
                    let br = a.bracket(b).unwrap();
                    let mut r = br.clone();
                    for v in &norm {
                        let c = r.inner(v).unwrap();
                        r = r.sub(&v.scale(c)).unwrap();
                    }
                    assert!(
                        r.q_norm() < 1e-9 * br.q_norm().max(1.0),
                        "normalizer not bracket-closed for {spec}"
                    );
                }
            }
        }
    }

    #[test]
    fn so5_normalizer_dim_matches_raw_matrix_kernel() {
        // Independent rank oracle: build the condition [x, h] in h from raw
        // matrix commutators and trace projections, and extract the kernel
        // dimension without the structure tensor or projection machinery.
        let spec = SpaceSpec::new(Family::So, 5, vec![2, 2], false).unwrap();
        let space = build_space(&spec).unwrap();

        let h_mats = [e_mat(5, 2, 3), e_mat(5, 4, 5)];
        let mut basis_mats = Vec::new();
        for a in 1..=5usize {
            for b in (a + 1)..=5 {
                basis_mats.push(e_mat(5, a, b));
            }
        }
        let trace_inner = |x: &MatrixElement, y: &MatrixElement| crate::liealg::q_inner_mat(x, y);
        // Rows: entries of [x, h_i] minus its h-projection, for x = each
        // basis element.
        let mut rows = DMatrix::<f64>::zeros(2 * 50, basis_mats.len());
        for (p, bp) in basis_mats.iter().enumerate() {
            for (i, hi) in h_mats.iter().enumerate() {
                let mut br = bp * hi - hi * bp;
                for hm in &h_mats {
                    let c = trace_inner(&br, hm) / trace_inner(hm, hm);
                    br -= hm * crate::liealg::Cx::new(c, 0.0);
                }
                for (e, z) in br.iter().enumerate() {
                    rows[(i * 50 + 2 * e, p)] = z.re;
                    rows[(i * 50 + 2 * e + 1, p)] = z.im;
                }
            }
        }
        let kernel = linalg::nullspace(&rows, 1e-10);
        let norm = normalizer(&space).unwrap();
        assert_eq!(kernel.len(), norm.len());
        assert_eq!(kernel.len(), 2);
    }

    #[test]
    fn u3_u2_has_one_dimensional_n() {
        let spec = SpaceSpec::new(Family::U, 3, vec![2], false).unwrap();
        let space = build_space(&spec).unwrap();
        let norm = normalizer(&space).unwrap();
        let split = reductive_split(&space, &norm).unwrap();
        assert_eq!(split.dim_n(), 1);
        assert_eq!(split.dim_p(), 4);
    }

    #[test]
    fn su5_split_dims() {
        let space = build_space(&su5_fixture_spec()).unwrap();
        let norm = normalizer(&space).unwrap();
        let split = reductive_split(&space, &norm).unwrap();
        assert_eq!(split.dim_n(), 1);
        assert_eq!(split.dim_p(), 16);
        for nv in &split.n_basis {
            for pv in &split.p_basis {
                assert!(nv.inner(pv).unwrap().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn normalizer_equals_h_gives_trivial_n() {
        let spec = SpaceSpec::new(Family::So, 5, vec![2, 2], false).unwrap();
        let space = build_space(&spec).unwrap();
        let norm = normalizer(&space).unwrap();
        assert_eq!(norm.len(), space.dim_h());
        let split = reductive_split(&space, &norm).unwrap();
        assert_eq!(split.dim_n(), 0);
        assert_eq!(split.dim_p(), space.dim_m());
    }

    #[test]
    fn su5_isotypic_dims_and_classes() {
        let space = build_space(&su5_fixture_spec()).unwrap();
        let decomp = isotypic_decompose(&space, 7).unwrap();
        assert_eq!(decomp.dims(), vec![1, 4, 4, 8]);
        let ids = decomp.class_ids();
        let mut unique = ids.clone();
        unique.dedup();
        assert_eq!(unique.len(), 4, "classes must be pairwise distinct: {ids:?}");
        assert_eq!(decomp.n_dim, 1);
        let total: usize = decomp.dims().iter().sum();
        assert_eq!(total, space.dim_m());
    }

    #[test]
    fn su5_summands_are_invariant() {
        let space = build_space(&su5_fixture_spec()).unwrap();
        let decomp = isotypic_decompose(&space, 7).unwrap();
        for s in &decomp.summands {
            let proj = s.projector();
            for a in &space.h_basis {
                for x in &s.basis {
                    let br = a.bracket(x).unwrap();
                    let coords = space.to_m_coords(&br);
                    let outside = (&coords - &proj * &coords).norm();
                    assert!(
                        outside < 1e-9 * coords.norm().max(1.0),
                        "summand is not ad(h)-invariant"
                    );
                }
            }
        }
    }

    #[test]
    fn bracket_of_m01_m02_projects_onto_m12() {
        // [e_12, e_14] = -e_24 lands in the 8-dimensional summand.
        let space = build_space(&su5_fixture_spec()).unwrap();
        let decomp = isotypic_decompose(&space, 7).unwrap();
        let e12 = AlgebraVector::from_label(&space.g, "e_12").unwrap();
        let e14 = AlgebraVector::from_label(&space.g, "e_14").unwrap();
        let e24 = AlgebraVector::from_label(&space.g, "e_24").unwrap();
        let br = e12.bracket(&e14).unwrap();
        assert!(br.approx_eq(&e24.scale(-1.0), 1e-12));
        let big = decomp.summands.iter().find(|s| s.dim == 8).unwrap();
        let coords = space.to_m_coords(&br);
        let inside = (big.projector() * &coords).norm();
        assert!(inside > 1e-6);
    }

    #[test]
    fn decomposition_is_idempotent_under_refinement() {
        let space = build_space(&su5_fixture_spec()).unwrap();
        let decomp = isotypic_decompose(&space, 7).unwrap();
        let ops = space.ad_h_ops().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for s in &decomp.summands {
            let again =
                invariant_split(&ops, s.coords.clone(), &mut rng, &space.g.tol).unwrap();
            assert_eq!(again.len(), 1, "summand of dim {} split further", s.dim);
        }
    }

    #[test]
    fn sp3_trivial_part_is_three_equivalent_lines() {
        let spec = SpaceSpec::new(Family::Sp, 3, vec![1, 1], false).unwrap();
        let space = build_space(&spec).unwrap();
        let decomp = isotypic_decompose(&space, 13).unwrap();
        let n_summands: Vec<&Summand> = decomp.summands.iter().filter(|s| s.in_n).collect();
        assert_eq!(n_summands.len(), 3);
        assert!(n_summands.iter().all(|s| s.dim == 1));
        let ids: Vec<usize> = n_summands.iter().map(|s| s.class_id).collect();
        assert!(ids.iter().all(|&c| c == ids[0]), "trivial lines equivalent");
        // Under the normalizer action the trivial part stays one 3-dim block.
        let n_norm: Vec<&Summand> = decomp
            .normalizer_summands
            .iter()
            .filter(|s| s.in_n)
            .collect();
        assert_eq!(n_norm.len(), 1);
        assert_eq!(n_norm[0].dim, 3);
    }
}
