//! The cone of G-invariant metrics on `G/H` as equivariant symmetric
//! operators on `m`, and its reductions: the normalizer block constraint
//! (metrics block-diagonal along `n ⊕ p` with an ad(n)-invariant n-block)
//! and the eigenvalue-equality constraints fired by bracket projections.
//!
//! A metric family is presented by scalar classes (groups of summands
//! forced to share one eigenvalue) plus optional off-diagonal intertwiner
//! generators between equivalent summands. Instantiating positive
//! parameters yields a [`MetricEndomorphism`].

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::Error;
use crate::homspace::{HomogeneousSpace, ModuleDecomposition, ReductiveSplit};
use crate::linalg;
use crate::Result;

/// A positive, Q-symmetric, equivariant operator on `m`, expressed in the
/// Q-orthonormalized m-basis (where Q-symmetry is plain symmetry).
#[derive(Clone, Debug)]
pub struct MetricEndomorphism {
    pub matrix: DMatrix<f64>,
}

impl MetricEndomorphism {
    pub fn identity(dim_m: usize) -> Self {
        MetricEndomorphism {
            matrix: DMatrix::identity(dim_m, dim_m),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn scale(&self, c: f64) -> Self {
        MetricEndomorphism {
            matrix: &self.matrix * c,
        }
    }

    /// Validates symmetry, positivity and equivariance against the
    /// ad(h)-operators of a space.
    pub fn validate(&self, space: &HomogeneousSpace) -> Result<()> {
        let tol = space.g.tol;
        let sym_err = (&self.matrix - self.matrix.transpose()).norm();
        if sym_err > 1e-10 * self.matrix.norm().max(1.0) {
            return Err(Error::Domain("metric endomorphism is not symmetric".into()));
        }
        let min = linalg::sym_min_eigenvalue(&self.matrix);
        if min <= tol.positivity {
            return Err(Error::Domain(format!(
                "metric endomorphism is not positive definite (min eigenvalue {min:.3e})"
            )));
        }
        for op in space.ad_h_ops()? {
            let comm = linalg::commutator_norm(&self.matrix, &op);
            if comm > 1e-9 * self.matrix.norm() * op.norm().max(1.0) {
                return Err(Error::Domain(format!(
                    "metric endomorphism is not equivariant (commutator norm {comm:.3e})"
                )));
            }
        }
        Ok(())
    }
}

/// The normal metric `Λ = Id`.
pub fn normal_metric(space: &HomogeneousSpace) -> MetricEndomorphism {
    MetricEndomorphism::identity(space.dim_m())
}

/// A group of summands constrained to share one scalar eigenvalue.
#[derive(Clone, Debug, Serialize)]
pub struct ScalarClass {
    pub name: String,
    pub summands: Vec<usize>,
    pub in_n: bool,
}

/// Off-diagonal symmetric generator coupling equivalent summands.
#[derive(Clone, Debug)]
pub struct IntertwinerGen {
    pub name: String,
    pub matrix: DMatrix<f64>,
    pub touches: Vec<usize>,
}

/// A constraint event applied to the family.
#[derive(Clone, Debug, Serialize)]
pub struct MergeRecord {
    pub description: String,
    /// "normalizer" or "eigen".
    pub provenance: String,
}

/// A parameterized cone of metric endomorphisms.
pub struct MetricFamily {
    pub classes: Vec<ScalarClass>,
    pub intertwiners: Vec<IntertwinerGen>,
    pub merges: Vec<MergeRecord>,
    pub constraints_applied: Vec<String>,
    /// Index of the scalar class fixed to 1 when reporting up to homothety
    /// (the first class outside `n`, when one exists).
    pub homothety_normalization: Option<usize>,
    pub positivity_domain: String,
    pub summand_dims: Vec<usize>,
    pub summand_in_n: Vec<bool>,
    summand_projectors: Vec<DMatrix<f64>>,
    equiv_ops: Vec<DMatrix<f64>>,
    tol: Tolerances,
    dim_m: usize,
}

/// Serializable summary for reports.
#[derive(Serialize)]
pub struct FamilySummary {
    pub parameters: Vec<String>,
    pub scalar_classes: Vec<ScalarClass>,
    pub intertwiner_parameters: Vec<String>,
    pub merges: Vec<MergeRecord>,
    pub constraints_applied: Vec<String>,
    pub homothety_normalized_parameter: Option<String>,
    pub positivity_domain: String,
}

impl MetricFamily {
    pub fn parameter_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.classes.iter().map(|c| c.name.clone()).collect();
        names.extend(self.intertwiners.iter().map(|t| t.name.clone()));
        names
    }

    pub fn scalar_parameter_count(&self) -> usize {
        self.classes.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.classes.len() + self.intertwiners.len()
    }

    /// Projector-sum generator of a scalar class.
    pub fn class_generator(&self, class: usize) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.dim_m, self.dim_m);
        for &s in &self.classes[class].summands {
            g += &self.summand_projectors[s];
        }
        g
    }

    /// All generators, scalar classes first, then intertwiners.
    pub fn generators(&self) -> Vec<DMatrix<f64>> {
        let mut gens: Vec<DMatrix<f64>> = (0..self.classes.len())
            .map(|c| self.class_generator(c))
            .collect();
        gens.extend(self.intertwiners.iter().map(|t| t.matrix.clone()));
        gens
    }

    /// Scalar parameters scanned by default: every class except the
    /// homothety-normalized one.
    pub fn free_scan_names(&self) -> Vec<String> {
        self.classes
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != self.homothety_normalization)
            .map(|(_, c)| c.name.clone())
            .collect()
    }

    pub fn summary(&self) -> FamilySummary {
        FamilySummary {
            parameters: self.parameter_names(),
            scalar_classes: self.classes.clone(),
            intertwiner_parameters: self.intertwiners.iter().map(|t| t.name.clone()).collect(),
            merges: self.merges.clone(),
            constraints_applied: self.constraints_applied.clone(),
            homothety_normalized_parameter: self
                .homothety_normalization
                .map(|i| self.classes[i].name.clone()),
            positivity_domain: self.positivity_domain.clone(),
        }
    }
}

fn ut_unknowns(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|p| (p..d).map(move |q| (p, q))).collect()
}

/// Weighted upper-triangle vectorization: an isometry from symmetric
/// matrices with the Frobenius inner product.
fn mat_to_wvec(m: &DMatrix<f64>) -> DVector<f64> {
    let d = m.nrows();
    let unknowns = ut_unknowns(d);
    DVector::from_fn(unknowns.len(), |i, _| {
        let (p, q) = unknowns[i];
        if p == q {
            m[(p, p)]
        } else {
            m[(p, q)] * std::f64::consts::SQRT_2
        }
    })
}

fn ut_vec_to_mat(d: usize, v: &DVector<f64>) -> DMatrix<f64> {
    let unknowns = ut_unknowns(d);
    let mut s = DMatrix::zeros(d, d);
    for (i, &(p, q)) in unknowns.iter().enumerate() {
        s[(p, q)] = v[i];
        s[(q, p)] = v[i];
    }
    s
}

/// Inverse of [`mat_to_wvec`].
fn wvec_to_mat(d: usize, w: &DVector<f64>) -> DMatrix<f64> {
    let unknowns = ut_unknowns(d);
    let mut s = DMatrix::zeros(d, d);
    for (i, &(p, q)) in unknowns.iter().enumerate() {
        let v = if p == q {
            w[i]
        } else {
            w[i] / std::f64::consts::SQRT_2
        };
        s[(p, q)] = v;
        s[(q, p)] = v;
    }
    s
}

/// Rows expressing `S R - R S = 0` over upper-triangle unknowns of `S`.
fn commutation_rows(ops: &[DMatrix<f64>], d: usize) -> DMatrix<f64> {
    let unknowns = ut_unknowns(d);
    let mut rows = DMatrix::zeros(ops.len() * d * d, unknowns.len());
    for (t, r) in ops.iter().enumerate() {
        for (col, &(p, q)) in unknowns.iter().enumerate() {
            for u in 0..d {
                for v in 0..d {
                    let mut val = 0.0;
                    if u == p {
                        val += r[(q, v)];
                    }
                    if u == q && p != q {
                        val += r[(p, v)];
                    }
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
    rows
}

fn vstack(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let cols = blocks.iter().map(|b| b.ncols()).max().unwrap_or(0);
    let total: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(total, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

/// Builds a structured family from a kernel of admissible symmetric
/// operators: identifies the scalar-class partition of the summands and the
/// leftover intertwiner generators, and names the parameters.
fn family_from_kernel(
    space: &HomogeneousSpace,
    decomp: &ModuleDecomposition,
    kernel: Vec<DMatrix<f64>>,
    constraints_applied: Vec<String>,
    merges: Vec<MergeRecord>,
) -> Result<MetricFamily> {
    let dm = space.dim_m();
    let tol = space.g.tol;
    let s = decomp.summands.len();
    let projectors: Vec<DMatrix<f64>> = decomp.summands.iter().map(|x| x.projector()).collect();

    // Orthonormal basis of the kernel span in weighted coordinates.
    let kernel_w: Vec<DVector<f64>> = kernel.iter().map(mat_to_wvec).collect();
    let kernel_basis = linalg::gram_schmidt(&kernel_w, 1e-10);
    let nk = kernel_basis.len();
    if nk != kernel.len() {
        return Err(Error::Numerical(
            "kernel generators are not linearly independent".into(),
        ));
    }

    // Allowed scalar assignments: alpha with sum_k alpha_k P_k in the span.
    let proj_off = |v: &DVector<f64>| -> DVector<f64> {
        let mut r = v.clone();
        for b in &kernel_basis {
            let c = r.dot(b);
            r -= b * c;
        }
        r
    };
    let wlen = mat_to_wvec(&projectors[0]).len();
    let mut alpha_rows = DMatrix::zeros(wlen, s);
    for (k, p) in projectors.iter().enumerate() {
        alpha_rows.set_column(k, &proj_off(&mat_to_wvec(p)));
    }
    let alpha_basis = linalg::nullspace(&alpha_rows, 1e-8);

    // Partition: summands k, l share a class iff alpha_k = alpha_l on the
    // whole allowed space.
    let mut class_of: Vec<usize> = (0..s).collect();
    for k in 0..s {
        for l in (k + 1)..s {
            let tied = alpha_basis.iter().all(|a| (a[k] - a[l]).abs() < 1e-8);
            if tied {
                let (ck, cl) = (class_of[k], class_of[l]);
                let target = ck.min(cl);
                for c in class_of.iter_mut() {
                    if *c == ck || *c == cl {
                        *c = target;
                    }
                }
            }
        }
    }
    let mut reps: Vec<usize> = Vec::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (k, &c) in class_of.iter().enumerate() {
        match reps.iter().position(|&r| r == c) {
            Some(i) => classes[i].push(k),
            None => {
                reps.push(c);
                classes.push(vec![k]);
            }
        }
    }
    if classes.len() != alpha_basis.len() {
        return Err(Error::Numerical(format!(
            "scalar structure is not a partition: {} classes vs {}-dim scalar space",
            classes.len(),
            alpha_basis.len()
        )));
    }
    classes.sort_by_key(|c| *c.iter().min().unwrap());

    // Names: classes fully inside n are mu's, the rest lambdas.
    let in_n = |c: &Vec<usize>| c.iter().all(|&k| decomp.summands[k].in_n);
    let mu_count = classes.iter().filter(|c| in_n(c)).count();
    let lambda_count = classes.len() - mu_count;
    let mut mu_seen = 0;
    let mut lambda_seen = 0;
    let scalar_classes: Vec<ScalarClass> = classes
        .iter()
        .map(|c| {
            let is_n = in_n(c);
            let name = if is_n {
                let name = if mu_count == 1 {
                    "mu".to_string()
                } else {
                    format!("mu_{mu_seen}")
                };
                mu_seen += 1;
                name
            } else {
                let name = if lambda_count == 1 {
                    "lambda".to_string()
                } else {
                    format!("lambda_{lambda_seen}")
                };
                lambda_seen += 1;
                name
            };
            ScalarClass {
                name,
                summands: c.clone(),
                in_n: is_n,
            }
        })
        .collect();

    // Intertwiner part: the kernel span minus the scalar-class span.
    let mut class_w: Vec<DVector<f64>> = Vec::new();
    for c in &classes {
        let mut g = DMatrix::zeros(dm, dm);
        for &k in c {
            g += &projectors[k];
        }
        class_w.push(mat_to_wvec(&g));
    }
    let class_basis = linalg::gram_schmidt(&class_w, 1e-10);
    let mut extras: Vec<DVector<f64>> = Vec::new();
    for kb in &kernel_basis {
        let mut r = kb.clone();
        for b in class_basis.iter().chain(extras.iter()) {
            let c = r.dot(b);
            r -= b * c;
        }
        if r.norm() > 1e-8 {
            extras.push(r.normalize());
        }
    }
    if classes.len() + extras.len() != nk {
        return Err(Error::Numerical(format!(
            "family structure mismatch: {} classes + {} intertwiners != kernel dim {}",
            classes.len(),
            extras.len(),
            nk
        )));
    }
    let intertwiners: Vec<IntertwinerGen> = extras
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let matrix = wvec_to_mat(dm, w);
            let touches = (0..s)
                .filter(|&k| (&projectors[k] * &matrix).norm() > 1e-8 * matrix.norm())
                .collect();
            IntertwinerGen {
                name: format!("t_{i}"),
                matrix,
                touches,
            }
        })
        .collect();

    let homothety_normalization = scalar_classes.iter().position(|c| !c.in_n);
    let positivity_domain = format!(
        "scalar parameters positive ({}); intertwiner parameters ({}) small enough to keep \
         the operator positive definite",
        scalar_classes
            .iter()
            .map(|c| c.name.as_str())
            .collect::<Vec<_>>()
            .join(", "),
        intertwiners.len()
    );

    Ok(MetricFamily {
        classes: scalar_classes,
        intertwiners,
        merges,
        constraints_applied,
        homothety_normalization,
        positivity_domain,
        summand_dims: decomp.summands.iter().map(|x| x.dim).collect(),
        summand_in_n: decomp.summands.iter().map(|x| x.in_n).collect(),
        summand_projectors: projectors,
        equiv_ops: space.ad_h_ops()?,
        tol,
        dim_m: dm,
    })
}

/// The symmetric part of the ad(h)-commutant on `m`: one scalar per summand
/// for pairwise-inequivalent summands, plus intertwiner blocks between
/// equivalent ones.
pub fn metric_space(
    space: &HomogeneousSpace,
    decomp: &ModuleDecomposition,
) -> Result<MetricFamily> {
    let dm = space.dim_m();
    let ops = space.ad_h_ops()?;
    let rows = commutation_rows(&ops, dm);
    let kernel: Vec<DMatrix<f64>> = linalg::nullspace(&rows, space.g.tol.svd_cutoff)
        .iter()
        .map(|v| ut_vec_to_mat(dm, v))
        .collect();
    family_from_kernel(
        space,
        decomp,
        kernel,
        vec!["equivariance".into()],
        Vec::new(),
    )
}

/// Restricts a family to operators block-diagonal along `n ⊕ p` whose
/// n-block commutes with `ad(x)|_n` for every `x` in `n` (bi-invariance of
/// the induced metric on `N_G(H⁰)/H⁰` at the algebra level). Never enlarges
/// the family.
pub fn apply_normalizer_constraint(
    space: &HomogeneousSpace,
    decomp: &ModuleDecomposition,
    split: &ReductiveSplit,
    family: &MetricFamily,
) -> Result<MetricFamily> {
    let dm = space.dim_m();
    let tol = space.g.tol;
    let unknowns = ut_unknowns(dm);
    let wlen = unknowns.len();
    let mut blocks: Vec<DMatrix<f64>> = Vec::new();

    // (a) stay inside the current family span.
    let gen_w: Vec<DVector<f64>> = family.generators().iter().map(mat_to_wvec).collect();
    let gen_basis = linalg::gram_schmidt(&gen_w, 1e-10);
    let mut span_rows = DMatrix::identity(wlen, wlen);
    for b in &gen_basis {
        span_rows -= b * b.transpose();
    }
    // Convert from weighted coordinates to raw upper-triangle unknowns.
    for (j, &(p, q)) in unknowns.iter().enumerate() {
        if p != q {
            let mut col = span_rows.column_mut(j);
            col *= std::f64::consts::SQRT_2;
        }
    }
    blocks.push(span_rows);

    // (b) off-block n-p coupling must vanish: C_nᵀ S C_p = 0.
    let dn = split.dim_n();
    let dp = split.dim_p();
    if dn > 0 && dp > 0 {
        let mut rows = DMatrix::zeros(dn * dp, wlen);
        for (col, &(p, q)) in unknowns.iter().enumerate() {
            for u in 0..dn {
                for v in 0..dp {
                    let mut val = split.n_coords[(p, u)] * split.p_coords[(q, v)];
                    if p != q {
                        val += split.n_coords[(q, u)] * split.p_coords[(p, v)];
                    }
                    if val != 0.0 {
                        rows[(u * dp + v, col)] = val;
                    }
                }
            }
        }
        blocks.push(rows);
    }

    // (c) the n-block commutes with ad(x)|_n for every x in the n-basis.
    if dn > 0 {
        for z in &split.n_basis {
            let ad_full = space.ad_on_m(z)?;
            let ad_n = split.n_coords.transpose() * &ad_full * &split.n_coords;
            if ad_n.norm() < 1e-12 {
                continue;
            }
            let mut rows = DMatrix::zeros(dn * dn, wlen);
            for (col, &(p, q)) in unknowns.iter().enumerate() {
                for u in 0..dn {
                    for v in 0..dn {
                        let mut val = 0.0;
                        for w in 0..dn {
                            let mut t_uw = split.n_coords[(p, u)] * split.n_coords[(q, w)];
                            if p != q {
                                t_uw += split.n_coords[(q, u)] * split.n_coords[(p, w)];
                            }
                            val += t_uw * ad_n[(w, v)];
                            let mut t_wv = split.n_coords[(p, w)] * split.n_coords[(q, v)];
                            if p != q {
                                t_wv += split.n_coords[(q, w)] * split.n_coords[(p, v)];
                            }
                            val -= ad_n[(u, w)] * t_wv;
                        }
                        if val.abs() > 1e-14 {
                            rows[(u * dn + v, col)] = val;
                        }
                    }
                }
            }
            blocks.push(rows);
        }
    }

    // (d) equivariance, kept explicit so the kernel is self-contained.
    blocks.push(commutation_rows(&family.equiv_ops, dm));

    let stacked = vstack(&blocks);
    let kernel: Vec<DMatrix<f64>> = linalg::nullspace(&stacked, tol.svd_cutoff)
        .iter()
        .map(|v| ut_vec_to_mat(dm, v))
        .collect();

    let mut constraints = family.constraints_applied.clone();
    constraints.push("normalizer".into());
    let out = family_from_kernel(space, decomp, kernel, constraints, family.merges.clone())?;
    if out.parameter_count() > family.parameter_count() {
        return Err(Error::Numerical(
            "normalizer constraint enlarged the family".into(),
        ));
    }

    // Record what changed.
    let mut merges = out.merges.clone();
    for class in &out.classes {
        let members: Vec<&ScalarClass> = family
            .classes
            .iter()
            .filter(|c| c.summands.iter().any(|x| class.summands.contains(x)))
            .collect();
        if members.len() > 1 {
            merges.push(MergeRecord {
                description: format!(
                    "{} := {}",
                    class.name,
                    members
                        .iter()
                        .map(|c| c.name.as_str())
                        .collect::<Vec<_>>()
                        .join(" = ")
                ),
                provenance: "normalizer".into(),
            });
        }
    }
    let dropped = family.intertwiners.len() as i64 - out.intertwiners.len() as i64;
    if dropped > 0 {
        merges.push(MergeRecord {
            description: format!("{dropped} intertwiner generator(s) eliminated"),
            provenance: "normalizer".into(),
        });
    }
    let mut out = out;
    out.merges = merges;
    Ok(out)
}

/// Applies the eigenvalue-equality constraints: for scalar summands
/// `S_a, S_b`, a nonzero projection of `[S_a, S_b]` onto a third summand
/// forces the eigenvalues equal (and ties the third when it is itself
/// scalar). Summands coupled by intertwiner generators are left to the
/// certifier. Merges go through union-find, so the result does not depend
/// on summand ordering.
pub fn eigen_constraints(
    space: &HomogeneousSpace,
    decomp: &ModuleDecomposition,
    family: &MetricFamily,
) -> Result<MetricFamily> {
    let s = decomp.summands.len();
    let fire = family.tol.fire;

    // A summand is "scalar-safe" when no intertwiner generator touches it.
    let safe: Vec<bool> = (0..s)
        .map(|k| family.intertwiners.iter().all(|t| !t.touches.contains(&k)))
        .collect();

    let mut class_of = vec![0usize; s];
    for (c, class) in family.classes.iter().enumerate() {
        for &k in &class.summands {
            class_of[k] = c;
        }
    }
    fn find(union: &mut [usize], mut c: usize) -> usize {
        while union[c] != c {
            union[c] = union[union[c]];
            c = union[c];
        }
        c
    }
    let mut union: Vec<usize> = (0..family.classes.len()).collect();
    let mut fired: Vec<String> = Vec::new();

    for a in 0..s {
        for b in (a + 1)..s {
            if !safe[a] || !safe[b] {
                continue;
            }
            let mut max_proj = vec![0.0_f64; s];
            for xa in &decomp.summands[a].basis {
                for xb in &decomp.summands[b].basis {
                    let br = xa.bracket(xb)?;
                    let coords = space.to_m_coords(&br);
                    for (k, mp) in max_proj.iter_mut().enumerate() {
                        if k == a || k == b {
                            continue;
                        }
                        let p = (decomp.summands[k].coords.transpose() * &coords).norm();
                        if p > *mp {
                            *mp = p;
                        }
                    }
                }
            }
            for k in 0..s {
                if k == a || k == b || max_proj[k] <= fire {
                    continue;
                }
                let (ca, cb) = (find(&mut union, class_of[a]), find(&mut union, class_of[b]));
                if ca != cb {
                    union[ca.max(cb)] = ca.min(cb);
                    fired.push(format!(
                        "{} = {} ([S{a}, S{b}] meets S{k})",
                        family.classes[class_of[a]].name, family.classes[class_of[b]].name
                    ));
                }
                if safe[k] {
                    let (cab, ck) =
                        (find(&mut union, class_of[a]), find(&mut union, class_of[k]));
                    if cab != ck {
                        union[cab.max(ck)] = cab.min(ck);
                        fired.push(format!(
                            "{} = {} ([S{a}, S{b}] meets S{k})",
                            family.classes[class_of[a]].name, family.classes[class_of[k]].name
                        ));
                    }
                }
            }
        }
    }

    // Rebuild the family from the merged partition.
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &c) in class_of.iter().enumerate() {
        let root = find(&mut union, c);
        groups.entry(root).or_default().push(k);
    }
    let mut kernel: Vec<DMatrix<f64>> = Vec::new();
    for group in groups.values() {
        let mut g = DMatrix::zeros(family.dim_m, family.dim_m);
        for &k in group {
            g += &family.summand_projectors[k];
        }
        kernel.push(g);
    }
    kernel.extend(family.intertwiners.iter().map(|t| t.matrix.clone()));

    let mut constraints = family.constraints_applied.clone();
    constraints.push("eigen".into());
    let mut merges = family.merges.clone();
    merges.extend(fired.into_iter().map(|description| MergeRecord {
        description,
        provenance: "eigen".into(),
    }));
    family_from_kernel(space, decomp, kernel, constraints, merges)
}

/// Instantiates a family at named positive parameters. Scalar parameters
/// default to 1 (the normal metric), intertwiner parameters to 0.
pub fn instantiate(
    family: &MetricFamily,
    params: &BTreeMap<String, f64>,
) -> Result<MetricEndomorphism> {
    let names = family.parameter_names();
    for k in params.keys() {
        if !names.contains(k) {
            return Err(Error::InvalidArgument(format!(
                "unknown metric parameter '{k}' (family parameters: {})",
                names.join(", ")
            )));
        }
    }
    for (k, &v) in params {
        if v <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "metric parameter '{k}' must be positive (got {v})"
            )));
        }
    }
    let mut lam = DMatrix::zeros(family.dim_m, family.dim_m);
    for (c, class) in family.classes.iter().enumerate() {
        let value = params.get(&class.name).copied().unwrap_or(1.0);
        lam += family.class_generator(c) * value;
    }
    for t in &family.intertwiners {
        let value = params.get(&t.name).copied().unwrap_or(0.0);
        if value != 0.0 {
            lam += &t.matrix * value;
        }
    }

    let metric = MetricEndomorphism { matrix: lam };
    let min = linalg::sym_min_eigenvalue(&metric.matrix);
    if min <= family.tol.positivity {
        return Err(Error::Domain(format!(
            "instantiated operator is not positive definite (min eigenvalue {min:.3e})"
        )));
    }
    for op in &family.equiv_ops {
        let comm = linalg::commutator_norm(&metric.matrix, op);
        if comm > 1e-9 * metric.matrix.norm() * op.norm().max(1.0) {
            return Err(Error::Numerical(format!(
                "instantiated operator is not equivariant (residual {comm:.3e})"
            )));
        }
    }
    Ok(metric)
}

/// Default scan values for each free parameter.
pub const DEFAULT_GRID_VALUES: [f64; 7] = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0];

/// Cartesian grid over the free scalar parameters (intertwiners are
/// excluded by default; the homothety-normalized parameter stays at 1).
pub fn default_grid(family: &MetricFamily) -> Vec<BTreeMap<String, f64>> {
    grid_over(&family.free_scan_names(), &DEFAULT_GRID_VALUES)
}

/// Cartesian grid over the given parameter names.
pub fn grid_over(names: &[String], values: &[f64]) -> Vec<BTreeMap<String, f64>> {
    let mut points: Vec<BTreeMap<String, f64>> = vec![BTreeMap::new()];
    for name in names {
        let mut next = Vec::with_capacity(points.len() * values.len());
        for point in &points {
            for &v in values {
                let mut p = point.clone();
                p.insert(name.clone(), v);
                next.push(p);
            }
        }
        points = next;
    }
    points
}
