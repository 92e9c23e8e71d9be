//! Polar group actions on a compact group manifold.
//!
//! An action of G on Y is stored through its left/right factors: the
//! element g acts as y -> L(g) y R(g)^{-1}. Conjugation has L = R = id,
//! twisted conjugation has L = entrywise complex conjugation, and a
//! two-sided action of a product group takes L and R from the two block
//! factors. The infinitesimal generator, right-translated to the
//! identity, is U_zeta(y) = L(zeta) - Ad_y R(zeta).
//!
//! Polarity means there is a flat section exp(span A_i) meeting every
//! orbit orthogonally; the open alcove is the regular part of the section
//! parametrized by coordinates q. On the regular part the isotropy
//! algebra K of section points is constant, and spin degrees of freedom
//! live in its orthocomplement.

use nalgebra::DVector;

use rand::Rng;

use crate::error::Error;
use crate::lie::{
    log_unitary, su_phase_matrix, unitarity_residual, CMat, GroupElement, LieAlgebraModel, RMat,
    RVec,
};
use crate::Result;

/// Entrywise complex conjugate (no transpose).
pub fn conj_mat(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    /// y -> g y g^{-1}; the acting group is the target group.
    Conjugation,
    /// y -> conj(g) y g^{-1}.
    TwistedConjugation,
    /// y -> a y b^{-1} with g = diag(a, b) block diagonal.
    TwoSided,
}

/// One radial density factor: delta picks up sin(w.q / 2)^mult.
#[derive(Debug, Clone)]
pub struct RootTerm {
    pub w: RVec,
    pub mult: usize,
}

/// Open polytope of regular section coordinates.
///
/// The interior is { q : w_a . q + c_a > 0 for all a } with unit normals,
/// so each functional value is a signed distance to its wall. The closure
/// is the convex hull of `vertices`.
#[derive(Debug, Clone)]
pub struct Alcove {
    pub functionals: Vec<(RVec, f64)>,
    pub vertices: Vec<RVec>,
}

impl Alcove {
    pub fn new(functionals: Vec<(RVec, f64)>, vertices: Vec<RVec>) -> Self {
        let functionals = functionals
            .into_iter()
            .map(|(w, c)| {
                let n = w.norm();
                (w / n, c / n)
            })
            .collect();
        Self { functionals, vertices }
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    /// Signed distance to the nearest wall; positive inside.
    pub fn wall_distance(&self, q: &RVec) -> f64 {
        self.functionals
            .iter()
            .map(|(w, c)| w.dot(q) + c)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, q: &RVec, margin: f64) -> bool {
        self.wall_distance(q) > margin
    }

    pub fn centroid(&self) -> RVec {
        let mut c = RVec::zeros(self.dim());
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }

    pub fn bbox(&self) -> Vec<(f64, f64)> {
        (0..self.dim())
            .map(|i| {
                let lo = self.vertices.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min);
                let hi = self.vertices.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            })
            .collect()
    }

    /// Uniform sample of the simplex interior, rejecting points closer
    /// than `margin` to a wall.
    pub fn sample<R: Rng>(&self, rng: &mut R, margin: f64) -> RVec {
        let k = self.vertices.len();
        for _ in 0..100_000 {
            // Barycentric weights from gaps of sorted uniforms.
            let mut cuts: Vec<f64> = (0..k - 1).map(|_| rng.gen_range(0.0..1.0)).collect();
            cuts.push(0.0);
            cuts.push(1.0);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut q = RVec::zeros(self.dim());
            for (j, v) in self.vertices.iter().enumerate() {
                q.axpy(cuts[j + 1] - cuts[j], v, 1.0);
            }
            if self.contains(&q, margin) {
                return q;
            }
        }
        panic!("alcove sampling failed: margin {margin} leaves no room");
    }
}

/// Flat section exp(sum q_i A_i) of a polar action.
#[derive(Debug, Clone)]
pub struct SectionChart {
    /// B-orthonormal section directions A_i in target coordinates.
    pub directions: Vec<RVec>,
    pub alcove: Alcove,
    /// Radial density factors where known in closed form:
    /// delta(q) = delta_coeff * prod_a sin(w_a . q / 2)^{m_a}.
    pub roots: Option<Vec<RootTerm>>,
    pub delta_coeff: f64,
}

impl SectionChart {
    pub fn r(&self) -> usize {
        self.directions.len()
    }

    /// delta(q) from the root product, if roots are available.
    pub fn delta_from_roots(&self, q: &RVec) -> Option<f64> {
        self.roots.as_ref().map(|roots| {
            self.delta_coeff
                * roots
                    .iter()
                    .map(|rt| (rt.w.dot(q) / 2.0).sin().powi(rt.mult as i32).abs())
                    .product::<f64>()
        })
    }
}

/// One Weyl symmetry: a realizer in the acting group together with its
/// orthogonal action on section coordinates.
#[derive(Debug, Clone)]
pub struct WeylElement {
    pub realizer: GroupElement,
    pub q_map: RMat,
}

#[derive(Debug, Clone)]
pub struct WeylData {
    pub elements: Vec<WeylElement>,
    /// Generators of the lattice of section translations fixing the
    /// section pointwise on the group.
    pub translations: Vec<RVec>,
}

/// Constant isotropy structure over the regular part of the section.
#[derive(Debug, Clone)]
pub struct IsotropySplit {
    /// B-orthonormal basis of the isotropy algebra K inside G.
    pub k_basis: Vec<RVec>,
    /// B-orthonormal basis of its orthocomplement; spin variables are
    /// coordinates in this basis.
    pub kperp_basis: Vec<RVec>,
}

impl IsotropySplit {
    pub fn dim_k(&self) -> usize {
        self.k_basis.len()
    }

    pub fn dim_kperp(&self) -> usize {
        self.kperp_basis.len()
    }

    /// Full algebra coordinates of a spin vector.
    pub fn xi_to_full(&self, xi: &RVec) -> RVec {
        let dim = self.kperp_basis[0].len();
        let mut out = RVec::zeros(dim);
        for (b, basis_vec) in self.kperp_basis.iter().enumerate() {
            out.axpy(xi[b], basis_vec, 1.0);
        }
        out
    }

    /// Spin coordinates of a full algebra vector (orthonormal bases, so
    /// projection is plain dot products).
    pub fn project_kperp(&self, full: &RVec) -> RVec {
        RVec::from_fn(self.kperp_basis.len(), |b, _| self.kperp_basis[b].dot(full))
    }

    pub fn project_k_norm(&self, full: &RVec) -> f64 {
        self.k_basis
            .iter()
            .map(|k| k.dot(full).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Ingredients assembled by the model catalog.
pub struct ActionBlueprint {
    pub name: String,
    pub kind: ActionKind,
    pub group: LieAlgebraModel,
    pub target: LieAlgebraModel,
    pub section: SectionChart,
    pub weyl: Option<WeylData>,
    /// Analytic isotropy bases when known; computed numerically otherwise.
    pub k_basis: Option<Vec<RVec>>,
    pub kperp_basis: Option<Vec<RVec>>,
}

/// A polar action with validated section and isotropy data.
pub struct PolarActionModel {
    pub name: String,
    pub kind: ActionKind,
    pub group: LieAlgebraModel,
    pub target: LieAlgebraModel,
    pub section: SectionChart,
    pub weyl: Option<WeylData>,
    pub isotropy: IsotropySplit,
}

/// Numerical kernel / cokernel split of a matrix by singular value
/// threshold; returns (kernel basis, complement basis) as columns of V.
fn svd_split(g: &RMat, tol: f64) -> (Vec<RVec>, Vec<RVec>) {
    let svd = g.clone().svd(true, true);
    let vt = svd.v_t.expect("svd requested v_t");
    let mut kernel = Vec::new();
    let mut complement = Vec::new();
    for i in 0..vt.nrows() {
        let v = vt.row(i).transpose();
        let sv = if i < svd.singular_values.len() { svd.singular_values[i] } else { 0.0 };
        if sv <= tol {
            kernel.push(v);
        } else {
            complement.push(v);
        }
    }
    (kernel, complement)
}

impl ActionBlueprint {
    pub fn build(self) -> Result<PolarActionModel> {
        let ActionBlueprint { name, kind, group, target, section, weyl, k_basis, kperp_basis } = self;
        let dim_g = group.dim;
        let dim_y = target.dim;
        let id_g = RMat::identity(dim_g, dim_g);
        let id_y = RMat::identity(dim_y, dim_y);
        if (group.bform.clone() - id_g).norm() > 1e-10 || (target.bform.clone() - id_y).norm() > 1e-10 {
            return Err(Error::NotSupported(
                "polar action models require B-orthonormal algebra bases".into(),
            ));
        }
        match kind {
            ActionKind::Conjugation | ActionKind::TwistedConjugation => {
                if group.mat_dim != target.mat_dim {
                    return Err(Error::Dimension("group and target matrix sizes differ".into()));
                }
            }
            ActionKind::TwoSided => {
                if group.mat_dim != 2 * target.mat_dim {
                    return Err(Error::Dimension(
                        "two-sided action needs a block-diagonal acting group of twice the target size".into(),
                    ));
                }
            }
        }
        for (i, a) in section.directions.iter().enumerate() {
            for (j, b) in section.directions.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (a.dot(b) - expect).abs() > 1e-10 {
                    return Err(Error::SectionInvalid(format!(
                        "section directions {i},{j} are not orthonormal"
                    )));
                }
            }
        }
        if section.alcove.dim() != section.r() {
            return Err(Error::SectionInvalid("alcove dimension mismatch".into()));
        }

        let mut model = PolarActionModel {
            name,
            kind,
            group,
            target,
            section,
            weyl,
            isotropy: IsotropySplit { k_basis: Vec::new(), kperp_basis: Vec::new() },
        };

        let q0 = model.section.alcove.centroid();
        let g0 = model.generator_matrix_full(&q0)?;
        let (k_num, kperp_num) = svd_split(&g0, 1e-9 * (1.0 + g0.norm()));

        let k_basis = k_basis.unwrap_or(k_num);
        let kperp_basis = kperp_basis.unwrap_or(kperp_num);
        if k_basis.len() + kperp_basis.len() != dim_g {
            return Err(Error::SectionInvalid(format!(
                "isotropy split {} + {} does not fill the acting algebra (dim {dim_g})",
                k_basis.len(),
                kperp_basis.len()
            )));
        }
        for v in k_basis.iter().chain(kperp_basis.iter()) {
            if (v.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::SectionInvalid("isotropy basis is not normalized".into()));
            }
        }
        for k in &k_basis {
            let img = &g0 * k;
            if img.norm() > 1e-8 {
                return Err(Error::SectionInvalid(format!(
                    "claimed isotropy direction moves the section point (|U| = {:.3e})",
                    img.norm()
                )));
            }
        }
        for (i, a) in kperp_basis.iter().enumerate() {
            for k in &k_basis {
                if a.dot(k).abs() > 1e-10 {
                    return Err(Error::SectionInvalid(format!(
                        "spin direction {i} is not orthogonal to the isotropy algebra"
                    )));
                }
            }
            for (j, b) in kperp_basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (a.dot(b) - expect).abs() > 1e-10 {
                    return Err(Error::SectionInvalid("spin basis is not orthonormal".into()));
                }
            }
        }
        model.isotropy = IsotropySplit { k_basis, kperp_basis };
        model.check_section_at(&q0, 1e-8)?;
        Ok(model)
    }
}

/// Residuals of the polar-section axioms at one coordinate point.
#[derive(Debug, Clone, Copy)]
pub struct SectionResiduals {
    /// max |B(A_i, U_beta)| over section directions and generators.
    pub orthogonality: f64,
    /// Smallest singular value of [A | U]; positive means the section and
    /// orbit directions span the whole tangent space.
    pub completeness: f64,
    /// max |U_k(s(q))| over the claimed isotropy basis.
    pub isotropy: f64,
    /// Smallest eigenvalue of the orbit Gram matrix on spin directions.
    pub inertia_min_eig: f64,
}

/// Aggregate report of `validate_section`.
#[derive(Debug, Clone)]
pub struct SectionValidation {
    pub samples: usize,
    pub max_orthogonality: f64,
    pub min_completeness: f64,
    pub max_isotropy: f64,
    pub min_inertia_eig: f64,
    pub ok: bool,
}

impl PolarActionModel {
    pub fn r(&self) -> usize {
        self.section.r()
    }

    /// Left and right group factors of the action of `g`.
    pub fn action_mats(&self, g: &GroupElement) -> Result<(CMat, CMat)> {
        if g.dim() != self.group.mat_dim {
            return Err(Error::Dimension("group element has wrong size".into()));
        }
        Ok(match self.kind {
            ActionKind::Conjugation => (g.m.clone(), g.m.clone()),
            ActionKind::TwistedConjugation => (conj_mat(&g.m), g.m.clone()),
            ActionKind::TwoSided => {
                let n = self.target.mat_dim;
                let a = g.m.view((0, 0), (n, n)).into_owned();
                let b = g.m.view((n, n), (n, n)).into_owned();
                (a, b)
            }
        })
    }

    /// Left and right algebra factors of the generator of `zeta`.
    pub fn zeta_mats(&self, zeta: &RVec) -> (CMat, CMat) {
        let m = self.group.mat(zeta);
        match self.kind {
            ActionKind::Conjugation => (m.clone(), m),
            ActionKind::TwistedConjugation => (conj_mat(&m), m),
            ActionKind::TwoSided => {
                let n = self.target.mat_dim;
                let a = m.view((0, 0), (n, n)).into_owned();
                let b = m.view((n, n), (n, n)).into_owned();
                (a, b)
            }
        }
    }

    /// g . y.
    pub fn act(&self, g: &GroupElement, y: &CMat) -> Result<CMat> {
        let (l, r) = self.action_mats(g)?;
        Ok(l * y * r.adjoint())
    }

    /// Generator field at y, right-translated to the identity:
    /// U_zeta(y) = L(zeta) - Ad_y R(zeta), as a target matrix.
    pub fn generator_mat(&self, zeta: &RVec, y: &CMat) -> CMat {
        let (l, r) = self.zeta_mats(zeta);
        l - y * r * y.adjoint()
    }

    /// Generator in target coordinates.
    pub fn generator(&self, zeta: &RVec, y: &CMat) -> Result<RVec> {
        self.target.coords(&self.generator_mat(zeta, y))
    }

    /// Section point s(q) = exp(sum q_i A_i); `q` must lie in the open
    /// alcove.
    pub fn section_point(&self, q: &RVec) -> Result<CMat> {
        if !self.section.alcove.contains(q, 0.0) {
            return Err(Error::OutsideAlcove(format!(
                "q = {:?} (wall distance {:.3e})",
                q.as_slice(),
                self.section.alcove.wall_distance(q)
            )));
        }
        self.section_point_unchecked(q)
    }

    pub fn section_point_unchecked(&self, q: &RVec) -> Result<CMat> {
        let mut x = RVec::zeros(self.target.dim);
        for (i, a) in self.section.directions.iter().enumerate() {
            x.axpy(q[i], a, 1.0);
        }
        Ok(self.target.exp(&x, 1.0)?.m)
    }

    /// Columns: target coordinates of U_beta(s(q)) over the full acting
    /// algebra basis.
    pub fn generator_matrix_full(&self, q: &RVec) -> Result<RMat> {
        let y = self.section_point_unchecked(q)?;
        let dim_g = self.group.dim;
        let mut m = RMat::zeros(self.target.dim, dim_g);
        for beta in 0..dim_g {
            let e = RVec::from_fn(dim_g, |i, _| if i == beta { 1.0 } else { 0.0 });
            m.set_column(beta, &self.generator(&e, &y)?);
        }
        Ok(m)
    }

    /// Columns: target coordinates of U_beta(s(q)) over the spin basis.
    pub fn generator_matrix_kperp(&self, q: &RVec) -> Result<RMat> {
        let y = self.section_point_unchecked(q)?;
        let m_dim = self.isotropy.dim_kperp();
        let mut m = RMat::zeros(self.target.dim, m_dim);
        for (beta, zeta) in self.isotropy.kperp_basis.iter().enumerate() {
            m.set_column(beta, &self.generator(zeta, &y)?);
        }
        Ok(m)
    }

    fn check_section_at(&self, q: &RVec, tol: f64) -> Result<SectionResiduals> {
        let g_full = self.generator_matrix_full(q)?;
        let mut orth: f64 = 0.0;
        for a in &self.section.directions {
            for beta in 0..g_full.ncols() {
                orth = orth.max(a.dot(&g_full.column(beta).into_owned()).abs());
            }
        }
        let r = self.r();
        let mut span = RMat::zeros(self.target.dim, r + g_full.ncols());
        for (i, a) in self.section.directions.iter().enumerate() {
            span.set_column(i, a);
        }
        for j in 0..g_full.ncols() {
            span.set_column(r + j, &g_full.column(j).into_owned());
        }
        let svd = span.svd(false, false);
        // The whole tangent space must be spanned: the dim-target-th
        // largest singular value of [A | U] stays away from zero.
        let mut svs: Vec<f64> = svd.singular_values.iter().copied().collect();
        svs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let completeness = if svs.len() >= self.target.dim { svs[self.target.dim - 1] } else { 0.0 };
        let mut iso: f64 = 0.0;
        for k in &self.isotropy.k_basis {
            iso = iso.max((&g_full * k).norm());
        }
        let g_kperp = self.generator_matrix_kperp(q)?;
        let gram = g_kperp.transpose() * &g_kperp;
        let eigs = nalgebra::linalg::SymmetricEigen::new(gram).eigenvalues;
        let min_eig = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        let res = SectionResiduals {
            orthogonality: orth,
            completeness,
            isotropy: iso,
            inertia_min_eig: min_eig,
        };
        if orth > tol {
            return Err(Error::SectionInvalid(format!(
                "section not orthogonal to orbits (residual {orth:.3e})"
            )));
        }
        Ok(res)
    }

    /// Samples the alcove and checks the polar-section axioms at each
    /// point: orthogonality of section and orbit directions, completeness
    /// of their joint span, constancy of the isotropy algebra, and
    /// positivity of the spin inertia.
    pub fn validate_section<R: Rng>(
        &self,
        samples: usize,
        margin: f64,
        rng: &mut R,
    ) -> Result<SectionValidation> {
        let mut report = SectionValidation {
            samples,
            max_orthogonality: 0.0,
            min_completeness: f64::INFINITY,
            max_isotropy: 0.0,
            min_inertia_eig: f64::INFINITY,
            ok: true,
        };
        for _ in 0..samples {
            let q = self.section.alcove.sample(rng, margin);
            let res = self.check_section_at(&q, 1e-8)?;
            report.max_orthogonality = report.max_orthogonality.max(res.orthogonality);
            report.min_completeness = report.min_completeness.min(res.completeness);
            report.max_isotropy = report.max_isotropy.max(res.isotropy);
            report.min_inertia_eig = report.min_inertia_eig.min(res.inertia_min_eig);
        }
        report.ok = report.max_orthogonality < 1e-10
            && report.max_isotropy < 1e-8
            && report.min_completeness > 1e-8
            && report.min_inertia_eig > 0.0;
        Ok(report)
    }

    /// Conjugation only: finds (q, g) with y = g s(q) g^{-1}, q in the
    /// closed fundamental alcove, by reducing the eigenphases of y.
    pub fn project_to_section(&self, y: &CMat) -> Result<(RVec, GroupElement)> {
        if self.kind != ActionKind::Conjugation {
            return Err(Error::NotSupported(
                "section projection is implemented for conjugation actions only".into(),
            ));
        }
        let res = unitarity_residual(y);
        if res > 1e-8 {
            return Err(Error::NotUnitary { residual: res });
        }
        let n = self.target.mat_dim;
        let (vecs, phases) = unitary_eigensystem(y)?;
        // Reduce into the fundamental alcove: phases to [0, 2pi), sorted
        // descending, then balance the sum to zero by shifting the k
        // largest down a period (k from det y = 1).
        let mut order: Vec<usize> = (0..n).collect();
        let wrapped: Vec<f64> = phases.iter().map(|&p| p.rem_euclid(std::f64::consts::TAU)).collect();
        order.sort_by(|&a, &b| wrapped[b].partial_cmp(&wrapped[a]).unwrap().then(a.cmp(&b)));
        let total: f64 = wrapped.iter().sum();
        let k = (total / std::f64::consts::TAU).round() as usize;
        let mut sorted: Vec<(f64, usize)> = order
            .iter()
            .enumerate()
            .map(|(rank, &col)| {
                let shift = if rank < k { std::f64::consts::TAU } else { 0.0 };
                (wrapped[col] - shift, col)
            })
            .collect();
        sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let theta = RVec::from_fn(n, |j, _| sorted[j].0);
        let d = su_phase_matrix(n);
        let q = 2.0 * d.transpose() * &theta;

        let mut g = CMat::zeros(n, n);
        for (slot, &(_, col)) in sorted.iter().enumerate() {
            let v = vecs.column(col).into_owned();
            // Deterministic phase: largest-modulus entry real positive.
            let mut best = 0;
            for i in 1..n {
                if v[i].norm() > v[best].norm() {
                    best = i;
                }
            }
            let phase = v[best] / v[best].norm();
            let v = v.map(|z| z / phase);
            g.set_column(slot, &v);
        }
        let det = g.determinant();
        for i in 0..n {
            g[(i, 0)] /= det;
        }
        Ok((q, GroupElement { m: g }))
    }
}

/// Eigenvectors and eigenphases of a unitary matrix through its Schur
/// form, which is diagonal for normal matrices.
fn unitary_eigensystem(y: &CMat) -> Result<(CMat, Vec<f64>)> {
    let n = y.nrows();
    let (q, t) = nalgebra::linalg::Schur::new(y.clone()).unpack();
    let mut off = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(t[(i, j)].norm());
            }
        }
    }
    if off > 1e-7 {
        return Err(Error::Numerical(format!(
            "Schur form of a unitary matrix is not diagonal (off {off:.3e})"
        )));
    }
    let phases = (0..n).map(|j| t[(j, j)].arg()).collect();
    Ok((q, phases))
}

/// Log-distance between group elements, insensitive to section gauge.
pub fn group_distance(a: &GroupElement, b: &GroupElement) -> Result<f64> {
    Ok(log_unitary(&(a.m.adjoint() * &b.m))?.norm())
}

/// Convenience: coordinate vector with a single nonzero entry.
pub fn unit_vector(dim: usize, i: usize) -> RVec {
    RVec::from_fn(dim, |j, _| if j == i { 1.0 } else { 0.0 })
}

/// Dense vector from a slice.
pub fn vec_from(xs: &[f64]) -> RVec {
    DVector::from_row_slice(xs)
}

/// Complex identity shortcut used by actions on unitary groups.
pub fn identity_target(n: usize) -> CMat {
    CMat::identity(n, n)
}
