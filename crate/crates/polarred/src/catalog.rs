//! Catalog of shipped polar action models.
//!
//! Five models: conjugation on SU(2), SU(3), SU(4) with the maximal torus
//! as section; twisted conjugation on SU(3) by entrywise complex
//! conjugation with a one-dimensional section in the regular-rotation
//! direction; and the two-sided SO(2) x SO(2) action on SU(2) with finite
//! isotropy. Conjugation models carry closed-form root data and the full
//! Weyl symmetry machinery; the twisted model exercises every numerical
//! fallback path.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::action::{
    unit_vector, vec_from, ActionBlueprint, ActionKind, Alcove, PolarActionModel, RootTerm,
    SectionChart, WeylData, WeylElement,
};
use crate::classical::{CoadjointOrbitSpec, ReducedState};
use crate::error::Error;
use crate::lie::{su_n, su_phase_matrix, su_plane_indices, so_so_block, GroupElement, RMat, RVec};
use crate::Result;

pub const MODEL_NAMES: &[&str] = &[
    "su2-conj",
    "su3-conj",
    "su4-conj",
    "su3-twisted",
    "su2-hermann-so2",
];

/// Builds a catalog model by name.
pub fn build_model(name: &str) -> Result<PolarActionModel> {
    match name {
        "su2-conj" => build_conjugation(2),
        "su3-conj" => build_conjugation(3),
        "su4-conj" => build_conjugation(4),
        "su3-twisted" => build_twisted3(),
        "su2-hermann-so2" => build_hermann2(),
        other => Err(Error::Config(format!(
            "unknown model '{other}'; available: {}",
            MODEL_NAMES.join(", ")
        ))),
    }
}

/// Fundamental alcove of SU(n) conjugation in section coordinates:
/// eigenphases theta = D q strictly descending with spread below one
/// period.
fn su_alcove(n: usize) -> Alcove {
    let d = su_phase_matrix(n);
    let r = n - 1;
    let row = |j: usize| -> RVec { d.row(j).transpose() };
    let mut functionals = Vec::new();
    for j in 0..r {
        functionals.push((row(j) - row(j + 1), 0.0));
    }
    functionals.push((row(n - 1) - row(0), TAU));
    let mut vertices = vec![RVec::zeros(r)];
    for k in 1..n {
        let mut theta = RVec::from_element(n, -(k as f64) / n as f64);
        for i in 0..k {
            theta[i] += 1.0;
        }
        theta *= TAU;
        vertices.push(2.0 * d.transpose() * theta);
    }
    Alcove::new(functionals, vertices)
}

/// Positive-root functionals of su(n) in section coordinates, ordered
/// like the spin-basis plane pairs: root a acts on spin coordinates
/// (2a, 2a+1).
fn su_roots(n: usize) -> Vec<RootTerm> {
    let d = su_phase_matrix(n);
    su_plane_indices(n)
        .iter()
        .map(|((j, k), _)| RootTerm {
            w: d.row(*j).transpose() - d.row(*k).transpose(),
            mult: 2,
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for sub in permutations(n - 1) {
        for slot in 0..n {
            let mut p = Vec::with_capacity(n);
            p.extend_from_slice(&sub[..slot]);
            p.push(n - 1);
            p.extend_from_slice(&sub[slot..]);
            out.push(p);
        }
    }
    out
}

fn permutation_parity(perm: &[usize]) -> i32 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Signed permutation realizer in SU(n): e_j -> s_j e_{perm(j)} with one
/// sign flip compensating odd permutations.
fn permutation_realizer(n: usize, perm: &[usize]) -> GroupElement {
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let sign = permutation_parity(perm) as f64;
    for j in 0..n {
        let s = if j == 0 { sign } else { 1.0 };
        m[(perm[j], j)] = Complex64::new(s, 0.0);
    }
    GroupElement { m }
}

/// Weyl symmetry data of the conjugation model: all signed-permutation
/// realizers with their orthogonal action on section coordinates, and
/// generators of the period lattice of the section exponential.
fn su_weyl(su: &crate::lie::LieAlgebraModel, n: usize) -> Result<WeylData> {
    let r = n - 1;
    let mut elements = Vec::new();
    for perm in permutations(n) {
        let realizer = permutation_realizer(n, &perm);
        let mut q_map = RMat::zeros(r, r);
        for j in 0..r {
            let col = su.adjoint(&realizer, &unit_vector(su.dim, j))?;
            for i in 0..r {
                q_map[(i, j)] = col[i];
            }
            // The adjoint of a permutation realizer preserves the Cartan
            // subalgebra; anything outside it is a construction bug.
            for i in r..su.dim {
                if col[i].abs() > 1e-12 {
                    return Err(Error::Numerical(
                        "Weyl realizer does not normalize the Cartan subalgebra".into(),
                    ));
                }
            }
        }
        elements.push(WeylElement { realizer, q_map });
    }
    let d = su_phase_matrix(n);
    let mut translations = Vec::new();
    for j in 0..r {
        let mut m = RVec::zeros(n);
        m[j] = 1.0;
        m[j + 1] = -1.0;
        translations.push(2.0 * TAU * d.transpose() * m);
    }
    Ok(WeylData { elements, translations })
}

/// Conjugation of SU(n) on itself; section = maximal torus.
pub fn build_conjugation(n: usize) -> Result<PolarActionModel> {
    if !(2..=4).contains(&n) {
        return Err(Error::NotSupported("conjugation models ship for n = 2, 3, 4".into()));
    }
    let su = su_n(n);
    let dim = su.dim;
    let r = n - 1;
    let directions: Vec<RVec> = (0..r).map(|i| unit_vector(dim, i)).collect();
    let k_basis: Vec<RVec> = (0..r).map(|i| unit_vector(dim, i)).collect();
    let kperp_basis: Vec<RVec> = (r..dim).map(|i| unit_vector(dim, i)).collect();
    let planes = n * (n - 1) / 2;
    let weyl = su_weyl(&su, n)?;
    ActionBlueprint {
        name: format!("su{n}-conj"),
        kind: ActionKind::Conjugation,
        group: su.clone(),
        target: su,
        section: SectionChart {
            directions,
            alcove: su_alcove(n),
            roots: Some(su_roots(n)),
            delta_coeff: 4f64.powi(planes as i32),
        },
        weyl: Some(weyl),
        k_basis: Some(k_basis),
        kperp_basis: Some(kperp_basis),
    }
    .build()
}

/// Twisted conjugation of SU(3): a . y = conj(a) y a^{-1}. The section
/// runs along the real rotation generator (E_12 - E_21)/2; walls sit at
/// q = 0 and q = pi where the isotropy algebra jumps.
pub fn build_twisted3() -> Result<PolarActionModel> {
    let su = su_n(3);
    let dim = su.dim;
    // X_01 = (E_01 - E_10)/2 is the first plane generator: index r = 2.
    let a_index = 2;
    let directions = vec![unit_vector(dim, a_index)];
    let k_basis = vec![unit_vector(dim, a_index)];
    let kperp_basis: Vec<RVec> = (0..dim).filter(|&i| i != a_index).map(|i| unit_vector(dim, i)).collect();
    let alcove = Alcove::new(
        vec![
            (vec_from(&[1.0]), 0.0),
            (vec_from(&[-1.0]), std::f64::consts::PI),
        ],
        vec![vec_from(&[0.0]), vec_from(&[std::f64::consts::PI])],
    );
    ActionBlueprint {
        name: "su3-twisted".into(),
        kind: ActionKind::TwistedConjugation,
        group: su.clone(),
        target: su,
        section: SectionChart { directions, alcove, roots: None, delta_coeff: 1.0 },
        weyl: None,
        k_basis: Some(k_basis),
        kperp_basis: Some(kperp_basis),
    }
    .build()
}

/// Two-sided action of SO(2) x SO(2) on SU(2): (a, b) . y = a y b^{-1}.
/// The isotropy of regular section points is the finite group
/// {(I, I), (-I, -I)}, so the whole acting algebra carries spin.
pub fn build_hermann2() -> Result<PolarActionModel> {
    let group = so_so_block(2);
    let target = su_n(2);
    let directions = vec![unit_vector(target.dim, 0)];
    let alcove = Alcove::new(
        vec![
            (vec_from(&[1.0]), 0.0),
            (vec_from(&[-1.0]), std::f64::consts::PI),
        ],
        vec![vec_from(&[0.0]), vec_from(&[std::f64::consts::PI])],
    );
    ActionBlueprint {
        name: "su2-hermann-so2".into(),
        kind: ActionKind::TwoSided,
        group: group.clone(),
        target,
        section: SectionChart {
            directions,
            alcove,
            roots: Some(vec![RootTerm { w: vec_from(&[2.0]), mult: 1 }]),
            delta_coeff: 1.0,
        },
        weyl: None,
        k_basis: Some(Vec::new()),
        kperp_basis: Some(vec![unit_vector(group.dim, 0), unit_vector(group.dim, 1)]),
    }
    .build()
}

/// Result of deriving the inverse-sine-squared pair interaction from one
/// momentum level of a conjugation model.
#[derive(Debug, Clone)]
pub struct SutherlandDerivation {
    pub model: String,
    /// Closed-form couplings |xi_a|^2 / 8 per root plane.
    pub couplings: Vec<f64>,
    /// Couplings recovered by least squares against the numerical
    /// potential; should match `couplings` to solver precision.
    pub fitted_couplings: Vec<f64>,
    /// max |V_numeric(q) - sum_a c_a / sin^2(w_a.q/2)| over the
    /// validation samples.
    pub fit_residual: f64,
    /// |P_K mu| of the momentum datum.
    pub moment_residual: f64,
    /// Planes whose coupling vanishes: free directions of the fit.
    pub degenerate_planes: Vec<usize>,
    pub casimir: f64,
}

/// Derives the reduced pair interaction on one momentum level: evaluates
/// the potential xi^T b(q)^{-1} xi / 2 through the numerical generator
/// Gram matrix, fits the inverse-sine-squared ansatz over the root
/// system, and reports couplings and residual.
pub fn derive_sutherland(
    model: &PolarActionModel,
    orbit: &CoadjointOrbitSpec,
    samples: usize,
    seed: u64,
) -> Result<SutherlandDerivation> {
    if model.kind != ActionKind::Conjugation {
        return Err(Error::NotSupported(
            "the inverse-sine-squared ansatz is tied to the root-plane structure of conjugation models".into(),
        ));
    }
    let roots = model
        .section
        .roots
        .as_ref()
        .ok_or_else(|| Error::NotSupported("model has no root data".into()))?;
    let (xi, moment_residual) = orbit.realize(model)?;
    let n_roots = roots.len();
    if xi.len() != 2 * n_roots {
        return Err(Error::Dimension("spin space does not split into root planes".into()));
    }
    let couplings: Vec<f64> = (0..n_roots)
        .map(|a| (xi[2 * a].powi(2) + xi[2 * a + 1].powi(2)) / 8.0)
        .collect();

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let samples = samples.max(2 * n_roots);
    let mut design = RMat::zeros(samples, n_roots);
    let mut rhs = RVec::zeros(samples);
    let mut points = Vec::with_capacity(samples);
    for s in 0..samples {
        let q = model.section.alcove.sample(&mut rng, 0.05);
        for (a, rt) in roots.iter().enumerate() {
            design[(s, a)] = (rt.w.dot(&q) / 2.0).sin().powi(-2);
        }
        // Independent potential path: Gram matrix of generator vectors.
        let gram = crate::classical::inertia_gram_numeric(model, &q)?;
        let inv = gram.try_inverse().ok_or_else(|| Error::NearSingular {
            eps: 0.0,
            detail: "inertia singular during derivation".into(),
        })?;
        rhs[s] = 0.5 * (xi.transpose() * inv * &xi)[(0, 0)];
        points.push(q);
    }
    let svd = design.clone().svd(true, true);
    let fitted = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Numerical(format!("coupling fit failed: {e}")))?;
    let fitted_couplings: Vec<f64> = fitted.iter().copied().collect();
    let mut fit_residual = 0.0f64;
    for s in 0..samples {
        let mut v = 0.0;
        for a in 0..n_roots {
            v += couplings[a] * design[(s, a)];
        }
        fit_residual = fit_residual.max((v - rhs[s]).abs());
    }
    let scale = couplings.iter().copied().fold(0.0f64, f64::max).max(1e-30);
    let degenerate_planes: Vec<usize> = (0..n_roots)
        .filter(|&a| couplings[a] < 1e-12 * scale)
        .collect();
    Ok(SutherlandDerivation {
        model: model.name.clone(),
        couplings,
        fitted_couplings,
        fit_residual,
        moment_residual,
        degenerate_planes,
        casimir: xi.norm_squared(),
    })
}

/// Standard initial state used by the CLI when none is configured: the
/// alcove centroid, mild radial momentum, and the requested orbit.
pub fn default_state(model: &PolarActionModel, orbit: &CoadjointOrbitSpec) -> Result<ReducedState> {
    let q = model.section.alcove.centroid();
    let r = model.r();
    let p = RVec::from_fn(r, |i, _| 0.3 / (i as f64 + 1.0));
    let (xi, _) = orbit.realize(model)?;
    ReducedState::new(model, q, p, xi)
}
