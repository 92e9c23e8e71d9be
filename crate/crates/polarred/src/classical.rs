//! Classical reduction of free geodesic motion.
//!
//! Free motion on the group Y with the bi-invariant metric, restricted to
//! a fixed momentum level of a polar action, reduces to a particle on the
//! section alcove coupled to a spin variable xi in the orthocomplement of
//! the isotropy algebra:
//!
//!   H(q, p, xi) = |p|^2 / 2 + xi^T b(q)^{-1} xi / 2,
//!
//! where b(q) is the Gram matrix of orbit generators along the section.
//! For conjugation actions b is block diagonal with 4 sin^2(w.q/2) per
//! root plane and the potential is an inverse-sine-squared pair
//! interaction. The unreduced flow is a one-parameter subgroup, which
//! makes an exact oracle available for every reduced trajectory.

use rand::Rng;

use crate::action::{ActionKind, PolarActionModel};
use crate::error::Error;
use crate::lie::{exp_antihermitian, CMat, RMat, RVec};
use crate::Result;

/// Point of the reduced phase space: alcove coordinates, radial momenta,
/// and spin in the B-orthonormal spin basis.
#[derive(Debug, Clone)]
pub struct ReducedState {
    pub q: RVec,
    pub p: RVec,
    pub xi: RVec,
}

impl ReducedState {
    pub fn new(model: &PolarActionModel, q: RVec, p: RVec, xi: RVec) -> Result<Self> {
        if q.len() != model.r() || p.len() != model.r() {
            return Err(Error::Dimension("q/p length must match the section rank".into()));
        }
        if xi.len() != model.isotropy.dim_kperp() {
            return Err(Error::Dimension(format!(
                "spin vector length {} does not match the spin space dimension {}",
                xi.len(),
                model.isotropy.dim_kperp()
            )));
        }
        if !model.section.alcove.contains(&q, 0.0) {
            return Err(Error::OutsideAlcove(format!("q = {:?}", q.as_slice())));
        }
        Ok(Self { q, p, xi })
    }

    /// B(xi, xi); conserved along the reduced flow.
    pub fn casimir(&self) -> f64 {
        self.xi.norm_squared()
    }
}

/// Momentum-level data selecting the spin variable.
#[derive(Debug, Clone)]
pub enum CoadjointOrbitSpec {
    /// xi = 0: pure radial motion.
    Zero,
    /// su(2) conjugation: xi = r T1, an equator point of the sphere orbit.
    Su2Equator { r: f64 },
    /// Rank-one orbit through i nu (v v^dag - I/n) with v the uniform
    /// unit vector; every root plane carries |xi_a|^2 = 4 nu^2 / n^2.
    Kks { nu: f64 },
    /// Explicit momentum vector in full acting-algebra coordinates; must
    /// satisfy the transversality (moment) condition P_K mu = 0.
    Generic { mu: Vec<f64> },
}

impl CoadjointOrbitSpec {
    /// Spin coordinates in the model's spin basis, together with the
    /// moment-condition residual |P_K mu|.
    pub fn realize(&self, model: &PolarActionModel) -> Result<(RVec, f64)> {
        let m = model.isotropy.dim_kperp();
        match self {
            CoadjointOrbitSpec::Zero => Ok((RVec::zeros(m), 0.0)),
            CoadjointOrbitSpec::Su2Equator { r } => {
                if model.kind != ActionKind::Conjugation || model.target.mat_dim != 2 {
                    return Err(Error::NotSupported(
                        "su2_equator orbits are defined for the su(2) conjugation model".into(),
                    ));
                }
                // T1 = -Y_01 in the su(2) basis; spin basis is (X_01, Y_01).
                let mut xi = RVec::zeros(m);
                xi[1] = -r;
                Ok((xi, 0.0))
            }
            CoadjointOrbitSpec::Kks { nu } => {
                if model.kind != ActionKind::Conjugation {
                    return Err(Error::NotSupported(
                        "kks orbits are defined for conjugation models".into(),
                    ));
                }
                let n = model.target.mat_dim as f64;
                // mu = i nu (v v^dag - I/n), v uniform: B(Y_jk, mu) = 2 nu / n,
                // B(X_jk, mu) = 0, diagonal part vanishes identically.
                let mut xi = RVec::zeros(m);
                for a in 0..m / 2 {
                    xi[2 * a + 1] = 2.0 * nu / n;
                }
                Ok((xi, 0.0))
            }
            CoadjointOrbitSpec::Generic { mu } => {
                if mu.len() != model.group.dim {
                    return Err(Error::Dimension(format!(
                        "generic momentum needs {} coordinates, got {}",
                        model.group.dim,
                        mu.len()
                    )));
                }
                let full = RVec::from_row_slice(mu);
                let k_norm = model.isotropy.project_k_norm(&full);
                if k_norm > 1e-10 * (1.0 + full.norm()) {
                    return Err(Error::MomentCondition(format!(
                        "momentum has an isotropy component |P_K mu| = {k_norm:.3e}; \
                         it must vanish for the reduced spin description"
                    )));
                }
                Ok((model.isotropy.project_kperp(&full), k_norm))
            }
        }
    }
}

/// Inertia data at one alcove point.
#[derive(Debug, Clone)]
pub struct InertiaEvaluation {
    pub gram: RMat,
    pub inv: RMat,
    pub det: f64,
    /// Radial density sqrt(det b); vanishes on alcove walls.
    pub delta: f64,
}

/// Closed-form Gram matrix for conjugation models: one 4 sin^2(w.q/2)
/// block per root plane, in the plane-ordered spin basis.
fn gram_conjugation_closed(model: &PolarActionModel, q: &RVec) -> Option<RMat> {
    if model.kind != ActionKind::Conjugation {
        return None;
    }
    let roots = model.section.roots.as_ref()?;
    let m = model.isotropy.dim_kperp();
    if m != 2 * roots.len() {
        return None;
    }
    let mut gram = RMat::zeros(m, m);
    for (a, rt) in roots.iter().enumerate() {
        let s = 4.0 * (rt.w.dot(q) / 2.0).sin().powi(2);
        gram[(2 * a, 2 * a)] = s;
        gram[(2 * a + 1, 2 * a + 1)] = s;
    }
    Some(gram)
}

/// Gram matrix of spin-basis generators, straight from the generator
/// vectors; works for every action kind.
pub fn inertia_gram_numeric(model: &PolarActionModel, q: &RVec) -> Result<RMat> {
    let g = model.generator_matrix_kperp(q)?;
    Ok(g.transpose() * g)
}

/// Inertia Gram matrix, its inverse, determinant and radial density at q.
/// Uses the closed form for conjugation models and the generator Gram
/// matrix otherwise.
pub fn inertia(model: &PolarActionModel, q: &RVec) -> Result<InertiaEvaluation> {
    let gram = match gram_conjugation_closed(model, q) {
        Some(g) => g,
        None => inertia_gram_numeric(model, q)?,
    };
    let det = gram.determinant();
    let inv = gram.clone().try_inverse().ok_or_else(|| Error::NearSingular {
        eps: det,
        detail: format!("inertia matrix is singular at q = {:?}", q.as_slice()),
    })?;
    if !inv.iter().all(|x| x.is_finite()) || det.abs() < 1e-280 {
        return Err(Error::NearSingular {
            eps: det,
            detail: format!("inertia matrix is numerically singular at q = {:?}", q.as_slice()),
        });
    }
    Ok(InertiaEvaluation { gram, inv, det, delta: det.abs().sqrt() })
}

/// Partial derivatives of the Gram matrix in each section direction:
/// analytic for conjugation root blocks, central differences otherwise.
pub fn inertia_derivatives(model: &PolarActionModel, q: &RVec) -> Result<Vec<RMat>> {
    let r = model.r();
    if let Some(roots) = model.section.roots.as_ref() {
        if model.kind == ActionKind::Conjugation {
            let m = model.isotropy.dim_kperp();
            let mut out = Vec::with_capacity(r);
            for i in 0..r {
                let mut d = RMat::zeros(m, m);
                for (a, rt) in roots.iter().enumerate() {
                    // d/dq_i 4 sin^2(w.q/2) = 2 sin(w.q) w_i.
                    let v = 2.0 * rt.w.dot(q).sin() * rt.w[i];
                    d[(2 * a, 2 * a)] = v;
                    d[(2 * a + 1, 2 * a + 1)] = v;
                }
                out.push(d);
            }
            return Ok(out);
        }
    }
    let h = 1e-6;
    let mut out = Vec::with_capacity(r);
    for i in 0..r {
        let mut qp = q.clone();
        let mut qm = q.clone();
        qp[i] += h;
        qm[i] -= h;
        let gp = inertia_gram_numeric(model, &qp)?;
        let gm = inertia_gram_numeric(model, &qm)?;
        out.push((gp - gm) / (2.0 * h));
    }
    Ok(out)
}

/// Spin potential xi^T b(q)^{-1} xi / 2.
pub fn spin_potential(model: &PolarActionModel, q: &RVec, xi: &RVec) -> Result<f64> {
    let inertia = inertia(model, q)?;
    Ok(0.5 * (xi.transpose() * &inertia.inv * xi)[(0, 0)])
}

/// Reduced Hamiltonian |p|^2/2 + xi^T b^{-1} xi / 2.
pub fn reduced_hamiltonian(model: &PolarActionModel, state: &ReducedState) -> Result<f64> {
    Ok(0.5 * state.p.norm_squared() + spin_potential(model, &state.q, &state.xi)?)
}

/// Right-trivialized velocity at the section point realizing the reduced
/// state: W = sum p_i A_i - sum (b^{-1} xi)^beta U_beta(s(q)), in target
/// coordinates.
pub fn solve_constraint(model: &PolarActionModel, state: &ReducedState) -> Result<RVec> {
    let inertia = inertia(model, &state.q)?;
    let c = &inertia.inv * &state.xi;
    let g = model.generator_matrix_kperp(&state.q)?;
    let mut w = RVec::zeros(model.target.dim);
    for (i, a) in model.section.directions.iter().enumerate() {
        w.axpy(state.p[i], a, 1.0);
    }
    w -= g * c;
    Ok(w)
}

/// Difference between the two expressions for the vertical kinetic
/// energy: the spin form xi^T b^{-1} xi / 2 against the B-norm of the
/// reconstructed vertical velocity. Zero for exact reduction data.
pub fn vertical_energy_residual(model: &PolarActionModel, q: &RVec, xi: &RVec) -> Result<f64> {
    let inertia_eval = inertia(model, q)?;
    let c = &inertia_eval.inv * xi;
    let spin_form = 0.5 * xi.dot(&c);
    // Independent path: assemble the vertical velocity from generators
    // computed at the section point and take its B-norm.
    let g = model.generator_matrix_kperp(q)?;
    let w_vert = -(&g * &c);
    let direct = 0.5 * w_vert.norm_squared();
    Ok((spin_form - direct).abs())
}

fn pack(q: &RVec, p: &RVec, xi_full: &RVec) -> RVec {
    let r = q.len();
    let d = xi_full.len();
    let mut s = RVec::zeros(2 * r + d);
    s.rows_mut(0, r).copy_from(q);
    s.rows_mut(r, r).copy_from(p);
    s.rows_mut(2 * r, d).copy_from(xi_full);
    s
}

fn unpack(s: &RVec, r: usize) -> (RVec, RVec, RVec) {
    let d = s.len() - 2 * r;
    (
        s.rows(0, r).into_owned(),
        s.rows(r, r).into_owned(),
        s.rows(2 * r, d).into_owned(),
    )
}

/// Time derivative of the packed state (q, p, xi_full):
/// qdot = p, pdot_i = xi^T b^{-1} (d_i b) b^{-1} xi / 2,
/// xidot = [b^{-1} xi, xi] in the full acting algebra.
pub fn reduced_vector_field(model: &PolarActionModel, s: &RVec) -> Result<RVec> {
    let r = model.r();
    let (q, p, xi_full) = unpack(s, r);
    let xi = model.isotropy.project_kperp(&xi_full);
    let inertia_eval = inertia(model, &q)?;
    let c = &inertia_eval.inv * &xi;
    let db = inertia_derivatives(model, &q)?;
    let mut dp = RVec::zeros(r);
    for i in 0..r {
        dp[i] = 0.5 * (c.transpose() * &db[i] * &c)[(0, 0)];
    }
    let eta_full = model.isotropy.xi_to_full(&c);
    let dxi = model.group.bracket(&eta_full, &xi_full);
    Ok(pack(&p, &dp, &dxi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Rk4,
    /// Splitting with exact spin rotations; conserves the Casimir to
    /// machine precision at second order in dt.
    Strang,
}

impl std::str::FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Integrator::Rk4),
            "strang" => Ok(Integrator::Strang),
            other => Err(Error::Config(format!("unknown integrator '{other}'"))),
        }
    }
}

/// One trajectory record.
#[derive(Debug, Clone)]
pub struct TrajRow {
    pub t: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Spin coordinates in the spin basis.
    pub xi: Vec<f64>,
    pub h: f64,
    pub casimir: f64,
    /// Size of the monitored isotropy component of the integrated spin.
    pub xi_k_norm: f64,
}

#[derive(Debug, Clone)]
pub struct IntegrationOutput {
    pub rows: Vec<TrajRow>,
    /// Time at which the trajectory reached an alcove wall, if it did;
    /// the output is truncated there.
    pub wall_time: Option<f64>,
    pub final_state: ReducedState,
    pub max_xi_k_norm: f64,
}

fn rk4_step(model: &PolarActionModel, s: &RVec, dt: f64) -> Result<RVec> {
    let k1 = reduced_vector_field(model, s)?;
    let k2 = reduced_vector_field(model, &(s + &k1 * (dt / 2.0)))?;
    let k3 = reduced_vector_field(model, &(s + &k2 * (dt / 2.0)))?;
    let k4 = reduced_vector_field(model, &(s + &k3 * dt))?;
    Ok(s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// Kick of length h at frozen q: p picks up the potential force, xi
/// rotates. Evaluating force and rotation generator at the spin midpoint
/// keeps the kick second order, and the spin update stays an exact
/// rotation, so the Casimir is conserved to roundoff.
fn strang_kick(model: &PolarActionModel, q: &RVec, p: &mut RVec, xi_full: &mut RVec, h: f64) -> Result<()> {
    let inertia_eval = inertia(model, q)?;
    let db = inertia_derivatives(model, q)?;
    let c0 = &inertia_eval.inv * &model.isotropy.project_kperp(xi_full);
    let eta0 = model.isotropy.xi_to_full(&c0);
    let xi_half = if eta0.norm() > 0.0 {
        let g = model.group.exp(&eta0, 0.5 * h)?;
        model.group.adjoint(&g, xi_full)?
    } else {
        xi_full.clone()
    };
    let c_half = &inertia_eval.inv * &model.isotropy.project_kperp(&xi_half);
    for i in 0..model.r() {
        p[i] += 0.5 * h * (c_half.transpose() * &db[i] * &c_half)[(0, 0)];
    }
    let eta_half = model.isotropy.xi_to_full(&c_half);
    if eta_half.norm() > 0.0 {
        let g = model.group.exp(&eta_half, h)?;
        *xi_full = model.group.adjoint(&g, xi_full)?;
    }
    Ok(())
}

const WALL_EPS: f64 = 1e-7;

/// Fixed-step integration of the reduced equations. The spin is carried
/// in full acting-algebra coordinates so that any drift out of the spin
/// subspace is visible in `xi_k_norm` rather than silently projected
/// away. Trajectories that reach an alcove wall are truncated and
/// flagged, not treated as errors.
pub fn integrate_reduced(
    model: &PolarActionModel,
    state0: &ReducedState,
    t_end: f64,
    dt: f64,
    stride: usize,
    method: Integrator,
) -> Result<IntegrationOutput> {
    if dt <= 0.0 || t_end < 0.0 {
        return Err(Error::Config("need dt > 0 and t_end >= 0".into()));
    }
    let stride = stride.max(1);
    let n_steps = (t_end / dt).round() as usize;
    let r = model.r();
    let xi_full0 = model.isotropy.xi_to_full(&state0.xi);
    let mut s = pack(&state0.q, &state0.p, &xi_full0);
    let mut rows = Vec::new();
    let mut wall_time = None;
    let mut max_k_norm = 0.0f64;

    let mut record = |t: f64, s: &RVec, max_k: &mut f64| -> Result<()> {
        let (q, p, xi_full) = unpack(s, r);
        let xi = model.isotropy.project_kperp(&xi_full);
        let k_norm = model.isotropy.project_k_norm(&xi_full);
        *max_k = max_k.max(k_norm);
        let h = 0.5 * p.norm_squared() + spin_potential(model, &q, &xi)?;
        rows.push(TrajRow {
            t,
            q: q.as_slice().to_vec(),
            p: p.as_slice().to_vec(),
            xi: xi.as_slice().to_vec(),
            h,
            casimir: xi.norm_squared(),
            xi_k_norm: k_norm,
        });
        Ok(())
    };

    record(0.0, &s, &mut max_k_norm)?;
    for step in 0..n_steps {
        let t = step as f64 * dt;
        {
            let (q, _, _) = unpack(&s, r);
            if model.section.alcove.wall_distance(&q) < WALL_EPS {
                wall_time = Some(t);
                break;
            }
        }
        s = match method {
            Integrator::Rk4 => rk4_step(model, &s, dt)?,
            Integrator::Strang => {
                let (mut q, mut p, mut xi_full) = unpack(&s, r);
                strang_kick(model, &q, &mut p, &mut xi_full, 0.5 * dt)?;
                q += &p * dt;
                strang_kick(model, &q, &mut p, &mut xi_full, 0.5 * dt)?;
                pack(&q, &p, &xi_full)
            }
        };
        let done = step + 1 == n_steps;
        if (step + 1) % stride == 0 || done {
            let (q, _, _) = unpack(&s, r);
            if !model.section.alcove.contains(&q, 0.0) {
                wall_time = Some((step + 1) as f64 * dt);
                break;
            }
            record((step + 1) as f64 * dt, &s, &mut max_k_norm)?;
        }
    }
    let (q, p, xi_full) = unpack(&s, r);
    let final_state = ReducedState {
        q,
        p,
        xi: model.isotropy.project_kperp(&xi_full),
    };
    Ok(IntegrationOutput { rows, wall_time, final_state, max_xi_k_norm: max_k_norm })
}

/// Unreduced oracle: the geodesic through y0 with right velocity w is
/// exp(t w) y0.
pub fn geodesic_point(model: &PolarActionModel, w: &RVec, y0: &CMat, t: f64) -> Result<CMat> {
    let wm = model.target.mat(w);
    Ok(exp_antihermitian(&wm, t)? * y0)
}

/// Reduced state read off an unreduced configuration: project y to the
/// section, transport the (constant) right velocity into the section
/// frame, and split it into radial momentum and spin.
pub fn pullback_state(model: &PolarActionModel, y: &CMat, w: &RVec) -> Result<ReducedState> {
    let (q, g) = model.project_to_section(y)?;
    let w_mat = model.target.mat(w);
    let w_tilde = model.target.coords(&(g.m.adjoint() * w_mat * &g.m))?;
    let r = model.r();
    let p = RVec::from_fn(r, |i, _| model.section.directions[i].dot(&w_tilde));
    let gk = model.generator_matrix_kperp(&q)?;
    let xi = -(gk.transpose() * &w_tilde);
    Ok(ReducedState { q, p, xi })
}

/// Gauge-invariant observables for flow comparison.
#[derive(Debug, Clone)]
pub struct FlowComparison {
    pub samples: usize,
    /// max |q_red(t) - q_oracle(t)| over samples.
    pub max_q_dev: f64,
    /// max |V_red - V_oracle| of the spin potential value.
    pub max_potential_dev: f64,
    /// max |B(xi,xi)_red - B(xi,xi)_oracle|.
    pub max_casimir_dev: f64,
    /// max |H_red(t) - H_red(0)|.
    pub energy_drift: f64,
    /// max |B(xi,xi)_red(t) - B(xi,xi)_red(0)|.
    pub casimir_drift: f64,
    /// |H_red(0) - B(W,W)/2|: the constraint solve and the reduced
    /// Hamiltonian must assign the same energy.
    pub energy_consistency: f64,
    pub max_xi_k_norm: f64,
}

/// Integrates the reduced system and compares it at sample times against
/// the exactly-known unreduced geodesic, using only gauge-invariant
/// observables. Conjugation models only (section projection).
pub fn compare_flows(
    model: &PolarActionModel,
    state0: &ReducedState,
    t_end: f64,
    dt: f64,
    samples: usize,
    method: Integrator,
) -> Result<FlowComparison> {
    let n_steps = (t_end / dt).round() as usize;
    let stride = (n_steps / samples).max(1);
    let out = integrate_reduced(model, state0, t_end, dt, stride, method)?;
    if out.wall_time.is_some() {
        return Err(Error::Numerical(
            "comparison trajectory reached an alcove wall; choose different initial data".into(),
        ));
    }
    let w0 = solve_constraint(model, state0)?;
    let y0 = model.section_point(&state0.q)?;
    let h0 = reduced_hamiltonian(model, state0)?;
    let cas0 = state0.casimir();
    // Oracle invariant: H is half the B-norm of the constant velocity.
    let h_oracle = 0.5 * w0.norm_squared();

    let mut cmp = FlowComparison {
        samples: out.rows.len(),
        max_q_dev: 0.0,
        max_potential_dev: 0.0,
        max_casimir_dev: 0.0,
        energy_drift: 0.0,
        casimir_drift: 0.0,
        energy_consistency: (h_oracle - h0).abs(),
        max_xi_k_norm: out.max_xi_k_norm,
    };
    for row in &out.rows {
        let y = geodesic_point(model, &w0, &y0, row.t)?;
        let oracle = pullback_state(model, &y, &w0)?;
        let q_red = RVec::from_row_slice(&row.q);
        let xi_red = RVec::from_row_slice(&row.xi);
        cmp.max_q_dev = cmp.max_q_dev.max((q_red.clone() - &oracle.q).norm());
        let v_red = spin_potential(model, &q_red, &xi_red)?;
        let v_oracle = spin_potential(model, &oracle.q, &oracle.xi)?;
        cmp.max_potential_dev = cmp.max_potential_dev.max((v_red - v_oracle).abs());
        cmp.max_casimir_dev = cmp.max_casimir_dev.max((row.casimir - oracle.casimir()).abs());
        cmp.energy_drift = cmp.energy_drift.max((row.h - h0).abs());
        cmp.casimir_drift = cmp.casimir_drift.max((row.casimir - cas0).abs());
    }
    Ok(cmp)
}

/// Random reduced state for stress tests: interior alcove point, normal
/// momenta, and a spin vector drawn in the spin space.
pub fn random_state<R: Rng>(model: &PolarActionModel, scale: f64, rng: &mut R) -> ReducedState {
    let q = model.section.alcove.sample(rng, 0.1);
    let r = model.r();
    let p = RVec::from_fn(r, |_, _| rng.gen_range(-scale..scale));
    let m = model.isotropy.dim_kperp();
    let xi = RVec::from_fn(m, |_, _| rng.gen_range(-scale..scale));
    ReducedState { q, p, xi }
}
