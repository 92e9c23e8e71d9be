//! Command-line front end: derive reduced models, integrate reduced
//! flows, assemble radial spectra, and run the verification suite.
//! Exactly one JSON document goes to stdout per invocation.

use std::path::Path;

use clap::{Args, Parser, Subcommand};

use polarred::action::ActionKind;
use polarred::catalog::{build_model, default_state, derive_sutherland};
use polarred::classical::{compare_flows, inertia, integrate_reduced};
use polarred::config::RunConfig;
use polarred::io::Json;
use polarred::lie::RMat;
use polarred::quantum::{
    assemble_reduced_operator, class_function_ladder, spectrum, su2_adjoint_ladder,
    AssembleOptions, RadialGrid, SpinRep,
};
use polarred::verify::{report_json, run_all};
use polarred::Result;

#[derive(Parser)]
#[command(name = "polarred", version, about = "Hamiltonian reduction of geodesic flow under polar symmetry actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report the reduced model: inertia and density samples, potential fit, dimensions.
    Derive(Overrides),
    /// Integrate the reduced flow; optionally write a trajectory CSV and compare against the geodesic oracle.
    Simulate(Overrides),
    /// Assemble the reduced radial operator and report its lowest eigenvalues.
    Spectrum(Overrides),
    /// Run the seeded verification suite; exit 1 if any check fails.
    Verify(Overrides),
}

/// Every flag mirrors a config key and wins over the file value.
#[derive(Args)]
struct Overrides {
    /// JSON config file; unknown keys are rejected.
    #[arg(long)]
    config: Option<String>,
    /// Catalog model name, e.g. su2-conj, su3-conj, su3-twisted.
    #[arg(long)]
    model: Option<String>,
    /// Coadjoint orbit: zero, su2:r=R, kks:nu=V, or generic:a,b,...
    #[arg(long)]
    orbit: Option<String>,
    /// Spin representation: trivial or adjoint.
    #[arg(long)]
    rep: Option<String>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Integration scheme: rk4 or strang.
    #[arg(long)]
    integrator: Option<String>,
    /// Output every this many steps.
    #[arg(long)]
    stride: Option<usize>,
    /// Interior grid points per section direction.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Number of lowest eigenvalues to report.
    #[arg(long)]
    eigenvalues: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample count for derivations and oracle comparisons.
    #[arg(long)]
    samples: Option<usize>,
    /// Compare the reduced trajectory against the unreduced geodesic.
    #[arg(long)]
    oracle: bool,
    /// File for the primary artifact (CSV for simulate, JSON otherwise).
    #[arg(long)]
    output: Option<String>,
    /// File for the assembled operator as a binary matrix dump.
    #[arg(long)]
    operator_dump: Option<String>,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = Cli::parse();
    if let Some(n) = polarred::requested_threads() {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (overrides, run): (&Overrides, fn(&RunConfig) -> Result<i32>) = match &cli.command {
        Command::Derive(o) => (o, cmd_derive),
        Command::Simulate(o) => (o, cmd_simulate),
        Command::Spectrum(o) => (o, cmd_spectrum),
        Command::Verify(o) => (o, cmd_verify),
    };
    let cfg = match load_config(overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match run(&cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn load_config(o: &Overrides) -> Result<RunConfig> {
    let mut cfg = match &o.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &o.model {
        cfg.model = v.clone();
    }
    if let Some(v) = &o.orbit {
        cfg.orbit = v.clone();
    }
    if let Some(v) = &o.rep {
        cfg.rep = v.clone();
    }
    if let Some(v) = o.t_end {
        cfg.t_end = v;
    }
    if let Some(v) = o.dt {
        cfg.dt = v;
    }
    if let Some(v) = &o.integrator {
        cfg.integrator = v.clone();
    }
    if let Some(v) = o.stride {
        cfg.stride = v;
    }
    if let Some(v) = o.grid_n {
        cfg.grid_n = v;
    }
    if let Some(v) = o.eigenvalues {
        cfg.eigenvalues = v;
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.samples {
        cfg.samples = v;
    }
    if o.oracle {
        cfg.oracle = true;
    }
    if let Some(v) = &o.output {
        cfg.output = Some(v.clone());
    }
    if let Some(v) = &o.operator_dump {
        cfg.operator_dump = Some(v.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn json_floats(v: &[f64]) -> Json {
    Json::Array(v.iter().map(|&x| Json::Float(x)).collect())
}

fn json_matrix(m: &RMat) -> Json {
    Json::Array(
        (0..m.nrows())
            .map(|i| json_floats(&m.row(i).iter().copied().collect::<Vec<_>>()))
            .collect(),
    )
}

fn emit(cfg: &RunConfig, doc: &Json) -> Result<()> {
    let text = doc.to_string_pretty();
    println!("{text}");
    if let Some(path) = &cfg.output {
        std::fs::write(Path::new(path), text + "\n")?;
    }
    Ok(())
}

fn kind_name(kind: &ActionKind) -> &'static str {
    match kind {
        ActionKind::Conjugation => "conjugation",
        ActionKind::TwistedConjugation => "twisted-conjugation",
        ActionKind::TwoSided => "two-sided",
    }
}

fn cmd_derive(cfg: &RunConfig) -> Result<i32> {
    let model = build_model(&cfg.model)?;
    let orbit = cfg.orbit_spec()?;
    let (xi, moment_residual) = orbit.realize(&model)?;
    let rep = SpinRep::from_name(&model, &cfg.rep)?;
    let zero_potential = xi.norm() == 0.0;

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = Vec::new();
    for _ in 0..cfg.samples {
        let q = model.section.alcove.sample(&mut rng, 0.1);
        let ev = inertia(&model, &q)?;
        let potential = 0.5 * xi.dot(&(&ev.inv * &xi));
        samples.push(Json::Object(vec![
            ("q".into(), json_floats(q.as_slice())),
            ("delta".into(), Json::Float(ev.delta)),
            ("inertia".into(), json_matrix(&ev.gram)),
            ("spin_potential".into(), Json::Float(potential)),
        ]));
    }

    let fit = if matches!(model.kind, ActionKind::Conjugation) {
        let d = derive_sutherland(&model, &orbit, cfg.samples, cfg.seed)?;
        Json::Object(vec![
            ("couplings".into(), json_floats(&d.couplings)),
            ("fitted_couplings".into(), json_floats(&d.fitted_couplings)),
            ("fit_residual".into(), Json::Float(d.fit_residual)),
            ("moment_residual".into(), Json::Float(d.moment_residual)),
            (
                "degenerate_planes".into(),
                Json::Array(d.degenerate_planes.iter().map(|&i| Json::Int(i as i64)).collect()),
            ),
        ])
    } else {
        Json::Null
    };

    let doc = Json::Object(vec![
        ("model".into(), Json::Str(model.name.clone())),
        ("kind".into(), Json::Str(kind_name(&model.kind).into())),
        (
            "dims".into(),
            Json::Object(vec![
                ("section_rank".into(), Json::Int(model.r() as i64)),
                ("group".into(), Json::Int(model.group.dim as i64)),
                ("isotropy".into(), Json::Int(model.isotropy.dim_k() as i64)),
                ("spin".into(), Json::Int(model.isotropy.dim_kperp() as i64)),
                ("rep".into(), Json::Int(rep.dim_v() as i64)),
                ("rep_invariants".into(), Json::Int(rep.vk_dim() as i64)),
            ]),
        ),
        (
            "orbit".into(),
            Json::Object(vec![
                ("spec".into(), Json::Str(cfg.orbit.clone())),
                ("casimir".into(), Json::Float(xi.norm_squared())),
                ("moment_residual".into(), Json::Float(moment_residual)),
                ("zero_potential".into(), Json::Bool(zero_potential)),
            ]),
        ),
        ("samples".into(), Json::Array(samples)),
        ("fit".into(), fit),
    ]);
    emit(cfg, &doc)?;
    Ok(0)
}

fn cmd_simulate(cfg: &RunConfig) -> Result<i32> {
    let model = build_model(&cfg.model)?;
    let orbit = cfg.orbit_spec()?;
    let state0 = default_state(&model, &orbit)?;
    let scheme = cfg.scheme()?;
    let out = integrate_reduced(&model, &state0, cfg.t_end, cfg.dt, cfg.stride, scheme)?;

    if let Some(path) = &cfg.output {
        let mut text =
            polarred::io::csv_header(model.r(), model.isotropy.dim_kperp()) + "\n";
        for row in &out.rows {
            text +=
                &polarred::io::csv_row(row.t, &row.q, &row.p, &row.xi, row.h, row.casimir, row.xi_k_norm);
            text += "\n";
        }
        std::fs::write(Path::new(path), text)?;
    }

    let h0 = out.rows.first().map_or(0.0, |r| r.h);
    let c0 = out.rows.first().map_or(0.0, |r| r.casimir);
    let mut energy_drift = 0.0f64;
    let mut casimir_drift = 0.0f64;
    for row in &out.rows {
        energy_drift = energy_drift.max((row.h - h0).abs());
        casimir_drift = casimir_drift.max((row.casimir - c0).abs());
    }

    let oracle = if cfg.oracle {
        let cmp = compare_flows(&model, &state0, cfg.t_end, cfg.dt, cfg.samples, scheme)?;
        Json::Object(vec![
            ("samples".into(), Json::Int(cmp.samples as i64)),
            ("max_q_dev".into(), Json::Float(cmp.max_q_dev)),
            ("max_potential_dev".into(), Json::Float(cmp.max_potential_dev)),
            ("max_casimir_dev".into(), Json::Float(cmp.max_casimir_dev)),
            ("energy_drift".into(), Json::Float(cmp.energy_drift)),
            ("casimir_drift".into(), Json::Float(cmp.casimir_drift)),
            ("energy_consistency".into(), Json::Float(cmp.energy_consistency)),
            ("max_xi_k_norm".into(), Json::Float(cmp.max_xi_k_norm)),
        ])
    } else {
        Json::Null
    };

    let last = &out.final_state;
    let doc = Json::Object(vec![
        ("model".into(), Json::Str(model.name.clone())),
        ("orbit".into(), Json::Str(cfg.orbit.clone())),
        ("integrator".into(), Json::Str(cfg.integrator.clone())),
        ("t_end".into(), Json::Float(cfg.t_end)),
        ("dt".into(), Json::Float(cfg.dt)),
        ("stride".into(), Json::Int(cfg.stride as i64)),
        ("rows".into(), Json::Int(out.rows.len() as i64)),
        ("hit_wall".into(), Json::Bool(out.wall_time.is_some())),
        (
            "wall_time".into(),
            out.wall_time.map_or(Json::Null, Json::Float),
        ),
        ("energy_drift".into(), Json::Float(energy_drift)),
        ("casimir_drift".into(), Json::Float(casimir_drift)),
        ("max_xi_k_norm".into(), Json::Float(out.max_xi_k_norm)),
        (
            "final".into(),
            Json::Object(vec![
                ("q".into(), json_floats(last.q.as_slice())),
                ("p".into(), json_floats(last.p.as_slice())),
                ("xi".into(), json_floats(last.xi.as_slice())),
            ]),
        ),
        ("oracle".into(), oracle),
    ]);
    // The output path holds the CSV; the summary goes to stdout only.
    println!("{}", doc.to_string_pretty());
    Ok(0)
}

fn spectrum_oracle(model_name: &str, rep_name: &str, k: usize) -> Option<Vec<f64>> {
    match (model_name, rep_name) {
        ("su2-conj", "trivial") => Some(class_function_ladder(2, k)),
        ("su3-conj", "trivial") => Some(class_function_ladder(3, k)),
        ("su4-conj", "trivial") => Some(class_function_ladder(4, k)),
        ("su2-conj", "adjoint") => Some(su2_adjoint_ladder(k)),
        _ => None,
    }
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<i32> {
    let model = build_model(&cfg.model)?;
    let rep = SpinRep::from_name(&model, &cfg.rep)?;
    let grid = RadialGrid::new(&model, cfg.grid_n)?;
    let op = assemble_reduced_operator(&model, &rep, &grid, AssembleOptions::default())?;
    let eigs = spectrum(&op, cfg.eigenvalues)?;

    if let Some(path) = &cfg.operator_dump {
        polarred::io::write_matrix_binary(Path::new(path), &op.dense())?;
    }

    let (oracle, deviation) = match spectrum_oracle(&model.name, &cfg.rep, cfg.eigenvalues) {
        Some(ladder) => {
            let dev = eigs
                .iter()
                .zip(&ladder)
                .map(|(e, l)| (e - l).abs())
                .fold(0.0f64, f64::max);
            (json_floats(&ladder), Json::Float(dev))
        }
        None => (Json::Null, Json::Null),
    };

    let doc = Json::Object(vec![
        ("model".into(), Json::Str(model.name.clone())),
        ("rep".into(), Json::Str(cfg.rep.clone())),
        ("grid_n".into(), Json::Int(cfg.grid_n as i64)),
        ("nodes".into(), Json::Int(grid.len() as i64)),
        ("h".into(), Json::Float(grid.h)),
        ("rep_invariants".into(), Json::Int(rep.vk_dim() as i64)),
        ("hermiticity_residual".into(), Json::Float(op.hermiticity_residual())),
        ("eigenvalues".into(), json_floats(&eigs)),
        ("oracle".into(), oracle),
        ("max_oracle_deviation".into(), deviation),
    ]);
    emit(cfg, &doc)?;
    Ok(0)
}

fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let results = run_all(cfg.seed)?;
    emit(cfg, &report_json(cfg.seed, &results))?;
    let mut code = 0;
    for r in &results {
        if !r.passed {
            eprintln!(
                "check failed: {} (statistic {:.6e}, threshold {:.6e})",
                r.name, r.statistic, r.threshold
            );
            code = 1;
        }
    }
    Ok(code)
}
