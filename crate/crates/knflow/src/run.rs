//! Command dispatch.

use std::path::{Path, PathBuf};

use knflow_core::analysis::{
    check_evi_integrated, check_evi_kn, check_evi_lambda, check_evi_sublevel, contraction_rate,
    energy_audit_window, EviParams, EviReport, KnForm,
};
use knflow_core::convexity::{
    check_kn_convex, check_lambda_convex, ConvexityKind, ConvexityReport,
};
use knflow_core::flows::{minimizing_movement, ode_flow, oracle_flow, Curve, OdeOptions};
use knflow_core::reparam::{r1, r2};
use knflow_core::{sigma, Point};
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::io::{
    read_curve, sha256_hex, write_curve, write_json, write_table, CheckRecord, RunManifest,
};

/// Default number of sampled pairs for convexity checks.
pub const CONVEXITY_PAIRS: usize = 2000;
/// Default number of reference points per time for EVI checks.
pub const EVI_Z_SAMPLES: usize = 500;
/// Default jitter amplitude of `perturb`.
pub const JITTER: f64 = 0.05;

/// Files written and verdict of one stage.
#[derive(Debug, Clone, Default)]
pub struct StageOutcome {
    pub outputs: Vec<PathBuf>,
    /// `None` for commands that are not checks.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub pass: bool,
}

impl RunOutcome {
    /// 0 on success, 2 when a check failed.
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            2
        }
    }
}

/// Runs `cmd` with the config at `config_path`, writing into `out` and
/// finishing with `out/manifest.json`.
pub fn run(cmd: Command, config_path: &Path, out: &Path) -> Result<RunOutcome> {
    let (cfg, bytes) = ExperimentConfig::load(config_path)?;
    run_config(cmd, &cfg, &sha256_hex(&bytes), out)
}

pub fn run_config(
    cmd: Command,
    cfg: &ExperimentConfig,
    config_sha256: &str,
    out: &Path,
) -> Result<RunOutcome> {
    if let Some(c) = cfg.command {
        if c != cmd {
            return Err(CliError::config(format!(
                "config is for \"{}\", not \"{}\"",
                c.name(),
                cmd.name()
            )));
        }
    }
    let mut outputs = Vec::new();
    let mut checks = Vec::new();
    if cmd == Command::Pipeline {
        let stages = cfg
            .stages
            .as_ref()
            .ok_or_else(|| CliError::config("pipeline needs \"stages\""))?;
        if *cfg
            != (ExperimentConfig {
                command: cfg.command,
                stages: cfg.stages.clone(),
                ..Default::default()
            })
        {
            return Err(CliError::config("a pipeline config holds only \"stages\""));
        }
        for (i, stage) in stages.iter().enumerate() {
            let sc = stage.command.ok_or_else(|| CliError::Stage {
                stage: i,
                source: Box::new(CliError::config("stage needs \"command\"")),
            })?;
            if sc == Command::Pipeline {
                return Err(CliError::Stage {
                    stage: i,
                    source: Box::new(CliError::config("nested pipeline")),
                });
            }
            let o = run_stage(sc, stage, out).map_err(|e| CliError::Stage {
                stage: i,
                source: Box::new(e),
            })?;
            outputs.extend(o.outputs);
            if let Some(pass) = o.pass {
                checks.push(CheckRecord {
                    stage: i,
                    command: sc.name().into(),
                    pass,
                });
            }
        }
    } else {
        if cfg.stages.is_some() {
            return Err(CliError::config("\"stages\" is only valid for pipeline"));
        }
        let o = run_stage(cmd, cfg, out)?;
        outputs = o.outputs;
        if let Some(pass) = o.pass {
            checks.push(CheckRecord {
                stage: 0,
                command: cmd.name().into(),
                pass,
            });
        }
    }
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: config_sha256.into(),
        outputs: outputs.iter().map(|p| relative(p, out)).collect(),
        checks,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    let pass = manifest.checks.iter().all(|c| c.pass);
    Ok(RunOutcome { manifest, pass })
}

fn relative(p: &Path, base: &Path) -> String {
    p.strip_prefix(base)
        .unwrap_or(p)
        .to_string_lossy()
        .into_owned()
}

fn resolve(out: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out.join(p)
    }
}

fn output(cfg: &ExperimentConfig, out: &Path, default: &str) -> PathBuf {
    out.join(cfg.output.as_deref().unwrap_or(default))
}

fn input(cfg: &ExperimentConfig, out: &Path) -> Result<Curve> {
    read_curve(&resolve(out, cfg.require_str(&cfg.input, "input")?))
}

fn point_json(p: &Point) -> Value {
    if p.dim() == 1 {
        json!(p.x())
    } else {
        json!(p.coords())
    }
}

pub fn run_stage(cmd: Command, cfg: &ExperimentConfig, out: &Path) -> Result<StageOutcome> {
    match cmd {
        Command::Coeff => coeff(cfg, out),
        Command::Flow => flow(cfg, out),
        Command::CheckConvexity => convexity(cfg, out),
        Command::CheckEvi => evi(cfg, out),
        Command::Reparam => reparam(cfg, out),
        Command::Contract => contract(cfg, out),
        Command::AuditEnergy => audit(cfg, out),
        Command::Perturb => perturb(cfg, out),
        Command::Pipeline => Err(CliError::config("nested pipeline")),
    }
}

fn coeff(cfg: &ExperimentConfig, out: &Path) -> Result<StageOutcome> {
    let p = cfg.params()?;
    let thetas = cfg
        .theta
        .clone()
        .ok_or_else(|| CliError::config("\"theta\" is required"))?;
    let ts = cfg.t.clone().unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
    let mut rows = Vec::with_capacity(thetas.len() * ts.len());
    for &theta in &thetas {
        for &t in &ts {
            rows.push(vec![theta, t, sigma(&p, t, theta)?.to_f64()]);
        }
    }
    let path = output(cfg, out, "coeff.csv");
    write_table(&path, &["theta", "t", "sigma"], rows.into_iter())?;
    Ok(StageOutcome {
        outputs: vec![path],
        pass: None,
    })
}

fn flow(cfg: &ExperimentConfig, out: &Path) -> Result<StageOutcome> {
    let method = cfg.method.as_deref().unwrap_or("oracle");
    let c = match method {
        "oracle" => {
            let name = match (&cfg.name, &cfg.functional) {
                (Some(n), _) => n.clone(),
                (None, Some(f)) => f
                    .library
                    .clone()
                    .ok_or_else(|| CliError::config("oracle needs \"name\""))?,
                (None, None) => return Err(CliError::config("oracle needs \"name\"")),
            };
            oracle_flow(&name, &cfg.params()?, &cfg.y0()?, &cfg.grid()?)?
        }
        "ode" => {
            let opts = match cfg.rtol {
                Some(r) => OdeOptions::with_rtol(r),
                None => OdeOptions::default(),
            };
            ode_flow(&cfg.functional()?, &cfg.y0()?, &cfg.grid()?, &opts)?
        }
        "mms" => minimizing_movement(
            &cfg.functional()?,
            cfg.require(cfg.tau, "tau")?,
            &cfg.y0()?,
            cfg.require(cfg.horizon, "horizon")?,
            &cfg.tolerance()?,
        )?,
        other => return Err(CliError::config(format!("unknown flow method \"{other}\""))),
    };
    let outputs = write_curve(&output(cfg, out, "curve.csv"), &c)?;
    Ok(StageOutcome {
        outputs,
        pass: None,
    })
}

fn convexity(cfg: &ExperimentConfig, out: &Path) -> Result<StageOutcome> {
    let f = cfg.functional()?;
    let spec = cfg.spec(CONVEXITY_PAIRS);
    let tol = cfg.tolerance()?;
    let rep = match cfg.lambda {
        Some(l) => check_lambda_convex(&f, l, &spec, &tol)?,
        None => check_kn_convex(&f, &cfg.params()?, &spec, &tol)?,
    };
    let path = output(cfg, out, "convexity.json");
    write_json(&path, &convexity_json(&rep))?;
    Ok(StageOutcome {
        outputs: vec![path],
        pass: Some(rep.pass),
    })
}

pub fn convexity_json(rep: &ConvexityReport) -> Value {
    let witness = rep
        .worst_witness
        .as_ref()
        .map(|w| json!([point_json(&w.x0), point_json(&w.x1), w.t]));
    let mut v = match rep.kind {
        ConvexityKind::KN { params } => json!({"kind": "KN", "K": params.k(), "N": params.n()}),
        ConvexityKind::Lambda { lambda } => json!({"kind": "lambda", "lambda": lambda}),
    };
    let o = v.as_object_mut().expect("object");
    o.insert("pairs".into(), json!(rep.pairs_tested));
    o.insert("t_points".into(), json!(rep.t_grid_size));
    o.insert("max_residual".into(), json!(rep.max_residual));
    o.insert("max_violation".into(), json!(rep.max_violation));
    o.insert("witness".into(), witness.unwrap_or(Value::Null));
    o.insert("pass".into(), json!(rep.pass));
    v
}

fn evi(cfg: &ExperimentConfig, out: &Path) -> Result<StageOutcome> {
    let c = input(cfg, out)?;
    let f = cfg.functional()?;
    let spec = cfg.spec(EVI_Z_SAMPLES);
    let tol = cfg.tolerance()?;
    let form = cfg.form.as_deref().unwrap_or(if cfg.lambda.is_some() {
        "lambda"
    } else {
        "raw"
    });
    let rep = match form {
        "lambda" => check_evi_lambda(&c, &f, cfg.require(cfg.lambda, "lambda")?, &spec, &tol)?,
        "raw" | "i" | "ii" => {
            let kf = match form {
                "raw" => KnForm::Raw,
                "i" => KnForm::I,
                _ => KnForm::II,
            };
            check_evi_kn(&c, &f, &cfg.params()?, kf, &spec, &tol)?
        }
        "integrated" => check_evi_integrated(&c, &f, &cfg.params()?, &spec, &tol)?,
        "local" => {
            let level = cfg.m.map(|m| m.to_f64());
            check_evi_sublevel(
                &c,
                &f,
                cfg.require(cfg.lambda, "lambda")?,
                cfg.require(cfg.r, "R")?,
                level,
                &spec,
                &tol,
            )?
        }
        other => return Err(CliError::config(format!("unknown EVI form \"{other}\""))),
    };
    let path = output(cfg, out, "evi.json");
    write_json(&path, &evi_json(&rep))?;
    Ok(StageOutcome {
        outputs: vec![path],
        pass: Some(rep.pass),
    })
}

pub fn evi_json(rep: &EviReport) -> Value {
    let mut v = json!({"form": rep.form.name()});
    let o = v.as_object_mut().expect("object");
    match rep.params {
        EviParams::Lambda { lambda } => {
            o.insert("lambda".into(), json!(lambda));
        }
        EviParams::KN { params } => {
            o.insert("K".into(), json!(params.k()));
            o.insert("N".into(), json!(params.n()));
        }
        EviParams::Local {
            lambda,
            radius,
            level,
        } => {
            o.insert("lambda".into(), json!(lambda));
            o.insert("R".into(), json!(radius));
            o.insert("level".into(), json!(level));
        }
    }
    o.insert("time_samples".into(), json!(rep.time_samples));
    o.insert("z_samples".into(), json!(rep.z_samples));
    o.insert("max_residual".into(), json!(rep.max_residual));
    o.insert("max_violation".into(), json!(rep.max_violation));
    let worst = rep
        .worst
        .as_ref()
        .map(|w| json!({"t": w.t, "z": point_json(&w.z)}));
    o.insert("worst".into(), worst.unwrap_or(Value::Null));
    o.insert("pass".into(), json!(rep.pass));
    v
}

fn reparam(cfg: &ExperimentConfig, out: &Path) -> Result<StageOutcome> {
    let c = input(cfg, out)?;
    let f = cfg.functional()?;
    let p = cfg.params()?;
    let rc = match cfg.direction.as_deref() {
        Some("r1") => r1(&c, &f, &p)?,
        Some("r2") => r2(&c, &f, &p)?,
        _ => return Err(CliError::config("\"direction\" must be \"r1\" or \"r2\"")),
    };
    let outputs = write_curve(&output(cfg, out, "reparam.csv"), &rc)?;
    Ok(StageOutcome {
        outputs,
        pass: None,
    })
}

fn contract(cfg: &ExperimentConfig, out: &Path) -> Result<StageOutcome> {
    let c1 = input(cfg, out)?;
    let c2 = read_curve(&resolve(out, cfg.require_str(&cfg.input2, "input2")?))?;
    let r = cfg.start.unwrap_or_else(|| c1.start().max(c2.start()));
    let s_grid = match &cfg.grid {
        Some(g) => g.build()?.times().to_vec(),
        None => c1.times().to_vec(),
    };
    let rep = contraction_rate(&c1, &c2, r, &s_grid)?;
    let pass = cfg.bound.map(|b| rep.max_log_slope <= b);
    let path = output(cfg, out, "contract.json");
    write_json(
        &path,
        &json!({
            "r": r,
            "max_log_slope": rep.max_log_slope,
            "fitted_rate": rep.fitted_rate,
            "bound": cfg.bound,
            "pass": pass,
            "times": rep.times,
            "distances": rep.distances,
        }),
    )?;
    Ok(StageOutcome {
        outputs: vec![path],
        pass,
    })
}

fn audit(cfg: &ExperimentConfig, out: &Path) -> Result<StageOutcome> {
    let c = input(cfg, out)?;
    let f = cfg.functional()?;
    let [from, to] = cfg.window.unwrap_or([f64::NEG_INFINITY, f64::INFINITY]);
    let a = energy_audit_window(&c, &f, from, to)?;
    let csv = output(cfg, out, "audit.csv");
    let rows = (0..a.times.len()).map(|i| {
        vec![
            a.times[i],
            a.speed[i],
            a.slope[i],
            a.energy[i],
            a.residual[i],
        ]
    });
    write_table(&csv, &["t", "speed", "slope", "energy", "residual"], rows)?;
    let summary = csv.with_extension("json");
    let pass = a.edi_holds();
    write_json(
        &summary,
        &json!({
            "samples": a.times.len(),
            "ede_residual": a.ede_residual,
            "ede_excess": a.ede_excess(),
            "edi_excess": a.edi_excess(),
            "pass": pass,
        }),
    )?;
    Ok(StageOutcome {
        outputs: vec![csv, summary],
        pass: Some(pass),
    })
}

fn perturb(cfg: &ExperimentConfig, out: &Path) -> Result<StageOutcome> {
    let c = input(cfg, out)?;
    let space = match (&cfg.functional, &cfg.space) {
        (_, Some(s)) => s.build()?,
        (Some(_), None) => cfg.functional()?.space().clone(),
        (None, None) => knflow_core::ModelSpace::real_line(),
    };
    let j = c.jittered(
        &space,
        cfg.amplitude.unwrap_or(JITTER),
        cfg.seed.unwrap_or(knflow_core::SampleSpec::default().seed),
    )?;
    let outputs = write_curve(&output(cfg, out, "perturbed.csv"), &j)?;
    Ok(StageOutcome {
        outputs,
        pass: None,
    })
}
