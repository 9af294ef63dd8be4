//! Executes an [`ExperimentConfig`] and renders every output in memory.

use rayon::prelude::*;
use serde::Serialize;

use scanorder::chain::{enumerate_state_space, Kernel, SiteKernels, StateSpace};
use scanorder::coupling::{grand_coupling_time, Sampler};
use scanorder::export::{self, SummaryRow};
use scanorder::identities::operator_identities;
use scanorder::lumped::{
    hardcore_lump_map, lumpability_check, lumped_as_kernel, lumped_pi, lumped_ru_kernel,
};
use scanorder::mixing::{
    exact_mixing_time, mixing_bounds_for, mixing_time_by_doubling, verify_fill_inequality,
    MixingReport,
};
use scanorder::model::{BipartiteModel, ModelSpec};
use scanorder::spectral::{relaxation_time, relaxation_time_reversibilized, verify_theorem1_with};
use scanorder::suite::{random_rbms, Instance};

use crate::config::{Analysis, ExperimentConfig, MixingMethod, Suite};
use crate::error::{CliError, Stage};

/// Largest full chain for which `auto` powers step by step.
const ITERATE_LIMIT: usize = 256;
/// Largest `n` at which the lumped chain is compared with the full one.
const LUMP_CHECK_MAX_N: usize = 4;
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
pub const PROP5_TOLERANCE: f64 = 1e-8;
pub const FILL_TIMES: [u64; 7] = [0, 1, 2, 4, 8, 16, 32];

pub struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

pub struct RunOutcome {
    pub files: Vec<OutputFile>,
    /// Verification rows that did not hold.
    pub failed_checks: usize,
}

struct Run<'a> {
    config: &'a ExperimentConfig,
    files: Vec<OutputFile>,
    summary: Vec<SummaryRow>,
    failed_checks: usize,
}

impl Run<'_> {
    fn emit<T: Serialize>(&mut self, name: &str, rows: &[T], header: &[&str]) -> Result<(), CliError> {
        let text = export::to_csv_string(rows, header).stage(&format!("write {name}"))?;
        self.files.push(OutputFile {
            name: name.into(),
            contents: text.into_bytes(),
        });
        Ok(())
    }
}

struct Built {
    id: String,
    model: BipartiteModel,
}

fn build_model(spec: &ModelSpec) -> Result<Built, CliError> {
    let model = spec.build().stage("build model")?;
    model.validate_bipartite().stage("build model")?;
    Ok(Built {
        id: spec.model_id(),
        model,
    })
}

struct Exact {
    space: StateSpace,
    ru: Kernel,
    full_scan: Kernel,
}

fn exact_chains(model: &BipartiteModel, config: &ExperimentConfig, stage: &str) -> Result<Exact, CliError> {
    let space = enumerate_state_space(model, config.cap).stage(stage)?;
    let sites = SiteKernels::build(model, &space).stage(stage)?;
    let ru = sites.random_update(config.lazy).stage(stage)?;
    let full_scan = sites.scan().stage(stage)?.full;
    Ok(Exact { space, ru, full_scan })
}

fn kernel_for<'k>(exact: &'k Exact, sampler: Sampler) -> &'k Kernel {
    match sampler {
        Sampler::RandomUpdate => &exact.ru,
        Sampler::AlternatingScan => &exact.full_scan,
    }
}

fn mix(
    kernel: &Kernel,
    pi: &[f64],
    config: &ExperimentConfig,
    method: MixingMethod,
) -> scanorder::Result<MixingReport> {
    let iterate = match method {
        MixingMethod::Iterate => true,
        MixingMethod::Doubling => false,
        MixingMethod::Auto => kernel.size() <= ITERATE_LIMIT,
    };
    if iterate {
        exact_mixing_time(kernel, pi, config.threshold, config.t_max)
    } else {
        mixing_time_by_doubling(kernel, pi, config.threshold, config.t_max)
    }
}

pub fn execute(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let built = config.model.as_ref().map(build_model).transpose()?;
    let mut run = Run {
        config,
        files: Vec::new(),
        summary: Vec::new(),
        failed_checks: 0,
    };
    let mut analyses = config.analyses.clone();
    analyses.sort();
    analyses.dedup();
    let mut samplers = config.samplers.clone();
    samplers.sort();
    samplers.dedup();
    for analysis in analyses {
        match analysis {
            Analysis::Spectral => spectral(&mut run, built.as_ref().expect("validated"), &samplers)?,
            Analysis::Mixing => mixing(&mut run, built.as_ref().expect("validated"), &samplers)?,
            Analysis::Lumped => lumped(&mut run, &samplers)?,
            Analysis::Coupling => coupling(&mut run, built.as_ref().expect("validated"), &samplers)?,
            Analysis::Verify => verify(&mut run, built.as_ref())?,
        }
    }
    let summary = std::mem::take(&mut run.summary);
    run.emit("summary.csv", &summary, export::SUMMARY_HEADER)?;
    Ok(RunOutcome {
        files: run.files,
        failed_checks: run.failed_checks,
    })
}

fn spectral(run: &mut Run, built: &Built, samplers: &[Sampler]) -> Result<(), CliError> {
    let stage = "spectral";
    let exact = exact_chains(&built.model, run.config, stage)?;
    let mut rows = Vec::new();
    for &s in samplers {
        let k = kernel_for(&exact, s);
        let rep = relaxation_time(k, exact.space.pi()).stage(stage)?;
        let unit = k.unit().to_string();
        run.summary.push(SummaryRow::new(stage, &built.id, s.as_str(), &unit, "gap", rep.gap));
        run.summary.push(SummaryRow::new(
            stage,
            &built.id,
            s.as_str(),
            &unit,
            "relaxation_time",
            rep.relaxation_time,
        ));
        rows.push(export::SpectralRow::new(&built.id, s.as_str(), k.unit(), &rep));
    }
    run.emit("spectral.csv", &rows, export::SPECTRAL_HEADER)
}

fn push_mixing(
    run: &mut Run,
    experiment: &str,
    model_id: &str,
    sampler: Sampler,
    rep: &MixingReport,
    curve: &mut Vec<export::MixingCurveRow>,
    summary: &mut Vec<export::MixingSummaryRow>,
) {
    let (c, s) = export::mixing_rows(model_id, sampler.as_str(), rep);
    curve.extend(c);
    summary.push(s);
    let unit = rep.unit.to_string();
    run.summary.push(SummaryRow::new(
        experiment,
        model_id,
        sampler.as_str(),
        &unit,
        "mixing_time",
        rep.mixing_time as f64,
    ));
    run.summary.push(SummaryRow::new(
        experiment,
        model_id,
        sampler.as_str(),
        &unit,
        "truncated",
        f64::from(u8::from(rep.truncated)),
    ));
}

fn mixing(run: &mut Run, built: &Built, samplers: &[Sampler]) -> Result<(), CliError> {
    let stage = "mixing";
    let exact = exact_chains(&built.model, run.config, stage)?;
    let (mut curve, mut summary) = (Vec::new(), Vec::new());
    for &s in samplers {
        let rep = mix(kernel_for(&exact, s), exact.space.pi(), run.config, run.config.mixing_method).stage(stage)?;
        push_mixing(run, stage, &built.id, s, &rep, &mut curve, &mut summary);
    }
    run.emit("mixing_curve.csv", &curve, export::MIXING_CURVE_HEADER)?;
    run.emit("mixing_summary.csv", &summary, export::MIXING_SUMMARY_HEADER)
}

fn lumped(run: &mut Run, samplers: &[Sampler]) -> Result<(), CliError> {
    let stage = "lumped";
    let sizes = if run.config.lumped_sizes.is_empty() {
        match run.config.model {
            Some(ModelSpec::HardcoreKnn { n }) => vec![n],
            _ => unreachable!("validated"),
        }
    } else {
        run.config.lumped_sizes.clone()
    };
    let method = match run.config.mixing_method {
        MixingMethod::Auto => MixingMethod::Doubling,
        m => m,
    };
    let (mut spectral_rows, mut curve, mut summary) = (Vec::new(), Vec::new(), Vec::new());
    for n in sizes {
        let id = format!("hardcore_knn_lumped:{n}");
        let pi = lumped_pi(n).stage(stage)?;
        for &s in samplers {
            let k = match s {
                Sampler::RandomUpdate => lumped_ru_kernel(n, run.config.lazy),
                Sampler::AlternatingScan => lumped_as_kernel(n),
            }
            .stage(stage)?;
            let rep = relaxation_time(&k, &pi).stage(stage)?;
            spectral_rows.push(export::SpectralRow::new(&id, s.as_str(), k.unit(), &rep));
            run.summary.push(SummaryRow::new(
                stage,
                &id,
                s.as_str(),
                &k.unit().to_string(),
                "relaxation_time",
                rep.relaxation_time,
            ));
            let mrep = mix(&k, &pi, run.config, method).stage(stage)?;
            push_mixing(run, stage, &id, s, &mrep, &mut curve, &mut summary);
        }
        if n <= LUMP_CHECK_MAX_N {
            let model = scanorder::model::build_hardcore_complete_bipartite(n).stage(stage)?;
            let exact = exact_chains(&model, run.config, stage)?;
            let map = hardcore_lump_map(&exact.space, n).stage(stage)?;
            for &s in samplers {
                let ok = lumpability_check(kernel_for(&exact, s), &map, 2 * n + 1).stage(stage)?;
                if !ok {
                    run.failed_checks += 1;
                }
                run.summary.push(SummaryRow::new(
                    stage,
                    &id,
                    s.as_str(),
                    "",
                    "lumpable",
                    f64::from(u8::from(ok)),
                ));
            }
        }
    }
    run.emit("lumped_spectral.csv", &spectral_rows, export::SPECTRAL_HEADER)?;
    run.emit("lumped_mixing_curve.csv", &curve, export::MIXING_CURVE_HEADER)?;
    run.emit("lumped_mixing_summary.csv", &summary, export::MIXING_SUMMARY_HEADER)
}

fn coupling(run: &mut Run, built: &Built, samplers: &[Sampler]) -> Result<(), CliError> {
    let stage = "coupling";
    let seed = run.config.seed.expect("validated");
    let (mut rows, mut summary) = (Vec::new(), Vec::new());
    for &s in samplers {
        let rep = grand_coupling_time(
            &built.model,
            s,
            seed,
            run.config.replicates,
            run.config.max_updates,
            run.config.coupling_lazy,
        )
        .stage(stage)?;
        if rep.sandwich_violations > 0 {
            run.failed_checks += 1;
        }
        let (r, sm) = export::coupling_rows(&built.id, &rep);
        rows.extend(r);
        summary.push(sm);
        for (metric, value) in [
            ("mean", rep.mean),
            ("median", rep.median),
            ("q90", rep.q90),
            ("truncated_count", rep.truncated_count as f64),
            ("sandwich_violations", rep.sandwich_violations as f64),
        ] {
            run.summary.push(SummaryRow::new(
                stage,
                &built.id,
                s.as_str(),
                "variable_update",
                metric,
                value,
            ));
        }
    }
    run.emit("coupling.csv", &rows, export::COUPLING_HEADER)?;
    run.emit("coupling_summary.csv", &summary, export::COUPLING_SUMMARY_HEADER)
}

#[derive(Serialize)]
struct Theorem1Row {
    model_id: String,
    states: usize,
    t_rel_as: f64,
    t_rel_ru: f64,
    holds: bool,
    lemma9_lhs: f64,
    lemma9_rhs: f64,
    lemma9_holds: bool,
}

#[derive(Serialize)]
struct IdentityRow {
    model_id: String,
    check: String,
    max_deviation: f64,
    holds: bool,
}

#[derive(Serialize)]
struct Prop5Row {
    model_id: String,
    kernel: String,
    relaxation_direct: f64,
    relaxation_reversibilized: f64,
    relative_error: f64,
    holds: bool,
}

#[derive(Serialize)]
struct MixingBoundsRow {
    model_id: String,
    states: usize,
    pi_min: f64,
    t_rel_ru: f64,
    t_rel_as: f64,
    t_mix_ru: u64,
    t_mix_as: u64,
    ru_lower_holds: bool,
    ru_upper_holds: bool,
    as_upper_holds: bool,
    as_vs_ru_holds: bool,
    holds: bool,
}

#[derive(Serialize)]
struct FillRow {
    model_id: String,
    sampler: String,
    t: u64,
    min_slack: f64,
    holds: bool,
}

fn suite_instances(run: &Run, built: Option<&Built>) -> Result<Vec<Instance>, CliError> {
    if let Some(b) = built {
        return Ok(vec![Instance {
            id: b.id.clone(),
            model: b.model.clone(),
        }]);
    }
    let seed = run.config.seed.expect("validated");
    random_rbms(run.config.trials, run.config.max_side, seed).stage("generate suite")
}

/// Runs `f` on every instance in parallel, keeping instance order.
fn per_instance<R: Send>(
    instances: &[Instance],
    stage: &str,
    f: impl Fn(&Instance) -> Result<Vec<R>, CliError> + Sync,
) -> Result<Vec<R>, CliError> {
    let results: Vec<Result<Vec<R>, CliError>> = instances.par_iter().map(&f).collect();
    let mut rows = Vec::new();
    for (inst, r) in instances.iter().zip(results) {
        rows.extend(r.map_err(|e| match e {
            CliError::User { message, .. } => CliError::user(stage, format!("{}: {message}", inst.id)),
            other => other,
        })?);
    }
    Ok(rows)
}

fn verify(run: &mut Run, built: Option<&Built>) -> Result<(), CliError> {
    let suite = run.config.suite.expect("validated");
    let stage = format!("verify {}", suite.as_str());
    let stage = stage.as_str();
    let instances = suite_instances(run, built)?;
    let config = run.config;
    match suite {
        Suite::Theorem1 => {
            let rows = per_instance(&instances, stage, |inst| {
                let space = enumerate_state_space(&inst.model, config.cap).stage(stage)?;
                let sites = SiteKernels::build(&inst.model, &space).stage(stage)?;
                let r = verify_theorem1_with(&sites, space.pi(), config.lazy).stage(stage)?;
                Ok(vec![Theorem1Row {
                    model_id: inst.id.clone(),
                    states: r.states,
                    t_rel_as: r.t_rel_as,
                    t_rel_ru: r.t_rel_ru,
                    holds: r.holds,
                    lemma9_lhs: r.lemma9_lhs,
                    lemma9_rhs: r.lemma9_rhs,
                    lemma9_holds: r.lemma9_holds,
                }])
            })?;
            run.failed_checks += rows.iter().filter(|r| !(r.holds && r.lemma9_holds)).count();
            for r in &rows {
                run.summary.push(SummaryRow::new(stage, &r.model_id, "both", "", "holds", f64::from(u8::from(r.holds))));
            }
            run.emit("verify_theorem1.csv", &rows, &[
                "model_id", "states", "t_rel_as", "t_rel_ru", "holds", "lemma9_lhs", "lemma9_rhs", "lemma9_holds",
            ])
        }
        Suite::Identities => {
            let rows = per_instance(&instances, stage, |inst| {
                let rep = operator_identities(&inst.model, config.cap).stage(stage)?;
                Ok(rep
                    .checks
                    .iter()
                    .map(|c| IdentityRow {
                        model_id: inst.id.clone(),
                        check: c.name.into(),
                        max_deviation: c.max_deviation,
                        holds: c.max_deviation <= IDENTITY_TOLERANCE,
                    })
                    .collect())
            })?;
            run.failed_checks += rows.iter().filter(|r| !r.holds).count();
            run.emit("verify_identities.csv", &rows, &["model_id", "check", "max_deviation", "holds"])
        }
        Suite::Prop5 => {
            let rows = per_instance(&instances, stage, |inst| {
                let space = enumerate_state_space(&inst.model, config.cap).stage(stage)?;
                let sites = SiteKernels::build(&inst.model, &space).stage(stage)?;
                let scan = sites.scan().stage(stage)?;
                let kernels = [
                    sites.random_update(true).stage(stage)?,
                    sites.random_update(false).stage(stage)?,
                    scan.gs1,
                    scan.gs2,
                ];
                let mut out = Vec::new();
                for k in &kernels {
                    let direct = match relaxation_time(k, space.pi()) {
                        Ok(r) => r,
                        // Kernels without a gap (periodic or reducible) are outside the identity.
                        Err(scanorder::Error::NoSpectralGap | scanorder::Error::NotErgodic { .. }) => continue,
                        Err(e) => return Err(CliError::from_core(stage, e)),
                    };
                    let via = relaxation_time_reversibilized(k, space.pi()).stage(stage)?;
                    let rel = (direct.relaxation_time - via.relaxation_time).abs() / direct.relaxation_time;
                    out.push(Prop5Row {
                        model_id: inst.id.clone(),
                        kernel: k.label().into(),
                        relaxation_direct: direct.relaxation_time,
                        relaxation_reversibilized: via.relaxation_time,
                        relative_error: rel,
                        holds: rel <= PROP5_TOLERANCE,
                    });
                }
                Ok(out)
            })?;
            run.failed_checks += rows.iter().filter(|r| !r.holds).count();
            run.emit("verify_prop5.csv", &rows, &[
                "model_id", "kernel", "relaxation_direct", "relaxation_reversibilized", "relative_error", "holds",
            ])
        }
        Suite::Mixing => {
            let rows = per_instance(&instances, stage, |inst| {
                let exact = exact_chains(&inst.model, config, stage)?;
                let r = mixing_bounds_for(&exact.ru, &exact.full_scan, exact.space.pi(), config.t_max).stage(stage)?;
                Ok(vec![MixingBoundsRow {
                    model_id: inst.id.clone(),
                    states: r.states,
                    pi_min: r.pi_min,
                    t_rel_ru: r.t_rel_ru,
                    t_rel_as: r.t_rel_as,
                    t_mix_ru: r.t_mix_ru,
                    t_mix_as: r.t_mix_as,
                    ru_lower_holds: r.ru_lower_holds,
                    ru_upper_holds: r.ru_upper_holds,
                    as_upper_holds: r.as_upper_holds,
                    as_vs_ru_holds: r.as_vs_ru_holds,
                    holds: r.all_hold(),
                }])
            })?;
            run.failed_checks += rows.iter().filter(|r| !r.holds).count();
            run.emit("verify_mixing.csv", &rows, &[
                "model_id", "states", "pi_min", "t_rel_ru", "t_rel_as", "t_mix_ru", "t_mix_as",
                "ru_lower_holds", "ru_upper_holds", "as_upper_holds", "as_vs_ru_holds", "holds",
            ])
        }
        Suite::Fill => {
            let rows = per_instance(&instances, stage, |inst| {
                let exact = exact_chains(&inst.model, config, stage)?;
                let mut out = Vec::new();
                for s in Sampler::ALL {
                    let rep = verify_fill_inequality(kernel_for(&exact, s), exact.space.pi(), &FILL_TIMES).stage(stage)?;
                    for p in rep.points {
                        out.push(FillRow {
                            model_id: inst.id.clone(),
                            sampler: s.as_str().into(),
                            t: p.t,
                            min_slack: p.min_slack,
                            holds: p.min_slack >= -scanorder::mixing::FILL_SLACK,
                        });
                    }
                }
                Ok(out)
            })?;
            run.failed_checks += rows.iter().filter(|r| !r.holds).count();
            run.emit("verify_fill.csv", &rows, &["model_id", "sampler", "t", "min_slack", "holds"])
        }
    }
}
