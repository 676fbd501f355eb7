use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use concept_compose::eval::{
    run_ablation, AblationMethod, AblationOptions, AblationOutcome, BenchmarkConfig, EvalCase,
    EvalReport,
};
use concept_compose::io::{self, read_subspace_dir, read_vector, write_subspace_dir};
use concept_compose::{
    build_subspace, compose_multi_with, default_rank, load_concept_matrix, load_prompt_bank,
    spectrum_report, Binding, CompositionMode, CompositionPlan, ConceptManifest, CrossTerms,
    EmbeddingVector, Error, PlanWarning,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult, EXIT_DATA};
use crate::{BenchmarkArgs, BuildArgs, ComposeArgs, CrossTermsArg, EvalArgs, InspectArgs};

fn canonical(path: &Path) -> CliResult<PathBuf> {
    fs::canonicalize(path).map_err(|e| {
        Error::Io {
            path: path.to_path_buf(),
            source: e,
        }
        .into()
    })
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => Ok(io::write_atomic(path, text.as_bytes())?),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::new(EXIT_DATA, "io_error", e.to_string()))
        }
    }
}

fn print_json(value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    emit(&text, None)
}

pub fn build(args: BuildArgs) -> CliResult<()> {
    if args.out.exists() && !args.force {
        return Err(Error::AlreadyExists { path: args.out }.into());
    }
    let bank_path = canonical(&args.bank)?;
    let embeddings_path = canonical(&args.embeddings)?;
    let bank = load_prompt_bank(&bank_path)?;
    let rank = match (args.rank, args.rank_class) {
        (Some(r), _) => r,
        (None, Some(class)) => default_rank(class.into(), None)?,
        (None, None) => default_rank(bank.rank_class, None)?,
    };

    let dim = io::read_matrix(&embeddings_path)?.dim();
    let checksum = io::sha256_file(&embeddings_path)?;
    let manifest = ConceptManifest {
        concept_name: bank.concept_name.clone(),
        prompt_bank_path: bank_path,
        embedding_matrix_path: embeddings_path,
        rank,
        source: args.source.into(),
        dim,
        checksum,
    };
    let mut matrix = load_concept_matrix(&manifest)?;
    if args.normalize_rows {
        matrix = matrix.l2_normalized_rows();
    }
    let subspace = build_subspace(
        &matrix,
        rank,
        manifest.concept_name.clone(),
        manifest.source,
    )?;
    write_subspace_dir(&args.out, &subspace, &manifest, args.force)?;

    let mut warnings: Vec<Value> = subspace
        .warnings()
        .iter()
        .map(|w| serde_json::to_value(w).map_err(Error::from))
        .collect::<Result<_, _>>()?;
    if bank.duplicates_dropped() > 0 {
        warnings.push(json!({
            "kind": "duplicate-prompts-dropped",
            "count": bank.duplicates_dropped(),
        }));
    }
    print_json(&json!({
        "concept_name": manifest.concept_name,
        "rank": rank,
        "dim": dim,
        "prompts": bank.len(),
        "source": manifest.source,
        "normalized_rows": args.normalize_rows,
        "out": args.out.display().to_string(),
        "warnings": warnings,
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompositionManifest {
    reference_embedding_path: PathBuf,
    bindings: Vec<BindingEntry>,
    #[serde(default)]
    mode: CompositionMode,
    #[serde(default)]
    passthrough_text_prompt: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BindingEntry {
    concept_embedding_path: PathBuf,
    subspace_dir: PathBuf,
}

#[derive(Debug, Serialize)]
struct ProjectionNorm {
    concept: String,
    norm: f64,
}

fn dim_mismatch(reference: &Path, offending: &Path, expected: usize, found: usize) -> CliError {
    CliError::new(
        EXIT_DATA,
        "dim_mismatch",
        format!(
            "{} has dimension {found}, but the reference {} has dimension {expected}",
            offending.display(),
            reference.display()
        ),
    )
    .with(
        "paths",
        vec![
            reference.display().to_string(),
            offending.display().to_string(),
        ],
    )
    .with("expected", expected)
    .with("found", found)
}

pub fn compose(args: ComposeArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.manifest).map_err(|e| Error::Io {
        path: args.manifest.clone(),
        source: e,
    })?;
    let manifest: CompositionManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: args.manifest.clone(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let base = match args.manifest.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };

    let reference_path = io::resolve(&base, &manifest.reference_embedding_path);
    let reference = read_vector(&reference_path)?;
    let d = reference.dim();
    let mut bindings = Vec::with_capacity(manifest.bindings.len());
    for entry in &manifest.bindings {
        let concept_path = io::resolve(&base, &entry.concept_embedding_path);
        let subspace_dir = io::resolve(&base, &entry.subspace_dir);
        let concept = read_vector(&concept_path)?;
        if concept.dim() != d {
            return Err(dim_mismatch(
                &reference_path,
                &concept_path,
                d,
                concept.dim(),
            ));
        }
        let (subspace, _) = read_subspace_dir(&subspace_dir)?;
        if subspace.dim() != d {
            return Err(dim_mismatch(
                &reference_path,
                &subspace_dir,
                d,
                subspace.dim(),
            ));
        }
        bindings.push(Binding::new(concept, subspace));
    }

    let plan = CompositionPlan::new(reference, bindings, manifest.mode)?;
    let composite = match (args.cross_terms, plan.mode()) {
        (CrossTermsArg::Keep, _) => plan.compose()?,
        (CrossTermsArg::SubtractDiagnostic, CompositionMode::OneStep) => compose_multi_with(
            plan.reference(),
            plan.bindings(),
            CrossTerms::SubtractDiagnostic,
        )?,
        (CrossTermsArg::SubtractDiagnostic, CompositionMode::Sequential) => {
            return Err(CliError::usage(
                "--cross-terms subtract-diagnostic only applies to one-step composition",
            ))
        }
    };
    io::write_vector(&args.out, &composite)?;

    let norms: Vec<ProjectionNorm> = plan
        .bindings()
        .iter()
        .map(|b| {
            Ok(ProjectionNorm {
                concept: b.subspace.concept_name().to_string(),
                norm: b.subspace.project(&b.concept)?.norm(),
            })
        })
        .collect::<Result<_, Error>>()?;
    let warnings: Vec<String> = plan
        .warnings()
        .iter()
        .map(|w| match w {
            PlanWarning::DuplicateConcept { name, count } => {
                format!("concept `{name}` is bound {count} times")
            }
        })
        .collect();

    let mut summary = json!({
        "norm_ref": plan.reference().norm(),
        "norm_comp": composite.norm(),
        "per_concept_projection_norms": norms,
        "mode": plan.mode(),
        "warnings": warnings,
    });
    if let Some(prompt) = manifest.passthrough_text_prompt {
        summary["passthrough_text_prompt"] = json!(prompt);
    }
    print_json(&summary)
}

pub fn inspect(args: InspectArgs) -> CliResult<()> {
    let mut matrix = io::read_matrix(&args.embeddings)?;
    if args.normalize_rows {
        matrix = matrix.l2_normalized_rows();
    }
    let report = spectrum_report(&matrix)?;
    let limit = args.top.unwrap_or(usize::MAX);
    let mut out = String::from("index,sigma,energy_fraction\n");
    for (i, (sigma, energy)) in report
        .singular_values
        .iter()
        .zip(&report.energy_fraction)
        .take(limit)
        .enumerate()
    {
        out.push_str(&format!("{},{sigma:?},{energy:?}\n", i + 1));
    }
    emit(&out, None)
}

fn named_path(spec: &str) -> (String, PathBuf) {
    if let Some((name, path)) = spec.split_once('=') {
        if !name.is_empty() && !name.contains(['/', '\\']) {
            return (name.to_string(), PathBuf::from(path));
        }
    }
    let path = PathBuf::from(spec);
    let name = path
        .file_stem()
        .map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
    (name, path)
}

fn load_nonzero(path: &Path) -> CliResult<EmbeddingVector> {
    let v = read_vector(path)?;
    if v.norm() == 0.0 {
        return Err(CliError::new(
            EXIT_DATA,
            "zero_vector",
            format!(
                "{}: similarity is undefined for a zero vector",
                path.display()
            ),
        )
        .with_path(path));
    }
    Ok(v)
}

fn load_named(specs: &[String]) -> CliResult<Vec<(String, EmbeddingVector)>> {
    specs
        .iter()
        .map(|spec| {
            let (name, path) = named_path(spec);
            Ok((name, load_nonzero(&path)?))
        })
        .collect()
}

pub fn eval(args: EvalArgs) -> CliResult<()> {
    let generated = load_nonzero(&args.generated)?;
    let case = EvalCase::new(
        generated,
        load_named(&args.concepts)?,
        load_named(&args.leaks)?,
    )?;
    let report = EvalReport::from_cases(&[case])?;
    let text = if args.json {
        let mut t = report.to_json()?;
        t.push('\n');
        t
    } else {
        report.to_csv()?
    };
    emit(&text, args.out.as_deref())
}

fn benchmark_csv(outcomes: &[AblationOutcome]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::from(Error::from(e));
    w.write_record([
        "method",
        "concept",
        "similarity",
        "leakage",
        "residual_preservation",
    ])
    .map_err(csv_err)?;
    let field = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:?}"));
    for o in outcomes {
        for (case, residual) in o.report.cases.iter().zip(&o.residual_preservation) {
            w.write_record([
                o.method.to_string(),
                case.concept.clone(),
                field(case.similarity),
                field(case.leakage),
                format!("{residual:?}"),
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::new(EXIT_DATA, "csv_error", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn benchmark(args: BenchmarkArgs) -> CliResult<()> {
    let config = BenchmarkConfig::new(args.seed, args.dim, args.concepts, args.rank)
        .with_residual_dims(args.residual_dims)
        .with_prompts_per_concept(args.prompts);
    let benchmark = config.build()?;
    let options = AblationOptions {
        alpha: args.alpha,
        image_samples: args.samples,
        noise: args.noise,
        trials: args.trials,
    };
    let methods: Vec<AblationMethod> = if args.method.is_empty() {
        AblationMethod::ALL.to_vec()
    } else {
        args.method.into_iter().map(Into::into).collect()
    };
    let outcomes = methods
        .into_iter()
        .map(|m| run_ablation(&benchmark, m, &options))
        .collect::<Result<Vec<_>, _>>()?;

    let text = if args.json {
        let mut t = serde_json::to_string_pretty(&json!({
            "config": config,
            "options": options,
            "results": outcomes,
        }))
        .map_err(Error::from)?;
        t.push('\n');
        t
    } else {
        benchmark_csv(&outcomes)?
    };
    emit(&text, args.out.as_deref())
}
