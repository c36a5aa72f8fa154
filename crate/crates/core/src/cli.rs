//! The `hcouple` command line.
//!
//! Exit status: `0` on success, `1` when the library rejects the input on
//! mathematical grounds (invalid presentation, point outside the cut, failed
//! check, ...), `2` for usage errors and unreadable or unparseable input.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{
    case_invariants, classify, key_interval_radius, objective, solve_monotone, span_rank, Base, Graded, LogSlice,
    PsiIterSpec, Span, DEFAULT_MAX_STEPS,
};
use crate::closure::{ClosureEngine, QueryOp};
use crate::couple::Presentation;
use crate::extend::{adjoin_psi_value, extend_grounded, insert_class, remove_gap, scalar_extend, ExtensionResult, GapSide};
use crate::format::{
    extension_to_value, parse_vector_json, presentation_from_str, presentation_to_string, presentation_to_value,
    vector_json, FORMAT_VERSION,
};
use crate::foundation::VecElement;
use crate::fuzz::{run_suite, Suite};
use crate::handle::ModelHandle;
use crate::lang::{
    bounded_exists, bounded_exists_closure, decide_qf, eval_bounded, parse_formula, ExistsOutcome, Formula, Truth,
};
use crate::model::Couple;
use crate::scalar::{ScalarField, ScalarValue};
use crate::with_model;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (format 1)");

#[derive(Parser, Debug)]
#[command(name = "hcouple", version = VERSION, about = "Exact computation with asymptotic couples")]
pub struct Cli {
    /// Print a JSON run report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the axioms of a presentation file.
    Validate { file: PathBuf },
    /// Apply one extension constructor to a presentation file.
    Extend(ExtendArgs),
    /// Query the lazy H-closure of a seed presentation.
    #[command(subcommand)]
    Closure(ClosureCommand),
    /// Single operations in a named model.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Run the simple-extension classifier.
    Classify(ClassifyArgs),
    /// Solve `gamma + sum c_i psi_(a_1..a_i)(gamma) = tau`.
    Solve(SolveArgs),
    /// Decide the formulas of a file (one per line, `#` comments).
    Eval(FormulaArgs),
    /// Search witnesses for the `exists y. ...` sentences of a file.
    Exists(ExistsArgs),
    /// Run the randomized property suites.
    Fuzz(FuzzArgs),
}

#[derive(Args, Debug)]
struct ExtendArgs {
    file: PathBuf,
    #[command(subcommand)]
    op: ExtendOp,
    /// Write the extended presentation here instead of printing it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ExtendOp {
    /// Adjoin an integral of max Psi.
    Grounded,
    /// Adjoin a positive element with the given ψ-value.
    Adjoin {
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
    },
    /// Insert a class at a slot (0 = above every class).
    Insert {
        #[arg(long)]
        slot: usize,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
    },
    /// Remove a declared gap.
    RemoveGap {
        #[arg(long)]
        negative: bool,
    },
    /// Extend the scalar field, e.g. `Q(sqrt 2)`.
    Scalars {
        #[arg(long)]
        field: String,
    },
}

#[derive(Subcommand, Debug)]
enum ClosureCommand {
    /// The `alpha` with `alpha' = gamma`.
    Integrate {
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
    },
    /// A positive `alpha` with `psi(alpha) = beta`.
    PsiPreimage {
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
    },
    /// Rebuild the stage from a saved history and print it.
    Replay {
        #[arg(long)]
        seed_file: PathBuf,
        #[arg(long)]
        history: PathBuf,
    },
}

#[derive(Args, Debug)]
struct EngineArgs {
    #[arg(long)]
    seed_file: PathBuf,
    /// Replay this history before the query.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Write the updated history here.
    #[arg(long)]
    save_history: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// A model name (`log`, `trans`, `p2`, ...).
    #[arg(long, default_value = "log")]
    model: String,
    /// A presentation file, instead of a named model.
    #[arg(long)]
    model_file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ModelCommand {
    Psi {
        #[command(flatten)]
        m: ModelArgs,
        #[arg(allow_hyphen_values = true)]
        element: String,
    },
    Integrate {
        #[command(flatten)]
        m: ModelArgs,
        #[arg(allow_hyphen_values = true)]
        element: String,
    },
    ClassCmp {
        #[command(flatten)]
        m: ModelArgs,
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Print a presentation model (`p1`, `p2`, `chain<n>`) as JSON.
    Show {
        #[arg(long, default_value = "p1")]
        model: String,
    },
    /// Rank of the span of the elements (transmonomials unless `--model`).
    Rank {
        #[arg(long, default_value = "trans")]
        model: String,
        #[arg(required = true, allow_hyphen_values = true)]
        elements: Vec<String>,
    },
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long, default_value = "trans")]
    model: String,
    /// Generators of the base; closed under ψ before use.
    #[arg(long = "base", allow_hyphen_values = true)]
    base: Vec<String>,
    /// Use the whole log slice `Gamma_L` as the base.
    #[arg(long, conflicts_with = "base")]
    log_slice: bool,
    #[arg(long, allow_hyphen_values = true)]
    beta: String,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, default_value = "log")]
    model: String,
    #[arg(long = "shift", required = true, allow_hyphen_values = true)]
    shifts: Vec<String>,
    #[arg(long = "coeff", required = true, allow_hyphen_values = true)]
    coeffs: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    tau: String,
}

#[derive(Args, Debug)]
struct FormulaArgs {
    #[arg(long, default_value = "log")]
    model: String,
    file: PathBuf,
    #[arg(long, default_value_t = 64)]
    budget: usize,
}

#[derive(Args, Debug)]
struct ExistsArgs {
    #[command(flatten)]
    f: FormulaArgs,
    /// Search over a closure engine seeded with the presentation model.
    #[arg(long)]
    closure: bool,
}

#[derive(Args, Debug)]
struct FuzzArgs {
    #[arg(long)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Run only these suites.
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// Override the number of cases per suite.
    #[arg(long)]
    cases: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(String),
}

type CliResult<T> = Result<T, Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn domain(e: impl ToString) -> Failure {
    Failure::Domain(e.to_string())
}

/// Collected output of one command: the text shown to people, the JSON
/// outputs, check results, and the inputs hashed into the digest.
#[derive(Default)]
struct Run {
    text: String,
    outputs: Vec<Value>,
    checks: Vec<Value>,
    history: Option<Value>,
    hasher: Sha256,
    failed: Option<String>,
}

impl Run {
    fn input(&mut self, label: &str, data: &[u8]) {
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self.hasher.update((data.len() as u64).to_le_bytes());
        self.hasher.update(data);
    }

    fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        self.input(&path.display().to_string(), text.as_bytes());
        Ok(text)
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        let detail = detail.into();
        if !ok && self.failed.is_none() {
            self.failed = Some(format!("{name}: {detail}"));
        }
        self.checks.push(json!({"name": name, "ok": ok, "detail": detail}));
    }
}

fn load_presentation(run: &mut Run, path: &Path) -> CliResult<Presentation> {
    let text = run.read(path)?;
    presentation_from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// `[["b1","1"]]` or `b1 - 1/2*b2`.
fn parse_vec(p: &Presentation, text: &str) -> CliResult<VecElement> {
    let v = if text.trim_start().starts_with('[') {
        parse_vector_json(text).map_err(usage)?
    } else {
        p.parse_vector(text).map_err(usage)?
    };
    p.check_element(&v).map_err(usage)?;
    Ok(v)
}

fn model_handle(run: &mut Run, m: &ModelArgs) -> CliResult<ModelHandle> {
    match &m.model_file {
        Some(path) => Ok(ModelHandle::Presentation(load_presentation(run, path)?)),
        None => {
            run.input("model", m.model.as_bytes());
            m.model.parse().map_err(usage)
        }
    }
}

fn named_model(run: &mut Run, name: &str) -> CliResult<ModelHandle> {
    run.input("model", name.as_bytes());
    name.parse().map_err(usage)
}

fn parse_in<C: Couple>(c: &C, run: &mut Run, text: &str) -> CliResult<C::Elem> {
    run.input("element", text.as_bytes());
    c.parse_element(text).map_err(usage)
}

fn execute(cli: &Cli, run: &mut Run) -> CliResult<()> {
    match &cli.command {
        Command::Validate { file } => validate(run, file),
        Command::Extend(a) => extend(run, a),
        Command::Closure(c) => closure(run, c),
        Command::Model(m) => model(run, m),
        Command::Classify(a) => classify_cmd(run, a),
        Command::Solve(a) => solve(run, a),
        Command::Eval(a) => eval(run, a),
        Command::Exists(a) => exists(run, a),
        Command::Fuzz(a) => fuzz(run, a),
    }
}

fn validate(run: &mut Run, file: &Path) -> CliResult<()> {
    let p = load_presentation(run, file)?;
    let report = p.validate();
    for v in &report.violations {
        run.check("axioms", false, v.to_string());
    }
    if report.is_ok() {
        run.check("axioms", true, "");
        run.line("ok");
    } else {
        run.line(report.to_string());
    }
    run.outputs.push(json!({"valid": report.is_ok(), "classes": p.basis().len()}));
    Ok(())
}

fn extension_text(r: &ExtensionResult) -> String {
    let q = &r.extended;
    let id = &r.new_basis_id;
    let psi = q.psi_of(&VecElement::basis(id)).map(|v| q.render(v)).unwrap_or_default();
    format!(
        "{} step: new class {id} at slot {}, psi({id}) = {psi}, adjoined {}",
        r.report.kind,
        r.report.slot,
        q.render(&r.adjoined)
    )
}

fn extend(run: &mut Run, a: &ExtendArgs) -> CliResult<()> {
    let p = load_presentation(run, &a.file)?;
    let result = match &a.op {
        ExtendOp::Grounded => extend_grounded(&p),
        ExtendOp::Adjoin { beta } => {
            run.input("beta", beta.as_bytes());
            adjoin_psi_value(&p, &parse_vec(&p, beta)?)
        }
        ExtendOp::Insert { slot, beta } => {
            run.input("beta", beta.as_bytes());
            run.input("slot", slot.to_string().as_bytes());
            insert_class(&p, *slot, &parse_vec(&p, beta)?)
        }
        ExtendOp::RemoveGap { negative } => {
            remove_gap(&p, if *negative { GapSide::Negative } else { GapSide::Positive })
        }
        ExtendOp::Scalars { field } => {
            run.input("field", field.as_bytes());
            let target: ScalarField = field.parse().map_err(usage)?;
            let q = scalar_extend(&p, target).map_err(domain)?;
            run.check("psi preserved", q.psi_values() == p.psi_values(), "");
            run.check("validates", q.validate().is_ok(), q.validate().to_string());
            let text = presentation_to_string(&q);
            emit_presentation(run, a.out.as_deref(), &text)?;
            run.outputs.push(presentation_to_value(&q));
            return Ok(());
        }
    };
    let r = result.map_err(domain)?;
    run.check("re-validation", r.extended.validate().is_ok(), r.extended.validate().to_string());
    run.line(extension_text(&r));
    let text = presentation_to_string(&r.extended);
    emit_presentation(run, a.out.as_deref(), &text)?;
    run.outputs.push(extension_to_value(&r));
    Ok(())
}

/// Saves to `path` when given, prints otherwise.
fn emit_presentation(run: &mut Run, path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(_) => write_out(path, &format!("{text}\n")),
        None => {
            run.line(text);
            Ok(())
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    if let Some(path) = path {
        fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn engine(run: &mut Run, a: &EngineArgs) -> CliResult<ClosureEngine> {
    let seed = load_presentation(run, &a.seed_file)?;
    match &a.history {
        Some(h) => {
            let text = run.read(h)?;
            let value: Value = serde_json::from_str(&text).map_err(usage)?;
            ClosureEngine::replay(seed, &value).map_err(domain)
        }
        None => ClosureEngine::new(seed).map_err(domain),
    }
}

fn closure(run: &mut Run, c: &ClosureCommand) -> CliResult<()> {
    let (mut e, save, op, text) = match c {
        ClosureCommand::Replay { seed_file, history } => {
            let seed = load_presentation(run, seed_file)?;
            let text = run.read(history)?;
            let value: Value = serde_json::from_str(&text).map_err(usage)?;
            let e = ClosureEngine::replay(seed, &value).map_err(domain)?;
            let fails = e.answer_failures();
            run.check("answers hold", fails.is_empty(), fails.join("; "));
            let stage = presentation_to_string(e.stage());
            run.line(&stage);
            run.outputs.push(presentation_to_value(e.stage()));
            run.history = Some(e.history_json());
            return Ok(());
        }
        ClosureCommand::Integrate { engine: a, gamma } => (engine(run, a)?, a.save_history.clone(), QueryOp::Integrate, gamma),
        ClosureCommand::PsiPreimage { engine: a, beta } => (engine(run, a)?, a.save_history.clone(), QueryOp::PsiPreimage, beta),
    };
    run.input("query", format!("{op} {text}").as_bytes());
    let input = parse_vec(e.stage(), text)?;
    let before = e.steps().len();
    let answer = e.query(op, &input).map_err(domain)?;
    let stage = e.stage();
    run.line(stage.render(&answer));
    if let Some(step) = e.steps().get(before) {
        run.line(extension_text(step));
    }
    let fails = e.answer_failures();
    run.check("answers hold", fails.is_empty(), fails.join("; "));
    run.outputs.push(json!({
        "op": op.to_string(),
        "input": vector_json(stage.basis(), &input),
        "answer": vector_json(stage.basis(), &answer),
        "rendered": stage.render(&answer),
        "extended": e.steps().len() > before,
        "stage": presentation_to_value(stage),
    }));
    let history = e.history_json();
    if let Some(path) = save {
        let text = serde_json::to_string_pretty(&history).expect("history serializes") + "\n";
        write_out(Some(&path), &text)?;
    }
    run.history = Some(history);
    Ok(())
}

fn model(run: &mut Run, m: &ModelCommand) -> CliResult<()> {
    match m {
        ModelCommand::Psi { m, element } => {
            let h = model_handle(run, m)?;
            with_model!(&h, c => {
                let a = parse_in(c, run, element)?;
                let v = Couple::psi(c, &a).map_or("inf".to_string(), |p| p.to_string());
                run.line(&v);
                run.outputs.push(json!({"psi": v}));
            });
        }
        ModelCommand::Integrate { m, element } => {
            let h = model_handle(run, m)?;
            with_model!(&h, c => {
                let g = parse_in(c, run, element)?;
                let a = c.try_integrate(&g).ok_or_else(|| {
                    domain(format!("{g} has no integral in {}; try `closure integrate`", c.name()))
                })?;
                run.check("alpha' = gamma", Couple::derive(c, &a).as_ref() == Some(&g), "");
                run.line(a.to_string());
                run.outputs.push(json!({"integral": a.to_string()}));
            });
        }
        ModelCommand::ClassCmp { m, a, b } => {
            let h = model_handle(run, m)?;
            with_model!(&h, c => {
                let x = parse_in(c, run, a)?;
                let y = parse_in(c, run, b)?;
                let word = match c.class_cmp(&x, &y) {
                    std::cmp::Ordering::Less => "less",
                    std::cmp::Ordering::Equal => "equal",
                    std::cmp::Ordering::Greater => "greater",
                };
                run.line(word);
                run.outputs.push(json!({"classCmp": word}));
            });
        }
        ModelCommand::Show { model } => {
            let ModelHandle::Presentation(p) = named_model(run, model)? else {
                return Err(usage(format!("{model} is not a finite presentation")));
            };
            run.line(presentation_to_string(&p));
            run.outputs.push(presentation_to_value(&p));
        }
        ModelCommand::Rank { model, elements } => {
            let h = named_model(run, model)?;
            with_model!(&h, c => {
                let xs = elements.iter().map(|t| parse_in(c, run, t)).collect::<CliResult<Vec<_>>>()?;
                let r = span_rank(c, &xs);
                run.line(r.to_string());
                run.outputs.push(json!({"rank": r}));
            });
        }
    }
    Ok(())
}

fn report_classification<C: Couple, B: Base<C>>(
    run: &mut Run,
    c: &C,
    base: &B,
    beta: &C::Elem,
    max_steps: usize,
) -> CliResult<()> {
    let r = classify(c, base, beta, max_steps).map_err(domain)?;
    run.line(format!("verdict: {}", r.verdict));
    for (i, b) in r.betas.iter().enumerate() {
        let d = r.daggers.get(i).map_or("-".to_string(), |x| x.to_string());
        run.line(format!("  beta_{i} = {b}, alpha_{i} = {}, dagger = {d}", r.alphas[i]));
    }
    let mut out = r.to_json();
    match case_invariants(c, base, &r) {
        Ok(checks) => {
            for item in &checks.items {
                run.check(&item.name, item.ok, item.detail.clone());
            }
            run.line(format!("invariants: {}", if checks.passed() { "ok" } else { "FAILED" }));
            out["invariants"] = checks.to_json();
        }
        Err(e) => run.line(format!("invariants: not checked ({e})")),
    }
    if let Ok(delta) = key_interval_radius(c, &r) {
        run.line(format!("key interval radius: {delta}"));
        out["keyIntervalRadius"] = json!(delta.to_string());
    }
    run.outputs.push(out);
    Ok(())
}

fn classify_cmd(run: &mut Run, a: &ClassifyArgs) -> CliResult<()> {
    let h = named_model(run, &a.model)?;
    run.input("beta", a.beta.as_bytes());
    if a.log_slice {
        return match &h {
            ModelHandle::Gap(c) => {
                let beta = parse_in(c, run, &a.beta)?;
                report_classification(run, c, &LogSlice, &beta, a.max_steps)
            }
            ModelHandle::GapRemoved(c) => {
                let beta = parse_in(c, run, &a.beta)?;
                report_classification(run, c, &LogSlice, &beta, a.max_steps)
            }
            ModelHandle::Trans(c) => {
                let beta = parse_in(c, run, &a.beta)?;
                report_classification(run, c, &LogSlice, &beta, a.max_steps)
            }
            _ => Err(usage(format!("--log-slice needs a gap or transmonomial model, not {}", a.model))),
        };
    }
    with_model!(&h, c => {
        let gens = a.base.iter().map(|t| parse_in(c, run, t)).collect::<CliResult<Vec<_>>>()?;
        let base = Span::psi_closed(c, &gens, 64).map_err(domain)?;
        let beta = parse_in(c, run, &a.beta)?;
        report_classification(run, c, &base, &beta, a.max_steps)
    })
}

fn solve_in<C: Graded>(run: &mut Run, c: &C, a: &SolveArgs) -> CliResult<()> {
    let shifts = a.shifts.iter().map(|t| parse_in(c, run, t)).collect::<CliResult<Vec<_>>>()?;
    let coeffs = a
        .coeffs
        .iter()
        .map(|t| {
            run.input("coeff", t.as_bytes());
            t.parse::<ScalarValue>().map_err(usage)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let tau = parse_in(c, run, &a.tau)?;
    let spec = PsiIterSpec::new(shifts, coeffs).map_err(usage)?;
    let g = solve_monotone(c, &spec, &tau).map_err(domain)?;
    run.check("f(gamma) = tau", objective(c, &spec, &g).as_ref() == Some(&tau), "");
    run.line(g.to_string());
    run.outputs.push(json!({"gamma": g.to_string(), "tau": tau.to_string()}));
    Ok(())
}

fn solve(run: &mut Run, a: &SolveArgs) -> CliResult<()> {
    match named_model(run, &a.model)? {
        ModelHandle::Log(c) => solve_in(run, &c, a),
        ModelHandle::Presentation(p) => solve_in(run, &p, a),
        _ => Err(usage(format!("solve needs `log` or a presentation model, not {}", a.model))),
    }
}

fn formulas(run: &mut Run, path: &Path) -> CliResult<Vec<(usize, Formula)>> {
    let text = run.read(path)?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f = parse_formula(line).map_err(|e| usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push((i + 1, f));
    }
    Ok(out)
}

fn eval(run: &mut Run, a: &FormulaArgs) -> CliResult<()> {
    let h = named_model(run, &a.model)?;
    let fs = formulas(run, &a.file)?;
    with_model!(&h, c => {
        for (_, f) in &fs {
            let value = if f.is_quantifier_free() {
                if decide_qf(c, f).map_err(domain)? { Truth::True } else { Truth::False }
            } else {
                eval_bounded(c, f, a.budget).map_err(domain)?
            };
            let word = match value {
                Truth::True => "true",
                Truth::False => "false",
                Truth::Unknown => "unknown",
            };
            run.line(format!("{word}\t{f}"));
            run.outputs.push(json!({"formula": f.to_string(), "value": word, "model": a.model}));
        }
    });
    Ok(())
}

fn exists(run: &mut Run, a: &ExistsArgs) -> CliResult<()> {
    let h = named_model(run, &a.f.model)?;
    let fs = formulas(run, &a.f.file)?;
    for (line, f) in &fs {
        if !matches!(f, Formula::Exists(_, body) if body.is_quantifier_free()) {
            return Err(usage(format!("{}:{line}: expected `exists y. phi` with phi quantifier-free", a.f.file.display())));
        }
    }
    let emit = |run: &mut Run, f: &Formula, w: Option<String>| {
        match &w {
            Some(w) => run.line(format!("witness {w}\t{f}")),
            None => run.line(format!("unknown within budget\t{f}")),
        }
        run.outputs.push(json!({"formula": f.to_string(), "witness": w, "model": a.f.model}));
    };
    if a.closure {
        let ModelHandle::Presentation(p) = h else {
            return Err(usage("--closure needs a presentation model"));
        };
        let mut e = ClosureEngine::new(p).map_err(domain)?;
        for (_, f) in &fs {
            let w = match bounded_exists_closure(&mut e, f, a.f.budget).map_err(domain)? {
                ExistsOutcome::Witness(w) => Some(e.stage().render(&w)),
                ExistsOutcome::UnknownWithinBudget => None,
            };
            emit(run, f, w);
        }
        run.history = Some(e.history_json());
        return Ok(());
    }
    with_model!(&h, c => {
        for (_, f) in &fs {
            let w = match bounded_exists(c, f, a.f.budget, &[]).map_err(domain)? {
                ExistsOutcome::Witness(w) => Some(w.to_string()),
                ExistsOutcome::UnknownWithinBudget => None,
            };
            emit(run, f, w);
        }
    });
    Ok(())
}

fn fuzz(run: &mut Run, a: &FuzzArgs) -> CliResult<()> {
    run.input("seed", a.seed.to_string().as_bytes());
    let suites = if a.suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        a.suites.iter().map(|s| s.parse()).collect::<Result<Vec<Suite>, _>>().map_err(usage)?
    };
    for s in suites {
        let cases = a.cases.unwrap_or_else(|| s.default_cases());
        run.input("suite", format!("{s}:{cases}").as_bytes());
        let r = run_suite(s, a.seed, cases, a.jobs);
        run.check(&s.to_string(), r.passed(), format!("{} violations", r.violation_count));
        run.line(r.to_string());
        run.outputs.push(r.to_json());
    }
    Ok(())
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Extend(a) => match a.op {
                ExtendOp::Grounded => "extend grounded",
                ExtendOp::Adjoin { .. } => "extend adjoin",
                ExtendOp::Insert { .. } => "extend insert",
                ExtendOp::RemoveGap { .. } => "extend remove-gap",
                ExtendOp::Scalars { .. } => "extend scalars",
            },
            Command::Closure(ClosureCommand::Integrate { .. }) => "closure integrate",
            Command::Closure(ClosureCommand::PsiPreimage { .. }) => "closure psi-preimage",
            Command::Closure(ClosureCommand::Replay { .. }) => "closure replay",
            Command::Model(ModelCommand::Psi { .. }) => "model psi",
            Command::Model(ModelCommand::Integrate { .. }) => "model integrate",
            Command::Model(ModelCommand::ClassCmp { .. }) => "model class-cmp",
            Command::Model(ModelCommand::Show { .. }) => "model show",
            Command::Model(ModelCommand::Rank { .. }) => "model rank",
            Command::Classify(_) => "classify",
            Command::Solve(_) => "solve",
            Command::Eval(_) => "eval",
            Command::Exists(_) => "exists",
            Command::Fuzz(_) => "fuzz",
        }
    }
}

fn report(cli: &Cli, argv: &[String], run: Run, status: &str) -> Value {
    let command = cli.command.name();
    let digest = run.hasher.finalize();
    let mut hex = String::new();
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    json!({
        "command": command,
        "arguments": argv.iter().skip(1).collect::<Vec<_>>(),
        "inputsDigest": format!("sha256:{hex}"),
        "status": status,
        "outputs": run.outputs,
        "checks": run.checks,
        "history": run.history,
        "version": env!("CARGO_PKG_VERSION"),
        "formatVersion": FORMAT_VERSION,
    })
}

/// Runs the command line `argv` (including the program name), writing to
/// `out` and `err`; returns the exit status.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut run = Run::default();
    run.input("argv", argv.iter().skip(1).cloned().collect::<Vec<_>>().join("\u{0}").as_bytes());
    let result = execute(&cli, &mut run);
    let code = match (&result, &run.failed) {
        (Err(Failure::Usage(_)), _) => 2,
        (Err(Failure::Domain(_)), _) | (Ok(()), Some(_)) => 1,
        (Ok(()), None) => 0,
    };
    let message = match &result {
        Err(Failure::Usage(m)) | Err(Failure::Domain(m)) => Some(m.clone()),
        Ok(()) => run.failed.clone(),
    };
    let status = match code {
        0 => "ok",
        1 => "domain-error",
        _ => "usage-error",
    };
    if cli.json {
        let mut doc = report(&cli, argv, run, status);
        doc["error"] = json!(message);
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
    } else {
        let _ = out.write_all(run.text.as_bytes());
        if let Some(m) = message {
            let kind = if code == 2 { "usage error" } else { "error" };
            let _ = writeln!(err, "{kind}: {m}");
        }
    }
    code
}

pub fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let code = run(&argv, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (u8, String, String) {
        let argv: Vec<String> = std::iter::once("hcouple").chain(args.iter().copied()).map(String::from).collect();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(&argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn version_mentions_the_format() {
        let (code, out, _) = call(&["--version"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), format!("hcouple {} (format {FORMAT_VERSION})", env!("CARGO_PKG_VERSION")));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["fuzz"]).0, 2, "--seed is required");
        assert_eq!(call(&["model", "rank", "exp(exp(x))", "exp(exp(2*x))", "exp(exp(3*x))"]), (0, "3\n".into(), String::new()));
        assert_eq!(call(&["model", "integrate", "--model", "p1", "b1"]).0, 1);
        assert_eq!(call(&["model", "psi", "--model", "log", "e0 +"]).0, 2);
    }

    #[test]
    fn json_reports_are_deterministic() {
        let args = ["--json", "model", "psi", "--model", "log", "3*e1 - 5*e4"];
        let (code, a, _) = call(&args);
        let (_, b, _) = call(&args);
        assert_eq!(code, 0);
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["outputs"][0]["psi"], "-e0 - e1");
        assert!(v["inputsDigest"].as_str().unwrap().starts_with("sha256:"));
    }
}
