//! `ncup`: run verification suites, enumerate minimizers, solve uniqueness
//! systems and dump model data.
//!
//! Exit codes: 0 pass, 1 usage/config/IO error, 2 check failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ncup_core::extremizers::{
    biprojection_from_subgroup, bishift_certificate, bishift_group, collinearity_residual, enumerate_group_bishifts,
    enumerate_shifts, is_biprojection, minimizer_report, uniqueness_space, ExtremizerError, Handedness, ShiftLabel,
    DEFAULT_TOL,
};
use ncup_core::group::{commutator_subgroup, enumerate_subgroups, one_dim_characters, Subgroup};
use ncup_core::harness::{run_suite, SuiteConfig, SuiteKind, SuiteReport};
use ncup_core::linalg::CMat;
use ncup_core::{Side, TwoBoxPair};

#[derive(Parser)]
#[command(name = "ncup", version, about = "Uncertainty principles on two-box spaces of group, spin and fixed-point models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suites and write a report.
    Verify(VerifyArgs),
    /// Enumerate all bi-shifts of a group model and certify each one.
    Minimizers(MinimizerArgs),
    /// Solve the uniqueness system for a pair of shifts.
    Uniqueness(UniquenessArgs),
    /// Write Fourier matrices, Jones projections and biprojections.
    Dump(DumpArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct VerifyArgs {
    /// Model spec, e.g. "group:cyclic:6", "spin:4", "fixedpoint:cyclic:3-regular". Repeatable.
    #[arg(long)]
    model: Vec<String>,
    /// JSON suite config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// KEY=VALUE for one tolerance, or a bare number for all of them. Repeatable.
    #[arg(long)]
    tol: Vec<String>,
    /// Restrict to these suites. Repeatable.
    #[arg(long)]
    suite: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    parallel: Option<usize>,
    /// Sparse samples for the Tao probe.
    #[arg(long)]
    tao_budget: Option<usize>,
}

#[derive(Args)]
struct MinimizerArgs {
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct UniquenessArgs {
    #[arg(long)]
    model: Option<String>,
    /// Subgroup members, comma separated.
    #[arg(long)]
    subgroup: Option<String>,
    /// Element of the right coset Hg selecting Bg.
    #[arg(long)]
    g: Option<usize>,
    /// Character index selecting the shift of B̃.
    #[arg(long)]
    h: Option<usize>,
    /// Character index of the comparison bi-shift (defaults to --h).
    #[arg(long)]
    chi: Option<usize>,
    /// Subgroup whose B̃ supplies the tilde shift (defaults to --subgroup).
    #[arg(long)]
    tilde_subgroup: Option<String>,
    /// Every (coset, character) pair of the subgroup, or of every subgroup.
    #[arg(long)]
    all_pairs: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long)]
    model: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "dump")]
    out: PathBuf,
}

/// Errors that end the process with code 1.
struct Usage(String);

enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Minimizers(a) => minimizers(a),
        Command::Uniqueness(a) => uniqueness(a),
        Command::Dump(a) => dump(a),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            if let Some(Usage(msg)) = e.downcast_ref::<Usage>() {
                eprintln!("error: {msg}");
                let mut cmd = Cli::command();
                eprintln!("{}", cmd.render_usage());
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}

impl std::fmt::Debug for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

fn load_pair(model: Option<&String>) -> Result<TwoBoxPair> {
    let Some(spec) = model else { return usage("--model is required") };
    TwoBoxPair::from_spec(spec).with_context(|| format!("model `{spec}`"))
}

fn parse_members(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>().map_err(|_| anyhow!(Usage(format!("bad subgroup member `{t}`")))))
        .collect()
}

fn format_for(out: Option<&Path>, explicit: Option<Format>) -> Format {
    explicit.unwrap_or(match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("csv") => Format::Csv,
        _ => Format::Json,
    })
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_csv<T: serde::Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!(e.to_string()))?)?)
}

fn apply_tolerance(cfg: &mut SuiteConfig, spec: &str) -> Result<()> {
    let bad = || Usage(format!("bad --tol `{spec}` (expected KEY=VALUE or a number)"));
    match spec.split_once('=') {
        Some((k, v)) => {
            let v: f64 = v.trim().parse().map_err(|_| bad())?;
            cfg.tolerances.set(k.trim(), v)?;
        }
        None => {
            let v: f64 = spec.trim().parse().map_err(|_| bad())?;
            cfg.tolerances.set_all(v)?;
        }
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<Outcome> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            SuiteConfig::from_json_str(&text)?
        }
        None => {
            if a.model.is_empty() {
                return usage("--model is required (or --config with models)");
            }
            SuiteConfig::default()
        }
    };
    if !a.model.is_empty() {
        cfg.models = a.model.clone();
    }
    if let Some(n) = a.samples {
        cfg.samples = n;
    }
    if let Some(s) = a.seed {
        cfg.master_seed = s;
    }
    for t in &a.tol {
        apply_tolerance(&mut cfg, t)?;
    }
    if !a.suite.is_empty() {
        cfg.suites = a.suite.iter().map(|s| s.parse::<SuiteKind>().map_err(|e| anyhow!(Usage(e)))).collect::<Result<_>>()?;
    }
    if let Some(p) = a.parallel {
        cfg.parallelism = p;
    }
    if let Some(b) = a.tao_budget {
        cfg.tao_budget = b;
    }
    if let Some(out) = &a.out {
        match format_for(Some(out), a.format) {
            Format::Json => cfg.output.json = Some(out.clone()),
            Format::Csv => cfg.output.csv = Some(out.clone()),
        }
    }
    let report = run_suite(&cfg)?;
    print_summary(&report);
    if let Some(p) = &cfg.output.json {
        write_output(Some(p), &report.to_json_string())?;
    }
    if let Some(p) = &cfg.output.csv {
        write_output(Some(p), &to_csv(&report.csv_rows())?)?;
    }
    if cfg.output.json.is_none() && cfg.output.csv.is_none() && a.format == Some(Format::Csv) {
        write_output(None, &to_csv(&report.csv_rows())?)?;
    }
    Ok(if report.passed() { Outcome::Pass } else { Outcome::Fail })
}

fn print_summary(r: &SuiteReport) {
    for (model, c) in r.checks() {
        println!(
            "{} {:<34} {:<30} samples={:<6} min_margin={:+.3e} max_violation={:.3e}",
            if c.passed { "pass" } else { "FAIL" },
            model,
            c.name,
            c.samples,
            c.min_margin,
            c.max_violation
        );
    }
    for m in &r.models {
        for p in &m.probes {
            println!("probe {:<33} {:<30} {}", m.model, p.name, p.note);
        }
    }
    println!("{} checks, {} failed", r.summary.checks, r.summary.failed);
}

#[derive(serde::Serialize)]
struct CertificateRow {
    subgroup: String,
    coset_rep: usize,
    character: String,
    donoho_stark: bool,
    hirschman_beckner: bool,
    extremal_bipartial: bool,
    partial_isometry_preimage: bool,
    bishift: bool,
}

fn minimizers(a: MinimizerArgs) -> Result<Outcome> {
    let pair = load_pair(a.model.as_ref())?;
    let g = pair.group().ok_or_else(|| anyhow!("minimizers needs a group model, got {}", pair.label()))?.clone();
    let subs = enumerate_subgroups(&g)?;
    let expected: usize = subs.iter().map(|h| (h.order() / commutator_subgroup(h).order()) * h.index()).sum();
    let list = enumerate_group_bishifts(&pair)?;
    let mut certs = Vec::with_capacity(list.len());
    let mut rows = Vec::with_capacity(list.len());
    let mut all = true;
    for b in &list {
        let r = minimizer_report(&pair, &b.element)?;
        all &= r.verdicts.all();
        let cert = bishift_certificate(&pair, b, &r);
        if let ncup_core::extremizers::Construction::Group { subgroup, character, coset_rep, .. } = &b.construction {
            let chars: Vec<String> = subgroup
                .members()
                .iter()
                .map(|&h| {
                    let (k, n) = character.exponent(h);
                    format!("{h}:{k}/{n}")
                })
                .collect();
            let v = r.verdicts;
            rows.push(CertificateRow {
                subgroup: join(subgroup.members()),
                coset_rep: *coset_rep,
                character: chars.join(" "),
                donoho_stark: v.donoho_stark_equality,
                hirschman_beckner: v.hirschman_beckner_equality,
                extremal_bipartial: v.extremal_bipartial_isometry,
                partial_isometry_preimage: v.partial_isometry_extremal_preimage,
                bishift: v.bishift_of_biprojection,
            });
        }
        certs.push(cert);
    }
    let count_ok = list.len() == expected;
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "model": pair.label(),
            "count": list.len(),
            "expected_count": expected,
            "all_predicates_hold": all,
            "certificates": certs,
        }))?,
        Format::Csv => to_csv(&rows)?,
    };
    write_output(a.out.as_deref(), &text)?;
    if a.out.is_some() {
        println!("{}: {} certificates (expected {}), all predicates hold: {}", pair.label(), list.len(), expected, all);
    }
    Ok(if all && count_ok { Outcome::Pass } else { Outcome::Fail })
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(serde::Serialize)]
struct UniquenessRow {
    subgroup: String,
    coset_rep: usize,
    tilde_character: usize,
    comparison_character: usize,
    dimension: usize,
    collinearity_residual: Option<f64>,
}

fn subgroup_of(pair: &TwoBoxPair, members: &str) -> Result<Subgroup> {
    let g = pair.group().expect("checked group model").clone();
    Ok(Subgroup::new(g, &parse_members(members)?)?)
}

fn uniqueness(a: UniquenessArgs) -> Result<Outcome> {
    let pair = load_pair(a.model.as_ref())?;
    let g = pair.group().ok_or_else(|| anyhow!("uniqueness needs a group model, got {}", pair.label()))?.clone();
    if a.all_pairs {
        let subs = match &a.subgroup {
            Some(s) => vec![subgroup_of(&pair, s)?],
            None => enumerate_subgroups(&g)?,
        };
        let mut rows = Vec::new();
        for h in &subs {
            let nc = one_dim_characters(h).len();
            for coset in ncup_core::group::right_cosets(h) {
                for ci in 0..nc {
                    rows.push(solve_pair(&pair, h, h, coset[0], ci, ci)?);
                }
            }
        }
        let ok = rows.iter().all(|r| r.dimension == 1 && r.collinearity_residual.is_some_and(|c| c <= 1e-9));
        emit_uniqueness(&a, &rows)?;
        return Ok(if ok { Outcome::Pass } else { Outcome::Fail });
    }
    let Some(sub) = &a.subgroup else { return usage("--subgroup is required without --all-pairs") };
    let (Some(gg), Some(hh)) = (a.g, a.h) else { return usage("--g and --h are required without --all-pairs") };
    let h = subgroup_of(&pair, sub)?;
    let ht = match &a.tilde_subgroup {
        Some(t) => subgroup_of(&pair, t)?,
        None => h.clone(),
    };
    match solve_pair(&pair, &h, &ht, gg, hh, a.chi.unwrap_or(hh)) {
        Ok(row) => {
            let ok = row.dimension == 1 && row.collinearity_residual.is_some_and(|c| c <= 1e-9);
            emit_uniqueness(&a, std::slice::from_ref(&row))?;
            Ok(if ok { Outcome::Pass } else { Outcome::Fail })
        }
        Err(e) => match e.downcast_ref::<ExtremizerError>() {
            Some(ExtremizerError::MismatchedBiprojection { distance }) => {
                eprintln!("mismatched biprojections: B̃h does not shift the B̃ of Bg (distance {distance:e})");
                Ok(Outcome::Fail)
            }
            _ => Err(e),
        },
    }
}

fn solve_pair(pair: &TwoBoxPair, h: &Subgroup, ht: &Subgroup, g: usize, tilde_char: usize, chi: usize) -> Result<UniquenessRow> {
    if g >= h.parent().order() {
        return usage(format!("--g {g} is not a group element"));
    }
    let b = biprojection_from_subgroup(pair, h)?;
    let bt = biprojection_from_subgroup(pair, ht)?;
    let fam = enumerate_shifts(pair, &b, Handedness::Right)?;
    let fam_t = enumerate_shifts(pair, &bt, Handedness::Right)?;
    let bg = fam
        .of_base
        .iter()
        .find(|s| matches!(&s.label, ShiftLabel::Coset { members, .. } if members.contains(&g)))
        .expect("every element lies in a right coset");
    let Some(bth) = fam_t.of_tilde.get(tilde_char) else {
        return usage(format!("--h {tilde_char}: subgroup has {} characters", fam_t.of_tilde.len()));
    };
    let Some(character) = fam.characters.get(chi) else {
        return usage(format!("--chi {chi}: subgroup has {} characters", fam.characters.len()));
    };
    let u = uniqueness_space(pair, bg, bth)?;
    let collinearity_residual = if u.dimension == 1 {
        let x = bishift_group(pair, h, character, g, ncup_core::C64::new(1.0, 0.0))?;
        Some(collinearity_residual(&u.basis[0], &pair.fourier(&x.element)?)?)
    } else {
        None
    };
    Ok(UniquenessRow {
        subgroup: join(h.members()),
        coset_rep: g,
        tilde_character: tilde_char,
        comparison_character: chi,
        dimension: u.dimension,
        collinearity_residual,
    })
}

fn emit_uniqueness(a: &UniquenessArgs, rows: &[UniquenessRow]) -> Result<()> {
    for r in rows {
        println!(
            "subgroup {{{}}} g={} h={} dimension={} collinearity_residual={}",
            r.subgroup,
            r.coset_rep,
            r.tilde_character,
            r.dimension,
            r.collinearity_residual.map_or("n/a".to_string(), |c| format!("{c:.3e}"))
        );
    }
    if let Some(out) = &a.out {
        let text = match a.format {
            Format::Json => serde_json::to_string_pretty(rows)?,
            Format::Csv => to_csv(rows)?,
        };
        write_output(Some(out), &text)?;
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct Triplet {
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

fn triplets(m: &CMat) -> Vec<Triplet> {
    let mut v = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z.norm() != 0.0 {
                v.push(Triplet { row: i, col: j, re: z.re, im: z.im });
            }
        }
    }
    v
}

/// ℱ from `side` as a map on row-major matrix entries.
fn dense_fourier(pair: &TwoBoxPair, side: Side) -> Result<CMat> {
    let (a, b) = (pair.algebra(side), pair.algebra(side.opposite()));
    let (d, e) = (a.dim(), b.dim());
    let mut m = CMat::zeros(e * e, d * d);
    for k in 0..a.coord_dim() {
        let x = pair.basis_element(side, k)?;
        let fx = pair.fourier(&x)?;
        // Spread the coordinate image back over the basis support.
        let w = 1.0 / a.basis().support(k).len() as f64;
        for &(i, j) in a.basis().support(k) {
            for r in 0..e {
                for c in 0..e {
                    let z = fx.entry(r, c);
                    if z.norm() != 0.0 {
                        m[(r * e + c, i * d + j)] += z * w;
                    }
                }
            }
        }
    }
    Ok(m)
}

fn dump(a: DumpArgs) -> Result<Outcome> {
    let pair = load_pair(a.model.as_ref())?;
    let dir = &a.out;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let write = |name: &str, text: String| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    };
    for side in [Side::Plus, Side::Minus] {
        write(&format!("fourier_coords_{}.csv", side.name()), to_csv(&triplets(&pair.fourier_matrix(side)))?)?;
        write(&format!("fourier_dense_{}.csv", side.name()), to_csv(&triplets(&dense_fourier(&pair, side)?))?)?;
    }
    let mut jones = serde_json::Map::new();
    for side in [Side::Plus, Side::Minus] {
        let e = pair.jones_projection(side)?;
        let es = pair.jones_scaled(side)?;
        jones.insert(
            side.name().to_string(),
            json!({ "projection": pair.to_literal(&e)?, "scaled": pair.to_literal(&es)? }),
        );
    }
    write("jones.json", serde_json::to_string_pretty(&Value::Object(jones))?)?;
    let mut bips = Vec::new();
    if let Some(g) = pair.group() {
        for h in enumerate_subgroups(g)? {
            let b = biprojection_from_subgroup(&pair, &h)?;
            bips.push(json!({
                "subgroup": h.members(),
                "element": pair.to_literal(&b.element)?,
                "tilde": pair.to_literal(&b.tilde)?,
            }));
        }
    } else {
        for side in [Side::Plus, Side::Minus] {
            for x in [pair.identity(side), pair.jones_projection(side)?] {
                if is_biprojection(&pair, &x, DEFAULT_TOL)?.is_biprojection {
                    bips.push(json!({ "element": pair.to_literal(&x)? }));
                }
            }
        }
    }
    write("biprojections.json", serde_json::to_string_pretty(&bips)?)?;
    let alg = |s: Side| {
        let a = pair.algebra(s);
        json!({
            "label": a.label(),
            "dim": a.dim(),
            "coord_dim": a.coord_dim(),
            "trace_scale": a.trace_scale(),
            "basis": a.basis().supports(),
        })
    };
    write(
        "model.json",
        serde_json::to_string_pretty(&json!({
            "model": pair.label(),
            "delta": pair.delta(),
            "delta0": pair.delta0(),
            "plus": alg(Side::Plus),
            "minus": alg(Side::Minus),
        }))?,
    )?;
    println!("wrote {} for {}", dir.display(), pair.label());
    Ok(Outcome::Pass)
}
