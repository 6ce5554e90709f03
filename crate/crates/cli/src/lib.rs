//! The `ucdoc` command line.
//!
//! Exit codes: 0 success, 1 validation errors (or warnings under `--strict`),
//! 2 parse errors, 3 I/O or usage errors. When several files are processed
//! the highest code wins.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use ucdoc_core::catalog::{self, build_catalog, export_json, from_json, read_sources, Query};
use ucdoc_core::diagram::{build_diagram, layout, render_svg, render_textual, LayoutConfig};
use ucdoc_core::docgen::{render_html_page, render_table_markdown};
use ucdoc_core::error::Error;
use ucdoc_core::model::{validate_with, ActorKind, Diagnostic, RiskLevel, UseCase};
use ucdoc_core::{builtin_taxonomy, classify, explain, parse_document, Taxonomy};

pub const TAXONOMY_ENV: &str = "UCDOC_TAXONOMY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Ok = 0,
    Findings = 1,
    ParseErrors = 2,
    Failure = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Streams and environment a command runs against.
pub struct Context<'a> {
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
    /// Value of `UCDOC_TAXONOMY`, if set.
    pub taxonomy_env: Option<PathBuf>,
}

#[derive(Parser, Debug)]
#[command(name = "ucdoc", version, about = "Document, classify and render AI use cases")]
struct Cli {
    /// Treat warnings as failures (exit code 1)
    #[arg(long, global = true)]
    strict: bool,
    /// Taxonomy file overriding the built-in one (default: $UCDOC_TAXONOMY)
    #[arg(long, global = true, value_name = "PATH")]
    taxonomy: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate files or directories of .ucdl files
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Print the risk classification of each use case in a file
    Classify {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
        format: TextOrJson,
    },
    /// Draw the use-case diagram
    Render {
        path: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Defaults to puml for a .puml output file, svg otherwise
        #[arg(long, value_enum)]
        format: Option<DiagramFormat>,
        #[command(flatten)]
        select: Select,
    },
    /// Print the documentation table
    Table {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = TableFormat::Md)]
        format: TableFormat,
        #[arg(long)]
        with_risk: bool,
        #[arg(long)]
        with_diagram: bool,
        /// Write to a file instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[command(flatten)]
        select: Select,
    },
    /// Build, query and summarise catalogues
    #[command(subcommand)]
    Catalog(CatalogCommand),
}

#[derive(Args, Debug)]
struct Select {
    /// Use case to pick when the file holds several
    #[arg(long)]
    id: Option<String>,
}

#[derive(Subcommand, Debug)]
enum CatalogCommand {
    /// Classify every .ucdl file below a directory and write a JSON catalogue
    Build {
        dir: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// List catalogue entries matching all given filters
    Query {
        file: PathBuf,
        #[arg(long, value_parser = parse_level)]
        risk: Option<RiskLevel>,
        /// Taxonomy entry id or top-level area
        #[arg(long)]
        area: Option<String>,
        #[arg(long)]
        capability: Option<String>,
        #[arg(long, value_parser = parse_kind)]
        actor_kind: Option<ActorKind>,
        /// Case-insensitive text in the title or intended purpose
        #[arg(long)]
        text: Option<String>,
        #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
        format: TextOrJson,
    },
    /// Count entries per risk level, area and capability
    Stats {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
        format: TextOrJson,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TextOrJson {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DiagramFormat {
    Svg,
    Puml,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Md,
    Html,
}

fn parse_level(text: &str) -> Result<RiskLevel, String> {
    RiskLevel::ALL
        .into_iter()
        .find(|l| l.as_str().eq_ignore_ascii_case(text))
        .ok_or_else(|| format!("expected one of Unacceptable, High, Transparency, Minimal; got `{text}`"))
}

fn parse_kind(text: &str) -> Result<ActorKind, String> {
    ActorKind::parse(text).ok_or_else(|| format!("expected human, organization or system; got `{text}`"))
}

/// A failure that ends the command with the given status after printing
/// `message` to stderr.
struct Abort(ExitStatus, String);

impl Abort {
    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Abort(ExitStatus::Failure, format!("error: {}: {err}", path.display()))
    }

    fn usage(message: impl Into<String>) -> Self {
        Abort(ExitStatus::Failure, format!("error: {}", message.into()))
    }
}

type CmdResult = Result<ExitStatus, Abort>;

struct Runner<'a, 'c> {
    ctx: &'a mut Context<'c>,
    strict: bool,
    taxonomy: Taxonomy,
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, ctx: &mut Context<'_>) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let text = err.render().to_string();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(ctx.stdout, "{text}");
                    ExitStatus::Ok
                }
                _ => {
                    let _ = write!(ctx.stderr, "{text}");
                    if !text.contains("Usage:") {
                        let _ = writeln!(ctx.stderr, "\n{}", Cli::command().render_usage());
                    }
                    ExitStatus::Failure
                }
            };
        }
    };
    let taxonomy = match load_taxonomy(cli.taxonomy.as_deref().or(ctx.taxonomy_env.as_deref())) {
        Ok(t) => t,
        Err(Abort(status, message)) => {
            let _ = writeln!(ctx.stderr, "{message}");
            return status;
        }
    };
    let mut runner = Runner {
        ctx,
        strict: cli.strict,
        taxonomy,
    };
    match runner.dispatch(cli.command) {
        Ok(status) => status,
        Err(Abort(status, message)) => {
            let _ = writeln!(runner.ctx.stderr, "{message}");
            status
        }
    }
}

fn load_taxonomy(path: Option<&Path>) -> Result<Taxonomy, Abort> {
    let Some(path) = path else {
        return Ok(builtin_taxonomy().clone());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Abort::io(path, e))?;
    Taxonomy::parse(&text).map_err(|errors| {
        let lines: Vec<String> = errors.iter().map(|e| format!("{}:{e}", path.display())).collect();
        Abort(ExitStatus::ParseErrors, lines.join("\n"))
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Abort> {
    std::fs::write(path, bytes).map_err(|e| Abort::io(path, e))
}

impl Runner<'_, '_> {
    fn dispatch(&mut self, command: Command) -> CmdResult {
        match command {
            Command::Validate { paths } => self.validate(&paths),
            Command::Classify { path, format } => self.classify(&path, format),
            Command::Render {
                path,
                out,
                format,
                select,
            } => self.render(&path, &out, format, select.id.as_deref()),
            Command::Table {
                path,
                format,
                with_risk,
                with_diagram,
                out,
                select,
            } => self.table(&path, format, with_risk, with_diagram, out.as_deref(), select.id.as_deref()),
            Command::Catalog(CatalogCommand::Build { dir, out }) => self.catalog_build(&dir, &out),
            Command::Catalog(CatalogCommand::Query {
                file,
                risk,
                area,
                capability,
                actor_kind,
                text,
                format,
            }) => {
                let q = Query {
                    risk_level: risk,
                    area_id: area,
                    capability,
                    actor_kind,
                    free_text: text,
                };
                self.catalog_query(&file, &q, format)
            }
            Command::Catalog(CatalogCommand::Stats { file, format }) => self.catalog_stats(&file, format),
        }
    }

    fn read(&mut self, path: &Path) -> Result<String, Abort> {
        if path == Path::new("-") {
            let mut text = String::new();
            self.ctx
                .stdin
                .read_to_string(&mut text)
                .map_err(|e| Abort::io(path, e))?;
            return Ok(text);
        }
        std::fs::read_to_string(path).map_err(|e| Abort::io(path, e))
    }

    fn report(&mut self, diagnostics: &[Diagnostic]) {
        for d in diagnostics {
            let _ = writeln!(self.ctx.stderr, "{d}");
        }
    }

    /// Status for a batch of findings: errors fail, warnings fail under `--strict`.
    fn findings_status(&self, diagnostics: &[Diagnostic]) -> ExitStatus {
        if diagnostics.iter().any(Diagnostic::is_error) || (self.strict && !diagnostics.is_empty()) {
            ExitStatus::Findings
        } else {
            ExitStatus::Ok
        }
    }

    /// Parses a file; parse errors are printed and abort with status 2.
    fn load(&mut self, path: &Path) -> Result<Vec<UseCase>, Abort> {
        let text = self.read(path)?;
        let (use_cases, errors) = parse_document(&text);
        if !errors.is_empty() {
            let lines: Vec<String> = errors.iter().map(|e| format!("{}:{e}", path.display())).collect();
            return Err(Abort(ExitStatus::ParseErrors, lines.join("\n")));
        }
        Ok(use_cases)
    }

    /// Loads exactly one valid use case, picked by `id` when given.
    fn load_one(&mut self, path: &Path, id: Option<&str>) -> Result<UseCase, Abort> {
        let mut use_cases = self.load(path)?;
        let index = match id {
            Some(id) => use_cases
                .iter()
                .position(|uc| uc.id == id)
                .ok_or_else(|| Abort::usage(format!("{}: no use case with id `{id}`", path.display())))?,
            None if use_cases.len() == 1 => 0,
            None if use_cases.is_empty() => {
                return Err(Abort::usage(format!("{}: no use case found", path.display())));
            }
            None => {
                return Err(Abort::usage(format!(
                    "{}: holds {} use cases; choose one with --id",
                    path.display(),
                    use_cases.len()
                )))
            }
        };
        let uc = use_cases.swap_remove(index);
        self.require_valid(path, &uc)?;
        Ok(uc)
    }

    fn require_valid(&mut self, path: &Path, uc: &UseCase) -> Result<(), Abort> {
        let diagnostics = validate_with(uc, &self.taxonomy);
        if diagnostics.iter().any(Diagnostic::is_error) {
            let lines: Vec<String> = diagnostics
                .into_iter()
                .map(|d| d.with_location_prefix(&format!("{}:{}", path.display(), uc.id)).to_string())
                .collect();
            return Err(Abort(ExitStatus::Findings, lines.join("\n")));
        }
        Ok(())
    }

    fn prefixed(path: &Path, uc: &UseCase, diagnostics: Vec<Diagnostic>) -> Vec<Diagnostic> {
        let prefix = format!("{}:{}", path.display(), uc.id);
        diagnostics.into_iter().map(|d| d.with_location_prefix(&prefix)).collect()
    }

    fn expand(&self, paths: &[PathBuf]) -> Result<Vec<PathBuf>, Abort> {
        let mut files = Vec::new();
        for path in paths {
            if path.is_dir() {
                let mut found = Vec::new();
                collect_ucdl(path, &mut found).map_err(|e| Abort::io(path, e))?;
                files.extend(found);
            } else {
                files.push(path.clone());
            }
        }
        files.sort();
        files.dedup();
        Ok(files)
    }

    fn validate(&mut self, paths: &[PathBuf]) -> CmdResult {
        let files = self.expand(paths)?;
        let mut status = ExitStatus::Ok;
        let (mut use_case_count, mut errors, mut warnings) = (0, 0, 0);
        for path in &files {
            let use_cases = match self.load(path) {
                Ok(ucs) => ucs,
                Err(Abort(s, message)) => {
                    let _ = writeln!(self.ctx.stderr, "{message}");
                    errors += message.lines().count();
                    status = status.max(s);
                    continue;
                }
            };
            for uc in use_cases {
                use_case_count += 1;
                let mut found = validate_with(&uc, &self.taxonomy);
                if !found.iter().any(Diagnostic::is_error) {
                    if let Ok(a) = classify(&uc, &self.taxonomy) {
                        found.extend(a.warnings());
                    }
                    if let Ok((d, diagram_warnings)) = build_diagram(&uc) {
                        found.extend(diagram_warnings);
                        found.extend(layout(&d, &LayoutConfig::default()).warnings);
                    }
                }
                errors += found.iter().filter(|d| d.is_error()).count();
                warnings += found.iter().filter(|d| !d.is_error()).count();
                status = status.max(self.findings_status(&found));
                let found = Self::prefixed(path, &uc, found);
                self.report(&found);
            }
        }
        let _ = writeln!(
            self.ctx.stdout,
            "{} file(s), {} use case(s): {} error(s), {} warning(s)",
            files.len(),
            use_case_count,
            errors,
            warnings
        );
        Ok(status)
    }

    fn classify(&mut self, path: &Path, format: TextOrJson) -> CmdResult {
        let use_cases = self.load(path)?;
        let mut status = ExitStatus::Ok;
        let mut reports = Vec::new();
        for uc in &use_cases {
            self.require_valid(path, uc)?;
            let assessment = classify(uc, &self.taxonomy).map_err(|e| Abort(ExitStatus::Findings, e.to_string()))?;
            let warnings = assessment.warnings();
            status = status.max(self.findings_status(&warnings));
            if format == TextOrJson::Json {
                let warnings = Self::prefixed(path, uc, warnings);
                self.report(&warnings);
            }
            reports.push((uc.id.clone(), assessment));
        }
        match format {
            TextOrJson::Text => {
                for (i, (id, assessment)) in reports.iter().enumerate() {
                    if i > 0 {
                        let _ = writeln!(self.ctx.stdout);
                    }
                    let _ = writeln!(self.ctx.stdout, "Use case: {id}");
                    let _ = write!(self.ctx.stdout, "{}", explain(assessment));
                }
            }
            TextOrJson::Json => {
                let items: Vec<serde_json::Value> = reports
                    .iter()
                    .map(|(id, a)| serde_json::json!({ "id": id, "risk_level": a.level, "assessment": a }))
                    .collect();
                let value = if items.len() == 1 {
                    items.into_iter().next().unwrap_or_default()
                } else {
                    serde_json::Value::Array(items)
                };
                let text = serde_json::to_string_pretty(&value).unwrap_or_default();
                let _ = writeln!(self.ctx.stdout, "{text}");
            }
        }
        Ok(status)
    }

    fn render(&mut self, path: &Path, out: &Path, format: Option<DiagramFormat>, id: Option<&str>) -> CmdResult {
        let uc = self.load_one(path, id)?;
        let format = format.unwrap_or(if out.extension().is_some_and(|e| e == "puml") {
            DiagramFormat::Puml
        } else {
            DiagramFormat::Svg
        });
        let (diagram, mut warnings) = build_diagram(&uc).map_err(|e| Abort(ExitStatus::Findings, e.to_string()))?;
        let bytes = match format {
            DiagramFormat::Svg => {
                let positioned = layout(&diagram, &LayoutConfig::default());
                warnings.extend(positioned.warnings.iter().cloned());
                render_svg(&positioned)
            }
            DiagramFormat::Puml => render_textual(&diagram).into_bytes(),
        };
        write_file(out, &bytes)?;
        let status = self.findings_status(&warnings);
        let warnings = Self::prefixed(path, &uc, warnings);
        self.report(&warnings);
        let _ = writeln!(self.ctx.stderr, "wrote {}", out.display());
        Ok(status)
    }

    fn table(
        &mut self,
        path: &Path,
        format: TableFormat,
        with_risk: bool,
        with_diagram: bool,
        out: Option<&Path>,
        id: Option<&str>,
    ) -> CmdResult {
        let uc = self.load_one(path, id)?;
        let failed = |e: Error| Abort(ExitStatus::Findings, e.to_string());
        let assessment = if with_risk {
            Some(classify(&uc, &self.taxonomy).map_err(failed)?)
        } else {
            None
        };
        let mut warnings = assessment.as_ref().map(|a| a.warnings()).unwrap_or_default();
        let text = match format {
            TableFormat::Md => {
                let mut text = String::new();
                if with_diagram {
                    let (diagram, w) = build_diagram(&uc).map_err(failed)?;
                    warnings.extend(w);
                    text.push_str("```plantuml\n");
                    text.push_str(&render_textual(&diagram));
                    text.push_str("```\n\n");
                }
                text.push_str(&render_table_markdown(&uc, assessment.as_ref()).map_err(failed)?);
                text
            }
            TableFormat::Html => {
                let svg = if with_diagram {
                    let (diagram, w) = build_diagram(&uc).map_err(failed)?;
                    warnings.extend(w);
                    let positioned = layout(&diagram, &LayoutConfig::default());
                    warnings.extend(positioned.warnings.iter().cloned());
                    Some(render_svg(&positioned))
                } else {
                    None
                };
                render_html_page(&uc, assessment.as_ref(), svg.as_deref()).map_err(failed)?
            }
        };
        match out {
            Some(out) => write_file(out, text.as_bytes())?,
            None => {
                let _ = write!(self.ctx.stdout, "{text}");
            }
        }
        let status = self.findings_status(&warnings);
        let warnings = Self::prefixed(path, &uc, warnings);
        self.report(&warnings);
        Ok(status)
    }

    fn catalog_build(&mut self, dir: &Path, out: &Path) -> CmdResult {
        if !dir.is_dir() {
            return Err(Abort::usage(format!("{}: not a directory", dir.display())));
        }
        let sources = read_sources(dir).map_err(|e| Abort::io(dir, e))?;
        let (cat, diagnostics) = build_catalog(&sources, &self.taxonomy);
        write_file(out, &export_json(&cat))?;
        let parse_failed = sources.iter().any(|(_, text)| !parse_document(text).1.is_empty());
        let status = if parse_failed {
            ExitStatus::ParseErrors
        } else {
            self.findings_status(&diagnostics)
        };
        self.report(&diagnostics);
        let _ = writeln!(
            self.ctx.stdout,
            "{} file(s), {} entr{} written to {}",
            sources.len(),
            cat.len(),
            if cat.len() == 1 { "y" } else { "ies" },
            out.display()
        );
        Ok(status)
    }

    fn load_catalog(&mut self, file: &Path) -> Result<catalog::Catalog, Abort> {
        let bytes = std::fs::read(file).map_err(|e| Abort::io(file, e))?;
        from_json(&bytes, &self.taxonomy).map_err(|e| Abort(ExitStatus::ParseErrors, format!("error: {}: {e}", file.display())))
    }

    fn catalog_query(&mut self, file: &Path, q: &Query, format: TextOrJson) -> CmdResult {
        let cat = self.load_catalog(file)?;
        let hits = catalog::query(&cat, q).map_err(|e| Abort::usage(e.to_string()))?;
        match format {
            TextOrJson::Text => {
                for e in &hits {
                    let _ = writeln!(
                        self.ctx.stdout,
                        "{}\t{}\t{}",
                        e.use_case.id, e.assessment.level, e.use_case.title
                    );
                }
            }
            TextOrJson::Json => {
                let items: Vec<serde_json::Value> = hits
                    .iter()
                    .map(|e| {
                        serde_json::json!({
                            "id": e.use_case.id,
                            "risk_level": e.assessment.level,
                            "title": e.use_case.title,
                            "source_path": e.source_path,
                        })
                    })
                    .collect();
                let text = serde_json::to_string_pretty(&items).unwrap_or_default();
                let _ = writeln!(self.ctx.stdout, "{text}");
            }
        }
        let _ = writeln!(self.ctx.stderr, "{} of {} entries match", hits.len(), cat.len());
        Ok(ExitStatus::Ok)
    }

    fn catalog_stats(&mut self, file: &Path, format: TextOrJson) -> CmdResult {
        let cat = self.load_catalog(file)?;
        let stats = catalog::stats(&cat);
        match format {
            TextOrJson::Text => {
                let pairs = |map: &std::collections::BTreeMap<String, usize>| {
                    if map.is_empty() {
                        "none".to_string()
                    } else {
                        map.iter().map(|(k, n)| format!("{k}={n}")).collect::<Vec<_>>().join(" ")
                    }
                };
                let _ = writeln!(self.ctx.stdout, "entries: {}", stats.total);
                let _ = writeln!(self.ctx.stdout, "risk levels: {}", stats.level_summary());
                let _ = writeln!(self.ctx.stdout, "areas: {}", pairs(&stats.by_area));
                let _ = writeln!(self.ctx.stdout, "capabilities: {}", pairs(&stats.by_capability));
            }
            TextOrJson::Json => {
                let text = serde_json::to_string_pretty(&stats).unwrap_or_default();
                let _ = writeln!(self.ctx.stdout, "{text}");
            }
        }
        Ok(ExitStatus::Ok)
    }
}

fn collect_ucdl(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_ucdl(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "ucdl") {
            out.push(path);
        }
    }
    Ok(())
}
