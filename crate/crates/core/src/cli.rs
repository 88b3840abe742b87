//! The `cvchipsim` command line.

use std::ffi::OsString;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::calibrate::{calibrate_epr, REFERENCE_TERM_P_DB, REFERENCE_TERM_X_DB};
use crate::error::Error;
use crate::measurement::sum_diff_noise_db;
use crate::netlist::{
    evaluate, linspace, parse_netlist, sweep, validate, DetectorConfig, Fig1aConfig, Fig1bConfig,
    Netlist, ParamValue, SweepRow,
};
use crate::opo::{EfficiencyChain, OpoSource};
use crate::report::{records_table, Cell, Format, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PHYSICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Pump powers for the squeezing reproduction, mW.
pub fn pump_grid_mw() -> Vec<f64> {
    linspace(0.0, 170.0, 18)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Simulate,
    Sweep,
    ReproSqueezing,
    ReproEpr,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

/// Simulate chip-scale squeezing and EPR circuits.
#[derive(Debug, Parser)]
#[command(name = "cvchipsim", version)]
struct Cli {
    command: Command,
    /// Netlist file (`-` for stdin); a JSON `{opo, chain}` file for repro
    /// commands.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file or `-` for stdout.
    #[arg(long, default_value = "-")]
    output: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Parameter override `path=value`; repeatable, last one wins.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
    /// `path=start:stop:count`, required by `sweep`.
    #[arg(long, value_name = "PATH=START:STOP:COUNT")]
    sweep: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub path: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn parse(raw: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("--sweep expects path=start:stop:count, got `{raw}`"));
        let (path, range) = raw.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(bad());
        };
        let spec = SweepSpec {
            path: path.trim().to_string(),
            start: start.trim().parse().map_err(|_| bad())?,
            stop: stop.trim().parse().map_err(|_| bad())?,
            count: count.trim().parse().map_err(|_| bad())?,
        };
        if spec.path.is_empty() || !spec.start.is_finite() || !spec.stop.is_finite() {
            return Err(bad());
        }
        if spec.count < 1 {
            return Err(CliError::Usage("sweep count must be at least 1".into()));
        }
        Ok(spec)
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub output: String,
    pub format: Format,
    pub sweep: Option<SweepSpec>,
    /// `(path, value)` pairs in command-line order.
    pub overrides: Vec<(String, String)>,
}

impl RunConfig {
    fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let sweep = match (cli.command, cli.sweep) {
            (Command::Sweep, Some(s)) => Some(SweepSpec::parse(&s)?),
            (Command::Sweep, None) => {
                return Err(CliError::Usage("sweep needs --sweep path=start:stop:count".into()))
            }
            (_, Some(_)) => {
                return Err(CliError::Usage(format!(
                    "--sweep is only valid with the sweep command, not {}",
                    cli.command
                )))
            }
            (_, None) => None,
        };
        let needs_input = matches!(
            cli.command,
            Command::Validate | Command::Simulate | Command::Sweep
        );
        if needs_input && cli.input.is_none() {
            return Err(CliError::Usage(format!("{} needs --input", cli.command)));
        }
        let overrides = cli
            .overrides
            .iter()
            .map(|o| {
                o.split_once('=')
                    .map(|(p, v)| (p.trim().to_string(), v.trim().to_string()))
                    .filter(|(p, v)| !p.is_empty() && !v.is_empty())
                    .ok_or_else(|| CliError::Usage(format!("--set expects path=value, got `{o}`")))
            })
            .collect::<Result<_, _>>()?;
        Ok(RunConfig {
            command: cli.command,
            input: cli.input,
            output: cli.output,
            format: cli.format,
            sweep,
            overrides,
        })
    }

    /// Run description written next to JSON output files.
    pub fn metadata(&self) -> serde_json::Value {
        json!({
            "tool": "cvchipsim",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command.to_string(),
            "input": self.input.as_ref().map(|p| p.display().to_string()),
            "format": self.format.to_string(),
            "sweep": self.sweep.as_ref().map(|s| json!({
                "path": s.path, "start": s.start, "stop": s.stop, "count": s.count,
            })),
            "overrides": self.overrides.iter()
                .map(|(p, v)| json!({"path": p, "value": v}))
                .collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Model(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_INPUT,
            CliError::Model(e) if e.is_physical() => EXIT_PHYSICAL,
            CliError::Model(_) => EXIT_INPUT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Io(m) => f.write_str(m),
            CliError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

impl From<crate::error::ValidationError> for CliError {
    fn from(e: crate::error::ValidationError) -> Self {
        CliError::Model(e.into())
    }
}

/// What a run produced: an optional data table plus diagnostics for stderr.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutput {
    pub table: Option<Table>,
    pub diagnostics: Vec<String>,
}

fn read_input(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Io(format!("reading stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_netlist(path: &Path) -> Result<Netlist, CliError> {
    let text = read_input(path)?;
    parse_netlist(&text).map_err(|e| CliError::Model(Error::Parse(e)))
}

fn apply_overrides(net: &mut Netlist, overrides: &[(String, String)]) -> Result<(), CliError> {
    for (path, value) in overrides {
        net.set_param(path, value)?;
    }
    Ok(())
}

/// Optional source/detection parameters for the repro commands.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReproInput {
    #[serde(default)]
    opo: OpoSource,
    #[serde(default)]
    chain: EfficiencyChain,
}

fn repro_input(path: Option<&Path>) -> Result<ReproInput, CliError> {
    let Some(path) = path else {
        return Ok(ReproInput::default());
    };
    let text = read_input(path)?;
    let input: ReproInput = serde_json::from_str(&text)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    input.chain.validate()?;
    Ok(input)
}

fn number(net: &Netlist, path: &str) -> Result<f64, CliError> {
    match net.get_param(path)? {
        ParamValue::Number(v) => Ok(v),
        ParamValue::Text(t) => Err(CliError::Model(Error::BadParameterValue {
            path: path.into(),
            value: t,
        })),
    }
}

fn sweep_table(rows: &[SweepRow]) -> Result<Table, CliError> {
    let Some(first) = rows.first() else {
        return Ok(Table::new(["value", "db_min", "db_max"]));
    };
    let multi_hd = first.homodynes.len() > 1;
    let multi_joint = first.correlations.len() > 1;
    let prefixed = |multi: bool, name: &str, col: &str| {
        if multi {
            format!("{name}.{col}")
        } else {
            col.to_string()
        }
    };
    let mut columns = vec!["value".to_string()];
    for h in &first.homodynes {
        columns.push(prefixed(multi_hd, &h.name, "db_min"));
        columns.push(prefixed(multi_hd, &h.name, "db_max"));
    }
    for j in &first.correlations {
        columns.push(prefixed(multi_joint, &j.name, "delta_sq"));
    }
    let mut t = Table::new(columns);
    for r in rows {
        let mut row: Vec<Cell> = vec![r.value.into()];
        for h in &r.homodynes {
            row.push(h.db_min.into());
            row.push(h.db_max.into());
        }
        for j in &r.correlations {
            row.push(j.correlation.delta_sq.into());
        }
        t.push(row)?;
    }
    Ok(t)
}

fn repro_squeezing(config: &RunConfig) -> Result<Table, CliError> {
    let input = repro_input(config.input.as_deref())?;
    let mut net = Fig1aConfig {
        source: input.opo,
        chain: input.chain,
        ..Fig1aConfig::default()
    }
    .build();
    apply_overrides(&mut net, &config.overrides)?;
    let threshold = number(&net, "sources.sl1.threshold_mw")?;
    let rows = sweep(&net, "sources.sl1.pump_mw", &pump_grid_mw())?;
    let mut t = Table::new(["pump_mw", "x", "squeezing_db", "antisqueezing_db"]);
    for r in rows {
        let h = &r.homodynes[0];
        t.push(vec![
            r.value.into(),
            (r.value / threshold).sqrt().into(),
            h.db_min.into(),
            h.db_max.into(),
        ])?;
    }
    Ok(t)
}

fn repro_epr(config: &RunConfig) -> Result<Table, CliError> {
    let input = repro_input(config.input.as_deref())?;
    let base = Fig1bConfig {
        sources: [input.opo; 2],
        detectors: [DetectorConfig::from_chain(&input.chain); 2],
        ..Fig1bConfig::default()
    };
    let cal = calibrate_epr(&base, REFERENCE_TERM_X_DB, REFERENCE_TERM_P_DB)?;
    let mut net = cal.config.build();
    apply_overrides(&mut net, &config.overrides)?;
    let res = evaluate(&net, &validate(&net)?)?;
    let (hd1, hd2) = (&res.homodynes[0], &res.homodynes[1]);
    let joint = &res.correlations[0];
    let c = joint.correlation;
    let mut t = Table::new([
        "arm1_eta",
        "arm2_eta",
        "hd1_db_min",
        "hd1_db_max",
        "hd2_db_min",
        "hd2_db_max",
        "term_x",
        "term_p",
        "term_x_db",
        "term_p_db",
        "delta_sq",
        "verdict",
    ]);
    t.push(vec![
        number(&net, "elements.arm1.eta")?.into(),
        number(&net, "elements.arm2.eta")?.into(),
        hd1.db_min.into(),
        hd1.db_max.into(),
        hd2.db_min.into(),
        hd2.db_max.into(),
        c.term_x.into(),
        c.term_p.into(),
        sum_diff_noise_db(c.term_x)?.into(),
        sum_diff_noise_db(c.term_p)?.into(),
        c.delta_sq.into(),
        joint.inseparability.verdict.to_string().into(),
    ])?;
    Ok(t)
}

/// Executes one command without touching stdout.
pub fn run(config: &RunConfig) -> Result<RunOutput, CliError> {
    let mut out = RunOutput::default();
    match config.command {
        Command::Validate => {
            let path = config.input.as_deref().expect("checked in from_cli");
            let mut net = load_netlist(path)?;
            apply_overrides(&mut net, &config.overrides)?;
            let checked = validate(&net)?;
            out.diagnostics.extend(checked.warnings.iter().map(|w| format!("warning: {w}")));
            out.diagnostics.push(format!(
                "valid: {} source(s), {} element(s), {} detector(s); order: {}",
                net.sources.len(),
                net.elements.len(),
                net.detectors.len(),
                checked.order.join(" ")
            ));
        }
        Command::Simulate => {
            let path = config.input.as_deref().expect("checked in from_cli");
            let mut net = load_netlist(path)?;
            apply_overrides(&mut net, &config.overrides)?;
            let checked = validate(&net)?;
            out.diagnostics.extend(checked.warnings.iter().map(|w| format!("warning: {w}")));
            let res = evaluate(&net, &checked)?;
            out.table = Some(records_table(&res.records));
        }
        Command::Sweep => {
            let path = config.input.as_deref().expect("checked in from_cli");
            let spec = config.sweep.as_ref().expect("checked in from_cli");
            let mut net = load_netlist(path)?;
            apply_overrides(&mut net, &config.overrides)?;
            let checked = validate(&net)?;
            out.diagnostics.extend(checked.warnings.iter().map(|w| format!("warning: {w}")));
            let rows = sweep(&net, &spec.path, &spec.values())?;
            out.table = Some(sweep_table(&rows)?);
        }
        Command::ReproSqueezing => out.table = Some(repro_squeezing(config)?),
        Command::ReproEpr => out.table = Some(repro_epr(config)?),
    }
    Ok(out)
}

/// Writes `table` to the configured destination; JSON written to a file
/// also gets a `<output>.meta.json` sidecar.
pub fn emit(config: &RunConfig, table: &Table) -> Result<usize, CliError> {
    let body = table.render(config.format)?;
    if config.output == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(body.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| CliError::Io(format!("writing stdout: {e}")))?;
        return Ok(body.len());
    }
    let write = |path: &str, data: &str| {
        std::fs::write(path, data).map_err(|e| CliError::Io(format!("{path}: {e}")))
    };
    write(&config.output, &body)?;
    if config.format == Format::Json {
        let mut meta = serde_json::to_string_pretty(&config.metadata()).expect("plain JSON");
        meta.push('\n');
        write(&format!("{}.meta.json", config.output), &meta)?;
    }
    Ok(body.len())
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|config| {
        let out = run(&config)?;
        for d in &out.diagnostics {
            eprintln!("{d}");
        }
        if let Some(t) = &out.table {
            emit(&config, t)?;
        }
        Ok(())
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("cvchipsim: {e}");
            e.exit_code()
        }
    }
}
