//! `ondt` command line. Exit status: 0 success, 1 domain rejection or
//! failure, 2 usage error.

use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ondt_core::fixtures;
use ondt_core::path::{ProvisionReport, ProvisionRequest};
use ondt_core::store::{DataDir, LinkId, TwinStore};
use ondt_core::telemetry::{
    generate_fault_scenario, localize_fault, parse_samples, ramp_samples, Emulator, EmulatorConfig,
    FaultScenarioConfig, SampleSource,
};
use ondt_core::trx::TrxCatalog;
use serde::Serialize;

use crate::api::{self, CommitRequest, SpanLossRequest};
use crate::config::Config;
use crate::error::ApiError;

#[derive(Debug, Parser)]
#[command(name = "ondt", version, about = "Optical network digital twin")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Twin data directory; overrides the config file and ONDT_DATA_DIR.
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a data directory from a shipped fixture or a topology file.
    Init {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(fixtures::NAMES), conflicts_with = "topology")]
        fixture: Option<String>,
        #[arg(long)]
        topology: Option<PathBuf>,
        /// Transceiver catalog copied into the data directory.
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Overwrite an existing twin.
        #[arg(long)]
        force: bool,
    },
    /// List every evaluated (route, transceiver) candidate for a request.
    Plan(RequestArgs),
    /// Evaluate a request and its impact on existing lightpaths.
    Whatif(RequestArgs),
    /// Commit a report produced by `whatif --format json`.
    Commit {
        /// Report file, or `-` for stdin.
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        timestamp: Option<f64>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Ingest newline-delimited telemetry samples.
    Ingest {
        /// Sample file, or `-` for stdin.
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Per-lightpath QoT summary.
    Report {
        #[arg(long)]
        lp: Option<String>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Degradation and fault scenarios.
    #[command(subcommand)]
    Scenario(Scenario),
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        bind: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct RequestArgs {
    #[arg(long)]
    pub src: String,
    #[arg(long)]
    pub dst: String,
    /// Requested line rate in Gb/s.
    #[arg(long)]
    pub bitrate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub target_margin: f64,
    #[arg(long, default_value = "standard")]
    pub service_class: String,
    /// Restrict to these transceiver types (repeatable).
    #[arg(long = "trx")]
    pub trx: Vec<String>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

impl RequestArgs {
    fn request(&self) -> ProvisionRequest {
        ProvisionRequest {
            service_class: self.service_class.clone(),
            allow_trx: (!self.trx.is_empty()).then(|| self.trx.clone()),
            ..ProvisionRequest::new(&self.src, &self.dst, self.bitrate, self.target_margin)
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Scenario {
    /// Q trajectory of a lightpath as loss is added to every span it crosses.
    SpanLoss {
        #[arg(long)]
        lp: String,
        /// Added loss per span in dB, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<f64>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Seeded fault-localization scenario written to a new data directory.
    Fault {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Link to degrade; drawn at random when absent.
        #[arg(long)]
        fault_link: Option<String>,
        #[arg(long, default_value_t = 6.0)]
        added_loss: f64,
        /// Lightpaths to provision on an empty base.
        #[arg(long, default_value_t = 20)]
        lightpaths: usize,
        #[arg(long, default_value_t = 0.02)]
        sigma: f64,
        /// Base topology instead of the configured data directory.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(fixtures::NAMES))]
        fixture: Option<String>,
        /// Where to write the resulting twin.
        #[arg(long)]
        out: PathBuf,
    },
    /// Emulated telemetry while one link's loss ramps up, as JSON lines.
    Ramp {
        #[arg(long)]
        link: String,
        /// Added loss per span at each sample time, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        ramp: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        start: f64,
        #[arg(long, default_value_t = 900.0)]
        interval: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.02)]
        sigma: f64,
    },
}

/// Output of a subcommand before exit-status mapping.
struct Outcome {
    text: String,
    /// Domain rejection carried in an otherwise successful result.
    rejected: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, rejected: false }
    }
}

fn read_input(path: &PathBuf) -> Result<String, ApiError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| ApiError::new("Io", format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| ApiError::new("Io", format!("{}: {e}", path.display())))
    }
}

fn persist(config: &Config, pending: &ondt_core::store::PendingWrite) -> Result<(), ApiError> {
    Ok(config.data().apply(pending)?)
}

fn json_or<T: Serialize>(format: Format, value: &T, table: impl FnOnce(&T) -> String) -> String {
    match format {
        Format::Json => api::render(value),
        Format::Table => table(value),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.2}"))
}

fn join(links: &[LinkId]) -> String {
    links.iter().map(LinkId::as_str).collect::<Vec<_>>().join(",")
}

fn verdict_line(r: &ProvisionReport) -> String {
    match &r.verdict {
        ondt_core::path::Verdict::Accept => format!("ACCEPT {} at revision {}\n", r.proposed_id, r.revision),
        ondt_core::path::Verdict::Reject { reason } => format!("REJECT {reason:?} at revision {}\n", r.revision),
    }
}

fn candidates_table(r: &ProvisionReport) -> String {
    let mut s = verdict_line(r);
    s += &format!(
        "{:>5} {:<24} {:>9} {:<26} {:>9} {:>9}  {}\n",
        "route", "links", "km", "trx", "gsnr_dB", "margin_dB", "outcome"
    );
    for c in &r.candidates {
        s += &format!(
            "{:>5} {:<24} {:>9.1} {:<26} {:>9} {:>9}  {:?}\n",
            c.route_index,
            join(&c.route),
            c.length_km,
            c.trx,
            opt(c.gsnr_db),
            opt(c.margin_db),
            c.outcome
        );
    }
    s
}

fn whatif_table(r: &ProvisionReport) -> String {
    let mut s = verdict_line(r);
    if let (Some(route), Some(trx), Some(q), Some(sp)) = (&r.route, &r.trx, &r.new_lp, &r.spectrum) {
        s += &format!(
            "route {}  trx {}  {:.4} THz/{} GHz  gsnr {:.2} dB  margin {:.2} dB\n",
            join(route),
            trx,
            sp.center_thz,
            sp.width_ghz,
            q.gsnr_db,
            q.margin_db
        );
    }
    if !r.impacts.is_empty() {
        s += &format!(
            "{:<8} {:>12} {:>12} {:>12} {:>12} {:>10}\n",
            "lp", "gsnr_before", "gsnr_after", "margin_bef", "margin_aft", "target"
        );
        for i in &r.impacts {
            let mark = if r.violated.contains(&i.lp_id) { "  VIOLATED" } else { "" };
            s += &format!(
                "{:<8} {:>12.3} {:>12.3} {:>12.3} {:>12.3} {:>10.2}{mark}\n",
                i.lp_id, i.gsnr_before_db, i.gsnr_after_db, i.margin_before_db, i.margin_after_db, i.target_margin_db
            );
        }
    }
    s
}

fn report_table(r: &api::QotReport) -> String {
    let mut s = format!(
        "{:<8} {:<8} {:<8} {:<26} {:<9} {:>4} {:>9} {:>9} {:>8} {:>9}\n",
        "lp", "src", "dst", "trx", "state", "hops", "gsnr_dB", "margin_dB", "target", "meas_mrg"
    );
    for l in &r.lightpaths {
        s += &format!(
            "{:<8} {:<8} {:<8} {:<26} {:<9} {:>4} {:>9} {:>9} {:>8.2} {:>9}\n",
            l.lp_id,
            l.src,
            l.dst,
            l.trx,
            format!("{:?}", l.state).to_lowercase(),
            l.hops,
            opt(l.computed.as_ref().and_then(|c| c.gsnr_est_db)),
            opt(l.computed.as_ref().and_then(|c| c.margin_db)),
            l.target_margin_db,
            opt(l.measured.as_ref().and_then(|m| m.margin_db)),
        );
    }
    s
}

fn init(
    config: &Config,
    fixture: Option<&str>,
    topology: Option<&PathBuf>,
    catalog: Option<&PathBuf>,
    force: bool,
) -> Result<Outcome, ApiError> {
    let data = config.data();
    if data.exists() && !force {
        return Err(ApiError::new(
            "AlreadyInitialized",
            format!("{} already holds a twin; pass --force to overwrite", data.root().display()),
        ));
    }
    let topo_text = match (fixture, topology) {
        (_, Some(p)) => read_input(p)?,
        (name, None) => fixtures::topology(name.unwrap_or("ring")).expect("validated").to_string(),
    };
    let catalog_text = catalog.map(read_input).transpose()?;
    let cat = match &catalog_text {
        Some(t) => TrxCatalog::from_json(t)?,
        None => TrxCatalog::default_generations(),
    };
    let store = TwinStore::from_topology_json(&topo_text, cat)?;
    data.save(&store)?;
    if let Some(t) = catalog_text {
        std::fs::write(data.catalog_path(), t).map_err(|e| ApiError::new("Io", e.to_string()))?;
    } else if data.catalog_path().exists() {
        std::fs::remove_file(data.catalog_path()).map_err(|e| ApiError::new("Io", e.to_string()))?;
    }
    let t = store.topology();
    Ok(Outcome::ok(format!(
        "initialized {}: {} nodes, {} links\n",
        data.root().display(),
        t.nodes.len(),
        t.links.len()
    )))
}

fn scenario(config: &Config, s: &Scenario) -> Result<Outcome, ApiError> {
    match s {
        Scenario::SpanLoss { lp, steps, format } => {
            let store = config.open_store()?;
            let r = api::span_loss(
                &store,
                &SpanLossRequest {
                    lp_id: lp.as_str().into(),
                    added_loss_db: steps.clone(),
                },
            )?;
            Ok(Outcome::ok(json_or(*format, &r, |r| {
                let mut s = format!(
                    "{:>8} {:>9} {:>10} {:>7} {:>9} {:>9}\n",
                    "added_dB", "gsnr_dB", "ber", "q_dB", "margin_dB", "rx_dBm"
                );
                for st in &r.steps {
                    s += &format!(
                        "{:>8.2} {:>9.3} {:>10.3e} {:>7.3} {:>9.3} {:>9.2}\n",
                        st.added_loss_db, st.gsnr_db, st.ber, st.q_db, st.margin_db, st.rx_power_dbm
                    );
                }
                s
            })))
        }
        Scenario::Fault {
            seed,
            fault_link,
            added_loss,
            lightpaths,
            sigma,
            fixture,
            out,
        } => {
            let base = match fixture {
                Some(name) => TwinStore::from_topology_json(
                    fixtures::topology(name).expect("validated"),
                    TrxCatalog::default_generations(),
                )?,
                None => config.open_store()?,
            };
            let sc = generate_fault_scenario(
                &base,
                &FaultScenarioConfig {
                    seed: *seed,
                    lightpaths: *lightpaths,
                    fault_link: fault_link.as_deref().map(LinkId::from),
                    added_loss_db: *added_loss,
                    noise_sigma_db: *sigma,
                },
            )?;
            DataDir::new(out).save(&sc.store)?;
            let hypothesis = localize_fault(&sc.store, &sc.degraded, &sc.healthy)?;
            let doc = serde_json::json!({
                "data_dir": out,
                "fault_link": sc.fault_link,
                "degraded": sc.degraded,
                "healthy": sc.healthy,
                "hypothesis": hypothesis,
            });
            Ok(Outcome::ok(api::render(&doc)))
        }
        Scenario::Ramp {
            link,
            ramp,
            start,
            interval,
            seed,
            sigma,
        } => {
            let store = config.open_store()?;
            let mut em = Emulator::new(EmulatorConfig {
                seed: *seed,
                sigma_db: *sigma,
                source: SampleSource::Emulated,
            });
            let samples = ramp_samples(&store, &LinkId::from(link.as_str()), ramp, *start, *interval, &mut em)?;
            let text = samples
                .iter()
                .map(|s| serde_json::to_string(s).expect("samples serialize") + "\n")
                .collect();
            Ok(Outcome::ok(text))
        }
    }
}

fn execute(cli: &Cli, env: &dyn Fn(&str) -> Option<String>) -> Result<Outcome, ApiError> {
    let mut config = Config::load(cli.config.as_deref(), env)?;
    if let Some(d) = &cli.data_dir {
        config.data_dir = d.clone();
    }
    let analytics = config.analytics.clone();
    match &cli.command {
        Command::Init {
            fixture,
            topology,
            catalog,
            force,
        } => init(&config, fixture.as_deref(), topology.as_ref(), catalog.as_ref(), *force),
        Command::Plan(args) | Command::Whatif(args) => {
            let store = config.open_store()?;
            let report = api::whatif(&store, &args.request(), &analytics)?;
            let table = if matches!(cli.command, Command::Plan(_)) {
                candidates_table
            } else {
                whatif_table
            };
            Ok(Outcome {
                rejected: !report.is_accepted(),
                text: json_or(args.format, &report, table),
            })
        }
        Command::Commit {
            report,
            timestamp,
            format,
        } => {
            let text = read_input(report)?;
            let report: ProvisionReport = ondt_core::doc::parse(&text)?;
            let mut store = config.open_store()?;
            let id = report.proposed_id.clone();
            let m = api::commit(
                &mut store,
                id.as_str(),
                &CommitRequest {
                    report,
                    timestamp: *timestamp,
                },
                &analytics,
            )?;
            persist(&config, &m.pending)?;
            Ok(Outcome::ok(json_or(*format, &m.value, |c| {
                format!(
                    "committed {} at revision {}: gsnr {} dB, margin {} dB\n",
                    c.lp_id,
                    c.revision,
                    opt(c.record.gsnr_est_db),
                    opt(c.record.margin_db)
                )
            })))
        }
        Command::Ingest { file, format } => {
            let samples = parse_samples(&read_input(file)?)?;
            let mut store = config.open_store()?;
            let m = api::ingest_samples(&mut store, &samples)?;
            persist(&config, &m.pending)?;
            Ok(Outcome::ok(json_or(*format, &m.value, |o| {
                let mut s = format!("{:<8} {:>14} {:>10} {:>9} {:<9} flag\n", "lp", "timestamp", "ber", "margin_dB", "state");
                for r in &o.records {
                    s += &format!(
                        "{:<8} {:>14.1} {:>10.3e} {:>9} {:<9} {}\n",
                        r.lp_id,
                        r.record.timestamp,
                        r.record.ber,
                        opt(r.record.margin_db),
                        format!("{:?}", r.state).to_lowercase(),
                        r.record.flag.as_deref().unwrap_or("")
                    );
                }
                s
            })))
        }
        Command::Report { lp, format } => {
            let store = config.open_store()?;
            let r = api::report(&store, lp.as_deref())?;
            Ok(Outcome::ok(json_or(*format, &r, report_table)))
        }
        Command::Scenario(s) => scenario(&config, s),
        Command::Serve { port, bind } => {
            if let Some(p) = port {
                config.port = *p;
            }
            if let Some(b) = bind {
                config.bind = b.clone();
            }
            let rt = tokio::runtime::Runtime::new().map_err(|e| ApiError::new("Io", e.to_string()))?;
            rt.block_on(crate::http::serve(config))?;
            Ok(Outcome::ok(String::new()))
        }
    }
}

/// Runs one invocation, writing results to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, env: &dyn Fn(&str) -> Option<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, env) {
        Ok(o) => {
            let _ = out.write_all(o.text.as_bytes());
            i32::from(o.rejected)
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Some(p) = &e.path {
                let _ = writeln!(err, "  at {p}");
            }
            1
        }
    }
}
