use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use finsleroid::frame::{Background, BackgroundDocument, Parameters, Tetrad};
use finsleroid::report::{self, DEFAULT_SEED};
use finsleroid::{limits, FinsleroidError};
use nalgebra::Vector4;

const SEED_ENV: &str = "FINSLEROID_SEED";

const AFTER_HELP: &str = "\
CSV columns (floats carry 17 significant digits):
  report curvature  index,eta,theta,phi,K_eta_theta,K_eta_phi,K_theta_phi,max_abs_dev
  report domain     H,p,eta_min,r_min,r_sup,status
  report reduction  H,p,samples,max_rel_dev_v2,max_abs_dev_f2,max_abs_dev_det,pass
  report scan       w_perp,w3,F,detG,status

Exit codes: 0 success, 1 usage or parse error, 2 domain error.
The FINSLEROID_SEED environment variable overrides --seed.";

#[derive(Parser, Debug)]
#[command(name = "finsleroid", version, about = "Pseudo-Finsleroid metric evaluation and reports", after_help = AFTER_HELP)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Indicatrix curvature parameter, H >= 1
    #[arg(long = "H", global = true, value_parser = parse_h)]
    h: Option<f64>,

    /// Section curvature parameter, 0 < p <= 1
    #[arg(long, global = true, value_parser = parse_p)]
    p: Option<f64>,

    /// Background as a JSON file or inline JSON: {"H", "p", "tetrad", "metric"}.
    /// --H and --p take precedence over the document.
    #[arg(long, global = true)]
    tetrad: Option<String>,

    /// Seed for sampled reports
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the document here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate F, l, h, g and det(g) at one vector (JSON only)
    Eval {
        /// Vector components in natural coordinates
        #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
        y: Vec<f64>,
    },
    /// Sampled and tabulated reports
    Report {
        #[command(subcommand)]
        kind: ReportKind,
    },
}

#[derive(Subcommand, Debug)]
enum ReportKind {
    /// Sectional curvatures of the indicatrix at random interior points
    Curvature {
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// eta_min, r_min, r_sup over an (H, p) grid
    Domain {
        #[arg(long = "Hgrid", value_delimiter = ',', value_parser = parse_h)]
        h_grid: Vec<f64>,
        #[arg(long = "pgrid", value_delimiter = ',', value_parser = parse_p)]
        p_grid: Vec<f64>,
    },
    /// Comparison against the p = 1 closed form and the H = p = 1 limit
    Reduction {
        #[arg(long = "Hgrid", value_delimiter = ',', value_parser = parse_h, default_value = "1.1,1.25,2")]
        h_grid: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// F and det(g) at y = (1, w_perp, 0, w3) over an n x n grid of cell
    /// centres, w_perp in (0, 1), w3 in (-1, 1)
    Scan {
        /// Grid points per axis
        #[arg(long, default_value_t = 21)]
        samples: usize,
    },
}

fn parse_h(s: &str) -> Result<f64, String> {
    let h: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if h >= 1.0 && h.is_finite() {
        Ok(h)
    } else {
        Err(format!("H must be a finite number >= 1, got {h}"))
    }
}

fn parse_p(s: &str) -> Result<f64, String> {
    let p: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if p > 0.0 && p <= 1.0 {
        Ok(p)
    } else {
        Err(format!("p must lie in (0, 1], got {p}"))
    }
}

enum Failure {
    Usage(String),
    Library(FinsleroidError, Option<Parameters>),
}

impl From<FinsleroidError> for Failure {
    fn from(e: FinsleroidError) -> Self {
        Failure::Library(e, None)
    }
}

struct Config {
    document: BackgroundDocument,
    common: Common,
}

impl Config {
    fn new(common: Common) -> Result<Self, Failure> {
        let document = match &common.tetrad {
            None => BackgroundDocument::default(),
            Some(src) => {
                let text = if src.trim_start().starts_with('{') {
                    src.clone()
                } else {
                    fs::read_to_string(src).map_err(|e| Failure::Usage(format!("cannot read {src}: {e}")))?
                };
                BackgroundDocument::from_json(&text)
                    .map_err(|e| Failure::Usage(format!("invalid background document: {e}")))?
            }
        };
        Ok(Config { document, common })
    }

    fn h(&self) -> Option<f64> {
        self.common.h.or(self.document.h)
    }

    fn p(&self) -> Option<f64> {
        self.common.p.or(self.document.p)
    }

    fn parameters(&self) -> Result<Parameters, Failure> {
        let h = self.h().ok_or_else(|| Failure::Usage("missing --H".into()))?;
        let p = self.p().ok_or_else(|| Failure::Usage("missing --p".into()))?;
        Parameters::new(h, p).map_err(|e| Failure::Usage(e.to_string()))
    }

    fn background(&self) -> Result<Background, Failure> {
        let params = self.parameters()?;
        let tetrad: Tetrad = self.document.tetrad();
        Background::new(params.clone(), tetrad).map_err(|e| match e {
            FinsleroidError::TetradInvalid { .. } | FinsleroidError::TetradDegenerate => Failure::Usage(e.to_string()),
            e => Failure::Library(e, Some(params)),
        })
    }

    fn seed(&self) -> Result<u64, Failure> {
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|e| Failure::Usage(format!("{SEED_ENV}={v:?}: {e}"))),
            Err(_) => Ok(self.common.seed.unwrap_or(DEFAULT_SEED)),
        }
    }

    fn emit(&self, text: String) -> Result<(), Failure> {
        match &self.common.out {
            Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_document<T: serde::Serialize>(&self, doc: &T, csv: impl FnOnce() -> String) -> Result<(), Failure> {
        let text = match self.common.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(doc).expect("report documents serialize");
                s.push('\n');
                s
            }
            Format::Csv => csv(),
        };
        self.emit(text)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = Config::new(cli.common)?;
    match cli.command {
        Command::Eval { y } => {
            if config.common.format == Format::Csv {
                return Err(Failure::Usage("eval produces JSON only".into()));
            }
            let y: [f64; 4] = y
                .try_into()
                .map_err(|v: Vec<f64>| Failure::Usage(format!("--y needs 4 components, got {}", v.len())))?;
            let bg = config.background()?;
            let doc = report::eval_document(&bg, &Vector4::from(y))
                .map_err(|e| Failure::Library(e, Some(bg.params.clone())))?;
            config.emit_document(&doc, String::new)
        }
        Command::Report { kind } => match kind {
            ReportKind::Curvature { samples } => {
                let params = config.background()?.params;
                let doc = report::curvature_report(&params, samples, config.seed()?)
                    .map_err(|e| Failure::Library(e, Some(params.clone())))?;
                config.emit_document(&doc, || doc.to_csv())?;
                eprintln!("{}", doc.summary());
                Ok(())
            }
            ReportKind::Domain { h_grid, p_grid } => {
                let h_grid = grid_or(h_grid, config.h(), "--H or --Hgrid")?;
                let p_grid = grid_or(p_grid, config.p(), "--p or --pgrid")?;
                let doc = report::domain_report(&h_grid, &p_grid)?;
                config.emit_document(&doc, || doc.to_csv())
            }
            ReportKind::Reduction { h_grid, samples } => {
                let doc = limits::reduction_report(&h_grid, samples, config.seed()?)?;
                config.emit_document(&doc, || report::reduction_csv(&doc))
            }
            ReportKind::Scan { samples } => {
                let params = config.background()?.params;
                let doc =
                    report::scan_report(&params, samples).map_err(|e| Failure::Library(e, Some(params.clone())))?;
                config.emit_document(&doc, || doc.to_csv())
            }
        },
    }
}

fn grid_or(grid: Vec<f64>, single: Option<f64>, what: &str) -> Result<Vec<f64>, Failure> {
    if !grid.is_empty() {
        return Ok(grid);
    }
    single.map(|x| vec![x]).ok_or_else(|| Failure::Usage(format!("missing {what}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Library(e, params)) => {
            eprintln!("error [{}]: {e}", e.code());
            if !e.is_domain_error() {
                return ExitCode::from(1);
            }
            if let Some(d) = params.as_ref().and_then(|p| p.domain().ok()) {
                eprintln!("domain: eta_min = {}, r_min = {}, r_sup = {}", d.eta_min, d.r_min, d.r_sup);
            }
            ExitCode::from(2)
        }
    }
}
