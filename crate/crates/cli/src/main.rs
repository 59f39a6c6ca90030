//! `orthogeo`: surface groups, arc censuses, series estimates and exact
//! linking numbers from the command line.
//!
//! Exit codes: 0 success, 2 usage or unreadable input, 3 enumeration cap
//! exceeded, 4 invalid input content or failed verification.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use orthogeo::arc_census::{
    census_capped, parse_spectrum_csv, write_rows_csv, write_spectrum_csv, CensusError, Orientation,
    Representative, SpectrumRow,
};
use orthogeo::euler_link::cdg::{parse_cdg, write_cdg};
use orthogeo::euler_link::{analyze, fixtures, format_rational, rational_to_f64, LinkError};
use orthogeo::fuchsian::{parse_grp, standard_group, write_grp, GroupError, SurfaceGroup, DEFAULT_CAP};
use orthogeo::hyp_plane::HPoint;
use orthogeo::numfmt::sig12;
use orthogeo::poincare_series::{
    diagnostics, estimate, partial_series_real, tail_completed_series, write_diagnostics_csv, Spectrum,
};

const MAX_TMAX: f64 = 16.0;

#[derive(Parser)]
#[command(name = "orthogeo", version, about = "Orthogeodesic arc spectra and their topology")]
struct Cli {
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Surface group files.
    Surface {
        #[command(subcommand)]
        action: SurfaceAction,
    },
    /// Length spectrum of orthogeodesic arcs between two representatives.
    Census {
        /// Surface group file (.grp).
        group: PathBuf,
        /// `point:<x>,<y>` or `geodesic:<word>`.
        #[arg(long)]
        c1: String,
        #[arg(long)]
        c2: String,
        #[arg(long)]
        tmax: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Cap on enumerated group elements.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Growth fit and value at zero of the series of a spectrum CSV.
    Series {
        spectrum: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        at: f64,
        /// Print a flat JSON record.
        #[arg(long)]
        json: bool,
        /// Truncation length of the census; defaults to the largest length.
        #[arg(long)]
        tmax: Option<f64>,
        /// Start of the growth-fit window.
        #[arg(long, default_value_t = 4.0)]
        fit_from: f64,
        /// Write the extrapolation grid as CSV.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Exact linking number and value at zero of a curve diagram.
    Link {
        diagram: PathBuf,
        /// JSON record from `series --json` to compare against.
        #[arg(long)]
        verify_against: Option<PathBuf>,
    },
    /// Write a built-in diagram (.cdg), `zeta` spectrum CSV or `random:<seed>` diagram.
    Fixture {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SurfaceAction {
    /// Standard regular-polygon group of the given genus.
    Gen {
        #[arg(long)]
        genus: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Cap(String),
    Invalid(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Cap(_) => 3,
            Failure::Invalid(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Cap(m) | Failure::Invalid(m) => m,
        }
    }
}

impl From<GroupError> for Failure {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::RadiusTooLarge { .. } => Failure::Cap(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<CensusError> for Failure {
    fn from(e: CensusError) -> Self {
        match e {
            CensusError::Group(g) => g.into(),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<LinkError> for Failure {
    fn from(e: LinkError) -> Self {
        match e {
            LinkError::Invalid(v) => Failure::Invalid(format!("invalid diagram:\n  {}", v.join("\n  "))),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn representative(g: &SurfaceGroup, text: &str) -> Result<Representative, Failure> {
    let bad = |why: String| Failure::Usage(format!("bad representative '{text}': {why}"));
    if let Some(xy) = text.strip_prefix("point:") {
        let (x, y) = xy.split_once(',').ok_or_else(|| bad("expected point:<x>,<y>".into()))?;
        let x: f64 = x.trim().parse().map_err(|_| bad("x is not a number".into()))?;
        let y: f64 = y.trim().parse().map_err(|_| bad("y is not a number".into()))?;
        let p = HPoint::new(x, y).map_err(|e| bad(e.to_string()))?;
        Ok(Representative::point(p))
    } else if let Some(w) = text.strip_prefix("geodesic:") {
        let word = g.parse_word(w).map_err(|e| bad(e.to_string()))?;
        Representative::geodesic_from_word(g, &word, Orientation::Forward).map_err(|e| bad(e.to_string()))
    } else {
        Err(bad("expected point:<x>,<y> or geodesic:<word>".into()))
    }
}

fn cmd_surface(genus: u32, output: Option<&Path>) -> Result<(), Failure> {
    if genus < 2 {
        return Err(Failure::Usage("genus must be ≥ 2".into()));
    }
    let g = standard_group(genus)?;
    emit(output, &write_grp(&g))
}

fn cmd_census(
    group: &Path,
    c1: &str,
    c2: &str,
    tmax: f64,
    output: Option<&Path>,
    cap: usize,
) -> Result<(), Failure> {
    if !(0.0..=MAX_TMAX).contains(&tmax) {
        return Err(Failure::Usage(format!("--tmax must lie in [0, {MAX_TMAX}]")));
    }
    if cap > DEFAULT_CAP {
        return Err(Failure::Usage(format!("--cap must not exceed {DEFAULT_CAP}")));
    }
    let g = parse_grp(&read(group)?)?;
    let (r1, r2) = (representative(&g, c1)?, representative(&g, c2)?);
    let spectrum = census_capped(&g, &r1, &r2, tmax, cap)?;
    emit(output, &write_spectrum_csv(&spectrum))
}

struct SeriesReport {
    h: f64,
    amplitude: f64,
    estimate: f64,
    uncertainty: f64,
}

fn json_record(r: &SeriesReport) -> String {
    format!(
        "{{\"h\": {}, \"A\": {}, \"estimate\": {}, \"uncertainty\": {}}}\n",
        sig12(r.h),
        sig12(r.amplitude),
        sig12(r.estimate),
        sig12(r.uncertainty)
    )
}

fn cmd_series(
    path: &Path,
    at: f64,
    json: bool,
    tmax: Option<f64>,
    fit_from: f64,
    diag_out: Option<&Path>,
) -> Result<(), Failure> {
    let rows: Vec<SpectrumRow> = parse_spectrum_csv(&read(path)?)?;
    let longest = rows.iter().map(|r| r.length).fold(0.0, f64::max);
    let t_max = tmax.unwrap_or(longest);
    if t_max < longest {
        return Err(Failure::Usage(format!("--tmax {t_max} is below the longest arc {longest}")));
    }
    let spectrum = Spectrum::from_rows(&rows, t_max);
    let (fit, est) = estimate(&spectrum, fit_from).map_err(|e| Failure::Invalid(e.to_string()))?;
    let (h, amplitude) = fit.map_or((0.0, 0.0), |f| (f.h, f.amplitude));

    if let Some(p) = diag_out {
        let rows = match fit {
            Some(f) => diagnostics(&spectrum, f.amplitude, f.h).map_err(|e| Failure::Invalid(e.to_string()))?,
            None => Vec::new(),
        };
        emit(Some(p), &write_diagnostics_csv(&rows))?;
    }

    let report = if at == 0.0 {
        SeriesReport { h, amplitude, estimate: est.value, uncertainty: est.uncertainty }
    } else {
        let value = match fit {
            Some(f) => tail_completed_series(&spectrum, at, f.amplitude, f.h)
                .map_err(|e| Failure::Usage(e.to_string()))?,
            None => partial_series_real(&spectrum, at),
        };
        SeriesReport { h, amplitude, estimate: value, uncertainty: 0.0 }
    };
    if json {
        print!("{}", json_record(&report));
    } else {
        println!("h = {}", sig12(report.h));
        println!("A = {}", sig12(report.amplitude));
        println!("s = {}", sig12(at));
        println!("estimate = {}", sig12(report.estimate));
        println!("uncertainty = {}", sig12(report.uncertainty));
        if at == 0.0 {
            println!("method = {}", est.method.tag());
        }
        println!("t_max = {}", sig12(t_max));
    }
    Ok(())
}

fn read_series_json(path: &Path) -> Result<(f64, f64), Failure> {
    let v: serde_json::Value = serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    let field = |k: &str| {
        v.get(k)
            .and_then(serde_json::Value::as_f64)
            .ok_or_else(|| Failure::Invalid(format!("{}: missing numeric field '{k}'", path.display())))
    };
    Ok((field("estimate")?, field("uncertainty")?))
}

fn cmd_link(path: &Path, verify: Option<&Path>) -> Result<(), Failure> {
    let d = parse_cdg(&read(path)?)?;
    let r = analyze(&d)?;
    let scaled = &r.value_at_zero * num_rational::BigRational::from_integer(r.chi.into());
    println!("chi = {}", r.chi);
    println!("chi_f1 = {}", r.chi_f[0]);
    println!("chi_f2 = {}", r.chi_f[1]);
    println!("chi_f1f2 = {}", r.chi_product);
    println!("chi_intersection = {}", r.chi_intersection);
    println!("epsilon = {}", r.epsilon);
    println!("L = {}", format_rational(&r.linking));
    println!("N_infty = {}", format_rational(&r.value_at_zero));
    println!(
        "chi*N_infty = {} ({})",
        format_rational(&scaled),
        if scaled.is_integer() { "integer" } else { "NOT an integer" }
    );
    if let Some(p) = verify {
        let (value, uncertainty) = read_series_json(p)?;
        let exact = rational_to_f64(&r.value_at_zero);
        let gap = (value - exact).abs();
        let pass = gap <= uncertainty;
        println!(
            "verify: {} |{} - ({})| = {} vs uncertainty {}",
            if pass { "PASS" } else { "FAIL" },
            sig12(value),
            format_rational(&r.value_at_zero),
            sig12(gap),
            sig12(uncertainty)
        );
        if !pass {
            return Err(Failure::Invalid("series estimate disagrees with the exact value".into()));
        }
    }
    Ok(())
}

fn cmd_fixture(name: &str, output: Option<&Path>) -> Result<(), Failure> {
    if name == "zeta" {
        let s = Spectrum::synthetic_zeta(0.25, 100_000);
        let rows: Vec<SpectrumRow> = s
            .lengths
            .iter()
            .map(|&length| SpectrumRow { length, multiplicity: 1, start_sign: 1, end_sign: 1 })
            .collect();
        return emit(output, &write_rows_csv(&rows));
    }
    if let Some(seed) = name.strip_prefix("random:") {
        use rand::SeedableRng;
        let seed: u64 = seed.parse().map_err(|_| Failure::Usage(format!("bad seed '{seed}'")))?;
        let d = fixtures::random_diagram(&mut rand::rngs::StdRng::seed_from_u64(seed));
        return emit(output, &write_cdg(&d));
    }
    let d = fixtures::named(name).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown fixture '{name}'; known: {}, zeta, random:<seed>",
            fixtures::NAMES.join(", ")
        ))
    })?;
    emit(output, &write_cdg(&d))
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Surface { action: SurfaceAction::Gen { genus, output } } => cmd_surface(genus, output.as_deref()),
        Command::Census { group, c1, c2, tmax, output, cap } => {
            cmd_census(&group, &c1, &c2, tmax, output.as_deref(), cap)
        }
        Command::Series { spectrum, at, json, tmax, fit_from, diagnostics } => {
            cmd_series(&spectrum, at, json, tmax, fit_from, diagnostics.as_deref())
        }
        Command::Link { diagram, verify_against } => cmd_link(&diagram, verify_against.as_deref()),
        Command::Fixture { name, output } => cmd_fixture(&name, output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
