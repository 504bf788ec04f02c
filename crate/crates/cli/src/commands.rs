use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use packdim::dimension::{
    box_dimension_support, esssup_exponent, generalized_dimension_upper, inequality_report,
    pointwise_exponents, DEFAULT_QUANTILE,
};
use packdim::dynamics::{gk_report, WavePacket};
use packdim::eigen::{eigensolve, Site, MAX_FULL_SIZE, MAX_SPECTRAL_SIZE};
use packdim::operators::OdometerPoint;
use packdim::suite::{self, SuiteConfig};
use packdim::xi::{strichartz_check, xi_series};
use packdim::{Measure, Operator, Scales, Spec, Times};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

const SCHEMA_VERSION: u32 = 1;
const DEFAULT_OPERATOR_N: usize = 2048;
const DEFAULT_UNIFORM_N: usize = 4096;
const DEFAULT_DEPTH: u32 = 10;
const DEFAULT_RATIO: f64 = 0.5;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok((path, BufWriter::new(file)))
}

/// Writes a CSV preceded by the provenance comment.
fn write_csv(
    cfg: &ExperimentConfig,
    hash: &str,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let (path, mut out) = create(&cfg.out_dir(), name)?;
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    writeln!(out, "# config-hash: {hash}").map_err(io)?;
    body(&mut out).map_err(io)?;
    out.flush().map_err(io)
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    config_hash: &'a str,
    result: T,
}

fn write_json<T: Serialize>(
    cfg: &ExperimentConfig,
    command: &str,
    hash: &str,
    name: &str,
    result: T,
) -> Result<(), CliError> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        config_hash: hash,
        result,
    };
    let (path, mut out) = create(&cfg.out_dir(), name)?;
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    serde_json::to_writer_pretty(&mut out, &env).map_err(|e| io(e.into()))?;
    writeln!(out).map_err(io)?;
    out.flush().map_err(io)
}

fn read_spec(path: &Path) -> Result<Spec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read spec file {}: {e}", path.display())))?;
    Spec::parse(&text).map_err(|e| usage(format!("spec file {}: {e}", path.display())))
}

fn power_of_two(n: usize, max: usize, what: &str) -> Result<(), CliError> {
    if n < 2 || !n.is_power_of_two() || n > max {
        return Err(usage(format!(
            "{what} needs N a power of 2 in [2, {max}], got {n}"
        )));
    }
    Ok(())
}

/// Operator named by `name`, or read from `--spec`, on `n` sites.
fn operator(cfg: &ExperimentConfig, name: Option<&str>, n: usize) -> Result<Operator, CliError> {
    if let Some(path) = &cfg.spec {
        if name.is_some_and(|s| !s.is_empty()) {
            return Err(usage("give either an operator name or --spec, not both"));
        }
        return from_spec(&read_spec(path)?, n);
    }
    match name.unwrap_or("canonical") {
        "free" => Ok(Operator::free(n)?),
        "period2" => from_spec(&Spec::period_two(1.0), n),
        "trap" => Ok(Operator::trap(n, suite::TRAP_HEIGHT)?),
        "canonical" => from_spec(&Spec::canonical(), n),
        other if other.ends_with(".spec") || Path::new(other).exists() => {
            from_spec(&read_spec(Path::new(other))?, n)
        }
        other => Err(usage(format!("unknown operator `{other}`"))),
    }
}

fn from_spec(spec: &Spec, n: usize) -> Result<Operator, CliError> {
    let kappa = OdometerPoint::zero(spec.max_k() as usize);
    Ok(Operator::from_spec(spec, &kappa, n)?)
}

fn site(cfg: &ExperimentConfig) -> Result<Site, CliError> {
    match cfg.site.unwrap_or(0) {
        0 => Ok(Site::Zero),
        -1 => Ok(Site::MinusOne),
        s => Err(usage(format!("site must be 0 or -1, got {s}"))),
    }
}

enum Fixture {
    Measure(Measure),
    Spectral(packdim::Spectral),
}

fn build_fixture(cfg: &ExperimentConfig) -> Result<Fixture, CliError> {
    let name = cfg
        .fixture
        .as_deref()
        .ok_or_else(|| usage("no fixture given"))?;
    let (head, tail) = match name.split_once(':') {
        Some((h, t)) => (h, Some(t)),
        None => (name, None),
    };
    match head {
        "atom" => Ok(Fixture::Measure(Measure::dirac(0.0))),
        "uniform" => Ok(Fixture::Measure(Measure::uniform(
            cfg.n.unwrap_or(DEFAULT_UNIFORM_N),
        )?)),
        "cantor" => Ok(Fixture::Measure(Measure::cantor(
            cfg.depth.unwrap_or(DEFAULT_DEPTH),
        )?)),
        "spectral" => {
            let n = cfg.n.unwrap_or(DEFAULT_OPERATOR_N);
            power_of_two(n, MAX_SPECTRAL_SIZE, "a spectral measure")?;
            let op = operator(cfg, tail.or(cfg.operator.as_deref()), n)?;
            Ok(Fixture::Spectral(eigensolve(&op)?))
        }
        "csv" => {
            let path = cfg
                .input
                .as_ref()
                .ok_or_else(|| usage("the csv fixture needs --input"))?;
            let file = File::open(path)
                .map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
            Ok(Fixture::Measure(Measure::read_csv(BufReader::new(file))?))
        }
        other => Err(usage(format!("unknown fixture `{other}`"))),
    }
}

fn fixture_measure(cfg: &ExperimentConfig) -> Result<Measure, CliError> {
    match build_fixture(cfg)? {
        Fixture::Measure(m) => Ok(m),
        Fixture::Spectral(sd) => Ok(sd.spectral_measure(site(cfg)?)?),
    }
}

fn ratio(cfg: &ExperimentConfig) -> Result<f64, CliError> {
    let r = cfg.ratio.unwrap_or(DEFAULT_RATIO);
    if !(r > 0.0 && r < 1.0) {
        return Err(usage(format!("grid ratio must lie in (0, 1), got {r}")));
    }
    Ok(r)
}

fn scale_grid(cfg: &ExperimentConfig, mu: &Measure) -> Result<Scales, CliError> {
    let ratio = ratio(cfg)?;
    let default = || -> Result<Scales, CliError> { Ok(Scales::default_for(mu, ratio)?) };
    let (hi, lo) = match (cfg.eps_max, cfg.eps_min) {
        (None, None) => return default(),
        (hi, lo) => {
            let d = default().ok();
            let hi = hi.or(d.as_ref().map(|g| g.max()));
            let lo = lo.or(d.as_ref().map(|g| g.min()));
            (hi, lo)
        }
    };
    match (hi, lo) {
        (Some(hi), Some(lo)) => Ok(Scales::geometric(hi, lo, ratio)?),
        _ => Err(usage(
            "cannot complete the scale grid; give both --eps-max and --eps-min",
        )),
    }
}

fn time_grid(
    cfg: &ExperimentConfig,
    t_min: f64,
    t_max: f64,
    points: usize,
) -> Result<Times, CliError> {
    Ok(Times::geometric(
        cfg.t_min.unwrap_or(t_min),
        cfg.t_max.unwrap_or(t_max),
        cfg.t_points.unwrap_or(points),
    )?)
}

pub fn measure(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let hash = cfg.hash("measure");
    match build_fixture(cfg)? {
        Fixture::Measure(m) => write_csv(cfg, &hash, "measure.csv", |w| m.write_csv(w)),
        Fixture::Spectral(sd) => write_csv(cfg, &hash, "spectral.csv", |w| sd.write_csv(w)),
    }
}

#[derive(Serialize)]
struct DimensionSummary {
    radii: Vec<f64>,
    quantile: f64,
    esssup: f64,
    generalized: Vec<(f64, f64)>,
    box_dimension: f64,
    report: Option<packdim::DimensionReport>,
}

pub fn dims(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let hash = cfg.hash("dims");
    let mu = fixture_measure(cfg)?;
    let grid = scale_grid(cfg, &mu)?;
    let qs = cfg.q.clone().unwrap_or_else(|| vec![0.5, 2.0]);
    let mut generalized = Vec::with_capacity(qs.len());
    for &q in &qs {
        generalized.push((q, generalized_dimension_upper(&mu, q, &grid)?.exponent));
    }
    let q_low = qs.iter().copied().find(|&q| q < 1.0);
    let q_high = qs.iter().copied().find(|&q| q > 1.0);
    let report = match (q_low, q_high) {
        (Some(q), Some(s)) => Some(inequality_report(
            &mu,
            q,
            s,
            cfg.alpha.unwrap_or(1.0),
            &grid,
        )?),
        _ => None,
    };
    let pointwise = pointwise_exponents(&mu, &grid)?;
    let summary = DimensionSummary {
        radii: grid.radii().to_vec(),
        quantile: DEFAULT_QUANTILE,
        esssup: esssup_exponent(&mu, &grid, DEFAULT_QUANTILE)?,
        generalized,
        box_dimension: box_dimension_support(&mu, &grid)?.exponent,
        report,
    };
    write_csv(cfg, &hash, "pointwise.csv", |w| {
        writeln!(w, "position,weight,exponent")?;
        for (x, m, e) in &pointwise {
            writeln!(w, "{x:.16e},{m:.16e},{e:.16e}")?;
        }
        Ok(())
    })?;
    write_json(cfg, "dims", &hash, "dims.json", summary)
}

#[derive(Serialize)]
struct XiSummary {
    exponent: f64,
    window: (f64, f64),
    strichartz: Option<packdim::xi::StrichartzReport<f64>>,
}

pub fn xi(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let hash = cfg.hash("xi");
    let mu = fixture_measure(cfg)?;
    let grid = time_grid(cfg, 10.0, 1e3, 12)?;
    let series = xi_series(&mu, &grid)?;
    let strichartz = match cfg.alpha {
        Some(a) => Some(strichartz_check(&mu, a, &grid)?),
        None => None,
    };
    write_csv(cfg, &hash, "xi.csv", |w| series.write_csv(w))?;
    let summary = XiSummary {
        exponent: series.scaling.exponent,
        window: series.scaling.window,
        strichartz,
    };
    write_json(cfg, "xi", &hash, "xi.json", summary)
}

#[derive(Serialize)]
struct TransportSummary {
    n: usize,
    exponents: Vec<(f64, f64, f64)>,
    gk: packdim::dynamics::GkReport<f64>,
}

pub fn transport(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let hash = cfg.hash("transport");
    let n = cfg.n.unwrap_or(DEFAULT_OPERATOR_N);
    power_of_two(n, MAX_FULL_SIZE, "transport")?;
    let name = cfg.fixture.as_deref().or(cfg.operator.as_deref());
    let op = operator(cfg, name, n)?;
    let sd = eigensolve(&op)?;
    let packet = WavePacket::new(op, sd.eigenvalues);
    let qs = cfg.q.clone().unwrap_or_else(|| suite::Q_LIST.to_vec());
    let grid = time_grid(cfg, 20.0, 200.0, 12)?;
    let series = packet.transport_series(&qs, &grid)?;
    for s in &series {
        write_csv(cfg, &hash, &format!("transport_q{}.csv", s.q), |w| {
            s.write_csv(w)
        })?;
    }
    let summary = TransportSummary {
        n,
        exponents: series
            .iter()
            .map(|s| (s.q, s.beta_plus.exponent, s.beta_minus.exponent))
            .collect(),
        gk: gk_report(&series),
    };
    write_json(cfg, "transport", &hash, "transport.json", summary)
}

pub fn verify(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let hash = cfg.hash("verify");
    for key in cfg.clauses.iter().flatten().chain(cfg.tolerance.keys()) {
        if !SuiteConfig::is_known_key(key) {
            return Err(usage(format!("unknown clause `{key}`")));
        }
    }
    let spec = match &cfg.spec {
        Some(path) => Some(read_spec(path)?),
        None => None,
    };
    let suite_cfg = SuiteConfig {
        clauses: cfg.clauses.clone(),
        tolerances: cfg.tolerance.clone(),
        spec,
    };
    let report = suite::run(&suite_cfg)?;
    for c in &report.clauses {
        println!(
            "{} {:<28} deviation {:>12.5e}  tolerance {:>10.3e}  {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.deviation,
            c.tolerance,
            c.note
        );
    }
    let failing: Vec<String> = report.failing().map(|c| c.name.clone()).collect();
    write_json(cfg, "verify", &hash, "verify.json", &report)?;
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failing.join(", ")))
    }
}
