use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rcm_core::exact::{self, enumerate, ExactOptions};
use rcm_core::numeric::{fmt_real, Real};
use rcm_core::rate::{self, PhasePoint, RateCurve};
use rcm_core::sampler::{self, ChainConfig, Init};
use rcm_core::validation::{self, Level};
use rcm_core::{tree, Error, ModelParams};
use serde::Serialize;

use crate::manifest::{manifest_path, sibling, with_manifest_ref, RunManifest};
use crate::{
    ExactArgs, InitArg, LevelArg, PhaseArgs, RateArgs, SaddleArgs, SampleArgs, ValidateArgs,
    EXIT_DOMAIN, EXIT_USAGE, EXIT_VALIDATION,
};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(_) => EXIT_DOMAIN,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Core(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Output files of one run plus its manifest.
struct Run {
    start: Instant,
    manifest: RunManifest,
    manifest_path: Option<PathBuf>,
}

impl Run {
    fn new(
        sub: &'static str,
        args: &impl Serialize,
        seed: Option<u64>,
        out: Option<&Path>,
    ) -> Self {
        Self {
            start: Instant::now(),
            manifest: RunManifest::new(sub, args, seed),
            manifest_path: out.map(manifest_path),
        }
    }

    fn json(&self, body: &str) -> String {
        match &self.manifest_path {
            Some(m) => with_manifest_ref(body, m),
            None => body.to_string(),
        }
    }

    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        fs::write(path, contents)?;
        self.note(path);
        Ok(())
    }

    fn note(&mut self, path: &Path) {
        self.manifest.outputs.push(path.display().to_string());
    }

    fn finish(mut self, status: &str) -> Result<()> {
        if let Some(m) = self.manifest_path.take() {
            self.manifest.finish(self.start.elapsed(), status);
            fs::write(&m, self.manifest.to_json() + "\n")?;
        }
        Ok(())
    }
}

pub fn rate(a: &RateArgs) -> Result<u8> {
    let curve = RateCurve::new(a.lambda, a.q, a.grid)?;
    let phase = PhasePoint::compute(a.lambda, a.q);
    let mut run = Run::new("rate", a, None, a.out.as_deref());
    match &a.out {
        None => {
            print!("{}", curve.to_csv());
            if let Ok(p) = &phase {
                eprintln!("{}", p.to_json());
            }
        }
        Some(out) => {
            run.write(out, &curve.to_csv())?;
            if let Ok(p) = &phase {
                let pj = sibling(out, "phase.json");
                let body = run.json(&p.to_json());
                run.write(&pj, &(body + "\n"))?;
            }
        }
    }
    match phase {
        Ok(_) => {
            run.finish("ok")?;
            Ok(0)
        }
        Err(e) => {
            run.finish(&format!("phase point refused: {e}"))?;
            Err(e.into())
        }
    }
}

pub fn phase(a: &PhaseArgs) -> Result<u8> {
    if a.lambda_step.is_nan()
        || a.lambda_step <= 0.0
        || a.lambda_start.is_nan()
        || a.lambda_start <= 0.0
        || a.lambda_stop < a.lambda_start
    {
        return Err(CliError::Usage(
            "lambda grid needs 0 < lambda-start <= lambda-stop and lambda-step > 0".into(),
        ));
    }
    let steps = ((a.lambda_stop - a.lambda_start) / a.lambda_step + 1e-9).floor() as usize;
    let mut csv = String::from("q,lambda,lambda_c,theta_star,theta_max,free_energy\n");
    for &q in &a.q {
        for i in 0..=steps {
            let lambda = a.lambda_start + a.lambda_step * i as f64;
            if a.skip_critical && rate::is_critical(lambda, q)? {
                continue;
            }
            let p = PhasePoint::compute(lambda, q)?;
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_real(q),
                fmt_real(lambda),
                fmt_real(p.lambda_c),
                fmt_real(p.theta_star),
                fmt_real(p.theta_max),
                fmt_real(p.free_energy)
            ));
        }
    }
    let mut run = Run::new("phase", a, None, a.out.as_deref());
    match &a.out {
        None => print!("{csv}"),
        Some(out) => run.write(out, &csv)?,
    }
    run.finish("ok")?;
    Ok(0)
}

pub fn exact(a: &ExactArgs) -> Result<u8> {
    let params = ModelParams::new(a.n, a.lambda, a.q)?;
    let opts = ExactOptions {
        r_list: a.r.clone(),
        eps_list: a.eps.clone(),
        long_run: a.long_run,
    };
    let report = enumerate(&params, &opts)?;
    let finite = a
        .finite_rate
        .map(|eps| -> Result<String> {
            let mut csv = String::from("k,theta,weight,rate\n");
            for row in exact::finite_rate_table(&params, eps)? {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    row.k,
                    fmt_real(row.theta),
                    fmt_real(row.weight),
                    fmt_real(row.rate)
                ));
            }
            Ok(csv)
        })
        .transpose()?;
    let unique = a
        .uniqueness
        .map(|eps| exact::uniqueness_check(&params, eps).map(|rows| exact::uniqueness_json(&rows)))
        .transpose()?;
    let mut run = Run::new("exact", a, None, a.out.as_deref());
    match &a.out {
        None => {
            println!("{}", report.to_json());
            if let Some(csv) = &finite {
                print!("{csv}");
            }
            if let Some(u) = &unique {
                println!("{u}");
            }
        }
        Some(out) => {
            let body = run.json(&report.to_json());
            run.write(out, &(body + "\n"))?;
            if let Some(csv) = &finite {
                run.write(&sibling(out, "finite_rate.csv"), csv)?;
            }
            if let Some(u) = &unique {
                let body = run.json(u);
                run.write(&sibling(out, "uniqueness.json"), &(body + "\n"))?;
            }
        }
    }
    run.finish("ok")?;
    Ok(0)
}

pub fn sample(a: &SampleArgs) -> Result<u8> {
    let time_limit = match a.time_limit {
        Some(t) if !(t > 0.0 && t.is_finite()) => {
            return Err(CliError::Usage(format!(
                "time-limit must be positive, got {t}"
            )));
        }
        t => t.map(Duration::from_secs_f64),
    };
    let cfg = ChainConfig {
        params: ModelParams::new(a.n, a.lambda, a.q)?,
        seed: a.seed,
        burn_in_sweeps: a.burnin,
        sample_sweeps: a.sweeps,
        thin: a.thin,
        eps: a.eps.clone(),
        init: match a.init {
            InitArg::Auto => Init::Auto,
            InitArg::Empty => Init::Empty,
            InitArg::Full => Init::Full,
        },
        time_limit,
    };
    if cfg.is_experimental() {
        eprintln!("warning: q < 1 is outside the validated range; results are experimental");
    }
    let mut run = Run::new("sample", a, Some(a.seed), a.out.as_deref());
    let mut sink: Box<dyn Write> = match &a.out {
        Some(out) => Box::new(BufWriter::new(fs::File::create(out)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    writeln!(sink, "{}", sampler::csv_header(cfg.eps.len()))?;
    let mut records = Vec::new();
    let outcome = sampler::run_chain_with(&cfg, |r| {
        writeln!(sink, "{}", sampler::csv_row(r))?;
        records.push(r.clone());
        Ok(())
    });
    sink.flush()?;
    drop(sink);
    if let Some(out) = &a.out {
        run.note(out);
    }
    let status = match &outcome {
        Ok(_) => "ok".to_string(),
        Err(Error::ResourceLimit { records, reason }) => {
            format!("aborted after {records} records: {reason}")
        }
        Err(_) => "failed".to_string(),
    };
    match sampler::summary_json(&cfg, &records) {
        Ok(summary) => match &a.out {
            Some(out) => {
                let body = run.json(&summary);
                run.write(&sibling(out, "summary.json"), &(body + "\n"))?;
            }
            None => eprintln!("{summary}"),
        },
        Err(e) => eprintln!("warning: no summary: {e}"),
    }
    run.finish(&status)?;
    outcome?;
    Ok(0)
}

#[derive(Serialize)]
struct DiscreteJson {
    n: usize,
    s: Real,
    theta: Real,
    value: Real,
}

pub fn saddle(a: &SaddleArgs) -> Result<u8> {
    let mut body = tree::saddle_diagnostic_json(a.alpha, a.r)?;
    if let Some(n) = a.n {
        let d = tree::discrete_saddle(a.alpha, a.r, n)?;
        let mut v: serde_json::Value = serde_json::from_str(&body).expect("core emits valid JSON");
        v["discrete"] = serde_json::to_value(DiscreteJson {
            n,
            s: Real(d.s),
            theta: Real(d.theta),
            value: Real(d.value),
        })
        .expect("plain struct serialises");
        body = serde_json::to_string_pretty(&v).expect("value serialises");
    }
    let mut run = Run::new("saddle", a, None, a.out.as_deref());
    match &a.out {
        None => println!("{body}"),
        Some(out) => {
            let body = run.json(&body);
            run.write(out, &(body + "\n"))?;
        }
    }
    run.finish("ok")?;
    Ok(0)
}

pub fn validate(a: &ValidateArgs) -> Result<u8> {
    let level = match a.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let results = validation::run_all(level);
    for r in &results {
        eprintln!("{}", r.line());
    }
    let passed = results.iter().all(|r| r.passed());
    let report = validation::report_json(level, &results);
    let mut run = Run::new(
        "validate",
        a,
        Some(validation::VALIDATION_SEED),
        a.out.as_deref(),
    );
    match &a.out {
        None => println!("{report}"),
        Some(out) => {
            let body = run.json(&report);
            run.write(out, &(body + "\n"))?;
        }
    }
    run.finish(if passed { "ok" } else { "validation failed" })?;
    Ok(if passed { 0 } else { EXIT_VALIDATION })
}
