use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use charex_core::cf::{identity_residual, phisa_residual, CfError, CfModel, GridSpec};
use charex_core::dist::{renyi_check, sample_sum, DistError, MixtureLaw};
use charex_core::mixture::{
    check_condition, theta_exponential, theta_laplace, verify_lemma1, verify_lemma1_laplace,
    Family, MixtureError, MuVector, Verdict,
};
use charex_core::moments::{classify_from_seed, reconstruct_moments, MomentError, StepOutcome};
use charex_core::symfunc::Rational;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::args::{Command, Encoding, Format, MuArgs, MuList};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Inconsistent(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<MixtureError> for CliError {
    fn from(e: MixtureError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<CfError> for CliError {
    fn from(e: CfError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<DistError> for CliError {
    fn from(e: DistError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<MomentError> for CliError {
    fn from(e: MomentError) -> Self {
        match e {
            MomentError::Inconsistent { .. } | MomentError::MissingSeed(_) => {
                CliError::Inconsistent(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

struct Printer<W: Write> {
    format: Format,
    out: W,
}

impl<W: Write> Printer<W> {
    fn json<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        serde_json::to_writer(&mut self.out, value).map_err(io::Error::from)?;
        writeln!(self.out)?;
        Ok(())
    }

    fn line(&mut self, text: impl AsRef<str>) -> Result<(), CliError> {
        writeln!(self.out, "{}", text.as_ref())?;
        Ok(())
    }

    fn is_json(&self) -> bool {
        self.format == Format::Json
    }
}

fn mu_vector(args: &MuArgs) -> Result<MuVector, CliError> {
    Ok(MuVector::new(args.mu.0.clone(), args.family.into())?)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

pub fn run(format: Format, command: Command) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut p = Printer { format, out: stdout.lock() };
    match command {
        Command::Theta(args) => cmd_theta(&mut p, &args),
        Command::Check { mu, m_max } => cmd_check(&mut p, &mu, m_max),
        Command::Lemma1 { mu, m_max } => cmd_lemma1(&mut p, &mu, m_max),
        Command::VerifyCf { model, mu, family, grid, phisa } => {
            cmd_verify_cf(&mut p, &model, mu, family.into(), &grid, phisa)
        }
        Command::Moments { mu, seed_moment, m_max } => cmd_moments(&mut p, &mu, &seed_moment, m_max),
        Command::Pdf { mu, lambda, x } => cmd_pdf(&mut p, &mu, lambda, &x),
        Command::Sample { mu, lambda, n_samples, seed, encoding, out } => {
            cmd_sample(&mut p, &mu, lambda, n_samples, seed, encoding, out.as_deref())
        }
        Command::Renyi { size, rank, lambda, n_samples, seed } => {
            cmd_renyi(&mut p, size, rank, lambda, n_samples, seed)
        }
    }
}

fn cmd_theta<W: Write>(p: &mut Printer<W>, args: &MuArgs) -> Result<(), CliError> {
    let mu = mu_vector(args)?;
    let theta = mu.theta()?;
    if p.is_json() {
        return p.json(&json!({
            "family": mu.family(),
            "mu": mu.entries(),
            "theta": theta.coefficients(),
        }));
    }
    p.line(format!("family: {}", mu.family()))?;
    p.line(format!("{:>4}  {:>16}  {:>24}", "k", "mu", "theta"))?;
    for (k, (m, t)) in mu.entries().iter().zip(theta.coefficients()).enumerate() {
        p.line(format!("{:>4}  {:>16}  {:>24}", k + 1, m, t))?;
    }
    Ok(())
}

fn cmd_check<W: Write>(p: &mut Printer<W>, args: &MuArgs, m_max: u32) -> Result<(), CliError> {
    let mu = mu_vector(args)?;
    let report = check_condition(&mu, m_max)?;
    if p.is_json() {
        return p.json(&report);
    }
    match (report.verdict, &report.witness) {
        (Verdict::PassProvenAllM, _) => p.line("PassProvenAllM: h_m != p_m for every m >= 2"),
        (Verdict::PassUpTo(m), _) => p.line(format!("PassUpTo({m}): no equality for 2 <= m <= {m}")),
        (Verdict::FailAt(m), Some((h, pm))) => {
            p.line(format!("FailAt({m}): h_{m} = {h}, p_{m} = {pm}"))
        }
        (Verdict::FailAt(m), None) => p.line(format!("FailAt({m})")),
    }
}

fn cmd_lemma1<W: Write>(p: &mut Printer<W>, args: &MuArgs, m_max: u32) -> Result<(), CliError> {
    let mu = mu_vector(args)?;
    let theta = mu.theta()?;
    let mut all_hold = true;
    for m in 0..=m_max {
        let check = match mu.family() {
            Family::Exponential => verify_lemma1(&mu, &theta, m)?,
            Family::Laplace if m % 2 == 0 => verify_lemma1_laplace(&mu, &theta, m)?,
            Family::Laplace => continue,
        };
        all_hold &= check.holds;
        if p.is_json() {
            p.json(&check)?;
        } else {
            p.line(format!(
                "m = {:>3}  {}  lhs = {}  rhs = {}",
                m,
                if check.holds { "holds" } else { "FAILS" },
                check.lhs,
                check.rhs
            ))?;
        }
    }
    if all_hold {
        Ok(())
    } else {
        Err(CliError::Inconsistent("identity failed for at least one degree".into()))
    }
}

fn cmd_verify_cf<W: Write>(
    p: &mut Printer<W>,
    model: &CfModel,
    mu: Option<MuList>,
    family: Family,
    grid: &GridSpec,
    phisa: bool,
) -> Result<(), CliError> {
    let residual = if phisa {
        phisa_residual(model, grid)
    } else {
        let entries = mu.ok_or_else(|| CliError::Validation("--mu is required".into()))?.0;
        let mu = MuVector::new(entries, family)?;
        let theta = match family {
            Family::Exponential => theta_exponential(&mu)?,
            Family::Laplace => theta_laplace(&mu)?,
        };
        identity_residual(model, &mu, &theta, grid)?
    };
    if p.is_json() {
        return p.json(&residual);
    }
    p.line(format!("model: {model}"))?;
    p.line(format!(
        "grid: [{}, {}] x {}",
        grid.t_min, grid.t_max, grid.points
    ))?;
    p.line(format!("residual: {:e} at t = {}", residual.residual, residual.argmax_t))
}

fn cmd_moments<W: Write>(
    p: &mut Printer<W>,
    args: &MuArgs,
    seed_moment: &[(u32, Rational)],
    m_max: u32,
) -> Result<(), CliError> {
    let mu = mu_vector(args)?;
    let theta = mu.theta()?;
    let seeds: BTreeMap<u32, Rational> = seed_moment.iter().cloned().collect();
    let recon = reconstruct_moments(&mu, &theta, &seeds, m_max)?;
    let values = recon.moments.values();
    let classification = match mu.family() {
        Family::Exponential => Some(classify_from_seed(&values[1])),
        Family::Laplace => None,
    };
    if p.is_json() {
        for step in &recon.steps {
            p.json(step)?;
        }
        let mut summary = json!({ "moments": values });
        if let Some(c) = &classification {
            summary["classification"] = serde_json::to_value(c).map_err(io::Error::from)?;
        }
        return p.json(&summary);
    }
    p.line(format!("{:>4}  {:>24}  {:>24}  {}", "m", "D", "R", "outcome"))?;
    for step in &recon.steps {
        let outcome = match &step.outcome {
            StepOutcome::Solved(_) => "solved",
            StepOutcome::SingularConsistent(_) => "singular (seeded)",
            StepOutcome::SingularInconsistent => "singular (inconsistent)",
        };
        p.line(format!(
            "{:>4}  {:>24}  {:>24}  {}",
            step.m, step.denominator, step.rhs, outcome
        ))?;
    }
    p.line(format!("moments: {}", join(values)))?;
    if let Some(c) = classification {
        p.line(format!("law: {c:?}"))?;
    }
    Ok(())
}

fn cmd_pdf<W: Write>(p: &mut Printer<W>, args: &MuArgs, lambda: f64, xs: &[f64]) -> Result<(), CliError> {
    let mu = mu_vector(args)?;
    let law = MixtureLaw::new(&mu, lambda)?;
    if !p.is_json() {
        p.line(format!("{:>14}  {:>22}  {:>22}", "x", "pdf", "cdf"))?;
    }
    for &x in xs {
        let (f, c) = (law.pdf(x), law.cdf(x));
        if p.is_json() {
            p.json(&json!({ "x": x, "pdf": f, "cdf": c }))?;
        } else {
            p.line(format!("{x:>14}  {f:>22.15e}  {c:>22.15e}"))?;
        }
    }
    Ok(())
}

fn write_samples(out: &mut impl Write, samples: &[f64], encoding: Encoding) -> io::Result<()> {
    match encoding {
        Encoding::Text => {
            for s in samples {
                writeln!(out, "{s}")?;
            }
        }
        Encoding::Binary => {
            for s in samples {
                out.write_all(&s.to_le_bytes())?;
            }
        }
    }
    out.flush()
}

fn cmd_sample<W: Write>(
    p: &mut Printer<W>,
    args: &MuArgs,
    lambda: f64,
    n_samples: usize,
    seed: u64,
    encoding: Encoding,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mu = mu_vector(args)?;
    let samples = sample_sum(&mu, lambda, n_samples, seed)?;
    let Some(path) = out else {
        return Ok(write_samples(&mut p.out, &samples, encoding)?);
    };
    let mut file = BufWriter::new(File::create(path)?);
    write_samples(&mut file, &samples, encoding)?;
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let expected = charex_core::symfunc::power_sum(mu.entries(), 1).to_f64() / lambda;
    if p.is_json() {
        return p.json(&json!({
            "n_samples": n_samples,
            "seed": seed,
            "mean": mean,
            "expected_mean": expected,
            "out": path.display().to_string(),
        }));
    }
    p.line(format!("wrote {n_samples} samples to {}", path.display()))?;
    p.line(format!("sample mean {mean} (exact {expected})"))
}

fn cmd_renyi<W: Write>(
    p: &mut Printer<W>,
    size: u32,
    rank: u32,
    lambda: f64,
    n_samples: usize,
    seed: u64,
) -> Result<(), CliError> {
    let report = renyi_check(size, rank, lambda, n_samples, seed)?;
    if p.is_json() {
        return p.json(&report);
    }
    p.line(format!("L = {size}, n = {rank}, lambda = {lambda}, N = {n_samples}, seed = {seed}"))?;
    p.line(format!("KS(S)        = {:.6}", report.ks_s))?;
    p.line(format!("KS(S/lambda) = {:.6}", report.ks_s_over_lambda))?;
    p.line(format!("threshold    = {:.6}", report.threshold))?;
    p.line(format!("matching: {:?}", report.matching))
}
