use std::path::PathBuf;

use charex_core::cf::{CfModel, GridSpec};
use charex_core::mixture::Family;
use charex_core::symfunc::Rational;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "charex",
    version,
    about = "Exact and Monte Carlo checks of the exponential/Laplace mixture characterization",
    long_about = "Exact and Monte Carlo checks of the identity prod_k phi(mu_k t) = sum_k theta_k phi(mu_k t).\n\n\
                  Coefficients are exact rationals (\"1/3,-2,5/7\"). Set CHAREX_THREADS to cap the worker count.\n\
                  Exit codes: 0 success, 2 validation error, 3 mathematical inconsistency."
)]
pub struct Cli {
    /// Output format. JSON mode prints one object per line.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Exp,
    Laplace,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Exp => Family::Exponential,
            FamilyArg::Laplace => Family::Laplace,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Encoding {
    Text,
    Binary,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mixture coefficients theta_k for a coefficient vector.
    Theta(MuArgs),
    /// Scan the condition h_m(mu) != p_m(mu) for m >= 2.
    Check {
        #[command(flatten)]
        mu: MuArgs,
        #[arg(long, default_value_t = 64)]
        m_max: u32,
    },
    /// Check sum_k theta_k mu_k^m against h_m (exp) or h_{m/2}(mu^2) (laplace, even m).
    Lemma1 {
        #[command(flatten)]
        mu: MuArgs,
        #[arg(long, default_value_t = 24)]
        m_max: u32,
    },
    /// Grid residual of the product/mixture identity, or of phi(t)phi(-t) = (phi(t)+phi(-t))/2 with --phisa.
    VerifyCf {
        /// exp:RATE, negexp:RATE, laplace:RATE, bernoulli:ATOM or degenerate.
        #[arg(long, value_parser = parse_model)]
        model: CfModel,
        #[arg(long, value_parser = parse_mu_list, allow_hyphen_values = true, required_unless_present = "phisa")]
        mu: Option<MuList>,
        #[arg(long, value_enum, default_value_t = FamilyArg::Exp)]
        family: FamilyArg,
        /// tmin:tmax:points
        #[arg(long, value_parser = parse_grid, default_value = "-10:10:2001", allow_hyphen_values = true)]
        grid: GridSpec,
        /// Check the two-point equation instead of the mixture identity.
        #[arg(long)]
        phisa: bool,
    },
    /// Reconstruct moments M_0..M_mmax from the recursion.
    Moments {
        #[command(flatten)]
        mu: MuArgs,
        /// Seeded moment `k=v` with exact rational v; degree 1 is required.
        #[arg(long = "seed-moment", value_parser = parse_seed_moment, allow_hyphen_values = true)]
        seed_moment: Vec<(u32, Rational)>,
        #[arg(long, default_value_t = 20)]
        m_max: u32,
    },
    /// Density and CDF of S = sum_k mu_k X_k with X_k ~ Exp(lambda).
    Pdf {
        #[command(flatten)]
        mu: MuArgs,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Comma-separated evaluation points.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
    },
    /// Seeded draws of S = sum_k mu_k X_k with X_k ~ Exp(lambda).
    Sample {
        #[command(flatten)]
        mu: MuArgs,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 100_000)]
        n_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample encoding: newline-delimited decimal text or little-endian f64.
        #[arg(long, value_enum, default_value_t = Encoding::Text)]
        encoding: Encoding,
        /// Write samples here and print a summary instead.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare S and S/lambda with the n-th order statistic of L exponentials.
    Renyi {
        /// Sample size L.
        #[arg(long = "size", short = 'L')]
        size: u32,
        /// Rank n, 1 <= n < L.
        #[arg(long)]
        rank: u32,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 100_000)]
        n_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct MuArgs {
    /// Comma-separated exact rationals, e.g. 1/3,-2,5/7.
    #[arg(long, value_parser = parse_mu_list, allow_hyphen_values = true)]
    pub mu: MuList,
    #[arg(long, value_enum, default_value_t = FamilyArg::Exp)]
    pub family: FamilyArg,
}

/// Comma-separated exact rationals as one flag value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuList(pub Vec<Rational>);

fn parse_mu_list(s: &str) -> Result<MuList, String> {
    s.split(',')
        .enumerate()
        .map(|(i, item)| item.parse::<Rational>().map_err(|e| format!("mu[{i}]: {e}")))
        .collect::<Result<_, _>>()
        .map(MuList)
}

fn parse_model(s: &str) -> Result<CfModel, String> {
    s.parse().map_err(|e: charex_core::cf::CfError| e.to_string())
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    s.parse().map_err(|e: charex_core::cf::CfError| e.to_string())
}

fn parse_seed_moment(s: &str) -> Result<(u32, Rational), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("`{s}` is not k=v"))?;
    let k = k.trim().parse().map_err(|_| format!("bad degree in `{s}`"))?;
    let v = v.parse::<Rational>().map_err(|e| e.to_string())?;
    Ok((k, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_list_reports_offending_index() {
        assert_eq!(parse_mu_list("1,-2/3").unwrap().0.len(), 2);
        let err = parse_mu_list("1,0.5").unwrap_err();
        assert!(err.starts_with("mu[1]"), "{err}");
    }

    #[test]
    fn seed_moment_parsing() {
        assert_eq!(parse_seed_moment("2=-1/2").unwrap(), (2, "-1/2".parse().unwrap()));
        assert!(parse_seed_moment("2").is_err());
        assert!(parse_seed_moment("x=1").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
