use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lemlab_core::battery::Battery;
use lemlab_core::Family;

#[derive(Parser, Debug)]
#[command(name = "lemlab", version, about = "Lengths, areas and conformal data of polynomial lemniscates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Length of {|p| = 1}, with the z^n - 1 closed form and asymptote.
    Length(PolyArgs),
    /// Polyline of {|p| = level} as CSV and SVG.
    Trace(PolyArgs),
    /// Heat map of |p''/p'| with the lemniscate on top.
    PsiMap {
        #[command(flatten)]
        poly: PolyArgs,
        /// Grid cells per side.
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Area of the sublevel set {|p| < level}.
    Area(PolyArgs),
    /// Laurent coefficients of the exterior map of {|p| < level}.
    Laurent {
        #[command(flatten)]
        poly: PolyArgs,
        /// Number of coefficients a_1..a_K; 0 picks a default from the degree.
        #[arg(long, default_value_t = 0)]
        terms: usize,
    },
    /// Runs the inequality battery and writes one report per line.
    Verify {
        #[arg(long, default_value = "full", value_parser = parse_battery)]
        battery: Battery,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Nelder-Mead search for long lemniscates among normalized polynomials.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Also sample this many random directions per perturbation size.
        #[arg(long, default_value_t = 0)]
        directions: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Lists the built-in families, or writes one as polynomial JSON.
    Families {
        #[arg(long, value_parser = parse_family)]
        family: Option<Family>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Seed, hexadecimal with or without 0x.
    #[arg(long, value_parser = parse_seed, default_value = "0x45485031")]
    pub seed: u64,
    /// Relative quadrature tolerance; each command has its own default.
    #[arg(long)]
    pub budget_tol: Option<f64>,
    #[arg(long, default_value = "lemlab-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct PolyArgs {
    #[arg(long, value_parser = parse_family, conflicts_with = "input", required_unless_present = "input")]
    pub family: Option<Family>,
    /// Polynomial JSON file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Parameter of example1 and example2.
    #[arg(long)]
    pub a: Option<f64>,
    /// Radius of the cassini family.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub level: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

pub fn parse_seed(s: &str) -> Result<u64, String> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|e| format!("seed must be hexadecimal: {e}"))
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: lemlab_core::Error| e.to_string())
}

fn parse_battery(s: &str) -> Result<Battery, String> {
    s.parse().map_err(|e: lemlab_core::Error| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use lemlab_core::suites::DEFAULT_SEED;

    #[test]
    fn seeds_parse_with_and_without_prefix() {
        assert_eq!(parse_seed("0x45485031"), Ok(DEFAULT_SEED));
        assert_eq!(parse_seed("45485031"), Ok(DEFAULT_SEED));
        assert!(parse_seed("0xzz").is_err());
    }

    #[test]
    fn grammar_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
