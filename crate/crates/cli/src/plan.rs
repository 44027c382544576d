use anyhow::{bail, ensure, Context, Result};
use hdgnet::network::{fixtures, load_problem, NetworkProblem};
use hdgnet::scheme::{MeshStrategy, SolveConfig};
use std::path::{Path, PathBuf};

/// Where the network comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Fixture(String),
    File(PathBuf),
}

impl Source {
    pub fn from_flags(fixture: Option<String>, network: Option<PathBuf>) -> Result<Self> {
        match (fixture, network) {
            (Some(f), None) => Ok(Source::Fixture(f)),
            (None, Some(p)) => Ok(Source::File(p)),
            (None, None) => bail!("one of --fixture or --network is required"),
            (Some(_), Some(_)) => bail!("--fixture and --network are mutually exclusive"),
        }
    }

    /// Document text of the network.
    pub fn text(&self) -> Result<String> {
        match self {
            Source::Fixture(name) => fixtures::text(name)
                .map(str::to_owned)
                .with_context(|| format!("unknown fixture `{name}` (known: {})", fixtures::NAMES.join(", "))),
            Source::File(path) => {
                std::fs::read_to_string(path).with_context(|| format!("cannot read network file {}", path.display()))
            }
        }
    }

    pub fn load(&self) -> Result<NetworkProblem> {
        load_problem(&self.text()?).with_context(|| format!("invalid network {}", self.describe()))
    }

    pub fn describe(&self) -> String {
        match self {
            Source::Fixture(name) => format!("fixture:{name}"),
            Source::File(path) => path.display().to_string(),
        }
    }
}

/// Everything a sweep needs, resolved and validated.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub source: Source,
    pub problem: NetworkProblem,
    pub base: SolveConfig,
    pub ks: Vec<usize>,
    pub eps: Vec<f64>,
    pub hs: Vec<f64>,
    pub snapshots: Vec<f64>,
    pub samples: usize,
    pub out: PathBuf,
    pub jobs: Option<usize>,
}

impl ExperimentPlan {
    /// Sweep configurations in output order: k, then eps, then h.
    pub fn configs(&self) -> Vec<SolveConfig> {
        self.ks
            .iter()
            .flat_map(|&k| {
                let base = SolveConfig { k, ..self.base.clone() };
                hdgnet::analysis::sweep_configs(&base, &self.eps, &self.hs)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.ks.is_empty(), "empty k list");
        ensure!(!self.eps.is_empty(), "empty eps list");
        ensure!(!self.hs.is_empty(), "empty h list");
        ensure!(self.samples >= 1, "samples per element must be at least 1");
        ensure!(self.jobs != Some(0), "--jobs must be at least 1");
        for c in self.configs() {
            c.validate()
                .with_context(|| format!("configuration k = {}, eps = {}, h = {}", c.k, c.eps, c.h))?;
        }
        for &t in &self.snapshots {
            ensure!(
                (0.0..=self.base.t_max).contains(&t),
                "snapshot time {t} outside [0, {}]",
                self.base.t_max
            );
        }
        Ok(())
    }
}

/// Parses a number or a fraction such as `1/16`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.trim().parse()?, b.trim().parse()?);
            ensure!(b != 0.0, "zero denominator in `{s}`");
            a / b
        }
        None => s.parse().with_context(|| format!("not a number: `{s}`"))?,
    };
    ensure!(value.is_finite(), "not a finite number: `{s}`");
    Ok(value)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_number).collect()
}

/// Comma-separated values, or `start:end` halving from `start` down to `end`.
pub fn parse_h(s: &str) -> Result<Vec<f64>> {
    let Some((start, end)) = s.split_once(':') else {
        return parse_list(s);
    };
    let (start, end) = (parse_number(start)?, parse_number(end)?);
    ensure!(start > 0.0 && end > 0.0, "h range bounds must be positive");
    ensure!(end <= start, "h range must go from coarse to fine, got {start}:{end}");
    let steps = (start / end).log2();
    ensure!(
        (steps - steps.round()).abs() < 1e-9,
        "h range {start}:{end} is not a sequence of halvings"
    );
    Ok((0..=steps.round() as i32).map(|i| start * 0.5f64.powi(i)).collect())
}

pub fn parse_ks(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|v| v.trim().parse::<usize>().with_context(|| format!("invalid order `{v}`")))
        .collect()
}

/// `t=1,2.5` or bare `1,2.5`.
pub fn parse_snapshot(s: &str) -> Result<Vec<f64>> {
    parse_list(s.strip_prefix("t=").unwrap_or(s))
}

pub fn parse_mesh(s: &str) -> Result<MeshStrategy> {
    s.parse().map_err(|e: hdgnet::Error| anyhow::anyhow!(e))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("cannot create output directory {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_fractions() {
        assert_eq!(parse_number("1/8").unwrap(), 0.125);
        assert_eq!(parse_number(" 1e-3 ").unwrap(), 1e-3);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("abc").is_err());
        assert_eq!(parse_list("1e-2,1e-3").unwrap(), vec![1e-2, 1e-3]);
    }

    #[test]
    fn h_ranges_halve() {
        assert_eq!(parse_h("1/8:1/64").unwrap(), vec![0.125, 0.0625, 0.03125, 0.015625]);
        assert_eq!(parse_h("0.5:0.5").unwrap(), vec![0.5]);
        assert_eq!(parse_h("1/4,1/8").unwrap(), vec![0.25, 0.125]);
        assert!(parse_h("1/8:1/48").is_err());
        assert!(parse_h("1/64:1/8").is_err());
    }

    #[test]
    fn snapshots_accept_prefix() {
        assert_eq!(parse_snapshot("t=6").unwrap(), vec![6.0]);
        assert_eq!(parse_snapshot("1,2").unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn source_requires_exactly_one_flag() {
        assert!(Source::from_flags(None, None).is_err());
        assert!(Source::from_flags(Some("a".into()), Some("b".into())).is_err());
        assert!(Source::Fixture("nope".into()).load().is_err());
        assert!(Source::Fixture("gaslib11".into()).load().is_ok());
    }
}
