use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, ValueEnum};
use katetov::classes::DEFAULT_ELEMENT_BUDGET;
use katetov::structures::{ClassTag, FiniteStructure};
use katetov::tower::TowerHandle;
use katetov::{Error, Execution, Result};
use serde_json::Value;

pub const BUDGET_VAR: &str = "KATETOV_BUDGET";

#[derive(Args, Clone, Debug)]
pub struct ClassArgs {
    /// Class name: graph, kn-free (or k3-free, k4-free, ...), digraph, linear-order, poset,
    /// tournament, boolean, metric (or metric-q3, ...). Defaults to the seed's class, or graph.
    #[arg(long)]
    pub class: Option<String>,
    /// Forbidden clique size for kn-free graphs.
    #[arg(long)]
    pub clique: Option<u32>,
    /// Grid denominator for metric spaces.
    #[arg(long)]
    pub q: Option<u32>,
    /// Seed structure: a preset (empty, k1, edge), a JSON file, or inline JSON.
    #[arg(long, default_value = "empty")]
    pub seed: String,
    /// Element budget per tower level. Overrides $KATETOV_BUDGET; defaults to 50000.
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Args, Clone, Debug)]
pub struct OutArgs {
    /// Where to write the command's artifact.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Artifact format.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Where to write the JSON sidecar of the report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    ReportText,
}

impl ClassArgs {
    pub fn class(&self) -> Result<ClassTag> {
        let tag: ClassTag = self.class.as_deref().unwrap_or("graph").parse()?;
        Ok(match tag {
            ClassTag::KnFreeGraph(k) => {
                let n = self.clique.unwrap_or(k);
                if n < 3 {
                    return Err(Error::Contract(format!("--clique {n}: Kn-free graphs need n >= 3")));
                }
                ClassTag::KnFreeGraph(n)
            }
            ClassTag::RationalMetric(q) => {
                let q = self.q.unwrap_or(q);
                if q == 0 {
                    return Err(Error::Contract("--q 0: the metric grid needs q >= 1".into()));
                }
                ClassTag::RationalMetric(q)
            }
            other => other,
        })
    }

    /// `--budget`, else `$KATETOV_BUDGET`, else the library default.
    pub fn budget(&self) -> Result<usize> {
        let b = match self.budget {
            Some(b) => b,
            None => match std::env::var(BUDGET_VAR) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Contract(format!("${BUDGET_VAR}={v:?} is not a positive integer")))?,
                Err(_) => DEFAULT_ELEMENT_BUDGET,
            },
        };
        if b == 0 {
            return Err(Error::Contract("the element budget must be positive".into()));
        }
        Ok(b)
    }

    pub fn seed(&self) -> Result<Arc<FiniteStructure>> {
        let class = self.class()?;
        // a structure seed carries its own class
        let s = match self.seed.as_str() {
            "empty" => FiniteStructure::empty(class),
            "k1" => preset_point(class)?,
            "edge" => preset_edge(class)?,
            other => {
                let s = load_structure(other)?;
                if self.class.is_some() && s.class() != class {
                    return Err(Error::Contract(format!(
                        "seed is a {} but --class is {}",
                        s.class(),
                        class
                    )));
                }
                s
            }
        };
        Ok(Arc::new(s))
    }

    pub fn tower(&self) -> Result<TowerHandle> {
        TowerHandle::with_budget(self.seed()?, self.budget()?)
    }
}

fn preset_point(class: ClassTag) -> Result<FiniteStructure> {
    Ok(match class {
        ClassTag::BooleanAlgebra => FiniteStructure::boolean_algebra(1),
        ClassTag::LinearOrder => FiniteStructure::chain(1),
        ClassTag::RationalMetric(q) => FiniteStructure::discrete_metric(q, 1),
        _ => FiniteStructure::from_pairs(class, 1, &[])?,
    })
}

fn preset_edge(class: ClassTag) -> Result<FiniteStructure> {
    Ok(match class {
        ClassTag::BooleanAlgebra => FiniteStructure::boolean_algebra(2),
        ClassTag::LinearOrder => FiniteStructure::chain(2),
        ClassTag::RationalMetric(q) => FiniteStructure::discrete_metric(q, 2),
        _ => FiniteStructure::from_pairs(class, 2, &[(0, 1)])?,
    })
}

/// Inline JSON if the text starts like JSON, otherwise a file path.
pub fn load_json(src: &str) -> Result<Value> {
    let trimmed = src.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        src.to_string()
    } else {
        std::fs::read_to_string(Path::new(src)).map_err(|e| Error::Format(format!("cannot read {src}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{src}: {e}")))
}

pub fn load_structure(src: &str) -> Result<FiniteStructure> {
    FiniteStructure::from_json(&load_json(src)?)
}

pub fn execution(jobs: Option<usize>) -> Execution {
    match jobs {
        Some(1) => Execution::Sequential,
        Some(n) => {
            katetov::par::set_jobs(n);
            Execution::Parallel
        }
        None => Execution::Parallel,
    }
}
