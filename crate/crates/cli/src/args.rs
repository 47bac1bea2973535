//! Argument syntax shared by the subcommands.

use std::path::{Path, PathBuf};

use clap::Args;
use heatgraph::graph::{GraphSpec, LazyGraph, VertexId};

use crate::CliError;

/// Where the graph comes from. Exactly one source is required.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct GraphSource {
    /// Graph-spec JSON file.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Built-in graph: ray, line, binary, ternary, grafted, increasing, p3, p5, star.
    #[arg(long, value_name = "NAME")]
    pub base: Option<String>,
    /// Inline graph-spec JSON.
    #[arg(long, value_name = "JSON")]
    pub spec: Option<String>,
}

impl GraphSource {
    pub fn load(&self) -> Result<(GraphSpec, LazyGraph), CliError> {
        let spec = if let Some(path) = &self.graph {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
                path: path.clone(),
                source,
            })?;
            GraphSpec::from_json(&text).map_err(|e| CliError::Spec {
                origin: path.display().to_string(),
                source: e,
            })?
        } else if let Some(name) = &self.base {
            GraphSpec::preset(name)?
        } else if let Some(text) = &self.spec {
            GraphSpec::from_json(text).map_err(|e| CliError::Spec {
                origin: "--spec".into(),
                source: e,
            })?
        } else {
            return Err(CliError::Usage("one of --graph, --base or --spec is required".into()));
        };
        let graph = spec.build()?;
        Ok((spec, graph))
    }
}

/// `a:b[:step]` (inclusive) or a single radius; strictly increasing.
pub fn parse_radii(s: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<usize>().map_err(|_| format!("invalid radius {p:?} in {s:?}"));
    let radii = match parts.as_slice() {
        [one] => vec![num(one)?],
        [a, b] | [a, b, _] => {
            let step = if parts.len() == 3 { num(parts[2])? } else { 1 };
            let (a, b) = (num(a)?, num(b)?);
            if step == 0 || a > b {
                return Err(format!("empty or ill-formed radius range {s:?}"));
            }
            (a..=b).step_by(step).collect()
        }
        _ => return Err(format!("radii must look like a:b or a:b:step, got {s:?}")),
    };
    Ok(radii)
}

/// Comma-separated non-negative times.
pub fn parse_times(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| {
            let t: f64 = p.trim().parse().map_err(|_| format!("invalid time {p:?}"))?;
            if t.is_finite() && t >= 0.0 {
                Ok(t)
            } else {
                Err(format!("times must be finite and non-negative, got {t}"))
            }
        })
        .collect()
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

/// `root` or a vertex id such as `/0/1`, `ray1:4` or `7`.
pub fn resolve_vertex(g: &LazyGraph, s: &str) -> Result<VertexId, CliError> {
    if s == "root" {
        return Ok(g.root());
    }
    Ok(s.parse::<VertexId>()?)
}

pub fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| CliError::Write {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// gnuplot data: one block per series, separated by two blank lines so that
/// `index k` selects series `k`.
pub fn gnuplot_blocks(blocks: &[(String, Vec<(f64, f64)>)]) -> String {
    blocks
        .iter()
        .map(|(title, points)| format!("# {title}\n{}", heatgraph::output::two_column(points.iter().copied())))
        .collect::<Vec<_>>()
        .join("\n\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_syntax() {
        assert_eq!(parse_radii("2:5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_radii("1:10:3").unwrap(), vec![1, 4, 7, 10]);
        assert_eq!(parse_radii("7").unwrap(), vec![7]);
        assert!(parse_radii("5:2").is_err());
        assert!(parse_radii("1:4:0").is_err());
        assert!(parse_radii("a:b").is_err());
    }

    #[test]
    fn time_syntax() {
        assert_eq!(parse_times("0, 0.5,2").unwrap(), vec![0.0, 0.5, 2.0]);
        assert!(parse_times("-1").is_err());
        assert!(parse_times("1,,2").is_err());
    }
}
