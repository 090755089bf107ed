use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use crate::args::{Command, ReportArgs};
use crate::error::{CliError, Result};
use crate::io::read_json;

const OP: &str = "report";

/// Table file of each run kind, in order of preference.
const TABLES: [&str; 7] =
    ["report.csv", "curve.csv", "scalar.csv", "attribution.csv", "point.csv", "metrics.csv", "summary.csv"];

struct RunSummary {
    dir: PathBuf,
    version: String,
    seeds: String,
    figure: Option<PathBuf>,
    table: Option<String>,
    sparsity: Vec<String>,
    assumptions: Vec<String>,
}

fn section_of(manifest: &serde_json::Value) -> String {
    let config = &manifest["config"];
    let command = config["command"].as_str().unwrap_or("unknown");
    match (command, config["question"].as_str()) {
        ("describe", Some(q)) => q.to_string(),
        ("uncertainty", Some(q)) => format!("{q} confidence intervals"),
        (c, _) => c.to_string(),
    }
}

fn csv_to_markdown(text: &str) -> String {
    let mut out = String::new();
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
    let Some(header) = lines.next() else { return out };
    let cols: Vec<&str> = header.split(',').collect();
    writeln!(out, "| {} |", cols.join(" | ")).unwrap();
    writeln!(out, "|{}", " --- |".repeat(cols.len())).unwrap();
    for line in lines {
        writeln!(out, "| {} |", line.split(',').collect::<Vec<_>>().join(" | ")).unwrap();
    }
    out
}

fn relative_to(path: &Path, base: Option<&Path>) -> PathBuf {
    let (Some(base), Ok(path_abs)) = (base, std::path::absolute(path)) else { return path.to_path_buf() };
    let Ok(base_abs) = std::path::absolute(base) else { return path.to_path_buf() };
    let (p, b): (Vec<_>, Vec<_>) = (path_abs.components().collect(), base_abs.components().collect());
    let common = p.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let mut rel: PathBuf = b[common..].iter().map(|_| "..").collect();
    rel.extend(&p[common..]);
    rel
}

fn summarise(dir: &Path, base: Option<&Path>) -> Result<(String, RunSummary)> {
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.is_file() {
        return Err(CliError::runtime(OP, "MissingManifest", format!("{} has no manifest.json", dir.display())));
    }
    let manifest = read_json(OP, &manifest_path)?;
    let seeds = manifest["seeds"]
        .as_object()
        .map(|m| m.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", "))
        .unwrap_or_default();
    let figure = dir.join("plot.svg");
    let table = TABLES.iter().map(|t| dir.join(t)).find(|p| p.is_file());
    let table = table.map(|p| std::fs::read_to_string(&p).map_err(|e| CliError::io(OP, &p, e))).transpose()?;

    let mut sparsity = Vec::new();
    let result = dir.join("result.json");
    if result.is_file() {
        let r = read_json(OP, &result)?;
        let sparse = &r["diagnostics"]["sparse_region"];
        for p in sparse["dropped"].as_array().into_iter().flatten() {
            sparsity.push(format!(
                "grid point {} dropped: {} evaluation rows within band {} (minimum {})",
                p["grid_point"], p["members"], sparse["band"], sparse["min_group_size"]
            ));
        }
        for v in r["diagnostics"]["off_support"].as_array().into_iter().flatten() {
            sparsity.push(format!("grid point {v} skipped: spliced instance off the data support"));
        }
    }
    let mut assumptions = Vec::new();
    let report = dir.join("report.json");
    if report.is_file() {
        let r = read_json(OP, &report)?;
        for v in r["dropped_points"].as_array().into_iter().flatten() {
            sparsity.push(format!("grid point {v} dropped: too few evaluation rows in its band"));
        }
        for (k, v) in r["assumptions"].as_object().into_iter().flatten() {
            assumptions.push(format!("`{k}`: {v}"));
        }
    }
    Ok((section_of(&manifest), RunSummary {
        dir: dir.to_path_buf(),
        version: manifest["version"].as_str().unwrap_or("?").to_string(),
        seeds,
        figure: figure.is_file().then(|| relative_to(&figure, base)),
        table,
        sparsity,
        assumptions,
    }))
}

/// Markdown summary of the given run directories, grouped by question kind.
pub fn render(runs: &[PathBuf], base: Option<&Path>) -> Result<String> {
    let mut sections: BTreeMap<String, Vec<RunSummary>> = BTreeMap::new();
    for dir in runs {
        let (section, summary) = summarise(dir, base)?;
        sections.entry(section).or_default().push(summary);
    }
    let mut md = String::from("# descry run summary\n\n");
    for (name, items) in &sections {
        writeln!(md, "## {name}\n").unwrap();
        for run in items {
            writeln!(md, "### {}\n", run.dir.display()).unwrap();
            let seeds = if run.seeds.is_empty() { "none".to_string() } else { run.seeds.clone() };
            writeln!(md, "descry {}; seeds: {seeds}\n", run.version).unwrap();
            if let Some(fig) = &run.figure {
                writeln!(md, "![{name}]({})\n", fig.display()).unwrap();
            }
            if let Some(table) = &run.table {
                writeln!(md, "{}", csv_to_markdown(table)).unwrap();
            }
        }
    }
    let warned: Vec<&RunSummary> = sections.values().flatten().filter(|r| !r.sparsity.is_empty()).collect();
    if !warned.is_empty() {
        md.push_str("## Sparsity warnings\n\n");
        md.push_str("Estimates near these points rest on too little data and were not reported.\n\n");
        for run in warned {
            for w in &run.sparsity {
                writeln!(md, "- {}: {w}", run.dir.display()).unwrap();
            }
        }
        md.push('\n');
    }
    let flagged: Vec<&RunSummary> = sections.values().flatten().filter(|r| !r.assumptions.is_empty()).collect();
    if !flagged.is_empty() {
        md.push_str("## Assumption flags\n\n");
        for run in flagged {
            writeln!(md, "- {}: {}", run.dir.display(), run.assumptions.join(", ")).unwrap();
        }
        md.push('\n');
    }
    Ok(md)
}

pub fn report(a: &ReportArgs, _command: &Command) -> Result<()> {
    let base = a.out.parent().filter(|p| !p.as_os_str().is_empty());
    let md = render(&a.runs, Some(base.unwrap_or(Path::new("."))))?;
    if let Some(parent) = base {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(OP, parent, e))?;
    }
    std::fs::write(&a.out, md).map_err(|e| CliError::io(OP, &a.out, e))
}
