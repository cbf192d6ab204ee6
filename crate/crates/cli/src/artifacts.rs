//! Files written by `notify` and `demo`.

use std::path::Path;

use anyhow::{Context, Result};

use expreuse::backends::SimTable;
use expreuse::canonical_exp::{from_value, serialize_canonical};
use expreuse::prov_graph::{attr, export_dot, save_graph, EntityKind, ProvenanceGraph};
use expreuse::rules::RunReport;

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Tables too large to inline, written under their `dataRef` path.
pub fn write_tables(dir: &Path, report: &RunReport) -> Result<()> {
    for (key, table) in &report.external_tables {
        write_file(&dir.join(key), &table.to_csv())?;
    }
    Ok(())
}

/// Graph, DOT view, report, and the canonical specs and result tables of
/// every generated experiment.
pub fn write_demo(dir: &Path, graph: &ProvenanceGraph, report: &RunReport) -> Result<()> {
    write_file(&dir.join("graph.json"), &save_graph(graph))?;
    write_file(&dir.join("graph.dot"), &export_dot(graph))?;
    write_file(&dir.join("report.json"), &serde_json::to_string_pretty(report)?)?;
    write_tables(dir, report)?;
    let generated = graph.entities().iter().filter(|e| e.attrs.contains_key(attr::GENERATED_BY_RULE));
    for e in generated {
        match e.kind {
            EntityKind::SimulationExperiment => {
                let Some(spec) = e.attrs.get(attr::SPECIFICATION) else { continue };
                let spec = from_value(spec).with_context(|| format!("specification of {}", e.id))?;
                write_file(&dir.join("specs").join(format!("{}.json", e.id)), &serialize_canonical(&spec))?;
            }
            EntityKind::SimulationData => {
                if let Some(t) = e.attrs.get(attr::DATA).and_then(SimTable::from_value) {
                    write_file(&dir.join("data").join(format!("{}.csv", e.id)), &t.to_csv())?;
                }
            }
            _ => {}
        }
    }
    Ok(())
}
