//! Structured run reports and their serialization.
//!
//! JSON carries the full nested report losslessly; CSV flattens the verdicts
//! into one row per checked bound; SVG renders per-domain cross-sections of
//! the torsion function and verdict margin charts.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use torsionlab::bounds::BoundVerdict;

use crate::config::RunConfig;
use crate::svg;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LinearCase {
    pub b: f64,
    /// True for the extra small-b probe of the spectral limit.
    pub limit_probe: bool,
    pub lambda1: f64,
    pub sup_norm: f64,
    pub rigidity: f64,
    pub eigenvalues: Vec<f64>,
    pub verdicts: Vec<BoundVerdict>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DirichletCase {
    pub lambda1: f64,
    pub sup_norm: f64,
    pub rigidity: f64,
    pub verdicts: Vec<BoundVerdict>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DirichletPCase {
    pub p: f64,
    pub lambda_p: f64,
    pub sup_norm: f64,
    pub rigidity: f64,
    pub converged: bool,
    /// ‖w‖_∞ · λ_p^{1/(p−1)}.
    pub ratio: f64,
    pub verdicts: Vec<BoundVerdict>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RobinPCase {
    pub b: f64,
    pub p: f64,
    pub lambda_p: f64,
    pub sup_norm: f64,
    pub rigidity: f64,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub regularization: f64,
    pub verdicts: Vec<BoundVerdict>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WosComparison {
    pub point: [f64; 2],
    pub fem_value: f64,
    pub wos_mean: f64,
    pub wos_standard_error: f64,
    pub n_walks: usize,
    pub capped_walks: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DomainLevelRecord {
    pub domain: String,
    pub kind: String,
    pub level: usize,
    pub h_max: f64,
    pub n_nodes: usize,
    pub n_triangles: usize,
    pub area: f64,
    pub perimeter: f64,
    pub min_angle_degrees: f64,
    pub dirichlet: DirichletCase,
    pub linear: Vec<LinearCase>,
    pub dirichlet_p: Vec<DirichletPCase>,
    pub robin_p: Vec<RobinPCase>,
    pub wos: Vec<WosComparison>,
    /// Cross-section of the Dirichlet torsion function along a horizontal
    /// line through the domain interior (for plots and symmetry checks).
    pub cross_section: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h_max: f64,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConvergenceTable {
    pub domain: String,
    pub quantity: String,
    pub reference: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Mean of the per-refinement orders log2(e_k / e_{k+1}).
    pub estimated_order: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CrossLevelVerdict {
    pub domain: String,
    pub verdict: BoundVerdict,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub total: usize,
    pub satisfied: usize,
    pub violated: usize,
    /// Violations at each domain's finest level: these fail the suite.
    pub violated_at_finest: usize,
    pub by_anchor: BTreeMap<String, [usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub timestamp_unix_seconds: u64,
    pub config: RunConfig,
    pub cases: Vec<DomainLevelRecord>,
    pub convergence: Vec<ConvergenceTable>,
    pub cross_level: Vec<CrossLevelVerdict>,
    pub summary: Summary,
}

/// One flattened verdict row for the CSV table.
pub struct VerdictRow<'a> {
    pub verdict: &'a BoundVerdict,
    pub domain: &'a str,
    pub level: usize,
    pub b: Option<f64>,
    pub p: Option<f64>,
}

impl Report {
    /// All verdicts with their (domain, level, b, p) context, in report order.
    pub fn verdict_rows(&self) -> Vec<VerdictRow<'_>> {
        let mut rows = Vec::new();
        for case in &self.cases {
            for v in &case.dirichlet.verdicts {
                rows.push(VerdictRow {
                    verdict: v,
                    domain: &case.domain,
                    level: case.level,
                    b: None,
                    p: None,
                });
            }
            for lc in &case.linear {
                for v in &lc.verdicts {
                    rows.push(VerdictRow {
                        verdict: v,
                        domain: &case.domain,
                        level: case.level,
                        b: Some(lc.b),
                        p: None,
                    });
                }
            }
            for dp in &case.dirichlet_p {
                for v in &dp.verdicts {
                    rows.push(VerdictRow {
                        verdict: v,
                        domain: &case.domain,
                        level: case.level,
                        b: None,
                        p: Some(dp.p),
                    });
                }
            }
            for rp in &case.robin_p {
                for v in &rp.verdicts {
                    rows.push(VerdictRow {
                        verdict: v,
                        domain: &case.domain,
                        level: case.level,
                        b: Some(rp.b),
                        p: Some(rp.p),
                    });
                }
            }
        }
        for cl in &self.cross_level {
            let level = self
                .cases
                .iter()
                .filter(|c| c.domain == cl.domain)
                .map(|c| c.level)
                .max()
                .unwrap_or(0);
            rows.push(VerdictRow {
                verdict: &cl.verdict,
                domain: &cl.domain,
                level,
                b: None,
                p: None,
            });
        }
        rows
    }

    pub fn compute_summary(&mut self) {
        let mut summary = Summary::default();
        let finest: BTreeMap<String, usize> = self
            .cases
            .iter()
            .map(|c| (c.domain.clone(), 0usize))
            .collect();
        let mut finest = finest;
        for c in &self.cases {
            let e = finest.get_mut(&c.domain).unwrap();
            *e = (*e).max(c.level);
        }
        for row in self.verdict_rows() {
            summary.total += 1;
            let entry = summary
                .by_anchor
                .entry(row.verdict.anchor.clone())
                .or_insert([0, 0]);
            if row.verdict.satisfied {
                summary.satisfied += 1;
                entry[0] += 1;
            } else {
                summary.violated += 1;
                entry[1] += 1;
                if finest.get(row.domain).copied().unwrap_or(0) == row.level {
                    summary.violated_at_finest += 1;
                }
            }
        }
        self.summary = summary;
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,anchor,domain,b,p,level,lhs,rhs,margin,satisfied\n");
        for row in self.verdict_rows() {
            let b = row.b.map(|v| v.to_string()).unwrap_or_default();
            let p = row.p.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                row.verdict.name,
                row.verdict.anchor,
                row.domain,
                b,
                p,
                row.level,
                row.verdict.lhs,
                row.verdict.rhs,
                row.verdict.margin,
                row.verdict.satisfied
            ));
        }
        out
    }

    /// Write the requested formats into `dir`; returns the files written.
    pub fn emit(&self, dir: &Path, formats: &[String]) -> anyhow::Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)
            .map_err(|e| anyhow::anyhow!("cannot create output directory {}: {e}", dir.display()))?;
        let mut written = Vec::new();
        for format in formats {
            match format.as_str() {
                "json" => {
                    let path = dir.join("report.json");
                    std::fs::File::create(&path)?.write_all(self.to_json()?.as_bytes())?;
                    written.push(path);
                }
                "csv" => {
                    let path = dir.join("verdicts.csv");
                    std::fs::File::create(&path)?.write_all(self.to_csv().as_bytes())?;
                    written.push(path);
                }
                "svg" => {
                    for case in &self.cases {
                        let finest = self
                            .cases
                            .iter()
                            .filter(|c| c.domain == case.domain)
                            .map(|c| c.level)
                            .max()
                            .unwrap_or(0);
                        if case.level != finest {
                            continue;
                        }
                        if !case.cross_section.is_empty() {
                            let path =
                                dir.join(format!("cross_section_{}_L{}.svg", case.domain, case.level));
                            let svg = svg::cross_section_svg(
                                &format!("{} torsion cross-section (level {})", case.domain, case.level),
                                &case.cross_section,
                            );
                            std::fs::File::create(&path)?.write_all(svg.as_bytes())?;
                            written.push(path);
                        }
                        let rows: Vec<VerdictRow> = self
                            .verdict_rows()
                            .into_iter()
                            .filter(|r| r.domain == case.domain && r.level == case.level)
                            .collect();
                        if !rows.is_empty() {
                            let path = dir.join(format!("margins_{}_L{}.svg", case.domain, case.level));
                            let labels: Vec<String> = rows
                                .iter()
                                .map(|r| format!("{} {}", r.verdict.name, r.verdict.anchor))
                                .collect();
                            let margins: Vec<(f64, bool)> = rows
                                .iter()
                                .map(|r| (r.verdict.margin, r.verdict.satisfied))
                                .collect();
                            let svg = svg::margins_svg(
                                &format!("{} verdict margins (level {})", case.domain, case.level),
                                &labels,
                                &margins,
                            );
                            std::fs::File::create(&path)?.write_all(svg.as_bytes())?;
                            written.push(path);
                        }
                    }
                }
                other => anyhow::bail!("unknown output format '{other}'"),
            }
        }
        Ok(written)
    }
}
