use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::verifier::{AttackVectorFinding, UNCLASSIFIED, VECTORS};

pub const REPORT_SCHEMA_ID: &str = "campaign-report/1";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorpusStats {
    pub valid: usize,
    pub messages: usize,
    pub scams: usize,
    pub interactions: usize,
    pub parents: usize,
    pub mutants: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProfileReport {
    pub name: String,
    pub expect_clean: bool,
    pub submissions: usize,
    pub crashes: Vec<String>,
    pub findings: Vec<AttackVectorFinding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatrixCell {
    pub vector: String,
    pub vulnerable: bool,
    pub findings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatrixRow {
    pub profile: String,
    pub cells: Vec<MatrixCell>,
}

impl MatrixRow {
    pub fn from_findings(profile: &str, findings: &[AttackVectorFinding]) -> Self {
        let cells = VECTORS
            .iter()
            .map(|v| {
                let n = findings.iter().filter(|f| f.vector == *v).count();
                MatrixCell { vector: v.to_string(), vulnerable: n > 0, findings: n }
            })
            .collect();
        MatrixRow { profile: profile.to_string(), cells }
    }

    pub fn vulnerable(&self) -> Vec<&str> {
        self.cells.iter().filter(|c| c.vulnerable).map(|c| c.vector.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VectorCount {
    pub vector: String,
    pub findings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Totals {
    pub findings: usize,
    pub unclassified: usize,
    pub vulnerable_cells: usize,
    pub submissions: usize,
    pub crashes: usize,
    pub by_vector: Vec<VectorCount>,
}

/// Machine-readable campaign result. Holds nothing that varies between
/// runs with the same seed; wall-clock figures live in [`Timing`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignReport {
    pub schema: String,
    pub rng_seed: u64,
    pub world: String,
    pub corpus: CorpusStats,
    pub profiles: Vec<ProfileReport>,
    pub matrix: Vec<MatrixRow>,
    pub totals: Totals,
}

impl CampaignReport {
    pub fn assemble(rng_seed: u64, world: String, corpus: CorpusStats, profiles: Vec<ProfileReport>) -> Self {
        let matrix: Vec<MatrixRow> = profiles.iter().map(|p| MatrixRow::from_findings(&p.name, &p.findings)).collect();
        let all = || profiles.iter().flat_map(|p| &p.findings);
        let totals = Totals {
            findings: all().count(),
            unclassified: all().filter(|f| f.vector == UNCLASSIFIED).count(),
            vulnerable_cells: matrix.iter().map(|r| r.vulnerable().len()).sum(),
            submissions: profiles.iter().map(|p| p.submissions).sum(),
            crashes: profiles.iter().map(|p| p.crashes.len()).sum(),
            by_vector: VECTORS
                .iter()
                .map(|v| VectorCount { vector: v.to_string(), findings: all().filter(|f| f.vector == *v).count() })
                .collect(),
        };
        CampaignReport { schema: REPORT_SCHEMA_ID.into(), rng_seed, world, corpus, profiles, matrix, totals }
    }

    /// Profiles expected to be clean that still produced findings.
    pub fn unexpected_findings(&self) -> Vec<&str> {
        self.profiles.iter().filter(|p| p.expect_clean && !p.findings.is_empty()).map(|p| p.name.as_str()).collect()
    }

    /// The matrix recomputed from the findings, for checking a report read
    /// back from disk.
    pub fn derived_matrix(&self) -> Vec<MatrixRow> {
        self.profiles.iter().map(|p| MatrixRow::from_findings(&p.name, &p.findings)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Timing {
    pub corpus_ms: u64,
    pub fuzz_ms: u64,
    pub total_ms: u64,
    pub submissions: usize,
    pub jobs: usize,
}

/// Vector-by-profile table, `X` for vulnerable cells.
pub fn render_markdown(report: &CampaignReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Campaign report (rng seed {})\n", report.rng_seed);
    let _ = writeln!(
        s,
        "Corpus: {} seeds ({} parents, {} mutants). Submissions: {}. Findings: {} ({} unclassified).\n",
        report.corpus.total,
        report.corpus.parents,
        report.corpus.mutants,
        report.totals.submissions,
        report.totals.findings,
        report.totals.unclassified
    );
    let _ = writeln!(s, "| Profile | {} | Findings |", VECTORS.join(" | "));
    let _ = writeln!(s, "|---|{}---|", "---|".repeat(VECTORS.len()));
    for (row, p) in report.matrix.iter().zip(&report.profiles) {
        let cells: Vec<&str> = row.cells.iter().map(|c| if c.vulnerable { "X" } else { "." }).collect();
        let _ = writeln!(s, "| {} | {} | {} |", row.profile, cells.join(" | "), p.findings.len());
    }
    s
}
