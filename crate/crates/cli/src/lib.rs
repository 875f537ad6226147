//! Library surface of the command-line front end: the claim ledger and
//! output formatting shared by the binary and the test suites.

pub mod claims;

use claims::{ClaimRecord, ClaimStatus};

/// Aligned text rendering of a ledger, one claim per line.
pub fn ledger_text(records: &[ClaimRecord]) -> String {
    let id_width = records.iter().map(|r| r.id.len()).max().unwrap_or(8).max(8);
    let loc_width = records
        .iter()
        .map(|r| r.paper_location.len())
        .max()
        .unwrap_or(8);
    let mut out = String::new();
    for r in records {
        let status = match r.status {
            ClaimStatus::Pass => "pass",
            ClaimStatus::Fail => "FAIL",
            ClaimStatus::Discrepancy => "DISCREPANCY",
        };
        out.push_str(&format!(
            "{:<id_width$}  {:<12} {:>7} ms  {:<loc_width$}\n",
            r.id, status, r.runtime_ms, r.paper_location,
        ));
        if r.status != ClaimStatus::Pass {
            out.push_str(&format!("    expected: {}\n", r.expected));
            out.push_str(&format!("    computed: {}\n", r.computed));
        }
    }
    out
}

/// CSV rendering of a ledger.
pub fn ledger_csv(records: &[ClaimRecord]) -> String {
    let mut out = String::from("id,status,runtime_ms,paper_location,expected,computed\n");
    for r in records {
        let status = match r.status {
            ClaimStatus::Pass => "pass",
            ClaimStatus::Fail => "fail",
            ClaimStatus::Discrepancy => "discrepancy",
        };
        let quote = |v: &str| format!("\"{}\"", v.replace('"', "\"\""));
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.id,
            status,
            r.runtime_ms,
            quote(&r.paper_location),
            quote(&r.expected.to_string()),
            quote(&r.computed.to_string()),
        ));
    }
    out
}
