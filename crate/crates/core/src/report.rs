//! Check reports.
//!
//! Every validator in this crate quantifies over a finite set of instances
//! and reports the outcome per named check: how many instances were swept
//! and a line for every failing one. Reports never sample; a passing report
//! means the whole in-cap domain was checked.

use serde::Serialize;

/// One failing instance of a named check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    /// Which check produced this, e.g. `"validate_operad.assoc"`.
    pub check: String,
    /// The instance that failed, rendered deterministically.
    pub instance: String,
    pub expected: String,
    pub actual: String,
}

/// Sweep summary for one named check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckLine {
    pub check: String,
    pub instances: usize,
    pub failures: usize,
}

/// Outcome of a validator: per-check sweep counts plus every failure found.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub lines: Vec<CheckLine>,
    pub failures: Vec<Failure>,
    /// Set when some closure or table step was skipped because a cap cut it
    /// off. A cap-limited pass is only evidence up to the caps used.
    pub cap_limited: bool,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport { name: name.into(), ..CheckReport::default() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Record a finished sweep for `check`.
    pub fn line(&mut self, check: &str, instances: usize, failures: usize) {
        self.lines.push(CheckLine { check: check.to_string(), instances, failures });
    }

    pub fn fail(&mut self, check: &str, instance: String, expected: String, actual: String) {
        self.failures.push(Failure { check: check.to_string(), instance, expected, actual });
    }

    /// Fold another report into this one, prefixing its check names.
    pub fn absorb(&mut self, prefix: &str, other: CheckReport) {
        for mut l in other.lines {
            l.check = format!("{prefix}.{}", l.check);
            self.lines.push(l);
        }
        for mut f in other.failures {
            f.check = format!("{prefix}.{}", f.check);
            self.failures.push(f);
        }
        self.cap_limited |= other.cap_limited;
    }
}

/// Helper that counts instances and failures for one check within a sweep.
pub struct Sweep<'r> {
    report: &'r mut CheckReport,
    check: &'static str,
    instances: usize,
    failures: usize,
}

impl<'r> Sweep<'r> {
    pub fn new(report: &'r mut CheckReport, check: &'static str) -> Self {
        Sweep { report, check, instances: 0, failures: 0 }
    }

    /// Record one instance; `ok == false` files a failure with the given rendering.
    pub fn instance(&mut self, ok: bool, detail: impl FnOnce() -> (String, String, String)) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
            let (instance, expected, actual) = detail();
            self.report.fail(self.check, instance, expected, actual);
        }
    }

    pub fn finish(self) {
        self.report.line(self.check, self.instances, self.failures);
    }
}
