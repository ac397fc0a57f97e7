//! Report documents.
//!
//! Every command produces one document: the command name, a content hash
//! per input file, the configuration, the check reports, and a verdict.
//! Documents are byte-deterministic for fixed inputs and configuration,
//! in both renderings: file paths and timings never enter a document, and
//! every collection is emitted in a fixed order.

use serde::Serialize;
use sha2::{Digest, Sha256};

use opstrict_core::report::CheckReport;
use opstrict_core::theory::ClosureReport;

#[derive(Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Serialize)]
pub struct Config {
    pub arity_cap: usize,
    pub tree_size_cap: usize,
    pub term_size_cap: usize,
    pub uniqueness_bound: usize,
}

#[derive(Serialize)]
pub struct Input {
    pub role: &'static str,
    pub sha256: String,
}

/// One evaluation class of the tree listing.
#[derive(Serialize)]
pub struct TreeClass {
    pub value: String,
    pub trees: Vec<String>,
}

#[derive(Serialize)]
pub struct Document {
    pub command: &'static str,
    pub inputs: Vec<Input>,
    pub config: Config,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closure: Option<ClosureReport>,
    pub reports: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<TreeClass>>,
    pub passed: bool,
    pub cap_limited: bool,
}

impl Document {
    pub fn new(command: &'static str, config: Config) -> Self {
        Document {
            command,
            inputs: Vec::new(),
            config,
            closure: None,
            reports: Vec::new(),
            classes: None,
            passed: true,
            cap_limited: false,
        }
    }

    pub fn input(&mut self, role: &'static str, bytes: &str) {
        let mut h = Sha256::new();
        h.update(bytes.as_bytes());
        self.inputs.push(Input { role, sha256: format!("{:x}", h.finalize()) });
    }

    pub fn report(&mut self, r: CheckReport) {
        self.passed &= r.passed();
        self.cap_limited |= r.cap_limited;
        self.reports.push(r);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("document serializes");
                s.push('\n');
                s
            }
            Format::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = format!("opstrict {}\n", self.command);
        for i in &self.inputs {
            out.push_str(&format!("input {} sha256 {}\n", i.role, i.sha256));
        }
        let c = &self.config;
        out.push_str(&format!(
            "config arity_cap={} tree_size_cap={} term_size_cap={} uniqueness_bound={}\n",
            c.arity_cap, c.tree_size_cap, c.term_size_cap, c.uniqueness_bound
        ));
        if let Some(cl) = &self.closure {
            out.push_str(&format!("closure universe_terms {}\n", cl.universe_terms));
            let counts: Vec<String> =
                cl.classes_by_arity.iter().map(usize::to_string).collect();
            out.push_str(&format!("closure classes_by_arity {}\n", counts.join(" ")));
            out.push_str(&format!(
                "closure equation_instances {}\n",
                cl.equation_instances
            ));
            out.push_str(&format!("closure blocked_instances {}\n", cl.blocked_instances));
            out.push_str(&format!("closure congruence_rounds {}\n", cl.congruence_rounds));
            out.push_str(&format!(
                "closure missing_comp_entries {}\n",
                cl.missing_comp_entries
            ));
        }
        for r in &self.reports {
            out.push_str(&format!("report {}\n", r.name));
            for l in &r.lines {
                out.push_str(&format!(
                    "check {} instances {} failures {}\n",
                    l.check, l.instances, l.failures
                ));
            }
            for f in &r.failures {
                out.push_str(&format!(
                    "fail {} @ {} expected {} actual {}\n",
                    f.check, f.instance, f.expected, f.actual
                ));
            }
            out.push_str(&format!("cap_limited {}\n", r.cap_limited));
        }
        if let Some(classes) = &self.classes {
            for c in classes {
                out.push_str(&format!("class {} trees {}\n", c.value, c.trees.len()));
                for t in &c.trees {
                    out.push_str(&format!("tree {t}\n"));
                }
            }
        }
        out.push_str(&format!("cap_limited {}\n", self.cap_limited));
        out.push_str(if self.passed { "result PASS\n" } else { "result FAIL\n" });
        out
    }
}
