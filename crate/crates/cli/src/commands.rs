//! One function per subcommand. Each reads its input files, runs the
//! library, and assembles a [`Document`]; artifact emission (`--emit`)
//! happens here too, report rendering does not.

use std::fs;
use std::path::Path;
use std::rc::Rc;

use opstrict_core::error::Error;
use opstrict_core::format::{parse_functor, parse_weak, print_functor, print_weak};
use opstrict_core::operad::{parse_operad, validate_operad};
use opstrict_core::report::{CheckReport, Sweep};
use opstrict_core::strictify::{
    check_equivalence, check_strict, evaluation_map, factorize, strictify, unit_map,
};
use opstrict_core::theory::{check_strong_regularity, compile_operad, parse_presentation};
use opstrict_core::tree::{enumerate_trees, eval_tree, has_two_cell};
use opstrict_core::weak::{validate_weak_p_category, validate_weak_p_functor};

use crate::output::{Config, Document, TreeClass};

pub enum CmdError {
    Io(String),
    Core(Error),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Core(e)
    }
}

impl CmdError {
    pub fn message(&self) -> String {
        match self {
            CmdError::Io(m) => m.clone(),
            CmdError::Core(e) => e.to_string(),
        }
    }

    /// 1 validation failure, 2 unusable input, 3 cap exceeded.
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Io(_) => 2,
            CmdError::Core(e) => match e {
                Error::CapExceeded(_) | Error::SearchBoundExceeded(_) => 3,
                Error::NotStronglyRegular(_) => 1,
                _ => 2,
            },
        }
    }
}

type CmdResult = Result<Document, CmdError>;

fn read(path: &Path) -> Result<String, CmdError> {
    fs::read_to_string(path)
        .map_err(|e| CmdError::Io(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, content: &str) -> Result<(), CmdError> {
    fs::write(path, content)
        .map_err(|e| CmdError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn compile_theory(cfg: Config, theory: &Path, emit: Option<&Path>) -> CmdResult {
    let text = read(theory)?;
    let mut doc = Document::new("compile-theory", cfg);
    doc.input("theory", &text);
    let pres = parse_presentation(&text)?;

    let reg = check_strong_regularity(&pres);
    let mut report = CheckReport::new(format!("check_strong_regularity({})", pres.name));
    report.line("strong_regularity", pres.equations.len(), reg.violations.len());
    for v in &reg.violations {
        report.fail(
            "strong_regularity",
            format!("equation {}", v.equation + 1),
            "same variables in the same order on both sides, each once".into(),
            format!("{} ({})", v.reason, v.detail),
        );
    }
    doc.report(report);
    if !reg.regular {
        return Ok(doc);
    }

    let (operad, closure) = compile_operad(&pres, cfg.arity_cap, cfg.term_size_cap)?;
    doc.cap_limited |= closure.cap_limited;
    // A cap-limited table has known holes; operad laws are only checkable
    // when every cell inside the arity cap landed.
    let total = closure.missing_comp_entries == 0;
    doc.closure = Some(closure);
    if total {
        doc.report(validate_operad(&operad));
    }
    if let Some(path) = emit {
        write(path, &operad.to_string())?;
    }
    Ok(doc)
}

pub fn validate(cfg: Config, wpc: &Path) -> CmdResult {
    let text = read(wpc)?;
    let mut doc = Document::new("validate", cfg);
    doc.input("wpc", &text);
    let w = Rc::new(parse_weak(&text)?);
    doc.report(validate_weak_p_category(&w, cfg.tree_size_cap));
    Ok(doc)
}

pub fn strictify_cmd(cfg: Config, wpc: &Path, emit: Option<&Path>) -> CmdResult {
    let text = read(wpc)?;
    let mut doc = Document::new("strictify", cfg);
    doc.input("wpc", &text);
    let w = Rc::new(parse_weak(&text)?);

    let s = strictify(&w)?;
    doc.report(check_strict(&s));
    let f = Rc::new(evaluation_map(&s)?);
    let mut fr = validate_weak_p_functor(&f);
    fr.name = format!("validate_evaluation_map({})", f.source().cat().name());
    doc.report(fr);
    let (_eq, equivalence) = check_equivalence(&s, &f)?;
    doc.report(equivalence);

    if let Some(path) = emit {
        write(path, &print_weak(s.strict()))?;
    }
    Ok(doc)
}

pub fn factorize_cmd(
    cfg: Config,
    wpc: &Path,
    strict_wpc: &Path,
    fun: &Path,
    emit: Option<&Path>,
) -> CmdResult {
    let a_text = read(wpc)?;
    let b_text = read(strict_wpc)?;
    let g_text = read(fun)?;
    let mut doc = Document::new("factorize", cfg);
    doc.input("wpc", &a_text);
    doc.input("strict_wpc", &b_text);
    doc.input("fun", &g_text);

    let a = Rc::new(parse_weak(&a_text)?);
    let b = Rc::new(parse_weak(&b_text)?);
    let g = Rc::new(parse_functor(&g_text, &a, &b)?);
    let mut gr = validate_weak_p_functor(&g);
    gr.name = "validate_given_functor".into();
    doc.report(gr);

    let s = strictify(&a)?;
    let fp = unit_map(&s)?;
    let mut ur = validate_weak_p_functor(&fp);
    ur.name = format!("validate_unit_map({})", a.cat().name());
    doc.report(ur);
    let (h, factored) = factorize(&s, &g, cfg.uniqueness_bound)?;
    doc.report(factored);

    if let Some(path) = emit {
        write(path, &print_functor(&h))?;
    }
    Ok(doc)
}

pub fn enumerate(cfg: Config, operad_file: &Path, arity: usize) -> CmdResult {
    let text = read(operad_file)?;
    let mut doc = Document::new("enumerate", cfg);
    doc.input("operad", &text);
    let operad = parse_operad(&text)?;

    let trees = enumerate_trees(&operad, arity, cfg.tree_size_cap)?;
    let evals: Vec<Option<opstrict_core::operad::OpId>> =
        trees.iter().map(|t| eval_tree(&operad, t).ok()).collect();

    let mut report = CheckReport::new(format!("enumerate_trees({})", operad.name()));
    report.line("trees", trees.len(), 0);
    let mut skipped = false;
    {
        // the partition is exactly the two-cell relation: trees share a
        // class precisely when the connecting cell exists
        let mut cells = Sweep::new(&mut report, "two_cell_partition");
        for i in 0..trees.len() {
            for j in i + 1..trees.len() {
                let (Some(ei), Some(ej)) = (evals[i], evals[j]) else {
                    skipped = true;
                    continue;
                };
                let connected = has_two_cell(&operad, &trees[i], &trees[j])?;
                cells.instance(connected == (ei == ej), || {
                    (
                        format!("{} vs {}", trees[i].render(&operad), trees[j].render(&operad)),
                        format!("two-cell {}", ei == ej),
                        format!("two-cell {connected}"),
                    )
                });
            }
        }
        cells.finish();
    }
    if skipped {
        report.cap_limited = true;
    }
    doc.report(report);

    let mut classes: Vec<TreeClass> = Vec::new();
    for p in operad.elements() {
        let members: Vec<String> = trees
            .iter()
            .zip(&evals)
            .filter(|(_, e)| **e == Some(p))
            .map(|(t, _)| t.render(&operad))
            .collect();
        if !members.is_empty() {
            classes.push(TreeClass { value: operad.op_name(p).to_string(), trees: members });
        }
    }
    let blocked: Vec<String> = trees
        .iter()
        .zip(&evals)
        .filter(|(_, e)| e.is_none())
        .map(|(t, _)| t.render(&operad))
        .collect();
    if !blocked.is_empty() {
        doc.cap_limited = true;
        classes.push(TreeClass { value: "unevaluated".into(), trees: blocked });
    }
    doc.classes = Some(classes);
    Ok(doc)
}
