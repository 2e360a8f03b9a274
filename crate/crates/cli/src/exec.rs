//! Command execution.

use paradiff::atiyah::{
    at2_module, check_exact_sequence, check_tensor_compat, generate_closure, prolong_module,
    prolong_morphism, AtiyahError, DEFAULT_MAX_ENTRIES,
};
use paradiff::conn::{
    check_integrability, constants_check, dual, extend_scalars, hom, horizontal_space,
    morphism_check, tensor, ConnError, DiffModule, Integrability, MorphismCheck,
};
use paradiff::diffstruct::{check_morphism, DiffError, MorphismVerdict, OmegaElement, TwoForm};
use paradiff::field::FieldSpec;
use paradiff::jet::{Jet1, Jet2, JetRing};
use paradiff::matrix::Matrix;
use serde_json::{json, Value};

use crate::cert::{Certificate, Verdict, TOOL_VERSION};
use crate::error::CliError;
use crate::session::{module_def, parse_entry, prolonged_def, ModuleEntry, Session};

pub const DEFAULT_DEGREE_BOUND: u32 = 2;
pub const DEFAULT_DEPTH: usize = 1;
pub const DEFAULT_RANK_CAP: usize = 8;

/// Defaults for command arguments; a value in the command table wins.
#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub degree_bound: Option<u32>,
    pub depth: Option<usize>,
    pub rank_cap: Option<usize>,
}

struct Outcome {
    verdict: Verdict,
    witnesses: Value,
    artifacts: Value,
    summary: String,
}

impl Outcome {
    fn new(verdict: Verdict, summary: impl Into<String>) -> Self {
        Outcome {
            verdict,
            witnesses: json!({}),
            artifacts: json!({}),
            summary: summary.into(),
        }
    }

    fn witnesses(mut self, w: Value) -> Self {
        self.witnesses = w;
        self
    }

    fn artifacts(mut self, a: Value) -> Self {
        self.artifacts = a;
        self
    }
}

fn semantic(msg: impl Into<String>) -> CliError {
    CliError::Semantic(msg.into())
}

/// Typed access to a command table.
struct Args<'a> {
    op: &'a str,
    table: &'a toml::Table,
}

impl<'a> Args<'a> {
    fn allow(&self, keys: &[&str]) -> Result<(), CliError> {
        for k in self.table.keys() {
            if k != "run" && k != "as" && !keys.contains(&k.as_str()) {
                return Err(semantic(format!("{}: unknown argument `{k}`", self.op)));
            }
        }
        Ok(())
    }

    fn opt_str(&self, key: &str) -> Result<Option<&'a str>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(semantic(format!("{}: `{key}` must be a string", self.op))),
        }
    }

    fn str(&self, key: &str) -> Result<&'a str, CliError> {
        self.opt_str(key)?
            .ok_or_else(|| semantic(format!("{}: missing argument `{key}`", self.op)))
    }

    fn opt_uint(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(n)) if *n >= 0 => Ok(Some(*n as u64)),
            Some(_) => Err(semantic(format!(
                "{}: `{key}` must be a nonnegative integer",
                self.op
            ))),
        }
    }

    fn opt_str_list(&self, key: &str) -> Result<Option<Vec<&'a str>>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_str()
                        .ok_or_else(|| semantic(format!("{}: `{key}` must hold strings", self.op)))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Err(semantic(format!("{}: `{key}` must be a list", self.op))),
        }
    }
}

fn two_form(w: &TwoForm, field: &FieldSpec) -> Value {
    Value::Array(
        w.render(field)
            .into_iter()
            .map(|((i, j), c)| json!({ "pair": [i, j], "value": c }))
            .collect(),
    )
}

fn jet1(x: &Jet1, field: &FieldSpec) -> Value {
    let (a, w) = x.render(field);
    json!({ "a": a, "w": w })
}

fn jet2(x: &Jet2, field: &FieldSpec) -> Value {
    let (a, w, eta) = x.render(field);
    json!({ "a": a, "w": w, "eta": eta })
}

fn curvature_witness(i: usize, j: usize, residual: &Matrix, field: &FieldSpec) -> Value {
    json!({ "pair": [i, j], "residual": residual.render_rows(field) })
}

fn refusal(op: &str, e: AtiyahError) -> Result<Outcome, CliError> {
    match e {
        AtiyahError::NotFlat { i, j } => Ok(Outcome::new(
            Verdict::Fail,
            format!("module is curved in directions ({i}, {j})"),
        )
        .witnesses(json!({ "reason": "not-flat", "pair": [i, j] }))),
        AtiyahError::Conn(ConnError::StructureMismatch)
        | AtiyahError::Conn(ConnError::Shape(_))
        | AtiyahError::ShapeMismatch(_) => Err(semantic(format!("{op}: {e}"))),
        other => Ok(Outcome::new(Verdict::Fail, other.to_string())
            .witnesses(json!({ "reason": "refused", "message": other.to_string() }))),
    }
}

fn conn_semantic(op: &str, e: ConnError) -> CliError {
    semantic(format!("{op}: {e}"))
}

impl Session {
    /// Registers a derived module under the command's `as` name, if any.
    fn bind(&mut self, args: &Args, entry: ModuleEntry) -> Result<(), CliError> {
        if let Some(name) = args.opt_str("as")? {
            self.claim(name)?;
            self.modules.insert(name.to_string(), entry);
        }
        Ok(())
    }

    /// Name used for a derived module in its artifact.
    fn result_name(args: &Args, index: usize) -> Result<String, CliError> {
        Ok(match args.opt_str("as")? {
            Some(n) => n.to_string(),
            None => format!("{}_{index}", args.op.replace('-', "_")),
        })
    }

    fn derived(
        &mut self,
        args: &Args,
        index: usize,
        structure: &str,
        module: DiffModule,
    ) -> Result<Outcome, CliError> {
        let name = Self::result_name(args, index)?;
        let def = module_def(&name, structure, &module);
        let summary = format!("rank {}", module.rank());
        self.bind(
            args,
            ModuleEntry {
                structure: structure.to_string(),
                module,
                prolonged: None,
            },
        )?;
        Ok(Outcome::new(Verdict::Info, summary).artifacts(json!({ "module": def })))
    }

    fn dispatch(&mut self, args: &Args, index: usize, opts: &Options) -> Result<Outcome, CliError> {
        match args.op {
            "check-structure" => {
                args.allow(&["structure"])?;
                self.check_structure(args.str("structure")?)
            }
            "check-morphism" => {
                args.allow(&["map", "morphism"])?;
                match (args.opt_str("map")?, args.opt_str("morphism")?) {
                    (Some(m), None) => self.check_map(m),
                    (None, Some(m)) => self.check_mod_morphism(m),
                    _ => Err(semantic(
                        "check-morphism: give exactly one of `map` or `morphism`",
                    )),
                }
            }
            "check-integrability" => {
                args.allow(&["module"])?;
                let m = &self.module(args.str("module")?)?.module;
                let field = m.ps().base();
                Ok(match check_integrability(m) {
                    Integrability::Flat => Outcome::new(Verdict::Ok, "flat"),
                    Integrability::Curved { i, j, residual } => Outcome::new(
                        Verdict::Fail,
                        format!("curved in directions ({i}, {j})"),
                    )
                    .witnesses(curvature_witness(i, j, &residual, field)),
                })
            }
            "tensor" | "hom" => {
                let (a, b) = if args.op == "tensor" {
                    args.allow(&["left", "right"])?;
                    (args.str("left")?, args.str("right")?)
                } else {
                    args.allow(&["src", "dst"])?;
                    (args.str("src")?, args.str("dst")?)
                };
                let (ea, eb) = (self.module(a)?, self.module(b)?);
                let structure = ea.structure.clone();
                let out = if args.op == "tensor" {
                    tensor(&ea.module, &eb.module)
                } else {
                    hom(&ea.module, &eb.module)
                }
                .map_err(|e| conn_semantic(args.op, e))?;
                self.derived(args, index, &structure, out)
            }
            "dual" => {
                args.allow(&["module"])?;
                let e = self.module(args.str("module")?)?;
                let (structure, out) = (e.structure.clone(), dual(&e.module));
                self.derived(args, index, &structure, out)
            }
            "extend-scalars" => {
                args.allow(&["map", "module"])?;
                let map = self.map(args.str("map")?)?;
                let target_name = map.target.clone();
                let target = self.structure(&target_name)?;
                let m = &self.module(args.str("module")?)?.module;
                match extend_scalars(&map.map, target, m) {
                    Ok(out) => {
                        let flat = check_integrability(&out).is_flat();
                        let mut o = self.derived(args, index, &target_name, out)?;
                        o.artifacts["flat"] = json!(flat);
                        Ok(o)
                    }
                    Err(e @ (ConnError::StructureMismatch | ConnError::Shape(_))) => {
                        Err(conn_semantic(args.op, e))
                    }
                    Err(e) => Ok(Outcome::new(Verdict::Fail, e.to_string())
                        .witnesses(json!({ "reason": "refused", "message": e.to_string() }))),
                }
            }
            "prolong" => {
                args.allow(&["module", "morphism"])?;
                match (args.opt_str("module")?, args.opt_str("morphism")?) {
                    (Some(m), None) => self.prolong(args, index, m),
                    (None, Some(t)) => {
                        if args.opt_str("as")?.is_some() {
                            return Err(semantic("prolong: `as` applies to modules only"));
                        }
                        let t = &self.morphism(t)?.morphism;
                        let field = t.src().ps().base().clone();
                        match prolong_morphism(t) {
                            Ok(p) => Ok(Outcome::new(
                                Verdict::Info,
                                format!("{}x{}", p.matrix().rows(), p.matrix().cols()),
                            )
                            .artifacts(json!({ "matrix": p.matrix().render_rows(&field) }))),
                            Err(e) => refusal(args.op, e),
                        }
                    }
                    _ => Err(semantic("prolong: give exactly one of `module` or `morphism`")),
                }
            }
            "at2" => {
                args.allow(&["module"])?;
                let e = self.module(args.str("module")?)?;
                let structure = e.structure.clone();
                match at2_module(&e.module) {
                    Ok(a) => {
                        let incl = a.incl.render_rows(a.core.ps().base());
                        let mut o = self.derived(args, index, &structure, a.core)?;
                        o.artifacts["incl"] = json!(incl);
                        Ok(o)
                    }
                    Err(e) => refusal(args.op, e),
                }
            }
            "baer-check" => {
                args.allow(&["left", "right"])?;
                let (m, n) = (
                    &self.module(args.str("left")?)?.module,
                    &self.module(args.str("right")?)?.module,
                );
                match check_tensor_compat(m, n) {
                    Ok(true) => Ok(Outcome::new(Verdict::Ok, "At1 of the tensor product is the Baer sum")),
                    Ok(false) => Ok(Outcome::new(
                        Verdict::Fail,
                        "At1 of the tensor product differs from the Baer sum",
                    )
                    .witnesses(json!({ "reason": "mismatch" }))),
                    Err(e) => refusal(args.op, e),
                }
            }
            "closure" => {
                args.allow(&["module", "depth", "rank_cap", "max_entries"])?;
                let m = &self.module(args.str("module")?)?.module;
                let depth = args
                    .opt_uint("depth")?
                    .map(|d| d as usize)
                    .or(opts.depth)
                    .unwrap_or(DEFAULT_DEPTH);
                let cap = args
                    .opt_uint("rank_cap")?
                    .map(|d| d as usize)
                    .or(opts.rank_cap)
                    .unwrap_or(DEFAULT_RANK_CAP);
                let max = args
                    .opt_uint("max_entries")?
                    .map_or(DEFAULT_MAX_ENTRIES, |d| d as usize);
                match generate_closure(m, depth, cap, max) {
                    Ok(c) => {
                        let entries: Vec<Value> = c
                            .entries
                            .iter()
                            .map(|e| {
                                json!({ "label": e.label, "rank": e.module.rank(), "depth": e.depth })
                            })
                            .collect();
                        Ok(Outcome::new(
                            Verdict::Info,
                            format!("{} entries{}", entries.len(), if c.truncated { ", truncated" } else { "" }),
                        )
                        .artifacts(json!({
                            "depth": depth,
                            "rank_cap": cap,
                            "entries": entries,
                            "truncated": c.truncated,
                        })))
                    }
                    Err(e) => refusal(args.op, e),
                }
            }
            "horizontal" => {
                args.allow(&["module", "degree_bound"])?;
                let m = &self.module(args.str("module")?)?.module;
                let bound = match args.opt_uint("degree_bound")? {
                    Some(b) => u32::try_from(b)
                        .map_err(|_| semantic("horizontal: `degree_bound` is too large"))?,
                    None => opts.degree_bound.unwrap_or(DEFAULT_DEGREE_BOUND),
                };
                let field = m.ps().base();
                let vectors = horizontal_space(m, bound);
                let rendered: Vec<Vec<String>> = vectors
                    .iter()
                    .map(|v| v.iter().map(|c| field.render(c)).collect())
                    .collect();
                Ok(Outcome::new(
                    Verdict::Info,
                    format!("dimension {} at degree bound {bound}", vectors.len()),
                )
                .artifacts(json!({
                    "degree_bound": bound,
                    "dimension": vectors.len(),
                    "vectors": rendered,
                })))
            }
            "jet-eval" => {
                args.allow(&["structure", "value", "form"])?;
                let ps = self.structure(args.str("structure")?)?;
                let s = ps.full();
                let field = s.base();
                let a = parse_entry(field, args.str("value")?, "jet-eval value")?;
                let j = JetRing::new(s);
                let (l2, r2) = (j.l2(&a), j.r2(&a));
                let mut members = j.is_member(&l2) && j.is_member(&r2);
                let mut artifacts = json!({
                    "l1": jet1(&j.l1(&a), field),
                    "r1": jet1(&j.r1(&a), field),
                    "l2": jet2(&l2, field),
                    "r2": jet2(&r2, field),
                });
                if let Some(form) = args.opt_str_list("form")? {
                    if form.len() != s.dim() {
                        return Err(semantic(format!(
                            "jet-eval: form has {} coefficients, structure has dimension {}",
                            form.len(),
                            s.dim()
                        )));
                    }
                    let coeffs = form
                        .iter()
                        .enumerate()
                        .map(|(k, c)| parse_entry(field, c, &format!("jet-eval form[{k}]")))
                        .collect::<Result<Vec<_>, _>>()?;
                    let w = OmegaElement::new(coeffs);
                    let lift = j.bracket_lift(&w);
                    members &= j.is_member(&lift);
                    artifacts["bracket_lift"] = jet2(&lift, field);
                    artifacts["d_form"] = two_form(&s.d1(&w), field);
                }
                artifacts["d_value"] = json!(s.d0(&a).render(field));
                let verdict = if members { Verdict::Ok } else { Verdict::Fail };
                Ok(Outcome::new(verdict, format!("jets of {}", field.render(&a))).artifacts(artifacts))
            }
            "constants-check" => {
                args.allow(&["structure", "value"])?;
                let ps = self.structure(args.str("structure")?)?;
                let field = ps.base();
                let a = parse_entry(field, args.str("value")?, "constants-check value")?;
                if constants_check(&a, ps) {
                    return Ok(Outcome::new(Verdict::Ok, "constant"));
                }
                let i = (0..ps.principal_count())
                    .find(|&i| !ps.principal(i).apply(&a).is_zero())
                    .expect("a non-constant is moved by some principal derivation");
                Ok(Outcome::new(
                    Verdict::Fail,
                    format!("moved by principal derivation {i}"),
                )
                .witnesses(json!({
                    "derivation": i,
                    "value": field.render(&ps.principal(i).apply(&a)),
                })))
            }
            other => Err(semantic(format!("unknown command `{other}`"))),
        }
    }

    fn check_structure(&self, name: &str) -> Result<Outcome, CliError> {
        let entry = self
            .structures
            .get(name)
            .ok_or_else(|| semantic(format!("undefined structure `{name}`")))?;
        let field = &entry.field;
        Ok(match &entry.built {
            Ok(ps) => Outcome::new(
                Verdict::Ok,
                format!(
                    "{} principal, {} parameter",
                    ps.principal_count(),
                    ps.parameter_count()
                ),
            )
            .artifacts(json!({
                "principal": ps.principal_count(),
                "parameter": ps.parameter_count(),
                "constants": entry.def.constants,
            })),
            Err(DiffError::NotClosed { i, j, residual }) => Outcome::new(
                Verdict::Fail,
                format!("bracket of basis elements {i} and {j} leaves the span"),
            )
            .witnesses(json!({
                "reason": "not-closed",
                "pair": [i, j],
                "bracket": residual.render(field),
            })),
            Err(e) => {
                let reason = match e {
                    DiffError::NotCommuting { .. } => "not-commuting",
                    DiffError::NotIndependent => "not-independent",
                    DiffError::EmptyBasis => "empty-basis",
                    DiffError::PrincipalMovesConstants { .. } => "principal-moves-constants",
                    DiffError::DegenerateParameters => "degenerate-parameters",
                    _ => "invalid",
                };
                Outcome::new(Verdict::Fail, e.to_string())
                    .witnesses(json!({ "reason": reason, "message": e.to_string() }))
            }
        })
    }

    fn check_map(&self, name: &str) -> Result<Outcome, CliError> {
        let map = &self.map(name)?.map;
        let (src, dst) = (map.source().base(), map.target().base());
        Ok(match check_morphism(map) {
            Ok(MorphismVerdict::Ok) => Outcome::new(Verdict::Ok, "morphism of differential fields"),
            Ok(MorphismVerdict::DCompatFail { variable, residual }) => Outcome::new(
                Verdict::Fail,
                format!("not compatible with d on `{}`", src.variables()[variable]),
            )
            .witnesses(json!({
                "reason": "d-compatibility",
                "variable": src.variables()[variable],
                "residual": residual.render(dst),
            })),
            Ok(MorphismVerdict::IntegrabilityFail { form, witness }) => Outcome::new(
                Verdict::Fail,
                format!("integrability fails on source form {form}"),
            )
            .witnesses(json!({
                "reason": "integrability",
                "form": form,
                "witness": two_form(&witness, dst),
            })),
            Err(e) => Outcome::new(Verdict::Fail, e.to_string())
                .witnesses(json!({ "reason": "field", "message": e.to_string() })),
        })
    }

    fn check_mod_morphism(&self, name: &str) -> Result<Outcome, CliError> {
        let t = &self.morphism(name)?.morphism;
        let field = t.src().ps().base();
        match morphism_check(t.matrix(), t.src(), t.dst()) {
            Ok(MorphismCheck::Ok) => Ok(Outcome::new(Verdict::Ok, "horizontal")),
            Ok(MorphismCheck::Fail { i, residual }) => Ok(Outcome::new(
                Verdict::Fail,
                format!("fails along principal derivation {i}"),
            )
            .witnesses(json!({
                "derivation": i,
                "residual": residual.render_rows(field),
            }))),
            Err(e) => Err(conn_semantic("check-morphism", e)),
        }
    }

    fn prolong(&mut self, args: &Args, index: usize, name: &str) -> Result<Outcome, CliError> {
        let e = self.module(name)?;
        let structure = e.structure.clone();
        let parent = e.module.clone();
        let pm = match prolong_module(&parent) {
            Ok(pm) => pm,
            Err(e) => return refusal(args.op, e),
        };
        let exact = check_exact_sequence(&pm, &parent).map_err(|e| semantic(e.to_string()))?;
        let result = Self::result_name(args, index)?;
        let def = prolonged_def(&result, &structure, &pm);
        let verdict = if exact { Verdict::Ok } else { Verdict::Fail };
        let summary = format!("rank {}", pm.core.rank());
        self.bind(
            args,
            ModuleEntry {
                structure,
                module: pm.core.clone(),
                prolonged: Some(pm),
            },
        )?;
        Ok(Outcome::new(verdict, summary)
            .artifacts(json!({ "module": def, "exact_sequence": exact })))
    }
}

/// Result of running a session.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub certificates: Vec<Certificate>,
    /// One human-readable line per executed command.
    pub report: Vec<String>,
    /// The error that stopped the run, if any.
    pub error: Option<CliError>,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        if let Some(e) = &self.error {
            return e.exit_code();
        }
        if self.certificates.iter().any(|c| c.verdict == Verdict::Fail) {
            crate::error::EXIT_VERDICT
        } else {
            crate::error::EXIT_OK
        }
    }
}

/// Executes the commands of a loaded session in order, stopping at the first
/// semantic error.
pub fn execute(session: &mut Session, opts: &Options) -> RunOutput {
    let mut out = RunOutput {
        certificates: Vec::new(),
        report: Vec::new(),
        error: None,
    };
    let commands = session.commands.clone();
    for (index, table) in commands.iter().enumerate() {
        let op = match table.get("run") {
            Some(toml::Value::String(s)) => s.as_str(),
            _ => {
                out.error = Some(semantic(format!(
                    "command #{index}: missing string field `run`"
                )));
                break;
            }
        };
        let args = Args { op, table };
        match session.dispatch(&args, index, opts) {
            Ok(o) => {
                out.report.push(format!(
                    "[{index}] {op}: {} ({})",
                    serde_json::to_value(o.verdict).expect("verdict serializes").as_str().unwrap_or(""),
                    o.summary
                ));
                out.certificates.push(Certificate {
                    command: serde_json::to_value(table).expect("TOML values map to JSON"),
                    verdict: o.verdict,
                    witnesses: o.witnesses,
                    artifacts: o.artifacts,
                    tool_version: TOOL_VERSION.to_string(),
                    input_digest: session.digest.clone(),
                });
            }
            Err(e) => {
                out.report.push(format!("[{index}] {op}: error: {e}"));
                out.error = Some(e);
                break;
            }
        }
    }
    out
}

/// Loads and runs session text.
pub fn run_text(text: &str, opts: &Options) -> RunOutput {
    match Session::load(text) {
        Ok(mut s) => execute(&mut s, opts),
        Err(e) => RunOutput {
            certificates: Vec::new(),
            report: vec![format!("error: {e}")],
            error: Some(e),
        },
    }
}

pub fn run_file(path: &std::path::Path, opts: &Options) -> RunOutput {
    match std::fs::read_to_string(path) {
        Ok(text) => run_text(&text, opts),
        Err(e) => {
            let e = CliError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            };
            RunOutput {
                certificates: Vec::new(),
                report: vec![format!("error: {e}")],
                error: Some(e),
            }
        }
    }
}
