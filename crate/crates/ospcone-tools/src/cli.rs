use std::io::Read;

use clap::{Parser, ValueEnum};
use ospcone_core::diagram::{validate, DEFAULT_SIZE_GUARD};
use ospcone_core::flags::{describe_steps, resolve_regular, Component, FlagCase, FlagKind};
use ospcone_core::osp::{is_nilpotent_odd, orbit_dimension};
use ospcone_core::section::{build_section, check_section, invariant_degrees};
use ospcone_core::weights::bound_report;
use ospcone_core::{classify, enumerate_diagrams, regular_type, representative, ABDiagram, Error, Mat};
use serde_json::{json, Value};

use crate::json;
use crate::suite::{self, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NOT_REGULAR: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

pub const SIZE_GUARD_VAR: &str = "OSPCONE_SIZE_GUARD";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Classify,
    Rep,
    Resolve,
    Orbits,
    Section,
    Bound,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ComponentArg {
    Plus,
    Minus,
    Auto,
}

/// Exact computations on the odd nilpotent cone of osp(m|2n).
#[derive(Debug, Parser)]
#[command(name = "ospcone", version)]
pub struct Invocation {
    pub command: Command,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    pub component: ComponentArg,
    /// Diagram such as `a2+4*a0` or `b1+b1`.
    #[arg(long)]
    pub diagram: Option<String>,
    /// Inline JSON, a path, or `-` for stdin.
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long, hide = true)]
    pub inject_bad_form: bool,
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn fail(code: i32, msg: impl Into<String>) -> Self {
        Outcome { code, stdout: String::new(), stderr: msg.into() + "\n" }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => EXIT_PARSE,
        Error::NotRegular(_) => EXIT_NOT_REGULAR,
        Error::PostconditionFailure(_) => EXIT_VERIFY,
        _ => EXIT_DOMAIN,
    }
}

fn size_guard(env: Option<String>) -> Result<usize, Error> {
    match env {
        None => Ok(DEFAULT_SIZE_GUARD),
        Some(s) => s.trim().parse().map_err(|_| Error::Parse(format!("{SIZE_GUARD_VAR}={s:?} is not a number"))),
    }
}

fn read_input(spec: &Option<String>, stdin: &mut dyn Read) -> Result<Value, Error> {
    let spec = spec.as_deref().ok_or_else(|| Error::Parse("--input is required".into()))?;
    let text = match spec.trim_start().chars().next() {
        Some('[') | Some('{') => spec.to_string(),
        _ if spec == "-" => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|e| Error::Parse(e.to_string()))?;
            s
        }
        _ => std::fs::read_to_string(spec).map_err(|e| Error::Parse(format!("{spec}: {e}")))?,
    };
    json::parse(&text)
}

fn need(v: Option<usize>, name: &str) -> Result<usize, Error> {
    v.ok_or_else(|| Error::Parse(format!("--{name} is required")))
}

fn diagram_arg(inv: &Invocation) -> Result<ABDiagram, Error> {
    let text = inv.diagram.as_deref().ok_or_else(|| Error::Parse("--diagram is required".into()))?;
    let d = match (inv.m, inv.n) {
        (Some(m), Some(n)) => ABDiagram::parse_with_shape(text, m, n)?,
        (None, None) => ABDiagram::parse(text)?,
        _ => return Err(Error::Parse("give both --m and --n or neither".into())),
    };
    let errs = validate(&d);
    if errs.is_empty() {
        Ok(d)
    } else {
        Err(Error::InvalidDiagram(errs))
    }
}

fn emit(inv: &Invocation, value: &Value, text: impl FnOnce() -> String) -> String {
    match inv.format {
        Format::Json => json::to_canonical(value) + "\n",
        Format::Text => text(),
    }
}

fn matrix_text(a: &Mat) -> String {
    let rows = a.to_rows();
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    cells.iter().map(|r| r.iter().map(|c| format!("{c:>width$}")).collect::<Vec<_>>().join(" ") + "\n").collect()
}

fn cmd_classify(inv: &Invocation, stdin: &mut dyn Read) -> Result<Outcome, Error> {
    let x = json::element_from(&read_input(&inv.input, stdin)?)?;
    if !is_nilpotent_odd(&x) {
        return Err(Error::NotNilpotent);
    }
    let d = classify(&x)?;
    let dim = orbit_dimension(&x);
    let v = json!({"m": x.space.m, "n": x.space.n, "diagram": d.to_string(), "orbit_dimension": dim});
    Ok(Outcome::ok(emit(inv, &v, || format!("{d}\norbit dimension {dim}\n"))))
}

fn cmd_rep(inv: &Invocation) -> Result<Outcome, Error> {
    let d = diagram_arg(inv)?;
    let rep = representative(&d)?;
    let v = json::element_json(&rep.x);
    Ok(Outcome::ok(emit(inv, &v, || format!("{d} at (m,n) = ({},{})\n{}", d.m, d.n, matrix_text(&rep.x.a)))))
}

fn cmd_resolve(inv: &Invocation, stdin: &mut dyn Read) -> Result<Outcome, Error> {
    let x = if inv.input.is_some() {
        json::element_from(&read_input(&inv.input, stdin)?)?
    } else if inv.diagram.is_some() {
        representative(&diagram_arg(inv)?)?.x
    } else {
        representative(&regular_type(need(inv.m, "m")?, need(inv.n, "n")?)?)?.x
    };
    let component = match inv.component {
        ComponentArg::Plus => Component::Plus,
        ComponentArg::Minus => Component::Minus,
        ComponentArg::Auto => Component::NotApplicable,
    };
    let r = resolve_regular(&x, component)?;
    let v = json::resolution_json(&r.point, &r.steps);
    Ok(Outcome::ok(emit(inv, &v, || {
        let mut s = format!("case {} component {}\n", r.point.case.tag(), r.point.component.tag());
        s += &format!("steps: {}\n", describe_steps(&r.steps));
        for (name, f) in [("F0", &r.point.f0), ("F1", &r.point.f1)] {
            let depth = match f.kind {
                FlagKind::Complete => "complete".to_string(),
                FlagKind::Partial(k) => format!("partial depth {k}"),
            };
            s += &format!("{name} ({depth}), chain vectors as rows:\n{}", matrix_text(&Mat::from_rows(&f.chain)));
        }
        s
    })))
}

fn cmd_orbits(inv: &Invocation, guard: usize) -> Result<Outcome, Error> {
    let (m, n) = (need(inv.m, "m")?, need(inv.n, "n")?);
    let regular = regular_type(m, n)?;
    let mut rows = Vec::new();
    for d in enumerate_diagrams(m, n, guard)? {
        let dim = orbit_dimension(&representative(&d)?.x);
        rows.push((d.to_string(), dim, d == regular));
    }
    let v = json!({
        "m": m,
        "n": n,
        "orbits": rows.iter().map(|(d, dim, r)| json!({"diagram": d, "orbit_dimension": dim, "is_regular": r})).collect::<Vec<_>>(),
    });
    Ok(Outcome::ok(emit(inv, &v, || {
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(7).max(7);
        let mut s = format!("{:<width$}  {:>9}  regular\n", "diagram", "orbit dim");
        for (d, dim, r) in &rows {
            s += &format!("{d:<width$}  {dim:>9}  {}\n", if *r { "yes" } else { "" });
        }
        s
    })))
}

fn cmd_section(inv: &Invocation) -> Result<Outcome, Error> {
    let (m, n) = (need(inv.m, "m")?, need(inv.n, "n")?);
    let s = build_section(m, n)?;
    let checks = check_section(&s, suite::SECTION_SAMPLES, inv.seed);
    let degrees = invariant_degrees(m, n);
    let v = json::section_json(&s, &degrees, &checks);
    let out = emit(inv, &v, || {
        let mut t = format!("u at ({m},{n}):\n{}", matrix_text(&s.u.a));
        t += &format!("h0 {:?}\nh1 {:?}\ndegrees {degrees:?}\n", s.h0, s.h1);
        for l in &s.l_basis {
            t += &format!("L: e{} (x) f{}  eigenvalue {}\n", l.i, l.j, l.eigenvalue);
        }
        for (name, ok) in checks.entries() {
            t += &format!("{name}: {}\n", if ok { "ok" } else { "FAILED" });
        }
        t
    });
    let code = if checks.all() { EXIT_OK } else { EXIT_VERIFY };
    Ok(Outcome { code, stdout: out, stderr: String::new() })
}

fn cmd_bound(inv: &Invocation) -> Result<Outcome, Error> {
    let (m, n) = (need(inv.m, "m")?, need(inv.n, "n")?);
    let r = bound_report(m, n)?;
    let v = json::bound_json(&r);
    let out = emit(inv, &v, || {
        format!(
            "case {}\nclosed form  {}\n|Psi|        {}\n|Delta(n)|   {}\nmatch        {}\n",
            FlagCase::of(m, n).tag(),
            r.closed_form,
            r.psi,
            r.delta_n,
            r.matches()
        )
    });
    Ok(Outcome { code: if r.matches() { EXIT_OK } else { EXIT_VERIFY }, stdout: out, stderr: String::new() })
}

fn cmd_verify(inv: &Invocation, guard: usize) -> Result<Outcome, Error> {
    let cfg = SuiteConfig {
        m_max: inv.m.unwrap_or(6),
        n_max: inv.n.unwrap_or(3),
        seed: inv.seed,
        size_guard: guard,
        inject_bad_form: inv.inject_bad_form,
    };
    let results = suite::run_all(&cfg);
    let all = results.iter().all(|r| r.passed);
    let v = json!({
        "passed": all,
        "seed": cfg.seed,
        "criteria": results.iter().map(|r| json!({
            "number": r.number,
            "title": r.title,
            "passed": r.passed,
            "detail": r.detail,
            "failures": r.failures,
        })).collect::<Vec<_>>(),
    });
    let out = emit(inv, &v, || suite::report(&results));
    Ok(Outcome { code: if all { EXIT_OK } else { EXIT_VERIFY }, stdout: out, stderr: String::new() })
}

/// Runs one invocation; `env_guard` is the value of `OSPCONE_SIZE_GUARD`, if set.
pub fn run<I, S>(args: I, env_guard: Option<String>, stdin: &mut dyn Read) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let inv = match Invocation::try_parse_from(args) {
        Ok(inv) => inv,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome::ok(text)
            } else {
                Outcome::fail(code, text.trim_end())
            };
        }
    };
    let result = size_guard(env_guard).and_then(|guard| match inv.command {
        Command::Classify => cmd_classify(&inv, stdin),
        Command::Rep => cmd_rep(&inv),
        Command::Resolve => cmd_resolve(&inv, stdin),
        Command::Orbits => cmd_orbits(&inv, guard),
        Command::Section => cmd_section(&inv),
        Command::Bound => cmd_bound(&inv),
        Command::Verify => cmd_verify(&inv, guard),
    });
    result.unwrap_or_else(|e| Outcome::fail(exit_code(&e), format!("error: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::identities;
    use ospcone_core::flags::is_self_orthogonal;

    fn cli(args: &[&str]) -> Outcome {
        cli_with(args, None, "")
    }

    fn cli_with(args: &[&str], guard: Option<&str>, stdin: &str) -> Outcome {
        let argv = std::iter::once("ospcone").chain(args.iter().copied());
        run(argv, guard.map(str::to_string), &mut stdin.as_bytes())
    }

    fn field(out: &Outcome, key: &str) -> serde_json::Value {
        json::parse(&out.stdout).unwrap()[key].clone()
    }

    #[test]
    fn classify_zero_matrix() {
        let out = cli(&["classify", "--input", r#"[["0","0"],["0","0"]]"#]);
        assert_eq!(out.code, EXIT_OK);
        assert_eq!(field(&out, "diagram"), "2*a0+d0");
        assert_eq!(field(&out, "orbit_dimension"), 0);
    }

    #[test]
    fn representative_pipes_back_into_classify() {
        let rep = cli(&["rep", "--diagram", "a1"]);
        assert_eq!(rep.code, EXIT_OK);
        let back = cli_with(&["classify", "--input", "-"], None, &rep.stdout);
        assert_eq!(field(&back, "diagram"), "a1");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(cli(&["classify", "--input", r#"[["1.5","0"],["0","0"]]"#]).code, EXIT_PARSE);
        assert_eq!(cli(&["classify", "--input", r#"[["1","0"],["0","1"]]"#]).code, EXIT_DOMAIN);
        assert_eq!(cli(&["classify"]).code, EXIT_PARSE);
        assert_eq!(cli(&["nonsense"]).code, EXIT_PARSE);
        assert_eq!(cli(&["rep", "--diagram", "a1+"]).code, EXIT_PARSE);
        assert_eq!(cli(&["rep", "--diagram", "b1", "--m", "3", "--n", "1"]).code, EXIT_DOMAIN);
        assert_eq!(cli(&["resolve", "--diagram", "3*a0+d0", "--m", "3", "--n", "1"]).code, EXIT_NOT_REGULAR);
        assert_eq!(cli(&["resolve", "--m", "3", "--n", "1", "--component", "plus"]).code, EXIT_DOMAIN);
        assert_eq!(cli_with(&["orbits", "--m", "3", "--n", "2"], Some("4"), "").code, EXIT_DOMAIN);
        assert_eq!(cli_with(&["orbits", "--m", "3", "--n", "2"], Some("x"), "").code, EXIT_PARSE);
        assert_eq!(cli(&["--help"]).code, EXIT_OK);
    }

    #[test]
    fn resolve_output_round_trips() {
        for comp in ["plus", "minus"] {
            let out = cli(&["resolve", "--m", "4", "--n", "2", "--component", comp]);
            assert_eq!(out.code, EXIT_OK);
            let p = json::resolution_from(&json::parse(&out.stdout).unwrap()).unwrap();
            assert_eq!(p.component.tag(), comp);
            assert!(is_self_orthogonal(&p.f0) && is_self_orthogonal(&p.f1));
            assert_eq!(p.case.tag(), "D1c");
        }
    }

    #[test]
    fn json_outputs_are_canonical_and_reparse() {
        let runs: [&[&str]; 5] = [
            &["orbits", "--m", "3", "--n", "1"],
            &["bound", "--m", "5", "--n", "2"],
            &["section", "--m", "3", "--n", "1"],
            &["rep", "--diagram", "b2+a0"],
            &["resolve", "--m", "2", "--n", "3"],
        ];
        for args in runs {
            let first = cli(args);
            assert_eq!(first.code, EXIT_OK, "{args:?}: {}", first.stderr);
            let v = json::parse(&first.stdout).unwrap();
            assert_eq!(json::to_canonical(&v) + "\n", first.stdout, "{args:?}");
            assert_eq!(cli(args).stdout, first.stdout, "{args:?} is not deterministic");
        }
    }

    #[test]
    fn orbits_mark_the_regular_type() {
        let out = cli(&["orbits", "--m", "3", "--n", "1"]);
        let orbits = field(&out, "orbits");
        let regular: Vec<_> = orbits.as_array().unwrap().iter().filter(|o| o["is_regular"] == true).collect();
        assert_eq!(regular.len(), 1);
        assert_eq!(regular[0]["diagram"], "a1");
        assert_eq!(regular[0]["orbit_dimension"], 5);
    }

    #[test]
    fn bound_matches_closed_form() {
        let out = cli(&["bound", "--m", "5", "--n", "2"]);
        assert_eq!(field(&out, "match"), true);
        assert_eq!(field(&out, "closed_form")["text"], "e1+e2-d1-d2");
        let w = json::weight_from(&field(&out, "psi"), 5, 2).unwrap();
        assert_eq!(w.to_string(), "4*e1+2*e2+3*d1+d2");
    }

    #[test]
    fn injected_bad_form_is_caught() {
        let cfg = SuiteConfig { m_max: 2, n_max: 1, inject_bad_form: true, ..SuiteConfig::default() };
        let r = identities(&cfg);
        assert!(!r.passed);
        assert!(r.failures.iter().any(|f| f.contains("q1 lies in sp(V1)")), "{:?}", r.failures);
        let clean = identities(&SuiteConfig { m_max: 2, n_max: 1, ..SuiteConfig::default() });
        assert!(clean.passed);
        assert_eq!(identities(&SuiteConfig { m_max: 2, n_max: 1, ..SuiteConfig::default() }), clean);
    }

    #[test]
    fn verify_reports_failure_with_exit_five() {
        let out = cli(&["verify", "--m", "2", "--n", "1", "--inject-bad-form", "--format", "text"]);
        assert_eq!(out.code, EXIT_VERIFY);
        assert!(out.stdout.lines().filter(|l| l.starts_with("criterion ")).count() == 8);
        assert!(out.stdout.contains("criterion 8 [FAIL]"));
    }
}
