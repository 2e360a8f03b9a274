use std::path::{Path, PathBuf};
use std::process::Command;

use paradiff_cli::{
    reingest, run_file, run_text, to_jsonl, CliError, ModuleDef, Options, Session, Verdict,
    EXIT_OK, EXIT_PARSE, EXIT_SEMANTIC, EXIT_VERDICT,
};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn corpus() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(fixture(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    v.sort();
    v
}

#[test]
fn exit_codes() {
    let expect = [
        ("log_pole_flat.toml", EXIT_OK),
        ("power_prolong.toml", EXIT_OK),
        ("gauge_pair.toml", EXIT_OK),
        ("log_pole_curved.toml", EXIT_VERDICT),
        ("not_closed.toml", EXIT_VERDICT),
        ("bad_entry.toml", EXIT_PARSE),
        ("bad_toml.toml", EXIT_PARSE),
        ("undefined_module.toml", EXIT_SEMANTIC),
        ("short_row.toml", EXIT_SEMANTIC),
    ];
    assert_eq!(expect.len(), corpus().len());
    for (name, code) in expect {
        assert_eq!(run_file(&fixture(name), &Options::default()).exit_code(), code, "{name}");
    }
    assert_eq!(
        run_file(&fixture("missing.toml"), &Options::default()).exit_code(),
        EXIT_PARSE
    );
}

#[test]
fn binary_exit_codes_and_output() {
    let bin = env!("CARGO_BIN_EXE_paradiff");
    let out = Command::new(bin)
        .args(["run", "--quiet"])
        .arg(fixture("log_pole_flat.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    let direct = run_file(&fixture("log_pole_flat.toml"), &Options::default());
    assert_eq!(text, to_jsonl(&direct.certificates));

    let out = Command::new(bin).arg("run").arg(fixture("bad_entry.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("offset 4") && err.contains("expected `)`"), "{err}");

    let dir = std::env::temp_dir().join(format!("paradiff-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("certs.jsonl");
    let out = Command::new(bin)
        .args(["run", "--quiet", "--out"])
        .arg(&path)
        .arg(fixture("log_pole_curved.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn certificate_field_order_is_fixed() {
    let out = run_file(&fixture("not_closed.toml"), &Options::default());
    let line = out.certificates[0].to_line();
    let keys = [
        "\"command\"",
        "\"verdict\"",
        "\"witnesses\"",
        "\"artifacts\"",
        "\"tool_version\"",
        "\"input_digest\"",
    ];
    let pos: Vec<usize> = keys.iter().map(|k| line.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{line}");
}

#[test]
fn runs_are_deterministic() {
    for path in corpus() {
        let a = to_jsonl(&run_file(&path, &Options::default()).certificates);
        let b = to_jsonl(&run_file(&path, &Options::default()).certificates);
        assert_eq!(a, b, "{}", path.display());
    }
}

#[test]
fn emitted_modules_round_trip() {
    let mut seen = 0;
    for path in corpus() {
        let text = std::fs::read_to_string(&path).unwrap();
        let mut session = match Session::load(&text) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let out = paradiff_cli::execute(&mut session, &Options::default());
        for c in &out.certificates {
            let Some(v) = c.artifacts.get("module") else { continue };
            let def: ModuleDef = serde_json::from_value(v.clone()).unwrap();
            let back = reingest(&text, &def).unwrap();
            let field = back.module.ps().base().clone();
            let rendered: Vec<_> = back.module.matrices().iter().map(|a| a.render_rows(&field)).collect();
            assert_eq!(rendered, def.matrices);
            if let Some(orig) = session.modules.get(&def.name) {
                assert_eq!(orig.module.matrices(), back.module.matrices());
                // the cached flatness certificate is not part of the data
                let shape = |p: &Option<paradiff::atiyah::ProlongedModule>| {
                    p.as_ref().map(|p| (p.parent_rank, p.q, p.incl.clone(), p.proj.clone()))
                };
                assert_eq!(shape(&orig.prolonged), shape(&back.prolonged));
            }
            seen += 1;
        }
    }
    assert!(seen >= 8, "only {seen} modules emitted");
}

#[test]
fn power_module_prolongs_to_known_matrix() {
    let out = run_file(&fixture("power_prolong.toml"), &Options::default());
    let c = &out.certificates[2];
    assert_eq!(c.verdict, Verdict::Ok);
    assert_eq!(
        c.artifacts["module"]["matrices"],
        serde_json::json!([[["(t)/(x)", "(0)/(1)"], ["(-1)/(x)", "(t)/(x)"]]])
    );
    for c in &out.certificates[4..6] {
        assert_eq!(c.artifacts["dimension"], 0);
    }
}

#[test]
fn log_pole_witnesses() {
    let out = run_file(&fixture("log_pole_curved.toml"), &Options::default());
    assert_eq!(out.certificates[0].verdict, Verdict::Fail);
    assert_eq!(
        out.certificates[0].witnesses["witness"],
        serde_json::json!([{ "pair": [0, 1], "value": "(-1)/(1)" }])
    );
    let out = run_file(&fixture("not_closed.toml"), &Options::default());
    assert_eq!(
        out.certificates[0].witnesses["bracket"],
        serde_json::json!([["x", "(-1)/(1)"]])
    );
}

#[test]
fn flags_supply_defaults() {
    let text = std::fs::read_to_string(fixture("gauge_pair.toml")).unwrap();
    let low = Options { degree_bound: Some(0), ..Options::default() };
    let out = run_text(&text, &low);
    assert_eq!(out.certificates[2].artifacts["degree_bound"], 0);
    let out = run_text(&text, &Options::default());
    assert_eq!(out.certificates[2].artifacts["dimension"], 2);
}

#[test]
fn semantic_errors() {
    let base = "[[structure]]\nname = \"X\"\nvariables = [\"x\"]\nprincipal = [[\"1\"]]\n";
    let cases = [
        "[[structure]]\nname = \"X\"\nvariables = [\"y\"]\nprincipal = [[\"1\"]]\n",
        "[[command]]\nrun = \"frobnicate\"\n",
        "[[command]]\nrun = \"check-structure\"\nstructure = \"X\"\nextra = 1\n",
        "[[command]]\nrun = \"check-morphism\"\n",
        "[[module]]\nname = \"M\"\nstructure = \"X\"\nrank = 1\nmatrices = []\n",
    ];
    for extra in cases {
        let out = run_text(&format!("{base}{extra}"), &Options::default());
        assert!(matches!(out.error, Some(CliError::Semantic(_))), "{extra}: {:?}", out.error);
        assert_eq!(out.exit_code(), EXIT_SEMANTIC);
    }
}
