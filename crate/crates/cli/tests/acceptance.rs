//! Acceptance suite: one PASS/FAIL line per criterion, with wall time
//! against its budget. Exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use paradiff::atiyah::{
    at2_module, check_exact_sequence, check_tensor_compat, prolong_module, prolong_morphism,
    sigma,
};
use paradiff::conn::{
    check_integrability, gauge_transform, horizontal_space, morphism_check, phi2_membership,
    DiffModule, Integrability, Membership, ModMorphism,
};
use paradiff::diffstruct::{
    build_structure, check_morphism, Derivation, DiffError, DiffStructure, MorphismVerdict,
    OmegaElement, ParamStructure,
};
use paradiff::field::{FieldSpec, RatFun};
use paradiff::jet::JetRing;
use paradiff::matrix::Matrix;
use paradiff_cli::{reingest, run_file, to_jsonl, ModuleDef, Options, Session};
use testkit::{
    coordinate_ps, gauge_flat_module, gauge_matrix, gauge_morphism, inverse_degree,
    jet2_member, lie_by_definition, omega, poly, principal_constant_invertible, ratfun, rng,
    sample_structures, z_quotient_morphism,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn log_pole_pairs() -> Outcome {
    let (x, y) = (RatFun::var(0), RatFun::var(1));
    ensure!(
        check_morphism(&z_quotient_morphism(&y, &x)).unwrap().is_ok(),
        "(y, x) rejected"
    );
    match check_morphism(&z_quotient_morphism(&y, &RatFun::zero())).unwrap() {
        MorphismVerdict::IntegrabilityFail { witness, .. } => {
            let expect = OmegaElement::basis(2, 0)
                .wedge(&OmegaElement::basis(2, 1))
                .scale(&RatFun::from_int(-1));
            ensure!(witness == expect, "witness for (y, 0) is {witness:?}");
        }
        v => return Err(format!("(y, 0) gave {v:?}")),
    }
    let (mut closed, mut open) = (0, 0);
    for seed in 0..20u64 {
        let mut r = rng(1000 + seed);
        // even seeds draw an exact form h_x dx + h_y dy, odd seeds draw freely
        let (f, g) = if seed % 2 == 0 {
            let h = RatFun::from_poly(poly(&mut r, 2, 3, 4));
            (h.partial(0), h.partial(1))
        } else {
            (
                RatFun::from_poly(poly(&mut r, 2, 3, 3)),
                RatFun::from_poly(poly(&mut r, 2, 3, 3)),
            )
        };
        let is_closed = f.partial(1) == g.partial(0);
        let ok = check_morphism(&z_quotient_morphism(&f, &g)).unwrap().is_ok();
        ensure!(ok == is_closed, "pair {seed}: verdict {ok}, closedness {is_closed}");
        if is_closed {
            closed += 1;
        } else {
            open += 1;
        }
    }
    ensure!(closed > 0 && open > 0, "only one side exercised");
    Ok(format!("{closed} closed, {open} non-closed pairs"))
}

fn non_closed_basis() -> Outcome {
    let f = FieldSpec::new(&["x", "y", "z"]).unwrap();
    let d = |c: &[&str]| Derivation::new(c.iter().map(|s| f.parse(s).unwrap()).collect());
    match build_structure(&f, vec![d(&["z", "1", "0"]), d(&["0", "0", "1"])]) {
        Err(DiffError::NotClosed { residual, .. }) => {
            let expect = Derivation::partial(3, 0).scale(&RatFun::from_int(-1));
            ensure!(residual == expect, "residual {:?}", residual.render(&f));
            Ok("witness -d/dx".into())
        }
        other => Err(format!("expected NotClosed, got {other:?}")),
    }
}

fn power_module() -> Outcome {
    let f = FieldSpec::new(&["x", "t"]).unwrap();
    let ps = ParamStructure::coordinate(&f, &["x"], &["t"]).unwrap();
    let m = DiffModule::new(ps, 1, vec![Matrix::scalar(f.parse("t/x").unwrap())]).unwrap();
    let pm = prolong_module(&m).map_err(|e| e.to_string())?;
    let text = pm.core.matrix(0).render(&f);
    ensure!(
        text == "[[(t)/(x), (0)/(1)], [(-1)/(x), (t)/(x)]]",
        "prolongation {text}"
    );
    for bound in 0..=3 {
        let h = horizontal_space(&m, bound);
        ensure!(h.is_empty(), "bound {bound}: {} horizontal vectors", h.len());
    }
    Ok(text)
}

fn jet_suite() -> Outcome {
    let f = FieldSpec::new(&["x", "t"]).unwrap();
    let s = DiffStructure::coordinate(&f, &["x", "t"]).unwrap();
    let j = JetRing::new(&s);
    for seed in 0..200u64 {
        let mut r = rng(2000 + seed);
        let (a, b) = (ratfun(&mut r, 2), ratfun(&mut r, 2));
        ensure!(j.l1(&a).e() == a && j.r1(&a).e() == a, "{seed}: level-1 counits");
        ensure!(j.l2(&a).e() == a && j.r2(&a).e() == a, "{seed}: level-2 counits");
        let ab = a.mul(&b);
        ensure!(
            j.mul2(&j.r2(&a), &j.r2(&b)).unwrap() == j.r2(&ab),
            "{seed}: r2 not multiplicative"
        );
        ensure!(
            j.mul2(&j.l2(&a), &j.l2(&b)).unwrap() == j.l2(&ab),
            "{seed}: l2 not multiplicative"
        );
        ensure!(
            j.r2(&a.add(&b)) == j.r2(&a).add(&j.r2(&b)),
            "{seed}: r2 not additive"
        );

        let x = jet2_member(&mut r, &s, false);
        let t = j.delta(&x);
        ensure!(t.e_id() == x.proj1() && t.id_e() == x.proj1(), "{seed}: delta counits");

        let (u, v) = (jet2_member(&mut r, &s, true), jet2_member(&mut r, &s, true));
        let gu = j.gamma(&u).unwrap();
        let a2 = a.mul(&a);
        ensure!(
            j.gamma(&j.mul2(&j.r2(&a), &u).unwrap()).unwrap() == gu.scale(&a2),
            "{seed}: gamma scaling"
        );
        let cross = j.mul2(&u, &v).unwrap().sym2_value().ok_or("I*I outside Sym2")?;
        ensure!(
            j.gamma(&u.add(&v)).unwrap() == gu.add(&cross).add(&j.gamma(&v).unwrap()),
            "{seed}: gamma addition"
        );

        let y = jet2_member(&mut r, &s, false);
        ensure!(j.is_member(&j.mul2(&x, &y).unwrap()), "{seed}: product left P2");
    }
    Ok("200 elements".into())
}

fn de_rham_lie() -> Outcome {
    let structures = sample_structures();
    for (k, s) in structures.iter().enumerate() {
        for seed in 0..100u64 {
            let a = ratfun(&mut rng(3000 + seed), s.base().len());
            ensure!(s.d1(&s.d0(&a)).is_zero(), "structure {k}, seed {seed}: dd != 0");
        }
    }
    for seed in 0..50u64 {
        let mut r = rng(4000 + seed);
        let s = &structures[seed as usize % structures.len()];
        let n = s.base().len();
        let w = omega(&mut r, s);
        let k = seed as usize % s.dim();
        ensure!(
            s.lie_derivative(k, &w) == lie_by_definition(s, k, &w),
            "seed {seed}: Lie derivative"
        );
        let coords: Vec<RatFun> = (0..s.dim()).map(|_| ratfun(&mut r, n)).collect();
        let a = ratfun(&mut r, n);
        let scaled: Vec<RatFun> = coords.iter().map(|c| c.mul(&a)).collect();
        let lhs = s.lie_derivative_general(&scaled, &w);
        let rhs = s
            .lie_derivative_general(&coords, &w)
            .scale(&a)
            .add(&s.d0(&a).scale(&w.pair(&coords)));
        ensure!(lhs == rhs, "seed {seed}: weak Lie identity");
    }
    Ok(format!("{} structures", structures.len()))
}

fn oracle_equivalence() -> Outcome {
    let ps = coordinate_ps(2, 1);
    let (mut flat, mut curved) = (0, 0);
    for seed in 0..50u64 {
        let mut r = rng(5000 + seed);
        let rank = 1 + (seed % 3) as usize;
        let m = if seed < 25 {
            gauge_flat_module(&mut r, &ps, rank).0
        } else {
            testkit::perturbed_module(&mut r, &ps, rank)
        };
        match (check_integrability(&m), phi2_membership(&m)) {
            (Integrability::Flat, Membership::Ok) => flat += 1,
            (
                Integrability::Curved { i, j, residual },
                Membership::Fail { i: a, j: b, basis, component },
            ) => {
                ensure!((i, j) == (a, b), "seed {seed}: pairs ({i},{j}) vs ({a},{b})");
                ensure!(
                    !residual.get(component, basis).is_zero(),
                    "seed {seed}: jet witness misses the curvature"
                );
                curved += 1;
            }
            (x, y) => return Err(format!("seed {seed}: {x:?} vs {y:?}")),
        }
    }
    Ok(format!("{flat} flat, {curved} curved"))
}

fn shape(seed: u64, max_rank: u64) -> (ParamStructure, usize) {
    let p = 1 + (seed % 2) as usize;
    let q = 1 + (seed / 2 % 2) as usize;
    (coordinate_ps(p, q), 1 + (seed / 4 % max_rank) as usize)
}

fn prolongation() -> Outcome {
    let err = |e: paradiff::atiyah::AtiyahError| e.to_string();
    for seed in 0..50u64 {
        let (ps, rank) = shape(seed, 3);
        let (m, _) = gauge_flat_module(&mut rng(6000 + seed), &ps, rank);
        let pm = prolong_module(&m).map_err(err)?;
        ensure!(check_integrability(&pm.core).is_flat(), "seed {seed}: At1 curved");
        ensure!(pm.proj.mul(&pm.incl).is_zero(), "seed {seed}: proj*incl != 0");
        ensure!(check_exact_sequence(&pm, &m).map_err(err)?, "seed {seed}: sequence");
    }
    for seed in 0..20u64 {
        let mut r = rng(7000 + seed);
        let (ps, rank) = shape(seed, 3);
        let (m1, t1) = gauge_flat_module(&mut r, &ps, rank);
        let (m2, t2) = gauge_flat_module(&mut r, &ps, rank);
        let (m3, t3) = gauge_flat_module(&mut r, &ps, rank);
        let c12 = principal_constant_invertible(&mut r, &ps, rank);
        let c23 = principal_constant_invertible(&mut r, &ps, rank);
        let f = ModMorphism::new(m1.clone(), m2.clone(), gauge_morphism(&t1, &t2, &c12))
            .map_err(|e| e.to_string())?;
        let g = ModMorphism::new(m2, m3, gauge_morphism(&t2, &t3, &c23))
            .map_err(|e| e.to_string())?;
        let id = prolong_morphism(&ModMorphism::identity(&m1)).map_err(err)?;
        ensure!(
            id.matrix() == &Matrix::identity(rank * (1 + ps.parameter_count())),
            "seed {seed}: identity"
        );
        let gf = prolong_morphism(&f.then(&g).map_err(|e| e.to_string())?).map_err(err)?;
        let composed = prolong_morphism(&f)
            .map_err(err)?
            .then(&prolong_morphism(&g).map_err(err)?)
            .map_err(|e| e.to_string())?;
        ensure!(gf.matrix() == composed.matrix(), "seed {seed}: composition");
    }
    for seed in 0..25u64 {
        let mut r = rng(8000 + seed);
        let (ps, rank) = shape(seed, 2);
        let (m, _) = gauge_flat_module(&mut r, &ps, rank);
        let (n, _) = gauge_flat_module(&mut r, &ps, 1 + (seed / 8 % 2) as usize);
        ensure!(check_tensor_compat(&m, &n).map_err(err)?, "seed {seed}: tensor compat");
    }
    for seed in 0..25u64 {
        let (ps, rank) = shape(seed, 2);
        let q = ps.parameter_count();
        let (m, _) = gauge_flat_module(&mut rng(9000 + seed), &ps, rank);
        let a = at2_module(&m).map_err(err)?;
        ensure!(
            a.core.rank() == rank * (1 + q + q * (q + 1) / 2),
            "seed {seed}: At2 rank"
        );
        ensure!(sigma(rank, q).mul(&a.incl) == a.incl, "seed {seed}: not symmetric");
        ensure!(
            morphism_check(&a.incl, &a.core, &a.double)
                .map_err(|e| e.to_string())?
                .is_ok(),
            "seed {seed}: inclusion not horizontal"
        );
    }
    Ok("50 + 20 + 25 + 25 instances".into())
}

fn horizontal_recovery() -> Outcome {
    let ps = coordinate_ps(2, 1);
    for seed in 0..20u64 {
        let mut r = rng(10_000 + seed);
        let rank = 1 + (seed % 3) as usize;
        let t = gauge_matrix(&mut r, &ps, rank, seed % 4 == 0);
        let m = gauge_transform(&DiffModule::trivial(&ps, rank), &t).map_err(|e| e.to_string())?;
        let sols = horizontal_space(&m, inverse_degree(&t, ps.principal_count()));
        ensure!(sols.len() == rank, "seed {seed}: dimension {} of {rank}", sols.len());
        ensure!(
            Matrix::from_rows(sols.clone()).rank() == rank,
            "seed {seed}: dependent solutions"
        );
        for v in &sols {
            for i in 0..ps.principal_count() {
                let dv: Vec<RatFun> = v.iter().map(|c| ps.principal(i).apply(c)).collect();
                ensure!(dv == m.matrix(i).mul_vec(v), "seed {seed}: not horizontal");
            }
        }
    }
    Ok("20 gauge connections".into())
}

fn corpus() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    v.sort();
    v
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_paradiff");
    let mut modules = 0;
    let files = corpus();
    for path in &files {
        let run = || {
            Command::new(bin)
                .args(["run", "--quiet"])
                .arg(path)
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        ensure!(a.stdout == b.stdout, "{}: certificates differ", path.display());
        ensure!(a.status.code() == b.status.code(), "{}: exit codes differ", path.display());
        let lib = to_jsonl(&run_file(path, &Options::default()).certificates);
        ensure!(lib.as_bytes() == a.stdout, "{}: binary and library differ", path.display());

        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let Ok(mut session) = Session::load(&text) else { continue };
        let out = paradiff_cli::execute(&mut session, &Options::default());
        for c in &out.certificates {
            let Some(v) = c.artifacts.get("module") else { continue };
            let def: ModuleDef = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
            let back = reingest(&text, &def).map_err(|e| e.to_string())?;
            let field = back.module.ps().base().clone();
            let again: Vec<_> = back.module.matrices().iter().map(|a| a.render_rows(&field)).collect();
            ensure!(again == def.matrices, "{}: `{}` changed on re-ingest", path.display(), def.name);
            if let Some(orig) = session.modules.get(&def.name) {
                ensure!(
                    orig.module.matrices() == back.module.matrices(),
                    "{}: `{}` differs structurally",
                    path.display(),
                    def.name
                );
            }
            modules += 1;
        }
    }
    Ok(format!("{} files, {modules} modules round-tripped", files.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 log-pole morphism verdicts", Duration::from_secs(5), log_pole_pairs),
        ("2 non-closed basis rejection", Duration::from_secs(1), non_closed_basis),
        ("3 power-function prolongation", Duration::from_secs(2), power_module),
        ("4 jet algebra laws", Duration::from_secs(30), jet_suite),
        ("5 de Rham and Lie identities", Duration::from_secs(30), de_rham_lie),
        ("6 integrability oracle equivalence", Duration::from_secs(60), oracle_equivalence),
        ("7 prolongation theorems", Duration::from_secs(300), prolongation),
        ("8 horizontal solver recovery", Duration::from_secs(120), horizontal_recovery),
        ("9 CLI determinism and round-trip", Duration::from_secs(120), cli_determinism),
    ];
    let mut failed = 0;
    for (name, budget, f) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|p| {
                Err(p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panicked".into()))
            });
        let took = start.elapsed();
        let result = match result {
            Ok(_) if took > budget => Err(format!("over budget ({budget:?})")),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS {name} [{:.2}s] {detail}", took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} [{:.2}s] {why}", took.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
