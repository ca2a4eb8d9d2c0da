//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p bpd --test acceptance`. Exits nonzero if any
//! criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use num_rational::Ratio;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bpd::analysis::{
    arbr_empirical, arbr_formula, percent_one_decimal, reference_table, repair_downloads,
};
use bpd::base_code::{build_parity, BaseKind, CodeParams};
use bpd::cli::cmd_construct;
use bpd::codec::{decode_any_k, encode, repair_systematic, Stripe};
use bpd::construct::{construct, expand_generator, make_plan, BpdCode};
use bpd::descriptor;
use bpd::field::{Elem, FieldTower};
use bpd::verify::{
    lambda_census, random_stripe, verify_mds, verify_mds_by_decoding, SymbolicTable,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn grid() -> Vec<CodeParams> {
    let mut g = CodeParams::grid(2..=3, 16);
    g.extend(CodeParams::grid(4..=4, 15));
    g
}

/// Every grid code, built through the CLI construct command and reloaded from its descriptor.
fn grid_codes() -> Result<Vec<BpdCode>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    grid()
        .iter()
        .map(|p| {
            let path = dir.path().join(format!("code_{}_{}.json", p.n, p.k));
            cmd_construct(p.n, p.k, "cauchy", None, Some(&path), true).map_err(|e| {
                format!("construct ({},{}): exit {} {}", p.n, p.k, e.code, e.message)
            })?;
            let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
            descriptor::load(&text).map_err(|e| format!("reload ({},{}): {e}", p.n, p.k))
        })
        .collect()
}

fn table() -> Outcome {
    let expected = [
        (9, 6, Ratio::new(23, 36), "63.9"),
        (11, 8, Ratio::new(5, 8), "62.5"),
        (12, 8, Ratio::new(19, 32), "59.4"),
        (14, 10, Ratio::new(59, 100), "59.0"),
    ];
    let rows = reference_table();
    for ((n, k, rho, pct), row) in expected.iter().zip(&rows) {
        let p = CodeParams::new(*n, *k).map_err(|e| e.to_string())?;
        check(
            arbr_formula(&p) == *rho,
            format!("({n},{k}) rho = {}", arbr_formula(&p)),
        )?;
        check(
            percent_one_decimal(*rho) == *pct,
            format!("({n},{k}) renders {}", percent_one_decimal(*rho)),
        )?;
        check(
            row.matches && row.percent == *pct,
            format!("table row {row:?}"),
        )?;
    }
    Ok("23/36 5/8 19/32 59/100".into())
}

fn example_9_6() -> Outcome {
    let code = construct(9, 6, BaseKind::Cauchy, None)
        .map_err(|e| e.to_string())?
        .code;
    let downloads = repair_downloads(&code, 4, 1).map_err(|e| e.to_string())?;
    check(
        downloads == [7, 8, 8, 7, 8, 8],
        format!("downloads {downloads:?}"),
    )?;
    let total: usize = downloads.iter().sum();
    let gamma = Ratio::new(total as u64, 6);
    check(gamma == Ratio::new(23, 3), format!("average {gamma}"))?;
    let savings = Ratio::from_integer(1) - gamma / Ratio::from_integer(12);
    check(
        percent_one_decimal(savings) == "36.1",
        format!("savings {}", percent_one_decimal(savings)),
    )?;
    Ok(format!(
        "downloads {downloads:?}, average {gamma}, savings {}%",
        percent_one_decimal(savings)
    ))
}

fn mds_soundness(codes: &[BpdCode]) -> Outcome {
    for code in codes {
        let p = code.params();
        let symbolic = verify_mds(code.generator(), code.lambda(), code.tower()).pass;
        let decoding = verify_mds_by_decoding(code, 500, 0xacce97 ^ (p.n * 31 + p.k) as u64);
        check(
            symbolic == decoding,
            format!(
                "({},{}) symbolic {symbolic} vs decoding {decoding}",
                p.n, p.k
            ),
        )?;
        check(
            symbolic,
            format!("({},{}) constructed code is not MDS", p.n, p.k),
        )?;
    }
    Ok(format!("{} codes", codes.len()))
}

fn census_r_le_3() -> Outcome {
    let tower = FieldTower::build(2).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (n, k) in [(9, 6), (11, 8)] {
        let params = CodeParams::new(n, k).map_err(|e| e.to_string())?;
        let parity = build_parity(&params, BaseKind::Cauchy).map_err(|e| e.to_string())?;
        let gen = expand_generator(&parity, &make_plan(&params)).map_err(|e| e.to_string())?;
        let c = lambda_census(&gen, &tower);
        check(
            c.candidates == 240 && c.passing.len() == 240 && c.failing.is_empty(),
            format!(
                "({n},{k}) {} passing / {} failing",
                c.passing.len(),
                c.failing.len()
            ),
        )?;
        out.push(format!("({n},{k}) 240/0"));
    }
    Ok(out.join(", "))
}

fn census_r_4() -> Outcome {
    let tower = FieldTower::build(2).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (n, k) in [(15, 11), (14, 10)] {
        let params = CodeParams::new(n, k).map_err(|e| e.to_string())?;
        let parity = build_parity(&params, BaseKind::Cauchy).map_err(|e| e.to_string())?;
        let gen = expand_generator(&parity, &make_plan(&params)).map_err(|e| e.to_string())?;
        let c = lambda_census(&gen, &tower);
        check(
            !c.passing.is_empty() && c.failing.len() <= 192,
            format!(
                "({n},{k}) {} passing / {} failing",
                c.passing.len(),
                c.failing.len()
            ),
        )?;
        out.push(format!("({n},{k}) {}/{}", c.passing.len(), c.failing.len()));
    }
    Ok(out.join(", "))
}

fn determinant_properties(codes: &[BpdCode]) -> Outcome {
    let mut total = 0;
    for code in codes {
        let p = code.params();
        let table = SymbolicTable::new(code.generator());
        for rec in table.records() {
            let deg = rec
                .poly
                .degree()
                .ok_or_else(|| format!("({},{}) f_R is zero", p.n, p.k))?;
            let at_zero = rec.poly.eval(code.tower(), Elem::ZERO);
            check(
                !at_zero.is_zero(),
                format!("({},{}) f_R(0) = 0 at {:?}", p.n, p.k, rec.sub),
            )?;
            check(
                !(rec.upper == 0 || rec.lower == 0) || deg == 0,
                format!(
                    "({},{}) one-sided R with degree {deg} at {:?}",
                    p.n, p.k, rec.sub
                ),
            )?;
            check(
                deg <= p.r / 2,
                format!("({},{}) degree {deg} > r/2 at {:?}", p.n, p.k, rec.sub),
            )?;
            if (p.n, p.k) == (9, 6) {
                check(deg <= 1, format!("(9,6) degree {deg}"))?;
            }
        }
        total += table.records().len();
    }
    Ok(format!(
        "{total} block submatrices over {} codes",
        codes.len()
    ))
}

fn formula_vs_measurement(codes: &[BpdCode]) -> Outcome {
    for code in codes {
        let p = code.params();
        let measured = arbr_empirical(code, 2).map_err(|e| format!("({},{}) {e}", p.n, p.k))?;
        check(
            measured == arbr_formula(p),
            format!(
                "({},{}) formula {} vs measured {measured}",
                p.n,
                p.k,
                arbr_formula(p)
            ),
        )?;
    }
    Ok(format!("{} codes", codes.len()))
}

fn properties(codes: &[BpdCode]) -> Outcome {
    let config = Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    };
    let pool = codes.len();

    let mut runner = TestRunner::new(config.clone());
    runner
        .run(&(0..pool, any::<u64>()), |(idx, seed)| {
            let code = &codes[idx];
            let (n, k) = (code.params().n, code.params().k);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let stripe = random_stripe(code, &mut rng);
            let word = encode(code, &stripe).unwrap();
            let mut nodes: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(&mut nodes[..], &mut rng);
            let available: BTreeMap<_, _> =
                nodes[..k].iter().map(|&c| (c, word.nodes[c])).collect();
            prop_assert_eq!(decode_any_k(code, &available).unwrap(), stripe);
            let failed = (seed as usize) % k;
            let report = repair_systematic(code, failed, &word).unwrap();
            prop_assert_eq!(report.recovered, word.nodes[failed]);
            Ok(())
        })
        .map_err(|e| format!("encode/decode/repair: {e}"))?;

    let mut runner = TestRunner::new(config.clone());
    runner
        .run(&(0..pool, any::<u64>(), any::<u64>()), |(idx, s1, s2)| {
            let code = &codes[idx];
            let tower = code.tower();
            let x = random_stripe(code, &mut ChaCha8Rng::seed_from_u64(s1));
            let y = random_stripe(code, &mut ChaCha8Rng::seed_from_u64(s2));
            let c = tower.elem((s1 ^ s2) as u16 % tower.size() as u16).unwrap();
            let add = |u: &[Elem], v: &[Elem]| {
                u.iter()
                    .zip(v)
                    .map(|(&p, &q)| tower.add(p, q))
                    .collect::<Vec<_>>()
            };
            let scale = |u: &[Elem]| u.iter().map(|&p| tower.mul(c, p)).collect::<Vec<_>>();
            let z = Stripe {
                a: add(&scale(&x.a), &y.a),
                b: add(&scale(&x.b), &y.b),
            };
            let (ex, ey, ez) = (
                encode(code, &x).unwrap(),
                encode(code, &y).unwrap(),
                encode(code, &z).unwrap(),
            );
            for ((px, py), pz) in ex.nodes.iter().zip(&ey.nodes).zip(&ez.nodes) {
                prop_assert_eq!(tower.add(tower.mul(c, px.0), py.0), pz.0);
                prop_assert_eq!(tower.add(tower.mul(c, px.1), py.1), pz.1);
            }
            Ok(())
        })
        .map_err(|e| format!("linearity: {e}"))?;

    let towers: Vec<FieldTower> = (1..=3).map(|m| FieldTower::build(m).unwrap()).collect();
    let mut runner = TestRunner::new(config.clone());
    runner
        .run(
            &(0..3usize, any::<u16>(), any::<u16>(), any::<u16>()),
            |(t, a, b, c)| {
                let f = &towers[t];
                let q = f.size() as u16;
                let (a, b, c) = (
                    f.elem(a % q).unwrap(),
                    f.elem(b % q).unwrap(),
                    f.elem(c % q).unwrap(),
                );
                prop_assert_eq!(f.add(a, b), f.add(b, a));
                prop_assert_eq!(f.mul(a, b), f.mul(b, a));
                prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                prop_assert_eq!(f.mul(a, b), f.mul_schoolbook(a, b));
                prop_assert_eq!(f.add(a, a), Elem::ZERO);
                if !a.is_zero() {
                    prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Elem::ONE);
                }
                Ok(())
            },
        )
        .map_err(|e| format!("field axioms: {e}"))?;

    let mut runner = TestRunner::new(config);
    runner
        .run(&(0..pool, any::<u16>()), |(idx, raw)| {
            let code = &codes[idx];
            let tower = code.tower();
            let lambda = tower.elem(raw % tower.size() as u16).unwrap();
            let variant = code.with_lambda(lambda).unwrap();
            let text = descriptor::save(&variant);
            let loaded = descriptor::load(&text).unwrap();
            prop_assert_eq!(&loaded, &variant);
            prop_assert_eq!(descriptor::save(&loaded), text);
            Ok(())
        })
        .map_err(|e| format!("descriptor stability: {e}"))?;

    Ok("4 suites x 1000 cases".into())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let codes = grid_codes();
    let build_time = start.elapsed();

    let mut results: Vec<(&str, Outcome, std::time::Duration)> = Vec::new();
    let mut run = |name: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let outcome = f();
        results.push((name, outcome, t.elapsed()));
    };
    let with_codes = |f: fn(&[BpdCode]) -> Outcome| {
        let codes = &codes;
        move || match codes {
            Ok(c) => f(c),
            Err(e) => Err(e.clone()),
        }
    };

    run("1 table reproduction", &table);
    run("2 (9,6) repair example", &example_9_6);
    run("3 MDS soundness over grid", &with_codes(mds_soundness));
    run("4 lambda census r<=3", &census_r_le_3);
    run("5 lambda census r=4", &census_r_4);
    run("6 determinant structure", &with_codes(determinant_properties));
    run(
        "7 formula = measurement",
        &with_codes(formula_vs_measurement),
    );
    run("8 property suites", &with_codes(properties));

    println!("grid construction: {:.1?}", build_time);
    let mut failed = 0;
    for (name, outcome, elapsed) in &results {
        match outcome {
            Ok(detail) => println!("PASS  {name:<28} [{elapsed:.1?}] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name:<28} [{elapsed:.1?}] {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
