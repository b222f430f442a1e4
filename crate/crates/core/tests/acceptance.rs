//! Acceptance suite. Run with `cargo test -p jplt-core --test acceptance`.
//! Prints one PASS/FAIL line per criterion, with details under failures, and
//! exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jplt::audit::{posterior_oracle, verify_structural, AuditLimits, EnumerableScheme, SpecializedMds};
use jplt::protocol::construct;
use jplt::wire::{fetch, Server};
use jplt::{
    build_query, direct_demand_eval, rate_report, recover, server_answer, ColumnAssignment, Dataset, DemandSpec,
    Extension, FieldElement, Matrix, Mode, PrimeField, QueryKey, Result,
};

struct Outcome {
    checks: usize,
    failures: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, label: &str, got: T, want: T) {
        let ok = got == want;
        self.check(ok, || format!("{label}: got {got:?}, want {want:?}"));
    }
}

fn gf(p: u64) -> PrimeField {
    PrimeField::new(p).unwrap()
}

fn rows(m: &Matrix) -> Vec<Vec<u64>> {
    m.to_u64_rows()
}

fn vals(xs: &[FieldElement]) -> Vec<u64> {
    xs.iter().map(|x| x.value()).collect()
}

fn example_demand() -> DemandSpec {
    let v = Matrix::from_rows(gf(11), &[[1, 3, 2, 1, 6], [3, 10, 7, 4, 8]]).unwrap();
    DemandSpec::new(10, vec![1, 3, 4, 6, 7], v).unwrap()
}

fn example_key() -> QueryKey {
    let f = gf(11);
    let els = |v: &[u64]| v.iter().map(|&x| f.element(x)).collect::<Vec<_>>();
    QueryKey {
        head_points: None,
        extension: Extension {
            multipliers: els(&[3, 5, 1, 1, 4]),
            points: els(&[6, 1, 10, 2, 8]),
        },
        assignment: ColumnAssignment::from_support(10, &[1, 3, 4, 6, 7]).unwrap(),
        resample_seed: 0,
    }
}

/// Reference values for the worked example. `alpha` is indexed by j (the
/// five demand indices, then the five others), everything else by position.
mod reference {
    pub const LAMBDA: [[u64; 5]; 3] = [[3, 10, 8, 8, 7], [9, 4, 6, 10, 2], [5, 6, 10, 7, 10]];
    pub const H: [[u64; 10]; 3] = [
        [3, 3, 5, 10, 8, 1, 8, 7, 1, 4],
        [7, 9, 5, 4, 6, 10, 10, 2, 2, 10],
        [9, 5, 5, 6, 10, 1, 7, 10, 4, 3],
    ];
    pub const H_MULTIPLIERS: [u64; 10] = [3, 3, 5, 10, 8, 1, 8, 7, 1, 4];
    pub const H_POINTS: [u64; 10] = [6, 3, 1, 7, 9, 10, 4, 5, 2, 8];
    pub const ALPHA: [u64; 10] = [10, 7, 4, 5, 4, 9, 2, 1, 4, 4];
    pub const G: [[u64; 10]; 7] = [
        [9, 10, 2, 7, 4, 1, 5, 4, 4, 4],
        [10, 8, 2, 5, 3, 10, 9, 9, 8, 10],
        [5, 2, 2, 2, 5, 1, 3, 1, 5, 3],
        [8, 6, 2, 3, 1, 10, 1, 5, 10, 2],
        [4, 7, 2, 10, 9, 1, 4, 3, 9, 5],
        [2, 10, 2, 4, 4, 10, 5, 4, 7, 7],
        [1, 8, 2, 6, 3, 1, 9, 9, 3, 1],
    ];
    pub const C1: [u64; 7] = [8, 1, 8, 9, 6, 1, 0];
    pub const C2: [u64; 7] = [0, 8, 1, 8, 9, 6, 1];
    /// Z_l coefficients on X_1..X_10.
    pub const Z: [[u64; 10]; 2] = [[0, 1, 0, 3, 2, 0, 1, 6, 0, 0], [0, 3, 0, 10, 7, 0, 4, 8, 0, 0]];
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let demand = example_demand();
    let key = example_key();
    let c = construct(&demand, &key, Mode::Grs).unwrap();
    let to_vec = |a: &[[u64; 10]]| a.iter().map(|r| r.to_vec()).collect::<Vec<_>>();

    o.eq(
        "Lambda",
        rows(&c.dual),
        reference::LAMBDA.iter().map(|r| r.to_vec()).collect(),
    );
    o.eq("H", rows(&c.parity), to_vec(&reference::H));
    let hs = c.parity_spec.as_ref().unwrap();
    o.eq(
        "H multipliers",
        vals(hs.multipliers()),
        reference::H_MULTIPLIERS.to_vec(),
    );
    o.eq("H points", vals(hs.points()), reference::H_POINTS.to_vec());

    let gs = c.generator_spec.as_ref().unwrap();
    let perm = key.assignment.perm();
    let alpha_by_j: Vec<u64> = perm.iter().map(|&pos| gs.multipliers()[pos].value()).collect();
    o.eq("alpha (by j)", alpha_by_j, reference::ALPHA.to_vec());
    o.eq("G", rows(&c.query.generator), to_vec(&reference::G));
    o.eq("c1", vals(&c.plan.vectors[0]), reference::C1.to_vec());
    o.eq("c2", vals(&c.plan.vectors[1]), reference::C2.to_vec());

    let f = gf(11);
    for i in 0..10 {
        let data = Dataset::indicator(f, 10, i).unwrap();
        let z = recover(&server_answer(&c.query, &data).unwrap(), &c.plan).unwrap();
        let got: Vec<u64> = z.iter().map(|m| m.coords()[0].value()).collect();
        o.eq(
            &format!("Z on basis dataset e{}", i + 1),
            got,
            vec![reference::Z[0][i], reference::Z[1][i]],
        );
    }

    // The reference generator has to be orthogonal to H for the protocol to work.
    let reference_g = Matrix::from_rows(f, &reference::G).unwrap();
    let product = reference_g.mul(&c.parity.transpose()).unwrap();
    o.check(product.is_zero(), || {
        format!(
            "reference G is not orthogonal to H: G*H^T row 1 = {:?}",
            vals(product.row(0))
        )
    });
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let r = rate_report(10, 5, 2, 11, 1).unwrap();
    o.eq("rate(10,5,2)", r.jplt_rate, Ratio::new(2, 7));
    let f = gf(65537);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 1..=12 {
        for d in 1..=k {
            for l in 1..=d {
                for mode in [Mode::Grs, Mode::Generic] {
                    let demand = DemandSpec::random_grs(f, k, d, l, &mut rng).unwrap();
                    let data = Dataset::random(f, 2, k, &mut rng).unwrap();
                    let key = QueryKey::sample(&demand, mode, &mut rng).unwrap();
                    let (q, plan) = build_query(&demand, &key, mode).unwrap();
                    let answer = server_answer(&q, &data).unwrap();
                    let n = k - d + l;
                    o.eq(&format!("answer length K={k} D={d} L={l} {mode}"), answer.len(), n);
                    let z = recover(&answer, &plan).unwrap();
                    o.eq(
                        &format!("recovery K={k} D={d} L={l} {mode}"),
                        z,
                        direct_demand_eval(&data, &demand).unwrap(),
                    );
                    let achieved = Ratio::new(l as u64, answer.len() as u64);
                    let reported = rate_report(k, d, l, 65537, 2).unwrap().jplt_rate;
                    o.eq(&format!("rate K={k} D={d} L={l}"), achieved, reported);
                }
            }
        }
    }
    o
}

/// Largest K for which generic mode's whole-block resampling succeeds reliably.
fn generic_k_cap(p: u64) -> usize {
    match p {
        11 => 5,
        101 => 8,
        _ => 16,
    }
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..1000 {
        let mode = if i % 2 == 0 { Mode::Grs } else { Mode::Generic };
        let p = [11u64, 101, 65537][rng.random_range(0..3)];
        let m = [1usize, 3][rng.random_range(0..2)];
        let k_cap = match mode {
            Mode::Grs => 16.min(p as usize),
            Mode::Generic => generic_k_cap(p),
        };
        let k = rng.random_range(1..=k_cap);
        let d = rng.random_range(1..=k);
        let l = rng.random_range(1..=d);
        let f = gf(p);
        let run = |rng: &mut ChaCha8Rng| -> Result<bool> {
            let demand = match mode {
                Mode::Grs => DemandSpec::random_grs(f, k, d, l, rng)?,
                Mode::Generic => DemandSpec::random_mds(f, k, d, l, rng)?,
            };
            let data = Dataset::random(f, m, k, rng)?;
            let key = QueryKey::sample(&demand, mode, rng)?;
            let (q, plan) = build_query(&demand, &key, mode)?;
            let z = recover(&server_answer(&q, &data)?, &plan)?;
            let mut ok = z == direct_demand_eval(&data, &demand)?;
            // Same demand and data in the other mode must give the same Z.
            if mode == Mode::Grs && k <= generic_k_cap(p) {
                let key = QueryKey::sample(&demand, Mode::Generic, rng)?;
                let (q, plan) = build_query(&demand, &key, Mode::Generic)?;
                ok &= recover(&server_answer(&q, &data)?, &plan)? == z;
            }
            Ok(ok)
        };
        let label = format!("instance {i}: p={p} m={m} K={k} D={d} L={l} {mode}");
        match run(&mut rng) {
            Ok(ok) => o.check(ok, || format!("{label}: recovered Z differs")),
            Err(e) => o.check(false, || format!("{label}: {e}")),
        }
    }
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    let limits = AuditLimits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (p, mode) in [(11, Mode::Grs), (65537, Mode::Grs), (65537, Mode::Generic)] {
        let f = gf(p);
        for k in 1..=10 {
            for d in 1..=k {
                for l in 1..=d {
                    let demand = DemandSpec::random_grs(f, k, d, l, &mut rng).unwrap();
                    let key = QueryKey::sample(&demand, mode, &mut rng).unwrap();
                    let (q, _) = build_query(&demand, &key, mode).unwrap();
                    let report = verify_structural(&q.generator, d, l, true, &limits).unwrap();
                    o.check(
                        report.pass && report.records.len() == jplt::matgf::binomial(k, d) as usize,
                        || {
                            let bad = report.failures().next().cloned();
                            format!("p={p} K={k} D={d} L={l} {mode}: first failing subset {bad:?}")
                        },
                    );
                }
            }
        }
    }
    o
}

/// Reveals the support: the query is the demand itself, zero off W.
struct PlantedLeak;

impl EnumerableScheme for PlantedLeak {
    fn realizations(&self, demand: &DemandSpec) -> Result<Option<Vec<Matrix>>> {
        Ok(Some(vec![demand.embedded()]))
    }

    fn realization_bound(&self, _: usize, _: usize, _: usize, _: u64) -> u128 {
        1
    }
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let limits = AuditLimits::default();
    for (k, d, l, p) in [(3, 2, 1, 3), (4, 2, 1, 5)] {
        for mode in [Mode::Grs, Mode::Generic] {
            let t = posterior_oracle(k, d, l, p, &SpecializedMds(mode), &limits).unwrap();
            let label = format!("K={k} D={d} L={l} p={p} {mode}");
            o.check(t.is_private() && !t.entries.is_empty(), || {
                format!("{label}: max TV {}", jplt::audit::fmt_ratio(&t.max_total_variation))
            });
            o.eq(&format!("{label}: skipped demands"), t.skipped_demands, 0);
            for e in &t.entries {
                let total: num_rational::BigRational = e.posterior.iter().sum();
                o.check(total == num_traits::One::one(), || {
                    format!("{label}: posterior does not sum to 1")
                });
            }
        }
        let t = posterior_oracle(k, d, l, p, &PlantedLeak, &limits).unwrap();
        o.check(!t.is_private(), || {
            format!("planted leak at K={k} D={d} p={p} not detected")
        });
    }
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..500 {
        let mode = if i % 2 == 0 { Mode::Grs } else { Mode::Generic };
        let p = [101u64, 65537][rng.random_range(0..2)];
        let k = rng.random_range(1..=generic_k_cap(p));
        let d = rng.random_range(1..=k);
        let l = rng.random_range(1..=d);
        let f = gf(p);
        let demand = DemandSpec::random_grs(f, k, d, l, &mut rng).unwrap();
        let key = QueryKey::sample(&demand, mode, &mut rng).unwrap();
        let c = construct(&demand, &key, mode).unwrap();
        let label = format!("instance {i}: p={p} K={k} D={d} L={l} {mode}");
        let zero = |a: &Matrix, b: &Matrix| a.mul(&b.transpose()).unwrap().is_zero();
        o.check(zero(demand.coefficients(), &c.dual), || {
            format!("{label}: V*Lambda^T != 0")
        });
        o.check(zero(&c.query.generator, &c.parity), || format!("{label}: G*H^T != 0"));
        o.check(zero(&demand.embedded(), &c.parity), || format!("{label}: U*H^T != 0"));
    }
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    for k in 1..=50usize {
        for d in 1..k {
            for l in 1..d {
                let (k64, d64, l64) = (k as u64, d as u64, l as u64);
                let ours = Ratio::new(l64, k64 - d64 + l64);
                let pir = Ratio::new(l64, k64);
                let plc = Ratio::new(1, k64 - d64 + 1);
                let r = rate_report(k, d, l, 65537, 1).unwrap();
                o.eq(
                    &format!("reported rates K={k} D={d} L={l}"),
                    (r.jplt_rate, r.pir_baseline, r.plc_baseline),
                    (ours, pir, plc),
                );
                o.check(ours > pir, || format!("K={k} D={d} L={l}: {ours} <= {pir}"));
                if l == 1 {
                    o.check(ours == plc, || format!("K={k} D={d} L=1: {ours} != {plc}"));
                } else {
                    o.check(ours > plc, || format!("K={k} D={d} L={l}: {ours} <= {plc}"));
                }
            }
        }
    }
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..100 {
        let p = [11u64, 101, 65537][rng.random_range(0..3)];
        let f = gf(p);
        let k = rng.random_range(1..=10.min(p as usize));
        let d = rng.random_range(1..=k);
        let l = rng.random_range(1..=d);
        let m = rng.random_range(1..=4);
        let demand = DemandSpec::random_grs(f, k, d, l, &mut rng).unwrap();
        let key = QueryKey::sample(&demand, Mode::Grs, &mut rng).unwrap();
        let (q, _) = build_query(&demand, &key, Mode::Grs).unwrap();
        let data = Dataset::random(f, m, k, &mut rng).unwrap();
        let addr = Server::bind("127.0.0.1:0", data.clone()).unwrap().spawn().unwrap();
        let remote = fetch(addr, m, &q);
        let local = server_answer(&q, &data).unwrap();
        let label = format!("instance {i}: p={p} m={m} K={k}");
        match remote {
            Ok(a) => o.check(a == local, || format!("{label}: wire answer differs")),
            Err(e) => o.check(false, || format!("{label}: {e}")),
        }
    }
    o
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 worked example reproduction", Duration::from_secs(1), criterion_1),
        ("2 capacity rate", Duration::from_secs(10), criterion_2),
        ("3 recoverability suite", Duration::from_secs(30), criterion_3),
        (
            "4 structural privacy certification",
            Duration::from_secs(60),
            criterion_4,
        ),
        ("5 exact posterior uniformity", Duration::from_secs(300), criterion_5),
        ("6 duality invariants", Duration::from_secs(10), criterion_6),
        ("7 baseline dominance", Duration::from_secs(1), criterion_7),
        ("8 wire fidelity", Duration::from_secs(10), criterion_8),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(mut o) => {
                if elapsed > budget {
                    o.failures.push(format!("runtime {elapsed:.2?} over budget {budget:?}"));
                }
                let summary = format!("{} checks, {} failed", o.checks, o.failures.len());
                (o.failures.is_empty(), (summary, o.failures))
            }
            Err(_) => (false, ("panicked".to_string(), Vec::new())),
        };
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("criterion {name}: {verdict} ({}, {elapsed:.2?})", detail.0);
        for line in detail.1.iter().take(20) {
            println!("    {line}");
        }
        if detail.1.len() > 20 {
            println!("    ... {} more", detail.1.len() - 20);
        }
        if !ok {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
