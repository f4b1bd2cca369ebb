//! Acceptance criteria, one line per criterion. Runs without the libtest harness so the
//! summary lines show up in `cargo test` output.

use std::time::{Duration, Instant};

use lauricella::catalog::{catalog, find, IdentityEntry};
use lauricella::harness::{generate_family, run_suite, sample_point, SpectrumSpec, SuiteConfig, ValidationReport};
use lauricella::identity::eval_rhs;
use lauricella::matrix::{frobenius_norm, inverse, matmul, sub, ComplexMatrix, ToleranceConfig};
use lauricella::series::{evaluate, evaluate_shifted, ParameterSet, SeriesConfig};
use lauricella::{Group, LauricellaKind};
use num_complex::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(index: usize, title: &str, elapsed: Duration, o: &Outcome) -> bool {
    println!(
        "acceptance {index} {:<34} {} ({:.1}s) {}",
        title,
        if o.pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        o.detail
    );
    o.pass
}

fn rel(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    frobenius_norm(&sub(a, b).unwrap()) / (1.0 + frobenius_norm(a))
}

fn family(kind: &LauricellaKind, dim: usize, seed: u64) -> ParameterSet {
    let f = generate_family(dim, kind.signature().len(), &SpectrumSpec::default(), seed).unwrap();
    ParameterSet::from_slots(kind, f.matrices).unwrap()
}

/// Direct double loop over every multi-index of total degree ≤ `max_total`.
fn naive_scalar_sum(kind: &LauricellaKind, params: &[Complex64], x: &[Complex64], max_total: usize) -> Complex64 {
    let sig = kind.signature();
    let k = kind.arity();
    let rising = |a: Complex64| {
        let mut t = vec![Complex64::new(1.0, 0.0)];
        for j in 0..max_total {
            let last = t[j];
            t.push(last * (a + j as f64));
        }
        t
    };
    let tables: Vec<Vec<Complex64>> = params.iter().map(|&a| rising(a)).collect();
    let mut inv_fact = vec![1.0f64];
    for j in 1..=max_total {
        inv_fact.push(inv_fact[j - 1] / j as f64);
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut m = vec![0usize; k];
    loop {
        let mut term = Complex64::new(1.0, 0.0);
        for j in 0..k {
            term *= x[j].powu(m[j] as u32) * inv_fact[m[j]];
        }
        for (s, slot) in sig.iter().enumerate() {
            let sigma: usize = slot.axes.iter().map(|&a| m[a]).sum();
            if slot.group == Group::C {
                term /= tables[s][sigma];
            } else {
                term *= tables[s][sigma];
            }
        }
        total += term;
        // Next tuple with total ≤ max_total, last index fastest.
        let mut pos = k;
        loop {
            if pos == 0 {
                return total;
            }
            pos -= 1;
            m[pos] += 1;
            if m.iter().sum::<usize>() <= max_total {
                break;
            }
            m[pos] = 0;
        }
    }
}

fn criterion_scalar_oracle() -> Outcome {
    let cfg = SeriesConfig::default();
    let tol = ToleranceConfig::for_dim(1);
    let mut worst = 0.0f64;
    let mut worst_kind = String::new();
    for (name, kind) in LauricellaKind::acceptance_list() {
        for p in 0..20u64 {
            let params = family(&kind, 1, 1000 + p);
            let scalars: Vec<Complex64> = params.slots().map(|m| m.get(0, 0)).collect();
            let x = sample_point(&kind, 1.0, 2000 + p);
            let got = evaluate(&kind, &params, &x, &cfg, &tol).unwrap().value.get(0, 0);
            let want = naive_scalar_sum(&kind, &scalars, &x, 80);
            let err = (got - want).norm() / want.norm();
            if err > worst {
                worst = err;
                worst_kind = name.clone();
            }
        }
    }
    Outcome {
        pass: worst < 1e-12,
        detail: format!("30 kinds x 20 points, max relative error {worst:.2e} ({worst_kind})"),
    }
}

fn suite_outcome(r: &ValidationReport, limit: f64, budget: Duration, elapsed: Duration) -> Outcome {
    let worst = r
        .entries
        .iter()
        .filter_map(|e| e.max_residual)
        .fold(0.0f64, f64::max);
    let inconclusive: u32 = r.entries.iter().map(|e| e.inconclusive).sum();
    let failing = r.failing();
    Outcome {
        pass: r.pass && worst < limit && elapsed < budget && r.entry_count > 0,
        detail: format!(
            "{} entries, max residual {worst:.2e}, inconclusive {inconclusive}, failing {:?}",
            r.entry_count, failing
        ),
    }
}

fn hand_coded_contiguous(params: &ParameterSet, kind: &LauricellaKind, x: &[Complex64]) -> ComplexMatrix {
    let cfg = SeriesConfig::default();
    let tol = ToleranceConfig::for_dim(params.dim());
    let mut out = evaluate(kind, params, x, &cfg, &tol).unwrap().value;
    for j in 1..=kind.arity() {
        let b = format!("B{j}");
        let c = format!("C{j}");
        let shifted = evaluate_shifted(
            kind,
            params,
            &[("A".into(), 1), (b.clone(), 1), (c.clone(), 1)],
            x,
            &cfg,
            &tol,
        )
        .unwrap()
        .value;
        let bj = params.slot(kind.slot_index(&b).unwrap());
        let cj_inv = inverse(params.slot(kind.slot_index(&c).unwrap()), &tol).unwrap();
        let term = matmul(&matmul(bj, &shifted).unwrap(), &cj_inv).unwrap();
        out.add_scaled_assign(x[j - 1], &term);
    }
    out
}

fn criterion_contiguous() -> Outcome {
    let entry = find("FA.A.raise.unit").unwrap();
    let cfg = SeriesConfig::default();
    let mut worst = 0.0f64;
    for d in 0..10u64 {
        let dim = 1 + (d as usize % 3);
        let params = family(&entry.kind, dim, 300 + d);
        let x = sample_point(&entry.kind, 0.5, 400 + d);
        let tol = ToleranceConfig::for_dim(dim);
        let rhs = eval_rhs(&entry, &params, &x, 1, &cfg, &tol).unwrap();
        worst = worst.max(rel(&rhs, &hand_coded_contiguous(&params, &entry.kind, &x)));
    }
    let terms = entry.rhs().len();
    Outcome {
        pass: worst < 1e-12 && terms == entry.kind.arity() + 1,
        detail: format!("10 draws, max difference {worst:.2e}, {terms} terms"),
    }
}

fn dual_pairs(cat: &[IdentityEntry]) -> Vec<(IdentityEntry, IdentityEntry)> {
    cat.iter()
        .filter_map(|e| {
            let stem = e.id.strip_suffix(".unit")?;
            let multi = cat.iter().find(|m| m.id == format!("{stem}.multi"))?;
            Some((e.clone(), multi.clone()))
        })
        .collect()
}

fn criterion_dual_forms() -> Outcome {
    let cat = catalog();
    let pairs = dual_pairs(&cat);
    let cfg = SeriesConfig::default();
    let mut worst = 0.0f64;
    let mut worst_id = String::new();
    for (i, (unit, multi)) in pairs.iter().enumerate() {
        for dim in 1..=2 {
            let params = family(&unit.kind, dim, 500 + i as u64 * 7 + dim as u64);
            let tol = ToleranceConfig::for_dim(dim);
            for n in 1..=3u32 {
                let x = sample_point(&unit.kind, 1.0 / (1.0 + n as f64), 600 + i as u64 * 11 + n as u64);
                let a = eval_rhs(unit, &params, &x, n, &cfg, &tol).unwrap();
                let b = eval_rhs(multi, &params, &x, n, &cfg, &tol).unwrap();
                let d = rel(&a, &b);
                if d > worst {
                    worst = d;
                    worst_id = unit.id.clone();
                }
            }
        }
    }
    Outcome {
        pass: worst < 1e-9 && pairs.len() >= 3,
        detail: format!("{} pairs, max difference {worst:.2e} ({worst_id})", pairs.len()),
    }
}

fn criterion_closed_forms() -> Outcome {
    let cfg = SeriesConfig::default();
    let tol = ToleranceConfig::for_dim(1);
    let s = |z: Complex64| ComplexMatrix::from_scalar(z);
    let mut worst = 0.0f64;
    for t in 0..20u64 {
        let f = generate_family(1, 8, &SpectrumSpec::default(), 700 + t).unwrap();
        let v: Vec<Complex64> = f.matrices.iter().map(|m| m.get(0, 0)).collect();
        let x = sample_point(&LauricellaKind::GD(3), 1.0, 800 + t);
        // Rescale so every coordinate satisfies |x_i| ≤ 0.25.
        let big = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let x: Vec<Complex64> = x.iter().map(|z| z * (0.25 / big).min(1.0)).collect();

        let gd = LauricellaKind::GD(3);
        let p = ParameterSet::new(vec![s(v[0])], vec![s(v[1]), s(v[2]), s(v[3])], vec![s(v[0])]);
        let got = evaluate(&gd, &p, &x, &cfg, &tol).unwrap().value.get(0, 0);
        let want: Complex64 = (0..3).map(|i| (1.0 - x[i]).powc(-v[i + 1])).product();
        worst = worst.max((got - want).norm() / want.norm());

        let ga = LauricellaKind::GA(1);
        let p = ParameterSet::new(vec![s(v[4])], vec![s(v[5])], vec![s(v[4])]);
        let got = evaluate(&ga, &p, &x[..1], &cfg, &tol).unwrap().value.get(0, 0);
        let want = (1.0 - x[0]).powc(-v[5]);
        worst = worst.max((got - want).norm() / want.norm());
    }
    Outcome {
        pass: worst < 1e-10,
        detail: format!("20 draws, max relative error {worst:.2e}"),
    }
}

fn criterion_typo_ledger(scalar: &ValidationReport, matrix: &ValidationReport) -> Outcome {
    let cat = catalog();
    let flagged: Vec<&IdentityEntry> = cat.iter().filter(|e| e.typo_candidate).collect();
    let mut problems = Vec::new();
    for required in ["c43eq148", "c43eq150", "c43eq136", "c43eq152"] {
        if !flagged.iter().any(|e| e.equation == required) {
            problems.push(format!("{required} not flagged"));
        }
    }
    for e in &flagged {
        for r in [scalar, matrix] {
            match r.entries.iter().find(|x| x.id == e.id) {
                Some(x) if x.printed_variant_residual.is_none() => problems.push(format!("{}: printed residual missing", e.id)),
                Some(x) if !x.pass => problems.push(format!("{}: corrected form fails", e.id)),
                None => problems.push(format!("{}: not in report", e.id)),
                _ => {}
            }
        }
        if !e.note.as_deref().is_some_and(|n| n.contains(&e.equation)) {
            problems.push(format!("{}: note does not cite its label", e.id));
        }
    }
    let misprints = flagged.iter().filter(|e| e.corrected.is_some()).count();
    let printed_fail = scalar
        .entries
        .iter()
        .filter(|x| {
            cat.iter().any(|e| e.id == x.id && e.corrected.is_some())
                && x.printed_variant_residual.is_some_and(|r| r > 1e-6)
        })
        .count();
    Outcome {
        pass: problems.is_empty(),
        detail: format!(
            "{} flagged, {misprints} with corrections ({printed_fail} printed forms fail at r=1) {}",
            flagged.len(),
            problems.join("; ")
        ),
    }
}

fn criterion_determinism(first: &ValidationReport, config: &SuiteConfig) -> Outcome {
    let again = run_suite("*", config);
    let mut seq = config.clone();
    seq.execution = lauricella::Execution::Sequential;
    let sequential = run_suite("F1*", &seq);
    let parallel = run_suite("F1*", config);
    let same = first.body_sha256() == again.body_sha256();
    let modes = sequential.body_sha256() == parallel.body_sha256();
    Outcome {
        pass: same && modes,
        detail: format!("body sha256 {} repeated={same} across modes={modes}", &first.body_sha256()[..16]),
    }
}

fn main() {
    let mut all = true;

    let t = Instant::now();
    let o = criterion_scalar_oracle();
    all &= report(1, "scalar oracle equivalence", t.elapsed(), &Outcome {
        pass: o.pass && t.elapsed() < Duration::from_secs(30),
        ..o
    });

    let scalar_cfg = SuiteConfig {
        trials: 3,
        dims: vec![1],
        n_max: 2,
        seed: 2024,
        ..SuiteConfig::default()
    };
    let t = Instant::now();
    let scalar = run_suite("*", &scalar_cfg);
    let e = t.elapsed();
    all &= report(2, "full catalog, r = 1", e, &suite_outcome(&scalar, 1e-10, Duration::from_secs(300), e));

    let matrix_cfg = SuiteConfig {
        dims: vec![2, 3],
        ..scalar_cfg.clone()
    };
    let t = Instant::now();
    let matrix = run_suite("*", &matrix_cfg);
    let e = t.elapsed();
    all &= report(3, "full catalog, r = 2 and 3", e, &suite_outcome(&matrix, 1e-8, Duration::from_secs(1200), e));

    let t = Instant::now();
    all &= report(4, "contiguous relation reduction", t.elapsed(), &criterion_contiguous());

    let t = Instant::now();
    let o = criterion_dual_forms();
    all &= report(5, "unit-sum vs multinomial forms", t.elapsed(), &o);

    let t = Instant::now();
    let o = criterion_closed_forms();
    all &= report(6, "closed-form reductions", t.elapsed(), &o);

    let t = Instant::now();
    let o = criterion_typo_ledger(&scalar, &matrix);
    all &= report(7, "typo ledger", t.elapsed(), &o);

    let t = Instant::now();
    let o = criterion_determinism(&scalar, &scalar_cfg);
    all &= report(8, "determinism", t.elapsed(), &o);

    // Keep the printed-form residuals visible next to the summary.
    for r in scalar.entries.iter().filter(|r| r.typo_candidate) {
        println!(
            "  typo candidate {:<22} {:<9} printed {:>9.2e} corrected {:>9.2e}",
            r.id,
            r.equation,
            r.printed_variant_residual.unwrap_or(f64::NAN),
            r.max_residual.unwrap_or(f64::NAN)
        );
    }
    if !all {
        eprintln!("acceptance: at least one criterion failed");
        std::process::exit(1);
    }
}
