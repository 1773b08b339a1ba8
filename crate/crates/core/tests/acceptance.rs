//! End-to-end acceptance checks, one PASS/FAIL line each.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;

use ratplanes::bounds::{
    binomial, effective_guarantee, expected_line_count, gl_interval, hockey_stick_lhs, min_admissible_q,
    prop2_holds,
};
use ratplanes::census::{run_census, CensusConfig, CensusReport};
use ratplanes::fano::{
    count_lines, count_lines_pointpair_oracle, find_point, lift_plane, plane_contained, point_count, LiftStatus,
    LineTable,
};
use ratplanes::formring::{parse_form, Form};
use ratplanes::gf::{Field, Fq};
use ratplanes::matrix::Matrix;
use ratplanes::projgeom::{gaussian_binomial, Plane, PlaneEnumerator};
use ratplanes::rng::DeterministicRng;
use ratplanes::smoothness::{is_smooth, singular_point_search};

type Outcome = Result<String, String>;

fn field(q: u32) -> Field {
    Field::parse(&q.to_string()).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_example() -> Outcome {
    let f = parse_form(ratplanes::GOLDEN_CUBIC, &field(7), 5).map_err(|e| e.to_string())?;
    let smooth = is_smooth(&f).map_err(|e| e.to_string())?;
    ensure(smooth, || "golden cubic judged singular".into())?;
    let t = Instant::now();
    let direct = count_lines(&f, false).count;
    let direct_secs = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let table = LineTable::new(4, 3, f.field()).map_err(|e| e.to_string())?;
    let tabled = table.count(&f, false).map_err(|e| e.to_string())?.count;
    let table_secs = t.elapsed().as_secs_f64();
    ensure(direct == 8 && tabled == 8, || format!("line counts {direct} (direct), {tabled} (table), expected 8"))?;
    Ok(format!("smooth, 8 lines (direct {direct_secs:.2}s, table {table_secs:.2}s)"))
}

fn enumeration_completeness() -> Outcome {
    let mut parts = Vec::new();
    for q in [2u32, 3, 5, 7] {
        let streamed = PlaneEnumerator::new(1, 4, &field(q)).iter().count() as u64;
        // independent count: ordered pairs of independent vectors over |GL_2|
        let qq = q as u64;
        let pairs = (qq.pow(5) - 1) * (qq.pow(5) - qq);
        let gl2 = (qq * qq - 1) * (qq * qq - qq);
        let expected = pairs / gl2;
        ensure(BigUint::from(expected) == gaussian_binomial(5, 2, qq), || format!("q={q}: formula mismatch"))?;
        ensure(streamed == expected, || format!("q={q}: streamed {streamed}, expected {expected}"))?;
        parts.push(format!("{q}:{streamed}"));
    }
    Ok(parts.join(" "))
}

fn oracle_equivalence() -> Outcome {
    let mut parts = Vec::new();
    for q in [2u32, 3] {
        let fq = field(q);
        let mut rng = DeterministicRng::new(0xACCE_5500 + q as u64);
        let mut total = 0;
        for i in 0..50 {
            let f = Form::random(&fq, 5, 3, &mut rng);
            let a = count_lines(&f, false).count;
            let b = count_lines_pointpair_oracle(&f);
            ensure(a == b, || format!("q={q} sample {i}: count_lines {a}, oracle {b}"))?;
            total += a;
        }
        parts.push(format!("q={q}: 50 agree (total {total} lines)"));
    }
    Ok(parts.join("; "))
}

fn census(q: u32, samples: u64, smooth_only: bool, seed: u64) -> Result<CensusReport, String> {
    let mut cfg = CensusConfig::new(&field(q), samples, seed);
    cfg.smooth_only = smooth_only;
    run_census(&cfg).map_err(|e| e.to_string())
}

fn mean_f64(r: &CensusReport) -> f64 {
    r.stats.mean.to_f64().unwrap()
}

/// Runs a census check, retrying once with a fresh seed.
fn with_retry(check: impl Fn(u64) -> Outcome) -> Outcome {
    match check(20_240_601) {
        Ok(s) => Ok(s),
        Err(first) => check(777_001).map(|s| format!("{s} (after retry; first seed: {first})")),
    }
}

fn census_tables() -> Outcome {
    let all = with_retry(|seed| {
        let r = census(2, 10_000, false, seed)?;
        let (mean, sd) = (mean_f64(&r), r.stats.sd_f64());
        ensure((mean - 9.697).abs() <= 0.20 && (sd - 5.835).abs() <= 0.25 && r.stats.min == 0, || {
            format!("q=2 mean {mean:.4} sd {sd:.4} min {}", r.stats.min)
        })?;
        Ok(format!("q=2 mean {} sd {} min 0", r.stats.mean_decimal(), r.stats.sd_decimal()))
    })?;
    let smooth = with_retry(|seed| {
        let r = census(2, 10_000, true, seed)?;
        let mean = mean_f64(&r);
        ensure((mean - 6.9778).abs() <= 0.15, || format!("q=2 smooth mean {mean:.4}"))?;
        Ok(format!("q=2 smooth mean {} ({} rejected)", r.stats.mean_decimal(), r.rejected))
    })?;
    let three = with_retry(|seed| {
        let r = census(3, 1_000, false, seed)?;
        let mean = mean_f64(&r);
        ensure((mean - 14.966).abs() <= 0.9, || format!("q=3 mean {mean:.4}"))?;
        Ok(format!("q=3 mean {}", r.stats.mean_decimal()))
    })?;
    Ok(format!("{all}; {smooth}; {three}"))
}

fn formula_consistency() -> Outcome {
    let expected = expected_line_count(2);
    // 4 + 2 + 2 + 1 + 1/2 + 1/8 + 1/16
    ensure(expected == BigRational::new(BigInt::from(155), BigInt::from(16)), || format!("expected {expected}"))?;
    with_retry(|seed| {
        let r = census(2, 10_000, false, seed)?;
        let dev = (&r.stats.mean - &expected).to_f64().unwrap();
        ensure(dev.abs() <= 0.20, || format!("deviation {dev:.4}"))?;
        Ok(format!("mean {} vs 9.6875, deviation {dev:+.4}", r.stats.mean_decimal()))
    })
}

fn contains_plane(outer: &Plane, inner: &Plane, f: &Field) -> bool {
    // rank of the stacked bases equals the rank of the outer one
    outer.matrix().vstack(inner.matrix()).rank(f) == outer.matrix().rank(f)
}

fn constructive_lifting() -> Outcome {
    let mut parts = Vec::new();
    for (q, trials) in [(2u32, 100), (3, 50)] {
        let fq = field(q);
        let mut rng = DeterministicRng::new(0x11F7 + q as u64);
        for i in 0..trials {
            let f = Form::random(&fq, 8, 3, &mut rng);
            let p = find_point(&f).ok_or_else(|| format!("q={q} sample {i}: no point"))?;
            let pt = Plane::from_point(&p);
            let out = lift_plane(&f, &pt, 1).map_err(|e| e.to_string())?;
            ensure(out.status == LiftStatus::Found, || format!("q={q} sample {i}: {:?}", out.status))?;
            let line = out.plane.unwrap();
            // containment re-derived by evaluating the restriction at every point of P^1 over F_{q^2}
            let ext = Field::new(q, 2).unwrap();
            let emb = fq.embedding_into(&ext).unwrap();
            let g = f.map_field(&ext, &emb);
            let rows: Vec<Vec<Fq>> = line
                .matrix()
                .row_vecs()
                .into_iter()
                .map(|r| r.iter().map(|c| emb[c.idx() as usize]).collect())
                .collect();
            let lifted = Matrix::from_rows(rows);
            let on = ratplanes::projgeom::enumerate_points(1, &ext)
                .all(|st| g.evaluate(&lifted.apply_row(st.coords(), &ext)).is_zero());
            ensure(on && plane_contained(&f, &line).unwrap(), || format!("q={q} sample {i}: line not on X"))?;
            ensure(contains_plane(&line, &pt, &fq), || format!("q={q} sample {i}: line misses the point"))?;
        }
        parts.push(format!("q={q}: {trials}/{trials} Found"));
    }
    Ok(parts.join("; ") + "; 0 GuaranteeViolated")
}

fn hockey_stick() -> Outcome {
    for d in 1..=10u32 {
        for r in 1..=5u32 {
            let mut lhs = BigUint::from(0u32);
            for j in 0..d as u64 {
                lhs += binomial(j + r as u64 - 1, r as u64 - 1) * BigUint::from(d as u64 - j);
            }
            ensure(hockey_stick_lhs(d, r) == lhs, || format!("d={d} r={r}: sum mismatch"))?;
            ensure(lhs == binomial((d + r) as u64, (r + 1) as u64), || format!("d={d} r={r}: identity fails"))?;
        }
    }
    Ok("d<=10, r<=5".into())
}

/// `floor(sqrt(x) * 2^200)`.
fn fixed_sqrt(x: &BigUint) -> BigUint {
    (x << 400u32).sqrt()
}

fn effective_bounds() -> Outcome {
    let mut rng = DeterministicRng::new(0xB0B);
    let mut decided = 0;
    let mut skipped = 0;
    while decided < 1000 {
        let n = 1 + rng.below(10) as u32;
        let d = 2 + rng.below(5) as u32;
        let a = BigUint::from(((d - 1) * (d - 2)) as u64);
        let b = BigUint::from(18u32) * BigUint::from(d + 3).pow(n + 1) - 1u32;
        let q = match rng.below(3) {
            0 => BigUint::from(2 + rng.below(1 << 48)),
            1 => &b + BigUint::from(rng.below(1 << 24)),
            _ => (&b * BigUint::from(1 + rng.below(4))) + BigUint::from(rng.below(1 << 16)),
        };
        let lhs = fixed_sqrt(&q) * 2u32;
        let rhs = (&a << 200u32) + fixed_sqrt(&(&a * &a + &b * 4u32));
        let gap = if lhs > rhs { &lhs - &rhs } else { &rhs - &lhs };
        if gap <= BigUint::from(8u32) {
            skipped += 1;
            continue;
        }
        decided += 1;
        let float_says = prop2_holds(n, d, 1) && lhs > rhs;
        ensure(effective_guarantee(&q, n, d, 1) == float_says, || format!("disagree at q={q} n={n} d={d}"))?;
    }
    let min = min_admissible_q(4, 2, 1).map_err(|e| e.to_string())?;
    // A = 0 for quadrics, so the threshold is q > 18 * 5^5 - 1
    ensure(min == BigUint::from(18u64 * 5u64.pow(5)), || format!("min_admissible_q(4,2,1) = {min}"))?;
    for (n, d) in [(4u32, 2u32), (7, 3), (11, 4), (9, 3)] {
        let Ok(m) = min_admissible_q(n, d, 1) else { continue };
        ensure(effective_guarantee(&m, n, d, 1) && !effective_guarantee(&(&m - 1u32), n, d, 1), || {
            format!("bracketing fails at n={n} d={d}")
        })?;
    }
    Ok(format!("1000 triples agree ({skipped} too close to call), min_admissible_q(4,2,1) = 56250, bracketing ok"))
}

fn singular_at_e0(fq: &Field, rng: &mut DeterministicRng) -> Form {
    loop {
        let f = Form::random(fq, 5, 3, rng);
        let terms: Vec<_> = f.terms().iter().copied().filter(|(m, _)| m.exp(0) <= 1).collect();
        if !terms.is_empty() {
            return Form::from_terms(fq, 5, 3, terms).unwrap();
        }
    }
}

fn smoothness_checks() -> Outcome {
    let fermat = "x0^3 + x1^3 + x2^3 + x3^3 + x4^3";
    let s7 = is_smooth(&parse_form(fermat, &field(7), 5).unwrap()).map_err(|e| e.to_string())?;
    let s3 = is_smooth(&parse_form(fermat, &field(3), 5).unwrap()).map_err(|e| e.to_string())?;
    ensure(s7 && !s3, || format!("Fermat cubic: smooth over F_7 = {s7}, over F_3 = {s3}"))?;
    let mut rng = DeterministicRng::new(0x5300);
    for i in 0..20 {
        let fq = field([2, 3, 5, 7][i % 4]);
        let f = singular_at_e0(&fq, &mut rng);
        let smooth = is_smooth(&f).map_err(|e| e.to_string())?;
        let w = singular_point_search(&f, 1).map_err(|e| e.to_string())?;
        ensure(!smooth && w.as_ref().is_some_and(|w| w.k == 1), || format!("constructed form {i} not flagged: {f}"))?;
    }
    let f3 = field(3);
    let mut both = [0; 2];
    for i in 0..20 {
        let f = if i % 2 == 0 { Form::random(&f3, 5, 3, &mut rng) } else { singular_at_e0(&f3, &mut rng) };
        let b = loop {
            let data = (0..25).map(|_| Fq::from_idx(rng.below(3) as u32)).collect();
            let m = Matrix::from_flat(5, 5, data);
            if m.is_invertible(&f3) {
                break m;
            }
        };
        let g = f.substitute_linear(&b).unwrap();
        let (sf, sg) = (is_smooth(&f).map_err(|e| e.to_string())?, is_smooth(&g).map_err(|e| e.to_string())?);
        ensure(sf == sg, || format!("coordinate change {i} changed smoothness"))?;
        both[sf as usize] += 1;
    }
    Ok(format!(
        "Fermat smooth/F_7 singular/F_3; 20 constructed singular with k=1 witness; 20 coordinate changes invariant ({} smooth, {} singular)",
        both[1], both[0]
    ))
}

fn point_count_window() -> Outcome {
    let f7 = field(7);
    let window = gl_interval(7, 4, 3).map_err(|e| e.to_string())?;
    let mut rng = DeterministicRng::new(0x6177);
    let mut found = Vec::new();
    while found.len() < 10 {
        let f = Form::random(&f7, 5, 3, &mut rng);
        if !is_smooth(&f).map_err(|e| e.to_string())? {
            continue;
        }
        let c = point_count(&f);
        ensure(window.contains(&BigUint::from(c)), || format!("count {c} outside window"))?;
        found.push(c.to_string());
    }
    let (lo, hi) = window.bounds_f64();
    Ok(format!("counts [{}] within [{lo:.0}, {hi:.0}]", found.join(", ")))
}

type Check = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let checks: [Check; 10] = [
        ("golden cubic: smooth with exactly 8 lines", golden_example),
        ("line enumeration completeness in P^4", enumeration_completeness),
        ("count_lines equals point-pair oracle", oracle_equivalence),
        ("census statistics", census_tables),
        ("census mean vs expected line count", formula_consistency),
        ("constructive lifting in P^7", constructive_lifting),
        ("hockey-stick identity", hockey_stick),
        ("effective bounds", effective_bounds),
        ("smoothness criteria", smoothness_checks),
        ("point-count window", point_count_window),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let t = Instant::now();
        let res = check();
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS {name} [{secs:.1}s]: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} [{secs:.1}s]: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
