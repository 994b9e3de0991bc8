use critline::special::{xi, xi_logderiv};
use critline::zeros::enumerate_first;
use critline::{
    enumerate_zeros, verify_range, CompletedZeta, ContourCounter, EnumeratorConfig, EvalAccuracy,
    Verdict,
};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn counter() -> ContourCounter<CompletedZeta> {
    ContourCounter::with_defaults(CompletedZeta::default())
}

#[test]
fn xi_symmetries_on_random_strip_points() {
    let acc = EvalAccuracy::default();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..100 {
        let s = Complex64::new(rng.gen_range(0.0..1.0), rng.gen_range(-50.0..50.0));
        let v = xi(s, &acc).unwrap();
        let reflected = xi(Complex64::new(1.0, 0.0) - s, &acc).unwrap();
        let conj = xi(s.conj(), &acc).unwrap();
        assert!((v - reflected).norm() <= 1e-9, "s={s}");
        assert!((conj - v.conj()).norm() <= 1e-9, "s={s}");
    }
}

#[test]
fn logderiv_matches_finite_differences_away_from_zeros() {
    let acc = EvalAccuracy::default();
    let zeros = enumerate_zeros(60.0, &EnumeratorConfig::default()).unwrap();
    let mut rng = StdRng::seed_from_u64(7);
    let h = 1e-5;
    let mut checked = 0;
    while checked < 60 {
        let s = Complex64::new(rng.gen_range(-0.5..1.5), rng.gen_range(2.0..55.0));
        let near = zeros
            .iter()
            .any(|z| (Complex64::new(0.5, z.ordinate) - s).norm() < 0.1);
        if near {
            continue;
        }
        let d = xi_logderiv(s, &acc).unwrap();
        let hp = Complex64::new(h, 0.0);
        // scale out the e^{−πt/4} decay so the difference quotient stays well conditioned
        let scale = Complex64::new(std::f64::consts::PI * s.im / 4.0, 0.0).exp();
        let fp = xi(s + hp, &acc).unwrap() * scale;
        let fm = xi(s - hp, &acc).unwrap() * scale;
        let f0 = xi(s, &acc).unwrap() * scale;
        let fd = (fp - fm) / (2.0 * h) / f0;
        assert!(
            (d - fd).norm() <= 1e-6 * d.norm().max(1.0),
            "s={s}: {d} vs {fd}"
        );
        checked += 1;
    }
}

#[test]
fn rectangle_counts_add_up_to_strip_counts() {
    let c = counter();
    let cfg = EnumeratorConfig::default();
    let zeros = enumerate_first(51, &cfg).unwrap();
    let run = verify_range(&c, &zeros, 50).unwrap();
    assert_eq!(run.verdict, Verdict::VerifiedInRange);
    for n_top in [10usize, 30, 50] {
        let sum: u32 = run.records[..n_top].iter().map(|r| r.m.unwrap()).sum();
        let top = run.records[n_top - 1].delta_hi;
        let bottom = run.records[0].delta_lo;
        let diff = c.count_strip(top).unwrap().count() - c.count_strip(bottom).unwrap().count();
        assert_eq!(sum as i64, diff, "N = {n_top}");
        let l_sum: u32 = run.records[..n_top].iter().map(|r| r.l.unwrap()).sum();
        assert_eq!(l_sum as i64, diff, "verdict soundness at N = {n_top}");
    }
}

#[test]
fn enumeration_prefixes_agree() {
    let cfg = EnumeratorConfig::default();
    let short = enumerate_zeros(60.0, &cfg).unwrap();
    let long = enumerate_zeros(120.0, &cfg).unwrap();
    assert!(long.len() > short.len());
    for (a, b) in short.iter().zip(&long) {
        assert_eq!(a.index, b.index);
        assert!((a.ordinate - b.ordinate).abs() <= cfg.tol);
    }
    for w in long.windows(2) {
        assert!(w[1].ordinate - w[0].ordinate > 10.0 * cfg.tol);
    }
}
