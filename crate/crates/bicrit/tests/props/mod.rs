//! Randomized property checks. Each check runs its own proptest runner so the
//! same suite can be driven from `cargo test` and from the acceptance binary.

use std::sync::OnceLock;

use bicrit::center::{all_centers, center_solve};
use bicrit::lamination::{universe, valid_pairs, Lamination};
use bicrit::levy::{levy_check_configuration, twist_solvable, ClusterConfiguration};
use bicrit::mating::{cluster_data, ray_classes, MatingSpec, Plane};
use bicrit::pullback::{initial_configuration, iterate, BicriticalCoefficients, Point, PullbackRun, DEFAULT_TOL};
use bicrit::spectrum::{compare, equivalent, multiset_distance, spectrum_in_coordinates, spectrum_of, GeneralBicritical, MultiplierSpectrum};
use bicrit::{angle_orbit, Angle};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

pub const CASES: u32 = 1000;

pub type Check = fn(u32) -> Result<(), String>;

/// Every check with the number of cases it runs by default.
pub fn all() -> Vec<(&'static str, Check, u32)> {
    vec![
        ("angle orbits are exact", angle_orbit_exact as Check, CASES),
        ("co-landing is an equivalence relation", co_landing_laws, CASES),
        ("ray classes partition the arm rays", ray_classes_partition, CASES),
        ("stars alternate, delta is odd, relabeling pairs delta", star_laws, CASES),
        ("levy table", levy_table, CASES),
        ("twist arithmetic", twist_arithmetic, CASES),
        ("center solve is stable", center_stability, CASES),
        ("realized maps are forward consistent", forward_consistency, CASES),
        ("pullback contracts geometrically", contraction, CASES),
        ("pinned labels stay pinned", normalization, CASES),
        ("realization is deterministic", determinism, 32),
        ("spectrum is invariant under symmetry", spectrum_invariance, CASES),
        ("equivalence is reflexive and symmetric", equivalence_laws, CASES),
    ]
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

pub fn angle_orbit_exact(cases: u32) -> Result<(), String> {
    let strat = (2u64..=5, 1u64..=1_000_000).prop_flat_map(|(d, den)| (Just(d), Just(den), 0..den));
    run(cases, strat, |(d, den, num)| {
        let t = Angle::new(num, den).unwrap();
        let o = angle_orbit(t, d);
        prop_assert_eq!(o.orbit.len(), o.preperiod + o.period);
        prop_assert_eq!(o.orbit[0], t);
        for k in 0..o.orbit.len() + 2 {
            prop_assert_eq!(o.at(k + 1), o.at(k).mul(d));
            prop_assert!(o.at(k).den() <= den);
        }
        prop_assert_eq!(o.at(o.preperiod + o.period), o.at(o.preperiod));
        // minimality: no proper divisor of the period closes the cycle, and
        // the step before the cycle is not already on it
        let start = o.at(o.preperiod);
        for q in (1..o.period).filter(|q| o.period.is_multiple_of(*q)) {
            prop_assert_ne!(o.at(o.preperiod + q), start);
        }
        if o.preperiod > 0 {
            prop_assert_ne!(o.at(o.preperiod - 1), o.at(o.preperiod - 1 + o.period));
        }
        prop_assert_eq!(angle_orbit(t.neg(), d).period, o.period);
        Ok(())
    })
}

fn laminations() -> &'static Vec<(u64, usize, Lamination)> {
    static L: OnceLock<Vec<(u64, usize, Lamination)>> = OnceLock::new();
    L.get_or_init(|| {
        let mut out = Vec::new();
        for (d, ps) in [(2u64, 2..=6usize), (3, 2..=4), (4, 2..=3), (5, 2..=2)] {
            for p in ps {
                for pair in valid_pairs(d, p) {
                    out.push((d, p, Lamination::new(pair, d).unwrap()));
                }
            }
        }
        out
    })
}

pub fn co_landing_laws(cases: u32) -> Result<(), String> {
    let n = laminations().len();
    run(cases, (0..n, any::<prop::sample::Index>()), |(i, pick)| {
        let (d, p, lam) = &laminations()[i];
        let u = universe(*d, *p);
        let a = u[pick.index(u.len())];
        let row = |x: Angle| -> Result<Vec<bool>, TestCaseError> {
            u.iter()
                .map(|&y| lam.co_lands(x, y).map_err(|e| fail(e.to_string())))
                .collect()
        };
        let ra = row(a)?;
        prop_assert!(lam.co_lands(a, a).unwrap());
        for (j, &b) in u.iter().enumerate() {
            prop_assert_eq!(lam.co_lands(b, a).unwrap(), ra[j], "symmetry {} {}", a, b);
            if ra[j] {
                // transitivity in both directions: a ~ b gives equal classes
                prop_assert_eq!(&row(b)?, &ra, "class of {} differs from class of {}", b, a);
            }
        }
        Ok(())
    })
}

fn specs() -> &'static Vec<MatingSpec> {
    static S: OnceLock<Vec<MatingSpec>> = OnceLock::new();
    S.get_or_init(|| {
        let mut out = Vec::new();
        for (d, p) in [(2u64, 3usize), (2, 4), (2, 5), (3, 2), (3, 3), (4, 2)] {
            let pairs = valid_pairs(d, p);
            for w in &pairs {
                for b in &pairs {
                    for first in [Plane::White, Plane::Black] {
                        if let Ok(s) = MatingSpec::new(d, (w.minus, w.plus), (b.minus, b.plus), first) {
                            out.push(s);
                        }
                    }
                }
            }
        }
        out
    })
}

pub fn ray_classes_partition(cases: u32) -> Result<(), String> {
    run(cases, 0..specs().len(), |i| {
        let spec = &specs()[i];
        let classes = ray_classes(spec).map_err(|e| fail(e.to_string()))?;
        let mut all: Vec<(Plane, Angle)> = Vec::new();
        for c in &classes {
            prop_assert!(!c.members.is_empty());
            all.extend(c.members.iter().copied());
        }
        let n = all.len();
        all.sort();
        all.dedup();
        prop_assert_eq!(all.len(), n, "classes overlap");
        let u = universe(spec.degree, spec.period());
        for plane in [Plane::White, Plane::Black] {
            let lam = Lamination::new(spec.pair(plane), spec.degree).unwrap();
            for j in 0..spec.degree - 1 {
                for k in 1..=spec.period() {
                    for t in lam.arm_rays(k, j, &u) {
                        prop_assert!(all.binary_search(&(plane, t)).is_ok(), "{:?} {} uncovered", plane, t);
                    }
                }
            }
        }
        Ok(())
    })
}

pub fn star_laws(cases: u32) -> Result<(), String> {
    run(cases, 0..specs().len(), |i| {
        let spec = &specs()[i];
        let Ok((data, star)) = cluster_data(spec) else {
            return Ok(());
        };
        let n = star.arms.len();
        prop_assert!(n % 2 == 0);
        for k in 0..n {
            prop_assert_ne!(star.arms[k].plane, star.arms[(k + 1) % n].plane);
        }
        if let Some(delta) = data.delta {
            prop_assert!(delta % 2 == 1, "delta {}", delta);
        }
        let (swapped, _) = cluster_data(&spec.relabeled()).map_err(|e| fail(e.to_string()))?;
        prop_assert_eq!(swapped.rho, data.rho);
        let m = n / 2;
        let shift = data.rho.num * m / data.rho.den;
        match (data.period, data.delta, swapped.delta) {
            (1, Some(a), Some(b)) => prop_assert_eq!(a + b, 2 * m),
            (2, Some(a), Some(b)) => prop_assert_eq!((a + b) % (2 * m), (2 * shift) % (2 * m)),
            (1 | 2, a, b) => prop_assert!(false, "delta missing: {:?} {:?}", a, b),
            _ => {}
        }
        Ok(())
    })
}

pub fn levy_table(cases: u32) -> Result<(), String> {
    let strat = (2u64..=5, 1usize..=4, 1usize..=8)
        .prop_flat_map(|(d, n, m)| (Just(d), Just(n), Just(m), 0..n, 0..n));
    run(cases, strat, |(degree, period, arms, c1, c2)| {
        let cfg = ClusterConfiguration {
            degree,
            period,
            arms_per_orbit: arms,
            first_cluster: c1,
            second_cluster: c2,
        };
        let r = levy_check_configuration(&cfg).unwrap();
        prop_assert_eq!(r.obstructed, period == 2 && c1 == c2);
        prop_assert_eq!(r.witness.is_some(), r.obstructed);
        Ok(())
    })
}

pub fn twist_arithmetic(cases: u32) -> Result<(), String> {
    run(cases, (2u64..=10, -1000i64..=1000), |(d, m)| {
        let t = twist_solvable(d, m);
        let unit = d as i64 - 1;
        prop_assert_eq!(t.solvable, m % unit == 0);
        if let Some(k) = t.k {
            prop_assert_eq!(k * unit, m);
        }
        prop_assert_eq!(t.k.is_some(), t.solvable);
        Ok(())
    })
}

fn centers() -> &'static Vec<(u64, usize, C64)> {
    static C: OnceLock<Vec<(u64, usize, C64)>> = OnceLock::new();
    C.get_or_init(|| {
        let mut out = Vec::new();
        for (d, p) in [(2u64, 2usize), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4), (4, 2)] {
            for c in all_centers(d, p).unwrap() {
                out.push((d, p, c));
            }
        }
        out
    })
}

pub fn center_stability(cases: u32) -> Result<(), String> {
    let strat = (0..centers().len(), -1.0f64..1.0, -1.0f64..1.0);
    run(cases, strat, |(i, x, y)| {
        let (d, p, c) = centers()[i];
        let seed = c + C64::new(x, y) * 1e-3 * c.norm().max(1e-3);
        let (found, trace) = center_solve(d, p, seed).map_err(|e| fail(e.to_string()))?;
        prop_assert!((found.parameter - c).norm() < 1e-10, "{} vs {}", found.parameter, c);
        let h = &trace.history;
        let tail = &h[h.len().saturating_sub(5)..];
        prop_assert!(tail.windows(2).all(|w| w[1] < w[0]), "{:?}", tail);
        Ok(())
    })
}

/// Realized matings of the smaller pools, with the tolerance they ran at.
pub fn realized() -> &'static Vec<(MatingSpec, PullbackRun)> {
    static R: OnceLock<Vec<(MatingSpec, PullbackRun)>> = OnceLock::new();
    R.get_or_init(|| {
        let mut out = Vec::new();
        for (d, p) in [(2u64, 3usize), (2, 4), (3, 2), (3, 3)] {
            let pairs = valid_pairs(d, p);
            for w in &pairs {
                for b in &pairs {
                    let Ok(spec) = MatingSpec::new(d, (w.minus, w.plus), (b.minus, b.plus), Plane::White) else {
                        continue;
                    };
                    let Ok(cfg) = initial_configuration(&spec) else {
                        continue;
                    };
                    let run = iterate(cfg, DEFAULT_TOL, 1000).unwrap();
                    if run.trace.converged {
                        out.push((spec, run));
                    }
                }
            }
        }
        for (w, b) in [(["11/80", "19/80"], ["22/80", "24/80"]), (["21/80", "29/80"], ["71/80", "73/80"])] {
            let spec = MatingSpec::parse(3, w, b, Plane::White).unwrap();
            let run = iterate(initial_configuration(&spec).unwrap(), DEFAULT_TOL, 1000).unwrap();
            out.push((spec, run));
        }
        out
    })
}

pub fn forward_consistency(cases: u32) -> Result<(), String> {
    run(cases, 0..realized().len(), |i| {
        let (spec, run) = &realized()[i];
        let f = run.coefficients.ok_or_else(|| fail("no coefficients".into()))?;
        let cfg = &run.configuration;
        for (k, &z) in cfg.positions.iter().enumerate() {
            let err = f.eval(z).chordal(cfg.positions[cfg.image[k]]);
            prop_assert!(err <= 10.0 * DEFAULT_TOL, "{:?} label {} error {:e}", spec, cfg.labels[k], err);
        }
        Ok(())
    })
}

/// Geometric mean of the per-iteration ratios of the maximal move over the
/// final ten iterations.
pub fn contraction_rate(max_move: &[f64]) -> f64 {
    let n = max_move.len();
    (max_move[n - 1] / max_move[n - 11]).powf(0.1)
}

pub fn contraction(cases: u32) -> Result<(), String> {
    run(cases, 0..realized().len(), |i| {
        let (spec, run) = &realized()[i];
        prop_assert!(run.trace.max_move.len() > 10);
        let rate = contraction_rate(&run.trace.max_move);
        prop_assert!(rate < 0.95, "{:?} rate {}", spec, rate);
        Ok(())
    })
}

pub fn normalization(cases: u32) -> Result<(), String> {
    run(cases, 0..realized().len(), |i| {
        let cfg = &realized()[i].1.configuration;
        let p = cfg.period;
        for pos in cfg.history.iter().chain(std::iter::once(&cfg.positions)) {
            prop_assert_eq!(pos[0], Point::Finite(C64::new(0.0, 0.0)));
            prop_assert_eq!(pos[1], Point::Finite(C64::new(1.0, 0.0)));
            prop_assert_eq!(pos[p], Point::Infinity);
        }
        Ok(())
    })
}

pub fn determinism(cases: u32) -> Result<(), String> {
    run(cases, 0..realized().len(), |i| {
        let (spec, first) = &realized()[i];
        let again = iterate(initial_configuration(spec).unwrap(), DEFAULT_TOL, 1000).unwrap();
        prop_assert_eq!(&again, first);
        Ok(())
    })
}

fn coefficients() -> impl Strategy<Value = BicriticalCoefficients> {
    (2u64..=4, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)
        .prop_filter("A and B too close", |(_, a, b, c, e)| {
            (C64::new(*a, *b) - C64::new(*c, *e)).norm() > 0.1
        })
        .prop_map(|(d, a, b, c, e)| BicriticalCoefficients::new(C64::new(a, b), C64::new(c, e), d).unwrap())
}

fn spectrum_gap(s: &MultiplierSpectrum, t: &MultiplierSpectrum) -> f64 {
    let scale = s
        .fixed
        .iter()
        .chain(&s.period_two)
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    multiset_distance(&s.fixed, &t.fixed).max(multiset_distance(&s.period_two, &t.period_two)) / scale
}

pub fn spectrum_invariance(cases: u32) -> Result<(), String> {
    run(cases, (coefficients(), 0u32..16, 0.2f64..5.0, 0.0f64..1.0), |(f, j, r, phase)| {
        let g = GeneralBicritical::from(f);
        let base = spectrum_of(&g).map_err(|e| fail(e.to_string()))?;
        prop_assert_eq!(base.fixed.len(), f.degree as usize + 1);
        let d = f.degree;
        let root = C64::from_polar(1.0, std::f64::consts::TAU * (j as u64 % (d - 1)) as f64 / (d - 1) as f64);
        let general = C64::from_polar(r, std::f64::consts::TAU * phase);
        for conj in [g.scaled(root), g.scaled(general), g.inverted(), g.scaled(general).inverted()] {
            let s = spectrum_of(&conj).map_err(|e| fail(e.to_string()))?;
            let gap = spectrum_gap(&base, &s);
            prop_assert!(gap < 1e-6, "{:?} gap {:e}", f, gap);
            // without renormalizing, where the coordinates are reasonably scaled
            let sizes = [conj.a, conj.b, conj.c, conj.e].map(|z| z.norm());
            if sizes.iter().all(|&r| (0.1..10.0).contains(&r)) {
                let s = spectrum_in_coordinates(&conj).map_err(|e| fail(e.to_string()))?;
                let gap = spectrum_gap(&base, &s);
                prop_assert!(gap < 1e-6, "{:?} raw gap {:e}", conj, gap);
            }
        }
        Ok(())
    })
}

pub fn equivalence_laws(cases: u32) -> Result<(), String> {
    let strat = coefficients().prop_flat_map(|f| (Just(f), coefficients(), 0.2f64..5.0, 0.0f64..1.0));
    run(cases, strat, |(f, g, r, phase)| {
        let g = BicriticalCoefficients::new(g.a, g.b, f.degree).unwrap();
        prop_assert!(equivalent(&f, &f, 1e-6));
        let fg = compare(&f, &g, 1e-6).unwrap();
        let gf = compare(&g, &f, 1e-6).unwrap();
        prop_assert_eq!(fg.equivalent, gf.equivalent);
        prop_assert_eq!(fg.spectrum_distance, gf.spectrum_distance);
        // a triple related by conjugation and renormalization
        let back = |h: GeneralBicritical| {
            let n = h.normalized().unwrap();
            BicriticalCoefficients::new(n.a, n.c, f.degree).unwrap()
        };
        let lambda = C64::from_polar(r, std::f64::consts::TAU * phase);
        let base = GeneralBicritical::from(f);
        let h1 = back(base.scaled(lambda));
        let h2 = back(GeneralBicritical::from(h1).scaled(lambda.inv() * 0.5));
        prop_assert!(equivalent(&f, &h1, 1e-6) && equivalent(&h1, &h2, 1e-6));
        prop_assert!(equivalent(&f, &h2, 1e-6));
        Ok(())
    })
}
