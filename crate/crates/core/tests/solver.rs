use std::f64::consts::PI;

use steiner_ps::analysis::{
    confinement_upper_bound, decay_constants, directional_profile_check, equivalence_band,
    inradius_bound_check, tail_report, EquivalencePair,
};
use steiner_ps::geometry::{classify_infinity, AxisClass, InfinitySchedule};
use steiner_ps::grid::{lq_norm, w1p_distance};
use steiner_ps::solver::{box_sweep, confinement_sweep, lambda_p, GridParams, SolverParams};
use steiner_ps::{
    gallery, solve_extremal, solve_linfty, DomainSpec, Error, Exponent, ProblemConfig,
};

fn ball(dim: usize, p: f64, q: f64, radius: f64, h: f64) -> ProblemConfig {
    ProblemConfig::new(
        dim,
        p,
        q,
        DomainSpec::Ball { radius },
        GridParams::new(h, None),
    )
}

#[test]
fn extremals_are_normalized_nonnegative_and_descending() {
    let cfg = ProblemConfig::new(
        2,
        2.0,
        4.0,
        gallery("cross", 2).unwrap(),
        GridParams::new(1.0 / 8.0, Some(6.0)),
    );
    let r = solve_extremal::<f64>(&cfg).unwrap();
    assert!(r.converged);
    assert!((lq_norm(&r.u, 4.0).unwrap() - 1.0).abs() < 1e-12);
    assert!(r.u.is_nonnegative());
    assert!(r.ball_floor > 0.0);
    let energies: Vec<f64> = r.energy_history.iter().map(|e| e.energy).collect();
    assert!(
        energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)),
        "{energies:?}"
    );
}

#[test]
fn infeasible_exponents_are_rejected() {
    let slab = gallery("slab", 2).unwrap();
    let cfg = ProblemConfig::new(
        2,
        2.0,
        Exponent::Infinity,
        slab.clone(),
        GridParams::new(0.25, Some(4.0)),
    );
    assert!(matches!(
        solve_linfty::<f64>(&cfg),
        Err(Error::Infeasible(_))
    ));
    let cfg = ProblemConfig::new(2, 2.0, 2.0, slab, GridParams::new(0.25, Some(4.0)));
    match solve_extremal::<f64>(&cfg) {
        Err(Error::Infeasible(msg)) => assert!(msg.contains("not attained")),
        other => panic!("expected infeasible, got {other:?}"),
    }
    let cfg = ProblemConfig::new(
        3,
        2.0,
        6.0,
        gallery("ball", 3).unwrap(),
        GridParams::new(0.25, None),
    );
    assert!(matches!(
        solve_extremal::<f64>(&cfg),
        Err(Error::Infeasible(_))
    ));
}

#[test]
fn linfty_extremal_is_unique() {
    let solve = |seed| {
        let solver = SolverParams {
            seed,
            perturbation: 0.5,
            ..SolverParams::default()
        };
        let cfg = ball(1, 2.0, 4.0, 1.0, 1.0 / 100.0)
            .with_q(Exponent::Infinity)
            .with_solver(solver);
        solve_linfty::<f64>(&cfg).unwrap()
    };
    let (a, b) = (solve(1), solve(2));
    assert!(w1p_distance(&a.u, &b.u, 2.0).unwrap() < 1e-4);
    assert!((a.lambda - b.lambda).abs() < 1e-9);
}

#[test]
fn confinement_gap_and_upper_bound_on_the_disc() {
    let cfg = ball(2, 2.0, 4.0, 1.0, 1.0 / 16.0);
    let sweep = confinement_sweep::<f64>(&cfg, &[0, 3, 15]).unwrap();
    assert!(sweep.monotone);
    let unconfined = sweep.unconfined.lambda;
    for pt in &sweep.points {
        let gap = pt.lambda - unconfined;
        assert!(
            gap >= -1e-9 && gap <= 1.0 / (pt.n as f64 + 1.0) * 1.0 + 1e-9,
            "n = {}: gap {gap}",
            pt.n
        );
        let bound = confinement_upper_bound(2, 2.0, 4.0, 1.0, pt.n, unconfined);
        assert!(
            pt.lambda <= bound * (1.0 + 1e-9),
            "n = {}: {} > {bound}",
            pt.n,
            pt.lambda
        );
    }
    let floors = sweep
        .points
        .iter()
        .map(|p| p.result.ball_floor)
        .fold(f64::INFINITY, f64::min);
    assert!(floors > 0.0);
}

#[test]
fn box_sweeps() {
    let slab = ProblemConfig::new(
        2,
        2.0,
        4.0,
        gallery("slab", 2).unwrap(),
        GridParams::new(1.0 / 8.0, Some(4.0)),
    );
    let s = box_sweep::<f64>(&slab, &[2.0, 4.0, 8.0], 3).unwrap();
    assert!(s.monotone, "{:?}", s.points);
    assert!(s.extrapolated <= s.points[2].lambda + 1e-9);

    let disc = ball(2, 2.0, 4.0, 1.0, 1.0 / 8.0);
    let s = box_sweep::<f64>(&disc, &[2.0, 3.0], 2).unwrap();
    assert_eq!(s.points[0].lambda, s.points[1].lambda);

    let half = ProblemConfig::new(
        2,
        2.0,
        4.0,
        gallery("half_slab", 2).unwrap(),
        GridParams::new(1.0 / 8.0, Some(4.0)),
    );
    let s = box_sweep::<f64>(&half, &[4.0, 8.0, 16.0], 3).unwrap();
    assert!(s.monotone);
    let full = solve_extremal::<f64>(&slab.clone().with_half_extent(8.0))
        .unwrap()
        .lambda;
    assert!(s.points.iter().all(|p| p.lambda >= full - 1e-9));
    assert!(s.points[2].lambda - full < s.points[0].lambda - full);
}

#[test]
fn equivalence_band_on_scaled_intervals() {
    let pairs: Vec<EquivalencePair> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&r| {
            let cfg = ball(1, 2.0, 4.0, r, r / 200.0);
            EquivalencePair {
                lambda_p: lambda_p::<f64>(&cfg).unwrap().lambda,
                lambda_pq: solve_extremal::<f64>(&cfg).unwrap().lambda,
            }
        })
        .collect();
    let band = equivalence_band(1, 2.0, 4.0, &pairs).unwrap();
    assert_eq!(band.exponent, 0.75);
    assert!(band.max / band.min - 1.0 < 0.02, "{band:?}");
}

#[test]
fn inradius_products() {
    let products: Vec<f64> = [1.0, 2.0]
        .iter()
        .map(|&r| {
            let cfg = ball(2, 2.0, 4.0, r, r / 16.0);
            let res = solve_extremal::<f64>(&cfg).unwrap();
            inradius_bound_check(res.lambda, res.u.mask(), 2.0, Exponent::Finite(4.0)).unwrap()
        })
        .collect();
    assert!(
        (products[1] / products[0] - 1.0).abs() < 0.02,
        "{products:?}"
    );

    for name in ["slab", "cross"] {
        let cfg = ProblemConfig::new(
            2,
            2.0,
            4.0,
            gallery(name, 2).unwrap(),
            GridParams::new(1.0 / 8.0, Some(6.0)),
        );
        let res = solve_extremal::<f64>(&cfg).unwrap();
        let v = inradius_bound_check(res.lambda, res.u.mask(), 2.0, Exponent::Finite(4.0)).unwrap();
        assert!(v > 0.5 && v < 50.0, "{name}: {v}");
    }
}

#[test]
fn tail_of_the_disc_is_trivial() {
    let cfg = ball(2, 2.0, 4.0, 1.0, 1.0 / 16.0);
    let r = solve_extremal::<f64>(&cfg).unwrap();
    let lp = lambda_p::<f64>(&cfg).unwrap().lambda;
    let rep = tail_report(&r.u, &decay_constants(2.0, 4.0, lp, r.lambda).unwrap()).unwrap();
    assert!(rep.recursion_pass);
    assert!(rep
        .tail_mass
        .iter()
        .filter(|x| x.0 >= 1.0)
        .all(|x| x.1 == 0.0));
}

#[test]
fn under_truncated_slab_is_unresolved() {
    let cfg = ProblemConfig::new(
        2,
        2.0,
        4.0,
        gallery("slab", 2).unwrap(),
        GridParams::new(1.0 / 16.0, Some(3.0)),
    );
    let r = solve_extremal::<f64>(&cfg).unwrap();
    let c = decay_constants(2.0, 4.0, PI * PI / 4.0, r.lambda).unwrap();
    assert!(matches!(
        tail_report(&r.u, &c),
        Err(Error::TailUnresolved(_))
    ));
}

#[test]
fn cross_tails_decay_along_both_axes_with_stable_r0() {
    let mut r0s = Vec::new();
    for q in [3.5, 4.0, 4.5] {
        let cfg = ProblemConfig::new(
            2,
            2.0,
            q,
            gallery("cross", 2).unwrap(),
            GridParams::new(1.0 / 8.0, Some(12.0)),
        );
        let r = solve_extremal::<f64>(&cfg).unwrap();
        let lp = lambda_p::<f64>(&cfg).unwrap().lambda;
        let rep = tail_report(&r.u, &decay_constants(2.0, q, lp, r.lambda).unwrap()).unwrap();
        assert!(rep.recursion_pass, "q = {q}: {:?}", rep.recursion_failures);
        assert!(rep.rates.iter().all(|a| a.rate.unwrap() > 0.0));
        assert!(rep.tail_mass.windows(2).all(|w| w[1].1 <= w[0].1));
        assert!(rep.tail_sup.windows(2).all(|w| w[1].1 <= w[0].1));
        assert!(rep.localized_max.is_finite());
        r0s.push(rep.r0);
    }
    let spread = r0s.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - r0s.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(spread < 1.0 + 1e-9, "{r0s:?}");
}

#[test]
fn directional_verdicts() {
    let schedule = InfinitySchedule {
        dim: 2,
        spacing: 1.0 / 16.0,
        extents: vec![8.0, 16.0, 32.0],
    };

    let slab = gallery("slab", 2).unwrap();
    let profile = classify_infinity(&slab, &schedule).unwrap();
    let cfg = ProblemConfig::new(2, 2.0, 4.0, slab, GridParams::new(1.0 / 8.0, Some(12.0)));
    let r = solve_extremal::<f64>(&cfg).unwrap();
    let v = directional_profile_check(&r.u, &profile, 2.0, 4.0).unwrap();
    assert!(matches!(v[0].class, AxisClass::Tubular { .. }) && v[0].pass && v[0].statistic > 0.0);
    assert!(matches!(v[1].class, AxisClass::Bounded { .. }) && v[1].pass);

    let horn = DomainSpec::custom("horn", |x: &[f64]| x[1].abs() < 1.0 / (1.0 + x[0].abs()));
    let profile = classify_infinity(&horn, &schedule).unwrap();
    assert_eq!(profile.axes[0].class, AxisClass::Shrinking);
    let cfg = ProblemConfig::new(2, 2.0, 4.0, horn, GridParams::new(1.0 / 8.0, Some(12.0)));
    let r = solve_extremal::<f64>(&cfg).unwrap();
    let v = directional_profile_check(&r.u, &profile, 2.0, 4.0).unwrap();
    assert!(v[0].pass && v[0].statistic.is_finite(), "{v:?}");
}
