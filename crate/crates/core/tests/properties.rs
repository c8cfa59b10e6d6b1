use invariant_ode::geometry::{cross_ratio_values, i1c, lattice_invariant, schwarzian};
use invariant_ode::harness::emit::{from_json, to_json, write_csv, CSV_HEADER};
use invariant_ode::harness::properties::{check_schwarz_equivariance, check_second_order_equivariance, check_third_order_equivariance};
use invariant_ode::harness::{emit, run_property_suite, solve, Format, InitialData, ProblemSpec, SchemeKind, Settings};
use invariant_ode::invariant_schemes::SecondOrderState;
use invariant_ode::oracles::{Branch, SchwarzExact, SecondOrderExact};
use invariant_ode::{GroupElement1D, GroupElement2D, JetPoint, Ode, Point2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

// |t3| <= 0.15 keeps 1 - t3*y positive for every point the strategies below produce
prop_compose! {
    fn group_2d()(eps1 in -1.0..1.0f64, log_lam in -1.0..1.0f64, t3 in -0.15..0.15f64) -> GroupElement2D {
        GroupElement2D::new(eps1, log_lam.exp(), t3).unwrap()
    }
}

prop_compose! {
    fn mobius()(a in 0.5..2.0f64, b in -1.0..1.0f64, c in -0.3..0.3f64, d in 0.5..2.0f64) -> GroupElement1D {
        GroupElement1D::new(a, b, c, d).unwrap()
    }
}

proptest! {
    #[test]
    fn lattice_invariant_is_invariant(
        g in group_2d(),
        xa in 0.2..2.0f64, dx in 0.01..1.0f64,
        ya in -1.0..1.0f64, yb in -1.0..1.0f64,
    ) {
        let (a, b) = (Point2::new(xa, ya), Point2::new(xa + dx, yb));
        let before = lattice_invariant(a, b).unwrap();
        let after = lattice_invariant(g.apply(a).unwrap(), g.apply(b).unwrap()).unwrap();
        prop_assert!(close(before, after, 1e-12), "{before} vs {after}");
    }

    #[test]
    fn cross_ratio_is_mobius_invariant(
        g in mobius(),
        y0 in -1.0..1.0f64, gaps in prop::array::uniform3(0.05..1.0f64),
    ) {
        let y = [y0, y0 + gaps[0], y0 + gaps[0] + gaps[1], y0 + gaps[0] + gaps[1] + gaps[2]];
        let gy = y.map(|v| g.apply(v).unwrap());
        let (a, b) = (cross_ratio_values(y).unwrap(), cross_ratio_values(gy).unwrap());
        prop_assert!(close(a, b, 1e-10), "{a} vs {b}");
    }

    #[test]
    fn second_order_step_commutes_with_the_group(
        g in group_2d(),
        x0 in 0.5..1.5f64, dx in 0.005..0.05f64,
        y0 in -0.5..0.5f64, slope in 0.3..2.0f64,
        gamma in 0.5..3.0f64,
    ) {
        let (p0, p1) = (Point2::new(x0, y0), Point2::new(x0 + dx, y0 + slope * dx));
        let s = SecondOrderState::new(p0, p1, gamma).unwrap();
        let (q0, q1) = (g.apply(p0).unwrap(), g.apply(p1).unwrap());
        prop_assume!(q1.x > q0.x);
        let t = SecondOrderState::new(q0, q1, gamma).unwrap();
        let (Ok(next), Ok(next_t)) = (s.step(), t.step()) else {
            return Err(TestCaseError::reject("step hit the fold"));
        };
        let mapped = g.apply(next.cur).unwrap();
        prop_assert!(close(mapped.x, next_t.cur.x, 1e-10) && close(mapped.y, next_t.cur.y, 1e-10),
            "{mapped:?} vs {:?}", next_t.cur);
    }

    #[test]
    fn closed_form_has_first_invariant_gamma(
        gamma in 0.5..200.0f64, c in 0.1..10.0f64, y_b in -5.0..5.0f64,
        frac in 0.05..0.95f64, plus in any::<bool>(),
    ) {
        let branch = if plus { Branch::Plus } else { Branch::Minus };
        let e = SecondOrderExact::new(gamma, c, y_b, branch).unwrap();
        let x = frac * e.singularity_x().unwrap();
        let p = JetPoint::new(x, e.eval(x).unwrap(), e.derivative(x).unwrap(), e.second_derivative(x).unwrap(), 0.0);
        prop_assert!(close(i1c(&p).unwrap(), gamma, 1e-10));
    }

    #[test]
    fn schwarz_closed_form_has_constant_schwarzian(
        f in -4.0..4.0f64, y0 in -1.0..1.0f64, yp0 in 0.5..2.0f64, ypp0 in -1.0..1.0f64, t in 0.0..0.3f64,
    ) {
        let e = SchwarzExact::fit(f, 0.0, y0, yp0, ypp0).unwrap();
        // derivatives of the closed form by central differences
        let d = 1e-3;
        let v: Vec<f64> = (-2..=2).map(|k| e.eval(t + k as f64 * d).unwrap()).collect();
        let y1 = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * d);
        let y2 = (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * d * d);
        let y3 = (-v[0] + 2.0 * v[1] - 2.0 * v[3] + v[4]) / (2.0 * d * d * d);
        let s = schwarzian(&JetPoint::new(t, v[2], y1, y2, y3)).unwrap();
        prop_assert!((s - f).abs() < 1e-3, "S = {s}, F = {f}");
    }

    #[test]
    fn equivariance_holds_for_any_seed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in [
            check_second_order_equivariance(&mut rng, 10),
            check_third_order_equivariance(&mut rng, 10),
            check_schwarz_equivariance(&mut rng, 10),
        ] {
            prop_assert!(c.passed, "{}: {:e}", c.name, c.max_violation);
        }
    }
}

#[test]
fn property_suite_passes_for_seeds_0_to_9() {
    for seed in 0..10 {
        let p = run_property_suite(seed).properties.unwrap();
        assert!(p.all_passed, "seed {seed}: {:?}", p.checks);
    }
}

fn fig2_spec() -> ProblemSpec {
    Settings::preset("fig2").unwrap().problem().unwrap()
}

#[test]
fn solve_is_deterministic() {
    for spec in [fig2_spec(), Settings::preset("fig1").unwrap().problem().unwrap()] {
        assert_eq!(solve(&spec).unwrap(), solve(&spec).unwrap());
    }
}

#[test]
fn reports_round_trip_through_json() {
    let r = solve(&fig2_spec()).unwrap();
    let text = to_json(&r).unwrap();
    assert_eq!(to_json(&from_json(&text).unwrap()).unwrap(), text);
    let p = run_property_suite(3);
    assert_eq!(from_json(&to_json(&p).unwrap()).unwrap().properties, p.properties);
}

#[test]
fn csv_has_one_row_per_sample() {
    let r = solve(&fig2_spec()).unwrap();
    let run = &r.runs[0];
    let mut buf = Vec::new();
    write_csv(&mut buf, Some(run)).unwrap();
    let mut rd = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), run.trajectory.samples.len());
    let x: f64 = rows.last().unwrap()[1].parse().unwrap();
    assert_eq!(x, run.trajectory.samples.last().unwrap().x);
}

#[test]
fn emit_writes_one_csv_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let ic = InitialData::new(0.1, 2.0 * 0.9f64.sqrt(), -1.0 / 0.9f64.sqrt(), None);
    let spec = ProblemSpec::new(Ode::SecondOrder { gamma: 1.0 }, ic, SchemeKind::InvariantStrict, 0.02, 0.5);
    let rep = invariant_ode::harness::run_convergence(&spec, &[0.02, 0.01]).unwrap();
    let paths = emit(&rep, Format::Csv, &dir.path().join("conv.csv")).unwrap();
    assert_eq!(paths.len(), 2);
    for p in &paths {
        let text = std::fs::read_to_string(p).unwrap();
        assert!(text.starts_with("n,x,y,I1,I2_or_J,err_vs_oracle\n"));
    }
    let json = emit(&rep, Format::Json, &dir.path().join("conv.json")).unwrap();
    let back = from_json(&std::fs::read_to_string(&json[0]).unwrap()).unwrap();
    assert_eq!(back.convergence.unwrap().points.len(), 2);
}
