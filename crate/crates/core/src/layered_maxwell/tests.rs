use super::*;
use crate::media::{make_cm_cloak, make_dcm_example, make_superlens, staircase, Layer, Provenance, ProfilePiece};
use crate::quad::{gauss_legendre_on, sphere_rule};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mode(n: usize, m: i64, pol: Polarization) -> ModeId {
    ModeId::new(n, m, pol).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

// closed-form order-1 spherical Bessel functions and derivatives
fn j1(x: Complex64) -> (Complex64, Complex64) {
    let j0 = x.sin() / x;
    let j = x.sin() / (x * x) - x.cos() / x;
    (j, j0 - j * 2.0 / x)
}

fn h1(x: Complex64) -> (Complex64, Complex64) {
    let i = c(0.0, 1.0);
    let h0 = -i * (i * x).exp() / x;
    let h = -(i * x).exp() * (x + i) / (x * x);
    (h, h0 - h * 2.0 / x)
}

/// Vacuum, one sheet mode: `F = A r j₁(ωr)` inside, `B r h₁(ωr)` outside,
/// solved by hand from the two jump conditions.
fn vacuum_oracle(pol: Polarization, omega: f64, rs: f64, amp: Complex64) -> (Complex64, Complex64) {
    let k = c(omega, 0.0);
    let (j, jp) = j1(k * rs);
    let (h, hp) = h1(k * rs);
    // P = r j, P' = j + k r j'
    let (p, pp) = (j * rs, j + k * rs * jp);
    let (q, qp) = (h * rs, h + k * rs * hp);
    match pol {
        // F continuous, G = F' jumps by −iωR c
        Polarization::TE => {
            let d = c(0.0, -omega * rs) * amp;
            let b = d * p / (qp * p - q * pp);
            (b * q / p, b)
        }
        // F jumps by −R c, G = F' continuous
        Polarization::TM => {
            let d = -amp * rs;
            // B Q − A P = d, B Q' − A P' = 0
            let b = d * pp / (q * pp - qp * p);
            (b * qp / pp, b)
        }
    }
}

#[test]
fn vacuum_single_mode_matches_hand_solution() {
    let omega = 1.3;
    let rs = 2.0;
    let amp = c(0.7, -0.2);
    for pol in [Polarization::TE, Polarization::TM] {
        let src = SurfaceCurrentSource::new(rs, vec![(mode(1, 0, pol), amp)]).unwrap();
        let sol = solve(&RadialMedium::vacuum(), &src, omega, 4).unwrap();
        let (a, b) = vacuum_oracle(pol, omega, rs, amp);
        for r in [0.4, 1.1, 1.9] {
            let (_, (e, h)) = sol.mode_components(r).unwrap()[0];
            let expect = a * j1(c(omega * r, 0.0)).0;
            let got = if pol == Polarization::TE { e[2] } else { h[2] };
            assert!(rel(got, expect) < 1e-12, "{pol:?} inside r={r}: {got} vs {expect}");
        }
        for r in [2.1, 5.0, 40.0] {
            let (_, (e, h)) = sol.mode_components(r).unwrap()[0];
            let expect = b * h1(c(omega * r, 0.0)).0;
            let got = if pol == Polarization::TE { e[2] } else { h[2] };
            assert!(rel(got, expect) < 1e-12, "{pol:?} outside r={r}: {got} vs {expect}");
        }
    }
}

#[test]
fn zero_source_gives_zero_field() {
    let src = SurfaceCurrentSource::new(3.0, vec![(mode(2, 1, Polarization::TE), c(0.0, 0.0))]).unwrap();
    let med = make_dcm_example(1.0, 2.0, 2.0, 0.1).unwrap();
    let sol = solve(&med, &src, 1.0, 4).unwrap();
    let (e, h) = sol.eval_field(&[0.3, 1.2, -0.8]).unwrap();
    assert!(e.iter().chain(h.iter()).all(|v| v.norm() == 0.0));
    assert_eq!(sol.l2_norm_annulus(0.0, 5.0).unwrap(), 0.0);
}

#[test]
fn solution_is_linear_in_the_source() {
    let med = make_dcm_example(1.0, 2.0, 3.0, 0.05).unwrap();
    let a = SurfaceCurrentSource::new(5.0, vec![(mode(1, 0, Polarization::TE), c(1.0, 0.0)), (mode(2, -1, Polarization::TM), c(0.0, 0.5))]).unwrap();
    let b = SurfaceCurrentSource::new(5.0, vec![(mode(1, 0, Polarization::TE), c(-0.3, 0.2)), (mode(2, -1, Polarization::TM), c(0.4, 0.0))]).unwrap();
    let s = c(0.6, -1.1);
    let sum = SurfaceCurrentSource::new(5.0, a.amplitudes.iter().zip(&b.amplitudes).map(|((id, x), (_, y))| (*id, x + y * s)).collect()).unwrap();
    let (sa, sb, ss) = (solve(&med, &a, 0.8, 3).unwrap(), solve(&med, &b, 0.8, 3).unwrap(), solve(&med, &sum, 0.8, 3).unwrap());
    for x in [[0.2, 0.3, 0.1], [0.9, -1.0, 0.7], [3.0, 1.0, -2.0]] {
        let (ea, _) = sa.eval_field(&x).unwrap();
        let (eb, _) = sb.eval_field(&x).unwrap();
        let (es, _) = ss.eval_field(&x).unwrap();
        for i in 0..3 {
            let expect = ea[i] + eb[i] * s;
            assert!((es[i] - expect).norm() <= 1e-10 * (1.0 + expect.norm()));
        }
    }
}

fn field_scale(sol: &FieldSolution, x: &Point) -> f64 {
    let (e, h) = sol.eval_field(x).unwrap();
    e.iter().chain(h.iter()).map(|v| v.norm()).fold(0.0, f64::max)
}

#[test]
fn finite_difference_maxwell_residual_is_small() {
    let med = make_dcm_example(1.0, 1.5, 3.0, 0.1).unwrap();
    let src = SurfaceCurrentSource::new(4.0, vec![(mode(1, 1, Polarization::TE), c(1.0, 0.0)), (mode(2, 0, Polarization::TM), c(0.5, 0.5))]).unwrap();
    let sol = solve(&med, &src, 1.0, 2).unwrap();
    // core, graded shell, vacuum between shell and sheet, vacuum outside
    for x in [[0.3, 0.2, 0.4], [0.7, 0.6, 0.8], [1.5, 1.2, 0.9], [3.0, 2.5, 1.0]] {
        let (re, rh) = maxwell_residual(&sol, &sol, &x, 1e-3).unwrap();
        let worst = re.iter().chain(rh.iter()).map(|v| v.norm()).fold(0.0, f64::max);
        assert!(worst / field_scale(&sol, &x) < 1e-6, "x={x:?}: residual {worst:e}");
    }
}

#[test]
fn annulus_norm_matches_brute_force_quadrature() {
    let med = make_dcm_example(1.0, 2.0, 2.0, 0.2).unwrap();
    let src = SurfaceCurrentSource::new(3.0, vec![(mode(1, -1, Polarization::TE), c(1.0, 0.3)), (mode(2, 2, Polarization::TM), c(-0.4, 0.1))]).unwrap();
    let sol = solve(&med, &src, 0.9, 2).unwrap();
    let (a, b) = (1.2, 1.8);
    let sphere = sphere_rule(24, 48);
    let mut brute = 0.0;
    for (r, wr) in gauss_legendre_on(30, a, b) {
        for (d, ws) in &sphere {
            let (e, h) = sol.eval_field(&[r * d[0], r * d[1], r * d[2]]).unwrap();
            brute += wr * ws * r * r * e.iter().chain(h.iter()).map(|v| v.norm_sqr()).sum::<f64>();
        }
    }
    let modal = sol.l2_norm_annulus(a, b).unwrap();
    assert!((modal - brute.sqrt()).abs() < 1e-9 * modal, "{modal} vs {}", brute.sqrt());
}

#[test]
fn farfield_flux_is_the_large_sphere_limit() {
    let med = make_dcm_example(1.0, 2.0, 2.0, 0.1).unwrap();
    let src = SurfaceCurrentSource::new(3.0, vec![(mode(1, 0, Polarization::TE), c(1.0, 0.0)), (mode(3, 1, Polarization::TM), c(0.0, 1.0))]).unwrap();
    let sol = solve(&med, &src, 1.0, 3).unwrap();
    let limit = sol.farfield_flux();
    let far = sol.sphere_flux(1e5).unwrap();
    assert!((far - limit).abs() < 1e-4 * limit, "{far} vs {limit}");
}

#[test]
fn energy_identity_holds_for_both_polarizations() {
    for p in [2.0, 3.0] {
        let med = make_dcm_example(1.0, 2.0, p, 0.05).unwrap();
        for pol in [Polarization::TE, Polarization::TM] {
            let src = SurfaceCurrentSource::new(5.0, vec![(mode(1, 0, pol), c(1.0, 0.0)), (mode(2, 1, pol), c(0.3, -0.4))]).unwrap();
            let sol = solve(&med, &src, 1.0, 2).unwrap();
            let balance = sol.energy_balance().unwrap();
            let absorbed = sol.absorbed_power().unwrap();
            assert!(absorbed > 0.0);
            assert!((balance + absorbed).abs() < 1e-6 * absorbed, "p={p} {pol:?}: {balance} vs {absorbed}");
        }
    }
}

#[test]
fn lossless_vacuum_balance_is_zero() {
    let src = SurfaceCurrentSource::new(1.5, vec![(mode(2, 0, Polarization::TE), c(1.0, 0.0)), (mode(1, 1, Polarization::TM), c(0.0, 2.0))]).unwrap();
    let sol = solve(&RadialMedium::vacuum(), &src, 2.0, 2).unwrap();
    assert!(sol.energy_balance().unwrap().abs() < 1e-12 * sol.farfield_flux());
}

#[test]
fn te_and_tm_radial_problems_coincide_when_eps_equals_mu() {
    let med = make_dcm_example(1.0, 2.0, 3.0, 0.1).unwrap();
    let te = RadialSolution::solve(&med, 2, Polarization::TE, 1.0, 4.0, GradedControl::default(), &Collocation::new(6)).unwrap();
    let tm = RadialSolution::solve(&med, 2, Polarization::TM, 1.0, 4.0, GradedControl::default(), &Collocation::new(6)).unwrap();
    assert!((te.matching_sine - tm.matching_sine).abs() < 1e-12 * te.matching_sine);
}

#[test]
fn graded_and_constant_paths_agree_on_constant_layers() {
    // a constant anisotropic-looking layer with equal parts goes through the collocation path
    let iso = Layer::constant(Some(1.5), c(2.0, 0.1), c(1.5, 0.0));
    let mut graded = iso.clone();
    graded.eps = crate::media::Uniaxial { radial: crate::media::Profile::PowerLaw { coef: c(2.0, 0.1), exponent: 0.0 }, tangential: crate::media::Profile::PowerLaw { coef: c(2.0, 0.1), exponent: 0.0 } };
    let core = Layer::constant(Some(1.0), c(1.0, 0.0), c(1.0, 0.0));
    let vac = Layer::constant(None, c(1.0, 0.0), c(1.0, 0.0));
    let m1 = RadialMedium::new(vec![core.clone(), iso, vac.clone()], Provenance::default()).unwrap();
    let m2 = RadialMedium::new(vec![core, graded, vac], Provenance::default()).unwrap();
    let src = SurfaceCurrentSource::new(2.5, vec![(mode(3, 2, Polarization::TE), c(1.0, 0.0)), (mode(1, 0, Polarization::TM), c(1.0, 1.0))]).unwrap();
    let s1 = solve(&m1, &src, 1.7, 3).unwrap();
    let s2 = solve(&m2, &src, 1.7, 3).unwrap();
    let d = l2_difference_annulus(&s1, &s2, 0.0, 4.0).unwrap();
    assert!(d < 1e-10 * s1.l2_norm_annulus(0.0, 4.0).unwrap(), "difference {d:e}");
}

#[test]
fn staircase_converges_to_graded_solution() {
    let med = make_dcm_example(1.0, 1.5, 3.0, 0.2).unwrap();
    let src = SurfaceCurrentSource::new(3.0, vec![(mode(1, 0, Polarization::TE), c(1.0, 0.0))]).unwrap();
    let exact = solve(&med, &src, 1.0, 1).unwrap();
    let errs: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&k| {
            let st = staircase(&med, k).unwrap();
            let s = solve(&st, &src, 1.0, 1).unwrap();
            l2_difference_annulus(&exact, &s, 0.0, 2.5).unwrap()
        })
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    // observed order of the midpoint staircase
    let order = (errs[1] / errs[2]).log2();
    assert!(order > 0.9, "order {order}, errors {errs:?}");
}

#[test]
fn dcm_fields_stay_bounded_as_loss_vanishes() {
    // outside B_{r3} the field is that of vacuum up to O(δ)
    let src = SurfaceCurrentSource::new(6.0, vec![(mode(1, 0, Polarization::TE), c(1.0, 0.0)), (mode(2, 1, Polarization::TM), c(1.0, 0.0))]).unwrap();
    let vac = solve(&RadialMedium::vacuum(), &src, 1.0, 2).unwrap();
    let mut prev = f64::INFINITY;
    for delta in [1e-2, 1e-3, 1e-4] {
        let med = make_dcm_example(1.0, 2.0, 2.0, delta).unwrap();
        let sol = solve(&med, &src, 1.0, 2).unwrap();
        let d = l2_difference_annulus(&sol, &vac, 4.5, 5.5).unwrap();
        assert!(d < prev);
        prev = d;
        assert!(d / delta < 50.0 * vac.l2_norm_annulus(4.5, 5.5).unwrap(), "delta {delta}: {d}");
    }
}

#[test]
fn superlens_and_cloak_media_solve() {
    let lens = make_superlens(0.5, 2.0, 0.8, (c(3.0, 0.0), c(1.0, 0.0)), 1e-3).unwrap();
    let cloak = make_cm_cloak(1.0, 2.0, &[ProfilePiece { inner: 1.2, outer: 1.6, eps: c(4.0, 0.0), mu: c(1.0, 0.0) }], 1e-3).unwrap();
    let src = SurfaceCurrentSource::new(5.0, vec![(mode(1, 0, Polarization::TE), c(1.0, 0.0)), (mode(2, 0, Polarization::TM), c(1.0, 0.0))]).unwrap();
    for med in [&lens.medium, &cloak] {
        let sol = solve(med, &src, 1.0, 2).unwrap();
        let b = sol.energy_balance().unwrap();
        let a = sol.absorbed_power().unwrap();
        assert!((a + b).abs() < 1e-6 * a.max(1e-300));
    }
}

#[test]
fn second_order_equation_holds_away_from_interfaces() {
    let med = make_dcm_example(1.0, 1.5, 3.0, 0.1).unwrap();
    let src = SurfaceCurrentSource::new(4.0, vec![(mode(1, 1, Polarization::TE), c(1.0, 0.0)), (mode(2, 0, Polarization::TM), c(0.5, 0.5))]).unwrap();
    let sol = solve(&med, &src, 1.0, 2).unwrap();
    let pts = [[0.5, 0.5, 0.5], [0.8, 0.7, 0.6], [2.0, 1.0, 1.0]];
    for a in 0..3 {
        let r = second_order_residual(&sol, a, &pts, 1e-2).unwrap();
        let scale = pts.iter().map(|x| field_scale(&sol, x)).fold(0.0, f64::max);
        assert!(r / scale < 1e-5, "component {a}: {r:e}");
    }
}

#[test]
fn glued_field_removes_the_shell_singularity() {
    let delta = 1e-3;
    let med = make_dcm_example(1.0, 2.0, 2.0, delta).unwrap();
    let (f, g) = crate::media::dcm_maps(&med).unwrap();
    let src = SurfaceCurrentSource::new(6.0, vec![(mode(1, 0, Polarization::TE), c(1.0, 0.0)), (mode(2, 1, Polarization::TM), c(0.0, 1.0))]).unwrap();
    let sol = solve(&med, &src, 1.0, 2).unwrap();
    let geom = GluingGeometry { r1: 1.0, r2: 2.0, r3: 4.0 };
    let samples = [[2.5, 0.3, 0.2], [0.0, 3.0, 1.0], [-1.0, 1.5, -2.0]];
    let (_, report) = remove_localized_singularity(&sol, &f, &g, geom, delta, &samples, 1e-3).unwrap();
    assert!(report.jump_r2 < 1e-10 && report.jump_r3 < 1e-10, "{report:?}");
    assert!(report.forcing_mismatch < 1e-5, "{report:?}");
}
