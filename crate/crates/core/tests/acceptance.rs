//! Acceptance suite: the six gate criteria, each printing one PASS line
//! with its measurements (run with `cargo test --test acceptance --release
//! -- --nocapture` to see them).

use std::sync::Arc;
use std::time::Instant;

use wavecontrol::{
    assemble_a_obs, assemble_system, element_moment_oracles, extract_control, factorize,
    forward_solve, galerkin_residual, interpolate, observability_constant, run_preset,
    run_single, CoefficientField, DofMap, ExperimentPreset, FieldPh, FnInterpolant, InitialData,
    Overrides, PotentialField, PresetId, ProblemConfig, Profile, RunOptions, SpaceTimeMesh,
    WeightMode, WeightParams,
};

fn ladder_config(preset: &ExperimentPreset, t: f64, n: usize) -> ProblemConfig {
    preset.config(t, n)
}

fn assert_within(label: &str, got: f64, want: f64, rel: f64) {
    let dev = (got - want).abs() / want.abs();
    assert!(
        dev <= rel,
        "{label}: got {got:.4e}, want {want:.4e} within {:.0}% (off by {:.1}%)",
        rel * 100.0,
        dev * 100.0
    );
}

#[test]
fn criterion_1_observability_table() {
    let start = Instant::now();
    let report = run_preset(PresetId::Table1, &Overrides::default(), None).unwrap();
    let c0h_at = |t: f64, nx: usize| -> f64 {
        report
            .rows
            .iter()
            .find(|r| r.t_horizon == t && r.nx == nx)
            .and_then(|r| r.c0h)
            .unwrap()
    };
    // T = 2.2: within 15% of the reference values and nondecreasing
    let reference = [(10, 6.60e-2), (20, 7.61e-2), (40, 8.56e-2), (80, 9.05e-2)];
    let mut prev = 0.0;
    for (nx, want) in reference {
        let got = c0h_at(2.2, nx);
        assert_within(&format!("C0h(T=2.2, 1/{nx})"), got, want, 0.15);
        assert!(got >= prev, "C0h must be nondecreasing: {got} < {prev}");
        prev = got;
    }
    // T = 1.5: blow-up regime, each refinement at least triples the constant
    let mut ratios = Vec::new();
    let mut prev = c0h_at(1.5, 10);
    for nx in [20, 40, 80] {
        let cur = c0h_at(1.5, nx);
        ratios.push(cur / prev);
        assert!(
            cur / prev >= 3.0,
            "blow-up ratio at 1/{nx}: {:.2} < 3",
            cur / prev
        );
        prev = cur;
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 600.0, "criterion 1 runtime {elapsed:.0}s > 10 min");
    println!(
        "criterion 1: PASS - C0h(T=2.2) = {:?}, blow-up ratios = {:?}, {:.0}s",
        reference
            .iter()
            .map(|(nx, _)| c0h_at(2.2, *nx))
            .collect::<Vec<_>>(),
        ratios,
        elapsed
    );
}

#[test]
fn criterion_2_smooth_case() {
    let start = Instant::now();
    let preset = ExperimentPreset::get(PresetId::Smooth);
    let mut v40 = 0.0;
    let mut y_norms = Vec::new();
    let mut yt_norms = Vec::new();
    for &n in &preset.ladder {
        let cfg = ladder_config(&preset, 2.2, n);
        let opts = RunOptions {
            with_c0h: false,
            with_kappa: false,
            with_forward: true,
            substeps: preset.substeps(&cfg),
        };
        let run = run_single(&cfg, &opts).unwrap();
        if n == 40 {
            v40 = run.row.norm_v.unwrap();
        }
        y_norms.push(run.row.norm_y_final.unwrap());
        yt_norms.push(run.row.norm_yt_final.unwrap());
    }
    assert_within("|v|_L2(1/40)", v40, 5.43e-1, 0.10);
    let y40 = y_norms[2];
    let yt40 = yt_norms[2];
    assert!(y40 <= 3e-3, "|y(T)|_L2 at 1/40: {y40:.3e} > 3e-3");
    assert!(yt40 <= 6e-3, "|yt(T)|_H-1 at 1/40: {yt40:.3e} > 6e-3");
    for w in y_norms.windows(2) {
        assert!(w[1] < w[0], "|y(T)| not strictly decreasing: {y_norms:?}");
    }
    for w in yt_norms.windows(2) {
        assert!(w[1] < w[0], "|yt(T)| not strictly decreasing: {yt_norms:?}");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 300.0, "criterion 2 runtime {elapsed:.0}s > 5 min");
    println!(
        "criterion 2: PASS - |v|(1/40) = {v40:.4e}, |y(T)| = {y_norms:?}, |yt(T)| = {yt_norms:?}, {elapsed:.0}s"
    );
}

#[test]
fn criterion_3_convergence_rates() {
    let start = Instant::now();
    let report = run_preset(PresetId::Smooth, &Overrides::default(), None).unwrap();
    let p_rate = report.p_rate.expect("p rate");
    let v_rate = report.v_rate.expect("v rate");
    assert!(
        (1.4..=2.3).contains(&p_rate),
        "rate |p - p_h|_P = {p_rate:.3} outside [1.4, 2.3]"
    );
    assert!(
        (1.0..=2.0).contains(&v_rate),
        "rate |v - v_h|_L2 = {v_rate:.3} outside [1.0, 2.0]"
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 1800.0, "criterion 3 runtime {elapsed:.0}s > 30 min");
    println!(
        "criterion 3: PASS - rate(p) = {p_rate:.3} (reference 1.91), rate(v) = {v_rate:.3} (reference 1.56), {elapsed:.0}s"
    );
}

#[test]
fn criterion_4_discontinuous_data() {
    let start = Instant::now();
    let preset = ExperimentPreset::get(PresetId::Discontinuous);
    let mut y_norms = Vec::new();
    let mut v80 = 0.0;
    for &n in &preset.ladder {
        let cfg = ladder_config(&preset, 2.2, n);
        let opts = RunOptions {
            with_c0h: false,
            with_kappa: false,
            with_forward: true,
            substeps: preset.substeps(&cfg),
        };
        let run = run_single(&cfg, &opts).unwrap();
        y_norms.push(run.row.norm_y_final.unwrap());
        if n == 80 {
            v80 = run.row.norm_v.unwrap();
        }
    }
    for w in y_norms.windows(2) {
        assert!(w[1] < w[0], "|y(T)| not strictly decreasing: {y_norms:?}");
    }
    let y80 = *y_norms.last().unwrap();
    assert!(y80 <= 7e-2, "|y(T)| at 1/80: {y80:.3e} > 7e-2");
    assert_within("|v|_L2(1/80)", v80, 3.14e-1, 0.15);
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "criterion 4: PASS - |y(T)| = {y_norms:?}, |v|(1/80) = {v80:.4e}, {elapsed:.0}s"
    );
}

#[test]
fn criterion_5_property_suite() {
    let start = Instant::now();

    // (a) the five displayed element-moment identities (plus the sixth
    // mixed one) to 1e-12 relative
    for (dx, dt) in [(0.1, 0.1), (0.0125, 0.0125), (0.31, 0.055)] {
        let table = element_moment_oracles(dx, dt);
        for (name, got, want) in &table.entries {
            assert!(
                (got - want).abs() <= 1e-12 * want.abs(),
                "moment {name} at ({dx},{dt}): {got} vs {want}"
            );
        }
    }

    // (b) bicubic reproduction and C1 conformity
    let dofs = Arc::new(DofMap::new(SpaceTimeMesh::new(6, 9, 1.7).unwrap()));
    let exact = |x: f64, t: f64| x * (1.0 - x) * (1.0 + t + t * t * t);
    let poly = FnInterpolant {
        value: exact,
        dx: |x: f64, t: f64| (1.0 - 2.0 * x) * (1.0 + t + t * t * t),
        dt: |x: f64, t: f64| x * (1.0 - x) * (1.0 + 3.0 * t * t),
        dxt: |x: f64, t: f64| (1.0 - 2.0 * x) * (1.0 + 3.0 * t * t),
    };
    let field = interpolate(&poly, dofs.clone()).unwrap();
    for i in 0..=30 {
        for j in 0..=30 {
            let x = i as f64 / 30.0;
            let t = 1.7 * j as f64 / 30.0;
            let want = exact(x, t);
            let got = field.eval(x, t, 0, 0).unwrap();
            assert!(
                (got - want).abs() <= 1e-12 * (1.0 + want.abs()),
                "reproduction at ({x},{t})"
            );
        }
    }
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let coeffs: Vec<f64> = (0..dofs.n_free).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let rand_field = FieldPh::from_coeffs(dofs.clone(), coeffs).unwrap();
    let mesh = &dofs.mesh;
    for k in 1..mesh.nx {
        for s in 0..10 {
            let t = mesh.t_final * (s as f64 + 0.5) / 10.0;
            let (l, ct) = mesh.locate_t(t);
            for (dxo, dto) in [(0usize, 0usize), (1, 0), (0, 1)] {
                let a = rand_field.eval_in_cell(k - 1, l, 1.0, ct, dxo, dto);
                let b = rand_field.eval_in_cell(k, l, 0.0, ct, dxo, dto);
                assert!((a - b).abs() <= 1e-12, "C1 edge x_k={k}");
            }
        }
    }

    // (c) symmetry of the assembled form and Cholesky success on every
    // preset at the coarse ladder mesh
    for id in [
        PresetId::Table1,
        PresetId::Smooth,
        PresetId::Gaussian,
        PresetId::H1xL2,
        PresetId::Discontinuous,
        PresetId::VarCoef,
    ] {
        let preset = ExperimentPreset::get(id);
        for &t in &preset.t_values {
            let cfg = preset.config(t, 10);
            let dofs = Arc::new(DofMap::new(
                SpaceTimeMesh::new(cfg.nx, cfg.nt, t).unwrap(),
            ));
            let sys = assemble_system(&dofs, &cfg, WeightMode::Interpolated).unwrap();
            // symmetry through the quadratic-form witness
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
            let u: Vec<f64> = (0..dofs.n_free).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..dofs.n_free).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut mu = vec![0.0; dofs.n_free];
            let mut mw = vec![0.0; dofs.n_free];
            sys.matrix.matvec(&u, &mut mu);
            sys.matrix.matvec(&w, &mut mw);
            let uw: f64 = u.iter().zip(&mw).map(|(a, b)| a * b).sum();
            let wu: f64 = w.iter().zip(&mu).map(|(a, b)| a * b).sum();
            assert!(
                (uw - wu).abs() <= 1e-12 * uw.abs().max(1.0),
                "{id}: asymmetry {uw} vs {wu}"
            );
            factorize(&sys.matrix).unwrap_or_else(|e| panic!("{id} T={t}: {e}"));
        }
    }

    // (d) Galerkin residual of the solved smooth system
    {
        let cfg = ExperimentPreset::get(PresetId::Smooth).config(2.2, 20);
        let dofs = Arc::new(DofMap::new(SpaceTimeMesh::new(20, 44, 2.2).unwrap()));
        let sys = assemble_system(&dofs, &cfg, WeightMode::Interpolated).unwrap();
        let factor = factorize(&sys.matrix).unwrap();
        let p = factor.solve_refined(&sys.matrix, &sys.rhs).unwrap();
        let res = galerkin_residual(&sys.matrix, &sys.rhs, &p);
        assert!(res <= 1e-9, "Galerkin residual {res:.3e} > 1e-9");
    }

    // (e) standing-wave forward error drops 4x when dt_f halves
    {
        let cfg = ProblemConfig {
            coefficient: CoefficientField::constant(1.0),
            potential: PotentialField::constant(0.0),
            data: InitialData::new(Profile::SinePi, Profile::Zero),
            weights: WeightParams::paper_defaults(2.2),
            nx: 20,
            nt: 44,
            allow_short_horizon: false,
        };
        let dt = 2.2 / 44.0;
        let trace =
            wavecontrol::ControlTrace::zero((0..=44).map(|l| l as f64 * dt).collect(), dt);
        let nodal_err = |substeps: usize| -> f64 {
            let traj = forward_solve(&cfg, &trace, substeps).unwrap();
            let yt = traj.final_state();
            (0..=20)
                .map(|k| {
                    let x = k as f64 / 20.0;
                    (yt.coeffs[2 * k]
                        - (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * 2.2).cos())
                    .abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = nodal_err(4) / nodal_err(8);
        assert!(
            (3.4..=4.6).contains(&ratio),
            "standing-wave error ratio {ratio:.2} outside [3.4, 4.6]"
        );
    }

    // (f) rho time symmetry and phi >= 1 on a dense grid
    {
        let w = WeightParams::paper_defaults(2.2);
        for i in 0..=100 {
            for j in 0..=100 {
                let x = i as f64 / 100.0;
                let t = 2.2 * j as f64 / 100.0;
                let tau = -2.2 + 2.0 * t;
                assert!(w.phi(x, tau) >= 1.0 - 1e-12, "phi < 1 at ({x},{tau})");
                let r = w.rho(x, t).unwrap();
                let m = w.rho(x, 2.2 - t).unwrap();
                assert!((r - m).abs() <= 4.0 * f64::EPSILON * r.abs());
            }
        }
    }

    // (g) duality pairing identity for smooth y1 to quadrature accuracy
    {
        use wavecontrol::{neg_laplacian_inverse_1d, PiecewisePoly};
        let pi = std::f64::consts::PI;
        let n = 64;
        let nodes: Vec<f64> = (0..=n).map(|k| (pi * k as f64 / n as f64).sin()).collect();
        let f = PiecewisePoly::linear_from_nodes(&nodes);
        let (_, wp) = neg_laplacian_inverse_1d(&f);
        let mut via_pairing = 0.0;
        let mut via_integral = 0.0;
        let h = 1.0 / n as f64;
        for k in 0..n {
            for q in 0..5 {
                let x = (k as f64 + wavecontrol::quad::GAUSS5_NODES[q]) * h;
                let wq = wavecontrol::quad::GAUSS5_WEIGHTS[q] * h;
                via_pairing += wp.eval(x) * pi * (pi * x).cos() * wq;
                via_integral += f.eval(x) * (pi * x).sin() * wq;
            }
        }
        assert!(
            (via_pairing - via_integral).abs() <= 1e-8,
            "duality pairing {via_pairing} vs {via_integral}"
        );
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 120.0, "criterion 5 runtime {elapsed:.0}s > 2 min");
    println!("criterion 5: PASS - all property checks hold, {elapsed:.0}s");
}

#[test]
fn criterion_6_variable_coefficient() {
    let start = Instant::now();
    let preset = ExperimentPreset::get(PresetId::VarCoef);
    let mut c0h = Vec::new();
    let mut y_norms = Vec::new();
    for &n in &preset.ladder {
        let cfg = ladder_config(&preset, 2.2, n);
        let opts = RunOptions {
            with_c0h: true,
            with_kappa: false,
            with_forward: true,
            substeps: preset.substeps(&cfg),
        };
        let run = run_single(&cfg, &opts).unwrap();
        c0h.push(run.row.c0h.unwrap());
        y_norms.push(run.row.norm_y_final.unwrap());
    }
    // uniformly bounded constant (no blow-up trend): bounded absolutely and
    // within a modest spread across the ladder
    let cmax = c0h.iter().cloned().fold(0.0, f64::max);
    let cmin = c0h.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(cmax <= 1.0, "C0h not bounded: {c0h:?}");
    assert!(
        cmax / cmin <= 3.0,
        "C0h spread {:.2} suggests blow-up: {c0h:?}",
        cmax / cmin
    );
    for w in y_norms.windows(2) {
        assert!(w[1] < w[0], "|y(T)| not decreasing: {y_norms:?}");
    }
    let y80 = *y_norms.last().unwrap();
    assert!(y80 <= 2e-2, "|y(T)| at 1/80: {y80:.3e} > 2e-2");
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "criterion 6: PASS - C0h = {c0h:?}, |y(T)| = {y_norms:?}, {elapsed:.0}s"
    );
}

#[test]
fn criterion_5_smoke_quarter_mesh() {
    // tiny-mesh smoke run finishing in well under a second of compute
    let start = Instant::now();
    let overrides = Overrides {
        mesh: Some((4, 9)),
        ..Default::default()
    };
    let report = run_preset(PresetId::Smooth, &overrides, None).unwrap();
    assert!(report.rows[0].norm_v.unwrap().is_finite());
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn table1_paper_values_spotcheck() {
    // the [PAPER] anchors used by the operation examples: C0h at the coarse
    // mesh for both horizons
    let preset = ExperimentPreset::get(PresetId::Table1);
    let cfg22 = preset.config(2.2, 10);
    let dofs = Arc::new(DofMap::new(SpaceTimeMesh::new(10, 22, 2.2).unwrap()));
    let sys = assemble_system(&dofs, &cfg22, WeightMode::Interpolated).unwrap();
    let factor = factorize(&sys.matrix).unwrap();
    let a = assemble_a_obs(&dofs);
    let est = observability_constant(&a, &sys.matrix, &factor).unwrap();
    assert_within("C0h(2.2, 1/10)", est.value, 6.60e-2, 0.15);

    // blow-up value 17.02 at T=1.5, 1/40 reproduced within the wider band
    // the calibrated cutoff leaves for this regime
    let cfg15 = preset.config(1.5, 40);
    let dofs = Arc::new(DofMap::new(SpaceTimeMesh::new(40, 60, 1.5).unwrap()));
    let sys = assemble_system(&dofs, &cfg15, WeightMode::Interpolated).unwrap();
    let factor = factorize(&sys.matrix).unwrap();
    let a = assemble_a_obs(&dofs);
    let est = observability_constant(&a, &sys.matrix, &factor).unwrap();
    assert_within("C0h(1.5, 1/40)", est.value, 17.02, 0.25);
}

#[test]
fn smooth_table_paper_values_spotcheck() {
    // |p|_P and |v| against the reference table at the coarse mesh
    let preset = ExperimentPreset::get(PresetId::Smooth);
    let cfg = preset.config(2.2, 10);
    let opts = RunOptions {
        with_c0h: false,
        with_kappa: false,
        with_forward: true,
        substeps: 4,
    };
    let run = run_single(&cfg, &opts).unwrap();
    assert_within("|p|_P(1/10)", run.row.norm_p.unwrap(), 1.541e-1, 0.05);
    assert_within("|v|(1/10)", run.row.norm_v.unwrap(), 5.421e-1, 0.05);
    // the forward verification drives the state near zero
    let y = run.row.norm_y_final.unwrap();
    assert!(y < 3e-2, "|y(T)|(1/10) = {y:.3e}");
}

#[test]
fn extraction_is_deterministic() {
    let preset = ExperimentPreset::get(PresetId::Smooth);
    let cfg = preset.config(2.2, 8);
    let opts = RunOptions {
        with_c0h: false,
        with_kappa: false,
        with_forward: false,
        substeps: 4,
    };
    let a = run_single(&cfg, &opts).unwrap();
    let b = run_single(&cfg, &opts).unwrap();
    assert_eq!(a.trace.as_ref().unwrap().values, b.trace.as_ref().unwrap().values);
    assert_eq!(a.trace.as_ref().unwrap().derivs, b.trace.as_ref().unwrap().derivs);
    let t = extract_control(&a.field, &cfg).unwrap();
    assert_eq!(t.values, a.trace.as_ref().unwrap().values);
}
