use std::path::Path;

use noma_vlc::experiment::{
    generate_scenario, read_convergence, realization_scenario, run_convergence, run_scheme,
    run_sweep, write_convergence, write_csv_file, ExperimentConfig, ExperimentSpec, Scheme,
    SweepVar,
};
use noma_vlc::{Error, SystemConfig, VlcParams};

fn quick() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.hho.population = 12;
    cfg.hho.max_iterations = 40;
    cfg.realizations = 2;
    cfg.num_users = 8;
    cfg
}

#[test]
fn results_csv_has_exact_header() {
    let spec = ExperimentSpec {
        schemes: vec![Scheme::Upup, Scheme::Oma],
        sweep: SweepVar::Radius,
        values: vec![6.0],
        base: quick(),
        record_wall_time: true,
    };
    let rows = run_sweep(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    write_csv_file(&rows, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheme,sweep_var,sweep_value,realization,seed,weighted_sum_rate_bps,weighted_sum_rate_bpshz,feasible,uav_x,uav_y,wall_time_ms"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "upup");
    assert_eq!(first[1], "radius_m");
    assert!(first[7] == "true" || first[7] == "false");
    assert!(first[10].parse::<f64>().unwrap() >= 0.0);
    assert_eq!(text.lines().count(), 1 + 4);
}

#[test]
fn upup_and_cnoma_coincide_for_two_users() {
    // with two users the grand cluster is the pair, so both schemes solve the
    // same problem with the same seed
    let mut cfg = ExperimentConfig {
        num_users: 2,
        ..ExperimentConfig::default()
    };
    cfg.hho.max_iterations = 100;
    for r in 0..20 {
        let (s, seed) = realization_scenario(&cfg, r).unwrap();
        let a = run_scheme(Scheme::Upup, &s, &cfg, seed).unwrap();
        let b = run_scheme(Scheme::Cnoma, &s, &cfg, seed).unwrap();
        let c = run_scheme(Scheme::RClustering, &s, &cfg, seed).unwrap();
        assert_eq!(a.trace.best_fitness, b.trace.best_fitness);
        assert_eq!(a.trace.best_fitness, c.trace.best_fitness);
    }
}

#[test]
fn two_close_users_end_sic_ordered() {
    let users = vec![
        noma_vlc::Position3D::ground(0.3, 0.2),
        noma_vlc::Position3D::ground(-1.2, 0.4),
    ];
    let s =
        noma_vlc::Scenario::new(users, 3.0, SystemConfig::default(), VlcParams::default()).unwrap();
    let cfg = ExperimentConfig::default();
    let r = run_scheme(Scheme::Upup, &s, &cfg, 11).unwrap();
    let p = r.powers();
    assert!(r.report.sic[0] <= 0.0, "{:?}", r.report);
    assert!(p[0] > p[1]);
}

#[test]
fn feasible_results_carry_zero_penalty() {
    let mut cfg = quick();
    cfg.system.cell_radius = 4.0;
    cfg.hho.max_iterations = 150;
    cfg.realizations = 4;
    let spec = ExperimentSpec {
        schemes: Scheme::ALL.to_vec(),
        sweep: SweepVar::None,
        values: vec![0.0],
        base: cfg,
        record_wall_time: false,
    };
    for run in noma_vlc::experiment::run_sweep_detailed(&spec).unwrap() {
        let r = run.result.unwrap();
        assert_eq!(r.feasible, r.penalty == 0.0);
        assert_eq!(r.feasible, run.row.feasible);
        assert_eq!(r.trace.best_fitness, r.weighted_sum_rate_bpshz + r.penalty);
    }
}

#[test]
fn convergence_file_has_one_row_per_iteration() {
    let cfg = ExperimentConfig::default();
    let s = generate_scenario(4, 10.0, 3.0, 8, cfg.system, cfg.vlc).unwrap();
    let r = run_scheme(Scheme::Upup, &s, &cfg, 8).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("conv.csv");
    write_convergence(&r.trace, &path).unwrap();
    let back = read_convergence(&path).unwrap();
    assert_eq!(back.len(), 350);
    assert_eq!(back, r.trace.best_fitness_per_iteration);
}

#[test]
fn averaged_convergence_per_user_count() {
    let mut cfg = quick();
    cfg.realizations = 3;
    let curves = run_convergence(&cfg, &[4, 6], false).unwrap();
    assert_eq!(curves.len(), 2);
    for c in &curves {
        assert_eq!(c.mean_trace.len(), 40);
        assert_eq!(c.finals.len(), 3);
        assert!(c.mean_trace.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn config_file_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.cfg");
    std::fs::write(
        &good,
        "num_users = 6\nrealizations = 3\nfov_deg = 50\nuser_area_side_m = 8\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::from_file(&good).unwrap();
    assert_eq!((cfg.num_users, cfg.realizations, cfg.vlc.fov), (6, 3, 50.0));
    assert_eq!(cfg.area_side(), 8.0);

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "num_users = 6\nwarp_factor = 9\n").unwrap();
    match ExperimentConfig::from_file(&bad) {
        Err(Error::ConfigFile { line, msg, .. }) => {
            assert_eq!(line, 2);
            assert!(msg.contains("warp_factor"));
        }
        other => panic!("expected config error, got {other:?}"),
    }

    let invalid = dir.path().join("invalid.cfg");
    std::fs::write(&invalid, "fov_deg = 120\n").unwrap();
    assert!(ExperimentConfig::from_file(&invalid).is_err());
    assert!(ExperimentConfig::from_file(Path::new("/nonexistent/x.cfg")).is_err());
}
