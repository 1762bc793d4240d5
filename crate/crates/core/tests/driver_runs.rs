use nhslice::driver::{
    run, run_to_dir, RunConfig, TestCase, BUDGET_FILE, MANIFEST_FILE, SNAPSHOT_FILE,
};
use nhslice::model::VerticalMode;

fn small_config() -> RunConfig {
    let mut cfg = RunConfig {
        ne: 4,
        n: 12,
        length: 4.0e5,
        dt: 20.0,
        run_length: 600.0,
        spinup: 200.0,
        ..RunConfig::default()
    };
    cfg.gravity_wave.half_width = 2.0e4;
    cfg.gravity_wave.amplitude = 2.0;
    cfg
}

#[test]
fn identical_configs_give_identical_files() {
    let cfg = small_config();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_to_dir(&cfg, a.path()).unwrap();
    run_to_dir(&cfg, b.path()).unwrap();
    for f in [BUDGET_FILE, SNAPSHOT_FILE, MANIFEST_FILE] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{f} differs");
    }
    let manifest = std::fs::read_to_string(a.path().join(MANIFEST_FILE)).unwrap();
    assert!(manifest.contains("status = \"ok\""));
    assert!(manifest.contains("vertical_grid_sha256"));
    let rows = std::fs::read_to_string(a.path().join(BUDGET_FILE)).unwrap().lines().count();
    assert_eq!(rows, 1 + 30);
}

#[test]
fn rest_state_has_flat_budget() {
    for mode in [VerticalMode::Eulerian, VerticalMode::Lagrangian] {
        let cfg = RunConfig {
            case: TestCase::Rest,
            mode,
            ..small_config()
        };
        let out = run(&cfg).unwrap();
        let s = &out.audit.summary;
        assert!(s.rel_energy_change < 1e-13, "{mode:?} {:e}", s.rel_energy_change);
        for row in &out.audit.rows {
            for t in [row.t1, row.t2, row.t3, row.s1, row.s2, row.s3] {
                assert!(t.abs() < 1e-6, "{mode:?} {t:e}");
            }
        }
        assert_eq!(s.remaps, 0, "rest state never leaves the reference levels");
    }
}

#[test]
fn lagrangian_run_changes_energy_only_at_remaps() {
    let cfg = RunConfig {
        mode: VerticalMode::Lagrangian,
        remap_interval: 5,
        tableau: "ars222".into(),
        run_length: 1000.0,
        ..small_config()
    };
    let out = run(&cfg).unwrap();
    let s = &out.audit.summary;
    assert_eq!(s.remaps, 50 / 5);
    assert!(s.max_mass_change <= 1e-13, "{:e}", s.max_mass_change);
    assert!(s.max_theta_change <= 1e-13, "{:e}", s.max_theta_change);
    assert!(s.max_transfer_defect <= 1e-12, "{:e}", s.max_transfer_defect);

    let (mut at_remap, mut between) = (Vec::new(), Vec::new());
    for (i, w) in out.audit.rows.windows(2).enumerate() {
        let de = w[1].e - w[0].e;
        if (i + 2) % cfg.remap_interval == 0 {
            at_remap.push(de);
        } else {
            between.push(de.abs());
        }
    }
    // every remap moves E the same way, and E is flat in between
    let sign = at_remap[0].signum();
    assert!(at_remap.iter().all(|d| d.signum() == sign), "{at_remap:?}");
    let smallest_jump = at_remap.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    let largest_drift = between.iter().fold(0.0_f64, |m, d| m.max(*d));
    assert!(largest_drift < 1e-2 * smallest_jump, "{largest_drift:e} vs {smallest_jump:e}");
}

#[test]
fn failed_run_still_writes_manifest() {
    // fully explicit stepping at a time step far beyond the acoustic limit
    let cfg = RunConfig {
        tableau: "ssprk3".into(),
        dt: 50.0,
        spinup: 0.0,
        run_length: 5000.0,
        ..small_config()
    };
    let dir = tempfile::tempdir().unwrap();
    let err = run_to_dir(&cfg, dir.path()).unwrap_err();
    let manifest = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    assert!(manifest.contains("status = \"failed\""), "{manifest}");
    assert!(manifest.contains("failed_step"), "{manifest}");
    assert!(manifest.contains("failed_column"), "{manifest}");
    assert!(err.to_string().starts_with("step "), "{err}");
    assert!(err.failed_column().is_some());
    assert!(!dir.path().join(BUDGET_FILE).exists());
}

#[test]
fn config_file_round_trip() {
    let cfg = small_config();
    let text = cfg.to_toml();
    assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
}
