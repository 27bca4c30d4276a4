use adaptive_autopilot::guidance::PursuerKind;
use adaptive_autopilot::scenario::{emit_trajectory, run_scenario, trajectory_header, ScenarioConfig, ScenarioKind};
use adaptive_autopilot::simcore::Trajectory;

fn read(path: &std::path::Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn short_step(adaptive: bool) -> Trajectory {
    let mut cfg = ScenarioConfig::new(ScenarioKind::Step);
    cfg.variants = Some(vec![if adaptive {
        PursuerKind::Adaptive
    } else {
        PursuerKind::Fixed
    }]);
    cfg.simulation.duration_s = Some(0.5);
    run_scenario(&cfg).unwrap().trajectories.remove(0)
}

#[test]
fn empty_trajectory_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    emit_trajectory(&Trajectory::default(), &path).unwrap();
    let (header, rows) = read(&path);
    assert_eq!(header, trajectory_header(0, false));
    assert!(rows.is_empty());
}

#[test]
fn one_record_has_schema_width() {
    let mut traj = short_step(true);
    traj.records.truncate(1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    emit_trajectory(&traj, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    let (header, rows) = read(&path);
    assert_eq!(header.len(), 16 + 9);
    assert_eq!(rows[0].len(), 16 + 9);
    assert_eq!(header[16], "theta_k_1");
}

#[test]
fn values_round_trip_exactly() {
    let traj = short_step(true);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("step.csv");
    emit_trajectory(&traj, &path).unwrap();
    let (header, rows) = read(&path);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(rows.len(), traj.len());
    for (row, rec) in rows.iter().zip(&traj.records) {
        assert_eq!(row[col("t")].to_bits(), rec.t.to_bits());
        assert_eq!(row[col("q_rad_s")].to_bits(), rec.state.q.to_bits());
        assert_eq!(row[col("a_z")].to_bits(), rec.imu.a_z.to_bits());
        assert_eq!(row[col("z")].to_bits(), rec.z.to_bits());
        assert_eq!(row[col("theta_k_9")].to_bits(), rec.theta[8].to_bits());
    }
}

#[test]
fn engagement_columns_appended() {
    let mut cfg = ScenarioConfig::new(ScenarioKind::Intercept);
    cfg.variants = Some(vec![PursuerKind::Fixed]);
    let report = run_scenario(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("intercept.csv");
    emit_trajectory(&report.trajectories[0], &path).unwrap();
    let (header, rows) = read(&path);
    assert_eq!(header.len(), 16 + 9 + 4);
    assert_eq!(&header[25..], ["R_m", "beta_rad", "evader_d_m", "evader_h_m"]);
    let last = rows.last().unwrap();
    assert!(last[25] < 50.0, "final logged range {}", last[25]);
}
