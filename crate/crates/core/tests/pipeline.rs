use szego_lab::domain::DomainSpec;
use szego_lab::experiments::{default_schedule, emit_report, parse_summary, run_limit_suite, SuiteMetadata};
use szego_lab::io::{parse_domain, read_series, write_series};
use szego_lab::kernels::{build_series, norm_table, ExactBallKernel, KernelEvaluator, KernelKind};
use szego_lab::scaling::scaling_sequence;
use szego_lab::{Cx, Error};

#[test]
fn series_file_round_trip_preserves_kernel_values() {
    let spec: DomainSpec<f64> = parse_domain("kind = bumped-ball\nn = 2\nepsilon = 0.05\n").unwrap();
    let table = norm_table(&spec, 12, 1.0).unwrap();
    let text = write_series(&table, KernelKind::Bergman, 1.0);
    let back = read_series::<f64>(&text, spec.name()).unwrap();
    let direct = build_series(&spec, KernelKind::Bergman, 12, 1.0).unwrap();
    let z = [Cx::new(0.2, -0.1), Cx::new(0.1, 0.3)];
    let w = [Cx::new(-0.3, 0.0), Cx::new(0.05, 0.2)];
    let (a, b) = (back.eval(&z, &w).unwrap(), direct.eval(&z, &w).unwrap());
    assert!((a - b).norm() < 1e-15 * b.norm());
}

#[test]
fn report_json_round_trip() {
    let ball = DomainSpec::<f64>::unit_ball(2).unwrap();
    let kernel = ExactBallKernel::szego(2, 1.0);
    let p0 = [Cx::new(1.0, 0.0), Cx::new(0.0, 0.0)];
    let x = [Cx::new(0.6, 0.0), Cx::new(0.0, 0.8)];
    let reports = run_limit_suite(&ball, &kernel, &p0, &x, &default_schedule()).unwrap();
    let dir = std::env::temp_dir().join(format!("szego-lab-pipeline-{}", std::process::id()));
    let path = dir.join("limits.csv");
    let meta = SuiteMetadata {
        domain: "unit-ball".into(),
        n: 2,
        epsilon: None,
        degree: None,
        c_n: 1.0,
    };
    emit_report(&reports, &meta, &path).unwrap();
    let summary = parse_summary(&std::fs::read_to_string(path.with_extension("json")).unwrap()).unwrap();
    assert_eq!(summary.metadata, meta);
    assert_eq!(summary.reports, reports);
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6 * default_schedule::<f64>().len());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn zero_direction_is_rejected() {
    let ball = DomainSpec::<f64>::unit_ball(2).unwrap();
    let kernel = ExactBallKernel::szego(2, 1.0);
    let p0 = [Cx::new(1.0, 0.0), Cx::new(0.0, 0.0)];
    let zero = [Cx::new(0.0, 0.0); 2];
    assert_eq!(
        run_limit_suite(&ball, &kernel, &p0, &zero, &default_schedule()).unwrap_err(),
        Error::ZeroVector
    );
}

#[test]
fn scaling_in_three_dimensions() {
    let ball = DomainSpec::<f64>::unit_ball(3).unwrap();
    let seq: Vec<(usize, f64)> = (1..=8).map(|j| (j, 0.5f64.powi(j as i32))).collect();
    let rows = scaling_sequence(&ball, &seq).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].q_deviation < w[0].q_deviation);
        assert!(w[1].residual < w[0].residual);
    }
    let last = rows.last().unwrap();
    assert!((last.eta / last.delta - 1.0).abs() < 1e-3);
}
