use std::fs;
use std::path::Path;
use std::process::Command;

use xxrelay_cli::{parse_config, run, Figure, Mode, Overrides, RunConfig};

fn config(text: &str, mode: Mode, out: &Path) -> RunConfig {
    figure_config(text, mode, None, out)
}

fn figure_config(text: &str, mode: Mode, figure: Option<Figure>, out: &Path) -> RunConfig {
    let o = Overrides { mode: Some(mode), figure, output_dir: Some(out.to_path_buf()), ..Default::default() };
    parse_config(text, &o).unwrap()
}

const SMALL: &str = "[chain]\nn = 6\nregistration_time = 4.0\n[grids]\ndt = 0.05\nnodes = 8\n\
lambda = { start = 0.5, stop = 1.0, step = 0.1 }\nalpha = { start = 0.0, stop = 1.0, step = 0.25 }\n";

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn manifest_rerun_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let text = "[chain]\nn = 5\n[grids]\ndt = 0.05\nnodes = 8\nhorizon = 12.0\n";
    let summary = run(&config(text, Mode::Clusters, &first)).unwrap();
    assert!(summary.registration_time.is_some());
    let manifest = read(&first, "manifest.toml");
    let second = tmp.path().join("second");
    let o = Overrides { output_dir: Some(second.clone()), ..Default::default() };
    let again = run(&parse_config(&manifest, &o).unwrap()).unwrap();
    assert_eq!(again.registration_time, summary.registration_time);
    for f in summary.files.iter().filter(|f| f.ends_with(".csv")) {
        assert_eq!(read(&first, f), read(&second, f), "{f}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in [1, 3] {
        let dir = tmp.path().join(format!("t{threads}"));
        let mut cfg = config(SMALL, Mode::Critical, &dir);
        cfg.threads = Some(threads);
        run(&cfg).unwrap();
        let mut cfg = config(SMALL, Mode::Lifetime, &dir.join("life"));
        cfg.threads = Some(threads);
        run(&cfg).unwrap();
        outputs.push((read(&dir, "critical.csv"), read(&dir.join("life"), "lifetime_alpha.csv")));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn every_figure_writes_data_and_script() {
    let tmp = tempfile::tempdir().unwrap();
    let expected: &[(Figure, &[&str])] = &[
        (Figure::Fig1, &["fig1.csv", "fig1_points.csv", "fig1_crossing.csv", "fig1.gp"]),
        (Figure::Fig2, &["fig2.csv", "fig2.gp"]),
        (Figure::Fig3, &["fig3.csv", "fig3.gp"]),
        (Figure::Fig4, &["fig4.csv", "fig4.gp"]),
        (Figure::Fig5, &["fig5.csv", "fig5.gp"]),
        (Figure::Fig6, &["fig6.csv", "fig6.gp"]),
        (Figure::Fig7, &["fig7.csv", "fig7.gp"]),
        (Figure::Fig8, &["fig8_alpha.csv", "fig8_lambda.csv"]),
        (Figure::Fig9, &["fig9_alpha.csv", "fig9_lambda.csv", "fig9_alpha.gp"]),
    ];
    for (fig, files) in expected {
        let dir = tmp.path().join(fig.id());
        let summary = run(&figure_config(SMALL, Mode::ReproduceFigure, Some(*fig), &dir)).unwrap();
        for f in *files {
            assert!(summary.files.iter().any(|s| s == f), "{fig}: missing {f} in {:?}", summary.files);
            assert!(dir.join(f).exists());
        }
    }
    let fig2 = read(&tmp.path().join("fig2"), "fig2.csv");
    assert!(fig2.starts_with("t,C1,C2\n"));
    assert_eq!(fig2.lines().count(), 1 + 81);
    let fig3 = read(&tmp.path().join("fig3"), "fig3.csv");
    assert!(fig3.starts_with("lambda,mean,deviation,quantity\n"));
    assert_eq!(fig3.lines().count(), 1 + 6 * 10);
    let fig5 = read(&tmp.path().join("fig5"), "fig5.csv");
    assert!(fig5.starts_with("lambda,alpha,C12_max,C34_max\n"));
}

#[test]
fn single_state_modes() {
    let tmp = tempfile::tempdir().unwrap();
    for mode in [Mode::Field, Mode::Relay, Mode::Clusters, Mode::Crossing, Mode::Boundary] {
        let dir = tmp.path().join(mode.name());
        run(&config(SMALL, mode, &dir)).unwrap();
    }
    let field = read(&tmp.path().join("field"), "field.csv");
    assert!(field.starts_with("t,i,j,C\n"));
    assert_eq!(field.lines().count(), 1 + 81 * 15);
    let relay = read(&tmp.path().join("relay"), "relay.csv");
    assert!(relay.starts_with("t,m,C_m,S_m\n"));
    let clusters = read(&tmp.path().join("clusters"), "clusters.csv");
    assert!(clusters.starts_with("M,i,lambda,alpha,p_max,t_peak,t_l,t_r,lifetime\n"));
    assert_eq!(clusters.lines().count(), 1 + 4 + 3 + 2);
    let rows = read(&tmp.path().join("boundary"), "boundary.csv").lines().count();
    assert_eq!(rows, 1 + 36);
}

#[test]
fn critical_row_for_three_spin_cluster() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[chain]\nn = 10\nregistration_time = 12.238\n[analysis]\nclusters = [[3, 4]]\n";
    run(&config(text, Mode::Critical, tmp.path())).unwrap();
    let csv = read(tmp.path(), "critical.csv");
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..2], ["3", "4"]);
    let (l, a): (f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap());
    assert!((l - 0.82).abs() <= 0.02 && (a - 0.76).abs() <= 0.02, "{l} {a}");
    assert_eq!(row[4], "true");
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xxrelay"))
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "mode = \"field\"\n[analysis]\nepsilon = 1.5\n").unwrap();
    let out = binary().args(["run", "--config"]).arg(&bad).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));

    let flat = tmp.path().join("flat.toml");
    fs::write(&flat, "[chain]\nn = 2\n[grids]\nnodes = 4\nhorizon = 3.0\n").unwrap();
    let out = binary().arg("optimal-time").arg("--config").arg(&flat).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn environment_sets_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, SMALL).unwrap();
    let target = tmp.path().join("from-env");
    let out =
        binary().args(["reproduce-figure", "fig2", "--config"]).arg(&cfg).env("XXRELAY_OUT", &target).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("fig2.csv").exists());
    assert!(target.join("manifest.toml").exists());
}
