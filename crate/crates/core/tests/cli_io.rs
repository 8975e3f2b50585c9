use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use qp_transport::dynamics::{pump_edge_mode, ChannelSpec, IntegratorConfig};
use qp_transport::io::commands::reread_outputs;
use qp_transport::io::formats::read_json;
use qp_transport::io::{execute, parse_cli, read_csv, RunConfig, OUTPUT_ROOT_ENV};
use qp_transport::lattice::{diagonalize, partition_clusters, Channel, Lattice, ModelKind, ModelParams};

fn config(args: &[&str], out: &Path) -> RunConfig {
    let mut argv = vec!["qpt"];
    argv.extend_from_slice(args);
    let out = out.to_str().unwrap().to_string();
    argv.extend_from_slice(&["--output-dir", &out]);
    parse_cli(argv).unwrap()
}

fn run(args: &[&str], out: &Path) -> RunConfig {
    let cfg = config(args, out);
    execute(&cfg).unwrap();
    cfg
}

fn qpt(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qpt"))
        .args(args)
        .env_remove(OUTPUT_ROOT_ENV)
        .output()
        .unwrap()
}

#[test]
fn flags_override_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.cfg");
    std::fs::write(
        &file,
        "# shared settings\n[model]\nV = 2.5\nN = 21\n\n[channel]\nomega = 1e-4\nname = B\n",
    )
    .unwrap();
    let defaults = parse_cli(["qpt", "pump"]).unwrap();
    assert_eq!(defaults.channel.omega, 1e-5);
    assert_eq!(defaults.model.n, 33);

    let f = file.to_str().unwrap();
    let cfg = parse_cli(["qpt", "pump", "--config", f, "--omega", "1e-3"]).unwrap();
    assert_eq!(cfg.channel.omega, 1e-3);
    assert_eq!(cfg.model.v, 2.5);
    assert_eq!(cfg.model.n, 21);
    assert_eq!(cfg.channel.name, Channel::B);
    assert_eq!(cfg.model.u, 1.0);
}

#[test]
fn phases_are_given_in_units_of_pi() {
    let cfg = parse_cli(["qpt", "pump", "--phi-start", "0.5", "--phi-end", "1.5"]).unwrap();
    let spec = cfg.channel.pump_spec().unwrap();
    assert!((spec.phi_start - 0.5 * PI).abs() < 1e-15);
    assert!((spec.phi_end - 1.5 * PI).abs() < 1e-15);
    let cfg = parse_cli(["qpt", "spectrum", "--phi", "0.99"]).unwrap();
    assert!((cfg.model.params().phi - 0.99 * PI).abs() < 1e-15);
}

#[test]
fn bad_input_is_a_usage_error() {
    for argv in [
        vec!["qpt", "pump", "--omega", "0"],
        vec!["qpt", "spectrum", "--N", "1"],
        vec!["qpt", "spectrum", "--phi", "3"],
        vec!["qpt", "sweep", "--quantity", "nonsense"],
        vec!["qpt", "experiment"],
        vec!["qpt", "experiment", "--name", "fig9"],
    ] {
        let err = parse_cli(argv.clone()).unwrap_err();
        assert_eq!(err.exit_code(), 1, "{argv:?}: {err}");
    }
}

#[test]
fn every_command_writes_rereadable_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["spectrum", "--V", "2"],
        vec!["ipr-scan", "--v-min", "1", "--v-max", "2", "--v-step", "0.5"],
        vec!["pump", "--omega", "1e-2", "--samples", "20"],
        vec!["transfer", "--omega", "1e-2", "--N", "20", "--samples", "20"],
        vec!["gap", "--channel", "B", "--V", "1.2"],
        vec!["vc-find", "--channel", "B", "--v-min", "0.5", "--v-max", "3"],
        vec!["sweep", "--quantity", "level-ipr", "--v-count", "2", "--y-count", "3"],
        vec!["experiment", "--name", "fig5_edge_weights", "--V", "1,2"],
    ];
    for args in commands {
        let cfg = run(&args, dir.path());
        let run_dir = cfg.run_dir();
        let manifest = read_json(&run_dir.join("manifest.json")).unwrap();
        let files: Vec<String> = manifest["files"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| f.as_str().unwrap().to_string())
            .collect();
        assert!(!files.is_empty(), "{args:?}");
        for f in &files {
            let path = run_dir.join(f);
            if f.ends_with(".csv") {
                let table = read_csv(&path).unwrap();
                assert!(!table.rows.is_empty(), "{f} is empty");
            } else if f.ends_with(".json") {
                read_json(&path).unwrap();
            }
        }
        assert!(run_dir.starts_with(dir.path()));
        assert!(run_dir.ends_with(Path::new(cfg.experiment.name.map_or(cfg.command.as_str(), |n| n.as_str())).join("default")));
    }
}

#[test]
fn manifest_files_round_trip_through_reread() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&["spectrum", "--model", "aa", "--V", "3", "--N", "55"], dir.path());
    let outcome = execute(&cfg).unwrap();
    let tables = reread_outputs(&cfg.run_dir(), &outcome.manifest).unwrap();
    assert_eq!(tables.len(), 1);
    let energies = tables[0].floats("energy").unwrap();
    let direct = diagonalize(&Lattice::new(ModelParams::aa(3.0, 0.99 * PI, 55)).unwrap().hamiltonian()).unwrap();
    assert_eq!(energies.len(), 55);
    for (k, e) in energies.iter().enumerate() {
        assert_eq!(*e, direct.energies[k], "CSV floats must round-trip exactly");
    }
}

#[test]
fn single_cell_sweep_equals_direct_call() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = run(
        &[
            "sweep", "--quantity", "pump-fidelity", "--v-min", "1", "--v-max", "1", "--v-count", "1",
            "--y-min", "1e-2", "--y-max", "1e-2", "--y-count", "1", "--samples", "10",
        ],
        dir.path(),
    );
    let table = read_csv(&cfg.run_dir().join("data/sweep_pump-fidelity.csv")).unwrap();
    let swept = table.floats("fidelity").unwrap()[0];
    let integrator = IntegratorConfig {
        sample_count: 10,
        ..IntegratorConfig::default()
    };
    let spec = ChannelSpec::pump(Channel::A, 1e-2).unwrap();
    let direct = pump_edge_mode(&ModelParams::sample(1.0, 0.99 * PI, 33), Channel::A, &spec, &integrator)
        .unwrap()
        .fidelity();
    assert_eq!(swept, direct);

    let cfg = run(
        &[
            "sweep", "--quantity", "level-gap", "--model", "aa", "--V", "2", "--v-min", "2", "--v-max", "2",
            "--v-count", "1", "--y-min", "0.7", "--y-max", "0.7", "--y-count", "1", "--tag", "gap",
        ],
        dir.path(),
    );
    let table = read_csv(&cfg.run_dir().join("data/sweep_level-gap.csv")).unwrap();
    let lattice = Lattice::new(ModelParams::aa(2.0, 0.99 * PI, 33)).unwrap();
    let mid = diagonalize(&lattice.hamiltonian_at(0.99 * PI)).unwrap();
    let k = partition_clusters(&mid).unwrap().bulk_subchannel(Channel::A);
    let at = diagonalize(&lattice.hamiltonian_at(0.7 * PI)).unwrap();
    assert_eq!(table.floats("gap").unwrap()[0], at.energies[k + 1] - at.energies[k]);
    assert_eq!(cfg.model.kind, ModelKind::Aa);
}

fn sweep_args<'a>(tag: &'a str, workers: &'a str) -> Vec<&'a str> {
    vec![
        "sweep", "--quantity", "level-gap", "--v-count", "4", "--y-count", "4", "--tag", tag, "--workers", workers,
    ]
}

#[test]
fn interrupted_sweep_resumes_to_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let full = run(&sweep_args("full", "1"), dir.path());
    let reference = std::fs::read(full.run_dir().join("data/sweep_level-gap.csv")).unwrap();

    let mut args = sweep_args("resumed", "1");
    args.extend_from_slice(&["--cell-budget", "5"]);
    let partial = run(&args, dir.path());
    let partial_csv = std::fs::read_to_string(partial.run_dir().join("data/sweep_level-gap.csv")).unwrap();
    assert!(partial_csv.contains(",pending"));
    let resumed = run(&sweep_args("resumed", "1"), dir.path());
    let resumed_csv = std::fs::read(resumed.run_dir().join("data/sweep_level-gap.csv")).unwrap();
    assert_eq!(reference, resumed_csv);
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let one = run(&sweep_args("w1", "1"), dir.path());
    let two = run(&sweep_args("w2", "2"), dir.path());
    let a = std::fs::read(one.run_dir().join("data/sweep_level-gap.csv")).unwrap();
    let b = std::fs::read(two.run_dir().join("data/sweep_level-gap.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let ok = qpt(&["spectrum", "--N", "21", "--output-dir", out]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    assert_eq!(qpt(&["--help"]).status.code(), Some(0));
    assert_eq!(qpt(&["pump", "--omega", "-1"]).status.code(), Some(1));
    assert_eq!(qpt(&["pump", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(qpt(&["frobnicate"]).status.code(), Some(1));

    let numerical = qpt(&["vc-find", "--N", "33", "--v-min", "0.5", "--v-max", "0.6", "--output-dir", out]);
    assert_eq!(numerical.status.code(), Some(2));

    let blocker = dir.path().join("not-a-dir");
    std::fs::write(&blocker, "x").unwrap();
    let io = qpt(&["spectrum", "--output-dir", blocker.to_str().unwrap()]);
    assert_eq!(io.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&io.stderr).contains("not-a-dir"));
}

#[test]
fn environment_sets_default_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_qpt"))
        .args(["spectrum", "--N", "21", "--tag", "env"])
        .env(OUTPUT_ROOT_ENV, dir.path())
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(dir.path().join("spectrum/env/manifest.json").is_file());
    assert!(dir.path().join("spectrum/env/data/spectrum.csv").is_file());
}
