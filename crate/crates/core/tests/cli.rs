use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quaydeck::baselines::StrategyKind;
use quaydeck::bench::{read_csv, RunRecord, StatsRow};
use quaydeck::cli::SolutionFile;
use quaydeck::model::{Instance, TimingParams};
use quaydeck::sim::{evaluate, SimTrace};

fn quaydeck(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quaydeck"))
        .args(args)
        .current_dir(dir)
        .env_remove("QUAYDECK_THREADS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn generate_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let o = quaydeck(
        &[
            "generate",
            "--scenario",
            "6",
            "--seed",
            "42",
            "-o",
            "inst.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let inst =
        Instance::from_json(&fs::read_to_string(dir.path().join("inst.json")).unwrap()).unwrap();
    assert_eq!(inst.plan.len(), 5);
    assert_eq!(inst.plan.max_height, 4);
    let o = quaydeck(&["validate", "inst.json"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("ok"));

    let o = quaydeck(
        &["generate", "--stacks", "7", "--max-height", "3"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let custom = Instance::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(custom.plan.len(), 7);
}

#[test]
fn solve_is_repeatable_and_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&quaydeck(
            &[
                "generate",
                "--scenario",
                "6",
                "--seed",
                "3",
                "-o",
                "inst.json"
            ],
            dir.path()
        )),
        0
    );
    let args = [
        "solve",
        "inst.json",
        "--strategy",
        "qcdc-dr-ga",
        "--seed",
        "7",
        "--generations",
        "60",
    ];
    let mut outputs = Vec::new();
    for (out, threads) in [("a", "1"), ("b", "3")] {
        let mut full = args.to_vec();
        full.extend(["-o", out]);
        let o = Command::new(env!("CARGO_BIN_EXE_quaydeck"))
            .args(&full)
            .current_dir(dir.path())
            .env("QUAYDECK_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((
            fs::read_to_string(dir.path().join(out).join("solution.json")).unwrap(),
            fs::read_to_string(dir.path().join(out).join("trace.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);

    let inst =
        Instance::from_json(&fs::read_to_string(dir.path().join("inst.json")).unwrap()).unwrap();
    let sol: SolutionFile = serde_json::from_str(&outputs[0].0).unwrap();
    let trace = SimTrace::read_csv(outputs[0].1.as_bytes()).unwrap();
    let (cost, replayed) =
        evaluate(&sol.chromosome(), &inst.plan, &TimingParams::default()).unwrap();
    assert_eq!(cost, sol.cost);
    assert_eq!(replayed, trace);
}

#[test]
fn solve_to_stdout_and_strategy_choice() {
    let dir = tempfile::tempdir().unwrap();
    quaydeck(
        &[
            "generate",
            "--scenario",
            "6",
            "--seed",
            "1",
            "-o",
            "inst.json",
        ],
        dir.path(),
    );
    let o = quaydeck(
        &[
            "solve",
            "inst.json",
            "--strategy",
            "ilsrs2",
            "--generations",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let sol: SolutionFile = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(sol.strategy, StrategyKind::Ilsrs2);
    assert_eq!(sol.cost.duals, 0);
    assert_eq!(sol.unload_seq, vec![1, 2, 3, 4, 5]);
}

#[test]
fn ga_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    quaydeck(
        &["generate", "--scenario", "6", "-o", "inst.json"],
        dir.path(),
    );
    fs::write(
        dir.path().join("ga.conf"),
        "# quick\npopulation_size = 12\nmax_generations = 5\n",
    )
    .unwrap();
    let o = quaydeck(
        &["solve", "inst.json", "--ga-config", "ga.conf"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    fs::write(dir.path().join("bad.conf"), "population = 12\n").unwrap();
    let o = quaydeck(
        &["solve", "inst.json", "--ga-config", "bad.conf"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.conf"));
    let o = quaydeck(
        &["solve", "inst.json", "--elite-fraction", "1.2"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&quaydeck(&[], dir.path())), 1);
    assert_eq!(code(&quaydeck(&["frobnicate"], dir.path())), 1);
    assert_eq!(code(&quaydeck(&["--help"], dir.path())), 0);
    assert_eq!(
        code(&quaydeck(&["generate", "--scenario", "7"], dir.path())),
        1
    );
    assert_eq!(code(&quaydeck(&["solve", "missing.json"], dir.path())), 2);
    assert_eq!(
        code(&quaydeck(
            &["solve", "x.json", "--strategy", "fastest"],
            dir.path()
        )),
        1
    );
    assert_eq!(
        code(&quaydeck(&["solve", "x.json", "--alpha=-3"], dir.path())),
        1
    );

    fs::write(dir.path().join("broken.json"), "{\"plan\":").unwrap();
    let o = quaydeck(&["validate", "broken.json"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.json"));

    fs::write(
        dir.path().join("over.json"),
        r#"{"plan":{"max_height":2,"stacks":[{"stay":1,"unload":2,"load":["1A"]}]},
            "yard":{"cap":1,"stacks":[["1A","b"]]}}"#,
    )
    .unwrap();
    let o = quaydeck(&["validate", "over.json"], dir.path());
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("over.json") && err.contains("height cap exceeded"),
        "{err}"
    );
    assert_eq!(code(&quaydeck(&["solve", "over.json"], dir.path())), 2);

    // a yard with no room to move a blocker
    fs::write(
        dir.path().join("stuck.json"),
        r#"{"plan":{"max_height":2,"stacks":[{"stay":0,"unload":1,"load":["1A","1B"]}]},
            "yard":{"cap":2,"stacks":[["1A","1B"]]}}"#,
    )
    .unwrap();
    assert_eq!(
        code(&quaydeck(
            &["solve", "stuck.json", "--strategy", "greedy"],
            dir.path()
        )),
        2
    );

    let o = Command::new(env!("CARGO_BIN_EXE_quaydeck"))
        .args(["bench", "--scenarios", "6", "--reps", "2"])
        .current_dir(dir.path())
        .env("QUAYDECK_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert_eq!(code(&quaydeck(&["bench", "--reps", "1"], dir.path())), 1);
}

#[test]
fn bench_reports_improvement_on_smallest_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = quaydeck(
        &[
            "bench",
            "--scenarios",
            "5,6",
            "--strategies",
            "greedy,qcdc-dr-ga",
            "--reps",
            "20",
            "--seed",
            "1",
            "-o",
            "out",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let stats: Vec<StatsRow> = read_csv(&out.join("stats.csv")).unwrap();
    let row = stats
        .iter()
        .find(|s| s.scenario == 6 && s.strategy == StrategyKind::Greedy)
        .unwrap();
    assert!(row.improvement_pct.unwrap() > 0.0, "{row:?}");
    let runs: Vec<RunRecord> = read_csv(&out.join("runs.csv")).unwrap();
    assert_eq!(runs.len(), 2 * 2 * 20);
    assert_eq!(runs[0].seed, 1);
    for f in ["history.csv", "plot_greedy.csv", "plot_qcdc-dr-ga.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let plot = fs::read_to_string(out.join("plot_greedy.csv")).unwrap();
    let lines: Vec<&str> = plot.lines().collect();
    assert_eq!(lines[0], "stacks,mean_minutes");
    assert!(lines[1].starts_with("5,") && lines[2].starts_with("10,"));
}
