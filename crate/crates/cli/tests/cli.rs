use std::path::Path;
use std::process::{Command, Output};

const SUMMARY_HEADER: &str = "method,problem,param,h,steps,max_global_error,max_energy_error,wall_seconds,solver_iters,status";

fn hamint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamint"))
        .args(args)
        .env("HAMINT_THREADS", "4")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

fn success(args: &[&str]) -> String {
    let output = hamint(args);
    assert_eq!(
        output.status.code(),
        Some(0),
        "{args:?}: {}",
        stderr(&output)
    );
    stdout(&output)
}

/// Summary rows as maps from column name to cell.
fn rows(csv: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|line| {
            header
                .iter()
                .zip(line.splitn(header.len(), ','))
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn number(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row[key]
        .parse()
        .unwrap_or_else(|_| panic!("{key} = {:?}", row[key]))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn summary_header_is_stable() {
    let out = success(&[
        "run",
        "--problem",
        "sho",
        "--method",
        "cgp2",
        "--h",
        "0.1",
        "--tend",
        "1",
    ]);
    assert_eq!(out.lines().next(), Some(SUMMARY_HEADER));
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn series_headers_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 3] = [
        (&["--problem", "sho", "--tend", "1"], "t,p1,q1,e_g,e_e"),
        (
            &["--problem", "kepler", "--e", "0.5", "--periods", "1"],
            "t,p1,p2,q1,q2,e_g,e_e",
        ),
        (
            &["--problem", "argon", "--tend", "10"],
            "t,p1,p2,p3,p4,p5,p6,p7,p8,p9,p10,p11,p12,p13,p14,\
             q1,q2,q3,q4,q5,q6,q7,q8,q9,q10,q11,q12,q13,q14,e_g,e_e",
        ),
    ];
    for (i, (problem, header)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("series{i}.csv"));
        let mut args = vec![
            "run",
            "--method",
            "cgp2",
            "--h",
            "0.5",
            "--series",
            path.to_str().unwrap(),
        ];
        args.extend_from_slice(problem);
        success(&args);
        assert_eq!(read(&path).lines().next(), Some(*header));
    }
}

#[test]
fn sho_table_value_is_reproduced() {
    let out = success(&[
        "run",
        "--problem",
        "sho",
        "--method",
        "cgp2",
        "--h",
        "0.05",
        "--tend",
        "1000",
    ]);
    let row = &rows(&out)[0];
    let eg = number(row, "max_global_error");
    assert!((eg / 8.67e-6 - 1.0).abs() <= 0.2, "{eg:e}");
    assert_eq!(row["steps"], "20000");
    assert_eq!(row["status"], "ok");
}

#[test]
fn zero_end_time_records_only_the_initial_sample() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("s.csv");
    let out = success(&[
        "run",
        "--problem",
        "sho",
        "--method",
        "cgp2",
        "--h",
        "0.05",
        "--tend",
        "0",
        "--series",
        series.to_str().unwrap(),
    ]);
    assert_eq!(rows(&out)[0]["steps"], "0");
    let text = read(&series);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(
        lines[1],
        "0.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0"
    );
}

#[test]
fn series_values_round_trip_and_argon_time_is_in_fsec() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("argon.csv");
    success(&[
        "run",
        "--problem",
        "argon",
        "--method",
        "irk4",
        "--h",
        "2",
        "--tend",
        "10",
        "--stride",
        "1",
        "--series",
        series.to_str().unwrap(),
    ]);
    let text = read(&series);
    let times: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(times.len(), 6);
    for (i, t) in times.iter().enumerate() {
        assert!((t - 2.0 * i as f64).abs() <= 1e-12, "{t}");
    }
    // No exact solution: e_g is empty, e_e is present.
    let last = text.lines().last().unwrap();
    let cells: Vec<&str> = last.split(',').collect();
    assert_eq!(cells[cells.len() - 2], "");
    assert!(cells[cells.len() - 1].parse::<f64>().is_ok());
}

fn without_wall_time(csv: &str) -> Vec<Vec<String>> {
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let wall = header.iter().position(|h| *h == "wall_seconds").unwrap();
    csv.lines()
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| *i != wall)
                .map(|(_, c)| c.to_string())
                .collect()
        })
        .collect()
}

#[test]
fn repeated_sweeps_are_identical_apart_from_timing() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let outputs: Vec<String> = dirs
        .iter()
        .map(|d| {
            success(&[
                "sweep",
                "--problem",
                "kepler",
                "--e",
                "0.5",
                "--method",
                "cgp2,irk4,glm:gauss2",
                "--h",
                "2pi/200,2pi/400",
                "--periods",
                "3",
                "--series-dir",
                d.path().to_str().unwrap(),
            ])
        })
        .collect();
    assert_eq!(
        without_wall_time(&outputs[0]),
        without_wall_time(&outputs[1])
    );
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for name in names {
        assert_eq!(
            read(&dirs[0].path().join(&name)),
            read(&dirs[1].path().join(&name))
        );
    }
    for row in rows(&outputs[0]) {
        assert!(number(&row, "solver_iters") > 0.0);
        assert_eq!(row["param"], "0.5");
    }
}

#[test]
fn sho_sweep_has_one_row_per_combination() {
    let out = success(&[
        "sweep",
        "--problem",
        "sho",
        "--method",
        "cgp2,irk4",
        "--h",
        "0.05,0.025,0.01,0.005",
        "--tend",
        "100",
    ]);
    let table = rows(&out);
    assert_eq!(table.len(), 8);
    let methods: Vec<&str> = table.iter().map(|r| r["method"].as_str()).collect();
    assert_eq!(
        methods,
        ["cgp2", "cgp2", "cgp2", "cgp2", "irk4", "irk4", "irk4", "irk4"]
    );
}

#[test]
fn high_eccentricity_errors_decrease_with_h() {
    let out = success(&[
        "sweep",
        "--problem",
        "kepler",
        "--e",
        "0.9",
        "--method",
        "cgp2",
        "--h",
        "2pi/400,2pi/800,2pi/1600,2pi/3200,2pi/6400",
        "--periods",
        "100",
    ]);
    let errors: Vec<f64> = rows(&out)
        .iter()
        .map(|r| number(r, "max_global_error"))
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    // The coarsest row matches the reference value 4.87 to 2%.
    assert!((errors[0] / 4.87 - 1.0).abs() <= 0.02, "{}", errors[0]);
}

#[test]
fn convergence_reports_fourth_order() {
    let out = success(&[
        "convergence",
        "--problem",
        "sho",
        "--method",
        "cgp2",
        "--h",
        "0.05,0.025",
        "--tend",
        "1000",
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "h,error,order");
    assert!(lines[1].ends_with(','));
    let order: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!((order - 4.0).abs() <= 0.2, "{order}");
}

#[test]
fn convergence_without_exact_solution_uses_a_reference_run() {
    let out = success(&[
        "convergence",
        "--problem",
        "argon",
        "--method",
        "irk4",
        "--h",
        "4,2",
        "--tend",
        "400",
    ]);
    let order: f64 = out
        .lines()
        .nth(2)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((order - 4.0).abs() <= 0.3, "{order}");
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(
        &config,
        "# test\nproblem = sho\nmethod = irk4\nh = 0.1\ntend = 1\n",
    )
    .unwrap();
    let out = success(&["run", "--config", config.to_str().unwrap(), "--h", "0.05"]);
    let row = &rows(&out)[0];
    assert_eq!(row["method"], "irk4");
    assert_eq!(row["steps"], "20");
}

#[test]
fn tableau_files_are_accepted_as_methods() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("euler.glm");
    std::fs::write(
        &file,
        "s 1\nr 1\np 1\nA\n0\nU\n1\nB\n1\nV\n1\nstarter identity\n",
    )
    .unwrap();
    let method = format!("glm:{}", file.display());
    let out = success(&[
        "run",
        "--problem",
        "sho",
        "--method",
        &method,
        "--h",
        "0.01",
        "--tend",
        "1",
    ]);
    assert_eq!(rows(&out)[0]["status"], "ok");

    std::fs::write(&file, "s 1\nr 1\np 1\nA\n0 0\n").unwrap();
    let output = hamint(&[
        "run",
        "--problem",
        "sho",
        "--method",
        &method,
        "--h",
        "0.01",
        "--tend",
        "1",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("matrix A"), "{}", stderr(&output));
}

#[test]
fn usage_errors_exit_with_2() {
    let cases: &[&[&str]] = &[
        &[
            "run",
            "--problem",
            "sho",
            "--method",
            "rk45",
            "--h",
            "0.1",
            "--tend",
            "1",
        ],
        &[
            "run",
            "--problem",
            "pendulum",
            "--method",
            "cgp2",
            "--h",
            "0.1",
            "--tend",
            "1",
        ],
        &[
            "run",
            "--problem",
            "sho",
            "--method",
            "cgp2",
            "--h",
            "-0.1",
            "--tend",
            "1",
        ],
        &["run", "--problem", "sho", "--method", "cgp2", "--h", "0.1"],
        &[
            "run",
            "--problem",
            "kepler",
            "--e",
            "1.2",
            "--method",
            "cgp2",
            "--h",
            "0.1",
            "--periods",
            "1",
        ],
        &[
            "run",
            "--problem",
            "sho",
            "--method",
            "cgp2",
            "--h",
            "0.1,0.05",
            "--tend",
            "1",
        ],
        &[
            "run",
            "--problem",
            "sho",
            "--method",
            "cgp2",
            "--h",
            "0.1",
            "--tend",
            "1",
            "--bogus",
        ],
        &[
            "sweep",
            "--problem",
            "sho",
            "--method",
            "cgp2",
            "--h",
            "",
            "--tend",
            "1",
        ],
        &[
            "convergence",
            "--problem",
            "sho",
            "--method",
            "cgp2",
            "--h",
            "0.1",
            "--tend",
            "1",
        ],
        &[
            "convergence",
            "--problem",
            "sho",
            "--method",
            "cgp2",
            "--h",
            "0.1,0.05",
            "--tend",
            "1",
            "--metric",
            "x",
        ],
    ];
    for args in cases {
        let output = hamint(args);
        assert_eq!(
            output.status.code(),
            Some(2),
            "{args:?}: {}",
            stderr(&output)
        );
        assert!(
            output.stdout.is_empty(),
            "no output before validation: {args:?}"
        );
    }
}

#[test]
fn numerical_failures_exit_with_1_and_name_the_step() {
    let output = hamint(&[
        "run",
        "--problem",
        "sho",
        "--method",
        "cgp2",
        "--h",
        "3",
        "--tend",
        "30",
        "--newton-fallback",
        "false",
    ]);
    assert_eq!(output.status.code(), Some(1));
    let message = stderr(&output);
    assert!(
        message.contains("step 1") && message.contains("residual"),
        "{message}"
    );
}

#[test]
fn failed_sweep_rows_are_marked_and_the_sweep_continues() {
    let output = hamint(&[
        "sweep",
        "--problem",
        "sho",
        "--method",
        "cgp2",
        "--h",
        "3,0.05",
        "--tend",
        "30",
        "--newton-fallback",
        "false",
    ]);
    assert_eq!(output.status.code(), Some(1));
    let table = rows(&stdout(&output));
    assert_eq!(table.len(), 2);
    assert!(table[0]["status"].contains("failed"), "{:?}", table[0]);
    assert_eq!(table[0]["max_global_error"], "");
    assert_eq!(table[1]["status"], "ok");
}
