use std::path::Path;
use std::process::{Command, Output};

fn edm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn edm")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

const STEP: &str = "t_s,p_w\n0,100\n1,100\n2,100\n3,100\n4,100\n5,100\n6,100\n7,100\n8,100\n9,100\n\
10,800\n11,800\n12,800\n13,800\n14,800\n15,800\n16,800\n17,800\n18,800\n19,800\n";

#[test]
fn meter_and_reconstruct_a_step() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "step.csv", STEP);
    let out = edm(
        d,
        &[
            "meter", "--input", "step.csv", "--d1", "50", "--d2", "inf", "--out", "ev.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        read(d, "ev.csv"),
        "t_end_s,energy_ws,triggers\n10,1000,D1\n20,8000,BILL\n"
    );
    assert_eq!(
        code(&edm(d, &["reconstruct", "--events", "ev.csv", "--out", "rec.csv"])),
        0
    );
    assert_eq!(read(d, "rec.csv"), STEP);
}

#[test]
fn sample_and_reconstruct_intervals_with_partial_step() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "step.csv", STEP);
    assert_eq!(
        code(&edm(
            d,
            &["sample", "--input", "step.csv", "--step", "8", "--out", "iv.csv"]
        )),
        0
    );
    assert_eq!(
        read(d, "iv.csv"),
        "t_end_s,energy_ws,partial\n8,800,0\n16,5000,0\n20,3200,1\n"
    );
    assert_eq!(
        code(&edm(d, &["reconstruct", "--intervals", "iv.csv", "--out", "rec.csv"])),
        0
    );
    let rec = read(d, "rec.csv");
    assert!(rec.starts_with("t_s,p_w\n0,100\n"));
    assert!(rec.contains("\n8,625\n") && rec.ends_with("19,800\n"), "{rec}");
}

#[test]
fn compare_prints_report_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "step.csv", STEP);
    let out = edm(d, &["compare", "--input", "step.csv", "--tdm", "10,20", "--edm", "0:0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "label,points,peak_w,peak_pct,rms_w,loss_pct\n\
         TDM-10s,2,800.0,100.0,0.0,100.0\n\
         TDM-20s,1,450.0,56.2,350.0,62.3\n\
         EDM-0:0,2,800.0,100.0,0.0,100.0\n"
    );
}

#[test]
fn dou_with_percent_limits_and_penalty() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "step.csv", STEP);
    write(d, "lim.csv", "t_end_s,p_w\n5,50\n20,10\n");
    let out = edm(
        d,
        &[
            "dou",
            "--input",
            "step.csv",
            "--limits",
            "lim.csv",
            "--percent-of",
            "1000",
            "--tolerance",
            "0",
            "--price",
            "2",
            "--out",
            "e.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(d, "e.csv");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("segment_end_s,limit_w,excess_wh"));
    // 5 s at 800 over a 500 W limit, then 5 s at 800 and 10 s at 100 W less 100 W.
    assert!(text.contains("5,500,0.41666"), "{text}");
    assert!(text.contains("20,100,0.97222"), "{text}");
    assert!(text.lines().last().unwrap().starts_with("summary,area_kwh="));
}

#[test]
fn duration_curve_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "p.csv", "t_s,p_w\n0,1\n60,3\n120,2\n");
    assert_eq!(code(&edm(d, &["duration", "--input", "p.csv", "--out", "c.csv"])), 0);
    assert_eq!(read(d, "c.csv"), "rank_s,p_w\n60,3\n120,2\n180,1\n");
}

fn history(d: &Path) {
    let mut text = String::from("day_index,interval_index,p_w,is_event_day\n");
    for (day, level) in [10, 30, 20, 50, 40, 70].iter().enumerate() {
        for i in 0..24 {
            let event = day == 5;
            let p = if event && i >= 10 { 5 } else { *level };
            text.push_str(&format!("{day},{i},{p},{}\n", u8::from(event)));
        }
    }
    write(d, "hist.csv", &text);
}

#[test]
fn baseline_high_low_and_adjusted() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    history(d);
    let base = [
        "baseline",
        "--history",
        "hist.csv",
        "--x",
        "2",
        "--y",
        "5",
        "--event-day",
        "5",
    ];
    let run = |extra: &[&str]| {
        let args: Vec<&str> = base.iter().chain(extra).copied().collect();
        let out = edm(d, &args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        read(d, "b.csv")
    };
    let high = run(&["--out", "b.csv"]);
    assert!(
        high.starts_with("interval_index,p_w\n0,45\n") && high.ends_with("23,45\n"),
        "{high}"
    );
    let low = run(&["--mode", "low", "--out", "b.csv"]);
    assert!(low.starts_with("interval_index,p_w\n0,15\n"), "{low}");
    // The event day reads 70 W for the first ten hours: +25 W from hour 10 on.
    let adj = run(&["--adjust", "--notification", "36000", "--out", "b.csv"]);
    assert!(adj.contains("\n9,45\n") && adj.contains("\n10,70\n"), "{adj}");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    history(d);
    write(d, "step.csv", STEP);
    let cases: [&[&str]; 6] = [
        &[
            "baseline",
            "--history",
            "hist.csv",
            "--x",
            "6",
            "--y",
            "5",
            "--event-day",
            "5",
            "--out",
            "b.csv",
        ],
        &[
            "baseline",
            "--history",
            "hist.csv",
            "--x",
            "2",
            "--y",
            "5",
            "--event-day",
            "5",
            "--adjust",
            "--out",
            "b.csv",
        ],
        &[
            "meter", "--input", "step.csv", "--d1", "nan", "--d2", "1", "--out", "e.csv",
        ],
        &[
            "meter",
            "--input",
            "step.csv",
            "--d1",
            "1",
            "--d2",
            "1",
            "--billing",
            "0",
            "--out",
            "e.csv",
        ],
        &["sample", "--input", "step.csv", "--step", "0", "--out", "i.csv"],
        &["compare", "--input", "step.csv", "--edm", "500"],
    ];
    for args in cases {
        let out = edm(d, args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn data_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "bad.csv", "t_s,p_w\n0,1\n1,oops\n");
    let out = edm(
        d,
        &[
            "meter", "--input", "bad.csv", "--d1", "1", "--d2", "1", "--out", "e.csv",
        ],
    );
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    history(d);
    let out = edm(
        d,
        &[
            "baseline",
            "--history",
            "hist.csv",
            "--x",
            "2",
            "--y",
            "9",
            "--event-day",
            "5",
            "--out",
            "b.csv",
        ],
    );
    assert_eq!(code(&out), 1);
}

#[test]
fn help_documents_csv_headers() {
    let out = Command::new(env!("CARGO_BIN_EXE_edm")).arg("--help").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for header in [
        "t_s,p_w",
        "t_end_s,energy_ws,triggers",
        "t_end_s,energy_ws,partial",
        "rank_s,p_w",
    ] {
        assert!(text.contains(header), "missing {header}");
    }
}

#[test]
fn synth_seed_override_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "spec.ini", "[grid]\nhorizon_s = 120\ntau_s = 1\n[base]\npower_w = 50\n[noise]\namplitude_w = 2\n[seed]\nvalue = 1\n[pulses]\npulse = 10,20,900\n");
    assert_eq!(code(&edm(d, &["synth", "--spec", "spec.ini", "--out", "a.csv"])), 0);
    assert_eq!(
        code(&edm(
            d,
            &[
                "synth",
                "--spec",
                "spec.ini",
                "--seed",
                "1",
                "--out",
                "b.csv",
                "--manifest",
                "m.json"
            ]
        )),
        0
    );
    assert_eq!(
        code(&edm(
            d,
            &["synth", "--spec", "spec.ini", "--seed", "2", "--out", "c.csv"]
        )),
        0
    );
    assert_eq!(read(d, "a.csv"), read(d, "b.csv"));
    assert_ne!(read(d, "a.csv"), read(d, "c.csv"));
    let manifest: serde_json::Value = serde_json::from_str(&read(d, "m.json")).unwrap();
    assert_eq!(manifest["command"], "synth");
    assert_eq!(manifest["parameters"]["seed"], "1");
    assert_eq!(manifest["inputs"][0], "spec.ini");
    assert_eq!(manifest["summary"]["samples"], "120");
}
