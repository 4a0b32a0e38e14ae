use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use amrforge::cli::run;
use amrforge::{is_isomorphic, parse_penman, ParseMode};

const CORPUS: &str = "# ::id a
# ::snt The boy cannot go.
(p / possible-01
   :ARG1 (g / go-02
            :ARG0 (b / boy))
   :polarity -)

# ::id b
# ::snt The girl wants to see the city.
(w / want-01
   :ARG0 (g / girl)
   :ARG1 (s / see-01
            :ARG0 g
            :ARG1 (c / city)))
";

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn amrforge(args: &[&str], stdin: &str) -> Out {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("amrforge").chain(args.iter().copied());
    let code = run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    Out { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn linearize_golden_graph() {
    let out = amrforge(&["linearize"], "(p / possible :domain (g / go :arg0 (b / boy)) :polarity (n / negative))");
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(
        out.stdout.trim(),
        "( <Z0> possible :domain ( <Z1> go :arg0 ( <Z2> boy ) ) :polarity ( <Z3> negative ) )"
    );
}

#[test]
fn linearize_then_delinearize() {
    let lin = amrforge(&["linearize"], CORPUS);
    assert_eq!(lin.stdout.lines().count(), 2);
    let back = amrforge(&["delinearize"], &lin.stdout);
    assert_eq!(back.code, 0, "{}", back.stderr);
    let originals: Vec<_> = CORPUS.split("\n\n").map(|b| parse_penman(b, ParseMode::Strict).unwrap().graph).collect();
    let restored: Vec<_> =
        back.stdout.split("\n\n").filter(|b| !b.trim().is_empty()).map(|b| parse_penman(b, ParseMode::Strict).unwrap().graph).collect();
    assert_eq!(originals.len(), restored.len());
    for (a, b) in originals.iter().zip(&restored) {
        assert!(is_isomorphic(a, b).unwrap());
    }
}

#[test]
fn delinearize_lenient_repairs() {
    let broken = "( <Z0> want-01 :ARG0 ( <Z1> boy\n";
    assert_eq!(amrforge(&["delinearize"], broken).code, 1);
    let out = amrforge(&["--lenient", "delinearize"], broken);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("want-01") && !out.stderr.is_empty());
}

#[test]
fn validate_reports_each_graph() {
    let ok = amrforge(&["validate"], CORPUS);
    assert_eq!(ok.code, 0);
    assert_eq!(ok.stdout, "a\tok\nb\tok\n");
    let bad = amrforge(&["validate"], "# ::id x\n(a / boy :ARG0 (a / girl))\n");
    assert_eq!(bad.code, 1);
    assert!(bad.stdout.starts_with("x\tinvalid\t"));
}

#[test]
fn stats_table() {
    let out = amrforge(&["stats"], CORPUS);
    assert_eq!(out.code, 0);
    let rows: Vec<&str> = out.stdout.lines().take(3).collect();
    assert!(rows[0].starts_with("id\t"));
    assert!(rows[1].starts_with("a\t3\t2\t0"), "{}", rows[1]);
    assert!(rows[2].starts_with("b\t4\t2\t1"), "{}", rows[2]);
}

#[test]
fn build_tasks_emits_every_task_per_pair() {
    let out = amrforge(&["--seed", "7", "build-tasks"], CORPUS);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let lines: Vec<serde_json::Value> = out.stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 12);
    for l in &lines {
        let input = l["input"].as_array().unwrap();
        assert_eq!((input[0].as_str(), input[input.len() - 1].as_str()), (Some("<s>"), Some("</g>")));
        assert!(!l["output"].as_array().unwrap().iter().any(|t| t == "[mask]"));
    }
    assert!(out.stderr.contains("seed: 7"));
    let long = amrforge(&["build-tasks", "--tasks", "all", "--T", "100000"], CORPUS);
    assert_eq!(long.stdout.lines().count(), 12);
    let finetune = amrforge(&["build-tasks", "--tasks", "et_g2t,t_eg2g"], CORPUS);
    assert_eq!(finetune.stdout.lines().count(), 4);
}

#[test]
fn parallel_output_matches_serial() {
    let serial = amrforge(&["--seed", "3", "corrupt"], CORPUS);
    let parallel = amrforge(&["--seed", "3", "--jobs", "4", "corrupt"], CORPUS);
    assert_eq!(serial.code, 0);
    assert_eq!(serial.stdout, parallel.stdout);
    let tasks = amrforge(&["--seed", "3", "--jobs", "0", "build-tasks"], CORPUS);
    assert_eq!(tasks.stdout, amrforge(&["--seed", "3", "build-tasks"], CORPUS).stdout);
}

#[test]
fn smatch_and_bleu_reports() {
    let dir = tempfile::tempdir().unwrap();
    let gold = write(dir.path(), "gold.amr", CORPUS);
    let out = amrforge(&["smatch", &gold, &gold], "");
    assert_eq!(out.code, 0, "{}", out.stderr);
    let report: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(report["smatch"]["f1"], 1.0);
    assert!(report["wikification"].is_null());

    let hyp = write(dir.path(), "hyp.txt", "the boy can not go\n");
    let refs = write(dir.path(), "ref.txt", "the boy can not go\n");
    let out = amrforge(&["bleu", &hyp, &refs], "");
    let report: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(report["bleu"], 1.0);
}

#[test]
fn vocab_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vocab.txt");
    let out = amrforge(&["vocab", "--max-pointers", "8", "-o", path.to_str().unwrap()], CORPUS);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let tokens = std::fs::read_to_string(&path).unwrap();
    assert!(tokens.lines().any(|t| t == "<Z7>") && !tokens.lines().any(|t| t == "<Z8>"));
    assert!(tokens.lines().any(|t| t == "want-01"));
    let sidecar = std::fs::read_to_string(dir.path().join("vocab.txt.partitions.json")).unwrap();
    let _: serde_json::Value = serde_json::from_str(&sidecar).unwrap();
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(amrforge(&["no-such-command"], "").code, 2);
    assert_eq!(amrforge(&["build-tasks", "--T", "zero"], "").code, 2);
}

#[test]
fn bad_input_exits_one() {
    let out = amrforge(&["linearize"], "(a / boy");
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("error:"));
    assert_eq!(amrforge(&["build-tasks", "--tasks", "bogus"], CORPUS).code, 1);
}

#[test]
fn seed_comes_from_environment() {
    let go = |env: Option<&str>, args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_amrforge"));
        cmd.args(args).env_remove("AMRFORGE_SEED").stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
        if let Some(v) = env {
            cmd.env("AMRFORGE_SEED", v);
        }
        let mut child = cmd.spawn().unwrap();
        child.stdin.take().unwrap().write_all(CORPUS.as_bytes()).unwrap();
        let out = child.wait_with_output().unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let from_env = go(Some("11"), &["corrupt"]);
    assert_eq!(from_env, go(None, &["--seed", "11", "corrupt"]));
    assert_eq!(go(Some("5"), &["--seed", "11", "corrupt"]), from_env);
    assert_ne!(go(None, &["corrupt"]), from_env);
}
