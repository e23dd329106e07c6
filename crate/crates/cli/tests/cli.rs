use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMOKE: &str = r#"
d = 1
n_list = [16, 32]
beta = 1
region = { shape = "interval", a = 0.25, b = 0.75 }
rho0 = { preset = "step" }
t_grid = [0.0, 0.01, 0.02]
dt_record = 0.005
epsilon = 0.1
replicas = 3
beta_list = [0, 1, "inf"]
n_grid = 64
master_seed = 11
"#;

const SUBCOMMANDS: [&str; 6] = ["simulate", "solve-pde", "converge", "phase", "spectrum", "geometry-check"];

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slowbond"))
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn stderr_line(o: &Output) -> String {
    let s = String::from_utf8_lossy(&o.stderr).into_owned();
    assert_eq!(s.trim_end().lines().count(), 1, "stderr: {s}");
    s.trim_end().to_string()
}

#[test]
fn every_subcommand_succeeds_and_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMOKE);
    for sub in SUBCOMMANDS {
        let a = tmp.path().join(format!("{sub}-a"));
        let b = tmp.path().join(format!("{sub}-b"));
        let oa = run(sub, &cfg, &a, &["--seed", "5", "--workers", "1"]);
        assert!(oa.status.success(), "{sub}: {}", String::from_utf8_lossy(&oa.stderr));
        let ob = run(sub, &cfg, &b, &["--seed", "5", "--workers", "3"]);
        assert!(ob.status.success());
        let (fa, fb) = (files(&a), files(&b));
        assert!(fa.iter().any(|(n, _)| n == "manifest.json"));
        assert!(fa.iter().any(|(n, _)| n.ends_with(".csv")));
        assert_eq!(fa, fb, "{sub} outputs differ between runs");
    }
}

#[test]
fn seed_changes_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMOKE);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run("simulate", &cfg, &a, &["--seed", "1"]).status.success());
    assert!(run("simulate", &cfg, &b, &["--seed", "2"]).status.success());
    let ta = fs::read(a.join("trajectory.csv")).unwrap();
    let tb = fs::read(b.join("trajectory.csv")).unwrap();
    assert_ne!(ta, tb);
}

#[test]
fn csv_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMOKE);
    let expect = [
        ("converge", "convergence.csv", "beta,alpha,N,observable,sup_t_error,mean,std,replicas"),
        ("phase", "phase.csv", "beta,reference_mode,error"),
        ("spectrum", "spectrum.csv", "mode,alpha,N_g,index,eigenvalue"),
        ("geometry-check", "identities.csv", "identity,region,refinement,residual"),
        ("geometry-check", "gamma.csv", "site_index,x1,set_name"),
        ("simulate", "trajectory.csv", "replica,t,observable_name,value"),
        ("solve-pde", "fields.csv", "t,cell_index,u1,value"),
    ];
    for (sub, file, header) in expect {
        let out = tmp.path().join(sub);
        if !out.exists() {
            assert!(run(sub, &cfg, &out, &[]).status.success());
        }
        let text = fs::read_to_string(out.join(file)).unwrap();
        assert_eq!(text.lines().next().unwrap(), header, "{file}");
    }
    let conv = fs::read_to_string(tmp.path().join("converge/convergence.csv")).unwrap();
    assert_eq!(conv.lines().count(), 1 + 2 * 4);
}

#[test]
fn manifest_has_no_timestamps_and_echoes_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMOKE);
    let out = tmp.path().join("o");
    assert!(run("converge", &cfg, &out, &["--seed", "42"]).status.success());
    let m = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(m.contains("\"master_seed\": 42"));
    assert!(m.contains("\"command\": \"converge\""));
    for word in ["time\"", "date", "host", "workers"] {
        assert!(!m.contains(word), "{word}");
    }
}

#[test]
fn missing_config_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("converge", &tmp.path().join("nope.toml"), tmp.path(), &[]);
    assert!(!o.status.success());
    assert!(stderr_line(&o).starts_with("error: io: "));
}

#[test]
fn invalid_configs_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = [
        SMOKE.replace("replicas = 3", "replicas = 0"),
        SMOKE.replace("n_list = [16, 32]", "n_list = [32, 16]"),
        SMOKE.replace("master_seed = 11", "observables = []\nmaster_seed = 11"),
        SMOKE.replace("master_seed = 11", "bogus_key = 1\nmaster_seed = 11"),
        "d = ".to_string(),
    ];
    for text in bad {
        let cfg = write_config(tmp.path(), &text);
        let o = run("converge", &cfg, &tmp.path().join("o"), &[]);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr_line(&o).starts_with("error: config: "), "{text}");
    }
}

#[test]
fn coarse_lattice_reports_resolution_category() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMOKE
        .replace("beta = 1", "beta = \"inf\"")
        .replace("n_list = [16, 32]", "n_list = [4]")
        .replace("a = 0.25, b = 0.75", "a = 0.25, b = 0.3");
    let cfg = write_config(tmp.path(), &text);
    let o = run("simulate", &cfg, &tmp.path().join("o"), &[]);
    assert!(!o.status.success());
    assert!(stderr_line(&o).starts_with("error: resolution_too_coarse: "));
}

#[test]
fn phase_requires_beta_list() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMOKE.replace("beta_list = [0, 1, \"inf\"]\n", ""));
    let o = run("phase", &cfg, &tmp.path().join("o"), &[]);
    assert!(!o.status.success());
    assert!(stderr_line(&o).starts_with("error: config: "));
}
