use std::path::Path;
use std::process::{Command, Output};

fn lzero(dir: &Path, args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lzero"));
    cmd.current_dir(dir).args(args).env_remove("LZERO_THREADS").env("LZERO_CACHE_DIR", "off");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const ZETA_MINUS_TWO: &str = "seed = 4\n[lfunctions]\nzeta = character 1 0\n[polynomial]\n[(1,1,0)] 1\n[(1,-2,0)] 0\n[zeros]\nsigma = 1.3 1.75\nt_min = -30\nt_max = 30\nstep = 0.01\nthreshold = 0.3\n";

#[test]
fn eval_zeta_two_partial_sum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "eval.cfg", "[lfunctions]\nzeta = character 1 0\n[eval]\npoints = 2 0\nm = 100\n");
    let out = lzero(dir.path(), &["eval", "-c", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let row = text.lines().find(|l| l.starts_with("zeta,2,0,dirichlet,")).unwrap();
    let re: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert!((re - 1.6349839001848923).abs() < 1e-13);
}

#[test]
fn monomial_zero_search_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "mono.cfg",
        "[lfunctions]\nzeta = character 1 0\nl5 = character 5 1\n[polynomial]\n[(1,2,0);(2,-1,0)] 1 2\n[zeros]\noutput = z.csv\n",
    );
    let out = lzero(dir.path(), &["zeros", "-c", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("monomial: search skipped"));
    let csv = std::fs::read_to_string(dir.path().join("z.csv")).unwrap();
    let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, vec!["sigma_center,t_center,rho,winding,gamma,errbound,shift_t"]);
}

#[test]
fn parse_errors_report_lines_and_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "seed = 1\n[ortho]\nq = 7\nbogus = 1\n");
    let out = lzero(dir.path(), &["ortho", "-c", &cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
    let cfg = write(dir.path(), "missing.cfg", "[lfunctions]\nf = file nowhere.txt\n[eval]\n");
    let out = lzero(dir.path(), &["eval", "-c", &cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"));
}

#[test]
fn zeros_are_certified_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "z.cfg", ZETA_MINUS_TWO);
    let a = lzero(dir.path(), &["zeros", "-c", &cfg, "-o", "a.csv"], &[]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let b = lzero(dir.path(), &["zeros", "-c", &cfg, "-o", "b.csv"], &[("LZERO_THREADS", "3")]);
    assert_eq!(b.status.code(), Some(0));
    let ta = std::fs::read(dir.path().join("a.csv")).unwrap();
    let tb = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("# lzero zeros\n# config_sha256 = "));
    assert!(text.contains("# seed = 4\n"));
    // the real zero of zeta(s) - 2 near 1.7286 plus conjugate pairs
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("sigma"))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(rows.iter().any(|r| (r[0] - 1.7286472389981835).abs() < 1e-9 && r[1].abs() < 1e-9));
    assert!(rows.iter().all(|r| r[3] == 1.0 && r[4] > r[5]));
    assert_eq!(rows.len() % 2, 1);
}

#[test]
fn seed_flows_into_header_and_targets() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "w.cfg",
        "seed = 2\n[lfunctions]\nf12 = newform 12\nf16 = newform 16\n[witness]\ny = 10\npmax = 20000\nwindow = 100\n",
    );
    let run = |seed: Option<&str>| {
        let mut args = vec!["witness", "-c", &cfg];
        if let Some(s) = seed {
            args.extend(["--seed", s]);
        }
        let out = lzero(dir.path(), &args, &[]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        stdout(&out)
    };
    let a = run(None);
    assert!(a.contains("# seed = 2\n"));
    assert_eq!(a, run(None));
    let b = run(Some("3"));
    assert!(b.contains("# seed = 3\n"));
    let target = |t: &str| t.lines().find(|l| l.starts_with("# target_1")).unwrap().to_string();
    assert_ne!(target(&a), target(&b));
}

#[test]
fn constructive_scale_refusal_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "[lfunctions]\nf12 = newform 12\nf16 = newform 16\n[witness]\nstrategy = constructive\ny = 1000\npmax = 100000\nsigma = 1.02\nm = 60\ntargets = 1 0; 1 0\n",
    );
    let out = lzero(dir.path(), &["witness", "-c", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("scale"));
}

#[test]
fn density_rows_at_half_and_full_height() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.cfg", "[hurwitz]\na = 1\nq = 5\n[density]\nt = 10\nlines = 2\n");
    let out = lzero(dir.path(), &["density", "-c", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let body: Vec<String> = stdout(&out).lines().filter(|l| !l.starts_with('#')).map(String::from).collect();
    assert_eq!(body[0], "T,count");
    assert_eq!(body.len(), 3);
    assert!(body[1].starts_with("5,") && body[2].starts_with("10,"));
}

#[test]
fn coefficient_tables_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "[lfunctions]\nf = newform 16\n[coeffs]\nm = 500\noutput = f16.txt\n");
    assert_eq!(lzero(dir.path(), &["coeffs", "-c", &cfg], &[]).status.code(), Some(0));
    let cfg = write(dir.path(), "v.cfg", "[coeffs]\nvalidate = f16.txt\nexpect_degree = 2\nexpect_conductor = 1\n");
    let out = lzero(dir.path(), &["coeffs", "-c", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("newform_k16,2,1,500,ok"));
    let cfg = write(dir.path(), "w.cfg", "[coeffs]\nvalidate = f16.txt\nexpect_degree = 1\n");
    assert_eq!(lzero(dir.path(), &["coeffs", "-c", &cfg], &[]).status.code(), Some(1));
}

#[test]
fn cache_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cfg = write(dir.path(), "e.cfg", "[lfunctions]\nf = newform 18 M=3000\n[eval]\npoints = 2 0\n");
    let out = lzero(dir.path(), &["eval", "-c", &cfg], &[("LZERO_CACHE_DIR", cache.to_str().unwrap())]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(cache.join("newform-k18-M3000.f64").exists());
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = lzero(dir.path(), &["selftest", "--seed", "8"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).lines().all(|l| l.contains(": PASS")));
}
