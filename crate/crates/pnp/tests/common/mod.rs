#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn pnp(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_pnp"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn ok(dir: &Path, args: &[&str]) -> String {
    let r = pnp(dir, args);
    assert_eq!(r.code, 0, "pnp {args:?} failed: {}", r.stderr);
    r.stdout
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

pub fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

/// Rows of a TSV file without its header.
pub fn rows(path: impl AsRef<Path>) -> Vec<Vec<String>> {
    read(path).lines().skip(1).map(|l| l.split('\t').map(String::from).collect()).collect()
}

/// Three users, four movies, two feature types.
pub const RATINGS: &str = "\
# user\tmovie\trating
1\t10\t5
1\t11\t1
1\t12\t4
2\t10\t4
2\t12\t2
2\t13\t3.5
3\t11\t2
3\t13\t5
3\t12\t3
";

pub const MEMBERSHIP: &str = "\
10\t100\tactor
10\t200\tgenre
11\t101\tactor
11\t200\tgenre
12\t100\tactor
12\t201\tgenre
13\t101\tactor
13\t201\tgenre
";

/// Writes the fixture into `dir` and returns the two paths as strings.
pub fn fixture(dir: &Path) -> (String, String) {
    let r = write(dir, "ratings.tsv", RATINGS);
    let m = write(dir, "membership.tsv", MEMBERSHIP);
    (r.display().to_string(), m.display().to_string())
}
