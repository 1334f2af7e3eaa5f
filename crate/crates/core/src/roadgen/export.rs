use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::sim::{build_road, Point, RoadGeometry, SimError};

use super::nsga2::TestCase;
use super::objectives::max_curvature;
use super::{RoadGenError, Verdict};

/// On-disk form of one road test. The spine is in map units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFile {
    pub spine: Vec<[f64; 2]>,
    pub width_m: f64,
    pub map_size: f64,
    pub max_curvature: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

impl TestFile {
    pub fn new(spine: &[Point], width_m: f64, map_size: f64, seed: u64, verdict: Option<Verdict>) -> Self {
        Self {
            spine: spine.iter().map(|p| [p.x, p.y]).collect(),
            width_m,
            map_size,
            max_curvature: max_curvature(spine),
            seed,
            verdict,
        }
    }

    pub fn points(&self) -> Vec<Point> {
        self.spine.iter().map(|&[x, y]| Point::new(x, y)).collect()
    }

    /// Lane in meters, spine scaled by `scale` meters per map unit.
    pub fn road(&self, scale: f64) -> Result<RoadGeometry, SimError> {
        let spine: Vec<Point> = self.points().into_iter().map(|p| p * scale).collect();
        build_road(&spine, self.width_m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("test files serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub fn read_test(path: &Path) -> Result<TestFile, RoadGenError> {
    let text = fs::read_to_string(path).map_err(|error| RoadGenError::Io {
        path: path.to_owned(),
        error,
    })?;
    TestFile::from_json(&text).map_err(|error| RoadGenError::Json {
        path: path.to_owned(),
        error,
    })
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

pub fn test_file_name(seed: u64, index: usize) -> String {
    format!("test_{seed}_{index}.json")
}

/// Writes `test_<seed>_<index>.json` for each test, creating `dir` if needed.
pub fn export_tests(
    tests: &[TestCase],
    dir: &Path,
    width_m: f64,
    map_size: f64,
    seed: u64,
) -> Result<Vec<PathBuf>, RoadGenError> {
    if tests.is_empty() {
        return Ok(Vec::new());
    }
    let io_err = |path: &Path| {
        let path = path.to_owned();
        move |error| RoadGenError::Io { path, error }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::with_capacity(tests.len());
    for (i, t) in tests.iter().enumerate() {
        let path = dir.join(test_file_name(seed, i));
        let file = TestFile::new(&t.spine, width_m, map_size, seed, t.verdict);
        write_atomic(&path, file.to_json().as_bytes()).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// `index,f1,f2,valid,verdict`, one row per test.
pub fn summary_csv(tests: &[TestCase]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "f1", "f2", "valid", "verdict"])
        .expect("in-memory write");
    for (i, t) in tests.iter().enumerate() {
        w.write_record([
            i.to_string(),
            t.f1.to_string(),
            t.f2.to_string(),
            t.valid.to_string(),
            t.verdict.map(|v| v.as_str().to_owned()).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 records")
}
