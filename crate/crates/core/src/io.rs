//! Run configuration, export formats, the on-disk build cache and the
//! per-n statistics table.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::complex::{
    build_chromatic_with, build_view_complex_with, BuildOptions, Complex, ComplexKind,
    FVector, Simplex, DEFAULT_BUDGET,
};
use crate::error::{Error, Result};
use crate::morse::{equivariant_sequence, partition, CollapseMode, CollapseSequence, Target};
use crate::procset::MAX_N;
use crate::view::{LocalView, View};

pub const EXPORT_FORMAT_VERSION: u32 = 1;
pub const CACHE_FORMAT_VERSION: u32 = 1;
pub const CACHE_DIR_ENV: &str = "VIEWCX_CACHE_DIR";
const CACHE_MAGIC: &[u8; 4] = b"VCXC";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Dot,
    Summary,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub n: u8,
    pub kind: ComplexKind,
    pub mode: CollapseMode,
    pub target: Target,
    pub budget: u64,
    pub cache_dir: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(n: u8, kind: ComplexKind) -> Self {
        RunConfig {
            n,
            kind,
            mode: CollapseMode::Plain,
            target: Target::Void,
            budget: DEFAULT_BUDGET,
            cache_dir: None,
            output: None,
            format: OutputFormat::Summary,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_N).contains(&self.n) {
            return Err(Error::InvalidN(self.n, "1..=15"));
        }
        if self.budget == 0 {
            return Err(Error::ResourceLimit { budget: 0 });
        }
        if self.kind == ComplexKind::Derived {
            return Err(Error::NotAViewComplex);
        }
        Ok(())
    }

    pub fn build_options(&self) -> BuildOptions {
        BuildOptions { budget: self.budget }
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    format_version: u32,
    n: u8,
    kind: ComplexKind,
    void: bool,
    vertices: Vec<LocalView>,
    simplices: Vec<Vec<u32>>,
}

/// Vertices present in `c` and their position in the export listing.
fn exported_vertices(c: &Complex) -> (Vec<LocalView>, HashMap<u32, u32>) {
    let mut ids: Vec<u32> = c.simplices().filter(|s| s.len() == 1).map(|s| s.ids()[0]).collect();
    ids.sort_unstable();
    let remap = ids.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    (ids.iter().map(|&v| c.dict().local_view(v)).collect(), remap)
}

/// JSON export; the empty simplex is implied and not listed.
pub fn complex_to_json(c: &Complex) -> Result<String> {
    let (vertices, remap) = exported_vertices(c);
    let simplices = c
        .sorted_simplices()
        .into_iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.ids().iter().map(|v| remap[v]).collect())
        .collect();
    let doc = ComplexJson {
        format_version: EXPORT_FORMAT_VERSION,
        n: c.n(),
        kind: c.kind(),
        void: c.is_void(),
        vertices,
        simplices,
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn complex_from_json(text: &str) -> Result<Complex> {
    let doc: ComplexJson = serde_json::from_str(text)?;
    if doc.void {
        return Ok(Complex::void(doc.n));
    }
    let probe = Complex::void(doc.n);
    let ids: Vec<u32> = doc
        .vertices
        .iter()
        .map(|lv| probe.dict().id(lv).ok_or_else(|| Error::CacheFormat(format!("vertex {lv:?} outside [n]"))))
        .collect::<Result<_>>()?;
    let mut simplices = vec![Simplex::default()];
    for s in doc.simplices {
        let mut mapped = s
            .iter()
            .map(|&i| ids.get(i as usize).copied().ok_or_else(|| Error::CacheFormat("vertex index".into())))
            .collect::<Result<Vec<_>>>()?;
        mapped.sort_unstable();
        mapped.dedup();
        simplices.push(Simplex::from_sorted(mapped));
    }
    Complex::from_simplices(doc.n, doc.kind, simplices)
}

fn label(lv: &LocalView) -> String {
    format!("{}:{}", lv.snap(), lv.pid())
}

/// The 1-skeleton as an undirected DOT graph.
pub fn complex_to_dot(c: &Complex) -> String {
    let (vertices, remap) = exported_vertices(c);
    let mut out = format!("graph {}_{} {{\n", c.kind(), c.n());
    for (i, lv) in vertices.iter().enumerate() {
        let _ = writeln!(out, "  v{i} [label=\"{}\"];", label(lv));
    }
    for s in c.sorted_simplices().iter().filter(|s| s.len() == 2) {
        let _ = writeln!(out, "  v{} -- v{};", remap[&s.ids()[0]], remap[&s.ids()[1]]);
    }
    out.push_str("}\n");
    out
}

/// The Hasse diagram of the face poset as a DOT digraph, bottom to top.
pub fn hasse_to_dot(c: &Complex) -> Result<String> {
    if c.n() > 2 {
        return Err(Error::InvalidN(c.n(), "1..=2 for Hasse diagrams"));
    }
    let simplices = c.sorted_simplices();
    let index: HashMap<&Simplex, usize> = simplices.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut out = format!("digraph hasse_{}_{} {{\n  rankdir=BT;\n", c.kind(), c.n());
    for (i, s) in simplices.iter().enumerate() {
        let name = if s.is_empty() { "∅".to_string() } else { c.view_of(s)?.to_string() };
        let _ = writeln!(out, "  s{i} [label=\"{name}\"];");
    }
    for (i, s) in simplices.iter().enumerate() {
        for drop in 0..s.len() {
            let mut ids = s.ids().to_vec();
            ids.remove(drop);
            let _ = writeln!(out, "  s{} -> s{i};", index[&Simplex::from_sorted(ids)]);
        }
    }
    out.push_str("}\n");
    Ok(out)
}

pub fn cache_path(dir: &Path, n: u8, kind: ComplexKind) -> PathBuf {
    dir.join(format!("{kind}-n{n}-v{CACHE_FORMAT_VERSION}.bin"))
}

fn kind_tag(kind: ComplexKind) -> u8 {
    match kind {
        ComplexKind::View => 0,
        ComplexKind::Chromatic => 1,
        ComplexKind::Derived => 2,
    }
}

pub fn write_cache(path: &Path, c: &Complex) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&CACHE_FORMAT_VERSION.to_le_bytes());
    buf.push(c.n());
    buf.push(kind_tag(c.kind()));
    let simplices = c.sorted_simplices();
    buf.extend_from_slice(&(simplices.len() as u64).to_le_bytes());
    for s in &simplices {
        buf.push(s.len() as u8);
        for v in s.ids() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    fs::File::create(&tmp)?.write_all(&buf)?;
    fs::rename(tmp, path)?;
    Ok(())
}

pub fn read_cache(path: &Path, n: u8, kind: ComplexKind) -> Result<Complex> {
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    let mut r = Cursor { buf: &buf, pos: 0 };
    if r.take(4)? != CACHE_MAGIC {
        return Err(Error::CacheFormat("bad magic".into()));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
    let (file_n, tag) = (r.take(1)?[0], r.take(1)?[0]);
    if version != CACHE_FORMAT_VERSION || file_n != n || tag != kind_tag(kind) {
        return Err(Error::CacheFormat("key mismatch".into()));
    }
    let count = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
    let mut simplices = Vec::with_capacity(count.min(1 << 24) as usize);
    for _ in 0..count {
        let len = r.take(1)?[0] as usize;
        let ids = r
            .take(4 * len)?
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")))
            .collect();
        simplices.push(Simplex::from_sorted(ids));
    }
    if r.pos != buf.len() {
        return Err(Error::CacheFormat("trailing bytes".into()));
    }
    Complex::from_simplices(n, kind, simplices)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::CacheFormat("truncated".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
}

pub fn build(n: u8, kind: ComplexKind, opts: &BuildOptions) -> Result<Complex> {
    match kind {
        ComplexKind::View => build_view_complex_with(n, opts),
        ComplexKind::Chromatic => build_chromatic_with(n, opts),
        ComplexKind::Derived => Err(Error::NotAViewComplex),
    }
}

/// Loads a cached build when a valid one exists, otherwise builds and stores it.
/// An unreadable or stale cache file is rebuilt, not reported.
pub fn load_or_build(n: u8, kind: ComplexKind, opts: &BuildOptions, cache_dir: Option<&Path>) -> Result<Complex> {
    let Some(dir) = cache_dir else { return build(n, kind, opts) };
    let path = cache_path(dir, n, kind);
    if let Ok(c) = read_cache(&path, n, kind) {
        if c.len() as u64 <= opts.budget {
            return Ok(c);
        }
        return Err(Error::ResourceLimit { budget: opts.budget });
    }
    let c = build(n, kind, opts)?;
    write_cache(&path, &c)?;
    Ok(c)
}

pub fn sequence_to_json(seq: &CollapseSequence) -> Result<String> {
    Ok(serde_json::to_string_pretty(seq)?)
}

pub fn sequence_from_json(text: &str) -> Result<CollapseSequence> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct StatsRow {
    pub n: u8,
    pub kind: ComplexKind,
    pub f_vector: FVector,
    pub euler_characteristic: i64,
    pub parity_balanced: bool,
    pub pseudomanifold: bool,
    pub witness: Option<View>,
    pub intervals: usize,
    pub orbit_batches: usize,
}

pub fn stats_row(c: &Complex) -> Result<StatsRow> {
    let f = c.f_vector()?;
    let pm = c.pseudomanifold_report()?;
    let witness = pm.witness.as_ref().map(|k| View::from_local_views(k, c.n())).transpose()?;
    Ok(StatsRow {
        n: c.n(),
        kind: c.kind(),
        euler_characteristic: f.euler_characteristic(),
        parity_balanced: f.is_parity_balanced(),
        f_vector: f,
        pseudomanifold: pm.is_pseudomanifold(),
        witness,
        intervals: partition(c)?.len(),
        orbit_batches: equivariant_sequence(c, Target::Void)?.batches.len(),
    })
}

pub fn stats_table(rows: &[StatsRow]) -> String {
    let mut out = format!(
        "{:<3} {:<10} {:<44} {:>4} {:<7} {:<15} {:>9} {:>13}\n",
        "n", "kind", "f-vector", "chi", "parity", "pseudomanifold", "intervals", "orbit-batches"
    );
    for r in rows {
        let pm = if r.pseudomanifold { "YES".to_string() } else { "NO".to_string() };
        let _ = writeln!(
            out,
            "{:<3} {:<10} {:<44} {:>4} {:<7} {:<15} {:>9} {:>13}",
            r.n,
            r.kind,
            r.f_vector.to_string(),
            r.euler_characteristic,
            if r.parity_balanced { "yes" } else { "no" },
            pm,
            r.intervals,
            r.orbit_batches
        );
        if let Some(w) = &r.witness {
            let _ = writeln!(out, "    witness ridge for n = {}: {w}", r.n);
        }
    }
    out
}

/// The `f = (...)` line of build summaries, without `f_{-1}`.
pub fn f_summary(f: &FVector) -> String {
    let parts: Vec<String> = f.counts().iter().skip(1).map(u64::to_string).collect();
    format!("f = ({})", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_chromatic, build_view_complex};

    #[test]
    fn json_roundtrip_and_shape() {
        let v1 = build_view_complex(1).unwrap();
        let text = complex_to_json(&v1).unwrap();
        assert!(text.starts_with(r#"{"format_version":1,"n":1,"kind":"view","void":false,"vertices":[{"snap":[0],"pid":0}"#));
        let back = complex_from_json(&text).unwrap();
        assert_eq!(back, v1);
        assert_eq!(complex_to_json(&back).unwrap(), text);
        let void = complex_to_json(&Complex::void(1)).unwrap();
        assert!(complex_from_json(&void).unwrap().is_void());
    }

    #[test]
    fn dot_path_graph() {
        let dot = complex_to_dot(&build_view_complex(1).unwrap());
        assert_eq!(dot.matches("[label=").count(), 4);
        assert_eq!(dot.matches(" -- ").count(), 3);
        let hasse = hasse_to_dot(&build_chromatic(2).unwrap()).unwrap();
        // Each k-simplex has k+1 facets: 12·1 + 24·2 + 13·3.
        assert_eq!(hasse.matches(" -> ").count(), 12 + 48 + 39);
        assert!(hasse_to_dot(&build_view_complex(3).unwrap()).is_err());
    }

    #[test]
    fn cache_roundtrip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let opts = BuildOptions::default();
        let fresh = load_or_build(2, ComplexKind::View, &opts, Some(dir.path())).unwrap();
        let path = cache_path(dir.path(), 2, ComplexKind::View);
        assert!(path.exists());
        let cached = load_or_build(2, ComplexKind::View, &opts, Some(dir.path())).unwrap();
        assert_eq!(complex_to_json(&fresh).unwrap(), complex_to_json(&cached).unwrap());
        assert!(read_cache(&path, 2, ComplexKind::Chromatic).is_err());

        fs::write(&path, b"VCXC garbage").unwrap();
        assert!(read_cache(&path, 2, ComplexKind::View).is_err());
        let rebuilt = load_or_build(2, ComplexKind::View, &opts, Some(dir.path())).unwrap();
        assert_eq!(rebuilt, fresh);
    }

    #[test]
    fn run_config_validation() {
        let mut cfg = RunConfig::new(2, ComplexKind::View);
        assert!(cfg.validate().is_ok());
        cfg.n = 0;
        assert!(cfg.validate().is_err());
        cfg.n = 2;
        cfg.budget = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn stats_for_n2() {
        let rows = [
            stats_row(&build_view_complex(2).unwrap()).unwrap(),
            stats_row(&build_chromatic(2).unwrap()).unwrap(),
        ];
        assert!(!rows[0].pseudomanifold && rows[0].witness.is_some());
        assert!(rows[1].pseudomanifold);
        assert_eq!(rows[0].euler_characteristic, 1);
        assert_eq!(f_summary(&rows[0].f_vector), "f = (12, 30, 19)");
        let table = stats_table(&rows);
        assert!(table.contains("witness ridge"));
    }
}
