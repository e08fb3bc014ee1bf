//! File formats: surface JSON, scene JSON, a minimal OFF importer, and
//! atomic writes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use catsurf_core::corpus::Scene;
use catsurf_core::{FaceSpec, PolySurface};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Surface file contents. The derived blocks are written on request and
/// ignored on input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub faces: Vec<FaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<BTreeMap<usize, f64>>,
}

impl SurfaceFile {
    pub fn new(faces: Vec<FaceSpec>) -> Self {
        Self { faces, chi: None, omega: None }
    }

    pub fn with_derived(surface: &PolySurface) -> Self {
        let report = surface.curvature_report();
        Self { faces: surface.faces().to_vec(), chi: Some(report.chi), omega: Some(report.omega.iter().copied().enumerate().collect()) }
    }
}

/// Raw bytes of an input file and their SHA-256 digest.
pub struct Input {
    pub bytes: Vec<u8>,
    pub digest: String,
}

pub fn read_input(path: &Path) -> Result<Input> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let digest = format!("{:x}", Sha256::digest(&bytes));
    Ok(Input { bytes, digest })
}

fn is_off(path: &Path, bytes: &[u8]) -> bool {
    let ext = path.extension().and_then(|e| e.to_str()).map(|e| e.eq_ignore_ascii_case("off"));
    ext == Some(true) || bytes.trim_ascii_start().starts_with(b"OFF")
}

/// Parses a surface file, JSON or OFF by extension or header.
pub fn parse_surface(path: &Path, bytes: &[u8]) -> Result<Vec<FaceSpec>> {
    if is_off(path, bytes) {
        let text = std::str::from_utf8(bytes).context("OFF file is not UTF-8")?;
        return parse_off(text);
    }
    let file: SurfaceFile = serde_json::from_slice(bytes).with_context(|| format!("cannot parse surface {}", path.display()))?;
    Ok(file.faces)
}

pub fn parse_scene(path: &Path, bytes: &[u8]) -> Result<Scene> {
    serde_json::from_slice(bytes).with_context(|| format!("cannot parse scene {}", path.display()))
}

/// Flat surface from an OFF mesh. Polygons are fanned from their first
/// vertex; edge lengths come from the embedded coordinates.
pub fn parse_off(text: &str) -> Result<Vec<FaceSpec>> {
    let mut tokens = text.lines().map(|l| l.split('#').next().unwrap_or("")).flat_map(str::split_whitespace);
    match tokens.next() {
        Some("OFF") => {}
        other => bail!("expected OFF header, found {other:?}"),
    }
    let mut next_num = |what: &str| -> Result<f64> {
        let t = tokens.next().with_context(|| format!("OFF file ends before {what}"))?;
        t.parse::<f64>().with_context(|| format!("bad {what} {t:?}"))
    };
    let count = |x: f64, what: &str| -> Result<usize> {
        if x >= 0.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            bail!("bad {what} {x}")
        }
    };
    let nv = count(next_num("vertex count")?, "vertex count")?;
    let nf = count(next_num("face count")?, "face count")?;
    next_num("edge count")?;
    let mut pts = Vec::with_capacity(nv);
    for _ in 0..nv {
        pts.push([next_num("coordinate")?, next_num("coordinate")?, next_num("coordinate")?]);
    }
    let dist = |a: usize, b: usize| -> f64 {
        let (p, q) = (pts[a], pts[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
    };
    let mut faces = Vec::new();
    for f in 0..nf {
        let k = count(next_num("polygon size")?, "polygon size")?;
        if k < 3 {
            bail!("face {f} has {k} vertices");
        }
        let mut ids = Vec::with_capacity(k);
        for _ in 0..k {
            let i = count(next_num("vertex index")?, "vertex index")?;
            if i >= nv {
                bail!("face {f} uses vertex {i}, but there are only {nv}");
            }
            ids.push(i);
        }
        for j in 1..k - 1 {
            let v = [ids[0], ids[j], ids[j + 1]];
            faces.push(FaceSpec { v, len: [dist(v[1], v[2]), dist(v[2], v[0]), dist(v[0], v[1])], kappa: 0.0 });
        }
    }
    Ok(faces)
}

/// Pretty JSON with a trailing newline. Floats use the shortest
/// representation that round-trips.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_square_pyramid() {
        let off = "OFF\n# pyramid\n5 5 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n0.5 0.5 1\n4 0 3 2 1\n3 0 1 4\n3 1 2 4\n3 2 3 4\n3 3 0 4\n";
        let faces = parse_off(off).unwrap();
        assert_eq!(faces.len(), 6);
        assert_eq!(faces[0].v, [0, 3, 2]);
        assert!((faces[0].len[1] - 2f64.sqrt()).abs() < 1e-15);
        let s = catsurf_core::polyhedral::validate(&faces).unwrap();
        assert_eq!(s.euler_characteristic(), 2);
    }

    #[test]
    fn off_errors() {
        assert!(parse_off("PLY\n").is_err());
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n").is_err());
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n").is_err());
    }

    #[test]
    fn surface_round_trip_ignores_derived_blocks() {
        let faces = catsurf_core::corpus::tetrahedron(1.0);
        let s = catsurf_core::polyhedral::validate(&faces).unwrap();
        let text = to_json(&SurfaceFile::with_derived(&s)).unwrap();
        assert!(text.contains("\"chi\": 2"));
        assert_eq!(parse_surface(Path::new("t.json"), text.as_bytes()).unwrap(), faces);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
