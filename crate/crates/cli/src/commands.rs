//! Subcommand implementations. Each returns a report; failed checks give
//! exit code 1 and returned errors give exit code 2.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use catsurf_core::comparison::{cat_test, ModelTriangle};
use catsurf_core::corpus::{self, Scene};
use catsurf_core::polyhedral::{self, edge_graph_distance, gauss_bonnet_region, refine_midpoint, PolygonRegion};
use catsurf_core::smoothing::{self, ConeMetric, Mode, SmoothingError, SmoothingParams, EXCESS_TOL, JUNCTION_TOL, TAIL_TOL};
use catsurf_core::triangulation::{intersect_convex, replay_matches, ve_refine, ChartPolygon, TriangulationError};
use catsurf_core::PolySurface;
use rayon::prelude::*;

use crate::io::{self, SurfaceFile};
use crate::report::{Check, RunReport};
use crate::svg;

pub const GAUSS_BONNET_TOL: f64 = 1e-9;
pub const REGION_TOL: f64 = 1e-8;
pub const CAT_TOL: f64 = 1e-9;
pub const CONSERVATION_TOL: f64 = 1e-8;
pub const TILING_TOL: f64 = 1e-9;
pub const OVERLAP_TOL: f64 = 1e-12;
const PROFILE_POINTS: usize = 400;

fn load_surface(path: &Path) -> Result<(PolySurface, String)> {
    let input = io::read_input(path)?;
    let faces = io::parse_surface(path, &input.bytes)?;
    let surface = polyhedral::validate(&faces).with_context(|| path.display().to_string())?;
    Ok((surface, input.digest))
}

#[derive(Debug, Clone)]
pub struct CheckArgs {
    pub surface: PathBuf,
    pub kappa: Option<f64>,
    pub gauss_bonnet: bool,
    pub cat_faces: bool,
    pub grid: usize,
}

pub fn check(args: &CheckArgs) -> Result<RunReport> {
    let (s, digest) = load_surface(&args.surface)?;
    let mut report = RunReport::new("check", Some(digest));
    report.warnings.extend(s.warnings().iter().cloned());
    report.push(Check::flag("valid_surface", true));
    let curv = s.curvature_report();
    report.quantity("faces", s.faces().len() as f64);
    report.quantity("vertices", s.vertex_count() as f64);
    report.quantity("chi", curv.chi as f64);
    report.quantity("omega_total", curv.total_vertex_curvature());
    report.quantity("omega_plus", curv.omega_plus);
    report.quantity("omega_minus", curv.omega_minus);
    report.quantity("face_curvature", curv.face_curvature);
    if args.gauss_bonnet {
        report.push(Check::at_most("gauss_bonnet", curv.gauss_bonnet_defect.abs(), GAUSS_BONNET_TOL).with_detail(format!(
            "{} + {} = 2π·{}",
            curv.total_vertex_curvature(),
            curv.face_curvature,
            curv.chi
        )));
        let mut regions: Vec<Vec<usize>> = (0..s.faces().len()).map(|f| vec![f]).collect();
        for v in 0..s.vertex_count() {
            let mut star: Vec<usize> = s.corners_at(v)?.iter().map(|c| c.0).collect();
            star.sort_unstable();
            star.dedup();
            regions.push(star);
        }
        let defects: Vec<Option<f64>> = regions
            .par_iter()
            .map(|faces| {
                let region = PolygonRegion::from_faces(&s, faces).ok()?;
                gauss_bonnet_region(&s, &region).ok().map(|g| g.defect.abs())
            })
            .collect();
        let checked = defects.iter().flatten().count();
        let worst = defects.iter().flatten().fold(0.0, |a: f64, &b| a.max(b));
        report.push(Check::at_most("region_gauss_bonnet", worst, REGION_TOL).with_detail(format!("{checked} disk regions")));
    }
    if args.cat_faces {
        let kappa = args.kappa.unwrap_or_else(|| s.max_kappa());
        let worst = s
            .faces()
            .par_iter()
            .map(|f| -> Result<f64> {
                let t = ModelTriangle::comparison(f.kappa, f.len)?;
                Ok(cat_test(&t, kappa, args.grid)?.max_violation)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        report.push(Check::at_most("cat_faces", worst, CAT_TOL).with_detail(format!("kappa={kappa}, grid={}", args.grid)));
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SmoothArgs {
    pub surface: PathBuf,
    pub epsilon: f64,
    pub mode: Mode,
    pub grid: usize,
    pub out_plan: Option<PathBuf>,
    pub out_profiles_dir: Option<PathBuf>,
    pub svg: bool,
}

pub fn smooth(args: &SmoothArgs) -> Result<RunReport> {
    let (s, digest) = load_surface(&args.surface)?;
    let mut report = RunReport::new("smooth", Some(digest));
    report.warnings.extend(s.warnings().iter().cloned());
    let plan = match smoothing::plan_surface_smoothing(&s, args.epsilon, args.mode, args.grid) {
        Ok(plan) => plan,
        Err(e @ SmoothingError::MixedDefects { .. }) => {
            report.push(Check::flag("mode_consistency", false).with_detail(e.to_string()));
            return Ok(report);
        }
        Err(e @ (SmoothingError::NonUniformKappa(_) | SmoothingError::ModeMismatch { .. } | SmoothingError::NoAdmissibleDelta(_))) => {
            report.push(Check::flag("admissible", false).with_detail(e.to_string()));
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    report.push(Check::flag("mode_consistency", true));
    if args.mode.is_experimental() {
        report.warnings.push(format!("{:?} mode is experimental", args.mode));
    }
    for v in &plan.vertices {
        let c = &v.certificate;
        let name = |what: &str| format!("vertex_{}_{what}", v.vertex);
        report.push(Check::at_most(name("excess_curvature"), c.max_excess_curvature, EXCESS_TOL));
        report.push(Check::flag(name("monotone"), c.monotone_ok));
        report.push(Check::at_most(name("tail_match"), c.tail_match, TAIL_TOL));
        report.push(Check::at_most(name("junction_jump"), c.junction_jump, JUNCTION_TOL));
        report.push(Check::at_most(name("cap_diameter"), v.cap.diameter, v.budget));
    }
    let areas = plan.vertices.iter().map(|v| v.cap.area).fold(0.0, |a, b| a + b);
    let budget = plan.vertices.iter().map(|v| v.budget).fold(0.0, |a, b| a + b);
    report.push(Check::at_most("cap_area_total", areas, budget));
    report.quantity("conical_vertices", plan.vertices.len() as f64);
    report.quantity("total_r", plan.total_r);
    if let Some(path) = &args.out_plan {
        io::write_atomic(path, io::to_json(&plan)?.as_bytes())?;
    }
    if let Some(dir) = &args.out_profiles_dir {
        for v in &plan.vertices {
            let cone = ConeMetric::new(v.alpha, v.kappa, v.chart_radius)?;
            let prof = smoothing::profile(&cone, &SmoothingParams::new(v.delta, args.mode), PROFILE_POINTS)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["r", "lambda", "K"])?;
            for i in 0..prof.r.len() {
                w.write_record([prof.r[i], prof.lambda[i], prof.k[i]].map(|x| x.to_string()))?;
            }
            io::write_atomic(&dir.join(format!("vertex_{}.csv", v.vertex)), &w.into_inner()?)?;
            if args.svg {
                io::write_atomic(&dir.join(format!("vertex_{}.svg", v.vertex)), svg::profile(&prof).as_bytes())?;
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct RefineArgs {
    pub surface: PathBuf,
    pub levels: u32,
    pub distance: Option<(usize, usize)>,
    pub out: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub derived: bool,
}

pub fn refine(args: &RefineArgs) -> Result<RunReport> {
    let (s, digest) = load_surface(&args.surface)?;
    let mut report = RunReport::new("refine", Some(digest));
    let faces = s.faces().len().saturating_mul(4usize.saturating_pow(args.levels));
    if faces > polyhedral::MAX_REFINED_FACES {
        bail!("{} levels would create {faces} faces, above the cap of {}", args.levels, polyhedral::MAX_REFINED_FACES);
    }
    let base = s.curvature_report();
    let mut distances = Vec::new();
    if let Some((u, v)) = args.distance {
        distances.push(edge_graph_distance(&s, u, v)?);
    }
    let (mut drift_omega, mut drift_face) = (0.0f64, 0.0f64);
    let mut current = s;
    for _ in 0..args.levels {
        current = refine_midpoint(&current)?;
        let r = current.curvature_report();
        drift_omega = drift_omega.max((r.total_vertex_curvature() - base.total_vertex_curvature()).abs());
        drift_face = drift_face.max((r.face_curvature - base.face_curvature).abs());
        if let Some((u, v)) = args.distance {
            distances.push(edge_graph_distance(&current, u, v)?);
        }
    }
    report.push(Check::at_most("omega_conserved", drift_omega, CONSERVATION_TOL));
    report.push(Check::at_most("face_curvature_conserved", drift_face, CONSERVATION_TOL));
    report.quantity("faces", current.faces().len() as f64);
    report.quantity("vertices", current.vertex_count() as f64);
    if let Some((u, v)) = args.distance {
        let scale = distances[0].max(f64::MIN_POSITIVE);
        let rise = distances.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        if distances.len() > 1 {
            report.push(Check::at_most("distance_non_increasing", rise, 1e-12 * scale).with_detail(format!("{u}-{v}")));
        }
        report.quantity("distance", *distances.last().unwrap());
        if let [.., a, b] = distances[..] {
            report.quantity("final_gap", a - b);
        }
        if let Some(path) = &args.table {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["level", "distance", "gap"])?;
            for (l, d) in distances.iter().enumerate() {
                let gap = if l == 0 { String::new() } else { (distances[l - 1] - d).to_string() };
                w.write_record([l.to_string(), d.to_string(), gap])?;
            }
            io::write_atomic(path, &w.into_inner()?)?;
        }
    } else if args.table.is_some() {
        bail!("--table needs --distance");
    }
    if let Some(path) = &args.out {
        let file = if args.derived { SurfaceFile::with_derived(&current) } else { SurfaceFile::new(current.faces().to_vec()) };
        io::write_atomic(path, io::to_json(&file)?.as_bytes())?;
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct TriangulateArgs {
    pub scene: PathBuf,
    pub kappa: Option<f64>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

pub fn triangulate(args: &TriangulateArgs) -> Result<RunReport> {
    let input = io::read_input(&args.scene)?;
    let mut scene = io::parse_scene(&args.scene, &input.bytes)?;
    if let Some(k) = args.kappa {
        scene.kappa = k;
    }
    let mut report = RunReport::new("triangulate", Some(input.digest));
    let parent = scene.parent_polygon().context("invalid parent triangle")?;
    let family = scene.family_polygons().context("invalid family polygon")?;
    let out = match ve_refine(&parent, &family) {
        Ok(out) => out,
        Err(e @ (TriangulationError::NotContained(_) | TriangulationError::Overlap(..))) => {
            report.push(Check::flag("valid_family", false).with_detail(e.to_string()));
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    report.push(Check::flag("valid_family", true));
    let parent_area = parent.model_area()?;
    let total: f64 = out.triangles.iter().map(|t| t.model_area()).sum::<Result<f64, _>>()?;
    report.push(Check::at_most("tiling_area_defect", (total - parent_area).abs() / parent_area, TILING_TOL));
    report.push(Check::at_most("max_overlap", max_overlap(&out.triangles)? / parent.chart_area(), OVERLAP_TOL));
    report.push(Check::flag("certificate_replay", replay_matches(&parent, &out.certificate, &out.triangles)?));
    let family_ok =
        family.iter().enumerate().map(|(i, f)| replay_matches(f, &out.family_certificates[i], &out.owned_by(i))).collect::<Result<Vec<_>, _>>()?;
    report.push(Check::flag("family_certificates_replay", family_ok.iter().all(|&b| b)));
    report.quantity("triangles", out.triangles.len() as f64);
    report.quantity("family", family.len() as f64);
    if report.passed {
        if let Some(path) = &args.out {
            io::write_atomic(path, io::to_json(&out)?.as_bytes())?;
        }
        if let Some(path) = &args.svg {
            io::write_atomic(path, svg::refinement(&out).as_bytes())?;
        }
    }
    Ok(report)
}

fn max_overlap(ts: &[ChartPolygon]) -> Result<f64> {
    let rows = (0..ts.len())
        .into_par_iter()
        .map(|i| {
            let mut worst: f64 = 0.0;
            for j in i + 1..ts.len() {
                worst = worst.max(intersect_convex(&ts[i], &ts[j])?.area());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>, TriangulationError>>()?;
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// Bundled inputs for `gen`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bundled {
    Tetrahedron,
    OctantOctahedron,
    FatOctahedron,
    Cube,
    FlatTorus,
    Icosahedron,
    RandomConvex,
    TwoTriangleScene,
    RandomScene,
}

impl Bundled {
    pub const ALL: [Bundled; 9] = [
        Bundled::Tetrahedron,
        Bundled::OctantOctahedron,
        Bundled::FatOctahedron,
        Bundled::Cube,
        Bundled::FlatTorus,
        Bundled::Icosahedron,
        Bundled::RandomConvex,
        Bundled::TwoTriangleScene,
        Bundled::RandomScene,
    ];

    pub fn is_scene(self) -> bool {
        matches!(self, Bundled::TwoTriangleScene | Bundled::RandomScene)
    }
}

pub enum Generated {
    Surface(SurfaceFile),
    Scene(Scene),
}

pub fn generate(what: Bundled, seed: u64) -> Generated {
    let surface = |faces| Generated::Surface(SurfaceFile::new(faces));
    match what {
        Bundled::Tetrahedron => surface(corpus::tetrahedron(1.0)),
        Bundled::OctantOctahedron => surface(corpus::octant_octahedron()),
        Bundled::FatOctahedron => surface(corpus::fat_octahedron()),
        Bundled::Cube => surface(corpus::cube(1.0)),
        Bundled::FlatTorus => surface(corpus::flat_torus(3)),
        Bundled::Icosahedron => surface(corpus::icosahedron()),
        Bundled::RandomConvex => surface(corpus::random_convex(seed, 12)),
        Bundled::TwoTriangleScene => Generated::Scene(corpus::two_triangle_scene()),
        Bundled::RandomScene => Generated::Scene(corpus::random_scene(seed, 4, 6)),
    }
}

pub fn gen(what: Bundled, seed: u64, out: Option<&Path>) -> Result<String> {
    let text = match generate(what, seed) {
        Generated::Surface(s) => io::to_json(&s)?,
        Generated::Scene(s) => io::to_json(&s)?,
    };
    if let Some(path) = out {
        io::write_atomic(path, text.as_bytes())?;
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn write(dir: &Path, name: &str, what: Bundled) -> PathBuf {
        let p = dir.join(name);
        gen(what, 7, Some(&p)).unwrap();
        p
    }

    #[test]
    fn tetrahedron_gauss_bonnet() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "t.json", Bundled::Tetrahedron);
        let r = check(&CheckArgs { surface: p, kappa: None, gauss_bonnet: true, cat_faces: true, grid: 16 }).unwrap();
        assert!(r.passed, "{r}");
        assert!((r.quantities["omega_total"] - 2.0 * TAU).abs() < 1e-10);
    }

    #[test]
    fn cat_faces_fail_below_face_curvature() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "o.json", Bundled::OctantOctahedron);
        let r = check(&CheckArgs { surface: p, kappa: Some(0.0), gauss_bonnet: false, cat_faces: true, grid: 16 }).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn refine_level_zero_is_a_copy() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "t.json", Bundled::Tetrahedron);
        let out = dir.path().join("r.json");
        let args = RefineArgs { surface: p.clone(), levels: 0, distance: Some((0, 1)), out: Some(out.clone()), table: None, derived: false };
        assert!(refine(&args).unwrap().passed);
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&out).unwrap());
    }

    #[test]
    fn refine_counts_faces() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "t.json", Bundled::Tetrahedron);
        let r = refine(&RefineArgs { surface: p, levels: 3, distance: None, out: None, table: None, derived: false }).unwrap();
        assert!(r.passed);
        assert_eq!(r.quantities["faces"], 256.0);
    }

    #[test]
    fn smooth_smooth_surface_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "o.json", Bundled::OctantOctahedron);
        let args = SmoothArgs { surface: p, epsilon: 0.05, mode: Mode::Flat, grid: 200, out_plan: None, out_profiles_dir: None, svg: false };
        let r = smooth(&args).unwrap();
        assert!(r.passed);
        assert_eq!(r.quantities["conical_vertices"], 0.0);
    }

    #[test]
    fn empty_family_gives_one_triangle() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        let scene = Scene { kappa: 0.0, parent: [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], family: vec![] };
        io::write_atomic(&p, io::to_json(&scene).unwrap().as_bytes()).unwrap();
        let r = triangulate(&TriangulateArgs { scene: p, kappa: None, out: None, svg: None }).unwrap();
        assert!(r.passed);
        assert_eq!(r.quantities["triangles"], 1.0);
    }
}
