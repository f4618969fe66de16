use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ifsproj_core::estimation::{box_dim_default, covering_sweep, csv, dyadic_scales, BoxDimEstimate};
use ifsproj_core::dimension::sim_dim_gdifs_with;
use ifsproj_core::geometry::rotation_2d;
use ifsproj_core::{
    annihilating_rotation, box_dim, build_projection_gdifs, find_dimension_drop, fixtures, is_strongly_connected,
    project_cloud, sample_attractor, select_disjoint_cylinders, sim_dim_ssifs, ssc_subsystem,
    DimensionProxy, LinearMap, Mat, PointCloud, SamplingMethod, SscOptions, Ssifs, Vect,
};
use serde_json::{json, Value};

use crate::doc::{GdifsDocument, IfsDocument};
use crate::error::{CliError, CliResult};
use crate::raster;
use crate::report::Report;
use crate::{load_input, Command, Context, EstimateCommand, InputArgs, ProjectionArgs, SampleArgs};

pub fn dispatch(cmd: &Command, ctx: &Context) -> CliResult<String> {
    match cmd {
        Command::Simdim { input } => simdim(input, ctx),
        Command::ProjectGdifs { input, projection } => project_gdifs(input, projection, ctx),
        Command::Dimdrop { input, l } => dimdrop(input, *l, ctx),
        Command::Annihilate {
            input,
            projection,
            vector,
            tol,
            word_cap,
        } => annihilate(input, projection, vector, *tol, *word_cap, ctx),
        Command::Estimate { command } => estimate(command, ctx),
        Command::Fixtures { out } => write_fixtures(out, ctx),
    }
}

fn emit(report: &Report, json: bool) -> String {
    if json {
        report.to_json() + "\n"
    } else {
        report.to_text()
    }
}

pub fn parse_vector(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad number {x:?} in {s:?}")))
        })
        .collect()
}

/// Rows separated by `;`, entries by `,`.
pub fn parse_matrix(s: &str) -> CliResult<Mat> {
    let rows = s.split(';').map(parse_vector).collect::<CliResult<Vec<_>>>()?;
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::Usage(format!("ragged matrix {s:?}")));
    }
    let flat: Vec<f64> = rows.concat();
    Ok(Mat::from_row_slice(rows.len(), cols, &flat))
}

/// `a..b` into inclusive exponent bounds.
pub fn parse_scales(s: &str) -> CliResult<(i32, i32)> {
    let bad = || CliError::Usage(format!("--scales expects a..b, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let lo: i32 = a.trim().parse().map_err(|_| bad())?;
    let hi: i32 = b.trim().parse().map_err(|_| bad())?;
    if hi <= lo {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Defaults to the first coordinate axis.
fn linear_map(p: &ProjectionArgs, d: usize) -> CliResult<LinearMap> {
    if let Some(m) = &p.matrix {
        return Ok(LinearMap::new(parse_matrix(m)?)?);
    }
    let u = match &p.direction {
        Some(s) => parse_vector(s)?,
        None => {
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            e
        }
    };
    Ok(LinearMap::onto_direction(&u)?)
}

fn out_dir(out: &Option<PathBuf>) -> CliResult<Option<&Path>> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> CliResult<String> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))?;
    Ok(path.display().to_string())
}

fn ifs_of(input: &InputArgs, ctx: &Context) -> CliResult<(IfsDocument, String, Ssifs)> {
    let loaded = load_input(input)?;
    let ifs = loaded.doc.to_ssifs(&ctx.tol)?;
    Ok((loaded.doc, loaded.name, ifs))
}

fn simdim(input: &InputArgs, ctx: &Context) -> CliResult<String> {
    let (_, name, ifs) = ifs_of(input, ctx)?;
    let r = sim_dim_ssifs(&ifs)?;
    let result = json!({
        "maps": ifs.len(),
        "ambient_dim": ifs.dim(),
        "s": r.value,
        "residual": r.residual,
        "iterations": r.iterations,
    });
    Ok(emit(&Report::new("simdim", ctx, Some(name), None, result), input.json))
}

fn project_gdifs(input: &InputArgs, projection: &ProjectionArgs, ctx: &Context) -> CliResult<String> {
    let (_, name, ifs) = ifs_of(input, ctx)?;
    let l = linear_map(projection, ifs.dim())?;
    let p = build_projection_gdifs(&ifs, &l)?;
    let g = &p.gdifs;
    let report = sim_dim_gdifs_with(g, &ctx.tol)?;
    let a = g.matrix_at(p.source_dim);
    let row_dev = a.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max);
    let document = GdifsDocument::from_gdifs(g);
    let mut result = json!({
        "vertices": g.vertex_count(),
        "edges": g.edges().len(),
        "identity_vertex": p.identity_vertex,
        "strongly_connected": is_strongly_connected(g),
        "source_sim_dim": p.source_dim,
        "sim_dim": report.value,
        "residual": report.residual,
        "max_row_sum_deviation": row_dev,
    });
    if let Some(dir) = out_dir(&input.out)? {
        let path = write_file(&dir.join("gdifs.json"), |w| {
            serde_json::to_writer_pretty(&mut *w, &document)?;
            writeln!(w)
        })?;
        result["gdifs_path"] = json!(path);
    }
    if input.json {
        result["gdifs"] = serde_json::to_value(&document).expect("gdifs serializes");
    }
    Ok(emit(&Report::new("project-gdifs", ctx, Some(name), None, result), input.json))
}

fn dimdrop(input: &InputArgs, l: usize, ctx: &Context) -> CliResult<String> {
    let (_, name, ifs) = ifs_of(input, ctx)?;
    let d = find_dimension_drop(&ifs, l)?;
    let basis = d.subspace.basis();
    let columns: Vec<Vec<f64>> = basis.column_iter().map(|c| c.iter().copied().collect()).collect();
    let shift = Vect::from_column_slice(&d.shift);
    let orth = (basis.transpose() * &shift).amax();
    let result = json!({
        "subspace_basis": columns,
        "s_original": d.s_original,
        "s_reduced": d.s_reduced,
        "witness": d.witness,
        "shift": d.shift,
        "basis_dot_shift": orth,
        "reduced_vertices": d.dropped_gdifs.vertex_count(),
        "reduced_edges": d.dropped_gdifs.edges().len(),
    });
    Ok(emit(&Report::new("dimdrop", ctx, Some(name), None, result), input.json))
}

fn annihilate(
    input: &InputArgs,
    projection: &ProjectionArgs,
    vector: &str,
    tol: f64,
    word_cap: usize,
    ctx: &Context,
) -> CliResult<String> {
    let (_, name, ifs) = ifs_of(input, ctx)?;
    let l = linear_map(projection, ifs.dim())?;
    let v = Vect::from_vec(parse_vector(vector)?);
    let a = annihilating_rotation(&ifs.rotations(), &l, &v, tol, word_cap)?;
    let rotation: Vec<f64> = a.rotation.transpose().iter().copied().collect();
    let result = json!({
        "word": a.word,
        "residual": a.residual,
        "rotation": rotation,
    });
    Ok(emit(&Report::new("annihilate", ctx, Some(name), None, result), input.json))
}

fn sample(ifs: &Ssifs, s: &SampleArgs) -> CliResult<PointCloud> {
    Ok(sample_attractor(ifs, s.points, s.seed, SamplingMethod::chaos_uniform())?)
}

/// Explicit `--scales` ladder, or `None` for the default one.
fn scale_ladder(s: &SampleArgs, default_base: f64) -> CliResult<Option<Vec<f64>>> {
    match &s.scales {
        Some(text) => {
            let (lo, hi) = parse_scales(text)?;
            let base = s.scale_base.unwrap_or(default_base);
            if !(base > 0.0) {
                return Err(CliError::Usage("--scale-base must be positive".into()));
            }
            Ok(Some(dyadic_scales(base, lo, hi)))
        }
        None => Ok(None),
    }
}

fn fit(cloud: &PointCloud, s: &SampleArgs) -> CliResult<BoxDimEstimate> {
    Ok(match scale_ladder(s, cloud.extent())? {
        Some(scales) => box_dim(cloud, &scales)?,
        None => box_dim_default(cloud)?,
    })
}

fn estimate(cmd: &EstimateCommand, ctx: &Context) -> CliResult<String> {
    match cmd {
        EstimateCommand::Boxdim {
            input,
            sample: s,
            resolution,
            write_points,
        } => {
            let (_, name, ifs) = ifs_of(input, ctx)?;
            let cloud = sample(&ifs, s)?;
            let est = fit(&cloud, s)?;
            let mut result = json!({
                "points": cloud.len(),
                "slope": est.slope,
                "intercept": est.intercept,
                "r_squared": est.r_squared,
                "dropped_coarse": est.dropped_coarse,
                "scales": est.scales,
                "counts": est.counts,
                "source_hash": cloud.source_hash,
            });
            if let Some(dir) = out_dir(&input.out)? {
                let mut files = vec![write_file(&dir.join("scale_counts.csv"), |w| csv::write_scale_counts(w, &est))?];
                if let Some(px) = raster::occupancy(&cloud, *resolution) {
                    files.push(write_file(&dir.join("attractor.pgm"), |w| raster::write_pgm(w, *resolution, &px))?);
                }
                if *write_points {
                    files.push(write_file(&dir.join("points.csv"), |w| csv::write_points(w, &cloud))?);
                }
                result["files"] = json!(files);
            }
            Ok(emit(&Report::new("estimate boxdim", ctx, Some(name), Some(s.seed), result), input.json))
        }
        EstimateCommand::ProjectBoxdim {
            input,
            sample: s,
            direction,
            t,
        } => project_boxdim(input, s, direction, *t, ctx),
        EstimateCommand::CollapseSweep {
            input,
            sample: s,
            projection,
            t,
        } => collapse_sweep(input, s, projection, *t, ctx),
        EstimateCommand::SscApprox {
            input,
            epsilon,
            t,
            seed,
            points,
        } => {
            let (doc, name, ifs) = ifs_of(input, ctx)?;
            let proxy = match t.or(known_dimension(&doc)) {
                Some(t) => DimensionProxy::Supplied(t),
                None if doc.osc_certified() => DimensionProxy::OscCertified,
                None => DimensionProxy::Estimated {
                    points: *points,
                    seed: *seed,
                },
            };
            let opts = SscOptions {
                proxy,
                ..SscOptions::default()
            };
            let sub = ssc_subsystem(&ifs, *epsilon, &opts)?;
            let mut result = serde_json::to_value(&sub).expect("subsystem serializes");
            result["proxy"] = serde_json::to_value(proxy).expect("proxy serializes");
            if let Some(dir) = out_dir(&input.out)? {
                let sub_doc = IfsDocument::from_ssifs(&sub.subsystem, None);
                let path = write_file(&dir.join("subsystem.json"), |w| {
                    serde_json::to_writer_pretty(&mut *w, &sub_doc)?;
                    writeln!(w)
                })?;
                result["subsystem_path"] = json!(path);
            }
            let seed = matches!(proxy, DimensionProxy::Estimated { .. }).then_some(*seed);
            Ok(emit(&Report::new("estimate ssc-approx", ctx, Some(name), seed, result), input.json))
        }
        EstimateCommand::Cylinders {
            input,
            target_angle,
            target,
            delta,
            t,
            mass,
            depth,
        } => {
            let (_, name, ifs) = ifs_of(input, ctx)?;
            let d = ifs.dim();
            let o = match (target_angle, target) {
                (Some(a), None) if d == 2 => rotation_2d(*a),
                (Some(_), None) => return Err(CliError::Usage("--target-angle needs a planar system".into())),
                (None, Some(m)) => parse_matrix(m)?,
                _ => Mat::identity(d, d),
            };
            let t = match t {
                Some(t) => *t,
                None => sim_dim_ssifs(&ifs)?.value,
            };
            let sel = select_disjoint_cylinders(&ifs, &o, *delta, t, *mass, *depth)?;
            let result = serde_json::to_value(&sel).expect("selection serializes");
            Ok(emit(&Report::new("estimate cylinders", ctx, Some(name), None, result), input.json))
        }
    }
}

/// Named directions from the command line, else from the document.
fn directions(args: &[String], doc: &IfsDocument, d: usize) -> CliResult<Vec<(String, Vec<f64>)>> {
    if args.is_empty() {
        let named: Vec<(String, Vec<f64>)> = doc
            .directions()
            .iter()
            .map(|n| (n.name.clone(), n.vector.clone()))
            .collect();
        if named.is_empty() {
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            return Ok(vec![("x1".into(), e)]);
        }
        return Ok(named);
    }
    args.iter()
        .enumerate()
        .map(|(i, a)| match a.split_once('=') {
            Some((n, v)) => Ok((n.to_string(), parse_vector(v)?)),
            None => Ok((format!("L{}", i + 1), parse_vector(a)?)),
        })
        .collect()
}

fn known_dimension(doc: &IfsDocument) -> Option<f64> {
    doc.metadata.as_ref()?.known_dimension
}

/// First over last covering sum; large when the content collapses.
fn collapse_ratio(sums: &[f64]) -> f64 {
    sums[0] / sums[sums.len() - 1]
}

fn project_boxdim(
    input: &InputArgs,
    s: &SampleArgs,
    direction: &[String],
    t: Option<f64>,
    ctx: &Context,
) -> CliResult<String> {
    let (doc, name, ifs) = ifs_of(input, ctx)?;
    let dirs = directions(direction, &doc, ifs.dim())?;
    let cloud = sample(&ifs, s)?;
    let (t, t_source) = match t {
        Some(t) => (t, "supplied"),
        None => match known_dimension(&doc) {
            Some(k) => (k, "known"),
            None if doc.osc_certified() => (sim_dim_ssifs(&ifs)?.value, "similarity"),
            None => (box_dim_default(&cloud)?.slope, "estimated"),
        },
    };
    let dir = out_dir(&input.out)?;
    let mut rows = Vec::new();
    for (label, u) in &dirs {
        let proj = project_cloud(&cloud, &LinearMap::onto_direction(u)?)?;
        let est = fit(&proj, s)?;
        let sweep = covering_sweep(&proj, t, &est.scales)?;
        let sums: Vec<f64> = sweep.iter().map(|p| p.sum).collect();
        let mut row = json!({
            "direction": label,
            "vector": u,
            "slope": est.slope,
            "r_squared": est.r_squared,
            "slope_minus_t": est.slope - t,
            "covering_sums": sums,
            "collapse_ratio": collapse_ratio(&sums),
        });
        if let Some(dir) = dir {
            row["file"] = json!(write_file(&dir.join(format!("covering_{label}.csv")), |w| csv::write_covering(
                w, &sweep
            ))?);
        }
        rows.push(row);
    }
    let result = json!({
        "points": cloud.len(),
        "t": t,
        "t_source": t_source,
        "projections": rows,
    });
    Ok(emit(&Report::new("estimate project-boxdim", ctx, Some(name), Some(s.seed), result), input.json))
}

fn collapse_sweep(
    input: &InputArgs,
    s: &SampleArgs,
    projection: &ProjectionArgs,
    t: Option<f64>,
    ctx: &Context,
) -> CliResult<String> {
    let (_, name, ifs) = ifs_of(input, ctx)?;
    let l = linear_map(projection, ifs.dim())?;
    let cloud = sample(&ifs, s)?;
    let (t, t_source) = match t {
        Some(t) => (t, "supplied"),
        None => (box_dim_default(&cloud)?.slope, "estimated"),
    };
    let scales = scale_ladder(s, 1.0)?.unwrap_or_else(|| dyadic_scales(s.scale_base.unwrap_or(1.0), 4, 10));
    let proj = project_cloud(&cloud, &l)?;
    let sweep = covering_sweep(&proj, t, &scales)?;
    let sums: Vec<f64> = sweep.iter().map(|p| p.sum).collect();
    let mut result = json!({
        "points": cloud.len(),
        "t": t,
        "t_source": t_source,
        "scales": scales,
        "counts": sweep.iter().map(|p| p.count).collect::<Vec<_>>(),
        "covering_sums": sums,
        "monotone_decreasing": sums.windows(2).all(|w| w[1] < w[0]),
        "collapse_ratio": collapse_ratio(&sums),
    });
    if let Some(dir) = out_dir(&input.out)? {
        result["file"] = json!(write_file(&dir.join("covering.csv"), |w| csv::write_covering(w, &sweep))?);
    }
    Ok(emit(&Report::new("estimate collapse-sweep", ctx, Some(name), Some(s.seed), result), input.json))
}

/// File name and contents of every shipped fixture document.
pub fn fixture_documents() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fixtures::all()
        .iter()
        .map(|f| (format!("{}.json", f.name), to_pretty(&IfsDocument::from_fixture(f))))
        .collect();
    out.push(("degenerate_single_fixed_point.json".into(), to_pretty(&degenerate_document())));
    out
}

/// The degenerate guard cannot pass through `Ssifs`, so it is written by hand.
pub fn degenerate_document() -> IfsDocument {
    let maps = fixtures::degenerate_single_fixed_point_maps()
        .iter()
        .map(|s| crate::doc::MapDoc {
            ratio: s.ratio(),
            rotation: s.rotation().iter().copied().collect(),
            translation: s.translation().iter().copied().collect(),
        })
        .collect();
    IfsDocument {
        schema_version: crate::doc::SCHEMA_VERSION.into(),
        ambient_dim: 1,
        maps,
        metadata: Some(crate::doc::Metadata {
            name: Some("degenerate_single_fixed_point".into()),
            ..Default::default()
        }),
    }
}

fn to_pretty(doc: &IfsDocument) -> String {
    serde_json::to_string_pretty(doc).expect("document serializes") + "\n"
}

fn write_fixtures(out: &Path, ctx: &Context) -> CliResult<String> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut written = Vec::new();
    for (file, text) in fixture_documents() {
        let path = out.join(&file);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        written.push(path.display().to_string());
    }
    let result: Value = json!({ "files": written });
    Ok(Report::new("fixtures", ctx, None, None, result).to_text())
}
