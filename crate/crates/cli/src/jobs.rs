use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};

use empf::field::{electric_field, electric_potential, ChargeImage, FieldOptions, KernelSize};
use empf::grid::{Mask, RealGrid};
use empf::io::{load_charge_image, save_grid, save_overlay, LoadMode, Render, LOAD_PADDING};
use empf::kernel::{build_kernel, KernelKind, KernelSpec};
use empf::shape::{
    analyze_contour, classify_regions, growth_radius, RegionKind, ShapeMask, ThresholdTable,
};
use empf::stroke::{
    magnetize_stroke, prepare_strokes, resolve_attraction, resolve_repulsion, stroke_field,
    MagnetizeOptions, OrientationMap, Smoothing, StrokeSet, STROKE_DIMENSION,
};
use empf::Engine;
use ndarray::{ArrayD, Slice};
use serde::Serialize;
use serde_json::json;

use crate::manifest::{InputRecord, Manifest, MANIFEST_SCHEMA, MANIFEST_VERSION};
use crate::report::{roi_report, sig12};
use crate::{
    Cli, Command, EngineArg, FieldArgs, InputArgs, KernelSizeArg, KindArg, ModeArg, SmoothingArgs,
};

type Result<T> = std::result::Result<T, Box<dyn Error>>;

const SHAPE_N: f64 = 3.0;

const REGION_COLORS: [(RegionKind, [u8; 3]); 6] = [
    (RegionKind::Inside, [40, 200, 200]),
    (RegionKind::NearCm, [240, 150, 30]),
    (RegionKind::Flat, [40, 180, 60]),
    (RegionKind::Convex, [40, 90, 230]),
    (RegionKind::FarCm, [200, 50, 200]),
    (RegionKind::Concave, [230, 40, 40]),
];

/// Files written by a run, relative to the output directory.
struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn path(&mut self, name: String) -> PathBuf {
        let p = self.dir.join(&name);
        self.written.push(name);
        p
    }

    /// EMK1 dump, plus a rendered preview for 2D grids.
    fn grid(&mut self, stem: &str, grid: &RealGrid, preview: Option<Render>) -> Result<()> {
        save_grid(grid, &self.path(format!("{stem}.emk")), Render::Raw)?;
        match preview {
            Some(r) if grid.ndim() == 2 => {
                let ext = if r == Render::PgmNorm { "pgm" } else { "png" };
                save_grid(grid, &self.path(format!("{stem}.{ext}")), r)?;
            }
            _ => {}
        }
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.path(name.to_string()), text)?;
        Ok(())
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let mut out = Outputs::new(&cli.output_dir)?;
    let mut inputs = Vec::new();
    let resolved = match &cli.command {
        Command::Kernel(c) => {
            let n = n_values(&c.n, SHAPE_N)?;
            kernel(&mut out, &n, c.size, c.rank, c.kind)?;
            json!({ "n": n })
        }
        Command::Potential(c) | Command::Field(c) => {
            let with_field = matches!(cli.command, Command::Field(_));
            inputs.push(InputRecord::read(&c.input.input)?);
            let n = n_values(&c.field.n, SHAPE_N)?;
            let img = load(&c.input)?;
            let opts = field_options(&c.field, img.shape().len());
            for &v in &n {
                potential_or_field(&mut out, &img, v, &opts, with_field)?;
            }
            json!({ "n": n, "padding": LOAD_PADDING })
        }
        Command::Roi(c) => {
            inputs.push(InputRecord::read(&c.input.input)?);
            let n = n_values(&c.field.n, SHAPE_N)?;
            let table = match &c.thresholds {
                Some(p) => {
                    inputs.push(InputRecord::read(p)?);
                    let text = fs::read_to_string(p)?;
                    serde_json::from_str::<ThresholdTable>(&text)
                        .map_err(|e| format!("{}: bad threshold table: {e}", p.display()))?
                }
                None => ThresholdTable::default(),
            };
            table.validate()?;
            if !(0.0..=1.0).contains(&c.growth) {
                return Err(format!("--growth must be within [0, 1], got {}", c.growth).into());
            }
            let img = load(&c.input)?;
            let shape = ShapeMask::new(img.values().mapv(|q| q > 0.0))?;
            let opts = field_options(&c.field, shape.shape().len());
            for &v in &n {
                roi(&mut out, &shape, v, &table, c.growth, &opts)?;
            }
            json!({ "n": n, "thresholds": table, "padding": LOAD_PADDING })
        }
        Command::Stroke(c) => {
            inputs.push(InputRecord::read(&c.input.input)?);
            let (strokes, orient) = strokes(&c.input, &c.smoothing)?;
            stroke_csv(&mut out, &strokes, &orient)?;
            let thin = crop(&strokes.mask.mapv(|b| if b { 1.0 } else { 0.0 }));
            out.grid("substrokes", &thin, Some(Render::PgmNorm))?;
            json!({ "substrokes": strokes.count(), "padding": LOAD_PADDING })
        }
        Command::Magnetize(c) => {
            inputs.push(InputRecord::read(&c.input.input)?);
            let n = n_values(&c.field.n, STROKE_DIMENSION)?;
            let (strokes, orient) = strokes(&c.input, &c.smoothing)?;
            let mut flips = vec![false; strokes.count()];
            for &id in &c.flip {
                match flips.get_mut((id as usize).wrapping_sub(1)) {
                    Some(f) => *f = true,
                    None => {
                        return Err(format!(
                            "--flip {id}: there are {} substrokes",
                            strokes.count()
                        )
                        .into())
                    }
                }
            }
            for &v in &n {
                let opts = MagnetizeOptions {
                    n: v,
                    field: field_options(&c.field, 2),
                };
                let m = magnetize_stroke(&strokes, &orient, &flips, &opts)?;
                out.grid(
                    &format!("magnetic_perp_n{v}"),
                    &crop(&m.perpendicular),
                    Some(Render::PngDiverging),
                )?;
                out.grid(
                    &format!("magnetic_par_n{v}"),
                    &crop(&m.parallel),
                    Some(Render::PngDiverging),
                )?;
            }
            json!({ "n": n, "substrokes": strokes.count(), "flips": flips, "padding": LOAD_PADDING })
        }
        Command::Interact(c) => {
            inputs.push(InputRecord::read(&c.input.input)?);
            let n = n_values(&c.field.n, STROKE_DIMENSION)?;
            let (strokes, orient) = strokes(&c.input, &c.smoothing)?;
            for &v in &n {
                let opts = MagnetizeOptions {
                    n: v,
                    field: field_options(&c.field, 2),
                };
                interact(&mut out, &strokes, &orient, &opts)?;
            }
            json!({ "n": n, "substrokes": strokes.count(), "padding": LOAD_PADDING })
        }
    };
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA,
        version: MANIFEST_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        parallel: empf::is_parallel(),
        config: cli,
        resolved,
        inputs,
        outputs: out.written.clone(),
    };
    out.json("manifest.json", &manifest)
}

fn n_values(given: &[f64], default: f64) -> Result<Vec<f64>> {
    if given.is_empty() {
        return Ok(vec![default]);
    }
    if let Some(bad) = given.iter().find(|n| !(n.is_finite() && **n >= 1.0)) {
        return Err(format!("--n values must be >= 1, got {bad}").into());
    }
    Ok(given.to_vec())
}

fn field_options(args: &FieldArgs, rank: usize) -> FieldOptions {
    FieldOptions {
        engine: match args.engine {
            EngineArg::Auto => Engine::Auto,
            EngineArg::Fft => Engine::Fft,
            EngineArg::Direct => Engine::Direct,
        },
        kernel_size: match args.kernel_size {
            KernelSizeArg::Auto => KernelSize::Full,
            KernelSizeArg::Extent(e) => KernelSize::Explicit(vec![e; rank]),
        },
    }
}

fn load(args: &InputArgs) -> Result<ChargeImage> {
    let mode = match args.mode {
        ModeArg::Binary => LoadMode::Binary,
        ModeArg::Signed => LoadMode::Signed,
        ModeArg::Grayscale => LoadMode::Grayscale,
    };
    let img = load_charge_image(&args.input, mode, args.threshold)
        .map_err(|e| format!("{}: {e}", args.input.display()))?;
    if img.values().iter().all(|&q| q == 0.0) {
        eprintln!(
            "warning: {}: the charge image is all zero",
            args.input.display()
        );
    }
    Ok(img)
}

/// Removes the load padding so outputs line up with the input pixels.
fn crop<T: Clone>(grid: &ArrayD<T>) -> ArrayD<T> {
    grid.slice_each_axis(|ax| Slice::from(LOAD_PADDING..ax.len - LOAD_PADDING))
        .to_owned()
}

fn kernel(out: &mut Outputs, n: &[f64], size: usize, rank: usize, kind: KindArg) -> Result<()> {
    if !(2..=3).contains(&rank) {
        return Err(format!("--rank must be 2 or 3, got {rank}").into());
    }
    let (kind, name) = match kind {
        KindArg::Monopole => (KernelKind::Monopole, "monopole"),
        KindArg::DipoleX => (KernelKind::DipoleX, "dipole_x"),
        KindArg::DipoleY => (KernelKind::DipoleY, "dipole_y"),
        KindArg::Complex => (KernelKind::ComplexDipole, "complex"),
    };
    for &v in n {
        let kernels = build_kernel(&KernelSpec::new(&vec![size; rank], v, kind)?)?;
        let stem = format!("kernel_{name}_n{v}");
        match kernels.as_slice() {
            [k] => out.grid(&stem, k.values(), Some(Render::PngDiverging))?,
            [re, im] => {
                out.grid(
                    &format!("{stem}_re"),
                    re.values(),
                    Some(Render::PngDiverging),
                )?;
                out.grid(
                    &format!("{stem}_im"),
                    im.values(),
                    Some(Render::PngDiverging),
                )?;
            }
            _ => unreachable!("one or two kernels per kind"),
        }
    }
    Ok(())
}

fn potential_or_field(
    out: &mut Outputs,
    img: &ChargeImage,
    n: f64,
    opts: &FieldOptions,
    field: bool,
) -> Result<()> {
    if !field {
        let v = electric_potential(img, n, opts)?;
        return out.grid(
            &format!("potential_n{n}"),
            &crop(&v),
            Some(Render::PngDiverging),
        );
    }
    let f = electric_field(img, n, opts)?;
    out.grid(
        &format!("potential_n{n}"),
        &crop(&f.potential),
        Some(Render::PngDiverging),
    )?;
    out.grid(
        &format!("field_magnitude_n{n}"),
        &crop(&f.magnitude),
        Some(Render::PgmNorm),
    )?;
    for (axis, comp) in ["x", "y", "z"].iter().zip(&f.components) {
        out.grid(&format!("field_{axis}_n{n}"), &crop(comp), None)?;
    }
    Ok(())
}

fn roi(
    out: &mut Outputs,
    shape: &ShapeMask,
    n: f64,
    table: &ThresholdTable,
    growth: f64,
    opts: &FieldOptions,
) -> Result<()> {
    let analysis = analyze_contour(shape, n, opts)?;
    let regions = classify_regions(&analysis, table, growth)?.map(crop);
    let contour = crop(&analysis.contour);
    let radius = growth_radius(shape.shape(), growth);
    out.json(
        &format!("roi_n{n}.json"),
        &roi_report(n, growth, radius, &contour, &regions),
    )?;
    if contour.ndim() == 2 {
        let layers: Vec<(&Mask, [u8; 3])> = REGION_COLORS
            .iter()
            .map(|&(k, c)| (regions.get(k), c))
            .collect();
        let path = out.path(format!("roi_n{n}.png"));
        save_overlay(&crop(shape.values()), &layers, &path)?;
    }
    Ok(())
}

fn strokes(input: &InputArgs, s: &SmoothingArgs) -> Result<(StrokeSet, OrientationMap)> {
    let img = load(input)?;
    let mask = img.values().mapv(|q| q > 0.0);
    let smoothing = Smoothing {
        radius: s.smoothing,
        passes: s.smoothing_passes,
    };
    Ok(prepare_strokes(&mask, smoothing)?)
}

#[derive(Serialize)]
struct OrientationRow {
    x: usize,
    y: usize,
    theta: f64,
    substroke_id: u32,
}

fn stroke_csv(out: &mut Outputs, strokes: &StrokeSet, orient: &OrientationMap) -> Result<()> {
    let mut w = csv::Writer::from_path(out.path("orientation.csv".into()))?;
    for (i, &id) in strokes.labels.indexed_iter() {
        let (y, x) = (i[0], i[1]);
        if id == 0 || !orient.valid[[y, x]] {
            continue;
        }
        w.serialize(OrientationRow {
            x: x - LOAD_PADDING,
            y: y - LOAD_PADDING,
            theta: sig12(orient.theta[[y, x]]),
            substroke_id: id,
        })?;
    }
    w.flush()?;
    Ok(())
}

fn interact(
    out: &mut Outputs,
    strokes: &StrokeSet,
    orient: &OrientationMap,
    opts: &MagnetizeOptions,
) -> Result<()> {
    let n = opts.n;
    let mut summary = Vec::new();
    for (name, flips) in [
        ("repulsion", resolve_repulsion(strokes, orient, opts)?),
        ("attraction", resolve_attraction(strokes, orient, opts)?),
    ] {
        let m = magnetize_stroke(strokes, orient, &flips, opts)?;
        let field = stroke_field(&m)?;
        let norm = m.perpendicular.iter().map(|v| v * v).sum::<f64>().sqrt();
        out.grid(
            &format!("{name}_potential_n{n}"),
            &crop(&m.perpendicular),
            Some(Render::PngDiverging),
        )?;
        out.grid(
            &format!("{name}_field_n{n}"),
            &crop(&field.magnitude),
            Some(Render::PgmNorm),
        )?;
        let flipped: Vec<usize> = flips
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| i + 1)
            .collect();
        summary.push(
            json!({ "assignment": name, "flipped_substrokes": flipped, "l2_norm": sig12(norm) }),
        );
    }
    out.json(
        &format!("interact_n{n}.json"),
        &json!({ "schema": "empf.interact", "version": 1, "n": n, "substrokes": strokes.count(), "assignments": summary }),
    )
}
