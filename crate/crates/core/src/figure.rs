//! Orthonormal plane coordinates for the zero-sum hyperplane, plus the
//! CSV/SVG figure emitters built on them.
//!
//! SVG output is fully deterministic: fixed element order and 9 significant
//! digits everywhere, so identical inputs give identical bytes.

use crate::channel::{Channel, DiscreteChannel, Observation, Prior};
use crate::detect;
use crate::embedding::{self, EmbeddedPoint};
use crate::error::Error;
use crate::numfmt::sig9;
use crate::tolerance;

/// What a plotted point depicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Symbol,
    Observation,
    Locus,
}

impl PointKind {
    pub fn name(self) -> &'static str {
        match self {
            PointKind::Symbol => "symbol",
            PointKind::Observation => "observation",
            PointKind::Locus => "locus",
        }
    }
}

/// An embedded point with its display label.
#[derive(Debug, Clone)]
pub struct LabeledPoint {
    pub label: String,
    pub kind: PointKind,
    pub point: EmbeddedPoint,
}

/// A point expressed in plane coordinates.
#[derive(Debug, Clone)]
pub struct ProjectedPoint {
    pub label: String,
    pub kind: PointKind,
    pub coords: Vec<f64>,
}

/// Points expressed in a fixed orthonormal basis of the zero-sum plane.
#[derive(Debug, Clone)]
pub struct PlaneProjection {
    basis: Vec<Vec<f64>>,
    points: Vec<ProjectedPoint>,
    ambient: usize,
}

/// The canonical orthonormal basis of the zero-sum plane: row k is
/// `(1, ..., 1, -k, 0, ..., 0) / sqrt(k(k+1))` with k leading ones. For
/// N = 3 this is `(1, -1, 0)/√2` and `(1, 1, -2)/√6`.
pub fn plane_basis(n: usize) -> Vec<Vec<f64>> {
    (1..n)
        .map(|k| {
            let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
            let mut row = vec![0.0; n];
            for entry in row.iter_mut().take(k) {
                *entry = scale;
            }
            row[k] = -(k as f64) * scale;
            row
        })
        .collect()
}

/// Drops the redundant ambient coordinate: plane points come out in N-1
/// coordinates with all pairwise distances preserved. Points off the
/// zero-sum plane are rejected.
pub fn project(points: &[LabeledPoint]) -> Result<PlaneProjection, Error> {
    let ambient = match points.first() {
        Some(p) => p.point.dim(),
        None => {
            return Err(Error::InvalidArgument(
                "nothing to project".into(),
            ))
        }
    };
    let basis = plane_basis(ambient);
    let mut projected = Vec::with_capacity(points.len());
    for labeled in points {
        if labeled.point.dim() != ambient {
            return Err(Error::DimensionMismatch {
                left: labeled.point.dim(),
                right: ambient,
            });
        }
        let coords = labeled.point.coords();
        let sum: f64 = coords.iter().sum();
        let scale = coords.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
        if sum.abs() > tolerance::PLANE_SUM_ABS * scale {
            return Err(Error::NotInPlane { sum });
        }
        let plane: Vec<f64> = basis
            .iter()
            .map(|row| row.iter().zip(coords).map(|(b, c)| b * c).sum())
            .collect();
        projected.push(ProjectedPoint {
            label: labeled.label.clone(),
            kind: labeled.kind,
            coords: plane,
        });
    }
    Ok(PlaneProjection {
        basis,
        points: projected,
        ambient,
    })
}

impl PlaneProjection {
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn points(&self) -> &[ProjectedPoint] {
        &self.points
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Inverse map from plane coordinates back to ambient zero-sum
    /// coordinates.
    pub fn unproject(&self, coords: &[f64]) -> Result<EmbeddedPoint, Error> {
        if coords.len() != self.ambient - 1 {
            return Err(Error::DimensionMismatch {
                left: coords.len(),
                right: self.ambient - 1,
            });
        }
        let mut ambient = vec![0.0; self.ambient];
        for (c, row) in coords.iter().zip(&self.basis) {
            for (a, b) in ambient.iter_mut().zip(row) {
                *a += c * b;
            }
        }
        EmbeddedPoint::from_coords(ambient)
    }

    /// CSV rows `label,kind,<plane coordinates>`; the two columns are
    /// named `u,v` when the plane is two-dimensional.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,kind");
        if self.ambient == 3 {
            out.push_str(",u,v");
        } else {
            for k in 1..self.ambient {
                out.push_str(&format!(",u{k}"));
            }
        }
        out.push('\n');
        for point in &self.points {
            out.push_str(&csv_field(&point.label));
            out.push(',');
            out.push_str(point.kind.name());
            for c in &point.coords {
                out.push(',');
                out.push_str(&sig9(*c));
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

/// Summary statistics the CLI gates its figure invariants on.
#[derive(Debug, Clone)]
pub enum FigureSummary {
    Discrete {
        /// Pairwise distance of the projected symbol images.
        triangle_side: f64,
        /// Worst distance-difference of a tied observation to its two
        /// tied symbols; tied observations sit on the bisector.
        tie_residual: f64,
        tie_labels: Vec<String>,
    },
    AwgnLocus {
        collinearity_residual: f64,
    },
    LaplaceLocus {
        /// Maximal-direction runs of the locus polyline.
        pieces: usize,
        /// Stationary runs where many y values share one image.
        saturation_points: usize,
    },
}

/// A rendered figure: CSV always, SVG when the plane is two-dimensional.
#[derive(Debug, Clone)]
pub struct FigureDocument {
    pub csv: String,
    pub svg: Option<String>,
    pub summary: FigureSummary,
}

/// Symbol images, observation images, and the MAP decision boundaries of
/// a discrete channel. The boundaries are the perpendicular bisectors of
/// the symbol pairs; equal vertex norms put them all through the origin.
pub fn figure_discrete(channel: &DiscreteChannel, prior: &Prior) -> Result<FigureDocument, Error> {
    let wrapped = Channel::Discrete(channel.clone());
    let alphabet = wrapped.alphabet();
    let mut labeled: Vec<LabeledPoint> = Vec::new();
    for (i, label) in alphabet.labels().iter().enumerate() {
        labeled.push(LabeledPoint {
            label: label.clone(),
            kind: PointKind::Symbol,
            point: embedding::embed_symbol(alphabet, i)?,
        });
    }
    for label in channel.observation_labels() {
        let posterior = wrapped.posterior(prior, &Observation::Label(label.clone()))?;
        labeled.push(LabeledPoint {
            label: label.clone(),
            kind: PointKind::Observation,
            point: embedding::embed_observation(&posterior)?,
        });
    }
    let projection = project(&labeled)?;
    let n = alphabet.size();
    let symbols: Vec<&ProjectedPoint> = projection
        .points()
        .iter()
        .filter(|p| p.kind == PointKind::Symbol)
        .collect();
    let triangle_side = plane_distance(&symbols[0].coords, &symbols[1].coords);

    // Tied observations must be equidistant from their tied symbols even
    // after projection.
    let regions = detect::decision_regions(channel, prior)?;
    let mut tie_residual = 0.0_f64;
    let mut tie_labels = Vec::new();
    for point in projection
        .points()
        .iter()
        .filter(|p| p.kind == PointKind::Observation)
    {
        let decision = &regions[&point.label];
        if !decision.tie {
            continue;
        }
        tie_labels.push(point.label.clone());
        let tied = decision.tied_indices();
        for a in 0..tied.len() {
            for b in (a + 1)..tied.len() {
                let da = plane_distance(&point.coords, &symbols[tied[a]].coords);
                let db = plane_distance(&point.coords, &symbols[tied[b]].coords);
                tie_residual = tie_residual.max((da - db).abs());
            }
        }
    }

    let svg = (n == 3).then(|| {
        let mut scene = SvgScene::new(&projection);
        for i in 0..n {
            for j in (i + 1)..n {
                scene.add_bisector(&symbols[i].coords, &symbols[j].coords);
            }
        }
        scene.render()
    });
    Ok(FigureDocument {
        csv: projection.to_csv(),
        svg,
        summary: FigureSummary::Discrete {
            triangle_side,
            tie_residual,
            tie_labels,
        },
    })
}

/// Observation-image locus of an additive-noise channel over a y grid,
/// with the symbol images for reference. Laplace grids are refined with
/// the exact kink locations (the symbol values), which is what makes the
/// piecewise-linear structure visible at any grid resolution.
pub fn figure_locus(
    channel: &Channel,
    prior: &Prior,
    y_grid: &[f64],
) -> Result<FigureDocument, Error> {
    let values = match channel {
        Channel::Awgn(c) => c.values().to_vec(),
        Channel::Laplace(c) => c.values().to_vec(),
        Channel::Discrete(_) => {
            return Err(Error::InvalidArgument(
                "locus figures apply to the additive-noise families".into(),
            ))
        }
    };
    if y_grid.is_empty() {
        return Err(Error::InvalidArgument("empty y grid".into()));
    }
    if let Some(bad) = y_grid.iter().find(|y| !y.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite grid value {bad}")));
    }
    let mut grid = y_grid.to_vec();
    if matches!(channel, Channel::Laplace(_)) {
        let lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        grid.extend(values.iter().copied().filter(|v| *v > lo && *v < hi));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let alphabet = channel.alphabet();
    let mut labeled: Vec<LabeledPoint> = Vec::new();
    for (i, label) in alphabet.labels().iter().enumerate() {
        labeled.push(LabeledPoint {
            label: label.clone(),
            kind: PointKind::Symbol,
            point: embedding::embed_symbol(alphabet, i)?,
        });
    }
    for y in &grid {
        let posterior = channel.posterior(prior, &Observation::Value(*y))?;
        labeled.push(LabeledPoint {
            label: sig9(*y),
            kind: PointKind::Locus,
            point: embedding::embed_observation(&posterior)?,
        });
    }
    let projection = project(&labeled)?;
    let locus: Vec<Vec<f64>> = projection
        .points()
        .iter()
        .filter(|p| p.kind == PointKind::Locus)
        .map(|p| p.coords.clone())
        .collect();

    let summary = match channel {
        Channel::Awgn(_) => FigureSummary::AwgnLocus {
            collinearity_residual: collinearity_residual(&locus),
        },
        Channel::Laplace(_) => {
            let (pieces, saturation_points) = count_linear_pieces(&locus);
            FigureSummary::LaplaceLocus {
                pieces,
                saturation_points,
            }
        }
        Channel::Discrete(_) => unreachable!(),
    };
    let svg = (alphabet.size() == 3).then(|| {
        let mut scene = SvgScene::new(&projection);
        scene.set_locus(&locus);
        scene.render()
    });
    Ok(FigureDocument {
        csv: projection.to_csv(),
        svg,
        summary,
    })
}

fn plane_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Worst normalized cross product of any segment against the first
/// non-degenerate one; zero means perfectly collinear.
fn collinearity_residual(points: &[Vec<f64>]) -> f64 {
    if points.len() < 3 || points[0].len() != 2 {
        return 0.0;
    }
    let spread = point_spread(points);
    let segments: Vec<[f64; 2]> = points
        .windows(2)
        .map(|w| [w[1][0] - w[0][0], w[1][1] - w[0][1]])
        .collect();
    let reference = match segments
        .iter()
        .find(|s| (s[0] * s[0] + s[1] * s[1]).sqrt() > tolerance::COLLINEAR_REL * spread)
    {
        Some(s) => *s,
        None => return 0.0,
    };
    let ref_norm = (reference[0] * reference[0] + reference[1] * reference[1]).sqrt();
    segments
        .iter()
        .map(|s| {
            let norm = (s[0] * s[0] + s[1] * s[1]).sqrt();
            if norm <= tolerance::COLLINEAR_REL * spread {
                0.0
            } else {
                (s[0] * reference[1] - s[1] * reference[0]).abs() / (norm * ref_norm)
            }
        })
        .fold(0.0, f64::max)
}

/// Splits a polyline into maximal runs of one direction. Stationary runs
/// (consecutive coincident points) count as pieces of their own and are
/// reported separately; the saturated ends of a bounded-noise locus show
/// up there.
fn count_linear_pieces(points: &[Vec<f64>]) -> (usize, usize) {
    if points.len() < 2 {
        return (0, 0);
    }
    let spread = point_spread(points);
    let zero_len = tolerance::COLLINEAR_REL * spread.max(f64::MIN_POSITIVE);

    #[derive(Clone, Copy)]
    enum Class {
        Stationary,
        Direction([f64; 2]),
    }
    let classify = |a: &[f64], b: &[f64]| -> Class {
        let d = [b[0] - a[0], b[1] - a[1]];
        let norm = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if norm <= zero_len {
            Class::Stationary
        } else {
            Class::Direction([d[0] / norm, d[1] / norm])
        }
    };
    let same = |a: &Class, b: &Class| -> bool {
        match (a, b) {
            (Class::Stationary, Class::Stationary) => true,
            (Class::Direction(u), Class::Direction(v)) => {
                let cross = (u[0] * v[1] - u[1] * v[0]).abs();
                let dot = u[0] * v[0] + u[1] * v[1];
                cross <= tolerance::COLLINEAR_REL && dot > 0.0
            }
            _ => false,
        }
    };

    let mut pieces = 0usize;
    let mut stationary_runs = 0usize;
    let mut current: Option<Class> = None;
    for w in points.windows(2) {
        let class = classify(&w[0], &w[1]);
        let continues = current.as_ref().map(|c| same(c, &class)).unwrap_or(false);
        if !continues {
            pieces += 1;
            if matches!(class, Class::Stationary) {
                stationary_runs += 1;
            }
            current = Some(class);
        }
    }
    (pieces, stationary_runs)
}

fn point_spread(points: &[Vec<f64>]) -> f64 {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (hi[0] - lo[0]).max(hi[1] - lo[1]).max(0.0)
}

/// Deterministic SVG assembly for two-dimensional planes.
struct SvgScene {
    symbols: Vec<(String, [f64; 2])>,
    observations: Vec<(String, [f64; 2])>,
    locus: Vec<[f64; 2]>,
    bisectors: Vec<([f64; 2], [f64; 2])>,
}

impl SvgScene {
    fn new(projection: &PlaneProjection) -> Self {
        let mut scene = SvgScene {
            symbols: Vec::new(),
            observations: Vec::new(),
            locus: Vec::new(),
            bisectors: Vec::new(),
        };
        for point in projection.points() {
            let xy = [point.coords[0], point.coords[1]];
            match point.kind {
                PointKind::Symbol => scene.symbols.push((point.label.clone(), xy)),
                PointKind::Observation => scene.observations.push((point.label.clone(), xy)),
                PointKind::Locus => {}
            }
        }
        scene
    }

    fn set_locus(&mut self, locus: &[Vec<f64>]) {
        self.locus = locus.iter().map(|p| [p[0], p[1]]).collect();
    }

    /// Perpendicular bisector of two equal-norm points: through the
    /// origin, perpendicular to their difference, clipped later.
    fn add_bisector(&mut self, a: &[f64], b: &[f64]) {
        let diff = [a[0] - b[0], a[1] - b[1]];
        let norm = (diff[0] * diff[0] + diff[1] * diff[1]).sqrt();
        if norm == 0.0 {
            return;
        }
        let direction = [-diff[1] / norm, diff[0] / norm];
        self.bisectors.push(([0.0, 0.0], direction));
    }

    fn render(&self) -> String {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        let mut grow = |p: &[f64; 2]| {
            for k in 0..2 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        };
        for (_, p) in self.symbols.iter().chain(&self.observations) {
            grow(p);
        }
        for p in &self.locus {
            grow(p);
        }
        let extent = (max[0] - min[0]).max(max[1] - min[1]).max(1e-3);
        let margin = 0.1 * extent;
        let view = [
            min[0] - margin,
            min[1] - margin,
            (max[0] - min[0]) + 2.0 * margin,
            (max[1] - min[1]) + 2.0 * margin,
        ];
        // SVG y grows downward; flip the second coordinate.
        let flip = |p: &[f64; 2]| [p[0], -p[1]];
        let view_y = -(view[1] + view[3]);
        let stroke = extent / 250.0;
        let radius = extent / 60.0;
        let font = extent / 18.0;

        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\">\n",
            sig9(view[0]),
            sig9(view_y),
            sig9(view[2]),
            sig9(view[3])
        ));
        for (origin, direction) in &self.bisectors {
            if let Some((p1, p2)) = clip_line(*origin, *direction, &view) {
                let a = flip(&p1);
                let b = flip(&p2);
                out.push_str(&format!(
                    "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#777777\" \
                     stroke-width=\"{}\" stroke-dasharray=\"{} {}\"/>\n",
                    sig9(a[0]),
                    sig9(a[1]),
                    sig9(b[0]),
                    sig9(b[1]),
                    sig9(stroke),
                    sig9(4.0 * stroke),
                    sig9(3.0 * stroke)
                ));
            }
        }
        if self.locus.len() >= 2 {
            out.push_str("  <polyline points=\"");
            for (i, p) in self.locus.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let q = flip(p);
                out.push_str(&format!("{},{}", sig9(q[0]), sig9(q[1])));
            }
            out.push_str(&format!(
                "\" fill=\"none\" stroke=\"#1f6feb\" stroke-width=\"{}\"/>\n",
                sig9(1.5 * stroke)
            ));
        } else if self.locus.len() == 1 {
            let q = flip(&self.locus[0]);
            out.push_str(&format!(
                "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#1f6feb\"/>\n",
                sig9(q[0]),
                sig9(q[1]),
                sig9(radius)
            ));
        }
        for (label, p) in &self.symbols {
            let q = flip(p);
            out.push_str(&format!(
                "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#000000\"/>\n",
                sig9(q[0]),
                sig9(q[1]),
                sig9(radius)
            ));
            out.push_str(&format!(
                "  <text x=\"{}\" y=\"{}\" font-size=\"{}\" fill=\"#000000\">{}</text>\n",
                sig9(q[0] + 1.4 * radius),
                sig9(q[1] - 1.4 * radius),
                sig9(font),
                xml_escape(label)
            ));
        }
        for (label, p) in &self.observations {
            let q = flip(p);
            out.push_str(&format!(
                "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#cc0000\"/>\n",
                sig9(q[0]),
                sig9(q[1]),
                sig9(0.8 * radius)
            ));
            out.push_str(&format!(
                "  <text x=\"{}\" y=\"{}\" font-size=\"{}\" fill=\"#cc0000\">{}</text>\n",
                sig9(q[0] + 1.2 * radius),
                sig9(q[1] + 1.8 * radius),
                sig9(font),
                xml_escape(label)
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Clips the line `origin + t*direction` to the `[x, y, w, h]` box,
/// returning the entry and exit points if it crosses at all.
fn clip_line(origin: [f64; 2], direction: [f64; 2], view: &[f64; 4]) -> Option<([f64; 2], [f64; 2])> {
    let mut t_min = f64::NEG_INFINITY;
    let mut t_max = f64::INFINITY;
    for k in 0..2 {
        let lo = view[k];
        let hi = view[k] + view[k + 2];
        if direction[k].abs() < 1e-300 {
            if origin[k] < lo || origin[k] > hi {
                return None;
            }
        } else {
            let t1 = (lo - origin[k]) / direction[k];
            let t2 = (hi - origin[k]) / direction[k];
            let (t1, t2) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            t_min = t_min.max(t1);
            t_max = t_max.min(t2);
        }
    }
    if t_min >= t_max {
        return None;
    }
    Some((
        [
            origin[0] + t_min * direction[0],
            origin[1] + t_min * direction[1],
        ],
        [
            origin[0] + t_max * direction[0],
            origin[1] + t_max * direction[1],
        ],
    ))
}

fn xml_escape(raw: &str) -> String {
    raw.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
