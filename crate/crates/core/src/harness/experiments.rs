use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::config::ExperimentConfig;
use super::report::{csv_line, fmt_f64, Report};
use super::HarnessError;
use crate::calculus::{bonfiglioli_prototype, taylor_eval, taylor_poly};
use crate::error::CalculusError;
use crate::field::field_by_name;
use crate::fit::{fit_loglog, SlopeFit, ROUNDOFF_FLOOR};
use crate::group::{GroupSpec, Point};
use crate::multiindex::{enumerate_terms, word_count};
use crate::par;
use crate::paths::{connect, pivot_columns, VectorField};
use crate::presets::{random_point, random_unit_point};
use crate::regularity::{seminorm_x, Region, SeminormEstimate};

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn join_usize(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

// ---------------------------------------------------------------- group-info

#[derive(Debug, Clone, Serialize)]
pub struct GroupInfoReport {
    pub d: usize,
    pub r: usize,
    pub layers: Vec<usize>,
    pub exponents: Vec<u32>,
    pub powers: Vec<Vec<Vec<f64>>>,
    /// 0-based pivot column indices of `B_n ⋯ B_1` for each `n`.
    pub pivots: Vec<Vec<usize>>,
    pub parallel: bool,
}

pub fn cmd_group_info(config: &ExperimentConfig) -> Result<GroupInfoReport, HarnessError> {
    let g = &config.group;
    let pivots = (0..=g.r())
        .map(|n| pivot_columns(g, n).map(|p| p.indices))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GroupInfoReport {
        d: g.d(),
        r: g.r(),
        layers: g.layers().to_vec(),
        exponents: g.exponents().to_vec(),
        powers: (0..=g.r()).map(|n| matrix_rows(&g.matrix_power(n))).collect(),
        pivots,
        parallel: par::parallel_enabled(),
    })
}

impl Report for GroupInfoReport {
    fn passed(&self) -> bool {
        true
    }

    fn to_csv(&self) -> String {
        let mut out = csv_line(&["key".into(), "value".into()]);
        out += &csv_line(&["d".into(), self.d.to_string()]);
        out += &csv_line(&["r".into(), self.r.to_string()]);
        out += &csv_line(&["layers".into(), join_usize(&self.layers)]);
        let q: Vec<usize> = self.exponents.iter().map(|&q| q as usize).collect();
        out += &csv_line(&["exponents".into(), join_usize(&q)]);
        for (n, m) in self.powers.iter().enumerate() {
            let rows: Vec<String> = m
                .iter()
                .map(|row| row.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(" "))
                .collect();
            out += &csv_line(&[format!("B^{n}"), rows.join(";")]);
        }
        for (n, p) in self.pivots.iter().enumerate() {
            out += &csv_line(&[format!("pivots_{n}"), join_usize(p)]);
        }
        out
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    fn summary(&self) -> String {
        format!("d = {}, r = {}, layers = {:?}", self.d, self.r, self.layers)
    }
}

// ------------------------------------------------------------------ converge

/// One `(n, direction)` sweep over the radius grid.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceCell {
    pub n: u32,
    pub direction: usize,
    pub w: Point,
    pub rho: Vec<f64>,
    pub remainder: Vec<f64>,
    pub norm: Vec<f64>,
    pub fit: SlopeFit,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub experiment: String,
    pub field: String,
    pub alpha: f64,
    pub anchor: Point,
    pub floor: f64,
    pub cells: Vec<ConvergenceCell>,
}

impl ConvergenceReport {
    /// Smallest fitted slope among non-exact cells of order `n`.
    pub fn min_slope(&self, n: u32) -> Option<f64> {
        self.cells
            .iter()
            .filter(|c| c.n == n && !c.fit.exact)
            .map(|c| c.fit.slope)
            .reduce(f64::min)
    }
}

/// Remainder decay `|u(z) − T_n u(ζ, z)|` along `z = ζ∘D(ρ)w` for every
/// order, direction and radius of the config.
pub fn cmd_converge(config: &ExperimentConfig, jobs: usize) -> Result<ConvergenceReport, HarnessError> {
    let g = &config.group;
    let u = field_by_name(&config.field, g.d())?;
    let zeta = &config.anchor;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dirs: Vec<Point> = (0..config.directions)
        .map(|_| random_unit_point(g, config.equal_time, &mut rng))
        .collect();
    let grid = &config.rho_grid;
    let (nd, nr) = (dirs.len(), grid.len());

    par::run_with_jobs(jobs, || {
        let polys = par::map_indexed(config.orders.len(), |i| {
            taylor_poly(g, u.as_ref(), config.orders[i], zeta)
        })
        .into_iter()
        .collect::<Result<Vec<_>, CalculusError>>()?;

        let samples = par::map_indexed(polys.len() * nd * nr, |idx| {
            let (ni, rest) = (idx / (nd * nr), idx % (nd * nr));
            let (di, ri) = (rest / nr, rest % nr);
            let z = g.compose_raw(zeta, &g.dilate_raw(grid[ri], &dirs[di]));
            let t = taylor_eval(g, &polys[ni], &z).expect("dimensions validated");
            let norm = g.norm(&g.difference_raw(zeta, &z));
            (u.value(&z) - t, norm)
        });

        let floor = ROUNDOFF_FLOOR * u.value(zeta).abs().max(1.0);
        let mut cells = Vec::with_capacity(polys.len() * nd);
        for (ni, &n) in config.orders.iter().enumerate() {
            for (di, w) in dirs.iter().enumerate() {
                let block = &samples[(ni * nd + di) * nr..(ni * nd + di + 1) * nr];
                let remainder: Vec<f64> = block.iter().map(|s| s.0).collect();
                let norm: Vec<f64> = block.iter().map(|s| s.1).collect();
                let fit = fit_loglog(&norm, &remainder, floor);
                let threshold = n as f64 + config.alpha - config.slope_tolerance;
                let pass = fit.exact || (fit.points_used() >= 3 && fit.slope >= threshold);
                cells.push(ConvergenceCell {
                    n,
                    direction: di,
                    w: w.clone(),
                    rho: grid.clone(),
                    remainder,
                    norm,
                    fit,
                    threshold,
                    pass,
                });
            }
        }
        Ok(ConvergenceReport {
            experiment: config.id.clone(),
            field: config.field.clone(),
            alpha: config.alpha,
            anchor: zeta.clone(),
            floor,
            cells,
        })
    })
}

impl Report for ConvergenceReport {
    fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    fn to_csv(&self) -> String {
        let header = "experiment,n,alpha,direction,rho,remainder,norm,slope,used,exact,pass";
        let mut out = format!("{header}\n");
        for c in &self.cells {
            for i in 0..c.rho.len() {
                out += &csv_line(&[
                    self.experiment.clone(),
                    c.n.to_string(),
                    fmt_f64(self.alpha),
                    c.direction.to_string(),
                    fmt_f64(c.rho[i]),
                    fmt_f64(c.remainder[i]),
                    fmt_f64(c.norm[i]),
                    fmt_f64(c.fit.slope),
                    (c.fit.used[i] as u8).to_string(),
                    (c.fit.exact as u8).to_string(),
                    (c.pass as u8).to_string(),
                ]);
            }
        }
        out
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    fn failures(&self) -> Vec<String> {
        self.cells
            .iter()
            .filter(|c| !c.pass)
            .map(|c| {
                format!(
                    "n={} direction={} slope={:.4} threshold={:.4} points={}",
                    c.n,
                    c.direction,
                    c.fit.slope,
                    c.threshold,
                    c.fit.points_used()
                )
            })
            .collect()
    }

    fn summary(&self) -> String {
        let failed = self.cells.iter().filter(|c| !c.pass).count();
        let mut orders: Vec<u32> = self.cells.iter().map(|c| c.n).collect();
        orders.dedup();
        let slopes: Vec<String> = orders
            .iter()
            .map(|&n| match self.min_slope(n) {
                Some(s) => format!("n={n}: {s:.3}"),
                None => format!("n={n}: exact"),
            })
            .collect();
        format!(
            "{}: {} cells, {} failed; min slopes {}",
            self.experiment,
            self.cells.len(),
            failed,
            slopes.join(", ")
        )
    }
}

// ------------------------------------------------------- compare-bonfiglioli

#[derive(Debug, Clone, Serialize)]
pub struct BonfiglioliRow {
    pub n: u32,
    pub pairs: usize,
    pub max_abs_diff: f64,
    pub tolerance: f64,
    pub taylor_terms: usize,
    pub word_terms: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BonfiglioliReport {
    pub experiment: String,
    pub field: String,
    pub rows: Vec<BonfiglioliRow>,
}

/// Tolerance on `|T_n − P_n|`: tighter where both sums have the same terms.
pub fn bonfiglioli_tolerance(n: u32) -> f64 {
    if n <= 2 {
        1e-14
    } else {
        1e-10
    }
}

/// `max |T_n u(ζ, z) − P_n u(ζ, z)|` over random pairs with `ζ ∈ [−1, 1]^3`
/// and `z` in the unit ball around `ζ`, for `n = 0, …, 4`.
pub fn cmd_compare_bonfiglioli(config: &ExperimentConfig, jobs: usize) -> Result<BonfiglioliReport, HarnessError> {
    let g = &config.group;
    if !g.is_prototype() {
        return Err(CalculusError::UnsupportedGroup.into());
    }
    let u = field_by_name(&config.field, g.d())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pairs: Vec<(Point, Point)> = (0..config.compare_pairs)
        .map(|_| {
            let zeta = random_point(g.d(), 1.0, &mut rng);
            let w = random_unit_point(g, false, &mut rng);
            let rho = rand::Rng::random_range(&mut rng, 0.0..1.0);
            let z = g.compose_raw(&zeta, &g.dilate_raw(rho, &w));
            (zeta, z)
        })
        .collect();

    par::run_with_jobs(jobs, || {
        let per_pair = par::map_indexed(pairs.len(), |i| {
            let (zeta, z) = &pairs[i];
            (0..=4u32)
                .map(|n| {
                    let t = taylor_eval(g, &taylor_poly(g, u.as_ref(), n, zeta)?, z)?;
                    let p = bonfiglioli_prototype(g, u.as_ref(), n, zeta, z)?;
                    Ok((t - p).abs())
                })
                .collect::<Result<Vec<f64>, CalculusError>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

        let rows = (0..=4u32)
            .map(|n| {
                let max_abs_diff = per_pair
                    .iter()
                    .map(|d| d[n as usize])
                    .fold(0.0, f64::max);
                let tolerance = bonfiglioli_tolerance(n);
                let taylor_terms = enumerate_terms(g, n).len();
                let word_terms = word_count(g, n);
                BonfiglioliRow {
                    n,
                    pairs: pairs.len(),
                    max_abs_diff,
                    tolerance,
                    taylor_terms,
                    word_terms,
                    pass: max_abs_diff < tolerance,
                }
            })
            .collect();
        Ok(BonfiglioliReport {
            experiment: config.id.clone(),
            field: config.field.clone(),
            rows,
        })
    })
}

impl Report for BonfiglioliReport {
    fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    fn to_csv(&self) -> String {
        let mut out = "experiment,n,pairs,max_abs_diff,tolerance,taylor_terms,word_terms,pass\n".to_string();
        for r in &self.rows {
            out += &csv_line(&[
                self.experiment.clone(),
                r.n.to_string(),
                r.pairs.to_string(),
                fmt_f64(r.max_abs_diff),
                fmt_f64(r.tolerance),
                r.taylor_terms.to_string(),
                r.word_terms.to_string(),
                (r.pass as u8).to_string(),
            ]);
        }
        out
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    fn failures(&self) -> Vec<String> {
        self.rows
            .iter()
            .filter(|r| !r.pass)
            .map(|r| format!("n={} max|T-P|={:e} tolerance={:e}", r.n, r.max_abs_diff, r.tolerance))
            .collect()
    }

    fn summary(&self) -> String {
        let worst = self.rows.iter().map(|r| r.max_abs_diff).fold(0.0, f64::max);
        format!("{}: max |T_n - P_n| = {worst:e} over n <= 4", self.experiment)
    }
}

// -------------------------------------------------------------- connect-demo

#[derive(Debug, Clone, Serialize)]
pub struct ConnectReport {
    pub experiment: String,
    pub start: Point,
    pub target: Point,
    pub endpoint: Point,
    pub error: f64,
    pub tolerance: f64,
    pub deltas: Vec<f64>,
    /// `(step level, waypoint)`; the start point is listed once with the
    /// first level, and skipped steps contribute nothing.
    pub waypoints: Vec<(usize, Point)>,
}

pub const CONNECT_TOLERANCE: f64 = 1e-10;

pub fn cmd_connect_demo(config: &ExperimentConfig) -> Result<ConnectReport, HarnessError> {
    let g = &config.group;
    let n = config.connect_level;
    let start = &config.connect_start;
    let res = connect(g, n, start, &config.connect_increment)?;
    let target = start.shifted(&config.connect_increment);

    let mut waypoints = vec![(n, start.clone())];
    for (i, path) in res.paths.iter().enumerate() {
        if path.segment_count == 0 {
            continue;
        }
        waypoints.extend(path.waypoints.iter().skip(1).map(|p| (n + i, p.clone())));
    }
    let endpoint = res.endpoint().clone();
    Ok(ConnectReport {
        experiment: config.id.clone(),
        start: start.clone(),
        error: endpoint.max_abs_diff(&target),
        target,
        endpoint,
        tolerance: CONNECT_TOLERANCE,
        deltas: res.deltas,
        waypoints,
    })
}

impl Report for ConnectReport {
    fn passed(&self) -> bool {
        self.error < self.tolerance
    }

    fn to_csv(&self) -> String {
        let d = self.start.dim();
        let mut header = vec!["experiment".to_string(), "step".into(), "index".into(), "t".into()];
        header.extend((1..=d).map(|j| format!("x{j}")));
        let mut out = csv_line(&header);
        for (i, (step, p)) in self.waypoints.iter().enumerate() {
            let mut row = vec![self.experiment.clone(), step.to_string(), i.to_string(), fmt_f64(p.t)];
            row.extend(p.x.iter().map(|&v| fmt_f64(v)));
            out += &csv_line(&row);
        }
        out
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    fn failures(&self) -> Vec<String> {
        if self.passed() {
            Vec::new()
        } else {
            vec![format!(
                "endpoint {:?} misses target {:?} by {:e}",
                self.endpoint.to_vec(),
                self.target.to_vec(),
                self.error
            )]
        }
    }

    fn summary(&self) -> String {
        format!(
            "{}: {} waypoints, endpoint error {:e}",
            self.experiment,
            self.waypoints.len(),
            self.error
        )
    }
}

// --------------------------------------------------------------- holder-scan

#[derive(Debug, Clone, Serialize)]
pub struct HolderReport {
    pub experiment: String,
    pub region: Vec<Region>,
    pub estimates: Vec<(String, SeminormEstimate)>,
}

fn parse_vector_field(name: &str) -> Result<VectorField, HarnessError> {
    let err = || {
        HarnessError::Config(super::ConfigError::Invalid {
            key: "holder.vector_fields".into(),
            message: format!("unknown vector field `{name}` (Y or X<i>)"),
        })
    };
    match name {
        "Y" => Ok(VectorField::Y),
        _ => name
            .strip_prefix('X')
            .and_then(|i| i.parse::<usize>().ok())
            .filter(|&i| i >= 1)
            .map(VectorField::X)
            .ok_or_else(err),
    }
}

/// Sampled intrinsic Hölder seminorms of each listed field along each
/// listed vector field. `α` is capped at 1 for the `X_i`.
pub fn cmd_holder_scan(config: &ExperimentConfig, jobs: usize) -> Result<HolderReport, HarnessError> {
    let g = &config.group;
    let vfs = config
        .holder_vector_fields
        .iter()
        .map(|s| parse_vector_field(s))
        .collect::<Result<Vec<_>, _>>()?;
    par::run_with_jobs(jobs, || {
        let mut estimates = Vec::new();
        let mut regions = Vec::new();
        for name in &config.holder_fields {
            let u = field_by_name(name, g.d())?;
            let region = Region::default_for(name, g.d());
            for &vf in &vfs {
                let alpha = match vf {
                    VectorField::Y => config.holder_alpha,
                    VectorField::X(_) => config.holder_alpha.min(1.0),
                };
                let e = seminorm_x(g, u.as_ref(), vf, alpha, &region, config.holder_samples, config.seed)?;
                estimates.push((name.clone(), e));
            }
            regions.push(region);
        }
        Ok(HolderReport {
            experiment: config.id.clone(),
            region: regions,
            estimates,
        })
    })
}

impl Report for HolderReport {
    fn passed(&self) -> bool {
        self.estimates.iter().all(|(_, e)| !e.saturated)
    }

    fn to_csv(&self) -> String {
        let mut out =
            "experiment,field,vector_field,alpha,delta,sup_quotient,seminorm,trend_slope,saturated\n".to_string();
        for (name, e) in &self.estimates {
            for &(delta, q) in &e.per_delta {
                out += &csv_line(&[
                    self.experiment.clone(),
                    name.clone(),
                    e.field.clone(),
                    fmt_f64(e.alpha),
                    fmt_f64(delta),
                    fmt_f64(q),
                    fmt_f64(e.value),
                    fmt_f64(e.trend_slope),
                    (e.saturated as u8).to_string(),
                ]);
            }
        }
        out
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    fn failures(&self) -> Vec<String> {
        self.estimates
            .iter()
            .filter(|(_, e)| e.saturated)
            .map(|(name, e)| {
                format!(
                    "{name} along {} (alpha={}): quotient grows, trend slope {:.3}",
                    e.field, e.alpha, e.trend_slope
                )
            })
            .collect()
    }

    fn summary(&self) -> String {
        let parts: Vec<String> = self
            .estimates
            .iter()
            .map(|(name, e)| {
                format!(
                    "{name}/{}: {:.4}{}",
                    e.field,
                    e.value,
                    if e.saturated { " (growing)" } else { "" }
                )
            })
            .collect();
        format!("{}: {}", self.experiment, parts.join(", "))
    }
}

// --------------------------------------------------------------- taylor-eval

#[derive(Debug, Clone, Serialize)]
pub struct TaylorEvalRow {
    pub n: u32,
    pub terms: usize,
    pub taylor: f64,
    pub value: f64,
    pub remainder: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaylorEvalReport {
    pub experiment: String,
    pub field: String,
    pub anchor: Point,
    pub point: Point,
    pub rows: Vec<TaylorEvalRow>,
}

/// `T_n u(ζ, z)` for `n = 0, …, taylor.order` at the configured pair.
pub fn cmd_taylor_eval(config: &ExperimentConfig) -> Result<TaylorEvalReport, HarnessError> {
    let g: &GroupSpec = &config.group;
    let u = field_by_name(&config.field, g.d())?;
    let (zeta, z) = (&config.anchor, &config.taylor_point);
    let value = u.value(z);
    let norm = g.norm(&g.difference(zeta, z)?);
    let rows = (0..=config.taylor_order)
        .map(|n| {
            let poly = taylor_poly(g, u.as_ref(), n, zeta)?;
            let taylor = taylor_eval(g, &poly, z)?;
            Ok(TaylorEvalRow {
                n,
                terms: poly.terms.len(),
                taylor,
                value,
                remainder: value - taylor,
                norm,
            })
        })
        .collect::<Result<Vec<_>, CalculusError>>()?;
    Ok(TaylorEvalReport {
        experiment: config.id.clone(),
        field: config.field.clone(),
        anchor: zeta.clone(),
        point: z.clone(),
        rows,
    })
}

impl Report for TaylorEvalReport {
    fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.taylor.is_finite())
    }

    fn to_csv(&self) -> String {
        let mut out = "experiment,n,terms,taylor,value,remainder,norm\n".to_string();
        for r in &self.rows {
            out += &csv_line(&[
                self.experiment.clone(),
                r.n.to_string(),
                r.terms.to_string(),
                fmt_f64(r.taylor),
                fmt_f64(r.value),
                fmt_f64(r.remainder),
                fmt_f64(r.norm),
            ]);
        }
        out
    }

    fn to_json(&self) -> serde_json::Value {
        json!({
            "experiment": self.experiment,
            "field": self.field,
            "anchor": self.anchor,
            "point": self.point,
            "rows": self.rows,
        })
    }

    fn summary(&self) -> String {
        match self.rows.last() {
            Some(r) => format!(
                "{}: T_{} = {:.12} (u = {:.12}, remainder {:e})",
                self.experiment, r.n, r.taylor, r.value, r.remainder
            ),
            None => format!("{}: no orders", self.experiment),
        }
    }
}
