//! Reflectivity sweeps, one-dimensional reflectivity optimisation and
//! asymmetric-loss regime scans.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels;
use crate::network::{build, inject_asymmetric_loss, BuiltNetwork, NetworkSpec};
use crate::steering::{
    collective_steering_report, monogamy_check, steering_product, tripartite_criteria, SteeringReport,
    TripartiteVerdict,
};

/// Coarse-grid size used before golden-section refinement.
pub const DEFAULT_COARSE_POINTS: usize = 201;
/// Default refinement tolerance in reflectivity (fraction).
pub const DEFAULT_TOLERANCE: f64 = 1e-4;
/// Resolution of regime-transition bisection, in loss fraction.
pub const TRANSITION_RESOLUTION: f64 = 1e-5;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Worst directional steering number over the active modes.
    MaxSteering,
    /// Mean steering number over the active modes.
    MeanSteering,
    /// Tripartite variance product on the default triple.
    Tripartite,
}

impl Objective {
    pub fn evaluate(self, spec: &NetworkSpec) -> Result<f64> {
        let built = build(spec)?;
        match self {
            Objective::MaxSteering => {
                Ok(collective_steering_report(&built.state, &built.active_modes)?.max_steering_number())
            }
            Objective::MeanSteering => {
                Ok(collective_steering_report(&built.state, &built.active_modes)?.mean_steering_number())
            }
            Objective::Tripartite => {
                let triple = default_triple(&built.active_modes).ok_or_else(|| {
                    Error::InvalidArgument("tripartite objective needs at least 3 active modes".into())
                })?;
                Ok(tripartite_criteria(&built.state, triple)?.product_of_variances)
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::MaxSteering => "max-steering",
            Objective::MeanSteering => "mean-steering",
            Objective::Tripartite => "tripartite",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-steering" | "max_steering_number" => Ok(Objective::MaxSteering),
            "mean-steering" | "mean_steering_number" => Ok(Objective::MeanSteering),
            "tripartite" | "tripartite_value" => Ok(Objective::Tripartite),
            other => Err(Error::UnknownParameter(other.to_string())),
        }
    }
}

/// The scanned quantity: a named splitter's reflectivity (as a fraction) or
/// the asymmetric loss fraction after the first splitter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepParameter {
    Reflectivity(String),
    LossFraction,
}

impl SweepParameter {
    pub fn parse(spec: &NetworkSpec, name: &str) -> Result<Self> {
        match name {
            "loss" | "loss_fraction" => Ok(SweepParameter::LossFraction),
            _ if spec.beamsplitter(name).is_some() => Ok(SweepParameter::Reflectivity(name.to_string())),
            _ => Err(Error::UnknownParameter(name.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            SweepParameter::Reflectivity(n) => n,
            SweepParameter::LossFraction => "loss_fraction",
        }
    }

    pub fn apply(&self, spec: &NetworkSpec, value: f64) -> Result<NetworkSpec> {
        match self {
            SweepParameter::Reflectivity(name) => spec.with_reflectivity(name, 100.0 * value),
            SweepParameter::LossFraction => inject_asymmetric_loss(spec, value),
        }
    }
}

/// The triple `(A, B, C)` used for monogamy and tripartite columns: the
/// second active mode is singled out against the first and third.
pub fn default_triple(active: &[usize]) -> Option<[usize; 3]> {
    (active.len() >= 3).then(|| [active[1], active[0], active[2]])
}

/// Monogamy quantities for a fixed triple `(A, B, C)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonogamyRow {
    pub s_a_b: f64,
    pub s_a_c: f64,
    pub product: f64,
    /// `S_{A|BC}`: steering of A by B and C together.
    pub s_a_bc: f64,
    pub s_b_a: f64,
    pub s_c_a: f64,
}

impl MonogamyRow {
    pub fn evaluate(built: &BuiltNetwork, [a, b, c]: [usize; 3]) -> Result<Self> {
        let mono = monogamy_check(&built.state, a, &[b], &[c])?;
        Ok(Self {
            s_a_b: mono.s_a_b,
            s_a_c: mono.s_a_c,
            product: mono.product,
            s_a_bc: steering_product(&built.state, a, &[b, c])?.s,
            s_b_a: steering_product(&built.state, b, &[a])?.s,
            s_c_a: steering_product(&built.state, c, &[a])?.s,
        })
    }

    /// Neither B nor C alone steers A, but together they do.
    pub fn collaboration_only(&self) -> bool {
        self.s_a_b >= 1.0 && self.s_a_c >= 1.0 && self.s_a_bc < 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub report: SteeringReport,
    pub monogamy: Option<MonogamyRow>,
    pub tripartite: Option<TripartiteVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub parameter_name: String,
    pub n_modes: usize,
    /// `(A, B, C)` used for the monogamy and tripartite columns (0-based).
    #[serde(serialize_with = "labels::opt_triple")]
    pub triple: Option<[usize; 3]>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn parameter_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.parameter).collect()
    }

    /// Column names of [`SweepResult::to_csv`] for a network of `n_modes` modes.
    pub fn csv_header(n_modes: usize) -> Vec<String> {
        let mut cols = vec!["parameter".to_string()];
        cols.extend((1..=n_modes).map(|m| format!("s2_m{m}")));
        cols.extend(
            [
                "mono_s_a_b",
                "mono_s_a_c",
                "mono_product",
                "s_a_bc",
                "s_b_a",
                "s_c_a",
                "tripartite",
                "regime_count",
                "full_inseparability",
            ]
            .map(String::from),
        );
        cols
    }

    /// One row per grid point. Steering numbers of inactive modes and
    /// inapplicable metrics are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = Self::csv_header(self.n_modes).join(",");
        out.push('\n');
        for row in &self.rows {
            let mut fields = vec![row.parameter.to_string()];
            for m in 0..self.n_modes {
                fields.push(
                    row.report
                        .entry(m)
                        .map(|e| e.steering_number.to_string())
                        .unwrap_or_default(),
                );
            }
            match &row.monogamy {
                Some(mono) => fields.extend(
                    [
                        mono.s_a_b,
                        mono.s_a_c,
                        mono.product,
                        mono.s_a_bc,
                        mono.s_b_a,
                        mono.s_c_a,
                    ]
                    .map(|v| v.to_string()),
                ),
                None => fields.extend(std::iter::repeat_n(String::new(), 6)),
            }
            fields.push(
                row.tripartite
                    .as_ref()
                    .map(|t| t.product_of_variances.to_string())
                    .unwrap_or_default(),
            );
            fields.push(row.report.regime_count.to_string());
            fields.push(row.report.full_inseparability.to_string());
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }
}

/// `steps` evenly spaced points from `from` to `to` inclusive.
pub fn grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                to
            } else {
                from + (to - from) * (i as f64 / last)
            }
        })
        .collect()
}

fn evaluate_point(spec: &NetworkSpec, triple: Option<[usize; 3]>, parameter: f64) -> Result<SweepRow> {
    let built = build(spec)?;
    let report = collective_steering_report(&built.state, &built.active_modes)?;
    let monogamy = triple.map(|t| MonogamyRow::evaluate(&built, t)).transpose()?;
    let tripartite = triple.map(|t| tripartite_criteria(&built.state, t)).transpose()?;
    Ok(SweepRow {
        parameter,
        report,
        monogamy,
        tripartite,
    })
}

/// Evaluates the full metric suite at `steps` points of `parameter` over
/// `[from, to]`. Reflectivities are fractions here.
pub fn sweep(spec: &NetworkSpec, parameter: &SweepParameter, from: f64, to: f64, steps: usize) -> Result<SweepResult> {
    if steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "sweep needs at least 2 steps, got {steps}"
        )));
    }
    for v in [from, to] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange {
                name: "sweep range",
                value: v,
                range: "[0, 1]",
            });
        }
    }
    let base = build(spec)?;
    let triple = default_triple(&base.active_modes);
    let rows = grid(from, to, steps)
        .into_par_iter()
        .map(|value| evaluate_point(&parameter.apply(spec, value)?, triple, value))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        parameter_name: parameter.name().to_string(),
        n_modes: spec.n_modes(),
        triple,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub parameter: String,
    #[serde(rename = "R_star")]
    pub r_star: f64,
    pub objective_kind: Objective,
    pub objective_value: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizeOptions {
    pub coarse_points: usize,
    pub tolerance: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            coarse_points: DEFAULT_COARSE_POINTS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Golden-section minimisation of `f` on `[lo, hi]` until the bracket is
/// narrower than `tol`. Returns `(x, f(x), evaluations)`.
pub fn golden_section<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evals = 2;
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d)?;
        }
        evals += 1;
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x)?;
    Ok((x, fx, evals + 1))
}

/// Minimises `objective` over the reflectivity `R ∈ [0, 1]` of splitter
/// `name`: coarse grid, then golden-section refinement inside the bracket
/// around the best grid point.
pub fn optimize_reflectivity(
    spec: &NetworkSpec,
    name: &str,
    objective: Objective,
    options: OptimizeOptions,
) -> Result<OptimizationResult> {
    if spec.beamsplitter(name).is_none() {
        return Err(Error::UnknownParameter(name.to_string()));
    }
    if options.coarse_points < 3 || options.tolerance.is_nan() || options.tolerance <= 0.0 {
        return Err(Error::InvalidArgument(
            "optimisation needs >= 3 coarse points and a positive tolerance".into(),
        ));
    }
    let eval = |r: f64| -> Result<f64> { objective.evaluate(&spec.with_reflectivity(name, 100.0 * r)?) };
    let points = grid(0.0, 1.0, options.coarse_points);
    let values = points.par_iter().map(|&r| eval(r)).collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    let lo = points[best.saturating_sub(1)];
    let hi = points[(best + 1).min(points.len() - 1)];
    let (r, value, evals) = golden_section(eval, lo, hi, options.tolerance)?;
    let (r_star, objective_value) = if value <= values[best] {
        (r, value)
    } else {
        (points[best], values[best])
    };
    Ok(OptimizationResult {
        parameter: name.to_string(),
        r_star,
        objective_kind: objective,
        objective_value,
        evaluations: points.len() + evals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transition {
    /// Midpoint of the final bisection bracket.
    pub loss: f64,
    pub from_count: usize,
    pub to_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeScan {
    pub sweep: SweepResult,
    pub transitions: Vec<Transition>,
    /// Regime counts seen along the scan, in ascending order.
    pub regimes_visited: Vec<usize>,
    pub distinct_regime_count: usize,
}

impl RegimeScan {
    pub fn transitions_csv(&self) -> String {
        let mut out = String::from("loss,from_count,to_count\n");
        for t in &self.transitions {
            let _ = writeln!(out, "{},{},{}", t.loss, t.from_count, t.to_count);
        }
        out
    }
}

fn regime_at(spec: &NetworkSpec, loss: f64) -> Result<usize> {
    let built = build(&inject_asymmetric_loss(spec, loss)?)?;
    Ok(collective_steering_report(&built.state, &built.active_modes)?.regime_count)
}

fn locate_transitions(
    spec: &NetworkSpec,
    (lo, c_lo): (f64, usize),
    (hi, c_hi): (f64, usize),
    found: &mut Vec<Transition>,
    seen: &mut BTreeSet<usize>,
) -> Result<()> {
    if hi - lo <= TRANSITION_RESOLUTION {
        found.push(Transition {
            loss: 0.5 * (lo + hi),
            from_count: c_lo,
            to_count: c_hi,
        });
        return Ok(());
    }
    let mid = 0.5 * (lo + hi);
    let c_mid = regime_at(spec, mid)?;
    seen.insert(c_mid);
    if c_mid == c_lo {
        locate_transitions(spec, (mid, c_mid), (hi, c_hi), found, seen)
    } else if c_mid == c_hi {
        locate_transitions(spec, (lo, c_lo), (mid, c_mid), found, seen)
    } else {
        locate_transitions(spec, (lo, c_lo), (mid, c_mid), found, seen)?;
        locate_transitions(spec, (mid, c_mid), (hi, c_hi), found, seen)
    }
}

/// Scans the asymmetric loss over `[from, to]`, classifying the steering
/// regime at each grid point and bisecting every change of regime.
pub fn loss_regime_scan(spec: &NetworkSpec, from: f64, to: f64, steps: usize) -> Result<RegimeScan> {
    let sweep = sweep(spec, &SweepParameter::LossFraction, from, to, steps)?;
    let mut seen: BTreeSet<usize> = sweep.rows.iter().map(|r| r.report.regime_count).collect();
    let mut transitions = Vec::new();
    for pair in sweep.rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.report.regime_count != b.report.regime_count {
            locate_transitions(
                spec,
                (a.parameter, a.report.regime_count),
                (b.parameter, b.report.regime_count),
                &mut transitions,
                &mut seen,
            )?;
        }
    }
    Ok(RegimeScan {
        sweep,
        transitions,
        distinct_regime_count: seen.len(),
        regimes_visited: seen.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{chain_preset, symmetric_pure_inputs};
    use approx::assert_abs_diff_eq;

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx, _) = golden_section(|x| Ok((x - 0.3) * (x - 0.3) + 2.0), 0.0, 1.0, 1e-8).unwrap();
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-7);
        assert_abs_diff_eq!(fx, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_endpoints_and_degenerate_range() {
        let g = grid(0.0, 1.0, 11);
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[10], 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let spec = chain_preset(3).unwrap();
        let param = SweepParameter::parse(&spec, "VBS_31").unwrap();
        let s = sweep(&spec, &param, 0.5, 0.5, 2).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert_eq!(s.rows[0], s.rows[1]);
    }

    #[test]
    fn sweep_rejects_bad_input() {
        let spec = chain_preset(3).unwrap();
        assert!(matches!(
            SweepParameter::parse(&spec, "VBS_99"),
            Err(Error::UnknownParameter(_))
        ));
        let param = SweepParameter::LossFraction;
        assert!(sweep(&spec, &param, 0.0, 1.0, 1).is_err());
        assert!(sweep(&spec, &param, 0.0, 1.2, 5).is_err());
    }

    #[test]
    fn csv_has_stable_header() {
        let spec = chain_preset(3).unwrap();
        let param = SweepParameter::parse(&spec, "VBS_31").unwrap();
        let s = sweep(&spec, &param, 0.0, 1.0, 5).unwrap();
        let csv = s.to_csv();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(header, SweepResult::csv_header(8).join(","));
        assert!(header.starts_with("parameter,s2_m1,"));
        assert_eq!(lines.count(), 5);
    }

    #[test]
    fn pure_symmetric_objective_is_mirror_symmetric_for_even_n() {
        let spec = chain_preset(4).unwrap().with_inputs(symmetric_pure_inputs(6.0));
        for objective in [Objective::MaxSteering, Objective::MeanSteering] {
            for r in [0.1, 0.3, 0.45] {
                let a = objective
                    .evaluate(&spec.with_reflectivity("VBS_12", 100.0 * r).unwrap())
                    .unwrap();
                let b = objective
                    .evaluate(&spec.with_reflectivity("VBS_12", 100.0 * (1.0 - r)).unwrap())
                    .unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn regime_scan_without_loss_range_is_single_regime() {
        let spec = chain_preset(7).unwrap();
        let scan = loss_regime_scan(&spec, 0.0, 0.0, 3).unwrap();
        assert_eq!(scan.regimes_visited, vec![7]);
        assert!(scan.transitions.is_empty());
    }

    #[test]
    fn objective_parsing() {
        assert_eq!("mean-steering".parse::<Objective>().unwrap(), Objective::MeanSteering);
        assert_eq!(
            "max_steering_number".parse::<Objective>().unwrap(),
            Objective::MaxSteering
        );
        assert!("best".parse::<Objective>().is_err());
    }
}
