use std::fmt::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{caratheodory_lower, kobayashi_closed_form, kobayashi_upper, sample_duals, Chain, ChainSearchConfig, CHI_H_ALPHA};
use crate::domains::{AnyDomain, Domain};
use crate::error::{Error, Result};
use crate::grassmann::Plane;
use crate::rng::SplitRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichConfig {
    pub search: ChainSearchConfig,
    /// Sampled duals for symmetric domains; complement domains use their own.
    pub dual_samples: usize,
    pub optimize_duals: bool,
}

impl Default for SandwichConfig {
    fn default() -> Self {
        SandwichConfig {
            search: ChainSearchConfig::default(),
            dual_samples: 1000,
            optimize_duals: true,
        }
    }
}

/// `lower ≤ exact ≤ upper`, up to `metric_abs`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    /// Carathéodory bound, divided by `CHI_H_ALPHA`.
    pub lower: f64,
    /// Length of `chain_witness`.
    pub upper: f64,
    /// Closed form, for symmetric domains.
    pub exact: Option<f64>,
    pub gap: f64,
    pub chain_witness: Chain,
    pub dual_witness: (Plane, Plane),
    pub seed: u64,
    /// Set when the domain's photon components are over-approximated, so the
    /// bounds refer to the sign cell rather than a proven component.
    pub heuristic: bool,
}

/// Carathéodory lower bound, chain upper bound and (when available) the
/// closed form for one pair.
pub fn sandwich(dom: &AnyDomain, x: &Plane, y: &Plane, cfg: &SandwichConfig, rng: &SplitRng) -> Result<MetricReport> {
    let tol = dom.context().tol;
    let duals = sample_duals(dom, x, y, cfg.dual_samples, &rng.split(1))?;
    let cara = caratheodory_lower(dom, x, y, &duals, cfg.optimize_duals, &rng.split(2))?;
    let (upper, chain) = kobayashi_upper(dom, x, y, &cfg.search, &rng.split(3))?;
    let exact = match dom {
        AnyDomain::Symmetric(s) => Some(kobayashi_closed_form(s, x, y)?),
        AnyDomain::Complement(_) => None,
    };
    let lower = cara.value / CHI_H_ALPHA;
    if !(lower <= upper + tol.metric_abs) {
        return Err(Error::InvariantViolation(format!("lower {lower} exceeds upper {upper}")));
    }
    if let Some(k) = exact {
        if !(lower <= k + tol.metric_abs && k <= upper + tol.metric_abs) {
            return Err(Error::InvariantViolation(format!(
                "closed form {k} outside [{lower}, {upper}]"
            )));
        }
    }
    Ok(MetricReport {
        lower,
        upper,
        exact,
        gap: upper - lower,
        chain_witness: chain,
        dual_witness: (cara.xi, cara.eta),
        seed: rng.seed(),
        heuristic: !dom.exact_components(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityConfig {
    pub scales: Vec<f64>,
    pub quadruples_per_scale: usize,
    /// Used for distances on domains without a closed form.
    pub sandwich: SandwichConfig,
}

impl Default for HyperbolicityConfig {
    fn default() -> Self {
        HyperbolicityConfig {
            scales: vec![2.0, 4.0, 8.0, 16.0],
            quadruples_per_scale: 200,
            sandwich: SandwichConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityRow {
    pub scale: f64,
    /// `max(sampled_delta, flat_delta)`.
    pub delta: f64,
    /// Largest `upper − lower` among the distances used; zero for closed forms.
    pub gap: f64,
    pub seed: u64,
    pub sampled_delta: f64,
    pub flat_delta: Option<f64>,
}

/// Gromov four-point value: half the difference between the largest and the
/// middle of the three pair sums.
pub fn four_point_delta(d: &[[f64; 4]; 4]) -> f64 {
    let mut s = [d[0][1] + d[2][3], d[0][2] + d[1][3], d[0][3] + d[1][2]];
    s.sort_by(f64::total_cmp);
    (s[2] - s[1]) / 2.0
}

fn pair_distances(
    dom: &AnyDomain,
    pts: &[Plane; 4],
    cfg: &SandwichConfig,
    rng: &SplitRng,
) -> Result<([[f64; 4]; 4], f64)> {
    let mut d = [[0.0; 4]; 4];
    let mut gap: f64 = 0.0;
    let mut k = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            let v = match dom {
                AnyDomain::Symmetric(s) => kobayashi_closed_form(s, &pts[i], &pts[j])?,
                AnyDomain::Complement(_) => {
                    let r = sandwich(dom, &pts[i], &pts[j], cfg, &rng.split(k))?;
                    gap = gap.max(r.gap);
                    0.5 * (r.lower + r.upper)
                }
            };
            d[i][j] = v;
            d[j][i] = v;
            k += 1;
        }
    }
    Ok((d, gap))
}

/// Four-point δ at each scale `D`, over random quadruples of points drawn at
/// scale `D/2` and, in rank ≥ 2, the flat quadruple
/// `(0,0), (D,D), (D,0), (0,D)` in flat coordinates.
pub fn hyperbolicity_probe(dom: &AnyDomain, cfg: &HyperbolicityConfig, rng: &SplitRng) -> Result<Vec<HyperbolicityRow>> {
    let mut rows = Vec::with_capacity(cfg.scales.len());
    for (si, &scale) in cfg.scales.iter().enumerate() {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidInput(format!("scale must be positive, got {scale}")));
        }
        let srng = rng.split(si as u64);
        let mut sampled: f64 = 0.0;
        let mut gap: f64 = 0.0;
        for j in 0..cfg.quadruples_per_scale {
            let mut g = srng.split(2 * j as u64);
            // within D/2 of the base point, so pairs are at most about D apart
            let pts = [
                dom.sample_interior(&mut g, scale / 2.0)?,
                dom.sample_interior(&mut g, scale / 2.0)?,
                dom.sample_interior(&mut g, scale / 2.0)?,
                dom.sample_interior(&mut g, scale / 2.0)?,
            ];
            let (d, gq) = pair_distances(dom, &pts, &cfg.sandwich, &srng.split(2 * j as u64 + 1))?;
            sampled = sampled.max(four_point_delta(&d));
            gap = gap.max(gq);
        }
        let flat = match dom {
            AnyDomain::Symmetric(s) if s.context().rank() >= 2 => {
                let (p, q) = (s.context().p, s.context().q);
                let t = (scale / 2.0).tanh();
                let pt = |a: f64, b: f64| {
                    let mut c = DMatrix::zeros(q, p);
                    c[(0, 0)] = a;
                    c[(1, 1)] = b;
                    s.graph_point(&c)
                };
                let pts = [pt(0.0, 0.0)?, pt(t, t)?, pt(t, 0.0)?, pt(0.0, t)?];
                let (d, _) = pair_distances(dom, &pts, &cfg.sandwich, &srng)?;
                Some(four_point_delta(&d))
            }
            _ => None,
        };
        rows.push(HyperbolicityRow {
            scale,
            delta: sampled.max(flat.unwrap_or(0.0)),
            gap,
            seed: rng.seed(),
            sampled_delta: sampled,
            flat_delta: flat,
        });
    }
    Ok(rows)
}

/// CSV with columns `scale,delta,gap,seed`.
pub fn hyperbolicity_csv(rows: &[HyperbolicityRow]) -> String {
    let mut out = String::from("scale,delta,gap,seed\n");
    for r in rows {
        let _ = writeln!(out, "{},{:.11e},{:.11e},{}", r.scale, r.delta, r.gap, r.seed);
    }
    out
}
