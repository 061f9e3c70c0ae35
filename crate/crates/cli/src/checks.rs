//! The catalog of named checks a run config can request.

use std::f64::consts::PI;

use sgeo_core::calculus::{
    double_identity_residual, geodesic_flow_derivative_check, leibniz_residual, max_principle_check, order_one_check,
    regularity_probe, symbol_commutation_check, RefinementRule,
};
use sgeo_core::charts::{cover_check, standard_charts};
use sgeo_core::dixmier::{absolute_continuity_fit, dixmier_estimate, heat_vs_dixmier, random_samples, weyl_constants, Cutoff};
use sgeo_core::geometries::{Geometry, GeometryKind};
use sgeo_core::hochschild::orientability_check;
use sgeo_core::metric::{connes_distance, finite_propagation_check};
use sgeo_core::report::linear_fit;
use sgeo_core::spectral::dimension_fit;
use sgeo_core::voiculescu::{commutator_decay_check, kj_estimate, localized_kj, plateau_family};
use sgeo_core::{CheckReport, Element, GeometrySpec, MatrixOperator, Result, SgeoError, TruncatedTriple};

use crate::config::RunConfig;

pub struct ParamDef {
    pub name: &'static str,
    pub about: &'static str,
}

pub struct CheckDef {
    pub name: &'static str,
    pub about: &'static str,
    pub params: &'static [ParamDef],
    pub run: fn(&Ctx, &Params) -> Result<CheckReport>,
}

/// Everything a check may read.
pub struct Ctx<'a> {
    pub spec: &'a GeometrySpec,
    pub geometry: &'a Geometry,
    pub config: &'a RunConfig,
    pub seed: u64,
}

impl Ctx<'_> {
    fn t(&self) -> &TruncatedTriple {
        &self.geometry.triple
    }

    fn tol(&self, key: &str) -> f64 {
        self.config.tolerance(key)
    }

    fn period(&self) -> f64 {
        self.t().grid().map(|g| g.period).unwrap_or(1.0)
    }

    /// The named generator, "1" for the unit, or the first of `defaults`
    /// the geometry has.
    fn element(&self, params: &Params, key: &str, defaults: &[&str]) -> Result<Element> {
        let t = self.t();
        if let Some(name) = params.str(key)? {
            return if name == "1" { Ok(t.unit()) } else { t.generator(&name).cloned() };
        }
        defaults
            .iter()
            .find_map(|n| t.generator(n).ok().cloned())
            .ok_or_else(|| SgeoError::Unsupported(format!("no default `{key}` among {defaults:?}")))
    }
}

/// Per-check parameter overrides.
pub struct Params<'a>(pub &'a toml::Table);

impl Params<'_> {
    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_float()
                .or_else(|| v.as_integer().map(|i| i as f64))
                .ok_or_else(|| SgeoError::InvalidArgument(format!("`{key}` must be a number"))),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_integer()
                .filter(|&i| i >= 0)
                .map(|i| i as usize)
                .ok_or_else(|| SgeoError::InvalidArgument(format!("`{key}` must be a nonnegative integer"))),
        }
    }

    fn str(&self, key: &str) -> Result<Option<String>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_str()
                .map(|s| Some(s.to_string()))
                .ok_or_else(|| SgeoError::InvalidArgument(format!("`{key}` must be a string"))),
        }
    }

    fn list(&self, key: &str, default: Vec<f64>) -> Result<Vec<f64>> {
        let Some(v) = self.0.get(key) else { return Ok(default) };
        let arr = v.as_array().ok_or_else(|| SgeoError::InvalidArgument(format!("`{key}` must be an array")))?;
        arr.iter()
            .map(|x| {
                x.as_float()
                    .or_else(|| x.as_integer().map(|i| i as f64))
                    .ok_or_else(|| SgeoError::InvalidArgument(format!("`{key}` must hold numbers")))
            })
            .collect()
    }

    fn cutoff(&self) -> Result<Cutoff> {
        match self.str("cutoff")?.as_deref() {
            None | Some("hat") => Ok(Cutoff::Hat),
            Some("smooth") => Ok(Cutoff::Smooth),
            Some(other) => Err(SgeoError::InvalidArgument(format!("unknown cutoff `{other}` (hat, smooth)"))),
        }
    }
}

/// (name, default, meaning)
pub const TOLERANCES: &[(&str, f64, &str)] = &[
    ("dimension_slope", 0.05, "|fitted slope + 1/p| for the dimension check"),
    ("dixmier_relative", 0.05, "relative error of the Dixmier trace of 1 against the Weyl oracle"),
    ("identity_residual", 1e-9, "inner-band residual of the double and Leibniz identities"),
    ("voiculescu_slope", 0.15, "|slope - 1| of log k_J against log arc length"),
    ("voiculescu_monotone", 0.02, "allowed relative decrease of k_J under enlarging the arc"),
    ("distance_ratio", 0.95, "required fraction of the geodesic distance"),
];

pub fn default_tolerance(key: &str) -> Option<f64> {
    TOLERANCES.iter().find(|t| t.0 == key).map(|t| t.1)
}

const ELEMENT: ParamDef = ParamDef { name: "element", about: "generator name, or \"1\" for the unit" };

pub const CATALOG: &[CheckDef] = &[
    CheckDef {
        name: "dimension",
        about: "slope of log mu_n(|D|^-1) against log n equals -1/p",
        params: &[],
        run: dimension,
    },
    CheckDef { name: "order_one", about: "[[D,a],b] = 0 on the inner band for generator pairs", params: &[], run: order_one },
    CheckDef {
        name: "regularity",
        about: "delta and delta_1 towers of an element stay bounded under Lambda-doubling",
        params: &[ELEMENT, ParamDef { name: "m_max", about: "tower height (default 3)" }],
        run: regularity,
    },
    CheckDef {
        name: "orientability",
        about: "the orientation cycle is a Hochschild cycle with pi_D(c) = grading or 1",
        params: &[],
        run: orientability,
    },
    CheckDef {
        name: "symbol_commutation",
        about: "[|[D,h]|,[D,a]] = 0 and [D,h]^2 in the algebra",
        params: &[
            ParamDef { name: "h", about: "Hermitian generator h" },
            ParamDef { name: "a", about: "generator a" },
        ],
        run: symbol_commutation,
    },
    CheckDef {
        name: "double_identity",
        about: "[[D^2,h],h] = 2[D,h]^2 and the |D|^2 Leibniz expansion for every generator",
        params: &[],
        run: double_identity,
    },
    CheckDef {
        name: "max_principle",
        about: "||[D,h] b_n|| -> 0 for bumps at the maximum of h",
        params: &[
            ELEMENT,
            ParamDef { name: "scales", about: "bump widths, decreasing (default [0.16, 0.08, 0.04])" },
            ParamDef { name: "factor", about: "required decay per halving (default 0.5)" },
        ],
        run: max_principle,
    },
    CheckDef {
        name: "geodesic_flow",
        about: "t -> e^{it|D|} x e^{-it|D|} is differentiable with derivative i delta(x)",
        params: &[ELEMENT, ParamDef { name: "steps", about: "step sizes in units of period/2pi" }],
        run: geodesic_flow,
    },
    CheckDef {
        name: "dixmier",
        about: "Dixmier trace of 1 against the Weyl-law oracle",
        params: &[],
        run: dixmier,
    },
    CheckDef {
        name: "heat_vs_dixmier",
        about: "heat functional of an element equals half its Dixmier trace (p = 1 normalization)",
        params: &[
            ELEMENT,
            ParamDef { name: "cutoff", about: "hat or smooth (default hat)" },
            ParamDef { name: "eps_min", about: "smallest epsilon" },
            ParamDef { name: "eps_max", about: "largest epsilon" },
            ParamDef { name: "eps_count", about: "grid size (default 24)" },
        ],
        run: heat,
    },
    CheckDef {
        name: "absolute_continuity",
        about: "one constant kappa fits Tr_w(T_{xi,eta} a |D|^-p) = kappa int a (eta|xi)",
        params: &[ParamDef { name: "samples", about: "number of random samples (default 8)" }],
        run: absolute_continuity,
    },
    CheckDef {
        name: "cover",
        about: "the standard charts cover: sum of rho rho* is invertible everywhere",
        params: &[],
        run: cover,
    },
    CheckDef {
        name: "kj",
        about: "Voiculescu obstruction k_J of an element over spectral cutoffs",
        params: &[ELEMENT, ParamDef { name: "cutoff", about: "hat or smooth (default hat)" }],
        run: kj,
    },
    CheckDef {
        name: "voiculescu_scaling",
        about: "localized k_J scales linearly with arc length on the circle, monotone in the arc",
        params: &[ELEMENT, ParamDef { name: "arcs", about: "arc lengths, decreasing (default [pi/2, pi/4, pi/8])" }],
        run: voiculescu_scaling,
    },
    CheckDef {
        name: "commutator_decay",
        about: "||[f(eps|D|), a]|| <= C_f eps ||[D,a]||",
        params: &[ELEMENT, ParamDef { name: "cutoff", about: "hat or smooth (default smooth)" }],
        run: commutator_decay,
    },
    CheckDef {
        name: "distance",
        about: "Connes distance lower bound against the geodesic distance",
        params: &[
            ParamDef { name: "from", about: "first point" },
            ParamDef { name: "to", about: "second point" },
            ParamDef { name: "budget", about: "ascent iterations (default 40)" },
        ],
        run: distance,
    },
    CheckDef {
        name: "finite_propagation",
        about: "kernel of e^{itD} stays within |t| + margin",
        params: &[ParamDef { name: "times", about: "times in units of period/2pi (default [0, 0.3, 0.6, 1])" }],
        run: propagation,
    },
];

pub fn find(name: &str) -> Option<&'static CheckDef> {
    CATALOG.iter().find(|c| c.name == name)
}

fn dimension(ctx: &Ctx, _: &Params) -> Result<CheckReport> {
    let t = ctx.t();
    let est = dimension_fit(t);
    let target = -1.0 / t.p() as f64;
    let mut r = CheckReport::new("dimension");
    r.metric("slope", est.value);
    r.metric("stderr", est.stderr);
    r.metric("target", target);
    for (k, v) in &est.diagnostics {
        r.metric(k, *v);
    }
    r.bound("slope_error", (est.value - target).abs(), ctx.tol("dimension_slope"));
    Ok(r)
}

fn order_one(ctx: &Ctx, _: &Params) -> Result<CheckReport> {
    Ok(order_one_check(ctx.t()))
}

fn regularity(ctx: &Ctx, params: &Params) -> Result<CheckReport> {
    let name = match params.str("element")? {
        Some(n) => n,
        None => ["u", "u1", "x"].iter().find(|n| ctx.t().generator(n).is_ok()).unwrap_or(&"u").to_string(),
    };
    let m_max = params.usize("m_max", 3)?;
    let mut coarse = ctx.spec.clone();
    coarse.lambda = ctx.spec.lambda / 2;
    let mut fine = ctx.spec.clone();
    if coarse.validate().is_err() {
        coarse.lambda = ctx.spec.lambda;
        fine.lambda = 2 * ctx.spec.lambda;
    }
    let (gc, gf) = (coarse.build(ctx.seed)?, fine.build(ctx.seed)?);
    let elem = move |t: &TruncatedTriple| -> Result<MatrixOperator> {
        if name == "1" {
            Ok(MatrixOperator::identity(t.hilbert_dim()))
        } else {
            Ok(t.generator(&name)?.op.clone())
        }
    };
    Ok(regularity_probe(&elem, &gc.triple, &gf.triple, m_max, RefinementRule::default()))
}

fn orientability(ctx: &Ctx, _: &Params) -> Result<CheckReport> {
    match &ctx.geometry.cycle {
        Some(c) => Ok(orientability_check(ctx.t(), c)),
        None => Err(SgeoError::Unsupported("geometry has no orientation cycle".into())),
    }
}

fn symbol_commutation(ctx: &Ctx, params: &Params) -> Result<CheckReport> {
    let h = ctx.element(params, "h", &["sin1", "cos"])?;
    let a = ctx.element(params, "a", &["cos2", "sin"])?;
    Ok(symbol_commutation_check(&h, &a, ctx.t()))
}

fn double_identity(ctx: &Ctx, _: &Params) -> Result<CheckReport> {
    let t = ctx.t();
    let tol = ctx.tol("identity_residual");
    let mut r = CheckReport::new("double_identity");
    let (mut double, mut leibniz) = (0.0f64, 0.0f64);
    for (name, g) in t.generators() {
        let h = g.op.add(&g.op.adjoint()).scale_real(0.5);
        let d = double_identity_residual(&h, t)?;
        let l = leibniz_residual(&g.op, t)?;
        r.metric(&format!("double_{name}"), d);
        double = double.max(d);
        leibniz = leibniz.max(l);
    }
    r.bound("double", double, tol);
    r.bound("leibniz", leibniz, tol);
    Ok(r)
}

fn max_principle(ctx: &Ctx, params: &Params) -> Result<CheckReport> {
    let h = ctx.element(params, "element", &["cos", "cos1", "x"])?;
    let scales = params.list("scales", vec![0.16, 0.08, 0.04])?;
    let factor = params.f64("factor", 0.5)?;
    Ok(max_principle_check(&h, ctx.t(), &scales, factor))
}

fn geodesic_flow(ctx: &Ctx, params: &Params) -> Result<CheckReport> {
    let x = ctx.element(params, "element", &["u", "u1", "x"])?;
    let unit = ctx.period() / (2.0 * PI);
    let steps: Vec<f64> = params.list("steps", vec![0.04, 0.02, 0.01, 0.005])?.iter().map(|s| s * unit).collect();
    Ok(geodesic_flow_derivative_check(&x.op, ctx.t(), &steps))
}

/// Weyl-law value of the Dixmier trace of 1: s ω_p (L/2π)^p for the flat
/// tori, 2/π for the interval; the product falls back to a counting fit.
pub fn dixmier_oracle(spec: &GeometrySpec, t: &TruncatedTriple) -> (f64, &'static str) {
    let ball = |p: usize| match p {
        1 => 2.0,
        2 => PI,
        _ => 4.0 * PI / 3.0,
    };
    let s = t.spinor_dim() as f64;
    match spec.kind {
        GeometryKind::Circle => (s * 2.0, "weyl"),
        GeometryKind::Torus => (s * ball(spec.p) / (2.0 * PI).powi(spec.p as i32), "weyl"),
        // eigenvalues ±(k + 1/2)π: two per gap of π
        GeometryKind::Interval => (2.0 / PI, "weyl"),
        GeometryKind::Product => (weyl_constants(t).0, "counting_fit"),
    }
}

fn dixmier(ctx: &Ctx, _: &Params) -> Result<CheckReport> {
    let t = ctx.t();
    let est = dixmier_estimate(&MatrixOperator::identity(t.hilbert_dim()), t)?;
    let (oracle, source) = dixmier_oracle(ctx.spec, t);
    let mut r = CheckReport::new("dixmier");
    r.metric("value", est.value);
    r.metric("oracle", oracle);
    r.metric("trend_slope", est.trend_slope);
    for (k, v) in &est.diagnostics {
        r.metric(k, *v);
    }
    r.note(format!("oracle from {source}"));
    r.bound("relative_error", (est.value - oracle).abs() / oracle, ctx.tol("dixmier_relative"));
    Ok(r)
}

fn eps_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n.max(2) - 1) as f64)).collect()
}

fn heat(ctx: &Ctx, params: &Params) -> Result<CheckReport> {
    let t = ctx.t();
    let x = if params.0.contains_key("element") { ctx.element(params, "element", &[])? } else { t.unit() };
    let lam = t.effective_lambda();
    // ε·Λ between ~5 and ~50 on the circle; higher p needs smaller ε·Λ to
    // keep enough modes below 1/ε
    let (lo, hi) = if t.p() == 1 { (5.0, 50.0) } else { (1.2, 10.0) };
    let grid = eps_grid(params.f64("eps_min", lo / lam)?, params.f64("eps_max", hi / lam)?, params.usize("eps_count", 24)?);
    Ok(heat_vs_dixmier(&x.op, params.cutoff()?, &grid, t))
}

fn absolute_continuity(ctx: &Ctx, params: &Params) -> Result<CheckReport> {
    let samples = random_samples(ctx.t(), params.usize("samples", 8)?, ctx.seed)?;
    Ok(absolute_continuity_fit(ctx.t(), &samples))
}

fn cover(ctx: &Ctx, _: &Params) -> Result<CheckReport> {
    let charts = standard_charts(ctx.t())?;
    Ok(cover_check(ctx.t(), &charts))
}

fn kj_sweep() -> Vec<f64> {
    eps_grid(0.5, 0.02, 10)
}

fn kj(ctx: &Ctx, params: &Params) -> Result<CheckReport> {
    let a = ctx.element(params, "element", &["cos", "cos1", "x"])?;
    let est = kj_estimate(&[a], ctx.t(), params.cutoff()?, &kj_sweep())?;
    let mut r = CheckReport::new("kj");
    r.metric("value", est.value);
    r.series("eps", est.per_epsilon.iter().map(|e| e.0).collect());
    r.series("norm", est.per_epsilon.iter().map(|e| e.1).collect());
    r.series("rank", est.ranks.iter().map(|&k| k as f64).collect());
    if !est.regime_ok {
        r.inconclusive("the small-ε tail has not settled");
    }
    Ok(r)
}

fn voiculescu_scaling(ctx: &Ctx, params: &Params) -> Result<CheckReport> {
    let t = ctx.t();
    if t.p() != 1 || t.grid().is_none() {
        return Err(SgeoError::Unsupported("the arc sweep is defined on the circle".into()));
    }
    let a = ctx.element(params, "element", &["cos"])?;
    let arcs = params.list("arcs", vec![PI / 2.0, PI / 4.0, PI / 8.0])?;
    if arcs.len() < 2 {
        return Err(SgeoError::InvalidArgument("need at least two arcs".into()));
    }
    let period = ctx.period();
    let center = period / 4.0;
    let mut values = Vec::new();
    for &len in &arcs {
        let region = move |x: &[f64]| {
            let d = (x[0] - center).rem_euclid(period);
            d.min(period - d) <= len / 2.0
        };
        let plats = plateau_family(t, &[center], &[len / 2.0])?;
        values.push(localized_kj(std::slice::from_ref(&a), &region, &plats, t, Cutoff::Smooth, &kj_sweep())?.estimate.value);
    }
    let mut r = CheckReport::new("voiculescu_scaling");
    r.series("arcs", arcs.clone());
    r.series("values", values.clone());
    if values.iter().any(|&v| v <= 0.0) {
        r.fail("localized k_J vanished on an arc");
        return Ok(r);
    }
    let lx: Vec<f64> = arcs.iter().map(|l| l.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let slope = linear_fit(&lx, &ly).1;
    r.metric("slope", slope);
    r.bound("slope_error", (slope - 1.0).abs(), ctx.tol("voiculescu_slope"));
    // arcs listed from large to small: values should not grow
    let mut order: Vec<usize> = (0..arcs.len()).collect();
    order.sort_by(|&i, &j| arcs[i].partial_cmp(&arcs[j]).unwrap());
    let drop = order.windows(2).map(|w| (values[w[0]] - values[w[1]]) / values[w[0]]).fold(0.0, f64::max);
    r.bound("monotone_drop", drop, ctx.tol("voiculescu_monotone"));
    Ok(r)
}

fn commutator_decay(ctx: &Ctx, params: &Params) -> Result<CheckReport> {
    let a = ctx.element(params, "element", &["cos", "cos1"])?;
    let f = match params.str("cutoff")? {
        None => Cutoff::Smooth,
        Some(_) => params.cutoff()?,
    };
    Ok(commutator_decay_check(&a, ctx.t(), f, &kj_sweep()))
}

fn distance(ctx: &Ctx, params: &Params) -> Result<CheckReport> {
    let t = ctx.t();
    let p = t.p();
    let period = ctx.period();
    let from = params.list("from", vec![0.0; p])?;
    let mut to_default = vec![0.0; p];
    to_default[0] = if p == 1 { period / 4.0 } else { 0.1 * period };
    let to = params.list("to", to_default)?;
    let res = connes_distance(&from, &to, t, params.usize("budget", 40)?)?;
    let geodesic = t.grid_distance(&from, &to);
    let mut r = CheckReport::new("distance");
    r.metric("lower_bound", res.lower_bound);
    r.metric("geodesic", geodesic);
    r.metric("iterations", res.iterations as f64);
    r.metric("constraint_slack", res.constraint_slack);
    r.note(format!("warm start {}", res.warm_start));
    r.at_least("ratio", res.lower_bound / geodesic.max(1e-300), ctx.tol("distance_ratio"));
    r.bound("excess", res.lower_bound - geodesic, 1e-9 * geodesic.max(1.0));
    Ok(r)
}

fn propagation(ctx: &Ctx, params: &Params) -> Result<CheckReport> {
    let unit = ctx.period() / (2.0 * PI);
    let times: Vec<f64> = params.list("times", vec![0.0, 0.3, 0.6, 1.0])?.iter().map(|s| s * unit).collect();
    Ok(finite_propagation_check(ctx.t(), &times))
}
