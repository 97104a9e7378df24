//! Named initial data.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, TAU};

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use super::grid::{GridSpec, MAX_DIM};
use super::state::{soliton_profile, Boundary, GraphState};
use crate::sampling::SampleRng;
use crate::{Error, Result};

pub type PresetParams = BTreeMap<String, f64>;

/// Parameters every preset except `grim_reaper` accepts.
const COMMON: &[&str] = &["target_sup_delta", "target_max_rho", "require_confinable"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresetInfo {
    pub name: &'static str,
    pub params: &'static str,
    pub exercises: &'static str,
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "affine",
        params: "a<alpha><i> (slope d_i f^alpha, 1-based, default 0), offset",
        exercises: "stationary solutions; every identity holds with zero curvature",
    },
    PresetInfo {
        name: "sine",
        params: "amplitude (0.5), amplitude2 (0), amplitude3 (0), mode (1), cross (0)",
        exercises:
            "evolution identities for |F|^2 and h o gamma, confinable sub-level set v < 2, sup |B|^2 h monotonicity",
    },
    PresetInfo {
        name: "grim_reaper",
        params: "delta (0.3), clamp (1.0); n = 1 only, replaces the grid window",
        exercises: "translating soliton regression of the solver",
    },
    PresetInfo {
        name: "random_smooth",
        params: "seed (0), modes (2), amplitude (0.3), max_slope (optional)",
        exercises: "confinable sub-level set v < 2 near its boundary, curvature estimate scaling",
    },
    PresetInfo {
        name: "hemisphere_test",
        params: "slope (0.9), twist (0.25); n = m = 2 only",
        exercises: "hemisphere preservation of the partial Gauss maps in G(2,2) = S^2 x S^2",
    },
];

/// Human-readable preset table.
pub fn list_presets() -> String {
    let mut out = String::new();
    for p in PRESETS {
        out.push_str(&format!("{}\n  params: {}", p.name, p.params));
        if p.name != "grim_reaper" {
            out.push_str(", target_sup_delta, target_max_rho, require_confinable");
        }
        out.push_str(&format!("\n  exercises: {}\n", p.exercises));
    }
    out
}

struct Params<'a> {
    preset: &'static str,
    map: &'a PresetParams,
}

impl Params<'_> {
    fn get(&self, key: &str, default: f64) -> f64 {
        self.map.get(key).copied().unwrap_or(default)
    }

    fn check_keys(&self, allowed: &dyn Fn(&str) -> bool) -> Result<()> {
        for (key, value) in self.map {
            if !allowed(key) {
                return Err(Error::InvalidPresetParam(format!("`{}` does not take `{key}`", self.preset)));
            }
            if !value.is_finite() {
                return Err(Error::InvalidPresetParam(format!("`{key}` must be finite")));
            }
        }
        Ok(())
    }

    fn integer(&self, key: &str, default: f64, min: f64) -> Result<u64> {
        let v = self.get(key, default);
        if v < min || libm::trunc(v) != v {
            return Err(Error::InvalidPresetParam(format!("`{key}` must be an integer >= {min}")));
        }
        Ok(v as u64)
    }
}

/// Builds the initial state of a named preset.
pub fn init_preset(name: &str, params: &PresetParams, spec: &GridSpec) -> Result<GraphState> {
    spec.validate()?;
    let info = PRESETS.iter().find(|p| p.name == name).ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    let p = Params { preset: info.name, map: params };
    let state = match info.name {
        "affine" => affine(&p, spec)?,
        "sine" => sine(&p, spec)?,
        "grim_reaper" => return grim_reaper(&p, spec),
        "random_smooth" => random_smooth(&p, spec)?,
        "hemisphere_test" => hemisphere_test(&p, spec)?,
        _ => unreachable!("preset table and dispatch disagree"),
    };
    let state = match (params.get("target_sup_delta"), params.get("target_max_rho")) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidPresetParam("give either `target_sup_delta` or `target_max_rho`".into()))
        }
        (Some(&target), None) => rescale_to_sup_delta(&state, target)?,
        (None, Some(&target)) => rescale_to_max_rho(&state, target)?,
        (None, None) => state,
    };
    if p.get("require_confinable", 0.0) != 0.0 {
        let sup_delta = state.sup_delta();
        if !(sup_delta < 2.0) {
            return Err(Error::PresetRejected { sup_delta });
        }
    }
    Ok(state)
}

fn common_or(extra: &'static [&'static str]) -> impl Fn(&str) -> bool {
    move |k: &str| COMMON.contains(&k) || extra.contains(&k)
}

fn affine(p: &Params, spec: &GridSpec) -> Result<GraphState> {
    let (n, m) = (spec.n, spec.m);
    p.check_keys(&|k: &str| {
        COMMON.contains(&k) || k == "offset" || parse_slope_key(k).is_some_and(|(a, i)| a < m && i < n)
    })?;
    let mut slope = [[0.0; MAX_DIM]; MAX_DIM];
    for (key, &value) in p.map {
        if let Some((a, i)) = parse_slope_key(key) {
            slope[i][a] = value;
        }
    }
    let offset = p.get("offset", 0.0);
    let mut s = GraphState::zeros(spec.clone());
    s.slope = slope;
    s.values.iter_mut().for_each(|v| *v = offset);
    Ok(s)
}

/// `a<alpha><i>` with 1-based indices, returned 0-based.
fn parse_slope_key(key: &str) -> Option<(usize, usize)> {
    let rest = key.strip_prefix('a')?.as_bytes();
    if rest.len() != 2 {
        return None;
    }
    let digit = |b: u8| (b'1'..=b'3').contains(&b).then(|| (b - b'1') as usize);
    Some((digit(rest[0])?, digit(rest[1])?))
}

fn sine(p: &Params, spec: &GridSpec) -> Result<GraphState> {
    p.check_keys(&common_or(&["amplitude", "amplitude2", "amplitude3", "mode", "cross"]))?;
    let amps = [p.get("amplitude", 0.5), p.get("amplitude2", 0.0), p.get("amplitude3", 0.0)];
    let mode = p.integer("mode", 1.0, 1.0)? as f64;
    let cross = p.get("cross", 0.0);
    let n = spec.n;
    let lengths = spec.lengths;
    Ok(GraphState::from_fn(spec.clone(), [[0.0; MAX_DIM]; MAX_DIM], |x, a| {
        let axis = a % n;
        let mut v = amps[a] * libm::sin(TAU * mode * x[axis] / lengths[axis]);
        if cross != 0.0 {
            let phase: f64 = (0..n).map(|i| TAU * x[i] / lengths[i]).sum();
            let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
            v += sign * cross * libm::cos(phase + a as f64);
        }
        v
    }))
}

/// Cell-centred window `[-(π/2 - δ), π/2 - δ]` with the soliton clamped
/// outside `|x| <= clamp`.
fn grim_reaper(p: &Params, spec: &GridSpec) -> Result<GraphState> {
    p.check_keys(&|k: &str| k == "delta" || k == "clamp")?;
    if spec.n != 1 {
        return Err(Error::InvalidPresetParam("`grim_reaper` needs n = 1".into()));
    }
    let delta = p.get("delta", 0.3);
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidPresetParam("`delta` must lie in (0, 1)".into()));
    }
    let half = FRAC_PI_2 - delta;
    let clamp = p.get("clamp", 1.0);
    if !(clamp > 0.0 && clamp < half) {
        return Err(Error::InvalidPresetParam(format!("`clamp` must lie in (0, {half})")));
    }
    let cells = spec.cells[0];
    let h = 2.0 * half / cells as f64;
    let window = GridSpec::new(1, spec.m, &[cells], &[2.0 * half])?.with_origin(&[-half + 0.5 * h])?;
    let mut s =
        GraphState::from_fn(
            window,
            [[0.0; MAX_DIM]; MAX_DIM],
            |x, a| {
                if a == 0 {
                    soliton_profile(x[0], 0.0)
                } else {
                    0.0
                }
            },
        );
    s.boundary = Boundary::SolitonClamp { beyond: clamp };
    Ok(s)
}

fn random_smooth(p: &Params, spec: &GridSpec) -> Result<GraphState> {
    p.check_keys(&common_or(&["seed", "modes", "amplitude", "max_slope"]))?;
    if p.map.contains_key("max_slope") && p.map.contains_key("target_sup_delta") {
        return Err(Error::InvalidPresetParam("give either `max_slope` or `target_sup_delta`".into()));
    }
    let seed = p.integer("seed", 0.0, 0.0)?;
    let modes = p.integer("modes", 2.0, 1.0)? as i64;
    if modes > 8 {
        return Err(Error::InvalidPresetParam("`modes` must be at most 8".into()));
    }
    let amplitude = p.get("amplitude", 0.3);
    let (n, m) = (spec.n, spec.m);
    let mut rng = SampleRng::seed_from_u64(seed);

    // every wave vector with 1 <= |k|_inf <= modes, lexicographic order
    // (wave vector, per-component cosine/sine coefficients)
    type Wave = ([i64; MAX_DIM], Vec<(f64, f64)>);
    let mut waves: Vec<Wave> = Vec::new();
    let range = |i: usize| if i < n { -modes..=modes } else { 0..=0 };
    for k2 in range(2) {
        for k1 in range(1) {
            for k0 in range(0) {
                let k = [k0, k1, k2];
                let inf = k.iter().map(|c| c.abs()).max().unwrap_or(0);
                if inf == 0 {
                    continue;
                }
                let weight = amplitude / (1.0 + k.iter().map(|c| (c * c) as f64).sum::<f64>());
                let coeffs = (0..m)
                    .map(|_| {
                        let c: f64 = StandardNormal.sample(&mut rng);
                        let s: f64 = StandardNormal.sample(&mut rng);
                        (weight * c, weight * s)
                    })
                    .collect();
                waves.push((k, coeffs));
            }
        }
    }
    let lengths = spec.lengths;
    let state = GraphState::from_fn(spec.clone(), [[0.0; MAX_DIM]; MAX_DIM], |x, a| {
        waves
            .iter()
            .map(|(k, coeffs)| {
                let phase: f64 = (0..n).map(|i| TAU * k[i] as f64 * x[i] / lengths[i]).sum();
                coeffs[a].0 * libm::cos(phase) + coeffs[a].1 * libm::sin(phase)
            })
            .sum()
    });
    match p.map.get("max_slope") {
        Some(&target) => {
            if !(target > 0.0) {
                return Err(Error::InvalidPresetParam("`max_slope` must be positive".into()));
            }
            let current = sup_slope(&state);
            Ok(state.scaled(target / current))
        }
        None => Ok(state),
    }
}

/// `sup` over nodes of the operator norm of `Df`.
pub fn sup_slope(s: &GraphState) -> f64 {
    let (n, m) = (s.spec.n, s.spec.m);
    (0..s.spec.node_count())
        .map(|node| {
            let jet = s.jet(node);
            let z = nalgebra::DMatrix::from_fn(n, m, |i, a| jet.df[i][a]);
            z.singular_values().max()
        })
        .fold(0.0, f64::max)
}

/// `f¹ = s (L₁/2π) sin(2πx¹/L₁) + τ s (L₂/2π) sin(2πx²/L₂)`,
/// `f² = s (L₂/2π) sin(2πx²/L₂) - τ s (L₁/2π) cos(2πx¹/L₁)`.
///
/// `det Df = s² cos(2πx²/L₂)(cos(2πx¹/L₁) - τ² sin(2πx¹/L₁))`, so
/// `|det Df| <= s² sqrt(1 + τ⁴) < 1` for the defaults and both partial Gauss
/// images stay in the northern hemisphere.
fn hemisphere_test(p: &Params, spec: &GridSpec) -> Result<GraphState> {
    p.check_keys(&common_or(&["slope", "twist"]))?;
    if spec.n != 2 || spec.m != 2 {
        return Err(Error::InvalidPresetParam("`hemisphere_test` needs n = m = 2".into()));
    }
    let s = p.get("slope", 0.9);
    let tw = p.get("twist", 0.25);
    let (l1, l2) = (spec.lengths[0], spec.lengths[1]);
    Ok(GraphState::from_fn(spec.clone(), [[0.0; MAX_DIM]; MAX_DIM], |x, a| {
        let u1 = TAU * x[0] / l1;
        let u2 = TAU * x[1] / l2;
        if a == 0 {
            s * l1 / TAU * libm::sin(u1) + tw * s * l2 / TAU * libm::sin(u2)
        } else {
            s * l2 / TAU * libm::sin(u2) - tw * s * l1 / TAU * libm::cos(u1)
        }
    }))
}

/// Rescales `f -> λ f` so that `sup Δ_f` hits `target` from below.
pub fn rescale_to_sup_delta(s: &GraphState, target: f64) -> Result<GraphState> {
    if !(target > 1.0 && target.is_finite()) {
        return Err(Error::InvalidPresetParam("`target_sup_delta` must exceed 1".into()));
    }
    rescale_to(s, target, &|st| st.sup_delta(), "sup Delta_f")
}

/// Rescales `f -> λ f` so that the largest geodesic distance of the Gauss
/// image from the reference plane hits `target` from below.
pub fn rescale_to_max_rho(s: &GraphState, target: f64) -> Result<GraphState> {
    if !(target > 0.0 && target < FRAC_PI_2) {
        return Err(Error::InvalidPresetParam("`target_max_rho` must lie in (0, pi/2)".into()));
    }
    rescale_to(s, target, &max_rho, "max rho")
}

/// Largest `ρ` of the Gauss image over the nodes.
pub fn max_rho(s: &GraphState) -> f64 {
    let (n, m) = (s.spec.n, s.spec.m);
    (0..s.spec.node_count())
        .map(|node| {
            let jet = s.jet(node);
            let z = nalgebra::DMatrix::from_fn(n, m, |i, a| jet.df[i][a]);
            libm::sqrt(z.singular_values().iter().map(|sv| libm::atan(*sv) * libm::atan(*sv)).sum())
        })
        .fold(0.0, f64::max)
}

/// Bisection on `λ` for a measure that is increasing in the scale.
fn rescale_to(s: &GraphState, target: f64, measure: &dyn Fn(&GraphState) -> f64, what: &str) -> Result<GraphState> {
    let flat = measure(&s.scaled(0.0));
    if !(measure(s) > flat + 1e-14) {
        return Err(Error::InvalidPresetParam(format!("cannot rescale flat data to a target {what}")));
    }
    let mut hi = 1.0;
    while measure(&s.scaled(hi)) < target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidPresetParam(format!("target {what} unreachable")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if measure(&s.scaled(mid)) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    // `lo` keeps the measure on the safe side of the target
    Ok(s.scaled(lo))
}
