//! Scenario description: waypoints, tangent and knot rules, current,
//! initial state, guidance parameters and integration settings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynmodel::{ControllerGains, DynamicModel};
use crate::error::{Error, Result};
use crate::guidance::GuidanceParams;
use crate::phspline::{
    build_spline, cubic_spline_tangents, normalized_chord_pairs, AngleCriterion, HermiteData,
    KnotRule, PHSpline,
};
use crate::vec3::Vec3;

type V3 = Vec3<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TangentRule {
    Explicit { tangents: Vec<V3> },
    NormalizedChordPairs,
    CubicSpline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    KinematicBasic,
    KinematicExtended,
    Dynamic,
}

impl SimMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "kinematic-basic" | "basic" => Ok(Self::KinematicBasic),
            "kinematic-extended" | "extended" => Ok(Self::KinematicExtended),
            "dynamic" => Ok(Self::Dynamic),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::KinematicBasic => "kinematic-basic",
            Self::KinematicExtended => "kinematic-extended",
            Self::Dynamic => "dynamic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub eta: V3,
    /// `[w, x, y, z]`; aligned with the initial desired direction when absent.
    #[serde(default)]
    pub attitude: Option<[f64; 4]>,
    /// Starting path parameter relative to the first knot.
    #[serde(default = "default_u_offset")]
    pub u_offset: f64,
}

fn default_u_offset() -> f64 {
    0.01
}
fn default_dt() -> f64 {
    0.1
}
fn default_t_max() -> f64 {
    1200.0
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub waypoints: Vec<V3>,
    pub tangents: TangentRule,
    #[serde(default)]
    pub knots: KnotRule,
    #[serde(default)]
    pub criterion: AngleCriterion,
    /// Constant drift velocity (m/s).
    #[serde(default)]
    pub current: V3,
    #[serde(default = "yes")]
    pub current_enabled: bool,
    pub initial: InitialState,
    #[serde(default)]
    pub guidance: GuidanceParams<f64>,
    pub mode: SimMode,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    /// Model file for dynamic mode; the bundled generic torpedo when absent.
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub gains: ControllerGains,
    /// Optional bound on the current estimate magnitude (m/s).
    #[serde(default)]
    pub estimate_clamp: Option<f64>,
}

impl ScenarioConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut c = Self::from_json(&text)?;
        // model paths are relative to the scenario file
        if let (Some(m), Some(dir)) = (&c.model, path.parent()) {
            if m.is_relative() {
                c.model = Some(dir.join(m));
            }
        }
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.waypoints.len() < 2 {
            return cfg("need at least two waypoints".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return cfg(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return cfg(format!("t_max = {} must be positive", self.t_max));
        }
        if let TangentRule::Explicit { tangents } = &self.tangents {
            if tangents.len() != self.waypoints.len() {
                return cfg(format!(
                    "{} tangents for {} waypoints",
                    tangents.len(),
                    self.waypoints.len()
                ));
            }
        }
        if let Some(c) = self.estimate_clamp {
            if !(c > 0.0) {
                return cfg("estimate clamp must be positive".into());
            }
        }
        if !self.initial.eta.is_finite() || !self.current.is_finite() {
            return cfg("initial position and current must be finite".into());
        }
        self.guidance.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.gains.validate()
    }

    /// Drift actually applied to the plant.
    pub fn active_current(&self) -> V3 {
        if self.current_enabled {
            self.current
        } else {
            V3::zeros()
        }
    }

    pub fn hermite_data(&self) -> Result<HermiteData<f64>> {
        let pts = self.waypoints.clone();
        let knots = self.knots.knots(&pts)?;
        let tangents = match &self.tangents {
            TangentRule::Explicit { tangents } => tangents.clone(),
            TangentRule::NormalizedChordPairs => normalized_chord_pairs(&pts)?,
            TangentRule::CubicSpline => cubic_spline_tangents(&pts, &knots)?,
        };
        HermiteData::new(pts, tangents, knots)
    }

    pub fn build_spline(&self) -> Result<PHSpline<f64>> {
        build_spline(&self.hermite_data()?, self.criterion)
    }

    pub fn dynamic_model(&self) -> Result<DynamicModel> {
        match &self.model {
            Some(p) => DynamicModel::load(p).map_err(|e| Error::Config(format!("{}: {e}", p.display()))),
            None => Ok(DynamicModel::generic_torpedo()),
        }
    }

    /// Built-in scenarios 1 to 3.
    pub fn builtin(id: u32) -> Result<Self> {
        let v = |x: f64, y: f64, z: f64| V3::new(x, y, z);
        let (name, waypoints, tangents, current, eta0) = match id {
            1 => (
                "scenario 1: eight waypoints, paired chord tangents",
                vec![
                    v(0., 0., 0.),
                    v(20., 20., 20.),
                    v(35., 25., 25.),
                    v(50., 10., 25.),
                    v(45., -5., 20.),
                    v(25., -25., 0.),
                    v(10., -30., -5.),
                    v(-5., -15., -5.),
                ],
                TangentRule::NormalizedChordPairs,
                v(0.15, -0.2, 0.05),
                v(-5., 5., -5.),
            ),
            2 => {
                let (pts, tans) = helix_samples(10.0, 2.0, 2.0, 10);
                (
                    "scenario 2: two turns of a circular helix",
                    pts,
                    TangentRule::Explicit { tangents: tans },
                    v(-0.05, -0.1, -0.1),
                    v(5., 5., 5.),
                )
            }
            3 => (
                "scenario 3: seven waypoints, cubic spline tangents",
                vec![
                    v(0., 0., 10.),
                    v(20., 10., 20.),
                    v(15., 25., 30.),
                    v(37., 17., 35.),
                    v(27., 35., 31.),
                    v(45., 29., 19.),
                    v(50., 50., 5.),
                ],
                TangentRule::CubicSpline,
                v(-0.05, -0.1, -0.1),
                v(5., 5., 15.),
            ),
            other => return Err(Error::Config(format!("unknown scenario {other} (expected 1, 2 or 3)"))),
        };
        Ok(Self {
            name: name.to_string(),
            waypoints,
            tangents,
            knots: KnotRule::Chord,
            criterion: AngleCriterion::CubicCompatible,
            current,
            current_enabled: true,
            initial: InitialState { eta: eta0, attitude: None, u_offset: default_u_offset() },
            guidance: GuidanceParams::default(),
            mode: SimMode::KinematicExtended,
            dt: default_dt(),
            t_max: default_t_max(),
            model: None,
            gains: ControllerGains::default(),
            estimate_clamp: None,
        })
    }
}

/// `n` equally spaced samples of `(a sin(s/s0), a cos(s/s0), -b s/s0)` over
/// `turns` full turns, `s0 = sqrt(a^2 + b^2)`, with unit tangents.
pub fn helix_samples(a: f64, b: f64, turns: f64, n: usize) -> (Vec<V3>, Vec<V3>) {
    let s0 = a.hypot(b);
    let s_end = turns * std::f64::consts::TAU * s0;
    let mut pts = Vec::with_capacity(n);
    let mut tans = Vec::with_capacity(n);
    for k in 0..n {
        let s = s_end * k as f64 / (n - 1) as f64;
        let (sn, cs) = (s / s0).sin_cos();
        pts.push(V3::new(a * sn, a * cs, -b * s / s0));
        tans.push(V3::new(a * cs / s0, -a * sn / s0, -b / s0));
    }
    (pts, tans)
}
