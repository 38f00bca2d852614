//! Scenario configuration: a single human-editable TOML file describing the
//! scene, cameras, noise, priors, and pipeline tuning.
//!
//! Unknown keys are hard errors — a silently ignored typo in a safety
//! monitor's config is worse than a failed start. Semantic validation
//! reports the path of the first invalid field.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distance::StridePolicy;
use crate::error::{Error, Result};
use crate::model::{Camera, CameraId, Category, CategoryId};
use crate::monitor::{AbsentViewPolicy, MonitorConfig};
use crate::pipeline::{GateConfig, PriorEntry, ScenePrior, SpatialRelation};
use crate::sim::{CameraSpec, Scenario, SceneObject, Trajectory, ViewAxis};
use crate::tracking::TrackerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub fps: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
    pub categories: Vec<String>,
    pub cameras: Vec<CameraSection>,
    pub objects: Vec<ObjectSection>,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub prior: Vec<PriorSection>,
    #[serde(default)]
    pub gate: GateSection,
    #[serde(default)]
    pub tracking: TrackingSection,
    #[serde(default)]
    pub monitor: MonitorSection,
    #[serde(default)]
    pub stride: StrideSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSection {
    pub name: String,
    pub view: ViewAxis,
    pub width: u32,
    pub height: u32,
    pub scale: f64,
    pub origin_row: f64,
    pub origin_col: f64,
    /// Categories visible in this view; omitted means all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visible: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSection {
    pub category: String,
    pub half_extents: [f64; 3],
    pub waypoints: Vec<WaypointSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointSection {
    pub t: f64,
    pub center: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub jitter_sigma_px: f64,
    pub dropout_prob: f64,
    /// Per-camera overrides by camera name.
    pub per_camera: BTreeMap<String, NoiseOverride>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            jitter_sigma_px: 0.0,
            dropout_prob: 0.0,
            per_camera: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter_sigma_px: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropout_prob: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub camera: String,
    pub a: String,
    pub b: String,
    pub relation: SpatialRelation,
    #[serde(default)]
    pub margin_px: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateSection {
    pub change_iou_threshold: f64,
    pub max_streak: u32,
}

impl Default for GateSection {
    fn default() -> Self {
        let d = GateConfig::default();
        GateSection {
            change_iou_threshold: d.change_iou_threshold,
            max_streak: d.max_streak,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackingSection {
    pub window: usize,
    pub match_threshold: f64,
    pub max_missed: u32,
}

impl Default for TrackingSection {
    fn default() -> Self {
        let d = TrackerConfig::default();
        TrackingSection {
            window: d.window,
            match_threshold: d.match_threshold,
            max_missed: d.max_missed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorSection {
    pub delta_px: f64,
    pub consecutive_k: u32,
    pub replicas: u32,
    pub absent_view_policy: AbsentViewPolicy,
}

impl Default for MonitorSection {
    fn default() -> Self {
        let d = MonitorConfig::default();
        MonitorSection {
            delta_px: d.delta_px,
            consecutive_k: d.consecutive_k,
            replicas: d.replicas_r,
            absent_view_policy: d.absent_view_policy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrideMode {
    Auto,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrideSection {
    pub mode: StrideMode,
    pub max_samples: usize,
    pub stride: usize,
}

impl Default for StrideSection {
    fn default() -> Self {
        StrideSection {
            mode: StrideMode::Auto,
            max_samples: 256,
            stride: 1,
        }
    }
}

/// Everything a run needs, resolved from a validated config.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub scenario: Scenario,
    pub prior: ScenePrior,
    pub gate: GateConfig,
    pub tracker: TrackerConfig,
    pub monitor: MonitorConfig,
    pub stride: StridePolicy,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<ScenarioConfig> {
        toml::from_str(text).map_err(|e| Error::config("<config>", e.message()))
    }

    pub fn load(path: &Path) -> Result<ScenarioConfig> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::config(path.display().to_string(), e.message()))
    }

    /// Canonical serialized form; the manifest embeds this and hashes it.
    pub fn to_canonical_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario config serializes")
    }

    pub fn frame_count(&self) -> u64 {
        (self.duration_s * self.fps).round() as u64
    }

    pub fn resolve(&self) -> Result<ResolvedScenario> {
        let fail = |path: &str, reason: String| Err(Error::config(path, reason));
        // NaN fails both of these, unlike a plain `<=` comparison
        let positive = |x: f64| x.is_finite() && x > 0.0;
        let non_negative = |x: f64| x.is_finite() && x >= 0.0;

        if !positive(self.fps) {
            return fail("fps", format!("must be > 0, got {}", self.fps));
        }
        if !positive(self.duration_s) {
            return fail("duration_s", format!("must be > 0, got {}", self.duration_s));
        }
        if self.frame_count() == 0 {
            return fail("duration_s", "duration_s x fps rounds to zero frames".into());
        }

        if self.categories.is_empty() {
            return fail("categories", "at least one category required".into());
        }
        let mut categories = Vec::new();
        let mut cat_ids: BTreeMap<&str, CategoryId> = BTreeMap::new();
        for (i, name) in self.categories.iter().enumerate() {
            if name.is_empty() {
                return fail(&format!("categories[{i}]"), "empty name".into());
            }
            if cat_ids.insert(name, CategoryId(i as u16)).is_some() {
                return fail(&format!("categories[{i}]"), format!("duplicate name '{name}'"));
            }
            categories.push(Category {
                id: CategoryId(i as u16),
                name: name.clone(),
            });
        }

        if self.cameras.is_empty() {
            return fail("cameras", "at least one camera required".into());
        }
        let mut cameras = Vec::new();
        let mut cam_names: BTreeSet<&str> = BTreeSet::new();
        for (i, cam) in self.cameras.iter().enumerate() {
            let path = |f: &str| format!("cameras[{i}].{f}");
            if !cam_names.insert(&cam.name) {
                return fail(&path("name"), format!("duplicate camera '{}'", cam.name));
            }
            if cam.width < 1 || cam.height < 1 {
                return fail(&path("width"), "resolution must be at least 1x1".into());
            }
            if !positive(cam.scale) {
                return fail(&path("scale"), format!("must be > 0, got {}", cam.scale));
            }
            let visible: BTreeSet<CategoryId> = match &cam.visible {
                None => cat_ids.values().copied().collect(),
                Some(names) => {
                    let mut set = BTreeSet::new();
                    for (j, n) in names.iter().enumerate() {
                        match cat_ids.get(n.as_str()) {
                            Some(id) => {
                                set.insert(*id);
                            }
                            None => {
                                return fail(
                                    &format!("cameras[{i}].visible[{j}]"),
                                    format!("undeclared category '{n}'"),
                                )
                            }
                        }
                    }
                    set
                }
            };
            let mut sigma = self.noise.jitter_sigma_px;
            let mut dropout = self.noise.dropout_prob;
            if let Some(o) = self.noise.per_camera.get(&cam.name) {
                if let Some(s) = o.jitter_sigma_px {
                    sigma = s;
                }
                if let Some(d) = o.dropout_prob {
                    dropout = d;
                }
            }
            cameras.push(CameraSpec {
                camera: Camera {
                    id: CameraId(i),
                    name: cam.name.clone(),
                    width: cam.width,
                    height: cam.height,
                },
                view: cam.view,
                scale: cam.scale,
                origin_row: cam.origin_row,
                origin_col: cam.origin_col,
                visible,
                jitter_sigma_px: sigma,
                dropout_prob: dropout,
            });
        }

        if !non_negative(self.noise.jitter_sigma_px) {
            return fail("noise.jitter_sigma_px", "must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.noise.dropout_prob) {
            return fail("noise.dropout_prob", "must be in [0, 1]".into());
        }
        for (name, o) in &self.noise.per_camera {
            let path = format!("noise.per_camera.{name}");
            if !cam_names.contains(name.as_str()) {
                return fail(&path, format!("undeclared camera '{name}'"));
            }
            if let Some(s) = o.jitter_sigma_px {
                if !non_negative(s) {
                    return fail(&format!("{path}.jitter_sigma_px"), "must be >= 0".into());
                }
            }
            if let Some(d) = o.dropout_prob {
                if !(0.0..=1.0).contains(&d) {
                    return fail(&format!("{path}.dropout_prob"), "must be in [0, 1]".into());
                }
            }
        }

        if self.objects.is_empty() {
            return fail("objects", "at least one object required".into());
        }
        let mut objects = Vec::new();
        for (i, obj) in self.objects.iter().enumerate() {
            let path = |f: &str| format!("objects[{i}].{f}");
            let Some(&category) = cat_ids.get(obj.category.as_str()) else {
                return fail(&path("category"), format!("undeclared category '{}'", obj.category));
            };
            if !obj.half_extents.iter().all(|&h| positive(h)) {
                return fail(&path("half_extents"), "all components must be > 0".into());
            }
            let waypoints: Vec<(f64, [f64; 3])> =
                obj.waypoints.iter().map(|w| (w.t, w.center)).collect();
            let trajectory = Trajectory::new(waypoints)
                .map_err(|e| Error::config(path("waypoints"), e.to_string()))?;
            objects.push(SceneObject {
                category,
                half_extents: obj.half_extents,
                trajectory,
            });
        }

        let mut prior = ScenePrior::new();
        for (i, p) in self.prior.iter().enumerate() {
            let path = |f: &str| format!("prior[{i}].{f}");
            let cam_index = match self.cameras.iter().position(|c| c.name == p.camera) {
                Some(idx) => idx,
                None => return fail(&path("camera"), format!("undeclared camera '{}'", p.camera)),
            };
            let Some(&a) = cat_ids.get(p.a.as_str()) else {
                return fail(&path("a"), format!("undeclared category '{}'", p.a));
            };
            let Some(&b) = cat_ids.get(p.b.as_str()) else {
                return fail(&path("b"), format!("undeclared category '{}'", p.b));
            };
            if a == b {
                return fail(&path("b"), "prior pair must name two distinct categories".into());
            }
            if !non_negative(p.margin_px) {
                return fail(&path("margin_px"), "must be >= 0".into());
            }
            prior
                .add(
                    cam_index,
                    PriorEntry {
                        a,
                        b,
                        required: p.relation,
                        margin_px: p.margin_px,
                    },
                )
                .map_err(|e| Error::config(format!("prior[{i}]"), e.to_string()))?;
        }

        if !(0.0..=1.0).contains(&self.gate.change_iou_threshold) {
            return fail("gate.change_iou_threshold", "must be in [0, 1]".into());
        }
        if self.gate.max_streak < 1 {
            return fail("gate.max_streak", "must be >= 1".into());
        }
        if self.tracking.window < 1 || self.tracking.window.is_multiple_of(2) {
            return fail("tracking.window", "must be odd and >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.tracking.match_threshold) {
            return fail("tracking.match_threshold", "must be in [0, 1]".into());
        }
        if self.tracking.max_missed < 1 {
            return fail("tracking.max_missed", "must be >= 1".into());
        }
        if !positive(self.monitor.delta_px) {
            return fail("monitor.delta_px", "must be > 0".into());
        }
        if self.monitor.consecutive_k < 1 {
            return fail("monitor.consecutive_k", "must be >= 1".into());
        }
        if self.monitor.replicas < 1 {
            return fail("monitor.replicas", "must be >= 1".into());
        }
        let stride = match self.stride.mode {
            StrideMode::Auto => {
                if self.stride.max_samples < 8 {
                    return fail("stride.max_samples", "must be >= 8".into());
                }
                StridePolicy::Auto {
                    max_samples: self.stride.max_samples,
                }
            }
            StrideMode::Fixed => {
                if self.stride.stride < 1 {
                    return fail("stride.stride", "must be >= 1".into());
                }
                StridePolicy::Fixed {
                    stride: self.stride.stride,
                }
            }
        };

        Ok(ResolvedScenario {
            scenario: Scenario {
                name: self.name.clone(),
                fps: self.fps,
                frame_count: self.frame_count(),
                seed: self.seed,
                categories,
                cameras,
                objects,
                delta_px: self.monitor.delta_px,
                absent_view_policy: self.monitor.absent_view_policy,
            },
            prior,
            gate: GateConfig {
                change_iou_threshold: self.gate.change_iou_threshold,
                max_streak: self.gate.max_streak,
            },
            tracker: TrackerConfig {
                match_threshold: self.tracking.match_threshold,
                max_missed: self.tracking.max_missed,
                window: self.tracking.window,
            },
            monitor: MonitorConfig {
                delta_px: self.monitor.delta_px,
                consecutive_k: self.monitor.consecutive_k,
                replicas_r: self.monitor.replicas,
                absent_view_policy: self.monitor.absent_view_policy,
            },
            stride,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "mini"
fps = 10.0
duration_s = 1.0
seed = 7
categories = ["holder", "detector"]

[[cameras]]
name = "front"
view = "front"
width = 320
height = 240
scale = 10.0
origin_row = 120.0
origin_col = 160.0

[[objects]]
category = "holder"
half_extents = [1.0, 1.0, 1.0]
waypoints = [{ t = 0.0, center = [0.0, 0.0, 0.0] }]

[[objects]]
category = "detector"
half_extents = [1.0, 1.0, 1.0]
waypoints = [{ t = 0.0, center = [5.0, 0.0, 0.0] }]
"#;

    #[test]
    fn minimal_config_parses_and_resolves() {
        let cfg = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        let resolved = cfg.resolve().unwrap();
        assert_eq!(resolved.scenario.frame_count, 10);
        assert_eq!(resolved.scenario.cameras.len(), 1);
        assert_eq!(resolved.scenario.categories.len(), 2);
        // defaults applied
        assert_eq!(resolved.monitor.delta_px, 10.0);
        assert_eq!(resolved.gate.max_streak, 5);
        assert_eq!(resolved.tracker.window, 3);
        assert_eq!(resolved.stride, StridePolicy::Auto { max_samples: 256 });
        // all categories visible by default
        assert_eq!(resolved.scenario.cameras[0].visible.len(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("seed = 7", "seed = 7\ntypo_key = 1");
        let err = ScenarioConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("typo_key"), "{err}");
    }

    #[test]
    fn undeclared_category_names_field_path() {
        let text = MINIMAL.replace("category = \"detector\"", "category = \"robot\"");
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        let err = cfg.resolve().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("objects[1].category"), "{msg}");
        assert!(msg.contains("robot"), "{msg}");
    }

    #[test]
    fn bad_waypoint_order_names_field_path() {
        let text = MINIMAL.replace(
            "waypoints = [{ t = 0.0, center = [5.0, 0.0, 0.0] }]",
            "waypoints = [{ t = 1.0, center = [5.0, 0.0, 0.0] }, { t = 0.5, center = [6.0, 0.0, 0.0] }]",
        );
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().contains("objects[1].waypoints"), "{err}");
    }

    #[test]
    fn per_camera_noise_override_applies() {
        let text = format!(
            "{MINIMAL}\n[noise]\njitter_sigma_px = 1.0\ndropout_prob = 0.02\n[noise.per_camera.front]\njitter_sigma_px = 2.5\n"
        );
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        let resolved = cfg.resolve().unwrap();
        assert_eq!(resolved.scenario.cameras[0].jitter_sigma_px, 2.5);
        assert_eq!(resolved.scenario.cameras[0].dropout_prob, 0.02);
    }

    #[test]
    fn per_camera_override_of_unknown_camera_errors() {
        let text = format!("{MINIMAL}\n[noise.per_camera.back]\njitter_sigma_px = 2.5\n");
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().contains("noise.per_camera.back"), "{err}");
    }

    #[test]
    fn duplicate_camera_name_rejected() {
        let extra = r#"
[[cameras]]
name = "front"
view = "top"
width = 320
height = 240
scale = 10.0
origin_row = 120.0
origin_col = 160.0
"#;
        // insert the duplicate camera before the first objects table
        let text = MINIMAL.replacen("[[objects]]", &format!("{extra}\n[[objects]]"), 1);
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().contains("cameras[1].name"), "{err}");
    }

    #[test]
    fn prior_section_round_trips_to_scene_prior() {
        let text = format!(
            "{MINIMAL}\n[[prior]]\ncamera = \"front\"\na = \"holder\"\nb = \"detector\"\nrelation = \"left_of\"\nmargin_px = 2.0\n"
        );
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        let resolved = cfg.resolve().unwrap();
        let entries = resolved.prior.for_camera(0);
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].required, SpatialRelation::LeftOf);
        assert_eq!(entries[0].margin_px, 2.0);
    }

    #[test]
    fn even_smoothing_window_rejected() {
        let text = format!("{MINIMAL}\n[tracking]\nwindow = 4\n");
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().contains("tracking.window"), "{err}");
    }

    #[test]
    fn fixed_stride_resolves() {
        let text = format!("{MINIMAL}\n[stride]\nmode = \"fixed\"\nstride = 4\n");
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(
            cfg.resolve().unwrap().stride,
            StridePolicy::Fixed { stride: 4 }
        );
    }

    #[test]
    fn canonical_toml_round_trips() {
        let cfg = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        let text = cfg.to_canonical_toml();
        let again = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, again);
    }
}
