//! Experiment and study files.
//!
//! Both are TOML. Experiment keys are flat; a study holds its refinement
//! levels and order window at the top level and the base experiment in a
//! `[base]` table. Unknown keys are rejected.
//!
//! ```toml
//! mesh = "cartesian"            # or "perturbed" (with perturbation, seed)
//! n = 64
//! boundary = "periodic"         # or "impermeable"
//! field = "uniform"             # velocity = [a, b]; or "cellular" with amplitude
//! time_factor = "constant"      # or "cosine" with omega
//! initial = "rectangle"         # rectangle = [x0, y0, x1, y1]
//! xi = 0.1
//! c0 = 1.0
//! horizon = 0.5
//! snapshots = [0.25]
//! ```

use std::path::Path;

use advect_core::flow::{TimeFactor, VelocityField};
use advect_core::mesh::{build_cartesian, build_perturbed_cartesian, BoundaryKind, DomainBox, Mesh};
use advect_core::scheme::{AnalyticProfile, AuxGrid, InitialData, ProjectionMode, SchemeConfig};
use advect_core::Vec2;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshKind {
    Cartesian,
    Perturbed,
}

impl MeshKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeshKind::Cartesian => "cartesian",
            MeshKind::Perturbed => "perturbed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryName {
    #[default]
    Periodic,
    Impermeable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Uniform,
    Cellular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimeKind {
    #[default]
    Constant,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Rectangle,
    Polygons,
    Piecewise,
    Gaussian,
    CosineHill,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionName {
    #[default]
    Exact,
    Sampled,
}

fn default_xi() -> f64 {
    0.1
}
fn default_c0() -> f64 {
    1.0
}
fn default_density() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mesh: MeshKind,
    /// Cells per direction.
    pub n: usize,
    #[serde(default)]
    pub boundary: BoundaryName,
    /// `[xmin, ymin, xmax, ymax]`, the unit square by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 4]>,
    #[serde(default)]
    pub perturbation: f64,
    #[serde(default)]
    pub seed: u64,

    pub field: FieldKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub time_factor: TimeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,

    pub initial: InitialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rectangle: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygons: Option<Vec<Vec<[f64; 2]>>>,
    /// Auxiliary grid `[nx, ny]` over the domain for piecewise data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Peak of analytic profiles, or the constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,

    #[serde(default = "default_xi")]
    pub xi: f64,
    #[serde(default = "default_c0")]
    pub c0: f64,
    pub horizon: f64,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    #[serde(default)]
    pub projection: ProjectionName,
    /// Samples per cell direction for sampled projection.
    #[serde(default = "default_density")]
    pub sampling_density: usize,
    #[serde(default)]
    pub write_snapshots: bool,
    /// Output directory, relative to the output root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

/// Everything needed to run, checked against the schema.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub mesh_kind: MeshKind,
    pub n: usize,
    pub domain: DomainBox,
    pub boundary: BoundaryKind,
    pub perturbation: f64,
    pub seed: u64,
    pub field: VelocityField,
    pub data: InitialData,
    pub scheme: SchemeConfig,
    pub horizon: f64,
    pub snapshots: Vec<f64>,
    pub write_snapshots: bool,
}

impl Experiment {
    pub fn build_mesh(&self) -> Result<Mesh, CliError> {
        let mesh = match self.mesh_kind {
            MeshKind::Cartesian => build_cartesian(self.n, self.n, self.domain, self.boundary)?,
            MeshKind::Perturbed => {
                build_perturbed_cartesian(self.n, self.n, self.domain, self.boundary, self.perturbation, self.seed)?
            }
        };
        Ok(mesh)
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn require<T: Copy>(v: Option<T>, key: &str, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| invalid(format!("`{key}` is required for {what}")))
}

fn finite(v: f64, key: &str) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("`{key}` must be finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| invalid(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| e.context(&path.display().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment configs always serialize")
    }

    /// Checks every key and assembles the solver inputs. No mesh is built.
    pub fn validate(&self) -> Result<Experiment, CliError> {
        if self.n == 0 {
            return Err(invalid("`n` must be at least 1"));
        }
        let domain = match self.domain {
            None => DomainBox::unit(),
            Some([x0, y0, x1, y1]) => DomainBox::new(Vec2::new(x0, y0), Vec2::new(x1, y1))?,
        };
        let boundary = match self.boundary {
            BoundaryName::Periodic => BoundaryKind::Periodic,
            BoundaryName::Impermeable => BoundaryKind::Impermeable,
        };
        match self.mesh {
            MeshKind::Cartesian if self.perturbation != 0.0 => {
                return Err(invalid("`perturbation` only applies to perturbed meshes"));
            }
            MeshKind::Perturbed if !(0.0..0.5).contains(&self.perturbation) => {
                return Err(invalid(format!("`perturbation` must lie in [0, 0.5), got {}", self.perturbation)));
            }
            _ => {}
        }

        let time = match self.time_factor {
            TimeKind::Constant => {
                if self.omega.is_some() {
                    return Err(invalid("`omega` only applies to the cosine time factor"));
                }
                TimeFactor::Constant
            }
            TimeKind::Cosine => TimeFactor::Cosine {
                omega: finite(require(self.omega, "omega", "a cosine time factor")?, "omega")?,
            },
        };
        let field = match self.field {
            FieldKind::Uniform => {
                if self.amplitude.is_some() {
                    return Err(invalid("`amplitude` only applies to cellular fields"));
                }
                let [a, b] = require(self.velocity, "velocity", "a uniform field")?;
                VelocityField::uniform(finite(a, "velocity")?, finite(b, "velocity")?)
            }
            FieldKind::Cellular => {
                if self.velocity.is_some() {
                    return Err(invalid("`velocity` only applies to uniform fields"));
                }
                VelocityField::cellular(finite(require(self.amplitude, "amplitude", "a cellular field")?, "amplitude")?)
            }
        }
        .with_time(time);
        field.check_compatible(&domain, boundary)?;

        let data = self.initial_data(&domain)?;
        data.validate(&domain)?;

        let scheme = SchemeConfig {
            xi: self.xi,
            c0: self.c0,
            projection: match self.projection {
                ProjectionName::Exact => ProjectionMode::ExactClip,
                ProjectionName::Sampled => ProjectionMode::Sampled(self.sampling_density),
            },
            sample_density: self.sampling_density,
        };
        scheme.validate()?;
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(invalid(format!("`horizon` must be positive, got {}", self.horizon)));
        }
        if let Some(t) = self.snapshots.iter().find(|t| !(0.0..=self.horizon).contains(*t)) {
            return Err(invalid(format!("snapshot time {t} lies outside [0, horizon]")));
        }
        Ok(Experiment {
            mesh_kind: self.mesh,
            n: self.n,
            domain,
            boundary,
            perturbation: self.perturbation,
            seed: self.seed,
            field,
            data,
            scheme,
            horizon: self.horizon,
            snapshots: self.snapshots.clone(),
            write_snapshots: self.write_snapshots,
        })
    }

    fn initial_data(&self, domain: &DomainBox) -> Result<InitialData, CliError> {
        let what = "this initial data kind";
        let center = || -> Result<Vec2, CliError> {
            let [x, y] = require(self.center, "center", what)?;
            Ok(Vec2::new(finite(x, "center")?, finite(y, "center")?))
        };
        let peak = finite(self.value.unwrap_or(1.0), "value")?;
        Ok(match self.initial {
            InitialKind::Rectangle => {
                let [x0, y0, x1, y1] = require(self.rectangle, "rectangle", "rectangle data")?;
                if !(x1 > x0 && y1 > y0) {
                    return Err(invalid("`rectangle` must be [x0, y0, x1, y1] with x0 < x1, y0 < y1"));
                }
                InitialData::rectangle(x0, y0, x1, y1)
            }
            InitialKind::Polygons => {
                let polys = self
                    .polygons
                    .as_ref()
                    .ok_or_else(|| invalid("`polygons` is required for polygon data"))?;
                InitialData::indicator(polys.iter().map(|p| p.iter().map(|&[x, y]| Vec2::new(x, y)).collect()).collect())
            }
            InitialKind::Piecewise => {
                let [nx, ny] = require(self.grid, "grid", "piecewise data")?;
                let values = self
                    .values
                    .clone()
                    .ok_or_else(|| invalid("`values` is required for piecewise data"))?;
                InitialData::PiecewiseConstant {
                    grid: AuxGrid { nx, ny, domain: *domain },
                    values,
                }
            }
            InitialKind::Gaussian => InitialData::Analytic(AnalyticProfile::Gaussian {
                center: center()?,
                width: positive(require(self.width, "width", what)?, "width")?,
                amplitude: peak,
            }),
            InitialKind::CosineHill => InitialData::Analytic(AnalyticProfile::CosineHill {
                center: center()?,
                radius: positive(require(self.radius, "radius", what)?, "radius")?,
                amplitude: peak,
            }),
            InitialKind::Constant => InitialData::Analytic(AnalyticProfile::Constant { value: peak }),
        })
    }
}

fn positive(v: f64, key: &str) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("`{key}` must be positive, got {v}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    /// Cells per direction of each level.
    pub levels: Vec<usize>,
    /// Accepted range `[lo, hi]` of the fitted order.
    pub window: [f64; 2],
    /// Output directory, relative to the output root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub base: ExperimentConfig,
}

impl StudySpec {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| invalid(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| e.context(&path.display().to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.levels.len() < 2 {
            return Err(invalid("a study needs at least two levels"));
        }
        for (i, n) in self.levels.iter().enumerate() {
            if self.levels[..i].contains(n) {
                return Err(invalid(format!("level n = {n} is listed twice (duplicate h)")));
            }
        }
        let [lo, hi] = self.window;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(invalid(format!("window [{lo}, {hi}] is empty")));
        }
        for &n in &self.levels {
            self.level(n).validate().map_err(|e| e.context(&format!("level n = {n}")))?;
        }
        Ok(())
    }

    /// Base experiment refined to `n` cells per direction.
    pub fn level(&self, n: usize) -> ExperimentConfig {
        ExperimentConfig {
            n,
            output: Some(format!("level_{n:04}")),
            ..self.base.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
mesh = "cartesian"
n = 16
field = "uniform"
velocity = [1.0, 0.0]
initial = "rectangle"
rectangle = [0.25, 0.25, 0.5, 0.5]
horizon = 0.05
"#;

    #[test]
    fn minimal_config_validates() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let e = c.validate().unwrap();
        assert_eq!(e.boundary, BoundaryKind::Periodic);
        assert_eq!(e.scheme.xi, 0.1);
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml(&format!("{MINIMAL}\ncfl = 0.5\n")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("cfl"));
    }

    #[test]
    fn schema_bounds() {
        let with = |extra: &str| ExperimentConfig::from_toml(&format!("{MINIMAL}\n{extra}\n")).unwrap().validate();
        assert!(with("xi = 1.0").is_err());
        assert!(with("xi = -0.1").is_err());
        assert!(with("c0 = 0.0").is_err());
        assert!(with("c0 = inf").is_ok());
        assert!(with("boundary = \"impermeable\"").unwrap_err().to_string().contains("tangent"));
        assert!(with("perturbation = 0.2").is_err());
        assert!(with("snapshots = [0.5]").is_err());
        assert!(with("time_factor = \"cosine\"").is_err());
        assert!(with("time_factor = \"cosine\"\nomega = 2.0").is_ok());
    }

    #[test]
    fn other_initial_kinds() {
        let base = MINIMAL.replace("initial = \"rectangle\"\nrectangle = [0.25, 0.25, 0.5, 0.5]\n", "");
        let with = |extra: &str| ExperimentConfig::from_toml(&format!("{base}\n{extra}\n")).unwrap().validate();
        assert!(with("initial = \"gaussian\"\ncenter = [0.5, 0.5]\nwidth = 0.1").is_ok());
        assert!(with("initial = \"gaussian\"\ncenter = [0.5, 0.5]").is_err());
        assert!(with("initial = \"cosine_hill\"\ncenter = [0.5, 0.5]\nradius = 0.2\nvalue = 2.0").is_ok());
        assert!(with("initial = \"piecewise\"\ngrid = [2, 1]\nvalues = [1.0, 2.0]").is_ok());
        assert!(with("initial = \"piecewise\"\ngrid = [2, 2]\nvalues = [1.0, 2.0]").is_err());
        assert!(with("initial = \"polygons\"\npolygons = [[[0.1, 0.1], [0.4, 0.1], [0.2, 0.3]]]").is_ok());
        assert!(with("initial = \"polygons\"\npolygons = [[[0.1, 0.1], [1.4, 0.1], [0.2, 0.3]]]").is_err());
    }

    #[test]
    fn study_levels() {
        let study = |levels: &str| {
            StudySpec::from_toml(&format!("levels = {levels}\nwindow = [0.4, 0.65]\n[base]\n{MINIMAL}"))
                .unwrap()
                .validate()
        };
        assert!(study("[8, 16]").is_ok());
        assert!(study("[8]").is_err());
        let dup = study("[8, 16, 8]").unwrap_err();
        assert_eq!(dup.exit_code(), 2);
        assert!(dup.to_string().contains("duplicate"));
    }
}
