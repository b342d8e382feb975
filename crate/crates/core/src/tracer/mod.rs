//! Deterministic path search: line of sight, image-method specular
//! reflections and single-edge UTD diffraction with optional reflections on
//! either side.

mod diffraction;
mod evaluate;
mod image_tree;

pub use evaluate::{evaluate_band, evaluate_path, validate_path};

use num_complex::Complex64;

use crate::em::{wavelength, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::geometry::{EdgeId, FacetId, Point3, Scene};
use image_tree::{ImageTree, TreeLimits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InteractionKind {
    Reflection(FacetId),
    Diffraction(EdgeId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interaction {
    pub kind: InteractionKind,
    pub point: Point3,
}

/// One ray path from `tx` to `rx`.
///
/// `amplitude` holds `(frequency, complex amplitude)` pairs once the path has
/// been evaluated; `|a|^2` is the received power for 1 W transmitted.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationPath {
    pub tx: Point3,
    pub rx: Point3,
    pub interactions: Vec<Interaction>,
    pub total_length: f64,
    pub delay: f64,
    pub amplitude: Vec<(f64, Complex64)>,
}

impl PropagationPath {
    pub(crate) fn new(tx: Point3, rx: Point3, interactions: Vec<Interaction>) -> Self {
        let mut total_length = 0.0;
        let mut prev = tx;
        for i in &interactions {
            total_length += (i.point - prev).norm();
            prev = i.point;
        }
        total_length += (rx - prev).norm();
        Self {
            tx,
            rx,
            interactions,
            total_length,
            delay: total_length / SPEED_OF_LIGHT,
            amplitude: Vec::new(),
        }
    }

    /// Evaluated amplitude at `frequency_hz`; the frequency must match a
    /// stored sample to within 1 mHz.
    pub fn amplitude_at(&self, frequency_hz: f64) -> Result<Complex64> {
        self.amplitude
            .iter()
            .find(|(f, _)| (f - frequency_hz).abs() <= 1e-3)
            .map(|(_, a)| *a)
            .ok_or(Error::MissingFrequency(frequency_hz))
    }

    /// `tx`, every interaction point, `rx`.
    pub fn points(&self) -> Vec<Point3> {
        let mut v = Vec::with_capacity(self.interactions.len() + 2);
        v.push(self.tx);
        v.extend(self.interactions.iter().map(|i| i.point));
        v.push(self.rx);
        v
    }

    /// Identity of the path: its interaction sequence.
    pub fn key(&self) -> Vec<InteractionKind> {
        self.interactions.iter().map(|i| i.kind).collect()
    }

    pub fn is_diffracted(&self) -> bool {
        self.interactions
            .iter()
            .any(|i| matches!(i.kind, InteractionKind::Diffraction(_)))
    }

    pub fn reflection_count(&self) -> usize {
        self.interactions
            .iter()
            .filter(|i| matches!(i.kind, InteractionKind::Reflection(_)))
            .count()
    }

    /// The same path traversed from `rx` to `tx`.
    pub fn reversed(&self) -> Self {
        let mut interactions = self.interactions.clone();
        interactions.reverse();
        let mut p = Self::new(self.rx, self.tx, interactions);
        p.amplitude = self.amplitude.clone();
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracerConfig {
    pub max_reflections: usize,
    pub enable_diffraction: bool,
    /// Reflections allowed on a diffracted path, split freely between the
    /// two sides of the edge.
    pub max_reflections_with_diffraction: usize,
    /// Paths whose free-space spreading loss exceeds this plus 10 dB are
    /// never constructed.
    pub path_loss_budget_db: f64,
    /// Cull image-tree windows by sampled visibility. Shrinks the tree in
    /// cluttered scenes, but a window seen only between samples is lost, so
    /// off by default.
    pub visibility_culling: bool,
    /// Frequency at which the spreading-loss pruning length is computed;
    /// use the lowest frequency that will be evaluated.
    pub pruning_frequency_hz: f64,
}

impl Default for TracerConfig {
    fn default() -> Self {
        Self {
            max_reflections: 4,
            enable_diffraction: true,
            max_reflections_with_diffraction: 1,
            path_loss_budget_db: 90.0,
            visibility_culling: false,
            pruning_frequency_hz: 3.994e9 - 234e6,
        }
    }
}

impl TracerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.path_loss_budget_db > 0.0) {
            return Err(Error::Range(format!(
                "path_loss_budget_db must be positive, got {}",
                self.path_loss_budget_db
            )));
        }
        if !(self.pruning_frequency_hz > 0.0) {
            return Err(Error::Range("pruning frequency must be positive".into()));
        }
        Ok(())
    }

    /// Longest unfolded path whose spreading loss stays within budget + 10 dB.
    pub fn max_path_length(&self) -> f64 {
        let lambda = wavelength(self.pruning_frequency_hz);
        lambda / (4.0 * std::f64::consts::PI) * 10f64.powf((self.path_loss_budget_db + 10.0) / 20.0)
    }
}

/// Path finder for a fixed transmitter. Construction builds the
/// transmitter-side image tree once; [`Tracer::paths_to`] is then cheap per
/// receiver and safe to call from many threads.
pub struct Tracer<'a> {
    scene: &'a Scene,
    tx: Point3,
    cfg: TracerConfig,
    max_length: f64,
    tree: ImageTree,
    diffraction: Option<diffraction::Sources>,
}

impl<'a> Tracer<'a> {
    pub fn new(scene: &'a Scene, tx: Point3, cfg: TracerConfig) -> Result<Self> {
        cfg.validate()?;
        let max_length = cfg.max_path_length();
        let depth = if cfg.enable_diffraction {
            cfg.max_reflections.max(cfg.max_reflections_with_diffraction)
        } else {
            cfg.max_reflections
        };
        let tree = ImageTree::build(
            scene,
            tx,
            &TreeLimits {
                max_depth: depth,
                max_length,
                visibility_culling: cfg.visibility_culling,
            },
        );
        let diffraction = cfg
            .enable_diffraction
            .then(|| diffraction::Sources::new(scene, &tree, cfg.max_reflections_with_diffraction, max_length));
        Ok(Self {
            scene,
            tx,
            cfg,
            max_length,
            tree,
            diffraction,
        })
    }

    pub fn tx(&self) -> Point3 {
        self.tx
    }

    pub fn config(&self) -> &TracerConfig {
        &self.cfg
    }

    /// Number of transmitter image sources.
    pub fn image_count(&self) -> usize {
        self.tree.len()
    }

    /// Line of sight and specular paths, ordered by reflection count and
    /// then by image-tree order.
    pub fn specular_paths(&self, rx: &Point3) -> Vec<PropagationPath> {
        let mut out = Vec::new();
        if (rx - self.tx).norm() <= 1e-9 {
            return out;
        }
        if (rx - self.tx).norm() <= self.max_length && self.scene.segment_clear(&self.tx, rx) {
            out.push(PropagationPath::new(self.tx, *rx, Vec::new()));
        }
        for (k, node) in self.tree.nodes.iter().enumerate() {
            if node.depth as usize > self.cfg.max_reflections {
                continue;
            }
            if (node.image - rx).norm() > self.max_length || !self.tree.in_beam(k, rx) {
                continue;
            }
            if let Some(points) = self.tree.trace_back(self.scene, k as u32, rx) {
                let interactions = points
                    .into_iter()
                    .map(|(f, p)| Interaction {
                        kind: InteractionKind::Reflection(f),
                        point: p,
                    })
                    .collect();
                out.push(PropagationPath::new(self.tx, *rx, interactions));
            }
        }
        out.sort_by_key(|p| p.interactions.len());
        out
    }

    /// Single-diffraction paths, with up to
    /// `max_reflections_with_diffraction` reflections around the edge.
    pub fn diffracted_paths(&self, rx: &Point3) -> Vec<PropagationPath> {
        match &self.diffraction {
            Some(d) if (rx - self.tx).norm() > 1e-9 => d.paths_to(self.scene, &self.tree, self.tx, *rx, self.max_length),
            _ => Vec::new(),
        }
    }

    /// All paths to `rx`, unevaluated.
    pub fn paths_to(&self, rx: &Point3) -> Vec<PropagationPath> {
        let mut v = self.specular_paths(rx);
        v.extend(self.diffracted_paths(rx));
        v
    }
}

/// Line of sight plus image-method reflections up to `cfg.max_reflections`.
pub fn find_specular_paths(scene: &Scene, tx: &Point3, rx: &Point3, cfg: &TracerConfig) -> Result<Vec<PropagationPath>> {
    let cfg = TracerConfig {
        enable_diffraction: false,
        ..*cfg
    };
    Ok(Tracer::new(scene, *tx, cfg)?.specular_paths(rx))
}

/// Single-edge diffraction paths; empty when diffraction is disabled.
pub fn find_diffracted_paths(scene: &Scene, tx: &Point3, rx: &Point3, cfg: &TracerConfig) -> Result<Vec<PropagationPath>> {
    if !cfg.enable_diffraction {
        return Ok(Vec::new());
    }
    let cfg = TracerConfig {
        max_reflections: 0,
        ..*cfg
    };
    Ok(Tracer::new(scene, *tx, cfg)?.diffracted_paths(rx))
}
