//! Complex amplitude of a traced path, with the field carried as a 3-D
//! vector through every interaction.

use nalgebra::Vector3 as NVector3;
use num_complex::Complex64;
use std::f64::consts::PI;

use super::{InteractionKind, PropagationPath};
use crate::em::{
    antenna_gain, fresnel_coefficients, roughness_attenuation, utd_diffraction, wavelength, AntennaModel,
    DiffractionAngles, Medium,
};
use crate::geometry::{any_perpendicular, EdgeId, MaterialId, Scene, Vector3};

type Field = NVector3<Complex64>;

fn lift(v: &Vector3) -> Field {
    v.map(|x| Complex64::new(x, 0.0))
}

fn project(e: &Field, u: &Vector3) -> Complex64 {
    e[0] * u[0] + e[1] * u[1] + e[2] * u[2]
}

enum Step {
    Reflection {
        material: MaterialId,
        theta: f64,
        s_hat: Vector3,
        p_in: Vector3,
        p_out: Vector3,
    },
    Diffraction {
        edge: EdgeId,
        angles: DiffractionAngles,
        s_incident: f64,
        s_diffracted: f64,
        beta_in: Vector3,
        phi_in: Vector3,
        beta_out: Vector3,
        phi_out: Vector3,
    },
}

/// Frequency-independent part of a path's amplitude.
struct Prepared {
    steps: Vec<Step>,
    tx_field: Vector3,
    rx_weight: Vector3,
    spreading: f64,
    length: f64,
}

fn unit(v: Vector3) -> Vector3 {
    v / v.norm()
}

fn prepare(scene: &Scene, path: &PropagationPath, tx: &AntennaModel, rx: &AntennaModel) -> Prepared {
    let pts = path.points();
    let legs: Vec<f64> = pts.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let length: f64 = legs.iter().sum();

    let first = unit(pts[1] - pts[0]);
    let last = unit(pts[pts.len() - 1] - pts[pts.len() - 2]);
    let (gt, pol_t) = antenna_gain(tx, &first);
    let (gr, pol_r) = antenna_gain(rx, &(-last));

    let mut steps = Vec::with_capacity(path.interactions.len());
    let mut spreading = 1.0 / length;
    let mut travelled = 0.0;
    for (k, it) in path.interactions.iter().enumerate() {
        travelled += legs[k];
        let d_in = unit(pts[k + 1] - pts[k]);
        let d_out = unit(pts[k + 2] - pts[k + 1]);
        match it.kind {
            InteractionKind::Reflection(f) => {
                let facet = scene.facet(f);
                let n = facet.unit_normal;
                let cos_t = d_in.dot(&n).abs().min(1.0);
                let cross = d_in.cross(&n);
                let s_hat = if cross.norm() > 1e-12 {
                    cross.normalize()
                } else {
                    any_perpendicular(&d_in)
                };
                steps.push(Step::Reflection {
                    material: facet.material,
                    theta: cos_t.acos(),
                    s_hat,
                    p_in: s_hat.cross(&d_in),
                    p_out: s_hat.cross(&d_out),
                });
            }
            InteractionKind::Diffraction(e) => {
                let edge = scene.edge(e);
                let s_incident = travelled;
                let s_diffracted = length - travelled;
                spreading = (s_incident / (s_diffracted * (s_incident + s_diffracted))).sqrt() / s_incident;
                let phi_in = unit(edge.direction.cross(&d_in));
                let phi_out = unit(edge.direction.cross(&d_out));
                steps.push(Step::Diffraction {
                    edge: e,
                    angles: DiffractionAngles {
                        phi_incident: edge.angle_from_face_a(&(-d_in)),
                        phi_diffracted: edge.angle_from_face_a(&d_out),
                        beta_0: d_in.dot(&edge.direction).clamp(-1.0, 1.0).acos(),
                    },
                    s_incident,
                    s_diffracted,
                    beta_in: phi_in.cross(&d_in),
                    phi_in,
                    beta_out: phi_out.cross(&d_out),
                    phi_out,
                });
            }
        }
    }
    Prepared {
        steps,
        tx_field: pol_t * gt.sqrt(),
        rx_weight: pol_r * gr.sqrt(),
        spreading,
        length,
    }
}

impl Prepared {
    fn amplitude(&self, scene: &Scene, frequency_hz: f64) -> Complex64 {
        let lambda = wavelength(frequency_hz);
        let mut e = lift(&self.tx_field);
        for step in &self.steps {
            match step {
                Step::Reflection {
                    material,
                    theta,
                    s_hat,
                    p_in,
                    p_out,
                } => {
                    let m = scene.material(*material);
                    let (gs, gp) = fresnel_coefficients(Medium::of(m, frequency_hz), *theta);
                    let rho = roughness_attenuation(m.roughness_rms, *theta, lambda);
                    e = lift(s_hat) * (gs * rho * project(&e, s_hat)) + lift(p_out) * (gp * rho * project(&e, p_in));
                }
                Step::Diffraction {
                    edge,
                    angles,
                    s_incident,
                    s_diffracted,
                    beta_in,
                    phi_in,
                    beta_out,
                    phi_out,
                } => {
                    let Ok((ds, dh)) =
                        utd_diffraction(scene.edge(*edge), *s_incident, *s_diffracted, *angles, frequency_hz)
                    else {
                        return Complex64::new(0.0, 0.0);
                    };
                    e = lift(beta_out) * (ds * project(&e, beta_in)) + lift(phi_out) * (dh * project(&e, phi_in));
                }
            }
        }
        let k = 2.0 * PI / lambda;
        let received = project(&e, &self.rx_weight);
        received * (lambda / (4.0 * PI) * self.spreading) * Complex64::from_polar(1.0, -k * self.length)
    }
}

/// Complex amplitude of `path` at `frequency_hz`: antenna gains and
/// polarizations, free-space or UTD spreading, Fresnel and roughness factors
/// per reflection, diffraction coefficients and propagation phase.
pub fn evaluate_path(
    scene: &Scene,
    path: &PropagationPath,
    frequency_hz: f64,
    tx_antenna: &AntennaModel,
    rx_antenna: &AntennaModel,
) -> Complex64 {
    prepare(scene, path, tx_antenna, rx_antenna).amplitude(scene, frequency_hz)
}

/// Evaluates `path` at every frequency and stores the results in
/// `path.amplitude`.
pub fn evaluate_band(
    scene: &Scene,
    path: &mut PropagationPath,
    frequencies: &[f64],
    tx_antenna: &AntennaModel,
    rx_antenna: &AntennaModel,
) {
    let p = prepare(scene, path, tx_antenna, rx_antenna);
    path.amplitude = frequencies.iter().map(|&f| (f, p.amplitude(scene, f))).collect();
}

/// Replays `path` against the scene: every leg clear, every reflection
/// point on its facet with mirror-symmetric legs, the diffraction point on
/// its edge satisfying the Keller cone condition. Tolerance 1e-6 m / rad.
pub fn validate_path(scene: &Scene, path: &PropagationPath) -> Result<(), String> {
    const TOL: f64 = 1e-6;
    let pts = path.points();
    for (k, w) in pts.windows(2).enumerate() {
        if !scene.segment_clear(&w[0], &w[1]) {
            return Err(format!("leg {k} is blocked"));
        }
    }
    let mut diffractions = 0;
    for (k, it) in path.interactions.iter().enumerate() {
        let p = it.point;
        let d_in = unit(p - pts[k]);
        let d_out = unit(pts[k + 2] - p);
        match it.kind {
            InteractionKind::Reflection(f) => {
                let facet = scene.facet(f);
                if facet.plane().signed_distance(&p).abs() > TOL || !facet.contains(&p, TOL) {
                    return Err(format!("reflection {k} is off facet {}", f.0));
                }
                let n = facet.unit_normal;
                let mirrored = d_in - n * (2.0 * d_in.dot(&n));
                let err = mirrored.cross(&d_out).norm().asin();
                if mirrored.dot(&d_out) <= 0.0 || err > TOL {
                    return Err(format!("reflection {k} is not specular ({err:e} rad)"));
                }
                let before = facet.plane().signed_distance(&pts[k]);
                let after = facet.plane().signed_distance(&pts[k + 2]);
                if before * after <= 0.0 {
                    return Err(format!("reflection {k} passes through its facet"));
                }
            }
            InteractionKind::Diffraction(e) => {
                diffractions += 1;
                let edge = scene.edge(e);
                let t = (p - edge.start).dot(&edge.direction);
                if t < -TOL || t > edge.length + TOL || (p - edge.point_at(t)).norm() > TOL {
                    return Err(format!("diffraction {k} is off edge {}", e.0));
                }
                let a_in = d_in.dot(&edge.direction).clamp(-1.0, 1.0).acos();
                let a_out = d_out.dot(&edge.direction).clamp(-1.0, 1.0).acos();
                if (a_in - a_out).abs() > TOL {
                    return Err(format!("diffraction {k} violates the Keller cone by {:e} rad", (a_in - a_out).abs()));
                }
            }
        }
    }
    if diffractions > 1 {
        return Err("more than one diffraction".into());
    }
    Ok(())
}
