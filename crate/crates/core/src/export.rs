//! Point samples and tables for external consumption.

use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::brieskorn::{defect, sample_binding_with, theta, AmbientPoint, BrieskornParams};
use crate::cotangent::{TorusModel, TorusPoint};
use crate::error::Result;
use crate::openbook::{c_map, phi_embed, rescale_radius};
use crate::profile::{format_sig17, Bump, TwistProfile};
use crate::sampling::{cotangent_point, label, rng_for, stratified_radius};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SampleRecord {
    Binding {
        point: AmbientPoint,
        defect: [f64; 2],
    },
    Page {
        t: f64,
        q: Vec<f64>,
        p: Vec<f64>,
        point: AmbientPoint,
        defect: [f64; 2],
        theta: [f64; 2],
    },
    Torus {
        torus: TorusPoint,
        point: AmbientPoint,
        defect: [f64; 2],
        theta: [f64; 2],
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleCounts {
    pub binding: usize,
    pub page: usize,
    pub torus: usize,
}

fn annotate(params: &BrieskornParams, z: &AmbientPoint) -> ([f64; 2], [f64; 2]) {
    let (a, b) = defect(params, z);
    let th = theta(z).map_or([f64::NAN; 2], |c| [c.re, c.im]);
    ([a, b], th)
}

/// Binding points, page points `Φ_k(t, q, p)` and torus points `C_k(t, q, p)`,
/// in that order.
pub fn sample_records<B: Bump>(
    params: &BrieskornParams,
    profile: &TwistProfile<B>,
    counts: SampleCounts,
    seed: u64,
) -> Result<Vec<SampleRecord>> {
    let stream = |kind: &str, i: usize| {
        rng_for(
            seed,
            &[label(kind), params.n as u64, u64::from(params.k), i as u64],
        )
    };
    let mut out = Vec::with_capacity(counts.binding + counts.page + counts.torus);
    for i in 0..counts.binding {
        let point = sample_binding_with(params, &mut stream("binding", i));
        let (d0, d1) = defect(params, &point);
        out.push(SampleRecord::Binding {
            point,
            defect: [d0, d1],
        });
    }
    for i in 0..counts.page {
        let mut rng = stream("page", i);
        let t: f64 = rng.random();
        let r = 0.999 * rng.random::<f64>();
        let base = cotangent_point(&mut rng, params.n, r);
        let point = phi_embed(params, t, &base)?;
        let (defect, theta) = annotate(params, &point);
        out.push(SampleRecord::Page {
            t,
            q: base.q,
            p: base.p,
            point,
            defect,
            theta,
        });
    }
    for i in 0..counts.torus {
        let mut rng = stream("torus", i);
        let t: f64 = rng.random();
        let r = stratified_radius(&mut rng, profile, i);
        let torus = TorusPoint::new(t, cotangent_point(&mut rng, params.n, r), TorusModel::Twist);
        let point = c_map(params, profile, &torus)?;
        let (defect, theta) = annotate(params, &point);
        out.push(SampleRecord::Torus {
            torus,
            point,
            defect,
            theta,
        });
    }
    Ok(out)
}

/// CSV `r,g` of the rescaling radius `g(r)` on a uniform grid of `[0, 0.999]`.
pub fn write_rescale_table<B: Bump, W: Write>(
    profile: &TwistProfile<B>,
    points: usize,
    mut out: W,
) -> Result<()> {
    writeln!(out, "r,g")?;
    let m = points.max(2) - 1;
    for i in 0..=m {
        let r = 0.999 * i as f64 / m as f64;
        let g = rescale_radius(profile, r)?;
        writeln!(out, "{},{}", format_sig17(r), format_sig17(g))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_are_on_w_and_reproducible() {
        let params = BrieskornParams::new(3, 2).unwrap();
        let profile = TwistProfile::new(2).unwrap();
        let counts = SampleCounts {
            binding: 10,
            page: 10,
            torus: 10,
        };
        let a = sample_records(&params, &profile, counts, 4).unwrap();
        assert_eq!(a, sample_records(&params, &profile, counts, 4).unwrap());
        assert_eq!(a.len(), 30);
        for rec in &a {
            match rec {
                SampleRecord::Binding { defect, .. } => {
                    assert!(defect[0] <= 1e-12 && defect[1] <= 1e-12)
                }
                SampleRecord::Page {
                    t, theta, defect, ..
                } => {
                    assert!(defect[0] <= 1e-9 && defect[1] <= 1e-9);
                    assert!(((theta[0].powi(2) + theta[1].powi(2)).sqrt() - 1.0).abs() <= 1e-10);
                    let angle = std::f64::consts::TAU * t;
                    assert!((theta[0] - angle.cos()).abs() <= 1e-10);
                }
                SampleRecord::Torus { defect, .. } => {
                    assert!(defect[0] <= 1e-9 && defect[1] <= 1e-9)
                }
            }
        }
        let line = serde_json::to_string(&a[0]).unwrap();
        assert!(line.starts_with("{\"kind\":\"binding\""));
    }

    #[test]
    fn rescale_table_starts_at_zero() {
        let profile = TwistProfile::new(1).unwrap();
        let mut buf = Vec::new();
        write_rescale_table(&profile, 5, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "r,g");
        assert_eq!(lines[1], "0,0");
        assert_eq!(lines.len(), 6);
        assert!(lines[5].starts_with("0.999,"));
    }
}
