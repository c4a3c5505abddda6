//! Browser bindings: generate a flat synthetic scene, then
//! - recompute its boundary pseudo-labels for any radius,
//! - sweep the radius from 2 to 10 cm,
//! - corrupt the labels and score the result.

use segerr::{
    compute_boundary_mask, corrupt_labels, evaluate_scene, generate_scene, validate_scene,
    ClassGroups, CorruptionMode, EvalConfig, Generator, LabelField, PointCloud, SceneSpec,
    SWEEP_RADII,
};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js_err(e: segerr::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct DemoScene {
    cloud: PointCloud,
    gt: LabelField,
    pred: Option<LabelField>,
}

fn spec_for(kind: &str, seed: u64) -> Result<SceneSpec, segerr::Error> {
    Ok(match kind {
        "two-planes" => SceneSpec::two_planes(),
        "checkerboard" => SceneSpec::checkerboard(),
        "blobs" => SceneSpec {
            generator: Generator::RandomBlobs {
                extent: [1.0, 1.0, 0.02],
                count: 4000,
                blobs: 10,
                classes: 4,
            },
            seed,
            jitter: 0.0,
        },
        other => {
            return Err(segerr::Error::InvalidParameter(format!(
                "unknown scene {other:?}"
            )))
        }
    })
}

#[wasm_bindgen]
impl DemoScene {
    /// `kind` is "two-planes", "checkerboard" or "blobs".
    #[wasm_bindgen(constructor)]
    pub fn new(kind: &str, seed: u32) -> Result<DemoScene, JsError> {
        let spec = spec_for(kind, u64::from(seed)).map_err(js_err)?;
        let (cloud, gt) = generate_scene(&spec).map_err(js_err)?;
        Ok(DemoScene {
            cloud,
            gt,
            pred: None,
        })
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    /// Interleaved x, y coordinates.
    pub fn xy(&self) -> Vec<f32> {
        self.cloud.positions().iter().flat_map(|p| [p[0], p[1]]).collect()
    }

    pub fn labels(&self) -> Vec<i32> {
        self.gt.labels().to_vec()
    }

    /// Labels of the last corrupted prediction (empty before the first call
    /// to `corrupt_and_score`).
    pub fn pred_labels(&self) -> Vec<i32> {
        self.pred.as_ref().map_or_else(Vec::new, |p| p.labels().to_vec())
    }

    /// Boundary flags (0/1) of the ground truth, or of the prediction when
    /// `of_prediction` is set and one exists.
    pub fn boundary(&self, radius: f64, of_prediction: bool) -> Result<Vec<u8>, JsError> {
        let labels = match (&self.pred, of_prediction) {
            (Some(p), true) => p,
            _ => &self.gt,
        };
        let mask = compute_boundary_mask(&self.cloud, labels, radius).map_err(js_err)?;
        Ok(mask.flags().iter().map(|&f| u8::from(f)).collect())
    }

    /// Boundary counts at 2, 4, 6, 8 and 10 cm.
    pub fn radius_sweep(&self) -> Result<Vec<u32>, JsError> {
        SWEEP_RADII
            .iter()
            .map(|&r| {
                compute_boundary_mask(&self.cloud, &self.gt, r)
                    .map(|m| m.count() as u32)
                    .map_err(js_err)
            })
            .collect()
    }

    /// Corrupts the ground truth and evaluates the result at `radius`;
    /// returns the metrics as JSON (absent values are `null`).
    pub fn corrupt_and_score(
        &mut self,
        mode: &str,
        magnitude: f64,
        seed: u32,
        radius: f64,
    ) -> Result<String, JsError> {
        let mode: CorruptionMode = mode.parse().map_err(js_err)?;
        let pred = corrupt_labels(&self.gt, &self.cloud, mode, magnitude, u64::from(seed))
            .map_err(js_err)?;
        let num_classes = self.gt.max_class_bound().max(pred.max_class_bound()).max(1);
        let mut cfg = EvalConfig::new(num_classes);
        cfg.radius_m = radius;
        let scene = validate_scene(&self.cloud, &self.gt, &pred, &cfg).map_err(js_err)?;
        let report = evaluate_scene(&scene, &ClassGroups::default()).map_err(js_err)?;
        let m = &report.metrics;
        let changed = pred
            .labels()
            .iter()
            .zip(self.gt.labels())
            .filter(|(a, b)| a != b)
            .count();
        self.pred = Some(pred);
        Ok(json!({
            "changed": changed,
            "miou": m.miou,
            "macc": m.macc,
            "oacc": m.oacc,
            "ferr": m.ferr,
            "merr": m.merr,
            "rerr": m.rerr,
            "derr": m.derr,
        })
        .to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_is_monotone() {
        let s = DemoScene::new("checkerboard", 0).unwrap();
        let counts = s.radius_sweep().unwrap();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn corrupt_and_score_reports_metrics() {
        let mut s = DemoScene::new("two-planes", 0).unwrap();
        let out = s.corrupt_and_score("dilate", 0.045, 1, 0.06).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["changed"].as_u64().unwrap() > 0);
        assert!(v["derr"].as_f64().unwrap() > 0.0);
        assert_eq!(s.pred_labels().len(), s.len());
        assert_eq!(s.boundary(0.06, true).unwrap().len(), s.len());
    }
}
