//! JSON instance files. Field names are documented in `docs/instance-format.md`.

use serde::{Deserialize, Serialize};

use super::{Instance, InstanceError, Provenance, ScenarioSet, Vehicle};
use crate::dubins::Pose;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format_version: u32,
    name: String,
    targets: Vec<VertexRecord>,
    depots: Vec<VertexRecord>,
    vehicles: Vec<Vehicle>,
    required: Vec<Vec<usize>>,
    scenarios: ScenarioRecord,
    tau_bar: Vec<Vec<f64>>,
    #[serde(default)]
    provenance: Option<Provenance>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexRecord {
    id: usize,
    x: f64,
    y: f64,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioRecord {
    probabilities: Vec<f64>,
    /// `[target][vehicle][scenario]`
    service_times: Vec<Vec<Vec<f64>>>,
}

fn to_records(poses: &[Pose]) -> Vec<VertexRecord> {
    poses
        .iter()
        .enumerate()
        .map(|(id, p)| VertexRecord { id, x: p.x, y: p.y, theta: p.theta })
        .collect()
}

fn from_records(field: &str, records: Vec<VertexRecord>) -> Result<Vec<Pose>, InstanceError> {
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            if r.id != i {
                return Err(InstanceError::Schema {
                    path: format!("{field}[{i}].id"),
                    message: format!("expected id {i}, found {}", r.id),
                });
            }
            // Poses are stored normalized; keep the value bit-exact instead of re-normalizing.
            Ok(Pose { x: r.x, y: r.y, theta: r.theta })
        })
        .collect()
}

pub fn save_instance(instance: &Instance) -> String {
    let file = InstanceFile {
        format_version: FORMAT_VERSION,
        name: instance.name.clone(),
        targets: to_records(&instance.targets),
        depots: to_records(&instance.depots),
        vehicles: instance.vehicles.clone(),
        required: instance.required.clone(),
        scenarios: ScenarioRecord {
            probabilities: instance.scenarios.prob.clone(),
            service_times: instance.scenarios.tau.clone(),
        },
        tau_bar: instance.tau_bar.clone(),
        provenance: instance.provenance.clone(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("instance serializes");
    out.push('\n');
    out
}

pub fn load_instance(text: &str) -> Result<Instance, InstanceError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| InstanceError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    if file.format_version != FORMAT_VERSION {
        return Err(InstanceError::Schema {
            path: "format_version".into(),
            message: format!("unsupported version {}", file.format_version),
        });
    }
    let instance = Instance {
        name: file.name,
        targets: from_records("targets", file.targets)?,
        depots: from_records("depots", file.depots)?,
        vehicles: file.vehicles,
        required: file.required,
        scenarios: ScenarioSet::new(file.scenarios.service_times, file.scenarios.probabilities),
        tau_bar: file.tau_bar,
        provenance: file.provenance,
    };
    instance.validate()?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, GenerationConfig};

    const HAND_WRITTEN: &str = r#"{
  "format_version": 1,
  "name": "hand",
  "targets": [
    {"id": 0, "x": 10.0, "y": 0.0, "theta": 0.0},
    {"id": 1, "x": 20.0, "y": 5.0, "theta": 1.5}
  ],
  "depots": [{"id": 0, "x": 0.0, "y": 0.0, "theta": 0.0}],
  "vehicles": [{"id": 0, "depot": 0, "turn_radius": 1.0, "gamma": 1000.0}],
  "required": [[]],
  "scenarios": {
    "probabilities": [0.25, 0.75],
    "service_times": [[[4.0, 6.0]], [[1.0, 2.0]]]
  },
  "tau_bar": [[5.0], [1.5]]
}"#;

    #[test]
    fn hand_written_file_loads() {
        let inst = load_instance(HAND_WRITTEN).unwrap();
        assert_eq!(inst.num_targets(), 2);
        assert_eq!(inst.num_scenarios(), 2);
        assert!(inst.provenance.is_none());
    }

    #[test]
    fn round_trip_generated_instance() {
        let coords: Vec<(f64, f64)> = (0..9).map(|i| (i as f64 * 7.3 + 0.1, (i * i) as f64 * 1.9 + 2.0)).collect();
        let inst = generate_instance("rt", &coords, 3, 2, 7, 11, GenerationConfig::default()).unwrap();
        let text = save_instance(&inst);
        let back = load_instance(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(save_instance(&back), text);
    }

    #[test]
    fn probabilities_summing_to_point_nine_rejected() {
        let text = HAND_WRITTEN.replace("[0.25, 0.75]", "[0.25, 0.65]");
        let err = load_instance(&text).unwrap_err();
        assert!(matches!(err, InstanceError::Invalid(ref m) if m.contains("scenarios.probabilities")), "{err}");
    }

    #[test]
    fn schema_error_names_field_path() {
        let text = HAND_WRITTEN.replace(r#""turn_radius": 1.0"#, r#""turn_radius": "wide""#);
        match load_instance(&text).unwrap_err() {
            InstanceError::Schema { path, .. } => assert_eq!(path, "vehicles[0].turn_radius"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn overlapping_required_sets_rejected_at_load() {
        let text = HAND_WRITTEN
            .replace(r#""depots": [{"id": 0, "x": 0.0, "y": 0.0, "theta": 0.0}]"#,
                r#""depots": [{"id": 0, "x": 0.0, "y": 0.0, "theta": 0.0}, {"id": 1, "x": 1.0, "y": 0.0, "theta": 0.0}]"#)
            .replace(r#""vehicles": [{"id": 0, "depot": 0, "turn_radius": 1.0, "gamma": 1000.0}]"#,
                r#""vehicles": [{"id": 0, "depot": 0, "turn_radius": 1.0, "gamma": 1000.0}, {"id": 1, "depot": 1, "turn_radius": 2.0, "gamma": 1000.0}]"#)
            .replace(r#""required": [[]]"#, r#""required": [[1], [1]]"#)
            .replace("[[[4.0, 6.0]], [[1.0, 2.0]]]", "[[[4.0, 6.0], [4.0, 6.0]], [[1.0, 2.0], [1.0, 2.0]]]")
            .replace("[[5.0], [1.5]]", "[[5.0, 5.0], [1.5, 1.5]]");
        let err = load_instance(&text).unwrap_err().to_string();
        assert!(err.contains("also required"), "{err}");
    }
}
