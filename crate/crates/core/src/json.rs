//! JSON wire formats: instances (exact fraction strings for sizes) and
//! packings (`{"bins": [[original ids]...]}`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Configuration, Packing};
use crate::instance::{Instance, InstanceError, ItemId, RawGroup, RawInstance, RawItem, ValidatedInstance};
use crate::rational::format_rational;

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid instance:\n{}", format_errors(.0))]
    Invalid(Vec<InstanceError>),
    #[error("packing references item id {0} absent from the instance")]
    UnknownPackedItem(i64),
}

fn format_errors(errors: &[InstanceError]) -> String {
    errors
        .iter()
        .map(|e| format!("  - {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Parses and validates an instance document.
pub fn instance_from_json(text: &str) -> Result<ValidatedInstance, JsonError> {
    let raw: RawInstance = serde_json::from_str(text)?;
    Instance::validate(&raw).map_err(JsonError::Invalid)
}

/// Renders an instance with its original (external) item ids.
pub fn instance_to_json(v: &ValidatedInstance) -> String {
    let inst = &v.instance;
    let raw = RawInstance {
        items: inst
            .item_ids()
            .map(|item| RawItem {
                id: v.original_item_ids[item.idx()],
                size: format_rational(inst.size(item)),
                group: inst.group(inst.group_of(item)).external_id,
            })
            .collect(),
        groups: inst
            .groups()
            .iter()
            .map(|g| RawGroup {
                id: g.external_id,
                k: g.cap as i64,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("instance serializes")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PackingJson {
    pub bins: Vec<Vec<i64>>,
}

/// Renders a packing using the instance's original item ids.
pub fn packing_to_json(v: &ValidatedInstance, packing: &Packing) -> String {
    let doc = PackingJson {
        bins: packing
            .bins
            .iter()
            .map(|bin| {
                bin.iter()
                    .map(|item| v.original_item_ids[item.idx()])
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("packing serializes")
}

/// Parses a packing document, translating original ids back to canonical ones.
pub fn packing_from_json(v: &ValidatedInstance, text: &str) -> Result<Packing, JsonError> {
    let doc: PackingJson = serde_json::from_str(text)?;
    let mut canonical_of = std::collections::BTreeMap::new();
    for (idx, &orig) in v.original_item_ids.iter().enumerate() {
        canonical_of.insert(orig, ItemId::from_idx(idx));
    }
    let mut bins = Vec::with_capacity(doc.bins.len());
    for bin in doc.bins {
        let mut items = Vec::with_capacity(bin.len());
        for orig in bin {
            match canonical_of.get(&orig) {
                Some(&item) => items.push(item),
                None => return Err(JsonError::UnknownPackedItem(orig)),
            }
        }
        bins.push(Configuration::new(items));
    }
    Ok(Packing { bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn parses_the_documented_format() {
        let text = r#"{
            "items": [
                {"id": 5, "size": "1/2", "group": 1},
                {"id": 6, "size": "0.25", "group": 2}
            ],
            "groups": [{"id": 1, "k": 1}, {"id": 2, "k": 2}]
        }"#;
        let v = instance_from_json(text).unwrap();
        assert_eq!(v.instance.n(), 2);
        assert_eq!(*v.instance.size(ItemId(1)), rat(1, 2));
        assert_eq!(*v.instance.size(ItemId(2)), rat(1, 4));
        assert_eq!(v.original_item_ids, vec![5, 6]);
    }

    #[test]
    fn rejects_invalid_sizes_with_context() {
        let text = r#"{"items": [{"id": 1, "size": "0", "group": 1}], "groups": [{"id": 1, "k": 1}]}"#;
        let err = instance_from_json(text).unwrap_err();
        assert!(err.to_string().contains("size out of (0,1]"));
    }

    #[test]
    fn packing_round_trip_uses_original_ids() {
        let text = r#"{
            "items": [
                {"id": 10, "size": "1/3", "group": 1},
                {"id": 20, "size": "1/2", "group": 1}
            ],
            "groups": [{"id": 1, "k": 2}]
        }"#;
        let v = instance_from_json(text).unwrap();
        // canonical order: 1/2 first (id 20)
        let packing = Packing {
            bins: vec![Configuration::new(vec![ItemId(1), ItemId(2)])],
        };
        let json = packing_to_json(&v, &packing);
        assert!(json.contains("20") && json.contains("10"));
        let back = packing_from_json(&v, &json).unwrap();
        assert_eq!(back, packing);

        let bad = r#"{"bins": [[99]]}"#;
        assert!(matches!(
            packing_from_json(&v, bad),
            Err(JsonError::UnknownPackedItem(99))
        ));
    }

    #[test]
    fn instance_round_trip() {
        let text = r#"{
            "items": [{"id": 1, "size": "3/7", "group": 4}],
            "groups": [{"id": 4, "k": 3}]
        }"#;
        let v = instance_from_json(text).unwrap();
        let rendered = instance_to_json(&v);
        let v2 = instance_from_json(&rendered).unwrap();
        assert_eq!(v2.instance.n(), 1);
        assert_eq!(*v2.instance.size(ItemId(1)), rat(3, 7));
        assert_eq!(v2.instance.groups()[0].cap, 3);
    }
}
