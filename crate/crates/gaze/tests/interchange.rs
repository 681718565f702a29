use gaze::interchange::{parse_annotation_document, to_json};
use gaze_core::model::{DocMetadata, DocumentParts};
use gaze_core::toy::toy_annotate;
use proptest::prelude::*;

const ALICE_BOB: &str = include_str!("fixtures/alice_bob.json");
const ALICE_BOB_TEXT: &str = include_str!("fixtures/alice_bob.txt");

fn without_metadata(mut p: DocumentParts) -> DocumentParts {
    p.metadata = DocMetadata::default();
    p
}

#[test]
fn gold_fixture_parses() {
    let doc = parse_annotation_document(ALICE_BOB.as_bytes()).unwrap();
    assert_eq!(doc.doc_id(), "alice_bob");
    assert_eq!(doc.len(), 24);
    assert_eq!(doc.srl_frames().len(), 5);
    assert_eq!(doc.metadata().title, "Alice and Bob");
}

#[test]
fn toy_annotator_reproduces_the_gold_fixture() {
    let gold = parse_annotation_document(ALICE_BOB.as_bytes()).unwrap();
    let toy = toy_annotate("alice_bob", ALICE_BOB_TEXT.trim()).unwrap();
    assert_eq!(without_metadata(toy.to_parts()), without_metadata(gold.to_parts()));
}

#[test]
fn serialized_form_round_trips() {
    let gold = parse_annotation_document(ALICE_BOB.as_bytes()).unwrap();
    let again = parse_annotation_document(to_json(&gold).as_bytes()).unwrap();
    assert_eq!(again, gold);
    assert_eq!(to_json(&again), to_json(&gold));
}

fn edited(f: impl FnOnce(&mut serde_json::Value)) -> Vec<u8> {
    let mut v: serde_json::Value = serde_json::from_str(ALICE_BOB).unwrap();
    f(&mut v);
    serde_json::to_vec(&v).unwrap()
}

#[test]
fn schema_violations_are_rejected() {
    let cases: Vec<(&str, Vec<u8>)> = vec![
        ("unknown field", edited(|v| v["extra"] = 1.into())),
        ("missing tokens", edited(|v| {
            v.as_object_mut().unwrap().remove("tokens");
        })),
        ("span past the end", edited(|v| v["entities"][0]["span"] = serde_json::json!([20, 30]))),
        ("reversed span", edited(|v| v["sentences"][0] = serde_json::json!([7, 0]))),
        ("unknown role", edited(|v| v["srl_frames"][0]["args"][0]["role"] = "AGENT".into())),
        ("bad author gender", edited(|v| v["metadata"]["author_gender"] = "X".into())),
        ("bad narrator", edited(|v| v["metadata"]["narrator"] = "2p".into())),
        ("span as object", edited(|v| v["entities"][0]["span"] = serde_json::json!({"start": 0}))),
    ];
    for (what, bytes) in cases {
        assert!(parse_annotation_document(&bytes).is_err(), "{what} accepted");
    }
    assert!(parse_annotation_document(b"not json").is_err());
}

#[test]
fn propbank_modifiers_map_to_other() {
    for role in ["ARG2", "ARGM-TMP", "R-ARG0", "C-ARG1"] {
        let bytes = edited(|v| v["srl_frames"][0]["args"][2]["role"] = role.into());
        let doc = parse_annotation_document(&bytes).unwrap();
        assert_eq!(doc.srl_frames()[0].args[2].role.label(), "OTHER", "{role}");
    }
}

const NAMES: &[&str] = &["Alice", "Bob", "Mary", "Tom", "Mrs. Hale", "Mr. Thornton", "She", "He"];

proptest! {
    #[test]
    fn toy_documents_round_trip(
        clauses in prop::collection::vec((0..NAMES.len(), 0..NAMES.len(), any::<bool>()), 1..12)
    ) {
        let text: Vec<String> = clauses
            .iter()
            .map(|&(s, o, said)| {
                let obj = NAMES[o].replace("She", "her").replace("He", "him");
                if said {
                    format!("{} said, \"Hello!\"", NAMES[s])
                } else {
                    format!("{} saw {obj}.", NAMES[s])
                }
            })
            .collect();
        let doc = toy_annotate("story", &text.join(" ")).unwrap();
        let json = to_json(&doc);
        let back = parse_annotation_document(json.as_bytes()).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(to_json(&back), json);
    }
}
