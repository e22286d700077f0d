use std::fs;
use std::path::Path;

use serde::Deserialize;
use steer_audit::response_parsing::{parse_answer, split_thinking, OutcomeValue};
use steer_audit::task_battery::ParseSchema;

#[derive(Deserialize)]
struct Fixture {
    id: String,
    schema: ParseSchema,
    response: String,
    expected: Option<OutcomeValue>,
}

const SCHEMAS: [&str; 7] =
    ["binary_choice", "option_echo", "accept_reject", "likert", "price", "give_amount", "assistance"];

fn load(name: &str) -> Vec<Fixture> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/parsing").join(format!("{name}.jsonl"));
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    text.lines().map(|l| serde_json::from_str(l).expect("fixture row")).collect()
}

#[test]
fn corpus_accuracy_at_least_99_percent() {
    let mut worst = 1.0f64;
    for name in SCHEMAS {
        let rows = load(name);
        assert_eq!(rows.len(), 200, "{name}");
        let mut misses = Vec::new();
        for f in &rows {
            assert_eq!(f.schema.kind(), name, "{}", f.id);
            let raw = split_thinking(&f.response);
            let got = parse_answer(&f.schema, &raw.answer_text);
            if got.value != f.expected {
                misses.push(format!("{}: got {:?}, want {:?}", f.id, got.value, f.expected));
            }
        }
        let acc = 1.0 - misses.len() as f64 / rows.len() as f64;
        println!("{name}: {:.1}% ({} misses)", acc * 100.0, misses.len());
        for m in &misses {
            println!("  {m}");
        }
        worst = worst.min(acc);
    }
    assert!(worst >= 0.99, "worst schema accuracy {worst}");
}
