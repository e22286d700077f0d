use steer_audit::response_parsing::{parse_answer, split_thinking};
use steer_audit::task_battery::{LikertOrder, ParseSchema};

fn main() {
    let choice = ParseSchema::BinaryChoice {
        labels: vec!["A".into(), "B".into()],
        options: vec!["$50 for sure.".into(), "Lottery: 60% chance of $90.".into()],
        allow_indifferent: true,
    };
    let cases = [
        (&choice, "<think>EV of B is 54.</think>Answer: B"),
        (&choice, "I am indifferent between them."),
        (&choice, "Option A or option B, hard to say."),
        (&ParseSchema::AcceptReject, "I would accept this gamble."),
        (&ParseSchema::Price, "Price: $7.89"),
        (&ParseSchema::GiveAmount { allowed: vec![0, 2, 4, 6, 8, 10] }, "I give $4."),
        (&ParseSchema::Likert { order: LikertOrder::AgreeToDisagree }, "Somewhat agree"),
    ];
    for (schema, text) in cases {
        let raw = split_thinking(text);
        let out = parse_answer(schema, &raw.answer_text);
        println!("{text:?}\n    -> {:?} {:?} {:?}", out.value, out.confidence, out.failure);
    }
}
