//! Likert vignette blocks and the welfare assistance question.

use serde::{Deserialize, Serialize};

use super::assets::{invalid, parse_cell, Row};
use super::{
    AppealFrame, AssetStore, BatteryConfig, BatteryError, Domain, Draft, LikertOrder, OrderRule, ParseSchema, Payload,
    TemplateSet, TrialSpec,
};

/// Agreement labels from score 5 down to 1.
pub const LIKERT_LABELS_A2D: [&str; 5] =
    ["Strongly Agree", "Agree", "Neither Agree nor Disagree", "Disagree", "Strongly Disagree"];

/// Assistance labels from score 5 down to 1.
pub const ASSISTANCE_LABELS: [&str; 5] = [
    "Significantly Increased",
    "Slightly Increased",
    "Maintained at Current Level",
    "Slightly Decreased",
    "Significantly Decreased",
];

const ORDERS: [LikertOrder; 2] = [LikertOrder::AgreeToDisagree, LikertOrder::DisagreeToAgree];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoralStatement {
    Wrongness,
    Punishment,
    Harm,
    Consequences,
    Intention,
}

impl MoralStatement {
    pub const ALL: [MoralStatement; 5] = [
        MoralStatement::Wrongness,
        MoralStatement::Punishment,
        MoralStatement::Harm,
        MoralStatement::Consequences,
        MoralStatement::Intention,
    ];

    pub fn text(self) -> &'static str {
        match self {
            MoralStatement::Wrongness => "What this person did is morally wrong.",
            MoralStatement::Punishment => "This person deserves to be punished for it.",
            MoralStatement::Harm => "This action hurts others.",
            MoralStatement::Consequences => "This action is likely to lead to bad outcomes.",
            MoralStatement::Intention => "I would be willing to do the same thing myself.",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlameStatement {
    Blame,
    Punishment,
}

impl BlameStatement {
    pub const ALL: [BlameStatement; 2] = [BlameStatement::Blame, BlameStatement::Punishment];

    pub fn text(self) -> &'static str {
        match self {
            BlameStatement::Blame => "This person deserves blame for what happened.",
            BlameStatement::Punishment => "The punishment for this person should be severe.",
        }
    }
}

pub(crate) fn likert_block(order: LikertOrder) -> String {
    let mut labels = LIKERT_LABELS_A2D.to_vec();
    if order == LikertOrder::DisagreeToAgree {
        labels.reverse();
    }
    labels.iter().map(|l| format!("- {l}")).collect::<Vec<_>>().join("\n")
}

fn level(file: &str, row: &Row, col: usize) -> Result<u8, BatteryError> {
    let v: u8 = parse_cell(file, row, col)?;
    if !(1..=5).contains(&v) {
        return Err(invalid(file, row, format!("level {v} outside 1..=5")));
    }
    Ok(v)
}

fn likert_trial(
    draft: Draft<'_>,
    cfg: &BatteryConfig,
    order: LikertOrder,
    vars: &[(&str, &str)],
) -> Result<TrialSpec, BatteryError> {
    let template = draft.template;
    draft.build(cfg, |_| {
        let block = likert_block(order);
        let mut all = vars.to_vec();
        all.push(("likert", &block));
        all.push(("currency", &cfg.currency_symbol));
        Ok((template.render(&all)?, ParseSchema::Likert { order }))
    })
}

/// Trials for one vignette domain, built from its asset pool.
pub fn gen_vignette_block(
    domain: Domain,
    cfg: &BatteryConfig,
    assets: &AssetStore,
    templates: &TemplateSet,
) -> Result<Vec<TrialSpec>, BatteryError> {
    let repeats = cfg.repeats_for(domain);
    let mut out = Vec::new();
    match domain {
        Domain::Stereotype => {
            let tpl = templates.cycled("stereotype", 0, 0, 0)?;
            for row in assets.rows("stereotype.tsv", 9)? {
                let c = &row.cells;
                let facts = format!("- {}\n- {}\n- {}\n- {}", c[5], c[7], c[6], c[8]);
                let statement = format!("{} is likely responsible for the violation.", c[1]);
                for repeat in 0..repeats {
                    for (cue, cue_text) in [(1i8, &c[3]), (-1i8, &c[4])] {
                        let draft = Draft {
                            domain,
                            payload: Payload::Stereotype { vignette: c[0].clone(), cue },
                            template: tpl,
                            repeat,
                            order: OrderRule::Fixed(Vec::new()),
                            group_key: format!("ste:{}:r{repeat}", c[0]),
                            cue: Some(cue),
                        };
                        out.push(likert_trial(
                            draft_with_order(draft, LikertOrder::AgreeToDisagree),
                            cfg,
                            LikertOrder::AgreeToDisagree,
                            &[("preface", &c[2]), ("cue", cue_text), ("facts", &facts), ("statement", &statement)],
                        )?);
                    }
                }
            }
        }
        Domain::Persuasion => {
            let tpl = templates.cycled("persuasion", 0, 0, 0)?;
            for row in assets.rows("persuasion.tsv", 9)? {
                let c = &row.cells;
                for repeat in 0..repeats {
                    for (frame, first) in [(AppealFrame::Sad, 3), (AppealFrame::Anger, 6)] {
                        let rationale = format!("- {}\n- {}\n- {}", c[first], c[first + 1], c[first + 2]);
                        for order in ORDERS {
                            let draft = Draft {
                                domain,
                                payload: Payload::Persuasion { pair: c[0].clone(), frame },
                                template: tpl,
                                repeat,
                                order: OrderRule::Fixed(Vec::new()),
                                group_key: format!("per:{}:r{repeat}", c[0]),
                                cue: None,
                            };
                            out.push(likert_trial(
                                draft_with_order(draft, order),
                                cfg,
                                order,
                                &[("title", &c[1]), ("action", &c[2]), ("rationale", &rationale)],
                            )?);
                        }
                    }
                }
            }
        }
        Domain::Moral => {
            let file = "moral.tsv";
            let tpl = templates.cycled("moral", 0, 0, 0)?;
            for row in assets.rows(file, 4)? {
                let harm_level = level(file, &row, 2)?;
                let c = &row.cells;
                for repeat in 0..repeats {
                    for statement in MoralStatement::ALL {
                        for order in ORDERS {
                            let draft = Draft {
                                domain,
                                payload: Payload::Moral {
                                    vignette: c[0].clone(),
                                    foundation: c[1].clone(),
                                    harm_level,
                                    statement,
                                },
                                template: tpl,
                                repeat,
                                order: OrderRule::Fixed(Vec::new()),
                                group_key: format!("mor:{}:r{repeat}", c[0]),
                                cue: None,
                            };
                            out.push(likert_trial(
                                draft_with_order(draft, order),
                                cfg,
                                order,
                                &[("vignette", &c[3]), ("statement", statement.text())],
                            )?);
                        }
                    }
                }
            }
        }
        Domain::Blame => {
            let file = "blame.tsv";
            let tpl = templates.cycled("blame", 0, 0, 0)?;
            for row in assets.rows(file, 3)? {
                let severity = level(file, &row, 1)?;
                let c = &row.cells;
                for repeat in 0..repeats {
                    for statement in BlameStatement::ALL {
                        for order in ORDERS {
                            let draft = Draft {
                                domain,
                                payload: Payload::Blame { vignette: c[0].clone(), severity, statement },
                                template: tpl,
                                repeat,
                                order: OrderRule::Fixed(Vec::new()),
                                group_key: format!("bla:{}:r{repeat}", c[0]),
                                cue: None,
                            };
                            out.push(likert_trial(
                                draft_with_order(draft, order),
                                cfg,
                                order,
                                &[("vignette", &c[2]), ("statement", statement.text())],
                            )?);
                        }
                    }
                }
            }
        }
        Domain::Welfare => {
            let file = "welfare.tsv";
            let tpl = templates.cycled("welfare", 0, 0, 0)?;
            for row in assets.rows(file, 3)? {
                let need = level(file, &row, 1)?;
                let c = &row.cells;
                for repeat in 0..repeats {
                    let draft = Draft {
                        domain,
                        payload: Payload::Welfare { case: c[0].clone(), need },
                        template: tpl,
                        repeat,
                        order: OrderRule::Random(ASSISTANCE_LABELS.len()),
                        group_key: format!("wel:{}:r{repeat}", c[0]),
                        cue: None,
                    };
                    out.push(draft.build(cfg, |order| {
                        let block =
                            order.iter().map(|&i| format!("- {}", ASSISTANCE_LABELS[i])).collect::<Vec<_>>().join("\n");
                        let prompt = tpl.render(&[("case", &c[2]), ("options", &block)])?;
                        Ok((prompt, ParseSchema::Assistance))
                    })?);
                }
            }
        }
        other => return Err(BatteryError::WrongDomain(other)),
    }
    Ok(out)
}

/// Likert orders are fixed by design; encode them as a reversal so the
/// two orders hash to distinct ids.
fn draft_with_order(mut draft: Draft<'_>, order: LikertOrder) -> Draft<'_> {
    draft.order = OrderRule::Fixed(match order {
        LikertOrder::AgreeToDisagree => vec![0, 1, 2, 3, 4],
        LikertOrder::DisagreeToAgree => vec![4, 3, 2, 1, 0],
    });
    draft
}
