// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod agent_gateway;
pub mod choice_models;
pub mod harness;
pub mod record;
pub mod response_parsing;
pub mod scoring;
pub mod stats;
pub mod task_battery;
