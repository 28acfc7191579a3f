//! Randomized search for setups, with simplification and toolbox learning.

pub mod evaluate;
pub mod run;
pub mod sampler;
pub mod simplify;
pub mod toolbox;

pub use evaluate::{
    evaluate_cycle_candidate, evaluate_srv_candidate, verify_finding, CycleCriteria, Criteria,
    FindingRecord, Outcome, SearchTask, SrvCriteria,
};
pub use run::{search_loop, Finding, SearchOutcome, SearchParams};
pub use sampler::{random_config, random_element, SearchSpace};
pub use simplify::{simplify, BehaviorCheck, CycleCheck, HeraldedStateCheck, SimplifyOptions};
pub use toolbox::{parity_sorter_elements, LearnPolicy, Toolbox};
