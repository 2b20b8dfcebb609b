//! Without silent actions the general membership test makes exactly the
//! decisions of the simpler silent-free test.
//!
//! cargo run --example realtime

use tnbpa::oracle::differential::traces_agree;
use tnbpa::oracle::{random_system, GenParams};
use tnbpa::refine::Procedure;
use tnbpa::{compute_bisimilarity_base, standardize, EngineConfig};

fn main() {
    let mut agree = 0;
    for seed in 0..60 {
        let params = GenParams { constants: 8, silent_prob: 0.0, seed, ..GenParams::default() };
        let std = standardize(&random_system(&params)).expect("totally normed");
        let (b1, t1) = compute_bisimilarity_base(&std, &EngineConfig::default()).unwrap();
        let (b2, t2) =
            compute_bisimilarity_base(&std, &EngineConfig::default().with_procedure(Procedure::Realtime)).unwrap();
        let candidates: usize = t1.iterations.iter().flat_map(|i| &i.constants).map(|c| c.candidates.len()).sum();
        let ok = b1 == b2 && traces_agree(&t1, &t2);
        agree += usize::from(ok);
        println!("seed {seed:>2}: {candidates:>3} candidates, {}", if ok { "same decisions" } else { "DIVERGED" });
    }
    println!("{agree}/60 systems agree");
}
