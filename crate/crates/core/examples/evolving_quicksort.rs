//! Sort one list while it keeps changing, then compare the result with the
//! list as it stands when the sort ends.

use evomatch::evolution::{EvolutionMode, EvolvingInstance};
use evomatch::model::{random_profile, AgentId};
use evomatch::rng::{stream, Stream};
use evomatch::sorting::{evolving_quicksort, sequential_sort};

fn main() -> evomatch::Result<()> {
    let n = 256;
    let seed = 1;
    let profile = random_profile(n, &mut stream(seed, Stream::Profile))?;
    let mut inst = EvolvingInstance::new(profile, 1, EvolutionMode::TwoSided, stream(seed, Stream::Nature));
    let mut alg = stream(seed, Stream::Algorithm);

    let owner = AgentId::a(0);
    let out = evolving_quicksort(&mut inst, owner, &mut alg)?;
    let live = inst.snapshot();
    println!(
        "one list: {} comparisons, kendall tau {} to the live list, worst element disagreement {}",
        out.comparisons,
        out.approx.kendall_tau(live.list(owner))?,
        out.approx.max_element_disagreement(live.list(owner))?
    );

    let owners: Vec<AgentId> = (0..n).map(AgentId::a).chain((0..n).map(AgentId::b)).collect();
    let all = sequential_sort(&mut inst, &owners, &mut alg)?;
    let live = inst.snapshot();
    let worst = all.values().map(|o| o.approx.max_element_disagreement(live.list(o.owner))).collect::<Result<Vec<_>, _>>()?;
    println!(
        "all {} lists by t={}: worst element disagreement {} (log2 n = {})",
        all.len(),
        inst.t(),
        worst.iter().max().unwrap(),
        (n as f64).log2()
    );
    Ok(())
}
