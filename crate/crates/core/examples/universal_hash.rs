//! Collision statistics of the affine hash family, enumerated member by member.
//!
//!     cargo run --release --example universal_hash

use gauss_ska::protocol::hash::exhaustive_collision_check;
use gauss_ska::protocol::UniversalHash;
use gauss_ska::rng::WordStream;

fn main() {
    for (domain, range) in [(16, 4), (64, 8), (256, 16), (1000, 10)] {
        let r = exhaustive_collision_check(domain, range);
        println!(
            "{domain:>4} -> {range:>2}: {:>6} members, worst pair {:.5} (1/|S| = {:.5}), mean {:.5}",
            r.members,
            r.worst_pair_probability,
            1.0 / range as f64,
            r.mean_pair_probability
        );
    }

    let mut words = WordStream::new(1, 0);
    let h = UniversalHash::draw(1000, 10, &mut words);
    let mut counts = [0u32; 10];
    for q in 0..1000 {
        counts[h.apply(q) as usize] += 1;
    }
    println!("one drawn member, bin loads over 1000 inputs: {counts:?}");
}
