//! Weights of the multilinear partition of unity at a few points, and how they refine.

use lipfree::{lambda_weights, Dyadic, GridSpec, Point};

fn main() -> lipfree::Result<()> {
    let fine = GridSpec::dyadic(2, 1);
    let coarse = GridSpec::dyadic(2, 0);
    let x = Point::parse(&["1/8", "3/8"])?;

    let w = lambda_weights(&x, &fine)?;
    println!("weights of {x} on mesh 1/2:");
    for (v, a) in w.iter() {
        println!("  {v}: {a}");
    }
    println!("  total {}", w.total());

    // Pushing the fine weights through the coarse ones gives the coarse weights directly.
    let mut composed: Vec<(Point, Dyadic)> = Vec::new();
    for (u, a) in w.iter() {
        for (v, b) in lambda_weights(u, &coarse)?.iter() {
            match composed.iter_mut().find(|(p, _)| p == v) {
                Some(e) => e.1 = &e.1 + &(a * b),
                None => composed.push((v.clone(), a * b)),
            }
        }
    }
    composed.sort();
    let direct = lambda_weights(&x, &coarse)?;
    println!("refined weights agree with mesh-1 weights: {}", composed == direct.entries());
    Ok(())
}
