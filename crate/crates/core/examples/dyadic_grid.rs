//! Exact dyadic arithmetic, points, and the cubes of a grid that contain a point.

use lipfree::{cubes_containing, Dyadic, GridSpec, Point};

fn main() -> lipfree::Result<()> {
    let a: Dyadic = "3/8".parse()?;
    let b: Dyadic = "0.625".parse()?;
    println!("{a} + {b} = {}", &a + &b);
    println!("{a} * {b} = {}", &a * &b);
    println!("floor(-{a}) = {}", (-&a).floor());

    let grid = GridSpec::dyadic(2, 1);
    for coords in [["1/4", "3/4"], ["1/2", "1/4"], ["1", "1/2"]] {
        let x = Point::parse(&coords)?;
        let cubes = cubes_containing(&x, &grid)?;
        let idx: Vec<String> = cubes.iter().map(|c| format!("{:?}", c.index)).collect();
        println!("{x} lies in {} cube(s) of mesh {}: {}", cubes.len(), grid.mesh(), idx.join(" "));
    }
    Ok(())
}
