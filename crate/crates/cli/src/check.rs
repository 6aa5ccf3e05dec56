//! The embedded property suite behind `formalism-lab check`.

use formalism_core::checks::{kraus_deviation, postulate_one_deviation, product_basis_deviation, same_level_deviation};
use formalism_core::scenarios::{default_alpha_grid, inequivalence_report};
use formalism_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numfmt::deviation;
use crate::Output;

/// Bound on every deviation in the suite.
pub const CHECK_TOL: f64 = 1e-10;

struct Property {
    name: &'static str,
    instances: usize,
    /// Draws one instance and returns its deviation and whether a side
    /// condition held.
    run: fn(&mut ChaCha8Rng, usize) -> Result<(f64, bool)>,
}

fn same_level(rng: &mut ChaCha8Rng, i: usize) -> Result<(f64, bool)> {
    Ok((same_level_deviation(rng, 2 + i % 4)?, true))
}

fn postulate(rng: &mut ChaCha8Rng, i: usize) -> Result<(f64, bool)> {
    let (dev, defect) = postulate_one_deviation(rng, 2 + i % 4)?;
    Ok((dev.max(defect), true))
}

fn product_basis(rng: &mut ChaCha8Rng, i: usize) -> Result<(f64, bool)> {
    product_basis_deviation(rng, 2 + i % 2)
}

fn kraus(rng: &mut ChaCha8Rng, _: usize) -> Result<(f64, bool)> {
    let d = rng.random_range(2..=4);
    let n = rng.random_range(1..=4);
    Ok((kraus_deviation(rng, d, n)?.max(), true))
}

fn collapse_pattern(_: &mut ChaCha8Rng, i: usize) -> Result<(f64, bool)> {
    let x = default_alpha_grid()[i];
    let p = inequivalence_report(&[x])?.remove(0);
    let pattern = [x, 1.0 - x, 1.0 - x, x];
    let dev = p
        .collapse
        .flatten()
        .iter()
        .zip(pattern)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((dev, (0..2).all(|r| p.collapse.is_row_defined(r))))
}

const PROPERTIES: [Property; 5] = [
    Property {
        name: "same-level equivalence",
        instances: 200,
        run: same_level,
    },
    Property {
        name: "pointer probabilities and isometry",
        instances: 100,
        run: postulate,
    },
    Property {
        name: "product-basis agreement",
        instances: 50,
        run: product_basis,
    },
    Property {
        name: "kraus dilation equivalence",
        instances: 100,
        run: kraus,
    },
    Property {
        name: "update-rule pattern over alpha^2",
        instances: 21,
        run: collapse_pattern,
    },
];

/// Runs every property from one generator seeded with `seed`. The report
/// depends only on the seed.
pub fn cmd_check(seed: u64) -> Output {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = format!("seed {seed} (ChaCha8Rng)\n");
    let (mut passed, mut failed) = (0, 0);
    for p in &PROPERTIES {
        let mut worst: f64 = 0.0;
        let mut first_failure: Option<String> = None;
        let mut ok_count = 0;
        for i in 0..p.instances {
            match (p.run)(&mut rng, i) {
                Ok((dev, side)) if side && dev <= CHECK_TOL => {
                    ok_count += 1;
                    worst = worst.max(dev);
                }
                Ok((dev, side)) => {
                    worst = worst.max(dev);
                    first_failure.get_or_insert_with(|| {
                        if side {
                            format!("instance {i}: deviation {}", deviation(dev))
                        } else {
                            format!("instance {i}: side condition not met")
                        }
                    });
                }
                Err(e) => {
                    first_failure.get_or_insert_with(|| format!("instance {i}: {e}"));
                }
            }
        }
        let ok = ok_count == p.instances;
        if ok {
            passed += 1;
        } else {
            failed += 1;
        }
        out.push_str(&format!(
            "{} {:<36} {:>3}/{:<3} max deviation {}\n",
            if ok { "pass" } else { "FAIL" },
            p.name,
            ok_count,
            p.instances,
            deviation(worst)
        ));
        if let Some(f) = first_failure {
            out.push_str(&format!("     first failure at {f}\n"));
        }
    }
    out.push_str(&format!("{passed} passed, {failed} failed (bound {})\n", deviation(CHECK_TOL)));
    Output {
        stdout: out,
        stderr: String::new(),
        code: i32::from(failed > 0),
    }
}
