use rand::Rng;

use super::PlannerError;
use crate::worldgen::WorldStructure;

/// Uniform choice among the unvisited instances of `symbol`; returns the
/// instance index in `structure`.
pub fn ground_instance<R: Rng>(
    symbol: &str,
    structure: &WorldStructure,
    visited: &[bool],
    rng: &mut R,
) -> Result<usize, PlannerError> {
    let s = structure
        .symbol_index(symbol)
        .ok_or_else(|| PlannerError::Config(format!("unknown symbol `{symbol}`")))?;
    let open: Vec<usize> = structure.range(s).filter(|i| !visited[*i]).collect();
    match open.len() {
        0 => Err(PlannerError::SymbolExhausted(symbol.to_string())),
        1 => Ok(open[0]),
        n => Ok(open[rng.random_range(0..n)]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use crate::worldgen::Location;

    fn structure() -> WorldStructure {
        WorldStructure::new(&[
            Location {
                symbol: "cabinet".into(),
                instances: vec!["cabinet1".into(), "cabinet2".into(), "cabinet3".into()],
            },
            Location {
                symbol: "sink".into(),
                instances: vec!["sink1".into()],
            },
        ])
    }

    #[test]
    fn single_and_forced_choices() {
        let st = structure();
        let mut rng = stream_rng(0, Stream::Grounding);
        assert_eq!(
            ground_instance("sink", &st, &[false; 4], &mut rng).unwrap(),
            3
        );
        let visited = [true, false, true, false];
        for _ in 0..20 {
            assert_eq!(
                ground_instance("cabinet", &st, &visited, &mut rng).unwrap(),
                1
            );
        }
        assert_eq!(
            ground_instance("sink", &st, &[false, false, false, true], &mut rng),
            Err(PlannerError::SymbolExhausted("sink".into()))
        );
    }

    #[test]
    fn uniform_over_unvisited() {
        let st = structure();
        let mut rng = stream_rng(5, Stream::Grounding);
        let mut counts = [0usize; 3];
        let n = 10_000;
        for _ in 0..n {
            counts[ground_instance("cabinet", &st, &[false; 4], &mut rng).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
        }
    }
}
