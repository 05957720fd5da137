use rand::seq::SliceRandom;
use rand::Rng;

/// Picks the operators applied to one signal at one training step.
///
/// Each registered operator gets its own `r ~ U[0, 1)` and survives iff
/// `r >= rate`; the survivors are then shuffled so every ordering is possible.
pub fn select_ops<T: Copy, R: Rng + ?Sized>(registry: &[T], rate: f64, rng: &mut R) -> Vec<T> {
    let mut chosen: Vec<T> = registry
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() >= rate)
        .collect();
    chosen.shuffle(rng);
    chosen
}
