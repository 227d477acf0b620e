use crate::types::{Label, LabeledRound};
use crate::vector::{axpy, dot};

/// Mistake-driven perceptron: on a mistake, `w ← w + y·x`.
#[derive(Debug, Clone)]
pub struct Perceptron {
    w: Vec<f64>,
    mistakes: u64,
}

impl Perceptron {
    pub fn new(d: usize) -> Self {
        Self {
            w: vec![0.0; d],
            mistakes: 0,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        Label::from_score(dot(&self.w, x))
    }

    /// Returns whether the round was a mistake.
    pub fn observe(&mut self, x: &[f64], y: Label) -> bool {
        let mistake = self.predict(x) != y;
        if mistake {
            axpy(y.value(), x, &mut self.w);
            self.mistakes += 1;
        }
        mistake
    }

    pub fn mistakes(&self) -> u64 {
        self.mistakes
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }
}

/// Perceptron mistake count on a recorded stream.
pub fn perceptron_baseline<'a, I>(stream: I) -> u64
where
    I: IntoIterator<Item = &'a LabeledRound>,
{
    let mut it = stream.into_iter().peekable();
    let Some(first) = it.peek() else {
        return 0;
    };
    let mut p = Perceptron::new(first.x.len());
    for round in it {
        p.observe(&round.x, round.y);
    }
    p.mistakes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::seeded_rng;
    use crate::environments::{gen_margin_example, massart_label, AdversaryStrategy, HiddenTarget};

    #[test]
    fn empty_stream() {
        assert_eq!(perceptron_baseline(std::iter::empty()), 0);
    }

    #[test]
    fn noiseless_margin_stream_respects_classical_bound() {
        let mut rng = seeded_rng(21);
        for gamma in [0.1, 0.25, 0.5] {
            let t = HiddenTarget::random(10, 0.0, gamma, 0.1, 1.0, &mut rng).unwrap();
            let stream: Vec<LabeledRound> = (0..20_000)
                .map(|_| {
                    let x =
                        gen_margin_example(AdversaryStrategy::IidUniformMargin, &t, None, &mut rng)
                            .unwrap();
                    let y = massart_label(&t, &x, 0.0, &mut rng).unwrap();
                    LabeledRound { x, y }
                })
                .collect();
            let m = perceptron_baseline(&stream);
            assert!(
                m as f64 <= 1.0 / (gamma * gamma),
                "gamma {gamma}: {m} mistakes"
            );
        }
    }
}
