use serde::{Deserialize, Serialize};

use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// Class absent from both the gold labels and the predictions.
    pub excluded: bool,
}

/// Classification metrics in class order (hate, abusive, neither).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `confusion[actual][predicted]`.
    pub confusion: [[usize; 3]; 3],
    pub per_class: [ClassScores; 3],
    pub macro_f1: f64,
    pub accuracy: f64,
}

impl Metrics {
    pub fn from_confusion(confusion: [[usize; 3]; 3]) -> Self {
        let total: usize = confusion.iter().flatten().sum();
        let trace: usize = (0..3).map(|i| confusion[i][i]).sum();
        let mut per_class = [ClassScores::default(); 3];
        for (c, scores) in per_class.iter_mut().enumerate() {
            let tp = confusion[c][c] as f64;
            let support: usize = confusion[c].iter().sum();
            let predicted: usize = (0..3).map(|a| confusion[a][c]).sum();
            let precision = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
            let recall = if support == 0 { 0.0 } else { tp / support as f64 };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            *scores = ClassScores {
                precision,
                recall,
                f1,
                support,
                excluded: support == 0 && predicted == 0,
            };
        }
        let present: Vec<f64> = per_class.iter().filter(|s| !s.excluded).map(|s| s.f1).collect();
        let macro_f1 = if present.is_empty() {
            0.0
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        };
        Self {
            confusion,
            per_class,
            macro_f1,
            accuracy: if total == 0 { 0.0 } else { trace as f64 / total as f64 },
        }
    }

    pub fn from_predictions(actual: &[Label], predicted: &[Label]) -> Self {
        let mut confusion = [[0usize; 3]; 3];
        for (a, p) in actual.iter().zip(predicted) {
            confusion[a.index()][p.index()] += 1;
        }
        Self::from_confusion(confusion)
    }

    pub fn f1(&self, label: Label) -> f64 {
        self.per_class[label.index()].f1
    }

    fn f1_cell(&self, label: Label) -> String {
        let s = &self.per_class[label.index()];
        if s.excluded {
            "-".into()
        } else {
            format!("{:.2}", s.f1)
        }
    }
}

/// Renders rows in the `f1-Neither | f1-Hate | f1-Abuse | Acc` layout.
pub fn render_table(first_column: &str, rows: &[(String, Metrics)]) -> String {
    let width = rows
        .iter()
        .map(|(n, _)| n.chars().count())
        .chain([first_column.len()])
        .max()
        .unwrap_or(0);
    let mut s = format!(
        "{first_column:<width$} | f1-Neither | f1-Hate | f1-Abuse | Acc\n{}\n",
        "-".repeat(width + 42)
    );
    for (name, m) in rows {
        s.push_str(&format!(
            "{name:<width$} | {:>10} | {:>7} | {:>8} | {:.3}\n",
            m.f1_cell(Label::Neither),
            m.f1_cell(Label::Hate),
            m.f1_cell(Label::Abusive),
            m.accuracy
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let y = [Label::Hate, Label::Abusive, Label::Neither, Label::Hate];
        let m = Metrics::from_predictions(&y, &y);
        assert_eq!(m.accuracy, 1.0);
        assert!(m.per_class.iter().all(|s| s.f1 == 1.0));
    }

    #[test]
    fn hand_counted_confusion() {
        let m = Metrics::from_confusion([[2, 0, 0], [1, 1, 0], [0, 0, 1]]);
        assert!((m.accuracy - 0.8).abs() < 1e-15);
        assert!((m.per_class[0].precision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.per_class[0].recall, 1.0);
        assert_eq!(m.per_class[1].precision, 1.0);
        assert_eq!(m.per_class[1].recall, 0.5);
        for a in 0..3 {
            assert_eq!(m.confusion[a].iter().sum::<usize>(), m.per_class[a].support);
        }
    }

    #[test]
    fn absent_class_is_excluded() {
        let y = [Label::Hate, Label::Neither];
        let m = Metrics::from_predictions(&y, &y);
        assert_eq!(m.per_class[1].f1, 0.0);
        assert!(m.per_class[1].excluded);
        assert_eq!(m.macro_f1, 1.0);
        let t = render_table("Dataset Type", &[("HI".into(), m)]);
        assert!(t.contains("f1-Neither | f1-Hate | f1-Abuse | Acc"));
        assert!(t.lines().nth(2).unwrap().contains(" - "));
    }
}
