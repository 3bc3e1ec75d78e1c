use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ScaffoldDelivery, ScaffoldKind};

/// How often students of one group received one scaffold kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KindCounts {
    pub students: usize,
    /// Min and max over all students of the group, zeros included.
    pub range: Option<(usize, usize)>,
    /// Mean over receivers.
    pub mean: Option<f64>,
    /// Sample standard deviation over receivers; needs two receivers.
    pub sd: Option<f64>,
    /// Students who got it never, once, twice, three times, four or more.
    pub histogram: [usize; 5],
}

impl KindCounts {
    pub const BUCKETS: [&'static str; 5] = ["never", "1", "2", "3", "4+"];

    fn from_counts(counts: &[usize]) -> Self {
        let mut histogram = [0; 5];
        for &c in counts {
            histogram[c.min(4)] += 1;
        }
        let received: Vec<f64> = counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| c as f64)
            .collect();
        let n = received.len() as f64;
        let mean = (!received.is_empty()).then(|| received.iter().sum::<f64>() / n);
        let sd = mean
            .filter(|_| received.len() >= 2)
            .map(|m| (received.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
        let range = counts.iter().fold(None, |acc: Option<(usize, usize)>, &c| {
            Some(acc.map_or((c, c), |(lo, hi)| (lo.min(c), hi.max(c))))
        });
        Self {
            students: counts.len(),
            range,
            mean,
            sd,
            histogram,
        }
    }

    /// Share of the group that never received the kind.
    pub fn never_share(&self) -> f64 {
        if self.students == 0 {
            0.0
        } else {
            self.histogram[0] as f64 / self.students as f64
        }
    }
}

/// Per group, per kind delivery statistics. `groups` maps every student to a
/// group, so students with no deliveries still count as "never"; deliveries
/// to students outside `groups` are ignored.
pub fn delivery_counts(
    deliveries: &[ScaffoldDelivery],
    groups: &BTreeMap<String, String>,
) -> BTreeMap<String, BTreeMap<ScaffoldKind, KindCounts>> {
    let mut per_student: BTreeMap<&str, BTreeMap<ScaffoldKind, usize>> = BTreeMap::new();
    for d in deliveries {
        *per_student
            .entry(&d.student)
            .or_default()
            .entry(d.kind)
            .or_default() += 1;
    }
    let mut members: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (student, group) in groups {
        members.entry(group).or_default().push(student);
    }
    members
        .into_iter()
        .map(|(group, students)| {
            let kinds = ScaffoldKind::ALL
                .into_iter()
                .map(|kind| {
                    let counts: Vec<usize> = students
                        .iter()
                        .map(|s| {
                            per_student
                                .get(s)
                                .and_then(|m| m.get(&kind))
                                .copied()
                                .unwrap_or(0)
                        })
                        .collect();
                    (kind, KindCounts::from_counts(&counts))
                })
                .collect();
            (group.to_owned(), kinds)
        })
        .collect()
}
