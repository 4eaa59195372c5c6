use std::fmt;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub epoch: u64,
    pub mean_test_reward: f64,
    pub mean_test_steps: f64,
    pub seed_rewards: Vec<f64>,
    pub seed_steps: Vec<f64>,
}

/// Per-epoch metrics. Columns: `epoch, mean_test_reward, mean_test_steps`
/// then `seed{i}_reward, seed{i}_steps` for every seed.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub seeds: usize,
    pub rows: Vec<MetricsRow>,
}

/// Trailing mean over the points whose epoch lies in `(e - window, e]`.
pub fn moving_average(points: &[(u64, f64)], window: u64) -> Vec<f64> {
    points
        .iter()
        .map(|&(e, _)| {
            let lo = e.saturating_sub(window);
            let inside: Vec<f64> = points
                .iter()
                .filter(|&&(x, _)| x > lo && x <= e)
                .map(|&(_, v)| v)
                .collect();
            inside.iter().sum::<f64>() / inside.len() as f64
        })
        .collect()
}

fn fmt_value(v: f64) -> String {
    format!("{v:.6}")
}

impl MetricsTable {
    /// Smooths each seed's `(epoch, reward, steps)` curve, then averages
    /// across seeds. All seeds must share evaluation epochs.
    pub fn from_evals(per_seed: &[Vec<(u64, f64, f64)>], window: u64) -> Self {
        let smooth: Vec<(Vec<f64>, Vec<f64>)> = per_seed
            .iter()
            .map(|evals| {
                let r: Vec<(u64, f64)> = evals.iter().map(|&(e, r, _)| (e, r)).collect();
                let s: Vec<(u64, f64)> = evals.iter().map(|&(e, _, s)| (e, s)).collect();
                (moving_average(&r, window), moving_average(&s, window))
            })
            .collect();
        let epochs: Vec<u64> = per_seed
            .first()
            .map(|e| e.iter().map(|x| x.0).collect())
            .unwrap_or_default();
        let n = per_seed.len() as f64;
        let rows = epochs
            .iter()
            .enumerate()
            .map(|(k, &epoch)| {
                let seed_rewards: Vec<f64> = smooth.iter().map(|(r, _)| r[k]).collect();
                let seed_steps: Vec<f64> = smooth.iter().map(|(_, s)| s[k]).collect();
                MetricsRow {
                    epoch,
                    mean_test_reward: seed_rewards.iter().sum::<f64>() / n,
                    mean_test_steps: seed_steps.iter().sum::<f64>() / n,
                    seed_rewards,
                    seed_steps,
                }
            })
            .collect();
        MetricsTable {
            seeds: per_seed.len(),
            rows,
        }
    }

    pub fn header(seeds: usize) -> Vec<String> {
        let mut h = vec!["epoch".to_string(), "mean_test_reward".into(), "mean_test_steps".into()];
        for i in 0..seeds {
            h.push(format!("seed{i}_reward"));
            h.push(format!("seed{i}_steps"));
        }
        h
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::header(self.seeds)).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![
                r.epoch.to_string(),
                fmt_value(r.mean_test_reward),
                fmt_value(r.mean_test_steps),
            ];
            for (a, b) in r.seed_rewards.iter().zip(&r.seed_steps) {
                rec.push(fmt_value(*a));
                rec.push(fmt_value(*b));
            }
            w.write_record(rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let bad = |m: String| HarnessError::Metrics(m);
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.len() < 3 || !(header.len() - 3).is_multiple_of(2) {
            return Err(bad(format!("unexpected column count {}", header.len())));
        }
        let seeds = (header.len() - 3) / 2;
        if header != Self::header(seeds) {
            return Err(bad(format!("unexpected header `{}`", header.join(","))));
        }
        let mut rows: Vec<MetricsRow> = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let num = |i: usize| -> Result<f64, HarnessError> {
                rec.get(i)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| bad(format!("bad value in column {}", header[i])))
            };
            let epoch: u64 = rec
                .get(0)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad("bad epoch".into()))?;
            if rows.last().is_some_and(|r| r.epoch >= epoch) {
                return Err(bad(format!("epochs not strictly increasing at {epoch}")));
            }
            let mut row = MetricsRow {
                epoch,
                mean_test_reward: num(1)?,
                mean_test_steps: num(2)?,
                seed_rewards: Vec::new(),
                seed_steps: Vec::new(),
            };
            for i in 0..seeds {
                row.seed_rewards.push(num(3 + 2 * i)?);
                row.seed_steps.push(num(4 + 2 * i)?);
            }
            rows.push(row);
        }
        Ok(MetricsTable { seeds, rows })
    }

    /// Values of a named reward/steps column.
    pub fn column(&self, name: &str) -> Option<Vec<(u64, f64)>> {
        let pick: Box<dyn Fn(&MetricsRow) -> f64> = match name {
            "mean_test_reward" => Box::new(|r| r.mean_test_reward),
            "mean_test_steps" => Box::new(|r| r.mean_test_steps),
            other => {
                let rest = other.strip_prefix("seed")?;
                let (i, kind) = rest.split_once('_')?;
                let i: usize = i.parse().ok().filter(|&i| i < self.seeds)?;
                match kind {
                    "reward" => Box::new(move |r| r.seed_rewards[i]),
                    "steps" => Box::new(move |r| r.seed_steps[i]),
                    _ => return None,
                }
            }
        };
        Some(self.rows.iter().map(|r| (r.epoch, pick(r))).collect())
    }

    /// First epoch at which `column` reaches `threshold`.
    pub fn first_crossing(&self, column: &str, threshold: f64) -> Option<u64> {
        self.column(column)?
            .into_iter()
            .find(|&(_, v)| v >= threshold)
            .map(|(e, _)| e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub threshold: f64,
    pub a: Option<u64>,
    pub b: Option<u64>,
}

impl Crossing {
    /// `b - a` in epochs, when both runs cross.
    pub fn difference(&self) -> Option<i64> {
        Some(self.b? as i64 - self.a? as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub column: String,
    pub crossings: Vec<Crossing>,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |e: Option<u64>| e.map_or("not reached".to_string(), |e| e.to_string());
        writeln!(f, "column\tthreshold\tepoch_a\tepoch_b\tdifference")?;
        for c in &self.crossings {
            writeln!(
                f,
                "{}\t{}\t{}\t{}\t{}",
                self.column,
                c.threshold,
                show(c.a),
                show(c.b),
                c.difference().map_or("not reached".to_string(), |d| d.to_string())
            )?;
        }
        Ok(())
    }
}

/// First epoch each run reaches every threshold on `column`.
pub fn compare_runs(csv_a: &str, csv_b: &str, thresholds: &[f64], column: &str) -> Result<Comparison, HarnessError> {
    let a = MetricsTable::parse(csv_a)?;
    let b = MetricsTable::parse(csv_b)?;
    if a.seeds != b.seeds {
        return Err(HarnessError::Metrics(format!(
            "schema mismatch: {} seed columns vs {}",
            a.seeds, b.seeds
        )));
    }
    if a.column(column).is_none() {
        return Err(HarnessError::Metrics(format!("no column `{column}`")));
    }
    Ok(Comparison {
        column: column.to_string(),
        crossings: thresholds
            .iter()
            .map(|&t| Crossing {
                threshold: t,
                a: a.first_crossing(column, t),
                b: b.first_crossing(column, t),
            })
            .collect(),
    })
}
