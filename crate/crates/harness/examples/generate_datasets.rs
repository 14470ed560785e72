//! Writes the bundled sample datasets.
//!
//! ```text
//! cargo run -p etop-harness --example generate_datasets -- data
//! ```
//!
//! Output is fully determined by the fixed seeds below.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn num(rng: &mut ChaCha8Rng, v: f64, missing_rate: f64) -> String {
    if rng.gen::<f64>() < missing_rate {
        String::new()
    } else {
        format!("{v:.3}")
    }
}

fn cat(rng: &mut ChaCha8Rng, v: &str, missing_rate: f64) -> String {
    if rng.gen::<f64>() < missing_rate {
        String::new()
    } else {
        v.to_string()
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, options: &[&'a str], weights: &[f64]) -> &'a str {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (o, w) in options.iter().zip(weights) {
        if u < *w {
            return o;
        }
        u -= w;
    }
    options[options.len() - 1]
}

/// Three overlapping Gaussian classes in four dimensions plus a weakly
/// informative colour.
fn blobs() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let noise = Normal::<f64>::new(0.0, 1.6).unwrap();
    let centres = [[0.0, 0.0, 1.0, 0.0], [2.2, 1.4, 0.0, 0.5], [0.8, 3.0, -1.0, 1.0]];
    let sizes = [250, 150, 100];
    let colours = ["amber", "blue", "green", "red"];
    let mut rows = Vec::new();
    for (class, (&n, centre)) in sizes.iter().zip(&centres).enumerate() {
        for _ in 0..n {
            let mut row = Vec::new();
            for &c in centre {
                let v = c + noise.sample(&mut rng);
                row.push(num(&mut rng, v, 0.03));
            }
            let mut w = [1.0; 4];
            w[class] += 1.2;
            let colour = pick(&mut rng, &colours, &w);
            row.push(cat(&mut rng, colour, 0.03));
            row.push(format!("c{class}"));
            rows.push(row.join(","));
        }
    }
    rows.shuffle(&mut rng);
    format!("x1,x2,x3,x4,colour,label\n{}\n", rows.join("\n"))
}

/// Binary approval outcome driven by a noisy logistic score over mixed-type
/// applicant attributes.
fn loans() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let unit = Normal::<f64>::new(0.0, 1.0).unwrap();
    let mut out = String::from("income,debt_ratio,age,credit_score,years_employed,employment,home,approved\n");
    for _ in 0..600 {
        let employment = pick(&mut rng, &["salaried", "self", "unemployed"], &[6.0, 3.0, 1.0]);
        let home = pick(&mut rng, &["mortgage", "own", "rent"], &[4.0, 2.0, 4.0]);
        let income = (45.0 + 18.0 * unit.sample(&mut rng)).max(5.0);
        let debt = (0.35 + 0.15 * unit.sample(&mut rng)).clamp(0.0, 1.2);
        let age = (40.0 + 12.0 * unit.sample(&mut rng)).clamp(18.0, 80.0).round();
        let score = (650.0 + 70.0 * unit.sample(&mut rng)).clamp(300.0, 850.0).round();
        let years = ((age - 18.0) * rng.gen::<f64>() * 0.6).round();
        let z = 0.04 * (income - 45.0) - 5.0 * (debt - 0.35) + 0.012 * (score - 650.0) + 0.05 * years
            - if employment == "unemployed" { 1.5 } else { 0.0 }
            + if home == "own" { 0.4 } else { 0.0 }
            + 0.6
            + 0.8 * unit.sample(&mut rng);
        let approved = if z > 0.0 { "yes" } else { "no" };
        let fields = [
            num(&mut rng, income, 0.02),
            num(&mut rng, debt, 0.02),
            format!("{age}"),
            num(&mut rng, score, 0.06),
            format!("{years}"),
            cat(&mut rng, employment, 0.03),
            home.to_string(),
            approved.to_string(),
        ];
        writeln!(out, "{}", fields.join(",")).unwrap();
    }
    out
}

/// Faults occur outside a ring in the temperature/vibration plane; the
/// remaining channels are weak or pure noise.
fn sensors() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let unit = Normal::<f64>::new(0.0, 1.0).unwrap();
    let mut out = String::from("temperature,vibration,pressure,humidity,drift,region,status\n");
    for _ in 0..400 {
        let temp = 60.0 + 12.0 * unit.sample(&mut rng);
        let vib = 5.0 + 2.0 * unit.sample(&mut rng);
        let r = ((temp - 60.0) / 12.0).powi(2) + ((vib - 5.0) / 2.0).powi(2);
        let fault = r + 0.5 * unit.sample(&mut rng) > 1.8;
        let pressure = 101.0 + 3.0 * unit.sample(&mut rng) + if fault { 1.0 } else { 0.0 };
        let humidity = 40.0 + 10.0 * unit.sample(&mut rng);
        let drift = 100.0 * unit.sample(&mut rng);
        let region = pick(&mut rng, &["east", "north", "south", "west"], &[1.0; 4]);
        let fields = [
            num(&mut rng, temp, 0.03),
            num(&mut rng, vib, 0.03),
            num(&mut rng, pressure, 0.0),
            num(&mut rng, humidity, 0.05),
            num(&mut rng, drift, 0.0),
            cat(&mut rng, region, 0.02),
            (if fault { "fault" } else { "ok" }).to_string(),
        ];
        writeln!(out, "{}", fields.join(",")).unwrap();
    }
    out
}

fn write(dir: &Path, name: &str, body: &str) {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap_or_else(|e| panic!("cannot write {}: {e}", path.display()));
    println!("wrote {}", path.display());
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir).expect("create output directory");
    write(&dir, "blobs.csv", &blobs());
    write(&dir, "loans.csv", &loans());
    write(&dir, "sensors.csv", &sensors());
}
