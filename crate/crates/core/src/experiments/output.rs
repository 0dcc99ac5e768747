use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::studies::StudyResult;
use crate::error::Result;

impl StudyResult {
    /// `(file name, contents)` of every CSV table. Floats use the shortest
    /// representation that round-trips, so output is byte-stable.
    pub fn csv_files(&self) -> Vec<(String, String)> {
        match self {
            StudyResult::ErrorCurve(rows) => {
                let mut s = String::from(
                    "param_variant,n_total,mean_rel_err,theory,n1,n_alpha,median_rel_err,k_true,clamped,replications\n",
                );
                for r in rows {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{},{}",
                        r.variant,
                        r.n_total(),
                        r.mean_rel_err,
                        r.theory,
                        r.n1,
                        r.n_alpha,
                        r.median_rel_err,
                        r.k_true,
                        r.clamped,
                        r.replications
                    );
                }
                vec![("error_curve.csv".into(), s)]
            }
            StudyResult::Normality(cases) => {
                let mut stats = String::from("noise,n1,n_alpha,replication,res1,res_alpha,res\n");
                let mut summary = String::from(
                    "noise,n1,n_alpha,statistic,mean,variance,ks_d,ks_p,norm_ci_covered,k_ci_covered,clamped,replications\n",
                );
                for c in cases {
                    for i in 0..c.replications() {
                        let _ = writeln!(
                            stats,
                            "{},{},{},{},{},{},{}",
                            c.noise, c.n1, c.n_alpha, i, c.res1[i], c.res_alpha[i], c.res[i]
                        );
                    }
                    for (name, st) in ["res1", "res_alpha", "res"].iter().zip(c.summaries()) {
                        let _ = writeln!(
                            summary,
                            "{},{},{},{},{},{},{},{},{},{},{},{}",
                            c.noise,
                            c.n1,
                            c.n_alpha,
                            name,
                            st.mean,
                            st.variance,
                            st.ks_d,
                            st.ks_p,
                            c.norm_ci_covered,
                            c.k_ci_covered,
                            c.clamped,
                            c.replications()
                        );
                    }
                }
                vec![("normality.csv".into(), stats), ("normality_summary.csv".into(), summary)]
            }
            StudyResult::L20SmallAlpha(rows) => {
                let mut s = String::from(
                    "k,bdnr,n_total,mean_rel_err,budget,n1,n_alpha,median_rel_err,clt_term,approx_term,clamped,replications\n",
                );
                for r in rows {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{},{},{},{}",
                        r.k,
                        r.bdnr,
                        r.n_total(),
                        r.mean_rel_err,
                        r.budget(),
                        r.n1,
                        r.n_alpha,
                        r.median_rel_err,
                        r.clt_term,
                        r.approx_term,
                        r.clamped,
                        r.replications
                    );
                }
                vec![("l20_small_alpha.csv".into(), s)]
            }
            StudyResult::MeasureCompare(rows) => {
                let mut s = String::from("profile,blocks,l20,k2,k1,k_inf\n");
                for r in rows {
                    let _ = writeln!(s, "{},{},{},{},{},{}", r.profile, r.blocks, r.l20, r.k2, r.k1, r.k_inf);
                }
                vec![("measure_compare.csv".into(), s)]
            }
        }
    }
}

/// Run manifest: library version, seed, output files and the full config.
pub fn manifest(cfg: &ExperimentConfig, files: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# blocksparse {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# seed {}", cfg.seed);
    for f in files {
        let _ = writeln!(s, "# output {f}");
    }
    s.push_str(&cfg.render());
    s
}

/// Writes every CSV of `result` and `manifest.txt` into `dir`, creating it if needed.
pub fn write_outputs(result: &StudyResult, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = result.csv_files();
    let names: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    let mut written = Vec::with_capacity(files.len() + 1);
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest(cfg, &names))?;
    written.push(path);
    Ok(written)
}
