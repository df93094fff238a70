use gomet::gocheck::{certify_go, section5_pipeline, CertifyConfig, VerdictKind};
use gomet::homspace::{build_space, catalog, isotypic_decompose};
use gomet::invmetrics::normal_metric;

fn main() {
    let mut bad = 0;
    for seed in [1u64, 7, 23, 99, 1234, 987654321, 5, 15, 18, 19] {
        let cfg = CertifyConfig::default().with_samples(80).with_seed(seed);
        match section5_pipeline(&cfg) {
            Ok(r) => {
                if !r.derived_mu_passing_set.contains(&1.0) {
                    println!("seed {seed}: passing set {:?}", r.derived_mu_passing_set);
                    bad += 1;
                }
            }
            Err(e) => {
                println!("seed {seed}: pipeline error {e}");
                bad += 1;
            }
        }
        for spec in catalog() {
            let space = build_space(&spec).unwrap();
            match isotypic_decompose(&space, seed) {
                Ok(d) => {
                    let lam = normal_metric(&space);
                    match certify_go(&space, &lam, &d, &cfg) {
                        Ok(v) if v.kind == VerdictKind::ProbablyGO => {}
                        Ok(v) => {
                            println!("seed {seed} {spec}: normal metric {:?}", v.kind);
                            bad += 1;
                        }
                        Err(e) => {
                            println!("seed {seed} {spec}: certify error {e}");
                            bad += 1;
                        }
                    }
                }
                Err(e) => {
                    println!("seed {seed} {spec}: decompose error {e}");
                    bad += 1;
                }
            }
        }
    }
    println!("stress result: {bad} failures");
}
