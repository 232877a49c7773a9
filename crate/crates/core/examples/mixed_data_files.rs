//! Read a mixed data set from CSV, with a skewed continuous column mapped to
//! the latent scale through its known marginal distribution.

use std::fs;

use lggm::io::{load_dataset, load_marginal_prior, load_schema};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let schema_path = dir.path().join("schema.csv");
    let data_path = dir.path().join("data.csv");
    let prior_path = dir.path().join("prior.csv");
    fs::write(
        &schema_path,
        "# name,kind[,transform]\nfever,binary\ncough,binary\nduration,continuous,lognormal:1.5:0.8\n",
    )?;
    fs::write(
        &data_path,
        "fever,cough,duration,cause\n1,0,4.5,flu\n0,1,12,\n1,1,,cold\n,0,2.25,\n",
    )?;
    fs::write(&prior_path, "variable,value\nfever,0.7\ncough,0.4\n")?;

    let schema = load_schema(&schema_path)?;
    let data = load_dataset(&data_path, &schema_path)?;
    let prior = load_marginal_prior(&prior_path, &schema, 1.0)?;

    println!("{} rows, {} missing cells, classes {:?}", data.n(), data.missing_count(), data.class_names());
    for (j, v) in schema.iter().enumerate() {
        let latent: Vec<String> = (0..data.n())
            .map(|i| data.latent(i, j).map_or("NA".into(), |z| format!("{z:.3}")))
            .collect();
        println!("{:<9} prior mean {:>6.3}  latent [{}]", v.name, prior.mu0[j], latent.join(", "));
    }
    println!("labels {:?}", data.labels());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
