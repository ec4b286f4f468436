//! Instance specs: how the command line names a graded instance.

use std::path::PathBuf;

use osva_core::modes::{
    make_assoc_algebra_instance, make_heisenberg_instance, make_tensor_instance,
    mult_table_from_json, MultTable, OsvaInstance,
};

use crate::{read_file, CliError};

/// `heisenberg`, `assoc:<table-file>`, or `tensor:<table-file>` (the table
/// algebra tensored with the Heisenberg instance at the requested cutoff).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSpec {
    Heisenberg,
    Assoc(PathBuf),
    Tensor(PathBuf),
}

impl InstanceSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text == "heisenberg" {
            Ok(InstanceSpec::Heisenberg)
        } else if let Some(path) = text.strip_prefix("assoc:") {
            Ok(InstanceSpec::Assoc(PathBuf::from(path)))
        } else if let Some(path) = text.strip_prefix("tensor:") {
            Ok(InstanceSpec::Tensor(PathBuf::from(path)))
        } else {
            Err(CliError::Config(format!(
                "unknown instance spec {text:?}; expected heisenberg, assoc:<table-file>, or tensor:<table-file>"
            )))
        }
    }
}

fn load_table(path: &PathBuf) -> Result<MultTable, CliError> {
    Ok(mult_table_from_json(&read_file(path)?)?)
}

pub fn build_instance(spec: &InstanceSpec, cutoff: usize) -> Result<OsvaInstance, CliError> {
    match spec {
        InstanceSpec::Heisenberg => Ok(make_heisenberg_instance(cutoff)?),
        InstanceSpec::Assoc(path) => {
            let table = load_table(path)?;
            let dim = table.len();
            Ok(make_assoc_algebra_instance(&table, dim)?)
        }
        InstanceSpec::Tensor(path) => {
            let table = load_table(path)?;
            let dim = table.len();
            let alg = make_assoc_algebra_instance(&table, dim)?;
            Ok(make_tensor_instance(&alg, make_heisenberg_instance(cutoff)?)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use osva_core::modes::{matrix_units_table, mult_table_to_json};
    use std::io::Write;

    #[test]
    fn specs_parse() {
        assert_eq!(InstanceSpec::parse("heisenberg").unwrap(), InstanceSpec::Heisenberg);
        assert_eq!(
            InstanceSpec::parse("assoc:tables/m2.json").unwrap(),
            InstanceSpec::Assoc(PathBuf::from("tables/m2.json"))
        );
        assert_eq!(
            InstanceSpec::parse("tensor:m2.json").unwrap(),
            InstanceSpec::Tensor(PathBuf::from("m2.json"))
        );
        assert!(InstanceSpec::parse("fancy").is_err());
    }

    #[test]
    fn table_backed_instances_build() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(mult_table_to_json(&matrix_units_table(2)).as_bytes())
            .unwrap();
        let path = file.path().to_path_buf();
        let assoc = build_instance(&InstanceSpec::Assoc(path.clone()), 4).unwrap();
        assert_eq!(assoc.space().dim(), 4);
        let tensor = build_instance(&InstanceSpec::Tensor(path), 3).unwrap();
        assert_eq!(tensor.space().cutoff(), 3);
        assert!(build_instance(&InstanceSpec::Assoc(PathBuf::from("/nonexistent")), 4).is_err());
    }
}
