//! Loaders for externally prepared instance data.
//!
//! Externally published datasets come in many shapes; two conventions are
//! supported here. The first is simply the canonical instance JSON (see
//! [`crate::model`]). The second is a directory of long-format CSV files for
//! data converted by hand from other tools:
//!
//! - `dims.csv` — header `I,J,M,T`, one data row.
//! - `scalars.csv` — header `name,value`; requires `budget`, accepts
//!   `emission_cap`.
//! - one file per table: `fleet_cap.csv`, `rental_cap.csv`, `demand.csv`,
//!   `stop_cost_org.csv`, `stop_cost_rent.csv`, `travel_cost_org.csv`,
//!   `travel_cost_rent.csv`, `op_cost.csv`, `rent_cost.csv`,
//!   `distance.csv`, `emission_org.csv`, `emission_rent.csv`.
//!
//! Table files carry the header naming their subscripts plus `value`
//! (`i,j,m,t,value`, `i,m,t,value`, `i,j,value`, or `m,value`), indices
//! 1-based as in most solver exports. Cells not listed default to zero, so
//! sparse dumps load directly.

use crate::model::{Dimensions, Instance, ModelError};
use crate::tensor::{Tensor2, Tensor3, Tensor4};
use std::collections::HashMap;
use std::path::Path;

/// Reads and validates canonical instance JSON from a file.
pub fn load_instance_json(path: &Path) -> Result<Instance, ModelError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ModelError::Parse(format!("{}: {e}", path.display())))?;
    Instance::from_json(&text)
}

struct CsvTable {
    /// Column name -> position.
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_csv(path: &Path) -> Result<CsvTable, ModelError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ModelError::Parse(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| ModelError::Parse(format!("{}: empty file", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let rows = lines
        .map(|line| line.split(',').map(|s| s.trim().to_string()).collect())
        .collect();
    Ok(CsvTable { header, rows })
}

impl CsvTable {
    fn column(&self, name: &str, file: &str) -> Result<usize, ModelError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| ModelError::Parse(format!("{file}: missing column `{name}`")))
    }
}

fn parse_index(field: &str, file: &str, extent: usize) -> Result<usize, ModelError> {
    let raw: usize = field
        .parse()
        .map_err(|_| ModelError::Parse(format!("{file}: bad index `{field}`")))?;
    if raw == 0 || raw > extent {
        return Err(ModelError::Parse(format!(
            "{file}: index {raw} outside 1..={extent}"
        )));
    }
    Ok(raw - 1)
}

fn parse_value(field: &str, file: &str) -> Result<f64, ModelError> {
    field.parse().map_err(|_| ModelError::Parse(format!("{file}: bad value `{field}`")))
}

fn load_entries(
    dir: &Path,
    file: &str,
    subscripts: &[(&str, usize)],
) -> Result<Vec<(Vec<usize>, f64)>, ModelError> {
    let path = dir.join(file);
    let table = read_csv(&path)?;
    let idx_cols: Vec<usize> = subscripts
        .iter()
        .map(|(name, _)| table.column(name, file))
        .collect::<Result<_, _>>()?;
    let value_col = table.column("value", file)?;
    let mut entries = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let mut indices = Vec::with_capacity(subscripts.len());
        for (pos, (_, extent)) in idx_cols.iter().zip(subscripts) {
            indices.push(parse_index(&row[*pos], file, *extent)?);
        }
        entries.push((indices, parse_value(&row[value_col], file)?));
    }
    Ok(entries)
}

/// Loads an instance from a directory of long-format CSV files.
pub fn load_long_csv_dir(dir: &Path) -> Result<Instance, ModelError> {
    let dims_table = read_csv(&dir.join("dims.csv"))?;
    let dims_row = dims_table
        .rows
        .first()
        .ok_or_else(|| ModelError::Parse("dims.csv: no data row".into()))?;
    let field = |name: &str| -> Result<usize, ModelError> {
        let pos = dims_table.column(name, "dims.csv")?;
        dims_row[pos]
            .parse()
            .map_err(|_| ModelError::Parse(format!("dims.csv: bad `{name}`")))
    };
    let dims = Dimensions::new(field("I")?, field("J")?, field("M")?, field("T")?);
    let (ni, nj, nm, nt) =
        (dims.num_origins, dims.num_destinations, dims.num_modes, dims.num_periods);

    let scalars_table = read_csv(&dir.join("scalars.csv"))?;
    let name_col = scalars_table.column("name", "scalars.csv")?;
    let value_col = scalars_table.column("value", "scalars.csv")?;
    let mut scalars = HashMap::new();
    for row in &scalars_table.rows {
        scalars.insert(row[name_col].clone(), parse_value(&row[value_col], "scalars.csv")?);
    }
    let budget = *scalars
        .get("budget")
        .ok_or_else(|| ModelError::Parse("scalars.csv: missing `budget`".into()))?;
    let emission_cap = scalars.get("emission_cap").copied();

    let origin_subs = [("i", ni), ("m", nm), ("t", nt)];
    let route_subs = [("i", ni), ("j", nj), ("m", nm), ("t", nt)];

    let tensor3 = |file: &str| -> Result<Tensor3<f64>, ModelError> {
        let mut out = Tensor3::filled(dims.origin_shape(), 0.0);
        for (idx, v) in load_entries(dir, file, &origin_subs)? {
            out.set(idx[0], idx[1], idx[2], v);
        }
        Ok(out)
    };
    let tensor3_int = |file: &str| -> Result<Tensor3<u32>, ModelError> {
        let mut out = Tensor3::filled(dims.origin_shape(), 0);
        for (idx, v) in load_entries(dir, file, &origin_subs)? {
            out.set(idx[0], idx[1], idx[2], v as u32);
        }
        Ok(out)
    };
    let tensor4 = |file: &str| -> Result<Tensor4<f64>, ModelError> {
        let mut out = Tensor4::filled(dims.route_shape(), 0.0);
        for (idx, v) in load_entries(dir, file, &route_subs)? {
            out.set(idx[0], idx[1], idx[2], idx[3], v);
        }
        Ok(out)
    };

    let mut demand = Tensor4::filled(dims.route_shape(), 0);
    for (idx, v) in load_entries(dir, "demand.csv", &route_subs)? {
        demand.set(idx[0], idx[1], idx[2], idx[3], v as u32);
    }
    let mut distance = Tensor2::filled([ni, nj], 0.0);
    for (idx, v) in load_entries(dir, "distance.csv", &[("i", ni), ("j", nj)])? {
        distance.set(idx[0], idx[1], v);
    }
    let mode_vec = |file: &str| -> Result<Vec<f64>, ModelError> {
        let mut out = vec![0.0; nm];
        for (idx, v) in load_entries(dir, file, &[("m", nm)])? {
            out[idx[0]] = v;
        }
        Ok(out)
    };

    let instance = Instance {
        version: 1,
        dims,
        fleet_cap: tensor3_int("fleet_cap.csv")?,
        rental_cap: tensor3_int("rental_cap.csv")?,
        demand,
        stop_cost_org: tensor3("stop_cost_org.csv")?,
        stop_cost_rent: tensor3("stop_cost_rent.csv")?,
        travel_cost_org: tensor4("travel_cost_org.csv")?,
        travel_cost_rent: tensor4("travel_cost_rent.csv")?,
        budget,
        op_cost: tensor3("op_cost.csv")?,
        rent_cost: tensor3("rent_cost.csv")?,
        emission_org: mode_vec("emission_org.csv")?,
        emission_rent: mode_vec("emission_rent.csv")?,
        distance,
        emission_cap,
    };
    instance.validate()?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn json_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let inst = fixtures::single_route();
        std::fs::write(&path, inst.to_json_pretty()).unwrap();
        assert_eq!(load_instance_json(&path).unwrap(), inst);
    }

    #[test]
    fn long_csv_directory_loads_the_single_route_instance() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, body: &str| std::fs::write(dir.path().join(name), body).unwrap();
        write("dims.csv", "I,J,M,T\n1,1,1,1\n");
        write("scalars.csv", "name,value\nbudget,1000\n");
        write("fleet_cap.csv", "i,m,t,value\n1,1,1,2\n");
        write("rental_cap.csv", "i,m,t,value\n1,1,1,1\n");
        write("demand.csv", "i,j,m,t,value\n1,1,1,1,1\n");
        write("stop_cost_org.csv", "i,m,t,value\n1,1,1,10\n");
        write("stop_cost_rent.csv", "i,m,t,value\n1,1,1,8\n");
        write("travel_cost_org.csv", "i,j,m,t,value\n1,1,1,1,100\n");
        write("travel_cost_rent.csv", "i,j,m,t,value\n1,1,1,1,120\n");
        write("op_cost.csv", "i,m,t,value\n1,1,1,50\n");
        write("rent_cost.csv", "i,m,t,value\n1,1,1,60\n");
        write("distance.csv", "i,j,value\n1,1,100\n");
        write("emission_org.csv", "m,value\n1,1.0\n");
        write("emission_rent.csv", "m,value\n1,0.7\n");

        let loaded = load_long_csv_dir(dir.path()).unwrap();
        assert_eq!(loaded, fixtures::single_route());
    }

    #[test]
    fn out_of_range_indices_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("dims.csv"), "I,J,M,T\n1,1,1,1\n").unwrap();
        std::fs::write(dir.path().join("scalars.csv"), "name,value\nbudget,10\n").unwrap();
        std::fs::write(dir.path().join("fleet_cap.csv"), "i,m,t,value\n2,1,1,2\n").unwrap();
        let err = load_long_csv_dir(dir.path()).unwrap_err();
        assert!(matches!(err, ModelError::Parse(_)), "{err:?}");
    }
}
