//! Dense rectangular arrays indexed by two, three, or four subscripts.
//!
//! Model parameters are small dense tables, so each tensor keeps its entries
//! in a flat row-major `Vec` and serializes as nested JSON arrays with the
//! outermost subscript first. Deserialization rejects ragged input.

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Table indexed as `[a][b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2<T> {
    shape: [usize; 2],
    data: Vec<T>,
}

/// Table indexed as `[a][b][c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    shape: [usize; 3],
    data: Vec<T>,
}

/// Table indexed as `[a][b][c][d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4<T> {
    shape: [usize; 4],
    data: Vec<T>,
}

impl<T: Copy> Tensor2<T> {
    pub fn filled(shape: [usize; 2], value: T) -> Self {
        Self { shape, data: vec![value; shape[0] * shape[1]] }
    }

    pub fn from_fn(shape: [usize; 2], mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(shape[0] * shape[1]);
        for a in 0..shape[0] {
            for b in 0..shape[1] {
                data.push(f(a, b));
            }
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> T {
        self.data[a * self.shape[1] + b]
    }

    pub fn set(&mut self, a: usize, b: usize, value: T) {
        self.data[a * self.shape[1] + b] = value;
    }

    /// Entries in row-major order.
    pub fn values(&self) -> &[T] {
        &self.data
    }
}

impl<T: Copy> Tensor3<T> {
    pub fn filled(shape: [usize; 3], value: T) -> Self {
        Self { shape, data: vec![value; shape.iter().product()] }
    }

    pub fn from_fn(shape: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(shape.iter().product());
        for a in 0..shape[0] {
            for b in 0..shape[1] {
                for c in 0..shape[2] {
                    data.push(f(a, b, c));
                }
            }
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> T {
        self.data[(a * self.shape[1] + b) * self.shape[2] + c]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, value: T) {
        self.data[(a * self.shape[1] + b) * self.shape[2] + c] = value;
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }
}

impl<T: Copy> Tensor4<T> {
    pub fn filled(shape: [usize; 4], value: T) -> Self {
        Self { shape, data: vec![value; shape.iter().product()] }
    }

    pub fn from_fn(shape: [usize; 4], mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(shape.iter().product());
        for a in 0..shape[0] {
            for b in 0..shape[1] {
                for c in 0..shape[2] {
                    for d in 0..shape[3] {
                        data.push(f(a, b, c, d));
                    }
                }
            }
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> [usize; 4] {
        self.shape
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> T {
        self.data[((a * self.shape[1] + b) * self.shape[2] + c) * self.shape[3] + d]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, value: T) {
        self.data[((a * self.shape[1] + b) * self.shape[2] + c) * self.shape[3] + d] = value;
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }
}

impl<T: Copy + Serialize> Serialize for Tensor2<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let nested: Vec<&[T]> = self.data.chunks(self.shape[1].max(1)).collect();
        nested.serialize(serializer)
    }
}

impl<T: Copy + Serialize> Serialize for Tensor3<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let [_, nb, nc] = self.shape;
        let nested: Vec<Vec<&[T]>> = self
            .data
            .chunks((nb * nc).max(1))
            .map(|plane| plane.chunks(nc.max(1)).collect())
            .collect();
        nested.serialize(serializer)
    }
}

impl<T: Copy + Serialize> Serialize for Tensor4<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let [_, nb, nc, nd] = self.shape;
        let nested: Vec<Vec<Vec<&[T]>>> = self
            .data
            .chunks((nb * nc * nd).max(1))
            .map(|cube| {
                cube.chunks((nc * nd).max(1))
                    .map(|plane| plane.chunks(nd.max(1)).collect())
                    .collect()
            })
            .collect();
        nested.serialize(serializer)
    }
}

fn ragged<E: DeError>() -> E {
    E::custom("nested array is ragged: all inner arrays must share one length")
}

impl<'de, T: Copy + Deserialize<'de>> Deserialize<'de> for Tensor2<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let nested = Vec::<Vec<T>>::deserialize(deserializer)?;
        let nb = nested.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nested.len() * nb);
        for row in &nested {
            if row.len() != nb {
                return Err(ragged());
            }
            data.extend_from_slice(row);
        }
        Ok(Self { shape: [nested.len(), nb], data })
    }
}

impl<'de, T: Copy + Deserialize<'de>> Deserialize<'de> for Tensor3<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let nested = Vec::<Vec<Vec<T>>>::deserialize(deserializer)?;
        let nb = nested.first().map_or(0, Vec::len);
        let nc = nested.first().and_then(|p| p.first()).map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nested.len() * nb * nc);
        for plane in &nested {
            if plane.len() != nb {
                return Err(ragged());
            }
            for row in plane {
                if row.len() != nc {
                    return Err(ragged());
                }
                data.extend_from_slice(row);
            }
        }
        Ok(Self { shape: [nested.len(), nb, nc], data })
    }
}

impl<'de, T: Copy + Deserialize<'de>> Deserialize<'de> for Tensor4<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let nested = Vec::<Vec<Vec<Vec<T>>>>::deserialize(deserializer)?;
        let nb = nested.first().map_or(0, Vec::len);
        let nc = nested.first().and_then(|c| c.first()).map_or(0, Vec::len);
        let nd = nested
            .first()
            .and_then(|c| c.first())
            .and_then(|p| p.first())
            .map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nested.len() * nb * nc * nd);
        for cube in &nested {
            if cube.len() != nb {
                return Err(ragged());
            }
            for plane in cube {
                if plane.len() != nc {
                    return Err(ragged());
                }
                for row in plane {
                    if row.len() != nd {
                        return Err(ragged());
                    }
                    data.extend_from_slice(row);
                }
            }
        }
        Ok(Self { shape: [nested.len(), nb, nc, nd], data })
    }
}
