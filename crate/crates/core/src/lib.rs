pub mod cech;
pub mod classify;
pub mod cli;
pub mod coeff;
pub mod geometry;
pub mod gluing;
pub mod linalg;
pub mod sheaf;
pub mod spectral;
