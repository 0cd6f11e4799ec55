pub mod nodal;
