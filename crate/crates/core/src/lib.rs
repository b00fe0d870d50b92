pub mod decomposition;
pub mod graph;
pub mod index;
pub mod oracle;
pub mod portals;
pub mod shortest_paths;
pub mod stretch;
