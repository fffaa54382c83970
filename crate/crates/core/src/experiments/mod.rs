//! Batch experiments: JSON configurations, seeded runs, CSV artifacts with
//! column sidecars and replayable manifests.

mod config;
mod output;
mod run;

pub use config::{
    parse_local, parse_real, per_place, BallSpec, ExperimentConfig, GoodSpec, MapJson, MatrixSpec, NondivSpec,
    PerPlace, PlaceSpec, RaySpec, ScheduleSpec, EXPERIMENTS,
};
pub use output::{canonical_json, sha256_hex, ColumnDoc, Sidecar, Table};
pub use run::{csv_bodies, manifest_path, replay, run, run_text, ArtifactEntry, Overrides, RunManifest};
