//! Survey ingestion and preprocessing.

pub mod climate;
pub mod load;
pub mod mapping;
pub mod record;
pub mod standardize;
pub mod summary;
pub mod table;

pub use climate::{enrich_climate, filter_pool, CityZoneTable, EnrichReport, PoolFilter};
pub use load::{load_dataset, write_canonical_csv, DropReason, LoadReport, Loaded};
pub use mapping::ColumnMapping;
pub use record::{
    merge_classes, ClimateZone, ComfortRecord, Feature, FeatureSet, FeatureSetTag, Gender,
    SensationClass, Ventilation,
};
pub use standardize::{apply_standardizer, fit_standardizer, Standardizer};
pub use summary::{summarize_dataset, DatasetSummary, Stats};
pub use table::{class_counts, Domain, DomainDataset, RowOrigin};
