//! The three worked examples shipped with the crate, as UCDL sources.

/// `(file name, source)` in file-name order.
pub const FIXTURES: [(&str, &str); 3] = [
    ("driver_monitoring.ucdl", include_str!("../fixtures/driver_monitoring.ucdl")),
    ("music_recommender.ucdl", include_str!("../fixtures/music_recommender.ucdl")),
    ("smart_camera.ucdl", include_str!("../fixtures/smart_camera.ucdl")),
];

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES
        .iter()
        .find(|(file, _)| *file == name || file.trim_end_matches(".ucdl") == name)
        .map(|(_, source)| *source)
}
