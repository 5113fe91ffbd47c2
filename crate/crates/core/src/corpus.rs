//! The reference documents shipped with the crate, embedded at build time.

/// `(file name, source text)` pairs in a fixed order.
pub const CORPUS: &[(&str, &str)] = &[
    ("resources.giml", include_str!("../fixtures/resources.giml")),
    ("single_scene.giml", include_str!("../fixtures/single_scene.giml")),
    ("image_region.giml", include_str!("../fixtures/image_region.giml")),
    ("percent_region.giml", include_str!("../fixtures/percent_region.giml")),
    ("state_images.giml", include_str!("../fixtures/state_images.giml")),
    ("state_texts.giml", include_str!("../fixtures/state_texts.giml")),
    ("time_elapsed.giml", include_str!("../fixtures/time_elapsed.giml")),
    ("navigation.giml", include_str!("../fixtures/navigation.giml")),
    ("lists.giml", include_str!("../fixtures/lists.giml")),
    ("list_groups.giml", include_str!("../fixtures/list_groups.giml")),
    ("color_words.giml", include_str!("../fixtures/color_words.giml")),
    ("disk.giml", include_str!("../fixtures/disk.giml")),
];

/// Source text of a corpus document by file name.
pub fn fixture(name: &str) -> Option<&'static str> {
    CORPUS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
