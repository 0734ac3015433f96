//! Bundled scenario and reference files.

pub const SCENARIOS: [&str; 2] = ["room_center", "room_corner"];
pub const REFERENCES: [&str; 1] = ["reference_classroom"];

pub fn names() -> impl Iterator<Item = &'static str> {
    SCENARIOS.into_iter().chain(REFERENCES)
}

pub fn get(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".json") {
        "room_center" => Some(include_str!("../fixtures/room_center.json")),
        "room_corner" => Some(include_str!("../fixtures/room_corner.json")),
        "reference_classroom" => Some(include_str!("../fixtures/reference_classroom.json")),
        _ => None,
    }
}
