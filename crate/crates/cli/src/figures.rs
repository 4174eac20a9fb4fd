// SPDX-License-Identifier: Apache-2.0

//! Built-in figure recipes. Each is an ordinary config file under `recipes/`.

macro_rules! recipes {
    ($($id:literal),* $(,)?) => {
        &[$(($id, include_str!(concat!("../recipes/", $id, ".cfg")))),*]
    };
}

pub const RECIPES: &[(&str, &str)] = recipes![
    "3.1-I", "3.1-II", "3.2-I", "3.2-II", "3.3", "3.4", "3.5", "3.6-I", "3.6-II", "3.7", "3.8", "3.9", "3.10-I",
    "3.10-II", "3.11", "4.1-I", "4.1-II", "4.2", "4.3-I", "4.3-II", "4.4", "4.5", "4.6-I", "4.6-II", "5.1-I", "5.1-II",
    "5.2", "5.3", "5.4",
];

pub fn recipe(id: &str) -> Option<&'static str> {
    RECIPES.iter().find(|(k, _)| k.eq_ignore_ascii_case(id)).map(|(_, t)| *t)
}

pub fn ids() -> impl Iterator<Item = &'static str> {
    RECIPES.iter().map(|(k, _)| *k)
}
