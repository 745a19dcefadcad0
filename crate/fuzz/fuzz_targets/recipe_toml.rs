#![no_main]

use fairclust::Recipe;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(recipe) = Recipe::from_toml_str(data) {
        assert!(!recipe.feature_columns.is_empty());
        assert!(!recipe.feature_columns.contains(&recipe.protected_column));
        assert_eq!(recipe.delimiter.len(), 1);
    }
});
