#![no_main]

use fairclust::{read_dataset, Recipe, Scaling};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let mut recipe = Recipe::new("fuzz", &["a", "b"], "g").unwrap();
    recipe.interval_columns = vec!["b".into()];
    recipe.exclude_protected = vec!["?".into()];
    for scaling in [Scaling::None, Scaling::Standard] {
        if let Ok(ds) = read_dataset(data, &recipe.clone().with_scaling(scaling)) {
            assert!(ds.n() > 0);
            assert_eq!(ds.dim(), 2);
            assert!(ds.points().flatten().all(|x| x.is_finite()));
            assert_eq!(ds.group_counts().iter().sum::<usize>(), ds.n());
            assert_eq!(ds.revalidate().unwrap(), ds);
        }
    }
});
