//! Named example languages and their command-line parameters.

use clap::{Args, ValueEnum};
use gpp_core::generators::{
    gen_equivalence_prefix, gen_example1, gen_family_products, gen_multiscale, gen_waves,
    nonempty_subsets, rise_fall_flat,
};
use gpp_core::{Error, Language, Letter, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    Ex1,
    Roots,
    Products,
    Multiscale,
    Waves,
}

/// Lists use `,` between items and `;` between groups; multiscale levels
/// are separated by `/`.
#[derive(Debug, Clone, Args)]
pub struct ExampleArgs {
    /// Alphabet size.
    #[arg(long)]
    pub domain_size: Option<u32>,
    /// roots: partition of the alphabet into classes, e.g. "1,2;3,4".
    #[arg(long)]
    pub classes: Option<String>,
    /// roots, waves: words over class or relation indices (0-based), e.g. "0;0,1".
    #[arg(long)]
    pub words: Option<String>,
    /// products: the set family, e.g. "1,2;3,4".
    #[arg(long)]
    pub family: Option<String>,
    /// products: maximum number of family factors.
    #[arg(long, default_value_t = 1)]
    pub r1: usize,
    /// products: maximum number of singleton factors.
    #[arg(long, default_value_t = 1)]
    pub r2: usize,
    /// multiscale: partitions from coarse to fine, e.g. "1,2;3,4/1;2;3;4".
    #[arg(long)]
    pub levels: Option<String>,
    /// multiscale: maximum product length.
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    /// waves: unary suffix sets; defaults to every nonempty subset.
    #[arg(long)]
    pub suffix_sets: Option<String>,
}

fn parse_list<T: std::str::FromStr>(text: &str, flag: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|t| {
            t.trim().parse().map_err(|_| Error::Validation {
                path: flag.into(),
                message: format!("cannot parse {t:?}"),
            })
        })
        .collect()
}

pub fn parse_groups<T: std::str::FromStr>(text: &str, flag: &str) -> Result<Vec<Vec<T>>> {
    text.split(';').map(|g| parse_list(g, flag)).collect()
}

impl ExampleArgs {
    pub fn build(&self, example: Example) -> Result<Language> {
        match example {
            Example::Ex1 => gen_example1(self.domain_size.unwrap_or(4)),
            Example::Roots => {
                let classes: Vec<Vec<Letter>> =
                    parse_groups(self.classes.as_deref().unwrap_or("1,2;3,4"), "--classes")?;
                let words: Vec<Vec<usize>> =
                    parse_groups(self.words.as_deref().unwrap_or("0;0,1"), "--words")?;
                gen_equivalence_prefix(self.domain_size.unwrap_or(4), &classes, &words)
            }
            Example::Products => {
                let family: Vec<Vec<Letter>> =
                    parse_groups(self.family.as_deref().unwrap_or("1,2;3,4"), "--family")?;
                gen_family_products(self.domain_size.unwrap_or(4), &family, self.r1, self.r2)
            }
            Example::Multiscale => {
                let levels = self
                    .levels
                    .as_deref()
                    .unwrap_or("1,2;3,4/1;2;3;4")
                    .split('/')
                    .map(|l| parse_groups(l, "--levels"))
                    .collect::<Result<Vec<Vec<Vec<Letter>>>>>()?;
                gen_multiscale(self.domain_size.unwrap_or(4), &levels, self.r)
            }
            Example::Waves => {
                let d = self.domain_size.unwrap_or(3);
                let words: Vec<Vec<usize>> =
                    parse_groups(self.words.as_deref().unwrap_or("2;2,2"), "--words")?;
                let suffix_sets = match &self.suffix_sets {
                    Some(t) => parse_groups(t, "--suffix-sets")?,
                    None => nonempty_subsets(d),
                };
                gen_waves(d, &rise_fall_flat(d), &words, &suffix_sets)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> ExampleArgs {
        ExampleArgs {
            domain_size: None,
            classes: None,
            words: None,
            family: None,
            r1: 1,
            r2: 1,
            levels: None,
            r: 2,
            suffix_sets: None,
        }
    }

    #[test]
    fn every_default_builds() {
        for e in Example::value_variants() {
            let lang = defaults().build(*e).unwrap();
            assert!(!lang.is_empty(), "{e:?}");
        }
    }

    #[test]
    fn bad_groups_are_validation_errors() {
        let mut a = defaults();
        a.classes = Some("1,x".into());
        assert!(matches!(
            a.build(Example::Roots),
            Err(Error::Validation { .. })
        ));
        assert_eq!(
            parse_groups::<u32>("1,2;3", "f").unwrap(),
            vec![vec![1, 2], vec![3]]
        );
    }

    #[test]
    fn flat_waves_count() {
        assert_eq!(defaults().build(Example::Waves).unwrap().len(), 21);
    }
}
