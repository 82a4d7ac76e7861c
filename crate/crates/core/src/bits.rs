/// Square boolean matrix with bit-packed rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitMatrix {
    n: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        BitMatrix {
            n,
            words,
            data: vec![0; n * words],
        }
    }

    pub fn set(&mut self, r: usize, c: usize) {
        self.data[r * self.words + c / 64] |= 1 << (c % 64);
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.words + c / 64] & (1 << (c % 64)) != 0
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    /// Column indices set in row `r`, ascending.
    pub fn ones(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        self.row(r).iter().enumerate().flat_map(move |(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
            .filter(move |&c| c < n)
        })
    }
}
