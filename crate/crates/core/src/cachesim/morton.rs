//! Z-Morton keys: row bits in odd positions, column bits in even ones.

fn spread(v: u32) -> u64 {
    let mut x = v as u64;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

fn compact(v: u64) -> u32 {
    let mut x = v & 0x5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x >> 4)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x >> 8)) & 0x0000_ffff_0000_ffff;
    x = (x | (x >> 16)) & 0x0000_0000_ffff_ffff;
    x as u32
}

pub fn morton_encode(row: u32, col: u32) -> u64 {
    (spread(row) << 1) | spread(col)
}

pub fn morton_decode(key: u64) -> (u32, u32) {
    (compact(key >> 1), compact(key))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_quad() {
        assert_eq!(morton_encode(0, 0), 0);
        assert_eq!(morton_encode(0, 1), 1);
        assert_eq!(morton_encode(1, 0), 2);
        assert_eq!(morton_encode(1, 1), 3);
        assert_eq!(morton_encode(0, 2), 4);
        assert_eq!(morton_encode(2, 2), 12);
    }

    #[test]
    fn quadrants_are_contiguous() {
        // every key of the top-left 4x4 quadrant precedes the top-right one
        let tl = (0..4)
            .flat_map(|r| (0..4).map(move |c| morton_encode(r, c)))
            .max()
            .unwrap();
        let tr = (0..4)
            .flat_map(|r| (4..8).map(move |c| morton_encode(r, c)))
            .min()
            .unwrap();
        assert!(tl < tr);
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(r in any::<u32>(), c in any::<u32>()) {
            prop_assert_eq!(morton_decode(morton_encode(r, c)), (r, c));
        }
    }
}
