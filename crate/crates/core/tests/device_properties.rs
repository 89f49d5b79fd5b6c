use proptest::prelude::*;
use sramsim_core::{simulate, Bit, BitVector, NullSink, SimTime, Sram, SramConfig, Stimulus};

fn bit() -> impl Strategy<Value = Bit> {
    prop_oneof![Just(Bit::Zero), Just(Bit::One), Just(Bit::Unknown)]
}

fn word(width: usize) -> impl Strategy<Value = BitVector> {
    prop::collection::vec(bit(), width).prop_map(|b| BitVector::from_bits(b).unwrap())
}

fn image() -> impl Strategy<Value = (u16, u16)> {
    (any::<u16>(), any::<u16>())
}

fn device((lo, hi): (u16, u16)) -> Sram {
    let mut cfg = SramConfig::default();
    cfg.init = vec![
        BitVector::from_u64(lo.into(), 16).unwrap(),
        BitVector::from_u64(hi.into(), 16).unwrap(),
    ];
    Sram::new(cfg).unwrap()
}

proptest! {
    #[test]
    fn read_never_mutates(img in image(), steps in prop::collection::vec((bit(), word(4), word(2)), 1..30)) {
        let mut s = device(img);
        let before = s.memory().to_vec();
        for (i, (clk, a, d)) in steps.iter().enumerate() {
            s.apply(SimTime(i as u64 * 100), Bit::Zero, *clk, a, d).unwrap();
        }
        prop_assert_eq!(s.memory(), &before[..]);
    }

    #[test]
    fn write_first(img in image(), addr in 0u64..16, data in 0u64..4) {
        let mut s = device(img);
        let a = BitVector::from_u64(addr, 4).unwrap();
        let d = BitVector::from_u64(data, 2).unwrap();
        s.apply(SimTime(0), Bit::One, Bit::Zero, &a, &d).unwrap();
        let r = s.apply(SimTime(100), Bit::One, Bit::One, &a, &d).unwrap();
        prop_assert_eq!(&r.updates.last().unwrap().value, &d);
        prop_assert_eq!(s.peek(addr as usize).unwrap(), d);
    }

    #[test]
    fn constant_clock_never_writes(img in image(), level in any::<bool>(),
                                   steps in prop::collection::vec((word(4), word(2)), 1..30)) {
        let mut s = device(img);
        let before = s.memory().to_vec();
        for (i, (a, d)) in steps.iter().enumerate() {
            s.apply(SimTime(i as u64 * 100), Bit::One, Bit::from_bool(level), a, d).unwrap();
        }
        prop_assert_eq!(s.memory(), &before[..]);
    }

    /// Violations only ever turn defined bits into Unknown.
    #[test]
    fn corruption_is_monotone(img in image(), jitter in prop::collection::vec((0u64..2000, 0u8..3, 0u64..16), 1..6)) {
        let mut text = String::from(
            "signal WE 1\nsignal WCLK 1\nsignal A 4\nsignal D 2\nat 0 WE 1\nat 0 A 5\nat 0 D 0b10\nat 0 WCLK 0\nat 10000 WCLK 1\n",
        );
        let mut seen = std::collections::HashSet::new();
        for (off, which, v) in jitter {
            let t = 9000 + off;
            let (name, val) = match which { 0 => ("WE", v & 1), 1 => ("A", v), _ => ("D", v & 3) };
            if t == 10000 && name == "WCLK" || !seen.insert((t, name)) { continue; }
            text.push_str(&format!("at {t} {name} {val}\n"));
        }
        text.push_str("run 20000\n");
        let stim = Stimulus::parse(&text).unwrap();
        let mut cfg = SramConfig::default();
        cfg.init = device(img).config().init.clone();
        let (clean_dev, _) = {
            let mut quiet = cfg.clone();
            quiet.t_setup = 0;
            quiet.t_hold = 0;
            simulate(&quiet, &stim, &mut NullSink).unwrap()
        };
        let (dev, _) = simulate(&cfg, &stim, &mut NullSink).unwrap();
        for (w, (clean, checked)) in clean_dev.memory().iter().zip(dev.memory()).enumerate() {
            for b in 0..2 {
                let c = checked.bit(b);
                prop_assert!(c == clean.bit(b) || c == Bit::Unknown, "word {w} bit {b}");
            }
        }
    }
}
