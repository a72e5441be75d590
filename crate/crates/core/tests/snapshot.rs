mod common;

use common::*;
use ymh_core::snapshot::{read_snapshot, write_snapshot};
use ymh_core::Error;

#[test]
fn snapshot_round_trips_bit_for_bit() {
    let mut r = rng(50);
    for (_, bg) in [grid2(10, -1), grid3(5, [1, 2, 0])] {
        let pair = random_pair(&mut r, &bg, 0.37);
        let mut buf = Vec::new();
        write_snapshot(&pair, &mut buf).unwrap();
        let back = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back.eps, pair.eps);
        assert_eq!(back.u.values(), pair.u.values());
        assert_eq!(back.alpha.values(), pair.alpha.values());
        assert_eq!(back.grid().flux(), pair.grid().flux());
        assert_eq!(back.grid().dims(), pair.grid().dims());
        assert_eq!(back.grid().lengths(), pair.grid().lengths());
    }
}

#[test]
fn corrupt_snapshots_are_rejected() {
    let mut r = rng(51);
    let (_, bg) = grid2(6, 0);
    let mut buf = Vec::new();
    write_snapshot(&random_pair(&mut r, &bg, 0.5), &mut buf).unwrap();
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(matches!(read_snapshot(bad.as_slice()), Err(Error::Snapshot(_))));
    let mut bad = buf.clone();
    bad[4] = 9;
    assert!(matches!(read_snapshot(bad.as_slice()), Err(Error::Snapshot(_))));
    assert!(read_snapshot(&buf[..buf.len() - 3]).is_err());
}
