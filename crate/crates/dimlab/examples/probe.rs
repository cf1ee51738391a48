use dimlab::construct::*;
use dimlab::cover::*;
use dimlab::exact::*;
use dimlab::params::*;
use num_bigint::BigUint;
use std::time::Instant;

fn main() {
    let p = CParams::new(rat(6, 10), rat(7, 10), SequenceSpec::new(SeqRole::N, SeqKind::TwoPowSquare)).unwrap();
    let kseq = SequenceSpec::new(SeqRole::K, SeqKind::Squares);
    let d = build_d(&p, &kseq, 12).unwrap();
    eprintln!("built {} points", d.points().unwrap().len());
    let t = Instant::now();
    let geom = CoverGeometry::from_approx(&d).unwrap();
    eprintln!("from_approx: {:?}", t.elapsed());
    let t = Instant::now();
    let blocks = geom.merged_blocks();
    eprintln!("merged_blocks: {:?} ({} blocks)", t.elapsed(), blocks.len());
    for m in [4u32, 8, 12] {
        let t = Instant::now();
        let e = p.cum(&BigUint::from(m)).unwrap();
        let delta = ScaleExponent(e);
        let exact = greedy_cover_count(&geom, &delta).unwrap();
        eprintln!("greedy at m={}: {:?}, count {}", m, t.elapsed(), exact.exact().unwrap());
    }
}
