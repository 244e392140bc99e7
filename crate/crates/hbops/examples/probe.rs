use hbops::bodies::{l2_ball, space, BodyExpr};
use hbops::exactnum::RatVector;
use hbops::hahn_banach::*;
use hbops::operators::LinOperator;
use std::time::Instant;

fn main() {
    let s = space(l2_ball(2)).unwrap();
    let t0 = Instant::now();
    let xn = net_space_public(&s, 8).unwrap();
    eprintln!("net_space {:?}", t0.elapsed());
    let t1 = Instant::now();
    let emb = embed_linf(&xn).unwrap();
    eprintln!("embed N={} {:?}", emb.count(), t1.elapsed());
    let t2 = Instant::now();
    let tn = LinOperator::new(hbops::exactnum::RatMatrix::identity(2), xn.clone(), xn.clone()).unwrap();
    let (v, _, _) = min_extension_norm(&tn).unwrap();
    eprintln!("min_ext {:?} in {:?}", v, t2.elapsed());
}
