use casimir_core::analytic::tictactoe_exact;
use casimir_core::worldline::*;
use casimir_core::*;
use std::time::Instant;
fn main() {
    let ens = LoopEnsemble::generate(&EnsembleSpec::new(1)).unwrap();
    let t = Instant::now();
    let sq = Configuration::tictactoe(TicTacToe::new(1.0, 1.0).unwrap());
    let e = estimate_energy_on(&sq, &ens, WeightMethod::ClosedForm).unwrap();
    println!("square {:?} exact {} {:?}", e, tictactoe_exact(1.0,1.0,1e-10).unwrap(), t.elapsed());
    let small = LoopEnsemble::generate(&EnsembleSpec::new(1).with_loops(50)).unwrap();
    for r in [0.1, 1.0, 10.0] {
        let cfg = Family::IsoTriangle.configuration(r).unwrap();
        let t = Instant::now();
        let n = estimate_energy_on(&cfg, &small, WeightMethod::Numeric).unwrap();
        let dt = t.elapsed();
        let c = estimate_energy_on(&cfg, &small, WeightMethod::ClosedForm).unwrap();
        println!("tri r={r} numeric {:?} closed {:?} ratio {} time {:?}", n.epsilon, c.epsilon, n.value/c.value, dt);
    }
}
