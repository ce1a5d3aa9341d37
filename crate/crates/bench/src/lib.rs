//! Benchmark fixtures shared by the criterion targets.

use lipvol::chain::Chain;
use lipvol::quotient::{build_net, genus_surface, Net, Quotient};

pub struct Fixture {
    pub m: Quotient,
    pub n: Quotient,
    pub net_n: Net,
    pub net_m: Net,
    pub fan: Chain,
}

pub fn fixture() -> Fixture {
    let m = genus_surface(2).expect("genus 2");
    let n = genus_surface(3).expect("genus 3");
    let net_n = build_net(&n, 0.25).expect("net");
    let net_m = build_net(&m, 0.5).expect("net");
    let fan = m.fan_fundamental_cycle();
    Fixture { m, n, net_n, net_m, fan }
}
