//! Paradoxical decompositions of every cylinder of depth at most 3 in the O2 model.

use ample_comparison::catalog;
use ample_comparison::comparison::Explorer;
use ample_comparison::symbolic::Clopen;

fn main() {
    let g = catalog::o2_action();
    let ex = Explorer::new(&g, 8);
    for (w, outcome) in &ex.purely_infinite_scan(3).entries {
        let cylinder = Clopen::cylinder(g.shift(), w.clone()).unwrap();
        match outcome.verified() {
            Some(p) => println!("{w:?}: verified {}", p.verify(&cylinder)),
            None => println!("{w:?}: {outcome:?}"),
        }
    }
}
