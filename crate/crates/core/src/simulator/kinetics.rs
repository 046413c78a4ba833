use crate::crn::Network;

const NONE: u32 = u32::MAX;

/// Mass-action right-hand side of a network, restricted to the reactions
/// whose phase does not exceed the active phase.
///
/// Reactions are flattened into parallel arrays; `delta` holds the net
/// stoichiometric change per unit flux, `start[r]..start[r + 1]` being the
/// entries of reaction `r`.
#[derive(Debug, Clone)]
pub(crate) struct Kinetics {
    k: Vec<f64>,
    a: Vec<u32>,
    b: Vec<u32>,
    start: Vec<usize>,
    delta: Vec<(u32, f64)>,
    phase: Vec<u32>,
    active: usize,
}

impl Kinetics {
    pub fn new(net: &Network) -> Self {
        let idx = |s| net.index_of(s).expect("reaction species are registered") as u32;
        let mut order: Vec<usize> = (0..net.reactions().len()).collect();
        // stable: keeps network order within a phase
        order.sort_by_key(|&i| net.reactions()[i].phase());

        let mut kin = Kinetics {
            k: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
            start: vec![0],
            delta: Vec::new(),
            phase: Vec::new(),
            active: 0,
        };
        for i in order {
            let r = &net.reactions()[i];
            let mut delta: Vec<(u32, f64)> = Vec::new();
            let mut bump = |i: u32, d: f64| match delta.iter_mut().find(|(j, _)| *j == i) {
                Some((_, v)) => *v += d,
                None => delta.push((i, d)),
            };
            for s in r.reactants() {
                bump(idx(s), -1.0);
            }
            for (s, c) in r.products() {
                bump(idx(s), f64::from(*c));
            }
            delta.retain(|(_, d)| *d != 0.0);
            let rs = r.reactants();
            kin.k.push(r.rate().constant);
            kin.a.push(idx(&rs[0]));
            kin.b.push(rs.get(1).map_or(NONE, idx));
            kin.delta.extend(delta);
            kin.start.push(kin.delta.len());
            kin.phase.push(r.phase());
        }
        kin.active = kin.k.len();
        kin
    }

    /// Activate every reaction of phase `<= p` (`None` activates all).
    pub fn activate(&mut self, p: Option<u32>) {
        self.active = match p {
            None => self.k.len(),
            Some(p) => self.phase.partition_point(|&q| q <= p),
        };
    }

    pub fn active_count(&self) -> usize {
        self.active
    }

    /// `out = dc/dt`. Summation order is fixed, so results are reproducible.
    pub fn eval(&self, c: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for r in 0..self.active {
            let mut flux = self.k[r] * c[self.a[r] as usize];
            let b = self.b[r];
            if b != NONE {
                flux *= c[b as usize];
            }
            if flux == 0.0 {
                continue;
            }
            for &(i, d) in &self.delta[self.start[r]..self.start[r + 1]] {
                out[i as usize] += d * flux;
            }
        }
    }
}
