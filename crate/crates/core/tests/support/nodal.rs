//! Modified nodal analysis of a resistor netlist with one ideal voltage
//! source, solved by dense Gaussian elimination with partial pivoting.
//! Written without reference to the closed form used by the library.

pub struct Resistor {
    pub a: usize,
    pub b: usize,
    pub ohms: f64,
}

pub struct Netlist {
    /// Node 0 is ground.
    pub nodes: usize,
    pub resistors: Vec<Resistor>,
    /// Ideal source from ground to `source_node`.
    pub source_node: usize,
    pub volts: f64,
}

pub struct Solution {
    pub node_v: Vec<f64>,
    /// Current delivered by the source.
    pub source_i: f64,
}

impl Netlist {
    pub fn solve(&self) -> Solution {
        // unknowns: v_1..v_{nodes-1}, then the source current
        let m = self.nodes;
        let mut a = vec![vec![0.0; m + 1]; m];
        let idx = |node: usize| node - 1;
        for r in &self.resistors {
            let g = 1.0 / r.ohms;
            if r.a != 0 {
                a[idx(r.a)][idx(r.a)] += g;
            }
            if r.b != 0 {
                a[idx(r.b)][idx(r.b)] += g;
            }
            if r.a != 0 && r.b != 0 {
                a[idx(r.a)][idx(r.b)] -= g;
                a[idx(r.b)][idx(r.a)] -= g;
            }
        }
        let k = m - 1;
        // source current leaves the source node into the network
        a[idx(self.source_node)][k] -= 1.0;
        a[k][idx(self.source_node)] = 1.0;
        a[k][m] = self.volts;
        let x = gauss(a);
        let mut node_v = vec![0.0];
        node_v.extend_from_slice(&x[..k]);
        Solution {
            node_v,
            source_i: x[k],
        }
    }

    pub fn resistor_current(&self, sol: &Solution, i: usize) -> f64 {
        let r = &self.resistors[i];
        (sol.node_v[r.a] - sol.node_v[r.b]) / r.ohms
    }
}

/// Solves an augmented `n × (n+1)` system.
fn gauss(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let (top, bottom) = a.split_at_mut(row);
                for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    x
}
