//! Companion models for one flux-modulated lattice switch.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::INCIDENCE;

/// Series array of identical flux-tunable inductors, each shunted by the
/// junction self-capacitance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunableInductorArray {
    pub n_cells: u32,
    pub l0_total: f64,
    pub epsilon: f64,
    pub lg_total: f64,
    pub cj: f64,
}

impl Default for TunableInductorArray {
    fn default() -> Self {
        Self {
            n_cells: 46,
            l0_total: 1.02e-9,
            epsilon: 2.5e-2,
            lg_total: 207e-12,
            cj: 180e-15,
        }
    }
}

impl TunableInductorArray {
    pub fn validate(&self) -> Result<()> {
        if self.n_cells == 0 {
            return Err(invalid("n_cells", "need at least one cell"));
        }
        if !(self.l0_total > 0.0 && self.lg_total >= 0.0) {
            return Err(invalid("l0_total", "l0 must be positive and l_g non-negative"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon", "must lie in (0, 1)"));
        }
        if !(self.cj >= 0.0) {
            return Err(invalid("cj", "must be non-negative"));
        }
        Ok(())
    }

    /// Inductance of one cell at flux `phi`.
    pub fn cell_inductance(&self, phi: f64) -> f64 {
        let n = f64::from(self.n_cells);
        let e = self.epsilon;
        let c = phi.cos();
        self.l0_total / n / (e * e + (1.0 - 2.0 * e) * c * c).sqrt() + self.lg_total / n
    }

    pub fn total_inductance(&self, phi: f64) -> f64 {
        f64::from(self.n_cells) * self.cell_inductance(phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementLaw {
    /// `V = d(L I)/dt`.
    Flux,
    /// `V = L dI/dt`.
    Current,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellMode {
    /// The array as one element, `N·l(Φ)` shunted by `c_J/N`.
    Collapsed,
    /// Every cell integrated separately.
    Explicit,
}

#[derive(Debug, Clone, Copy, Default)]
struct CellState {
    v: f64,
    /// Flux linkage (flux law) or current (current law) of the inductor.
    x: f64,
    i_l: f64,
    l: f64,
    i_c: f64,
}

/// One arm of the lattice: `cells` identical inductors in series, each with
/// inductance `scale·l(Φ)` and shunt `cap`.
#[derive(Debug, Clone)]
struct Arm {
    from: usize,
    to: usize,
    through: bool,
    scale: f64,
    cap: f64,
    cells: Vec<CellState>,
    // Per-step companion values, one per cell.
    g: Vec<f64>,
    j: Vec<f64>,
    jl: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct SwitchModel {
    array: TunableInductorArray,
    law: ElementLaw,
    node_cap: f64,
    z0: f64,
    arms: Vec<Arm>,
    v_node: [f64; 4],
    i_node_cap: [f64; 4],
    initialised: bool,
}

/// Branch and node stamps for one time step: `Y v = rhs`.
pub(crate) struct Stamp {
    pub y: [[f64; 4]; 4],
    pub rhs: [f64; 4],
}

impl SwitchModel {
    pub(crate) fn new(
        array: TunableInductorArray,
        node_cap: f64,
        z0: f64,
        law: ElementLaw,
        mode: CellMode,
    ) -> Self {
        let (cells, scale, cap) = match mode {
            CellMode::Collapsed => (1, f64::from(array.n_cells), array.cj / f64::from(array.n_cells)),
            CellMode::Explicit => (array.n_cells as usize, 1.0, array.cj),
        };
        let arms = INCIDENCE[..4]
            .iter()
            .enumerate()
            .map(|(k, row)| {
                let from = row.iter().position(|&v| v == 1).expect("arm start");
                let to = row.iter().position(|&v| v == -1).expect("arm end");
                Arm {
                    from,
                    to,
                    // Chords 1 and 4 join 1–2 and 3–4.
                    through: k == 0 || k == 3,
                    scale,
                    cap,
                    cells: vec![CellState::default(); cells],
                    g: vec![0.0; cells],
                    j: vec![0.0; cells],
                    jl: vec![0.0; cells],
                }
            })
            .collect();
        Self {
            array,
            law,
            node_cap,
            z0,
            arms,
            v_node: [0.0; 4],
            i_node_cap: [0.0; 4],
            initialised: false,
        }
    }

    /// Builds the nodal system for the step ending at the flux values
    /// `(through, crossed)`, with incident waves `a` at the four nodes.
    pub(crate) fn stamp(&mut self, h: f64, flux: (f64, f64), a: &[f64; 4]) -> Stamp {
        let mut y = [[0.0; 4]; 4];
        let mut rhs = [0.0; 4];
        let sz = self.z0.sqrt();
        if !self.initialised {
            for arm in &mut self.arms {
                let phi = if arm.through { flux.0 } else { flux.1 };
                let l = arm.scale * self.array.cell_inductance(phi);
                for c in &mut arm.cells {
                    c.l = l;
                }
            }
            self.initialised = true;
        }
        for arm in &mut self.arms {
            let phi = if arm.through { flux.0 } else { flux.1 };
            let l_new = arm.scale * self.array.cell_inductance(phi);
            let gc = 2.0 * arm.cap / h;
            let mut inv_sum = 0.0;
            let mut jg_sum = 0.0;
            for (k, c) in arm.cells.iter().enumerate() {
                let gl = h / (2.0 * l_new);
                let jl = match self.law {
                    ElementLaw::Flux => (c.x + 0.5 * h * c.v) / l_new,
                    ElementLaw::Current => c.x + 0.5 * h * c.v / c.l,
                };
                let g = gl + gc;
                let j = jl - gc * c.v - c.i_c;
                arm.g[k] = g;
                arm.j[k] = j;
                arm.jl[k] = jl;
                inv_sum += 1.0 / g;
                jg_sum += j / g;
            }
            let gb = 1.0 / inv_sum;
            let jb = gb * jg_sum;
            let (p, q) = (arm.from, arm.to);
            y[p][p] += gb;
            y[q][q] += gb;
            y[p][q] -= gb;
            y[q][p] -= gb;
            rhs[p] -= jb;
            rhs[q] += jb;
            for c in &mut arm.cells {
                c.l = l_new;
            }
        }
        let gn = 2.0 * self.node_cap / h;
        for i in 0..4 {
            y[i][i] += gn + 1.0 / self.z0;
            rhs[i] += gn * self.v_node[i] + self.i_node_cap[i] + 2.0 * a[i] / sz;
        }
        Stamp { y, rhs }
    }

    /// Commits the solved node voltages and returns the outgoing waves.
    pub(crate) fn commit(&mut self, h: f64, v: &[f64; 4], a: &[f64; 4]) -> [f64; 4] {
        let gn = 2.0 * self.node_cap / h;
        for i in 0..4 {
            self.i_node_cap[i] = gn * (v[i] - self.v_node[i]) - self.i_node_cap[i];
            self.v_node[i] = v[i];
        }
        for arm in &mut self.arms {
            let vb = v[arm.from] - v[arm.to];
            let inv_sum: f64 = arm.g.iter().map(|g| 1.0 / g).sum();
            let jg_sum: f64 = arm.g.iter().zip(&arm.j).map(|(g, j)| j / g).sum();
            let current = (vb + jg_sum) / inv_sum;
            let gc = 2.0 * arm.cap / h;
            for (k, c) in arm.cells.iter_mut().enumerate() {
                let vk = (current - arm.j[k]) / arm.g[k];
                let il = h / (2.0 * c.l) * vk + arm.jl[k];
                c.i_c = gc * (vk - c.v) - c.i_c;
                c.i_l = il;
                c.x = match self.law {
                    ElementLaw::Flux => c.l * il,
                    ElementLaw::Current => il,
                };
                c.v = vk;
            }
        }
        let sz = self.z0.sqrt();
        [
            v[0] / sz - a[0],
            v[1] / sz - a[1],
            v[2] / sz - a[2],
            v[3] / sz - a[3],
        ]
    }

    /// Largest absolute node voltage or cell current, for blow-up detection.
    pub(crate) fn magnitude(&self) -> f64 {
        let v = self.v_node.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        self.arms
            .iter()
            .flat_map(|a| a.cells.iter())
            .fold(v, |m, c| m.max(c.i_l.abs() * self.z0))
    }

    /// Energy stored in capacitors and inductors.
    pub(crate) fn stored_energy(&self) -> f64 {
        let mut e = 0.0;
        for i in 0..4 {
            e += 0.5 * self.node_cap * self.v_node[i] * self.v_node[i];
        }
        for arm in &self.arms {
            for c in &arm.cells {
                e += 0.5 * arm.cap * c.v * c.v + 0.5 * c.l * c.i_l * c.i_l;
            }
        }
        e
    }
}

/// Cholesky solve of a symmetric positive-definite 4×4 system.
pub(crate) fn solve_spd(s: &Stamp) -> Option<[f64; 4]> {
    let a = &s.y;
    let mut l = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    let mut z = [0.0; 4];
    for i in 0..4 {
        let mut sum = s.rhs[i];
        for k in 0..i {
            sum -= l[i][k] * z[k];
        }
        z[i] = sum / l[i][i];
    }
    let mut x = [0.0; 4];
    for i in (0..4).rev() {
        let mut sum = z[i];
        for k in i + 1..4 {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    Some(x)
}
